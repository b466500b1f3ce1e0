//! Truncated Puiseux series in `q` with cyclotomic coefficients.
//!
//! A [`PuiseuxSeries`] stores a sparse map from exponent numerators to
//! nonzero [`CycNum`] coefficients; all exponents are integers divided by a
//! per-series denominator `exp_denom`. Every series carries an explicit
//! truncation order: coefficients at exponents `>= trunc_order` are unknown
//! and binary operations propagate the correct min-based bound. Truncation
//! is never silently extended.
//!
//! The module provides the discriminant cusp form
//! `Delta(q) = q prod_{n>=1} (1 - q^n)^24`, its inverse (whose coefficient
//! at `q^{n-1}` is the Euler characteristic of the Hilbert scheme of `n`
//! points on a K3 surface), the substitution `q -> zeta_r^j q^{1/r}` with
//! the fixed branch `q^{1/r} := e^{2 pi i tau / r}`, exponent scaling
//! `q -> q^m`, and extraction of the sub-series supported on one residue
//! class of exponents mod `r` — implemented both by direct filtering and by
//! averaging over twists by r-th roots of unity.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::cycnum::CycNum;
use crate::error::{Error, Result};
use crate::Rational;

fn rat_int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

fn rat(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

/// Sparse truncated series `sum c_p q^{p/D}` with `p/D < trunc_order`.
#[derive(Clone, Debug)]
pub struct PuiseuxSeries {
    exp_denom: u64,
    terms: BTreeMap<i64, CycNum>,
    trunc_order: Rational,
}

impl PuiseuxSeries {
    /// The zero series, known below `trunc_order`.
    pub fn zero(trunc_order: Rational) -> Self {
        PuiseuxSeries {
            exp_denom: 1,
            terms: BTreeMap::new(),
            trunc_order,
        }
    }

    /// `coeff * q^{num/den}`, known below `trunc_order`.
    pub fn monomial(coeff: CycNum, num: i64, den: u64, trunc_order: Rational) -> Self {
        assert!(den >= 1);
        let mut s = PuiseuxSeries {
            exp_denom: den,
            terms: BTreeMap::new(),
            trunc_order,
        };
        if !coeff.is_zero() && rat(num, den as i64) < s.trunc_order {
            s.terms.insert(num, coeff);
        }
        s
    }

    pub fn one(trunc_order: Rational) -> Self {
        PuiseuxSeries::monomial(CycNum::one(), 0, 1, trunc_order)
    }

    pub fn exp_denom(&self) -> u64 {
        self.exp_denom
    }

    pub fn trunc_order(&self) -> &Rational {
        &self.trunc_order
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    /// Iterate `(exponent, coefficient)` pairs in ascending exponent order.
    pub fn iter(&self) -> impl Iterator<Item = (Rational, &CycNum)> + '_ {
        let d = self.exp_denom as i64;
        self.terms.iter().map(move |(p, c)| (rat(*p, d), c))
    }

    /// Lowest stored exponent, or the truncation order for the zero series.
    pub fn min_exponent(&self) -> Rational {
        match self.terms.keys().next() {
            Some(p) => rat(*p, self.exp_denom as i64),
            None => self.trunc_order.clone(),
        }
    }

    /// Coefficient at `num/den`; `None` when the exponent is at or beyond
    /// the truncation order (i.e. genuinely unknown).
    pub fn coeff(&self, num: i64, den: u64) -> Option<CycNum> {
        let e = rat(num, den as i64);
        if e >= self.trunc_order {
            return None;
        }
        let scaled = &e * rat_int(self.exp_denom as i64);
        if !scaled.denom().is_one() {
            return Some(CycNum::zero());
        }
        let p = scaled.to_integer().to_i64().expect("exponent in range");
        Some(self.terms.get(&p).cloned().unwrap_or_else(CycNum::zero))
    }

    /// Rescale the exponent denominator to a multiple `d` of the current one.
    fn with_denom(&self, d: u64) -> PuiseuxSeries {
        assert_eq!(d % self.exp_denom, 0);
        let f = (d / self.exp_denom) as i64;
        if f == 1 {
            return self.clone();
        }
        PuiseuxSeries {
            exp_denom: d,
            terms: self.terms.iter().map(|(p, c)| (p * f, c.clone())).collect(),
            trunc_order: self.trunc_order.clone(),
        }
    }

    fn insert_checked(&mut self, p: i64, c: CycNum) {
        if !c.is_zero() && rat(p, self.exp_denom as i64) < self.trunc_order {
            self.terms.insert(p, c);
        }
    }

    pub fn add(&self, other: &PuiseuxSeries) -> PuiseuxSeries {
        let d = self.exp_denom.lcm(&other.exp_denom);
        let a = self.with_denom(d);
        let b = other.with_denom(d);
        let trunc = a.trunc_order.clone().min(b.trunc_order.clone());
        let mut out = PuiseuxSeries {
            exp_denom: d,
            terms: BTreeMap::new(),
            trunc_order: trunc,
        };
        for (p, c) in a.terms.iter().chain(b.terms.iter()) {
            if rat(*p, d as i64) >= out.trunc_order {
                continue;
            }
            let entry = out.terms.entry(*p).or_insert_with(CycNum::zero);
            *entry = entry.add(c);
        }
        out.terms.retain(|_, c| !c.is_zero());
        out
    }

    pub fn neg(&self) -> PuiseuxSeries {
        PuiseuxSeries {
            exp_denom: self.exp_denom,
            terms: self.terms.iter().map(|(p, c)| (*p, c.neg())).collect(),
            trunc_order: self.trunc_order.clone(),
        }
    }

    pub fn sub(&self, other: &PuiseuxSeries) -> PuiseuxSeries {
        self.add(&other.neg())
    }

    pub fn scale(&self, k: &CycNum) -> PuiseuxSeries {
        if k.is_zero() {
            return PuiseuxSeries::zero(self.trunc_order.clone());
        }
        let mut out = PuiseuxSeries {
            exp_denom: self.exp_denom,
            terms: BTreeMap::new(),
            trunc_order: self.trunc_order.clone(),
        };
        for (p, c) in &self.terms {
            let prod = c.mul(k);
            if !prod.is_zero() {
                out.terms.insert(*p, prod);
            }
        }
        out
    }

    pub fn scale_rational(&self, k: &Rational) -> PuiseuxSeries {
        self.scale(&CycNum::from_rational(k.clone()))
    }

    /// Product with the honest truncation bound
    /// `min(lo(a) + trunc(b), lo(b) + trunc(a))`.
    pub fn mul(&self, other: &PuiseuxSeries) -> PuiseuxSeries {
        let d = self.exp_denom.lcm(&other.exp_denom);
        let a = self.with_denom(d);
        let b = other.with_denom(d);
        let trunc = (a.min_exponent() + &b.trunc_order).min(b.min_exponent() + &a.trunc_order);
        let mut out = PuiseuxSeries {
            exp_denom: d,
            terms: BTreeMap::new(),
            trunc_order: trunc,
        };
        let bound = (&out.trunc_order * rat_int(d as i64)).ceil().to_integer();
        for (pa, ca) in &a.terms {
            for (pb, cb) in &b.terms {
                let p = pa + pb;
                if BigInt::from(p) >= bound {
                    continue;
                }
                let prod = ca.mul(cb);
                if prod.is_zero() {
                    continue;
                }
                let entry = out.terms.entry(p).or_insert_with(CycNum::zero);
                *entry = entry.add(&prod);
            }
        }
        out.terms.retain(|_, c| !c.is_zero());
        out
    }

    /// Multiply by the exact monomial `q^{num/den}` (a shift of exponents);
    /// the truncation order shifts along.
    pub fn shift(&self, num: i64, den: u64) -> PuiseuxSeries {
        let d = self.exp_denom.lcm(&den);
        let a = self.with_denom(d);
        let delta = num * (d / den) as i64;
        PuiseuxSeries {
            exp_denom: d,
            terms: a.terms.iter().map(|(p, c)| (p + delta, c.clone())).collect(),
            trunc_order: a.trunc_order + rat(num, den as i64),
        }
    }

    /// Restrict to exponents `< trunc` (no-op if already tighter).
    pub fn truncate_to(&self, trunc: Rational) -> PuiseuxSeries {
        if trunc >= self.trunc_order {
            return self.clone();
        }
        let d = self.exp_denom as i64;
        PuiseuxSeries {
            exp_denom: self.exp_denom,
            terms: self
                .terms
                .iter()
                .filter(|(p, _)| rat(**p, d) < trunc)
                .map(|(p, c)| (*p, c.clone()))
                .collect(),
            trunc_order: trunc,
        }
    }

    /// Multiplicative inverse. Requires the lowest-order coefficient to be a
    /// nonzero unit; the result is known below `trunc - 2 * lo`.
    pub fn invert(&self) -> Result<PuiseuxSeries> {
        let (&lo, lead) = self.terms.iter().next().ok_or(Error::NonUnitLeading)?;
        let lead_inv = lead.inverse().map_err(|_| Error::NonUnitLeading)?;
        let d = self.exp_denom;
        // Write s = lead q^{lo/d} (1 + u); compute (1 + u)^{-1} by the dense
        // coefficient recurrence in steps of 1/d.
        let rel_trunc = &self.trunc_order - rat(lo, d as i64); // known length of 1 + u
        let len = (&rel_trunc * rat_int(d as i64))
            .ceil()
            .to_integer()
            .to_i64()
            .expect("series length fits in i64");
        if len <= 0 {
            return Ok(PuiseuxSeries::zero(rat(-lo, d as i64)));
        }
        let len = len as usize;
        let mut u = vec![CycNum::zero(); len];
        for (p, c) in &self.terms {
            let k = (p - lo) as usize;
            if k > 0 && k < len {
                u[k] = c.mul(&lead_inv);
            }
        }
        let mut h = vec![CycNum::zero(); len];
        h[0] = CycNum::one();
        for n in 1..len {
            let mut acc = CycNum::zero();
            for k in 1..=n {
                if u[k].is_zero() || h[n - k].is_zero() {
                    continue;
                }
                acc = acc.add(&u[k].mul(&h[n - k]));
            }
            h[n] = acc.neg();
        }
        // inverse = lead^{-1} q^{-lo/d} (1 + u)^{-1}, known below trunc - 2 lo.
        let mut out = PuiseuxSeries {
            exp_denom: d,
            terms: BTreeMap::new(),
            trunc_order: &self.trunc_order - rat(2 * lo, d as i64),
        };
        for (k, c) in h.into_iter().enumerate() {
            let coeff = c.mul(&lead_inv);
            if !coeff.is_zero() {
                out.insert_checked(k as i64 - lo, coeff);
            }
        }
        Ok(out)
    }

    /// The substitution `q -> zeta_r^j q^{1/r}` with the fixed branch
    /// `q^{1/r} = e^{2 pi i tau / r}`: each term `c q^e` maps to
    /// `c e^{2 pi i j e / r} q^{e/r}`. The exponent denominator becomes
    /// `r * D` and coefficients pick up roots of unity of order `r * D`.
    pub fn substitute(&self, r: u64, j: i64) -> PuiseuxSeries {
        assert!(r >= 1);
        let d = self.exp_denom;
        let rd = r * d;
        let mut out = PuiseuxSeries {
            exp_denom: rd,
            terms: BTreeMap::new(),
            trunc_order: &self.trunc_order / rat_int(r as i64),
        };
        for (p, c) in &self.terms {
            let phase = CycNum::root_of_unity(rd, j.wrapping_mul(*p));
            out.terms.insert(*p, c.mul(&phase));
        }
        out
    }

    /// The substitution `q -> q^m`.
    pub fn scale_exponent(&self, m: u64) -> PuiseuxSeries {
        assert!(m >= 1);
        PuiseuxSeries {
            exp_denom: self.exp_denom,
            terms: self
                .terms
                .iter()
                .map(|(p, c)| (p * m as i64, c.clone()))
                .collect(),
            trunc_order: &self.trunc_order * rat_int(m as i64),
        }
    }

    /// Coefficient-twist `c q^p -> c zeta_r^{jp} q^p` for integer-exponent
    /// series; this is evaluation at `zeta_r^j x` in the variable `x = q`.
    fn root_twist(&self, r: u64, j: i64) -> PuiseuxSeries {
        debug_assert_eq!(self.exp_denom, 1);
        PuiseuxSeries {
            exp_denom: 1,
            terms: self
                .terms
                .iter()
                .map(|(p, c)| (*p, c.mul(&CycNum::root_of_unity(r, j.wrapping_mul(*p)))))
                .collect(),
            trunc_order: self.trunc_order.clone(),
        }
    }

    fn check_sector_pre(&self) -> Result<()> {
        let nonneg = self.terms.keys().next().map_or(true, |&p| p >= 0);
        if self.exp_denom != 1 || !nonneg {
            return Err(Error::SectorPrecondition);
        }
        Ok(())
    }

    /// Sub-series supported on exponents `== k mod r`, by direct filtering.
    pub fn sector_extract(&self, r: u64, k: i64) -> Result<PuiseuxSeries> {
        self.check_sector_pre()?;
        let k = k.rem_euclid(r as i64);
        Ok(PuiseuxSeries {
            exp_denom: 1,
            terms: self
                .terms
                .iter()
                .filter(|(p, _)| p.rem_euclid(r as i64) == k)
                .map(|(p, c)| (*p, c.clone()))
                .collect(),
            trunc_order: self.trunc_order.clone(),
        })
    }

    /// The same sector via the discrete Fourier average
    /// `(1/r) sum_j zeta_r^{-jk} psi(zeta_r^j x)`; must agree exactly with
    /// [`Self::sector_extract`].
    pub fn sector_extract_by_average(&self, r: u64, k: i64) -> Result<PuiseuxSeries> {
        self.check_sector_pre()?;
        let mut acc = PuiseuxSeries::zero(self.trunc_order.clone());
        for j in 0..r as i64 {
            let w = CycNum::root_of_unity(r, -j * k);
            acc = acc.add(&self.root_twist(r, j).scale(&w));
        }
        Ok(acc.scale_rational(&rat(1, r as i64)))
    }

    /// True when the two series agree coefficient-wise on the range where
    /// both are known (exponents below the smaller truncation order).
    pub fn agrees_with(&self, other: &PuiseuxSeries) -> bool {
        let bound = self.trunc_order.clone().min(other.trunc_order.clone());
        let d = self.exp_denom.lcm(&other.exp_denom);
        let a = self.with_denom(d);
        let b = other.with_denom(d);
        let keys: std::collections::BTreeSet<i64> =
            a.terms.keys().chain(b.terms.keys()).copied().collect();
        for p in keys {
            if rat(p, d as i64) >= bound {
                continue;
            }
            let ca = a.terms.get(&p).cloned().unwrap_or_else(CycNum::zero);
            let cb = b.terms.get(&p).cloned().unwrap_or_else(CycNum::zero);
            if ca != cb {
                return false;
            }
        }
        true
    }
}

impl PartialEq for PuiseuxSeries {
    fn eq(&self, other: &Self) -> bool {
        if self.trunc_order != other.trunc_order {
            return false;
        }
        let d = self.exp_denom.lcm(&other.exp_denom);
        self.with_denom(d).terms == other.with_denom(d).terms
    }
}

impl Eq for PuiseuxSeries {}

impl fmt::Display for PuiseuxSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            write!(f, "0")?;
        } else {
            let mut first = true;
            for (e, c) in self.iter() {
                if !first {
                    write!(f, " + ")?;
                }
                first = false;
                let cs = c.to_string();
                let parens = cs.contains(' ') || cs.contains("zeta") || cs.starts_with('-');
                if parens {
                    write!(f, "({cs})")?;
                } else {
                    write!(f, "{cs}")?;
                }
                if !e.is_zero() {
                    if e.is_one() {
                        write!(f, "*q")?;
                    } else if e.denom().is_one() {
                        write!(f, "*q^{}", e.numer())?;
                    } else {
                        write!(f, "*q^({})", e)?;
                    }
                }
            }
        }
        write!(f, " + O(q^({}))", self.trunc_order)
    }
}

// JSON form:
// {"expDenom": D, "truncOrder": "p/q",
//  "terms": [{"exp": "p/q", "coeff": <CycNum>}, ...]} sorted by exponent.
impl Serialize for PuiseuxSeries {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        #[derive(Serialize)]
        struct Term<'a> {
            exp: String,
            coeff: &'a CycNum,
        }
        let terms: Vec<Term> = self
            .iter()
            .map(|(e, c)| Term {
                exp: e.to_string(),
                coeff: c,
            })
            .collect();
        let mut st = serializer.serialize_struct("PuiseuxSeries", 3)?;
        st.serialize_field("expDenom", &self.exp_denom)?;
        st.serialize_field("truncOrder", &self.trunc_order.to_string())?;
        st.serialize_field("terms", &terms)?;
        st.end()
    }
}

impl<'de> Deserialize<'de> for PuiseuxSeries {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct RawTerm {
            exp: String,
            coeff: CycNum,
        }
        #[derive(Deserialize)]
        #[serde(rename_all = "camelCase")]
        struct Raw {
            exp_denom: u64,
            trunc_order: String,
            terms: Vec<RawTerm>,
        }
        let raw = Raw::deserialize(deserializer)?;
        if raw.exp_denom == 0 {
            return Err(D::Error::custom("expDenom must be positive"));
        }
        let trunc: Rational = raw
            .trunc_order
            .parse()
            .map_err(|e| D::Error::custom(format!("bad truncOrder: {e}")))?;
        let mut s = PuiseuxSeries {
            exp_denom: raw.exp_denom,
            terms: BTreeMap::new(),
            trunc_order: trunc,
        };
        for t in raw.terms {
            let e: Rational = t
                .exp
                .parse()
                .map_err(|err| D::Error::custom(format!("bad exponent {:?}: {err}", t.exp)))?;
            let scaled = &e * rat_int(raw.exp_denom as i64);
            if !scaled.denom().is_one() {
                return Err(D::Error::custom("exponent not a multiple of 1/expDenom"));
            }
            let p = scaled
                .to_integer()
                .to_i64()
                .ok_or_else(|| D::Error::custom("exponent out of range"))?;
            s.insert_checked(p, t.coeff);
        }
        Ok(s)
    }
}

// ---------------------------------------------------------------------------
// Delta and its inverse
// ---------------------------------------------------------------------------

/// `Delta(q) = q prod_{n=1}^{order} (1 - q^n)^24`, truncated at `q^order`
/// (all coefficients through `q^order` are exact). Built by sparse product
/// accumulation: each factor `(1 - q^n)^24` is expanded binomially.
pub fn delta(order: i64) -> PuiseuxSeries {
    assert!(order >= 1);
    let trunc = rat_int(order + 1);
    let mut acc = PuiseuxSeries::one(trunc.clone());
    let binom = binomials_24();
    for n in 1..=order {
        let mut factor = PuiseuxSeries::zero(trunc.clone());
        for (k, b) in binom.iter().enumerate() {
            let e = n * k as i64;
            if e > order {
                break;
            }
            let signed = if k % 2 == 0 { b.clone() } else { -b.clone() };
            factor.insert_checked(e, CycNum::from_rational(Rational::from_integer(signed)));
        }
        // Every factor starts at q^0, so the product keeps the full bound.
        acc = acc.mul(&factor).truncate_to(trunc.clone());
    }
    acc.shift(1, 1).truncate_to(trunc)
}

fn binomials_24() -> Vec<BigInt> {
    let mut v = Vec::with_capacity(25);
    let mut c = BigInt::one();
    v.push(c.clone());
    for k in 0..24u32 {
        c = c * BigInt::from(24 - k) / BigInt::from(k + 1);
        v.push(c.clone());
    }
    v
}

/// `Delta(q)^{-1} = sum_{n >= 0} e(Hilb^n(K3)) q^{n-1}`, with every
/// coefficient through `q^order` exact. Leading term `q^{-1}`.
pub fn hilb_series(order: i64) -> PuiseuxSeries {
    assert!(order >= 0);
    delta(order + 2)
        .invert()
        .expect("Delta has unit leading coefficient")
        .truncate_to(rat_int(order + 1))
}

/// Coefficients of `prod_{n=1}^{order} (1 - q^n)^24` through `q^order`,
/// dense over the integers. Pure-integer twin of the product accumulation
/// in [`delta`], used where a large coefficient run is needed.
fn euler24_coeffs(order: usize) -> Vec<BigInt> {
    let binom = binomials_24();
    let mut acc = vec![BigInt::zero(); order + 1];
    acc[0] = BigInt::one();
    for n in 1..=order {
        for i in (n..=order).rev() {
            let mut delta = BigInt::zero();
            for (k, b) in binom.iter().enumerate().skip(1) {
                let step = n * k;
                if step > i {
                    break;
                }
                let term = b * &acc[i - step];
                if k % 2 == 0 {
                    delta += term;
                } else {
                    delta -= term;
                }
            }
            acc[i] += delta;
        }
    }
    acc
}

/// Euler characteristics `e(Hilb^n(K3))` for `n = 0..=n_max`: the
/// coefficients of Delta(q)^{-1} shifted by one, computed by the integer
/// inversion recurrence and cached across calls (numeric verification asks
/// for hundreds of them repeatedly).
pub fn hilbert_euler_numbers(n_max: usize) -> Vec<BigInt> {
    use std::sync::{Mutex, OnceLock};
    static CACHE: OnceLock<Mutex<Vec<BigInt>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(Vec::new()));
    let mut guard = cache.lock().unwrap();
    if guard.len() <= n_max {
        let d = euler24_coeffs(n_max);
        let mut h = vec![BigInt::zero(); n_max + 1];
        h[0] = BigInt::one();
        for n in 1..=n_max {
            let mut acc = BigInt::zero();
            for k in 1..=n {
                if !d[k].is_zero() {
                    acc += &d[k] * &h[n - k];
                }
            }
            h[n] = -acc;
        }
        *guard = h;
    }
    guard[..=n_max].to_vec()
}
