//! Exact arithmetic in cyclotomic fields Q(zeta_N).
//!
//! A [`CycNum`] is a residue modulo the N-th cyclotomic polynomial Phi_N,
//! stored as a coefficient vector of length deg(Phi_N) over the rationals.
//! Reduction modulo Phi_N is applied after every operation, so two values
//! of the same order are equal exactly when their coefficient vectors are.
//! Mixed orders are compared (and combined) after lifting both operands to
//! the least common multiple order; the lift zeta_N -> zeta_M^{M/N} is an
//! injective field embedding, so this is still a canonical-form comparison.
//!
//! Phi_N is computed by dividing x^N - 1 by the product of Phi_d over the
//! proper divisors d of N. All coefficient arithmetic is arbitrary
//! precision: coefficient growth under Phi-reduction is real.

use std::collections::HashMap;
use std::fmt;
use std::sync::{Arc, Mutex, OnceLock};

use num_bigint::BigInt;
use num_complex::Complex64;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::Rational;

// ---------------------------------------------------------------------------
// Cyclotomic polynomials
// ---------------------------------------------------------------------------

fn cyclo_cache() -> &'static Mutex<HashMap<u64, Arc<Vec<BigInt>>>> {
    static CACHE: OnceLock<Mutex<HashMap<u64, Arc<Vec<BigInt>>>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

/// Coefficients of Phi_N, ascending degree, monic.
pub fn cyclotomic_polynomial(n: u64) -> Arc<Vec<BigInt>> {
    assert!(n >= 1, "order must be positive");
    if let Some(p) = cyclo_cache().lock().unwrap().get(&n) {
        return Arc::clone(p);
    }
    let phi = compute_cyclotomic(n);
    let arc = Arc::new(phi);
    cyclo_cache()
        .lock()
        .unwrap()
        .insert(n, Arc::clone(&arc));
    arc
}

fn compute_cyclotomic(n: u64) -> Vec<BigInt> {
    // x^n - 1
    let mut poly = vec![BigInt::zero(); n as usize + 1];
    poly[0] = -BigInt::one();
    poly[n as usize] = BigInt::one();
    for d in 1..n {
        if n % d == 0 {
            let phi_d = cyclotomic_polynomial(d);
            poly = div_exact(&poly, &phi_d);
        }
    }
    poly
}

/// Exact division of integer polynomials, assuming a monic divisor and zero
/// remainder. Coefficients ascending.
fn div_exact(num: &[BigInt], den: &[BigInt]) -> Vec<BigInt> {
    let dn = num.len() - 1;
    let dd = den.len() - 1;
    assert!(den[dd].is_one());
    let mut rem: Vec<BigInt> = num.to_vec();
    let mut quot = vec![BigInt::zero(); dn - dd + 1];
    for i in (dd..=dn).rev() {
        if rem[i].is_zero() {
            continue;
        }
        let c = std::mem::replace(&mut rem[i], BigInt::zero());
        for (k, dc) in den.iter().enumerate().take(dd) {
            rem[i - dd + k] -= &c * dc;
        }
        quot[i - dd] = c;
    }
    debug_assert!(rem.iter().all(|c| c.is_zero()));
    quot
}

fn euler_phi_degree(n: u64) -> usize {
    cyclotomic_polynomial(n).len() - 1
}

// ---------------------------------------------------------------------------
// CycNum
// ---------------------------------------------------------------------------

/// An exact element of the cyclotomic field Q(zeta_N).
#[derive(Clone, Debug)]
pub struct CycNum {
    order: u64,
    /// Length deg(Phi_order); coefficients of 1, zeta, zeta^2, ...
    coeffs: Vec<Rational>,
}

impl CycNum {
    fn from_reduced(order: u64, coeffs: Vec<Rational>) -> Self {
        debug_assert_eq!(coeffs.len(), euler_phi_degree(order));
        CycNum { order, coeffs }
    }

    /// Build from an arbitrary polynomial in zeta_order (ascending), reducing
    /// modulo Phi_order.
    pub fn from_poly(order: u64, mut poly: Vec<Rational>) -> Self {
        let phi = cyclotomic_polynomial(order);
        reduce_mod(&mut poly, &phi);
        let deg = phi.len() - 1;
        poly.resize(deg, Rational::zero());
        CycNum::from_reduced(order, poly)
    }

    pub fn zero() -> Self {
        CycNum::from_reduced(1, vec![Rational::zero()])
    }

    pub fn one() -> Self {
        CycNum::from_reduced(1, vec![Rational::one()])
    }

    pub fn from_rational(r: Rational) -> Self {
        CycNum::from_reduced(1, vec![r])
    }

    pub fn from_integer(n: i64) -> Self {
        CycNum::from_rational(Rational::from_integer(BigInt::from(n)))
    }

    /// zeta_N^k, the primitive realisation of e^{2 pi i k / N}.
    pub fn root_of_unity(n: u64, k: i64) -> Self {
        assert!(n >= 1, "order must be positive");
        let k = k.rem_euclid(n as i64) as usize;
        let mut poly = vec![Rational::zero(); k + 1];
        poly[k] = Rational::one();
        CycNum::from_poly(n, poly)
    }

    pub fn order(&self) -> u64 {
        self.order
    }

    pub fn coeffs(&self) -> &[Rational] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_zero())
    }

    /// Some(r) when the value lies in Q.
    pub fn as_rational(&self) -> Option<Rational> {
        if self.coeffs[1..].iter().all(|c| c.is_zero()) {
            Some(self.coeffs[0].clone())
        } else {
            None
        }
    }

    /// Lift into Q(zeta_m); `m` must be a multiple of the current order.
    pub fn lift_to(&self, m: u64) -> CycNum {
        assert_eq!(m % self.order, 0, "lift target must be a multiple order");
        if m == self.order {
            return self.clone();
        }
        let step = (m / self.order) as usize;
        let mut poly = vec![Rational::zero(); (self.coeffs.len() - 1) * step + 1];
        for (i, c) in self.coeffs.iter().enumerate() {
            poly[i * step] = c.clone();
        }
        CycNum::from_poly(m, poly)
    }

    fn common_order(&self, other: &CycNum) -> u64 {
        self.order.lcm(&other.order)
    }

    pub fn add(&self, other: &CycNum) -> CycNum {
        let m = self.common_order(other);
        let a = self.lift_to(m);
        let b = other.lift_to(m);
        let coeffs = a
            .coeffs
            .iter()
            .zip(&b.coeffs)
            .map(|(x, y)| x + y)
            .collect();
        CycNum::from_reduced(m, coeffs)
    }

    pub fn sub(&self, other: &CycNum) -> CycNum {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> CycNum {
        CycNum::from_reduced(self.order, self.coeffs.iter().map(|c| -c).collect())
    }

    pub fn mul(&self, other: &CycNum) -> CycNum {
        let m = self.common_order(other);
        let a = self.lift_to(m);
        let b = other.lift_to(m);
        let mut poly = vec![Rational::zero(); a.coeffs.len() + b.coeffs.len() - 1];
        for (i, x) in a.coeffs.iter().enumerate() {
            if x.is_zero() {
                continue;
            }
            for (j, y) in b.coeffs.iter().enumerate() {
                if y.is_zero() {
                    continue;
                }
                poly[i + j] += x * y;
            }
        }
        CycNum::from_poly(m, poly)
    }

    pub fn mul_rational(&self, r: &Rational) -> CycNum {
        CycNum::from_reduced(self.order, self.coeffs.iter().map(|c| c * r).collect())
    }

    /// Exact multiplicative inverse, via the extended Euclidean algorithm
    /// against Phi_N; Phi_N is irreducible over Q so every nonzero residue
    /// is a unit.
    pub fn inverse(&self) -> Result<CycNum> {
        if self.is_zero() {
            return Err(Error::DivisionByZero { order: self.order });
        }
        let phi: Vec<Rational> = cyclotomic_polynomial(self.order)
            .iter()
            .map(|c| Rational::from_integer(c.clone()))
            .collect();
        let (g, u) = xgcd_mod(&self.coeffs, &phi);
        // g is a nonzero constant; inverse = u / g.
        debug_assert!(poly_degree(&g) == Some(0));
        let ginv = g[0].recip();
        let inv: Vec<Rational> = u.iter().map(|c| c * &ginv).collect();
        Ok(CycNum::from_poly(self.order, inv))
    }

    /// Integer power, with negative exponents going through the inverse.
    pub fn pow(&self, k: i64) -> Result<CycNum> {
        let base = if k < 0 { self.inverse()? } else { self.clone() };
        let mut e = k.unsigned_abs();
        let mut acc = CycNum::one();
        let mut sq = base;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&sq);
            }
            sq = sq.mul(&sq);
            e >>= 1;
        }
        Ok(acc)
    }

    /// Complex conjugation, zeta_N -> zeta_N^{N-1}.
    pub fn conj(&self) -> CycNum {
        let n = self.order;
        if n <= 2 {
            return self.clone();
        }
        let mut poly = vec![Rational::zero(); n as usize];
        for (i, c) in self.coeffs.iter().enumerate() {
            let idx = ((n as usize) - i) % (n as usize);
            poly[idx] = &poly[idx] + c;
        }
        CycNum::from_poly(n, poly)
    }

    /// Evaluate at zeta_N = e^{2 pi i / N} in double precision.
    pub fn embed(&self) -> Complex64 {
        let n = self.order as f64;
        let mut acc = Complex64::new(0.0, 0.0);
        for (i, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let angle = 2.0 * std::f64::consts::PI * (i as f64) / n;
            let x = c.to_f64().unwrap_or(f64::NAN);
            acc += Complex64::new(angle.cos(), angle.sin()) * x;
        }
        acc
    }

    /// Crude magnitude bound |value| <= sum |coeff|, used by tail estimates.
    pub fn abs_bound(&self) -> f64 {
        self.coeffs
            .iter()
            .map(|c| c.abs().to_f64().unwrap_or(f64::INFINITY))
            .sum()
    }
}

fn poly_degree(p: &[Rational]) -> Option<usize> {
    p.iter().rposition(|c| !c.is_zero())
}

/// Remainder of `poly` modulo the monic integer polynomial `phi`, in place.
fn reduce_mod(poly: &mut Vec<Rational>, phi: &[BigInt]) {
    let deg = phi.len() - 1;
    if poly.len() <= deg {
        return;
    }
    for i in (deg..poly.len()).rev() {
        if poly[i].is_zero() {
            continue;
        }
        let c = std::mem::replace(&mut poly[i], Rational::zero());
        for (k, pc) in phi.iter().enumerate().take(deg) {
            if !pc.is_zero() {
                let delta = &c * Rational::from_integer(pc.clone());
                poly[i - deg + k] -= delta;
            }
        }
    }
    poly.truncate(deg);
}

/// Extended gcd restricted to what `inverse` needs: returns (g, u) with
/// u*a + v*phi = g for some v, g the gcd (a nonzero constant here).
fn xgcd_mod(a: &[Rational], phi: &[Rational]) -> (Vec<Rational>, Vec<Rational>) {
    let mut r0 = phi.to_vec();
    let mut r1 = a.to_vec();
    let mut u0 = vec![Rational::zero()];
    let mut u1 = vec![Rational::one()];
    loop {
        // Phi_N is irreducible and deg a < deg Phi_N, so the remainder
        // sequence ends at a nonzero constant, never at zero.
        let d1 = poly_degree(&r1).expect("inputs to xgcd are coprime");
        if d1 == 0 {
            return (r1, u1);
        }
        let (q, rem) = poly_divmod(&r0, &r1);
        let next_u = poly_sub(&u0, &poly_mul(&q, &u1));
        r0 = r1;
        r1 = rem;
        u0 = u1;
        u1 = next_u;
    }
}

fn poly_divmod(num: &[Rational], den: &[Rational]) -> (Vec<Rational>, Vec<Rational>) {
    let dd = poly_degree(den).expect("division by zero polynomial");
    let lead = den[dd].clone();
    let mut rem = num.to_vec();
    let dn = match poly_degree(&rem) {
        Some(d) if d >= dd => d,
        _ => return (vec![Rational::zero()], rem),
    };
    let mut quot = vec![Rational::zero(); dn - dd + 1];
    for i in (dd..=dn).rev() {
        if rem[i].is_zero() {
            continue;
        }
        let c = &rem[i] / &lead;
        rem[i] = Rational::zero();
        for (k, dc) in den.iter().enumerate().take(dd) {
            if !dc.is_zero() {
                let delta = &c * dc;
                rem[i - dd + k] -= delta;
            }
        }
        quot[i - dd] = c;
    }
    (quot, rem)
}

fn poly_mul(a: &[Rational], b: &[Rational]) -> Vec<Rational> {
    let mut out = vec![Rational::zero(); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        if x.is_zero() {
            continue;
        }
        for (j, y) in b.iter().enumerate() {
            if !y.is_zero() {
                out[i + j] += x * y;
            }
        }
    }
    out
}

fn poly_sub(a: &[Rational], b: &[Rational]) -> Vec<Rational> {
    let n = a.len().max(b.len());
    let mut out = vec![Rational::zero(); n];
    for (i, x) in a.iter().enumerate() {
        out[i] += x;
    }
    for (i, y) in b.iter().enumerate() {
        out[i] -= y;
    }
    out
}

impl PartialEq for CycNum {
    fn eq(&self, other: &Self) -> bool {
        if self.order == other.order {
            return self.coeffs == other.coeffs;
        }
        let m = self.common_order(other);
        self.lift_to(m).coeffs == other.lift_to(m).coeffs
    }
}

impl Eq for CycNum {}

impl fmt::Display for CycNum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (i, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            if first {
                if c.is_negative() {
                    write!(f, "-")?;
                }
                first = false;
            } else if c.is_negative() {
                write!(f, " - ")?;
            } else {
                write!(f, " + ")?;
            }
            let a = c.abs();
            if i == 0 {
                write!(f, "{}", a)?;
            } else {
                if !a.is_one() {
                    write!(f, "{}*", a)?;
                }
                if i == 1 {
                    write!(f, "zeta{}", self.order)?;
                } else {
                    write!(f, "zeta{}^{}", self.order, i)?;
                }
            }
        }
        Ok(())
    }
}

// JSON form: {"order": N, "coeffs": ["p/q", ...]}
impl Serialize for CycNum {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut st = serializer.serialize_struct("CycNum", 2)?;
        st.serialize_field("order", &self.order)?;
        let coeffs: Vec<String> = self.coeffs.iter().map(|c| c.to_string()).collect();
        st.serialize_field("coeffs", &coeffs)?;
        st.end()
    }
}

impl<'de> Deserialize<'de> for CycNum {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Raw {
            order: u64,
            coeffs: Vec<String>,
        }
        let raw = Raw::deserialize(deserializer)?;
        if raw.order == 0 {
            return Err(D::Error::custom("order must be positive"));
        }
        let mut coeffs = Vec::with_capacity(raw.coeffs.len());
        for s in &raw.coeffs {
            coeffs.push(
                s.parse::<Rational>()
                    .map_err(|e| D::Error::custom(format!("bad rational {s:?}: {e}")))?,
            );
        }
        if coeffs.len() != euler_phi_degree(raw.order) {
            return Err(D::Error::custom("coefficient vector has wrong length"));
        }
        Ok(CycNum::from_poly(raw.order, coeffs))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rat(n: i64, d: i64) -> Rational {
        Rational::new(BigInt::from(n), BigInt::from(d))
    }

    #[test]
    fn cyclotomic_polys_match_known_tables() {
        let as_i64 = |n: u64| -> Vec<i64> {
            cyclotomic_polynomial(n)
                .iter()
                .map(|c| c.to_i64().unwrap())
                .collect()
        };
        assert_eq!(as_i64(1), vec![-1, 1]);
        assert_eq!(as_i64(2), vec![1, 1]);
        assert_eq!(as_i64(3), vec![1, 1, 1]);
        assert_eq!(as_i64(4), vec![1, 0, 1]);
        assert_eq!(as_i64(6), vec![1, -1, 1]);
        assert_eq!(as_i64(10), vec![1, -1, 1, -1, 1]);
        assert_eq!(as_i64(12), vec![1, 0, -1, 0, 1]);
        // First index with a coefficient other than 0, +-1 is 105.
        assert_eq!(as_i64(105)[7], -2);
    }

    #[test]
    fn roots_of_unity_basics() {
        assert_eq!(CycNum::root_of_unity(2, 1), CycNum::from_integer(-1));
        assert_eq!(CycNum::root_of_unity(3, 0), CycNum::one());
        // 1 + zeta_3 + zeta_3^2 = 0
        let s = CycNum::root_of_unity(3, 1).add(&CycNum::root_of_unity(3, 2));
        assert_eq!(s, CycNum::from_integer(-1));
        // i * i = -1
        let i = CycNum::root_of_unity(4, 1);
        assert_eq!(i.mul(&i), CycNum::from_integer(-1));
    }

    #[test]
    fn multiplicative_order_is_n_over_gcd() {
        for n in 1..=12u64 {
            for k in 0..n as i64 {
                let z = CycNum::root_of_unity(n, k);
                // ord(zeta_n^k) = n / gcd(n, k); k = 0 gives order 1.
                let expected = if k == 0 { 1 } else { n / n.gcd(&(k as u64)) };
                let mut pow = CycNum::one();
                let mut ord = 0;
                for step in 1..=n {
                    pow = pow.mul(&z);
                    if pow == CycNum::one() {
                        ord = step;
                        break;
                    }
                }
                assert_eq!(ord, expected, "n={n} k={k}");
            }
        }
    }

    #[test]
    fn power_sum_of_all_roots_vanishes() {
        for n in 2..=10u64 {
            let mut sum = CycNum::zero();
            for k in 0..n as i64 {
                sum = sum.add(&CycNum::root_of_unity(n, k));
            }
            assert!(sum.is_zero(), "sum of all {n}-th roots");
        }
    }

    #[test]
    fn inverse_of_one_plus_zeta5() {
        let a = CycNum::one().add(&CycNum::root_of_unity(5, 1));
        let inv = a.inverse().unwrap();
        assert_eq!(a.mul(&inv), CycNum::one());
    }

    #[test]
    fn inverse_of_root_is_opposite_power() {
        for k in 1..7 {
            let z = CycNum::root_of_unity(7, k);
            assert_eq!(z.inverse().unwrap(), CycNum::root_of_unity(7, 7 - k));
        }
        assert_eq!(CycNum::one().inverse().unwrap(), CycNum::one());
    }

    #[test]
    fn inverse_of_zero_fails() {
        assert!(matches!(
            CycNum::zero().inverse(),
            Err(Error::DivisionByZero { .. })
        ));
    }

    #[test]
    fn mixed_order_arithmetic_via_lcm() {
        // zeta_6 * zeta_6^5 = 1, computed after lifting through order 6.
        let z = CycNum::root_of_unity(6, 1);
        let w = CycNum::root_of_unity(6, 5);
        assert_eq!(z.mul(&w), CycNum::one());
        // zeta_4 * zeta_6 = zeta_12^5
        let p = CycNum::root_of_unity(4, 1).mul(&CycNum::root_of_unity(6, 1));
        assert_eq!(p, CycNum::root_of_unity(12, 5));
        let e = p.embed();
        let d = (e - CycNum::root_of_unity(12, 5).embed()).norm();
        assert!(d < 1e-12);
    }

    #[test]
    fn embed_known_values() {
        let i = CycNum::root_of_unity(4, 1).embed();
        assert!((i - Complex64::new(0.0, 1.0)).norm() < 1e-14);
        let m1 = CycNum::from_integer(-1).embed();
        assert!((m1 - Complex64::new(-1.0, 0.0)).norm() < 1e-14);
        let z3 = CycNum::root_of_unity(3, 1).embed();
        assert!((z3 - Complex64::new(-0.5, 0.75f64.sqrt())).norm() < 1e-14);
    }

    #[test]
    fn conjugation_is_an_involution_and_fixes_rationals() {
        let a = CycNum::root_of_unity(12, 5)
            .mul_rational(&rat(3, 7))
            .add(&CycNum::root_of_unity(12, 2));
        assert_eq!(a.conj().conj(), a);
        assert_eq!(CycNum::from_rational(rat(9, 4)).conj(), CycNum::from_rational(rat(9, 4)));
        // a * conj(a) is a nonnegative rational times 1 for roots of unity.
        let z = CycNum::root_of_unity(10, 3);
        assert_eq!(z.mul(&z.conj()), CycNum::one());
    }

    #[test]
    fn serde_round_trip() {
        let a = CycNum::root_of_unity(10, 3).mul_rational(&rat(-7, 3));
        let json = serde_json::to_string(&a).unwrap();
        let back: CycNum = serde_json::from_str(&json).unwrap();
        assert_eq!(a, back);
        assert!(json.contains("\"order\":10"));
    }
}
