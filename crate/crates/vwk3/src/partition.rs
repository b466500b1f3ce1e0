//! Assembly of the K3 partition functions.
//!
//! For prime r and algebraic c1 the SU(r) partition function of a K3
//! surface is the closed form
//!
//! ```text
//! Z^{SU(r)}_{c1}(q) = delta_{c1,0}/r^3 Delta(q^r)^{-1}
//!                   + 1/r^2 sum_{j=0}^{r-1} e^{-pi i j c1^2 / r}
//!                     Delta(e^{2 pi i j / r} q^{1/r})^{-1},
//! ```
//!
//! and the sector function of a class w in H^2(S, mu_r) is
//!
//! ```text
//! Z_w(q) = delta_{w,0}/r^2 Delta(q^r)^{-1}
//!        + 1/r sum_{j=0}^{r-1} e^{-pi i j w^2 / r}
//!          Delta(e^{2 pi i j / r} q^{1/r})^{-1},
//! ```
//!
//! so Z_w = r Z^{SU(r)}_xi for any lift xi of w. The SU(r)/Z_r partition
//! function sums the sectors against the characters e^{2 pi i (w.c1)/r},
//! normalised by 1/r so that the S-duality transformation carries the
//! r^-11 tau^-12 factor:
//!
//! ```text
//! Z^{SU(r)/Z_r}_{c1}(q) = 1/r sum_{w in H^2(S, mu_r)} e^{2 pi i (w.c1)/r} Z_w(q).
//! ```
//!
//! The w-sum over r^22 classes is never enumerated directly: the closed
//! route collapses it with the two flux-sum identities, and the direct
//! route reduces it to the joint distribution of `(w.c1 mod r, w^2 mod 2r)`
//! computed block by block. Both routes must agree exactly.
//!
//! Non-trivial sectors have an independent assembly from Euler
//! characteristics of Hilbert schemes of points, which is checked against
//! the closed form.

use num_bigint::BigInt;
use num_traits::ToPrimitive;
use serde::Serialize;

use crate::chern::{vd, SurfaceInvariants};
use crate::cycnum::CycNum;
use crate::error::{Error, Result};
use crate::lattice::{is_prime, EvenLattice, LatticeVector};
use crate::qseries::{hilbert_euler_numbers, PuiseuxSeries};
use crate::sduality::{DeltaAtom, ModularExpr};
use crate::Rational;

fn rint(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

fn rat(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

/// Parameters of one partition-function computation. `order` is the
/// largest exponent kept in the q-expansion (inclusive); all the series
/// here have exponents in (1/r) Z.
#[derive(Clone, Debug, Serialize)]
pub struct PartitionRequest {
    pub r: u64,
    pub c1: LatticeVector,
    /// Inclusive exponent bound of the result, e.g. 6 or 10/3.
    #[serde(serialize_with = "serialize_rational")]
    pub order: Rational,
    pub surface: SurfaceInvariants,
}

fn serialize_rational<S: serde::Serializer>(
    r: &Rational,
    serializer: S,
) -> std::result::Result<S::Ok, S::Error> {
    serializer.serialize_str(&r.to_string())
}

impl PartitionRequest {
    pub fn k3(r: u64, c1: LatticeVector, order: Rational) -> Self {
        PartitionRequest {
            r,
            c1,
            order,
            surface: SurfaceInvariants::k3(),
        }
    }

    fn validate(&self) -> Result<()> {
        require_prime(self.r)?;
        if !self.surface.is_k3() {
            return Err(Error::NonK3Surface);
        }
        if self.order < rint(1) {
            return Err(Error::InvalidOrder(self.order.to_string()));
        }
        Ok(())
    }

    fn trunc(&self) -> Rational {
        &self.order + rat(1, self.r as i64)
    }
}

pub fn require_prime(r: u64) -> Result<()> {
    if is_prime(r) {
        Ok(())
    } else {
        Err(Error::NonPrimeRank(r))
    }
}

/// Exponent of the normalisation prefactor q^{-chi(O_S)/2r + r K_S^2/24};
/// equals -1/r on K3.
pub fn normalization_exponent(r: u64, surface: &SurfaceInvariants) -> Rational {
    let ri = rint(r as i64);
    -rint(surface.chi_o) / (rint(2) * &ri) + ri * rint(surface.k2) / rint(24)
}

// ---------------------------------------------------------------------------
// Atom expressions
// ---------------------------------------------------------------------------

/// SU(r) atoms for K3: delta_{c1,0}/r^3 on Delta(q^r)^{-1} and
/// zeta_{2r}^{-j c1^2}/r^2 on the shifted atoms. Assumes r prime and the
/// K3 surface.
pub fn z_su_expr_unchecked(lat: &EvenLattice, r: u64, c1: &LatticeVector) -> ModularExpr {
    let c1_sq = lat.square_mod_2r(c1, r) as i64;
    let divisible = lat.delta_div(c1, &LatticeVector::zero(lat.rank()), r);
    su_expr_from_invariants(r, c1_sq, divisible)
}

fn su_expr_from_invariants(r: u64, c1_sq: i64, divisible: bool) -> ModularExpr {
    let mut e = ModularExpr::new(0);
    let r3 = rint((r * r * r) as i64);
    let r2 = rint((r * r) as i64);
    if divisible {
        e.add_term(DeltaAtom::scaled_up(r), CycNum::from_rational(r3.recip()));
    }
    for j in 0..r as i64 {
        let phase = CycNum::root_of_unity(2 * r, -j * c1_sq);
        e.add_term(DeltaAtom::shifted(j, r), phase.mul_rational(&r2.recip()));
    }
    e
}

/// SU(r) atoms from the invariants the closed form actually depends on:
/// c1^2 (any representative of its class mod 2r) and divisibility of c1
/// by r. Convenience entry point for callers without a full vector.
pub fn z_su_expr_from_invariants(r: u64, c1_sq: i64, divisible: bool) -> Result<ModularExpr> {
    require_prime(r)?;
    Ok(su_expr_from_invariants(
        r,
        c1_sq.rem_euclid(2 * r as i64),
        divisible,
    ))
}

/// The sector atoms, validated.
pub fn z_w_expr(lat: &EvenLattice, r: u64, w: &LatticeVector) -> Result<ModularExpr> {
    require_prime(r)?;
    Ok(z_w_expr_unchecked(lat, r, w))
}

/// Sector atoms: delta_{w,0}/r^2 and zeta_{2r}^{-j w^2}/r. `w` is any
/// integer lift of the class mod r.
pub fn z_w_expr_unchecked(lat: &EvenLattice, r: u64, w: &LatticeVector) -> ModularExpr {
    let mut e = ModularExpr::new(0);
    let r2 = rint((r * r) as i64);
    let r1 = rint(r as i64);
    if lat.delta_div(w, &LatticeVector::zero(lat.rank()), r) {
        e.add_term(
            DeltaAtom::scaled_up(r),
            CycNum::from_rational(r2.recip()),
        );
    }
    let w_sq = lat.square_mod_2r(w, r) as i64;
    for j in 0..r as i64 {
        let phase = CycNum::root_of_unity(2 * r, -j * w_sq);
        e.add_term(DeltaAtom::shifted(j, r), phase.mul_rational(&r1.recip()));
    }
    e
}

/// SU(r)/Z_r atoms with the w-sum collapsed by the flux-sum identities:
/// 1/r^3 on Delta(q^r)^{-1} and G_j(c1)/r^2 on the shifted atoms, where
/// G_0 = r^22 delta_{c1,0} and G_j = r^11 e^{-pi i n_j c1^2 / r}.
pub fn z_su_modr_expr_closed(
    lat: &EvenLattice,
    r: u64,
    c1: &LatticeVector,
) -> Result<ModularExpr> {
    let mut e = ModularExpr::new(0);
    let r3 = rint((r * r * r) as i64);
    let r2 = rint((r * r) as i64);
    e.add_term(DeltaAtom::scaled_up(r), CycNum::from_rational(r3.recip()));
    for j in 0..r {
        let flux = lat.flux_identity(r, j, c1)?;
        e.add_term(
            DeltaAtom::shifted(j as i64, r),
            flux.mul_rational(&r2.recip()),
        );
    }
    Ok(e)
}

/// The same expression with the Gauss sums taken from the joint
/// distribution of `(w.c1 mod r, w^2 mod 2r)` — per-block enumeration, no
/// r^22-term sum and no use of the closed-form identities.
pub fn z_su_modr_expr_direct(
    lat: &EvenLattice,
    r: u64,
    c1: &LatticeVector,
    budget: u128,
) -> Result<ModularExpr> {
    let dist = lat.joint_distribution(r, c1, budget)?;
    let mut e = ModularExpr::new(0);
    let r3 = rint((r * r * r) as i64);
    let r2 = rint((r * r) as i64);
    // The w = 0 term contributes the Delta(q^r)^{-1} atom separately.
    e.add_term(DeltaAtom::scaled_up(r), CycNum::from_rational(r3.recip()));
    for j in 0..r {
        let gauss = dist.gauss_sum(j);
        e.add_term(
            DeltaAtom::shifted(j as i64, r),
            gauss.mul_rational(&r2.recip()),
        );
    }
    Ok(e)
}

// ---------------------------------------------------------------------------
// Series
// ---------------------------------------------------------------------------

/// Z^{SU(r)}_{c1} as a q-expansion with exponents up to `req.order`.
pub fn z_su(lat: &EvenLattice, req: &PartitionRequest) -> Result<PuiseuxSeries> {
    req.validate()?;
    Ok(z_su_expr_unchecked(lat, req.r, &req.c1).to_series(&req.trunc()))
}

/// The SU(r) atoms, validated.
pub fn z_su_expr(lat: &EvenLattice, req: &PartitionRequest) -> Result<ModularExpr> {
    req.validate()?;
    Ok(z_su_expr_unchecked(lat, req.r, &req.c1))
}

/// Z_w as a q-expansion; `w` is any integer lift of the class mod r.
pub fn z_w(lat: &EvenLattice, r: u64, w: &LatticeVector, order: &Rational) -> Result<PuiseuxSeries> {
    require_prime(r)?;
    let trunc = order + rat(1, r as i64);
    Ok(z_w_expr_unchecked(lat, r, w).to_series(&trunc))
}

/// Z_w for a non-trivial sector, assembled from Euler characteristics of
/// Hilbert schemes: q^{-1/r} sum_n q^{vd/2r} e(Hilb^{vd/2}), summing over
/// the n with vd(r, w^2, n) >= 0. Must equal [`z_w`] exactly up to
/// truncation, independently of the chosen lift.
pub fn z_w_from_euler(
    lat: &EvenLattice,
    r: u64,
    w: &LatticeVector,
    order: &Rational,
) -> Result<PuiseuxSeries> {
    require_prime(r)?;
    if lat.delta_div(w, &LatticeVector::zero(lat.rank()), r) {
        return Err(Error::TrivialSector);
    }
    let surface = SurfaceInvariants::k3();
    let norm = normalization_exponent(r, &surface);
    debug_assert_eq!(norm, rat(-1, r as i64));
    let trunc = order + rat(1, r as i64);
    let xi_sq = lat.inner(w, w);
    let ri = r as i64;
    // Smallest n with vd >= 0.
    let num = (ri - 1) * xi_sq + (ri * ri - 1) * surface.chi_o;
    let n_min = num.div_euclid(2 * ri) + i64::from(num.rem_euclid(2 * ri) != 0);
    // Largest Hilbert-scheme length needed: exponent (m - 1)/r <= order.
    let m_max = ((order * rint(ri)).floor().to_integer().to_i64().unwrap() + 1).max(0);
    let euler = hilbert_euler_numbers(m_max as usize);
    let mut acc = PuiseuxSeries::zero(trunc.clone());
    let mut n = n_min;
    loop {
        let v = vd(ri, xi_sq, n, &surface);
        debug_assert!(v >= 0 && v % 2 == 0, "vd must be a nonnegative even integer");
        let m = v / 2;
        if m > m_max {
            break;
        }
        let coeff = CycNum::from_rational(Rational::from_integer(euler[m as usize].clone()));
        // exponent (vd/2 - 1)/r = norm + vd/2r
        acc = acc.add(&PuiseuxSeries::monomial(coeff, m - 1, r as u64, trunc.clone()));
        n += 1;
    }
    Ok(acc)
}

/// Both routes to Z^{SU(r)/Z_r}_{c1}, which must agree exactly.
#[derive(Clone, Debug)]
pub struct SectorSum {
    /// Flux-identity route.
    pub series: PuiseuxSeries,
    /// Joint-distribution route.
    pub direct: PuiseuxSeries,
    /// Atoms of the flux-identity route.
    pub expr: ModularExpr,
    pub routes_agree: bool,
}

/// Z^{SU(r)/Z_r}_{c1} by both routes.
pub fn z_su_modr(lat: &EvenLattice, req: &PartitionRequest, budget: u128) -> Result<SectorSum> {
    req.validate()?;
    let trunc = req.trunc();
    let closed = z_su_modr_expr_closed(lat, req.r, &req.c1)?;
    let direct = z_su_modr_expr_direct(lat, req.r, &req.c1, budget)?;
    let series = closed.to_series(&trunc);
    let direct_series = direct.to_series(&trunc);
    let agree = closed == direct && series == direct_series;
    Ok(SectorSum {
        series,
        direct: direct_series,
        expr: closed,
        routes_agree: agree,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{k3_lattice, DEFAULT_BUDGET};
    use crate::qseries::hilb_series;

    fn unit(i: usize) -> LatticeVector {
        let mut v = LatticeVector::zero(22);
        v.0[i] = 1;
        v
    }

    /// U1:(a,b) style vector.
    fn u1(a: i64, b: i64) -> LatticeVector {
        let mut v = LatticeVector::zero(22);
        v.0[0] = a;
        v.0[1] = b;
        v
    }

    #[test]
    fn normalization_exponent_examples() {
        let k3 = SurfaceInvariants::k3();
        assert_eq!(normalization_exponent(2, &k3), rat(-1, 2));
        assert_eq!(normalization_exponent(5, &k3), rat(-1, 5));
        let hypothetical = SurfaceInvariants {
            chi_o: 0,
            k2: 24,
            euler: 0,
        };
        assert_eq!(normalization_exponent(3, &hypothetical), rint(3));
    }

    #[test]
    fn z_su_r2_c1_zero_low_order() {
        let lat = k3_lattice();
        let req = PartitionRequest::k3(2, LatticeVector::zero(22), rint(3));
        let s = z_su(&lat, &req).unwrap();
        // Leading coefficient of the Delta(q^2)^{-1} term.
        assert_eq!(
            s.coeff(-2, 1).unwrap(),
            CycNum::from_rational(rat(1, 8))
        );
        // Independent assembly from hilb: (1/8) H(q^2) + (1/2) odd part of
        // x H(x) at x = q^{1/2}, i.e. coefficient p24(2k+1) at q^k.
        let h = hilb_series(8);
        let p = hilbert_euler_numbers(8);
        let eighth = h.scale_exponent(2).scale_rational(&rat(1, 8));
        for k in -1..=3i64 {
            let mut expect = eighth.coeff(k, 1).unwrap();
            if k >= 0 {
                let odd = Rational::from_integer(p[(2 * k + 1) as usize].clone());
                expect = expect.add(&CycNum::from_rational(odd / rint(2)));
            }
            assert_eq!(s.coeff(k, 1).unwrap(), expect, "q^{k}");
        }
        // Half-integer exponents all vanish for c1 = 0 at r = 2.
        assert!(s.coeff(-1, 2).unwrap().is_zero());
        assert!(s.coeff(1, 2).unwrap().is_zero());
    }

    #[test]
    fn z_su_primitive_c1_kills_scaled_atom() {
        let lat = k3_lattice();
        let e = z_su_expr_unchecked(&lat, 2, &unit(0));
        assert_eq!(e.coeff(&DeltaAtom::scaled_up(2)), CycNum::zero());
        assert_eq!(e.num_terms(), 2);
        // c1 = r * primitive restores it.
        let e = z_su_expr_unchecked(&lat, 2, &unit(0).scale(2));
        assert_eq!(
            e.coeff(&DeltaAtom::scaled_up(2)),
            CycNum::from_rational(rat(1, 8))
        );
    }

    #[test]
    fn z_w_is_r_times_z_su_on_lifts() {
        let lat = k3_lattice();
        for r in [2u64, 3, 5] {
            for w in [LatticeVector::zero(22), unit(0), u1(1, 1)] {
                let order = rint(2);
                let zw = z_w(&lat, r, &w, &order).unwrap();
                let req = PartitionRequest::k3(r, w.clone(), order.clone());
                let zsu = z_su(&lat, &req).unwrap().scale_rational(&rint(r as i64));
                assert_eq!(zw, zsu, "r={r}");
            }
        }
    }

    #[test]
    fn z_w_leading_exponent() {
        let lat = k3_lattice();
        // w^2 = -2 mod 2r gives a nonzero coefficient at q^{-1/r}.
        let w = unit(6); // E8(-1) basis vector, w^2 = -2
        for r in [2u64, 3, 5] {
            let zw = z_w(&lat, r, &w, &rint(1)).unwrap();
            assert_eq!(zw.min_exponent(), rat(-1, r as i64), "r={r}");
        }
        // Any nonzero sector starts no lower than -1/r.
        for r in [2u64, 3] {
            for w in [unit(0), u1(1, 1), u1(1, 2)] {
                let zw = z_w(&lat, r, &w, &rint(1)).unwrap();
                assert!(zw.min_exponent() >= rat(-1, r as i64));
            }
        }
    }

    #[test]
    fn z_w_from_euler_matches_closed_form() {
        let lat = k3_lattice();
        // r = 2: residues w^2 = 0 and 2 mod 4.
        for (r, w) in [
            (2u64, unit(0)),  // w^2 = 0
            (2u64, u1(1, 1)), // w^2 = 2
            (2u64, unit(6)),  // w^2 = -2 = 2 mod 4
            (3u64, unit(0)),
            (3u64, u1(1, 1)),
            (3u64, u1(1, 2)),
        ] {
            let order = rint(5);
            let closed = z_w(&lat, r, &w, &order).unwrap();
            let euler = z_w_from_euler(&lat, r, &w, &order).unwrap();
            assert_eq!(closed, euler, "r={r} w^2={}", lat.inner(&w, &w));
        }
    }

    #[test]
    fn z_w_from_euler_is_lift_independent() {
        let lat = k3_lattice();
        let w = u1(1, 1);
        let gamma = unit(6).add(&u1(0, 1));
        for r in [2u64, 3] {
            let a = z_w_from_euler(&lat, r, &w, &rint(4)).unwrap();
            let b = z_w_from_euler(&lat, r, &w.add(&gamma.scale(r as i64)), &rint(4)).unwrap();
            assert_eq!(a, b, "r={r}");
        }
    }

    #[test]
    fn z_w_from_euler_rejects_trivial_sector() {
        let lat = k3_lattice();
        assert!(matches!(
            z_w_from_euler(&lat, 3, &LatticeVector::zero(22), &rint(3)),
            Err(Error::TrivialSector)
        ));
        assert!(matches!(
            z_w_from_euler(&lat, 3, &unit(0).scale(3), &rint(3)),
            Err(Error::TrivialSector)
        ));
    }

    #[test]
    fn z_su_invariant_under_c1_shift_by_r() {
        let lat = k3_lattice();
        for r in [2u64, 3] {
            for c1 in [LatticeVector::zero(22), unit(0), u1(1, 1)] {
                for gamma in [unit(2), u1(1, 1), unit(8)] {
                    let shifted = c1.add(&gamma.scale(r as i64));
                    let a = z_su_expr_unchecked(&lat, r, &c1);
                    let b = z_su_expr_unchecked(&lat, r, &shifted);
                    assert_eq!(a, b, "r={r}");
                }
            }
        }
    }

    #[test]
    fn z_su_modr_routes_agree() {
        let lat = k3_lattice();
        for r in [2u64, 3] {
            for c1 in [LatticeVector::zero(22), unit(0)] {
                let req = PartitionRequest::k3(r, c1, rint(4));
                let out = z_su_modr(&lat, &req, DEFAULT_BUDGET).unwrap();
                assert!(out.routes_agree, "r={r}");
                assert_eq!(out.series, out.direct);
                // All exponents lie in (1/r) Z: guaranteed by exp_denom.
                assert!(out.series.exp_denom() == r || out.series.exp_denom() == 1);
            }
        }
    }

    #[test]
    fn z_su_modr_closed_coefficients_r2_c1_zero() {
        let lat = k3_lattice();
        let e = z_su_modr_expr_closed(&lat, 2, &LatticeVector::zero(22)).unwrap();
        // 1/r^3 on the scaled atom.
        assert_eq!(
            e.coeff(&DeltaAtom::scaled_up(2)),
            CycNum::from_rational(rat(1, 8))
        );
        // j = 0: r^22/r^2 = 2^20.
        assert_eq!(
            e.coeff(&DeltaAtom::shifted(0, 2)),
            CycNum::from_integer(1 << 20)
        );
        // j = 1: r^11/r^2 = 2^9 (phase trivial at c1 = 0).
        assert_eq!(
            e.coeff(&DeltaAtom::shifted(1, 2)),
            CycNum::from_integer(1 << 9)
        );
    }

    #[test]
    fn validation_errors() {
        let lat = k3_lattice();
        let req = PartitionRequest::k3(4, LatticeVector::zero(22), rint(2));
        assert!(matches!(z_su(&lat, &req), Err(Error::NonPrimeRank(4))));
        let mut req = PartitionRequest::k3(2, LatticeVector::zero(22), rint(2));
        req.surface = SurfaceInvariants {
            chi_o: 1,
            k2: 2,
            euler: 11,
        };
        assert!(matches!(z_su(&lat, &req), Err(Error::NonK3Surface)));
    }
}
