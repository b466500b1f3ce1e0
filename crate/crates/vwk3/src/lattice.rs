//! The K3 cohomology lattice and finite sums over H^2(S, mu_r).
//!
//! H^2(K3, Z) with the cup product is the even unimodular lattice
//! U + U + U + E8(-1) + E8(-1) of rank 22 and signature (3, 19). The block
//! structure matters operationally: the Gauss sums ("flux sums")
//!
//! ```text
//! G_j(c1) = sum_{w in L/rL} e^{2 pi i (w.c1) / r} e^{- pi i j w^2 / r}
//! ```
//!
//! factor over orthogonal blocks, so each block is enumerated by brute
//! force over r^rank vectors and the results are combined multiplicatively
//! (for the sums) or by convolution in Z/r x Z/2r (for the joint
//! distributions of `(w.c1 mod r, w^2 mod 2r)`). Since every block Gram is
//! even, `w^2 mod 2r` is well-defined on residue classes mod r, and all
//! phases live in the single cyclotomic field Q(zeta_{2r}).

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use serde::Serialize;

use crate::cycnum::CycNum;
use crate::error::{Error, Result};
use crate::Rational;

/// One orthogonal summand: a sub-Gram with its offset in the ambient basis.
#[derive(Clone, Debug)]
pub struct Block {
    pub offset: usize,
    pub gram: Vec<Vec<i64>>,
}

impl Block {
    pub fn rank(&self) -> usize {
        self.gram.len()
    }
}

/// Gram-matrix presentation of an even lattice, as an orthogonal direct sum
/// of blocks.
#[derive(Clone, Debug)]
pub struct EvenLattice {
    gram: Vec<Vec<i64>>,
    blocks: Vec<Block>,
}

/// Integer coordinate vector in the basis of the Gram matrix.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct LatticeVector(pub Vec<i64>);

impl LatticeVector {
    pub fn zero(rank: usize) -> Self {
        LatticeVector(vec![0; rank])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&x| x == 0)
    }

    pub fn neg(&self) -> Self {
        LatticeVector(self.0.iter().map(|x| -x).collect())
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.len(), other.len());
        LatticeVector(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    pub fn scale(&self, k: i64) -> Self {
        LatticeVector(self.0.iter().map(|x| x * k).collect())
    }
}

/// The hyperbolic plane U = [[0,1],[1,0]].
pub fn u_gram() -> Vec<Vec<i64>> {
    vec![vec![0, 1], vec![1, 0]]
}

/// E8(-1): the negative of the standard even positive-definite E8 Gram
/// (Cartan matrix, Bourbaki node order 1..8, node 2 attached to node 4).
pub fn e8_minus_gram() -> Vec<Vec<i64>> {
    let mut g = vec![vec![0i64; 8]; 8];
    for (i, row) in g.iter_mut().enumerate() {
        row[i] = 2;
    }
    for &(a, b) in &[(1, 3), (3, 4), (4, 5), (5, 6), (6, 7), (7, 8), (2, 4)] {
        g[a - 1][b - 1] = -1;
        g[b - 1][a - 1] = -1;
    }
    for row in &mut g {
        for x in row.iter_mut() {
            *x = -*x;
        }
    }
    g
}

impl EvenLattice {
    /// Build an orthogonal direct sum from block Grams. Each block must be
    /// symmetric with even diagonal.
    pub fn from_blocks(block_grams: Vec<Vec<Vec<i64>>>) -> Self {
        let rank: usize = block_grams.iter().map(|g| g.len()).sum();
        let mut gram = vec![vec![0i64; rank]; rank];
        let mut blocks = Vec::new();
        let mut off = 0;
        for g in block_grams {
            let n = g.len();
            for (i, row) in g.iter().enumerate() {
                assert_eq!(row.len(), n, "block Gram must be square");
                for (j, &x) in row.iter().enumerate() {
                    assert_eq!(x, g[j][i], "Gram must be symmetric");
                    gram[off + i][off + j] = x;
                }
                assert_eq!(row[i] % 2, 0, "even lattice needs even diagonal");
            }
            blocks.push(Block {
                offset: off,
                gram: g,
            });
            off += n;
        }
        EvenLattice { gram, blocks }
    }

    pub fn rank(&self) -> usize {
        self.gram.len()
    }

    pub fn gram(&self) -> &[Vec<i64>] {
        &self.gram
    }

    pub fn blocks(&self) -> &[Block] {
        &self.blocks
    }

    /// v^T Gram w.
    pub fn inner(&self, v: &LatticeVector, w: &LatticeVector) -> i64 {
        assert_eq!(v.len(), self.rank(), "vector/lattice rank mismatch");
        assert_eq!(w.len(), self.rank(), "vector/lattice rank mismatch");
        let mut acc = 0i64;
        for (i, &vi) in v.0.iter().enumerate() {
            if vi == 0 {
                continue;
            }
            let mut row = 0i64;
            for (j, &wj) in w.0.iter().enumerate() {
                row += self.gram[i][j] * wj;
            }
            acc += vi * row;
        }
        acc
    }

    /// v^T Gram w over the rationals, for classes with rational degree-2
    /// part.
    pub fn inner_rational(&self, v: &[Rational], w: &[Rational]) -> Rational {
        assert_eq!(v.len(), self.rank());
        assert_eq!(w.len(), self.rank());
        let mut acc = Rational::zero();
        for (i, vi) in v.iter().enumerate() {
            if vi.is_zero() {
                continue;
            }
            for (j, wj) in w.iter().enumerate() {
                if self.gram[i][j] != 0 && !wj.is_zero() {
                    acc += vi * wj * Rational::from_integer(BigInt::from(self.gram[i][j]));
                }
            }
        }
        acc
    }

    /// v.v mod 2r, in [0, 2r). Well-defined on classes mod r because the
    /// lattice is even: (v + ru)^2 = v^2 + 2r(v.u) + r^2 u^2 with u^2 even.
    pub fn square_mod_2r(&self, v: &LatticeVector, r: u64) -> u64 {
        let m = 2 * r as i64;
        self.inner(v, v).rem_euclid(m) as u64
    }

    /// True iff a - b lies in r * L, i.e. every coordinate of a - b is
    /// divisible by r.
    pub fn delta_div(&self, a: &LatticeVector, b: &LatticeVector, r: u64) -> bool {
        assert_eq!(a.len(), b.len());
        a.0.iter()
            .zip(&b.0)
            .all(|(x, y)| (x - y).rem_euclid(r as i64) == 0)
    }

    /// Determinant of the Gram matrix (Bareiss, exact).
    pub fn det(&self) -> BigInt {
        let n = self.rank();
        if n == 0 {
            return BigInt::one();
        }
        let mut m: Vec<Vec<BigInt>> = self
            .gram
            .iter()
            .map(|row| row.iter().map(|&x| BigInt::from(x)).collect())
            .collect();
        let mut prev = BigInt::one();
        let mut sign = 1i32;
        for k in 0..n - 1 {
            if m[k][k].is_zero() {
                match (k + 1..n).find(|&i| !m[i][k].is_zero()) {
                    Some(i) => {
                        m.swap(k, i);
                        sign = -sign;
                    }
                    None => return BigInt::zero(),
                }
            }
            for i in k + 1..n {
                for j in k + 1..n {
                    let num = &m[i][j] * &m[k][k] - &m[i][k] * &m[k][j];
                    m[i][j] = num / &prev;
                }
            }
            prev = m[k][k].clone();
        }
        let d = m[n - 1][n - 1].clone();
        if sign < 0 {
            -d
        } else {
            d
        }
    }

    /// Signature (positive, negative inertia), by symmetric congruence
    /// reduction over Q.
    pub fn signature(&self) -> (usize, usize) {
        let n = self.rank();
        let mut m: Vec<Vec<Rational>> = self
            .gram
            .iter()
            .map(|row| {
                row.iter()
                    .map(|&x| Rational::from_integer(BigInt::from(x)))
                    .collect()
            })
            .collect();
        let mut pos = 0;
        let mut neg = 0;
        for k in 0..n {
            if m[k][k].is_zero() {
                if let Some(j) = (k + 1..n).find(|&j| !m[k][j].is_zero()) {
                    // Basis change e_k += e_j makes the pivot nonzero
                    // (2 m[k][j] != 0 and m[j][j] contributes evenly).
                    for i in 0..n {
                        let add = m[i][j].clone();
                        m[i][k] += add;
                    }
                    for i in 0..n {
                        let add = m[j][i].clone();
                        m[k][i] += add;
                    }
                }
                if m[k][k].is_zero() {
                    continue;
                }
            }
            let pivot = m[k][k].clone();
            if pivot.is_positive() {
                pos += 1;
            } else {
                neg += 1;
            }
            for i in 0..n {
                if i == k {
                    continue;
                }
                let f = &m[i][k] / &pivot;
                if f.is_zero() {
                    continue;
                }
                for j in 0..n {
                    let sub = &f * &m[k][j];
                    m[i][j] -= sub;
                }
            }
            for i in 0..n {
                if i != k {
                    m[i][k] = Rational::zero();
                    m[k][i] = Rational::zero();
                }
            }
        }
        (pos, neg)
    }
}

/// U + U + U + E8(-1) + E8(-1): the K3 lattice, rank 22.
pub fn k3_lattice() -> EvenLattice {
    EvenLattice::from_blocks(vec![
        u_gram(),
        u_gram(),
        u_gram(),
        e8_minus_gram(),
        e8_minus_gram(),
    ])
}

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

/// The unique n_j in 1..r-1 with j * n_j = -1 mod r.
pub fn n_j(r: u64, j: u64) -> Result<u64> {
    let j = j % r;
    if j == 0 {
        return Err(Error::NonInvertibleResidue { r, j });
    }
    (1..r)
        .find(|&n| (j as u128 * n as u128) % r as u128 == (r - 1) as u128)
        .ok_or(Error::NonInvertibleResidue { r, j })
}

/// Default per-block enumeration budget (vectors per block).
pub const DEFAULT_BUDGET: u128 = 10_000_000;

/// Joint tally of `(w.c1 mod r, w^2 mod 2r)` over all w in L/rL.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct JointDistribution {
    pub r: u64,
    pub rank: usize,
    /// counts[(m, k)] = #{w : w.c1 = m mod r, w^2 = k mod 2r}
    pub counts: BTreeMap<(u64, u64), u128>,
}

impl JointDistribution {
    pub fn total(&self) -> u128 {
        self.counts.values().sum()
    }

    /// Reassemble the Gauss sum `sum_w zeta_r^{w.c1} zeta_{2r}^{-j w^2}`
    /// from the tallies; the consistency oracle against
    /// [`EvenLattice::gauss_sum`].
    pub fn gauss_sum(&self, j: u64) -> CycNum {
        let two_r = 2 * self.r;
        let mut acc = CycNum::zero();
        for (&(m, k), &count) in &self.counts {
            let e = (2 * m as i128 - j as i128 * k as i128).rem_euclid(two_r as i128) as i64;
            let phase = CycNum::root_of_unity(two_r, e);
            acc = acc.add(&phase.mul_rational(&Rational::from_integer(BigInt::from(count))));
        }
        acc
    }
}

fn check_budget(r: u64, rank: usize, budget: u128) -> Result<u128> {
    let needed = (r as u128)
        .checked_pow(rank as u32)
        .ok_or(Error::BudgetExceeded {
            needed: u128::MAX,
            budget,
        })?;
    if needed > budget {
        return Err(Error::BudgetExceeded { needed, budget });
    }
    Ok(needed)
}

/// Enumerate w in {0..r-1}^rank for one block Gram, reporting
/// `(w.c1 mod r, w^2 mod 2r)` for every vector.
fn enumerate_block<F: FnMut(u64, u64)>(gram: &[Vec<i64>], c1: &[i64], r: u64, mut visit: F) {
    let rank = gram.len();
    let ri = r as i64;
    // Precompute (Gram c1) once; w.c1 = sum_i w_i (Gram c1)_i.
    let gc1: Vec<i64> = (0..rank)
        .map(|i| (0..rank).map(|j| gram[i][j] * c1[j]).sum())
        .collect();
    let mut w = vec![0i64; rank];
    loop {
        let mut sq = 0i64;
        let mut dot = 0i64;
        for i in 0..rank {
            let wi = w[i];
            if wi != 0 {
                let mut row = 0i64;
                for j in 0..rank {
                    row += gram[i][j] * w[j];
                }
                sq += wi * row;
                dot += wi * gc1[i];
            }
        }
        visit(dot.rem_euclid(ri) as u64, sq.rem_euclid(2 * ri) as u64);
        let mut i = 0;
        loop {
            if i == rank {
                return;
            }
            w[i] += 1;
            if w[i] < ri {
                break;
            }
            w[i] = 0;
            i += 1;
        }
    }
}

impl EvenLattice {
    /// The flux sum `sum_{w in L/rL} e^{2 pi i (w.c1)/r} e^{-pi i j w^2/r}`
    /// in Q(zeta_{2r}). The summand factors over orthogonal blocks since
    /// both w.c1 and w^2 are additive across blocks; each block is evaluated
    /// by brute-force enumeration of r^rank vectors, tallying the phase
    /// exponent `2(w.c1) - j w^2 mod 2r`.
    ///
    /// Fails with [`Error::BudgetExceeded`] when a single block would need
    /// more than `budget` vectors.
    pub fn gauss_sum(&self, r: u64, j: u64, c1: &LatticeVector, budget: u128) -> Result<CycNum> {
        assert_eq!(c1.len(), self.rank());
        let two_r = 2 * r;
        let mut acc = CycNum::one();
        for block in &self.blocks {
            check_budget(r, block.rank(), budget)?;
            let c1_block = &c1.0[block.offset..block.offset + block.rank()];
            let mut tally = vec![0u64; two_r as usize];
            enumerate_block(&block.gram, c1_block, r, |m, k| {
                let e = (2 * m as i128 - j as i128 * k as i128).rem_euclid(two_r as i128);
                tally[e as usize] += 1;
            });
            let mut block_sum = CycNum::zero();
            for (e, &count) in tally.iter().enumerate() {
                if count == 0 {
                    continue;
                }
                let phase = CycNum::root_of_unity(two_r, e as i64);
                block_sum =
                    block_sum.add(&phase.mul_rational(&Rational::from_integer(BigInt::from(count))));
            }
            acc = acc.mul(&block_sum);
        }
        Ok(acc)
    }

    /// Per block, enumerate r^rank residue vectors tallying
    /// `(w.c1 mod r, w^2 mod 2r)`; blocks combine by convolution in
    /// Z/r x Z/2r. Total mass r^rank(L).
    pub fn joint_distribution(
        &self,
        r: u64,
        c1: &LatticeVector,
        budget: u128,
    ) -> Result<JointDistribution> {
        assert_eq!(c1.len(), self.rank());
        let two_r = 2 * r;
        let mut counts: BTreeMap<(u64, u64), u128> = BTreeMap::new();
        counts.insert((0, 0), 1);
        for block in &self.blocks {
            check_budget(r, block.rank(), budget)?;
            let c1_block = &c1.0[block.offset..block.offset + block.rank()];
            let mut block_counts: BTreeMap<(u64, u64), u128> = BTreeMap::new();
            enumerate_block(&block.gram, c1_block, r, |m, k| {
                *block_counts.entry((m, k)).or_insert(0) += 1;
            });
            let mut next: BTreeMap<(u64, u64), u128> = BTreeMap::new();
            for (&(m1, k1), &c1n) in &counts {
                for (&(m2, k2), &c2n) in &block_counts {
                    let key = ((m1 + m2) % r, (k1 + k2) % two_r);
                    *next.entry(key).or_insert(0) += c1n * c2n;
                }
            }
            counts = next;
        }
        Ok(JointDistribution {
            r,
            rank: self.rank(),
            counts,
        })
    }

    /// Closed-form flux value: `r^rank delta_{c1,0}` for j = 0 and
    /// `r^{rank/2} e^{-pi i n_j c1^2 / r}` for j != 0. These are the two
    /// identities [`Self::gauss_sum`] is checked against.
    pub fn flux_identity(&self, r: u64, j: u64, c1: &LatticeVector) -> Result<CycNum> {
        let rank = self.rank();
        if j % r == 0 {
            return Ok(if self.delta_div(c1, &LatticeVector::zero(rank), r) {
                CycNum::from_rational(Rational::from_integer(BigInt::from(r).pow(rank as u32)))
            } else {
                CycNum::zero()
            });
        }
        assert_eq!(rank % 2, 0, "flux identity needs even rank");
        let nj = n_j(r, j)?;
        let c1_sq = self.square_mod_2r(c1, r);
        let magnitude = Rational::from_integer(BigInt::from(r).pow((rank / 2) as u32));
        let phase = CycNum::root_of_unity(2 * r, -((nj * c1_sq) as i64));
        Ok(phase.mul_rational(&magnitude))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit(rank: usize, i: usize) -> LatticeVector {
        let mut v = LatticeVector::zero(rank);
        v.0[i] = 1;
        v
    }

    #[test]
    fn k3_lattice_shape() {
        let l = k3_lattice();
        assert_eq!(l.rank(), 22);
        assert_eq!(l.blocks().len(), 5);
        assert_eq!(l.det(), BigInt::from(-1));
        assert_eq!(l.signature(), (3, 19));
        // Hyperbolic pairing in a U block.
        assert_eq!(l.inner(&unit(22, 0), &unit(22, 1)), 1);
        assert_eq!(l.inner(&unit(22, 0), &unit(22, 0)), 0);
        // E8(-1) basis vector self-pairing.
        assert_eq!(l.inner(&unit(22, 6), &unit(22, 6)), -2);
        // inner(v, 0) = 0
        assert_eq!(l.inner(&unit(22, 3), &LatticeVector::zero(22)), 0);
    }

    #[test]
    fn e8_gram_is_unimodular_and_negative_definite() {
        let e8 = EvenLattice::from_blocks(vec![e8_minus_gram()]);
        assert_eq!(e8.det(), BigInt::one());
        assert_eq!(e8.signature(), (0, 8));
    }

    #[test]
    fn square_mod_2r_cases() {
        let l = k3_lattice();
        assert_eq!(l.square_mod_2r(&LatticeVector::zero(22), 3), 0);
        // U block v = (1,1): v^2 = 2, r = 2: 2 mod 4.
        let v = unit(22, 0).add(&unit(22, 1));
        assert_eq!(l.square_mod_2r(&v, 2), 2);
    }

    #[test]
    fn square_mod_2r_well_defined_on_residues() {
        let l = k3_lattice();
        // Deterministic pseudo-random (v, u) pairs.
        let mut state = 0x9e3779b97f4a7c15u64;
        let mut next = move || {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            state
        };
        for r in [2u64, 3, 5] {
            for _ in 0..400 {
                let v = LatticeVector((0..22).map(|_| (next() % 9) as i64 - 4).collect());
                let u = LatticeVector((0..22).map(|_| (next() % 9) as i64 - 4).collect());
                let shifted = v.add(&u.scale(r as i64));
                assert_eq!(
                    l.square_mod_2r(&v, r),
                    l.square_mod_2r(&shifted, r),
                    "r={r}"
                );
            }
        }
    }

    #[test]
    fn delta_div_cases() {
        let l = k3_lattice();
        let v = unit(22, 4);
        assert!(l.delta_div(&v, &v, 3));
        assert!(l.delta_div(&v.scale(3), &LatticeVector::zero(22), 3));
        assert!(!l.delta_div(&v, &LatticeVector::zero(22), 3));
    }

    #[test]
    fn n_j_values() {
        assert_eq!(n_j(2, 1).unwrap(), 1);
        assert_eq!(n_j(5, 2).unwrap(), 2);
        assert_eq!(n_j(5, 3).unwrap(), 3);
        assert_eq!(n_j(7, 3).unwrap(), 2);
        assert!(matches!(
            n_j(5, 0),
            Err(Error::NonInvertibleResidue { .. })
        ));
        // Involution: n_{n_j} = j.
        for r in [2u64, 3, 5, 7] {
            for j in 1..r {
                assert_eq!(n_j(r, n_j(r, j).unwrap()).unwrap(), j);
            }
        }
    }

    #[test]
    fn single_u_block_gauss_sum() {
        // r = 2, j = 1, c1 = 0: terms 1 + 1 + 1 + e^{-pi i} = 2.
        let u = EvenLattice::from_blocks(vec![u_gram()]);
        let g = u
            .gauss_sum(2, 1, &LatticeVector::zero(2), DEFAULT_BUDGET)
            .unwrap();
        assert_eq!(g, CycNum::from_integer(2));
    }

    #[test]
    fn single_u_block_joint_distribution() {
        let u = EvenLattice::from_blocks(vec![u_gram()]);
        let d = u
            .joint_distribution(2, &LatticeVector::zero(2), DEFAULT_BUDGET)
            .unwrap();
        let mut expect = BTreeMap::new();
        expect.insert((0u64, 0u64), 3u128);
        expect.insert((0u64, 2u64), 1u128);
        assert_eq!(d.counts, expect);
        assert_eq!(d.total(), 4);
    }

    /// Monolithic enumeration over the full Gram, ignoring block structure:
    /// the brute-force oracle for block multiplicativity.
    fn gauss_sum_monolithic(l: &EvenLattice, r: u64, j: u64, c1: &LatticeVector) -> CycNum {
        let as_one_block = EvenLattice::from_blocks(vec![l.gram().to_vec()]);
        as_one_block
            .gauss_sum(r, j, c1, u128::MAX / 2)
            .expect("no budget in oracle")
    }

    #[test]
    fn block_multiplicativity_vs_monolithic() {
        // U + U (rank 4) and U + A1-like even blocks at r in {2, 3}.
        let l = EvenLattice::from_blocks(vec![u_gram(), u_gram()]);
        for r in [2u64, 3] {
            for j in 0..r {
                for c1 in [
                    LatticeVector::zero(4),
                    LatticeVector(vec![1, 0, 0, 1]),
                    LatticeVector(vec![2, 1, 1, 0]),
                ] {
                    let fast = l.gauss_sum(r, j, &c1, DEFAULT_BUDGET).unwrap();
                    let slow = gauss_sum_monolithic(&l, r, j, &c1);
                    assert_eq!(fast, slow, "r={r} j={j}");
                }
            }
        }
        let mixed = EvenLattice::from_blocks(vec![u_gram(), vec![vec![-2]], vec![vec![4]]]);
        for r in [2u64, 3] {
            for j in 0..r {
                let c1 = LatticeVector(vec![1, 1, 1, 1]);
                assert_eq!(
                    mixed.gauss_sum(r, j, &c1, DEFAULT_BUDGET).unwrap(),
                    gauss_sum_monolithic(&mixed, r, j, &c1),
                    "mixed r={r} j={j}"
                );
            }
        }
    }

    #[test]
    fn joint_distribution_reproduces_gauss_sum() {
        let l = k3_lattice();
        for r in [2u64, 3] {
            for c1 in [LatticeVector::zero(22), unit(22, 0)] {
                let d = l.joint_distribution(r, &c1, DEFAULT_BUDGET).unwrap();
                assert_eq!(d.total(), (r as u128).pow(22));
                for j in 0..r {
                    assert_eq!(
                        d.gauss_sum(j),
                        l.gauss_sum(r, j, &c1, DEFAULT_BUDGET).unwrap(),
                        "r={r} j={j}"
                    );
                }
            }
        }
    }

    #[test]
    fn flux_identities_small_rank() {
        let l = k3_lattice();
        // j = 0: r^22 delta_{c1,0}.
        let g = l
            .gauss_sum(2, 0, &LatticeVector::zero(22), DEFAULT_BUDGET)
            .unwrap();
        assert_eq!(g, CycNum::from_integer(1 << 22));
        let g = l.gauss_sum(2, 0, &unit(22, 0), DEFAULT_BUDGET).unwrap();
        assert!(g.is_zero());
        // j != 0 at r = 2, c1 = 0: 2^11.
        let g = l
            .gauss_sum(2, 1, &LatticeVector::zero(22), DEFAULT_BUDGET)
            .unwrap();
        assert_eq!(g, CycNum::from_integer(1 << 11));
        assert_eq!(
            g,
            l.flux_identity(2, 1, &LatticeVector::zero(22)).unwrap()
        );
    }

    #[test]
    fn budget_guard() {
        let e8 = EvenLattice::from_blocks(vec![e8_minus_gram()]);
        let err = e8.gauss_sum(2, 1, &LatticeVector::zero(8), 100);
        assert!(matches!(err, Err(Error::BudgetExceeded { needed: 256, .. })));
        let err = e8.joint_distribution(5, &LatticeVector::zero(8), 100_000);
        assert!(matches!(
            err,
            Err(Error::BudgetExceeded {
                needed: 390_625,
                ..
            })
        ));
    }

    #[test]
    fn primality_helper() {
        assert!(is_prime(2));
        assert!(is_prime(3));
        assert!(is_prime(5));
        assert!(is_prime(7));
        assert!(!is_prime(1));
        assert!(!is_prime(4));
        assert!(!is_prime(9));
    }
}
