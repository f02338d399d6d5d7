//! The symmetrized two-body local polytope.
//!
//! A local deterministic strategy for `n` parties with two ±1-valued measurements is
//! summarised, up to permutations, by the counts `(a, b, c, d)` of parties answering
//! `(+,+)`, `(+,-)`, `(-,+)` and `(-,-)`. The map [`phi`] sends such a tuple to the five
//! symmetric correlators. The images of tuples with at least one zero entry are exactly
//! the vertices of the polytope; interior tuples are convex combinations of them.

use std::collections::BTreeSet;
use std::fmt;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::inequalities::BellInequality;
use crate::par::{self, ExecMode};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum PolytopeError {
    #[error("correlators {0} are not the image of a deterministic strategy")]
    NotAVertexImage(SymmetricCorrelators),
    #[error("party count must be positive")]
    ZeroParties,
}

/// Counts of parties per deterministic assignment: `a` = (+,+), `b` = (+,-),
/// `c` = (-,+), `d` = (-,-). The party count is `a + b + c + d`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct StrategyTuple {
    pub a: u64,
    pub b: u64,
    pub c: u64,
    pub d: u64,
}

impl StrategyTuple {
    pub const fn new(a: u64, b: u64, c: u64, d: u64) -> Self {
        StrategyTuple { a, b, c, d }
    }

    pub fn n(&self) -> u64 {
        self.a + self.b + self.c + self.d
    }

    /// On the boundary of the discrete simplex, i.e. `abcd = 0`.
    pub fn is_boundary(&self) -> bool {
        self.a == 0 || self.b == 0 || self.c == 0 || self.d == 0
    }

    pub fn as_array(&self) -> [u64; 4] {
        [self.a, self.b, self.c, self.d]
    }

    /// Swaps every outcome: `(a, b, c, d) -> (d, c, b, a)`.
    pub fn relabeled(&self) -> Self {
        StrategyTuple::new(self.d, self.c, self.b, self.a)
    }
}

impl fmt::Display for StrategyTuple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}, {}, {})", self.a, self.b, self.c, self.d)
    }
}

/// Symmetric one- and two-body correlators `(S0, S1, S00, S01, S11)` of `n` parties.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct SymmetricCorrelators {
    pub n: u64,
    pub s0: i64,
    pub s1: i64,
    pub s00: i64,
    pub s01: i64,
    pub s11: i64,
}

impl SymmetricCorrelators {
    pub fn as_array(&self) -> [i64; 5] {
        [self.s0, self.s1, self.s00, self.s01, self.s11]
    }

    /// Checks the coordinate ranges every local point satisfies.
    pub fn within_local_bounds(&self) -> bool {
        let n = self.n as i64;
        let pairs = n * (n - 1);
        self.s0.abs() <= n
            && self.s1.abs() <= n
            && (-n..=pairs).contains(&self.s00)
            && (-n..=pairs).contains(&self.s11)
            && self.s01.abs() <= pairs
    }
}

impl fmt::Display for SymmetricCorrelators {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "n={} (S0={}, S1={}, S00={}, S01={}, S11={})",
            self.n, self.s0, self.s1, self.s00, self.s01, self.s11
        )
    }
}

/// Correlators of the deterministic strategy summarised by `t`.
pub fn phi(t: &StrategyTuple) -> SymmetricCorrelators {
    let (a, b, c, d) = (t.a as i64, t.b as i64, t.c as i64, t.d as i64);
    let n = a + b + c + d;
    let s0 = a + b - c - d;
    let s1 = a - b + c - d;
    let z = a - b - c + d;
    SymmetricCorrelators {
        n: n as u64,
        s0,
        s1,
        s00: s0 * s0 - n,
        s01: s0 * s1 - z,
        s11: s1 * s1 - n,
    }
}

/// Recovers the strategy tuple from correlators in the image of [`phi`].
///
/// `(n, S1, S0, Z)` is the unnormalised Hadamard transform of `(a, b, c, d)`; the
/// transform squares to `4·I`, so the inverse is the same matrix divided by four.
pub fn phi_inverse(c: &SymmetricCorrelators) -> Result<StrategyTuple, PolytopeError> {
    let fail = || PolytopeError::NotAVertexImage(*c);
    let n = c.n as i64;
    if c.s00 != c.s0 * c.s0 - n || c.s11 != c.s1 * c.s1 - n {
        return Err(fail());
    }
    let z = c.s0 * c.s1 - c.s01;
    let quads = [
        n + c.s1 + c.s0 + z,
        n - c.s1 + c.s0 - z,
        n + c.s1 - c.s0 - z,
        n - c.s1 - c.s0 + z,
    ];
    let mut out = [0u64; 4];
    for (slot, q) in out.iter_mut().zip(quads) {
        if q < 0 || q % 4 != 0 {
            return Err(fail());
        }
        *slot = (q / 4) as u64;
    }
    Ok(StrategyTuple::new(out[0], out[1], out[2], out[3]))
}

/// Every tuple of the discrete simplex `a + b + c + d = n`, in lexicographic order.
pub fn enumerate_all_tuples(n: u64) -> Vec<StrategyTuple> {
    let mut out = Vec::new();
    for a in 0..=n {
        for b in 0..=n - a {
            for c in 0..=n - a - b {
                out.push(StrategyTuple::new(a, b, c, n - a - b - c));
            }
        }
    }
    out
}

/// The boundary tuples (`abcd = 0`), whose images are the polytope vertices.
///
/// Walks the four facets `a = 0`, …, `d = 0` and merges them through an ordered set,
/// so tuples on facet intersections appear once and the output is lexicographic.
/// The result has `2(n² + 1)` elements.
pub fn enumerate_boundary_tuples(n: u64) -> Vec<StrategyTuple> {
    enumerate_boundary_tuples_with(n, ExecMode::default())
}

pub fn enumerate_boundary_tuples_with(n: u64, mode: ExecMode) -> Vec<StrategyTuple> {
    let facets = par::map_range(mode, 4, |zero| {
        let mut facet = Vec::with_capacity(((n + 1) * (n + 2) / 2) as usize);
        for x in 0..=n {
            for y in 0..=n - x {
                let rest = [x, y, n - x - y];
                let mut coords = [0u64; 4];
                let mut it = rest.into_iter();
                for (i, slot) in coords.iter_mut().enumerate() {
                    if i != zero {
                        *slot = it.next().unwrap_or(0);
                    }
                }
                facet.push(StrategyTuple::new(coords[0], coords[1], coords[2], coords[3]));
            }
        }
        facet
    });
    let set: BTreeSet<StrategyTuple> = facets.into_iter().flatten().collect();
    set.into_iter().collect()
}

/// `2(n² + 1)`, the number of vertices.
pub fn boundary_count(n: u64) -> u64 {
    2 * (n * n + 1)
}

/// The linear part `α·S0 + β·S1 + γ/2·S00 + δ·S01 + ε/2·S11` scaled to integers:
/// `value = (Σ coeffs[i]·S[i]) / scale`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScaledLinearForm {
    pub coeffs: [BigInt; 5],
    pub scale: BigInt,
}

impl ScaledLinearForm {
    pub fn from_inequality(ineq: &BellInequality) -> Self {
        let two = BigRational::from_integer(BigInt::from(2));
        let rational = [
            ineq.alpha.clone(),
            ineq.beta.clone(),
            &ineq.gamma / &two,
            ineq.delta.clone(),
            &ineq.epsilon / &two,
        ];
        let scale = crate::rational::common_denominator(rational.iter());
        let coeffs = rational.map(|q| (q * BigRational::from_integer(scale.clone())).to_integer());
        ScaledLinearForm { coeffs, scale }
    }

    /// Integer numerator of the form at `s`.
    pub fn numerator(&self, s: &SymmetricCorrelators) -> BigInt {
        self.coeffs
            .iter()
            .zip(s.as_array())
            .map(|(c, x)| c * BigInt::from(x))
            .sum()
    }

    pub fn value(&self, s: &SymmetricCorrelators) -> BigRational {
        BigRational::new(self.numerator(s), self.scale.clone())
    }

    /// Coefficients as `i128` when `Σ|coeff|·n²` cannot overflow.
    fn small_coeffs(&self, n: u64) -> Option<[i128; 5]> {
        let limit = BigInt::one() << 120u32;
        let n2 = BigInt::from(n.max(1)) * BigInt::from(n.max(1));
        let mut total = BigInt::zero();
        let mut out = [0i128; 5];
        for (slot, c) in out.iter_mut().zip(&self.coeffs) {
            *slot = c.to_i128()?;
            total += num_traits::Signed::abs(c) * &n2;
        }
        (total < limit).then_some(out)
    }
}

/// Exact minimum of the linear part of an inequality and every tuple attaining it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PolytopeMinimum {
    pub value: BigRational,
    /// Minimising tuples in lexicographic order.
    pub argmin: Vec<StrategyTuple>,
}

/// Minimises the linear part of `ineq` (without `β_c`) over the vertices of the
/// `n`-party polytope.
pub fn minimize_over_polytope(ineq: &BellInequality, n: u64) -> PolytopeMinimum {
    minimize_over_polytope_with(ineq, n, ExecMode::default())
}

pub fn minimize_over_polytope_with(ineq: &BellInequality, n: u64, mode: ExecMode) -> PolytopeMinimum {
    let tuples = enumerate_boundary_tuples_with(n, mode);
    minimize_over_tuples(&ScaledLinearForm::from_inequality(ineq), &tuples, mode)
}

/// Minimises a scaled form over an explicit tuple list (all sharing the same `n`).
pub fn minimize_over_tuples(form: &ScaledLinearForm, tuples: &[StrategyTuple], mode: ExecMode) -> PolytopeMinimum {
    let n = tuples.first().map(|t| t.n()).unwrap_or(0);
    let numerators: Vec<BigInt> = match form.small_coeffs(n) {
        Some(c) => par::map_slice(mode, tuples, |t| {
            let s = phi(t).as_array();
            let v: i128 = (0..5).map(|i| c[i] * s[i] as i128).sum();
            BigInt::from(v)
        }),
        None => par::map_slice(mode, tuples, |t| form.numerator(&phi(t))),
    };
    let Some(best) = numerators.iter().min().cloned() else {
        return PolytopeMinimum {
            value: BigRational::zero(),
            argmin: Vec::new(),
        };
    };
    let argmin = tuples
        .iter()
        .zip(&numerators)
        .filter(|(_, v)| **v == best)
        .map(|(t, _)| *t)
        .collect();
    PolytopeMinimum {
        value: BigRational::new(best, form.scale.clone()),
        argmin,
    }
}

/// Binomial coefficient over big integers.
pub fn binomial(n: &BigUint, k: u64) -> BigUint {
    let mut acc = BigUint::one();
    for i in 0..k {
        acc = acc * (n - BigUint::from(i)) / BigUint::from(i + 1);
    }
    acc
}

/// Upper bound on the number of vertices of the symmetrized `(n, m, d)` polytope from
/// counting multisets of local strategies: `C(n + d^m - 1, d^m - 1)`.
pub fn polya_vertex_bound(n: u64, m: u32, d: u64) -> BigUint {
    let strategies = BigUint::from(d).pow(m);
    let top = BigUint::from(n) + &strategies - BigUint::one();
    // C(top, strategies - 1) = C(top, n)
    binomial(&top, n)
}

fn euler_totient(mut x: u64) -> u64 {
    let mut result = x;
    let mut p = 2;
    while p * p <= x {
        if x.is_multiple_of(p) {
            while x.is_multiple_of(p) {
                x /= p;
            }
            result -= result / p;
        }
        p += 1;
    }
    if x > 1 {
        result -= result / x;
    }
    result
}

/// Number of orbits of `(d^m)^n` local strategies under cyclic translations of the
/// parties: `(1/n) Σ_{ν | n} φ(ν) · d^{m n / ν}`.
pub fn translation_invariant_count(n: u64, m: u32, d: u64) -> BigUint {
    assert!(n >= 1, "party count must be positive");
    let base = BigUint::from(d).pow(m);
    let mut total = BigUint::zero();
    for nu in (1..=n).filter(|nu| n.is_multiple_of(*nu)) {
        let exponent = u32::try_from(n / nu).expect("exponent fits in u32");
        total += BigUint::from(euler_totient(nu)) * base.pow(exponent);
    }
    debug_assert!((&total % BigUint::from(n)).is_zero());
    total / BigUint::from(n)
}
