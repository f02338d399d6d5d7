//! Brute-force references on the full `2^n` Hilbert space and the full strategy simplex.
//!
//! Nothing here is fast. Every routine is written to be checked by eye, and the rest of
//! the crate is tested against it.
//!
//! Conventions: qubit `q` is bit `q` of the basis index; `σ_z|0⟩ = |0⟩`. Collective
//! operators are unnormalised sums of Pauli matrices, with two-body sums over ordered
//! pairs of distinct sites.

use nalgebra::{DMatrix, DVector};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::bell_operator::{self, BellError, MeasurementPair, TwiceSpin};
use crate::inequalities::BellInequality;
use crate::polytope::{self, SymmetricCorrelators};

pub const MAX_COLLECTIVE: u32 = 14;
pub const MAX_DENSE: u32 = 12;
pub const MAX_PROJECTION: u32 = 10;
pub const MAX_HULL: u64 = 8;
pub const MAX_STRATEGIES: u64 = 10;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum OracleError {
    #[error("{what} is limited to n <= {max}, got n = {n}")]
    TooLarge { what: &'static str, n: u64, max: u64 },
    #[error(transparent)]
    Bell(#[from] BellError),
}

fn guard(what: &'static str, n: u64, max: u64) -> Result<(), OracleError> {
    if n > max {
        Err(OracleError::TooLarge { what, n, max })
    } else {
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Collective {
    Sx,
    Sy,
    Sz,
    Sxx,
    Sxy,
    Sxz,
    Syy,
    Syz,
    Szz,
}

impl Collective {
    pub const ALL: [Collective; 9] = [
        Collective::Sx,
        Collective::Sy,
        Collective::Sz,
        Collective::Sxx,
        Collective::Sxy,
        Collective::Sxz,
        Collective::Syy,
        Collective::Syz,
        Collective::Szz,
    ];

    /// Operators with an odd number of `σ_y` factors are purely imaginary.
    pub fn is_imaginary(self) -> bool {
        matches!(self, Collective::Sy | Collective::Sxy | Collective::Syz)
    }
}

/// An operator on `2^n` amplitudes, stored row by row. When `imaginary` is set the operator
/// is `i` times the stored real matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseOperator {
    pub n: u32,
    pub imaginary: bool,
    rows: Vec<Vec<(usize, f64)>>,
}

impl DenseOperator {
    pub fn dim(&self) -> usize {
        self.rows.len()
    }

    pub fn entry(&self, i: usize, j: usize) -> f64 {
        self.rows[i].iter().filter(|(c, _)| *c == j).map(|(_, v)| v).sum()
    }

    pub fn row(&self, i: usize) -> &[(usize, f64)] {
        &self.rows[i]
    }

    /// `max |M_ij - s M_ji|` with `s = -1` for imaginary operators (hermiticity).
    pub fn hermiticity_defect(&self) -> f64 {
        let s = if self.imaginary { -1.0 } else { 1.0 };
        let mut worst = 0.0f64;
        for (i, row) in self.rows.iter().enumerate() {
            for &(j, v) in row {
                worst = worst.max((v - s * self.entry(j, i)).abs());
            }
        }
        worst
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        self.rows
            .iter()
            .map(|row| row.iter().map(|&(j, v)| v * x[j]).sum())
            .collect()
    }

    /// `⟨x|M|x⟩` for a real vector; zero for imaginary operators.
    pub fn expectation(&self, x: &[f64]) -> f64 {
        if self.imaginary {
            return 0.0;
        }
        self.apply(x).iter().zip(x).map(|(a, b)| a * b).sum()
    }

    pub fn to_dense(&self) -> Result<DMatrix<f64>, OracleError> {
        guard("dense matrix", self.n as u64, MAX_DENSE as u64)?;
        let d = self.dim();
        let mut m = DMatrix::zeros(d, d);
        for (i, row) in self.rows.iter().enumerate() {
            for &(j, v) in row {
                m[(i, j)] += v;
            }
        }
        Ok(m)
    }

    fn from_fn(n: u32, imaginary: bool, f: impl Fn(usize, &mut Vec<(usize, f64)>)) -> Self {
        let rows = (0..1usize << n)
            .map(|i| {
                let mut row = Vec::new();
                f(i, &mut row);
                row.retain(|&(_, v)| v != 0.0);
                row.sort_by_key(|&(j, _)| j);
                row
            })
            .collect();
        DenseOperator { n, imaginary, rows }
    }
}

fn weight(i: usize) -> i64 {
    i.count_ones() as i64
}

/// `+1` if site `s` of the row index holds a one, else `-1`: the imaginary part of `σ_y` at `s`.
fn y_sign(i: usize, s: u32) -> f64 {
    if (i >> s) & 1 == 1 {
        1.0
    } else {
        -1.0
    }
}

/// Collective operator from the computational-basis selection rules: one-body terms live on
/// Hamming distance 1 (or the diagonal), two-body terms on distance 2 (or 1, or 0).
pub fn dense_collective(n: u32, which: Collective) -> Result<DenseOperator, OracleError> {
    guard("collective operator", n as u64, MAX_COLLECTIVE as u64)?;
    let nn = n as i64;
    let pairs: Vec<(u32, u32)> = (0..n).flat_map(|s| (s + 1..n).map(move |t| (s, t))).collect();
    let op = DenseOperator::from_fn(n, which.is_imaginary(), |i, row| {
        let w = weight(i);
        match which {
            Collective::Sz => row.push((i, (nn - 2 * w) as f64)),
            Collective::Szz => row.push((i, ((nn - 2 * w).pow(2) - nn) as f64)),
            Collective::Sx | Collective::Sy | Collective::Sxz | Collective::Syz => {
                for s in 0..n {
                    let j = i ^ (1 << s);
                    let zsum = (nn - w - weight(j)) as f64;
                    let v = match which {
                        Collective::Sx => 1.0,
                        Collective::Sy => y_sign(i, s),
                        Collective::Sxz => zsum,
                        _ => y_sign(i, s) * zsum,
                    };
                    row.push((j, v));
                }
            }
            Collective::Sxx | Collective::Syy | Collective::Sxy => {
                for &(s, t) in &pairs {
                    let j = i ^ (1 << s) ^ (1 << t);
                    let v = match which {
                        Collective::Sxx => 2.0,
                        Collective::Syy => -2.0 * y_sign(i, s) * y_sign(i, t),
                        _ => y_sign(i, s) + y_sign(i, t),
                    };
                    row.push((j, v));
                }
            }
        }
    });
    Ok(op)
}

/// `M|j⟩` for `M = cos(a) σ_z + sin(a) σ_x` acting on site `s`, as (index, amplitude) pairs.
fn site_measurement(angle: f64, s: u32, j: usize) -> [(usize, f64); 2] {
    let z = if (j >> s) & 1 == 0 { 1.0 } else { -1.0 };
    [(j, angle.cos() * z), (j ^ (1 << s), angle.sin())]
}

/// Bell operator assembled site by site from the two local observables, independent of the
/// block formulas: `β_c + α Σ M0 + β Σ M1 + γ/2 Σ M0M0 + δ Σ M0M1 + ε/2 Σ M1M1`.
pub fn dense_bell_operator(ineq: &BellInequality, m: MeasurementPair) -> Result<DMatrix<f64>, OracleError> {
    guard("dense Bell operator", ineq.n, MAX_DENSE as u64)?;
    let n = ineq.n as u32;
    let q = ineq.coefficients();
    let dim = 1usize << n;
    let angles = [m.phi, m.theta];
    let one = [q.alpha, q.beta];
    let two = [[q.gamma / 2.0, q.delta], [0.0, q.epsilon / 2.0]];
    let mut out = DMatrix::zeros(dim, dim);
    for j in 0..dim {
        out[(j, j)] += q.beta_c;
        for s in 0..n {
            for (k, &c) in one.iter().enumerate() {
                for (i, amp) in site_measurement(angles[k], s, j) {
                    out[(i, j)] += c * amp;
                }
            }
        }
        for s in 0..n {
            for t in 0..n {
                if s == t {
                    continue;
                }
                for k in 0..2 {
                    for l in k..2 {
                        let c = two[k][l];
                        if c == 0.0 {
                            continue;
                        }
                        // M_k on s, M_l on t
                        for (mid, a1) in site_measurement(angles[l], t, j) {
                            for (i, a2) in site_measurement(angles[k], s, mid) {
                                out[(i, j)] += c * a1 * a2;
                            }
                        }
                    }
                }
            }
        }
    }
    Ok(out)
}

/// The same operator from the collective bitwise forms and the block constants.
pub fn dense_bell_from_collective(ineq: &BellInequality, m: MeasurementPair) -> Result<DMatrix<f64>, OracleError> {
    guard("dense Bell operator", ineq.n, MAX_DENSE as u64)?;
    let n = ineq.n as u32;
    let k = bell_operator::block_constants(ineq, m);
    let q = ineq.coefficients();
    let mut out = DMatrix::identity(1 << n, 1 << n) * q.beta_c;
    for (which, c) in [
        (Collective::Sz, k.a),
        (Collective::Sx, k.a_prime),
        (Collective::Szz, k.b / 2.0),
        (Collective::Sxx, k.c / 2.0),
        (Collective::Sxz, k.d),
    ] {
        out += dense_collective(n, which)?.to_dense()? * c;
    }
    Ok(out)
}

/// Sorted spectrum of the dense Bell operator.
pub fn dense_spectrum(ineq: &BellInequality, m: MeasurementPair) -> Result<Vec<f64>, OracleError> {
    let mut ev: Vec<f64> = dense_bell_operator(ineq, m)?
        .symmetric_eigenvalues()
        .iter()
        .copied()
        .collect();
    ev.sort_by(f64::total_cmp);
    Ok(ev)
}

/// `max |λ_dense - λ_blocks|` over the full spectrum with multiplicities.
pub fn spectrum_check(ineq: &BellInequality, m: MeasurementPair) -> Result<f64, OracleError> {
    let dense = dense_spectrum(ineq, m)?;
    let blocks = bell_operator::full_spectrum(ineq, m)?;
    assert_eq!(dense.len(), blocks.len(), "multiplicities must add up to 2^n");
    Ok(dense
        .iter()
        .zip(&blocks)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max))
}

/// Normalised `|D_n^k⟩` on `2^n` amplitudes.
pub fn dicke_vector(n: u32, k: u32) -> Vec<f64> {
    let mut v: Vec<f64> = (0..1usize << n)
        .map(|i| if i.count_ones() == k { 1.0 } else { 0.0 })
        .collect();
    let norm = v.iter().sum::<f64>().sqrt();
    v.iter_mut().for_each(|x| *x /= norm);
    v
}

pub fn ghz_vector(n: u32) -> Vec<f64> {
    let mut v = vec![0.0; 1 << n];
    v[0] = std::f64::consts::FRAC_1_SQRT_2;
    v[(1 << n) - 1] = std::f64::consts::FRAC_1_SQRT_2;
    v
}

/// Orthonormal vectors `|D_{2J}^k⟩ ⊗ |ψ⁻⟩^{⊗(n-2J)/2}`, `k = 0..=2J`; the Dicke part sits on
/// the first `2J` qubits and the singlets on consecutive pairs after them.
pub fn block_basis(n: u32, two_j: u32) -> Vec<Vec<f64>> {
    let pairs = (n - two_j) / 2;
    let dim = 1usize << n;
    (0..=two_j)
        .map(|k| {
            let dicke = dicke_vector(two_j, k);
            let mut v = vec![0.0; dim];
            for (d_idx, &d_amp) in dicke.iter().enumerate() {
                if d_amp == 0.0 {
                    continue;
                }
                // each singlet (|01⟩ - |10⟩)/√2; choose the branch per pair
                for branch in 0..1usize << pairs {
                    let mut idx = d_idx;
                    let mut amp = d_amp;
                    for p in 0..pairs {
                        let lo = two_j + 2 * p;
                        if (branch >> p) & 1 == 0 {
                            idx |= 1 << (lo + 1);
                        } else {
                            idx |= 1 << lo;
                            amp = -amp;
                        }
                        amp *= std::f64::consts::FRAC_1_SQRT_2;
                    }
                    v[idx] += amp;
                }
            }
            v
        })
        .collect()
}

/// Projects the dense operator onto every block basis and compares entrywise with the
/// pentadiagonal blocks. Returns `max |difference|`.
pub fn block_projection_check(ineq: &BellInequality, m: MeasurementPair) -> Result<f64, OracleError> {
    guard("block projection", ineq.n, MAX_PROJECTION as u64)?;
    let n = ineq.n as u32;
    let dense = dense_bell_operator(ineq, m)?;
    let mut worst = 0.0f64;
    for tj in TwiceSpin::all(ineq.n) {
        let basis = block_basis(n, tj.0 as u32);
        let p = DMatrix::from_fn(1 << n, basis.len(), |i, c| basis[c][i]);
        let projected = p.transpose() * &dense * &p;
        let block = bell_operator::build_block(ineq, m, tj)?.matrix().to_dense();
        worst = worst.max((projected - block).abs().max());
    }
    Ok(worst)
}

/// `⟨S_z⟩, ⟨S_x⟩, ⟨S_z²⟩, ⟨S_x²⟩, ⟨S_{π/4}²⟩` of a real state with `S = ½ Σ σ`.
pub fn dense_spin_moments(n: u32, psi: &[f64]) -> Result<[f64; 5], OracleError> {
    let ev = |w: Collective| dense_collective(n, w).map(|op| op.expectation(psi));
    let nf = n as f64;
    let sz = ev(Collective::Sz)? / 2.0;
    let sx = ev(Collective::Sx)? / 2.0;
    let szz = (ev(Collective::Szz)? + nf) / 4.0;
    let sxx = (ev(Collective::Sxx)? + nf) / 4.0;
    // {S_x, S_z} = ½ Σ_{a≠b} σ_x^a σ_z^b
    let anti = ev(Collective::Sxz)? / 2.0;
    Ok([sz, sx, szz, sxx, (sxx + szz + anti) / 2.0])
}

/// All `φ(T_n)` points, deduplicated.
fn all_points(n: u64) -> Vec<SymmetricCorrelators> {
    let mut pts: Vec<SymmetricCorrelators> = polytope::enumerate_all_tuples(n).iter().map(polytope::phi).collect();
    pts.sort_by_key(|p| p.as_array());
    pts.dedup();
    pts
}

/// Extreme points of `conv φ(T_n)`: a point is extreme iff it is not a convex combination of
/// the others, decided by an exact phase-one simplex.
pub fn hull_extreme_points(n: u64) -> Result<Vec<SymmetricCorrelators>, OracleError> {
    guard("hull", n, MAX_HULL)?;
    let pts = all_points(n);
    let coords: Vec<[BigRational; 5]> = pts
        .iter()
        .map(|p| p.as_array().map(|c| BigRational::from_integer(BigInt::from(c))))
        .collect();
    Ok(pts
        .iter()
        .enumerate()
        .filter(|(i, _)| {
            let others: Vec<&[BigRational; 5]> = coords
                .iter()
                .enumerate()
                .filter(|(j, _)| j != i)
                .map(|(_, c)| c)
                .collect();
            !is_convex_combination(&coords[*i], &others)
        })
        .map(|(_, p)| *p)
        .collect())
}

/// Feasibility of `Σ λ_j q_j = p`, `Σ λ_j = 1`, `λ ≥ 0`, by phase-one simplex with Bland's rule.
pub fn is_convex_combination(p: &[BigRational; 5], others: &[&[BigRational; 5]]) -> bool {
    let m = 6;
    let cols = others.len();
    if cols == 0 {
        return false;
    }
    // tableau rows: [A | I_art | b], made b >= 0
    let width = cols + m + 1;
    let mut t: Vec<Vec<BigRational>> = (0..m)
        .map(|r| {
            let mut row = vec![BigRational::zero(); width];
            for (c, q) in others.iter().enumerate() {
                row[c] = if r < 5 { q[r].clone() } else { BigRational::one() };
            }
            row[cols + r] = BigRational::one();
            row[width - 1] = if r < 5 { p[r].clone() } else { BigRational::one() };
            if row[width - 1].is_negative() {
                for (c, v) in row.iter_mut().enumerate() {
                    if c < cols || c == width - 1 {
                        *v = -v.clone();
                    }
                }
            }
            row
        })
        .collect();
    let mut basis: Vec<usize> = (cols..cols + m).collect();
    // objective: minimise the artificial sum; reduced costs of non-artificial columns
    loop {
        let reduced = |c: usize, t: &Vec<Vec<BigRational>>, basis: &Vec<usize>| -> BigRational {
            let cost = |k: usize| {
                if k >= cols && k < cols + m {
                    BigRational::one()
                } else {
                    BigRational::zero()
                }
            };
            let mut z = BigRational::zero();
            for (r, &b) in basis.iter().enumerate() {
                z += cost(b) * &t[r][c];
            }
            cost(c) - z
        };
        let entering = (0..cols + m).find(|&c| !basis.contains(&c) && reduced(c, &t, &basis).is_negative());
        let Some(e) = entering else { break };
        let mut leave: Option<(usize, BigRational)> = None;
        for r in 0..m {
            if t[r][e].is_positive() {
                let ratio = &t[r][width - 1] / &t[r][e];
                let better = match &leave {
                    None => true,
                    Some((lr, best)) => ratio < *best || (ratio == *best && basis[r] < basis[*lr]),
                };
                if better {
                    leave = Some((r, ratio));
                }
            }
        }
        let Some((r, _)) = leave else { break };
        let pivot = t[r][e].clone();
        for v in t[r].iter_mut() {
            *v = &*v / &pivot;
        }
        for rr in 0..m {
            if rr != r && !t[rr][e].is_zero() {
                let f = t[rr][e].clone();
                let (pivot_row, target) = if r < rr {
                    let (a, b) = t.split_at_mut(rr);
                    (&a[r], &mut b[0])
                } else {
                    let (a, b) = t.split_at_mut(r);
                    (&b[0], &mut a[rr])
                };
                for (dst, src) in target.iter_mut().zip(pivot_row) {
                    *dst -= &f * src;
                }
            }
        }
        basis[r] = e;
    }
    let infeasibility: BigRational = basis
        .iter()
        .enumerate()
        .filter(|(_, &b)| b >= cols)
        .map(|(r, _)| t[r][width - 1].clone())
        .fold(BigRational::zero(), |a, b| a + b);
    infeasibility.is_zero()
}

/// Minimum of the linear part over every tuple of `T_n` (interior included).
pub fn all_tuples_minimum(ineq: &BellInequality) -> BigRational {
    polytope::enumerate_all_tuples(ineq.n)
        .iter()
        .map(|t| ineq.linear_value(&polytope::phi(t)))
        .min()
        .expect("T_n is nonempty")
}

/// Minimum of the linear part over all `4^n` deterministic strategies, party by party.
pub fn exhaustive_strategy_minimum(ineq: &BellInequality) -> Result<BigRational, OracleError> {
    guard("exhaustive strategies", ineq.n, MAX_STRATEGIES)?;
    let n = ineq.n as u32;
    let mut best: Option<BigRational> = None;
    for code in 0..1u64 << (2 * n) {
        // party p answers (x0, x1) in {±1}² encoded in two bits
        let outs: Vec<(i64, i64)> = (0..n)
            .map(|p| {
                let bits = (code >> (2 * p)) & 3;
                (1 - 2 * (bits & 1) as i64, 1 - 2 * ((bits >> 1) & 1) as i64)
            })
            .collect();
        let s0: i64 = outs.iter().map(|o| o.0).sum();
        let s1: i64 = outs.iter().map(|o| o.1).sum();
        let mut s00 = 0;
        let mut s01 = 0;
        let mut s11 = 0;
        for i in 0..n as usize {
            for j in 0..n as usize {
                if i != j {
                    s00 += outs[i].0 * outs[j].0;
                    s01 += outs[i].0 * outs[j].1;
                    s11 += outs[i].1 * outs[j].1;
                }
            }
        }
        let v = ineq.linear_value(&SymmetricCorrelators {
            n: ineq.n,
            s0,
            s1,
            s00,
            s01,
            s11,
        });
        if best.as_ref().is_none_or(|b| v < *b) {
            best = Some(v);
        }
    }
    Ok(best.expect("at least one strategy"))
}

/// Sets of correlator points as sorted coordinate arrays, for comparisons.
pub fn as_sorted_set(points: &[SymmetricCorrelators]) -> Vec<[i64; 5]> {
    let mut v: Vec<[i64; 5]> = points.iter().map(|p| p.as_array()).collect();
    v.sort();
    v.dedup();
    v
}

pub fn boundary_image(n: u64) -> Vec<[i64; 5]> {
    let pts: Vec<SymmetricCorrelators> = polytope::enumerate_boundary_tuples(n)
        .iter()
        .map(polytope::phi)
        .collect();
    as_sorted_set(&pts)
}

/// Expectation of a dense real operator on a real state.
pub fn dense_expectation(m: &DMatrix<f64>, psi: &[f64]) -> f64 {
    let v = DVector::from_column_slice(psi);
    v.dot(&(m * &v))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::polytope::StrategyTuple;

    /// Explicit tensor products, for checking the selection rules.
    fn kron_sum(n: u32, a: [[f64; 2]; 2], b: Option<[[f64; 2]; 2]>) -> DMatrix<f64> {
        let site = |op: [[f64; 2]; 2], s: u32| {
            let mut m = DMatrix::<f64>::identity(1, 1);
            for q in (0..n).rev() {
                let f = if q == s {
                    DMatrix::from_fn(2, 2, |i, j| op[i][j])
                } else {
                    DMatrix::identity(2, 2)
                };
                m = m.kronecker(&f);
            }
            m
        };
        let dim = 1 << n;
        let mut out = DMatrix::zeros(dim, dim);
        for s in 0..n {
            match b {
                None => out += site(a, s),
                Some(b) => {
                    for t in 0..n {
                        if s != t {
                            out += site(a, s) * site(b, t);
                        }
                    }
                }
            }
        }
        out
    }

    const X: [[f64; 2]; 2] = [[0.0, 1.0], [1.0, 0.0]];
    const Z: [[f64; 2]; 2] = [[1.0, 0.0], [0.0, -1.0]];
    // σ_y = i·Y with Y real
    const Y: [[f64; 2]; 2] = [[0.0, -1.0], [1.0, 0.0]];

    #[test]
    fn selection_rules_match_tensor_products() {
        for n in 1..=5u32 {
            let checks: Vec<(Collective, DMatrix<f64>)> = vec![
                (Collective::Sx, kron_sum(n, X, None)),
                (Collective::Sz, kron_sum(n, Z, None)),
                (Collective::Sy, kron_sum(n, Y, None)),
                (Collective::Sxx, kron_sum(n, X, Some(X))),
                (Collective::Szz, kron_sum(n, Z, Some(Z))),
                (Collective::Sxz, kron_sum(n, X, Some(Z))),
                // Σ σ_yσ_y = -Σ YY, Σ σ_xσ_y = i Σ XY, Σ σ_yσ_z = i Σ YZ
                (Collective::Syy, -kron_sum(n, Y, Some(Y))),
                (Collective::Sxy, kron_sum(n, X, Some(Y))),
                (Collective::Syz, kron_sum(n, Y, Some(Z))),
            ];
            for (which, expected) in checks {
                let got = dense_collective(n, which).unwrap().to_dense().unwrap();
                assert!((got - expected).abs().max() < 1e-14, "n={n} {which:?}");
            }
        }
    }

    #[test]
    fn small_examples() {
        let sz = dense_collective(1, Collective::Sz).unwrap().to_dense().unwrap();
        assert_eq!(sz, DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, -1.0]));
        let sxx = dense_collective(2, Collective::Sxx).unwrap().to_dense().unwrap();
        for i in 0..4 {
            for j in 0..4 {
                assert_eq!(sxx[(i, j)], if i ^ j == 3 { 2.0 } else { 0.0 });
            }
        }
        let mut ev: Vec<f64> = dense_collective(3, Collective::Sz)
            .unwrap()
            .to_dense()
            .unwrap()
            .diagonal()
            .iter()
            .copied()
            .collect();
        ev.sort_by(|a, b| b.total_cmp(a));
        assert_eq!(ev, vec![3.0, 1.0, 1.0, 1.0, -1.0, -1.0, -1.0, -3.0]);
        assert!(matches!(
            dense_collective(15, Collective::Sx),
            Err(OracleError::TooLarge { .. })
        ));
    }

    #[test]
    fn hermiticity() {
        for w in Collective::ALL {
            assert!(dense_collective(6, w).unwrap().hermiticity_defect() < 1e-14, "{w:?}");
        }
    }

    #[test]
    fn site_and_collective_constructions_agree() {
        let ineq = BellInequality::from_integers(5, [100, 2, -3, 4, 1, -2]);
        let m = MeasurementPair::new(0.7, -2.3);
        let a = dense_bell_operator(&ineq, m).unwrap();
        let b = dense_bell_from_collective(&ineq, m).unwrap();
        assert!((a - b).abs().max() < 1e-11);
    }

    #[test]
    fn zero_inequality_is_zero_operator() {
        let z = dense_bell_operator(&BellInequality::zero(4), MeasurementPair::new(0.3, 1.0)).unwrap();
        assert_eq!(z.abs().max(), 0.0);
    }

    #[test]
    fn block_basis_is_orthonormal() {
        for (n, tj) in [(4u32, 2u32), (5, 1), (6, 0)] {
            let b = block_basis(n, tj);
            for (i, u) in b.iter().enumerate() {
                for (j, v) in b.iter().enumerate() {
                    let d: f64 = u.iter().zip(v).map(|(x, y)| x * y).sum();
                    assert!((d - if i == j { 1.0 } else { 0.0 }).abs() < 1e-14);
                }
            }
        }
    }

    #[test]
    fn projection_matches_blocks() {
        for n in 2..=7u64 {
            let ineq = BellInequality::example(n);
            let d = block_projection_check(
                &ineq,
                MeasurementPair::new(std::f64::consts::PI / 6.0, 5.0 * std::f64::consts::PI / 6.0),
            )
            .unwrap();
            assert!(d < 1e-10, "n={n}: {d}");
        }
    }

    #[test]
    fn spectrum_matches_blocks_small() {
        let ineq = BellInequality::from_integers(6, [50, 1, -1, 2, -1, 3]);
        assert!(spectrum_check(&ineq, MeasurementPair::new(1.1, 0.2)).unwrap() < 1e-9);
    }

    #[test]
    fn hull_small() {
        assert_eq!(hull_extreme_points(2).unwrap().len(), 10);
        assert_eq!(hull_extreme_points(3).unwrap().len(), 20);
        let interior = polytope::phi(&StrategyTuple { a: 1, b: 1, c: 1, d: 1 });
        assert!(!as_sorted_set(&hull_extreme_points(4).unwrap()).contains(&interior.as_array()));
        assert!(hull_extreme_points(9).is_err());
    }

    #[test]
    fn exhaustive_agrees_with_tuples() {
        for n in 1..=6u64 {
            let ineq = BellInequality::example(n);
            assert_eq!(exhaustive_strategy_minimum(&ineq).unwrap(), all_tuples_minimum(&ineq));
        }
    }

    #[test]
    fn dense_half_dicke_moments() {
        let n = 6;
        let m = dense_spin_moments(n, &dicke_vector(n, n / 2)).unwrap();
        let nf = n as f64;
        let expected = [0.0, 0.0, 0.0, nf * (nf + 2.0) / 8.0, nf * (nf + 2.0) / 16.0];
        for (a, b) in m.iter().zip(expected) {
            assert!((a - b).abs() < 1e-12);
        }
    }
}
