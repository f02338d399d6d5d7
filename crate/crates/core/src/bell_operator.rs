//! Block structure of the Bell operator and maximal quantum violation.
//!
//! With the same pair of real qubit observables `M_k = cos θ_k σ_z + sin θ_k σ_x` at every
//! site, the Bell operator is
//! `β_c + A·Sz + A'·Sx + B/2·Szz + C/2·Sxx + D·Sxz`, where `Sz = Σ σ_z^(i)` and the
//! two-body operators sum over ordered pairs `i ≠ j`. It commutes with permutations, so
//! it splits into one pentadiagonal block per total spin `J` on the basis
//! `|D_{2J}^k⟩ ⊗ |ψ⁻⟩^{⊗ m/2}`, `m = n - 2J`.

use std::f64::consts::PI;
use std::fmt;

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::eigen::{self, EigenError, EigenOptions, Pentadiagonal};
use crate::inequalities::{BellInequality, Coefficients, InequalityRecord};
use crate::optimize;
use crate::par::{self, ExecMode};
use crate::polytope::binomial;
use crate::states::SymmetricState;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum BellError {
    #[error("invalid spin label 2J={two_j} for n={n}: need 2J ≡ n (mod 2) and 0 ≤ 2J ≤ n")]
    BadSpinLabel { n: u64, two_j: u64 },
    #[error("no real tridiagonalising angle: δ² - γε = {discriminant} < 0")]
    NoRealSolution { discriminant: f64 },
    #[error("degenerate measurements: |sin(θ - φ)| = {sin:e} makes M0 = ±M1")]
    DegenerateMeasurements { sin: f64 },
    #[error("γ = 0: the tridiagonalising condition does not fix θ")]
    ZeroGamma,
    #[error("grid needs at least 8 points, got {0}")]
    GridTooSmall(usize),
    #[error(transparent)]
    Eigen(#[from] EigenError),
}

/// Twice the spin label, so half-integer `J` stays exact.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct TwiceSpin(pub u64);

impl TwiceSpin {
    pub fn j(self) -> f64 {
        self.0 as f64 / 2.0
    }

    pub fn dim(self) -> usize {
        self.0 as usize + 1
    }

    /// Largest spin for `n` parties: `J = n/2`.
    pub fn symmetric(n: u64) -> Self {
        TwiceSpin(n)
    }

    /// All admissible labels for `n`, ascending.
    pub fn all(n: u64) -> Vec<TwiceSpin> {
        (n % 2..=n).step_by(2).map(TwiceSpin).collect()
    }

    pub fn validate(self, n: u64) -> Result<(), BellError> {
        if self.0 > n || !(n - self.0).is_multiple_of(2) {
            return Err(BellError::BadSpinLabel { n, two_j: self.0 });
        }
        Ok(())
    }
}

impl fmt::Display for TwiceSpin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_multiple_of(2) {
            write!(f, "{}", self.0 / 2)
        } else {
            write!(f, "{}/2", self.0)
        }
    }
}

/// The two measurement angles in the x–z plane of the Bloch sphere.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeasurementPair {
    pub phi: f64,
    pub theta: f64,
}

impl MeasurementPair {
    pub fn new(phi: f64, theta: f64) -> Self {
        MeasurementPair { phi, theta }
    }

    /// Both angles reduced to `[0, 2π)`.
    pub fn canonical(&self) -> Self {
        let r = |x: f64| x.rem_euclid(2.0 * PI);
        MeasurementPair::new(r(self.phi), r(self.theta))
    }

    pub fn shifted(&self, c: f64) -> Self {
        MeasurementPair::new(self.phi + c, self.theta + c)
    }

    pub fn kappa(&self) -> f64 {
        self.theta - self.phi
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OperatorConstants {
    pub a: f64,
    pub a_prime: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
}

pub fn constants_from(q: &Coefficients, m: MeasurementPair) -> OperatorConstants {
    let (sp, cp) = m.phi.sin_cos();
    let (st, ct) = m.theta.sin_cos();
    OperatorConstants {
        a: q.alpha * cp + q.beta * ct,
        a_prime: q.alpha * sp + q.beta * st,
        b: q.gamma * cp * cp + 2.0 * q.delta * cp * ct + q.epsilon * ct * ct,
        c: q.gamma * sp * sp + 2.0 * q.delta * sp * st + q.epsilon * st * st,
        d: q.gamma * cp * sp + q.delta * (cp * st + ct * sp) + q.epsilon * ct * st,
    }
}

pub fn block_constants(ineq: &BellInequality, m: MeasurementPair) -> OperatorConstants {
    constants_from(&ineq.coefficients(), m)
}

/// One Schur–Weyl block as a banded matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BellBlock {
    pub n: u64,
    pub two_j: TwiceSpin,
    /// Number of parties in singlets, `n - 2J`.
    pub m: u64,
    pub d: Vec<f64>,
    pub u: Vec<f64>,
    pub v: Vec<f64>,
}

impl BellBlock {
    pub fn matrix(&self) -> Pentadiagonal<'_> {
        Pentadiagonal {
            d: &self.d,
            u: &self.u,
            v: &self.v,
        }
    }

    pub fn size(&self) -> usize {
        self.d.len()
    }

    pub fn is_symmetric_block(&self) -> bool {
        self.m == 0
    }
}

/// Diagonal entry `d_k` of block `2J`.
pub fn diagonal_entry(beta_c: f64, k: &OperatorConstants, n: u64, two_j: u64, idx: u64) -> f64 {
    let (nn, tj, kk) = (n as f64, two_j as f64, idx as f64);
    let m = nn - tj;
    let z = tj - 2.0 * kk;
    beta_c + z * k.a + (z * z - nn) * k.b / 2.0 + (2.0 * kk * (tj - kk) - m) * k.c / 2.0
}

pub fn build_block_from(beta_c: f64, k: &OperatorConstants, n: u64, two_j: TwiceSpin) -> BellBlock {
    let tj = two_j.0;
    let size = tj as usize + 1;
    let tjf = tj as f64;
    let d = (0..=tj).map(|i| diagonal_entry(beta_c, k, n, tj, i)).collect();
    let u = (0..size.saturating_sub(1))
        .map(|i| {
            let i = i as f64;
            (k.a_prime + (tjf - 1.0 - 2.0 * i) * k.d) * ((tjf - i) * (i + 1.0)).sqrt()
        })
        .collect();
    let v = (0..size.saturating_sub(2))
        .map(|i| {
            let i = i as f64;
            k.c * ((tjf - i) * (tjf - i - 1.0) * (i + 1.0) * (i + 2.0)).sqrt() / 2.0
        })
        .collect();
    BellBlock {
        n,
        two_j,
        m: n - tj,
        d,
        u,
        v,
    }
}

pub fn build_block(ineq: &BellInequality, m: MeasurementPair, two_j: TwiceSpin) -> Result<BellBlock, BellError> {
    two_j.validate(ineq.n)?;
    let q = ineq.coefficients();
    Ok(build_block_from(q.beta_c, &constants_from(&q, m), ineq.n, two_j))
}

/// Smallest eigenvalue of a block with a unit eigenvector.
pub fn min_eigenvalue(b: &BellBlock) -> Result<(f64, Vec<f64>), BellError> {
    Ok(eigen::min_eigenpair(&b.matrix())?)
}

pub fn min_eigenvalue_with(b: &BellBlock, opts: &EigenOptions) -> Result<(f64, Vec<f64>), BellError> {
    Ok(eigen::min_eigenpair_with(&b.matrix(), opts)?)
}

/// Which blocks enter the minimisation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BlockSet {
    #[default]
    SymmetricOnly,
    All,
}

impl BlockSet {
    pub fn labels(self, n: u64) -> Vec<TwiceSpin> {
        match self {
            BlockSet::SymmetricOnly => vec![TwiceSpin::symmetric(n)],
            BlockSet::All => TwiceSpin::all(n),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ViolationOptions {
    pub blocks: BlockSet,
    pub grid_points: usize,
    /// Golden-section tolerance on `θ - φ`.
    pub refine_tol: f64,
    pub mode: ExecMode,
}

impl Default for ViolationOptions {
    fn default() -> Self {
        ViolationOptions {
            blocks: BlockSet::SymmetricOnly,
            grid_points: 720,
            refine_tol: 1e-8,
            mode: ExecMode::default(),
        }
    }
}

/// Result of the violation search.
#[derive(Debug, Clone, PartialEq)]
pub struct Violation {
    pub n: u64,
    /// Minimal expectation value of the Bell operator; negative means violation.
    pub value: f64,
    pub beta_c: f64,
    pub measurements: MeasurementPair,
    pub two_j: TwiceSpin,
    /// Optimal state when it lies in the symmetric block.
    pub state: Option<SymmetricState>,
}

impl Violation {
    pub fn ratio(&self) -> f64 {
        self.value / self.beta_c
    }

    pub fn violated(&self) -> bool {
        self.value < 0.0
    }

    pub fn report(&self, ineq: &BellInequality, with_state: bool) -> ViolationReport {
        ViolationReport {
            n: self.n,
            ineq: ineq.clone().into(),
            value: self.value,
            ratio: self.ratio(),
            phi: self.measurements.phi,
            theta: self.measurements.theta,
            j: self.two_j.to_string(),
            state_coefficients: if with_state {
                self.state.as_ref().map(|s| {
                    s.coeffs
                        .iter()
                        .map(|&c| if c.abs() < 1e-14 { 0.0 } else { c })
                        .collect()
                })
            } else {
                None
            },
        }
    }
}

/// Serialised violation result.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ViolationReport {
    pub n: u64,
    pub ineq: InequalityRecord,
    pub value: f64,
    pub ratio: f64,
    pub phi: f64,
    pub theta: f64,
    #[serde(rename = "J")]
    pub j: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub state_coefficients: Option<Vec<f64>>,
}

const DEGENERATE_SIN: f64 = 1e-9;

/// Minimum over the requested blocks of the smallest eigenvalue at `φ = 0, θ = κ`.
fn objective(q: &Coefficients, n: u64, labels: &[TwiceSpin], kappa: f64) -> Result<(f64, TwiceSpin), BellError> {
    let k = constants_from(q, MeasurementPair::new(0.0, kappa));
    let mut best = (f64::INFINITY, labels[0]);
    for &label in labels {
        let block = build_block_from(q.beta_c, &k, n, label);
        let value = eigen::min_eigenvalue(&block.matrix())?;
        if value < best.0 {
            best = (value, label);
        }
    }
    Ok(best)
}

/// Scans `θ - φ` with `φ = 0` and refines the best grid point by golden section.
///
/// Only `θ - φ` matters for the spectrum, so one angle suffices. A nonnegative result
/// means no violation was found with identical measurements at every site.
pub fn max_quantum_violation(ineq: &BellInequality, opts: &ViolationOptions) -> Result<Violation, BellError> {
    if opts.grid_points < 8 {
        return Err(BellError::GridTooSmall(opts.grid_points));
    }
    let q = ineq.coefficients();
    let n = ineq.n;
    let labels = opts.blocks.labels(n);
    let g = opts.grid_points;
    let step = 2.0 * PI / g as f64;
    let grid: Vec<Result<Option<(f64, TwiceSpin)>, BellError>> = par::map_range(opts.mode, g - 1, |i| {
        let kappa = step * (i + 1) as f64;
        if kappa.sin().abs() < DEGENERATE_SIN {
            return Ok(None);
        }
        objective(&q, n, &labels, kappa).map(Some)
    });
    let mut best: Option<(usize, f64)> = None;
    for (i, r) in grid.into_iter().enumerate() {
        if let Some((value, _)) = r? {
            if best.is_none_or(|(_, b)| value < b) {
                best = Some((i, value));
            }
        }
    }
    let (i, _) = best.expect("grid has nondegenerate points");
    let center = step * (i + 1) as f64;
    let eval = |kappa: f64| {
        if kappa.sin().abs() < DEGENERATE_SIN {
            return f64::INFINITY;
        }
        objective(&q, n, &labels, kappa).map(|v| v.0).unwrap_or(f64::INFINITY)
    };
    let (kappa, _) = optimize::golden_section(eval, center - step, center + step, opts.refine_tol);
    let (_, two_j) = objective(&q, n, &labels, kappa)?;
    let m = MeasurementPair::new(0.0, kappa).canonical();
    let block = build_block_from(q.beta_c, &constants_from(&q, m), n, two_j);
    let (value, vector) = min_eigenvalue(&block)?;
    let state = block
        .is_symmetric_block()
        .then(|| SymmetricState::from_coeffs(n, vector));
    Ok(Violation {
        n,
        value,
        beta_c: q.beta_c,
        measurements: m,
        two_j,
        state,
    })
}

/// Angles `θ` that make `C = 0` (so every block is tridiagonal) for a given `κ = θ - φ`:
/// `tan θ = γ sin κ / (γ cos κ + δ ± √(δ² - γε))`. Each root is also a root after `θ → θ + π`.
pub fn tridiagonal_angles(ineq: &BellInequality, kappa: f64) -> Result<Vec<f64>, BellError> {
    tridiagonal_angles_from(&ineq.coefficients(), kappa)
}

pub fn tridiagonal_angles_from(q: &Coefficients, kappa: f64) -> Result<Vec<f64>, BellError> {
    let disc = q.delta * q.delta - q.gamma * q.epsilon;
    if disc < 0.0 {
        return Err(BellError::NoRealSolution { discriminant: disc });
    }
    if q.gamma == 0.0 {
        return Err(BellError::ZeroGamma);
    }
    let (s, c) = kappa.sin_cos();
    if s.abs() < DEGENERATE_SIN {
        return Err(BellError::DegenerateMeasurements { sin: s.abs() });
    }
    let root = disc.sqrt();
    let mut out = vec![(q.gamma * s).atan2(q.gamma * c + q.delta + root)];
    if root > 0.0 {
        out.push((q.gamma * s).atan2(q.gamma * c + q.delta - root));
    }
    Ok(out)
}

/// Largest difference between the sorted spectra of all blocks at `m` and at `m + c`.
pub fn spectrum_shift_check(ineq: &BellInequality, c: f64, m: MeasurementPair) -> Result<f64, BellError> {
    let mut worst = 0.0f64;
    for label in TwiceSpin::all(ineq.n) {
        let a = eigen::dense_eigenvalues(&build_block(ineq, m, label)?.matrix());
        let b = eigen::dense_eigenvalues(&build_block(ineq, m.shifted(c), label)?.matrix());
        for (x, y) in a.iter().zip(&b) {
            worst = worst.max((x - y).abs());
        }
    }
    Ok(worst)
}

/// Every eigenvalue of the full `2^n` operator, repeated by block multiplicity, ascending.
pub fn full_spectrum(ineq: &BellInequality, m: MeasurementPair) -> Result<Vec<f64>, BellError> {
    let mut out = Vec::new();
    for dims in schur_weyl_dimensions(ineq.n) {
        let ev = eigen::dense_eigenvalues(&build_block(ineq, m, dims.two_j)?.matrix());
        let mult = dims.multiplicity.to_usize().expect("multiplicity fits in memory");
        for _ in 0..mult {
            out.extend_from_slice(&ev);
        }
    }
    out.sort_by(f64::total_cmp);
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SchurWeylBlock {
    pub two_j: TwiceSpin,
    pub block_dim: u64,
    pub multiplicity: BigUint,
}

/// Spin labels, block sizes `2J + 1` and multiplicities
/// `C(n, n/2 - J) - C(n, n/2 - J - 1)`; the total dimension is `2^n`.
pub fn schur_weyl_dimensions(n: u64) -> Vec<SchurWeylBlock> {
    let nb = BigUint::from(n);
    TwiceSpin::all(n)
        .into_iter()
        .map(|tj| {
            let lower = (n - tj.0) / 2;
            let multiplicity = if lower == 0 {
                BigUint::one()
            } else {
                binomial(&nb, lower) - binomial(&nb, lower - 1)
            };
            SchurWeylBlock {
                two_j: tj,
                block_dim: tj.0 + 1,
                multiplicity,
            }
        })
        .collect()
}

/// `Σ (2J + 1) · multiplicity`.
pub fn total_dimension(blocks: &[SchurWeylBlock]) -> BigUint {
    blocks.iter().fold(BigUint::zero(), |acc, b| {
        acc + BigUint::from(b.block_dim) * &b.multiplicity
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::inequalities::{generate_class, ClassParams, Sign};

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * (1.0 + a.abs().max(b.abs()))
    }

    #[test]
    fn constants_of_example() {
        let ex = BellInequality::example(10);
        for theta in [0.3, 1.1, 2.5] {
            let k = block_constants(&ex, MeasurementPair::new(PI - theta, theta));
            assert!(close(k.a, 2.0 * theta.cos(), 1e-14));
            assert!(close(k.a_prime, -2.0 * theta.sin(), 1e-14));
            assert!(close(k.b, 4.0 * theta.cos().powi(2), 1e-14));
            assert!(k.c.abs() < 1e-14 && k.d.abs() < 1e-14);
        }
        let k = block_constants(&ex, MeasurementPair::new(PI / 6.0, 5.0 * PI / 6.0));
        assert!(close(k.a, -(3f64.sqrt()), 1e-14), "{k:?}");
        let swapped = block_constants(&ex, MeasurementPair::new(5.0 * PI / 6.0, PI / 6.0));
        assert!(close(swapped.a, 3f64.sqrt(), 1e-14) && close(swapped.a_prime, -1.0, 1e-14));
        assert!(close(k.a_prime, -1.0, 1e-14));
        assert!(close(k.b, 3.0, 1e-14));
        assert!(k.c.abs() < 1e-14 && k.d.abs() < 1e-14);
        let z = block_constants(&BellInequality::zero(3), MeasurementPair::new(0.4, 1.9));
        assert_eq!(
            z,
            OperatorConstants {
                a: 0.0,
                a_prime: 0.0,
                b: 0.0,
                c: 0.0,
                d: 0.0
            }
        );
    }

    #[test]
    fn b_plus_c_identity() {
        let q = BellInequality::from_integers(5, [0, 3, -2, 7, -4, 5]);
        for (phi, theta) in [(0.1, 2.0), (-1.3, 0.4), (3.0, 3.5)] {
            let k = block_constants(&q, MeasurementPair::new(phi, theta));
            assert!(close(k.b + k.c, 7.0 + 5.0 - 8.0 * (phi - theta).cos(), 1e-13));
        }
    }

    #[test]
    fn symmetric_block_of_example_matches_closed_form() {
        let n = 9u64;
        let ex = BellInequality::example(n);
        let theta: f64 = 2.3;
        let b = build_block(&ex, MeasurementPair::new(PI - theta, theta), TwiceSpin(n)).unwrap();
        let (c, s, nf) = (theta.cos(), theta.sin(), n as f64);
        for (k, dk) in b.d.iter().enumerate() {
            let kf = k as f64;
            let expected =
                2.0 * nf * (1.0 + c + (nf - 1.0) * c * c) - 4.0 * c * (1.0 + 2.0 * nf * c) * kf + 8.0 * kf * kf * c * c;
            assert!(close(*dk, expected, 1e-12), "k={k}");
        }
        for (k, uk) in b.u.iter().enumerate() {
            let kf = k as f64;
            assert!(close(*uk, -2.0 * s * ((nf - kf) * (kf + 1.0)).sqrt(), 1e-12));
        }
        assert!(b.v.iter().all(|x| x.abs() < 1e-12));
    }

    #[test]
    fn bad_spin_label() {
        let ex = BellInequality::example(4);
        let m = MeasurementPair::new(0.0, 1.0);
        assert!(matches!(
            build_block(&ex, m, TwiceSpin(3)),
            Err(BellError::BadSpinLabel { .. })
        ));
        assert!(matches!(
            build_block(&ex, m, TwiceSpin(6)),
            Err(BellError::BadSpinLabel { .. })
        ));
        assert_eq!(build_block(&ex, m, TwiceSpin(2)).unwrap().size(), 3);
    }

    #[test]
    fn zero_inequality_blocks_vanish() {
        let b = build_block(&BellInequality::zero(6), MeasurementPair::new(0.2, 0.9), TwiceSpin(4)).unwrap();
        assert!(b.d.iter().chain(&b.u).chain(&b.v).all(|x| *x == 0.0));
    }

    #[test]
    fn schur_weyl_examples() {
        let four = schur_weyl_dimensions(4);
        let triples: Vec<(u64, u64, u64)> = four
            .iter()
            .map(|b| (b.two_j.0, b.block_dim, b.multiplicity.to_u64().unwrap()))
            .collect();
        assert_eq!(triples, vec![(0, 1, 2), (2, 3, 3), (4, 5, 1)]);
        let two = schur_weyl_dimensions(2);
        assert_eq!(two.len(), 2);
        assert_eq!(total_dimension(&two), BigUint::from(4u32));
        for n in 1..=40u64 {
            assert_eq!(total_dimension(&schur_weyl_dimensions(n)), BigUint::one() << n);
        }
    }

    #[test]
    fn tridiagonal_angles_cases() {
        let ex = BellInequality::example(8);
        for kappa in [0.5, 1.7, 2.9, -2.0] {
            let thetas = tridiagonal_angles(&ex, kappa).unwrap();
            assert_eq!(thetas.len(), 1);
            for theta in thetas {
                for t in [theta, theta + PI] {
                    let k = block_constants(&ex, MeasurementPair::new(t - kappa, t));
                    assert!(k.c.abs() < 1e-12, "kappa={kappa}: C={}", k.c);
                }
            }
        }
        let bad = BellInequality::from_integers(4, [0, 0, 0, 1, 0, 1]);
        assert!(matches!(
            tridiagonal_angles(&bad, 1.0),
            Err(BellError::NoRealSolution { .. })
        ));
        assert!(matches!(
            tridiagonal_angles(&ex, PI),
            Err(BellError::DegenerateMeasurements { .. })
        ));
        let p = ClassParams {
            x: 2,
            y: 3,
            mu: 1,
            sigma: Sign::Plus,
            branch: Sign::Plus,
        };
        let q = generate_class(p, 10).unwrap();
        let thetas = tridiagonal_angles(&q, 1.2).unwrap();
        assert_eq!(thetas.len(), 1);
        let k = block_constants(&q, MeasurementPair::new(thetas[0] - 1.2, thetas[0]));
        assert!(k.c.abs() < 1e-12);
        // two distinct roots when δ² > γε
        let two = BellInequality::from_integers(4, [0, 0, 0, 1, 3, 2]);
        let roots = tridiagonal_angles(&two, 0.8).unwrap();
        assert_eq!(roots.len(), 2);
        for t in roots {
            assert!(block_constants(&two, MeasurementPair::new(t - 0.8, t)).c.abs() < 1e-12);
        }
    }

    #[test]
    fn shift_invariance() {
        let ex = BellInequality::example(8);
        let m = MeasurementPair::new(0.3, 2.2);
        assert_eq!(spectrum_shift_check(&ex, 0.0, m).unwrap(), 0.0);
        assert!(spectrum_shift_check(&ex, 0.7, m).unwrap() <= 1e-9);
        let r = BellInequality::from_integers(6, [0, 3, -1, 2, 5, -3]);
        assert!(spectrum_shift_check(&r, PI / 3.0, MeasurementPair::new(1.0, -0.4)).unwrap() <= 1e-9);
    }

    #[test]
    fn example_violation_small_n() {
        let ex = BellInequality::example(10);
        let v = max_quantum_violation(&ex, &ViolationOptions::default()).unwrap();
        assert!(v.value < 0.0);
        assert_eq!(v.two_j, TwiceSpin(10));
        let state = v.state.as_ref().unwrap();
        assert!((state.norm() - 1.0).abs() < 1e-12);
        let all = max_quantum_violation(
            &ex,
            &ViolationOptions {
                blocks: BlockSet::All,
                ..Default::default()
            },
        )
        .unwrap();
        assert!(all.value <= v.value + 1e-9);
    }

    #[test]
    fn sequential_and_parallel_agree() {
        let ex = BellInequality::example(30);
        let mk = |mode| ViolationOptions {
            mode,
            ..Default::default()
        };
        let a = max_quantum_violation(&ex, &mk(ExecMode::Parallel)).unwrap();
        let b = max_quantum_violation(&ex, &mk(ExecMode::Sequential)).unwrap();
        assert_eq!(a.value, b.value);
        assert_eq!(a.measurements, b.measurements);
    }

    #[test]
    fn twice_spin_display() {
        assert_eq!(TwiceSpin(4).to_string(), "2");
        assert_eq!(TwiceSpin(5).to_string(), "5/2");
        assert_eq!(TwiceSpin::all(5), vec![TwiceSpin(1), TwiceSpin(3), TwiceSpin(5)]);
    }
}
