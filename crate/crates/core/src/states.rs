//! Symmetric states in the Dicke basis and their Bell-operator expectations.
//!
//! `|D_n^k⟩` is the uniform superposition of computational states with `k` ones; with
//! `σ_z|0⟩ = |0⟩` its collective magnetisation is `Sz = n/2 - k`.

use std::f64::consts::PI;

use nalgebra::Matrix4;
use num_bigint::BigInt;
use num_bigint::BigUint;
use num_rational::BigRational;
use serde::{Deserialize, Serialize};

use crate::bell_operator::{
    self, constants_from, diagonal_entry, BellBlock, BellError, MeasurementPair, OperatorConstants, TwiceSpin,
};
use crate::inequalities::{self, BellInequality, Coefficients};
use crate::optimize;
use crate::par::{self, ExecMode};
use crate::polytope::binomial;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum StateError {
    #[error("{what} out of range: {detail}")]
    OutOfRange { what: &'static str, detail: String },
    #[error("state has {state} coefficients but the block has size {block}")]
    DimensionMismatch { state: usize, block: usize },
    #[error("outside the closed-form regime: C1 = {c1}, C2 = {c2}")]
    OutOfRegime { c1: f64, c2: f64 },
    #[error("B = 0 at the tridiagonal angle")]
    DivisionByZero,
    #[error(transparent)]
    Bell(#[from] BellError),
}

/// Real amplitudes over `|D_n^0⟩, …, |D_n^n⟩`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SymmetricState {
    pub n: u64,
    pub coeffs: Vec<f64>,
}

impl SymmetricState {
    pub fn from_coeffs(n: u64, coeffs: Vec<f64>) -> Self {
        assert_eq!(coeffs.len() as u64, n + 1, "need n + 1 coefficients");
        SymmetricState { n, coeffs }
    }

    pub fn norm(&self) -> f64 {
        self.coeffs.iter().map(|c| c * c).sum::<f64>().sqrt()
    }

    pub fn normalized(mut self) -> Self {
        let norm = self.norm();
        if norm > 0.0 {
            self.coeffs.iter_mut().for_each(|c| *c /= norm);
        }
        self
    }

    /// `|⟨a|b⟩|²`.
    pub fn fidelity(&self, other: &SymmetricState) -> f64 {
        let overlap: f64 = self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a * b).sum();
        overlap * overlap
    }

    /// `(cz·Sz + cx·Sx)|ψ⟩` with collective spin `S = ½ Σ σ`.
    pub fn apply_spin(&self, cz: f64, cx: f64) -> Vec<f64> {
        let n = self.n as f64;
        let c = &self.coeffs;
        let len = c.len();
        (0..len)
            .map(|k| {
                let kf = k as f64;
                let mut acc = cz * (n / 2.0 - kf) * c[k];
                if k + 1 < len {
                    acc += cx * 0.5 * ((n - kf) * (kf + 1.0)).sqrt() * c[k + 1];
                }
                if k >= 1 {
                    acc += cx * 0.5 * ((n - kf + 1.0) * kf).sqrt() * c[k - 1];
                }
                acc
            })
            .collect()
    }

    /// `(⟨T⟩, ⟨T²⟩)` for `T = cz·Sz + cx·Sx`.
    pub fn spin_moments(&self, cz: f64, cx: f64) -> (f64, f64) {
        let t = self.apply_spin(cz, cx);
        let first = t.iter().zip(&self.coeffs).map(|(a, b)| a * b).sum();
        let second = t.iter().map(|a| a * a).sum();
        (first, second)
    }

    /// Mean and variance of the excitation number `k` under `|c_k|²`.
    pub fn excitation_moments(&self) -> (f64, f64) {
        let weight: f64 = self.coeffs.iter().map(|c| c * c).sum();
        let mean = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(k, c)| k as f64 * c * c)
            .sum::<f64>()
            / weight;
        let var = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(k, c)| (k as f64 - mean).powi(2) * c * c)
            .sum::<f64>()
            / weight;
        (mean, var)
    }
}

pub fn dicke_state(n: u64, k: u64) -> Result<SymmetricState, StateError> {
    if k > n {
        return Err(StateError::OutOfRange {
            what: "k",
            detail: format!("need 0 <= k <= n, got n={n}, k={k}"),
        });
    }
    let mut coeffs = vec![0.0; n as usize + 1];
    coeffs[k as usize] = 1.0;
    Ok(SymmetricState { n, coeffs })
}

/// Centre `μ` and variance parameter `σ` of a Gaussian superposition of Dicke states.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaussianParams {
    pub mu: f64,
    pub sigma: f64,
}

impl GaussianParams {
    /// `μ = n/2 + A/(2B - C)`, the minimum of the diagonal `d_k`.
    pub fn centered(n: u64, k: &OperatorConstants, sigma: f64) -> Self {
        GaussianParams {
            mu: n as f64 / 2.0 + k.a / (2.0 * k.b - k.c),
            sigma,
        }
    }

    /// The asymptotic window is only loosely specified; we warn outside `(0.1, n/2)`.
    pub fn in_window(&self, n: u64) -> bool {
        self.sigma > 0.1 && self.sigma < n as f64 / 2.0
    }

    /// Moment-matching fit: `μ` and `σ` are the mean and variance of `|c_k|²`.
    pub fn fit(state: &SymmetricState) -> Self {
        let (mu, sigma) = state.excitation_moments();
        GaussianParams { mu, sigma }
    }
}

/// `ψ_k ∝ exp(-(k-μ)²/4σ)`, renormalised exactly.
pub fn gaussian_state(n: u64, g: GaussianParams) -> SymmetricState {
    if !g.in_window(n) {
        log::warn!(
            "sigma = {} outside the asymptotic window (0.1, n/2) for n = {n}",
            g.sigma
        );
    }
    let scale = (2.0 * PI * g.sigma).powf(-0.25);
    let coeffs = (0..=n)
        .map(|k| scale * (-(k as f64 - g.mu).powi(2) / (4.0 * g.sigma)).exp())
        .collect();
    SymmetricState { n, coeffs }.normalized()
}

/// `Σ c_k² d_k + 2 Σ c_k c_{k+1} u_k + 2 Σ c_k c_{k+2} v_k`.
pub fn expectation(s: &SymmetricState, b: &BellBlock) -> Result<f64, StateError> {
    if s.coeffs.len() != b.size() {
        return Err(StateError::DimensionMismatch {
            state: s.coeffs.len(),
            block: b.size(),
        });
    }
    let c = &s.coeffs;
    let diag: f64 = c.iter().zip(&b.d).map(|(x, d)| x * x * d).sum();
    let first: f64 = b.u.iter().enumerate().map(|(k, u)| c[k] * c[k + 1] * u).sum();
    let second: f64 = b.v.iter().enumerate().map(|(k, v)| c[k] * c[k + 2] * v).sum();
    Ok(diag + 2.0 * first + 2.0 * second)
}

/// Expectation on the symmetric block at the given measurements.
pub fn symmetric_expectation(ineq: &BellInequality, m: MeasurementPair, s: &SymmetricState) -> Result<f64, StateError> {
    let block = bell_operator::build_block(ineq, m, TwiceSpin::symmetric(ineq.n))?;
    expectation(s, &block)
}

/// Asymptotic expectation of the Gaussian state at a tridiagonal angle pair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AnalyticViolation {
    pub value: f64,
    /// Coefficient of `n`.
    pub leading: f64,
    /// `n`-independent bracket.
    pub constant: f64,
    pub measurements: MeasurementPair,
    pub params: GaussianParams,
}

fn analytic_terms(q: &Coefficients, n: u64, sigma: f64, m: MeasurementPair) -> Option<(f64, f64)> {
    let k = constants_from(q, m);
    if k.b.abs() < 1e-300 {
        return None;
    }
    let damp = (-1.0 / (8.0 * sigma)).exp() * (k.a_prime - k.a * k.d / k.b);
    let leading = q.beta_c / n as f64 - k.b / 2.0 + damp;
    let constant = 2.0 * k.b * sigma - k.a * k.a / (2.0 * k.b) + damp;
    Some((leading, constant))
}

/// Tridiagonal angle pairs for `κ`, with both `θ` and `θ + π`.
fn tridiagonal_pairs(q: &Coefficients, kappa: f64) -> Vec<MeasurementPair> {
    bell_operator::tridiagonal_angles_from(q, kappa)
        .map(|roots| {
            roots
                .into_iter()
                .flat_map(|t| [t, t + PI])
                .map(|t| MeasurementPair::new(t - kappa, t).canonical())
                .collect()
        })
        .unwrap_or_default()
}

/// Evaluates the asymptotic Gaussian-state expectation
/// `[β_c/n - B/2 + e^{-1/8σ}(A' - AD/B)]·n + [2Bσ - A²/2B + e^{-1/8σ}(A' - AD/B)]`
/// at the tridiagonal angle pair minimising the leading bracket.
pub fn analytic_violation(ineq: &BellInequality, sigma: f64) -> Result<AnalyticViolation, StateError> {
    let q = ineq.coefficients();
    let n = ineq.n;
    // surfaces NoRealSolution / ZeroGamma before searching
    bell_operator::tridiagonal_angles_from(&q, PI / 2.0)?;
    let leading_at = |kappa: f64| -> (f64, Option<MeasurementPair>) {
        let mut best = (f64::INFINITY, None);
        for m in tridiagonal_pairs(&q, kappa) {
            if let Some((lead, _)) = analytic_terms(&q, n, sigma, m) {
                if lead < best.0 {
                    best = (lead, Some(m));
                }
            }
        }
        best
    };
    let grid = 720;
    let step = 2.0 * PI / grid as f64;
    let mut best = (f64::INFINITY, 0.0);
    for i in 1..grid {
        let kappa = step * i as f64;
        let (lead, _) = leading_at(kappa);
        if lead < best.0 {
            best = (lead, kappa);
        }
    }
    if !best.0.is_finite() {
        return Err(StateError::DivisionByZero);
    }
    let (kappa, _) = optimize::golden_section(|x| leading_at(x).0, best.1 - step, best.1 + step, 1e-10);
    let m = leading_at(kappa).1.ok_or(StateError::DivisionByZero)?;
    let (leading, constant) = analytic_terms(&q, n, sigma, m).ok_or(StateError::DivisionByZero)?;
    let params = GaussianParams::centered(n, &constants_from(&q, m), sigma);
    Ok(AnalyticViolation {
        value: leading * n as f64 + constant,
        leading,
        constant,
        measurements: m,
        params,
    })
}

/// Gaussian state optimised over the tridiagonal angle and `σ`, with `μ` from the centring
/// rule. Returns the state, its measurements and its expectation value.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianViolation {
    pub value: f64,
    pub params: GaussianParams,
    pub measurements: MeasurementPair,
    pub state: SymmetricState,
}

pub fn optimal_gaussian_violation(ineq: &BellInequality) -> Result<GaussianViolation, StateError> {
    let q = ineq.coefficients();
    let n = ineq.n;
    let start = analytic_violation(ineq, (n as f64).sqrt().max(1.0))?;
    let start_kappa = start.measurements.kappa();
    let value_at = |kappa: f64, log_sigma: f64| -> (f64, Option<(MeasurementPair, GaussianParams)>) {
        let sigma = log_sigma.exp();
        let mut best = (f64::INFINITY, None);
        for m in tridiagonal_pairs(&q, kappa) {
            let k = constants_from(&q, m);
            let g = GaussianParams::centered(n, &k, sigma);
            if !g.mu.is_finite() {
                continue;
            }
            let block = bell_operator::build_block_from(q.beta_c, &k, n, TwiceSpin::symmetric(n));
            let state = gaussian_state_quiet(n, g);
            if let Ok(v) = expectation(&state, &block) {
                if v < best.0 {
                    best = (v, Some((m, g)));
                }
            }
        }
        best
    };
    let lo = 0.05f64.ln();
    let hi = (n as f64).ln();
    let mut seed = (f64::INFINITY, lo);
    for i in 0..=60 {
        let s = lo + (hi - lo) * i as f64 / 60.0;
        let v = value_at(start_kappa, s).0;
        if v < seed.0 {
            seed = (v, s);
        }
    }
    let (p, _) = optimize::nelder_mead_2d(
        |p| value_at(p[0], p[1]).0,
        [start_kappa, seed.1],
        0.05,
        1e-10,
        1e-15,
        4000,
    );
    let (value, found) = value_at(p[0], p[1]);
    let (measurements, params) = found.ok_or(StateError::DivisionByZero)?;
    Ok(GaussianViolation {
        value,
        params,
        measurements,
        state: gaussian_state_quiet(n, params),
    })
}

/// Minimal eigenpair of the symmetric block at a tridiagonal angle pair with the given
/// `κ = θ - φ`. Among the `C = 0` frames the one with the most negative `A'` is used, so the
/// eigenvector is the nonnegative, Gaussian-like one. `κ` and `-κ` are related by the reflection
/// `σx → -σx`, so `κ` is first folded into `[0, π]`.
pub fn tridiagonal_eigenstate(
    ineq: &BellInequality,
    kappa: f64,
) -> Result<(MeasurementPair, f64, SymmetricState), StateError> {
    let q = ineq.coefficients();
    let n = ineq.n;
    let mut kappa = kappa.rem_euclid(2.0 * PI);
    if kappa > PI {
        kappa = 2.0 * PI - kappa;
    }
    let m = tridiagonal_pairs(&q, kappa)
        .into_iter()
        .min_by(|a, b| {
            constants_from(&q, *a)
                .a_prime
                .total_cmp(&constants_from(&q, *b).a_prime)
        })
        .ok_or(StateError::DivisionByZero)?;
    let block = bell_operator::build_block_from(q.beta_c, &constants_from(&q, m), n, TwiceSpin::symmetric(n));
    let (value, vector) = bell_operator::min_eigenvalue(&block)?;
    Ok((m, value, SymmetricState::from_coeffs(n, vector)))
}

fn gaussian_state_quiet(n: u64, g: GaussianParams) -> SymmetricState {
    let coeffs = (0..=n)
        .map(|k| (-(k as f64 - g.mu).powi(2) / (4.0 * g.sigma)).exp())
        .collect();
    SymmetricState { n, coeffs }.normalized()
}

/// Reduced density matrix of `d` parties, basis `|i_0 … i_{d-1}⟩` in binary order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReducedDensity {
    pub d: u32,
    pub entries: Vec<Vec<f64>>,
}

impl ReducedDensity {
    pub fn dim(&self) -> usize {
        1 << self.d
    }

    pub fn trace(&self) -> f64 {
        (0..self.dim()).map(|i| self.entries[i][i]).sum()
    }

    pub fn max_asymmetry(&self) -> f64 {
        let n = self.dim();
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in 0..n {
                worst = worst.max((self.entries[i][j] - self.entries[j][i]).abs());
            }
        }
        worst
    }

    pub fn min_eigenvalue(&self) -> f64 {
        let n = self.dim();
        let m = nalgebra::DMatrix::from_fn(n, n, |i, j| self.entries[i][j]);
        crate::eigen::sorted_eigenvalues(m)[0]
    }

    pub fn max_abs_difference(&self, other: &ReducedDensity) -> f64 {
        self.entries
            .iter()
            .flatten()
            .zip(other.entries.iter().flatten())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    pub fn as_matrix4(&self) -> Option<Matrix4<f64>> {
        (self.d == 2).then(|| Matrix4::from_fn(|i, j| self.entries[i][j]))
    }
}

/// Numerator and denominator of the diagonal factor `f(n, k, d, w, w)` as a product of
/// ratios, where `k` counts excitations among the traced-out parties.
fn f_parts(n: u64, d: u32, w: u32, k: u64) -> (u128, u128) {
    let (n, k) = (n as u128, k as u128);
    match (d, w) {
        (1, 0) => (n - k, n),
        (1, 1) => (k + 1, n),
        (2, 0) => ((n - k) * (n - k - 1), n * (n - 1)),
        (2, 1) => ((n - k - 1) * (k + 1), n * (n - 1)),
        (2, 2) => ((k + 1) * (k + 2), n * (n - 1)),
        _ => panic!("f-form only for d <= 2 and w <= d"),
    }
}

/// `f(n, k, d, w, w)` in floating point from the product-of-ratios form.
pub fn f_form(n: u64, d: u32, w: u32, k: u64) -> f64 {
    let (num, den) = f_parts(n, d, w, k);
    num as f64 / den as f64
}

pub fn f_form_exact(n: u64, d: u32, w: u32, k: u64) -> BigRational {
    let (num, den) = f_parts(n, d, w, k);
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

/// `C(n-d, k) / C(n, k+w)` with big integers.
pub fn f_binomial(n: u64, d: u32, w: u32, k: u64) -> BigRational {
    let nb = BigUint::from(n);
    let num = binomial(&(&nb - BigUint::from(d)), k);
    let den = binomial(&nb, k + w as u64);
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

/// Reduced state of `d ∈ {1, 2}` parties of a pure symmetric state:
/// `ρ[i][j] = Σ_k c_{k+|i|} c_{k+|j|} √(f_{|i|}(k) f_{|j|}(k))`.
pub fn reduced_density(s: &SymmetricState, d: u32) -> Result<ReducedDensity, StateError> {
    if !(1..=2).contains(&d) || s.n < d as u64 {
        return Err(StateError::OutOfRange {
            what: "d",
            detail: format!("need d in {{1, 2}} and n >= d, got n={}, d={d}", s.n),
        });
    }
    let dim = 1usize << d;
    let weight = |i: usize| i.count_ones();
    let c = &s.coeffs;
    let mut entries = vec![vec![0.0; dim]; dim];
    #[allow(clippy::needless_range_loop)]
    for i in 0..dim {
        for j in i..dim {
            let (wi, wj) = (weight(i), weight(j));
            let mut acc = 0.0;
            for k in 0..=(s.n - d as u64) {
                let fi = f_form(s.n, d, wi, k);
                let fj = f_form(s.n, d, wj, k);
                acc += c[k as usize + wi as usize] * c[k as usize + wj as usize] * (fi * fj).sqrt();
            }
            entries[i][j] = acc;
            entries[j][i] = acc;
        }
    }
    Ok(ReducedDensity { d, entries })
}

/// Large-`n` two-body state of the Gaussian superposition centred at `n/2 + c`:
/// `[n² |+⟩⟨+|^{⊗2} + (n/2) M(c)] / (n(n-1))`.
pub fn rho2_asymptotic(n: u64, c: f64) -> ReducedDensity {
    let nf = n as f64;
    let m = [
        [-(1.0 + 2.0 * c), -c, -c, 1.0],
        [-c, 0.0, 0.0, c],
        [-c, 0.0, 0.0, c],
        [1.0, c, c, 2.0 * c - 1.0],
    ];
    let norm = nf * (nf - 1.0);
    let entries = (0..4)
        .map(|i| (0..4).map(|j| (nf * nf * 0.25 + nf / 2.0 * m[i][j]) / norm).collect())
        .collect();
    ReducedDensity { d: 2, entries }
}

fn qubit_observable(angle: f64) -> [[f64; 2]; 2] {
    let (s, c) = angle.sin_cos();
    [[c, s], [s, -c]]
}

fn kron(a: &[[f64; 2]; 2], b: &[[f64; 2]; 2]) -> Matrix4<f64> {
    Matrix4::from_fn(|i, j| a[i >> 1][j >> 1] * b[i & 1][j & 1])
}

/// `β_c + n(α⟨M0⊗1⟩ + β⟨M1⊗1⟩) + n(n-1)(γ/2⟨M0⊗M0⟩ + δ⟨M0⊗M1⟩ + ε/2⟨M1⊗M1⟩)`.
pub fn expectation_from_rho2(ineq: &BellInequality, m: MeasurementPair, rho: &ReducedDensity) -> f64 {
    let q = ineq.coefficients();
    let r = rho.as_matrix4().expect("two-body reduced state");
    let id = [[1.0, 0.0], [0.0, 1.0]];
    let m0 = qubit_observable(m.phi);
    let m1 = qubit_observable(m.theta);
    let ev = |op: Matrix4<f64>| (r * op).trace();
    let nf = q.n as f64;
    q.beta_c
        + nf * (q.alpha * ev(kron(&m0, &id)) + q.beta * ev(kron(&m1, &id)))
        + nf * (nf - 1.0)
            * (q.gamma / 2.0 * ev(kron(&m0, &m0)) + q.delta * ev(kron(&m0, &m1)) + q.epsilon / 2.0 * ev(kron(&m1, &m1)))
}

/// Closed-form optimum of `d_k(-θ, θ)` for the low-excitation family:
/// `θ* = 2 arccos √(C1/C2)` and value `-4 C1² / C2`.
pub fn dicke_closed_form_violation(n: u64, k: u64) -> Result<(f64, f64), StateError> {
    if k == 0 || 2 * k > n.saturating_sub(1) {
        return Err(StateError::OutOfRange {
            what: "k",
            detail: format!("need 0 < k <= (n-1)/2, got n={n}, k={k}"),
        });
    }
    let (nf, kf) = (n as f64, k as f64);
    let c1 = kf * (nf - (1.0 + 3.0 * kf));
    let c2 = nf * nf * (2.0 * kf + 1.0) - nf * (8.0 * kf * kf + 4.0 * kf + 1.0) + 2.0 * kf * kf * (1.0 + 4.0 * kf);
    if c1 < 0.0 || c2 <= 0.0 || c1 > c2 {
        return Err(StateError::OutOfRegime { c1, c2 });
    }
    let theta = 2.0 * (c1 / c2).sqrt().acos();
    Ok((-4.0 * c1 * c1 / c2, theta))
}

/// `⟨D_n^k| B(φ, θ) |D_n^k⟩ = d_k` of the symmetric block.
pub fn dicke_expectation(q: &Coefficients, k: u64, m: MeasurementPair) -> f64 {
    diagonal_entry(q.beta_c, &constants_from(q, m), q.n, q.n, k)
}

/// Which Dicke-detecting family to use.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DickeClass {
    Low,
    Mid,
}

/// The inequality of the chosen family aimed at `|D_n^k⟩`. States with `k > n/2` use
/// the outcome-relabelled inequality for `n - k`.
pub fn dicke_target_inequality(n: u64, k: u64, which: DickeClass) -> Result<BellInequality, StateError> {
    if k == 0 || k >= n {
        return Err(StateError::OutOfRange {
            what: "k",
            detail: format!("need 0 < k < n, got n={n}, k={k}"),
        });
    }
    let mirrored = 2 * k > n;
    let kk = if mirrored { n - k } else { k };
    let ineq = match which {
        DickeClass::Low => inequalities::dicke_low_k_inequality(n, kk).map_err(|e| StateError::OutOfRange {
            what: "k",
            detail: e.to_string(),
        })?,
        DickeClass::Mid => inequalities::dicke_mid_nu(n, n / 2 - kk),
    };
    Ok(if mirrored {
        inequalities::relabel_outcomes(&ineq)
    } else {
        ineq
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DickeViolation {
    pub n: u64,
    pub k: u64,
    pub class: DickeClass,
    pub value: f64,
    pub beta_c: f64,
    pub measurements: MeasurementPair,
}

impl DickeViolation {
    pub fn ratio(&self) -> f64 {
        self.value / self.beta_c
    }
}

/// Minimises `d_k(φ, θ)` over both angles: a 360×360 grid followed by Nelder–Mead.
pub fn dicke_numeric_violation(n: u64, k: u64, which: DickeClass) -> Result<DickeViolation, StateError> {
    dicke_numeric_violation_with(n, k, which, 360, ExecMode::default())
}

pub fn dicke_numeric_violation_with(
    n: u64,
    k: u64,
    which: DickeClass,
    grid: usize,
    mode: ExecMode,
) -> Result<DickeViolation, StateError> {
    let ineq = dicke_target_inequality(n, k, which)?;
    let q = ineq.coefficients();
    let (value, measurements) = minimize_dicke_expectation(&q, k, grid, mode);
    Ok(DickeViolation {
        n,
        k,
        class: which,
        value,
        beta_c: q.beta_c,
        measurements,
    })
}

/// Minimises `⟨D_n^k|B(φ, θ)|D_n^k⟩` over a `grid × grid` mesh, then refines with Nelder–Mead.
pub fn minimize_dicke_expectation(q: &Coefficients, k: u64, grid: usize, mode: ExecMode) -> (f64, MeasurementPair) {
    let f = |p: [f64; 2]| dicke_expectation(q, k, MeasurementPair::new(p[0], p[1]));
    let step = 2.0 * PI / grid as f64;
    let rows = par::map_range(mode, grid, |i| {
        let phi = step * i as f64;
        (0..grid)
            .map(|j| (f([phi, step * j as f64]), j))
            .min_by(|a, b| a.0.total_cmp(&b.0))
            .map(|(v, j)| (v, i, j))
            .expect("grid is nonempty")
    });
    let (_, i, j) = rows
        .into_iter()
        .min_by(|a, b| a.0.total_cmp(&b.0))
        .expect("grid is nonempty");
    let start = [step * i as f64, step * j as f64];
    let (p, value) = optimize::nelder_mead_2d(f, start, step / 2.0, 1e-12, 1e-16, 4000);
    (value, mirror_upper(MeasurementPair::new(p[0], p[1]).canonical()))
}

/// `d_k` is invariant under `(φ, θ) → (-φ, -θ)`; report the copy with `φ ∈ [π, 2π)`.
fn mirror_upper(m: MeasurementPair) -> MeasurementPair {
    if m.phi < PI {
        MeasurementPair::new(-m.phi, -m.theta).canonical()
    } else {
        m
    }
}

/// First and second moments of collective spin along the measurement directions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CollectiveMoments {
    pub n: u64,
    /// `m̂0 · m̂1`.
    pub overlap: f64,
    /// `⟨m̂_k · S⟩`.
    pub first: [f64; 2],
    /// `⟨(m̂_k · S)²⟩`.
    pub second: [f64; 2],
    /// `⟨((m̂0 + m̂1) · S)²⟩`.
    pub sum_sq: f64,
    /// `⟨((m̂0 - m̂1) · S)²⟩`.
    pub diff_sq: f64,
}

impl CollectiveMoments {
    /// Exact moments of a symmetric state for directions in the x–z plane.
    pub fn from_state(s: &SymmetricState, m: MeasurementPair) -> Self {
        let (s0, c0) = m.phi.sin_cos();
        let (s1, c1) = m.theta.sin_cos();
        let (f0, q0) = s.spin_moments(c0, s0);
        let (f1, q1) = s.spin_moments(c1, s1);
        let (_, sum_sq) = s.spin_moments(c0 + c1, s0 + s1);
        let (_, diff_sq) = s.spin_moments(c0 - c1, s0 - s1);
        CollectiveMoments {
            n: s.n,
            overlap: c0 * c1 + s0 * s1,
            first: [f0, f1],
            second: [q0, q1],
            sum_sq,
            diff_sq,
        }
    }
}

/// Symmetric correlators as reals.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CorrelatorValues {
    pub s0: f64,
    pub s1: f64,
    pub s00: f64,
    pub s01: f64,
    pub s11: f64,
}

impl CorrelatorValues {
    pub fn evaluate(&self, q: &Coefficients) -> f64 {
        q.beta_c
            + q.alpha * self.s0
            + q.beta * self.s1
            + q.gamma / 2.0 * self.s00
            + q.delta * self.s01
            + q.epsilon / 2.0 * self.s11
    }
}

/// `S_k = 2⟨m̂_k·S⟩`, `S_kk = 4⟨(m̂_k·S)²⟩ - n`,
/// `S_01 = ⟨((m̂0+m̂1)·S)²⟩ - ⟨((m̂0-m̂1)·S)²⟩ - n m̂0·m̂1`.
pub fn collective_correlators(m: &CollectiveMoments) -> CorrelatorValues {
    let n = m.n as f64;
    CorrelatorValues {
        s0: 2.0 * m.first[0],
        s1: 2.0 * m.first[1],
        s00: 4.0 * m.second[0] - n,
        s01: m.sum_sq - m.diff_sq - n * m.overlap,
        s11: 4.0 * m.second[1] - n,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bell_operator::build_block;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * (1.0 + a.abs().max(b.abs()))
    }

    #[test]
    fn dicke_basics() {
        assert_eq!(dicke_state(4, 2).unwrap().coeffs, vec![0.0, 0.0, 1.0, 0.0, 0.0]);
        assert_eq!(dicke_state(4, 0).unwrap().coeffs[0], 1.0);
        assert!(dicke_state(4, 5).is_err());
    }

    #[test]
    fn expectation_small_cases() {
        let ex = BellInequality::example(6);
        let b = build_block(&ex, MeasurementPair::new(0.3, 2.0), TwiceSpin(6)).unwrap();
        for k in 0..=6 {
            let e = expectation(&dicke_state(6, k).unwrap(), &b).unwrap();
            assert!(close(e, b.d[k as usize], 1e-14));
        }
        let mut c = vec![0.0; 7];
        c[0] = 0.5f64.sqrt();
        c[1] = 0.5f64.sqrt();
        let s = SymmetricState::from_coeffs(6, c);
        let e = expectation(&s, &b).unwrap();
        assert!(close(e, (b.d[0] + b.d[1]) / 2.0 + b.u[0], 1e-14));
        let small = build_block(&ex, MeasurementPair::new(0.3, 2.0), TwiceSpin(4)).unwrap();
        assert!(matches!(
            expectation(&s, &small),
            Err(StateError::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn gaussian_narrow_limit_is_dicke() {
        let g = gaussian_state_quiet(12, GaussianParams { mu: 5.0, sigma: 0.01 });
        assert!(g.fidelity(&dicke_state(12, 5).unwrap()) > 1.0 - 1e-10);
        let g = gaussian_state(40, GaussianParams { mu: 20.3, sigma: 3.0 });
        assert!((g.norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn gaussian_fit_recovers_parameters() {
        let g = gaussian_state(400, GaussianParams { mu: 201.7, sigma: 9.0 });
        let fit = GaussianParams::fit(&g);
        assert!(close(fit.mu, 201.7, 1e-10));
        assert!(close(fit.sigma, 9.0, 1e-8));
    }

    #[test]
    fn analytic_violation_example_series() {
        for n in [100u64, 10_000] {
            let ex = BellInequality::example(n);
            let q = ex.coefficients();
            let sigma = (n as f64).sqrt();
            let a = analytic_violation(&ex, sigma).unwrap();
            let k = constants_from(&q, a.measurements);
            assert!(k.c.abs() < 1e-10);
            let (lead, cst) = analytic_terms(&q, n, sigma, a.measurements).unwrap();
            assert!(close(a.value, lead * n as f64 + cst, 1e-12));
            // at (π/6, 5π/6): B = 3, A' = -1, A = -√3, D = 0, leading = 1/2 - e^{-1/8σ}
            let e = (-1.0 / (8.0 * sigma)).exp();
            assert!(a.leading <= 0.5 - e + 1e-12);
            assert!(a.leading > 0.5 - e - 1e-3, "{a:?}");
        }
        let ratio = |n: u64| {
            analytic_violation(&BellInequality::example(n), (n as f64).sqrt())
                .unwrap()
                .value
                / (2.0 * n as f64)
        };
        assert!((ratio(100_000_000) + 0.25).abs() < 1e-3);
    }

    #[test]
    fn analytic_violation_close_to_state_value() {
        let n = 100u64;
        let ex = BellInequality::example(n);
        let a = analytic_violation(&ex, 10.0).unwrap();
        let state = gaussian_state(n, a.params);
        let numeric = symmetric_expectation(&ex, a.measurements, &state).unwrap();
        assert!(
            (a.value - numeric).abs() <= 0.05 * numeric.abs(),
            "{} vs {numeric}",
            a.value
        );
    }

    #[test]
    fn f_forms_match_binomials() {
        for n in 2..=60u64 {
            for d in 1..=2u32 {
                for w in 0..=d {
                    for k in 0..=(n - d as u64) {
                        let exact = f_form_exact(n, d, w, k);
                        assert_eq!(exact, f_binomial(n, d, w, k), "n={n} d={d} w={w} k={k}");
                        assert_eq!(f_form(n, d, w, k), crate::rational::to_f64(&exact));
                    }
                }
            }
        }
    }

    #[test]
    fn reduced_density_of_dicke() {
        for (n, k) in [(5u64, 2u64), (9, 0), (9, 9)] {
            let r = reduced_density(&dicke_state(n, k).unwrap(), 1).unwrap();
            assert!(close(r.entries[0][0], (n - k) as f64 / n as f64, 1e-15));
            assert!(close(r.entries[1][1], k as f64 / n as f64, 1e-15));
            assert_eq!(r.entries[0][1], 0.0);
        }
        let r = reduced_density(&dicke_state(4, 2).unwrap(), 2).unwrap();
        assert!((r.trace() - 1.0).abs() < 1e-12);
        assert!(r.min_eigenvalue() > -1e-10);
        assert!(r.entries[1][2] > 0.0);
        assert!(close(r.entries[1][1], r.entries[1][2], 1e-15));
        assert!(reduced_density(&dicke_state(4, 2).unwrap(), 3).is_err());
    }

    #[test]
    fn rho2_expectation_matches_block() {
        let n = 40u64;
        let ex = BellInequality::example(n);
        let m = MeasurementPair::new(0.4, 2.1);
        let g = gaussian_state(n, GaussianParams { mu: 18.3, sigma: 4.0 });
        let rho = reduced_density(&g, 2).unwrap();
        let via_rho = expectation_from_rho2(&ex, m, &rho);
        let via_block = symmetric_expectation(&ex, m, &g).unwrap();
        assert!(close(via_rho, via_block, 1e-10), "{via_rho} vs {via_block}");
    }

    #[test]
    fn rho2_asymptotic_trace() {
        for c in [0.0, -0.29, 1.3] {
            let r = rho2_asymptotic(1000, c);
            assert!((r.trace() - 1.0).abs() < 1e-12);
            assert!(r.max_asymmetry() == 0.0);
        }
    }

    #[test]
    fn closed_form_dicke() {
        let (v, theta) = dicke_closed_form_violation(1024, 100).unwrap();
        let ineq = inequalities::dicke_low_k_inequality(1024, 100).unwrap().coefficients();
        let d = |t: f64| dicke_expectation(&ineq, 100, MeasurementPair::new(-t, t));
        assert!(close(d(theta), v, 1e-9));
        let (_, best) = optimize::golden_section(d, theta - 0.1, theta + 0.1, 1e-12);
        assert!(close(best, v, 1e-9));
        // n = 1 + 3k: C1 = 0
        let (v, _) = dicke_closed_form_violation(31, 10).unwrap();
        assert_eq!(v, 0.0);
        assert!(matches!(
            dicke_closed_form_violation(40, 15),
            Err(StateError::OutOfRegime { .. }) | Err(StateError::OutOfRange { .. })
        ));
    }

    #[test]
    fn dicke_numeric_small() {
        for k in 1..12u64 {
            let low = dicke_numeric_violation_with(12, k, DickeClass::Low, 90, ExecMode::Sequential);
            let mid = dicke_numeric_violation_with(12, k, DickeClass::Mid, 90, ExecMode::Sequential).unwrap();
            let best = low.map(|l| l.value.min(mid.value)).unwrap_or(mid.value);
            assert!(best < 0.0, "k={k}");
        }
        assert!(dicke_target_inequality(12, 12, DickeClass::Mid).is_err());
        assert!(dicke_target_inequality(12, 0, DickeClass::Mid).is_err());
    }

    #[test]
    fn product_state_has_no_violation() {
        // |D_n^n⟩ against the relabelled low class for k = 1
        let ineq = inequalities::relabel_outcomes(&inequalities::dicke_low_k_inequality(10, 1).unwrap());
        let q = ineq.coefficients();
        let mut worst = f64::INFINITY;
        for i in 0..200 {
            for j in 0..200 {
                let m = MeasurementPair::new(i as f64 * PI / 100.0, j as f64 * PI / 100.0);
                worst = worst.min(dicke_expectation(&q, 10, m));
            }
        }
        assert!(worst >= -1e-9);
    }

    #[test]
    fn collective_correlator_examples() {
        let zero = CollectiveMoments {
            n: 4,
            overlap: 0.3,
            first: [0.0; 2],
            second: [0.0; 2],
            sum_sq: 0.0,
            diff_sq: 0.0,
        };
        let c = collective_correlators(&zero);
        assert_eq!((c.s0, c.s1, c.s00, c.s11), (0.0, 0.0, -4.0, -4.0));
        assert!(close(c.s01, -1.2, 1e-15));

        let n = 10u64;
        let half = dicke_state(n, n / 2).unwrap();
        let m = MeasurementPair::new(PI / 2.0, 0.7);
        let mom = CollectiveMoments::from_state(&half, m);
        assert!(close(mom.second[0], (n * (n + 2)) as f64 / 8.0, 1e-12));
        let c = collective_correlators(&mom);
        assert!(close(c.s00, (n * n) as f64 / 2.0, 1e-12));
    }

    #[test]
    fn collective_correlators_reproduce_block_expectation() {
        let n = 30u64;
        let ex = BellInequality::example(n);
        let m = MeasurementPair::new(0.9, 2.4);
        let g = gaussian_state(n, GaussianParams { mu: 13.2, sigma: 2.5 });
        let corr = collective_correlators(&CollectiveMoments::from_state(&g, m));
        let direct = symmetric_expectation(&ex, m, &g).unwrap();
        assert!(close(corr.evaluate(&ex.coefficients()), direct, 1e-11));
    }
}
