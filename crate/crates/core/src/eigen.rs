//! Extremal eigenpairs of real symmetric pentadiagonal matrices.
//!
//! A matrix of size `N` is stored as its diagonal `d` (length `N`), first off-diagonal
//! `u` (length `N-1`) and second off-diagonal `v` (length `N-2`).
//!
//! The smallest eigenvalue is found by bisection on positive definiteness of `A - σI`,
//! tested with a banded Cholesky factorisation in `O(N)`. The eigenvector then follows
//! from inverse iteration with the factor at the lower bracket. Small matrices go
//! through a dense solver instead.

use nalgebra::{DMatrix, SymmetricEigen};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum EigenError {
    #[error("empty matrix")]
    Empty,
    #[error("band lengths do not match: d={d}, u={u}, v={v}")]
    BadShape { d: usize, u: usize, v: usize },
    #[error("eigensolver did not converge within {iterations} iterations (residual {residual:e})")]
    ConvergenceFailure { iterations: usize, residual: f64 },
}

/// Borrowed pentadiagonal matrix.
#[derive(Debug, Clone, Copy)]
pub struct Pentadiagonal<'a> {
    pub d: &'a [f64],
    pub u: &'a [f64],
    pub v: &'a [f64],
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EigenOptions {
    /// Sizes below this use the dense solver for eigenvectors.
    pub dense_cutoff: usize,
    /// Inverse-iteration cap; `None` means `10·N`.
    pub max_iter: Option<usize>,
    /// Relative tolerance on the eigenvalue.
    pub tol: f64,
}

impl Default for EigenOptions {
    fn default() -> Self {
        EigenOptions {
            dense_cutoff: 512,
            max_iter: None,
            tol: 1e-10,
        }
    }
}

impl<'a> Pentadiagonal<'a> {
    pub fn new(d: &'a [f64], u: &'a [f64], v: &'a [f64]) -> Result<Self, EigenError> {
        let n = d.len();
        if n == 0 {
            return Err(EigenError::Empty);
        }
        if u.len() != n - 1 || v.len() != n.saturating_sub(2) {
            return Err(EigenError::BadShape {
                d: n,
                u: u.len(),
                v: v.len(),
            });
        }
        Ok(Pentadiagonal { d, u, v })
    }

    pub fn size(&self) -> usize {
        self.d.len()
    }

    fn entry_scale(&self) -> f64 {
        self.d
            .iter()
            .chain(self.u)
            .chain(self.v)
            .fold(0.0f64, |m, x| m.max(x.abs()))
            .max(f64::MIN_POSITIVE)
    }

    /// `y = A x`.
    pub fn apply(&self, x: &[f64], y: &mut [f64]) {
        let n = self.size();
        for i in 0..n {
            let mut acc = self.d[i] * x[i];
            if i >= 1 {
                acc += self.u[i - 1] * x[i - 1];
            }
            if i + 1 < n {
                acc += self.u[i] * x[i + 1];
            }
            if i >= 2 {
                acc += self.v[i - 2] * x[i - 2];
            }
            if i + 2 < n {
                acc += self.v[i] * x[i + 2];
            }
            y[i] = acc;
        }
    }

    /// Lower bound on the spectrum from Gershgorin discs.
    pub fn gershgorin_lower(&self) -> f64 {
        let n = self.size();
        (0..n)
            .map(|i| {
                let mut r = 0.0;
                if i >= 1 {
                    r += self.u[i - 1].abs();
                }
                if i + 1 < n {
                    r += self.u[i].abs();
                }
                if i >= 2 {
                    r += self.v[i - 2].abs();
                }
                if i + 2 < n {
                    r += self.v[i].abs();
                }
                self.d[i] - r
            })
            .fold(f64::INFINITY, f64::min)
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let n = self.size();
        let mut m = DMatrix::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = self.d[i];
            if i + 1 < n {
                m[(i, i + 1)] = self.u[i];
                m[(i + 1, i)] = self.u[i];
            }
            if i + 2 < n {
                m[(i, i + 2)] = self.v[i];
                m[(i + 2, i)] = self.v[i];
            }
        }
        m
    }
}

/// Banded Cholesky factor of `A - σI`: row `i` holds `(l[i][i-2], l[i][i-1], l[i][i])`.
struct BandCholesky {
    rows: Vec<[f64; 3]>,
}

impl BandCholesky {
    /// Returns `None` unless `A - σI` is numerically positive definite.
    fn factor(a: &Pentadiagonal<'_>, sigma: f64) -> Option<Self> {
        let n = a.size();
        let mut rows = vec![[0.0f64; 3]; n];
        for i in 0..n {
            let l2 = if i >= 2 { a.v[i - 2] / rows[i - 2][2] } else { 0.0 };
            let l1 = if i >= 1 {
                let cross = if i >= 2 { l2 * rows[i - 1][1] } else { 0.0 };
                (a.u[i - 1] - cross) / rows[i - 1][2]
            } else {
                0.0
            };
            let pivot = a.d[i] - sigma - l2 * l2 - l1 * l1;
            // also rejects NaN
            if pivot.partial_cmp(&0.0) != Some(std::cmp::Ordering::Greater) {
                return None;
            }
            rows[i] = [l2, l1, pivot.sqrt()];
        }
        Some(BandCholesky { rows })
    }

    /// Solves `L Lᵀ x = b` in place.
    fn solve(&self, b: &mut [f64]) {
        let n = b.len();
        for i in 0..n {
            let [l2, l1, l0] = self.rows[i];
            let mut s = b[i];
            if i >= 1 {
                s -= l1 * b[i - 1];
            }
            if i >= 2 {
                s -= l2 * b[i - 2];
            }
            b[i] = s / l0;
        }
        for i in (0..n).rev() {
            let mut s = b[i];
            if i + 1 < n {
                s -= self.rows[i + 1][1] * b[i + 1];
            }
            if i + 2 < n {
                s -= self.rows[i + 2][0] * b[i + 2];
            }
            b[i] = s / self.rows[i][2];
        }
    }
}

/// Smallest eigenvalue by bisection. Returns the bracket `(lo, hi)` with `A - lo·I`
/// positive definite (or `lo` the Gershgorin bound) and `hi - lo` below tolerance,
/// together with the number of bisection steps.
fn bisect_min(a: &Pentadiagonal<'_>, rel_tol: f64, cap: usize) -> Result<(f64, f64, usize), EigenError> {
    let scale = a.entry_scale();
    let mut lo = a.gershgorin_lower();
    let mut hi = a.d.iter().copied().fold(f64::INFINITY, f64::min);
    // the factor at `lo` must exist for inverse iteration; nudge below if it sits exactly on λ_min
    let slack = 4.0 * f64::EPSILON * scale * (a.size() as f64).max(1.0);
    lo -= slack;
    let mut steps = 0;
    while hi - lo > rel_tol * scale.max(hi.abs().max(lo.abs())) {
        if steps >= cap {
            return Err(EigenError::ConvergenceFailure {
                iterations: steps,
                residual: hi - lo,
            });
        }
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if BandCholesky::factor(a, mid).is_some() {
            lo = mid;
        } else {
            hi = mid;
        }
        steps += 1;
    }
    Ok((lo, hi, steps))
}

/// Tolerance used for the bisection bracket, tighter than the reported accuracy.
const BRACKET_TOL: f64 = 1e-14;

/// Smallest eigenvalue only, in `O(N log(1/tol))`.
pub fn min_eigenvalue(a: &Pentadiagonal<'_>) -> Result<f64, EigenError> {
    if a.size() == 1 {
        return Ok(a.d[0]);
    }
    let cap = 10 * a.size() + 200;
    let (lo, hi, _) = bisect_min(a, BRACKET_TOL, cap)?;
    Ok(0.5 * (lo + hi))
}

/// Flips the sign so the largest-magnitude component is positive.
fn canonical_sign(x: &mut [f64]) {
    let mut best = 0usize;
    for (i, c) in x.iter().enumerate() {
        if c.abs() > x[best].abs() * (1.0 + 1e-12) {
            best = i;
        }
    }
    if x[best] < 0.0 {
        x.iter_mut().for_each(|c| *c = -*c);
    }
}

fn normalize(x: &mut [f64]) -> f64 {
    let norm = x.iter().map(|c| c * c).sum::<f64>().sqrt();
    if norm > 0.0 {
        x.iter_mut().for_each(|c| *c /= norm);
    }
    norm
}

/// Smallest eigenvalue with a unit eigenvector.
pub fn min_eigenpair(a: &Pentadiagonal<'_>) -> Result<(f64, Vec<f64>), EigenError> {
    min_eigenpair_with(a, &EigenOptions::default())
}

pub fn min_eigenpair_with(a: &Pentadiagonal<'_>, opts: &EigenOptions) -> Result<(f64, Vec<f64>), EigenError> {
    let n = a.size();
    if n == 1 {
        return Ok((a.d[0], vec![1.0]));
    }
    if n < opts.dense_cutoff {
        return Ok(dense_min_eigenpair(a));
    }
    let cap = opts.max_iter.unwrap_or(10 * n);
    let (lo, hi, _) = bisect_min(a, BRACKET_TOL, 10 * n + 200)?;
    let mut iterations = 0;
    let scale = a.entry_scale();
    let factor = BandCholesky::factor(a, lo).ok_or(EigenError::ConvergenceFailure {
        iterations,
        residual: f64::NAN,
    })?;
    let mut x = vec![1.0 / (n as f64).sqrt(); n];
    let mut ax = vec![0.0; n];
    let mut lambda = 0.5 * (lo + hi);
    let mut residual = f64::INFINITY;
    while iterations < cap {
        factor.solve(&mut x);
        if normalize(&mut x) == 0.0 || x.iter().any(|c| !c.is_finite()) {
            break;
        }
        a.apply(&x, &mut ax);
        lambda = x.iter().zip(&ax).map(|(p, q)| p * q).sum();
        residual = ax
            .iter()
            .zip(&x)
            .map(|(q, p)| (q - lambda * p).powi(2))
            .sum::<f64>()
            .sqrt();
        iterations += 1;
        if residual <= 1e-9 * scale {
            break;
        }
    }
    let agrees = (lambda - 0.5 * (lo + hi)).abs() <= opts.tol * scale.max(lambda.abs());
    if residual > 1e-6 * scale || !agrees {
        return Err(EigenError::ConvergenceFailure { iterations, residual });
    }
    canonical_sign(&mut x);
    // the bisection value is the more accurate estimate for the eigenvalue itself
    Ok((0.5 * (lo + hi), x))
}

fn dense_min_eigenpair(a: &Pentadiagonal<'_>) -> (f64, Vec<f64>) {
    let eig = SymmetricEigen::new(a.to_dense());
    let idx = eig.eigenvalues.imin();
    let mut x: Vec<f64> = eig.eigenvectors.column(idx).iter().copied().collect();
    normalize(&mut x);
    canonical_sign(&mut x);
    (eig.eigenvalues[idx], x)
}

/// All eigenvalues, ascending, by a dense solve.
pub fn dense_eigenvalues(a: &Pentadiagonal<'_>) -> Vec<f64> {
    sorted_eigenvalues(a.to_dense())
}

pub fn sorted_eigenvalues(m: DMatrix<f64>) -> Vec<f64> {
    let mut ev: Vec<f64> = SymmetricEigen::new(m).eigenvalues.iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    ev
}
