//! Collective-spin form of an inequality and a visibility/offset error model.
//!
//! The error model acts on second moments only:
//! `⟨S_θ²⟩_measured = κ + η⟨S_θ²⟩_ideal` for `θ ∈ {z, x, π/4}`, with the same `(η, κ)` on
//! all three directions. First moments are taken as error-free.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use serde::{Deserialize, Serialize};

use crate::bell_operator::{constants_from, MeasurementPair};
use crate::inequalities::{self, BellInequality, InequalityError};
use crate::par::{self, ExecMode};
use crate::states::{self, StateError, SymmetricState};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum RobustnessError {
    #[error("visibility eta must lie in (0, 1], got {0}")]
    BadEta(f64),
    #[error("offset kappa must be finite and >= 0, got {0}")]
    BadKappa(f64),
    #[error("invalid kappa range: {0}")]
    BadRange(String),
    #[error(transparent)]
    Inequality(#[from] InequalityError),
    #[error(transparent)]
    State(#[from] StateError),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ErrorModel {
    pub eta: f64,
    pub kappa: f64,
}

impl ErrorModel {
    pub const IDEAL: ErrorModel = ErrorModel { eta: 1.0, kappa: 0.0 };

    pub fn new(eta: f64, kappa: f64) -> Result<Self, RobustnessError> {
        let e = ErrorModel { eta, kappa };
        e.validate()?;
        Ok(e)
    }

    pub fn validate(&self) -> Result<(), RobustnessError> {
        if !(self.eta > 0.0 && self.eta <= 1.0) {
            return Err(RobustnessError::BadEta(self.eta));
        }
        if !(self.kappa >= 0.0 && self.kappa.is_finite()) {
            return Err(RobustnessError::BadKappa(self.kappa));
        }
        Ok(())
    }

    fn map(&self, x: f64) -> f64 {
        self.kappa + self.eta * x
    }
}

/// Where a set of ideal moments came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MomentSource {
    ClosedForm,
    State,
    Measured,
}

/// `⟨S_z⟩, ⟨S_x⟩, ⟨S_z²⟩, ⟨S_x²⟩, ⟨S_{π/4}²⟩` with `S_{π/4} = (S_x + S_z)/√2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpinMomentSet {
    pub n: u64,
    pub sz: f64,
    pub sx: f64,
    pub szz: f64,
    pub sxx: f64,
    pub sdd: f64,
    pub source: MomentSource,
}

impl SpinMomentSet {
    /// Exact moments of `|D_n^{n/2}⟩`.
    pub fn half_dicke(n: u64) -> Result<Self, RobustnessError> {
        if n == 0 || n % 2 == 1 {
            return Err(InequalityError::OutOfRange {
                what: "n",
                detail: format!("half-filled Dicke state needs even n, got {n}"),
            }
            .into());
        }
        let nf = n as f64;
        Ok(SpinMomentSet {
            n,
            sz: 0.0,
            sx: 0.0,
            szz: 0.0,
            sxx: nf * (nf + 2.0) / 8.0,
            sdd: nf * (nf + 2.0) / 16.0,
            source: MomentSource::ClosedForm,
        })
    }

    /// Large-`n` moments of the Gaussian superposition violating the example inequality.
    pub fn gaussian_large_n(n: u64) -> Self {
        let nf = n as f64;
        let r3 = 3f64.sqrt();
        SpinMomentSet {
            n,
            sz: 1.0 / (2.0 * r3),
            sx: nf / 2.0,
            szz: 0.0,
            sxx: nf * nf / 4.0,
            sdd: nf * (nf / 2.0 + 1.0 / r3) / 4.0,
            source: MomentSource::ClosedForm,
        }
    }

    pub fn from_state(s: &SymmetricState) -> Self {
        let (sz, szz) = s.spin_moments(1.0, 0.0);
        let (sx, sxx) = s.spin_moments(0.0, 1.0);
        let (_, sdd) = s.spin_moments(FRAC_1_SQRT_2, FRAC_1_SQRT_2);
        SpinMomentSet {
            n: s.n,
            sz,
            sx,
            szz,
            sxx,
            sdd,
            source: MomentSource::State,
        }
    }

    /// Second moments dominate squared first moments, up to `tol` relative.
    pub fn is_physical(&self, tol: f64) -> bool {
        let ok = |second: f64, first: f64| second + tol * (1.0 + second.abs()) >= first * first;
        ok(self.szz, self.sz) && ok(self.sxx, self.sx)
    }
}

/// `β_c + 2A⟨S_z⟩ + 2A'⟨S_x⟩ + 2(B-D)⟨S_z²⟩ + 2(C-D)⟨S_x²⟩ + 4D⟨S_{π/4}²⟩ - n(B+C)/2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpinForm {
    pub n: u64,
    pub constant: f64,
    pub sz: f64,
    pub sx: f64,
    pub szz: f64,
    pub sxx: f64,
    pub sdd: f64,
}

impl SpinForm {
    pub fn evaluate(&self, m: &SpinMomentSet) -> f64 {
        self.constant + self.sz * m.sz + self.sx * m.sx + self.szz * m.szz + self.sxx * m.sxx + self.sdd * m.sdd
    }

    /// `d value / d κ`, i.e. `2(B + C)`.
    pub fn offset_slope(&self) -> f64 {
        self.szz + self.sxx + self.sdd
    }
}

pub fn inequality_in_spin_form(ineq: &BellInequality, m: MeasurementPair) -> SpinForm {
    let q = ineq.coefficients();
    let k = constants_from(&q, m);
    SpinForm {
        n: ineq.n,
        constant: q.beta_c - ineq.n as f64 * (k.b + k.c) / 2.0,
        sz: 2.0 * k.a,
        sx: 2.0 * k.a_prime,
        szz: 2.0 * (k.b - k.d),
        sxx: 2.0 * (k.c - k.d),
        sdd: 4.0 * k.d,
    }
}

pub fn apply_error_model(moms: &SpinMomentSet, e: ErrorModel) -> SpinMomentSet {
    SpinMomentSet {
        szz: e.map(moms.szz),
        sxx: e.map(moms.sxx),
        sdd: e.map(moms.sdd),
        source: MomentSource::Measured,
        ..*moms
    }
}

/// Outcome of the search for the largest tolerable offset.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", content = "kappa", rename_all = "snake_case")]
pub enum KappaStar {
    /// No violation even at `κ = 0`.
    NotViolated,
    /// The value never reaches zero as `κ` grows.
    Unbounded,
    Finite(f64),
}

impl KappaStar {
    pub fn value(self) -> Option<f64> {
        match self {
            KappaStar::Finite(k) => Some(k),
            _ => None,
        }
    }
}

/// Largest `κ` with a negative value at visibility `eta`, by bisection to `1e-6` relative.
pub fn kappa_star(form: &SpinForm, moms: &SpinMomentSet, eta: f64) -> Result<KappaStar, RobustnessError> {
    ErrorModel::new(eta, 0.0)?;
    let f = |kappa: f64| form.evaluate(&apply_error_model(moms, ErrorModel { eta, kappa }));
    if f(0.0) >= 0.0 {
        return Ok(KappaStar::NotViolated);
    }
    let mut lo = 0.0;
    let mut hi = 1.0;
    while f(hi) < 0.0 {
        lo = hi;
        hi *= 2.0;
        if hi > 1e300 {
            return Ok(KappaStar::Unbounded);
        }
    }
    while hi - lo > 1e-7 * hi {
        let mid = 0.5 * (lo + hi);
        if f(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(KappaStar::Finite(lo))
}

/// `κ` grid: `steps + 1` evenly spaced points on `[lo, hi]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KappaRange {
    pub lo: f64,
    pub hi: f64,
    pub steps: usize,
}

impl KappaRange {
    pub fn points(&self) -> Result<Vec<f64>, RobustnessError> {
        if !(self.lo >= 0.0 && self.hi >= self.lo && self.hi.is_finite()) {
            return Err(RobustnessError::BadRange(format!("[{}, {}]", self.lo, self.hi)));
        }
        if self.steps == 0 {
            return Ok(vec![self.lo]);
        }
        Ok((0..=self.steps)
            .map(|i| self.lo + (self.hi - self.lo) * i as f64 / self.steps as f64)
            .collect())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub eta: f64,
    pub kappa: f64,
    pub value: f64,
    pub violated: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EtaSummary {
    pub eta: f64,
    pub kappa_star: KappaStar,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub n: u64,
    pub source: MomentSource,
    /// Whether the value is nondecreasing in `κ` (`2(B+C) ≥ 0`).
    pub monotone_in_kappa: bool,
    pub ideal_value: f64,
    pub rows: Vec<SweepRow>,
    pub summary: Vec<EtaSummary>,
}

pub fn robustness_sweep(
    ineq: &BellInequality,
    m: MeasurementPair,
    moms_ideal: &SpinMomentSet,
    eta_list: &[f64],
    kappa_range: KappaRange,
    mode: ExecMode,
) -> Result<SweepResult, RobustnessError> {
    for &eta in eta_list {
        ErrorModel::new(eta, 0.0)?;
    }
    let kappas = kappa_range.points()?;
    let form = inequality_in_spin_form(ineq, m);
    let grid: Vec<(f64, f64)> = eta_list
        .iter()
        .flat_map(|&eta| kappas.iter().map(move |&kappa| (eta, kappa)))
        .collect();
    let rows = par::map_slice(mode, &grid, |&(eta, kappa)| {
        let value = form.evaluate(&apply_error_model(moms_ideal, ErrorModel { eta, kappa }));
        SweepRow {
            eta,
            kappa,
            value,
            violated: value < 0.0,
        }
    });
    let summary = eta_list
        .iter()
        .map(|&eta| {
            Ok(EtaSummary {
                eta,
                kappa_star: kappa_star(&form, moms_ideal, eta)?,
            })
        })
        .collect::<Result<_, RobustnessError>>()?;
    Ok(SweepResult {
        n: ineq.n,
        source: moms_ideal.source,
        monotone_in_kappa: form.offset_slope() >= 0.0,
        ideal_value: form.evaluate(moms_ideal),
        rows,
        summary,
    })
}

/// Effect of unequal visibilities on `⟨S_x²⟩` and `⟨S_{π/4}²⟩` in the example inequality.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MimicReport {
    pub n: u64,
    /// Spurious part of the reconstructed `⟨{S_x, S_z}⟩ = 2⟨S_{π/4}²⟩ - ⟨S_x²⟩ - ⟨S_z²⟩`.
    pub residual: f64,
    /// Resulting shift of the inequality value, `2D · residual`.
    pub value_shift: f64,
    /// `|residual| > n`: the O(n²) cancellation is broken.
    pub flagged: bool,
}

/// Uses the large-`n` Gaussian moments at the canonical angles `(π/6, 5π/6)`.
pub fn mimic_artifact_check(eta_x: f64, eta_diag: f64, n: u64) -> Result<MimicReport, RobustnessError> {
    ErrorModel::new(eta_x, 0.0)?;
    ErrorModel::new(eta_diag, 0.0)?;
    let moms = SpinMomentSet::gaussian_large_n(n);
    let residual = 2.0 * (eta_diag - eta_x) * moms.sdd;
    let k = constants_from(
        &BellInequality::example(n).coefficients(),
        MeasurementPair::new(PI / 6.0, 5.0 * PI / 6.0),
    );
    Ok(MimicReport {
        n,
        residual,
        value_shift: 2.0 * k.d * residual,
        flagged: residual.abs() > n as f64,
    })
}

/// An inequality, its measurements and the ideal moments of the state it targets.
#[derive(Debug, Clone, PartialEq)]
pub struct CaseStudy {
    pub ineq: BellInequality,
    pub measurements: MeasurementPair,
    pub moments: SpinMomentSet,
    /// Expectation computed directly on the state, without the spin rewriting.
    pub ideal_value: f64,
}

/// `|D_n^{n/2}⟩` against its dedicated inequality, at the optimal angles.
pub fn half_dicke_case(n: u64, mode: ExecMode) -> Result<CaseStudy, RobustnessError> {
    let ineq = inequalities::half_filled_dicke_inequality(n)?;
    let (ideal_value, measurements) = states::minimize_dicke_expectation(&ineq.coefficients(), n / 2, 360, mode);
    Ok(CaseStudy {
        ineq,
        measurements,
        moments: SpinMomentSet::half_dicke(n)?,
        ideal_value,
    })
}

/// The optimal Gaussian superposition against the example inequality; moments come from the
/// state itself.
pub fn gaussian_case(n: u64) -> Result<CaseStudy, RobustnessError> {
    let ineq = BellInequality::example(n);
    let g = states::optimal_gaussian_violation(&ineq)?;
    Ok(CaseStudy {
        moments: SpinMomentSet::from_state(&g.state),
        measurements: g.measurements,
        ideal_value: g.value,
        ineq,
    })
}

/// The same inequality at `(π/6, 5π/6)` with the large-`n` closed-form moments.
pub fn gaussian_closed_form_case(n: u64) -> CaseStudy {
    let ineq = BellInequality::example(n);
    let measurements = MeasurementPair::new(PI / 6.0, 5.0 * PI / 6.0);
    let moments = SpinMomentSet::gaussian_large_n(n);
    let ideal_value = inequality_in_spin_form(&ineq, measurements).evaluate(&moments);
    CaseStudy {
        ineq,
        measurements,
        moments,
        ideal_value,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::states::{dicke_state, gaussian_state, symmetric_expectation, GaussianParams};

    #[test]
    fn error_model_domain() {
        assert!(ErrorModel::new(0.0, 1.0).is_err());
        assert!(ErrorModel::new(1.2, 1.0).is_err());
        assert!(ErrorModel::new(0.5, -1.0).is_err());
        assert!(ErrorModel::new(0.8, 100.0).is_ok());
    }

    #[test]
    fn error_model_action() {
        let m = SpinMomentSet::half_dicke(10).unwrap();
        assert_eq!(apply_error_model(&m, ErrorModel::IDEAL).sxx, m.sxx);
        let e = apply_error_model(&m, ErrorModel::new(0.8, 50.0).unwrap());
        assert_eq!(e.szz, 50.0);
        assert_eq!(e.sx, m.sx);
        assert!((e.sxx - (50.0 + 0.8 * 15.0)).abs() < 1e-12);
    }

    #[test]
    fn spin_form_matches_block_expectation() {
        let n = 24;
        let g = gaussian_state(n, GaussianParams { mu: 11.4, sigma: 2.0 });
        for ineq in [
            BellInequality::example(n),
            inequalities::half_filled_dicke_inequality(n).unwrap(),
            BellInequality::from_integers(n, [900, 3, -2, 5, 1, -4]),
        ] {
            for m in [MeasurementPair::new(0.3, 2.2), MeasurementPair::new(-1.1, 0.4)] {
                let direct = symmetric_expectation(&ineq, m, &g).unwrap();
                let spin = inequality_in_spin_form(&ineq, m).evaluate(&SpinMomentSet::from_state(&g));
                assert!((direct - spin).abs() < 1e-9 * (1.0 + ineq.coefficients().beta_c.abs()));
            }
        }
        let zero = inequality_in_spin_form(&BellInequality::zero(n), MeasurementPair::new(0.3, 2.2));
        assert_eq!(
            [zero.constant, zero.sz, zero.sx, zero.szz, zero.sxx, zero.sdd],
            [0.0; 6]
        );
    }

    #[test]
    fn half_dicke_closed_forms_are_exact() {
        for n in [2u64, 6, 40] {
            let exact = SpinMomentSet::from_state(&dicke_state(n, n / 2).unwrap());
            let closed = SpinMomentSet::half_dicke(n).unwrap();
            for (a, b) in [
                (exact.sz, closed.sz),
                (exact.sx, closed.sx),
                (exact.szz, closed.szz),
                (exact.sxx, closed.sxx),
                (exact.sdd, closed.sdd),
            ] {
                assert!((a - b).abs() < 1e-10 * (1.0 + b.abs()));
            }
        }
        assert!(SpinMomentSet::half_dicke(7).is_err());
    }

    #[test]
    fn gaussian_closed_form_violates() {
        let c = gaussian_closed_form_case(8000);
        assert!((c.ideal_value - (-4001.0)).abs() < 1e-6, "{}", c.ideal_value);
        let form = inequality_in_spin_form(&c.ineq, c.measurements);
        assert!((form.offset_slope() - 6.0).abs() < 1e-9);
        let k = kappa_star(&form, &c.moments, 1.0).unwrap().value().unwrap();
        assert!((k - 4001.0 / 6.0).abs() < 1e-6 * k);
    }

    #[test]
    fn kappa_star_cases() {
        let c = gaussian_closed_form_case(100);
        let form = inequality_in_spin_form(&c.ineq, c.measurements);
        let ideal = KappaStar::Finite(0.0);
        assert_ne!(kappa_star(&form, &c.moments, 1.0).unwrap(), ideal);
        let positive = SpinForm {
            constant: 1.0,
            sz: 0.0,
            sx: 0.0,
            szz: 0.0,
            sxx: 0.0,
            sdd: 0.0,
            n: 1,
        };
        assert_eq!(kappa_star(&positive, &c.moments, 1.0).unwrap(), KappaStar::NotViolated);
        let flat = SpinForm {
            constant: -1.0,
            ..positive
        };
        assert_eq!(kappa_star(&flat, &c.moments, 1.0).unwrap(), KappaStar::Unbounded);
        assert!(kappa_star(&form, &c.moments, 0.0).is_err());
    }

    #[test]
    fn sweep_rows_and_monotonicity() {
        let c = gaussian_closed_form_case(1000);
        let r = robustness_sweep(
            &c.ineq,
            c.measurements,
            &c.moments,
            &[1.0, 0.95, 0.9],
            KappaRange {
                lo: 0.0,
                hi: 200.0,
                steps: 20,
            },
            ExecMode::Sequential,
        )
        .unwrap();
        assert_eq!(r.rows.len(), 63);
        assert!(r.monotone_in_kappa);
        for w in r.rows.windows(2) {
            if w[0].eta == w[1].eta {
                assert!(w[1].value >= w[0].value);
            }
        }
        let ks: Vec<f64> = r.summary.iter().map(|s| s.kappa_star.value().unwrap()).collect();
        assert!(ks[0] >= ks[1] && ks[1] >= ks[2]);
        let bad = robustness_sweep(
            &c.ineq,
            c.measurements,
            &c.moments,
            &[1.1],
            KappaRange {
                lo: 0.0,
                hi: 1.0,
                steps: 1,
            },
            ExecMode::Sequential,
        );
        assert!(bad.is_err());
    }

    #[test]
    fn mimic_scaling() {
        assert_eq!(mimic_artifact_check(0.9, 0.9, 8000).unwrap().residual, 0.0);
        let a = mimic_artifact_check(0.8, 0.85, 8000).unwrap();
        assert!(a.flagged);
        let b = mimic_artifact_check(0.8, 0.85, 16000).unwrap();
        assert!((b.residual / a.residual - 4.0).abs() < 0.04);
    }

    #[test]
    fn physical_check() {
        // the large-n list drops O(1) terms: ⟨S_z²⟩ = 0 < ⟨S_z⟩² = 1/12
        assert!(!SpinMomentSet::gaussian_large_n(100).is_physical(1e-12));
        assert!(SpinMomentSet::half_dicke(10).unwrap().is_physical(0.0));
    }
}
