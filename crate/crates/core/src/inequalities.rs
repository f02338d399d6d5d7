//! Permutationally invariant two-body Bell inequalities and the published families.
//!
//! An inequality reads `β_c + α·S0 + β·S1 + γ/2·S00 + δ·S01 + ε/2·S11 ≥ 0`.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::polytope::{self, PolytopeMinimum, StrategyTuple, SymmetricCorrelators};
use crate::rational::{self, int, to_exact_string, ParseRationalError};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum InequalityError {
    #[error("mu = {mu} must have parity opposite to {against} = {value} for n = {n}")]
    ParityViolation {
        mu: u64,
        against: &'static str,
        value: u64,
        n: u64,
    },
    #[error("x = {x} and y = {y} are not coprime")]
    NotCoprime { x: u64, y: u64 },
    #[error("{what} out of range: {detail}")]
    OutOfRange { what: &'static str, detail: String },
    #[error("no local vertex saturates the inequality (classical bound is not tight)")]
    NoSaturatingVertex,
    #[error("the inequality is violated by a local vertex: minimum {min} is below -beta_c")]
    NotValid { min: String },
    #[error(transparent)]
    Parse(#[from] ParseRationalError),
}

/// Sign parameter (`σ` or the family branch `±`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn value(self) -> i64 {
        match self {
            Sign::Plus => 1,
            Sign::Minus => -1,
        }
    }

    pub fn parse(s: &str) -> Option<Sign> {
        match s.trim() {
            "+" | "+1" | "1" | "plus" => Some(Sign::Plus),
            "-" | "-1" | "minus" => Some(Sign::Minus),
            _ => None,
        }
    }
}

impl fmt::Display for Sign {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Sign::Plus => "+",
            Sign::Minus => "-",
        })
    }
}

/// Parameters of the two-parameter coprime family.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ClassParams {
    pub x: u64,
    pub y: u64,
    pub mu: u64,
    pub sigma: Sign,
    pub branch: Sign,
}

impl ClassParams {
    /// `x = y = 1, μ = 0, σ = -1`, lower branch: the inequality `2n - 2S0 + S00/2 - S01 + S11/2 ≥ 0`.
    pub const EXAMPLE: ClassParams = ClassParams {
        x: 1,
        y: 1,
        mu: 0,
        sigma: Sign::Minus,
        branch: Sign::Minus,
    };

    pub fn validate(&self, n: u64) -> Result<(), InequalityError> {
        if n < 2 {
            return Err(InequalityError::OutOfRange {
                what: "n",
                detail: "the family needs at least two parties".into(),
            });
        }
        if self.x == 0 || self.y == 0 {
            return Err(InequalityError::OutOfRange {
                what: "x, y",
                detail: "must be positive".into(),
            });
        }
        if self.x.gcd(&self.y) != 1 {
            return Err(InequalityError::NotCoprime { x: self.x, y: self.y });
        }
        let (against, value) = if n.is_multiple_of(2) {
            ("x", self.x)
        } else {
            ("y", self.y)
        };
        if (self.mu + value).is_multiple_of(2) {
            return Err(InequalityError::ParityViolation {
                mu: self.mu,
                against,
                value,
                n,
            });
        }
        Ok(())
    }

    /// Parses `x=2,y=3,mu=1,sigma=+1,branch=+`.
    pub fn parse(s: &str) -> Result<ClassParams, String> {
        let mut x = None;
        let mut y = None;
        let mut mu = None;
        let mut sigma = None;
        let mut branch = None;
        for part in s.split(',').filter(|p| !p.trim().is_empty()) {
            let (key, value) = part
                .split_once('=')
                .ok_or_else(|| format!("expected key=value, got `{part}`"))?;
            let value = value.trim();
            let num = || value.parse::<u64>().map_err(|e| format!("{key}: {e}"));
            let sign = || Sign::parse(value).ok_or_else(|| format!("{key}: bad sign `{value}`"));
            match key.trim() {
                "x" => x = Some(num()?),
                "y" => y = Some(num()?),
                "mu" => mu = Some(num()?),
                "sigma" => sigma = Some(sign()?),
                "branch" => branch = Some(sign()?),
                other => return Err(format!("unknown class parameter `{other}`")),
            }
        }
        Ok(ClassParams {
            x: x.ok_or("missing x")?,
            y: y.ok_or("missing y")?,
            mu: mu.ok_or("missing mu")?,
            sigma: sigma.ok_or("missing sigma")?,
            branch: branch.ok_or("missing branch")?,
        })
    }
}

impl fmt::Display for ClassParams {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "x={},y={},mu={},sigma={},branch={}",
            self.x, self.y, self.mu, self.sigma, self.branch
        )
    }
}

/// Coefficients of `β_c + α·S0 + β·S1 + γ/2·S00 + δ·S01 + ε/2·S11 ≥ 0`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "InequalityRecord", into = "InequalityRecord")]
pub struct BellInequality {
    pub n: u64,
    pub beta_c: BigRational,
    pub alpha: BigRational,
    pub beta: BigRational,
    pub gamma: BigRational,
    pub delta: BigRational,
    pub epsilon: BigRational,
}

/// Flat serialisation record with exact decimal (or `p/q`) strings.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InequalityRecord {
    pub n: u64,
    pub beta_c: String,
    pub alpha: String,
    pub beta: String,
    pub gamma: String,
    pub delta: String,
    pub epsilon: String,
}

impl From<BellInequality> for InequalityRecord {
    fn from(q: BellInequality) -> Self {
        InequalityRecord {
            n: q.n,
            beta_c: to_exact_string(&q.beta_c),
            alpha: to_exact_string(&q.alpha),
            beta: to_exact_string(&q.beta),
            gamma: to_exact_string(&q.gamma),
            delta: to_exact_string(&q.delta),
            epsilon: to_exact_string(&q.epsilon),
        }
    }
}

impl TryFrom<InequalityRecord> for BellInequality {
    type Error = InequalityError;

    fn try_from(r: InequalityRecord) -> Result<Self, Self::Error> {
        if r.n == 0 {
            return Err(InequalityError::OutOfRange {
                what: "n",
                detail: "party count must be positive".into(),
            });
        }
        Ok(BellInequality {
            n: r.n,
            beta_c: rational::parse_exact(&r.beta_c)?,
            alpha: rational::parse_exact(&r.alpha)?,
            beta: rational::parse_exact(&r.beta)?,
            gamma: rational::parse_exact(&r.gamma)?,
            delta: rational::parse_exact(&r.delta)?,
            epsilon: rational::parse_exact(&r.epsilon)?,
        })
    }
}

/// Floating-point copy of the coefficients for the quantum modules.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Coefficients {
    pub n: u64,
    pub beta_c: f64,
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub delta: f64,
    pub epsilon: f64,
}

impl BellInequality {
    pub fn from_integers(n: u64, c: [i64; 6]) -> Self {
        BellInequality {
            n,
            beta_c: int(c[0]),
            alpha: int(c[1]),
            beta: int(c[2]),
            gamma: int(c[3]),
            delta: int(c[4]),
            epsilon: int(c[5]),
        }
    }

    pub fn zero(n: u64) -> Self {
        Self::from_integers(n, [0; 6])
    }

    /// `2n - 2S0 + S00/2 - S01 + S11/2 ≥ 0`.
    pub fn example(n: u64) -> Self {
        Self::from_integers(n, [2 * n as i64, -2, 0, 1, -1, 1])
    }

    pub fn coefficients(&self) -> Coefficients {
        let f = rational::to_f64;
        Coefficients {
            n: self.n,
            beta_c: f(&self.beta_c),
            alpha: f(&self.alpha),
            beta: f(&self.beta),
            gamma: f(&self.gamma),
            delta: f(&self.delta),
            epsilon: f(&self.epsilon),
        }
    }

    /// Linear part without `β_c`.
    pub fn linear_value(&self, s: &SymmetricCorrelators) -> BigRational {
        let q = |v: i64| BigRational::from_integer(BigInt::from(v));
        let two = int(2);
        &self.alpha * q(s.s0)
            + &self.beta * q(s.s1)
            + &self.gamma * q(s.s00) / &two
            + &self.delta * q(s.s01)
            + &self.epsilon * q(s.s11) / &two
    }

    /// Full left-hand side including `β_c`.
    pub fn value(&self, s: &SymmetricCorrelators) -> BigRational {
        &self.beta_c + self.linear_value(s)
    }

    pub fn with_beta_c(&self, beta_c: BigRational) -> Self {
        BellInequality { beta_c, ..self.clone() }
    }

    /// Replaces `β_c` by the exact classical bound for this `n`.
    pub fn with_exact_bound(&self) -> Self {
        let min = polytope::minimize_over_polytope(self, self.n);
        self.with_beta_c(-min.value)
    }

    pub fn is_zero(&self) -> bool {
        [
            &self.beta_c,
            &self.alpha,
            &self.beta,
            &self.gamma,
            &self.delta,
            &self.epsilon,
        ]
        .iter()
        .all(|c| c.is_zero())
    }
}

impl fmt::Display for BellInequality {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "n={}: {} + ({})S0 + ({})S1 + ({})/2 S00 + ({})S01 + ({})/2 S11 >= 0",
            self.n,
            to_exact_string(&self.beta_c),
            to_exact_string(&self.alpha),
            to_exact_string(&self.beta),
            to_exact_string(&self.gamma),
            to_exact_string(&self.delta),
            to_exact_string(&self.epsilon)
        )
    }
}

/// Swapping the outcomes of every measurement maps `(S0, S1) -> (-S0, -S1)` and leaves
/// the two-body terms unchanged, so `(α, β) -> (-α, -β)` gives an equally valid inequality
/// with the same `β_c`.
pub fn relabel_outcomes(ineq: &BellInequality) -> BellInequality {
    BellInequality {
        alpha: -ineq.alpha.clone(),
        beta: -ineq.beta.clone(),
        ..ineq.clone()
    }
}

/// Cap on `n` for the construction-time cross-check in debug builds.
const DEBUG_VALIDATION_MAX_N: u64 = 200;

fn debug_validate(ineq: &BellInequality) {
    if cfg!(debug_assertions) && ineq.n <= DEBUG_VALIDATION_MAX_N {
        let min = polytope::minimize_over_polytope(ineq, ineq.n);
        debug_assert_eq!(-min.value, ineq.beta_c, "classical bound mismatch for {ineq}");
    }
}

/// The coprime family is always valid, but for a few parameter choices at very small `n`
/// no vertex reaches the closed-form bound.
fn debug_validate_class(ineq: &BellInequality) {
    if cfg!(debug_assertions) && ineq.n <= DEBUG_VALIDATION_MAX_N {
        let min = -polytope::minimize_over_polytope(ineq, ineq.n).value;
        debug_assert!(min <= ineq.beta_c, "closed-form bound is violated for {ineq}");
        if min != ineq.beta_c {
            log::warn!(
                "closed-form bound of {ineq} is not tangent (exact bound {})",
                to_exact_string(&min)
            );
        }
    }
}

/// Member of the coprime family with closed-form bound
/// `β_c = [n(x+y)² + (σμ ± x)² - 1] / 2`.
pub fn generate_class(p: ClassParams, n: u64) -> Result<BellInequality, InequalityError> {
    p.validate(n)?;
    let ineq = class_unchecked(p, n);
    debug_validate_class(&ineq);
    Ok(ineq)
}

fn class_unchecked(p: ClassParams, n: u64) -> BellInequality {
    let (x, y, mu) = (BigInt::from(p.x), BigInt::from(p.y), BigInt::from(p.mu));
    let sigma = BigInt::from(p.sigma.value());
    let pm = BigInt::from(p.branch.value());
    let nn = BigInt::from(n);
    let s_mu = &sigma * &mu;
    let alpha = &x * (&s_mu + &pm * (&x + &y));
    let beta = &mu * &y;
    let gamma = &x * &x;
    let delta = &sigma * &x * &y;
    let epsilon = &y * &y;
    let shifted = &s_mu + &pm * &x;
    let twice_bound = &nn * (&x + &y) * (&x + &y) + &shifted * &shifted - 1;
    let q = BigRational::from_integer;
    BellInequality {
        n,
        beta_c: BigRational::new(twice_bound, BigInt::from(2)),
        alpha: q(alpha),
        beta: q(beta),
        gamma: q(gamma),
        delta: q(delta),
        epsilon: q(epsilon),
    }
}

/// Strategy-tuple coordinates `(r, s, t, u)` for each `(σ, ±)`. `r` is the coordinate
/// that must vanish on saturating vertices; the entries give its position in `(a, b, c, d)`.
fn renaming(sigma: Sign, branch: Sign) -> [usize; 4] {
    match (sigma, branch) {
        (Sign::Plus, Sign::Plus) => [1, 0, 3, 2],
        (Sign::Plus, Sign::Minus) => [2, 3, 0, 1],
        (Sign::Minus, Sign::Plus) => [0, 1, 2, 3],
        (Sign::Minus, Sign::Minus) => [3, 2, 1, 0],
    }
}

fn from_renamed(order: [usize; 4], rstu: [u64; 4]) -> StrategyTuple {
    let mut abcd = [0u64; 4];
    for (slot, value) in order.into_iter().zip(rstu) {
        abcd[slot] = value;
    }
    StrategyTuple::new(abcd[0], abcd[1], abcd[2], abcd[3])
}

/// `x·S0 + σ y·S1 + σμ ± x` at a tuple. The family satisfies
/// `2(linear + β_c) = L² + 8xy·r - 1`, so a vertex saturates iff `r = 0` and `L = ±1`.
pub fn class_linear_form(p: ClassParams, t: &StrategyTuple) -> i64 {
    let s = polytope::phi(t);
    let (x, y, mu) = (p.x as i64, p.y as i64, p.mu as i64);
    x * s.s0 + p.sigma.value() * y * s.s1 + p.sigma.value() * mu + p.branch.value() * x
}

/// The tuple coordinate `r` appearing in the quadratic identity.
pub fn class_r(p: ClassParams, t: &StrategyTuple) -> u64 {
    t.as_array()[renaming(p.sigma, p.branch)[0]]
}

/// Per-`τ` data of the Diophantine construction.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ZigZag {
    pub tau: i64,
    /// Right-hand side of `x·s - y·t = K`; `None` when the parity makes it non-integral.
    pub k: Option<i64>,
    pub s0: i64,
    pub t0: i64,
    pub u0: i64,
    pub count: u64,
}

/// Saturating vertices of a family member.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SaturatingVertices {
    pub count: u64,
    pub branches: Vec<ZigZag>,
    /// All saturating tuples, lexicographic.
    pub vertices: Vec<StrategyTuple>,
}

/// Modular inverse of `a` mod `m` (`m ≥ 1`), with the inverse mod 1 taken as 0.
pub fn mod_inverse(a: i64, m: i64) -> Option<i64> {
    if m == 1 {
        return Some(0);
    }
    let g = a.extended_gcd(&m);
    (g.gcd == 1).then(|| g.x.rem_euclid(m))
}

/// Counts and lists the saturating vertices by solving, for `τ = ±1`, the linear
/// Diophantine equation `L = τ` on the facet `r = 0`. Writing `u = n - s - t` it reduces
/// to `x·s - y·t = K(τ)`. The minimal solution has `t₀ = -y⁻¹K mod x`, and the full set
/// is `(s₀, t₀, u₀) + k(y, x, -(x+y))` for `k` keeping every coordinate nonnegative.
pub fn count_saturating_vertices(p: ClassParams, n: u64) -> Result<SaturatingVertices, InequalityError> {
    p.validate(n)?;
    let order = renaming(p.sigma, p.branch);
    let (x, y) = (p.x as i64, p.y as i64);
    let ni = n as i64;
    // L restricted to r = 0 is affine in (s, t): L = l0 + ls·s + lt·t.
    let at = |s: u64, t: u64| class_linear_form(p, &from_renamed(order, [0, s, t, n - s - t]));
    let l0 = at(0, 0);
    let (ls, lt) = if n >= 1 {
        (at(1, 0) - l0, at(0, 1) - l0)
    } else {
        (2 * x, -2 * y)
    };
    // the renaming makes the coefficients ±(2x, -2y); fold the sign into K
    let orient = ls.signum();
    assert_eq!(
        (ls, lt),
        (orient * 2 * x, -orient * 2 * y),
        "renaming table inconsistent"
    );
    let y_inv = mod_inverse(y.rem_euclid(x), x).ok_or(InequalityError::NotCoprime { x: p.x, y: p.y })?;

    let mut branches = Vec::with_capacity(2);
    let mut vertices = Vec::new();
    for tau in [-1i64, 1] {
        let rhs = tau - l0;
        if rhs.rem_euclid(2) != 0 {
            branches.push(ZigZag {
                tau,
                k: None,
                s0: 0,
                t0: 0,
                u0: 0,
                count: 0,
            });
            continue;
        }
        let k = orient * rhs / 2;
        let t0 = (-(y_inv as i128) * k as i128).rem_euclid(x as i128) as i64;
        let s0 = (k + y * t0) / x;
        debug_assert_eq!(x * s0 - y * t0, k);
        let u0 = ni - s0 - t0;
        let k_lo = if s0 >= 0 { 0 } else { (-s0 + y - 1) / y };
        let k_hi = if u0 >= 0 { u0 / (x + y) } else { -1 };
        let count = (k_hi - k_lo + 1).max(0) as u64;
        for step in k_lo..=k_hi {
            let s = s0 + step * y;
            let t = t0 + step * x;
            let u = u0 - step * (x + y);
            vertices.push(from_renamed(order, [0, s as u64, t as u64, u as u64]));
        }
        branches.push(ZigZag {
            tau,
            k: Some(k),
            s0,
            t0,
            u0,
            count,
        });
    }
    vertices.sort();
    vertices.dedup();
    let count = branches.iter().map(|b| b.count).sum();
    Ok(SaturatingVertices {
        count,
        branches,
        vertices,
    })
}

/// Tightness verdict from the affine rank of the saturating vertices.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Tightness {
    pub tight: bool,
    pub affine_rank: usize,
    pub saturating: Vec<StrategyTuple>,
}

/// A valid inequality is tight when its saturating vertices span a 4-dimensional affine
/// subspace of correlator space.
pub fn is_tight(ineq: &BellInequality) -> Result<Tightness, InequalityError> {
    let PolytopeMinimum { value, argmin } = polytope::minimize_over_polytope(ineq, ineq.n);
    let target = -ineq.beta_c.clone();
    if value > target {
        return Err(InequalityError::NoSaturatingVertex);
    }
    if value < target {
        return Err(InequalityError::NotValid {
            min: to_exact_string(&value),
        });
    }
    let points: Vec<[BigInt; 5]> = argmin
        .iter()
        .map(|t| polytope::phi(t).as_array().map(BigInt::from))
        .collect();
    let affine_rank = rational::affine_rank(&points);
    Ok(Tightness {
        tight: affine_rank == 4,
        affine_rank,
        saturating: argmin,
    })
}

/// Low-excitation Dicke family, valid for `0 ≤ k ≤ (n-1)/2`.
pub fn dicke_low_k_inequality(n: u64, k: u64) -> Result<BellInequality, InequalityError> {
    if n == 0 || 2 * k > n.saturating_sub(1) {
        return Err(InequalityError::OutOfRange {
            what: "k",
            detail: format!("need 0 <= k <= (n-1)/2, got n={n}, k={k}"),
        });
    }
    let (ni, ki) = (n as i64, k as i64);
    let odd = 1 + 2 * ki;
    let gap = ni - 2 * ki - 1;
    let ineq = BellInequality::from_integers(n, [odd * (gap * gap + ni - 1), odd * gap, odd * gap, ki, ki + 1, ki]);
    debug_validate(&ineq);
    Ok(ineq)
}

/// Mid-excitation Dicke family with `ν = ⌊n/2⌋ - k`, for `0 ≤ k ≤ ⌊n/2⌋`.
pub fn dicke_mid_k_inequality(n: u64, k: u64) -> Result<BellInequality, InequalityError> {
    if n < 2 || k > n / 2 {
        return Err(InequalityError::OutOfRange {
            what: "k",
            detail: format!("need 0 <= k <= n/2, got n={n}, k={k}"),
        });
    }
    Ok(dicke_mid_nu(n, n / 2 - k))
}

/// The mid family parametrised directly by `ν ≥ 0`.
pub fn dicke_mid_nu(n: u64, nu: u64) -> BellInequality {
    let (ni, v) = (BigInt::from(n), BigInt::from(nu));
    let pairs = &ni * (&ni - 1u32);
    let choose2 = &pairs / 2u32;
    let (beta_c, alpha) = if n.is_multiple_of(2) {
        (&choose2 * (&ni + 2u32 * (2u32 * &v * &v + 1u32)), 2u32 * &v * &pairs)
    } else {
        (
            &choose2 * (&ni + 3u32 + 4u32 * &v * (&v + 1u32)),
            (1u32 + 2u32 * &v) * &pairs,
        )
    };
    let beta = &alpha / &ni;
    let q = BigRational::from_integer;
    let ineq = BellInequality {
        n,
        beta_c: q(beta_c),
        alpha: q(alpha),
        beta: q(beta),
        gamma: q(pairs),
        delta: q(ni),
        epsilon: int(-2),
    };
    debug_validate(&ineq);
    ineq
}

/// `(n/2 + 1)·C(n,2) + C(n,2)/2·S00 + n/2·S01 - S11/2 ≥ 0`, for even `n`.
pub fn half_filled_dicke_inequality(n: u64) -> Result<BellInequality, InequalityError> {
    if n == 0 || n % 2 == 1 {
        return Err(InequalityError::OutOfRange {
            what: "n",
            detail: format!("half-filled inequality needs even n, got {n}"),
        });
    }
    let choose2 = (n * (n - 1) / 2) as i64;
    let ineq = BellInequality::from_integers(n, [(n as i64 / 2 + 1) * choose2, 0, 0, choose2, n as i64 / 2, -1]);
    debug_validate(&ineq);
    Ok(ineq)
}

/// All valid coprime-family parameters with `x, y ≤ xy_max`, `μ ≤ mu_max`, both signs.
pub fn class_sweep(n: u64, xy_max: u64, mu_max: u64) -> Vec<ClassParams> {
    let mut out = Vec::new();
    for x in 1..=xy_max {
        for y in 1..=xy_max {
            for mu in 0..=mu_max {
                for sigma in [Sign::Plus, Sign::Minus] {
                    for branch in [Sign::Plus, Sign::Minus] {
                        let p = ClassParams {
                            x,
                            y,
                            mu,
                            sigma,
                            branch,
                        };
                        if p.validate(n).is_ok() {
                            out.push(p);
                        }
                    }
                }
            }
        }
    }
    out
}

/// Exhaustive list of boundary tuples where the inequality evaluates to exactly zero.
pub fn saturation_scan(ineq: &BellInequality) -> Vec<StrategyTuple> {
    polytope::enumerate_boundary_tuples(ineq.n)
        .into_iter()
        .filter(|t| ineq.value(&polytope::phi(t)).is_zero())
        .collect()
}

/// `|β_c|` as `f64`, used for relative comparisons.
pub fn bound_magnitude(ineq: &BellInequality) -> f64 {
    ineq.beta_c.abs().to_f64().unwrap_or(f64::INFINITY)
}
