use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

#[derive(Debug, Parser)]
#[command(
    name = "symbell",
    version,
    about = "Permutationally invariant two-body Bell inequalities: vertices, classical bounds, quantum violations",
    after_help = "Environment:\n  SYMBELL_OUTPUT_DIR  directory for relative --out paths"
)]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args, Serialize)]
pub struct GlobalArgs {
    /// Output format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    /// Output file; stdout when absent. Relative paths resolve against $SYMBELL_OUTPUT_DIR if set.
    #[arg(long, global = true, value_name = "PATH")]
    pub out: Option<PathBuf>,
    /// key=value file supplying defaults for any flag; explicit flags win.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,
    /// Assert deterministic output. Every algorithm is deterministic, so this only records the
    /// assertion in the provenance header.
    #[arg(long, global = true)]
    pub deterministic: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// List the 2(n²+1) vertices of the symmetric two-body polytope.
    Vertices(VerticesArgs),
    /// Exact classical bound, saturating vertices and tightness of an inequality.
    Bound(BoundArgs),
    /// Maximal quantum violation of one inequality.
    Violate(ViolateArgs),
    /// Violation over a range of n, or over k for the Dicke families.
    Scan(ScanArgs),
    /// Robustness of the two case studies against visibility and offset errors.
    Robust(RobustArgs),
    /// Brute-force cross-checks against dense 2^n computations.
    Oracle(OracleArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Vertices(_) => "vertices",
            Command::Bound(_) => "bound",
            Command::Violate(_) => "violate",
            Command::Scan(_) => "scan",
            Command::Robust(_) => "robust",
            Command::Oracle(_) => "oracle",
        }
    }
}

#[derive(Debug, Args, Serialize)]
pub struct VerticesArgs {
    /// Number of parties.
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    pub n: u64,
}

/// Which inequality to work with.
#[derive(Debug, Args, Serialize, Default)]
#[group(multiple = false)]
pub struct Target {
    /// 2n - 2S0 + S00/2 - S01 + S11/2 ≥ 0.
    #[arg(long)]
    pub example: bool,
    /// The all-zero functional.
    #[arg(long)]
    pub zero: bool,
    /// Coprime family member, e.g. x=1,y=1,mu=0,sigma=-1,branch=-.
    #[arg(long, value_name = "PARAMS")]
    pub class: Option<String>,
    /// Low-excitation Dicke family (needs --k).
    #[arg(long)]
    pub dicke_low: bool,
    /// Mid-excitation Dicke family (needs --k).
    #[arg(long)]
    pub dicke_mid: bool,
    /// Half-filled Dicke inequality (even n).
    #[arg(long)]
    pub half_dicke: bool,
    /// alpha,beta,gamma,delta,epsilon (β_c computed exactly) or beta_c,alpha,…,epsilon.
    /// Entries are integers, decimals or p/q.
    #[arg(long, value_name = "LIST", allow_hyphen_values = true)]
    pub coeffs: Option<String>,
    /// JSON inequality record {n, beta_c, alpha, beta, gamma, delta, epsilon}.
    #[arg(long, value_name = "FILE")]
    pub ineq: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct BoundArgs {
    #[command(flatten)]
    pub target: Target,
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    pub n: Option<u64>,
    /// Excitation number for the Dicke families.
    #[arg(long)]
    pub k: Option<u64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Blocks {
    Symmetric,
    All,
}

#[derive(Debug, Args, Serialize)]
pub struct ViolateArgs {
    /// With a Dicke family the Dicke state is fixed and only the angles are optimised.
    #[command(flatten)]
    pub target: Target,
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    pub n: Option<u64>,
    #[arg(long)]
    pub k: Option<u64>,
    /// Schur–Weyl blocks searched by the eigensolver.
    #[arg(long, value_enum, default_value_t = Blocks::Symmetric)]
    pub blocks: Blocks,
    /// Angle grid size (default 720, or 360 per axis for Dicke states).
    #[arg(long)]
    pub grid: Option<usize>,
    /// Include the optimal state's coefficients in JSON output.
    #[arg(long)]
    pub state: bool,
    /// Run on one thread.
    #[arg(long)]
    pub sequential: bool,
}

#[derive(Debug, Args, Serialize)]
pub struct ScanArgs {
    #[command(flatten)]
    pub target: Target,
    /// Both Dicke classes at every k, reporting the better one.
    #[arg(long, conflicts_with_all = ["example", "zero", "class", "dicke_low", "dicke_mid", "half_dicke", "coeffs", "ineq"])]
    pub dicke_both: bool,
    /// Party counts as lo:hi, lo:hi:step or lo:hi:log. Dicke scans take a single n.
    #[arg(long, value_name = "RANGE")]
    pub n: String,
    /// Excitation numbers for Dicke scans as lo:hi[:step]; default 1:n-1.
    #[arg(long, value_name = "RANGE")]
    pub k: Option<String>,
    /// Number of points of a log range.
    #[arg(long, default_value_t = 25)]
    pub points: usize,
    #[arg(long, value_enum, default_value_t = Blocks::Symmetric)]
    pub blocks: Blocks,
    #[arg(long)]
    pub grid: Option<usize>,
    #[arg(long)]
    pub sequential: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum CaseStudy {
    HalfDicke,
    Gaussian,
    GaussianClosedForm,
}

#[derive(Debug, Args, Serialize)]
#[group(required = true, multiple = false, id = "case")]
pub struct CaseFlags {
    /// Half-filled Dicke state against its inequality.
    #[arg(long)]
    pub half_dicke: bool,
    /// Optimal Gaussian state against the example inequality.
    #[arg(long)]
    pub gaussian: bool,
    /// The example inequality with the large-n Gaussian moments.
    #[arg(long)]
    pub gaussian_closed_form: bool,
}

impl CaseFlags {
    pub fn case(&self) -> CaseStudy {
        if self.half_dicke {
            CaseStudy::HalfDicke
        } else if self.gaussian {
            CaseStudy::Gaussian
        } else {
            CaseStudy::GaussianClosedForm
        }
    }
}

#[derive(Debug, Args, Serialize)]
pub struct RobustArgs {
    #[command(flatten)]
    pub case: CaseFlags,
    #[arg(long, default_value_t = 8000, value_parser = clap::value_parser!(u64).range(2..))]
    pub n: u64,
    /// Visibilities in (0, 1], comma separated.
    #[arg(long, value_name = "LIST", default_value = "1", value_parser = parse_etas)]
    pub eta: Etas,
    /// Offsets as lo:hi or lo:hi:steps (100 steps by default).
    #[arg(long, value_name = "RANGE", default_value = "0:2000")]
    pub kappa: String,
    #[arg(long)]
    pub sequential: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(transparent)]
pub struct Etas(pub Vec<f64>);

fn parse_etas(s: &str) -> Result<Etas, String> {
    let etas = s
        .split(',')
        .map(|p| {
            let v: f64 = p.trim().parse().map_err(|e| format!("`{p}`: {e}"))?;
            if v > 0.0 && v <= 1.0 {
                Ok(v)
            } else {
                Err(format!("visibility {v} outside (0, 1]"))
            }
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(Etas(etas))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Check {
    /// Block spectrum against the dense operator.
    Spectrum,
    /// Dense operator projected onto the block bases.
    Blocks,
    /// Convex-hull extreme points against the boundary image.
    Hull,
    /// Boundary minimum against every tuple and every deterministic strategy.
    Bound,
    /// Half-filled Dicke collective moments.
    Moments,
    /// GHZ expectation against the classical mixture.
    Ghz,
}

#[derive(Debug, Args, Serialize)]
pub struct OracleArgs {
    pub check: Check,
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    pub n: u64,
    /// Inequality for spectrum, blocks, bound and ghz; the example by default.
    #[command(flatten)]
    pub target: Target,
    #[arg(long)]
    pub k: Option<u64>,
    /// First measurement angle in units of π.
    #[arg(long, default_value_t = 0.17, allow_hyphen_values = true)]
    pub phi: f64,
    /// Second measurement angle in units of π.
    #[arg(long, default_value_t = 0.83, allow_hyphen_values = true)]
    pub theta: f64,
}
