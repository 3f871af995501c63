//! Problem ingestion from a JSON file or from command-line flags.

use std::path::PathBuf;

use clap::{Args, ValueEnum};
use hardy_core::oracle::OracleMethod;
use hardy_core::problem::{FamilySpec, Options, Problem, ProblemError, Resolved};

use crate::exit;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FamilyName {
    Geometric,
    Bliss,
    Constant,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MethodName {
    #[value(alias = "fixed_point")]
    FixedPoint,
    Ascent,
    #[value(alias = "eigen_p2q2")]
    EigenP2q2,
}

impl From<MethodName> for OracleMethod {
    fn from(m: MethodName) -> Self {
        match m {
            MethodName::FixedPoint => OracleMethod::FixedPoint,
            MethodName::Ascent => OracleMethod::Ascent,
            MethodName::EigenP2q2 => OracleMethod::EigenP2q2,
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct ProblemArgs {
    /// JSON problem file.
    #[arg(conflicts_with = "family")]
    pub file: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub family: Option<FamilyName>,
    #[arg(long)]
    pub p: Option<f64>,
    #[arg(long)]
    pub q: Option<f64>,
    /// Truncation.
    #[arg(long = "N")]
    pub n: Option<usize>,
    /// Geometric ratio.
    #[arg(long)]
    pub gamma: Option<f64>,
    /// Geometric scale of `v`.
    #[arg(long)]
    pub b: Option<f64>,
    /// Bliss extremal scale.
    #[arg(long)]
    pub c: Option<f64>,
    /// Bliss extremal spread.
    #[arg(long)]
    pub d: Option<f64>,
    /// Constant value of `u`.
    #[arg(long = "u-const")]
    pub u_const: Option<f64>,
    /// Constant value of `v`.
    #[arg(long = "v-const")]
    pub v_const: Option<f64>,
}

#[derive(Debug, Clone, Args)]
pub struct OptionFlags {
    /// Number of refinement steps.
    #[arg(long)]
    pub m: Option<usize>,
    /// Early-stop tolerance of the upper sequence.
    #[arg(long)]
    pub tol: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub restarts: Option<usize>,
    #[arg(long, value_enum)]
    pub method: Option<MethodName>,
    /// Weight the inner sum of the lower iteration by `u`.
    #[arg(long)]
    pub weighted_inner_sum: bool,
}

/// A failed command: message for stderr and the process exit status.
#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub message: String,
}

impl Failure {
    pub fn parse(message: impl Into<String>) -> Self {
        Self {
            code: exit::PARSE,
            message: message.into(),
        }
    }

    pub fn runtime(message: impl Into<String>) -> Self {
        Self {
            code: 1,
            message: message.into(),
        }
    }
}

impl From<hardy_core::HardyError> for Failure {
    fn from(err: hardy_core::HardyError) -> Self {
        Failure::runtime(err.to_string())
    }
}

fn problem_error(source: &str, err: ProblemError) -> Failure {
    Failure::parse(format!("{source}: {err}"))
}

fn require<T>(value: Option<T>, flag: &str) -> Result<T, Failure> {
    value.ok_or_else(|| Failure::parse(format!("missing required flag --{flag}")))
}

impl ProblemArgs {
    fn to_problem(&self) -> Result<(Problem, String), Failure> {
        if let Some(path) = &self.file {
            let source = path.display().to_string();
            let text = std::fs::read_to_string(path)
                .map_err(|err| Failure::parse(format!("{source}: {err}")))?;
            let problem = Problem::from_json_str(&text).map_err(|err| problem_error(&source, err))?;
            return Ok((problem, source));
        }
        let family = match require(self.family, "family")? {
            FamilyName::Geometric => FamilySpec::Geometric {
                gamma: require(self.gamma, "gamma")?,
                b: self.b.unwrap_or(1.0),
            },
            FamilyName::Bliss => FamilySpec::Bliss {
                c: self.c.unwrap_or(1.0),
                d: self.d.unwrap_or(1e4),
            },
            FamilyName::Constant => FamilySpec::Constant {
                u: self.u_const.unwrap_or(1.0),
                v: self.v_const.unwrap_or(1.0),
            },
        };
        let problem = Problem {
            p: require(self.p, "p")?,
            q: require(self.q, "q")?,
            family: Some(family),
            u: None,
            v: None,
            n: Some(require(self.n, "N")?),
            truncation: None,
            options: Options::default(),
        };
        Ok((problem, "flags".into()))
    }

    /// The problem with command-line options layered over the file's.
    pub fn resolve(&self, flags: &OptionFlags) -> Result<Resolved, Failure> {
        let (mut problem, source) = self.to_problem()?;
        let o = &mut problem.options;
        if let Some(m) = flags.m {
            o.m = m;
        }
        if let Some(tol) = flags.tol {
            o.tol = tol;
        }
        if let Some(seed) = flags.seed {
            o.seed = seed;
        }
        if let Some(r) = flags.restarts {
            o.restarts = r;
        }
        if let Some(method) = flags.method {
            o.method = method.into();
        }
        if flags.weighted_inner_sum {
            o.weighted_inner_sum = true;
        }
        problem.resolve().map_err(|err| problem_error(&source, err))
    }
}
