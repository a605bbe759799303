//! Command-line arguments and the run configuration they resolve to.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use hyperschur::corridor::CorridorMode;
use hyperschur::providers::{ProviderKind, ProviderSpec};
use num_complex::Complex64;
use serde::Serialize;

use crate::CliError;

#[derive(Debug, Parser)]
#[command(name = "hyperschur", version, about = "Reproducible verification runs for Schur multipliers on hyperbolic graph snapshots")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Hyperbolicity constants and the thinness check.
    Profile(RunArgs),
    /// Corridor identities, the vector tables and the binomial suite.
    Verify(RunArgs),
    /// Certificates, sandwich reports, positivity checks and witnesses.
    Norms(RunArgs),
    /// All of the above in one report.
    All(RunArgs),
}

impl Command {
    pub fn parts(&self) -> (Task, &RunArgs) {
        match self {
            Command::Profile(a) => (Task::Profile, a),
            Command::Verify(a) => (Task::Verify, a),
            Command::Norms(a) => (Task::Norms, a),
            Command::All(a) => (Task::All, a),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Task {
    Profile,
    Verify,
    Norms,
    All,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Paper,
    Empirical,
}

#[derive(Debug, Clone, Args)]
#[command(group = clap::ArgGroup::new("provider").required(true).multiple(false))]
pub struct RunArgs {
    /// Edge-list file.
    #[arg(long, group = "provider", value_name = "FILE")]
    pub input: Option<PathBuf>,
    /// Ball in the free group: RANK RADIUS.
    #[arg(long, group = "provider", num_args = 2, value_names = ["RANK", "RADIUS"])]
    pub free_group: Option<Vec<u32>>,
    /// Regular tree: BRANCHING DEPTH.
    #[arg(long, group = "provider", num_args = 2, value_names = ["B", "D"])]
    pub tree: Option<Vec<u32>>,
    /// Path on N+1 vertices.
    #[arg(long, group = "provider", value_name = "N")]
    pub line: Option<u32>,
    /// Cycle on N vertices.
    #[arg(long, group = "provider", value_name = "N")]
    pub cycle: Option<u32>,
    /// Extra vertices appended to the far end of the base geodesic.
    #[arg(long, default_value_t = 0)]
    pub ray_extension: u32,

    #[arg(long, value_enum, default_value_t = ModeArg::Empirical)]
    pub mode: ModeArg,
    /// Corridor width override.
    #[arg(long)]
    pub rho: Option<f64>,
    /// Overlap window override.
    #[arg(long)]
    pub r1: Option<u32>,
    /// Points in the unit disc: `0.5`, `-0.7`, `0.3+0.4i`, `0.9i`, or
    /// modulus@degrees such as `0.9@45`.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, default_value = "0.3,0.6,0.9")]
    pub z: Vec<String>,
    /// Sphere radii.
    #[arg(long, value_delimiter = ',', default_value = "0,1,2,3,4,5")]
    pub n: Vec<u32>,
    /// Number of schedule steps for the witness functions.
    #[arg(long, default_value_t = 4)]
    pub schedule: u32,
    /// Truncation tolerance for the kernel series.
    #[arg(long, default_value_t = 1e-9)]
    pub tol: f64,
    /// Bisection width for the semidefinite solver.
    #[arg(long, default_value_t = 1e-7)]
    pub sdp_tol: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Largest kernel section handed to the semidefinite solver.
    #[arg(long, default_value_t = 32)]
    pub section_cap: usize,
    /// Sample this many triangles and quadruples instead of enumerating.
    #[arg(long)]
    pub sample_budget: Option<usize>,
    /// Cores larger than this are profiled by sampling.
    #[arg(long, default_value_t = 170)]
    pub exact_profile_cap: usize,
    /// Output directory for report.json and the CSV tables.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Everything a run depends on; echoed verbatim into the report.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub task: Task,
    pub provider: ProviderSpec,
    pub mode: CorridorMode,
    pub rho: Option<f64>,
    pub r1: Option<u32>,
    pub z: Vec<Complex64>,
    pub n: Vec<u32>,
    pub schedule: u32,
    /// Largest index `n` scanned by the identity checks.
    pub n_max: u32,
    pub tol: f64,
    pub sdp_tol: f64,
    pub seed: u64,
    pub section_cap: usize,
    pub sample_budget: Option<usize>,
    pub exact_profile_cap: usize,
    #[serde(skip)]
    pub out: Option<PathBuf>,
}

impl RunConfig {
    pub fn new(task: Task, provider: ProviderSpec) -> Self {
        RunConfig {
            task,
            provider,
            mode: CorridorMode::Empirical,
            rho: None,
            r1: None,
            z: vec![0.3, 0.6, 0.9].into_iter().map(|r| Complex64::new(r, 0.0)).collect(),
            n: (0..=5).collect(),
            schedule: 4,
            n_max: 5,
            tol: 1e-9,
            sdp_tol: 1e-7,
            seed: 0,
            section_cap: 32,
            sample_budget: None,
            exact_profile_cap: 170,
            out: None,
        }
    }

    pub fn from_args(task: Task, a: &RunArgs) -> Result<Self, CliError> {
        let kind = if let Some(path) = &a.input {
            ProviderKind::EdgeListFile { path: path.clone() }
        } else if let Some(v) = &a.free_group {
            ProviderKind::FreeGroup { rank: v[0], radius: v[1] }
        } else if let Some(v) = &a.tree {
            ProviderKind::RegularTree { branching: v[0], depth: v[1] }
        } else if let Some(n) = a.line {
            ProviderKind::Line { n }
        } else if let Some(n) = a.cycle {
            ProviderKind::Cycle { n }
        } else {
            return Err(CliError::Config("no graph provider selected".into()));
        };
        let z = a.z.iter().map(|s| parse_complex(s)).collect::<Result<Vec<_>, _>>()?;
        let n_max = a.n.iter().copied().max().unwrap_or(0).max(1);
        let cfg = RunConfig {
            task,
            provider: ProviderSpec::new(kind).with_ray_extension(a.ray_extension),
            mode: match a.mode {
                ModeArg::Paper => CorridorMode::Paper,
                ModeArg::Empirical => CorridorMode::Empirical,
            },
            rho: a.rho,
            r1: a.r1,
            z,
            n: a.n.clone(),
            schedule: a.schedule,
            n_max,
            tol: a.tol,
            sdp_tol: a.sdp_tol,
            seed: a.seed,
            section_cap: a.section_cap,
            sample_budget: a.sample_budget,
            exact_profile_cap: a.exact_profile_cap,
            out: a.out.clone(),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let bad = |msg: String| Err(CliError::Config(msg));
        if !(self.tol > 0.0) || !(self.sdp_tol > 0.0) {
            return bad(format!("tolerances must be positive (tol {}, sdp-tol {})", self.tol, self.sdp_tol));
        }
        if let Some(z) = self.z.iter().find(|z| !(z.norm() < 1.0)) {
            return bad(format!("z = {z} is not inside the unit disc"));
        }
        if let Some(rho) = self.rho {
            if !(rho > 0.0 && rho.is_finite()) {
                return bad(format!("rho must be positive, got {rho}"));
            }
        }
        if self.section_cap == 0 || self.section_cap > 64 {
            return bad(format!("section cap must be in 1..=64, got {}", self.section_cap));
        }
        Ok(())
    }
}

/// Parses `a`, `bi`, `a+bi`, `a-bi` or `r@deg`.
pub fn parse_complex(s: &str) -> Result<Complex64, CliError> {
    let err = || CliError::Config(format!("cannot parse {s:?} as a complex number"));
    let t: String = s.chars().filter(|c| !c.is_whitespace()).collect();
    if let Some((r, deg)) = t.split_once('@') {
        let r: f64 = r.parse().map_err(|_| err())?;
        let deg: f64 = deg.parse().map_err(|_| err())?;
        return Ok(Complex64::from_polar(r, deg.to_radians()));
    }
    if let Some(body) = t.strip_suffix('i') {
        // The split point is the last sign that is not at the start or
        // part of an exponent.
        let bytes = body.as_bytes();
        let split = (1..bytes.len())
            .rev()
            .find(|&i| (bytes[i] == b'+' || bytes[i] == b'-') && !matches!(bytes[i - 1], b'e' | b'E'));
        let (re, im) = match split {
            Some(i) => (&body[..i], &body[i..]),
            None => ("0", body),
        };
        let im = match im {
            "" | "+" => "1",
            "-" => "-1",
            other => other,
        };
        return Ok(Complex64::new(
            re.parse().map_err(|_| err())?,
            im.trim_start_matches('+').parse().map_err(|_| err())?,
        ));
    }
    Ok(Complex64::new(t.parse().map_err(|_| err())?, 0.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn complex_forms() {
        let c = |s| parse_complex(s).unwrap();
        assert_eq!(c("0.5"), Complex64::new(0.5, 0.0));
        assert_eq!(c("-0.7"), Complex64::new(-0.7, 0.0));
        assert_eq!(c("0.3+0.4i"), Complex64::new(0.3, 0.4));
        assert_eq!(c("0.3-0.4i"), Complex64::new(0.3, -0.4));
        assert_eq!(c("0.9i"), Complex64::new(0.0, 0.9));
        assert_eq!(c("-i"), Complex64::new(0.0, -1.0));
        assert_eq!(c("1e-3+2e-1i"), Complex64::new(1e-3, 0.2));
        let p = c("0.9@45");
        assert!((p - Complex64::from_polar(0.9, std::f64::consts::FRAC_PI_4)).norm() < 1e-15);
        assert!(parse_complex("abc").is_err());
        assert!(parse_complex("0.3+xi").is_err());
    }

    #[test]
    fn args_resolve() {
        let cli = Cli::try_parse_from([
            "hyperschur", "norms", "--free-group", "2", "3", "--z", "0.5,-0.7,0.9@45", "--n", "0,2",
        ])
        .unwrap();
        let (task, args) = cli.command.parts();
        let cfg = RunConfig::from_args(task, args).unwrap();
        assert_eq!(cfg.provider.kind, ProviderKind::FreeGroup { rank: 2, radius: 3 });
        assert_eq!(cfg.z.len(), 3);
        assert_eq!(cfg.n, vec![0, 2]);
        assert!(Cli::try_parse_from(["hyperschur", "verify"]).is_err());
        assert!(Cli::try_parse_from(["hyperschur", "verify", "--line", "4", "--cycle", "5"]).is_err());
    }

    #[test]
    fn rejects_bad_values() {
        let mut cfg = RunConfig::new(Task::Verify, ProviderSpec::new(ProviderKind::Line { n: 4 }));
        cfg.tol = 0.0;
        assert!(cfg.validate().is_err());
        cfg.tol = 1e-9;
        cfg.z = vec![Complex64::new(1.0, 0.0)];
        assert!(cfg.validate().is_err());
        cfg.z.clear();
        cfg.rho = Some(-2.0);
        assert!(cfg.validate().is_err());
    }
}
