//! Command-line arguments and the run configuration echoed into reports.

use std::collections::BTreeMap;
use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};
use mahler_core::mahler::ChainOptions;
use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Parser)]
#[command(
    name = "mahler",
    version,
    about = "Mahler volume bounds for symmetric convex bodies"
)]
pub struct Cli {
    /// Monte Carlo samples per volume
    #[arg(long, global = true, default_value_t = 200_000)]
    pub samples: u64,
    /// Seed for every random stream
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Write the report here instead of standard output
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Use Monte Carlo even when a closed-form volume exists
    #[arg(long, global = true)]
    pub force_mc: bool,
    /// Comparison constant C for the C^-n line
    #[arg(long = "c-bm", global = true)]
    pub c_bm: Option<f64>,
    /// Worker threads (reports do not depend on this)
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Boundary samples when fitting a Löwner ellipsoid
    #[arg(long, global = true, default_value_t = 512)]
    pub boundary_samples: usize,
    /// Tolerance override KEY=VALUE (repeatable); keys: identity, exact,
    /// residual, containment, pointwise, ci-factor
    #[arg(long = "tol", global = true, value_parser = parse_tolerance)]
    pub tolerances: Vec<(String, f64)>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Subcommand)]
pub enum Command {
    /// Volume of a body, exact when a closed form exists
    Volume { spec: PathBuf },
    /// Volume product s(K), Santaló check and lower bounds
    Mahler { spec: PathBuf },
    /// Verify each step of the inductive proof for a body
    VerifyChain {
        spec: PathBuf,
        /// Inner ellipsoid spec
        #[arg(long, requires = "e2")]
        e1: Option<PathBuf>,
        /// Outer ellipsoid spec
        #[arg(long, requires = "e1")]
        e2: Option<PathBuf>,
    },
    /// Corollary bound (log₂ n)^-n for a range of dimensions
    BoundTable {
        #[arg(long, default_value_t = 4)]
        n_min: usize,
        #[arg(long, default_value_t = 8)]
        n_max: usize,
    },
    /// Minimum-volume enclosing ellipsoid of a point set or a body
    Mvee {
        input: PathBuf,
        /// Treat the input as a point file (one point per line, or a JSON array)
        #[arg(long)]
        points: bool,
    },
}

pub const TOLERANCE_KEYS: [&str; 6] = [
    "identity",
    "exact",
    "residual",
    "containment",
    "pointwise",
    "ci-factor",
];

fn parse_tolerance(s: &str) -> Result<(String, f64), String> {
    let (key, value) = s
        .split_once('=')
        .ok_or_else(|| format!("expected KEY=VALUE, got '{s}'"))?;
    let key = key.trim();
    if !TOLERANCE_KEYS.contains(&key) {
        return Err(format!(
            "unknown tolerance '{key}'; expected one of {}",
            TOLERANCE_KEYS.join(", ")
        ));
    }
    let value: f64 = value
        .trim()
        .parse()
        .map_err(|_| format!("'{value}' is not a number"))?;
    if !(value >= 0.0 && value.is_finite()) {
        return Err(format!("tolerance '{key}' must be finite and non-negative"));
    }
    Ok((key.to_string(), value))
}

/// Everything that determines a report, echoed into it.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub command: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub input: Option<String>,
    pub seed: u64,
    pub samples: u64,
    pub format: Format,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub out: Option<String>,
    pub force_mc: bool,
    pub boundary_samples: usize,
    pub tolerances: BTreeMap<String, f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub e1: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub e2: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub c_bm: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_range: Option<[usize; 2]>,
    #[serde(skip_serializing_if = "std::ops::Not::not")]
    pub points: bool,
}

fn display(p: &std::path::Path) -> String {
    p.display().to_string()
}

impl RunConfig {
    pub fn from_cli(cli: &Cli) -> Self {
        let mut config = RunConfig {
            command: String::new(),
            input: None,
            seed: cli.seed,
            samples: cli.samples,
            format: cli.format,
            out: cli.out.as_deref().map(display),
            force_mc: cli.force_mc,
            boundary_samples: cli.boundary_samples,
            tolerances: cli.tolerances.iter().cloned().collect(),
            e1: None,
            e2: None,
            c_bm: cli.c_bm,
            n_range: None,
            points: false,
        };
        match &cli.command {
            Command::Volume { spec } => {
                config.command = "volume".into();
                config.input = Some(display(spec));
            }
            Command::Mahler { spec } => {
                config.command = "mahler".into();
                config.input = Some(display(spec));
            }
            Command::VerifyChain { spec, e1, e2 } => {
                config.command = "verify-chain".into();
                config.input = Some(display(spec));
                config.e1 = e1.as_deref().map(display);
                config.e2 = e2.as_deref().map(display);
            }
            Command::BoundTable { n_min, n_max } => {
                config.command = "bound-table".into();
                config.n_range = Some([*n_min, *n_max]);
            }
            Command::Mvee { input, points } => {
                config.command = "mvee".into();
                config.input = Some(display(input));
                config.points = *points;
            }
        }
        config
    }

    pub fn chain_options(&self) -> ChainOptions {
        let mut opts = ChainOptions {
            samples: self.samples,
            seed: self.seed,
            boundary_samples: self.boundary_samples,
            c_bm: self.c_bm,
            ..ChainOptions::default()
        };
        for (key, &value) in &self.tolerances {
            match key.as_str() {
                "identity" => opts.identity_tol = value,
                "exact" => opts.exact_tol = value,
                "residual" => opts.residual_tol = value,
                "containment" => opts.containment_tol = value,
                "pointwise" => opts.pointwise_slack = value,
                "ci-factor" => opts.ci_factor = value,
                _ => {}
            }
        }
        opts
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults() {
        let cli = Cli::try_parse_from(["mahler", "volume", "k.json"]).unwrap();
        let config = RunConfig::from_cli(&cli);
        assert_eq!(config.seed, 0);
        assert_eq!(config.samples, 200_000);
        assert_eq!(config.format, Format::Json);
        assert_eq!(config.command, "volume");
    }

    #[test]
    fn tolerance_overrides() {
        let cli = Cli::try_parse_from([
            "mahler",
            "verify-chain",
            "k.json",
            "--tol",
            "identity=1e-10",
            "--tol",
            "ci-factor=4",
        ])
        .unwrap();
        let opts = RunConfig::from_cli(&cli).chain_options();
        assert_eq!(opts.identity_tol, 1e-10);
        assert_eq!(opts.ci_factor, 4.0);
        assert!(Cli::try_parse_from(["mahler", "volume", "k", "--tol", "bogus=1"]).is_err());
        assert!(Cli::try_parse_from(["mahler", "volume", "k", "--tol", "exact"]).is_err());
    }

    #[test]
    fn ellipsoid_files_come_in_pairs() {
        assert!(Cli::try_parse_from(["mahler", "verify-chain", "k", "--e1", "a"]).is_err());
        assert!(
            Cli::try_parse_from(["mahler", "verify-chain", "k", "--e1", "a", "--e2", "b"]).is_ok()
        );
    }
}
