//! Subcommand implementations.

use std::fs;
use std::path::Path;

use mahler_core::bodies::spec::parse_body_spec;
use mahler_core::bodies::{Body, Ellipsoid};
use mahler_core::ellipsoids::{
    loewner_report, mvee_symmetric, LoewnerOptions, SandwichCertificate, MVEE_EPS,
};
use mahler_core::mahler::{
    bound_table, comparison_bound, corollary_bound, default_certificate, direct_bound,
    kuperberg_bound, verify_chain, volume_product_ratio, Comparison, StepRecord, CSV_COLUMNS,
    CSV_HEADER,
};
use mahler_core::volume::{estimate_volume, VolumeOptions};
use serde::Serialize;
use serde_json::{json, Value};
use thiserror::Error;

use crate::config::{Cli, Command, RunConfig};
use crate::output::{csv_number, Report};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("{file}: {source}")]
    Input {
        file: String,
        source: mahler_core::Error,
    },
    #[error("{0}")]
    Core(#[from] mahler_core::Error),
    #[error("{0}")]
    Usage(String),
}

impl CliError {
    /// Remediation advice for failures the user can work around.
    pub fn hint(&self) -> Option<&'static str> {
        let core = match self {
            CliError::Core(e) | CliError::Input { source: e, .. } => e,
            _ => return None,
        };
        match core {
            mahler_core::Error::Containment { .. } => {
                Some("the enclosing ellipsoid missed part of the body; raise --boundary-samples")
            }
            mahler_core::Error::MonteCarlo(_) => {
                Some("rejection sampling is too inefficient here; supply a tighter envelope (--e1/--e2) or a lower-dimensional body")
            }
            mahler_core::Error::Spec { .. } => Some("see the body spec format in the README"),
            _ => None,
        }
    }
}

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.display().to_string(),
        source,
    })
}

fn load_body(path: &Path) -> Result<Body, CliError> {
    parse_body_spec(&read(path)?).map_err(|source| CliError::Input {
        file: path.display().to_string(),
        source,
    })
}

fn load_ellipsoid(path: &Path) -> Result<Ellipsoid, CliError> {
    let body = load_body(path)?;
    body.as_ellipsoid().cloned().ok_or_else(|| {
        CliError::Usage(format!(
            "{}: expected an ellipsoid or ball spec, got {body}",
            path.display()
        ))
    })
}

fn volume_options(config: &RunConfig) -> VolumeOptions {
    VolumeOptions {
        samples: config.samples,
        seed: config.seed,
        force_mc: config.force_mc,
        boundary_samples: config.boundary_samples,
    }
}

fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("result serializes")
}

pub fn run(cli: &Cli) -> Result<Report, CliError> {
    let config = RunConfig::from_cli(cli);
    match &cli.command {
        Command::Volume { spec } => cmd_volume(&load_body(spec)?, config),
        Command::Mahler { spec } => cmd_mahler(&load_body(spec)?, config),
        Command::VerifyChain { spec, e1, e2 } => {
            let cert = match (e1, e2) {
                (Some(a), Some(b)) => Some(SandwichCertificate::new(
                    load_ellipsoid(a)?,
                    load_ellipsoid(b)?,
                )?),
                (None, None) => None,
                _ => {
                    return Err(CliError::Usage(
                        "--e1 and --e2 must be given together".into(),
                    ))
                }
            };
            cmd_verify_chain(&load_body(spec)?, cert, config)
        }
        Command::BoundTable { n_min, n_max } => cmd_bound_table(*n_min, *n_max, config),
        Command::Mvee { input, points } => {
            if *points {
                cmd_mvee_points(&parse_points(&read(input)?)?, config)
            } else {
                cmd_mvee_body(&load_body(input)?, config)
            }
        }
    }
}

pub fn cmd_volume(k: &Body, config: RunConfig) -> Result<Report, CliError> {
    let v = estimate_volume(k, &volume_options(&config))?;
    let mut result = to_value(&v);
    result["body"] = json!(k.to_string());
    result["dim"] = json!(k.dim());
    let row = format!(
        "{},{},{},{},{}",
        csv_number(Some(v.value)),
        csv_number(Some(v.ci95)),
        to_value(&v.method).as_str().unwrap_or_default(),
        v.samples,
        v.seed.map(|s| s.to_string()).unwrap_or_default()
    );
    Ok(Report {
        header: "# mahler-volume v1".into(),
        config,
        result,
        csv: vec!["value,ci95,method,samples,seed".into(), row],
        pass: true,
    })
}

pub fn cmd_mahler(k: &Body, config: RunConfig) -> Result<Report, CliError> {
    let n = k.dim();
    let ratio = volume_product_ratio(k, &volume_options(&config))?;
    let tol = 3.0 * ratio.sigma() + 1e-12 * ratio.s;
    let mut checks = vec![StepRecord::new(
        0,
        "santalo: s(K) <= 1",
        Comparison::AtMost,
        ratio.s,
        1.0,
        tol,
    )
    .with_ci(ratio.ci95)];
    let mut result = json!({
        "body": k.to_string(),
        "dim": n,
        "s": ratio.s,
        "ci95": ratio.ci95,
        "volume": to_value(&ratio.volume),
        "polar_volume": to_value(&ratio.polar_volume),
    });
    match default_certificate(k) {
        Ok(cert) => {
            let r = cert.ratio_r;
            let (bound, kind) = if r >= 2.0 {
                (kuperberg_bound(r, n)?, "kuperberg")
            } else {
                (direct_bound(r.max(1.0), n)?, "direct")
            };
            result["sandwich_r"] = json!(r);
            result["bound"] = json!(bound);
            result["bound_kind"] = json!(kind);
            if let Some(note) = &cert.note {
                result["sandwich_note"] = json!(note);
            }
            checks.push(
                StepRecord::new(
                    0,
                    "bound: s(K) >= bound(r)",
                    Comparison::AtLeast,
                    ratio.s,
                    bound,
                    tol,
                )
                .with_ci(ratio.ci95),
            );
        }
        Err(e) => checks.push(StepRecord::failed(0, "john sandwich", e.to_string())),
    }
    if n >= 4 {
        let c = corollary_bound(n)?;
        result["corollary_bound"] = json!(c);
        checks.push(
            StepRecord::new(
                0,
                "bound: s(K) >= (log2 n)^-n",
                Comparison::AtLeast,
                ratio.s,
                c,
                tol,
            )
            .with_ci(ratio.ci95),
        );
    }
    if let Some(c) = config.c_bm {
        result["comparison_bound"] = json!(comparison_bound(c, n)?);
    }
    let pass = checks.iter().all(|c| c.pass);
    result["checks"] = to_value(&checks);
    let mut csv = vec![CSV_COLUMNS.to_string()];
    csv.extend(checks.iter().map(StepRecord::csv_row));
    Ok(Report {
        header: "# mahler-mahler v1".into(),
        config,
        result,
        csv,
        pass,
    })
}

pub fn cmd_verify_chain(
    k: &Body,
    cert: Option<SandwichCertificate>,
    config: RunConfig,
) -> Result<Report, CliError> {
    let report = verify_chain(k, cert, &config.chain_options())?;
    let csv: Vec<String> = report.to_csv().lines().skip(1).map(String::from).collect();
    let mut result = report.to_json_value();
    result["body"] = json!(k.to_string());
    Ok(Report {
        header: CSV_HEADER.into(),
        config,
        result,
        csv,
        pass: report.pass,
    })
}

pub fn cmd_bound_table(n_min: usize, n_max: usize, config: RunConfig) -> Result<Report, CliError> {
    if n_min > n_max {
        return Err(CliError::Usage(format!(
            "--n-min {n_min} exceeds --n-max {n_max}"
        )));
    }
    let rows = bound_table(n_min, n_max, config.c_bm)?;
    let mut csv = vec!["n,corollary_bound,comparison_bound".to_string()];
    csv.extend(rows.iter().map(|r| {
        format!(
            "{},{},{}",
            r.n,
            csv_number(Some(r.corollary)),
            csv_number(r.comparison)
        )
    }));
    Ok(Report {
        header: "# mahler-bound-table v1".into(),
        config,
        result: json!({ "rows": rows }),
        csv,
        pass: true,
    })
}

/// Points as a JSON array of arrays, or one point per line (whitespace or
/// comma separated, `#` comments).
pub fn parse_points(text: &str) -> Result<Vec<Vec<f64>>, CliError> {
    let points: Vec<Vec<f64>> = if text.trim_start().starts_with('[') {
        serde_json::from_str(text).map_err(|e| CliError::Usage(format!("point file: {e}")))?
    } else {
        let mut points = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let point = line
                .split(|c: char| c == ',' || c.is_whitespace())
                .filter(|t| !t.is_empty())
                .map(|t| {
                    t.parse::<f64>().map_err(|_| {
                        CliError::Usage(format!("point file line {}: '{t}' is not a number", i + 1))
                    })
                })
                .collect::<Result<Vec<_>, _>>()?;
            points.push(point);
        }
        points
    };
    let n = points.first().map(Vec::len).unwrap_or(0);
    if n == 0 {
        return Err(CliError::Usage("point file has no points".into()));
    }
    if let Some(i) = points.iter().position(|p| p.len() != n) {
        return Err(CliError::Usage(format!(
            "point {} has {} coordinates, expected {n}",
            i + 1,
            points[i].len()
        )));
    }
    Ok(points)
}

fn ellipsoid_rows(e: &Ellipsoid) -> Vec<String> {
    let mut csv =
        vec!["row".to_string() + &(0..e.dim()).map(|j| format!(",m{j}")).collect::<String>()];
    for (i, row) in e.form().to_rows().iter().enumerate() {
        csv.push(
            i.to_string()
                + &row
                    .iter()
                    .map(|v| format!(",{}", csv_number(Some(*v))))
                    .collect::<String>(),
        );
    }
    csv
}

fn semi_axes(e: &Ellipsoid) -> Vec<f64> {
    let mut axes: Vec<f64> = e
        .form()
        .eigen()
        .values
        .iter()
        .map(|l| 1.0 / l.sqrt())
        .collect();
    axes.sort_by(|a, b| b.total_cmp(a));
    axes
}

pub fn cmd_mvee_points(points: &[Vec<f64>], config: RunConfig) -> Result<Report, CliError> {
    let m = mvee_symmetric(points, MVEE_EPS)?;
    let result = json!({
        "matrix": m.ellipsoid.form().to_rows(),
        "semi_axes": semi_axes(&m.ellipsoid),
        "volume": m.ellipsoid.volume(),
        "iterations": m.iterations,
        "violation": m.violation,
        "converged": m.converged,
    });
    Ok(Report {
        header: "# mahler-mvee v1".into(),
        csv: ellipsoid_rows(&m.ellipsoid),
        config,
        result,
        pass: m.converged,
    })
}

pub fn cmd_mvee_body(k: &Body, config: RunConfig) -> Result<Report, CliError> {
    let opts = LoewnerOptions {
        boundary_samples: config.boundary_samples,
        seed: config.seed,
        ..LoewnerOptions::default()
    };
    let l = loewner_report(k, &opts)?;
    let result = json!({
        "body": k.to_string(),
        "matrix": l.ellipsoid.form().to_rows(),
        "semi_axes": semi_axes(&l.ellipsoid),
        "volume": l.ellipsoid.volume(),
        "method": to_value(&l.method),
        "inflation": l.inflation,
    });
    Ok(Report {
        header: "# mahler-mvee v1".into(),
        csv: ellipsoid_rows(&l.ellipsoid),
        config,
        result,
        pass: true,
    })
}
