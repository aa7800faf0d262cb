//! Exact volumes for closed-form families and a seeded Monte Carlo
//! rejection estimator.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bodies::{Body, BodyKind, Ellipsoid};
use crate::ellipsoids::{loewner_report, LoewnerOptions};
use crate::error::{Error, Result};
use crate::numkernel::{ln_frac_binom, log_gamma};
use crate::ops::PExponent;

/// Samples drawn per random stream. Streams are keyed by (seed, batch), so
/// the estimate does not depend on how batches are spread over threads.
pub const BATCH: u64 = 8192;

/// Two-sided 95% normal quantile.
pub const Z95_FACTOR: f64 = 1.959_963_984_540_054;
const Z95: f64 = Z95_FACTOR;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Exact,
    MonteCarlo,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VolumeEstimate {
    pub value: f64,
    /// Half-width of the 95% confidence interval; zero for exact values.
    pub ci95: f64,
    pub method: Method,
    pub samples: u64,
    pub seed: Option<u64>,
}

impl VolumeEstimate {
    pub fn exact(value: f64) -> Self {
        VolumeEstimate {
            value,
            ci95: 0.0,
            method: Method::Exact,
            samples: 0,
            seed: None,
        }
    }

    pub fn is_exact(&self) -> bool {
        self.method == Method::Exact
    }

    /// ci95 / value.
    pub fn relative_ci(&self) -> f64 {
        self.ci95 / self.value
    }
}

/// ln Vol A×_pB = ln Vol A + ln Vol B − ln binom((n+k)/p, n/p).
pub fn ln_product_volume(ln_a: f64, n: usize, ln_b: f64, k: usize, p: PExponent) -> Result<f64> {
    if n == 0 || k == 0 {
        return Err(Error::domain(
            "product factors must have positive dimension",
        ));
    }
    if p.is_infinite() {
        return Ok(ln_a + ln_b);
    }
    let pv = p.value();
    Ok(ln_a + ln_b - ln_frac_binom((n + k) as f64 / pv, n as f64 / pv)?)
}

pub fn product_volume(vol_a: f64, n: usize, vol_b: f64, k: usize, p: PExponent) -> Result<f64> {
    if !(vol_a > 0.0 && vol_b > 0.0) {
        return Err(Error::domain("volumes must be positive"));
    }
    if p.is_infinite() && n > 0 && k > 0 {
        return Ok(vol_a * vol_b);
    }
    Ok(ln_product_volume(vol_a.ln(), n, vol_b.ln(), k, p)?.exp())
}

/// ln of (2Γ(1/p+1))^n / Γ(n/p+1).
pub fn ln_lp_ball_volume(n: usize, p: PExponent) -> Result<f64> {
    if n == 0 {
        return Err(Error::domain("dimension must be positive"));
    }
    let nf = n as f64;
    if p.is_infinite() {
        return Ok(nf * std::f64::consts::LN_2);
    }
    let inv = 1.0 / p.value();
    Ok(nf * (std::f64::consts::LN_2 + log_gamma(inv + 1.0)?) - log_gamma(nf * inv + 1.0)?)
}

pub fn lp_ball_volume(n: usize, p: PExponent) -> Result<f64> {
    if p.is_infinite() && n > 0 {
        return Ok(2f64.powi(n as i32));
    }
    Ok(ln_lp_ball_volume(n, p)?.exp())
}

/// ln Vol K for the closed-form families, `None` otherwise.
pub fn ln_volume_exact(k: &Body) -> Option<f64> {
    match k.kind() {
        BodyKind::Ellipsoid(e) => Some(e.ln_volume()),
        BodyKind::LpBall(b) => ln_lp_ball_volume(b.dim, b.p).ok(),
        BodyKind::Polytope(p) => p.area_2d().or_else(|| p.length_1d()).map(f64::ln),
        BodyKind::Prod { p, a, b } => ln_product_volume(
            ln_volume_exact(a)?,
            a.dim(),
            ln_volume_exact(b)?,
            b.dim(),
            *p,
        )
        .ok(),
        BodyKind::Linear { map, body } => Some(ln_volume_exact(body)? + map.abs_det().ln()),
        BodyKind::Scale { factor, body } => {
            Some(ln_volume_exact(body)? + body.dim() as f64 * factor.ln())
        }
        BodyKind::Shear(body) => ln_volume_exact(body),
        BodyKind::Polar(_) | BodyKind::Cap { .. } | BodyKind::Sum { .. } => None,
    }
}

/// Vol K for the closed-form families, evaluated without the log round trip
/// where possible so integer volumes come out exact.
pub fn volume_exact(k: &Body) -> Option<VolumeEstimate> {
    exact_value(k).map(VolumeEstimate::exact)
}

fn exact_value(k: &Body) -> Option<f64> {
    match k.kind() {
        BodyKind::LpBall(b) => lp_ball_volume(b.dim, b.p).ok(),
        BodyKind::Prod { p, a, b } => {
            product_volume(exact_value(a)?, a.dim(), exact_value(b)?, b.dim(), *p).ok()
        }
        BodyKind::Linear { map, body } => Some(exact_value(body)? * map.abs_det()),
        BodyKind::Scale { factor, body } => {
            Some(exact_value(body)? * factor.powi(body.dim() as i32))
        }
        BodyKind::Shear(body) => exact_value(body),
        _ => ln_volume_exact(k).map(f64::exp),
    }
}

fn unit_ball_point(rng: &mut ChaCha8Rng, out: &mut [f64]) {
    let n = out.len();
    let mut r2 = 0.0;
    for v in out.iter_mut() {
        let g: f64 = StandardNormal.sample(rng);
        *v = g;
        r2 += g * g;
    }
    let u: f64 = rng.random();
    let scale = u.powf(1.0 / n as f64) / r2.sqrt();
    out.iter_mut().for_each(|v| *v *= scale);
}

fn unit_direction(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..n).map(|_| StandardNormal.sample(rng)).collect();
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 1e-12 {
            return v.into_iter().map(|x| x / norm).collect();
        }
    }
}

/// `count` seeded directions uniform on the unit sphere.
pub fn random_directions(n: usize, count: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count).map(|_| unit_direction(&mut rng, n)).collect()
}

/// Checks K ⊆ E on random directions: each boundary point of E must have
/// K-gauge at least 1 − tol.
pub fn check_envelope(
    k: &Body,
    envelope: &Ellipsoid,
    directions: usize,
    seed: u64,
    tol: f64,
) -> Result<()> {
    Error::check_dim(k.dim(), envelope.dim())?;
    for d in random_directions(k.dim(), directions, seed) {
        let x = envelope.from_unit_ball(&d);
        if k.gauge_le(&x, 1.0 - tol) {
            return Err(Error::Containment {
                direction: d,
                detail: format!(
                    "body extends beyond the envelope (gauge {:.12} at an envelope boundary point)",
                    k.gauge_at(&x)
                ),
            });
        }
    }
    Ok(())
}

/// Wilson interval for h hits out of n trials, returned as the largest
/// distance from the point estimate h/n to either end.
pub fn wilson_half_width(hits: u64, trials: u64) -> f64 {
    let n = trials as f64;
    let p = hits as f64 / n;
    let z2 = Z95 * Z95;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let half = Z95 / denom * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt();
    (center + half - p).max(p - (center - half))
}

/// Counts the points of K among `samples` uniform draws from `envelope`.
pub fn count_hits(k: &Body, envelope: &Ellipsoid, samples: u64, seed: u64) -> u64 {
    let n = k.dim();
    let batches = samples.div_ceil(BATCH);
    (0..batches)
        .into_par_iter()
        .map(|b| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(b + 1);
            let count = BATCH.min(samples - b * BATCH);
            let mut z = vec![0.0; n];
            let mut hits = 0u64;
            for _ in 0..count {
                unit_ball_point(&mut rng, &mut z);
                if k.gauge_le(&envelope.from_unit_ball(&z), 1.0) {
                    hits += 1;
                }
            }
            hits
        })
        .sum()
}

/// Monte Carlo volume of K by rejection from an enclosing ellipsoid.
pub fn volume_mc(
    k: &Body,
    envelope: &Ellipsoid,
    samples: u64,
    seed: u64,
) -> Result<VolumeEstimate> {
    if samples == 0 {
        return Err(Error::MonteCarlo("sample count must be positive".into()));
    }
    check_envelope(k, envelope, 1000, seed ^ 0x656e_7665_6c6f_7065, 1e-9)?;
    let hits = count_hits(k, envelope, samples, seed);
    let n = k.dim();
    let fraction = hits as f64 / samples as f64;
    if hits == 0 {
        return Err(Error::MonteCarlo(format!(
            "no sample out of {samples} landed in the body; use a tighter envelope or more samples"
        )));
    }
    if n > 8 && fraction < 1e-3 {
        return Err(Error::MonteCarlo(format!(
            "acceptance fraction {fraction:.3e} in dimension {n} is below 1e-3; use a tighter envelope"
        )));
    }
    let vol_env = envelope.volume();
    Ok(VolumeEstimate {
        value: fraction * vol_env,
        ci95: wilson_half_width(hits, samples) * vol_env,
        method: Method::MonteCarlo,
        samples,
        seed: Some(seed),
    })
}

/// Settings for [`estimate_volume`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VolumeOptions {
    pub samples: u64,
    pub seed: u64,
    pub force_mc: bool,
    pub boundary_samples: usize,
}

impl Default for VolumeOptions {
    fn default() -> Self {
        VolumeOptions {
            samples: 200_000,
            seed: 0,
            force_mc: false,
            boundary_samples: 512,
        }
    }
}

/// Exact volume when a closed form exists, otherwise Monte Carlo inside the
/// Löwner ellipsoid.
pub fn estimate_volume(k: &Body, opts: &VolumeOptions) -> Result<VolumeEstimate> {
    if !opts.force_mc {
        if let Some(v) = volume_exact(k) {
            return Ok(v);
        }
    }
    let lopts = LoewnerOptions {
        boundary_samples: opts.boundary_samples,
        ..LoewnerOptions::default()
    };
    let envelope = loewner_report(k, &lopts)?.ellipsoid;
    volume_mc(k, &envelope, opts.samples, opts.seed)
}
