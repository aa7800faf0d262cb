//! The inductive proof, one level at a time.
//!
//! Each level takes K with E₁ ⊆ K ⊆ E₂ (ratio r), builds F, the transported
//! polar Kp, the sheared product C = S(K ×₂ Kp) and the next body
//! L = K ∩₂ Kp with ratio √r, and records every identity and inequality the
//! argument uses. Closed-form identities are compared at floating-point
//! tolerances; the two volumetric inequalities use Monte Carlo with
//! CI-aware tolerances.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::bounds::{comparison_bound, corollary_bound, direct_bound, kuperberg_bound};
use super::{identify_polar, santalo_record, volume_product_ratio, Comparison, StepRecord};
use crate::bodies::{Body, Ellipsoid};
use crate::ellipsoids::{f_ellipsoid, f_residual, john_sandwich, SandwichCertificate};
use crate::error::{Error, Result};
use crate::numkernel::{frac_binom, ln_frac_binom, SymMatrix};
use crate::ops::{self, PExponent};
use crate::volume::{random_directions, volume_exact, volume_mc, VolumeEstimate, VolumeOptions};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChainOptions {
    /// Monte Carlo samples per volume.
    pub samples: u64,
    pub seed: u64,
    pub boundary_samples: usize,
    /// Sampled points for the identity, containment and inclusion checks.
    pub directions: usize,
    /// Sampled points for the pointwise inequality.
    pub pointwise_points: usize,
    pub identity_tol: f64,
    pub exact_tol: f64,
    pub residual_tol: f64,
    pub containment_tol: f64,
    pub pointwise_slack: f64,
    /// Monte Carlo comparisons allow this many pooled 95% half-widths.
    pub ci_factor: f64,
    pub max_levels: usize,
    /// Largest product-space dimension for the Monte Carlo volume of C.
    pub mc_max_dim: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c_bm: Option<f64>,
}

impl Default for ChainOptions {
    fn default() -> Self {
        ChainOptions {
            samples: 200_000,
            seed: 0,
            boundary_samples: 512,
            directions: 1000,
            pointwise_points: 10_000,
            identity_tol: 1e-12,
            exact_tol: 1e-9,
            residual_tol: 1e-10,
            containment_tol: 1e-7,
            pointwise_slack: 1e-9,
            ci_factor: 3.0,
            max_levels: 20,
            mc_max_dim: 8,
            c_bm: None,
        }
    }
}

impl ChainOptions {
    fn stream(&self, level: usize, tag: u64) -> u64 {
        splitmix(self.seed ^ splitmix(((level as u64) << 16) | tag))
    }
}

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Records of one level, F, and the next body and certificate when r > 4.
#[derive(Debug, Clone)]
pub struct ChainStep {
    pub records: Vec<StepRecord>,
    pub f: Ellipsoid,
    pub next: Option<(Body, SandwichCertificate)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevelTrace {
    pub level: usize,
    pub r: f64,
    pub n: usize,
    /// 2^{-n·level}, the product of the per-level factors so far.
    pub accumulated_factor: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainReport {
    pub dim: usize,
    pub r0: f64,
    pub recursion_levels: usize,
    pub recursion_trace: Vec<LevelTrace>,
    pub steps: Vec<StepRecord>,
    pub final_bound: f64,
    pub final_bound_kind: String,
    pub telescoped_bound: f64,
    pub closed_form_bound: Option<f64>,
    pub corollary_bound: Option<f64>,
    pub comparison_bound: Option<f64>,
    pub measured_product_ratio: Option<f64>,
    pub measured_ci95: Option<f64>,
    pub notes: Vec<String>,
    pub pass: bool,
}

fn max_rel_dev(values: &[f64], reference: f64) -> f64 {
    let scale = reference.abs().max(f64::MIN_POSITIVE);
    values
        .iter()
        .map(|v| (v - reference).abs() / scale)
        .fold(0.0, f64::max)
}

/// The form [[2M, −M], [−M, M]] of S(E ×₂ E) for E = {xᵀMx ≤ 1}.
fn sheared_envelope(e: &Ellipsoid) -> Result<Ellipsoid> {
    let n = e.dim();
    let m = e.form().matrix();
    let mut big = DMatrix::<f64>::zeros(2 * n, 2 * n);
    for i in 0..n {
        for j in 0..n {
            big[(i, j)] = 2.0 * m[(i, j)];
            big[(i, n + j)] = -m[(i, j)];
            big[(n + i, j)] = -m[(i, j)];
            big[(n + i, n + j)] = m[(i, j)];
        }
    }
    Ellipsoid::new(SymMatrix::symmetrize(big))
}

fn mc_record(
    level: usize,
    name: &str,
    result: Result<VolumeEstimate>,
    then: impl FnOnce(&VolumeEstimate) -> StepRecord,
) -> (StepRecord, Option<VolumeEstimate>) {
    match result {
        Ok(v) => (then(&v), Some(v)),
        Err(e) => (StepRecord::failed(level, name, e.to_string()), None),
    }
}

/// Runs and records one level of the argument for K with certificate `cert`.
pub fn verify_chain_step(
    k: &Body,
    cert: &SandwichCertificate,
    opts: &ChainOptions,
    level: usize,
) -> Result<ChainStep> {
    let n = k.dim();
    Error::check_dim(n, cert.dim())?;
    let nf = n as f64;
    let r = cert.ratio_r;
    let (e1, e2) = (&cert.inner, &cert.outer);
    let mut records = Vec::new();
    let dirs = random_directions(n, opts.directions, opts.stream(level, 1));

    // (1) F and its volume relation
    let f = f_ellipsoid(e1, e2)?;
    let residual = f_residual(f.form(), e2.form(), e1.form()) / e1.form().norm();
    records.push(StepRecord::new(
        level,
        "F: Q M^-1 Q = N",
        Comparison::AtMost,
        residual,
        0.0,
        opts.residual_tol,
    ));
    records.push(StepRecord::new(
        level,
        "F: ln(Vol F / Vol E1) = ln sqrt(Vol E2 / Vol E1)",
        Comparison::Within,
        f.ln_volume() - e1.ln_volume(),
        0.5 * (e2.ln_volume() - e1.ln_volume()),
        opts.exact_tol,
    ));

    // (2) transported polar, sandwiched by E1 ⊆ Kp ⊆ E2
    let kp = identify_polar(k, &f)?;
    let worst = dirs
        .iter()
        .map(|d| {
            let g = kp.gauge_at(d);
            (g / e1.gauge(d)).max(e2.gauge(d) / g) - 1.0
        })
        .fold(f64::NEG_INFINITY, f64::max);
    records.push(
        StepRecord::new(
            level,
            "E1 ⊆ Kp ⊆ E2",
            Comparison::AtMost,
            worst,
            0.0,
            opts.containment_tol,
        )
        .with_samples(dirs.len() as u64),
    );

    // (3) slice and projection of C = S(K ×₂ Kp)
    let c = ops::shear_product(k, &kp)?;
    let cap = ops::cap_p(PExponent::TWO, k, &kp)?;
    let sum = ops::sum_p(PExponent::TWO, k, &kp)?;
    let mut slice = 0.0f64;
    let mut projection = 0.0f64;
    let mut z = vec![0.0; 2 * n];
    for d in &dirs {
        let formula = k.gauge_at(d).hypot(kp.gauge_at(d));
        z.iter_mut().for_each(|v| *v = 0.0);
        z[..n].copy_from_slice(d);
        slice = slice.max(max_rel_dev(&[c.gauge_at(&z), cap.gauge_at(d)], formula));
        let formula = k.support_at(d).hypot(kp.support_at(d));
        z.iter_mut().for_each(|v| *v = 0.0);
        z[n..].copy_from_slice(d);
        projection = projection.max(max_rel_dev(&[c.support_at(&z), sum.support_at(d)], formula));
    }
    records.push(
        StepRecord::new(
            level,
            "slice: V ∩ C = K ∩2 Kp",
            Comparison::AtMost,
            slice,
            0.0,
            opts.identity_tol,
        )
        .with_samples(dirs.len() as u64),
    );
    records.push(
        StepRecord::new(
            level,
            "projection: P(C) = K +2 Kp",
            Comparison::AtMost,
            projection,
            0.0,
            opts.identity_tol,
        )
        .with_samples(dirs.len() as u64),
    );

    // (4) Vol K · Vol Kp = binom(n, n/2) · Vol C
    let binom_n = frac_binom(nf, nf / 2.0)?;
    let exact = (volume_exact(k), volume_exact(&kp), volume_exact(&c));
    if let (Some(vk), Some(vkp), Some(vc)) = &exact {
        records.push(StepRecord::new(
            level,
            "product: Vol K Vol Kp = binom(n,n/2) Vol C",
            Comparison::Equal,
            vk.value * vkp.value,
            binom_n * vc.value,
            opts.exact_tol,
        ));
    }
    let mut vol_c_mc = None;
    if 2 * n <= opts.mc_max_dim {
        let name = "product: Monte Carlo Vol C";
        let result = sheared_envelope(e2)
            .and_then(|env| volume_mc(&c, &env, opts.samples, opts.stream(level, 2)));
        let reference = match &exact {
            (_, _, Some(vc)) => Ok(vc.clone()),
            _ => estimate_factors(k, &kp, e2, opts, level).map(|(a, b)| {
                let value = a.value * b.value / binom_n;
                VolumeEstimate {
                    value,
                    ci95: value * (a.relative_ci() + b.relative_ci()),
                    ..a
                }
            }),
        };
        let (rec, est) = match reference {
            Ok(reference) => mc_record(level, name, result, |v| {
                let pooled = v.ci95.hypot(reference.ci95);
                StepRecord::new(
                    level,
                    name,
                    Comparison::Within,
                    v.value,
                    reference.value,
                    opts.ci_factor * pooled,
                )
                .with_ci(pooled)
                .with_samples(v.samples)
            }),
            Err(e) => (StepRecord::failed(level, name, e.to_string()), None),
        };
        records.push(rec);
        vol_c_mc = est;
    } else if exact.2.is_none() {
        records.push(
            StepRecord::new(
                level,
                "product: Monte Carlo Vol C",
                Comparison::AtLeast,
                0.0,
                0.0,
                0.0,
            )
            .with_note(format!(
                "not checked: no closed form and dimension {} exceeds {}",
                2 * n,
                opts.mc_max_dim
            )),
        );
    }

    // (5) Vol C ≥ Vol(K ∩2 Kp) Vol(K +2 Kp) / binom(2n, n)
    let name = "rogers-shephard: Vol C >= Vol(K ∩2 Kp) Vol(K +2 Kp) / binom(2n,n)";
    let lhs = vol_c_mc.clone().or(exact.2.clone());
    let vcap = f
        .scaled(std::f64::consts::FRAC_1_SQRT_2)
        .and_then(|env| volume_mc(&cap, &env, opts.samples, opts.stream(level, 3)));
    let vsum = e2
        .scaled(std::f64::consts::SQRT_2)
        .and_then(|env| volume_mc(&sum, &env, opts.samples, opts.stream(level, 4)));
    match (lhs, vcap, vsum) {
        (Some(lhs), Ok(a), Ok(b)) => {
            let binom_2n = ln_frac_binom(2.0 * nf, nf)?.exp();
            let rhs = a.value * b.value / binom_2n;
            let ci_rhs = rhs * (a.relative_ci() + b.relative_ci());
            let pooled = lhs.ci95.hypot(ci_rhs);
            records.push(
                StepRecord::new(
                    level,
                    name,
                    Comparison::AtLeast,
                    lhs.value,
                    rhs,
                    opts.ci_factor * pooled,
                )
                .with_ci(pooled)
                .with_samples(opts.samples)
                .with_note("strict inequality checked as >= within the Monte Carlo tolerance"),
            );
        }
        (None, _, _) => records.push(StepRecord::failed(level, name, "no value for Vol C")),
        (_, Err(e), _) | (_, _, Err(e)) => {
            records.push(StepRecord::failed(level, name, e.to_string()))
        }
    }
    let ratio = (ln_frac_binom(nf, nf / 2.0)? - ln_frac_binom(2.0 * nf, nf)?).exp();
    records.push(StepRecord::new(
        level,
        "binom(n,n/2) / binom(2n,n) >= 2^-n",
        Comparison::AtLeast,
        ratio,
        (-nf * std::f64::consts::LN_2).exp(),
        0.0,
    ));
    let cap_polar = identify_polar(&cap, &f)?;
    let dev = dirs
        .iter()
        .map(|d| max_rel_dev(&[cap_polar.support_at(d)], sum.support_at(d)))
        .fold(0.0, f64::max);
    records.push(
        StepRecord::new(
            level,
            "polar: (K ∩2 Kp)° = K +2 Kp",
            Comparison::AtMost,
            dev,
            0.0,
            opts.identity_tol,
        )
        .with_samples(dirs.len() as u64),
    );

    // (6) ‖x‖_K² + ‖x‖_Kp² ≥ 2‖x‖_F²
    let points = random_directions(n, opts.pointwise_points, opts.stream(level, 5));
    let slack = points
        .iter()
        .map(|x| {
            let gf = f.gauge(x);
            (k.gauge_at(x).powi(2) + kp.gauge_at(x).powi(2)) / (2.0 * gf * gf) - 1.0
        })
        .fold(f64::INFINITY, f64::min);
    records.push(
        StepRecord::new(
            level,
            "pointwise: |x|_K^2 + |x|_Kp^2 >= 2|x|_F^2",
            Comparison::AtLeast,
            slack,
            0.0,
            opts.pointwise_slack,
        )
        .with_samples(points.len() as u64),
    );

    // (7) (1/√2)F ⊇ K ∩2 Kp ⊇ (1/√2)E1
    let sqrt2 = std::f64::consts::SQRT_2;
    let (mut outer, mut inner) = (f64::NEG_INFINITY, f64::NEG_INFINITY);
    for d in &dirs {
        let g = cap.gauge_at(d);
        outer = outer.max(sqrt2 * f.gauge(d) / g - 1.0);
        inner = inner.max(g / (sqrt2 * e1.gauge(d)) - 1.0);
    }
    records.push(
        StepRecord::new(
            level,
            "inclusion: (1/√2)F ⊇ K ∩2 Kp",
            Comparison::AtMost,
            outer,
            0.0,
            opts.containment_tol,
        )
        .with_samples(dirs.len() as u64),
    );
    records.push(
        StepRecord::new(
            level,
            "inclusion: K ∩2 Kp ⊇ (1/√2)E1",
            Comparison::AtMost,
            inner,
            0.0,
            opts.containment_tol,
        )
        .with_samples(dirs.len() as u64),
    );

    // (8) next certificate ((1/√2)E1, (1/√2)F) with ratio √r
    let next_cert = SandwichCertificate::new(e1.scaled(1.0 / sqrt2)?, f.scaled(1.0 / sqrt2)?)?;
    let mut rec = StepRecord::new(
        level,
        "next ratio = sqrt(r)",
        Comparison::Equal,
        next_cert.ratio_r,
        r.sqrt(),
        opts.exact_tol,
    );
    let next = if r > 4.0 {
        Some((cap, next_cert))
    } else {
        rec = rec.with_note(if r < 2.0 {
            "r < 2: the theorem's hypothesis fails, the direct bound r^-n applies"
        } else {
            "r <= 4: base case, no further recursion"
        });
        None
    };
    records.push(rec);
    Ok(ChainStep { records, f, next })
}

/// Monte Carlo volumes of K and Kp inside E2, for bodies without closed forms.
fn estimate_factors(
    k: &Body,
    kp: &Body,
    e2: &Ellipsoid,
    opts: &ChainOptions,
    level: usize,
) -> Result<(VolumeEstimate, VolumeEstimate)> {
    Ok((
        volume_mc(k, e2, opts.samples, opts.stream(level, 6))?,
        volume_mc(kp, e2, opts.samples, opts.stream(level, 7))?,
    ))
}

/// (K, K) with r = 1 for an ellipsoid, else the John sandwich (J, √n·J).
pub fn default_certificate(k: &Body) -> Result<SandwichCertificate> {
    match k.as_ellipsoid() {
        Some(e) => {
            let mut cert = SandwichCertificate::new(e.clone(), e.clone())?;
            cert.note = Some("K is an ellipsoid: E1 = E2 = K".into());
            Ok(cert)
        }
        None => john_sandwich(k),
    }
}

/// Runs the induction from K: levels while r > 4, then the base case, the
/// measured s(K), and the bound and Santaló checks.
pub fn verify_chain(
    k: &Body,
    cert: Option<SandwichCertificate>,
    opts: &ChainOptions,
) -> Result<ChainReport> {
    let n = k.dim();
    let nf = n as f64;
    let cert = match cert {
        Some(c) => c,
        None => default_certificate(k)?,
    };
    Error::check_dim(n, cert.dim())?;
    let mut steps = Vec::new();
    let mut notes =
        vec!["strict inequalities of the argument are checked as >= within tolerance".to_string()];
    if let Some(note) = &cert.note {
        notes.push(note.clone());
    }
    let cert_check = match cert.verify(k, opts.directions, opts.stream(0, 8), opts.containment_tol)
    {
        Ok(()) => StepRecord::new(
            0,
            "certificate: E1 ⊆ K ⊆ E2",
            Comparison::AtMost,
            0.0,
            0.0,
            opts.containment_tol,
        ),
        Err(e) => StepRecord::failed(0, "certificate: E1 ⊆ K ⊆ E2", e.to_string()),
    };
    steps.push(cert_check.with_samples(opts.directions as u64));

    let r0 = cert.ratio_r;
    let mut trace = Vec::new();
    let (mut body, mut current) = (k.clone(), cert);
    let mut level = 0;
    loop {
        trace.push(LevelTrace {
            level,
            r: current.ratio_r,
            n,
            accumulated_factor: (-nf * level as f64 * std::f64::consts::LN_2).exp(),
        });
        if current.ratio_r <= 4.0 {
            break;
        }
        if level >= opts.max_levels {
            return Err(Error::NoConvergence(format!(
                "recursion exceeded {} levels",
                opts.max_levels
            )));
        }
        let step = verify_chain_step(&body, &current, opts, level)?;
        steps.extend(step.records);
        let (next_body, next_cert) = step.next.expect("r > 4 yields a next level");
        body = next_body;
        current = next_cert;
        level += 1;
    }

    let rk = current.ratio_r.max(1.0);
    if rk >= 2.0 {
        steps.push(
            StepRecord::new(
                level,
                "base case: r <= 2 log2 r",
                Comparison::AtMost,
                rk,
                2.0 * rk.log2(),
                0.0,
            )
            .with_note("direct bound r^-n dominates (2 log2 r)^-n"),
        );
    } else {
        notes.push(format!("r = {rk} < 2 at the base: the theorem's hypothesis fails, the direct bound r^-n applies"));
    }

    let closed_form = if r0 >= 2.0 {
        Some(kuperberg_bound(r0, n)?)
    } else {
        None
    };
    let (final_bound, final_kind) = match closed_form {
        Some(b) => (b, "kuperberg"),
        None => (direct_bound(r0.max(1.0), n)?, "direct"),
    };
    let telescoped = (-nf * (level as f64 * std::f64::consts::LN_2 + rk.ln())).exp();
    if let Some(cf) = closed_form {
        let gap = telescoped / cf - 1.0;
        if gap.abs() > 1e-12 {
            notes.push(format!(
                "telescoped bound (2^k r_k)^-n = {telescoped:.6e} differs from (2 log2 r0)^-n = {cf:.6e} by a relative {gap:.3e}"
            ));
        }
    }
    let corollary = if n >= 4 {
        Some(corollary_bound(n)?)
    } else {
        None
    };
    let comparison = opts.c_bm.map(|c| comparison_bound(c, n)).transpose()?;

    let vopts = VolumeOptions {
        samples: opts.samples,
        seed: opts.stream(0, 9),
        force_mc: false,
        boundary_samples: opts.boundary_samples,
    };
    let (mut measured, mut measured_ci) = (None, None);
    match volume_product_ratio(k, &vopts) {
        Ok(ratio) => {
            let tol = 3.0 * ratio.sigma() + 1e-12 * ratio.s;
            steps.push(santalo_record(level, &ratio));
            let mut push = |name: &str, bound: f64| {
                steps.push(
                    StepRecord::new(level, name, Comparison::AtLeast, ratio.s, bound, tol)
                        .with_ci(ratio.ci95),
                );
            };
            push("bound: s(K) >= final bound", final_bound);
            push("bound: s(K) >= telescoped bound", telescoped);
            if let Some(c) = corollary {
                push("bound: s(K) >= (log2 n)^-n", c);
            }
            measured = Some(ratio.s);
            measured_ci = Some(ratio.ci95);
        }
        Err(e) => steps.push(StepRecord::failed(level, "measured s(K)", e.to_string())),
    }
    let pass = steps.iter().all(|s| s.pass);
    Ok(ChainReport {
        dim: n,
        r0,
        recursion_levels: level,
        recursion_trace: trace,
        steps,
        final_bound,
        final_bound_kind: final_kind.to_string(),
        telescoped_bound: telescoped,
        closed_form_bound: closed_form,
        corollary_bound: corollary,
        comparison_bound: comparison,
        measured_product_ratio: measured,
        measured_ci95: measured_ci,
        notes,
        pass,
    })
}
