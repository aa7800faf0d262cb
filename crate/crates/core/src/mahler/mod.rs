//! Volume products, the bounds on them, and the step-by-step verifier of
//! the inductive proof of the (2 log₂ r)^{-n} bound.

mod bounds;
mod chain;
mod report;

pub use bounds::{
    bound_table, comparison_bound, corollary_bound, direct_bound, kuperberg_bound,
    ln_corollary_bound, ln_kuperberg_bound, BoundQuery, BoundRow,
};
pub use chain::{
    default_certificate, verify_chain, verify_chain_step, ChainOptions, ChainReport, ChainStep,
    LevelTrace,
};
pub use report::{round_sig, round_value, CSV_COLUMNS, CSV_HEADER};

use serde::{Deserialize, Serialize};

use crate::bodies::{Body, Ellipsoid};
use crate::error::Result;
use crate::numkernel::ln_ball_volume;
use crate::ops;
use crate::volume::{estimate_volume, VolumeEstimate, VolumeOptions, Z95_FACTOR};

/// The pullback {x : h_K(Qx) ≤ 1} of K° into V under x ↦ Qx, Q the form of F.
pub fn identify_polar(k: &Body, f: &Ellipsoid) -> Result<Body> {
    crate::error::Error::check_dim(k.dim(), f.dim())?;
    ops::linear_image(f.inverse_form().matrix(), &ops::polar(k))
}

/// s(K) = Vol K · Vol K° / b_n², with the volumes that produced it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProductRatio {
    pub s: f64,
    /// First-order 95% half-width: s·(relative CI of Vol K + relative CI of Vol K°).
    pub ci95: f64,
    pub volume: VolumeEstimate,
    pub polar_volume: VolumeEstimate,
}

impl ProductRatio {
    /// Standard error implied by the 95% half-width.
    pub fn sigma(&self) -> f64 {
        self.ci95 / Z95_FACTOR
    }
}

pub fn volume_product_ratio(k: &Body, opts: &VolumeOptions) -> Result<ProductRatio> {
    let volume = estimate_volume(k, opts)?;
    let polar_opts = VolumeOptions {
        seed: opts.seed ^ 0x706f_6c61_7200,
        ..*opts
    };
    let polar_volume = estimate_volume(&ops::polar(k), &polar_opts)?;
    let ln_bn = ln_ball_volume(k.dim())?;
    let s = (volume.value.ln() + polar_volume.value.ln() - 2.0 * ln_bn).exp();
    let ci95 = s * (volume.relative_ci() + polar_volume.relative_ci());
    Ok(ProductRatio {
        s,
        ci95,
        volume,
        polar_volume,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Comparison {
    /// |lhs − rhs| ≤ tolerance·|rhs|.
    Equal,
    /// |lhs − rhs| ≤ tolerance.
    Within,
    /// lhs ≥ rhs − tolerance.
    AtLeast,
    /// lhs ≤ rhs + tolerance.
    AtMost,
}

/// One checked identity or inequality.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    pub level: usize,
    pub name: String,
    pub comparison: Comparison,
    pub measured_lhs: f64,
    pub measured_rhs: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ci: Option<f64>,
    pub tolerance: f64,
    pub pass: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub samples: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl StepRecord {
    pub fn new(
        level: usize,
        name: &str,
        comparison: Comparison,
        lhs: f64,
        rhs: f64,
        tolerance: f64,
    ) -> Self {
        let pass = match comparison {
            Comparison::Equal => (lhs - rhs).abs() <= tolerance * rhs.abs(),
            Comparison::Within => (lhs - rhs).abs() <= tolerance,
            Comparison::AtLeast => lhs >= rhs - tolerance,
            Comparison::AtMost => lhs <= rhs + tolerance,
        };
        StepRecord {
            level,
            name: name.to_string(),
            comparison,
            measured_lhs: lhs,
            measured_rhs: rhs,
            ci: None,
            tolerance,
            pass,
            samples: None,
            note: None,
        }
    }

    /// A check that could not be carried out.
    pub fn failed(level: usize, name: &str, reason: impl Into<String>) -> Self {
        StepRecord {
            level,
            name: name.to_string(),
            comparison: Comparison::AtLeast,
            measured_lhs: f64::NAN,
            measured_rhs: f64::NAN,
            ci: None,
            tolerance: 0.0,
            pass: false,
            samples: None,
            note: Some(reason.into()),
        }
    }

    pub fn with_ci(mut self, ci: f64) -> Self {
        self.ci = Some(ci);
        self
    }

    pub fn with_samples(mut self, samples: u64) -> Self {
        self.samples = Some(samples);
        self
    }

    pub fn with_note(mut self, note: impl Into<String>) -> Self {
        self.note = Some(note.into());
        self
    }
}

/// s(K) ≤ 1 + 3σ.
pub fn santalo_check(k: &Body, opts: &VolumeOptions) -> Result<StepRecord> {
    let ratio = volume_product_ratio(k, opts)?;
    Ok(santalo_record(0, &ratio))
}

pub(crate) fn santalo_record(level: usize, ratio: &ProductRatio) -> StepRecord {
    StepRecord::new(
        level,
        "santalo: s(K) <= 1",
        Comparison::AtMost,
        ratio.s,
        1.0,
        3.0 * ratio.sigma() + 1e-12,
    )
    .with_ci(ratio.ci95)
}
