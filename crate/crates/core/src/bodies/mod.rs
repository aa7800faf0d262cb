//! Origin-symmetric convex bodies exposed through gauge and support oracles.
//!
//! A [`Body`] is an immutable expression tree. Leaves are closed-form
//! families (ellipsoids, ℓ_p balls, symmetric polytopes); interior nodes are
//! the operations of [`crate::ops`]. Gauges and supports are composed lazily
//! from the children, so every identity between composites holds up to
//! floating point. The two compositions without a closed form (the gauge of a
//! p-sum and the support of a p-intersection) are evaluated numerically and
//! flagged through [`Body::gauge_is_exact`] / [`Body::support_is_exact`].

mod ellipsoid;
mod lp_ball;
pub mod numeric;
mod polytope;
pub mod spec;

use std::fmt;
use std::sync::Arc;

use nalgebra::DMatrix;

pub use ellipsoid::Ellipsoid;
pub use lp_ball::{lp_norm, LpBall};
pub use numeric::{dual_gauge_numeric, NumericEstimate};
pub use polytope::SymPolytope;

use crate::error::{Error, Result};
use crate::ops::PExponent;

/// Invertible linear map with cached inverse and |det|.
#[derive(Debug, Clone)]
pub struct LinearMap {
    pub(crate) t: DMatrix<f64>,
    pub(crate) t_inv: DMatrix<f64>,
    pub(crate) abs_det: f64,
}

impl LinearMap {
    pub fn new(t: DMatrix<f64>) -> Result<Self> {
        let (t_inv, abs_det) = crate::numkernel::matrix::invert_general(&t)?;
        Ok(LinearMap { t, t_inv, abs_det })
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.t
    }

    pub fn abs_det(&self) -> f64 {
        self.abs_det
    }

    pub fn dim(&self) -> usize {
        self.t.nrows()
    }

    fn mul(m: &DMatrix<f64>, x: &[f64], transpose: bool) -> Vec<f64> {
        let n = x.len();
        (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| if transpose { m[(j, i)] } else { m[(i, j)] } * x[j])
                    .sum()
            })
            .collect()
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        Self::mul(&self.t, x, false)
    }

    pub fn apply_inverse(&self, x: &[f64]) -> Vec<f64> {
        Self::mul(&self.t_inv, x, false)
    }

    pub fn apply_transpose(&self, y: &[f64]) -> Vec<f64> {
        Self::mul(&self.t, y, true)
    }

    /// T⁻ᵀ, the map carrying K° to (TK)°.
    pub fn inverse_transpose(&self) -> LinearMap {
        LinearMap {
            t: self.t_inv.transpose(),
            t_inv: self.t.transpose(),
            abs_det: 1.0 / self.abs_det,
        }
    }

    pub fn compose(&self, inner: &LinearMap) -> LinearMap {
        LinearMap {
            t: &self.t * &inner.t,
            t_inv: &inner.t_inv * &self.t_inv,
            abs_det: self.abs_det * inner.abs_det,
        }
    }
}

#[derive(Debug, Clone)]
pub enum BodyKind {
    Ellipsoid(Ellipsoid),
    Polytope(SymPolytope),
    LpBall(LpBall),
    /// Polar of a body with no simpler closed-form polar.
    Polar(Body),
    /// A ∩_p B: ‖x‖^p = ‖x‖_A^p + ‖x‖_B^p.
    Cap {
        p: PExponent,
        a: Body,
        b: Body,
    },
    /// A +_p B = {sa + tb : |s|^p + |t|^p ≤ 1}.
    Sum {
        p: PExponent,
        a: Body,
        b: Body,
    },
    /// A ×_p B in the product space.
    Prod {
        p: PExponent,
        a: Body,
        b: Body,
    },
    Linear {
        map: LinearMap,
        body: Body,
    },
    /// S(x, y) = (x, x + y) applied to a body in R^n × R^n.
    Shear(Body),
    Scale {
        factor: f64,
        body: Body,
    },
}

/// Origin-symmetric convex body; cheap to clone and safe to share.
#[derive(Debug, Clone)]
pub struct Body(Arc<BodyKind>);

impl Body {
    pub(crate) fn from_kind(kind: BodyKind) -> Self {
        Body(Arc::new(kind))
    }

    pub fn kind(&self) -> &BodyKind {
        &self.0
    }

    pub fn ellipsoid(e: Ellipsoid) -> Self {
        Body::from_kind(BodyKind::Ellipsoid(e))
    }

    pub fn polytope(p: SymPolytope) -> Self {
        Body::from_kind(BodyKind::Polytope(p))
    }

    pub fn lp_ball(p: PExponent, dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::Degenerate("zero-dimensional ball".into()));
        }
        Ok(Body::from_kind(BodyKind::LpBall(LpBall { p, dim })))
    }

    /// [-1, 1]^n.
    pub fn cube(dim: usize) -> Result<Self> {
        Body::lp_ball(PExponent::INFINITY, dim)
    }

    /// conv{±e_i}.
    pub fn cross(dim: usize) -> Result<Self> {
        Body::lp_ball(PExponent::ONE, dim)
    }

    /// Euclidean unit ball, kept in ellipsoid form.
    pub fn ball(dim: usize) -> Result<Self> {
        Ok(Body::ellipsoid(Ellipsoid::ball(dim, 1.0)?))
    }

    pub fn dim(&self) -> usize {
        match self.kind() {
            BodyKind::Ellipsoid(e) => e.dim(),
            BodyKind::Polytope(p) => p.dim(),
            BodyKind::LpBall(b) => b.dim,
            BodyKind::Polar(k) | BodyKind::Shear(k) => k.dim(),
            BodyKind::Cap { a, .. } | BodyKind::Sum { a, .. } => a.dim(),
            BodyKind::Prod { a, b, .. } => a.dim() + b.dim(),
            BodyKind::Linear { body, .. } | BodyKind::Scale { body, .. } => body.dim(),
        }
    }

    pub fn as_ellipsoid(&self) -> Option<&Ellipsoid> {
        match self.kind() {
            BodyKind::Ellipsoid(e) => Some(e),
            _ => None,
        }
    }

    pub fn as_polytope(&self) -> Option<&SymPolytope> {
        match self.kind() {
            BodyKind::Polytope(p) => Some(p),
            _ => None,
        }
    }

    /// ‖x‖_K, the least t ≥ 0 with x ∈ tK.
    pub fn gauge(&self, x: &[f64]) -> Result<f64> {
        Error::check_dim(self.dim(), x.len())?;
        Ok(self.gauge_at(x))
    }

    /// h_K(y) = sup over x in K of ⟨x, y⟩.
    pub fn support(&self, y: &[f64]) -> Result<f64> {
        Error::check_dim(self.dim(), y.len())?;
        Ok(self.support_at(y))
    }

    pub(crate) fn gauge_at(&self, x: &[f64]) -> f64 {
        match self.kind() {
            BodyKind::Ellipsoid(e) => e.gauge(x),
            BodyKind::Polytope(p) => p.gauge(x),
            BodyKind::LpBall(b) => b.gauge(x),
            BodyKind::Polar(k) => k.support_at(x),
            BodyKind::Cap { p, a, b } => p.combine(a.gauge_at(x), b.gauge_at(x)),
            BodyKind::Sum { p, a, b } => numeric::sum_gauge(*p, a, b, x, None).value,
            BodyKind::Prod { p, a, b } => {
                let n = a.dim();
                p.combine(a.gauge_at(&x[..n]), b.gauge_at(&x[n..]))
            }
            BodyKind::Linear { map, body } => body.gauge_at(&map.apply_inverse(x)),
            BodyKind::Shear(k) => k.gauge_at(&unshear(x)),
            BodyKind::Scale { factor, body } => body.gauge_at(x) / factor,
        }
    }

    pub(crate) fn support_at(&self, y: &[f64]) -> f64 {
        match self.kind() {
            BodyKind::Ellipsoid(e) => e.support(y),
            BodyKind::Polytope(p) => p.support(y),
            BodyKind::LpBall(b) => b.support(y),
            BodyKind::Polar(k) => k.gauge_at(y),
            BodyKind::Cap { p, a, b } => numeric::cap_support(*p, a, b, y, None).value,
            BodyKind::Sum { p, a, b } => p.conjugate().combine(a.support_at(y), b.support_at(y)),
            BodyKind::Prod { p, a, b } => {
                let n = a.dim();
                p.conjugate()
                    .combine(a.support_at(&y[..n]), b.support_at(&y[n..]))
            }
            BodyKind::Linear { map, body } => body.support_at(&map.apply_transpose(y)),
            BodyKind::Shear(k) => k.support_at(&shear_transpose(y)),
            BodyKind::Scale { factor, body } => body.support_at(y) * factor,
        }
    }

    /// Decides ‖x‖_K ≤ level, using cheap certified bounds before any
    /// numeric optimization.
    pub fn gauge_le(&self, x: &[f64], level: f64) -> bool {
        match self.kind() {
            BodyKind::Polar(k) => k.support_le(x, level),
            BodyKind::Sum { p, a, b } => {
                numeric::sum_gauge(*p, a, b, x, Some(level)).value <= level
            }
            BodyKind::Linear { map, body } => body.gauge_le(&map.apply_inverse(x), level),
            BodyKind::Shear(k) => k.gauge_le(&unshear(x), level),
            BodyKind::Scale { factor, body } => body.gauge_le(x, level * factor),
            _ => self.gauge_at(x) <= level,
        }
    }

    /// Decides h_K(y) ≤ level.
    pub fn support_le(&self, y: &[f64], level: f64) -> bool {
        match self.kind() {
            BodyKind::Polar(k) => k.gauge_le(y, level),
            BodyKind::Cap { p, a, b } => {
                numeric::cap_support(*p, a, b, y, Some(level)).value <= level
            }
            BodyKind::Linear { map, body } => body.support_le(&map.apply_transpose(y), level),
            BodyKind::Shear(k) => k.support_le(&shear_transpose(y), level),
            BodyKind::Scale { factor, body } => body.support_le(y, level / factor),
            _ => self.support_at(y) <= level,
        }
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        self.gauge_le(x, 1.0)
    }

    /// False when the gauge goes through numeric optimization somewhere.
    pub fn gauge_is_exact(&self) -> bool {
        match self.kind() {
            BodyKind::Ellipsoid(_) | BodyKind::Polytope(_) | BodyKind::LpBall(_) => true,
            BodyKind::Polar(k) => k.support_is_exact(),
            BodyKind::Cap { a, b, .. } | BodyKind::Prod { a, b, .. } => {
                a.gauge_is_exact() && b.gauge_is_exact()
            }
            BodyKind::Sum { .. } => false,
            BodyKind::Linear { body, .. }
            | BodyKind::Scale { body, .. }
            | BodyKind::Shear(body) => body.gauge_is_exact(),
        }
    }

    pub fn support_is_exact(&self) -> bool {
        match self.kind() {
            BodyKind::Ellipsoid(_) | BodyKind::Polytope(_) | BodyKind::LpBall(_) => true,
            BodyKind::Polar(k) => k.gauge_is_exact(),
            BodyKind::Sum { a, b, .. } | BodyKind::Prod { a, b, .. } => {
                a.support_is_exact() && b.support_is_exact()
            }
            BodyKind::Cap { .. } => false,
            BodyKind::Linear { body, .. }
            | BodyKind::Scale { body, .. }
            | BodyKind::Shear(body) => body.support_is_exact(),
        }
    }

    /// A point x ∈ K with ⟨x, y⟩ = h_K(y), for bodies where one is available
    /// in closed form or by LP.
    pub fn support_point(&self, y: &[f64]) -> Option<Vec<f64>> {
        match self.kind() {
            BodyKind::Ellipsoid(e) => Some(e.support_point(y)),
            BodyKind::Polytope(p) => Some(p.support_point(y)),
            BodyKind::LpBall(b) => Some(b.support_point(y)),
            BodyKind::Linear { map, body } => body
                .support_point(&map.apply_transpose(y))
                .map(|x| map.apply(&x)),
            BodyKind::Scale { factor, body } => body
                .support_point(y)
                .map(|x| x.into_iter().map(|v| v * factor).collect()),
            _ => None,
        }
    }
}

/// S⁻¹(x, y) = (x, y − x).
fn unshear(z: &[f64]) -> Vec<f64> {
    let n = z.len() / 2;
    let mut out = z.to_vec();
    for i in 0..n {
        out[n + i] -= z[i];
    }
    out
}

/// Sᵀ(u, v) = (u + v, v).
fn shear_transpose(w: &[f64]) -> Vec<f64> {
    let n = w.len() / 2;
    let mut out = w.to_vec();
    for i in 0..n {
        out[i] += w[n + i];
    }
    out
}

impl fmt::Display for Body {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind() {
            BodyKind::Ellipsoid(e) => write!(f, "ellipsoid({})", e.dim()),
            BodyKind::Polytope(p) => {
                let v = p.vertices().map_or(0, <[_]>::len);
                let a = p.facets().map_or(0, <[_]>::len);
                write!(f, "polytope(dim={}, vertices={v}, facets={a})", p.dim())
            }
            BodyKind::LpBall(b) if b.p.is_infinite() => write!(f, "cube({})", b.dim),
            BodyKind::LpBall(b) if b.p.value() == 1.0 => write!(f, "cross({})", b.dim),
            BodyKind::LpBall(b) => write!(f, "lp_ball(p={}, dim={})", b.p, b.dim),
            BodyKind::Polar(k) => write!(f, "polar({k})"),
            BodyKind::Cap { p, a, b } => write!(f, "cap_{p}({a}, {b})"),
            BodyKind::Sum { p, a, b } => write!(f, "sum_{p}({a}, {b})"),
            BodyKind::Prod { p, a, b } => write!(f, "prod_{p}({a}, {b})"),
            BodyKind::Linear { map, body } => write!(f, "linmap(|det|={:.6}, {body})", map.abs_det),
            BodyKind::Shear(k) => write!(f, "shear({k})"),
            BodyKind::Scale { factor, body } => write!(f, "scale({factor}, {body})"),
        }
    }
}
