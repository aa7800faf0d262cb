//! Constructors for polar bodies, ℓ_p sums, intersections and products,
//! linear images and the shear S(x, y) = (x, x + y).

use std::fmt;

use nalgebra::DMatrix;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::bodies::{Body, BodyKind, Ellipsoid, LinearMap, LpBall};
use crate::error::{Error, Result};
use crate::numkernel::SymMatrix;

/// Exponent p ∈ [1, ∞] together with its conjugate q, 1/p + 1/q = 1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PExponent {
    p: f64,
}

impl PExponent {
    pub const ONE: PExponent = PExponent { p: 1.0 };
    pub const TWO: PExponent = PExponent { p: 2.0 };
    pub const INFINITY: PExponent = PExponent { p: f64::INFINITY };

    pub fn new(p: f64) -> Result<Self> {
        if p.is_nan() || p < 1.0 {
            return Err(Error::domain(format!(
                "exponent must lie in [1, inf], got {p}"
            )));
        }
        Ok(PExponent { p })
    }

    pub fn value(self) -> f64 {
        self.p
    }

    pub fn is_infinite(self) -> bool {
        self.p.is_infinite()
    }

    pub fn q(self) -> f64 {
        self.conjugate().p
    }

    pub fn conjugate(self) -> PExponent {
        let q = if self.p == 1.0 {
            f64::INFINITY
        } else if self.p.is_infinite() {
            1.0
        } else if self.p == 2.0 {
            2.0
        } else {
            self.p / (self.p - 1.0)
        };
        PExponent { p: q }
    }

    /// (|a|^p + |b|^p)^{1/p}, with max for p = ∞.
    pub fn combine(self, a: f64, b: f64) -> f64 {
        let (a, b) = (a.abs(), b.abs());
        let m = a.max(b);
        if self.is_infinite() || m == 0.0 || m.is_infinite() {
            return m;
        }
        if self.p == 1.0 {
            return a + b;
        }
        if self.p == 2.0 {
            return a.hypot(b);
        }
        let (ra, rb) = (a / m, b / m);
        m * (ra.powf(self.p) + rb.powf(self.p)).powf(1.0 / self.p)
    }
}

impl fmt::Display for PExponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_infinite() {
            f.write_str("inf")
        } else {
            write!(f, "{}", self.p)
        }
    }
}

impl Serialize for PExponent {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        if self.is_infinite() {
            s.serialize_str("inf")
        } else {
            s.serialize_f64(self.p)
        }
    }
}

impl<'de> Deserialize<'de> for PExponent {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            Num(f64),
            Text(String),
        }
        let p = match Repr::deserialize(d)? {
            Repr::Num(v) => v,
            Repr::Text(t) if matches!(t.as_str(), "inf" | "infinity" | "Infinity") => f64::INFINITY,
            Repr::Text(t) => t.parse().map_err(serde::de::Error::custom)?,
        };
        PExponent::new(p).map_err(serde::de::Error::custom)
    }
}

fn same_dim(a: &Body, b: &Body) -> Result<()> {
    Error::check_dim(a.dim(), b.dim())
}

/// K° = {y : ⟨x, y⟩ ≤ 1 for all x ∈ K}.
pub fn polar(k: &Body) -> Body {
    match k.kind() {
        BodyKind::Ellipsoid(e) => Body::ellipsoid(e.polar()),
        BodyKind::Polytope(p) => Body::polytope(p.polar()),
        BodyKind::LpBall(b) => Body::from_kind(BodyKind::LpBall(LpBall {
            p: b.p.conjugate(),
            dim: b.dim,
        })),
        BodyKind::Polar(inner) => inner.clone(),
        BodyKind::Linear { map, body } => Body::from_kind(BodyKind::Linear {
            map: map.inverse_transpose(),
            body: polar(body),
        }),
        BodyKind::Scale { factor, body } => Body::from_kind(BodyKind::Scale {
            factor: 1.0 / factor,
            body: polar(body),
        }),
        BodyKind::Prod { p, a, b } => Body::from_kind(BodyKind::Prod {
            p: p.conjugate(),
            a: polar(a),
            b: polar(b),
        }),
        BodyKind::Cap { .. } | BodyKind::Sum { .. } | BodyKind::Shear(_) => {
            Body::from_kind(BodyKind::Polar(k.clone()))
        }
    }
}

/// A ∩_p B, the body with ‖x‖^p = ‖x‖_A^p + ‖x‖_B^p.
pub fn cap_p(p: PExponent, a: &Body, b: &Body) -> Result<Body> {
    same_dim(a, b)?;
    Ok(Body::from_kind(BodyKind::Cap {
        p,
        a: a.clone(),
        b: b.clone(),
    }))
}

/// A +_p B = {sa + tb : a ∈ A, b ∈ B, |s|^p + |t|^p ≤ 1}.
pub fn sum_p(p: PExponent, a: &Body, b: &Body) -> Result<Body> {
    same_dim(a, b)?;
    Ok(Body::from_kind(BodyKind::Sum {
        p,
        a: a.clone(),
        b: b.clone(),
    }))
}

/// A ×_p B ⊂ R^n × R^k.
pub fn prod_p(p: PExponent, a: &Body, b: &Body) -> Body {
    Body::from_kind(BodyKind::Prod {
        p,
        a: a.clone(),
        b: b.clone(),
    })
}

/// T·K for an invertible square matrix T.
pub fn linear_image(t: &DMatrix<f64>, k: &Body) -> Result<Body> {
    if t.nrows() != t.ncols() {
        return Err(Error::domain(format!(
            "linear map must be square, got {}x{}",
            t.nrows(),
            t.ncols()
        )));
    }
    Error::check_dim(k.dim(), t.ncols())?;
    Ok(apply_map(LinearMap::new(t.clone())?, k))
}

fn apply_map(map: LinearMap, k: &Body) -> Body {
    match k.kind() {
        BodyKind::Ellipsoid(e) => {
            let inv = &map.t_inv;
            let form = inv.transpose() * e.form().matrix() * inv;
            match Ellipsoid::new(SymMatrix::symmetrize(form)) {
                Ok(img) => Body::ellipsoid(img),
                Err(_) => Body::from_kind(BodyKind::Linear {
                    map,
                    body: k.clone(),
                }),
            }
        }
        BodyKind::Polytope(p) => Body::polytope(p.map_linear(&map.t, &map.t_inv)),
        BodyKind::Linear { map: inner, body } => Body::from_kind(BodyKind::Linear {
            map: map.compose(inner),
            body: body.clone(),
        }),
        _ => Body::from_kind(BodyKind::Linear {
            map,
            body: k.clone(),
        }),
    }
}

/// t·K for t > 0.
pub fn scale(t: f64, k: &Body) -> Result<Body> {
    if !(t > 0.0 && t.is_finite()) {
        return Err(Error::domain(format!(
            "scale factor must be positive and finite, got {t}"
        )));
    }
    Ok(match k.kind() {
        BodyKind::Ellipsoid(e) => Body::ellipsoid(e.scaled(t)?),
        BodyKind::Polytope(p) => {
            let n = p.dim();
            let m = DMatrix::from_diagonal_element(n, n, t);
            let m_inv = DMatrix::from_diagonal_element(n, n, 1.0 / t);
            Body::polytope(p.map_linear(&m, &m_inv))
        }
        BodyKind::Scale { factor, body } => Body::from_kind(BodyKind::Scale {
            factor: factor * t,
            body: body.clone(),
        }),
        _ => Body::from_kind(BodyKind::Scale {
            factor: t,
            body: k.clone(),
        }),
    })
}

/// The matrix of S(x, y) = (x, x + y) on R^n × R^n.
pub fn shear_matrix(n: usize) -> DMatrix<f64> {
    let mut s = DMatrix::identity(2 * n, 2 * n);
    for i in 0..n {
        s[(n + i, i)] = 1.0;
    }
    s
}

/// S⁻¹(x, y) = (x, y − x).
pub fn shear_inverse_matrix(n: usize) -> DMatrix<f64> {
    let mut s = DMatrix::identity(2 * n, 2 * n);
    for i in 0..n {
        s[(n + i, i)] = -1.0;
    }
    s
}

/// S(K ×₂ K'), with S kept structured so det S = 1 exactly.
pub fn shear_product(k: &Body, kdual: &Body) -> Result<Body> {
    same_dim(k, kdual)?;
    Ok(Body::from_kind(BodyKind::Shear(prod_p(
        PExponent::TWO,
        k,
        kdual,
    ))))
}
