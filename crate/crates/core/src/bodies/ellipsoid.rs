use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numkernel::{ln_ball_volume, Cholesky, SymMatrix};

/// {x : xᵀ M x ≤ 1} for a positive-definite form M.
#[derive(Debug, Clone)]
pub struct Ellipsoid {
    form: SymMatrix,
    inverse: SymMatrix,
    chol: Cholesky,
    log_det: f64,
}

#[derive(Serialize, Deserialize)]
struct EllipsoidRepr {
    matrix: SymMatrix,
}

impl Serialize for Ellipsoid {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        EllipsoidRepr {
            matrix: self.form.clone(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for Ellipsoid {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let repr = EllipsoidRepr::deserialize(d)?;
        Ellipsoid::new(repr.matrix).map_err(serde::de::Error::custom)
    }
}

impl PartialEq for Ellipsoid {
    fn eq(&self, other: &Self) -> bool {
        self.form == other.form
    }
}

impl Ellipsoid {
    pub fn new(form: SymMatrix) -> Result<Self> {
        let chol = form.cholesky()?;
        let inverse = chol.inverse();
        let log_det = chol.log_det();
        Ok(Ellipsoid {
            form,
            inverse,
            chol,
            log_det,
        })
    }

    /// Euclidean ball of the given radius.
    pub fn ball(dim: usize, radius: f64) -> Result<Self> {
        if !(radius > 0.0) {
            return Err(Error::domain(format!(
                "ball radius must be positive, got {radius}"
            )));
        }
        Ellipsoid::new(SymMatrix::identity(dim).scaled(1.0 / (radius * radius)))
    }

    pub fn dim(&self) -> usize {
        self.form.dim()
    }

    pub fn form(&self) -> &SymMatrix {
        &self.form
    }

    pub fn inverse_form(&self) -> &SymMatrix {
        &self.inverse
    }

    pub fn log_det(&self) -> f64 {
        self.log_det
    }

    pub fn gauge(&self, x: &[f64]) -> f64 {
        self.form.quad_form(x).max(0.0).sqrt()
    }

    pub fn support(&self, y: &[f64]) -> f64 {
        self.inverse.quad_form(y).max(0.0).sqrt()
    }

    pub fn support_point(&self, y: &[f64]) -> Vec<f64> {
        let h = self.support(y);
        if h == 0.0 {
            return vec![0.0; y.len()];
        }
        let m = self.inverse.matrix();
        (0..y.len())
            .map(|i| (0..y.len()).map(|j| m[(i, j)] * y[j]).sum::<f64>() / h)
            .collect()
    }

    pub fn ln_volume(&self) -> f64 {
        ln_ball_volume(self.dim()).expect("dim >= 1") - 0.5 * self.log_det
    }

    pub fn volume(&self) -> f64 {
        self.ln_volume().exp()
    }

    /// t·E.
    pub fn scaled(&self, t: f64) -> Result<Self> {
        if !(t > 0.0) {
            return Err(Error::domain(format!(
                "scale factor must be positive, got {t}"
            )));
        }
        Ellipsoid::new(self.form.scaled(1.0 / (t * t)))
    }

    /// E° = {y : yᵀ M⁻¹ y ≤ 1}.
    pub fn polar(&self) -> Self {
        Ellipsoid::new(self.inverse.clone()).expect("inverse of a PD form is PD")
    }

    /// Maps a point of the unit ball onto E: solves Lᵀ x = z with M = L Lᵀ.
    pub fn from_unit_ball(&self, z: &[f64]) -> Vec<f64> {
        self.chol.solve_upper(z)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn gauge_support_volume() {
        let e = Ellipsoid::new(SymMatrix::diagonal(&[0.25, 1.0])).unwrap();
        assert_eq!(e.gauge(&[2.0, 0.0]), 1.0);
        assert!((e.volume() - 2.0 * PI).abs() < 1e-12);
        let b = Ellipsoid::ball(2, 1.0).unwrap();
        assert_eq!(b.support(&[3.0, 4.0]), 5.0);
        let p = Ellipsoid::new(SymMatrix::diagonal(&[4.0, 1.0]))
            .unwrap()
            .polar();
        assert!((p.form().get(0, 0) - 0.25).abs() < 1e-15);
    }

    #[test]
    fn unit_ball_map_lands_on_boundary() {
        let e = Ellipsoid::new(SymMatrix::from_rows(&[vec![2.0, 0.5], vec![0.5, 1.0]]).unwrap())
            .unwrap();
        for z in [[1.0, 0.0], [0.0, 1.0], [0.6, 0.8]] {
            assert!((e.gauge(&e.from_unit_ball(&z)) - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn rejects_indefinite_and_roundtrips_json() {
        assert_eq!(
            Ellipsoid::new(SymMatrix::diagonal(&[1.0, -1.0])).unwrap_err(),
            Error::NotPositiveDefinite
        );
        let e = Ellipsoid::new(SymMatrix::diagonal(&[0.25, 1.0])).unwrap();
        let s = serde_json::to_string(&e).unwrap();
        assert_eq!(s, r#"{"matrix":[[0.25,0.0],[0.0,1.0]]}"#);
        let back: Ellipsoid = serde_json::from_str(&s).unwrap();
        assert_eq!(back, e);
    }
}
