use serde::{Deserialize, Serialize};

use crate::ops::PExponent;

/// Unit ball of the ℓ_p norm in R^n. p = ∞ is the cube [-1,1]^n, p = 1 the
/// cross-polytope.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LpBall {
    pub p: PExponent,
    pub dim: usize,
}

impl LpBall {
    pub fn gauge(&self, x: &[f64]) -> f64 {
        lp_norm(self.p, x)
    }

    pub fn support(&self, y: &[f64]) -> f64 {
        lp_norm(self.p.conjugate(), y)
    }

    /// A maximizer of ⟨x, y⟩ over the ball.
    pub fn support_point(&self, y: &[f64]) -> Vec<f64> {
        let q = self.p.conjugate();
        if self.p.is_infinite() {
            return y
                .iter()
                .map(|v| if *v >= 0.0 { 1.0 } else { -1.0 })
                .collect();
        }
        if self.p.value() == 1.0 {
            let (i, _) = y
                .iter()
                .enumerate()
                .max_by(|a, b| a.1.abs().total_cmp(&b.1.abs()))
                .unwrap();
            let mut x = vec![0.0; y.len()];
            x[i] = y[i].signum();
            return x;
        }
        let norm = lp_norm(q, y);
        if norm == 0.0 {
            return vec![0.0; y.len()];
        }
        let qv = q.value();
        y.iter()
            .map(|v| v.signum() * (v.abs() / norm).powf(qv - 1.0))
            .collect()
    }
}

/// ℓ_p norm, computed with max-scaling so large p does not overflow.
pub fn lp_norm(p: PExponent, x: &[f64]) -> f64 {
    let m = x.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    if p.is_infinite() || m == 0.0 {
        return m;
    }
    let pv = p.value();
    if pv == 1.0 {
        return x.iter().map(|v| v.abs()).sum();
    }
    if pv == 2.0 {
        return m * x.iter().map(|v| (v / m) * (v / m)).sum::<f64>().sqrt();
    }
    m * x
        .iter()
        .map(|v| (v.abs() / m).powf(pv))
        .sum::<f64>()
        .powf(1.0 / pv)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn norms() {
        let x = [3.0, -4.0];
        assert_eq!(lp_norm(PExponent::ONE, &x), 7.0);
        assert_eq!(lp_norm(PExponent::TWO, &x), 5.0);
        assert_eq!(lp_norm(PExponent::INFINITY, &x), 4.0);
        let l3 = LpBall {
            p: PExponent::new(3.0).unwrap(),
            dim: 3,
        };
        assert!((l3.support(&[1.0, 1.0, 1.0]) - 2.080_083_823_051_904).abs() < 1e-12);
    }

    #[test]
    fn support_point_attains_support() {
        for p in [1.0, 1.5, 2.0, 3.0, f64::INFINITY] {
            let b = LpBall {
                p: PExponent::new(p).unwrap(),
                dim: 3,
            };
            let y = [0.3, -1.2, 0.7];
            let x = b.support_point(&y);
            let dot: f64 = x.iter().zip(&y).map(|(a, c)| a * c).sum();
            assert!((b.gauge(&x) - 1.0).abs() < 1e-12, "p={p}");
            assert!((dot - b.support(&y)).abs() < 1e-12, "p={p}");
        }
    }
}
