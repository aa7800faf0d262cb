use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numkernel::{lp_solve, LpOutcome, LpProblem, SymMatrix};

/// Largest number of ± pairs in one representation; the LP behind the
/// missing representation has two constraints per pair.
pub const MAX_PAIRS: usize = crate::numkernel::lp::MAX_CONSTRAINTS / 2;

/// Origin-symmetric polytope given by vertices conv{±v_i}, by facets
/// {x : |a_iᵀx| ≤ 1}, or both. Lists hold one representative per ± pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SymPolytope {
    dim: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    vertices: Option<Vec<Vec<f64>>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    facets: Option<Vec<Vec<f64>>>,
}

impl SymPolytope {
    pub fn from_vertices(vertices: Vec<Vec<f64>>) -> Result<Self> {
        Self::new(None, Some(vertices), None)
    }

    pub fn from_facets(facets: Vec<Vec<f64>>) -> Result<Self> {
        Self::new(None, None, Some(facets))
    }

    pub fn new(
        dim: Option<usize>,
        vertices: Option<Vec<Vec<f64>>>,
        facets: Option<Vec<Vec<f64>>>,
    ) -> Result<Self> {
        let inferred = vertices
            .as_ref()
            .and_then(|v| v.first())
            .or_else(|| facets.as_ref().and_then(|f| f.first()))
            .map(|p| p.len());
        let dim = match (dim, inferred) {
            (Some(d), Some(i)) => {
                Error::check_dim(d, i)?;
                d
            }
            (_, Some(i)) => i,
            _ => {
                return Err(Error::Degenerate(
                    "polytope needs vertices or facets".into(),
                ))
            }
        };
        if dim == 0 {
            return Err(Error::Degenerate("zero-dimensional polytope".into()));
        }
        for list in [&vertices, &facets].into_iter().flatten() {
            if list.len() > MAX_PAIRS {
                return Err(Error::LpConfig(format!(
                    "{} pairs exceed the cap of {MAX_PAIRS}",
                    list.len()
                )));
            }
            for p in list {
                Error::check_dim(dim, p.len())?;
                if p.iter().any(|v| !v.is_finite()) {
                    return Err(Error::domain("non-finite polytope coordinate"));
                }
            }
            check_full_rank(list, dim)?;
        }
        let poly = SymPolytope {
            dim,
            vertices,
            facets,
        };
        if let (Some(vs), Some(fs)) = (&poly.vertices, &poly.facets) {
            for v in vs {
                let m = fs.iter().map(|a| dot(a, v).abs()).fold(0.0, f64::max);
                if (m - 1.0).abs() > 1e-9 {
                    return Err(Error::Degenerate(format!(
                        "vertex {v:?} is not on the facet boundary (max |a·v| = {m})"
                    )));
                }
            }
        }
        Ok(poly)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn vertices(&self) -> Option<&[Vec<f64>]> {
        self.vertices.as_deref()
    }

    pub fn facets(&self) -> Option<&[Vec<f64>]> {
        self.facets.as_deref()
    }

    pub fn gauge(&self, x: &[f64]) -> f64 {
        match (&self.facets, &self.vertices) {
            (Some(fs), _) => max_abs_dot(fs, x),
            (None, Some(vs)) => polyhedral_lp(vs, x).0,
            (None, None) => unreachable!(),
        }
    }

    pub fn support(&self, y: &[f64]) -> f64 {
        match (&self.vertices, &self.facets) {
            (Some(vs), _) => max_abs_dot(vs, y),
            (None, Some(fs)) => polyhedral_lp(fs, y).0,
            (None, None) => unreachable!(),
        }
    }

    pub fn support_point(&self, y: &[f64]) -> Vec<f64> {
        match (&self.vertices, &self.facets) {
            (Some(vs), _) => {
                let (i, s) = vs
                    .iter()
                    .enumerate()
                    .map(|(i, v)| (i, dot(v, y)))
                    .max_by(|a, b| a.1.abs().total_cmp(&b.1.abs()))
                    .unwrap();
                let sign = if s >= 0.0 { 1.0 } else { -1.0 };
                vs[i].iter().map(|c| sign * c).collect()
            }
            (None, Some(fs)) => polyhedral_lp(fs, y).1,
            (None, None) => unreachable!(),
        }
    }

    pub fn polar(&self) -> Self {
        SymPolytope {
            dim: self.dim,
            vertices: self.facets.clone(),
            facets: self.vertices.clone(),
        }
    }

    pub fn map_linear(&self, t: &nalgebra::DMatrix<f64>, t_inv: &nalgebra::DMatrix<f64>) -> Self {
        let apply = |m: &nalgebra::DMatrix<f64>, v: &Vec<f64>, transpose: bool| -> Vec<f64> {
            (0..self.dim)
                .map(|i| {
                    (0..self.dim)
                        .map(|j| if transpose { m[(j, i)] } else { m[(i, j)] } * v[j])
                        .sum()
                })
                .collect()
        };
        SymPolytope {
            dim: self.dim,
            vertices: self
                .vertices
                .as_ref()
                .map(|vs| vs.iter().map(|v| apply(t, v, false)).collect()),
            facets: self
                .facets
                .as_ref()
                .map(|fs| fs.iter().map(|a| apply(t_inv, a, true)).collect()),
        }
    }

    /// Area of a planar polytope by the shoelace formula over its hull.
    pub fn area_2d(&self) -> Option<f64> {
        if self.dim != 2 {
            return None;
        }
        let ring = match (&self.vertices, &self.facets) {
            (Some(vs), _) => symmetric_hull(vs),
            (None, Some(fs)) => {
                // vertices of {|a·x| ≤ 1} are dual to the edges of conv{±a}
                let hull = symmetric_hull(fs);
                let k = hull.len();
                (0..k)
                    .map(|i| {
                        let u = &hull[i];
                        let w = &hull[(i + 1) % k];
                        let det = u[0] * w[1] - u[1] * w[0];
                        vec![(w[1] - u[1]) / det, (u[0] - w[0]) / det]
                    })
                    .collect()
            }
            (None, None) => return None,
        };
        Some(shoelace(&ring))
    }

    /// Length of a one-dimensional polytope.
    pub fn length_1d(&self) -> Option<f64> {
        if self.dim != 1 {
            return None;
        }
        Some(2.0 / self.gauge(&[1.0]))
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(u, v)| u * v).sum()
}

fn max_abs_dot(list: &[Vec<f64>], x: &[f64]) -> f64 {
    list.iter().map(|a| dot(a, x).abs()).fold(0.0, f64::max)
}

/// max ⟨c, z⟩ subject to |aᵢ·z| ≤ 1: the gauge of conv{±aᵢ}° dual pair.
fn polyhedral_lp(normals: &[Vec<f64>], c: &[f64]) -> (f64, Vec<f64>) {
    let mut p = LpProblem::new(c.to_vec());
    for a in normals {
        p.constraints.push((a.clone(), 1.0));
        p.constraints.push((a.iter().map(|v| -v).collect(), 1.0));
    }
    match lp_solve(&p).expect("polytope sizes are validated at construction") {
        LpOutcome::Optimal { value, x } => (value.max(0.0), x),
        // full rank makes the feasible set bounded and it always holds 0
        other => unreachable!("polyhedral LP returned {other:?}"),
    }
}

fn check_full_rank(list: &[Vec<f64>], dim: usize) -> Result<()> {
    if list.len() < dim {
        return Err(Error::Degenerate(format!(
            "{} points cannot span dimension {dim}",
            list.len()
        )));
    }
    let gram = nalgebra::DMatrix::from_fn(dim, dim, |i, j| {
        list.iter().map(|p| p[i] * p[j]).sum::<f64>()
    });
    let gram = SymMatrix::new(gram)?;
    let e = gram.eigen();
    if !(e.min() > 1e-12 * e.max().max(f64::MIN_POSITIVE)) {
        return Err(Error::Degenerate(format!(
            "points do not span dimension {dim}"
        )));
    }
    Ok(())
}

/// Convex hull of {±p}, counter-clockwise (monotone chain).
fn symmetric_hull(points: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let mut pts: Vec<[f64; 2]> = points
        .iter()
        .flat_map(|p| [[p[0], p[1]], [-p[0], -p[1]]])
        .collect();
    pts.sort_by(|a, b| a[0].total_cmp(&b[0]).then(a[1].total_cmp(&b[1])));
    pts.dedup();
    let cross = |o: &[f64; 2], a: &[f64; 2], b: &[f64; 2]| {
        (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])
    };
    let mut lower: Vec<[f64; 2]> = Vec::new();
    for p in &pts {
        while lower.len() >= 2
            && cross(&lower[lower.len() - 2], &lower[lower.len() - 1], p) <= 1e-15
        {
            lower.pop();
        }
        lower.push(*p);
    }
    let mut upper: Vec<[f64; 2]> = Vec::new();
    for p in pts.iter().rev() {
        while upper.len() >= 2
            && cross(&upper[upper.len() - 2], &upper[upper.len() - 1], p) <= 1e-15
        {
            upper.pop();
        }
        upper.push(*p);
    }
    lower.pop();
    upper.pop();
    lower.extend(upper);
    lower.into_iter().map(|p| p.to_vec()).collect()
}

fn shoelace(ring: &[Vec<f64>]) -> f64 {
    let k = ring.len();
    let twice: f64 = (0..k)
        .map(|i| {
            let a = &ring[i];
            let b = &ring[(i + 1) % k];
            a[0] * b[1] - a[1] * b[0]
        })
        .sum();
    twice.abs() / 2.0
}

#[cfg(test)]
mod tests {
    use super::*;

    fn square_vertices() -> SymPolytope {
        SymPolytope::from_vertices(vec![vec![1.0, 1.0], vec![1.0, -1.0]]).unwrap()
    }

    #[test]
    fn gauge_by_lp_matches_facets() {
        let v = square_vertices();
        let f = SymPolytope::from_facets(vec![vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap();
        for x in [[0.5, -2.0], [0.3, 0.1], [-1.0, 1.0]] {
            assert!((v.gauge(&x) - f.gauge(&x)).abs() < 1e-8);
        }
        assert!((v.gauge(&[0.5, -2.0]) - 2.0).abs() < 1e-12);
        assert_eq!(v.support(&[1.0, 1.0]), 2.0);
        assert!((f.support(&[1.0, 1.0]) - 2.0).abs() < 1e-12);
    }

    #[test]
    fn both_representations_must_be_tight() {
        let ok = SymPolytope::new(
            None,
            Some(vec![vec![1.0, 1.0], vec![1.0, -1.0]]),
            Some(vec![vec![1.0, 0.0], vec![0.0, 1.0]]),
        );
        assert!(ok.is_ok());
        let bad = SymPolytope::new(
            None,
            Some(vec![vec![0.5, 0.5], vec![1.0, -1.0]]),
            Some(vec![vec![1.0, 0.0], vec![0.0, 1.0]]),
        );
        assert!(matches!(bad, Err(Error::Degenerate(_))));
    }

    #[test]
    fn rejects_lower_dimensional() {
        let r = SymPolytope::from_vertices(vec![vec![1.0, 1.0], vec![2.0, 2.0]]);
        assert!(matches!(r, Err(Error::Degenerate(_))));
        assert!(SymPolytope::from_facets(vec![vec![1.0, 0.0, 0.0]]).is_err());
    }

    #[test]
    fn polar_swaps_and_is_involutive() {
        let p = square_vertices();
        assert_eq!(p.polar().facets(), p.vertices());
        assert_eq!(p.polar().polar(), p);
    }

    #[test]
    fn planar_areas() {
        assert!((square_vertices().area_2d().unwrap() - 4.0).abs() < 1e-12);
        let cross = SymPolytope::from_facets(vec![vec![1.0, 1.0], vec![1.0, -1.0]]).unwrap();
        assert!((cross.area_2d().unwrap() - 2.0).abs() < 1e-12);
        // interior points are discarded by the hull
        let hex = SymPolytope::from_vertices(vec![
            vec![1.0, 0.0],
            vec![0.5, 0.8],
            vec![-0.5, 0.8],
            vec![0.1, 0.1],
        ])
        .unwrap();
        let area = hex.area_2d().unwrap();
        // two trapezoids with bases 2 and 1, height 0.8
        assert!((area - 2.4).abs() < 1e-12);
        let facet_version = hex.polar().polar();
        assert!((facet_version.area_2d().unwrap() - area).abs() < 1e-12);
    }

    #[test]
    fn support_point_is_a_maximizer() {
        let f =
            SymPolytope::from_facets(vec![vec![1.0, 0.0], vec![0.0, 1.0], vec![1.0, 1.0]]).unwrap();
        let y = [0.2, 0.9];
        let x = f.support_point(&y);
        assert!(f.gauge(&x) <= 1.0 + 1e-9);
        assert!((dot(&x, &y) - f.support(&y)).abs() < 1e-9);
    }
}
