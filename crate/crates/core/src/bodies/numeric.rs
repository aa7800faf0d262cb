//! Numeric gauges and supports for bodies without a closed form.
//!
//! Both fallbacks reduce to minimizing a norm over an affine hyperplane or
//! an infimal convolution, solved by Nelder–Mead. When a closed-form dual
//! norm is available the result is bracketed between a primal upper bound
//! and a dual lower bound, so the reported tolerance is certified.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use super::polytope::dot;
use super::Body;
use crate::numkernel::minimize::{minimize, MinimizeOptions, Minimum};
use crate::ops::PExponent;

/// Relative tolerance targeted by the numeric oracles.
pub const NUMERIC_TOL: f64 = 1e-8;

const START_SEED: u64 = 0x6d61_686c_6572;
const REFINE_ROUNDS: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NumericEstimate {
    pub value: f64,
    /// Relative gap between the best bounds found.
    pub achieved_tol: f64,
    pub converged: bool,
}

impl NumericEstimate {
    fn exact(value: f64) -> Self {
        NumericEstimate {
            value,
            achieved_tol: 0.0,
            converged: true,
        }
    }
}

fn norm2(x: &[f64]) -> f64 {
    dot(x, x).sqrt()
}

/// Orthonormal basis of the complement of y.
fn complement_basis(y: &[f64]) -> Vec<Vec<f64>> {
    let n = y.len();
    let ny = norm2(y);
    let mut basis: Vec<Vec<f64>> = vec![y.iter().map(|v| v / ny).collect()];
    for k in 0..n {
        let mut v = vec![0.0; n];
        v[k] = 1.0;
        for _ in 0..2 {
            for b in &basis {
                let c = dot(&v, b);
                v.iter_mut().zip(b).for_each(|(vi, bi)| *vi -= c * bi);
            }
        }
        let nv = norm2(&v);
        if nv > 1e-8 {
            v.iter_mut().for_each(|vi| *vi /= nv);
            basis.push(v);
        }
        if basis.len() == n {
            break;
        }
    }
    basis.remove(0);
    basis
}

/// Affine parametrization x(z) = y/|y|² + Σ z_i b_i of {x : ⟨x, y⟩ = 1}.
struct Hyperplane {
    base: Vec<f64>,
    basis: Vec<Vec<f64>>,
    scale: f64,
}

impl Hyperplane {
    fn new(y: &[f64]) -> Self {
        let yy = dot(y, y);
        Hyperplane {
            base: y.iter().map(|v| v / yy).collect(),
            basis: complement_basis(y),
            scale: 1.0 / yy.sqrt(),
        }
    }

    fn point(&self, z: &[f64], out: &mut [f64]) {
        out.copy_from_slice(&self.base);
        for (zi, b) in z.iter().zip(&self.basis) {
            out.iter_mut().zip(b).for_each(|(o, bi)| *o += zi * bi);
        }
    }

    /// min f over the hyperplane, starting from z0.
    fn minimize(&self, f: &dyn Fn(&[f64]) -> f64, z0: &[f64], opts: MinimizeOptions) -> Minimum {
        let mut buf = vec![0.0; self.base.len()];
        minimize(
            |z| {
                self.point(z, &mut buf);
                f(&buf)
            },
            z0,
            0.5 * self.scale,
            opts,
        )
    }
}

fn options(dim: usize, target: f64) -> MinimizeOptions {
    MinimizeOptions {
        ftol: 1e-13,
        max_evals: 1500 * (dim + 1),
        target,
        restarts: 6,
    }
}

/// h_K(y) = 1 / min{‖x‖_K : ⟨x, y⟩ = 1}, from the gauge oracle alone.
///
/// The problem is convex, so every start should reach the same value; the
/// spread between the two best starts is reported as the achieved tolerance.
pub fn dual_gauge_numeric(k: &Body, y: &[f64], starts: usize, tol: f64) -> NumericEstimate {
    let n = y.len();
    if norm2(y) == 0.0 {
        return NumericEstimate::exact(0.0);
    }
    let plane = Hyperplane::new(y);
    let gauge = |x: &[f64]| k.gauge_at(x);
    let mut rng = ChaCha8Rng::seed_from_u64(START_SEED ^ n as u64);
    let mut results = Vec::with_capacity(starts.max(1));
    for s in 0..starts.max(1) {
        let z0: Vec<f64> = (0..n - 1)
            .map(|_| {
                let g: f64 = StandardNormal.sample(&mut rng);
                if s == 0 {
                    0.0
                } else {
                    plane.scale * g
                }
            })
            .collect();
        let m = plane.minimize(&gauge, &z0, options(n, f64::NEG_INFINITY));
        results.push(1.0 / m.value);
    }
    results.sort_by(|a, b| b.total_cmp(a));
    let best = results[0];
    let spread = results.get(1).map_or(0.0, |second| (best - second) / best);
    NumericEstimate {
        value: best,
        achieved_tol: spread,
        converged: spread <= tol,
    }
}

/// N(x) = min_u ℓ_r(f_a(u), f_b(x − u)), bracketed against the closed-form dual
/// norm D = ℓ_{r*}(f_a*, f_b*) through N(x) = max_y ⟨x, y⟩ / D(y).
///
/// With `level` set, the search stops as soon as the comparison N(x) ≤ level
/// is decided; the returned value then lies on the correct side of `level`.
fn inf_convolution(
    r: PExponent,
    fa: &dyn Fn(&[f64]) -> f64,
    fb: &dyn Fn(&[f64]) -> f64,
    dual: &dyn Fn(&[f64]) -> f64,
    x: &[f64],
    level: Option<f64>,
    tol: f64,
) -> NumericEstimate {
    let n = x.len();
    let xx = dot(x, x);
    if xx == 0.0 {
        return NumericEstimate::exact(0.0);
    }
    let (a, b) = (fa(x), fb(x));
    // best split of x along its own ray
    let lambda = if r.is_infinite() {
        b / (a + b)
    } else if r.value() == 1.0 {
        if a <= b {
            1.0
        } else {
            0.0
        }
    } else {
        1.0 / (1.0 + (a / b).powf(r.q()))
    };
    let mut hi = r.combine(lambda * a, (1.0 - lambda) * b);
    let mut lo = xx / dual(x);
    let finish = |lo: f64, hi: f64| {
        let gap = ((hi - lo) / hi).max(0.0);
        NumericEstimate {
            value: 0.5 * (lo + hi),
            achieved_tol: gap,
            converged: gap <= tol,
        }
    };
    if let Some(t) = level {
        if hi <= t {
            return NumericEstimate {
                value: hi,
                achieved_tol: f64::NAN,
                converged: true,
            };
        }
        if lo > t {
            return NumericEstimate {
                value: lo,
                achieved_tol: f64::NAN,
                converged: true,
            };
        }
    }
    if hi - lo <= tol * hi {
        return finish(lo, hi);
    }

    let mut rest = vec![0.0; n];
    let mut primal = |u: &[f64]| {
        rest.iter_mut()
            .zip(x.iter().zip(u))
            .for_each(|(r, (xi, ui))| *r = xi - ui);
        r.combine(fa(u), fb(&rest))
    };
    let plane = Hyperplane::new(x);
    let primal_opts = options(n, level.unwrap_or(f64::NEG_INFINITY));
    let dual_opts = options(n, level.map_or(f64::NEG_INFINITY, |t| 1.0 / t));
    let mut u: Vec<f64> = x.iter().map(|v| lambda * v).collect();
    let mut z = vec![0.0; n - 1];
    let mut rng = ChaCha8Rng::seed_from_u64(START_SEED ^ n as u64);
    let mut step = 0.25 * xx.sqrt();
    // Nelder–Mead can stall on kinks; later rounds restart from a jittered
    // incumbent with a fresh simplex.
    for round in 0..REFINE_ROUNDS {
        let start: Vec<f64> = if round == 0 {
            u.clone()
        } else {
            u.iter().map(|v| v + step * gaussian(&mut rng)).collect()
        };
        let m = minimize(&mut primal, &start, step, primal_opts);
        if m.value < hi {
            hi = m.value;
            u = m.x;
        }
        if let Some(t) = level {
            if hi <= t {
                return NumericEstimate {
                    value: hi,
                    achieved_tol: f64::NAN,
                    converged: true,
                };
            }
        }
        let zstart: Vec<f64> = if round == 0 {
            z.clone()
        } else {
            z.iter()
                .map(|v| v + step / xx * gaussian(&mut rng))
                .collect()
        };
        let d = plane.minimize(dual, &zstart, dual_opts);
        if 1.0 / d.value > lo {
            lo = 1.0 / d.value;
            z = d.x;
        }
        if let Some(t) = level {
            if lo > t {
                return NumericEstimate {
                    value: lo,
                    achieved_tol: f64::NAN,
                    converged: true,
                };
            }
        }
        if hi - lo <= tol * hi {
            break;
        }
        step *= 0.3;
    }
    finish(lo, hi)
}

fn gaussian(rng: &mut ChaCha8Rng) -> f64 {
    StandardNormal.sample(rng)
}

/// Gauge of A +_p B.
pub(crate) fn sum_gauge(
    p: PExponent,
    a: &Body,
    b: &Body,
    x: &[f64],
    level: Option<f64>,
) -> NumericEstimate {
    let q = p.conjugate();
    inf_convolution(
        p,
        &|u| a.gauge_at(u),
        &|u| b.gauge_at(u),
        &|y| q.combine(a.support_at(y), b.support_at(y)),
        x,
        level,
        NUMERIC_TOL,
    )
}

/// Support of A ∩_p B, using (A ∩_p B)° = A° +_q B°.
pub(crate) fn cap_support(
    p: PExponent,
    a: &Body,
    b: &Body,
    y: &[f64],
    level: Option<f64>,
) -> NumericEstimate {
    inf_convolution(
        p.conjugate(),
        &|u| a.support_at(u),
        &|u| b.support_at(u),
        &|x| p.combine(a.gauge_at(x), b.gauge_at(x)),
        y,
        level,
        NUMERIC_TOL,
    )
}

/// Full estimate (with certified gap) for the gauge of a p-sum node or the
/// support of a p-intersection node; `None` for other node types.
pub fn numeric_gauge(k: &Body, x: &[f64]) -> Option<NumericEstimate> {
    match k.kind() {
        super::BodyKind::Sum { p, a, b } => Some(sum_gauge(*p, a, b, x, None)),
        super::BodyKind::Polar(inner) => numeric_support(inner, x),
        _ => None,
    }
}

pub fn numeric_support(k: &Body, y: &[f64]) -> Option<NumericEstimate> {
    match k.kind() {
        super::BodyKind::Cap { p, a, b } => Some(cap_support(*p, a, b, y, None)),
        super::BodyKind::Polar(inner) => numeric_gauge(inner, y),
        _ => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bodies::Ellipsoid;
    use crate::numkernel::SymMatrix;
    use crate::ops::{cap_p, scale, sum_p};

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs().max(1e-300)
    }

    #[test]
    fn basis_is_orthonormal() {
        let y = [0.3, -1.0, 2.0, 0.5];
        let b = complement_basis(&y);
        assert_eq!(b.len(), 3);
        for (i, u) in b.iter().enumerate() {
            assert!(dot(u, &y).abs() < 1e-14);
            for (j, v) in b.iter().enumerate() {
                let expect = if i == j { 1.0 } else { 0.0 };
                assert!((dot(u, v) - expect).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn dual_gauge_examples() {
        let disk = Body::ball(2).unwrap();
        let e = dual_gauge_numeric(&disk, &[0.0, 7.0], 16, 1e-8);
        assert!(rel(e.value, 7.0) < 1e-8, "{e:?}");
        let l3 = Body::lp_ball(PExponent::new(3.0).unwrap(), 3).unwrap();
        let e = dual_gauge_numeric(&l3, &[1.0, 1.0, 1.0], 16, 1e-8);
        assert!(rel(e.value, 2.080_083_823_051_904_1) < 1e-7, "{e:?}");
        let cube = Body::cube(4).unwrap();
        let e = dual_gauge_numeric(&cube, &[1.0, -1.0, 1.0, -1.0], 16, 1e-8);
        assert!(rel(e.value, 4.0) < 1e-7, "{e:?}");
    }

    #[test]
    fn dual_gauge_matches_exact_supports() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for p in [1.0, 1.5, 2.0, 3.0, f64::INFINITY] {
            for n in 2..=5 {
                let k = Body::lp_ball(PExponent::new(p).unwrap(), n).unwrap();
                let y: Vec<f64> = (0..n).map(|_| StandardNormal.sample(&mut rng)).collect();
                let e = dual_gauge_numeric(&k, &y, 16, 1e-8);
                let exact = k.support(&y).unwrap();
                assert!(
                    rel(e.value, exact) < 1e-6,
                    "p={p} n={n}: {} vs {exact}",
                    e.value
                );
            }
        }
    }

    #[test]
    fn sum_gauges_match_closed_forms() {
        let cube = Body::cube(3).unwrap();
        let s = sum_p(PExponent::INFINITY, &cube, &cube).unwrap();
        let x = [0.3, -1.4, 0.9];
        let est = numeric_gauge(&s, &x).unwrap();
        assert!(rel(est.value, 0.7) < 1e-8 && est.converged, "{est:?}");

        let disk = Body::ball(2).unwrap();
        let s = sum_p(PExponent::TWO, &disk, &disk).unwrap();
        let est = numeric_gauge(&s, &[0.6, 0.8]).unwrap();
        assert!(rel(est.value, 1.0 / 2f64.sqrt()) < 1e-8, "{est:?}");

        // convex hull of the cube and a long thin ellipse
        let e = Body::ellipsoid(Ellipsoid::new(SymMatrix::diagonal(&[0.04, 25.0, 25.0])).unwrap());
        let hull = sum_p(PExponent::ONE, &cube, &e).unwrap();
        let est = numeric_gauge(&hull, &[5.0, 0.0, 0.0]).unwrap();
        assert!(rel(est.value, 1.0) < 1e-8, "{est:?}");
    }

    #[test]
    fn level_queries_agree_with_values() {
        let k = Body::cube(3).unwrap();
        let kp = scale(0.8, &Body::cross(3).unwrap()).unwrap();
        let s = sum_p(PExponent::TWO, &k, &kp).unwrap();
        let c = cap_p(PExponent::TWO, &k, &kp).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..50 {
            let x: Vec<f64> = (0..3).map(|_| StandardNormal.sample(&mut rng)).collect();
            let g = numeric_gauge(&s, &x).unwrap();
            assert!(g.converged, "{g:?}");
            for t in [0.9, 0.999, 1.001, 1.1] {
                assert_eq!(s.gauge_le(&x, t * g.value), t > 1.0, "{x:?} {t}");
            }
            let h = numeric_support(&c, &x).unwrap();
            assert!(h.converged, "{h:?}");
            for t in [0.9, 0.999, 1.001, 1.1] {
                assert_eq!(c.support_le(&x, t * h.value), t > 1.0);
            }
        }
    }
}
