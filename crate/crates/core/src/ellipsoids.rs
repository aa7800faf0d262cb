//! Löwner and John ellipsoids, sandwich certificates and the F-ellipsoid.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::bodies::{Body, BodyKind, Ellipsoid};
use crate::error::{Error, Result};
use crate::numkernel::minimize::{minimize, MinimizeOptions};
use crate::numkernel::{matrix_geometric_mean, SymMatrix};
use crate::ops;
use crate::volume::random_directions;

pub const MVEE_EPS: f64 = 1e-7;
pub const MVEE_MAX_ITER: usize = 100_000;
/// Relative tolerance of sampled containment checks.
pub const CONTAINMENT_TOL: f64 = 1e-7;

const DIRECTION_SEED: u64 = 0x6a6f_686e;

/// Result of the centered minimum-volume enclosing ellipsoid iteration.
#[derive(Debug, Clone)]
pub struct Mvee {
    pub ellipsoid: Ellipsoid,
    pub iterations: usize,
    /// max_i p_iᵀX⁻¹p_i / n − 1 at termination.
    pub violation: f64,
    pub converged: bool,
}

fn moment(points: &[Vec<f64>], u: &[f64], n: usize) -> DMatrix<f64> {
    let mut x = DMatrix::<f64>::zeros(n, n);
    for (p, &w) in points.iter().zip(u) {
        if w == 0.0 {
            continue;
        }
        for i in 0..n {
            for j in 0..=i {
                x[(i, j)] += w * p[i] * p[j];
            }
        }
    }
    for i in 0..n {
        for j in 0..i {
            x[(j, i)] = x[(i, j)];
        }
    }
    x
}

fn quad(m: &DMatrix<f64>, p: &[f64]) -> f64 {
    let n = p.len();
    let mut s = 0.0;
    for i in 0..n {
        let mut row = 0.0;
        for j in 0..n {
            row += m[(i, j)] * p[j];
        }
        s += p[i] * row;
    }
    s
}

fn refresh(points: &[Vec<f64>], u: &[f64], n: usize) -> Result<(DMatrix<f64>, Vec<f64>)> {
    let x = SymMatrix::symmetrize(moment(points, u, n));
    let e = x.eigen();
    if !(e.min() > 1e-13 * e.max()) {
        return Err(Error::Degenerate("points do not span the space".into()));
    }
    let inv = x.cholesky()?.inverse().matrix().clone();
    let kappa = points.iter().map(|p| quad(&inv, p)).collect();
    Ok((inv, kappa))
}

/// Minimum-volume centered ellipsoid containing ±points, by Khachiyan's
/// barycentric ascent with Todd–Yıldırım away steps.
///
/// Stops once every point has κ_i = p_iᵀX⁻¹p_i ≤ n(1+eps) and every weighted
/// point has κ_i ≥ (1−eps)·max κ. The returned form is scaled so the largest
/// p_iᵀMp_i is exactly 1, which leaves the weighted points within eps of the
/// boundary.
pub fn mvee_symmetric(points: &[Vec<f64>], eps: f64) -> Result<Mvee> {
    let n = points
        .first()
        .map(Vec::len)
        .ok_or_else(|| Error::Degenerate("no points".into()))?;
    if n == 0 {
        return Err(Error::Degenerate("zero-dimensional points".into()));
    }
    if let Some(p) = points.iter().find(|p| p.len() != n) {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: p.len(),
        });
    }
    let m = points.len();
    let nf = n as f64;
    let mut u = vec![1.0 / m as f64; m];
    let (mut xinv, mut kappa) = refresh(points, &u, n)?;
    let mut iterations = 0;
    let mut converged = false;
    let mut w = vec![0.0; n];
    while iterations < MVEE_MAX_ITER {
        let (j, kmax) = argmax(&kappa, |_| true);
        let (l, kmin) = argmin(&kappa, |i| u[i] > 0.0);
        if kmax <= nf * (1.0 + eps) && kmin >= kmax * (1.0 - eps) {
            converged = true;
            break;
        }
        iterations += 1;
        let (idx, alpha) = if kmax - nf >= nf - kmin {
            (j, (kmax - nf) / (nf * (kmax - 1.0)))
        } else {
            let floor = -u[l] / (1.0 - u[l]);
            let a = if kmin <= 1.0 {
                floor
            } else {
                ((kmin - nf) / (nf * (kmin - 1.0))).max(floor)
            };
            (l, a)
        };
        let dropped = idx == l && alpha <= -u[l] / (1.0 - u[l]);
        u.iter_mut().for_each(|v| *v *= 1.0 - alpha);
        u[idx] += alpha;
        if dropped {
            u[idx] = 0.0;
        }

        if iterations % 64 == 0 {
            (xinv, kappa) = refresh(points, &u, n)?;
            continue;
        }
        // Sherman–Morrison for X ← (1−α)X + α p pᵀ
        let p = &points[idx];
        for (a, wa) in w.iter_mut().enumerate() {
            *wa = (0..n).map(|b| xinv[(a, b)] * p[b]).sum();
        }
        let denom = (1.0 - alpha) + alpha * kappa[idx];
        let c = 1.0 / (1.0 - alpha);
        for a in 0..n {
            for b in 0..n {
                xinv[(a, b)] = c * (xinv[(a, b)] - alpha * w[a] * w[b] / denom);
            }
        }
        for (k, pk) in kappa.iter_mut().zip(points) {
            let s: f64 = pk.iter().zip(&w).map(|(x, y)| x * y).sum();
            *k = c * (*k - alpha * s * s / denom);
        }
    }
    let (xinv, kappa) = refresh(points, &u, n)?;
    let kmax = kappa.iter().cloned().fold(0.0, f64::max);
    let form = SymMatrix::symmetrize(xinv / kmax);
    Ok(Mvee {
        ellipsoid: Ellipsoid::new(form)?,
        iterations,
        violation: kmax / nf - 1.0,
        converged,
    })
}

fn argmax(v: &[f64], keep: impl Fn(usize) -> bool) -> (usize, f64) {
    let mut best = (0, f64::NEG_INFINITY);
    for (i, &x) in v.iter().enumerate() {
        if keep(i) && x > best.1 {
            best = (i, x);
        }
    }
    best
}

fn argmin(v: &[f64], keep: impl Fn(usize) -> bool) -> (usize, f64) {
    let mut best = (0, f64::INFINITY);
    for (i, &x) in v.iter().enumerate() {
        if keep(i) && x < best.1 {
            best = (i, x);
        }
    }
    best
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LoewnerMethod {
    ClosedForm,
    Vertices,
    VertexAscent,
    Sampled,
}

#[derive(Debug, Clone)]
pub struct Loewner {
    pub ellipsoid: Ellipsoid,
    /// Factor by which the fitted ellipsoid was enlarged to cover every
    /// checked boundary point (1 when no enlargement was needed).
    pub inflation: f64,
    pub method: LoewnerMethod,
}

#[derive(Debug, Clone, Copy)]
pub struct LoewnerOptions {
    pub boundary_samples: usize,
    pub check_directions: usize,
    pub eps: f64,
    pub seed: u64,
}

impl Default for LoewnerOptions {
    fn default() -> Self {
        LoewnerOptions {
            boundary_samples: 512,
            check_directions: 4096,
            eps: MVEE_EPS,
            seed: DIRECTION_SEED,
        }
    }
}

/// Minimum-volume ellipsoid containing K.
pub fn loewner(k: &Body, boundary_samples: usize) -> Result<Ellipsoid> {
    let opts = LoewnerOptions {
        boundary_samples,
        ..LoewnerOptions::default()
    };
    Ok(loewner_report(k, &opts)?.ellipsoid)
}

fn closed(ellipsoid: Ellipsoid) -> Loewner {
    Loewner {
        ellipsoid,
        inflation: 1.0,
        method: LoewnerMethod::ClosedForm,
    }
}

/// T·E, given T⁻¹.
fn map_ellipsoid(e: &Ellipsoid, t_inv: &DMatrix<f64>) -> Result<Ellipsoid> {
    Ellipsoid::new(SymMatrix::symmetrize(
        t_inv.transpose() * e.form().matrix() * t_inv,
    ))
}

/// Löwner ellipsoid with provenance: closed forms for ellipsoids and ℓ_p
/// balls, exact MVEE for vertex polytopes, equivariance through linear maps
/// and scalings, and boundary sampling with certified inflation otherwise.
pub fn loewner_report(k: &Body, opts: &LoewnerOptions) -> Result<Loewner> {
    let n = k.dim();
    match k.kind() {
        BodyKind::Ellipsoid(e) => Ok(closed(e.clone())),
        BodyKind::LpBall(b) => {
            let radius = if b.p.is_infinite() {
                (n as f64).sqrt()
            } else if b.p.value() <= 2.0 {
                1.0
            } else {
                (n as f64).powf(0.5 - 1.0 / b.p.value())
            };
            Ok(closed(Ellipsoid::ball(n, radius)?))
        }
        BodyKind::Polytope(p) => match p.vertices() {
            Some(vs) => {
                let m = mvee_symmetric(vs, opts.eps)?;
                Ok(Loewner {
                    ellipsoid: m.ellipsoid,
                    inflation: 1.0,
                    method: LoewnerMethod::Vertices,
                })
            }
            None => vertex_ascent(k, opts),
        },
        BodyKind::Linear { map, body } => {
            let inner = loewner_report(body, opts)?;
            Ok(Loewner {
                ellipsoid: map_ellipsoid(&inner.ellipsoid, &map.t_inv)?,
                ..inner
            })
        }
        BodyKind::Scale { factor, body } => {
            let inner = loewner_report(body, opts)?;
            Ok(Loewner {
                ellipsoid: inner.ellipsoid.scaled(*factor)?,
                ..inner
            })
        }
        BodyKind::Shear(body) => {
            let inner = loewner_report(body, opts)?;
            let s_inv = ops::shear_inverse_matrix(n / 2);
            Ok(Loewner {
                ellipsoid: map_ellipsoid(&inner.ellipsoid, &s_inv)?,
                ..inner
            })
        }
        BodyKind::Polar(_)
        | BodyKind::Cap { .. }
        | BodyKind::Sum { .. }
        | BodyKind::Prod { .. } => sampled(k, opts),
    }
}

fn boundary_point(k: &Body, d: &[f64]) -> Vec<f64> {
    let g = k.gauge_at(d);
    d.iter().map(|v| v / g).collect()
}

/// Largest E-gauge of K's boundary over check directions, with the points
/// that exceed 1.
fn worst_ratio(k: &Body, e: &Ellipsoid, dirs: &[Vec<f64>]) -> (f64, Vec<Vec<f64>>) {
    let mut worst = 0.0f64;
    let mut outside = Vec::new();
    for d in dirs {
        let x = boundary_point(k, d);
        let r = e.gauge(&x);
        worst = worst.max(r);
        if r > 1.0 {
            outside.push(x);
        }
    }
    (worst, outside)
}

fn inflate(e: &Ellipsoid, factor: f64) -> Result<Ellipsoid> {
    if factor > 1.0 {
        e.scaled(factor)
    } else {
        Ok(e.clone())
    }
}

fn axis_directions(n: usize) -> Vec<Vec<f64>> {
    (0..n)
        .map(|i| {
            let mut e = vec![0.0; n];
            e[i] = 1.0;
            e
        })
        .collect()
}

/// Locally maximizes the E-gauge of K's boundary point in direction d.
fn polish(k: &Body, e: &Ellipsoid, d: &[f64]) -> Vec<f64> {
    let opts = MinimizeOptions {
        ftol: 1e-12,
        max_evals: 300 * (d.len() + 1),
        restarts: 2,
        ..Default::default()
    };
    let m = minimize(|v| -e.gauge(v) / k.gauge_at(v).max(1e-300), d, 0.05, opts);
    boundary_point(k, &m.x)
}

fn sampled(k: &Body, opts: &LoewnerOptions) -> Result<Loewner> {
    let n = k.dim();
    let mut dirs = axis_directions(n);
    dirs.extend(random_directions(n, opts.boundary_samples, opts.seed));
    let mut points: Vec<Vec<f64>> = dirs.iter().map(|d| boundary_point(k, d)).collect();
    let checks = random_directions(n, opts.check_directions, opts.seed.wrapping_add(1));
    let mut e = mvee_symmetric(&points, opts.eps)?.ellipsoid;
    let mut worst = 1.0f64;
    for _ in 0..8 {
        let mut ranked: Vec<(f64, &Vec<f64>)> = checks
            .iter()
            .map(|d| (e.gauge(&boundary_point(k, d)), d))
            .collect();
        ranked.sort_by(|a, b| b.0.total_cmp(&a.0));
        worst = ranked[0].0;
        let mut added = 0;
        for (_, d) in ranked.iter().take(2 * n) {
            let x = polish(k, &e, d);
            let g = e.gauge(&x);
            worst = worst.max(g);
            if g > 1.0 + 1e-12 {
                points.push(x);
                added += 1;
            }
        }
        if added == 0 {
            break;
        }
        e = mvee_symmetric(&points, opts.eps)?.ellipsoid;
    }
    let inflation = worst.max(1.0);
    Ok(Loewner {
        ellipsoid: inflate(&e, inflation)?,
        inflation,
        method: LoewnerMethod::Sampled,
    })
}

/// Convex maximization of xᵀMx over K by repeated support points; ends at a
/// vertex that is a local maximizer.
fn ascend(k: &Body, e: &Ellipsoid, start: &[f64]) -> Option<Vec<f64>> {
    let mut x = k.support_point(start)?;
    let m = e.form();
    for _ in 0..64 {
        let grad: Vec<f64> = (0..x.len())
            .map(|i| (0..x.len()).map(|j| m.get(i, j) * x[j]).sum())
            .collect();
        let next = k.support_point(&grad)?;
        if m.quad_form(&next) <= m.quad_form(&x) * (1.0 + 1e-14) {
            break;
        }
        x = next;
    }
    Some(x)
}

fn vertex_ascent(k: &Body, opts: &LoewnerOptions) -> Result<Loewner> {
    let n = k.dim();
    let mut starts = axis_directions(n);
    starts.extend(random_directions(n, 64 * n, opts.seed));
    let mut vertices: Vec<Vec<f64>> = Vec::new();
    let push = |vs: &mut Vec<Vec<f64>>, x: Vec<f64>| {
        let close =
            |a: &Vec<f64>, sign: f64| a.iter().zip(&x).all(|(p, q)| (p - sign * q).abs() <= 1e-9);
        if !vs.iter().any(|v| close(v, 1.0) || close(v, -1.0)) {
            vs.push(x);
        }
    };
    for s in &starts {
        if let Some(x) = k.support_point(s) {
            push(&mut vertices, x);
        }
    }
    let mut e = mvee_symmetric(&vertices, opts.eps)?.ellipsoid;
    let mut worst = 1.0f64;
    for _ in 0..20 {
        worst = 1.0;
        let mut added = false;
        for s in &starts {
            let Some(x) = ascend(k, &e, s) else { continue };
            let g = e.gauge(&x);
            worst = worst.max(g);
            if g > 1.0 + 1e-12 {
                let before = vertices.len();
                push(&mut vertices, x);
                added |= vertices.len() > before;
            }
        }
        if !added {
            break;
        }
        e = mvee_symmetric(&vertices, opts.eps)?.ellipsoid;
    }
    let checks = random_directions(n, opts.check_directions, opts.seed.wrapping_add(1));
    let (sampled_worst, _) = worst_ratio(k, &e, &checks);
    let inflation = worst.max(sampled_worst).max(1.0);
    Ok(Loewner {
        ellipsoid: inflate(&e, inflation)?,
        inflation,
        method: LoewnerMethod::VertexAscent,
    })
}

/// Checks E ⊆ K on sampled directions: every boundary point of E has
/// K-gauge at most 1 + tol.
pub fn check_inside(e: &Ellipsoid, k: &Body, directions: usize, seed: u64, tol: f64) -> Result<()> {
    Error::check_dim(k.dim(), e.dim())?;
    for d in random_directions(k.dim(), directions, seed) {
        let x = e.from_unit_ball(&d);
        if !k.gauge_le(&x, 1.0 + tol) {
            return Err(Error::Containment {
                direction: d,
                detail: format!("ellipsoid leaves the body (gauge {:.12})", k.gauge_at(&x)),
            });
        }
    }
    Ok(())
}

/// Checks K ⊆ E on sampled directions.
pub fn check_outside(
    e: &Ellipsoid,
    k: &Body,
    directions: usize,
    seed: u64,
    tol: f64,
) -> Result<()> {
    crate::volume::check_envelope(k, e, directions, seed, tol)
}

/// Maximum-volume ellipsoid inside K, as the polar of the Löwner ellipsoid
/// of K°.
pub fn john(k: &Body) -> Result<Ellipsoid> {
    john_with(k, &LoewnerOptions::default())
}

pub fn john_with(k: &Body, opts: &LoewnerOptions) -> Result<Ellipsoid> {
    let outer = loewner_report(&ops::polar(k), opts)?;
    let j = outer.ellipsoid.polar();
    check_inside(&j, k, 1000, DIRECTION_SEED, CONTAINMENT_TOL)?;
    Ok(j)
}

/// Ellipsoids E₁ ⊆ K ⊆ E₂ with (Vol E₂ / Vol E₁) = r^n.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SandwichCertificate {
    pub inner: Ellipsoid,
    pub outer: Ellipsoid,
    pub ratio_r: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl SandwichCertificate {
    /// Pairs two ellipsoids, checking E₁ ⊆ E₂ from their forms.
    pub fn new(inner: Ellipsoid, outer: Ellipsoid) -> Result<Self> {
        Error::check_dim(inner.dim(), outer.dim())?;
        check_nested(&inner, &outer)?;
        let n = inner.dim() as f64;
        let ratio_r = ((outer.ln_volume() - inner.ln_volume()) / n).exp();
        Ok(SandwichCertificate {
            inner,
            outer,
            ratio_r,
            note: None,
        })
    }

    pub fn dim(&self) -> usize {
        self.inner.dim()
    }

    /// Checks E₁ ⊆ K ⊆ E₂ on `directions` sampled directions.
    pub fn verify(&self, k: &Body, directions: usize, seed: u64, tol: f64) -> Result<()> {
        check_inside(&self.inner, k, directions, seed, tol)?;
        check_outside(&self.outer, k, directions, seed.wrapping_add(1), tol)
    }
}

/// E₁ ⊆ E₂ iff N − M is positive semidefinite (N, M the forms of E₁, E₂).
fn check_nested(inner: &Ellipsoid, outer: &Ellipsoid) -> Result<()> {
    let n = inner.form().matrix();
    let m = outer.form().matrix();
    let diff = SymMatrix::symmetrize(n - m);
    let e = diff.eigen();
    if e.min() < -1e-9 * inner.form().norm() {
        let k = e.values.iter().position(|&v| v == e.min()).unwrap_or(0);
        return Err(Error::Containment {
            direction: e.vectors.column(k).iter().cloned().collect(),
            detail: "inner ellipsoid is not contained in the outer one".into(),
        });
    }
    Ok(())
}

/// John ellipsoid J with the outer ellipsoid √n·J.
pub fn john_sandwich(k: &Body) -> Result<SandwichCertificate> {
    let n = k.dim();
    let inner = john(k)?;
    let outer = inner.scaled((n as f64).sqrt())?;
    let mut cert = SandwichCertificate {
        inner,
        outer,
        ratio_r: (n as f64).sqrt(),
        note: None,
    };
    cert.verify(k, 1000, DIRECTION_SEED, CONTAINMENT_TOL)?;
    if k.as_ellipsoid().is_some() {
        cert.note = Some("K is an ellipsoid: E1 = E2 = K gives the tighter ratio 1".into());
    }
    Ok(cert)
}

/// The ellipsoid F whose form Q satisfies Q M⁻¹ Q = N, where M and N are the
/// forms of E₂ and E₁. Identifying V with V* through Q maps E₂° onto E₁.
pub fn f_ellipsoid(e1: &Ellipsoid, e2: &Ellipsoid) -> Result<Ellipsoid> {
    Error::check_dim(e1.dim(), e2.dim())?;
    check_nested(e1, e2)?;
    let (n, m) = (e1.form(), e2.form());
    let q = matrix_geometric_mean(m, n)?;
    let residual = f_residual(&q, m, n);
    if residual > 1e-10 * n.norm() {
        return Err(Error::NoConvergence(format!(
            "geometric mean residual {residual:e}"
        )));
    }
    Ellipsoid::new(q)
}

/// ‖Q M⁻¹ Q − N‖ (Frobenius).
pub fn f_residual(q: &SymMatrix, m: &SymMatrix, n: &SymMatrix) -> f64 {
    match m.cholesky() {
        Ok(c) => (q.matrix() * c.inverse().matrix() * q.matrix() - n.matrix()).norm(),
        Err(_) => f64::INFINITY,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bodies::SymPolytope;
    use crate::ops::{cap_p, linear_image, PExponent};
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn max_dev(a: &SymMatrix, b: &SymMatrix) -> f64 {
        (a.matrix() - b.matrix()).amax()
    }

    #[test]
    fn mvee_examples() {
        let sq = vec![vec![1.0, 1.0], vec![1.0, -1.0]];
        let m = mvee_symmetric(&sq, MVEE_EPS).unwrap();
        assert!(m.converged);
        assert!(max_dev(m.ellipsoid.form(), &SymMatrix::identity(2).scaled(0.5)) < 1e-7);
        let pts = vec![vec![2.0, 0.0], vec![0.0, 1.0]];
        let m = mvee_symmetric(&pts, MVEE_EPS).unwrap();
        assert!(max_dev(m.ellipsoid.form(), &SymMatrix::diagonal(&[0.25, 1.0])) < 1e-7);
    }

    #[test]
    fn mvee_rejects_flat_point_sets() {
        let pts = vec![
            vec![1.0, 2.0, 0.0],
            vec![2.0, 1.0, 0.0],
            vec![1.0, 1.0, 0.0],
        ];
        assert!(matches!(
            mvee_symmetric(&pts, MVEE_EPS),
            Err(Error::Degenerate(_))
        ));
        assert!(mvee_symmetric(&[vec![1.0, 0.0], vec![1.0]], MVEE_EPS).is_err());
    }

    fn random_points(rng: &mut ChaCha8Rng, m: usize, n: usize) -> Vec<Vec<f64>> {
        (0..m)
            .map(|_| (0..n).map(|_| rng.random_range(-1.0..1.0)).collect())
            .collect()
    }

    #[test]
    fn mvee_optimality_conditions() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for trial in 0..10 {
            let pts = random_points(&mut rng, 20, 3);
            let m = mvee_symmetric(&pts, MVEE_EPS).unwrap();
            assert!(m.converged && m.iterations < MVEE_MAX_ITER, "trial {trial}");
            let vals: Vec<f64> = pts
                .iter()
                .map(|p| m.ellipsoid.form().quad_form(p))
                .collect();
            assert!(vals.iter().all(|&v| v <= 1.0 + MVEE_EPS));
            assert!(
                vals.iter().filter(|&&v| v >= 1.0 - MVEE_EPS).count() >= 3,
                "{vals:?}"
            );
        }
    }

    #[test]
    fn mvee_beats_grid_search_in_the_plane() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let pts = random_points(&mut rng, 7, 2);
        let area = mvee_symmetric(&pts, MVEE_EPS).unwrap().ellipsoid.volume();
        // ellipses with axes rotated by θ; the minimal scaling of each axis
        // pair that covers the points, minimized over θ and the axis ratio
        let mut best = f64::INFINITY;
        for i in 0..720 {
            let th = std::f64::consts::PI * i as f64 / 720.0;
            let (c, s) = (th.cos(), th.sin());
            for j in 0..800 {
                let ratio = (-3.0 + 6.0 * j as f64 / 800.0f64).exp();
                // semi-axes (t, t·ratio); smallest t covering every point
                let t2 = pts
                    .iter()
                    .map(|p| {
                        let (a, b) = (c * p[0] + s * p[1], -s * p[0] + c * p[1]);
                        a * a + b * b / (ratio * ratio)
                    })
                    .fold(0.0, f64::max);
                best = best.min(std::f64::consts::PI * t2 * ratio);
            }
        }
        assert!(area <= best * (1.0 + 1e-6), "{area} vs {best}");
        assert!(area >= best * (1.0 - 1e-2), "{area} vs {best}");
    }

    #[test]
    fn mvee_volume_is_monotone() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut pts = random_points(&mut rng, 6, 3);
        let mut prev = mvee_symmetric(&pts, MVEE_EPS)
            .unwrap()
            .ellipsoid
            .ln_volume();
        for _ in 0..10 {
            pts.extend(random_points(&mut rng, 1, 3));
            let v = mvee_symmetric(&pts, MVEE_EPS)
                .unwrap()
                .ellipsoid
                .ln_volume();
            assert!(v >= prev - 1e-6, "{v} < {prev}");
            prev = v;
        }
    }

    #[test]
    fn loewner_examples() {
        for n in 1..=4 {
            let l = loewner(&Body::cube(n).unwrap(), 512).unwrap();
            assert!(max_dev(l.form(), &SymMatrix::identity(n).scaled(1.0 / n as f64)) < 1e-5);
            let vs: Vec<Vec<f64>> = (0..1usize << (n - 1))
                .map(|mask| {
                    (0..n)
                        .map(|i| if mask >> i & 1 == 1 { -1.0 } else { 1.0 })
                        .collect()
                })
                .collect();
            let poly = Body::polytope(SymPolytope::from_vertices(vs).unwrap());
            let l = loewner(&poly, 512).unwrap();
            assert!(max_dev(l.form(), &SymMatrix::identity(n).scaled(1.0 / n as f64)) < 1e-5);
        }
        let e = Ellipsoid::new(SymMatrix::from_rows(&[vec![2.0, 0.3], vec![0.3, 0.5]]).unwrap())
            .unwrap();
        assert_eq!(loewner(&Body::ellipsoid(e.clone()), 512).unwrap(), e);
        let l = loewner(&Body::cross(3).unwrap(), 512).unwrap();
        assert!(max_dev(l.form(), &SymMatrix::identity(3)) < 1e-12);
    }

    #[test]
    fn loewner_of_facet_polytopes_matches_vertex_form() {
        let t = DMatrix::from_row_slice(3, 3, &[1.0, 0.2, -0.1, 0.1, 0.9, 0.3, -0.2, 0.3, 1.1]);
        let unit = |i: usize| {
            (0..3)
                .map(|j| if i == j { 1.0 } else { 0.0 })
                .collect::<Vec<f64>>()
        };
        let facets = Body::polytope(SymPolytope::from_facets((0..3).map(unit).collect()).unwrap());
        let vs: Vec<Vec<f64>> = (0..4usize)
            .map(|mask| {
                (0..3)
                    .map(|i| if mask >> i & 1 == 1 { -1.0 } else { 1.0 })
                    .collect()
            })
            .collect();
        let vertices = Body::polytope(SymPolytope::from_vertices(vs).unwrap());
        let a = loewner_report(
            &linear_image(&t, &facets).unwrap(),
            &LoewnerOptions::default(),
        )
        .unwrap();
        let b = loewner_report(
            &linear_image(&t, &vertices).unwrap(),
            &LoewnerOptions::default(),
        )
        .unwrap();
        assert_eq!(a.method, LoewnerMethod::VertexAscent);
        assert_eq!(b.method, LoewnerMethod::Vertices);
        assert!(max_dev(a.ellipsoid.form(), b.ellipsoid.form()) < 1e-6);
    }

    #[test]
    fn ascent_finds_every_vertex_of_a_facet_cube() {
        let facets = vec![
            vec![1.0, 0.0, 0.0],
            vec![0.0, 1.0, 0.0],
            vec![0.0, 0.0, 1.0],
        ];
        let cube = Body::polytope(SymPolytope::from_facets(facets).unwrap());
        let l = loewner_report(&cube, &LoewnerOptions::default()).unwrap();
        assert_eq!(l.inflation, 1.0);
        assert!(
            max_dev(
                l.ellipsoid.form(),
                &SymMatrix::identity(3).scaled(1.0 / 3.0)
            ) < 1e-6
        );
    }

    #[test]
    fn sampled_loewner_contains_the_body() {
        let c = cap_p(
            PExponent::INFINITY,
            &Body::cube(3).unwrap(),
            &Body::cube(3).unwrap(),
        )
        .unwrap();
        let l = loewner_report(&c, &LoewnerOptions::default()).unwrap();
        assert_eq!(l.method, LoewnerMethod::Sampled);
        check_outside(&l.ellipsoid, &c, 1000, 4, 1e-9).unwrap();
        let target = SymMatrix::identity(3).scaled(1.0 / 3.0);
        assert!(max_dev(l.ellipsoid.form(), &target) < 1e-2);
        assert!(l.inflation >= 1.0);
    }

    #[test]
    fn loewner_is_linearly_equivariant() {
        let t = DMatrix::from_row_slice(2, 2, &[1.0, 0.4, -0.3, 2.0]);
        let k = linear_image(&t, &Body::cube(2).unwrap()).unwrap();
        let l = loewner(&k, 512).unwrap();
        check_outside(&l, &k, 1000, 3, 1e-9).unwrap();
        let vol_ratio = l.volume() / crate::volume::volume_exact(&k).unwrap().value;
        assert_relative_eq!(vol_ratio, std::f64::consts::PI / 2.0, max_relative = 1e-6);
    }

    #[test]
    fn john_examples() {
        for n in 1..=4 {
            let j = john(&Body::cube(n).unwrap()).unwrap();
            assert!(max_dev(j.form(), &SymMatrix::identity(n)) < 1e-12);
        }
        let j = john(&Body::cross(2).unwrap()).unwrap();
        assert!(max_dev(j.form(), &SymMatrix::identity(2).scaled(2.0)) < 1e-12);
        let e = Ellipsoid::new(SymMatrix::from_rows(&[vec![2.0, 0.3], vec![0.3, 0.5]]).unwrap())
            .unwrap();
        let j = john(&Body::ellipsoid(e.clone())).unwrap();
        assert!(max_dev(j.form(), e.form()) < 1e-12);
    }

    #[test]
    fn john_sandwich_examples() {
        let c = john_sandwich(&Body::cube(4).unwrap()).unwrap();
        assert_eq!(c.ratio_r, 2.0);
        assert!(max_dev(c.outer.form(), &SymMatrix::identity(4).scaled(0.25)) < 1e-12);
        let b = john_sandwich(&Body::ball(3).unwrap()).unwrap();
        assert!(b.note.is_some());
        let x = john_sandwich(&Body::cross(2).unwrap()).unwrap();
        assert_relative_eq!(x.ratio_r, 2f64.sqrt(), max_relative = 1e-15);
        assert!(max_dev(x.outer.form(), &SymMatrix::identity(2)) < 1e-12);
    }

    #[test]
    fn sandwich_new_checks_nesting() {
        let small = Ellipsoid::ball(2, 0.1).unwrap();
        let big = Ellipsoid::ball(2, 2f64.sqrt()).unwrap();
        let c = SandwichCertificate::new(small.clone(), big.clone()).unwrap();
        assert_relative_eq!(c.ratio_r, 200f64.sqrt(), max_relative = 1e-14);
        assert!(matches!(
            SandwichCertificate::new(big, small),
            Err(Error::Containment { .. })
        ));
    }

    #[test]
    fn f_examples() {
        let b = Ellipsoid::ball(2, 1.0).unwrap();
        assert!(max_dev(f_ellipsoid(&b, &b).unwrap().form(), b.form()) < 1e-14);
        let e2 = Ellipsoid::ball(2, 2f64.sqrt()).unwrap();
        let e1 = Ellipsoid::ball(2, 0.1).unwrap();
        let f = f_ellipsoid(&e1, &e2).unwrap();
        assert!(max_dev(f.form(), &SymMatrix::identity(2).scaled(50f64.sqrt())) < 1e-12);
        // radius 50^{-1/4}
        assert_relative_eq!(
            f.support(&[1.0, 0.0]),
            0.376_060_309_308_639_36,
            max_relative = 1e-13
        );
        assert_relative_eq!(
            f.volume() / e1.volume(),
            200f64.sqrt(),
            max_relative = 1e-12
        );
        let e2 = Ellipsoid::new(SymMatrix::diagonal(&[0.25, 1.0])).unwrap();
        let e1 = Ellipsoid::new(SymMatrix::diagonal(&[1.0, 4.0])).unwrap();
        let f = f_ellipsoid(&e1, &e2).unwrap();
        assert!(max_dev(f.form(), &SymMatrix::diagonal(&[0.5, 2.0])) < 1e-14);
        assert!(f_ellipsoid(&e2, &e1).is_err());
    }

    #[test]
    fn f_is_congruence_equivariant() {
        let e2 = Ellipsoid::new(SymMatrix::diagonal(&[0.2, 0.7, 1.0])).unwrap();
        let e1 = Ellipsoid::new(SymMatrix::diagonal(&[3.0, 1.5, 8.0])).unwrap();
        let q = f_ellipsoid(&e1, &e2).unwrap();
        let t = DMatrix::from_row_slice(3, 3, &[1.0, 0.2, 0.0, -0.3, 2.0, 0.5, 0.1, 0.0, 0.7]);
        let cong = |m: &SymMatrix| SymMatrix::symmetrize(t.transpose() * m.matrix() * &t);
        let q2 = f_ellipsoid(
            &Ellipsoid::new(cong(e1.form())).unwrap(),
            &Ellipsoid::new(cong(e2.form())).unwrap(),
        )
        .unwrap();
        assert!(max_dev(q2.form(), &cong(q.form())) < 1e-12);
    }
}
