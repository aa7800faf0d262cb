//! Derivative-free minimization (adaptive Nelder–Mead with restarts) for the
//! small convex, possibly non-smooth problems behind numeric gauges and
//! supports.

#[derive(Debug, Clone, Copy)]
pub struct MinimizeOptions {
    /// Relative tolerance on function values.
    pub ftol: f64,
    pub max_evals: usize,
    /// Stop as soon as a value at or below this level is found.
    pub target: f64,
    /// Restarts from the incumbent with a fresh simplex.
    pub restarts: usize,
}

impl Default for MinimizeOptions {
    fn default() -> Self {
        MinimizeOptions {
            ftol: 1e-12,
            max_evals: 20_000,
            target: f64::NEG_INFINITY,
            restarts: 6,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Minimum {
    pub x: Vec<f64>,
    pub value: f64,
    pub evals: usize,
}

/// Minimizes `f` starting at `x0` with an initial simplex of edge `step`.
pub fn minimize<F>(mut f: F, x0: &[f64], step: f64, opts: MinimizeOptions) -> Minimum
where
    F: FnMut(&[f64]) -> f64,
{
    let mut best = Minimum {
        x: x0.to_vec(),
        value: f(x0),
        evals: 1,
    };
    if x0.is_empty() || best.value <= opts.target {
        return best;
    }
    let mut edge = step;
    for round in 0..=opts.restarts {
        let before = best.value;
        let remaining = opts.max_evals.saturating_sub(best.evals);
        if remaining == 0 {
            break;
        }
        let run = nelder_mead(&mut f, &best.x, edge, opts.ftol, remaining, opts.target);
        best.evals += run.evals;
        if run.value < best.value {
            best.x = run.x;
            best.value = run.value;
        }
        if best.value <= opts.target {
            break;
        }
        let gain = before - best.value;
        if round > 0 && gain <= opts.ftol * best.value.abs().max(1e-300) {
            break;
        }
        // next simplex: a modest fraction of the original scale around the incumbent
        edge = (edge * 0.25).max(step * 1e-4);
    }
    best
}

fn nelder_mead<F>(
    f: &mut F,
    x0: &[f64],
    step: f64,
    ftol: f64,
    max_evals: usize,
    target: f64,
) -> Minimum
where
    F: FnMut(&[f64]) -> f64,
{
    let n = x0.len();
    let nf = n as f64;
    let (alpha, beta, gamma, delta) = if n > 2 {
        (1.0, 1.0 + 2.0 / nf, 0.75 - 1.0 / (2.0 * nf), 1.0 - 1.0 / nf)
    } else {
        (1.0, 2.0, 0.5, 0.5)
    };

    let mut evals = 0usize;
    let mut eval = |x: &[f64], evals: &mut usize| {
        *evals += 1;
        f(x)
    };

    let mut simplex: Vec<Vec<f64>> = Vec::with_capacity(n + 1);
    simplex.push(x0.to_vec());
    for i in 0..n {
        let mut v = x0.to_vec();
        v[i] += step;
        simplex.push(v);
    }
    let mut values: Vec<f64> = simplex.iter().map(|v| eval(v, &mut evals)).collect();
    let mut order: Vec<usize> = (0..=n).collect();
    let mut centroid = vec![0.0; n];
    let mut trial = vec![0.0; n];
    let mut trial2 = vec![0.0; n];

    while evals < max_evals {
        order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
        let (ib, iw, isw) = (order[0], order[n], order[n - 1]);
        let (fb, fw, fsw) = (values[ib], values[iw], values[isw]);
        if fb <= target {
            break;
        }
        let spread = fw - fb;
        let size = simplex
            .iter()
            .map(|v| {
                v.iter()
                    .zip(&simplex[ib])
                    .map(|(a, b)| (a - b).abs())
                    .fold(0.0, f64::max)
            })
            .fold(0.0, f64::max);
        let xscale = simplex[ib]
            .iter()
            .fold(0.0f64, |a, v| a.max(v.abs()))
            .max(step);
        if spread <= ftol * fb.abs().max(1e-300) && size <= 1e-9 * xscale {
            break;
        }
        if size <= 1e-15 * xscale {
            break;
        }

        centroid.iter_mut().for_each(|c| *c = 0.0);
        for &k in &order[..n] {
            for (c, v) in centroid.iter_mut().zip(&simplex[k]) {
                *c += v / nf;
            }
        }
        for j in 0..n {
            trial[j] = centroid[j] + alpha * (centroid[j] - simplex[iw][j]);
        }
        let fr = eval(&trial, &mut evals);
        if fr < fb {
            for j in 0..n {
                trial2[j] = centroid[j] + beta * (trial[j] - centroid[j]);
            }
            let fe = eval(&trial2, &mut evals);
            if fe < fr {
                simplex[iw].copy_from_slice(&trial2);
                values[iw] = fe;
            } else {
                simplex[iw].copy_from_slice(&trial);
                values[iw] = fr;
            }
            continue;
        }
        if fr < fsw {
            simplex[iw].copy_from_slice(&trial);
            values[iw] = fr;
            continue;
        }
        let (contracted, fc) = if fr < fw {
            for j in 0..n {
                trial2[j] = centroid[j] + gamma * (trial[j] - centroid[j]);
            }
            let fc = eval(&trial2, &mut evals);
            (fc <= fr, fc)
        } else {
            for j in 0..n {
                trial2[j] = centroid[j] - gamma * (centroid[j] - simplex[iw][j]);
            }
            let fc = eval(&trial2, &mut evals);
            (fc < fw, fc)
        };
        if contracted {
            simplex[iw].copy_from_slice(&trial2);
            values[iw] = fc;
            continue;
        }
        // shrink toward the best vertex
        let best = simplex[ib].clone();
        for k in 0..=n {
            if k != ib {
                for j in 0..n {
                    simplex[k][j] = best[j] + delta * (simplex[k][j] - best[j]);
                }
                values[k] = eval(&simplex[k], &mut evals);
            }
        }
    }

    let ib = (0..=n)
        .min_by(|&a, &b| values[a].total_cmp(&values[b]))
        .unwrap();
    Minimum {
        x: simplex[ib].clone(),
        value: values[ib],
        evals,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn smooth_quadratic() {
        let m = minimize(
            |x| (x[0] - 1.0).powi(2) + 10.0 * (x[1] + 2.0).powi(2) + 1.0,
            &[0.0, 0.0],
            1.0,
            MinimizeOptions::default(),
        );
        assert!((m.value - 1.0).abs() < 1e-10);
        assert!((m.x[0] - 1.0).abs() < 1e-5 && (m.x[1] + 2.0).abs() < 1e-5);
    }

    #[test]
    fn polyhedral_max_norm_on_hyperplane() {
        // min ||x||_inf on {x1 + 2 x2 + 3 x3 = 1} = 1/6, parametrized by x2, x3
        let m = minimize(
            |t| {
                let x1 = 1.0 - 2.0 * t[0] - 3.0 * t[1];
                x1.abs().max(t[0].abs()).max(t[1].abs())
            },
            &[0.3, -0.2],
            0.5,
            MinimizeOptions::default(),
        );
        assert!((m.value - 1.0 / 6.0).abs() < 1e-9, "{}", m.value);
    }

    #[test]
    fn target_stops_early() {
        let opts = MinimizeOptions {
            target: 5.0,
            ..Default::default()
        };
        let m = minimize(|x| x[0] * x[0], &[10.0], 1.0, opts);
        assert!(m.value <= 5.0 && m.evals < 30, "{m:?}");
    }

    #[test]
    fn empty_problem() {
        let m = minimize(|_| 3.0, &[], 1.0, MinimizeOptions::default());
        assert_eq!(m.value, 3.0);
    }
}
