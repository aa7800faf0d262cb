//! Dense two-phase tableau simplex for small LPs:
//! maximize cᵀx subject to a_iᵀx ≤ b_i with x free.

use crate::error::{Error, Result};

pub const MAX_VARIABLES: usize = 64;
pub const MAX_CONSTRAINTS: usize = 256;
const TOL: f64 = 1e-9;
const MAX_PIVOTS: usize = 50_000;

#[derive(Debug, Clone, PartialEq)]
pub struct LpProblem {
    pub objective: Vec<f64>,
    pub constraints: Vec<(Vec<f64>, f64)>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum LpOutcome {
    Optimal { value: f64, x: Vec<f64> },
    Unbounded,
    Infeasible,
}

impl LpOutcome {
    pub fn value(&self) -> Option<f64> {
        match self {
            LpOutcome::Optimal { value, .. } => Some(*value),
            _ => None,
        }
    }
}

impl LpProblem {
    pub fn new(objective: Vec<f64>) -> Self {
        LpProblem {
            objective,
            constraints: Vec::new(),
        }
    }

    pub fn constrain(mut self, a: Vec<f64>, b: f64) -> Self {
        self.constraints.push((a, b));
        self
    }

    pub fn dim(&self) -> usize {
        self.objective.len()
    }

    fn validate(&self) -> Result<()> {
        let n = self.dim();
        if n == 0 || n > MAX_VARIABLES {
            return Err(Error::LpConfig(format!(
                "{n} variables (allowed 1..={MAX_VARIABLES})"
            )));
        }
        if self.constraints.len() > MAX_CONSTRAINTS {
            return Err(Error::LpConfig(format!(
                "{} constraints (allowed <= {MAX_CONSTRAINTS})",
                self.constraints.len()
            )));
        }
        for (a, b) in &self.constraints {
            Error::check_dim(n, a.len())?;
            if !b.is_finite() || a.iter().any(|v| !v.is_finite()) {
                return Err(Error::LpConfig("non-finite constraint data".into()));
            }
        }
        Ok(())
    }
}

pub fn lp_solve(p: &LpProblem) -> Result<LpOutcome> {
    p.validate()?;
    Ok(Tableau::build(p).solve(p))
}

struct Tableau {
    // m rows of length cols + 1 (last entry is the right-hand side)
    rows: Vec<Vec<f64>>,
    basis: Vec<usize>,
    cols: usize,
    n_split: usize,
    first_artificial: usize,
    degenerate_pivots: usize,
    bland: bool,
}

impl Tableau {
    fn build(p: &LpProblem) -> Self {
        let n = p.dim();
        let m = p.constraints.len();
        let n_split = 2 * n;
        let n_art = p.constraints.iter().filter(|(_, b)| *b < 0.0).count();
        let first_artificial = n_split + m;
        let cols = first_artificial + n_art;
        let mut rows = Vec::with_capacity(m);
        let mut basis = Vec::with_capacity(m);
        let mut art = first_artificial;
        for (i, (a, b)) in p.constraints.iter().enumerate() {
            let sign = if *b < 0.0 { -1.0 } else { 1.0 };
            let mut row = vec![0.0; cols + 1];
            for j in 0..n {
                row[j] = sign * a[j];
                row[n + j] = -sign * a[j];
            }
            row[n_split + i] = sign;
            row[cols] = sign * b;
            if *b < 0.0 {
                row[art] = 1.0;
                basis.push(art);
                art += 1;
            } else {
                basis.push(n_split + i);
            }
            rows.push(row);
        }
        Tableau {
            rows,
            basis,
            cols,
            n_split,
            first_artificial,
            degenerate_pivots: 0,
            bland: false,
        }
    }

    fn objective_row(&self, cost: &[f64]) -> Vec<f64> {
        // reduced costs z_j - c_j for maximization, last entry = objective value
        let mut obj = vec![0.0; self.cols + 1];
        for j in 0..self.cols {
            obj[j] = -cost[j];
        }
        for (r, &bv) in self.basis.iter().enumerate() {
            let cb = cost[bv];
            if cb != 0.0 {
                for j in 0..=self.cols {
                    obj[j] += cb * self.rows[r][j];
                }
            }
        }
        obj
    }

    fn pivot(&mut self, obj: &mut [f64], r: usize, c: usize) {
        let piv = self.rows[r][c];
        for v in self.rows[r].iter_mut() {
            *v /= piv;
        }
        let prow = self.rows[r].clone();
        for (i, row) in self.rows.iter_mut().enumerate() {
            if i != r {
                let f = row[c];
                if f != 0.0 {
                    for (v, p) in row.iter_mut().zip(&prow) {
                        *v -= f * p;
                    }
                }
            }
        }
        let f = obj[c];
        if f != 0.0 {
            for (v, p) in obj.iter_mut().zip(&prow) {
                *v -= f * p;
            }
        }
        self.basis[r] = c;
    }

    /// Runs simplex iterations on `obj`; returns false when unbounded.
    fn iterate(&mut self, obj: &mut [f64], allowed: usize, tol: f64) -> bool {
        let m = self.rows.len();
        for _ in 0..MAX_PIVOTS {
            if !self.bland && self.degenerate_pivots > 5 * m.max(1) {
                self.bland = true;
            }
            let entering = if self.bland {
                (0..allowed).find(|&j| obj[j] < -tol)
            } else {
                (0..allowed)
                    .filter(|&j| obj[j] < -tol)
                    .min_by(|&a, &b| obj[a].total_cmp(&obj[b]))
            };
            let Some(c) = entering else { return true };

            let mut leave: Option<(usize, f64)> = None;
            for (r, row) in self.rows.iter().enumerate() {
                let a = row[c];
                if a > TOL {
                    let ratio = row[self.cols] / a;
                    leave = match leave {
                        None => Some((r, ratio)),
                        Some((lr, lratio)) => {
                            if ratio < lratio - TOL
                                || (ratio <= lratio + TOL && self.basis[r] < self.basis[lr])
                            {
                                Some((r, ratio))
                            } else {
                                Some((lr, lratio))
                            }
                        }
                    };
                }
            }
            let Some((r, ratio)) = leave else {
                return false;
            };
            if ratio.abs() <= TOL {
                self.degenerate_pivots += 1;
            }
            self.pivot(obj, r, c);
        }
        true
    }

    fn solve(mut self, p: &LpProblem) -> LpOutcome {
        let n = p.dim();
        let scale = p.objective.iter().fold(1.0f64, |a, v| a.max(v.abs()));

        if self.first_artificial < self.cols {
            let mut cost = vec![0.0; self.cols];
            for c in cost.iter_mut().skip(self.first_artificial) {
                *c = -1.0;
            }
            let mut obj = self.objective_row(&cost);
            self.iterate(&mut obj, self.cols, TOL);
            if obj[self.cols] < -1e-7 {
                return LpOutcome::Infeasible;
            }
            // drive remaining zero-level artificials out of the basis
            for r in 0..self.rows.len() {
                if self.basis[r] >= self.first_artificial {
                    if let Some(c) =
                        (0..self.first_artificial).find(|&c| self.rows[r][c].abs() > TOL)
                    {
                        self.pivot(&mut obj, r, c);
                    }
                }
            }
        }

        let mut cost = vec![0.0; self.cols];
        for j in 0..n {
            cost[j] = p.objective[j];
            cost[n + j] = -p.objective[j];
        }
        let mut obj = self.objective_row(&cost);
        self.degenerate_pivots = 0;
        self.bland = false;
        if !self.iterate(&mut obj, self.first_artificial, TOL * scale) {
            return LpOutcome::Unbounded;
        }

        let mut split = vec![0.0; self.n_split];
        for (r, &bv) in self.basis.iter().enumerate() {
            if bv < self.n_split {
                split[bv] = self.rows[r][self.cols];
            }
        }
        let x: Vec<f64> = (0..n).map(|j| split[j] - split[n + j]).collect();
        let value = p.objective.iter().zip(&x).map(|(c, v)| c * v).sum();
        LpOutcome::Optimal { value, x }
    }
}
