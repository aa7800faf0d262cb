//! Lower bounds on the volume product ratio s(K) = Vol K · Vol K° / b_n².

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Sandwich ratio r, dimension n and an optional comparison constant C for
/// the C^{-n} line.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundQuery {
    pub r: f64,
    pub n: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c_bm: Option<f64>,
}

impl BoundQuery {
    pub fn new(r: f64, n: usize) -> Self {
        BoundQuery { r, n, c_bm: None }
    }

    pub fn kuperberg(&self) -> Result<f64> {
        kuperberg_bound(self.r, self.n)
    }

    pub fn direct(&self) -> Result<f64> {
        direct_bound(self.r, self.n)
    }

    /// The Theorem bound when r ≥ 2, otherwise r^{-n}.
    pub fn best_available(&self) -> Result<f64> {
        if self.r >= 2.0 {
            self.kuperberg()
        } else {
            self.direct()
        }
    }

    pub fn comparison(&self) -> Option<Result<f64>> {
        self.c_bm.map(|c| comparison_bound(c, self.n))
    }
}

fn check_n(n: usize) -> Result<()> {
    if n == 0 {
        return Err(Error::domain("dimension must be positive"));
    }
    Ok(())
}

/// ln (2 log₂ r)^{-n}.
pub fn ln_kuperberg_bound(r: f64, n: usize) -> Result<f64> {
    check_n(n)?;
    if !(r >= 2.0) {
        return Err(Error::domain(format!(
            "the (2 log2 r)^-n bound needs r >= 2, got r = {r}; use direct_bound instead"
        )));
    }
    Ok(-(n as f64) * (2.0 * r.log2()).ln())
}

/// (2 log₂ r)^{-n} for r ≥ 2.
pub fn kuperberg_bound(r: f64, n: usize) -> Result<f64> {
    Ok(ln_kuperberg_bound(r, n)?.exp())
}

/// ln (log₂ n)^{-n}.
pub fn ln_corollary_bound(n: usize) -> Result<f64> {
    if n < 4 {
        return Err(Error::domain(format!(
            "the (log2 n)^-n bound needs dimension n >= 4, got {n}"
        )));
    }
    Ok(-(n as f64) * (n as f64).log2().ln())
}

/// (log₂ n)^{-n} for n ≥ 4.
pub fn corollary_bound(n: usize) -> Result<f64> {
    Ok(ln_corollary_bound(n)?.exp())
}

/// r^{-n}, valid for every r ≥ 1 because E₂° ⊆ K°.
pub fn direct_bound(r: f64, n: usize) -> Result<f64> {
    check_n(n)?;
    if !(r >= 1.0) {
        return Err(Error::domain(format!(
            "sandwich ratio must be at least 1, got {r}"
        )));
    }
    Ok((-(n as f64) * r.ln()).exp())
}

/// C^{-n}.
pub fn comparison_bound(c: f64, n: usize) -> Result<f64> {
    check_n(n)?;
    if !(c > 0.0) {
        return Err(Error::domain(format!(
            "comparison constant must be positive, got {c}"
        )));
    }
    Ok((-(n as f64) * c.ln()).exp())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundRow {
    pub n: usize,
    pub corollary: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub comparison: Option<f64>,
}

/// Rows n_min..=n_max of (n, (log₂ n)^{-n}, C^{-n}).
pub fn bound_table(n_min: usize, n_max: usize, c_bm: Option<f64>) -> Result<Vec<BoundRow>> {
    if n_min > n_max {
        return Err(Error::domain(format!("empty range {n_min}..={n_max}")));
    }
    (n_min..=n_max)
        .map(|n| {
            Ok(BoundRow {
                n,
                corollary: corollary_bound(n)?,
                comparison: c_bm.map(|c| comparison_bound(c, n)).transpose()?,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn log_bound_examples() {
        assert_relative_eq!(
            kuperberg_bound(2.0, 5).unwrap(),
            0.03125,
            max_relative = 1e-15
        );
        assert_relative_eq!(
            kuperberg_bound(4.0, 3).unwrap(),
            1.0 / 64.0,
            max_relative = 1e-15
        );
        assert_relative_eq!(
            kuperberg_bound(16.0, 2).unwrap(),
            1.0 / 64.0,
            max_relative = 1e-15
        );
        assert!(kuperberg_bound(1.9, 2).is_err());
    }

    #[test]
    fn corollary_examples() {
        assert_relative_eq!(corollary_bound(4).unwrap(), 0.0625, max_relative = 1e-15);
        assert_relative_eq!(
            corollary_bound(16).unwrap(),
            4f64.powi(-16),
            max_relative = 1e-14
        );
        assert_relative_eq!(
            corollary_bound(8).unwrap(),
            3f64.powi(-8),
            max_relative = 1e-14
        );
        assert!(corollary_bound(3).is_err());
    }

    #[test]
    fn direct_examples() {
        assert_eq!(direct_bound(1.0, 7).unwrap(), 1.0);
        assert_relative_eq!(
            direct_bound(2.0, 4).unwrap(),
            1.0 / 16.0,
            max_relative = 1e-15
        );
        let d = direct_bound(3.0, 2).unwrap();
        assert_relative_eq!(d, 1.0 / 9.0, max_relative = 1e-15);
        // (2 log2 3)^{-2}
        let k = kuperberg_bound(3.0, 2).unwrap();
        assert_relative_eq!(k, 0.099_518_088_485_435_002, max_relative = 1e-14);
        assert!(d >= k);
        assert!(direct_bound(0.5, 2).is_err());
    }

    #[test]
    fn direct_dominates_on_two_to_four() {
        for i in 0..=2000 {
            let r = 2.0 + i as f64 * 1e-3;
            for n in 1..=10 {
                assert!(
                    direct_bound(r, n).unwrap() >= kuperberg_bound(r, n).unwrap() * (1.0 - 1e-15),
                    "r={r}"
                );
            }
        }
    }

    #[test]
    fn corollary_is_log_bound_at_root_n() {
        for n in 4..=200 {
            let a = ln_corollary_bound(n).unwrap();
            let b = ln_kuperberg_bound((n as f64).sqrt(), n).unwrap();
            assert!((a - b).abs() <= 1e-12 * a.abs().max(1.0), "n={n}");
        }
    }

    #[test]
    fn table_rows() {
        let rows = bound_table(4, 8, Some(2.0)).unwrap();
        assert_eq!(rows.len(), 5);
        assert_relative_eq!(rows[0].corollary, 0.0625, max_relative = 1e-15);
        assert!(rows.windows(2).all(|w| w[1].corollary < w[0].corollary));
        assert_relative_eq!(
            rows[0].comparison.unwrap(),
            1.0 / 16.0,
            max_relative = 1e-15
        );
        assert!(bound_table(3, 5, None).is_err());
    }
}
