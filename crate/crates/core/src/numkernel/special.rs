//! Log-gamma, fractional binomial coefficients and the unit-ball volume.

use std::f64::consts::{E, PI};

use crate::error::{Error, Result};

// Lanczos approximation (g = 10.900511, 11 terms), Pugh 2004, p. 116.
const LANCZOS_G: f64 = 10.900511;
const LANCZOS_D: [f64; 11] = [
    2.48574089138753565546e-5,
    1.05142378581721974210,
    -3.45687097222016235469,
    4.51227709466894823700,
    -2.98285225323576655721,
    1.05639711577126713077,
    -1.95428773191645869583e-1,
    1.70970543404441224307e-2,
    -5.71926117404305781283e-4,
    4.63399473359905636708e-6,
    -2.71994908488607703910e-9,
];
const LN_2_SQRT_E_OVER_PI: f64 = 0.620_782_237_635_245_2;

/// Natural log of Γ(x) for x > 0.
pub fn log_gamma(x: f64) -> Result<f64> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::domain(format!("log_gamma requires x > 0, got {x}")));
    }
    Ok(ln_gamma_unchecked(x))
}

pub(crate) fn ln_gamma_unchecked(x: f64) -> f64 {
    if x == 1.0 || x == 2.0 {
        return 0.0;
    }
    if x < 0.5 {
        // reflection: Γ(x)Γ(1-x) = π / sin(πx)
        let s = series(1.0 - x);
        let lg1 = s.ln() + LN_2_SQRT_E_OVER_PI + (0.5 - x) * ((0.5 - x + LANCZOS_G) / E).ln();
        return PI.ln() - (PI * x).sin().ln() - lg1;
    }
    let s = series(x);
    s.ln() + LN_2_SQRT_E_OVER_PI + (x - 0.5) * ((x - 0.5 + LANCZOS_G) / E).ln()
}

fn series(x: f64) -> f64 {
    LANCZOS_D
        .iter()
        .enumerate()
        .skip(1)
        .fold(LANCZOS_D[0], |s, (i, &d)| s + d / (x + i as f64 - 1.0))
}

/// ln of Γ(x+1) / (Γ(y+1) Γ(x-y+1)).
pub fn ln_frac_binom(x: f64, y: f64) -> Result<f64> {
    if !(x >= 0.0) || !(y >= 0.0) || y > x || !x.is_finite() {
        return Err(Error::domain(format!(
            "frac_binom requires 0 <= y <= x, got x = {x}, y = {y}"
        )));
    }
    Ok(ln_gamma_unchecked(x + 1.0) - ln_gamma_unchecked(y + 1.0) - ln_gamma_unchecked(x - y + 1.0))
}

/// Binomial coefficient with real arguments, interpreted through x! = Γ(x+1).
pub fn frac_binom(x: f64, y: f64) -> Result<f64> {
    ln_frac_binom(x, y).map(f64::exp)
}

/// ln of the volume of the Euclidean unit ball in R^n.
pub fn ln_ball_volume(n: usize) -> Result<f64> {
    if n == 0 {
        return Err(Error::domain("ball_volume requires n >= 1"));
    }
    let half = n as f64 / 2.0;
    Ok(half * PI.ln() - ln_gamma_unchecked(half + 1.0))
}

/// π^{n/2} / Γ(n/2 + 1).
pub fn ball_volume(n: usize) -> Result<f64> {
    ln_ball_volume(n).map(f64::exp)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs().max(1e-300)
    }

    // Reference values computed with mpmath at 40 digits.
    #[test]
    fn log_gamma_matches_high_precision_values() {
        let cases = [
            (0.5, 0.572_364_942_924_700_087_07),
            (5.0, 3.178_053_830_347_945_619_6),
            (2.5, 0.284_682_870_472_919_159_63),
            (10.3, 13.482_036_786_138_358_593),
            (50.0, 144.565_743_946_344_886_01),
            (199.5, 855.286_389_273_452_573_79),
            (0.75, 0.203_280_951_431_295_371_48),
        ];
        for (x, want) in cases {
            let got = log_gamma(x).unwrap();
            assert!(rel(got, want) <= 1e-12, "x={x}: {got} vs {want}");
        }
        assert_eq!(log_gamma(1.0).unwrap(), 0.0);
    }

    #[test]
    fn log_gamma_rejects_nonpositive() {
        assert!(matches!(log_gamma(0.0), Err(Error::Domain(_))));
        assert!(matches!(log_gamma(-2.5), Err(Error::Domain(_))));
        assert!(log_gamma(f64::NAN).is_err());
    }

    #[test]
    fn functional_equation_on_grid() {
        let mut x = 0.5;
        while x <= 50.0 {
            let lhs = log_gamma(x + 1.0).unwrap().exp();
            let rhs = x * log_gamma(x).unwrap().exp();
            assert!(rel(lhs, rhs) <= 1e-10, "x={x}");
            x += 0.25;
        }
    }

    #[test]
    fn frac_binom_examples() {
        assert!(rel(frac_binom(4.0, 2.0).unwrap(), 6.0) <= 1e-10);
        assert!(rel(frac_binom(2.0, 1.0).unwrap(), 2.0) <= 1e-10);
        // Γ(2)/Γ(1.5)^2 = 4/π, mpmath.
        assert!(rel(frac_binom(1.0, 0.5).unwrap(), 1.273_239_544_735_162_686_2) <= 1e-10);
        assert!(rel(frac_binom(2.5, 1.25).unwrap(), 2.588_892_485_704_220_912) <= 1e-10);
        assert!(
            rel(
                frac_binom(4.0 / 3.0, 2.0 / 3.0).unwrap(),
                1.460_998_486_206_318_358_2
            ) <= 1e-10
        );
    }

    #[test]
    fn frac_binom_domain() {
        assert!(frac_binom(2.0, 2.5).is_err());
        assert!(frac_binom(2.0, -0.1).is_err());
        assert_eq!(
            frac_binom(3.0, 0.0).map(|v| (v - 1.0).abs() < 1e-12),
            Ok(true)
        );
    }

    #[test]
    fn ball_volume_examples_and_recurrence() {
        assert!(rel(ball_volume(1).unwrap(), 2.0) <= 1e-12);
        assert!(rel(ball_volume(2).unwrap(), PI) <= 1e-12);
        assert!(rel(ball_volume(3).unwrap(), 4.0 * PI / 3.0) <= 1e-12);
        for n in 3..60 {
            let lhs = ball_volume(n).unwrap();
            let rhs = ball_volume(n - 2).unwrap() * 2.0 * PI / n as f64;
            assert!(rel(lhs, rhs) <= 1e-12, "n={n}");
        }
        assert!(ball_volume(0).is_err());
    }

    #[test]
    fn large_dimension_stays_finite_in_log_space() {
        let l = ln_ball_volume(200).unwrap();
        assert!(l.is_finite() && l < 0.0);
        assert!(ln_frac_binom(400.0, 200.0).unwrap().is_finite());
    }

    mod props {
        use super::super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn frac_binom_symmetry(x in 0.0f64..60.0, t in 0.0f64..1.0) {
                let y = x * t;
                let a = frac_binom(x, y).unwrap();
                let b = frac_binom(x, x - y).unwrap();
                prop_assert!((a - b).abs() <= 1e-12 * a.abs());
            }
        }
    }
}
