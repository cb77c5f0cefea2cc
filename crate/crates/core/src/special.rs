//! Special functions.

use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Largest |x| accepted by [`bessel_j0`].
pub const J0_MAX_ARG: f64 = 50.0;

// cos(x sin t) is π-periodic and analytic, so the trapezoidal rule on
// [0, π) converges geometrically: the error is 2·Σ J_{2kN}(x), k ≥ 1.
// With N = 64 and |x| ≤ 50 that tail is far below f64 resolution.
const J0_NODES: usize = 64;

/// Bessel function of the first kind, order zero, for |x| ≤ 50.
///
/// Evaluates `J0(x) = (1/π) ∫₀^π cos(x sin t) dt` by trapezoidal
/// quadrature.
pub fn bessel_j0(x: f64) -> Result<f64> {
    if !x.is_finite() || x.abs() > J0_MAX_ARG {
        return Err(Error::Domain(format!("bessel_j0 needs |x| <= {J0_MAX_ARG}, got {x}")));
    }
    let h = PI / J0_NODES as f64;
    let sum: f64 = (0..J0_NODES).map(|k| (x * (k as f64 * h).sin()).cos()).sum();
    Ok(sum / J0_NODES as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Maclaurin series, accurate to ~1e-13 for |x| ≤ 10.
    fn j0_series(x: f64) -> f64 {
        let q = x * x / 4.0;
        let mut term = 1.0;
        let mut sum = 1.0;
        for k in 1..80 {
            term *= -q / (k as f64 * k as f64);
            sum += term;
            if term.abs() < 1e-18 {
                break;
            }
        }
        sum
    }

    /// Hankel asymptotic expansion, accurate to ~1e-12 for x ≥ 15.
    fn j0_asymptotic(x: f64) -> f64 {
        let mu = 0.0;
        let mut p = 0.0;
        let mut q = 0.0;
        let mut term = 1.0;
        for k in 0..20 {
            let kf = k as f64;
            if k > 0 {
                term *= (mu - (2.0 * kf - 1.0).powi(2)) / (kf * 8.0 * x);
            }
            if k % 2 == 0 {
                p += if k % 4 == 0 { term } else { -term };
            } else {
                q += if k % 4 == 1 { term } else { -term };
            }
        }
        let chi = x - PI / 4.0;
        (2.0 / (PI * x)).sqrt() * (p * chi.cos() - q * chi.sin())
    }

    #[test]
    fn at_zero() {
        assert_eq!(bessel_j0(0.0).unwrap(), 1.0);
    }

    #[test]
    fn matches_series_oracle() {
        for i in 0..=200 {
            let x = -10.0 + i as f64 * 0.1;
            let err = (bessel_j0(x).unwrap() - j0_series(x)).abs();
            assert!(err <= 1e-8, "x={x} err={err}");
        }
    }

    #[test]
    fn matches_asymptotic_oracle() {
        for i in 0..=70 {
            let x = 15.0 + i as f64 * 0.5;
            let err = (bessel_j0(x).unwrap() - j0_asymptotic(x)).abs();
            assert!(err <= 1e-8, "x={x} err={err}");
        }
    }

    #[test]
    fn first_zero() {
        // Bisection on the series oracle.
        let (mut lo, mut hi) = (2.0, 3.0);
        for _ in 0..100 {
            let mid = 0.5 * (lo + hi);
            if j0_series(mid) > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        assert!((lo - 2.404826).abs() < 1e-6);
        assert!(bessel_j0(lo).unwrap().abs() < 1e-10);
        assert!(bessel_j0(2.404826).unwrap().abs() < 1e-6);
    }

    #[test]
    fn doppler_correlation() {
        let alpha = bessel_j0(2.0 * PI * 0.01 * 12.0).unwrap();
        assert!((alpha - 0.86).abs() <= 0.005, "{alpha}");
    }

    #[test]
    fn rejects_out_of_domain() {
        assert!(matches!(bessel_j0(50.5), Err(Error::Domain(_))));
        assert!(bessel_j0(f64::NAN).is_err());
        assert!(bessel_j0(-50.0).is_ok());
    }
}
