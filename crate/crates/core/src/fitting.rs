//! Estimators for the degree-tail exponent and the recency decay scale.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::stats::{DegreeHistogram, RecencyCurve};

/// Smallest tail the power-law fit will report on.
pub const MIN_TAIL_COUNT: u64 = 10;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PowerLawFit {
    pub exponent_mle: f64,
    pub exponent_ols: f64,
    pub d_min: u64,
    pub tail_count: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecayFit {
    pub scale_estimate: f64,
    pub intercept: f64,
    pub residual_rms: f64,
}

/// Default lower cutoff for the tail fit: twice the out-degree.
pub fn default_d_min(m: usize) -> u64 {
    2 * m as u64
}

/// Ordinary least squares `y = intercept + slope·x`. Returns
/// `(slope, intercept, residual_rms)`.
fn least_squares(points: &[(f64, f64)]) -> (f64, f64, f64) {
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let (mut sxy, mut sxx) = (0.0, 0.0);
    for &(x, y) in points {
        sxy += (x - mx) * (y - my);
        sxx += (x - mx) * (x - mx);
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss: f64 = points
        .iter()
        .map(|&(x, y)| {
            let r = y - (intercept + slope * x);
            r * r
        })
        .sum();
    (slope, intercept, (ss / n).sqrt())
}

/// Tail exponent of a degree histogram over `d ≥ d_min`.
///
/// The MLE is the continuous estimator with the half-integer discreteness
/// correction, `1 + k / Σ ln(dᵢ / (d_min − ½))`. The OLS exponent is the
/// negated slope of `ln count` against `ln d` over nonzero counts.
pub fn fit_power_law(hist: &DegreeHistogram, d_min: u64) -> Result<PowerLawFit> {
    if d_min < 2 {
        return Err(Error::invalid("d_min", format!("must be >= 2, got {d_min}")));
    }
    let tail: Vec<(u64, u64)> = hist
        .counts
        .range(d_min..)
        .filter(|(_, &c)| c > 0)
        .map(|(&d, &c)| (d, c))
        .collect();
    let tail_count: u64 = tail.iter().map(|&(_, c)| c).sum();
    if tail_count < MIN_TAIL_COUNT {
        return Err(Error::Fit(format!(
            "only {tail_count} vertices with degree >= {d_min}, need {MIN_TAIL_COUNT}"
        )));
    }
    if tail.len() < 2 {
        return Err(Error::Fit(format!(
            "degenerate tail: all mass at degree {}",
            tail[0].0
        )));
    }
    let x_min = d_min as f64 - 0.5;
    let log_sum: f64 = tail
        .iter()
        .map(|&(d, c)| c as f64 * (d as f64 / x_min).ln())
        .sum();
    let exponent_mle = 1.0 + tail_count as f64 / log_sum;

    let points: Vec<(f64, f64)> = tail
        .iter()
        .map(|&(d, c)| ((d as f64).ln(), (c as f64).ln()))
        .collect();
    let (slope, _, _) = least_squares(&points);

    Ok(PowerLawFit {
        exponent_mle,
        exponent_ols: -slope,
        d_min,
        tail_count,
    })
}

/// Fits `e(T) ≈ exp(intercept − T/scale)` by least squares on `ln e(T)`
/// over grid points `T ≤ t_max` with positive values.
pub fn fit_exponential_decay(curve: &RecencyCurve, t_max: u64) -> Result<DecayFit> {
    let points: Vec<(f64, f64)> = curve
        .points
        .iter()
        .filter(|&&(t, v)| t <= t_max && v > 0.0)
        .map(|&(t, v)| (t as f64, v.ln()))
        .collect();
    if points.len() < 4 {
        return Err(Error::Fit(format!(
            "need at least 4 positive points with T <= {t_max}, got {}",
            points.len()
        )));
    }
    let (slope, intercept, residual_rms) = least_squares(&points);
    if !(slope < 0.0) {
        return Err(Error::Fit(format!("curve does not decay (slope {slope})")));
    }
    Ok(DecayFit {
        scale_estimate: -1.0 / slope,
        intercept,
        residual_rms,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stats::DegreeMode;
    use approx::assert_relative_eq;
    use proptest::prelude::*;
    use std::collections::BTreeMap;

    fn hist(counts: &[(u64, u64)]) -> DegreeHistogram {
        let counts: BTreeMap<u64, u64> = counts.iter().copied().collect();
        let n = counts.values().sum::<u64>() as usize;
        DegreeHistogram {
            counts,
            n,
            mode: DegreeMode::In,
        }
    }

    #[test]
    fn mle_matches_hand_computation() {
        let h = hist(&[(1, 100), (2, 20), (3, 10), (6, 5)]);
        let fit = fit_power_law(&h, 2).unwrap();
        let s = 20.0 * (2.0f64 / 1.5).ln() + 10.0 * (3.0f64 / 1.5).ln() + 5.0 * (6.0f64 / 1.5).ln();
        assert_relative_eq!(fit.exponent_mle, 1.0 + 35.0 / s, max_relative = 1e-14);
        assert_eq!(fit.tail_count, 35);
        assert_eq!(fit.d_min, 2);
    }

    #[test]
    fn ols_is_exact_on_pure_power_law() {
        let counts: Vec<(u64, u64)> = (2..=5).map(|d| (d, 3600u64 / (d * d))).collect();
        // 900, 400, 225, 144 are exact for d^-2
        let fit = fit_power_law(&hist(&counts), 2).unwrap();
        assert_relative_eq!(fit.exponent_ols, 2.0, max_relative = 1e-12);
    }

    #[test]
    fn power_law_rejections() {
        assert!(matches!(fit_power_law(&hist(&[(5, 1000)]), 2), Err(Error::Fit(_))));
        assert!(matches!(fit_power_law(&hist(&[(3, 5), (4, 4)]), 2), Err(Error::Fit(_))));
        assert!(matches!(
            fit_power_law(&hist(&[(3, 50), (4, 40)]), 1),
            Err(Error::InvalidParameter { .. })
        ));
    }

    #[test]
    fn decay_is_exact_on_noiseless_curve() {
        let curve = RecencyCurve {
            points: (0..=10).map(|k| (k * 100, (-(k as f64) * 100.0 / 500.0).exp())).collect(),
        };
        let fit = fit_exponential_decay(&curve, 1000).unwrap();
        assert_relative_eq!(fit.scale_estimate, 500.0, max_relative = 1e-10);
        assert!(fit.residual_rms < 1e-12);
        assert!(fit.intercept.abs() < 1e-12);
    }

    #[test]
    fn decay_rejections() {
        let flat = RecencyCurve {
            points: (0..6).map(|t| (t, 1.0)).collect(),
        };
        assert!(fit_exponential_decay(&flat, 10).is_err());
        let short = RecencyCurve {
            points: vec![(0, 1.0), (1, 0.5), (2, 0.25), (3, 0.0), (4, 0.0)],
        };
        assert!(fit_exponential_decay(&short, 10).is_err());
        let clipped = RecencyCurve {
            points: (0..10).map(|t| (t, (-(t as f64)).exp())).collect(),
        };
        assert!(fit_exponential_decay(&clipped, 2).is_err());
    }

    proptest! {
        #[test]
        fn power_law_fit_is_scale_free(
            counts in proptest::collection::btree_map(2u64..200, 1u64..10_000, 3..40),
            k in 2u64..1000,
        ) {
            let h = hist(&counts.iter().map(|(&d, &c)| (d, c)).collect::<Vec<_>>());
            let scaled = hist(&counts.iter().map(|(&d, &c)| (d, c * k)).collect::<Vec<_>>());
            if let Ok(a) = fit_power_law(&h, 2) {
                let b = fit_power_law(&scaled, 2).unwrap();
                prop_assert!((a.exponent_mle - b.exponent_mle).abs() <= 1e-12 * a.exponent_mle.abs());
                prop_assert!((a.exponent_ols - b.exponent_ols).abs() <= 1e-9 * a.exponent_ols.abs().max(1.0));
            }
        }

        #[test]
        fn decay_fit_exact_on_any_log_linear_curve(
            scale in 1.0f64..5000.0,
            c in -3.0f64..3.0,
            step in 1u64..200,
        ) {
            let curve = RecencyCurve {
                points: (0..8).map(|k| (k * step, (c - (k * step) as f64 / scale).exp())).collect(),
            };
            let fit = fit_exponential_decay(&curve, u64::MAX).unwrap();
            prop_assert!((fit.scale_estimate - scale).abs() <= 1e-8 * scale);
            prop_assert!(fit.residual_rms < 1e-9);
            let again = fit_exponential_decay(&curve, u64::MAX).unwrap();
            prop_assert_eq!(fit, again);
        }
    }
}
