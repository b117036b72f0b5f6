use serde::Serialize;
use statrs::distribution::{ChiSquared, ContinuousCDF, FisherSnedecor};

use crate::error::{FdError, Result};

/// Distribution family a threshold was derived from.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum ThresholdFamily {
    ChiSquared { dof: usize },
    FisherScaled { p: usize, n: usize },
}

/// An alarm threshold at a stated confidence level.
///
/// `alpha` is the confidence level: the threshold is the alpha-quantile, so a
/// calibrated statistic exceeds it with probability 1 - alpha.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Threshold {
    pub value: f64,
    pub alpha: f64,
    pub family: ThresholdFamily,
}

fn check_alpha(alpha: f64) -> Result<()> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(FdError::validation("alpha must lie in (0, 1)"));
    }
    Ok(())
}

/// Chi-squared quantile threshold for the windowed innovation statistic.
pub fn chi2_threshold(dof: usize, alpha: f64) -> Result<Threshold> {
    check_alpha(alpha)?;
    if dof == 0 {
        return Err(FdError::validation("degrees of freedom must be positive"));
    }
    let dist = ChiSquared::new(dof as f64)
        .map_err(|e| FdError::validation(format!("chi-squared setup: {e}")))?;
    Ok(Threshold {
        value: dist.inverse_cdf(alpha),
        alpha,
        family: ThresholdFamily::ChiSquared { dof },
    })
}

/// Scaled-F quantile threshold for the Hotelling statistic with moments
/// estimated from `n` fault-free samples of a p-dimensional residual.
pub fn t2_threshold(p: usize, n: usize, alpha: f64) -> Result<Threshold> {
    check_alpha(alpha)?;
    if p == 0 || n <= p {
        return Err(FdError::validation(
            "training length must exceed the residual dimension",
        ));
    }
    let (pf, nf) = (p as f64, n as f64);
    let scale = pf * (nf * nf - 1.0) / (nf * (nf - pf));
    let dist = FisherSnedecor::new(pf, nf - pf)
        .map_err(|e| FdError::validation(format!("F setup: {e}")))?;
    Ok(Threshold {
        value: scale * dist.inverse_cdf(alpha),
        alpha,
        family: ThresholdFamily::FisherScaled { p, n },
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn chi2_tabulated_values() {
        assert!((chi2_threshold(1, 0.99).unwrap().value - 6.6349).abs() < 1e-3);
        // closed form for two degrees of freedom: -2 ln(0.05)
        let th = chi2_threshold(2, 0.95).unwrap().value;
        assert!((th - 5.9915).abs() < 1e-3);
        // statrs inverts the CDF numerically, so allow a loose match here;
        // the acceptance suite pins quantiles against a quadrature oracle.
        assert!((th + 2.0 * 0.05f64.ln()).abs() < 1e-6);
    }

    #[test]
    fn chi2_threshold_vanishes_with_alpha() {
        let th = chi2_threshold(3, 1e-10).unwrap().value;
        assert!(th > 0.0 && th < 1e-2);
    }

    #[test]
    fn chi2_rejects_bad_alpha() {
        assert!(chi2_threshold(1, 0.0).is_err());
        assert!(chi2_threshold(1, 1.0).is_err());
    }

    #[test]
    fn t2_approaches_chi2_for_large_n() {
        let t2 = t2_threshold(1, 1_000_000, 0.99).unwrap().value;
        let chi = chi2_threshold(1, 0.99).unwrap().value;
        assert!((t2 - chi).abs() < 1e-3, "{t2} vs {chi}");
    }

    #[test]
    fn t2_near_asymptotic_at_n_10000() {
        let t2 = t2_threshold(1, 10_000, 0.99).unwrap().value;
        assert!((t2 - 6.6349).abs() / 6.6349 < 0.002);
    }

    #[test]
    fn t2_median_matches_chi2_median() {
        let t2 = t2_threshold(1, 1_000_000, 0.5).unwrap().value;
        assert!((t2 - 0.4549).abs() < 1e-3);
    }

    #[test]
    fn t2_rejects_short_training() {
        assert!(t2_threshold(2, 2, 0.99).is_err());
    }
}
