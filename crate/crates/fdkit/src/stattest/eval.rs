use crate::error::{FdError, Result};
use crate::residual::ResidualSeries;

/// Evaluation-function values aligned to residual samples: `values[i]`
/// belongs to sample index `start + i` of the underlying residual.
#[derive(Debug, Clone, PartialEq)]
pub struct EvalSeries {
    pub values: Vec<f64>,
    pub start: usize,
}

impl EvalSeries {
    /// Values from absolute sample index `from` on.
    pub fn from_index(&self, from: usize) -> &[f64] {
        let offset = from.saturating_sub(self.start);
        &self.values[offset.min(self.values.len())..]
    }
}

/// Sliding-window innovation statistic
/// J(t) = sum_{k=0..s} eps(t-k)^2 / lambda, defined for t >= s.
pub fn eval_jkf(eps: &ResidualSeries, lambda: f64, s: usize) -> Result<EvalSeries> {
    if !(lambda > 0.0) {
        return Err(FdError::validation(
            "innovation covariance must be positive definite",
        ));
    }
    if eps.len() <= s {
        return Err(FdError::validation(format!(
            "residual length {} must exceed the window length {s}",
            eps.len()
        )));
    }
    let inv = 1.0 / lambda;
    let sq: Vec<f64> = eps.values.iter().map(|e| e * e * inv).collect();
    let mut values = Vec::with_capacity(eps.len() - s);
    let mut acc: f64 = sq[..=s].iter().sum();
    values.push(acc);
    for t in (s + 1)..sq.len() {
        acc += sq[t] - sq[t - s - 1];
        values.push(acc);
    }
    Ok(EvalSeries { values, start: s })
}

/// Sample mean and unbiased variance of the settled fault-free residual.
pub fn estimate_moments(r: &ResidualSeries) -> Result<(f64, f64)> {
    let data = r.settled();
    if data.len() < 100 {
        return Err(FdError::validation(
            "at least 100 post-transient samples are required for moment estimation",
        ));
    }
    let n = data.len() as f64;
    let mean = data.iter().sum::<f64>() / n;
    let var = data.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0);
    if var <= 1e-20 * (1.0 + mean * mean) {
        return Err(FdError::validation(
            "residual variance is degenerate; cannot form a T^2 statistic",
        ));
    }
    Ok((mean, var))
}

/// Pointwise Hotelling statistic (r(t) - mu)^2 / s for a scalar residual.
pub fn eval_t2(r: &ResidualSeries, mu: f64, s: f64) -> Result<EvalSeries> {
    if !(s > 0.0) {
        return Err(FdError::validation("covariance must be positive definite"));
    }
    let inv = 1.0 / s;
    let values = r
        .values
        .iter()
        .map(|x| (x - mu) * (x - mu) * inv)
        .collect();
    Ok(EvalSeries { values, start: 0 })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::residual::ResidualKind;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, StandardNormal};

    fn series(values: Vec<f64>) -> ResidualSeries {
        let mut r = ResidualSeries::new(values, ResidualKind::Pe);
        r.transient = 0;
        r
    }

    fn white(n: usize, sigma: f64, seed: u64) -> ResidualSeries {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        series((0..n).map(|_| sigma * sample_std(&mut rng)).collect())
    }

    fn sample_std(rng: &mut ChaCha8Rng) -> f64 {
        StandardNormal.sample(rng)
    }

    #[test]
    fn zero_residual_gives_zero_statistic() {
        let out = eval_jkf(&series(vec![0.0; 50]), 2.0, 10).unwrap();
        assert_eq!(out.start, 10);
        assert_eq!(out.values.len(), 40);
        assert!(out.values.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn constant_one_sigma_residual_counts_window() {
        let lambda = 4.0;
        let out = eval_jkf(&series(vec![2.0; 30]), lambda, 7).unwrap();
        assert!(out.values.iter().all(|&v| (v - 8.0).abs() < 1e-12));
    }

    #[test]
    fn jkf_mean_matches_chi_squared_mean() {
        let eps = white(100_000, 1.0, 5);
        let out = eval_jkf(&eps, 1.0, 10).unwrap();
        let mean = out.values.iter().sum::<f64>() / out.values.len() as f64;
        assert!((mean - 11.0).abs() / 11.0 < 0.02, "mean {mean}");
    }

    #[test]
    fn sliding_update_matches_recomputation() {
        let eps = white(5000, 1.3, 9);
        let out = eval_jkf(&eps, 1.69, 100).unwrap();
        for (i, &v) in out.values.iter().enumerate().step_by(137) {
            let t = i + 100;
            let direct: f64 = eps.values[t - 100..=t].iter().map(|e| e * e / 1.69).sum();
            assert!((v - direct).abs() < 1e-9, "t={t}: {v} vs {direct}");
        }
    }

    #[test]
    fn moments_of_gaussian_sample() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let data: Vec<f64> = (0..100_000).map(|_| 3.0 + 2.0 * sample_std(&mut rng)).collect();
        let (mu, var) = estimate_moments(&series(data)).unwrap();
        assert!(mu > 2.97 && mu < 3.03, "mean {mu}");
        assert!(var > 3.9 && var < 4.1, "variance {var}");
    }

    #[test]
    fn constant_residual_is_degenerate() {
        assert!(estimate_moments(&series(vec![5.0; 1000])).is_err());
    }

    #[test]
    fn t2_at_the_mean_is_zero_and_one_sigma_is_one() {
        let r = series(vec![1.5, 1.5 + 2.0]);
        let out = eval_t2(&r, 1.5, 4.0).unwrap();
        assert_eq!(out.values[0], 0.0);
        assert!((out.values[1] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn t2_mean_near_one_for_white_residual() {
        let r = white(100_000, 1.0, 31);
        let (mu, var) = estimate_moments(&r).unwrap();
        let out = eval_t2(&r, mu, var).unwrap();
        let mean = out.values.iter().sum::<f64>() / out.values.len() as f64;
        assert!((mean - 1.0).abs() < 0.02, "mean {mean}");
    }

    #[test]
    fn t2_is_scale_invariant_with_reestimated_moments() {
        let r = white(10_000, 1.0, 8);
        let (mu, var) = estimate_moments(&r).unwrap();
        let base = eval_t2(&r, mu, var).unwrap();
        let scaled = series(r.values.iter().map(|v| v * -7.5).collect());
        let (mu2, var2) = estimate_moments(&scaled).unwrap();
        let out = eval_t2(&scaled, mu2, var2).unwrap();
        for (a, b) in base.values.iter().zip(&out.values) {
            assert!((a - b).abs() < 1e-9);
        }
    }

    #[test]
    fn jkf_with_zero_window_equals_t2_at_true_moments() {
        let r = white(1000, 1.4, 2);
        let lambda = 1.96;
        let jkf = eval_jkf(&r, lambda, 0).unwrap();
        let t2 = eval_t2(&r, 0.0, lambda).unwrap();
        assert_eq!(jkf.start, 0);
        for (a, b) in jkf.values.iter().zip(&t2.values) {
            assert!((a - b).abs() < 1e-12);
        }
    }
}
