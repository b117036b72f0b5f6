use nalgebra::DMatrix;

use super::model::{spectral_radius, StateSpaceModel};
use crate::error::{FdError, Result};

/// Successive-iterate convergence tolerance of the fixed-point DARE solver.
pub const DARE_TOL: f64 = 1e-12;
/// Iteration budget of the fixed-point DARE solver.
pub const DARE_BUDGET: usize = 100_000;

/// Steady-state Kalman filtering solution.
#[derive(Debug, Clone)]
pub struct KalmanSolution {
    /// Kalman gain, n x p.
    pub k: DMatrix<f64>,
    /// Innovation covariance C P C' + sigma_v, p x p.
    pub lambda: DMatrix<f64>,
    /// Steady-state prediction-error covariance, n x n.
    pub p: DMatrix<f64>,
    /// Iterations taken by the fixed-point recursion.
    pub iterations: usize,
}

impl KalmanSolution {
    /// Frobenius norm of the Riccati fixed-point residual for `model`.
    pub fn riccati_residual(&self, model: &StateSpaceModel) -> f64 {
        let a = model.a();
        let rhs = a * &self.p * a.transpose() + model.sigma_w()
            - &self.k * &self.lambda * self.k.transpose();
        (&self.p - rhs).norm()
    }
}

/// Solves the predictor-form DARE with cross-covariance by fixed-point
/// iteration of the Riccati recursion starting from P0 = sigma_w:
///
///   S = C P C' + sigma_v
///   K = (A P C' + sigma_wv) S^-1
///   P <- A P A' + sigma_w - K S K'
pub fn solve_dare(model: &StateSpaceModel) -> Result<KalmanSolution> {
    let a = model.a();
    let c = model.c();

    let mut p = model.sigma_w().clone();
    let mut last_delta = f64::INFINITY;
    for iter in 1..=DARE_BUDGET {
        let s = c * &p * c.transpose() + model.sigma_v();
        let s_inv = s.clone().try_inverse().ok_or_else(|| {
            FdError::validation("innovation covariance became singular during DARE iteration")
        })?;
        let k = (a * &p * c.transpose() + model.sigma_wv()) * s_inv;
        let mut next = a * &p * a.transpose() + model.sigma_w() - &k * &s * k.transpose();
        // keep the iterate exactly symmetric
        next = (&next + next.transpose()) * 0.5;
        last_delta = (&next - &p).norm();
        p = next;
        if last_delta < DARE_TOL {
            let lambda = c * &p * c.transpose() + model.sigma_v();
            let lambda_inv = lambda.clone().try_inverse().ok_or_else(|| {
                FdError::validation("innovation covariance is singular at the fixed point")
            })?;
            let k = (a * &p * c.transpose() + model.sigma_wv()) * lambda_inv;
            let closed_loop = a - &k * c;
            let rho = spectral_radius(&closed_loop);
            if rho >= 1.0 {
                return Err(FdError::SolverFailure {
                    iterations: iter,
                    residual: rho,
                });
            }
            return Ok(KalmanSolution {
                k,
                lambda,
                p,
                iterations: iter,
            });
        }
    }
    Err(FdError::SolverFailure {
        iterations: DARE_BUDGET,
        residual: last_delta,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testutil::benchmark_model;
    use nalgebra::dmatrix;

    #[test]
    fn no_process_noise_gives_zero_gain() {
        let model = StateSpaceModel::new(
            dmatrix![0.5, 0.1; 0.0, 0.3],
            dmatrix![1.0; 0.0],
            dmatrix![1.0, 0.0],
            DMatrix::zeros(2, 2),
            dmatrix![0.7],
            DMatrix::zeros(2, 1),
        )
        .unwrap();
        let sol = solve_dare(&model).unwrap();
        assert!(sol.k.amax() < 1e-12);
        assert!(sol.p.amax() < 1e-12);
        assert!((sol.lambda[(0, 0)] - 0.7).abs() < 1e-12);
    }

    #[test]
    fn scalar_dare_matches_closed_form() {
        // a=0.5, c=1, sigma_w=1, sigma_v=1: p^2 - 0.25 p - 1 = 0
        let model = StateSpaceModel::new(
            dmatrix![0.5],
            dmatrix![1.0],
            dmatrix![1.0],
            dmatrix![1.0],
            dmatrix![1.0],
            dmatrix![0.0],
        )
        .unwrap();
        let sol = solve_dare(&model).unwrap();
        let p_exact = (0.25 + 4.0625f64.sqrt()) / 2.0;
        assert!((sol.p[(0, 0)] - p_exact).abs() < 1e-10);
        assert!((sol.lambda[(0, 0)] - (p_exact + 1.0)).abs() < 1e-10);
        assert!((sol.k[(0, 0)] - 0.5 * p_exact / (p_exact + 1.0)).abs() < 1e-10);
        assert!((sol.p[(0, 0)] - 1.13278).abs() < 1e-5);
        assert!((sol.k[(0, 0)] - 0.26557).abs() < 1e-5);
        assert!((sol.lambda[(0, 0)] - 2.13278).abs() < 1e-5);
    }

    #[test]
    fn benchmark_plant_solution_is_certified() {
        let model = benchmark_model();
        let sol = solve_dare(&model).unwrap();
        assert!(sol.riccati_residual(&model) < 1e-10);
        let closed_loop = model.a() - &sol.k * model.c();
        assert!(spectral_radius(&closed_loop) < 1.0);
        assert!(sol.lambda[(0, 0)] > model.sigma_v()[(0, 0)]);
    }
}
