use nalgebra::DMatrix;

use crate::error::{FdError, Result};

/// Largest eigenvalue magnitude of a square matrix.
pub fn spectral_radius(m: &DMatrix<f64>) -> f64 {
    assert!(m.is_square(), "spectral_radius requires a square matrix");
    if m.nrows() == 0 {
        return 0.0;
    }
    m.complex_eigenvalues()
        .iter()
        .map(|e| e.norm())
        .fold(0.0, f64::max)
}

fn min_symmetric_eigenvalue(m: &DMatrix<f64>) -> f64 {
    let sym = (m + m.transpose()) * 0.5;
    sym.symmetric_eigenvalues()
        .iter()
        .fold(f64::INFINITY, |a, &b| a.min(b))
}

fn check_symmetric(m: &DMatrix<f64>, name: &str) -> Result<()> {
    let scale = m.amax().max(1.0);
    if (m - m.transpose()).amax() > 1e-10 * scale {
        return Err(FdError::validation(format!("{name} must be symmetric")));
    }
    Ok(())
}

/// Stable discrete-time plant x(t+1) = A x(t) + B u(t) + w(t), y(t) = C x(t) + v(t)
/// with jointly Gaussian white (w, v) of covariances (sigma_w, sigma_v, sigma_wv).
#[derive(Debug, Clone, PartialEq)]
pub struct StateSpaceModel {
    a: DMatrix<f64>,
    b: DMatrix<f64>,
    c: DMatrix<f64>,
    sigma_w: DMatrix<f64>,
    sigma_v: DMatrix<f64>,
    sigma_wv: DMatrix<f64>,
}

impl StateSpaceModel {
    pub fn new(
        a: DMatrix<f64>,
        b: DMatrix<f64>,
        c: DMatrix<f64>,
        sigma_w: DMatrix<f64>,
        sigma_v: DMatrix<f64>,
        sigma_wv: DMatrix<f64>,
    ) -> Result<Self> {
        let n = a.nrows();
        if !a.is_square() {
            return Err(FdError::validation("A must be square"));
        }
        if b.nrows() != n {
            return Err(FdError::validation("B row count must match A"));
        }
        let p = c.nrows();
        if c.ncols() != n {
            return Err(FdError::validation("C column count must match A"));
        }
        if sigma_w.shape() != (n, n) {
            return Err(FdError::validation("sigma_w must be n x n"));
        }
        if sigma_v.shape() != (p, p) {
            return Err(FdError::validation("sigma_v must be p x p"));
        }
        if sigma_wv.shape() != (n, p) {
            return Err(FdError::validation("sigma_wv must be n x p"));
        }
        check_symmetric(&sigma_w, "sigma_w")?;
        check_symmetric(&sigma_v, "sigma_v")?;
        if min_symmetric_eigenvalue(&sigma_w) < -1e-10 {
            return Err(FdError::validation("sigma_w must be positive semidefinite"));
        }
        if min_symmetric_eigenvalue(&sigma_v) <= 0.0 {
            return Err(FdError::validation("sigma_v must be positive definite"));
        }
        let rho = spectral_radius(&a);
        if rho >= 1.0 {
            return Err(FdError::validation(format!(
                "A must be stable, spectral radius {rho:.6} >= 1"
            )));
        }
        Ok(Self {
            a,
            b,
            c,
            sigma_w,
            sigma_v,
            sigma_wv,
        })
    }

    pub fn state_dim(&self) -> usize {
        self.a.nrows()
    }

    pub fn input_dim(&self) -> usize {
        self.b.ncols()
    }

    pub fn output_dim(&self) -> usize {
        self.c.nrows()
    }

    pub fn is_siso(&self) -> bool {
        self.input_dim() == 1 && self.output_dim() == 1
    }

    pub fn a(&self) -> &DMatrix<f64> {
        &self.a
    }

    pub fn b(&self) -> &DMatrix<f64> {
        &self.b
    }

    pub fn c(&self) -> &DMatrix<f64> {
        &self.c
    }

    pub fn sigma_w(&self) -> &DMatrix<f64> {
        &self.sigma_w
    }

    pub fn sigma_v(&self) -> &DMatrix<f64> {
        &self.sigma_v
    }

    pub fn sigma_wv(&self) -> &DMatrix<f64> {
        &self.sigma_wv
    }

    /// Joint (n+p) x (n+p) covariance of stacked (w, v).
    pub fn joint_noise_covariance(&self) -> DMatrix<f64> {
        let n = self.state_dim();
        let p = self.output_dim();
        let mut joint = DMatrix::zeros(n + p, n + p);
        joint.view_mut((0, 0), (n, n)).copy_from(&self.sigma_w);
        joint.view_mut((0, n), (n, p)).copy_from(&self.sigma_wv);
        joint
            .view_mut((n, 0), (p, n))
            .copy_from(&self.sigma_wv.transpose());
        joint.view_mut((n, n), (p, p)).copy_from(&self.sigma_v);
        joint
    }
}
