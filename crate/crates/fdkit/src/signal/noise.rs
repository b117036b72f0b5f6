use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{FdError, Result};
use crate::lti::StateSpaceModel;

/// A drawn joint realization of process and measurement noise.
#[derive(Debug, Clone)]
pub struct NoiseRealization {
    /// Process noise, one n-vector per sample.
    pub w: Vec<DVector<f64>>,
    /// Measurement noise, scalar per sample.
    pub v: Vec<f64>,
    /// Seed the realization was drawn from.
    pub seed: u64,
}

/// Lower-triangular-like PSD factor L with L L' = m, via symmetric
/// eigendecomposition so that semidefinite covariances are accepted.
fn psd_factor(m: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    if let Some(chol) = nalgebra::Cholesky::new(m.clone()) {
        return Ok(chol.l());
    }
    let sym = (m + m.transpose()) * 0.5;
    let eig = sym.symmetric_eigen();
    let scale = eig.eigenvalues.amax().max(1.0);
    let mut factor = eig.eigenvectors;
    for (j, &lam) in eig.eigenvalues.iter().enumerate() {
        if lam < -1e-10 * scale {
            return Err(FdError::validation(
                "joint noise covariance is not positive semidefinite",
            ));
        }
        let s = lam.max(0.0).sqrt();
        factor.column_mut(j).scale_mut(s);
    }
    Ok(factor)
}

/// Draws `horizon` i.i.d. jointly Gaussian (w(t), v(t)) samples with the
/// model's covariances. Deterministic given the seed.
pub fn gen_noise(model: &StateSpaceModel, horizon: usize, seed: u64) -> Result<NoiseRealization> {
    if model.output_dim() != 1 {
        return Err(FdError::UnsupportedShape(
            "noise generation supports single-output models".into(),
        ));
    }
    let n = model.state_dim();
    let joint = model.joint_noise_covariance();
    let factor = psd_factor(&joint)?;

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut w = Vec::with_capacity(horizon);
    let mut v = Vec::with_capacity(horizon);
    let mut z = DVector::zeros(n + 1);
    for _ in 0..horizon {
        for zi in z.iter_mut() {
            *zi = StandardNormal.sample(&mut rng);
        }
        let s = &factor * &z;
        w.push(DVector::from_iterator(n, s.iter().take(n).copied()));
        v.push(s[n]);
    }
    Ok(NoiseRealization { w, v, seed })
}
