use nalgebra::DMatrix;
use num_complex::Complex64;

use super::model::StateSpaceModel;
use crate::error::{FdError, Result};

/// Rational transfer function in the delay operator q^-1.
///
/// Coefficients are stored constant-term first, so
/// `num = [b0, b1, ..]`, `den = [1, a1, ..]` represents
/// (b0 + b1 q^-1 + ..) / (1 + a1 q^-1 + ..). The denominator is kept monic.
#[derive(Debug, Clone, PartialEq)]
pub struct RationalTransferFunction {
    num: Vec<f64>,
    den: Vec<f64>,
}

/// Roots of c[0] x^k + c[1] x^(k-1) + .. + c[k] via the companion matrix.
fn poly_roots(coeffs: &[f64]) -> Vec<Complex64> {
    let scale = coeffs.iter().fold(0.0f64, |a, &b| a.max(b.abs()));
    if scale == 0.0 {
        return Vec::new();
    }
    // strip leading (near-)zero coefficients
    let mut c: Vec<f64> = coeffs
        .iter()
        .copied()
        .skip_while(|v| v.abs() < 1e-14 * scale)
        .collect();
    let deg = c.len().saturating_sub(1);
    if deg == 0 {
        return Vec::new();
    }
    let lead = c[0];
    for v in c.iter_mut() {
        *v /= lead;
    }
    let mut companion = DMatrix::zeros(deg, deg);
    for i in 0..deg {
        companion[(0, i)] = -c[i + 1];
    }
    for i in 1..deg {
        companion[(i, i - 1)] = 1.0;
    }
    companion.complex_eigenvalues().iter().copied().collect()
}

fn poly_mul(a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        for (j, &y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

impl RationalTransferFunction {
    pub fn new(num: Vec<f64>, mut den: Vec<f64>) -> Result<Self> {
        while den.len() > 1 && den.last() == Some(&0.0) && num.len() < den.len() {
            den.pop();
        }
        if den.is_empty() || den[0] == 0.0 {
            return Err(FdError::validation(
                "denominator must have a nonzero leading coefficient",
            ));
        }
        if num.is_empty() {
            return Err(FdError::validation("numerator must be nonempty"));
        }
        let lead = den[0];
        let num = num.iter().map(|v| v / lead).collect();
        let den = den.iter().map(|v| v / lead).collect();
        Ok(Self { num, den })
    }

    /// The unit transfer function Q(q) = 1.
    pub fn unit() -> Self {
        Self {
            num: vec![1.0],
            den: vec![1.0],
        }
    }

    pub fn num(&self) -> &[f64] {
        &self.num
    }

    pub fn den(&self) -> &[f64] {
        &self.den
    }

    /// Evaluate at q = e^{j omega}.
    pub fn eval_at(&self, omega: f64) -> Complex64 {
        let z1 = Complex64::from_polar(1.0, -omega);
        horner(&self.num, z1) / horner(&self.den, z1)
    }

    /// Magnitude of the frequency response at omega, |Q(e^{j omega})|.
    pub fn gain_at(&self, omega: f64) -> f64 {
        self.eval_at(omega).norm()
    }

    /// Poles in the q-plane.
    pub fn poles(&self) -> Vec<Complex64> {
        poly_roots(&self.den)
    }

    /// Zeros in the q-plane (finite zeros only; leading q^-1 delays are dropped).
    pub fn zeros(&self) -> Vec<Complex64> {
        poly_roots(&self.num)
    }

    pub fn is_stable(&self) -> bool {
        self.poles().iter().all(|p| p.norm() < 1.0)
    }

    /// True when all finite zeros are strictly inside the unit circle and the
    /// numerator has no leading delay, so the inverse is stable and causal.
    pub fn is_minimum_phase(&self) -> bool {
        self.num[0].abs() > 1e-14 && self.zeros().iter().all(|z| z.norm() < 1.0 - 1e-9)
    }

    /// Stable causal inverse, available for minimum-phase functions only.
    pub fn inverse(&self) -> Result<Self> {
        if !self.is_minimum_phase() {
            return Err(FdError::NotMinimumPhase(
                "numerator roots must lie strictly inside the unit circle".into(),
            ));
        }
        Self::new(self.den.clone(), self.num.clone())
    }

    /// Series composition (self * other).
    pub fn mul(&self, other: &Self) -> Self {
        Self::new(
            poly_mul(&self.num, &other.num),
            poly_mul(&self.den, &other.den),
        )
        .expect("product of monic denominators is monic")
    }

    /// Causal direct-form filtering with zero initial state.
    pub fn filter(&self, x: &[f64]) -> Vec<f64> {
        let nb = self.num.len();
        let na = self.den.len();
        let mut y = vec![0.0; x.len()];
        for t in 0..x.len() {
            let mut acc = 0.0;
            for k in 0..nb.min(t + 1) {
                acc += self.num[k] * x[t - k];
            }
            for k in 1..na.min(t + 1) {
                acc -= self.den[k] * y[t - k];
            }
            y[t] = acc;
        }
        y
    }

    /// Number of samples after which the impulse-response envelope has decayed
    /// below `fraction`, estimated from the dominant pole magnitude.
    pub fn settling_len(&self, fraction: f64) -> usize {
        let rho = self.poles().iter().map(|p| p.norm()).fold(0.0, f64::max);
        if rho <= 0.0 || rho >= 1.0 {
            return if rho >= 1.0 { usize::MAX } else { 1 };
        }
        (fraction.ln() / rho.ln()).ceil().max(1.0) as usize
    }
}

fn horner(coeffs: &[f64], z1: Complex64) -> Complex64 {
    let mut acc = Complex64::new(0.0, 0.0);
    for &c in coeffs.iter().rev() {
        acc = acc * z1 + c;
    }
    acc
}

/// Converts a SISO state-space model with observer gain `k` to the pair
/// (G, H) with G(q) = C (qI - A)^-1 B and H(q) = C (qI - A)^-1 K + 1.
///
/// Uses the Leverrier-Faddeev recursion so both functions share the exact
/// characteristic polynomial of A as a monic denominator; H therefore always
/// satisfies H -> 1 as q -> infinity.
pub fn ss_to_tf(
    model: &StateSpaceModel,
    k: &DMatrix<f64>,
) -> Result<(RationalTransferFunction, RationalTransferFunction)> {
    if !model.is_siso() {
        return Err(FdError::UnsupportedShape(
            "transfer-function conversion is implemented for SISO models only".into(),
        ));
    }
    if k.shape() != (model.state_dim(), 1) {
        return Err(FdError::validation("gain must be n x 1"));
    }
    let n = model.state_dim();
    let a = model.a();
    let c = model.c();

    // Leverrier-Faddeev: adj(qI - A) = sum_k M_k q^(n-1-k), charpoly coefs c_k.
    let mut m = DMatrix::identity(n, n);
    let mut den = Vec::with_capacity(n + 1);
    den.push(1.0);
    let mut g_num = Vec::with_capacity(n + 1);
    let mut h_num = Vec::with_capacity(n + 1);
    g_num.push(0.0);
    h_num.push(1.0);
    for step in 1..=n {
        g_num.push((c * &m * model.b())[(0, 0)]);
        let h_term = (c * &m * k)[(0, 0)];
        let am = a * &m;
        let coef = -am.trace() / step as f64;
        den.push(coef);
        h_num.push(coef + h_term);
        m = am + DMatrix::identity(n, n) * coef;
    }

    let g = RationalTransferFunction::new(g_num, den.clone())?;
    let h = RationalTransferFunction::new(h_num, den)?;
    Ok((g, h))
}
