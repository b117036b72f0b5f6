use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::series::DEFAULT_TRANSIENT;
use crate::error::{FdError, Result};
use crate::lti::RationalTransferFunction;

/// Band shape of a post-filter. Frequencies are in rad/sample.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "snake_case")]
pub enum FilterShape {
    LowPass { cutoff: f64 },
    BandPass { low: f64, high: f64 },
}

fn default_order() -> usize {
    2
}

/// Requested filter: shape plus prototype order. A band-pass design doubles
/// the order (the stated order applies per band edge).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FilterSpec {
    #[serde(flatten)]
    pub shape: FilterShape,
    #[serde(default = "default_order")]
    pub order: usize,
}

impl FilterSpec {
    pub fn low_pass(cutoff: f64, order: usize) -> Self {
        Self {
            shape: FilterShape::LowPass { cutoff },
            order,
        }
    }

    pub fn band_pass(low: f64, high: f64, order: usize) -> Self {
        Self {
            shape: FilterShape::BandPass { low, high },
            order,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.order == 0 {
            return Err(FdError::validation("filter order must be positive"));
        }
        match self.shape {
            FilterShape::LowPass { cutoff } => {
                if !(cutoff > 0.0 && cutoff < std::f64::consts::PI) {
                    return Err(FdError::validation("cutoff must lie in (0, pi)"));
                }
            }
            FilterShape::BandPass { low, high } => {
                if !(low > 0.0 && low < high && high < std::f64::consts::PI) {
                    return Err(FdError::validation(
                        "band edges must satisfy 0 < low < high < pi",
                    ));
                }
            }
        }
        Ok(())
    }

    pub fn id(&self) -> String {
        match self.shape {
            FilterShape::LowPass { cutoff } => format!("lp{:.4}-o{}", cutoff, self.order),
            FilterShape::BandPass { low, high } => {
                format!("bp{:.4}-{:.4}-o{}", low, high, self.order)
            }
        }
    }
}

/// A realized stable digital filter.
#[derive(Debug, Clone)]
pub struct DigitalFilter {
    pub tf: RationalTransferFunction,
    pub spec: FilterSpec,
}

impl DigitalFilter {
    pub fn id(&self) -> String {
        self.spec.id()
    }

    /// Transient to discard after filtering: the larger of the baseline
    /// transient and the filter's 1%-settling length.
    pub fn settling_len(&self) -> usize {
        self.tf.settling_len(0.01).max(DEFAULT_TRANSIENT)
    }
}

fn prototype_poles(order: usize) -> Vec<Complex64> {
    (0..order)
        .map(|k| {
            let theta = std::f64::consts::PI * (2 * k + order + 1) as f64 / (2 * order) as f64;
            Complex64::from_polar(1.0, theta)
        })
        .collect()
}

/// Pre-warped analog frequency for the bilinear transform s = 2 (z-1)/(z+1).
fn warp(omega: f64) -> f64 {
    2.0 * (omega / 2.0).tan()
}

struct Zpk {
    zeros: Vec<Complex64>,
    poles: Vec<Complex64>,
    gain: f64,
}

fn bilinear(analog: &Zpk) -> Zpk {
    let two = Complex64::new(2.0, 0.0);
    let map = |s: Complex64| (two + s) / (two - s);
    let zeros: Vec<_> = analog.zeros.iter().map(|&z| map(z)).collect();
    let mut poles: Vec<_> = analog.poles.iter().map(|&p| map(p)).collect();
    let mut num = Complex64::new(1.0, 0.0);
    for &z in &analog.zeros {
        num *= two - z;
    }
    let mut den = Complex64::new(1.0, 0.0);
    for &p in &analog.poles {
        den *= two - p;
    }
    let gain = analog.gain * (num / den).re;
    // zeros at infinity map to z = -1
    let mut zeros = zeros;
    while zeros.len() < poles.len() {
        zeros.push(Complex64::new(-1.0, 0.0));
    }
    while poles.len() < zeros.len() {
        poles.push(Complex64::new(-1.0, 0.0));
    }
    Zpk { zeros, poles, gain }
}

/// Expands a root list into real polynomial coefficients, descending powers.
fn roots_to_poly(roots: &[Complex64]) -> Vec<f64> {
    let mut coeffs = vec![Complex64::new(1.0, 0.0)];
    for &r in roots {
        let mut next = vec![Complex64::new(0.0, 0.0); coeffs.len() + 1];
        for (i, &c) in coeffs.iter().enumerate() {
            next[i] += c;
            next[i + 1] -= c * r;
        }
        coeffs = next;
    }
    coeffs.iter().map(|c| c.re).collect()
}

/// Designs a digital Butterworth filter by analog prototype, band transform
/// and bilinear mapping with frequency pre-warping.
pub fn design_butterworth(spec: &FilterSpec) -> Result<DigitalFilter> {
    spec.validate()?;
    let proto = prototype_poles(spec.order);

    let (analog, center) = match spec.shape {
        FilterShape::LowPass { cutoff } => {
            let wc = warp(cutoff);
            let poles: Vec<_> = proto.iter().map(|&p| p * wc).collect();
            let gain = wc.powi(spec.order as i32);
            (
                Zpk {
                    zeros: Vec::new(),
                    poles,
                    gain,
                },
                0.0,
            )
        }
        FilterShape::BandPass { low, high } => {
            let wl = warp(low);
            let wh = warp(high);
            let bw = wh - wl;
            let w0sq = Complex64::new(wl * wh, 0.0);
            let mut poles = Vec::with_capacity(2 * spec.order);
            for &p in &proto {
                let half = p * (bw / 2.0);
                let root = (half * half - w0sq).sqrt();
                poles.push(half + root);
                poles.push(half - root);
            }
            let zeros = vec![Complex64::new(0.0, 0.0); spec.order];
            let gain = bw.powi(spec.order as i32);
            // digital frequency whose pre-warp is the analog center
            let center = 2.0 * ((wl * wh).sqrt() / 2.0).atan();
            (Zpk { zeros, poles, gain }, center)
        }
    };

    let digital = bilinear(&analog);
    let mut num = roots_to_poly(&digital.zeros);
    for v in num.iter_mut() {
        *v *= digital.gain;
    }
    let den = roots_to_poly(&digital.poles);
    let tf = RationalTransferFunction::new(num, den)?;

    if !tf.is_stable() {
        return Err(FdError::Conditioning(
            "designed filter has poles outside the unit circle".into(),
        ));
    }
    // exact unity at the reference frequency
    let ref_gain = tf.gain_at(center);
    if !(ref_gain.is_finite() && ref_gain > 1e-6) {
        return Err(FdError::Conditioning(
            "reference-frequency gain collapsed numerically".into(),
        ));
    }
    let num: Vec<f64> = tf.num().iter().map(|v| v / ref_gain).collect();
    let tf = RationalTransferFunction::new(num, tf.den().to_vec())?;

    let filter = DigitalFilter { tf, spec: *spec };
    match spec.shape {
        FilterShape::LowPass { .. } => {
            if (filter.tf.gain_at(0.0) - 1.0).abs() > 1e-9 {
                return Err(FdError::Conditioning("DC gain normalization failed".into()));
            }
        }
        FilterShape::BandPass { .. } => {
            let g = filter.tf.gain_at(center);
            if !(0.9..=1.0 + 1e-9).contains(&g) {
                return Err(FdError::Conditioning(format!(
                    "center-frequency gain {g:.4} outside [0.9, 1]"
                )));
            }
        }
    }
    Ok(filter)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_1_SQRT_2;

    #[test]
    fn low_pass_cutoff_gain_is_half_power() {
        let f = design_butterworth(&FilterSpec::low_pass(0.02, 2)).unwrap();
        assert!((f.tf.gain_at(0.02) - FRAC_1_SQRT_2).abs() < 1e-4);
        assert!((f.tf.gain_at(0.0) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn low_pass_magnitude_is_monotone() {
        let f = design_butterworth(&FilterSpec::low_pass(0.3, 3)).unwrap();
        let mut prev = f.tf.gain_at(0.0);
        for i in 1..200 {
            let g = f.tf.gain_at(std::f64::consts::PI * i as f64 / 200.0);
            assert!(g <= prev + 1e-9);
            prev = g;
        }
    }

    #[test]
    fn narrow_band_pass_selects_its_band() {
        let f = design_butterworth(&FilterSpec::band_pass(0.395, 0.405, 2)).unwrap();
        assert!(f.tf.gain_at(0.4) >= 0.99, "gain {}", f.tf.gain_at(0.4));
        assert!(f.tf.gain_at(0.2) <= 0.01, "gain {}", f.tf.gain_at(0.2));
        assert!(f.tf.gain_at(0.8) <= 0.01);
    }

    #[test]
    fn band_edges_sit_near_half_power() {
        let f = design_butterworth(&FilterSpec::band_pass(0.3, 0.5, 2)).unwrap();
        assert!((f.tf.gain_at(0.3) - FRAC_1_SQRT_2).abs() < 1e-3);
        assert!((f.tf.gain_at(0.5) - FRAC_1_SQRT_2).abs() < 1e-3);
    }

    #[test]
    fn invalid_specs_rejected() {
        assert!(design_butterworth(&FilterSpec::low_pass(0.0, 2)).is_err());
        assert!(design_butterworth(&FilterSpec::band_pass(0.5, 0.4, 2)).is_err());
        assert!(design_butterworth(&FilterSpec::low_pass(0.1, 0)).is_err());
    }

    #[test]
    fn hopeless_conditioning_reports_error() {
        // extremely narrow band at high order collapses in double precision
        let res = design_butterworth(&FilterSpec::band_pass(0.400000, 0.400001, 12));
        if let Err(e) = res {
            assert!(matches!(e, FdError::Conditioning(_)));
        }
    }

    #[test]
    fn settling_length_grows_with_narrow_bands() {
        let wide = design_butterworth(&FilterSpec::low_pass(0.3, 2)).unwrap();
        let narrow = design_butterworth(&FilterSpec::low_pass(0.01, 2)).unwrap();
        assert!(narrow.settling_len() > wide.settling_len());
    }
}
