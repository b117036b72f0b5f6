//! Power spectra and the fault-to-noise performance index.
//!
//! The index of a residual is the ratio of faulty to fault-free residual
//! power; in the frequency domain it is one plus the ratio of the fault and
//! disturbance spectrum integrals. Its maximum over all post-filters is
//! attained by an ideal selector of the frequency maximizing the pointwise
//! spectral ratio.

mod welch;

pub use welch::estimate_spectrum;

use serde::Serialize;

use crate::error::{FdError, Result};
use crate::lti::RationalTransferFunction;
use crate::residual::ResidualSeries;

/// Number of grid points of the default frequency grid.
pub const DEFAULT_GRID_LEN: usize = 4096;

/// Uniform frequency grid on [0, pi], endpoints included.
pub fn default_grid() -> Vec<f64> {
    uniform_grid(DEFAULT_GRID_LEN)
}

pub fn uniform_grid(len: usize) -> Vec<f64> {
    assert!(len >= 2);
    (0..len)
        .map(|i| std::f64::consts::PI * i as f64 / (len - 1) as f64)
        .collect()
}

/// A one-sided power spectrum sampled on an ascending grid in [0, pi].
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    grid: Vec<f64>,
    values: Vec<f64>,
}

impl Spectrum {
    pub fn new(grid: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if grid.len() != values.len() || grid.len() < 2 {
            return Err(FdError::validation(
                "spectrum grid and values must share a length of at least 2",
            ));
        }
        if !grid.windows(2).all(|w| w[0] < w[1]) {
            return Err(FdError::validation("grid must be strictly ascending"));
        }
        if grid[0] != 0.0 || (grid[grid.len() - 1] - std::f64::consts::PI).abs() > 1e-12 {
            return Err(FdError::validation("grid must span [0, pi]"));
        }
        if values.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(FdError::validation("power density must be nonnegative"));
        }
        Ok(Self { grid, values })
    }

    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn same_grid(&self, other: &Self) -> bool {
        self.grid == other.grid
    }

    /// Pointwise map of the density; the weight must stay nonnegative.
    pub fn weighted(&self, weight: impl Fn(f64) -> f64) -> Result<Self> {
        let values = self
            .grid
            .iter()
            .zip(&self.values)
            .map(|(&w, &v)| v * weight(w))
            .collect();
        Self::new(self.grid.clone(), values)
    }

    /// Trapezoidal integral over [0, pi].
    pub fn integrate(&self) -> f64 {
        trapezoid(&self.grid, &self.values, 0.0, std::f64::consts::PI)
    }

    /// Trapezoidal integral over the band [lo, hi] with interpolated edges.
    pub fn band_integral(&self, lo: f64, hi: f64) -> Result<f64> {
        if !(0.0..=std::f64::consts::PI).contains(&lo) || hi <= lo || hi > std::f64::consts::PI {
            return Err(FdError::validation(
                "band must satisfy 0 <= lo < hi <= pi and lie on the grid",
            ));
        }
        Ok(trapezoid(&self.grid, &self.values, lo, hi))
    }

    /// Signal power implied by the spectrum: (1/2pi) times the symmetric
    /// integral over [-pi, pi].
    pub fn power(&self) -> f64 {
        self.integrate() / std::f64::consts::PI
    }
}

fn interp(grid: &[f64], values: &[f64], x: f64) -> f64 {
    match grid.binary_search_by(|g| g.partial_cmp(&x).unwrap()) {
        Ok(i) => values[i],
        Err(i) => {
            if i == 0 {
                values[0]
            } else if i >= grid.len() {
                values[values.len() - 1]
            } else {
                let t = (x - grid[i - 1]) / (grid[i] - grid[i - 1]);
                values[i - 1] + t * (values[i] - values[i - 1])
            }
        }
    }
}

fn trapezoid(grid: &[f64], values: &[f64], lo: f64, hi: f64) -> f64 {
    let mut acc = 0.0;
    let mut prev_x = lo;
    let mut prev_v = interp(grid, values, lo);
    for (&x, &v) in grid.iter().zip(values) {
        if x <= lo {
            continue;
        }
        if x >= hi {
            break;
        }
        acc += (x - prev_x) * (prev_v + v) * 0.5;
        prev_x = x;
        prev_v = v;
    }
    let end_v = interp(grid, values, hi);
    acc + (hi - prev_x) * (prev_v + end_v) * 0.5
}

/// Analytic disturbance spectrum |H(e^{j w})|^2 * lambda.
pub fn analytic_disturbance_spectrum(
    h: &RationalTransferFunction,
    lambda: f64,
    grid: &[f64],
) -> Result<Spectrum> {
    if !h.is_stable() {
        return Err(FdError::validation("H must be stable"));
    }
    let values = grid
        .iter()
        .map(|&w| {
            let g = h.gain_at(w);
            g * g * lambda
        })
        .collect();
    Spectrum::new(grid.to_vec(), values)
}

/// Time-domain performance index: ratio of settled mean squares of the faulty
/// and fault-free residuals.
pub fn perf_index_time(r_faulty: &ResidualSeries, r_normal: &ResidualSeries) -> Result<f64> {
    if r_faulty.settled().is_empty() || r_normal.settled().is_empty() {
        return Err(FdError::validation(
            "residuals must have samples past the transient",
        ));
    }
    let denom = r_normal.power();
    if denom <= 0.0 {
        return Err(FdError::DegenerateInput(
            "fault-free residual has zero power".into(),
        ));
    }
    Ok(r_faulty.power() / denom)
}

/// Frequency-domain performance index: 1 + ratio of the spectrum integrals.
pub fn perf_index_freq(phi_fault: &Spectrum, phi_dist: &Spectrum) -> Result<f64> {
    if !phi_fault.same_grid(phi_dist) {
        return Err(FdError::validation("spectra must share a grid"));
    }
    let denom = phi_dist.integrate();
    if denom <= 0.0 {
        return Err(FdError::DegenerateInput(
            "disturbance spectrum integrates to zero".into(),
        ));
    }
    Ok(phi_fault.integrate() / denom + 1.0)
}

/// Band-limited index obtained by an ideal selector of [lo, hi]:
/// 1 + ratio of band integrals.
pub fn band_limited_index(
    phi_fault: &Spectrum,
    phi_dist: &Spectrum,
    lo: f64,
    hi: f64,
) -> Result<f64> {
    if !phi_fault.same_grid(phi_dist) {
        return Err(FdError::validation("spectra must share a grid"));
    }
    let denom = phi_dist.band_integral(lo, hi)?;
    if denom <= 0.0 {
        return Err(FdError::DegenerateInput(
            "disturbance spectrum vanishes on the band".into(),
        ));
    }
    Ok(phi_fault.band_integral(lo, hi)? / denom + 1.0)
}

/// Frequency attaining the best pointwise fault-to-disturbance ratio and the
/// corresponding maximal index. Ties resolve to the smallest frequency.
pub fn optimal_frequency(phi_fault: &Spectrum, phi_dist: &Spectrum) -> Result<(f64, f64)> {
    if !phi_fault.same_grid(phi_dist) {
        return Err(FdError::validation("spectra must share a grid"));
    }
    if phi_dist.values().iter().any(|&v| v <= 0.0) {
        return Err(FdError::validation(
            "disturbance spectrum must be strictly positive on the grid",
        ));
    }
    let mut best_idx = 0;
    let mut best_ratio = f64::NEG_INFINITY;
    for (i, (&f, &d)) in phi_fault.values().iter().zip(phi_dist.values()).enumerate() {
        let ratio = f / d;
        if ratio > best_ratio {
            best_ratio = ratio;
            best_idx = i;
        }
    }
    Ok((phi_fault.grid()[best_idx], best_ratio + 1.0))
}

/// Band-limited comparison of a residual and its inverse-H weighted
/// counterpart over the passband [0, band_edge]: returns the index obtained
/// from the raw spectra and the index after |H^-1|^2 weighting.
pub fn band_weighting_indices(
    phi_f: &Spectrum,
    phi_v: &Spectrum,
    h: &RationalTransferFunction,
    band_edge: f64,
) -> Result<(f64, f64)> {
    if !(band_edge > 0.0 && band_edge <= std::f64::consts::PI) {
        return Err(FdError::validation("band edge must lie in (0, pi]"));
    }
    let j_oef = band_limited_index(phi_f, phi_v, 0.0, band_edge)?;
    let weight = |w: f64| {
        let g = h.gain_at(w);
        1.0 / (g * g)
    };
    let wf = phi_f.weighted(weight)?;
    let wv = phi_v.weighted(weight)?;
    let j_pef = band_limited_index(&wf, &wv, 0.0, band_edge)?;
    Ok((j_oef, j_pef))
}

/// Performance-index summary for one method.
#[derive(Debug, Clone, Serialize)]
pub struct PerfIndexReport {
    pub method_id: String,
    pub j_time: f64,
    pub j_freq: f64,
    pub omega0: f64,
    pub j_opt: f64,
}
