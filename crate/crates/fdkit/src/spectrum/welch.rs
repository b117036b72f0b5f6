use num_complex::Complex64;
use rustfft::FftPlanner;

use super::Spectrum;
use crate::error::{FdError, Result};

const SEGMENT_LEN: usize = 1024;

/// Welch-averaged periodogram interpolated onto `grid`.
///
/// Hann-windowed segments of 1024 samples with 50% overlap; the density is
/// normalized so that (1/2pi) times the symmetric integral recovers the
/// signal power.
pub fn estimate_spectrum(signal: &[f64], grid: &[f64]) -> Result<Spectrum> {
    if signal.len() < SEGMENT_LEN {
        return Err(FdError::validation(format!(
            "signal too short for spectrum estimation: {} < {SEGMENT_LEN}",
            signal.len()
        )));
    }
    let window: Vec<f64> = (0..SEGMENT_LEN)
        .map(|i| {
            let x = std::f64::consts::PI * i as f64 / SEGMENT_LEN as f64;
            x.sin() * x.sin()
        })
        .collect();
    let window_energy: f64 = window.iter().map(|w| w * w).sum();

    let mut planner = FftPlanner::new();
    let fft = planner.plan_fft_forward(SEGMENT_LEN);

    let half = SEGMENT_LEN / 2;
    let mut acc = vec![0.0f64; half + 1];
    let mut segments = 0usize;
    let mut start = 0usize;
    let mut buf = vec![Complex64::new(0.0, 0.0); SEGMENT_LEN];
    while start + SEGMENT_LEN <= signal.len() {
        for i in 0..SEGMENT_LEN {
            buf[i] = Complex64::new(signal[start + i] * window[i], 0.0);
        }
        fft.process(&mut buf);
        for (k, a) in acc.iter_mut().enumerate() {
            *a += buf[k].norm_sqr() / window_energy;
        }
        segments += 1;
        start += half;
    }
    for a in acc.iter_mut() {
        *a /= segments as f64;
    }

    // bin frequencies 2 pi k / N cover [0, pi] for k = 0..N/2
    let bin_freqs: Vec<f64> = (0..=half)
        .map(|k| 2.0 * std::f64::consts::PI * k as f64 / SEGMENT_LEN as f64)
        .collect();
    let values: Vec<f64> = grid
        .iter()
        .map(|&w| linear_interp(&bin_freqs, &acc, w).max(0.0))
        .collect();
    Spectrum::new(grid.to_vec(), values)
}

fn linear_interp(xs: &[f64], ys: &[f64], x: f64) -> f64 {
    match xs.binary_search_by(|g| g.partial_cmp(&x).unwrap()) {
        Ok(i) => ys[i],
        Err(0) => ys[0],
        Err(i) if i >= xs.len() => ys[ys.len() - 1],
        Err(i) => {
            let t = (x - xs[i - 1]) / (xs[i] - xs[i - 1]);
            ys[i - 1] + t * (ys[i] - ys[i - 1])
        }
    }
}
