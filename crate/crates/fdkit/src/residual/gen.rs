use nalgebra::{DMatrix, DVector};

use super::butterworth::DigitalFilter;
use super::series::{ResidualKind, ResidualSeries};
use crate::error::{FdError, Result};
use crate::lti::{RationalTransferFunction, StateSpaceModel};
use crate::signal::SimulationRecord;

/// Output-error residual zeta = y - G u, by direct-form recursion with zero
/// initial filter state.
pub fn residual_oe(
    record: &SimulationRecord,
    g: &RationalTransferFunction,
) -> Result<ResidualSeries> {
    if !g.is_stable() {
        return Err(FdError::validation("plant model G must be stable"));
    }
    let gu = g.filter(&record.u);
    let values = record
        .y
        .iter()
        .zip(&gu)
        .map(|(y, m)| y - m)
        .collect::<Vec<_>>();
    Ok(ResidualSeries::new(values, ResidualKind::Oe))
}

/// Prediction-error residual eps = H^-1 (y - G u). Requires H minimum phase.
pub fn residual_pe(
    record: &SimulationRecord,
    g: &RationalTransferFunction,
    h: &RationalTransferFunction,
) -> Result<ResidualSeries> {
    let h_inv = h.inverse()?;
    let oe = residual_oe(record, g)?;
    let values = h_inv.filter(&oe.values);
    Ok(ResidualSeries::new(values, ResidualKind::Pe))
}

/// Innovation of the steady-state observer
/// xhat(t+1) = A xhat(t) + B u(t) + K (y(t) - C xhat(t)), from xhat(0) = 0.
pub fn residual_kf_statespace(
    model: &StateSpaceModel,
    k: &DMatrix<f64>,
    record: &SimulationRecord,
) -> Result<ResidualSeries> {
    if !model.is_siso() {
        return Err(FdError::UnsupportedShape(
            "observer recursion supports SISO models only".into(),
        ));
    }
    if k.shape() != (model.state_dim(), 1) {
        return Err(FdError::validation("observer gain must be n x 1"));
    }
    let a = model.a();
    let b = model.b();
    let c = model.c();
    let mut xhat = DVector::<f64>::zeros(model.state_dim());
    let mut values = Vec::with_capacity(record.len());
    for t in 0..record.len() {
        let innov = record.y[t] - (c * &xhat)[0];
        values.push(innov);
        xhat = a * &xhat + b * record.u[t] + k * innov;
    }
    Ok(ResidualSeries::new(values, ResidualKind::Pe))
}

/// Causal forward filtering of a residual; the transient is extended by the
/// filter's settling length.
pub fn apply_filter(filter: &DigitalFilter, series: &ResidualSeries) -> ResidualSeries {
    let values = filter.tf.filter(&series.values);
    let transient = series
        .transient
        .max(filter.settling_len())
        .min(values.len().saturating_sub(1));
    ResidualSeries {
        values,
        kind: series.kind.filtered(),
        filter_id: Some(filter.id()),
        transient,
    }
}
