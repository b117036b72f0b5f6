use serde::{Deserialize, Serialize};

/// Baseline transient excluded from moment estimation and evaluation.
pub const DEFAULT_TRANSIENT: usize = 200;

/// Provenance of a residual sequence.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ResidualKind {
    Oe,
    Pe,
    FilteredOe,
    FilteredPe,
}

impl ResidualKind {
    pub fn filtered(self) -> Self {
        match self {
            ResidualKind::Oe | ResidualKind::FilteredOe => ResidualKind::FilteredOe,
            ResidualKind::Pe | ResidualKind::FilteredPe => ResidualKind::FilteredPe,
        }
    }
}

/// A generated residual with its provenance.
#[derive(Debug, Clone, PartialEq)]
pub struct ResidualSeries {
    pub values: Vec<f64>,
    pub kind: ResidualKind,
    pub filter_id: Option<String>,
    /// Leading samples to exclude from evaluation.
    pub transient: usize,
}

impl ResidualSeries {
    pub fn new(values: Vec<f64>, kind: ResidualKind) -> Self {
        let transient = DEFAULT_TRANSIENT.min(values.len().saturating_sub(1));
        Self {
            values,
            kind,
            filter_id: None,
            transient,
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Samples past the transient.
    pub fn settled(&self) -> &[f64] {
        &self.values[self.transient.min(self.values.len())..]
    }

    /// Mean square of the settled samples.
    pub fn power(&self) -> f64 {
        let s = self.settled();
        if s.is_empty() {
            return 0.0;
        }
        s.iter().map(|v| v * v).sum::<f64>() / s.len() as f64
    }
}
