use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Straight (non-premultiplied) RGBA in `[0, 1]`.
pub type Rgba = [f32; 4];

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TfError {
    #[error("transfer function needs at least 2 entries, got {0}")]
    TooFewEntries(usize),
    #[error("entry {index} component {component} = {value} is outside [0, 1]")]
    ComponentOutOfRange {
        index: usize,
        component: usize,
        value: f32,
    },
    #[error("domain [{0}, {1}] is empty or not finite")]
    BadDomain(f32, f32),
    #[error("opacity scale {0} must be finite and >= 0")]
    BadOpacityScale(f32),
}

/// Piecewise-linear 1-D classification with entries spread evenly over
/// `domain`. Effective alpha is `min(1, alpha * opacity_scale)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "TransferFunctionDef", into = "TransferFunctionDef")]
pub struct TransferFunction {
    entries: Vec<Rgba>,
    domain: (f32, f32),
    opacity_scale: f32,
}

#[derive(Serialize, Deserialize)]
struct TransferFunctionDef {
    domain: (f32, f32),
    opacity_scale: f32,
    entries: Vec<Rgba>,
}

impl TryFrom<TransferFunctionDef> for TransferFunction {
    type Error = TfError;
    fn try_from(d: TransferFunctionDef) -> Result<Self, TfError> {
        TransferFunction::new(d.entries, d.domain, d.opacity_scale)
    }
}

impl From<TransferFunction> for TransferFunctionDef {
    fn from(tf: TransferFunction) -> Self {
        TransferFunctionDef {
            domain: tf.domain,
            opacity_scale: tf.opacity_scale,
            entries: tf.entries,
        }
    }
}

impl TransferFunction {
    pub fn new(entries: Vec<Rgba>, domain: (f32, f32), opacity_scale: f32) -> Result<Self, TfError> {
        if entries.len() < 2 {
            return Err(TfError::TooFewEntries(entries.len()));
        }
        for (index, e) in entries.iter().enumerate() {
            for (component, &value) in e.iter().enumerate() {
                if !(0.0..=1.0).contains(&value) {
                    return Err(TfError::ComponentOutOfRange {
                        index,
                        component,
                        value,
                    });
                }
            }
        }
        if !(domain.0.is_finite() && domain.1.is_finite() && domain.0 < domain.1) {
            return Err(TfError::BadDomain(domain.0, domain.1));
        }
        if !(opacity_scale.is_finite() && opacity_scale >= 0.0) {
            return Err(TfError::BadOpacityScale(opacity_scale));
        }
        Ok(Self {
            entries,
            domain,
            opacity_scale,
        })
    }

    /// Grey ramp with alpha rising linearly from 0 to 1 over `domain`.
    pub fn ramp(domain: (f32, f32)) -> Self {
        Self::new(vec![[0.0, 0.0, 0.0, 0.0], [1.0, 1.0, 1.0, 1.0]], domain, 1.0)
            .expect("valid ramp")
    }

    pub fn entries(&self) -> &[Rgba] {
        &self.entries
    }

    pub fn domain(&self) -> (f32, f32) {
        self.domain
    }

    pub fn opacity_scale(&self) -> f32 {
        self.opacity_scale
    }

    pub fn with_opacity_scale(mut self, scale: f32) -> Result<Self, TfError> {
        if !(scale.is_finite() && scale >= 0.0) {
            return Err(TfError::BadOpacityScale(scale));
        }
        self.opacity_scale = scale;
        Ok(self)
    }

    fn effective_alpha(&self, a: f32) -> f32 {
        (a * self.opacity_scale).clamp(0.0, 1.0)
    }

    /// Position of `v` in entry space, clamped to `[0, N - 1]`.
    fn entry_coord(&self, v: f32) -> f32 {
        let (lo, hi) = self.domain;
        let t = ((v - lo) / (hi - lo)).clamp(0.0, 1.0);
        if t.is_nan() {
            0.0
        } else {
            t * (self.entries.len() - 1) as f32
        }
    }

    pub fn classify(&self, v: f32) -> Rgba {
        let x = self.entry_coord(v);
        let i = (x.floor() as usize).min(self.entries.len() - 2);
        let f = x - i as f32;
        let a = self.entries[i];
        let b = self.entries[i + 1];
        let mut out = [0.0; 4];
        for k in 0..4 {
            out[k] = a[k] + f * (b[k] - a[k]);
        }
        out[3] = self.effective_alpha(out[3]);
        out
    }

    /// Largest effective alpha over scalar values in `[lo, hi]`. The maximum
    /// of a piecewise-linear function sits at an interval end or a knot.
    pub fn max_alpha_in(&self, lo: f32, hi: f32) -> f32 {
        if !(lo <= hi) {
            return 0.0;
        }
        let x0 = self.entry_coord(lo);
        let x1 = self.entry_coord(hi);
        let mut best = self.classify(lo)[3].max(self.classify(hi)[3]);
        let first = x0.ceil() as usize;
        let last = x1.floor() as usize;
        for k in first..=last.min(self.entries.len() - 1) {
            best = best.max(self.effective_alpha(self.entries[k][3]));
        }
        best
    }
}

/// Free-function form of [`TransferFunction::classify`].
pub fn classify(tf: &TransferFunction, v: f32) -> Rgba {
    tf.classify(v)
}
