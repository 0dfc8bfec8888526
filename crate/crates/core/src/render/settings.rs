use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::tf::Rgba;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SettingsError {
    #[error("dt {0} outside (0, 100]")]
    BadStep(f64),
    #[error("slice normal must be unit length (|n| = {0})")]
    SliceNormal(f64),
    #[error("early-termination alpha {0} outside (0, 1]")]
    BadTermination(f32),
    #[error("background component {0} outside [0, 1]")]
    BadBackground(f32),
}

/// Plane `normal . p = offset`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SlicePlane {
    pub normal: [f64; 3],
    pub offset: f64,
}

impl Default for SlicePlane {
    fn default() -> Self {
        Self {
            normal: [0.0, 0.0, 1.0],
            offset: 0.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RenderSettings {
    /// Base step scale; the world step in a region is `dt * 2^finest_level`.
    pub dt: f64,
    pub volume: bool,
    pub iso: bool,
    pub slice: bool,
    pub iso_value: f32,
    pub slice_plane: SlicePlane,
    pub background: Rgba,
    pub termination_alpha: f32,
    /// Skip regions whose value range maps to zero opacity.
    pub culling: bool,
}

impl Default for RenderSettings {
    fn default() -> Self {
        Self {
            dt: 1.0,
            volume: true,
            iso: false,
            slice: false,
            iso_value: 0.0,
            slice_plane: SlicePlane::default(),
            background: [0.0, 0.0, 0.0, 1.0],
            termination_alpha: 0.999,
            culling: true,
        }
    }
}

impl RenderSettings {
    pub fn validate(&self) -> Result<(), SettingsError> {
        if !(self.dt > 0.0 && self.dt <= 100.0) {
            return Err(SettingsError::BadStep(self.dt));
        }
        let n = self.slice_plane.normal;
        let len = (n[0] * n[0] + n[1] * n[1] + n[2] * n[2]).sqrt();
        if !((len - 1.0).abs() <= 1e-6) || !self.slice_plane.offset.is_finite() {
            return Err(SettingsError::SliceNormal(len));
        }
        if !(self.termination_alpha > 0.0 && self.termination_alpha <= 1.0) {
            return Err(SettingsError::BadTermination(self.termination_alpha));
        }
        if let Some(&c) = self.background.iter().find(|c| !(0.0..=1.0).contains(*c)) {
            return Err(SettingsError::BadBackground(c));
        }
        Ok(())
    }
}
