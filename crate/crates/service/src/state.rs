//! Viewer state and partial updates.

use exabrick::camera::{look_at, perspective, CameraError};
use exabrick::{Channel, Mat4, RenderSettings, Scene, TransferFunction, Vec3};
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};
use thiserror::Error;

/// Largest accepted viewport edge.
pub const MAX_VIEWPORT: u32 = 8192;

/// One viewport. Matrices are row-major, as in camera files.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChannelState {
    pub view: [f64; 16],
    pub proj: [f64; 16],
    pub width: u32,
    pub height: u32,
}

impl ChannelState {
    pub fn from_matrices(view: &Mat4, proj: &Mat4, width: u32, height: u32) -> Self {
        Self {
            view: view.to_row_major(),
            proj: proj.to_row_major(),
            width,
            height,
        }
    }

    pub fn to_channel(&self) -> Channel {
        Channel::new(
            Mat4::from_row_major(self.view),
            Mat4::from_row_major(self.proj),
            self.width,
            self.height,
        )
    }
}

/// Everything a frame depends on, stamped with the generation that produced it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ViewerState {
    pub channels: Vec<ChannelState>,
    pub tf: TransferFunction,
    pub settings: RenderSettings,
    pub generation: u64,
}

#[derive(Debug, Error, PartialEq)]
pub enum UpdateError {
    /// Not an update document at all: bad JSON, wrong types, unknown keys.
    #[error("malformed update: {0}")]
    Malformed(String),
    /// Well-formed but unusable values.
    #[error("invalid update: {0}")]
    Invalid(String),
}

/// Body of `POST /state`. Every key is optional; `settings` is merged field
/// by field, `channels` and `tf` are replaced whole.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct StateUpdate {
    channels: Option<Vec<ChannelState>>,
    tf: Option<TfBody>,
    settings: Option<Map<String, Value>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct TfBody {
    domain: (f32, f32),
    opacity_scale: f32,
    entries: Vec<[f32; 4]>,
}

impl ViewerState {
    /// Mono 512x512 view of the whole dataset from a diagonal, grey ramp over
    /// the value range.
    pub fn initial(scene: &Scene) -> Self {
        let b = scene.field.world_bounds();
        let center = b.center();
        let extent = Vec3::new(b.extent(0), b.extent(1), b.extent(2));
        let eye = center + Vec3::new(0.9, 0.6, 1.5) * extent.norm();
        let view = look_at(eye, center, Vec3::y()).expect("eye differs from center");
        let far = 4.0 * extent.norm() + 1.0;
        let proj = perspective(40.0, 1.0, far * 1e-4, far).expect("valid projection");
        let (lo, hi) = scene.field.value_range();
        let hi = if hi > lo { hi } else { lo + 1.0 };
        Self {
            channels: vec![ChannelState::from_matrices(&view, &proj, 512, 512)],
            tf: TransferFunction::ramp((lo, hi)).with_opacity_scale(0.2).expect("valid scale"),
            settings: RenderSettings::default(),
            generation: 0,
        }
    }

    pub fn render_channels(&self) -> Vec<Channel> {
        self.channels.iter().map(ChannelState::to_channel).collect()
    }

    /// Checks everything a render relies on.
    pub fn validate(&self) -> Result<(), UpdateError> {
        if !(1..=2).contains(&self.channels.len()) {
            return Err(UpdateError::Invalid(format!(
                "expected 1 or 2 channels, got {}",
                self.channels.len()
            )));
        }
        for (k, ch) in self.channels.iter().enumerate() {
            if ch.width == 0 || ch.height == 0 || ch.width > MAX_VIEWPORT || ch.height > MAX_VIEWPORT {
                return Err(UpdateError::Invalid(format!(
                    "channel {k}: size {}x{} outside 1..={MAX_VIEWPORT}",
                    ch.width, ch.height
                )));
            }
            ch.to_channel()
                .ray_generator()
                .map_err(|e: CameraError| UpdateError::Invalid(format!("channel {k}: {e}")))?;
        }
        self.settings
            .validate()
            .map_err(|e| UpdateError::Invalid(e.to_string()))
    }

    /// State after applying the JSON update `body`, one generation later.
    pub fn apply(&self, body: &[u8]) -> Result<ViewerState, UpdateError> {
        let update: StateUpdate =
            serde_json::from_slice(body).map_err(|e| UpdateError::Malformed(e.to_string()))?;
        let mut next = self.clone();
        if let Some(channels) = update.channels {
            next.channels = channels;
        }
        if let Some(tf) = update.tf {
            next.tf = TransferFunction::new(tf.entries, tf.domain, tf.opacity_scale)
                .map_err(|e| UpdateError::Invalid(e.to_string()))?;
        }
        if let Some(patch) = update.settings {
            next.settings = merge_settings(&self.settings, patch)?;
        }
        next.validate()?;
        next.generation = self.generation + 1;
        Ok(next)
    }
}

fn merge_settings(current: &RenderSettings, patch: Map<String, Value>) -> Result<RenderSettings, UpdateError> {
    let Value::Object(mut merged) = serde_json::to_value(current).expect("settings serialize") else {
        unreachable!("settings serialize to an object")
    };
    for (key, value) in patch {
        match merged.get_mut(&key) {
            Some(slot) => *slot = value,
            None => return Err(UpdateError::Malformed(format!("unknown settings field `{key}`"))),
        }
    }
    serde_json::from_value(Value::Object(merged)).map_err(|e| UpdateError::Malformed(e.to_string()))
}
