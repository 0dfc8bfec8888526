//! Classification, ray marching and frame rendering.

mod frame;
mod march;
mod settings;
mod tf;

pub use frame::{render_frame, FrameReport, FrameStats, RenderError, Renderer, TILE_SIZE};
pub use march::{
    corrected_alpha, iso_crossing, march, march_observed, region_step, slice_crossing, slice_sample,
    MarchResult, SampleEvent, DEPTH_ALPHA, ISO_BISECTION_STEPS,
};
pub use settings::{RenderSettings, SettingsError, SlicePlane};
pub use tf::{classify, Rgba, TfError, TransferFunction};

use crate::amr::AmrField;
use crate::structure::{active_set, Brick, BrickError, BrickStructure};

/// A field together with its brick structure.
#[derive(Clone, Debug)]
pub struct Scene {
    pub field: AmrField,
    pub structure: BrickStructure,
}

impl Scene {
    pub fn new(field: AmrField) -> Self {
        let structure = BrickStructure::build(&field);
        Self { field, structure }
    }

    /// Scene over a caller-supplied brick layout.
    pub fn from_bricks(field: AmrField, bricks: Vec<Brick>) -> Result<Self, BrickError> {
        let structure = BrickStructure::from_bricks(&field, bricks)?;
        Ok(Self { field, structure })
    }
}

/// Regions the marcher visits for this transfer function and settings.
///
/// With culling on, a region is visited when the volume is enabled and the
/// transfer function is non-zero somewhere in its range, or when iso-surfaces
/// are enabled and its range contains the iso value. Slices do not depend on
/// the mask.
pub fn active_mask(scene: &Scene, tf: &TransferFunction, settings: &RenderSettings) -> Vec<bool> {
    let abrs = &scene.structure.abrs;
    if !settings.culling {
        return vec![true; abrs.len()];
    }
    let by_tf = if settings.volume {
        active_set(abrs, tf)
    } else {
        vec![false; abrs.len()]
    };
    abrs.iter()
        .zip(by_tf)
        .map(|(a, visible)| {
            visible
                || (settings.iso
                    && a.value_range.0 <= settings.iso_value
                    && settings.iso_value <= a.value_range.1)
        })
        .collect()
}
