//! Direct volume rendering of cell-centered adaptive mesh refinement (AMR) data.
//!
//! Same-level cells are grouped into bricks. Each brick's cells carry tent
//! basis functions whose supports reach half a cell beyond the brick, so the
//! extended brick domains overlap. [`structure::BrickStructure`] decomposes
//! those overlapping domains into disjoint *active brick regions* (ABRs), which
//! a front-to-back ray marcher traverses with a per-region adaptive step size.
//!
//! The pipeline, bottom-up:
//!
//! * [`amr`]: the cell/scalar data model and a brute-force reference sampler.
//! * [`structure`]: bricks, ABRs, value ranges, culling and ray traversal.
//! * [`reconstruction`]: tent-basis weights and the fast per-ABR sampler.
//! * [`camera`]: matrices and inverse-projection ray generation (on- and off-axis).
//! * [`render`]: transfer functions, ray marching, iso-surfaces, slices, frames.
//! * [`io`]: binary cell/scalar files, config files, JSON, images, CSV.
//! * [`synth`]: deterministic synthetic AMR datasets.
//! * [`commands`]: the `info`, `render`, `bench` and `synth` entry points.

pub mod amr;
pub mod camera;
pub mod commands;
pub mod geometry;
pub mod io;
pub mod reconstruction;
pub mod render;
pub mod structure;
pub mod synth;

pub use amr::{AmrError, AmrField, Cell, ValidationReport, Violation};
pub use camera::{Channel, Mat4, Ray};
pub use geometry::{Aabb, Vec3};
pub use render::{render_frame, FrameStats, RenderSettings, Renderer, Rgba, Scene, TransferFunction};
pub use structure::{Abr, Brick, BrickError, BrickStructure};
