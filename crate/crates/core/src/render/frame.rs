use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::camera::{CameraError, Channel, RayGenerator};

use super::march::march;
use super::settings::{RenderSettings, SettingsError};
use super::tf::TransferFunction;
use super::{active_mask, Scene};

/// Edge length of the square pixel tiles handed to workers.
pub const TILE_SIZE: u32 = 32;

#[derive(Debug, Error)]
pub enum RenderError {
    #[error("channel {0} has zero size")]
    ZeroSized(usize),
    #[error(transparent)]
    Camera(#[from] CameraError),
    #[error(transparent)]
    Settings(#[from] SettingsError),
    #[error("failed to build worker pool: {0}")]
    Pool(String),
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct FrameStats {
    pub frame_time_ms: f64,
    pub rays: u64,
    pub samples: u64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct FrameReport {
    pub channels: Vec<FrameStats>,
    /// Slowest channel's time; a multi-view frame is as slow as its worst view.
    pub frame_time_ms: f64,
}

/// Tiled parallel renderer. Output does not depend on the worker count.
pub struct Renderer {
    pool: Option<rayon::ThreadPool>,
}

impl Default for Renderer {
    fn default() -> Self {
        Self { pool: None }
    }
}

impl Renderer {
    /// `None` uses rayon's global pool.
    pub fn new(threads: Option<usize>) -> Result<Self, RenderError> {
        let pool = threads
            .map(|n| {
                rayon::ThreadPoolBuilder::new()
                    .num_threads(n)
                    .build()
                    .map_err(|e| RenderError::Pool(e.to_string()))
            })
            .transpose()?;
        Ok(Self { pool })
    }

    pub fn render_frame(
        &self,
        channels: &mut [Channel],
        scene: &Scene,
        tf: &TransferFunction,
        settings: &RenderSettings,
    ) -> Result<FrameReport, RenderError> {
        match &self.pool {
            Some(pool) => pool.install(|| render_frame(channels, scene, tf, settings)),
            None => render_frame(channels, scene, tf, settings),
        }
    }
}

struct TileOutput {
    x0: u32,
    y0: u32,
    w: u32,
    h: u32,
    rgba: Vec<u8>,
    depth: Vec<f32>,
    samples: u64,
}

/// Renders every channel on the current rayon pool, writing RGBA and depth.
pub fn render_frame(
    channels: &mut [Channel],
    scene: &Scene,
    tf: &TransferFunction,
    settings: &RenderSettings,
) -> Result<FrameReport, RenderError> {
    settings.validate()?;
    for (k, ch) in channels.iter().enumerate() {
        if ch.width == 0 || ch.height == 0 {
            return Err(RenderError::ZeroSized(k));
        }
    }
    let generators = channels
        .iter()
        .map(Channel::ray_generator)
        .collect::<Result<Vec<_>, _>>()?;
    let mask = active_mask(scene, tf, settings);

    let mut report = FrameReport::default();
    for (ch, gen) in channels.iter_mut().zip(&generators) {
        let start = Instant::now();
        let samples = render_channel(ch, gen, scene, tf, settings, &mask);
        let stats = FrameStats {
            frame_time_ms: start.elapsed().as_secs_f64() * 1e3,
            rays: ch.width as u64 * ch.height as u64,
            samples,
        };
        report.frame_time_ms = report.frame_time_ms.max(stats.frame_time_ms);
        report.channels.push(stats);
    }
    Ok(report)
}

fn render_channel(
    ch: &mut Channel,
    gen: &RayGenerator,
    scene: &Scene,
    tf: &TransferFunction,
    settings: &RenderSettings,
    mask: &[bool],
) -> u64 {
    let (width, height) = (ch.width, ch.height);
    let tiles: Vec<(u32, u32)> = (0..height.div_ceil(TILE_SIZE))
        .flat_map(|ty| (0..width.div_ceil(TILE_SIZE)).map(move |tx| (tx * TILE_SIZE, ty * TILE_SIZE)))
        .collect();

    // (x0, y0) are image-space: x to the right, y down from the top row
    let outputs: Vec<TileOutput> = tiles
        .par_iter()
        .map(|&(x0, y0)| {
            let w = TILE_SIZE.min(width - x0);
            let h = TILE_SIZE.min(height - y0);
            let mut rgba = Vec::with_capacity((4 * w * h) as usize);
            let mut depth = Vec::with_capacity((w * h) as usize);
            let mut samples = 0;
            for row in y0..y0 + h {
                let j = height - 1 - row;
                for i in x0..x0 + w {
                    let ray = gen.ray_for_pixel(i, j);
                    let r = march(&ray, scene, tf, settings, mask);
                    samples += r.samples;
                    rgba.extend(r.color.map(to_u8));
                    depth.push(r.depth_t.map_or(1.0, |t| gen.depth(&ray.at(t))));
                }
            }
            TileOutput {
                x0,
                y0,
                w,
                h,
                rgba,
                depth,
                samples,
            }
        })
        .collect();

    let mut total = 0;
    for t in outputs {
        total += t.samples;
        for r in 0..t.h {
            let row = (t.y0 + r) as usize;
            let dst = row * width as usize + t.x0 as usize;
            let src = (r * t.w) as usize;
            let n = t.w as usize;
            ch.framebuffer[4 * dst..4 * (dst + n)].copy_from_slice(&t.rgba[4 * src..4 * (src + n)]);
            ch.depthbuffer[dst..dst + n].copy_from_slice(&t.depth[src..src + n]);
        }
    }
    total
}

fn to_u8(c: f32) -> u8 {
    (c.clamp(0.0, 1.0) * 255.0).round() as u8
}
