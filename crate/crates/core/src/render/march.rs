//! Front-to-back absorption/emission ray marching over active brick regions.

use crate::camera::Ray;
use crate::geometry::Vec3;
use crate::reconstruction::{sample_anywhere, SampleContext};

use super::settings::{RenderSettings, SlicePlane};
use super::tf::{Rgba, TransferFunction};
use super::Scene;

/// Bisection steps used to refine an iso-surface crossing.
pub const ISO_BISECTION_STEPS: usize = 8;
/// Accumulated opacity at which a pixel's depth is recorded.
pub const DEPTH_ALPHA: f64 = 0.5;
const MIN_GRADIENT: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MarchResult {
    /// Composited over the background.
    pub color: Rgba,
    /// Opacity accumulated from the volume alone, before the background.
    pub opacity: f32,
    /// Ray parameter where accumulated opacity first reached one half.
    pub depth_t: Option<f64>,
    pub samples: u64,
}

/// What the marcher did at one ray position; see [`march_observed`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum SampleEvent {
    Volume {
        abr: u32,
        t: f64,
        position: Vec3,
        /// Path length this sample stands for.
        step: f64,
    },
    Iso { t: f64 },
    Slice { t: f64 },
}

struct Compositor {
    color: [f64; 3],
    alpha: f64,
    depth_t: Option<f64>,
}

impl Compositor {
    fn add(&mut self, rgb: [f32; 3], alpha: f64, t: f64) {
        let w = (1.0 - self.alpha) * alpha;
        for k in 0..3 {
            self.color[k] += w * rgb[k] as f64;
        }
        self.alpha += w;
        if self.depth_t.is_none() && self.alpha >= DEPTH_ALPHA {
            self.depth_t = Some(t);
        }
    }

    fn finish(self, background: &Rgba, samples: u64) -> MarchResult {
        let rest = 1.0 - self.alpha;
        let bg_a = background[3] as f64;
        let mut color = [0.0f32; 4];
        for k in 0..3 {
            color[k] = (self.color[k] + rest * bg_a * background[k] as f64) as f32;
        }
        color[3] = (self.alpha + rest * bg_a) as f32;
        MarchResult {
            color,
            opacity: self.alpha as f32,
            depth_t: self.depth_t,
            samples,
        }
    }
}

/// Opacity of a sample standing for path length `step`, when `alpha` is the
/// opacity of a unit length.
pub fn corrected_alpha(alpha: f32, step: f64) -> f64 {
    1.0 - (1.0 - alpha as f64).powf(step)
}

/// World-space step inside a region whose finest level is `finest_level`.
pub fn region_step(dt: f64, finest_level: u32) -> f64 {
    dt * (1u64 << finest_level) as f64
}

/// Marches `ray` through the regions enabled in `mask`.
pub fn march(
    ray: &Ray,
    scene: &Scene,
    tf: &TransferFunction,
    settings: &RenderSettings,
    mask: &[bool],
) -> MarchResult {
    march_observed(ray, scene, tf, settings, mask, |_| {})
}

/// [`march`], reporting every sample, iso hit and slice hit to `observer`.
///
/// Inside a segment `[t_enter, t_exit)` with step `d`, samples sit at
/// `t_enter + (k + 1/2) d` for every such position below `t_exit`. Each stands
/// for the interval `[t_enter + k d, t_enter + (k + 1) d)`, except the last,
/// which extends to `t_exit`. A segment shorter than `d / 2` gets one sample at
/// its midpoint.
pub fn march_observed(
    ray: &Ray,
    scene: &Scene,
    tf: &TransferFunction,
    settings: &RenderSettings,
    mask: &[bool],
    mut observer: impl FnMut(SampleEvent),
) -> MarchResult {
    let mut comp = Compositor {
        color: [0.0; 3],
        alpha: 0.0,
        depth_t: None,
    };
    let mut samples = 0u64;
    let mut pending_slice = if settings.slice {
        slice_crossing(ray, &settings.slice_plane)
    } else {
        None
    };

    if settings.volume || settings.iso {
        let segments = scene.structure.traverse(ray, Some(mask));
        let mut prev: Option<(f64, f64)> = None;
        'segments: for seg in segments {
            let abr = &scene.structure.abrs[seg.abr as usize];
            let ctx = SampleContext::new(&scene.structure, &scene.field, seg.abr);
            let step = region_step(settings.dt, abr.finest_level);
            let len = seg.t_exit - seg.t_enter;
            let lattice = (len / step - 0.5).ceil().max(0.0) as u64;
            let count = lattice.max(1);
            for k in 0..count {
                let (t, span) = if lattice == 0 {
                    (seg.t_enter + 0.5 * len, len)
                } else {
                    let start = seg.t_enter + k as f64 * step;
                    let end = if k + 1 == count { seg.t_exit } else { start + step };
                    (seg.t_enter + (k as f64 + 0.5) * step, end - start)
                };
                let p = ray.at(t);
                let value = ctx.sample(&p);
                samples += 1;

                let iso_hit = match (settings.iso, prev, value) {
                    (true, Some((t0, f0)), Some(f1)) => {
                        iso_crossing(ray, scene, tf, settings, t0, t, f0, f1)
                    }
                    _ => None,
                };
                if let Some(ts) = pending_slice {
                    if ts <= t && iso_hit.is_none_or(|(th, _)| ts <= th) {
                        pending_slice = None;
                        if let Some(rgba) = slice_sample(&ray.at(ts), scene, tf) {
                            observer(SampleEvent::Slice { t: ts });
                            comp.add([rgba[0], rgba[1], rgba[2]], 1.0, ts);
                            break 'segments;
                        }
                    }
                }
                if let Some((th, rgba)) = iso_hit {
                    observer(SampleEvent::Iso { t: th });
                    comp.add([rgba[0], rgba[1], rgba[2]], 1.0, th);
                    break 'segments;
                }

                observer(SampleEvent::Volume {
                    abr: seg.abr,
                    t,
                    position: p,
                    step: span,
                });
                if let (true, Some(f)) = (settings.volume, value) {
                    let c = tf.classify(f as f32);
                    let a = corrected_alpha(c[3], span);
                    if a > 0.0 {
                        comp.add([c[0], c[1], c[2]], a, t);
                    }
                    if comp.alpha >= settings.termination_alpha as f64 {
                        break 'segments;
                    }
                }
                prev = value.map(|f| (t, f));
            }
        }
    }

    if let Some(ts) = pending_slice {
        if comp.alpha < settings.termination_alpha as f64 {
            if let Some(rgba) = slice_sample(&ray.at(ts), scene, tf) {
                observer(SampleEvent::Slice { t: ts });
                comp.add([rgba[0], rgba[1], rgba[2]], 1.0, ts);
            }
        }
    }

    comp.finish(&settings.background, samples)
}

/// Ray parameter where `ray` crosses `plane`, if within `[t_min, t_max]`.
pub fn slice_crossing(ray: &Ray, plane: &SlicePlane) -> Option<f64> {
    let n = Vec3::from(plane.normal);
    let denom = n.dot(&ray.direction);
    if denom == 0.0 {
        return None;
    }
    let t = (plane.offset - n.dot(&ray.origin)) / denom;
    (t >= ray.t_min && t <= ray.t_max).then_some(t)
}

/// Opaque slice color at `p`: the transfer function color of the
/// reconstructed value at full alpha. `None` outside every region.
pub fn slice_sample(p: &Vec3, scene: &Scene, tf: &TransferFunction) -> Option<Rgba> {
    let v = sample_anywhere(&scene.structure, &scene.field, p)?;
    let mut c = tf.classify(v as f32);
    c[3] = 1.0;
    Some(c)
}

/// Refines an iso-surface crossing between two consecutive samples and
/// shades it with a headlight.
///
/// Returns `None` when the values do not bracket the iso value. Equal
/// endpoint values at the iso value resolve to `t0`.
#[allow(clippy::too_many_arguments)]
pub fn iso_crossing(
    ray: &Ray,
    scene: &Scene,
    tf: &TransferFunction,
    settings: &RenderSettings,
    t0: f64,
    t1: f64,
    f0: f64,
    f1: f64,
) -> Option<(f64, Rgba)> {
    let iso = settings.iso_value as f64;
    if (f0 - iso) * (f1 - iso) > 0.0 {
        return None;
    }
    let t_hit = if f0 == iso {
        t0
    } else if f1 == iso {
        t1
    } else {
        let (mut a, mut b, mut fa, mut fb) = (t0, t1, f0, f1);
        for _ in 0..ISO_BISECTION_STEPS {
            let m = 0.5 * (a + b);
            let Some(fm) = sample_anywhere(&scene.structure, &scene.field, &ray.at(m)) else {
                break;
            };
            if (fa - iso) * (fm - iso) <= 0.0 {
                b = m;
                fb = fm;
            } else {
                a = m;
                fa = fm;
            }
        }
        if fb != fa {
            a + (iso - fa) / (fb - fa) * (b - a)
        } else {
            0.5 * (a + b)
        }
    };

    let p = ray.at(t_hit);
    let base = tf.classify(settings.iso_value);
    let shade = gradient(scene, &p)
        .filter(|g| g.norm() >= MIN_GRADIENT)
        .map(|g| g.normalize().dot(&ray.direction).abs() as f32)
        .unwrap_or(1.0);
    Some((t_hit, [base[0] * shade, base[1] * shade, base[2] * shade, 1.0]))
}

/// Central-difference gradient with a step of a quarter of the finest cell
/// width of the region containing `p`.
fn gradient(scene: &Scene, p: &Vec3) -> Option<Vec3> {
    let abr = scene.structure.locate(p)?;
    let h = 0.25 * (1u64 << scene.structure.abrs[abr as usize].finest_level) as f64;
    let mut g = Vec3::zeros();
    for d in 0..3 {
        let mut e = Vec3::zeros();
        e[d] = h;
        let plus = sample_anywhere(&scene.structure, &scene.field, &(p + e))?;
        let minus = sample_anywhere(&scene.structure, &scene.field, &(p - e))?;
        g[d] = (plus - minus) / (2.0 * h);
    }
    Some(g)
}
