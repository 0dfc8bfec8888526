//! Library side of the command-line entry points.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::camera::{eye_offset_view, CameraError, Channel};
use crate::geometry::Vec3;
use crate::io::{self, BenchRow, CameraSpec, ConfigFile, IoError};
use crate::render::{FrameReport, RenderError, RenderSettings, Renderer, Scene, SlicePlane, TransferFunction};
use crate::synth::{self, SynthParams};

#[derive(Debug, Error)]
pub enum CommandError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Io(#[from] IoError),
    #[error(transparent)]
    Render(#[from] RenderError),
}

impl From<CameraError> for CommandError {
    fn from(e: CameraError) -> Self {
        CommandError::Render(RenderError::Camera(e))
    }
}

impl CommandError {
    /// 1 usage, 2 I/O, 3 render.
    pub fn exit_code(&self) -> i32 {
        match self {
            CommandError::Usage(_) => 1,
            CommandError::Io(_) => 2,
            CommandError::Render(_) => 3,
        }
    }
}

/// Per-dataset statistics, in the column order `Cells, Bricks, ABRs, Size`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DatasetInfo {
    pub cells: usize,
    pub bricks: usize,
    pub abrs: usize,
    pub size_bytes: u64,
    pub value_range: (f32, f32),
}

impl DatasetInfo {
    pub fn of(scene: &Scene, size_bytes: u64, range_override: Option<(f32, f32)>) -> Self {
        Self {
            cells: scene.field.len(),
            bricks: scene.structure.bricks.len(),
            abrs: scene.structure.abrs.len(),
            size_bytes,
            value_range: range_override.unwrap_or(scene.field.value_range()),
        }
    }

    pub fn table(&self) -> String {
        let row = [
            self.cells.to_string(),
            self.bricks.to_string(),
            self.abrs.to_string(),
            human_size(self.size_bytes),
            format!("[{}, {}]", self.value_range.0, self.value_range.1),
        ];
        let header = ["Cells", "Bricks", "ABRs", "Size", "Range"];
        let widths: Vec<usize> = header.iter().zip(&row).map(|(h, r)| h.len().max(r.len())).collect();
        let line = |cols: &[&str]| {
            cols.iter()
                .zip(&widths)
                .map(|(c, w)| format!("{c:<w$}"))
                .collect::<Vec<_>>()
                .join("  ")
                .trim_end()
                .to_string()
        };
        let row_refs: Vec<&str> = row.iter().map(String::as_str).collect();
        format!("{}\n{}\n", line(&header), line(&row_refs))
    }
}

impl fmt::Display for DatasetInfo {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.table())
    }
}

fn human_size(bytes: u64) -> String {
    const UNITS: [&str; 5] = ["B", "KiB", "MiB", "GiB", "TiB"];
    let mut v = bytes as f64;
    let mut unit = 0;
    while v >= 1024.0 && unit + 1 < UNITS.len() {
        v /= 1024.0;
        unit += 1;
    }
    if unit == 0 {
        format!("{bytes} B")
    } else {
        format!("{v:.1} {}", UNITS[unit])
    }
}

/// A loaded dataset ready to render.
pub struct LoadedScene {
    pub scene: Scene,
    pub config: ConfigFile,
    pub size_bytes: u64,
}

impl LoadedScene {
    pub fn load(config: impl AsRef<Path>) -> Result<Self, CommandError> {
        let ds = io::load_dataset(config)?;
        Ok(Self {
            scene: Scene::new(ds.field),
            config: ds.config,
            size_bytes: ds.size_bytes,
        })
    }

    pub fn info(&self) -> DatasetInfo {
        DatasetInfo::of(&self.scene, self.size_bytes, self.config.value_range)
    }
}

pub fn info(config: impl AsRef<Path>) -> Result<DatasetInfo, CommandError> {
    Ok(LoadedScene::load(config)?.info())
}

/// `WxH`, e.g. `512x512`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ImageSize {
    pub width: u32,
    pub height: u32,
}

impl FromStr for ImageSize {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        let (w, h) = s
            .split_once(['x', 'X'])
            .ok_or_else(|| format!("size `{s}` is not WxH"))?;
        let width: u32 = w.trim().parse().map_err(|e| format!("bad width in `{s}`: {e}"))?;
        let height: u32 = h.trim().parse().map_err(|e| format!("bad height in `{s}`: {e}"))?;
        if width == 0 || height == 0 {
            return Err(format!("size `{s}` has a zero dimension"));
        }
        Ok(Self { width, height })
    }
}

/// `nx,ny,nz,offset` for the plane `n . p = offset`; the normal is rescaled to
/// unit length together with the offset.
pub fn parse_slice(s: &str) -> Result<SlicePlane, String> {
    let v: Vec<f64> = s
        .split(',')
        .map(|t| t.trim().parse::<f64>())
        .collect::<Result<_, _>>()
        .map_err(|e| format!("bad slice `{s}`: {e}"))?;
    let [nx, ny, nz, d] = v[..] else {
        return Err(format!("slice `{s}` must be nx,ny,nz,offset"));
    };
    let len = (nx * nx + ny * ny + nz * nz).sqrt();
    if !(len > 0.0 && len.is_finite() && d.is_finite()) {
        return Err(format!("slice `{s}` has a degenerate normal"));
    }
    Ok(SlicePlane {
        normal: [nx / len, ny / len, nz / len],
        offset: d / len,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct RenderOptions {
    pub size: ImageSize,
    pub dt: f64,
    /// Eye separation; renders a left and a right channel when set.
    pub stereo: Option<f64>,
    pub iso: Option<f32>,
    pub slice: Option<SlicePlane>,
}

impl Default for RenderOptions {
    fn default() -> Self {
        Self {
            size: ImageSize {
                width: 512,
                height: 512,
            },
            dt: 1.0,
            stereo: None,
            iso: None,
            slice: None,
        }
    }
}

impl RenderOptions {
    pub fn settings(&self) -> RenderSettings {
        RenderSettings {
            dt: self.dt,
            iso: self.iso.is_some(),
            iso_value: self.iso.unwrap_or(0.0),
            slice: self.slice.is_some(),
            slice_plane: self.slice.unwrap_or_default(),
            ..RenderSettings::default()
        }
    }
}

/// One channel, or a left/right pair offset along the camera's right axis.
pub fn build_channels(camera: &CameraSpec, size: ImageSize, stereo: Option<f64>) -> Result<Vec<Channel>, CommandError> {
    let aspect = size.width as f64 / size.height as f64;
    let (view, proj) = camera.matrices(aspect)?;
    let channels = match stereo {
        None => vec![Channel::new(view, proj, size.width, size.height)],
        Some(sep) => {
            // first row of the view rotation is the camera's right axis in world space
            let right = Vec3::new(view.0[(0, 0)], view.0[(0, 1)], view.0[(0, 2)]).normalize();
            [-0.5 * sep, 0.5 * sep]
                .into_iter()
                .map(|s| Channel::new(eye_offset_view(&view, right * s), proj, size.width, size.height))
                .collect()
        }
    };
    for ch in &channels {
        ch.ray_generator()?;
    }
    Ok(channels)
}

/// Places channel images next to each other, left to right.
pub fn side_by_side(channels: &[Channel]) -> (u32, u32, Vec<u8>) {
    let height = channels.iter().map(|c| c.height).max().unwrap_or(0);
    let width: u32 = channels.iter().map(|c| c.width).sum();
    let mut out = vec![0u8; 4 * width as usize * height as usize];
    let mut x0 = 0usize;
    for ch in channels {
        let cw = ch.width as usize;
        for row in 0..ch.height as usize {
            let dst = 4 * (row * width as usize + x0);
            out[dst..dst + 4 * cw].copy_from_slice(&ch.framebuffer[4 * row * cw..4 * (row + 1) * cw]);
        }
        x0 += cw;
    }
    (width, height, out)
}

#[derive(Clone, Debug)]
pub struct RenderOutcome {
    pub channels: Vec<Channel>,
    pub report: FrameReport,
}

/// Renders `scene` for an already-built set of channels.
pub fn render_channels(
    scene: &Scene,
    mut channels: Vec<Channel>,
    tf: &TransferFunction,
    settings: &RenderSettings,
    renderer: &Renderer,
) -> Result<RenderOutcome, CommandError> {
    let report = renderer.render_frame(&mut channels, scene, tf, settings)?;
    Ok(RenderOutcome { channels, report })
}

/// `render`: loads inputs, renders one frame and writes the image.
pub fn render(
    config: impl AsRef<Path>,
    camera: impl AsRef<Path>,
    tf: impl AsRef<Path>,
    opts: &RenderOptions,
    output: impl AsRef<Path>,
) -> Result<RenderOutcome, CommandError> {
    let loaded = LoadedScene::load(config)?;
    let camera = io::load_camera(camera)?;
    let tf = io::load_transfer_function(tf)?;
    let settings = opts.settings();
    settings.validate().map_err(RenderError::from)?;
    let channels = build_channels(&camera, opts.size, opts.stereo)?;
    let outcome = render_channels(&loaded.scene, channels, &tf, &settings, &Renderer::default())?;
    let (w, h, rgba) = side_by_side(&outcome.channels);
    io::write_image(output, w, h, &rgba)?;
    Ok(outcome)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Spacing {
    Linear,
    Log,
}

impl FromStr for Spacing {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "linear" | "lin" => Ok(Spacing::Linear),
            "log" => Ok(Spacing::Log),
            _ => Err(format!("unknown spacing `{s}` (linear|log)")),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BenchPlan {
    pub dt_min: f64,
    pub dt_max: f64,
    pub samples: usize,
    pub spacing: Spacing,
    pub repetitions: usize,
    pub warmup: usize,
}

impl Default for BenchPlan {
    fn default() -> Self {
        Self {
            dt_min: 0.1,
            dt_max: 5.0,
            samples: 50,
            spacing: Spacing::Linear,
            repetitions: 5,
            warmup: 1,
        }
    }
}

impl BenchPlan {
    pub fn validate(&self) -> Result<(), CommandError> {
        if !(self.dt_min > 0.0 && self.dt_max >= self.dt_min && self.dt_max <= 100.0) {
            return Err(CommandError::Usage(format!(
                "need 0 < dt_min <= dt_max <= 100, got {} and {}",
                self.dt_min, self.dt_max
            )));
        }
        if self.samples < 2 {
            return Err(CommandError::Usage(format!("need at least 2 samples, got {}", self.samples)));
        }
        if self.repetitions == 0 {
            return Err(CommandError::Usage("need at least 1 repetition".into()));
        }
        Ok(())
    }

    /// Ascending dt values, endpoints included.
    pub fn dts(&self) -> Vec<f64> {
        let n = self.samples;
        (0..n)
            .map(|i| {
                let f = i as f64 / (n - 1) as f64;
                if i == n - 1 {
                    return self.dt_max;
                }
                let dt = match self.spacing {
                    Spacing::Linear => self.dt_min + f * (self.dt_max - self.dt_min),
                    Spacing::Log => (self.dt_min.ln() + f * (self.dt_max.ln() - self.dt_min.ln())).exp(),
                };
                // 12 significant digits keeps 2.0 from printing as 1.9999999999999998
                format!("{dt:.11e}").parse().unwrap_or(dt)
            })
            .collect()
    }
}

pub fn median(values: &mut [f64]) -> f64 {
    values.sort_by(f64::total_cmp);
    let n = values.len();
    if n % 2 == 1 {
        values[n / 2]
    } else {
        0.5 * (values[n / 2 - 1] + values[n / 2])
    }
}

/// Median frame time per dt. Each frame's time is its slowest channel's.
pub fn bench_scene(
    scene: &Scene,
    channels: &[Channel],
    tf: &TransferFunction,
    base: &RenderSettings,
    plan: &BenchPlan,
    renderer: &Renderer,
) -> Result<Vec<BenchRow>, CommandError> {
    plan.validate()?;
    let mut rows = Vec::new();
    for dt in plan.dts() {
        let settings = RenderSettings { dt, ..base.clone() };
        let mut chans = channels.to_vec();
        for _ in 0..plan.warmup {
            renderer.render_frame(&mut chans, scene, tf, &settings)?;
        }
        let mut times: Vec<f64> = (0..plan.repetitions)
            .map(|_| renderer.render_frame(&mut chans, scene, tf, &settings).map(|r| r.frame_time_ms))
            .collect::<Result<_, _>>()?;
        rows.push(BenchRow {
            dt,
            frame_time_ms: median(&mut times),
        });
    }
    rows.sort_by(|a, b| a.dt.total_cmp(&b.dt));
    Ok(rows)
}

/// `bench`: dt sweep written as CSV.
pub fn bench(
    config: impl AsRef<Path>,
    camera: impl AsRef<Path>,
    tf: impl AsRef<Path>,
    plan: &BenchPlan,
    opts: &RenderOptions,
    output: impl AsRef<Path>,
) -> Result<Vec<BenchRow>, CommandError> {
    plan.validate()?;
    let loaded = LoadedScene::load(config)?;
    let camera = io::load_camera(camera)?;
    let tf = io::load_transfer_function(tf)?;
    let channels = build_channels(&camera, opts.size, opts.stereo)?;
    let rows = bench_scene(&loaded.scene, &channels, &tf, &opts.settings(), plan, &Renderer::default())?;
    let out = output.as_ref();
    fs::write(out, io::bench_csv(&rows)).map_err(|source| IoError::Io {
        path: out.to_path_buf(),
        source,
    })?;
    Ok(rows)
}

/// `synth`: writes `<stem>.cells`, `<stem>.scalars` and the config `output`.
pub fn synth(params: &SynthParams, output: impl AsRef<Path>) -> Result<DatasetInfo, CommandError> {
    if params.levels < 1 {
        return Err(CommandError::Usage("--levels must be at least 1".into()));
    }
    let output = output.as_ref();
    let field = synth::generate(params);
    let stem = output
        .file_stem()
        .ok_or_else(|| CommandError::Usage(format!("bad output path {}", output.display())))?
        .to_string_lossy()
        .into_owned();
    let dir = output.parent().map(Path::to_path_buf).unwrap_or_default();
    let cells_name = PathBuf::from(format!("{stem}.cells"));
    let scalars_name = PathBuf::from(format!("{stem}.scalars"));
    io::save_cells(dir.join(&cells_name), field.cells())?;
    io::save_scalars(dir.join(&scalars_name), field.scalars())?;
    io::save_config(
        output,
        &ConfigFile {
            cells_path: cells_name,
            scalars_path: scalars_name,
            value_range: None,
        },
    )?;
    let size = (field.len() * (io::CELL_RECORD_BYTES + io::SCALAR_BYTES)) as u64;
    Ok(DatasetInfo::of(&Scene::new(field), size, None))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn size_and_slice_parsing() {
        assert_eq!(
            "640x480".parse::<ImageSize>().unwrap(),
            ImageSize {
                width: 640,
                height: 480
            }
        );
        assert!("640".parse::<ImageSize>().is_err());
        assert!("0x4".parse::<ImageSize>().is_err());
        let p = parse_slice("0,0,2,8").unwrap();
        assert_eq!(p.normal, [0.0, 0.0, 1.0]);
        assert_eq!(p.offset, 4.0);
        assert!(parse_slice("0,0,0,1").is_err());
        assert!(parse_slice("1,2").is_err());
    }

    #[test]
    fn plan_values() {
        let plan = BenchPlan {
            dt_min: 1.0,
            dt_max: 2.0,
            samples: 2,
            ..Default::default()
        };
        assert_eq!(plan.dts(), vec![1.0, 2.0]);
        let log = BenchPlan {
            dt_min: 0.25,
            dt_max: 4.0,
            samples: 5,
            spacing: Spacing::Log,
            ..Default::default()
        };
        let d = log.dts();
        for (got, want) in d.iter().zip([0.25, 0.5, 1.0, 2.0, 4.0]) {
            assert!((got - want).abs() < 1e-12);
        }
        let bad = BenchPlan {
            samples: 1,
            ..Default::default()
        };
        assert_eq!(bad.validate().unwrap_err().exit_code(), 1);
    }

    #[test]
    fn median_is_robust() {
        assert_eq!(median(&mut [5.0, 1.0, 100.0]), 5.0);
        assert_eq!(median(&mut [4.0, 1.0, 3.0, 2.0]), 2.5);
    }

    #[test]
    fn table_header_order() {
        let info = DatasetInfo {
            cells: 1,
            bricks: 1,
            abrs: 1,
            size_bytes: 20,
            value_range: (5.0, 5.0),
        };
        let t = info.table();
        let header: Vec<&str> = t.lines().next().unwrap().split_whitespace().collect();
        assert_eq!(header, ["Cells", "Bricks", "ABRs", "Size", "Range"]);
        assert!(t.lines().nth(1).unwrap().starts_with("1 "));
        assert_eq!(human_size(3 * 1024 * 1024), "3.0 MiB");
    }
}
