//! File formats.
//!
//! * cells: records of four little-endian `i32` values `(x, y, z, level)`.
//! * scalars: one little-endian `f32` per cell, in cell order.
//! * config: text lines `cells <path>`, `scalars <path>`, `range <lo> <hi>`;
//!   `#` starts a comment. Relative paths resolve against the config's directory.
//! * transfer function and camera: JSON.
//! * images: binary PPM (`P6`), or PNG when the path ends in `.png`.
//! * benchmark results: CSV with columns `dt,frame_time_ms,fps`.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::amr::{AmrError, AmrField, Cell};
use crate::camera::{look_at, perspective, CameraError, Mat4};
use crate::geometry::Vec3;
use crate::render::TransferFunction;

pub const CELL_RECORD_BYTES: usize = 16;
pub const SCALAR_BYTES: usize = 4;

#[derive(Debug, Error)]
pub enum IoError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {message}")]
    Format { path: PathBuf, message: String },
    #[error("{path}: empty field")]
    EmptyField { path: PathBuf },
    #[error("{path}:{line}:{column}: {message}")]
    Json {
        path: PathBuf,
        line: usize,
        column: usize,
        message: String,
    },
    #[error("{path}: {source}")]
    Field {
        path: PathBuf,
        #[source]
        source: AmrError,
    },
    #[error(transparent)]
    Camera(#[from] CameraError),
    #[error("{path}: {message}")]
    Image { path: PathBuf, message: String },
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> IoError + '_ {
    move |source| IoError::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn format_err(path: &Path, message: impl Into<String>) -> IoError {
    IoError::Format {
        path: path.to_path_buf(),
        message: message.into(),
    }
}

fn read(path: &Path) -> Result<Vec<u8>, IoError> {
    fs::read(path).map_err(io_err(path))
}

fn write(path: &Path, bytes: &[u8]) -> Result<(), IoError> {
    fs::write(path, bytes).map_err(io_err(path))
}

pub fn encode_cells(cells: &[Cell]) -> Vec<u8> {
    let mut out = Vec::with_capacity(cells.len() * CELL_RECORD_BYTES);
    for c in cells {
        for v in [c.pos[0], c.pos[1], c.pos[2], c.level as i32] {
            out.extend_from_slice(&v.to_le_bytes());
        }
    }
    out
}

pub fn decode_cells(bytes: &[u8], path: &Path) -> Result<Vec<Cell>, IoError> {
    if bytes.is_empty() {
        return Err(IoError::EmptyField {
            path: path.to_path_buf(),
        });
    }
    if bytes.len() % CELL_RECORD_BYTES != 0 {
        return Err(format_err(
            path,
            format!(
                "size {} is not a multiple of {CELL_RECORD_BYTES} bytes (truncated cell record)",
                bytes.len()
            ),
        ));
    }
    bytes
        .chunks_exact(CELL_RECORD_BYTES)
        .enumerate()
        .map(|(i, rec)| {
            let v: Vec<i32> = rec
                .chunks_exact(4)
                .map(|b| i32::from_le_bytes([b[0], b[1], b[2], b[3]]))
                .collect();
            if v[3] < 0 {
                return Err(format_err(path, format!("cell {i} has negative level {}", v[3])));
            }
            Ok(Cell::new([v[0], v[1], v[2]], v[3] as u32))
        })
        .collect()
}

pub fn load_cells(path: impl AsRef<Path>) -> Result<Vec<Cell>, IoError> {
    let path = path.as_ref();
    decode_cells(&read(path)?, path)
}

pub fn save_cells(path: impl AsRef<Path>, cells: &[Cell]) -> Result<(), IoError> {
    write(path.as_ref(), &encode_cells(cells))
}

pub fn encode_scalars(scalars: &[f32]) -> Vec<u8> {
    scalars.iter().flat_map(|v| v.to_le_bytes()).collect()
}

pub fn decode_scalars(bytes: &[u8], expected: usize, path: &Path) -> Result<Vec<f32>, IoError> {
    if bytes.len() % SCALAR_BYTES != 0 {
        return Err(format_err(
            path,
            format!("size {} is not a multiple of {SCALAR_BYTES} bytes (truncated scalar)", bytes.len()),
        ));
    }
    let n = bytes.len() / SCALAR_BYTES;
    if n != expected {
        return Err(format_err(path, format!("{n} scalars for {expected} cells")));
    }
    Ok(bytes
        .chunks_exact(SCALAR_BYTES)
        .map(|b| f32::from_le_bytes([b[0], b[1], b[2], b[3]]))
        .collect())
}

/// Loads `expected` scalars; any other count is a format error.
pub fn load_scalars(path: impl AsRef<Path>, expected: usize) -> Result<Vec<f32>, IoError> {
    let path = path.as_ref();
    decode_scalars(&read(path)?, expected, path)
}

pub fn save_scalars(path: impl AsRef<Path>, scalars: &[f32]) -> Result<(), IoError> {
    write(path.as_ref(), &encode_scalars(scalars))
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConfigFile {
    pub cells_path: PathBuf,
    pub scalars_path: PathBuf,
    pub value_range: Option<(f32, f32)>,
}

impl ConfigFile {
    pub fn to_text(&self) -> String {
        let mut s = format!(
            "cells {}\nscalars {}\n",
            self.cells_path.display(),
            self.scalars_path.display()
        );
        if let Some((lo, hi)) = self.value_range {
            s.push_str(&format!("range {lo:?} {hi:?}\n"));
        }
        s
    }
}

/// Parses config text. Relative paths are joined onto `base_dir`.
pub fn parse_config(text: &str, base_dir: &Path, path: &Path) -> Result<ConfigFile, IoError> {
    let mut cells = None;
    let mut scalars = None;
    let mut range = None;
    for (n, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let lineno = n + 1;
        let (key, rest) = line
            .split_once(char::is_whitespace)
            .map(|(k, r)| (k, r.trim()))
            .unwrap_or((line, ""));
        match key {
            "cells" | "scalars" => {
                if rest.is_empty() {
                    return Err(format_err(path, format!("line {lineno}: `{key}` needs a path")));
                }
                let p = base_dir.join(rest);
                if key == "cells" {
                    cells = Some(p);
                } else {
                    scalars = Some(p);
                }
            }
            "range" => {
                let nums: Vec<f32> = rest
                    .split_whitespace()
                    .map(str::parse)
                    .collect::<Result<_, _>>()
                    .map_err(|e| format_err(path, format!("line {lineno}: bad range value: {e}")))?;
                match nums[..] {
                    [lo, hi] if lo < hi => range = Some((lo, hi)),
                    _ => {
                        return Err(format_err(
                            path,
                            format!("line {lineno}: `range` needs two numbers lo < hi"),
                        ))
                    }
                }
            }
            other => {
                return Err(format_err(path, format!("line {lineno}: unknown key `{other}`")));
            }
        }
    }
    Ok(ConfigFile {
        cells_path: cells.ok_or_else(|| format_err(path, "missing `cells` line"))?,
        scalars_path: scalars.ok_or_else(|| format_err(path, "missing `scalars` line"))?,
        value_range: range,
    })
}

/// Reads a config and checks that both data files exist with consistent sizes.
pub fn load_config(path: impl AsRef<Path>) -> Result<ConfigFile, IoError> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(io_err(path))?;
    let base = path.parent().unwrap_or(Path::new(""));
    let cfg = parse_config(&text, base, path)?;
    let cells_len = fs::metadata(&cfg.cells_path).map_err(io_err(&cfg.cells_path))?.len();
    let scalars_len = fs::metadata(&cfg.scalars_path).map_err(io_err(&cfg.scalars_path))?.len();
    if cells_len / CELL_RECORD_BYTES as u64 != scalars_len / SCALAR_BYTES as u64 {
        return Err(format_err(
            path,
            format!(
                "{} cells but {} scalars",
                cells_len / CELL_RECORD_BYTES as u64,
                scalars_len / SCALAR_BYTES as u64
            ),
        ));
    }
    Ok(cfg)
}

pub fn save_config(path: impl AsRef<Path>, cfg: &ConfigFile) -> Result<(), IoError> {
    write(path.as_ref(), cfg.to_text().as_bytes())
}

/// Loaded dataset plus its size on disk.
#[derive(Clone, Debug)]
pub struct Dataset {
    pub config: ConfigFile,
    pub field: AmrField,
    pub size_bytes: u64,
}

pub fn load_dataset(config_path: impl AsRef<Path>) -> Result<Dataset, IoError> {
    let config = load_config(config_path)?;
    let cells = load_cells(&config.cells_path)?;
    let scalars = load_scalars(&config.scalars_path, cells.len())?;
    let size_bytes = (cells.len() * (CELL_RECORD_BYTES + SCALAR_BYTES)) as u64;
    let field = AmrField::new(cells, scalars).map_err(|source| IoError::Field {
        path: config.cells_path.clone(),
        source,
    })?;
    Ok(Dataset {
        config,
        field,
        size_bytes,
    })
}

fn json_err(path: &Path, e: serde_json::Error) -> IoError {
    IoError::Json {
        path: path.to_path_buf(),
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    }
}

pub fn load_json<T: for<'de> Deserialize<'de>>(path: impl AsRef<Path>) -> Result<T, IoError> {
    let path = path.as_ref();
    serde_json::from_slice(&read(path)?).map_err(|e| json_err(path, e))
}

pub fn save_json<T: Serialize>(path: impl AsRef<Path>, value: &T) -> Result<(), IoError> {
    let path = path.as_ref();
    let mut bytes = serde_json::to_vec_pretty(value).map_err(|e| json_err(path, e))?;
    bytes.push(b'\n');
    write(path, &bytes)
}

pub fn load_transfer_function(path: impl AsRef<Path>) -> Result<TransferFunction, IoError> {
    load_json(path)
}

pub fn save_transfer_function(path: impl AsRef<Path>, tf: &TransferFunction) -> Result<(), IoError> {
    save_json(path, tf)
}

fn default_near() -> f64 {
    0.1
}

fn default_far() -> f64 {
    10_000.0
}

fn default_fovy() -> f64 {
    45.0
}

/// Camera description. Matrices are given row-major.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum CameraSpec {
    LookAt {
        eye: [f64; 3],
        center: [f64; 3],
        up: [f64; 3],
        #[serde(default = "default_fovy")]
        fovy: f64,
        #[serde(default = "default_near")]
        near: f64,
        #[serde(default = "default_far")]
        far: f64,
    },
    Matrices {
        view: [f64; 16],
        proj: [f64; 16],
    },
}

impl CameraSpec {
    /// `(view, proj)` for a viewport of the given aspect ratio. Explicit
    /// matrices ignore the aspect ratio.
    pub fn matrices(&self, aspect: f64) -> Result<(Mat4, Mat4), CameraError> {
        match self {
            CameraSpec::LookAt {
                eye,
                center,
                up,
                fovy,
                near,
                far,
            } => Ok((
                look_at(Vec3::from(*eye), Vec3::from(*center), Vec3::from(*up))?,
                perspective(*fovy, aspect, *near, *far)?,
            )),
            CameraSpec::Matrices { view, proj } => {
                Ok((Mat4::from_row_major(*view), Mat4::from_row_major(*proj)))
            }
        }
    }
}

pub fn load_camera(path: impl AsRef<Path>) -> Result<CameraSpec, IoError> {
    load_json(path)
}

pub fn save_camera(path: impl AsRef<Path>, camera: &CameraSpec) -> Result<(), IoError> {
    save_json(path, camera)
}

/// Binary PPM of an RGBA8 image stored top row first; alpha is dropped.
pub fn encode_ppm(width: u32, height: u32, rgba: &[u8]) -> Vec<u8> {
    let mut out = format!("P6\n{width} {height}\n255\n").into_bytes();
    out.reserve(3 * rgba.len() / 4);
    for px in rgba.chunks_exact(4) {
        out.extend_from_slice(&px[..3]);
    }
    out
}

/// Writes PPM, or PNG when the extension is `.png`.
pub fn write_image(path: impl AsRef<Path>, width: u32, height: u32, rgba: &[u8]) -> Result<(), IoError> {
    let path = path.as_ref();
    assert_eq!(rgba.len(), 4 * width as usize * height as usize, "image buffer size");
    let is_png = path
        .extension()
        .is_some_and(|e| e.eq_ignore_ascii_case("png"));
    if is_png {
        image::save_buffer(path, rgba, width, height, image::ColorType::Rgba8).map_err(|e| {
            IoError::Image {
                path: path.to_path_buf(),
                message: e.to_string(),
            }
        })
    } else {
        write(path, &encode_ppm(width, height, rgba))
    }
}

/// Reads back a binary PPM as `(width, height, rgb)`.
pub fn read_ppm(path: impl AsRef<Path>) -> Result<(u32, u32, Vec<u8>), IoError> {
    let path = path.as_ref();
    let bytes = read(path)?;
    let mut fields = Vec::new();
    let mut pos = 0;
    while fields.len() < 4 {
        while pos < bytes.len() && bytes[pos].is_ascii_whitespace() {
            pos += 1;
        }
        let start = pos;
        while pos < bytes.len() && !bytes[pos].is_ascii_whitespace() {
            pos += 1;
        }
        if start == pos {
            return Err(format_err(path, "truncated PPM header"));
        }
        fields.push(String::from_utf8_lossy(&bytes[start..pos]).into_owned());
    }
    pos += 1;
    if fields[0] != "P6" || fields[3] != "255" {
        return Err(format_err(path, "not an 8-bit binary PPM"));
    }
    let parse = |s: &str| s.parse::<u32>().map_err(|e| format_err(path, format!("bad PPM size: {e}")));
    let (w, h) = (parse(&fields[1])?, parse(&fields[2])?);
    let payload = bytes.get(pos..).unwrap_or(&[]);
    if payload.len() != 3 * w as usize * h as usize {
        return Err(format_err(path, "PPM payload size does not match header"));
    }
    Ok((w, h, payload.to_vec()))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BenchRow {
    pub dt: f64,
    pub frame_time_ms: f64,
}

impl BenchRow {
    pub fn fps(&self) -> f64 {
        1000.0 / self.frame_time_ms
    }
}

pub fn bench_csv(rows: &[BenchRow]) -> String {
    let mut s = String::from("dt,frame_time_ms,fps\n");
    for r in rows {
        s.push_str(&format!("{:?},{:?},{:?}\n", r.dt, r.frame_time_ms, r.fps()));
    }
    s
}

pub fn write_bench_csv(mut out: impl Write, rows: &[BenchRow]) -> std::io::Result<()> {
    out.write_all(bench_csv(rows).as_bytes())
}
