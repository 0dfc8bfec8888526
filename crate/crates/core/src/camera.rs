//! Matrices, projections and inverse-projection ray generation.
//!
//! Conventions: right-handed view space looking down `-z`, OpenGL-style NDC
//! with `z` in `[-1, 1]`. A pixel's ray is found by unprojecting the NDC
//! points `(x, y, -1)` and `(x, y, 1)` through `inverse(proj * view)`, so any
//! frustum the projection encodes (symmetric or off-axis) carries over to the
//! rays unchanged.

use nalgebra::{Matrix4, Vector4};
use thiserror::Error;

use crate::geometry::Vec3;

/// Smallest `|det(proj * view)|` accepted for ray generation.
pub const MIN_DETERMINANT: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CameraError {
    #[error("projection * view matrix is singular (|det| = {0:e})")]
    Singular(f64),
    #[error("degenerate camera parameters: {0}")]
    Degenerate(String),
}

/// 4x4 matrix stored column-major.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Mat4(pub Matrix4<f64>);

impl Default for Mat4 {
    fn default() -> Self {
        Self::identity()
    }
}

impl Mat4 {
    pub fn identity() -> Self {
        Mat4(Matrix4::identity())
    }

    pub fn from_col_major(m: [f64; 16]) -> Self {
        Mat4(Matrix4::from_column_slice(&m))
    }

    /// External matrices arrive row-major and are transposed on ingest.
    pub fn from_row_major(m: [f64; 16]) -> Self {
        Mat4(Matrix4::from_row_slice(&m))
    }

    pub fn to_col_major(&self) -> [f64; 16] {
        let mut out = [0.0; 16];
        out.copy_from_slice(self.0.as_slice());
        out
    }

    pub fn to_row_major(&self) -> [f64; 16] {
        Mat4(self.0.transpose()).to_col_major()
    }

    pub fn translation(t: Vec3) -> Self {
        Mat4(Matrix4::new_translation(&t))
    }

    pub fn determinant(&self) -> f64 {
        self.0.determinant()
    }

    pub fn inverse(&self) -> Result<Mat4, CameraError> {
        let det = self.determinant();
        if !det.is_finite() || det.abs() <= MIN_DETERMINANT {
            return Err(CameraError::Singular(det.abs()));
        }
        self.0
            .try_inverse()
            .map(Mat4)
            .ok_or(CameraError::Singular(det.abs()))
    }

    /// Homogeneous transform with perspective divide.
    pub fn transform_point(&self, p: &Vec3) -> Vec3 {
        let h = self.0 * Vector4::new(p.x, p.y, p.z, 1.0);
        Vec3::new(h.x / h.w, h.y / h.w, h.z / h.w)
    }
}

impl std::ops::Mul for Mat4 {
    type Output = Mat4;
    fn mul(self, rhs: Mat4) -> Mat4 {
        Mat4(self.0 * rhs.0)
    }
}

/// Symmetric perspective projection; `fovy_degrees` is the full vertical angle.
pub fn perspective(fovy_degrees: f64, aspect: f64, near: f64, far: f64) -> Result<Mat4, CameraError> {
    if !(fovy_degrees > 0.0 && fovy_degrees < 180.0) {
        return Err(CameraError::Degenerate(format!("fovy {fovy_degrees} not in (0, 180)")));
    }
    if !(aspect > 0.0 && aspect.is_finite()) {
        return Err(CameraError::Degenerate(format!("aspect {aspect} must be positive")));
    }
    check_depth_range(near, far)?;
    let f = 1.0 / (0.5 * fovy_degrees.to_radians()).tan();
    #[rustfmt::skip]
    let m = Matrix4::new(
        f / aspect, 0.0, 0.0, 0.0,
        0.0, f, 0.0, 0.0,
        0.0, 0.0, (far + near) / (near - far), 2.0 * far * near / (near - far),
        0.0, 0.0, -1.0, 0.0,
    );
    Ok(Mat4(m))
}

/// General (possibly off-axis) frustum with near-plane extents `l..r`, `b..t`.
pub fn frustum(l: f64, r: f64, b: f64, t: f64, near: f64, far: f64) -> Result<Mat4, CameraError> {
    if r == l || t == b {
        return Err(CameraError::Degenerate(format!(
            "zero-sized frustum window [{l}, {r}] x [{b}, {t}]"
        )));
    }
    check_depth_range(near, far)?;
    #[rustfmt::skip]
    let m = Matrix4::new(
        2.0 * near / (r - l), 0.0, (r + l) / (r - l), 0.0,
        0.0, 2.0 * near / (t - b), (t + b) / (t - b), 0.0,
        0.0, 0.0, (far + near) / (near - far), 2.0 * far * near / (near - far),
        0.0, 0.0, -1.0, 0.0,
    );
    Ok(Mat4(m))
}

fn check_depth_range(near: f64, far: f64) -> Result<(), CameraError> {
    if !(near > 0.0 && far > near && far.is_finite()) {
        return Err(CameraError::Degenerate(format!(
            "need 0 < near < far, got near {near}, far {far}"
        )));
    }
    Ok(())
}

/// Right-handed view matrix.
pub fn look_at(eye: Vec3, center: Vec3, up: Vec3) -> Result<Mat4, CameraError> {
    let forward = center - eye;
    if forward.norm() == 0.0 {
        return Err(CameraError::Degenerate("eye equals center".into()));
    }
    let f = forward.normalize();
    let side = f.cross(&up);
    if side.norm() < 1e-12 * up.norm().max(1.0) {
        return Err(CameraError::Degenerate("up is parallel to the view direction".into()));
    }
    let s = side.normalize();
    let u = s.cross(&f);
    #[rustfmt::skip]
    let m = Matrix4::new(
        s.x, s.y, s.z, -s.dot(&eye),
        u.x, u.y, u.z, -u.dot(&eye),
        -f.x, -f.y, -f.z, f.dot(&eye),
        0.0, 0.0, 0.0, 1.0,
    );
    Ok(Mat4(m))
}

/// View matrix for an eye displaced by `offset` in world space.
pub fn eye_offset_view(view: &Mat4, offset: Vec3) -> Mat4 {
    *view * Mat4::translation(-offset)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Ray {
    pub origin: Vec3,
    /// Unit length.
    pub direction: Vec3,
    pub t_min: f64,
    pub t_max: f64,
}

impl Ray {
    /// Normalizes `direction`.
    pub fn new(origin: Vec3, direction: Vec3, t_min: f64, t_max: f64) -> Self {
        Self {
            origin,
            direction: direction.normalize(),
            t_min,
            t_max,
        }
    }

    pub fn at(&self, t: f64) -> Vec3 {
        self.origin + self.direction * t
    }
}

/// Unprojects pixels of one viewport into world-space rays.
#[derive(Clone, Debug)]
pub struct RayGenerator {
    view_proj: Mat4,
    inverse: Mat4,
    width: u32,
    height: u32,
}

impl RayGenerator {
    pub fn new(view: &Mat4, proj: &Mat4, width: u32, height: u32) -> Result<Self, CameraError> {
        let view_proj = *proj * *view;
        let inverse = view_proj.inverse()?;
        Ok(Self {
            view_proj,
            inverse,
            width,
            height,
        })
    }

    /// Ray through NDC position `(x, y)`, from the near plane to the far plane.
    pub fn ray_at_ndc(&self, x: f64, y: f64) -> Ray {
        let near = self.inverse.transform_point(&Vec3::new(x, y, -1.0));
        let far = self.inverse.transform_point(&Vec3::new(x, y, 1.0));
        let span = far - near;
        let len = span.norm();
        Ray {
            origin: near,
            direction: span / len,
            t_min: 0.0,
            t_max: len,
        }
    }

    /// Ray through continuous pixel coordinates; `(0, 0)` is the lower-left
    /// image corner and `(width, height)` the upper-right one.
    pub fn ray_through(&self, px: f64, py: f64) -> Ray {
        let x = 2.0 * px / self.width as f64 - 1.0;
        let y = 2.0 * py / self.height as f64 - 1.0;
        self.ray_at_ndc(x, y)
    }

    /// Ray through the center of pixel `(i, j)`, `j` counted from the bottom.
    pub fn ray_for_pixel(&self, i: u32, j: u32) -> Ray {
        self.ray_through(i as f64 + 0.5, j as f64 + 0.5)
    }

    /// Depth of world point `p`, NDC z remapped from `[-1, 1]` to `[0, 1]`.
    pub fn depth(&self, p: &Vec3) -> f32 {
        let z = self.view_proj.transform_point(p).z;
        (0.5 * (z + 1.0)).clamp(0.0, 1.0) as f32
    }

    pub fn view_proj(&self) -> &Mat4 {
        &self.view_proj
    }
}

/// One viewport: matrices plus RGBA8 and depth buffers.
///
/// Buffers are stored row by row from the top of the image down; pixel
/// `(i, j)` with `j` counted from the bottom lives at row `height - 1 - j`.
#[derive(Clone, Debug, PartialEq)]
pub struct Channel {
    pub view: Mat4,
    pub proj: Mat4,
    pub width: u32,
    pub height: u32,
    pub framebuffer: Vec<u8>,
    pub depthbuffer: Vec<f32>,
}

impl Channel {
    pub fn new(view: Mat4, proj: Mat4, width: u32, height: u32) -> Self {
        let n = width as usize * height as usize;
        Self {
            view,
            proj,
            width,
            height,
            framebuffer: vec![0; 4 * n],
            depthbuffer: vec![1.0; n],
        }
    }

    pub fn ray_generator(&self) -> Result<RayGenerator, CameraError> {
        RayGenerator::new(&self.view, &self.proj, self.width, self.height)
    }

    /// RGBA of pixel `(i, j)`, `j` counted from the bottom.
    pub fn pixel(&self, i: u32, j: u32) -> [u8; 4] {
        let row = (self.height - 1 - j) as usize;
        let k = 4 * (row * self.width as usize + i as usize);
        [
            self.framebuffer[k],
            self.framebuffer[k + 1],
            self.framebuffer[k + 2],
            self.framebuffer[k + 3],
        ]
    }
}

/// Ray through the center of pixel `(i, j)` of `channel`.
pub fn ray_for_pixel(channel: &Channel, i: u32, j: u32) -> Result<Ray, CameraError> {
    if i >= channel.width || j >= channel.height {
        return Err(CameraError::Degenerate(format!(
            "pixel ({i}, {j}) outside {}x{} viewport",
            channel.width, channel.height
        )));
    }
    Ok(channel.ray_generator()?.ray_for_pixel(i, j))
}
