// Head-tracked stereo for a projection wall: each eye gets an off-axis
// frustum through the same physical screen, and both views are written side
// by side.
//
// ```sh
// cargo run --release --example stereo_offaxis -- /tmp/exabrick-demo
// ```

use std::path::{Path, PathBuf};

use exabrick::camera::{frustum, Mat4};
use exabrick::commands::side_by_side;
use exabrick::io;
use exabrick::synth::{generate, SynthParams};
use exabrick::{render_frame, Channel, RenderSettings, Scene, TransferFunction, Vec3};

/// Wall in the plane z = 0 spanning `[x0, x1] x [y0, y1]`, viewer at `eye`
/// with z > 0 looking down -z.
fn wall_camera(eye: Vec3, x0: f64, x1: f64, y0: f64, y1: f64, near: f64, far: f64) -> (Mat4, Mat4) {
    let s = near / eye.z;
    let proj = frustum((x0 - eye.x) * s, (x1 - eye.x) * s, (y0 - eye.y) * s, (y1 - eye.y) * s, near, far).unwrap();
    let view = Mat4::translation(-eye);
    (view, proj)
}

fn main() {
    let dir = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| std::env::temp_dir().join("exabrick-stereo"));
    run(&dir);
}

fn run(dir: &Path) {
    std::fs::create_dir_all(dir).expect("create output directory");

    // move the dataset behind the wall
    let field = generate(&SynthParams::default());
    let (cells, scalars) = field.into_parts();
    let cells = cells
        .into_iter()
        .map(|mut c| {
            c.pos = [c.pos[0] - 16, c.pos[1] - 16, c.pos[2] - 48];
            c
        })
        .collect();
    let scene = Scene::new(exabrick::AmrField::new(cells, scalars).unwrap());
    let tf = TransferFunction::ramp(scene.field.value_range()).with_opacity_scale(0.15).unwrap();

    let head = Vec3::new(3.0, 1.0, 40.0);
    let separation = 1.2;
    let channels: Vec<Channel> = [-0.5, 0.5]
        .iter()
        .map(|side| {
            let eye = head + Vec3::new(side * separation, 0.0, 0.0);
            let (view, proj) = wall_camera(eye, -20.0, 20.0, -15.0, 15.0, 0.1, 500.0);
            Channel::new(view, proj, 200, 150)
        })
        .collect();
    let mut channels = channels;
    let report = render_frame(&mut channels, &scene, &tf, &RenderSettings::default()).expect("render");

    let (w, h, rgba) = side_by_side(&channels);
    let out = dir.join("stereo.ppm");
    io::write_image(&out, w, h, &rgba).expect("write image");
    println!(
        "{}: left {:.1} ms, right {:.1} ms, frame {:.1} ms",
        out.display(),
        report.channels[0].frame_time_ms,
        report.channels[1].frame_time_ms,
        report.frame_time_ms
    );
}
