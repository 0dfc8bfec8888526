// Renders one view of a synthetic dataset with a two-color transfer function
// and writes it as PPM.
//
// ```sh
// cargo run --release --example render_mono -- /tmp/exabrick-demo
// ```

use std::path::{Path, PathBuf};

use exabrick::camera::{look_at, perspective};
use exabrick::io;
use exabrick::synth::{generate, SynthParams};
use exabrick::{render_frame, Channel, RenderSettings, Scene, TransferFunction, Vec3};

fn main() {
    let dir = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| std::env::temp_dir().join("exabrick-mono"));
    run(&dir);
}

fn run(dir: &Path) {
    std::fs::create_dir_all(dir).expect("create output directory");

    let scene = Scene::new(generate(&SynthParams::default()));
    let (lo, hi) = scene.field.value_range();
    let tf = TransferFunction::new(
        vec![
            [0.0, 0.0, 0.0, 0.0],
            [0.1, 0.3, 0.9, 0.02],
            [1.0, 0.8, 0.2, 0.3],
        ],
        (lo, hi),
        1.0,
    )
    .expect("valid transfer function");

    let view = look_at(Vec3::new(50.0, 40.0, 70.0), Vec3::new(16.0, 16.0, 16.0), Vec3::y()).unwrap();
    let proj = perspective(40.0, 4.0 / 3.0, 0.1, 500.0).unwrap();
    let mut channels = [Channel::new(view, proj, 256, 192)];
    let report = render_frame(&mut channels, &scene, &tf, &RenderSettings::default()).expect("render");

    let out = dir.join("mono.ppm");
    let ch = &channels[0];
    io::write_image(&out, ch.width, ch.height, &ch.framebuffer).expect("write image");
    let stats = report.channels[0];
    println!(
        "{}: {:.1} ms, {} rays, {} samples",
        out.display(),
        stats.frame_time_ms,
        stats.rays,
        stats.samples
    );
}
