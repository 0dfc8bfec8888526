// Iso-surface and slice plane together: a shaded surface at one value and an
// opaque cut through the volume along x.
//
// ```sh
// cargo run --release --example iso_and_slice -- /tmp/exabrick-demo
// ```

use std::path::{Path, PathBuf};

use exabrick::camera::{look_at, perspective};
use exabrick::io;
use exabrick::render::SlicePlane;
use exabrick::synth::{generate, SynthParams};
use exabrick::{render_frame, Channel, RenderSettings, Scene, TransferFunction, Vec3};

fn main() {
    let dir = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| std::env::temp_dir().join("exabrick-iso"));
    run(&dir);
}

fn run(dir: &Path) {
    std::fs::create_dir_all(dir).expect("create output directory");

    let scene = Scene::new(generate(&SynthParams::default()));
    let (lo, hi) = scene.field.value_range();
    let tf = TransferFunction::new(
        vec![[0.0, 0.0, 0.5, 0.0], [0.0, 0.8, 0.8, 0.0], [1.0, 1.0, 0.0, 0.0], [1.0, 0.2, 0.0, 0.0]],
        (lo, hi),
        1.0,
    )
    .unwrap();
    let iso_value = lo + 0.5 * (hi - lo);
    let settings = RenderSettings {
        volume: false,
        iso: true,
        iso_value,
        slice: true,
        slice_plane: SlicePlane {
            normal: [1.0, 0.0, 0.0],
            offset: 12.0,
        },
        background: [0.1, 0.1, 0.12, 1.0],
        ..Default::default()
    };

    let view = look_at(Vec3::new(60.0, 35.0, 55.0), Vec3::new(16.0, 16.0, 16.0), Vec3::y()).unwrap();
    let proj = perspective(40.0, 1.0, 0.1, 500.0).unwrap();
    let mut channels = [Channel::new(view, proj, 256, 256)];
    render_frame(&mut channels, &scene, &tf, &settings).expect("render");

    let ch = &channels[0];
    let out = dir.join("iso_slice.png");
    io::write_image(&out, ch.width, ch.height, &ch.framebuffer).expect("write image");
    let near = ch.depthbuffer.iter().filter(|&&d| d < 1.0).count();
    println!("{}: iso {iso_value}, {near} pixels hit", out.display());
}
