// Sweeps the base step size and prints median frame time and sample count
// per setting, as CSV plus a samples column.
//
// ```sh
// cargo run --release --example dt_sweep
// ```

use exabrick::camera::{look_at, perspective};
use exabrick::commands::{bench_scene, BenchPlan, Spacing};
use exabrick::io::bench_csv;
use exabrick::synth::{generate, SynthParams};
use exabrick::{Channel, RenderSettings, Renderer, Scene, TransferFunction, Vec3};

fn main() {
    let scene = Scene::new(generate(&SynthParams::default()));
    let tf = TransferFunction::ramp(scene.field.value_range()).with_opacity_scale(0.1).unwrap();
    let view = look_at(Vec3::new(50.0, 40.0, 70.0), Vec3::new(16.0, 16.0, 16.0), Vec3::y()).unwrap();
    let proj = perspective(40.0, 1.0, 0.1, 500.0).unwrap();
    let channels = [Channel::new(view, proj, 128, 128)];

    let plan = BenchPlan {
        dt_min: 0.25,
        dt_max: 4.0,
        samples: 5,
        spacing: Spacing::Log,
        repetitions: 3,
        warmup: 1,
    };
    let renderer = Renderer::default();
    let rows = bench_scene(&scene, &channels, &tf, &RenderSettings::default(), &plan, &renderer).expect("bench");
    print!("{}", bench_csv(&rows));

    for dt in plan.dts() {
        let mut ch = channels.clone();
        let settings = RenderSettings {
            dt,
            ..Default::default()
        };
        let report = renderer.render_frame(&mut ch, &scene, &tf, &settings).unwrap();
        println!("dt {dt}: {} samples", report.channels[0].samples);
    }
}
