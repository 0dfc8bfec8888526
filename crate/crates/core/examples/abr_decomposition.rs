// Builds a synthetic three-level dataset and prints its brick and active
// brick region statistics.
//
// ```sh
// cargo run --release --example abr_decomposition
// ```

use exabrick::commands::DatasetInfo;
use exabrick::synth::{generate, SynthParams};
use exabrick::Scene;

fn main() {
    let params = SynthParams::default();
    let field = generate(&params);
    let scene = Scene::new(field);
    let info = DatasetInfo::of(&scene, 0, None);
    print!("{}", info.table());

    let mut per_level = std::collections::BTreeMap::new();
    for b in &scene.structure.bricks {
        *per_level.entry(b.level).or_insert(0usize) += 1;
    }
    for (level, n) in per_level {
        println!("level {level}: {n} bricks");
    }
    let max_overlap = scene.structure.abrs.iter().map(|a| a.brick_ids.len()).max().unwrap_or(0);
    let mean_overlap = scene.structure.abrs.iter().map(|a| a.brick_ids.len()).sum::<usize>() as f64
        / scene.structure.abrs.len().max(1) as f64;
    println!("bricks per region: mean {mean_overlap:.2}, max {max_overlap}");
}
