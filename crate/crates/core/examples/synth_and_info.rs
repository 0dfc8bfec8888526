// Generates a synthetic dataset on disk, loads it back through its config
// file and prints the statistics table.
//
// ```sh
// cargo run --release --example synth_and_info -- /tmp/exabrick-demo
// ```

use std::path::{Path, PathBuf};

use exabrick::commands;
use exabrick::synth::SynthParams;

fn main() {
    let dir = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| std::env::temp_dir().join("exabrick-synth"));
    run(&dir);
}

fn run(dir: &Path) {
    std::fs::create_dir_all(dir).expect("create output directory");
    let config = dir.join("blobs.cfg");

    let params = SynthParams {
        blobs: 5,
        levels: 3,
        threshold: 0.05,
        seed: 7,
    };
    commands::synth(&params, &config).expect("write dataset");
    let info = commands::info(&config).expect("load dataset");
    println!("{}", config.display());
    print!("{info}");
}
