//! Runs every example end to end.

use tempfile::TempDir;

#[allow(dead_code)]
mod synth_and_info {
    include!("../examples/synth_and_info.rs");
    pub fn check(dir: &Path) {
        run(dir);
        assert!(dir.join("blobs.cells").exists());
    }
}

#[allow(dead_code)]
mod render_mono {
    include!("../examples/render_mono.rs");
    pub fn check(dir: &Path) {
        run(dir);
        let (w, h, _) = exabrick::io::read_ppm(dir.join("mono.ppm")).unwrap();
        assert_eq!((w, h), (256, 192));
    }
}

#[allow(dead_code)]
mod stereo_offaxis {
    include!("../examples/stereo_offaxis.rs");
    pub fn check(dir: &Path) {
        run(dir);
        let (w, h, rgb) = exabrick::io::read_ppm(dir.join("stereo.ppm")).unwrap();
        assert_eq!((w, h), (400, 150));
        assert!(rgb.iter().any(|&c| c > 0));
    }
}

#[allow(dead_code)]
mod iso_and_slice {
    include!("../examples/iso_and_slice.rs");
    pub fn check(dir: &Path) {
        run(dir);
        assert!(dir.join("iso_slice.png").exists());
    }
}

#[allow(dead_code)]
mod abr_decomposition {
    include!("../examples/abr_decomposition.rs");
    pub fn check() {
        main();
    }
}

#[allow(dead_code)]
mod dt_sweep {
    include!("../examples/dt_sweep.rs");
    pub fn check() {
        main();
    }
}

#[test]
fn examples_run() {
    let dir = TempDir::new().unwrap();
    synth_and_info::check(dir.path());
    render_mono::check(dir.path());
    stereo_offaxis::check(dir.path());
    iso_and_slice::check(dir.path());
    abr_decomposition::check();
    dt_sweep::check();
}
