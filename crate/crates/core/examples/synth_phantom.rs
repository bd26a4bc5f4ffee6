//! Generates one noisy phantom and writes it to disk.
//!
//! cargo run --example synth_phantom -- [out_dir] [seed]

use spine_rectify::heatmap::write_annotations;
use spine_rectify::labels::label_name;
use spine_rectify::synth::{generate, NoiseSpec, PhantomSpec, RandomRun};
use spine_rectify::volume::write_stack;

fn main() {
    let mut args = std::env::args().skip(1);
    let out = args.next().unwrap_or_else(|| std::env::temp_dir().join("phantom").display().to_string());
    let seed: u64 = args.next().and_then(|a| a.parse().ok()).unwrap_or(7);
    let spec = PhantomSpec {
        noise: NoiseSpec {
            label_shift_prob: 0.2,
            jitter_sigma_mm: 2.0,
            ..NoiseSpec::default()
        },
        ..PhantomSpec::default()
    }
    .random(seed, &RandomRun::default());
    let phantom = generate(&spec).expect("valid spec");

    let g = phantom.stack.geometry();
    println!("volume {:?} voxels of {:?} mm", g.dims, g.spacing);
    for t in &phantom.truth {
        let c = t.center;
        println!("{:>4}  ({:7.1}, {:7.1}, {:7.1})", label_name(t.label).unwrap(), c.x, c.y, c.z);
    }
    write_stack(&phantom.stack, format!("{out}/stack")).expect("write stack");
    write_annotations(&phantom.truth, format!("{out}/truth.json")).expect("write truth");
    println!("wrote {out}");
}
