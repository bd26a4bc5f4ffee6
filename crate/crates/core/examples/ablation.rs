//! Identification rate of each decoder on noisy phantoms.
//!
//! cargo run --release --example ablation -- [cases] [seed]

use spine_rectify::config::RunConfig;
use spine_rectify::metrics::{identify_matches, report};
use spine_rectify::optimize::Mode;
use spine_rectify::pipeline::Pipeline;
use spine_rectify::synth::{generate, NoiseSpec, PhantomSpec, RandomRun};

fn main() {
    let mut args = std::env::args().skip(1);
    let cases: u64 = args.next().and_then(|a| a.parse().ok()).unwrap_or(20);
    let seed: u64 = args.next().and_then(|a| a.parse().ok()).unwrap_or(0);
    let base = PhantomSpec {
        noise: NoiseSpec {
            label_shift_prob: 0.2,
            dropout_prob: 0.05,
            jitter_sigma_mm: 2.0,
            ..NoiseSpec::default()
        },
        ..PhantomSpec::default()
    };
    let pipeline = Pipeline::new(RunConfig::default());
    let mut outcomes = vec![Vec::new(); Mode::ALL.len()];
    for i in 0..cases {
        let phantom = generate(&base.random(seed + i, &RandomRun::default())).expect("valid phantom");
        let prepared = pipeline.prepare(&phantom.stack).expect("centerline");
        for (m, mode) in Mode::ALL.iter().enumerate() {
            let out = pipeline.decode(&phantom.stack, &prepared, *mode).expect("decode");
            outcomes[m].extend(identify_matches(&out.predictions, &phantom.truth).unwrap());
        }
    }
    for (m, mode) in Mode::ALL.iter().enumerate() {
        let r = report(&outcomes[m]);
        println!(
            "{:<16} id {:6.2}%  mean err {:5.2} mm",
            mode.long_name(),
            100.0 * r.overall.id_rate.unwrap_or(0.0),
            r.overall.mean_error_mm.unwrap_or(f64::NAN)
        );
    }
}
