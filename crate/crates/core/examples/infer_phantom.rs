//! Full inference on a phantom in every mode, printing predictions JSON
//! for the constrained mode.

use spine_rectify::cli::{to_json6, PredictionFile};
use spine_rectify::config::RunConfig;
use spine_rectify::metrics::{identify_matches, report};
use spine_rectify::optimize::Mode;
use spine_rectify::pipeline::Pipeline;
use spine_rectify::synth::{generate, NoiseSpec, PhantomSpec, RandomRun};

fn main() {
    let seed: u64 = std::env::args().nth(1).and_then(|a| a.parse().ok()).unwrap_or(1);
    let spec = PhantomSpec {
        noise: NoiseSpec {
            label_shift_prob: 0.2,
            dropout_prob: 0.05,
            jitter_sigma_mm: 2.0,
            ..NoiseSpec::default()
        },
        ..PhantomSpec::default()
    }
    .random(seed, &RandomRun::default());
    let phantom = generate(&spec).unwrap();
    let pipeline = Pipeline::new(RunConfig::default());
    let prepared = pipeline.prepare(&phantom.stack).unwrap();
    for mode in Mode::ALL {
        let inf = pipeline.decode(&phantom.stack, &prepared, mode).unwrap();
        let r = report(&identify_matches(&inf.predictions, &phantom.truth).unwrap());
        println!(
            "{:<16} {}/{} identified, plausible {}",
            mode.long_name(),
            r.overall.identified,
            r.overall.total,
            inf.anatomically_plausible
        );
        if mode == Mode::Optim {
            println!("{}", to_json6(&PredictionFile::from_inference("example", &inf)));
        }
    }
}
