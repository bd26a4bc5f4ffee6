//! Runs the iterative labeler on a noisy phantom and prints each
//! accepted energy and the final labels.

use spine_rectify::config::RunConfig;
use spine_rectify::labels::label_name;
use spine_rectify::optimize::{solve, Problem};
use spine_rectify::pipeline::Pipeline;
use spine_rectify::synth::{generate, NoiseSpec, PhantomSpec, RandomRun};

fn main() {
    let seed: u64 = std::env::args().nth(1).and_then(|a| a.parse().ok()).unwrap_or(5);
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

    let signals = &prepared.oriented;
    let energy_cfg = pipeline.config().energy(signals.v_max());
    let problem = Problem::new(&signals.channels, &energy_cfg).unwrap();
    let outcome = solve(&problem, &signals.q_hat, &pipeline.config().solve()).unwrap();
    println!("{} iterations, accepted energies {:.1?}", outcome.iterations, outcome.accepted);
    let best = &outcome.best;
    println!(
        "labels {}..{} (truth {}..{})",
        label_name(best.v_l).unwrap(),
        label_name(best.v_l + best.n() - 1).unwrap(),
        label_name(spec.start_label).unwrap(),
        label_name(spec.end_label()).unwrap()
    );
    for (label, k) in best.labels().zip(&best.k) {
        let p = prepared.centerline.point_at(prepared.centerline_index(*k)).unwrap();
        let err = phantom.truth.iter().find(|t| t.label == label).map(|t| (t.center - p).norm());
        println!("{:>4} at k = {k:6.1}  error {}", label_name(label).unwrap(), err.map_or("-".into(), |e| format!("{e:.2} mm")));
    }
}
