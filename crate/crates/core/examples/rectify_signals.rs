//! Straightens a curved phantom along its centerline and prints the
//! strongest 1-D channel positions.
//!
//! cargo run --example rectify_signals -- [csv_out]

use spine_rectify::centerline::extract_centerline;
use spine_rectify::config::RunConfig;
use spine_rectify::labels::label_name;
use spine_rectify::rectify::{map_back, rectified_signals};
use spine_rectify::synth::{generate, CurveSpec, PhantomSpec};

fn main() {
    let cfg = RunConfig::default();
    let phantom = generate(&PhantomSpec {
        start_label: 15,
        count: 8,
        curve: CurveSpec {
            amplitude_mm: 20.0,
            ..CurveSpec::default()
        },
        ..PhantomSpec::default()
    })
    .unwrap();
    let g_hat = phantom.stack.combine();
    let c = extract_centerline(&g_hat, &cfg.centerline()).unwrap();
    let signals = rectified_signals(&phantom.stack, &g_hat, &c, &cfg.rectify());
    println!("{} samples of {} mm", signals.len(), signals.q_hat.delta());
    for t in &phantom.truth {
        let k = signals.channel(t.label).argmax().unwrap();
        let back = map_back(k as f64, &c).unwrap();
        println!(
            "{:>4}: k = {k:3}, mapped back {:.2} mm from the true center",
            label_name(t.label).unwrap(),
            (back - t.center).norm()
        );
    }
    if let Some(path) = std::env::args().nth(1) {
        std::fs::write(&path, signals.to_csv()).unwrap();
        println!("wrote {path}");
    }
}
