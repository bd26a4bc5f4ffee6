//! Writes an SVG of the rectified signals of a phantom, with the initial
//! peaks marked.
//!
//! cargo run --example plot_signals -- [out.svg]

use spine_rectify::cli::{signal_marks, signals_of};
use spine_rectify::config::RunConfig;
use spine_rectify::plot::{render_svg, PlotSpec};
use spine_rectify::synth::{generate, PhantomSpec};

fn main() {
    let out = std::env::args().nth(1).unwrap_or_else(|| std::env::temp_dir().join("signals.svg").display().to_string());
    let cfg = RunConfig::default();
    let phantom = generate(&PhantomSpec::default()).unwrap();
    let signals = signals_of(&cfg, &phantom.stack).unwrap();
    let marks = signal_marks(&cfg, &signals);
    let svg = render_svg(
        &signals,
        &PlotSpec {
            title: "default phantom".into(),
            channels: vec![],
            marks: marks.clone(),
        },
    );
    std::fs::write(&out, svg).unwrap();
    println!("{} peaks marked at {marks:?}; wrote {out}", marks.len());
}
