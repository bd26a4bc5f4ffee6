//! Scores predictions against ground truth and prints the region table.

use spine_rectify::heatmap::VertebraAnnotation;
use spine_rectify::metrics::{identify_matches, report, VertebraPrediction};
use spine_rectify::volume::Vec3;

fn main() {
    let truth: Vec<VertebraAnnotation> = (18..=24)
        .map(|label| VertebraAnnotation {
            label,
            center: Vec3::new(0.0, 0.0, 400.0 - 30.0 * label as f64),
        })
        .collect();
    // off by one at the top, a little noise elsewhere
    let pred: Vec<VertebraPrediction> = truth
        .iter()
        .enumerate()
        .map(|(i, t)| VertebraPrediction {
            label: if i == 0 { 17 } else { t.label },
            center: t.center + Vec3::new(1.0, -0.5, 0.3 * i as f64),
            activation: 1.0,
        })
        .collect();
    let outcomes = identify_matches(&pred, &truth).unwrap();
    for o in &outcomes {
        println!("label {:2}: identified {} distance {:?}", o.label, o.identified, o.distance_mm);
    }
    print!("{}", report(&outcomes).to_table("example case"));
}
