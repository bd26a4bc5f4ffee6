//! Traces the spine centerline of a curved phantom and compares it with
//! the generating curve.

use spine_rectify::centerline::{extract_centerline, CenterlineConfig};
use spine_rectify::synth::{generate, CurveSpec, PhantomSpec};

fn main() {
    let spec = PhantomSpec {
        curve: CurveSpec {
            amplitude_mm: 25.0,
            wavelength_mm: 400.0,
            ..CurveSpec::default()
        },
        ..PhantomSpec::default()
    };
    let phantom = generate(&spec).unwrap();
    let c = extract_centerline(&phantom.stack.combine(), &CenterlineConfig::default()).unwrap();
    println!("{} samples, {:.1} mm long", c.len(), c.length_mm());
    let (lo, hi) = (phantom.truth.last().unwrap().center.z, phantom.truth[0].center.z);
    let worst = c
        .samples()
        .iter()
        .filter(|s| s.point.z >= lo && s.point.z <= hi)
        .map(|s| (s.point - phantom.curve.at(s.point.z)).norm())
        .fold(0.0, f64::max);
    println!("max distance to the generating curve between end vertebrae: {worst:.2} mm");
    let s = &c.samples()[c.len() / 2];
    println!("mid frame: e1 {:?} e2 {:?} e3 {:?}", s.e1.as_slice(), s.e2.as_slice(), s.e3.as_slice());
}
