//! Renders Gaussian target heatmaps from labeled centers.

use spine_rectify::heatmap::{render_gaussians, VertebraAnnotation};
use spine_rectify::volume::{Geometry, Vec3};

fn main() {
    let geometry = Geometry::new([40, 40, 60], [2.0; 3], [-40.0, -40.0, 0.0]).unwrap();
    let annotations: Vec<VertebraAnnotation> = [(20, 90.0), (21, 60.0), (22, 30.0), (23, 130.0)]
        .into_iter()
        .map(|(label, z)| VertebraAnnotation {
            label,
            center: Vec3::new(0.0, 0.0, z),
        })
        .collect();
    let (stack, warnings) = render_gaussians(&annotations, geometry, 8.0, 26).unwrap();
    for w in &warnings {
        println!("warning: {w:?}");
    }
    for a in &annotations {
        let (voxel, value) = stack.channel(a.label).argmax();
        println!("label {:2}: peak {value:.3} at {:?}", a.label, stack.geometry().world(voxel).as_slice());
    }
    println!("combined max {:.3}", stack.combine().max_value());
}
