//! Writes a volume in the binary grid format and reads it back.

use spine_rectify::volume::{read_volume, write_volume, Geometry, VolumeGrid};

fn main() {
    let geometry = Geometry::new([16, 12, 8], [1.5, 1.5, 2.0], [-12.0, -9.0, 0.0]).unwrap();
    let grid = VolumeGrid::from_world_fn(geometry, |p| (-(p.x * p.x + p.y * p.y) / 50.0).exp() * p.z).unwrap();
    let path = std::env::temp_dir().join("volume_io_example.vgf");
    write_volume(&grid, &path).unwrap();
    let back = read_volume(&path).unwrap();
    // values are stored as f32
    assert_eq!(back.geometry(), grid.geometry());
    let worst = back.data().iter().zip(grid.data()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    println!("largest round-trip difference {worst:.2e}");
    let (at, max) = back.argmax();
    println!("{} bytes, max {max:.3} at voxel {at:?} = {:?} mm", std::fs::metadata(&path).unwrap().len(), back.geometry().world(at).as_slice());
    println!("trilinear sample at (0.75, 0, 7): {:.4}", back.sample(&[0.75, 0.0, 7.0].into()));
}
