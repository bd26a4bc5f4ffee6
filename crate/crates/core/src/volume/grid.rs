use super::{Vec3, VolumeError};
use serde::{Deserialize, Serialize};

/// Placement of a voxel lattice in world space.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Geometry {
    pub dims: [usize; 3],
    pub spacing: [f64; 3],
    pub origin: [f64; 3],
}

/// Trilinear interpolation weights for one world point.
///
/// Computed once per point and reused across every grid that shares the
/// geometry, which is how the rectifier samples 27 channels at once.
#[derive(Debug, Clone, Copy)]
pub struct Stencil {
    pub(crate) index: [usize; 8],
    pub(crate) weight: [f64; 8],
}

const HULL_EPS: f64 = 1e-9;

impl Geometry {
    pub fn new(dims: [usize; 3], spacing: [f64; 3], origin: [f64; 3]) -> Result<Self, VolumeError> {
        let g = Geometry {
            dims,
            spacing,
            origin,
        };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<(), VolumeError> {
        if self.dims.iter().any(|&d| d == 0) {
            return Err(VolumeError::InvalidGeometry(format!(
                "dims must be >= 1, got {:?}",
                self.dims
            )));
        }
        if self.spacing.iter().any(|&s| !(s.is_finite() && s > 0.0)) {
            return Err(VolumeError::InvalidGeometry(format!(
                "spacing must be positive and finite, got {:?}",
                self.spacing
            )));
        }
        if self.origin.iter().any(|o| !o.is_finite()) {
            return Err(VolumeError::InvalidGeometry(format!(
                "origin must be finite, got {:?}",
                self.origin
            )));
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.dims[0] * self.dims[1] * self.dims[2]
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    #[inline]
    pub fn index(&self, x: usize, y: usize, z: usize) -> usize {
        x + self.dims[0] * (y + self.dims[1] * z)
    }

    #[inline]
    pub fn coords(&self, index: usize) -> [usize; 3] {
        let x = index % self.dims[0];
        let rest = index / self.dims[0];
        [x, rest % self.dims[1], rest / self.dims[1]]
    }

    /// World position of a voxel center.
    #[inline]
    pub fn world(&self, voxel: [usize; 3]) -> Vec3 {
        Vec3::new(
            self.origin[0] + voxel[0] as f64 * self.spacing[0],
            self.origin[1] + voxel[1] as f64 * self.spacing[1],
            self.origin[2] + voxel[2] as f64 * self.spacing[2],
        )
    }

    /// Continuous voxel coordinates of a world point.
    #[inline]
    pub fn continuous_index(&self, p: &Vec3) -> [f64; 3] {
        [
            (p.x - self.origin[0]) / self.spacing[0],
            (p.y - self.origin[1]) / self.spacing[1],
            (p.z - self.origin[2]) / self.spacing[2],
        ]
    }

    /// Voxel whose center is closest to `p`, clamped into the grid.
    pub fn nearest_voxel(&self, p: &Vec3) -> [usize; 3] {
        let c = self.continuous_index(p);
        let mut out = [0usize; 3];
        for a in 0..3 {
            out[a] = c[a].round().clamp(0.0, (self.dims[a] - 1) as f64) as usize;
        }
        out
    }

    /// World-space corners (min, max) of the voxel-center hull.
    pub fn bounds(&self) -> (Vec3, Vec3) {
        let hi = [self.dims[0] - 1, self.dims[1] - 1, self.dims[2] - 1];
        (self.world([0, 0, 0]), self.world(hi))
    }

    pub fn contains(&self, p: &Vec3) -> bool {
        let c = self.continuous_index(p);
        (0..3).all(|a| c[a] >= -HULL_EPS && c[a] <= (self.dims[a] - 1) as f64 + HULL_EPS)
    }

    /// Interpolation stencil at `p`, or `None` outside the voxel-center hull.
    pub fn stencil(&self, p: &Vec3) -> Option<Stencil> {
        let c = self.continuous_index(p);
        let mut base = [0usize; 3];
        let mut frac = [0f64; 3];
        for a in 0..3 {
            let hi = (self.dims[a] - 1) as f64;
            if !(c[a] >= -HULL_EPS && c[a] <= hi + HULL_EPS) {
                return None;
            }
            let ca = c[a].clamp(0.0, hi);
            // keep base + 1 inside the grid; on the last plane the upper weight is zero
            let b = (ca.floor() as usize).min(self.dims[a].saturating_sub(2));
            base[a] = b;
            frac[a] = ca - b as f64;
        }
        let step = [
            usize::from(self.dims[0] > 1),
            if self.dims[1] > 1 { self.dims[0] } else { 0 },
            if self.dims[2] > 1 {
                self.dims[0] * self.dims[1]
            } else {
                0
            },
        ];
        let i0 = self.index(base[0], base[1], base[2]);
        let mut index = [0usize; 8];
        let mut weight = [0f64; 8];
        for corner in 0..8 {
            let mut idx = i0;
            let mut w = 1.0;
            for a in 0..3 {
                if corner >> a & 1 == 1 {
                    idx += step[a];
                    w *= frac[a];
                } else {
                    w *= 1.0 - frac[a];
                }
            }
            index[corner] = idx;
            weight[corner] = w;
        }
        Some(Stencil { index, weight })
    }
}

/// Dense scalar field on an axis-aligned lattice.
#[derive(Debug, Clone, PartialEq)]
pub struct VolumeGrid {
    geometry: Geometry,
    data: Vec<f64>,
}

impl VolumeGrid {
    pub fn new(geometry: Geometry, data: Vec<f64>) -> Result<Self, VolumeError> {
        geometry.validate()?;
        if data.len() != geometry.len() {
            return Err(VolumeError::LengthMismatch {
                expected: geometry.len(),
                actual: data.len(),
            });
        }
        if let Some(index) = data.iter().position(|v| !v.is_finite()) {
            return Err(VolumeError::NonFinite { index });
        }
        Ok(VolumeGrid { geometry, data })
    }

    pub fn zeros(geometry: Geometry) -> Self {
        VolumeGrid {
            data: vec![0.0; geometry.len()],
            geometry,
        }
    }

    /// Fills the grid by evaluating `f` at every voxel center (world mm).
    pub fn from_world_fn(geometry: Geometry, f: impl Fn(&Vec3) -> f64) -> Result<Self, VolumeError> {
        let data = (0..geometry.len())
            .map(|i| f(&geometry.world(geometry.coords(i))))
            .collect();
        VolumeGrid::new(geometry, data)
    }

    pub fn geometry(&self) -> &Geometry {
        &self.geometry
    }

    pub fn dims(&self) -> [usize; 3] {
        self.geometry.dims
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub(crate) fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    pub fn get(&self, x: usize, y: usize, z: usize) -> f64 {
        self.data[self.geometry.index(x, y, z)]
    }

    /// Trilinear interpolation at world point `p`; zero outside the grid.
    pub fn sample(&self, p: &Vec3) -> f64 {
        self.geometry
            .stencil(p)
            .map_or(0.0, |s| self.sample_stencil(&s))
    }

    #[inline]
    pub fn sample_stencil(&self, s: &Stencil) -> f64 {
        s.index
            .iter()
            .zip(&s.weight)
            .map(|(&i, &w)| if w == 0.0 { 0.0 } else { w * self.data[i] })
            .sum()
    }

    /// Largest value and the first voxel (in storage order) holding it.
    pub fn argmax(&self) -> ([usize; 3], f64) {
        let (idx, val) = self
            .data
            .iter()
            .enumerate()
            .fold((0, f64::NEG_INFINITY), |(bi, bv), (i, &v)| {
                if v > bv {
                    (i, v)
                } else {
                    (bi, bv)
                }
            });
        (self.geometry.coords(idx), val)
    }

    pub fn max_value(&self) -> f64 {
        self.argmax().1
    }

    /// Inclusive voxel bounds of the non-zero region, or `None` if all zero.
    pub fn support(&self) -> Option<([usize; 3], [usize; 3])> {
        let mut lo = [usize::MAX; 3];
        let mut hi = [0usize; 3];
        let mut any = false;
        for (i, &v) in self.data.iter().enumerate() {
            if v != 0.0 {
                any = true;
                let c = self.geometry.coords(i);
                for a in 0..3 {
                    lo[a] = lo[a].min(c[a]);
                    hi[a] = hi[a].max(c[a]);
                }
            }
        }
        any.then_some((lo, hi))
    }

    /// Voxelwise sum. Panics if the geometries differ.
    pub fn add_assign(&mut self, other: &VolumeGrid) {
        assert_eq!(self.geometry, other.geometry, "geometry mismatch in add");
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += b;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn geom(dims: [usize; 3]) -> Geometry {
        Geometry::new(dims, [2.0, 1.5, 3.0], [-4.0, 10.0, 0.5]).unwrap()
    }

    #[test]
    fn rejects_bad_geometry_and_data() {
        assert!(Geometry::new([0, 1, 1], [1.0; 3], [0.0; 3]).is_err());
        assert!(Geometry::new([1, 1, 1], [1.0, 0.0, 1.0], [0.0; 3]).is_err());
        let g = geom([2, 2, 2]);
        assert!(matches!(
            VolumeGrid::new(g, vec![0.0; 7]),
            Err(VolumeError::LengthMismatch { .. })
        ));
        let mut d = vec![0.0; 8];
        d[3] = f64::NAN;
        assert!(matches!(
            VolumeGrid::new(g, d),
            Err(VolumeError::NonFinite { index: 3 })
        ));
    }

    #[test]
    fn sample_reproduces_nodes() {
        let g = geom([3, 4, 5]);
        let grid = VolumeGrid::new(g, (0..60).map(|i| i as f64 * 0.25).collect()).unwrap();
        for i in 0..60 {
            let p = g.world(g.coords(i));
            assert!((grid.sample(&p) - grid.data()[i]).abs() < 1e-12);
        }
    }

    #[test]
    fn sample_midpoint_is_average() {
        let g = Geometry::new([2, 1, 1], [1.0; 3], [0.0; 3]).unwrap();
        let grid = VolumeGrid::new(g, vec![0.0, 1.0]).unwrap();
        assert!((grid.sample(&Vec3::new(0.5, 0.0, 0.0)) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn sample_outside_is_zero() {
        let g = geom([3, 3, 3]);
        let grid = VolumeGrid::new(g, vec![1.0; 27]).unwrap();
        let (lo, hi) = g.bounds();
        assert_eq!(grid.sample(&(lo - Vec3::new(1.0, 0.0, 0.0))), 0.0);
        assert_eq!(grid.sample(&(hi + Vec3::new(0.0, 0.0, 1.0))), 0.0);
        assert!((grid.sample(&hi) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn argmax_and_support() {
        let g = geom([4, 4, 4]);
        let mut grid = VolumeGrid::zeros(g);
        assert!(grid.support().is_none());
        let i = g.index(1, 2, 3);
        grid.data_mut()[i] = 5.0;
        grid.data_mut()[g.index(2, 2, 3)] = 1.0;
        assert_eq!(grid.argmax(), ([1, 2, 3], 5.0));
        assert_eq!(grid.support(), Some(([1, 2, 3], [2, 2, 3])));
    }
}
