//! Vectors and periodic-box geometry in reduced Lennard-Jones units
//! (length, energy and mass scales all unity).

use std::ops::{Add, AddAssign, Div, Index, IndexMut, Mul, Neg, Sub, SubAssign};

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Vec3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Vec3 {
    pub const ZERO: Vec3 = Vec3 { x: 0.0, y: 0.0, z: 0.0 };

    pub fn new(x: f64, y: f64, z: f64) -> Self {
        Vec3 { x, y, z }
    }

    pub fn splat(v: f64) -> Self {
        Vec3::new(v, v, v)
    }

    pub fn dot(self, o: Vec3) -> f64 {
        self.x * o.x + self.y * o.y + self.z * o.z
    }

    pub fn norm2(self) -> f64 {
        self.dot(self)
    }

    pub fn norm(self) -> f64 {
        self.norm2().sqrt()
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }

    pub fn max_abs(self) -> f64 {
        self.x.abs().max(self.y.abs()).max(self.z.abs())
    }
}

impl Index<usize> for Vec3 {
    type Output = f64;
    fn index(&self, axis: usize) -> &f64 {
        match axis {
            0 => &self.x,
            1 => &self.y,
            2 => &self.z,
            _ => panic!("axis out of range: {axis}"),
        }
    }
}

impl IndexMut<usize> for Vec3 {
    fn index_mut(&mut self, axis: usize) -> &mut f64 {
        match axis {
            0 => &mut self.x,
            1 => &mut self.y,
            2 => &mut self.z,
            _ => panic!("axis out of range: {axis}"),
        }
    }
}

impl Add for Vec3 {
    type Output = Vec3;
    fn add(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x + o.x, self.y + o.y, self.z + o.z)
    }
}

impl Sub for Vec3 {
    type Output = Vec3;
    fn sub(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x - o.x, self.y - o.y, self.z - o.z)
    }
}

impl Neg for Vec3 {
    type Output = Vec3;
    fn neg(self) -> Vec3 {
        Vec3::new(-self.x, -self.y, -self.z)
    }
}

impl Mul<f64> for Vec3 {
    type Output = Vec3;
    fn mul(self, s: f64) -> Vec3 {
        Vec3::new(self.x * s, self.y * s, self.z * s)
    }
}

impl Div<f64> for Vec3 {
    type Output = Vec3;
    fn div(self, s: f64) -> Vec3 {
        Vec3::new(self.x / s, self.y / s, self.z / s)
    }
}

impl AddAssign for Vec3 {
    fn add_assign(&mut self, o: Vec3) {
        self.x += o.x;
        self.y += o.y;
        self.z += o.z;
    }
}

impl SubAssign for Vec3 {
    fn sub_assign(&mut self, o: Vec3) {
        self.x -= o.x;
        self.y -= o.y;
        self.z -= o.z;
    }
}

/// Small dense 3x3 matrix used for stress and pressure tensors.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Mat3 {
    pub m: [[f64; 3]; 3],
}

impl Mat3 {
    pub const ZERO: Mat3 = Mat3 { m: [[0.0; 3]; 3] };

    pub fn outer(a: Vec3, b: Vec3) -> Mat3 {
        let mut m = [[0.0; 3]; 3];
        for (r, row) in m.iter_mut().enumerate() {
            for (c, v) in row.iter_mut().enumerate() {
                *v = a[r] * b[c];
            }
        }
        Mat3 { m }
    }

    pub fn add_scaled(&mut self, o: &Mat3, w: f64) {
        for r in 0..3 {
            for c in 0..3 {
                self.m[r][c] += o.m[r][c] * w;
            }
        }
    }

    pub fn scale(&self, w: f64) -> Mat3 {
        let mut out = *self;
        for row in &mut out.m {
            for v in row {
                *v *= w;
            }
        }
        out
    }

    pub fn trace(&self) -> f64 {
        self.m[0][0] + self.m[1][1] + self.m[2][2]
    }

    pub fn max_abs_diff(&self, o: &Mat3) -> f64 {
        let mut d: f64 = 0.0;
        for r in 0..3 {
            for c in 0..3 {
                d = d.max((self.m[r][c] - o.m[r][c]).abs());
            }
        }
        d
    }
}

impl Add for Mat3 {
    type Output = Mat3;
    fn add(self, o: Mat3) -> Mat3 {
        let mut out = self;
        out.add_scaled(&o, 1.0);
        out
    }
}

impl Sub for Mat3 {
    type Output = Mat3;
    fn sub(self, o: Mat3) -> Mat3 {
        let mut out = self;
        out.add_scaled(&o, -1.0);
        out
    }
}

/// Orthorhombic simulation box with per-axis periodicity.
///
/// Wrapped coordinates live in the half-open interval `[0, L)` per periodic
/// axis; a coordinate exactly on the upper boundary belongs to the lower
/// image. Minimum-image separations live in `[-L/2, L/2)`.
#[derive(Clone, Copy, Debug)]
pub struct BoxSpec {
    pub lengths: Vec3,
    pub periodic: [bool; 3],
}

impl BoxSpec {
    pub fn cubic_periodic(l: f64) -> Self {
        BoxSpec { lengths: Vec3::splat(l), periodic: [true; 3] }
    }

    /// Periodic in x and z, bounded in y (slit channel).
    pub fn channel(l: f64) -> Self {
        BoxSpec { lengths: Vec3::splat(l), periodic: [true, false, true] }
    }

    pub fn volume(&self) -> f64 {
        self.lengths.x * self.lengths.y * self.lengths.z
    }

    /// Map a separation vector to its minimum image, component-wise in
    /// `[-L/2, L/2)` on periodic axes; non-periodic components pass through.
    pub fn min_image(&self, v: Vec3) -> Vec3 {
        let mut out = v;
        for axis in 0..3 {
            if self.periodic[axis] {
                let l = self.lengths[axis];
                out[axis] = v[axis] - l * (v[axis] / l + 0.5).floor();
            }
        }
        out
    }

    /// Wrap a position into `[0, L)` on periodic axes.
    pub fn wrap(&self, p: Vec3) -> Vec3 {
        let mut out = p;
        for axis in 0..3 {
            if self.periodic[axis] {
                let l = self.lengths[axis];
                let mut w = p[axis] - l * (p[axis] / l).floor();
                // Guard the rounding cases where w lands exactly on L or
                // infinitesimally below 0.
                if w >= l {
                    w -= l;
                }
                if w < 0.0 {
                    w = 0.0;
                }
                out[axis] = w;
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn min_image_examples() {
        let b = BoxSpec::cubic_periodic(13.68);
        let v = b.min_image(Vec3::new(13.0, 0.0, 0.0));
        assert!((v.x - (13.0 - 13.68)).abs() < 1e-12);
        assert_eq!(b.min_image(Vec3::ZERO), Vec3::ZERO);
        // Boundary maps to the lower end of the half-open interval.
        assert_eq!(b.min_image(Vec3::new(6.84, 0.0, 0.0)).x, -6.84);
    }

    #[test]
    fn wrap_examples() {
        let b = BoxSpec::cubic_periodic(13.68);
        assert!((b.wrap(Vec3::new(14.0, 1.0, 1.0)).x - 0.32).abs() < 1e-12);
        let inside = Vec3::new(3.0, 1.0, 1.0);
        assert_eq!(b.wrap(inside), inside);
        assert!((b.wrap(Vec3::new(-0.1, 1.0, 1.0)).x - 13.58).abs() < 1e-12);
        assert_eq!(b.wrap(Vec3::new(13.68, 0.0, 0.0)).x, 0.0);
    }

    #[test]
    fn non_periodic_axis_untouched() {
        let b = BoxSpec::channel(10.0);
        let p = Vec3::new(11.0, -0.5, 11.0);
        let w = b.wrap(p);
        assert_eq!(w.y, -0.5);
        assert!(w.x >= 0.0 && w.x < 10.0);
    }

    proptest! {
        #[test]
        fn wrap_idempotent(x in -100.0f64..100.0, y in -100.0f64..100.0, z in -100.0f64..100.0) {
            let b = BoxSpec::cubic_periodic(13.68);
            let w = b.wrap(Vec3::new(x, y, z));
            prop_assert!(w.x >= 0.0 && w.x < 13.68);
            prop_assert_eq!(b.wrap(w), w);
        }

        #[test]
        fn min_image_idempotent_and_odd(x in -100.0f64..100.0) {
            let b = BoxSpec::cubic_periodic(13.68);
            let v = Vec3::new(x, 0.0, 0.0);
            let m = b.min_image(v);
            prop_assert!(m.x >= -6.84 && m.x < 6.84);
            prop_assert_eq!(b.min_image(m), m);
            // Oddness holds away from the half-box boundary.
            if m.x != -6.84 {
                prop_assert!((b.min_image(-v).x + m.x).abs() < 1e-9);
            }
        }
    }
}
