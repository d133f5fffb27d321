//! Geometry kernels for cuboidal control volumes: point membership,
//! segment/face crossings, pair-line face incidences and in-volume segment
//! fractions.
//!
//! All membership tests use half-open intervals `[lo, hi)` per axis, so a
//! coordinate exactly on a face belongs to the upper neighbour. This replaces
//! the measure-zero H(0) = 1/2 convention with one that is deterministic in
//! floating point and makes an exit from one cell of a tiling exactly an
//! entry into the adjacent cell.
//!
//! Crossings and incidences are produced by a single "region march" along the
//! segment: each axis carries a three-state label (below / inside / above of
//! the slab), plane-crossing events flip one axis label, and a crossing of
//! the volume boundary is recorded exactly when the combined state enters or
//! leaves all-inside. Simultaneous plane crossings (corner hits) are
//! processed in fixed axis order x, y, z. Built this way, the identity
//! theta_i - theta_j = -sum of signed face incidences holds for every input,
//! boundary cases included.

use crate::error::{CvmdError, Result};
use crate::geom::Vec3;

/// One of the six faces of a cuboid, identified by normal axis and side.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Face {
    pub axis: usize,
    /// `true` for the `+` face (upper plane), `false` for `-`.
    pub positive: bool,
}

impl Face {
    pub const ALL: [Face; 6] = [
        Face { axis: 0, positive: false },
        Face { axis: 0, positive: true },
        Face { axis: 1, positive: false },
        Face { axis: 1, positive: true },
        Face { axis: 2, positive: false },
        Face { axis: 2, positive: true },
    ];

    /// Flat index 0..6 in the order x-, x+, y-, y+, z-, z+.
    pub fn index(self) -> usize {
        2 * self.axis + usize::from(self.positive)
    }

    pub fn from_index(ix: usize) -> Face {
        Face { axis: ix / 2, positive: ix % 2 == 1 }
    }

    /// The same plane seen from the neighbouring cell across it.
    pub fn opposite(self) -> Face {
        Face { axis: self.axis, positive: !self.positive }
    }

    pub fn label(self) -> &'static str {
        ["x-", "x+", "y-", "y+", "z-", "z+"][self.index()]
    }
}

/// Axis-aligned cuboid. Face planes are the stored truth so that adjacent
/// cells constructed from shared plane values agree bitwise; center and side
/// lengths are derived.
#[derive(Clone, Copy, Debug)]
pub struct ControlVolume {
    lo: Vec3,
    hi: Vec3,
}

impl ControlVolume {
    pub fn from_bounds(lo: Vec3, hi: Vec3) -> Result<Self> {
        for axis in 0..3 {
            if !(lo[axis] < hi[axis]) {
                return Err(CvmdError::Geometry(format!(
                    "empty control volume on axis {axis}: [{}, {})",
                    lo[axis], hi[axis]
                )));
            }
        }
        Ok(ControlVolume { lo, hi })
    }

    pub fn from_center_half_widths(center: Vec3, half: Vec3) -> Result<Self> {
        Self::from_bounds(center - half, center + half)
    }

    pub fn lo(&self) -> Vec3 {
        self.lo
    }

    pub fn hi(&self) -> Vec3 {
        self.hi
    }

    pub fn center(&self) -> Vec3 {
        (self.lo + self.hi) * 0.5
    }

    pub fn side_lengths(&self) -> Vec3 {
        self.hi - self.lo
    }

    pub fn volume(&self) -> f64 {
        let s = self.side_lengths();
        s.x * s.y * s.z
    }

    /// Coordinate of a face plane along its normal axis.
    pub fn face_plane(&self, face: Face) -> f64 {
        if face.positive {
            self.hi[face.axis]
        } else {
            self.lo[face.axis]
        }
    }

    /// Area of a face (product of the two transverse side lengths).
    pub fn face_area(&self, axis: usize) -> f64 {
        let s = self.side_lengths();
        match axis {
            0 => s.y * s.z,
            1 => s.x * s.z,
            2 => s.x * s.y,
            _ => panic!("axis out of range"),
        }
    }

    /// Point-membership selection: 1 iff the point lies inside, half-open
    /// per axis.
    pub fn theta(&self, p: Vec3) -> u8 {
        for axis in 0..3 {
            if p[axis] < self.lo[axis] || p[axis] >= self.hi[axis] {
                return 0;
            }
        }
        1
    }

    fn axis_region(&self, axis: usize, x: f64) -> i8 {
        if x < self.lo[axis] {
            -1
        } else if x >= self.hi[axis] {
            1
        } else {
            0
        }
    }
}

/// A molecule trajectory segment crossing one face of a control volume.
#[derive(Clone, Copy, Debug)]
pub struct FaceCrossing {
    pub face: Face,
    /// +1 when the molecule exits the volume through this face, -1 when it
    /// enters (outward-normal convention).
    pub direction_sign: i8,
    /// Fraction of the step at which the crossing occurs.
    pub step_fraction: f64,
    pub crossing_point: Vec3,
}

impl FaceCrossing {
    /// Sign of the velocity component along the face normal axis
    /// (+1 for motion toward larger coordinates).
    pub fn motion_sign(&self) -> i8 {
        if self.face.positive {
            self.direction_sign
        } else {
            -self.direction_sign
        }
    }
}

/// Signed face incidences of a pair interaction line, together with the
/// membership difference of the endpoints.
///
/// `ds[f]` is the value of the signed surface-selection term for face `f`:
/// -1 when the i->j segment crosses that face moving toward larger
/// coordinates, +1 moving toward smaller ones, 0 when it does not cross
/// within the face extent. The identity `theta_ij = -sum_f (ds[f+] - ds[f-])`
/// holds exactly by construction.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct PairFaceIncidence {
    pub ds: [i8; 6],
    pub theta_ij: i8,
}

impl PairFaceIncidence {
    /// Recompute theta_ij from the face terms (used by consistency checks).
    pub fn theta_from_faces(&self) -> i8 {
        let mut s = 0i8;
        for axis in 0..3 {
            s += self.ds[2 * axis + 1] - self.ds[2 * axis];
        }
        -s
    }
}

/// Plane-crossing event along a segment, prior to volume-boundary analysis.
#[derive(Clone, Copy, Debug)]
struct PlaneEvent {
    t: f64,
    axis: usize,
    /// Plane being crossed.
    positive_plane: bool,
    /// Axis region label after the event.
    region_after: i8,
}

/// Enumerate the plane-crossing events of a segment against one cuboid,
/// sorted by parameter with ties broken in axis order.
fn plane_events(cv: &ControlVolume, start: Vec3, end: Vec3) -> ([i8; 3], Vec<PlaneEvent>) {
    let mut regions = [0i8; 3];
    let mut events: Vec<PlaneEvent> = Vec::new();
    for axis in 0..3 {
        let s = start[axis];
        let e = end[axis];
        let r0 = cv.axis_region(axis, s);
        let r1 = cv.axis_region(axis, e);
        regions[axis] = r0;
        if r0 == r1 {
            continue;
        }
        let d = e - s;
        let dir: i8 = if d > 0.0 { 1 } else { -1 };
        // March region labels from r0 to r1 one plane at a time.
        let mut r = r0;
        while r != r1 {
            let next = r + dir;
            let plane_positive = (r.max(next)) == 1;
            let c = if plane_positive { cv.hi[axis] } else { cv.lo[axis] };
            let t = (c - s) / d;
            events.push(PlaneEvent {
                t: t.clamp(0.0, 1.0),
                axis,
                positive_plane: plane_positive,
                region_after: next,
            });
            r = next;
        }
    }
    events.sort_by(|a, b| a.t.partial_cmp(&b.t).unwrap().then(a.axis.cmp(&b.axis)));
    (regions, events)
}

/// All crossings of a straight molecule step with the faces of a control
/// volume, ordered by step fraction.
///
/// `start` is the wrapped position at the beginning of the step and `end`
/// the unwrapped position after it; they must describe the true straight
/// path.
pub fn face_crossings_point(start: Vec3, end: Vec3, cv: &ControlVolume) -> Vec<FaceCrossing> {
    let (mut regions, events) = plane_events(cv, start, end);
    let mut inside = regions == [0, 0, 0];
    let mut out = Vec::new();
    for ev in events {
        regions[ev.axis] = ev.region_after;
        let now_inside = regions == [0, 0, 0];
        if inside != now_inside {
            let face = Face { axis: ev.axis, positive: ev.positive_plane };
            let mut point = start + (end - start) * ev.t;
            point[ev.axis] = cv.face_plane(face);
            out.push(FaceCrossing {
                face,
                direction_sign: if now_inside { -1 } else { 1 },
                step_fraction: ev.t,
                crossing_point: point,
            });
        }
        inside = now_inside;
    }
    out
}

/// Signed face incidences for the interaction line between a molecule and
/// the minimum-image position of its partner.
pub fn face_incidence_pair(r_i: Vec3, r_j_image: Vec3, cv: &ControlVolume) -> Result<PairFaceIncidence> {
    if r_i == r_j_image {
        return Err(CvmdError::DegenerateSegment);
    }
    let mut inc = PairFaceIncidence::default();
    inc.theta_ij = cv.theta(r_i) as i8 - cv.theta(r_j_image) as i8;
    for crossing in face_crossings_point(r_i, r_j_image, cv) {
        inc.ds[crossing.face.index()] = -crossing.motion_sign();
    }
    debug_assert_eq!(inc.theta_ij, inc.theta_from_faces());
    Ok(inc)
}

/// Fraction of the segment `r_i -> r_j_image` lying inside the cuboid,
/// by analytic parametric slab clipping.
pub fn segment_inside_fraction(r_i: Vec3, r_j_image: Vec3, cv: &ControlVolume) -> Result<f64> {
    if r_i == r_j_image {
        return Err(CvmdError::DegenerateSegment);
    }
    let mut t_enter: f64 = 0.0;
    let mut t_exit: f64 = 1.0;
    for axis in 0..3 {
        let s = r_i[axis];
        let d = r_j_image[axis] - s;
        if d == 0.0 {
            if cv.axis_region(axis, s) != 0 {
                return Ok(0.0);
            }
            continue;
        }
        let mut t0 = (cv.lo[axis] - s) / d;
        let mut t1 = (cv.hi[axis] - s) / d;
        if t0 > t1 {
            std::mem::swap(&mut t0, &mut t1);
        }
        t_enter = t_enter.max(t0);
        t_exit = t_exit.min(t1);
        if t_enter >= t_exit {
            return Ok(0.0);
        }
    }
    Ok((t_exit - t_enter).clamp(0.0, 1.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn unit_cv() -> ControlVolume {
        ControlVolume::from_center_half_widths(Vec3::ZERO, Vec3::splat(0.5)).unwrap()
    }

    #[test]
    fn theta_half_open() {
        let cv = unit_cv();
        assert_eq!(cv.theta(Vec3::new(0.4, -0.2, 0.0)), 1);
        assert_eq!(cv.theta(Vec3::new(0.6, 0.0, 0.0)), 0);
        // Upper boundary excluded, lower included.
        assert_eq!(cv.theta(Vec3::new(0.5, 0.0, 0.0)), 0);
        assert_eq!(cv.theta(Vec3::new(-0.5, 0.0, 0.0)), 1);
    }

    #[test]
    fn single_face_crossing() {
        let cv = unit_cv();
        let xs = face_crossings_point(Vec3::new(0.4, 0.0, 0.0), Vec3::new(0.6, 0.0, 0.0), &cv);
        assert_eq!(xs.len(), 1);
        let c = &xs[0];
        assert_eq!(c.face, Face { axis: 0, positive: true });
        assert_eq!(c.direction_sign, 1);
        assert!((c.step_fraction - 0.5).abs() < 1e-12);
        assert_eq!(c.crossing_point.x, 0.5);
    }

    #[test]
    fn corner_crossing_tie_break() {
        // Diagonal step through the (x+, y+) edge: the x face is processed
        // first, so the exit is attributed to x+ and no y event fires.
        let cv = unit_cv();
        let xs = face_crossings_point(Vec3::new(0.45, 0.45, 0.0), Vec3::new(0.55, 0.55, 0.0), &cv);
        assert_eq!(xs.len(), 1);
        assert_eq!(xs[0].face, Face { axis: 0, positive: true });
        assert_eq!(xs[0].direction_sign, 1);
    }

    #[test]
    fn off_corner_double_crossing() {
        // Asymmetric diagonal: exits x+ strictly before the y+ plane is
        // reached (outside by then), still a single exit through x+.
        let cv = unit_cv();
        let xs = face_crossings_point(Vec3::new(0.4, 0.3, 0.0), Vec3::new(0.6, 0.55, 0.0), &cv);
        assert_eq!(xs.len(), 1);
        assert_eq!(xs[0].face, Face { axis: 0, positive: true });
    }

    #[test]
    fn interior_step_no_crossing() {
        let cv = unit_cv();
        assert!(face_crossings_point(Vec3::new(0.1, 0.2, 0.0), Vec3::new(-0.1, 0.1, 0.3), &cv)
            .is_empty());
        // Zero-length step starting on a face.
        let p = Vec3::new(0.5, 0.0, 0.0);
        assert!(face_crossings_point(p, p, &cv).is_empty());
    }

    #[test]
    fn pair_incidence_examples() {
        let cv = unit_cv();
        let inc =
            face_incidence_pair(Vec3::new(0.25, 0.0, 0.0), Vec3::new(1.25, 0.0, 0.0), &cv).unwrap();
        assert_eq!(inc.ds[Face { axis: 0, positive: true }.index()], -1);
        assert_eq!(inc.ds.iter().filter(|&&d| d != 0).count(), 1);
        assert_eq!(inc.theta_ij, 1);

        let both_in =
            face_incidence_pair(Vec3::new(0.1, 0.1, 0.1), Vec3::new(-0.1, 0.2, 0.0), &cv).unwrap();
        assert_eq!(both_in, PairFaceIncidence { ds: [0; 6], theta_ij: 0 });

        let through =
            face_incidence_pair(Vec3::new(-1.25, 0.0, 0.0), Vec3::new(1.25, 0.0, 0.0), &cv)
                .unwrap();
        assert_eq!(through.theta_ij, 0);
        assert_eq!(through.ds[0], -1); // enters at x-
        assert_eq!(through.ds[1], -1); // exits at x+
        assert_eq!(through.theta_from_faces(), 0);
    }

    #[test]
    fn pair_incidence_degenerate_is_error() {
        let cv = unit_cv();
        let p = Vec3::new(0.1, 0.0, 0.0);
        assert!(face_incidence_pair(p, p, &cv).is_err());
        assert!(segment_inside_fraction(p, p, &cv).is_err());
    }

    #[test]
    fn corner_pair_keeps_identity() {
        // Diagonal pair exactly through the corner: with H(0)=1/2 this would
        // split between two faces; here the x face takes the whole event.
        let cv = ControlVolume::from_bounds(Vec3::ZERO, Vec3::splat(1.0)).unwrap();
        let inc =
            face_incidence_pair(Vec3::new(0.5, 0.5, 0.5), Vec3::new(1.5, 1.5, 0.5), &cv).unwrap();
        assert_eq!(inc.theta_ij, 1);
        assert_eq!(inc.theta_from_faces(), 1);
        assert_eq!(inc.ds[1], -1);
    }

    #[test]
    fn fraction_examples() {
        let cv = unit_cv();
        assert_eq!(
            segment_inside_fraction(Vec3::new(0.1, 0.1, 0.1), Vec3::new(-0.2, 0.0, 0.3), &cv)
                .unwrap(),
            1.0
        );
        assert_eq!(
            segment_inside_fraction(Vec3::new(2.0, 2.0, 0.0), Vec3::new(3.0, 2.0, 0.0), &cv)
                .unwrap(),
            0.0
        );
        let f = segment_inside_fraction(Vec3::new(0.25, 0.0, 0.0), Vec3::new(1.25, 0.0, 0.0), &cv)
            .unwrap();
        assert!((f - 0.25).abs() < 1e-12);
    }

    /// Midpoint-quadrature oracle for the in-volume fraction.
    fn fraction_quadrature(a: Vec3, b: Vec3, cv: &ControlVolume, samples: usize) -> f64 {
        let mut hits = 0usize;
        for k in 0..samples {
            let s = (k as f64 + 0.5) / samples as f64;
            if cv.theta(a + (b - a) * s) == 1 {
                hits += 1;
            }
        }
        hits as f64 / samples as f64
    }

    #[test]
    fn fraction_matches_quadrature_oracle() {
        let cv = unit_cv();
        let cases = [
            (Vec3::new(0.25, 0.0, 0.0), Vec3::new(1.25, 0.0, 0.0)),
            (Vec3::new(-0.7, -0.2, 0.1), Vec3::new(0.8, 0.45, -0.3)),
            (Vec3::new(-2.0, -2.0, -2.0), Vec3::new(2.0, 1.9, 2.1)),
            (Vec3::new(0.1, 0.1, 0.1), Vec3::new(0.2, -0.3, 0.4)),
        ];
        let n = 1_000_000;
        for (a, b) in cases {
            let exact = segment_inside_fraction(a, b, &cv).unwrap();
            let approx = fraction_quadrature(a, b, &cv, n);
            assert!(
                (exact - approx).abs() <= 1.0 / n as f64 + 1e-12,
                "fraction mismatch: exact {exact}, quadrature {approx}"
            );
        }
    }

    proptest! {
        #[test]
        fn identity_theta_ij_random(
            ax in -2.0f64..2.0, ay in -2.0f64..2.0, az in -2.0f64..2.0,
            bx in -2.0f64..2.0, by in -2.0f64..2.0, bz in -2.0f64..2.0,
        ) {
            let cv = unit_cv();
            let a = Vec3::new(ax, ay, az);
            let b = Vec3::new(bx, by, bz);
            prop_assume!(a != b);
            let inc = face_incidence_pair(a, b, &cv).unwrap();
            prop_assert_eq!(inc.theta_ij, inc.theta_from_faces());
        }

        #[test]
        fn crossing_count_parity(
            ax in -2.0f64..2.0, ay in -2.0f64..2.0, az in -2.0f64..2.0,
            bx in -2.0f64..2.0, by in -2.0f64..2.0, bz in -2.0f64..2.0,
        ) {
            let cv = unit_cv();
            let a = Vec3::new(ax, ay, az);
            let b = Vec3::new(bx, by, bz);
            let xs = face_crossings_point(a, b, &cv);
            let net: i32 = xs.iter().map(|c| -(c.direction_sign as i32)).sum();
            prop_assert_eq!(cv.theta(b) as i32 - cv.theta(a) as i32, net);
            // Ordered by step fraction.
            for w in xs.windows(2) {
                prop_assert!(w[0].step_fraction <= w[1].step_fraction);
            }
        }

        #[test]
        fn translation_covariance(
            ax in -2.0f64..2.0, ay in -2.0f64..2.0, az in -2.0f64..2.0,
            bx in -2.0f64..2.0, by in -2.0f64..2.0, bz in -2.0f64..2.0,
            shift in -3.0f64..3.0,
        ) {
            // Use a power-of-two shift so translated coordinates round
            // identically and covariance is exact.
            let s = Vec3::splat((shift * 4.0).round() * 0.25);
            let cv0 = unit_cv();
            let cv1 = ControlVolume::from_bounds(cv0.lo() + s, cv0.hi() + s).unwrap();
            let a = Vec3::new(ax, ay, az);
            let b = Vec3::new(bx, by, bz);
            prop_assume!(a != b);
            let i0 = face_incidence_pair(a, b, &cv0).unwrap();
            let i1 = face_incidence_pair(a + s, b + s, &cv1).unwrap();
            prop_assert_eq!(i0.theta_ij, i1.theta_ij);
            let f0 = segment_inside_fraction(a, b, &cv0).unwrap();
            let f1 = segment_inside_fraction(a + s, b + s, &cv1).unwrap();
            prop_assert!((f0 - f1).abs() < 1e-12);
        }

        #[test]
        fn fraction_in_unit_range(
            ax in -2.0f64..2.0, ay in -2.0f64..2.0, az in -2.0f64..2.0,
            bx in -2.0f64..2.0, by in -2.0f64..2.0, bz in -2.0f64..2.0,
        ) {
            let cv = unit_cv();
            let a = Vec3::new(ax, ay, az);
            let b = Vec3::new(bx, by, bz);
            prop_assume!(a != b);
            let f = segment_inside_fraction(a, b, &cv).unwrap();
            prop_assert!((0.0..=1.0).contains(&f));
        }
    }
}
