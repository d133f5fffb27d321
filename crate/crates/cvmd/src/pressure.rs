//! Pressure routes: virial scalar, volume-average tensor, method-of-planes
//! face tensor, the control-volume scalar pressure, linear midpoint
//! reconstruction, and convergence statistics.
//!
//! Everywhere the decomposition is Pi = kappa - sigma, with sigma the
//! traction (force-only) stress; the reported configurational quantities are
//! the positive pressure contributions -tr(sigma)/3 etc., matching the sign
//! the virial route produces for a repulsive fluid.

use crate::cv_budget::{Accountant, FaceStress};
use crate::error::{CvmdError, Result};
use crate::forces::PairRecord;
use crate::geom::Mat3;
use crate::lcv::Face;
use crate::state::SimState;

/// Kinetic/configurational split of a pressure tensor, Pi = kappa - sigma.
#[derive(Clone, Copy, Debug, Default)]
pub struct PressureTensor {
    pub kinetic: Mat3,
    /// Configurational stress sigma (tractions); negative diagonal for a
    /// compressed repulsive fluid.
    pub sigma: Mat3,
    /// Advective momentum flux rho u u, reported separately.
    pub advection: Mat3,
}

impl PressureTensor {
    pub fn total(&self) -> Mat3 {
        self.kinetic - self.sigma
    }
}

/// Accumulator for the scalar virial pressure of a homogeneous periodic
/// system, time-averaged over a window.
#[derive(Clone, Debug, Default)]
pub struct VirialAccumulator {
    kin_sum: f64,
    conf_sum: f64,
    samples: u64,
}

/// One sample of the virial sums: kinetic `sum p.p/m` and configurational
/// `sum f_ij . r_ij` over unordered pairs.
pub fn virial_sample(state: &SimState, pairs: &[PairRecord]) -> (f64, f64) {
    let kin: f64 = state
        .momenta
        .iter()
        .zip(&state.masses)
        .map(|(p, &m)| p.norm2() / m)
        .sum();
    let conf: f64 = pairs.iter().map(|p| p.f.dot(p.r_ij)).sum();
    (kin, conf)
}

impl VirialAccumulator {
    pub fn add(&mut self, state: &SimState, pairs: &[PairRecord]) {
        let (kin, conf) = virial_sample(state, pairs);
        self.kin_sum += kin;
        self.conf_sum += conf;
        self.samples += 1;
    }

    /// Time-averaged (kappa, configurational, total) scalar pressures.
    pub fn scalar(&self, volume: f64) -> (f64, f64, f64) {
        let n = self.samples.max(1) as f64;
        let kappa = self.kin_sum / (3.0 * volume * n);
        let conf = self.conf_sum / (3.0 * volume * n);
        (kappa, conf, kappa + conf)
    }

    pub fn samples(&self) -> u64 {
        self.samples
    }
}

/// Scalar CV pressure from the six normal face-pressure components,
/// `(1/6) sum over faces of P_nn`, split into kinetic and configurational
/// parts. Returns (kappa, configurational, total).
pub fn cv_scalar(fs: &FaceStress) -> (f64, f64, f64) {
    let mut kappa = 0.0;
    let mut conf = 0.0;
    for face in Face::ALL {
        let e = &fs.faces[face.index()];
        kappa += e.kinetic[face.axis];
        conf -= e.traction[face.axis];
    }
    (kappa / 6.0, conf / 6.0, (kappa + conf) / 6.0)
}

/// Volume-average pressure tensor of one cell over the accountant's window.
///
/// Kinetic part from peculiar momenta (window streaming velocity removed in
/// one pass), configurational part from the length-fraction weighted pair
/// dyads, advection rho u u reported separately.
pub fn va_tensor(acc: &Accountant, flat: usize) -> PressureTensor {
    let led = acc.ledger(flat);
    let n_tau = acc.steps().max(1) as f64;
    let vol = acc.grid.cell_volume(acc.grid.unflatten(flat));
    let norm = 1.0 / (vol * n_tau);
    let mut kinetic = led.sum_pp;
    let mut advection = Mat3::ZERO;
    if led.sum_mass > 0.0 {
        let u = led.sum_mom / led.sum_mass;
        advection.add_scaled(&Mat3::outer(led.sum_mom, u), 1.0);
        kinetic.add_scaled(&advection, -1.0);
    }
    // sigma = -(1/V Ntau) sum f r l; store sigma itself.
    let sigma = led.va_conf.scale(-norm);
    PressureTensor {
        kinetic: kinetic.scale(norm),
        sigma,
        advection: advection.scale(norm),
    }
}

/// Method-of-planes face pressures of one cell (kinetic, traction and total
/// per face) over the accountant's window.
pub fn mop_face_tensor(acc: &Accountant, flat: usize) -> Result<FaceStress> {
    if acc.steps() == 0 {
        return Err(CvmdError::Domain("empty measurement window".into()));
    }
    acc.face_time_averages(flat)
}

/// Linear (shape-function) reconstruction of a stress component at the cell
/// center from the two opposing face values.
pub fn midpoint_stress_linear(minus_face: f64, plus_face: f64) -> f64 {
    0.5 * (minus_face + plus_face)
}

/// Standard deviation over non-overlapping block means.
pub fn block_std(series: &[f64], block_len: usize) -> Result<f64> {
    if block_len == 0 || series.len() < 2 * block_len {
        return Err(CvmdError::ShortSeries { len: series.len(), block: block_len });
    }
    let n_blocks = series.len() / block_len;
    let means: Vec<f64> = (0..n_blocks)
        .map(|b| {
            let s: f64 = series[b * block_len..(b + 1) * block_len].iter().sum();
            s / block_len as f64
        })
        .collect();
    let mean = means.iter().sum::<f64>() / n_blocks as f64;
    let var = means.iter().map(|m| (m - mean) * (m - mean)).sum::<f64>() / n_blocks as f64;
    Ok(var.sqrt())
}

/// Percentage discrepancy 100 |a - b| / b.
pub fn percentage_discrepancy(a: f64, b: f64) -> Result<f64> {
    if b == 0.0 {
        return Err(CvmdError::Domain("percentage discrepancy with zero reference".into()));
    }
    Ok(100.0 * (a - b).abs() / b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cv_budget::FaceStressEntry;
    use crate::geom::Vec3;

    #[test]
    fn cv_scalar_shapes() {
        let mut fs = FaceStress::default();
        assert_eq!(cv_scalar(&fs), (0.0, 0.0, 0.0));
        for face in Face::ALL {
            let mut kinetic = Vec3::ZERO;
            let mut traction = Vec3::ZERO;
            kinetic[face.axis] = 0.52;
            traction[face.axis] = -4.0;
            fs.faces[face.index()] = FaceStressEntry { traction, kinetic, advection: Vec3::ZERO };
        }
        let (k, c, t) = cv_scalar(&fs);
        assert!((k - 0.52).abs() < 1e-15);
        assert!((c - 4.0).abs() < 1e-15);
        assert!((t - 4.52).abs() < 1e-15);
    }

    #[test]
    fn midpoint_is_mean() {
        assert_eq!(midpoint_stress_linear(3.0, 3.0), 3.0);
        assert_eq!(midpoint_stress_linear(1.0, 2.0), 1.5);
    }

    #[test]
    fn block_std_basics() {
        assert_eq!(block_std(&[5.0; 100], 10).unwrap(), 0.0);
        let alternating: Vec<f64> = (0..100).map(|i| if i % 2 == 0 { 1.0 } else { -1.0 }).collect();
        assert_eq!(block_std(&alternating, 2).unwrap(), 0.0);
        assert!(block_std(&[1.0, 2.0, 3.0], 2).is_err());
        assert!(block_std(&[1.0; 10], 0).is_err());
    }

    #[test]
    fn block_std_white_noise() {
        // Uncorrelated +/-1 sequence: SD of block means ~ 1/sqrt(block_len).
        let mut x = 0x9e3779b97f4a7c15u64;
        let series: Vec<f64> = (0..131072)
            .map(|_| {
                x ^= x << 13;
                x ^= x >> 7;
                x ^= x << 17;
                if x & 1 == 0 {
                    1.0
                } else {
                    -1.0
                }
            })
            .collect();
        let sd = block_std(&series, 64).unwrap();
        let expect = 1.0 / 64.0f64.sqrt();
        assert!((sd - expect).abs() < 0.15 * expect, "sd {sd} vs {expect}");
    }

    #[test]
    fn percentage_discrepancy_basics() {
        assert_eq!(percentage_discrepancy(1.0, 1.0).unwrap(), 0.0);
        assert!((percentage_discrepancy(1.001, 1.0).unwrap() - 0.1).abs() < 1e-9);
        assert!(percentage_discrepancy(1.0, 0.0).is_err());
    }
}
