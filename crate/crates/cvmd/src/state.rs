//! Simulation state: positions, half-step momenta, species tags and
//! thermostat variables.

use crate::geom::{BoxSpec, Vec3};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Species {
    Fluid,
    WallBottom,
    WallTop,
}

/// Full dynamical state of one trajectory.
///
/// Positions are stored wrapped into the box. Momenta are laboratory-frame
/// values staggered half a step behind the positions per the leapfrog
/// convention: after a completed step the stored momentum is the one that
/// produced the stored position. `step_disp` keeps the unwrapped displacement
/// of the most recent position update so that surface-crossing geometry sees
/// the true straight-line path.
#[derive(Clone, Debug)]
pub struct SimState {
    pub positions: Vec<Vec3>,
    pub momenta: Vec<Vec3>,
    pub masses: Vec<f64>,
    pub tags: Vec<Species>,
    pub tether_sites: Vec<Option<Vec3>>,
    pub step_disp: Vec<Vec3>,
    pub time: f64,
    pub xi_bottom: f64,
    pub xi_top: f64,
}

impl SimState {
    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    pub fn kinetic_energy(&self) -> f64 {
        self.momenta
            .iter()
            .zip(&self.masses)
            .map(|(p, m)| p.norm2() / (2.0 * m))
            .sum()
    }

    /// Instantaneous kinetic temperature, 3N degrees of freedom.
    pub fn kinetic_temperature(&self) -> f64 {
        2.0 * self.kinetic_energy() / (3.0 * self.len() as f64)
    }

    pub fn total_momentum(&self) -> Vec3 {
        let mut p = Vec3::ZERO;
        for q in &self.momenta {
            p += *q;
        }
        p
    }

    /// Sanity checks used by the harness before long runs.
    pub fn validate(&self, sim_box: &BoxSpec) -> bool {
        let n = self.len();
        if self.momenta.len() != n
            || self.masses.len() != n
            || self.tags.len() != n
            || self.tether_sites.len() != n
        {
            return false;
        }
        for (i, p) in self.positions.iter().enumerate() {
            if !p.is_finite() {
                return false;
            }
            for axis in 0..3 {
                if sim_box.periodic[axis] && (p[axis] < 0.0 || p[axis] >= sim_box.lengths[axis]) {
                    return false;
                }
            }
            let has_site = self.tether_sites[i].is_some();
            if (self.tags[i] == Species::Fluid) == has_site {
                return false;
            }
        }
        true
    }
}
