//! Step orchestration: forces, thermostat, budget hooks and integration in
//! the order that keeps the ledgers exactly consistent with the dynamics.

use crate::cv_budget::Accountant;
use crate::dynamics::{
    momentum_update, position_update, wall_ext_forces, xi_update, WallParams,
};
use crate::error::Result;
use crate::forces::{compute_forces, ForceField};
use crate::geom::{BoxSpec, Vec3};
use crate::state::SimState;

pub struct Sim {
    pub state: SimState,
    pub sim_box: BoxSpec,
    pub forces: ForceField,
    pub dt: f64,
    pub wall: Option<WallParams>,
    p_old: Vec<Vec3>,
    r_old: Vec<Vec3>,
    ext: Vec<Vec3>,
}

impl Sim {
    pub fn new(state: SimState, sim_box: BoxSpec, dt: f64, wall: Option<WallParams>) -> Result<Self> {
        let n = state.len();
        let forces = compute_forces(&state, &sim_box)?;
        Ok(Sim {
            state,
            sim_box,
            forces,
            dt,
            wall,
            p_old: vec![Vec3::ZERO; n],
            r_old: vec![Vec3::ZERO; n],
            ext: vec![Vec3::ZERO; n],
        })
    }

    /// Advance one leapfrog step, feeding every accountant. The sequence is
    /// kick (with tether + thermostat forces on walls), forcing ledgers at
    /// the pre-step positions, thermostat variable update, drift with
    /// crossing detection, fresh forces, and energy-event commit.
    pub fn step(&mut self, accountants: &mut [&mut Accountant]) -> Result<()> {
        let dt = self.dt;
        if let Some(wp) = &self.wall {
            self.ext = wall_ext_forces(&self.state, wp);
        }
        self.p_old.copy_from_slice(&self.state.momenta);
        momentum_update(&mut self.state, &self.forces.force, &self.ext, dt);
        for acc in accountants.iter_mut() {
            acc.record_forcing(&self.state, &self.forces.pairs, &self.ext, &self.p_old, dt);
        }
        let u0 = if let Some(wp) = &self.wall {
            xi_update(&mut self.state, wp, dt);
            wp.u0
        } else {
            0.0
        };
        self.r_old.copy_from_slice(&self.state.positions);
        position_update(&mut self.state, &self.sim_box, u0, dt);
        for acc in accountants.iter_mut() {
            acc.record_advection(&self.r_old, &self.state);
        }
        self.forces = compute_forces(&self.state, &self.sim_box)?;
        for acc in accountants.iter_mut() {
            acc.finish_step(&self.state, &self.forces);
        }
        Ok(())
    }

    /// Total energy with the half-step kinetic convention.
    pub fn total_energy(&self) -> f64 {
        self.state.kinetic_energy() + self.forces.potential_energy()
    }
}
