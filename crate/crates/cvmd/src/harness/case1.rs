//! Bulk NVE conservation campaign: track the Accumulation / Advection /
//! Forcing ledgers of control volumes in a periodic WCA box and verify the
//! balance residuals (machine-zero momentum, integrator-limited energy).

use std::path::Path;

use crate::config::RunConfig;
use crate::cv_budget::{AccountOpts, Accountant, BalanceLine};
use crate::dynamics::init_fcc;
use crate::error::Result;
use crate::grid::CvGrid;
use crate::harness::driver::Sim;
use crate::harness::output::{Csv, F};

#[derive(Clone, Debug)]
pub struct Case1Summary {
    /// Samples x cells (16^3 grid and whole box) where mass
    /// accumulation + advection was not exactly zero.
    pub mass_violations: u64,
    pub mass_checks: u64,
    /// Largest |residual| / max(1, mean |accumulation|) over samples and
    /// momentum components of the tracked CV.
    pub max_momentum_residual_ratio: f64,
    /// mean |residual| / mean |accumulation| of the tracked CV energy.
    pub energy_error_ratio: f64,
    pub samples: usize,
    pub crossing_events: u64,
}

/// Runs the periodic-box conservation case and writes the balance series
/// (tracked CV) plus the final per-cell budget table.
pub fn run_case1(cfg: &RunConfig, out: Option<&Path>) -> Result<Case1Summary> {
    let (state, sim_box) = init_fcc(cfg.density, cfg.n_molecules, cfg.temperature, cfg.seed)?;
    let opts = AccountOpts { faces: false, va: false };
    let l = sim_box.lengths;

    // Budget grids: the configured lattice, the whole box, and a lattice
    // whose cell side equals the requested single-CV side.
    let grid_cfg = CvGrid::full_box(l, sim_box.periodic, [cfg.grid_nx, cfg.grid_ny, cfg.grid_nz])?;
    let grid_box = CvGrid::full_box(l, sim_box.periodic, [1, 1, 1])?;
    let n_track = (l.x / cfg.cv_side).round().max(1.0) as usize;
    let grid_track = CvGrid::full_box(l, sim_box.periodic, [n_track; 3])?;
    let tracked = grid_track.flat_index([n_track / 2; 3]);

    let mut acc_cfg = Accountant::new(grid_cfg, sim_box, opts);
    let mut acc_box = Accountant::new(grid_box, sim_box, opts);
    let mut acc_track = Accountant::new(grid_track, sim_box, opts);

    let mut sim = Sim::new(state, sim_box, cfg.dt, None)?;
    acc_cfg.open_window(&sim.state, &sim.forces);
    acc_box.open_window(&sim.state, &sim.forces);
    acc_track.open_window(&sim.state, &sim.forces);

    let mut series: Vec<(f64, BalanceLine, [BalanceLine; 3], BalanceLine)> = Vec::new();
    let mut mass_violations = 0u64;
    let mut mass_checks = 0u64;

    for step in 1..=cfg.steps {
        sim.step(&mut [&mut acc_cfg, &mut acc_box, &mut acc_track])?;
        if step % cfg.sample_every == 0 || step == cfg.steps {
            let rep = acc_track.close_window(&sim.state, &sim.forces);
            let c = &rep.cells[tracked];
            series.push((sim.state.time, c.mass, c.momentum, c.energy));
            // Exact mass balance across every cell of both checking grids.
            for acc in [&acc_cfg, &acc_box] {
                let rep = acc.close_window(&sim.state, &sim.forces);
                for cell in &rep.cells {
                    mass_checks += 1;
                    if cell.mass.accumulation + cell.mass.advection != 0.0 {
                        mass_violations += 1;
                    }
                }
            }
        }
    }

    // Residual statistics of the tracked CV.
    let n = series.len().max(1) as f64;
    let mut mean_abs_acc_mom = [0.0f64; 3];
    let mut mean_abs_acc_en = 0.0f64;
    let mut mean_abs_res_en = 0.0f64;
    for (_, _, mom, en) in &series {
        for axis in 0..3 {
            mean_abs_acc_mom[axis] += mom[axis].accumulation.abs() / n;
        }
        mean_abs_acc_en += en.accumulation.abs() / n;
        mean_abs_res_en += en.residual().abs() / n;
    }
    let mut max_ratio = 0.0f64;
    for (_, _, mom, _) in &series {
        for axis in 0..3 {
            let ratio = mom[axis].residual().abs() / mean_abs_acc_mom[axis].max(1.0);
            max_ratio = max_ratio.max(ratio);
        }
    }
    let energy_error_ratio = mean_abs_res_en / mean_abs_acc_en.max(f64::MIN_POSITIVE);

    if let Some(dir) = out {
        let mut csv = Csv::create(
            &dir.join("case1_balance_series.csv"),
            &["time", "quantity", "accumulation", "advection", "forcing", "residual"],
        )?;
        for (t, mass, mom, en) in &series {
            csv.row(format_args!(
                "{},mass,{},{},{},{}",
                F(*t),
                F(mass.accumulation),
                F(mass.advection),
                F(mass.forcing),
                F(mass.residual())
            ))?;
            for (axis, name) in ["momx", "momy", "momz"].iter().enumerate() {
                csv.row(format_args!(
                    "{},{name},{},{},{},{}",
                    F(*t),
                    F(mom[axis].accumulation),
                    F(mom[axis].advection),
                    F(mom[axis].forcing),
                    F(mom[axis].residual())
                ))?;
            }
            csv.row(format_args!(
                "{},energy,{},{},{},{}",
                F(*t),
                F(en.accumulation),
                F(en.advection),
                F(en.forcing),
                F(en.residual())
            ))?;
        }
        csv.finish()?;

        let rep = acc_cfg.close_window(&sim.state, &sim.forces);
        let mut csv = Csv::create(
            &dir.join("case1_budgets.csv"),
            &["cell_ix", "cell_iy", "cell_iz", "quantity", "accumulation", "advection", "forcing", "residual"],
        )?;
        for cell in &rep.cells {
            let [ix, iy, iz] = cell.index;
            let mut put = |name: &str, line: &BalanceLine| {
                csv.row(format_args!(
                    "{ix},{iy},{iz},{name},{},{},{},{}",
                    F(line.accumulation),
                    F(line.advection),
                    F(line.forcing),
                    F(line.residual())
                ))
            };
            put("mass", &cell.mass)?;
            put("momx", &cell.momentum[0])?;
            put("momy", &cell.momentum[1])?;
            put("momz", &cell.momentum[2])?;
            put("energy", &cell.energy)?;
        }
        csv.finish()?;
    }

    let crossing_events = acc_track.ledger(tracked).crossing_events;
    Ok(Case1Summary {
        mass_violations,
        mass_checks,
        max_momentum_residual_ratio: max_ratio,
        energy_error_ratio,
        samples: series.len(),
        crossing_events,
    })
}
