//! Equilibrium pressure-route comparison: the scalar virial pressure versus
//! the control-volume (face) pressure of the whole periodic box, with
//! percentage-discrepancy convergence and block-averaged noise estimates.

use std::path::Path;

use crate::config::RunConfig;
use crate::cv_budget::{AccountOpts, Accountant};
use crate::dynamics::init_fcc;
use crate::error::Result;
use crate::grid::CvGrid;
use crate::harness::driver::Sim;
use crate::harness::output::{Csv, F};
use crate::lcv::Face;
use crate::pressure::{block_std, cv_scalar, percentage_discrepancy, virial_sample, VirialAccumulator};

#[derive(Clone, Debug)]
pub struct Case2Summary {
    pub kappa_vir: f64,
    pub conf_vir: f64,
    pub pi_vir: f64,
    pub kappa_cv: f64,
    pub conf_cv: f64,
    pub pi_cv: f64,
    pub pd_total_end: f64,
    pub pd_total_half: f64,
    pub pd_kappa_end: f64,
    pub mean_temperature: f64,
    pub sd_kappa_vir: f64,
    pub sd_conf_vir: f64,
    pub sd_kappa_cv: f64,
    pub sd_conf_cv: f64,
    /// Configurational pressure of the starting lattice (must be zero for
    /// the FCC start).
    pub initial_conf: f64,
}

/// Raw whole-box face sums used to form block values by differencing.
#[derive(Clone, Copy, Default)]
struct FaceSums {
    kin: f64,
    traction: f64,
}

fn face_sums(acc: &Accountant) -> FaceSums {
    let led = acc.ledger(0);
    let mut s = FaceSums::default();
    for face in Face::ALL {
        let fl = &led.faces[face.index()];
        s.kin += fl.kinetic_sum[face.axis];
        s.traction += fl.traction_sum[face.axis];
    }
    s
}

pub fn run_case2(cfg: &RunConfig, out: Option<&Path>) -> Result<Case2Summary> {
    let (state, sim_box) = init_fcc(cfg.density, cfg.n_molecules, cfg.temperature, cfg.seed)?;
    let volume = sim_box.volume();
    let area6: f64 = {
        // Sum of the six face areas (cubic box: 6 L^2).
        let l = sim_box.lengths;
        2.0 * (l.y * l.z + l.x * l.z + l.x * l.y)
    };

    let grid = CvGrid::full_box(sim_box.lengths, sim_box.periodic, [1, 1, 1])?;
    let mut acc = Accountant::new(grid, sim_box, AccountOpts { faces: true, va: false });
    let mut sim = Sim::new(state, sim_box, cfg.dt, None)?;

    let initial_conf = virial_sample(&sim.state, &sim.forces.pairs).1 / (3.0 * volume);

    acc.open_window(&sim.state, &sim.forces);
    let mut virial = VirialAccumulator::default();
    let mut temp_sum = 0.0f64;

    let mut series: Vec<(u64, f64, [f64; 6], f64, f64, f64)> = Vec::new();
    let mut block_marks: Vec<(FaceSums, f64, f64)> = vec![(FaceSums::default(), 0.0, 0.0)];
    let mut vir_kin_cum = 0.0f64;
    let mut vir_conf_cum = 0.0f64;

    let sample_every = cfg.sample_every.max(1) * 25;
    let block_steps = (cfg.block_len as u64).max(2);

    for step in 1..=cfg.steps {
        sim.step(&mut [&mut acc])?;
        virial.add(&sim.state, &sim.forces.pairs);
        let (kin, conf) = virial_sample(&sim.state, &sim.forces.pairs);
        vir_kin_cum += kin;
        vir_conf_cum += conf;
        temp_sum += sim.state.kinetic_temperature();

        if step % block_steps == 0 {
            block_marks.push((face_sums(&acc), vir_kin_cum, vir_conf_cum));
        }
        if step % sample_every == 0 || step == cfg.steps {
            let (kappa_vir, conf_vir, pi_vir) = virial.scalar(volume);
            let fs = acc.face_time_averages(0)?;
            let (kappa_cv, conf_cv, pi_cv) = cv_scalar(&fs);
            let pd_k = percentage_discrepancy(kappa_cv, kappa_vir).unwrap_or(f64::NAN);
            let pd_c = percentage_discrepancy(conf_cv, conf_vir).unwrap_or(f64::NAN);
            let pd_t = percentage_discrepancy(pi_cv, pi_vir).unwrap_or(f64::NAN);
            series.push((
                step,
                sim.state.time,
                [kappa_vir, conf_vir, kappa_cv, conf_cv, pi_vir, pi_cv],
                pd_k,
                pd_c,
                pd_t,
            ));
        }
    }

    // Block values by differencing the cumulative sums at block boundaries.
    let n_blocks = block_marks.len() - 1;
    let tau_block = block_steps as f64 * cfg.dt;
    let mut blocks_kappa_cv = Vec::with_capacity(n_blocks);
    let mut blocks_conf_cv = Vec::with_capacity(n_blocks);
    let mut blocks_kappa_vir = Vec::with_capacity(n_blocks);
    let mut blocks_conf_vir = Vec::with_capacity(n_blocks);
    for w in block_marks.windows(2) {
        let dk = w[1].0.kin - w[0].0.kin;
        let dtr = w[1].0.traction - w[0].0.traction;
        blocks_kappa_cv.push(dk / (area6 * tau_block));
        blocks_conf_cv.push(dtr / (area6 * block_steps as f64));
        blocks_kappa_vir.push((w[1].1 - w[0].1) / (3.0 * volume * block_steps as f64));
        blocks_conf_vir.push((w[1].2 - w[0].2) / (3.0 * volume * block_steps as f64));
    }
    let sd = |v: &[f64]| block_std(v, 1).unwrap_or(f64::NAN);

    let (kappa_vir, conf_vir, pi_vir) = virial.scalar(volume);
    let fs = acc.face_time_averages(0)?;
    let (kappa_cv, conf_cv, pi_cv) = cv_scalar(&fs);
    let half_idx = series
        .iter()
        .position(|s| s.0 >= cfg.steps / 2)
        .unwrap_or(series.len().saturating_sub(1));
    let pd_total_half = series[half_idx].5;
    let pd_total_end = series.last().map(|s| s.5).unwrap_or(f64::NAN);
    let pd_kappa_end = series.last().map(|s| s.3).unwrap_or(f64::NAN);

    if let Some(dir) = out {
        let mut csv = Csv::create(
            &dir.join("case2_scalar_pressure.csv"),
            &["step", "time", "kappa_vir", "sigma_vir", "kappa_cv", "sigma_cv", "pi_vir", "pi_cv", "pd_kappa", "pd_sigma", "pd_total"],
        )?;
        for (step, t, v, pd_k, pd_c, pd_t) in &series {
            csv.row(format_args!(
                "{step},{},{},{},{},{},{},{},{},{},{}",
                F(*t),
                F(v[0]),
                F(v[1]),
                F(v[2]),
                F(v[3]),
                F(v[4]),
                F(v[5]),
                F(*pd_k),
                F(*pd_c),
                F(*pd_t)
            ))?;
        }
        csv.finish()?;

        let mut csv = Csv::create(
            &dir.join("case2_blocks.csv"),
            &["block", "kappa_vir", "sigma_vir", "kappa_cv", "sigma_cv"],
        )?;
        for b in 0..n_blocks {
            csv.row(format_args!(
                "{b},{},{},{},{}",
                F(blocks_kappa_vir[b]),
                F(blocks_conf_vir[b]),
                F(blocks_kappa_cv[b]),
                F(blocks_conf_cv[b])
            ))?;
        }
        csv.finish()?;
    }

    Ok(Case2Summary {
        kappa_vir,
        conf_vir,
        pi_vir,
        kappa_cv,
        conf_cv,
        pi_cv,
        pd_total_end,
        pd_total_half,
        pd_kappa_end,
        mean_temperature: temp_sum / cfg.steps.max(1) as f64,
        sd_kappa_vir: sd(&blocks_kappa_vir),
        sd_conf_vir: sd(&blocks_conf_vir),
        sd_kappa_cv: sd(&blocks_kappa_cv),
        sd_conf_cv: sd(&blocks_conf_cv),
        initial_conf,
    })
}
