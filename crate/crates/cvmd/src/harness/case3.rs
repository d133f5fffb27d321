//! Start-up Couette flow between tethered thermostatted walls: per-CV
//! velocity profiles against the analytic diffusion solution, VA versus MOP
//! shear-stress profiles, and the whole-liquid CV momentum balance.

use std::path::Path;

use rayon::prelude::*;

use crate::analytic::{couette_shear_stress, couette_velocity, cv_momentum_history, steady_face_force, CouetteParams};
use crate::config::RunConfig;
use crate::cv_budget::{AccountOpts, Accountant};
use crate::dynamics::{init_channel, ChannelLayout, WallParams};
use crate::error::{CvmdError, Result};
use crate::geom::Vec3;
use crate::grid::CvGrid;
use crate::harness::driver::Sim;
use crate::harness::output::{Csv, F};
use crate::lcv::Face;
use crate::pressure::va_tensor;
use crate::state::Species;

const N_BINS: usize = 16;

/// Streaming-velocity profile averaged over a half-time-unit window.
#[derive(Clone, Debug)]
pub struct ProfileRow {
    pub t: f64,
    /// Mass-weighted mean x velocity per y bin.
    pub u: [f64; N_BINS],
}

/// Shear-stress profile over the stress window, per fluid y bin.
#[derive(Clone, Debug, Default)]
pub struct StressProfile {
    pub va_xy: Vec<f64>,
    pub mop_mid_xy: Vec<f64>,
    pub mop_bottom_xy: Vec<f64>,
    pub mop_top_xy: Vec<f64>,
}

/// Whole-liquid CV balance over one output window.
#[derive(Clone, Copy, Debug, Default)]
pub struct LiquidWindow {
    pub t_mid: f64,
    pub dpdt: f64,
    pub force_top: f64,
    pub force_bottom: f64,
    pub advection_rate: f64,
    pub residual_rel: f64,
}

#[derive(Clone, Debug)]
pub struct MemberResult {
    pub profiles: Vec<ProfileRow>,
    pub stress: StressProfile,
    pub windows: Vec<LiquidWindow>,
    pub wall_temp_bottom: f64,
    pub wall_temp_top: f64,
    pub fluid_temp: f64,
}

/// Geometry shared by the runs and the analytic reference.
pub struct Geometry {
    pub layout: ChannelLayout,
    pub bin_width: f64,
    /// Global y of each bin center.
    pub bin_centers: [f64; N_BINS],
    /// Fluid bins (whole channel) and the interior subset used for analytic
    /// comparisons (two bins next to each wall excluded).
    pub fluid_bins: std::ops::Range<usize>,
    pub interior_bins: std::ops::Range<usize>,
    pub channel_l: f64,
}

pub fn geometry(cfg: &RunConfig) -> Result<Geometry> {
    let (_, layout) = init_channel(cfg.density, cfg.n_molecules, cfg.temperature, cfg.wall_cells, cfg.seed)?;
    let l = layout.sim_box.lengths.x;
    let w = l / N_BINS as f64;
    let mut centers = [0.0; N_BINS];
    for (i, c) in centers.iter_mut().enumerate() {
        *c = (i as f64 + 0.5) * w;
    }
    let (ylo, yhi) = layout.fluid_y;
    let first_fluid = (ylo / w).round() as usize;
    let last_fluid = (yhi / w).round() as usize; // exclusive
    Ok(Geometry {
        channel_l: yhi - ylo,
        layout,
        bin_width: w,
        bin_centers: centers,
        fluid_bins: first_fluid..last_fluid,
        interior_bins: (first_fluid + 2)..(last_fluid - 2),
    })
}

impl Geometry {
    /// y of a bin center measured from the bottom wall-fluid boundary.
    pub fn local_y(&self, bin: usize) -> f64 {
        self.bin_centers[bin] - self.layout.fluid_y.0
    }

    pub fn couette_params(&self, cfg: &RunConfig) -> CouetteParams {
        let l = self.layout.sim_box.lengths;
        CouetteParams {
            mu: cfg.mu,
            rho: cfg.density,
            l: self.channel_l,
            u0: cfg.u0,
            n_terms: 1000,
            dx: l.x,
            dz: l.z,
        }
    }
}

/// y-bin means of a per-cell extractor over a 16^3 grid accountant.
fn bin_mean(acc: &Accountant, mut value: impl FnMut(&Accountant, usize) -> f64) -> [f64; N_BINS] {
    let mut sums = [0.0; N_BINS];
    let mut counts = [0usize; N_BINS];
    for flat in 0..acc.grid.n_cells() {
        let [_, iy, _] = acc.grid.unflatten(flat);
        sums[iy] += value(acc, flat);
        counts[iy] += 1;
    }
    let mut out = [0.0; N_BINS];
    for i in 0..N_BINS {
        if counts[i] > 0 {
            out[i] = sums[i] / counts[i] as f64;
        }
    }
    out
}

/// Mass-weighted streaming velocity per y bin.
fn bin_velocity(acc: &Accountant) -> [f64; N_BINS] {
    let mut mom = [0.0; N_BINS];
    let mut mass = [0.0; N_BINS];
    for flat in 0..acc.grid.n_cells() {
        let [_, iy, _] = acc.grid.unflatten(flat);
        let led = acc.ledger(flat);
        mom[iy] += led.sum_mom.x;
        mass[iy] += led.sum_mass;
    }
    let mut out = [0.0; N_BINS];
    for i in 0..N_BINS {
        if mass[i] > 0.0 {
            out[i] = mom[i] / mass[i];
        }
    }
    out
}

pub fn run_member(cfg: &RunConfig, seed: u64) -> Result<MemberResult> {
    let (mut state, layout) =
        init_channel(cfg.density, cfg.n_molecules, cfg.temperature, cfg.wall_cells, seed)?;
    let sim_box = layout.sim_box;
    let q_bottom = if cfg.q_xi > 0.0 { cfg.q_xi } else { layout.n_wall_bottom as f64 * cfg.dt };
    let q_top = if cfg.q_xi > 0.0 { cfg.q_xi } else { layout.n_wall_top as f64 * cfg.dt };
    let equil_wall = WallParams {
        k4: cfg.k4,
        k6: cfg.k6,
        u0: 0.0,
        t0: cfg.temperature,
        q_xi_bottom: q_bottom,
        q_xi_top: q_top,
    };

    // Thermalize the melting lattice before the impulsive start: walls under
    // their thermostats, fluid velocity-rescaled periodically.
    state.time = 0.0;
    let mut sim = Sim::new(state, sim_box, cfg.dt, Some(equil_wall))?;
    let fluid_idx: Vec<usize> =
        (0..sim.state.len()).filter(|&i| sim.state.tags[i] == Species::Fluid).collect();
    for step in 1..=cfg.equil_steps {
        sim.step(&mut [])?;
        if step % 100 == 0 {
            let mut net = Vec3::ZERO;
            for &i in &fluid_idx {
                net += sim.state.momenta[i];
            }
            let shift = net / fluid_idx.len() as f64;
            let mut ke = 0.0;
            for &i in &fluid_idx {
                sim.state.momenta[i] -= shift;
                ke += sim.state.momenta[i].norm2() / (2.0 * sim.state.masses[i]);
            }
            let scale = (1.5 * fluid_idx.len() as f64 * cfg.temperature / ke).sqrt();
            for &i in &fluid_idx {
                sim.state.momenta[i] = sim.state.momenta[i] * scale;
            }
        }
    }

    // Impulsive start: top wall slides at U0 from t = 0.
    sim.state.time = 0.0;
    sim.wall = Some(WallParams { u0: cfg.u0, ..equil_wall });
    for i in 0..sim.state.len() {
        if sim.state.tags[i] == Species::WallTop {
            sim.state.momenta[i].x += sim.state.masses[i] * cfg.u0;
        }
    }

    // Accountants: whole-liquid CV (always on), 16^3 profile windows around
    // each requested time, 16^3 VA/MOP stress window.
    let (ylo, yhi) = layout.fluid_y;
    let liquid_grid = CvGrid::new(
        Vec3::new(0.0, ylo, 0.0),
        Vec3::new(sim_box.lengths.x, yhi, sim_box.lengths.z),
        [1, 1, 1],
        [true, false, true],
    )?;
    let mut liquid = Accountant::new(liquid_grid, sim_box, AccountOpts { faces: true, va: false });
    liquid.open_window(&sim.state, &sim.forces);

    let full_grid = || CvGrid::full_box(sim_box.lengths, sim_box.periodic, [N_BINS; 3]);
    let mut profile_acc = Accountant::new(full_grid()?, sim_box, AccountOpts { faces: false, va: false });
    let mut stress_acc = Accountant::new(full_grid()?, sim_box, AccountOpts { faces: true, va: true });

    let window_steps = (0.25 / cfg.dt).round() as u64; // half-time-unit windows
    let stress_t0 = 10.0;
    let stress_t1 = 15.0;
    let liquid_window = 40u64;

    let mut profile_plan: Vec<(u64, u64, f64)> = cfg
        .profile_times
        .iter()
        .map(|&t| {
            let mid = (t / cfg.dt).round() as i64;
            let open = (mid - window_steps as i64).max(0) as u64;
            (open, mid as u64 + window_steps, t)
        })
        .collect();
    profile_plan.sort_by_key(|p| p.0);
    for w in profile_plan.windows(2) {
        if w[1].0 < w[0].1 {
            return Err(CvmdError::Config(
                "profile_times closer together than the averaging window".into(),
            ));
        }
    }
    let stress_open = (stress_t0 / cfg.dt).round() as u64;
    let stress_close = (stress_t1 / cfg.dt).round() as u64;

    let mut profiles = Vec::new();
    let mut stress = StressProfile::default();
    let mut windows = Vec::new();
    let mut plan_ix = 0usize;
    let mut wall_t = (0.0f64, 0.0f64, 0u64);
    let mut fluid_t = 0.0f64;

    let total_steps = cfg
        .steps
        .max(stress_close + 1)
        .max(profile_plan.last().map(|p| p.1 + 1).unwrap_or(0));

    for step in 1..=total_steps {
        let profile_active = plan_ix < profile_plan.len()
            && step > profile_plan[plan_ix].0
            && step <= profile_plan[plan_ix].1;
        let stress_active = step > stress_open && step <= stress_close;

        if plan_ix < profile_plan.len() && step == profile_plan[plan_ix].0 + 1 {
            profile_acc.open_window(&sim.state, &sim.forces);
        }
        if step == stress_open + 1 {
            stress_acc.open_window(&sim.state, &sim.forces);
        }

        match (profile_active, stress_active) {
            (true, true) => sim.step(&mut [&mut liquid, &mut profile_acc, &mut stress_acc])?,
            (true, false) => sim.step(&mut [&mut liquid, &mut profile_acc])?,
            (false, true) => sim.step(&mut [&mut liquid, &mut stress_acc])?,
            (false, false) => sim.step(&mut [&mut liquid])?,
        }

        // Wall/fluid temperature diagnostics over the first 50 time units.
        if sim.state.time <= 50.0 {
            let mut ke_b = 0.0;
            let mut ke_t = 0.0;
            let mut ke_f = 0.0;
            let (mut n_b, mut n_t, mut n_f) = (0usize, 0usize, 0usize);
            for i in 0..sim.state.len() {
                match sim.state.tags[i] {
                    Species::WallBottom => {
                        ke_b += sim.state.momenta[i].norm2();
                        n_b += 1;
                    }
                    Species::WallTop => {
                        let p = sim.state.momenta[i] - Vec3::new(cfg.u0 * sim.state.masses[i], 0.0, 0.0);
                        ke_t += p.norm2();
                        n_t += 1;
                    }
                    Species::Fluid => {
                        ke_f += sim.state.momenta[i].norm2();
                        n_f += 1;
                    }
                }
            }
            wall_t.0 += ke_b / (3.0 * n_b as f64);
            wall_t.1 += ke_t / (3.0 * n_t as f64);
            fluid_t += ke_f / (3.0 * n_f as f64);
            wall_t.2 += 1;
        }

        if plan_ix < profile_plan.len() && step == profile_plan[plan_ix].1 {
            profiles.push(ProfileRow { t: profile_plan[plan_ix].2, u: bin_velocity(&profile_acc) });
            plan_ix += 1;
        }
        if step == stress_close {
            let shape = stress_acc.grid.shape();
            let fs_of = |acc: &Accountant, flat: usize| acc.face_time_averages(flat).unwrap();
            let geo_bins = 0..shape[1];
            let mut va = Vec::new();
            let mut mid = Vec::new();
            let mut bot = Vec::new();
            let mut top = Vec::new();
            let va_bins = bin_mean(&stress_acc, |acc, flat| {
                let t = va_tensor(acc, flat);
                t.total().m[0][1]
            });
            let bot_bins = bin_mean(&stress_acc, |acc, flat| {
                let fs = fs_of(acc, flat);
                fs.faces[Face { axis: 1, positive: false }.index()].total().x
            });
            let top_bins = bin_mean(&stress_acc, |acc, flat| {
                let fs = fs_of(acc, flat);
                fs.faces[Face { axis: 1, positive: true }.index()].total().x
            });
            for iy in geo_bins {
                va.push(va_bins[iy]);
                bot.push(bot_bins[iy]);
                top.push(top_bins[iy]);
                mid.push(0.5 * (bot_bins[iy] + top_bins[iy]));
            }
            stress = StressProfile { va_xy: va, mop_mid_xy: mid, mop_bottom_xy: bot, mop_top_xy: top };
        }
        if step % liquid_window == 0 {
            let rep = liquid.close_window(&sim.state, &sim.forces);
            let c = &rep.cells[0];
            let tau = rep.tau;
            let n_tau = rep.steps as f64;
            let led = liquid.ledger(0);
            let f_top = -led.faces[Face { axis: 1, positive: true }.index()].traction_sum.x / n_tau;
            let f_bot = led.faces[Face { axis: 1, positive: false }.index()].traction_sum.x / n_tau;
            let mom = &c.momentum[0];
            let scale = mom.accumulation.abs().max(mom.forcing.abs()).max(mom.advection.abs()).max(1.0);
            windows.push(LiquidWindow {
                t_mid: rep.window_t0 + 0.5 * tau,
                dpdt: mom.accumulation / tau,
                force_top: f_top,
                force_bottom: f_bot,
                advection_rate: mom.advection / tau,
                residual_rel: mom.residual().abs() / scale,
            });
            liquid.open_window(&sim.state, &sim.forces);
        }
    }

    let samples = wall_t.2.max(1) as f64;
    Ok(MemberResult {
        profiles,
        stress,
        windows,
        wall_temp_bottom: wall_t.0 / samples,
        wall_temp_top: wall_t.1 / samples,
        fluid_temp: fluid_t / samples,
    })
}

#[derive(Clone, Copy, Debug, Default)]
pub struct EnsembleStat {
    pub mean: f64,
    pub sem: f64,
}

fn stat(values: &[f64]) -> EnsembleStat {
    let n = values.len().max(1) as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    // SEM of the ensemble mean from the member scatter.
    let sem = (var / (n - 1.0).max(1.0)).sqrt();
    EnsembleStat { mean, sem }
}

#[derive(Clone, Debug)]
pub struct Case3Summary {
    /// (time, rms deviation of interior-bin velocity from the analytic
    /// series, in units of U0).
    pub velocity_rms: Vec<(f64, f64)>,
    /// Per fluid bin: local y, analytic window-averaged stress, VA and MOP
    /// midpoint stats, and the VA-MOP member-difference stat.
    pub stress_bins: Vec<StressBin>,
    pub max_liquid_residual_rel: f64,
    /// Per-curve (dpdt, force_top, force_bottom): fraction of windows within
    /// 2 SEM of the analytic value and mean |deviation| / mean SEM.
    pub curve_coverage: [CurveCoverage; 3],
    pub wall_temp_bottom: f64,
    pub wall_temp_top: f64,
    pub fluid_temp: f64,
    pub members: usize,
}

#[derive(Clone, Copy, Debug, Default)]
pub struct StressBin {
    pub y_local: f64,
    pub analytic: f64,
    pub va: EnsembleStat,
    pub mop_mid: EnsembleStat,
    pub va_minus_mop: EnsembleStat,
    pub interior: bool,
}

#[derive(Clone, Copy, Debug, Default)]
pub struct CurveCoverage {
    pub frac_within_2sem: f64,
    pub mean_abs_dev_over_mean_sem: f64,
    pub points: usize,
}

pub fn run_case3(cfg: &RunConfig, out: Option<&Path>) -> Result<Case3Summary> {
    let geo = geometry(cfg)?;
    let params = geo.couette_params(cfg);

    let members: Vec<MemberResult> = (0..cfg.ensemble)
        .into_par_iter()
        .map(|m| run_member(cfg, cfg.seed.wrapping_add(m as u64)))
        .collect::<Result<Vec<_>>>()?;

    // Velocity profiles: ensemble mean per bin per time, RMS over interior
    // bins against the analytic solution.
    let mut velocity_rms = Vec::new();
    let mut profile_rows = Vec::new();
    for (ti, &t) in cfg.profile_times.iter().enumerate() {
        let mut rms = 0.0;
        let mut count = 0usize;
        for bin in 0..N_BINS {
            let vals: Vec<f64> = members.iter().map(|m| m.profiles[ti].u[bin]).collect();
            let st = stat(&vals);
            let analytic = if geo.fluid_bins.contains(&bin) {
                couette_velocity(geo.local_y(bin), t, &params)?
            } else {
                f64::NAN
            };
            profile_rows.push((t, bin, st.clone(), analytic));
            if geo.interior_bins.contains(&bin) {
                rms += (st.mean - analytic) * (st.mean - analytic);
                count += 1;
            }
        }
        velocity_rms.push((t, (rms / count as f64).sqrt() / cfg.u0.abs().max(1e-300)));
    }

    // Stress profile over [10, 15]: compare with the window-averaged
    // analytic stress.
    let stress_window = (10.0, 15.0);
    let window_avg_stress = |y: f64| -> Result<f64> {
        let n = 100;
        let mut s = 0.0;
        for k in 0..n {
            let t = stress_window.0
                + (k as f64 + 0.5) * (stress_window.1 - stress_window.0) / n as f64;
            s += couette_shear_stress(y, t, &params)?;
        }
        Ok(s / n as f64)
    };
    let mut stress_bins = Vec::new();
    for bin in geo.fluid_bins.clone() {
        let va: Vec<f64> = members.iter().map(|m| m.stress.va_xy[bin]).collect();
        let mid: Vec<f64> = members.iter().map(|m| m.stress.mop_mid_xy[bin]).collect();
        let diff: Vec<f64> = va.iter().zip(&mid).map(|(a, b)| a - b).collect();
        stress_bins.push(StressBin {
            y_local: geo.local_y(bin),
            analytic: window_avg_stress(geo.local_y(bin))?,
            va: stat(&va),
            mop_mid: stat(&mid),
            va_minus_mop: stat(&diff),
            interior: geo.interior_bins.contains(&bin),
        });
    }

    // Whole-liquid balance curves.
    let n_windows = members.iter().map(|m| m.windows.len()).min().unwrap_or(0);
    let mut max_residual: f64 = 0.0;
    let mut curve_rows = Vec::new();
    let mut coverage = [CurveCoverage::default(); 3];
    let mut hits = [0usize; 3];
    let mut devs = [0.0f64; 3];
    let mut sems = [0.0f64; 3];
    let steady = steady_face_force(&params);
    for w in 0..n_windows {
        let t_mid = members[0].windows[w].t_mid;
        for m in &members {
            max_residual = max_residual.max(m.windows[w].residual_rel);
        }
        let h = cv_momentum_history(t_mid, &params)?;
        // Measured face forces carry the steady part; the printed series
        // are transients in a gauge without it.
        let an = [h.dp_dt, -(h.top_force + steady), h.bottom_force + steady];
        let md = [
            stat(&members.iter().map(|m| m.windows[w].dpdt).collect::<Vec<_>>()),
            stat(&members.iter().map(|m| m.windows[w].force_top).collect::<Vec<_>>()),
            stat(&members.iter().map(|m| m.windows[w].force_bottom).collect::<Vec<_>>()),
        ];
        for k in 0..3 {
            let dev = (md[k].mean - an[k]).abs();
            if dev <= 2.0 * md[k].sem {
                hits[k] += 1;
            }
            devs[k] += dev;
            sems[k] += md[k].sem;
        }
        let adv = stat(&members.iter().map(|m| m.windows[w].advection_rate).collect::<Vec<_>>());
        curve_rows.push((t_mid, md, an, adv));
    }
    for k in 0..3 {
        coverage[k] = CurveCoverage {
            frac_within_2sem: hits[k] as f64 / n_windows.max(1) as f64,
            mean_abs_dev_over_mean_sem: if sems[k] > 0.0 { devs[k] / sems[k] } else { f64::NAN },
            points: n_windows,
        };
    }

    if let Some(dir) = out {
        let mut csv = Csv::create(
            &dir.join("case3_velocity_profiles.csv"),
            &["time", "bin", "y_center", "y_local", "u_md", "u_sem", "u_analytic"],
        )?;
        for (t, bin, st, analytic) in &profile_rows {
            csv.row(format_args!(
                "{},{bin},{},{},{},{},{}",
                F(*t),
                F(geo.bin_centers[*bin]),
                F(geo.local_y(*bin)),
                F(st.mean),
                F(st.sem),
                F(*analytic)
            ))?;
        }
        csv.finish()?;

        let mut csv = Csv::create(
            &dir.join("case3_shear_profile.csv"),
            &["y_local", "pi_xy_analytic", "va_mean", "va_sem", "mop_mid_mean", "mop_mid_sem", "va_minus_mop_mean", "va_minus_mop_sem", "interior"],
        )?;
        for b in &stress_bins {
            csv.row(format_args!(
                "{},{},{},{},{},{},{},{},{}",
                F(b.y_local),
                F(b.analytic),
                F(b.va.mean),
                F(b.va.sem),
                F(b.mop_mid.mean),
                F(b.mop_mid.sem),
                F(b.va_minus_mop.mean),
                F(b.va_minus_mop.sem),
                b.interior as u8
            ))?;
        }
        csv.finish()?;

        let mut csv = Csv::create(
            &dir.join("case3_liquid_balance.csv"),
            &["t_mid", "dpdt_md", "dpdt_sem", "dpdt_an", "ftop_md", "ftop_sem", "ftop_an", "fbot_md", "fbot_sem", "fbot_an", "advection_rate", "adv_sem"],
        )?;
        for (t, md, an, adv) in &curve_rows {
            csv.row(format_args!(
                "{},{},{},{},{},{},{},{},{},{},{},{}",
                F(*t),
                F(md[0].mean),
                F(md[0].sem),
                F(an[0]),
                F(md[1].mean),
                F(md[1].sem),
                F(an[1]),
                F(md[2].mean),
                F(md[2].sem),
                F(an[2]),
                F(adv.mean),
                F(adv.sem)
            ))?;
        }
        csv.finish()?;
    }

    let nm = members.len() as f64;
    Ok(Case3Summary {
        velocity_rms,
        stress_bins,
        max_liquid_residual_rel: max_residual,
        curve_coverage: coverage,
        wall_temp_bottom: members.iter().map(|m| m.wall_temp_bottom).sum::<f64>() / nm,
        wall_temp_top: members.iter().map(|m| m.wall_temp_top).sum::<f64>() / nm,
        fluid_temp: members.iter().map(|m| m.fluid_temp).sum::<f64>() / nm,
        members: members.len(),
    })
}
