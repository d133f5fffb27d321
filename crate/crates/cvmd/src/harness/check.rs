//! Property and invariant suite runnable from the CLI: geometry-kernel
//! identities under heavy seeded fuzz, neighbour-search and force checks,
//! the analytic-series identities, and the exact algebraic equivalences
//! between the pressure routes.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::analytic::{cv_momentum_history, CouetteParams};
use crate::config::RunConfig;
use crate::cv_budget::{AccountOpts, Accountant};
use crate::dynamics::init_fcc;
use crate::error::Result;
use crate::forces::{compute_forces, WCA_CUTOFF};
use crate::geom::{BoxSpec, Mat3, Vec3};
use crate::grid::CvGrid;
use crate::harness::driver::Sim;
use crate::lcv::{face_crossings_point, face_incidence_pair, segment_inside_fraction, ControlVolume, Face};
use crate::pressure::va_tensor;
use crate::state::Species;

pub struct CheckOutcome {
    pub name: &'static str,
    pub pass: bool,
    pub detail: String,
}

fn outcome(name: &'static str, pass: bool, detail: String) -> CheckOutcome {
    CheckOutcome { name, pass, detail }
}

fn rand_point(rng: &mut ChaCha8Rng, span: f64) -> Vec3 {
    Vec3::new(
        rng.gen_range(-span..span),
        rng.gen_range(-span..span),
        rng.gen_range(-span..span),
    )
}

/// Occasionally snap coordinates onto CV face planes to stress the
/// half-open boundary handling.
fn maybe_snap(rng: &mut ChaCha8Rng, mut p: Vec3, cv: &ControlVolume) -> Vec3 {
    for axis in 0..3 {
        match rng.gen_range(0..10) {
            0 => p[axis] = cv.lo()[axis],
            1 => p[axis] = cv.hi()[axis],
            _ => {}
        }
    }
    p
}

/// theta_ij face identity on >= 1e5 random and boundary-snapped pairs.
pub fn check_incidence_identity(cases: usize) -> CheckOutcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0xC0FFEE);
    let mut failures = 0usize;
    for _ in 0..cases {
        let center = rand_point(&mut rng, 2.0);
        let half = Vec3::new(
            rng.gen_range(0.2..1.5),
            rng.gen_range(0.2..1.5),
            rng.gen_range(0.2..1.5),
        );
        let cv = ControlVolume::from_center_half_widths(center, half).unwrap();
        let raw_a = rand_point(&mut rng, 4.0);
        let raw_b = rand_point(&mut rng, 4.0);
        let a = maybe_snap(&mut rng, raw_a, &cv);
        let b = maybe_snap(&mut rng, raw_b, &cv);
        if a == b {
            continue;
        }
        let inc = face_incidence_pair(a, b, &cv).unwrap();
        if inc.theta_ij != inc.theta_from_faces() {
            failures += 1;
        }
    }
    outcome(
        "lcv_incidence_identity",
        failures == 0,
        format!("{failures} failures / {cases} fuzz cases"),
    )
}

/// Crossing count parity against endpoint membership, same fuzz style.
pub fn check_crossing_parity(cases: usize) -> CheckOutcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0xBEEF);
    let mut failures = 0usize;
    for _ in 0..cases {
        let cv = ControlVolume::from_center_half_widths(
            rand_point(&mut rng, 2.0),
            Vec3::new(
                rng.gen_range(0.2..1.5),
                rng.gen_range(0.2..1.5),
                rng.gen_range(0.2..1.5),
            ),
        )
        .unwrap();
        let raw_a = rand_point(&mut rng, 4.0);
        let raw_b = rand_point(&mut rng, 4.0);
        let a = maybe_snap(&mut rng, raw_a, &cv);
        let b = maybe_snap(&mut rng, raw_b, &cv);
        let net: i32 = face_crossings_point(a, b, &cv)
            .iter()
            .map(|c| -(c.direction_sign as i32))
            .sum();
        if net != cv.theta(b) as i32 - cv.theta(a) as i32 {
            failures += 1;
        }
    }
    outcome(
        "lcv_crossing_parity",
        failures == 0,
        format!("{failures} failures / {cases} fuzz cases"),
    )
}

/// Exact in-volume fraction against the midpoint-quadrature oracle.
pub fn check_fraction_quadrature(segments: usize, samples: usize) -> CheckOutcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0xFACADE);
    let cv = ControlVolume::from_center_half_widths(Vec3::ZERO, Vec3::splat(0.5)).unwrap();
    let mut worst = 0.0f64;
    for _ in 0..segments {
        let a = rand_point(&mut rng, 1.5);
        let b = rand_point(&mut rng, 1.5);
        if a == b {
            continue;
        }
        let exact = segment_inside_fraction(a, b, &cv).unwrap();
        let mut hits = 0usize;
        for k in 0..samples {
            let s = (k as f64 + 0.5) / samples as f64;
            if cv.theta(a + (b - a) * s) == 1 {
                hits += 1;
            }
        }
        let approx = hits as f64 / samples as f64;
        worst = worst.max((exact - approx).abs());
    }
    let tol = 1.0 / samples as f64 + 1e-12;
    outcome(
        "lcv_fraction_quadrature",
        worst <= tol,
        format!("worst |exact - quadrature| = {worst:.3e} (tol {tol:.3e})"),
    )
}

/// Partition of unity of the grid tiling on random in-box points.
pub fn check_partition_of_unity(cases: usize) -> CheckOutcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0xABCD);
    let l = 13.68;
    let grid = CvGrid::full_box(Vec3::splat(l), [true; 3], [9, 9, 9]).unwrap();
    let mut failures = 0usize;
    for _ in 0..cases {
        let mut p = Vec3::new(
            rng.gen_range(0.0..l),
            rng.gen_range(0.0..l),
            rng.gen_range(0.0..l),
        );
        // Snap some points to internal planes.
        if rng.gen_bool(0.2) {
            p.x = grid.cell([rng.gen_range(0..9), 0, 0]).lo().x;
        }
        let mut count = 0;
        let mut found = None;
        for flat in 0..grid.n_cells() {
            let c = grid.unflatten(flat);
            if grid.cell(c).theta(p) == 1 {
                count += 1;
                found = Some(c);
            }
        }
        if count != 1 || found != grid.locate(p) {
            failures += 1;
        }
    }
    outcome(
        "grid_partition_of_unity",
        failures == 0,
        format!("{failures} failures / {cases} points"),
    )
}

/// Traversal fractions telescope to one and match per-cell clipping.
pub fn check_traversal_fractions(cases: usize) -> CheckOutcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5EED);
    let l = 13.68;
    let grid = CvGrid::full_box(Vec3::splat(l), [true; 3], [9, 9, 9]).unwrap();
    let mut worst = 0.0f64;
    for _ in 0..cases {
        let a = Vec3::new(
            rng.gen_range(0.0..l),
            rng.gen_range(0.0..l),
            rng.gen_range(0.0..l),
        );
        let d = rand_point(&mut rng, 1.2);
        if d == Vec3::ZERO {
            continue;
        }
        let segs = grid.traverse_segment(a, a + d).unwrap();
        let sum: f64 = segs.iter().map(|s| s.t1 - s.t0).sum();
        worst = worst.max((sum - 1.0).abs());
    }
    outcome(
        "grid_traversal_fractions",
        worst <= 1e-12,
        format!("worst |sum - 1| = {worst:.3e}"),
    )
}

/// Cell-list pair enumeration against brute force on random configurations.
pub fn check_cell_list(n: usize) -> CheckOutcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0x11CE);
    let l = 7.3;
    let sim_box = BoxSpec::cubic_periodic(l);
    for round in 0..4 {
        let positions: Vec<Vec3> = (0..n)
            .map(|_| {
                Vec3::new(
                    rng.gen_range(0.0..l),
                    rng.gen_range(0.0..l),
                    rng.gen_range(0.0..l),
                )
            })
            .collect();
        let state = crate::state::SimState {
            positions: positions.clone(),
            momenta: vec![Vec3::ZERO; n],
            masses: vec![1.0; n],
            tags: vec![Species::Fluid; n],
            tether_sites: vec![None; n],
            step_disp: vec![Vec3::ZERO; n],
            time: 0.0,
            xi_bottom: 0.0,
            xi_top: 0.0,
        };
        let ff = match compute_forces(&state, &sim_box) {
            Ok(ff) => ff,
            Err(_) => continue,
        };
        let mut got: Vec<(u32, u32)> =
            ff.pairs.iter().map(|p| (p.i.min(p.j), p.i.max(p.j))).collect();
        got.sort_unstable();
        let mut brute = Vec::new();
        for i in 0..n {
            for j in (i + 1)..n {
                if sim_box.min_image(positions[i] - positions[j]).norm2()
                    < WCA_CUTOFF * WCA_CUTOFF
                {
                    brute.push((i as u32, j as u32));
                }
            }
        }
        if got != brute {
            return outcome(
                "forces_cell_list_vs_brute",
                false,
                format!("pair set mismatch in round {round}"),
            );
        }
    }
    outcome("forces_cell_list_vs_brute", true, format!("4 rounds x {n} molecules"))
}

/// Directional finite differences of the total pair energy against forces.
pub fn check_energy_force_consistency() -> CheckOutcome {
    let (mut state, sim_box) = init_fcc(0.8, 108, 1.0, 99).unwrap();
    // Compress enough to push nearest neighbours inside the cutoff.
    for p in &mut state.positions {
        *p = *p * 0.9;
    }
    let ff = compute_forces(&state, &sim_box).unwrap();
    let n_pairs = ff.pairs.len();
    let mut worst = 0.0f64;
    for &i in &[0usize, 17, 63] {
        for axis in 0..3 {
            let h = 1e-6;
            let mut plus = state.clone();
            plus.positions[i][axis] += h;
            let mut minus = state.clone();
            minus.positions[i][axis] -= h;
            let ep = compute_forces(&plus, &sim_box).unwrap().potential_energy();
            let em = compute_forces(&minus, &sim_box).unwrap().potential_energy();
            let fd = -(ep - em) / (2.0 * h);
            let f = ff.force[i][axis];
            let rel = (fd - f).abs() / f.abs().max(1.0);
            worst = worst.max(rel);
        }
    }
    outcome(
        "forces_energy_consistency",
        worst <= 1e-5 && n_pairs > 0,
        format!("worst relative deviation {worst:.3e} over {n_pairs} pairs"),
    )
}

/// Whole-domain volume-average configurational tensor equals the virial
/// tensor, and the grid-split tensors sum to the whole-domain one.
pub fn check_va_equals_virial() -> Result<CheckOutcome> {
    let (state, sim_box) = init_fcc(0.8, 500, 1.0, 31)?;
    let mut sim = Sim::new(state, sim_box, 0.005, None)?;
    let grid1 = CvGrid::full_box(sim_box.lengths, sim_box.periodic, [1, 1, 1])?;
    let grid3 = CvGrid::full_box(sim_box.lengths, sim_box.periodic, [3, 3, 3])?;
    let opts = AccountOpts { faces: true, va: true };
    let mut acc1 = Accountant::new(grid1, sim_box, opts);
    let mut acc3 = Accountant::new(grid3, sim_box, opts);
    // Warm up to develop contacts, then measure.
    for _ in 0..400 {
        sim.step(&mut [])?;
    }
    acc1.open_window(&sim.state, &sim.forces);
    acc3.open_window(&sim.state, &sim.forces);
    let mut virial_conf = Mat3::ZERO;
    let steps = 50;
    for _ in 0..steps {
        // Accumulate the virial from the same pair set the ledgers see.
        for pr in &sim.forces.pairs {
            virial_conf.add_scaled(&Mat3::outer(pr.f, pr.r_ij), 1.0);
        }
        sim.step(&mut [&mut acc1, &mut acc3])?;
    }
    let vol = sim_box.volume();
    let virial_sigma = virial_conf.scale(-1.0 / (vol * steps as f64));
    let va1 = va_tensor(&acc1, 0);
    let d_whole = va1.sigma.max_abs_diff(&virial_sigma);
    // Sum the per-cell dyadic sums over the 3^3 grid.
    let mut summed = Mat3::ZERO;
    for flat in 0..acc3.grid.n_cells() {
        summed.add_scaled(&acc3.ledger(flat).va_conf, 1.0);
    }
    let summed_sigma = summed.scale(-1.0 / (vol * steps as f64));
    let d_split = summed_sigma.max_abs_diff(&virial_sigma);
    let scale = virial_sigma.m[0][0].abs().max(1e-300);
    let pass = d_whole / scale <= 1e-9 && d_split / scale <= 1e-9;
    Ok(outcome(
        "pressure_va_equals_virial",
        pass,
        format!("whole-domain rel diff {:.3e}, grid-sum rel diff {:.3e}", d_whole / scale, d_split / scale),
    ))
}

/// Interior-plane MOP from the cell machinery against an independent
/// whole-plane implementation (S = 1 across the plane).
pub fn check_mop_plane_oracle() -> Result<CheckOutcome> {
    let (state, sim_box) = init_fcc(0.8, 500, 1.0, 77)?;
    let l = sim_box.lengths.x;
    let plane_x = {
        // The internal plane of a 2x1x1 grid.
        let grid = CvGrid::full_box(sim_box.lengths, sim_box.periodic, [2, 1, 1])?;
        grid.cell([0, 0, 0]).hi().x
    };
    let grid = CvGrid::full_box(sim_box.lengths, sim_box.periodic, [2, 1, 1])?;
    let mut acc = Accountant::new(grid, sim_box, AccountOpts { faces: true, va: false });
    let mut sim = Sim::new(state, sim_box, 0.005, None)?;
    for _ in 0..400 {
        sim.step(&mut [])?;
    }
    acc.open_window(&sim.state, &sim.forces);

    // Independent oracle ledgers for the same plane.
    let mut oracle_traction = Vec3::ZERO;
    let mut oracle_kinetic = Vec3::ZERO;
    let steps = 200;
    let mut r_prev: Vec<Vec3> = sim.state.positions.clone();
    for _ in 0..steps {
        // Pair straddling test with minimum-image endpoint, no extent test.
        for pr in &sim.forces.pairs {
            let xi = sim.state.positions[pr.i as usize].x;
            let xj_img = xi - pr.r_ij.x;
            let side = |x: f64| x >= plane_x;
            if side(xi) != side(xj_img) {
                let dir = if xj_img > xi { 1.0 } else { -1.0 };
                oracle_traction += pr.f * -dir;
            }
        }
        sim.step(&mut [&mut acc])?;
        // Crossings of the plane by the unwrapped step.
        for i in 0..sim.state.len() {
            let a = r_prev[i].x;
            let b = a + sim.state.step_disp[i].x;
            let side = |x: f64| x >= plane_x;
            if side(a) != side(b) {
                let dir = if b > a { 1.0 } else { -1.0 };
                oracle_kinetic += sim.state.momenta[i] * dir;
            }
        }
        r_prev.copy_from_slice(&sim.state.positions);
    }
    let led = acc.ledger(0);
    let f_plus = &led.faces[Face { axis: 0, positive: true }.index()];
    let area = l * l;
    let tau = steps as f64 * 0.005;
    let t_mop = f_plus.traction_sum * (-1.0 / (area * steps as f64));
    let k_mop = f_plus.kinetic_sum * (1.0 / (area * tau));
    let t_oracle = oracle_traction * (-1.0 / (area * steps as f64));
    let k_oracle = oracle_kinetic * (1.0 / (area * tau));
    let dt_max = (t_mop - t_oracle).max_abs();
    let dk_max = (k_mop - k_oracle).max_abs();
    // Also the shared-face symmetry: both adjacent cells report the same
    // raw plane sums.
    let f_minus_other = &acc.ledger(1).faces[Face { axis: 0, positive: false }.index()];
    let sym = (f_plus.traction_sum - f_minus_other.traction_sum).max_abs();
    let pass = dt_max <= 1e-12 && dk_max <= 1e-12 && sym == 0.0;
    Ok(outcome(
        "pressure_mop_plane_oracle",
        pass,
        format!("traction diff {dt_max:.3e}, kinetic diff {dk_max:.3e}, shared-face diff {sym:.3e}"),
    ))
}

/// Short NVE run: machine-zero momentum residuals and exact mass balance on
/// a coarse grid.
pub fn check_budget_conservation() -> Result<CheckOutcome> {
    let (state, sim_box) = init_fcc(0.8, 256, 1.0, 5)?;
    let grid = CvGrid::full_box(sim_box.lengths, sim_box.periodic, [4, 4, 4])?;
    let mut acc = Accountant::new(grid, sim_box, AccountOpts { faces: false, va: false });
    let mut sim = Sim::new(state, sim_box, 0.005, None)?;
    acc.open_window(&sim.state, &sim.forces);
    for _ in 0..400 {
        sim.step(&mut [&mut acc])?;
    }
    let rep = acc.close_window(&sim.state, &sim.forces);
    let mut mass_exact = true;
    let mut worst_mom = 0.0f64;
    for c in &rep.cells {
        if c.mass.accumulation + c.mass.advection != 0.0 {
            mass_exact = false;
        }
        for axis in 0..3 {
            worst_mom = worst_mom.max(c.momentum[axis].residual().abs());
        }
    }
    let pass = mass_exact && worst_mom <= 1e-10;
    Ok(outcome(
        "budget_conservation_short_run",
        pass,
        format!("mass exact: {mass_exact}, worst |momentum residual| = {worst_mom:.3e}"),
    ))
}

/// Analytic-series identities: balance of the three series and truncation
/// monotonicity.
pub fn check_analytic_identities() -> CheckOutcome {
    let mut p = CouetteParams::new(1.6, 0.8, 20.52, 1.0);
    p.dx = 27.4;
    p.dz = 27.4;
    let mut worst = 0.0f64;
    for &t in &[0.1, 1.0, 10.0] {
        for &n in &[2usize, 9, 300] {
            let mut pn = p;
            pn.n_terms = n;
            let h = cv_momentum_history(t, &pn).unwrap();
            worst = worst.max((h.dp_dt + h.top_force - h.bottom_force).abs());
        }
    }
    outcome(
        "analytic_series_balance",
        worst <= 1e-10,
        format!("worst |dP/dt + (top - bottom)| = {worst:.3e}"),
    )
}

/// Run every check, printing one line per outcome; returns failure count.
pub fn run_check(cfg: &RunConfig) -> Result<usize> {
    let _ = cfg;
    let mut outcomes = vec![
        check_incidence_identity(100_000),
        check_crossing_parity(100_000),
        check_fraction_quadrature(30, 1_000_000),
        check_partition_of_unity(5_000),
        check_traversal_fractions(20_000),
        check_cell_list(256),
        check_energy_force_consistency(),
        check_analytic_identities(),
    ];
    outcomes.push(check_va_equals_virial()?);
    outcomes.push(check_mop_plane_oracle()?);
    outcomes.push(check_budget_conservation()?);
    let mut failures = 0;
    for o in &outcomes {
        println!("{} {} ({})", if o.pass { "PASS" } else { "FAIL" }, o.name, o.detail);
        if !o.pass {
            failures += 1;
        }
    }
    Ok(failures)
}
