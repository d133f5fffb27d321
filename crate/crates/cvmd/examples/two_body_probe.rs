// scratch probe: is the measured residual exactly the per-pair telescoping
// error, or is there an extra bookkeeping term?
use std::collections::HashMap;

use cvmd::cv_budget::{AccountOpts, Accountant};
use cvmd::dynamics::init_fcc;
use cvmd::geom::Vec3;
use cvmd::grid::CvGrid;
use cvmd::harness::driver::Sim;

fn main() {
    let dt: f64 = std::env::args().nth(1).map(|a| a.parse().unwrap()).unwrap_or(0.005);
    let (state, sim_box) = init_fcc(0.8, 500, 1.0, 17).unwrap();
    let grid = CvGrid::full_box(sim_box.lengths, sim_box.periodic, [3, 3, 3]).unwrap();
    let tracked = grid.flat_index([1, 1, 1]);
    let mut acc = Accountant::new(grid.clone(), sim_box, AccountOpts { faces: false, va: false });
    let mut sim = Sim::new(state, sim_box, dt, None).unwrap();
    for _ in 0..(10.0 / dt) as usize {
        sim.step(&mut []).unwrap();
    }
    acc.open_window(&sim.state, &sim.forces);

    let n = sim.state.len();
    let theta = |g: &CvGrid, p: Vec3| -> f64 {
        (g.locate(p).map(|c| g.flat_index(c)) == Some(tracked)) as i32 as f64
    };
    let mut predicted = 0.0f64;
    let mut r_prev: Vec<Vec3> = sim.state.positions.clone();
    let mut p_prev: Vec<Vec3> = sim.state.momenta.clone();

    let steps = (20.0 / dt) as usize;
    let mut worst_gap = 0.0f64;
    for step in 0..steps {
        let pairs_n: HashMap<(u32, u32), f64> =
            sim.forces.pairs.iter().map(|p| ((p.i, p.j), p.phi)).collect();
        let forces_n = sim.forces.pairs.clone();
        r_prev.copy_from_slice(&sim.state.positions);
        p_prev.copy_from_slice(&sim.state.momenta);
        sim.step(&mut [&mut acc]).unwrap();
        let pairs_n1: HashMap<(u32, u32), f64> =
            sim.forces.pairs.iter().map(|p| ((p.i, p.j), p.phi)).collect();

        // Predicted residual increment:
        //   sum over pairs of 1/2 (theta_i + theta_j)(r_n) *
        //     [(vbar_i - vbar_j).f dt + dphi]
        // with dphi spanning consecutive configurations (0 when absent).
        let mut keys: Vec<(u32, u32)> = pairs_n.keys().chain(pairs_n1.keys()).copied().collect();
        keys.sort_unstable();
        keys.dedup();
        let f_of: HashMap<(u32, u32), Vec3> = forces_n.iter().map(|p| ((p.i, p.j), p.f)).collect();
        for key in keys {
            let (iu, ju) = (key.0 as usize, key.1 as usize);
            let w = 0.5 * (theta(&grid, r_prev[iu]) + theta(&grid, r_prev[ju]));
            if w == 0.0 {
                continue;
            }
            let dphi = pairs_n1.get(&key).copied().unwrap_or(0.0)
                - pairs_n.get(&key).copied().unwrap_or(0.0);
            let f = f_of.get(&key).copied().unwrap_or(Vec3::ZERO);
            let vi = (p_prev[iu] + sim.state.momenta[iu]) * 0.5;
            let vj = (p_prev[ju] + sim.state.momenta[ju]) * 0.5;
            predicted += w * ((vi - vj).dot(f) * dt + dphi);
        }
        if step % 400 == 399 {
            let rep = acc.close_window(&sim.state, &sim.forces);
            let res = rep.cells[tracked].energy.residual();
            worst_gap = worst_gap.max((res - predicted).abs());
            println!(
                "t={:6.2} measured res={:+.5} predicted={:+.5} gap={:+.2e}",
                sim.state.time,
                res,
                predicted,
                res - predicted
            );
        }
    }
    println!("worst |measured - predicted| = {worst_gap:.3e}");
}
