//! CLI drivers reproducing the bulk-conservation, pressure-convergence and
//! start-up Couette measurement campaigns, plus the invariant check suite.

pub mod case1;
pub mod case2;
pub mod case3;
pub mod check;
pub mod driver;
pub mod output;
