//! Run configuration: plain-text `key = value` files, one entry per line,
//! `#` comments allowed. Keys match the `RunConfig` field names; unknown
//! keys are an error.

use std::path::Path;

use crate::error::{CvmdError, Result};

#[derive(Clone, Debug)]
pub struct RunConfig {
    pub density: f64,
    pub n_molecules: usize,
    pub dt: f64,
    pub steps: u64,
    pub temperature: f64,
    pub seed: u64,
    /// Sliding speed of the top wall (Couette case).
    pub u0: f64,
    /// Tether stiffnesses.
    pub k4: f64,
    pub k6: f64,
    /// Thermostat inertia per wall; 0 selects the default N_wall * dt.
    pub q_xi: f64,
    /// Budget grid shape.
    pub grid_nx: usize,
    pub grid_ny: usize,
    pub grid_nz: usize,
    /// Output cadence in steps for budget/pressure series.
    pub sample_every: u64,
    /// Averaging window length in steps for profile measurements.
    pub window_steps: u64,
    /// Ensemble size (Couette case).
    pub ensemble: usize,
    /// Single-CV side length for the case-1 balance series.
    pub cv_side: f64,
    /// Wall slab thickness in FCC unit cells per wall.
    pub wall_cells: usize,
    /// Equilibration steps before the sliding start (Couette case).
    pub equil_steps: u64,
    /// Velocity-profile sample times (Couette case).
    pub profile_times: Vec<f64>,
    /// Block length in samples for block-averaged standard deviations.
    pub block_len: usize,
    /// Fluid shear viscosity used by the analytic reference.
    pub mu: f64,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            density: 0.8,
            n_molecules: 2048,
            dt: 0.005,
            steps: 20_000,
            temperature: 1.0,
            seed: 2012,
            u0: 1.0,
            k4: 5e3,
            k6: 5e6,
            q_xi: 0.0,
            grid_nx: 16,
            grid_ny: 16,
            grid_nz: 16,
            sample_every: 4,
            window_steps: 100,
            ensemble: 8,
            cv_side: 1.52,
            wall_cells: 2,
            equil_steps: 4000,
            profile_times: vec![1.0, 4.0, 8.0, 16.0, 32.0, 64.0],
            block_len: 200,
            mu: 1.6,
        }
    }
}

impl RunConfig {
    pub fn case2() -> Self {
        RunConfig { steps: 200_000, grid_nx: 1, grid_ny: 1, grid_nz: 1, ..Default::default() }
    }

    pub fn case3() -> Self {
        RunConfig { n_molecules: 16384, steps: 13_000, ..Default::default() }
    }

    pub fn parse_file(path: &Path, base: RunConfig) -> Result<RunConfig> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CvmdError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse_str(&text, base)
    }

    pub fn parse_str(text: &str, mut cfg: RunConfig) -> Result<RunConfig> {
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                CvmdError::Config(format!("line {}: expected `key = value`", lineno + 1))
            })?;
            cfg.set(key.trim(), value.trim()).map_err(|e| {
                CvmdError::Config(format!("line {}: {e}", lineno + 1))
            })?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        fn num<T: std::str::FromStr>(key: &str, v: &str) -> Result<T> {
            v.parse::<T>()
                .map_err(|_| CvmdError::Config(format!("bad value for {key}: {v:?}")))
        }
        match key {
            "density" => self.density = num(key, value)?,
            "n_molecules" => self.n_molecules = num(key, value)?,
            "dt" => self.dt = num(key, value)?,
            "steps" => self.steps = num(key, value)?,
            "temperature" => self.temperature = num(key, value)?,
            "seed" => self.seed = num(key, value)?,
            "u0" => self.u0 = num(key, value)?,
            "k4" => self.k4 = num(key, value)?,
            "k6" => self.k6 = num(key, value)?,
            "q_xi" => self.q_xi = num(key, value)?,
            "grid_nx" => self.grid_nx = num(key, value)?,
            "grid_ny" => self.grid_ny = num(key, value)?,
            "grid_nz" => self.grid_nz = num(key, value)?,
            "sample_every" => self.sample_every = num(key, value)?,
            "window_steps" => self.window_steps = num(key, value)?,
            "ensemble" => self.ensemble = num(key, value)?,
            "cv_side" => self.cv_side = num(key, value)?,
            "wall_cells" => self.wall_cells = num(key, value)?,
            "equil_steps" => self.equil_steps = num(key, value)?,
            "mu" => self.mu = num(key, value)?,
            "block_len" => self.block_len = num(key, value)?,
            "profile_times" => {
                let mut times = Vec::new();
                for part in value.split(',') {
                    times.push(num::<f64>(key, part.trim())?);
                }
                self.profile_times = times;
            }
            other => {
                return Err(CvmdError::Config(format!("unknown key {other:?}")));
            }
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0) {
            return Err(CvmdError::Config("dt must be positive".into()));
        }
        if !(self.density > 0.0) {
            return Err(CvmdError::Config("density must be positive".into()));
        }
        if self.grid_nx == 0 || self.grid_ny == 0 || self.grid_nz == 0 {
            return Err(CvmdError::Config("grid shape must be nonzero".into()));
        }
        if self.sample_every == 0 || self.window_steps == 0 {
            return Err(CvmdError::Config("sampling cadences must be nonzero".into()));
        }
        if self.ensemble == 0 {
            return Err(CvmdError::Config("ensemble must be nonzero".into()));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_override() {
        let cfg = RunConfig::parse_str(
            "density = 0.8\nsteps = 100 # short\nprofile_times = 1, 4, 16\n\n# comment\n",
            RunConfig::default(),
        )
        .unwrap();
        assert_eq!(cfg.steps, 100);
        assert_eq!(cfg.profile_times, vec![1.0, 4.0, 16.0]);
    }

    #[test]
    fn unknown_key_rejected() {
        let err = RunConfig::parse_str("no_such_key = 3\n", RunConfig::default());
        assert!(matches!(err, Err(CvmdError::Config(_))));
    }

    #[test]
    fn bad_values_rejected() {
        assert!(RunConfig::parse_str("dt = -0.005\n", RunConfig::default()).is_err());
        assert!(RunConfig::parse_str("dt zero\n", RunConfig::default()).is_err());
        assert!(RunConfig::parse_str("steps = many\n", RunConfig::default()).is_err());
    }
}
