//! Closed-form continuum reference for start-up Couette flow: the Fourier
//! series solution of the 1-D momentum diffusion equation between a
//! stationary and a sliding plate, its shear stress, and the whole-volume
//! momentum/face-force histories.
//!
//! The velocity is evaluated as the steady profile U0 y / L in closed form
//! plus the exponentially convergent transient sum. This is algebraically
//! the same Fourier solution, but the truncation error decays like
//! exp(-(n pi / L)^2 mu t / rho) instead of 1/n, so different truncation
//! orders agree to machine precision for t > 0.

use crate::error::{CvmdError, Result};

#[derive(Clone, Copy, Debug)]
pub struct CouetteParams {
    /// Shear viscosity.
    pub mu: f64,
    /// Mass density.
    pub rho: f64,
    /// Channel height (fluid extent).
    pub l: f64,
    /// Sliding speed of the y = L wall.
    pub u0: f64,
    /// Series truncation order.
    pub n_terms: usize,
    /// Control-volume cross-section for the integral forms.
    pub dx: f64,
    pub dz: f64,
}

impl CouetteParams {
    pub fn new(mu: f64, rho: f64, l: f64, u0: f64) -> Self {
        CouetteParams { mu, rho, l, u0, n_terms: 1000, dx: l, dz: l }
    }

    fn check(&self) -> Result<()> {
        if !(self.mu > 0.0 && self.rho > 0.0 && self.l > 0.0) || self.n_terms == 0 {
            return Err(CvmdError::Domain("couette parameters must be positive".into()));
        }
        Ok(())
    }

    fn decay(&self, n: usize, t: f64) -> f64 {
        let lambda = (n as f64 * std::f64::consts::PI / self.l).powi(2);
        (-lambda * self.mu * t / self.rho).exp()
    }
}

/// Streamwise velocity u_x(y, t); boundary values are exact.
pub fn couette_velocity(y: f64, t: f64, p: &CouetteParams) -> Result<f64> {
    p.check()?;
    if !(0.0..=p.l).contains(&y) || t < 0.0 {
        return Err(CvmdError::Domain(format!("couette_velocity outside domain: y={y}, t={t}")));
    }
    if y == 0.0 {
        return Ok(0.0);
    }
    if y == p.l {
        return Ok(p.u0);
    }
    if t == 0.0 {
        return Ok(0.0);
    }
    let mut u = p.u0 * y / p.l;
    for n in 1..=p.n_terms {
        let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
        let coeff = 2.0 * p.u0 * sign / (n as f64 * std::f64::consts::PI);
        let term = coeff * p.decay(n, t) * (n as f64 * std::f64::consts::PI * y / p.l).sin();
        u += term;
        if coeff.abs() * p.decay(n, t) < 1e-15 * p.u0.abs().max(1e-300) {
            break;
        }
    }
    Ok(u)
}

/// Shear pressure Pi_xy(y, t) = -mu du_x/dy; requires t > 0 for convergence
/// of the cosine series (the impulsive start is singular at the moving
/// wall).
pub fn couette_shear_stress(y: f64, t: f64, p: &CouetteParams) -> Result<f64> {
    p.check()?;
    if !(0.0..=p.l).contains(&y) || t <= 0.0 {
        return Err(CvmdError::Domain(format!(
            "couette_shear_stress outside domain: y={y}, t={t}"
        )));
    }
    let mut s = 0.0;
    for n in 1..=p.n_terms {
        let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
        let term = sign * p.decay(n, t) * (n as f64 * std::f64::consts::PI * y / p.l).cos();
        s += term;
        if p.decay(n, t) < 1e-16 {
            break;
        }
    }
    Ok(-(p.mu * p.u0 / p.l) * (1.0 + 2.0 * s))
}

/// Whole-volume momentum balance series at time t: the rate of change of
/// x-momentum in the volume and the two face-force series as printed
/// (transient parts; each face integral additionally carries the steady
/// offset `-dx dz mu U0 / L`, which cancels in the balance).
///
/// The identity `dp_dt = -(top - bottom)` holds term by term, with `top` the
/// series whose coefficients are all +1 (the y = L face) and `bottom` the
/// alternating one (y = 0).
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct MomentumHistory {
    pub dp_dt: f64,
    pub top_force: f64,
    pub bottom_force: f64,
}

pub fn cv_momentum_history(t: f64, p: &CouetteParams) -> Result<MomentumHistory> {
    p.check()?;
    if t <= 0.0 {
        return Err(CvmdError::Domain("momentum history series diverge at t = 0".into()));
    }
    let c = p.dx * p.dz * p.mu * p.u0 / p.l;
    let mut dp_dt = 0.0;
    let mut top = 0.0;
    let mut bottom = 0.0;
    for n in 1..=p.n_terms {
        let e = p.decay(n, t);
        let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
        dp_dt += (1.0 - sign) * e;
        top += e;
        bottom += sign * e;
        if e < 1e-16 {
            break;
        }
    }
    Ok(MomentumHistory {
        dp_dt: 2.0 * c * dp_dt,
        top_force: -2.0 * c * top,
        bottom_force: -2.0 * c * bottom,
    })
}

/// Steady face force per unit of the printed series' gauge: the offset to
/// add to `top_force`/`bottom_force` for the full face integral.
pub fn steady_face_force(p: &CouetteParams) -> f64 {
    -p.dx * p.dz * p.mu * p.u0 / p.l
}
