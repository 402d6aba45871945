//! Sliding-mode excitation control.
//!
//! The surface `S = z3 + rho1*z2 + rho2*z1` is a stable second-order filter of
//! the rotor-angle error. The control cancels the drift of `S` and adds a
//! switching term so that `dS/dt = -eta*sign(S)`.

use serde::{Deserialize, Serialize};

use crate::model::{f_and_g, to_z, Alphas, Equilibrium, GeneratorState, EPS_SIN};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SmcGains {
    pub rho1: f64,
    pub rho2: f64,
    /// Reaching gain.
    pub eta: f64,
    /// Boundary-layer half-width; 0 selects the pure sign function.
    pub phi: f64,
    /// Clamp on `|sin x1|` used when inverting the input gain.
    pub eps_sin: f64,
    /// Limit on `|u - u_d|`.
    pub u_max: f64,
}

impl Default for SmcGains {
    fn default() -> Self {
        Self {
            rho1: 5.0,
            rho2: 6.0,
            eta: 10.0,
            phi: 0.0,
            eps_sin: EPS_SIN,
            u_max: 10.0,
        }
    }
}

impl SmcGains {
    pub fn validate(&self) -> Result<(), String> {
        if !(self.rho1 > 0.0) {
            return Err(format!("rho1 must be > 0, got {}", self.rho1));
        }
        if !(self.rho2 > 0.0) {
            return Err(format!("rho2 must be > 0, got {}", self.rho2));
        }
        if !(self.eta > 0.0) {
            return Err(format!("eta must be > 0, got {}", self.eta));
        }
        if !(self.phi >= 0.0) {
            return Err(format!("phi must be >= 0, got {}", self.phi));
        }
        if !(self.eps_sin > 0.0) {
            return Err(format!("eps_sin must be > 0, got {}", self.eps_sin));
        }
        if !(self.u_max > 0.0) {
            return Err(format!("u_max must be > 0, got {}", self.u_max));
        }
        Ok(())
    }

    /// Switching function: sign (with `sign(0) = 0`) or linear saturation.
    pub fn switching(&self, s: f64) -> f64 {
        if self.phi > 0.0 {
            (s / self.phi).clamp(-1.0, 1.0)
        } else if s > 0.0 {
            1.0
        } else if s < 0.0 {
            -1.0
        } else {
            0.0
        }
    }
}

pub fn surface(s: &GeneratorState, e: &Equilibrium, a: &Alphas, g: &SmcGains) -> f64 {
    let z = to_z(s, e, a);
    z.z3 + g.rho1 * z.z2 + g.rho2 * z.z1
}

/// Surface written directly in machine coordinates.
pub fn surface_expanded(s: &GeneratorState, e: &Equilibrium, a: &Alphas, g: &SmcGains) -> f64 {
    (a.a1 + g.rho1) * s.x2 - a.a2 * s.x3 * s.x1.sin()
        + a.a3 * (2.0 * s.x1).sin()
        + a.a4
        + g.rho2 * (s.x1 - e.x1d)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SmcOutput {
    pub u: f64,
    pub surface: f64,
    /// Reaching gain actually used.
    pub eta: f64,
    /// The input gain was clamped because `|sin x1| < eps_sin`.
    pub gain_clamped: bool,
    /// `u` hit the `u_d +/- u_max` limit.
    pub saturated: bool,
}

pub fn smc_control(
    s: &GeneratorState,
    e: &Equilibrium,
    a: &Alphas,
    g: &SmcGains,
    eta_override: Option<f64>,
) -> SmcOutput {
    let z = to_z(s, e, a);
    let surf = z.z3 + g.rho1 * z.z2 + g.rho2 * z.z1;
    let eta = eta_override.unwrap_or(g.eta);
    let dg = f_and_g(s, a);
    let sin = s.x1.sin();
    let (gain, gain_clamped) = if sin.abs() < g.eps_sin {
        let sign = if sin < 0.0 { -1.0 } else { 1.0 };
        (-a.a2 * g.eps_sin * sign, true)
    } else {
        (dg.g, false)
    };
    // Written as an increment on u_d so the operating point maps to u_d exactly.
    let drift = dg.f + gain * e.u_d - e.jerk_bias;
    let raw = e.u_d + (-drift - g.rho1 * z.z3 - g.rho2 * z.z2 - eta * g.switching(surf)) / gain;
    let u = raw.clamp(e.u_d - g.u_max, e.u_d + g.u_max);
    SmcOutput {
        u,
        surface: surf,
        eta,
        gain_clamped,
        saturated: u != raw,
    }
}

/// `dS/dt` for an arbitrary input held at `u`.
pub fn surface_rate(s: &GeneratorState, u: f64, e: &Equilibrium, a: &Alphas, g: &SmcGains) -> f64 {
    let z = to_z(s, e, a);
    let dg = f_and_g(s, a);
    dg.f + dg.g * u + g.rho1 * z.z3 + g.rho2 * z.z2
}

/// `S * dS/dt` under the sliding-mode law. Equals `-eta*|S|` whenever the
/// gain is not clamped and the output is not saturated.
pub fn reaching_product(s: &GeneratorState, e: &Equilibrium, a: &Alphas, g: &SmcGains) -> f64 {
    let out = smc_control(s, e, a, g, None);
    out.surface * surface_rate(s, out.u, e, a, g)
}
