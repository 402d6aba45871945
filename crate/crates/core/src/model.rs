//! Third-order synchronous generator connected to an infinite bus.
//!
//! The machine is described by rotor angle, speed deviation and q-axis
//! transient EMF. Physical parameters are reduced to six coefficients so the
//! dynamics read
//!
//! ```text
//! x1' = x2
//! x2' = a1*x2 - a2*x3*sin(x1) + a3*sin(2*x1) + a4
//! x3' = a5*x3 + a6*cos(x1) + u
//! ```
//!
//! where `u = k_c * u_F / T'do` is the scaled excitation input. The output
//! `y = x1 - x1d` has relative degree three with respect to `u`, which is what
//! the z-coordinates below expose.

use std::f64::consts::{FRAC_PI_2, PI};
use std::ops::{Add, Mul, Sub};

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Guard used for every division by `sin(x1)`.
pub const EPS_SIN: f64 = 1e-3;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("invalid generator parameters: {0}")]
    InvalidParams(String),
    #[error("rotor angle {angle} rad is too close to a multiple of pi (|sin| < {eps})")]
    SingularAngle { angle: f64, eps: f64 },
    #[error("no equilibrium angle in (0, pi/2] for control input u_d = {u_d}")]
    NoRoot { u_d: f64 },
}

/// Physical constants of one machine. Reactances are totals (machine plus
/// network) seen from the infinite bus.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeneratorParams {
    /// Synchronous speed, rad/s.
    pub w0: f64,
    /// Inertia constant, s.
    pub h: f64,
    /// Damping constant, pu.
    pub k_d: f64,
    /// Mechanical input power, pu.
    pub p_m: f64,
    /// Direct-axis synchronous reactance, pu.
    pub x_d: f64,
    /// Direct-axis transient reactance, pu.
    pub x_dp: f64,
    /// d-axis transient open-circuit time constant, s.
    pub t_dop: f64,
    /// Excitation amplifier gain.
    pub k_c: f64,
    /// Infinite bus voltage, pu.
    pub v_s: f64,
}

impl GeneratorParams {
    /// Machine used throughout the examples and the standard scenario.
    pub fn kundur() -> Self {
        Self {
            w0: 376.991,
            h: 3.5,
            k_d: 1.0,
            p_m: 0.9,
            x_d: 1.8,
            x_dp: 0.3,
            t_dop: 8.0,
            k_c: 1.0,
            v_s: 1.0,
        }
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        let fields = [
            ("w0", self.w0),
            ("h", self.h),
            ("k_d", self.k_d),
            ("p_m", self.p_m),
            ("x_d", self.x_d),
            ("x_dp", self.x_dp),
            ("t_dop", self.t_dop),
            ("k_c", self.k_c),
            ("v_s", self.v_s),
        ];
        if let Some((name, _)) = fields.iter().find(|(_, v)| !v.is_finite()) {
            return Err(ModelError::InvalidParams(format!("{name} is not finite")));
        }
        for (name, v) in [
            ("h", self.h),
            ("t_dop", self.t_dop),
            ("w0", self.w0),
            ("k_c", self.k_c),
            ("v_s", self.v_s),
            ("x_dp", self.x_dp),
        ] {
            if v <= 0.0 {
                return Err(ModelError::InvalidParams(format!(
                    "{name} must be > 0, got {v}"
                )));
            }
        }
        if self.x_d < self.x_dp {
            return Err(ModelError::InvalidParams(format!(
                "x_d ({}) must be >= x_dp ({})",
                self.x_d, self.x_dp
            )));
        }
        if self.k_d < 0.0 {
            return Err(ModelError::InvalidParams(format!(
                "k_d must be >= 0, got {}",
                self.k_d
            )));
        }
        if self.p_m < 0.0 {
            return Err(ModelError::InvalidParams(format!(
                "p_m must be >= 0, got {}",
                self.p_m
            )));
        }
        Ok(())
    }

    /// q-axis EMF `E_q` for the given angle and transient EMF.
    pub fn q_axis_emf(&self, s: &GeneratorState) -> f64 {
        (self.x_d / self.x_dp) * s.x3 - ((self.x_d - self.x_dp) / self.x_dp) * self.v_s * s.x1.cos()
    }
}

/// Reduced model constants.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Alphas {
    pub a1: f64,
    pub a2: f64,
    pub a3: f64,
    pub a4: f64,
    pub a5: f64,
    pub a6: f64,
}

impl Alphas {
    /// Speed-deviation derivative (the input-free second state equation).
    #[inline]
    pub fn accel(&self, s: &GeneratorState) -> f64 {
        self.a1 * s.x2 - self.a2 * s.x3 * s.x1.sin() + self.a3 * (2.0 * s.x1).sin() + self.a4
    }
}

pub fn compute_alphas(p: &GeneratorParams) -> Result<Alphas, ModelError> {
    p.validate()?;
    let dx = p.x_d - p.x_dp;
    Ok(Alphas {
        a1: -p.k_d / (2.0 * p.h),
        a2: p.w0 * p.v_s / (2.0 * p.h * p.x_dp),
        a3: p.w0 * dx * p.v_s * p.v_s / (4.0 * p.h * p.x_d * p.x_dp),
        a4: p.w0 * p.p_m / (2.0 * p.h),
        a5: -p.x_d / (p.t_dop * p.x_dp),
        a6: dx * p.v_s / (p.t_dop * p.x_dp),
    })
}

/// `(x1, x2, x3)` = rotor angle (rad), speed deviation (rad/s), transient
/// EMF (pu). Also used for state derivatives.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct GeneratorState {
    pub x1: f64,
    pub x2: f64,
    pub x3: f64,
}

impl GeneratorState {
    pub const fn new(x1: f64, x2: f64, x3: f64) -> Self {
        Self { x1, x2, x3 }
    }

    pub fn is_finite(&self) -> bool {
        self.x1.is_finite() && self.x2.is_finite() && self.x3.is_finite()
    }

    pub fn max_abs(&self) -> f64 {
        self.x1.abs().max(self.x2.abs()).max(self.x3.abs())
    }
}

impl Add for GeneratorState {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Self::new(self.x1 + o.x1, self.x2 + o.x2, self.x3 + o.x3)
    }
}

impl Sub for GeneratorState {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        Self::new(self.x1 - o.x1, self.x2 - o.x2, self.x3 - o.x3)
    }
}

impl Mul<GeneratorState> for f64 {
    type Output = GeneratorState;
    fn mul(self, s: GeneratorState) -> GeneratorState {
        GeneratorState::new(self * s.x1, self * s.x2, self * s.x3)
    }
}

/// State derivative under control input `u`.
#[inline]
pub fn dynamics(s: &GeneratorState, u: f64, a: &Alphas) -> GeneratorState {
    GeneratorState {
        x1: s.x2,
        x2: a.accel(s),
        x3: a.a5 * s.x3 + a.a6 * s.x1.cos() + u,
    }
}

/// Active electrical power delivered to the bus, pu.
pub fn electrical_power(s: &GeneratorState, p: &GeneratorParams) -> f64 {
    p.v_s * p.q_axis_emf(s) * s.x1.sin() / p.x_d
}

/// Operating point the controllers regulate to.
///
/// The defining equations hold only up to rounding at `(x_d, u_d)`. Those
/// residuals are stored so that consumers can subtract them and treat the
/// point as an exact fixed point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Equilibrium {
    pub x1d: f64,
    /// Always zero.
    pub x2d: f64,
    pub x3d: f64,
    pub u_d: f64,
    /// `dynamics(x_d, u_d)` as evaluated in floating point.
    pub bias: GeneratorState,
    /// `f + G*u_d` at `x_d` as evaluated in floating point.
    pub jerk_bias: f64,
}

impl Equilibrium {
    pub fn new(x1d: f64, x3d: f64, u_d: f64, a: &Alphas) -> Self {
        let x = GeneratorState::new(x1d, 0.0, x3d);
        let dg = f_and_g(&x, a);
        Self {
            x1d,
            x2d: 0.0,
            x3d,
            u_d,
            bias: dynamics(&x, u_d, a),
            jerk_bias: dg.f + dg.g * u_d,
        }
    }

    pub fn state(&self) -> GeneratorState {
        GeneratorState::new(self.x1d, self.x2d, self.x3d)
    }

    /// Infinity norm of the state derivative at the operating point.
    pub fn residual(&self, a: &Alphas) -> f64 {
        dynamics(&self.state(), self.u_d, a).max_abs()
    }
}

/// Equilibrium with prescribed rotor angle.
pub fn equilibrium_from_angle(x1d: f64, a: &Alphas) -> Result<Equilibrium, ModelError> {
    let sin = x1d.sin();
    if !(x1d > 0.0 && x1d < PI) || sin < EPS_SIN {
        return Err(ModelError::SingularAngle {
            angle: x1d,
            eps: EPS_SIN,
        });
    }
    let x3d = (a.a3 * (2.0 * x1d).sin() + a.a4) / (a.a2 * sin);
    let u_d = -a.a5 * x3d - a.a6 * x1d.cos();
    Ok(Equilibrium::new(x1d, x3d, u_d, a))
}

const ROOT_SCAN_POINTS: usize = 1000;
const ROOT_SCAN_LO: f64 = 1e-3;
const ROOT_TOL: f64 = 1e-12;

/// Equilibrium with prescribed steady-state control input.
///
/// Eliminating `x3` between the two steady-state equations leaves
/// `g(x1) = -a2*sin(x1)*x3(x1) + a3*sin(2*x1) + a4 = 0` with
/// `x3(x1) = -(a6*cos(x1) + u_d)/a5`. The smallest root in `(0, pi/2]` is
/// bracketed by a uniform scan and refined by bisection.
pub fn equilibrium_from_input(u_d: f64, a: &Alphas) -> Result<Equilibrium, ModelError> {
    let g = |x1: f64| {
        let x3 = -(a.a6 * x1.cos() + u_d) / a.a5;
        -a.a2 * x3 * x1.sin() + a.a3 * (2.0 * x1).sin() + a.a4
    };
    let step = (FRAC_PI_2 - ROOT_SCAN_LO) / (ROOT_SCAN_POINTS - 1) as f64;
    let mut lo = ROOT_SCAN_LO;
    let mut g_lo = g(lo);
    let mut bracket = None;
    for i in 0..ROOT_SCAN_POINTS {
        let x = if i == ROOT_SCAN_POINTS - 1 {
            FRAC_PI_2
        } else {
            ROOT_SCAN_LO + step * i as f64
        };
        let gx = g(x);
        if gx == 0.0 {
            bracket = Some((x, x));
            break;
        }
        if i > 0 && g_lo.signum() != gx.signum() {
            bracket = Some((lo, x));
            break;
        }
        lo = x;
        g_lo = gx;
    }
    let (mut lo, mut hi) = bracket.ok_or(ModelError::NoRoot { u_d })?;
    let mut g_lo = g(lo);
    while hi - lo > ROOT_TOL {
        let mid = 0.5 * (lo + hi);
        let gm = g(mid);
        if gm == 0.0 {
            lo = mid;
            hi = mid;
            break;
        }
        if gm.signum() == g_lo.signum() {
            lo = mid;
            g_lo = gm;
        } else {
            hi = mid;
        }
    }
    equilibrium_from_angle(0.5 * (lo + hi), a)
}

/// Output error and its first two derivatives.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct ZState {
    pub z1: f64,
    pub z2: f64,
    pub z3: f64,
}

/// z-coordinates of `s`; exactly zero at the operating point.
pub fn to_z(s: &GeneratorState, e: &Equilibrium, a: &Alphas) -> ZState {
    ZState {
        z1: s.x1 - e.x1d,
        z2: s.x2,
        z3: a.accel(s) - e.bias.x2,
    }
}

pub fn from_z(z: &ZState, e: &Equilibrium, a: &Alphas) -> Result<GeneratorState, ModelError> {
    let x1 = z.z1 + e.x1d;
    let x2 = z.z2;
    let sin = x1.sin();
    if sin.abs() < EPS_SIN {
        return Err(ModelError::SingularAngle {
            angle: x1,
            eps: EPS_SIN,
        });
    }
    let x3 = (a.a1 * x2 + a.a3 * (2.0 * x1).sin() + a.a4 - (z.z3 + e.bias.x2)) / (a.a2 * sin);
    Ok(GeneratorState { x1, x2, x3 })
}

/// Drift and input gain of the third output derivative: `z3' = f + g*u`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DriftGain {
    pub f: f64,
    pub g: f64,
}

pub fn f_and_g(s: &GeneratorState, a: &Alphas) -> DriftGain {
    let (sin, cos) = s.x1.sin_cos();
    let f = a.a1 * a.accel(s) - a.a2 * (a.a5 * s.x3 + a.a6 * cos) * sin - a.a2 * s.x2 * s.x3 * cos
        + 2.0 * a.a3 * s.x2 * (2.0 * s.x1).cos();
    DriftGain { f, g: -a.a2 * sin }
}
