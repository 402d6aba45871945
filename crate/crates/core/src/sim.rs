//! Fixed-step closed-loop simulation of one or more decoupled generators.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{
    compute_alphas, dynamics, electrical_power, equilibrium_from_angle, equilibrium_from_input,
    Alphas, Equilibrium, GeneratorParams, GeneratorState, ModelError,
};
use crate::smc::surface;
use crate::stabilizers::{ControllerConfigs, Stabilizer, StabilizerError, StabilizerKind};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SimError {
    #[error("invalid scenario: {field}: {reason}")]
    InvalidConfig { field: String, reason: String },
    #[error("state of generator {generator} became non-finite at t = {t} s")]
    NonFinite { generator: usize, t: f64 },
    #[error("generator {generator}: {source}")]
    Model {
        generator: usize,
        #[source]
        source: ModelError,
    },
    #[error(transparent)]
    Stabilizer(#[from] StabilizerError),
}

fn invalid(field: impl Into<String>, reason: impl Into<String>) -> SimError {
    SimError::InvalidConfig {
        field: field.into(),
        reason: reason.into(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DisturbanceKind {
    /// `magnitude` is added to `P_m` from `t_start` on.
    MechPowerStep,
    /// `V_s` is replaced by `magnitude` on `[t_start, t_end)`.
    VsDip,
    /// The rotor angle jumps by `magnitude` rad at `t_start`.
    InitialAngleOffset,
}

impl DisturbanceKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            Self::MechPowerStep => "mech-power-step",
            Self::VsDip => "vs-dip",
            Self::InitialAngleOffset => "initial-angle-offset",
        }
    }
}

impl fmt::Display for DisturbanceKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for DisturbanceKind {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        [Self::MechPowerStep, Self::VsDip, Self::InitialAngleOffset]
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| {
                format!("unknown disturbance `{s}` (expected mech-power-step, vs-dip or initial-angle-offset)")
            })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Disturbance {
    pub kind: DisturbanceKind,
    pub t_start: f64,
    /// End of a voltage dip; ignored by the other kinds.
    pub t_end: f64,
    pub magnitude: f64,
    /// Generator index the event applies to; `None` means every generator.
    pub generator: Option<usize>,
}

impl Disturbance {
    pub fn angle_offset(delta: f64) -> Self {
        Self {
            kind: DisturbanceKind::InitialAngleOffset,
            t_start: 0.0,
            t_end: 0.0,
            magnitude: delta,
            generator: None,
        }
    }

    pub fn vs_dip(t_start: f64, t_end: f64, v_fault: f64) -> Self {
        Self {
            kind: DisturbanceKind::VsDip,
            t_start,
            t_end,
            magnitude: v_fault,
            generator: None,
        }
    }

    pub fn power_step(t_start: f64, delta_p: f64) -> Self {
        Self {
            kind: DisturbanceKind::MechPowerStep,
            t_start,
            t_end: 0.0,
            magnitude: delta_p,
            generator: None,
        }
    }

    pub fn applies_to(&self, generator: usize) -> bool {
        self.generator.is_none_or(|g| g == generator)
    }

    /// Time at which the event stops acting on the network.
    pub fn clearance(&self) -> f64 {
        match self.kind {
            DisturbanceKind::VsDip => self.t_end,
            _ => self.t_start,
        }
    }

    pub fn validate(&self) -> Result<(), String> {
        if !(self.t_start >= 0.0 && self.t_start.is_finite()) {
            return Err(format!("t_start must be >= 0, got {}", self.t_start));
        }
        if !self.magnitude.is_finite() {
            return Err("magnitude must be finite".into());
        }
        if self.kind == DisturbanceKind::VsDip {
            if !(self.t_end > self.t_start) {
                return Err(format!(
                    "t_end ({}) must exceed t_start ({})",
                    self.t_end, self.t_start
                ));
            }
            if !(self.magnitude > 0.0) {
                return Err(format!("fault voltage must be > 0, got {}", self.magnitude));
            }
        }
        Ok(())
    }
}

/// Physical parameters with the events active at `t` applied.
pub fn effective_params(
    p: &GeneratorParams,
    disturbances: &[Disturbance],
    t: f64,
) -> GeneratorParams {
    let mut eff = *p;
    for d in disturbances {
        match d.kind {
            DisturbanceKind::MechPowerStep if t >= d.t_start => eff.p_m += d.magnitude,
            DisturbanceKind::VsDip if t >= d.t_start && t < d.t_end => eff.v_s = d.magnitude,
            _ => {}
        }
    }
    eff
}

pub fn alphas_for_time(
    p: &GeneratorParams,
    disturbances: &[Disturbance],
    t: f64,
) -> Result<Alphas, ModelError> {
    compute_alphas(&effective_params(p, disturbances, t))
}

/// One classical Runge-Kutta step with the input held over the step.
/// Returns `None` if the result is not finite.
pub fn rk4_step<F>(f: F, s: &GeneratorState, u: f64, dt: f64) -> Option<GeneratorState>
where
    F: Fn(&GeneratorState, f64) -> GeneratorState,
{
    let k1 = f(s, u);
    let k2 = f(&(*s + (0.5 * dt) * k1), u);
    let k3 = f(&(*s + (0.5 * dt) * k2), u);
    let k4 = f(&(*s + dt * k3), u);
    let next = *s + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    next.is_finite().then_some(next)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum EquilibriumSpec {
    /// Operating rotor angle, rad.
    Angle(f64),
    /// Steady-state control input.
    Input(f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeneratorSpec {
    pub params: GeneratorParams,
    pub operating_point: EquilibriumSpec,
}

impl GeneratorSpec {
    pub fn equilibrium(&self) -> Result<(Alphas, Equilibrium), ModelError> {
        let a = compute_alphas(&self.params)?;
        let e = match self.operating_point {
            EquilibriumSpec::Angle(x1d) => equilibrium_from_angle(x1d, &a)?,
            EquilibriumSpec::Input(u_d) => equilibrium_from_input(u_d, &a)?,
        };
        Ok((a, e))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub t_end: f64,
    pub dt: f64,
    /// Controller sampling period in integration steps.
    pub control_period: usize,
    pub generators: Vec<GeneratorSpec>,
    pub disturbances: Vec<Disturbance>,
    pub controller: StabilizerKind,
    pub configs: ControllerConfigs,
}

impl ScenarioConfig {
    pub fn validate(&self) -> Result<(), SimError> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(invalid("dt", format!("must be > 0, got {}", self.dt)));
        }
        if !(self.t_end > 0.0 && self.t_end.is_finite()) {
            return Err(invalid("t_end", format!("must be > 0, got {}", self.t_end)));
        }
        if self.control_period == 0 {
            return Err(invalid("control_period", "must be >= 1"));
        }
        if self.generators.is_empty() || self.generators.len() > 2 {
            return Err(invalid(
                "generator",
                format!("expected 1 or 2 generators, got {}", self.generators.len()),
            ));
        }
        for (i, d) in self.disturbances.iter().enumerate() {
            d.validate()
                .map_err(|r| invalid(format!("disturbance {i}"), r))?;
            if let Some(g) = d.generator {
                if g >= self.generators.len() {
                    return Err(invalid(
                        format!("disturbance {i}"),
                        format!("no generator {g}"),
                    ));
                }
            }
        }
        for (j, g) in self.generators.iter().enumerate() {
            let mine = self.disturbances_for(j);
            g.params.validate().map_err(|source| SimError::Model {
                generator: j,
                source,
            })?;
            // Every parameter set the run can visit must be valid.
            for d in &mine {
                for t in [d.t_start, d.clearance()] {
                    compute_alphas(&effective_params(&g.params, &mine, t)).map_err(|source| {
                        SimError::Model {
                            generator: j,
                            source,
                        }
                    })?;
                }
            }
        }
        self.configs.check(self.controller)?;
        Ok(())
    }

    pub fn disturbances_for(&self, generator: usize) -> Vec<Disturbance> {
        self.disturbances
            .iter()
            .copied()
            .filter(|d| d.applies_to(generator))
            .collect()
    }

    pub fn steps(&self) -> usize {
        (self.t_end / self.dt).round() as usize
    }

    /// Latest time any disturbance stops acting, 0 without disturbances.
    pub fn last_clearance(&self) -> f64 {
        self.disturbances
            .iter()
            .map(Disturbance::clearance)
            .fold(0.0, f64::max)
    }

    pub fn with_controller(&self, kind: StabilizerKind) -> Self {
        Self {
            controller: kind,
            ..self.clone()
        }
    }
}

/// Time-indexed record of one generator's closed loop. Every column has one
/// entry per time sample.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SimulationTrace {
    pub t: Vec<f64>,
    pub x1: Vec<f64>,
    pub x2: Vec<f64>,
    pub x3: Vec<f64>,
    pub u: Vec<f64>,
    pub v_stab: Vec<f64>,
    /// Sliding surface (0 when no sliding-mode gains are configured).
    pub s: Vec<f64>,
    /// Tuned reaching gain (fuzzy-tuned sliding mode only, else 0).
    pub eta: Vec<f64>,
    pub p_e: Vec<f64>,
    /// Rotor-angle error `x1 - x1d`.
    pub y: Vec<f64>,
}

impl SimulationTrace {
    pub const COLUMNS: [&'static str; 10] =
        ["t", "x1", "x2", "x3", "u", "v_stab", "S", "eta", "P_e", "y"];

    pub fn with_capacity(n: usize) -> Self {
        let v = || Vec::with_capacity(n);
        Self {
            t: v(),
            x1: v(),
            x2: v(),
            x3: v(),
            u: v(),
            v_stab: v(),
            s: v(),
            eta: v(),
            p_e: v(),
            y: v(),
        }
    }

    pub fn len(&self) -> usize {
        self.t.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t.is_empty()
    }

    pub fn columns(&self) -> [&[f64]; 10] {
        [
            &self.t,
            &self.x1,
            &self.x2,
            &self.x3,
            &self.u,
            &self.v_stab,
            &self.s,
            &self.eta,
            &self.p_e,
            &self.y,
        ]
    }

    pub fn columns_mut(&mut self) -> [&mut Vec<f64>; 10] {
        [
            &mut self.t,
            &mut self.x1,
            &mut self.x2,
            &mut self.x3,
            &mut self.u,
            &mut self.v_stab,
            &mut self.s,
            &mut self.eta,
            &mut self.p_e,
            &mut self.y,
        ]
    }

    /// Row `i` in column order.
    pub fn row(&self, i: usize) -> [f64; 10] {
        self.columns().map(|c| c[i])
    }

    pub fn push_row(&mut self, row: [f64; 10]) {
        for (col, v) in self.columns_mut().into_iter().zip(row) {
            col.push(v);
        }
    }

    pub fn final_state(&self) -> Option<GeneratorState> {
        let i = self.len().checked_sub(1)?;
        Some(GeneratorState::new(self.x1[i], self.x2[i], self.x3[i]))
    }

    /// Sample spacing (0 for traces shorter than two samples).
    pub fn dt(&self) -> f64 {
        if self.len() < 2 {
            0.0
        } else {
            self.t[1] - self.t[0]
        }
    }
}

pub fn simulate(cfg: &ScenarioConfig) -> Result<Vec<SimulationTrace>, SimError> {
    cfg.validate()?;
    (0..cfg.generators.len())
        .map(|j| simulate_generator(cfg, j))
        .collect()
}

/// Closed loop of generator `j` alone.
pub fn simulate_generator(cfg: &ScenarioConfig, j: usize) -> Result<SimulationTrace, SimError> {
    let spec = &cfg.generators[j];
    let disturbances = cfg.disturbances_for(j);
    let model_err = |source| SimError::Model {
        generator: j,
        source,
    };
    let (nominal, eq) = spec.equilibrium().map_err(model_err)?;
    let mut stab = Stabilizer::new(cfg.controller, cfg.configs.clone())?;
    let smc = cfg.configs.smc;

    let n = cfg.steps();
    let control_dt = cfg.dt * cfg.control_period as f64;
    let mut trace = SimulationTrace::with_capacity(n + 1);
    let mut state = eq.state();
    let mut offsets: Vec<&Disturbance> = disturbances
        .iter()
        .filter(|d| d.kind == DisturbanceKind::InitialAngleOffset)
        .collect();
    let mut held = None;

    for k in 0..=n {
        let t = k as f64 * cfg.dt;
        offsets.retain(|d| {
            if d.t_start <= t {
                state.x1 += d.magnitude;
                false
            } else {
                true
            }
        });
        if k % cfg.control_period == 0 {
            // The controller always works from the nominal plant model.
            held = Some(stab.control(&state, &eq, &nominal, control_dt)?);
        }
        let out = held.expect("evaluated at k = 0");
        let params = effective_params(&spec.params, &disturbances, t);
        let surf = smc
            .as_ref()
            .map_or(0.0, |g| surface(&state, &eq, &nominal, g));
        trace.push_row([
            t,
            state.x1,
            state.x2,
            state.x3,
            out.u,
            out.v_stab,
            surf,
            out.eta,
            electrical_power(&state, &params),
            state.x1 - eq.x1d,
        ]);
        if k == n {
            break;
        }
        let a = compute_alphas(&params).map_err(model_err)?;
        // The equilibrium's rounding residual is removed so that x_d is an
        // exact fixed point of the nominal plant.
        let plant = |s: &GeneratorState, u: f64| dynamics(s, u, &a) - eq.bias;
        state = rk4_step(plant, &state, out.u, cfg.dt).ok_or(SimError::NonFinite {
            generator: j,
            t: t + cfg.dt,
        })?;
    }
    Ok(trace)
}
