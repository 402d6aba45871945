//! The reference comparison scenario and its calibration constants.
//!
//! One Kundur-style machine, a 0.1 rad rotor-angle kick at t = 0 and a
//! 100 ms half-voltage dip on the infinite bus at t = 1 s, simulated for 10 s
//! at dt = 1e-4 s.

use crate::model::{GeneratorParams, GeneratorState, ModelError};
use crate::sim::{Disturbance, DisturbanceKind, EquilibriumSpec, GeneratorSpec, ScenarioConfig};
use crate::smc::{surface, SmcGains};
use crate::stabilizers::{ControllerConfigs, FsmcConfig, LeadLagPssConfig, StabilizerKind};

/// Operating rotor angle, rad. The sliding-mode reaching phase swings the
/// rotor about 1.1 rad below this point, so it has to sit well above that to
/// stay clear of the sin(x1) = 0 singularity.
pub const OPERATING_ANGLE: f64 = 1.2;
pub const ANGLE_OFFSET: f64 = 0.1;
pub const DIP_START: f64 = 1.0;
pub const DIP_END: f64 = 1.1;
pub const DIP_VOLTAGE: f64 = 0.5;
pub const T_END: f64 = 10.0;
pub const DT: f64 = 1e-4;

/// Control cap large enough that neither sliding-mode run saturates.
pub const U_MAX: f64 = 50.0;
/// Fuzzy surface normalization as a fraction of |S(0)|.
pub const S_MAX_FRACTION: f64 = 0.02;
pub const ETA_MIN: f64 = 0.5;
pub const ETA_MAX: f64 = 10.0;

pub fn generator() -> GeneratorSpec {
    GeneratorSpec {
        params: GeneratorParams::kundur(),
        operating_point: EquilibriumSpec::Angle(OPERATING_ANGLE),
    }
}

pub fn smc_gains() -> SmcGains {
    SmcGains {
        eta: ETA_MAX,
        u_max: U_MAX,
        ..SmcGains::default()
    }
}

/// Lead-lag stabilizer with two identical lead stages centred near the
/// 12 rad/s swing mode.
pub fn cpss() -> LeadLagPssConfig {
    LeadLagPssConfig {
        k: 0.12,
        t1: 0.25,
        t2: 0.05,
        t3: 0.25,
        t4: 0.05,
        ..LeadLagPssConfig::default()
    }
}

/// Surface value right after an angle offset applied at the equilibrium.
pub fn initial_surface(
    gen: &GeneratorSpec,
    offset: f64,
    gains: &SmcGains,
) -> Result<f64, ModelError> {
    let (a, e) = gen.equilibrium()?;
    let s0 = GeneratorState {
        x1: e.x1d + offset,
        ..e.state()
    };
    Ok(surface(&s0, &e, &a, gains))
}

pub fn standard_scenario(controller: StabilizerKind) -> ScenarioConfig {
    let gen = generator();
    let smc = smc_gains();
    let s0 =
        initial_surface(&gen, ANGLE_OFFSET, &smc).expect("reference operating point is regular");
    let fsmc = FsmcConfig::new(S_MAX_FRACTION * s0.abs(), ETA_MIN, ETA_MAX)
        .expect("reference fuzzy gains are valid");
    let configs = ControllerConfigs {
        smc: Some(smc),
        cpss: Some(cpss()),
        fsmc: Some(fsmc),
        ..ControllerConfigs::defaults(1.0)
    };
    ScenarioConfig {
        t_end: T_END,
        dt: DT,
        control_period: 1,
        generators: vec![gen],
        disturbances: vec![
            Disturbance::angle_offset(ANGLE_OFFSET),
            Disturbance::vs_dip(DIP_START, DIP_END, DIP_VOLTAGE),
        ],
        controller,
        configs,
    }
}

impl ScenarioConfig {
    /// Same scenario with only the initial angle offsets kept.
    pub fn without_faults(&self) -> Self {
        let disturbances = self
            .disturbances
            .iter()
            .copied()
            .filter(|d| d.kind == DisturbanceKind::InitialAngleOffset)
            .collect();
        Self {
            disturbances,
            ..self.clone()
        }
    }
}
