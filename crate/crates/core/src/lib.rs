//! Single-machine power system stabilizer toolkit.
//!
//! A third-order generator model against an infinite bus, five excitation
//! stabilizer variants (none, lead-lag, fuzzy, sliding-mode, fuzzy-tuned
//! sliding-mode), a fixed-step simulator and the damping metrics used to rank
//! them.

// Validation is written as `!(x > 0.0)` so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod fuzzy;
pub mod metrics;
pub mod model;
pub mod scenario;
pub mod sim;
pub mod smc;
pub mod stabilizers;

pub use fuzzy::{FuzzyError, FuzzySystem, LinguisticVariable, MembershipFunction, RuleBase};
pub use metrics::{compare_report, MetricsError, MetricsReport, MetricsRow, Settling};
pub use model::{
    compute_alphas, dynamics, electrical_power, equilibrium_from_angle, equilibrium_from_input,
    f_and_g, from_z, to_z, Alphas, DriftGain, Equilibrium, GeneratorParams, GeneratorState,
    ModelError, ZState, EPS_SIN,
};
pub use scenario::{initial_surface, standard_scenario};
pub use sim::{
    alphas_for_time, rk4_step, simulate, Disturbance, DisturbanceKind, EquilibriumSpec,
    GeneratorSpec, ScenarioConfig, SimError, SimulationTrace,
};
pub use smc::{reaching_product, smc_control, surface, SmcGains, SmcOutput};
pub use stabilizers::{
    ControllerConfigs, FpssConfig, FsmcConfig, LeadLagPss, LeadLagPssConfig, Stabilizer,
    StabilizerKind,
};
