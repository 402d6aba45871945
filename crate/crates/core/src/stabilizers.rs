//! The five excitation stabilizer variants behind a single controller.
//!
//! Lead-lag and fuzzy stabilizers produce a supplementary signal `v_stab` that
//! is superposed on the steady-state field input, `u = u_d + v_stab`. The two
//! sliding-mode variants compute `u` directly from full-state feedback.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::fuzzy::{
    FuzzyError, FuzzySystem, LinguisticVariable, RuleBase, DEFAULT_GRID_RESOLUTION,
};
use crate::model::{Alphas, Equilibrium, GeneratorState};
use crate::smc::{smc_control, surface, SmcGains};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum StabilizerError {
    #[error(
        "time step {dt} s is invalid for the lead-lag stabilizer (must be > 0 and <= {limit} s)"
    )]
    InvalidDt { dt: f64, limit: f64 },
    #[error("controller `{kind}` needs a [{section}] configuration")]
    MissingConfig {
        kind: StabilizerKind,
        section: &'static str,
    },
    #[error("invalid {section} configuration: {reason}")]
    InvalidConfig {
        section: &'static str,
        reason: String,
    },
    #[error(transparent)]
    Fuzzy(#[from] FuzzyError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StabilizerKind {
    Nopss,
    Cpss,
    Fpss,
    Smcpss,
    Fsmcpss,
}

impl StabilizerKind {
    pub const ALL: [StabilizerKind; 5] = [
        Self::Nopss,
        Self::Cpss,
        Self::Fpss,
        Self::Smcpss,
        Self::Fsmcpss,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            Self::Nopss => "nopss",
            Self::Cpss => "cpss",
            Self::Fpss => "fpss",
            Self::Smcpss => "smcpss",
            Self::Fsmcpss => "fsmcpss",
        }
    }
}

impl fmt::Display for StabilizerKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for StabilizerKind {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| {
                format!(
                    "unknown controller `{s}` (expected one of nopss, cpss, fpss, smcpss, fsmcpss)"
                )
            })
    }
}

// ---------------------------------------------------------------------------
// Lead-lag stabilizer

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LeadLagPssConfig {
    pub k: f64,
    pub t_lp: f64,
    pub t_w: f64,
    pub t1: f64,
    pub t2: f64,
    pub t3: f64,
    pub t4: f64,
    pub v_min: f64,
    pub v_max: f64,
}

impl Default for LeadLagPssConfig {
    fn default() -> Self {
        Self {
            k: 20.0,
            t_lp: 0.03,
            t_w: 2.0,
            t1: 0.05,
            t2: 0.02,
            t3: 3.0,
            t4: 5.4,
            v_min: -0.15,
            v_max: 0.15,
        }
    }
}

impl LeadLagPssConfig {
    pub fn validate(&self) -> Result<(), StabilizerError> {
        let bad = |reason: String| StabilizerError::InvalidConfig {
            section: "cpss",
            reason,
        };
        for (name, t) in [
            ("t_lp", self.t_lp),
            ("t_w", self.t_w),
            ("t1", self.t1),
            ("t2", self.t2),
            ("t3", self.t3),
            ("t4", self.t4),
        ] {
            if !(t > 0.0) {
                return Err(bad(format!("{name} must be > 0, got {t}")));
            }
        }
        if !(self.k > 0.0) {
            return Err(bad(format!("k must be > 0, got {}", self.k)));
        }
        if !(self.v_min < 0.0 && self.v_max > 0.0) {
            return Err(bad(format!(
                "need v_min < 0 < v_max, got [{}, {}]",
                self.v_min, self.v_max
            )));
        }
        Ok(())
    }

    /// Largest step the trapezoidal realization accepts.
    pub fn max_dt(&self) -> f64 {
        self.t_lp.min(self.t2).min(self.t4) / 2.0
    }
}

/// First-order section `(n0 + n1*s) / (1 + d1*s)` discretized with the
/// trapezoidal rule.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
struct Section {
    n0: f64,
    n1: f64,
    d1: f64,
    x_prev: f64,
    y_prev: f64,
}

impl Section {
    fn new(n0: f64, n1: f64, d1: f64) -> Self {
        Self {
            n0,
            n1,
            d1,
            x_prev: 0.0,
            y_prev: 0.0,
        }
    }

    fn low_pass(t: f64) -> Self {
        Self::new(1.0, 0.0, t)
    }

    fn washout(t: f64) -> Self {
        Self::new(0.0, t, t)
    }

    fn lead_lag(t_lead: f64, t_lag: f64) -> Self {
        Self::new(1.0, t_lead, t_lag)
    }

    fn step(&mut self, x: f64, dt: f64) -> f64 {
        let k = 2.0 / dt;
        let a0 = 1.0 + self.d1 * k;
        let a1 = 1.0 - self.d1 * k;
        let b0 = self.n0 + self.n1 * k;
        let b1 = self.n0 - self.n1 * k;
        let y = (b0 * x + b1 * self.x_prev - a1 * self.y_prev) / a0;
        self.x_prev = x;
        self.y_prev = y;
        y
    }

    fn reset(&mut self) {
        self.x_prev = 0.0;
        self.y_prev = 0.0;
    }
}

/// Low-pass sensor, gain, washout, two lead-lag stages and an output limiter.
#[derive(Debug, Clone, PartialEq)]
pub struct LeadLagPss {
    cfg: LeadLagPssConfig,
    sensor: Section,
    washout: Section,
    stage1: Section,
    stage2: Section,
}

impl LeadLagPss {
    pub fn new(cfg: LeadLagPssConfig) -> Result<Self, StabilizerError> {
        cfg.validate()?;
        Ok(Self {
            cfg,
            sensor: Section::low_pass(cfg.t_lp),
            washout: Section::washout(cfg.t_w),
            stage1: Section::lead_lag(cfg.t1, cfg.t2),
            stage2: Section::lead_lag(cfg.t3, cfg.t4),
        })
    }

    pub fn config(&self) -> &LeadLagPssConfig {
        &self.cfg
    }

    pub fn reset(&mut self) {
        for s in [
            &mut self.sensor,
            &mut self.washout,
            &mut self.stage1,
            &mut self.stage2,
        ] {
            s.reset();
        }
    }

    /// Advances the filter chain by `dt` and returns the limited output.
    pub fn step(&mut self, omega_dev: f64, dt: f64) -> Result<f64, StabilizerError> {
        let limit = self.cfg.max_dt();
        if !(dt > 0.0 && dt <= limit) {
            return Err(StabilizerError::InvalidDt { dt, limit });
        }
        let v = self.sensor.step(omega_dev, dt);
        let v = self.washout.step(self.cfg.k * v, dt);
        let v = self.stage1.step(v, dt);
        let v = self.stage2.step(v, dt);
        Ok(v.clamp(self.cfg.v_min, self.cfg.v_max))
    }
}

// ---------------------------------------------------------------------------
// Fuzzy stabilizer

pub const SEVEN_LABELS: [&str; 7] = ["NB", "NM", "NS", "ZE", "PS", "PM", "PB"];

/// Speed deviation (rows) by acceleration (columns) to stabilizing signal.
pub const FPSS_RULES: [[&str; 7]; 7] = [
    ["NB", "NB", "NB", "NB", "NM", "NM", "NS"],
    ["NB", "NM", "NM", "NM", "NS", "NS", "ZE"],
    ["NM", "NM", "NS", "NS", "ZE", "ZE", "PS"],
    ["NM", "NS", "NS", "ZE", "PS", "PS", "PM"],
    ["NS", "ZE", "ZE", "PS", "PS", "PM", "PM"],
    ["ZE", "PS", "PS", "PM", "PM", "PM", "PB"],
    ["PS", "PM", "PM", "PB", "PB", "PB", "PB"],
];

pub fn fpss_system() -> Result<FuzzySystem, FuzzyError> {
    let dw = LinguisticVariable::seven_term("dw", -1.0, 1.0, SEVEN_LABELS)?;
    let da = LinguisticVariable::seven_term("da", -1.0, 1.0, SEVEN_LABELS)?;
    let out = LinguisticVariable::seven_term("vstab", -1.0, 1.0, SEVEN_LABELS)?;
    let rules = RuleBase::from_labels(
        2,
        FPSS_RULES.iter().enumerate().flat_map(|(i, row)| {
            row.iter()
                .enumerate()
                .map(move |(j, &cons)| (vec![SEVEN_LABELS[i], SEVEN_LABELS[j]], cons))
        }),
    )?;
    FuzzySystem::new(vec![dw, da], out, rules, DEFAULT_GRID_RESOLUTION)
}

#[derive(Debug, Clone, PartialEq)]
pub struct FpssConfig {
    /// Speed-deviation normalization, s/rad.
    pub k_w: f64,
    /// Acceleration normalization, s^2/rad.
    pub k_a: f64,
    /// Output scale, pu.
    pub k_out: f64,
    pub system: FuzzySystem,
}

impl FpssConfig {
    pub fn new(k_w: f64, k_a: f64, k_out: f64) -> Result<Self, StabilizerError> {
        for (name, v) in [("k_w", k_w), ("k_a", k_a), ("k_out", k_out)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(StabilizerError::InvalidConfig {
                    section: "fpss",
                    reason: format!("{name} must be > 0"),
                });
            }
        }
        Ok(Self {
            k_w,
            k_a,
            k_out,
            system: fpss_system()?,
        })
    }
}

impl Default for FpssConfig {
    fn default() -> Self {
        Self::new(5.0, 0.5, 0.15).expect("default fuzzy stabilizer is valid")
    }
}

pub fn fpss_eval(cfg: &FpssConfig, omega_dev: f64, accel: f64) -> f64 {
    let out = cfg
        .system
        .infer(&[cfg.k_w * omega_dev, cfg.k_a * accel])
        .expect("two-input system");
    (cfg.k_out * out).clamp(-cfg.k_out, cfg.k_out)
}

// ---------------------------------------------------------------------------
// Fuzzy reaching-gain tuner

pub const FSMC_LABELS: [&str; 7] = ["VVS", "VS", "S", "M", "L", "VL", "VVL"];

/// `|S|` term to reaching-gain term, in rule order.
pub const FSMC_RULES: [(&str, &str); 7] = [
    ("VVS", "VVS"),
    ("VS", "VS"),
    ("S", "S"),
    ("M", "M"),
    ("L", "L"),
    ("VL", "VL"),
    ("VVL", "VVL"),
];

pub fn fsmc_system() -> Result<FuzzySystem, FuzzyError> {
    let input = LinguisticVariable::seven_term("abs_s", 0.0, 1.0, FSMC_LABELS)?;
    let out = LinguisticVariable::seven_term("eta", 0.0, 1.0, FSMC_LABELS)?;
    let rules = RuleBase::from_labels(1, FSMC_RULES.iter().map(|&(a, c)| (vec![a], c)))?;
    FuzzySystem::new(vec![input], out, rules, DEFAULT_GRID_RESOLUTION)
}

#[derive(Debug, Clone, PartialEq)]
pub struct FsmcConfig {
    /// `|S|` mapped to the top of the input universe.
    pub s_max: f64,
    pub eta_min: f64,
    pub eta_max: f64,
    pub system: FuzzySystem,
}

impl FsmcConfig {
    pub fn new(s_max: f64, eta_min: f64, eta_max: f64) -> Result<Self, StabilizerError> {
        let bad = |reason: String| StabilizerError::InvalidConfig {
            section: "fsmc",
            reason,
        };
        if !(s_max > 0.0 && s_max.is_finite()) {
            return Err(bad(format!("s_max must be > 0, got {s_max}")));
        }
        if !(eta_min > 0.0 && eta_min <= eta_max && eta_max.is_finite()) {
            return Err(bad(format!(
                "need 0 < eta_min <= eta_max, got [{eta_min}, {eta_max}]"
            )));
        }
        Ok(Self {
            s_max,
            eta_min,
            eta_max,
            system: fsmc_system()?,
        })
    }
}

pub fn fsmc_eta(cfg: &FsmcConfig, surface: f64) -> f64 {
    let x = (surface.abs() / cfg.s_max).min(1.0);
    let level = cfg.system.infer(&[x]).expect("single-input system");
    cfg.eta_min + (cfg.eta_max - cfg.eta_min) * level
}

// ---------------------------------------------------------------------------
// Dispatch

/// Time constant of the low-pass applied to the differentiated speed.
pub const ACCEL_FILTER_T: f64 = 0.02;

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ControllerConfigs {
    pub smc: Option<SmcGains>,
    pub cpss: Option<LeadLagPssConfig>,
    pub fpss: Option<FpssConfig>,
    pub fsmc: Option<FsmcConfig>,
}

impl ControllerConfigs {
    /// Every section at its default value; `s_max` must be supplied since it
    /// depends on the scenario.
    pub fn defaults(s_max: f64) -> Self {
        Self {
            smc: Some(SmcGains::default()),
            cpss: Some(LeadLagPssConfig::default()),
            fpss: Some(FpssConfig::default()),
            fsmc: Some(FsmcConfig::new(s_max, 0.5, 10.0).expect("valid defaults")),
        }
    }

    /// Sections required by `kind`, in the order they are checked.
    pub fn required_sections(kind: StabilizerKind) -> &'static [&'static str] {
        match kind {
            StabilizerKind::Nopss => &[],
            StabilizerKind::Cpss => &["cpss"],
            StabilizerKind::Fpss => &["fpss"],
            StabilizerKind::Smcpss => &["smc"],
            StabilizerKind::Fsmcpss => &["smc", "fsmc"],
        }
    }

    pub fn check(&self, kind: StabilizerKind) -> Result<(), StabilizerError> {
        for &section in Self::required_sections(kind) {
            let present = match section {
                "smc" => self.smc.is_some(),
                "cpss" => self.cpss.is_some(),
                "fpss" => self.fpss.is_some(),
                _ => self.fsmc.is_some(),
            };
            if !present {
                return Err(StabilizerError::MissingConfig { kind, section });
            }
        }
        Ok(())
    }
}

/// Backward difference of the speed deviation through a first-order low-pass.
#[derive(Debug, Clone, PartialEq)]
struct AccelEstimator {
    prev: Option<f64>,
    filter: Section,
}

impl AccelEstimator {
    fn new() -> Self {
        Self {
            prev: None,
            filter: Section::low_pass(ACCEL_FILTER_T),
        }
    }

    fn update(&mut self, omega_dev: f64, dt: f64) -> f64 {
        let raw = match self.prev {
            Some(p) => (omega_dev - p) / dt,
            None => 0.0,
        };
        self.prev = Some(omega_dev);
        self.filter.step(raw, dt)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ControlOutput {
    pub u: f64,
    /// `u - u_d`.
    pub v_stab: f64,
    /// Sliding surface, or 0 when no sliding-mode gains are configured.
    pub surface: f64,
    /// Reaching gain used by the fuzzy-tuned controller, 0 otherwise.
    pub eta: f64,
    pub gain_clamped: bool,
    pub saturated: bool,
}

/// One generator's controller with its filter states.
#[derive(Debug, Clone)]
pub struct Stabilizer {
    kind: StabilizerKind,
    configs: ControllerConfigs,
    cpss: Option<LeadLagPss>,
    accel: AccelEstimator,
}

impl Stabilizer {
    pub fn new(kind: StabilizerKind, configs: ControllerConfigs) -> Result<Self, StabilizerError> {
        configs.check(kind)?;
        if let Some(g) = &configs.smc {
            g.validate()
                .map_err(|reason| StabilizerError::InvalidConfig {
                    section: "smc",
                    reason,
                })?;
        }
        let cpss = match (kind, &configs.cpss) {
            (StabilizerKind::Cpss, Some(c)) => Some(LeadLagPss::new(*c)?),
            _ => None,
        };
        Ok(Self {
            kind,
            configs,
            cpss,
            accel: AccelEstimator::new(),
        })
    }

    pub fn kind(&self) -> StabilizerKind {
        self.kind
    }

    pub fn configs(&self) -> &ControllerConfigs {
        &self.configs
    }

    /// Zeroes all filter states.
    pub fn reset(&mut self) {
        if let Some(c) = &mut self.cpss {
            c.reset();
        }
        self.accel = AccelEstimator::new();
    }

    /// Control input for the sampled state. `a` is the controller's model of
    /// the plant, `dt` the controller sampling period.
    pub fn control(
        &mut self,
        s: &GeneratorState,
        e: &Equilibrium,
        a: &Alphas,
        dt: f64,
    ) -> Result<ControlOutput, StabilizerError> {
        let surf = self
            .configs
            .smc
            .as_ref()
            .map_or(0.0, |g| surface(s, e, a, g));
        let supplementary = |v: f64| ControlOutput {
            u: e.u_d + v,
            v_stab: v,
            surface: surf,
            eta: 0.0,
            gain_clamped: false,
            saturated: false,
        };
        let out = match self.kind {
            StabilizerKind::Nopss => supplementary(0.0),
            StabilizerKind::Cpss => {
                let pss = self.cpss.as_mut().expect("checked at construction");
                supplementary(pss.step(s.x2, dt)?)
            }
            StabilizerKind::Fpss => {
                let cfg = self.configs.fpss.as_ref().expect("checked at construction");
                let accel = self.accel.update(s.x2, dt);
                supplementary(fpss_eval(cfg, s.x2, accel))
            }
            StabilizerKind::Smcpss | StabilizerKind::Fsmcpss => {
                let g = self.configs.smc.as_ref().expect("checked at construction");
                let eta = match (self.kind, &self.configs.fsmc) {
                    (StabilizerKind::Fsmcpss, Some(f)) => Some(fsmc_eta(f, surf)),
                    _ => None,
                };
                let o = smc_control(s, e, a, g, eta);
                ControlOutput {
                    u: o.u,
                    v_stab: o.u - e.u_d,
                    surface: o.surface,
                    eta: eta.unwrap_or(0.0),
                    gain_clamped: o.gain_clamped,
                    saturated: o.saturated,
                }
            }
        };
        Ok(out)
    }
}

/// Stateless-looking entry point: builds a fresh controller (zeroed filter
/// states) and evaluates it once.
pub fn control_input(
    kind: StabilizerKind,
    s: &GeneratorState,
    e: &Equilibrium,
    a: &Alphas,
    configs: &ControllerConfigs,
    dt: f64,
) -> Result<f64, StabilizerError> {
    Ok(Stabilizer::new(kind, configs.clone())?
        .control(s, e, a, dt)?
        .u)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{compute_alphas, equilibrium_from_angle, GeneratorParams};

    #[test]
    fn kind_names_round_trip() {
        for k in StabilizerKind::ALL {
            assert_eq!(k.as_str().parse::<StabilizerKind>().unwrap(), k);
        }
        assert!("pss".parse::<StabilizerKind>().is_err());
    }

    #[test]
    fn cpss_zero_in_zero_out() {
        let mut pss = LeadLagPss::new(LeadLagPssConfig::default()).unwrap();
        for _ in 0..1000 {
            assert_eq!(pss.step(0.0, 1e-3).unwrap(), 0.0);
        }
    }

    #[test]
    fn cpss_washout_blocks_dc() {
        let mut pss = LeadLagPss::new(LeadLagPssConfig {
            v_min: -1e3,
            v_max: 1e3,
            ..Default::default()
        })
        .unwrap();
        let mut v = f64::NAN;
        // 120 s >> T_w, T4.
        for _ in 0..120_000 {
            v = pss.step(0.01, 1e-3).unwrap();
        }
        assert!(v.abs() < 1e-6, "{v}");
    }

    #[test]
    fn cpss_output_limited() {
        let cfg = LeadLagPssConfig::default();
        let mut pss = LeadLagPss::new(cfg).unwrap();
        for i in 0..5000 {
            let w = 3.0 * ((i as f64) * 0.37).sin() + if i % 7 == 0 { 5.0 } else { -2.0 };
            let v = pss.step(w, 1e-3).unwrap();
            assert!(v >= cfg.v_min && v <= cfg.v_max);
        }
    }

    #[test]
    fn cpss_rejects_bad_dt() {
        let mut pss = LeadLagPss::new(LeadLagPssConfig::default()).unwrap();
        assert!(matches!(
            pss.step(0.0, 0.0),
            Err(StabilizerError::InvalidDt { .. })
        ));
        assert!(matches!(
            pss.step(0.0, 0.011),
            Err(StabilizerError::InvalidDt { .. })
        ));
        assert!(pss.step(0.0, 0.01).is_ok());
    }

    #[test]
    fn cpss_reset_zeroes_state() {
        let mut pss = LeadLagPss::new(LeadLagPssConfig::default()).unwrap();
        for _ in 0..100 {
            pss.step(1.0, 1e-3).unwrap();
        }
        pss.reset();
        assert_eq!(pss.step(0.0, 1e-3).unwrap(), 0.0);
    }

    #[test]
    fn fpss_origin_and_table_corners() {
        let cfg = FpssConfig::default();
        assert!(fpss_eval(&cfg, 0.0, 0.0).abs() <= 1e-9);
        let nb_w = -1.0 / cfg.k_w;
        let nb_a = -1.0 / cfg.k_a;
        assert!(fpss_eval(&cfg, nb_w, nb_a) <= -0.8 * cfg.k_out);
        let ps = fpss_eval(&cfg, -nb_w, nb_a);
        assert!(ps > 0.0 && ps < 0.5 * cfg.k_out, "{ps}");
    }

    #[test]
    fn fpss_table_is_antisymmetric() {
        let neg = |l: &str| SEVEN_LABELS[6 - SEVEN_LABELS.iter().position(|&x| x == l).unwrap()];
        for i in 0..7 {
            for j in 0..7 {
                assert_eq!(FPSS_RULES[6 - i][6 - j], neg(FPSS_RULES[i][j]));
            }
        }
    }

    #[test]
    fn fsmc_eta_end_points() {
        let cfg = FsmcConfig::new(4.0, 0.5, 10.0).unwrap();
        let span = cfg.eta_max - cfg.eta_min;
        let e0 = fsmc_eta(&cfg, 0.0);
        assert!(e0 >= cfg.eta_min && e0 <= cfg.eta_min + 0.1 * span, "{e0}");
        for s in [4.0, -4.0, 100.0] {
            let e = fsmc_eta(&cfg, s);
            assert!(e >= cfg.eta_max - 0.1 * span && e <= cfg.eta_max, "{e}");
        }
        let mid = fsmc_eta(&cfg, 2.0);
        let centre = 0.5 * (cfg.eta_min + cfg.eta_max);
        assert!((mid - centre).abs() <= 0.1 * centre, "{mid}");
        assert_eq!(fsmc_eta(&cfg, -1.3), fsmc_eta(&cfg, 1.3));
    }

    #[test]
    fn fsmc_config_validation() {
        assert!(FsmcConfig::new(0.0, 0.5, 10.0).is_err());
        assert!(FsmcConfig::new(1.0, 0.0, 10.0).is_err());
        assert!(FsmcConfig::new(1.0, 5.0, 1.0).is_err());
    }

    #[test]
    fn every_kind_holds_the_operating_point() {
        let a = compute_alphas(&GeneratorParams::kundur()).unwrap();
        let e = equilibrium_from_angle(0.9, &a).unwrap();
        let cfgs = ControllerConfigs::defaults(12.0);
        for k in StabilizerKind::ALL {
            assert_eq!(
                control_input(k, &e.state(), &e, &a, &cfgs, 1e-4).unwrap(),
                e.u_d,
                "{k}"
            );
        }
    }

    #[test]
    fn missing_sections_reported() {
        let cfgs = ControllerConfigs {
            smc: Some(SmcGains::default()),
            ..Default::default()
        };
        assert!(Stabilizer::new(StabilizerKind::Nopss, ControllerConfigs::default()).is_ok());
        assert!(Stabilizer::new(StabilizerKind::Smcpss, cfgs.clone()).is_ok());
        let err = Stabilizer::new(StabilizerKind::Fsmcpss, cfgs).unwrap_err();
        assert!(matches!(
            err,
            StabilizerError::MissingConfig {
                section: "fsmc",
                ..
            }
        ));
        let err = Stabilizer::new(StabilizerKind::Fpss, ControllerConfigs::default()).unwrap_err();
        assert_eq!(
            err.to_string(),
            "controller `fpss` needs a [fpss] configuration"
        );
    }

    #[test]
    fn fsmc_at_saturation_matches_fixed_gain() {
        let a = compute_alphas(&GeneratorParams::kundur()).unwrap();
        let e = equilibrium_from_angle(0.9, &a).unwrap();
        let s = GeneratorState::new(1.0, 0.1, e.x3d);
        let g = SmcGains {
            u_max: 1e6,
            ..SmcGains::default()
        };
        let s_abs = surface(&s, &e, &a, &g).abs();
        let fsmc = FsmcConfig::new(s_abs, 0.5, g.eta).unwrap();
        let cfgs = ControllerConfigs {
            smc: Some(g),
            fsmc: Some(fsmc.clone()),
            ..Default::default()
        };
        let u_smc = control_input(StabilizerKind::Smcpss, &s, &e, &a, &cfgs, 1e-4).unwrap();
        let u_fsmc = control_input(StabilizerKind::Fsmcpss, &s, &e, &a, &cfgs, 1e-4).unwrap();
        // The tuned gain at |S| = s_max sits just below eta_max (shoulder centroid).
        let eta = fsmc_eta(&fsmc, s_abs);
        let gain = a.a2 * s.x1.sin();
        assert!((u_smc - u_fsmc).abs() <= (g.eta - eta) / gain + 1e-12);
        assert!(g.eta - eta <= 0.1 * (g.eta - 0.5));
    }
}
