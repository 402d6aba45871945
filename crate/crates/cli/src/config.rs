//! Scenario files.
//!
//! A scenario is a TOML document with top-level run settings, one
//! `[[generator]]` table per machine, an optional `[[disturbance]]` list and
//! one table per controller (`[smc]`, `[cpss]`, `[fpss]`, `[fsmc]`). Unknown
//! keys are rejected. Every error names the offending key and, when it can be
//! located, its 1-based line.

use std::fmt::Write as _;

use pss_core::scenario;
use pss_core::sim::effective_params;
use pss_core::{
    ControllerConfigs, Disturbance, DisturbanceKind, EquilibriumSpec, FpssConfig, FsmcConfig,
    GeneratorParams, GeneratorSpec, LeadLagPssConfig, ModelError, ScenarioConfig, SimError,
    SmcGains, StabilizerKind,
};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
#[error("{}: {message}", location(.key, .line))]
pub struct ConfigError {
    /// Dotted key path, e.g. `generator[0].x_d`; empty if unknown.
    pub key: String,
    pub line: Option<usize>,
    pub message: String,
}

fn location(key: &str, line: &Option<usize>) -> String {
    match (key.is_empty(), line) {
        (true, Some(l)) => format!("line {l}"),
        (true, None) => "config".to_string(),
        (false, Some(l)) => format!("`{key}` (line {l})"),
        (false, None) => format!("`{key}`"),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    pub t_end: f64,
    pub dt: f64,
    #[serde(default = "one")]
    pub control_period: usize,
    pub controller: StabilizerKind,
    pub generator: Vec<GeneratorSection>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub disturbance: Vec<DisturbanceSection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub smc: Option<SmcSection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cpss: Option<LeadLagPssConfig>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fpss: Option<FpssSection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fsmc: Option<FsmcSection>,
}

fn one() -> usize {
    1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeneratorSection {
    pub w0: f64,
    pub h: f64,
    pub k_d: f64,
    pub p_m: f64,
    pub x_d: f64,
    pub x_dp: f64,
    pub t_dop: f64,
    pub k_c: f64,
    pub v_s: f64,
    /// Operating rotor angle, rad. Exactly one of `x1d` and `u_d` is given.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub x1d: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub u_d: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DisturbanceSection {
    pub kind: DisturbanceKind,
    #[serde(default)]
    pub t_start: f64,
    #[serde(default)]
    pub t_end: f64,
    pub magnitude: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub generator: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SmcSection {
    pub rho1: f64,
    pub rho2: f64,
    pub eta: f64,
    #[serde(default)]
    pub phi: f64,
    #[serde(default = "default_eps_sin")]
    pub eps_sin: f64,
    #[serde(default = "default_u_max")]
    pub u_max: f64,
}

fn default_eps_sin() -> f64 {
    SmcGains::default().eps_sin
}

fn default_u_max() -> f64 {
    SmcGains::default().u_max
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FpssSection {
    pub k_w: f64,
    pub k_a: f64,
    pub k_out: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FsmcSection {
    pub s_max: f64,
    pub eta_min: f64,
    pub eta_max: f64,
}

impl From<SmcGains> for SmcSection {
    fn from(g: SmcGains) -> Self {
        Self {
            rho1: g.rho1,
            rho2: g.rho2,
            eta: g.eta,
            phi: g.phi,
            eps_sin: g.eps_sin,
            u_max: g.u_max,
        }
    }
}

impl From<&ScenarioConfig> for ScenarioFile {
    fn from(cfg: &ScenarioConfig) -> Self {
        let generator = cfg
            .generators
            .iter()
            .map(|g| {
                let p = g.params;
                let (x1d, u_d) = match g.operating_point {
                    EquilibriumSpec::Angle(x) => (Some(x), None),
                    EquilibriumSpec::Input(u) => (None, Some(u)),
                };
                GeneratorSection {
                    w0: p.w0,
                    h: p.h,
                    k_d: p.k_d,
                    p_m: p.p_m,
                    x_d: p.x_d,
                    x_dp: p.x_dp,
                    t_dop: p.t_dop,
                    k_c: p.k_c,
                    v_s: p.v_s,
                    x1d,
                    u_d,
                }
            })
            .collect();
        let disturbance = cfg
            .disturbances
            .iter()
            .map(|d| DisturbanceSection {
                kind: d.kind,
                t_start: d.t_start,
                t_end: d.t_end,
                magnitude: d.magnitude,
                generator: d.generator,
            })
            .collect();
        let c = &cfg.configs;
        Self {
            t_end: cfg.t_end,
            dt: cfg.dt,
            control_period: cfg.control_period,
            controller: cfg.controller,
            generator,
            disturbance,
            smc: c.smc.map(SmcSection::from),
            cpss: c.cpss,
            fpss: c.fpss.as_ref().map(|f| FpssSection {
                k_w: f.k_w,
                k_a: f.k_a,
                k_out: f.k_out,
            }),
            fsmc: c.fsmc.as_ref().map(|f| FsmcSection {
                s_max: f.s_max,
                eta_min: f.eta_min,
                eta_max: f.eta_max,
            }),
        }
    }
}

/// Finds the line of `key` inside a given table of a TOML document. Only the
/// simple layouts this crate writes and documents are recognised: `[name]`
/// and `[[name]]` headers followed by `key = value` lines.
struct Locator<'a> {
    lines: Vec<&'a str>,
}

impl<'a> Locator<'a> {
    fn new(text: &'a str) -> Self {
        Self {
            lines: text.lines().collect(),
        }
    }

    /// `table` is `None` for top-level keys, else `(name, index)`.
    fn find(&self, table: Option<(&str, usize)>, key: Option<&str>) -> Option<usize> {
        let mut current: Option<(String, usize)> = None;
        let mut counts: Vec<(String, usize)> = Vec::new();
        for (i, raw) in self.lines.iter().enumerate() {
            let line = raw.trim();
            if let Some(name) = line.strip_prefix("[[").and_then(|l| l.strip_suffix("]]")) {
                let name = name.trim().to_string();
                let idx = match counts.iter_mut().find(|(n, _)| *n == name) {
                    Some((_, c)) => {
                        *c += 1;
                        *c
                    }
                    None => {
                        counts.push((name.clone(), 0));
                        0
                    }
                };
                current = Some((name, idx));
            } else if let Some(name) = line.strip_prefix('[').and_then(|l| l.strip_suffix(']')) {
                current = Some((name.trim().to_string(), 0));
            } else {
                let here = current.as_ref().map(|(n, i)| (n.as_str(), *i));
                if here == table {
                    if let Some(k) = key {
                        if let Some((lhs, _)) = line.split_once('=') {
                            if lhs.trim() == k {
                                return Some(i + 1);
                            }
                        }
                    }
                }
                continue;
            }
            if key.is_none() && current.as_ref().map(|(n, i)| (n.as_str(), *i)) == table {
                return Some(i + 1);
            }
        }
        None
    }

    fn error(
        &self,
        table: Option<(&str, usize)>,
        key: Option<&str>,
        message: impl Into<String>,
    ) -> ConfigError {
        let line = self
            .find(table, key)
            .or_else(|| key.and_then(|_| self.find(table, None)));
        let path = match (table, key) {
            (None, Some(k)) => k.to_string(),
            (Some((t, i)), Some(k)) if is_array(t) => format!("{t}[{i}].{k}"),
            (Some((t, _)), Some(k)) => format!("{t}.{k}"),
            (Some((t, i)), None) if is_array(t) => format!("{t}[{i}]"),
            (Some((t, _)), None) => t.to_string(),
            (None, None) => String::new(),
        };
        ConfigError {
            key: path,
            line,
            message: message.into(),
        }
    }
}

fn is_array(table: &str) -> bool {
    table == "generator" || table == "disturbance"
}

const GENERATOR_KEYS: [&str; 11] = [
    "w0", "h", "k_d", "p_m", "x_d", "x_dp", "t_dop", "k_c", "v_s", "x1d", "u_d",
];
const SECTION_KEYS: [(&str, &[&str]); 4] = [
    ("smc", &["rho1", "rho2", "eta", "phi", "eps_sin", "u_max"]),
    (
        "cpss",
        &["k", "t_lp", "t_w", "t1", "t2", "t3", "t4", "v_min", "v_max"],
    ),
    ("fpss", &["k_w", "k_a", "k_out"]),
    ("fsmc", &["s_max", "eta_min", "eta_max"]),
];

/// First key of `keys` mentioned as a word in `reason`.
fn mentioned<'k>(reason: &str, keys: &[&'k str]) -> Option<&'k str> {
    let words: Vec<&str> = reason
        .split(|c: char| !(c.is_alphanumeric() || c == '_'))
        .collect();
    keys.iter().copied().find(|k| words.contains(k))
}

/// Parses and validates a scenario file.
pub fn parse_scenario(text: &str) -> Result<ScenarioConfig, ConfigError> {
    parse_scenario_for(text, None)
}

/// As [`parse_scenario`], with the file's controller replaced by `controller`
/// when given. Validation then checks the sections that controller needs.
pub fn parse_scenario_for(
    text: &str,
    controller: Option<StabilizerKind>,
) -> Result<ScenarioConfig, ConfigError> {
    let loc = Locator::new(text);
    let file: ScenarioFile = toml::from_str(text).map_err(|e| {
        let line = e
            .span()
            .map(|s| text[..s.start.min(text.len())].matches('\n').count() + 1);
        let message = e.message().trim().to_string();
        let key = message
            .split('`')
            .nth(1)
            .filter(|k| k.chars().all(|c| c.is_alphanumeric() || c == '_'))
            .map(str::to_string)
            .or_else(|| {
                // Type errors point at the value; the key is left of `=`.
                let text_line = text.lines().nth(line? - 1)?;
                let (lhs, _) = text_line.split_once('=')?;
                Some(lhs.trim().to_string())
            })
            .unwrap_or_default();
        ConfigError { key, line, message }
    })?;
    let mut cfg = build(&file, &loc)?;
    if let Some(k) = controller {
        cfg.controller = k;
    }
    cfg.validate().map_err(|e| sim_error(e, &cfg, &loc))?;
    Ok(cfg)
}

fn build(file: &ScenarioFile, loc: &Locator) -> Result<ScenarioConfig, ConfigError> {
    let mut generators = Vec::with_capacity(file.generator.len());
    for (j, g) in file.generator.iter().enumerate() {
        let operating_point = match (g.x1d, g.u_d) {
            (Some(x), None) => EquilibriumSpec::Angle(x),
            (None, Some(u)) => EquilibriumSpec::Input(u),
            (Some(_), Some(_)) => {
                return Err(loc.error(
                    Some(("generator", j)),
                    Some("u_d"),
                    "give either x1d or u_d, not both",
                ))
            }
            (None, None) => {
                return Err(loc.error(Some(("generator", j)), Some("x1d"), "missing x1d (or u_d)"))
            }
        };
        let params = GeneratorParams {
            w0: g.w0,
            h: g.h,
            k_d: g.k_d,
            p_m: g.p_m,
            x_d: g.x_d,
            x_dp: g.x_dp,
            t_dop: g.t_dop,
            k_c: g.k_c,
            v_s: g.v_s,
        };
        generators.push(GeneratorSpec {
            params,
            operating_point,
        });
    }
    let disturbances = file
        .disturbance
        .iter()
        .map(|d| Disturbance {
            kind: d.kind,
            t_start: d.t_start,
            t_end: d.t_end,
            magnitude: d.magnitude,
            generator: d.generator,
        })
        .collect();

    let section_err = |section: &str, reason: String| {
        let keys = SECTION_KEYS
            .iter()
            .find(|(s, _)| *s == section)
            .map_or(&[][..], |(_, k)| *k);
        loc.error(Some((section, 0)), mentioned(&reason, keys), reason)
    };
    let smc = file.smc.as_ref().map(|s| SmcGains {
        rho1: s.rho1,
        rho2: s.rho2,
        eta: s.eta,
        phi: s.phi,
        eps_sin: s.eps_sin,
        u_max: s.u_max,
    });
    if let Some(g) = &smc {
        g.validate().map_err(|r| section_err("smc", r))?;
    }
    if let Some(c) = &file.cpss {
        c.validate()
            .map_err(|e| section_err("cpss", e.to_string()))?;
    }
    let fpss = file
        .fpss
        .as_ref()
        .map(|f| FpssConfig::new(f.k_w, f.k_a, f.k_out))
        .transpose()
        .map_err(|e| section_err("fpss", e.to_string()))?;
    let fsmc = file
        .fsmc
        .as_ref()
        .map(|f| FsmcConfig::new(f.s_max, f.eta_min, f.eta_max))
        .transpose()
        .map_err(|e| section_err("fsmc", e.to_string()))?;

    Ok(ScenarioConfig {
        t_end: file.t_end,
        dt: file.dt,
        control_period: file.control_period,
        generators,
        disturbances,
        controller: file.controller,
        configs: ControllerConfigs {
            smc,
            cpss: file.cpss,
            fpss,
            fsmc,
        },
    })
}

fn sim_error(e: SimError, cfg: &ScenarioConfig, loc: &Locator) -> ConfigError {
    match &e {
        SimError::InvalidConfig { field, reason } => {
            if let Some(rest) = field.strip_prefix("disturbance ") {
                let i = rest.parse().unwrap_or(0);
                let keys = ["kind", "t_start", "t_end", "magnitude", "generator"];
                loc.error(
                    Some(("disturbance", i)),
                    mentioned(reason, &keys).or(Some("kind")),
                    e.to_string(),
                )
            } else if field == "generator" {
                loc.error(None, None, e.to_string()).with_key("generator")
            } else {
                loc.error(None, Some(field), e.to_string())
            }
        }
        SimError::Model { generator, source } => {
            let key = match source {
                ModelError::InvalidParams(reason) => mentioned(reason, &GENERATOR_KEYS),
                ModelError::SingularAngle { .. } => Some("x1d"),
                ModelError::NoRoot { .. } => Some("u_d"),
            };
            // Disturbed parameter sets are checked too; blame the fault when
            // the nominal machine is fine.
            let nominal_ok = cfg
                .generators
                .get(*generator)
                .is_some_and(|g| g.params.validate().is_ok());
            if nominal_ok {
                if let Some(i) = cfg.disturbances.iter().position(|d| {
                    d.applies_to(*generator)
                        && pss_core::compute_alphas(&effective_params(
                            &cfg.generators[*generator].params,
                            std::slice::from_ref(d),
                            d.t_start,
                        ))
                        .is_err()
                }) {
                    return loc.error(Some(("disturbance", i)), Some("magnitude"), e.to_string());
                }
            }
            loc.error(Some(("generator", *generator)), key, e.to_string())
        }
        SimError::Stabilizer(inner) => match inner {
            pss_core::stabilizers::StabilizerError::MissingConfig { section, .. } => ConfigError {
                key: (*section).to_string(),
                line: None,
                message: e.to_string(),
            },
            pss_core::stabilizers::StabilizerError::InvalidDt { .. } => {
                loc.error(None, Some("dt"), e.to_string())
            }
            pss_core::stabilizers::StabilizerError::InvalidConfig { section, reason } => {
                let keys = SECTION_KEYS
                    .iter()
                    .find(|(s, _)| s == section)
                    .map_or(&[][..], |(_, k)| *k);
                loc.error(Some((section, 0)), mentioned(reason, keys), e.to_string())
            }
            pss_core::stabilizers::StabilizerError::Fuzzy(_) => {
                loc.error(None, None, e.to_string())
            }
        },
        SimError::NonFinite { .. } => loc.error(None, None, e.to_string()),
    }
}

impl ConfigError {
    fn with_key(mut self, key: &str) -> Self {
        self.key = key.to_string();
        self
    }
}

/// The reference scenario as a commented TOML document. Parsing it back yields
/// `standard_scenario(StabilizerKind::Fsmcpss)`.
pub fn config_template() -> String {
    let cfg = scenario::standard_scenario(StabilizerKind::Fsmcpss);
    let body = toml::to_string(&ScenarioFile::from(&cfg)).expect("scenario serializes");
    let mut out = String::new();
    let _ = writeln!(out, "# Scenario for pss-sim.");
    let _ = writeln!(out, "# controller: nopss | cpss | fpss | smcpss | fsmcpss");
    let _ = writeln!(
        out,
        "# [[generator]] needs exactly one of x1d (operating angle, rad) or u_d."
    );
    let _ = writeln!(
        out,
        "# [[disturbance]] kind: initial-angle-offset | vs-dip | mech-power-step;"
    );
    let _ = writeln!(out, "#   generator = <index> restricts it to one machine.");
    let _ = writeln!(out);
    out.push_str(&body);
    out
}
