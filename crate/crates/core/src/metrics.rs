//! Damping metrics on sampled responses and the controller comparison report.

use std::cmp::Ordering;
use std::fmt;
use std::ops::Range;

use thiserror::Error;

use crate::sim::SimulationTrace;
use crate::stabilizers::StabilizerKind;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MetricsError {
    #[error("series is empty")]
    Empty,
    #[error("band fraction must lie in (0, 1), got {0}")]
    InvalidBand(f64),
    #[error("initial value equals final value; overshoot is undefined")]
    ZeroStep,
    #[error("series and time grid differ in length ({series} vs {times})")]
    LengthMismatch { series: usize, times: usize },
    #[error("traces do not share a time grid: {0}")]
    MismatchedScenarios(String),
}

/// Default settling band as a fraction of the peak deviation.
pub const SETTLING_BAND: f64 = 0.02;
/// `|S|` relative to `|S(0)|` that marks the end of the reaching phase.
pub const REACH_FRACTION: f64 = 1e-3;
/// Allowed settling time after the last disturbance clears.
pub const SETTLE_AFTER_CLEARANCE: f64 = 2.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Settling {
    Settled(f64),
    NotSettled,
}

impl Settling {
    /// Settling time, `+inf` when not settled.
    pub fn seconds(&self) -> f64 {
        match self {
            Self::Settled(t) => *t,
            Self::NotSettled => f64::INFINITY,
        }
    }

    pub fn is_settled(&self) -> bool {
        matches!(self, Self::Settled(_))
    }
}

impl fmt::Display for Settling {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Settled(t) => write!(f, "{t}"),
            Self::NotSettled => f.write_str("not-settled"),
        }
    }
}

fn check_len(series: &[f64], times: &[f64]) -> Result<(), MetricsError> {
    if series.is_empty() {
        return Err(MetricsError::Empty);
    }
    if series.len() != times.len() {
        return Err(MetricsError::LengthMismatch {
            series: series.len(),
            times: times.len(),
        });
    }
    Ok(())
}

/// Earliest time (relative to `times[0]`) after which the series stays within
/// `band_fraction * max|series - final_value|` of `final_value`.
pub fn settling_time(
    series: &[f64],
    times: &[f64],
    final_value: f64,
    band_fraction: f64,
) -> Result<Settling, MetricsError> {
    check_len(series, times)?;
    if !(band_fraction > 0.0 && band_fraction < 1.0) {
        return Err(MetricsError::InvalidBand(band_fraction));
    }
    let peak = series
        .iter()
        .map(|v| (v - final_value).abs())
        .fold(0.0, f64::max);
    let band = band_fraction * peak;
    match series.iter().rposition(|v| (v - final_value).abs() > band) {
        None => Ok(Settling::Settled(0.0)),
        Some(i) if i + 1 == series.len() => Ok(Settling::NotSettled),
        Some(i) => Ok(Settling::Settled(times[i + 1] - times[0])),
    }
}

/// Largest excursion past `final_value`, relative to the initial distance
/// from it. Zero for a response that never crosses.
pub fn peak_overshoot(series: &[f64], final_value: f64) -> Result<f64, MetricsError> {
    let first = *series.first().ok_or(MetricsError::Empty)?;
    let step = final_value - first;
    if step == 0.0 {
        return Err(MetricsError::ZeroStep);
    }
    let dir = step.signum();
    let worst = series
        .iter()
        .map(|v| dir * (v - final_value))
        .fold(0.0, f64::max);
    Ok(worst / step.abs())
}

/// Trapezoidal ISE and ITAE. Time in the ITAE weight is measured from
/// `times[0]`.
pub fn integral_indices(y: &[f64], times: &[f64]) -> Result<(f64, f64), MetricsError> {
    check_len(y, times)?;
    let t0 = times[0];
    let (mut ise, mut itae) = (0.0, 0.0);
    for i in 1..y.len() {
        let h = times[i] - times[i - 1];
        ise += 0.5 * h * (y[i - 1] * y[i - 1] + y[i] * y[i]);
        itae += 0.5 * h * ((times[i - 1] - t0) * y[i - 1].abs() + (times[i] - t0) * y[i].abs());
    }
    Ok((ise, itae))
}

/// Total variation of `u` over the sample range.
pub fn chattering_index(u: &[f64], window: Range<usize>) -> f64 {
    let end = window.end.min(u.len());
    let start = window.start.min(end);
    u[start..end].windows(2).map(|w| (w[1] - w[0]).abs()).sum()
}

/// First sample with `|S| <= REACH_FRACTION * |S(0)|`.
pub fn reach_index(s: &[f64]) -> Option<usize> {
    let s0 = s.first()?.abs();
    s.iter().position(|v| v.abs() <= REACH_FRACTION * s0)
}

#[derive(Debug, Clone, PartialEq)]
pub struct MetricsRow {
    pub kind: StabilizerKind,
    pub settling_time: Settling,
    /// `None` when the response starts at its final value.
    pub peak_overshoot: Option<f64>,
    pub ise: f64,
    pub itae: f64,
    pub chattering_index: f64,
    pub max_abs_s: f64,
    /// 1-based rank by settling time.
    pub rank: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MetricsReport {
    /// Rows in the order the traces were given.
    pub rows: Vec<MetricsRow>,
    /// Expected orderings that the run did not reproduce.
    pub violations: Vec<String>,
}

impl MetricsReport {
    pub fn row(&self, kind: StabilizerKind) -> Option<&MetricsRow> {
        self.rows.iter().find(|r| r.kind == kind)
    }

    pub fn ranked(&self) -> Vec<&MetricsRow> {
        let mut rows: Vec<&MetricsRow> = self.rows.iter().collect();
        rows.sort_by_key(|r| r.rank);
        rows
    }
}

pub fn metrics_row(kind: StabilizerKind, tr: &SimulationTrace) -> Result<MetricsRow, MetricsError> {
    // The regulation target for the angle error is zero.
    let settling = settling_time(&tr.y, &tr.t, 0.0, SETTLING_BAND)?;
    let overshoot = match peak_overshoot(&tr.y, 0.0) {
        Ok(v) => Some(v),
        Err(MetricsError::ZeroStep) => None,
        Err(e) => return Err(e),
    };
    let (ise, itae) = integral_indices(&tr.y, &tr.t)?;
    let start = reach_index(&tr.s).unwrap_or(0);
    Ok(MetricsRow {
        kind,
        settling_time: settling,
        peak_overshoot: overshoot,
        ise,
        itae,
        chattering_index: chattering_index(&tr.u, start..tr.u.len()),
        max_abs_s: tr.s.iter().map(|v| v.abs()).fold(0.0, f64::max),
        rank: 0,
    })
}

/// Metrics per controller, ranked by settling time (ties keep controller
/// order). `clearance` is the time the last disturbance ends.
pub fn compare_report(
    runs: &[(StabilizerKind, &SimulationTrace)],
    clearance: f64,
) -> Result<MetricsReport, MetricsError> {
    if let Some((k0, first)) = runs.first() {
        for (k, tr) in &runs[1..] {
            if tr.t != first.t {
                return Err(MetricsError::MismatchedScenarios(format!("{k} vs {k0}")));
            }
        }
    }
    let mut rows = runs
        .iter()
        .map(|(k, tr)| metrics_row(*k, tr))
        .collect::<Result<Vec<_>, _>>()?;
    let mut order: Vec<usize> = (0..rows.len()).collect();
    order.sort_by(|&i, &j| {
        rows[i]
            .settling_time
            .seconds()
            .partial_cmp(&rows[j].settling_time.seconds())
            .unwrap_or(Ordering::Equal)
            .then(rows[i].kind.cmp(&rows[j].kind))
    });
    for (rank, &i) in order.iter().enumerate() {
        rows[i].rank = rank + 1;
    }
    let violations = ordering_violations(&rows, clearance);
    Ok(MetricsReport { rows, violations })
}

fn ordering_violations(rows: &[MetricsRow], clearance: f64) -> Vec<String> {
    use StabilizerKind::*;
    let ts = |k: StabilizerKind| {
        rows.iter()
            .find(|r| r.kind == k)
            .map(|r| r.settling_time.seconds())
    };
    let mut out = Vec::new();
    let mut expect = |a: StabilizerKind, b: StabilizerKind, strict: bool| {
        if let (Some(ta), Some(tb)) = (ts(a), ts(b)) {
            let ok = if strict { ta < tb } else { ta <= tb };
            if !ok {
                let op = if strict { "<" } else { "<=" };
                out.push(format!(
                    "settling time {a} ({ta}) {op} {b} ({tb}) does not hold"
                ));
            }
        }
    };
    expect(Fsmcpss, Smcpss, false);
    expect(Smcpss, Fpss, true);
    expect(Fpss, Nopss, true);
    expect(Cpss, Nopss, true);
    if let Some(best) = rows.iter().find(|r| r.rank == 1) {
        if best.kind != Fsmcpss && ts(Fsmcpss).is_some() {
            out.push(format!(
                "{} is ranked first on settling time, not fsmcpss",
                best.kind
            ));
        }
    }
    if let Some(t) = ts(Fsmcpss) {
        if !(t <= clearance + SETTLE_AFTER_CLEARANCE) {
            out.push(format!(
                "fsmcpss settles at {t} s, later than {SETTLE_AFTER_CLEARANCE} s after clearance at {clearance} s"
            ));
        }
    }
    out
}
