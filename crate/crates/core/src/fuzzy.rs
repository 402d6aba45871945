//! Mamdani fuzzy inference: trapezoidal membership functions, min for AND,
//! clipping implication, max aggregation and centroid defuzzification on a
//! uniform grid.

use std::collections::HashSet;

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FuzzyError {
    #[error("membership breakpoints must satisfy a <= b <= c <= d, got ({0}, {1}, {2}, {3})")]
    InvalidMembership(f64, f64, f64, f64),
    #[error("variable `{name}`: {reason}")]
    InvalidVariable { name: String, reason: String },
    #[error("rule {rule}: label `{label}` is not a term of `{variable}`")]
    UnknownLabel {
        rule: usize,
        label: String,
        variable: String,
    },
    #[error("rule {rule} repeats the antecedent of an earlier rule")]
    DuplicateRule { rule: usize },
    #[error("expected {expected} inputs, got {got}")]
    ArityMismatch { expected: usize, got: usize },
    #[error("grid resolution must be odd and >= 101, got {0}")]
    InvalidGrid(usize),
}

/// Trapezoid with feet `a`, `d` and shoulders `b`, `c`; a triangle when
/// `b == c`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MembershipFunction {
    a: f64,
    b: f64,
    c: f64,
    d: f64,
}

impl MembershipFunction {
    pub fn trapezoid(a: f64, b: f64, c: f64, d: f64) -> Result<Self, FuzzyError> {
        if !(a <= b && b <= c && c <= d) || ![a, b, c, d].iter().all(|v| v.is_finite()) {
            return Err(FuzzyError::InvalidMembership(a, b, c, d));
        }
        Ok(Self { a, b, c, d })
    }

    pub fn triangle(a: f64, peak: f64, d: f64) -> Result<Self, FuzzyError> {
        Self::trapezoid(a, peak, peak, d)
    }

    pub fn breakpoints(&self) -> (f64, f64, f64, f64) {
        (self.a, self.b, self.c, self.d)
    }

    pub fn degree(&self, x: f64) -> f64 {
        if x >= self.b && x <= self.c {
            1.0
        } else if x <= self.a || x >= self.d {
            0.0
        } else if x < self.b {
            (x - self.a) / (self.b - self.a)
        } else {
            (self.d - x) / (self.d - self.c)
        }
    }

    /// Midpoint of the core `[b, c]`.
    pub fn peak(&self) -> f64 {
        0.5 * (self.b + self.c)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinguisticVariable {
    name: String,
    lo: f64,
    hi: f64,
    terms: Vec<(String, MembershipFunction)>,
}

const COMPLETENESS_SAMPLES: usize = 2001;

impl LinguisticVariable {
    pub fn new(
        name: impl Into<String>,
        lo: f64,
        hi: f64,
        terms: Vec<(String, MembershipFunction)>,
    ) -> Result<Self, FuzzyError> {
        let name = name.into();
        let invalid = |reason: String| FuzzyError::InvalidVariable {
            name: name.clone(),
            reason,
        };
        if !(lo < hi) {
            return Err(invalid(format!("universe [{lo}, {hi}] is empty")));
        }
        if terms.is_empty() {
            return Err(invalid("no terms".into()));
        }
        let mut seen = HashSet::new();
        for (label, mf) in &terms {
            if !seen.insert(label.as_str()) {
                return Err(invalid(format!("duplicate term `{label}`")));
            }
            if mf.a < lo || mf.d > hi {
                return Err(invalid(format!(
                    "term `{label}` support leaves the universe"
                )));
            }
        }
        let var = Self {
            name: name.clone(),
            lo,
            hi,
            terms,
        };
        for i in 0..COMPLETENESS_SAMPLES {
            let x = lo + (hi - lo) * i as f64 / (COMPLETENESS_SAMPLES - 1) as f64;
            if var.terms.iter().all(|(_, mf)| mf.degree(x) == 0.0) {
                return Err(invalid(format!("no term covers x = {x}")));
            }
        }
        Ok(var)
    }

    /// Seven evenly spaced triangles with 50% overlap; the outer two are
    /// shouldered so they saturate at the universe edges.
    pub fn seven_term(
        name: impl Into<String>,
        lo: f64,
        hi: f64,
        labels: [&str; 7],
    ) -> Result<Self, FuzzyError> {
        let mid = 0.5 * (lo + hi);
        let half = 0.5 * (hi - lo);
        let w = half / 3.0;
        // Offsets mirrored about the midpoint bit for bit.
        let left = [-half, -2.0 * w, -w];
        let offset = |k: usize| match k {
            0..=2 => left[k],
            3 => 0.0,
            _ => -left[6 - k],
        };
        let mut terms = Vec::with_capacity(7);
        for (k, label) in labels.iter().enumerate() {
            let c = mid + offset(k);
            let mf = match k {
                0 => MembershipFunction::trapezoid(lo, lo, lo, c + w)?,
                6 => MembershipFunction::trapezoid(c - w, hi, hi, hi)?,
                _ => MembershipFunction::triangle(c - w, c, c + w)?,
            };
            terms.push((label.to_string(), mf));
        }
        Self::new(name, lo, hi, terms)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn universe(&self) -> (f64, f64) {
        (self.lo, self.hi)
    }

    pub fn terms(&self) -> &[(String, MembershipFunction)] {
        &self.terms
    }

    pub fn term_index(&self, label: &str) -> Option<usize> {
        self.terms.iter().position(|(l, _)| l == label)
    }

    pub fn term(&self, label: &str) -> Option<&MembershipFunction> {
        self.term_index(label).map(|i| &self.terms[i].1)
    }

    pub fn clip(&self, x: f64) -> f64 {
        x.clamp(self.lo, self.hi)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Rule {
    pub antecedent: Vec<String>,
    pub consequent: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RuleBase {
    arity: usize,
    rules: Vec<Rule>,
}

impl RuleBase {
    pub fn new(arity: usize, rules: Vec<Rule>) -> Result<Self, FuzzyError> {
        let mut seen = HashSet::new();
        for (i, r) in rules.iter().enumerate() {
            if r.antecedent.len() != arity {
                return Err(FuzzyError::ArityMismatch {
                    expected: arity,
                    got: r.antecedent.len(),
                });
            }
            if !seen.insert(r.antecedent.clone()) {
                return Err(FuzzyError::DuplicateRule { rule: i });
            }
        }
        Ok(Self { arity, rules })
    }

    /// Builds rules from `(antecedent labels, consequent label)` pairs.
    pub fn from_labels<'a, I>(arity: usize, rules: I) -> Result<Self, FuzzyError>
    where
        I: IntoIterator<Item = (Vec<&'a str>, &'a str)>,
    {
        let rules = rules
            .into_iter()
            .map(|(ante, cons)| Rule {
                antecedent: ante.into_iter().map(str::to_owned).collect(),
                consequent: cons.to_owned(),
            })
            .collect();
        Self::new(arity, rules)
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn rules(&self) -> &[Rule] {
        &self.rules
    }

    /// Consequent of the rule whose antecedent is exactly `antecedent`.
    pub fn lookup(&self, antecedent: &[&str]) -> Option<&str> {
        self.rules
            .iter()
            .find(|r| {
                r.antecedent
                    .iter()
                    .map(String::as_str)
                    .eq(antecedent.iter().copied())
            })
            .map(|r| r.consequent.as_str())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FuzzySystem {
    inputs: Vec<LinguisticVariable>,
    output: LinguisticVariable,
    rules: RuleBase,
    grid_resolution: usize,
    // Resolved term indices per rule: antecedent terms, then consequent term.
    resolved: Vec<(Vec<usize>, usize)>,
    grid: Vec<f64>,
    // Output term degrees sampled on `grid`, one row per output term.
    output_samples: Vec<Vec<f64>>,
}

pub const DEFAULT_GRID_RESOLUTION: usize = 201;

impl FuzzySystem {
    pub fn new(
        inputs: Vec<LinguisticVariable>,
        output: LinguisticVariable,
        rules: RuleBase,
        grid_resolution: usize,
    ) -> Result<Self, FuzzyError> {
        if grid_resolution < 101 || grid_resolution.is_multiple_of(2) {
            return Err(FuzzyError::InvalidGrid(grid_resolution));
        }
        if rules.arity() != inputs.len() {
            return Err(FuzzyError::ArityMismatch {
                expected: inputs.len(),
                got: rules.arity(),
            });
        }
        let mut resolved = Vec::with_capacity(rules.rules().len());
        for (i, rule) in rules.rules().iter().enumerate() {
            let ante = rule
                .antecedent
                .iter()
                .zip(&inputs)
                .map(|(label, var)| {
                    var.term_index(label)
                        .ok_or_else(|| FuzzyError::UnknownLabel {
                            rule: i,
                            label: label.clone(),
                            variable: var.name().to_owned(),
                        })
                })
                .collect::<Result<Vec<_>, _>>()?;
            let cons =
                output
                    .term_index(&rule.consequent)
                    .ok_or_else(|| FuzzyError::UnknownLabel {
                        rule: i,
                        label: rule.consequent.clone(),
                        variable: output.name().to_owned(),
                    })?;
            resolved.push((ante, cons));
        }
        let (lo, hi) = output.universe();
        let grid = symmetric_grid(lo, hi, grid_resolution);
        let output_samples = output
            .terms()
            .iter()
            .map(|(_, mf)| grid.iter().map(|&x| mf.degree(x)).collect())
            .collect();
        Ok(Self {
            inputs,
            output,
            rules,
            grid_resolution,
            resolved,
            grid,
            output_samples,
        })
    }

    pub fn inputs(&self) -> &[LinguisticVariable] {
        &self.inputs
    }

    pub fn output(&self) -> &LinguisticVariable {
        &self.output
    }

    pub fn rules(&self) -> &RuleBase {
        &self.rules
    }

    pub fn grid_resolution(&self) -> usize {
        self.grid_resolution
    }

    /// Firing strength of every rule, in rule order. Inputs are clipped to
    /// their universes.
    pub fn firing_strengths(&self, inputs: &[f64]) -> Result<Vec<f64>, FuzzyError> {
        if inputs.len() != self.inputs.len() {
            return Err(FuzzyError::ArityMismatch {
                expected: self.inputs.len(),
                got: inputs.len(),
            });
        }
        let clipped: Vec<f64> = inputs
            .iter()
            .zip(&self.inputs)
            .map(|(&x, v)| v.clip(x))
            .collect();
        Ok(self
            .resolved
            .iter()
            .map(|(ante, _)| {
                ante.iter()
                    .enumerate()
                    .map(|(k, &t)| self.inputs[k].terms()[t].1.degree(clipped[k]))
                    .fold(1.0, f64::min)
            })
            .collect())
    }

    /// Aggregated output set sampled on the defuzzification grid.
    pub fn aggregate(&self, inputs: &[f64]) -> Result<Vec<f64>, FuzzyError> {
        let strengths = self.firing_strengths(inputs)?;
        // Clipping one term at several levels and taking the max equals
        // clipping once at the largest level.
        let mut level = vec![0.0f64; self.output.terms().len()];
        for (w, (_, cons)) in strengths.iter().zip(&self.resolved) {
            level[*cons] = level[*cons].max(*w);
        }
        let mut agg = vec![0.0f64; self.grid.len()];
        for (term, &clip) in level.iter().enumerate() {
            if clip == 0.0 {
                continue;
            }
            for (m, &mu) in agg.iter_mut().zip(&self.output_samples[term]) {
                *m = m.max(mu.min(clip));
            }
        }
        Ok(agg)
    }

    pub fn infer(&self, inputs: &[f64]) -> Result<f64, FuzzyError> {
        let agg = self.aggregate(inputs)?;
        let (lo, hi) = self.output.universe();
        Ok(centroid(lo, hi, &agg))
    }
}

/// Uniform grid over `[lo, hi]` whose points mirror exactly about the midpoint.
pub fn symmetric_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    let mid = 0.5 * (lo + hi);
    let half = 0.5 * (hi - lo);
    let span = (n.max(2) - 1) as f64;
    let t: Vec<f64> = (0..n).map(|i| (2 * i) as f64 / span - 1.0).collect();
    (0..n)
        .map(|i| {
            let j = n - 1 - i;
            if i < j {
                mid + half * t[i]
            } else if i == j {
                mid
            } else {
                mid - half * t[j]
            }
        })
        .collect()
}

/// Centre of mass of degrees sampled on a uniform grid over `[lo, hi]`; the
/// midpoint when the set is empty.
///
/// Mirror-image samples are accumulated in pairs about the midpoint, so a set
/// symmetric about the midpoint returns it exactly.
pub fn centroid(lo: f64, hi: f64, degrees: &[f64]) -> f64 {
    let n = degrees.len();
    let mid = 0.5 * (lo + hi);
    if n < 2 {
        return mid;
    }
    let half = 0.5 * (hi - lo);
    let span = (n - 1) as f64;
    let (mut moment, mut mass) = (0.0, 0.0);
    for i in 0..n / 2 {
        let j = n - 1 - i;
        // Offsets of samples i and j are exact negatives of each other.
        let t = (2 * i) as f64 / span - 1.0;
        moment += t * (degrees[i] - degrees[j]);
        mass += degrees[i] + degrees[j];
    }
    if n % 2 == 1 {
        mass += degrees[n / 2];
    }
    if mass == 0.0 {
        mid
    } else {
        mid + half * moment / mass
    }
}
