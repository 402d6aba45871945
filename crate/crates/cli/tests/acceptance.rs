//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

use std::f64::consts::PI;
use std::fs;
use std::path::Path;
use std::process::ExitCode;
use std::time::Instant;

use pss_cli::commands::{compare, trace_path};
use pss_cli::config::config_template;
use pss_cli::{parse_trace, trace_csv};
use pss_core::metrics::{chattering_index, reach_index, SETTLE_AFTER_CLEARANCE, SETTLING_BAND};
use pss_core::model::{compute_alphas, dynamics, equilibrium_from_angle, f_and_g, from_z, to_z};
use pss_core::scenario::{self, standard_scenario, ANGLE_OFFSET};
use pss_core::sim::rk4_step;
use pss_core::stabilizers::{
    fpss_eval, fpss_system, fsmc_eta, fsmc_system, FpssConfig, FsmcConfig,
};
use pss_core::{
    compare_report, simulate, GeneratorParams, GeneratorState, ScenarioConfig, SimulationTrace,
    StabilizerKind,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

// Tolerances and limits, one block per criterion.
const EQ_RESIDUAL: f64 = 1e-10;
const EQ_RUNTIME: f64 = 1.0;
const ROUND_TRIP: f64 = 1e-12;
const CHAIN_RULE_REL: f64 = 1e-6;
const CHAIN_RULE_H: f64 = 1e-6;
const TRANSFORM_RUNTIME: f64 = 5.0;
const REACH_SLOPE_REL: f64 = 0.02;
const REACH_TIME_REL: f64 = 0.05;
const REACH_PRODUCT_FLOOR: f64 = 1e-8;
const REACH_RUNTIME: f64 = 10.0;
const SLIDING_ENVELOPE: f64 = 0.10;
const FPSS_ORIGIN: f64 = 1e-9;
const FPSS_ODD: f64 = 1e-6;
const ORDERING_RUNTIME: f64 = 60.0;
const ORDER_RATIO: (f64, f64) = (12.0, 20.0);

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn random_params(rng: &mut ChaCha8Rng) -> GeneratorParams {
    let x_dp = rng.gen_range(0.15..0.6);
    GeneratorParams {
        w0: if rng.gen_bool(0.5) {
            100.0 * PI
        } else {
            120.0 * PI
        },
        h: rng.gen_range(2.0..10.0),
        k_d: rng.gen_range(0.0..5.0),
        p_m: rng.gen_range(0.2..1.0),
        x_d: rng.gen_range(x_dp..2.5),
        x_dp,
        t_dop: rng.gen_range(3.0..10.0),
        k_c: rng.gen_range(0.5..2.0),
        v_s: rng.gen_range(0.8..1.2),
    }
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let a = compute_alphas(&random_params(&mut rng)).expect("valid parameters");
        let x1d = rng.gen_range(0.1..PI - 0.1);
        let e = equilibrium_from_angle(x1d, &a).expect("regular angle");
        worst = worst.max(dynamics(&e.state(), e.u_d, &a).max_abs());
    }
    let secs = start.elapsed().as_secs_f64();
    outcome(
        worst <= EQ_RESIDUAL && secs < EQ_RUNTIME,
        format!("max residual {worst:.3e} (limit {EQ_RESIDUAL:e}), {secs:.3} s"),
    )
}

fn criterion_2() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let (mut trip, mut chain): (f64, f64) = (0.0, 0.0);
    for _ in 0..100 {
        let a = compute_alphas(&random_params(&mut rng)).expect("valid parameters");
        let e = equilibrium_from_angle(rng.gen_range(0.3..1.4), &a).expect("regular angle");
        let s = GeneratorState::new(
            e.x1d + rng.gen_range(-0.2..0.2),
            rng.gen_range(-2.0..2.0),
            e.x3d * rng.gen_range(0.8..1.2),
        );
        let back = from_z(&to_z(&s, &e, &a), &e, &a).expect("away from the singularity");
        trip = trip.max((back - s).max_abs());

        let u = e.u_d + rng.gen_range(-1.0..1.0);
        let field = |x: &GeneratorState, u: f64| dynamics(x, u, &a);
        let fwd = rk4_step(field, &s, u, CHAIN_RULE_H).unwrap();
        let bwd = rk4_step(field, &s, u, -CHAIN_RULE_H).unwrap();
        let rate = (to_z(&fwd, &e, &a).z3 - to_z(&bwd, &e, &a).z3) / (2.0 * CHAIN_RULE_H);
        let fg = f_and_g(&s, &a);
        let expected = fg.f + fg.g * u;
        chain = chain.max((rate - expected).abs() / expected.abs().max(1.0));
    }
    let secs = start.elapsed().as_secs_f64();
    outcome(
        trip <= ROUND_TRIP && chain <= CHAIN_RULE_REL && secs < TRANSFORM_RUNTIME,
        format!(
            "round trip {trip:.3e} (limit {ROUND_TRIP:e}), chain rule rel {chain:.3e} (limit {CHAIN_RULE_REL:e}), {secs:.3} s"
        ),
    )
}

fn single(cfg: &ScenarioConfig) -> SimulationTrace {
    simulate(cfg).expect("scenario runs").remove(0)
}

/// Least-squares slope of `ys` against `xs`.
fn slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    sxy / sxx
}

fn criterion_3() -> Outcome {
    let start = Instant::now();
    let cfg = standard_scenario(StabilizerKind::Smcpss).without_faults();
    let g = cfg.configs.smc.expect("smc gains");
    assert_eq!(g.phi, 0.0);
    let tr = single(&cfg);
    let s0 = tr.s[0].abs();
    let Some(reach) = reach_index(&tr.s) else {
        return outcome(false, "surface never reached");
    };
    let abs: Vec<f64> = tr.s[..=reach].iter().map(|v| v.abs()).collect();
    let fit = slope(&tr.t[..=reach], &abs);
    let slope_err = (fit + g.eta).abs() / g.eta;
    let t_reach = tr.t[reach];
    let t_pred = s0 / g.eta;
    let time_err = (t_reach - t_pred).abs() / t_pred;
    let bad_steps =
        tr.s.windows(2)
            .filter(|w| w[0].abs() > REACH_PRODUCT_FLOOR && w[0] * (w[1] - w[0]) >= 0.0)
            .count();
    let secs = start.elapsed().as_secs_f64();
    outcome(
        slope_err <= REACH_SLOPE_REL && time_err <= REACH_TIME_REL && bad_steps == 0 && secs < REACH_RUNTIME,
        format!(
            "slope {fit:.4} vs -{} ({:.2}%), reach {t_reach:.4} s vs {t_pred:.4} s ({:.2}%), S*dS >= 0 at {bad_steps} steps, {secs:.2} s",
            g.eta,
            100.0 * slope_err,
            100.0 * time_err
        ),
    )
}

fn criterion_4() -> Outcome {
    let cfg = standard_scenario(StabilizerKind::Smcpss).without_faults();
    let g = cfg.configs.smc.expect("smc gains");
    let tr = single(&cfg);
    let Some(k) = reach_index(&tr.s) else {
        return outcome(false, "surface never reached");
    };
    // Roots of r^2 + rho1 r + rho2.
    let disc = (g.rho1 * g.rho1 - 4.0 * g.rho2).sqrt();
    let (r1, r2) = ((-g.rho1 + disc) / 2.0, (-g.rho1 - disc) / 2.0);
    let (y0, v0) = (tr.y[k], tr.x2[k]);
    let c1 = (v0 - r2 * y0) / (r1 - r2);
    let c2 = y0 - c1;
    let (mut err, mut peak): (f64, f64) = (0.0, 0.0);
    for i in k..tr.len() {
        let tau = tr.t[i] - tr.t[k];
        let ana = c1 * (r1 * tau).exp() + c2 * (r2 * tau).exp();
        err = err.max((tr.y[i] - ana).abs());
        peak = peak.max(ana.abs());
    }
    let rel = err / peak;
    outcome(
        rel <= SLIDING_ENVELOPE,
        format!(
            "entry t = {:.4} s, max |y - y_ode| = {err:.3e} = {:.2}% of envelope peak {peak:.3e} (limit {:.0}%)",
            tr.t[k],
            100.0 * rel,
            100.0 * SLIDING_ENVELOPE
        ),
    )
}

const EXPECTED_FPSS_RULES: [[&str; 7]; 7] = [
    ["NB", "NB", "NB", "NB", "NM", "NM", "NS"],
    ["NB", "NM", "NM", "NM", "NS", "NS", "ZE"],
    ["NM", "NM", "NS", "NS", "ZE", "ZE", "PS"],
    ["NM", "NS", "NS", "ZE", "PS", "PS", "PM"],
    ["NS", "ZE", "ZE", "PS", "PS", "PM", "PM"],
    ["ZE", "PS", "PS", "PM", "PM", "PM", "PB"],
    ["PS", "PM", "PM", "PB", "PB", "PB", "PB"],
];
const LABELS_7: [&str; 7] = ["NB", "NM", "NS", "ZE", "PS", "PM", "PB"];
const EXPECTED_FSMC_RULES: [(&str, &str); 7] = [
    ("VVS", "VVS"),
    ("VS", "VS"),
    ("S", "S"),
    ("M", "M"),
    ("L", "L"),
    ("VL", "VL"),
    ("VVL", "VVL"),
];

fn criterion_5() -> Outcome {
    let cfg = FpssConfig::default();
    let origin = fpss_eval(&cfg, 0.0, 0.0).abs();

    // Raw inputs spanning a bit past the normalized universe on both axes.
    let mut odd: f64 = 0.0;
    for i in 0..50 {
        for j in 0..50 {
            let w = -1.2 / cfg.k_w + 2.4 / cfg.k_w * i as f64 / 49.0;
            let a = -1.2 / cfg.k_a + 2.4 / cfg.k_a * j as f64 / 49.0;
            odd = odd.max((fpss_eval(&cfg, w, a) + fpss_eval(&cfg, -w, -a)).abs());
        }
    }

    let fpss = fpss_system().expect("built-in");
    let mut fpss_hits = 0;
    for (r, row) in EXPECTED_FPSS_RULES.iter().enumerate() {
        for (c, cell) in row.iter().enumerate() {
            if fpss.rules().lookup(&[LABELS_7[r], LABELS_7[c]]) == Some(*cell) {
                fpss_hits += 1;
            }
        }
    }
    let fsmc = fsmc_system().expect("built-in");
    let fsmc_hits = EXPECTED_FSMC_RULES
        .iter()
        .filter(|(a, c)| fsmc.rules().lookup(&[a]) == Some(*c))
        .count();
    let rule_counts = fpss.rules().rules().len() == 49 && fsmc.rules().rules().len() == 7;

    let tuner = FsmcConfig::new(1.0, 0.5, 10.0).expect("valid");
    let etas: Vec<f64> = (0..1000)
        .map(|i| fsmc_eta(&tuner, 2.0 * i as f64 / 999.0))
        .collect();
    let monotone = etas.windows(2).all(|w| w[1] >= w[0]);

    outcome(
        origin <= FPSS_ORIGIN && odd <= FPSS_ODD && fpss_hits == 49 && fsmc_hits == 7 && rule_counts && monotone,
        format!(
            "|fpss(0,0)| = {origin:.1e}, odd-symmetry error {odd:.1e}, fpss rules {fpss_hits}/49, fsmc rules {fsmc_hits}/7, eta monotone: {monotone}"
        ),
    )
}

struct Comparison {
    traces: Vec<(StabilizerKind, SimulationTrace)>,
    secs: f64,
}

fn standard_runs() -> Comparison {
    let start = Instant::now();
    let traces = StabilizerKind::ALL
        .iter()
        .map(|&k| (k, single(&standard_scenario(k))))
        .collect();
    Comparison {
        traces,
        secs: start.elapsed().as_secs_f64(),
    }
}

fn criterion_6(runs: &Comparison) -> Outcome {
    use StabilizerKind::*;
    let cfg = standard_scenario(Nopss);
    let refs: Vec<(StabilizerKind, &SimulationTrace)> =
        runs.traces.iter().map(|(k, t)| (*k, t)).collect();
    let report = compare_report(&refs, cfg.last_clearance()).expect("comparable traces");
    let ts = |k| report.row(k).expect("row").settling_time.seconds();
    let clause = |ok: bool, text: String| format!("{} {text}", if ok { "ok" } else { "FAILED" });
    let checks = [
        (
            ts(Fsmcpss) <= ts(Smcpss),
            format!("fsmcpss {:.4} <= smcpss {:.4}", ts(Fsmcpss), ts(Smcpss)),
        ),
        (
            ts(Smcpss) < ts(Fpss),
            format!("smcpss {:.4} < fpss {:.4}", ts(Smcpss), ts(Fpss)),
        ),
        (
            ts(Fpss) < ts(Nopss),
            format!("fpss {:.4} < nopss {:.4}", ts(Fpss), ts(Nopss)),
        ),
        (
            ts(Cpss) < ts(Nopss),
            format!("cpss {:.4} < nopss {:.4}", ts(Cpss), ts(Nopss)),
        ),
        (
            ts(Fsmcpss) <= cfg.last_clearance() + SETTLE_AFTER_CLEARANCE,
            format!(
                "fsmcpss settles by clearance + {SETTLE_AFTER_CLEARANCE} s ({:.4} s)",
                ts(Fsmcpss)
            ),
        ),
        (
            runs.secs < ORDERING_RUNTIME,
            format!("five runs in {:.2} s", runs.secs),
        ),
    ];
    let pass = checks.iter().all(|(ok, _)| *ok);
    let detail: Vec<String> = checks.into_iter().map(|(ok, t)| clause(ok, t)).collect();
    outcome(
        pass,
        format!("band {}%: {}", 100.0 * SETTLING_BAND, detail.join("; ")),
    )
}

fn criterion_7(runs: &Comparison) -> Outcome {
    let find = |k| {
        &runs
            .traces
            .iter()
            .find(|(kind, _)| *kind == k)
            .expect("run")
            .1
    };
    let smc_cfg = standard_scenario(StabilizerKind::Smcpss);
    let eta_max = smc_cfg.configs.fsmc.as_ref().expect("fsmc").eta_max;
    let fixed = smc_cfg.configs.smc.expect("smc").eta;
    let index = |tr: &SimulationTrace| {
        let k = reach_index(&tr.s).unwrap_or(0);
        chattering_index(&tr.u, k..tr.len())
    };
    let smc = index(find(StabilizerKind::Smcpss));
    let fsmc = index(find(StabilizerKind::Fsmcpss));
    outcome(
        fsmc < smc && fixed == eta_max,
        format!("fsmcpss {fsmc:.4} < smcpss {smc:.4} (fixed eta {fixed} = eta_max {eta_max})"),
    )
}

fn criterion_8() -> Outcome {
    // Controller samples every 1 ms in all runs; only the integrator step
    // changes, so the error is that of RK4 alone.
    let mut base = standard_scenario(StabilizerKind::Smcpss).without_faults();
    base.t_end = 2.0;
    if let Some(g) = base.configs.smc.as_mut() {
        g.phi = 0.01;
    }
    let sample = 1e-3;
    let run = |sub: usize| {
        let cfg = ScenarioConfig {
            dt: sample / sub as f64,
            control_period: sub,
            ..base.clone()
        };
        single(&cfg).final_state().expect("nonempty")
    };
    let reference = run(16);
    let e1 = (run(1) - reference).max_abs();
    let e2 = (run(2) - reference).max_abs();
    let ratio = e1 / e2;
    outcome(
        (ORDER_RATIO.0..=ORDER_RATIO.1).contains(&ratio),
        format!(
            "errors {e1:.3e} (dt = 1e-3), {e2:.3e} (dt = 5e-4), ratio {ratio:.2} (expected [{}, {}])",
            ORDER_RATIO.0, ORDER_RATIO.1
        ),
    )
}

fn dir_bytes(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<(String, Vec<u8>)> = fs::read_dir(dir)
        .expect("output dir")
        .map(|e| {
            let p = e.expect("entry").path();
            (
                p.file_name().unwrap().to_string_lossy().into_owned(),
                fs::read(&p).expect("readable"),
            )
        })
        .collect();
    files.sort();
    files
}

fn criterion_9() -> Outcome {
    let tmp = tempfile::tempdir().expect("temp dir");
    let config = tmp.path().join("standard.toml");
    fs::write(&config, config_template()).expect("write config");
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    let first = compare(&config, &a, false).expect("compare runs");
    compare(&config, &b, false).expect("compare runs");
    let (fa, fb) = (dir_bytes(&a), dir_bytes(&b));
    let identical = fa == fb && fa.len() == 7;

    let tr = single(&standard_scenario(StabilizerKind::Fsmcpss));
    let parsed = parse_trace(&trace_csv(&tr)).expect("parses");
    let exact = parsed == tr
        && parsed
            .columns()
            .iter()
            .zip(tr.columns())
            .all(|(p, t)| p.iter().zip(t).all(|(x, y)| x.to_bits() == y.to_bits()));
    let on_disk =
        parse_trace(&fs::read_to_string(trace_path(&a, StabilizerKind::Fsmcpss)).unwrap()).unwrap()
            == tr;
    outcome(
        identical && exact && on_disk && !first.reports.is_empty(),
        format!(
            "two compare runs bit-identical over {} files: {identical}; CSV round trip exact: {exact}; written trace equals in-memory: {on_disk}",
            fa.len()
        ),
    )
}

fn main() -> ExitCode {
    let offset = ANGLE_OFFSET;
    let gen = scenario::generator();
    println!(
        "standard scenario: x1d = {:?}, offset {offset} rad, S(0) = {:.4}",
        gen.operating_point,
        scenario::initial_surface(&gen, offset, &scenario::smc_gains()).unwrap()
    );
    let runs = standard_runs();
    let results = [
        ("1 equilibrium residual", criterion_1()),
        ("2 transformation fidelity", criterion_2()),
        ("3 reaching law", criterion_3()),
        ("4 sliding-phase dynamics", criterion_4()),
        ("5 fuzzy engine", criterion_5()),
        ("6 settling-time ordering", criterion_6(&runs)),
        ("7 chattering reduction", criterion_7(&runs)),
        ("8 integrator order", criterion_8()),
        ("9 determinism and CSV round trip", criterion_9()),
    ];
    let mut failed = 0;
    for (name, r) in &results {
        println!(
            "ACCEPTANCE {name}: {} ({})",
            if r.pass { "PASS" } else { "FAIL" },
            r.detail
        );
        failed += usize::from(!r.pass);
    }
    println!(
        "acceptance: {} passed, {failed} failed",
        results.len() - failed
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
