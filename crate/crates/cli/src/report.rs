//! Comparison reports: a CSV table and an aligned text table.

use pss_core::metrics::MetricsRow;
use pss_core::MetricsReport;

pub const REPORT_COLUMNS: [&str; 9] = [
    "generator",
    "kind",
    "rank",
    "settling_time",
    "peak_overshoot",
    "ise",
    "itae",
    "chattering_index",
    "max_abs_s",
];

fn fields(generator: usize, r: &MetricsRow) -> [String; 9] {
    [
        generator.to_string(),
        r.kind.to_string(),
        r.rank.to_string(),
        r.settling_time.to_string(),
        r.peak_overshoot.map_or_else(String::new, |v| v.to_string()),
        r.ise.to_string(),
        r.itae.to_string(),
        r.chattering_index.to_string(),
        r.max_abs_s.to_string(),
    ]
}

/// One row per controller and generator, in rank order.
pub fn report_csv(reports: &[MetricsReport]) -> String {
    let mut out = REPORT_COLUMNS.join(",");
    out.push('\n');
    for (j, rep) in reports.iter().enumerate() {
        for r in rep.ranked() {
            out.push_str(&fields(j, r).join(","));
            out.push('\n');
        }
    }
    out
}

pub fn report_text(reports: &[MetricsReport]) -> String {
    let mut out = String::new();
    for (j, rep) in reports.iter().enumerate() {
        if reports.len() > 1 {
            out.push_str(&format!("generator {j}\n"));
        }
        let header = [
            "rank",
            "controller",
            "settling [s]",
            "overshoot",
            "ISE",
            "ITAE",
            "chattering",
            "max |S|",
        ];
        let rows: Vec<[String; 8]> = rep
            .ranked()
            .into_iter()
            .map(|r| {
                [
                    r.rank.to_string(),
                    r.kind.to_string(),
                    match r.settling_time.is_settled() {
                        true => format!("{:.4}", r.settling_time.seconds()),
                        false => "not settled".to_string(),
                    },
                    r.peak_overshoot
                        .map_or_else(|| "-".to_string(), |v| format!("{v:.4}")),
                    format!("{:.6e}", r.ise),
                    format!("{:.6e}", r.itae),
                    format!("{:.4}", r.chattering_index),
                    format!("{:.4e}", r.max_abs_s),
                ]
            })
            .collect();
        let mut widths = header.map(str::len);
        for row in &rows {
            for (w, cell) in widths.iter_mut().zip(row) {
                *w = (*w).max(cell.len());
            }
        }
        let line = |cells: &[String]| {
            let parts: Vec<String> = cells
                .iter()
                .zip(widths)
                .enumerate()
                .map(|(k, (c, w))| {
                    if k == 1 {
                        format!("{c:<w$}")
                    } else {
                        format!("{c:>w$}")
                    }
                })
                .collect();
            parts.join("  ").trim_end().to_string() + "\n"
        };
        out.push_str(&line(&header.map(String::from)));
        for row in &rows {
            out.push_str(&line(row));
        }
        if rep.violations.is_empty() {
            out.push_str("expected ordering: reproduced\n");
        } else {
            out.push_str("expected ordering: NOT reproduced\n");
            for v in &rep.violations {
                out.push_str(&format!("  - {v}\n"));
            }
        }
        if j + 1 < reports.len() {
            out.push('\n');
        }
    }
    out
}
