//! CSV and JSON report emission.
//!
//! Floats are written with `{:.16e}`, which round-trips every f64, so two
//! runs with the same inputs produce byte-identical files.

use std::fmt::Write as _;

use crate::config::Format;
use crate::driver::RunReport;

pub const CSV_HEADER: &str =
    "link_id,capacity_bps,capacity_trs_bps,tx_time_s,tx_time_trs_s,energy_j,energy_trs_j,latency_s,latency_trs_s,outages";

pub const SWEEP_HEADER: &str = "gamma,total_throughput_bps,total_energy_j,total_latency_s,throughput_ratio,energy_ratio,latency_ratio";

fn num(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn render(report: &RunReport, format: Format) -> String {
    match format {
        Format::Csv => to_csv(report),
        Format::Json => to_json(report),
    }
}

pub fn to_json(report: &RunReport) -> String {
    let mut s = serde_json::to_string_pretty(report).expect("report is serializable");
    s.push('\n');
    s
}

/// Per-link rows, a TOTALS row of column sums, then optional sections.
pub fn to_csv(report: &RunReport) -> String {
    let mut out = String::new();
    out.push_str(CSV_HEADER);
    out.push('\n');
    let mut sums = [0.0f64; 8];
    let mut outages = 0usize;
    for l in &report.links {
        let m = &l.mean;
        let row = [
            m.capacity_bps,
            m.capacity_trs_bps,
            m.tx_time_s,
            m.tx_time_trs_s,
            m.energy_j,
            m.energy_trs_j,
            m.latency_s,
            m.latency_trs_s,
        ];
        out.push_str(&l.link_id);
        for (s, v) in sums.iter_mut().zip(row) {
            *s += v;
            write!(out, ",{}", num(v)).unwrap();
        }
        writeln!(out, ",{}", l.outages).unwrap();
        outages += l.outages;
    }
    out.push_str("TOTALS");
    for s in sums {
        write!(out, ",{}", num(s)).unwrap();
    }
    writeln!(out, ",{outages}").unwrap();

    if let Some(b) = report.totals.bottleneck_capacity_bps {
        writeln!(out, "\nbottleneck_capacity_bps\n{}", num(b)).unwrap();
    }

    if let Some(q) = &report.quantum {
        out.push_str("\nquantum_field,value\n");
        writeln!(out, "gamma,{}", num(q.gamma)).unwrap();
        let opt = [
            ("qber", q.qber),
            ("qber_trs", q.qber_trs),
            ("qkd_received_power_w", q.qkd_received_power_w),
            ("qkd_received_power_trs_w", q.qkd_received_power_trs_w),
            ("qkd_received_power_trs_unclamped_w", q.qkd_received_power_trs_unclamped_w),
            ("hybrid_total_capacity_bps", q.hybrid_total_capacity_bps),
        ];
        for (k, v) in opt {
            if let Some(v) = v {
                writeln!(out, "{k},{}", num(v)).unwrap();
            }
        }
    }

    if let Some(o) = &report.optimizer {
        out.push_str("\noptimizer_field,value\n");
        writeln!(out, "solver,{:?}", o.solver).unwrap();
        writeln!(out, "feasible,{}", o.feasible).unwrap();
        writeln!(out, "objective,{}", num(o.objective)).unwrap();
        writeln!(out, "energy_total_j,{}", num(o.energy_total_j)).unwrap();
        writeln!(out, "latency_total_s,{}", num(o.latency_total_s)).unwrap();
        writeln!(out, "evaluations,{}", o.evaluations).unwrap();
        for (id, p) in report.config.topology.nodes.iter().zip(o.allocation.powers_w()) {
            writeln!(out, "power_w[{}],{}", id.id, num(*p)).unwrap();
        }
    }
    out
}

/// One row per γ; ratios are relative to the first γ in the sweep.
pub fn sweep_csv(rows: &[(f64, RunReport)]) -> String {
    let mut out = String::new();
    out.push_str(SWEEP_HEADER);
    out.push('\n');
    let Some((_, first)) = rows.first() else { return out };
    let base = &first.totals;
    for (g, r) in rows {
        let t = &r.totals;
        writeln!(
            out,
            "{},{},{},{},{},{},{}",
            num(*g),
            num(t.total_throughput_bps),
            num(t.total_energy_j),
            num(t.total_latency_s),
            num(t.total_throughput_bps / base.total_throughput_bps),
            num(t.total_energy_j / base.total_energy_j),
            num(t.total_latency_s / base.total_latency_s),
        )
        .unwrap();
    }
    out
}

#[derive(serde::Serialize)]
struct SweepRow<'a> {
    gamma: f64,
    report: &'a RunReport,
}

pub fn sweep_json(rows: &[(f64, RunReport)]) -> String {
    let v: Vec<SweepRow> = rows.iter().map(|(g, r)| SweepRow { gamma: *g, report: r }).collect();
    let mut s = serde_json::to_string_pretty(&v).expect("report is serializable");
    s.push('\n');
    s
}
