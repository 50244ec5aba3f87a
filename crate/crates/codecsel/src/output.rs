//! Report, trace and coverage writers.
//!
//! Reports are pretty-printed JSON with a fixed key order; non-finite numbers
//! are written as the strings `"inf"`, `"-inf"` and `"nan"`. Traces are
//! long-form CSV with one row per (iteration, codec, criterion).

use std::fs::File;
use std::io::Write;
use std::path::Path;

use codecsel_core::{Interval, SelectionReport};
use serde_json::{json, Map, Value};

use crate::error::CliError;
use crate::synth::CoverageStats;

/// Trace header.
pub const TRACE_HEADER: [&str; 8] = [
    "iteration",
    "codec_id",
    "criterion_id",
    "lo",
    "hi",
    "active",
    "in_liberal",
    "in_conservative",
];

fn fmt_num(v: f64) -> String {
    if v.is_nan() {
        "nan".into()
    } else if v == f64::INFINITY {
        "inf".into()
    } else if v == f64::NEG_INFINITY {
        "-inf".into()
    } else {
        v.to_string()
    }
}

fn num(v: f64) -> Value {
    serde_json::Number::from_f64(v).map_or_else(|| Value::String(fmt_num(v)), Value::Number)
}

fn opt(v: Option<f64>) -> Value {
    v.map_or(Value::Null, num)
}

fn interval(iv: Interval) -> Value {
    json!([num(iv.lo), num(iv.hi)])
}

fn ids(all: &[String], idx: &[usize]) -> Value {
    idx.iter().map(|&k| Value::String(all[k].clone())).collect()
}

/// Structured form of a selection report.
pub fn report_json(r: &SelectionReport) -> Value {
    let codecs = r.codecs();
    let criteria = r.criteria();
    let rect = &r.rectangle;
    let cert = &r.certificate;

    let mut epsilons = Map::new();
    for (c, id) in criteria.iter().enumerate() {
        epsilons.insert(id.clone(), num(rect.epsilons[c]));
    }
    let per_codec: Vec<Value> = codecs
        .iter()
        .enumerate()
        .map(|(h, id)| {
            let cells: Vec<Value> = criteria
                .iter()
                .enumerate()
                .map(|(c, cid)| {
                    let iv = rect.interval(h, c);
                    json!({
                        "criterion": cid,
                        "estimate": num(r.estimate(h, c)),
                        "lo": num(iv.lo),
                        "hi": num(iv.hi),
                    })
                })
                .collect();
            json!({
                "codec": id,
                "objective_estimate": num(r.objective_estimates[h]),
                "objective_interval": interval(r.objective_intervals[h]),
                "criteria": cells,
            })
        })
        .collect();
    let violations: Vec<Value> = r
        .violations
        .iter()
        .map(|v| {
            json!({
                "iteration": v.iteration,
                "codec": codecs[v.codec],
                "criterion": criteria[v.criterion],
                "previous": interval(v.previous),
                "fresh": interval(v.fresh),
            })
        })
        .collect();
    let iterations: Vec<Value> = r
        .trace
        .iter()
        .map(|t| {
            let eps: Map<String, Value> = criteria
                .iter()
                .zip(&t.epsilons)
                .map(|(id, &e)| (id.clone(), num(e)))
                .collect();
            json!({
                "iteration": t.iteration,
                "batch_start": t.batch_start,
                "batch_size": t.batch_size,
                "epsilons": eps,
                "active": ids(codecs, &t.active),
                "liberal_set": ids(codecs, &t.liberal),
                "conservative_set": ids(codecs, &t.conservative),
                "pruned_infeasible": ids(codecs, &t.pruned_infeasible),
                "pruned_suboptimal": ids(codecs, &t.pruned_suboptimal),
                "next_active": ids(codecs, &t.next_active),
                "singleton": t.singleton,
                "epsilon_optimal": t.epsilon_optimal,
                "exhausted": t.exhausted,
            })
        })
        .collect();

    json!({
        "algorithm": r.algorithm.tag(),
        "certified": r.is_certified(),
        "terminated_reason": r.terminated_reason.tag(),
        "certificate": {
            "method": cert.method.tag(),
            "delta": num(cert.delta),
            "epsilon": opt(cert.epsilon),
            "s0": cert.s0,
            "budget_slots": cert.budget_slots,
            "samples_available": cert.samples_available,
            "samples_used": cert.samples_used,
            "evaluations": cert.evaluations,
        },
        "codecs": codecs,
        "criteria": criteria,
        "epsilons": epsilons,
        "possibly_feasible": r.possibly_feasible,
        "certainly_feasible": r.certainly_feasible,
        "liberal_set": r.liberal_set,
        "conservative_set": r.conservative_set,
        "sandwich": {
            "lower": opt(r.sandwich.lower),
            "upper": opt(r.sandwich.upper),
        },
        "per_codec": per_codec,
        "violations": violations,
        "iterations": iterations,
    })
}

/// Pretty JSON text with a trailing newline.
pub fn to_pretty(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("values are serialisable");
    s.push('\n');
    s
}

/// Writes the trace: one row per iteration, codec and criterion with the
/// interval after that iteration. A report without iterations (global
/// sampling) yields a single iteration-0 block from the final rectangle.
pub fn write_trace<W: Write>(r: &SelectionReport, writer: W) -> std::io::Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(TRACE_HEADER)?;
    let codecs = r.codecs();
    let criteria = r.criteria();
    let nc = criteria.len();
    let flag = |b: bool| if b { "1" } else { "0" };
    let mut emit = |iteration: usize,
                    cells: &[Interval],
                    active: &dyn Fn(usize) -> bool,
                    liberal: &[usize],
                    conservative: &[usize]|
     -> std::io::Result<()> {
        for (h, codec) in codecs.iter().enumerate() {
            for (c, criterion) in criteria.iter().enumerate() {
                let iv = cells[h * nc + c];
                w.write_record([
                    iteration.to_string().as_str(),
                    codec,
                    criterion,
                    &fmt_num(iv.lo),
                    &fmt_num(iv.hi),
                    flag(active(h)),
                    flag(liberal.contains(&h)),
                    flag(conservative.contains(&h)),
                ])?;
            }
        }
        Ok(())
    };
    if r.trace.is_empty() {
        let index = |set: &[String]| -> Vec<usize> {
            set.iter()
                .filter_map(|id| codecs.iter().position(|x| x == id))
                .collect()
        };
        emit(
            0,
            r.rectangle.cells(),
            &|_| true,
            &index(&r.liberal_set),
            &index(&r.conservative_set),
        )?;
    } else {
        for t in &r.trace {
            emit(
                t.iteration,
                &t.cells,
                &|h| t.active.contains(&h),
                &t.liberal,
                &t.conservative,
            )?;
        }
    }
    w.flush()
}

fn create(path: &Path) -> Result<File, CliError> {
    File::create(path).map_err(|e| CliError::io(path, e))
}

/// Writes `report.json` and `trace.csv` into `dir`, creating it if needed.
pub fn write_outputs(r: &SelectionReport, dir: &Path) -> Result<(), CliError> {
    std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    let report = dir.join("report.json");
    std::fs::write(&report, to_pretty(&report_json(r))).map_err(|e| CliError::io(&report, e))?;
    let trace = dir.join("trace.csv");
    write_trace(r, std::io::BufWriter::new(create(&trace)?)).map_err(|e| CliError::io(&trace, e))
}

/// Structured form of coverage statistics with their run parameters.
pub fn coverage_json(stats: &CoverageStats, params: Value) -> Value {
    json!({
        "parameters": params,
        "trials": stats.trials,
        "rejected": stats.rejected,
        "failures": {
            "rectangle_miss": stats.rectangle_miss,
            "liberal_empty": stats.liberal_empty,
            "conservative_infeasible": stats.conservative_infeasible,
            "objective_miss": stats.objective_miss,
            "sandwich_violated": stats.sandwich_violated,
            "optimum_pruned": stats.optimum_pruned,
            "simultaneous": stats.simultaneous_failures,
        },
        "failure_fraction": num(stats.failure_fraction()),
    })
}
