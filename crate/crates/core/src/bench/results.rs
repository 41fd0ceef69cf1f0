//! Results CSV: one row per planner per hunt.
//!
//! `cost` is a number, `incomplete` or `skipped`. Floats use the shortest
//! representation that round-trips.

use std::io::{Read, Write};

use crate::planners::PlannerKind;

use super::experiment::{HuntCost, TrialResult};
use super::BenchError;

pub const RESULTS_HEADER: [&str; 8] =
    ["env_id", "trial_id", "hunt_id", "planner", "cost", "optimal_cost", "decisions", "planner_time_us"];

pub fn write_results<W: Write>(out: W, rows: &[TrialResult]) -> Result<(), BenchError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(RESULTS_HEADER)?;
    for r in rows {
        let cost = match r.cost {
            HuntCost::Completed(c) => c.to_string(),
            HuntCost::Incomplete => "incomplete".into(),
            HuntCost::Skipped => "skipped".into(),
        };
        w.write_record([
            r.env_id.to_string(),
            r.trial_id.to_string(),
            r.hunt_id.to_string(),
            r.planner.name().to_string(),
            cost,
            r.optimal_cost.to_string(),
            r.decisions.to_string(),
            r.planner_time_us.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

fn field<T: std::str::FromStr>(rec: &csv::StringRecord, i: usize, line: u64) -> Result<T, BenchError> {
    let raw = rec.get(i).unwrap_or("");
    raw.trim().parse().map_err(|_| BenchError::Results(format!("line {line}: bad {} value {raw:?}", RESULTS_HEADER[i])))
}

pub fn read_results<R: Read>(input: R) -> Result<Vec<TrialResult>, BenchError> {
    let mut rdr = csv::Reader::from_reader(input);
    let header = rdr.headers()?.clone();
    if header.iter().ne(RESULTS_HEADER) {
        return Err(BenchError::Results(format!("unexpected header {:?}", header.iter().collect::<Vec<_>>())));
    }
    let mut rows = Vec::new();
    for rec in rdr.records() {
        let rec = rec?;
        let line = rec.position().map_or(0, |p| p.line());
        let cost = match rec.get(4).map(str::trim) {
            Some("incomplete") => HuntCost::Incomplete,
            Some("skipped") => HuntCost::Skipped,
            _ => HuntCost::Completed(field(&rec, 4, line)?),
        };
        let planner: PlannerKind = field(&rec, 3, line)?;
        let optimal_cost: f64 = field(&rec, 5, line)?;
        if !optimal_cost.is_finite() || cost.completed().is_some_and(|c| !c.is_finite()) {
            return Err(BenchError::Results(format!("line {line}: non-finite cost")));
        }
        rows.push(TrialResult {
            env_id: field(&rec, 0, line)?,
            trial_id: field(&rec, 1, line)?,
            hunt_id: field(&rec, 2, line)?,
            planner,
            cost,
            optimal_cost,
            decisions: field(&rec, 6, line)?,
            planner_time_us: field(&rec, 7, line)?,
        });
    }
    Ok(rows)
}
