//! Summary tables and plot data from a results CSV.
//!
//! All outputs are plain CSV (plus one text summary) grouped by `env_id`,
//! which a sweep fills with the node count.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use crate::planners::PlannerKind;

use super::experiment::{HuntCost, TrialResult};
use super::stats::{ci95, paired_t, welch_t};
use super::BenchError;

pub const REPORT_FILES: [&str; 5] =
    ["ratio_by_env.csv", "distance_vs_nodes.csv", "runtime_vs_nodes.csv", "pairwise_tests.csv", "summary.txt"];

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Report {
    /// Per environment and planner: realized over optimal mean cost.
    pub ratio_by_env: String,
    /// Per node count and planner: mean realized cost.
    pub distance_vs_nodes: String,
    /// Per node count and planner: mean planner time per decision.
    pub runtime_vs_nodes: String,
    /// Per node count and planner pair: Welch and paired t-tests.
    pub pairwise_tests: String,
    pub summary: String,
}

impl Report {
    pub fn files(&self) -> [(&'static str, &str); 5] {
        [
            (REPORT_FILES[0], &self.ratio_by_env),
            (REPORT_FILES[1], &self.distance_vs_nodes),
            (REPORT_FILES[2], &self.runtime_vs_nodes),
            (REPORT_FILES[3], &self.pairwise_tests),
            (REPORT_FILES[4], &self.summary),
        ]
    }

    pub fn write_to(&self, dir: &Path) -> Result<(), BenchError> {
        std::fs::create_dir_all(dir)?;
        for (name, body) in self.files() {
            std::fs::write(dir.join(name), body)?;
        }
        Ok(())
    }
}

fn csv_string(header: &[&str], rows: Vec<Vec<String>>) -> Result<String, BenchError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header)?;
    for r in rows {
        w.write_record(r)?;
    }
    let bytes = w.into_inner().map_err(|e| BenchError::Io(e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

fn opt(x: Option<f64>) -> String {
    x.map(|v| v.to_string()).unwrap_or_default()
}

#[derive(Default)]
struct Group {
    costs: Vec<f64>,
    optimal: Vec<f64>,
    incomplete: usize,
    skipped: usize,
    decisions: usize,
    time_us: f64,
}

impl Group {
    fn add(&mut self, r: &TrialResult) {
        match r.cost {
            HuntCost::Completed(c) => {
                self.costs.push(c);
                self.optimal.push(r.optimal_cost);
            }
            HuntCost::Incomplete => self.incomplete += 1,
            HuntCost::Skipped => self.skipped += 1,
        }
        self.decisions += r.decisions;
        self.time_us += r.planner_time_us;
    }
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Builds every report table. Rows may come in any order; duplicated
/// `(env, trial, hunt, planner)` rows or disagreeing optimal costs within
/// one hunt are rejected.
pub fn build_report(rows: &[TrialResult]) -> Result<Report, BenchError> {
    if rows.is_empty() {
        return Err(BenchError::Results("no result rows".into()));
    }
    let mut rows: Vec<&TrialResult> = rows.iter().collect();
    rows.sort_by_key(|r| r.sort_key());
    for pair in rows.windows(2) {
        if pair[0].sort_key() == pair[1].sort_key() {
            let (e, t, h, p) = pair[0].sort_key();
            return Err(BenchError::Results(format!("duplicate row env {e} trial {t} hunt {h} planner {p}")));
        }
    }
    let mut optimal: BTreeMap<(u64, u64, u64), f64> = BTreeMap::new();
    for r in &rows {
        let cell = (r.env_id, r.trial_id, r.hunt_id);
        let o = *optimal.entry(cell).or_insert(r.optimal_cost);
        if o.to_bits() != r.optimal_cost.to_bits() {
            return Err(BenchError::Results(format!(
                "env {} trial {} hunt {}: optimal cost {} vs {}; rows come from different experiments",
                cell.0, cell.1, cell.2, o, r.optimal_cost
            )));
        }
    }

    let mut per_env: BTreeMap<(u64, u64, PlannerKind), Group> = BTreeMap::new();
    let mut per_nodes: BTreeMap<(u64, PlannerKind), Group> = BTreeMap::new();
    let mut by_hunt: BTreeMap<(u64, PlannerKind), BTreeMap<(u64, u64), f64>> = BTreeMap::new();
    for r in &rows {
        per_env.entry((r.env_id, r.trial_id, r.planner)).or_default().add(r);
        per_nodes.entry((r.env_id, r.planner)).or_default().add(r);
        if let HuntCost::Completed(c) = r.cost {
            by_hunt.entry((r.env_id, r.planner)).or_default().insert((r.trial_id, r.hunt_id), c);
        }
    }

    let mut ratio_rows = Vec::new();
    for ((env, trial, planner), g) in &per_env {
        let (ratio, half) = if g.costs.is_empty() {
            (None, None)
        } else {
            let mo = mean(&g.optimal);
            let s = ci95(&g.costs)?;
            if mo > 0.0 {
                (Some(s.mean / mo), Some(s.ci95 / mo))
            } else {
                (None, None)
            }
        };
        ratio_rows.push(vec![
            env.to_string(),
            trial.to_string(),
            planner.to_string(),
            g.costs.len().to_string(),
            g.incomplete.to_string(),
            g.skipped.to_string(),
            opt((!g.costs.is_empty()).then(|| mean(&g.costs))),
            opt((!g.optimal.is_empty()).then(|| mean(&g.optimal))),
            opt(ratio),
            opt(half),
        ]);
    }
    let ratio_by_env = csv_string(
        &[
            "env_id",
            "trial_id",
            "planner",
            "hunts",
            "incomplete",
            "skipped",
            "mean_cost",
            "mean_optimal",
            "ratio",
            "ratio_ci95",
        ],
        ratio_rows,
    )?;

    let mut dist_rows = Vec::new();
    let mut time_rows = Vec::new();
    let mut summary = String::new();
    writeln!(
        summary,
        "{:>8} {:>12} {:>8} {:>14} {:>12} {:>10} {:>14}",
        "env_id", "planner", "hunts", "mean_cost", "ci95", "ratio", "us/decision"
    )
    .unwrap();
    for ((env, planner), g) in &per_nodes {
        let stats = if g.costs.is_empty() { None } else { Some(ci95(&g.costs)?) };
        let ratio = stats.and_then(|s| {
            let mo = mean(&g.optimal);
            (mo > 0.0).then(|| s.mean / mo)
        });
        let per_decision = (g.decisions > 0).then(|| g.time_us / g.decisions as f64);
        dist_rows.push(vec![
            env.to_string(),
            planner.to_string(),
            g.costs.len().to_string(),
            opt(stats.map(|s| s.mean)),
            opt(stats.map(|s| s.se)),
            opt(stats.map(|s| s.ci95)),
            opt(ratio),
        ]);
        time_rows.push(vec![
            env.to_string(),
            planner.to_string(),
            g.decisions.to_string(),
            g.time_us.to_string(),
            opt(per_decision),
        ]);
        let show = |x: Option<f64>| x.map_or("-".to_string(), |v| format!("{v:.4}"));
        writeln!(
            summary,
            "{:>8} {:>12} {:>8} {:>14} {:>12} {:>10} {:>14}",
            env,
            planner.name(),
            g.costs.len(),
            show(stats.map(|s| s.mean)),
            show(stats.map(|s| s.ci95)),
            show(ratio),
            show(per_decision)
        )
        .unwrap();
    }
    let distance_vs_nodes =
        csv_string(&["env_id", "planner", "hunts", "mean_cost", "se", "ci95", "ratio_to_optimal"], dist_rows)?;
    let runtime_vs_nodes =
        csv_string(&["env_id", "planner", "decisions", "total_time_us", "mean_time_per_decision_us"], time_rows)?;

    let mut test_rows = Vec::new();
    let envs: Vec<u64> = {
        let mut v: Vec<u64> = per_nodes.keys().map(|k| k.0).collect();
        v.dedup();
        v
    };
    for env in envs {
        let planners: Vec<PlannerKind> = per_nodes.keys().filter(|k| k.0 == env).map(|k| k.1).collect();
        for (i, &a) in planners.iter().enumerate() {
            for &b in &planners[i + 1..] {
                let empty = BTreeMap::new();
                let ha = by_hunt.get(&(env, a)).unwrap_or(&empty);
                let hb = by_hunt.get(&(env, b)).unwrap_or(&empty);
                let xa: Vec<f64> = ha.values().copied().collect();
                let xb: Vec<f64> = hb.values().copied().collect();
                let diffs: Vec<f64> = ha.iter().filter_map(|(k, va)| hb.get(k).map(|vb| va - vb)).collect();
                let welch = if xa.len() >= 2 && xb.len() >= 2 { Some(welch_t(&xa, &xb)?) } else { None };
                let paired = if diffs.len() >= 2 { Some(paired_t(&diffs)?) } else { None };
                test_rows.push(vec![
                    env.to_string(),
                    a.to_string(),
                    b.to_string(),
                    xa.len().to_string(),
                    xb.len().to_string(),
                    opt((!xa.is_empty()).then(|| mean(&xa))),
                    opt((!xb.is_empty()).then(|| mean(&xb))),
                    opt(welch.map(|w| w.t)),
                    opt(welch.map(|w| w.p)),
                    diffs.len().to_string(),
                    opt(paired.map(|p| p.t)),
                    opt(paired.map(|p| p.p)),
                ]);
            }
        }
    }
    let pairwise_tests = csv_string(
        &[
            "env_id",
            "planner_a",
            "planner_b",
            "n_a",
            "n_b",
            "mean_a",
            "mean_b",
            "welch_t",
            "welch_p",
            "paired_n",
            "paired_t",
            "paired_p",
        ],
        test_rows,
    )?;

    Ok(Report { ratio_by_env, distance_vs_nodes, runtime_vs_nodes, pairwise_tests, summary })
}
