//! CSV tables of a Monte Carlo result.
//!
//! `rmse.csv`, `nees.csv`, `events.csv` and `summary.csv` depend only on
//! the scenario and seed. Wall-clock figures go to `timing.csv`.

use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::error::Result;

use super::metrics::{chi2_band, consistency_report, final_rmse, nees, position_rmse, Verdict};
use super::run::SimResult;
use super::scenario::Method;

/// Fraction of in-band steps required for a CONSISTENT verdict.
pub const CONSISTENCY_THRESHOLD: f64 = 0.9;

#[derive(Debug, Serialize)]
struct RmseRow {
    method: &'static str,
    agent: usize,
    t: usize,
    rmse: f64,
}

#[derive(Debug, Serialize)]
struct NeesRow {
    method: &'static str,
    agent: usize,
    t: usize,
    nees: f64,
    r1: f64,
    r2: f64,
}

#[derive(Debug, Serialize)]
struct EventCsvRow {
    method: &'static str,
    run: usize,
    agent: usize,
    t: usize,
    event: &'static str,
    det_cov: f64,
    trace_cov: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct SummaryRow {
    pub method: &'static str,
    pub agent: usize,
    pub final_rmse: f64,
    pub in_band: f64,
    pub above_band: f64,
    pub verdict: Verdict,
}

#[derive(Debug, Clone, Serialize)]
pub struct TimingRow {
    pub method: &'static str,
    pub updates: usize,
    pub total_ms: f64,
    pub mean_ms_per_update: f64,
    pub mean_solver_iters: f64,
}

/// Final RMSE and consistency of every (method, agent), NEES taken from the
/// first relative update on.
pub fn summary(result: &SimResult) -> Result<Vec<SummaryRow>> {
    let band = chi2_band(result.runs.len(), 2, 0.05);
    let from = result.first_relative_step.unwrap_or(0);
    let mut rows = Vec::new();
    for &m in &result.methods {
        for (k, &id) in result.agents.iter().enumerate() {
            let rep = consistency_report(&nees(result, m, k)?[from..], &band, CONSISTENCY_THRESHOLD);
            rows.push(SummaryRow {
                method: m.name(),
                agent: id,
                final_rmse: *position_rmse(result, m, k).last().unwrap_or(&0.0),
                in_band: rep.in_band,
                above_band: rep.above,
                verdict: rep.verdict,
            });
        }
    }
    Ok(rows)
}

pub fn timing(result: &SimResult) -> Vec<TimingRow> {
    result
        .methods
        .iter()
        .map(|&m| {
            let tracks = result.runs.iter().filter_map(|r| r.track(m));
            let (mut updates, mut iters, mut secs) = (0usize, 0usize, 0.0f64);
            for t in tracks {
                updates += t.updates;
                iters += t.solver_iters;
                secs += t.update_time.as_secs_f64();
            }
            let per = |x: f64| if updates > 0 { x / updates as f64 } else { 0.0 };
            TimingRow {
                method: m.name(),
                updates,
                total_ms: secs * 1e3,
                mean_ms_per_update: per(secs * 1e3),
                mean_solver_iters: per(iters as f64),
            }
        })
        .collect()
}

fn write_rows<T: Serialize>(path: &Path, rows: impl IntoIterator<Item = T>) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

/// Writes all tables into `dir` (created if needed) and returns their paths.
pub fn write_csvs(result: &SimResult, dir: &Path) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir)?;
    let band = chi2_band(result.runs.len(), 2, 0.05);
    let mut rmse_rows = Vec::new();
    let mut nees_rows = Vec::new();
    for &m in &result.methods {
        for (k, &id) in result.agents.iter().enumerate() {
            for (t, v) in position_rmse(result, m, k).into_iter().enumerate() {
                rmse_rows.push(RmseRow { method: m.name(), agent: id, t, rmse: v });
            }
            for (t, v) in nees(result, m, k)?.into_iter().enumerate() {
                nees_rows.push(NeesRow {
                    method: m.name(),
                    agent: id,
                    t,
                    nees: v,
                    r1: band.r1,
                    r2: band.r2,
                });
            }
        }
    }
    let events = result.methods.iter().flat_map(|&m| {
        result.runs.iter().filter_map(move |r| r.track(m).map(|tr| (r.run, tr))).flat_map(move |(run, tr)| {
            tr.events.iter().map(move |e| EventCsvRow {
                method: m.name(),
                run,
                agent: result.agents[e.agent],
                t: e.t,
                event: e.event,
                det_cov: e.det_cov,
                trace_cov: e.trace_cov,
            })
        })
    });
    let paths: Vec<PathBuf> = ["rmse.csv", "nees.csv", "events.csv", "summary.csv", "timing.csv"]
        .iter()
        .map(|f| dir.join(f))
        .collect();
    write_rows(&paths[0], rmse_rows)?;
    write_rows(&paths[1], nees_rows)?;
    write_rows(&paths[2], events)?;
    write_rows(&paths[3], summary(result)?)?;
    write_rows(&paths[4], timing(result))?;
    Ok(paths)
}

/// Mean final RMSE per method, in `result.methods` order.
pub fn final_rmse_table(result: &SimResult) -> Vec<(Method, f64)> {
    result.methods.iter().map(|&m| (m, final_rmse(result, m))).collect()
}

/// Writes the first run's message trace of every decentralized method as
/// `trace-<method>.ndjson`.
pub fn write_traces(result: &SimResult, dir: &Path) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir)?;
    let Some(first) = result.runs.first() else {
        return Ok(vec![]);
    };
    let mut paths = Vec::new();
    for tr in first.tracks.iter().filter(|t| t.method.fusion().is_some()) {
        let path = dir.join(format!("trace-{}.ndjson", tr.method));
        let file = std::io::BufWriter::new(std::fs::File::create(&path)?);
        crate::protocol::write_trace(&tr.trace, file)?;
        paths.push(path);
    }
    Ok(paths)
}
