//! Plot-ready tables, event logs and a manifest.
//!
//! Layout of a study directory:
//!
//! ```text
//! manifest.json        schema version, seeds, per-case config hashes, file list
//! configs/<case>.toml  exact config of each case
//! aircraft.csv         one row per aircraft per replication
//! series.csv           sampled time series per replication
//! mean_series.csv      series averaged over replications
//! replications.csv     mean travel time per case and replication
//! summary.csv          per-case mean and sd of travel time, Welch p-values
//! events/<case>_r<NN>.jsonl
//! ```
//!
//! Every file is written to a temporary name first and renamed into place.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::config::ScenarioConfig;
use crate::error::{Error, Result};
use crate::sim::{write_event_log, RunResult};

use super::StudyResult;

pub const MANIFEST_SCHEMA_VERSION: u32 = 1;

/// Writes `path` through a temporary sibling file and renames it into place.
pub fn write_atomic<F>(path: &Path, fill: F) -> Result<()>
where
    F: FnOnce(&mut BufWriter<File>) -> Result<()>,
{
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".partial");
    let tmp = PathBuf::from(tmp);
    let file = File::create(&tmp).map_err(|e| Error::io(&tmp, e))?;
    let mut w = BufWriter::new(file);
    fill(&mut w)?;
    let file = w.into_inner().map_err(|e| Error::io(&tmp, e.into_error()))?;
    file.sync_all().map_err(|e| Error::io(&tmp, e))?;
    fs::rename(&tmp, path).map_err(|e| Error::io(path, e))
}

fn create_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

fn write_csv<T: Serialize>(path: &Path, rows: impl IntoIterator<Item = T>) -> Result<()> {
    write_atomic(path, |w| {
        let mut out = csv::Writer::from_writer(w);
        for row in rows {
            out.serialize(row)?;
        }
        out.flush().map_err(|e| Error::io(path, e))
    })
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    write_atomic(path, |w| {
        serde_json::to_writer_pretty(&mut *w, value)?;
        w.write_all(b"\n").map_err(|e| Error::io(path, e))
    })
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    write_atomic(path, |w| w.write_all(text.as_bytes()).map_err(|e| Error::io(path, e)))
}

#[derive(Serialize)]
struct AircraftRow<'a> {
    case: &'a str,
    replication: u32,
    aircraft_id: u32,
    intro_time: f64,
    entry_time: f64,
    arrival_time: f64,
    travel_time_s: f64,
    path_miles: f64,
    cum_heading_deg: f64,
    hold_count: u32,
    replan_count: u32,
}

#[derive(Serialize)]
struct SeriesCsvRow<'a> {
    case: &'a str,
    replication: u32,
    time_s: f64,
    active_count: usize,
    queued_count: usize,
    total_entropy: f64,
    support: usize,
    mean_kt: f64,
}

#[derive(Serialize)]
struct MeanSeriesCsvRow<'a> {
    case: &'a str,
    time_s: f64,
    mean_active_count: f64,
    mean_total_entropy: f64,
    mean_kt: f64,
}

#[derive(Serialize)]
struct ReplicationRow<'a> {
    case: &'a str,
    replication: u32,
    seed: u64,
    mean_tt: f64,
    end_time_s: f64,
}

#[derive(Serialize)]
struct CaseEntry {
    name: String,
    config_hash: String,
    config_file: String,
}

#[derive(Serialize)]
struct Manifest {
    schema_version: u32,
    tool_version: &'static str,
    study: String,
    replications: u32,
    master_seed: u64,
    seeds: Vec<u64>,
    cases: Vec<CaseEntry>,
    files: Vec<String>,
}

fn aircraft_rows<'a>(case: &'a str, replication: u32, run: &'a RunResult) -> impl Iterator<Item = AircraftRow<'a>> {
    run.aircraft.iter().map(move |a| AircraftRow {
        case,
        replication,
        aircraft_id: a.aircraft_id,
        intro_time: a.intro_time,
        entry_time: a.entry_time,
        arrival_time: a.arrival_time,
        travel_time_s: a.travel_time_s,
        path_miles: a.path_miles,
        cum_heading_deg: a.cum_heading_deg,
        hold_count: a.hold_count,
        replan_count: a.replan_count,
    })
}

fn series_rows<'a>(case: &'a str, replication: u32, run: &'a RunResult) -> impl Iterator<Item = SeriesCsvRow<'a>> {
    run.series.iter().map(move |s| SeriesCsvRow {
        case,
        replication,
        time_s: s.time_s,
        active_count: s.active_count,
        queued_count: s.queued_count,
        total_entropy: s.total_entropy,
        support: s.support,
        mean_kt: s.mean_kt,
    })
}

fn write_events(path: &Path, run: &RunResult) -> Result<()> {
    write_atomic(path, |w| write_event_log(&run.events, w))
}

/// Writes every table, event log and the manifest for `result` into `out`.
/// Returns the paths written, relative to `out`.
pub fn emit_outputs(result: &StudyResult, out: &Path) -> Result<Vec<String>> {
    create_dir(&out.join("events"))?;
    create_dir(&out.join("configs"))?;
    let mut files = Vec::new();

    let mut case_entries = Vec::new();
    for c in &result.cases {
        let rel = format!("configs/{}.toml", c.name);
        write_text(&out.join(&rel), &c.config.to_toml())?;
        case_entries.push(CaseEntry {
            name: c.name.clone(),
            config_hash: c.config.hash(),
            config_file: rel.clone(),
        });
        files.push(rel);
    }

    write_csv(
        &out.join("aircraft.csv"),
        result.cases.iter().flat_map(|c| {
            c.runs
                .iter()
                .zip(0..)
                .flat_map(move |(run, r)| aircraft_rows(&c.name, r, run))
        }),
    )?;
    write_csv(
        &out.join("series.csv"),
        result.cases.iter().flat_map(|c| {
            c.runs
                .iter()
                .zip(0..)
                .flat_map(move |(run, r)| series_rows(&c.name, r, run))
        }),
    )?;
    write_csv(
        &out.join("mean_series.csv"),
        result.cases.iter().flat_map(|c| {
            c.mean_series.iter().map(move |s| MeanSeriesCsvRow {
                case: &c.name,
                time_s: s.time_s,
                mean_active_count: s.mean_active_count,
                mean_total_entropy: s.mean_total_entropy,
                mean_kt: s.mean_kt,
            })
        }),
    )?;
    write_csv(
        &out.join("replications.csv"),
        result.cases.iter().flat_map(|c| {
            c.runs.iter().zip(&c.replication_means).zip(0..).map(move |((run, &m), r)| ReplicationRow {
                case: &c.name,
                replication: r,
                seed: run.seed,
                mean_tt: m,
                end_time_s: run.end_time,
            })
        }),
    )?;
    write_summary(result, &out.join("summary.csv"))?;
    files.extend(
        ["aircraft.csv", "series.csv", "mean_series.csv", "replications.csv", "summary.csv"].map(String::from),
    );

    for c in &result.cases {
        for (r, run) in c.runs.iter().enumerate() {
            let rel = format!("events/{}_r{:02}.jsonl", c.name, r);
            write_events(&out.join(&rel), run)?;
            files.push(rel);
        }
    }

    let manifest = Manifest {
        schema_version: MANIFEST_SCHEMA_VERSION,
        tool_version: env!("CARGO_PKG_VERSION"),
        study: result.spec.name.clone(),
        replications: result.spec.replications(),
        master_seed: result.spec.base.master_seed,
        seeds: result.seeds.clone(),
        cases: case_entries,
        files: files.clone(),
    };
    write_json(&out.join("manifest.json"), &manifest)?;
    files.push("manifest.json".into());
    Ok(files)
}

fn write_summary(result: &StudyResult, path: &Path) -> Result<()> {
    write_atomic(path, |w| {
        let mut out = csv::Writer::from_writer(w);
        let mut header = vec!["case".to_string(), "replications".into(), "mean_tt".into(), "sd_tt".into()];
        header.extend(result.cases.iter().map(|c| format!("p_vs_{}", c.name)));
        out.write_record(&header)?;
        for a in &result.cases {
            let mut rec = vec![
                a.name.clone(),
                a.runs.len().to_string(),
                a.mean_tt.to_string(),
                a.sd_tt.to_string(),
            ];
            for b in &result.cases {
                let p = if a.name == b.name {
                    None
                } else {
                    result.p_value(&a.name, &b.name)
                };
                rec.push(p.map(|p| p.to_string()).unwrap_or_default());
            }
            out.write_record(&rec)?;
        }
        out.flush().map_err(|e| Error::io(path, e))
    })
}

/// Writes one run: `aircraft.csv`, `series.csv`, `events.jsonl`,
/// `config.toml` and `manifest.json`.
pub fn emit_run(out: &Path, cfg: &ScenarioConfig, replication: u32, run: &RunResult) -> Result<Vec<String>> {
    create_dir(out)?;
    write_text(&out.join("config.toml"), &cfg.to_toml())?;
    write_csv(&out.join("aircraft.csv"), aircraft_rows("run", replication, run))?;
    write_csv(&out.join("series.csv"), series_rows("run", replication, run))?;
    write_events(&out.join("events.jsonl"), run)?;
    let files: Vec<String> = ["config.toml", "aircraft.csv", "series.csv", "events.jsonl"].map(String::from).into();
    let manifest = Manifest {
        schema_version: MANIFEST_SCHEMA_VERSION,
        tool_version: env!("CARGO_PKG_VERSION"),
        study: "run".into(),
        replications: 1,
        master_seed: cfg.master_seed,
        seeds: vec![run.seed],
        cases: vec![CaseEntry {
            name: "run".into(),
            config_hash: cfg.hash(),
            config_file: "config.toml".into(),
        }],
        files: files.clone(),
    };
    write_json(&out.join("manifest.json"), &manifest)?;
    Ok(files)
}
