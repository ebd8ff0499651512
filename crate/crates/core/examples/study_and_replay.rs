//! A small replicated study written to disk, then one of its event logs
//! replayed to re-derive the metrics.
//!
//! Usage: `cargo run --release --example study_and_replay [out_dir]`

use std::io::BufReader;

use hexflow::config::ScenarioConfig;
use hexflow::harness::{emit_outputs, run_study, Preset, StudySpec};
use hexflow::sim::{read_event_log, replay};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let out = std::env::args()
        .nth(1)
        .map(std::path::PathBuf::from)
        .unwrap_or_else(|| std::env::temp_dir().join("hexflow_study"));
    let mut base = ScenarioConfig::reference();
    base.replications = 4;
    let spec = StudySpec::preset(Preset::FixedVsAdaptive, &base);
    let result = run_study(&spec, 4)?;
    for c in &result.cases {
        println!("{:<12} mean tt {:>7.1} s  sd {:>5.1}", c.name, c.mean_tt, c.sd_tt);
    }
    if let Some(p) = result.p_value("kt_fixed_0", "kt_fixed_6") {
        println!("Welch p(k=0 vs k=6) = {p:.3e}");
    }
    let files = emit_outputs(&result, &out)?;
    println!("wrote {} files under {}", files.len(), out.display());

    let log_path = out.join("events/kt_adaptive_r00.jsonl");
    let log = read_event_log(BufReader::new(std::fs::File::open(&log_path)?))?;
    let grid = base.build_grid()?;
    let r = replay::replay(&log, &grid, base.entropy_log_base)?;
    let engine = &result.case("kt_adaptive").unwrap().runs[0];
    println!(
        "replayed {}: {} events, mean tt {:.1} s (engine {:.1} s), {} capacity faults",
        log_path.display(),
        log.len(),
        r.mean_travel_time().unwrap_or(0.0),
        engine.mean_travel_time().unwrap_or(0.0),
        replay::capacity_violations(&log).len()
    );
    Ok(())
}
