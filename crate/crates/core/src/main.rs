use std::fs;
use std::io::BufReader;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use hexflow::config::{load_config, load_valid_config, KtMode, ScenarioConfig};
use hexflow::entropy::LogBase;
use hexflow::error::{Error, Result};
use hexflow::harness::{emit_outputs, emit_run, run_study, write_atomic, Preset, StudySpec};
use hexflow::sim::{self, read_event_log, replay};

#[derive(Parser)]
#[command(name = "hexflow", version, about = "Traffic-following flights on a hexagonal grid")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one replication of a scenario.
    Run {
        /// Scenario file; the built-in reference setup when omitted.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, default_value_t = 0)]
        replication: u32,
        /// Override the gain mode: `adaptive` or `fixed:<k>`.
        #[arg(long)]
        kt_mode: Option<KtMode>,
        /// Override the master seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Write tables, event log and manifest here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a replicated multi-case study.
    Study {
        /// discounting, fixed-vs-adaptive or range-sweep.
        preset: Preset,
        #[arg(long)]
        config: Option<PathBuf>,
        /// Override the replication count.
        #[arg(long)]
        replications: Option<u32>,
        #[arg(long)]
        seed: Option<u64>,
        /// Worker threads. Output does not depend on this.
        #[arg(long, default_value_t = default_jobs())]
        jobs: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Re-derive per-aircraft metrics and safety checks from an event log.
    Replay {
        events: PathBuf,
        /// Scenario the log came from (grid and log base for entropy).
        #[arg(long)]
        config: Option<PathBuf>,
        /// Write the re-derived aircraft table here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check a scenario file and list every violation.
    Validate { config: PathBuf },
}

fn default_jobs() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get())
}

fn read_to_string(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::Io {
        path: path.to_owned(),
        source: e,
    })
}

fn scenario(path: Option<&Path>, seed: Option<u64>) -> Result<ScenarioConfig> {
    let mut cfg = match path {
        Some(p) => load_valid_config(&read_to_string(p)?)?,
        None => ScenarioConfig::reference(),
    };
    if let Some(s) = seed {
        cfg.master_seed = s;
    }
    Ok(cfg)
}

fn main() -> ExitCode {
    match dispatch(Cli::parse().command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}

fn dispatch(cmd: Command) -> Result<ExitCode> {
    match cmd {
        Command::Run {
            config,
            replication,
            kt_mode,
            seed,
            out,
        } => {
            let mut cfg = scenario(config.as_deref(), seed)?;
            if let Some(m) = kt_mode {
                cfg.kt_mode = m;
            }
            let res = sim::run(&cfg, replication)?;
            let holds: u32 = res.aircraft.iter().map(|a| a.hold_count).sum();
            println!("kt_mode          {}", cfg.kt_mode);
            println!("replication      {replication} (seed {})", res.seed);
            println!("aircraft         {}", res.aircraft.len());
            println!("mean travel time {:.1} s", res.mean_travel_time().unwrap_or(0.0));
            println!("holds            {holds}");
            println!("finished at      {:.0} s", res.end_time);
            if let Some(last) = res.series.last() {
                println!("final entropy    {:.4}", last.total_entropy);
            }
            if let Some(dir) = out {
                emit_run(&dir, &cfg, replication, &res)?;
                println!("wrote {}", dir.display());
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Study {
            preset,
            config,
            replications,
            seed,
            jobs,
            out,
        } => {
            let mut base = scenario(config.as_deref(), seed)?;
            if let Some(n) = replications {
                base.replications = n;
            }
            let spec = StudySpec::preset(preset, &base);
            let result = run_study(&spec, jobs)?;
            println!("{:<14} {:>10} {:>9}", "case", "mean_tt_s", "sd_tt_s");
            for c in &result.cases {
                println!("{:<14} {:>10.1} {:>9.1}", c.name, c.mean_tt, c.sd_tt);
            }
            for cmp in &result.comparisons {
                let p = cmp.p_value.map_or("n/a".into(), |p| format!("{p:.3e}"));
                println!("p({} vs {}) = {p}", result.cases[cmp.a].name, result.cases[cmp.b].name);
            }
            if let Some(dir) = out {
                let files = emit_outputs(&result, &dir)?;
                println!("wrote {} files to {}", files.len(), dir.display());
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Replay { events, config, out } => {
            let cfg = scenario(config.as_deref(), None)?;
            let file = fs::File::open(&events).map_err(|e| Error::Io {
                path: events.clone(),
                source: e,
            })?;
            let log = read_event_log(BufReader::new(file))?;
            let grid = cfg.build_grid()?;
            let base: LogBase = cfg.entropy_log_base;
            let r = replay::replay(&log, &grid, base)?;
            let violations = replay::capacity_violations(&log);
            println!("events           {}", log.len());
            println!("arrived          {}", r.aircraft.len());
            println!("mean travel time {:.1} s", r.mean_travel_time().unwrap_or(0.0));
            println!("final entropy    {:.4}", r.final_entropy);
            println!("ordered          {}", replay::is_totally_ordered(&log));
            println!("capacity faults  {}", violations.len());
            if let Some(path) = out {
                write_atomic(&path, |w| {
                    let mut csv = csv::Writer::from_writer(w);
                    for a in &r.aircraft {
                        csv.serialize(a)?;
                    }
                    csv.flush().map_err(|e| Error::Io {
                        path: path.clone(),
                        source: e,
                    })
                })?;
            }
            Ok(if violations.is_empty() {
                ExitCode::SUCCESS
            } else {
                ExitCode::FAILURE
            })
        }
        Command::Validate { config } => {
            let cfg = load_config(&read_to_string(&config)?)?;
            let problems = cfg.validate();
            if problems.is_empty() {
                println!("{}: ok (hash {})", config.display(), cfg.hash());
                Ok(ExitCode::SUCCESS)
            } else {
                for p in &problems {
                    println!("{p}");
                }
                Ok(ExitCode::FAILURE)
            }
        }
    }
}
