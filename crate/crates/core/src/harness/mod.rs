//! Replicated multi-case studies.
//!
//! Every case is a named variant of one base config. Replication `r` of every
//! case draws its origin/destination pairs from the same child seed, so case
//! comparisons are matched pair by pair.

mod output;

use rayon::prelude::*;
use serde::Serialize;

use crate::config::{replication_seed, KtMode, ScenarioConfig};
use crate::error::{Error, Result};
use crate::sim::{self, RunResult};
use crate::stats::{mean, std_dev, welch_t_test};

pub use output::{emit_outputs, emit_run, write_atomic, MANIFEST_SCHEMA_VERSION};

#[derive(Debug, Clone)]
pub struct Case {
    /// Used in tables and file names, so stick to `[A-Za-z0-9_-]`.
    pub name: String,
    pub config: ScenarioConfig,
}

#[derive(Debug, Clone)]
pub struct StudySpec {
    pub name: String,
    pub base: ScenarioConfig,
    pub cases: Vec<Case>,
}

/// Built-in studies.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Preset {
    /// Adaptive gain with a 500 s discount window vs. no discounting.
    Discounting,
    /// Fixed gains 0, 3, 5, 6 and the adaptive gain.
    FixedVsAdaptive,
    /// Adaptive gain with sensing ranges 15, 25, 35 and 50 mi.
    RangeSweep,
}

impl Preset {
    pub const ALL: [Preset; 3] = [Preset::Discounting, Preset::FixedVsAdaptive, Preset::RangeSweep];

    pub fn name(self) -> &'static str {
        match self {
            Preset::Discounting => "discounting",
            Preset::FixedVsAdaptive => "fixed-vs-adaptive",
            Preset::RangeSweep => "range-sweep",
        }
    }
}

impl std::str::FromStr for Preset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Preset::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| {
                let names: Vec<&str> = Preset::ALL.iter().map(|p| p.name()).collect();
                Error::InvalidParameter(format!("unknown study `{s}`; expected one of {}", names.join(", ")))
            })
    }
}

impl StudySpec {
    /// Builds a preset study on top of `base`. Settings the preset varies
    /// are overridden; everything else comes from `base`.
    pub fn preset(preset: Preset, base: &ScenarioConfig) -> Self {
        let case = |name: String, edit: &dyn Fn(&mut ScenarioConfig)| {
            let mut config = base.clone();
            edit(&mut config);
            Case { name, config }
        };
        let cases = match preset {
            Preset::Discounting => vec![
                case("discount_500".into(), &|c| {
                    c.kt_mode = KtMode::Adaptive;
                    c.discount_window_s = Some(500.0);
                    c.range_rs_mi = 50.0;
                }),
                case("no_discount".into(), &|c| {
                    c.kt_mode = KtMode::Adaptive;
                    c.discount_window_s = None;
                    c.range_rs_mi = 50.0;
                }),
            ],
            Preset::FixedVsAdaptive => {
                let mut v: Vec<Case> = [0.0, 3.0, 5.0, 6.0]
                    .iter()
                    .map(|&k| {
                        case(format!("kt_fixed_{k}"), &|c| {
                            c.kt_mode = KtMode::Fixed(k);
                            c.range_rs_mi = 50.0;
                        })
                    })
                    .collect();
                v.push(case("kt_adaptive".into(), &|c| {
                    c.kt_mode = KtMode::Adaptive;
                    c.range_rs_mi = 50.0;
                }));
                v
            }
            Preset::RangeSweep => [15.0, 25.0, 35.0, 50.0]
                .iter()
                .map(|&r| {
                    case(format!("rs_{r}"), &|c| {
                        c.kt_mode = KtMode::Adaptive;
                        c.range_rs_mi = r;
                    })
                })
                .collect(),
        };
        StudySpec {
            name: preset.name().into(),
            base: base.clone(),
            cases,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let mut problems = Vec::new();
        if self.cases.len() < 2 {
            problems.push(format!("study needs at least 2 cases, has {}", self.cases.len()));
        }
        for c in &self.cases {
            let cfg = &c.config;
            let mut differs = |what: &str, same: bool| {
                if !same {
                    problems.push(format!("case `{}`: {what} differs from the base config", c.name));
                }
            };
            differs("spawn_schedule", cfg.spawn_schedule == self.base.spawn_schedule);
            differs("master_seed", cfg.master_seed == self.base.master_seed);
            differs("replications", cfg.replications == self.base.replications);
            differs("grid", cfg.grid == self.base.grid);
            if c.name.is_empty() || !c.name.chars().all(|ch| ch.is_ascii_alphanumeric() || "_-.".contains(ch)) {
                problems.push(format!("case name `{}` is not file-name safe", c.name));
            }
            problems.extend(cfg.validate().into_iter().map(|p| format!("case `{}`: {p}", c.name)));
        }
        let mut names: Vec<&str> = self.cases.iter().map(|c| c.name.as_str()).collect();
        names.sort_unstable();
        if names.windows(2).any(|w| w[0] == w[1]) {
            problems.push("case names must be unique".into());
        }
        if problems.is_empty() {
            Ok(())
        } else {
            Err(Error::ConfigInvalid(problems))
        }
    }

    pub fn replications(&self) -> u32 {
        self.base.replications
    }

    pub fn seeds(&self) -> Vec<u64> {
        (0..self.replications())
            .map(|r| replication_seed(self.base.master_seed, r))
            .collect()
    }
}

/// Series averaged over replications at each sample time. Replications that
/// finished early contribute an empty airspace and their final entropy.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MeanSeriesRow {
    pub time_s: f64,
    pub mean_active_count: f64,
    pub mean_total_entropy: f64,
    pub mean_kt: f64,
}

#[derive(Debug, Clone)]
pub struct CaseResult {
    pub name: String,
    pub config: ScenarioConfig,
    /// Indexed by replication.
    pub runs: Vec<RunResult>,
    /// Mean travel time of each replication.
    pub replication_means: Vec<f64>,
    pub mean_tt: f64,
    pub sd_tt: f64,
    pub mean_series: Vec<MeanSeriesRow>,
}

impl CaseResult {
    /// Replication mean of the last entropy sample.
    pub fn mean_final_entropy(&self) -> f64 {
        let ends: Vec<f64> = self
            .runs
            .iter()
            .map(|r| r.series.last().map_or(0.0, |s| s.total_entropy))
            .collect();
        mean(&ends)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Comparison {
    pub a: usize,
    pub b: usize,
    /// `None` when the test is undefined (both samples constant).
    pub p_value: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct StudyResult {
    pub spec: StudySpec,
    pub seeds: Vec<u64>,
    pub cases: Vec<CaseResult>,
    /// Welch tests on replication means, one per unordered case pair.
    pub comparisons: Vec<Comparison>,
}

impl StudyResult {
    pub fn case(&self, name: &str) -> Option<&CaseResult> {
        self.cases.iter().find(|c| c.name == name)
    }

    pub fn p_value(&self, a: &str, b: &str) -> Option<f64> {
        let ia = self.cases.iter().position(|c| c.name == a)?;
        let ib = self.cases.iter().position(|c| c.name == b)?;
        self.comparisons
            .iter()
            .find(|c| (c.a, c.b) == (ia.min(ib), ia.max(ib)))
            .and_then(|c| c.p_value)
    }
}

/// Runs every case and replication on up to `jobs` threads.
///
/// Results do not depend on `jobs`: each run is self-contained and the
/// output order is fixed.
pub fn run_study(spec: &StudySpec, jobs: usize) -> Result<StudyResult> {
    spec.validate()?;
    let reps = spec.replications();
    let units: Vec<(usize, u32)> = (0..spec.cases.len())
        .flat_map(|c| (0..reps).map(move |r| (c, r)))
        .collect();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .map_err(|e| Error::InvalidParameter(format!("thread pool: {e}")))?;
    let runs: Vec<Result<RunResult>> = pool.install(|| {
        units
            .par_iter()
            .map(|&(c, r)| {
                let case = &spec.cases[c];
                sim::run(&case.config, r).map_err(|e| Error::Study {
                    case: case.name.clone(),
                    replication: r,
                    source: Box::new(e),
                })
            })
            .collect()
    });
    let mut runs = runs.into_iter();
    let mut cases = Vec::with_capacity(spec.cases.len());
    for case in &spec.cases {
        let case_runs: Vec<RunResult> = runs.by_ref().take(reps as usize).collect::<Result<_>>()?;
        cases.push(aggregate(case, case_runs));
    }
    let mut comparisons = Vec::new();
    for a in 0..cases.len() {
        for b in a + 1..cases.len() {
            let p_value = welch_t_test(&cases[a].replication_means, &cases[b].replication_means)
                .ok()
                .map(|w| w.p_value);
            comparisons.push(Comparison { a, b, p_value });
        }
    }
    Ok(StudyResult {
        spec: spec.clone(),
        seeds: spec.seeds(),
        cases,
        comparisons,
    })
}

fn aggregate(case: &Case, runs: Vec<RunResult>) -> CaseResult {
    let replication_means: Vec<f64> = runs
        .iter()
        .map(|r| r.mean_travel_time().unwrap_or(0.0))
        .collect();
    let sd_tt = if replication_means.len() > 1 {
        std_dev(&replication_means)
    } else {
        0.0
    };
    CaseResult {
        name: case.name.clone(),
        config: case.config.clone(),
        mean_tt: mean(&replication_means),
        sd_tt,
        mean_series: mean_series(&runs),
        replication_means,
        runs,
    }
}

fn mean_series(runs: &[RunResult]) -> Vec<MeanSeriesRow> {
    let len = runs.iter().map(|r| r.series.len()).max().unwrap_or(0);
    let n = runs.len() as f64;
    (0..len)
        .map(|k| {
            let mut row = MeanSeriesRow {
                time_s: 0.0,
                mean_active_count: 0.0,
                mean_total_entropy: 0.0,
                mean_kt: 0.0,
            };
            for r in runs {
                match r.series.get(k) {
                    Some(s) => {
                        row.time_s = row.time_s.max(s.time_s);
                        row.mean_active_count += s.active_count as f64 / n;
                        row.mean_total_entropy += s.total_entropy / n;
                        row.mean_kt += s.mean_kt / n;
                    }
                    None => {
                        let last = r.series.last().map_or(0.0, |s| s.total_entropy);
                        row.mean_total_entropy += last / n;
                    }
                }
            }
            row
        })
        .collect()
}
