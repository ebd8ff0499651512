//! Acceptance criteria, one PASS/FAIL line each.
//!
//! Runs the three reference studies at full size (15 replications), so
//! expect a few minutes in release mode. Criterion 9 is reported but does
//! not affect the exit code.

mod common;

use std::process::ExitCode;
use std::time::Instant;

use hexflow::adaptive::{kt_from_density, SigmoidParams};
use hexflow::config::ScenarioConfig;
use hexflow::entropy::{cell_entropy, LogBase};
use hexflow::harness::{run_study, Preset, StudyResult, StudySpec};
use hexflow::hexgeom::{EdgeIndex, GridSpec};
use hexflow::planner::EdgeGraph;
use hexflow::sim::replay::{capacity_violations, support_regression};
use hexflow::sim::{self, RunResult};
use hexflow::stats::welch_t_test;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

struct Report {
    failed: Vec<u32>,
}

impl Report {
    fn record(&mut self, id: u32, name: &str, soft: bool, started: Instant, o: Outcome) {
        let secs = started.elapsed().as_secs_f64();
        let tag = match (o.pass, soft) {
            (true, _) => "PASS",
            (false, false) => "FAIL",
            (false, true) => "FAIL (soft, not gating)",
        };
        println!("{tag:<4} {id:>2}  {name} [{secs:.1} s]");
        for line in o.detail.lines() {
            println!("        {line}");
        }
        if !o.pass && !soft {
            self.failed.push(id);
        }
    }
}

fn geometry() -> Outcome {
    let grid = GridSpec::new(5, 2.5).unwrap();
    let want = [10.0, 2.165_063_509_461_097, 3.75, 4.330_127_018_922_194];
    let mut worst: f64 = 0.0;
    for c in grid.cells() {
        let u = grid.unimpeded_cost_matrix(*c).unwrap();
        for a in EdgeIndex::ALL {
            for b in EdgeIndex::ALL {
                let sep = a.separation(b);
                worst = worst.max((u.0[a.zero_based()][b.zero_based()] - want[sep]).abs());
            }
        }
    }
    // The rounded figures quoted for the reference grid.
    let quoted = [(want[1], 2.16506), (want[3], 4.33013)];
    let rounded = quoted.iter().all(|(x, q)| (x - q).abs() < 5e-6);
    outcome(
        worst <= 1e-9 && rounded,
        format!("max deviation over 91 cells x 36 pairs: {worst:.2e}"),
    )
}

fn planner() -> Outcome {
    let mut mismatches = 0;
    let mut checked = 0;
    for seed in 0..200 {
        let f = common::planner_fixture(seed);
        for k in [0.0, 3.0, 6.0] {
            let costs = common::cell_costs(&f, k);
            let want = common::exhaustive_min_cost(&f.grid, &costs, f.start, f.goal);
            let got = EdgeGraph::from_cell_costs(&f.grid, costs)
                .least_cost_path(f.start, f.goal)
                .ok()
                .map(|p| p.total_cost);
            checked += 1;
            if got != want {
                mismatches += 1;
            }
        }
    }
    outcome(
        mismatches == 0,
        format!("{checked} fixture/gain pairs on radius 1 and 2 grids, {mismatches} mismatches"),
    )
}

fn entropy() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut worst: f64 = 0.0;
    for _ in 0..1000 {
        let t = common::random_traffic(&mut rng);
        worst = worst.max((cell_entropy(&t) - common::direct_entropy(&t)).abs());
    }
    let mut two = hexflow::cost_model::TrafficMatrix::zeros();
    two.0[1][4] = 3;
    two.0[5][0] = 3;
    let log2 = (cell_entropy(&two) - std::f64::consts::LN_2).abs();
    outcome(
        worst <= 1e-12 && log2 <= 1e-12,
        format!("max deviation on 1000 matrices {worst:.2e}; two equal pairs off ln 2 by {log2:.2e}"),
    )
}

fn sigmoid() -> Outcome {
    let p = SigmoidParams::default();
    let at_mid = kt_from_density(p.midpoint_density, &p).0;
    let at_zero = kt_from_density(0.0, &p).0;
    let grid: Vec<f64> = (0..=20_000).map(|i| i as f64 * 1e-5).collect();
    let ks: Vec<f64> = grid.iter().map(|&r| kt_from_density(r, &p).0).collect();
    let monotone = ks.windows(2).all(|w| w[0] <= w[1]);
    let sup = ks.iter().cloned().fold(0.0, f64::max).max(kt_from_density(1e6, &p).0);
    outcome(
        (at_mid - 3.012).abs() <= 1e-9 && monotone && at_zero < 1e-5 && sup <= 6.024,
        format!("k(x0) = {at_mid}, k(0) = {at_zero:.3e}, sup = {sup}, monotone = {monotone}"),
    )
}

fn logs_equal(a: &StudyResult, b: &StudyResult) -> bool {
    a.cases.iter().zip(&b.cases).all(|(x, y)| {
        x.runs.len() == y.runs.len()
            && x.runs.iter().zip(&y.runs).all(|(p, q)| p.event_log_bytes() == q.event_log_bytes())
    })
}

fn all_runs<'a>(studies: &'a [&'a StudyResult]) -> impl Iterator<Item = &'a RunResult> + 'a {
    studies.iter().flat_map(|s| s.cases.iter().flat_map(|c| c.runs.iter()))
}

fn mean_and_p(study: &StudyResult, a: &str, b: &str) -> (f64, f64, Option<f64>) {
    let ca = study.case(a).unwrap();
    let cb = study.case(b).unwrap();
    let p = welch_t_test(&ca.replication_means, &cb.replication_means).ok().map(|w| w.p_value);
    (ca.mean_tt, cb.mean_tt, p)
}

fn fmt_p(p: Option<f64>) -> String {
    p.map_or("undefined".into(), |p| format!("{p:.3e}"))
}

fn main() -> ExitCode {
    let mut report = Report { failed: Vec::new() };
    let base = ScenarioConfig::reference();
    let jobs = std::thread::available_parallelism().map_or(1, |n| n.get());

    let t = Instant::now();
    report.record(1, "geometry exactness", false, t, geometry());
    let t = Instant::now();
    report.record(2, "planner oracle", false, t, planner());
    let t = Instant::now();
    report.record(3, "entropy oracle", false, t, entropy());
    let t = Instant::now();
    report.record(4, "sigmoid checks", false, t, sigmoid());

    let t = Instant::now();
    let study = |p: Preset, jobs: usize| {
        let spec = StudySpec::preset(p, &base);
        run_study(&spec, jobs).unwrap_or_else(|e| panic!("{} study failed: {e}", p.name()))
    };
    let discount_1 = study(Preset::Discounting, 1);
    let discount_8 = study(Preset::Discounting, 8);
    let single_a = sim::run(&base, 0).unwrap();
    let single_b = sim::run(&base, 0).unwrap();
    let same_run = single_a.event_log_bytes() == single_b.event_log_bytes();
    let same_jobs = logs_equal(&discount_1, &discount_8);
    drop(discount_8);
    report.record(
        5,
        "determinism",
        false,
        t,
        outcome(
            same_run && same_jobs,
            format!(
                "repeat run identical: {same_run}; 30 study runs identical at 1 and 8 threads: {same_jobs}"
            ),
        ),
    );

    let t0 = Instant::now();
    let fva = study(Preset::FixedVsAdaptive, jobs);
    let sweep = study(Preset::RangeSweep, jobs);
    let study_secs = t0.elapsed().as_secs_f64();
    let studies = [&discount_1, &fva, &sweep];

    let t = Instant::now();
    let mut runs = 0;
    let mut faults = 0;
    for r in all_runs(&studies).chain([&single_a]) {
        runs += 1;
        faults += capacity_violations(&r.events).len();
    }
    report.record(
        6,
        "capacity-1 safety",
        false,
        t,
        outcome(faults == 0, format!("{runs} runs scanned, {faults} double-occupancy instants")),
    );

    let t = Instant::now();
    let (adaptive, fixed0, p0) = mean_and_p(&fva, "kt_adaptive", "kt_fixed_0");
    let (_, fixed6, p6) = mean_and_p(&fva, "kt_adaptive", "kt_fixed_6");
    let pass7 = adaptive < fixed0 && p0.is_some_and(|p| p < 0.05) && adaptive <= fixed6 * 1.02;
    let mut detail = String::new();
    for c in &fva.cases {
        detail += &format!("{:<12} mean tt {:>7.1} s  sd {:>6.1}\n", c.name, c.mean_tt, c.sd_tt);
    }
    detail += &format!(
        "adaptive vs k=0: {:+.1}% (p = {}); adaptive vs k=6: {:+.1}% (p = {}); studies took {study_secs:.0} s",
        100.0 * (adaptive / fixed0 - 1.0),
        fmt_p(p0),
        100.0 * (adaptive / fixed6 - 1.0),
        fmt_p(p6),
    );
    report.record(7, "adaptive gain beats fixed gains", false, t, outcome(pass7, detail));

    let t = Instant::now();
    let (with, without, p) = mean_and_p(&discount_1, "discount_500", "no_discount");
    report.record(
        8,
        "discounting lowers travel time",
        false,
        t,
        outcome(
            with < without && p.is_some_and(|p| p < 0.05),
            format!(
                "500 s window {with:.1} s vs no window {without:.1} s ({:+.1}%, p = {})",
                100.0 * (with / without - 1.0),
                fmt_p(p)
            ),
        ),
    );

    let t = Instant::now();
    let best = sweep
        .cases
        .iter()
        .min_by(|a, b| a.mean_tt.total_cmp(&b.mean_tt))
        .unwrap();
    let mut detail: String = sweep
        .cases
        .iter()
        .map(|c| format!("{:<6} mean tt {:>7.1} s  sd {:>6.1}\n", c.name, c.mean_tt, c.sd_tt))
        .collect();
    detail += &format!("minimum at {}", best.name);
    report.record(9, "range sweep minimum at 25 mi", true, t, outcome(best.name == "rs_25", detail));

    let t = Instant::now();
    let (k6, k0, p) = mean_and_p(&fva, "kt_fixed_6", "kt_fixed_0");
    report.record(
        10,
        "fixed k=6 faster than fixed k=0",
        false,
        t,
        outcome(
            k6 < k0 && p.is_some_and(|p| p < 0.05),
            format!("k=6 {k6:.1} s vs k=0 {k0:.1} s ({:+.1}%, p = {})", 100.0 * (k6 / k0 - 1.0), fmt_p(p)),
        ),
    );

    let t = Instant::now();
    let regressions = all_runs(&studies)
        .filter(|r| {
            support_regression(&r.traversals).is_some() || r.series.windows(2).any(|w| w[1].support < w[0].support)
        })
        .count();
    let emitted = studies
        .iter()
        .all(|s| s.cases.iter().all(|c| !c.mean_series.is_empty() && c.runs.iter().all(|r| !r.series.is_empty())));
    let e6 = fva.case("kt_fixed_6").unwrap().mean_final_entropy();
    let e0 = fva.case("kt_fixed_0").unwrap().mean_final_entropy();
    let unit = match base.entropy_log_base {
        LogBase::E => "nats",
        LogBase::Two => "bits",
    };
    report.record(
        11,
        "entropy reporting",
        false,
        t,
        outcome(
            regressions == 0 && emitted && e6 <= e0,
            format!(
                "support regressions {regressions}; series emitted for every case: {emitted}; \
                 final entropy k=6 {e6:.2} vs k=0 {e0:.2} {unit}"
            ),
        ),
    );

    if report.failed.is_empty() {
        println!("all gating criteria passed");
        ExitCode::SUCCESS
    } else {
        println!("failed gating criteria: {:?}", report.failed);
        ExitCode::FAILURE
    }
}
