//! Scenario configuration and origin/destination sampling.
//!
//! Configs are TOML. Every field has a default reproducing the reference
//! experimental setup except `discount_window_s`: leaving it out disables
//! discounting. See `configs/reference.toml` for the full schema.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::adaptive::SigmoidParams;
use crate::cost_model::CostMatrix;
use crate::entropy::LogBase;
use crate::error::{Error, Result};
use crate::hexgeom::{CellCoord, EdgeRef, GridSpec};

pub const SCHEMA_VERSION: u32 = 1;

/// Aircraft counts introduced at each time, in order.
pub const REFERENCE_SCHEDULE: [(f64, u32); 24] = [
    (0.0, 4),
    (500.0, 5),
    (1000.0, 4),
    (1500.0, 5),
    (2000.0, 40),
    (2500.0, 20),
    (3000.0, 10),
    (3500.0, 4),
    (4000.0, 5),
    (4500.0, 6),
    (5000.0, 4),
    (5500.0, 3),
    (6000.0, 10),
    (6500.0, 40),
    (7000.0, 20),
    (7500.0, 10),
    (8000.0, 5),
    (8500.0, 10),
    (9000.0, 30),
    (9500.0, 20),
    (10000.0, 10),
    (10500.0, 6),
    (11000.0, 5),
    (11500.0, 3),
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub radius: u32,
    pub cell_edge_length_mi: f64,
}

impl Default for GridConfig {
    fn default() -> Self {
        GridConfig {
            radius: 5,
            cell_edge_length_mi: 2.5,
        }
    }
}

/// How each aircraft picks its traffic-following gain.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum KtMode {
    /// Every aircraft uses this gain for the whole run.
    Fixed(f64),
    /// Gain follows locally sensed density.
    Adaptive,
}

impl std::str::FromStr for KtMode {
    type Err = Error;

    /// Parses `adaptive` or `fixed:<value>`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.eq_ignore_ascii_case("adaptive") {
            return Ok(KtMode::Adaptive);
        }
        s.strip_prefix("fixed:")
            .and_then(|v| v.trim().parse::<f64>().ok())
            .map(KtMode::Fixed)
            .ok_or_else(|| {
                Error::InvalidParameter(format!("expected `adaptive` or `fixed:<k>`, got `{s}`"))
            })
    }
}

impl std::fmt::Display for KtMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            KtMode::Fixed(k) => write!(f, "fixed:{k}"),
            KtMode::Adaptive => write!(f, "adaptive"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpawnWave {
    pub time_s: f64,
    pub count: u32,
}

/// Replaces the unimpeded cost matrix of one cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct UnimpededOverride {
    pub q: i32,
    pub r: i32,
    pub matrix: [[f64; 6]; 6],
}

impl UnimpededOverride {
    pub fn cell(&self) -> CellCoord {
        CellCoord::new(self.q, self.r)
    }

    pub fn cost_matrix(&self) -> CostMatrix {
        CostMatrix(self.matrix)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioConfig {
    pub schema_version: u32,
    pub grid: GridConfig,
    pub speed_mph: f64,
    pub dt_s: f64,
    pub t_hold_s: f64,
    /// Trailing window for planning traffic. `None` keeps all history.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub discount_window_s: Option<f64>,
    pub kt_mode: KtMode,
    pub kt_max: f64,
    pub sigmoid: SigmoidParams,
    pub kt_update_period_s: f64,
    pub range_rs_mi: f64,
    pub traffic_cost_scale: f64,
    pub spawn_schedule: Vec<SpawnWave>,
    pub replications: u32,
    pub master_seed: u64,
    /// Defaults to ten times the schedule span (at least one hour of span).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_time_s: Option<f64>,
    pub entropy_log_base: LogBase,
    pub series_period_s: f64,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub unimpeded_override: Vec<UnimpededOverride>,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        ScenarioConfig {
            schema_version: SCHEMA_VERSION,
            grid: GridConfig::default(),
            speed_mph: 250.0,
            dt_s: 1.0,
            t_hold_s: 150.0,
            discount_window_s: Some(500.0),
            kt_mode: KtMode::Adaptive,
            kt_max: 6.024,
            sigmoid: SigmoidParams::default(),
            kt_update_period_s: 100.0,
            range_rs_mi: 50.0,
            traffic_cost_scale: 1.0,
            spawn_schedule: REFERENCE_SCHEDULE
                .iter()
                .map(|&(time_s, count)| SpawnWave { time_s, count })
                .collect(),
            replications: 15,
            master_seed: 20_240_917,
            max_time_s: None,
            entropy_log_base: LogBase::E,
            series_period_s: 10.0,
            unimpeded_override: Vec::new(),
        }
    }
}

/// The reference setup shipped as `configs/reference.toml`.
pub const REFERENCE_CONFIG_TOML: &str = include_str!("../configs/reference.toml");

impl ScenarioConfig {
    pub fn reference() -> Self {
        load_config(REFERENCE_CONFIG_TOML).expect("shipped config parses")
    }

    pub fn total_aircraft(&self) -> usize {
        self.spawn_schedule.iter().map(|w| w.count as usize).sum()
    }

    /// Intro times, one per aircraft, in id order.
    pub fn intro_times(&self) -> Vec<f64> {
        self.spawn_schedule
            .iter()
            .flat_map(|w| std::iter::repeat_n(w.time_s, w.count as usize))
            .collect()
    }

    pub fn effective_max_time(&self) -> f64 {
        self.max_time_s.unwrap_or_else(|| {
            let span = self
                .spawn_schedule
                .last()
                .map(|w| w.time_s)
                .unwrap_or(0.0);
            10.0 * span.max(3600.0)
        })
    }

    pub fn build_grid(&self) -> Result<GridSpec> {
        GridSpec::new(self.grid.radius, self.grid.cell_edge_length_mi)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// SHA-256 of the canonical serialization, hex encoded.
    pub fn hash(&self) -> String {
        hex::encode(Sha256::digest(self.to_toml().as_bytes()))
    }

    /// Every invariant violation, prefixed with its field path.
    pub fn validate(&self) -> Vec<String> {
        validate(self)
    }
}

pub fn load_config(text: &str) -> Result<ScenarioConfig> {
    toml::from_str(text).map_err(|e| {
        let (line, column) = e
            .span()
            .map(|s| line_col(text, s.start))
            .unwrap_or((0, 0));
        Error::ConfigParse {
            line,
            column,
            message: e.message().to_string(),
        }
    })
}

/// Parses and validates in one step.
pub fn load_valid_config(text: &str) -> Result<ScenarioConfig> {
    let cfg = load_config(text)?;
    let problems = validate(&cfg);
    if problems.is_empty() {
        Ok(cfg)
    } else {
        Err(Error::ConfigInvalid(problems))
    }
}

fn line_col(text: &str, offset: usize) -> (usize, usize) {
    let before = &text[..offset.min(text.len())];
    let line = before.matches('\n').count() + 1;
    let column = before.len() - before.rfind('\n').map(|i| i + 1).unwrap_or(0) + 1;
    (line, column)
}

pub fn validate(cfg: &ScenarioConfig) -> Vec<String> {
    let mut v = Vec::new();
    let mut need = |ok: bool, field: &str, what: &str| {
        if !ok {
            v.push(format!("{field}: {what}"));
        }
    };
    let pos = |x: f64| x > 0.0 && x.is_finite();

    need(
        cfg.schema_version == SCHEMA_VERSION,
        "schema_version",
        &format!("unsupported version {} (expected {SCHEMA_VERSION})", cfg.schema_version),
    );
    need(cfg.grid.radius >= 1, "grid.radius", "must be >= 1");
    need(pos(cfg.grid.cell_edge_length_mi), "grid.cell_edge_length_mi", "must be > 0");
    need(pos(cfg.speed_mph), "speed_mph", "must be > 0");
    need(pos(cfg.dt_s), "dt_s", "must be > 0");
    need(cfg.t_hold_s >= 0.0 && cfg.t_hold_s.is_finite(), "t_hold_s", "must be >= 0");
    if let Some(w) = cfg.discount_window_s {
        need(pos(w), "discount_window_s", "must be > 0 when present");
    }
    need(pos(cfg.kt_max), "kt_max", "must be > 0");
    if let KtMode::Fixed(k) = cfg.kt_mode {
        need(
            (0.0..=cfg.kt_max).contains(&k),
            "kt_mode.fixed",
            &format!("must lie in [0, kt_max = {}]", cfg.kt_max),
        );
    }
    need(pos(cfg.sigmoid.ceiling), "sigmoid.ceiling", "must be > 0");
    need(pos(cfg.sigmoid.slope_scale), "sigmoid.slope_scale", "must be > 0");
    need(
        cfg.sigmoid.midpoint_density >= 0.0 && cfg.sigmoid.midpoint_density.is_finite(),
        "sigmoid.midpoint_density",
        "must be >= 0",
    );
    need(
        cfg.sigmoid.ceiling <= cfg.kt_max,
        "sigmoid.ceiling",
        "must not exceed kt_max",
    );
    need(pos(cfg.kt_update_period_s), "kt_update_period_s", "must be > 0");
    need(pos(cfg.range_rs_mi), "range_rs_mi", "must be > 0");
    need(
        cfg.traffic_cost_scale >= 0.0 && cfg.traffic_cost_scale.is_finite(),
        "traffic_cost_scale",
        "must be >= 0",
    );
    need(cfg.replications >= 1, "replications", "must be >= 1");
    if let Some(m) = cfg.max_time_s {
        need(pos(m), "max_time_s", "must be > 0 when present");
    }
    need(pos(cfg.series_period_s), "series_period_s", "must be > 0");

    for (i, w) in cfg.spawn_schedule.iter().enumerate() {
        let f = format!("spawn_schedule[{i}]");
        need(
            w.time_s >= 0.0 && w.time_s.is_finite(),
            &format!("{f}.time_s"),
            "must be >= 0",
        );
        need(w.count >= 1, &format!("{f}.count"), "must be >= 1");
        if i > 0 {
            need(
                w.time_s > cfg.spawn_schedule[i - 1].time_s,
                &format!("{f}.time_s"),
                "times must be strictly increasing",
            );
        }
    }

    let radius = cfg.grid.radius as i32;
    for (i, o) in cfg.unimpeded_override.iter().enumerate() {
        let f = format!("unimpeded_override[{i}]");
        need(
            o.cell().hex_distance(CellCoord::ORIGIN) as i32 <= radius,
            &f,
            "cell lies outside the grid",
        );
        need(
            o.matrix.iter().flatten().all(|x| *x > 0.0 && x.is_finite()),
            &format!("{f}.matrix"),
            "entries must be positive",
        );
    }
    v
}

/// Seed for replication `r`: SplitMix64 applied to
/// `master_seed + (r + 1) * 0x9E3779B97F4A7C15` (wrapping).
pub fn replication_seed(master_seed: u64, replication: u32) -> u64 {
    splitmix64(master_seed.wrapping_add((replication as u64 + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15)))
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Start and goal boundary edges for one aircraft.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct OdPair {
    pub origin: EdgeRef,
    pub destination: EdgeRef,
}

/// Draws an ordered pair of boundary edges that are neither identical nor
/// perimeter-adjacent. Each origin has the same number of valid
/// destinations, so the draw is uniform over valid ordered pairs.
pub fn sample_od<R: Rng + ?Sized>(grid: &GridSpec, rng: &mut R) -> OdPair {
    let b = grid.boundary_edges();
    assert!(b.len() >= 4, "need at least four boundary edges");
    let origin = b[rng.random_range(0..b.len())];
    loop {
        let destination = b[rng.random_range(0..b.len())];
        if destination != origin && !grid.perimeter_adjacent(origin, destination) {
            return OdPair {
                origin,
                destination,
            };
        }
    }
}

/// One pair per aircraft, in id order, from the replication's seed.
pub fn generate_ods(grid: &GridSpec, count: usize, seed: u64) -> Vec<OdPair> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count).map(|_| sample_od(grid, &mut rng)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shipped_config_matches_reference_constants() {
        let cfg = ScenarioConfig::reference();
        assert!(cfg.validate().is_empty(), "{:?}", cfg.validate());
        assert_eq!(cfg.grid.cell_edge_length_mi, 2.5);
        assert_eq!(cfg.speed_mph, 250.0);
        assert_eq!(cfg.t_hold_s, 150.0);
        assert_eq!(cfg.discount_window_s, Some(500.0));
        assert_eq!(cfg.kt_update_period_s, 100.0);
        assert_eq!(cfg.replications, 15);
        assert_eq!(cfg.total_aircraft(), 279);
        assert_eq!(cfg, ScenarioConfig::default());
    }

    #[test]
    fn omitted_window_means_no_discounting() {
        let cfg = load_config("kt_mode = \"adaptive\"\n").unwrap();
        assert_eq!(cfg.discount_window_s, None);
        assert_eq!(cfg.t_hold_s, 150.0);
    }

    #[test]
    fn negative_hold_is_a_violation() {
        let cfg = load_config("t_hold_s = -5.0\n").unwrap();
        let v = cfg.validate();
        assert_eq!(v.len(), 1);
        assert!(v[0].starts_with("t_hold_s"));
    }

    #[test]
    fn schedule_violations_name_the_entry() {
        let text = r#"
spawn_schedule = [
  { time_s = 0.0, count = 2 },
  { time_s = 0.0, count = 0 },
]
replications = 0
"#;
        let v = load_config(text).unwrap().validate();
        assert!(v.iter().any(|s| s.starts_with("spawn_schedule[1].time_s")));
        assert!(v.iter().any(|s| s.starts_with("spawn_schedule[1].count")));
        assert!(v.iter().any(|s| s.starts_with("replications")));
        assert!(matches!(load_valid_config(text), Err(Error::ConfigInvalid(_))));
    }

    #[test]
    fn parse_errors_carry_position() {
        let text = "speed_mph = 250.0\ndt_s = \"fast\"\n";
        match load_config(text) {
            Err(Error::ConfigParse { line, column, .. }) => {
                assert_eq!(line, 2);
                assert_eq!(column, 8);
            }
            other => panic!("unexpected {other:?}"),
        }
        assert!(matches!(
            load_config("no_such_field = 1\n"),
            Err(Error::ConfigParse { line: 1, .. })
        ));
    }

    #[test]
    fn kt_mode_forms() {
        let cfg = load_config("kt_mode = { fixed = 3.0 }\n").unwrap();
        assert_eq!(cfg.kt_mode, KtMode::Fixed(3.0));
        assert_eq!("fixed:6".parse::<KtMode>().unwrap(), KtMode::Fixed(6.0));
        assert_eq!("adaptive".parse::<KtMode>().unwrap(), KtMode::Adaptive);
        assert!("fast".parse::<KtMode>().is_err());
        let too_big = load_config("kt_mode = { fixed = 7.0 }\n").unwrap();
        assert!(too_big.validate().iter().any(|s| s.starts_with("kt_mode.fixed")));
    }

    #[test]
    fn round_trip_and_hash() {
        let mut cfg = ScenarioConfig::reference();
        cfg.discount_window_s = None;
        cfg.kt_mode = KtMode::Fixed(5.0);
        cfg.unimpeded_override.push(UnimpededOverride {
            q: 1,
            r: -1,
            matrix: [[3.0; 6]; 6],
        });
        let back = load_config(&cfg.to_toml()).unwrap();
        assert_eq!(back, cfg);
        assert_eq!(back.hash(), cfg.hash());
        let mut other = cfg.clone();
        other.master_seed += 1;
        assert_ne!(other.hash(), cfg.hash());
    }

    #[test]
    fn default_time_cap() {
        let cfg = ScenarioConfig::reference();
        assert_eq!(cfg.effective_max_time(), 115_000.0);
    }

    #[test]
    fn valid_pair_count_by_enumeration() {
        let g = GridSpec::new(5, 2.5).unwrap();
        let b = g.boundary_edges();
        let mut n = 0;
        for &o in b {
            for &d in b {
                if o != d && !g.perimeter_adjacent(o, d) {
                    n += 1;
                }
            }
        }
        assert_eq!(n, 66 * 63);
    }

    #[test]
    fn sampling_respects_rejection_rule_and_seed() {
        let g = GridSpec::new(5, 2.5).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..100_000 {
            let od = sample_od(&g, &mut rng);
            assert_ne!(od.origin, od.destination);
            assert!(!g.perimeter_adjacent(od.origin, od.destination));
            assert!(g.is_boundary(od.origin) && g.is_boundary(od.destination));
        }
        assert_eq!(generate_ods(&g, 50, 99), generate_ods(&g, 50, 99));
        assert_ne!(generate_ods(&g, 50, 99), generate_ods(&g, 50, 100));
    }

    #[test]
    fn replication_seeds_are_stable_and_distinct() {
        assert_eq!(replication_seed(1, 0), replication_seed(1, 0));
        let seeds: std::collections::HashSet<u64> =
            (0..100).map(|r| replication_seed(42, r)).collect();
        assert_eq!(seeds.len(), 100);
        // Pinned so a change in derivation is noticed.
        assert_eq!(replication_seed(0, 0), splitmix64(0x9E37_79B9_7F4A_7C15));
    }
}
