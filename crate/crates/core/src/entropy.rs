//! Shannon entropy of per-cell traversal distributions.

use serde::{Deserialize, Serialize};

use crate::cost_model::TrafficMatrix;
use crate::hexgeom::GridSpec;
use crate::pattern_map::PatternMap;

/// Logarithm base used for entropy values.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LogBase {
    /// Nats.
    #[default]
    E,
    /// Bits.
    Two,
}

impl LogBase {
    fn convert(self, nats: f64) -> f64 {
        match self {
            LogBase::E => nats,
            LogBase::Two => nats / std::f64::consts::LN_2,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EntropySample {
    pub time: f64,
    pub total_entropy: f64,
}

/// Entropy of the edge-pair distribution in one cell, in nats.
/// An empty cell has zero entropy.
pub fn cell_entropy(t: &TrafficMatrix) -> f64 {
    let s = t.grand_sum();
    if s == 0 {
        return 0.0;
    }
    let s = s as f64;
    let h: f64 = t
        .0
        .iter()
        .flatten()
        .filter(|&&c| c > 0)
        .map(|&c| {
            let p = c as f64 / s;
            -p * p.ln()
        })
        .sum();
    // A single used pair sums to -0.0.
    h.max(0.0)
}

pub fn cell_entropy_in(t: &TrafficMatrix, base: LogBase) -> f64 {
    base.convert(cell_entropy(t))
}

/// Sum of cell entropies over the cumulative map at `now`.
pub fn airspace_entropy(map: &PatternMap, grid: &GridSpec, now: f64) -> f64 {
    airspace_entropy_in(map, grid, now, LogBase::E)
}

pub fn airspace_entropy_in(map: &PatternMap, grid: &GridSpec, now: f64, base: LogBase) -> f64 {
    // Untouched cells contribute zero.
    let nats: f64 = map
        .touched_cells()
        .filter(|c| grid.contains(*c))
        .map(|c| cell_entropy(&map.cumulative_matrix(c, now)))
        .sum();
    base.convert(nats)
}

/// Total number of distinct edge pairs used, summed over cells.
pub fn airspace_support(map: &PatternMap, grid: &GridSpec, now: f64) -> usize {
    map.touched_cells()
        .filter(|c| grid.contains(*c))
        .map(|c| map.cumulative_matrix(c, now).support())
        .sum()
}
