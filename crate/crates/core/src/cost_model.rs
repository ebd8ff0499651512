//! Traffic-attraction costs for edge-pair transits.
//!
//! The total cost of crossing a cell from edge `i` to edge `j` is the
//! unimpeded cost plus a traffic term `1 - k_t * t[i][j] / s`, where `s` is
//! the grand sum of the cell's traffic matrix. Cells with no traffic get a
//! traffic term of exactly 1. Values here are never clamped; the planner
//! clamps negative totals to zero before running Dijkstra.

use std::ops::{Index, IndexMut};

use serde::{Deserialize, Serialize};

use crate::hexgeom::EdgeIndex;

/// Entry-to-exit traversal counts for one cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct TrafficMatrix(pub [[u32; 6]; 6]);

impl TrafficMatrix {
    pub fn zeros() -> Self {
        Self::default()
    }

    pub fn get(&self, entry: EdgeIndex, exit: EdgeIndex) -> u32 {
        self.0[entry.zero_based()][exit.zero_based()]
    }

    pub fn increment(&mut self, entry: EdgeIndex, exit: EdgeIndex) {
        self.0[entry.zero_based()][exit.zero_based()] += 1;
    }

    pub fn grand_sum(&self) -> u64 {
        self.0.iter().flatten().map(|&v| v as u64).sum()
    }

    /// Number of distinct edge pairs with at least one traversal.
    pub fn support(&self) -> usize {
        self.0.iter().flatten().filter(|&&v| v > 0).count()
    }

    /// True when every entry of `self` is at least the matching entry of `other`.
    pub fn dominates(&self, other: &TrafficMatrix) -> bool {
        self.0
            .iter()
            .flatten()
            .zip(other.0.iter().flatten())
            .all(|(a, b)| a >= b)
    }
}

/// Real-valued 6×6 cost matrix indexed `[entry][exit]`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct CostMatrix(pub [[f64; 6]; 6]);

impl CostMatrix {
    pub fn zeros() -> Self {
        Self::default()
    }

    pub fn filled(v: f64) -> Self {
        CostMatrix([[v; 6]; 6])
    }

    pub fn get(&self, entry: EdgeIndex, exit: EdgeIndex) -> f64 {
        self.0[entry.zero_based()][exit.zero_based()]
    }

    pub fn min_entry(&self) -> f64 {
        self.0.iter().flatten().copied().fold(f64::INFINITY, f64::min)
    }
}

impl Index<(usize, usize)> for CostMatrix {
    type Output = f64;

    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.0[i][j]
    }
}

impl IndexMut<(usize, usize)> for CostMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.0[i][j]
    }
}

/// Traffic-following gain `k_t`. Zero ignores traffic entirely.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct FollowingGain(pub f64);

impl FollowingGain {
    pub const ZERO: FollowingGain = FollowingGain(0.0);

    pub fn value(self) -> f64 {
        self.0
    }
}

/// Per-pair traffic term `1 - k_t * t / s`, or all ones for an empty cell.
pub fn traffic_cost(t: &TrafficMatrix, k_t: FollowingGain) -> CostMatrix {
    scaled_traffic_cost(t, k_t, 1.0)
}

/// [`traffic_cost`] with the traffic term multiplied by `scale`.
pub fn scaled_traffic_cost(t: &TrafficMatrix, k_t: FollowingGain, scale: f64) -> CostMatrix {
    let s = t.grand_sum();
    if s == 0 {
        return CostMatrix::filled(scale);
    }
    let s = s as f64;
    let mut c = CostMatrix::zeros();
    for i in 0..6 {
        for j in 0..6 {
            c.0[i][j] = scale * (1.0 - k_t.0 * t.0[i][j] as f64 / s);
        }
    }
    c
}

/// Total transit cost `U + traffic_cost(T, k_t)`.
pub fn total_cost(u: &CostMatrix, t: &TrafficMatrix, k_t: FollowingGain) -> CostMatrix {
    scaled_total_cost(u, t, k_t, 1.0)
}

pub fn scaled_total_cost(
    u: &CostMatrix,
    t: &TrafficMatrix,
    k_t: FollowingGain,
    scale: f64,
) -> CostMatrix {
    let mut c = scaled_traffic_cost(t, k_t, scale);
    for i in 0..6 {
        for j in 0..6 {
            c.0[i][j] += u.0[i][j];
        }
    }
    c
}
