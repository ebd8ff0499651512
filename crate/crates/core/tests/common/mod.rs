//! Independent oracles shared by the integration tests and the acceptance
//! runner. Nothing here calls the planner or entropy code under test.
#![allow(dead_code)]

use hexflow::cost_model::{total_cost, CostMatrix, FollowingGain, TrafficMatrix};
use hexflow::hexgeom::{CellCoord, EdgeIndex, EdgeRef, GridSpec};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub struct Fixture {
    pub grid: GridSpec,
    pub traffic: Vec<TrafficMatrix>,
    pub start: EdgeRef,
    pub goal: EdgeRef,
}

/// Random sparse traffic on a grid of radius 1 or 2, with random
/// start and goal nodes anywhere on the grid.
pub fn planner_fixture(seed: u64) -> Fixture {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let grid = GridSpec::new(1 + (seed % 2) as u32, 2.5).unwrap();
    let traffic = grid
        .cells()
        .iter()
        .map(|_| {
            let mut t = TrafficMatrix::zeros();
            if rng.random_bool(0.7) {
                for _ in 0..rng.random_range(1..12) {
                    let a = rng.random_range(0..6);
                    let b = rng.random_range(0..6);
                    t.0[a][b] += rng.random_range(1..5);
                }
            }
            t
        })
        .collect();
    let node = |rng: &mut ChaCha8Rng| {
        let c = grid.cells()[rng.random_range(0..grid.cell_count())];
        EdgeRef::new(c, EdgeIndex::from_zero_based(rng.random_range(0..6)))
    };
    let start = node(&mut rng);
    let goal = node(&mut rng);
    Fixture {
        grid,
        traffic,
        start,
        goal,
    }
}

pub fn cell_costs(f: &Fixture, k: f64) -> Vec<CostMatrix> {
    f.grid
        .cells()
        .iter()
        .zip(&f.traffic)
        .map(|(c, t)| total_cost(&f.grid.unimpeded_cost_matrix(*c).unwrap(), t, FollowingGain(k)))
        .collect()
}

/// Minimum cost over the simple paths from `start` to `goal`, found by
/// depth-first branch and bound. Arcs: any two distinct edges of one cell,
/// weighted `max(0, C)`, plus a free hop across each shared edge.
///
/// Plain enumeration is hopeless even on 7 cells because clamped arcs
/// create huge families of zero-cost detours, so a branch is cut once its
/// cost plus a lower bound on the rest reaches the best complete path.
/// The bound is the cost-to-goal from a Bellman-Ford sweep over the same
/// arcs; any admissible bound leaves the minimum unchanged.
pub fn exhaustive_min_cost(grid: &GridSpec, costs: &[CostMatrix], start: EdgeRef, goal: EdgeRef) -> Option<f64> {
    let cells = grid.cells();
    let idx = |c: CellCoord| cells.iter().position(|x| *x == c);
    let n = cells.len() * 6;
    let id = |e: EdgeRef| idx(e.cell).unwrap() * 6 + e.edge.zero_based();
    let mut adj: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
    for (ci, c) in cells.iter().enumerate() {
        for a in 0..6 {
            for b in 0..6 {
                if a != b {
                    adj[ci * 6 + a].push((ci * 6 + b, costs[ci].0[a][b].max(0.0)));
                }
            }
            let e = EdgeIndex::from_zero_based(a);
            if let Some(nj) = idx(c.neighbor(e)) {
                adj[ci * 6 + a].push((nj * 6 + e.opposite().zero_based(), 0.0));
            }
        }
    }
    let (s, t) = (id(start), id(goal));

    let mut to_goal = vec![f64::INFINITY; n];
    to_goal[t] = 0.0;
    for _ in 0..n {
        let mut changed = false;
        for u in 0..n {
            for &(v, w) in &adj[u] {
                if to_goal[v] + w < to_goal[u] {
                    to_goal[u] = to_goal[v] + w;
                    changed = true;
                }
            }
        }
        if !changed {
            break;
        }
    }
    if !to_goal[s].is_finite() {
        return None;
    }
    // Try the most promising arcs first so the first complete path is
    // already near the optimum and pruning bites early.
    for arcs in adj.iter_mut() {
        arcs.sort_by(|a, b| (a.1 + to_goal[a.0]).total_cmp(&(b.1 + to_goal[b.0])));
    }

    struct Search<'a> {
        adj: &'a [Vec<(usize, f64)>],
        bound: &'a [f64],
        seen: Vec<bool>,
        best: f64,
        goal: usize,
    }
    impl Search<'_> {
        fn dfs(&mut self, u: usize, cost: f64) {
            if u == self.goal {
                self.best = self.best.min(cost);
                return;
            }
            self.seen[u] = true;
            for &(v, w) in &self.adj[u] {
                // Branches that can at best tie the incumbent (up to rounding
                // in the bound) are not worth enumerating.
                if !self.seen[v] && cost + w + self.bound[v] < self.best - 1e-9 {
                    self.dfs(v, cost + w);
                }
            }
            self.seen[u] = false;
        }
    }
    let mut search = Search {
        adj: &adj,
        bound: &to_goal,
        seen: vec![false; n],
        best: f64::INFINITY,
        goal: t,
    };
    search.dfs(s, 0.0);
    search.best.is_finite().then_some(search.best)
}

/// Shannon entropy written as `ln s - (1/s) sum c ln c`, a rearrangement
/// of `-sum p ln p` that shares no code path with the library.
pub fn direct_entropy(t: &TrafficMatrix) -> f64 {
    let s: f64 = t.0.iter().flatten().map(|&c| c as f64).sum();
    if s == 0.0 {
        return 0.0;
    }
    let acc: f64 = t
        .0
        .iter()
        .flatten()
        .filter(|&&c| c > 0)
        .map(|&c| c as f64 * (c as f64).ln())
        .sum();
    s.ln() - acc / s
}

pub fn random_traffic(rng: &mut ChaCha8Rng) -> TrafficMatrix {
    let mut t = TrafficMatrix::zeros();
    let density = rng.random_range(0.05..1.0);
    for v in t.0.iter_mut().flatten() {
        if rng.random_bool(density) {
            *v = rng.random_range(1..1000);
        }
    }
    t
}
