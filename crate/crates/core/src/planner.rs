//! Least-cost routing over the graph of cell edges.
//!
//! Every `EdgeRef` is a node. Two kinds of arcs exist:
//!
//! * within a cell, from edge `i` to edge `j != i`, weighted by the total
//!   transit cost `C[i][j]` clamped at zero;
//! * between the two `EdgeRef`s of one physical edge, weighted zero.
//!
//! Within-cell arcs are directed because `C` is not symmetric once traffic
//! has a direction. U-turn self-pairs have no arc.

use std::cmp::{Ordering, Reverse};
use std::collections::BinaryHeap;

use crate::cost_model::{total_cost, CostMatrix, FollowingGain};
use crate::error::{Error, Result};
use crate::hexgeom::{CellCoord, EdgeRef, GridSpec};
use crate::pattern_map::PatternMap;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ArcKind {
    WithinCell,
    Coincident,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Arc {
    pub from: EdgeRef,
    pub to: EdgeRef,
    pub weight: f64,
    pub kind: ArcKind,
}

/// Weighted edge graph for one planning instant.
#[derive(Debug, Clone)]
pub struct EdgeGraph<'g> {
    grid: &'g GridSpec,
    weights: Vec<CostMatrix>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlannedPath {
    pub nodes: Vec<EdgeRef>,
    pub total_cost: f64,
}

impl PlannedPath {
    pub fn start(&self) -> EdgeRef {
        self.nodes[0]
    }

    pub fn goal(&self) -> EdgeRef {
        *self.nodes.last().expect("paths are never empty")
    }
}

/// Extra restrictions applied while searching.
#[derive(Debug, Clone, Copy, Default)]
pub struct PlanConstraints<'a> {
    /// Cells the path must not enter. The start cell is exempt.
    pub avoid: &'a [CellCoord],
    /// Cells the path must not enter directly from the start cell. Later
    /// visits are allowed.
    pub avoid_next: &'a [CellCoord],
    /// Forbid leaving the start node through its coincident arc, so the
    /// first move stays inside the start cell.
    pub depart_within_cell: bool,
}

/// Builds the graph with arc weights `max(0, U + 1 - k_t T / s)` from the
/// windowed traffic at `now`.
pub fn build_edge_graph<'g>(
    grid: &'g GridSpec,
    map: &PatternMap,
    k_t: FollowingGain,
    now: f64,
) -> EdgeGraph<'g> {
    let costs = grid
        .cells()
        .iter()
        .map(|c| {
            let u = grid.unimpeded_cost_matrix(*c).expect("grid cell");
            total_cost(&u, &map.windowed_matrix(*c, now), k_t)
        })
        .collect();
    EdgeGraph::from_cell_costs(grid, costs)
}

impl<'g> EdgeGraph<'g> {
    /// `costs[i]` belongs to `grid.cells()[i]`. Negative entries are clamped
    /// to zero.
    pub fn from_cell_costs(grid: &'g GridSpec, mut costs: Vec<CostMatrix>) -> Self {
        assert_eq!(costs.len(), grid.cell_count(), "one cost matrix per cell");
        for c in &mut costs {
            for v in c.0.iter_mut().flatten() {
                *v = v.max(0.0);
            }
        }
        EdgeGraph {
            grid,
            weights: costs,
        }
    }

    pub fn grid(&self) -> &GridSpec {
        self.grid
    }

    pub fn node_count(&self) -> usize {
        self.grid.node_count()
    }

    /// Clamped weights for one cell.
    pub fn cell_weights(&self, cell: CellCoord) -> Option<&CostMatrix> {
        self.grid.cell_index(cell).map(|i| &self.weights[i])
    }

    /// Number of zero-weight arcs, counting each physical edge once.
    pub fn coincident_arc_count(&self) -> usize {
        (0..self.node_count())
            .filter(|&n| self.grid.partner_node(n).is_some_and(|p| p > n))
            .count()
    }

    /// Outgoing arcs of a node in ascending target order.
    pub fn arcs_from(&self, e: EdgeRef) -> Vec<Arc> {
        let Some(n) = self.grid.node_index(e) else {
            return Vec::new();
        };
        let mut out = Vec::with_capacity(6);
        self.for_each_arc(n, |to, w, kind| {
            out.push(Arc {
                from: e,
                to: self.grid.node_edge(to),
                weight: w,
                kind,
            })
        });
        out.sort_by_key(|a| a.to);
        out
    }

    /// Every arc of the graph.
    pub fn arcs(&self) -> impl Iterator<Item = Arc> + '_ {
        (0..self.node_count()).flat_map(move |n| self.arcs_from(self.grid.node_edge(n)))
    }

    fn for_each_arc(&self, node: usize, mut f: impl FnMut(usize, f64, ArcKind)) {
        let cell = node / 6;
        let i = node % 6;
        let w = &self.weights[cell];
        for j in 0..6 {
            if j != i {
                f(cell * 6 + j, w.0[i][j], ArcKind::WithinCell);
            }
        }
        if let Some(p) = self.grid.partner_node(node) {
            f(p, 0.0, ArcKind::Coincident);
        }
    }

    pub fn least_cost_path(&self, start: EdgeRef, goal: EdgeRef) -> Result<PlannedPath> {
        self.least_cost_path_with(start, goal, PlanConstraints::default())
    }

    /// Dijkstra from `start` to `goal`. Ties are broken toward the smaller
    /// node in `(q, r, edge)` order, so identical inputs give identical paths.
    pub fn least_cost_path_with(
        &self,
        start: EdgeRef,
        goal: EdgeRef,
        constraints: PlanConstraints<'_>,
    ) -> Result<PlannedPath> {
        let s = self.grid.node_index(start).ok_or(Error::OutOfGrid(start.cell))?;
        let t = self.grid.node_index(goal).ok_or(Error::OutOfGrid(goal.cell))?;
        if s == t {
            return Ok(PlannedPath {
                nodes: vec![start],
                total_cost: 0.0,
            });
        }
        let mut avoid = vec![false; self.grid.cell_count()];
        for c in constraints.avoid {
            if let Some(i) = self.grid.cell_index(*c) {
                avoid[i] = true;
            }
        }
        avoid[s / 6] = false;
        let mut avoid_next = vec![false; self.grid.cell_count()];
        for c in constraints.avoid_next {
            if let Some(i) = self.grid.cell_index(*c) {
                avoid_next[i] = true;
            }
        }
        let unreachable = || Error::Unreachable {
            from: start,
            to: goal,
        };
        if avoid[t / 6] {
            return Err(unreachable());
        }

        let n = self.node_count();
        let mut dist = vec![f64::INFINITY; n];
        let mut prev = vec![usize::MAX; n];
        let mut done = vec![false; n];
        let mut heap = BinaryHeap::new();
        dist[s] = 0.0;
        heap.push(Reverse((Cost(0.0), s)));

        while let Some(Reverse((Cost(d), u))) = heap.pop() {
            if done[u] {
                continue;
            }
            done[u] = true;
            if u == t {
                break;
            }
            self.for_each_arc(u, |v, w, kind| {
                if done[v] || avoid[v / 6] {
                    return;
                }
                if kind == ArcKind::Coincident {
                    if u == s && constraints.depart_within_cell {
                        return;
                    }
                    if u / 6 == s / 6 && avoid_next[v / 6] {
                        return;
                    }
                }
                let nd = d + w;
                if nd < dist[v] {
                    dist[v] = nd;
                    prev[v] = u;
                    heap.push(Reverse((Cost(nd), v)));
                }
            });
        }

        if !done[t] {
            return Err(unreachable());
        }
        let mut nodes = vec![t];
        let mut cur = t;
        while cur != s {
            cur = prev[cur];
            nodes.push(cur);
        }
        nodes.reverse();
        Ok(PlannedPath {
            nodes: nodes.into_iter().map(|i| self.grid.node_edge(i)).collect(),
            total_cost: dist[t],
        })
    }

    /// Sum of arc weights along `nodes`, or `None` if two consecutive nodes
    /// are not joined by an arc.
    pub fn path_cost(&self, nodes: &[EdgeRef]) -> Option<f64> {
        let mut total = 0.0;
        for w in nodes.windows(2) {
            let a = self.grid.node_index(w[0])?;
            let b = self.grid.node_index(w[1])?;
            let mut found = None;
            self.for_each_arc(a, |v, wt, _| {
                if v == b {
                    found = Some(wt);
                }
            });
            total += found?;
        }
        Some(total)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Cost(f64);

impl Eq for Cost {}

impl PartialOrd for Cost {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Cost {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.total_cmp(&other.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hexgeom::EdgeIndex;
    use crate::pattern_map::TraversalRecord;

    fn e(v: u8) -> EdgeIndex {
        EdgeIndex::new(v).unwrap()
    }

    #[test]
    fn empty_map_weights_are_unimpeded_plus_one() {
        let g = GridSpec::new(2, 2.5).unwrap();
        let graph = build_edge_graph(&g, &PatternMap::new(None), FollowingGain(6.0), 0.0);
        let u = g.unimpeded_cost_matrix(CellCoord::ORIGIN).unwrap();
        for arc in graph.arcs() {
            match arc.kind {
                ArcKind::WithinCell => {
                    assert_eq!(arc.weight, u.get(arc.from.edge, arc.to.edge) + 1.0)
                }
                ArcKind::Coincident => assert_eq!(arc.weight, 0.0),
            }
        }
    }

    #[test]
    fn radius_one_counts() {
        let g = GridSpec::new(1, 2.5).unwrap();
        let graph = build_edge_graph(&g, &PatternMap::new(None), FollowingGain(0.0), 0.0);
        assert_eq!(graph.node_count(), 42);
        assert_eq!(graph.coincident_arc_count(), 12);
        let directed_zero = graph.arcs().filter(|a| a.kind == ArcKind::Coincident).count();
        assert_eq!(directed_zero, 24);
    }

    #[test]
    fn clamp_engages_only_past_threshold() {
        let g = GridSpec::new(1, 2.5).unwrap();
        let mut map = PatternMap::new(None);
        for _ in 0..3 {
            map.record_traversal(TraversalRecord {
                cell: CellCoord::ORIGIN,
                entry: e(2),
                exit: e(3),
                time: 0.0,
            })
            .unwrap();
        }
        map.record_traversal(TraversalRecord {
            cell: CellCoord::ORIGIN,
            entry: e(1),
            exit: e(4),
            time: 0.0,
        })
        .unwrap();
        let u = g.unimpeded_cost_matrix(CellCoord::ORIGIN).unwrap();
        let t = map.cumulative_matrix(CellCoord::ORIGIN, 0.0);
        for k in [0.0, 2.0, 3.0, 4.5, 6.0] {
            let graph = build_edge_graph(&g, &map, FollowingGain(k), 0.0);
            let w = graph.cell_weights(CellCoord::ORIGIN).unwrap();
            for i in 0..6 {
                for j in 0..6 {
                    let share = k * t.0[i][j] as f64 / t.grand_sum() as f64;
                    let raw = u.0[i][j] + 1.0 - share;
                    if 1.0 + u.0[i][j] < share {
                        assert_eq!(w.0[i][j], 0.0);
                    } else {
                        assert_eq!(w.0[i][j], raw);
                    }
                }
            }
        }
    }

    #[test]
    fn trivial_path_when_start_is_goal() {
        let g = GridSpec::new(1, 2.5).unwrap();
        let graph = build_edge_graph(&g, &PatternMap::new(None), FollowingGain(0.0), 0.0);
        let s = EdgeRef::new(CellCoord::ORIGIN, e(3));
        let p = graph.least_cost_path(s, s).unwrap();
        assert_eq!(p.nodes, vec![s]);
        assert_eq!(p.total_cost, 0.0);
    }

    #[test]
    fn straight_crossing_on_empty_grid() {
        let g = GridSpec::new(1, 2.5).unwrap();
        let graph = build_edge_graph(&g, &PatternMap::new(None), FollowingGain(0.0), 0.0);
        // West cell's west edge to east cell's east edge: three opposite-edge transits.
        let start = EdgeRef::new(CellCoord::new(-1, 0), e(5));
        let goal = EdgeRef::new(CellCoord::new(1, 0), e(2));
        let p = graph.least_cost_path(start, goal).unwrap();
        let opposite = 2.0 * g.apothem() + 1.0;
        assert!((p.total_cost - 3.0 * opposite).abs() < 1e-12);
        assert_eq!(p.start(), start);
        assert_eq!(p.goal(), goal);
        assert_eq!(graph.path_cost(&p.nodes), Some(p.total_cost));
    }

    #[test]
    fn avoiding_a_cell_detours_or_fails() {
        let g = GridSpec::new(1, 2.5).unwrap();
        let graph = build_edge_graph(&g, &PatternMap::new(None), FollowingGain(0.0), 0.0);
        let start = EdgeRef::new(CellCoord::new(-1, 0), e(5));
        let goal = EdgeRef::new(CellCoord::new(1, 0), e(2));
        let direct = graph.least_cost_path(start, goal).unwrap();
        let detour = graph
            .least_cost_path_with(
                start,
                goal,
                PlanConstraints {
                    avoid: &[CellCoord::ORIGIN],
                    ..Default::default()
                },
            )
            .unwrap();
        assert!(detour.total_cost > direct.total_cost);
        assert!(detour.nodes.iter().all(|n| n.cell != CellCoord::ORIGIN));

        let blocked = graph.least_cost_path_with(
            start,
            goal,
            PlanConstraints {
                avoid: &[goal.cell],
                ..Default::default()
            },
        );
        assert!(matches!(blocked, Err(Error::Unreachable { .. })));
    }

    #[test]
    fn depart_within_cell_blocks_immediate_crossing() {
        let g = GridSpec::new(1, 2.5).unwrap();
        let graph = build_edge_graph(&g, &PatternMap::new(None), FollowingGain(0.0), 0.0);
        // Just entered the center from the west cell; goal is in the west cell.
        let start = EdgeRef::new(CellCoord::ORIGIN, e(5));
        let goal = EdgeRef::new(CellCoord::new(-1, 0), e(4));
        let free = graph.least_cost_path(start, goal).unwrap();
        assert_eq!(free.nodes[1].cell, CellCoord::new(-1, 0));
        let held = graph
            .least_cost_path_with(
                start,
                goal,
                PlanConstraints {
                    depart_within_cell: true,
                    ..Default::default()
                },
            )
            .unwrap();
        assert_eq!(held.nodes[1].cell, CellCoord::ORIGIN);
        assert!(held.total_cost > free.total_cost);
    }

    #[test]
    fn avoid_next_only_restricts_the_first_crossing() {
        let g = GridSpec::new(1, 2.5).unwrap();
        let graph = build_edge_graph(&g, &PatternMap::new(None), FollowingGain(0.0), 0.0);
        // From the center to the east cell's east edge, not via the east cell first.
        let start = EdgeRef::new(CellCoord::ORIGIN, e(5));
        let east = CellCoord::new(1, 0);
        let goal = EdgeRef::new(east, e(2));
        let p = graph
            .least_cost_path_with(
                start,
                goal,
                PlanConstraints {
                    avoid_next: &[east],
                    ..Default::default()
                },
            )
            .unwrap();
        let first_other = p.nodes.iter().find(|n| n.cell != CellCoord::ORIGIN).unwrap();
        assert_ne!(first_other.cell, east);
        assert_eq!(p.goal(), goal);
    }

    #[test]
    fn deterministic_repeat() {
        let g = GridSpec::new(3, 2.5).unwrap();
        let graph = build_edge_graph(&g, &PatternMap::new(None), FollowingGain(3.0), 0.0);
        let a = g.boundary_edges()[0];
        let b = g.boundary_edges()[20];
        let p1 = graph.least_cost_path(a, b).unwrap();
        let p2 = graph.least_cost_path(a, b).unwrap();
        assert_eq!(p1, p2);
    }
}
