//! Grid geometry and least-cost routing across the reference grid.
//!
//! Lays down a stream of traffic along the row r = 1, then plans the same
//! trip along r = 0 with k_t = 0 and k_t = 6. The higher gain pulls the route
//! onto the established flow.

use hexflow::cost_model::FollowingGain;
use hexflow::hexgeom::{CellCoord, EdgeIndex, EdgeRef, GridSpec};
use hexflow::pattern_map::{PatternMap, TraversalRecord};
use hexflow::planner::build_edge_graph;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let grid = GridSpec::new(5, 2.5)?;
    println!(
        "{} cells, apothem {:.5} mi, diameter {} mi",
        grid.cell_count(),
        grid.apothem(),
        grid.grid_diameter()
    );
    let u = grid.unimpeded_cost_matrix(CellCoord::ORIGIN)?;
    let e = |n| EdgeIndex::new(n).unwrap();
    println!("U(1,2) = {:.5}  U(1,3) = {:.5}  U(1,4) = {:.5}", u.get(e(1), e(2)), u.get(e(1), e(3)), u.get(e(1), e(4)));

    // Ten earlier flights straight west to east along r = 1.
    let mut map = PatternMap::new(None);
    for flight in 0..10 {
        for q in -5..=4 {
            map.record_traversal(TraversalRecord {
                cell: CellCoord::new(q, 1),
                entry: e(5),
                exit: e(2),
                time: flight as f64,
            })?;
        }
    }

    let start = EdgeRef::new(CellCoord::new(-5, 0), e(5));
    let goal = EdgeRef::new(CellCoord::new(5, 0), e(2));
    for k in [0.0, 6.0] {
        let graph = build_edge_graph(&grid, &map, FollowingGain(k), 10.0);
        let path = graph.least_cost_path(start, goal)?;
        let rows: Vec<i32> = path.nodes.iter().map(|n| n.cell.r).collect();
        let on_flow = path.nodes.iter().filter(|n| n.cell.r == 1).count();
        println!(
            "k_t = {k}: cost {:.3}, {} nodes, {on_flow} on the r = 1 stream, rows {:?}",
            path.total_cost,
            path.nodes.len(),
            rows
        );
    }
    Ok(())
}
