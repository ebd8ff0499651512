//! Cell and airspace entropy as traffic organizes.

use hexflow::cost_model::TrafficMatrix;
use hexflow::entropy::{airspace_entropy_in, airspace_support, cell_entropy, cell_entropy_in, LogBase};
use hexflow::hexgeom::{EdgeIndex, GridSpec};
use hexflow::pattern_map::{PatternMap, TraversalRecord};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut t = TrafficMatrix::zeros();
    t.0[0][3] = 4;
    println!("one flow:             {:.4} nats", cell_entropy(&t));
    t.0[1][4] = 4;
    println!("two equal flows:      {:.4} bits", cell_entropy_in(&t, LogBase::Two));
    let mut all = TrafficMatrix::zeros();
    all.0.iter_mut().flatten().for_each(|c| *c = 1);
    println!("all 36 pairs once:    {:.4} nats (ln 36 = {:.4})", cell_entropy(&all), 36f64.ln());

    // The same 60 crossings, once scattered and once concentrated on two pairs.
    let grid = GridSpec::new(2, 2.5)?;
    let mut scattered = PatternMap::new(None);
    let mut organized = PatternMap::new(None);
    for i in 0..60usize {
        let cell = grid.cells()[i % grid.cell_count()];
        let rec = |a, b| TraversalRecord {
            cell,
            entry: EdgeIndex::from_zero_based(a),
            exit: EdgeIndex::from_zero_based(b),
            time: i as f64,
        };
        scattered.record_traversal(rec(i % 6, (i / 6 + 1) % 6))?;
        organized.record_traversal(rec(i % 2, 3 + i % 2))?;
    }
    for (name, map) in [("scattered", &scattered), ("organized", &organized)] {
        println!(
            "{name}: airspace entropy {:.3} nats over {} used pairs",
            airspace_entropy_in(map, &grid, 60.0, LogBase::E),
            airspace_support(map, &grid, 60.0)
        );
    }
    Ok(())
}
