//! Re-derives metrics and invariants from an event log alone.

use std::collections::{BTreeMap, HashMap};

use serde::Serialize;

use crate::entropy::{airspace_entropy_in, LogBase};
use crate::error::Result;
use crate::hexgeom::{CellCoord, GridSpec};
use crate::pattern_map::{PatternMap, TraversalRecord};

use super::events::{EventKind, SimEvent};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReplayedAircraft {
    pub aircraft_id: u32,
    pub intro_time: f64,
    pub arrival_time: f64,
    pub travel_time_s: f64,
    pub path_miles: f64,
    pub cum_heading_deg: f64,
    pub hold_count: u32,
}

/// Two aircraft in one cell at the same logged instant.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CapacityViolation {
    pub time: f64,
    pub seq: u64,
    pub cell: CellCoord,
    pub occupant: u32,
    pub intruder: u32,
}

#[derive(Debug, Clone)]
pub struct Replay {
    pub aircraft: Vec<ReplayedAircraft>,
    pub traversals: Vec<TraversalRecord>,
    pub final_entropy: f64,
    pub end_time: f64,
}

impl Replay {
    pub fn mean_travel_time(&self) -> Option<f64> {
        if self.aircraft.is_empty() {
            return None;
        }
        Some(self.aircraft.iter().map(|a| a.travel_time_s).sum::<f64>() / self.aircraft.len() as f64)
    }
}

/// Traversal records in log order, one per completed cell.
pub fn traversals(events: &[SimEvent]) -> Vec<TraversalRecord> {
    events
        .iter()
        .filter_map(|e| match e.kind {
            EventKind::EnteredCell {
                from, entry, exit, ..
            } => Some(TraversalRecord {
                cell: from,
                entry,
                exit,
                time: e.time,
            }),
            EventKind::Arrived {
                cell, entry, exit, ..
            } => Some(TraversalRecord {
                cell,
                entry,
                exit,
                time: e.time,
            }),
            _ => None,
        })
        .collect()
}

/// Rebuilds per-aircraft metrics, the traversal record and final entropy.
/// Aircraft that never arrive are left out.
pub fn replay(events: &[SimEvent], grid: &GridSpec, base: LogBase) -> Result<Replay> {
    let mut intro: HashMap<u32, f64> = HashMap::new();
    let mut holds: HashMap<u32, u32> = HashMap::new();
    let mut out = Vec::new();
    for e in events {
        match e.kind {
            EventKind::SpawnScheduled { intro_time, .. } => {
                intro.insert(e.aircraft_id, intro_time);
            }
            EventKind::HoldStart { .. } => *holds.entry(e.aircraft_id).or_default() += 1,
            EventKind::Arrived {
                path_miles,
                cum_heading_deg,
                ..
            } => {
                let t0 = intro.get(&e.aircraft_id).copied().unwrap_or(f64::NAN);
                out.push(ReplayedAircraft {
                    aircraft_id: e.aircraft_id,
                    intro_time: t0,
                    arrival_time: e.time,
                    travel_time_s: e.time - t0,
                    path_miles,
                    cum_heading_deg,
                    hold_count: holds.get(&e.aircraft_id).copied().unwrap_or(0),
                });
            }
            _ => {}
        }
    }
    out.sort_by_key(|a| a.aircraft_id);
    let recs = traversals(events);
    let end_time = events.last().map(|e| e.time).unwrap_or(0.0);
    let map = PatternMap::replay(None, recs.iter().copied())?;
    Ok(Replay {
        aircraft: out,
        final_entropy: airspace_entropy_in(&map, grid, end_time, base),
        traversals: recs,
        end_time,
    })
}

/// Rebuilds occupancy from the log and reports every time a cell would hold
/// two aircraft.
pub fn capacity_violations(events: &[SimEvent]) -> Vec<CapacityViolation> {
    let mut occ: HashMap<CellCoord, u32> = HashMap::new();
    let mut bad = Vec::new();
    let mut enter = |occ: &mut HashMap<CellCoord, u32>, e: &SimEvent, cell: CellCoord| {
        if let Some(&other) = occ.get(&cell) {
            if other != e.aircraft_id {
                bad.push(CapacityViolation {
                    time: e.time,
                    seq: e.seq,
                    cell,
                    occupant: other,
                    intruder: e.aircraft_id,
                });
            }
        }
        occ.insert(cell, e.aircraft_id);
    };
    for e in events {
        match e.kind {
            EventKind::EnteredGrid { cell, .. } => enter(&mut occ, e, cell),
            EventKind::EnteredCell { from, cell, .. } => {
                if occ.get(&from) == Some(&e.aircraft_id) {
                    occ.remove(&from);
                }
                enter(&mut occ, e, cell);
            }
            EventKind::Arrived { cell, .. }
                if occ.get(&cell) == Some(&e.aircraft_id) => {
                    occ.remove(&cell);
                }
            _ => {}
        }
    }
    bad
}

/// True when events are strictly ordered by `(time, seq)`.
pub fn is_totally_ordered(events: &[SimEvent]) -> bool {
    events
        .windows(2)
        .all(|w| w[0].time <= w[1].time && w[0].seq < w[1].seq)
}

/// Longest stretch any aircraft spent between starting a hold and either
/// crossing into a new cell or having the hold expire.
pub fn longest_hold(events: &[SimEvent]) -> f64 {
    let mut open: HashMap<u32, f64> = HashMap::new();
    let mut worst: f64 = 0.0;
    for e in events {
        match e.kind {
            EventKind::HoldStart { .. } => {
                open.insert(e.aircraft_id, e.time);
            }
            EventKind::HoldExpired { .. } | EventKind::EnteredCell { .. } => {
                if let Some(t) = open.remove(&e.aircraft_id) {
                    worst = worst.max(e.time - t);
                }
            }
            _ => {}
        }
    }
    worst
}

/// Checks that every cell's count of distinct edge pairs never drops as
/// traversals accumulate. Returns the first offending record index.
pub fn support_regression(records: &[TraversalRecord]) -> Option<usize> {
    let mut seen: BTreeMap<CellCoord, [[bool; 6]; 6]> = BTreeMap::new();
    let mut support: BTreeMap<CellCoord, usize> = BTreeMap::new();
    for (i, r) in records.iter().enumerate() {
        let used = seen.entry(r.cell).or_default();
        used[r.entry.zero_based()][r.exit.zero_based()] = true;
        let now = used.iter().flatten().filter(|b| **b).count();
        let before = support.insert(r.cell, now).unwrap_or(0);
        if now < before {
            return Some(i);
        }
    }
    None
}
