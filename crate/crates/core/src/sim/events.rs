//! Event log records and their line-delimited JSON encoding.
//!
//! One JSON object per line:
//!
//! ```text
//! {"time":812.0,"seq":40,"aircraft_id":3,"kind":"entered_cell","from":{"q":1,"r":-2},...}
//! ```
//!
//! `time`, `seq`, `aircraft_id` and `kind` are always present; the remaining
//! fields depend on `kind`. Lines are written in `(time, seq)` order.

use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hexgeom::{CellCoord, EdgeIndex, EdgeRef};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimEvent {
    pub time: f64,
    pub seq: u64,
    pub aircraft_id: u32,
    #[serde(flatten)]
    pub kind: EventKind,
}

/// Why a route was recomputed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReplanReason {
    Spawn,
    CellEntry,
    HoldExpiry,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum EventKind {
    /// Intro time reached. The aircraft may still have to queue.
    SpawnScheduled {
        origin: EdgeRef,
        destination: EdgeRef,
        intro_time: f64,
    },
    EnteredGrid { cell: CellCoord, edge: EdgeIndex, k_t: f64 },
    /// Left `from` (entered by `entry`, exited by `exit`) into `cell`.
    EnteredCell {
        from: CellCoord,
        entry: EdgeIndex,
        exit: EdgeIndex,
        cell: CellCoord,
    },
    HoldStart {
        cell: CellCoord,
        blocked: CellCoord,
        deadline: f64,
    },
    HoldExpired { cell: CellCoord, blocked: CellCoord },
    Replanned {
        reason: ReplanReason,
        from: EdgeRef,
        cost: f64,
        hops: usize,
    },
    KtUpdated { old: f64, new: f64, density: f64 },
    /// Reached the destination midpoint; the last cell's traversal is
    /// `(cell, entry, exit)`.
    Arrived {
        cell: CellCoord,
        entry: EdgeIndex,
        exit: EdgeIndex,
        travel_time_s: f64,
        path_miles: f64,
        cum_heading_deg: f64,
        hold_count: u32,
    },
}

impl EventKind {
    pub fn name(&self) -> &'static str {
        match self {
            EventKind::SpawnScheduled { .. } => "spawn_scheduled",
            EventKind::EnteredGrid { .. } => "entered_grid",
            EventKind::EnteredCell { .. } => "entered_cell",
            EventKind::HoldStart { .. } => "hold_start",
            EventKind::HoldExpired { .. } => "hold_expired",
            EventKind::Replanned { .. } => "replanned",
            EventKind::KtUpdated { .. } => "kt_updated",
            EventKind::Arrived { .. } => "arrived",
        }
    }
}

pub fn write_event_log<W: Write>(events: &[SimEvent], mut out: W) -> Result<()> {
    for e in events {
        serde_json::to_writer(&mut out, e)?;
        out.write_all(b"\n").map_err(|e| Error::io("<event log>", e))?;
    }
    Ok(())
}

/// The exact bytes [`write_event_log`] produces.
pub fn event_log_bytes(events: &[SimEvent]) -> Vec<u8> {
    let mut buf = Vec::with_capacity(events.len() * 128);
    write_event_log(events, &mut buf).expect("writing to memory");
    buf
}

pub fn read_event_log<R: BufRead>(input: R) -> Result<Vec<SimEvent>> {
    let mut out = Vec::new();
    for (n, line) in input.lines().enumerate() {
        let line = line.map_err(|e| Error::Record {
            line: n + 1,
            message: e.to_string(),
        })?;
        if line.trim().is_empty() {
            continue;
        }
        let ev = serde_json::from_str(&line).map_err(|e| Error::Record {
            line: n + 1,
            message: e.to_string(),
        })?;
        out.push(ev);
    }
    Ok(out)
}
