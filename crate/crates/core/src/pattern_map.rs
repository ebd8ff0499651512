//! Traffic pattern map: timestamped edge-pair traversals per cell.
//!
//! Planning reads the windowed view, which ignores traversals that are at
//! least `discount_window` seconds old. Entropy reads the cumulative view.
//! Both are kept incrementally so queries at the current time are O(1).

use std::collections::BTreeMap;
use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use crate::cost_model::TrafficMatrix;
use crate::error::{Error, Result};
use crate::hexgeom::{CellCoord, EdgeIndex};

/// One aircraft crossing one cell, entering by `entry` and leaving by `exit`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraversalRecord {
    pub cell: CellCoord,
    pub entry: EdgeIndex,
    pub exit: EdgeIndex,
    pub time: f64,
}

#[derive(Debug, Clone, Default)]
struct CellLog {
    times: Vec<f64>,
    pairs: Vec<(EdgeIndex, EdgeIndex)>,
    cumulative: TrafficMatrix,
    // Sliding window cache: counts of records [window_start, window_hi)
    // for the window ending at window_now.
    window_start: usize,
    window_hi: usize,
    window_now: f64,
    windowed: TrafficMatrix,
}

impl CellLog {
    fn latest(&self) -> Option<f64> {
        self.times.last().copied()
    }

    fn count_range(&self, lo: usize, hi: usize) -> TrafficMatrix {
        let mut t = TrafficMatrix::zeros();
        for &(a, b) in &self.pairs[lo..hi] {
            t.increment(a, b);
        }
        t
    }

    /// Index of the first record with `time > now`.
    fn upto(&self, now: f64) -> usize {
        self.times.partition_point(|&t| t <= now)
    }

    /// Index of the first record inside the window ending at `now`.
    fn window_lo(&self, now: f64, window: f64) -> usize {
        self.times.partition_point(|&t| now - t >= window)
    }
}

#[derive(Debug, Clone, Default)]
pub struct PatternMap {
    discount_window: Option<f64>,
    cells: BTreeMap<CellCoord, CellLog>,
    log: Vec<TraversalRecord>,
}

impl PatternMap {
    /// `discount_window` of `None` keeps every traversal forever.
    pub fn new(discount_window: Option<f64>) -> Self {
        PatternMap {
            discount_window,
            ..Default::default()
        }
    }

    pub fn discount_window(&self) -> Option<f64> {
        self.discount_window
    }

    pub fn len(&self) -> usize {
        self.log.len()
    }

    pub fn is_empty(&self) -> bool {
        self.log.is_empty()
    }

    /// All records in insertion order.
    pub fn records(&self) -> &[TraversalRecord] {
        &self.log
    }

    pub fn record_traversal(&mut self, rec: TraversalRecord) -> Result<()> {
        if !(rec.time >= 0.0 && rec.time.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "traversal time must be finite and non-negative, got {}",
                rec.time
            )));
        }
        let cell = self.cells.entry(rec.cell).or_default();
        if let Some(latest) = cell.latest() {
            if rec.time < latest {
                return Err(Error::TimeRegression {
                    cell: rec.cell,
                    time: rec.time,
                    latest,
                });
            }
        }
        cell.times.push(rec.time);
        cell.pairs.push((rec.entry, rec.exit));
        cell.cumulative.increment(rec.entry, rec.exit);
        self.log.push(rec);
        Ok(())
    }

    /// Counts of traversals in `(now - window, now]`, or all traversals up to
    /// `now` when no window is configured.
    pub fn windowed_matrix(&self, cell: CellCoord, now: f64) -> TrafficMatrix {
        let Some(w) = self.discount_window else {
            return self.cumulative_matrix(cell, now);
        };
        let Some(log) = self.cells.get(&cell) else {
            return TrafficMatrix::zeros();
        };
        let hi = log.upto(now);
        let lo = log.window_lo(now, w).min(hi);
        log.count_range(lo, hi)
    }

    /// Windowed matrix for a time at or after every previous call on this
    /// cell. Advances the cached window instead of recounting.
    pub fn windowed_matrix_advancing(&mut self, cell: CellCoord, now: f64) -> TrafficMatrix {
        let Some(w) = self.discount_window else {
            return self.cumulative_matrix(cell, now);
        };
        let Some(log) = self.cells.get_mut(&cell) else {
            return TrafficMatrix::zeros();
        };
        if now < log.window_now {
            let hi = log.upto(now);
            let lo = log.window_lo(now, w).min(hi);
            return log.count_range(lo, hi);
        }
        let hi = log.upto(now);
        for i in log.window_hi..hi {
            let (a, b) = log.pairs[i];
            log.windowed.increment(a, b);
        }
        log.window_hi = log.window_hi.max(hi);
        let lo = log.window_lo(now, w);
        for i in log.window_start..lo {
            let (a, b) = log.pairs[i];
            log.windowed.0[a.zero_based()][b.zero_based()] -= 1;
        }
        log.window_start = log.window_start.max(lo);
        log.window_now = now;
        log.windowed
    }

    /// Counts of every traversal with `time <= now`.
    pub fn cumulative_matrix(&self, cell: CellCoord, now: f64) -> TrafficMatrix {
        let Some(log) = self.cells.get(&cell) else {
            return TrafficMatrix::zeros();
        };
        match log.latest() {
            Some(t) if t <= now => log.cumulative,
            _ => log.count_range(0, log.upto(now)),
        }
    }

    /// Cells with at least one traversal, in canonical order.
    pub fn touched_cells(&self) -> impl Iterator<Item = CellCoord> + '_ {
        self.cells.keys().copied()
    }

    /// Writes one `time,q,r,entry,exit` line per record.
    pub fn write_records<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "# time,q,r,entry,exit")?;
        for r in &self.log {
            writeln!(out, "{},{},{},{},{}", r.time, r.cell.q, r.cell.r, r.entry, r.exit)?;
        }
        Ok(())
    }

    /// Reads records written by [`write_records`](Self::write_records).
    /// Blank lines and `#` comments are skipped.
    pub fn read_records<R: BufRead>(input: R) -> Result<Vec<TraversalRecord>> {
        let mut out = Vec::new();
        for (n, line) in input.lines().enumerate() {
            let line = line.map_err(|e| Error::Record {
                line: n + 1,
                message: e.to_string(),
            })?;
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            out.push(parse_record(line).map_err(|message| Error::Record {
                line: n + 1,
                message,
            })?);
        }
        Ok(out)
    }

    /// Rebuilds a map by replaying records in order.
    pub fn replay(
        discount_window: Option<f64>,
        records: impl IntoIterator<Item = TraversalRecord>,
    ) -> Result<Self> {
        let mut map = PatternMap::new(discount_window);
        for r in records {
            map.record_traversal(r)?;
        }
        Ok(map)
    }
}

fn parse_record(line: &str) -> std::result::Result<TraversalRecord, String> {
    let fields: Vec<&str> = line.split(',').map(str::trim).collect();
    if fields.len() != 5 {
        return Err(format!("expected 5 fields, found {}", fields.len()));
    }
    let num = |i: usize, what: &str| -> std::result::Result<i64, String> {
        fields[i]
            .parse::<i64>()
            .map_err(|e| format!("bad {what} `{}`: {e}", fields[i]))
    };
    let time: f64 = fields[0]
        .parse()
        .map_err(|e| format!("bad time `{}`: {e}", fields[0]))?;
    let edge = |i: usize, what: &str| -> std::result::Result<EdgeIndex, String> {
        let v = num(i, what)?;
        u8::try_from(v)
            .ok()
            .and_then(|v| EdgeIndex::new(v).ok())
            .ok_or_else(|| format!("{what} {v} outside 1..=6"))
    };
    Ok(TraversalRecord {
        time,
        cell: CellCoord::new(num(1, "q")? as i32, num(2, "r")? as i32),
        entry: edge(3, "entry")?,
        exit: edge(4, "exit")?,
    })
}
