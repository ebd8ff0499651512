//! Discrete-time multi-aircraft engine.
//!
//! Each step covers the interval `[t0, t0 + dt)`. Queued aircraft whose
//! intro time has come are spawned first and their events carry `t0`.
//! Every active aircraft then moves in ascending id order, and events it
//! produces carry `t0 + dt`. Stamping a whole tick with one time keeps the
//! log consistent with the sequential update order: an aircraft processed
//! later in the tick always sees the occupancy left by earlier ones.
//!
//! Aircraft fly straight segments between edge midpoints at constant speed.
//! Crossing into the next cell needs that cell to be free; otherwise the
//! aircraft holds at the edge midpoint until the cell frees or `t_hold`
//! runs out, at which point it replans toward a free neighbor or around the
//! blocked cell. Cell-entry plans prefer a free next cell and avoid cells
//! held by holding aircraft. A queued aircraft enters only when its origin
//! cell and all the cells around it are empty.

pub mod events;
pub mod replay;

use serde::{Deserialize, Serialize};

use crate::adaptive::{kt_from_density, local_density, SensorRange};
use crate::config::{generate_ods, replication_seed, KtMode, OdPair, ScenarioConfig};
use crate::cost_model::{scaled_total_cost, CostMatrix, FollowingGain, TrafficMatrix};
use crate::entropy::{airspace_entropy_in, airspace_support};
use crate::error::{Error, Result};
use crate::hexgeom::{CellCoord, EdgeIndex, EdgeRef, GridSpec, Point};
use crate::pattern_map::{PatternMap, TraversalRecord};
use crate::planner::{EdgeGraph, PlanConstraints, PlannedPath};

pub use events::{
    event_log_bytes, read_event_log, write_event_log, EventKind, ReplanReason, SimEvent,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Phase {
    /// Intro time not reached yet.
    Scheduled,
    /// Due, but the origin cell or a neighbor of it is occupied.
    Queued,
    Flying,
    Holding,
    Arrived,
}

impl Phase {
    pub fn is_active(self) -> bool {
        matches!(self, Phase::Flying | Phase::Holding)
    }
}

#[derive(Debug, Clone)]
pub struct AircraftState {
    pub id: u32,
    pub origin: EdgeRef,
    pub destination: EdgeRef,
    pub intro_time: f64,
    pub entry_time: Option<f64>,
    pub arrival_time: Option<f64>,
    pub position: Point,
    pub current_cell: Option<CellCoord>,
    pub entry_edge: Option<EdgeIndex>,
    pub planned_path: Option<PlannedPath>,
    pub k_t: FollowingGain,
    pub hold_deadline: Option<f64>,
    /// Sum of absolute heading changes, degrees.
    pub cum_heading_change: f64,
    pub path_miles: f64,
    pub hold_count: u32,
    pub replan_count: u32,
    pub phase: Phase,
    // Index of the current node in `planned_path`.
    route_pos: usize,
    // Miles flown along the segment leaving the current node.
    seg_done: f64,
    heading: Option<f64>,
    dwell_until: Option<f64>,
    uturn_done: bool,
}

impl AircraftState {
    fn new(id: u32, od: OdPair, intro_time: f64) -> Self {
        AircraftState {
            id,
            origin: od.origin,
            destination: od.destination,
            intro_time,
            entry_time: None,
            arrival_time: None,
            position: Point::default(),
            current_cell: None,
            entry_edge: None,
            planned_path: None,
            k_t: FollowingGain::ZERO,
            hold_deadline: None,
            cum_heading_change: 0.0,
            path_miles: 0.0,
            hold_count: 0,
            replan_count: 0,
            phase: Phase::Scheduled,
            route_pos: 0,
            seg_done: 0.0,
            heading: None,
            dwell_until: None,
            uturn_done: false,
        }
    }

    /// Edge midpoint the aircraft last reached on its route.
    pub fn current_node(&self) -> Option<EdgeRef> {
        self.planned_path.as_ref().map(|p| p.nodes[self.route_pos])
    }

    /// Cell the aircraft will enter next, if its route leaves the current one.
    pub fn next_cell(&self) -> Option<CellCoord> {
        let here = self.current_cell?;
        self.remaining_route().iter().map(|e| e.cell).find(|c| *c != here)
    }

    /// Nodes still ahead, starting with the current one.
    pub fn remaining_route(&self) -> &[EdgeRef] {
        match &self.planned_path {
            Some(p) => &p.nodes[self.route_pos..],
            None => &[],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AircraftMetrics {
    pub aircraft_id: u32,
    pub origin: EdgeRef,
    pub destination: EdgeRef,
    pub intro_time: f64,
    pub entry_time: f64,
    pub arrival_time: f64,
    pub travel_time_s: f64,
    pub path_miles: f64,
    pub cum_heading_deg: f64,
    pub hold_count: u32,
    pub replan_count: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeriesRow {
    pub time_s: f64,
    pub active_count: usize,
    pub queued_count: usize,
    pub total_entropy: f64,
    /// Distinct edge pairs used so far, summed over cells.
    pub support: usize,
    /// Mean gain over active aircraft, zero when none are active.
    pub mean_kt: f64,
}

#[derive(Debug, Clone)]
pub struct RunResult {
    pub seed: u64,
    pub ods: Vec<OdPair>,
    pub events: Vec<SimEvent>,
    pub aircraft: Vec<AircraftMetrics>,
    pub series: Vec<SeriesRow>,
    pub traversals: Vec<TraversalRecord>,
    pub end_time: f64,
}

impl RunResult {
    pub fn mean_travel_time(&self) -> Option<f64> {
        if self.aircraft.is_empty() {
            return None;
        }
        Some(self.aircraft.iter().map(|a| a.travel_time_s).sum::<f64>() / self.aircraft.len() as f64)
    }

    pub fn event_log_bytes(&self) -> Vec<u8> {
        event_log_bytes(&self.events)
    }
}

pub struct Simulation {
    cfg: ScenarioConfig,
    grid: GridSpec,
    seed: u64,
    ods: Vec<OdPair>,
    speed: f64,
    range: SensorRange,
    unimpeded: Vec<CostMatrix>,
    tick: u64,
    aircraft: Vec<AircraftState>,
    occupancy: Vec<Option<u32>>,
    map: PatternMap,
    windowed: Vec<TrafficMatrix>,
    windowed_at: Vec<f64>,
    events: Vec<SimEvent>,
    series: Vec<SeriesRow>,
}

/// Runs replication `replication` of `cfg` with ODs drawn from its seed.
pub fn run(cfg: &ScenarioConfig, replication: u32) -> Result<RunResult> {
    let grid = cfg.build_grid()?;
    let seed = replication_seed(cfg.master_seed, replication);
    let ods = generate_ods(&grid, cfg.total_aircraft(), seed);
    Simulation::with_seed(cfg, ods, seed)?.run_to_completion()
}

impl Simulation {
    /// `ods[i]` belongs to aircraft `i`, in schedule order.
    pub fn new(cfg: &ScenarioConfig, ods: Vec<OdPair>) -> Result<Self> {
        Self::with_seed(cfg, ods, 0)
    }

    fn with_seed(cfg: &ScenarioConfig, ods: Vec<OdPair>, seed: u64) -> Result<Self> {
        let problems = cfg.validate();
        if !problems.is_empty() {
            return Err(Error::ConfigInvalid(problems));
        }
        let grid = cfg.build_grid()?;
        let intro = cfg.intro_times();
        if ods.len() != intro.len() {
            return Err(Error::InvalidParameter(format!(
                "schedule introduces {} aircraft but {} OD pairs were given",
                intro.len(),
                ods.len()
            )));
        }
        for od in &ods {
            for e in [od.origin, od.destination] {
                if !grid.is_boundary(e) {
                    return Err(Error::InvalidParameter(format!("{e} is not a boundary edge")));
                }
            }
        }
        let mut unimpeded: Vec<CostMatrix> = grid
            .cells()
            .iter()
            .map(|c| grid.unimpeded_cost_matrix(*c))
            .collect::<Result<_>>()?;
        for o in &cfg.unimpeded_override {
            let i = grid.cell_index(o.cell()).ok_or(Error::OutOfGrid(o.cell()))?;
            unimpeded[i] = o.cost_matrix();
        }
        let aircraft = ods
            .iter()
            .zip(&intro)
            .enumerate()
            .map(|(i, (od, &t))| AircraftState::new(i as u32, *od, t))
            .collect();
        let n = grid.cell_count();
        Ok(Simulation {
            speed: cfg.speed_mph / 3600.0,
            range: SensorRange::new(cfg.range_rs_mi)?,
            cfg: cfg.clone(),
            unimpeded,
            tick: 0,
            aircraft,
            occupancy: vec![None; n],
            map: PatternMap::new(cfg.discount_window_s),
            windowed: vec![TrafficMatrix::zeros(); n],
            windowed_at: vec![f64::NAN; n],
            events: Vec::new(),
            series: Vec::new(),
            seed,
            ods,
            grid,
        })
    }

    pub fn clock(&self) -> f64 {
        self.tick as f64 * self.cfg.dt_s
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn aircraft(&self) -> &[AircraftState] {
        &self.aircraft
    }

    pub fn occupant(&self, cell: CellCoord) -> Option<u32> {
        self.grid.cell_index(cell).and_then(|i| self.occupancy[i])
    }

    pub fn pattern_map(&self) -> &PatternMap {
        &self.map
    }

    pub fn events(&self) -> &[SimEvent] {
        &self.events
    }

    pub fn series(&self) -> &[SeriesRow] {
        &self.series
    }

    pub fn finished(&self) -> bool {
        self.aircraft.iter().all(|a| a.phase == Phase::Arrived)
    }

    /// Advances one tick and returns the events it produced.
    pub fn step(&mut self) -> Result<&[SimEvent]> {
        let first = self.events.len();
        let dt = self.cfg.dt_s;
        let t0 = self.clock();
        let t1 = (self.tick + 1) as f64 * dt;

        self.spawn_due(t0)?;
        if crosses_multiple(t0 - dt, t0, self.cfg.series_period_s) {
            self.sample(t0);
        }
        for i in 0..self.aircraft.len() {
            if self.aircraft[i].phase.is_active() {
                self.advance(i, t0, t1)?;
            }
        }
        if self.cfg.kt_mode == KtMode::Adaptive
            && crosses_multiple(t0, t1, self.cfg.kt_update_period_s)
        {
            self.update_gains(t1);
        }
        self.tick += 1;
        Ok(&self.events[first..])
    }

    /// Steps until every aircraft has arrived.
    pub fn run_to_completion(mut self) -> Result<RunResult> {
        let cap = self.cfg.effective_max_time();
        while !self.finished() {
            if self.clock() >= cap {
                let unfinished = self
                    .aircraft
                    .iter()
                    .filter(|a| a.phase != Phase::Arrived)
                    .count();
                return Err(Error::Timeout { cap_s: cap, unfinished });
            }
            self.step()?;
        }
        let end = self.clock();
        if self.series.last().is_none_or(|r| r.time_s < end) {
            self.sample(end);
        }
        let aircraft = self
            .aircraft
            .iter()
            .map(|a| {
                let arrival = a.arrival_time.expect("finished");
                AircraftMetrics {
                    aircraft_id: a.id,
                    origin: a.origin,
                    destination: a.destination,
                    intro_time: a.intro_time,
                    entry_time: a.entry_time.expect("finished"),
                    arrival_time: arrival,
                    travel_time_s: arrival - a.intro_time,
                    path_miles: a.path_miles,
                    cum_heading_deg: a.cum_heading_change,
                    hold_count: a.hold_count,
                    replan_count: a.replan_count,
                }
            })
            .collect();
        Ok(RunResult {
            seed: self.seed,
            ods: self.ods,
            events: self.events,
            aircraft,
            series: self.series,
            traversals: self.map.records().to_vec(),
            end_time: end,
        })
    }

    fn log(&mut self, time: f64, aircraft_id: u32, kind: EventKind) {
        let seq = self.events.len() as u64;
        self.events.push(SimEvent {
            time,
            seq,
            aircraft_id,
            kind,
        });
    }

    fn cell_idx(&self, c: CellCoord) -> usize {
        self.grid.cell_index(c).expect("cell on grid")
    }

    fn spawn_due(&mut self, now: f64) -> Result<()> {
        for i in 0..self.aircraft.len() {
            let a = &mut self.aircraft[i];
            if a.phase == Phase::Scheduled && a.intro_time <= now {
                a.phase = Phase::Queued;
                let kind = EventKind::SpawnScheduled {
                    origin: a.origin,
                    destination: a.destination,
                    intro_time: a.intro_time,
                };
                let id = a.id;
                self.log(now, id, kind);
            }
        }
        for i in 0..self.aircraft.len() {
            if self.aircraft[i].phase != Phase::Queued {
                continue;
            }
            let origin = self.aircraft[i].origin;
            let ci = self.cell_idx(origin.cell);
            if !self.clear_for_entry(origin.cell) {
                continue;
            }
            let k_t = self.initial_gain(i);
            let pos = self.grid.edge_midpoint(origin)?;
            let a = &mut self.aircraft[i];
            self.occupancy[ci] = Some(a.id);
            a.phase = Phase::Flying;
            a.entry_time = Some(now);
            a.current_cell = Some(origin.cell);
            a.entry_edge = Some(origin.edge);
            a.position = pos;
            a.k_t = k_t;
            let id = a.id;
            self.log(
                now,
                id,
                EventKind::EnteredGrid {
                    cell: origin.cell,
                    edge: origin.edge,
                    k_t: k_t.0,
                },
            );
            if !self.replan(i, origin, ReplanReason::Spawn, DEPART, now)? {
                return Err(Error::Unreachable {
                    from: origin,
                    to: self.aircraft[i].destination,
                });
            }
        }
        Ok(())
    }

    fn initial_gain(&self, i: usize) -> FollowingGain {
        match self.cfg.kt_mode {
            KtMode::Fixed(k) => FollowingGain(k),
            KtMode::Adaptive => {
                let own = self.grid.edge_midpoint(self.aircraft[i].origin).expect("boundary edge");
                self.gain_at(i, own).0
            }
        }
    }

    /// Gain and density for aircraft `i` located at `own`.
    fn gain_at(&self, i: usize, own: Point) -> (FollowingGain, f64) {
        let others: Vec<Point> = self
            .aircraft
            .iter()
            .filter(|a| a.id as usize != i && a.phase.is_active())
            .map(|a| a.position)
            .collect();
        let rho = local_density(own, &others, self.range, &self.grid);
        (kt_from_density(rho, &self.cfg.sigmoid), rho)
    }

    fn update_gains(&mut self, now: f64) {
        let updates: Vec<(usize, FollowingGain, f64)> = (0..self.aircraft.len())
            .filter(|&i| self.aircraft[i].phase.is_active())
            .map(|i| {
                let (k, rho) = self.gain_at(i, self.aircraft[i].position);
                (i, k, rho)
            })
            .collect();
        for (i, k, rho) in updates {
            let old = self.aircraft[i].k_t;
            self.aircraft[i].k_t = k;
            self.log(
                now,
                i as u32,
                EventKind::KtUpdated {
                    old: old.0,
                    new: k.0,
                    density: rho,
                },
            );
        }
    }

    fn graph(&mut self, k_t: FollowingGain, now: f64) -> EdgeGraph<'_> {
        let scale = self.cfg.traffic_cost_scale;
        let mut costs = Vec::with_capacity(self.grid.cell_count());
        for (i, cell) in self.grid.cells().iter().enumerate() {
            if self.windowed_at[i] != now {
                self.windowed[i] = self.map.windowed_matrix_advancing(*cell, now);
                self.windowed_at[i] = now;
            }
            costs.push(scaled_total_cost(&self.unimpeded[i], &self.windowed[i], k_t, scale));
        }
        EdgeGraph::from_cell_costs(&self.grid, costs)
    }

    /// Replaces the route of aircraft `i` with a fresh plan from `from`.
    /// Returns `false` when the destination cannot be reached.
    fn replan(
        &mut self,
        i: usize,
        from: EdgeRef,
        reason: ReplanReason,
        constraints: PlanConstraints<'_>,
        now: f64,
    ) -> Result<bool> {
        let k_t = self.aircraft[i].k_t;
        let goal = self.aircraft[i].destination;
        let path = match self.graph(k_t, now).least_cost_path_with(from, goal, constraints) {
            Ok(p) => p,
            Err(Error::Unreachable { .. }) => return Ok(false),
            Err(e) => return Err(e),
        };
        let (cost, hops) = (path.total_cost, path.nodes.len() - 1);
        let a = &mut self.aircraft[i];
        a.planned_path = Some(path);
        a.route_pos = 0;
        a.seg_done = 0.0;
        a.replan_count += 1;
        let id = a.id;
        self.log(
            now,
            id,
            EventKind::Replanned {
                reason,
                from,
                cost,
                hops,
            },
        );
        Ok(true)
    }

    fn record(&mut self, rec: TraversalRecord) -> Result<()> {
        let ci = self.cell_idx(rec.cell);
        self.windowed_at[ci] = f64::NAN;
        self.map.record_traversal(rec)
    }

    /// Moves aircraft `i` through the interval `[t0, t1)`.
    fn advance(&mut self, i: usize, t0: f64, t1: f64) -> Result<()> {
        let speed = self.speed;
        let mut now = t0;
        loop {
            if let Some(until) = self.aircraft[i].dwell_until {
                if until > t1 {
                    return Ok(());
                }
                now = until;
                self.aircraft[i].dwell_until = None;
            }
            let a = &self.aircraft[i];
            let nodes = &a.planned_path.as_ref().expect("active aircraft have a route").nodes;
            let here = nodes[a.route_pos];
            let Some(&next) = nodes.get(a.route_pos + 1) else {
                return self.arrive(i, here, t1);
            };

            if here.cell == next.cell {
                let from = self.grid.edge_midpoint(here)?;
                let to = self.grid.edge_midpoint(next)?;
                let a = &mut self.aircraft[i];
                if a.seg_done == 0.0 {
                    let h = from.bearing_to(to).to_degrees();
                    if let Some(prev) = a.heading {
                        a.cum_heading_change += heading_delta(prev, h);
                    }
                    a.heading = Some(h);
                }
                let len = from.distance(to);
                let remaining = len - a.seg_done;
                let reach = (t1 - now) * speed;
                if reach >= remaining {
                    now += remaining / speed;
                    a.path_miles += remaining;
                    a.seg_done = 0.0;
                    a.route_pos += 1;
                    a.position = to;
                    continue;
                }
                a.seg_done += reach;
                a.path_miles += reach;
                a.position = from.lerp(to, a.seg_done / len);
                return Ok(());
            }

            // Leaving the cell through `here`.
            let a = &mut self.aircraft[i];
            if a.entry_edge == Some(here.edge) && !a.uturn_done {
                a.uturn_done = true;
                a.dwell_until = Some(now + 4.0 * self.cfg.grid.cell_edge_length_mi / speed);
                continue;
            }
            let target = self.cell_idx(next.cell);
            if self.occupancy[target].is_none() {
                self.cross(i, here, next, t1)?;
                continue;
            }
            return self.hold(i, here, next.cell, t1);
        }
    }

    fn cross(&mut self, i: usize, here: EdgeRef, next: EdgeRef, now: f64) -> Result<()> {
        let entry = self.aircraft[i].entry_edge.expect("active aircraft entered a cell");
        self.record(TraversalRecord {
            cell: here.cell,
            entry,
            exit: here.edge,
            time: now,
        })?;
        let (from_i, to_i) = (self.cell_idx(here.cell), self.cell_idx(next.cell));
        let a = &mut self.aircraft[i];
        self.occupancy[from_i] = None;
        self.occupancy[to_i] = Some(a.id);
        a.current_cell = Some(next.cell);
        a.entry_edge = Some(next.edge);
        a.route_pos += 1;
        a.phase = Phase::Flying;
        a.hold_deadline = None;
        a.uturn_done = false;
        let id = a.id;
        self.log(
            now,
            id,
            EventKind::EnteredCell {
                from: here.cell,
                entry,
                exit: here.edge,
                cell: next.cell,
            },
        );
        // Prefer a free next cell and steer clear of stalled traffic. Each
        // fallback drops one preference.
        let dest = self.aircraft[i].destination.cell;
        let stalled: Vec<CellCoord> = self
            .aircraft
            .iter()
            .filter(|a| a.phase == Phase::Holding)
            .filter_map(|a| a.current_cell)
            .filter(|c| *c != dest)
            .collect();
        let occupied = self.occupied_neighbors(next.cell, id);
        let steer = PlanConstraints {
            avoid: &stalled,
            avoid_next: &occupied,
            ..DEPART
        };
        let free_next = PlanConstraints {
            avoid_next: &occupied,
            ..DEPART
        };
        if !(self.replan(i, next, ReplanReason::CellEntry, steer, now)?
            || self.replan(i, next, ReplanReason::CellEntry, free_next, now)?
            || self.replan(i, next, ReplanReason::CellEntry, DEPART, now)?)
        {
            return Err(Error::Unreachable {
                from: next,
                to: self.aircraft[i].destination,
            });
        }
        Ok(())
    }

    fn hold(&mut self, i: usize, here: EdgeRef, blocked: CellCoord, now: f64) -> Result<()> {
        let t_hold = self.cfg.t_hold_s;
        let a = &self.aircraft[i];
        let id = a.id;
        match (a.phase, a.hold_deadline) {
            (Phase::Holding, Some(deadline)) if now >= deadline => {
                self.log(now, id, EventKind::HoldExpired { cell: here.cell, blocked });
                // Next best cell: first a route whose next cell is free, then
                // any route around the blocked cell.
                let occupied = self.occupied_neighbors(here.cell, id);
                let free_next = PlanConstraints {
                    avoid_next: &occupied,
                    ..DEPART
                };
                let around = PlanConstraints {
                    avoid: &[blocked],
                    ..DEPART
                };
                let found = self.replan(i, here, ReplanReason::HoldExpiry, free_next, now)?
                    || self.replan(i, here, ReplanReason::HoldExpiry, around, now)?;
                if found {
                    let a = &mut self.aircraft[i];
                    a.phase = Phase::Flying;
                    a.hold_deadline = None;
                } else {
                    self.start_hold(i, here.cell, blocked, now + t_hold, now);
                }
            }
            (Phase::Holding, _) => {}
            _ => self.start_hold(i, here.cell, blocked, now + t_hold, now),
        }
        Ok(())
    }

    /// A spawn needs its origin cell and every neighboring cell empty. Without
    /// the buffer, queued spawns refill each hole at the rim as soon as it
    /// opens and the grid locks solid during the heavy waves.
    fn clear_for_entry(&self, cell: CellCoord) -> bool {
        self.occupant(cell).is_none()
            && EdgeIndex::ALL
                .iter()
                .all(|e| self.occupant(cell.neighbor(*e)).is_none())
    }

    fn occupied_neighbors(&self, cell: CellCoord, id: u32) -> Vec<CellCoord> {
        EdgeIndex::ALL
            .iter()
            .map(|e| cell.neighbor(*e))
            .filter(|c| self.occupant(*c).is_some_and(|o| o != id))
            .collect()
    }

    fn start_hold(&mut self, i: usize, cell: CellCoord, blocked: CellCoord, deadline: f64, now: f64) {
        let a = &mut self.aircraft[i];
        a.phase = Phase::Holding;
        a.hold_deadline = Some(deadline);
        a.hold_count += 1;
        let id = a.id;
        self.log(now, id, EventKind::HoldStart { cell, blocked, deadline });
    }

    fn arrive(&mut self, i: usize, here: EdgeRef, now: f64) -> Result<()> {
        let entry = self.aircraft[i].entry_edge.expect("active aircraft entered a cell");
        self.record(TraversalRecord {
            cell: here.cell,
            entry,
            exit: here.edge,
            time: now,
        })?;
        let ci = self.cell_idx(here.cell);
        self.occupancy[ci] = None;
        let a = &mut self.aircraft[i];
        a.phase = Phase::Arrived;
        a.arrival_time = Some(now);
        a.current_cell = None;
        let kind = EventKind::Arrived {
            cell: here.cell,
            entry,
            exit: here.edge,
            travel_time_s: now - a.intro_time,
            path_miles: a.path_miles,
            cum_heading_deg: a.cum_heading_change,
            hold_count: a.hold_count,
        };
        let id = a.id;
        self.log(now, id, kind);
        Ok(())
    }

    fn sample(&mut self, now: f64) {
        let active: Vec<&AircraftState> =
            self.aircraft.iter().filter(|a| a.phase.is_active()).collect();
        let mean_kt = if active.is_empty() {
            0.0
        } else {
            active.iter().map(|a| a.k_t.0).sum::<f64>() / active.len() as f64
        };
        let row = SeriesRow {
            time_s: now,
            active_count: active.len(),
            queued_count: self.aircraft.iter().filter(|a| a.phase == Phase::Queued).count(),
            total_entropy: airspace_entropy_in(&self.map, &self.grid, now, self.cfg.entropy_log_base),
            support: airspace_support(&self.map, &self.grid, now),
            mean_kt,
        };
        self.series.push(row);
    }
}

const DEPART: PlanConstraints<'static> = PlanConstraints {
    avoid: &[],
    avoid_next: &[],
    depart_within_cell: true,
};

/// True when `(a, b]` contains a non-negative multiple of `period`.
fn crosses_multiple(a: f64, b: f64, period: f64) -> bool {
    // Nudge against representation error in tick times like 0.1 * 3.
    let eps = 1e-9;
    let hi = (b / period + eps).floor();
    let lo = (a / period + eps).floor();
    hi > lo && b >= 0.0
}

/// Absolute heading change in degrees, wrapped to `[0, 180]`.
fn heading_delta(from: f64, to: f64) -> f64 {
    let d = (to - from).rem_euclid(360.0);
    d.min(360.0 - d)
}
