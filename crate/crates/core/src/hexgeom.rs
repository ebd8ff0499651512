//! Hexagonal tiling of the airspace.
//!
//! Cells are pointy-top hexagons addressed by axial coordinates `(q, r)`.
//! The plane uses miles with `y` pointing north; increasing `r` moves south.
//!
//! Edges are numbered 1 to 6 clockwise starting from the upper-right edge:
//!
//! | edge | faces | neighbor offset `(dq, dr)` |
//! |------|-------|----------------------------|
//! | 1    | NE    | `(+1, -1)`                 |
//! | 2    | E     | `(+1,  0)`                 |
//! | 3    | SE    | `( 0, +1)`                 |
//! | 4    | SW    | `(-1, +1)`                 |
//! | 5    | W     | `(-1,  0)`                 |
//! | 6    | NW    | `( 0, -1)`                 |
//!
//! Edge `k` and edge `k + 3 (mod 6)` face opposite directions, so the
//! physical edge shared by two neighbors is edge `k` of one cell and the
//! opposite edge of the other.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::cost_model::CostMatrix;
use crate::error::{Error, Result};

const SQRT_3: f64 = 1.732_050_807_568_877_2;

/// Axial coordinate of a hexagonal cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct CellCoord {
    pub q: i32,
    pub r: i32,
}

impl CellCoord {
    pub const ORIGIN: CellCoord = CellCoord { q: 0, r: 0 };

    pub const fn new(q: i32, r: i32) -> Self {
        Self { q, r }
    }

    /// Number of cell steps between two coordinates.
    pub fn hex_distance(self, other: CellCoord) -> u32 {
        let dq = self.q - other.q;
        let dr = self.r - other.r;
        let ds = -dq - dr;
        dq.unsigned_abs().max(dr.unsigned_abs()).max(ds.unsigned_abs())
    }

    pub fn neighbor(self, edge: EdgeIndex) -> CellCoord {
        let (dq, dr) = edge.neighbor_offset();
        CellCoord::new(self.q + dq, self.r + dr)
    }
}

impl fmt::Display for CellCoord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.q, self.r)
    }
}

/// One of the six edges of a cell, numbered 1..=6.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "u8", into = "u8")]
pub struct EdgeIndex(u8);

impl EdgeIndex {
    pub const ALL: [EdgeIndex; 6] = [
        EdgeIndex(1),
        EdgeIndex(2),
        EdgeIndex(3),
        EdgeIndex(4),
        EdgeIndex(5),
        EdgeIndex(6),
    ];

    pub fn new(value: u8) -> Result<Self> {
        if (1..=6).contains(&value) {
            Ok(EdgeIndex(value))
        } else {
            Err(Error::BadEdgeIndex(value))
        }
    }

    /// Builds an edge index from a zero-based position, wrapping modulo 6.
    pub fn from_zero_based(idx: usize) -> Self {
        EdgeIndex((idx % 6) as u8 + 1)
    }

    pub fn get(self) -> u8 {
        self.0
    }

    pub fn zero_based(self) -> usize {
        (self.0 - 1) as usize
    }

    pub fn opposite(self) -> EdgeIndex {
        EdgeIndex::from_zero_based(self.zero_based() + 3)
    }

    /// Number of steps around the hexagon between two edges, in `0..=3`.
    pub fn separation(self, other: EdgeIndex) -> usize {
        let d = (self.zero_based() + 6 - other.zero_based()) % 6;
        d.min(6 - d)
    }

    /// Direction of the outward normal, in radians (math convention).
    pub fn normal_angle(self) -> f64 {
        (60.0 - 60.0 * self.zero_based() as f64).to_radians()
    }

    fn neighbor_offset(self) -> (i32, i32) {
        match self.0 {
            1 => (1, -1),
            2 => (1, 0),
            3 => (0, 1),
            4 => (-1, 1),
            5 => (-1, 0),
            _ => (0, -1),
        }
    }
}

impl TryFrom<u8> for EdgeIndex {
    type Error = Error;

    fn try_from(value: u8) -> Result<Self> {
        EdgeIndex::new(value)
    }
}

impl From<EdgeIndex> for u8 {
    fn from(e: EdgeIndex) -> u8 {
        e.0
    }
}

impl fmt::Display for EdgeIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// A specific edge of a specific cell. The same physical edge has two
/// `EdgeRef`s when it separates two in-grid cells.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct EdgeRef {
    pub cell: CellCoord,
    pub edge: EdgeIndex,
}

impl EdgeRef {
    pub const fn new(cell: CellCoord, edge: EdgeIndex) -> Self {
        Self { cell, edge }
    }
}

impl fmt::Display for EdgeRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}#{}", self.cell, self.edge)
    }
}

/// A point in the flat airspace plane, in miles.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn distance(self, other: Point) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }

    /// Heading from `self` toward `other`, radians.
    pub fn bearing_to(self, other: Point) -> f64 {
        (other.y - self.y).atan2(other.x - self.x)
    }

    pub fn lerp(self, other: Point, t: f64) -> Point {
        Point::new(
            self.x + (other.x - self.x) * t,
            self.y + (other.y - self.y) * t,
        )
    }
}

/// Hex-of-hexes grid: every cell within `radius` steps of the origin.
#[derive(Debug, Clone)]
pub struct GridSpec {
    radius: u32,
    cell_edge_length: f64,
    cells: Vec<CellCoord>,
    lookup: Vec<Option<u32>>,
    boundary: Vec<EdgeRef>,
    perimeter_pos: HashMap<EdgeRef, usize>,
    unimpeded: CostMatrix,
    grid_diameter: f64,
    partners: Vec<Option<u32>>,
}

/// Builds the grid of every cell within `radius` rings of the origin.
pub fn build_grid(radius: u32, cell_edge_length: f64) -> Result<GridSpec> {
    GridSpec::new(radius, cell_edge_length)
}

impl GridSpec {
    pub fn new(radius: u32, cell_edge_length: f64) -> Result<Self> {
        if radius < 1 {
            return Err(Error::InvalidParameter(format!(
                "grid radius must be >= 1, got {radius}"
            )));
        }
        if !(cell_edge_length > 0.0 && cell_edge_length.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "cell edge length must be positive, got {cell_edge_length}"
            )));
        }

        let rad = radius as i32;
        let mut cells = Vec::new();
        for q in -rad..=rad {
            for r in -rad..=rad {
                let c = CellCoord::new(q, r);
                if c.hex_distance(CellCoord::ORIGIN) <= radius {
                    cells.push(c);
                }
            }
        }
        // (q, r) lexicographic order doubles as the canonical node order.
        cells.sort();

        let side = (2 * radius + 1) as usize;
        let mut lookup = vec![None; side * side];
        for (i, c) in cells.iter().enumerate() {
            lookup[Self::slot(radius, *c)] = Some(i as u32);
        }

        let mut grid = GridSpec {
            radius,
            cell_edge_length,
            cells,
            lookup,
            boundary: Vec::new(),
            perimeter_pos: HashMap::new(),
            unimpeded: CostMatrix::zeros(),
            grid_diameter: 0.0,
            partners: Vec::new(),
        };
        grid.unimpeded = grid.compute_unimpeded();
        grid.grid_diameter = 2.0
            * grid
                .cells
                .iter()
                .flat_map(|c| grid.cell_vertices(*c))
                .map(|v| v.x.hypot(v.y))
                .fold(0.0, f64::max);
        grid.partners = (0..grid.node_count())
            .map(|n| {
                let e = grid.node_edge(n);
                let p = e.cell.neighbor(e.edge);
                grid.cell_index(p)
                    .map(|i| grid.node_index_at(i, e.edge.opposite()) as u32)
            })
            .collect();
        grid.boundary = grid.walk_perimeter();
        grid.perimeter_pos = grid
            .boundary
            .iter()
            .enumerate()
            .map(|(i, e)| (*e, i))
            .collect();
        Ok(grid)
    }

    fn slot(radius: u32, c: CellCoord) -> usize {
        let side = (2 * radius + 1) as i32;
        ((c.q + radius as i32) * side + (c.r + radius as i32)) as usize
    }

    pub fn radius(&self) -> u32 {
        self.radius
    }

    pub fn cell_edge_length(&self) -> f64 {
        self.cell_edge_length
    }

    pub fn cell_count(&self) -> usize {
        self.cells.len()
    }

    /// Diameter of the circle circumscribing every cell vertex, miles.
    pub fn grid_diameter(&self) -> f64 {
        self.grid_diameter
    }

    /// Area of the circumscribing circle, square miles.
    pub fn grid_area(&self) -> f64 {
        PI * (self.grid_diameter / 2.0).powi(2)
    }

    /// Distance from a cell center to any edge midpoint.
    pub fn apothem(&self) -> f64 {
        self.cell_edge_length * SQRT_3 / 2.0
    }

    /// Cells in canonical `(q, r)` order.
    pub fn cells(&self) -> &[CellCoord] {
        &self.cells
    }

    pub fn contains(&self, c: CellCoord) -> bool {
        self.cell_index(c).is_some()
    }

    /// Position of `c` in [`cells`](Self::cells), if in-grid.
    pub fn cell_index(&self, c: CellCoord) -> Option<usize> {
        let rad = self.radius as i32;
        if c.q.abs() > rad || c.r.abs() > rad {
            return None;
        }
        self.lookup[Self::slot(self.radius, c)].map(|i| i as usize)
    }

    /// Number of `EdgeRef`s in the grid (six per cell).
    pub fn node_count(&self) -> usize {
        self.cells.len() * 6
    }

    /// Dense index of an edge: `cell_index * 6 + (edge - 1)`. Ordering of
    /// indices matches `EdgeRef` ordering.
    pub fn node_index(&self, e: EdgeRef) -> Option<usize> {
        self.cell_index(e.cell).map(|i| self.node_index_at(i, e.edge))
    }

    pub(crate) fn node_index_at(&self, cell_index: usize, edge: EdgeIndex) -> usize {
        cell_index * 6 + edge.zero_based()
    }

    pub fn node_edge(&self, node: usize) -> EdgeRef {
        EdgeRef::new(self.cells[node / 6], EdgeIndex::from_zero_based(node % 6))
    }

    /// Node index of the coincident edge, if any.
    pub(crate) fn partner_node(&self, node: usize) -> Option<usize> {
        self.partners[node].map(|p| p as usize)
    }

    pub(crate) fn require(&self, c: CellCoord) -> Result<usize> {
        self.cell_index(c).ok_or(Error::OutOfGrid(c))
    }

    pub fn cell_center(&self, c: CellCoord) -> Point {
        let l = self.cell_edge_length;
        Point::new(
            l * SQRT_3 * (c.q as f64 + c.r as f64 / 2.0),
            -1.5 * l * c.r as f64,
        )
    }

    fn cell_vertices(&self, c: CellCoord) -> impl Iterator<Item = Point> + '_ {
        let center = self.cell_center(c);
        let l = self.cell_edge_length;
        (0..6).map(move |k| {
            let a = (90.0 - 60.0 * k as f64).to_radians();
            Point::new(center.x + l * a.cos(), center.y + l * a.sin())
        })
    }

    /// The two endpoints of an edge, ordered counter-clockwise then clockwise.
    fn edge_endpoints(&self, e: EdgeRef) -> (Point, Point) {
        let center = self.cell_center(e.cell);
        let l = self.cell_edge_length;
        let n = e.edge.normal_angle();
        let at = |a: f64| Point::new(center.x + l * a.cos(), center.y + l * a.sin());
        (at(n + PI / 6.0), at(n - PI / 6.0))
    }

    /// The same physical edge seen from the neighboring cell, or `None` on
    /// the grid boundary.
    pub fn coincident_edge(&self, e: EdgeRef) -> Result<Option<EdgeRef>> {
        self.require(e.cell)?;
        let n = e.cell.neighbor(e.edge);
        Ok(self
            .contains(n)
            .then(|| EdgeRef::new(n, e.edge.opposite())))
    }

    pub fn edge_midpoint(&self, e: EdgeRef) -> Result<Point> {
        self.require(e.cell)?;
        Ok(self.midpoint_unchecked(e))
    }

    pub(crate) fn midpoint_unchecked(&self, e: EdgeRef) -> Point {
        let center = self.cell_center(e.cell);
        let a = self.apothem();
        let n = e.edge.normal_angle();
        Point::new(center.x + a * n.cos(), center.y + a * n.sin())
    }

    fn compute_unimpeded(&self) -> CostMatrix {
        let mut u = CostMatrix::zeros();
        let mids: Vec<Point> = EdgeIndex::ALL
            .iter()
            .map(|e| self.midpoint_unchecked(EdgeRef::new(CellCoord::ORIGIN, *e)))
            .collect();
        for i in 0..6 {
            for j in 0..6 {
                u.0[i][j] = if i == j {
                    4.0 * self.cell_edge_length
                } else {
                    // Chord between midpoints separated by m steps: 2a·sin(m·30°).
                    let m = EdgeIndex::from_zero_based(i).separation(EdgeIndex::from_zero_based(j));
                    let exact = 2.0 * self.apothem() * (m as f64 * PI / 6.0).sin();
                    debug_assert!((exact - mids[i].distance(mids[j])).abs() < 1e-9);
                    exact
                };
            }
        }
        u
    }

    /// Midpoint-to-midpoint distances, with U-turns priced at four edge lengths.
    pub fn unimpeded_cost_matrix(&self, cell: CellCoord) -> Result<CostMatrix> {
        self.require(cell)?;
        Ok(self.unimpeded)
    }

    /// Every outward-facing edge, walked clockwise around the perimeter
    /// starting from the smallest `EdgeRef`.
    pub fn boundary_edges(&self) -> &[EdgeRef] {
        &self.boundary
    }

    pub fn is_boundary(&self, e: EdgeRef) -> bool {
        self.perimeter_pos.contains_key(&e)
    }

    /// True when two boundary edges share a vertex along the perimeter.
    pub fn perimeter_adjacent(&self, a: EdgeRef, b: EdgeRef) -> bool {
        match (self.perimeter_pos.get(&a), self.perimeter_pos.get(&b)) {
            (Some(&i), Some(&j)) => {
                let n = self.boundary.len();
                (i + 1) % n == j || (j + 1) % n == i
            }
            _ => false,
        }
    }

    fn walk_perimeter(&self) -> Vec<EdgeRef> {
        let key = |p: Point| ((p.x * 1e6).round() as i64, (p.y * 1e6).round() as i64);

        let mut outward = Vec::new();
        for &c in &self.cells {
            for e in EdgeIndex::ALL {
                if !self.contains(c.neighbor(e)) {
                    outward.push(EdgeRef::new(c, e));
                }
            }
        }
        if outward.is_empty() {
            return outward;
        }

        let mut by_ccw_end: HashMap<(i64, i64), EdgeRef> = HashMap::new();
        for &e in &outward {
            let (ccw, _) = self.edge_endpoints(e);
            by_ccw_end.insert(key(ccw), e);
        }

        let start = *outward.iter().min().expect("non-empty");
        let mut order = Vec::with_capacity(outward.len());
        let mut cur = start;
        loop {
            order.push(cur);
            let (_, cw) = self.edge_endpoints(cur);
            cur = by_ccw_end[&key(cw)];
            if cur == start {
                break;
            }
        }
        debug_assert_eq!(order.len(), outward.len());
        order
    }
}
