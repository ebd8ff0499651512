//! Traffic-following flight planning on a hexagonal airspace grid.
//!
//! Aircraft plan least-cost routes over cell edges, where a cell's cost of
//! entering by one edge and leaving by another is its straight-line length
//! plus `1 - k_t * T / s`: crossings used often by earlier traffic become
//! cheaper. [`sim`] flies many aircraft through the grid with one aircraft
//! per cell, [`entropy`] measures how organized the resulting flow is, and
//! [`harness`] runs replicated studies and writes the tables.

pub mod adaptive;
pub mod config;
pub mod cost_model;
pub mod entropy;
pub mod error;
pub mod harness;
pub mod hexgeom;
pub mod pattern_map;
pub mod planner;
pub mod sim;
pub mod stats;
