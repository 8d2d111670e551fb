//! Bundled data sets.

use crate::io::{parse_paths, PathFormat, ShapeHint};
use crate::table::PathTable;

/// Aggregated path data of the three-year, three-state panel (`N = 120`).
pub const PANEL_TABLE: &str = include_str!("../data/table1.csv");

/// The bundled panel as a table with `S = 3`, `T = 3`.
pub fn panel_table() -> PathTable {
    parse_paths(PANEL_TABLE, PathFormat::Aggregated, ShapeHint::default()).expect("bundled data parses")
}
