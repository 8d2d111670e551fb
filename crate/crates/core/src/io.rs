//! Text formats: path data, move files and dumps.
//!
//! Path data has one path per line, `T` states separated by commas or
//! whitespace. In aggregated form the last field is a positive count,
//! e.g. `1 1 2 2,3`. Lines starting with `#` are comments; a comment of the
//! form `# states: S` fixes the state count. Move files follow the 4ti2
//! matrix layout: a header `R C` then `R` rows of `C = S^T` integers in
//! lexicographic path order.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::fiber::Fiber;
use crate::moves::Move;
use crate::path::{format_states, Shape, MAX_STATES};
use crate::table::PathTable;

/// How path lines are laid out.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum PathFormat {
    /// One path per line.
    #[default]
    Plain,
    /// Path followed by a count.
    Aggregated,
}

/// Dimensions that override what the data implies.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct ShapeHint {
    pub states: Option<usize>,
    pub length: Option<usize>,
}

fn parse_err(line: usize, message: impl Into<String>) -> Error {
    Error::Parse { line, message: message.into() }
}

fn fields(line: &str) -> impl Iterator<Item = &str> {
    line.split(|c: char| c == ',' || c.is_whitespace()).filter(|f| !f.is_empty())
}

fn states_directive(line: &str) -> Option<&str> {
    line.trim_start_matches('#').trim().strip_prefix("states:").map(str::trim)
}

/// Parses path data. `S` comes from the hint, a `# states:` line, or the
/// largest state seen; `T` from the hint or the line length.
pub fn parse_paths(text: &str, format: PathFormat, hint: ShapeHint) -> Result<PathTable> {
    let mut declared = hint.states;
    let mut rows: Vec<(usize, Vec<usize>, u64)> = Vec::new();
    for (k, raw) in text.lines().enumerate() {
        let line_no = k + 1;
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        if line.starts_with('#') {
            if let (None, Some(v)) = (hint.states, states_directive(line)) {
                let s = v
                    .parse::<usize>()
                    .map_err(|_| parse_err(line_no, format!("bad states directive {v:?}")))?;
                declared = Some(s);
            }
            continue;
        }
        let mut values = Vec::new();
        for f in fields(line) {
            let v = f
                .parse::<u64>()
                .map_err(|_| parse_err(line_no, format!("not a nonnegative integer: {f:?}")))?;
            values.push(v);
        }
        let count = match format {
            PathFormat::Plain => 1,
            PathFormat::Aggregated => {
                let c = values
                    .pop()
                    .ok_or_else(|| parse_err(line_no, "missing count"))?;
                if c == 0 {
                    return Err(parse_err(line_no, "count must be positive"));
                }
                c
            }
        };
        let mut states = Vec::with_capacity(values.len());
        for v in values {
            if v == 0 || v > MAX_STATES as u64 {
                return Err(parse_err(line_no, format!("state {v} outside 1..={MAX_STATES}")));
            }
            states.push(v as usize);
        }
        if let Some(first) = rows.first() {
            if states.len() != first.1.len() {
                return Err(parse_err(
                    line_no,
                    format!("path has {} states, expected {}", states.len(), first.1.len()),
                ));
            }
        }
        rows.push((line_no, states, count));
    }
    if rows.is_empty() {
        return Err(parse_err(0, "no paths in input"));
    }
    let observed_len = rows[0].1.len();
    let length = hint.length.unwrap_or(observed_len);
    if length != observed_len {
        return Err(parse_err(
            rows[0].0,
            format!("paths have length {observed_len} but T = {length} was requested"),
        ));
    }
    let max_state = rows.iter().flat_map(|r| r.1.iter().copied()).max().unwrap_or(1);
    let states = declared.unwrap_or(max_state.max(2));
    let shape = Shape::new(states, length).map_err(|e| parse_err(rows[0].0, e.to_string()))?;
    let mut table = PathTable::new(shape);
    for (line_no, path, count) in rows {
        if let Some(bad) = path.iter().find(|&&s| s > states) {
            return Err(parse_err(line_no, format!("state {bad} exceeds S = {states}")));
        }
        let p: Vec<u8> = path.iter().map(|&s| s as u8).collect();
        table
            .add_index(shape.encode(&p), count)
            .map_err(|e| parse_err(line_no, e.to_string()))?;
    }
    Ok(table)
}

/// Writes path data with a leading `# states:` line. The aggregated form
/// lists each distinct path once, in lexicographic order.
pub fn write_paths(table: &PathTable, format: PathFormat) -> String {
    let shape = table.shape();
    let mut out = format!("# states: {}\n", shape.states());
    for (index, count) in table.iter() {
        let states = shape.decode(index);
        match format {
            PathFormat::Plain => {
                let line = format_states(&states, ",");
                for _ in 0..count {
                    let _ = writeln!(out, "{line}");
                }
            }
            PathFormat::Aggregated => {
                let _ = writeln!(out, "{},{count}", format_states(&states, " "));
            }
        }
    }
    out
}

/// Parses a move file for `shape`.
pub fn parse_moves(text: &str, shape: Shape) -> Result<Vec<Move>> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(k, l)| (k + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
    let (hline, header) = lines.next().ok_or_else(|| parse_err(0, "empty move file"))?;
    let dims: Vec<&str> = header.split_whitespace().collect();
    if dims.len() != 2 {
        return Err(parse_err(hline, "header must be \"R C\""));
    }
    let rows: usize = dims[0].parse().map_err(|_| parse_err(hline, "bad row count"))?;
    let cols: u64 = dims[1].parse().map_err(|_| parse_err(hline, "bad column count"))?;
    if cols != shape.cells() {
        return Err(parse_err(
            hline,
            format!("{cols} columns but S^T = {} for {shape}", shape.cells()),
        ));
    }
    let mut moves = Vec::with_capacity(rows);
    let mut values: Vec<i64> = Vec::with_capacity(cols as usize);
    let mut start_line = hline;
    for (line_no, line) in lines {
        if values.is_empty() {
            start_line = line_no;
        }
        for f in line.split_whitespace() {
            let v = f
                .parse::<i64>()
                .map_err(|_| parse_err(line_no, format!("not an integer: {f:?}")))?;
            values.push(v);
        }
        if values.len() as u64 > cols {
            return Err(parse_err(line_no, format!("row longer than {cols} entries")));
        }
        if values.len() as u64 == cols {
            let entries = values.iter().enumerate().map(|(i, &v)| (i as u64, v));
            moves.push(Move::from_entries(shape, entries).map_err(|e| parse_err(start_line, e.to_string()))?);
            values.clear();
        }
    }
    if !values.is_empty() {
        return Err(parse_err(start_line, "incomplete final row"));
    }
    if moves.len() != rows {
        return Err(parse_err(hline, format!("header says {rows} moves, found {}", moves.len())));
    }
    Ok(moves)
}

/// Writes moves as a dense 4ti2-style matrix.
pub fn write_moves(moves: &[Move], shape: Shape) -> String {
    let mut out = format!("{} {}\n", moves.len(), shape.cells());
    for mv in moves {
        let row: Vec<String> = mv.dense_row().iter().map(i64::to_string).collect();
        let _ = writeln!(out, "{}", row.join(" "));
    }
    out
}

/// One line per fiber member: entries `s1 s2 .. sT,count` joined by `;`.
pub fn write_fiber(fiber: &Fiber) -> String {
    let shape = fiber.shape();
    let mut out = format!("# fiber of {} with {} members\n", fiber.statistic(), fiber.len());
    for table in fiber.tables() {
        let entries: Vec<String> = table
            .iter()
            .map(|(i, c)| format!("{},{c}", format_states(&shape.decode(i), " ")))
            .collect();
        let _ = writeln!(out, "{}", entries.join(";"));
    }
    out
}
