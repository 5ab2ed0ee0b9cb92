//! Plain-text snapshots of a radial graph.
//!
//! ```text
//! DSFLOW v1
//! n=3 grid=axisym dims=201
//! 1.0000000000000000e0
//! ...
//! ```
//!
//! Values are written with 17 significant digits, so a round trip is exact.

use std::fmt::Write as _;

use thiserror::Error;

use crate::geometry::RadialGraph;
use crate::grids::{Grid, GridError};

pub const HEADER: &str = "DSFLOW v1";

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SnapshotError {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error(transparent)]
    Grid(#[from] GridError),
}

fn parse_err<T>(line: usize, msg: impl Into<String>) -> Result<T, SnapshotError> {
    Err(SnapshotError::Parse {
        line,
        msg: msg.into(),
    })
}

pub fn write_snapshot(m: &RadialGraph) -> String {
    let mut out = String::new();
    let (kind, dims) = match m.grid() {
        Grid::Axisym(g) => ("axisym", g.len().to_string()),
        Grid::LatLong(g) => ("latlong", format!("{},{}", g.ntheta(), g.nphi())),
    };
    let _ = writeln!(out, "{HEADER}");
    let _ = writeln!(out, "n={} grid={kind} dims={dims}", m.n());
    for v in m.rho() {
        let _ = writeln!(out, "{v:.16e}");
    }
    out
}

fn parse_usize(s: &str, line: usize, what: &str) -> Result<usize, SnapshotError> {
    s.parse()
        .or_else(|_| parse_err(line, format!("{what} '{s}' is not a non-negative integer")))
}

pub fn read_snapshot(text: &str) -> Result<RadialGraph, SnapshotError> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l.trim()));
    match lines.next() {
        Some((_, HEADER)) => {}
        Some((line, other)) => {
            return parse_err(line, format!("expected '{HEADER}', found '{other}'"))
        }
        None => return parse_err(1, "empty snapshot"),
    }
    let Some((line, meta)) = lines.next() else {
        return parse_err(2, "missing grid line");
    };
    let (mut n, mut kind, mut dims) = (None, None, None);
    for field in meta.split_whitespace() {
        match field.split_once('=') {
            Some(("n", v)) => n = Some(parse_usize(v, line, "n")?),
            Some(("grid", v)) => kind = Some(v),
            Some(("dims", v)) => dims = Some(v),
            _ => return parse_err(line, format!("unexpected field '{field}'")),
        }
    }
    let (Some(n), Some(kind), Some(dims)) = (n, kind, dims) else {
        return parse_err(line, "grid line needs n=, grid= and dims=");
    };
    let grid = match kind {
        "axisym" => Grid::axisym(n, parse_usize(dims, line, "dims")?),
        "latlong" => {
            if n != 2 {
                return parse_err(line, format!("latlong grids need n=2, got n={n}"));
            }
            let Some((a, b)) = dims.split_once(',') else {
                return parse_err(line, format!("latlong dims '{dims}' must be 'ntheta,nphi'"));
            };
            Grid::latlong(
                parse_usize(a, line, "ntheta")?,
                parse_usize(b, line, "nphi")?,
            )
        }
        other => return parse_err(line, format!("unknown grid '{other}'")),
    }
    .or_else(|e| parse_err(line, e.to_string()))?;

    let mut rho = Vec::with_capacity(grid.len());
    let mut last = line;
    for (line, text) in lines {
        last = line;
        for tok in text.split_whitespace() {
            match tok.parse::<f64>() {
                Ok(v) if v.is_finite() => rho.push(v),
                _ => return parse_err(line, format!("'{tok}' is not a finite number")),
            }
        }
    }
    if rho.len() != grid.len() {
        return parse_err(
            last,
            format!("expected {} values, found {}", grid.len(), rho.len()),
        );
    }
    Ok(RadialGraph::new(grid, rho)?)
}
