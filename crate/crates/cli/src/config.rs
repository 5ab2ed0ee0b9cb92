//! `key = value` run configuration.
//!
//! ```text
//! # comment
//! n = 3
//! k = 2
//! grid = axisym        # or latlong (n = 2 only)
//! m = 401              # axisym nodes
//! ntheta = 64          # latlong rows
//! nphi = 128           # latlong columns
//! rho0 = "1.0+0.1*cos(2*theta)"
//! cfl = 0.25
//! t_max = 50
//! conv_tol = 1e-6
//! monitor_every = 100
//! max_steps = 50000000
//! scheme = rk4         # or euler
//! out = out
//! ```
//!
//! `n` and `rho0` are required.

use std::collections::HashSet;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use dsflow_core::flow::{FlowConfig, Scheme};
use dsflow_core::geometry::RadialGraph;
use dsflow_core::grids::Grid;
use thiserror::Error;

use crate::expr::{Expr, ExprError};

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("line {line}: {msg}")]
    Syntax { line: usize, msg: String },
    #[error("line {line}: unknown key '{key}'")]
    UnknownKey { line: usize, key: String },
    #[error("line {line}: duplicate key '{key}'")]
    Duplicate { line: usize, key: String },
    #[error("missing required key '{0}'")]
    Missing(&'static str),
    #[error("{key}: {msg}")]
    Value { key: String, msg: String },
    #[error("rho0, {0}")]
    Expr(#[from] ExprError),
}

const KEYS: &[&str] = &[
    "n",
    "k",
    "grid",
    "m",
    "ntheta",
    "nphi",
    "rho0",
    "cfl",
    "t_max",
    "conv_tol",
    "monitor_every",
    "max_steps",
    "scheme",
    "out",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GridSpec {
    Axisym { m: usize },
    LatLong { ntheta: usize, nphi: usize },
}

impl GridSpec {
    pub fn build(&self, n: usize) -> Result<Grid, ConfigError> {
        let grid = match *self {
            GridSpec::Axisym { m } => Grid::axisym(n, m),
            GridSpec::LatLong { ntheta, nphi } => Grid::latlong(ntheta, nphi),
        };
        grid.map_err(|e| ConfigError::Value {
            key: "grid".into(),
            msg: e.to_string(),
        })
    }

    /// Nominal polar spacing `pi / (m - 1)` or `pi / ntheta`.
    pub fn spacing(&self) -> f64 {
        match *self {
            GridSpec::Axisym { m } => std::f64::consts::PI / (m - 1) as f64,
            GridSpec::LatLong { ntheta, .. } => std::f64::consts::PI / ntheta as f64,
        }
    }
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub flow: FlowConfig,
    pub grid: GridSpec,
    pub rho0: Expr,
    pub out: PathBuf,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        text.parse()
    }

    /// Samples `rho0` on the configured grid.
    pub fn initial_graph(&self) -> Result<RadialGraph, ConfigError> {
        let grid = self.grid.build(self.flow.n)?;
        let bad = |msg: String| ConfigError::Value {
            key: "rho0".into(),
            msg,
        };
        let m = RadialGraph::from_fn(grid, |t, p| self.rho0.eval(t, p))
            .map_err(|e| bad(e.to_string()))?;
        if let Some(i) = m.rho().iter().position(|v| !v.is_finite()) {
            return Err(bad(format!("not finite at node {i}")));
        }
        Ok(m)
    }
}

fn parse_value<T: FromStr>(key: &str, v: &str) -> Result<T, ConfigError> {
    v.parse().map_err(|_| ConfigError::Value {
        key: key.into(),
        msg: format!("cannot parse '{v}'"),
    })
}

fn strip_comment(line: &str) -> &str {
    // '#' inside a quoted value is kept
    let mut quoted = false;
    for (i, c) in line.char_indices() {
        match c {
            '"' => quoted = !quoted,
            '#' if !quoted => return &line[..i],
            _ => {}
        }
    }
    line
}

impl FromStr for RunConfig {
    type Err = ConfigError;

    fn from_str(text: &str) -> Result<Self, Self::Err> {
        let mut seen = HashSet::new();
        let mut values: Vec<(&str, String)> = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let body = strip_comment(raw).trim();
            if body.is_empty() {
                continue;
            }
            let Some((key, value)) = body.split_once('=') else {
                return Err(ConfigError::Syntax {
                    line,
                    msg: format!("expected 'key = value', found '{body}'"),
                });
            };
            let key = key.trim();
            let Some(&key) = KEYS.iter().find(|k| **k == key) else {
                return Err(ConfigError::UnknownKey {
                    line,
                    key: key.to_string(),
                });
            };
            if !seen.insert(key) {
                return Err(ConfigError::Duplicate {
                    line,
                    key: key.to_string(),
                });
            }
            let mut value = value.trim();
            if value.len() >= 2 && value.starts_with('"') && value.ends_with('"') {
                value = &value[1..value.len() - 1];
            } else if value.contains('"') {
                return Err(ConfigError::Syntax {
                    line,
                    msg: format!("unbalanced quotes in '{value}'"),
                });
            }
            if value.is_empty() {
                return Err(ConfigError::Syntax {
                    line,
                    msg: format!("empty value for '{key}'"),
                });
            }
            values.push((key, value.to_string()));
        }
        let get = |key: &str| {
            values
                .iter()
                .find(|(k, _)| *k == key)
                .map(|(_, v)| v.as_str())
        };

        let n: usize = parse_value("n", get("n").ok_or(ConfigError::Missing("n"))?)?;
        let k: usize = get("k").map_or(Ok(2), |v| parse_value("k", v))?;
        let mut flow = FlowConfig::new(n, k);
        if let Some(v) = get("cfl") {
            flow.cfl = parse_value("cfl", v)?;
        }
        if let Some(v) = get("t_max") {
            flow.t_max = parse_value("t_max", v)?;
        }
        if let Some(v) = get("conv_tol") {
            flow.conv_tol = parse_value("conv_tol", v)?;
        }
        if let Some(v) = get("monitor_every") {
            flow.monitor_every = parse_value("monitor_every", v)?;
        }
        if let Some(v) = get("max_steps") {
            flow.max_steps = parse_value("max_steps", v)?;
        }
        if let Some(v) = get("scheme") {
            flow.scheme = v.parse::<Scheme>().map_err(|e| ConfigError::Value {
                key: "scheme".into(),
                msg: e.to_string(),
            })?;
        }
        flow.validate().map_err(|e| ConfigError::Value {
            key: "flow".into(),
            msg: e.to_string(),
        })?;

        let reject = |key: &str, grid: &str| -> Result<(), ConfigError> {
            match get(key) {
                Some(_) => Err(ConfigError::Value {
                    key: key.into(),
                    msg: format!("does not apply to grid = {grid}"),
                }),
                None => Ok(()),
            }
        };
        let grid = match get("grid").unwrap_or("axisym") {
            "axisym" => {
                reject("ntheta", "axisym")?;
                reject("nphi", "axisym")?;
                GridSpec::Axisym {
                    m: get("m").map_or(Ok(201), |v| parse_value("m", v))?,
                }
            }
            "latlong" => {
                reject("m", "latlong")?;
                if n != 2 {
                    return Err(ConfigError::Value {
                        key: "grid".into(),
                        msg: format!("latlong grids need n = 2, got n = {n}"),
                    });
                }
                GridSpec::LatLong {
                    ntheta: get("ntheta").map_or(Ok(64), |v| parse_value("ntheta", v))?,
                    nphi: get("nphi").map_or(Ok(128), |v| parse_value("nphi", v))?,
                }
            }
            other => {
                return Err(ConfigError::Value {
                    key: "grid".into(),
                    msg: format!("unknown grid '{other}' (axisym or latlong)"),
                })
            }
        };
        grid.build(n)?;

        let rho0 = Expr::parse(get("rho0").ok_or(ConfigError::Missing("rho0"))?)?;
        if matches!(grid, GridSpec::Axisym { .. }) && rho0.uses_phi() {
            return Err(ConfigError::Value {
                key: "rho0".into(),
                msg: "depends on phi but the grid is axisymmetric".into(),
            });
        }
        Ok(Self {
            flow,
            grid,
            rho0,
            out: PathBuf::from(get("out").unwrap_or("out")),
        })
    }
}
