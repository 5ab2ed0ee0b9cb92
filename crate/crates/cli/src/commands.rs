//! The four subcommands and their artifacts.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use dsflow_core::flow::{
    run_with_observer, BoundChecks, FlowError, MonitorRecord, RunSummary, Termination,
};
use dsflow_core::geometry::{identity_residuals, validate_hypersurface, RadialGraph};
use dsflow_core::quermass::{quermass_all, slice_table, xi, QuermassError};
use dsflow_core::snapshot::{read_snapshot, write_snapshot, SnapshotError};
use serde::Serialize;
use thiserror::Error;

use crate::config::{ConfigError, RunConfig};

/// Failures mapped to process exit codes.
#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("snapshot {path}: {source}")]
    Snapshot {
        path: PathBuf,
        source: SnapshotError,
    },
    #[error("{0}")]
    Usage(String),
    #[error("validation failed: {0}")]
    Validation(String),
    #[error("flow aborted: {0}")]
    Aborted(String),
    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) | CliError::Snapshot { .. } | CliError::Usage(_) => 2,
            CliError::Validation(_) => 3,
            CliError::Aborted(_) | CliError::Io { .. } => 4,
        }
    }

    /// Short machine-readable tag.
    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Config(_) => "config",
            CliError::Snapshot { .. } => "snapshot",
            CliError::Usage(_) => "usage",
            CliError::Validation(_) => "validation",
            CliError::Aborted(_) => "aborted",
            CliError::Io { .. } => "io",
        }
    }
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> CliError + '_ {
    move |source| CliError::Io {
        path: path.to_path_buf(),
        source,
    }
}

/// Column names of `monitors.csv` for dimension `n`.
pub fn monitor_header(n: usize) -> String {
    let mut cols = vec!["t".to_string(), "dt".to_string()];
    cols.extend((-1..=n as isize).map(|m| format!("A_{m}")));
    cols.extend(
        [
            "min_rho",
            "max_rho",
            "max_u",
            "min_F",
            "max_F",
            "max_kappa",
            "hm_residual_1",
            "gap",
        ]
        .iter()
        .map(|s| s.to_string()),
    );
    cols.join(",")
}

pub fn monitor_row(r: &MonitorRecord) -> String {
    let mut vals = vec![r.t, r.dt];
    vals.extend(&r.a);
    vals.extend([
        r.min_rho,
        r.max_rho,
        r.max_u,
        r.min_f,
        r.max_f,
        r.max_kappa,
        r.hm_residual_1,
        r.gap,
    ]);
    vals.iter()
        .map(|v| format!("{v:e}"))
        .collect::<Vec<_>>()
        .join(",")
}

/// Contents of `summary.json`.
#[derive(Debug, Serialize)]
pub struct RunReport {
    pub termination: Termination,
    pub r_infinity: Option<f64>,
    pub steps: usize,
    pub t: f64,
    pub wall_time_s: f64,
    pub n: usize,
    pub k: usize,
    pub rho0: String,
    pub bounds_passed: bool,
    pub bounds: BoundChecks,
}

/// Records between periodic snapshots.
pub const SNAPSHOT_EVERY: usize = 10;

pub fn run(cfg: &RunConfig) -> Result<RunReport, CliError> {
    let rho0 = cfg.initial_graph()?;
    let out = &cfg.out;
    let snaps = out.join("snapshots");
    fs::create_dir_all(&snaps).map_err(io_err(&snaps))?;
    let csv_path = out.join("monitors.csv");
    let mut csv = BufWriter::new(File::create(&csv_path).map_err(io_err(&csv_path))?);
    writeln!(csv, "{}", monitor_header(cfg.flow.n)).map_err(io_err(&csv_path))?;

    let mut io_failure: Option<CliError> = None;
    let mut count = 0usize;
    let start = Instant::now();
    let result = run_with_observer(&cfg.flow, rho0, |state, rec| {
        if io_failure.is_some() {
            return;
        }
        let mut write = || -> Result<(), CliError> {
            writeln!(csv, "{}", monitor_row(rec)).map_err(io_err(&csv_path))?;
            if count.is_multiple_of(SNAPSHOT_EVERY) {
                let p = snaps.join(format!("step_{:09}.dsf", state.steps));
                fs::write(&p, write_snapshot(&state.graph)).map_err(io_err(&p))?;
            }
            Ok(())
        };
        if let Err(e) = write() {
            io_failure = Some(e);
        }
        count += 1;
    });
    let wall = start.elapsed().as_secs_f64();
    if let Some(e) = io_failure {
        return Err(e);
    }
    csv.flush().map_err(io_err(&csv_path))?;
    let output = match result {
        Ok(o) => o,
        Err(FlowError::Precondition(msg)) => return Err(CliError::Validation(msg)),
        Err(FlowError::Config(msg)) => {
            return Err(ConfigError::Value {
                key: "flow".into(),
                msg,
            }
            .into())
        }
        Err(FlowError::Geometry(e)) => return Err(CliError::Validation(e.to_string())),
        Err(e) => return Err(CliError::Aborted(e.to_string())),
    };
    let final_path = out.join("final.dsf");
    fs::write(&final_path, write_snapshot(&output.final_state.graph))
        .map_err(io_err(&final_path))?;

    let RunSummary {
        termination,
        r_infinity,
        steps,
        t,
    } = output.summary;
    let report = RunReport {
        termination,
        r_infinity,
        steps,
        t,
        wall_time_s: wall,
        n: cfg.flow.n,
        k: cfg.flow.k,
        rho0: cfg.rho0.source().to_string(),
        bounds_passed: output.bounds.passed(),
        bounds: output.bounds,
    };
    let json_path = out.join("summary.json");
    let json = serde_json::to_string_pretty(&report).expect("summary serializes");
    fs::write(&json_path, json + "\n").map_err(io_err(&json_path))?;
    Ok(report)
}

/// One line of the `check` table.
#[derive(Debug, Clone, PartialEq)]
pub struct CheckRow {
    pub name: String,
    pub value: f64,
    pub tolerance: f64,
}

impl CheckRow {
    pub fn passed(&self) -> bool {
        self.value.abs() <= self.tolerance
    }
}

/// Residual tolerances are `CHECK_FACTOR h^2` with `h` the polar spacing.
pub const CHECK_FACTOR: f64 = 10.0;

/// Identity residuals of the initial hypersurface, normalized to be
/// dimensionless. Fails with a validation error if the surface is not
/// spacelike.
pub fn check(cfg: &RunConfig) -> Result<Vec<CheckRow>, CliError> {
    let m = cfg.initial_graph()?;
    let n = m.n();
    let v = validate_hypersurface(&m, cfg.flow.k);
    if !v.spacelike {
        return Err(CliError::Validation(format!(
            "not spacelike: min w^2 = {:e} at node {:?}",
            v.min_w2, v.first_failure
        )));
    }
    let h = cfg.grid.spacing();
    let tol = CHECK_FACTOR * h * h;
    let ids = identity_residuals(&m).map_err(|e| CliError::Validation(e.to_string()))?;
    let q = quermass_all(&m).map_err(|e| CliError::Validation(e.to_string()))?;
    let area = q.area();
    let scale = max_support(&m);
    let mut rows = vec![
        CheckRow {
            name: "gradient identity / max u".into(),
            value: ids.gradient / scale,
            tolerance: tol,
        },
        CheckRow {
            name: "integrated traced Hessian identity / A_0".into(),
            value: ids.traced_hessian_integral / area,
            tolerance: tol,
        },
    ];
    for (j, r) in q.hm_residual.iter().enumerate() {
        rows.push(CheckRow {
            name: format!("Hsiung-Minkowski m={j} / A_0"),
            value: r / area,
            tolerance: tol,
        });
    }
    if n == 2 {
        let four_pi = 4.0 * std::f64::consts::PI;
        rows.push(CheckRow {
            name: "Gauss-Bonnet (A_2 + 4 pi) / 4 pi".into(),
            value: (q.get(2) + four_pi) / four_pi,
            tolerance: tol,
        });
    }
    rows.push(CheckRow {
        name: format!("strict {}-convexity (1 = fails)", v.k),
        value: if v.strictly_convex { 0.0 } else { 1.0 },
        tolerance: 0.0,
    });
    Ok(rows)
}

fn max_support(m: &RadialGraph) -> f64 {
    dsflow_core::geometry::geometry_field(m)
        .map(|pts| pts.iter().fold(1.0_f64, |a, p| a.max(p.u)))
        .unwrap_or(1.0)
}

pub fn format_check(rows: &[CheckRow]) -> String {
    let width = rows.iter().map(|r| r.name.len()).max().unwrap_or(0);
    let mut s = format!(
        "{:width$}  {:>12}  {:>12}  status\n",
        "residual", "value", "tolerance"
    );
    for r in rows {
        let status = if r.passed() { "ok" } else { "FAIL" };
        s += &format!(
            "{:width$}  {:>12.3e}  {:>12.3e}  {status}\n",
            r.name, r.value, r.tolerance
        );
    }
    s
}

pub fn slice_table_csv(n: usize, r_min: f64, r_max: f64, steps: usize) -> Result<String, CliError> {
    if n < 2 {
        return Err(CliError::Usage(format!("--n must be at least 2, got {n}")));
    }
    if !(r_min >= 0.0 && r_max > r_min && r_max.is_finite()) {
        return Err(CliError::Usage(format!(
            "need 0 <= r-min < r-max, got [{r_min}, {r_max}]"
        )));
    }
    if steps == 0 {
        return Err(CliError::Usage("--steps must be positive".into()));
    }
    let rows = slice_table(n, r_min, r_max, steps).map_err(|e| CliError::Usage(e.to_string()))?;
    let mut cols = vec!["r".to_string()];
    cols.extend((0..=n).map(|m| format!("A{m}")));
    cols.push("xi_gap".into());
    let mut out = cols.join(",") + "\n";
    for row in rows {
        let mut vals = vec![row.r];
        vals.extend(&row.a);
        vals.push(row.xi_gap);
        out += &(vals
            .iter()
            .map(|v| format!("{v:e}"))
            .collect::<Vec<_>>()
            .join(",")
            + "\n");
    }
    Ok(out)
}

/// `A_0`, `A_2`, `xi(A_0)` and the gap of a stored hypersurface.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct InequalityReport {
    pub a0: f64,
    pub a2: f64,
    pub xi: f64,
    pub gap: f64,
}

pub fn inequality(path: &Path) -> Result<InequalityReport, CliError> {
    let text = fs::read_to_string(path).map_err(io_err(path))?;
    let m = read_snapshot(&text).map_err(|source| CliError::Snapshot {
        path: path.to_path_buf(),
        source,
    })?;
    let q = quermass_all(&m).map_err(|e| CliError::Validation(e.to_string()))?;
    let (a0, a2) = (q.area(), q.get(2));
    let x = xi(a0, m.n()).map_err(|e: QuermassError| CliError::Validation(e.to_string()))?;
    Ok(InequalityReport {
        a0,
        a2,
        xi: x,
        gap: x - a2,
    })
}
