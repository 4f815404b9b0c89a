//! Frame writers: CSV and legacy VTK structured points.

use crate::grid::{Grid, GridState};
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum OutputError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("{path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },
    #[error("{path}: {msg}")]
    Format { path: PathBuf, msg: String },
    #[error("unknown format '{0}' (expected csv or vtk)")]
    UnknownFormat(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FrameFormat {
    Csv,
    Vtk,
}

impl FrameFormat {
    pub fn extension(&self) -> &'static str {
        match self {
            Self::Csv => "csv",
            Self::Vtk => "vtk",
        }
    }
}

impl FromStr for FrameFormat {
    type Err = OutputError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "csv" => Ok(Self::Csv),
            "vtk" | "vtk-structured" => Ok(Self::Vtk),
            _ => Err(OutputError::UnknownFormat(s.to_string())),
        }
    }
}

fn io_err(path: &Path) -> impl FnOnce(io::Error) -> OutputError + '_ {
    move |source| OutputError::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn csv_err(path: &Path) -> impl FnOnce(csv::Error) -> OutputError + '_ {
    move |source| OutputError::Csv {
        path: path.to_path_buf(),
        source,
    }
}

/// 17 significant digits, enough to round-trip any `f64`.
fn num(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn csv_header(grid: &Grid) -> Vec<&'static str> {
    if grid.dim() == 2 {
        vec!["x", "y", "rho", "q1", "q2", "Z", "rho_star"]
    } else {
        vec!["x", "rho", "q1", "Z", "rho_star"]
    }
}

pub fn write_frame(state: &GridState, grid: &Grid, path: &Path, format: FrameFormat) -> Result<(), OutputError> {
    if state.len() != grid.n_cells() {
        return Err(OutputError::Format {
            path: path.to_path_buf(),
            msg: format!("state has {} cells, grid has {}", state.len(), grid.n_cells()),
        });
    }
    match format {
        FrameFormat::Csv => write_csv(state, grid, path),
        FrameFormat::Vtk => write_vtk(state, grid, path).map_err(io_err(path)),
    }
}

fn write_csv(state: &GridState, grid: &Grid, path: &Path) -> Result<(), OutputError> {
    let mut w = csv::Writer::from_path(path).map_err(csv_err(path))?;
    w.write_record(csv_header(grid)).map_err(csv_err(path))?;
    for j in 0..grid.ny() {
        for i in 0..grid.nx() {
            let k = grid.idx(i, j);
            let row = if grid.dim() == 2 {
                vec![
                    num(grid.x_center(i)),
                    num(grid.y_center(j)),
                    num(state.rho[k]),
                    num(state.q1[k]),
                    num(state.q2[k]),
                    num(state.z[k]),
                    num(state.rho_star[k]),
                ]
            } else {
                vec![
                    num(grid.x_center(i)),
                    num(state.rho[k]),
                    num(state.q1[k]),
                    num(state.z[k]),
                    num(state.rho_star[k]),
                ]
            };
            w.write_record(&row).map_err(csv_err(path))?;
        }
    }
    w.flush().map_err(io_err(path))
}

fn write_vtk(state: &GridState, grid: &Grid, path: &Path) -> io::Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    let (nx, ny) = (grid.nx(), grid.ny());
    let dy = if grid.dim() == 2 { grid.dy() } else { 1.0 };
    writeln!(w, "# vtk DataFile Version 3.0")?;
    writeln!(w, "congestion frame t={}", num(state.time))?;
    writeln!(w, "ASCII")?;
    writeln!(w, "DATASET STRUCTURED_POINTS")?;
    writeln!(w, "DIMENSIONS {nx} {ny} 1")?;
    writeln!(w, "ORIGIN {} {} 0", num(0.5 * grid.dx()), num(0.5 * dy))?;
    writeln!(w, "SPACING {} {} 1", num(grid.dx()), num(dy))?;
    writeln!(w, "POINT_DATA {}", nx * ny)?;
    let speed: Vec<f64> = (0..state.len())
        .map(|k| {
            if state.rho[k] > 0.0 {
                state.q1[k].hypot(state.q2[k]) / state.rho[k]
            } else {
                0.0
            }
        })
        .collect();
    let fields: [(&str, &[f64]); 6] = [
        ("rho", &state.rho),
        ("q1", &state.q1),
        ("q2", &state.q2),
        ("Z", &state.z),
        ("rho_star", &state.rho_star),
        ("speed", &speed),
    ];
    for (name, f) in fields {
        writeln!(w, "SCALARS {name} double 1")?;
        writeln!(w, "LOOKUP_TABLE default")?;
        // Storage order is already x-fastest.
        for v in f {
            writeln!(w, "{}", num(*v))?;
        }
    }
    w.flush()
}

/// Reads a CSV frame written by [`write_frame`] for `grid`. The time stamp
/// is not stored and comes back as zero.
pub fn read_csv_frame(grid: &Grid, path: &Path) -> Result<GridState, OutputError> {
    let bad = |msg: String| OutputError::Format {
        path: path.to_path_buf(),
        msg,
    };
    let mut r = csv::Reader::from_path(path).map_err(csv_err(path))?;
    let header: Vec<String> = r.headers().map_err(csv_err(path))?.iter().map(str::to_string).collect();
    if header != csv_header(grid) {
        return Err(bad(format!("unexpected header {header:?}")));
    }
    let n = grid.n_cells();
    let mut s = GridState::uniform(grid, 0.0, [0.0, 0.0], 1.0);
    let off = grid.dim();
    let mut k = 0;
    for rec in r.records() {
        let rec = rec.map_err(csv_err(path))?;
        if k >= n {
            return Err(bad(format!("more than {n} rows")));
        }
        let vals = rec
            .iter()
            .map(|v| v.trim().parse::<f64>())
            .collect::<Result<Vec<_>, _>>()
            .map_err(|e| bad(format!("row {}: {e}", k + 1)))?;
        s.rho[k] = vals[off];
        s.q1[k] = vals[off + 1];
        if off == 2 {
            s.q2[k] = vals[off + 2];
        }
        s.z[k] = vals[vals.len() - 2];
        s.rho_star[k] = vals[vals.len() - 1];
        k += 1;
    }
    if k != n {
        return Err(bad(format!("{k} rows, expected {n}")));
    }
    s.time = 0.0;
    Ok(s)
}
