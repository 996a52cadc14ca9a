//! CSV output with a `#`-prefixed metadata preamble.
//!
//! Floats are written with 17 significant digits so every value round-trips exactly.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::lattice::ModelParams;
use crate::measures::{LogBase, Measure};
use crate::sweep::{SweepKind, SweepResult, UniformAxis};

#[derive(Debug, Error)]
pub enum TableError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },
}

pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn params_preamble(p: &ModelParams) -> Vec<String> {
    vec![
        format!("N = {}", p.n),
        format!("gamma = {}", fmt_f64(p.gamma)),
        format!("J0 = {}", fmt_f64(p.j0)),
        format!("J1 = {}", fmt_f64(p.j1)),
        format!("h0 = {}", fmt_f64(p.h0)),
        format!("h1 = {}", fmt_f64(p.h1)),
        format!("T = {}", fmt_f64(p.temperature)),
    ]
}

pub fn axis_line(name: &str, a: &UniformAxis) -> String {
    format!("{name} = {}, {}, {}", fmt_f64(a.min), fmt_f64(a.max), a.n)
}

/// Metadata lines (without the leading `# `) describing a sweep.
pub fn sweep_preamble(
    kind: SweepKind,
    params: &ModelParams,
    t_axis: &UniformAxis,
    h1_axis: Option<&UniformAxis>,
    log_base: LogBase,
    version: &str,
    grid_hash: &str,
) -> Vec<String> {
    let mut lines = vec![
        format!("xyquench {version}"),
        format!(
            "kind = {}",
            match kind {
                SweepKind::Series => "series",
                SweepKind::FieldMap => "map",
            }
        ),
    ];
    lines.extend(params_preamble(params));
    lines.push(axis_line("t_axis", t_axis));
    if let Some(h) = h1_axis {
        lines.push(axis_line("h1_axis", h));
    }
    lines.push(format!(
        "log_base = {}",
        match log_base {
            LogBase::Two => "2",
            LogBase::E => "e",
        }
    ));
    lines.push(format!("grid_hash = {grid_hash}"));
    lines
}

pub fn sweep_header(has_h1: bool, measures: &[Measure]) -> Vec<String> {
    let mut cols = Vec::new();
    if has_h1 {
        cols.push("h1".to_string());
    }
    cols.push("t".to_string());
    cols.extend(measures.iter().map(|m| m.label().to_string()));
    cols
}

/// Row-by-row writer; the preamble and header are written on creation.
pub struct TableWriter {
    path: PathBuf,
    out: BufWriter<File>,
}

impl TableWriter {
    pub fn create(path: &Path, preamble: &[String], header: &[String]) -> Result<Self, TableError> {
        let io = |source| TableError::Io {
            path: path.to_path_buf(),
            source,
        };
        let file = File::create(path).map_err(io)?;
        let mut w = TableWriter {
            path: path.to_path_buf(),
            out: BufWriter::new(file),
        };
        let mut head = String::new();
        for line in preamble {
            head.push_str("# ");
            head.push_str(line);
            head.push('\n');
        }
        head.push_str(&header.join(","));
        head.push('\n');
        w.out.write_all(head.as_bytes()).map_err(io)?;
        Ok(w)
    }

    pub fn write_row(&mut self, values: &[f64]) -> Result<(), TableError> {
        let mut line = values
            .iter()
            .map(|&x| fmt_f64(x))
            .collect::<Vec<_>>()
            .join(",");
        line.push('\n');
        self.out
            .write_all(line.as_bytes())
            .map_err(|source| TableError::Io {
                path: self.path.clone(),
                source,
            })
    }

    pub fn finish(mut self) -> Result<(), TableError> {
        self.out.flush().map_err(|source| TableError::Io {
            path: self.path.clone(),
            source,
        })
    }
}

/// Writes a sweep result: preamble, header, then one row per cell (h1 outer, t inner).
pub fn write_table(result: &SweepResult, path: &Path) -> Result<(), TableError> {
    let preamble = sweep_preamble(
        result.kind,
        &result.params,
        &result.t_axis,
        result.h1_axis.as_ref(),
        result.log_base,
        result.version,
        &result.grid_hash,
    );
    let header = sweep_header(result.h1_axis.is_some(), &result.measures);
    let mut w = TableWriter::create(path, &preamble, &header)?;
    for row in 0..result.n_rows() {
        let h1 = result.h1_axis.map(|a| a.value(row));
        for (i, cell) in result.row(row).iter().enumerate() {
            let mut values = Vec::with_capacity(header.len());
            values.extend(h1);
            values.push(result.t_axis.value(i));
            values.extend(result.measures.iter().map(|&m| cell.get(m)));
            w.write_row(&values)?;
        }
    }
    w.finish()
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub preamble: Vec<String>,
    pub header: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let i = self.header.iter().position(|h| h == name)?;
        Some(self.rows.iter().map(|r| r[i]).collect())
    }
}

pub fn read_table(path: &Path) -> Result<Table, TableError> {
    let io = |source| TableError::Io {
        path: path.to_path_buf(),
        source,
    };
    let reader = BufReader::new(File::open(path).map_err(io)?);
    let mut preamble = Vec::new();
    let mut header = Vec::new();
    let mut rows = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line.map_err(io)?;
        if let Some(rest) = line.strip_prefix('#') {
            preamble.push(rest.trim_start().to_string());
        } else if header.is_empty() {
            header = line.split(',').map(str::to_string).collect();
        } else {
            let row = line
                .split(',')
                .map(|s| s.parse::<f64>())
                .collect::<Result<Vec<_>, _>>()
                .map_err(|e| TableError::Parse {
                    path: path.to_path_buf(),
                    line: i + 1,
                    message: e.to_string(),
                })?;
            if row.len() != header.len() {
                return Err(TableError::Parse {
                    path: path.to_path_buf(),
                    line: i + 1,
                    message: format!("expected {} columns, found {}", header.len(), row.len()),
                });
            }
            rows.push(row);
        }
    }
    Ok(Table {
        preamble,
        header,
        rows,
    })
}
