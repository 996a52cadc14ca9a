//! Parallel evaluation of measure grids: time series, (h1, t) field maps and
//! system-size families.
//!
//! Cells are pure functions of their coordinates and are assembled by grid index, so
//! the result does not depend on the number of worker threads.

use rayon::prelude::*;
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::correlators::{CorrelatorError, QuenchKernel};
use crate::lattice::{ModelParams, ParamError};
use crate::measures::{measure_set, LogBase, Measure, MeasureError, MeasureSet};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Error)]
pub enum SweepError {
    #[error("invalid grid: {0}")]
    Grid(String),
    #[error(transparent)]
    Param(#[from] ParamError),
    #[error(transparent)]
    Correlator(#[from] CorrelatorError),
    #[error("cell at {coord} failed: {source}")]
    Cell { coord: String, source: MeasureError },
    #[error("output sink failed: {0}")]
    Sink(String),
}

/// Uniform grid min, min + Δ, …, max with n ≥ 2 points.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UniformAxis {
    pub min: f64,
    pub max: f64,
    pub n: usize,
}

impl UniformAxis {
    pub fn new(min: f64, max: f64, n: usize) -> Result<Self, SweepError> {
        if n < 2 {
            return Err(SweepError::Grid(format!(
                "axis needs at least 2 points (got {n})"
            )));
        }
        if !(min.is_finite() && max.is_finite()) || max <= min {
            return Err(SweepError::Grid(format!(
                "axis bounds must satisfy min < max (got {min}, {max})"
            )));
        }
        Ok(UniformAxis { min, max, n })
    }

    /// Smallest uniform grid on [min, max] whose spacing does not exceed `step`.
    pub fn with_max_step(min: f64, max: f64, step: f64) -> Result<Self, SweepError> {
        if !(step > 0.0) {
            return Err(SweepError::Grid(format!(
                "step must be positive (got {step})"
            )));
        }
        let intervals = ((max - min) / step - 1e-9).ceil().max(1.0) as usize;
        Self::new(min, max, intervals + 1)
    }

    pub fn step(&self) -> f64 {
        (self.max - self.min) / (self.n - 1) as f64
    }

    pub fn value(&self, i: usize) -> f64 {
        if i + 1 == self.n {
            self.max
        } else {
            self.min + i as f64 * self.step()
        }
    }

    pub fn values(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.value(i)).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepKind {
    Series,
    FieldMap,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub kind: SweepKind,
    pub params: ModelParams,
    pub t_axis: UniformAxis,
    pub h1_axis: Option<UniformAxis>,
    pub measures: Vec<Measure>,
    pub log_base: LogBase,
    /// Row-major: h1 outer, t inner.
    pub cells: Vec<MeasureSet>,
    pub version: &'static str,
    pub grid_hash: String,
}

impl SweepResult {
    pub fn n_rows(&self) -> usize {
        self.h1_axis.map_or(1, |a| a.n)
    }

    pub fn row(&self, i: usize) -> &[MeasureSet] {
        let n_t = self.t_axis.n;
        &self.cells[i * n_t..(i + 1) * n_t]
    }

    /// Values of one measure along t for row `i`.
    pub fn row_values(&self, i: usize, m: Measure) -> Vec<f64> {
        self.row(i).iter().map(|c| c.get(m)).collect()
    }

    pub fn series(&self, m: Measure) -> Vec<f64> {
        self.row_values(0, m)
    }
}

fn push_f64(buf: &mut String, x: f64) {
    buf.push_str(&format!("{:016x},", x.to_bits()));
}

/// SHA-256 over the exact bit patterns of every input that determines the grid.
pub fn grid_hash(
    params: &ModelParams,
    t_axis: &UniformAxis,
    h1_axis: Option<&UniformAxis>,
    measures: &[Measure],
    log_base: LogBase,
) -> String {
    let mut s = format!("N={};", params.n);
    for x in [
        params.gamma,
        params.j0,
        params.j1,
        params.h0,
        params.h1,
        params.temperature,
    ] {
        push_f64(&mut s, x);
    }
    s.push_str(";t=");
    push_f64(&mut s, t_axis.min);
    push_f64(&mut s, t_axis.max);
    s.push_str(&format!("{};", t_axis.n));
    if let Some(h) = h1_axis {
        s.push_str("h1=");
        push_f64(&mut s, h.min);
        push_f64(&mut s, h.max);
        s.push_str(&format!("{};", h.n));
    }
    for m in measures {
        s.push_str(m.label());
        s.push(',');
    }
    s.push_str(match log_base {
        LogBase::Two => "log2",
        LogBase::E => "ln",
    });
    Sha256::digest(s.as_bytes())
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

fn eval_row(
    params: &ModelParams,
    t_axis: &UniformAxis,
    log_base: LogBase,
) -> Result<Vec<MeasureSet>, SweepError> {
    let kernel = QuenchKernel::new(params)?;
    (0..t_axis.n)
        .into_par_iter()
        .map(|i| {
            let t = t_axis.value(i);
            let obs = kernel.observables(t)?;
            measure_set(&obs, log_base).map_err(|source| SweepError::Cell {
                coord: format!("N={}, h1={}, t={}", params.n, params.h1, t),
                source,
            })
        })
        .collect()
}

/// One MeasureSet per time point.
pub fn evolve_series(
    params: &ModelParams,
    t_axis: &UniformAxis,
    measures: &[Measure],
    log_base: LogBase,
) -> Result<SweepResult, SweepError> {
    params.validate()?;
    let cells = eval_row(params, t_axis, log_base)?;
    Ok(SweepResult {
        kind: SweepKind::Series,
        params: *params,
        t_axis: *t_axis,
        h1_axis: None,
        measures: measures.to_vec(),
        log_base,
        cells,
        version: VERSION,
        grid_hash: grid_hash(params, t_axis, None, measures, log_base),
    })
}

/// Streams an (h1, t) map to `sink` one h1 row at a time, in ascending h1.
pub fn field_map_rows<F>(
    params: &ModelParams,
    t_axis: &UniformAxis,
    h1_axis: &UniformAxis,
    log_base: LogBase,
    mut sink: F,
) -> Result<(), SweepError>
where
    F: FnMut(usize, f64, &[MeasureSet]) -> Result<(), SweepError>,
{
    params.validate()?;
    for i in 0..h1_axis.n {
        let h1 = h1_axis.value(i);
        let row = eval_row(&params.with_h1(h1)?, t_axis, log_base)?;
        sink(i, h1, &row)?;
    }
    Ok(())
}

/// Full (h1, t) map held in memory; column h1 uses `params` with h1 overridden.
pub fn field_map(
    params: &ModelParams,
    t_axis: &UniformAxis,
    h1_axis: &UniformAxis,
    measures: &[Measure],
    log_base: LogBase,
) -> Result<SweepResult, SweepError> {
    let mut cells = Vec::with_capacity(t_axis.n * h1_axis.n);
    field_map_rows(params, t_axis, h1_axis, log_base, |_, _, row| {
        cells.extend_from_slice(row);
        Ok(())
    })?;
    Ok(SweepResult {
        kind: SweepKind::FieldMap,
        params: *params,
        t_axis: *t_axis,
        h1_axis: Some(*h1_axis),
        measures: measures.to_vec(),
        log_base,
        cells,
        version: VERSION,
        grid_hash: grid_hash(params, t_axis, Some(h1_axis), measures, log_base),
    })
}

/// How each member of a size family gets its time axis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SizeAxes {
    Shared(UniformAxis),
    /// t ∈ [0, t_max_per_site · N] with spacing at most `max_step`.
    PerSite {
        t_max_per_site: f64,
        max_step: f64,
    },
}

impl SizeAxes {
    pub fn axis_for(&self, n: usize) -> Result<UniformAxis, SweepError> {
        match *self {
            SizeAxes::Shared(a) => Ok(a),
            SizeAxes::PerSite {
                t_max_per_site,
                max_step,
            } => UniformAxis::with_max_step(0.0, t_max_per_site * n as f64, max_step),
        }
    }
}

/// One series per system size, in the order given.
pub fn size_family(
    params: &ModelParams,
    sizes: &[usize],
    axes: SizeAxes,
    measures: &[Measure],
    log_base: LogBase,
) -> Result<Vec<SweepResult>, SweepError> {
    if sizes.is_empty() {
        return Err(SweepError::Grid("size list is empty".into()));
    }
    sizes
        .iter()
        .map(|&n| {
            evolve_series(
                &params.with_size(n)?,
                &axes.axis_for(n)?,
                measures,
                log_base,
            )
        })
        .collect()
}
