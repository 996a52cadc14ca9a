//! Revival and separation times, their linear scaling with system size, and the
//! critical-field locator for field maps.

use thiserror::Error;

use crate::lattice::ModelParams;
use crate::measures::{LogBase, Measure};
use crate::sweep::{evolve_series, SizeAxes, SweepError, SweepResult};

pub const MIN_BASELINE_SAMPLES: usize = 50;
pub const SIGMA_FLOOR: f64 = 1e-12;

#[derive(Debug, Error)]
pub enum AnalysisError {
    #[error("series too short: baseline window holds {0} samples, need {MIN_BASELINE_SAMPLES}")]
    SeriesTooShort(usize),
    #[error("time axis and series lengths differ ({0} vs {1})")]
    LengthMismatch(usize, usize),
    #[error("series are sampled on different time axes")]
    AxisMismatch,
    #[error("linear fit needs at least 2 points (got {0})")]
    TooFewPoints(usize),
    #[error("linear fit needs at least 2 distinct N values")]
    DegenerateAbscissa,
    #[error("not a field map")]
    NotAMap,
    #[error("empty map")]
    EmptyMap,
    #[error("size list needs at least {need} entries (got {got})")]
    TooFewSizes { need: usize, got: usize },
    #[error(transparent)]
    Sweep(#[from] SweepError),
}

/// Settings of the baseline-deviation detector.
///
/// The baseline mean and standard deviation come from the window
/// [relax_fraction, window_fraction] of the time span. The reported time is the first
/// sample at or after relax_fraction whose deviation exceeds
/// max(threshold_k · σ, peak_fraction · D), where D is the largest deviation seen
/// after the window. Nothing is reported when D itself stays within threshold_k · σ.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RevivalConfig {
    pub relax_fraction: f64,
    pub window_fraction: f64,
    pub threshold_k: f64,
    pub peak_fraction: f64,
}

impl Default for RevivalConfig {
    fn default() -> Self {
        RevivalConfig {
            relax_fraction: 0.05,
            window_fraction: 0.4,
            threshold_k: 5.0,
            peak_fraction: 0.1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeparationConfig {
    /// Absolute floor on the separation threshold.
    pub tol: f64,
    pub detector: RevivalConfig,
}

impl Default for SeparationConfig {
    fn default() -> Self {
        SeparationConfig {
            tol: 1e-6,
            detector: RevivalConfig::default(),
        }
    }
}

fn first_departure(
    t: &[f64],
    s: &[f64],
    cfg: &RevivalConfig,
    abs_floor: f64,
) -> Result<Option<f64>, AnalysisError> {
    if t.len() != s.len() {
        return Err(AnalysisError::LengthMismatch(t.len(), s.len()));
    }
    if t.is_empty() {
        return Err(AnalysisError::SeriesTooShort(0));
    }
    let t0 = t[0];
    let span = t[t.len() - 1] - t0;
    let relax = t0 + cfg.relax_fraction * span;
    let window = t0 + cfg.window_fraction * span;
    let base: Vec<f64> = t
        .iter()
        .zip(s)
        .filter(|(&ti, _)| ti >= relax && ti <= window)
        .map(|(_, &si)| si)
        .collect();
    if base.len() < MIN_BASELINE_SAMPLES {
        return Err(AnalysisError::SeriesTooShort(base.len()));
    }
    let mean = base.iter().sum::<f64>() / base.len() as f64;
    let var = base.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / base.len() as f64;
    let sigma = var.sqrt().max(SIGMA_FLOOR);
    let floor = (cfg.threshold_k * sigma).max(abs_floor);
    let peak = t
        .iter()
        .zip(s)
        .filter(|(&ti, _)| ti > window)
        .map(|(_, &si)| (si - mean).abs())
        .fold(0.0, f64::max);
    if peak <= floor {
        return Ok(None);
    }
    let threshold = floor.max(cfg.peak_fraction * peak);
    Ok(t.iter()
        .zip(s)
        .find(|(&ti, &si)| ti >= relax && (si - mean).abs() > threshold)
        .map(|(&ti, _)| ti))
}

/// First pronounced deviation of `s` from its post-relaxation baseline.
pub fn detect_revival(
    t: &[f64],
    s: &[f64],
    cfg: &RevivalConfig,
) -> Result<Option<f64>, AnalysisError> {
    first_departure(t, s, cfg, 0.0)
}

/// First time at which two series on the same axis depart from each other.
pub fn detect_separation(
    t: &[f64],
    a: &[f64],
    b: &[f64],
    cfg: &SeparationConfig,
) -> Result<Option<f64>, AnalysisError> {
    if a.len() != b.len() {
        return Err(AnalysisError::AxisMismatch);
    }
    let diff: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    first_departure(t, &diff, &cfg.detector, cfg.tol)
}

#[derive(Debug, Clone, PartialEq)]
pub struct RevivalFit {
    pub points: Vec<(f64, f64)>,
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
}

/// Ordinary least squares y = slope · x + intercept.
pub fn linear_fit(points: &[(f64, f64)]) -> Result<RevivalFit, AnalysisError> {
    if points.len() < 2 {
        return Err(AnalysisError::TooFewPoints(points.len()));
    }
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    if sxx == 0.0 {
        return Err(AnalysisError::DegenerateAbscissa);
    }
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_tot: f64 = points.iter().map(|p| (p.1 - my) * (p.1 - my)).sum();
    let ss_res: f64 = points
        .iter()
        .map(|p| {
            let r = p.1 - (slope * p.0 + intercept);
            r * r
        })
        .sum();
    let r_squared = if ss_tot == 0.0 {
        1.0
    } else {
        (1.0 - ss_res / ss_tot).min(1.0)
    };
    Ok(RevivalFit {
        points: points.to_vec(),
        slope,
        intercept,
        r_squared,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CriticalField {
    pub h1: f64,
    pub index: usize,
    /// max over t of the measure in the winning column
    pub peak: f64,
    /// true when another column attains the same peak
    pub degenerate: bool,
}

/// Column whose time-maximum of `m` is largest; ties go to the smaller h1.
pub fn locate_critical_field(
    map: &SweepResult,
    m: Measure,
) -> Result<CriticalField, AnalysisError> {
    let axis = map.h1_axis.ok_or(AnalysisError::NotAMap)?;
    if map.cells.is_empty() || axis.n == 0 {
        return Err(AnalysisError::EmptyMap);
    }
    let peaks: Vec<f64> = (0..axis.n)
        .map(|i| {
            map.row(i)
                .iter()
                .map(|c| c.get(m))
                .fold(f64::NEG_INFINITY, f64::max)
        })
        .collect();
    let mut best = 0;
    for (i, &p) in peaks.iter().enumerate() {
        if p > peaks[best] {
            best = i;
        }
    }
    let degenerate = peaks
        .iter()
        .enumerate()
        .any(|(i, &p)| i != best && p == peaks[best]);
    if degenerate {
        log::info!(
            "{m}: tie for the largest peak, keeping h1 = {}",
            axis.value(best)
        );
    }
    Ok(CriticalField {
        h1: axis.value(best),
        index: best,
        peak: peaks[best],
        degenerate,
    })
}

/// Inputs of a size-scaling scan.
#[derive(Debug, Clone, PartialEq)]
pub struct ScanSettings {
    pub sizes: Vec<usize>,
    pub t_max_per_site: f64,
    pub max_step: f64,
    pub measure: Measure,
    pub log_base: LogBase,
}

impl ScanSettings {
    pub fn new(sizes: Vec<usize>, measure: Measure) -> Self {
        ScanSettings {
            sizes,
            t_max_per_site: 0.5,
            max_step: 0.05,
            measure,
            log_base: LogBase::Two,
        }
    }

    fn axes(&self) -> SizeAxes {
        SizeAxes::PerSite {
            t_max_per_site: self.t_max_per_site,
            max_step: self.max_step,
        }
    }
}

#[derive(Debug, Clone)]
pub struct ScanReport {
    /// (N, detected time) for every size, `None` where nothing was detected.
    pub times: Vec<(usize, Option<f64>)>,
    pub fit: RevivalFit,
    pub series: Vec<SweepResult>,
}

fn fit_times(times: &[(usize, Option<f64>)]) -> Result<RevivalFit, AnalysisError> {
    let pts: Vec<(f64, f64)> = times
        .iter()
        .filter_map(|&(n, t)| t.map(|t| (n as f64, t)))
        .collect();
    for (n, t) in times {
        if t.is_none() {
            log::warn!("no event detected for N = {n}");
        }
    }
    linear_fit(&pts)
}

/// t_r(N) from each size's own series, then t_r = τN + c.
pub fn revival_scan(
    params: &ModelParams,
    settings: &ScanSettings,
    detector: &RevivalConfig,
) -> Result<ScanReport, AnalysisError> {
    if settings.sizes.len() < 2 {
        return Err(AnalysisError::TooFewSizes {
            need: 2,
            got: settings.sizes.len(),
        });
    }
    let mut times = Vec::new();
    let mut series = Vec::new();
    for &n in &settings.sizes {
        let axis = settings.axes().axis_for(n)?;
        let r = evolve_series(
            &params.with_size(n).map_err(SweepError::from)?,
            &axis,
            &[settings.measure],
            settings.log_base,
        )?;
        let tr = detect_revival(&axis.values(), &r.series(settings.measure), detector)?;
        times.push((n, tr));
        series.push(r);
    }
    Ok(ScanReport {
        fit: fit_times(&times)?,
        times,
        series,
    })
}

/// t_c(N) where the series of consecutive sizes N < M first split, on N's time axis.
pub fn separation_scan(
    params: &ModelParams,
    settings: &ScanSettings,
    cfg: &SeparationConfig,
) -> Result<ScanReport, AnalysisError> {
    if settings.sizes.len() < 3 {
        return Err(AnalysisError::TooFewSizes {
            need: 3,
            got: settings.sizes.len(),
        });
    }
    let mut times = Vec::new();
    let mut series = Vec::new();
    for pair in settings.sizes.windows(2) {
        let (n, m) = (pair[0], pair[1]);
        let axis = settings.axes().axis_for(n)?;
        let a = evolve_series(
            &params.with_size(n).map_err(SweepError::from)?,
            &axis,
            &[settings.measure],
            settings.log_base,
        )?;
        let b = evolve_series(
            &params.with_size(m).map_err(SweepError::from)?,
            &axis,
            &[settings.measure],
            settings.log_base,
        )?;
        let tc = detect_separation(
            &axis.values(),
            &a.series(settings.measure),
            &b.series(settings.measure),
            cfg,
        )?;
        times.push((n, tc));
        series.push(a);
    }
    Ok(ScanReport {
        fit: fit_times(&times)?,
        times,
        series,
    })
}
