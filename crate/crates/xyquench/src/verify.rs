//! Randomized cross-checks of every closed form against its independent oracle.

use std::fmt;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::correlators::{pair_observables, PairObservables};
use crate::density::{build_state, TwoSpinState};
use crate::lattice::ModelParams;
use crate::linalg::{max_abs_diff4, mul4};
use crate::measures::{
    lqc_components, qfi_closed, qfi_closed_form, qfi_generic, rec_closed, rec_oracle,
    skew_info_oracle,
};
use crate::oracle::{ode_oracle_observables, recommended_steps};

pub const TOL_DYNAMICS: f64 = 1e-8;
pub const TOL_REC: f64 = 1e-10;
pub const TOL_LQC: f64 = 1e-10;
pub const TOL_QFI: f64 = 1e-8;
pub const TOL_SQRT: f64 = 1e-10;

/// Synthetic X states (including zero and equal-diagonal blocks) added to the square-root check.
const SYNTHETIC_X_STATES: usize = 400;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OraclePoint {
    pub params: ModelParams,
    pub t: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CheckResult {
    pub name: &'static str,
    pub tolerance: f64,
    pub samples: usize,
    pub max_error: f64,
    pub worst: String,
}

impl CheckResult {
    fn new(name: &'static str, tolerance: f64) -> Self {
        CheckResult {
            name,
            tolerance,
            samples: 0,
            max_error: 0.0,
            worst: String::new(),
        }
    }

    fn record(&mut self, err: f64, what: impl FnOnce() -> String) {
        self.samples += 1;
        // NaN counts as a failure
        if !(err <= self.max_error) {
            self.max_error = err;
            self.worst = what();
        }
    }

    pub fn passed(&self) -> bool {
        self.samples > 0 && self.max_error <= self.tolerance
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleReport {
    pub seed: u64,
    pub drawn: usize,
    pub valid: usize,
    pub rejected: usize,
    pub fallback_cases: usize,
    pub degenerate_cases: usize,
    pub checks: Vec<CheckResult>,
}

impl OracleReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(CheckResult::passed)
    }
}

impl fmt::Display for OracleReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "seed {}: {} points drawn, {} valid states, {} rejected (non-positive), {} QFI fallback cases, {} degenerate blocks",
            self.seed, self.drawn, self.valid, self.rejected, self.fallback_cases, self.degenerate_cases
        )?;
        for c in &self.checks {
            write!(
                f,
                "\n{} {:<28} n={:<6} max_err={:.3e} tol={:.0e}",
                if c.passed() { "PASS" } else { "FAIL" },
                c.name,
                c.samples,
                c.max_error,
                c.tolerance
            )?;
            if !c.passed() {
                write!(f, " worst: {}", c.worst)?;
            }
        }
        Ok(())
    }
}

fn draw_point(rng: &mut ChaCha8Rng) -> OraclePoint {
    let n = 2 * rng.gen_range(2..=16);
    let gamma = if rng.gen_bool(0.1) {
        0.0
    } else {
        rng.gen_range(-1.2..=1.2)
    };
    let j0 = rng.gen_range(0.5..=1.2);
    let j1 = rng.gen_range(0.5..=1.2);
    // pin some fields to the gap-closing value so the Γ → 0 limits get exercised
    let h0 = if rng.gen_bool(0.1) {
        j0
    } else {
        rng.gen_range(-1.5..=1.5)
    };
    let h1 = if rng.gen_bool(0.1) {
        j1
    } else {
        rng.gen_range(-1.5..=1.5)
    };
    let temperature = if rng.gen_bool(0.3) {
        0.0
    } else {
        rng.gen_range(0.01..=3.0)
    };
    let t = rng.gen_range(0.0..=4.0);
    OraclePoint {
        params: ModelParams {
            n,
            gamma,
            j0,
            j1,
            h0,
            h1,
            temperature,
        },
        t,
    }
}

fn random_x_state(rng: &mut ChaCha8Rng, variant: usize) -> TwoSpinState {
    let mut d: [f64; 4] = std::array::from_fn(|_| rng.gen_range(0.01..=1.0));
    if variant >= 4 {
        d[3] = d[0];
        d[2] = d[1];
    }
    let sum: f64 = d.iter().sum();
    let d = d.map(|x| x / sum);
    let mut off = |a: f64, b: f64| {
        Complex64::from_polar(
            rng.gen_range(0.0..=1.0) * (a * b).sqrt(),
            rng.gen_range(0.0..std::f64::consts::TAU),
        )
    };
    let mut r14 = off(d[0], d[3]);
    let mut r23 = off(d[1], d[2]);
    match variant % 4 {
        1 => r14 = Complex64::new(0.0, 0.0),
        2 => r23 = Complex64::new(0.0, 0.0),
        3 => {
            r14 = Complex64::new(0.0, 0.0);
            r23 = Complex64::new(0.0, 0.0);
        }
        _ => {}
    }
    // rescale so the trace is 1 to the last bit
    let tr = d[0] + d[1] + d[2] + d[3];
    TwoSpinState::from_entries(d[0], d[1], d[2], d[3] + (1.0 - tr), r14, r23)
        .expect("X state with |ρij| ≤ √(ρii ρjj)")
}

fn dynamics_error(pt: &OraclePoint) -> f64 {
    let closed = match pair_observables(&pt.params, pt.t) {
        Ok(o) => o,
        Err(_) => return f64::NAN,
    };
    let ode = match ode_oracle_observables(&pt.params, pt.t, recommended_steps(&pt.params, pt.t)) {
        Ok(o) => o,
        Err(_) => return f64::NAN,
    };
    [
        closed.sz - ode.sz,
        closed.sxsx - ode.sxsx,
        closed.sysy - ode.sysy,
        closed.szsz - ode.szsz,
        closed.q_elem.im - ode.q_elem.im,
    ]
    .iter()
    .fold(0.0f64, |m, d| m.max(d.abs()))
}

fn sqrt_error(state: &TwoSpinState) -> f64 {
    let s = state.sqrt_elems.to_matrix();
    max_abs_diff4(&mul4(&s, &s), &state.to_matrix())
}

fn degenerate(state: &TwoSpinState) -> bool {
    state.rho14.norm() < crate::density::DEGENERATE_OFFDIAG
        || state.rho23.norm() < crate::density::DEGENERATE_OFFDIAG
}

/// Observables of (1-ε)ρ + ε·1/4.
fn depolarize(obs: &PairObservables, eps: f64) -> PairObservables {
    let k = 1.0 - eps;
    PairObservables::from_correlators(k * obs.sz, k * obs.sxsx, k * obs.sysy, k * obs.szsz)
}

/// States where a closed-form QFI denominator vanishes.
pub fn qfi_singular_cases() -> Vec<(&'static str, PairObservables)> {
    vec![
        (
            "up-up",
            PairObservables::from_correlators(0.5, 0.0, 0.0, 0.25),
        ),
        (
            "down-down",
            PairObservables::from_correlators(-0.5, 0.0, 0.0, 0.25),
        ),
        (
            "singlet",
            PairObservables::from_correlators(0.0, -0.25, -0.25, -0.25),
        ),
        (
            "triplet-0",
            PairObservables::from_correlators(0.0, 0.25, 0.25, -0.25),
        ),
    ]
}

/// Draws points until `min_valid` of them give a positive two-spin state, then runs
/// every check over them.
pub fn run_oracle_suite(min_valid: usize, seed: u64) -> OracleReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut points = Vec::new();
    let mut states = Vec::new();
    let mut rejected = 0;
    while states.len() < min_valid {
        let pt = draw_point(&mut rng);
        points.push(pt);
        match pair_observables(&pt.params, pt.t)
            .ok()
            .and_then(|o| build_state(&o).ok().map(|s| (o, s)))
        {
            Some(pair) => states.push((pt, pair.0, pair.1)),
            None => rejected += 1,
        }
    }

    let mut dynamics = CheckResult::new("dynamics vs ODE", TOL_DYNAMICS);
    let errs: Vec<f64> = points.par_iter().map(dynamics_error).collect();
    for (pt, e) in points.iter().zip(errs) {
        dynamics.record(e, || format!("{pt:?}"));
    }

    let mut rec = CheckResult::new("REC closed vs spectral", TOL_REC);
    let mut lqc = CheckResult::new("LQC vs skew information", TOL_LQC);
    let mut qfi = CheckResult::new("QFI closed vs spectral", TOL_QFI);
    let mut sqrt = CheckResult::new("sqrt(rho)^2 = rho", TOL_SQRT);
    let mut degenerate_cases = 0;
    let per_state: Vec<[f64; 4]> = states
        .par_iter()
        .map(|(_, obs, st)| {
            let r = rec_closed(obs)
                .map(|x| (x - rec_oracle(st)).abs())
                .unwrap_or(f64::NAN);
            let lq = lqc_components(st);
            let l = (0..3).fold(0.0f64, |m, a| {
                m.max((lq[a] - skew_info_oracle(st, a)).abs())
            });
            let q = qfi_closed(obs)
                .map(|x| (x - qfi_generic(st)).abs())
                .unwrap_or(f64::NAN);
            [r, l, q, sqrt_error(st)]
        })
        .collect();
    for ((pt, _, st), e) in states.iter().zip(per_state) {
        let what = || format!("{pt:?}");
        rec.record(e[0], what);
        lqc.record(e[1], what);
        qfi.record(e[2], what);
        sqrt.record(e[3], what);
        degenerate_cases += degenerate(st) as usize;
    }

    let mut fallback_cases = 0;
    for (name, obs) in qfi_singular_cases() {
        let st = build_state(&obs).expect("pure state");
        if qfi_closed_form(&obs).is_none() {
            fallback_cases += 1;
        }
        let e = qfi_closed(&obs)
            .map(|x| (x - qfi_generic(&st)).abs())
            .unwrap_or(f64::NAN);
        qfi.record(e, || name.to_string());
        // just off the singular surface the closed form must agree with the spectral value
        for eps in [1e-3, 1e-5] {
            let near = depolarize(&obs, eps);
            let st = build_state(&near).expect("depolarized state");
            let e = match qfi_closed_form(&near) {
                Some(x) => (x - qfi_generic(&st)).abs(),
                None => 0.0,
            };
            qfi.record(e, || format!("{name} depolarized by {eps}"));
        }
    }

    for k in 0..SYNTHETIC_X_STATES {
        let st = random_x_state(&mut rng, k % 6);
        degenerate_cases += degenerate(&st) as usize;
        sqrt.record(sqrt_error(&st), || format!("synthetic X state {k}: {st:?}"));
    }

    OracleReport {
        seed,
        drawn: points.len(),
        valid: states.len(),
        rejected,
        fallback_cases,
        degenerate_cases,
        checks: vec![dynamics, rec, lqc, qfi, sqrt],
    }
}
