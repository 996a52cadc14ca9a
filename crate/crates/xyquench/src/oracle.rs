//! Verification oracle: each momentum mode's 2×2 Bogoliubov–de Gennes problem is
//! integrated numerically from its thermal state, then reassembled into F, Q, G.
//!
//! Shares no code with the closed-form path apart from parameter validation and the
//! Wick combination.

use num_complex::Complex64;
use thiserror::Error;

use crate::correlators::{assemble, CorrelatorError, FqgElements, PairObservables};
use crate::lattice::{mode_angle, ModelParams};

pub const MIN_STEPS: usize = 100;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OracleError {
    #[error("step count {0} is below the minimum of {MIN_STEPS}")]
    TooFewSteps(usize),
    #[error(transparent)]
    Correlator(#[from] CorrelatorError),
}

type M2 = [[Complex64; 2]; 2];

fn bdg(j: f64, h: f64, gamma: f64, s: f64, c: f64) -> M2 {
    let e = Complex64::new(-2.0 * (j * c + h), 0.0);
    let d = Complex64::new(0.0, -2.0 * gamma * j * s);
    [[e, d], [d.conj(), -e]]
}

fn mul(a: &M2, b: &M2) -> M2 {
    let mut out = [[Complex64::new(0.0, 0.0); 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            out[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
        }
    }
    out
}

fn axpy(m: &M2, k: &M2, h: f64) -> M2 {
    let mut out = *m;
    for i in 0..2 {
        for j in 0..2 {
            out[i][j] += k[i][j] * h;
        }
    }
    out
}

/// dM/dt = −i[H, M]
fn liouville(h: &M2, m: &M2) -> M2 {
    let hm = mul(h, m);
    let mh = mul(m, h);
    let mi = Complex64::new(0.0, -1.0);
    let mut out = [[Complex64::new(0.0, 0.0); 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            out[i][j] = mi * (hm[i][j] - mh[i][j]);
        }
    }
    out
}

fn rk4(h: &M2, m0: M2, t: f64, steps: usize) -> M2 {
    let dt = t / steps as f64;
    let mut m = m0;
    for _ in 0..steps {
        let k1 = liouville(h, &m);
        let k2 = liouville(h, &axpy(&m, &k1, 0.5 * dt));
        let k3 = liouville(h, &axpy(&m, &k2, 0.5 * dt));
        let k4 = liouville(h, &axpy(&m, &k3, dt));
        for i in 0..2 {
            for j in 0..2 {
                m[i][j] += (k1[i][j] + 2.0 * k2[i][j] + 2.0 * k3[i][j] + k4[i][j]) * (dt / 6.0);
            }
        }
    }
    m
}

/// ⟨ψψ†⟩ for the thermal state of H0: ½(1 + tanh(βH0/2)).
fn thermal_correlation(h0: &M2, temperature: f64) -> M2 {
    let e = (h0[0][0].norm_sqr() + h0[0][1].norm_sqr()).sqrt();
    let one = Complex64::new(1.0, 0.0);
    let w = if e == 0.0 {
        0.0
    } else if temperature == 0.0 {
        1.0 / e
    } else {
        (0.5 * e / temperature).tanh() / e
    };
    [
        [(one + h0[0][0] * w) * 0.5, h0[0][1] * (0.5 * w)],
        [h0[1][0] * (0.5 * w), (one + h0[1][1] * w) * 0.5],
    ]
}

pub fn ode_oracle_observables(
    params: &ModelParams,
    t: f64,
    steps: usize,
) -> Result<PairObservables, OracleError> {
    if steps < MIN_STEPS {
        return Err(OracleError::TooFewSteps(steps));
    }
    params.validate().map_err(CorrelatorError::from)?;
    let t = t.max(0.0);
    let n = params.n;
    let (mut f0, mut fp, mut fm, mut qa, mut qb) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for p in 1..=n / 2 {
        let (_, s, c) = mode_angle(p, n);
        let h0 = bdg(params.j0, params.h0, params.gamma, s, c);
        let h1 = bdg(params.j1, params.h1, params.gamma, s, c);
        let m0 = thermal_correlation(&h0, params.temperature);
        let m = if t == 0.0 { m0 } else { rk4(&h1, m0, t, steps) };
        let occ = 0.5 * (1.0 - m[0][0].re + m[1][1].re);
        let a = m[0][1];
        let z = 2.0 * occ - 1.0;
        f0 += 2.0 * z;
        fp += 2.0 * c * z - 4.0 * s * a.im;
        fm += 2.0 * c * z + 4.0 * s * a.im;
        qa += 2.0 * c;
        qb += -4.0 * s * a.re;
    }
    let nf = n as f64;
    let (f0, fp, fm, qa, qb) = (f0 / nf, fp / nf, fm / nf, qa / nf, qb / nf);
    Ok(assemble(FqgElements {
        f_lm: Complex64::new(fp, 0.0),
        f_ml: Complex64::new(fm, 0.0),
        f_ll: Complex64::new(f0, 0.0),
        q: Complex64::new(qa, qb),
        g: Complex64::new(-qa, qb),
    })?)
}

/// Step count that keeps the RK4 phase error of the fastest mode well below 1e-9.
pub fn recommended_steps(params: &ModelParams, t: f64) -> usize {
    let gmax = (1..=params.n / 2)
        .map(|p| {
            let (_, s, c) = mode_angle(p, params.n);
            (params.j1 * c + params.h1).hypot(params.gamma * params.j1 * s)
        })
        .fold(0.0, f64::max);
    let phase = 4.0 * gmax * t.max(0.0);
    MIN_STEPS.max((phase / 0.005).ceil() as usize)
}
