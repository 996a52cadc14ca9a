//! Coherence quantifiers of the two-spin state: l1-norm coherence, relative entropy of
//! coherence, local quantum coherence (Wigner–Yanase skew information) and quantum
//! Fisher information. Each closed form has a definition-level oracle next to it.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use thiserror::Error;

use crate::correlators::PairObservables;
use crate::density::{build_state, StateError, TwoSpinState, NEG_EIGEN_LIMIT};
use crate::linalg::{add4, identity2, kron2, mul4, spin, sub4, trace4, Mat2, Mat4};

/// Denominators of the closed-form QFI below this magnitude trigger the spectral fallback.
pub const QFI_SINGULAR_EPS: f64 = 1e-10;
/// Eigenvalue pairs with p_m + p_n below this are skipped in the spectral QFI.
pub const QFI_PAIR_EPS: f64 = 1e-12;
/// Prefactor of Σ (p_m − p_n)²/(p_m + p_n) |⟨m|A|n⟩|² in the spectral QFI.
///
/// With this value the spectral sum over √2{I, Sˣ, Sʸ, Sᶻ} reproduces the closed form
/// exactly; the prefactor 2 of the usual single-operator definition is four times larger.
pub const QFI_PREFACTOR: f64 = 0.5;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MeasureError {
    #[error("entropy argument {name} = {value:e} is negative beyond tolerance")]
    NegativeArgument { name: &'static str, value: f64 },
    #[error(transparent)]
    State(#[from] StateError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Measure {
    Rec,
    Cl1,
    LqcX,
    LqcY,
    LqcZ,
    Qfi,
}

impl Measure {
    pub const ALL: [Measure; 6] = [
        Measure::Rec,
        Measure::Cl1,
        Measure::LqcX,
        Measure::LqcY,
        Measure::LqcZ,
        Measure::Qfi,
    ];

    pub fn label(self) -> &'static str {
        match self {
            Measure::Rec => "rec",
            Measure::Cl1 => "cl1",
            Measure::LqcX => "lqcx",
            Measure::LqcY => "lqcy",
            Measure::LqcZ => "lqcz",
            Measure::Qfi => "qfi",
        }
    }
}

impl fmt::Display for Measure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for Measure {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Measure::ALL
            .into_iter()
            .find(|m| m.label() == s.trim())
            .ok_or_else(|| {
                format!(
                    "unknown measure '{}' (expected one of rec, cl1, lqcx, lqcy, lqcz, qfi)",
                    s.trim()
                )
            })
    }
}

/// Logarithm base for the relative entropy of coherence.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum LogBase {
    #[default]
    Two,
    E,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeasureSet {
    pub rec: f64,
    pub cl1: f64,
    pub lqc_x: f64,
    pub lqc_y: f64,
    pub lqc_z: f64,
    pub qfi: f64,
}

impl MeasureSet {
    pub fn get(&self, m: Measure) -> f64 {
        match m {
            Measure::Rec => self.rec,
            Measure::Cl1 => self.cl1,
            Measure::LqcX => self.lqc_x,
            Measure::LqcY => self.lqc_y,
            Measure::LqcZ => self.lqc_z,
            Measure::Qfi => self.qfi,
        }
    }
}

/// All six measures from one set of observables.
pub fn measure_set(obs: &PairObservables, base: LogBase) -> Result<MeasureSet, MeasureError> {
    let state = build_state(obs)?;
    let [lqc_x, lqc_y, lqc_z] = lqc_components(&state);
    let rec = match base {
        LogBase::Two => rec_closed(obs)?,
        LogBase::E => rec_closed(obs)? * std::f64::consts::LN_2,
    };
    Ok(MeasureSet {
        rec,
        cl1: cl1(&state),
        lqc_x,
        lqc_y,
        lqc_z,
        qfi: qfi_closed_with_state(obs, &state),
    })
}

/// Sum of absolute off-diagonal entries, 2|ρ14| + 2|ρ23|.
pub fn cl1(state: &TwoSpinState) -> f64 {
    let value = 2.0 * state.rho14.norm() + 2.0 * state.rho23.norm();
    let xx = 0.5 * (state.rho23.re + state.rho14.re);
    let yy = 0.5 * (state.rho23.re - state.rho14.re);
    if state.rho14.im == 0.0 && state.rho23.im == 0.0 && xx.abs() >= yy.abs() {
        debug_assert!(
            (value - 4.0 * xx.abs()).abs() <= 1e-12,
            "l1 coherence disagrees with 4|<SxSx>|"
        );
    }
    value
}

fn xlog2x(name: &'static str, x: f64) -> Result<f64, MeasureError> {
    if x < NEG_EIGEN_LIMIT {
        return Err(MeasureError::NegativeArgument { name, value: x });
    }
    Ok(if x <= 0.0 { 0.0 } else { x * x.log2() })
}

/// Closed form in the correlators, with ζ_q = ¼ + ⟨SᶻSᶻ⟩ + (−1)^q ⟨Sᶻ⟩.
pub fn rec_closed(obs: &PairObservables) -> Result<f64, MeasureError> {
    let PairObservables {
        sz,
        sxsx,
        sysy,
        szsz,
        ..
    } = *obs;
    let eps = 0.25 - szsz;
    let radius = sz.hypot(sxsx - sysy);
    let mut xi = [0.0; 2];
    let mut eta = [0.0; 2];
    let mut zeta = [0.0; 2];
    for (k, sign) in [1.0, -1.0].into_iter().enumerate() {
        xi[k] = xlog2x("xi", 0.25 - szsz + sign * (sxsx + sysy))?;
        eta[k] = xlog2x("eta", 0.25 + szsz + sign * radius)?;
        zeta[k] = xlog2x("zeta", 0.25 + szsz + sign * sz)?;
    }
    // grouped per block so a diagonal state cancels to exactly 0
    let inner = xi[0] + xi[1] - 2.0 * xlog2x("epsilon", eps)?;
    let outer = (eta[0] + eta[1]) - (zeta[0] + zeta[1]);
    Ok(inner + outer)
}

fn entropy2(p: &[f64]) -> f64 {
    -p.iter()
        .filter(|&&x| x > 0.0)
        .map(|&x| x * x.log2())
        .sum::<f64>()
}

/// S(ρ_diag) − S(ρ) in bits.
pub fn rec_oracle(state: &TwoSpinState) -> f64 {
    let [d1, d2, d3, d4] = state.diagonal().map(|x| x.max(0.0));
    let [p1, p2, p3, p4] = state.spectrum;
    (entropy2(&[d1, d4]) - entropy2(&[p1, p2])) + (entropy2(&[d2, d3]) - entropy2(&[p3, p4]))
}

/// (LQC_x, LQC_y, LQC_z) from the square-root entries.
pub fn lqc_components(state: &TwoSpinState) -> [f64; 3] {
    let r = &state.sqrt_elems;
    let diag_cross = r.alpha * r.beta + r.gamma * r.delta;
    let ln = (r.lambda * r.nu).re;
    [
        1.0 - 2.0 * diag_cross - 4.0 * ln,
        1.0 - 2.0 * diag_cross + 4.0 * ln,
        1.0 - (r.alpha * r.alpha + r.beta * r.beta + r.gamma * r.gamma + r.delta * r.delta
            - 2.0 * (r.lambda.norm_sqr() + r.nu.norm_sqr())),
    ]
}

/// I(ρ, V) = −½ Tr [√ρ, V]².
pub fn skew_information(state: &TwoSpinState, v: &Mat4) -> f64 {
    let s = state.sqrt_elems.to_matrix();
    let comm = sub4(&mul4(&s, v), &mul4(v, &s));
    -0.5 * trace4(&mul4(&comm, &comm)).re
}

/// Skew information of σ^α ⊗ 1 = 2 S^α ⊗ 1, the normalisation carried by the LQC
/// closed form (a pure |↑↑⟩ has LQC_x = 1).
pub fn skew_info_oracle(state: &TwoSpinState, axis: usize) -> f64 {
    let v = kron2(&spin(axis), &identity2());
    4.0 * skew_information(state, &v)
}

fn quadratic_terms(state: &TwoSpinState) -> [[f64; 4]; 4] {
    let p = state.spectrum;
    let mut w = [[0.0; 4]; 4];
    for m in 0..4 {
        for n in 0..4 {
            let s = p[m] + p[n];
            if s >= QFI_PAIR_EPS {
                let d = p[m] - p[n];
                w[m][n] = QFI_PREFACTOR * d * d / s;
            }
        }
    }
    w
}

fn fisher_for(weights: &[[f64; 4]; 4], vecs: &[[Complex64; 4]; 4], a: &Mat4) -> f64 {
    let mut total = 0.0;
    for m in 0..4 {
        for n in 0..4 {
            if weights[m][n] == 0.0 {
                continue;
            }
            let mut elem = Complex64::new(0.0, 0.0);
            for i in 0..4 {
                for j in 0..4 {
                    elem += vecs[m][i].conj() * a[i][j] * vecs[n][j];
                }
            }
            total += weights[m][n] * elem.norm_sqr();
        }
    }
    total
}

/// Σ_μ F(ρ, A_μ ⊗ 1 + 1 ⊗ A_μ) over a caller-supplied set of local observables.
pub fn qfi_with_local_observables(state: &TwoSpinState, local: &[Mat2]) -> f64 {
    let weights = quadratic_terms(state);
    let vecs = state.eigenvectors();
    let id = identity2();
    local
        .iter()
        .map(|a| {
            let op = add4(&kron2(a, &id), &kron2(&id, a));
            fisher_for(&weights, &vecs, &op)
        })
        .sum()
}

/// The local basis √2{I, Sˣ, Sʸ, Sᶻ}.
pub fn standard_local_basis() -> [Mat2; 4] {
    let r2 = Complex64::new(std::f64::consts::SQRT_2, 0.0);
    let scale = |m: Mat2| m.map(|row| row.map(|x| x * r2));
    [
        scale(identity2()),
        scale(spin(0)),
        scale(spin(1)),
        scale(spin(2)),
    ]
}

/// Spectral QFI from the eigendecomposition of the state.
pub fn qfi_generic(state: &TwoSpinState) -> f64 {
    qfi_with_local_observables(state, &standard_local_basis())
}

/// Closed form in the correlators; singular denominators fall back to [`qfi_generic`].
pub fn qfi_closed(obs: &PairObservables) -> Result<f64, StateError> {
    match qfi_closed_form(obs) {
        Some(q) => Ok(q),
        None => Ok(qfi_generic(&build_state(obs)?)),
    }
}

fn qfi_closed_with_state(obs: &PairObservables, state: &TwoSpinState) -> f64 {
    qfi_closed_form(obs).unwrap_or_else(|| qfi_generic(state))
}

/// `None` when a denominator is within [`QFI_SINGULAR_EPS`] of zero.
pub fn qfi_closed_form(obs: &PairObservables) -> Option<f64> {
    let PairObservables {
        sz: mz,
        sxsx: xx,
        sysy: yy,
        szsz: zz,
        ..
    } = *obs;
    let d1 = 1.0 + 4.0 * zz;
    let d2 = (1.0 + 4.0 * xx) * (1.0 + 4.0 * yy) - 4.0 * mz * mz;
    if d1.abs() < QFI_SINGULAR_EPS || d2.abs() < QFI_SINGULAR_EPS {
        return None;
    }
    let mz2 = mz * mz;
    let bracket = (3.0 * mz2 + 4.0 * zz * zz - 2.0 * zz) * (xx + yy)
        + 0.5 * (mz2 + 4.0 * zz * zz - 8.0 * mz2 * zz)
        + (1.0 - 8.0 * zz) * (xx * xx + yy * yy)
        + 4.0 * xx * xx * xx
        + 4.0 * yy * yy * yy;
    Some(16.0 * (xx - yy) * (xx - yy) / d1 + 16.0 / d2 * bracket)
}

/// Identity used by tests: the spectral QFI is a sum of per-operator terms.
pub fn fisher_information(state: &TwoSpinState, op: &Mat4) -> f64 {
    fisher_for(&quadratic_terms(state), &state.eigenvectors(), op)
}

/// Multiplies a 2×2 operator by a real scalar.
pub fn scale2(m: &Mat2, s: f64) -> Mat2 {
    m.map(|row| row.map(|x| x * s))
}

/// Σ_ν c_ν M_ν for 2×2 operators.
pub fn combine2(coeffs: &[f64], mats: &[Mat2]) -> Mat2 {
    let mut out = [[Complex64::new(0.0, 0.0); 2]; 2];
    for (c, m) in coeffs.iter().zip(mats) {
        for i in 0..2 {
            for j in 0..2 {
                out[i][j] += m[i][j] * *c;
            }
        }
    }
    out
}
