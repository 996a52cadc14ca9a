//! Reduced two-spin density matrix in X form, its spectrum and its square root.
//!
//! Basis order |↑↑⟩, |↑↓⟩, |↓↑⟩, |↓↓⟩. The matrix splits into the (1,4) block and the
//! (2,3) block, each diagonalised in closed form.

use num_complex::Complex64;
use thiserror::Error;

use crate::correlators::PairObservables;
use crate::linalg::{zeros4, Mat4};

/// Off-diagonal magnitude below which a block is treated as diagonal.
pub const DEGENERATE_OFFDIAG: f64 = 1e-14;
/// Eigenvalues below this are a hard error; those in [NEG_EIGEN_LIMIT, 0) are clamped.
pub const NEG_EIGEN_LIMIT: f64 = -1e-9;
pub const TRACE_TOL: f64 = 1e-12;
/// Relative size below which the smaller eigenvalue of a 2×2 block is taken as 0.
pub const RANK_ONE_EPS: f64 = 8.0 * f64::EPSILON;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum StateError {
    #[error("eigenvalue p{index} = {value:e} is negative beyond tolerance")]
    NegativeEigenvalue { index: usize, value: f64 },
    #[error("trace is {0} instead of 1")]
    Trace(f64),
    #[error("non-finite density matrix entry")]
    NotFinite,
}

/// Closed-form eigendata of a 2×2 Hermitian block [[a, c], [c*, b]].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlockEigen {
    pub p_plus: f64,
    pub p_minus: f64,
    /// p_plus − a, computed without cancellation.
    pub shift_plus: f64,
    /// p_minus − a, computed without cancellation.
    pub shift_minus: f64,
}

fn block_eigen(a: f64, b: f64, c_abs: f64) -> BlockEigen {
    if c_abs == 0.0 {
        return if a >= b {
            BlockEigen {
                p_plus: a,
                p_minus: b,
                shift_plus: 0.0,
                shift_minus: b - a,
            }
        } else {
            BlockEigen {
                p_plus: b,
                p_minus: a,
                shift_plus: b - a,
                shift_minus: 0.0,
            }
        };
    }
    let d = a - b;
    let c2 = c_abs * c_abs;
    let root = d.hypot(2.0 * c_abs);
    let (shift_plus, shift_minus) = if d >= 0.0 {
        let up = if root + d > 0.0 {
            2.0 * c2 / (root + d)
        } else {
            0.0
        };
        (up, -0.5 * (root + d))
    } else {
        (0.5 * (root - d), -2.0 * c2 / (root - d))
    };
    let p_plus = 0.5 * (a + b + root);
    // smaller root via the determinant; a rank-one block leaves only rounding residue
    let mut p_minus = if p_plus > 0.0 {
        (a * b - c2) / p_plus
    } else {
        0.5 * (a + b - root)
    };
    if p_minus.abs() <= RANK_ONE_EPS * p_plus {
        p_minus = 0.0;
    }
    BlockEigen {
        p_plus,
        p_minus,
        shift_plus,
        shift_minus,
    }
}

/// Entries of the square root, laid out as
/// [[α, 0, 0, λ], [0, β, ν, 0], [0, ν*, γ, 0], [λ*, 0, 0, δ]].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SqrtElems {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub delta: f64,
    pub lambda: Complex64,
    pub nu: Complex64,
}

impl SqrtElems {
    pub fn to_matrix(&self) -> Mat4 {
        x_matrix(
            self.alpha,
            self.beta,
            self.gamma,
            self.delta,
            self.lambda,
            self.nu,
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoSpinState {
    pub rho11: f64,
    pub rho22: f64,
    pub rho33: f64,
    pub rho44: f64,
    pub rho14: Complex64,
    pub rho23: Complex64,
    /// p1 ≥ p2 from the (1,4) block, p3 ≥ p4 from the (2,3) block; clamped at 0.
    pub spectrum: [f64; 4],
    pub sqrt_elems: SqrtElems,
    outer: BlockEigen,
    inner: BlockEigen,
}

fn x_matrix(d1: f64, d2: f64, d3: f64, d4: f64, o14: Complex64, o23: Complex64) -> Mat4 {
    let mut m = zeros4();
    m[0][0] = Complex64::new(d1, 0.0);
    m[1][1] = Complex64::new(d2, 0.0);
    m[2][2] = Complex64::new(d3, 0.0);
    m[3][3] = Complex64::new(d4, 0.0);
    m[0][3] = o14;
    m[3][0] = o14.conj();
    m[1][2] = o23;
    m[2][1] = o23.conj();
    m
}

fn clamp_eigen(index: usize, value: f64) -> Result<f64, StateError> {
    if value < NEG_EIGEN_LIMIT {
        return Err(StateError::NegativeEigenvalue { index, value });
    }
    if value < 0.0 {
        log::warn!("eigenvalue p{index} = {value:e} clamped to 0");
        return Ok(0.0);
    }
    Ok(value)
}

/// √ of one block from its spectral decomposition; returns (top, bottom, off-diagonal).
fn block_sqrt(
    a: f64,
    b: f64,
    c: Complex64,
    e: &BlockEigen,
    pp: f64,
    pm: f64,
) -> (f64, f64, Complex64) {
    if c.norm() < DEGENERATE_OFFDIAG {
        return (
            a.max(0.0).sqrt(),
            b.max(0.0).sqrt(),
            Complex64::new(0.0, 0.0),
        );
    }
    let c2 = c.norm_sqr();
    let n_plus = c2 + e.shift_plus * e.shift_plus;
    let n_minus = c2 + e.shift_minus * e.shift_minus;
    let w_plus = pp.sqrt() / n_plus;
    let w_minus = pm.sqrt() / n_minus;
    let top = c2 * (w_plus + w_minus);
    let bottom = w_plus * e.shift_plus * e.shift_plus + w_minus * e.shift_minus * e.shift_minus;
    let off = c * (w_plus * e.shift_plus + w_minus * e.shift_minus);
    (top, bottom, off)
}

impl TwoSpinState {
    pub fn from_entries(
        rho11: f64,
        rho22: f64,
        rho33: f64,
        rho44: f64,
        rho14: Complex64,
        rho23: Complex64,
    ) -> Result<Self, StateError> {
        let all = [
            rho11, rho22, rho33, rho44, rho14.re, rho14.im, rho23.re, rho23.im,
        ];
        if all.iter().any(|x| !x.is_finite()) {
            return Err(StateError::NotFinite);
        }
        let tr = rho11 + rho22 + rho33 + rho44;
        if (tr - 1.0).abs() > TRACE_TOL {
            return Err(StateError::Trace(tr));
        }
        let outer = block_eigen(rho11, rho44, rho14.norm());
        let inner = block_eigen(rho22, rho33, rho23.norm());
        let spectrum = [
            clamp_eigen(1, outer.p_plus)?,
            clamp_eigen(2, outer.p_minus)?,
            clamp_eigen(3, inner.p_plus)?,
            clamp_eigen(4, inner.p_minus)?,
        ];
        let (alpha, delta, lambda) =
            block_sqrt(rho11, rho44, rho14, &outer, spectrum[0], spectrum[1]);
        let (beta, gamma, nu) = block_sqrt(rho22, rho33, rho23, &inner, spectrum[2], spectrum[3]);
        Ok(TwoSpinState {
            rho11,
            rho22,
            rho33,
            rho44,
            rho14,
            rho23,
            spectrum,
            sqrt_elems: SqrtElems {
                alpha,
                beta,
                gamma,
                delta,
                lambda,
                nu,
            },
            outer,
            inner,
        })
    }

    pub fn to_matrix(&self) -> Mat4 {
        x_matrix(
            self.rho11, self.rho22, self.rho33, self.rho44, self.rho14, self.rho23,
        )
    }

    pub fn trace(&self) -> f64 {
        self.rho11 + self.rho22 + self.rho33 + self.rho44
    }

    pub fn diagonal(&self) -> [f64; 4] {
        [self.rho11, self.rho22, self.rho33, self.rho44]
    }

    /// Normalised eigenvectors, row i belonging to spectrum[i].
    ///
    /// A block with |off-diagonal| below [`DEGENERATE_OFFDIAG`] uses basis vectors,
    /// the larger diagonal entry paired with the larger eigenvalue.
    pub fn eigenvectors(&self) -> [[Complex64; 4]; 4] {
        let mut v = [[Complex64::new(0.0, 0.0); 4]; 4];
        let (a, b) = block_vectors(self.rho14, self.rho11, self.rho44, &self.outer);
        for (row, (x, y)) in [(0, a), (1, b)] {
            v[row][0] = x;
            v[row][3] = y;
        }
        let (a, b) = block_vectors(self.rho23, self.rho22, self.rho33, &self.inner);
        for (row, (x, y)) in [(2, a), (3, b)] {
            v[row][1] = x;
            v[row][2] = y;
        }
        v
    }
}

type Pair = (Complex64, Complex64);

fn block_vectors(c: Complex64, a: f64, b: f64, e: &BlockEigen) -> (Pair, Pair) {
    let one = Complex64::new(1.0, 0.0);
    let zero = Complex64::new(0.0, 0.0);
    if c.norm() < DEGENERATE_OFFDIAG {
        return if a >= b {
            ((one, zero), (zero, one))
        } else {
            ((zero, one), (one, zero))
        };
    }
    let c2 = c.norm_sqr();
    let norm_plus = (c2 + e.shift_plus * e.shift_plus).sqrt();
    let norm_minus = (c2 + e.shift_minus * e.shift_minus).sqrt();
    (
        (c / norm_plus, Complex64::new(e.shift_plus / norm_plus, 0.0)),
        (
            c / norm_minus,
            Complex64::new(e.shift_minus / norm_minus, 0.0),
        ),
    )
}

pub fn build_state(obs: &PairObservables) -> Result<TwoSpinState, StateError> {
    let rho11 = obs.sz + obs.szsz + 0.25;
    let rho44 = -obs.sz + obs.szsz + 0.25;
    let rho22 = 0.25 - obs.szsz;
    let rho14 = Complex64::new(obs.sxsx - obs.sysy, 0.0);
    let rho23 = Complex64::new(obs.sxsx + obs.sysy, 0.0);
    TwoSpinState::from_entries(rho11, rho22, rho22, rho44, rho14, rho23)
}

pub fn spectrum(state: &TwoSpinState) -> [f64; 4] {
    state.spectrum
}

pub fn matrix_sqrt(state: &TwoSpinState) -> SqrtElems {
    state.sqrt_elems
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{max_abs_diff4, mul4};

    fn obs(sz: f64, sxsx: f64, sysy: f64, szsz: f64) -> PairObservables {
        PairObservables::from_correlators(sz, sxsx, sysy, szsz)
    }

    fn c(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    #[test]
    fn zero_correlators_give_maximally_mixed() {
        let s = build_state(&obs(0.0, 0.0, 0.0, 0.0)).unwrap();
        assert_eq!(s.diagonal(), [0.25; 4]);
        assert_eq!(s.spectrum, [0.25; 4]);
        let r = s.sqrt_elems;
        assert_eq!([r.alpha, r.beta, r.gamma, r.delta], [0.5; 4]);
        assert_eq!(r.lambda, c(0.0));
        assert_eq!(r.nu, c(0.0));
    }

    #[test]
    fn polarized_state() {
        let s = build_state(&obs(0.5, 0.0, 0.0, 0.25)).unwrap();
        assert_eq!(s.diagonal(), [1.0, 0.0, 0.0, 0.0]);
        assert_eq!(s.sqrt_elems.to_matrix(), s.to_matrix());
    }

    #[test]
    fn bell_state() {
        let s = build_state(&obs(0.0, 0.25, -0.25, 0.25)).unwrap();
        assert_eq!(s.rho11, 0.5);
        assert_eq!(s.rho44, 0.5);
        assert_eq!(s.rho14, c(0.5));
        assert_eq!(s.rho23, c(0.0));
        assert_eq!(s.rho22, 0.0);
        let p = s.spectrum;
        assert!((p[0] - 1.0).abs() < 1e-15 && p[1].abs() < 1e-15);
        assert!(p[2].abs() < 1e-15 && p[3].abs() < 1e-15);
        let sq = s.sqrt_elems.to_matrix();
        assert!(max_abs_diff4(&sq, &s.to_matrix()) < 1e-15);
    }

    #[test]
    fn spectrum_worked_example() {
        let s = TwoSpinState::from_entries(0.5, 0.1, 0.1, 0.3, c(0.1), c(0.0)).unwrap();
        let r = 0.02f64.sqrt();
        assert!((s.spectrum[0] - (0.4 + r)).abs() < 1e-15);
        assert!((s.spectrum[1] - (0.4 - r)).abs() < 1e-15);
        assert!((s.spectrum[2] - 0.1).abs() < 1e-15);
        assert!((s.spectrum[3] - 0.1).abs() < 1e-15);
    }

    #[test]
    fn sqrt_squares_back() {
        let s = TwoSpinState::from_entries(
            0.4,
            0.2,
            0.15,
            0.25,
            Complex64::new(0.1, -0.05),
            Complex64::new(-0.08, 0.03),
        )
        .unwrap();
        let sq = s.sqrt_elems.to_matrix();
        assert!(max_abs_diff4(&mul4(&sq, &sq), &s.to_matrix()) < 1e-14);
    }

    #[test]
    fn degenerate_blocks_take_diagonal_root() {
        let s = TwoSpinState::from_entries(0.3, 0.2, 0.2, 0.3, c(0.0), c(0.0)).unwrap();
        let r = s.sqrt_elems;
        assert_eq!(r.alpha, 0.3f64.sqrt());
        assert_eq!(r.delta, 0.3f64.sqrt());
        assert_eq!(r.beta, 0.2f64.sqrt());
        assert_eq!(r.lambda, c(0.0));
        assert_eq!(r.nu, c(0.0));
    }

    #[test]
    fn hard_negative_eigenvalue_rejected() {
        let e = TwoSpinState::from_entries(0.25, 0.25, 0.25, 0.25, c(0.4), c(0.0)).unwrap_err();
        assert!(matches!(e, StateError::NegativeEigenvalue { index: 2, .. }));
    }

    #[test]
    fn small_negative_eigenvalue_clamped() {
        // p2 = 0.25 - |ρ14| = -5e-10
        let s =
            TwoSpinState::from_entries(0.25, 0.25, 0.25, 0.25, c(0.25 + 5e-10), c(0.0)).unwrap();
        assert_eq!(s.spectrum[1], 0.0);
    }

    #[test]
    fn bad_trace_rejected() {
        let e = TwoSpinState::from_entries(0.3, 0.3, 0.3, 0.3, c(0.0), c(0.0)).unwrap_err();
        assert!(matches!(e, StateError::Trace(_)));
    }

    #[test]
    fn eigenvectors_are_unit_and_diagonalise() {
        let s = TwoSpinState::from_entries(0.35, 0.22, 0.22, 0.21, c(-0.07), c(0.13)).unwrap();
        let m = s.to_matrix();
        let v = s.eigenvectors();
        for (i, vec) in v.iter().enumerate() {
            let norm: f64 = vec.iter().map(|x| x.norm_sqr()).sum();
            assert!((norm - 1.0).abs() < 1e-12);
            for row in 0..4 {
                let mv: Complex64 = (0..4).map(|k| m[row][k] * vec[k]).sum();
                assert!((mv - vec[row] * s.spectrum[i]).norm() < 1e-14);
            }
        }
    }
}
