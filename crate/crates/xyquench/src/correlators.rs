//! Closed-form one- and two-point functions after a sudden quench.
//!
//! Every observable is a momentum sum over p = 1 … N/2. Sums run in ascending p with
//! compensated accumulation, so a given (params, t) always produces the same bits.

use num_complex::Complex64;
use thiserror::Error;

use crate::lattice::{momentum_grid, ModelParams, ParamError};
use crate::summation::NeumaierSum;

/// Below this Γ1 the sin²(2tΓ1)/Γ1² and sin(4tΓ1)/Γ1 factors take their Γ1 → 0 limits.
pub const GAMMA_LIMIT_EPS: f64 = 1e-8;

/// Tolerance on the imaginary part of ⟨SᶻSᶻ⟩ before it is discarded.
pub const REALITY_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CorrelatorError {
    #[error(transparent)]
    Param(#[from] ParamError),
    #[error("unsupported separation r = {0}; only r = 0 and r = 1 are available")]
    UnsupportedSeparation(i64),
    #[error("<SzSz> has imaginary residue {0:e}")]
    ComplexResidue(f64),
}

/// F, Q and G entries for one separation r.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FqgElements {
    /// F_{l,l+r}
    pub f_lm: Complex64,
    /// F_{l+r,l}
    pub f_ml: Complex64,
    /// F_{l,l}
    pub f_ll: Complex64,
    /// Q_{l,l+r}
    pub q: Complex64,
    /// G_{l,l+r}
    pub g: Complex64,
}

/// Nearest-neighbour observables at one (params, t) point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairObservables {
    pub sz: f64,
    pub sxsx: f64,
    pub sysy: f64,
    pub szsz: f64,
    pub q_elem: Complex64,
    pub g_elem: Complex64,
    pub f_lm: Complex64,
    pub f_ml: Complex64,
    pub f_ll: Complex64,
}

impl PairObservables {
    /// Observables given directly, with the F/Q/G fields left at zero.
    pub fn from_correlators(sz: f64, sxsx: f64, sysy: f64, szsz: f64) -> Self {
        let zero = Complex64::new(0.0, 0.0);
        PairObservables {
            sz,
            sxsx,
            sysy,
            szsz,
            q_elem: zero,
            g_elem: zero,
            f_lm: zero,
            f_ml: zero,
            f_ll: zero,
        }
    }
}

#[derive(Debug, Clone, Copy)]
struct ModeTerms {
    cos_phi: f64,
    sin_phi: f64,
    gamma1: f64,
    // F summand = cos(rφ)(x0 + x1 s2) + sin(rφ)(y0 + y1 s2); Q imaginary summand = z1 s4.
    x0: f64,
    x1: f64,
    y0: f64,
    y1: f64,
    z1: f64,
}

/// Raw momentum sums, already divided by N.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MomentumSums {
    /// F(0)
    pub f0: f64,
    /// F(+1) = F_{l,l+1}
    pub f_plus: f64,
    /// F(−1) = F_{l+1,l}
    pub f_minus: f64,
    /// Re Q_{l,l+1}
    pub qa: f64,
    /// Im Q_{l,l+1}
    pub qb: f64,
}

/// Per-mode coefficients for one parameter set, reusable across many times.
#[derive(Debug, Clone)]
pub struct QuenchKernel {
    n: usize,
    modes: Vec<ModeTerms>,
    qa: f64,
}

impl QuenchKernel {
    pub fn new(params: &ModelParams) -> Result<Self, CorrelatorError> {
        params.validate()?;
        let ModelParams {
            gamma: _,
            j0,
            j1,
            h0,
            h1,
            temperature,
            ..
        } = *params;
        let quench_a = j1 * (j0 * h1 - j1 * h0);
        let quench_k = j1 * h0 - j0 * h1;
        let mut qa = NeumaierSum::new();
        let modes = momentum_grid(params)
            .into_iter()
            .map(|m| {
                qa.add(2.0 * m.cos_phi);
                // A mode with Γ0 = 0 has every numerator vanishing as well; its summand is 0.
                let a0 = if m.gamma0 == 0.0 {
                    0.0
                } else if temperature == 0.0 {
                    1.0 / m.gamma0
                } else {
                    (m.gamma0 / temperature).tanh() / m.gamma0
                };
                let d = m.delta;
                ModeTerms {
                    cos_phi: m.cos_phi,
                    sin_phi: m.sin_phi,
                    gamma1: m.gamma1,
                    x0: 2.0 * a0 * (j0 * m.cos_phi + h0),
                    x1: a0 * quench_a * d * d,
                    y0: a0 * d * j0,
                    y1: 2.0 * a0 * d * quench_k * (j1 * m.cos_phi + h1),
                    z1: a0 * quench_k * d * m.sin_phi,
                }
            })
            .collect();
        let n = params.n;
        Ok(QuenchKernel {
            n,
            modes,
            qa: qa.value() / n as f64,
        })
    }

    pub fn size(&self) -> usize {
        self.n
    }

    /// Momentum sums at time t; t ≤ 0 gives the pre-quench equilibrium values.
    pub fn sums(&self, t: f64) -> MomentumSums {
        let t = t.max(0.0);
        let mut sx = NeumaierSum::new();
        let mut scx = NeumaierSum::new();
        let mut ssy = NeumaierSum::new();
        let mut sq = NeumaierSum::new();
        for m in &self.modes {
            let (s2, s4) = if m.gamma1 < GAMMA_LIMIT_EPS {
                (4.0 * t * t, 4.0 * t)
            } else {
                let (sn, cs) = (2.0 * t * m.gamma1).sin_cos();
                (sn * sn / (m.gamma1 * m.gamma1), 2.0 * sn * cs / m.gamma1)
            };
            let x = m.x0 + m.x1 * s2;
            let y = m.y0 + m.y1 * s2;
            sx.add(x);
            scx.add(m.cos_phi * x);
            ssy.add(m.sin_phi * y);
            sq.add(m.z1 * s4);
        }
        let inv_n = 1.0 / self.n as f64;
        let (cx, sy) = (scx.value(), ssy.value());
        MomentumSums {
            f0: sx.value() * inv_n,
            f_plus: (cx + sy) * inv_n,
            f_minus: (cx - sy) * inv_n,
            qa: self.qa,
            qb: sq.value() * inv_n,
        }
    }

    pub fn fqg(&self, t: f64, r: i64) -> Result<FqgElements, CorrelatorError> {
        let s = self.sums(t);
        let f_ll = Complex64::new(s.f0, 0.0);
        match r {
            0 => Ok(FqgElements {
                f_lm: f_ll,
                f_ml: f_ll,
                f_ll,
                q: Complex64::new(1.0, 0.0),
                g: Complex64::new(-1.0, 0.0),
            }),
            1 => Ok(FqgElements {
                f_lm: Complex64::new(s.f_plus, 0.0),
                f_ml: Complex64::new(s.f_minus, 0.0),
                f_ll,
                q: Complex64::new(s.qa, s.qb),
                g: Complex64::new(-s.qa, s.qb),
            }),
            other => Err(CorrelatorError::UnsupportedSeparation(other)),
        }
    }

    pub fn observables(&self, t: f64) -> Result<PairObservables, CorrelatorError> {
        let e = self.fqg(t, 1)?;
        assemble(e)
    }
}

/// Wick combination of the nearest-neighbour F, Q, G entries.
pub(crate) fn assemble(e: FqgElements) -> Result<PairObservables, CorrelatorError> {
    let zz = 0.25 * (e.f_ll * e.f_ll - e.q * e.g - e.f_ml * e.f_lm);
    if zz.im.abs() > REALITY_TOL {
        return Err(CorrelatorError::ComplexResidue(zz.im));
    }
    Ok(PairObservables {
        sz: 0.5 * e.f_ll.re,
        sxsx: 0.25 * e.f_lm.re,
        sysy: 0.25 * e.f_ml.re,
        szsz: zz.re,
        q_elem: e.q,
        g_elem: e.g,
        f_lm: e.f_lm,
        f_ml: e.f_ml,
        f_ll: e.f_ll,
    })
}

pub fn magnetization_z(params: &ModelParams, t: f64) -> Result<f64, CorrelatorError> {
    Ok(0.5 * QuenchKernel::new(params)?.sums(t).f0)
}

pub fn fqg_elements(params: &ModelParams, t: f64, r: i64) -> Result<FqgElements, CorrelatorError> {
    if !(0..=1).contains(&r) {
        return Err(CorrelatorError::UnsupportedSeparation(r));
    }
    QuenchKernel::new(params)?.fqg(t, r)
}

pub fn pair_observables(params: &ModelParams, t: f64) -> Result<PairObservables, CorrelatorError> {
    QuenchKernel::new(params)?.observables(t)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::make_params;

    fn p(n: usize, gamma: f64, h0: f64, h1: f64, temp: f64) -> ModelParams {
        make_params(n, gamma, 1.0, 1.0, h0, h1, temp).unwrap()
    }

    #[test]
    fn magnetization_zero_field_eight_sites() {
        let params = p(8, 1.0, 0.0, 0.0, 0.0);
        for t in [0.0, 0.4, 3.0] {
            assert!((magnetization_z(&params, t).unwrap() + 0.125).abs() < 1e-15);
        }
    }

    #[test]
    fn magnetization_saturates_at_large_field() {
        let params = p(64, 1.0, 1e9, 1e9, 0.0);
        assert!((magnetization_z(&params, 0.0).unwrap() - 0.5).abs() < 1e-8);
    }

    #[test]
    fn magnetization_matches_thermal_formula_at_t0() {
        let params = p(20, 0.6, 0.3, 1.7, 0.8);
        let mut expect = 0.0;
        for m in momentum_grid(&params) {
            expect += (m.gamma0 / 0.8).tanh() * (m.cos_phi + 0.3) / m.gamma0;
        }
        expect /= 20.0;
        assert!((magnetization_z(&params, 0.0).unwrap() - expect).abs() < 1e-15);
    }

    #[test]
    fn magnetization_vanishes_at_infinite_temperature() {
        let params = p(16, 1.0, 0.7, 1.0, 1e300);
        assert!(magnetization_z(&params, 2.0).unwrap().abs() < 1e-250);
    }

    #[test]
    fn onsite_q_and_g() {
        let params = p(12, 0.4, 0.2, 1.3, 0.3);
        let e = fqg_elements(&params, 1.7, 0).unwrap();
        assert_eq!(e.q, Complex64::new(1.0, 0.0));
        assert_eq!(e.g, Complex64::new(-1.0, 0.0));
    }

    #[test]
    fn ising_zero_field_f_entries() {
        let e = fqg_elements(&p(8, 1.0, 0.0, 0.0, 0.0), 0.0, 1).unwrap();
        assert!((e.f_lm.re - 1.0).abs() < 1e-15);
        assert!(e.f_ml.re.abs() < 1e-15);
    }

    #[test]
    fn rejects_long_separation() {
        let params = p(8, 1.0, 0.0, 0.0, 0.0);
        assert_eq!(
            fqg_elements(&params, 0.0, 2).unwrap_err(),
            CorrelatorError::UnsupportedSeparation(2)
        );
        assert!(fqg_elements(&params, 0.0, -1).is_err());
    }

    #[test]
    fn ising_zero_field_pair_values() {
        let o = pair_observables(&p(8, 1.0, 0.0, 0.0, 0.0), 0.0).unwrap();
        assert!((o.sxsx - 0.25).abs() < 1e-15);
        assert!(o.sysy.abs() < 1e-15);
    }

    #[test]
    fn infinite_temperature_kills_correlations() {
        let o = pair_observables(&p(16, 1.0, 0.7, 1.0, 1e300), 1.3).unwrap();
        assert!(o.sxsx.abs() < 1e-250 && o.sysy.abs() < 1e-250 && o.sz.abs() < 1e-250);
    }

    #[test]
    fn zero_quench_is_static() {
        let params = p(24, 0.7, 0.45, 0.45, 0.6);
        let a = pair_observables(&params, 0.0).unwrap();
        let b = pair_observables(&params, 5.3).unwrap();
        assert!((a.sz - b.sz).abs() < 1e-14);
        assert!((a.sxsx - b.sxsx).abs() < 1e-14);
        assert!((a.sysy - b.sysy).abs() < 1e-14);
        assert!((a.szsz - b.szsz).abs() < 1e-14);
        assert!((a.q_elem - b.q_elem).norm() < 1e-14);
    }

    #[test]
    fn negative_time_is_equilibrium() {
        let params = p(24, 1.0, 0.7, 1.0, 0.0);
        assert_eq!(
            pair_observables(&params, -3.0).unwrap(),
            pair_observables(&params, 0.0).unwrap()
        );
    }

    #[test]
    fn critical_quench_is_finite() {
        let o = pair_observables(&p(40, 1.0, 0.7, 1.0, 0.0), 12.5).unwrap();
        assert!(o.sz.is_finite() && o.szsz.is_finite());
    }

    #[test]
    fn thermal_damping_of_xx() {
        let cold = pair_observables(&p(100, 1.0, 0.7, 0.7, 0.0), 0.0).unwrap();
        let hot = pair_observables(&p(100, 1.0, 0.7, 0.7, 5.0), 0.0).unwrap();
        assert!(hot.sxsx.abs() < cold.sxsx.abs());
    }
}
