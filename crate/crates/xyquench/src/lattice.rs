//! Model parameters, momentum grid and single-particle dispersion.
//!
//! Units: ħ = 1, k_B = 1. A temperature of exactly zero selects the ground-state
//! branch (tanh(βΓ) → 1) rather than a large β.

use std::f64::consts::PI;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ParamError {
    #[error("N must be even (got {0})")]
    OddSize(usize),
    #[error("N must be >= 4 (got {0})")]
    TooSmall(usize),
    #[error("T must be ≥ 0 (got {0})")]
    NegativeTemperature(f64),
    #[error("{name} must be finite (got {value})")]
    NotFinite { name: &'static str, value: f64 },
}

/// Full configuration of one quench experiment.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParams {
    pub n: usize,
    pub gamma: f64,
    pub j0: f64,
    pub j1: f64,
    pub h0: f64,
    pub h1: f64,
    pub temperature: f64,
}

impl ModelParams {
    pub fn new(
        n: usize,
        gamma: f64,
        j0: f64,
        j1: f64,
        h0: f64,
        h1: f64,
        temperature: f64,
    ) -> Result<Self, ParamError> {
        let p = ModelParams {
            n,
            gamma,
            j0,
            j1,
            h0,
            h1,
            temperature,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<(), ParamError> {
        if self.n % 2 != 0 {
            return Err(ParamError::OddSize(self.n));
        }
        if self.n < 4 {
            return Err(ParamError::TooSmall(self.n));
        }
        for (name, value) in [
            ("gamma", self.gamma),
            ("J0", self.j0),
            ("J1", self.j1),
            ("h0", self.h0),
            ("h1", self.h1),
            ("T", self.temperature),
        ] {
            if !value.is_finite() {
                return Err(ParamError::NotFinite { name, value });
            }
        }
        if self.temperature < 0.0 {
            return Err(ParamError::NegativeTemperature(self.temperature));
        }
        Ok(())
    }

    pub fn with_h1(self, h1: f64) -> Result<Self, ParamError> {
        ModelParams { h1, ..self }.validate_into()
    }

    pub fn with_size(self, n: usize) -> Result<Self, ParamError> {
        ModelParams { n, ..self }.validate_into()
    }

    pub fn with_temperature(self, temperature: f64) -> Result<Self, ParamError> {
        ModelParams {
            temperature,
            ..self
        }
        .validate_into()
    }

    fn validate_into(self) -> Result<Self, ParamError> {
        self.validate()?;
        Ok(self)
    }

    /// True when the post-quench Hamiltonian equals the initial one.
    pub fn is_zero_quench(&self) -> bool {
        self.j0 == self.j1 && self.h0 == self.h1
    }
}

pub fn make_params(
    n: usize,
    gamma: f64,
    j0: f64,
    j1: f64,
    h0: f64,
    h1: f64,
    temperature: f64,
) -> Result<ModelParams, ParamError> {
    ModelParams::new(n, gamma, j0, j1, h0, h1, temperature)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MomentumMode {
    pub p: usize,
    pub phi: f64,
    pub sin_phi: f64,
    pub cos_phi: f64,
    pub delta: f64,
    pub gamma0: f64,
    pub gamma1: f64,
}

/// φ_p = 2πp/N together with its sine and cosine.
///
/// Quarter-turn angles get exact trigonometric values so that the gap closes to an
/// exact zero at φ = π.
pub fn mode_angle(p: usize, n: usize) -> (f64, f64, f64) {
    let phi = 2.0 * PI * p as f64 / n as f64;
    let (s, c) = if 2 * p == n {
        (0.0, -1.0)
    } else if 4 * p == n {
        (1.0, 0.0)
    } else if 4 * p == 3 * n {
        (-1.0, 0.0)
    } else if p == 0 || p == n {
        (0.0, 1.0)
    } else {
        phi.sin_cos()
    };
    (phi, s, c)
}

fn exact_sin_cos(phi: f64) -> (f64, f64) {
    if phi == PI {
        (0.0, -1.0)
    } else if phi == 0.5 * PI {
        (1.0, 0.0)
    } else if phi == 0.0 {
        (0.0, 1.0)
    } else {
        phi.sin_cos()
    }
}

/// Γ(h, J) = sqrt((J cos φ + h)² + γ²J² sin²φ).
pub fn dispersion(h: f64, j: f64, gamma: f64, phi: f64) -> f64 {
    let (s, c) = exact_sin_cos(phi);
    dispersion_sc(h, j, gamma, s, c)
}

#[inline]
pub(crate) fn dispersion_sc(h: f64, j: f64, gamma: f64, sin_phi: f64, cos_phi: f64) -> f64 {
    (j * cos_phi + h).hypot(gamma * j * sin_phi)
}

/// The N/2 modes p = 1 … N/2 in ascending order.
pub fn momentum_grid(params: &ModelParams) -> Vec<MomentumMode> {
    (1..=params.n / 2)
        .map(|p| {
            let (phi, s, c) = mode_angle(p, params.n);
            MomentumMode {
                p,
                phi,
                sin_phi: s,
                cos_phi: c,
                delta: 2.0 * params.gamma * s,
                gamma0: dispersion_sc(params.h0, params.j0, params.gamma, s, c),
                gamma1: dispersion_sc(params.h1, params.j1, params.gamma, s, c),
            }
        })
        .collect()
}
