//! Vibrational relaxation of a guest vibron into the host lattice.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::numerics::quad::{self, QuadratureError};
use crate::units::{self, bose_unchecked};
use crate::vibronic::PhononSpectralDensity;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RelaxationError {
    #[error("invalid relaxation input: {0}")]
    Invalid(String),
    #[error("vibron at {omega:e} rad/s exceeds the two-phonon limit 2ω_max = {limit:e} rad/s")]
    Domain { omega: f64, limit: f64 },
    #[error(transparent)]
    Quadrature(#[from] QuadratureError),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, schemars::JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct RelaxationInput {
    /// rad/s
    #[serde(deserialize_with = "units::de::rad_s")]
    #[schemars(with = "units::QuantityInput")]
    pub vibron_frequency: f64,
    /// rad/s
    #[serde(deserialize_with = "units::de::rad_s")]
    #[schemars(with = "units::QuantityInput")]
    pub phonon_cutoff: f64,
    /// Lower-lying guest vibrons, rad/s.
    #[serde(default, deserialize_with = "units::de::vec_rad_s")]
    #[schemars(with = "Vec<units::QuantityInput>")]
    pub other_vibron_frequencies: Vec<f64>,
}

impl RelaxationInput {
    pub fn new(vibron_frequency: f64, phonon_cutoff: f64, others: Vec<f64>) -> Self {
        Self {
            vibron_frequency,
            phonon_cutoff,
            other_vibron_frequencies: others,
        }
    }

    pub fn validate(&self) -> Result<(), RelaxationError> {
        if !(self.vibron_frequency > 0.0 && self.phonon_cutoff > 0.0) {
            return Err(RelaxationError::Invalid(
                "vibron frequency and phonon cutoff must be positive".into(),
            ));
        }
        if let Some(w) = self
            .other_vibron_frequencies
            .iter()
            .find(|&&w| !(w > 0.0 && w < self.vibron_frequency))
        {
            return Err(RelaxationError::Invalid(format!(
                "listed vibron {w:e} rad/s must lie in (0, ω_v)"
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, schemars::JsonSchema)]
#[serde(rename_all = "snake_case")]
pub enum RelaxationChannel {
    TwoPhonon,
    VibronAssisted,
    Intramolecular,
}

pub fn classify_relaxation(input: &RelaxationInput) -> Result<RelaxationChannel, RelaxationError> {
    input.validate()?;
    let limit = 2.0 * input.phonon_cutoff;
    let w = input.vibron_frequency;
    Ok(if w <= limit {
        RelaxationChannel::TwoPhonon
    } else if input.other_vibron_frequencies.iter().any(|&wj| w - wj <= limit) {
        RelaxationChannel::VibronAssisted
    } else {
        RelaxationChannel::Intramolecular
    })
}

/// Golden-rule decay of a vibron into two lattice phonons through a cubic
/// anharmonic coupling (rad/s):
///
/// ```text
/// Γ = 2π V² ∫₀^{ω_v} ρ(ω) ρ(ω_v − ω) (n̄(ω)+1)(n̄(ω_v−ω)+1) dω
/// ```
///
/// with ρ the one-phonon density J(ω)/ω² normalized to unit area on
/// (0, ω_max]. A lattice without coupling weight has no density and decays
/// at rate zero.
pub fn two_phonon_rate(
    vibron_frequency: f64,
    phonons: &PhononSpectralDensity,
    coupling: f64,
    temperature: f64,
) -> Result<f64, RelaxationError> {
    phonons
        .validate()
        .map_err(|e| RelaxationError::Invalid(e.to_string()))?;
    if !(vibron_frequency > 0.0) || !(temperature >= 0.0) {
        return Err(RelaxationError::Invalid("need ω_v > 0 and temperature ≥ 0".into()));
    }
    let wmax = phonons.cutoff_frequency;
    if vibron_frequency > 2.0 * wmax {
        return Err(RelaxationError::Domain {
            omega: vibron_frequency,
            limit: 2.0 * wmax,
        });
    }
    if coupling == 0.0 || phonons.coupling_weight == 0.0 {
        return Ok(0.0);
    }
    let norm = quad::integrate(|w| phonons.huang_rhys_density(w), 0.0, wmax, 1e-12, 0.0)?;
    let rho = |w: f64| phonons.huang_rhys_density(w) / norm;
    let lo = (vibron_frequency - wmax).max(0.0);
    let hi = vibron_frequency.min(wmax);
    if hi <= lo {
        return Ok(0.0);
    }
    let conv = quad::integrate(
        |w| {
            let w2 = vibron_frequency - w;
            rho(w) * rho(w2) * (bose_unchecked(w, temperature) + 1.0) * (bose_unchecked(w2, temperature) + 1.0)
        },
        lo,
        hi,
        1e-10,
        0.0,
    )?;
    Ok(2.0 * PI * coupling * coupling * conv)
}
