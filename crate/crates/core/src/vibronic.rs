//! Franck–Condon and phonon-sideband machinery for the S1 → S0 emission.
//!
//! The emitted spectrum is built as a product of independent displaced
//! oscillators: every vibron mode contributes a progression of lines at
//! `zpl − m ω_i`, and every such line (the ZPL included) carries the same
//! phonon structure: a sharp zero-phonon Lorentzian with weight `α_ph`
//! and a one-phonon wing with the remaining `1 − α_ph`.
//!
//! The phonon spectral density is the superohmic form
//!
//! ```text
//! J(ω) = w · ω³ / ω_p² · exp(−ω / ω_p),   0 < ω ≤ ω_max
//! ```
//!
//! so `J(ω)/ω²` is a Huang–Rhys density per rad/s whose zero-temperature
//! integral is `w` (for ω_max ≫ ω_p), and the one-phonon emission wing at
//! T = 0 peaks exactly at `ω_p` below the line it dresses.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::grid::FrequencyGrid;
use crate::numerics::quad::{self, QuadratureError};
use crate::units::{self, bose_unchecked, hz, thermal_frequency};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum VibronicError {
    #[error("invalid vibronic model: {0}")]
    InvalidModel(String),
    #[error("Debye-Waller integral failed: {0}")]
    IntegrationFailure(#[from] QuadratureError),
    #[error("grid [{start:e}, {stop:e}] rad/s does not cover the required span [{need_lo:e}, {need_hi:e}]")]
    GridTooNarrow {
        start: f64,
        stop: f64,
        need_lo: f64,
        need_hi: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, schemars::JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct VibronMode {
    /// rad/s
    #[serde(deserialize_with = "units::de::rad_s")]
    #[schemars(with = "units::QuantityInput")]
    pub frequency: f64,
    pub huang_rhys: f64,
    /// Decay rate of one quantum in this mode, rad/s. Sets the width of the
    /// vibronic lines.
    #[serde(deserialize_with = "units::de::rad_s")]
    #[schemars(with = "units::QuantityInput")]
    pub relaxation_rate: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, schemars::JsonSchema)]
#[serde(rename_all = "snake_case")]
pub enum SpectralShape {
    #[default]
    SuperohmicExp,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, schemars::JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct PhononSpectralDensity {
    /// Zero-temperature phonon Huang–Rhys factor w.
    pub coupling_weight: f64,
    /// ω_p: position of the T = 0 one-phonon wing maximum, rad/s.
    #[serde(deserialize_with = "units::de::rad_s")]
    #[schemars(with = "units::QuantityInput")]
    pub peak_frequency: f64,
    /// ω_max: lattice phonon cutoff, rad/s.
    #[serde(deserialize_with = "units::de::rad_s")]
    #[schemars(with = "units::QuantityInput")]
    pub cutoff_frequency: f64,
    #[serde(default)]
    pub shape: SpectralShape,
}

impl Default for PhononSpectralDensity {
    /// Uncoupled lattice with a 1.75 THz wing peak and 4.5 THz cutoff.
    fn default() -> Self {
        Self {
            coupling_weight: 0.0,
            peak_frequency: hz(1.75e12),
            cutoff_frequency: hz(4.5e12),
            shape: SpectralShape::SuperohmicExp,
        }
    }
}

impl PhononSpectralDensity {
    pub fn with_weight(weight: f64) -> Self {
        Self {
            coupling_weight: weight,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<(), VibronicError> {
        if !(self.coupling_weight >= 0.0) {
            return Err(VibronicError::InvalidModel("phonon coupling weight must be ≥ 0".into()));
        }
        if !(self.peak_frequency > 0.0 && self.cutoff_frequency > self.peak_frequency) {
            return Err(VibronicError::InvalidModel(
                "need cutoff_frequency > peak_frequency > 0".into(),
            ));
        }
        Ok(())
    }

    /// J(ω) in rad/s; zero outside (0, ω_max].
    pub fn density(&self, omega: f64) -> f64 {
        if omega <= 0.0 || omega > self.cutoff_frequency {
            return 0.0;
        }
        let wp = self.peak_frequency;
        match self.shape {
            SpectralShape::SuperohmicExp => self.coupling_weight * omega.powi(3) / (wp * wp) * (-omega / wp).exp(),
        }
    }

    /// J(ω)/ω², the Huang–Rhys density per rad/s.
    pub fn huang_rhys_density(&self, omega: f64) -> f64 {
        if omega <= 0.0 || omega > self.cutoff_frequency {
            return 0.0;
        }
        let wp = self.peak_frequency;
        match self.shape {
            SpectralShape::SuperohmicExp => self.coupling_weight * omega / (wp * wp) * (-omega / wp).exp(),
        }
    }

    /// ∫ J(ω)/ω² (2n̄(ω,T) + 1) dω: the thermally weighted phonon Huang–Rhys factor.
    pub fn thermal_huang_rhys(&self, temperature: f64) -> Result<f64, QuadratureError> {
        if self.coupling_weight == 0.0 {
            return Ok(0.0);
        }
        quad::integrate(
            |w| self.huang_rhys_density(w) * (2.0 * bose_unchecked(w, temperature) + 1.0),
            0.0,
            self.cutoff_frequency,
            1e-10,
            0.0,
        )
    }
}

/// Optional ZPL pure dephasing: `constant + prefactor · exp(−E_a / k_B T)`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize, schemars::JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct ZplDephasing {
    /// rad/s
    #[serde(default)]
    pub constant: f64,
    /// rad/s
    #[serde(default)]
    pub activated_prefactor: f64,
    /// Activation energy as an angular frequency, rad/s.
    #[serde(default)]
    pub activation_energy: f64,
}

impl ZplDephasing {
    pub fn width(&self, temperature: f64) -> f64 {
        let activated = if temperature > 0.0 && self.activated_prefactor != 0.0 {
            self.activated_prefactor * (-self.activation_energy / thermal_frequency(temperature)).exp()
        } else {
            0.0
        };
        self.constant + activated
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, schemars::JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct VibronicModel {
    /// rad/s
    #[serde(deserialize_with = "units::de::rad_s")]
    #[schemars(with = "units::QuantityInput")]
    pub zpl_frequency: f64,
    /// S1 radiative decay rate γ0, rad/s; also the natural ZPL FWHM.
    #[serde(deserialize_with = "units::de::rad_s")]
    #[schemars(with = "units::QuantityInput")]
    pub radiative_rate: f64,
    #[serde(default)]
    pub vibron_modes: Vec<VibronMode>,
    #[serde(default)]
    pub phonons: PhononSpectralDensity,
    /// kelvin
    #[serde(default, deserialize_with = "units::de::kelvin")]
    #[schemars(with = "units::QuantityInput")]
    pub temperature: f64,
    #[serde(default)]
    pub zpl_dephasing: ZplDephasing,
}

impl VibronicModel {
    /// Bare two-level emitter: no vibrons, no phonon coupling, T = 0.
    pub fn bare(zpl_frequency: f64, radiative_rate: f64) -> Self {
        Self {
            zpl_frequency,
            radiative_rate,
            vibron_modes: vec![],
            phonons: PhononSpectralDensity::default(),
            temperature: 0.0,
            zpl_dephasing: ZplDephasing::default(),
        }
    }

    pub fn with_mode(mut self, frequency: f64, huang_rhys: f64, relaxation_rate: f64) -> Self {
        self.vibron_modes.push(VibronMode {
            frequency,
            huang_rhys,
            relaxation_rate,
        });
        self
    }

    pub fn with_phonons(mut self, phonons: PhononSpectralDensity) -> Self {
        self.phonons = phonons;
        self
    }

    pub fn at_temperature(mut self, temperature: f64) -> Self {
        self.temperature = temperature;
        self
    }

    pub fn validate(&self) -> Result<(), VibronicError> {
        if !(self.zpl_frequency > 0.0 && self.radiative_rate > 0.0) {
            return Err(VibronicError::InvalidModel(
                "ZPL frequency and radiative rate must be positive".into(),
            ));
        }
        if !(self.temperature >= 0.0) {
            return Err(VibronicError::InvalidModel("temperature must be ≥ 0".into()));
        }
        for (i, m) in self.vibron_modes.iter().enumerate() {
            if !(m.frequency > 0.0) || !(m.huang_rhys >= 0.0) || !(m.relaxation_rate >= 0.0) {
                return Err(VibronicError::InvalidModel(format!(
                    "vibron mode {i}: need frequency > 0, huang_rhys ≥ 0, relaxation_rate ≥ 0"
                )));
            }
        }
        self.phonons.validate()
    }

    /// Natural plus pure-dephasing ZPL width (FWHM), rad/s.
    pub fn zpl_linewidth(&self) -> f64 {
        self.radiative_rate + self.zpl_dephasing.width(self.temperature)
    }

    fn vibron_exponent(&self) -> f64 {
        self.vibron_modes
            .iter()
            .map(|m| m.huang_rhys * (2.0 * bose_unchecked(m.frequency, self.temperature) + 1.0))
            .sum()
    }
}

/// Zero-temperature displaced-oscillator progression P(m) = e^{−S} S^m / m!.
pub fn franck_condon_progression(huang_rhys: f64, max_quanta: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(max_quanta + 1);
    let mut p = (-huang_rhys).exp();
    out.push(p);
    for m in 1..=max_quanta {
        p *= huang_rhys / m as f64;
        out.push(p);
    }
    out
}

/// α_DW = exp(−Σᵢ Sᵢ(2n̄ᵢ+1) − ∫ J(ω)/ω² (2n̄(ω)+1) dω).
pub fn debye_waller(model: &VibronicModel) -> Result<f64, VibronicError> {
    model.validate()?;
    let phonon = model.phonons.thermal_huang_rhys(model.temperature)?;
    Ok((-model.vibron_exponent() - phonon).exp())
}

/// Fraction of the emission in the ZPL. Equal to α_DW by construction of
/// [`emission_spectrum`].
pub fn zpl_branching_ratio(model: &VibronicModel) -> Result<f64, VibronicError> {
    debye_waller(model)
}

/// Rescales every vibron Huang–Rhys factor by one common factor so that the
/// Debye–Waller factor hits `target`.
pub fn tune_to_debye_waller(model: &VibronicModel, target: f64) -> Result<VibronicModel, VibronicError> {
    model.validate()?;
    if !(target > 0.0 && target <= 1.0) {
        return Err(VibronicError::InvalidModel(format!(
            "target α_DW must be in (0, 1], got {target}"
        )));
    }
    let vib = model.vibron_exponent();
    let phonon = model.phonons.thermal_huang_rhys(model.temperature)?;
    if vib == 0.0 {
        return Err(VibronicError::InvalidModel("no vibron coupling to tune".into()));
    }
    // ln α is linear in the common scale factor.
    let scale = (-target.ln() - phonon) / vib;
    if scale < 0.0 {
        return Err(VibronicError::InvalidModel(format!(
            "phonon coupling alone already gives α_DW = {:.4} < {target}",
            (-phonon).exp()
        )));
    }
    let mut tuned = model.clone();
    for m in &mut tuned.vibron_modes {
        m.huang_rhys *= scale;
    }
    Ok(tuned)
}

/// Normalized spectrum sampled on a grid (per rad/s).
#[derive(Debug, Clone)]
pub struct Spectrum {
    pub grid: FrequencyGrid,
    pub intensity: Vec<f64>,
}

impl Spectrum {
    pub fn integral(&self) -> f64 {
        self.grid.integrate(&self.intensity)
    }

    pub fn integrate_window(&self, lo: f64, hi: f64) -> f64 {
        self.grid.integrate_window(&self.intensity, lo, hi)
    }

    /// Grid point of maximum intensity within `[lo, hi]`.
    pub fn argmax_in(&self, lo: f64, hi: f64) -> Option<f64> {
        self.grid
            .iter()
            .zip(&self.intensity)
            .filter(|(w, _)| *w >= lo && *w <= hi)
            .max_by(|a, b| a.1.total_cmp(b.1))
            .map(|(w, _)| w)
    }
}

fn lorentzian(x: f64, fwhm: f64) -> f64 {
    let hw = 0.5 * fwhm;
    hw / (PI * (x * x + hw * hw))
}

/// Fraction of a unit-area Lorentzian of full width `fwhm` that lies within
/// `±half_window` of its centre.
pub fn lorentzian_window_fraction(fwhm: f64, half_window: f64) -> f64 {
    2.0 / PI * (2.0 * half_window / fwhm).atan()
}

/// One vibronic line: total quanta per mode folded into a shift, weight and width.
#[derive(Debug, Clone, Copy)]
struct Line {
    shift: f64,
    weight: f64,
    width: f64,
}

const MAX_QUANTA: usize = 60;
const PRUNE: f64 = 1e-14;

fn vibronic_lines(model: &VibronicModel) -> Vec<Line> {
    let mut lines = vec![Line {
        shift: 0.0,
        weight: 1.0,
        width: model.zpl_linewidth(),
    }];
    for mode in &model.vibron_modes {
        if mode.huang_rhys == 0.0 {
            continue;
        }
        let zero = (-mode.huang_rhys * (2.0 * bose_unchecked(mode.frequency, model.temperature) + 1.0)).exp();
        let poisson = franck_condon_progression(mode.huang_rhys, MAX_QUANTA);
        // Zero-temperature shape for m ≥ 1, rescaled to carry 1 − zero.
        let sideband = (1.0 - zero) / (1.0 - poisson[0]);
        let mut next = Vec::new();
        for l in &lines {
            for (m, p) in poisson.iter().enumerate() {
                let w = if m == 0 { zero } else { p * sideband };
                let weight = l.weight * w;
                if weight < PRUNE {
                    continue;
                }
                next.push(Line {
                    shift: l.shift + m as f64 * mode.frequency,
                    weight,
                    width: l.width + m as f64 * mode.relaxation_rate,
                });
            }
        }
        lines = next;
    }
    lines
}

/// One-phonon wing density at offset `x` (emitted minus line frequency),
/// normalized to unit area: Stokes side J/ω²(n̄+1), anti-Stokes side J/ω² n̄.
fn wing_density(model: &VibronicModel, x: f64, norm: f64) -> f64 {
    let ph = &model.phonons;
    if x < 0.0 {
        ph.huang_rhys_density(-x) * (bose_unchecked(-x, model.temperature) + 1.0) / norm
    } else if x > 0.0 {
        ph.huang_rhys_density(x) * bose_unchecked(x, model.temperature) / norm
    } else {
        0.0
    }
}

/// Emission spectrum normalized to unit integral on `grid`.
pub fn emission_spectrum(model: &VibronicModel, grid: FrequencyGrid) -> Result<Spectrum, VibronicError> {
    model.validate()?;
    let max_vib = model.vibron_modes.iter().map(|m| m.frequency).fold(0.0, f64::max);
    let need_lo = model.zpl_frequency - 1.2 * max_vib;
    let need_hi = model.zpl_frequency + 5.0 * model.radiative_rate;
    if grid.start() > need_lo || grid.stop() < need_hi {
        return Err(VibronicError::GridTooNarrow {
            start: grid.start(),
            stop: grid.stop(),
            need_lo,
            need_hi,
        });
    }

    let s_ph = model.phonons.thermal_huang_rhys(model.temperature)?;
    let alpha_ph = (-s_ph).exp();
    let lines = vibronic_lines(model);
    let intensity: Vec<f64> = grid
        .iter()
        .map(|w| {
            lines
                .iter()
                .map(|l| {
                    let center = model.zpl_frequency - l.shift;
                    let mut v = alpha_ph * lorentzian(w - center, l.width);
                    if s_ph > 0.0 {
                        v += (1.0 - alpha_ph) * wing_density(model, w - center, s_ph);
                    }
                    l.weight * v
                })
                .sum()
        })
        .collect();
    let total = grid.integrate(&intensity);
    Ok(Spectrum {
        grid,
        intensity: intensity.into_iter().map(|v| v / total).collect(),
    })
}

/// Energy-gap law k_ISC = A exp(−γ_g ΔE).
pub fn energy_gap_isc_rate(prefactor: f64, gap_slope: f64, energy_gap: f64) -> Result<f64, VibronicError> {
    if !(prefactor > 0.0 && gap_slope > 0.0 && energy_gap >= 0.0) {
        return Err(VibronicError::InvalidModel(
            "energy-gap law needs A > 0, γ_g > 0, ΔE ≥ 0".into(),
        ));
    }
    Ok(prefactor * (-gap_slope * energy_gap).exp())
}
