//! Application protocols: Raman vibrational memory, cavity spin-photon
//! interface and optomechanical cooperativity.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::grid::FrequencyGrid;
use crate::numerics::ode::{integrate_adaptive, OdeError, Tolerances};
use crate::units::{self, bose_unchecked};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ProtocolError {
    #[error("invalid protocol parameters: {0}")]
    Invalid(String),
    #[error("memory integration failed: {0}")]
    IntegrationFailure(#[from] OdeError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, schemars::JsonSchema)]
#[serde(rename_all = "snake_case")]
pub enum PulseShape {
    #[default]
    Gaussian,
}

/// Ω(t) = Ω₀ exp(−(t − t_c)² / 2σ²), with `width` = σ.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, schemars::JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct Pulse {
    /// rad/s
    #[serde(deserialize_with = "units::de::rad_s")]
    #[schemars(with = "units::QuantityInput")]
    pub peak_rabi: f64,
    /// s
    #[serde(deserialize_with = "units::de::seconds")]
    #[schemars(with = "units::QuantityInput")]
    pub center: f64,
    /// s
    #[serde(deserialize_with = "units::de::seconds")]
    #[schemars(with = "units::QuantityInput")]
    pub width: f64,
    #[serde(default)]
    pub shape: PulseShape,
}

impl Pulse {
    pub fn gaussian(peak_rabi: f64, center: f64, width: f64) -> Self {
        Self {
            peak_rabi,
            center,
            width,
            shape: PulseShape::Gaussian,
        }
    }

    pub fn rabi(&self, t: f64) -> f64 {
        match self.shape {
            PulseShape::Gaussian => {
                let x = (t - self.center) / self.width;
                self.peak_rabi * (-0.5 * x * x).exp()
            }
        }
    }

    fn span(&self) -> (f64, f64) {
        (self.center - 6.0 * self.width, self.center + 6.0 * self.width)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, schemars::JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct RamanMemorySpec {
    /// S1 decay rate, rad/s.
    #[serde(deserialize_with = "units::de::rad_s")]
    #[schemars(with = "units::QuantityInput")]
    pub gamma0: f64,
    /// Memory vibron population decay rate, rad/s.
    #[serde(default = "default_kappa_v", deserialize_with = "units::de::rad_s")]
    #[schemars(with = "units::QuantityInput")]
    pub kappa_v: f64,
    /// Detuning of both fields from S1, rad/s.
    #[serde(default, deserialize_with = "units::de::rad_s")]
    #[schemars(with = "units::QuantityInput")]
    pub detuning: f64,
    pub control_pulse: Pulse,
    pub signal_pulse: Pulse,
    /// s
    #[serde(default, deserialize_with = "units::de::seconds")]
    #[schemars(with = "units::QuantityInput")]
    pub storage_hold: f64,
}

/// Inverse of a 10 ps vibron lifetime.
fn default_kappa_v() -> f64 {
    1e11
}

impl RamanMemorySpec {
    pub fn validate(&self) -> Result<(), ProtocolError> {
        let ok = self.gamma0 > 0.0
            && self.kappa_v >= 0.0
            && self.detuning.is_finite()
            && self.storage_hold >= 0.0
            && [self.control_pulse, self.signal_pulse]
                .iter()
                .all(|p| p.width > 0.0 && p.peak_rabi >= 0.0 && p.center.is_finite());
        if ok {
            Ok(())
        } else {
            Err(ProtocolError::Invalid(
                "memory needs γ0 > 0, κ_v ≥ 0, hold ≥ 0, pulse widths > 0 and Rabi ≥ 0".into(),
            ))
        }
    }

    fn write_window(&self) -> (f64, f64) {
        let (a0, a1) = self.control_pulse.span();
        let (b0, b1) = self.signal_pulse.span();
        (a0.min(b0), a1.max(b1))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MemoryEfficiency {
    /// |c_s|² at the end of the write window.
    pub storage: f64,
    /// Emitted fraction of a unit spin-wave under the read pulse.
    pub retrieval: f64,
    /// exp(−κ_v · hold)
    pub hold_survival: f64,
    /// storage × hold_survival × retrieval
    pub total: f64,
}

/// Three-level amplitudes (c_g, c_e, c_s) in the two-photon-resonant frame:
///
/// ```text
/// ċ_g = −i Ω_s/2 c_e
/// ċ_e = −i Ω_s/2 c_g − i Ω_c/2 c_s − (iΔ + γ0/2) c_e
/// ċ_s = −i Ω_c/2 c_e − κ_v/2 c_s
/// ```
fn memory_rhs(
    spec: &RamanMemorySpec,
    signal: impl Fn(f64) -> f64,
    control: impl Fn(f64) -> f64,
) -> impl FnMut(f64, &[Complex64], &mut [Complex64]) {
    let i = Complex64::new(0.0, 1.0);
    let (g0, kv, d) = (spec.gamma0, spec.kappa_v, spec.detuning);
    move |t, y, dy| {
        let os = 0.5 * signal(t);
        let oc = 0.5 * control(t);
        dy[0] = -i * os * y[1];
        dy[1] = -i * os * y[0] - i * oc * y[2] - (i * d + 0.5 * g0) * y[1];
        dy[2] = -i * oc * y[1] - 0.5 * kv * y[2];
    }
}

fn memory_tolerances(spec: &RamanMemorySpec) -> Tolerances {
    Tolerances {
        max_step: Some(0.5 * spec.control_pulse.width.min(spec.signal_pulse.width)),
        ..Tolerances::default()
    }
}

/// Write–hold–read efficiencies of the Raman memory. The read control is the
/// time-reverse of the write control; retrieved energy is γ0∫|c_e|² dt.
pub fn raman_memory_efficiency(spec: &RamanMemorySpec) -> Result<MemoryEfficiency, ProtocolError> {
    spec.validate()?;
    let zero = Complex64::new(0.0, 0.0);
    let (t0, t1) = spec.write_window();
    if spec.control_pulse.peak_rabi == 0.0 {
        return Ok(MemoryEfficiency {
            storage: 0.0,
            retrieval: 0.0,
            hold_survival: (-spec.kappa_v * spec.storage_hold).exp(),
            total: 0.0,
        });
    }
    let tol = memory_tolerances(spec);

    let write = integrate_adaptive(
        memory_rhs(spec, |t| spec.signal_pulse.rabi(t), |t| spec.control_pulse.rabi(t)),
        t0,
        &[Complex64::new(1.0, 0.0), zero, zero],
        &[t1],
        tol,
    )?;
    let storage = write[0][2].norm_sqr().min(1.0);

    // Read a unit spin-wave; the fourth component accumulates γ0|c_e|². The
    // read control ends at t1, after which c_e decays freely and the rest of
    // the emission is exactly |c_e(t1)|².
    let control = |t: f64| spec.control_pulse.rabi(t0 + t1 - t);
    let mut inner = memory_rhs(spec, |_| 0.0, control);
    let g0 = spec.gamma0;
    let read = integrate_adaptive(
        move |t, y, dy| {
            inner(t, &y[..3], &mut dy[..3]);
            dy[3] = Complex64::new(g0 * y[1].norm_sqr(), 0.0);
        },
        t0,
        &[zero, zero, Complex64::new(1.0, 0.0), zero],
        &[t1],
        tol,
    )?;
    let retrieval = (read[0][3].re + read[0][1].norm_sqr()).clamp(0.0, 1.0);
    let hold_survival = (-spec.kappa_v * spec.storage_hold).exp();
    Ok(MemoryEfficiency {
        storage,
        retrieval,
        hold_survival,
        total: storage * hold_survival * retrieval,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, schemars::JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct CavityInterfaceSpec {
    /// Emitter–cavity coupling, rad/s.
    #[serde(deserialize_with = "units::de::rad_s")]
    #[schemars(with = "units::QuantityInput")]
    pub g: f64,
    /// Total cavity field decay, rad/s.
    #[serde(deserialize_with = "units::de::rad_s")]
    #[schemars(with = "units::QuantityInput")]
    pub kappa: f64,
    #[serde(deserialize_with = "units::de::rad_s")]
    #[schemars(with = "units::QuantityInput")]
    pub kappa_in: f64,
    #[serde(deserialize_with = "units::de::rad_s")]
    #[schemars(with = "units::QuantityInput")]
    pub kappa_out: f64,
    /// Emitter total decay, rad/s.
    #[serde(deserialize_with = "units::de::rad_s")]
    #[schemars(with = "units::QuantityInput")]
    pub gamma: f64,
    /// Singlet (ZPL coupled) when true, triplet-shelved when false.
    #[serde(default = "yes")]
    pub emitter_coupled: bool,
}

fn yes() -> bool {
    true
}

impl CavityInterfaceSpec {
    /// Symmetric lossless cavity with κ = γ at cooperativity `c`.
    pub fn symmetric(cooperativity: f64, kappa: f64, gamma: f64) -> Self {
        Self {
            g: (cooperativity * kappa * gamma / 4.0).sqrt(),
            kappa,
            kappa_in: 0.5 * kappa,
            kappa_out: 0.5 * kappa,
            gamma,
            emitter_coupled: true,
        }
    }

    pub fn with_emitter(mut self, coupled: bool) -> Self {
        self.emitter_coupled = coupled;
        self
    }

    /// C = 4g²/(κγ).
    pub fn cooperativity(&self) -> f64 {
        4.0 * self.g * self.g / (self.kappa * self.gamma)
    }

    pub fn validate(&self) -> Result<(), ProtocolError> {
        let all = [self.g, self.kappa, self.kappa_in, self.kappa_out, self.gamma];
        if all.iter().any(|&x| !(x >= 0.0 && x.is_finite())) {
            return Err(ProtocolError::Invalid("cavity rates must be finite and ≥ 0".into()));
        }
        if self.kappa_in + self.kappa_out > self.kappa * (1.0 + 1e-12) {
            return Err(ProtocolError::Invalid("κ_in + κ_out must not exceed κ".into()));
        }
        if self.kappa == 0.0 {
            return Err(ProtocolError::Invalid("κ must be positive".into()));
        }
        if self.emitter_coupled && self.g > 0.0 && self.gamma == 0.0 {
            return Err(ProtocolError::Invalid("coupled emitter needs γ > 0".into()));
        }
        Ok(())
    }

    fn g_eff(&self) -> f64 {
        if self.emitter_coupled {
            self.g
        } else {
            0.0
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CavityPoint {
    /// Probe detuning from the common cavity/emitter resonance, rad/s.
    pub detuning: f64,
    pub reflection: Complex64,
    pub transmission: Complex64,
    /// Fraction lost through the cavity loss port and emitter decay.
    pub loss: f64,
}

/// Input–output response at one detuning.
pub fn cavity_point(spec: &CavityInterfaceSpec, detuning: f64) -> CavityPoint {
    let i = Complex64::new(0.0, 1.0);
    let g = spec.g_eff();
    let emitter = i * detuning + 0.5 * spec.gamma;
    let mut denom = i * detuning + 0.5 * spec.kappa;
    if g != 0.0 {
        denom += g * g / emitter;
    }
    let a = spec.kappa_in.sqrt() / denom;
    let transmission = spec.kappa_out.sqrt() * a;
    let reflection = -1.0 + spec.kappa_in.sqrt() * a;
    let sigma_sq = if g != 0.0 { (g * a / emitter).norm_sqr() } else { 0.0 };
    let loss = (spec.kappa - spec.kappa_in - spec.kappa_out) * a.norm_sqr() + spec.gamma * sigma_sq;
    CavityPoint {
        detuning,
        reflection,
        transmission,
        loss,
    }
}

pub fn cavity_response(spec: &CavityInterfaceSpec, grid: &FrequencyGrid) -> Result<Vec<CavityPoint>, ProtocolError> {
    spec.validate()?;
    Ok(grid.iter().map(|d| cavity_point(spec, d)).collect())
}

/// Local maxima of |t|² on the sampled response, refined by a parabola
/// through the three neighbouring samples.
pub fn transmission_peaks(points: &[CavityPoint]) -> Vec<f64> {
    let t: Vec<f64> = points.iter().map(|p| p.transmission.norm_sqr()).collect();
    (1..t.len().saturating_sub(1))
        .filter(|&k| t[k] > t[k - 1] && t[k] >= t[k + 1])
        .map(|k| {
            let h = points[k + 1].detuning - points[k].detuning;
            let curv = t[k - 1] - 2.0 * t[k] + t[k + 1];
            let shift = if curv != 0.0 {
                0.5 * (t[k - 1] - t[k + 1]) / curv
            } else {
                0.0
            };
            points[k].detuning + shift * h
        })
        .collect()
}

/// Splitting 2·Re(ω₊) of the two coupled cavity–emitter normal modes.
pub fn normal_mode_splitting(spec: &CavityInterfaceSpec) -> f64 {
    let g = spec.g_eff();
    let d = 0.25 * (spec.kappa - spec.gamma);
    2.0 * (g * g - d * d).max(0.0).sqrt()
}

/// Overlap fidelity of the on-resonance two-branch map (singlet reflects,
/// triplet transmits) with the ideal map, for an equal spin superposition
/// and after local phase correction: ((|r_on| + |t_off|)/2)².
pub fn spin_photon_fidelity(spec: &CavityInterfaceSpec) -> Result<f64, ProtocolError> {
    spec.validate()?;
    let on = cavity_point(&spec.with_emitter(true), 0.0);
    let off = cavity_point(&spec.with_emitter(false), 0.0);
    let amp = 0.5 * (on.reflection.norm() + off.transmission.norm());
    Ok(amp * amp)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, schemars::JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct OptomechParams {
    /// Single-photon electron–vibron coupling, rad/s.
    #[serde(deserialize_with = "units::de::rad_s")]
    #[schemars(with = "units::QuantityInput")]
    pub g0: f64,
    #[serde(deserialize_with = "units::de::rad_s")]
    #[schemars(with = "units::QuantityInput")]
    pub omega_v: f64,
    #[serde(deserialize_with = "units::de::rad_s")]
    #[schemars(with = "units::QuantityInput")]
    pub kappa_v: f64,
    #[serde(deserialize_with = "units::de::rad_s")]
    #[schemars(with = "units::QuantityInput")]
    pub gamma0: f64,
    /// kelvin
    #[serde(default, deserialize_with = "units::de::kelvin")]
    #[schemars(with = "units::QuantityInput")]
    pub temperature: f64,
    /// Replaces the thermal occupation n̄(ω_v, T) when set.
    #[serde(default)]
    pub n_thermal: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OptomechResult {
    /// +∞ when n̄ = 0.
    pub cooperativity: f64,
    pub n_thermal: f64,
    pub divergent: bool,
    /// g0/ω_v within [0.1, 0.5].
    pub ultra_strong: bool,
}

/// C_opt = 4 g0² / (n̄ κ_v γ0).
pub fn optomech_cooperativity(p: &OptomechParams) -> Result<OptomechResult, ProtocolError> {
    if !(p.g0 >= 0.0 && p.omega_v > 0.0 && p.kappa_v > 0.0 && p.gamma0 > 0.0 && p.temperature >= 0.0) {
        return Err(ProtocolError::Invalid("need g0 ≥ 0 and ω_v, κ_v, γ0 > 0, T ≥ 0".into()));
    }
    let n = match p.n_thermal {
        Some(n) if n >= 0.0 => n,
        Some(n) => return Err(ProtocolError::Invalid(format!("n̄ override must be ≥ 0, got {n}"))),
        None => bose_unchecked(p.omega_v, p.temperature),
    };
    let num = 4.0 * p.g0 * p.g0;
    let (cooperativity, divergent) = if n == 0.0 {
        if num == 0.0 {
            (0.0, false)
        } else {
            (f64::INFINITY, true)
        }
    } else {
        (num / (n * p.kappa_v * p.gamma0), false)
    };
    let ratio = p.g0 / p.omega_v;
    Ok(OptomechResult {
        cooperativity,
        n_thermal: n,
        divergent,
        ultra_strong: (0.1..=0.5).contains(&ratio),
    })
}
