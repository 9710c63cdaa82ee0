//! Physical constants and unit handling.
//!
//! Every energy or frequency is carried internally as an angular frequency in
//! rad/s. Public entry points accept a [`Quantity`] tagged with its unit and
//! convert once at the boundary.
//!
//! Constants (CODATA 2018):
//!
//! | symbol | value | unit |
//! |--------|-------|------|
//! | h      | 6.626 070 15 × 10⁻³⁴ (exact) | J s |
//! | ħ      | h / 2π | J s |
//! | e      | 1.602 176 634 × 10⁻¹⁹ (exact) | C |
//! | k_B    | 1.380 649 × 10⁻²³ (exact) | J/K |
//! | μ_B    | 9.274 010 0783 × 10⁻²⁴ | J/T |
//! | γ_p    | 2.675 221 8744 × 10⁸ | rad s⁻¹ T⁻¹ |

use std::f64::consts::PI;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const PLANCK: f64 = 6.626_070_15e-34;
pub const HBAR: f64 = PLANCK / (2.0 * PI);
pub const ELEMENTARY_CHARGE: f64 = 1.602_176_634e-19;
pub const BOLTZMANN: f64 = 1.380_649e-23;
pub const BOHR_MAGNETON: f64 = 9.274_010_078_3e-24;
/// Free-proton gyromagnetic ratio.
pub const PROTON_GYROMAGNETIC: f64 = 2.675_221_874_4e8;
/// Free-electron g-factor magnitude, used as the default for triplet states.
pub const ELECTRON_G: f64 = 2.0023;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum UnitError {
    #[error("no conversion from {from} to {to}")]
    IncompatibleUnits { from: Unit, to: Unit },
    #[error("domain error: {0}")]
    Domain(String),
}

/// Supported unit tags.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, schemars::JsonSchema)]
pub enum Unit {
    #[serde(rename = "eV")]
    ElectronVolt,
    #[serde(rename = "THz")]
    Terahertz,
    #[serde(rename = "GHz")]
    Gigahertz,
    #[serde(rename = "MHz")]
    Megahertz,
    #[serde(rename = "kHz")]
    Kilohertz,
    #[serde(rename = "rad/s")]
    RadPerSecond,
    #[serde(rename = "K")]
    Kelvin,
    #[serde(rename = "T")]
    Tesla,
    #[serde(rename = "s")]
    Second,
    #[serde(rename = "1")]
    Dimensionless,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Dimension {
    /// Energy and frequency share one dimension through E = ħω.
    Frequency,
    Temperature,
    MagneticField,
    Time,
    Dimensionless,
}

impl Unit {
    fn dimension(self) -> Dimension {
        match self {
            Unit::ElectronVolt
            | Unit::Terahertz
            | Unit::Gigahertz
            | Unit::Megahertz
            | Unit::Kilohertz
            | Unit::RadPerSecond => Dimension::Frequency,
            Unit::Kelvin => Dimension::Temperature,
            Unit::Tesla => Dimension::MagneticField,
            Unit::Second => Dimension::Time,
            Unit::Dimensionless => Dimension::Dimensionless,
        }
    }

    /// Multiplier taking a value in this unit to the canonical unit of its dimension.
    fn to_canonical(self) -> f64 {
        match self {
            Unit::ElectronVolt => ELEMENTARY_CHARGE / HBAR,
            Unit::Terahertz => 2.0 * PI * 1e12,
            Unit::Gigahertz => 2.0 * PI * 1e9,
            Unit::Megahertz => 2.0 * PI * 1e6,
            Unit::Kilohertz => 2.0 * PI * 1e3,
            Unit::RadPerSecond | Unit::Kelvin | Unit::Tesla | Unit::Second | Unit::Dimensionless => 1.0,
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            Unit::ElectronVolt => "eV",
            Unit::Terahertz => "THz",
            Unit::Gigahertz => "GHz",
            Unit::Megahertz => "MHz",
            Unit::Kilohertz => "kHz",
            Unit::RadPerSecond => "rad/s",
            Unit::Kelvin => "K",
            Unit::Tesla => "T",
            Unit::Second => "s",
            Unit::Dimensionless => "1",
        }
    }
}

impl fmt::Display for Unit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.symbol())
    }
}

/// A value tagged with its unit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, schemars::JsonSchema)]
pub struct Quantity {
    pub value: f64,
    pub unit: Unit,
}

impl Quantity {
    pub const fn new(value: f64, unit: Unit) -> Self {
        Self { value, unit }
    }

    pub fn convert(self, target: Unit) -> Result<Quantity, UnitError> {
        convert(self, target)
    }

    /// Value in canonical units (rad/s for energies and frequencies).
    pub fn canonical(self) -> f64 {
        self.value * self.unit.to_canonical()
    }
}

impl fmt::Display for Quantity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {}", self.value, self.unit)
    }
}

pub fn convert(q: Quantity, target: Unit) -> Result<Quantity, UnitError> {
    if q.unit == target {
        return Ok(q);
    }
    if q.unit.dimension() != target.dimension() {
        return Err(UnitError::IncompatibleUnits {
            from: q.unit,
            to: target,
        });
    }
    let value = q.value * q.unit.to_canonical() / target.to_canonical();
    Ok(Quantity::new(value, target))
}

/// Thermal energy k_B T expressed as an angular frequency. Temperatures never
/// enter an energy expression except through this function.
pub fn thermal_frequency(temperature: f64) -> f64 {
    BOLTZMANN * temperature / HBAR
}

/// Mean thermal occupation 1/(exp(ħω/k_B T) − 1) of a bosonic mode.
pub fn bose_occupation(omega: f64, temperature: f64) -> Result<f64, UnitError> {
    if !(omega > 0.0) {
        return Err(UnitError::Domain(format!(
            "mode frequency must be positive, got {omega} rad/s"
        )));
    }
    if !(temperature >= 0.0) {
        return Err(UnitError::Domain(format!(
            "temperature must be non-negative, got {temperature} K"
        )));
    }
    Ok(bose_unchecked(omega, temperature))
}

/// [`bose_occupation`] without argument checks, for quadrature inner loops.
pub(crate) fn bose_unchecked(omega: f64, temperature: f64) -> f64 {
    if temperature == 0.0 {
        return 0.0;
    }
    let x = omega / thermal_frequency(temperature);
    1.0 / x.exp_m1()
}

/// Shorthand for 2π × a frequency in Hz.
pub fn hz(value: f64) -> f64 {
    2.0 * PI * value
}

/// Config-file input for a dimensioned value: either a bare number already in
/// canonical units, or a `{ "value": .., "unit": .. }` record.
#[derive(Debug, Clone, Copy, Deserialize, schemars::JsonSchema)]
#[serde(untagged)]
pub enum QuantityInput {
    Canonical(f64),
    Tagged(Quantity),
}

impl QuantityInput {
    pub fn resolve(self, canonical: Unit) -> Result<f64, UnitError> {
        match self {
            QuantityInput::Canonical(v) => Ok(v),
            QuantityInput::Tagged(q) => Ok(convert(q, canonical)?.value),
        }
    }
}

fn de_as<'de, D: serde::Deserializer<'de>>(d: D, unit: Unit) -> Result<f64, D::Error> {
    let input = QuantityInput::deserialize(d)?;
    input.resolve(unit).map_err(serde::de::Error::custom)
}

/// Serde adapters that accept [`QuantityInput`] and store canonical values.
pub mod de {
    use super::*;

    pub fn rad_s<'de, D: serde::Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        de_as(d, Unit::RadPerSecond)
    }

    pub fn kelvin<'de, D: serde::Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        de_as(d, Unit::Kelvin)
    }

    pub fn seconds<'de, D: serde::Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        de_as(d, Unit::Second)
    }

    pub fn opt_rad_s<'de, D: serde::Deserializer<'de>>(d: D) -> Result<Option<f64>, D::Error> {
        Option::<QuantityInput>::deserialize(d)?
            .map(|q| q.resolve(Unit::RadPerSecond))
            .transpose()
            .map_err(serde::de::Error::custom)
    }

    pub fn vec_rad_s<'de, D: serde::Deserializer<'de>>(d: D) -> Result<Vec<f64>, D::Error> {
        Vec::<QuantityInput>::deserialize(d)?
            .into_iter()
            .map(|q| q.resolve(Unit::RadPerSecond))
            .collect::<Result<_, _>>()
            .map_err(serde::de::Error::custom)
    }
}
