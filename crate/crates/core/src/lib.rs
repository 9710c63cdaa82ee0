//! Simulation toolkit for single organic molecules embedded in molecular host
//! crystals.
//!
//! The crate is organised bottom-up:
//!
//! - [`units`] and [`grid`]: constants, unit conversion, frequency grids.
//! - [`levels`]: host-guest state kets and transition classification.
//! - [`spin`]: triplet zero-field splitting, Zeeman and hyperfine Hamiltonians,
//!   ODMR stick spectra and the electron–nuclear controlled rotation.
//! - [`vibronic`]: Franck–Condon progressions, Debye–Waller factor and
//!   emission spectra.
//! - [`relaxation`]: vibrational relaxation channel taxonomy and two-phonon rates.
//! - [`dynamics`]: Lindblad propagation, steady states, g² and rate networks.
//! - [`protocols`]: Raman memory, cavity spin-photon interface, optomechanics.
//! - [`screening`]: molecule tables, S1/T1 linear scaling and candidate filters.
//!
//! All energies and frequencies are angular frequencies in rad/s unless a
//! field name says otherwise.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod dynamics;
pub mod export;
pub mod grid;
pub mod levels;
pub mod numerics;
pub mod protocols;
pub mod relaxation;
pub mod screening;
pub mod spin;
pub mod units;
pub mod vibronic;

pub use grid::FrequencyGrid;
pub use numerics::{CMatrix, CVector, Complex64};
pub use units::{Quantity, Unit};
