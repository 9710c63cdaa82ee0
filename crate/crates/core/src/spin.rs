//! Triplet electron spin coupled to a few nuclear spins.
//!
//! The Hamiltonian, in rad/s, on the product space |S=1, m_S⟩ ⊗ ⊗ᵢ |Iᵢ, m_Iᵢ⟩:
//!
//! ```text
//! H = D (S_z² − S²/3) + E (S_x² − S_y²) + (g μ_B/ħ) B·S
//!     + Σᵢ S·Aⁱ·Iᵢ − Σᵢ γᵢ B·Iᵢ
//! ```
//!
//! Basis ordering is m = +S, ..., −S for every spin, electron first.

use std::f64::consts::PI;

use nalgebra::{Matrix3, Vector3};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::grid::FrequencyGrid;
use crate::numerics::linalg::{c, hermitian_eigh, hermiticity_defect, identity, kron};
use crate::numerics::ode::rk4_fixed;
use crate::numerics::{CMatrix, Complex64};
use crate::units::{self, BOHR_MAGNETON, ELECTRON_G, HBAR, PROTON_GYROMAGNETIC};

/// Default cap on the product-space dimension.
pub const DEFAULT_DIMENSION_CAP: usize = 4096;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SpinError {
    #[error("product-space dimension {dimension} exceeds the cap of {cap}")]
    DimensionOverflow { dimension: usize, cap: usize },
    #[error("matrix is not Hermitian (relative defect {0:e})")]
    NotHermitian(f64),
    #[error("invalid spin system: {0}")]
    InvalidSpec(String),
    #[error("precondition violated: {0}")]
    PreconditionViolated(String),
    #[error("propagation needs {needed} steps, budget is {budget}")]
    StepBudgetExceeded { needed: usize, budget: usize },
}

fn default_g() -> f64 {
    ELECTRON_G
}

fn default_gamma() -> f64 {
    PROTON_GYROMAGNETIC
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, schemars::JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct NucleusSpec {
    /// Nuclear spin quantum number I (a positive multiple of 1/2).
    pub spin: f64,
    /// Hyperfine tensor A, rad/s, row-major.
    pub hyperfine: [[f64; 3]; 3],
    /// Gyromagnetic ratio γ_n, rad s⁻¹ T⁻¹. Defaults to the free proton.
    #[serde(default = "default_gamma")]
    pub gyromagnetic_ratio: f64,
}

impl NucleusSpec {
    pub fn new(spin: f64, hyperfine: [[f64; 3]; 3]) -> Self {
        Self {
            spin,
            hyperfine,
            gyromagnetic_ratio: PROTON_GYROMAGNETIC,
        }
    }

    /// Nucleus with a diagonal hyperfine tensor (A_xx, A_yy, A_zz).
    pub fn diagonal(spin: f64, axx: f64, ayy: f64, azz: f64) -> Self {
        Self::new(spin, [[axx, 0.0, 0.0], [0.0, ayy, 0.0], [0.0, 0.0, azz]])
    }

    fn twice_spin(&self) -> Result<usize, SpinError> {
        let two = 2.0 * self.spin;
        if !(self.spin > 0.0) || (two - two.round()).abs() > 1e-12 {
            return Err(SpinError::InvalidSpec(format!(
                "nuclear spin must be a positive half-integer, got {}",
                self.spin
            )));
        }
        Ok(two.round() as usize)
    }

    fn tensor(&self) -> Matrix3<f64> {
        Matrix3::from_fn(|i, j| self.hyperfine[i][j])
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, schemars::JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct SpinSystemSpec {
    /// Axial zero-field splitting D, rad/s.
    #[serde(deserialize_with = "units::de::rad_s")]
    #[schemars(with = "units::QuantityInput")]
    pub d: f64,
    /// Rhombic zero-field splitting E, rad/s.
    #[serde(deserialize_with = "units::de::rad_s")]
    #[schemars(with = "units::QuantityInput")]
    pub e: f64,
    #[serde(default = "default_g")]
    pub g_electron: f64,
    /// Magnetic field, tesla.
    #[serde(default)]
    pub magnetic_field: [f64; 3],
    #[serde(default)]
    pub nuclei: Vec<NucleusSpec>,
}

impl SpinSystemSpec {
    pub fn zero_field(d: f64, e: f64) -> Self {
        Self {
            d,
            e,
            g_electron: ELECTRON_G,
            magnetic_field: [0.0; 3],
            nuclei: vec![],
        }
    }

    pub fn with_field(mut self, b: [f64; 3]) -> Self {
        self.magnetic_field = b;
        self
    }

    pub fn with_nucleus(mut self, n: NucleusSpec) -> Self {
        self.nuclei.push(n);
        self
    }

    pub fn validate(&self) -> Result<(), SpinError> {
        if !self.d.is_finite() || !self.e.is_finite() {
            return Err(SpinError::InvalidSpec("D and E must be finite".into()));
        }
        if self.e.abs() > self.d.abs() / 3.0 * (1.0 + 1e-12) {
            return Err(SpinError::InvalidSpec(format!(
                "|E| = {} exceeds |D|/3 = {}",
                self.e.abs(),
                self.d.abs() / 3.0
            )));
        }
        for n in &self.nuclei {
            n.twice_spin()?;
            let a = n.tensor();
            let scale = a.camax();
            if scale > 0.0 && (a - a.transpose()).camax() > 1e-12 * scale {
                return Err(SpinError::InvalidSpec("hyperfine tensor must be symmetric".into()));
            }
        }
        Ok(())
    }

    /// Product-space dimension 3 · Πᵢ (2Iᵢ + 1).
    pub fn dimension(&self) -> Result<usize, SpinError> {
        let mut dim = 3usize;
        for n in &self.nuclei {
            dim = dim.saturating_mul(n.twice_spin()? + 1);
        }
        Ok(dim)
    }

    fn field(&self) -> Vector3<f64> {
        Vector3::from(self.magnetic_field)
    }

    fn electron_zeeman_factor(&self) -> f64 {
        self.g_electron * BOHR_MAGNETON / HBAR
    }
}

/// Spin operators (S_x, S_y, S_z) for spin `twice_s / 2`, basis m = S..−S.
pub fn spin_operators(twice_s: usize) -> [CMatrix; 3] {
    let n = twice_s + 1;
    let s = twice_s as f64 / 2.0;
    let mut sp = CMatrix::zeros(n, n);
    let mut sz = CMatrix::zeros(n, n);
    for i in 0..n {
        let m = s - i as f64;
        sz[(i, i)] = c(m);
        if i > 0 {
            // ⟨m+1|S+|m⟩ with m = s - i
            sp[(i - 1, i)] = c((s * (s + 1.0) - m * (m + 1.0)).sqrt());
        }
    }
    let sm = sp.adjoint();
    let sx = (&sp + &sm) * c(0.5);
    let sy = (&sp - &sm) * Complex64::new(0.0, -0.5);
    [sx, sy, sz]
}

/// Fine-structure tensor with D(S_z² − S²/3) + E(S_x² − S_y²) = S·T·S.
pub fn fine_structure_tensor(d: f64, e: f64) -> Matrix3<f64> {
    Matrix3::from_diagonal(&Vector3::new(-d / 3.0 + e, -d / 3.0 - e, 2.0 * d / 3.0))
}

/// Embeds single-spin operator `op` at slot `slot` of the product space.
fn embed(op: &CMatrix, slot: usize, dims: &[usize]) -> CMatrix {
    let mut out = CMatrix::identity(1, 1);
    for (k, &d) in dims.iter().enumerate() {
        out = if k == slot {
            kron(&out, op)
        } else {
            kron(&out, &identity(d))
        };
    }
    out
}

fn bilinear(left: &[CMatrix; 3], t: &Matrix3<f64>, right: &[CMatrix; 3]) -> CMatrix {
    let n = left[0].nrows();
    let mut h = CMatrix::zeros(n, n);
    for i in 0..3 {
        for j in 0..3 {
            if t[(i, j)] != 0.0 {
                h += (&left[i] * &right[j]) * c(t[(i, j)]);
            }
        }
    }
    h
}

/// Full Hamiltonian from tensors: fine structure `zfs`, field `b`, and one
/// (hyperfine, γ, 2I) triple per nucleus.
pub fn hamiltonian_from_tensors(
    zfs: &Matrix3<f64>,
    electron_zeeman: f64,
    b: &Vector3<f64>,
    nuclei: &[(Matrix3<f64>, f64, usize)],
    cap: usize,
) -> Result<CMatrix, SpinError> {
    let mut dims = vec![3usize];
    dims.extend(nuclei.iter().map(|n| n.2 + 1));
    let dim = dims
        .iter()
        .try_fold(1usize, |acc, &d| acc.checked_mul(d))
        .unwrap_or(usize::MAX);
    if dim > cap {
        return Err(SpinError::DimensionOverflow { dimension: dim, cap });
    }
    let s_single = spin_operators(2);
    let s: [CMatrix; 3] = std::array::from_fn(|k| embed(&s_single[k], 0, &dims));
    let mut h = bilinear(&s, zfs, &s);
    for k in 0..3 {
        if b[k] != 0.0 {
            h += &s[k] * c(electron_zeeman * b[k]);
        }
    }
    for (slot, (a, gamma, twice_i)) in nuclei.iter().enumerate() {
        let i_single = spin_operators(*twice_i);
        let i_ops: [CMatrix; 3] = std::array::from_fn(|k| embed(&i_single[k], slot + 1, &dims));
        h += bilinear(&s, a, &i_ops);
        for k in 0..3 {
            if b[k] != 0.0 {
                h -= &i_ops[k] * c(gamma * b[k]);
            }
        }
    }
    Ok(h)
}

pub fn build_spin_hamiltonian(spec: &SpinSystemSpec) -> Result<CMatrix, SpinError> {
    build_spin_hamiltonian_capped(spec, DEFAULT_DIMENSION_CAP)
}

pub fn build_spin_hamiltonian_capped(spec: &SpinSystemSpec, cap: usize) -> Result<CMatrix, SpinError> {
    spec.validate()?;
    let nuclei = spec
        .nuclei
        .iter()
        .map(|n| Ok((n.tensor(), n.gyromagnetic_ratio, n.twice_spin()?)))
        .collect::<Result<Vec<_>, SpinError>>()?;
    hamiltonian_from_tensors(
        &fine_structure_tensor(spec.d, spec.e),
        spec.electron_zeeman_factor(),
        &spec.field(),
        &nuclei,
        cap,
    )
}

/// Electron spin operators embedded in the full product space of `spec`.
pub fn electron_operators(spec: &SpinSystemSpec) -> Result<[CMatrix; 3], SpinError> {
    let mut dims = vec![3usize];
    for n in &spec.nuclei {
        dims.push(n.twice_spin()? + 1);
    }
    let s = spin_operators(2);
    Ok(std::array::from_fn(|k| embed(&s[k], 0, &dims)))
}

#[derive(Debug, Clone)]
pub struct SpinEigensystem {
    /// Ascending, rad/s.
    pub energies: Vec<f64>,
    /// Column k is the eigenvector of `energies[k]` in the product basis.
    pub states: CMatrix,
}

impl SpinEigensystem {
    /// max |V†V − 1|.
    pub fn unitarity_defect(&self) -> f64 {
        let n = self.states.nrows();
        (self.states.adjoint() * &self.states - identity(n)).camax()
    }

    pub fn reconstruct(&self) -> CMatrix {
        let d = CMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
            self.energies.len(),
            self.energies.iter().map(|&e| c(e)),
        ));
        &self.states * d * self.states.adjoint()
    }
}

pub fn diagonalize(h: &CMatrix) -> Result<SpinEigensystem, SpinError> {
    if !h.is_square() {
        return Err(SpinError::NotHermitian(f64::INFINITY));
    }
    let defect = hermiticity_defect(h);
    if defect > 1e-10 {
        return Err(SpinError::NotHermitian(defect));
    }
    let (energies, states) = hermitian_eigh(h);
    Ok(SpinEigensystem { energies, states })
}

/// One magnetic-dipole transition.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SpinLine {
    /// rad/s, positive.
    pub frequency: f64,
    /// Σ_k |⟨f|S_k|i⟩|².
    pub strength: f64,
}

#[derive(Debug, Clone)]
pub struct OdmrSpectrum {
    pub lines: Vec<SpinLine>,
    pub grid: FrequencyGrid,
    /// Lorentzian-broadened stick spectrum sampled on `grid`.
    pub intensity: Vec<f64>,
}

impl OdmrSpectrum {
    pub fn points(&self) -> Vec<(f64, f64)> {
        self.grid.iter().zip(self.intensity.iter().copied()).collect()
    }
}

/// Stick spectrum of all eigenpair transitions, strongest-first grouping
/// merged at degenerate frequencies, sorted by frequency.
pub fn transition_lines(spec: &SpinSystemSpec) -> Result<Vec<SpinLine>, SpinError> {
    let h = build_spin_hamiltonian(spec)?;
    let eig = diagonalize(&h)?;
    let s = electron_operators(spec)?;
    let v = &eig.states;
    let s_eig: Vec<CMatrix> = s.iter().map(|op| v.adjoint() * op * v).collect();
    let n = eig.energies.len();
    let scale = eig.energies.iter().fold(0.0f64, |m, e| m.max(e.abs())).max(1.0);
    let resolve = 1e-9 * scale;

    let mut raw = Vec::new();
    for i in 0..n {
        for f in (i + 1)..n {
            let w = eig.energies[f] - eig.energies[i];
            if w <= resolve {
                continue;
            }
            let strength: f64 = s_eig.iter().map(|m| m[(f, i)].norm_sqr()).sum();
            if strength > 1e-12 {
                raw.push(SpinLine { frequency: w, strength });
            }
        }
    }
    raw.sort_by(|a, b| a.frequency.total_cmp(&b.frequency));
    let mut lines: Vec<SpinLine> = Vec::new();
    for l in raw {
        match lines.last_mut() {
            Some(last) if (l.frequency - last.frequency).abs() <= resolve => {
                let total = last.strength + l.strength;
                last.frequency = (last.frequency * last.strength + l.frequency * l.strength) / total;
                last.strength = total;
            }
            _ => lines.push(l),
        }
    }
    Ok(lines)
}

fn lorentzian(x: f64, fwhm: f64) -> f64 {
    let hw = 0.5 * fwhm;
    hw / (PI * (x * x + hw * hw))
}

pub fn odmr_spectrum(spec: &SpinSystemSpec, grid: FrequencyGrid, linewidth: f64) -> Result<OdmrSpectrum, SpinError> {
    if !(linewidth > 0.0) {
        return Err(SpinError::InvalidSpec(format!(
            "linewidth must be positive, got {linewidth}"
        )));
    }
    let lines = transition_lines(spec)?;
    let intensity = grid
        .iter()
        .map(|w| {
            lines
                .iter()
                .map(|l| l.strength * lorentzian(w - l.frequency, linewidth))
                .sum()
        })
        .collect();
    Ok(OdmrSpectrum { lines, grid, intensity })
}

/// Electron-only eigenstates (fine structure + Zeeman), ascending.
pub fn electron_levels(spec: &SpinSystemSpec) -> Result<SpinEigensystem, SpinError> {
    let bare = SpinSystemSpec {
        nuclei: vec![],
        ..spec.clone()
    };
    diagonalize(&build_spin_hamiltonian(&bare)?)
}

/// ⟨S⟩ for each electron-only eigenstate.
pub fn electron_moments(levels: &SpinEigensystem) -> Vec<Vector3<f64>> {
    let s = spin_operators(2);
    (0..3)
        .map(|k| {
            let v = levels.states.column(k);
            Vector3::from_fn(|axis, _| (v.adjoint() * &s[axis] * v)[(0, 0)].re)
        })
        .collect()
}

/// Assigns each eigenvector of the full Hamiltonian to the electron level and
/// nuclear projection (index into m = I..−I of the single nucleus) it overlaps
/// most. Requires exactly one nucleus.
pub fn label_eigenstates(spec: &SpinSystemSpec, eig: &SpinEigensystem) -> Result<Vec<(usize, usize)>, SpinError> {
    let [nucleus] = spec.nuclei.as_slice() else {
        return Err(SpinError::PreconditionViolated("exactly one nucleus required".into()));
    };
    let nn = nucleus.twice_spin()? + 1;
    let electron = electron_levels(spec)?;
    let mut labels = Vec::with_capacity(eig.energies.len());
    for col in 0..eig.energies.len() {
        let v = eig.states.column(col);
        let mut best = (0, 0, -1.0);
        for a in 0..3 {
            for m in 0..nn {
                let mut amp = Complex64::new(0.0, 0.0);
                for e in 0..3 {
                    amp += electron.states[(e, a)].conj() * v[e * nn + m];
                }
                let p = amp.norm_sqr();
                if p > best.2 {
                    best = (a, m, p);
                }
            }
        }
        labels.push((best.0, best.1));
    }
    Ok(labels)
}

/// Hyperfine doublet of one electron transition (I = 1/2 nucleus).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HyperfineDoublet {
    pub lower_level: usize,
    pub upper_level: usize,
    /// Electron-only transition frequency, rad/s.
    pub center: f64,
    /// |(⟨S⟩_upper − ⟨S⟩_lower)·A·ẑ|: first-order secular splitting, rad/s.
    pub first_order_splitting: f64,
    /// Splitting of the two Δm_I = 0 lines from full diagonalization, rad/s.
    pub exact_splitting: f64,
}

/// Compares first-order hyperfine splittings of every electron transition with
/// the full-diagonalization result. One I = 1/2 nucleus, quantized along z.
pub fn hyperfine_doublets(spec: &SpinSystemSpec) -> Result<Vec<HyperfineDoublet>, SpinError> {
    let [nucleus] = spec.nuclei.as_slice() else {
        return Err(SpinError::PreconditionViolated("exactly one nucleus required".into()));
    };
    if nucleus.twice_spin()? != 1 {
        return Err(SpinError::PreconditionViolated("nucleus must have I = 1/2".into()));
    }
    let electron = electron_levels(spec)?;
    let moments = electron_moments(&electron);
    let a_z = nucleus.tensor().column(2).into_owned();

    let eig = diagonalize(&build_spin_hamiltonian(spec)?)?;
    let labels = label_eigenstates(spec, &eig)?;
    let mut energy = [[f64::NAN; 2]; 3];
    for (k, &(a, m)) in labels.iter().enumerate() {
        energy[a][m] = eig.energies[k];
    }
    if energy.iter().flatten().any(|e| e.is_nan()) {
        return Err(SpinError::PreconditionViolated(
            "eigenstates do not map one-to-one onto electron levels (hyperfine too strong)".into(),
        ));
    }
    let mut out = Vec::new();
    for lo in 0..3 {
        for hi in (lo + 1)..3 {
            let first = (moments[hi] - moments[lo]).dot(&a_z).abs();
            let up = energy[hi][0] - energy[lo][0];
            let down = energy[hi][1] - energy[lo][1];
            out.push(HyperfineDoublet {
                lower_level: lo,
                upper_level: hi,
                center: electron.energies[hi] - electron.energies[lo],
                first_order_splitting: first,
                exact_splitting: (up - down).abs(),
            });
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, schemars::JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct CrotRequest {
    /// Drive carrier, rad/s.
    #[serde(deserialize_with = "units::de::rad_s")]
    #[schemars(with = "units::QuantityInput")]
    pub drive_frequency: f64,
    /// Rabi frequency on the addressed transition, rad/s.
    #[serde(deserialize_with = "units::de::rad_s")]
    #[schemars(with = "units::QuantityInput")]
    pub rabi_frequency: f64,
    /// Pulse duration, s.
    #[serde(deserialize_with = "units::de::seconds")]
    #[schemars(with = "units::QuantityInput")]
    pub duration: f64,
    /// Direction of the oscillating magnetic field (normalized internally).
    #[serde(default = "default_axis")]
    pub drive_axis: [f64; 3],
    /// Upper bound on RK4 steps before giving up.
    #[serde(default = "default_step_budget")]
    pub step_budget: usize,
}

fn default_axis() -> [f64; 3] {
    [1.0, 0.0, 0.0]
}

fn default_step_budget() -> usize {
    50_000_000
}

impl CrotRequest {
    pub fn new(drive_frequency: f64, rabi_frequency: f64, duration: f64) -> Self {
        Self {
            drive_frequency,
            rabi_frequency,
            duration,
            drive_axis: default_axis(),
            step_budget: default_step_budget(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct CrotResult {
    /// Propagator in the interaction picture of the static Hamiltonian,
    /// expressed in its eigenbasis.
    pub unitary: CMatrix,
    /// Eigenbasis indices of the addressed subspace: the driven pair
    /// (lower, upper) followed by the spectator pair with the other m_I.
    pub subspace: [usize; 4],
    /// 4×4 target: π rotation on the driven pair, identity on the spectator.
    pub ideal: CMatrix,
    /// |Tr(U_ideal† U_sub)/4|².
    pub fidelity: f64,
    /// |⟨upper|U|lower⟩|² on the driven pair.
    pub driven_transfer: f64,
    /// Same for the spectator pair.
    pub spectator_transfer: f64,
    /// Frequency separation between the driven and spectator lines, rad/s.
    pub hyperfine_splitting: f64,
    pub steps: usize,
    pub warnings: Vec<String>,
}

impl CrotResult {
    /// 4×4 block of the propagator on [`Self::subspace`].
    pub fn subspace_block(&self) -> CMatrix {
        CMatrix::from_fn(4, 4, |i, j| self.unitary[(self.subspace[i], self.subspace[j])])
    }
}

/// |Tr(target† U)/n|².
pub fn gate_fidelity(target: &CMatrix, actual: &CMatrix) -> f64 {
    let n = target.nrows() as f64;
    ((target.adjoint() * actual).trace() / n).norm_sqr()
}

/// Drives the electron spin with B₁ cos(ω t) along `drive_axis` and integrates
/// the Schrödinger equation without a rotating-wave approximation. The result
/// is compared with the controlled rotation conditioned on the nuclear state
/// of the line nearest the drive frequency.
pub fn crot_gate(spec: &SpinSystemSpec, req: &CrotRequest) -> Result<CrotResult, SpinError> {
    let [nucleus] = spec.nuclei.as_slice() else {
        return Err(SpinError::PreconditionViolated(format!(
            "CROT needs exactly one nucleus, found {}",
            spec.nuclei.len()
        )));
    };
    if nucleus.twice_spin()? != 1 {
        return Err(SpinError::PreconditionViolated(format!(
            "CROT needs I = 1/2, found I = {}",
            nucleus.spin
        )));
    }
    if !(req.duration >= 0.0) || !(req.rabi_frequency >= 0.0) || !(req.drive_frequency > 0.0) {
        return Err(SpinError::InvalidSpec(
            "drive frequency must be positive; rabi and duration non-negative".into(),
        ));
    }
    let axis = Vector3::from(req.drive_axis);
    if axis.norm() == 0.0 {
        return Err(SpinError::InvalidSpec("drive axis must be non-zero".into()));
    }
    let axis = axis.normalize();

    let eig = diagonalize(&build_spin_hamiltonian(spec)?)?;
    let labels = label_eigenstates(spec, &eig)?;
    let s = electron_operators(spec)?;
    let drive_op = &s[0] * c(axis[0]) + &s[1] * c(axis[1]) + &s[2] * c(axis[2]);
    let w = eig.states.adjoint() * drive_op * &eig.states;
    let n = eig.energies.len();
    let e = &eig.energies;

    // Addressed line: allowed Δm_I = 0 pair closest to the drive.
    let wmax = w.camax();
    let mut best: Option<(usize, usize, f64)> = None;
    for i in 0..n {
        for j in (i + 1)..n {
            if labels[i].1 != labels[j].1 || labels[i].0 == labels[j].0 || w[(i, j)].norm() < 1e-3 * wmax {
                continue;
            }
            let miss = ((e[j] - e[i]) - req.drive_frequency).abs();
            if best.is_none_or(|b| miss < b.2) {
                best = Some((i, j, miss));
            }
        }
    }
    let (lo, hi, _) = best
        .ok_or_else(|| SpinError::PreconditionViolated("no allowed electron transition for this drive axis".into()))?;
    let find = |level: usize, m: usize| labels.iter().position(|&l| l == (level, m)).unwrap();
    let other_m = 1 - labels[lo].1;
    let spec_lo = find(labels[lo].0, other_m);
    let spec_hi = find(labels[hi].0, other_m);
    let subspace = [lo, hi, spec_lo, spec_hi];
    let splitting = ((e[hi] - e[lo]) - (e[spec_hi] - e[spec_lo])).abs();

    let mut warnings = Vec::new();
    if req.rabi_frequency > 0.1 * splitting {
        let msg = format!(
            "Rabi frequency {:.3e} rad/s is not small against the hyperfine splitting {:.3e} rad/s",
            req.rabi_frequency, splitting
        );
        log::warn!("{msg}");
        warnings.push(msg);
    }

    let coupling = w[(lo, hi)];
    let amplitude = req.rabi_frequency / coupling.norm();

    // Interaction picture w.r.t. the static Hamiltonian, in its eigenbasis:
    // H_I(t)_jk = Ω_d cos(ω t) W_jk exp(i (E_j − E_k) t).
    let max_gap = e[n - 1] - e[0];
    let fastest = max_gap + req.drive_frequency;
    let min_steps = ((50.0 * fastest * req.duration).ceil() as usize).max(16);
    let omega_d = req.drive_frequency;
    let propagate = |steps: usize| -> CMatrix {
        let mut u = identity(n);
        if amplitude == 0.0 || req.duration == 0.0 {
            return u;
        }
        let mut phases = vec![Complex64::new(0.0, 0.0); n];
        for col in 0..n {
            let y0: Vec<Complex64> = u.column(col).iter().copied().collect();
            let y = rk4_fixed(
                |t, y, dy| {
                    let drive = amplitude * (omega_d * t).cos();
                    for (k, p) in phases.iter_mut().enumerate() {
                        *p = Complex64::from_polar(1.0, e[k] * t);
                    }
                    for j in 0..n {
                        let mut acc = Complex64::new(0.0, 0.0);
                        for k in 0..n {
                            acc += w[(j, k)] * phases[k].conj() * y[k];
                        }
                        dy[j] = Complex64::new(0.0, -drive) * phases[j] * acc;
                    }
                },
                0.0,
                req.duration,
                &y0,
                steps,
            );
            for (r, v) in y.into_iter().enumerate() {
                u[(r, col)] = v;
            }
        }
        u
    };

    // Richardson-style refinement: halve the step until successive results agree.
    let mut steps = min_steps;
    let mut coarse = propagate(steps);
    let mut fine;
    loop {
        if 2 * steps > req.step_budget {
            return Err(SpinError::StepBudgetExceeded {
                needed: 2 * steps,
                budget: req.step_budget,
            });
        }
        fine = propagate(2 * steps);
        steps *= 2;
        let err = (&fine - &coarse).camax() / 15.0;
        if err <= 1e-11 {
            break;
        }
        coarse = fine.clone();
    }

    let phase = Complex64::from_polar(1.0, coupling.arg());
    let i = Complex64::new(0.0, 1.0);
    let mut ideal = CMatrix::zeros(4, 4);
    ideal[(0, 1)] = -i * phase;
    ideal[(1, 0)] = -i * phase.conj();
    ideal[(2, 2)] = c(1.0);
    ideal[(3, 3)] = c(1.0);

    let mut result = CrotResult {
        unitary: fine,
        subspace,
        ideal,
        fidelity: 0.0,
        driven_transfer: 0.0,
        spectator_transfer: 0.0,
        hyperfine_splitting: splitting,
        steps,
        warnings,
    };
    let block = result.subspace_block();
    result.fidelity = gate_fidelity(&result.ideal, &block);
    result.driven_transfer = block[(1, 0)].norm_sqr();
    result.spectator_transfer = block[(3, 2)].norm_sqr();
    Ok(result)
}
