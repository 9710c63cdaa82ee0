//! Open-system dynamics: Lindblad propagation, steady states, photon
//! correlations and classical rate networks.
//!
//! Density matrices are propagated under
//!
//! ```text
//! dρ/dt = −i[H, ρ] + Σ_k γ_k (L_k ρ L_k† − ½{L_k†L_k, ρ})
//! ```
//!
//! with H in rad/s and times in seconds.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::rngs::ChaCha8Rng;
use rand::{RngExt, SeedableRng};
use thiserror::Error;

use crate::levels::{classify_transition, LevelKet, Sublevel};
use crate::numerics::linalg::{c, dagger, hermiticity_defect, identity, kron, min_eigenvalue, trace};
use crate::numerics::ode::{integrate_adaptive, OdeError, Tolerances};
use crate::numerics::{CMatrix, CVector};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DynamicsError {
    #[error("invalid open system: {0}")]
    InvalidSystem(String),
    #[error("invalid density matrix: {0}")]
    InvalidState(String),
    #[error(transparent)]
    Ode(#[from] OdeError),
    #[error("Liouvillian has {0} stationary states; steady state is not unique")]
    DegenerateSteadyState(usize),
    #[error("rate network is singular: {0}")]
    SingularNetwork(String),
    #[error("invalid rate network: {0}")]
    InvalidNetwork(String),
}

/// Tolerance on the input density matrix (trace, Hermiticity, positivity).
pub const STATE_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone)]
pub struct CollapseChannel {
    pub operator: CMatrix,
    /// rad/s
    pub rate: f64,
}

#[derive(Debug, Clone)]
pub struct OpenSystem {
    hamiltonian: CMatrix,
    channels: Vec<CollapseChannel>,
}

impl OpenSystem {
    pub fn new(hamiltonian: CMatrix, channels: Vec<CollapseChannel>) -> Result<Self, DynamicsError> {
        let n = hamiltonian.nrows();
        if n == 0 || hamiltonian.ncols() != n {
            return Err(DynamicsError::InvalidSystem(
                "Hamiltonian must be square and non-empty".into(),
            ));
        }
        let scale = hamiltonian.camax().max(1.0);
        if hermiticity_defect(&hamiltonian) > 1e-12 * scale {
            return Err(DynamicsError::InvalidSystem("Hamiltonian is not Hermitian".into()));
        }
        for (k, ch) in channels.iter().enumerate() {
            if ch.operator.shape() != (n, n) {
                return Err(DynamicsError::InvalidSystem(format!(
                    "collapse operator {k} has shape {:?}, expected ({n}, {n})",
                    ch.operator.shape()
                )));
            }
            if !(ch.rate >= 0.0 && ch.rate.is_finite()) {
                return Err(DynamicsError::InvalidSystem(format!("collapse rate {k} must be ≥ 0")));
            }
        }
        Ok(Self { hamiltonian, channels })
    }

    pub fn dimension(&self) -> usize {
        self.hamiltonian.nrows()
    }

    pub fn hamiltonian(&self) -> &CMatrix {
        &self.hamiltonian
    }

    pub fn channels(&self) -> &[CollapseChannel] {
        &self.channels
    }

    pub fn max_rate(&self) -> f64 {
        self.channels.iter().map(|c| c.rate).fold(0.0, f64::max)
    }

    /// H − (i/2) Σ γ L†L.
    pub fn effective_hamiltonian(&self) -> CMatrix {
        let mut h = self.hamiltonian.clone();
        for ch in &self.channels {
            h -= (dagger(&ch.operator) * &ch.operator) * Complex64::new(0.0, 0.5 * ch.rate);
        }
        h
    }

    /// Column-stacked superoperator: vec(dρ/dt) = 𝓛 vec(ρ).
    pub fn liouvillian(&self) -> CMatrix {
        let n = self.dimension();
        let id = identity(n);
        let heff = self.effective_hamiltonian();
        let mut l = (kron(&id, &heff) - kron(&heff.conjugate(), &id)) * Complex64::new(0.0, -1.0);
        for ch in &self.channels {
            l += kron(&ch.operator.conjugate(), &ch.operator) * c(ch.rate);
        }
        l
    }

    fn derivative(&self, heff: &CMatrix, rho: &CMatrix) -> CMatrix {
        let i = Complex64::new(0.0, 1.0);
        let mut d = (heff * rho - rho * dagger(heff)) * (-i);
        for ch in &self.channels {
            if ch.rate != 0.0 {
                d += (&ch.operator * rho * dagger(&ch.operator)) * c(ch.rate);
            }
        }
        d
    }
}

pub fn check_density_matrix(rho: &CMatrix, n: usize) -> Result<(), DynamicsError> {
    if rho.shape() != (n, n) {
        return Err(DynamicsError::InvalidState(format!(
            "shape {:?}, expected ({n}, {n})",
            rho.shape()
        )));
    }
    let h = hermiticity_defect(rho);
    if h > STATE_TOLERANCE {
        return Err(DynamicsError::InvalidState(format!("not Hermitian (defect {h:e})")));
    }
    let tr = trace(rho);
    if (tr.re - 1.0).abs() > STATE_TOLERANCE || tr.im.abs() > STATE_TOLERANCE {
        return Err(DynamicsError::InvalidState(format!("trace {tr} ≠ 1")));
    }
    let m = min_eigenvalue(rho);
    if m < -STATE_TOLERANCE {
        return Err(DynamicsError::InvalidState(format!("negative eigenvalue {m:e}")));
    }
    Ok(())
}

/// Propagates `rho0` and returns ρ at each of `times` (seconds, sorted, ≥ 0).
pub fn evolve(system: &OpenSystem, rho0: &CMatrix, times: &[f64]) -> Result<Vec<CMatrix>, DynamicsError> {
    check_density_matrix(rho0, system.dimension())?;
    propagate(system, rho0, times)
}

fn propagate(system: &OpenSystem, rho0: &CMatrix, times: &[f64]) -> Result<Vec<CMatrix>, DynamicsError> {
    let n = system.dimension();
    let heff = system.effective_hamiltonian();
    let trivial = system.hamiltonian.iter().all(|z| *z == c(0.0)) && system.channels.iter().all(|c| c.rate == 0.0);
    if trivial {
        if times.windows(2).any(|w| w[1] < w[0]) || times.first().is_some_and(|&t| t < 0.0) {
            return Err(OdeError::BadTimes.into());
        }
        return Ok(vec![rho0.clone(); times.len()]);
    }
    let states = integrate_adaptive(
        |_, y, dy| {
            let rho = CMatrix::from_column_slice(n, n, y);
            dy.copy_from_slice(system.derivative(&heff, &rho).as_slice());
        },
        0.0,
        rho0.as_slice(),
        times,
        Tolerances::default(),
    )?;
    Ok(states.into_iter().map(|y| CMatrix::from_vec(n, n, y)).collect())
}

/// Relative singular-value threshold below which a Liouvillian direction
/// counts as stationary.
const NULL_TOLERANCE: f64 = 1e-10;

/// Unique stationary state of the Liouvillian.
pub fn steady_state(system: &OpenSystem) -> Result<CMatrix, DynamicsError> {
    let n = system.dimension();
    let l = system.liouvillian();
    let svd = l.svd(false, true);
    let v_t = svd.v_t.expect("requested V^T");
    let sv = &svd.singular_values;
    let smax = sv.max().max(f64::MIN_POSITIVE);
    let nullity = sv.iter().filter(|&&s| s <= NULL_TOLERANCE * smax).count();
    if nullity > 1 {
        log::warn!("Liouvillian null space has dimension {nullity}");
        return Err(DynamicsError::DegenerateSteadyState(nullity));
    }
    let imin = sv.imin();
    let v: Vec<Complex64> = v_t.row(imin).iter().map(|z| z.conj()).collect();
    let mut rho = CMatrix::from_column_slice(n, n, &v);
    rho = (&rho + dagger(&rho)) * c(0.5);
    let tr = trace(&rho);
    rho /= tr;
    Ok(rho)
}

/// ⟨op⟩ = Tr(op ρ).
pub fn expectation(op: &CMatrix, rho: &CMatrix) -> Complex64 {
    trace(&(op * rho))
}

/// Normalized intensity correlation g²(τ) = ⟨a†(0)a†(τ)a(τ)a(0)⟩/⟨a†a⟩² in the
/// steady state, by the quantum regression theorem.
pub fn g2_correlation(system: &OpenSystem, emission: &CMatrix, taus: &[f64]) -> Result<Vec<f64>, DynamicsError> {
    let n = system.dimension();
    if emission.shape() != (n, n) {
        return Err(DynamicsError::InvalidSystem(
            "emission operator has the wrong shape".into(),
        ));
    }
    let rho_ss = steady_state(system)?;
    let number = dagger(emission) * emission;
    let occupation = expectation(&number, &rho_ss).re;
    if !(occupation > 0.0) {
        return Err(DynamicsError::InvalidState(
            "steady-state emission rate vanishes; g² undefined".into(),
        ));
    }
    let conditioned = emission * &rho_ss * dagger(emission) / c(occupation);
    let traj = propagate(system, &conditioned, taus)?;
    Ok(traj.iter().map(|r| expectation(&number, r).re / occupation).collect())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JumpStatistics {
    pub mean: f64,
    pub standard_error: f64,
    pub trajectories: usize,
}

/// Quantum-jump unravelling: counts jumps on `channel` during `[0, window]`
/// starting from the pure state `psi0`. No-jump evolution uses the exact
/// step propagator exp(−i H_eff dt) with `steps` steps; jump times are
/// resolved to one step.
pub fn jump_count_statistics(
    system: &OpenSystem,
    psi0: &CVector,
    channel: usize,
    window: f64,
    steps: usize,
    trajectories: usize,
    seed: u64,
) -> Result<JumpStatistics, DynamicsError> {
    let n = system.dimension();
    if psi0.len() != n || channel >= system.channels.len() || !(window > 0.0) || steps == 0 || trajectories < 2 {
        return Err(DynamicsError::InvalidSystem("bad quantum-jump request".into()));
    }
    let dt = window / steps as f64;
    let step = (system.effective_hamiltonian() * Complex64::new(0.0, -dt)).exp();
    let jumps: Vec<CMatrix> = system
        .channels
        .iter()
        .map(|ch| &ch.operator * c(ch.rate.sqrt()))
        .collect();
    let start = psi0 / c(psi0.norm());
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut sum = 0.0;
    let mut sum_sq = 0.0;
    for _ in 0..trajectories {
        let mut psi = start.clone();
        let mut threshold: f64 = rng.random();
        let mut count = 0u64;
        for _ in 0..steps {
            psi = &step * psi;
            if psi.norm_squared() > threshold {
                continue;
            }
            let weights: Vec<f64> = jumps.iter().map(|j| (j * &psi).norm_squared()).collect();
            let total: f64 = weights.iter().sum();
            let mut pick = rng.random::<f64>() * total;
            let mut k = weights.len() - 1;
            for (i, w) in weights.iter().enumerate() {
                if pick < *w {
                    k = i;
                    break;
                }
                pick -= w;
            }
            if k == channel {
                count += 1;
            }
            psi = &jumps[k] * psi;
            psi /= c(psi.norm());
            threshold = rng.random();
        }
        let x = count as f64;
        sum += x;
        sum_sq += x * x;
    }
    let m = trajectories as f64;
    let mean = sum / m;
    let var = (sum_sq / m - mean * mean) * m / (m - 1.0);
    Ok(JumpStatistics {
        mean,
        standard_error: (var.max(0.0) / m).sqrt(),
        trajectories,
    })
}

/// Two-level emitter {|g⟩, |e⟩} in the frame rotating at the drive:
/// H = −Δ|e⟩⟨e| + (Ω/2)σ_x, spontaneous decay γ0 and optional pure
/// dephasing γ_φ on σ_z.
pub fn driven_two_level(rabi: f64, detuning: f64, gamma0: f64, dephasing: f64) -> OpenSystem {
    let mut h = CMatrix::zeros(2, 2);
    h[(1, 1)] = c(-detuning);
    h[(0, 1)] = c(0.5 * rabi);
    h[(1, 0)] = c(0.5 * rabi);
    let mut channels = vec![CollapseChannel {
        operator: lowering(),
        rate: gamma0,
    }];
    if dephasing > 0.0 {
        let mut sz = CMatrix::zeros(2, 2);
        sz[(0, 0)] = c(-1.0);
        sz[(1, 1)] = c(1.0);
        channels.push(CollapseChannel {
            operator: sz,
            rate: 0.5 * dephasing,
        });
    }
    OpenSystem::new(h, channels).expect("two-level system is well formed")
}

/// σ₋ = |g⟩⟨e| in the {|g⟩, |e⟩} basis.
pub fn lowering() -> CMatrix {
    let mut s = CMatrix::zeros(2, 2);
    s[(0, 1)] = c(1.0);
    s
}

/// Classical population network over labelled levels.
#[derive(Debug, Clone)]
pub struct RateNetwork {
    states: Vec<LevelKet>,
    emissive: Vec<bool>,
    rates: BTreeMap<(usize, usize), f64>,
}

impl RateNetwork {
    pub fn new(states: Vec<LevelKet>, emissive: Vec<bool>) -> Result<Self, DynamicsError> {
        if states.is_empty() || emissive.len() != states.len() {
            return Err(DynamicsError::InvalidNetwork(
                "need one emissive flag per state and at least one state".into(),
            ));
        }
        for (i, s) in states.iter().enumerate() {
            if states[..i].contains(s) {
                return Err(DynamicsError::InvalidNetwork(format!("duplicate state {s}")));
            }
        }
        Ok(Self {
            states,
            emissive,
            rates: BTreeMap::new(),
        })
    }

    pub fn states(&self) -> &[LevelKet] {
        &self.states
    }

    pub fn index_of(&self, ket: &LevelKet) -> Option<usize> {
        self.states.iter().position(|s| s == ket)
    }

    /// Sets (overwrites) the rate `from → to`, rad/s.
    pub fn set_rate(&mut self, from: &LevelKet, to: &LevelKet, rate: f64) -> Result<(), DynamicsError> {
        let i = self
            .index_of(from)
            .ok_or_else(|| DynamicsError::InvalidNetwork(format!("unknown state {from}")))?;
        let j = self
            .index_of(to)
            .ok_or_else(|| DynamicsError::InvalidNetwork(format!("unknown state {to}")))?;
        if i == j {
            return Err(DynamicsError::InvalidNetwork(format!("self-loop on {from}")));
        }
        if !(rate >= 0.0 && rate.is_finite()) {
            return Err(DynamicsError::InvalidNetwork(format!("rate {from} → {to} must be ≥ 0")));
        }
        self.rates.insert((i, j), rate);
        Ok(())
    }

    pub fn add_rate(&mut self, from: &LevelKet, to: &LevelKet, rate: f64) -> Result<(), DynamicsError> {
        let existing = match (self.index_of(from), self.index_of(to)) {
            (Some(i), Some(j)) => self.rates.get(&(i, j)).copied().unwrap_or(0.0),
            _ => 0.0,
        };
        self.set_rate(from, to, existing + rate)
    }

    pub fn rate(&self, from: usize, to: usize) -> f64 {
        self.rates.get(&(from, to)).copied().unwrap_or(0.0)
    }

    fn generator(&self) -> DMatrix<f64> {
        let n = self.states.len();
        let mut m = DMatrix::zeros(n, n);
        for (&(i, j), &k) in &self.rates {
            m[(j, i)] += k;
            m[(i, i)] -= k;
        }
        m
    }

    /// Stationary populations, normalized to one.
    pub fn steady_state(&self) -> Result<Vec<f64>, DynamicsError> {
        let n = self.states.len();
        let m = self.generator();
        let scale = m.amax();
        if scale == 0.0 {
            return if n == 1 {
                Ok(vec![1.0])
            } else {
                Err(DynamicsError::SingularNetwork("no transitions".into()))
            };
        }
        let sv = m.clone().svd(false, false).singular_values;
        let nullity = sv.iter().filter(|&&s| s <= 1e-12 * scale).count();
        if nullity > 1 {
            return Err(DynamicsError::SingularNetwork(format!(
                "{nullity} disconnected stationary components"
            )));
        }
        let mut a = m;
        let mut b = DVector::zeros(n);
        for j in 0..n {
            a[(0, j)] = scale;
        }
        b[0] = scale;
        let p = a
            .lu()
            .solve(&b)
            .ok_or_else(|| DynamicsError::SingularNetwork("steady-state solve failed".into()))?;
        Ok(p.iter().copied().collect())
    }

    /// Σ over emissive states i of p_i Σ_j k_ij, restricted to fluorescence
    /// transitions (ZPL, vibronic and phonon-wing emission).
    pub fn fluorescence(&self, populations: &[f64]) -> f64 {
        self.rates
            .iter()
            .filter(|(&(i, j), _)| {
                self.emissive[i] && classify_transition(&self.states[i], &self.states[j]).is_fluorescence()
            })
            .map(|(&(i, _), &k)| populations[i] * k)
            .sum()
    }

    /// Equivalent Lindblad system with jump operators √k |j⟩⟨i| and no
    /// Hamiltonian.
    pub fn to_open_system(&self) -> OpenSystem {
        let n = self.states.len();
        let channels = self
            .rates
            .iter()
            .map(|(&(i, j), &k)| {
                let mut op = CMatrix::zeros(n, n);
                op[(j, i)] = c(1.0);
                CollapseChannel { operator: op, rate: k }
            })
            .collect();
        OpenSystem::new(CMatrix::zeros(n, n), channels).expect("diagonal network is well formed")
    }
}

/// Standard five-level triplet-shelving network.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize, schemars::JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct TripletPhotophysics {
    /// S0 → S1 optical pump, rad/s.
    #[serde(deserialize_with = "crate::units::de::rad_s")]
    #[schemars(with = "crate::units::QuantityInput")]
    pub pump_rate: f64,
    /// S1 → S0 radiative (ZPL) rate, rad/s.
    #[serde(deserialize_with = "crate::units::de::rad_s")]
    #[schemars(with = "crate::units::QuantityInput")]
    pub radiative_rate: f64,
    /// Total S1 → T1 intersystem crossing rate, rad/s.
    #[serde(deserialize_with = "crate::units::de::rad_s")]
    #[schemars(with = "crate::units::QuantityInput")]
    pub isc_rate: f64,
    /// Fraction of ISC landing in (x, y, z).
    #[serde(default = "default_branching")]
    pub isc_branching: [f64; 3],
    /// T1 sublevel → S0 decay rates (x, y, z), rad/s.
    pub triplet_decay: [f64; 3],
}

fn default_branching() -> [f64; 3] {
    [0.6, 0.3, 0.1]
}

impl TripletPhotophysics {
    pub fn network(&self) -> Result<RateNetwork, DynamicsError> {
        let sum: f64 = self.isc_branching.iter().sum();
        if (sum - 1.0).abs() > 1e-9 || self.isc_branching.iter().any(|&b| b < 0.0) {
            return Err(DynamicsError::InvalidNetwork(
                "ISC branching must be ≥ 0 and sum to 1".into(),
            ));
        }
        let s0 = LevelKet::singlet(0);
        let s1 = LevelKet::singlet(1);
        let mut states = vec![s0.clone(), s1.clone()];
        states.extend(Sublevel::ALL.iter().map(|&s| LevelKet::triplet(1, s)));
        let mut net = RateNetwork::new(states, vec![false, true, false, false, false])?;
        net.set_rate(&s0, &s1, self.pump_rate)?;
        net.set_rate(&s1, &s0, self.radiative_rate)?;
        for (k, &sub) in Sublevel::ALL.iter().enumerate() {
            let t = LevelKet::triplet(1, sub);
            net.set_rate(&s1, &t, self.isc_rate * self.isc_branching[k])?;
            net.set_rate(&t, &s0, self.triplet_decay[k])?;
        }
        Ok(net)
    }
}

/// Relative fluorescence change (F_on − F_off)/F_off when a microwave field
/// mixes two T1 sublevels at `mixing_rate` (rad/s, applied symmetrically).
pub fn odmr_contrast(
    network: &RateNetwork,
    pair: (Sublevel, Sublevel),
    mixing_rate: f64,
) -> Result<f64, DynamicsError> {
    let find = |ket: LevelKet| {
        network
            .index_of(&ket)
            .ok_or_else(|| DynamicsError::InvalidNetwork(format!("network lacks {ket}")))
    };
    find(LevelKet::singlet(0))?;
    find(LevelKet::singlet(1))?;
    for s in Sublevel::ALL {
        find(LevelKet::triplet(1, s))?;
    }
    if pair.0 == pair.1 {
        return Err(DynamicsError::InvalidNetwork(
            "microwave pair must be two distinct sublevels".into(),
        ));
    }
    if !(mixing_rate >= 0.0) {
        return Err(DynamicsError::InvalidNetwork("mixing rate must be ≥ 0".into()));
    }
    let off = network.fluorescence(&network.steady_state()?);
    if !(off > 0.0) {
        return Err(DynamicsError::SingularNetwork(
            "no fluorescence without microwaves".into(),
        ));
    }
    let mut on_net = network.clone();
    let a = LevelKet::triplet(1, pair.0);
    let b = LevelKet::triplet(1, pair.1);
    on_net.add_rate(&a, &b, mixing_rate)?;
    on_net.add_rate(&b, &a, mixing_rate)?;
    let on = on_net.fluorescence(&on_net.steady_state()?);
    Ok((on - off) / off)
}
