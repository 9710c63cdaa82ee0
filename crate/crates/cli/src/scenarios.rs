//! Scenario kinds, their parameter records and runners.

use std::path::{Path, PathBuf};

use hostguest::dynamics::{
    self, driven_two_level, evolve, g2_correlation, jump_count_statistics, lowering, odmr_contrast, steady_state,
    TripletPhotophysics,
};
use hostguest::export;
use hostguest::levels::Sublevel;
use hostguest::numerics::linalg::{c, min_eigenvalue, trace};
use hostguest::numerics::{CMatrix, CVector};
use hostguest::protocols::{
    self, cavity_response, normal_mode_splitting, optomech_cooperativity, raman_memory_efficiency,
    spin_photon_fidelity, transmission_peaks, CavityInterfaceSpec, OptomechParams, RamanMemorySpec,
};
use hostguest::relaxation::{classify_relaxation, two_phonon_rate, RelaxationInput};
use hostguest::screening::{self, fit_linear_scaling, select_candidates, ScreeningError, SelectionCriteria};
use hostguest::spin::{
    build_spin_hamiltonian, crot_gate, diagonalize, hyperfine_doublets, odmr_spectrum, transition_lines, CrotRequest,
    SpinSystemSpec,
};
use hostguest::units;
use hostguest::vibronic::{
    debye_waller, emission_spectrum, tune_to_debye_waller, PhononSpectralDensity, VibronicModel,
};
use hostguest::FrequencyGrid;
use schemars::JsonSchema;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
#[value(rename_all = "snake_case")]
pub enum Kind {
    SpinSpectrum,
    Odmr,
    Crot,
    EmissionSpectrum,
    RelaxationClassify,
    Lindblad,
    G2,
    RamanMemory,
    CavityInterface,
    Optomech,
    Screening,
}

impl Kind {
    pub fn name(self) -> &'static str {
        match self {
            Kind::SpinSpectrum => "spin_spectrum",
            Kind::Odmr => "odmr",
            Kind::Crot => "crot",
            Kind::EmissionSpectrum => "emission_spectrum",
            Kind::RelaxationClassify => "relaxation_classify",
            Kind::Lindblad => "lindblad",
            Kind::G2 => "g2",
            Kind::RamanMemory => "raman_memory",
            Kind::CavityInterface => "cavity_interface",
            Kind::Optomech => "optomech",
            Kind::Screening => "screening",
        }
    }

    /// JSON schema of the kind's `parameters` record.
    pub fn schema(self) -> Value {
        let s = match self {
            Kind::SpinSpectrum => schemars::schema_for!(SpinSpectrumParams),
            Kind::Odmr => schemars::schema_for!(OdmrParams),
            Kind::Crot => schemars::schema_for!(CrotParams),
            Kind::EmissionSpectrum => schemars::schema_for!(EmissionParams),
            Kind::RelaxationClassify => schemars::schema_for!(RelaxationParams),
            Kind::Lindblad => schemars::schema_for!(LindbladParams),
            Kind::G2 => schemars::schema_for!(G2Params),
            Kind::RamanMemory => schemars::schema_for!(RamanMemorySpec),
            Kind::CavityInterface => schemars::schema_for!(CavityParams),
            Kind::Optomech => schemars::schema_for!(OptomechParams),
            Kind::Screening => schemars::schema_for!(ScreeningParams),
        };
        serde_json::to_value(s).expect("schema serializes")
    }
}

#[derive(Debug, Clone, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct SpinSpectrumParams {
    pub spin: SpinSystemSpec,
}

#[derive(Debug, Clone, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct ContrastParams {
    pub photophysics: TripletPhotophysics,
    pub mw_pair: [Sublevel; 2],
    /// rad/s
    #[serde(deserialize_with = "units::de::rad_s")]
    #[schemars(with = "units::QuantityInput")]
    pub mixing_rate: f64,
}

#[derive(Debug, Clone, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct OdmrParams {
    pub spin: SpinSystemSpec,
    /// Microwave frequency grid, rad/s.
    pub grid: FrequencyGrid,
    /// Lorentzian FWHM, rad/s.
    #[serde(deserialize_with = "units::de::rad_s")]
    #[schemars(with = "units::QuantityInput")]
    pub linewidth: f64,
    #[serde(default)]
    pub contrast: Option<ContrastParams>,
}

#[derive(Debug, Clone, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct CrotParams {
    pub spin: SpinSystemSpec,
    pub request: CrotRequest,
}

#[derive(Debug, Clone, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct EmissionParams {
    pub model: VibronicModel,
    /// Emission frequency grid, rad/s.
    pub grid: FrequencyGrid,
    /// Rescale vibron Huang–Rhys factors to reach this Debye–Waller factor.
    #[serde(default)]
    pub target_debye_waller: Option<f64>,
}

#[derive(Debug, Clone, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct TwoPhononParams {
    pub phonons: PhononSpectralDensity,
    /// Cubic anharmonic coupling, rad/s.
    #[serde(deserialize_with = "units::de::rad_s")]
    #[schemars(with = "units::QuantityInput")]
    pub coupling: f64,
    #[serde(default, deserialize_with = "units::de::kelvin")]
    #[schemars(with = "units::QuantityInput")]
    pub temperature: f64,
}

#[derive(Debug, Clone, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct RelaxationParams {
    pub input: RelaxationInput,
    #[serde(default)]
    pub two_phonon: Option<TwoPhononParams>,
}

#[derive(Debug, Clone, Copy, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct TwoLevelParams {
    #[serde(deserialize_with = "units::de::rad_s")]
    #[schemars(with = "units::QuantityInput")]
    pub rabi: f64,
    #[serde(default, deserialize_with = "units::de::rad_s")]
    #[schemars(with = "units::QuantityInput")]
    pub detuning: f64,
    #[serde(deserialize_with = "units::de::rad_s")]
    #[schemars(with = "units::QuantityInput")]
    pub gamma0: f64,
    /// Pure dephasing rate of the coherence, rad/s.
    #[serde(default, deserialize_with = "units::de::rad_s")]
    #[schemars(with = "units::QuantityInput")]
    pub dephasing: f64,
}

impl TwoLevelParams {
    fn validate(&self) -> Result<(), String> {
        if self.rabi >= 0.0 && self.gamma0 > 0.0 && self.dephasing >= 0.0 && self.detuning.is_finite() {
            Ok(())
        } else {
            Err("two-level emitter needs rabi ≥ 0, gamma0 > 0, dephasing ≥ 0".into())
        }
    }

    fn system(&self) -> dynamics::OpenSystem {
        driven_two_level(self.rabi, self.detuning, self.gamma0, self.dephasing)
    }
}

#[derive(Debug, Clone, Copy, Default, Deserialize, JsonSchema)]
#[serde(rename_all = "snake_case")]
pub enum InitialState {
    #[default]
    Ground,
    Excited,
}

#[derive(Debug, Clone, Copy, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct TimeAxis {
    /// s
    #[serde(deserialize_with = "units::de::seconds")]
    #[schemars(with = "units::QuantityInput")]
    pub stop: f64,
    pub points: usize,
}

impl TimeAxis {
    fn validate(&self) -> Result<(), String> {
        if self.stop > 0.0 && self.stop.is_finite() && self.points >= 2 {
            Ok(())
        } else {
            Err("time axis needs stop > 0 and at least 2 points".into())
        }
    }

    fn values(&self) -> Vec<f64> {
        let n = self.points - 1;
        (0..=n).map(|i| self.stop * i as f64 / n as f64).collect()
    }
}

#[derive(Debug, Clone, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct LindbladParams {
    pub emitter: TwoLevelParams,
    pub times: TimeAxis,
    #[serde(default)]
    pub initial: InitialState,
}

#[derive(Debug, Clone, Copy, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct MonteCarloParams {
    pub trajectories: usize,
    /// Counting window after a photon detection, s.
    #[serde(deserialize_with = "units::de::seconds")]
    #[schemars(with = "units::QuantityInput")]
    pub window: f64,
    #[serde(default = "default_mc_steps")]
    pub steps: usize,
}

fn default_mc_steps() -> usize {
    2000
}

#[derive(Debug, Clone, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct G2Params {
    pub emitter: TwoLevelParams,
    pub taus: TimeAxis,
    /// Optional seeded quantum-jump cross-check.
    #[serde(default)]
    pub monte_carlo: Option<MonteCarloParams>,
}

#[derive(Debug, Clone, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct CavityParams {
    pub cavity: CavityInterfaceSpec,
    /// Probe detuning grid, rad/s.
    pub grid: FrequencyGrid,
}

#[derive(Debug, Clone, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct ScreeningParams {
    /// Molecule table, relative to the config file.
    pub input: PathBuf,
    #[serde(default)]
    pub criteria: SelectionCriteria,
}

#[derive(Debug, Clone)]
pub enum Parameters {
    SpinSpectrum(SpinSpectrumParams),
    Odmr(OdmrParams),
    Crot(CrotParams),
    EmissionSpectrum(EmissionParams),
    RelaxationClassify(RelaxationParams),
    Lindblad(LindbladParams),
    G2(G2Params),
    RamanMemory(RamanMemorySpec),
    CavityInterface(CavityParams),
    Optomech(OptomechParams),
    Screening(ScreeningParams),
}

fn from<T: serde::de::DeserializeOwned>(v: Value) -> Result<T, CliError> {
    serde_json::from_value(v).map_err(|e| CliError::Config(format!("parameters: {e}")))
}

fn check(r: Result<(), impl std::fmt::Display>) -> Result<(), CliError> {
    r.map_err(|e| CliError::Config(format!("parameters: {e}")))
}

impl Parameters {
    /// Deserializes and validates the kind's parameter record.
    pub fn parse(kind: Kind, v: Value) -> Result<Self, CliError> {
        let p = match kind {
            Kind::SpinSpectrum => {
                let p: SpinSpectrumParams = from(v)?;
                check(p.spin.validate())?;
                Parameters::SpinSpectrum(p)
            }
            Kind::Odmr => {
                let p: OdmrParams = from(v)?;
                check(p.spin.validate())?;
                if !(p.linewidth > 0.0) {
                    check(Err("linewidth must be positive"))?;
                }
                if let Some(cp) = &p.contrast {
                    check(cp.photophysics.network().map(|_| ()))?;
                    if cp.mw_pair[0] == cp.mw_pair[1] || !(cp.mixing_rate >= 0.0) {
                        check(Err("mw_pair must be two distinct sublevels and mixing_rate ≥ 0"))?;
                    }
                }
                Parameters::Odmr(p)
            }
            Kind::Crot => {
                let p: CrotParams = from(v)?;
                check(p.spin.validate())?;
                Parameters::Crot(p)
            }
            Kind::EmissionSpectrum => {
                let p: EmissionParams = from(v)?;
                check(p.model.validate())?;
                Parameters::EmissionSpectrum(p)
            }
            Kind::RelaxationClassify => {
                let p: RelaxationParams = from(v)?;
                check(p.input.validate())?;
                if let Some(tp) = &p.two_phonon {
                    check(tp.phonons.validate())?;
                }
                Parameters::RelaxationClassify(p)
            }
            Kind::Lindblad => {
                let p: LindbladParams = from(v)?;
                check(p.emitter.validate())?;
                check(p.times.validate())?;
                Parameters::Lindblad(p)
            }
            Kind::G2 => {
                let p: G2Params = from(v)?;
                check(p.emitter.validate())?;
                check(p.taus.validate())?;
                if let Some(mc) = &p.monte_carlo {
                    if mc.trajectories < 2 || mc.steps == 0 || !(mc.window > 0.0) {
                        check(Err("monte_carlo needs ≥ 2 trajectories, steps > 0 and window > 0"))?;
                    }
                }
                Parameters::G2(p)
            }
            Kind::RamanMemory => {
                let p: RamanMemorySpec = from(v)?;
                check(p.validate())?;
                Parameters::RamanMemory(p)
            }
            Kind::CavityInterface => {
                let p: CavityParams = from(v)?;
                check(p.cavity.validate())?;
                Parameters::CavityInterface(p)
            }
            Kind::Optomech => {
                let p: OptomechParams = from(v)?;
                check(optomech_cooperativity(&p).map(|_| ()))?;
                Parameters::Optomech(p)
            }
            Kind::Screening => {
                let p: ScreeningParams = from(v)?;
                check(p.criteria.validate())?;
                Parameters::Screening(p)
            }
        };
        Ok(p)
    }
}

/// Result of one scenario point: a flat summary record and named artifacts.
#[derive(Debug, Clone, Default)]
pub struct Output {
    pub summary: Map<String, Value>,
    pub artifacts: Vec<(String, Vec<u8>)>,
}

impl Output {
    fn put(&mut self, key: &str, v: impl Into<Value>) {
        self.summary.insert(key.to_string(), v.into());
    }

    fn csv(&mut self, name: &str, f: impl FnOnce(&mut Vec<u8>) -> export::ExportResult) -> Result<(), CliError> {
        let mut buf = Vec::new();
        f(&mut buf).map_err(CliError::runtime)?;
        self.artifacts.push((name.to_string(), buf));
        Ok(())
    }
}

/// Hz from rad/s, for reporting.
fn to_hz(w: f64) -> f64 {
    w / (2.0 * std::f64::consts::PI)
}

/// Finite number or null (JSON has no infinities).
fn num(v: f64) -> Value {
    serde_json::Number::from_f64(v).map_or(Value::Null, Value::Number)
}

pub struct Context<'a> {
    pub base_dir: &'a Path,
    pub seed: u64,
}

pub fn run(params: &Parameters, ctx: &Context) -> Result<Output, CliError> {
    let mut out = Output::default();
    match params {
        Parameters::SpinSpectrum(p) => {
            let eig =
                diagonalize(&build_spin_hamiltonian(&p.spin).map_err(CliError::runtime)?).map_err(CliError::runtime)?;
            let lines = transition_lines(&p.spin).map_err(CliError::runtime)?;
            out.put("dimension", eig.energies.len());
            out.put("line_count", lines.len());
            out.put("unitarity_defect", num(eig.unitarity_defect()));
            if p.spin.nuclei.len() == 1 {
                if let Ok(doublets) = hyperfine_doublets(&p.spin) {
                    let worst = doublets
                        .iter()
                        .map(|d| ((d.first_order_splitting - d.exact_splitting) / d.exact_splitting).abs())
                        .fold(0.0, f64::max);
                    out.put("doublet_count", doublets.len());
                    out.put("max_first_order_relative_error", num(worst));
                }
            }
            let energies = eig.energies.clone();
            out.csv("energies.csv", |b| {
                export::write_table(
                    b,
                    &["level", "energy_Hz"],
                    energies.iter().enumerate().map(|(i, &e)| vec![i as f64, to_hz(e)]),
                )
            })?;
            out.csv("lines.csv", |b| {
                export::write_table(
                    b,
                    &["frequency_Hz", "strength"],
                    lines.iter().map(|l| vec![to_hz(l.frequency), l.strength]),
                )
            })?;
        }
        Parameters::Odmr(p) => {
            let spec = odmr_spectrum(&p.spin, p.grid, p.linewidth).map_err(CliError::runtime)?;
            let area = spec.grid.integrate(&spec.intensity);
            let density: Vec<f64> = if area > 0.0 {
                spec.intensity.iter().map(|v| v / area).collect()
            } else {
                spec.intensity.clone()
            };
            out.put("line_count", spec.lines.len());
            if let Some(cp) = &p.contrast {
                let net = cp.photophysics.network().map_err(CliError::runtime)?;
                let k =
                    odmr_contrast(&net, (cp.mw_pair[0], cp.mw_pair[1]), cp.mixing_rate).map_err(CliError::runtime)?;
                out.put("contrast", num(k));
            }
            let grid = spec.grid.values();
            out.csv("odmr_spectrum.csv", |b| export::write_spectrum(b, &grid, &density))?;
        }
        Parameters::Crot(p) => {
            let r = crot_gate(&p.spin, &p.request).map_err(CliError::runtime)?;
            out.put("fidelity", num(r.fidelity));
            out.put("driven_transfer", num(r.driven_transfer));
            out.put("spectator_transfer", num(r.spectator_transfer));
            out.put("hyperfine_splitting_Hz", num(to_hz(r.hyperfine_splitting)));
            out.put("rk4_steps", r.steps);
            out.put("warnings", r.warnings.join("; "));
            let block = r.subspace_block();
            out.csv("crot_subspace.csv", |b| export::write_complex_matrix(b, &block))?;
            out.csv("crot_unitary.csv", |b| export::write_complex_matrix(b, &r.unitary))?;
        }
        Parameters::EmissionSpectrum(p) => {
            let model = match p.target_debye_waller {
                Some(t) => tune_to_debye_waller(&p.model, t).map_err(CliError::runtime)?,
                None => p.model.clone(),
            };
            let alpha = debye_waller(&model).map_err(CliError::runtime)?;
            let s = emission_spectrum(&model, p.grid).map_err(CliError::runtime)?;
            out.put("debye_waller", num(alpha));
            out.put("zpl_linewidth_Hz", num(to_hz(model.zpl_linewidth())));
            for (i, m) in model.vibron_modes.iter().enumerate() {
                out.put(&format!("huang_rhys_{i}"), num(m.huang_rhys));
            }
            let grid = s.grid.values();
            out.csv("emission_spectrum.csv", |b| {
                export::write_spectrum(b, &grid, &s.intensity)
            })?;
        }
        Parameters::RelaxationClassify(p) => {
            let ch = classify_relaxation(&p.input).map_err(CliError::runtime)?;
            out.put("channel", serde_json::to_value(ch).expect("enum serializes"));
            if let Some(tp) = &p.two_phonon {
                match two_phonon_rate(p.input.vibron_frequency, &tp.phonons, tp.coupling, tp.temperature) {
                    Ok(rate) => out.put("two_phonon_rate", num(rate)),
                    Err(hostguest::relaxation::RelaxationError::Domain { .. }) => {
                        out.put("two_phonon_rate", Value::Null)
                    }
                    Err(e) => return Err(CliError::runtime(e)),
                }
            }
        }
        Parameters::Lindblad(p) => {
            let sys = p.emitter.system();
            let mut rho0 = CMatrix::zeros(2, 2);
            match p.initial {
                InitialState::Ground => rho0[(0, 0)] = c(1.0),
                InitialState::Excited => rho0[(1, 1)] = c(1.0),
            }
            let times = p.times.values();
            let traj = evolve(&sys, &rho0, &times).map_err(CliError::runtime)?;
            let ss = steady_state(&sys).map_err(CliError::runtime)?;
            let trace_dev = traj.iter().map(|r| (trace(r).re - 1.0).abs()).fold(0.0, f64::max);
            let min_eig = traj.iter().map(min_eigenvalue).fold(f64::INFINITY, f64::min);
            out.put("steady_state_p_e", num(ss[(1, 1)].re));
            out.put("final_p_e", num(traj.last().map_or(f64::NAN, |r| r[(1, 1)].re)));
            out.put("max_trace_deviation", num(trace_dev));
            out.put("min_eigenvalue", num(min_eig));
            let rows: Vec<Vec<f64>> = traj
                .iter()
                .map(|r| vec![r[(0, 0)].re, r[(1, 1)].re, r[(1, 0)].re, r[(1, 0)].im])
                .collect();
            out.csv("trajectory.csv", |b| {
                export::write_trajectory(b, &times, &["p_g", "p_e", "coherence_re", "coherence_im"], &rows)
            })?;
        }
        Parameters::G2(p) => {
            let sys = p.emitter.system();
            let taus = p.taus.values();
            let g2 = g2_correlation(&sys, &lowering(), &taus).map_err(CliError::runtime)?;
            out.put("g2_zero", num(g2[0]));
            out.put("g2_last", num(*g2.last().expect("≥ 2 points")));
            if let Some(mc) = &p.monte_carlo {
                let ground = CVector::from_vec(vec![c(1.0), c(0.0)]);
                let stats = jump_count_statistics(&sys, &ground, 0, mc.window, mc.steps, mc.trajectories, ctx.seed)
                    .map_err(CliError::runtime)?;
                // Regression prediction: γ0 ∫₀^window p_e(τ) dτ from |g⟩.
                let n = 2000;
                let grid: Vec<f64> = (0..=n).map(|i| mc.window * i as f64 / n as f64).collect();
                let mut r0 = CMatrix::zeros(2, 2);
                r0[(0, 0)] = c(1.0);
                let traj = evolve(&sys, &r0, &grid).map_err(CliError::runtime)?;
                let h = mc.window / n as f64;
                let expected: f64 = p.emitter.gamma0
                    * traj
                        .windows(2)
                        .map(|w| 0.5 * h * (w[0][(1, 1)].re + w[1][(1, 1)].re))
                        .sum::<f64>();
                out.put("mc_mean_jumps", num(stats.mean));
                out.put("mc_standard_error", num(stats.standard_error));
                out.put("regression_expected_jumps", num(expected));
                out.put("mc_seed", ctx.seed);
            }
            out.csv("g2.csv", |b| {
                export::write_table(b, &["time_s", "g2"], taus.iter().zip(&g2).map(|(&t, &g)| vec![t, g]))
            })?;
        }
        Parameters::RamanMemory(p) => {
            let e = raman_memory_efficiency(p).map_err(CliError::runtime)?;
            out.put("storage", num(e.storage));
            out.put("retrieval", num(e.retrieval));
            out.put("hold_survival", num(e.hold_survival));
            out.put("total", num(e.total));
        }
        Parameters::CavityInterface(p) => {
            let pts = cavity_response(&p.cavity, &p.grid).map_err(CliError::runtime)?;
            let on = protocols::cavity_point(&p.cavity, 0.0);
            out.put("cooperativity", num(p.cavity.cooperativity()));
            out.put("resonant_transmission", num(on.transmission.norm_sqr()));
            out.put("resonant_reflection", num(on.reflection.norm_sqr()));
            out.put(
                "spin_photon_fidelity",
                num(spin_photon_fidelity(&p.cavity).map_err(CliError::runtime)?),
            );
            out.put("normal_mode_splitting_Hz", num(to_hz(normal_mode_splitting(&p.cavity))));
            let peaks = transmission_peaks(&pts);
            if let [a, .., b] = peaks.as_slice() {
                out.put("transmission_peak_splitting_Hz", num(to_hz(b - a)));
            } else {
                out.put("transmission_peak_splitting_Hz", Value::Null);
            }
            out.csv("cavity_response.csv", |b| {
                export::write_table(
                    b,
                    &[
                        "detuning_Hz",
                        "reflection",
                        "transmission",
                        "loss",
                        "r_re",
                        "r_im",
                        "t_re",
                        "t_im",
                    ],
                    pts.iter().map(|q| {
                        vec![
                            to_hz(q.detuning),
                            q.reflection.norm_sqr(),
                            q.transmission.norm_sqr(),
                            q.loss,
                            q.reflection.re,
                            q.reflection.im,
                            q.transmission.re,
                            q.transmission.im,
                        ]
                    }),
                )
            })?;
        }
        Parameters::Optomech(p) => {
            let r = optomech_cooperativity(p).map_err(CliError::runtime)?;
            out.put("cooperativity", num(r.cooperativity));
            out.put("divergent", r.divergent);
            out.put("n_thermal", num(r.n_thermal));
            out.put("ultra_strong", r.ultra_strong);
            out.put("g0_over_omega_v", num(p.g0 / p.omega_v));
        }
        Parameters::Screening(p) => {
            let path = ctx.base_dir.join(&p.input);
            let records = screening::ingest(&path).map_err(|e| match e {
                ScreeningError::Io(_)
                | ScreeningError::Parse(_)
                | ScreeningError::BadHeader { .. }
                | ScreeningError::EmptyDataset => CliError::Config(format!("{}: {e}", p.input.display())),
                other => CliError::runtime(other),
            })?;
            let picked = select_candidates(&records, &p.criteria).map_err(CliError::runtime)?;
            out.put("records", records.len());
            out.put("candidates", picked.len());
            out.put("min_t1_ev", num(p.criteria.min_t1));
            out.put("max_s1_ev", num(p.criteria.max_s1));
            match fit_linear_scaling(&records) {
                Ok(f) => {
                    out.put("slope", num(f.slope));
                    out.put("intercept_ev", num(f.intercept));
                    out.put("r_squared", num(f.r_squared));
                }
                Err(_) => {
                    for k in ["slope", "intercept_ev", "r_squared"] {
                        out.put(k, Value::Null);
                    }
                }
            }
            out.csv("candidates.csv", |b| export::write_molecules(b, &picked))?;
        }
    }
    Ok(out)
}
