//! One interface over the four ways of computing P_n(t).

use crate::circuit::{build_trotter_step, gate_census, map_to_qubits, route, Circuit, GateDurations, Layout, Topology};
use crate::emulator::{
    calibrated_oscillator_t1, donor_state, run_density_matrix, run_noiseless, run_trajectories, NoiseModel, NoiseScope, QubitNoise,
    ShotTable, DEFAULT_SHOTS,
};
use crate::error::{CircuitError, EngineError};
use crate::mitigation::{conditioned_marginals, site_populations, FilterReport, Mitigation, DYNAMICS_MAX_QUANTA};
use crate::model::ModelSpec;
use crate::oracle::Oracle;
use crate::series::{PopulationSeries, Provenance};
use crate::units::Femtoseconds;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EngineKind {
    Oracle,
    Noiseless,
    Density,
    Trajectories,
}

impl EngineKind {
    pub fn name(self) -> &'static str {
        match self {
            EngineKind::Oracle => "oracle",
            EngineKind::Noiseless => "noiseless",
            EngineKind::Density => "density",
            EngineKind::Trajectories => "trajectories",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        [EngineKind::Oracle, EngineKind::Noiseless, EngineKind::Density, EngineKind::Trajectories].into_iter().find(|k| k.name() == s)
    }
}

/// Where the hardware noise of an emulation comes from. Resolved per chain
/// length because register sizes differ.
#[derive(Clone, Debug, PartialEq)]
pub enum NoiseSource {
    Noiseless,
    /// Median calibration data for the device class of the chain length.
    HardwareMedians,
    Uniform { qubit: QubitNoise, scope: NoiseScope },
    /// Oscillator-only amplitude damping whose per-step effect equals the
    /// model's damping rate.
    CalibratedDamping,
    Model(NoiseModel),
}

impl NoiseSource {
    pub fn resolve(&self, spec: &ModelSpec, circuit: &Circuit, durations: &GateDurations) -> Result<NoiseModel, EngineError> {
        let n = circuit.n_physical;
        let model = match self {
            NoiseSource::Noiseless => NoiseModel::noiseless(n),
            NoiseSource::HardwareMedians => NoiseModel::hardware_medians(spec.n_sites),
            NoiseSource::Uniform { qubit, scope } => NoiseModel::uniform(n, *qubit, *scope),
            NoiseSource::CalibratedDamping if spec.damping.0 == 0.0 => NoiseModel::noiseless(n),
            NoiseSource::CalibratedDamping => {
                let census = gate_census(circuit, durations)?;
                NoiseModel::oscillator_damping(n, calibrated_oscillator_t1(&census, spec.damping, spec.dt))
            }
            NoiseSource::Model(m) => m.clone(),
        };
        Ok(model.with_durations(durations.clone()))
    }
}

/// Engine selection with the settings the circuit engines need.
#[derive(Clone, Debug, PartialEq)]
pub struct Engine {
    pub kind: EngineKind,
    pub topology: Topology,
    pub noise: NoiseSource,
    pub durations: GateDurations,
    pub mitigation: Mitigation,
    pub shots: usize,
    pub seed: u64,
}

/// Result of one evolution.
#[derive(Clone, Debug)]
pub struct EngineRun {
    /// Mitigated populations (equal to `raw` when mitigation is off or the
    /// engine is exact).
    pub series: PopulationSeries,
    pub raw: PopulationSeries,
    pub shots: Option<ShotTable>,
    pub filter_report: Option<FilterReport>,
}

impl Engine {
    pub fn new(kind: EngineKind) -> Self {
        Engine {
            kind,
            topology: Topology::HeavyHex,
            noise: NoiseSource::Noiseless,
            durations: GateDurations::default(),
            mitigation: Mitigation::full(DYNAMICS_MAX_QUANTA),
            shots: DEFAULT_SHOTS,
            seed: 0,
        }
    }

    pub fn oracle() -> Self {
        Engine::new(EngineKind::Oracle)
    }

    pub fn noiseless() -> Self {
        Engine::new(EngineKind::Noiseless)
    }

    pub fn density(noise: NoiseSource) -> Self {
        Engine { noise, ..Engine::new(EngineKind::Density) }
    }

    pub fn trajectories(noise: NoiseSource, shots: usize, seed: u64) -> Self {
        Engine { noise, shots, seed, ..Engine::new(EngineKind::Trajectories) }
    }

    pub fn with_mitigation(self, mitigation: Mitigation) -> Self {
        Engine { mitigation, ..self }
    }

    pub fn with_topology(self, topology: Topology) -> Self {
        Engine { topology, ..self }
    }

    /// One Trotter step of the spec, routed onto the engine's topology.
    pub fn circuit(&self, spec: &ModelSpec) -> Result<Circuit, EngineError> {
        spec.validate()?;
        let logical = build_trotter_step(&map_to_qubits(spec, 1), spec.dt);
        let layout = match self.topology {
            Topology::AllToAll => return Ok(logical),
            Topology::HeavyHex => Layout::heavy_hex(spec.n_sites),
            Topology::SquareGrid => Layout::square_grid(spec.n_sites),
            Topology::Custom => {
                return Err(CircuitError::Unroutable { gate: "-".into(), reason: "custom layouts must be routed explicitly".into() }.into())
            }
        };
        Ok(route(&logical, &layout)?)
    }

    /// Number of model steps covering `t_final`.
    pub fn steps(spec: &ModelSpec, t_final: Femtoseconds) -> usize {
        (t_final.0 / spec.dt.0 - 1e-9).ceil().max(0.0) as usize
    }

    /// Populations from the donor state up to `t_final`.
    pub fn evolve(&self, spec: &ModelSpec, t_final: Femtoseconds) -> Result<EngineRun, EngineError> {
        let exact = |series: PopulationSeries| EngineRun { raw: series.clone(), series, shots: None, filter_report: None };
        match self.kind {
            EngineKind::Oracle => Ok(exact(Oracle::new(spec)?.population_series(t_final, 1)?)),
            EngineKind::Noiseless => {
                let circuit = self.circuit(spec)?;
                Ok(exact(run_noiseless(&circuit, Self::steps(spec, t_final), &donor_state(&circuit))?.series))
            }
            EngineKind::Density => {
                let circuit = self.circuit(spec)?;
                let noise = self.noise.resolve(spec, &circuit, &self.durations)?;
                let run = run_density_matrix(&circuit, Self::steps(spec, t_final), &noise, &donor_state(&circuit))?;
                let marginals = |m: &Mitigation| -> PopulationSeries {
                    let pops = run
                        .distributions
                        .iter()
                        .map(|d| conditioned_marginals(d, circuit.n_sites, circuit.n_logical(), m).0[..circuit.n_sites].to_vec())
                        .collect();
                    PopulationSeries::new(run.series.times.clone(), pops, Provenance::Density)
                };
                Ok(EngineRun { series: marginals(&self.mitigation), raw: marginals(&Mitigation::OFF), shots: None, filter_report: None })
            }
            EngineKind::Trajectories => {
                let circuit = self.circuit(spec)?;
                let noise = self.noise.resolve(spec, &circuit, &self.durations)?;
                let table = run_trajectories(&circuit, Self::steps(spec, t_final), &noise, self.shots, self.seed, &donor_state(&circuit))?;
                let report = FilterReport::new(&table, self.mitigation.max_quanta.unwrap_or(table.n_qubits));
                Ok(EngineRun {
                    series: site_populations(&self.mitigation.apply(&table)),
                    raw: site_populations(&table),
                    shots: Some(table),
                    filter_report: Some(report),
                })
            }
        }
    }
}
