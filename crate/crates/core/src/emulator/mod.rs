//! Circuit execution: exact state vectors, density matrices, and stochastic
//! trajectories under per-qubit hardware noise.
//!
//! Every backend compiles the circuit once into operations on logical qubits,
//! then repeats that step. Continuous T1/T2 noise is applied after each layer
//! for the layer's duration and depolarizing noise after each gate.

mod block;
mod channels;
mod density;
mod kernels;
mod noise;
mod program;
mod shots;

pub use block::BlockState;
pub use channels::{amplitude_damping, completeness_defect, depolarizing, phase_flip, KRAUS_TOLERANCE};
pub use density::{apply_readout, DensityMatrix};
pub use noise::{
    NoiseModel, NoiseScope, QubitNoise, LARGE_DEVICE_OSCILLATOR, LARGE_DEVICE_SITE, SMALL_DEVICE_OSCILLATOR, SMALL_DEVICE_SITE,
};
pub use shots::ShotTable;

use crate::circuit::{Circuit, GateCensus};
use crate::error::EmulatorError;
use crate::series::{PopulationSeries, Provenance};
use crate::units::{Femtoseconds, Rate};
use program::compile;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

/// Largest register the density-matrix backend accepts.
pub const MAX_DENSITY_QUBITS: usize = 12;
/// Largest oscillator register per block of the sparse backends.
pub const MAX_OSCILLATOR_QUBITS: usize = 24;
/// Shots per step used when none are configured.
pub const DEFAULT_SHOTS: usize = 10_000;

fn check_block_size(circuit: &Circuit, backend: &'static str) -> Result<(), EmulatorError> {
    let n_osc = circuit.n_logical() - circuit.n_sites;
    if n_osc > MAX_OSCILLATOR_QUBITS || circuit.n_logical() > 64 {
        return Err(EmulatorError::TooManyQubits { backend, qubits: circuit.n_logical(), limit: circuit.n_sites + MAX_OSCILLATOR_QUBITS });
    }
    Ok(())
}

/// Donor initial state for the circuit's register.
pub fn donor_state(circuit: &Circuit) -> BlockState {
    BlockState::donor(circuit.n_sites, circuit.n_logical() - circuit.n_sites)
}

fn times(circuit: &Circuit, steps: usize) -> Vec<f64> {
    (0..=steps).map(|k| k as f64 * circuit.dt_fs).collect()
}

fn check_initial(circuit: &Circuit, initial: &BlockState) -> Result<(), EmulatorError> {
    if initial.n_sites() != circuit.n_sites || initial.n_qubits() != circuit.n_logical() {
        return Err(EmulatorError::InvalidNoise(format!(
            "initial state has {} qubits, circuit has {}",
            initial.n_qubits(),
            circuit.n_logical()
        )));
    }
    Ok(())
}

pub struct NoiselessRun {
    pub series: PopulationSeries,
    /// State after each step, starting with the initial state.
    pub states: Vec<BlockState>,
}

/// Exact unitary evolution for `steps` repetitions of the circuit.
pub fn run_noiseless(circuit: &Circuit, steps: usize, initial: &BlockState) -> Result<NoiselessRun, EmulatorError> {
    check_block_size(circuit, "state-vector")?;
    check_initial(circuit, initial)?;
    let program = compile(circuit, &NoiseModel::noiseless(circuit.n_physical))?;
    let mut state = initial.clone();
    let mut states = vec![state.clone()];
    // no noise operations are present, so the generator is never consulted
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    for _ in 0..steps {
        state.run(&program, &mut rng);
        states.push(state.clone());
    }
    let populations = states.iter().map(BlockState::site_populations).collect();
    Ok(NoiselessRun { series: PopulationSeries::new(times(circuit, steps), populations, Provenance::Noiseless), states })
}

pub struct DensityRun {
    /// Site occupations of the evolved state (before readout errors).
    pub series: PopulationSeries,
    /// Measured bitstring distribution per step, readout errors included.
    pub distributions: Vec<Vec<f64>>,
    pub final_state: DensityMatrix,
}

pub fn run_density_matrix(circuit: &Circuit, steps: usize, noise: &NoiseModel, initial: &BlockState) -> Result<DensityRun, EmulatorError> {
    let n = circuit.n_logical();
    if n > MAX_DENSITY_QUBITS {
        return Err(EmulatorError::TooManyQubits { backend: "density-matrix", qubits: n, limit: MAX_DENSITY_QUBITS });
    }
    check_initial(circuit, initial)?;
    let program = compile(circuit, noise)?;
    let mut rho = DensityMatrix::from_pure(n, &initial.to_dense());
    let mut populations = Vec::with_capacity(steps + 1);
    let mut distributions = Vec::with_capacity(steps + 1);
    for k in 0..=steps {
        if k > 0 {
            rho.run(&program);
        }
        let mut probs = rho.probabilities();
        populations.push((0..circuit.n_sites).map(|q| probs.iter().enumerate().filter(|(x, _)| (x >> q) & 1 == 1).map(|(_, p)| p).sum()).collect());
        apply_readout(&mut probs, &program.readout);
        distributions.push(probs);
    }
    Ok(DensityRun { series: PopulationSeries::new(times(circuit, steps), populations, Provenance::Density), distributions, final_state: rho })
}

/// Sample `n_traj` noisy trajectories; each contributes one shot per step.
///
/// Trajectory i draws from a ChaCha8 stream (seed, stream i), so the table
/// does not depend on how trajectories are spread over threads. Shots are
/// drawn without collapsing the trajectory, which gives every step the same
/// marginal distribution as a separate circuit run to that step.
pub fn run_trajectories(
    circuit: &Circuit,
    steps: usize,
    noise: &NoiseModel,
    n_traj: usize,
    seed: u64,
    initial: &BlockState,
) -> Result<ShotTable, EmulatorError> {
    run_trajectory_range(circuit, steps, noise, 0..n_traj, seed, initial)
}

/// Like [`run_trajectories`] for the trajectory indices in `range` only.
pub fn run_trajectory_range(
    circuit: &Circuit,
    steps: usize,
    noise: &NoiseModel,
    range: std::ops::Range<usize>,
    seed: u64,
    initial: &BlockState,
) -> Result<ShotTable, EmulatorError> {
    check_block_size(circuit, "trajectory")?;
    check_initial(circuit, initial)?;
    if range.is_empty() {
        return Err(EmulatorError::InvalidNoise("at least one trajectory is required".into()));
    }
    let program = compile(circuit, noise)?;
    let readout = &program.readout;
    let per_traj: Vec<Vec<u64>> = range
        .into_par_iter()
        .map(|traj| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(traj as u64);
            let mut state = initial.clone();
            let mut shots = Vec::with_capacity(steps + 1);
            for k in 0..=steps {
                if k > 0 {
                    state.run(&program, &mut rng);
                }
                let mut x = state.sample(&mut rng);
                for (q, &f) in readout.iter().enumerate() {
                    if f > 0.0 && rng.random::<f64>() < f {
                        x ^= 1 << q;
                    }
                }
                shots.push(x);
            }
            shots
        })
        .collect();
    let steps_major = (0..=steps).map(|k| per_traj.iter().map(|t| t[k]).collect()).collect();
    Ok(ShotTable {
        n_sites: circuit.n_sites,
        n_qubits: circuit.n_logical(),
        dt_fs: circuit.dt_fs,
        seed,
        backend: "trajectories".into(),
        noise_digest: noise.digest(),
        circuit_digest: circuit.digest(),
        steps: steps_major,
    })
}

/// Lower bound on the damping rate imprinted by hardware noise:
/// (T_exec / dt) / min_q min(T1, T2).
pub fn effective_damping_bound(census: &GateCensus, noise: &NoiseModel, dt: Femtoseconds) -> Rate {
    let min_us = noise.min_coherence_us(0..noise.qubits.len());
    if !min_us.is_finite() {
        return Rate(0.0);
    }
    Rate(census.t_exec_us() / min_us / dt.0)
}

/// Oscillator T1 in µs for which amplitude damping over one circuit step
/// equals damping at `gamma` over one model step: T1 = T_exec / (γ dt).
pub fn calibrated_oscillator_t1(census: &GateCensus, gamma: Rate, dt: Femtoseconds) -> f64 {
    census.t_exec_us() / (gamma.0 * dt.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::{build_trotter_step, gate_census, map_to_qubits, route, GateDurations, Layout};
    use crate::model::ModelSpec;

    fn circuit(n: usize) -> Circuit {
        let c = build_trotter_step(&map_to_qubits(&ModelSpec::reference(n), 1), Femtoseconds(4.0));
        route(&c, &Layout::heavy_hex(n)).unwrap()
    }

    #[test]
    fn damping_bound_example() {
        let mut census = gate_census(&circuit(5), &GateDurations::default()).unwrap();
        census.t_exec_ns = 1200.0;
        let q = QubitNoise { t1_us: 35.0, t2_us: 35.0, ..QubitNoise::IDEAL };
        let rate = effective_damping_bound(&census, &NoiseModel::uniform(10, q, NoiseScope::AllQubits), Femtoseconds(4.0));
        assert!((rate.lifetime().0 - 116.666_666_666).abs() < 1e-6);
        let t1 = calibrated_oscillator_t1(&census, Rate::per(Femtoseconds(112.5)), Femtoseconds(4.0));
        assert!((t1 - 1.2 * 112.5 / 4.0).abs() < 1e-9);
        let ideal = effective_damping_bound(&census, &NoiseModel::noiseless(10), Femtoseconds(4.0));
        assert_eq!(ideal.0, 0.0);
    }

    #[test]
    fn zero_steps_returns_initial_state() {
        let c = circuit(3);
        let run = run_noiseless(&c, 0, &donor_state(&c)).unwrap();
        assert_eq!(run.series.populations, vec![vec![1.0, 0.0, 0.0]]);
    }

    #[test]
    fn noiseless_density_matches_state_vector() {
        let c = circuit(3);
        let sv = run_noiseless(&c, 10, &donor_state(&c)).unwrap();
        let dm = run_density_matrix(&c, 10, &NoiseModel::noiseless(6), &donor_state(&c)).unwrap();
        for (a, b) in sv.series.populations.iter().zip(&dm.series.populations) {
            for (x, y) in a.iter().zip(b) {
                assert!((x - y).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn seeds_are_reproducible_and_ranges_compose() {
        let c = circuit(4);
        let noise = NoiseModel::hardware_medians(4);
        let init = donor_state(&c);
        let a = run_trajectories(&c, 5, &noise, 40, 11, &init).unwrap();
        let b = run_trajectories(&c, 5, &noise, 40, 11, &init).unwrap();
        assert_eq!(a, b);
        let head = run_trajectory_range(&c, 5, &noise, 0..15, 11, &init).unwrap();
        for (full, part) in a.steps.iter().zip(&head.steps) {
            assert_eq!(&full[..15], &part[..]);
        }
    }

    #[test]
    fn density_limit_enforced() {
        let c = circuit(7);
        assert!(matches!(
            run_density_matrix(&c, 1, &NoiseModel::noiseless(14), &donor_state(&c)),
            Err(EmulatorError::TooManyQubits { .. })
        ));
    }
}
