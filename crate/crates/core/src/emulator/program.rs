//! Lowering of a circuit plus noise model to a flat list of operations on
//! logical qubits. SWAP gates become relabelings of the physical host map.

use super::channels::{self, check_complete, repeat_depolarizing};
use super::kernels::{to_array16, to_array4, C64, ZERO};
use super::noise::{NoiseModel, NoiseScope};
use crate::circuit::{gate_census, Circuit, GateKind, OneQubitMode};
use crate::error::EmulatorError;

#[derive(Clone, Debug)]
pub(crate) struct Relaxation {
    pub qubit: usize,
    pub p_amp: f64,
    pub p_phase: f64,
}

/// Product of single-qubit diagonal gates, with lookup tables for the
/// oscillator register so the sparse backend applies it in one pass.
#[derive(Clone, Debug)]
pub(crate) struct Diagonal {
    /// (qubit, entry for |0⟩, entry for |1⟩).
    pub gates: Vec<(usize, C64, C64)>,
    pub site: Vec<(u64, C64, C64)>,
    pub osc_tables: Vec<[C64; 256]>,
}

impl Diagonal {
    fn new(gates: Vec<(usize, C64, C64)>, n_sites: usize, n_osc: usize) -> Self {
        let site = gates.iter().filter(|g| g.0 < n_sites).map(|&(q, a, b)| (1u64 << q, a, b)).collect();
        let osc: Vec<(usize, C64, C64)> = gates.iter().filter(|g| g.0 >= n_sites).map(|&(q, a, b)| (q - n_sites, a, b)).collect();
        let osc_tables = if osc.is_empty() {
            Vec::new()
        } else {
            byte_tables(n_osc, |byte, chunk| {
                osc.iter().filter(|g| g.0 / 8 == chunk).map(|&(b, d0, d1)| if (byte >> (b % 8)) & 1 == 1 { d1 } else { d0 }).product()
            })
        };
        Diagonal { gates, site, osc_tables }
    }
}

/// Amplitude damping and dephasing on several qubits over one layer, with
/// lookup tables for the no-jump factor Π √(1 − p) on the oscillator register.
#[derive(Clone, Debug)]
pub(crate) struct Damping {
    pub channels: Vec<Relaxation>,
    /// (site bit, 1 − p_amp).
    pub site_keep: Vec<(u64, f64)>,
    /// Per byte of the oscillator register: Π (1 − p_amp) over set bits.
    pub osc_keep: Vec<[f64; 256]>,
    /// Per byte: Π √(1 − p_amp) over set bits.
    pub osc_sqrt_keep: Vec<[f64; 256]>,
}

impl Damping {
    fn new(channels: Vec<Relaxation>, n_sites: usize, n_osc: usize) -> Self {
        let damped = || channels.iter().filter(|c| c.p_amp > 0.0);
        let site_keep = damped().filter(|c| c.qubit < n_sites).map(|c| (1u64 << c.qubit, 1.0 - c.p_amp)).collect();
        let osc: Vec<(usize, f64)> = damped().filter(|c| c.qubit >= n_sites).map(|c| (c.qubit - n_sites, 1.0 - c.p_amp)).collect();
        let table = |root: bool| {
            if osc.is_empty() {
                return Vec::new();
            }
            byte_tables(n_osc, |byte, chunk| {
                osc.iter()
                    .filter(|&&(b, _)| b / 8 == chunk && (byte >> (b % 8)) & 1 == 1)
                    .map(|&(_, k)| if root { k.sqrt() } else { k })
                    .product()
            })
        };
        let (osc_keep, osc_sqrt_keep) = (table(false), table(true));
        Damping { channels, site_keep, osc_keep, osc_sqrt_keep }
    }

    pub fn has_damping(&self) -> bool {
        self.channels.iter().any(|c| c.p_amp > 0.0)
    }
}

/// One table per byte of an `n_bits` register; `entry(byte, chunk)`.
fn byte_tables<T: Copy + Default>(n_bits: usize, entry: impl Fn(usize, usize) -> T) -> Vec<[T; 256]> {
    (0..n_bits.div_ceil(8))
        .map(|chunk| {
            let mut t = [T::default(); 256];
            for (byte, e) in t.iter_mut().enumerate() {
                *e = entry(byte, chunk);
            }
            t
        })
        .collect()
}

#[derive(Clone, Debug)]
pub(crate) enum Op {
    One { qubit: usize, matrix: [C64; 4] },
    Two { qubits: [usize; 2], matrix: [C64; 16] },
    Diagonal(Diagonal),
    Depolarize { qubits: Vec<usize>, p: f64 },
    Relax(Damping),
}

/// Merge runs of adjacent diagonal single-qubit gates.
fn fuse_diagonals(ops: Vec<Op>, n_sites: usize, n_osc: usize) -> Vec<Op> {
    let mut out = Vec::with_capacity(ops.len());
    let mut run: Vec<(usize, C64, C64)> = Vec::new();
    let flush = |run: &mut Vec<(usize, C64, C64)>, out: &mut Vec<Op>| {
        if !run.is_empty() {
            out.push(Op::Diagonal(Diagonal::new(std::mem::take(run), n_sites, n_osc)));
        }
    };
    for op in ops {
        match op {
            Op::One { qubit, matrix } if matrix[1] == ZERO && matrix[2] == ZERO => run.push((qubit, matrix[0], matrix[3])),
            other => {
                flush(&mut run, &mut out);
                out.push(other);
            }
        }
    }
    flush(&mut run, &mut out);
    out
}

#[derive(Clone, Debug)]
pub(crate) struct Program {
    pub ops: Vec<Op>,
    /// Readout flip probability per logical qubit.
    pub readout: Vec<f64>,
}

pub(crate) fn compile(circuit: &Circuit, noise: &NoiseModel) -> Result<Program, EmulatorError> {
    circuit.validate()?;
    noise.validate(circuit.n_physical)?;
    let census = gate_census(circuit, &noise.durations)?;
    let n_logical = circuit.n_logical();
    if circuit.placement.len() != n_logical {
        return Err(EmulatorError::InvalidNoise(format!("placement lists {} qubits, circuit has {n_logical}", circuit.placement.len())));
    }
    let mut host = vec![usize::MAX; circuit.n_physical];
    for (l, &p) in circuit.placement.iter().enumerate() {
        host[p] = l;
    }
    let initial_host = host.clone();
    let logical_of = |host: &[usize], p: usize, gate: &str| -> Result<usize, EmulatorError> {
        match host[p] {
            usize::MAX => Err(EmulatorError::UnsupportedGate(format!("{gate} acts on unassigned physical qubit {p}"))),
            l => Ok(l),
        }
    };

    let mut ops = Vec::new();
    for (layer, &duration) in circuit.layers.iter().zip(&census.layer_durations_ns) {
        for gate in &layer.gates {
            let name = gate.to_string();
            if gate.kind == GateKind::Swap {
                let (a, b) = (gate.qubits[0], gate.qubits[1]);
                host.swap(a, b);
            }
            let logical: Vec<usize> = gate.qubits.iter().map(|&p| logical_of(&host, p, &name)).collect::<Result<_, _>>()?;
            match (gate.kind, logical.as_slice()) {
                (GateKind::Swap, _) => {}
                (_, &[q]) => ops.push(Op::One { qubit: q, matrix: to_array4(&gate.matrix()) }),
                (_, &[a, b]) => ops.push(Op::Two { qubits: [a, b], matrix: to_array16(&gate.matrix()) }),
                _ => unreachable!("gates act on one or two qubits"),
            }
            let p = if logical.len() == 2 {
                let per_cz = 0.5 * (noise.qubits[gate.qubits[0]].two_qubit_error + noise.qubits[gate.qubits[1]].two_qubit_error);
                repeat_depolarizing(2, per_cz, gate.kind.cz_cost())
            } else if noise.durations.mode == OneQubitMode::FixedAngle {
                repeat_depolarizing(1, noise.qubits[gate.qubits[0]].one_qubit_error, 2)
            } else {
                0.0
            };
            if p > 0.0 {
                check_complete(&format!("depolarizing after {name}"), &channels::depolarizing(logical.len(), p))?;
                ops.push(Op::Depolarize { qubits: logical, p });
            }
        }
        if duration > 0.0 {
            let mut relax = Vec::new();
            for (p, &l) in host.iter().enumerate() {
                if l == usize::MAX || (noise.scope == NoiseScope::OscillatorsOnly && l < circuit.n_sites) {
                    continue;
                }
                let (p_amp, p_phase) = noise.qubits[p].idle_probabilities(duration);
                if p_amp > 0.0 || p_phase > 0.0 {
                    let kraus: Vec<Vec<C64>> =
                        channels::amplitude_damping(p_amp).into_iter().chain(channels::phase_flip(p_phase)).map(|k| k.to_vec()).collect();
                    check_complete("amplitude damping", &kraus[..2])?;
                    check_complete("phase flip", &kraus[2..])?;
                    relax.push(Relaxation { qubit: l, p_amp, p_phase });
                }
            }
            if !relax.is_empty() {
                ops.push(Op::Relax(Damping::new(relax, circuit.n_sites, n_logical - circuit.n_sites)));
            }
        }
    }
    if host != initial_host {
        return Err(EmulatorError::UnsupportedGate("SWAP network does not restore the initial placement".into()));
    }
    let readout = circuit.placement.iter().map(|&p| noise.qubits[p].readout_error).collect();
    Ok(Program { ops: fuse_diagonals(ops, circuit.n_sites, n_logical - circuit.n_sites), readout })
}
