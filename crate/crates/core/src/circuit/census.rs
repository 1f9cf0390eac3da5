use super::{Circuit, GateKind, Layer};
use crate::error::CircuitError;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

/// How a single-qubit rotation is compiled: one native gate, or two fixed-angle pulses.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OneQubitMode {
    #[default]
    VariableAngle,
    FixedAngle,
}

impl OneQubitMode {
    pub fn pulses_per_rotation(self) -> usize {
        match self {
            OneQubitMode::VariableAngle => 1,
            OneQubitMode::FixedAngle => 2,
        }
    }
}

/// Native gate durations in ns.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GateDurations {
    pub one_qubit_ns: Option<f64>,
    pub cz_ns: Option<f64>,
    #[serde(default)]
    pub mode: OneQubitMode,
}

impl Default for GateDurations {
    fn default() -> Self {
        GateDurations { one_qubit_ns: Some(32.0), cz_ns: Some(68.0), mode: OneQubitMode::VariableAngle }
    }
}

impl GateDurations {
    pub fn with_mode(&self, mode: OneQubitMode) -> Self {
        GateDurations { mode, ..self.clone() }
    }
}

/// One time slice of the lowered schedule.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Slot {
    OneQubit,
    Cz,
}

/// Lowered slot pattern of one layer: two-qubit rotations become
/// 1Q·CZ·1Q·CZ·1Q and a SWAP becomes 1Q·CZ·1Q·CZ·1Q·CZ·1Q.
fn lower(layer: &Layer) -> Vec<Slot> {
    use Slot::{Cz, OneQubit};
    let has = |k: GateKind| layer.gates.iter().any(|g| g.kind == k);
    let has_one_qubit = layer.gates.iter().any(|g| g.kind.arity() == 1);
    if has(GateKind::Swap) {
        vec![OneQubit, Cz, OneQubit, Cz, OneQubit, Cz, OneQubit]
    } else if has(GateKind::XxPlusYy) || has(GateKind::Zx) {
        vec![OneQubit, Cz, OneQubit, Cz, OneQubit]
    } else if has(GateKind::Cz) {
        if has_one_qubit {
            vec![OneQubit, Cz]
        } else {
            vec![Cz]
        }
    } else if has_one_qubit {
        vec![OneQubit]
    } else {
        Vec::new()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct GateCensus {
    pub counts: BTreeMap<GateKind, usize>,
    /// CZ count with every gate decomposed on its own.
    pub cz_naive: usize,
    /// CZ count after fusing consecutive two-qubit gates on the same pair (≤ 3 per block).
    pub cz_merged: usize,
    pub swap_layers: usize,
    pub one_qubit_depth: usize,
    pub total_depth: usize,
    pub layer_durations_ns: Vec<f64>,
    pub t_exec_ns: f64,
}

impl GateCensus {
    pub fn t_exec_us(&self) -> f64 {
        self.t_exec_ns / 1000.0
    }

    pub fn count(&self, kind: GateKind) -> usize {
        self.counts.get(&kind).copied().unwrap_or(0)
    }
}

pub fn gate_census(circuit: &Circuit, durations: &GateDurations) -> Result<GateCensus, CircuitError> {
    let mut counts = BTreeMap::new();
    for (_, g) in circuit.gates() {
        *counts.entry(g.kind).or_insert(0) += 1;
    }
    let cz_naive = circuit.gates().map(|(_, g)| g.kind.cz_cost()).sum();

    let mut layer_durations_ns = Vec::with_capacity(circuit.layers.len());
    let (mut one_qubit_depth, mut total_depth) = (0, 0);
    let mut last: Option<Slot> = None;
    for layer in &circuit.layers {
        let mut slots = lower(layer);
        if last == Some(Slot::OneQubit) && slots.first() == Some(&Slot::OneQubit) {
            slots.remove(0);
        }
        let mut duration = 0.0;
        for &slot in &slots {
            duration += match slot {
                Slot::OneQubit => {
                    one_qubit_depth += 1;
                    durations.one_qubit_ns.ok_or_else(|| CircuitError::MissingDuration("one-qubit".into()))?
                        * durations.mode.pulses_per_rotation() as f64
                }
                Slot::Cz => durations.cz_ns.ok_or_else(|| CircuitError::MissingDuration("cz".into()))?,
            };
        }
        total_depth += slots.len();
        if let Some(&s) = slots.last() {
            last = Some(s);
        }
        layer_durations_ns.push(duration);
    }
    let swap_layers = circuit.layers.iter().filter(|l| l.gates.iter().any(|g| g.kind == GateKind::Swap)).count();
    Ok(GateCensus {
        counts,
        cz_naive,
        cz_merged: merged_cz(circuit),
        swap_layers,
        one_qubit_depth,
        total_depth,
        t_exec_ns: layer_durations_ns.iter().sum(),
        layer_durations_ns,
    })
}

/// Fuse runs of two-qubit gates acting on the same pair with no other
/// two-qubit gate touching either qubit in between. Single-qubit gates are
/// absorbed, since any two-qubit unitary needs at most three CZ.
fn merged_cz(circuit: &Circuit) -> usize {
    let mut owner: Vec<Option<usize>> = vec![None; circuit.n_physical];
    let mut blocks: Vec<((usize, usize), usize)> = Vec::new();
    for (_, g) in circuit.gates() {
        if g.qubits.len() != 2 {
            continue;
        }
        let (a, b) = (g.qubits[0].min(g.qubits[1]), g.qubits[0].max(g.qubits[1]));
        match (owner[a], owner[b]) {
            (Some(i), Some(j)) if i == j && blocks[i].0 == (a, b) => {
                blocks[i].1 = (blocks[i].1 + g.kind.cz_cost()).min(3);
            }
            _ => {
                blocks.push(((a, b), g.kind.cz_cost()));
                owner[a] = Some(blocks.len() - 1);
                owner[b] = Some(blocks.len() - 1);
            }
        }
    }
    blocks.iter().map(|b| b.1).sum()
}
