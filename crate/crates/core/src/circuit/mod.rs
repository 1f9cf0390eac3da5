//! Qubit mapping, Trotter-step circuits, layouts, routing and gate census.
//!
//! Qubit convention: site n is qubit n; oscillator qubit k of site n is
//! qubit N + nQ + k. |1⟩ is the occupied state and n = (I − Z)/2.

mod census;
mod layout;
mod mapping;
mod route;
mod text;
mod trotter;

pub use census::{gate_census, GateCensus, GateDurations, OneQubitMode, Slot};
pub use layout::{Layout, Topology};
pub use mapping::{map_to_qubits, QubitHamiltonian};
pub use route::route;
pub use text::{circuit_from_text, circuit_to_text};
pub use trotter::build_trotter_step;

use crate::error::CircuitError;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::fmt;

/// Gate kinds and their unitaries (θ = angle):
/// `Rz` e^{−iθ n}, `Rx` e^{−iθ X}, `XxPlusYy` e^{−iθ(XX+YY)},
/// `Zx` e^{−iθ n_c X_t} (control first), `Swap`, `Cz`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum GateKind {
    Rz,
    Rx,
    XxPlusYy,
    Zx,
    Swap,
    Cz,
}

impl GateKind {
    pub fn arity(self) -> usize {
        match self {
            GateKind::Rz | GateKind::Rx => 1,
            _ => 2,
        }
    }

    /// CZ gates needed by the standard decomposition.
    pub fn cz_cost(self) -> usize {
        match self {
            GateKind::Rz | GateKind::Rx => 0,
            GateKind::XxPlusYy | GateKind::Zx => 2,
            GateKind::Swap => 3,
            GateKind::Cz => 1,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            GateKind::Rz => "rz",
            GateKind::Rx => "rx",
            GateKind::XxPlusYy => "xxyy",
            GateKind::Zx => "zx",
            GateKind::Swap => "swap",
            GateKind::Cz => "cz",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        [GateKind::Rz, GateKind::Rx, GateKind::XxPlusYy, GateKind::Zx, GateKind::Swap, GateKind::Cz]
            .into_iter()
            .find(|k| k.name() == s)
    }
}

impl fmt::Display for GateKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Gate {
    pub kind: GateKind,
    pub qubits: Vec<usize>,
    pub angle: f64,
}

const C0: Complex64 = Complex64::new(0.0, 0.0);
const C1: Complex64 = Complex64::new(1.0, 0.0);

impl Gate {
    pub fn new(kind: GateKind, qubits: &[usize], angle: f64) -> Self {
        debug_assert_eq!(qubits.len(), kind.arity());
        Gate { kind, qubits: qubits.to_vec(), angle }
    }

    pub fn one(kind: GateKind, q: usize, angle: f64) -> Self {
        Gate::new(kind, &[q], angle)
    }

    pub fn two(kind: GateKind, a: usize, b: usize, angle: f64) -> Self {
        Gate::new(kind, &[a, b], angle)
    }

    /// Row-major unitary on the gate's qubits; basis index Σ_k bit(qubits[k]) 2^k.
    pub fn matrix(&self) -> Vec<Complex64> {
        let (c, s) = (self.angle.cos(), self.angle.sin());
        let mis = Complex64::new(0.0, -s);
        match self.kind {
            GateKind::Rz => vec![C1, C0, C0, Complex64::from_polar(1.0, -self.angle)],
            GateKind::Rx => vec![Complex64::new(c, 0.0), mis, mis, Complex64::new(c, 0.0)],
            GateKind::XxPlusYy => {
                let (c2, s2) = ((2.0 * self.angle).cos(), (2.0 * self.angle).sin());
                let mut m = vec![C0; 16];
                m[0] = C1;
                m[15] = C1;
                m[5] = Complex64::new(c2, 0.0);
                m[10] = Complex64::new(c2, 0.0);
                m[6] = Complex64::new(0.0, -s2);
                m[9] = Complex64::new(0.0, -s2);
                m
            }
            GateKind::Zx => {
                // control = qubits[0] (bit 0), target = qubits[1] (bit 1)
                let mut m = vec![C0; 16];
                m[0] = C1;
                m[2 * 4 + 2] = C1;
                m[4 + 1] = Complex64::new(c, 0.0);
                m[3 * 4 + 3] = Complex64::new(c, 0.0);
                m[4 + 3] = mis;
                m[3 * 4 + 1] = mis;
                m
            }
            GateKind::Swap => {
                let mut m = vec![C0; 16];
                m[0] = C1;
                m[4 + 2] = C1;
                m[2 * 4 + 1] = C1;
                m[15] = C1;
                m
            }
            GateKind::Cz => {
                let mut m = vec![C0; 16];
                m[0] = C1;
                m[5] = C1;
                m[10] = C1;
                m[15] = -C1;
                m
            }
        }
    }
}

impl fmt::Display for Gate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let qs: Vec<String> = self.qubits.iter().map(|q| q.to_string()).collect();
        write!(f, "{}({})", self.kind, qs.join(","))
    }
}

/// What a layer does inside a Trotter step.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LayerRole {
    Diagonal,
    HopEven,
    HopOdd,
    Vibronic,
    SwapIn,
    Boundary,
    SwapOut,
    Other,
}

impl LayerRole {
    pub fn name(self) -> &'static str {
        match self {
            LayerRole::Diagonal => "diagonal",
            LayerRole::HopEven => "hop-even",
            LayerRole::HopOdd => "hop-odd",
            LayerRole::Vibronic => "vibronic",
            LayerRole::SwapIn => "swap-in",
            LayerRole::Boundary => "boundary",
            LayerRole::SwapOut => "swap-out",
            LayerRole::Other => "other",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        [
            LayerRole::Diagonal,
            LayerRole::HopEven,
            LayerRole::HopOdd,
            LayerRole::Vibronic,
            LayerRole::SwapIn,
            LayerRole::Boundary,
            LayerRole::SwapOut,
            LayerRole::Other,
        ]
        .into_iter()
        .find(|r| r.name() == s)
    }

    pub fn is_hopping(self) -> bool {
        matches!(self, LayerRole::HopEven | LayerRole::HopOdd)
    }
}

/// Gates acting on disjoint qubits, executed in parallel.
#[derive(Clone, Debug, PartialEq)]
pub struct Layer {
    pub role: LayerRole,
    pub gates: Vec<Gate>,
    /// Wall-clock duration in ns (filled by [`Circuit::assign_durations`]).
    pub duration_ns: f64,
}

impl Layer {
    pub fn new(role: LayerRole, gates: Vec<Gate>) -> Self {
        Layer { role, gates, duration_ns: 0.0 }
    }
}

/// One Trotter step as ordered layers.
///
/// Gate qubit indices are physical; `placement[l]` is the physical qubit
/// holding logical qubit `l` at the start (and, for routed circuits, the end)
/// of the step. SWAP gates move logical qubits between physical positions.
#[derive(Clone, Debug, PartialEq)]
pub struct Circuit {
    pub n_sites: usize,
    /// Simulated time advanced by one step.
    pub dt_fs: f64,
    /// Oscillator qubits per site.
    pub osc_per_site: usize,
    /// Number of physical qubits addressed by gates.
    pub n_physical: usize,
    pub placement: Vec<usize>,
    pub layers: Vec<Layer>,
}

impl Circuit {
    /// Logical qubit count N(1 + Q).
    pub fn n_logical(&self) -> usize {
        self.n_sites * (1 + self.osc_per_site)
    }

    pub fn is_site(&self, logical: usize) -> bool {
        logical < self.n_sites
    }

    pub fn gates(&self) -> impl Iterator<Item = (usize, &Gate)> {
        self.layers.iter().enumerate().flat_map(|(i, l)| l.gates.iter().map(move |g| (i, g)))
    }

    /// Check that no layer uses a qubit twice.
    pub fn validate(&self) -> Result<(), CircuitError> {
        for (i, layer) in self.layers.iter().enumerate() {
            let mut used = vec![false; self.n_physical];
            for g in &layer.gates {
                for &q in &g.qubits {
                    if q >= self.n_physical || used[q] {
                        return Err(CircuitError::OverlappingGates { layer: i, qubit: q });
                    }
                    used[q] = true;
                }
            }
        }
        Ok(())
    }

    /// Set each layer's duration from the lowered schedule.
    pub fn assign_durations(&mut self, durations: &GateDurations) -> Result<(), CircuitError> {
        let census = gate_census(self, durations)?;
        for (layer, d) in self.layers.iter_mut().zip(&census.layer_durations_ns) {
            layer.duration_ns = *d;
        }
        Ok(())
    }

    /// Gates of each layer on logical qubits, following SWAP relabelings.
    /// SWAP gates themselves are omitted.
    pub fn logical_layers(&self) -> Vec<Vec<Gate>> {
        let mut host = vec![usize::MAX; self.n_physical];
        for (l, &p) in self.placement.iter().enumerate() {
            host[p] = l;
        }
        let mut out = Vec::with_capacity(self.layers.len());
        for layer in &self.layers {
            let mut gates = Vec::new();
            for g in &layer.gates {
                if g.kind == GateKind::Swap {
                    host.swap(g.qubits[0], g.qubits[1]);
                } else {
                    gates.push(Gate { qubits: g.qubits.iter().map(|&p| host[p]).collect(), ..g.clone() });
                }
            }
            out.push(gates);
        }
        out
    }

    /// Hopping factors in execution order, as groups of left site indices.
    pub fn hop_schedule(&self) -> Vec<Vec<usize>> {
        self.logical_layers()
            .into_iter()
            .map(|gates| gates.iter().filter(|g| g.kind == GateKind::XxPlusYy).map(|g| g.qubits[0].min(g.qubits[1])).collect::<Vec<_>>())
            .filter(|group| !group.is_empty())
            .collect()
    }

    /// Total duration of one step in ns.
    pub fn duration_ns(&self) -> f64 {
        self.layers.iter().map(|l| l.duration_ns).sum()
    }

    /// Stable digest of the gate list.
    pub fn digest(&self) -> String {
        crate::digest::sha256_hex(circuit_to_text(self).as_bytes())
    }
}
