use super::mapping::rotation;
use super::{Circuit, Gate, GateKind, Layer, LayerRole, QubitHamiltonian};
use crate::units::Femtoseconds;

/// First-order Trotter step: Z rotations, even hops, odd hops, then the
/// vibronic ZX rotations (one layer per oscillator qubit of a site).
pub fn build_trotter_step(qh: &QubitHamiltonian, dt: Femtoseconds) -> Circuit {
    let mut circuit = Circuit::logical(qh, dt.0);
    let mut diag: Vec<Gate> = (0..qh.n_sites).map(|n| rotation(GateKind::Rz, &[n], qh.site_energies[n], dt.0)).collect();
    for n in 0..qh.n_sites {
        for k in 0..qh.osc_per_site {
            diag.push(rotation(GateKind::Rz, &[qh.osc_qubit(n, k)], qh.osc_frequency, dt.0));
        }
    }
    circuit.layers.push(Layer::new(LayerRole::Diagonal, diag));
    for (role, parity) in [(LayerRole::HopEven, 0), (LayerRole::HopOdd, 1)] {
        let gates = qh
            .hopping_pairs()
            .into_iter()
            .filter(|(a, _)| a % 2 == parity)
            .map(|(a, b)| rotation(GateKind::XxPlusYy, &[a, b], qh.hopping, dt.0))
            .collect();
        circuit.layers.push(Layer::new(role, gates));
    }
    for k in 0..qh.osc_per_site {
        let gates = (0..qh.n_sites).map(|n| rotation(GateKind::Zx, &[n, qh.osc_qubit(n, k)], qh.vibronic, dt.0)).collect();
        circuit.layers.push(Layer::new(LayerRole::Vibronic, gates));
    }
    circuit
}
