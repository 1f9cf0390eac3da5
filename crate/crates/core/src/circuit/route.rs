use super::{Circuit, Gate, GateKind, Layer, LayerRole, Layout};
use crate::error::CircuitError;

/// Place a circuit on a layout, inserting SWAPs for two-qubit gates between
/// non-adjacent physical qubits.
///
/// A gate whose qubits share a physical neighbor is deferred: one endpoint is
/// swapped onto the neighbor, the gate runs, and the SWAP is undone. Deferred
/// gates from a run of consecutive hopping layers are executed together after
/// the run as three layers (swap-in, boundary gates, swap-out), which reorders
/// those hopping factors within the Trotter step. Gates deferred from any
/// other layer are flushed right after it.
pub fn route(circuit: &Circuit, layout: &Layout) -> Result<Circuit, CircuitError> {
    let logical = circuit.placement.len();
    if layout.n_physical() < logical || layout.placement.len() < logical {
        return Err(CircuitError::LayoutTooSmall { physical: layout.n_physical().min(layout.placement.len()), logical });
    }
    // gate qubits of the input refer to its own placement; recover logical indices
    let mut to_logical = vec![usize::MAX; circuit.n_physical.max(logical)];
    for (l, &p) in circuit.placement.iter().enumerate() {
        to_logical[p] = l;
    }
    let pos = &layout.placement[..logical];
    let place = |g: &Gate| -> Gate {
        let qubits = g.qubits.iter().map(|&q| pos[to_logical[q]]).collect();
        Gate { qubits, ..g.clone() }
    };

    let mut layers = Vec::with_capacity(circuit.layers.len() + 3);
    let mut pending: Vec<Gate> = Vec::new();
    for (i, layer) in circuit.layers.iter().enumerate() {
        let mut kept = Vec::with_capacity(layer.gates.len());
        for g in &layer.gates {
            let placed = place(g);
            if placed.qubits.len() == 2 && !layout.are_adjacent(placed.qubits[0], placed.qubits[1]) {
                pending.push(placed);
            } else {
                kept.push(placed);
            }
        }
        layers.push(Layer { role: layer.role, gates: kept, duration_ns: 0.0 });
        let run_continues = layer.role.is_hopping() && circuit.layers.get(i + 1).is_some_and(|l| l.role.is_hopping());
        if !pending.is_empty() && !run_continues {
            layers.extend(flush(&mut pending, layout)?);
        }
    }
    let routed = Circuit { n_sites: circuit.n_sites, dt_fs: circuit.dt_fs, osc_per_site: circuit.osc_per_site, n_physical: layout.n_physical(), placement: pos.to_vec(), layers };
    routed.validate()?;
    Ok(routed)
}

fn flush(pending: &mut Vec<Gate>, layout: &Layout) -> Result<[Layer; 3], CircuitError> {
    let mut used_swap = vec![false; layout.n_physical()];
    let mut used_gate = vec![false; layout.n_physical()];
    let mut swaps = Vec::new();
    let mut gates = Vec::new();
    for g in pending.drain(..) {
        let (pa, pb) = (g.qubits[0], g.qubits[1]);
        let mediator = layout.neighbors(pa).find(|&m| layout.are_adjacent(m, pb) && !used_swap[m] && !used_gate[m]).ok_or_else(|| {
            CircuitError::Unroutable {
                gate: g.to_string(),
                reason: format!("physical qubits {pa} and {pb} have no free common neighbor"),
            }
        })?;
        if used_swap[pa] || used_gate[pb] {
            return Err(CircuitError::Unroutable { gate: g.to_string(), reason: "conflicts with another deferred gate".into() });
        }
        used_swap[pa] = true;
        used_swap[mediator] = true;
        used_gate[mediator] = true;
        used_gate[pb] = true;
        swaps.push(Gate::two(GateKind::Swap, pa, mediator, 0.0));
        gates.push(Gate { qubits: vec![mediator, pb], ..g });
    }
    Ok([
        Layer::new(LayerRole::SwapIn, swaps.clone()),
        Layer::new(LayerRole::Boundary, gates),
        Layer::new(LayerRole::SwapOut, swaps),
    ])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::{build_trotter_step, map_to_qubits};
    use crate::model::ModelSpec;
    use crate::units::Femtoseconds;

    fn step(n: usize) -> Circuit {
        build_trotter_step(&map_to_qubits(&ModelSpec::reference(n), 1), Femtoseconds(4.0))
    }

    fn swap_layers(c: &Circuit) -> usize {
        c.layers.iter().filter(|l| l.gates.iter().any(|g| g.kind == GateKind::Swap)).count()
    }

    #[test]
    fn all_to_all_is_identity() {
        for n in 2..=8 {
            let c = step(n);
            assert_eq!(route(&c, &Layout::all_to_all(2 * n)).unwrap(), c);
        }
    }

    #[test]
    fn heavy_hex_swap_layers() {
        assert_eq!(swap_layers(&route(&step(3), &Layout::heavy_hex(3)).unwrap()), 0);
        for n in 4..=10 {
            let routed = route(&step(n), &Layout::heavy_hex(n)).unwrap();
            assert_eq!(swap_layers(&routed), 2, "N = {n}");
            assert_eq!(routed.layers.len(), 7);
        }
    }

    #[test]
    fn routed_gates_are_adjacent() {
        for n in 3..=10 {
            let layout = Layout::heavy_hex(n);
            let routed = route(&step(n), &layout).unwrap();
            for (_, g) in routed.gates() {
                if g.qubits.len() == 2 {
                    assert!(layout.are_adjacent(g.qubits[0], g.qubits[1]), "{g}");
                }
            }
        }
    }

    #[test]
    fn square_grid_needs_no_swaps() {
        let routed = route(&step(6), &Layout::square_grid(6)).unwrap();
        assert_eq!(swap_layers(&routed), 0);
    }

    #[test]
    fn too_small_layout_rejected() {
        assert!(matches!(route(&step(4), &Layout::heavy_hex(3)), Err(CircuitError::LayoutTooSmall { .. })));
    }

    #[test]
    fn distant_gate_is_unroutable() {
        // a line 0-1-2-3 with the hop (0, 3) on it
        let layout = Layout::new(super::super::Topology::Custom, 4, &[(0, 1), (1, 2), (2, 3)], vec![0, 1, 2, 3]).unwrap();
        let c = Circuit {
            n_sites: 2,
            dt_fs: 1.0,
            osc_per_site: 1,
            n_physical: 4,
            placement: vec![0, 1, 2, 3],
            layers: vec![Layer::new(LayerRole::Other, vec![Gate::two(GateKind::Cz, 0, 3, 0.0)])],
        };
        match route(&c, &layout) {
            Err(CircuitError::Unroutable { gate, .. }) => assert_eq!(gate, "cz(0,3)"),
            other => panic!("{other:?}"),
        }
    }
}
