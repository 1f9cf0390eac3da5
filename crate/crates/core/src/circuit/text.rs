//! Line-oriented circuit format.
//!
//! ```text
//! # sites 3
//! # dt-fs 4
//! # oscillators-per-site 1
//! # physical 6
//! # placement 0 1 2 3 4 5
//! # layer 0 diagonal 32
//! 0 rz 0 -0.1234 32
//! ```
//!
//! Gate lines are `layer kind qubits angle duration_ns` with comma-separated
//! qubits. `# layer` lines declare every layer, including empty ones.

use super::{Circuit, Gate, GateKind, Layer, LayerRole};
use crate::error::CircuitError;
use std::fmt::Write as _;

pub fn circuit_to_text(circuit: &Circuit) -> String {
    let mut out = String::new();
    writeln!(out, "# sites {}", circuit.n_sites).unwrap();
    writeln!(out, "# dt-fs {}", circuit.dt_fs).unwrap();
    writeln!(out, "# oscillators-per-site {}", circuit.osc_per_site).unwrap();
    writeln!(out, "# physical {}", circuit.n_physical).unwrap();
    let placement: Vec<String> = circuit.placement.iter().map(|p| p.to_string()).collect();
    writeln!(out, "# placement {}", placement.join(" ")).unwrap();
    for (i, layer) in circuit.layers.iter().enumerate() {
        writeln!(out, "# layer {i} {} {}", layer.role.name(), layer.duration_ns).unwrap();
        for g in &layer.gates {
            let qs: Vec<String> = g.qubits.iter().map(|q| q.to_string()).collect();
            writeln!(out, "{i} {} {} {} {}", g.kind, qs.join(","), g.angle, layer.duration_ns).unwrap();
        }
    }
    out
}

pub fn circuit_from_text(text: &str) -> Result<Circuit, CircuitError> {
    let mut circuit = Circuit { n_sites: 0, dt_fs: 0.0, osc_per_site: 1, n_physical: 0, placement: Vec::new(), layers: Vec::new() };
    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let err = |reason: &str| CircuitError::Parse { line: line_no, reason: reason.to_string() };
        let num = |s: Option<&str>, what: &str| -> Result<usize, CircuitError> {
            s.and_then(|v| v.parse().ok()).ok_or_else(|| err(&format!("bad {what}")))
        };
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        let mut words = line.trim_start_matches('#').split_whitespace();
        if line.starts_with('#') {
            match words.next() {
                Some("sites") => circuit.n_sites = num(words.next(), "site count")?,
                Some("dt-fs") => {
                    circuit.dt_fs = words.next().and_then(|w| w.parse().ok()).ok_or_else(|| err("bad time step"))?;
                }
                Some("oscillators-per-site") => circuit.osc_per_site = num(words.next(), "oscillator count")?,
                Some("physical") => circuit.n_physical = num(words.next(), "physical qubit count")?,
                Some("placement") => {
                    circuit.placement = words.map(|w| w.parse().map_err(|_| err("bad placement entry"))).collect::<Result<_, _>>()?;
                }
                Some("layer") => {
                    let index = num(words.next(), "layer index")?;
                    if index != circuit.layers.len() {
                        return Err(err("layers must be declared in order"));
                    }
                    let role = words.next().and_then(LayerRole::from_name).ok_or_else(|| err("unknown layer role"))?;
                    let duration_ns = words.next().map_or(Ok(0.0), |w| w.parse().map_err(|_| err("bad duration")))?;
                    circuit.layers.push(Layer { role, gates: Vec::new(), duration_ns });
                }
                _ => {}
            }
            continue;
        }
        let index = num(words.next(), "layer index")?;
        if index >= circuit.layers.len() {
            // undeclared layers are created on the fly
            while circuit.layers.len() <= index {
                circuit.layers.push(Layer::new(LayerRole::Other, Vec::new()));
            }
        }
        let kind = words.next().and_then(GateKind::from_name).ok_or_else(|| err("unknown gate kind"))?;
        let qubits: Vec<usize> = words
            .next()
            .ok_or_else(|| err("missing qubits"))?
            .split(',')
            .map(|q| q.parse().map_err(|_| err("bad qubit index")))
            .collect::<Result<_, _>>()?;
        if qubits.len() != kind.arity() {
            return Err(err("qubit count does not match gate kind"));
        }
        let angle: f64 = words.next().and_then(|w| w.parse().ok()).ok_or_else(|| err("bad angle"))?;
        if let Some(d) = words.next() {
            circuit.layers[index].duration_ns = d.parse().map_err(|_| err("bad duration"))?;
        }
        circuit.n_physical = circuit.n_physical.max(qubits.iter().max().map_or(0, |m| m + 1));
        circuit.layers[index].gates.push(Gate { kind, qubits, angle });
    }
    if circuit.placement.is_empty() {
        circuit.placement = (0..circuit.n_logical()).collect();
    }
    circuit.validate().map_err(|e| CircuitError::Parse { line: 0, reason: e.to_string() })?;
    Ok(circuit)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::{build_trotter_step, map_to_qubits, route, GateDurations, Layout};
    use crate::model::ModelSpec;
    use crate::units::Femtoseconds;

    #[test]
    fn round_trip_routed_step() {
        let c = build_trotter_step(&map_to_qubits(&ModelSpec::reference(5), 1), Femtoseconds(4.0));
        let mut c = route(&c, &Layout::heavy_hex(5)).unwrap();
        c.assign_durations(&GateDurations::default()).unwrap();
        assert_eq!(circuit_from_text(&circuit_to_text(&c)).unwrap(), c);
    }

    #[test]
    fn rejects_unknown_gate() {
        let text = "# layer 0 other 0\n0 foo 1 0.0 0\n";
        assert!(matches!(circuit_from_text(text), Err(CircuitError::Parse { line: 2, .. })));
    }

    #[test]
    fn rejects_overlap() {
        let text = "# physical 2\n# layer 0 other 0\n0 rz 0 0.1 0\n0 rx 0 0.1 0\n";
        assert!(circuit_from_text(text).is_err());
    }
}
