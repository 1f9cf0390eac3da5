use crate::circuit::GateDurations;
use crate::error::EmulatorError;
use serde::{Deserialize, Serialize};
use std::fmt::Write as _;

/// Calibration of one physical qubit. Times in µs, errors as probabilities.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QubitNoise {
    pub t1_us: f64,
    pub t2_us: f64,
    pub one_qubit_error: f64,
    /// Error per CZ on gates touching this qubit.
    pub two_qubit_error: f64,
    #[serde(default)]
    pub readout_error: f64,
}

impl QubitNoise {
    pub const IDEAL: QubitNoise =
        QubitNoise { t1_us: f64::INFINITY, t2_us: f64::INFINITY, one_qubit_error: 0.0, two_qubit_error: 0.0, readout_error: 0.0 };

    /// Pure-dephasing rate 1/T_φ = 1/T2 − 1/(2 T1) in µs⁻¹.
    pub fn dephasing_rate(&self) -> f64 {
        (1.0 / self.t2_us - 0.5 / self.t1_us).max(0.0)
    }

    /// Amplitude-damping and phase-flip probabilities for an idle window.
    pub fn idle_probabilities(&self, duration_ns: f64) -> (f64, f64) {
        let t_us = duration_ns / 1000.0;
        let p_amp = -(-t_us / self.t1_us).exp_m1();
        let p_phase = -0.5 * (-t_us * self.dephasing_rate()).exp_m1();
        (p_amp, p_phase)
    }

    pub fn min_coherence_us(&self) -> f64 {
        self.t1_us.min(self.t2_us)
    }

    fn validate(&self, index: usize) -> Result<(), EmulatorError> {
        let bad = |what: &str| Err(EmulatorError::InvalidNoise(format!("qubit {index}: {what}")));
        if !(self.t1_us > 0.0) || !(self.t2_us > 0.0) {
            return bad("T1 and T2 must be positive");
        }
        if self.t2_us > 2.0 * self.t1_us * (1.0 + 1e-12) {
            return bad("T2 exceeds 2 T1");
        }
        for p in [self.one_qubit_error, self.two_qubit_error, self.readout_error] {
            if !(0.0..=1.0).contains(&p) {
                return bad("probabilities must lie in [0, 1]");
            }
        }
        Ok(())
    }
}

/// Which physical qubits feel the continuous (T1/T2) noise.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NoiseScope {
    #[default]
    AllQubits,
    /// Only qubits currently holding an oscillator; gate errors must be zero.
    OscillatorsOnly,
}

/// Per-qubit calibration plus gate timing.
#[derive(Clone, Debug, PartialEq)]
pub struct NoiseModel {
    /// Indexed by physical qubit.
    pub qubits: Vec<QubitNoise>,
    pub durations: GateDurations,
    pub scope: NoiseScope,
}

/// Median calibration of a small (6-qubit) and a large (20-qubit) device selection.
pub const SMALL_DEVICE_SITE: QubitNoise =
    QubitNoise { t1_us: 218.0, t2_us: 255.0, one_qubit_error: 1.8e-4, two_qubit_error: 1.8e-3, readout_error: 3.6e-3 };
pub const SMALL_DEVICE_OSCILLATOR: QubitNoise =
    QubitNoise { t1_us: 211.0, t2_us: 218.0, one_qubit_error: 1.8e-4, two_qubit_error: 1.8e-3, readout_error: 3.6e-3 };
pub const LARGE_DEVICE_SITE: QubitNoise =
    QubitNoise { t1_us: 218.0, t2_us: 211.0, one_qubit_error: 2.0e-4, two_qubit_error: 1.9e-3, readout_error: 4.7e-3 };
pub const LARGE_DEVICE_OSCILLATOR: QubitNoise =
    QubitNoise { t1_us: 175.0, t2_us: 189.0, one_qubit_error: 2.0e-4, two_qubit_error: 1.9e-3, readout_error: 4.7e-3 };

impl NoiseModel {
    pub fn noiseless(n_physical: usize) -> Self {
        NoiseModel { qubits: vec![QubitNoise::IDEAL; n_physical], durations: GateDurations::default(), scope: NoiseScope::AllQubits }
    }

    pub fn uniform(n_physical: usize, qubit: QubitNoise, scope: NoiseScope) -> Self {
        NoiseModel { qubits: vec![qubit; n_physical], durations: GateDurations::default(), scope }
    }

    /// Median hardware calibration for a chain of `n_sites` sites (sites on
    /// physical 0..N, oscillators on N..2N). Chains up to 6 sites use the
    /// small-device medians, longer ones the large-device medians.
    pub fn hardware_medians(n_sites: usize) -> Self {
        let (site, osc) =
            if n_sites <= 6 { (SMALL_DEVICE_SITE, SMALL_DEVICE_OSCILLATOR) } else { (LARGE_DEVICE_SITE, LARGE_DEVICE_OSCILLATOR) };
        let mut qubits = vec![site; n_sites];
        qubits.extend(std::iter::repeat_n(osc, n_sites));
        NoiseModel { qubits, durations: GateDurations::default(), scope: NoiseScope::AllQubits }
    }

    /// Pure amplitude damping with lifetime `t1_us` on oscillator qubits only.
    pub fn oscillator_damping(n_physical: usize, t1_us: f64) -> Self {
        let q = QubitNoise { t1_us, t2_us: 2.0 * t1_us, ..QubitNoise::IDEAL };
        NoiseModel::uniform(n_physical, q, NoiseScope::OscillatorsOnly)
    }

    pub fn with_durations(mut self, durations: GateDurations) -> Self {
        self.durations = durations;
        self
    }

    pub fn validate(&self, n_physical: usize) -> Result<(), EmulatorError> {
        if self.qubits.len() < n_physical {
            return Err(EmulatorError::InvalidNoise(format!(
                "calibration covers {} qubits, circuit uses {n_physical}",
                self.qubits.len()
            )));
        }
        for (i, q) in self.qubits.iter().enumerate() {
            q.validate(i)?;
            if self.scope == NoiseScope::OscillatorsOnly && (q.one_qubit_error > 0.0 || q.two_qubit_error > 0.0) {
                return Err(EmulatorError::InvalidNoise(format!("qubit {i}: gate errors must be zero when noise is restricted to oscillators")));
            }
        }
        Ok(())
    }

    pub fn is_noiseless(&self) -> bool {
        self.qubits.iter().all(|q| *q == QubitNoise::IDEAL)
    }

    /// Smallest min(T1, T2) over the listed physical qubits.
    pub fn min_coherence_us(&self, physical: impl IntoIterator<Item = usize>) -> f64 {
        physical.into_iter().map(|p| self.qubits[p].min_coherence_us()).fold(f64::INFINITY, f64::min)
    }

    /// Columnar calibration text: `qubit t1_us t2_us one_qubit_error two_qubit_error readout_error`.
    pub fn calibration_text(&self) -> String {
        let mut out = String::from("# qubit t1_us t2_us one_qubit_error two_qubit_error readout_error\n");
        for (i, q) in self.qubits.iter().enumerate() {
            writeln!(out, "{i} {} {} {} {} {}", q.t1_us, q.t2_us, q.one_qubit_error, q.two_qubit_error, q.readout_error).unwrap();
        }
        out
    }

    /// Parse a calibration table; qubits missing from the table are ideal.
    pub fn from_calibration(text: &str, durations: GateDurations, scope: NoiseScope) -> Result<Self, EmulatorError> {
        let mut rows: Vec<(usize, QubitNoise)> = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let err = |reason: &str| EmulatorError::Calibration { line: i + 1, reason: reason.to_string() };
            let fields: Vec<&str> = line.split(|c: char| c == ',' || c.is_whitespace()).filter(|s| !s.is_empty()).collect();
            if fields.len() != 6 {
                return Err(err("expected 6 columns"));
            }
            let qubit: usize = fields[0].parse().map_err(|_| err("bad qubit index"))?;
            let v: Vec<f64> = fields[1..].iter().map(|f| f.parse::<f64>().map_err(|_| err("bad number"))).collect::<Result<_, _>>()?;
            rows.push((qubit, QubitNoise { t1_us: v[0], t2_us: v[1], one_qubit_error: v[2], two_qubit_error: v[3], readout_error: v[4] }));
        }
        let n = rows.iter().map(|(q, _)| q + 1).max().unwrap_or(0);
        let mut qubits = vec![QubitNoise::IDEAL; n];
        for (q, noise) in rows {
            qubits[q] = noise;
        }
        let model = NoiseModel { qubits, durations, scope };
        model.validate(n)?;
        Ok(model)
    }

    /// Stable text used for digests.
    pub fn canonical_text(&self) -> String {
        let d = &self.durations;
        format!("{}# scope {:?}\n# durations {:?} {:?} {:?}\n", self.calibration_text(), self.scope, d.one_qubit_ns, d.cz_ns, d.mode)
    }

    pub fn digest(&self) -> String {
        crate::digest::sha256_hex(self.canonical_text().as_bytes())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn calibration_round_trip() {
        let m = NoiseModel::hardware_medians(3);
        let back = NoiseModel::from_calibration(&m.calibration_text(), m.durations.clone(), m.scope).unwrap();
        assert_eq!(back, m);
    }

    #[test]
    fn rejects_t2_above_twice_t1() {
        let q = QubitNoise { t1_us: 10.0, t2_us: 25.0, ..QubitNoise::IDEAL };
        assert!(NoiseModel::uniform(2, q, NoiseScope::AllQubits).validate(2).is_err());
    }

    #[test]
    fn rejects_gate_errors_in_oscillator_scope() {
        let q = QubitNoise { two_qubit_error: 1e-3, ..QubitNoise::IDEAL };
        assert!(NoiseModel::uniform(2, q, NoiseScope::OscillatorsOnly).validate(2).is_err());
    }

    #[test]
    fn malformed_calibration_reports_line() {
        let text = "# header\n0 100 100 0 0 0\n1 100 abc 0 0 0\n";
        assert!(matches!(
            NoiseModel::from_calibration(text, GateDurations::default(), NoiseScope::AllQubits),
            Err(EmulatorError::Calibration { line: 3, .. })
        ));
    }

    #[test]
    fn pure_damping_has_no_dephasing() {
        let q = QubitNoise { t1_us: 50.0, t2_us: 100.0, ..QubitNoise::IDEAL };
        let (p_amp, p_phase) = q.idle_probabilities(1000.0);
        assert!((p_amp - (1.0 - (-0.02f64).exp())).abs() < 1e-15);
        assert_eq!(p_phase, 0.0);
    }
}
