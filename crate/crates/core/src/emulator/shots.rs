use crate::error::EmulatorError;
use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

/// Measured bitstrings per Trotter step (step 0 is the initial state).
///
/// Bit q of a shot is logical qubit q: sites in the low N bits, oscillator
/// qubits above them. Shots are kept in trajectory order.
#[derive(Clone, Debug, PartialEq)]
pub struct ShotTable {
    pub n_sites: usize,
    pub n_qubits: usize,
    pub dt_fs: f64,
    pub seed: u64,
    pub backend: String,
    pub noise_digest: String,
    pub circuit_digest: String,
    pub steps: Vec<Vec<u64>>,
}

impl ShotTable {
    pub fn n_steps(&self) -> usize {
        self.steps.len()
    }

    /// Shots per step (constant across steps).
    pub fn shots(&self) -> usize {
        self.steps.first().map_or(0, Vec::len)
    }

    pub fn site_mask(&self) -> u64 {
        (1u64 << self.n_sites) - 1
    }

    pub fn site_bits(&self, shot: u64) -> u64 {
        shot & self.site_mask()
    }

    pub fn osc_bits(&self, shot: u64) -> u64 {
        shot >> self.n_sites
    }

    /// Text form `site|osc` with qubit 0 first in each part.
    pub fn format_bits(&self, shot: u64) -> String {
        let bit = |q: usize| if (shot >> q) & 1 == 1 { '1' } else { '0' };
        let sites: String = (0..self.n_sites).map(bit).collect();
        let osc: String = (self.n_sites..self.n_qubits).map(bit).collect();
        format!("{sites}|{osc}")
    }

    pub fn parse_bits(&self, text: &str) -> Option<u64> {
        let (sites, osc) = text.split_once('|')?;
        if sites.len() != self.n_sites || sites.len() + osc.len() != self.n_qubits {
            return None;
        }
        let mut out = 0u64;
        for (q, ch) in sites.chars().chain(osc.chars()).enumerate() {
            match ch {
                '1' => out |= 1 << q,
                '0' => {}
                _ => return None,
            }
        }
        Some(out)
    }

    /// Multiplicities per step, sorted by bitstring.
    pub fn counts(&self, step: usize) -> BTreeMap<u64, usize> {
        let mut out = BTreeMap::new();
        for &s in &self.steps[step] {
            *out.entry(s).or_insert(0) += 1;
        }
        out
    }

    /// Raw site-bit frequencies per step.
    pub fn raw_site_frequencies(&self) -> Vec<Vec<f64>> {
        self.steps
            .iter()
            .map(|shots| {
                let mut f = vec![0.0; self.n_sites];
                for &s in shots {
                    for (q, v) in f.iter_mut().enumerate() {
                        *v += ((s >> q) & 1) as f64;
                    }
                }
                f.iter_mut().for_each(|v| *v /= shots.len().max(1) as f64);
                f
            })
            .collect()
    }

    /// Header of key–value comments, then `step bitstring multiplicity` lines.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        writeln!(out, "# seed {}", self.seed).unwrap();
        writeln!(out, "# backend {}", self.backend).unwrap();
        writeln!(out, "# noise-digest {}", self.noise_digest).unwrap();
        writeln!(out, "# circuit-digest {}", self.circuit_digest).unwrap();
        writeln!(out, "# sites {}", self.n_sites).unwrap();
        writeln!(out, "# qubits {}", self.n_qubits).unwrap();
        writeln!(out, "# dt-fs {}", self.dt_fs).unwrap();
        writeln!(out, "# steps {}", self.steps.len()).unwrap();
        writeln!(out, "# shots {}", self.shots()).unwrap();
        for step in 0..self.steps.len() {
            for (s, m) in self.counts(step) {
                writeln!(out, "{step} {} {m}", self.format_bits(s)).unwrap();
            }
        }
        out
    }

    /// Parse [`to_text`](Self::to_text) output; shots come back sorted by bitstring.
    pub fn from_text(text: &str) -> Result<Self, EmulatorError> {
        let mut table = ShotTable {
            n_sites: 0,
            n_qubits: 0,
            dt_fs: 0.0,
            seed: 0,
            backend: String::new(),
            noise_digest: String::new(),
            circuit_digest: String::new(),
            steps: Vec::new(),
        };
        for (i, raw) in text.lines().enumerate() {
            let err = |reason: &str| EmulatorError::ShotTable { line: i + 1, reason: reason.to_string() };
            let line = raw.trim();
            if line.is_empty() {
                continue;
            }
            if let Some(rest) = line.strip_prefix('#') {
                let mut w = rest.split_whitespace();
                let (key, value) = (w.next().unwrap_or(""), w.next().unwrap_or(""));
                let num = |v: &str| v.parse::<u64>().map_err(|_| err("bad header number"));
                match key {
                    "seed" => table.seed = num(value)?,
                    "backend" => table.backend = value.to_string(),
                    "noise-digest" => table.noise_digest = value.to_string(),
                    "circuit-digest" => table.circuit_digest = value.to_string(),
                    "sites" => table.n_sites = num(value)? as usize,
                    "qubits" => table.n_qubits = num(value)? as usize,
                    "dt-fs" => table.dt_fs = value.parse().map_err(|_| err("bad time step"))?,
                    "steps" => table.steps = vec![Vec::new(); num(value)? as usize],
                    _ => {}
                }
                continue;
            }
            let f: Vec<&str> = line.split_whitespace().collect();
            if f.len() != 3 {
                return Err(err("expected `step bitstring multiplicity`"));
            }
            let step: usize = f[0].parse().map_err(|_| err("bad step"))?;
            let bits = table.parse_bits(f[1]).ok_or_else(|| err("bad bitstring"))?;
            let m: usize = f[2].parse().map_err(|_| err("bad multiplicity"))?;
            let slot = table.steps.get_mut(step).ok_or_else(|| err("step beyond declared count"))?;
            slot.extend(std::iter::repeat_n(bits, m));
        }
        Ok(table)
    }

    pub fn write(&self, path: &Path) -> std::io::Result<()> {
        std::fs::write(path, self.to_text())
    }

    pub fn read(path: &Path) -> Result<Self, Box<dyn std::error::Error + Send + Sync>> {
        Ok(ShotTable::from_text(&std::fs::read_to_string(path)?)?)
    }

    /// Same table with every step's shots sorted (the order the text form restores).
    pub fn sorted(&self) -> Self {
        let mut t = self.clone();
        t.steps.iter_mut().for_each(|s| s.sort_unstable());
        t
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn text_round_trip() {
        let t = ShotTable {
            n_sites: 3,
            n_qubits: 6,
            dt_fs: 4.0,
            seed: 7,
            backend: "trajectories".into(),
            noise_digest: "ab".into(),
            circuit_digest: "cd".into(),
            steps: vec![vec![0b000_001, 0b000_001], vec![0b010_100, 0b000_010]],
        };
        assert_eq!(t.format_bits(0b010_100), "001|010");
        assert_eq!(ShotTable::from_text(&t.to_text()).unwrap(), t.sorted());
    }
}
