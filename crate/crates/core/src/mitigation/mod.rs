//! Post-selection on measured bitstrings and the retention statistics built
//! on it.
//!
//! A valid shot has exactly one excited site qubit (the electron) and at most
//! `max_quanta` excited oscillator qubits. Both filters are per-shot
//! predicates, so they are idempotent and commute.

mod fit;

pub use fit::{fit_retention_vs_qubits, fit_shot_decay, DecayFit, RetentionFit};

use crate::emulator::ShotTable;
use crate::series::{PopulationSeries, Provenance};
use std::fmt::Write as _;

/// Vibrational cap used for population dynamics.
pub const DYNAMICS_MAX_QUANTA: usize = 1;
/// Vibrational cap used for retention analyses.
pub const RETENTION_MAX_QUANTA: usize = 2;

/// Which post-selection filters to apply.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Mitigation {
    pub electronic: bool,
    pub max_quanta: Option<usize>,
}

impl Mitigation {
    pub const OFF: Mitigation = Mitigation { electronic: false, max_quanta: None };

    /// Both filters with the given vibrational cap.
    pub const fn full(max_quanta: usize) -> Self {
        Mitigation { electronic: true, max_quanta: Some(max_quanta) }
    }

    pub fn is_off(&self) -> bool {
        !self.electronic && self.max_quanta.is_none()
    }

    /// Whether a bitstring with `n_sites` site bits passes.
    pub fn accepts(&self, n_sites: usize, shot: u64) -> bool {
        let site_mask = (1u64 << n_sites) - 1;
        (!self.electronic || (shot & site_mask).count_ones() == 1)
            && self.max_quanta.is_none_or(|cap| ((shot >> n_sites).count_ones() as usize) <= cap)
    }

    pub fn apply(&self, table: &ShotTable) -> ShotTable {
        retain(table, |s| self.accepts(table.n_sites, s))
    }
}

impl Default for Mitigation {
    fn default() -> Self {
        Mitigation::full(DYNAMICS_MAX_QUANTA)
    }
}

fn retain(table: &ShotTable, keep: impl Fn(u64) -> bool) -> ShotTable {
    ShotTable { steps: table.steps.iter().map(|shots| shots.iter().copied().filter(|&s| keep(s)).collect()).collect(), ..table.clone() }
}

pub fn is_electronic(table: &ShotTable, shot: u64) -> bool {
    table.site_bits(shot).count_ones() == 1
}

pub fn is_within_cap(table: &ShotTable, shot: u64, max_quanta: usize) -> bool {
    table.osc_bits(shot).count_ones() as usize <= max_quanta
}

/// Keep shots with exactly one excited site.
pub fn filter_electronic(table: &ShotTable) -> ShotTable {
    retain(table, |s| is_electronic(table, s))
}

/// Keep shots with at most `max_quanta` excited oscillator qubits.
pub fn filter_vibrational(table: &ShotTable, max_quanta: usize) -> ShotTable {
    retain(table, |s| is_within_cap(table, s, max_quanta))
}

/// Fraction of all bitstrings on `n_sites` site and `n_osc` oscillator
/// qubits that pass both filters: N · Σ_{k ≤ cap} C(n_osc, k) / 2^(N + n_osc).
pub fn mixed_state_fraction(n_sites: usize, n_osc: usize, max_quanta: usize) -> f64 {
    let valid_osc: f64 = (0..=max_quanta.min(n_osc)).map(|k| binomial(n_osc, k)).sum();
    n_sites as f64 * valid_osc / 2f64.powi((n_sites + n_osc) as i32)
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Retained-shot counts per step after each filter stage.
#[derive(Clone, Debug, PartialEq)]
pub struct FilterReport {
    pub shots: usize,
    pub max_quanta: usize,
    pub raw: Vec<usize>,
    pub electronic: Vec<usize>,
    pub vibronic: Vec<usize>,
    /// Expected retained count for a completely mixed state.
    pub mixed_baseline: f64,
}

impl FilterReport {
    pub fn new(table: &ShotTable, max_quanta: usize) -> Self {
        let electronic = filter_electronic(table);
        let vibronic = filter_vibrational(&electronic, max_quanta);
        let counts = |t: &ShotTable| t.steps.iter().map(Vec::len).collect::<Vec<_>>();
        let shots = table.shots();
        FilterReport {
            shots,
            max_quanta,
            raw: counts(table),
            electronic: counts(&electronic),
            vibronic: counts(&vibronic),
            mixed_baseline: shots as f64 * mixed_state_fraction(table.n_sites, table.n_qubits - table.n_sites, max_quanta),
        }
    }

    /// Retained fraction per step after both filters.
    pub fn retention(&self) -> Vec<f64> {
        self.vibronic.iter().map(|&c| c as f64 / self.shots.max(1) as f64).collect()
    }

    pub fn is_monotone(&self) -> bool {
        self.raw.iter().zip(&self.electronic).zip(&self.vibronic).all(|((r, e), v)| r >= e && e >= v)
    }

    /// Header comments, then `step raw electronic vibronic` columns.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "# shots {}", self.shots);
        let _ = writeln!(out, "# max-quanta {}", self.max_quanta);
        let _ = writeln!(out, "# mixed-baseline {:.6}", self.mixed_baseline);
        let _ = writeln!(out, "# normalization retained-shots");
        out.push_str("# step raw electronic vibronic\n");
        for (k, ((r, e), v)) in self.raw.iter().zip(&self.electronic).zip(&self.vibronic).enumerate() {
            let _ = writeln!(out, "{k} {r} {e} {v}");
        }
        out
    }

    /// Parse the output of [`to_text`](Self::to_text); `None` if malformed.
    pub fn from_text(text: &str) -> Option<Self> {
        let mut report = FilterReport { shots: 0, max_quanta: 0, raw: vec![], electronic: vec![], vibronic: vec![], mixed_baseline: 0.0 };
        for line in text.lines().map(str::trim).filter(|l| !l.is_empty()) {
            if let Some(header) = line.strip_prefix('#') {
                let mut it = header.split_whitespace();
                match (it.next(), it.next()) {
                    (Some("shots"), Some(v)) => report.shots = v.parse().ok()?,
                    (Some("max-quanta"), Some(v)) => report.max_quanta = v.parse().ok()?,
                    (Some("mixed-baseline"), Some(v)) => report.mixed_baseline = v.parse().ok()?,
                    _ => {}
                }
                continue;
            }
            let v: Vec<usize> = line.split_whitespace().map(|f| f.parse().ok()).collect::<Option<_>>()?;
            if v.len() != 4 || v[0] != report.raw.len() {
                return None;
            }
            report.raw.push(v[1]);
            report.electronic.push(v[2]);
            report.vibronic.push(v[3]);
        }
        Some(report)
    }
}

/// Site populations from the shots of each step, normalized by the number of
/// shots in that step, with binomial σ. Steps without shots give NaN.
pub fn site_populations(table: &ShotTable) -> PopulationSeries {
    let mut populations = Vec::with_capacity(table.n_steps());
    let mut sigma = Vec::with_capacity(table.n_steps());
    for shots in &table.steps {
        let total = shots.len() as f64;
        let mut counts = vec![0usize; table.n_sites];
        for &s in shots {
            for (q, c) in counts.iter_mut().enumerate() {
                *c += ((s >> q) & 1) as usize;
            }
        }
        let p: Vec<f64> = counts.iter().map(|&c| c as f64 / total).collect();
        sigma.push(p.iter().map(|&x| (x * (1.0 - x) / total).sqrt()).collect());
        populations.push(p);
    }
    let times = (0..table.n_steps()).map(|k| k as f64 * table.dt_fs).collect();
    PopulationSeries { times, populations, sigma: Some(sigma), provenance: Provenance::Trajectories }
}

/// Single-qubit marginals of a bitstring distribution conditioned on the
/// post-selection predicate, with the retained probability mass.
pub fn conditioned_marginals(distribution: &[f64], n_sites: usize, n_qubits: usize, mitigation: &Mitigation) -> (Vec<f64>, f64) {
    let mut marginals = vec![0.0; n_qubits];
    let mut mass = 0.0;
    for (x, &p) in distribution.iter().enumerate() {
        if !mitigation.accepts(n_sites, x as u64) {
            continue;
        }
        mass += p;
        for (q, m) in marginals.iter_mut().enumerate() {
            if (x >> q) & 1 == 1 {
                *m += p;
            }
        }
    }
    marginals.iter_mut().for_each(|m| *m /= mass);
    (marginals, mass)
}
