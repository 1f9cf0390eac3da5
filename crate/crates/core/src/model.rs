//! Donor–acceptor chain with one local oscillator per site.
//!
//! Site 0 is the donor, site 1 the Coulomb trap, sites 2.. the acceptor band.
//! Site energies are Ω_n = −V/n for n ≥ 1 and Ω_0 = Δ − V.

use crate::error::SpecError;
use crate::units::{Femtoseconds, Rate, Wavenumber};
use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

/// Physical and numerical parameters of the chain model.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ModelSpec {
    pub n_sites: usize,
    pub hopping: Wavenumber,
    pub coulomb: Wavenumber,
    pub driving: Wavenumber,
    pub osc_frequency: Wavenumber,
    pub huang_rhys: f64,
    pub damping: Rate,
    pub dt: Femtoseconds,
    /// Levels kept per oscillator.
    pub n_levels: usize,
    /// Cap on the total number of vibrational quanta.
    pub max_vib_quanta: usize,
}

impl Default for ModelSpec {
    fn default() -> Self {
        ModelSpec::reference(5)
    }
}

impl ModelSpec {
    /// Reference parameters at the vibronic working point with the default
    /// truncation: 5 levels per mode, at most 4 quanta for N ≤ 4 and 2 otherwise.
    pub fn reference(n_sites: usize) -> Self {
        ModelSpec {
            n_sites,
            hopping: Wavenumber(500.0),
            coulomb: Wavenumber(2420.0),
            driving: Wavenumber(3010.0),
            osc_frequency: Wavenumber(1500.0),
            huang_rhys: 0.05,
            damping: Rate(0.0),
            dt: Femtoseconds(0.5),
            n_levels: 5,
            max_vib_quanta: if n_sites <= 4 { 4 } else { 2 },
        }
    }

    /// Parameters matching a qubit emulation: two levels per mode, no quanta cap.
    pub fn qubit_matched(&self) -> Self {
        ModelSpec { n_levels: 2, max_vib_quanta: self.n_sites, ..self.clone() }
    }

    pub fn with_driving(&self, driving: f64) -> Self {
        ModelSpec { driving: Wavenumber(driving), ..self.clone() }
    }

    pub fn with_damping(&self, damping: Rate) -> Self {
        ModelSpec { damping, ..self.clone() }
    }

    pub fn with_dt(&self, dt: f64) -> Self {
        ModelSpec { dt: Femtoseconds(dt), ..self.clone() }
    }

    /// Same model with the vibronic coupling switched off.
    pub fn uncoupled(&self) -> Self {
        ModelSpec { huang_rhys: 0.0, ..self.clone() }
    }

    /// Vibronic coupling g = ω0 √s.
    pub fn coupling(&self) -> Wavenumber {
        Wavenumber(self.osc_frequency.0 * self.huang_rhys.sqrt())
    }

    /// Per-mode occupation cap implied by both truncations.
    pub fn per_mode_cap(&self) -> usize {
        (self.n_levels - 1).min(self.max_vib_quanta)
    }

    pub fn validate(&self) -> Result<(), SpecError> {
        let finite = |field: &'static str, v: f64| {
            if v.is_finite() {
                Ok(())
            } else {
                Err(SpecError::new(field, format!("must be finite, got {v}")))
            }
        };
        if self.n_sites < 2 {
            return Err(SpecError::new("n_sites", format!("need at least 2 sites, got {}", self.n_sites)));
        }
        if self.n_sites > 32 {
            return Err(SpecError::new("n_sites", format!("at most 32 sites supported, got {}", self.n_sites)));
        }
        finite("hopping", self.hopping.0)?;
        finite("coulomb", self.coulomb.0)?;
        finite("driving", self.driving.0)?;
        finite("osc_frequency", self.osc_frequency.0)?;
        finite("huang_rhys", self.huang_rhys)?;
        finite("damping", self.damping.0)?;
        finite("dt", self.dt.0)?;
        if self.huang_rhys < 0.0 {
            return Err(SpecError::new("huang_rhys", "must be non-negative"));
        }
        if self.damping.0 < 0.0 {
            return Err(SpecError::new("damping", "must be non-negative"));
        }
        if self.dt.0 <= 0.0 {
            return Err(SpecError::new("dt", "must be positive"));
        }
        if self.n_levels < 1 {
            return Err(SpecError::new("n_levels", "need at least one level per oscillator"));
        }
        Ok(())
    }
}

/// Ω_n for n = 0..N−1.
pub fn site_energies(spec: &ModelSpec) -> Vec<Wavenumber> {
    let v = spec.coulomb.0;
    (0..spec.n_sites)
        .map(|n| if n == 0 { Wavenumber(spec.driving.0 - v) } else { Wavenumber(-v / n as f64) })
        .collect()
}

/// Dense tight-binding matrix over sites `first..N`, in cm⁻¹.
fn electronic_block(spec: &ModelSpec, first: usize) -> DMatrix<f64> {
    let omega = site_energies(spec);
    let n = spec.n_sites - first;
    let mut h = DMatrix::zeros(n, n);
    for i in 0..n {
        h[(i, i)] = omega[first + i].0;
        if i + 1 < n {
            h[(i, i + 1)] = spec.hopping.0;
            h[(i + 1, i)] = spec.hopping.0;
        }
    }
    h
}

/// Eigenvalues in ascending order with matching eigenvectors as columns.
#[derive(Clone, Debug)]
pub struct Eigensystem {
    pub values: Vec<f64>,
    pub vectors: DMatrix<f64>,
}

fn sorted_eigen(h: DMatrix<f64>) -> Eigensystem {
    let eig = SymmetricEigen::new(h);
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let n = order.len();
    let mut vectors = DMatrix::zeros(n, n);
    for (col, &k) in order.iter().enumerate() {
        let v = eig.eigenvectors.column(k);
        // fix the sign so the largest component is positive
        let pivot = v.iter().copied().fold(0.0f64, |m, x| if x.abs() > m.abs() { x } else { m });
        let sign = if pivot < 0.0 { -1.0 } else { 1.0 };
        for row in 0..n {
            vectors[(row, col)] = sign * v[row];
        }
    }
    Eigensystem { values: order.iter().map(|&k| eig.eigenvalues[k]).collect(), vectors }
}

/// Eigensystem of the acceptor block (sites 1..N−1).
pub fn acceptor_eigensystem(spec: &ModelSpec) -> Result<Eigensystem, SpecError> {
    spec.validate()?;
    if spec.n_sites < 3 {
        return Err(SpecError::new("n_sites", "acceptor eigensystem needs N >= 3"));
    }
    Ok(sorted_eigen(electronic_block(spec, 1)))
}

/// Eigensystem of the full electronic chain including the donor.
pub fn electronic_eigensystem(spec: &ModelSpec) -> Result<Eigensystem, SpecError> {
    spec.validate()?;
    Ok(sorted_eigen(electronic_block(spec, 0)))
}

/// Predicted resonance locations for a chain.
#[derive(Clone, Debug, Serialize)]
pub struct ResonanceReport {
    pub n_sites: usize,
    /// Acceptor eigenvalues λ_k, ascending.
    pub acceptor_eigenvalues: Vec<Wavenumber>,
    /// `site_amplitudes[k][m]` is the amplitude of eigenstate k on site m+1.
    pub site_amplitudes: Vec<Vec<f64>>,
    /// Δ_e,k = λ_k + V.
    pub electronic: Vec<Wavenumber>,
    /// Δ_v,k = Δ_e,k + ω0.
    pub vibronic: Vec<Wavenumber>,
    /// Whether Δ_v,k lies above every Δ_e.
    pub vibronic_above_electronic: Vec<bool>,
    /// Driving forces at which the donor hybridizes most strongly with the
    /// acceptor in the full chain (local maxima of the donor participation number).
    pub hybridized: Vec<Wavenumber>,
}

impl ResonanceReport {
    pub fn pure_vibronic(&self) -> impl Iterator<Item = Wavenumber> + '_ {
        self.vibronic.iter().zip(&self.vibronic_above_electronic).filter(|(_, &a)| a).map(|(v, _)| *v)
    }
}

/// Participation number of the donor site across the eigenstates of the full chain.
pub fn donor_participation(spec: &ModelSpec) -> Result<f64, SpecError> {
    let eig = electronic_eigensystem(spec)?;
    let ipr: f64 = eig.vectors.row(0).iter().map(|a| a.powi(4)).sum();
    Ok(1.0 / ipr)
}

const HYBRIDIZATION_SCAN_STEP: f64 = 1.0;

fn hybridized_resonances(spec: &ModelSpec, electronic: &[Wavenumber]) -> Result<Vec<Wavenumber>, SpecError> {
    let span = 2.0 * spec.hopping.0.abs() + 10.0;
    let lo = electronic.first().map_or(0.0, |w| w.0) - span;
    let hi = electronic.last().map_or(0.0, |w| w.0) + span;
    let n = ((hi - lo) / HYBRIDIZATION_SCAN_STEP).ceil() as usize + 1;
    let eval = |d: f64| donor_participation(&spec.with_driving(d));
    let values = (0..n).map(|i| eval(lo + i as f64 * HYBRIDIZATION_SCAN_STEP)).collect::<Result<Vec<_>, _>>()?;
    let mut peaks = Vec::new();
    for i in 1..n - 1 {
        if values[i] > values[i - 1] && values[i] >= values[i + 1] {
            // golden-section refinement inside the bracketing cells
            let (mut a, mut b) = (lo + (i - 1) as f64 * HYBRIDIZATION_SCAN_STEP, lo + (i + 1) as f64 * HYBRIDIZATION_SCAN_STEP);
            let r = 0.5 * (5f64.sqrt() - 1.0);
            for _ in 0..40 {
                let c = b - r * (b - a);
                let d = a + r * (b - a);
                if eval(c)? > eval(d)? {
                    b = d;
                } else {
                    a = c;
                }
            }
            peaks.push(Wavenumber(0.5 * (a + b)));
        }
    }
    Ok(peaks)
}

/// Electronic and vibronic resonance predictions from the acceptor eigensystem.
pub fn predict_resonances(spec: &ModelSpec) -> Result<ResonanceReport, SpecError> {
    let eig = acceptor_eigensystem(spec)?;
    let v = spec.coulomb.0;
    let w0 = spec.osc_frequency.0;
    let electronic: Vec<Wavenumber> = eig.values.iter().map(|l| Wavenumber(l + v)).collect();
    let vibronic: Vec<Wavenumber> = electronic.iter().map(|e| Wavenumber(e.0 + w0)).collect();
    let top = electronic.iter().map(|e| e.0).fold(f64::NEG_INFINITY, f64::max);
    let above = vibronic.iter().map(|x| x.0 > top).collect();
    let n = eig.values.len();
    let site_amplitudes = (0..n).map(|k| eig.vectors.column(k).iter().copied().collect()).collect();
    let hybridized = hybridized_resonances(spec, &electronic)?;
    Ok(ResonanceReport {
        n_sites: spec.n_sites,
        acceptor_eigenvalues: eig.values.iter().map(|&l| Wavenumber(l)).collect(),
        site_amplitudes,
        electronic,
        vibronic,
        vibronic_above_electronic: above,
        hybridized,
    })
}
