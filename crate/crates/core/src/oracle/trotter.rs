//! First-order Trotter product evaluated directly on the truncated basis.
//!
//! One step applies, in order, e^{−iH_diag dt}, the hopping factors (even
//! bonds then odd bonds unless another schedule is given) and
//! e^{−iH_vibronic dt}, which is the factor ordering of the circuit. With two
//! levels per mode and no quanta cap this is the unitary the circuit implements.

use super::basis::TruncatedBasis;
use crate::error::OracleError;
use crate::model::{site_energies, ModelSpec};
use crate::series::{PopulationSeries, Provenance};
use crate::units::RAD_PER_FS_PER_WAVENUMBER;
use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;

#[derive(Clone, Debug)]
pub struct TrotterReference {
    spec: ModelSpec,
    basis: TruncatedBasis,
    diag_phase: Vec<Complex64>,
    hop_cos: f64,
    hop_sin: f64,
    /// Left site index of every hop, grouped in execution order.
    hop_groups: Vec<Vec<usize>>,
    /// `vib_blocks[c]` is e^{−i g dt (b + b†)} on levels 0..=c, row-major.
    vib_blocks: Vec<Vec<Complex64>>,
}

fn exp_tridiagonal(levels: usize, coupling: f64, t: f64) -> Vec<Complex64> {
    let mut h = DMatrix::<f64>::zeros(levels, levels);
    for k in 1..levels {
        h[(k, k - 1)] = coupling * (k as f64).sqrt();
        h[(k - 1, k)] = coupling * (k as f64).sqrt();
    }
    let eig = SymmetricEigen::new(h);
    let mut out = vec![Complex64::new(0.0, 0.0); levels * levels];
    for i in 0..levels {
        for j in 0..levels {
            let mut acc = Complex64::new(0.0, 0.0);
            for k in 0..levels {
                acc += Complex64::from_polar(1.0, -eig.eigenvalues[k] * t) * (eig.eigenvectors[(i, k)] * eig.eigenvectors[(j, k)]);
            }
            out[i * levels + j] = acc;
        }
    }
    out
}

impl TrotterReference {
    /// Even hops, then odd hops.
    pub fn new(spec: &ModelSpec) -> Result<Self, OracleError> {
        let groups = (0..2).map(|parity| (parity..spec.n_sites.saturating_sub(1)).step_by(2).collect()).collect();
        Self::with_hop_groups(spec, groups)
    }

    /// Hops applied in the given order, e.g. the schedule of a routed circuit.
    pub fn with_hop_groups(spec: &ModelSpec, hop_groups: Vec<Vec<usize>>) -> Result<Self, OracleError> {
        spec.validate()?;
        let basis = TruncatedBasis::new(spec.n_sites, spec.n_levels, spec.max_vib_quanta)?;
        let t = spec.dt.0 * RAD_PER_FS_PER_WAVENUMBER;
        let omega = site_energies(spec);
        let w0 = spec.osc_frequency.0;
        let diag_phase = (0..basis.dim())
            .map(|i| {
                let (e, occ) = basis.state(i);
                let q: f64 = occ.iter().map(|&k| k as f64).sum();
                Complex64::from_polar(1.0, -(omega[e].0 + w0 * q) * t)
            })
            .collect();
        let theta = spec.hopping.0 * t;
        let g = spec.coupling().0;
        let vib_blocks = (0..=spec.per_mode_cap()).map(|c| exp_tridiagonal(c + 1, g, t)).collect();
        Ok(TrotterReference { spec: spec.clone(), basis, diag_phase, hop_cos: theta.cos(), hop_sin: theta.sin(), hop_groups, vib_blocks })
    }

    pub fn basis(&self) -> &TruncatedBasis {
        &self.basis
    }

    fn hop(&self, psi: &mut [Complex64], e: usize) {
        let m = self.basis.n_vib();
        let mi = Complex64::new(0.0, -1.0);
        for r in 0..m {
            let a = psi[e * m + r];
            let b = psi[(e + 1) * m + r];
            psi[e * m + r] = a * self.hop_cos + mi * b * self.hop_sin;
            psi[(e + 1) * m + r] = mi * a * self.hop_sin + b * self.hop_cos;
        }
    }

    fn vibronic_layer(&self, psi: &mut [Complex64]) {
        let m = self.basis.n_vib();
        let cap = self.spec.per_mode_cap();
        let budget = self.spec.max_vib_quanta;
        let mut seen = vec![false; self.basis.dim()];
        let mut chain = Vec::with_capacity(cap + 1);
        let mut amps = Vec::with_capacity(cap + 1);
        for r in 0..m {
            for e in 0..self.spec.n_sites {
                let start = e * m + r;
                if seen[start] || self.basis.occupations()[r][e] != 0 {
                    continue;
                }
                let occ0 = self.basis.occupations()[r].clone();
                let others: usize = occ0.iter().map(|&k| k as usize).sum();
                let top = cap.min(budget.saturating_sub(others));
                chain.clear();
                let mut occ = occ0.clone();
                for k in 0..=top {
                    occ[e] = k as u8;
                    chain.push(self.basis.index(e, &occ).expect("chain stays inside the basis"));
                }
                let u = &self.vib_blocks[top];
                amps.clear();
                amps.extend(chain.iter().map(|&i| psi[i]));
                let n = top + 1;
                for (row, &dst) in chain.iter().enumerate() {
                    psi[dst] = (0..n).map(|col| u[row * n + col] * amps[col]).sum();
                    seen[dst] = true;
                }
            }
        }
    }

    /// One Trotter step in place.
    pub fn step(&self, psi: &mut [Complex64]) {
        for (a, p) in psi.iter_mut().zip(&self.diag_phase) {
            *a *= p;
        }
        for &e in self.hop_groups.iter().flatten() {
            self.hop(psi, e);
        }
        if self.spec.huang_rhys > 0.0 {
            self.vibronic_layer(psi);
        }
    }

    pub fn initial_vector(&self) -> Vec<Complex64> {
        let mut psi = vec![Complex64::new(0.0, 0.0); self.basis.dim()];
        psi[self.basis.index(0, &vec![0u8; self.spec.n_sites]).expect("vacuum")] = Complex64::new(1.0, 0.0);
        psi
    }

    pub fn populations(&self, psi: &[Complex64]) -> Vec<f64> {
        let m = self.basis.n_vib();
        (0..self.spec.n_sites).map(|e| psi[e * m..(e + 1) * m].iter().map(|a| a.norm_sqr()).sum()).collect()
    }

    /// Populations after each of `steps` Trotter steps from the donor state.
    pub fn population_series(&self, steps: usize) -> PopulationSeries {
        let mut psi = self.initial_vector();
        let mut times = vec![0.0];
        let mut pops = vec![self.populations(&psi)];
        for k in 1..=steps {
            self.step(&mut psi);
            times.push(k as f64 * self.spec.dt.0);
            pops.push(self.populations(&psi));
        }
        PopulationSeries::new(times, pops, Provenance::Noiseless)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn step_is_unitary() {
        let spec = ModelSpec::reference(4).with_dt(4.0);
        let tr = TrotterReference::new(&spec).unwrap();
        let mut psi = tr.initial_vector();
        for _ in 0..25 {
            tr.step(&mut psi);
        }
        let norm: f64 = psi.iter().map(|a| a.norm_sqr()).sum();
        assert!((norm - 1.0).abs() < 1e-12);
    }
}
