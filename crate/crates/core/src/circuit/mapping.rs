use super::{Circuit, Gate, GateKind};
use crate::model::{site_energies, ModelSpec};
use crate::units::Wavenumber;
use num_complex::Complex64;

/// Qubit form of the chain Hamiltonian, stored as number-operator coefficients:
///
/// H = Σ_n Ω_n n_n + ω0 Σ_o n_o + (J/2) Σ_⟨n,m⟩ (X_nX_m + Y_nY_m)
///     + (g/√Q) Σ_n Σ_k n_n X_(n,k)
///
/// with n = (I − Z)/2. On one excitation (J/2)(XX + YY) = J(σ⁺σ⁻ + h.c.).
#[derive(Clone, Debug, PartialEq)]
pub struct QubitHamiltonian {
    pub n_sites: usize,
    pub osc_per_site: usize,
    pub site_energies: Vec<Wavenumber>,
    pub osc_frequency: Wavenumber,
    /// Coefficient of X X + Y Y on each neighboring site pair.
    pub hopping: Wavenumber,
    /// Coefficient of n_site X_osc on each site–oscillator pair.
    pub vibronic: Wavenumber,
}

pub fn map_to_qubits(spec: &ModelSpec, osc_per_site: usize) -> QubitHamiltonian {
    let q = osc_per_site.max(1);
    QubitHamiltonian {
        n_sites: spec.n_sites,
        osc_per_site: q,
        site_energies: site_energies(spec),
        osc_frequency: spec.osc_frequency,
        hopping: Wavenumber(spec.hopping.0 / 2.0),
        vibronic: Wavenumber(spec.coupling().0 / (q as f64).sqrt()),
    }
}

impl QubitHamiltonian {
    pub fn n_qubits(&self) -> usize {
        self.n_sites * (1 + self.osc_per_site)
    }

    pub fn osc_qubit(&self, site: usize, k: usize) -> usize {
        self.n_sites + site * self.osc_per_site + k
    }

    /// Pauli-Z coefficients per site qubit (−Ω_n/2, dropping the identity shift).
    pub fn z_coefficients(&self) -> Vec<f64> {
        self.site_energies.iter().map(|w| -w.0 / 2.0).collect()
    }

    pub fn hopping_pairs(&self) -> Vec<(usize, usize)> {
        (0..self.n_sites.saturating_sub(1)).map(|n| (n, n + 1)).collect()
    }

    pub fn vibronic_pairs(&self) -> Vec<(usize, usize)> {
        (0..self.n_sites).flat_map(|n| (0..self.osc_per_site).map(move |k| (n, k))).map(|(n, k)| (n, self.osc_qubit(n, k))).collect()
    }

    /// Dense Hamiltonian in cm⁻¹ on all qubits, row-major; bit q of the index is qubit q.
    pub fn dense_matrix(&self) -> Vec<Complex64> {
        let nq = self.n_qubits();
        let dim = 1usize << nq;
        let mut h = vec![Complex64::new(0.0, 0.0); dim * dim];
        let bit = |x: usize, q: usize| (x >> q) & 1;
        for x in 0..dim {
            let mut diag = 0.0;
            for n in 0..self.n_sites {
                diag += self.site_energies[n].0 * bit(x, n) as f64;
                for k in 0..self.osc_per_site {
                    diag += self.osc_frequency.0 * bit(x, self.osc_qubit(n, k)) as f64;
                }
            }
            h[x * dim + x] += diag;
            for (a, b) in self.hopping_pairs() {
                if bit(x, a) != bit(x, b) {
                    // XX + YY maps |01⟩ ↔ |10⟩ with amplitude 2
                    let y = x ^ (1 << a) ^ (1 << b);
                    h[y * dim + x] += 2.0 * self.hopping.0;
                }
            }
            for (s, o) in self.vibronic_pairs() {
                if bit(x, s) == 1 {
                    let y = x ^ (1 << o);
                    h[y * dim + x] += self.vibronic.0;
                }
            }
        }
        h
    }
}

impl Circuit {
    /// Logical circuit skeleton with identity placement.
    pub(crate) fn logical(qh: &QubitHamiltonian, dt_fs: f64) -> Circuit {
        let n = qh.n_qubits();
        Circuit { n_sites: qh.n_sites, dt_fs, osc_per_site: qh.osc_per_site, n_physical: n, placement: (0..n).collect(), layers: Vec::new() }
    }
}

pub(crate) fn rotation(kind: GateKind, qubits: &[usize], coefficient: Wavenumber, dt_fs: f64) -> Gate {
    Gate::new(kind, qubits, coefficient.phase(crate::units::Femtoseconds(dt_fs)))
}
