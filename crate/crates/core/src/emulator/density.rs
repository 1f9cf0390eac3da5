//! Dense density matrix stored as a vectorized state on 2n bits: bit q is the
//! row index of qubit q and bit q + n its column index.

use super::channels::{amplitude_damping, compose16, phase_flip, superoperator_1q};
use super::kernels::{apply_1q, apply_2q, spread, C64, ONE, ZERO};
use super::program::{Op, Program};

#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    n: usize,
    data: Vec<C64>,
}

impl DensityMatrix {
    /// |x⟩⟨x| for the computational basis state with bits `bits`.
    pub fn basis(n: usize, bits: u64) -> Self {
        let mut data = vec![ZERO; 1 << (2 * n)];
        let x = bits as usize;
        data[x | (x << n)] = ONE;
        DensityMatrix { n, data }
    }

    /// |ψ⟩⟨ψ| from dense amplitudes.
    pub fn from_pure(n: usize, psi: &[C64]) -> Self {
        let d = 1usize << n;
        let mut data = vec![ZERO; d * d];
        for c in 0..d {
            for r in 0..d {
                data[r | (c << n)] = psi[r] * psi[c].conj();
            }
        }
        DensityMatrix { n, data }
    }

    pub fn n_qubits(&self) -> usize {
        self.n
    }

    /// ρ[r, c].
    pub fn get(&self, r: usize, c: usize) -> C64 {
        self.data[r | (c << self.n)]
    }

    pub fn trace(&self) -> f64 {
        (0..1usize << self.n).map(|x| self.get(x, x).re).sum()
    }

    /// Diagonal of ρ: the computational-basis distribution.
    pub fn probabilities(&self) -> Vec<f64> {
        (0..1usize << self.n).map(|x| self.get(x, x).re).collect()
    }

    pub fn hermiticity_defect(&self) -> f64 {
        let d = 1usize << self.n;
        let mut worst = 0.0f64;
        for r in 0..d {
            for c in 0..r {
                worst = worst.max((self.get(r, c) - self.get(c, r).conj()).norm());
            }
        }
        worst
    }

    pub(crate) fn apply_one(&mut self, q: usize, m: &[C64; 4]) {
        apply_1q(&mut self.data, q, m);
        let conj = m.map(|z| z.conj());
        apply_1q(&mut self.data, q + self.n, &conj);
    }

    pub(crate) fn apply_two(&mut self, q: [usize; 2], m: &[C64; 16]) {
        apply_2q(&mut self.data, q[0], q[1], m);
        let conj = m.map(|z| z.conj());
        apply_2q(&mut self.data, q[0] + self.n, q[1] + self.n, &conj);
    }

    /// ρ → (1 − λ)ρ + λ Tr_S(ρ) ⊗ I/d on the qubit set S, with λ = p d²/(d² − 1).
    pub(crate) fn depolarize(&mut self, qubits: &[usize], p: f64) {
        let k = qubits.len();
        let d = 1usize << k;
        let d2 = (d * d) as f64;
        let lambda = p * d2 / (d2 - 1.0);
        let rows: Vec<usize> = qubits.to_vec();
        let cols: Vec<usize> = qubits.iter().map(|q| q + self.n).collect();
        let row_off: Vec<usize> = (0..d).map(|x| spread(x, &rows)).collect();
        let col_off: Vec<usize> = (0..d).map(|x| spread(x, &cols)).collect();
        let mask = spread(d - 1, &rows) | spread(d - 1, &cols);
        for base in 0..self.data.len() {
            if base & mask != 0 {
                continue;
            }
            let partial: C64 = (0..d).map(|x| self.data[base | row_off[x] | col_off[x]]).sum();
            for r in 0..d {
                for c in 0..d {
                    let i = base | row_off[r] | col_off[c];
                    let mixed = if r == c { partial / d as f64 } else { ZERO };
                    self.data[i] = self.data[i] * (1.0 - lambda) + mixed * lambda;
                }
            }
        }
    }

    pub(crate) fn relax(&mut self, q: usize, p_amp: f64, p_phase: f64) {
        let s = compose16(&superoperator_1q(&amplitude_damping(p_amp)), &superoperator_1q(&phase_flip(p_phase)));
        apply_2q(&mut self.data, q, q + self.n, &s);
    }

    pub(crate) fn run(&mut self, program: &Program) {
        for op in &program.ops {
            match op {
                Op::One { qubit, matrix } => self.apply_one(*qubit, matrix),
                Op::Two { qubits, matrix } => self.apply_two(*qubits, matrix),
                Op::Diagonal(d) => {
                    for &(q, d0, d1) in &d.gates {
                        self.apply_one(q, &[d0, ZERO, ZERO, d1]);
                    }
                }
                Op::Depolarize { qubits, p } => self.depolarize(qubits, *p),
                Op::Relax(damping) => {
                    for c in &damping.channels {
                        self.relax(c.qubit, c.p_amp, c.p_phase);
                    }
                }
            }
        }
    }
}

/// Apply independent readout flips to a bitstring distribution.
pub fn apply_readout(probabilities: &mut [f64], flips: &[f64]) {
    for (q, &f) in flips.iter().enumerate() {
        if f == 0.0 {
            continue;
        }
        let mask = 1usize << q;
        for x in 0..probabilities.len() {
            if x & mask == 0 {
                let (a, b) = (probabilities[x], probabilities[x | mask]);
                probabilities[x] = (1.0 - f) * a + f * b;
                probabilities[x | mask] = f * a + (1.0 - f) * b;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::emulator::channels::depolarizing;

    #[test]
    fn depolarizing_shortcut_matches_kraus_sum() {
        // random pure state on 3 qubits, depolarize qubits (2, 0)
        let psi: Vec<C64> = (0..8).map(|i| C64::new((i as f64 * 0.7).sin(), (i as f64 * 1.3).cos())).collect();
        let norm = psi.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        let psi: Vec<C64> = psi.iter().map(|a| a / norm).collect();
        let mut fast = DensityMatrix::from_pure(3, &psi);
        fast.depolarize(&[2, 0], 0.3);
        let rho = DensityMatrix::from_pure(3, &psi);
        let mut slow = DensityMatrix { n: 3, data: vec![ZERO; 64] };
        for k in depolarizing(2, 0.3) {
            let mut term = rho.clone();
            // K ρ K† through the vectorized kernels
            let arr: [C64; 16] = k.clone().try_into().unwrap();
            term.apply_two([2, 0], &arr);
            slow.data.iter_mut().zip(&term.data).for_each(|(s, t)| *s += t);
        }
        assert!(fast.data.iter().zip(&slow.data).all(|(a, b)| (a - b).norm() < 1e-12));
    }

    #[test]
    fn readout_flips_preserve_total() {
        let mut p = vec![0.5, 0.25, 0.125, 0.125];
        apply_readout(&mut p, &[0.1, 0.2]);
        assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-15);
    }
}
