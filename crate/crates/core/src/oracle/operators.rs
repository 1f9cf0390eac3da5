//! Hamiltonian and jump operators on a [`TruncatedBasis`].

use super::basis::TruncatedBasis;
use crate::error::OracleError;
use crate::model::{site_energies, ModelSpec};
use num_complex::Complex64;

/// Real sparse matrix in compressed-row form.
#[derive(Clone, Debug, PartialEq)]
pub struct SparseMatrix {
    dim: usize,
    indptr: Vec<usize>,
    indices: Vec<usize>,
    values: Vec<f64>,
}

impl SparseMatrix {
    /// Build from (row, col, value) triplets; duplicates are summed, zeros dropped.
    pub fn from_triplets(dim: usize, mut triplets: Vec<(usize, usize, f64)>) -> Self {
        triplets.sort_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)));
        let mut indptr = vec![0usize; dim + 1];
        let mut indices = Vec::with_capacity(triplets.len());
        let mut values: Vec<f64> = Vec::with_capacity(triplets.len());
        let mut last: Option<(usize, usize)> = None;
        for (r, c, v) in triplets {
            if last == Some((r, c)) {
                *values.last_mut().unwrap() += v;
                continue;
            }
            indices.push(c);
            values.push(v);
            indptr[r + 1] += 1;
            last = Some((r, c));
        }
        for r in 0..dim {
            indptr[r + 1] += indptr[r];
        }
        let mut m = SparseMatrix { dim, indptr, indices, values };
        m.drop_zeros();
        m
    }

    fn drop_zeros(&mut self) {
        let mut indptr = vec![0usize; self.dim + 1];
        let mut indices = Vec::with_capacity(self.indices.len());
        let mut values = Vec::with_capacity(self.values.len());
        for r in 0..self.dim {
            for k in self.indptr[r]..self.indptr[r + 1] {
                if self.values[k] != 0.0 {
                    indices.push(self.indices[k]);
                    values.push(self.values[k]);
                }
            }
            indptr[r + 1] = indices.len();
        }
        self.indptr = indptr;
        self.indices = indices;
        self.values = values;
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row(&self, r: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        (self.indptr[r]..self.indptr[r + 1]).map(move |k| (self.indices[k], self.values[k]))
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.row(r).find(|&(j, _)| j == c).map_or(0.0, |(_, v)| v)
    }

    pub fn scaled(&self, factor: f64) -> Self {
        SparseMatrix { values: self.values.iter().map(|v| v * factor).collect(), ..self.clone() }
    }

    /// Largest |A_ij − A_ji|.
    pub fn asymmetry(&self) -> f64 {
        let mut worst = 0.0f64;
        for r in 0..self.dim {
            for (c, v) in self.row(r) {
                worst = worst.max((v - self.get(c, r)).abs());
            }
        }
        worst
    }

    /// y = A x for complex x.
    pub fn mul_vec(&self, x: &[Complex64], y: &mut [Complex64]) {
        for r in 0..self.dim {
            let mut acc = Complex64::new(0.0, 0.0);
            for k in self.indptr[r]..self.indptr[r + 1] {
                acc += x[self.indices[k]] * self.values[k];
            }
            y[r] = acc;
        }
    }

    /// Y = A X for a row-major dim×dim complex matrix X.
    pub fn mul_dense(&self, x: &[Complex64], y: &mut [Complex64]) {
        let n = self.dim;
        for r in 0..n {
            let out = &mut y[r * n..(r + 1) * n];
            out.iter_mut().for_each(|v| *v = Complex64::new(0.0, 0.0));
            for k in self.indptr[r]..self.indptr[r + 1] {
                let a = self.values[k];
                let src = &x[self.indices[k] * n..(self.indices[k] + 1) * n];
                for (o, s) in out.iter_mut().zip(src) {
                    *o += s * a;
                }
            }
        }
    }

    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let mut d = vec![vec![0.0; self.dim]; self.dim];
        for (r, row) in d.iter_mut().enumerate() {
            for (c, v) in self.row(r) {
                row[c] = v;
            }
        }
        d
    }
}

fn check_basis(spec: &ModelSpec, basis: &TruncatedBasis) -> Result<(), OracleError> {
    spec.validate()?;
    if basis.n_sites() != spec.n_sites || basis.n_levels() != spec.n_levels || basis.max_quanta() != spec.max_vib_quanta {
        let expected = TruncatedBasis::new(spec.n_sites, spec.n_levels, spec.max_vib_quanta)?.dim();
        return Err(OracleError::DimensionMismatch { expected, found: basis.dim() });
    }
    Ok(())
}

/// Full Hamiltonian in cm⁻¹. Matrix elements leaving the truncated basis are dropped.
pub fn build_hamiltonian(spec: &ModelSpec, basis: &TruncatedBasis) -> Result<SparseMatrix, OracleError> {
    check_basis(spec, basis)?;
    let omega = site_energies(spec);
    let j = spec.hopping.0;
    let w0 = spec.osc_frequency.0;
    let g = spec.coupling().0;
    let n = spec.n_sites;
    let mut trip = Vec::new();
    for idx in 0..basis.dim() {
        let (e, occ) = basis.state(idx);
        let quanta: usize = occ.iter().map(|&k| k as usize).sum();
        trip.push((idx, idx, omega[e].0 + w0 * quanta as f64));
        if e + 1 < n {
            let other = basis.index(e + 1, occ).expect("same occupations exist on every site");
            trip.push((idx, other, j));
            trip.push((other, idx, j));
        }
        if g != 0.0 && occ[e] > 0 {
            let mut lower = occ.to_vec();
            lower[e] -= 1;
            let other = basis.index(e, &lower).expect("lowered occupation stays in the basis");
            let amp = g * (occ[e] as f64).sqrt();
            trip.push((idx, other, amp));
            trip.push((other, idx, amp));
        }
    }
    Ok(SparseMatrix::from_triplets(basis.dim(), trip))
}

/// Nonzero entries (destination, source, amplitude) of the truncated lowering operator b_mode.
pub fn lowering_entries(basis: &TruncatedBasis, mode: usize) -> Vec<(usize, usize, f64)> {
    let mut out = Vec::new();
    for src in 0..basis.dim() {
        let (e, occ) = basis.state(src);
        if occ[mode] > 0 {
            let mut lower = occ.to_vec();
            lower[mode] -= 1;
            let dst = basis.index(e, &lower).expect("lowered occupation stays in the basis");
            out.push((dst, src, (occ[mode] as f64).sqrt()));
        }
    }
    out
}

/// Total quanta Σ_n b_n†b_n per basis state.
pub fn total_quanta(basis: &TruncatedBasis) -> Vec<f64> {
    (0..basis.dim()).map(|i| basis.state(i).1.iter().map(|&k| k as f64).sum()).collect()
}
