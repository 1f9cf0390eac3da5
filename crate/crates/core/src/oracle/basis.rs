//! Single-excitation × capped-vibrational-quanta basis.

use crate::error::OracleError;
use std::collections::HashMap;

/// Upper bound on the basis dimension accepted by [`TruncatedBasis::new`].
pub const MAX_BASIS_DIM: usize = 2_000_000;

/// Basis states |e⟩ ⊗ |ν⟩ with one electron on site e and occupations
/// ν_i ≤ N_b − 1, Σν ≤ K. Dense index = e · M + (rank of ν).
#[derive(Clone, Debug)]
pub struct TruncatedBasis {
    n_sites: usize,
    n_levels: usize,
    max_quanta: usize,
    occupations: Vec<Vec<u8>>,
    lookup: HashMap<Vec<u8>, usize>,
}

fn count_occupations(modes: usize, cap: usize, budget: usize) -> usize {
    // ways[s] = number of vectors so far with total s
    let mut ways = vec![0usize; budget + 1];
    ways[0] = 1;
    for _ in 0..modes {
        let mut next = vec![0usize; budget + 1];
        for (s, &w) in ways.iter().enumerate() {
            if w == 0 {
                continue;
            }
            for k in 0..=cap.min(budget - s) {
                next[s + k] = next[s + k].saturating_add(w);
            }
        }
        ways = next;
    }
    ways.iter().fold(0usize, |a, &b| a.saturating_add(b))
}

impl TruncatedBasis {
    pub fn new(n_sites: usize, n_levels: usize, max_quanta: usize) -> Result<Self, OracleError> {
        let cap = n_levels.saturating_sub(1).min(max_quanta);
        let budget = max_quanta.min(n_sites * cap);
        let m = count_occupations(n_sites, cap, budget);
        let dim = m.saturating_mul(n_sites);
        if dim > MAX_BASIS_DIM || n_levels > u8::MAX as usize {
            return Err(OracleError::DimensionLimit { dim, limit: MAX_BASIS_DIM });
        }
        let mut occupations = Vec::with_capacity(m);
        let mut current = vec![0u8; n_sites];
        fn fill(pos: usize, left: usize, cap: usize, cur: &mut Vec<u8>, out: &mut Vec<Vec<u8>>) {
            if pos == cur.len() {
                out.push(cur.clone());
                return;
            }
            for k in 0..=cap.min(left) {
                cur[pos] = k as u8;
                fill(pos + 1, left - k, cap, cur, out);
            }
            cur[pos] = 0;
        }
        fill(0, budget, cap, &mut current, &mut occupations);
        let lookup = occupations.iter().enumerate().map(|(i, v)| (v.clone(), i)).collect();
        Ok(TruncatedBasis { n_sites, n_levels, max_quanta, occupations, lookup })
    }

    pub fn n_sites(&self) -> usize {
        self.n_sites
    }

    pub fn n_levels(&self) -> usize {
        self.n_levels
    }

    pub fn max_quanta(&self) -> usize {
        self.max_quanta
    }

    /// Number of vibrational configurations M.
    pub fn n_vib(&self) -> usize {
        self.occupations.len()
    }

    pub fn dim(&self) -> usize {
        self.n_sites * self.occupations.len()
    }

    pub fn occupations(&self) -> &[Vec<u8>] {
        &self.occupations
    }

    pub fn vib_rank(&self, occ: &[u8]) -> Option<usize> {
        self.lookup.get(occ).copied()
    }

    pub fn index(&self, site: usize, occ: &[u8]) -> Option<usize> {
        if site >= self.n_sites {
            return None;
        }
        self.vib_rank(occ).map(|r| site * self.n_vib() + r)
    }

    /// Inverse of [`index`](Self::index).
    pub fn state(&self, index: usize) -> (usize, &[u8]) {
        let m = self.n_vib();
        (index / m, &self.occupations[index % m])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn full_binary_dimension() {
        assert_eq!(TruncatedBasis::new(5, 2, usize::MAX).unwrap().dim(), 160);
    }

    #[test]
    fn capped_binary_dimension() {
        assert_eq!(TruncatedBasis::new(5, 2, 2).unwrap().dim(), 80);
    }

    #[test]
    fn index_round_trip() {
        let b = TruncatedBasis::new(3, 5, 4).unwrap();
        for i in 0..b.dim() {
            let (e, occ) = b.state(i);
            assert_eq!(b.index(e, occ), Some(i));
        }
    }

    #[test]
    fn dimension_guard() {
        assert!(matches!(TruncatedBasis::new(30, 5, 30), Err(OracleError::DimensionLimit { .. })));
    }
}
