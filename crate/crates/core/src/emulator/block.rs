//! State vector stored as blocks keyed by the site-qubit pattern.
//!
//! Electron-conserving circuits keep only a few site patterns populated, so
//! the state is a sparse map from site bits to dense oscillator-register
//! vectors. Gates on site qubits mix whole blocks; gates on oscillator qubits
//! act inside each block.

use super::channels::paulis;
use super::kernels::{apply_1q, apply_2q, apply_phase, norm_sqr, C64, ONE, ZERO};
use super::program::{Damping, Diagonal, Op, Program, Relaxation};
use rand::Rng;
use std::collections::BTreeMap;

#[derive(Clone, Debug, PartialEq)]
pub struct BlockState {
    n_sites: usize,
    n_osc: usize,
    blocks: BTreeMap<u64, Vec<C64>>,
    /// Squared norm; kept instead of renormalizing after every projection.
    norm_sq: f64,
}

/// Visit every amplitude with the product of its per-byte table entries.
fn for_each_factor<T: Copy + std::ops::Mul<Output = T>>(v: &mut [C64], tables: &[[T; 256]], mut f: impl FnMut(&mut C64, T)) {
    let (low, high) = tables.split_first().expect("at least one table");
    for (h, chunk) in v.chunks_mut(256).enumerate() {
        let mut hi: Option<T> = None;
        for (c, t) in high.iter().enumerate() {
            let e = t[(h >> (8 * c)) & 0xff];
            hi = Some(hi.map_or(e, |x| x * e));
        }
        match hi {
            Some(hi) => chunk.iter_mut().zip(low).for_each(|(a, &l)| f(a, l * hi)),
            None => chunk.iter_mut().zip(low).for_each(|(a, &l)| f(a, l)),
        }
    }
}

fn is_one(z: C64) -> bool {
    z == ONE
}

impl BlockState {
    /// Computational basis state; bit q of `bits` is logical qubit q.
    pub fn basis(n_sites: usize, n_osc: usize, bits: u64) -> Self {
        let key = bits & ((1u64 << n_sites) - 1);
        let osc = (bits >> n_sites) as usize;
        let mut v = vec![ZERO; 1 << n_osc];
        v[osc] = ONE;
        BlockState { n_sites, n_osc, blocks: BTreeMap::from([(key, v)]), norm_sq: 1.0 }
    }

    /// Electron on site 0, oscillators in their ground state.
    pub fn donor(n_sites: usize, n_osc: usize) -> Self {
        BlockState::basis(n_sites, n_osc, 1)
    }

    pub fn n_sites(&self) -> usize {
        self.n_sites
    }

    pub fn n_qubits(&self) -> usize {
        self.n_sites + self.n_osc
    }

    pub fn n_blocks(&self) -> usize {
        self.blocks.len()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.norm_sq
    }

    /// Recompute the squared norm from the amplitudes.
    pub fn measured_norm_sqr(&self) -> f64 {
        self.blocks.values().map(|v| norm_sqr(v)).sum()
    }

    pub fn normalize(&mut self) {
        let scale = 1.0 / self.measured_norm_sqr().sqrt();
        for v in self.blocks.values_mut() {
            v.iter_mut().for_each(|a| *a *= scale);
        }
        self.norm_sq = 1.0;
    }

    /// Normalized site occupations ⟨n_q⟩.
    pub fn site_populations(&self) -> Vec<f64> {
        let mut pops = vec![0.0; self.n_sites];
        for (&k, v) in &self.blocks {
            let w = norm_sqr(v);
            for (q, p) in pops.iter_mut().enumerate() {
                if (k >> q) & 1 == 1 {
                    *p += w;
                }
            }
        }
        pops.iter_mut().for_each(|p| *p /= self.norm_sq);
        pops
    }

    /// Dense amplitudes over all qubits (index bit q = logical qubit q).
    pub fn to_dense(&self) -> Vec<C64> {
        let mut out = vec![ZERO; 1 << self.n_qubits()];
        let scale = 1.0 / self.norm_sq.sqrt();
        for (&k, v) in &self.blocks {
            for (o, a) in v.iter().enumerate() {
                out[(k as usize) | (o << self.n_sites)] = a * scale;
            }
        }
        out
    }

    /// Bitstring distribution (normalized) over all qubits.
    pub fn probabilities(&self) -> Vec<f64> {
        self.to_dense().iter().map(|a| a.norm_sqr()).collect()
    }

    fn zero_block(&self) -> Vec<C64> {
        vec![ZERO; 1 << self.n_osc]
    }

    pub(crate) fn apply_one(&mut self, q: usize, m: &[C64; 4]) {
        let diagonal = m[1] == ZERO && m[2] == ZERO;
        if q >= self.n_sites {
            let b = q - self.n_sites;
            for v in self.blocks.values_mut() {
                if diagonal && is_one(m[0]) {
                    if !is_one(m[3]) {
                        apply_phase(v, b, m[3]);
                    }
                } else {
                    apply_1q(v, b, m);
                }
            }
            return;
        }
        let bit = 1u64 << q;
        if diagonal {
            for (&k, v) in self.blocks.iter_mut() {
                let f = if k & bit != 0 { m[3] } else { m[0] };
                if !is_one(f) {
                    v.iter_mut().for_each(|a| *a *= f);
                }
            }
            return;
        }
        let lows: Vec<u64> = self.blocks.keys().map(|k| k & !bit).collect::<std::collections::BTreeSet<_>>().into_iter().collect();
        for k0 in lows {
            let v0 = self.blocks.remove(&k0);
            let v1 = self.blocks.remove(&(k0 | bit));
            for (key, (c0, c1)) in [(k0, (m[0], m[1])), (k0 | bit, (m[2], m[3]))] {
                let use0 = v0.is_some() && c0 != ZERO;
                let use1 = v1.is_some() && c1 != ZERO;
                if !use0 && !use1 {
                    continue;
                }
                let mut out = self.zero_block();
                if use0 {
                    out.iter_mut().zip(v0.as_ref().unwrap()).for_each(|(o, a)| *o += c0 * a);
                }
                if use1 {
                    out.iter_mut().zip(v1.as_ref().unwrap()).for_each(|(o, a)| *o += c1 * a);
                }
                self.blocks.insert(key, out);
            }
        }
    }

    pub(crate) fn apply_two(&mut self, q: [usize; 2], m: &[C64; 16]) {
        let ns = self.n_sites;
        match (q[0] >= ns, q[1] >= ns) {
            (true, true) => {
                for v in self.blocks.values_mut() {
                    apply_2q(v, q[0] - ns, q[1] - ns, m);
                }
            }
            (false, false) => self.mix_site_pair(q, m),
            _ => self.apply_site_osc(q, m),
        }
    }

    fn mix_site_pair(&mut self, q: [usize; 2], m: &[C64; 16]) {
        let (b0, b1) = (1u64 << q[0], 1u64 << q[1]);
        let keys = [0, b0, b1, b0 | b1];
        let lows: std::collections::BTreeSet<u64> = self.blocks.keys().map(|k| k & !(b0 | b1)).collect();
        for base in lows {
            let mut vs: [Vec<C64>; 4] = keys.map(|o| self.blocks.remove(&(base | o)).unwrap_or_default());
            let cols: Vec<usize> = (0..4).filter(|&c| !vs[c].is_empty()).collect();
            // rows that differ from the identity on the populated inputs
            let rows: Vec<usize> = (0..4).filter(|&r| cols.iter().any(|&c| m[4 * r + c] != if r == c { ONE } else { ZERO })).collect();
            let closed = |r: usize, pair: [usize; 2]| cols.iter().all(|&c| pair.contains(&c) || m[4 * r + c] == ZERO);
            if let [r0, r1] = rows[..] {
                if !vs[r0].is_empty() && !vs[r1].is_empty() && closed(r0, [r0, r1]) && closed(r1, [r0, r1]) {
                    let (c00, c01, c10, c11) = (m[5 * r0], m[4 * r0 + r1], m[4 * r1 + r0], m[5 * r1]);
                    let (lo, hi) = vs.split_at_mut(r1);
                    for (x, y) in lo[r0].iter_mut().zip(hi[0].iter_mut()) {
                        let (a, b) = (*x, *y);
                        *x = c00 * a + c01 * b;
                        *y = c10 * a + c11 * b;
                    }
                    self.reinsert(base, &keys, vs);
                    continue;
                }
            }
            let mut outs: [Vec<C64>; 4] = Default::default();
            for &r in &rows {
                let terms: Vec<usize> = cols.iter().copied().filter(|&c| m[4 * r + c] != ZERO).collect();
                if terms.is_empty() {
                    continue;
                }
                let mut out = vs[terms[0]].iter().map(|a| m[4 * r + terms[0]] * a).collect::<Vec<_>>();
                for &c in &terms[1..] {
                    out.iter_mut().zip(&vs[c]).for_each(|(x, a)| *x += m[4 * r + c] * a);
                }
                outs[r] = out;
            }
            for &r in &rows {
                vs[r] = std::mem::take(&mut outs[r]);
            }
            self.reinsert(base, &keys, vs);
        }
    }

    fn reinsert(&mut self, base: u64, keys: &[u64; 4], vs: [Vec<C64>; 4]) {
        for (o, v) in keys.iter().zip(vs) {
            if !v.is_empty() {
                self.blocks.insert(base | o, v);
            }
        }
    }

    fn apply_site_osc(&mut self, q: [usize; 2], m: &[C64; 16]) {
        let site_first = q[0] < self.n_sites;
        let (s, o) = if site_first { (q[0], q[1] - self.n_sites) } else { (q[1], q[0] - self.n_sites) };
        let idx = |sb: usize, ob: usize| if site_first { sb + 2 * ob } else { ob + 2 * sb };
        let at = |r: usize, c: usize| m[4 * r + c];
        let block_diagonal = (0..2).all(|o1| (0..2).all(|o2| at(idx(0, o1), idx(1, o2)) == ZERO && at(idx(1, o1), idx(0, o2)) == ZERO));
        if block_diagonal {
            for (&k, v) in self.blocks.iter_mut() {
                let sb = ((k >> s) & 1) as usize;
                let sub = [at(idx(sb, 0), idx(sb, 0)), at(idx(sb, 0), idx(sb, 1)), at(idx(sb, 1), idx(sb, 0)), at(idx(sb, 1), idx(sb, 1))];
                if sub == [ONE, ZERO, ZERO, ONE] {
                    continue;
                }
                apply_1q(v, o, &sub);
            }
            return;
        }
        let bit = 1u64 << s;
        let lows: std::collections::BTreeSet<u64> = self.blocks.keys().map(|k| k & !bit).collect();
        let omask = 1usize << o;
        for k0 in lows {
            let mut v0 = self.blocks.remove(&k0).unwrap_or_else(|| self.zero_block());
            let mut v1 = self.blocks.remove(&(k0 | bit)).unwrap_or_else(|| self.zero_block());
            for i in 0..v0.len() {
                if i & omask != 0 {
                    continue;
                }
                let j = i | omask;
                let a = [v0[i], v0[j], v1[i], v1[j]];
                let src = [(0, 0), (0, 1), (1, 0), (1, 1)];
                let mut out = [ZERO; 4];
                for (r, &(sr, or)) in src.iter().enumerate() {
                    out[r] = src.iter().enumerate().map(|(c, &(sc, oc))| at(idx(sr, or), idx(sc, oc)) * a[c]).sum();
                }
                v0[i] = out[0];
                v0[j] = out[1];
                v1[i] = out[2];
                v1[j] = out[3];
            }
            for (key, v) in [(k0, v0), (k0 | bit, v1)] {
                if v.iter().any(|a| *a != ZERO) {
                    self.blocks.insert(key, v);
                }
            }
        }
    }

    /// Apply Pauli 1 = X, 2 = Y, 3 = Z on qubit q.
    pub(crate) fn apply_pauli(&mut self, q: usize, which: usize) {
        if which == 0 {
            return;
        }
        if q >= self.n_sites {
            let b = q - self.n_sites;
            for v in self.blocks.values_mut() {
                if which == 3 {
                    apply_phase(v, b, -ONE);
                } else {
                    apply_1q(v, b, &paulis()[which]);
                }
            }
            return;
        }
        let bit = 1u64 << q;
        if which == 3 {
            for (&k, v) in self.blocks.iter_mut() {
                if k & bit != 0 {
                    v.iter_mut().for_each(|a| *a = -*a);
                }
            }
            return;
        }
        let i = C64::new(0.0, 1.0);
        let old = std::mem::take(&mut self.blocks);
        for (k, mut v) in old {
            if which == 2 {
                // Y|0⟩ = i|1⟩, Y|1⟩ = −i|0⟩
                let f = if k & bit == 0 { i } else { -i };
                v.iter_mut().for_each(|a| *a *= f);
            }
            self.blocks.insert(k ^ bit, v);
        }
    }

    /// Draw a bitstring from the Born distribution without collapsing.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> u64 {
        let target = rng.random::<f64>() * self.norm_sq;
        let mut acc = 0.0;
        let mut last = 0u64;
        for (&k, v) in &self.blocks {
            for (o, a) in v.iter().enumerate() {
                let w = a.norm_sqr();
                if w == 0.0 {
                    continue;
                }
                acc += w;
                last = k | ((o as u64) << self.n_sites);
                if acc > target {
                    return last;
                }
            }
        }
        last
    }

    /// Apply a randomly chosen non-identity Pauli string with probability p.
    fn depolarize<R: Rng + ?Sized>(&mut self, qubits: &[usize], p: f64, rng: &mut R) {
        if rng.random::<f64>() >= p {
            return;
        }
        let strings = 1usize << (2 * qubits.len());
        let s = rng.random_range(1..strings);
        for (j, &q) in qubits.iter().enumerate() {
            self.apply_pauli(q, (s >> (2 * j)) & 3);
        }
    }

    fn apply_diagonal(&mut self, d: &Diagonal) {
        for (&k, v) in self.blocks.iter_mut() {
            let fs: C64 = d.site.iter().map(|&(bit, d0, d1)| if k & bit != 0 { d1 } else { d0 }).product();
            if d.osc_tables.is_empty() {
                if !is_one(fs) {
                    v.iter_mut().for_each(|a| *a *= fs);
                }
                continue;
            }
            for_each_factor(v, &d.osc_tables, |a, f| *a *= fs * f);
        }
    }

    /// Product of the per-byte table entries for oscillator index `o`.
    fn lookup(tables: &[[f64; 256]], o: usize) -> f64 {
        tables.iter().enumerate().map(|(c, t)| t[(o >> (8 * c)) & 0xff]).product()
    }

    fn site_factor(site: &[(u64, f64)], k: u64, root: bool) -> f64 {
        site.iter().filter(|(bit, _)| k & bit != 0).map(|&(_, f)| if root { f.sqrt() } else { f }).product()
    }

    /// Sample one Kraus branch of joint amplitude damping and phase flips.
    ///
    /// The no-jump branch Π K0 is applied first; its squared norm is the
    /// branch probability. Otherwise a basis state x is drawn with weight
    /// |ψ_x|²(1 − Π_{q∈x}(1 − p_q)) and a nonempty set of its excited qubits
    /// decays.
    fn relax<R: Rng + ?Sized>(&mut self, damping: &Damping, rng: &mut R) {
        for c in &damping.channels {
            if c.p_phase > 0.0 && rng.random::<f64>() < c.p_phase {
                self.apply_pauli(c.qubit, 3);
            }
        }
        if !damping.has_damping() {
            return;
        }
        let before = self.norm_sq;
        let mut after = 0.0;
        for (&k, v) in self.blocks.iter_mut() {
            let fs = Self::site_factor(&damping.site_keep, k, true);
            if damping.osc_sqrt_keep.is_empty() {
                if fs != 1.0 {
                    v.iter_mut().for_each(|a| *a *= fs);
                }
                after += norm_sqr(v);
                continue;
            }
            for_each_factor(v, &damping.osc_sqrt_keep, |a, f| {
                *a *= fs * f;
                after += a.norm_sqr();
            });
        }
        if rng.random::<f64>() * before < after {
            self.norm_sq = after;
            return;
        }
        // |ψ_x|² = |ψ0_x|² / keep(x), so the jump weight is |ψ0_x|²(1/keep(x) − 1).
        let weight = |k: u64, o: usize, a: C64| {
            let keep = Self::site_factor(&damping.site_keep, k, false) * Self::lookup(&damping.osc_keep, o);
            a.norm_sqr() * (1.0 / keep - 1.0)
        };
        let total: f64 = self.blocks.iter().flat_map(|(&k, v)| v.iter().enumerate().map(move |(o, &a)| (k, o, a))).map(|(k, o, a)| weight(k, o, a)).sum();
        if total <= 0.0 {
            self.norm_sq = after;
            return;
        }
        let target = rng.random::<f64>() * total;
        let mut acc = 0.0;
        let mut x = 0u64;
        'find: for (&k, v) in &self.blocks {
            for (o, &a) in v.iter().enumerate() {
                let w = weight(k, o, a);
                if w > 0.0 {
                    x = k | ((o as u64) << self.n_sites);
                    acc += w;
                    if acc > target {
                        break 'find;
                    }
                }
            }
        }
        let candidates: Vec<&Relaxation> = damping.channels.iter().filter(|c| c.p_amp > 0.0 && (x >> c.qubit) & 1 == 1).collect();
        let jumped = loop {
            let set: Vec<usize> = candidates.iter().filter(|c| rng.random::<f64>() < c.p_amp).map(|c| c.qubit).collect();
            if !set.is_empty() {
                break set;
            }
        };
        for q in jumped {
            self.lower(q);
        }
        self.norm_sq = self.measured_norm_sqr();
        if self.norm_sq < 1e-200 {
            self.normalize();
        }
    }

    /// Apply |0⟩⟨1| on qubit q (unnormalized jump).
    fn lower(&mut self, q: usize) {
        if q >= self.n_sites {
            let m = [ZERO, ONE, ZERO, ZERO];
            for v in self.blocks.values_mut() {
                apply_1q(v, q - self.n_sites, &m);
            }
            return;
        }
        let bit = 1u64 << q;
        let old = std::mem::take(&mut self.blocks);
        for (k, v) in old {
            if k & bit != 0 {
                self.blocks.insert(k ^ bit, v);
            }
        }
    }

    /// Run one compiled step. Noise operations draw from `rng`.
    pub(crate) fn run<R: Rng + ?Sized>(&mut self, program: &Program, rng: &mut R) {
        for op in &program.ops {
            match op {
                Op::One { qubit, matrix } => self.apply_one(*qubit, matrix),
                Op::Two { qubits, matrix } => self.apply_two(*qubits, matrix),
                Op::Depolarize { qubits, p } => self.depolarize(qubits, *p, rng),
                Op::Diagonal(d) => self.apply_diagonal(d),
                Op::Relax(damping) => self.relax(damping, rng),
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::emulator::kernels::apply_kq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn dense_one(state: &mut [C64], q: usize, m: &[C64; 4]) {
        apply_1q(state, q, m);
    }

    fn random_matrix(seed: u64, d: usize) -> Vec<C64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..d * d).map(|_| C64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5)).collect()
    }

    #[test]
    fn block_gates_match_dense_kernels() {
        // 3 sites + 2 oscillator qubits; arbitrary (non-unitary) matrices exercise every path
        let mut blocks = BlockState::basis(3, 2, 0b01_010);
        let mut dense = blocks.to_dense();
        let m1 = random_matrix(1, 2);
        let m1 = [m1[0], m1[1], m1[2], m1[3]];
        let cases: Vec<[usize; 2]> = vec![[0, 1], [2, 0], [1, 3], [4, 2], [3, 4]];
        blocks.apply_one(1, &m1);
        dense_one(&mut dense, 1, &m1);
        blocks.apply_one(4, &m1);
        dense_one(&mut dense, 4, &m1);
        for (i, q) in cases.into_iter().enumerate() {
            let m = random_matrix(10 + i as u64, 4);
            let arr: [C64; 16] = m.clone().try_into().unwrap();
            blocks.apply_two(q, &arr);
            apply_kq(&mut dense, &q, &m);
        }
        let scale = blocks.norm_sq.sqrt();
        let got = blocks.to_dense();
        for (a, b) in got.iter().zip(&dense) {
            assert!((a * scale - b).norm() < 1e-12);
        }
    }

    #[test]
    fn pauli_y_on_site_matches_dense() {
        let mut blocks = BlockState::basis(2, 1, 0b101);
        let mut dense = blocks.to_dense();
        blocks.apply_pauli(1, 2);
        blocks.apply_pauli(0, 2);
        apply_1q(&mut dense, 1, &paulis()[2]);
        apply_1q(&mut dense, 0, &paulis()[2]);
        assert!(blocks.to_dense().iter().zip(&dense).all(|(a, b)| (a - b).norm() < 1e-15));
    }

    #[test]
    fn sampling_follows_born_rule() {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let mut s = BlockState::basis(1, 1, 0b01);
        s.apply_one(1, &[C64::new(h, 0.0), C64::new(h, 0.0), C64::new(h, 0.0), C64::new(-h, 0.0)]);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let ones = (0..20000).filter(|_| s.sample(&mut rng) == 0b11).count();
        assert!((ones as f64 / 20000.0 - 0.5).abs() < 0.015);
    }
}
