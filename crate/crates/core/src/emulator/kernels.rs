//! In-place gate application on amplitude vectors indexed by bit patterns.

use num_complex::Complex64;

pub type C64 = Complex64;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);

/// Apply a 2×2 matrix (row-major) to the qubit at `bit`.
pub fn apply_1q(state: &mut [C64], bit: usize, m: &[C64; 4]) {
    let mask = 1usize << bit;
    let len = state.len();
    let mut base = 0;
    while base < len {
        for i in base..base + mask {
            let j = i | mask;
            let (a, b) = (state[i], state[j]);
            state[i] = m[0] * a + m[1] * b;
            state[j] = m[2] * a + m[3] * b;
        }
        base += 2 * mask;
    }
}

/// Multiply amplitudes with `bit` set by `phase`.
pub fn apply_phase(state: &mut [C64], bit: usize, phase: C64) {
    let mask = 1usize << bit;
    for (i, a) in state.iter_mut().enumerate() {
        if i & mask != 0 {
            *a *= phase;
        }
    }
}

/// Apply a 4×4 matrix; basis index is bit(b0) + 2·bit(b1).
pub fn apply_2q(state: &mut [C64], b0: usize, b1: usize, m: &[C64; 16]) {
    let (m0, m1) = (1usize << b0, 1usize << b1);
    for i in 0..state.len() {
        if i & (m0 | m1) != 0 {
            continue;
        }
        let idx = [i, i | m0, i | m1, i | m0 | m1];
        let v = [state[idx[0]], state[idx[1]], state[idx[2]], state[idx[3]]];
        for r in 0..4 {
            state[idx[r]] = m[4 * r] * v[0] + m[4 * r + 1] * v[1] + m[4 * r + 2] * v[2] + m[4 * r + 3] * v[3];
        }
    }
}

/// Scatter the low bits of `value` onto the positions in `bits`.
pub fn spread(value: usize, bits: &[usize]) -> usize {
    bits.iter().enumerate().fold(0, |acc, (k, &b)| acc | (((value >> k) & 1) << b))
}

/// Apply a 2^k × 2^k matrix on the listed bits (k = bits.len()).
#[cfg(test)]
pub fn apply_kq(state: &mut [C64], bits: &[usize], m: &[C64]) {
    let k = bits.len();
    let d = 1usize << k;
    debug_assert_eq!(m.len(), d * d);
    let mask = spread(d - 1, bits);
    let offsets: Vec<usize> = (0..d).map(|x| spread(x, bits)).collect();
    let mut buf = vec![ZERO; d];
    for i in 0..state.len() {
        if i & mask != 0 {
            continue;
        }
        for (x, &o) in offsets.iter().enumerate() {
            buf[x] = state[i | o];
        }
        for (r, &o) in offsets.iter().enumerate() {
            state[i | o] = (0..d).map(|c| m[r * d + c] * buf[c]).sum();
        }
    }
}

pub fn norm_sqr(state: &[C64]) -> f64 {
    state.iter().map(|a| a.norm_sqr()).sum()
}

pub fn to_array4(v: &[C64]) -> [C64; 4] {
    [v[0], v[1], v[2], v[3]]
}

pub fn to_array16(v: &[C64]) -> [C64; 16] {
    let mut out = [ZERO; 16];
    out.copy_from_slice(v);
    out
}
