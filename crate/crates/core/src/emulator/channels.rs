//! Kraus sets for the noise channels and their density-matrix superoperators.

use super::kernels::{C64, ONE, ZERO};
use crate::error::EmulatorError;

/// Completeness tolerance enforced before a channel is used.
pub const KRAUS_TOLERANCE: f64 = 1e-10;

pub type Kraus2 = [C64; 4];

pub fn amplitude_damping(p: f64) -> Vec<Kraus2> {
    vec![[ONE, ZERO, ZERO, C64::new((1.0 - p).sqrt(), 0.0)], [ZERO, C64::new(p.sqrt(), 0.0), ZERO, ZERO]]
}

pub fn phase_flip(p: f64) -> Vec<Kraus2> {
    let a = C64::new((1.0 - p).sqrt(), 0.0);
    let b = C64::new(p.sqrt(), 0.0);
    vec![[a, ZERO, ZERO, a], [b, ZERO, ZERO, -b]]
}

pub fn paulis() -> [Kraus2; 4] {
    let i = C64::new(0.0, 1.0);
    [[ONE, ZERO, ZERO, ONE], [ZERO, ONE, ONE, ZERO], [ZERO, -i, i, ZERO], [ONE, ZERO, ZERO, -ONE]]
}

/// Kraus operators of the k-qubit depolarizing channel with error probability
/// p spread evenly over the 4^k − 1 non-identity Pauli strings.
pub fn depolarizing(k: usize, p: f64) -> Vec<Vec<C64>> {
    let d = 1usize << k;
    let strings = 1usize << (2 * k);
    let mut out = Vec::with_capacity(strings);
    for s in 0..strings {
        let weight = if s == 0 { 1.0 - p } else { p / (strings - 1) as f64 };
        let mut m = vec![ONE];
        let mut dim = 1;
        for q in 0..k {
            // qubit q is bit q of the matrix index, so it is the outer factor for larger q
            let pauli = paulis()[(s >> (2 * q)) & 3];
            let mut next = vec![ZERO; dim * 2 * dim * 2];
            for r1 in 0..2 {
                for c1 in 0..2 {
                    for r0 in 0..dim {
                        for c0 in 0..dim {
                            next[(r1 * dim + r0) * 2 * dim + c1 * dim + c0] = pauli[r1 * 2 + c1] * m[r0 * dim + c0];
                        }
                    }
                }
            }
            m = next;
            dim *= 2;
        }
        debug_assert_eq!(dim, d);
        out.push(m.into_iter().map(|v| v * weight.sqrt()).collect());
    }
    out
}

/// max |Σ K†K − I| over entries.
pub fn completeness_defect(kraus: &[Vec<C64>]) -> f64 {
    let d = (kraus[0].len() as f64).sqrt() as usize;
    let mut worst = 0.0f64;
    for r in 0..d {
        for c in 0..d {
            let mut acc = ZERO;
            for k in kraus {
                for x in 0..d {
                    acc += k[x * d + r].conj() * k[x * d + c];
                }
            }
            let target = if r == c { ONE } else { ZERO };
            worst = worst.max((acc - target).norm());
        }
    }
    worst
}

pub fn check_complete(name: &str, kraus: &[Vec<C64>]) -> Result<(), EmulatorError> {
    let defect = completeness_defect(kraus);
    if !(defect <= KRAUS_TOLERANCE) {
        return Err(EmulatorError::NotTracePreserving { channel: name.to_string(), defect });
    }
    Ok(())
}

/// Superoperator Σ K ⊗ K̄ on (row bit, column bit): index r + 2c.
pub fn superoperator_1q(kraus: &[Kraus2]) -> [C64; 16] {
    let mut s = [ZERO; 16];
    for k in kraus {
        for r2 in 0..2 {
            for c2 in 0..2 {
                for r in 0..2 {
                    for c in 0..2 {
                        s[(r2 + 2 * c2) * 4 + (r + 2 * c)] += k[r2 * 2 + r] * k[c2 * 2 + c].conj();
                    }
                }
            }
        }
    }
    s
}

/// Compose superoperators: first `a`, then `b`.
pub fn compose16(a: &[C64; 16], b: &[C64; 16]) -> [C64; 16] {
    let mut out = [ZERO; 16];
    for r in 0..4 {
        for c in 0..4 {
            out[r * 4 + c] = (0..4).map(|k| b[r * 4 + k] * a[k * 4 + c]).sum();
        }
    }
    out
}

/// Depolarizing probability equivalent to applying `p` independently `times` times.
pub fn repeat_depolarizing(k: usize, p: f64, times: usize) -> f64 {
    let d2 = (1usize << (2 * k)) as f64;
    let lambda = p * d2 / (d2 - 1.0);
    let total = 1.0 - (1.0 - lambda).powi(times as i32);
    total * (d2 - 1.0) / d2
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    proptest! {
        #[test]
        fn kraus_sets_are_complete(p in 0.0f64..=1.0) {
            let ad: Vec<Vec<C64>> = amplitude_damping(p).iter().map(|k| k.to_vec()).collect();
            prop_assert!(completeness_defect(&ad) < 1e-12);
            let pf: Vec<Vec<C64>> = phase_flip(p).iter().map(|k| k.to_vec()).collect();
            prop_assert!(completeness_defect(&pf) < 1e-12);
            prop_assert!(completeness_defect(&depolarizing(1, p)) < 1e-12);
            prop_assert!(completeness_defect(&depolarizing(2, p)) < 1e-12);
        }
    }

    #[test]
    fn repeated_depolarizing_composes() {
        // two rounds of λ = 0.1 leave 0.81 of the state untouched
        let p = 0.1 * 3.0 / 4.0;
        let twice = repeat_depolarizing(1, p, 2);
        assert!((twice * 4.0 / 3.0 - 0.19).abs() < 1e-12);
    }
}
