//! The zero-temperature correlation of a Lorentzian density restricted to
//! ω > 0 has a closed form: the full-line transform g² e^{−iω0τ − hτ} minus
//! the ω < 0 part, which reduces to exponential integrals E1 of complex
//! argument.

use num_complex::Complex64;
use vibronic::bath::{bath_correlation, SpectralDensity, Temperature};
use vibronic::model::ModelSpec;
use vibronic::units::{Femtoseconds, Rate, RAD_PER_FS_PER_WAVENUMBER};

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

fn e1(z: Complex64) -> Complex64 {
    if z.norm() <= 1.0 {
        let mut sum = Complex64::new(0.0, 0.0);
        let mut term = Complex64::new(1.0, 0.0);
        for k in 1..200 {
            term *= -z / k as f64;
            let add = term / k as f64;
            sum += add;
            if add.norm() < 1e-18 * sum.norm().max(1e-300) {
                break;
            }
        }
        return -EULER_GAMMA - z.ln() - sum;
    }
    // modified Lentz on e^{z} E1(z) = 1/(z+1− 1²/(z+3− 2²/(z+5− …)))
    let mut b = z + 1.0;
    let mut c = Complex64::new(1e300, 0.0);
    let mut d = Complex64::new(1.0, 0.0) / b;
    let mut h = d;
    for i in 1..100_000u64 {
        let an = -((i * i) as f64);
        b += 2.0;
        d = Complex64::new(1.0, 0.0) / (d * an + b);
        c = b + an / c;
        let del = c * d;
        h *= del;
        if (del - 1.0).norm() < 1e-16 {
            break;
        }
    }
    h * (-z).exp()
}

/// ∫_{−∞}^0 e^{−iωτ}/(ω − a) dω for τ > 0.
fn negative_half(a: Complex64, tau: f64) -> Complex64 {
    let z = Complex64::new(0.0, -tau) * a;
    -z.exp() * e1(z)
}

fn closed_form(sd: &SpectralDensity, t: f64) -> Complex64 {
    let tau = t * RAD_PER_FS_PER_WAVENUMBER;
    let (w0, h, g2) = (sd.peak.0, sd.half_width(), sd.coupling.0 * sd.coupling.0);
    let full = g2 * Complex64::new(-h * tau, -w0 * tau).exp();
    let upper = Complex64::new(w0, h);
    let lower = Complex64::new(w0, -h);
    let prefactor = g2 / (2.0 * std::f64::consts::PI) / Complex64::new(0.0, 1.0);
    full - prefactor * (negative_half(upper, tau) - negative_half(lower, tau))
}

#[test]
fn exponential_integral_reference_values() {
    // E1(1) and E1(i) from tables
    assert!((e1(Complex64::new(1.0, 0.0)) - Complex64::new(0.219_383_934_395_520_3, 0.0)).norm() < 1e-13);
    let at_i = e1(Complex64::new(0.0, 1.0));
    assert!((at_i - Complex64::new(-0.337_403_922_900_968_1, -0.624_713_256_427_713_6)).norm() < 1e-12);
    let at_2 = e1(Complex64::new(2.0, 0.0));
    assert!((at_2.re - 0.048_900_510_708_061_1).abs() < 1e-13);
}

#[test]
fn lorentzian_correlation_matches_closed_form() {
    for lifetime in [500.0, 112.5, 50.0] {
        let spec = ModelSpec::reference(5).with_damping(Rate::per(Femtoseconds(lifetime)));
        let sd = SpectralDensity::from_spec(&spec);
        let horizon = 5.0 * lifetime;
        for k in 1..=40 {
            let t = horizon * k as f64 / 40.0;
            let numeric = bath_correlation(Femtoseconds(t), &sd, Temperature::Zero).unwrap();
            let exact = closed_form(&sd, t);
            let rel = (numeric - exact).norm() / exact.norm();
            assert!(rel < 1e-4, "lifetime {lifetime} fs, t {t} fs: relative deviation {rel:.3e}");
        }
    }
}

#[test]
fn envelope_decays_at_half_the_damping_rate() {
    let lifetime = 112.5;
    let spec = ModelSpec::reference(5).with_damping(Rate::per(Femtoseconds(lifetime)));
    let sd = SpectralDensity::from_spec(&spec);
    let c0 = bath_correlation(Femtoseconds(0.0), &sd, Temperature::Zero).unwrap().norm();
    for t in [50.0, 150.0, 400.0] {
        let ratio = bath_correlation(Femtoseconds(t), &sd, Temperature::Zero).unwrap().norm() / c0;
        let envelope = (-0.5 * t / lifetime).exp();
        assert!((ratio / envelope - 1.0).abs() < 2e-2, "t {t}: {ratio} vs {envelope}");
    }
}

#[test]
fn real_part_oscillates_with_the_vibrational_period() {
    // ω0 = 1500 cm⁻¹ gives a period of 1/(c ω0) ≈ 22.2 fs
    let spec = ModelSpec::reference(5).with_damping(Rate::per(Femtoseconds(500.0)));
    let sd = SpectralDensity::from_spec(&spec);
    let times: Vec<f64> = (0..=1200).map(|k| k as f64 * 0.05).collect();
    let re: Vec<f64> = times.iter().map(|&t| bath_correlation(Femtoseconds(t), &sd, Temperature::Zero).unwrap().re).collect();
    let maxima: Vec<f64> = (1..re.len() - 1).filter(|&i| re[i] > re[i - 1] && re[i] >= re[i + 1]).map(|i| times[i]).collect();
    assert!(maxima.len() >= 2);
    let period = (maxima.last().unwrap() - maxima[0]) / (maxima.len() - 1) as f64;
    assert!((period - 22.0).abs() < 0.5, "period {period}");
}
