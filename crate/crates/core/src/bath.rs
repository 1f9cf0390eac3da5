//! Lorentzian spectral density and the bath correlation function.

use crate::error::QuadratureError;
use crate::model::ModelSpec;
use crate::quadrature::integrate_with_breaks;
use crate::units::{Femtoseconds, Rate, Wavenumber, RAD_PER_FS_PER_WAVENUMBER};
use num_complex::Complex64;
use std::f64::consts::PI;

/// Single Lorentzian peak shared by all sites.
///
/// 𝒥(ω) = (g²/π)·(Γ/2) / ((ω − ω0)² + (Γ/2)²), with Γ the full width in cm⁻¹
/// corresponding to the damping rate γ. The correlation envelope is e^{−γt/2}.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SpectralDensity {
    pub peak: Wavenumber,
    pub coupling: Wavenumber,
    pub width: Rate,
}

/// Bath temperature for the correlation function.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Temperature {
    Zero,
    /// Inverse temperature β in cm (energies in cm⁻¹).
    Beta(f64),
}

impl SpectralDensity {
    pub fn from_spec(spec: &ModelSpec) -> Self {
        SpectralDensity { peak: spec.osc_frequency, coupling: spec.coupling(), width: spec.damping }
    }

    /// Half width at half maximum in cm⁻¹.
    pub fn half_width(&self) -> f64 {
        0.5 * self.width.as_wavenumber().0
    }

    /// 𝒥(ω) in cm⁻¹ for ω in cm⁻¹.
    pub fn eval(&self, omega: f64) -> f64 {
        let h = self.half_width();
        let g2 = self.coupling.0 * self.coupling.0;
        g2 / PI * h / ((omega - self.peak.0).powi(2) + h * h)
    }

    /// ∫₀^∞ 𝒥(ω) dω in closed form.
    pub fn total_weight(&self) -> f64 {
        let h = self.half_width();
        let g2 = self.coupling.0 * self.coupling.0;
        if h == 0.0 {
            return g2;
        }
        g2 / PI * (0.5 * PI + (self.peak.0 / h).atan())
    }
}

/// Relative tolerance for the correlation-function quadrature.
pub const CORRELATION_REL_TOL: f64 = 1e-9;

/// The frequency window [0, Ω] is integrated numerically; beyond Ω an
/// integration-by-parts series of the Lorentzian tail is added.
/// Ω − ω0 = max(`TAIL_WIDTHS`·Γ/2, `TAIL_PHASE`/τ) with τ = 2πc t.
const TAIL_WIDTHS: f64 = 400.0;
const TAIL_PHASE: f64 = 200.0;
const MAX_INTERVALS: usize = 20_000;

/// Bath correlation 𝒞(t) = ∫₀^∞ 𝒥(ω)[coth(βω/2) cos ωt − i sin ωt] dω, in cm⁻².
pub fn bath_correlation(t: Femtoseconds, sd: &SpectralDensity, temperature: Temperature) -> Result<Complex64, QuadratureError> {
    if t.0 < 0.0 {
        return Err(QuadratureError::Divergent(format!("negative time {} fs", t.0)));
    }
    let tau = t.0 * RAD_PER_FS_PER_WAVENUMBER;
    let w0 = sd.peak.0;
    let g2 = sd.coupling.0 * sd.coupling.0;
    let h = sd.half_width();
    let thermal = |w: f64| match temperature {
        Temperature::Zero => 1.0,
        Temperature::Beta(beta) => 1.0 / (0.5 * beta * w).tanh(),
    };

    if h == 0.0 {
        // delta-function density
        return Ok(Complex64::new(g2 * thermal(w0) * (w0 * tau).cos(), -g2 * (w0 * tau).sin()));
    }
    if let Temperature::Beta(beta) = temperature {
        if beta.is_finite() && sd.eval(0.0) > 0.0 {
            return Err(QuadratureError::Divergent(
                "coth(βω/2) ~ 2/(βω) with 𝒥(0) > 0 makes the real part diverge logarithmically at ω = 0".into(),
            ));
        }
    }

    let reach = if tau > 0.0 { (TAIL_WIDTHS * h).max(TAIL_PHASE / tau) } else { TAIL_WIDTHS * h };
    let top = w0 + reach;
    let integrand = |w: f64| {
        let j = sd.eval(w);
        Complex64::new(j * thermal(w) * (w * tau).cos(), -j * (w * tau).sin())
    };
    let mut breaks = vec![0.0];
    for k in [-20.0, -5.0, -1.0, 0.0, 1.0, 5.0, 20.0] {
        let x = w0 + k * h;
        if x > *breaks.last().unwrap() && x < top {
            breaks.push(x);
        }
    }
    breaks.push(top);
    let body = integrate_with_breaks(integrand, &breaks, 1e-14 * g2, CORRELATION_REL_TOL, MAX_INTERVALS)?;
    Ok(body.value + lorentzian_tail(sd, top, tau, thermal(top)))
}

/// ∫_Ω^∞ 𝒥(ω) e^{−iωτ} dω, with the slowly varying thermal factor frozen at Ω.
fn lorentzian_tail(sd: &SpectralDensity, top: f64, tau: f64, thermal: f64) -> Complex64 {
    let h = sd.half_width();
    let g2 = sd.coupling.0 * sd.coupling.0;
    let x = top - sd.peak.0;
    if tau == 0.0 {
        return Complex64::new(thermal * g2 / PI * (0.5 * PI - (x / h).atan()), 0.0);
    }
    // f = A/(x²+h²); derivatives of the Lorentzian at x
    let a = g2 / PI * h;
    let d = x * x + h * h;
    let f0 = a / d;
    let f1 = -2.0 * a * x / (d * d);
    let f2 = a * (6.0 * x * x - 2.0 * h * h) / (d * d * d);
    let f3 = a * 24.0 * x * (h * h - x * x) / (d * d * d * d);
    let it = Complex64::new(0.0, tau);
    let series = f0 / it + f1 / (it * it) + f2 / (it * it * it) + f3 / (it * it * it * it);
    let phase = Complex64::from_polar(1.0, -top * tau);
    let v = phase * series;
    Complex64::new(thermal * v.re, v.im)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sd(lifetime: f64) -> SpectralDensity {
        let spec = ModelSpec::reference(3).with_damping(Rate::per(Femtoseconds(lifetime)));
        SpectralDensity::from_spec(&spec)
    }

    #[test]
    fn zero_time_equals_total_weight() {
        let d = sd(500.0);
        let c = bath_correlation(Femtoseconds(0.0), &d, Temperature::Zero).unwrap();
        assert!(c.im.abs() < 1e-12);
        assert!((c.re - d.total_weight()).abs() / d.total_weight() < 1e-8);
    }

    #[test]
    fn finite_temperature_reports_divergence() {
        let d = sd(500.0);
        let r = bath_correlation(Femtoseconds(10.0), &d, Temperature::Beta(1.0 / 200.0));
        assert!(matches!(r, Err(QuadratureError::Divergent(_))));
    }

    #[test]
    fn undamped_limit_is_cosine() {
        let spec = ModelSpec::reference(3);
        let d = SpectralDensity::from_spec(&spec);
        let c = bath_correlation(Femtoseconds(11.12), &d, Temperature::Zero).unwrap();
        let g2 = spec.coupling().0.powi(2);
        assert!((c.re / g2 + 1.0).abs() < 1e-3);
    }
}
