//! Decay laws for retained shots.
//!
//! Over time steps t the retained count follows
//! s(t) = s0 (1 − a t^b) e^{−t/τ} + s_mixed (1 − e^{−t/τ});
//! across register sizes it falls as C e^{−r n_qubits}.

use crate::error::FitError;
use levenberg_marquardt::{LeastSquaresProblem, LevenbergMarquardt};
use nalgebra::{DVector, Dyn, OMatrix, Owned, Vector3, U3};

const MIN_DECAY_POINTS: usize = 10;
const MIN_SIZES: usize = 3;
const TAU_STARTS: [f64; 6] = [10.0, 20.0, 50.0, 100.0, 200.0, 500.0];
const A_STARTS: [f64; 3] = [0.01, 0.3, 0.7];
const B_STARTS: [f64; 3] = [0.75, 1.5, 2.5];
const B_MIN: f64 = 0.5;
const B_SPAN: f64 = 2.5;

#[derive(Clone, Debug, PartialEq)]
pub struct DecayFit {
    pub tau_steps: f64,
    /// τ in µs when an execution time per step was given.
    pub tau_us: Option<f64>,
    pub a: f64,
    pub b: f64,
    /// Step at which the power law hands over to the exponential, ⌈τ⌉.
    pub transition_step: usize,
    /// RMS of fit − data in counts.
    pub residual_rms: f64,
    pub max_residual: f64,
    pub converged: bool,
}

impl DecayFit {
    pub fn model(&self, s0: f64, s_mixed: f64, t: f64) -> f64 {
        decay_model(s0, s_mixed, self.tau_steps, self.a, self.b, t)
    }
}

fn decay_model(s0: f64, s_mixed: f64, tau: f64, a: f64, b: f64, t: f64) -> f64 {
    let e = (-t / tau).exp();
    s0 * (1.0 - a * t.powf(b)) * e + s_mixed * (1.0 - e)
}

fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

fn logit(y: f64) -> f64 {
    let y = y.clamp(1e-9, 1.0 - 1e-9);
    (y / (1.0 - y)).ln()
}

/// Least-squares problem in unconstrained coordinates
/// (ln τ, logit a, logit((b − 0.5)/2.5)) so the bounds on a and b hold.
#[derive(Clone)]
struct DecayProblem<'a> {
    counts: &'a [f64],
    s0: f64,
    s_mixed: f64,
    params: Vector3<f64>,
}

impl DecayProblem<'_> {
    fn physical(&self) -> (f64, f64, f64) {
        let p = &self.params;
        (p[0].exp(), sigmoid(p[1]), B_MIN + B_SPAN * sigmoid(p[2]))
    }
}

impl LeastSquaresProblem<f64, Dyn, U3> for DecayProblem<'_> {
    type ResidualStorage = Owned<f64, Dyn>;
    type JacobianStorage = Owned<f64, Dyn, U3>;
    type ParameterStorage = Owned<f64, U3>;

    fn set_params(&mut self, p: &Vector3<f64>) {
        self.params = *p;
    }

    fn params(&self) -> Vector3<f64> {
        self.params
    }

    fn residuals(&self) -> Option<DVector<f64>> {
        let (tau, a, b) = self.physical();
        let r = DVector::from_iterator(
            self.counts.len(),
            self.counts.iter().enumerate().map(|(t, &c)| (decay_model(self.s0, self.s_mixed, tau, a, b, t as f64) - c) / self.s0),
        );
        r.iter().all(|x| x.is_finite()).then_some(r)
    }

    fn jacobian(&self) -> Option<OMatrix<f64, Dyn, U3>> {
        let (tau, a, b) = self.physical();
        let sb = sigmoid(self.params[2]);
        let mut j = OMatrix::<f64, Dyn, U3>::zeros(self.counts.len());
        for t in 0..self.counts.len() {
            let tf = t as f64;
            let e = (-tf / tau).exp();
            let power = if t == 0 { 0.0 } else { tf.powf(b) };
            let log_t = if t == 0 { 0.0 } else { tf.ln() };
            j[(t, 0)] = (self.s0 * (1.0 - a * power) - self.s_mixed) * e * tf / tau / self.s0;
            j[(t, 1)] = -power * e * a * (1.0 - a);
            j[(t, 2)] = -a * power * log_t * e * B_SPAN * sb * (1.0 - sb);
        }
        j.iter().all(|x| x.is_finite()).then_some(j)
    }
}

/// Fit the decay law to retained counts per step (step 0 first).
///
/// Every combination of the starting values is refined and the lowest
/// residual wins; `converged` reports whether that refinement terminated
/// normally.
pub fn fit_shot_decay(counts: &[f64], s0: f64, s_mixed: f64, step_us: Option<f64>) -> Result<DecayFit, FitError> {
    if counts.len() < MIN_DECAY_POINTS {
        return Err(FitError::TooFewPoints { needed: MIN_DECAY_POINTS, got: counts.len() });
    }
    if let Some((index, &value)) = counts.iter().enumerate().find(|(_, c)| !(c.is_finite() && **c >= 0.0)) {
        return Err(FitError::NonPositive { index, value });
    }
    if !(s0 > 0.0) {
        return Err(FitError::NonPositive { index: 0, value: s0 });
    }
    let mut best: Option<(f64, DecayProblem, bool)> = None;
    for &tau in &TAU_STARTS {
        for &a in &A_STARTS {
            for &b in &B_STARTS {
                let start = Vector3::new(tau.ln(), logit(a), logit((b - B_MIN) / B_SPAN));
                let problem = DecayProblem { counts, s0, s_mixed, params: start };
                let (fitted, report) = LevenbergMarquardt::new().minimize(problem);
                let cost = report.objective_function;
                if cost.is_finite() && best.as_ref().is_none_or(|(c, _, _)| cost < *c) {
                    best = Some((cost, fitted, report.termination.was_successful()));
                }
            }
        }
    }
    let (_, fitted, converged) = best.ok_or(FitError::NotConverged { best_residual: f64::INFINITY, best_tau: f64::NAN })?;
    let (tau, a, b) = fitted.physical();
    let residuals: Vec<f64> = counts.iter().enumerate().map(|(t, &c)| decay_model(s0, s_mixed, tau, a, b, t as f64) - c).collect();
    let residual_rms = (residuals.iter().map(|r| r * r).sum::<f64>() / residuals.len() as f64).sqrt();
    Ok(DecayFit {
        tau_steps: tau,
        tau_us: step_us.map(|us| tau * us),
        a,
        b,
        transition_step: tau.ceil() as usize,
        residual_rms,
        max_residual: residuals.iter().fold(0.0, |m, r| m.max(r.abs())),
        converged,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct RetentionFit {
    pub prefactor: f64,
    /// Decay rate per qubit.
    pub rate: f64,
    /// RMS residual of ln s.
    pub log_residual_rms: f64,
}

impl RetentionFit {
    /// 1/r, the register size over which retention drops by e.
    pub fn decay_qubits(&self) -> f64 {
        1.0 / self.rate
    }
}

/// Log-linear least squares of s = C e^{−r n} over register sizes n.
pub fn fit_retention_vs_qubits(qubits: &[usize], values: &[f64]) -> Result<RetentionFit, FitError> {
    let n = qubits.len().min(values.len());
    if n < MIN_SIZES {
        return Err(FitError::TooFewPoints { needed: MIN_SIZES, got: n });
    }
    if let Some((index, &value)) = values.iter().enumerate().find(|(_, v)| !(**v > 0.0)) {
        return Err(FitError::NonPositive { index, value });
    }
    let x: Vec<f64> = qubits[..n].iter().map(|&q| q as f64).collect();
    let y: Vec<f64> = values[..n].iter().map(|v| v.ln()).collect();
    let mean_x = x.iter().sum::<f64>() / n as f64;
    let mean_y = y.iter().sum::<f64>() / n as f64;
    let sxx: f64 = x.iter().map(|xi| (xi - mean_x).powi(2)).sum();
    let sxy: f64 = x.iter().zip(&y).map(|(xi, yi)| (xi - mean_x) * (yi - mean_y)).sum();
    let slope = sxy / sxx;
    let intercept = mean_y - slope * mean_x;
    let log_residual_rms = (x.iter().zip(&y).map(|(xi, yi)| (intercept + slope * xi - yi).powi(2)).sum::<f64>() / n as f64).sqrt();
    Ok(RetentionFit { prefactor: intercept.exp(), rate: -slope, log_residual_rms })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use levenberg_marquardt::differentiate_numerically;

    #[test]
    fn analytic_jacobian_matches_numerical() {
        let counts: Vec<f64> = (0..30).map(|t| 900.0 * (-(t as f64) / 40.0).exp() + 50.0).collect();
        let mut problem = DecayProblem { counts: &counts, s0: 1000.0, s_mixed: 40.0, params: Vector3::new(3.5, -0.4, 0.3) };
        let numerical = differentiate_numerically(&mut problem).unwrap();
        let analytic = problem.jacobian().unwrap();
        assert_relative_eq!(numerical, analytic, epsilon = 1e-6);
    }

    #[test]
    fn recovers_pure_exponential() {
        let (s0, s_mixed, tau) = (10_000.0, 328.0, 37.0);
        let counts: Vec<f64> = (0..60).map(|t| decay_model(s0, s_mixed, tau, 0.0, 1.0, t as f64)).collect();
        let fit = fit_shot_decay(&counts, s0, s_mixed, Some(0.6)).unwrap();
        assert!((fit.tau_steps / tau - 1.0).abs() < 0.02, "{fit:?}");
        assert_relative_eq!(fit.tau_us.unwrap(), fit.tau_steps * 0.6);
        assert_eq!(fit.transition_step, fit.tau_steps.ceil() as usize);
    }

    #[test]
    fn recovers_power_law_onset() {
        let (s0, s_mixed) = (10_000.0, 100.0);
        let counts: Vec<f64> = (0..80).map(|t| decay_model(s0, s_mixed, 60.0, 2e-4, 1.8, t as f64)).collect();
        let fit = fit_shot_decay(&counts, s0, s_mixed, None).unwrap();
        assert!(fit.max_residual < 1.0, "{fit:?}");
        assert!((fit.tau_steps / 60.0 - 1.0).abs() < 0.05, "{fit:?}");
    }

    #[test]
    fn too_few_points_rejected() {
        assert_eq!(fit_shot_decay(&[1.0; 5], 1.0, 0.1, None), Err(FitError::TooFewPoints { needed: 10, got: 5 }));
    }

    #[test]
    fn retention_rate_from_per_qubit_survival() {
        let survival: f64 = 0.93;
        let sizes = [6, 8, 10, 12, 14];
        let values: Vec<f64> = sizes.iter().map(|&n| 0.8 * survival.powi(n as i32)).collect();
        let fit = fit_retention_vs_qubits(&sizes, &values).unwrap();
        assert!((fit.decay_qubits() / (-1.0 / survival.ln()) - 1.0).abs() < 0.05);
        assert_relative_eq!(fit.prefactor, 0.8, epsilon = 1e-12);
    }

    #[test]
    fn flat_retention_has_zero_rate() {
        let fit = fit_retention_vs_qubits(&[6, 8, 10], &[1.0, 1.0, 1.0]).unwrap();
        assert_eq!(fit.rate, 0.0);
        assert!(matches!(fit_retention_vs_qubits(&[6, 8, 10], &[1.0, 0.0, 1.0]), Err(FitError::NonPositive { index: 1, .. })));
    }
}
