//! Observables on population series: transfer probability, simulation error,
//! driving-force sweeps and damping-rate extraction.

mod engine;
mod gamma;
mod spectrum;
pub mod svg;

pub use engine::{Engine, EngineKind, EngineRun, NoiseSource};
pub use gamma::{default_gamma_grid, extract_gamma_qc, gamma_point_errors, GammaScan, DEFAULT_GAMMA_POINTS};
pub use spectrum::{driving_grid, sweep_driving_force, transfer_at, Peak, TransferSpectrum, DEFAULT_DRIVING_STEP, PEAK_PROMINENCE_FRACTION};

use crate::error::AnalysisError;
use crate::series::PopulationSeries;
use crate::units::Femtoseconds;

/// First site counted as transferred (donor and trap excluded).
pub const FIRST_ACCEPTOR: usize = 2;

/// (1/T) ∫₀ᵀ Σ_{n ≥ 2} P_n(t) dt by the trapezoidal rule on the sample grid.
/// If T falls between samples the last interval ends at an interpolated value.
pub fn transfer_probability(series: &PopulationSeries, t_final: Femtoseconds) -> Result<f64, AnalysisError> {
    let t_final = t_final.0;
    if series.is_empty() {
        return Err(AnalysisError::Empty);
    }
    let start = series.times[0];
    let end = *series.times.last().unwrap();
    let slack = 1e-9 * (1.0 + end.abs());
    if start > slack || t_final > end + slack || t_final <= 0.0 {
        return Err(AnalysisError::OutOfRange { requested: t_final, start, end });
    }
    let acceptor = |p: &[f64]| p.iter().skip(FIRST_ACCEPTOR).sum::<f64>();
    let mut points: Vec<(f64, f64)> =
        series.times.iter().zip(&series.populations).take_while(|(t, _)| **t < t_final - slack).map(|(&t, p)| (t, acceptor(p))).collect();
    points.push((t_final, acceptor(&series.at(t_final)?)));
    let integral: f64 = points.windows(2).map(|w| 0.5 * (w[1].0 - w[0].0) * (w[0].1 + w[1].1)).sum();
    Ok(integral / t_final)
}

/// Mean over the sample times of `series` in (0, T] of the Euclidean
/// distance between population vectors; `reference` is interpolated onto
/// those times.
pub fn simulation_error(series: &PopulationSeries, reference: &PopulationSeries, t_final: Femtoseconds) -> Result<f64, AnalysisError> {
    if series.n_sites() != reference.n_sites() {
        return Err(AnalysisError::SiteMismatch(series.n_sites(), reference.n_sites()));
    }
    let slack = 1e-9 * (1.0 + t_final.0.abs());
    let mut total = 0.0;
    let mut count = 0usize;
    for (&t, p) in series.times.iter().zip(&series.populations) {
        if t <= slack || t > t_final.0 + slack {
            continue;
        }
        let r = reference.at(t)?;
        total += p.iter().zip(&r).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
        count += 1;
    }
    if count == 0 {
        return Err(AnalysisError::Empty);
    }
    Ok(total / count as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::series::Provenance;

    fn series(times: Vec<f64>, pops: Vec<Vec<f64>>) -> PopulationSeries {
        PopulationSeries::new(times, pops, Provenance::External)
    }

    #[test]
    fn frozen_donor_transfers_nothing() {
        let s = series(vec![0.0, 1.0, 2.0], vec![vec![1.0, 0.0, 0.0]; 3]);
        assert_eq!(transfer_probability(&s, Femtoseconds(2.0)).unwrap(), 0.0);
    }

    #[test]
    fn full_acceptor_population_transfers_everything() {
        let s = series(vec![0.0, 1.0, 2.0], vec![vec![0.0, 0.0, 1.0]; 3]);
        assert!((transfer_probability(&s, Femtoseconds(1.5)).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn transfer_of_linear_ramp() {
        // P_2(t) = t/4 on [0, 4]; mean over [0, 3] is 3/8
        let s = series((0..=4).map(f64::from).collect(), (0..=4).map(|k| vec![1.0 - k as f64 / 4.0, 0.0, k as f64 / 4.0]).collect());
        assert!((transfer_probability(&s, Femtoseconds(3.0)).unwrap() - 0.375).abs() < 1e-14);
        assert!((transfer_probability(&s, Femtoseconds(2.5)).unwrap() - 2.5 / 8.0).abs() < 1e-14);
        assert!(matches!(transfer_probability(&s, Femtoseconds(5.0)), Err(AnalysisError::OutOfRange { .. })));
    }

    #[test]
    fn error_of_identical_series_is_zero() {
        let s = series(vec![0.0, 1.0, 2.0], vec![vec![0.6, 0.4], vec![0.3, 0.7], vec![0.5, 0.5]]);
        assert_eq!(simulation_error(&s, &s, Femtoseconds(2.0)).unwrap(), 0.0);
    }

    #[test]
    fn compensated_offset_gives_root_two() {
        let a = series(vec![0.0, 1.0, 2.0], vec![vec![0.5, 0.5, 0.0]; 3]);
        let delta = 0.1;
        let b = series(vec![0.0, 1.0, 2.0], vec![vec![0.5 + delta, 0.5 - delta, 0.0]; 3]);
        assert!((simulation_error(&a, &b, Femtoseconds(2.0)).unwrap() - delta * 2f64.sqrt()).abs() < 1e-14);
    }

    #[test]
    fn mismatched_series_rejected() {
        let a = series(vec![0.0, 1.0], vec![vec![1.0, 0.0]; 2]);
        let b = series(vec![0.0, 1.0], vec![vec![1.0, 0.0, 0.0]; 2]);
        assert_eq!(simulation_error(&a, &b, Femtoseconds(1.0)), Err(AnalysisError::SiteMismatch(2, 3)));
        let short = series(vec![0.0, 0.5], vec![vec![1.0, 0.0]; 2]);
        assert!(matches!(simulation_error(&a, &short, Femtoseconds(1.0)), Err(AnalysisError::OutOfRange { .. })));
    }
}
