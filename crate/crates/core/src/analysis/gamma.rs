use super::simulation_error;
use crate::error::{AnalysisError, EngineError};
use crate::model::ModelSpec;
use crate::oracle::Oracle;
use crate::series::PopulationSeries;
use crate::units::{Femtoseconds, Rate};
use rayon::prelude::*;
use std::fmt::Write as _;

pub const DEFAULT_GAMMA_POINTS: usize = 20;
const MIN_GAMMA_POINTS: usize = 5;

/// Logarithmic grid from (500 fs)⁻¹ to (12.5 fs)⁻¹.
pub fn default_gamma_grid() -> Vec<Rate> {
    let (lo, hi) = (1.0 / 500.0f64, 1.0 / 12.5f64);
    let n = DEFAULT_GAMMA_POINTS;
    (0..n).map(|k| Rate(lo * (hi / lo).powf(k as f64 / (n - 1) as f64))).collect()
}

/// Simulation error of a series against oracle runs over a damping grid.
#[derive(Clone, Debug, PartialEq)]
pub struct GammaScan {
    pub gammas: Vec<Rate>,
    pub times: Vec<Femtoseconds>,
    /// `errors[i][j]` = ε(times[i]) at gammas[j]; NaN where the oracle failed.
    pub errors: Vec<Vec<f64>>,
    /// Index of the smallest error per time.
    pub argmin: Vec<Option<usize>>,
    pub failures: Vec<(usize, String)>,
}

impl GammaScan {
    /// Best-matching damping at the largest time.
    pub fn gamma_qc(&self) -> Option<Rate> {
        self.argmin.last().copied().flatten().map(|j| self.gammas[j])
    }

    /// Whether the estimate sits on an end of the grid.
    pub fn on_boundary(&self) -> bool {
        matches!(self.argmin.last(), Some(Some(j)) if *j == 0 || *j + 1 == self.gammas.len())
    }

    /// `gamma_per_fs lifetime_fs eps(T1) eps(T2) ...` columns.
    pub fn to_columns(&self) -> String {
        let mut out = String::from("# gamma_per_fs lifetime_fs");
        for t in &self.times {
            let _ = write!(out, " eps_{}fs", t.0);
        }
        out.push('\n');
        for (j, g) in self.gammas.iter().enumerate() {
            let _ = write!(out, "{:.8e} {:.4}", g.0, 1.0 / g.0);
            for row in &self.errors {
                let _ = write!(out, " {:.8e}", row[j]);
            }
            out.push('\n');
        }
        if let Some(g) = self.gamma_qc() {
            let _ = writeln!(out, "# gamma-qc {:.8e} lifetime-fs {:.4} boundary {}", g.0, 1.0 / g.0, self.on_boundary());
        }
        out
    }
}

impl GammaScan {
    /// Assemble a scan from one error column (or failure message) per damping rate.
    pub fn from_columns(gammas: &[Rate], times: &[Femtoseconds], columns: Vec<Result<Vec<f64>, String>>) -> Self {
        let mut errors = vec![vec![f64::NAN; gammas.len()]; times.len()];
        let mut failures = Vec::new();
        for (j, column) in columns.into_iter().enumerate() {
            match column {
                Ok(values) => values.into_iter().enumerate().for_each(|(i, e)| errors[i][j] = e),
                Err(message) => failures.push((j, message)),
            }
        }
        let argmin = errors.iter().map(|row| argmin(row)).collect();
        GammaScan { gammas: gammas.to_vec(), times: times.to_vec(), errors, argmin, failures }
    }
}

fn argmin(values: &[f64]) -> Option<usize> {
    values.iter().enumerate().filter(|(_, v)| v.is_finite()).min_by(|a, b| a.1.total_cmp(b.1)).map(|(j, _)| j)
}

/// Run the oracle at every damping rate of `gammas` and score `series`
/// against each at every time in `times`. Oracle failures are recorded and
/// the scan continues.
pub fn extract_gamma_qc(
    series: &PopulationSeries,
    template: &ModelSpec,
    gammas: &[Rate],
    times: &[Femtoseconds],
) -> Result<GammaScan, AnalysisError> {
    let (lo, hi) = gammas.iter().fold((f64::INFINITY, 0.0f64), |(lo, hi), g| (lo.min(g.0), hi.max(g.0)));
    if gammas.len() < MIN_GAMMA_POINTS || hi < 10.0 * lo {
        return Err(AnalysisError::GammaGrid { needed: MIN_GAMMA_POINTS });
    }
    if times.is_empty() {
        return Err(AnalysisError::Empty);
    }
    let columns: Vec<Result<Vec<f64>, String>> = gammas.par_iter().map(|&g| gamma_point_errors(series, template, g, times)).collect();
    Ok(GammaScan::from_columns(gammas, times, columns))
}

/// ε(T) for each of `times` against the oracle at damping `gamma`.
pub fn gamma_point_errors(series: &PopulationSeries, template: &ModelSpec, gamma: Rate, times: &[Femtoseconds]) -> Result<Vec<f64>, String> {
    let t_max = Femtoseconds(times.iter().map(|t| t.0).fold(0.0, f64::max));
    let reference =
        Oracle::new(&template.with_damping(gamma)).and_then(|o| o.population_series(t_max, 1)).map_err(|e| EngineError::from(e).to_string())?;
    times.iter().map(|&t| simulation_error(series, &reference, t).map_err(|e| e.to_string())).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_grid_spans_the_scan_range() {
        let g = default_gamma_grid();
        assert_eq!(g.len(), 20);
        assert!((g[0].0 - 1.0 / 500.0).abs() < 1e-15);
        assert!((g[19].0 - 1.0 / 12.5).abs() < 1e-15);
        assert!(g.windows(2).all(|w| w[1].0 > w[0].0));
    }

    #[test]
    fn narrow_grid_rejected() {
        let spec = ModelSpec::reference(3);
        let s = PopulationSeries::new(vec![0.0], vec![vec![1.0, 0.0, 0.0]], crate::series::Provenance::External);
        let grid: Vec<Rate> = (1..=5).map(|k| Rate(0.01 * k as f64)).collect();
        assert_eq!(extract_gamma_qc(&s, &spec, &grid, &[Femtoseconds(1.0)]), Err(AnalysisError::GammaGrid { needed: 5 }));
    }

    #[test]
    fn argmin_is_scale_invariant() {
        let e = [0.3, 0.1, f64::NAN, 0.2];
        let scaled: Vec<f64> = e.iter().map(|x| 7.5 * x).collect();
        assert_eq!(argmin(&e), Some(1));
        assert_eq!(argmin(&scaled), argmin(&e));
    }
}
