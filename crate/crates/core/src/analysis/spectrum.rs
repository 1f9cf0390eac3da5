use super::engine::Engine;
use super::transfer_probability;
use crate::error::EngineError;
use crate::model::ModelSpec;
use crate::units::{Femtoseconds, Wavenumber};
use rayon::prelude::*;
use std::fmt::Write as _;

/// Default spacing of driving-force grids in cm⁻¹.
pub const DEFAULT_DRIVING_STEP: f64 = 35.0;
/// Minimum peak prominence as a fraction of the spectrum maximum.
pub const PEAK_PROMINENCE_FRACTION: f64 = 0.05;

/// Inclusive grid from `start` in steps of `step` up to `stop`.
pub fn driving_grid(start: f64, stop: f64, step: f64) -> Vec<Wavenumber> {
    let n = ((stop - start) / step + 1e-9).floor().max(0.0) as usize;
    (0..=n).map(|k| Wavenumber(start + k as f64 * step)).collect()
}

#[derive(Clone, Debug, PartialEq)]
pub struct Peak {
    pub driving: Wavenumber,
    pub value: f64,
    pub prominence: f64,
}

/// Transfer probability against driving force at one averaging time.
#[derive(Clone, Debug, PartialEq)]
pub struct TransferSpectrum {
    pub driving: Vec<Wavenumber>,
    pub values: Vec<f64>,
    pub t_final: Femtoseconds,
    /// Whether the vibronic coupling was on.
    pub coupled: bool,
}

impl TransferSpectrum {
    /// Interior local maxima whose topographic prominence is at least
    /// `min_prominence`. The prominence is the drop to the higher of the two
    /// minima separating the peak from taller terrain (or the grid ends).
    pub fn peaks(&self, min_prominence: f64) -> Vec<Peak> {
        let v = &self.values;
        let mut out = Vec::new();
        for i in 1..v.len().saturating_sub(1) {
            if !(v[i] > v[i - 1] && v[i] >= v[i + 1]) {
                continue;
            }
            let mut left_min = v[i];
            for &x in v[..i].iter().rev() {
                if x > v[i] {
                    break;
                }
                left_min = left_min.min(x);
            }
            let mut right_min = v[i];
            for &x in &v[i + 1..] {
                if x > v[i] {
                    break;
                }
                right_min = right_min.min(x);
            }
            let prominence = v[i] - left_min.max(right_min);
            if prominence >= min_prominence {
                out.push(Peak { driving: self.driving[i], value: v[i], prominence });
            }
        }
        out
    }

    /// Peaks above the default relative prominence threshold.
    pub fn default_peaks(&self) -> Vec<Peak> {
        let max = self.values.iter().cloned().fold(0.0, f64::max);
        self.peaks(PEAK_PROMINENCE_FRACTION * max)
    }

    /// The most prominent default peak within `window` of `target`.
    pub fn peak_near(&self, target: Wavenumber, window: f64) -> Option<Peak> {
        self.default_peaks()
            .into_iter()
            .filter(|p| (p.driving.0 - target.0).abs() <= window)
            .max_by(|a, b| a.prominence.total_cmp(&b.prominence))
    }

    /// Value at the grid point nearest to `driving`.
    pub fn value_near(&self, driving: Wavenumber) -> Option<f64> {
        self.driving.iter().zip(&self.values).min_by(|a, b| (a.0 .0 - driving.0).abs().total_cmp(&(b.0 .0 - driving.0).abs())).map(|(_, &v)| v)
    }

    /// `driving_cm value` columns with a header.
    pub fn to_columns(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "# t-final-fs {}", self.t_final.0);
        let _ = writeln!(out, "# coupled {}", self.coupled);
        out.push_str("# driving_cm transfer\n");
        for (d, v) in self.driving.iter().zip(&self.values) {
            let _ = writeln!(out, "{:.3} {v:.10e}", d.0);
        }
        out
    }
}

/// Transfer probabilities at each of `times` from a single evolution.
pub fn transfer_at(spec: &ModelSpec, times: &[Femtoseconds], engine: &Engine) -> Result<Vec<f64>, EngineError> {
    let t_max = times.iter().map(|t| t.0).fold(0.0, f64::max);
    let run = engine.evolve(spec, Femtoseconds(t_max))?;
    times.iter().map(|&t| Ok(transfer_probability(&run.series, t)?)).collect()
}

/// One transfer value per grid point, evaluated in parallel.
pub fn sweep_driving_force(template: &ModelSpec, grid: &[Wavenumber], t_final: Femtoseconds, engine: &Engine) -> Result<TransferSpectrum, EngineError> {
    let values = grid
        .par_iter()
        .map(|d| transfer_at(&template.with_driving(d.0), &[t_final], engine).map(|v| v[0]))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(TransferSpectrum { driving: grid.to_vec(), values, t_final, coupled: template.huang_rhys > 0.0 })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spectrum(values: Vec<f64>) -> TransferSpectrum {
        let driving = driving_grid(0.0, 10.0 * (values.len() - 1) as f64, 10.0);
        TransferSpectrum { driving, values, t_final: Femtoseconds(1.0), coupled: true }
    }

    #[test]
    fn grid_is_inclusive() {
        let g = driving_grid(1000.0, 1070.0, 35.0);
        assert_eq!(g, vec![Wavenumber(1000.0), Wavenumber(1035.0), Wavenumber(1070.0)]);
    }

    #[test]
    fn prominence_of_nested_peaks() {
        let s = spectrum(vec![0.0, 0.5, 0.2, 0.3, 0.1, 1.0, 0.0]);
        let peaks = s.peaks(0.0);
        assert_eq!(peaks.len(), 3);
        assert!((peaks[0].prominence - 0.4).abs() < 1e-15);
        assert!((peaks[1].prominence - 0.1).abs() < 1e-15);
        assert!((peaks[2].prominence - 1.0).abs() < 1e-15);
        assert_eq!(s.peaks(0.2).len(), 2);
        assert_eq!(s.peak_near(Wavenumber(30.0), 15.0).unwrap().driving, Wavenumber(30.0));
    }

    #[test]
    fn monotone_spectrum_has_no_peaks() {
        assert!(spectrum(vec![0.1, 0.2, 0.3, 0.4]).default_peaks().is_empty());
    }
}
