//! Site-population time series shared by every engine.

use crate::error::AnalysisError;
use serde::Serialize;
use std::fmt::Write as _;

/// Which engine produced a series.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Provenance {
    Oracle,
    Noiseless,
    Density,
    Trajectories,
    External,
}

/// P_n(t) sampled on a time grid.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PopulationSeries {
    /// Sample times in fs, ascending.
    pub times: Vec<f64>,
    /// `populations[m][n]` = P_n(t_m).
    pub populations: Vec<Vec<f64>>,
    /// Optional binomial shot-noise σ per entry.
    pub sigma: Option<Vec<Vec<f64>>>,
    pub provenance: Provenance,
}

impl PopulationSeries {
    pub fn new(times: Vec<f64>, populations: Vec<Vec<f64>>, provenance: Provenance) -> Self {
        PopulationSeries { times, populations, sigma: None, provenance }
    }

    pub fn n_sites(&self) -> usize {
        self.populations.first().map_or(0, Vec::len)
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Populations at `t`, linearly interpolated between samples.
    pub fn at(&self, t: f64) -> Result<Vec<f64>, AnalysisError> {
        let (start, end) = match (self.times.first(), self.times.last()) {
            (Some(&a), Some(&b)) => (a, b),
            _ => return Err(AnalysisError::Empty),
        };
        let slack = 1e-9 * (1.0 + end.abs());
        if t < start - slack || t > end + slack {
            return Err(AnalysisError::OutOfRange { requested: t, start, end });
        }
        let idx = self.times.partition_point(|&x| x < t);
        if idx < self.times.len() && (self.times[idx] - t).abs() <= slack {
            return Ok(self.populations[idx].clone());
        }
        if idx == 0 {
            return Ok(self.populations[0].clone());
        }
        if idx >= self.times.len() {
            return Ok(self.populations[self.times.len() - 1].clone());
        }
        let (t0, t1) = (self.times[idx - 1], self.times[idx]);
        let w = (t - t0) / (t1 - t0);
        Ok(self.populations[idx - 1].iter().zip(&self.populations[idx]).map(|(a, b)| a + w * (b - a)).collect())
    }

    /// Columnar text: `time_fs P_0 … P_{N-1}` plus σ columns when present.
    pub fn to_columns(&self) -> String {
        let n = self.n_sites();
        let mut out = String::from("# time_fs");
        for k in 0..n {
            let _ = write!(out, " P_{k}");
        }
        if self.sigma.is_some() {
            for k in 0..n {
                let _ = write!(out, " sigma_{k}");
            }
        }
        out.push('\n');
        for (m, t) in self.times.iter().enumerate() {
            let _ = write!(out, "{t:.6}");
            for p in &self.populations[m] {
                let _ = write!(out, " {p:.10e}");
            }
            if let Some(s) = &self.sigma {
                for x in &s[m] {
                    let _ = write!(out, " {x:.10e}");
                }
            }
            out.push('\n');
        }
        out
    }

    /// Parse the output of [`to_columns`](Self::to_columns). σ columns are
    /// recognized from the header.
    pub fn from_columns(text: &str, provenance: Provenance) -> Result<Self, AnalysisError> {
        let mut n_sites = None;
        let mut with_sigma = false;
        let mut series = PopulationSeries::new(Vec::new(), Vec::new(), provenance);
        let mut sigma = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            let err = |reason: &str| AnalysisError::Parse { line: i + 1, reason: reason.to_string() };
            if let Some(header) = line.strip_prefix('#') {
                if header.trim_start().starts_with("time_fs") {
                    let names: Vec<&str> = header.split_whitespace().skip(1).collect();
                    n_sites = Some(names.iter().filter(|c| c.starts_with("P_")).count());
                    with_sigma = names.iter().any(|c| c.starts_with("sigma_"));
                }
                continue;
            }
            if line.is_empty() {
                continue;
            }
            let values: Vec<f64> = line.split_whitespace().map(|f| f.parse().map_err(|_| err("bad number"))).collect::<Result<_, _>>()?;
            let n = *n_sites.get_or_insert(values.len() - 1);
            let expected = 1 + n * if with_sigma { 2 } else { 1 };
            if values.len() != expected {
                return Err(err(&format!("expected {expected} columns, got {}", values.len())));
            }
            if series.times.last().is_some_and(|&t| values[0] <= t) {
                return Err(err("times must increase"));
            }
            series.times.push(values[0]);
            series.populations.push(values[1..=n].to_vec());
            if with_sigma {
                sigma.push(values[n + 1..].to_vec());
            }
        }
        if with_sigma {
            series.sigma = Some(sigma);
        }
        Ok(series)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn columns_round_trip() {
        let mut s = PopulationSeries::new(vec![0.0, 4.0], vec![vec![1.0, 0.0], vec![0.75, 0.25]], Provenance::Trajectories);
        assert_eq!(PopulationSeries::from_columns(&s.to_columns(), Provenance::Trajectories).unwrap(), s);
        s.sigma = Some(vec![vec![0.0, 0.0], vec![0.01, 0.02]]);
        assert_eq!(PopulationSeries::from_columns(&s.to_columns(), Provenance::Trajectories).unwrap(), s);
    }

    #[test]
    fn interpolates_between_samples() {
        let s = PopulationSeries::new(vec![0.0, 2.0], vec![vec![1.0, 0.0], vec![0.0, 1.0]], Provenance::External);
        assert_eq!(s.at(0.5).unwrap(), vec![0.75, 0.25]);
        assert!(s.at(2.5).is_err());
    }

    #[test]
    fn malformed_rows_are_located() {
        let text = "# time_fs P_0 P_1\n0 1 0\n1 0.5\n";
        assert_eq!(
            PopulationSeries::from_columns(text, Provenance::External),
            Err(AnalysisError::Parse { line: 3, reason: "expected 3 columns, got 2".into() })
        );
    }
}
