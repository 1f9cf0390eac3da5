use super::HarnessError;
use crate::analysis::{driving_grid, Engine, EngineKind, NoiseSource, DEFAULT_DRIVING_STEP};
use crate::circuit::{GateDurations, Topology};
use crate::emulator::{NoiseModel, NoiseScope, QubitNoise, DEFAULT_SHOTS};
use crate::mitigation::{Mitigation, DYNAMICS_MAX_QUANTA, RETENTION_MAX_QUANTA};
use crate::model::ModelSpec;
use crate::units::{Femtoseconds, Rate, Wavenumber};
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

/// Everything one harness run needs, loaded from TOML. Omitted fields take
/// the reference values.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentConfig {
    pub output_dir: PathBuf,
    pub seed: u64,
    pub svg: bool,
    /// Averaging or final times in fs.
    pub times: Vec<f64>,
    pub model: ModelConfig,
    pub engine: EngineConfig,
    pub noise: NoiseConfig,
    pub mitigation: MitigationConfig,
    pub sweep: SweepConfig,
    pub gamma: GammaConfig,
    pub retention: RetentionConfig,
    pub census: CensusConfig,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            output_dir: PathBuf::from("run"),
            seed: 0,
            svg: false,
            times: vec![200.0],
            model: ModelConfig::default(),
            engine: EngineConfig::default(),
            noise: NoiseConfig::default(),
            mitigation: MitigationConfig::default(),
            sweep: SweepConfig::default(),
            gamma: GammaConfig::default(),
            retention: RetentionConfig::default(),
            census: CensusConfig::default(),
        }
    }
}

/// Model overrides on top of the reference parameters for `n_sites`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ModelConfig {
    pub n_sites: usize,
    pub hopping: Option<f64>,
    pub coulomb: Option<f64>,
    pub driving: Option<f64>,
    pub osc_frequency: Option<f64>,
    pub huang_rhys: Option<f64>,
    /// Oscillator damping lifetime 1/γ in fs; absent means undamped.
    pub damping_lifetime_fs: Option<f64>,
    pub dt: Option<f64>,
    pub n_levels: Option<usize>,
    pub max_vib_quanta: Option<usize>,
}

impl Default for ModelConfig {
    fn default() -> Self {
        ModelConfig {
            n_sites: 5,
            hopping: None,
            coulomb: None,
            driving: None,
            osc_frequency: None,
            huang_rhys: None,
            damping_lifetime_fs: None,
            dt: None,
            n_levels: None,
            max_vib_quanta: None,
        }
    }
}

impl ModelConfig {
    pub fn spec(&self) -> ModelSpec {
        self.spec_for(self.n_sites)
    }

    pub fn spec_for(&self, n_sites: usize) -> ModelSpec {
        let r = ModelSpec::reference(n_sites);
        ModelSpec {
            n_sites,
            hopping: self.hopping.map_or(r.hopping, Wavenumber),
            coulomb: self.coulomb.map_or(r.coulomb, Wavenumber),
            driving: self.driving.map_or(r.driving, Wavenumber),
            osc_frequency: self.osc_frequency.map_or(r.osc_frequency, Wavenumber),
            huang_rhys: self.huang_rhys.unwrap_or(r.huang_rhys),
            damping: self.damping_lifetime_fs.map_or(Rate(0.0), |l| Rate::per(Femtoseconds(l))),
            dt: self.dt.map_or(r.dt, Femtoseconds),
            n_levels: self.n_levels.unwrap_or(r.n_levels),
            max_vib_quanta: self.max_vib_quanta.unwrap_or(r.max_vib_quanta),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EngineConfig {
    /// oracle, noiseless, density or trajectories.
    pub kind: String,
    /// heavy-hex, square-grid or all-to-all.
    pub topology: String,
    pub shots: usize,
}

impl Default for EngineConfig {
    fn default() -> Self {
        EngineConfig { kind: "oracle".into(), topology: Topology::HeavyHex.name().into(), shots: DEFAULT_SHOTS }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct NoiseConfig {
    /// noiseless, hardware-medians, calibrated-damping, uniform or calibration.
    pub source: String,
    /// Per-qubit values for `uniform`.
    pub qubit: Option<QubitNoise>,
    pub scope: NoiseScope,
    /// Calibration table for `calibration`, relative to the config file.
    pub calibration_file: Option<PathBuf>,
    pub durations: GateDurations,
}

impl Default for NoiseConfig {
    fn default() -> Self {
        NoiseConfig { source: "noiseless".into(), qubit: None, scope: NoiseScope::AllQubits, calibration_file: None, durations: GateDurations::default() }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MitigationConfig {
    pub electronic: bool,
    /// Vibrational cap; negative disables it.
    pub max_quanta: i64,
}

impl Default for MitigationConfig {
    fn default() -> Self {
        MitigationConfig { electronic: true, max_quanta: DYNAMICS_MAX_QUANTA as i64 }
    }
}

impl MitigationConfig {
    pub fn mitigation(&self) -> Mitigation {
        Mitigation { electronic: self.electronic, max_quanta: usize::try_from(self.max_quanta).ok() }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SweepConfig {
    pub start: f64,
    pub stop: f64,
    pub step: f64,
    /// Explicit driving forces; replaces the start/stop/step grid.
    pub driving: Option<Vec<f64>>,
    /// Also sweep with the vibronic coupling switched off.
    pub uncoupled: bool,
}

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig { start: 1000.0, stop: 3500.0, step: DEFAULT_DRIVING_STEP, driving: None, uncoupled: true }
    }
}

impl SweepConfig {
    pub fn grid(&self) -> Vec<Wavenumber> {
        match &self.driving {
            Some(list) => list.iter().map(|&d| Wavenumber(d)).collect(),
            None => driving_grid(self.start, self.stop, self.step),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GammaConfig {
    /// Series to analyze (columnar text); generated with the engine when absent.
    pub input: Option<PathBuf>,
    pub points: usize,
    pub shortest_lifetime_fs: f64,
    pub longest_lifetime_fs: f64,
}

impl Default for GammaConfig {
    fn default() -> Self {
        GammaConfig { input: None, points: crate::analysis::DEFAULT_GAMMA_POINTS, shortest_lifetime_fs: 12.5, longest_lifetime_fs: 500.0 }
    }
}

impl GammaConfig {
    pub fn grid(&self) -> Vec<Rate> {
        let (lo, hi) = (1.0 / self.longest_lifetime_fs, 1.0 / self.shortest_lifetime_fs);
        let n = self.points.max(2);
        (0..n).map(|k| Rate(lo * (hi / lo).powf(k as f64 / (n - 1) as f64))).collect()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RetentionConfig {
    pub sites: Vec<usize>,
    pub steps: usize,
    pub max_quanta: usize,
    /// Steps at which retention is fitted against the register size.
    pub fit_steps: Vec<usize>,
}

impl Default for RetentionConfig {
    fn default() -> Self {
        RetentionConfig { sites: (3..=10).collect(), steps: 75, max_quanta: RETENTION_MAX_QUANTA, fit_steps: vec![0, 5, 10, 25, 50, 75] }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CensusConfig {
    pub sites: Vec<usize>,
}

impl Default for CensusConfig {
    fn default() -> Self {
        CensusConfig { sites: (3..=10).collect() }
    }
}

impl ExperimentConfig {
    pub fn from_toml(text: &str, origin: &Path) -> Result<Self, HarnessError> {
        let config: ExperimentConfig = toml::from_str(text).map_err(|e| HarnessError::config(origin, e.to_string()))?;
        config.check(origin)?;
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self, HarnessError> {
        let text = std::fs::read_to_string(path).map_err(|e| HarnessError::config(path, e.to_string()))?;
        let mut config = Self::from_toml(&text, path)?;
        if let (Some(file), Some(dir)) = (&config.noise.calibration_file, path.parent()) {
            config.noise.calibration_file = Some(dir.join(file));
        }
        if let (Some(file), Some(dir)) = (&config.gamma.input, path.parent()) {
            config.gamma.input = Some(dir.join(file));
        }
        Ok(config)
    }

    fn check(&self, origin: &Path) -> Result<(), HarnessError> {
        let bad = |message: String| Err(HarnessError::config(origin, message));
        self.model.spec().validate().map_err(|e| HarnessError::config(origin, e.to_string()))?;
        if EngineKind::from_name(&self.engine.kind).is_none() {
            return bad(format!("unknown engine `{}`", self.engine.kind));
        }
        if Topology::from_name(&self.engine.topology).is_none() {
            return bad(format!("unknown topology `{}`", self.engine.topology));
        }
        if !["noiseless", "hardware-medians", "calibrated-damping", "uniform", "calibration"].contains(&self.noise.source.as_str()) {
            return bad(format!("unknown noise source `{}`", self.noise.source));
        }
        if self.noise.source == "uniform" && self.noise.qubit.is_none() {
            return bad("noise source `uniform` needs [noise.qubit]".into());
        }
        if self.noise.source == "calibration" && self.noise.calibration_file.is_none() {
            return bad("noise source `calibration` needs noise.calibration_file".into());
        }
        if self.times.is_empty() || self.times.iter().any(|t| !(t.is_finite() && *t >= 0.0)) {
            return bad("times must be a non-empty list of non-negative numbers".into());
        }
        if self.engine.shots == 0 {
            return bad("engine.shots must be positive".into());
        }
        if !(self.sweep.step > 0.0) && self.sweep.driving.is_none() {
            return bad("sweep.step must be positive".into());
        }
        if !(self.gamma.shortest_lifetime_fs > 0.0 && self.gamma.longest_lifetime_fs > self.gamma.shortest_lifetime_fs) {
            return bad("gamma lifetimes must satisfy 0 < shortest < longest".into());
        }
        Ok(())
    }

    pub fn t_max(&self) -> Femtoseconds {
        Femtoseconds(self.times.iter().cloned().fold(0.0, f64::max))
    }

    /// Engine for a chain of `n_sites` with trajectories seeded by `seed`.
    pub fn engine(&self, seed: u64) -> Result<Engine, HarnessError> {
        let kind = EngineKind::from_name(&self.engine.kind).expect("checked on load");
        let noise = match self.noise.source.as_str() {
            "noiseless" => NoiseSource::Noiseless,
            "hardware-medians" => NoiseSource::HardwareMedians,
            "calibrated-damping" => NoiseSource::CalibratedDamping,
            "uniform" => NoiseSource::Uniform { qubit: self.noise.qubit.expect("checked on load"), scope: self.noise.scope },
            _ => {
                let path = self.noise.calibration_file.as_ref().expect("checked on load");
                let text = std::fs::read_to_string(path).map_err(|e| HarnessError::config(path, e.to_string()))?;
                let model = NoiseModel::from_calibration(&text, self.noise.durations.clone(), self.noise.scope)
                    .map_err(|e| HarnessError::config(path, e.to_string()))?;
                NoiseSource::Model(model)
            }
        };
        Ok(Engine {
            kind,
            topology: Topology::from_name(&self.engine.topology).expect("checked on load"),
            noise,
            durations: self.noise.durations.clone(),
            mitigation: self.mitigation.mitigation(),
            shots: self.engine.shots,
            seed,
        })
    }

    /// SHA-256 of the canonical TOML form, independent of the output directory.
    pub fn digest(&self) -> String {
        let canonical = ExperimentConfig { output_dir: PathBuf::new(), ..self.clone() };
        crate::digest::sha256_hex(toml::to_string(&canonical).expect("config serializes").as_bytes())
    }
}

/// Seed for the `index`-th independent work item of a run.
pub fn split_seed(seed: u64, index: u64) -> u64 {
    seed.wrapping_add(index.wrapping_mul(0x9E37_79B9_7F4A_7C15))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_config_gives_reference_model() {
        let c = ExperimentConfig::from_toml("", Path::new("x.toml")).unwrap();
        assert_eq!(c.model.spec(), ModelSpec::reference(5));
        assert_eq!(c.mitigation.mitigation(), Mitigation::full(1));
    }

    #[test]
    fn truncation_follows_chain_length() {
        let c = ExperimentConfig::from_toml("[model]\nn_sites = 3\ndt = 4.0\n", Path::new("x.toml")).unwrap();
        assert_eq!(c.model.spec(), ModelSpec::reference(3).with_dt(4.0));
    }

    #[test]
    fn unknown_key_is_located() {
        let err = ExperimentConfig::from_toml("[model]\nn_sites = 3\nhoping = 5.0\n", Path::new("bad.toml")).unwrap_err();
        let text = err.to_string();
        assert!(text.contains("bad.toml") && text.contains("hoping") && text.contains("line 3"), "{text}");
        assert_eq!(err.exit_code(), 3);
    }

    #[test]
    fn bad_values_are_config_errors() {
        for text in ["[engine]\nkind = \"quantum\"\n", "times = []\n", "[noise]\nsource = \"uniform\"\n", "[model]\nn_sites = 1\n"] {
            assert_eq!(ExperimentConfig::from_toml(text, Path::new("x.toml")).unwrap_err().exit_code(), 3, "{text}");
        }
    }

    #[test]
    fn digest_ignores_output_dir_only() {
        let a = ExperimentConfig::default();
        let b = ExperimentConfig { output_dir: "elsewhere".into(), ..a.clone() };
        let c = ExperimentConfig { seed: 1, ..a.clone() };
        assert_eq!(a.digest(), b.digest());
        assert_ne!(a.digest(), c.digest());
    }

    #[test]
    fn negative_cap_disables_vibrational_filter() {
        let c = ExperimentConfig::from_toml("[mitigation]\nmax_quanta = -1\n", Path::new("x.toml")).unwrap();
        assert_eq!(c.mitigation.mitigation(), Mitigation { electronic: true, max_quanta: None });
    }
}
