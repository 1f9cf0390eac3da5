use super::config::{split_seed, ExperimentConfig};
use super::{describe, HarnessError, RunDir};
use crate::analysis::svg::Plot;
use crate::analysis::{gamma_point_errors, transfer_at, transfer_probability, EngineKind, GammaScan, TransferSpectrum};
use crate::circuit::gate_census;
use crate::error::EngineError;
use crate::mitigation::{fit_retention_vs_qubits, fit_shot_decay, FilterReport};
use crate::model::{electronic_eigensystem, predict_resonances, ResonanceReport};
use crate::series::{PopulationSeries, Provenance};
use crate::units::{Femtoseconds, Wavenumber};
use rayon::prelude::*;
use std::fmt::Write as _;

fn resonance_text(report: &ResonanceReport) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "# n-sites {}", report.n_sites);
    out.push_str("# k acceptor_eigenvalue_cm electronic_cm vibronic_cm pure_vibronic\n");
    for k in 0..report.electronic.len() {
        let _ = writeln!(
            out,
            "{k} {:.3} {:.3} {:.3} {}",
            report.acceptor_eigenvalues[k].0, report.electronic[k].0, report.vibronic[k].0, report.vibronic_above_electronic[k]
        );
    }
    let list = |v: &mut dyn Iterator<Item = Wavenumber>| v.map(|w| format!("{:.3}", w.0)).collect::<Vec<_>>().join(" ");
    let _ = writeln!(out, "# hybridized {}", list(&mut report.hybridized.iter().copied()));
    let _ = writeln!(out, "# pure-vibronic {}", list(&mut report.pure_vibronic()));
    out
}

/// Resonance predictions, with eigenlevels of the chain against the driving
/// force as an optional plot.
pub fn run_resonances(config: &ExperimentConfig) -> Result<String, HarnessError> {
    let run = RunDir::create(config, "resonances")?;
    let spec = config.model.spec();
    let report = predict_resonances(&spec).map_err(EngineError::from)?;
    run.write("resonances.txt", &resonance_text(&report))?;
    if config.svg {
        let lo = report.electronic.first().map_or(0.0, |w| w.0) - 500.0;
        let hi = report.vibronic.last().map_or(0.0, |w| w.0) + 500.0;
        let grid: Vec<f64> = (0..=((hi - lo) / 10.0) as usize).map(|i| lo + 10.0 * i as f64).collect();
        let levels: Vec<Vec<f64>> =
            grid.iter().map(|&d| electronic_eigensystem(&spec.with_driving(d)).map(|e| e.values)).collect::<Result<_, _>>().map_err(EngineError::from)?;
        let mut plot = Plot::new("Chain eigenlevels", "driving force (cm^-1)", "energy (cm^-1)");
        for k in 0..spec.n_sites {
            plot = plot.curve(&format!("level {k}"), grid.iter().zip(&levels).map(|(&d, l)| (d, l[k])).collect());
        }
        plot = plot.curve("donor", grid.iter().map(|&d| (d, d - spec.coulomb.0)).collect());
        plot.markers = report.hybridized.iter().chain(report.pure_vibronic().collect::<Vec<_>>().iter()).map(|w| w.0).collect();
        run.write("resonances.svg", &plot.render())?;
    }
    let pure: Vec<String> = report.pure_vibronic().map(|w| format!("{:.1}", w.0)).collect();
    let hyb: Vec<String> = report.hybridized.iter().map(|w| format!("{:.1}", w.0)).collect();
    Ok(format!("electronic (hybridized): {}\npure vibronic: {}", hyb.join(", "), pure.join(", ")))
}

/// One evolution with raw and mitigated series side by side.
pub fn run_evolve(config: &ExperimentConfig) -> Result<String, HarnessError> {
    let run = RunDir::create(config, "evolve")?;
    let spec = config.model.spec();
    let engine = config.engine(config.seed)?;
    let result = engine.evolve(&spec, config.t_max())?;
    run.write("series.txt", &result.series.to_columns())?;
    run.write("series_raw.txt", &result.raw.to_columns())?;
    if let Some(shots) = &result.shots {
        run.write("shots.txt", &shots.to_text())?;
    }
    if let Some(report) = &result.filter_report {
        run.write("filter.txt", &report.to_text())?;
    }
    let mut summary = String::from("# t_fs transfer_mitigated transfer_raw\n");
    for &t in config.times.iter().filter(|&&t| t > 0.0) {
        let mitigated = transfer_probability(&result.series, Femtoseconds(t)).map_err(EngineError::from)?;
        let raw = transfer_probability(&result.raw, Femtoseconds(t)).map_err(EngineError::from)?;
        let _ = writeln!(summary, "{t} {mitigated:.10e} {raw:.10e}");
    }
    run.write("transfer.txt", &summary)?;
    if config.svg {
        let mut plot = Plot::new(&format!("Site populations ({})", engine.kind.name()), "t (fs)", "P_n");
        for n in 0..result.series.n_sites() {
            let points = result.series.times.iter().zip(&result.series.populations).map(|(&t, p)| (t, p[n])).collect();
            plot = plot.curve(&format!("P_{n}"), points);
        }
        run.write("populations.svg", &plot.render())?;
    }
    Ok(summary)
}

fn positive_times(config: &ExperimentConfig) -> Result<Vec<Femtoseconds>, HarnessError> {
    let times: Vec<Femtoseconds> = config.times.iter().filter(|&&t| t > 0.0).map(|&t| Femtoseconds(t)).collect();
    if times.is_empty() {
        return Err(HarnessError::config(&config.output_dir, "this command needs at least one positive time"));
    }
    Ok(times)
}

fn parse_values(body: &str) -> Option<Vec<f64>> {
    body.lines().find(|l| !l.starts_with('#'))?.split_whitespace().map(|f| f.parse().ok()).collect()
}

fn format_values(values: &[f64]) -> String {
    values.iter().map(|v| format!("{v:.17e}")).collect::<Vec<_>>().join(" ") + "\n"
}

/// Driving-force sweep at every configured time, checkpointed per point.
pub fn run_sweep(config: &ExperimentConfig) -> Result<String, HarnessError> {
    let run = RunDir::create(config, "sweep")?;
    let times = positive_times(config)?;
    let grid = config.sweep.grid();
    let template = config.model.spec();
    let variants: Vec<bool> = if config.sweep.uncoupled { vec![true, false] } else { vec![true] };
    let points: Vec<(usize, bool, usize)> =
        variants.iter().flat_map(|&c| (0..grid.len()).map(move |i| (c, i))).enumerate().map(|(k, (c, i))| (k, c, i)).collect();
    let name = |coupled: bool, i: usize| format!("sweep_{}_{i:04}.txt", if coupled { "coupled" } else { "uncoupled" });

    let results: Vec<Result<Vec<f64>, String>> = points
        .par_iter()
        .map(|&(k, coupled, i)| {
            if let Some(values) = run.load_point(&name(coupled, i)).as_deref().and_then(parse_values) {
                return Ok(values);
            }
            let spec = template.with_driving(grid[i].0);
            let spec = if coupled { spec } else { spec.uncoupled() };
            let engine = config.engine(split_seed(config.seed, k as u64)).map_err(|e| e.to_string())?;
            let values = transfer_at(&spec, &times, &engine).map_err(|e| describe(&e))?;
            run.save_point(&name(coupled, i), &format_values(&values)).map_err(|e| e.to_string())?;
            Ok(values)
        })
        .collect();

    let mut failures = Vec::new();
    let mut summary = String::new();
    let mut plot = Plot::new("Transfer probability", "driving force (cm^-1)", "P_transfer");
    for &coupled in &variants {
        for (ti, &t) in times.iter().enumerate() {
            let mut values = Vec::with_capacity(grid.len());
            for (k, &(_, c, i)) in points.iter().enumerate() {
                if c != coupled {
                    continue;
                }
                match &results[k] {
                    Ok(v) => values.push(v[ti]),
                    Err(message) => {
                        values.push(f64::NAN);
                        if ti == 0 {
                            failures.push((name(c, i), message.clone()));
                        }
                    }
                }
            }
            let spectrum = TransferSpectrum { driving: grid.clone(), values, t_final: t, coupled };
            let label = format!("{}_{}fs", if coupled { "coupled" } else { "uncoupled" }, t.0);
            run.write(&format!("spectrum_{label}.txt"), &spectrum.to_columns())?;
            let peaks: Vec<String> = spectrum.default_peaks().iter().map(|p| format!("{:.1} ({:.4})", p.driving.0, p.value)).collect();
            let _ = writeln!(summary, "{label}: peaks {}", peaks.join(", "));
            plot = plot.curve(&label, grid.iter().zip(&spectrum.values).map(|(d, &v)| (d.0, v)).collect());
        }
    }
    run.write("peaks.txt", &summary)?;
    if config.svg {
        run.write("spectrum.svg", &plot.render())?;
    }
    run.record_failures(&failures, points.len())?;
    Ok(summary)
}

/// Damping-rate extraction: score a series against oracle runs over a
/// logarithmic damping grid, checkpointed per grid point.
pub fn run_gamma_scan(config: &ExperimentConfig) -> Result<String, HarnessError> {
    let run = RunDir::create(config, "gamma-scan")?;
    let times = positive_times(config)?;
    let series = match &config.gamma.input {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|source| HarnessError::Io { path: path.clone(), source })?;
            PopulationSeries::from_columns(&text, Provenance::External).map_err(|e| HarnessError::config(path, e.to_string()))?
        }
        None => config.engine(config.seed)?.evolve(&config.model.spec(), config.t_max())?.series,
    };
    run.write("input_series.txt", &series.to_columns())?;
    let template = config.model.spec();
    let gammas = config.gamma.grid();
    let name = |j: usize| format!("gamma_{j:03}.txt");
    let columns: Vec<Result<Vec<f64>, String>> = gammas
        .par_iter()
        .enumerate()
        .map(|(j, &g)| {
            if let Some(values) = run.load_point(&name(j)).as_deref().and_then(parse_values) {
                return Ok(values);
            }
            let values = gamma_point_errors(&series, &template, g, &times)?;
            run.save_point(&name(j), &format_values(&values)).map_err(|e| e.to_string())?;
            Ok(values)
        })
        .collect();
    let scan = GammaScan::from_columns(&gammas, &times, columns);
    run.write("gamma_scan.txt", &scan.to_columns())?;
    if config.svg {
        let mut plot = Plot::new("Simulation error against damping", "gamma (1/fs)", "epsilon");
        plot.log_x = true;
        for (i, t) in times.iter().enumerate() {
            plot = plot.curve(&format!("T = {} fs", t.0), gammas.iter().zip(&scan.errors[i]).map(|(g, &e)| (g.0, e)).collect());
        }
        plot.markers = scan.gamma_qc().map(|g| g.0).into_iter().collect();
        run.write("gamma_scan.svg", &plot.render())?;
    }
    let failures: Vec<(String, String)> = scan.failures.iter().map(|(j, m)| (name(*j), m.clone())).collect();
    run.record_failures(&failures, gammas.len())?;
    Ok(match scan.gamma_qc() {
        Some(g) => format!("gamma-qc = {:.6e} /fs (lifetime {:.2} fs), boundary {}", g.0, 1.0 / g.0, scan.on_boundary()),
        None => "no finite errors".to_string(),
    })
}

/// Retained shots against time per chain length, with decay fits over time
/// and over register size.
pub fn run_retention(config: &ExperimentConfig) -> Result<String, HarnessError> {
    let run = RunDir::create(config, "retention")?;
    if config.engine(0)?.kind != EngineKind::Trajectories {
        return Err(HarnessError::config(&config.output_dir, "retention needs engine.kind = \"trajectories\""));
    }
    let cap = config.retention.max_quanta;
    let steps = config.retention.steps;
    let name = |n: usize| format!("retention_N{n:02}.txt");
    let reports: Vec<Result<(FilterReport, f64), String>> = config
        .retention
        .sites
        .par_iter()
        .map(|&n| {
            let spec = config.model.spec_for(n);
            let engine = config.engine(split_seed(config.seed, n as u64)).map_err(|e| e.to_string())?;
            let circuit = engine.circuit(&spec).map_err(|e| describe(&e))?;
            let t_exec = gate_census(&circuit, &engine.durations).map_err(|e| e.to_string())?.t_exec_us();
            if let Some(report) = run.load_point(&name(n)).as_deref().and_then(FilterReport::from_text) {
                return Ok((report, t_exec));
            }
            let result = engine.evolve(&spec, Femtoseconds(steps as f64 * spec.dt.0)).map_err(|e| describe(&e))?;
            let report = FilterReport::new(result.shots.as_ref().expect("trajectory engine returns shots"), cap);
            run.save_point(&name(n), &report.to_text()).map_err(|e| e.to_string())?;
            Ok((report, t_exec))
        })
        .collect();

    let mut failures = Vec::new();
    let mut ok = Vec::new();
    for (&n, r) in config.retention.sites.iter().zip(reports) {
        match r {
            Ok(v) => ok.push((n, v)),
            Err(message) => failures.push((name(n), message)),
        }
    }
    let mut text = String::from("# n_sites t_exec_us tau_steps tau_us a b residual_rms mixed_baseline\n");
    let mut plot = Plot::new("Retained shots", "Trotter step", "retained shots");
    for (n, (report, t_exec)) in &ok {
        run.write(&format!("filter_N{n:02}.txt"), &report.to_text())?;
        let counts: Vec<f64> = report.vibronic.iter().map(|&c| c as f64).collect();
        match fit_shot_decay(&counts, counts[0], report.mixed_baseline, Some(*t_exec)) {
            Ok(fit) => {
                let _ = writeln!(
                    text,
                    "{n} {t_exec:.6} {:.6} {:.6} {:.6} {:.6} {:.6} {:.3}",
                    fit.tau_steps,
                    fit.tau_us.unwrap_or(f64::NAN),
                    fit.a,
                    fit.b,
                    fit.residual_rms,
                    report.mixed_baseline
                );
            }
            Err(e) => failures.push((format!("decay fit N={n}"), e.to_string())),
        }
        plot = plot.curve(&format!("N = {n}"), counts.iter().enumerate().map(|(k, &c)| (k as f64, c)).collect());
    }
    text.push_str("# step prefactor rate_per_qubit decay_qubits\n");
    let qubits: Vec<usize> = ok.iter().map(|(n, _)| 2 * n).collect();
    for &step in config.retention.fit_steps.iter().filter(|&&s| s <= steps) {
        let values: Vec<f64> = ok.iter().map(|(_, (r, _))| r.vibronic[step] as f64).collect();
        match fit_retention_vs_qubits(&qubits, &values) {
            Ok(fit) => {
                let _ = writeln!(text, "# step {step} {:.6} {:.6e} {:.3}", fit.prefactor, fit.rate, fit.decay_qubits());
            }
            Err(e) => {
                let _ = writeln!(text, "# step {step} fit failed: {e}");
            }
        }
    }
    run.write("retention_fits.txt", &text)?;
    if config.svg {
        run.write("retention.svg", &plot.render())?;
    }
    run.record_failures(&failures, config.retention.sites.len())?;
    Ok(text)
}

/// Gate counts, SWAP layers, depth and execution time per chain length.
pub fn run_census(config: &ExperimentConfig) -> Result<String, HarnessError> {
    let run = RunDir::create(config, "census")?;
    let engine = config.engine(config.seed)?;
    let dt = config.model.dt.unwrap_or(4.0);
    let mut text = String::from("# n_sites qubits cz_naive cz_merged swap_layers layers total_depth t_exec_ns\n");
    for &n in &config.census.sites {
        let spec = config.model.spec_for(n).with_dt(dt);
        let circuit = engine.circuit(&spec)?;
        let census = gate_census(&circuit, &engine.durations).map_err(EngineError::from)?;
        let _ = writeln!(
            text,
            "{n} {} {} {} {} {} {} {:.1}",
            2 * n,
            census.cz_naive,
            census.cz_merged,
            census.swap_layers,
            circuit.layers.len(),
            census.total_depth,
            census.t_exec_ns
        );
    }
    run.write("census.txt", &text)?;
    Ok(text)
}
