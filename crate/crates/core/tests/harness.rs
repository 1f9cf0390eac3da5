use std::collections::BTreeMap;
use std::path::Path;
use std::process::Command;

fn vibronic(args: &[&str], dir: &Path) -> (i32, String, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_vibronic")).args(args).current_dir(dir).output().unwrap();
    (out.status.code().unwrap_or(-1), String::from_utf8_lossy(&out.stdout).into(), String::from_utf8_lossy(&out.stderr).into())
}

fn snapshot(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    let mut files = BTreeMap::new();
    for sub in ["", "points"] {
        for entry in std::fs::read_dir(dir.join(sub)).unwrap() {
            let path = entry.unwrap().path();
            if path.is_file() {
                files.insert(format!("{sub}/{}", path.file_name().unwrap().to_string_lossy()), std::fs::read(&path).unwrap());
            }
        }
    }
    files
}

const SWEEP: &str = r#"
times = [40.0, 80.0]
[model]
n_sites = 3
dt = 4.0
[engine]
kind = "trajectories"
shots = 200
[noise]
source = "hardware-medians"
[sweep]
driving = [2600.0, 2800.0, 3000.0, 3200.0]
"#;

#[test]
fn sweep_replays_and_resumes_bit_exactly() {
    let tmp = tempfile::tempdir().unwrap();
    std::fs::write(tmp.path().join("sweep.toml"), SWEEP).unwrap();
    let (code, _, err) = vibronic(&["sweep", "-c", "sweep.toml", "-o", "a"], tmp.path());
    assert_eq!(code, 0, "{err}");
    let first = snapshot(&tmp.path().join("a"));
    assert_eq!(first.keys().filter(|k| k.starts_with("points/")).count(), 8);

    // same config and seed in a fresh directory; only the recorded output_dir differs
    vibronic(&["sweep", "-c", "sweep.toml", "-o", "b"], tmp.path());
    let mut replay = snapshot(&tmp.path().join("b"));
    let mut expected = first.clone();
    assert_ne!(replay.remove("/config.toml"), None);
    expected.remove("/config.toml");
    assert_eq!(replay, expected);

    // interrupted run: drop half of the checkpoints and the summaries
    for name in ["points/sweep_coupled_0001.txt", "points/sweep_uncoupled_0003.txt", "peaks.txt", "spectrum_coupled_80fs.txt"] {
        std::fs::remove_file(tmp.path().join("a").join(name)).unwrap();
    }
    vibronic(&["sweep", "-c", "sweep.toml", "-o", "a"], tmp.path());
    assert_eq!(snapshot(&tmp.path().join("a")), first);

    // a different seed changes the results and the digest
    vibronic(&["sweep", "-c", "sweep.toml", "-o", "c", "--seed", "9"], tmp.path());
    let other = snapshot(&tmp.path().join("c"));
    assert_ne!(other.get("/spectrum_coupled_80fs.txt"), first.get("/spectrum_coupled_80fs.txt"));
    let meta = String::from_utf8(other["/metadata.toml"].clone()).unwrap();
    assert!(meta.contains("seed = 9") && meta.contains("config_digest") && meta.contains("version"));
}

#[test]
fn stale_checkpoints_are_recomputed() {
    let tmp = tempfile::tempdir().unwrap();
    std::fs::write(tmp.path().join("sweep.toml"), SWEEP).unwrap();
    vibronic(&["sweep", "-c", "sweep.toml", "-o", "a"], tmp.path());
    let first = snapshot(&tmp.path().join("a"));
    let point = tmp.path().join("a/points/sweep_coupled_0000.txt");
    std::fs::write(&point, "# digest something-else\n0.5 0.5\n").unwrap();
    vibronic(&["sweep", "-c", "sweep.toml", "-o", "a"], tmp.path());
    assert_eq!(snapshot(&tmp.path().join("a")), first);
}

#[test]
fn resonances_for_three_sites_flag_one_vibronic_peak() {
    let tmp = tempfile::tempdir().unwrap();
    std::fs::write(tmp.path().join("r.toml"), "[model]\nn_sites = 3\n").unwrap();
    let (code, _, _) = vibronic(&["resonances", "-c", "r.toml", "-o", "out", "--svg"], tmp.path());
    assert_eq!(code, 0);
    let text = std::fs::read_to_string(tmp.path().join("out/resonances.txt")).unwrap();
    let flagged = text.lines().filter(|l| !l.starts_with('#') && l.ends_with("true")).count();
    assert_eq!(flagged, 1);
    assert!(std::fs::read_to_string(tmp.path().join("out/resonances.svg")).unwrap().starts_with("<svg"));
}

#[test]
fn evolve_to_time_zero_reports_the_initial_state() {
    let tmp = tempfile::tempdir().unwrap();
    std::fs::write(tmp.path().join("e.toml"), "times = [0.0]\n[model]\nn_sites = 4\ndt = 4.0\n[engine]\nkind = \"noiseless\"\n").unwrap();
    let (code, _, err) = vibronic(&["evolve", "-c", "e.toml", "-o", "out"], tmp.path());
    assert_eq!(code, 0, "{err}");
    let series = std::fs::read_to_string(tmp.path().join("out/series.txt")).unwrap();
    let rows: Vec<&str> = series.lines().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(rows.len(), 1);
    let values: Vec<f64> = rows[0].split_whitespace().map(|f| f.parse().unwrap()).collect();
    assert_eq!(values, vec![0.0, 1.0, 0.0, 0.0, 0.0]);
}

#[test]
fn gamma_scan_identifies_an_oracle_series() {
    let tmp = tempfile::tempdir().unwrap();
    let gen = "times = [100.0]\n[model]\nn_sites = 3\ndamping_lifetime_fs = 112.5\n";
    std::fs::write(tmp.path().join("gen.toml"), gen).unwrap();
    assert_eq!(vibronic(&["evolve", "-c", "gen.toml", "-o", "gen"], tmp.path()).0, 0);
    // lifetimes 450, 225, 112.5, 56.25, 28.125 fs
    let scan = "times = [100.0]\n[model]\nn_sites = 3\n[gamma]\ninput = \"gen/series.txt\"\npoints = 5\nshortest_lifetime_fs = 28.125\nlongest_lifetime_fs = 450.0\n";
    std::fs::write(tmp.path().join("scan.toml"), scan).unwrap();
    let (code, out, err) = vibronic(&["gamma-scan", "-c", "scan.toml", "-o", "scan"], tmp.path());
    assert_eq!(code, 0, "{err}");
    assert!(out.contains("lifetime 112.50 fs"), "{out}");
}

#[test]
fn exit_codes_distinguish_failure_kinds() {
    let tmp = tempfile::tempdir().unwrap();
    assert_eq!(vibronic(&["no-such-command"], tmp.path()).0, 2);
    std::fs::write(tmp.path().join("bad.toml"), "[model]\nn_sites = 3\nhoping = 1.0\n").unwrap();
    let (code, _, err) = vibronic(&["evolve", "-c", "bad.toml"], tmp.path());
    assert_eq!(code, 3);
    assert!(err.contains("line 3") && err.contains("hoping"), "{err}");
    // 14 qubits exceed the density-matrix backend
    std::fs::write(tmp.path().join("big.toml"), "[model]\nn_sites = 7\ndt = 4.0\n[engine]\nkind = \"density\"\n").unwrap();
    assert_eq!(vibronic(&["evolve", "-c", "big.toml", "-o", "big"], tmp.path()).0, 4);
}

#[test]
fn census_reports_routing_structure() {
    let tmp = tempfile::tempdir().unwrap();
    let (code, out, _) = vibronic(&["census", "-o", "c"], tmp.path());
    assert_eq!(code, 0);
    let rows: Vec<Vec<&str>> = out.lines().filter(|l| !l.starts_with('#')).map(|l| l.split_whitespace().collect()).collect();
    assert_eq!(rows.len(), 8);
    assert_eq!((rows[0][2], rows[0][4]), ("10", "0"));
    assert!(rows[1..].iter().all(|r| r[4] == "2" && r[6] == rows[1][6]));
}
