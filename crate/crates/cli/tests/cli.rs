use std::path::Path;
use std::process::{Command, Output};

use rst_core::io::{parse_spectrum_csv, parse_thermal_csv};

fn rst(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rst"))
        .args(args)
        .current_dir(dir)
        .env("RST_THREADS", "1")
        .output()
        .expect("rst runs")
}

fn ok(out: &Output) {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
}

fn read(dir: &Path, name: &str) -> String {
    std::fs::read_to_string(dir.join(name)).unwrap()
}

fn json(dir: &Path, name: &str) -> serde_json::Value {
    serde_json::from_str(&read(dir, name)).unwrap()
}

#[test]
fn chain_dos_has_two_n_rows_and_unit_weight() {
    let dir = tempfile::tempdir().unwrap();
    ok(&rst(dir.path(), &["dos", "--geometry", "chain", "--sites", "4096", "--samples", "1000"]));
    let rows = parse_spectrum_csv(&read(dir.path(), "dos.csv")).unwrap();
    assert_eq!(rows.len(), 2000);
    let dw = rows[1].0 - rows[0].0;
    let weight: f64 = rows.iter().map(|r| r.1).sum::<f64>() * dw;
    assert!((weight - 1.0).abs() < 0.01, "{weight}");
    let side = json(dir.path(), "dos.provenance.json");
    assert_eq!(side["config"]["sites"], "4096");
    assert_eq!(side["command"], "dos");
    assert!(side["wall_time_s"].as_f64().unwrap() >= 0.0);
}

#[test]
fn single_thread_runs_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    for (args, out) in [
        (&["dos", "--geometry", "square", "--sites", "400", "--realizations", "3", "--samples", "128"][..], "dos.csv"),
        (&["specific-heat", "--sites", "8", "--realizations", "4"][..], "specific_heat.csv"),
        (&["current-corr", "--sites", "8", "--steps", "10", "--realizations", "2"][..], "current_corr.csv"),
    ] {
        ok(&rst(d, args));
        let first = read(d, out);
        ok(&rst(d, args));
        assert_eq!(first, read(d, out), "{out}");
    }
}

#[test]
fn sidecar_reruns_the_job() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    ok(&rst(d, &["thermal", "--sites", "6", "--observable", "mx", "--betas", "0.5,1", "-o", "a.csv"]));
    ok(&rst(d, &["thermal", "--config", "a.provenance.json", "-o", "b.csv"]));
    let a = parse_thermal_csv(&read(d, "a.csv")).unwrap();
    let b = parse_thermal_csv(&read(d, "b.csv")).unwrap();
    assert_eq!(a.len(), 2);
    for (x, y) in a.iter().zip(&b) {
        assert_eq!(x.observable, "mx");
        assert!((x.value - y.value).abs() <= 1e-10 * (1.0 + x.value.abs()));
    }
}

#[test]
fn config_file_then_overrides() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    std::fs::write(d.join("run.cfg"), "# chain\ngeometry = chain\nsites = 64\nsamples = 50\nseed = 3\n").unwrap();
    ok(&rst(d, &["dos", "-c", "run.cfg", "-s", "seed=4", "--sites", "128"]));
    let side = json(d, "dos.provenance.json");
    assert_eq!(side["config"]["sites"], "128");
    assert_eq!(side["config"]["seed"], "4");
    assert_eq!(parse_spectrum_csv(&read(d, "dos.csv")).unwrap().len(), 100);
}

#[test]
fn identity_channel_has_unit_fidelity() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    std::fs::write(d.join("identity.json"), r#"{"dim":2,"operators":[[[1,0],[0,0],[0,0],[1,0]]]}"#).unwrap();
    ok(&rst(d, &["fidelity", "--channel", "identity.json"]));
    let r = json(d, "fidelity.json");
    assert!((r["average_fidelity"].as_f64().unwrap() - 1.0).abs() < 1e-12);
    assert_eq!(r["trace_preserving"], true);
}

#[test]
fn xeb_self_test_at_twelve_qubits() {
    let dir = tempfile::tempdir().unwrap();
    let out = rst(dir.path(), &["xeb", "self-test", "--qubits", "12", "--shots", "500000"]);
    ok(&out);
    let r = json(dir.path(), "xeb.json");
    let alpha = r["simulated"]["alpha"].as_f64().unwrap();
    let se = r["simulated"]["alpha_stderr"].as_f64().unwrap();
    assert!((alpha - 1.0).abs() <= 3.0 * se, "{alpha} ± {se}");
    assert_eq!(r["pass"], true);
}

#[test]
fn sampled_bitstrings_can_be_scored() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    ok(&rst(d, &["xeb", "sample", "--qubits", "8", "--shots", "20000", "-o", "bits.txt"]));
    assert!(read(d, "bits.txt").starts_with("L=8 m=20000\n"));
    let out = rst(d, &["xeb", "score", "--qubits", "8", "--bitstrings", "bits.txt"]);
    ok(&out);
    let r = json(d, "xeb.json");
    assert_eq!(r["m"], 20000);
    assert!(String::from_utf8_lossy(&out.stdout).contains("source=external-file"));
}

#[test]
fn empty_beta_grid_writes_header_only() {
    let dir = tempfile::tempdir().unwrap();
    let out = rst(dir.path(), &["specific-heat", "--sites", "6", "--betas", ""]);
    ok(&out);
    assert_eq!(read(dir.path(), "specific_heat.csv"), "beta,T,observable,value,stderr\n");
    assert!(String::from_utf8_lossy(&out.stderr).contains("warning"));
}

#[test]
fn exit_codes_classify_failures() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let nyquist = rst(d, &["dos", "--sites", "64", "--tau", "5"]);
    assert_eq!(nyquist.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&nyquist.stderr).contains("use tau ="));
    assert_eq!(rst(d, &["dos", "--geometry", "hexagonal"]).status.code(), Some(2));
    assert_eq!(rst(d, &["thermal", "--sites", "40"]).status.code(), Some(3));
    assert_eq!(rst(d, &["fidelity", "--channel", "absent.json"]).status.code(), Some(3));
    assert_eq!(rst(d, &["nonsense"]).status.code(), Some(2));
}

#[test]
fn selftest_passes() {
    let dir = tempfile::tempdir().unwrap();
    let out = rst(dir.path(), &["selftest"]);
    ok(&out);
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.lines().count() >= 5 && !text.contains("FAIL"), "{text}");
}
