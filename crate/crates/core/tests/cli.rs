use std::f64::consts::FRAC_PI_2;
use std::path::Path;
use std::process::{Command, Output};

fn msgate(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_msgate")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn field(record: &str, key: &str) -> f64 {
    record
        .lines()
        .find_map(|l| l.strip_prefix(&format!("{key} = ")))
        .unwrap_or_else(|| panic!("{key} missing from\n{record}"))
        .parse()
        .unwrap()
}

fn data_rows(text: &str) -> Vec<&str> {
    text.lines().filter(|l| !l.starts_with('#')).skip(1).collect()
}

fn read(path: &Path) -> String {
    std::fs::read_to_string(path).unwrap()
}

#[test]
fn design_reference_record() {
    let o = msgate(&["design"]);
    assert!(o.status.success());
    let rec = stdout(&o);
    assert!((field(&rec, "delta0_hz") - 37.2e3).abs() <= 1e3);
    assert!((field(&rec, "theta") - FRAC_PI_2).abs() < 1e-12);
    assert!(rec.contains("balanced = true"));
}

#[test]
fn design_square_fixed_detuning() {
    let o = msgate(&["design", "--pulse", "square", "--delta0-khz", "-40"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let rec = stdout(&o);
    assert!((field(&rec, "delta0_hz") + 40e3).abs() < 1e-6);
    assert!((field(&rec, "theta") - FRAC_PI_2).abs() < 1e-12);
    assert!(rec.contains("balanced = false"));
    assert!(rec.contains("type = \"square\""));
}

#[test]
fn invalid_config_exits_nonzero() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.toml");
    std::fs::write(&path, "n_ions = 3\ncenter_spacing_m = 4.5e-6\nradial_a_freq_hz = 2.52e6\n[pulse]\ntype = \"gaussian\"\ntau_s = 2e-4\n").unwrap();
    let o = msgate(&["--config", path.to_str().unwrap(), "design"]);
    assert!(!o.status.success());
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("radial_b_freq_hz"), "{err}");

    std::fs::write(&path, "n_ions = [").unwrap();
    let o = msgate(&["--config", path.to_str().unwrap(), "design"]);
    assert!(!o.status.success());
}

#[test]
fn config_file_matches_builtin_reference() {
    let cfg = concat!(env!("CARGO_MANIFEST_DIR"), "/../../configs/three_ion.toml");
    let a = stdout(&msgate(&["--config", cfg, "design"]));
    let b = stdout(&msgate(&["design"]));
    assert_eq!(field(&a, "delta_c_hz"), field(&b, "delta_c_hz"));
}

#[test]
fn sweep_rows_and_worker_independence() {
    let dir = tempfile::tempdir().unwrap();
    let one = dir.path().join("one.csv");
    let two = dir.path().join("two.csv");
    let args = ["sweep-detuning", "--lo-khz", "-60", "--hi-khz", "180", "--points", "61"];
    for (p, w) in [(&one, "1"), (&two, "3")] {
        let mut a = args.to_vec();
        a.extend(["--out", p.to_str().unwrap(), "--workers", w]);
        assert!(msgate(&a).status.success());
    }
    let (t1, t2) = (read(&one), read(&two));
    assert!(t1.starts_with("# generator: msgate"));
    assert!(t1.contains("# config_sha256: "));
    assert_eq!(data_rows(&t1), data_rows(&t2));
    let rows = data_rows(&t1);
    assert_eq!(rows.len(), 3 * 61);
    for pulse in ["balanced_gaussian", "gaussian_m40", "square_m40"] {
        assert_eq!(rows.iter().filter(|r| r.starts_with(pulse)).count(), 61);
    }
    let header = t1.lines().find(|l| !l.starts_with('#')).unwrap();
    assert_eq!(header, "pulse,delta0_khz,domega_khz,eps_d,eps_r,eps_s,fidelity,flag");
    // δ0 = 0 is a resonance and is flagged, not fatal
    assert!(rows.iter().any(|r| r.ends_with("resonance:mode3")));
}

#[test]
fn contour_small_grid() {
    let o = msgate(&["contour", "--z-lo-us", "20", "--z-hi-us", "30", "--z-points", "3", "--domega-points", "5"]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert_eq!(data_rows(&text).len(), 15);
    assert!(text.contains("# grid_z_us: 20 .. 30 us, 3 points"));
}

#[test]
fn chain_study_writes_summary_and_curves() {
    let dir = tempfile::tempdir().unwrap();
    let summary = dir.path().join("summary.csv");
    let curves = dir.path().join("curves.csv");
    let o = msgate(&[
        "chain-study",
        "--spacings-um",
        "4.5",
        "--n-min",
        "2",
        "--n-max",
        "4",
        "--domega-step-hz",
        "1000",
        "--out",
        summary.to_str().unwrap(),
        "--curves",
        curves.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let s = read(&summary);
    let rows = data_rows(&s);
    assert_eq!(rows.len(), 3);
    assert!(rows.iter().all(|r| r.ends_with(",ok")));
    assert_eq!(data_rows(&read(&curves)).len(), 3 * 21);
}

#[test]
fn parity_scan_rows() {
    let o = msgate(&["parity", "--phases", "64"]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert_eq!(data_rows(&text).len(), 64);
    let amp: f64 = text
        .lines()
        .find_map(|l| l.strip_prefix("# parity_amplitude: "))
        .unwrap()
        .parse()
        .unwrap();
    assert!(amp >= 1.0 - 1e-6);
}

#[test]
fn oracle_single_mode() {
    let o = msgate(&["oracle", "--modes", "3", "--n-max", "8"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    assert!(field(&text, "overlap") >= 1.0 - 1e-6);
    assert!(text.contains("propagator_sign = \"exp(-i B S^2)\""));

    let o = msgate(&["oracle", "--n-max", "3"]);
    assert!(!o.status.success());
}
