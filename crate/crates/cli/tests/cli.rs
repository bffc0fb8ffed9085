use orbit_entangle::amplitudes::{inertial_a, inertial_x};
use serde_json::Value;
use std::path::Path;
use std::process::{Command, Output};
use tempfile::TempDir;

fn run(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_orbit-entangle"))
        .args(args)
        .arg("--out")
        .arg(dir)
        .env_remove("ORBIT_ENTANGLE_THREADS")
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

fn csv(path: &Path) -> (Vec<String>, Vec<Vec<String>>) {
    let mut r = csv::Reader::from_path(path).unwrap();
    let header = r.headers().unwrap().iter().map(String::from).collect();
    let rows = r
        .records()
        .map(|rec| rec.unwrap().iter().map(String::from).collect())
        .collect();
    (header, rows)
}

fn column(header: &[String], rows: &[Vec<String>], name: &str) -> Vec<f64> {
    let i = header.iter().position(|h| h == name).unwrap();
    rows.iter().map(|r| r[i].parse().unwrap()).collect()
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn poles_table_has_special_root_plus_two_branches() {
    let tmp = TempDir::new().unwrap();
    let o = run(tmp.path(), &["poles", "--beta", "0.5", "--kind", "A", "--kmax", "10"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let (h, rows) = csv(&tmp.path().join("poles.csv"));
    assert_eq!(h, ["kind", "branch", "k", "re", "im", "residual"]);
    assert_eq!(rows.len(), 21);
    assert!(column(&h, &rows, "residual").iter().all(|&r| r <= 1e-12));
    // values carry 17 significant digits
    assert!(rows[1][3].split('e').next().unwrap().trim_start_matches('-').len() == 18);
}

#[test]
fn out_of_range_beta_is_a_validation_error() {
    let tmp = TempDir::new().unwrap();
    let o = run(tmp.path(), &["poles", "--beta", "1.5"]);
    assert_eq!(code(&o), 1);
    assert!(String::from_utf8_lossy(&o.stderr).contains("beta"));
    assert_eq!(code(&run(tmp.path(), &["poles", "--beta", "0.5", "--no-such-flag"])), 1);
    assert_eq!(code(&run(tmp.path(), &["amplitudes", "--r", "1", "--omega", "1"])), 1);
}

#[test]
fn config_file_values_are_overridden_by_flags() {
    let tmp = TempDir::new().unwrap();
    let cfg = tmp.path().join("run.toml");
    std::fs::write(&cfg, "emit = [\"csv\"]\n[poles]\nbeta = 0.5\nkind = \"X\"\nkmax = 3\n").unwrap();
    let cfg_s = cfg.to_str().unwrap();
    assert_eq!(code(&run(tmp.path(), &["poles", "--config", cfg_s])), 0);
    let (_, rows) = csv(&tmp.path().join("poles.csv"));
    assert_eq!(rows.len(), 7);
    assert_eq!(rows[0][0], "X");
    assert!(!tmp.path().join("poles.json").exists());

    assert_eq!(code(&run(tmp.path(), &["poles", "--config", cfg_s, "--kmax", "4"])), 0);
    assert_eq!(csv(&tmp.path().join("poles.csv")).1.len(), 9);

    std::fs::write(&cfg, "[poles]\nbeta = 0.5\nbogus = 1\n").unwrap();
    assert_eq!(code(&run(tmp.path(), &["poles", "--config", cfg_s])), 1);
}

#[test]
fn thread_variable_is_validated() {
    let tmp = TempDir::new().unwrap();
    let go = |v: &str| {
        Command::new(env!("CARGO_BIN_EXE_orbit-entangle"))
            .args(["poles", "--beta", "0.5", "--out"])
            .arg(tmp.path())
            .env("ORBIT_ENTANGLE_THREADS", v)
            .output()
            .unwrap()
    };
    assert_eq!(code(&go("2")), 0);
    assert_eq!(code(&go("zero")), 1);
    assert_eq!(code(&go("0")), 1);
}

#[test]
fn region_reruns_are_byte_identical() {
    let args = [
        "region", "--r", "0.1:2:7", "--y", "0.1:2:6", "--alpha", "0:2:3", "--emit", "csv,json",
    ];
    let (a, b) = (TempDir::new().unwrap(), TempDir::new().unwrap());
    assert_eq!(code(&run(a.path(), &args)), 0);
    assert_eq!(code(&run(b.path(), &args)), 0);
    for f in ["region.csv", "region.json"] {
        assert_eq!(
            std::fs::read(a.path().join(f)).unwrap(),
            std::fs::read(b.path().join(f)).unwrap()
        );
    }
    assert_eq!(csv(&a.path().join("region.csv")).1.len(), 7 * 6 * 3);
}

#[test]
fn entangled_area_shrinks_with_alpha_on_default_grid() {
    let tmp = TempDir::new().unwrap();
    assert_eq!(code(&run(tmp.path(), &["region", "--emit", "json,svg"])), 0);
    let meta = json(&tmp.path().join("region.json"));
    let counts: Vec<u64> = meta["slices"]
        .as_array()
        .unwrap()
        .iter()
        .map(|s| s["entangled_points"].as_u64().unwrap())
        .collect();
    assert!(counts.len() >= 3);
    assert!(counts.windows(2).all(|w| w[1] < w[0]), "{counts:?}");
    assert!(tmp.path().join("region_alpha_000.svg").exists());
}

#[test]
fn near_inertial_slice_matches_inertial_boundary() {
    let tmp = TempDir::new().unwrap();
    let args = [
        "region",
        "--r",
        "0.05:3:30",
        "--y",
        "0.05:3:30",
        "--alpha",
        "1e-5:1e-5:1",
        "--emit",
        "csv",
    ];
    assert_eq!(code(&run(tmp.path(), &args)), 0);
    let (h, rows) = csv(&tmp.path().join("region.csv"));
    let (r, y) = (column(&h, &rows, "r"), column(&h, &rows, "y"));
    let ent_col = h.iter().position(|c| c == "entangled").unwrap();
    let mut checked = 0;
    for (i, row) in rows.iter().enumerate() {
        let (a0, x0) = (inertial_a(r[i], y[i]).unwrap(), inertial_x(r[i], y[i]).unwrap().norm());
        let margin = x0 - a0;
        // points on the boundary itself can go either way
        if margin.abs() > 1e-3 * a0.max(x0) {
            assert_eq!(row[ent_col] == "true", margin > 0.0, "r={} y={}", r[i], y[i]);
            checked += 1;
        }
    }
    assert!(checked > 800);
}

#[test]
fn dynamics_traces() {
    let tmp = TempDir::new().unwrap();
    let o = run(
        tmp.path(),
        &[
            "dynamics", "--omega", "1", "--accel", "0", "--gamma", "1", "--t-max", "50",
        ],
    );
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let (h, rows) = csv(&tmp.path().join("dynamics.csv"));
    assert!(column(&h, &rows, "concurrence").iter().all(|&c| c > 0.0));
    assert!(json(&tmp.path().join("dynamics.json"))["t_esd"].is_null());

    let o = run(
        tmp.path(),
        &[
            "dynamics",
            "--omega",
            "1",
            "--accel",
            "1e4",
            "--gamma",
            "1",
            "--eta0",
            "0.1",
            "--steps",
            "1000",
            "--lindblad",
        ],
    );
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let (h, rows) = csv(&tmp.path().join("dynamics.csv"));
    let i11 = h.iter().position(|c| c == "rho11").unwrap();
    let i22 = h.iter().position(|c| c == "rho22").unwrap();
    assert!(rows.iter().all(|r| r[i11] == r[i22]));
    let meta = json(&tmp.path().join("dynamics.json"));
    // t' = eta0^2 Omega t / gamma
    let t2_rescaled = meta["profile"]["t2"].as_f64().unwrap() * 0.01;
    let t = column(&h, &rows, "t_rescaled");
    let c = column(&h, &rows, "concurrence");
    let first_zero = t[c.iter().position(|&v| v == 0.0).unwrap()];
    let step = t[1] - t[0];
    assert!(
        (first_zero / t2_rescaled - 0.8814).abs() < step / t2_rescaled + 1e-3,
        "{}",
        first_zero / t2_rescaled
    );
    assert!(meta["lindblad_max_deviation"].as_f64().unwrap() < 1e-8);
}

#[test]
fn dynamics_reruns_are_byte_identical() {
    let args = ["dynamics", "--r", "1", "--y", "1", "--alpha", "2", "--steps", "50"];
    let (a, b) = (TempDir::new().unwrap(), TempDir::new().unwrap());
    assert_eq!(code(&run(a.path(), &args)), 0);
    assert_eq!(code(&run(b.path(), &args)), 0);
    for f in ["dynamics.csv", "dynamics.json", "dynamics.svg"] {
        assert_eq!(
            std::fs::read(a.path().join(f)).unwrap(),
            std::fs::read(b.path().join(f)).unwrap(),
            "{f}"
        );
    }
}

#[test]
fn surface_and_esd_curve() {
    let tmp = TempDir::new().unwrap();
    let args = ["concurrence-surface", "--ratio", "0.5:5:4", "--t", "0:4:5"];
    assert_eq!(code(&run(tmp.path(), &args)), 0);
    let (h, rows) = csv(&tmp.path().join("concurrence_surface.csv"));
    assert_eq!(rows.len(), 20);
    assert!(column(&h, &rows, "concurrence").iter().all(|c| (0.0..=1.0).contains(c)));

    assert_eq!(code(&run(tmp.path(), &["esd-curve", "--ratio", "1:1000:7:log"])), 0);
    let (h, rows) = csv(&tmp.path().join("esd_curve.csv"));
    let t = column(&h, &rows, "t_esd_over_t2");
    assert!(t.windows(2).all(|w| w[1] <= w[0]));
    assert!((t[t.len() - 1] - 0.8814).abs() < 1e-3);
}

#[test]
fn verify_passes_on_built_in_corpus() {
    let tmp = TempDir::new().unwrap();
    let o = run(tmp.path(), &["verify"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let report = json(&tmp.path().join("verify.json"));
    assert_eq!(report["failed"], 0);
    let fp = &report["fingerprints"];
    assert_eq!(fp["corpus"].as_array().unwrap(), &vec![fp["regulator"].clone()]);
    assert!(report["rows"]
        .as_array()
        .unwrap()
        .iter()
        .all(|r| r["rel_error"].is_f64()));
}

#[test]
fn perturbed_corpus_row_is_flagged() {
    let tmp = TempDir::new().unwrap();
    let text = orbit_entangle::corpus::EMBEDDED;
    let mut lines: Vec<String> = text.lines().map(String::from).collect();
    let i = lines
        .iter()
        .position(|l| l.split_whitespace().nth(3) == Some("X"))
        .unwrap();
    let mut parts: Vec<String> = lines[i].split_whitespace().map(String::from).collect();
    parts[4] = format!("{:.16e}", parts[4].parse::<f64>().unwrap() * 1.02);
    lines[i] = parts.join(" ");
    let path = tmp.path().join("corpus.txt");
    std::fs::write(&path, lines.join("\n")).unwrap();

    let o = run(tmp.path(), &["verify", "--corpus", path.to_str().unwrap()]);
    assert_eq!(code(&o), 3);
    let report = json(&tmp.path().join("verify.json"));
    let flagged: Vec<&Value> = report["rows"]
        .as_array()
        .unwrap()
        .iter()
        .filter(|r| r["pass"] == false)
        .collect();
    assert_eq!(flagged.len(), 1);
    assert_eq!(flagged[0]["quantity"], "X");
}
