use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use alphacomp::dirichlet::{self, DirichletParams};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_alphacomp"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("spawn alphacomp")
}

fn write_dirichlet(dir: &Path, name: &str, gamma: &[f64], n: usize, seed: u64) -> PathBuf {
    let p = DirichletParams::new(gamma.to_vec()).unwrap();
    let rows = dirichlet::sample(&p, n, seed);
    let mut text = (1..=gamma.len()).map(|j| format!("p{j}")).collect::<Vec<_>>().join(",");
    text.push('\n');
    for r in rows {
        let cells: Vec<String> = r.as_slice().iter().map(|v| format!("{v}")).collect();
        text.push_str(&cells.join(","));
        text.push('\n');
    }
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path
}

fn read_csv(path: &Path) -> (Vec<String>, Vec<Vec<f64>>) {
    let text = std::fs::read_to_string(path).unwrap();
    let mut lines = text.lines();
    let header = lines.next().unwrap().split(',').map(str::to_string).collect();
    let rows = lines
        .map(|l| l.split(',').map(|c| c.parse().unwrap()).collect())
        .collect();
    (header, rows)
}

fn report_value(text: &str, key: &str) -> String {
    text.lines()
        .find_map(|l| l.strip_prefix(&format!("{key}: ")))
        .unwrap_or_else(|| panic!("no {key} in\n{text}"))
        .to_string()
}

#[test]
fn transform_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let input = write_dirichlet(dir.path(), "x.csv", &[2.0, 3.0, 0.7, 5.0], 50, 1);
    let (_, orig) = read_csv(&input);
    for alpha in ["0.01", "-0.01", "0.5", "1", "-0.8"] {
        let fwd = dir.path().join("u.csv");
        let back = dir.path().join("x2.csv");
        let i = input.to_str().unwrap();
        assert!(run(&["transform", "-i", i, "--alpha", alpha, "-o", fwd.to_str().unwrap()]).status.success());
        let out = run(&[
            "transform", "-i", fwd.to_str().unwrap(), "--alpha", alpha, "--inverse", "-o",
            back.to_str().unwrap(),
        ]);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
        let (_, got) = read_csv(&back);
        for (a, b) in orig.iter().zip(&got) {
            for (x, y) in a.iter().zip(b) {
                assert!((x - y).abs() < 1e-9, "alpha {alpha}: {x} vs {y}");
            }
        }
    }
}

#[test]
fn clr_rows_sum_to_zero() {
    let dir = tempfile::tempdir().unwrap();
    let input = write_dirichlet(dir.path(), "x.csv", &[1.0, 2.0, 3.0], 20, 2);
    let out = dir.path().join("w.csv");
    assert!(run(&["transform", "-i", input.to_str().unwrap(), "--clr", "-o", out.to_str().unwrap()])
        .status
        .success());
    let (header, rows) = read_csv(&out);
    assert_eq!(header, ["clr_p1", "clr_p2", "clr_p3"]);
    for r in rows {
        assert!(r.iter().sum::<f64>().abs() < 1e-12);
    }
}

#[test]
fn profile_has_one_row_per_grid_point() {
    let dir = tempfile::tempdir().unwrap();
    let input = write_dirichlet(dir.path(), "x.csv", &[2.0, 3.0, 4.0], 40, 3);
    let out = dir.path().join("p.csv");
    let o = run(&["profile", "-i", input.to_str().unwrap(), "--grid", "30", "-o", out.to_str().unwrap()]);
    assert!(o.status.success());
    let (header, rows) = read_csv(&out);
    assert_eq!(header, ["alpha", "profile_loglik", "gamma_p1", "gamma_p2", "gamma_p3"]);
    assert_eq!(rows.len(), 30);
}

#[test]
fn fit_recovers_alpha_one() {
    let dir = tempfile::tempdir().unwrap();
    let input = write_dirichlet(dir.path(), "x.csv", &[2.0, 5.0, 3.0, 1.5], 2000, 4);
    let o = run(&["fit", "-i", input.to_str().unwrap(), "--alpha-min", "-1.5", "--alpha-max", "1.5"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = String::from_utf8(o.stdout).unwrap();
    let alpha: f64 = report_value(&text, "alpha_hat").parse().unwrap();
    assert!((alpha - 1.0).abs() < 0.15, "alpha_hat = {alpha}");
    assert_eq!(report_value(&text, "converged"), "true");
    assert!(!text.contains("wall_time_secs"));
}

#[test]
fn outputs_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let input = write_dirichlet(dir.path(), "x.csv", &[2.0, 3.0, 4.0], 60, 5);
    let i = input.to_str().unwrap();
    for args in [
        vec!["fit", "-i", i, "--grid", "20"],
        vec!["profile", "-i", i, "--grid", "12"],
        vec!["compare", "-i", i, "--grid", "20"],
        vec!["asymptotic", "-i", i, "--alpha", "0.2"],
    ] {
        let a = run(&args);
        let b = run(&args);
        assert!(a.status.success(), "{args:?}");
        assert_eq!(a.stdout, b.stdout, "{args:?}");
    }
    let cfg = dir.path().join("s.cfg");
    std::fs::write(&cfg, "study = curve\nmode = general\nb_vec = 1.1, 1.3, 0.6\nalphas = 0.5, 0.1\nn = 300\nseed = 3\n").unwrap();
    let a = run(&["simulate", "-c", cfg.to_str().unwrap()]);
    let b = run(&["simulate", "-c", cfg.to_str().unwrap()]);
    let c = run(&["simulate", "-c", cfg.to_str().unwrap(), "--seed", "4"]);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    assert_ne!(a.stdout, c.stdout);
}

#[test]
fn timing_is_opt_in() {
    let dir = tempfile::tempdir().unwrap();
    let input = write_dirichlet(dir.path(), "x.csv", &[2.0, 3.0], 30, 6);
    let o = run(&["fit", "-i", input.to_str().unwrap(), "--grid", "10", "--timing"]);
    assert!(String::from_utf8(o.stdout).unwrap().contains("wall_time_secs: "));
}

#[test]
fn verify_passes() {
    let o = run(&["verify"]);
    let text = String::from_utf8(o.stdout).unwrap();
    assert!(o.status.success(), "{text}");
    assert_eq!(text.lines().filter(|l| l.starts_with("[PASS]")).count(), 5);
}

#[test]
fn exit_codes_follow_error_category() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("nope.csv");
    assert_eq!(run(&["fit", "-i", missing.to_str().unwrap()]).status.code(), Some(2));

    let bad = dir.path().join("bad.csv");
    std::fs::write(&bad, "a,b\n0.5,0.5\n0.5,oops\n").unwrap();
    let o = run(&["fit", "-i", bad.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("row"));

    let zeros = dir.path().join("z.csv");
    std::fs::write(&zeros, "a,b,c\n0.5,0.5,0\n0.2,0.3,0.5\n").unwrap();
    assert_eq!(run(&["transform", "-i", zeros.to_str().unwrap(), "--alpha", "0.5"]).status.code(), Some(2));
    assert_eq!(
        run(&["transform", "-i", zeros.to_str().unwrap(), "--alpha", "0.5", "--zero-policy", "replace", "--renormalize"])
            .status
            .code(),
        Some(0)
    );

    let same = dir.path().join("same.csv");
    std::fs::write(&same, "a,b,c\n0.2,0.3,0.5\n0.2,0.3,0.5\n0.2,0.3,0.5\n").unwrap();
    assert_eq!(run(&["profile", "-i", same.to_str().unwrap(), "--grid", "10"]).status.code(), Some(4));

    let cfg = dir.path().join("s.cfg");
    std::fs::write(&cfg, "mode = general\nb_vec = 1, 2\n").unwrap();
    assert_eq!(run(&["simulate", "-c", cfg.to_str().unwrap()]).status.code(), Some(2));

    let ok = write_dirichlet(dir.path(), "ok.csv", &[2.0, 3.0, 4.0], 20, 7);
    assert_eq!(run(&["fit", "-i", ok.to_str().unwrap(), "--dataset", "mammals"]).status.code(), Some(2));
    assert_eq!(run(&["fit", "-i", ok.to_str().unwrap(), "--grid", "3"]).status.code(), Some(3));
}
