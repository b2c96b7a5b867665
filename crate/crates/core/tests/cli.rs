use std::path::Path;
use std::process::Command;

use serde_json::Value;

fn isolab(out: &Path, args: &[&str], env: &[(&str, &str)]) -> (i32, String) {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_isolab"));
    cmd.arg("--out").arg(out).args(args);
    for (k, v) in env {
        cmd.env(k, v);
    }
    let o = cmd.output().expect("binary runs");
    (o.status.code().unwrap_or(-1), String::from_utf8_lossy(&o.stdout).into_owned() + &String::from_utf8_lossy(&o.stderr))
}

fn summary(dir: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(dir.join("summary.json")).unwrap()).unwrap()
}

#[test]
fn bray_chart_reports_alpha() {
    let d = tempfile::tempdir().unwrap();
    let (code, log) = isolab(d.path(), &["--subcommand", "bray-chart"], &[("ISOLAB_LADDER__RADII", "100")]);
    assert_eq!(code, 0, "{log}");
    let s = summary(d.path());
    let alpha = s["report"]["charts"][0]["alpha"].as_f64().unwrap();
    assert!((alpha - 0.98674).abs() < 2e-5, "{alpha}");
    assert!(d.path().join("bray_chart.csv").exists() && d.path().join("chart_0.txt").exists());
}

#[test]
fn euclidean_translation_seed_converges() {
    let d = tempfile::tempdir().unwrap();
    let env = [("ISOLAB_MANIFOLD__MASS", "0"), ("ISOLAB_CMC__SEED_DEGREE", "1"), ("ISOLAB_GRID__MODE", "full"), ("ISOLAB_LADDER__RADII", "10")];
    let (code, log) = isolab(d.path(), &["--subcommand", "cmc-solve"], &env);
    assert_eq!(code, 0, "{log}");
    let r = &summary(d.path())["report"];
    assert!(r["residual"].as_f64().unwrap() <= 1e-10);
    assert!(r["sup_h_ring"].as_f64().unwrap() < 1e-9);
    assert!(r["sup_u"].as_f64().unwrap() > 0.1);
}

#[test]
fn configuration_errors_exit_two() {
    let d = tempfile::tempdir().unwrap();
    let cfg = d.path().join("bad.cfg");
    for text in ["command = bray-chart\nmanifold.n = 2\n", "[manifold]\ngamma = 1.5\n", "command = iso-mass\n[manifold]\nn = 4\n", "no_such_key = 3\n", "garbage line\n"] {
        std::fs::write(&cfg, text).unwrap();
        let (code, log) = isolab(&d.path().join("o"), &["--config", cfg.to_str().unwrap()], &[]);
        assert_eq!(code, 2, "{text}: {log}");
    }
    let (code, _) = isolab(d.path(), &["--subcommand", "not-a-command"], &[]);
    assert_eq!(code, 2);
    let (code, _) = isolab(d.path(), &["--config", "/nonexistent/isolab.cfg"], &[]);
    assert_eq!(code, 2);
}

#[test]
fn numerical_failure_writes_record() {
    let d = tempfile::tempdir().unwrap();
    // r inside the horizon: the matching problem has no solution
    let (code, log) = isolab(d.path(), &["--subcommand", "bray-chart"], &[("ISOLAB_LADDER__RADII", "0.5")]);
    assert_eq!(code, 1, "{log}");
    let rec: Value = serde_json::from_str(&std::fs::read_to_string(d.path().join("failure.json")).unwrap()).unwrap();
    assert_eq!(rec["kind"], "refused");
    assert_eq!(rec["exit_code"], 1);
    assert_eq!(rec["command"], "bray-chart");
}

#[test]
fn validate_only_prints_resolved_config() {
    let d = tempfile::tempdir().unwrap();
    let (code, log) = isolab(d.path(), &["--subcommand", "foliation-sweep", "--validate"], &[("ISOLAB_MANIFOLD__MASS", "1.5")]);
    assert_eq!(code, 0);
    assert!(log.contains("manifold.mass = 1.5") && log.contains("command = foliation-sweep"), "{log}");
}

#[test]
fn summaries_round_trip() {
    let d = tempfile::tempdir().unwrap();
    for cmd in ["report-geometry", "hawking-profile", "jacobi-spectrum", "iso-mass"] {
        let dir = d.path().join(cmd);
        let (code, log) = isolab(&dir, &["--subcommand", cmd], &[]);
        assert_eq!(code, 0, "{cmd}: {log}");
        let text = std::fs::read_to_string(dir.join("summary.json")).unwrap();
        let v: Value = serde_json::from_str(&text).unwrap();
        let again: Value = serde_json::from_str(&serde_json::to_string(&v).unwrap()).unwrap();
        assert_eq!(again, v, "{cmd}");
        assert_eq!(v["passed"], true);
    }
}

#[test]
fn runs_are_byte_identical() {
    let d = tempfile::tempdir().unwrap();
    let run = |name: &str| {
        let dir = d.path().join(name);
        let env = [("ISOLAB_LADDER__RADII", "50,100"), ("ISOLAB_PERTURBATION__AMPLITUDE", "0.5"), ("ISOLAB_PERTURBATION__PARITY", "odd")];
        let (code, log) = isolab(&dir, &["--subcommand", "foliation-sweep", "--threads", "2"], &env);
        assert_eq!(code, 0, "{log}");
        (std::fs::read(dir.join("foliation.csv")).unwrap(), std::fs::read(dir.join("summary.json")).unwrap())
    };
    assert_eq!(run("a"), run("b"));
}

#[test]
fn acceptance_csv_is_deterministic() {
    let d = tempfile::tempdir().unwrap();
    let run = |name: &str| {
        let dir = d.path().join(name);
        let (code, log) = isolab(&dir, &["--subcommand", "acceptance"], &[]);
        assert_eq!(code, 0, "{log}");
        assert!(log.lines().filter(|l| l.starts_with("criterion")).count() == 10);
        (std::fs::read(dir.join("acceptance.csv")).unwrap(), std::fs::read(dir.join("acceptance_metrics.csv")).unwrap())
    };
    assert_eq!(run("a"), run("b"));
}
