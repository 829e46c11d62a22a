mod common;

use std::path::Path;
use std::process::Command;

use common::{config, insect_params};
use proptest::prelude::*;
use seasonal_threshold::scenario::{InsectPair, Scenario, ScenarioMode, SplitSpec, ThetaGrid, Tolerances};
use seasonal_threshold::split::SplitMode;

const BIN: &str = env!("CARGO_BIN_EXE_seasonal-threshold");
const RUNNING: &str = r#"{
  "mode": "insect",
  "insect": {
    "piU": {"b": 1, "h": 0.5, "dJ": 1, "cJ": 1, "dA": 1},
    "piF": {"b": 2, "h": 1, "dJ": 0.5, "cJ": 1, "dA": 0.5}
  },
  "theta": 0.3,
  "split": {"K": 2, "resolution": 12}
}"#;

fn run(dir: &Path, scenario: &str, args: &[&str]) -> std::process::Output {
    let path = dir.join("scenario.json");
    std::fs::write(&path, scenario).unwrap();
    Command::new(BIN)
        .args(args)
        .arg("--scenario")
        .arg(&path)
        .arg("--out")
        .arg(dir.join("out"))
        .output()
        .unwrap()
}

#[test]
fn commands_succeed_and_are_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    for (cmd, file) in [
        ("floquet", "sweep.csv"),
        ("threshold", "threshold.json"),
        ("check", "conditions.json"),
        ("simulate", "trajectory.csv"),
        ("poincare", "poincare.json"),
        ("split", "split.json"),
    ] {
        let first = run(dir.path(), RUNNING, &[cmd, "--periods", "3"]);
        assert!(first.status.success(), "{cmd}: {}", String::from_utf8_lossy(&first.stderr));
        let a = std::fs::read(dir.path().join("out").join(file)).unwrap();
        let second = run(dir.path(), RUNNING, &[cmd, "--periods", "3"]);
        assert!(second.status.success());
        let b = std::fs::read(dir.path().join("out").join(file)).unwrap();
        assert_eq!(a, b, "{cmd} output differs between runs");
        assert_eq!(first.stdout, second.stdout);
    }
}

#[test]
fn threshold_summary_on_running_pair() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(dir.path(), RUNNING, &["threshold"]);
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("regime: interior_root"), "{text}");
}

#[test]
fn check_summary_on_running_pair() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(dir.path(), RUNNING, &["check"]);
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("HYP4    holds"), "{text}");
    assert!(text.contains("THM3    holds"), "{text}");
    assert!(text.contains("HYP10   fails"), "{text}");
}

#[test]
fn flags_override_the_scenario() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(dir.path(), RUNNING, &["floquet", "--grid", "5", "--with-simulation"]);
    assert!(out.status.success());
    let csv = std::fs::read_to_string(dir.path().join("out/sweep.csv")).unwrap();
    assert_eq!(csv.lines().count(), 6);
    assert!(csv.starts_with("theta,rho,rho_prime,rho_second,classification,lambda_simulated,error\n"));
}

#[test]
fn structural_errors_exit_nonzero() {
    let dir = tempfile::tempdir().unwrap();
    let bad = RUNNING.replace(r#""dA": 0.5"#, r#""dA": -0.5"#);
    let out = run(dir.path(), &bad, &["floquet"]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("insect.piF.dA"));

    let no_theta = RUNNING.replace(r#""theta": 0.3,"#, "");
    let out = run(dir.path(), &no_theta, &["poincare"]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("`theta`"));

    let out = run(dir.path(), r#"{"mode": "matrices"}"#, &["floquet"]);
    assert!(!out.status.success());
}

fn scenario() -> impl Strategy<Value = Scenario> {
    (
        insect_params(),
        insect_params(),
        0.1f64..10.0,
        prop::option::of(0.0f64..=1.0),
        prop::option::of(prop_oneof![
            (2usize..300).prop_map(ThetaGrid::Count),
            prop::collection::vec(0.0f64..=1.0, 1..10).prop_map(ThetaGrid::List),
        ]),
        prop::option::of((1usize..5, 1usize..60, prop::bool::ANY)),
        prop::option::of(1e-6f64..1e-2),
    )
        .prop_map(|(u, f, period, theta, grid, split, step)| Scenario {
            mode: ScenarioMode::Insect,
            period,
            insect: Some(InsectPair { pi_u: u, pi_f: f }),
            matrices: None,
            theta,
            theta_grid: grid,
            tolerances: Tolerances { ode_step: step, ..Tolerances::default() },
            split: split.map(|(k, resolution, max)| SplitSpec {
                k,
                resolution,
                mode: if max { SplitMode::Max } else { SplitMode::Min },
            }),
        })
}

proptest! {
    #![proptest_config(config(100))]

    #[test]
    fn scenarios_round_trip(s in scenario()) {
        let back = Scenario::from_json(&s.to_json().unwrap()).unwrap();
        prop_assert_eq!(back, s);
    }
}
