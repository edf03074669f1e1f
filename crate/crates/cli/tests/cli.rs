use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn symred(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_symred"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs")
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn simulate_default_snakeboard() {
    let tmp = tempfile::tempdir().unwrap();
    let out = symred(&["simulate", "--out", "run"], tmp.path());
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let csv = fs::read_to_string(tmp.path().join("run/trajectory.csv")).unwrap();
    let mut lines = csv.lines();
    assert!(lines.next().unwrap().starts_with("t,x_1,"));
    assert_eq!(lines.count(), 1001);
    let report = json(&tmp.path().join("run/conservation.json"));
    assert!(report["momentum_map_drift"].as_f64().unwrap() <= 1e-9);
    assert_eq!(report["rows"], 1001);
}

#[test]
fn malformed_config_exits_two_and_names_key() {
    let tmp = tempfile::tempdir().unwrap();
    fs::write(
        tmp.path().join("bad.toml"),
        "problem = \"snakeboard\"\nradius = 2.0\n",
    )
    .unwrap();
    let out = symred(
        &["simulate", "--config", "bad.toml", "--out", "run"],
        tmp.path(),
    );
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("radius"));

    fs::write(tmp.path().join("bad.toml"), "h = \"small\"\n").unwrap();
    let out = symred(&["simulate", "--config", "bad.toml"], tmp.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("`h`"));

    let out = symred(&["simulate", "--set", "x0=[1.0, 2.0]"], tmp.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("x0"));
    assert!(!tmp.path().join("out").exists());
}

#[test]
fn reduce_compare_reports() {
    let tmp = tempfile::tempdir().unwrap();
    let out = symred(&["reduce-compare", "--out", "sb"], tmp.path());
    assert!(out.status.success());
    let r = json(&tmp.path().join("sb/comparison.json"));
    assert!(r["max_configuration_deviation"].as_f64().unwrap() <= 1e-6);
    assert_eq!(
        (r["full_dim"].as_u64(), r["reduced_dim"].as_u64()),
        (Some(10), Some(7))
    );
    let reduced = fs::read_to_string(tmp.path().join("sb/reduced.csv")).unwrap();
    assert!(reduced.starts_with("t,xbar_1,xbar_2,lambdabar_1,lambdabar_2,mutilde_1,mutilde_2,mutilde_3,xitilde_1,xitilde_2,xitilde_3,Hbar,g_1,g_2,g_3\n"));

    let out = symred(
        &["reduce-compare", "--problem", "rigid-body", "--out", "rb"],
        tmp.path(),
    );
    assert!(out.status.success());
    assert!(
        json(&tmp.path().join("rb/comparison.json"))["casimir_drift"]
            .as_f64()
            .unwrap()
            <= 1e-10
    );

    let out = symred(
        &[
            "reduce-compare",
            "--set",
            "lambda0=[0,0,0,0,0]",
            "--out",
            "zero",
        ],
        tmp.path(),
    );
    assert!(out.status.success());
    assert_eq!(
        json(&tmp.path().join("zero/comparison.json"))["max_configuration_deviation"].as_f64(),
        Some(0.0)
    );
}

#[test]
fn shoot_round_trip_converges_immediately() {
    let tmp = tempfile::tempdir().unwrap();
    let out = symred(&["shoot", "--out", "s"], tmp.path());
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let r = json(&tmp.path().join("s/shoot.json"));
    let results = r["results"].as_array().unwrap();
    assert_eq!(results.len(), 2);
    for res in results {
        assert_eq!(res["converged"], true);
        assert_eq!(res["iterations"], 1);
    }
    assert_eq!(results[0]["integrated_dim"], 10);
    assert_eq!(results[1]["integrated_dim"], 7);
}

#[test]
fn shoot_infeasible_exits_four() {
    let tmp = tempfile::tempdir().unwrap();
    let out = symred(
        &[
            "shoot",
            "--set",
            "mode=\"full\"",
            "--set",
            "t1=0.01",
            "--set",
            "x1=[50,-40,2,30,0.8]",
            "--set",
            "max_iter=20",
        ],
        tmp.path(),
    );
    assert_eq!(out.status.code(), Some(4));
    let r = json(&tmp.path().join("out/shoot.json"));
    assert!(r["results"][0]["error"].is_string());
}

#[test]
fn verify_passes_and_broken_action_fails() {
    let tmp = tempfile::tempdir().unwrap();
    let out = symred(&["verify", "--out", "ok"], tmp.path());
    assert!(out.status.success());
    assert_eq!(json(&tmp.path().join("ok/verify.json"))["passed"], true);
    let conn = json(&tmp.path().join("ok/connection.json"));
    assert_eq!(conn.as_array().unwrap().len(), 10);
    assert_eq!(conn[0]["a"].as_array().unwrap().len(), 3);

    let out = symred(
        &["verify", "--set", "broken_action=true", "--out", "bad"],
        tmp.path(),
    );
    assert_eq!(out.status.code(), Some(5));
    let r = json(&tmp.path().join("bad/verify.json"));
    assert_eq!(r["passed"], false);
    let dynamics = r["checks"]
        .as_array()
        .unwrap()
        .iter()
        .find(|c| c["name"] == "symmetry.dynamics")
        .unwrap();
    assert!(dynamics["max_residual"].as_f64().unwrap() > 1e-2);
}

#[test]
fn outputs_are_deterministic() {
    let tmp = tempfile::tempdir().unwrap();
    fs::write(
        tmp.path().join("run.toml"),
        "problem = \"heisenberg\"\nt1 = 0.5\nh = 0.01\n",
    )
    .unwrap();
    for dir in ["a", "b"] {
        assert!(symred(
            &["reduce-compare", "--config", "run.toml", "--out", dir],
            tmp.path()
        )
        .status
        .success());
    }
    for file in ["full.csv", "reduced.csv", "comparison.json"] {
        let a = fs::read(tmp.path().join("a").join(file)).unwrap();
        let b = fs::read(tmp.path().join("b").join(file)).unwrap();
        assert_eq!(a, b, "{file}");
    }
}

#[test]
fn list_names_built_ins() {
    let tmp = tempfile::tempdir().unwrap();
    let out = symred(&["list"], tmp.path());
    let text = String::from_utf8_lossy(&out.stdout);
    for name in [
        "snakeboard",
        "rigid-body",
        "heisenberg",
        "snakeboard-broken",
    ] {
        assert!(text.contains(name));
    }
}

#[test]
fn shipped_configs_run() {
    let configs = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    let tmp = tempfile::tempdir().unwrap();
    for name in ["snakeboard.toml", "rigid-body.toml", "heisenberg.toml"] {
        let path = configs.join(name);
        let out = symred(
            &[
                "reduce-compare",
                "--config",
                path.to_str().unwrap(),
                "--set",
                "t1=0.2",
                "--out",
                name,
            ],
            tmp.path(),
        );
        assert!(
            out.status.success(),
            "{name}: {}",
            String::from_utf8_lossy(&out.stderr)
        );
        assert!(
            json(&tmp.path().join(name).join("comparison.json"))["max_configuration_deviation"]
                .as_f64()
                .unwrap()
                < 1e-6
        );
    }
    let path = configs.join("snakeboard-shoot.toml");
    let out = symred(
        &[
            "shoot",
            "--config",
            path.to_str().unwrap(),
            "--set",
            "mode=\"full\"",
            "--out",
            "shoot",
        ],
        tmp.path(),
    );
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
}
