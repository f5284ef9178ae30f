use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn calib(args: &[&str], env_seed: Option<&str>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_calib"));
    cmd.args(args).env_remove("CALIB_SEED");
    if let Some(s) = env_seed {
        cmd.env("CALIB_SEED", s);
    }
    cmd.output().expect("binary runs")
}

fn json(out: &Output) -> Value {
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("valid JSON")
}

fn path(dir: &TempDir, name: &str) -> String {
    dir.path().join(name).to_str().unwrap().to_string()
}

fn write(dir: &TempDir, name: &str, text: &str) -> String {
    let p = path(dir, name);
    std::fs::write(Path::new(&p), text).unwrap();
    p
}

#[test]
fn report_on_csv() {
    let dir = TempDir::new().unwrap();
    let csv = write(&dir, "d.csv", "prediction,label\n0.4,0\n0.6,1\n");
    let v = json(&calib(&["report", &csv, "--measures", "ece,tv,smce,cdl,emd", "--verify-relations"], None));
    assert_eq!(v["schema"], 1);
    assert!((v["measures"]["ece"].as_f64().unwrap() - 0.4).abs() < 1e-12);
    assert!((v["measures"]["smce"].as_f64().unwrap() - 0.04).abs() < 1e-12);
    assert_eq!(v["meta"]["input_sha256"].as_str().unwrap().len(), 64);
    for check in v["relations"].as_object().unwrap().values() {
        assert_eq!(check["holds"], true);
    }
}

#[test]
fn jsonl_and_csv_agree() {
    let dir = TempDir::new().unwrap();
    let csv = write(&dir, "d.csv", "prediction,label,weight\n0.2,0,1\n0.2,1,3\n0.9,1,2\n");
    let jsonl = write(
        &dir,
        "d.jsonl",
        "{\"p\":0.2,\"y\":0,\"w\":1}\n{\"p\":0.2,\"y\":1,\"w\":3}\n{\"p\":0.9,\"y\":1,\"w\":2}\n",
    );
    let a = json(&calib(&["report", &csv, "--measures", "ece,smce,cdl"], None));
    let b = json(&calib(&["report", &jsonl, "--measures", "ece,smce,cdl"], None));
    assert_eq!(a["measures"], b["measures"]);
}

#[test]
fn exit_codes() {
    let dir = TempDir::new().unwrap();
    let good = write(&dir, "d.csv", "prediction,label\n0.4,0\n0.6,1\n");
    let bad = write(&dir, "bad.csv", "prediction,label\n1.5,0\n");
    let unknown = calib(&["report", &good, "--measures", "nonsense"], None);
    assert_eq!(unknown.status.code(), Some(3));
    assert_eq!(calib(&["report", &bad], None).status.code(), Some(2));
    let missing = path(&dir, "absent.csv");
    assert_eq!(calib(&["report", &missing], None).status.code(), Some(2));

    let big = path(&dir, "big.json");
    calib(&["fixture", "--name", "cdl_example_2", "--eps", "0.05", "--n", "100", "--emit", &big], None);
    assert_eq!(calib(&["oracle", &big], None).status.code(), Some(4));
    // dce needs a feature-space instance
    assert_eq!(calib(&["report", &good, "--measures", "dce"], None).status.code(), Some(2));
}

#[test]
fn fixture_round_trip() {
    let dir = TempDir::new().unwrap();
    let inst = path(&dir, "tp.json");
    let meta = json(&calib(&["fixture", "--name", "two_point", "--eps", "0.1", "--emit", &inst], None));
    assert!(meta.get("instance").is_none());
    assert_eq!(meta["emitted"], inst.as_str());
    let ids: Vec<&str> = meta["expected"].as_object().unwrap().keys().map(|k| k.as_str()).collect();
    let report = json(&calib(&["report", &inst, "--measures", &ids.join(",")], None));
    for (id, want) in meta["expected"].as_object().unwrap() {
        let got = report["measures"][id].as_f64().unwrap();
        assert!(
            want["min"].as_f64().unwrap() <= got && got <= want["max"].as_f64().unwrap(),
            "{id} = {got}"
        );
    }

    let csv = path(&dir, "tp.csv");
    calib(&["fixture", "--name", "two_point", "--eps", "0.1", "--emit", &csv, "--format", "csv"], None);
    let from_csv = json(&calib(&["report", &csv, "--measures", "ece,smce"], None));
    assert_eq!(from_csv["measures"]["ece"], report["measures"]["ece"]);
}

#[test]
fn oracle_report() {
    let dir = TempDir::new().unwrap();
    let inst = path(&dir, "near.json");
    calib(&["fixture", "--name", "quadratic_gap_near", "--eps", "0.1", "--emit", &inst], None);
    let v = json(&calib(&["oracle", &inst], None));
    assert!((v["dce"].as_f64().unwrap() - 0.025).abs() < 1e-12);
    for check in v["sandwich_checks"].as_object().unwrap().values() {
        assert_eq!(check["holds"], true);
    }
}

#[test]
fn seed_precedence() {
    let dir = TempDir::new().unwrap();
    let cfg = write(&dir, "c.toml", "seed = 7\ngrid = 50\n");
    let base = ["online", "--forecaster", "grid_random:4", "--adversary", "bernoulli:0.5", "-T", "50"];
    let seed_of = |extra: &[&str], env: Option<&str>| {
        let args: Vec<&str> = base.iter().chain(extra).copied().collect();
        json(&calib(&args, env))["seed"].as_u64().unwrap()
    };
    assert_eq!(seed_of(&[], None), 0);
    assert_eq!(seed_of(&[], Some("5")), 5);
    assert_eq!(seed_of(&["--config", &cfg], Some("5")), 7);
    assert_eq!(seed_of(&["--config", &cfg, "--seed", "9"], Some("5")), 9);
    assert_eq!(calib(&base, Some("x")).status.code(), Some(2));
}

#[test]
fn knob_precedence() {
    let dir = TempDir::new().unwrap();
    let csv = write(&dir, "d.csv", "prediction,label\n0.4,0\n0.6,1\n");
    let cfg = write(&dir, "c.toml", "grid = 50\n");
    let grid = |extra: &[&str]| {
        let mut args = vec!["report", csv.as_str(), "--measures", "intce"];
        args.extend_from_slice(extra);
        json(&calib(&args, None))["meta"]["config"]["grid"].as_u64().unwrap()
    };
    assert_eq!(grid(&[]), 1000);
    assert_eq!(grid(&["--config", &cfg]), 50);
    assert_eq!(grid(&["--config", &cfg, "--grid", "20"]), 20);
    let typo = write(&dir, "typo.toml", "gird = 50\n");
    let out = calib(&["report", &csv, "--config", &typo], None);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn online_against_threshold() {
    let v = json(&calib(
        &["online", "--forecaster", "constant:0.5", "--adversary", "threshold", "-T", "200"],
        None,
    ));
    assert!(v["measures"]["ece"].as_f64().unwrap() >= 100.0);
    assert_eq!(v["curves"]["stride"], 2);
    assert_eq!(v["curves"]["t"].as_array().unwrap().len(), 100);
    let randomized = calib(&["online", "--forecaster", "grid_random:4", "--adversary", "threshold", "-T", "10"], None);
    assert_eq!(randomized.status.code(), Some(2));
}

#[test]
fn plotdata_outputs() {
    let dir = TempDir::new().unwrap();
    let csv = write(&dir, "d.csv", "prediction,label\n0.4,0\n0.4,1\n0.6,1\n");
    let rel = calib(&["plotdata", "reliability", &csv], None);
    let text = String::from_utf8(rel.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("prediction,empirical_mean,mass"));
    assert_eq!(lines.count(), 2);

    let tr = calib(&["plotdata", "transcript", "--forecaster", "constant:0.5", "--adversary", "alternating", "-T", "5"], None);
    assert_eq!(String::from_utf8(tr.stdout).unwrap().lines().count(), 6);

    let cv = calib(
        &["plotdata", "curves", "--forecaster", "running_mean", "--adversary", "ones", "-T", "20", "--stride", "5", "--measures", "ece,cdl"],
        None,
    );
    let text = String::from_utf8(cv.stdout).unwrap();
    assert!(text.starts_with("t,ece,cdl\n"), "{text}");
    assert_eq!(text.lines().count(), 5);
}
