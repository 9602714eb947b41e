use std::path::Path;
use std::process::{Command, Output};

use macsi_core::{build_useless_channel, build_x1_disconnected_channel, save_channel, Channel};

fn macsi(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_macsi"))
        .args(args)
        .env("MACSI_THREADS", "2")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

/// CSV rows without the manifest line.
fn csv_rows(text: &str) -> Vec<String> {
    text.lines().filter(|l| !l.starts_with("# manifest:")).map(str::to_string).collect()
}

fn manifest_of_csv(text: &str) -> serde_json::Value {
    let line = text.lines().next().unwrap();
    serde_json::from_str(line.strip_prefix("# manifest: ").unwrap()).unwrap()
}

#[test]
fn coop_on_examples_and_degenerate_channels() {
    let o = macsi(&["coop", "--example", "single"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.contains("sum=1.5000"), "{text}");

    let dir = tempfile::tempdir().unwrap();
    let useless = dir.path().join("useless.json");
    save_channel(&Channel::Single(build_useless_channel()), &useless).unwrap();
    let text = stdout(&macsi(&["coop", "--channel", path_str(&useless)]));
    assert!(text.contains("sum=0.0000"), "{text}");

    let disconnected = dir.path().join("x1.json");
    save_channel(&Channel::Single(build_x1_disconnected_channel()), &disconnected).unwrap();
    let text = stdout(&macsi(&["coop", "--channel", path_str(&disconnected)]));
    assert!(text.contains("user1=0.0000"), "{text}");
    assert!(text.contains("user2=1.0000"), "{text}");
}

#[test]
fn usage_and_data_errors() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("r.csv");
    let o = macsi(&["region", "--example", "single", "--bound", "thm3", "--out", path_str(&out)]);
    assert_eq!(o.status.code(), Some(2));
    assert!(!out.exists());

    assert_eq!(macsi(&["simulate", "--delta", "0.6"]).status.code(), Some(2));
    assert_eq!(macsi(&["simulate", "--n", "3"]).status.code(), Some(2));
    assert_eq!(macsi(&["region", "--bound", "thm1", "--out", path_str(&out)]).status.code(), Some(2));
    assert_eq!(macsi(&["no-such-command"]).status.code(), Some(2));

    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, r#"{"kind": "single", "alphabets": {}}"#).unwrap();
    assert_eq!(macsi(&["coop", "--channel", path_str(&bad)]).status.code(), Some(3));
    assert_eq!(macsi(&["coop", "--channel", "/nonexistent/channel.json"]).status.code(), Some(3));
}

#[test]
fn region_outputs_are_reproducible_and_agree() {
    let dir = tempfile::tempdir().unwrap();
    let csv1 = dir.path().join("a.csv");
    let csv2 = dir.path().join("b.csv");
    let json = dir.path().join("a.json");
    let common = ["region", "--example", "single", "--bound", "thm1", "--restarts", "6", "--seed", "3"];
    for out in [&csv1, &csv2, &json] {
        let mut args = common.to_vec();
        args.extend(["--out", path_str(out)]);
        let o = macsi(&args);
        assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    }
    let a = std::fs::read_to_string(&csv1).unwrap();
    let b = std::fs::read_to_string(&csv2).unwrap();
    assert_eq!(csv_rows(&a), csv_rows(&b));
    assert_eq!(csv_rows(&a)[0], "r1,r2,source_seed,bound");

    let j: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&json).unwrap()).unwrap();
    assert_eq!(j["manifest"]["subcommand"], "region");
    let mut from_json: Vec<String> = j["points"]
        .as_array()
        .unwrap()
        .iter()
        .map(|p| {
            format!(
                "{:.6},{:.6},{},thm1",
                p["r1"].as_f64().unwrap().max(0.0) + 0.0,
                p["r2"].as_f64().unwrap().max(0.0) + 0.0,
                p["source_seed"].as_u64().unwrap()
            )
        })
        .collect();
    let mut from_csv: Vec<String> = csv_rows(&a)[1..].to_vec();
    from_json.sort();
    from_csv.sort();
    assert_eq!(from_json, from_csv);

    // rerunning from the embedded manifest gives the same rows
    let manifest = manifest_of_csv(&a);
    let mut args: Vec<String> = manifest["args"]
        .as_array()
        .unwrap()
        .iter()
        .map(|v| v.as_str().unwrap().to_string())
        .collect();
    let out_pos = args.iter().position(|a| a == "--out").unwrap();
    let rerun = dir.path().join("rerun.csv");
    args[out_pos + 1] = path_str(&rerun).to_string();
    let refs: Vec<&str> = args.iter().map(String::as_str).collect();
    assert_eq!(macsi(&refs).status.code(), Some(0));
    assert_eq!(csv_rows(&std::fs::read_to_string(&rerun).unwrap()), csv_rows(&a));
}

#[test]
fn thm1_at_full_r1_rate() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("t1.csv");
    let o = macsi(&[
        "region", "--example", "single", "--bound", "thm1", "--r1-grid", "1.0:1.0:1", "--restarts", "40", "--seed",
        "7", "--out", path_str(&out),
    ]);
    assert_eq!(o.status.code(), Some(0));
    let text = std::fs::read_to_string(&out).unwrap();
    let best = csv_rows(&text)[1..]
        .iter()
        .filter_map(|row| {
            let f: Vec<&str> = row.split(',').collect();
            let (r1, r2): (f64, f64) = (f[0].parse().unwrap(), f[1].parse().unwrap());
            (r1 >= 0.999).then_some(r2)
        })
        .fold(0.0f64, f64::max);
    assert!(best <= 0.02, "{best}");
}

#[test]
fn simulate_writes_report() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("sim.json");
    let o = macsi(&["simulate", "--n", "2", "--blocks", "1", "--trials", "1", "--out", path_str(&out)]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    assert!(text.starts_with("R1=0.500000 R2="), "{text}");
    assert!(text.contains(" err=") && text.contains(" ovf="));
    let j: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    for key in ["config", "empirical_R1", "empirical_R2", "block_error_rate", "overflow_rate", "trials", "manifest"] {
        assert!(j.get(key).is_some(), "missing {key}");
    }
    assert_eq!(j["trials"].as_array().unwrap().len(), 1);

    let o = macsi(&["simulate", "--n", "200", "--blocks", "3", "--trials", "5", "--genie"]);
    assert!(stdout(&o).contains("err=0.0000"));
}

#[test]
fn verify_examples_negative_control() {
    let o = macsi(&["verify-examples", "--corrupt-law", "--json"]);
    assert_eq!(o.status.code(), Some(1));
    let j: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    let c = j["items"].as_array().unwrap().iter().find(|i| i["id"] == "c").unwrap();
    assert_eq!(c["pass"], false);
    assert_eq!(j["all_pass"], false);
}

#[test]
fn verify_examples_default_run() {
    let o = macsi(&["verify-examples"]);
    let text = stdout(&o);
    assert_eq!(o.status.code(), Some(0), "{text}");
    assert_eq!(text.matches("PASS (").count(), 5, "{text}");
    assert!(text.contains("5/5 PASS"));
}
