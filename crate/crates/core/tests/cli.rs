use std::fs;
use std::path::Path;
use std::process::{Command, Output};

const BLOCKS: &str = "[environment]\n[chain]\n[cs]\n[dfe]\n[detector]\n";

fn hydrolink(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hydrolink"))
        .args(args)
        .current_dir(cwd)
        .env_remove("HYDROLINK_OUT_DIR")
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn header_value(csv: &str, key: &str) -> String {
    csv.lines()
        .find_map(|l| l.strip_prefix(&format!("# {key}: ")))
        .unwrap_or_else(|| panic!("no {key} header"))
        .to_string()
}

#[test]
fn missing_config_file_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let o = hydrolink(&["relay-sweep", "--config", "nope.toml"], dir.path());
    assert_eq!(o.status.code(), Some(3), "{}", stderr(&o));
}

#[test]
fn invalid_config_exits_4_with_field_and_line() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("range.toml"), "[environment]\nwind_w = -3.0\n[chain]\n[cs]\n[dfe]\n[detector]\n").unwrap();
    fs::write(dir.path().join("key.toml"), "[environment]\n[chain]\nbogus = 1\n[cs]\n[dfe]\n[detector]\n").unwrap();
    let o = hydrolink(&["validate", "--config", "range.toml"], dir.path());
    assert_eq!(o.status.code(), Some(4));
    assert!(stderr(&o).contains("environment.wind_w"), "{}", stderr(&o));
    let o = hydrolink(&["link-budget", "--config", "key.toml"], dir.path());
    assert_eq!(o.status.code(), Some(4));
    let err = stderr(&o);
    assert!(err.contains("line 3: chain.bogus"), "{err}");
}

#[test]
fn empty_config_lists_missing_blocks() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("empty.toml"), "").unwrap();
    let o = hydrolink(&["validate", "--config", "empty.toml"], dir.path());
    assert_eq!(o.status.code(), Some(4));
    let err = stderr(&o);
    for block in ["environment", "chain", "cs", "dfe", "detector"] {
        assert!(err.contains(block), "{err}");
    }
}

#[test]
fn usage_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(hydrolink(&["frobnicate"], dir.path()).status.code(), Some(2));
    assert_eq!(hydrolink(&[], dir.path()).status.code(), Some(2));
    assert_eq!(hydrolink(&["validate"], dir.path()).status.code(), Some(2));
    assert_eq!(hydrolink(&["relay-sweep", "--seed", "x"], dir.path()).status.code(), Some(2));
}

#[test]
fn validate_reports_defaults() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("c.toml"), BLOCKS).unwrap();
    let o = hydrolink(&["validate", "--config", "c.toml"], dir.path());
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert!(out.contains("note: chain.packet_bits defaulted to 10000.0"), "{out}");
    assert!(out.trim_end().ends_with("c.toml: 0 diagnostics"), "{out}");
}

#[test]
fn relay_sweep_writes_one_row_per_distance_and_count() {
    let dir = tempfile::tempdir().unwrap();
    let o = hydrolink(&["relay-sweep", "--seed", "42", "--out-dir", "res"], dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let csv = fs::read_to_string(dir.path().join("res/relay_sweep.csv")).unwrap();
    assert_eq!(header_value(&csv, "seed"), "42");
    assert_eq!(header_value(&csv, "command"), "relay-sweep");
    let rows = csv.lines().filter(|l| !l.starts_with('#')).count() - 1;
    assert_eq!(rows, 44);
    assert!(dir.path().join("res/relay_midpoint.csv").exists());
}

#[test]
fn out_dir_precedence() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("c.toml"), format!("out_dir = \"from_config\"\n{BLOCKS}")).unwrap();
    let run = |extra: &[&str], env: Option<&str>| {
        let mut cmd = Command::new(env!("CARGO_BIN_EXE_hydrolink"));
        cmd.args(["link-budget", "--config", "c.toml"]).args(extra).current_dir(dir.path());
        match env {
            Some(v) => cmd.env("HYDROLINK_OUT_DIR", v),
            None => cmd.env_remove("HYDROLINK_OUT_DIR"),
        };
        assert!(cmd.status().unwrap().success());
    };
    run(&[], None);
    assert!(dir.path().join("from_config/link_budget.csv").exists());
    run(&[], Some("from_env"));
    assert!(dir.path().join("from_env/link_budget.csv").exists());
    run(&["--out-dir", "from_flag"], Some("from_env2"));
    assert!(dir.path().join("from_flag/link_budget.csv").exists());
    assert!(!dir.path().join("from_env2").exists());
}

#[test]
fn override_hash_matches_file() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("base.toml"), BLOCKS).unwrap();
    fs::write(
        dir.path().join("edited.toml"),
        "[environment]\n[chain]\npacket_bits = 2000.0\n[cs]\n[dfe]\n[detector]\n",
    )
    .unwrap();
    let hash_of = |args: &[&str], out: &str| {
        let mut all = vec!["relay-sweep", "--out-dir", out];
        all.extend_from_slice(args);
        assert_eq!(hydrolink(&all, dir.path()).status.code(), Some(0));
        header_value(&fs::read_to_string(dir.path().join(out).join("relay_sweep.csv")).unwrap(), "config_sha256")
    };
    let from_file = hash_of(&["--config", "edited.toml"], "a");
    let from_set = hash_of(&["--config", "base.toml", "--set", "chain.packet_bits=2000.0"], "b");
    let base = hash_of(&["--config", "base.toml"], "c");
    assert_eq!(from_file, from_set);
    assert_ne!(from_file, base);
    let reseeded = hash_of(&["--config", "base.toml", "--seed", "9"], "d");
    assert_ne!(reseeded, base);
}
