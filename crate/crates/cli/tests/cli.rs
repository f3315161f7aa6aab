use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use chrono::NaiveDate;
use mmconnect::synth::{
    gen_price_panel, gen_shock_dataset, write_price_dataset, write_shock_dataset, PriceSynthConfig,
    ShockSynthConfig,
};
use mmconnect::timeseries::YearMonth;

fn mmconnect(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mmconnect"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

/// Small two-by-two panel whose dates overlap the shock months.
fn small_dataset(dir: &Path) -> PathBuf {
    let prices = gen_price_panel(&PriceSynthConfig {
        bonds: 2,
        equities: 2,
        days: 700,
        start: NaiveDate::from_ymd_opt(2012, 1, 2).unwrap(),
        events: 3,
        ..PriceSynthConfig::default()
    })
    .unwrap();
    write_price_dataset(&dir.join("prices"), &prices).unwrap();
    let shocks = gen_shock_dataset(&ShockSynthConfig {
        months: 200,
        start: YearMonth::new(1998, 1).unwrap(),
        ..ShockSynthConfig::default()
    })
    .unwrap();
    write_shock_dataset(&dir.join("shocks"), &shocks).unwrap();
    let config = dir.join("pipeline.toml");
    fs::write(
        &config,
        r#"seed = 3
out = "out"

[inputs]
prices = "prices/prices.csv"
events = "shocks/fomc_events.csv"
surprises = "shocks/surprises.csv"
macro = "shocks/macro.csv"

[nodes]
bonds = ["BOND1", "BOND2"]

[damm]
starts = 2

[tvpvar]
p_max = 2

[shocks]
lags = 2
draws = 50
angles = 20

[lp]
h_max = 3
indices = ["projection", "vol"]
"#,
    )
    .unwrap();
    config
}

#[test]
fn pipeline_writes_every_artifact() {
    let dir = tempfile::tempdir().unwrap();
    let config = small_dataset(dir.path());
    let out = mmconnect(&["pipeline", "--config", config.to_str().unwrap()]);
    assert!(out.status.success(), "{}", stderr(&out));
    let o = dir.path().join("out");
    for f in [
        "summary.csv",
        "returns.csv",
        "moments.csv",
        "damm_fits.json",
        "gfevd_return.csv",
        "total_index_kurt.csv",
        "net_index_vol.csv",
        "table_skew.csv",
        "network.json",
        "table_projection.csv",
        "total_index_projection.csv",
        "shocks.csv",
        "lp_projection.csv",
        "lp_vol.csv",
        "heat.csv",
        "run_manifest.json",
    ] {
        assert!(o.join(f).is_file(), "missing {f}");
    }
    let manifest: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(o.join("run_manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["seed"], 3);
    assert_eq!(manifest["command"], "pipeline");
    assert!(manifest["outputs"]["heat.csv"].as_str().unwrap().len() == 64);

    let heat = fs::read_to_string(o.join("heat.csv")).unwrap();
    assert_eq!(heat.lines().next().unwrap(), "node,h,regime,s");
    let lp = fs::read_to_string(o.join("lp_vol.csv")).unwrap();
    assert!(lp.lines().next().unwrap().starts_with("h,coef_"));
    assert_eq!(lp.lines().count(), 1 + 4);
}

#[test]
fn stages_run_individually_and_respect_out_override() {
    let dir = tempfile::tempdir().unwrap();
    let config = small_dataset(dir.path());
    let cfg = config.to_str().unwrap();
    let alt = dir.path().join("alt");
    let alt_s = alt.to_str().unwrap();
    let out = mmconnect(&["moments", "--config", cfg, "--out", alt_s]);
    assert!(out.status.success(), "{}", stderr(&out));
    let out = mmconnect(&[
        "connect", "--config", cfg, "--out", alt_s, "--layer", "return",
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    assert!(alt.join("total_index_return.csv").is_file());
    assert!(!alt.join("total_index_vol.csv").exists());
    assert!(!dir.path().join("out").exists());
}

#[test]
fn missing_stage_input_exits_3_and_names_file() {
    let dir = tempfile::tempdir().unwrap();
    let config = small_dataset(dir.path());
    let out = mmconnect(&["connect", "--config", config.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3));
    assert!(stderr(&out).contains("returns.csv"), "{}", stderr(&out));

    let out = mmconnect(&["lp", "--config", config.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn configuration_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let config = small_dataset(dir.path());
    let cfg = config.to_str().unwrap();

    let out = mmconnect(&[
        "pipeline",
        "--config",
        dir.path().join("nope.toml").to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2));

    let out = mmconnect(&["moments", "--config", cfg, "--set", "tvpvar.kappa=2"]);
    assert_eq!(out.status.code(), Some(2));

    let out = mmconnect(&["moments", "--config", cfg, "--set", "tvpvar.bogus=1"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("bogus"), "{}", stderr(&out));

    let out = mmconnect(&["connect", "--config", cfg, "--layer", "median"]);
    assert_eq!(out.status.code(), Some(2));

    let out = mmconnect(&["frobnicate"]);
    assert_eq!(out.status.code(), Some(2));

    fs::remove_file(dir.path().join("prices/prices.csv")).unwrap();
    let out = mmconnect(&["moments", "--config", cfg]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("prices.csv"));
}

#[test]
fn malformed_data_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let config = small_dataset(dir.path());
    let prices = dir.path().join("prices/prices.csv");
    let text = fs::read_to_string(&prices).unwrap();
    let mut lines: Vec<String> = text.lines().map(String::from).collect();
    lines[5] = lines[5].replacen(',', ",abc,", 1);
    fs::write(&prices, lines.join("\n")).unwrap();
    let out = mmconnect(&["moments", "--config", config.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3), "{}", stderr(&out));
}

#[test]
fn constant_series_exits_4() {
    let dir = tempfile::tempdir().unwrap();
    let config = small_dataset(dir.path());
    let prices = dir.path().join("prices/prices.csv");
    let text = fs::read_to_string(&prices).unwrap();
    let rewritten: Vec<String> = text
        .lines()
        .enumerate()
        .map(|(i, l)| {
            if i == 0 {
                return l.to_string();
            }
            let mut cells: Vec<&str> = l.split(',').collect();
            cells[1] = "100";
            cells.join(",")
        })
        .collect();
    fs::write(&prices, rewritten.join("\n")).unwrap();
    let out = mmconnect(&["moments", "--config", config.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(4), "{}", stderr(&out));
}

#[test]
fn thread_count_does_not_change_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let config = small_dataset(dir.path());
    let cfg = config.to_str().unwrap();
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    for (path, threads) in [(&a, "1"), (&b, "2")] {
        let out = mmconnect(&[
            "moments",
            "--config",
            cfg,
            "--out",
            path.to_str().unwrap(),
            "--threads",
            threads,
        ]);
        assert!(out.status.success(), "{}", stderr(&out));
    }
    for f in ["moments.csv", "damm_fits.json", "run_manifest.json"] {
        assert_eq!(
            fs::read(a.join(f)).unwrap(),
            fs::read(b.join(f)).unwrap(),
            "{f}"
        );
    }
}
