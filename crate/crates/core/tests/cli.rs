use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_use-curate"));
    c.env_remove("USE_CURATE_CONFIG");
    c
}

fn run(args: &[&str], dir: &Path) -> Output {
    bin().args(args).current_dir(dir).output().unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn simulate(dir: &Path, config: &str) -> PathBuf {
    write(dir, "sim.toml", config);
    let o = run(
        &["simulate", "--config", "sim.toml", "--out-dir", "sim"],
        dir,
    );
    assert!(o.status.success(), "{}", stderr(&o));
    dir.join("sim/pool.csv")
}

#[test]
fn score_one_hot_and_uniform() {
    let d = TempDir::new().unwrap();
    write(
        d.path(),
        "p.csv",
        "sample_id,p_1,p_2,p_3,p_4\na,1,0,0,0\nb,0.25,0.25,0.25,2.5e-1\n",
    );
    let o = run(&["score", "p.csv", "-o", "s.csv"], d.path());
    assert!(o.status.success(), "{}", stderr(&o));
    let text = std::fs::read_to_string(d.path().join("s.csv")).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "# use-curate scores k=4 log=nats");
    assert_eq!(lines[1], "sample_id,entropy");
    assert_eq!(lines[2], "a,0.0");
    let (id, u) = lines[3].split_once(',').unwrap();
    assert_eq!(id, "b");
    assert_eq!(format!("{:.6}", u.parse::<f64>().unwrap()), "1.386294");
}

#[test]
fn score_to_stdout() {
    let d = TempDir::new().unwrap();
    write(d.path(), "p.csv", "sample_id,p_1,p_2\nx,0.5,0.5\n");
    let o = run(&["score", "p.csv"], d.path());
    assert!(o.status.success());
    assert!(String::from_utf8_lossy(&o.stdout).contains("x,0.6931471805599453"));
}

#[test]
fn score_row_errors_name_the_line() {
    let d = TempDir::new().unwrap();
    write(
        d.path(),
        "sum.csv",
        "sample_id,p_1,p_2\na,0.5,0.5\nb,0.6,0.6\n",
    );
    let o = run(&["score", "sum.csv", "-o", "out.csv"], d.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("sum.csv:3:"), "{}", stderr(&o));
    assert!(!d.path().join("out.csv").exists());

    write(
        d.path(),
        "mixed.csv",
        "sample_id,p_1,p_2\na,0.5,0.5\nb,0.2,0.3,0.5\n",
    );
    let o = run(&["score", "mixed.csv"], d.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("mixed.csv:3:"), "{}", stderr(&o));

    write(d.path(), "nan.csv", "sample_id,p_1,p_2\na,abc,0.5\n");
    let o = run(&["score", "nan.csv"], d.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("nan.csv:2:"), "{}", stderr(&o));

    write(
        d.path(),
        "dup.csv",
        "sample_id,p_1,p_2\na,0.5,0.5\na,0.5,0.5\n",
    );
    let o = run(&["score", "dup.csv"], d.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("duplicate"), "{}", stderr(&o));
}

#[test]
fn score_renormalize_flag() {
    let d = TempDir::new().unwrap();
    write(d.path(), "p.csv", "sample_id,p_1,p_2\na,0.5,0.505\n");
    assert_eq!(run(&["score", "p.csv"], d.path()).status.code(), Some(2));
    assert!(run(&["score", "p.csv", "--renormalize"], d.path())
        .status
        .success());
}

#[test]
fn score_empty_and_missing() {
    let d = TempDir::new().unwrap();
    write(d.path(), "e.csv", "sample_id,p_1,p_2\n");
    let o = run(&["score", "e.csv"], d.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("empty"), "{}", stderr(&o));

    let o = run(&["score", "absent.csv"], d.path());
    assert_eq!(o.status.code(), Some(4));

    write(d.path(), "hdr.csv", "id,a,b\nx,0.5,0.5\n");
    assert_eq!(run(&["score", "hdr.csv"], d.path()).status.code(), Some(2));
}

#[test]
fn threshold_on_bimodal_pool() {
    let d = TempDir::new().unwrap();
    let pool = simulate(d.path(), "");
    let o = run(
        &["threshold", pool.to_str().unwrap(), "-o", "r.json"],
        d.path(),
    );
    assert!(o.status.success(), "{}", stderr(&o));
    let r = json(&d.path().join("r.json"));
    let hi = 100f64.ln();
    let u = r["u_star"].as_f64().unwrap();
    assert_eq!(r["schema_version"], 1);
    assert_eq!(r["crossing_found"], true);
    assert_eq!(r["fallback"], "none");
    assert!(0.2 * hi < u && u < 0.95 * hi);
    assert_eq!(r["n"], 10_000);
    assert_eq!(
        r["kept"].as_u64().unwrap() + r["discarded"].as_u64().unwrap(),
        10_000
    );
    assert!(r.get("density").is_none());
    assert!(r.get("timing").is_none());

    // same answer as the simulate report
    let sim = json(&d.path().join("sim/report.json"));
    assert_eq!(sim["pipeline"]["u_star"], r["u_star"]);
    assert!(sim["pipeline"]["density"]["u"].as_array().unwrap().len() == 1024);
}

#[test]
fn threshold_reports_are_byte_stable() {
    let d = TempDir::new().unwrap();
    let pool = simulate(d.path(), "[scenario]\nn = 2000\n");
    let p = pool.to_str().unwrap();
    assert!(run(
        &["threshold", p, "-o", "a.json", "--emit-density"],
        d.path()
    )
    .status
    .success());
    assert!(run(
        &["threshold", p, "-o", "b.json", "--emit-density"],
        d.path()
    )
    .status
    .success());
    let a = std::fs::read(d.path().join("a.json")).unwrap();
    assert_eq!(a, std::fs::read(d.path().join("b.json")).unwrap());
    let r = json(&d.path().join("a.json"));
    for key in [
        "u",
        "density",
        "cdf",
        "reference_density",
        "reference_cdf",
        "discrepancy",
    ] {
        assert_eq!(r["density"][key].as_array().unwrap().len(), 1024, "{key}");
    }

    assert!(run(&["threshold", p, "-o", "t.json", "--timing"], d.path())
        .status
        .success());
    assert!(
        json(&d.path().join("t.json"))["timing"]["seconds"]
            .as_f64()
            .unwrap()
            >= 0.0
    );
}

#[test]
fn threshold_degenerate_scores() {
    let d = TempDir::new().unwrap();
    write(
        d.path(),
        "s.csv",
        "# use-curate scores k=10 log=nats\nsample_id,entropy\na,0.7\nb,0.7\nc,0.7\n",
    );
    let o = run(&["threshold", "s.csv"], d.path());
    assert_eq!(o.status.code(), Some(3));
    assert!(stderr(&o).contains("--bandwidth"));
    let o = run(&["threshold", "s.csv", "--bandwidth", "0.2"], d.path());
    assert!(o.status.success(), "{}", stderr(&o));
    let r: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(r["bandwidth_source"], "explicit");
}

#[test]
fn threshold_near_uniform_pool_keeps_all() {
    let d = TempDir::new().unwrap();
    let pool = simulate(
        d.path(),
        "[scenario]\nn = 100000\nweights = [0.0, 1.0, 0.0]\n",
    );
    let o = run(&["threshold", pool.to_str().unwrap()], d.path());
    assert!(o.status.success());
    let r: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(r["fallback"], "keep-all");
    assert_eq!(r["discarded"], 0);
    assert_eq!(r["diagnostics"]["structureless"], true);
}

#[test]
fn scores_out_of_range_rejected() {
    let d = TempDir::new().unwrap();
    write(
        d.path(),
        "s.csv",
        "# use-curate scores k=2 log=nats\nsample_id,entropy\na,0.1\nb,0.9\n",
    );
    let o = run(&["threshold", "s.csv"], d.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("s.csv:4:"), "{}", stderr(&o));
    write(d.path(), "nometa.csv", "sample_id,entropy\na,0.1\n");
    assert_eq!(
        run(&["threshold", "nometa.csv"], d.path()).status.code(),
        Some(2)
    );
}

fn decisions(path: &Path) -> Vec<String> {
    std::fs::read_to_string(path)
        .unwrap()
        .lines()
        .skip(2)
        .map(|l| l.rsplit(',').next().unwrap().to_owned())
        .collect()
}

#[test]
fn filter_explicit_cuts() {
    let d = TempDir::new().unwrap();
    let hi = 10f64.ln();
    let (lo, top, half) = (0.1 * hi, 0.9 * hi, 0.5 * hi);
    write(
        d.path(),
        "s.csv",
        &format!("# use-curate scores k=10 log=nats\nsample_id,entropy\na,{lo:?}\nb,{top:?}\nc,{half:?}\n"),
    );
    let o = run(
        &[
            "filter",
            "s.csv",
            "--u-star",
            &format!("{half:?}"),
            "-o",
            "m.csv",
        ],
        d.path(),
    );
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stderr(&o).contains("kept 2, discarded 1"));
    assert_eq!(
        decisions(&d.path().join("m.csv")),
        ["keep", "discard", "keep"]
    );

    let o = run(
        &[
            "filter",
            "s.csv",
            "--u-star",
            &format!("{hi:?}"),
            "-o",
            "all.csv",
        ],
        d.path(),
    );
    assert!(o.status.success());
    assert_eq!(
        decisions(&d.path().join("all.csv")),
        ["keep", "keep", "keep"]
    );
}

#[test]
fn filter_from_report() {
    let d = TempDir::new().unwrap();
    let pool = simulate(d.path(), "[scenario]\nn = 3000\n");
    let p = pool.to_str().unwrap();
    assert!(run(&["threshold", p, "-o", "r.json"], d.path())
        .status
        .success());
    let o = run(
        &["filter", p, "--report", "r.json", "-o", "m.csv"],
        d.path(),
    );
    assert!(o.status.success(), "{}", stderr(&o));
    let r = json(&d.path().join("r.json"));
    let dec = decisions(&d.path().join("m.csv"));
    assert_eq!(
        dec.iter().filter(|x| *x == "discard").count() as u64,
        r["discarded"].as_u64().unwrap()
    );
    // the simulate mask is the same file
    assert_eq!(
        std::fs::read(d.path().join("m.csv")).unwrap(),
        std::fs::read(d.path().join("sim/mask.csv")).unwrap()
    );
}

#[test]
fn filter_errors() {
    let d = TempDir::new().unwrap();
    write(
        d.path(),
        "s.csv",
        "# use-curate scores k=10 log=nats\nsample_id,entropy\na,0.1\nb,0.2\n",
    );
    let o = run(&["filter", "s.csv"], d.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("no threshold"));

    let pool = simulate(d.path(), "[scenario]\nn = 500\n");
    assert!(run(
        &["threshold", pool.to_str().unwrap(), "-o", "r.json"],
        d.path()
    )
    .status
    .success());
    let o = run(&["filter", "s.csv", "--report", "r.json"], d.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("500 samples"), "{}", stderr(&o));

    write(d.path(), "bad.json", "{\"schema_version\": 9}");
    assert_eq!(
        run(&["filter", "s.csv", "--report", "bad.json"], d.path())
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        run(&["filter", "s.csv", "--report", "gone.json"], d.path())
            .status
            .code(),
        Some(4)
    );
    assert_eq!(
        run(&["filter", "s.csv", "--u-star", "-1"], d.path())
            .status
            .code(),
        Some(2)
    );
}

#[test]
fn metrics_csv_and_json() {
    let d = TempDir::new().unwrap();
    write(
        d.path(),
        "s.csv",
        "series,r,accuracy\nflat,0.0,0.7\nflat,0.2,0.7\nflat,0.4,0.7\nfall,0.0,0.6\nfall,0.5,0.55\n",
    );
    let o = run(
        &["metrics", "s.csv", "-o", "m.csv", "--json", "m.json"],
        d.path(),
    );
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(
        std::fs::read_to_string(d.path().join("m.csv")).unwrap(),
        "series,avg,rslope,gm,bad,wad,p_ad\n\
         flat,0.7000,0.0000,0.0000,0.0000,0.0000,1.0000\n\
         fall,0.5750,-0.1000,0.0500,-0.1000,-0.1000,0.0000\n"
    );
    let r = json(&d.path().join("m.json"));
    assert_eq!(r["schema_version"], 1);
    assert_eq!(r["series"][0]["series"], "flat");
    assert_eq!(r["series"][0]["p_ad"], 1.0);
    assert_eq!(r["series"][1]["rslope"], -0.1);
}

#[test]
fn metrics_errors() {
    let d = TempDir::new().unwrap();
    write(
        d.path(),
        "dec.csv",
        "series,r,accuracy\na,0.2,0.5\na,0.1,0.5\n",
    );
    let o = run(&["metrics", "dec.csv"], d.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("dec.csv:2:"), "{}", stderr(&o));
    write(
        d.path(),
        "acc.csv",
        "series,r,accuracy\na,0.0,0.5\na,0.1,1.5\n",
    );
    assert_eq!(
        run(&["metrics", "acc.csv"], d.path()).status.code(),
        Some(2)
    );
    write(d.path(), "one.csv", "series,r,accuracy\na,0.0,0.5\n");
    assert_eq!(
        run(&["metrics", "one.csv"], d.path()).status.code(),
        Some(2)
    );
}

#[test]
fn metrics_golden_table() {
    let d = TempDir::new().unwrap();
    let golden = Path::new(env!("CARGO_MANIFEST_DIR")).join("data/golden");
    let o = run(
        &[
            "metrics",
            golden.join("table3_accuracy.csv").to_str().unwrap(),
        ],
        d.path(),
    );
    assert!(o.status.success());
    let ours = String::from_utf8(o.stdout).unwrap();
    let published = std::fs::read_to_string(golden.join("table3_published.csv")).unwrap();
    assert_eq!(ours, published);
}

#[test]
fn config_file_env_and_overrides() {
    let d = TempDir::new().unwrap();
    let pool = simulate(d.path(), "[scenario]\nn = 2000\n");
    let p = pool.to_str().unwrap();
    let cfg = write(d.path(), "run.toml", "grid_points = 256\nbandwidth = 0.3\n");

    let o = bin()
        .args(["threshold", p])
        .env("USE_CURATE_CONFIG", &cfg)
        .current_dir(d.path())
        .output()
        .unwrap();
    assert!(o.status.success(), "{}", stderr(&o));
    let r: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(r["config"]["grid_points"], 256);
    assert_eq!(r["bandwidth"], 0.3);

    let o = bin()
        .args(["threshold", p, "--grid-points", "512"])
        .env("USE_CURATE_CONFIG", &cfg)
        .current_dir(d.path())
        .output()
        .unwrap();
    let r: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(r["config"]["grid_points"], 512);
    assert_eq!(r["config"]["bandwidth"], 0.3);

    write(d.path(), "bad.toml", "grid_points = 8\n");
    let o = run(&["threshold", p, "--config", "bad.toml"], d.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("grid_points"));
    assert_eq!(
        run(&["threshold", p, "--config", "nope.toml"], d.path())
            .status
            .code(),
        Some(4)
    );
    assert_eq!(
        run(&["threshold", p, "--grid-points", "10"], d.path())
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        run(&["threshold", p, "--bandwidth", "0"], d.path())
            .status
            .code(),
        Some(2)
    );
}

#[test]
fn simulate_is_seeded() {
    let d = TempDir::new().unwrap();
    let run_sim = |seed: &str, out: &str| {
        let o = run(&["simulate", "--seed", seed, "--out-dir", out], d.path());
        assert!(o.status.success(), "{}", stderr(&o));
        std::fs::read(d.path().join(out).join("pool.csv")).unwrap()
    };
    let a = run_sim("5", "a");
    assert_eq!(a, run_sim("5", "b"));
    assert_ne!(a, run_sim("6", "c"));
    let r = json(&d.path().join("a/report.json"));
    assert_eq!(r["spec"]["seed"], 5);
    assert_eq!(r["pipeline"]["config"]["scenario"]["seed"], 5);
    let text = String::from_utf8(a).unwrap();
    assert!(text.starts_with("# use-curate scores k=100 log=nats\nsample_id,entropy,truth\n"));
}

#[test]
fn simulate_scenarios_from_config() {
    let d = TempDir::new().unwrap();
    simulate(d.path(), "[scenario]\nweights = [0.5, 0.0, 0.5]\n");
    let r = json(&d.path().join("sim/report.json"));
    assert!(r["quality"]["precision"].as_f64().unwrap() >= 0.95);
    assert!(r["quality"]["recall"].as_f64().unwrap() >= 0.95);

    let d = TempDir::new().unwrap();
    simulate(d.path(), "[scenario]\nweights = [1.0, 0.0, 0.0]\n");
    let r = json(&d.path().join("sim/report.json"));
    assert!(r["discard_fraction"].as_f64().unwrap() <= 0.05);

    let d = TempDir::new().unwrap();
    write(
        d.path(),
        "bad.toml",
        "[scenario]\nid_mean = 0.9\nfar_mean = 0.1\n",
    );
    let o = run(&["simulate", "--config", "bad.toml"], d.path());
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn unknown_reference_rejected_by_parser() {
    let d = TempDir::new().unwrap();
    let o = run(&["threshold", "x.csv", "--reference", "gaussian"], d.path());
    assert_eq!(o.status.code(), Some(2));
}
