use std::path::{Path, PathBuf};
use std::process::Command;

const BIN: &str = env!("CARGO_BIN_EXE_cascade-synth");

fn configs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("configs")
}

fn run(args: &[&str]) -> i32 {
    let out = Command::new(BIN).args(args).output().expect("binary runs");
    if !out.status.success() {
        eprintln!("{}", String::from_utf8_lossy(&out.stderr));
    }
    out.status.code().expect("exit code")
}

fn run_ok(args: &[&str]) {
    assert_eq!(run(args), 0, "cascade-synth {args:?} failed");
}

/// Rows of a CSV file, header first.
fn rows(path: &Path) -> Vec<Vec<String>> {
    let text = std::fs::read_to_string(path).unwrap();
    assert!(text.ends_with("\r\n"));
    text.split("\r\n")
        .filter(|l| !l.is_empty())
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

fn column(rows: &[Vec<String>], name: &str) -> Vec<f64> {
    let i = rows[0].iter().position(|h| h == name).unwrap_or_else(|| panic!("no column {name}"));
    rows[1..].iter().map(|r| r[i].parse().unwrap()).collect()
}

fn write_config(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn task_region_m3_has_one_corner() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("t.csv");
    run_ok(&["region", "task", "--m", "3", "--out", s(&out)]);
    let r = rows(&out);
    assert_eq!(r[0], ["generator", "R0", "R1", "R2"]);
    assert_eq!(r.len(), 2);
    let l3 = 3f64.log2();
    for (got, want) in r[1][1..].iter().zip([l3 + 1.0, l3, l3 - 1.0]) {
        assert!((got.parse::<f64>().unwrap() - want).abs() < 1e-9);
    }
    assert!(dir.path().join("t.csv.config.toml").exists());
}

#[test]
fn scatter_region_m4_contains_unit_corner() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("s.csv");
    run_ok(&["region", "scatter-relay", "--m", "4", "--out", s(&out)]);
    let r = rows(&out);
    assert!(r.iter().any(|row| row[0] == "a=2" && row[1] == "1.00000000000" && row[2] == "1.00000000000"));
}

#[test]
fn region_json_embeds_config_and_version() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("s.json");
    run_ok(&["--format", "json", "region", "scatter-relay", "--m", "6", "--out", s(&out)]);
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(v["config"]["m"], 6);
    assert!(v["version"].as_str().unwrap().starts_with("cascade-synth"));
    assert!((v["result"]["min_sum_rate"].as_f64().unwrap() - 2.0).abs() < 1e-9);
    assert!((v["result"]["gap_at_a_m_minus_1"].as_f64().unwrap() - 5f64.log2()).abs() < 1e-9);
}

#[test]
fn identical_inputs_give_identical_files() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = configs().join("simulate_task3.toml");
    let (a, b, c) = (dir.path().join("a.csv"), dir.path().join("b.csv"), dir.path().join("c.csv"));
    run_ok(&["simulate", "cascade", "--config", s(&cfg), "--out", s(&a)]);
    run_ok(&["simulate", "cascade", "--config", s(&cfg), "--out", s(&b)]);
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    // The echo alone reproduces the file.
    let echo = dir.path().join("a.csv.config.toml");
    run_ok(&["simulate", "cascade", "--config", s(&echo), "--out", s(&c)]);
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&c).unwrap());
    let (j1, j2) = (dir.path().join("1.json"), dir.path().join("2.json"));
    run_ok(&["--format", "json", "simulate", "cascade", "--config", s(&cfg), "--out", s(&j1)]);
    run_ok(&["--format", "json", "simulate", "cascade", "--config", s(&cfg), "--out", s(&j2)]);
    assert_eq!(std::fs::read(&j1).unwrap(), std::fs::read(&j2).unwrap());
}

#[test]
fn seed_flag_overrides_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = configs().join("softcover_single.toml");
    let out = dir.path().join("o.csv");
    run_ok(&["--seed", "7", "softcover", "single", "--config", s(&cfg), "--out", s(&out)]);
    let echo = std::fs::read_to_string(dir.path().join("o.csv.config.toml")).unwrap();
    assert!(echo.contains("seed = 7"));
    assert_eq!(column(&rows(&out), "seed")[0], 7.0);
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("x.csv");
    // Configuration errors.
    assert_eq!(run(&["simulate", "cascade", "--config", "/nonexistent.toml", "--out", s(&out)]), 2);
    assert_eq!(run(&["region", "task", "--m", "2", "--out", s(&out)]), 2);
    assert_eq!(run(&["region", "bogus"]), 2);
    let unknown = write_config(dir.path(), "u.toml", "rates = [1.0]\nfoo = 1\n[pmf]\nnamed = \"copy(2)\"\n[sweep]\nn_list = [1]\nseed = 0\n");
    assert_eq!(run(&["softcover", "single", "--config", s(&unknown), "--out", s(&out)]), 2);
    let no_seed = write_config(dir.path(), "n.toml", "rates = [1.0]\n[pmf]\nnamed = \"copy(2)\"\n[sweep]\nn_list = [1]\n");
    assert_eq!(run(&["softcover", "single", "--config", s(&no_seed), "--out", s(&out)]), 2);
    // Capacity guard.
    let cfg = configs().join("simulate_task3.toml");
    assert_eq!(run(&["--guard", "100", "simulate", "cascade", "--config", s(&cfg), "--out", s(&out)]), 3);
    // A coupling violating X - (U,V) - Y.
    let mut data = ["0"; 8];
    data[0] = "0.5";
    data[7] = "0.5";
    let bad = format!(
        "[coupling.pmf]\nnames = [\"X\", \"Y\", \"Z\", \"U\", \"V\"]\nshape = [2, 2, 2, 1, 1]\ndata = [{}]\n[rates]\nmargin = 0.5\n[sweep]\nn_list = [1]\nseed = 0\n",
        data.join(", ")
    );
    let bad = write_config(dir.path(), "bad.toml", &bad);
    assert_eq!(run(&["simulate", "cascade", "--config", s(&bad), "--out", s(&out)]), 4);
}

#[test]
fn independent_target_at_zero_rate_has_zero_tv() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "z.toml",
        "[coupling.pmf]\nnames = [\"X\", \"Y\", \"Z\", \"U\", \"V\"]\nshape = [2, 2, 2, 1, 1]\n\
         data = [0.125, 0.125, 0.125, 0.125, 0.125, 0.125, 0.125, 0.125]\n\
         [rates]\nr0 = 0.0\nr = [0.0, 0.0]\n[sweep]\nn_list = [1, 2, 3]\ntrials = 3\nseed = 0\n",
    );
    let out = dir.path().join("z.csv");
    run_ok(&["simulate", "cascade", "--config", s(&cfg), "--out", s(&out)]);
    assert!(column(&rows(&out), "tv").iter().all(|&t| t <= 1e-9));
}

#[test]
fn zero_common_randomness_keeps_tv_away_from_zero() {
    let dir = tempfile::tempdir().unwrap();
    let text = std::fs::read_to_string(configs().join("simulate_bsc.toml"))
        .unwrap()
        .replace("margin = 0.5", "margin = 0.5\nr0 = 0.0")
        .replace("n_list = [1, 2, 3]", "n_list = [1, 2]")
        .replace("trials = 20", "trials = 5");
    let cfg = write_config(dir.path(), "r.toml", &text);
    let out = dir.path().join("r.csv");
    run_ok(&["simulate", "cascade", "--config", s(&cfg), "--out", s(&out)]);
    assert!(column(&rows(&out), "tv").iter().all(|&t| t >= 0.1));
}

#[test]
fn long_cascade_runs() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("l.csv");
    run_ok(&["simulate", "long-cascade", "--config", s(&configs().join("long_cascade.toml")), "--out", s(&out)]);
    let r = rows(&out);
    assert_eq!(r.len(), 3);
    assert!(r[0].contains(&"N_p3".to_string()));
    assert!(column(&r, "x_marginal_dev").iter().all(|&d| d <= 1e-12));
}

#[test]
fn softcover_rates_separate_around_mutual_information() {
    let dir = tempfile::tempdir().unwrap();
    let mean = |rate: &str| -> Vec<f64> {
        let cfg = write_config(
            dir.path(),
            "c.toml",
            &format!("rates = [{rate}]\n[pmf]\nnamed = \"copy(2)\"\n[sweep]\nn_list = [2, 4, 6]\ntrials = 10\nseed = 0\n"),
        );
        let out = dir.path().join("c.csv");
        run_ok(&["softcover", "single", "--config", s(&cfg), "--out", s(&out)]);
        let r = rows(&out);
        let (n, tv) = (column(&r, "n"), column(&r, "tv"));
        [2.0, 4.0, 6.0]
            .iter()
            .map(|&k| {
                let v: Vec<f64> = n.iter().zip(&tv).filter(|(a, _)| **a == k).map(|(_, t)| *t).collect();
                v.iter().sum::<f64>() / v.len() as f64
            })
            .collect()
    };
    let high = mean("2.0");
    let low = mean("0.5");
    assert!(high.windows(2).all(|w| w[1] < w[0]));
    assert!(low.iter().all(|&t| t > 0.2));
    assert!(high[2] < low[2]);
}

#[test]
fn trivial_base_layer_matches_single_layer_rows() {
    let dir = tempfile::tempdir().unwrap();
    let single = write_config(
        dir.path(),
        "a.toml",
        "rates = [2.0]\n[pmf]\nnamed = \"copy(2)\"\n[sweep]\nn_list = [2, 3, 4]\ntrials = 5\nseed = 3\n",
    );
    let sup = write_config(
        dir.path(),
        "b.toml",
        "rates = [1.0, 1.0]\n[pmf.pmf]\nnames = [\"X\", \"U\", \"V\"]\nshape = [2, 2, 1]\ndata = [0.5, 0, 0, 0.5]\n\
         [sweep]\nn_list = [2, 3, 4]\ntrials = 5\nseed = 3\n",
    );
    let (a, b) = (dir.path().join("a.csv"), dir.path().join("b.csv"));
    run_ok(&["softcover", "single", "--config", s(&single), "--out", s(&a)]);
    run_ok(&["softcover", "superposition", "--config", s(&sup), "--out", s(&b)]);
    let (ra, rb) = (rows(&a), rows(&b));
    assert_eq!(ra.len(), rb.len());
    for (x, y) in ra[1..].iter().zip(&rb[1..]) {
        assert_eq!(x[1..4], y[1..4]);
    }
}

#[test]
fn relay_scatter_tv_decreases() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("r.csv");
    run_ok(&["relay", "--config", s(&configs().join("relay_scatter2.toml")), "--out", s(&out)]);
    let r = rows(&out);
    let (n, tv) = (column(&r, "n"), column(&r, "tv"));
    let means: Vec<f64> = (2..=6)
        .map(|k| {
            let v: Vec<f64> = n.iter().zip(&tv).filter(|(a, _)| **a == k as f64).map(|(_, t)| *t).collect();
            v.iter().sum::<f64>() / v.len() as f64
        })
        .collect();
    assert!(means.windows(2).all(|w| w[1] < w[0]), "{means:?}");
}

#[test]
fn optimize_independent_source_gives_wyner_rate() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("o.csv");
    run_ok(&["region", "optimize", "--config", s(&configs().join("optimize_independent.toml")), "--out", s(&out)]);
    // Wyner common information of a doubly symmetric binary pair with crossover 0.2.
    let h = |p: f64| -p * p.log2() - (1.0 - p) * (1.0 - p).log2();
    let a = (1.0 - (1.0 - 2.0 * 0.2f64).sqrt()) / 2.0;
    let wyner = 1.0 + h(0.2) - 2.0 * h(a);
    let r0 = column(&rows(&out), "R0")[0];
    assert!((r0 - wyner).abs() < 1e-3, "{r0} vs {wyner}");
}

#[test]
fn eavesdrop_test_writes_one_row() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("e.json");
    let cfg = configs().join("eavesdrop_task3.toml");
    run_ok(&["--format", "json", "eavesdrop-test", "--config", s(&cfg), "--out", s(&out)]);
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(v["result"]["test"]["samples"], 2000);
    assert!(v["result"]["notes"][0].as_str().unwrap().contains("Monte-Carlo"));
}
