use std::path::Path;
use std::process::Command;

use decomposable_ggm::bench::read_results;
use decomposable_ggm::cli::{command, run_str};
use decomposable_ggm::io::{read_matrix_csv, EstimateSidecar};

fn ggm(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_ggm")).args(args).output().unwrap()
}

fn p(dir: &Path, name: &str) -> String {
    dir.join(name).to_str().unwrap().to_string()
}

#[test]
fn every_flag_is_documented() {
    let cmd = command();
    let names: Vec<&str> = cmd.get_subcommands().map(|s| s.get_name()).collect();
    assert_eq!(names, ["graph-check", "simulate", "estimate", "bench", "sure-check"]);
    for sub in cmd.get_subcommands() {
        assert!(sub.get_about().is_some(), "{} lacks a description", sub.get_name());
        let help = sub.clone().render_long_help().to_string();
        for arg in sub.get_arguments() {
            let Some(long) = arg.get_long() else { continue };
            if long == "help" {
                continue;
            }
            assert!(arg.get_help().is_some(), "--{long} of {} is undocumented", sub.get_name());
            assert!(help.contains(&format!("--{long}")), "--{long} missing from {} help", sub.get_name());
        }
    }
    let out = ggm(&["estimate", "--help"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    for flag in ["--method", "--graph", "--data", "--positive-part", "--project-full", "--tol", "--max-iter", "--out"] {
        assert!(text.contains(flag), "{flag}");
    }
}

#[test]
fn usage_errors_exit_with_one() {
    assert_eq!(run_str(&["estimate", "--bogus"]), 1);
    assert_eq!(run_str(&["frobnicate"]), 1);
    assert_eq!(run_str(&["simulate", "--model", "banded", "--p", "5", "--n", "10"]), 1);
    assert_eq!(run_str(&["bench", "--model", "banded", "--p", "5", "--n-grid", "10", "--trials", "3", "--out", "x.csv"]), 1);
    assert_eq!(run_str(&["--help"]), 0);
}

#[test]
fn four_cycle_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let pattern = p(dir.path(), "c4.csv");
    std::fs::write(&pattern, "1,1,0,1\n1,1,1,0\n0,1,1,1\n1,0,1,1\n").unwrap();
    let out = ggm(&["graph-check", "--pattern", &pattern]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8(out.stderr).unwrap().contains("NotChordal"));
}

#[test]
fn graph_check_prints_order_and_identity() {
    let dir = tempfile::tempdir().unwrap();
    let pattern = p(dir.path(), "path.json");
    let out_json = p(dir.path(), "g.json");
    std::fs::write(&pattern, "[[1,1,0,0],[1,1,1,0],[0,1,1,1],[0,0,1,1]]").unwrap();
    let out = ggm(&["graph-check", "--pattern", &pattern, "--out", &out_json]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("C2 = {2,3}  S2 = {2}"));
    assert!(text.contains("6 - 2 = 4 = p"));
    let g: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(out_json).unwrap()).unwrap();
    assert_eq!(g["cliques"], serde_json::json!([[1, 2], [2, 3], [3, 4]]));
}

#[test]
fn mvue_on_constructed_data() {
    let dir = tempfile::tempdir().unwrap();
    let graph = p(dir.path(), "g.json");
    let data = p(dir.path(), "x.csv");
    let out = p(dir.path(), "k.csv");
    std::fs::write(&graph, r#"{"p": 3, "cliques": [[2, 3], [1, 2]]}"#).unwrap();
    // Rows sqrt(10) e_i plus zero rows: S = 10 I with n = 10.
    let r = 10f64.sqrt();
    let mut rows = vec![format!("{r},0,0"), format!("0,{r},0"), format!("0,0,{r}")];
    rows.extend(std::iter::repeat_n("0,0,0".to_string(), 7));
    std::fs::write(&data, rows.join("\n") + "\n").unwrap();
    let status = ggm(&["estimate", "--method", "mvue", "--graph", &graph, "--data", &data, "--out", &out]);
    assert!(status.status.success(), "{}", String::from_utf8_lossy(&status.stderr));
    let k = read_matrix_csv(&out).unwrap();
    for (i, want) in [0.7, 0.6, 0.7].iter().enumerate() {
        assert!((k.get(i, i) - want).abs() < 1e-12);
    }
    assert_eq!(k.get(0, 1), 0.0);
    assert_eq!(k.get(0, 2), 0.0);
    let side: EstimateSidecar =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("k.json")).unwrap()).unwrap();
    assert_eq!(side.method, "MVUE");
    assert_eq!(side.n, 10);
    assert!(side.d.is_none());
}

#[test]
fn simulate_estimate_bench_pipeline() {
    let dir = tempfile::tempdir().unwrap();
    let (data, truth, graph) = (p(dir.path(), "x.csv"), p(dir.path(), "k.csv"), p(dir.path(), "g.json"));
    let sim = [
        "simulate", "--model", "banded", "--p", "10", "--band", "2", "--n", "30", "--seed", "5", "--out-data", &data,
        "--out-truth", &truth, "--out-graph", &graph,
    ];
    assert_eq!(run_str(&sim), 0);
    let first = std::fs::read(&data).unwrap();
    assert_eq!(run_str(&sim), 0);
    assert_eq!(std::fs::read(&data).unwrap(), first);
    assert!(read_matrix_csv(&truth).unwrap().is_positive_definite());

    for method in ["mle", "mvue", "be", "sure"] {
        let est = p(dir.path(), &format!("{method}.csv"));
        let args = ["estimate", "--method", method, "--graph", &graph, "--data", &data, "--positive-part", "--out", &est];
        assert_eq!(run_str(&args), 0, "{method}");
        assert_eq!(read_matrix_csv(&est).unwrap().dim(), 10);
    }
    let est = p(dir.path(), "full.csv");
    let args = ["estimate", "--method", "sure", "--graph", &graph, "--data", &data, "--project-full", "--tol", "1e-9", "--out", &est];
    assert_eq!(run_str(&args), 0);

    let (results, plot) = (p(dir.path(), "r.csv"), p(dir.path(), "r.json"));
    let bench = [
        "bench", "--model", "banded", "--p", "10", "--n-grid", "15,30", "--trials", "20", "--seed", "7", "--out",
        &results, "--plot-json", &plot,
    ];
    let out = ggm(&bench);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let r = read_results(&results).unwrap();
    assert_eq!(r.rows.iter().filter(|row| row.estimator == "MLE").count(), 2);
    let first = std::fs::read(&results).unwrap();
    assert_eq!(ggm(&bench).status.code(), Some(0));
    assert_eq!(std::fs::read(&results).unwrap(), first);
    let plot: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(plot).unwrap()).unwrap();
    assert!(plot["series"].as_array().unwrap().len() >= 5);
}

#[test]
fn bench_from_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let config = p(dir.path(), "c.json");
    let results = p(dir.path(), "r.csv");
    std::fs::write(
        &config,
        r#"{"model": {"kind": "arrow", "hub": 1, "p": 6, "seed": 2}, "n_grid": [12], "trials": 10,
            "estimators": ["MLE", "ZERO"], "master_seed": 3}"#,
    )
    .unwrap();
    assert_eq!(run_str(&["bench", "--config", &config, "--out", &results]), 0);
    let r = read_results(&results).unwrap();
    assert_eq!(r.rows.len(), 2);
    assert_eq!(r.row("ZERO", 12).unwrap().nmse_mean, 1.0);
    assert_eq!(run_str(&["bench", "--config", &config, "--seed", "1", "--out", &results]), 1);
}

#[test]
fn sure_check_report() {
    let dir = tempfile::tempdir().unwrap();
    let report = p(dir.path(), "s.json");
    let args = [
        "sure-check", "--model", "two-coupled-blocks", "--p", "8", "--n", "20", "--trials", "500", "--seed", "1",
        "--report", &report,
    ];
    assert_eq!(run_str(&args), 0);
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(report).unwrap()).unwrap();
    assert_eq!(v["entries"].as_array().unwrap().len(), 3);
    assert!(v["entries"][0]["lhs_stderr"].as_f64().unwrap() > 0.0);
}

#[test]
fn runtime_failures_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let graph = p(dir.path(), "g.json");
    let data = p(dir.path(), "x.csv");
    std::fs::write(&graph, r#"{"p": 2, "cliques": [[1, 2]]}"#).unwrap();
    std::fs::write(&data, "1,1\n2,2\n").unwrap();
    let out = p(dir.path(), "k.csv");
    assert_eq!(run_str(&["estimate", "--method", "mle", "--graph", &graph, "--data", &data, "--out", &out]), 2);
    assert_eq!(run_str(&["estimate", "--method", "mle", "--graph", &graph, "--data", "/nonexistent.csv", "--out", &out]), 2);
}
