use std::process::{Command, Output};

fn spinbound(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_spinbound")).args(args).env_remove("SPINBOUND_THREADS").output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn rows(csv: &str) -> Vec<Vec<f64>> {
    csv.lines().skip(1).map(|l| l.split(',').map(|x| x.parse().unwrap()).collect()).collect()
}

#[test]
fn sweep_chain_rows_satisfy_the_sandwich() {
    let o = spinbound(&["sweep-chain", "--n", "6", "--steps", "5"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    assert_eq!(text.lines().next().unwrap(), "bx,jx_expect,e_ground,e_sep_qfi,e_lower_wy,corr_ground,corr_sep,corr_wy");
    let rows = rows(&text);
    assert_eq!(rows.len(), 5);
    // classical point: all three energies equal −N/4
    assert!((rows[0][2] + 1.5).abs() < 1e-9 && (rows[0][3] + 1.5).abs() < 1e-9 && (rows[0][4] + 1.5).abs() < 1e-9);
    for r in &rows {
        assert!(r[4] <= r[2] + 1e-9 && r[2] <= r[3] + 1e-9, "{r:?}");
    }
    assert!(rows.windows(2).all(|w| w[1][1] >= w[0][1] - 1e-9));
}

#[test]
fn odd_chain_is_a_usage_error() {
    let o = spinbound(&["sweep-chain", "--n", "5"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("even"));
}

#[test]
fn qfi_bound_columns_and_caps() {
    let o = spinbound(&["qfi-bound", "--n", "4,10", "--steps", "6"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    assert_eq!(text.lines().next().unwrap(), "n,bx,sx_expect,fq_true,fq_bound,delta,cap_8_over_n,cap_0p6_over_n");
    let rows = rows(&text);
    assert_eq!(rows.len(), 12);
    for r in &rows {
        assert!(r[5] >= -1e-9 && r[5] <= r[6] + 1e-9, "{r:?}");
        assert!((r[6] - 8.0 / r[0]).abs() < 1e-9);
    }
}

#[test]
fn kprod_orders_bounds_and_checks_divisibility() {
    let o = spinbound(&["kprod", "--n", "10", "--k", "1,2", "--jx0", "0.3"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    assert_eq!(text.lines().next().unwrap(), "k,bound_qfi,bound_product,bound_wy_per_particle,pfeuty_reference");
    let rows = rows(&text);
    assert!(rows.iter().all(|r| r[2] >= r[1] - 1e-12));
    assert_eq!(rows[0][4], rows[1][4]);
    let o = spinbound(&["kprod", "--n", "10", "--k", "3"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn verify_reports_json_and_rejects_unknown_suites() {
    let o = spinbound(&["verify", "saturation", "--trials", "6", "--seed", "4"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["suite"], "saturation");
    assert_eq!((v["trials"].as_u64(), v["passed"].as_u64(), v["failed"].as_u64(), v["seed"].as_u64()), (Some(6), Some(6), Some(0), Some(4)));
    assert!(v["worst_abs_err"].as_f64().unwrap() <= 1e-12);
    assert_eq!(spinbound(&["verify", "nonsense"]).status.code(), Some(2));
}

#[test]
fn runs_are_byte_identical() {
    let args = ["qfi-bound", "--n", "6", "--steps", "4"];
    assert_eq!(spinbound(&args).stdout, spinbound(&args).stdout);
    let args = ["verify", "tables", "--trials", "4", "--seed", "2", "--threads", "1"];
    assert_eq!(spinbound(&args).stdout, spinbound(&args).stdout);
}

#[test]
fn config_file_supplies_defaults_and_flags_win() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.json");
    let out = dir.path().join("sweep.csv");
    std::fs::write(&cfg, format!(r#"{{"n": 4, "steps": 3, "bx_max": 1.0, "out": {:?}}}"#, out.to_str().unwrap())).unwrap();
    let o = spinbound(&["sweep-chain", "--config", cfg.to_str().unwrap(), "--steps", "2"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let rows = rows(&std::fs::read_to_string(&out).unwrap());
    assert_eq!(rows.len(), 2);
    assert_eq!(rows[1][0], 1.0);
    // N = 4 at zero field: −N/4
    assert!((rows[0][2] + 1.0).abs() < 1e-12);

    std::fs::write(&cfg, r#"{"unknown_key": 1}"#).unwrap();
    assert_eq!(spinbound(&["sweep-chain", "--config", cfg.to_str().unwrap()]).status.code(), Some(2));
}

#[test]
fn state_file_and_report() {
    let dir = tempfile::tempdir().unwrap();
    let state = dir.path().join("rho.json");
    std::fs::write(&state, r#"{"dim": 2, "re": [[0.5, 0.15], [0.15, 0.5]]}"#).unwrap();
    let o = spinbound(&["kprod", "--n", "4", "--k", "1", "--state-file", state.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let via_file = rows(&stdout(&o));
    let o = spinbound(&["kprod", "--n", "4", "--k", "1", "--jx0", "0.3"]);
    let via_flag = rows(&stdout(&o));
    assert!((via_file[0][1] - via_flag[0][1]).abs() < 1e-12);

    let model = dir.path().join("model.json");
    let jz = r#"{"dim": 2, "re": [[0.5, 0.0], [0.0, -0.5]]}"#;
    std::fs::write(&model, format!(r#"{{"n": 4, "d": 2, "terms": [{{"j": -1.0, "h": {jz}}}], "b": [0.3, 0.0, 0.0], "edges": [[1,2],[2,3],[3,4],[4,1]]}}"#)).unwrap();
    let o = spinbound(&["report", "--model", model.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    let (l, g, s) = (v["E_L"].as_f64().unwrap(), v["E_ground"].as_f64().unwrap(), v["E_sep"].as_f64().unwrap());
    assert!(l <= g + 1e-9 && g <= s + 1e-9);
    assert!(v["fidelity_bound"].is_null());
    assert_eq!(spinbound(&["report", "--model", "/nonexistent.json"]).status.code(), Some(2));
}
