//! End-to-end runs of the binary: output shape, determinism, config
//! hashing and exit codes.

use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_intrinsic-scale")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

/// Everything except the wall-time header line.
fn body(text: &str) -> String {
    text.lines().filter(|l| !l.starts_with("# wall_time=")).collect::<Vec<_>>().join("\n")
}

fn header(text: &str, key: &str) -> String {
    let prefix = format!("# {key}=");
    text.lines().find_map(|l| l.strip_prefix(&prefix)).unwrap_or_default().to_string()
}

fn hash(args: &[&str]) -> String {
    let o = run(args);
    assert_eq!(o.status.code(), Some(0), "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
    header(&stdout(&o), "config_hash")
}

#[test]
fn tables_csv_has_provenance_and_header() {
    let o = run(&["tables", "--points", "3"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    for key in ["tool", "version", "config_hash", "seed", "wall_time"] {
        assert!(!header(&text, key).is_empty(), "missing {key}");
    }
    assert!(text.contains("profile,status,s,a,ell,L,L_asym,L_ratio,phi,phi_asym,phi_ratio"));
    // five default rows × three s × two a
    assert_eq!(text.lines().filter(|l| l.contains(",ok,")).count(), 30);
}

#[test]
fn rejected_profiles_are_reported_per_row() {
    let o = run(&["tables", "--points", "2", "--profile", r#"[{"family":"constant"},{"family":"power_law","beta":5}]"#]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.lines().any(|l| l.starts_with("profile[1],") && l.contains("rejected")));
    assert!(text.lines().any(|l| l.starts_with("constant,ok,")));
}

#[test]
fn json_mirror_parses() {
    let o = run(&["symbol", "--format", "json", "--xi", "10,100"]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["provenance"]["command"], "symbol");
    assert_eq!(v["blocks"][0]["columns"][1], "psi");
    assert_eq!(v["blocks"][0]["rows"].as_array().unwrap().len(), 2);
}

#[test]
fn simulate_is_deterministic() {
    let args = ["simulate", "--estimator", "mean-exit", "--paths", "3000", "--seed", "11"];
    let a = stdout(&run(&args));
    let b = stdout(&run(&args));
    assert_eq!(body(&a), body(&b));
    assert!(a.contains("estimator,r,s,a,t,start,eps,estimate,std_error,implied_constant,n_paths"));
}

#[test]
fn thread_count_does_not_change_results() {
    let args = ["simulate", "--paths", "5000", "--seed", "3"];
    let one = Command::new(env!("CARGO_BIN_EXE_intrinsic-scale"))
        .args(args)
        .env("INTRINSIC_SCALE_THREADS", "1")
        .output()
        .unwrap();
    let many = Command::new(env!("CARGO_BIN_EXE_intrinsic-scale"))
        .args(args)
        .env("INTRINSIC_SCALE_THREADS", "4")
        .output()
        .unwrap();
    assert_eq!(body(&stdout(&one)), body(&stdout(&many)));
}

#[test]
fn every_flag_moves_the_hash() {
    let base = ["simulate", "--paths", "200"];
    let h0 = hash(&base);
    let flips: [&[&str]; 12] = [
        &["--estimator", "hitting"],
        &["--r", "0.05"],
        &["--s", "0.3"],
        &["--a", "3"],
        &["--t", "0.01"],
        &["--seed", "2"],
        &["--eps", "0.001"],
        &["--mode", "gauss"],
        &["--dim", "2"],
        &["--profile", r#"{"family":"power_law","beta":1}"#],
        &["--tail", "extended"],
        &["--format", "json"],
    ];
    for flip in flips {
        let mut args: Vec<&str> = base.to_vec();
        args.extend_from_slice(flip);
        let o = run(&args);
        let text = stdout(&o);
        let h = if flip[0] == "--format" {
            serde_json::from_str::<serde_json::Value>(&text).unwrap()["provenance"]["config_hash"]
                .as_str()
                .unwrap()
                .to_string()
        } else {
            assert_eq!(o.status.code(), Some(0), "{flip:?}: {}", String::from_utf8_lossy(&o.stderr));
            header(&text, "config_hash")
        };
        assert_ne!(h, h0, "hash unchanged by {flip:?}");
    }
}

#[test]
fn output_path_is_not_hashed() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("barrier.csv");
    let o = run(&["barrier", "--r", "0.25,0.125", "--output", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert!(o.stdout.is_empty());
    let written = std::fs::read_to_string(&path).unwrap();
    assert_eq!(header(&written, "config_hash"), hash(&["barrier", "--r", "0.25,0.125"]));
    assert!(written.contains("r,max_ratio,argmax_x"));
}

#[test]
fn regularity_reads_data_files() {
    let dir = tempfile::tempdir().unwrap();
    let f = dir.path().join("f.csv");
    // one value per interior node
    let values: Vec<String> = (0..256).map(|k| format!("{}", (k as f64 * 0.1).sin())).collect();
    std::fs::write(&f, format!("f\n{}\n", values.join("\n"))).unwrap();
    let o = run(&["regularity", "--nodes", "256", "--samples", "1", "--f", f.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    assert!(text.contains("# block=annuli\nsample,n,r_n,osc_n,nodes,used"));
    assert!(text.contains("sample,beta_fit,b_fit,theta,holder_quotient,rhs_bound_empirical"));

    std::fs::write(&f, "1\n2\n3\n").unwrap();
    let o = run(&["regularity", "--nodes", "256", "--samples", "1", "--f", f.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn exit_codes() {
    assert_eq!(run(&["simulate", "--eps", "often"]).status.code(), Some(2));
    assert_eq!(run(&["simulate", "--bogus"]).status.code(), Some(2));
    assert_eq!(run(&["symbol", "--profile", "/no/such/profile.json"]).status.code(), Some(2));
    assert_eq!(run(&["barrier", "--profile", r#"{"family":"constant","r0":"inf"}"#]).status.code(), Some(2));
    assert_eq!(run(&["regularity", "--r", "0.1", "--nodes", "128", "--samples", "1"]).status.code(), Some(3));
    assert_eq!(run(&["simulate"]).status.code(), Some(0));
    assert_eq!(run(&["--help"]).status.code(), Some(0));
}

#[test]
fn tampered_lower_constant_fails_the_check() {
    let o = run(&["check", "--profile", r#"{"family":"log","c_lower":0.99}"#]);
    assert_eq!(o.status.code(), Some(4));
    let text = stdout(&o);
    let failed: Vec<&str> = text.lines().filter(|l| l.ends_with(",false")).collect();
    assert!(failed.iter().any(|l| l.contains("weak lower scaling")), "{failed:?}");
}

#[test]
fn check_passes_by_default() {
    let o = run(&["check"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    assert!(text.contains("module,invariant,observed,required,passed"));
    for module in ["scale_functions", "levy_symbol", "jump_process", "nonlocal_operator", "regularity_lab", "cli"] {
        assert!(text.lines().any(|l| l.starts_with(module)), "no rows for {module}");
    }
}
