use std::fs;
use std::path::Path;
use std::process::{Command, Output};
use std::time::{Duration, Instant};

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_momograd"));
    c.env_remove("MOMOGRAD_SEED");
    c
}

fn run(args: &[&str], dir: &Path) -> Output {
    bin().args(args).current_dir(dir).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn smoke_config() -> String {
    format!("{}/configs/smoke.toml", env!("CARGO_MANIFEST_DIR"))
}

#[test]
fn solve_reaches_criticality() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["solve", "AP-EX", "--method", "mmg-i", "--seed", "7"], dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).contains("status: Critical"), "{}", stdout(&o));
    let trace = fs::read_to_string(dir.path().join("trace.jsonl")).unwrap();
    assert!(trace.lines().count() >= 1);

    let o = run(&["solve", "BK1", "--method", "sd", "--x0", "-3,8", "--trace", "bk1.jsonl"], dir.path());
    assert_eq!(o.status.code(), Some(0));
    assert!(dir.path().join("bk1.jsonl").exists());
}

#[test]
fn solve_usage_errors() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(run(&["solve", "NOPE"], dir.path()).status.code(), Some(64));
    assert_eq!(run(&["solve", "AP-EX", "--x0", "1,2"], dir.path()).status.code(), Some(64));
    assert_eq!(run(&["solve", "AP-EX", "--method", "mmg-ii", "--lipschitz", "-1"], dir.path()).status.code(), Some(64));
    assert_eq!(run(&["frobnicate"], dir.path()).status.code(), Some(64));
}

#[test]
fn solve_reports_iteration_cap_and_eval_errors() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["solve", "JOS1a", "--method", "sd", "--max-iters", "2"], dir.path());
    assert_eq!(o.status.code(), Some(2));
    let o = run(&["solve", "SD", "--x0", "1,-1,1,1"], dir.path());
    assert_eq!(o.status.code(), Some(4));
}

#[test]
fn help_lists_every_flag() {
    let dir = tempfile::tempdir().unwrap();
    let cases: [(&str, &[&str]); 4] = [
        (
            "solve",
            &[
                "--method", "--x0", "--seed", "--memory", "--gamma-rule", "--zeta", "--rho", "--delta",
                "--init-mode", "--eps-theta", "--max-iters", "--lipschitz", "--scale", "--trace",
            ],
        ),
        ("bench", &["--jobs", "--out", "--starts", "--seed"]),
        ("metrics", &["--records", "--fronts", "--out", "--aggregation", "--match-tol"]),
        ("problems", &["--out"]),
    ];
    for (cmd, flags) in cases {
        let o = run(&[cmd, "--help"], dir.path());
        assert_eq!(o.status.code(), Some(0));
        let text = stdout(&o);
        for f in flags {
            assert!(text.contains(f), "`{cmd} --help` misses {f}");
        }
    }
}

#[test]
fn problems_lists_registry() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["problems"], dir.path());
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("name,source,n,m,convex,x_L,x_U"));
    assert_eq!(lines.count(), momograd::registry().len());
}

#[test]
fn smoke_bench_writes_all_outputs_and_metrics_reproduce_them() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("smoke");
    let t0 = Instant::now();
    let o = run(&["bench", &smoke_config(), "--out", out.to_str().unwrap(), "--jobs", "2"], dir.path());
    assert!(t0.elapsed() < Duration::from_secs(60));
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    for f in [
        "records.csv",
        "profiles.csv",
        "profiles_f_evals.csv",
        "purity.csv",
        "profiles_purity.csv",
        "spacing.csv",
    ] {
        assert!(out.join(f).is_file(), "missing {f}");
    }
    let records = fs::read_to_string(out.join("records.csv")).unwrap();
    // five starts, two problems, six solvers
    assert_eq!(records.lines().count(), 1 + 5 * 2 * 6);
    assert!(fs::read_dir(out.join("fronts")).unwrap().count() > 0);

    let again = dir.path().join("again");
    let o = run(
        &[
            "metrics",
            "--records",
            out.join("records.csv").to_str().unwrap(),
            "--fronts",
            out.join("fronts").to_str().unwrap(),
            "--out",
            again.to_str().unwrap(),
        ],
        dir.path(),
    );
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    for f in ["profiles.csv", "purity.csv", "spacing.csv", "profiles_purity.csv"] {
        assert_eq!(
            fs::read_to_string(out.join(f)).unwrap(),
            fs::read_to_string(again.join(f)).unwrap(),
            "{f} differs"
        );
    }
}

#[test]
fn seed_env_overrides_config_and_flag_overrides_env() {
    let dir = tempfile::tempdir().unwrap();
    let go = |out: &str, env: Option<&str>, flag: Option<&str>| {
        let mut c = bin();
        c.current_dir(dir.path())
            .args(["bench", &smoke_config(), "--starts", "2", "--out", out]);
        if let Some(s) = flag {
            c.args(["--seed", s]);
        }
        if let Some(e) = env {
            c.env("MOMOGRAD_SEED", e);
        }
        assert_eq!(c.output().unwrap().status.code(), Some(0));
        let text = fs::read_to_string(dir.path().join(out).join("records.csv")).unwrap();
        text.lines().nth(1).unwrap().split(',').nth(3).unwrap().to_string()
    };
    assert_eq!(go("a", None, None), "1");
    assert_eq!(go("b", Some("77"), None), "77");
    assert_eq!(go("c", Some("77"), Some("5")), "5");
    let o = bin()
        .current_dir(dir.path())
        .env("MOMOGRAD_SEED", "x")
        .args(["bench", &smoke_config()])
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(64));
}

#[test]
fn bench_input_errors() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(run(&["bench", "missing.toml"], dir.path()).status.code(), Some(66));
    fs::write(dir.path().join("bad.toml"), "starts = 3\nunknown_key = 1\n").unwrap();
    assert_eq!(run(&["bench", "bad.toml"], dir.path()).status.code(), Some(64));
    fs::write(dir.path().join("suite.toml"), "suite = [\"NOPE\"]\n").unwrap();
    assert_eq!(run(&["bench", "suite.toml"], dir.path()).status.code(), Some(64));
}

const HEADER: &str = "problem,method,start,seed,status,iters,f_evals,jac_evals,theta,walltime_ms,F_terminal";

#[test]
fn single_solver_profile_is_one_at_tau_one() {
    let dir = tempfile::tempdir().unwrap();
    let body = format!(
        "{HEADER}\nAP-EX,SD,0,0,Critical,4,9,5,-1e-7,0.1,0.1;0.2\nBK1,SD,0,0,Critical,7,15,8,-1e-7,0.1,1;2\n"
    );
    fs::write(dir.path().join("records.csv"), body).unwrap();
    fs::create_dir(dir.path().join("fronts")).unwrap();
    let o = run(
        &["metrics", "--records", "records.csv", "--fronts", "fronts", "--out", "m"],
        dir.path(),
    );
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let prof = fs::read_to_string(dir.path().join("m/profiles.csv")).unwrap();
    let first = prof.lines().nth(1).unwrap();
    assert_eq!(first, "SD,1,1");
    let spacing = fs::read_to_string(dir.path().join("m/spacing.csv")).unwrap();
    assert_eq!(spacing, "problem,SD\nAP-EX,NA\nBK1,NA\n");
}

#[test]
fn malformed_records_are_data_errors() {
    let dir = tempfile::tempdir().unwrap();
    fs::create_dir(dir.path().join("fronts")).unwrap();
    let args = ["metrics", "--records", "records.csv", "--fronts", "fronts", "--out", "m"];
    fs::write(dir.path().join("records.csv"), "a,b\n1,2\n").unwrap();
    assert_eq!(run(&args, dir.path()).status.code(), Some(65));
    fs::write(
        dir.path().join("records.csv"),
        format!("{HEADER}\nAP-EX,SD,zero,0,Critical,4,9,5,-1e-7,0.1,0.1;0.2\n"),
    )
    .unwrap();
    let o = run(&args, dir.path());
    assert_eq!(o.status.code(), Some(65));
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 2"));
    assert_eq!(
        run(&["metrics", "--records", "none.csv", "--fronts", "fronts"], dir.path()).status.code(),
        Some(66)
    );
}
