use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_minbcast"));
    cmd.env_remove("MINBCAST_OUT_DIR");
    cmd
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("minbcast-cli-{name}-{}", std::process::id()));
    let _ = fs::remove_dir_all(&dir);
    fs::create_dir_all(&dir).unwrap();
    dir
}

fn run(cmd: &mut Command) -> Output {
    let out = cmd.output().unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    out
}

fn generate(dir: &Path, side: u32, p: f64) -> PathBuf {
    let path = dir.join("inst.txt");
    run(bin().args(["generate", "--side", &side.to_string(), "--p", &p.to_string(), "--seed", "5", "-o"]).arg(&path));
    path
}

#[test]
fn generate_assign_round_trip() {
    let dir = scratch("assign");
    let inst = generate(&dir, 24, 0.5);
    let again = dir.join("again.txt");
    run(bin().args(["generate", "--side", "24", "--p", "0.5", "--seed", "5", "-o"]).arg(&again));
    assert_eq!(fs::read_to_string(&inst).unwrap(), fs::read_to_string(&again).unwrap());
    for algo in ["cell", "mst", "oct"] {
        let out_file = dir.join(format!("{algo}.txt"));
        let mut cmd = bin();
        cmd.args(["assign", "--algo", algo, "--instance"]).arg(&inst).arg("-o").arg(&out_file);
        if algo == "oct" {
            cmd.args(["--c", "1"]);
        }
        let out = run(&mut cmd);
        let stderr = String::from_utf8_lossy(&out.stderr);
        assert!(stderr.contains("cost "), "{stderr}");
        assert!(!fs::read_to_string(&out_file).unwrap().is_empty());
    }
}

#[test]
fn bad_source_is_rejected() {
    let dir = scratch("source");
    let inst = generate(&dir, 10, 0.3);
    let out = bin().args(["assign", "--algo", "mst", "--source", "nope", "--instance"]).arg(&inst).output().unwrap();
    assert!(!out.status.success());
}

#[test]
fn simulate_prints_phases() {
    let dir = scratch("sim");
    let inst = generate(&dir, 24, 0.8);
    let out = run(bin()
        .args(["simulate", "--lambda", "6", "--l", "16.97", "--phases", "3", "--instance"])
        .arg(&inst)
        .args(["--trace"])
        .arg(dir.join("trace.txt")));
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert_eq!(stdout.lines().filter(|l| !l.starts_with('#')).count(), 3, "{stdout}");
    assert!(fs::read_to_string(dir.join("trace.txt")).unwrap().starts_with("# phase"));
}

#[test]
fn experiment_writes_into_out_dir_from_env() {
    let dir = scratch("env");
    let out = run(bin()
        .env("MINBCAST_OUT_DIR", &dir)
        .args(["experiment", "--sides", "13", "--probs", "0.5", "--trials", "5", "--name", "t"]));
    let csv = fs::read_to_string(dir.join("t.csv")).unwrap();
    assert!(csv.contains("side,p,feasible,trials,min_ratio,avg_ratio,max_ratio"));
    assert!(dir.join("t.dat").exists());
    assert_eq!(String::from_utf8_lossy(&out.stdout), csv);
}

#[test]
fn too_many_errors_exit_with_two() {
    let dir = scratch("errors");
    let config = dir.join("exp.conf");
    // The exhaustive optimum refuses instances this large.
    fs::write(&config, "# every trial errors\nsides = 12\nprobs = 0.9\ntrials = 4\ndenominator = opt\n").unwrap();
    let out = bin().arg("--out-dir").arg(&dir).args(["experiment", "--config"]).arg(&config).output().unwrap();
    assert_eq!(out.status.code(), Some(2), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn bound_and_sweep() {
    let out = run(bin().args(["bound", "--n", "1000000", "--epsilon", "0.5", "--delta", "0.5", "--p-min", "0.3", "--p-max", "0.6", "--l", "89.08987181403393"]));
    let stdout = String::from_utf8_lossy(&out.stdout);
    let ln: f64 = stdout.lines().find_map(|l| l.strip_prefix("ln_bound ")).unwrap().parse().unwrap();
    assert!((ln - 1217.9625).abs() < 1e-6, "{stdout}");
    let out = run(bin().args(["sweep", "--sides", "13,20", "--trials", "2"]));
    assert!(String::from_utf8_lossy(&out.stdout).contains("ln_bound"));
}
