use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_ulamkit"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn json(out: &Output) -> serde_json::Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

const ROTATION: [&str; 11] = [
    "constant",
    "--form",
    "III",
    "--alpha",
    "1-2*t/(1+t^2)",
    "--beta",
    "t",
    "--interval",
    "(-inf,inf)",
    "--direction",
    "forward",
];

#[test]
fn rotation_constant() {
    let out = run(&ROTATION);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let v = json(&out);
    let k = v["K"].as_f64().unwrap();
    assert!((k - (2.0 + 2f64.sqrt())).abs() < 1e-6, "{k}");
    assert!((v["t_star"].as_f64().unwrap() - (2f64.sqrt() - 1.0)).abs() < 1e-4);
    assert_eq!(v["conditions"]["divergence"], "holds");
}

#[test]
fn unstable_shear_exits_two() {
    for dir in ["forward", "backward", "auto"] {
        let out = run(&[
            "constant",
            "--form",
            "II",
            "--lambda",
            "2*t/(1+t^2)",
            "--mu",
            "1",
            "--interval",
            "(-inf,inf)",
            "--direction",
            dir,
        ]);
        assert_eq!(out.status.code(), Some(2), "{dir}");
    }
}

#[test]
fn usage_errors_exit_one() {
    assert_eq!(run(&["constant", "--form", "IV"]).status.code(), Some(1));
    assert_eq!(run(&["constant", "--form", "I", "--lambda1", "1+"]).status.code(), Some(1));
    assert_eq!(run(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(run(&["example", "ex7.1"]).status.code(), Some(1));
    assert_eq!(run(&["--help"]).status.code(), Some(0));
    let out = bin().args(ROTATION).env("ULAMKIT_THREADS", "zero").output().unwrap();
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn identical_runs_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let mut outputs = Vec::new();
    for k in 0..2 {
        let csv = dir.path().join(format!("p{k}.csv"));
        let out = run(&["portrait", "--preset", "node", "--orbits", "4", "--out", csv.to_str().unwrap()]);
        assert_eq!(out.status.code(), Some(0));
        let prof = dir.path().join(format!("k{k}.csv"));
        let mut args = ROTATION.to_vec();
        args.extend(["--profile", prof.to_str().unwrap()]);
        let c = run(&args);
        outputs.push((std::fs::read(csv).unwrap(), c.stdout, std::fs::read(prof).unwrap()));
    }
    assert_eq!(outputs[0], outputs[1]);
    let threaded = bin().args(ROTATION).env("ULAMKIT_THREADS", "3").output().unwrap();
    assert_eq!(threaded.stdout, outputs[0].1);
}

#[test]
fn config_file_with_overrides() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    std::fs::write(
        &cfg,
        "[system]\nform = \"III\"\nalpha = \"2\"\nbeta = \"1\"\ninterval = \"(-inf,inf)\"\n[constant]\nwindow = \"-40,40\"\n",
    )
    .unwrap();
    let c = cfg.to_str().unwrap();
    let k = |extra: &[&str]| {
        let mut args = vec!["constant", "--config", c];
        args.extend(extra);
        let out = run(&args);
        assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
        json(&out)["K"].as_f64().unwrap()
    };
    assert!((k(&[]) - 0.5).abs() < 1e-9);
    assert!((k(&["--alpha", "-4"]) - 0.25).abs() < 1e-9);
    assert!((k(&["--norm", "max"]) - 0.5 * 2f64.sqrt()).abs() < 1e-9);
    std::fs::write(&cfg, "[system]\nfrom = \"III\"\n").unwrap();
    assert_eq!(run(&["constant", "--config", c]).status.code(), Some(1));
}

fn deviations(csv: &str) -> Vec<f64> {
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("orbit,t,phi_1,phi_2,x_1,x_2,deviation"));
    lines.map(|l| l.rsplit(',').next().unwrap().parse().unwrap()).collect()
}

#[test]
fn saddle_portrait_stays_in_tube() {
    let out = run(&["portrait", "--preset", "saddle", "--eps", "0.2"]);
    assert_eq!(out.status.code(), Some(0));
    let d = deviations(&String::from_utf8(out.stdout).unwrap());
    assert_eq!(d.len(), 8 * 201);
    assert!(d.iter().all(|&x| x <= 0.2 + 1e-9), "{:?}", d.iter().cloned().fold(0.0, f64::max));
}

#[test]
fn sharpness_writes_ratio_csv() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("r.csv");
    let out = run(&[
        "sharpness",
        "--form",
        "I",
        "--lambda1",
        "1",
        "--lambda2",
        "-1",
        "--direction",
        "hyperbolic",
        "--horizon=-20,20",
        "--points",
        "101",
        "--csv",
        csv.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert!((v["sup_ratio"].as_f64().unwrap() - 1.0).abs() < 5e-3);
    let text = std::fs::read_to_string(csv).unwrap();
    assert!(text.starts_with("t,kappa_t,deviation_over_eps\n"));
    assert_eq!(text.lines().count(), 102);
}

#[test]
fn shadow_recovers_anchor() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("d.csv");
    // X(t)(0.3, 0.2) plus a wobble of size 0.01
    let out = run(&[
        "shadow",
        "--form",
        "I",
        "--lambda1",
        "1/(1-t)",
        "--lambda2",
        "-1/t",
        "--interval",
        "(0,1)",
        "--direction",
        "hyperbolic",
        "--phi1",
        "0.15/(1-t) + 0.01*sin(t)",
        "--phi2",
        "0.1/t",
        "--csv",
        csv.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let v = json(&out);
    let a = v["anchor"].as_array().unwrap();
    assert!((a[0].as_f64().unwrap() - 0.3).abs() < 1e-6 && (a[2].as_f64().unwrap() - 0.2).abs() < 1e-6);
    assert!(v["ratio"].as_f64().unwrap() <= 1.0);
    assert!(std::fs::read_to_string(csv).unwrap().starts_with("t,deviation\n"));
}

#[test]
fn transform_rejects_non_jordan() {
    let base = [
        "transform", "--a12", "i", "--a21", "-3*i", "--r11", "cos(t)", "--r12", "i*sin(t)", "--r21", "i*sin(t)",
        "--r22", "cos(t)", "--interval", "(0,pi/2)",
    ];
    let mut bad = base.to_vec();
    bad.extend(["--a11", "2*cot(t)", "--a22", "-2*cot(t)"]);
    let out = run(&bad);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(json(&out)["classification"], "general");
}

#[test]
fn example_case_passes() {
    let out = run(&["example", "ex6.4", "--json"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v[0]["pass"], true);
    assert_eq!(v[0]["status"], "verified");
}
