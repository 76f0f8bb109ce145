use isocap::cli::{self, EXIT_USAGE};
use isocap::report::VerificationReport;

fn run(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("isocap").chain(args.iter().copied());
    let code = cli::run(argv, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

#[test]
fn profile_gaussian_has_fifty_rows() {
    let (code, out, _) = run(&["profile", "--measure", "gaussian", "--q", "2"]);
    assert_eq!(code, 0);
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(lines[0], "t,I,I_tilde,Cap_1,Cap_2");
    assert_eq!(lines.len(), 51);
    assert!(lines[1..].iter().all(|l| l.split(',').count() == 5));
}

#[test]
fn profile_uniform_has_constant_two_sided_column() {
    let (code, out, _) = run(&["profile", "--measure", "uniform:-1:1", "--tgrid", "0.05:0.45:9"]);
    assert_eq!(code, 0);
    for line in out.lines().skip(1) {
        let v: f64 = line.split(',').nth(2).unwrap().parse().unwrap();
        assert!((v - 0.5).abs() < 1e-12, "{line}");
    }
}

#[test]
fn empty_t_grid_is_a_usage_error() {
    let (code, _, err) = run(&["profile", "--tgrid", "0.1:0.4:0"]);
    assert_eq!(code, EXIT_USAGE, "{err}");
}

#[test]
fn verify_all_gaussian_passes_and_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.json");
    let b = dir.path().join("b.json");
    let (code, _, err) = run(&["verify", "all", "--out", a.to_str().unwrap()]);
    assert_eq!(code, 0, "{err}");
    let (code, _, _) = run(&["verify", "all", "--out", b.to_str().unwrap()]);
    assert_eq!(code, 0);
    let (ja, jb) = (std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    assert_eq!(ja, jb);
    let report: VerificationReport = serde_json::from_slice(&ja).unwrap();
    assert_eq!(report.schema, "isocap-report/1");
    for leg in &report.legs {
        assert!(!leg.reference.is_empty());
        assert_eq!(leg.passed(), leg.margin >= -leg.tolerance, "{}", leg.name);
    }
}

#[test]
fn converse_on_power_alpha_is_a_hypothesis_failure() {
    let (code, out, _) = run(&["verify", "converse", "--measure", "power_alpha:0.5"]);
    assert_eq!(code, 2);
    assert!(out.contains("hypothesis_fail"));
}

#[test]
fn malformed_config_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("run.json");
    std::fs::write(&path, "{ \"measure\": ").unwrap();
    let (code, _, _) = run(&["verify", "lift", "--config", path.to_str().unwrap()]);
    assert_eq!(code, EXIT_USAGE);
    let (code, _, _) = run(&["verify", "sideways"]);
    assert_eq!(code, EXIT_USAGE);
}

#[test]
fn config_file_overrides_flags() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("run.json");
    std::fs::write(&path, r#"{"measure": "uniform:-1:1", "tgrid": "0.1:0.5:5"}"#).unwrap();
    let (code, out, _) = run(&["profile", "--measure", "gaussian", "--config", path.to_str().unwrap()]);
    assert_eq!(code, 0);
    assert_eq!(out.lines().count(), 6);
    assert!(out.lines().nth(1).unwrap().contains(",5.0000000000000000e-1,"));
}

#[test]
fn sweep_csv_rows_carry_times() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("sweep.csv");
    let (code, _, _) = run(&["verify", "dual_l1", "--nodes", "801", "--times", "0.1,0.5", "--csv", csv.to_str().unwrap()]);
    assert_eq!(code, 0);
    let text = std::fs::read_to_string(csv).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "t,lhs,rhs,margin,tol,pass");
    let first: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert_eq!(first[0].parse::<f64>().unwrap(), 0.1);
    assert_eq!(first[5], "true");
}

#[test]
fn constants_reports_poincare_and_linear() {
    let (code, out, _) = run(&["constants", "--measure", "gaussian"]);
    assert_eq!(code, 0);
    let rows: Vec<serde_json::Value> = serde_json::from_str(&out).unwrap();
    let get = |name: &str| rows.iter().find(|r| r["name"] == name).unwrap()["value"].as_f64().unwrap();
    assert!((get("D_Poin") - 1.0).abs() < 1e-3);
    assert!((get("D_Lin") - 0.7979).abs() < 2e-3);
    let (_, out, _) = run(&["constants", "--measure", "uniform:-1:1"]);
    let rows: Vec<serde_json::Value> = serde_json::from_str(&out).unwrap();
    let poin = rows.iter().find(|r| r["name"] == "D_Poin").unwrap()["value"].as_f64().unwrap();
    assert!((poin - std::f64::consts::FRAC_PI_2).abs() < 1e-3);
}
