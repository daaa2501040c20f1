use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

fn ksblow(cmd: &str, config: Option<&str>, dir: &Path) -> Output {
    let mut c = Command::new(env!("CARGO_BIN_EXE_ksblow"));
    c.arg(cmd).arg("--out").arg(dir.join("out"));
    if let Some(text) = config {
        let path = dir.join("run.toml");
        fs::write(&path, text).unwrap();
        c.arg("--config").arg(path);
    }
    c.output().unwrap()
}

fn error_json(dir: &Path) -> serde_json::Value {
    serde_json::from_str(&fs::read_to_string(dir.join("out/error.json")).unwrap()).unwrap()
}

#[test]
fn degenerate_window_rejected() {
    let dir = TempDir::new().unwrap();
    let out = ksblow("rate", Some("[window]\nT = 1e-2\nepsT = 1e-4\n"), dir.path());
    assert_eq!(out.status.code(), Some(1));
    let err = error_json(dir.path());
    assert!(err.to_string().contains("window"), "{err}");
}

#[test]
fn sigma_out_of_range_rejected() {
    let dir = TempDir::new().unwrap();
    let out = ksblow("rate", Some("[rate]\nsigma = 0.6\n"), dir.path());
    assert_eq!(out.status.code(), Some(1));
    assert!(error_json(dir.path()).to_string().contains("sigma"));
}

#[test]
fn all_violations_reported() {
    let dir = TempDir::new().unwrap();
    let text = "[sim]\ncells = -3\ncfl = \"fast\"\nbogus = 1\n[nope]\n";
    let out = ksblow("sim", Some(text), dir.path());
    assert_eq!(out.status.code(), Some(1));
    let err = error_json(dir.path()).to_string();
    for key in ["sim.cells", "sim.cfl", "sim.bogus", "[nope]"] {
        assert!(err.contains(key), "{key} missing from {err}");
    }
}

#[test]
fn mass_phi_is_deterministic() {
    let a = TempDir::new().unwrap();
    let b = TempDir::new().unwrap();
    assert_eq!(ksblow("mass-phi", None, a.path()).status.code(), Some(0));
    assert_eq!(ksblow("mass-phi", None, b.path()).status.code(), Some(0));
    let x = fs::read(a.path().join("out/mass_phi.csv")).unwrap();
    let y = fs::read(b.path().join("out/mass_phi.csv")).unwrap();
    assert!(!x.is_empty());
    assert_eq!(x, y);
}

#[test]
fn rate_outputs() {
    let dir = TempDir::new().unwrap();
    let out = ksblow("rate", None, dir.path());
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let header = |f: &str| {
        fs::read_to_string(dir.path().join("out").join(f)).unwrap().lines().find(|l| !l.starts_with('#')).unwrap().to_string()
    };
    assert_eq!(header("residual_profile.csv"), "t,T_minus_t,R_pstar,R_p1,R_p2,weighted_R");
    assert_eq!(header("rate_samples.csv"), "ell,T_minus_t,p_star,p1,p2");
    let summary: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("out/rate_summary.json")).unwrap()).unwrap();
    assert_eq!(summary["converged"], true);
}

#[test]
fn near_critical_sim_accepted() {
    let dir = TempDir::new().unwrap();
    let text = "[sim]\nm_multiplier = 1.05\ncells = 256\nmax_t = 0.05\n";
    let out = ksblow("sim", Some(text), dir.path());
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = fs::read_to_string(dir.path().join("out/diagnostics.csv")).unwrap();
    let header = csv.lines().find(|l| !l.starts_with('#')).unwrap();
    assert_eq!(header, "t,M,m2,dm2dt_fit,u_peak,lambda_eff,q_indicator");
    assert!(dir.path().join("out/summary.json").exists());
}

#[test]
fn supercritical_sim_exits_with_blowup_code() {
    let dir = TempDir::new().unwrap();
    let out = ksblow("sim", Some("[sim]\nm_multiplier = 2.0\n"), dir.path());
    assert_eq!(out.status.code(), Some(2));
    let summary: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("out/summary.json")).unwrap()).unwrap();
    assert_eq!(summary["status"], "BlowUp");
}

#[test]
fn selftest_and_specialfn_pass() {
    let dir = TempDir::new().unwrap();
    assert_eq!(ksblow("selftest", None, dir.path()).status.code(), Some(0));
    assert_eq!(ksblow("specialfn-check", None, dir.path()).status.code(), Some(0));
    assert!(dir.path().join("out/selftest.csv").exists());
    assert!(dir.path().join("out/specialfn.csv").exists());
}
