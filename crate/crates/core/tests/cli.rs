use std::f64::consts::{PI, TAU};
use std::fs;
use std::path::PathBuf;
use std::process::{Command, Output};

use boundary_gp::dissipator::{build_coeffs, AtomParams, Geometry};
use boundary_gp::dynamics::rho_analytic;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_boundary-gp"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn rows(csv: &str) -> Vec<Vec<f64>> {
    csv.lines()
        .skip(1)
        .map(|l| l.split(',').map(|v| v.parse().unwrap()).collect())
        .collect()
}

fn record(text: &str, key: &str) -> f64 {
    text.lines()
        .find_map(|l| l.strip_prefix(&format!("{key} = ")))
        .unwrap_or_else(|| panic!("missing {key}"))
        .parse()
        .unwrap()
}

fn scratch(name: &str) -> PathBuf {
    let dir = PathBuf::from(env!("CARGO_TARGET_TMPDIR"));
    dir.join(name)
}

#[test]
fn modfuncs_header_and_limits() {
    let o = run(&[
        "modfuncs", "--z-min", "1e-9", "--z-max", "1e6", "--points", "16",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert_eq!(text.lines().next(), Some("z_m,u,fx,fz"));
    let r = rows(&text);
    assert_eq!(r.len(), 16);
    let first = &r[0];
    assert!(first[1] < 1e-2);
    assert!((first[3] + 1.0).abs() <= 1e-4);
    let last = r.last().unwrap();
    assert_eq!(last[0], 1e6);
    assert!(last[2].abs() <= 1e-6 && last[3].abs() <= 1e-6);
}

#[test]
fn modfuncs_bad_grid_is_config_error() {
    let o = run(&["modfuncs", "--z-min", "1e-4", "--z-max", "1e-6"]);
    assert_eq!(o.status.code(), Some(1));
    let o = run(&["modfuncs", "--points", "0"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn evolve_matches_closed_form() {
    let o = run(&[
        "evolve",
        "--cycles",
        "1",
        "--gamma-ratio",
        "5e-3",
        "--theta-rad",
        "1.1",
        "--z-m",
        "5e-2",
    ]);
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    let text = stdout(&o);
    assert_eq!(text.lines().next(), Some("phi,ee,re_eg,im_eg,gg,purity"));
    let r = rows(&text);
    assert_eq!(r.len(), 2001);

    let first = &r[0];
    assert_eq!(first[0], 0.0);
    assert!((first[1] - (0.55f64).cos().powi(2)).abs() < 1e-15);
    assert!((first[2] - 0.5 * (1.1f64).sin()).abs() < 1e-15);
    assert!((first[5] - 1.0).abs() <= 1e-12);

    let p = AtomParams::new(3e9, 5e-3, 1.1, [1.0 / 3.0; 3]).unwrap();
    let c = build_coeffs(&p, &Geometry::at_distance(5e-2, 3e9).unwrap());
    let last = r.last().unwrap();
    assert!((last[0] - TAU).abs() < 1e-12);
    let exact = rho_analytic(last[0], &p, &c);
    assert!((last[1] - exact.ee).abs() <= 1e-8);
    assert!((last[4] - exact.gg).abs() <= 1e-8);
}

#[test]
fn evolve_stride_keeps_last_row() {
    let o = run(&[
        "evolve",
        "--cycles",
        "1",
        "--steps-per-cycle",
        "100",
        "--stride",
        "30",
    ]);
    let r = rows(&stdout(&o));
    let phi: Vec<f64> = r.iter().map(|row| row[0]).collect();
    assert_eq!(phi.len(), 5);
    assert!((phi[4] - TAU).abs() < 1e-12);
}

#[test]
fn evolve_instability_is_numerical_failure() {
    let o = run(&["evolve", "--cycles", "100", "--steps-per-cycle", "1"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("numerical"));
}

#[test]
fn evolve_refuses_huge_runs() {
    let o = run(&["evolve"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn phase_free_space_cycle() {
    let o = run(&["phase", "--z-m", "inf", "--cycles", "1"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let env = record(&text, "environment_part");
    assert!((env - (-PI * PI * 1e-6)).abs() <= 1e-10, "{env}");
    assert!((record(&text, "first_order_cycle_environment") - env).abs() <= 1e-14);
    assert!((record(&text, "total") - record(&text, "geometric_part") - env).abs() <= 1e-15);
}

#[test]
fn phase_excited_start_is_zero() {
    let o = run(&["phase", "--theta-rad", "0", "--cycles", "1"]);
    assert_eq!(record(&stdout(&o), "total"), 0.0);
}

#[test]
fn phase_reference_profile_is_finite() {
    let o = run(&["phase", "--beta-cm3", "1e-18", "--z-m", "1e-6"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    for key in ["total", "geometric_part", "environment_part"] {
        assert!(record(&text, key).is_finite());
    }
    assert_eq!(record(&text, "nonradiative_ratio"), 1e-6);
}

#[test]
fn sweep_default_profile() {
    let o = run(&["sweep"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert_eq!(text.lines().next(), Some("z_m,delta_rad"));
    let r = rows(&text);
    assert_eq!(r.len(), 60);
    assert_eq!(r[0][1], 0.0);
    assert!(r.windows(2).all(|w| w[1][1] >= w[0][1]));
    // 17 significant digits
    let field = text.lines().nth(2).unwrap().split(',').nth(1).unwrap();
    assert_eq!(
        field
            .split('e')
            .next()
            .unwrap()
            .replace(['.', '-'], "")
            .len(),
        17
    );
}

#[test]
fn sweep_is_deterministic_and_writes_file() {
    let a = scratch("sweep_a.csv");
    let b = scratch("sweep_b.csv");
    for path in [&a, &b] {
        let o = run(&["sweep", "--out-path", path.to_str().unwrap()]);
        assert_eq!(o.status.code(), Some(0));
        assert!(o.stdout.is_empty());
    }
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());
}

#[test]
fn config_file_and_flag_override() {
    let path = scratch("profile.conf");
    fs::write(
        &path,
        "# reference profile with a custom grid\nz-min = 1e-6\nz_max = 1e-5\npoints = 4 # four rows\ngrid = linear\n",
    )
    .unwrap();
    let o = run(&["sweep", "--config", path.to_str().unwrap(), "--points", "3"]);
    assert_eq!(o.status.code(), Some(0));
    let r = rows(&stdout(&o));
    assert_eq!(r.len(), 3);
    assert_eq!(r[1][0], 5.5e-6);
}

#[test]
fn configuration_errors_exit_one() {
    assert_eq!(
        run(&["phase", "--time-s", "1", "--cycles", "1"])
            .status
            .code(),
        Some(1)
    );
    assert_eq!(
        run(&["phase", "--gamma-ratio", "-1"]).status.code(),
        Some(1)
    );
    assert_eq!(
        run(&["phase", "--policy", "dressed"]).status.code(),
        Some(1)
    );
    assert_eq!(
        run(&["phase", "--config", "/nonexistent/file"])
            .status
            .code(),
        Some(1)
    );
    assert_eq!(run(&["sweep", "--z0-m", "0"]).status.code(), Some(1));
    assert_eq!(run(&["unknown"]).status.code(), Some(1));

    let path = scratch("both.conf");
    fs::write(&path, "time_s = 1e-3\ncycles = 2\n").unwrap();
    assert_eq!(
        run(&["phase", "--config", path.to_str().unwrap()])
            .status
            .code(),
        Some(1)
    );
}

#[test]
fn alpha_is_renormalized_with_warning() {
    let o = run(&["phase", "--alpha", "1,1,1", "--cycles", "1"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&o.stderr).contains("renormalized"));
    let reference = run(&["phase", "--cycles", "1"]);
    assert_eq!(
        record(&stdout(&o), "environment_part"),
        record(&stdout(&reference), "environment_part")
    );
}

#[test]
fn verify_passes_and_reports() {
    let o = run(&["verify"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    let text = stdout(&o);
    let lines: Vec<&str> = text.lines().filter(|l| l.contains("residual")).collect();
    assert!(lines.len() >= 10);
    assert!(lines.iter().all(|l| l.ends_with("PASS")));
}

#[test]
fn verify_perturbation_fails() {
    let o = run(&["verify", "--perturb", "1e-3"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stdout(&o).contains("FAIL"));
}
