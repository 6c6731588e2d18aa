//! Acceptance suite: one test per criterion, each printing a single
//! pass/fail line before asserting.

use std::f64::consts::{FRAC_PI_2, PI};
use std::process::Command;
use std::sync::Arc;

use spherics::bifurcation::{
    branch_switch, continue_branch, multistart_probe, validate_solution, veron_nonradial,
    ProblemParams, StepControls,
};
use spherics::geometry::{
    conformal_invariance_residual, jacobian_density, reflect_radius, KelvinParams, Pole,
};
use spherics::shooting::{
    c_star, check_shooting_condition, energy_estimate_monitor, integrate, nonexistence_sweep,
    periodic_orbit_sweep, singular_solution_residual, Family, ShootParams,
};
use spherics::spectral::{
    count_nodal_class, AxisymFn, GegenbauerBasis, NODAL_FINE_GRID, SIMPLICITY_TOL,
};
use spherics::symmetry::{condition_a_check, moving_sphere_check_rn, DEFAULT_SLACK};

fn report(num: usize, label: &str, pass: bool) {
    println!(
        "acceptance criterion {num:2} ({label}): {}",
        if pass { "pass" } else { "fail" }
    );
    assert!(pass, "criterion {num} ({label}) failed");
}

fn basis(n: usize, modes: usize, nodes: usize) -> Arc<GegenbauerBasis> {
    Arc::new(GegenbauerBasis::build(n, modes, nodes).unwrap())
}

#[test]
fn criterion_01_eigen_exactness() {
    let mut max_rel = 0.0f64;
    for n in 2..=5usize {
        let b = basis(n, 12, 24);
        for k in 1..=10usize {
            let f = AxisymFn::mode(Arc::clone(&b), k).unwrap();
            let lf = f.apply_neg_laplacian();
            let nu = (k * (k + n - 1)) as f64;
            for (a, v) in lf.node_values.iter().zip(f.node_values.iter()) {
                max_rel = max_rel.max((a - nu * v).abs() / nu);
            }
        }
    }
    report(1, "eigen-exactness", max_rel < 1e-10);
}

#[test]
fn criterion_02_nodal_structure() {
    let mut ok = true;
    for n in 2..=5usize {
        let b = basis(n, 12, 24);
        let mut prev_zeros: Option<Vec<f64>> = None;
        for k in 1..=10usize {
            let f = AxisymFn::mode(Arc::clone(&b), k).unwrap();
            let nc = count_nodal_class(&f, NODAL_FINE_GRID, SIMPLICITY_TOL).unwrap();
            ok &= nc.class == k && nc.simple.iter().all(|s| *s);
            let mut zeros = nc.zero_locations.clone();
            zeros.sort_by(f64::total_cmp);
            if let Some(prev) = &prev_zeros {
                // each zero of the lower mode lies strictly between
                // consecutive zeros of the higher mode
                for (i, z) in prev.iter().enumerate() {
                    ok &= zeros[i] < *z && *z < zeros[i + 1];
                }
            }
            prev_zeros = Some(zeros);
        }
    }
    report(2, "nodal structure and interlacing", ok);
}

#[test]
fn criterion_03_two_solutions_at_lambda_4() {
    let b = basis(2, 64, 128);
    let params = ProblemParams::new(2, 3.0, 4.0).unwrap();
    let mut ok = true;
    for k in [1usize, 2] {
        // land just above the k-th bifurcation point, then continue to 4
        let lk = (k * (k + 1)) as f64 / 2.0;
        let switch = ProblemParams {
            lambda: lk * 1.02,
            ..params
        };
        let mut start = None;
        for amp in [0.3, -0.3, 0.15, -0.15, 0.5, -0.5] {
            if let Ok(p) = branch_switch(Arc::clone(&b), k, &switch, amp) {
                start = Some(p);
                break;
            }
        }
        let Some(start) = start else {
            ok = false;
            continue;
        };
        let branch =
            continue_branch(&start, k, &params, 4.0, &StepControls::default()).unwrap();
        let Some(pt) = branch.point_nearest(4.0) else {
            ok = false;
            continue;
        };
        ok &= (pt.lambda - 4.0).abs() < 1e-9;
        ok &= pt.nodal.as_ref().map(|nc| nc.class) == Some(k);
        ok &= pt.residual_norm < 1e-10;
        let rep = validate_solution(pt, &params, 10.0);
        ok &= rep.all_ok();
        ok &= rep.v_max >= 2.0;
    }
    report(3, "two nonconstant solutions at lambda=4", ok);
}

#[test]
fn criterion_04_uniqueness_below_threshold() {
    let b = basis(2, 64, 128);
    let mut ok = true;
    for lambda in [0.5, 0.9, 1.0] {
        let params = ProblemParams::new(2, 3.0, lambda).unwrap();
        let probe = multistart_probe(Arc::clone(&b), &params, 50, 42).unwrap();
        ok &= probe.converged == 50 && probe.all_trivial && probe.max_norm_inf < 1e-8;
    }
    report(4, "only the trivial solution below threshold", ok);
}

#[test]
fn criterion_05_hardy_threshold() {
    let b = basis(3, 64, 128);
    let s1 = veron_nonradial(4, -1.0, Arc::clone(&b), 42).unwrap();
    let s2 = veron_nonradial(4, -6.0, Arc::clone(&b), 42).unwrap();
    let s3 = veron_nonradial(4, -0.4, Arc::clone(&b), 42).unwrap();
    let mut ok = !s1.classes_found.is_empty();
    ok &= s2.classes_found.len() >= 2;
    ok &= s3.classes_found.is_empty() && s3.probe.as_ref().is_some_and(|p| p.all_trivial);
    // boundary identity: at c = -(n-2)/4 the mapped parameter equals the
    // first bifurcation point exactly
    let n = 4f64;
    let c_b = -(n - 2.0) / 4.0;
    let lambda_at_boundary = (n - 2.0) * (n - 2.0) / 4.0 - c_b;
    ok &= lambda_at_boundary == s1.lambda_1 && s1.lambda_1 == 1.5;
    report(5, "nonradial-solution threshold in c", ok);
}

#[test]
fn criterion_06_kelvin_identities() {
    let mut ok = true;
    for li in 1..=6 {
        let lambda = FRAC_PI_2 * li as f64 / 6.0;
        for i in 1..400 {
            let r = PI * i as f64 / 400.0;
            let h = reflect_radius(lambda, r).unwrap();
            ok &= (reflect_radius(lambda, h).unwrap() - r).abs() < 1e-12;
            let jj = jacobian_density(lambda, r, 3).unwrap()
                * jacobian_density(lambda, h, 3).unwrap();
            ok &= (jj - 1.0).abs() < 1e-12;
            if li == 6 {
                ok &= (h - (PI - r)).abs() < 1e-12;
            }
        }
    }
    let v = |t: f64| 1.0 / (1.1125 - t);
    let kp = KelvinParams::new(Pole::North, PI / 3.0, 3).unwrap();
    let r32 = conformal_invariance_residual(&v, &kp, &basis(3, 32, 64), 1e-3).unwrap();
    let r64 = conformal_invariance_residual(&v, &kp, &basis(3, 64, 128), 1e-3).unwrap();
    ok &= r64 < 1e-8 && r64 <= r32;
    report(6, "kelvin reflection and invariance", ok);
}

#[test]
fn criterion_07_homoclinic_benchmark() {
    let a = 3f64.powf(0.25) / 2f64.sqrt();
    let params = ShootParams::new(3, Family::AutonomousC { c: 0.0 }, a, 0.0, 15.0).unwrap();
    let traj = integrate(&params).unwrap();
    let drift = energy_estimate_monitor(&traj, &params);
    let mut shape_err = 0.0f64;
    for s in &traj.samples {
        let exact = 3f64.powf(0.25) / (2.0 * s.t.cosh()).sqrt();
        shape_err = shape_err.max((s.w - exact).abs());
    }
    let tail = traj.samples.first().unwrap().w.max(traj.samples.last().unwrap().w);
    let ok = drift < 1e-8 && traj.is_positive() && tail < 1e-3 && shape_err < 1e-8;
    report(7, "homoclinic benchmark", ok);
}

#[test]
fn criterion_08_supercritical_c_crossings() {
    let summary = nonexistence_sweep(3, Family::AutonomousC { c: 0.25 }, 200.0, 7).unwrap();
    report(8, "all starts cross zero both ways", summary.all_crossed_both);
}

#[test]
fn criterion_09_beta_positive_instance() {
    let sc = check_shooting_condition(0.8, 0.0, 4, 1.5);
    // exact rational arithmetic: -0.4352 + 0.32 = -0.1152
    let mut ok = (sc.value - (-0.1152)).abs() < 1e-9 && sc.holds;
    let params = ShootParams::new(4, Family::Beta { beta: 1.5 }, 0.8, 0.0, 30.0).unwrap();
    let traj = integrate(&params).unwrap();
    ok &= traj.is_positive() && traj.sup_w().is_finite() && traj.sup_w() < 10.0;
    ok &= energy_estimate_monitor(&traj, &params) < 1e-8;
    report(9, "positive bounded trajectory under the shooting condition", ok);
}

#[test]
fn criterion_10_beta_nonpositive_flux() {
    let mut ok = true;
    for beta in [0.0, -0.5] {
        let summary = nonexistence_sweep(4, Family::Beta { beta }, 60.0, 7).unwrap();
        ok &= summary.all_lost_positivity;
        ok &= summary.max_flux_violation.is_some_and(|v| v < 1e-8);
    }
    report(10, "positivity loss with monotone flux", ok);
}

#[test]
fn criterion_11_explicit_singular_solution() {
    let mut max_res = 0.0f64;
    for n in 3..=5usize {
        let res = singular_solution_residual(n).unwrap();
        for v in &res.values {
            max_res = max_res.max(v.abs());
        }
    }
    report(11, "explicit solution residual", max_res < 1e-8);
}

#[test]
fn criterion_12_decay_bound() {
    let sweep = periodic_orbit_sweep(3, 0.1, 10, 150.0).unwrap();
    let target = 0.45f64.powf(0.25);
    let ok = (sweep.sup_w - target).abs() < 1e-6 && sweep.sup_w < c_star(3);
    report(12, "periodic-orbit decay bound", ok);
}

#[test]
fn criterion_13_moving_sphere_sampling() {
    let bubble = |r: f64| 3f64.powf(0.25) / (1.0 + r * r).sqrt();
    let rep = moving_sphere_check_rn(&bubble, 3, 10_000, 11, DEFAULT_SLACK).unwrap();
    let mut ok = rep.pass && rep.max_deficit < 1e-10 && rep.samples_tested == 10_000;
    let out = condition_a_check(1.0, 3, 100_000, 5, DEFAULT_SLACK).unwrap();
    ok &= out.report.pass && out.max_factorization_error < 1e-12;
    report(13, "moving-sphere and condition-A sampling", ok);
}

#[test]
fn criterion_14_determinism() {
    let bin = env!("CARGO_BIN_EXE_spherics");
    let root = tempfile::tempdir().unwrap();
    let run = |dir: &str, args: &[&str]| {
        let out = root.path().join(dir);
        let status = Command::new(bin)
            .args(args)
            .arg("--out")
            .arg(&out)
            .status()
            .unwrap();
        assert!(status.success(), "{args:?} failed");
        out
    };
    let cases: Vec<&[&str]> = vec![
        &["eig", "--N", "3", "--K", "8"],
        &["shoot", "--n", "3", "--c", "0", "--a", "0.930605", "--b", "0"],
        &["branch", "--N", "2", "--p", "3", "--k", "1", "--lambda-max", "6", "--seed", "42"],
    ];
    let mut ok = true;
    for (i, args) in cases.iter().enumerate() {
        let d1 = run(&format!("a{i}"), args);
        let d2 = run(&format!("b{i}"), args);
        for entry in std::fs::read_dir(&d1).unwrap() {
            let name = entry.unwrap().file_name();
            if name.to_string_lossy().ends_with(".csv") {
                let x = std::fs::read(d1.join(&name)).unwrap();
                let y = std::fs::read(d2.join(&name)).unwrap();
                ok &= x == y;
            }
        }
        // the manifest must name every data file in the directory
        let manifest: serde_json::Value =
            serde_json::from_str(&std::fs::read_to_string(d1.join("manifest.json")).unwrap())
                .unwrap();
        let listed: Vec<&str> = manifest["outputs"]
            .as_array()
            .unwrap()
            .iter()
            .map(|v| v.as_str().unwrap())
            .collect();
        for entry in std::fs::read_dir(&d1).unwrap() {
            let name = entry.unwrap().file_name().to_string_lossy().into_owned();
            if name != "manifest.json" {
                ok &= listed.contains(&name.as_str());
            }
        }
    }
    report(14, "byte-identical reruns", ok);
}
