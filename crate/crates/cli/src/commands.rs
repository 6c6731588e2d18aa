//! Subcommand bodies: each resolves its parameters (flag > config >
//! default), runs the solver library, writes data files, and closes the
//! output directory with a manifest naming every file.

use crate::{opt_f64, opt_string, opt_usize, req_f64, req_usize, CliError, Ctx};
use serde_json::{json, Value};
use std::f64::consts::{FRAC_PI_2, PI};
use std::sync::Arc;

use spherics::bifurcation::{
    bifurcation_points, branch_switch, continue_branch, validate_solution, veron_nonradial,
    BifurcationError, BranchPoint, ProblemParams, StepControls,
};
use spherics::geometry::{
    conformal_invariance_residual, jacobian_density, kelvin_transform_axisym, reflect_radius,
    Coordinate, GeometryError, KelvinParams, Pole, RadialProfile,
};
use spherics::io::{
    branch_csv, coefficients_csv, csv_string, eigenvalue_csv, events_csv, format_f64,
    profile_csv, quadrature_csv, trajectory_csv,
};
use spherics::shooting::{
    check_shooting_condition, energy_estimate_monitor, energy_h, integrate,
    nonexistence_sweep, singular_solution_residual, Family, ShootError, ShootParams,
};
use spherics::spectral::{
    count_nodal_class, AxisymFn, GegenbauerBasis, SpectralError, NODAL_FINE_GRID,
    SIMPLICITY_TOL,
};
use spherics::symmetry::{
    condition_a_check, g_condition_check, kelvin_rn, moving_sphere_check_rn,
    moving_sphere_check_sphere, GCondition, GFamily, SymmetryError, DEFAULT_SLACK,
};

// ---------------------------------------------------------------- errors

fn bif_err(e: BifurcationError) -> CliError {
    match e {
        BifurcationError::BadParams(_) | BifurcationError::DimensionMismatch { .. } => {
            CliError::Usage(e.to_string())
        }
        other => CliError::Numerical(other.to_string()),
    }
}

fn spec_err(e: SpectralError) -> CliError {
    match e {
        SpectralError::InvalidParams { .. } => CliError::Usage(e.to_string()),
        other => CliError::Numerical(other.to_string()),
    }
}

fn shoot_err(e: ShootError) -> CliError {
    match e {
        ShootError::BadParams(_) => CliError::Usage(e.to_string()),
        other => CliError::Numerical(other.to_string()),
    }
}

fn geo_err(e: GeometryError) -> CliError {
    match e {
        GeometryError::BadDimension(..)
        | GeometryError::AngleOutOfRange { .. }
        | GeometryError::BadGrid
        | GeometryError::NonPositiveValues => CliError::Usage(e.to_string()),
        other => CliError::Numerical(other.to_string()),
    }
}

fn sym_err(e: SymmetryError) -> CliError {
    match e {
        SymmetryError::BadParams(_) => CliError::Usage(e.to_string()),
        other => CliError::Numerical(other.to_string()),
    }
}

// ------------------------------------------------------------------- eig

pub fn cmd_eig(
    mut ctx: Ctx,
    sphere_dim: Option<usize>,
    modes: Option<usize>,
    nodes: Option<usize>,
) -> Result<(), CliError> {
    let n = req_usize(sphere_dim, &ctx.cfg, "N")?;
    if n < 2 {
        return Err(CliError::Usage("--N must be at least 2".into()));
    }
    let k = opt_usize(modes, &ctx.cfg, "K").unwrap_or(16);
    let m = opt_usize(nodes, &ctx.cfg, "M").unwrap_or(2 * k);
    let basis = Arc::new(GegenbauerBasis::build(n, k, m).map_err(spec_err)?);

    ctx.write("eigenvalues.csv", &eigenvalue_csv(&basis))?;
    ctx.write("quadrature.csv", &quadrature_csv(&basis))?;

    let mut zero_rows = Vec::new();
    for mode in 0..k {
        let f = AxisymFn::mode(Arc::clone(&basis), mode).map_err(spec_err)?;
        if mode == 0 {
            continue; // the constant mode has no interior zeros
        }
        let nodal = count_nodal_class(&f, NODAL_FINE_GRID, SIMPLICITY_TOL).map_err(spec_err)?;
        for (i, t) in nodal.zero_locations.iter().enumerate() {
            zero_rows.push(vec![mode.to_string(), i.to_string(), format_f64(*t)]);
        }
    }
    ctx.write("zeros.csv", &csv_string(&["k", "zero_index", "t"], &zero_rows))?;

    ctx.finish(
        "eig",
        json!({"N": n, "K": k, "M": m}),
        json!({"simplicity_tol": SIMPLICITY_TOL}),
    )
}

// ---------------------------------------------------------------- branch

/// Lands on branch k just above its bifurcation point, trying a short list
/// of seed amplitudes on both signs.
fn land_on_branch(
    basis: &Arc<GegenbauerBasis>,
    k: usize,
    params: &ProblemParams,
) -> Result<BranchPoint, CliError> {
    let lambdas = bifurcation_points(params.sphere_dim, params.p, k + 1);
    let lk = lambdas[k - 1];
    let next = lambdas[k];
    let switch = ProblemParams {
        lambda: lk + 1e-2 * (next - lk),
        ..*params
    };
    let mut last = None;
    for amp in [0.3, -0.3, 0.15, -0.15, 0.5, -0.5, 0.08, -0.08] {
        match branch_switch(Arc::clone(basis), k, &switch, amp) {
            Ok(pt) => return Ok(pt),
            Err(e) => last = Some(e),
        }
    }
    Err(bif_err(last.expect("amplitude list is nonempty")))
}

pub fn cmd_branch(
    mut ctx: Ctx,
    sphere_dim: Option<usize>,
    p: Option<f64>,
    k: Option<usize>,
    lambda_max: Option<f64>,
) -> Result<(), CliError> {
    let n = req_usize(sphere_dim, &ctx.cfg, "N")?;
    let p = req_f64(p, &ctx.cfg, "p")?;
    let k = req_usize(k, &ctx.cfg, "k")?;
    let lambda_max = req_f64(lambda_max, &ctx.cfg, "lambda-max")?;
    if k < 1 {
        return Err(CliError::Usage("--k must be at least 1".into()));
    }
    let params = ProblemParams::new(n, p, lambda_max).map_err(bif_err)?;
    let lk = bifurcation_points(n, p, k)[k - 1];
    if lambda_max <= lk {
        return Err(CliError::Usage(format!(
            "--lambda-max must exceed the bifurcation point {lk}"
        )));
    }

    let basis = Arc::new(GegenbauerBasis::build(n, 64, 128).map_err(spec_err)?);
    let start = land_on_branch(&basis, k, &params)?;
    let branch = continue_branch(&start, k, &params, lambda_max, &StepControls::default())
        .map_err(bif_err)?;

    ctx.write("branch.csv", &branch_csv(&branch.points))?;
    for (i, pt) in branch.points.iter().enumerate() {
        let coeffs: Vec<f64> = pt.w.coeffs.iter().copied().collect();
        ctx.write(&format!("point_{i:04}.csv"), &coefficients_csv(&coeffs))?;
    }

    let last = branch
        .point_nearest(lambda_max)
        .ok_or_else(|| CliError::Numerical("branch produced no points".into()))?;
    let at = ProblemParams {
        lambda: last.lambda,
        ..params
    };
    let report = validate_solution(last, &at, 2.0 * lambda_max);
    ctx.write(
        "validation.json",
        &serde_json::to_string_pretty(&json!({
            "lambda": last.lambda,
            "nodal_class": last.nodal.as_ref().map(|nc| nc.class),
            "residual_norm": last.residual_norm,
            "v_min": report.v_min,
            "v_max": report.v_max,
            "min_w_plus_1": report.min_w_plus_1,
            "all_ok": report.all_ok(),
        }))
        .expect("json"),
    )?;

    ctx.finish(
        "branch",
        json!({
            "N": n, "p": p, "k": k, "lambda_max": lambda_max,
            "lambda_coverage": [branch.lambda_coverage.0, branch.lambda_coverage.1],
        }),
        json!({"newton_tol": 1e-11, "simplicity_tol": SIMPLICITY_TOL}),
    )
}

// ----------------------------------------------------------------- shoot

fn resolve_family(
    ctx: &Ctx,
    c: Option<f64>,
    beta: Option<f64>,
) -> Result<Family, CliError> {
    let c = opt_f64(c, &ctx.cfg, "c");
    let beta = opt_f64(beta, &ctx.cfg, "beta");
    match (c, beta) {
        (Some(c), None) => Ok(Family::AutonomousC { c }),
        (None, Some(beta)) => Ok(Family::Beta { beta }),
        (Some(_), Some(_)) => Err(CliError::Usage(
            "--c and --beta are mutually exclusive".into(),
        )),
        (None, None) => Err(CliError::Usage("need exactly one of --c or --beta".into())),
    }
}

#[allow(clippy::too_many_arguments)]
pub fn cmd_shoot(
    mut ctx: Ctx,
    n: Option<usize>,
    c: Option<f64>,
    beta: Option<f64>,
    a: Option<f64>,
    b: Option<f64>,
    t_max: Option<f64>,
    grid: bool,
) -> Result<(), CliError> {
    let n = req_usize(n, &ctx.cfg, "n")?;
    let family = resolve_family(&ctx, c, beta)?;
    let t_max = opt_f64(t_max, &ctx.cfg, "T").unwrap_or(30.0);
    let family_json = match family {
        Family::AutonomousC { c } => json!({"kind": "autonomous", "c": c}),
        Family::Beta { beta } => json!({"kind": "beta", "beta": beta}),
    };

    if grid {
        let summary = nonexistence_sweep(n, family, t_max, ctx.seed).map_err(shoot_err)?;
        let outcomes: Vec<Value> = summary
            .outcomes
            .iter()
            .map(|o| {
                json!({
                    "a": o.a, "b": o.b,
                    "crossed_forward": o.crossed_forward,
                    "crossed_backward": o.crossed_backward,
                    "blowup": o.blowup,
                    "flux_violation": o.flux_violation,
                })
            })
            .collect();
        ctx.write(
            "sweep.json",
            &serde_json::to_string_pretty(&json!({
                "n": n, "family": family_json, "T": t_max, "grid": 20,
                "all_crossed_both": summary.all_crossed_both,
                "all_lost_positivity": summary.all_lost_positivity,
                "max_flux_violation": summary.max_flux_violation,
                "outcomes": outcomes,
            }))
            .expect("json"),
        )?;
        return ctx.finish(
            "shoot",
            json!({"n": n, "family": family_json, "T": t_max, "grid": true}),
            json!({"rel_tol": 1e-9, "abs_tol": 1e-11}),
        );
    }

    let a = req_f64(a, &ctx.cfg, "a")?;
    let b = opt_f64(b, &ctx.cfg, "b").unwrap_or(0.0);
    let params = ShootParams::new(n, family, a, b, t_max).map_err(shoot_err)?;
    let traj = integrate(&params).map_err(shoot_err)?;

    ctx.write("trajectory.csv", &trajectory_csv(&traj))?;
    ctx.write("events.csv", &events_csv(&traj))?;

    let monitor = energy_estimate_monitor(&traj, &params);
    let shooting_condition = match family {
        Family::Beta { beta } => {
            let sc = check_shooting_condition(a, b, n, beta);
            json!({"value": sc.value, "holds": sc.holds})
        }
        Family::AutonomousC { .. } => Value::Null,
    };
    ctx.write(
        "report.json",
        &serde_json::to_string_pretty(&json!({
            "n": n, "family": family_json, "a": a, "b": b, "T": t_max,
            "status": format!("{:?}", traj.status),
            "positive": traj.is_positive(),
            "sup_w": traj.sup_w(),
            "min_w": traj.min_w(),
            "h_initial": energy_h(a, b, n),
            "energy_monitor": monitor,
            "shooting_condition": shooting_condition,
            "zero_events": traj.events.len(),
            "turning_points": traj.turning_points.len(),
        }))
        .expect("json"),
    )?;

    ctx.finish(
        "shoot",
        json!({"n": n, "family": family_json, "a": a, "b": b, "T": t_max, "grid": false}),
        json!({"rel_tol": params.rel_tol, "abs_tol": params.abs_tol}),
    )
}

// ---------------------------------------------------------------- kelvin

pub fn cmd_kelvin(
    mut ctx: Ctx,
    n: Option<usize>,
    lambda: Option<f64>,
    pole: Option<String>,
    modes: Option<usize>,
) -> Result<(), CliError> {
    let n = req_usize(n, &ctx.cfg, "n")?;
    let lambda = req_f64(lambda, &ctx.cfg, "lambda")?;
    let pole = match opt_string(pole, &ctx.cfg, "pole").as_deref() {
        None | Some("north") => Pole::North,
        Some("south") => Pole::South,
        Some(other) => {
            return Err(CliError::Usage(format!(
                "unknown pole '{other}' (expected north or south)"
            )))
        }
    };
    let k = opt_usize(modes, &ctx.cfg, "K").unwrap_or(64);
    let kp = KelvinParams::new(pole, lambda, n).map_err(geo_err)?;

    // smooth, strictly positive test profile v(t) = exp(0.3 t), t = cos r,
    // sampled on a grid mapped onto itself by the reflection so that every
    // reflected radius stays interpolable
    let v_t = |t: f64| (0.3 * t).exp();
    let r_lo = 1e-3;
    let r_hi = reflect_radius(lambda, r_lo).map_err(geo_err)?.max(2.0 * r_lo);
    let input = RadialProfile::from_fn_chebyshev(256, r_lo, r_hi, Coordinate::GeodesicR, |r| {
        v_t(r.cos())
    })
    .map_err(geo_err)?;
    let transformed = kelvin_transform_axisym(&input, &kp).map_err(geo_err)?;

    let basis = GegenbauerBasis::build(n, k, 2 * k).map_err(spec_err)?;
    let residual = conformal_invariance_residual(&v_t, &kp, &basis, 1e-3).map_err(geo_err)?;

    let mut involution_err = 0.0f64;
    let mut jacobian_err = 0.0f64;
    for i in 1..200 {
        let r = PI * i as f64 / 200.0;
        let h = reflect_radius(lambda, r).map_err(geo_err)?;
        let hh = reflect_radius(lambda, h).map_err(geo_err)?;
        involution_err = involution_err.max((hh - r).abs());
        let jj = jacobian_density(lambda, r, n).map_err(geo_err)?
            * jacobian_density(lambda, h, n).map_err(geo_err)?;
        jacobian_err = jacobian_err.max((jj - 1.0).abs());
    }

    ctx.write("input.csv", &profile_csv(&input))?;
    ctx.write("transformed.csv", &profile_csv(&transformed.profile))?;
    ctx.write(
        "report.json",
        &serde_json::to_string_pretty(&json!({
            "n": n, "lambda": lambda, "pole": format!("{pole:?}"),
            "invariance_residual": residual,
            "involution_max_err": involution_err,
            "jacobian_product_max_err": jacobian_err,
            "clamped": transformed.clamped,
        }))
        .expect("json"),
    )?;

    ctx.finish(
        "kelvin",
        json!({"n": n, "lambda": lambda, "pole": format!("{pole:?}"), "K": k}),
        json!({"tail_threshold": 1e-3}),
    )
}

// ----------------------------------------------------------------- veron

pub fn cmd_veron(mut ctx: Ctx, n: Option<usize>, c: Option<f64>) -> Result<(), CliError> {
    let n = req_usize(n, &ctx.cfg, "n")?;
    let c = req_f64(c, &ctx.cfg, "c")?;
    if n < 3 {
        return Err(CliError::Usage("--n must be at least 3".into()));
    }
    let basis = Arc::new(GegenbauerBasis::build(n - 1, 64, 128).map_err(spec_err)?);
    let summary = veron_nonradial(n, c, basis, ctx.seed).map_err(bif_err)?;

    let mut solution_files = Vec::new();
    for (pt, k) in summary.solutions.iter().zip(summary.classes_found.iter()) {
        let name = format!("class_{k}.csv");
        let coeffs: Vec<f64> = pt.w.coeffs.iter().copied().collect();
        ctx.write(&name, &coefficients_csv(&coeffs))?;
        solution_files.push(name);
    }

    let solutions: Vec<Value> = summary
        .solutions
        .iter()
        .map(|pt| {
            json!({
                "lambda": pt.lambda,
                "norm_inf": pt.w.norm_inf_nodes(),
                "nodal_class": pt.nodal.as_ref().map(|nc| nc.class),
                "residual_norm": pt.residual_norm,
            })
        })
        .collect();
    let probe = summary.probe.as_ref().map(|p| {
        json!({
            "starts": p.starts, "converged": p.converged,
            "max_norm_inf": p.max_norm_inf, "all_trivial": p.all_trivial,
        })
    });
    let threshold_c = -((n as f64 - 2.0) / 4.0);
    ctx.write(
        "summary.json",
        &serde_json::to_string_pretty(&json!({
            "n": n, "c": c,
            "sphere_dim": summary.sphere_dim,
            "p": summary.p,
            "lambda": summary.lambda,
            "lambda_1": summary.lambda_1,
            "threshold_c": threshold_c,
            "above_threshold": c < threshold_c,
            "classes_found": summary.classes_found,
            "solutions": solutions,
            "probe": probe,
        }))
        .expect("json"),
    )?;

    ctx.finish(
        "veron",
        json!({"n": n, "c": c}),
        json!({"newton_tol": 1e-11}),
    )
}

// ---------------------------------------------------------------- verify

struct Check {
    name: &'static str,
    pass: bool,
    detail: Value,
}

fn check(name: &'static str, pass: bool, detail: Value) -> Check {
    Check { name, pass, detail }
}

fn suite_eig() -> Result<Vec<Check>, CliError> {
    let mut checks = Vec::new();
    for n in 2..=5usize {
        let basis = Arc::new(GegenbauerBasis::build(n, 12, 24).map_err(spec_err)?);
        let ortho = basis.orthonormality_deviation();

        let mut max_rel = 0.0f64;
        let mut nodal_ok = true;
        for k in 1..=10usize {
            let f = AxisymFn::mode(Arc::clone(&basis), k).map_err(spec_err)?;
            let lf = f.apply_neg_laplacian();
            let nu = (k * (k + n - 1)) as f64;
            for (a, b) in lf.node_values.iter().zip(f.node_values.iter()) {
                let rel = (a - nu * b).abs() / nu;
                max_rel = max_rel.max(rel);
            }
            let nc =
                count_nodal_class(&f, NODAL_FINE_GRID, SIMPLICITY_TOL).map_err(spec_err)?;
            nodal_ok &= nc.class == k && nc.simple.iter().all(|s| *s);
        }
        checks.push(check(
            "eigenbasis",
            ortho < 1e-10 && max_rel < 1e-10 && nodal_ok,
            json!({"N": n, "orthonormality": ortho, "max_rel_eig_err": max_rel,
                   "nodal_ok": nodal_ok}),
        ));
    }
    Ok(checks)
}

fn suite_kelvin() -> Result<Vec<Check>, CliError> {
    let mut checks = Vec::new();

    let mut inv_err = 0.0f64;
    let mut jac_err = 0.0f64;
    let mut mirror_err = 0.0f64;
    for li in 1..=6 {
        let lambda = FRAC_PI_2 * li as f64 / 6.0;
        for i in 1..200 {
            let r = PI * i as f64 / 200.0;
            let h = reflect_radius(lambda, r).map_err(geo_err)?;
            let hh = reflect_radius(lambda, h).map_err(geo_err)?;
            inv_err = inv_err.max((hh - r).abs());
            let jj = jacobian_density(lambda, r, 3).map_err(geo_err)?
                * jacobian_density(lambda, h, 3).map_err(geo_err)?;
            jac_err = jac_err.max((jj - 1.0).abs());
            if li == 6 {
                mirror_err = mirror_err.max((h - (PI - r)).abs());
            }
        }
    }
    checks.push(check(
        "reflection_identities",
        inv_err < 1e-12 && jac_err < 1e-12 && mirror_err < 1e-12,
        json!({"involution": inv_err, "jacobian_product": jac_err, "mirror": mirror_err}),
    ));

    let kp = KelvinParams::new(Pole::North, 0.8, 3).map_err(geo_err)?;
    let v = |t: f64| (0.3 * t).exp();
    let b32 = GegenbauerBasis::build(3, 32, 64).map_err(spec_err)?;
    let b64 = GegenbauerBasis::build(3, 64, 128).map_err(spec_err)?;
    let r32 = conformal_invariance_residual(&v, &kp, &b32, 1e-3).map_err(geo_err)?;
    let r64 = conformal_invariance_residual(&v, &kp, &b64, 1e-3).map_err(geo_err)?;
    // monotone refinement is only meaningful above the rounding floor
    checks.push(check(
        "conformal_invariance",
        r64 < 1e-8 && (r64 <= r32 || r64 < 1e-10),
        json!({"residual_K32": r32, "residual_K64": r64}),
    ));

    // u(r) = r^{-(n-2)/2} is fixed by every transform centered at the origin
    let invariant = |r: f64| r.powf(-0.5);
    let y = [0.0, 0.0, 0.0];
    let mut fix_err = 0.0f64;
    for i in 1..50 {
        let r = 0.1 + i as f64 * 0.1;
        let x = [r, 0.0, 0.0];
        let u = kelvin_rn(&invariant, &y, 1.3, &x).map_err(sym_err)?;
        fix_err = fix_err.max((u - invariant(r)).abs());
    }
    checks.push(check(
        "euclidean_fixed_profile",
        fix_err < 1e-12,
        json!({"max_err": fix_err}),
    ));

    Ok(checks)
}

fn suite_shoot() -> Result<Vec<Check>, CliError> {
    let mut checks = Vec::new();

    // homoclinic benchmark: closed form 3^{1/4} (2 cosh t)^{-1/2}
    let a = 3f64.powf(0.25) / 2f64.sqrt();
    let params = ShootParams::new(3, Family::AutonomousC { c: 0.0 }, a, 0.0, 15.0)
        .map_err(shoot_err)?;
    let traj = integrate(&params).map_err(shoot_err)?;
    let drift = energy_estimate_monitor(&traj, &params);
    let mut shape_err = 0.0f64;
    for s in &traj.samples {
        let exact = 3f64.powf(0.25) / (2.0 * s.t.cosh()).sqrt();
        shape_err = shape_err.max((s.w - exact).abs());
    }
    let tail = traj.samples.first().map(|s| s.w).unwrap_or(1.0).max(
        traj.samples.last().map(|s| s.w).unwrap_or(1.0),
    );
    checks.push(check(
        "homoclinic",
        drift < 1e-8 && traj.is_positive() && tail < 1e-3 && shape_err < 1e-8,
        json!({"energy_drift": drift, "positive": traj.is_positive(),
               "tail": tail, "closed_form_err": shape_err}),
    ));

    let mut max_res = 0.0f64;
    for n in 3..=5usize {
        let res = singular_solution_residual(n).map_err(shoot_err)?;
        let sup = res.values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        max_res = max_res.max(sup);
    }
    checks.push(check(
        "singular_solution",
        max_res < 1e-8,
        json!({"max_residual": max_res}),
    ));

    Ok(checks)
}

fn suite_symmetry(seed: u64) -> Result<Vec<Check>, CliError> {
    let mut checks = Vec::new();

    let bubble = |r: f64| 3f64.powf(0.25) / (1.0 + r * r).sqrt();
    let report = moving_sphere_check_rn(&bubble, 3, 5_000, seed, DEFAULT_SLACK).map_err(sym_err)?;
    checks.push(check(
        "moving_sphere_rn",
        report.pass,
        json!({"samples": report.samples_tested, "max_deficit": report.max_deficit}),
    ));

    let out = condition_a_check(1.0, 3, 10_000, seed, DEFAULT_SLACK).map_err(sym_err)?;
    checks.push(check(
        "condition_a",
        out.report.pass && out.max_factorization_error < 1e-12,
        json!({"max_deficit": out.report.max_deficit,
               "max_factorization_error": out.max_factorization_error}),
    ));

    let v = RadialProfile::from_fn_chebyshev(256, 2e-4, PI - 0.1, Coordinate::GeodesicR, |_| 1.0)
        .map_err(geo_err)?;
    let report = moving_sphere_check_sphere(&v, 4, &[0.3, 0.8, 1.2, FRAC_PI_2], DEFAULT_SLACK)
        .map_err(sym_err)?;
    checks.push(check(
        "moving_sphere_sphere",
        report.pass,
        json!({"max_deficit": report.max_deficit}),
    ));

    use GCondition::*;
    let out = g_condition_check(GFamily::Matukuma { n: 3, p: 2.0 }, &[G1, G2, G3, G4])
        .map_err(sym_err)?;
    let all = out.iter().all(|o| o.holds);
    checks.push(check(
        "g_conditions_matukuma",
        all,
        json!({"outcomes": out.iter().map(|o| o.holds).collect::<Vec<_>>()}),
    ));

    Ok(checks)
}

pub fn cmd_verify(mut ctx: Ctx, suite: Option<String>) -> Result<(), CliError> {
    let suite = opt_string(suite, &ctx.cfg, "suite").unwrap_or_else(|| "all".to_string());
    let mut checks = Vec::new();
    match suite.as_str() {
        "eig" => checks.extend(suite_eig()?),
        "kelvin" => checks.extend(suite_kelvin()?),
        "shoot" => checks.extend(suite_shoot()?),
        "symmetry" => checks.extend(suite_symmetry(ctx.seed)?),
        "all" => {
            checks.extend(suite_eig()?);
            checks.extend(suite_kelvin()?);
            checks.extend(suite_shoot()?);
            checks.extend(suite_symmetry(ctx.seed)?);
        }
        other => {
            return Err(CliError::Usage(format!(
                "unknown suite '{other}' (expected eig, kelvin, shoot, symmetry, or all)"
            )))
        }
    }

    let all_pass = checks.iter().all(|c| c.pass);
    let entries: Vec<Value> = checks
        .iter()
        .map(|c| json!({"name": c.name, "pass": c.pass, "detail": c.detail}))
        .collect();
    ctx.write(
        "report.json",
        &serde_json::to_string_pretty(&json!({
            "suite": suite, "pass": all_pass, "checks": entries,
        }))
        .expect("json"),
    )?;
    ctx.finish(
        "verify",
        json!({"suite": suite}),
        json!({"slack": DEFAULT_SLACK}),
    )?;

    if all_pass {
        Ok(())
    } else {
        let first = checks.iter().find(|c| !c.pass).expect("some check failed");
        Err(CliError::Validation(format!(
            "suite '{suite}' failed at check '{}': {}",
            first.name, first.detail
        )))
    }
}
