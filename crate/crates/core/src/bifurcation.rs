//! Newton solver and pseudo-arclength continuation for the axisymmetric
//! semilinear problem `-Δ_{S^N} w = λ((w+1)^p - w - 1)` with `w > -1`.
//!
//! The unknown lives in the Gegenbauer eigenbasis, so `-Δ` is diagonal and
//! the Jacobian is assembled spectrally. Branches of nonconstant solutions
//! leave the constant branch at `λ_k = ν_k/(p-1)` and are followed in
//! `(coefficients, λ)` by a secant predictor with a bordered corrector.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::spectral::{
    count_nodal_class, AxisymFn, GegenbauerBasis, NodalClass, SpectralError, NODAL_FINE_GRID,
    SIMPLICITY_TOL,
};

/// Default Newton tolerance on the coefficient-space residual norm.
pub const NEWTON_TOL: f64 = 1e-11;
/// Default Newton iteration budget.
pub const NEWTON_MAX_ITER: usize = 50;
/// Floor kept under `min(w+1)` by step damping.
pub const W_PLUS_1_FLOOR: f64 = 1e-10;
/// Iterates with `‖w‖∞` below this are treated as the constant solution.
pub const TRIVIAL_NORM: f64 = 1e-7;
/// Iterates stalled below this norm are snapped to the exact root `w = 0`
/// (`F(0, λ) = 0` identically). Near a bifurcation point the Jacobian has a
/// flat cubic direction whose residual component sits under the noise floor
/// of the ill-conditioned linear solves, so Newton can stall at amplitudes
/// up to ~5e-4 (at λ = λ_k the diagonal of the linearization vanishes in
/// mode k and the solve direction is pure rounding noise); genuine
/// nonconstant solutions have amplitude ≳ 1e-2 for any λ the solvers target.
pub const SNAP_TO_TRIVIAL: f64 = 1e-3;

#[derive(Debug, Error)]
pub enum BifurcationError {
    #[error("invalid problem parameters: {0}")]
    BadParams(&'static str),
    #[error("basis dimension {basis} does not match problem dimension {problem}")]
    DimensionMismatch { basis: usize, problem: usize },
    #[error("w + 1 must stay positive; min(w+1) = {0}")]
    ConstraintViolation(f64),
    #[error("Newton stalled after {iters} iterations, residual {residual}")]
    NoConvergence { iters: usize, residual: f64 },
    #[error("branch switch fell back to the constant solution")]
    TrivialSolution,
    #[error("converged to nodal class {got}, expected {expected}")]
    NodalMismatch { expected: usize, got: usize },
    #[error("nodal class changed along the branch at λ = {lambda}: {from} -> {to}")]
    NodalChange { lambda: f64, from: usize, to: usize },
    #[error("arclength step collapsed below {0}")]
    StepCollapse(f64),
    #[error("linear solve failed in Newton corrector")]
    SingularSystem,
    #[error(transparent)]
    Spectral(#[from] SpectralError),
}

/// Problem data for `-Δ_{S^N} w = λ((w+1)^p - w - 1)`.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct ProblemParams {
    /// Sphere dimension N ≥ 2.
    pub sphere_dim: usize,
    /// Nonlinearity exponent, subcritical: 1 < p < (N+2)/(N-2).
    pub p: f64,
    /// Positive parameter λ.
    pub lambda: f64,
}

/// Critical exponent (N+2)/(N-2); unbounded for N = 2.
pub fn critical_exponent(sphere_dim: usize) -> f64 {
    if sphere_dim <= 2 {
        f64::INFINITY
    } else {
        (sphere_dim as f64 + 2.0) / (sphere_dim as f64 - 2.0)
    }
}

impl ProblemParams {
    pub fn new(sphere_dim: usize, p: f64, lambda: f64) -> Result<Self, BifurcationError> {
        if sphere_dim < 2 {
            return Err(BifurcationError::BadParams("sphere dimension must be >= 2"));
        }
        if !(p > 1.0) || p >= critical_exponent(sphere_dim) {
            return Err(BifurcationError::BadParams("need 1 < p < (N+2)/(N-2)"));
        }
        if !(lambda > 0.0) {
            return Err(BifurcationError::BadParams("lambda must be positive"));
        }
        Ok(Self {
            sphere_dim,
            p,
            lambda,
        })
    }

    fn check_basis(&self, basis: &GegenbauerBasis) -> Result<(), BifurcationError> {
        if basis.sphere_dim != self.sphere_dim {
            return Err(BifurcationError::DimensionMismatch {
                basis: basis.sphere_dim,
                problem: self.sphere_dim,
            });
        }
        Ok(())
    }
}

/// `(1+w)^p - w - 1`, evaluated so the accuracy near `w = 0` is relative to
/// `|w|` rather than to 1 (matters for the degenerate polish at λ = λ_1).
fn nonlinearity(w: f64, p: f64) -> f64 {
    (p * w.ln_1p()).exp_m1() - w
}

/// Derivative `p(1+w)^{p-1} - 1`.
fn nonlinearity_prime(w: f64, p: f64) -> f64 {
    p * ((p - 1.0) * w.ln_1p()).exp() - 1.0
}

/// True when an iterate sits in the stall basin of the constant solution:
/// amplitude below [`SNAP_TO_TRIVIAL`] with a residual that is plausibly
/// the linear-solve noise floor rather than a genuine root elsewhere.
fn near_trivial(basis: &GegenbauerBasis, coeffs: &DVector<f64>, res_norm: f64, tol: f64) -> bool {
    if res_norm > 1e6 * tol {
        return false;
    }
    let values = match basis.synthesize(coeffs) {
        Ok(v) => v,
        Err(_) => return false,
    };
    values.iter().fold(0.0f64, |m, v| m.max(v.abs())) < SNAP_TO_TRIVIAL
}

fn min_w_plus_1(values: &DVector<f64>) -> f64 {
    values.iter().fold(f64::INFINITY, |m, &v| m.min(v + 1.0))
}

/// `F(w, λ) = -Δw - λ((w+1)^p - w - 1)`, evaluated at the quadrature nodes
/// and re-analyzed into the eigenbasis. `F(0, λ) = 0` identically.
pub fn residual(w: &AxisymFn, params: &ProblemParams) -> Result<AxisymFn, BifurcationError> {
    params.check_basis(&w.basis)?;
    let floor = min_w_plus_1(&w.node_values);
    if floor <= 0.0 {
        return Err(BifurcationError::ConstraintViolation(floor));
    }
    let coeffs = residual_coeffs(&w.basis, &w.coeffs, &w.node_values, params);
    Ok(AxisymFn::from_coeffs(Arc::clone(&w.basis), coeffs)?)
}

fn residual_coeffs(
    basis: &GegenbauerBasis,
    coeffs: &DVector<f64>,
    node_values: &DVector<f64>,
    params: &ProblemParams,
) -> DVector<f64> {
    let nl: Vec<f64> = node_values
        .iter()
        .map(|&v| nonlinearity(v, params.p))
        .collect();
    let nl_coeffs = basis.analyze(&nl).expect("node-length vector");
    DVector::from_iterator(
        basis.num_modes,
        coeffs
            .iter()
            .zip(basis.eigenvalues.iter())
            .zip(nl_coeffs.iter())
            .map(|((c, nu), g)| nu * c - params.lambda * g),
    )
}

/// Operator form `f(w, μ) = w - μTw - g(w, μ)` with `T = (-Δ + I)^{-1}`,
/// `g(w, μ) = ((μ-1)/(p-1)) T((w+1)^p - pw - 1)` and `μ = (p-1)λ + 1`.
/// Its zero set coincides with [`residual`]'s.
pub fn residual_operator_form(
    w: &AxisymFn,
    p: f64,
    mu: f64,
) -> Result<AxisymFn, BifurcationError> {
    let floor = min_w_plus_1(&w.node_values);
    if floor <= 0.0 {
        return Err(BifurcationError::ConstraintViolation(floor));
    }
    let basis = &w.basis;
    let gvals: Vec<f64> = w
        .node_values
        .iter()
        .map(|&v| nonlinearity(v, p) - (p - 1.0) * v)
        .collect();
    let g_coeffs = basis.analyze(&gvals).expect("node-length vector");
    let scale = (mu - 1.0) / (p - 1.0);
    let coeffs = DVector::from_iterator(
        basis.num_modes,
        w.coeffs
            .iter()
            .zip(basis.eigenvalues.iter())
            .zip(g_coeffs.iter())
            .map(|((c, nu), g)| c - mu * c / (nu + 1.0) - scale * g / (nu + 1.0)),
    );
    Ok(AxisymFn::from_coeffs(Arc::clone(basis), coeffs)?)
}

/// Jacobian `-Δ - λ(p(w+1)^{p-1} - 1)` assembled in the eigenbasis.
fn jacobian(
    basis: &GegenbauerBasis,
    node_values: &DVector<f64>,
    params: &ProblemParams,
) -> DMatrix<f64> {
    let k = basis.num_modes;
    let m = basis.num_nodes;
    // scaled node factor: quadrature weight times the pointwise derivative
    let d: Vec<f64> = (0..m)
        .map(|j| basis.weights[j] * nonlinearity_prime(node_values[j], params.p))
        .collect();
    let mut jac = DMatrix::zeros(k, k);
    for col in 0..k {
        for row in 0..k {
            let mut acc = 0.0;
            for j in 0..m {
                acc += basis.basis_matrix[(j, row)] * d[j] * basis.basis_matrix[(j, col)];
            }
            jac[(row, col)] = -params.lambda * acc;
        }
        jac[(col, col)] += basis.eigenvalues[col];
    }
    jac
}

/// ∂F/∂λ = -((w+1)^p - w - 1) analyzed into the basis.
fn residual_lambda_deriv(
    basis: &GegenbauerBasis,
    node_values: &DVector<f64>,
    p: f64,
) -> DVector<f64> {
    let nl: Vec<f64> = node_values.iter().map(|&v| -nonlinearity(v, p)).collect();
    basis.analyze(&nl).expect("node-length vector")
}

/// A converged solution together with its diagnostics.
#[derive(Debug, Clone)]
pub struct BranchPoint {
    pub lambda: f64,
    pub w: AxisymFn,
    /// Nodal class of the profile; `None` when `w` is numerically constant.
    pub nodal: Option<NodalClass>,
    pub residual_norm: f64,
    pub min_w_plus_1: f64,
    pub bounds_ok: bool,
}

impl BranchPoint {
    fn assemble(w: AxisymFn, params: &ProblemParams, residual_norm: f64) -> Self {
        let floor = min_w_plus_1(&w.node_values);
        let nodal = if w.norm_inf_nodes() < TRIVIAL_NORM {
            None
        } else {
            count_nodal_class(&w, NODAL_FINE_GRID, SIMPLICITY_TOL).ok()
        };
        let bounds_ok = floor > 0.0;
        BranchPoint {
            lambda: params.lambda,
            w,
            nodal,
            residual_norm,
            min_w_plus_1: floor,
            bounds_ok,
        }
    }

    pub fn nodal_class(&self) -> Option<usize> {
        self.nodal.as_ref().map(|n| n.class)
    }
}

/// Damped Newton iteration at fixed λ.
///
/// Convergence is declared on the coefficient-space residual norm; after
/// that the iterate is polished while the residual still shrinks, which
/// matters at the degenerate point λ = λ_1 where the root at `w = 0` is of
/// cubic type and the plain stopping rule would leave an O(tol^{1/3})
/// iterate behind.
pub fn newton_solve(
    w0: &AxisymFn,
    params: &ProblemParams,
    max_iter: usize,
    tol: f64,
) -> Result<BranchPoint, BifurcationError> {
    params.check_basis(&w0.basis)?;
    let basis = Arc::clone(&w0.basis);
    let mut coeffs = w0.coeffs.clone();
    let mut values = basis.synthesize(&coeffs)?;
    if min_w_plus_1(&values) <= 0.0 {
        return Err(BifurcationError::ConstraintViolation(min_w_plus_1(&values)));
    }
    let mut res = residual_coeffs(&basis, &coeffs, &values, params);
    let mut res_norm = res.norm();
    let mut converged = res_norm < tol;
    let polish_budget = 120usize;
    let mut polish_used = 0usize;

    let mut iters = 0usize;
    loop {
        if converged {
            // polish: keep iterating while the residual drops meaningfully
            if polish_used >= polish_budget || res_norm == 0.0 {
                break;
            }
        } else if iters >= max_iter {
            if near_trivial(&basis, &coeffs, res_norm, tol) {
                break;
            }
            return Err(BifurcationError::NoConvergence {
                iters,
                residual: res_norm,
            });
        }
        let jac = jacobian(&basis, &values, params);
        let lu = jac.lu();
        let step = match lu.solve(&res) {
            Some(s) => s,
            None => {
                if converged {
                    break;
                }
                return Err(BifurcationError::SingularSystem);
            }
        };
        // damped update: keep w+1 positive and the residual non-increasing
        let mut alpha = 1.0;
        let mut accepted = false;
        for _ in 0..40 {
            let trial = &coeffs - alpha * &step;
            let trial_values = basis.synthesize(&trial)?;
            if min_w_plus_1(&trial_values) <= W_PLUS_1_FLOOR {
                alpha *= 0.5;
                continue;
            }
            let trial_res = residual_coeffs(&basis, &trial, &trial_values, params);
            let trial_norm = trial_res.norm();
            if trial_norm <= res_norm || trial_norm < tol {
                let improved = trial_norm < 0.98 * res_norm;
                coeffs = trial;
                values = trial_values;
                res = trial_res;
                res_norm = trial_norm;
                accepted = true;
                if converged && !improved {
                    polish_used = polish_budget; // stagnation: stop polishing
                }
                break;
            }
            alpha *= 0.5;
        }
        if !accepted {
            if converged {
                break;
            }
            if near_trivial(&basis, &coeffs, res_norm, tol) {
                break;
            }
            return Err(BifurcationError::NoConvergence {
                iters,
                residual: res_norm,
            });
        }
        iters += 1;
        if converged {
            polish_used += 1;
        } else if res_norm < tol {
            converged = true;
        }
    }

    let mut w = AxisymFn::from_coeffs(Arc::clone(&basis), coeffs)?;
    if w.norm_inf_nodes() < SNAP_TO_TRIVIAL {
        w = AxisymFn::constant(basis, 0.0);
        res_norm = 0.0;
    }
    Ok(BranchPoint::assemble(w, params, res_norm))
}

/// Bifurcation points `λ_k = k(k+N-1)/(p-1)` for k = 1..=k_max.
pub fn bifurcation_points(sphere_dim: usize, p: f64, k_max: usize) -> Vec<f64> {
    (1..=k_max)
        .map(|k| (k * (k + sphere_dim - 1)) as f64 / (p - 1.0))
        .collect()
}

/// Lands on the k-th nonconstant branch at the λ requested in `params`.
///
/// A plain fixed-λ Newton launch from `s·φ_k` falls back to the constant
/// solution (its basin in the full coefficient space swallows pure-mode
/// starts), so the switch instead pins the k-th coefficient at amplitude s
/// with λ free, lands on the branch at λ(s), marches s outward until λ(s)
/// reaches the request and bisects the bracket (λ(s) need not be monotone:
/// the even-k sub-branches dip below λ_k before a fold); a final fixed-λ
/// solve polishes the point. The returned point is required to be
/// nonconstant with nodal class k; both signs of the amplitude select the
/// two symmetric sub-branches.
pub fn branch_switch(
    basis: Arc<GegenbauerBasis>,
    k: usize,
    params: &ProblemParams,
    amplitude: f64,
) -> Result<BranchPoint, BifurcationError> {
    if amplitude == 0.0 {
        return Err(BifurcationError::BadParams("amplitude must be nonzero"));
    }
    if k == 0 || k >= basis.num_modes {
        return Err(BifurcationError::BadParams("mode index out of range"));
    }
    let lambda_req = params.lambda;
    let lambda_k = basis.eigenvalues[k] / (params.p - 1.0);
    if lambda_req <= lambda_k {
        return Err(BifurcationError::BadParams("λ must exceed λ_k for the switch"));
    }
    let kk = basis.num_modes;
    let pinned = |s: f64,
                  seed: Option<(&DVector<f64>, f64)>|
     -> Result<(DVector<f64>, f64), BifurcationError> {
        let mut tangent = DVector::zeros(kk + 1);
        tangent[k] = 1.0;
        let (mut pred, lam0) = match seed {
            Some((c, l)) => (c.clone(), l),
            None => (DVector::zeros(kk), lambda_k),
        };
        pred[k] = s;
        let (c, lam, _) = arclength_corrector(
            &basis,
            &pred,
            lam0,
            &tangent,
            params,
            NEWTON_MAX_ITER,
            NEWTON_TOL,
        )?;
        Ok((c, lam))
    };

    // ramp onto the branch at small amplitude, march the pinned coefficient
    // outward until λ(s) reaches the request (the even-k sub-branches are
    // transcritical and may dip below λ_k before a fold), then bisect in s
    // the pinned corrector itself resolves λ only to ~NEWTON_TOL, and the
    // final fixed-λ polish below removes the residual offset anyway
    let tol_l = 1e-9 * lambda_req.max(1.0);
    let mut state: Option<(DVector<f64>, f64)> = None;
    for frac in [0.25, 0.5, 1.0] {
        let out = pinned(amplitude * frac, state.as_ref().map(|(c, l)| (c, *l)))?;
        state = Some(out);
    }
    let (mut coeffs, mut lam) = state.expect("ramp ran");
    // λ(s) → λ_k < λ_req as s → 0, so s = 0 always brackets from below
    let mut s_lo = 0.0;
    let mut s_hi = amplitude;
    let mut marches = 0;
    while lam < lambda_req {
        marches += 1;
        if marches > 60 || s_hi.abs() > 20.0 {
            return Err(BifurcationError::NoConvergence {
                iters: marches,
                residual: (lam - lambda_req).abs(),
            });
        }
        s_lo = s_hi;
        s_hi *= 1.3;
        let out = pinned(s_hi, Some((&coeffs, lam)))?;
        coeffs = out.0;
        lam = out.1;
    }
    // bisect the bracket [s_lo, s_hi] on λ(s) = λ_req
    for _ in 0..90 {
        if (lam - lambda_req).abs() < tol_l {
            break;
        }
        let mid = 0.5 * (s_lo + s_hi);
        let out = pinned(mid, Some((&coeffs, lam)))?;
        coeffs = out.0;
        lam = out.1;
        if lam >= lambda_req {
            s_hi = mid;
        } else {
            s_lo = mid;
        }
    }
    if (lam - lambda_req).abs() >= tol_l {
        return Err(BifurcationError::NoConvergence {
            iters: 90,
            residual: (lam - lambda_req).abs(),
        });
    }

    let seed = AxisymFn::from_coeffs(Arc::clone(&basis), coeffs)?;
    let pt = newton_solve(&seed, params, NEWTON_MAX_ITER, NEWTON_TOL)?;
    if pt.w.norm_inf_nodes() < TRIVIAL_NORM {
        return Err(BifurcationError::TrivialSolution);
    }
    match pt.nodal_class() {
        Some(class) if class == k => Ok(pt),
        Some(class) => Err(BifurcationError::NodalMismatch {
            expected: k,
            got: class,
        }),
        None => Err(BifurcationError::TrivialSolution),
    }
}

/// Step controls for pseudo-arclength continuation.
#[derive(Debug, Clone, Copy)]
pub struct StepControls {
    pub initial: f64,
    pub min: f64,
    pub max: f64,
    pub max_points: usize,
}

impl Default for StepControls {
    fn default() -> Self {
        StepControls {
            initial: 0.05,
            min: 1e-7,
            max: 0.5,
            max_points: 2000,
        }
    }
}

/// A continued family of solutions of fixed nodal class.
#[derive(Debug, Clone)]
pub struct Branch {
    pub origin_k: usize,
    pub points: Vec<BranchPoint>,
    /// λ interval actually attained, `(min, max)`.
    pub lambda_coverage: (f64, f64),
}

impl Branch {
    /// The branch point closest to a requested λ.
    pub fn point_nearest(&self, lambda: f64) -> Option<&BranchPoint> {
        self.points.iter().min_by(|a, b| {
            (a.lambda - lambda)
                .abs()
                .total_cmp(&(b.lambda - lambda).abs())
        })
    }
}

/// Corrector for the bordered system `F(c, λ) = 0`, `⟨x - x_pred, τ⟩ = 0`
/// in the extended unknown `x = (c, λ)`.
#[allow(clippy::too_many_arguments)]
fn arclength_corrector(
    basis: &Arc<GegenbauerBasis>,
    pred_coeffs: &DVector<f64>,
    pred_lambda: f64,
    tangent: &DVector<f64>,
    base: &ProblemParams,
    max_iter: usize,
    tol: f64,
) -> Result<(DVector<f64>, f64, f64), BifurcationError> {
    let k = basis.num_modes;
    let mut coeffs = pred_coeffs.clone();
    let mut lambda = pred_lambda;
    for _ in 0..max_iter {
        if lambda <= 0.0 {
            return Err(BifurcationError::BadParams("continuation left λ > 0"));
        }
        let params = ProblemParams { lambda, ..*base };
        let values = basis.synthesize(&coeffs)?;
        if min_w_plus_1(&values) <= W_PLUS_1_FLOOR {
            return Err(BifurcationError::ConstraintViolation(min_w_plus_1(&values)));
        }
        let res = residual_coeffs(basis, &coeffs, &values, &params);
        // arclength constraint row
        let mut x_diff = DVector::zeros(k + 1);
        for i in 0..k {
            x_diff[i] = coeffs[i] - pred_coeffs[i];
        }
        x_diff[k] = lambda - pred_lambda;
        let constraint = x_diff.dot(tangent);
        let res_norm = (res.norm_squared() + constraint * constraint).sqrt();
        if res_norm < tol {
            return Ok((coeffs, lambda, res.norm()));
        }
        let jw = jacobian(basis, &values, &params);
        let jl = residual_lambda_deriv(basis, &values, base.p);
        let mut aug = DMatrix::zeros(k + 1, k + 1);
        aug.view_mut((0, 0), (k, k)).copy_from(&jw);
        for i in 0..k {
            aug[(i, k)] = jl[i];
            aug[(k, i)] = tangent[i];
        }
        aug[(k, k)] = tangent[k];
        let mut rhs = DVector::zeros(k + 1);
        for i in 0..k {
            rhs[i] = res[i];
        }
        rhs[k] = constraint;
        let step = aug
            .lu()
            .solve(&rhs)
            .ok_or(BifurcationError::SingularSystem)?;
        for i in 0..k {
            coeffs[i] -= step[i];
        }
        lambda -= step[k];
    }
    Err(BifurcationError::NoConvergence {
        iters: max_iter,
        residual: f64::NAN,
    })
}

fn accept_point(
    branch: &mut Branch,
    pt: BranchPoint,
    origin_k: usize,
) -> Result<(), BifurcationError> {
    match pt.nodal_class() {
        Some(class) if class == origin_k => {}
        other => {
            return Err(BifurcationError::NodalChange {
                lambda: pt.lambda,
                from: origin_k,
                to: other.unwrap_or(0),
            })
        }
    }
    branch.lambda_coverage.0 = branch.lambda_coverage.0.min(pt.lambda);
    branch.lambda_coverage.1 = branch.lambda_coverage.1.max(pt.lambda);
    branch.points.push(pt);
    Ok(())
}

/// Pseudo-arclength continuation from a converged start towards
/// `lambda_target`, with secant predictor and adaptive step. Every accepted
/// point is revalidated (residual, nodal class, positivity); a change of
/// nodal class aborts the run. When the predictor crosses the target, a
/// final fixed-λ solve lands exactly on it.
pub fn continue_branch(
    start: &BranchPoint,
    origin_k: usize,
    base: &ProblemParams,
    lambda_target: f64,
    controls: &StepControls,
) -> Result<Branch, BifurcationError> {
    let basis = Arc::clone(&start.w.basis);
    let k = basis.num_modes;
    let mut branch = Branch {
        origin_k,
        points: Vec::new(),
        lambda_coverage: (start.lambda, start.lambda),
    };
    accept_point(&mut branch, start.clone(), origin_k)?;
    if lambda_target <= start.lambda {
        return Ok(branch); // monotone-increase policy: nothing to extend
    }

    // launch step: move along the branch by nudging the origin coefficient
    // with λ free (a natural λ jump can collapse to the constant solution)
    let mut prev = extended(&start.w.coeffs, start.lambda);
    let first = {
        let c0 = start.w.coeffs[origin_k];
        let nudge = if c0 >= 0.0 { 1.0 } else { -1.0 } * (0.1 * c0.abs()).max(0.02);
        let mut tangent = DVector::zeros(k + 1);
        tangent[origin_k] = 1.0;
        let mut pred = start.w.coeffs.clone();
        pred[origin_k] = c0 + nudge;
        let (coeffs, lambda, res_norm) = arclength_corrector(
            &basis,
            &pred,
            start.lambda,
            &tangent,
            base,
            NEWTON_MAX_ITER,
            NEWTON_TOL,
        )?;
        let w = AxisymFn::from_coeffs(Arc::clone(&basis), coeffs)?;
        let params = ProblemParams { lambda, ..*base };
        BranchPoint::assemble(w, &params, res_norm)
    };
    let mut cur = extended(&first.w.coeffs, first.lambda);
    accept_point(&mut branch, first, origin_k)?;

    let mut h = controls.initial;
    let mut steps_left = controls.max_points;
    while steps_left > 0 {
        steps_left -= 1;
        let last = branch.points.last().expect("nonempty");
        if last.lambda >= lambda_target - 1e-12 {
            break;
        }
        let mut tangent = &cur - &prev;
        let tnorm = tangent.norm();
        if tnorm == 0.0 {
            return Err(BifurcationError::StepCollapse(h));
        }
        tangent /= tnorm;

        // try the step, halving on corrector failure
        let mut attempt_h = h;
        let outcome = loop {
            let pred = &cur + attempt_h * &tangent;
            let pred_coeffs = DVector::from_iterator(k, pred.iter().take(k).copied());
            let pred_lambda = pred[k];
            match arclength_corrector(
                &basis,
                &pred_coeffs,
                pred_lambda,
                &tangent,
                base,
                NEWTON_MAX_ITER,
                NEWTON_TOL,
            ) {
                Ok(ok) => break Some(ok),
                Err(BifurcationError::NodalChange { .. }) => return Err(BifurcationError::NodalChange {
                    lambda: pred_lambda,
                    from: origin_k,
                    to: 0,
                }),
                Err(_) => {
                    attempt_h *= 0.5;
                    if attempt_h < controls.min {
                        break None;
                    }
                }
            }
        };
        let (new_coeffs, new_lambda, res_norm) = match outcome {
            Some(v) => v,
            None => return Err(BifurcationError::StepCollapse(controls.min)),
        };

        if new_lambda >= lambda_target {
            // land exactly on the target with a fixed-λ solve
            let params = ProblemParams {
                lambda: lambda_target,
                ..*base
            };
            let seed = AxisymFn::from_coeffs(Arc::clone(&basis), new_coeffs)?;
            let pt = newton_solve(&seed, &params, NEWTON_MAX_ITER, NEWTON_TOL)?;
            accept_point(&mut branch, pt, origin_k)?;
            break;
        }

        let w = AxisymFn::from_coeffs(Arc::clone(&basis), new_coeffs)?;
        let params = ProblemParams {
            lambda: new_lambda,
            ..*base
        };
        let pt = BranchPoint::assemble(w, &params, res_norm);
        prev = cur;
        cur = extended(&pt.w.coeffs, pt.lambda);
        accept_point(&mut branch, pt, origin_k)?;

        // step adaptation
        if attempt_h < h {
            h = attempt_h;
        } else {
            h = (h * 1.3).min(controls.max);
        }
    }
    Ok(branch)
}

fn extended(coeffs: &DVector<f64>, lambda: f64) -> DVector<f64> {
    let k = coeffs.len();
    let mut x = DVector::zeros(k + 1);
    for i in 0..k {
        x[i] = coeffs[i];
    }
    x[k] = lambda;
    x
}

/// A priori validation of a converged point against the structural bounds:
/// `v = λ^{1/(p-1)}(w+1)` stays positive, its maximum dominates the
/// constant level `λ^{1/(p-1)}`, the profile does not vanish at the poles,
/// and all interior zeros are simple.
#[derive(Debug, Clone)]
pub struct ValidationReport {
    pub v_min: f64,
    pub v_max: f64,
    pub min_w_plus_1: f64,
    pub v_positive: bool,
    pub max_point_ok: bool,
    pub endpoints_ok: bool,
    pub zeros_simple: bool,
    pub within_cap: bool,
}

impl ValidationReport {
    pub fn all_ok(&self) -> bool {
        self.v_positive && self.max_point_ok && self.endpoints_ok && self.zeros_simple
    }
}

pub fn validate_solution(
    pt: &BranchPoint,
    params: &ProblemParams,
    lambda_cap: f64,
) -> ValidationReport {
    let level = params.lambda.powf(1.0 / (params.p - 1.0));
    let mut v_min = f64::INFINITY;
    let mut v_max = f64::NEG_INFINITY;
    for &wv in pt.w.node_values.iter() {
        let v = level * (wv + 1.0);
        v_min = v_min.min(v);
        v_max = v_max.max(v);
    }
    let norm = pt.w.norm_inf_nodes();
    let trivial = norm < TRIVIAL_NORM;
    let (endpoints_ok, zeros_simple) = if trivial {
        (true, true)
    } else {
        match count_nodal_class(&pt.w, NODAL_FINE_GRID, SIMPLICITY_TOL) {
            Ok(nc) => (true, nc.simple.iter().all(|&s| s)),
            Err(SpectralError::EndpointZero(_)) => (false, true),
            Err(SpectralError::NonSimpleZero { .. }) => (true, false),
            Err(_) => (false, false),
        }
    };
    ValidationReport {
        v_min,
        v_max,
        min_w_plus_1: pt.min_w_plus_1,
        v_positive: v_min > 0.0,
        max_point_ok: v_max >= level - 1e-12 * level,
        endpoints_ok,
        zeros_simple,
        within_cap: params.lambda <= lambda_cap,
    }
}

/// Result of the seeded multistart uniqueness probe.
#[derive(Debug, Clone)]
pub struct ProbeReport {
    pub starts: usize,
    pub converged: usize,
    /// Largest `‖w‖∞` among the converged end points.
    pub max_norm_inf: f64,
    pub all_trivial: bool,
}

/// Launches Newton from `n_starts` random small initial profiles (amplitude
/// log-uniform in `[1e-3, 0.5]`, direction over the first eight modes) and
/// reports whether every run ended at the constant solution.
pub fn multistart_probe(
    basis: Arc<GegenbauerBasis>,
    params: &ProblemParams,
    n_starts: usize,
    seed: u64,
) -> Result<ProbeReport, BifurcationError> {
    params.check_basis(&basis)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let active = basis.num_modes.min(8);
    let mut converged = 0usize;
    let mut max_norm: f64 = 0.0;
    for _ in 0..n_starts {
        let mut coeffs = DVector::zeros(basis.num_modes);
        for i in 0..active {
            coeffs[i] = rng.gen_range(-1.0..1.0);
        }
        let log_amp = rng.gen_range((1e-3f64).ln()..(0.5f64).ln());
        let amp = log_amp.exp();
        let w0 = AxisymFn::from_coeffs(Arc::clone(&basis), coeffs)?;
        let norm = w0.norm_inf_nodes();
        if norm == 0.0 {
            continue;
        }
        let w0 = AxisymFn::from_coeffs(Arc::clone(&basis), (amp / norm) * w0.coeffs)?;
        match newton_solve(&w0, params, 200, NEWTON_TOL) {
            Ok(pt) => {
                converged += 1;
                max_norm = max_norm.max(pt.w.norm_inf_nodes());
            }
            Err(BifurcationError::NoConvergence { .. }) => {}
            Err(e) => return Err(e),
        }
    }
    Ok(ProbeReport {
        starts: n_starts,
        converged,
        max_norm_inf: max_norm,
        all_trivial: converged == n_starts && max_norm < 1e-8,
    })
}

/// Summary of the nonradial-solution search for
/// `u'' + ((n-1)/r)u' + c u/r² + u^{(n+2)/(n-2)} = 0` mapped to the sphere
/// problem with `N = n-1`, `p = (n+2)/(n-2)`, `λ = (n-2)²/4 - c`.
#[derive(Debug, Clone)]
pub struct VeronSummary {
    pub sphere_dim: usize,
    pub p: f64,
    pub lambda: f64,
    /// Threshold λ_1 = N/(p-1); nonconstant solutions exist above it.
    pub lambda_1: f64,
    /// Converged nonconstant solutions at λ, one per nodal class found.
    pub solutions: Vec<BranchPoint>,
    pub classes_found: Vec<usize>,
    /// Multistart probe result when no class was reachable.
    pub probe: Option<ProbeReport>,
}

/// Searches for nonradial solutions of the radial equation with Hardy term
/// `c` in dimension `n ≥ 3` by running the bifurcation machinery on the
/// mapped sphere problem.
pub fn veron_nonradial(
    n: usize,
    c: f64,
    basis: Arc<GegenbauerBasis>,
    seed: u64,
) -> Result<VeronSummary, BifurcationError> {
    if n < 3 {
        return Err(BifurcationError::BadParams("need n >= 3"));
    }
    let sphere_dim = n - 1;
    let p = (n as f64 + 2.0) / (n as f64 - 2.0);
    let lambda = ((n - 2) * (n - 2)) as f64 / 4.0 - c;
    let params = ProblemParams::new(sphere_dim, p, lambda)?;
    params.check_basis(&basis)?;
    let lambda_1 = sphere_dim as f64 / (p - 1.0);

    let lambdas = bifurcation_points(sphere_dim, p, 8);
    let mut solutions = Vec::new();
    let mut classes_found = Vec::new();
    for (idx, &lk) in lambdas.iter().enumerate() {
        let k = idx + 1;
        if lk >= lambda {
            break;
        }
        let next = lambdas.get(idx + 1).copied().unwrap_or(lk * 2.0);
        let delta = 1e-2 * (next - lk);
        let switch_params = ProblemParams {
            lambda: lk + delta,
            ..params
        };
        let mut found = None;
        for amp in [0.3, -0.3, 0.15, -0.15, 0.5, -0.5, 0.08, -0.08] {
            match branch_switch(Arc::clone(&basis), k, &switch_params, amp) {
                Ok(pt) => {
                    found = Some(pt);
                    break;
                }
                Err(BifurcationError::Spectral(e)) => return Err(e.into()),
                Err(_) => continue,
            }
        }
        let start = match found {
            Some(pt) => pt,
            None => continue,
        };
        let branch = continue_branch(&start, k, &params, lambda, &StepControls::default())?;
        if let Some(pt) = branch.point_nearest(lambda) {
            if (pt.lambda - lambda).abs() < 1e-9 && pt.w.norm_inf_nodes() >= TRIVIAL_NORM {
                classes_found.push(k);
                solutions.push(pt.clone());
            }
        }
    }

    let probe = if solutions.is_empty() {
        Some(multistart_probe(basis, &params, 20, seed)?)
    } else {
        None
    };
    Ok(VeronSummary {
        sphere_dim,
        p,
        lambda,
        lambda_1,
        solutions,
        classes_found,
        probe,
    })
}
