//! Axisymmetric spectral discretization on `S^N`.
//!
//! A `G`-invariant function on `S^N` depends only on the last coordinate
//! `t = θ_{N+1} ∈ [-1, 1]` and is expanded in the orthonormal Gegenbauer
//! polynomials for the weight `(1-t²)^{(N-2)/2}`, which diagonalize
//! `-Δ_{S^N}` with eigenvalues `ν_k = k(k+N-1)`.

use nalgebra::{DMatrix, DVector};
use std::sync::Arc;
use thiserror::Error;

/// Default fine-grid size for nodal counting.
pub const NODAL_FINE_GRID: usize = 4096;
/// Default relative derivative threshold for a zero to count as simple.
pub const SIMPLICITY_TOL: f64 = 1e-6;
/// Relative floor below which function values count as vanishing.
pub const VALUE_FLOOR: f64 = 1e-10;

#[derive(Debug, Error)]
pub enum SpectralError {
    #[error("invalid basis parameters: N={n}, K={k}, M={m} (need N>=2, K>=2, M>=K)")]
    InvalidParams { n: usize, k: usize, m: usize },
    #[error("discrete orthonormality check failed: max deviation {0:.3e} exceeds 1e-10")]
    OrthonormalityFailure(f64),
    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("evaluation point {0} outside [-1, 1]")]
    OutOfDomain(f64),
    #[error("function is numerically zero; nodal class undefined")]
    ZeroFunction,
    #[error("zero at t={t} is not simple: |f'| = {deriv:.3e} below threshold")]
    NonSimpleZero { t: f64, deriv: f64 },
    #[error("profile vanishes at endpoint t={0}")]
    EndpointZero(f64),
}

/// Gauss quadrature and orthonormal eigenbasis of `-Δ_{S^N}` restricted to
/// axisymmetric functions.
///
/// `basis_matrix[(j, k)]` holds `φ_k(t_j)`; the eigenvalues are assigned
/// analytically as `k(k+N-1)`, never computed by linear algebra.
#[derive(Debug, Clone)]
pub struct GegenbauerBasis {
    /// Sphere dimension N >= 2.
    pub sphere_dim: usize,
    /// Number of retained modes K.
    pub num_modes: usize,
    /// Quadrature size M >= K.
    pub num_nodes: usize,
    /// Gauss nodes in (-1, 1), ascending.
    pub nodes: Vec<f64>,
    /// Positive quadrature weights for the weight function (1-t²)^{(N-2)/2}.
    pub weights: Vec<f64>,
    /// M x K matrix of φ_k(t_j).
    pub basis_matrix: DMatrix<f64>,
    /// ν_k = k(k+N-1) for 0 <= k < K.
    pub eigenvalues: Vec<f64>,
    /// Three-term recurrence coefficients β_k (β_0 is the weight mass).
    beta: Vec<f64>,
}

/// Γ(m/2) for integer m >= 1, by upward recurrence from Γ(1/2) and Γ(1).
fn gamma_half(m: u32) -> f64 {
    let mut val = if m % 2 == 1 {
        std::f64::consts::PI.sqrt()
    } else {
        1.0
    };
    let mut i = m % 2;
    if i == 0 {
        i = 2;
    }
    while i < m {
        val *= i as f64 / 2.0;
        i += 2;
    }
    val
}

/// Recurrence coefficient β_k for the symmetric Jacobi weight (1-t²)^α.
fn jacobi_beta(alpha: f64, k: usize) -> f64 {
    let k = k as f64;
    let s = 2.0 * k + 2.0 * alpha;
    k * (k + 2.0 * alpha) / (s * s - 1.0)
}

impl GegenbauerBasis {
    /// Builds the eigenbasis for `S^N` with `num_modes` modes and a Gauss rule
    /// of `num_nodes` points for the weight `(1-t²)^{(N-2)/2}`.
    pub fn build(
        sphere_dim: usize,
        num_modes: usize,
        num_nodes: usize,
    ) -> Result<Self, SpectralError> {
        if sphere_dim < 2 || num_modes < 2 || num_nodes < num_modes {
            return Err(SpectralError::InvalidParams {
                n: sphere_dim,
                k: num_modes,
                m: num_nodes,
            });
        }
        let alpha = (sphere_dim as f64 - 2.0) / 2.0;
        // β_0 = ∫ (1-t²)^α dt = √π Γ(α+1)/Γ(α+3/2); 2α is an integer here.
        let two_alpha = sphere_dim as u32 - 2;
        let beta0 =
            std::f64::consts::PI.sqrt() * gamma_half(two_alpha + 2) / gamma_half(two_alpha + 3);
        let mut beta = Vec::with_capacity(num_nodes);
        beta.push(beta0);
        for k in 1..num_nodes {
            beta.push(jacobi_beta(alpha, k));
        }

        let (nodes, weights) = golub_welsch(&beta);
        let basis_matrix = eval_basis_matrix(&beta, &nodes, num_modes);

        let basis = Self {
            sphere_dim,
            num_modes,
            num_nodes,
            nodes,
            weights,
            basis_matrix,
            eigenvalues: (0..num_modes)
                .map(|k| (k * (k + sphere_dim - 1)) as f64)
                .collect(),
            beta,
        };

        let dev = basis.orthonormality_deviation();
        if dev > 1e-10 {
            return Err(SpectralError::OrthonormalityFailure(dev));
        }
        Ok(basis)
    }

    /// Max deviation of Σ_j w_j φ_a(t_j) φ_b(t_j) from δ_ab over a, b < K.
    pub fn orthonormality_deviation(&self) -> f64 {
        let mut dev: f64 = 0.0;
        for a in 0..self.num_modes {
            for b in a..self.num_modes {
                let mut s = 0.0;
                for j in 0..self.num_nodes {
                    s += self.weights[j] * self.basis_matrix[(j, a)] * self.basis_matrix[(j, b)];
                }
                let target = if a == b { 1.0 } else { 0.0 };
                dev = dev.max((s - target).abs());
            }
        }
        dev
    }

    /// Coefficients of the first K modes from values at the quadrature nodes.
    pub fn analyze(&self, values: &[f64]) -> Result<DVector<f64>, SpectralError> {
        if values.len() != self.num_nodes {
            return Err(SpectralError::LengthMismatch {
                expected: self.num_nodes,
                got: values.len(),
            });
        }
        let mut coeffs = DVector::zeros(self.num_modes);
        for k in 0..self.num_modes {
            let mut s = 0.0;
            for j in 0..self.num_nodes {
                s += self.weights[j] * self.basis_matrix[(j, k)] * values[j];
            }
            coeffs[k] = s;
        }
        Ok(coeffs)
    }

    /// Values at the quadrature nodes from mode coefficients.
    pub fn synthesize(&self, coeffs: &DVector<f64>) -> Result<DVector<f64>, SpectralError> {
        if coeffs.len() != self.num_modes {
            return Err(SpectralError::LengthMismatch {
                expected: self.num_modes,
                got: coeffs.len(),
            });
        }
        Ok(&self.basis_matrix * coeffs)
    }

    /// φ_k(t) for all k < K by the orthonormal three-term recurrence.
    pub fn eval_modes(&self, t: f64) -> Vec<f64> {
        let mut vals = vec![0.0; self.num_modes];
        let mut prev = 0.0;
        let mut cur = 1.0 / self.beta[0].sqrt();
        for k in 0..self.num_modes {
            vals[k] = cur;
            if k + 1 < self.num_modes {
                let s_next = self.beta[k + 1].sqrt();
                let s_cur = if k == 0 { 0.0 } else { self.beta[k].sqrt() };
                let next = (t * cur - s_cur * prev) / s_next;
                prev = cur;
                cur = next;
            }
        }
        vals
    }

    /// φ_k, φ_k' and φ_k'' at `t`, by differentiating the recurrence.
    pub fn eval_modes_with_derivs(&self, t: f64) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
        let kmax = self.num_modes;
        let mut p = vec![0.0; kmax];
        let mut dp = vec![0.0; kmax];
        let mut ddp = vec![0.0; kmax];
        p[0] = 1.0 / self.beta[0].sqrt();
        for k in 0..kmax - 1 {
            let s_next = self.beta[k + 1].sqrt();
            let (pm, dpm, ddpm) = if k == 0 {
                (0.0, 0.0, 0.0)
            } else {
                let s = self.beta[k].sqrt();
                (s * p[k - 1], s * dp[k - 1], s * ddp[k - 1])
            };
            p[k + 1] = (t * p[k] - pm) / s_next;
            dp[k + 1] = (p[k] + t * dp[k] - dpm) / s_next;
            ddp[k + 1] = (2.0 * dp[k] + t * ddp[k] - ddpm) / s_next;
        }
        (p, dp, ddp)
    }
}

/// Gauss nodes and weights from the Jacobi matrix of the recurrence
/// coefficients (Golub-Welsch). The eigenvalue nodes are polished by a few
/// Newton steps on the orthonormal polynomial and the weights rebuilt from
/// the Christoffel function, which brings the quadrature from the ~1e-12
/// accuracy of the dense eigensolver down to machine precision.
fn golub_welsch(beta: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let m = beta.len();
    let mut jac = DMatrix::zeros(m, m);
    for k in 1..m {
        let s = beta[k].sqrt();
        jac[(k - 1, k)] = s;
        jac[(k, k - 1)] = s;
    }
    let eig = jac.symmetric_eigen();
    let mut nodes: Vec<f64> = eig.eigenvalues.iter().copied().collect();
    nodes.sort_by(f64::total_cmp);

    let mut weights = vec![0.0; m];
    for (j, node) in nodes.iter_mut().enumerate() {
        let mut t = *node;
        for _ in 0..4 {
            let (pm, dpm, _) = recurrence_at(beta, m, t);
            let step = pm / dpm;
            if !step.is_finite() {
                break;
            }
            t -= step;
            if step.abs() < 1e-15 * t.abs().max(1.0) {
                break;
            }
        }
        *node = t;
        let (_, _, kernel) = recurrence_at(beta, m, t);
        weights[j] = 1.0 / kernel;
    }
    (nodes, weights)
}

/// Evaluates `(p_m(t), p_m'(t), Σ_{k<m} p_k(t)²)` for the orthonormal
/// polynomials of the recurrence `√β_{k+1} p_{k+1} = t p_k − √β_k p_{k-1}`.
fn recurrence_at(beta: &[f64], m: usize, t: f64) -> (f64, f64, f64) {
    let mut prev = 0.0;
    let mut dprev = 0.0;
    let mut cur = 1.0 / beta[0].sqrt();
    let mut dcur = 0.0;
    let mut kernel = 0.0;
    for k in 0..m {
        kernel += cur * cur;
        // the unknown trailing coefficient only rescales p_m, which leaves
        // both the Newton ratio and the kernel unchanged
        let s_up = if k + 1 < beta.len() {
            beta[k + 1].sqrt()
        } else {
            1.0
        };
        let s_cur = if k == 0 { 0.0 } else { beta[k].sqrt() };
        let next = (t * cur - s_cur * prev) / s_up;
        let dnext = (cur + t * dcur - s_cur * dprev) / s_up;
        prev = cur;
        dprev = dcur;
        cur = next;
        dcur = dnext;
    }
    (cur, dcur, kernel)
}

fn eval_basis_matrix(beta: &[f64], nodes: &[f64], num_modes: usize) -> DMatrix<f64> {
    let m = nodes.len();
    let mut mat = DMatrix::zeros(m, num_modes);
    for (j, &t) in nodes.iter().enumerate() {
        let mut prev = 0.0;
        let mut cur = 1.0 / beta[0].sqrt();
        for k in 0..num_modes {
            mat[(j, k)] = cur;
            if k + 1 < num_modes {
                let s_next = beta[k + 1].sqrt();
                let s_cur = if k == 0 { 0.0 } else { beta[k].sqrt() };
                let next = (t * cur - s_cur * prev) / s_next;
                prev = cur;
                cur = next;
            }
        }
    }
    mat
}

/// Axisymmetric function on `S^N`: coefficients in the eigenbasis plus the
/// cached values at the quadrature nodes.
#[derive(Debug, Clone)]
pub struct AxisymFn {
    pub basis: Arc<GegenbauerBasis>,
    pub coeffs: DVector<f64>,
    pub node_values: DVector<f64>,
}

impl AxisymFn {
    pub fn from_coeffs(
        basis: Arc<GegenbauerBasis>,
        coeffs: DVector<f64>,
    ) -> Result<Self, SpectralError> {
        let node_values = basis.synthesize(&coeffs)?;
        Ok(Self {
            basis,
            coeffs,
            node_values,
        })
    }

    pub fn from_node_values(
        basis: Arc<GegenbauerBasis>,
        values: DVector<f64>,
    ) -> Result<Self, SpectralError> {
        let coeffs = basis.analyze(values.as_slice())?;
        let node_values = basis.synthesize(&coeffs)?;
        Ok(Self {
            basis,
            coeffs,
            node_values,
        })
    }

    /// Constant function `c`.
    pub fn constant(basis: Arc<GegenbauerBasis>, c: f64) -> Self {
        let values = DVector::from_element(basis.num_nodes, c);
        Self::from_node_values(basis, values).expect("constant synthesis cannot fail")
    }

    /// The k-th basis mode.
    pub fn mode(basis: Arc<GegenbauerBasis>, k: usize) -> Result<Self, SpectralError> {
        if k >= basis.num_modes {
            return Err(SpectralError::LengthMismatch {
                expected: basis.num_modes,
                got: k,
            });
        }
        let mut coeffs = DVector::zeros(basis.num_modes);
        coeffs[k] = 1.0;
        Self::from_coeffs(basis, coeffs)
    }

    /// Diagonal action of `-Δ_{S^N}`: coefficient `c_k ↦ ν_k c_k`.
    pub fn apply_neg_laplacian(&self) -> Self {
        let coeffs = DVector::from_iterator(
            self.coeffs.len(),
            self.coeffs
                .iter()
                .zip(&self.basis.eigenvalues)
                .map(|(c, nu)| c * nu),
        );
        Self::from_coeffs(self.basis.clone(), coeffs).expect("same-length synthesis")
    }

    /// Stable pointwise evaluation of Σ c_k φ_k(t).
    pub fn evaluate(&self, t: f64) -> Result<f64, SpectralError> {
        if !(-1.0..=1.0).contains(&t) {
            return Err(SpectralError::OutOfDomain(t));
        }
        let modes = self.basis.eval_modes(t);
        Ok(self
            .coeffs
            .iter()
            .zip(&modes)
            .map(|(c, p)| c * p)
            .sum())
    }

    /// Derivative dṽ/dt at `t`.
    pub fn derivative(&self, t: f64) -> Result<f64, SpectralError> {
        if !(-1.0..=1.0).contains(&t) {
            return Err(SpectralError::OutOfDomain(t));
        }
        let (_, dp, _) = self.basis.eval_modes_with_derivs(t);
        Ok(self.coeffs.iter().zip(&dp).map(|(c, d)| c * d).sum())
    }

    pub fn norm_inf_nodes(&self) -> f64 {
        self.node_values.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }
}

/// Zeros of an axisymmetric profile on (-1, 1).
#[derive(Debug, Clone, serde::Serialize)]
pub struct NodalClass {
    /// Number of zeros of ṽ on (-1, 1).
    pub class: usize,
    /// Zero locations, strictly increasing.
    pub zero_locations: Vec<f64>,
    /// Simplicity flags per zero (all true for a valid class member).
    pub simple: Vec<bool>,
}

/// Counts sign changes of the synthesized profile on a fine grid, refines
/// each bracketed root by bisection, and rejects non-simple zeros and
/// endpoint zeros.
pub fn count_nodal_class(
    f: &AxisymFn,
    fine_grid_size: usize,
    simplicity_tol: f64,
) -> Result<NodalClass, SpectralError> {
    let eval = |t: f64| f.evaluate(t).expect("t within [-1,1]");
    let mut norm_inf: f64 = 0.0;
    let mut grid_vals = Vec::with_capacity(fine_grid_size);
    let mut grid_ts = Vec::with_capacity(fine_grid_size);
    for i in 0..fine_grid_size {
        let t = -1.0 + 2.0 * i as f64 / (fine_grid_size - 1) as f64;
        let v = eval(t);
        norm_inf = norm_inf.max(v.abs());
        grid_ts.push(t);
        grid_vals.push(v);
    }
    if norm_inf < f64::MIN_POSITIVE.max(1e-300) || norm_inf == 0.0 {
        return Err(SpectralError::ZeroFunction);
    }
    let floor = VALUE_FLOOR * norm_inf;
    if grid_vals[0].abs() <= floor {
        return Err(SpectralError::EndpointZero(-1.0));
    }
    if grid_vals[fine_grid_size - 1].abs() <= floor {
        return Err(SpectralError::EndpointZero(1.0));
    }

    let mut zeros = Vec::new();
    let mut simple = Vec::new();
    for i in 0..fine_grid_size - 1 {
        if grid_vals[i] == 0.0 {
            // exact grid zero: treat as a bracket around the point
            let root = grid_ts[i];
            push_zero(f, root, norm_inf, simplicity_tol, &mut zeros, &mut simple)?;
            continue;
        }
        if grid_vals[i] * grid_vals[i + 1] < 0.0 {
            let root = bisect(&eval, grid_ts[i], grid_ts[i + 1]);
            push_zero(f, root, norm_inf, simplicity_tol, &mut zeros, &mut simple)?;
        }
    }
    Ok(NodalClass {
        class: zeros.len(),
        zero_locations: zeros,
        simple,
    })
}

fn push_zero(
    f: &AxisymFn,
    root: f64,
    norm_inf: f64,
    simplicity_tol: f64,
    zeros: &mut Vec<f64>,
    simple: &mut Vec<bool>,
) -> Result<(), SpectralError> {
    let deriv = f.derivative(root)?.abs();
    if deriv <= simplicity_tol * norm_inf {
        return Err(SpectralError::NonSimpleZero { t: root, deriv });
    }
    zeros.push(root);
    simple.push(true);
    Ok(())
}

fn bisect(f: &dyn Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
    let mut fa = f(a);
    for _ in 0..200 {
        let mid = 0.5 * (a + b);
        if b - a < 1e-15 {
            return mid;
        }
        let fm = f(mid);
        if fm == 0.0 {
            return mid;
        }
        if fa * fm < 0.0 {
            b = mid;
        } else {
            a = mid;
            fa = fm;
        }
    }
    0.5 * (a + b)
}
