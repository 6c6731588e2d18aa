//! Conformal maps of `S^n` and the associated transforms.
//!
//! The conformal reflection in the geodesic sphere of radius `λ` about a
//! pole acts on geodesic polar coordinates as `(r, ω) ↦ (h_λ(r), ω)` with
//!
//! ```text
//! cos h_λ(r) = (2 cos λ - (1 + cos²λ) cos r) / (1 + cos²λ - 2 cos λ cos r)
//! ```
//!
//! and Jacobian density `|J|(r) = (sin²λ / (1 + cos²λ - 2 cos λ cos r))^n`.
//! The Kelvin transform of a profile is `|J|^{(n-2)/(2n)} (v ∘ φ)` for
//! `n ≥ 3` and `v ∘ φ + ½ log|J|` on the 2-sphere.

use crate::spectral::GegenbauerBasis;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Clamp margin near the poles; evaluation closer than this to r = 0 or
/// r = π is clamped and flagged rather than extrapolated.
pub const POLE_CLAMP: f64 = 1e-6;

#[derive(Debug, Error)]
pub enum GeometryError {
    #[error("angle {name} = {value} outside the open interval (0, π)")]
    AngleOutOfRange { name: &'static str, value: f64 },
    #[error("dimension n = {0} not supported here (need {1})")]
    BadDimension(usize, &'static str),
    #[error("profile grid must be strictly increasing with finite values")]
    BadGrid,
    #[error("profile values must be positive for this transform")]
    NonPositiveValues,
    #[error("evaluation at {0} falls outside the profile grid")]
    OutsideGrid(f64),
    #[error("spectral tail {0:.3e} exceeds resolution threshold; residual meaningless")]
    ResolutionError(f64),
    #[error("matukuma g undefined at t = 1 with negative (1-t) exponent")]
    PoleSingularity,
}

/// Axisymmetric pole of the conformal reflection.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Pole {
    North,
    South,
}

impl Pole {
    /// θ_{n+1} of a point at geodesic distance `r` from this pole.
    pub fn t_from_geodesic(self, r: f64) -> f64 {
        match self {
            Pole::North => r.cos(),
            Pole::South => -r.cos(),
        }
    }

    /// Geodesic distance from this pole of a point with θ_{n+1} = t.
    pub fn geodesic_from_t(self, t: f64) -> f64 {
        match self {
            Pole::North => t.clamp(-1.0, 1.0).acos(),
            Pole::South => (-t.clamp(-1.0, 1.0)).acos(),
        }
    }
}

/// Pole and radius of a conformal reflection of `S^n`.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct KelvinParams {
    pub pole: Pole,
    /// Reflection radius in radians, 0 < λ < π.
    pub lambda: f64,
    /// Ambient sphere dimension, n ≥ 2.
    pub n: usize,
}

impl KelvinParams {
    pub fn new(pole: Pole, lambda: f64, n: usize) -> Result<Self, GeometryError> {
        if !(lambda > 0.0 && lambda < std::f64::consts::PI) {
            return Err(GeometryError::AngleOutOfRange {
                name: "lambda",
                value: lambda,
            });
        }
        if n < 2 {
            return Err(GeometryError::BadDimension(n, "n >= 2"));
        }
        Ok(Self { pole, lambda, n })
    }
}

fn check_angle(name: &'static str, value: f64) -> Result<(), GeometryError> {
    if value > 0.0 && value < std::f64::consts::PI {
        Ok(())
    } else {
        Err(GeometryError::AngleOutOfRange { name, value })
    }
}

/// Reflection radius `h_λ(r)`, an involution of (0, π) exchanging the inside
/// and outside of the geodesic λ-sphere.
///
/// Computed in tangent half-angle form, `tan(h/2) = tan²(λ/2) / tan(r/2)`,
/// which stays well conditioned near the poles where the cosine form loses
/// digits through `acos`.
pub fn reflect_radius(lambda: f64, r: f64) -> Result<f64, GeometryError> {
    check_angle("lambda", lambda)?;
    check_angle("r", r)?;
    let a = (lambda / 2.0).tan();
    Ok(2.0 * (a * a / (r / 2.0).tan()).atan())
}

/// cos h_λ(r) as a rational function of `t = cos r`; exact arithmetic form
/// used by the spectral residual checks.
pub fn reflect_cos(lambda: f64, t: f64) -> Result<f64, GeometryError> {
    check_angle("lambda", lambda)?;
    let cl = lambda.cos();
    Ok((2.0 * cl - (1.0 + cl * cl) * t) / (1.0 + cl * cl - 2.0 * cl * t))
}

/// Jacobian density as a function of `t = cos r`.
pub fn jacobian_density_cos(lambda: f64, t: f64, n: usize) -> Result<f64, GeometryError> {
    check_angle("lambda", lambda)?;
    if n < 2 {
        return Err(GeometryError::BadDimension(n, "n >= 2"));
    }
    let cl = lambda.cos();
    let sl2 = lambda.sin() * lambda.sin();
    // (1 - cl)² + 2 cl (1 - t) equals 1 + cl² - 2 cl t without cancellation
    let denom = (1.0 - cl) * (1.0 - cl) + 2.0 * cl * (1.0 - t);
    Ok((sl2 / denom).powi(n as i32))
}

/// Jacobian density `|J_φ|(r) = (sin²λ / (1 + cos²λ - 2 cos λ cos r))^n`.
pub fn jacobian_density(lambda: f64, r: f64, n: usize) -> Result<f64, GeometryError> {
    check_angle("lambda", lambda)?;
    check_angle("r", r)?;
    if n < 2 {
        return Err(GeometryError::BadDimension(n, "n >= 2"));
    }
    let cl = lambda.cos();
    let sl2 = lambda.sin() * lambda.sin();
    let sh = (r / 2.0).sin();
    // (1 - cl)² + 4 cl sin²(r/2) equals 1 + cl² - 2 cl cos r without
    // cancellation near the poles
    let denom = (1.0 - cl) * (1.0 - cl) + 4.0 * cl * sh * sh;
    Ok((sl2 / denom).powi(n as i32))
}

/// Coordinate kind of a radial profile grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Coordinate {
    /// r ∈ (0, ∞) on Euclidean space.
    EuclideanR,
    /// Geodesic distance r ∈ (0, π) from a pole.
    GeodesicR,
    /// t = θ_{n+1} ∈ (-1, 1).
    TCosine,
    /// t = -log r, the Emden-Fowler time variable.
    LogRadius,
}

/// Sampled radial profile with barycentric interpolation.
///
/// Grids are expected to be Chebyshev-distributed for spectral accuracy;
/// the barycentric weights are computed from the actual grid.
#[derive(Debug, Clone)]
pub struct RadialProfile {
    pub grid: Vec<f64>,
    pub values: Vec<f64>,
    pub coordinate: Coordinate,
    bary_weights: Vec<f64>,
}

impl RadialProfile {
    pub fn new(
        grid: Vec<f64>,
        values: Vec<f64>,
        coordinate: Coordinate,
    ) -> Result<Self, GeometryError> {
        if grid.len() < 2 || grid.len() != values.len() {
            return Err(GeometryError::BadGrid);
        }
        if grid.windows(2).any(|w| !(w[0] < w[1]))
            || grid.iter().chain(values.iter()).any(|x| !x.is_finite())
        {
            return Err(GeometryError::BadGrid);
        }
        let bary_weights = barycentric_weights(&grid);
        Ok(Self {
            grid,
            values,
            coordinate,
            bary_weights,
        })
    }

    /// Samples `f` on a Chebyshev-distributed grid of `m` points in (a, b).
    pub fn from_fn_chebyshev(
        m: usize,
        a: f64,
        b: f64,
        coordinate: Coordinate,
        f: impl Fn(f64) -> f64,
    ) -> Result<Self, GeometryError> {
        let mut grid = Vec::with_capacity(m);
        for j in 0..m {
            // Chebyshev-Lobatto points mapped to [a, b], ascending; the
            // endpoints are on the grid so the span is exactly [a, b]
            let x = (std::f64::consts::PI * (m - 1 - j) as f64 / (m - 1) as f64).cos();
            grid.push(0.5 * (a + b) + 0.5 * (b - a) * x);
        }
        grid[0] = a;
        grid[m - 1] = b;
        let values = grid.iter().map(|&x| f(x)).collect();
        Self::new(grid, values, coordinate)
    }

    pub fn is_positive(&self) -> bool {
        self.values.iter().all(|&v| v > 0.0)
    }

    /// Barycentric interpolation at `x` within the grid span.
    pub fn interpolate(&self, x: f64) -> Result<f64, GeometryError> {
        let (lo, hi) = (self.grid[0], *self.grid.last().unwrap());
        if x < lo || x > hi {
            return Err(GeometryError::OutsideGrid(x));
        }
        let mut num = 0.0;
        let mut den = 0.0;
        for j in 0..self.grid.len() {
            let diff = x - self.grid[j];
            if diff == 0.0 {
                return Ok(self.values[j]);
            }
            let w = self.bary_weights[j] / diff;
            num += w * self.values[j];
            den += w;
        }
        Ok(num / den)
    }

    /// Interpolation with near-pole clamping: arguments within [`POLE_CLAMP`]
    /// of the grid span are clamped to the nearest grid point; returns the
    /// value and whether clamping occurred.
    pub fn interpolate_clamped(&self, x: f64) -> Result<(f64, bool), GeometryError> {
        let (lo, hi) = (self.grid[0], *self.grid.last().unwrap());
        if x >= lo && x <= hi {
            return Ok((self.interpolate(x)?, false));
        }
        if x < lo && lo - x <= POLE_CLAMP {
            return Ok((self.values[0], true));
        }
        if x > hi && x - hi <= POLE_CLAMP {
            return Ok((*self.values.last().unwrap(), true));
        }
        Err(GeometryError::OutsideGrid(x))
    }
}

fn barycentric_weights(grid: &[f64]) -> Vec<f64> {
    let m = grid.len();
    // rescale differences to keep products within range
    let scale = 4.0 / (grid[m - 1] - grid[0]);
    let mut w = vec![1.0; m];
    for j in 0..m {
        for i in 0..m {
            if i != j {
                w[j] /= (grid[j] - grid[i]) * scale;
            }
        }
    }
    w
}

/// Result profile of a Kelvin transform, with a flag for any near-pole
/// clamping that occurred during resampling.
#[derive(Debug, Clone)]
pub struct TransformedProfile {
    pub profile: RadialProfile,
    pub clamped: bool,
}

/// Power-form Kelvin transform `v ↦ |J|^{(n-2)/(2n)} (v ∘ φ)` for n ≥ 3, on
/// an axisymmetric profile in geodesic distance from the transform pole.
pub fn kelvin_transform_axisym(
    v: &RadialProfile,
    kp: &KelvinParams,
) -> Result<TransformedProfile, GeometryError> {
    if kp.n < 3 {
        return Err(GeometryError::BadDimension(kp.n, "n >= 3 for the power form"));
    }
    if v.coordinate != Coordinate::GeodesicR {
        return Err(GeometryError::BadGrid);
    }
    if !v.is_positive() {
        return Err(GeometryError::NonPositiveValues);
    }
    let expo = (kp.n as f64 - 2.0) / (2.0 * kp.n as f64);
    let mut values = Vec::with_capacity(v.grid.len());
    let mut clamped = false;
    for &r in &v.grid {
        let h = reflect_radius(kp.lambda, r)?;
        let (vh, cl) = v.interpolate_clamped(h)?;
        clamped |= cl;
        let jac = jacobian_density(kp.lambda, r, kp.n)?;
        values.push(jac.powf(expo) * vh);
    }
    Ok(TransformedProfile {
        profile: RadialProfile::new(v.grid.clone(), values, Coordinate::GeodesicR)?,
        clamped,
    })
}

/// Logarithmic Kelvin transform on the 2-sphere: `v ∘ φ + ½ log|J|`.
pub fn kelvin_transform_s2(
    v: &RadialProfile,
    kp: &KelvinParams,
) -> Result<TransformedProfile, GeometryError> {
    if kp.n != 2 {
        return Err(GeometryError::BadDimension(kp.n, "n = 2 for the log form"));
    }
    if v.coordinate != Coordinate::GeodesicR {
        return Err(GeometryError::BadGrid);
    }
    let mut values = Vec::with_capacity(v.grid.len());
    let mut clamped = false;
    for &r in &v.grid {
        let h = reflect_radius(kp.lambda, r)?;
        let (vh, cl) = v.interpolate_clamped(h)?;
        clamped |= cl;
        let jac = jacobian_density(kp.lambda, r, 2)?;
        values.push(vh + 0.5 * jac.ln());
    }
    Ok(TransformedProfile {
        profile: RadialProfile::new(v.grid.clone(), values, Coordinate::GeodesicR)?,
        clamped,
    })
}

/// Relative magnitude of the trailing coefficients, used to detect
/// under-resolved profiles.
fn spectral_tail(coeffs: &[f64]) -> f64 {
    let k = coeffs.len();
    let tail_start = k - (k / 8).max(2);
    let max_all = coeffs.iter().fold(0.0f64, |m, c| m.max(c.abs()));
    if max_all == 0.0 {
        return 0.0;
    }
    let max_tail = coeffs[tail_start..]
        .iter()
        .fold(0.0f64, |m, c| m.max(c.abs()));
    max_tail / max_all
}

/// Residual of the conformal-equivariance identity
/// `-L v_{p,λ} = |J|^{(n+2)/(2n)} (-L v) ∘ φ`, where `L = Δ - n(n-2)/4` is
/// the conformal Laplacian, measured in the weighted L² norm of the basis
/// (computed coefficient-wise via Parseval). The weighted norm avoids the
/// near-pole amplification of the high modes that would otherwise swamp a
/// pointwise sup in rounding noise.
///
/// `v_t` is the profile as a function of `t = θ_{n+1}`; both sides are
/// evaluated spectrally in the supplied basis (whose `sphere_dim` must be
/// the ambient `n`).
pub fn conformal_invariance_residual(
    v_t: &dyn Fn(f64) -> f64,
    kp: &KelvinParams,
    basis: &GegenbauerBasis,
    tail_threshold: f64,
) -> Result<f64, GeometryError> {
    let n = kp.n;
    if n < 3 {
        return Err(GeometryError::BadDimension(n, "n >= 3"));
    }
    if basis.sphere_dim != n {
        return Err(GeometryError::BadDimension(basis.sphere_dim, "basis dim = n"));
    }
    let shift = (n * (n - 2)) as f64 / 4.0;
    let expo_v = (n as f64 - 2.0) / (2.0 * n as f64);
    let expo_eq = (n as f64 + 2.0) / (2.0 * n as f64);

    let values: Vec<f64> = basis.nodes.iter().map(|&t| v_t(t)).collect();
    let coeffs = basis.analyze(&values).map_err(|_| GeometryError::BadGrid)?;
    let tail = spectral_tail(coeffs.as_slice());
    if tail > tail_threshold {
        return Err(GeometryError::ResolutionError(tail));
    }
    // -L v in coefficient space: (ν_k + n(n-2)/4) c_k
    let neg_l_coeffs: Vec<f64> = coeffs
        .iter()
        .zip(&basis.eigenvalues)
        .map(|(c, nu)| c * (nu + shift))
        .collect();
    let eval_in_basis = |cs: &[f64], t: f64| -> f64 {
        basis
            .eval_modes(t)
            .iter()
            .zip(cs)
            .map(|(p, c)| p * c)
            .sum()
    };

    // map on t = θ_{n+1}: conjugate the cos-r reflection through the pole
    let reflect_t = |t: f64| -> f64 {
        match kp.pole {
            Pole::North => reflect_cos(kp.lambda, t).expect("lambda checked"),
            Pole::South => -reflect_cos(kp.lambda, -t).expect("lambda checked"),
        }
    };
    let jac_t = |t: f64| -> f64 {
        let tr = match kp.pole {
            Pole::North => t,
            Pole::South => -t,
        };
        jacobian_density_cos(kp.lambda, tr, n).expect("lambda checked")
    };

    // Kelvin transform sampled at the quadrature nodes (as a function of t)
    let kelvin_values: Vec<f64> = basis
        .nodes
        .iter()
        .map(|&t| jac_t(t).powf(expo_v) * v_t(reflect_t(t)))
        .collect();
    let kelvin_coeffs = basis
        .analyze(&kelvin_values)
        .map_err(|_| GeometryError::BadGrid)?;
    let ktail = spectral_tail(kelvin_coeffs.as_slice());
    if ktail > tail_threshold {
        return Err(GeometryError::ResolutionError(ktail));
    }
    let neg_l_kelvin: Vec<f64> = kelvin_coeffs
        .iter()
        .zip(&basis.eigenvalues)
        .map(|(c, nu)| c * (nu + shift))
        .collect();

    // right-hand side sampled at the nodes, then projected
    let rhs_values: Vec<f64> = basis
        .nodes
        .iter()
        .map(|&t| jac_t(t).powf(expo_eq) * eval_in_basis(&neg_l_coeffs, reflect_t(t)))
        .collect();
    let rhs_coeffs = basis
        .analyze(&rhs_values)
        .map_err(|_| GeometryError::BadGrid)?;

    let residual = neg_l_kelvin
        .iter()
        .zip(rhs_coeffs.iter())
        .map(|(l, r)| (l - r) * (l - r))
        .sum::<f64>()
        .sqrt();
    Ok(residual)
}

/// Conformal factor of the inverse stereographic projection,
/// `ξ(x) = (2/(1+|x|²))^{(n-2)/2}`.
pub fn stereographic_xi(r: f64, n: usize) -> f64 {
    (2.0 / (1.0 + r * r)).powf((n as f64 - 2.0) / 2.0)
}

/// Transfers a positive radial function on R^n to the sphere profile
/// `v(t) = u(r)/ξ(r)` on the grid `t = (r²-1)/(r²+1)` induced by the r grid.
pub fn stereographic_transfer(
    u: &RadialProfile,
    n: usize,
) -> Result<RadialProfile, GeometryError> {
    if n < 3 {
        return Err(GeometryError::BadDimension(n, "n >= 3"));
    }
    if u.coordinate != Coordinate::EuclideanR {
        return Err(GeometryError::BadGrid);
    }
    if !u.is_positive() {
        return Err(GeometryError::NonPositiveValues);
    }
    let mut grid = Vec::with_capacity(u.grid.len());
    let mut values = Vec::with_capacity(u.grid.len());
    for (&r, &uv) in u.grid.iter().zip(&u.values) {
        grid.push((r * r - 1.0) / (r * r + 1.0));
        values.push(uv / stereographic_xi(r, n));
    }
    RadialProfile::new(grid, values, Coordinate::TCosine)
}

/// Inverse transfer: `u(r) = ξ(r) v(t(r))` on the r grid induced by the
/// t grid.
pub fn stereographic_transfer_inverse(
    v: &RadialProfile,
    n: usize,
) -> Result<RadialProfile, GeometryError> {
    if n < 3 {
        return Err(GeometryError::BadDimension(n, "n >= 3"));
    }
    if v.coordinate != Coordinate::TCosine {
        return Err(GeometryError::BadGrid);
    }
    let mut grid = Vec::with_capacity(v.grid.len());
    let mut values = Vec::with_capacity(v.grid.len());
    for (&t, &vv) in v.grid.iter().zip(&v.values) {
        if t >= 1.0 {
            return Err(GeometryError::OutsideGrid(t));
        }
        let r = ((1.0 + t) / (1.0 - t)).sqrt();
        grid.push(r);
        values.push(stereographic_xi(r, n) * vv);
    }
    RadialProfile::new(grid, values, Coordinate::EuclideanR)
}

/// Sphere-side Matukuma nonlinearity
/// `g(t, s) = ½ (1-t)^{((n-2)/2)(p - n/(n-2))} s^p`.
pub fn matukuma_g(t: f64, s: f64, n: usize, p: f64) -> Result<f64, GeometryError> {
    if n < 3 {
        return Err(GeometryError::BadDimension(n, "n >= 3"));
    }
    if !(-1.0..=1.0).contains(&t) || s <= 0.0 || p < 0.0 {
        return Err(GeometryError::BadGrid);
    }
    let expo = (n as f64 - 2.0) / 2.0 * (p - n as f64 / (n as f64 - 2.0));
    if t == 1.0 && expo < 0.0 {
        return Err(GeometryError::PoleSingularity);
    }
    Ok(0.5 * (1.0 - t).powf(expo) * s.powf(p))
}

/// Parameter record of the mean-field substitution: the transformed
/// equation reads `-Δ v + 1 = K(θ) e^{2v} + f(θ)` with
/// `K(θ) = exp(-γ⟨s,θ⟩)` and `f ≡ 1 - α/(8π)`.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct MeanFieldForms {
    pub alpha: f64,
    pub gamma: f64,
    /// f ≡ 1 - α/(8π)
    pub f_value: f64,
}

pub fn meanfield_substitution(alpha: f64, gamma: f64) -> MeanFieldForms {
    MeanFieldForms {
        alpha,
        gamma,
        f_value: 1.0 - alpha / (8.0 * std::f64::consts::PI),
    }
}

impl MeanFieldForms {
    /// K at a point with θ_{n+1} = t: ⟨s,θ⟩ = -t on the 2-sphere.
    pub fn k_at(&self, t: f64) -> f64 {
        (self.gamma * t).exp()
    }

    /// K at the south pole (t = -1), i.e. exp(-γ).
    pub fn k_at_south(&self) -> f64 {
        (-self.gamma).exp()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::PI;

    #[test]
    fn mirror_reflection_at_half_pi() {
        for r in [0.3, 1.0, 2.5] {
            assert_abs_diff_eq!(reflect_radius(PI / 2.0, r).unwrap(), PI - r, epsilon = 1e-14);
            assert_abs_diff_eq!(jacobian_density(PI / 2.0, r, 4).unwrap(), 1.0, epsilon = 1e-14);
        }
    }

    #[test]
    fn boundary_is_fixed() {
        for lam in [0.4, PI / 3.0, 2.0] {
            assert_abs_diff_eq!(reflect_radius(lam, lam).unwrap(), lam, epsilon = 1e-13);
        }
    }

    #[test]
    fn reflect_radius_derived_value() {
        // λ = π/3, r = π/2: cos h = (1 - 0)/... = arccos(0.8)
        let h = reflect_radius(PI / 3.0, PI / 2.0).unwrap();
        assert_abs_diff_eq!(h, 0.8f64.acos(), epsilon = 1e-14);
        assert_abs_diff_eq!(h, 0.6435011087932844, epsilon = 1e-12);
    }

    #[test]
    fn half_angle_form_agrees_with_cosine_form() {
        for i in 1..24 {
            for j in 1..24 {
                let lam = PI * i as f64 / 24.0;
                let r = PI * j as f64 / 24.0;
                let h = reflect_radius(lam, r).unwrap();
                assert_abs_diff_eq!(
                    h.cos(),
                    reflect_cos(lam, r.cos()).unwrap(),
                    epsilon = 1e-13
                );
            }
        }
    }

    #[test]
    fn jacobian_derived_value_and_classification() {
        let j = jacobian_density(PI / 3.0, PI / 2.0, 3).unwrap();
        assert_abs_diff_eq!(j, (0.75f64 / 1.25).powi(3), epsilon = 1e-14);
        assert_abs_diff_eq!(j, 0.216, epsilon = 1e-12);
        // λ < π/2, r > λ ⇒ |J| < 1; λ > π/2, r > λ ⇒ |J| > 1
        for i in 1..40 {
            let lam = 0.9;
            let r = lam + (PI - lam - 1e-3) * i as f64 / 40.0;
            assert!(jacobian_density(lam, r, 3).unwrap() < 1.0);
            let lam = 2.2;
            if lam + (PI - lam - 1e-3) * i as f64 / 40.0 > lam {
                let r = lam + (PI - lam - 1e-3) * i as f64 / 40.0;
                assert!(jacobian_density(lam, r, 3).unwrap() > 1.0);
            }
        }
    }

    #[test]
    fn reflection_identity_and_involution() {
        // 1 + cos²λ - 2cosλ cos h_λ(r) = sin⁴λ / (1 + cos²λ - 2cosλ cos r)
        for i in 1..20 {
            for j in 1..20 {
                let lam = PI * i as f64 / 20.0;
                let r = PI * j as f64 / 20.0;
                let h = reflect_radius(lam, r).unwrap();
                let cl = lam.cos();
                let lhs = 1.0 + cl * cl - 2.0 * cl * h.cos();
                let rhs = lam.sin().powi(4) / (1.0 + cl * cl - 2.0 * cl * r.cos());
                assert_abs_diff_eq!(lhs, rhs, epsilon = 1e-12);
                assert_abs_diff_eq!(reflect_radius(lam, h).unwrap(), r, epsilon = 1e-12);
                let prod = jacobian_density(lam, r, 3).unwrap()
                    * jacobian_density(lam, h, 3).unwrap();
                assert_abs_diff_eq!(prod, 1.0, epsilon = 1e-10);
            }
        }
    }

    #[test]
    fn domain_errors() {
        assert!(reflect_radius(0.0, 1.0).is_err());
        assert!(reflect_radius(1.0, PI).is_err());
        assert!(jacobian_density(1.0, 1.0, 1).is_err());
    }

    fn beta0_profile(n: usize, m: usize, margin: f64) -> RadialProfile {
        // singular solution profile about the south pole: t = -cos r,
        // v = ((n-2)/2)^{(n-2)/2} (1 - t)^{-(n-2)/4}
        let c = ((n as f64 - 2.0) / 2.0).powf((n as f64 - 2.0) / 2.0);
        RadialProfile::from_fn_chebyshev(m, margin, PI - margin, Coordinate::GeodesicR, |r| {
            let t = -r.cos();
            c * (1.0 - t).powf(-(n as f64 - 2.0) / 4.0)
        })
        .unwrap()
    }

    #[test]
    fn kelvin_constant_at_half_pi() {
        let kp = KelvinParams::new(Pole::North, PI / 2.0, 4).unwrap();
        let v = RadialProfile::from_fn_chebyshev(64, 0.01, PI - 0.01, Coordinate::GeodesicR, |_| {
            2.5
        })
        .unwrap();
        let out = kelvin_transform_axisym(&v, &kp).unwrap();
        for val in &out.profile.values {
            assert_abs_diff_eq!(*val, 2.5, epsilon = 1e-10);
        }
    }

    #[test]
    fn kelvin_is_involution() {
        let kp = KelvinParams::new(Pole::North, PI / 3.0, 3).unwrap();
        let v = RadialProfile::from_fn_chebyshev(160, 1e-6, PI - 1e-6, Coordinate::GeodesicR, |r| {
            1.0 + 0.3 * r.cos()
        })
        .unwrap();
        let once = kelvin_transform_axisym(&v, &kp).unwrap();
        let twice = kelvin_transform_axisym(&once.profile, &kp).unwrap();
        for (a, b) in twice.profile.values.iter().zip(&v.values) {
            assert_abs_diff_eq!(*a, *b, epsilon = 1e-8);
        }
    }

    #[test]
    fn beta0_profile_fixed_by_half_pi_kelvin() {
        // the explicit singular solution is invariant under the π/2
        // reflection about the south pole; the λ = π/2 reflection maps the
        // symmetric grid span onto itself, keeping the interpolant away
        // from the singular pole
        let n = 3;
        let kp = KelvinParams::new(Pole::South, PI / 2.0, n).unwrap();
        let v = beta0_profile(n, 220, 0.15);
        let out = kelvin_transform_axisym(&v, &kp).unwrap();
        for (j, (a, b)) in out.profile.values.iter().zip(&v.values).enumerate() {
            let r = v.grid[j];
            // |J| = 1 at λ = π/2, so the transform is v(π - r)
            let c = 0.5f64.sqrt();
            let expected = c * (1.0 - r.cos()).powf(-0.25);
            assert!((a - expected).abs() < 1e-8 * expected, "r={r}: {a} vs {expected}");
            // comparison inequality on the outside region r > π/2
            if r > PI / 2.0 {
                assert!(*a <= *b + 1e-12, "r={r}: transform exceeds v");
            }
        }
    }

    #[test]
    fn s2_log_kelvin() {
        let kp = KelvinParams::new(Pole::North, PI / 2.0, 2).unwrap();
        let zero =
            RadialProfile::from_fn_chebyshev(64, 0.01, PI - 0.01, Coordinate::GeodesicR, |_| 0.0)
                .unwrap();
        let out = kelvin_transform_s2(&zero, &kp).unwrap();
        for v in &out.profile.values {
            assert_abs_diff_eq!(*v, 0.0, epsilon = 1e-12);
        }

        // λ = π/3 at r = π/2: ½ log((0.75/1.25)²) = log 0.6
        let kp = KelvinParams::new(Pole::North, PI / 3.0, 2).unwrap();
        let zero_wide =
            RadialProfile::from_fn_chebyshev(64, 1e-6, PI - 1e-6, Coordinate::GeodesicR, |_| 0.0)
                .unwrap();
        let out = kelvin_transform_s2(&zero_wide, &kp).unwrap();
        // check at the grid point closest to π/2
        let j = zero_wide
            .grid
            .iter()
            .enumerate()
            .min_by(|a, b| {
                (a.1 - PI / 2.0).abs().total_cmp(&(b.1 - PI / 2.0).abs())
            })
            .unwrap()
            .0;
        let r = zero_wide.grid[j];
        let expected = 0.5 * jacobian_density(PI / 3.0, r, 2).unwrap().ln();
        assert_abs_diff_eq!(out.profile.values[j], expected, epsilon = 1e-12);
        // value of the formula at exactly π/2
        assert_abs_diff_eq!(
            0.5 * jacobian_density(PI / 3.0, PI / 2.0, 2).unwrap().ln(),
            0.6f64.ln(),
            epsilon = 1e-14
        );

        let twice = kelvin_transform_s2(&out.profile, &kp).unwrap();
        for v in &twice.profile.values {
            assert_abs_diff_eq!(*v, 0.0, epsilon = 1e-8);
        }
    }

    #[test]
    fn stereographic_round_trip_and_bubble() {
        let n = 3;
        let u = RadialProfile::from_fn_chebyshev(80, 0.05, 20.0, Coordinate::EuclideanR, |r| {
            stereographic_xi(r, n)
        })
        .unwrap();
        let v = stereographic_transfer(&u, n).unwrap();
        for val in &v.values {
            assert_abs_diff_eq!(*val, 1.0, epsilon = 1e-12);
        }
        let back = stereographic_transfer_inverse(&v, n).unwrap();
        for (a, b) in back.values.iter().zip(&u.values) {
            assert_abs_diff_eq!(*a, *b, epsilon = 1e-12);
        }
        // r = 1 maps to the equator t = 0
        assert!(v
            .grid
            .iter()
            .zip(&u.grid)
            .all(|(&t, &r)| (t - (r * r - 1.0) / (r * r + 1.0)).abs() < 1e-15));

        // bubble u = 3^{1/4}(1+r²)^{-1/2} transfers to a constant
        let bubble =
            RadialProfile::from_fn_chebyshev(80, 0.05, 20.0, Coordinate::EuclideanR, |r| {
                3.0f64.powf(0.25) / (1.0 + r * r).sqrt()
            })
            .unwrap();
        let vb = stereographic_transfer(&bubble, n).unwrap();
        let expect = 3.0f64.powf(0.25) / 2.0f64.sqrt();
        assert_abs_diff_eq!(expect, 0.93060485910209959893, epsilon = 1e-12);
        for val in &vb.values {
            assert_abs_diff_eq!(*val, expect, epsilon = 1e-12);
        }
    }

    #[test]
    fn matukuma_g_exponent_cases() {
        // n=3, p=3: exponent zero, g independent of t
        let s = 1.7;
        for t in [-0.9, 0.0, 0.99] {
            assert_abs_diff_eq!(
                matukuma_g(t, s, 3, 3.0).unwrap(),
                s.powi(3) / 2.0,
                epsilon = 1e-14
            );
        }
        // n=3, p=1, t=0: g = s/2
        assert_abs_diff_eq!(matukuma_g(0.0, s, 3, 1.0).unwrap(), s / 2.0, epsilon = 1e-14);
        // negative exponent at t = 1 is singular
        assert!(matukuma_g(1.0, s, 3, 1.0).is_err());
    }

    #[test]
    fn meanfield_forms() {
        let mf = meanfield_substitution(0.0, 0.0);
        assert_eq!(mf.f_value, 1.0);
        assert_eq!(mf.k_at(0.3), 1.0);
        let mf = meanfield_substitution(8.0 * PI, 0.0);
        assert_abs_diff_eq!(mf.f_value, 0.0, epsilon = 1e-15);
        // K at the south pole is exp(-γ)
        let mf = meanfield_substitution(4.0 * PI, 1.0);
        assert_abs_diff_eq!(mf.k_at_south(), (-1.0f64).exp(), epsilon = 1e-15);
        assert_abs_diff_eq!(mf.k_at(-1.0), mf.k_at_south(), epsilon = 1e-15);
        assert_abs_diff_eq!(mf.f_value, 0.5, epsilon = 1e-15);
    }

    #[test]
    fn conformal_invariance_constant_and_smooth() {
        let basis = GegenbauerBasis::build(3, 64, 128).unwrap();
        let kp = KelvinParams::new(Pole::North, PI / 3.0, 3).unwrap();
        let res = conformal_invariance_residual(&|_t| 1.0, &kp, &basis, 1e-6).unwrap();
        assert!(res < 1e-9, "constant residual {res}");

        let res = conformal_invariance_residual(&|t| 1.0 + 0.1 * t, &kp, &basis, 1e-6).unwrap();
        assert!(res < 1e-8, "linear profile residual {res}");

        let kp2 = KelvinParams::new(Pole::North, PI / 2.0, 3).unwrap();
        let res = conformal_invariance_residual(&|t| 1.0 + 0.1 * t, &kp2, &basis, 1e-6).unwrap();
        assert!(res < 1e-9, "mirror case residual {res}");
    }

    #[test]
    fn conformal_invariance_decays_with_resolution() {
        let v = |t: f64| 1.0 / (1.1125 - t);
        let kp = KelvinParams::new(Pole::North, PI / 3.0, 3).unwrap();
        let b32 = GegenbauerBasis::build(3, 32, 64).unwrap();
        let b64 = GegenbauerBasis::build(3, 64, 128).unwrap();
        let r32 = conformal_invariance_residual(&v, &kp, &b32, 1e-3).unwrap();
        let r64 = conformal_invariance_residual(&v, &kp, &b64, 1e-3).unwrap();
        assert!(r64 < 1e-8, "r64 = {r64}");
        assert!(r64 <= r32, "r64 = {r64} vs r32 = {r32}");
    }

    #[test]
    fn resolution_error_reported() {
        // a profile far too rough for an 8-mode basis
        let basis = GegenbauerBasis::build(3, 8, 16).unwrap();
        let kp = KelvinParams::new(Pole::North, PI / 3.0, 3).unwrap();
        let rough = |t: f64| (30.0 * t).sin() + 2.0;
        match conformal_invariance_residual(&rough, &kp, &basis, 1e-8) {
            Err(GeometryError::ResolutionError(_)) => {}
            other => panic!("expected resolution error, got {other:?}"),
        }
    }
}
