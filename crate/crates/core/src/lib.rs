//! Numerical toolkit for semilinear elliptic problems on spheres.
//!
//! The crate has five subsystems:
//!
//! * [`spectral`] — axisymmetric functions on `S^N` in the Gegenbauer
//!   eigenbasis of the Laplace-Beltrami operator, with quadrature,
//!   synthesis/analysis and nodal-class counting.
//! * [`geometry`] — conformal reflections of `S^n`: reflection radius,
//!   Jacobian density, Kelvin transforms (power and logarithmic form),
//!   stereographic transfer and related substitutions.
//! * [`bifurcation`] — Newton solver and pseudo-arclength continuation for
//!   `-Δ w = λ((w+1)^p - w - 1)`, with branch switching at the eigenvalue
//!   crossings and nodal-class tracking.
//! * [`shooting`] — adaptive Runge-Kutta integration of the radial
//!   reductions, energy monitors and the explicit singular-solution checks.
//! * [`symmetry`] — sampling-based verification of the moving-sphere
//!   comparison inequalities and the structural conditions on the
//!   nonlinearity.

pub mod bifurcation;
pub mod geometry;
pub mod io;
pub mod shooting;
pub mod spectral;
pub mod symmetry;
