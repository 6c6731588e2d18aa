//! Shooting integration of the radial reductions.
//!
//! The Emden-Fowler substitution `w(t) = e^{-(n-2)t/2} u(e^{-t})` turns the
//! radial equation
//!
//! ```text
//! u'' + (n-1)/r u' + (n(n-2) - 4β)/(1+r²)² u + u^{(n+2)/(n-2)} = 0
//! ```
//!
//! into the asymptotically autonomous second-order equation
//!
//! ```text
//! w'' - ((n-2)/2)² w + w^{(n+2)/(n-2)} + c_β e^{-2t}/(1+e^{-2t})² w = 0
//! ```
//!
//! with `c_β = n(n-2) - 4β`, and the Hardy-term equation into the autonomous
//! `w'' + (c - (n-2)²/4) w + w^{(n+2)/(n-2)} = 0`. This module integrates
//! both families with an embedded adaptive Runge-Kutta pair, locates
//! `w = 0` crossings by bisection on re-integrated sub-steps, monitors the
//! shooting energy `h(a,b) = b² - ((n-2)/2)² a² + ((n-2)/n) a^{2n/(n-2)}`,
//! and provides the decay-bound, flux-monotonicity and explicit
//! singular-solution checks built on the same reductions.

use crate::geometry::{Coordinate, GeometryError, RadialProfile};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

/// Overflow guard: integration is abandoned once |w| or |w'| exceeds this.
pub const BLOWUP_GUARD: f64 = 1e8;

/// Hard cap on accepted steps per direction.
const MAX_STEPS: usize = 400_000;

#[derive(Debug, Error)]
pub enum ShootError {
    #[error("invalid shooting parameters: {0}")]
    BadParams(&'static str),
    #[error("step size collapsed at t = {t} (h = {h:.3e}); tolerance unattainable")]
    ToleranceFailure { t: f64, h: f64 },
    #[error("step budget exhausted at t = {0}")]
    StepBudget(f64),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

/// Which radial reduction is integrated.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Family {
    /// `w'' + (c - (n-2)²/4) w + w^{(n+2)/(n-2)} = 0` (autonomous).
    AutonomousC { c: f64 },
    /// `w'' - ((n-2)/2)² w + w^{(n+2)/(n-2)} + c_β e^{-2t}/(1+e^{-2t})² w = 0`.
    Beta { beta: f64 },
}

#[derive(Debug, Clone, Copy)]
pub struct ShootParams {
    pub n: usize,
    pub family: Family,
    /// Initial value w(0).
    pub a: f64,
    /// Initial slope w'(0).
    pub b: f64,
    /// Half-interval length: integration covers [-T, T].
    pub t_max: f64,
    pub rel_tol: f64,
    pub abs_tol: f64,
}

impl ShootParams {
    pub fn new(n: usize, family: Family, a: f64, b: f64, t_max: f64) -> Result<Self, ShootError> {
        let p = Self {
            n,
            family,
            a,
            b,
            t_max,
            rel_tol: 1e-10,
            abs_tol: 1e-12,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn with_tol(mut self, rel: f64, abs: f64) -> Result<Self, ShootError> {
        self.rel_tol = rel;
        self.abs_tol = abs;
        self.validate()?;
        Ok(self)
    }

    fn validate(&self) -> Result<(), ShootError> {
        if self.n < 3 {
            return Err(ShootError::BadParams("dimension n must be at least 3"));
        }
        if !(self.a > 0.0) || !self.a.is_finite() || !self.b.is_finite() {
            return Err(ShootError::BadParams("need a > 0 and finite (a, b)"));
        }
        if !(self.t_max > 0.0) || !self.t_max.is_finite() {
            return Err(ShootError::BadParams("need T > 0"));
        }
        if !(self.rel_tol > 0.0) || !(self.abs_tol > 0.0) {
            return Err(ShootError::BadParams("tolerances must be positive"));
        }
        match self.family {
            Family::AutonomousC { c } | Family::Beta { beta: c } if !c.is_finite() => {
                Err(ShootError::BadParams("family coefficient must be finite"))
            }
            _ => Ok(()),
        }
    }

    /// `c_β = n(n-2) - 4β` for the beta family.
    pub fn c_beta(&self) -> Option<f64> {
        match self.family {
            Family::Beta { beta } => Some((self.n * (self.n - 2)) as f64 - 4.0 * beta),
            Family::AutonomousC { .. } => None,
        }
    }

    /// Critical exponent `(n+2)/(n-2)`.
    pub fn exponent(&self) -> f64 {
        (self.n as f64 + 2.0) / (self.n as f64 - 2.0)
    }

    /// Acceleration w'' as a function of (t, w).
    fn accel(&self, t: f64, w: f64) -> f64 {
        let half = (self.n as f64 - 2.0) / 2.0;
        let q = self.exponent();
        // odd extension of the power keeps the field smooth through w = 0;
        // the domain of interest (integration halts at crossings) is w > 0
        let pw = w.signum() * w.abs().powf(q);
        match self.family {
            Family::AutonomousC { c } => (half * half - c) * w - pw,
            Family::Beta { .. } => {
                let cb = self.c_beta().unwrap();
                // e^{-2t}/(1+e^{-2t})² = 1/(2 cosh t)², overflow-free form
                let sigma = 0.25 / (t.cosh() * t.cosh());
                half * half * w - pw - cb * sigma * w
            }
        }
    }
}

/// Shooting energy `h(a, b) = b² - ((n-2)/2)² a² + ((n-2)/n) a^{2n/(n-2)}`.
pub fn energy_h(a: f64, b: f64, n: usize) -> f64 {
    let half = (n as f64 - 2.0) / 2.0;
    let exp = 2.0 * n as f64 / (n as f64 - 2.0);
    b * b - half * half * a * a + (n as f64 - 2.0) / n as f64 * a.abs().powf(exp)
}

/// Conserved energy of the autonomous family,
/// `H = ½w'² - ½((n-2)²/4 - c)w² + ((n-2)/(2n)) w^{2n/(n-2)}`; note `h = 2H`
/// when `c = 0`.
pub fn hamiltonian(w: f64, wp: f64, n: usize, c: f64) -> f64 {
    let half = (n as f64 - 2.0) / 2.0;
    let exp = 2.0 * n as f64 / (n as f64 - 2.0);
    0.5 * wp * wp - 0.5 * (half * half - c) * w * w
        + (n as f64 - 2.0) / (2.0 * n as f64) * w.abs().powf(exp)
}

/// Outcome of the sufficient condition `h(a,b) + ¼ c_β a² < 0` for global
/// positivity of the beta-family trajectory through (a, b).
#[derive(Debug, Clone, Copy)]
pub struct ShootingCondition {
    pub value: f64,
    pub holds: bool,
}

pub fn check_shooting_condition(a: f64, b: f64, n: usize, beta: f64) -> ShootingCondition {
    let c_beta = (n * (n - 2)) as f64 - 4.0 * beta;
    let value = energy_h(a, b, n) + 0.25 * c_beta * a * a;
    ShootingCondition {
        value,
        holds: value < 0.0,
    }
}

/// One accepted integration sample.
#[derive(Debug, Clone, Copy)]
pub struct Sample {
    pub t: f64,
    pub w: f64,
    pub wp: f64,
}

/// A located `w = 0` crossing: the bracketing accepted step and the refined
/// event time/value.
#[derive(Debug, Clone, Copy)]
pub struct ZeroEvent {
    pub t: f64,
    pub bracket: (f64, f64),
    pub w_at_event: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TrajectoryStatus {
    PositiveOnInterval,
    HitZeroForward,
    HitZeroBackward,
    HitZeroBoth,
    Blowup,
}

#[derive(Debug, Clone)]
pub struct Trajectory {
    /// Samples sorted by strictly increasing t, covering the largest
    /// integrated interval around 0.
    pub samples: Vec<Sample>,
    /// `w = 0` crossings, at most one per direction.
    pub events: Vec<ZeroEvent>,
    /// Shooting energy h(w, w') at each sample (exact formula, not
    /// integrated).
    pub energy_series: Vec<f64>,
    /// Times and w-values of interior zeros of w' (turning points), sorted
    /// by t, used for the return-map periodicity check.
    pub turning_points: Vec<(f64, f64)>,
    pub status: TrajectoryStatus,
}

impl Trajectory {
    pub fn sup_w(&self) -> f64 {
        self.samples.iter().fold(f64::MIN, |m, s| m.max(s.w))
    }

    pub fn min_w(&self) -> f64 {
        self.samples.iter().fold(f64::MAX, |m, s| m.min(s.w))
    }

    pub fn is_positive(&self) -> bool {
        self.status == TrajectoryStatus::PositiveOnInterval
    }

    /// Trajectory as a w-profile over the Emden-Fowler time grid.
    pub fn to_profile(&self) -> Result<RadialProfile, GeometryError> {
        let grid = self.samples.iter().map(|s| s.t).collect();
        let values = self.samples.iter().map(|s| s.w).collect();
        RadialProfile::new(grid, values, Coordinate::LogRadius)
    }
}

// Dormand-Prince 5(4) embedded pair.
const DP_C: [f64; 7] = [0.0, 0.2, 0.3, 0.8, 8.0 / 9.0, 1.0, 1.0];
const DP_A: [[f64; 6]; 7] = [
    [0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [0.2, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];
const DP_ERR: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

type State = [f64; 2];

fn deriv(params: &ShootParams, t: f64, y: State) -> State {
    [y[1], params.accel(t, y[0])]
}

/// One embedded step from (t, y) with step h; returns (y_new, error_estimate).
fn dp_step(params: &ShootParams, t: f64, y: State, h: f64) -> (State, State) {
    let mut k = [[0.0f64; 2]; 7];
    k[0] = deriv(params, t, y);
    for s in 1..7 {
        let mut ys = y;
        for (j, kj) in k.iter().enumerate().take(s) {
            ys[0] += h * DP_A[s][j] * kj[0];
            ys[1] += h * DP_A[s][j] * kj[1];
        }
        k[s] = deriv(params, t + DP_C[s] * h, ys);
    }
    // the 7th stage row of DP_A is the 5th-order solution weights
    let mut y_new = y;
    for (j, kj) in k.iter().enumerate().take(6) {
        y_new[0] += h * DP_A[6][j] * kj[0];
        y_new[1] += h * DP_A[6][j] * kj[1];
    }
    let mut err = [0.0f64; 2];
    for (j, kj) in k.iter().enumerate() {
        err[0] += h * DP_ERR[j] * kj[0];
        err[1] += h * DP_ERR[j] * kj[1];
    }
    (y_new, err)
}

fn error_norm(y: State, y_new: State, err: State, rel: f64, abs: f64) -> f64 {
    let mut acc = 0.0;
    for i in 0..2 {
        let scale = abs + rel * y[i].abs().max(y_new[i].abs());
        let e = err[i] / scale;
        acc += e * e;
    }
    (acc / 2.0).sqrt()
}

/// Re-integrates from (t0, y0) to t1 with fixed sub-steps; used by the
/// event bisection so located events sit on the true trajectory rather
/// than on an interpolant.
fn advance_fixed(params: &ShootParams, t0: f64, y0: State, t1: f64) -> State {
    const SUBSTEPS: usize = 8;
    let h = (t1 - t0) / SUBSTEPS as f64;
    let mut y = y0;
    let mut t = t0;
    for _ in 0..SUBSTEPS {
        let (y_new, _) = dp_step(params, t, y, h);
        y = y_new;
        t += h;
    }
    y
}

struct DirectionRun {
    samples: Vec<Sample>,
    event: Option<ZeroEvent>,
    turning_points: Vec<(f64, f64)>,
    blowup: bool,
}

/// Locates the w = 0 crossing inside the accepted step [t0, t1] to 1e-12
/// in t by bisection on re-integrated sub-steps.
fn locate_zero(params: &ShootParams, t0: f64, y0: State, t1: f64) -> ZeroEvent {
    let bracket = (t0.min(t1), t0.max(t1));
    let mut lo = t0;
    let mut hi = t1;
    let mut y_event = advance_fixed(params, t0, y0, hi);
    for _ in 0..80 {
        if (hi - lo).abs() < 1e-13 {
            break;
        }
        let mid = 0.5 * (lo + hi);
        let y_mid = advance_fixed(params, t0, y0, mid);
        if y_mid[0] > 0.0 {
            lo = mid;
        } else {
            hi = mid;
            y_event = y_mid;
        }
    }
    ZeroEvent {
        t: 0.5 * (lo + hi),
        bracket,
        w_at_event: y_event[0],
    }
}

/// Locates an interior zero of w' inside [t0, t1] the same way.
fn locate_turning(params: &ShootParams, t0: f64, y0: State, t1: f64, sign0: f64) -> (f64, f64) {
    let mut lo = t0;
    let mut hi = t1;
    let mut w_at = y0[0];
    for _ in 0..80 {
        if (hi - lo).abs() < 1e-13 {
            break;
        }
        let mid = 0.5 * (lo + hi);
        let y_mid = advance_fixed(params, t0, y0, mid);
        if y_mid[1] * sign0 > 0.0 {
            lo = mid;
        } else {
            hi = mid;
            w_at = y_mid[0];
        }
    }
    (0.5 * (lo + hi), w_at)
}

fn integrate_direction(params: &ShootParams, dir: f64) -> Result<DirectionRun, ShootError> {
    let mut t = 0.0f64;
    let mut y: State = [params.a, params.b];
    let mut h = dir * 1e-3;
    let mut samples = vec![Sample {
        t,
        w: y[0],
        wp: y[1],
    }];
    let mut turning_points = Vec::new();
    let mut steps = 0usize;
    loop {
        if (t * dir - params.t_max).abs() < 1e-14 || t * dir >= params.t_max {
            return Ok(DirectionRun {
                samples,
                event: None,
                turning_points,
                blowup: false,
            });
        }
        steps += 1;
        if steps > MAX_STEPS {
            return Err(ShootError::StepBudget(t));
        }
        // do not overshoot the interval end; keep steps bounded so the
        // sample grid resolves the non-autonomous coefficient
        if (t + h) * dir > params.t_max {
            h = dir * params.t_max - t;
        }
        if h.abs() > 0.25 {
            h = 0.25 * dir;
        }
        let (y_new, err) = dp_step(params, t, y, h);
        let en = error_norm(y, y_new, err, params.rel_tol, params.abs_tol);
        if !en.is_finite() || en > 1.0 {
            let shrink = if en.is_finite() {
                (0.9 * en.powf(-0.2)).clamp(0.1, 0.9)
            } else {
                0.1
            };
            h *= shrink;
            if h.abs() < 1e-13 {
                return Err(ShootError::ToleranceFailure { t, h });
            }
            continue;
        }
        let t_new = t + h;
        if y[1] * y_new[1] < 0.0 {
            turning_points.push(locate_turning(params, t, y, t_new, y[1].signum()));
        }
        if y[0] > 0.0 && y_new[0] <= 0.0 {
            let event = locate_zero(params, t, y, t_new);
            let y_event = advance_fixed(params, t, y, event.t);
            samples.push(Sample {
                t: event.t,
                w: y_event[0],
                wp: y_event[1],
            });
            return Ok(DirectionRun {
                samples,
                event: Some(event),
                turning_points,
                blowup: false,
            });
        }
        t = t_new;
        y = y_new;
        samples.push(Sample {
            t,
            w: y[0],
            wp: y[1],
        });
        if y[0].abs() > BLOWUP_GUARD || y[1].abs() > BLOWUP_GUARD {
            return Ok(DirectionRun {
                samples,
                event: None,
                turning_points,
                blowup: true,
            });
        }
        h *= (0.9 * en.max(1e-10).powf(-0.2)).clamp(0.2, 5.0);
    }
}

/// Integrates the chosen family forward to T and backward to -T, halting
/// each direction at its first `w = 0` crossing (located to 1e-12 in t) or
/// at the overflow guard.
pub fn integrate(params: &ShootParams) -> Result<Trajectory, ShootError> {
    params.validate()?;
    let fwd = integrate_direction(params, 1.0)?;
    let bwd = integrate_direction(params, -1.0)?;

    let mut samples: Vec<Sample> = bwd.samples.iter().skip(1).rev().copied().collect();
    samples.extend(fwd.samples.iter().copied());
    let mut events = Vec::new();
    if let Some(e) = bwd.event {
        events.push(e);
    }
    if let Some(e) = fwd.event {
        events.push(e);
    }
    let mut turning_points: Vec<(f64, f64)> = bwd
        .turning_points
        .iter()
        .rev()
        .chain(fwd.turning_points.iter())
        .copied()
        .collect();
    turning_points.sort_by(|a, b| a.0.total_cmp(&b.0));

    let energy_series = samples
        .iter()
        .map(|s| energy_h(s.w, s.wp, params.n))
        .collect();
    let status = if fwd.blowup || bwd.blowup {
        TrajectoryStatus::Blowup
    } else {
        match (bwd.event.is_some(), fwd.event.is_some()) {
            (true, true) => TrajectoryStatus::HitZeroBoth,
            (false, true) => TrajectoryStatus::HitZeroForward,
            (true, false) => TrajectoryStatus::HitZeroBackward,
            (false, false) => TrajectoryStatus::PositiveOnInterval,
        }
    };
    Ok(Trajectory {
        samples,
        events,
        energy_series,
        turning_points,
        status,
    })
}

/// Maximal violation of the energy estimate along the forward half of the
/// trajectory: for the beta family, `max_{t≥0} h(t) - (h(a,b) + ¼c_β a²)`;
/// for the autonomous family (where the non-autonomous term is absent) the
/// monitor degenerates to the conservation drift `max |H(t) - H(0)|`.
pub fn energy_estimate_monitor(traj: &Trajectory, params: &ShootParams) -> f64 {
    match params.family {
        Family::Beta { .. } => {
            let bound =
                energy_h(params.a, params.b, params.n) + 0.25 * params.c_beta().unwrap() * params.a * params.a;
            traj.samples
                .iter()
                .zip(traj.energy_series.iter())
                .filter(|(s, _)| s.t >= 0.0)
                .map(|(_, h)| h - bound)
                .fold(f64::MIN, f64::max)
        }
        Family::AutonomousC { c } => {
            let h0 = hamiltonian(params.a, params.b, params.n, c);
            traj.samples
                .iter()
                .map(|s| (hamiltonian(s.w, s.wp, params.n, c) - h0).abs())
                .fold(0.0, f64::max)
        }
    }
}

/// Phase-plane regime of the autonomous family.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AutonomousRegime {
    /// `c ≥ (n-2)²/4`: w'' ≤ -w^{(n+2)/(n-2)} < 0, no global positive
    /// solution (a positive strictly concave function on the line cannot
    /// exist).
    Nonexistence,
    /// `c < (n-2)²/4`: center at `w* = ((n-2)²/4 - c)^{(n-2)/4}` surrounded
    /// by periodic orbits inside the homoclinic level set.
    Oscillatory { equilibrium: f64 },
}

pub fn classify_autonomous(n: usize, c: f64) -> AutonomousRegime {
    let mu = ((n as f64 - 2.0) / 2.0).powi(2) - c;
    if mu <= 0.0 {
        AutonomousRegime::Nonexistence
    } else {
        AutonomousRegime::Oscillatory {
            equilibrium: mu.powf((n as f64 - 2.0) / 4.0),
        }
    }
}

/// Result of the return-map periodicity check.
#[derive(Debug, Clone, Copy)]
pub struct PeriodCheck {
    pub period: f64,
    /// |w(period) - w(0)| at the matching turning point.
    pub mismatch: f64,
}

/// Return-map periodicity check for trajectories launched from the section
/// w' = 0 (b = 0): the second interior turning point closes the orbit, so
/// its time is the period and its w-value must return to `a`.
pub fn detect_period(traj: &Trajectory, a: f64) -> Option<PeriodCheck> {
    let mut forward = traj
        .turning_points
        .iter()
        .filter(|(t, _)| *t > 1e-9)
        .take(2);
    let _half = forward.next()?;
    let (t_full, w_full) = forward.next()?;
    Some(PeriodCheck {
        period: *t_full,
        mismatch: (w_full - a).abs(),
    })
}

/// Decay-bound comparison against `C* = (n(n-2)/2)^{(n-2)/4}`: positive
/// trajectories of the autonomous family with c > 0 satisfy
/// `u(r) ≤ C* r^{-(n-2)/2}`, i.e. `sup w ≤ C*`.
#[derive(Debug, Clone, Copy)]
pub struct DecayBound {
    pub c_star: f64,
    pub max_w: f64,
    pub ok: bool,
}

pub fn c_star(n: usize) -> f64 {
    ((n * (n - 2)) as f64 / 2.0).powf((n as f64 - 2.0) / 4.0)
}

pub fn decay_bound_check(max_w: f64, n: usize) -> DecayBound {
    let c_star = c_star(n);
    DecayBound {
        c_star,
        max_w,
        ok: max_w <= c_star,
    }
}

pub fn decay_bound_check_trajectory(traj: &Trajectory, n: usize) -> DecayBound {
    decay_bound_check(traj.sup_w(), n)
}

/// Sweep over periodic orbits of the oscillatory autonomous regime,
/// launched from turning points `(a, 0)` approaching the homoclinic level
/// set from inside.
#[derive(Debug, Clone)]
pub struct OrbitSweep {
    /// Level-set maximum `(n((n-2)²/4 - c)/(n-2))^{(n-2)/4}` that the
    /// orbit suprema approach.
    pub level_set_max: f64,
    /// Largest w observed over all sampled orbits.
    pub sup_w: f64,
    /// (a, sup over the orbit, period mismatch when a return closed).
    pub orbits: Vec<(f64, f64, Option<f64>)>,
}

pub fn periodic_orbit_sweep(
    n: usize,
    c: f64,
    n_orbits: usize,
    t_max: f64,
) -> Result<OrbitSweep, ShootError> {
    let mu = ((n as f64 - 2.0) / 2.0).powi(2) - c;
    if mu <= 0.0 {
        return Err(ShootError::BadParams("oscillatory regime needs c < (n-2)²/4"));
    }
    if n_orbits < 2 {
        return Err(ShootError::BadParams("need at least two orbits"));
    }
    let level_set_max = (n as f64 * mu / (n as f64 - 2.0)).powf((n as f64 - 2.0) / 4.0);
    let mut sup_w = f64::MIN;
    let mut orbits = Vec::with_capacity(n_orbits);
    for i in 0..n_orbits {
        // geometric approach to the separatrix turning point from inside
        let delta = 0.5 * (1e-7f64 / 0.5).powf(i as f64 / (n_orbits - 1) as f64);
        let a = level_set_max * (1.0 - delta);
        let params = ShootParams::new(n, Family::AutonomousC { c }, a, 0.0, t_max)?;
        let traj = integrate(&params)?;
        if traj.status != TrajectoryStatus::PositiveOnInterval {
            return Err(ShootError::BadParams(
                "orbit inside the homoclinic level set lost positivity",
            ));
        }
        let orbit_sup = traj.sup_w();
        sup_w = sup_w.max(orbit_sup);
        let mismatch = detect_period(&traj, a).map(|p| p.mismatch);
        orbits.push((a, orbit_sup, mismatch));
    }
    Ok(OrbitSweep {
        level_set_max,
        sup_w,
        orbits,
    })
}

/// Emden-Fowler substitution of a Euclidean radial profile:
/// `w(t) = r^{(n-2)/2} u(r)` on the grid `t = -log r`.
pub fn emden_fowler_transform(u: &RadialProfile, n: usize) -> Result<RadialProfile, ShootError> {
    if u.coordinate != Coordinate::EuclideanR {
        return Err(ShootError::BadParams("expected a Euclidean radial profile"));
    }
    if u.grid[0] <= 0.0 {
        return Err(GeometryError::BadGrid.into());
    }
    let m = u.grid.len();
    let half = (n as f64 - 2.0) / 2.0;
    let mut grid = Vec::with_capacity(m);
    let mut values = Vec::with_capacity(m);
    for j in (0..m).rev() {
        let r = u.grid[j];
        grid.push(-r.ln());
        values.push(r.powf(half) * u.values[j]);
    }
    Ok(RadialProfile::new(grid, values, Coordinate::LogRadius)?)
}

/// Inverse substitution: `u(r) = r^{-(n-2)/2} w(-log r)` on `r = e^{-t}`.
pub fn emden_fowler_inverse(w: &RadialProfile, n: usize) -> Result<RadialProfile, ShootError> {
    if w.coordinate != Coordinate::LogRadius {
        return Err(ShootError::BadParams("expected a log-radius profile"));
    }
    let m = w.grid.len();
    let half = (n as f64 - 2.0) / 2.0;
    let mut grid = Vec::with_capacity(m);
    let mut values = Vec::with_capacity(m);
    for j in (0..m).rev() {
        let r = (-w.grid[j]).exp();
        grid.push(r);
        values.push(r.powf(-half) * w.values[j]);
    }
    Ok(RadialProfile::new(grid, values, Coordinate::EuclideanR)?)
}

/// Residual of the explicit singular solution
/// `u(r) = ((n-2)/2)^{(n-2)/2} (1+r²)^{-(n-2)/4}` in the radial equation
/// with `β = β₀ = (n-2)(3n-2)/16`, evaluated with analytic derivatives on a
/// Chebyshev grid over r ∈ [0.1, 10].
pub fn singular_solution_residual(n: usize) -> Result<RadialProfile, ShootError> {
    if n < 3 {
        return Err(ShootError::BadParams("dimension n must be at least 3"));
    }
    let nf = n as f64;
    let beta0 = (nf - 2.0) * (3.0 * nf - 2.0) / 16.0;
    let c_beta = nf * (nf - 2.0) - 4.0 * beta0;
    let m_exp = (nf - 2.0) / 4.0;
    let amp = ((nf - 2.0) / 2.0).powf((nf - 2.0) / 2.0);
    let q = (nf + 2.0) / (nf - 2.0);
    Ok(RadialProfile::from_fn_chebyshev(
        201,
        0.1,
        10.0,
        Coordinate::EuclideanR,
        |r| {
            let s = 1.0 + r * r;
            let u = amp * s.powf(-m_exp);
            let up = -2.0 * m_exp * r * amp * s.powf(-m_exp - 1.0);
            let upp = amp
                * (-2.0 * m_exp * s.powf(-m_exp - 1.0)
                    + 4.0 * m_exp * (m_exp + 1.0) * r * r * s.powf(-m_exp - 2.0));
            upp + (nf - 1.0) / r * up + c_beta / (s * s) * u + u.powf(q)
        },
    )?)
}

/// The substitution `φ(r) = (1+r²)^{(n-2)/2} u(r)` and its flux
/// `r^{n-1} (1+r²)^{2-n} φ'(r)`, whose strict decrease in r (for β ≤ 0,
/// wherever φ > 0) the nonexistence argument uses.
#[derive(Debug, Clone)]
pub struct PhiSubstitution {
    pub phi: RadialProfile,
    /// Flux on the interior grid nodes (the derivative stencil needs
    /// neighbours on both sides).
    pub flux: RadialProfile,
}

pub fn phi_substitution(u: &RadialProfile, n: usize) -> Result<PhiSubstitution, ShootError> {
    if u.coordinate != Coordinate::EuclideanR {
        return Err(ShootError::BadParams("expected a Euclidean radial profile"));
    }
    if !u.is_positive() {
        return Err(GeometryError::NonPositiveValues.into());
    }
    let half = (n as f64 - 2.0) / 2.0;
    let phi_vals: Vec<f64> = u
        .grid
        .iter()
        .zip(u.values.iter())
        .map(|(&r, &v)| (1.0 + r * r).powf(half) * v)
        .collect();
    let phi = RadialProfile::new(u.grid.clone(), phi_vals, Coordinate::EuclideanR)?;

    let m = u.grid.len();
    if m < 4 {
        return Err(ShootError::BadParams("profile too short for the flux stencil"));
    }
    let mut flux_grid = Vec::with_capacity(m - 2);
    let mut flux_vals = Vec::with_capacity(m - 2);
    for j in 1..m - 1 {
        let r = u.grid[j];
        let edge = (r - u.grid[0]).min(u.grid[m - 1] - r);
        let h = 1e-4f64.min(0.5 * edge);
        // Richardson-extrapolated central difference of the interpolant
        let d = |hh: f64| -> Result<f64, GeometryError> {
            Ok((phi.interpolate(r + hh)? - phi.interpolate(r - hh)?) / (2.0 * hh))
        };
        let d1 = d(h)?;
        let d2 = d(0.5 * h)?;
        let phi_prime = (4.0 * d2 - d1) / 3.0;
        flux_grid.push(r);
        flux_vals.push(r.powi(n as i32 - 1) * (1.0 + r * r).powi(2 - n as i32) * phi_prime);
    }
    let flux = RadialProfile::new(flux_grid, flux_vals, Coordinate::EuclideanR)?;
    Ok(PhiSubstitution { phi, flux })
}

/// Flux `r^{n-1}(1+r²)^{2-n} φ'` along a trajectory, computed exactly from
/// (w, w') by the chain rule in the overflow-free form
/// `-(n-2) sinh t (2cosh t)^{-n/2} w - (2cosh t)^{-(n-2)/2} w'`.
pub fn flux_at_sample(s: &Sample, n: usize) -> f64 {
    let nf = n as f64;
    let ch = 2.0 * s.t.cosh();
    -(nf - 2.0) * s.t.sinh() * ch.powf(-nf / 2.0) * s.w - ch.powf(-(nf - 2.0) / 2.0) * s.wp
}

/// Largest violation of flux monotonicity along the trajectory: the flux
/// must decrease in r, i.e. increase in t, on every segment where w > 0.
/// Returns the maximal drop between consecutive positive samples, scaled by
/// the flux magnitude (≤ 0 means strictly monotone).
pub fn flux_monotonicity_violation(traj: &Trajectory, n: usize) -> f64 {
    let mut scale = 0.0f64;
    let mut worst = f64::MIN;
    for pair in traj.samples.windows(2) {
        if pair[0].w > 0.0 && pair[1].w > 0.0 {
            let f0 = flux_at_sample(&pair[0], n);
            let f1 = flux_at_sample(&pair[1], n);
            scale = scale.max(f0.abs()).max(f1.abs());
            worst = worst.max(f0 - f1);
        }
    }
    if scale == 0.0 {
        return 0.0;
    }
    worst / scale
}

/// Outcome of one sweep start.
#[derive(Debug, Clone, Copy)]
pub struct SweepOutcome {
    pub a: f64,
    pub b: f64,
    pub crossed_forward: bool,
    pub crossed_backward: bool,
    pub blowup: bool,
    /// Scaled flux-monotonicity violation (beta family only).
    pub flux_violation: Option<f64>,
}

impl SweepOutcome {
    pub fn lost_positivity(&self) -> bool {
        self.crossed_forward || self.crossed_backward || self.blowup
    }
}

/// Sweep summary over the jittered 20×20 grid of starts.
#[derive(Debug, Clone)]
pub struct SweepSummary {
    pub outcomes: Vec<SweepOutcome>,
    /// Every start crossed w = 0 in both directions.
    pub all_crossed_both: bool,
    /// Every start lost positivity in finite time on at least one side.
    pub all_lost_positivity: bool,
    /// Largest scaled flux-monotonicity violation over all starts
    /// (beta family only).
    pub max_flux_violation: Option<f64>,
}

/// Nonexistence sweep: integrates a fixed 20×20 grid of starts
/// (a, b) ∈ (0, 3] × [-3, 3] with seeded jitter and records positivity
/// failures; for the beta family the flux monotonicity is checked on every
/// positive segment. This is a desk-scale corroboration, not a proof.
pub fn nonexistence_sweep(
    n: usize,
    family: Family,
    t_max: f64,
    seed: u64,
) -> Result<SweepSummary, ShootError> {
    const GRID: usize = 20;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let check_flux = matches!(family, Family::Beta { beta } if beta <= 0.0);
    let mut outcomes = Vec::with_capacity(GRID * GRID);
    let mut all_both = true;
    let mut all_lost = true;
    let mut max_flux: Option<f64> = None;
    let da = 3.0 / GRID as f64;
    let db = 6.0 / (GRID as f64 - 1.0);
    for i in 0..GRID {
        for j in 0..GRID {
            let jitter_a: f64 = rng.gen_range(-0.3..0.3) * da;
            let jitter_b: f64 = rng.gen_range(-0.3..0.3) * db;
            let a = ((i as f64 + 1.0) * da + jitter_a).clamp(0.05, 3.0);
            let b = (-3.0 + j as f64 * db + jitter_b).clamp(-3.0, 3.0);
            let params =
                ShootParams::new(n, family, a, b, t_max)?.with_tol(1e-9, 1e-11)?;
            let traj = integrate(&params)?;
            let flux_violation = if check_flux {
                let v = flux_monotonicity_violation(&traj, n);
                max_flux = Some(max_flux.map_or(v, |m: f64| m.max(v)));
                Some(v)
            } else {
                None
            };
            let outcome = SweepOutcome {
                a,
                b,
                crossed_forward: matches!(
                    traj.status,
                    TrajectoryStatus::HitZeroForward | TrajectoryStatus::HitZeroBoth
                ),
                crossed_backward: matches!(
                    traj.status,
                    TrajectoryStatus::HitZeroBackward | TrajectoryStatus::HitZeroBoth
                ),
                blowup: traj.status == TrajectoryStatus::Blowup,
                flux_violation,
            };
            all_both &= outcome.crossed_forward && outcome.crossed_backward;
            all_lost &= outcome.lost_positivity();
            outcomes.push(outcome);
        }
    }
    Ok(SweepSummary {
        outcomes,
        all_crossed_both: all_both,
        all_lost_positivity: all_lost,
        max_flux_violation: max_flux,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn homoclinic_start() -> f64 {
        3f64.powf(0.25) / 2f64.sqrt()
    }

    #[test]
    fn energy_h_examples() {
        assert_abs_diff_eq!(energy_h(0.8, 0.0, 4), -0.4352, epsilon = 1e-15);
        assert_abs_diff_eq!(energy_h(1e-12, 0.0, 5), 0.0, epsilon = 1e-20);
        assert_abs_diff_eq!(energy_h(homoclinic_start(), 0.0, 3), 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(
            hamiltonian(homoclinic_start(), 0.0, 3, 0.0),
            0.0,
            epsilon = 1e-15
        );
    }

    #[test]
    fn shooting_condition_examples() {
        let c = check_shooting_condition(0.8, 0.0, 4, 1.5);
        assert_abs_diff_eq!(c.value, -0.1152, epsilon = 1e-12);
        assert!(c.holds);
        let boundary = check_shooting_condition(1.0, 0.0, 4, 1.5);
        assert_abs_diff_eq!(boundary.value, 0.0, epsilon = 1e-15);
        assert!(!boundary.holds);
        assert!(!check_shooting_condition(0.8, 10.0, 4, 1.5).holds);
    }

    #[test]
    fn homoclinic_trajectory_matches_closed_form() {
        let a = homoclinic_start();
        let params = ShootParams::new(3, Family::AutonomousC { c: 0.0 }, a, 0.0, 15.0).unwrap();
        let traj = integrate(&params).unwrap();
        assert_eq!(traj.status, TrajectoryStatus::PositiveOnInterval);
        let mut max_dev = 0.0f64;
        let mut max_ham = 0.0f64;
        for s in &traj.samples {
            let exact = 3f64.powf(0.25) / (2.0 * s.t.cosh()).sqrt();
            max_dev = max_dev.max((s.w - exact).abs());
            max_ham = max_ham.max(hamiltonian(s.w, s.wp, 3, 0.0).abs());
            assert!(s.w > 0.0);
        }
        assert!(max_dev < 1e-8, "closed-form deviation {max_dev:.3e}");
        assert!(max_ham < 1e-8, "Hamiltonian drift {max_ham:.3e}");
        let ends: Vec<f64> = [traj.samples.first(), traj.samples.last()]
            .iter()
            .map(|s| s.unwrap().w)
            .collect();
        assert!(ends.iter().all(|&w| w < 1e-3), "ends {ends:?}");
    }

    #[test]
    fn hardy_threshold_crosses_both_directions() {
        for (a, b) in [(0.5, 0.0), (1.0, 0.5), (2.0, -1.0)] {
            let params = ShootParams::new(3, Family::AutonomousC { c: 0.25 }, a, b, 200.0).unwrap();
            let traj = integrate(&params).unwrap();
            assert_eq!(traj.status, TrajectoryStatus::HitZeroBoth, "start ({a}, {b})");
            for e in &traj.events {
                assert!(e.w_at_event.abs() < 1e-10, "event w {:.3e}", e.w_at_event);
                assert!(e.bracket.0 <= e.t && e.t <= e.bracket.1);
            }
        }
    }

    #[test]
    fn beta_family_global_positive_instance() {
        let params = ShootParams::new(4, Family::Beta { beta: 1.5 }, 0.8, 0.0, 30.0).unwrap();
        let traj = integrate(&params).unwrap();
        assert_eq!(traj.status, TrajectoryStatus::PositiveOnInterval);
        assert!(traj.sup_w() < 10.0);
        let violation = energy_estimate_monitor(&traj, &params);
        assert!(violation < 1e-8, "estimate violation {violation:.3e}");
    }

    #[test]
    fn loose_tolerance_degrades_energy_monitor() {
        // the autonomous family conserves H, so the monitor measures the
        // integrator's drift directly
        let tight =
            ShootParams::new(3, Family::AutonomousC { c: 0.1 }, 0.5, 0.0, 30.0).unwrap();
        let loose = tight.with_tol(1e-3, 1e-5).unwrap();
        let v_tight = energy_estimate_monitor(&integrate(&tight).unwrap(), &tight);
        let v_loose = energy_estimate_monitor(&integrate(&loose).unwrap(), &loose);
        assert!(v_loose > v_tight.max(1e-10), "loose {v_loose:.3e} tight {v_tight:.3e}");
    }

    #[test]
    fn autonomous_classification() {
        match classify_autonomous(3, 0.0) {
            AutonomousRegime::Oscillatory { equilibrium } => {
                assert_abs_diff_eq!(equilibrium, 2f64.powf(-0.5), epsilon = 1e-15);
            }
            _ => panic!("expected oscillatory"),
        }
        assert_eq!(classify_autonomous(3, 0.25), AutonomousRegime::Nonexistence);
        match classify_autonomous(4, 0.9) {
            AutonomousRegime::Oscillatory { equilibrium } => {
                assert_abs_diff_eq!(equilibrium, 0.1f64.sqrt(), epsilon = 1e-15);
            }
            _ => panic!("expected oscillatory"),
        }
    }

    #[test]
    fn time_reversal_symmetry() {
        let fwd = ShootParams::new(3, Family::AutonomousC { c: 0.25 }, 1.0, 0.7, 50.0).unwrap();
        let rev = ShootParams::new(3, Family::AutonomousC { c: 0.25 }, 1.0, -0.7, 50.0).unwrap();
        let tf = integrate(&fwd).unwrap();
        let tr = integrate(&rev).unwrap();
        // forward crossing of (a, b) mirrors the backward crossing of (a, -b)
        let ef = tf.events.last().unwrap();
        let er = tr.events.first().unwrap();
        assert_abs_diff_eq!(ef.t, -er.t, epsilon = 1e-9);
    }

    #[test]
    fn periodic_orbit_return_map() {
        let params = ShootParams::new(3, Family::AutonomousC { c: 0.1 }, 0.5, 0.0, 60.0).unwrap();
        let traj = integrate(&params).unwrap();
        assert!(traj.is_positive());
        let check = detect_period(&traj, 0.5).expect("orbit returned");
        assert!(check.mismatch < 1e-8, "mismatch {:.3e}", check.mismatch);
        assert!(check.period > 1.0);
    }

    #[test]
    fn decay_bound_and_orbit_sweep() {
        let n3 = c_star(3);
        assert_abs_diff_eq!(n3, 1.5f64.powf(0.25), epsilon = 1e-15);
        assert!(!decay_bound_check(n3 + 0.1, 3).ok);

        let sweep = periodic_orbit_sweep(3, 0.1, 10, 150.0).unwrap();
        assert_abs_diff_eq!(sweep.level_set_max, 0.45f64.powf(0.25), epsilon = 1e-15);
        assert!(
            (sweep.sup_w - sweep.level_set_max).abs() < 1e-6,
            "sup {} vs {}",
            sweep.sup_w,
            sweep.level_set_max
        );
        assert!(sweep.sup_w < c_star(3));
        // the comfortably interior orbits close their return maps tightly
        assert!(sweep.orbits[0].2.unwrap() < 1e-8);
    }

    #[test]
    fn emden_fowler_roundtrip_and_exact_forms() {
        // u = r^{-(n-2)/2} maps to w ≡ 1
        let u = RadialProfile::from_fn_chebyshev(64, 0.2, 5.0, Coordinate::EuclideanR, |r| {
            r.powf(-0.5)
        })
        .unwrap();
        let w = emden_fowler_transform(&u, 3).unwrap();
        assert!(w.values.iter().all(|&v| (v - 1.0).abs() < 1e-13));

        // bubble: w(t) = 3^{1/4} (2 cosh t)^{-1/2}
        let bubble =
            RadialProfile::from_fn_chebyshev(64, 0.2, 5.0, Coordinate::EuclideanR, |r| {
                3f64.powf(0.25) / (1.0 + r * r).sqrt()
            })
            .unwrap();
        let wb = emden_fowler_transform(&bubble, 3).unwrap();
        for (t, v) in wb.grid.iter().zip(wb.values.iter()) {
            let exact = 3f64.powf(0.25) / (2.0 * t.cosh()).sqrt();
            assert_abs_diff_eq!(*v, exact, epsilon = 1e-13);
        }
        let back = emden_fowler_inverse(&wb, 3).unwrap();
        for (g, v) in back.grid.iter().zip(back.values.iter()) {
            assert_abs_diff_eq!(*v, bubble.interpolate(*g).unwrap(), epsilon = 1e-10);
        }
    }

    #[test]
    fn singular_solution_residual_small() {
        for n in [3usize, 4, 5] {
            let res = singular_solution_residual(n).unwrap();
            let max = res.values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            assert!(max < 1e-8, "n = {n}: residual {max:.3e}");
        }
        // β₀ instances: 7/16, 1.25, 2.4375
        for (n, b0) in [(3, 0.4375), (4, 1.25), (5, 2.4375)] {
            let nf = n as f64;
            assert_abs_diff_eq!((nf - 2.0) * (3.0 * nf - 2.0) / 16.0, b0, epsilon = 1e-15);
        }
    }

    #[test]
    fn phi_substitution_constant_profile() {
        // u = ξ-shaped profile: φ is constant, flux vanishes
        let u = RadialProfile::from_fn_chebyshev(80, 0.1, 8.0, Coordinate::EuclideanR, |r| {
            1.7 * (2.0 / (1.0 + r * r)).powf(0.5)
        })
        .unwrap();
        let sub = phi_substitution(&u, 3).unwrap();
        let phi0 = 1.7 * 2f64.powf(0.5);
        for v in &sub.phi.values {
            assert_abs_diff_eq!(*v, phi0, epsilon = 1e-12);
        }
        let max_flux = sub.flux.values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        assert!(max_flux < 1e-8, "flux {max_flux:.3e}");
    }

    #[test]
    fn beta_nonpositive_sweep_loses_positivity_with_monotone_flux() {
        for beta in [0.0, -0.5] {
            let summary = nonexistence_sweep(4, Family::Beta { beta }, 60.0, 7).unwrap();
            assert!(summary.all_lost_positivity, "β = {beta}");
            let v = summary.max_flux_violation.unwrap();
            assert!(v < 1e-9, "β = {beta}: flux violation {v:.3e}");
        }
    }

    #[test]
    fn hardy_sweep_crosses_both_directions() {
        let summary =
            nonexistence_sweep(3, Family::AutonomousC { c: 0.25 }, 200.0, 7).unwrap();
        assert!(summary.all_crossed_both);
    }

    #[test]
    fn parameter_validation() {
        assert!(ShootParams::new(2, Family::AutonomousC { c: 0.0 }, 1.0, 0.0, 1.0).is_err());
        assert!(ShootParams::new(3, Family::AutonomousC { c: 0.0 }, 0.0, 0.0, 1.0).is_err());
        assert!(ShootParams::new(3, Family::AutonomousC { c: 0.0 }, 1.0, 0.0, -1.0).is_err());
        let p = ShootParams::new(4, Family::Beta { beta: 1.5 }, 1.0, 0.0, 1.0).unwrap();
        assert_abs_diff_eq!(p.c_beta().unwrap(), 2.0, epsilon = 1e-15);
    }
}
