//! Shared numerical kernels: half-plane geometry, the adaptive integrator,
//! Gauss–Legendre rules and compensated finite differences.
//!
//! Complex states are integrated as points of ℝ² with an embedded
//! Dormand–Prince 5(4) pair. Trajectories may be asked to stay to the right
//! of `Re w = boundary_margin`; crossing that line is reported as a
//! [`OdeOutcome::DomainExit`] with the crossing time refined by bisection.

use std::cell::RefCell;
use std::collections::HashMap;
use std::rc::Rc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Complex = num_complex::Complex64;

/// Tolerances and limits for [`integrate`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OdeConfig {
    pub rtol: f64,
    pub atol: f64,
    pub max_step: f64,
    pub max_steps: usize,
    /// Smallest admissible `Re w` before the trajectory counts as having left
    /// the half-plane.
    pub boundary_margin: f64,
}

impl Default for OdeConfig {
    fn default() -> Self {
        OdeConfig {
            rtol: 1e-10,
            atol: 1e-12,
            max_step: 1.0,
            max_steps: 1_000_000,
            boundary_margin: 0.0,
        }
    }
}

impl OdeConfig {
    pub fn with_rtol(mut self, rtol: f64) -> Self {
        self.rtol = rtol;
        self
    }

    pub fn with_atol(mut self, atol: f64) -> Self {
        self.atol = atol;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.rtol >= 1e-14) || !self.rtol.is_finite() {
            return Err(Error::InvalidInput(format!("rtol must be >= 1e-14, got {:e}", self.rtol)));
        }
        if !(self.atol >= 1e-16) || !self.atol.is_finite() {
            return Err(Error::InvalidInput(format!("atol must be >= 1e-16, got {:e}", self.atol)));
        }
        if !(self.max_step > 0.0) {
            return Err(Error::InvalidInput("max_step must be positive".into()));
        }
        if self.max_steps == 0 {
            return Err(Error::InvalidInput("max_steps must be positive".into()));
        }
        if !(self.boundary_margin >= 0.0) || !self.boundary_margin.is_finite() {
            return Err(Error::InvalidInput("boundary_margin must be a finite non-negative number".into()));
        }
        Ok(())
    }
}

/// Settings for the panel quadrature of measure integrals.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuadratureConfig {
    /// Gauss–Legendre nodes per subpanel.
    pub panel_order: usize,
    /// Truncation criterion for unbounded supports, relative to the
    /// accumulated integral.
    pub tail_rel_tol: f64,
    pub max_panels: usize,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        QuadratureConfig { panel_order: 16, tail_rel_tol: 1e-12, max_panels: 512 }
    }
}

impl QuadratureConfig {
    pub fn validate(&self) -> Result<()> {
        if self.panel_order < 4 || self.panel_order % 2 != 0 {
            return Err(Error::InvalidInput(format!(
                "panel_order must be an even integer >= 4, got {}",
                self.panel_order
            )));
        }
        if !(self.tail_rel_tol > 0.0) {
            return Err(Error::InvalidInput("tail_rel_tol must be positive".into()));
        }
        if self.max_panels == 0 {
            return Err(Error::InvalidInput("max_panels must be positive".into()));
        }
        Ok(())
    }
}

/// ODE and quadrature settings used together by the flow solvers.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct SolverConfig {
    pub ode: OdeConfig,
    pub quad: QuadratureConfig,
}

impl SolverConfig {
    pub fn with_rtol(mut self, rtol: f64) -> Self {
        self.ode.rtol = rtol;
        self
    }
}

/// Serializes `f64` with infinities as `"inf"` / `"-inf"` (JSON has no
/// infinite numbers).
pub(crate) mod extended_float {
    use serde::Serializer;

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if *v == f64::INFINITY {
            s.serialize_str("inf")
        } else if *v == f64::NEG_INFINITY {
            s.serialize_str("-inf")
        } else {
            s.serialize_f64(*v)
        }
    }
}

pub(crate) fn ensure_finite(z: Complex, what: &str) -> Result<()> {
    if z.re.is_finite() && z.im.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidInput(format!("{what} must be finite, got {z}")))
    }
}

pub(crate) fn ensure_right_half_plane(z: Complex, what: &str) -> Result<()> {
    ensure_finite(z, what)?;
    if z.re > 0.0 {
        Ok(())
    } else {
        Err(Error::Domain(format!("{what} must satisfy Re > 0, got {z}")))
    }
}

pub(crate) fn ensure_closed_half_plane(z: Complex, what: &str) -> Result<()> {
    ensure_finite(z, what)?;
    if z.re >= 0.0 {
        Ok(())
    } else {
        Err(Error::Domain(format!("{what} must satisfy Re >= 0, got {z}")))
    }
}

/// Cayley map of the unit disk onto the right half-plane, `(1+z)/(1−z)`.
pub fn cayley(z: Complex) -> Result<Complex> {
    ensure_finite(z, "z")?;
    if z.norm() >= 1.0 {
        return Err(Error::Domain(format!("cayley: |z| must be < 1, got {z}")));
    }
    Ok((1.0 + z) / (1.0 - z))
}

/// Inverse Cayley map `(w−1)/(w+1)` from the right half-plane to the disk.
pub fn cayley_inv(w: Complex) -> Result<Complex> {
    ensure_right_half_plane(w, "w")?;
    Ok((w - 1.0) / (w + 1.0))
}

/// Poincaré distance of the right half-plane for the metric `|dζ|/Re ζ`.
pub fn hyperbolic_distance(z: Complex, w: Complex) -> Result<f64> {
    ensure_right_half_plane(z, "z")?;
    ensure_right_half_plane(w, "w")?;
    let s = (z - w).norm() / (2.0 * (z.re * w.re).sqrt());
    Ok(2.0 * s.asinh())
}

/// Step statistics of one integration.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct StepStats {
    pub accepted: usize,
    pub rejected: usize,
    pub evals: usize,
}

/// Result of [`integrate`].
#[derive(Debug, Clone, PartialEq)]
pub enum OdeOutcome {
    Completed { y: Complex, stats: StepStats },
    /// `Re y` fell below `boundary_margin` at `t_exit`.
    DomainExit { t_exit: f64, stats: StepStats },
}

impl OdeOutcome {
    pub fn stats(&self) -> StepStats {
        match self {
            OdeOutcome::Completed { stats, .. } | OdeOutcome::DomainExit { stats, .. } => *stats,
        }
    }
}

// Dormand–Prince 5(4) tableau.
const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

struct Trial {
    y: Complex,
    err: Complex,
    k7: Complex,
}

fn finite(z: Complex) -> bool {
    z.re.is_finite() && z.im.is_finite()
}

fn dp_step<F>(rhs: &mut F, t: f64, y: Complex, k1: Complex, h: f64, evals: &mut usize) -> Result<Trial>
where
    F: FnMut(f64, Complex) -> Result<Complex>,
{
    let mut eval = |t: f64, y: Complex| -> Result<Complex> {
        *evals += 1;
        let v = rhs(t, y)?;
        if finite(v) {
            Ok(v)
        } else {
            Err(Error::Evaluation { x: t, reason: format!("non-finite right-hand side at y = {y}") })
        }
    };
    let k2 = eval(t + C2 * h, y + h * (A21 * k1))?;
    let k3 = eval(t + C3 * h, y + h * (A31 * k1 + A32 * k2))?;
    let k4 = eval(t + C4 * h, y + h * (A41 * k1 + A42 * k2 + A43 * k3))?;
    let k5 = eval(t + C5 * h, y + h * (A51 * k1 + A52 * k2 + A53 * k3 + A54 * k4))?;
    let k6 = eval(t + h, y + h * (A61 * k1 + A62 * k2 + A63 * k3 + A64 * k4 + A65 * k5))?;
    let y_new = y + h * (B1 * k1 + B3 * k3 + B4 * k4 + B5 * k5 + B6 * k6);
    let k7 = eval(t + h, y_new)?;
    let err = h * (E1 * k1 + E3 * k3 + E4 * k4 + E5 * k5 + E6 * k6 + E7 * k7);
    Ok(Trial { y: y_new, err, k7 })
}

/// Integrates `dy/dt = rhs(t, y)` from `t0` to `t1` (either direction).
///
/// Uses Dormand–Prince 5(4) with a PI step-size controller; the local error
/// of each accepted step is at most `rtol·|y| + atol`. When `Re y` drops
/// below `cfg.boundary_margin` the crossing time is located to `1e-10` and
/// returned as [`OdeOutcome::DomainExit`].
///
/// Right-hand-side failures inside a trial step (for instance a measure
/// integral evaluated outside the half-plane) reject the step; they are
/// reported only if the step size collapses.
pub fn integrate<F>(mut rhs: F, t0: f64, t1: f64, y0: Complex, cfg: &OdeConfig) -> Result<OdeOutcome>
where
    F: FnMut(f64, Complex) -> Result<Complex>,
{
    cfg.validate()?;
    if !t0.is_finite() || !t1.is_finite() {
        return Err(Error::InvalidInput("integration bounds must be finite".into()));
    }
    ensure_finite(y0, "initial state")?;
    let mut stats = StepStats::default();
    if y0.re < cfg.boundary_margin {
        return Ok(OdeOutcome::DomainExit { t_exit: t0, stats });
    }
    if t0 == t1 {
        return Ok(OdeOutcome::Completed { y: y0, stats });
    }

    let dir = (t1 - t0).signum();
    let span = (t1 - t0).abs();
    let mut t = t0;
    let mut y = y0;
    stats.evals += 1;
    let mut k1 = rhs(t, y)?;
    if !finite(k1) {
        return Err(Error::Evaluation { x: t0, reason: "non-finite right-hand side at the initial state".into() });
    }

    let mut h = initial_step(&mut rhs, t, y, k1, dir, cfg, &mut stats).min(span).min(cfg.max_step);
    let mut fac_old: f64 = 1e-4;
    let mut last_reject = false;
    let mut last_failure: Option<Error> = None;
    let mut trajectory = vec![(t, y)];

    const BETA: f64 = 0.04;
    const EXPO1: f64 = 0.2 - BETA * 0.75;
    const SAFE: f64 = 0.9;
    const FAC_MIN: f64 = 0.2;
    const FAC_MAX: f64 = 10.0;

    loop {
        let remaining = (t1 - t).abs();
        if remaining <= 1e-15 * t1.abs().max(1.0) {
            return Ok(OdeOutcome::Completed { y, stats });
        }
        if stats.accepted >= cfg.max_steps {
            return Err(Error::NonConvergence { t_reached: t, stats, trajectory });
        }
        let last = h >= remaining;
        if last {
            h = remaining;
        }
        if h <= 1e-14 * t.abs().max(1.0) {
            if (y.re - cfg.boundary_margin) <= 1e-8 * (1.0 + y.norm()) {
                return Ok(OdeOutcome::DomainExit { t_exit: t, stats });
            }
            return Err(last_failure.unwrap_or(Error::StepUnderflow { t }));
        }

        let trial = match dp_step(&mut rhs, t, y, k1, dir * h, &mut stats.evals) {
            Ok(trial) if finite(trial.y) && finite(trial.err) => trial,
            Ok(_) => {
                stats.rejected += 1;
                h *= 0.25;
                last_reject = true;
                continue;
            }
            Err(e) => {
                stats.rejected += 1;
                last_failure = Some(e);
                h *= 0.25;
                last_reject = true;
                continue;
            }
        };

        let scale = cfg.atol + cfg.rtol * y.norm().max(trial.y.norm());
        let err = trial.err.norm() / scale;
        let fac11 = err.powf(EXPO1);

        if err <= 1.0 {
            let t_new = if last { t1 } else { t + dir * h };
            if trial.y.re < cfg.boundary_margin {
                stats.accepted += 1;
                let t_exit = locate_exit(&mut rhs, t, y, k1, dir * h, cfg.boundary_margin, &mut stats.evals);
                return Ok(OdeOutcome::DomainExit { t_exit, stats });
            }
            stats.accepted += 1;
            t = t_new;
            y = trial.y;
            k1 = trial.k7;
            trajectory.push((t, y));
            let mut fac = (fac11 / fac_old.powf(BETA)) / SAFE;
            fac_old = err.max(1e-4);
            fac = fac.clamp(1.0 / FAC_MAX, 1.0 / FAC_MIN);
            let mut h_new = h / fac;
            if last_reject {
                h_new = h_new.min(h);
            }
            last_reject = false;
            h = h_new.min(cfg.max_step);
            if last {
                return Ok(OdeOutcome::Completed { y, stats });
            }
        } else {
            stats.rejected += 1;
            last_reject = true;
            h /= (fac11 / SAFE).min(1.0 / FAC_MIN);
        }
    }
}

fn initial_step<F>(rhs: &mut F, t: f64, y: Complex, f0: Complex, dir: f64, cfg: &OdeConfig, stats: &mut StepStats) -> f64
where
    F: FnMut(f64, Complex) -> Result<Complex>,
{
    let sc = cfg.atol + cfg.rtol * y.norm();
    let d0 = y.norm() / sc;
    let d1 = f0.norm() / sc;
    let h0 = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
    stats.evals += 1;
    let f1 = match rhs(t + dir * h0, y + dir * h0 * f0) {
        Ok(v) if finite(v) => v,
        _ => return h0,
    };
    let d2 = (f1 - f0).norm() / sc / h0;
    let dm = d1.max(d2);
    let h1 = if dm <= 1e-15 { (h0 * 1e-3).max(1e-6) } else { (0.01 / dm).powf(0.2) };
    (100.0 * h0).min(h1)
}

/// Bisects the single step from `(t, y)` for the time at which `Re y`
/// reaches `margin`.
fn locate_exit<F>(rhs: &mut F, t: f64, y: Complex, k1: Complex, h: f64, margin: f64, evals: &mut usize) -> f64
where
    F: FnMut(f64, Complex) -> Result<Complex>,
{
    let mut lo = 0.0_f64;
    let mut hi = h.abs();
    let dir = h.signum();
    while hi - lo > 1e-11 {
        let mid = 0.5 * (lo + hi);
        match dp_step(rhs, t, y, k1, dir * mid, evals) {
            Ok(trial) if finite(trial.y) && trial.y.re >= margin => lo = mid,
            _ => hi = mid,
        }
    }
    t + dir * 0.5 * (lo + hi)
}

/// Neumaier-compensated accumulator.
#[derive(Debug, Clone, Copy, Default)]
pub(crate) struct CompensatedSum {
    sum: f64,
    comp: f64,
}

impl CompensatedSum {
    pub(crate) fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    /// Adds the exact product `a·b` (error-free transformation via FMA).
    pub(crate) fn add_product(&mut self, a: f64, b: f64) {
        let p = a * b;
        let e = a.mul_add(b, -p);
        self.add(p);
        self.add(e);
    }

    pub(crate) fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

/// Returns `[(−1)^k Δ_h^k g(x0)]` for `k = 0..=depth`, `Δ_h` the forward
/// difference with step `h`.
///
/// Sums are accumulated with error-free products and compensated addition:
/// at depth `K` the naive sum loses roughly `K·log2(1/h)` bits.
pub fn alternating_differences<G>(g: G, x0: f64, h: f64, depth: usize) -> Result<Vec<f64>>
where
    G: Fn(f64) -> f64,
{
    if !(h > 0.0) || !h.is_finite() {
        return Err(Error::InvalidInput(format!("difference step must be positive, got {h}")));
    }
    if !x0.is_finite() {
        return Err(Error::InvalidInput("x0 must be finite".into()));
    }
    let values = (0..=depth)
        .map(|j| {
            let x = x0 + j as f64 * h;
            let v = g(x);
            if v.is_finite() {
                Ok(v)
            } else {
                Err(Error::Evaluation { x, reason: format!("g returned {v}") })
            }
        })
        .collect::<Result<Vec<_>>>()?;

    let mut out = Vec::with_capacity(depth + 1);
    for k in 0..=depth {
        let mut acc = CompensatedSum::default();
        let mut binom = 1.0_f64;
        for (j, &v) in values.iter().enumerate().take(k + 1) {
            let signed = if j % 2 == 0 { binom } else { -binom };
            acc.add_product(signed, v);
            binom = binom * (k - j) as f64 / (j + 1) as f64;
        }
        out.push(acc.value());
    }
    Ok(out)
}

/// Gauss–Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() <= 2.0 * f64::EPSILON {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, x);
        if d != 0.0 {
            dp = d;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

/// Node sets computed once per thread and order.
pub(crate) fn gauss_legendre_cached(n: usize) -> Rc<(Vec<f64>, Vec<f64>)> {
    thread_local! {
        static CACHE: RefCell<HashMap<usize, Rc<(Vec<f64>, Vec<f64>)>>> = RefCell::new(HashMap::new());
    }
    CACHE.with(|cache| cache.borrow_mut().entry(n).or_insert_with(|| Rc::new(gauss_legendre(n))).clone())
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}
