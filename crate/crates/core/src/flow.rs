//! One-parameter semigroups `v_t` solving `dw/dt + φ(w) = 0, w(0) = z`.

use crate::bernstein::BernsteinRepr;
use crate::error::{Error, Result};
use crate::generator::GeneratorRepr;
use crate::numerics::{ensure_right_half_plane, gauss_legendre_cached, integrate, Complex, OdeOutcome, QuadratureConfig, SolverConfig};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FlowResult {
    pub w: Complex,
    pub steps: usize,
    pub rejected_steps: usize,
    pub used_closed_form: bool,
}

/// Closed form of the flow when `φ` is one of `−q`, `aζ`, `bζ²` or
/// `aζ + bζ²`.
pub fn closed_form(g: &GeneratorRepr, t: f64, z: Complex) -> Option<Complex> {
    if !g.pi().is_empty() {
        return None;
    }
    let (q, a, b) = (g.q(), g.a(), g.b());
    if a == 0.0 && b == 0.0 {
        return Some(z + q * t);
    }
    if q != 0.0 {
        return None;
    }
    if b == 0.0 {
        return Some((-a * t).exp() * z);
    }
    if a == 0.0 {
        return Some(z / (1.0 + b * t * z));
    }
    // (1 − e^{−at})/a without cancellation for small at.
    let ramp = -(-a * t).exp_m1() / a;
    Some((-a * t).exp() * z / (1.0 + b * ramp * z))
}

/// `v_t(z)` for the generator `g`.
pub fn flow(g: &GeneratorRepr, t: f64, z: Complex, cfg: &SolverConfig) -> Result<FlowResult> {
    if !(t >= 0.0) || !t.is_finite() {
        return Err(Error::InvalidInput(format!("flow time must be finite and >= 0, got {t}")));
    }
    ensure_right_half_plane(z, "z")?;
    if t == 0.0 || g.is_zero() {
        return Ok(FlowResult { w: z, steps: 0, rejected_steps: 0, used_closed_form: true });
    }
    if let Some(w) = closed_form(g, t, z) {
        return Ok(FlowResult { w, steps: 0, rejected_steps: 0, used_closed_form: true });
    }
    ode_flow(g, t, z, cfg)
}

/// The flow through the adaptive integrator, bypassing closed forms.
pub fn ode_flow(g: &GeneratorRepr, t: f64, z: Complex, cfg: &SolverConfig) -> Result<FlowResult> {
    let quad = cfg.quad;
    let rhs = |_: f64, w: Complex| g.eval(w, &quad).map(|v| -v);
    match integrate(rhs, 0.0, t, z, &cfg.ode)? {
        OdeOutcome::Completed { y, stats } => Ok(FlowResult {
            w: y,
            steps: stats.accepted,
            rejected_steps: stats.rejected,
            used_closed_form: false,
        }),
        OdeOutcome::DomainExit { t_exit, .. } => Err(Error::LeftHalfPlane { t_exit }),
    }
}

/// Euler scheme `v ← v + (t/n)·f(v)` for the generator `−f`.
pub fn euler_flow(f: &BernsteinRepr, t: f64, n: usize, z: Complex, quad: &QuadratureConfig) -> Result<Complex> {
    if n == 0 {
        return Err(Error::InvalidInput("Euler scheme needs n >= 1".into()));
    }
    ensure_right_half_plane(z, "z")?;
    let step = t / n as f64;
    let mut v = z;
    for _ in 0..n {
        v += step * f.eval(v, quad)?;
    }
    Ok(v)
}

/// Trotter product `(v¹_{t/n} ∘ v²_{t/n})^n (z)`.
pub fn trotter_flow(g1: &GeneratorRepr, g2: &GeneratorRepr, t: f64, n: usize, z: Complex, cfg: &SolverConfig) -> Result<Complex> {
    if n == 0 {
        return Err(Error::InvalidInput("Trotter product needs n >= 1".into()));
    }
    let dt = t / n as f64;
    let mut v = z;
    for _ in 0..n {
        v = flow(g2, dt, v, cfg)?.w;
        v = flow(g1, dt, v, cfg)?.w;
    }
    Ok(v)
}

/// `h(z) = ∫_1^z dζ/f(ζ)` along the segment `[1, z]`.
pub fn koenigs(f: &BernsteinRepr, z: Complex, quad: &QuadratureConfig) -> Result<Complex> {
    ensure_right_half_plane(z, "z")?;
    let dz = z - 1.0;
    if dz == Complex::new(0.0, 0.0) {
        return Ok(dz);
    }
    let rule = gauss_legendre_cached(16);
    let (nodes, weights) = (&rule.0, &rule.1);
    let panel = |a: f64, b: f64| -> Result<Complex> {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        let mut acc = Complex::new(0.0, 0.0);
        for (x, w) in nodes.iter().zip(weights) {
            let zeta = 1.0 + (mid + half * x) * dz;
            let fz = f.eval(zeta, quad)?;
            let inv = fz.inv();
            if fz.norm() == 0.0 || !inv.re.is_finite() || !inv.im.is_finite() {
                return Err(Error::SingularPath(zeta));
            }
            acc += *w * inv;
        }
        Ok(acc * half * dz)
    };

    let mut total = Complex::new(0.0, 0.0);
    let mut stack = vec![(0.0, 1.0, panel(0.0, 1.0)?, 0u32)];
    while let Some((a, b, coarse, depth)) = stack.pop() {
        let m = 0.5 * (a + b);
        let left = panel(a, m)?;
        let right = panel(m, b)?;
        let fine = left + right;
        if (fine - coarse).norm() <= 1e-14 * fine.norm().max(1e-300) || depth >= 40 {
            if depth >= 40 {
                return Err(Error::SingularPath(1.0 + m * dz));
            }
            total += fine;
        } else {
            stack.push((a, m, left, depth + 1));
            stack.push((m, b, right, depth + 1));
        }
    }
    Ok(total)
}

/// `|h(v_t(z)) − h(z) − t|` for the semigroup of `−f`.
pub fn abel_residual(f: &BernsteinRepr, t: f64, z: Complex, cfg: &SolverConfig) -> Result<f64> {
    if t == 0.0 {
        return Ok(0.0);
    }
    let g = GeneratorRepr::from_bernstein(f);
    let w = flow(&g, t, z, cfg)?.w;
    Ok((koenigs(f, w, &cfg.quad)? - koenigs(f, z, &cfg.quad)? - t).norm())
}

/// `|v_{s+t}(z) − v_s(v_t(z))|`.
pub fn semigroup_residual(g: &GeneratorRepr, s: f64, t: f64, z: Complex, cfg: &SolverConfig) -> Result<f64> {
    let whole = flow(g, s + t, z, cfg)?.w;
    let inner = flow(g, t, z, cfg)?.w;
    let outer = flow(g, s, inner, cfg)?.w;
    Ok((whole - outer).norm())
}
