//! Piecewise-constant Herglotz fields and the evolution families they
//! generate.
//!
//! On `[t_{k−1}, t_k)` the field is the generator `φ_k`, so every solve
//! reduces to composing autonomous flows:
//!
//! * forward family `w_{s,t}`: slice flows applied in increasing time
//!   order, the latest outermost;
//! * reverse family `v_{s,t}`: the same flows applied in decreasing time
//!   order, the earliest outermost.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::flow::flow;
use crate::generator::{check_generator_numeric, GeneratorCheck, GeneratorRepr};
use crate::numerics::{ensure_right_half_plane, integrate, Complex, OdeOutcome, SolverConfig};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawField", into = "RawField")]
pub struct HerglotzField {
    breakpoints: Vec<f64>,
    slices: Vec<GeneratorRepr>,
}

#[derive(Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawField {
    breakpoints: Vec<f64>,
    slices: Vec<GeneratorRepr>,
}

impl TryFrom<RawField> for HerglotzField {
    type Error = Error;

    fn try_from(raw: RawField) -> Result<Self> {
        HerglotzField::new(raw.breakpoints, raw.slices)
    }
}

impl From<HerglotzField> for RawField {
    fn from(f: HerglotzField) -> Self {
        RawField { breakpoints: f.breakpoints, slices: f.slices }
    }
}

/// Result of an inverse solve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum InverseOutcome {
    Point(Complex),
    /// The backward trajectory reached `Re w = 0` at field time `t_exit`.
    DomainExit { t_exit: f64 },
}

/// Residuals of the chain rule for boundary derivatives at 0.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChainRuleCheck {
    pub residual1: f64,
    pub residual2: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, Copy)]
struct Segment {
    slice: usize,
    lo: f64,
    hi: f64,
}

impl Segment {
    fn len(&self) -> f64 {
        self.hi - self.lo
    }
}

impl HerglotzField {
    pub fn new(breakpoints: Vec<f64>, slices: Vec<GeneratorRepr>) -> Result<Self> {
        if slices.is_empty() {
            return Err(Error::InvalidInput("a field needs at least one slice".into()));
        }
        if breakpoints.len() != slices.len() + 1 {
            return Err(Error::InvalidInput(format!(
                "{} slices need {} breakpoints, got {}",
                slices.len(),
                slices.len() + 1,
                breakpoints.len()
            )));
        }
        if breakpoints[0] != 0.0 {
            return Err(Error::InvalidInput("the first breakpoint must be 0".into()));
        }
        if breakpoints.iter().any(|t| !t.is_finite()) || breakpoints.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidInput("breakpoints must be finite and strictly increasing".into()));
        }
        Ok(HerglotzField { breakpoints, slices })
    }

    /// The generator `g` on `[0, duration]`.
    pub fn constant(g: GeneratorRepr, duration: f64) -> Result<Self> {
        HerglotzField::new(vec![0.0, duration], vec![g])
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn slices(&self) -> &[GeneratorRepr] {
        &self.slices
    }

    pub fn span(&self) -> f64 {
        self.breakpoints[self.breakpoints.len() - 1]
    }

    /// Runs [`check_generator_numeric`] on every slice.
    pub fn check_slices(&self, grid: &[(f64, f64)], depth: usize, cfg: &SolverConfig) -> Vec<GeneratorCheck> {
        self.slices
            .iter()
            .map(|g| check_generator_numeric(|x| g.eval(Complex::new(x, 0.0), &cfg.quad), grid, depth))
            .collect()
    }

    fn check_interval(&self, s: f64, t: f64) -> Result<()> {
        if !(0.0 <= s && s <= t && t <= self.span()) {
            return Err(Error::Domain(format!("need 0 <= s <= t <= {}, got s = {s}, t = {t}", self.span())));
        }
        Ok(())
    }

    /// Slices meeting `[s, t]` in increasing time order.
    fn segments(&self, s: f64, t: f64) -> Vec<Segment> {
        (0..self.slices.len())
            .filter_map(|k| {
                let lo = s.max(self.breakpoints[k]);
                let hi = t.min(self.breakpoints[k + 1]);
                (hi > lo).then_some(Segment { slice: k, lo, hi })
            })
            .collect()
    }

    /// `w_{s,t}(z)`.
    pub fn evolve(&self, s: f64, t: f64, z: Complex, cfg: &SolverConfig) -> Result<Complex> {
        self.check_interval(s, t)?;
        ensure_right_half_plane(z, "z")?;
        let mut w = z;
        for seg in self.segments(s, t) {
            w = flow(&self.slices[seg.slice], seg.len(), w, cfg)?.w;
        }
        Ok(w)
    }

    /// `v_{s,t}(z)`.
    pub fn reverse_evolve(&self, s: f64, t: f64, z: Complex, cfg: &SolverConfig) -> Result<Complex> {
        self.check_interval(s, t)?;
        ensure_right_half_plane(z, "z")?;
        let mut v = z;
        for seg in self.segments(s, t).iter().rev() {
            v = flow(&self.slices[seg.slice], seg.len(), v, cfg)?.w;
        }
        Ok(v)
    }

    /// `w_{s,t}^{−1}(z)`: slice by slice, latest first, along `dw/dτ = φ_k(w)`.
    pub fn inverse_evolve(&self, s: f64, t: f64, z: Complex, cfg: &SolverConfig) -> Result<InverseOutcome> {
        self.check_interval(s, t)?;
        ensure_right_half_plane(z, "z")?;
        let mut w = z;
        for seg in self.segments(s, t).iter().rev() {
            match backward_flow(&self.slices[seg.slice], seg.len(), w, cfg)? {
                InverseOutcome::Point(p) => w = p,
                InverseOutcome::DomainExit { t_exit } => {
                    return Ok(InverseOutcome::DomainExit { t_exit: seg.hi - t_exit })
                }
            }
        }
        Ok(InverseOutcome::Point(w))
    }

    /// `v_{s,t}^{−1}(z)`: `dw/dt = φ(w, t)`, `w(s) = z`, integrated forward
    /// to `t`.
    pub fn inverse_reverse_evolve(&self, s: f64, t: f64, z: Complex, cfg: &SolverConfig) -> Result<InverseOutcome> {
        self.check_interval(s, t)?;
        ensure_right_half_plane(z, "z")?;
        let mut w = z;
        for seg in self.segments(s, t) {
            match backward_flow(&self.slices[seg.slice], seg.len(), w, cfg)? {
                InverseOutcome::Point(p) => w = p,
                InverseOutcome::DomainExit { t_exit } => {
                    return Ok(InverseOutcome::DomainExit { t_exit: seg.lo + t_exit })
                }
            }
        }
        Ok(InverseOutcome::Point(w))
    }

    /// `|w_{s,u}(z) − w_{t,u}(w_{s,t}(z))|`.
    pub fn ef2_residual(&self, s: f64, t: f64, u: f64, z: Complex, cfg: &SolverConfig) -> Result<f64> {
        let whole = self.evolve(s, u, z, cfg)?;
        let split = self.evolve(t, u, self.evolve(s, t, z, cfg)?, cfg)?;
        Ok((whole - split).norm())
    }

    /// `|v_{s,u}(z) − v_{s,t}(v_{t,u}(z))|`.
    pub fn ref2_residual(&self, s: f64, t: f64, u: f64, z: Complex, cfg: &SolverConfig) -> Result<f64> {
        let whole = self.reverse_evolve(s, u, z, cfg)?;
        let split = self.reverse_evolve(s, t, self.reverse_evolve(t, u, z, cfg)?, cfg)?;
        Ok((whole - split).norm())
    }

    /// Per-segment `(φ′(0), φ″(0), length)` on `[s, t]`.
    fn boundary_path(&self, s: f64, t: f64) -> Result<Vec<(f64, f64, f64)>> {
        self.check_interval(s, t)?;
        self.segments(s, t)
            .into_iter()
            .map(|seg| {
                let g = &self.slices[seg.slice];
                let c = match g.to_legall() {
                    Ok(l) => l.c,
                    Err(Error::NoBrfp { reason, .. }) | Err(Error::Integrability(reason)) => {
                        return Err(Error::NoBrfp { point: "0", reason: format!("slice {}: {reason}", seg.slice) })
                    }
                    Err(e) => return Err(e),
                };
                let second = 2.0 * g.b() + g.pi().moment(2, crate::measure::Region::All);
                Ok((c, second, seg.len()))
            })
            .collect()
    }

    /// `w′_{s,t}(0) = exp(−∫_s^t φ′(0, ξ) dξ)`.
    pub fn brfp0_derivative(&self, s: f64, t: f64) -> Result<f64> {
        let path = self.boundary_path(s, t)?;
        Ok((-path.iter().map(|(c, _, d)| c * d).sum::<f64>()).exp())
    }

    /// `w″_{s,t}(0) = −w′_{s,t}(0) Σ_k φ″_k(0) ∫_{segment k} w′_{s,ξ}(0) dξ`.
    pub fn brfp0_second_derivative(&self, s: f64, t: f64) -> Result<f64> {
        Ok(second_derivative(&self.boundary_path(s, t)?))
    }

    /// `v″_{s,t}(0)` for the reverse family.
    pub fn reverse_brfp0_second_derivative(&self, s: f64, t: f64) -> Result<f64> {
        let mut path = self.boundary_path(s, t)?;
        path.reverse();
        Ok(second_derivative(&path))
    }

    /// Residuals of `w′_{s,t} = w′_{0,t}/w′_{0,s}` and of the matching
    /// second-order relation.
    pub fn chain_rule_check(&self, s: f64, t: f64, tol: f64) -> Result<ChainRuleCheck> {
        let d_st = self.brfp0_derivative(s, t)?;
        let d_0t = self.brfp0_derivative(0.0, t)?;
        let d_0s = self.brfp0_derivative(0.0, s)?;
        let residual1 = (d_st - d_0t / d_0s).abs();
        let s_st = self.brfp0_second_derivative(s, t)?;
        let s_0t = self.brfp0_second_derivative(0.0, t)?;
        let s_0s = self.brfp0_second_derivative(0.0, s)?;
        let predicted = (s_0t - s_0s * d_0t / d_0s) / (d_0s * d_0s);
        let residual2 = if s_st.is_infinite() && predicted.is_infinite() { 0.0 } else { (s_st - predicted).abs() };
        Ok(ChainRuleCheck { residual1, residual2, pass: residual1 <= tol && residual2 <= tol })
    }

    /// Radial estimates of `w′_{s,t}(0)` and `w″_{s,t}(0)` from a quadratic
    /// fit of `w(x)/x` at `x = h, 2h, 4h`.
    pub fn finite_difference_brfp0(&self, s: f64, t: f64, h: f64, cfg: &SolverConfig) -> Result<(f64, f64)> {
        if !(h > 0.0) {
            return Err(Error::InvalidInput(format!("step must be positive, got {h}")));
        }
        let g = |x: f64| -> Result<f64> { Ok(self.evolve(s, t, Complex::new(x, 0.0), cfg)?.re / x) };
        let (g1, g2, g4) = (g(h)?, g(2.0 * h)?, g(4.0 * h)?);
        let d1 = (8.0 * g1 - 6.0 * g2 + g4) / 3.0;
        let slope = (-2.0 * g1 + 2.5 * g2 - 0.5 * g4) / h;
        Ok((d1, 2.0 * slope))
    }
}

fn second_derivative(path: &[(f64, f64, f64)]) -> f64 {
    let mut weight = 1.0;
    let mut sum = 0.0;
    for &(c, second, d) in path {
        if d == 0.0 {
            continue;
        }
        let ramp = if c == 0.0 { d } else { -(-c * d).exp_m1() / c };
        if second > 0.0 {
            sum += second * weight * ramp;
        }
        weight *= (-c * d).exp();
    }
    if sum.is_infinite() {
        return f64::NEG_INFINITY;
    }
    -weight * sum
}

/// Integrates `dw/dτ = φ(w)` for `τ ∈ [0, duration]`.
fn backward_flow(g: &GeneratorRepr, duration: f64, z: Complex, cfg: &SolverConfig) -> Result<InverseOutcome> {
    if g.is_zero() {
        return Ok(InverseOutcome::Point(z));
    }
    let quad = cfg.quad;
    let rhs = |_: f64, w: Complex| g.eval(w, &quad);
    match integrate(rhs, 0.0, duration, z, &cfg.ode)? {
        OdeOutcome::Completed { y, .. } => Ok(InverseOutcome::Point(y)),
        OdeOutcome::DomainExit { t_exit, .. } => Ok(InverseOutcome::DomainExit { t_exit }),
    }
}
