//! Bernstein functions `f(z) = α + βz + ∫(1 − e^{−λz}) ρ(dλ)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::measure::{ClassCheck, IntegrabilityClass, JumpMeasure, Kernel, Region};
use crate::numerics::{alternating_differences, ensure_closed_half_plane, ensure_right_half_plane, Complex, QuadratureConfig};

/// Lévy triple `(α, β, ρ)` of a Bernstein function.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawBernstein", into = "RawBernstein")]
pub struct BernsteinRepr {
    alpha: f64,
    beta: f64,
    rho: JumpMeasure,
}

#[derive(Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawBernstein {
    #[serde(default)]
    alpha: f64,
    #[serde(default)]
    beta: f64,
    #[serde(default)]
    rho: JumpMeasure,
}

impl TryFrom<RawBernstein> for BernsteinRepr {
    type Error = Error;

    fn try_from(raw: RawBernstein) -> Result<Self> {
        BernsteinRepr::new(raw.alpha, raw.beta, raw.rho)
    }
}

impl From<BernsteinRepr> for RawBernstein {
    fn from(f: BernsteinRepr) -> Self {
        RawBernstein { alpha: f.alpha, beta: f.beta, rho: f.rho }
    }
}

/// Boundary values at `0` and the angular derivative at `∞`. Divergent
/// quantities are stored as `±∞`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundaryData {
    pub f0: f64,
    #[serde(serialize_with = "crate::numerics::extended_float::serialize")]
    pub fprime0: f64,
    #[serde(serialize_with = "crate::numerics::extended_float::serialize")]
    pub fsecond0: f64,
    pub fprime_inf: f64,
}

impl BernsteinRepr {
    pub fn new(alpha: f64, beta: f64, rho: JumpMeasure) -> Result<Self> {
        if !(alpha >= 0.0) || !alpha.is_finite() || !(beta >= 0.0) || !beta.is_finite() {
            return Err(Error::InvalidInput(format!(
                "alpha and beta must be finite and >= 0, got alpha = {alpha}, beta = {beta}"
            )));
        }
        if let ClassCheck::Fails(w) = rho.check_class(IntegrabilityClass::Bernstein) {
            return Err(Error::Integrability(w));
        }
        if alpha == 0.0 && beta == 0.0 && rho.is_empty() {
            return Err(Error::InvalidInput("the zero function is not a Bernstein function".into()));
        }
        Ok(BernsteinRepr { alpha, beta, rho })
    }

    /// `f(z) = z`.
    pub fn identity() -> Self {
        BernsteinRepr { alpha: 0.0, beta: 1.0, rho: JumpMeasure::empty() }
    }

    pub fn affine(alpha: f64, beta: f64) -> Result<Self> {
        BernsteinRepr::new(alpha, beta, JumpMeasure::empty())
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn rho(&self) -> &JumpMeasure {
        &self.rho
    }

    /// `a·self + b·other`.
    pub fn combine(&self, a: f64, other: &BernsteinRepr, b: f64) -> Result<Self> {
        if !(a >= 0.0) || !(b >= 0.0) {
            return Err(Error::Domain(format!("cone coefficients must be >= 0, got {a}, {b}")));
        }
        BernsteinRepr::new(
            a * self.alpha + b * other.alpha,
            a * self.beta + b * other.beta,
            self.rho.scaled(a)?.sum(&other.rho.scaled(b)?),
        )
    }

    pub fn eval(&self, z: Complex, cfg: &QuadratureConfig) -> Result<Complex> {
        ensure_closed_half_plane(z, "z")?;
        let jumps = if self.rho.is_empty() {
            Complex::new(0.0, 0.0)
        } else {
            self.rho.integrate_kernel(Kernel::Bernstein, z, cfg)?.value()?
        };
        Ok(self.alpha + self.beta * z + jumps)
    }

    /// `f^{(n)}(z)` for `n ≥ 1`.
    pub fn deriv(&self, z: Complex, n: u32, cfg: &QuadratureConfig) -> Result<Complex> {
        ensure_right_half_plane(z, "z")?;
        if n == 0 {
            return Err(Error::InvalidInput("derivative order must be >= 1".into()));
        }
        let jumps = self.rho.integrate_kernel(Kernel::Damped(n), z, cfg)?.value()?;
        let sign = if n % 2 == 1 { 1.0 } else { -1.0 };
        let drift = if n == 1 { self.beta } else { 0.0 };
        Ok(drift + sign * jumps)
    }

    pub fn boundary_data(&self) -> BoundaryData {
        BoundaryData {
            f0: self.alpha,
            fprime0: self.beta + self.rho.moment(1, Region::All),
            fsecond0: -self.rho.moment(2, Region::All),
            fprime_inf: self.beta,
        }
    }

    /// `min Re f(ζ)/Re ζ` over the samples and whether it stays above `β`.
    pub fn julia_check(&self, samples: &[Complex], cfg: &QuadratureConfig) -> Result<(f64, bool)> {
        let mut min_ratio = f64::INFINITY;
        for &zeta in samples {
            ensure_right_half_plane(zeta, "sample")?;
            let ratio = self.eval(zeta, cfg)?.re / zeta.re;
            min_ratio = min_ratio.min(ratio);
        }
        Ok((min_ratio, min_ratio >= self.beta - 1e-9))
    }

    /// `f(0) + |(f′(0) − 1)z| + ½|f″(0)z²| − |f(z) − z|`.
    pub fn rigidity_gap(&self, z: Complex, cfg: &QuadratureConfig) -> Result<f64> {
        ensure_right_half_plane(z, "z")?;
        let bd = self.boundary_data();
        if !bd.fprime0.is_finite() || !bd.fsecond0.is_finite() {
            return Err(Error::Domain("rigidity bound needs finite f'(0) and f''(0)".into()));
        }
        let bound = bd.f0 + ((bd.fprime0 - 1.0) * z).norm() + 0.5 * (bd.fsecond0 * z * z).norm();
        Ok(bound - (self.eval(z, cfg)? - z).norm())
    }
}

/// `outer(inner(z))`.
pub fn compose_eval(outer: &BernsteinRepr, inner: &BernsteinRepr, z: Complex, cfg: &QuadratureConfig) -> Result<Complex> {
    let w = inner.eval(z, cfg)?;
    // Re inner(z) >= 0 up to rounding.
    outer.eval(Complex::new(w.re.max(0.0), w.im), cfg)
}

/// Outcome of a numeric membership test.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NumericCheck {
    pub pass: bool,
    /// `min(0, smallest tested quantity)`.
    pub worst_violation: f64,
}

/// Tests `g ≥ 0` and complete monotonicity of `g′` on a grid of `(x0, h)`.
///
/// `g′` is replaced by the central difference with step
/// `min(h/2, x0/2)`, a local average of `g′`, which is completely monotone
/// whenever `g′` is. The tolerance at each grid point is
/// `1e-6·(|g(x0)| + 1)`.
pub fn is_bernstein_numeric<G: Fn(f64) -> f64>(g: G, grid: &[(f64, f64)], depth: usize) -> NumericCheck {
    let mut pass = true;
    let mut worst = 0.0_f64;
    for &(x0, h) in grid {
        let g0 = g(x0);
        if !g0.is_finite() {
            return NumericCheck { pass: false, worst_violation: f64::NEG_INFINITY };
        }
        let tol = 1e-6 * (g0.abs() + 1.0);
        worst = worst.min(g0);
        if g0 < -tol {
            pass = false;
        }
        let delta = (0.5 * h).min(0.5 * x0);
        let slope = |x: f64| (g(x + delta) - g(x - delta)) / (2.0 * delta);
        match alternating_differences(slope, x0, h, depth) {
            Ok(diffs) => {
                for d in diffs {
                    worst = worst.min(d);
                    if d < -tol {
                        pass = false;
                    }
                }
            }
            Err(_) => return NumericCheck { pass: false, worst_violation: f64::NEG_INFINITY },
        }
    }
    NumericCheck { pass, worst_violation: worst }
}
