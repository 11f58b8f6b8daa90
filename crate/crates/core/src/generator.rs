//! Bernstein generators in Silverstein form
//! `φ(ζ) = −q + aζ + bζ² + ∫(e^{−ζx} − 1 + ζx·1_{(0,1)}(x)) π(dx)`,
//! with the Le Gall and subordinator rearrangements, boundary
//! classification and numeric membership tests.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::bernstein::BernsteinRepr;
use crate::error::{Error, Result};
use crate::measure::{ClassCheck, IntegrabilityClass, JumpMeasure, Kernel, Region};
use crate::numerics::{alternating_differences, ensure_finite, Complex, QuadratureConfig};

/// Silverstein quadruple `(q, a, b, π)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawGenerator", into = "SilversteinJson")]
pub struct GeneratorRepr {
    q: f64,
    a: f64,
    b: f64,
    pi: JumpMeasure,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
enum Form {
    Silverstein,
    Legall,
    Subordinator,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawGenerator {
    form: Option<Form>,
    q: Option<f64>,
    a: Option<f64>,
    b: Option<f64>,
    c: Option<f64>,
    #[serde(default)]
    pi: JumpMeasure,
}

#[derive(Clone, Serialize)]
struct SilversteinJson {
    q: f64,
    a: f64,
    b: f64,
    pi: JumpMeasure,
}

impl From<GeneratorRepr> for SilversteinJson {
    fn from(g: GeneratorRepr) -> Self {
        SilversteinJson { q: g.q, a: g.a, b: g.b, pi: g.pi }
    }
}

impl RawGenerator {
    fn into_parts(self) -> Result<(f64, f64, f64, JumpMeasure)> {
        let form = self.form.unwrap_or(Form::Silverstein);
        let reject = |field: &str| Err(Error::Parse(format!("field `{field}` is not part of the {form:?} form")));
        match form {
            Form::Silverstein => {
                if self.c.is_some() {
                    return reject("c");
                }
                Ok((self.q.unwrap_or(0.0), self.a.unwrap_or(0.0), self.b.unwrap_or(0.0), self.pi))
            }
            Form::Legall => {
                if self.q.is_some() {
                    return reject("q");
                }
                if self.a.is_some() {
                    return reject("a");
                }
                let l = LeGallRepr::new(self.c.unwrap_or(0.0), self.b.unwrap_or(0.0), self.pi)?;
                let g = l.to_silverstein()?;
                Ok((g.q, g.a, g.b, g.pi))
            }
            Form::Subordinator => {
                if self.a.is_some() {
                    return reject("a");
                }
                if self.b.is_some() {
                    return reject("b");
                }
                let s = SubordinatorGenRepr::new(self.q.unwrap_or(0.0), self.c.unwrap_or(0.0), self.pi)?;
                let g = s.to_silverstein()?;
                Ok((g.q, g.a, g.b, g.pi))
            }
        }
    }
}

impl TryFrom<RawGenerator> for GeneratorRepr {
    type Error = Error;

    fn try_from(raw: RawGenerator) -> Result<Self> {
        let (q, a, b, pi) = raw.into_parts()?;
        GeneratorRepr::new(q, a, b, pi)
    }
}

/// Parses generator JSON without enforcing the sign constraints on
/// `(q, b)`, so that a corrupted input can still be evaluated
/// and diagnosed.
pub fn parse_unchecked(json: &str) -> Result<GeneratorRepr> {
    let raw: RawGenerator = serde_json::from_str(json)?;
    let (q, a, b, pi) = raw.into_parts()?;
    GeneratorRepr::unchecked(q, a, b, pi)
}

fn nonneg(name: &str, v: f64) -> Result<()> {
    if v >= 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidInput(format!("{name} must be finite and >= 0, got {v}")))
    }
}

fn finite(name: &str, v: f64) -> Result<()> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidInput(format!("{name} must be finite, got {v}")))
    }
}

impl GeneratorRepr {
    pub fn new(q: f64, a: f64, b: f64, pi: JumpMeasure) -> Result<Self> {
        nonneg("q", q)?;
        nonneg("b", b)?;
        let g = GeneratorRepr::unchecked(q, a, b, pi)?;
        if let ClassCheck::Fails(w) = g.pi.check_class(IntegrabilityClass::Generator) {
            return Err(Error::Integrability(w));
        }
        Ok(g)
    }

    fn unchecked(q: f64, a: f64, b: f64, pi: JumpMeasure) -> Result<Self> {
        finite("q", q)?;
        finite("a", a)?;
        finite("b", b)?;
        Ok(GeneratorRepr { q, a, b, pi })
    }

    pub fn zero() -> Self {
        GeneratorRepr { q: 0.0, a: 0.0, b: 0.0, pi: JumpMeasure::empty() }
    }

    pub fn killing(q: f64) -> Result<Self> {
        GeneratorRepr::new(q, 0.0, 0.0, JumpMeasure::empty())
    }

    pub fn linear(a: f64) -> Result<Self> {
        GeneratorRepr::new(0.0, a, 0.0, JumpMeasure::empty())
    }

    pub fn quadratic(b: f64) -> Result<Self> {
        GeneratorRepr::new(0.0, 0.0, b, JumpMeasure::empty())
    }

    pub fn polynomial(q: f64, a: f64, b: f64) -> Result<Self> {
        GeneratorRepr::new(q, a, b, JumpMeasure::empty())
    }

    pub fn q(&self) -> f64 {
        self.q
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    pub fn pi(&self) -> &JumpMeasure {
        &self.pi
    }

    pub fn is_zero(&self) -> bool {
        self.q == 0.0 && self.a == 0.0 && self.b == 0.0 && self.pi.is_empty()
    }

    /// `φ(z)`. Without jumps `φ` is a polynomial and any finite `z` is
    /// accepted; otherwise `Re z ≥ 0` is required.
    pub fn eval(&self, z: Complex, cfg: &QuadratureConfig) -> Result<Complex> {
        ensure_finite(z, "z")?;
        let poly = -self.q + z * (self.a + self.b * z);
        if self.pi.is_empty() {
            return Ok(poly);
        }
        Ok(poly + self.pi.integrate_kernel(Kernel::Truncated, z, cfg)?.value()?)
    }

    /// Silverstein form of `−f`.
    pub fn from_bernstein(f: &BernsteinRepr) -> Self {
        let near = f.rho().moment(1, Region::NearZero);
        GeneratorRepr { q: f.alpha(), a: -f.beta() - near, b: 0.0, pi: f.rho().clone() }
    }

    pub fn classify(&self, cfg: &QuadratureConfig) -> GeneratorClassification {
        let tail1 = self.pi.moment(1, Region::Tail);
        let near1 = self.pi.moment(1, Region::NearZero);
        let phi_prime0 = if tail1.is_infinite() { f64::NEG_INFINITY } else { self.a - tail1 };
        let phi_second0 = 2.0 * self.b + self.pi.moment(2, Region::All);
        let phi_prime_inf = if self.b > 0.0 || near1.is_infinite() { f64::INFINITY } else { self.a + near1 };
        let has_brfp_0 = self.q == 0.0 && phi_prime0.is_finite();
        let has_brfp_inf = phi_prime_inf.is_finite();
        let dw_point = if has_brfp_0 && phi_prime0 >= 0.0 {
            DwPoint::Zero
        } else if has_brfp_inf && phi_prime_inf <= 0.0 {
            DwPoint::Infinity
        } else {
            self.interior_root(cfg).map_or(DwPoint::Undetermined, DwPoint::Interior)
        };
        GeneratorClassification {
            phi0: -self.q,
            phi_prime0,
            phi_second0,
            phi_prime_inf,
            phi_second_inf: 2.0 * self.b,
            has_brfp_0,
            has_brfp_inf,
            dw_point,
        }
    }

    /// The sign change of the convex real restriction on `(0, ∞)`.
    fn interior_root(&self, cfg: &QuadratureConfig) -> Option<f64> {
        let phi = |x: f64| self.eval(Complex::new(x, 0.0), cfg).ok().map(|v| v.re);
        let mut lo = None;
        let mut hi = None;
        for k in -30..=60 {
            let x = 2f64.powi(k);
            let v = phi(x)?;
            if v < 0.0 {
                lo = Some(x);
            } else if v > 0.0 && lo.is_some() {
                hi = Some(x);
                break;
            }
        }
        let (mut lo, mut hi) = (lo?, hi?);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if phi(mid)? < 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Some(0.5 * (lo + hi))
    }

    pub fn to_legall(&self) -> Result<LeGallRepr> {
        if self.q > 0.0 {
            return Err(Error::NoBrfp { point: "0", reason: format!("phi(0) = {} != 0", -self.q) });
        }
        if let ClassCheck::Fails(w) = self.pi.check_class(IntegrabilityClass::Brfp0) {
            return Err(Error::Integrability(format!("a BRFP at 0 needs int min(x^2, x) pi(dx) < inf: {w}")));
        }
        let tail1 = self.pi.moment(1, Region::Tail);
        if tail1.is_infinite() {
            return Err(Error::Integrability("a BRFP at 0 needs a finite first moment of the tail".into()));
        }
        Ok(LeGallRepr { c: self.a - tail1, b: self.b, pi: self.pi.clone() })
    }

    pub fn to_subordinator_form(&self) -> Result<SubordinatorGenRepr> {
        if self.b > 0.0 {
            return Err(Error::NoBrfp { point: "infinity", reason: format!("quadratic coefficient b = {}", self.b) });
        }
        let near1 = self.pi.moment(1, Region::NearZero);
        if near1.is_infinite() || !self.pi.check_class(IntegrabilityClass::Bernstein).holds() {
            return Err(Error::NoBrfp { point: "infinity", reason: "first moment near 0 diverges".into() });
        }
        Ok(SubordinatorGenRepr { q: self.q, c: self.a + near1, pi: self.pi.clone() })
    }

    pub fn cone_add(&self, other: &GeneratorRepr) -> GeneratorRepr {
        GeneratorRepr { q: self.q + other.q, a: self.a + other.a, b: self.b + other.b, pi: self.pi.sum(&other.pi) }
    }

    pub fn cone_scale(&self, k: f64) -> Result<GeneratorRepr> {
        if !(k >= 0.0) || !k.is_finite() {
            return Err(Error::Domain(format!("cone scale must be finite and >= 0, got {k}")));
        }
        Ok(GeneratorRepr { q: self.q * k, a: self.a * k, b: self.b * k, pi: self.pi.scaled(k)? })
    }

    /// Berkson–Porta factor `P` with respect to the attracting point `tau`.
    pub fn berkson_porta_p(&self, tau: DwPoint, samples: &[Complex], cfg: &QuadratureConfig) -> Result<(Vec<Complex>, f64)> {
        let center = match tau {
            DwPoint::Zero => Some(0.0),
            DwPoint::Interior(x) => Some(x),
            DwPoint::Infinity => None,
            DwPoint::Undetermined => {
                return Err(Error::InvalidInput("Berkson-Porta factor needs a determined attracting point".into()))
            }
        };
        let mut values = Vec::with_capacity(samples.len());
        let mut min_re = f64::INFINITY;
        for &zeta in samples {
            let phi = self.eval(zeta, cfg)?;
            let p = match center {
                None => -phi,
                Some(t) => {
                    if zeta == Complex::new(t, 0.0) {
                        return Err(Error::Domain(format!("sample coincides with the attracting point {t}")));
                    }
                    phi / ((zeta - t) * (zeta + t))
                }
            };
            min_re = min_re.min(p.re);
            values.push(p);
        }
        Ok((values, min_re))
    }
}

/// `φ(ζ) = cζ + bζ² + ∫(e^{−ζx} − 1 + ζx) π(dx)`.
#[derive(Debug, Clone, PartialEq)]
pub struct LeGallRepr {
    pub c: f64,
    pub b: f64,
    pub pi: JumpMeasure,
}

impl LeGallRepr {
    pub fn new(c: f64, b: f64, pi: JumpMeasure) -> Result<Self> {
        finite("c", c)?;
        nonneg("b", b)?;
        if let ClassCheck::Fails(w) = pi.check_class(IntegrabilityClass::Brfp0) {
            return Err(Error::Integrability(w));
        }
        Ok(LeGallRepr { c, b, pi })
    }

    pub fn eval(&self, z: Complex, cfg: &QuadratureConfig) -> Result<Complex> {
        let poly = z * (self.c + self.b * z);
        if self.pi.is_empty() {
            return Ok(poly);
        }
        Ok(poly + self.pi.integrate_kernel(Kernel::Compensated, z, cfg)?.value()?)
    }

    pub fn to_silverstein(&self) -> Result<GeneratorRepr> {
        let tail1 = self.pi.moment(1, Region::Tail);
        if tail1.is_infinite() {
            return Err(Error::Integrability("first moment of the tail diverges".into()));
        }
        GeneratorRepr::new(0.0, self.c + tail1, self.b, self.pi.clone())
    }
}

/// `φ(ζ) = −q + cζ − ∫(1 − e^{−ζx}) π(dx)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SubordinatorGenRepr {
    pub q: f64,
    pub c: f64,
    pub pi: JumpMeasure,
}

impl SubordinatorGenRepr {
    pub fn new(q: f64, c: f64, pi: JumpMeasure) -> Result<Self> {
        nonneg("q", q)?;
        finite("c", c)?;
        if let ClassCheck::Fails(w) = pi.check_class(IntegrabilityClass::Bernstein) {
            return Err(Error::Integrability(w));
        }
        Ok(SubordinatorGenRepr { q, c, pi })
    }

    pub fn eval(&self, z: Complex, cfg: &QuadratureConfig) -> Result<Complex> {
        let poly = -self.q + self.c * z;
        if self.pi.is_empty() {
            return Ok(poly);
        }
        Ok(poly - self.pi.integrate_kernel(Kernel::Bernstein, z, cfg)?.value()?)
    }

    pub fn to_silverstein(&self) -> Result<GeneratorRepr> {
        let near1 = self.pi.moment(1, Region::NearZero);
        GeneratorRepr::new(self.q, self.c - near1, 0.0, self.pi.clone())
    }
}

/// Attracting (Denjoy–Wolff) point of the semigroup.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum DwPoint {
    Zero,
    Infinity,
    Interior(f64),
    Undetermined,
}

/// Boundary data of a generator. Divergent values are `±∞`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GeneratorClassification {
    pub phi0: f64,
    #[serde(serialize_with = "crate::numerics::extended_float::serialize")]
    pub phi_prime0: f64,
    #[serde(serialize_with = "crate::numerics::extended_float::serialize")]
    pub phi_second0: f64,
    #[serde(serialize_with = "crate::numerics::extended_float::serialize")]
    pub phi_prime_inf: f64,
    pub phi_second_inf: f64,
    pub has_brfp_0: bool,
    pub has_brfp_inf: bool,
    pub dw_point: DwPoint,
}

/// Worst value seen for one condition of the membership test.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConditionReport {
    pub label: &'static str,
    pub pass: bool,
    pub worst: f64,
    pub at: f64,
}

impl fmt::Display for ConditionReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let verdict = if self.pass { "ok" } else { "VIOLATED" };
        write!(f, "{}: {verdict} (worst {} at x = {})", self.label, self.worst, self.at)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GeneratorCheck {
    pub pass: bool,
    pub conditions: Vec<ConditionReport>,
}

/// Numeric test of the three generator conditions on the real restriction:
///
/// * `BG-(i)`: `φ` is real on `(0, ∞)`;
/// * `BG-(ii)`: `φ(0⁺) ≤ 0`, probed at `x = 1e-6` together with the linear
///   extrapolation `2φ(1e-6) − φ(2e-6)`; the smaller of the two is tested;
/// * `BG-(iii)`: `φ″` is completely monotone. `φ″` is replaced by the
///   second difference with step `min(h/2, x0/2)`, a positive average of
///   `φ″`.
///
/// Tolerances are `1e-6·(|φ(x0)| + 1)`. Evaluation failures count as
/// violations of the affected condition.
pub fn check_generator_numeric<F: Fn(f64) -> Result<Complex>>(phi: F, grid: &[(f64, f64)], depth: usize) -> GeneratorCheck {
    let mut imag = ConditionReport { label: "BG-(i)", pass: true, worst: 0.0, at: f64::NAN };
    let mut origin = ConditionReport { label: "BG-(ii)", pass: true, worst: f64::NEG_INFINITY, at: 1e-6 };
    let mut convex = ConditionReport { label: "BG-(iii)", pass: true, worst: 0.0, at: f64::NAN };

    let fail = |r: &mut ConditionReport, x: f64| {
        r.pass = false;
        r.worst = f64::NAN;
        r.at = x;
    };

    match (phi(1e-6), phi(2e-6)) {
        (Ok(p1), Ok(p2)) => {
            let v = p1.re.min(2.0 * p1.re - p2.re);
            origin.worst = v;
            origin.pass = v <= 1e-6 * (1.0 + p1.re.abs());
        }
        _ => fail(&mut origin, 1e-6),
    }

    for &(x0, h) in grid {
        let value = match phi(x0) {
            Ok(v) => v,
            Err(_) => {
                fail(&mut imag, x0);
                continue;
            }
        };
        let tol = 1e-6 * (value.norm() + 1.0);
        if value.im.abs() > imag.worst || imag.at.is_nan() {
            imag.worst = imag.worst.max(value.im.abs());
            imag.at = x0;
        }
        if value.im.abs() > tol {
            imag.pass = false;
        }
        let delta = (0.5 * h).min(0.5 * x0);
        let second = |x: f64| -> f64 {
            match (phi(x - delta), phi(x), phi(x + delta)) {
                (Ok(l), Ok(m), Ok(r)) => (l.re - 2.0 * m.re + r.re) / (delta * delta),
                _ => f64::NAN,
            }
        };
        match alternating_differences(second, x0, h, depth) {
            Ok(diffs) => {
                for d in diffs {
                    if d < convex.worst {
                        convex.worst = d;
                        convex.at = x0;
                    }
                    if d < -tol {
                        convex.pass = false;
                    }
                }
            }
            Err(_) => fail(&mut convex, x0),
        }
    }
    let conditions = vec![imag, origin, convex];
    GeneratorCheck { pass: conditions.iter().all(|c| c.pass), conditions }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measure::DensityPanel;

    fn cfg() -> QuadratureConfig {
        QuadratureConfig::default()
    }

    fn c(re: f64, im: f64) -> Complex {
        Complex::new(re, im)
    }

    fn grid() -> Vec<(f64, f64)> {
        (0..10).map(|i| (0.2 + 0.7 * i as f64, 0.1)).collect()
    }

    fn with_pi(q: f64, a: f64, b: f64, pi: JumpMeasure) -> GeneratorRepr {
        GeneratorRepr::new(q, a, b, pi).unwrap()
    }

    const E1: f64 = 0.36787944117144233;

    #[test]
    fn eval_examples() {
        assert_eq!(GeneratorRepr::killing(1.0).unwrap().eval(c(0.4, 3.0), &cfg()).unwrap(), c(-1.0, 0.0));
        assert_eq!(GeneratorRepr::linear(2.0).unwrap().eval(c(1.0, 1.0), &cfg()).unwrap(), c(2.0, 2.0));
        let g = with_pi(0.0, 0.0, 0.0, JumpMeasure::dirac(1.0, 1.0).unwrap());
        assert!((g.eval(c(1.0, 0.0), &cfg()).unwrap() - c(E1 - 1.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn from_bernstein_examples() {
        let g = GeneratorRepr::from_bernstein(&BernsteinRepr::identity());
        assert_eq!(g, GeneratorRepr::linear(-1.0).unwrap());
        let d = BernsteinRepr::new(0.0, 0.0, JumpMeasure::dirac(1.0, 1.0).unwrap()).unwrap();
        let g = GeneratorRepr::from_bernstein(&d);
        assert_eq!((g.q(), g.a(), g.b()), (0.0, 0.0, 0.0));
        let z = c(1.0, 0.0);
        assert!((g.eval(z, &cfg()).unwrap() + d.eval(z, &cfg()).unwrap()).norm() < 1e-15);
        let g = GeneratorRepr::from_bernstein(&BernsteinRepr::affine(3.0, 0.0).unwrap());
        assert_eq!(g, GeneratorRepr::killing(3.0).unwrap());
    }

    #[test]
    fn classify_examples() {
        let lin = GeneratorRepr::linear(2.0).unwrap().classify(&cfg());
        assert!(lin.has_brfp_0 && lin.phi_prime0 == 2.0 && lin.dw_point == DwPoint::Zero);
        let kill = GeneratorRepr::killing(2.0).unwrap().classify(&cfg());
        assert_eq!(kill.phi0, -2.0);
        assert!(!kill.has_brfp_0 && kill.phi_prime_inf == 0.0 && kill.dw_point == DwPoint::Infinity);
        let quad = GeneratorRepr::quadratic(1.0).unwrap().classify(&cfg());
        assert!(quad.has_brfp_0 && quad.phi_prime0 == 0.0 && quad.dw_point == DwPoint::Zero);
        assert_eq!(quad.phi_second_inf, 2.0);
        assert_eq!(quad.phi_prime_inf, f64::INFINITY);
    }

    #[test]
    fn classify_interior_root() {
        let g = GeneratorRepr::polynomial(2.0, 1.0, 0.0).unwrap().classify(&cfg());
        match g.dw_point {
            DwPoint::Interior(x) => assert!((x - 2.0).abs() < 1e-12),
            other => panic!("{other:?}"),
        }
        // ζ² − ζ vanishes at 1.
        let g = GeneratorRepr::polynomial(0.0, -1.0, 1.0).unwrap().classify(&cfg());
        match g.dw_point {
            DwPoint::Interior(x) => assert!((x - 1.0).abs() < 1e-12),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn classify_infinite_moments() {
        let heavy = JumpMeasure::from_panel(DensityPanel::power_law(-2.5, 1.0, 0.0, f64::INFINITY)).unwrap();
        let g = with_pi(0.0, 0.0, 0.0, heavy).classify(&cfg());
        assert_eq!(g.phi_prime_inf, f64::INFINITY);
        assert_eq!(g.phi_second0, f64::INFINITY);
        assert!(!g.has_brfp_inf);
        let fat = JumpMeasure::from_panel(DensityPanel::power_law(-1.5, 1.0, 1.0, f64::INFINITY)).unwrap();
        let g = with_pi(0.0, 0.0, 0.0, fat).classify(&cfg());
        assert_eq!(g.phi_prime0, f64::NEG_INFINITY);
        assert!(!g.has_brfp_0);
    }

    #[test]
    fn legall_examples() {
        let l = GeneratorRepr::linear(2.0).unwrap().to_legall().unwrap();
        assert_eq!((l.c, l.b), (2.0, 0.0));
        let g = with_pi(0.0, 0.0, 0.0, JumpMeasure::dirac(2.0, 1.0).unwrap());
        let l = g.to_legall().unwrap();
        assert_eq!(l.c, -2.0);
        for z in [c(1.0, 0.0), c(0.3, 2.0)] {
            assert!((l.eval(z, &cfg()).unwrap() - g.eval(z, &cfg()).unwrap()).norm() < 1e-14);
        }
        assert!(matches!(GeneratorRepr::killing(1.0).unwrap().to_legall(), Err(Error::NoBrfp { .. })));
    }

    #[test]
    fn subordinator_examples() {
        let s = GeneratorRepr::killing(1.0).unwrap().to_subordinator_form().unwrap();
        assert_eq!((s.q, s.c), (1.0, 0.0));
        let g = with_pi(0.0, 0.0, 0.0, JumpMeasure::dirac(0.5, 2.0).unwrap());
        let s = g.to_subordinator_form().unwrap();
        assert_eq!(s.c, 1.0);
        let z = c(0.7, -1.2);
        assert!((s.eval(z, &cfg()).unwrap() - g.eval(z, &cfg()).unwrap()).norm() < 1e-14);
        assert!(GeneratorRepr::quadratic(1.0).unwrap().to_subordinator_form().is_err());
    }

    #[test]
    fn cone_examples() {
        let sum = GeneratorRepr::linear(1.0).unwrap().cone_add(&GeneratorRepr::quadratic(1.0).unwrap());
        assert_eq!(sum, GeneratorRepr::polynomial(0.0, 1.0, 1.0).unwrap());
        assert_eq!(sum.eval(c(1.0, 0.0), &cfg()).unwrap(), c(2.0, 0.0));
        assert_eq!(GeneratorRepr::killing(2.0).unwrap().cone_scale(0.5).unwrap(), GeneratorRepr::killing(1.0).unwrap());
        assert!(GeneratorRepr::killing(2.0).unwrap().cone_scale(0.0).unwrap().is_zero());
        assert!(GeneratorRepr::killing(2.0).unwrap().cone_scale(-1.0).is_err());
    }

    #[test]
    fn numeric_check_examples() {
        assert!(check_generator_numeric(|x| Ok(c(x * x, 0.0)), &grid(), 5).pass);
        assert!(check_generator_numeric(|x| Ok(c(-(1.0 - (-x).exp()), 0.0)), &grid(), 5).pass);
        let bad = check_generator_numeric(|_| Ok(c(1.0, 0.0)), &grid(), 5);
        assert!(!bad.pass);
        assert!(!bad.conditions[1].pass && bad.conditions[1].label == "BG-(ii)");
        assert!(bad.conditions[0].pass && bad.conditions[2].pass);
        let concave = check_generator_numeric(|x| Ok(c(-x * x, 0.0)), &grid(), 5);
        assert!(!concave.conditions[2].pass);
    }

    #[test]
    fn berkson_porta_examples() {
        let (v, m) = GeneratorRepr::quadratic(1.0).unwrap().berkson_porta_p(DwPoint::Zero, &[c(1.0, 2.0), c(0.1, 0.0)], &cfg()).unwrap();
        assert!(v.iter().all(|p| (p - c(1.0, 0.0)).norm() < 1e-15) && (m - 1.0).abs() < 1e-15);
        let (v, _) = GeneratorRepr::killing(3.0).unwrap().berkson_porta_p(DwPoint::Infinity, &[c(2.0, 5.0)], &cfg()).unwrap();
        assert_eq!(v[0], c(3.0, 0.0));
        let g = GeneratorRepr::polynomial(0.0, 1.0, 1.0).unwrap();
        let (v, m) = g.berkson_porta_p(DwPoint::Zero, &[c(1.0, 1.0)], &cfg()).unwrap();
        assert!((v[0] - c(1.5, -0.5)).norm() < 1e-15 && (m - 1.5).abs() < 1e-15);
        assert!(g.berkson_porta_p(DwPoint::Interior(1.0), &[c(1.0, 0.0)], &cfg()).is_err());
    }

    #[test]
    fn json_forms() {
        let g: GeneratorRepr = serde_json::from_str(r#"{"q":0,"a":1,"b":0,"pi":{"atoms":[],"panels":[]}}"#).unwrap();
        assert_eq!(g, GeneratorRepr::linear(1.0).unwrap());
        let l: GeneratorRepr =
            serde_json::from_str(r#"{"form":"legall","c":-2,"b":0,"pi":{"atoms":[{"x":2,"w":1}]}}"#).unwrap();
        assert_eq!(l.a(), 0.0);
        let s: GeneratorRepr = serde_json::from_str(r#"{"form":"subordinator","q":0,"c":1,"pi":{"atoms":[{"x":0.5,"w":2}]}}"#).unwrap();
        assert_eq!(s.a(), 0.0);
        assert!(serde_json::from_str::<GeneratorRepr>(r#"{"q":-1}"#).is_err());
        assert!(serde_json::from_str::<GeneratorRepr>(r#"{"q":0,"z":1}"#).is_err());
        assert!(serde_json::from_str::<GeneratorRepr>(r#"{"form":"legall","a":1}"#).is_err());
        let raw = parse_unchecked(r#"{"q":-1,"a":0,"b":0}"#).unwrap();
        assert_eq!(raw.eval(c(1.0, 0.0), &cfg()).unwrap(), c(1.0, 0.0));
        let text = serde_json::to_string(&l).unwrap();
        assert_eq!(serde_json::from_str::<GeneratorRepr>(&text).unwrap(), l);
    }
}
