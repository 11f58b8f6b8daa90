//! Branching mechanisms and the transform-level view of inhomogeneous
//! continuous-state branching processes.
//!
//! With `X_s = x`, `E[exp(−ζ X_t)] = exp(−x v_{s,t}(ζ))` where `v` is the
//! reverse evolution family of the field of mechanisms.

use serde::{Deserialize, Serialize};
use statrs::function::gamma::gamma;

use crate::error::{Error, Result};
use crate::evolution::HerglotzField;
use crate::generator::GeneratorRepr;
use crate::measure::{Atom, DensityPanel, JumpMeasure};
use crate::numerics::{ensure_closed_half_plane, Complex, SolverConfig};

/// Offset used to reach `Re ζ = 0` from inside the half-plane.
pub const BOUNDARY_OFFSET: f64 = 1e-8;

/// Named branching mechanisms.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum MechanismSpec {
    /// `φ(ζ) = bζ²`.
    Feller { b: f64 },
    /// `φ(ζ) = aζ`.
    Linear { a: f64 },
    /// `φ(ζ) = −q`.
    Killing { q: f64 },
    /// `φ(ζ) = scale·ζ^{1+alpha}`.
    Stable { alpha: f64, scale: f64 },
    /// Jumps at total rate `rate` with sizes drawn from `jump_atoms`
    /// (weights are normalized): `φ(ζ) = rate·E[e^{−ζJ} − 1]`.
    CompoundPoisson { rate: f64, jump_atoms: Vec<Atom> },
}

impl MechanismSpec {
    pub fn generator(&self) -> Result<GeneratorRepr> {
        match *self {
            MechanismSpec::Feller { b } => {
                if !(b > 0.0) {
                    return Err(Error::InvalidInput(format!("feller needs b > 0, got {b}")));
                }
                GeneratorRepr::quadratic(b)
            }
            MechanismSpec::Linear { a } => GeneratorRepr::linear(a),
            MechanismSpec::Killing { q } => {
                if !(q > 0.0) {
                    return Err(Error::InvalidInput(format!("killing needs q > 0, got {q}")));
                }
                GeneratorRepr::killing(q)
            }
            MechanismSpec::Stable { alpha, scale } => stable_generator(alpha, scale),
            MechanismSpec::CompoundPoisson { rate, ref jump_atoms } => compound_poisson_generator(rate, jump_atoms),
        }
    }
}

fn stable_generator(alpha: f64, scale: f64) -> Result<GeneratorRepr> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::InvalidInput(format!("stable needs 0 < alpha < 1, got {alpha}")));
    }
    if !(scale > 0.0 && scale.is_finite()) {
        return Err(Error::InvalidInput(format!("stable needs scale > 0, got {scale}")));
    }
    // ∫(e^{−ζx} − 1 + ζx) x^{−2−α} dx = Γ(−1−α) ζ^{1+α}; the part of the
    // compensator beyond x = 1 moves into the drift.
    let c = scale / gamma(-1.0 - alpha);
    let pi = JumpMeasure::from_panel(DensityPanel::power_law(-2.0 - alpha, c, 0.0, f64::INFINITY))?;
    GeneratorRepr::new(0.0, c / alpha, 0.0, pi)
}

fn compound_poisson_generator(rate: f64, atoms: &[Atom]) -> Result<GeneratorRepr> {
    if !(rate > 0.0 && rate.is_finite()) {
        return Err(Error::InvalidInput(format!("compound_poisson needs rate > 0, got {rate}")));
    }
    if atoms.is_empty() || atoms.iter().any(|a| !(a.w > 0.0) || !(a.x > 0.0)) {
        return Err(Error::InvalidInput("compound_poisson needs jump atoms with x > 0 and w > 0".into()));
    }
    let total: f64 = atoms.iter().map(|a| a.w).sum();
    let scaled: Vec<(f64, f64)> = atoms.iter().map(|a| (a.x, rate * a.w / total)).collect();
    let drift = -scaled.iter().filter(|(x, _)| *x < 1.0).map(|(x, w)| x * w).sum::<f64>();
    GeneratorRepr::new(0.0, drift, 0.0, JumpMeasure::from_atoms(&scaled)?)
}

/// A field whose slice `k` is the mechanism `mechanisms[k]`.
pub fn mechanism_field(breakpoints: Vec<f64>, mechanisms: &[MechanismSpec]) -> Result<HerglotzField> {
    let slices = mechanisms.iter().map(MechanismSpec::generator).collect::<Result<Vec<_>>>()?;
    HerglotzField::new(breakpoints, slices)
}

/// `v_{s,t}(ζ)` on the closed half-plane.
pub fn laplace_exponent(field: &HerglotzField, s: f64, t: f64, zeta: Complex, cfg: &SolverConfig) -> Result<Complex> {
    ensure_closed_half_plane(zeta, "zeta")?;
    if zeta.re > 0.0 {
        return field.reverse_evolve(s, t, zeta, cfg);
    }
    if zeta == Complex::new(0.0, 0.0) && no_killing(field, s, t)? {
        return Ok(Complex::new(0.0, 0.0));
    }
    let near = field.reverse_evolve(s, t, zeta + BOUNDARY_OFFSET, cfg)?;
    let far = field.reverse_evolve(s, t, zeta + 2.0 * BOUNDARY_OFFSET, cfg)?;
    Ok(2.0 * near - far)
}

fn no_killing(field: &HerglotzField, s: f64, t: f64) -> Result<bool> {
    if !(0.0 <= s && s <= t && t <= field.span()) {
        return Err(Error::Domain(format!("need 0 <= s <= t <= {}, got s = {s}, t = {t}", field.span())));
    }
    let b = field.breakpoints();
    Ok(field.slices().iter().enumerate().all(|(k, g)| g.q() == 0.0 || b[k + 1] <= s || b[k] >= t))
}

/// `E[exp(−ζ X_t) | X_s = x] = exp(−x v_{s,t}(ζ))`.
pub fn transition_laplace(
    field: &HerglotzField,
    s: f64,
    t: f64,
    x: f64,
    zeta: Complex,
    cfg: &SolverConfig,
) -> Result<Complex> {
    check_mass(x)?;
    if x == 0.0 {
        return Ok(Complex::new(1.0, 0.0));
    }
    Ok((-x * laplace_exponent(field, s, t, zeta, cfg)?).exp())
}

/// `E[X_t | X_s = x]`.
pub fn conditional_mean(field: &HerglotzField, s: f64, t: f64, x: f64) -> Result<f64> {
    check_mass(x)?;
    Ok(x * field.brfp0_derivative(s, t)?)
}

/// `Var[X_t | X_s = x] = −x v″_{s,t}(0)`; `+∞` when a slice has infinite
/// `φ″(0)`.
pub fn conditional_variance(field: &HerglotzField, s: f64, t: f64, x: f64) -> Result<f64> {
    check_mass(x)?;
    let second = field.reverse_brfp0_second_derivative(s, t)?;
    if x == 0.0 {
        return Ok(0.0);
    }
    Ok(-x * second)
}

fn check_mass(x: f64) -> Result<()> {
    if !(x >= 0.0 && x.is_finite()) {
        return Err(Error::Domain(format!("initial mass must be finite and >= 0, got {x}")));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::QuadratureConfig;

    fn c(re: f64, im: f64) -> Complex {
        Complex::new(re, im)
    }

    fn cfg() -> SolverConfig {
        SolverConfig::default()
    }

    fn single(m: MechanismSpec, t: f64) -> HerglotzField {
        mechanism_field(vec![0.0, t], &[m]).unwrap()
    }

    #[test]
    fn stable_constant_matches_power() {
        let quad = QuadratureConfig::default();
        for alpha in [0.25, 0.5, 0.75] {
            let g = MechanismSpec::Stable { alpha, scale: 1.3 }.generator().unwrap();
            for x in [0.01, 0.5, 1.0, 3.0, 40.0] {
                let got = g.eval(c(x, 0.0), &quad).unwrap();
                let want = 1.3 * x.powf(1.0 + alpha);
                assert!((got.re - want).abs() <= 1e-9 * want, "alpha {alpha} x {x}: {got} vs {want}");
                assert!(got.im.abs() < 1e-12 * want);
            }
            let z = c(0.7, 2.0);
            let got = g.eval(z, &quad).unwrap();
            let want = 1.3 * z.powf(1.0 + alpha);
            assert!((got - want).norm() <= 1e-9 * want.norm());
        }
    }

    #[test]
    fn laplace_exponent_examples() {
        let f = single(MechanismSpec::Feller { b: 2.0 }, 1.5);
        let z = c(1.0, 0.5);
        let v = laplace_exponent(&f, 0.0, 1.5, z, &cfg()).unwrap();
        assert!((v - z / (1.0 + 3.0 * z)).norm() < 1e-14);
        let k = single(MechanismSpec::Killing { q: 2.0 }, 1.0);
        let v = laplace_exponent(&k, 0.0, 1.0, c(0.5, 0.0), &cfg()).unwrap();
        assert!((v.re - 2.5).abs() < 1e-14);
        assert_eq!(laplace_exponent(&f, 0.0, 1.5, c(0.0, 0.0), &cfg()).unwrap(), c(0.0, 0.0));
        let v = laplace_exponent(&k, 0.0, 1.0, c(0.0, 0.0), &cfg()).unwrap();
        assert!((v.re - 2.0).abs() < 1e-12);
    }

    #[test]
    fn boundary_offset_on_imaginary_axis() {
        let f = single(MechanismSpec::Feller { b: 1.0 }, 1.0);
        let z = c(0.0, 2.0);
        let v = laplace_exponent(&f, 0.0, 1.0, z, &cfg()).unwrap();
        assert!((v - z / (1.0 + z)).norm() < 1e-12);
        assert!(laplace_exponent(&f, 0.0, 1.0, c(-0.1, 0.0), &cfg()).is_err());
    }

    #[test]
    fn transition_examples() {
        let f = single(MechanismSpec::Feller { b: 1.0 }, 1.0);
        assert_eq!(transition_laplace(&f, 0.0, 1.0, 0.0, c(1.0, 0.0), &cfg()).unwrap(), c(1.0, 0.0));
        let p = transition_laplace(&f, 0.0, 1.0, 1.0, c(1.0, 0.0), &cfg()).unwrap();
        assert!((p.re - 0.6065306597126334).abs() < 1e-14);
        let k = single(MechanismSpec::Killing { q: 2.0 }, 1.0);
        let p = transition_laplace(&k, 0.0, 1.0, 1.0, c(0.0, 0.0), &cfg()).unwrap();
        assert!((p.re - (-2.0f64).exp()).abs() < 1e-12);
    }

    #[test]
    fn moment_examples() {
        let l = single(MechanismSpec::Linear { a: 1.0 }, 1.0);
        assert!((conditional_mean(&l, 0.0, 1.0, 3.0).unwrap() - 3.0 * (-1.0f64).exp()).abs() < 1e-15);
        assert_eq!(conditional_mean(&l, 0.0, 1.0, 0.0).unwrap(), 0.0);
        let f = single(MechanismSpec::Feller { b: 1.0 }, 2.0);
        assert_eq!(conditional_mean(&f, 0.3, 1.9, 2.5).unwrap(), 2.5);
        assert!((conditional_variance(&f, 0.0, 1.0, 1.0).unwrap() - 2.0).abs() < 1e-15);
        assert_eq!(conditional_variance(&l, 0.0, 1.0, 4.0).unwrap(), 0.0);
        let s = single(MechanismSpec::Stable { alpha: 0.5, scale: 1.0 }, 1.0);
        assert_eq!(conditional_variance(&s, 0.0, 1.0, 1.0).unwrap(), f64::INFINITY);
        let k = single(MechanismSpec::Killing { q: 1.0 }, 1.0);
        assert!(matches!(conditional_mean(&k, 0.0, 1.0, 1.0), Err(Error::NoBrfp { .. })));
    }

    #[test]
    fn compound_poisson_is_rate_times_jump_transform() {
        let m = MechanismSpec::CompoundPoisson {
            rate: 2.0,
            jump_atoms: vec![Atom { x: 0.5, w: 1.0 }, Atom { x: 2.0, w: 3.0 }],
        };
        let g = m.generator().unwrap();
        let z = c(0.4, 1.0);
        let want = 2.0 * (0.25 * ((-0.5 * z).exp() - 1.0) + 0.75 * ((-2.0 * z).exp() - 1.0));
        assert!((g.eval(z, &QuadratureConfig::default()).unwrap() - want).norm() < 1e-14);
    }

    #[test]
    fn mechanism_json() {
        let m: MechanismSpec = serde_json::from_str(r#"{"kind":"stable","alpha":0.5,"scale":1}"#).unwrap();
        assert_eq!(m, MechanismSpec::Stable { alpha: 0.5, scale: 1.0 });
        assert!(serde_json::from_str::<MechanismSpec>(r#"{"kind":"feller","b":1,"extra":2}"#).is_err());
        assert!(MechanismSpec::Feller { b: 0.0 }.generator().is_err());
        assert!(MechanismSpec::Stable { alpha: 1.0, scale: 1.0 }.generator().is_err());
    }
}
