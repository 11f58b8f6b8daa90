//! Jump measures on `(0, ∞)` and the kernel integrals built from them.
//!
//! A [`JumpMeasure`] is a finite list of atoms plus density panels
//! (power law, exponential, tabulated piecewise-linear). Kernel integrals
//! are assembled piece by piece:
//!
//! * near the origin, power-law panels are integrated term-wise from the
//!   Taylor series of the kernel, which keeps `λ^p` singularities exact;
//! * the bulk is covered by Gauss–Legendre on log-spaced subpanels while
//!   `λ|z|` stays moderate;
//! * beyond that the kernel is split into a polynomial part, integrated in
//!   closed form, and an `e^{−λz}` part whose integral is taken along the
//!   ray on which `λz` is real and positive. The rotated integrand decays
//!   exponentially even for `Re z = 0`.

use std::fmt;
use std::rc::Rc;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::numerics::{ensure_closed_half_plane, gauss_legendre_cached, Complex, QuadratureConfig};

/// Point mass `w·δ_x`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Atom {
    pub x: f64,
    pub w: f64,
}

/// A density on an interval of `(0, ∞)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum DensityPanel {
    /// `c·λ^p` on `[a, b]`.
    PowerLaw {
        p: f64,
        c: f64,
        #[serde(default)]
        a: f64,
        #[serde(default = "unbounded", with = "upper_bound")]
        b: f64,
    },
    /// `c·e^{−rλ}` on `[a, b]`.
    Exponential {
        r: f64,
        c: f64,
        #[serde(default)]
        a: f64,
        #[serde(default = "unbounded", with = "upper_bound")]
        b: f64,
    },
    /// Piecewise-linear interpolation of `values` at `nodes`.
    Tabulated { nodes: Vec<f64>, values: Vec<f64> },
}

fn unbounded() -> f64 {
    f64::INFINITY
}

mod upper_bound {
    use super::*;

    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Raw {
        Num(f64),
        Str(String),
    }

    pub fn serialize<S: Serializer>(b: &f64, s: S) -> std::result::Result<S::Ok, S::Error> {
        if b.is_infinite() {
            s.serialize_str("inf")
        } else {
            s.serialize_f64(*b)
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<f64, D::Error> {
        match Raw::deserialize(d)? {
            Raw::Num(v) => Ok(v),
            Raw::Str(s) if s == "inf" => Ok(f64::INFINITY),
            Raw::Str(s) => Err(serde::de::Error::custom(format!("expected a number or \"inf\", got {s:?}"))),
        }
    }
}

impl DensityPanel {
    pub fn power_law(p: f64, c: f64, a: f64, b: f64) -> Self {
        DensityPanel::PowerLaw { p, c, a, b }
    }

    pub fn exponential(r: f64, c: f64, a: f64, b: f64) -> Self {
        DensityPanel::Exponential { r, c, a, b }
    }

    pub fn support(&self) -> (f64, f64) {
        match self {
            DensityPanel::PowerLaw { a, b, .. } | DensityPanel::Exponential { a, b, .. } => (*a, *b),
            DensityPanel::Tabulated { nodes, .. } => (nodes[0], nodes[nodes.len() - 1]),
        }
    }

    /// Density at a point of the support (0 outside).
    pub fn density(&self, x: f64) -> f64 {
        let (a, b) = self.support();
        if x < a || x > b {
            return 0.0;
        }
        match self {
            DensityPanel::PowerLaw { p, c, .. } => c * x.powf(*p),
            DensityPanel::Exponential { r, c, .. } => c * (-r * x).exp(),
            DensityPanel::Tabulated { nodes, values } => {
                let i = nodes.partition_point(|&n| n <= x).clamp(1, nodes.len() - 1);
                let (x0, x1) = (nodes[i - 1], nodes[i]);
                let (v0, v1) = (values[i - 1], values[i]);
                v0 + (v1 - v0) * (x - x0) / (x1 - x0)
            }
        }
    }

    fn is_zero(&self) -> bool {
        match self {
            DensityPanel::PowerLaw { c, .. } | DensityPanel::Exponential { c, .. } => *c == 0.0,
            DensityPanel::Tabulated { values, .. } => values.iter().all(|&v| v == 0.0),
        }
    }

    fn scaled(&self, k: f64) -> Self {
        match self.clone() {
            DensityPanel::PowerLaw { p, c, a, b } => DensityPanel::PowerLaw { p, c: c * k, a, b },
            DensityPanel::Exponential { r, c, a, b } => DensityPanel::Exponential { r, c: c * k, a, b },
            DensityPanel::Tabulated { nodes, values } => {
                DensityPanel::Tabulated { nodes, values: values.into_iter().map(|v| v * k).collect() }
            }
        }
    }

    fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidInput(msg));
        let check_support = |a: f64, b: f64| -> Result<()> {
            if !(a >= 0.0) || !a.is_finite() {
                return bad(format!("panel support start must be finite and >= 0, got {a}"));
            }
            if !(b > a) || b.is_nan() {
                return bad(format!("panel support end must exceed its start, got [{a}, {b}]"));
            }
            Ok(())
        };
        match *self {
            DensityPanel::PowerLaw { p, c, a, b } => {
                check_support(a, b)?;
                if !p.is_finite() || !c.is_finite() || c < 0.0 {
                    return bad(format!("power_law needs finite p and c >= 0, got p = {p}, c = {c}"));
                }
                if b.is_infinite() && p >= -1.0 {
                    return bad(format!("unbounded power_law needs p < -1, got {p}"));
                }
            }
            DensityPanel::Exponential { r, c, a, b } => {
                check_support(a, b)?;
                if !r.is_finite() || r < 0.0 || !c.is_finite() || c < 0.0 {
                    return bad(format!("exponential needs r >= 0 and c >= 0, got r = {r}, c = {c}"));
                }
                if b.is_infinite() && r == 0.0 {
                    return bad("unbounded exponential panel needs r > 0".into());
                }
            }
            DensityPanel::Tabulated { ref nodes, ref values } => {
                if nodes.len() < 2 || nodes.len() != values.len() {
                    return bad("tabulated panel needs at least two nodes and one value per node".into());
                }
                if !(nodes[0] >= 0.0) {
                    return bad(format!("tabulated nodes must be >= 0, got {}", nodes[0]));
                }
                if nodes.iter().any(|x| !x.is_finite()) || nodes.windows(2).any(|w| !(w[1] > w[0])) {
                    return bad("tabulated nodes must be finite and strictly increasing".into());
                }
                if values.iter().any(|v| !v.is_finite() || *v < 0.0) {
                    return bad("tabulated values must be finite and non-negative".into());
                }
            }
        }
        Ok(())
    }

    fn pieces(&self) -> Vec<Piece> {
        match *self {
            DensityPanel::PowerLaw { p, c, a, b } => vec![Piece { shape: Shape::Power { c, p }, lo: a, hi: b }],
            DensityPanel::Exponential { r, c, a, b } => vec![Piece { shape: Shape::Exp { c, r }, lo: a, hi: b }],
            DensityPanel::Tabulated { ref nodes, ref values } => nodes
                .windows(2)
                .zip(values.windows(2))
                .filter(|(_, v)| v[0] != 0.0 || v[1] != 0.0)
                .map(|(x, v)| Piece {
                    shape: Shape::Linear { x0: x[0], v0: v[0], slope: (v[1] - v[0]) / (x[1] - x[0]) },
                    lo: x[0],
                    hi: x[1],
                })
                .collect(),
        }
    }
}

/// Non-negative measure on `(0, ∞)`: atoms plus density panels.
///
/// Atoms are kept sorted by location with duplicates merged; zero-weight
/// atoms and identically vanishing panels are dropped.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(try_from = "RawMeasure", into = "RawMeasure")]
pub struct JumpMeasure {
    atoms: Vec<Atom>,
    panels: Vec<DensityPanel>,
}

#[derive(Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawMeasure {
    #[serde(default)]
    atoms: Vec<Atom>,
    #[serde(default)]
    panels: Vec<DensityPanel>,
}

impl TryFrom<RawMeasure> for JumpMeasure {
    type Error = Error;

    fn try_from(raw: RawMeasure) -> Result<Self> {
        JumpMeasure::new(raw.atoms, raw.panels)
    }
}

impl From<JumpMeasure> for RawMeasure {
    fn from(m: JumpMeasure) -> Self {
        RawMeasure { atoms: m.atoms, panels: m.panels }
    }
}

impl JumpMeasure {
    pub fn new(atoms: Vec<Atom>, panels: Vec<DensityPanel>) -> Result<Self> {
        for a in &atoms {
            if !(a.x > 0.0) || !a.x.is_finite() {
                return Err(Error::InvalidInput(format!("atom location must be finite and > 0, got {}", a.x)));
            }
            if !(a.w >= 0.0) || !a.w.is_finite() {
                return Err(Error::InvalidInput(format!("atom weight must be finite and >= 0, got {}", a.w)));
            }
        }
        for p in &panels {
            p.validate()?;
        }
        let mut atoms: Vec<Atom> = atoms.into_iter().filter(|a| a.w > 0.0).collect();
        atoms.sort_by(|a, b| a.x.total_cmp(&b.x));
        let mut merged: Vec<Atom> = Vec::with_capacity(atoms.len());
        for a in atoms {
            match merged.last_mut() {
                Some(last) if last.x == a.x => last.w += a.w,
                _ => merged.push(a),
            }
        }
        let panels = panels.into_iter().filter(|p| !p.is_zero()).collect();
        Ok(JumpMeasure { atoms: merged, panels })
    }

    pub fn empty() -> Self {
        JumpMeasure::default()
    }

    pub fn dirac(x: f64, w: f64) -> Result<Self> {
        JumpMeasure::new(vec![Atom { x, w }], Vec::new())
    }

    pub fn from_atoms(atoms: &[(f64, f64)]) -> Result<Self> {
        JumpMeasure::new(atoms.iter().map(|&(x, w)| Atom { x, w }).collect(), Vec::new())
    }

    pub fn from_panel(panel: DensityPanel) -> Result<Self> {
        JumpMeasure::new(Vec::new(), vec![panel])
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn panels(&self) -> &[DensityPanel] {
        &self.panels
    }

    /// True for the zero measure.
    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty() && self.panels.is_empty()
    }

    /// `k·m` for `k ≥ 0`.
    pub fn scaled(&self, k: f64) -> Result<Self> {
        if !(k >= 0.0) || !k.is_finite() {
            return Err(Error::Domain(format!("measure scale must be finite and >= 0, got {k}")));
        }
        JumpMeasure::new(
            self.atoms.iter().map(|a| Atom { x: a.x, w: a.w * k }).collect(),
            self.panels.iter().map(|p| p.scaled(k)).collect(),
        )
    }

    /// `m1 + m2`.
    pub fn sum(&self, other: &JumpMeasure) -> Self {
        let mut atoms = self.atoms.clone();
        atoms.extend_from_slice(&other.atoms);
        let mut panels = self.panels.clone();
        panels.extend(other.panels.iter().cloned());
        JumpMeasure::new(atoms, panels).expect("sum of valid measures is valid")
    }

    fn pieces(&self) -> impl Iterator<Item = Piece> + '_ {
        self.panels.iter().flat_map(|p| p.pieces())
    }

    /// `∫_region λ^power m(dλ)`; `+∞` when divergent.
    pub fn moment(&self, power: u32, region: Region) -> f64 {
        let (lo, hi) = region.bounds();
        let atoms: f64 = self
            .atoms
            .iter()
            .filter(|a| region.contains(a.x))
            .map(|a| a.w * a.x.powi(power as i32))
            .sum();
        let mut total = atoms;
        for piece in self.pieces() {
            let a = piece.lo.max(lo);
            let b = piece.hi.min(hi);
            if b > a {
                total += piece.shape.moment(power as i32, a, b);
            }
        }
        total
    }

    /// Decides the integrability class analytically.
    pub fn check_class(&self, class: IntegrabilityClass) -> ClassCheck {
        for panel in &self.panels {
            if let DensityPanel::PowerLaw { p, a, b, .. } = *panel {
                if a == 0.0 {
                    let (need, witness) = match class {
                        IntegrabilityClass::Bernstein => (p > -2.0, "first moment near 0 diverges"),
                        IntegrabilityClass::Generator | IntegrabilityClass::Brfp0 => {
                            (p > -3.0, "second moment near 0 diverges")
                        }
                    };
                    if !need {
                        return ClassCheck::Fails(format!("{witness} (power_law p = {p} on [0, {b}])"));
                    }
                }
                if b.is_infinite() {
                    let (need, witness) = match class {
                        IntegrabilityClass::Bernstein | IntegrabilityClass::Generator => {
                            (p < -1.0, "mass of the tail diverges")
                        }
                        IntegrabilityClass::Brfp0 => (p < -2.0, "first moment of the tail diverges"),
                    };
                    if !need {
                        return ClassCheck::Fails(format!("{witness} (power_law p = {p} on [{a}, inf))"));
                    }
                }
            }
        }
        ClassCheck::Holds
    }

    /// `∫ k(λ, z) m(dλ)` for one of the fixed kernels.
    pub fn integrate_kernel(&self, kernel: Kernel, z: Complex, cfg: &QuadratureConfig) -> Result<KernelIntegral> {
        ensure_closed_half_plane(z, "z")?;
        cfg.validate()?;
        if z == Complex::new(0.0, 0.0) {
            let value = match kernel {
                Kernel::Bernstein | Kernel::Truncated | Kernel::Compensated => 0.0,
                Kernel::Damped(n) => self.moment(n, Region::All),
            };
            if value.is_infinite() {
                let power = kernel.near_zero_power();
                return Ok(KernelIntegral::Divergent(Divergence { power, region: Region::All }));
            }
            return Ok(KernelIntegral::Value(Complex::new(value, 0.0)));
        }
        let mut total: Complex = self.atoms.iter().map(|a| a.w * kernel.value(a.x, z)).sum();
        let mut ctx = Quad::new(cfg);
        for piece in self.pieces() {
            match ctx.piece(&piece, kernel, z)? {
                KernelIntegral::Value(v) => total += v,
                div => return Ok(div),
            }
        }
        Ok(KernelIntegral::Value(total))
    }
}

/// Integration region for [`JumpMeasure::moment`]. An atom at exactly 1
/// belongs to the tail.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Region {
    NearZero,
    Tail,
    All,
}

impl Region {
    fn bounds(self) -> (f64, f64) {
        match self {
            Region::NearZero => (0.0, 1.0),
            Region::Tail => (1.0, f64::INFINITY),
            Region::All => (0.0, f64::INFINITY),
        }
    }

    fn contains(self, x: f64) -> bool {
        match self {
            Region::NearZero => x < 1.0,
            Region::Tail => x >= 1.0,
            Region::All => true,
        }
    }
}

impl fmt::Display for Region {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Region::NearZero => "near 0",
            Region::Tail => "in the tail",
            Region::All => "over (0, inf)",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IntegrabilityClass {
    /// `∫ min{λ, 1} m(dλ) < ∞`
    Bernstein,
    /// `∫ min{λ², 1} m(dλ) < ∞`
    Generator,
    /// `∫ min{λ², λ} m(dλ) < ∞`
    Brfp0,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ClassCheck {
    Holds,
    Fails(String),
}

impl ClassCheck {
    pub fn holds(&self) -> bool {
        matches!(self, ClassCheck::Holds)
    }
}

/// The kernels integrated against jump measures.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Kernel {
    /// `1 − e^{−λz}`
    Bernstein,
    /// `λ^n e^{−λz}`
    Damped(u32),
    /// `e^{−λz} − 1 + λz·1_{(0,1)}(λ)`
    Truncated,
    /// `e^{−λz} − 1 + λz`
    Compensated,
}

impl Kernel {
    pub fn value(self, lambda: f64, z: Complex) -> Complex {
        let w = lambda * z;
        match self {
            Kernel::Bernstein => -exp_remainder(w, 1),
            Kernel::Damped(n) => lambda.powi(n as i32) * (-w).exp(),
            Kernel::Truncated if lambda < 1.0 => exp_remainder(w, 2),
            Kernel::Truncated => exp_remainder(w, 1),
            Kernel::Compensated => exp_remainder(w, 2),
        }
    }

    /// Sign and power of the `e^{−λz}` part: `σ·λ^m·e^{−λz}`.
    fn exp_part(self) -> (f64, i32) {
        match self {
            Kernel::Bernstein => (-1.0, 0),
            Kernel::Damped(n) => (1.0, n as i32),
            Kernel::Truncated | Kernel::Compensated => (1.0, 0),
        }
    }

    /// Moment carrying the small-λ behaviour.
    fn near_zero_power(self) -> u32 {
        match self {
            Kernel::Bernstein => 1,
            Kernel::Damped(n) => n,
            Kernel::Truncated | Kernel::Compensated => 2,
        }
    }
}

/// `e^{−w} − Σ_{k<n} (−w)^k/k!`, accurate for small `|w|`.
pub fn exp_remainder(w: Complex, n: u32) -> Complex {
    let size = w.norm_sqr();
    if size < 1.0 {
        // Horner form of (−w)^n/n! · Σ_j (−w)^j n!/(n+j)!, truncated where
        // |w|^j/j! < 1e-18.
        let terms = if size < 0.01 {
            11
        } else if size < 0.25 {
            16
        } else {
            20
        };
        let mut tail = Complex::new(1.0, 0.0);
        for j in (1..=terms).rev() {
            tail = 1.0 - w * tail / (n + j) as f64;
        }
        let mut lead = Complex::new(1.0, 0.0);
        for k in 1..=n {
            lead *= -w / k as f64;
        }
        lead * tail
    } else {
        let mut poly = Complex::new(0.0, 0.0);
        let mut term = Complex::new(1.0, 0.0);
        for k in 0..n {
            if k > 0 {
                term *= -w / k as f64;
            }
            poly += term;
        }
        (-w).exp() - poly
    }
}

/// A divergent moment: `∫_region λ^power m(dλ) = ∞`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Divergence {
    pub power: u32,
    pub region: Region,
}

impl fmt::Display for Divergence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "moment of order {} {} diverges", self.power, self.region)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum KernelIntegral {
    Value(Complex),
    Divergent(Divergence),
}

impl KernelIntegral {
    /// The value, or an integrability error naming the divergent moment.
    pub fn value(self) -> Result<Complex> {
        match self {
            KernelIntegral::Value(v) => Ok(v),
            KernelIntegral::Divergent(d) => Err(Error::Integrability(d.to_string())),
        }
    }
}

// Analytic pieces of a density: `g(λ)·e^{−rλ}` with `g` holomorphic on
// the right half-plane.
#[derive(Debug, Clone, Copy)]
enum Shape {
    Power { c: f64, p: f64 },
    Exp { c: f64, r: f64 },
    Linear { x0: f64, v0: f64, slope: f64 },
}

#[derive(Debug, Clone, Copy)]
struct Piece {
    shape: Shape,
    lo: f64,
    hi: f64,
}

impl Shape {
    fn rate(&self) -> f64 {
        match *self {
            Shape::Exp { r, .. } => r,
            _ => 0.0,
        }
    }

    fn density(&self, x: f64) -> f64 {
        match *self {
            Shape::Power { c, p } => c * x.powf(p),
            Shape::Exp { c, r } => c * (-r * x).exp(),
            Shape::Linear { x0, v0, slope } => v0 + slope * (x - x0),
        }
    }

    /// `g(λ)`, the density without its exponential factor.
    fn prefactor(&self, lambda: Complex) -> Complex {
        match *self {
            Shape::Power { c, p } => c * lambda.powf(p),
            Shape::Exp { c, .. } => Complex::new(c, 0.0),
            Shape::Linear { x0, v0, slope } => v0 + slope * (lambda - x0),
        }
    }

    fn growth(&self) -> f64 {
        match *self {
            Shape::Power { p, .. } => p,
            Shape::Exp { .. } => 0.0,
            Shape::Linear { .. } => 1.0,
        }
    }

    /// `∫_a^b λ^m density(λ) dλ`, `+∞` if divergent.
    fn moment(&self, m: i32, a: f64, b: f64) -> f64 {
        match *self {
            Shape::Power { c, p } => c * power_integral(p + m as f64 + 1.0, a, b),
            Shape::Exp { c, r } => {
                if r == 0.0 {
                    c * power_integral(m as f64 + 1.0, a, b)
                } else if b.is_finite() && r * (b - a) <= 1.0 {
                    gl_real(|x| x.powi(m) * (-r * x).exp(), a, b, 16) * c
                } else {
                    let g = |x: f64| -> f64 {
                        if x.is_infinite() {
                            return 0.0;
                        }
                        let mut sum = 0.0;
                        let mut fact = 1.0;
                        for j in 0..=m {
                            if j > 0 {
                                fact *= (m - j + 1) as f64;
                            }
                            sum += fact * x.powi(m - j) / r.powi(j + 1);
                        }
                        (-r * x).exp() * sum
                    };
                    c * (g(a) - g(b))
                }
            }
            Shape::Linear { .. } => gl_real(|x| x.powi(m) * self.density(x), a, b, 4),
        }
    }
}

/// `∫_a^b λ^{e−1} dλ` with `0 ≤ a < b ≤ ∞`; `+∞` when divergent.
fn power_integral(e: f64, a: f64, b: f64) -> f64 {
    if a == 0.0 && e <= 0.0 {
        return f64::INFINITY;
    }
    if b.is_infinite() {
        return if e < 0.0 { -a.powf(e) / e } else { f64::INFINITY };
    }
    if a == 0.0 {
        return b.powf(e) / e;
    }
    if e == 0.0 {
        return (b / a).ln();
    }
    b.powf(e) * (-(e * (a / b).ln()).exp_m1()) / e
}

fn gl_real<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, n: usize) -> f64 {
    let rule = gauss_legendre_cached(n);
    let half = 0.5 * (b - a);
    let mid = 0.5 * (b + a);
    rule.0.iter().zip(&rule.1).map(|(x, w)| w * f(mid + half * x)).sum::<f64>() * half
}

struct Quad<'a> {
    cfg: &'a QuadratureConfig,
    rule: Rc<(Vec<f64>, Vec<f64>)>,
    panels: usize,
}

impl<'a> Quad<'a> {
    fn new(cfg: &'a QuadratureConfig) -> Self {
        Quad { cfg, rule: gauss_legendre_cached(cfg.panel_order), panels: 0 }
    }

    fn count(&mut self) -> Result<()> {
        self.panels += 1;
        if self.panels > self.cfg.max_panels {
            Err(Error::Quadrature(format!("exceeded max_panels = {}", self.cfg.max_panels)))
        } else {
            Ok(())
        }
    }

    fn gl<F: Fn(f64) -> Complex>(&mut self, f: &F, a: f64, b: f64) -> Result<Complex> {
        self.count()?;
        let half = 0.5 * (b - a);
        let mid = 0.5 * (b + a);
        let mut acc = Complex::new(0.0, 0.0);
        for (x, w) in self.rule.0.iter().zip(&self.rule.1) {
            acc += *w * f(mid + half * x);
        }
        Ok(acc * half)
    }

    /// Log-spaced panels on `[a, b]`, about two per decade, each at most
    /// `max_width` wide.
    fn gl_log<F: Fn(f64) -> Complex>(&mut self, f: &F, a: f64, b: f64, max_width: f64) -> Result<Complex> {
        let mut acc = Complex::new(0.0, 0.0);
        let mut start = a;
        if a == 0.0 {
            start = b / 16.0;
            acc += self.gl(f, 0.0, start)?;
        }
        let decades = (b / start).log10();
        let n = (2.0 * decades).ceil().max(1.0) as usize;
        let ratio = (b / start).powf(1.0 / n as f64);
        let mut lo = start;
        for i in 0..n {
            let hi = if i + 1 == n { b } else { lo * ratio };
            let parts = ((hi - lo) / max_width).ceil().max(1.0) as usize;
            if parts > self.cfg.max_panels {
                return Err(Error::Quadrature(format!("exceeded max_panels = {}", self.cfg.max_panels)));
            }
            let step = (hi - lo) / parts as f64;
            for j in 0..parts {
                let x0 = lo + j as f64 * step;
                let x1 = if j + 1 == parts { hi } else { x0 + step };
                acc += self.gl(f, x0, x1)?;
            }
            lo = hi;
        }
        Ok(acc)
    }

    fn piece(&mut self, piece: &Piece, kernel: Kernel, z: Complex) -> Result<KernelIntegral> {
        let mut total = Complex::new(0.0, 0.0);
        let mut lo = piece.lo;
        let hi = piece.hi;
        let zn = z.norm();

        if let Shape::Power { c, p } = piece.shape {
            let eps = (0.5 / zn).min(hi).min(1.0);
            if lo < eps {
                match power_series(c, p, lo, eps, kernel, z) {
                    KernelIntegral::Value(v) => total += v,
                    div => return Ok(div),
                }
                lo = eps;
            }
        }
        if lo >= hi {
            return Ok(KernelIntegral::Value(total));
        }

        // Past `λ|z| = 2` the polynomial/exponential split is well conditioned;
        // exponential densities are negligible past `lo + 40/r` anyway.
        let rate = piece.shape.rate();
        let kappa = zn + rate;
        let reach = if rate > 0.0 { (2.0 / zn).min(lo + 40.0 / rate) } else { 2.0 / zn };
        let split = reach.max(lo).min(hi);
        if split > lo {
            let shape = piece.shape;
            let f = move |x: f64| shape.density(x) * kernel.value(x, z);
            let max_width = self.cfg.panel_order as f64 / (2.0 * kappa);
            if kernel == Kernel::Truncated && lo < 1.0 && 1.0 < split {
                total += self.gl_log(&f, lo, 1.0, max_width)?;
                total += self.gl_log(&f, 1.0, split, max_width)?;
            } else {
                total += self.gl_log(&f, lo, split, max_width)?;
            }
        }
        if split < hi {
            match self.far(piece, kernel, z, split)? {
                KernelIntegral::Value(v) => total += v,
                div => return Ok(div),
            }
        }
        Ok(KernelIntegral::Value(total))
    }

    /// `∫_x^hi` where `λ|z| ≥ 2`: closed-form polynomial part plus the
    /// exponential part along the rotated ray.
    fn far(&mut self, piece: &Piece, kernel: Kernel, z: Complex, x: f64) -> Result<KernelIntegral> {
        let hi = piece.hi;
        let shape = piece.shape;
        let tail = |power| KernelIntegral::Divergent(Divergence { power, region: Region::Tail });
        let m0 = || shape.moment(0, x, hi);
        let poly = match kernel {
            Kernel::Damped(_) => Complex::new(0.0, 0.0),
            Kernel::Bernstein => {
                let m0 = m0();
                if m0.is_infinite() {
                    return Ok(tail(0));
                }
                Complex::new(m0, 0.0)
            }
            Kernel::Truncated | Kernel::Compensated => {
                let m0 = m0();
                if m0.is_infinite() {
                    return Ok(tail(0));
                }
                let upper = if kernel == Kernel::Truncated { hi.min(1.0) } else { hi };
                let m1 = if upper > x { shape.moment(1, x, upper) } else { 0.0 };
                if m1.is_infinite() {
                    return Ok(tail(1));
                }
                -m0 + z * m1
            }
        };
        let (sigma, m) = kernel.exp_part();
        let s = z + shape.rate();
        if hi.is_infinite() && s.re == 0.0 && shape.moment(m, x, hi).is_infinite() {
            return Ok(tail(m as u32));
        }
        let mut exp_part = self.rotated(shape, m, s, x)?;
        if hi.is_finite() {
            exp_part -= self.rotated(shape, m, s, hi)?;
        }
        Ok(KernelIntegral::Value(poly + sigma * exp_part))
    }

    /// `∫_x^∞ g(λ) λ^m e^{−λs} dλ`: in closed form when `g` is a
    /// polynomial, otherwise along `λ = x + uω`, `ω = s̄/|s|`.
    fn rotated(&mut self, shape: Shape, m: i32, s: Complex, x: f64) -> Result<Complex> {
        match shape {
            Shape::Exp { c, .. } => return Ok(c * upper_gamma(m, s, x)),
            Shape::Linear { x0, v0, slope } => {
                return Ok((v0 - slope * x0) * upper_gamma(m, s, x) + slope * upper_gamma(m + 1, s, x))
            }
            Shape::Power { .. } => {}
        }
        let sn = s.norm();
        let omega = s.conj() / sn;
        let factor = omega * (-x * s).exp();
        if factor == Complex::new(0.0, 0.0) {
            return Ok(factor);
        }
        let f = move |u: f64| {
            let lambda = x + u * omega;
            shape.prefactor(lambda) * lambda.powi(m) * (-u * sn).exp()
        };
        let growth = (shape.growth() + m as f64).max(0.0);
        let cap = 4.0 / sn;
        let mut width = 0.5 * x.min(1.0 / sn);
        let mut u0 = 0.0;
        let mut acc = Complex::new(0.0, 0.0);
        loop {
            let u1 = u0 + width;
            acc += self.gl(&f, u0, u1)?;
            if u1 * sn >= 30.0f64.max(4.0 * growth) {
                let rest = f(u1).norm() * 2.0 / sn;
                if rest <= 1e-17 * acc.norm() || rest == 0.0 {
                    break;
                }
            }
            u0 = u1;
            width = (2.0 * width).min(cap);
        }
        Ok(factor * acc)
    }
}

/// `∫_x^∞ λ^m e^{−sλ} dλ = e^{−sx} Σ_j m!/(m−j)! x^{m−j} / s^{j+1}`.
fn upper_gamma(m: i32, s: Complex, x: f64) -> Complex {
    if x == 0.0 {
        return (1..=m).fold(1.0 / s, |acc, j| acc * j as f64 / s);
    }
    let decay = (-x * s).exp();
    if decay == Complex::new(0.0, 0.0) {
        return decay;
    }
    let mut term = Complex::new(x.powi(m), 0.0) / s;
    let mut acc = term;
    for j in 1..=m {
        term *= (m - j + 1) as f64 / (x * s);
        acc += term;
    }
    decay * acc
}

/// Term-wise integral of `c·λ^p·k(λ, z)` over `[a, b]` with `b|z| ≤ 1/2`,
/// `b ≤ 1`.
fn power_series(c: f64, p: f64, a: f64, b: f64, kernel: Kernel, z: Complex) -> KernelIntegral {
    let (sigma, k0, shift) = match kernel {
        Kernel::Bernstein => (-1.0, 1, 0),
        Kernel::Damped(n) => (1.0, 0, n),
        Kernel::Truncated | Kernel::Compensated => (1.0, 2, 0),
    };
    if a == 0.0 && p + (k0 + shift) as f64 + 1.0 <= 0.0 {
        return KernelIntegral::Divergent(Divergence { power: kernel.near_zero_power(), region: Region::NearZero });
    }
    let mut coef = Complex::new(1.0, 0.0);
    for k in 1..=k0 {
        coef *= -z / k as f64;
    }
    let mut acc = Complex::new(0.0, 0.0);
    let mut k = k0;
    loop {
        let term = coef * power_integral(p + (k + shift) as f64 + 1.0, a, b);
        acc += term;
        if (k > k0 + 2 && term.norm() <= 1e-18 * acc.norm()) || k > k0 + 60 {
            break;
        }
        k += 1;
        coef *= -z / k as f64;
    }
    KernelIntegral::Value(sigma * c * acc)
}
