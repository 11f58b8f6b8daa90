//! Acceptance suite. Prints one line per criterion and exits non-zero if
//! any criterion fails.

mod common;

use std::process::{Command, ExitCode};
use std::time::Instant;

use loewner::bernstein::{is_bernstein_numeric, BernsteinRepr};
use loewner::branching::{conditional_variance, laplace_exponent, mechanism_field, transition_laplace, MechanismSpec};
use loewner::evolution::{HerglotzField, InverseOutcome};
use loewner::flow::{euler_flow, flow, ode_flow, semigroup_residual, trotter_flow};
use loewner::generator::GeneratorRepr;
use loewner::numerics::{QuadratureConfig, SolverConfig};
use loewner::Complex;

type Outcome = Result<String, String>;

fn c(re: f64, im: f64) -> Complex {
    Complex::new(re, im)
}

fn cfg() -> SolverConfig {
    SolverConfig::default()
}

fn rel(got: Complex, want: Complex) -> f64 {
    (got - want).norm() / want.norm()
}

fn ensure(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn shown<T, E: std::fmt::Display>(r: Result<T, E>) -> Result<T, String> {
    r.map_err(|e| e.to_string())
}

fn riccati(t: f64, z: Complex) -> Complex {
    (-t).exp() * z / (1.0 + (1.0 - (-t).exp()) * z)
}

const TIMES: [f64; 3] = [0.1, 1.0, 5.0];

fn points() -> [Complex; 3] {
    [c(1.0, 0.0), c(2.0, 1.0), c(0.1, 3.0)]
}

fn elementary_flows() -> Outcome {
    let start = Instant::now();
    let mut tight = cfg();
    tight.ode.atol = 1e-16;
    let mut worst = 0.0_f64;
    let mut ode = 0.0_f64;
    for p in [0.5, 1.0, 2.0] {
        for t in TIMES {
            for z in points() {
                let cases = [
                    (GeneratorRepr::linear(p), (-p * t).exp() * z),
                    (GeneratorRepr::quadratic(p), z / (1.0 + p * t * z)),
                    (GeneratorRepr::killing(p), z + p * t),
                ];
                for (g, want) in cases {
                    let g = shown(g)?;
                    worst = worst.max(rel(shown(flow(&g, t, z, &cfg()))?.w, want));
                    ode = ode.max(rel(shown(ode_flow(&g, t, z, &tight))?.w, want));
                }
            }
        }
    }
    let elapsed = start.elapsed().as_secs_f64();
    ensure(
        worst <= 1e-9 && ode <= 1e-9 && elapsed < 1.0,
        format!("worst relative error {worst:.2e}, ODE at atol 1e-16 {ode:.2e}, {elapsed:.3} s"),
    )
}

fn riccati_oracle() -> Outcome {
    let g = shown(GeneratorRepr::polynomial(0.0, 1.0, 1.0))?;
    let mut worst = 0.0_f64;
    for t in TIMES {
        for z in points() {
            worst = worst.max(rel(shown(flow(&g, t, z, &cfg()))?.w, riccati(t, z)));
            worst = worst.max(rel(shown(ode_flow(&g, t, z, &cfg()))?.w, riccati(t, z)));
        }
    }
    ensure(worst <= 1e-8, format!("worst relative error {worst:.2e}"))
}

fn euler_convergence() -> Outcome {
    let id = BernsteinRepr::identity();
    let quad = QuadratureConfig::default();
    let err = |n: usize| -> Result<f64, String> {
        Ok((shown(euler_flow(&id, 1.0, n, c(1.0, 0.0), &quad))? - std::f64::consts::E).norm())
    };
    let ratios = [64, 128, 256].map(|n| Ok::<_, String>(err(2 * n)? / err(n)?));
    let ratios: Vec<f64> = ratios.into_iter().collect::<Result<_, _>>()?;
    let ok = ratios.iter().all(|r| (0.4..=0.6).contains(r));
    ensure(ok, format!("err(2n)/err(n) = {:.4?}", ratios))
}

fn trotter_convergence() -> Outcome {
    let g1 = shown(GeneratorRepr::linear(1.0))?;
    let g2 = shown(GeneratorRepr::quadratic(1.0))?;
    let want = riccati(1.0, c(1.0, 0.0));
    let errs: Vec<f64> = [64, 128, 256, 512]
        .into_iter()
        .map(|n| Ok((shown(trotter_flow(&g1, &g2, 1.0, n, c(1.0, 0.0), &cfg()))? - want).norm()))
        .collect::<Result<_, String>>()?;
    let decreasing = errs.windows(2).all(|w| w[1] < w[0]);
    ensure(decreasing && errs[3] <= 5e-3, format!("errors [{}]", errs.iter().map(|e| format!("{e:.3e}")).collect::<Vec<_>>().join(", ")))
}

fn algebra() -> Outcome {
    let mut r = common::rng(5);
    let (mut sg, mut ef, mut re) = (0.0_f64, 0.0_f64, 0.0_f64);
    for _ in 0..100 {
        let g = common::generator(&mut r, true);
        let [s, t] = common::times::<2>(&mut r, 2.0);
        sg = sg.max(shown(semigroup_residual(&g, s, t, common::point(&mut r), &cfg()))?);
    }
    for _ in 0..100 {
        let f = common::field(&mut r, 4, true);
        let [s, t, u] = common::times::<3>(&mut r, f.span());
        let z = common::point(&mut r);
        ef = ef.max(shown(f.ef2_residual(s, t, u, z, &cfg()))?);
        re = re.max(shown(f.ref2_residual(s, t, u, z, &cfg()))?);
    }
    let ok = sg <= 1e-7 && ef <= 1e-7 && re <= 1e-7;
    ensure(ok, format!("semigroup {sg:.2e}, EF2 {ef:.2e}, REF2 {re:.2e}"))
}

fn bernstein_preservation() -> Outcome {
    let mut r = common::rng(6);
    let grid = common::grid();
    let mut worst = 0.0_f64;
    let mut failed = 0;
    for _ in 0..20 {
        let f = common::field(&mut r, 4, true);
        for _ in 0..3 {
            let [s, t] = common::times::<2>(&mut r, f.span());
            for reverse in [false, true] {
                let g = |x: f64| {
                    let z = c(x, 0.0);
                    let w = if reverse { f.reverse_evolve(s, t, z, &cfg()) } else { f.evolve(s, t, z, &cfg()) };
                    w.map_or(f64::NAN, |w| w.re)
                };
                let check = is_bernstein_numeric(g, &grid, 6);
                worst = worst.min(check.worst_violation);
                if !check.pass || check.worst_violation < -1e-6 {
                    failed += 1;
                }
            }
        }
    }
    ensure(failed == 0, format!("{failed} of 120 restrictions failed, worst violation {worst:.2e}"))
}

/// Fields with a boundary fixed point at 0.
fn brfp_fields(seed: u64, n: usize) -> Vec<HerglotzField> {
    let mut r = common::rng(seed);
    (0..n).map(|_| common::field(&mut r, 4, false)).collect()
}

fn boundary_first_derivative() -> Outcome {
    let mut worst = 0.0_f64;
    for f in brfp_fields(7, 20) {
        let exact = shown(f.brfp0_derivative(0.0, f.span()))?;
        let (d1, _) = shown(f.finite_difference_brfp0(0.0, f.span(), 1e-5, &cfg()))?;
        worst = worst.max((d1 - exact).abs() / exact);
    }
    ensure(worst <= 1e-5, format!("worst relative error {worst:.2e}"))
}

fn boundary_second_derivative() -> Outcome {
    let f = shown(HerglotzField::constant(shown(GeneratorRepr::polynomial(0.0, 1.0, 1.0))?, 1.0))?;
    let e1 = (-1.0f64).exp();
    let want = -2.0 * e1 * (1.0 - e1);
    let closed = shown(f.brfp0_second_derivative(0.0, 1.0))?;
    let (_, d2) = shown(f.finite_difference_brfp0(0.0, 1.0, 1e-3, &cfg()))?;
    let closed_err = (closed - want).abs();
    let fd_err = (d2 - want).abs() / want.abs();
    let mut chain = 0.0_f64;
    let mut r = common::rng(8);
    for f in brfp_fields(8, 20) {
        let [s, t] = common::times::<2>(&mut r, f.span());
        let check = shown(f.chain_rule_check(s, t, 1e-10))?;
        chain = chain.max(check.residual1).max(check.residual2);
    }
    ensure(
        closed_err <= 1e-10 && fd_err <= 1e-3 && chain <= 1e-10,
        format!("closed form {closed_err:.2e}, finite difference {fd_err:.2e} relative, chain rule {chain:.2e}"),
    )
}

fn rigidity() -> Outcome {
    let mut r = common::rng(9);
    let quad = QuadratureConfig::default();
    let mut worst = f64::INFINITY;
    for _ in 0..1000 {
        let f = common::bernstein(&mut r);
        worst = worst.min(shown(f.rigidity_gap(common::point(&mut r), &quad))?);
    }
    let shift = shown(BernsteinRepr::affine(0.5, 1.0))?;
    let mut saturated = 0.0_f64;
    for _ in 0..20 {
        saturated = saturated.max(shown(shift.rigidity_gap(common::point(&mut r), &quad))?.abs());
    }
    ensure(
        worst >= -1e-10 && saturated <= 1e-12,
        format!("smallest gap {worst:.2e}, z + 0.5 gap {saturated:.2e}"),
    )
}

fn julia() -> Outcome {
    let mut r = common::rng(10);
    let quad = QuadratureConfig::default();
    let mut failed = 0;
    let mut margin = f64::INFINITY;
    for _ in 0..100 {
        let f = common::bernstein(&mut r);
        let samples: Vec<Complex> = (0..100).map(|_| common::point(&mut r)).collect();
        let (ratio, pass) = shown(f.julia_check(&samples, &quad))?;
        margin = margin.min(ratio - f.beta());
        if !pass {
            failed += 1;
        }
    }
    ensure(failed == 0, format!("{failed} of 100 failed, smallest margin {margin:.2e}"))
}

fn inverse_round_trip() -> Outcome {
    let mut r = common::rng(11);
    let mut worst = 0.0_f64;
    for _ in 0..50 {
        let f = common::field(&mut r, 4, true);
        let [s, t] = common::times::<2>(&mut r, f.span());
        let z = common::point(&mut r);
        let w = shown(f.evolve(s, t, z, &cfg()))?;
        match shown(f.inverse_evolve(s, t, w, &cfg()))? {
            InverseOutcome::Point(p) => worst = worst.max((p - z).norm() / z.norm().max(1.0)),
            InverseOutcome::DomainExit { t_exit } => return Err(format!("unexpected exit at {t_exit}")),
        }
    }
    let killing = shown(HerglotzField::constant(shown(GeneratorRepr::killing(2.0))?, 1.0))?;
    let exit = match shown(killing.inverse_evolve(0.0, 1.0, c(1.0, 0.0), &cfg()))? {
        InverseOutcome::DomainExit { t_exit } => t_exit,
        InverseOutcome::Point(p) => return Err(format!("killing field returned {p} instead of exiting")),
    };
    ensure(
        worst <= 1e-7 && (exit - 0.5).abs() <= 1e-6,
        format!("round trip {worst:.2e}, killing exit at {exit}"),
    )
}

fn branching_transforms() -> Outcome {
    let mut feller = 0.0_f64;
    for (b, t) in [(0.5, 1.0), (1.0, 2.0), (3.0, 0.3)] {
        let f = shown(mechanism_field(vec![0.0, t], &[MechanismSpec::Feller { b }]))?;
        for x in [0.5, 2.0] {
            for zeta in [c(1.0, 0.0), c(0.3, 2.0), c(0.0, 1.0)] {
                let got = shown(transition_laplace(&f, 0.0, t, x, zeta, &cfg()))?;
                feller = feller.max((got - (-x * zeta / (1.0 + b * t * zeta)).exp()).norm());
            }
        }
    }
    let stable = shown(mechanism_field(vec![0.0, 2.0], &[MechanismSpec::Stable { alpha: 0.5, scale: 1.0 }]))?;
    let mut stable_err = 0.0_f64;
    for t in [0.5, 2.0] {
        for zeta in [c(1.0, 0.0), c(0.2, 1.0), c(4.0, -3.0)] {
            let want = zeta * (1.0 + 0.5 * t * zeta.sqrt()).powi(-2);
            stable_err = stable_err.max(rel(shown(laplace_exponent(&stable, 0.0, t, zeta, &cfg()))?, want));
        }
    }
    let two = shown(mechanism_field(
        vec![0.0, 1.0, 2.0],
        &[MechanismSpec::Linear { a: 0.5 }, MechanismSpec::Stable { alpha: 0.75, scale: 0.5 }],
    ))?;
    let mut product = 0.0_f64;
    for (x1, x2) in [(0.3, 1.7), (2.0, 5.0)] {
        let zeta = c(0.7, 1.2);
        let whole = shown(transition_laplace(&two, 0.0, 2.0, x1 + x2, zeta, &cfg()))?;
        let parts = shown(transition_laplace(&two, 0.0, 2.0, x1, zeta, &cfg()))?
            * shown(transition_laplace(&two, 0.0, 2.0, x2, zeta, &cfg()))?;
        product = product.max((whole - parts).norm());
    }
    let f1 = shown(mechanism_field(vec![0.0, 1.0], &[MechanismSpec::Feller { b: 1.0 }]))?;
    let variance = shown(conditional_variance(&f1, 0.0, 1.0, 1.0))?;
    ensure(
        feller <= 1e-9 && stable_err <= 1e-6 && product <= 1e-12 && (variance - 2.0).abs() <= 1e-9,
        format!("feller {feller:.2e}, stable {stable_err:.2e}, branching {product:.2e}, variance {variance}"),
    )
}

fn cli_determinism() -> Outcome {
    let dir = shown(tempfile::tempdir())?;
    let spec = dir.path().join("field.json");
    shown(std::fs::write(
        &spec,
        r#"{"breakpoints":[0,1,2],"slices":[{"kind":"stable","alpha":0.5,"scale":1},{"q":0,"a":1,"b":0.5}]}"#,
    ))?;
    let table = || -> Result<Vec<u8>, String> {
        let out = shown(
            Command::new(env!("CARGO_BIN_EXE_loewner"))
                .args(["table", "--field"])
                .arg(&spec)
                .args(["--s", "0,0.5", "--t", "1,1.5,2", "--zeta", "1,0;0.5,2"])
                .output(),
        )?;
        if !out.status.success() {
            return Err(String::from_utf8_lossy(&out.stderr).into_owned());
        }
        Ok(out.stdout)
    };
    let (first, second) = (table()?, table()?);
    let corrupted = dir.path().join("corrupted.json");
    shown(std::fs::write(
        &corrupted,
        r#"{"breakpoints":[0,1,2],"slices":[{"q":0,"a":1,"b":0},{"q":-0.5,"a":3,"b":0}]}"#,
    ))?;
    let check = shown(Command::new(env!("CARGO_BIN_EXE_loewner")).args(["check", "--field"]).arg(&corrupted).output())?;
    let report = String::from_utf8_lossy(&check.stdout);
    let labelled = report.lines().any(|l| l.contains("BG-(ii): VIOLATED"));
    ensure(
        first == second && !first.is_empty() && check.status.code() == Some(2) && labelled,
        format!(
            "{} table bytes identical: {}, check exit {:?}, labelled report: {labelled}",
            first.len(),
            first == second,
            check.status.code()
        ),
    )
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 13] = [
        ("elementary flows", elementary_flows),
        ("Riccati oracle", riccati_oracle),
        ("Euler convergence", euler_convergence),
        ("Trotter convergence", trotter_convergence),
        ("semigroup / EF / REF algebra", algebra),
        ("Bernstein preservation", bernstein_preservation),
        ("boundary first derivative", boundary_first_derivative),
        ("boundary second derivative", boundary_second_derivative),
        ("rigidity", rigidity),
        ("Julia", julia),
        ("inverse round trip", inverse_round_trip),
        ("branching transforms", branching_transforms),
        ("CLI determinism", cli_determinism),
    ];
    let start = Instant::now();
    let mut failures = 0;
    for (i, (name, criterion)) in criteria.iter().enumerate() {
        let t = Instant::now();
        let (verdict, detail) = match criterion() {
            Ok(d) => ("PASS", d),
            Err(d) => {
                failures += 1;
                ("FAIL", d)
            }
        };
        println!("AC-{:<2} {verdict} {name}: {detail} [{:.2} s]", i + 1, t.elapsed().as_secs_f64());
    }
    println!("{} of 13 criteria passed in {:.1} s", 13 - failures, start.elapsed().as_secs_f64());
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
