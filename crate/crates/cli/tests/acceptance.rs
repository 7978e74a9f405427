//! Acceptance criteria, one PASS/FAIL line each. Tolerances and time limits
//! are pinned below. A criterion listed in `KNOWN_RED` is still evaluated
//! and printed, but does not fail the run; see the README for why.

use std::time::{Duration, Instant};

use itertools::Itertools;
use num_rational::BigRational;
use num_traits::{One, Zero};
use oscidecay_cli::Problem;
use oscidecay_core::nondegeneracy::{
    annihilator_witness, default_pool, degeneracy_decompose, DegeneracyVerdict, DiffOperator,
    ProjectionSystem,
};
use oscidecay_core::poly::{parse_polynomial, MultiPoly, RootDomain, SturmChain, UniPoly, VarSet};
use oscidecay_core::quadrature::{
    bump, decay_exponent, geometric_grid, CutoffSpec, FactorSpec, OscillatoryIntegral, QuadConfig,
};
use oscidecay_core::scalar::QuadScalar;
use oscidecay_core::strategy::{
    analyze_freezing, cauchy_schwarz_certificate, enumerate_strategies, norms_string,
    validate_certificate, Functional, Route,
};
use oscidecay_core::uniformity::{
    difference_phase, difference_phase_check, hyp_check, UniformityStatus, SHIFT_PARAM,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const KNOWN_RED: &[u32] = &[5];

const EPS_STATIONARY: (f64, f64) = (0.5, 0.05);
const EPS_ZERO_MAX: f64 = 0.02;
const EPS_DECAY_MIN: f64 = 0.05;
const SEPARABLE_REL: f64 = 1e-8;

type Check = Result<String, String>;

fn ensure(ok: bool, msg: impl Into<String>) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn s<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

fn q(rat: i64, irr: i64) -> QuadScalar {
    QuadScalar::new(BigRational::from_integer(rat.into()), BigRational::from_integer(irr.into()), 2).unwrap()
}

fn names(xs: &[&str]) -> Vec<String> {
    xs.iter().map(|s| s.to_string()).collect()
}

fn cone_functional(phase: &str) -> Result<Functional, String> {
    let sys = ProjectionSystem::light_cone();
    let p = parse_polynomial(phase, sys.vars()).map_err(s)?;
    let d = p.total_degree().unwrap_or(0).max(1);
    Functional::new(sys, &p, d).map_err(s)
}

fn wave_like_operator(vars: &VarSet) -> DiffOperator {
    let e = |a: i64, b: i64| vec![q(a, 0), q(b, 0), q(0, 0)];
    DiffOperator::new(vars.clone(), vec![e(1, 0), e(0, 1), e(1, -1)]).unwrap()
}

fn criterion_1() -> Check {
    let f = cone_functional("x^2*y + 2*x*y*z")?;
    let (sys, p) = (f.sys(), f.phase());
    let v = hyp_check(p, &names(&["z"]), &wave_like_operator(sys.vars())).map_err(s)?;
    ensure(v.is_positive(), "hyp_check not positive")?;
    ensure(v.evidence.len() == 1 && v.evidence[0].constant_value() == Some(2.into()), "Q != 2")?;

    let tail = sys.without(0).map_err(s)?;
    let d = difference_phase_check(p, "x", &tail, 3).map_err(s)?;
    ensure(d.status == UniformityStatus::IdenticallyZero, format!("difference check {}", d.status_name()))?;

    let shifted = difference_phase(p, "x", sys.vars()).map_err(s)?;
    let k = shifted.vars().index_of(SHIFT_PARAM).unwrap();
    let at_one = shifted.evaluate_var(k, &QuadScalar::one()).embed(sys.vars()).map_err(s)?;
    let verdict = degeneracy_decompose(&at_one, &tail, 3).map_err(s)?;
    let rebuilt = verdict.reconstruct(&tail).ok_or("zeta = 1 specialization not degenerate")?;
    ensure((&rebuilt - &at_one).is_zero(), "specialization residual nonzero")?;

    // the specialization is -(4xy + 4yz)/2 - y; the quadratic part is the five-square identity
    let four = parse_polynomial("4*x*y + 4*y*z", sys.vars()).map_err(s)?;
    let expect = parse_polynomial("-2*x*y - 2*y*z - y", sys.vars()).map_err(s)?;
    ensure(at_one == expect, format!("specialization is {at_one}"))?;
    let DegeneracyVerdict::Decomposition { parts } = degeneracy_decompose(&four, &tail, 2).map_err(s)? else {
        return Err("4xy + 4yz not degenerate".into());
    };
    let t = VarSet::new(["t"]).unwrap();
    let want = ["-2*t^2", "-t^2", "-t^2", "t^2", "t^2"];
    for (part, w) in parts.iter().zip(want) {
        ensure(*part == parse_polynomial(w, &t).unwrap(), format!("part {part} != {w}"))?;
    }
    Ok("Q = 2; difference identically zero; 4xy+4yz = -2(y-z)^2 - (x+y)^2 - (x-y)^2 + (x+z)^2 + (x-z)^2, residual 0".into())
}

fn criterion_2() -> Check {
    let f = cone_functional("x^3")?;
    let v = hyp_check(f.phase(), &names(&["z"]), &wave_like_operator(f.sys().vars())).map_err(s)?;
    ensure(v.status == UniformityStatus::IdenticallyZero, format!("hyp_check {}", v.status_name()))?;
    let cert = cauchy_schwarz_certificate(&f, 0, "x").map_err(s)?.map_err(|r| r.reason)?;
    let Route::CauchySchwarz(ev) = &cert.route else { unreachable!() };
    let wave = ev.wave.as_ref().ok_or("no wave-operator evidence")?;
    ensure(!wave.is_zero(), "wave operator kills the difference phase")?;
    let out = enumerate_strategies(&f, 1).map_err(s)?;
    let top = out.certificates.first().ok_or("no certificate")?;
    let norms = norms_string(&top.norms);
    ensure(top.route_name() == "cauchy-schwarz" && norms == "(2,2,∞,∞,∞,∞)", format!("top {} {norms}", top.key))?;
    Ok(format!("hyp identically zero; wave evidence {wave}; top {} {norms}", top.key))
}

fn criterion_3() -> Check {
    let f = cone_functional("x^2*y^2")?;
    let out = enumerate_strategies(&f, 1).map_err(s)?;
    let routes: Vec<&str> = out.certificates.iter().map(|c| c.route_name()).collect();
    ensure(routes.contains(&"grouped") && routes.contains(&"cauchy-schwarz"), format!("routes {routes:?}"))?;
    let sys = f.sys();
    let shifted = difference_phase(f.phase(), "x", sys.vars()).map_err(s)?;
    let tail = sys.without(0).map_err(s)?;
    let dir = |u: [i64; 3]| u.iter().map(|&c| q(c, 0)).collect::<Vec<_>>();
    let d = DiffOperator::new(sys.vars().clone(), vec![dir([0, 1, 1]), dir([0, 1, 0]), dir([1, -1, 0])]).map_err(s)?;
    ensure(default_pool(&tail).contains(&d), "operator not in the default pool")?;
    let w = annihilator_witness(&shifted, &tail, &[d]).map_err(s)?.ok_or("operator is not a witness")?;
    let want = parse_polynomial("-4*zeta", w.value.vars()).map_err(s)?;
    ensure(w.value == want, format!("D(shifted) = {}", w.value))?;
    Ok(format!("{} certificates incl. grouped and cauchy-schwarz; {} = -4*zeta", out.certificates.len(), w.operator))
}

fn flex(n: usize) -> Result<Functional, String> {
    let p = Problem::preset(if n == 9 { "flex1" } else { "flex2" }).map_err(s)?;
    p.functional().map_err(s)
}

fn criterion_4() -> Check {
    let f = flex(9)?;
    let mut accepted = Vec::new();
    for k in 1..=2 {
        for set in ["x", "y", "z", "w"].into_iter().combinations(k) {
            if analyze_freezing(&f, &names(&set)).map_err(s)?.accepted {
                accepted.push(set.join(","));
            }
        }
    }
    ensure(accepted == ["z,w"], format!("accepted {accepted:?}"))?;
    let reasons = |set: &[&str]| analyze_freezing(&f, &names(set)).map(|a| a.reasons).map_err(s);
    ensure(reasons(&["w"])?.iter().any(|r| r.contains("7 ≮ 6")), "{w} reason")?;
    ensure(reasons(&["z"])?.iter().any(|r| r.contains("6 ≮ 6")), "{z} reason")?;
    for c in ["x", "y"] {
        ensure(reasons(&[c])?.iter().any(|r| r == "reduced phase degenerate"), format!("{{{c}}} reason"))?;
    }
    Ok("only {z,w} accepted; {w}: 7 ≮ 6; {z}: 6 ≮ 6; {x},{y}: reduced phase degenerate".into())
}

fn criterion_5() -> Check {
    let f = flex(8)?;
    let out = enumerate_strategies(&f, 2).map_err(s)?;
    let pos = |key: &str| out.certificates.iter().position(|c| c.key == key);
    match (pos("grouped:z"), pos("grouped:z,w")) {
        (Some(a), Some(b)) if a < b => Ok(format!("grouped:z rank {} above grouped:z,w rank {}", a + 1, b + 1)),
        (None, _) => {
            let why = out
                .rejections
                .iter()
                .find(|r| r.key == "grouped:z")
                .map(|r| r.reason.clone())
                .unwrap_or_default();
            Err(format!("grouped:z not certified ({why}); top is {}", out.certificates[0].key))
        }
        (a, b) => Err(format!("ranks {a:?} vs {b:?}")),
    }
}

fn det3(a: &[QuadScalar], b: &[QuadScalar], c: &[QuadScalar]) -> QuadScalar {
    let minor = |i: usize, j: usize| &(&b[i] * &c[j]) - &(&b[j] * &c[i]);
    let t0 = &a[0] * &minor(1, 2);
    let t1 = &a[1] * &minor(0, 2);
    let t2 = &a[2] * &minor(0, 1);
    &(&t0 - &t1) + &t2
}

fn criterion_6() -> Check {
    let sys = ProjectionSystem::light_cone();
    let v = sys.vectors();
    let mut n = 0;
    for t in (0..6).combinations(3) {
        let d = det3(&v[t[0]], &v[t[1]], &v[t[2]]);
        ensure(!d.is_zero(), format!("triple {t:?} singular"))?;
        n += 1;
    }
    ensure(n == 20, "expected 20 triples")?;
    Ok("20/20 triples have nonzero determinant".into())
}

fn random_uni(rng: &mut ChaCha8Rng, max_deg: usize) -> UniPoly {
    let deg = rng.gen_range(0..=max_deg);
    UniPoly::new(
        (0..=deg)
            .map(|_| q(rng.gen_range(-4..=4), if rng.gen_bool(0.25) { rng.gen_range(-2..=2) } else { 0 }))
            .collect(),
    )
}

fn criterion_7a() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let sys = ProjectionSystem::light_cone();
    for case in 0..200 {
        let mut phase = MultiPoly::zero(sys.vars());
        for j in 0..sys.len() {
            phase = &phase + &MultiPoly::compose(&random_uni(&mut rng, 4), &sys.form(j));
        }
        let verdict = degeneracy_decompose(&phase, &sys, 4).map_err(s)?;
        let rebuilt = verdict.reconstruct(&sys).ok_or(format!("case {case}: not degenerate"))?;
        ensure((&rebuilt - &phase).is_zero(), format!("case {case}: residual nonzero"))?;
    }
    Ok("200/200 decompositions with zero residual".into())
}

fn times(a: &UniPoly, b: &UniPoly) -> UniPoly {
    let mut c = vec![QuadScalar::zero(); a.coeffs().len() + b.coeffs().len() - 1];
    for (i, x) in a.coeffs().iter().enumerate() {
        for (j, y) in b.coeffs().iter().enumerate() {
            c[i + j] = &c[i + j] + &(x * y);
        }
    }
    UniPoly::new(c)
}

/// Sign-change isolation on a 1/64 grid, counting exact zeros at grid points.
fn float_roots(f: &dyn Fn(f64) -> f64, lo: f64, hi: f64) -> Vec<f64> {
    let step = 1.0 / 64.0;
    let mut out = Vec::new();
    let mut a = lo;
    while a < hi {
        let b = (a + step).min(hi);
        if f(a) == 0.0 {
            out.push(a);
        } else if f(a) * f(b) < 0.0 {
            let (mut l, mut r) = (a, b);
            for _ in 0..60 {
                let m = 0.5 * (l + r);
                if f(l) * f(m) <= 0.0 {
                    r = m;
                } else {
                    l = m;
                }
            }
            out.push(0.5 * (l + r));
        }
        a = b;
    }
    if f(hi) == 0.0 {
        out.push(hi);
    }
    out
}

fn criterion_7b() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for case in 0..100 {
        let target = rng.gen_range(1..=8);
        let mut poly = UniPoly::new(vec![QuadScalar::one()]);
        let mut degree = 0;
        let quad = (target >= 2 && rng.gen_bool(0.3)).then(|| rng.gen_range(1..=5i64));
        if let Some(c) = quad {
            poly = times(&poly, &UniPoly::new(vec![q(c, 0), q(0, 0), q(1, 0)]));
            degree += 2;
        }
        let mut roots = Vec::new();
        while degree < target {
            let r = rng.gen_range(-40..=40i64);
            if roots.contains(&r) {
                continue;
            }
            let mult = if degree + 2 <= target && rng.gen_bool(0.3) { 2 } else { 1 };
            for _ in 0..mult {
                poly = times(&poly, &UniPoly::new(vec![QuadScalar::from_frac(-r, 4), q(1, 0)]));
            }
            roots.push(r);
            degree += mult;
        }
        if rng.gen_bool(0.5) {
            poly = poly.scale(&q(1, 1));
        }
        let rs: Vec<f64> = roots.iter().map(|&r| r as f64 / 4.0).collect();
        let squarefree = |t: f64| rs.iter().map(|r| t - r).product::<f64>() * quad.map_or(1.0, |c| t * t + c as f64);
        let chain = SturmChain::new(&poly).map_err(s)?;
        let found = float_roots(&squarefree, -11.0 - 1.0 / 128.0, 11.0);
        ensure(chain.count_all() == found.len(), format!("case {case}: {} vs {}", chain.count_all(), found.len()))?;
        let (a, b) = (rng.gen_range(-48..0i64), rng.gen_range(0..48i64));
        let dom = RootDomain::Closed {
            lo: QuadScalar::from_frac(2 * a + 1, 8),
            hi: QuadScalar::from_frac(2 * b + 1, 8),
        };
        let inside = float_roots(&squarefree, a as f64 / 4.0 + 0.125, b as f64 / 4.0 + 0.125).len();
        ensure(chain.count_in(&dom).map_err(s)? == inside, format!("case {case}: interval count"))?;
    }
    Ok("100/100 root counts agree (whole line and a random interval)".into())
}

fn criterion_7c() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let sys = ProjectionSystem::light_cone();
    let (mut certs, mut phases) = (0, 0);
    while phases < 50 {
        let terms: Vec<(Vec<u32>, QuadScalar)> = (0..rng.gen_range(1..=4))
            .map(|_| {
                let mut e = vec![0u32; 3];
                for _ in 0..rng.gen_range(1..=3) {
                    e[rng.gen_range(0..3)] += 1;
                }
                (e, q(rng.gen_range(-3..=3), 0))
            })
            .collect();
        let p = MultiPoly::from_terms(sys.vars(), terms);
        if p.is_zero() {
            continue;
        }
        phases += 1;
        let f = Functional::new(sys.clone(), &p, p.total_degree().unwrap_or(0).max(1)).map_err(s)?;
        let out = enumerate_strategies(&f, 1).map_err(s)?;
        for c in &out.certificates {
            ensure(validate_certificate(c, &f).passed(), format!("{} on {p}", c.key))?;
        }
        certs += out.certificates.len();
    }
    Ok(format!("{certs} certificates over 50 phases, all validated"))
}

fn integral(vars: &[&str], phase: &str, proj: Vec<Vec<f64>>, factors: Vec<FactorSpec>, radii: Vec<f64>) -> Result<OscillatoryIntegral, String> {
    let vars = VarSet::new(vars.iter().copied()).map_err(s)?;
    let p = parse_polynomial(phase, &vars).map_err(s)?;
    OscillatoryIntegral::new(p, proj, factors, CutoffSpec::BumpProduct { radii }).map_err(s)
}

fn gauss(center: f64, width: f64) -> FactorSpec {
    FactorSpec::Gaussian { center, width }
}

fn criterion_8a() -> Check {
    let i = integral(&["x"], "x^2", vec![vec![1.0]], vec![gauss(0.0, 1.0)], vec![1.0])?;
    let grid = geometric_grid(16.0, 1024.0, 13).map_err(s)?;
    let fit = decay_exponent(&i, &grid, &QuadConfig::default()).map_err(s)?;
    let (want, tol) = EPS_STATIONARY;
    ensure((fit.epsilon - want).abs() <= tol, format!("epsilon {:.4}", fit.epsilon))?;
    Ok(format!("epsilon {:.4} (want {want} ± {tol})", fit.epsilon))
}

fn criterion_8b() -> Check {
    let p = Problem::preset("planar3").map_err(s)?;
    let i = integral(&["x", "y"], "0", vec![vec![1.0, 0.0], vec![0.0, 1.0], vec![1.0, 1.0]], p.numeric_factors.unwrap(), vec![1.0, 1.0])?;
    let grid = geometric_grid(4.0, 256.0, 9).map_err(s)?;
    let fit = decay_exponent(&i, &grid, &QuadConfig::default()).map_err(s)?;
    ensure(fit.epsilon < EPS_ZERO_MAX, format!("epsilon {:.4}", fit.epsilon))?;
    Ok(format!("epsilon {:.4} (want < {EPS_ZERO_MAX})", fit.epsilon))
}

fn criterion_8c() -> Check {
    let p = Problem::preset("planar3").map_err(s)?;
    let proj = p.sys.vectors().iter().map(|v| v.iter().map(QuadScalar::to_f64).collect()).collect();
    let i = OscillatoryIntegral::new(p.phase.clone(), proj, p.numeric_factors.clone().unwrap(), p.cutoff.clone()).map_err(s)?;
    let grid = geometric_grid(4.0, 256.0, 9).map_err(s)?;
    let fit = decay_exponent(&i, &grid, &QuadConfig::default()).map_err(s)?;
    ensure(fit.epsilon >= EPS_DECAY_MIN, format!("epsilon {:.4}", fit.epsilon))?;
    Ok(format!("{}: epsilon {:.4} (want >= {EPS_DECAY_MIN})", p.phase, fit.epsilon))
}

fn criterion_8d() -> Check {
    let specs = [gauss(0.1, 0.7), gauss(-0.2, 1.0), gauss(0.3, 1.3)];
    let radii = vec![1.0, 0.8, 1.2];
    let eye = (0..3).map(|i| (0..3).map(|j| if i == j { 1.0 } else { 0.0 }).collect()).collect();
    let i = integral(&["x", "y", "z"], "x^2*y + 2*x*y*z", eye, specs.to_vec(), radii.clone())?;
    let cfg = QuadConfig { order: 10, rel_tol: 1e-9, abs_tol: 0.0, ..QuadConfig::default() };
    let got = i.evaluate(0.0, &cfg).map_err(s)?;
    // trapezoid on [-r, r] is spectrally accurate for integrands flat at the ends
    let reference: f64 = specs
        .iter()
        .zip(&radii)
        .map(|(g, &r)| {
            let n = 200_000;
            let h = 2.0 * r / n as f64;
            (1..n).map(|k| -r + k as f64 * h).map(|t| bump(t / r) * g.eval(t)).sum::<f64>() * h
        })
        .product();
    let rel = (got - reference).norm() / reference.abs();
    ensure(rel < SEPARABLE_REL, format!("relative error {rel:.2e}"))?;
    Ok(format!("relative error {rel:.2e} (want < {SEPARABLE_REL:.0e})"))
}

struct Criterion {
    id: u32,
    label: &'static str,
    limit: Duration,
    run: fn() -> Check,
}

fn main() {
    let secs = Duration::from_secs;
    let criteria = [
        Criterion { id: 1, label: "1  mixed cubic: hyp Q = 2, difference zero, five squares", limit: secs(1), run: criterion_1 },
        Criterion { id: 2, label: "2  cube: Cauchy-Schwarz route", limit: secs(1), run: criterion_2 },
        Criterion { id: 3, label: "3  biquadratic: both routes, -4 zeta witness", limit: secs(1), run: criterion_3 },
        Criterion { id: 4, label: "4  nine-factor freezing table", limit: secs(5), run: criterion_4 },
        Criterion { id: 5, label: "5  eight-factor ranking {z} above {z,w}", limit: secs(5), run: criterion_5 },
        Criterion { id: 6, label: "6  light-cone triples in general position", limit: secs(1), run: criterion_6 },
        Criterion { id: 7, label: "7a degenerate phases reconstruct", limit: secs(20), run: criterion_7a },
        Criterion { id: 7, label: "7b Sturm counts vs float isolation", limit: secs(20), run: criterion_7b },
        Criterion { id: 7, label: "7c random certificates validate", limit: secs(20), run: criterion_7c },
        Criterion { id: 8, label: "8a stationary phase epsilon", limit: secs(60), run: criterion_8a },
        Criterion { id: 8, label: "8b zero phase epsilon", limit: secs(60), run: criterion_8b },
        Criterion { id: 8, label: "8c planar x^2 y epsilon", limit: secs(120), run: criterion_8c },
        Criterion { id: 8, label: "8d separable lambda = 0 reference", limit: secs(60), run: criterion_8d },
    ];
    let mut unexpected = 0;
    for c in &criteria {
        let start = Instant::now();
        let result = (c.run)();
        let took = start.elapsed();
        let result = match result {
            Ok(detail) if took > c.limit => Err(format!("{detail}; too slow")),
            other => other,
        };
        let timing = format!("{:.2}s/{}s", took.as_secs_f64(), c.limit.as_secs());
        match result {
            Ok(detail) => println!("{:<24}  {:<58} {timing:>12}  {detail}", "PASS", c.label),
            Err(detail) => {
                let known = KNOWN_RED.contains(&c.id);
                if !known {
                    unexpected += 1;
                }
                let tag = if known { "FAIL (known, see README)" } else { "FAIL" };
                println!("{tag:<24}  {:<58} {timing:>12}  {detail}", c.label);
            }
        }
    }
    if unexpected > 0 {
        println!("{unexpected} unexpected failure(s)");
        std::process::exit(1);
    }
}
