use num_rational::BigRational;
use num_traits::{One, Zero};
use oscidecay_core::linalg::{rank, residual_norm_sq, solve_membership, SpanProjector};
use oscidecay_core::nondegeneracy::{
    degeneracy_decompose, general_position, ProjectionSystem,
};
use oscidecay_core::poly::{
    gcd_univariate, MultiPoly, RootDomain, SturmChain, UniPoly, VarSet,
};
use oscidecay_core::scalar::QuadScalar;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn xyz() -> VarSet {
    VarSet::new(["x", "y", "z"]).unwrap()
}

fn q(rat: i64, irr: i64) -> QuadScalar {
    QuadScalar::new(BigRational::from_integer(rat.into()), BigRational::from_integer(irr.into()), 2).unwrap()
}

fn coeff() -> impl Strategy<Value = QuadScalar> {
    (-4i64..=4, prop_oneof![3 => Just(0i64), 1 => -2i64..=2]).prop_map(|(a, b)| q(a, b))
}

fn poly(max_deg: u32) -> impl Strategy<Value = MultiPoly> {
    prop::collection::vec((prop::collection::vec(0..=max_deg, 3), coeff()), 0..6)
        .prop_map(|terms| MultiPoly::from_terms(&xyz(), terms))
}

fn uni(max_deg: usize) -> impl Strategy<Value = UniPoly> {
    prop::collection::vec(coeff(), 1..=max_deg + 1).prop_map(UniPoly::new)
}

proptest! {
    #[test]
    fn product_rule(p in poly(3), r in poly(3), i in 0usize..3) {
        let lhs = (&p * &r).partial_derivative(i);
        let rhs = &(&p.partial_derivative(i) * &r) + &(&p * &r.partial_derivative(i));
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn difference_vanishes_at_zero_shift(p in poly(3), i in 0usize..3) {
        let name = xyz().name(i).to_string();
        let d = p.shift_substitute(&name, "zeta").unwrap();
        let k = d.vars().index_of("zeta").unwrap();
        prop_assert!(d.evaluate_var(k, &QuadScalar::zero()).is_zero());
    }

    #[test]
    fn expand_in_round_trip(p in poly(3)) {
        let frozen = vec!["z".to_string()];
        let parts = p.expand_in(&frozen).unwrap();
        let vars = xyz();
        let z = MultiPoly::var(&vars, "z").unwrap();
        let mut back = MultiPoly::zero(&vars);
        for (e, c) in parts {
            back = &back + &(&c.embed(&vars).unwrap() * &z.pow(e[0]));
        }
        prop_assert_eq!(back, p);
    }

    #[test]
    fn gcd_keeps_common_root(a in uni(3), b in uni(3), r in -5i64..=5) {
        prop_assume!(!a.is_zero() && !b.is_zero());
        let vars = VarSet::new(["t"]).unwrap();
        let lin = UniPoly::new(vec![q(-r, 0), q(1, 0)]);
        let pa = MultiPoly::compose(&a, &MultiPoly::var(&vars, "t").unwrap());
        let pb = MultiPoly::compose(&b, &MultiPoly::var(&vars, "t").unwrap());
        let l = lin.to_multi(&vars, 0);
        let g = gcd_univariate(&[&pa * &l, &pb * &l]).unwrap();
        prop_assert!(g.eval(&[q(r, 0)]).is_zero());
    }

    #[test]
    fn rank_matches_transpose(rows in prop::collection::vec(prop::collection::vec(coeff(), 4), 1..5)) {
        let cols: Vec<Vec<QuadScalar>> = (0..4).map(|j| rows.iter().map(|r| r[j].clone()).collect()).collect();
        prop_assert_eq!(rank(&rows).unwrap(), rank(&cols).unwrap());
    }

    #[test]
    fn membership_and_residual_agree(
        basis in prop::collection::vec(prop::collection::vec(coeff(), 4), 1..4),
        mix in prop::collection::vec(coeff(), 3),
        extra in prop::collection::vec(coeff(), 4),
    ) {
        let inside: Vec<QuadScalar> = (0..4)
            .map(|i| basis.iter().zip(&mix).fold(QuadScalar::zero(), |acc, (b, c)| &acc + &(&b[i] * c)))
            .collect();
        let c = solve_membership(&inside, &basis).unwrap().expect("member");
        for i in 0..4 {
            let v = basis.iter().zip(&c).fold(QuadScalar::zero(), |acc, (b, k)| &acc + &(&b[i] * k));
            prop_assert_eq!(&v, &inside[i]);
        }
        prop_assert!(residual_norm_sq(&inside, &basis).unwrap().is_zero());

        let member = solve_membership(&extra, &basis).unwrap().is_some();
        let res = residual_norm_sq(&extra, &basis).unwrap();
        prop_assert_eq!(member, res.is_zero());
        let proj = SpanProjector::new(&basis, 4).unwrap();
        prop_assert_eq!(proj.residual_norm_sq(&extra), res);
        let r = proj.residual_vector(&extra);
        for b in &basis {
            let d = b.iter().zip(&r).fold(QuadScalar::zero(), |acc, (x, y)| &acc + &(x * y));
            prop_assert!(d.is_zero());
        }
    }

    #[test]
    fn general_position_ignores_scaling(k in 1i64..5, s in -1i64..=1, j in 0usize..6) {
        let sys = ProjectionSystem::light_cone();
        let mut vs = sys.vectors().to_vec();
        let c = q(k * if s == 0 { 1 } else { s }, s.abs());
        vs[j] = vs[j].iter().map(|x| x * &c).collect();
        let scaled = ProjectionSystem::new(sys.vars().clone(), vs).unwrap();
        prop_assert_eq!(general_position(&scaled), general_position(&sys));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn degenerate_phases_decompose(parts in prop::collection::vec(uni(4), 6)) {
        let sys = ProjectionSystem::light_cone();
        let mut phase = MultiPoly::zero(sys.vars());
        for (j, p) in parts.iter().enumerate() {
            phase = &phase + &MultiPoly::compose(p, &sys.form(j));
        }
        let verdict = degeneracy_decompose(&phase, &sys, 4).unwrap();
        prop_assert!(verdict.is_degenerate());
        let residual = &verdict.reconstruct(&sys).unwrap() - &phase;
        prop_assert!(residual.is_zero());
    }
}

/// Known roots on a quarter grid, some doubled, times an optional
/// root-free quadratic, times an optional `1 + sqrt(2)`.
struct Fixture {
    poly: UniPoly,
    roots: Vec<f64>,
    eval_squarefree: Box<dyn Fn(f64) -> f64>,
}

fn fixture(rng: &mut ChaCha8Rng) -> Fixture {
    let mut roots: Vec<i64> = Vec::new();
    let mut degree = 0;
    let mut poly = UniPoly::new(vec![QuadScalar::one()]);
    let quad = rng.gen_bool(0.4).then(|| rng.gen_range(1..=5i64));
    if let Some(c) = quad {
        poly = mul(&poly, &UniPoly::new(vec![q(c, 0), q(0, 0), q(1, 0)]));
        degree += 2;
    }
    let target = rng.gen_range(degree.max(1)..=8);
    while degree < target {
        let r = rng.gen_range(-40..=40i64);
        if roots.contains(&r) {
            continue;
        }
        let mult = if degree + 2 <= target && rng.gen_bool(0.3) { 2 } else { 1 };
        for _ in 0..mult {
            poly = mul(&poly, &UniPoly::new(vec![QuadScalar::from_frac(-r, 4), q(1, 0)]));
        }
        roots.push(r);
        degree += mult;
    }
    if rng.gen_bool(0.5) {
        poly = poly.scale(&q(1, 1));
    }
    let float_roots: Vec<f64> = roots.iter().map(|&r| r as f64 / 4.0).collect();
    let rs = float_roots.clone();
    Fixture {
        poly,
        roots: float_roots,
        eval_squarefree: Box::new(move |t| {
            let base: f64 = rs.iter().map(|r| t - r).product();
            match quad {
                Some(c) => base * (t * t + c as f64),
                None => base,
            }
        }),
    }
}

fn mul(a: &UniPoly, b: &UniPoly) -> UniPoly {
    let mut c = vec![QuadScalar::zero(); a.coeffs().len() + b.coeffs().len() - 1];
    for (i, x) in a.coeffs().iter().enumerate() {
        for (j, y) in b.coeffs().iter().enumerate() {
            c[i + j] = &c[i + j] + &(x * y);
        }
    }
    UniPoly::new(c)
}

/// Roots of `f` in `[lo, hi]` found by sign changes on a grid offset from
/// the quarter lattice, refined by bisection.
fn float_isolate(f: &dyn Fn(f64) -> f64, lo: f64, hi: f64) -> Vec<f64> {
    let step = 1.0 / 64.0;
    let mut out = Vec::new();
    let mut a = lo;
    while a < hi {
        let b = (a + step).min(hi);
        let (fa, fb) = (f(a), f(b));
        if fa == 0.0 {
            out.push(a);
        } else if fa * fb < 0.0 {
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
    if f(hi) == 0.0 && out.last() != Some(&hi) {
        out.push(hi);
    }
    out
}

#[test]
fn sturm_counts_match_float_isolation() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for case in 0..100 {
        let fx = fixture(&mut rng);
        let chain = SturmChain::new(&fx.poly).unwrap();
        let found = float_isolate(&*fx.eval_squarefree, -11.0 - 1.0 / 128.0, 11.0);
        assert_eq!(chain.count_all(), found.len(), "case {case}");
        let mut exact = fx.roots.clone();
        exact.sort_by(|a, b| a.partial_cmp(b).unwrap());
        for (e, f) in exact.iter().zip(&found) {
            assert!((e - f).abs() < 1e-9, "case {case}: {e} vs {f}");
        }
        let (a, b) = (rng.gen_range(-48..0i64), rng.gen_range(0..48i64));
        let (lo, hi) = (a as f64 / 4.0 + 1.0 / 8.0, b as f64 / 4.0 + 1.0 / 8.0);
        let domain = RootDomain::Closed {
            lo: QuadScalar::from_frac(2 * a + 1, 8),
            hi: QuadScalar::from_frac(2 * b + 1, 8),
        };
        let inside = float_isolate(&*fx.eval_squarefree, lo, hi).len();
        assert_eq!(chain.count_in(&domain).unwrap(), inside, "case {case}");
    }
}
