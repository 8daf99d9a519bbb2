//! Property tests: group tables, divisibility, the weight function,
//! positivity of the carré du champ, and analytic cross-checks.

use dunkl_core::calculus::{dunkl_gradient_at, weight, CarreMethod, DunklOps};
use dunkl_core::linalg::dot_f64;
use dunkl_core::observable::{Observable, Tanh};
use dunkl_core::poly::sample::random_rational_poly;
use dunkl_core::probes::{ball_probes, default_probes};
use dunkl_core::quadrature::{gaussian_weighted_integral, tanh_sinh};
use dunkl_core::{parse_poly, ratio, DriftSpec, Family, GroupTable, MultiPoly, Rational, RootSystem};
use proptest::prelude::*;
use rand::rngs::SmallRng;
use rand::SeedableRng;

fn catalog_f64() -> Vec<RootSystem<f64>> {
    vec![
        RootSystem::build_standard(Family::A, 2, &[ratio(1, 3)]).unwrap(),
        RootSystem::build_standard(Family::B, 3, &[ratio(1, 5), ratio(2, 5)]).unwrap(),
        RootSystem::build_standard(Family::I2(5), 2, &[ratio(1, 4)]).unwrap(),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 64, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn group_composition_is_associative(sys in 0usize..3, a in 0usize..1000, b in 0usize..1000, c in 0usize..1000) {
        let rs = &catalog_f64()[sys];
        let t = GroupTable::new(rs);
        let (a, b, c) = (a % t.len(), b % t.len(), c % t.len());
        prop_assert_eq!(t.compose[t.compose[a][b]][c], t.compose[a][t.compose[b][c]]);
        prop_assert_eq!(t.compose[a][t.inverse[a]], t.identity);
        prop_assert_eq!(t.compose[t.identity][a], a);
    }

    #[test]
    fn divided_differences_stay_polynomial(seed in any::<u64>(), deg in 0u32..=8) {
        let mut rng = SmallRng::seed_from_u64(seed);
        let rs = RootSystem::<Rational>::build_standard(Family::B, 2, &[ratio(1, 3), ratio(1, 7)]).unwrap();
        let ops = DunklOps::new(&rs);
        let f = random_rational_poly(&mut rng, 2, deg, 5);
        for r in 0..rs.positive_roots().len() {
            let q = ops.divided_difference(&f, r).unwrap();
            prop_assert!(q.is_zero() || q.total_degree() + 1 <= f.total_degree());
        }
    }

    #[test]
    fn weight_is_homogeneous_and_invariant(x in prop::collection::vec(-3.0f64..3.0, 3), lam in 0.1f64..4.0, g in 0usize..100) {
        let rs = RootSystem::<f64>::build_standard(Family::A, 2, &[ratio(1, 3)]).unwrap();
        let w = weight(&rs, &x);
        let scaled: Vec<f64> = x.iter().map(|v| lam * v).collect();
        let expected = lam.powf(2.0 * rs.gamma()) * w;
        prop_assert!((weight(&rs, &scaled) - expected).abs() <= 1e-10 * (1.0 + expected));
        let t = GroupTable::new(&rs);
        let mut gx = vec![0.0; 3];
        t.apply(g % t.len(), &x, &mut gx);
        prop_assert!((weight(&rs, &gx) - w).abs() <= 1e-10 * (1.0 + w));
    }
}

#[test]
fn gamma_l_is_nonnegative_on_probes() {
    let mut rng = SmallRng::seed_from_u64(17);
    for rs in catalog_f64() {
        let n = rs.dim();
        let ops = DunklOps::new(&rs);
        let b = DriftSpec::linear(ratio(1, 1)).field_poly::<f64>(n).unwrap();
        let probes = default_probes(&rs, 1000);
        for _ in 0..3 {
            let h = dunkl_core::poly::sample::random_poly::<f64, _>(&mut rng, n, 4, 4);
            let g = ops.gamma_l(&b, &h, CarreMethod::ClosedForm).unwrap();
            for x in &probes {
                let v = g.eval_f64(x);
                assert!(v >= -1e-9 * (1.0 + v.abs()), "{} at {x:?}: {v}", rs.label());
            }
        }
    }
}

#[test]
fn representation_formula_matches_quadrature() {
    let rs = RootSystem::<f64>::build_standard(Family::A, 2, &[ratio(1, 3)]).unwrap();
    let f = Tanh { coord: 0 };
    for x in ball_probes(&rs, 20, 2.0) {
        for p in rs.positive_roots() {
            let a = p.root.normalized_f64();
            let ell = dot_f64(&a, &x);
            let sx: Vec<f64> = x.iter().zip(&a).map(|(xi, ai)| xi - ell * ai).collect();
            let lhs = (f.eval(&x) - f.eval(&sx)) / ell;
            let rhs = tanh_sinh(
                |t| {
                    let z: Vec<f64> = x.iter().zip(&a).map(|(xi, ai)| xi - t * ell * ai).collect();
                    dot_f64(&a, &f.gradient(&z))
                },
                0.0,
                1.0,
                1e-13,
                1e-13,
            )
            .unwrap()
            .value;
            assert!((lhs - rhs).abs() < 1e-9, "{x:?}: {lhs} vs {rhs}");
        }
    }
}

#[test]
fn pointwise_gradient_agrees_with_symbolic() {
    let rs = RootSystem::<f64>::build_standard(Family::B, 2, &[ratio(1, 5), ratio(1, 3)]).unwrap();
    let ops = DunklOps::new(&rs);
    let f: MultiPoly<f64> = parse_poly("x1^3*x2 - 2*x2^2 + x1", 2).unwrap();
    let obs = dunkl_core::observable::PolyObservable::new(&f);
    let sym = ops.gradient(&f).unwrap();
    for x in ball_probes(&rs, 20, 2.0) {
        let num = dunkl_gradient_at(&rs, &obs, &x);
        for (s, v) in sym.iter().zip(&num) {
            assert!((s.eval_f64(&x) - v).abs() < 1e-9 * (1.0 + v.abs()));
        }
    }
}

/// With `c = 2` the generator is symmetric in `L^2(nu)` and `int L f dnu = 0`.
#[test]
fn integration_by_parts_in_one_dimension() {
    let rs = RootSystem::<f64>::build_standard(Family::A, 1, &[ratio(1, 4)]).unwrap();
    let ops = DunklOps::new(&rs);
    let c = 2.0;
    let b = DriftSpec::linear(ratio(2, 1)).field_poly::<f64>(1).unwrap();
    let polys: Vec<MultiPoly<f64>> = ["x", "x^2", "x^3 - x", "x^4"].iter().map(|s| parse_poly(s, 1).unwrap()).collect();
    let int = |h: &dyn Fn(&[f64]) -> f64| gaussian_weighted_integral(&rs, c, h, 1e-12).unwrap().value;
    let z = int(&|_| 1.0);
    for f in &polys {
        let lf = ops.generator(&b, f).unwrap();
        assert!(int(&|x| lf.eval_f64(x)).abs() / z < 1e-6);
        for g in &polys {
            let lg = ops.generator(&b, g).unwrap();
            let left = int(&|x| g.eval_f64(x) * lf.eval_f64(x)) / z;
            let right = int(&|x| f.eval_f64(x) * lg.eval_f64(x)) / z;
            assert!((left - right).abs() < 1e-6 * (1.0 + left.abs()), "{f} {g}: {left} vs {right}");
        }
    }
}
