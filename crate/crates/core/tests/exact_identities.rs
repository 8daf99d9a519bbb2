//! Exact identities of the Dunkl calculus over rational arithmetic.

use dunkl_core::calculus::{eta_constant, CarreMethod, DunklOps, LaplacianMethod};
use dunkl_core::poly::sample::random_rational_poly;
use dunkl_core::{ratio, DriftSpec, Family, MultiPoly, Rational, RootSystem};
use rand::rngs::SmallRng;
use rand::{Rng, SeedableRng};

fn random_k(rng: &mut SmallRng) -> Rational {
    let d = rng.random_range(1i64..=12);
    ratio(rng.random_range(0..=d), d)
}

fn systems(rng: &mut SmallRng) -> Vec<RootSystem<Rational>> {
    vec![
        RootSystem::build_standard(Family::A, 1, &[random_k(rng)]).unwrap(),
        RootSystem::build_standard(Family::A, 2, &[random_k(rng)]).unwrap(),
        RootSystem::build_standard(Family::A, 3, &[random_k(rng)]).unwrap(),
        RootSystem::build_standard(Family::D, 4, &[random_k(rng)]).unwrap(),
    ]
}

#[test]
fn identity_suite_on_random_polynomials() {
    let mut rng = SmallRng::seed_from_u64(2024);
    for rs in systems(&mut rng) {
        let n = rs.dim();
        let ops = DunklOps::new(&rs);
        let group = rs.group();
        for case in 0..100 {
            let f = random_rational_poly(&mut rng, n, 6, 4);
            let tf: Vec<MultiPoly<Rational>> = (0..n).map(|i| ops.dunkl_t(i, &f).unwrap()).collect();
            for i in 0..n {
                for j in i + 1..n {
                    assert_eq!(ops.dunkl_t(j, &tf[i]).unwrap(), ops.dunkl_t(i, &tf[j]).unwrap(), "{} case {case}: T{i}T{j}", rs.label());
                }
            }
            assert_eq!(
                ops.laplacian(&f, LaplacianMethod::SumOfSquares).unwrap(),
                ops.laplacian(&f, LaplacianMethod::ClosedForm).unwrap(),
                "{} case {case}: Laplacian",
                rs.label()
            );
            let g = random_rational_poly(&mut rng, n, 3, 3);
            let i = case % n;
            assert_eq!(ops.leibniz_defect(&f, &g, i).unwrap(), ops.leibniz_formula(&f, &g, i).unwrap(), "{} case {case}: Leibniz", rs.label());
            if case % 4 == 0 {
                let h = random_rational_poly(&mut rng, n, 3, 3);
                assert_eq!(
                    ops.carre_du_champ(&h, CarreMethod::Definition).unwrap(),
                    ops.carre_du_champ(&h, CarreMethod::ClosedForm).unwrap(),
                    "{} case {case}: carre du champ",
                    rs.label()
                );
            }
            let m = &group[rng.random_range(0..group.len())];
            let (lhs, rhs) = ops.equivariance_sides(&f, m).unwrap();
            assert_eq!(lhs, rhs, "{} case {case}: equivariance", rs.label());
        }
    }
}

#[test]
fn generator_decomposition_is_exact_for_linear_drift() {
    let mut rng = SmallRng::seed_from_u64(99);
    let catalog: Vec<RootSystem<Rational>> = vec![
        RootSystem::build_standard(Family::A, 1, &[ratio(1, 4)]).unwrap(),
        RootSystem::build_standard(Family::A, 2, &[ratio(1, 3)]).unwrap(),
        RootSystem::build_standard(Family::A, 3, &[ratio(2, 5)]).unwrap(),
        RootSystem::build_standard(Family::B, 2, &[ratio(1, 10), ratio(1, 5)]).unwrap(),
        RootSystem::build_standard(Family::B, 3, &[ratio(1, 2), ratio(1, 7)]).unwrap(),
        RootSystem::build_standard(Family::D, 4, &[ratio(1, 6)]).unwrap(),
    ];
    for rs in &catalog {
        let n = rs.dim();
        let ops = DunklOps::new(rs);
        let b = DriftSpec::linear(ratio(3, 2)).field_poly::<Rational>(n).unwrap();
        for _ in 0..10 {
            let f = random_rational_poly(&mut rng, n, 5, 4);
            let direct = ops.generator(&b, &f).unwrap();
            let split = ops.generator_via_decomposition(&b, &f).unwrap();
            assert!(direct.sub(&split).is_zero(), "{}", rs.label());
        }
    }
}

#[test]
fn generator_decomposition_on_float_dihedral_systems() {
    let mut rng = SmallRng::seed_from_u64(5);
    for m in [3, 5, 6] {
        let rs = RootSystem::<f64>::build_standard(Family::I2(m), 2, &[ratio(1, 4), ratio(1, 3)][..if m % 2 == 0 { 2 } else { 1 }]).unwrap();
        let ops = DunklOps::new(&rs);
        let b = DriftSpec::linear(ratio(1, 1)).field_poly::<f64>(2).unwrap();
        for _ in 0..10 {
            let f = dunkl_core::poly::sample::random_poly::<f64, _>(&mut rng, 2, 4, 4);
            let d = ops.generator(&b, &f).unwrap().sub(&ops.generator_via_decomposition(&b, &f).unwrap());
            assert!(d.approx_zero(1e-9 * (1.0 + f.max_abs_coeff())), "I2({m})");
        }
    }
}

#[test]
fn eta_of_linear_drift_is_minus_c_plus_two_c_gamma() {
    for (k, expected) in [(ratio(1, 4), ratio(-1, 2)), (ratio(1, 2), ratio(0, 1))] {
        let rs = RootSystem::<Rational>::build_standard(Family::A, 1, &[k]).unwrap();
        let bounds = DriftSpec::linear(ratio(1, 1)).bounds::<Rational>().unwrap();
        assert_eq!(eta_constant(&bounds, 1, rs.gamma()).unwrap(), expected);
    }
}
