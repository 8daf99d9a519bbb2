//! Identity suite of the Dunkl calculus on random polynomials.

use rand::rngs::SmallRng;
use rand::{Rng, SeedableRng};
use serde::Serialize;

use crate::calculus::{CarreMethod, DunklOps, LaplacianMethod};
use crate::drift::DriftSpec;
use crate::error::Result;
use crate::poly::sample::{random_poly, random_rational_poly};
use crate::poly::MultiPoly;
use crate::root_system::RootSystem;
use crate::scalar::{Rational, Scalar};

/// Worst residual of one identity over the sampled polynomials.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct IdentityReport {
    pub check: String,
    pub system: String,
    pub k: String,
    pub n_cases: usize,
    pub max_abs_residual: f64,
    /// Residuals are exact when the scalars are rational.
    pub exact: bool,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SuiteOptions {
    pub n_polys: usize,
    pub max_degree: u32,
    pub n_terms: usize,
    /// Run the carre du champ comparison on every `carre_every`-th case.
    pub carre_every: usize,
    pub seed: u64,
    /// Tolerance relative to the coefficient scale in floating mode.
    pub float_tol: f64,
}

impl Default for SuiteOptions {
    fn default() -> Self {
        Self { n_polys: 100, max_degree: 6, n_terms: 4, carre_every: 4, seed: 2024, float_tol: 1e-9 }
    }
}

/// Scalars that can be sampled for the suite.
pub trait SuiteScalar: Scalar {
    fn sample(rng: &mut SmallRng, n: usize, max_degree: u32, n_terms: usize) -> MultiPoly<Self>;
}

impl SuiteScalar for Rational {
    fn sample(rng: &mut SmallRng, n: usize, max_degree: u32, n_terms: usize) -> MultiPoly<Self> {
        random_rational_poly(rng, n, max_degree, n_terms)
    }
}

impl SuiteScalar for f64 {
    fn sample(rng: &mut SmallRng, n: usize, max_degree: u32, n_terms: usize) -> MultiPoly<Self> {
        random_poly(rng, n, max_degree, n_terms)
    }
}

struct Tally {
    name: &'static str,
    cases: usize,
    worst: f64,
    ok: bool,
}

impl Tally {
    fn new(name: &'static str) -> Self {
        Self { name, cases: 0, worst: 0.0, ok: true }
    }

    fn record<S: SuiteScalar>(&mut self, lhs: &MultiPoly<S>, rhs: &MultiPoly<S>, tol: f64) {
        let d = lhs.sub(rhs);
        self.cases += 1;
        let r = d.max_abs_coeff();
        self.worst = self.worst.max(r);
        let scale = 1.0 + lhs.max_abs_coeff().max(rhs.max_abs_coeff());
        self.ok &= if S::EXACT { d.is_zero() } else { r <= tol * scale };
    }
}

/// Commutativity, Laplacian closed form, Leibniz defect, carre du champ,
/// equivariance and (with a polynomial drift) the generator decomposition.
pub fn run_identity_suite<S: SuiteScalar>(rs: &RootSystem<S>, drift: Option<&DriftSpec>, opts: &SuiteOptions) -> Result<Vec<IdentityReport>> {
    let n = rs.dim();
    let ops = DunklOps::new(rs);
    let group = rs.group();
    let mut rng = SmallRng::seed_from_u64(opts.seed);
    let mut comm = Tally::new("commutativity");
    let mut lap = Tally::new("laplacian_closed_form");
    let mut leib = Tally::new("leibniz_defect");
    let mut carre = Tally::new("carre_du_champ");
    let mut equiv = Tally::new("equivariance");
    let mut gen = Tally::new("generator_decomposition");
    let b = drift.and_then(|d| d.field_poly::<S>(n));
    let tol = opts.float_tol;
    for case in 0..opts.n_polys {
        let f = S::sample(&mut rng, n, opts.max_degree, opts.n_terms);
        let tf: Vec<MultiPoly<S>> = (0..n).map(|i| ops.dunkl_t(i, &f)).collect::<Result<_>>()?;
        for i in 0..n {
            for j in i + 1..n {
                comm.record(&ops.dunkl_t(j, &tf[i])?, &ops.dunkl_t(i, &tf[j])?, tol);
            }
        }
        lap.record(&ops.laplacian(&f, LaplacianMethod::SumOfSquares)?, &ops.laplacian(&f, LaplacianMethod::ClosedForm)?, tol);
        let g = S::sample(&mut rng, n, opts.max_degree.min(3), opts.n_terms.min(3));
        let i = case % n;
        leib.record(&ops.leibniz_defect(&f, &g, i)?, &ops.leibniz_formula(&f, &g, i)?, tol);
        if opts.carre_every > 0 && case % opts.carre_every == 0 {
            let h = S::sample(&mut rng, n, opts.max_degree.min(3), opts.n_terms.min(3));
            carre.record(&ops.carre_du_champ(&h, CarreMethod::Definition)?, &ops.carre_du_champ(&h, CarreMethod::ClosedForm)?, tol);
        }
        let m = &group[rng.random_range(0..group.len())];
        let (lhs, rhs) = ops.equivariance_sides(&f, m)?;
        for (l, r) in lhs.iter().zip(&rhs) {
            equiv.record(l, r, tol);
        }
        if let Some(b) = &b {
            gen.record(&ops.generator(b, &f)?, &ops.generator_via_decomposition(b, &f)?, tol);
        }
    }
    let k = multiplicity_label(rs);
    let mut tallies = vec![comm, lap, leib, carre, equiv];
    if b.is_some() {
        tallies.push(gen);
    }
    Ok(tallies
        .into_iter()
        .filter(|t| t.cases > 0)
        .map(|t| IdentityReport {
            check: t.name.to_string(),
            system: rs.label().to_string(),
            k: k.clone(),
            n_cases: t.cases,
            max_abs_residual: t.worst,
            exact: S::EXACT,
            pass: t.ok,
        })
        .collect())
}

/// Distinct multiplicities in orbit order, `;`-separated.
pub fn multiplicity_label<S: Scalar>(rs: &RootSystem<S>) -> String {
    let mut seen: Vec<(usize, String)> = Vec::new();
    for p in rs.positive_roots() {
        if !seen.iter().any(|(o, _)| *o == p.orbit) {
            seen.push((p.orbit, format!("{}", p.k)));
        }
    }
    seen.sort();
    seen.into_iter().map(|(_, k)| k).collect::<Vec<_>>().join(";")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::root_system::Family;
    use crate::scalar::ratio;

    #[test]
    fn exact_suite_on_a2_has_zero_residuals() {
        let rs = RootSystem::<Rational>::build_standard(Family::A, 2, &[ratio(1, 3)]).unwrap();
        let opts = SuiteOptions { n_polys: 12, ..SuiteOptions::default() };
        let rep = run_identity_suite(&rs, Some(&DriftSpec::linear(ratio(1, 1))), &opts).unwrap();
        assert_eq!(rep.len(), 6);
        assert!(rep.iter().all(|r| r.pass && r.max_abs_residual == 0.0 && r.exact), "{rep:?}");
        assert_eq!(rep[0].k, "1/3");
    }

    #[test]
    fn float_suite_on_dihedral_system_passes() {
        let rs = RootSystem::<f64>::build_standard(Family::I2(5), 2, &[ratio(1, 4)]).unwrap();
        let opts = SuiteOptions { n_polys: 8, max_degree: 4, ..SuiteOptions::default() };
        let rep = run_identity_suite(&rs, None, &opts).unwrap();
        assert!(rep.iter().all(|r| r.pass && !r.exact), "{rep:?}");
    }
}
