//! Root systems normalised to `<a,a> = 2`, their reflection groups and
//! multiplicity functions.
//!
//! A root is stored as a direction `dir` together with `norm2 = |dir|^2`; the
//! normalised root is `dir * sqrt(2 / norm2)`. Reflections and divided
//! differences only need `dir`, so systems with irrational normalisation (for
//! example `A_1` embedded in `R^1`) stay exact.

use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{CoreError, Result};
use crate::linalg::{dot, Matrix};
use crate::scalar::{ratio, Rational, Scalar, ScalarKey};

/// Maximal number of group elements generated before giving up.
pub const GROUP_CAP: usize = 10_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Family {
    A,
    B,
    D,
    /// Dihedral system `I_2(m)`.
    I2(u32),
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Family::A => write!(f, "A"),
            Family::B => write!(f, "B"),
            Family::D => write!(f, "D"),
            Family::I2(m) => write!(f, "I2({m})"),
        }
    }
}

/// A root given by a direction; the normalised root is `dir * sqrt(2/norm2)`.
#[derive(Clone, Debug, PartialEq)]
pub struct Root<S> {
    pub dir: Vec<S>,
    pub norm2: S,
}

impl<S: Scalar> Root<S> {
    pub fn new(dir: Vec<S>) -> Self {
        let norm2 = dot(&dir, &dir);
        Self { dir, norm2 }
    }

    /// `<dir, x>`; the normalised pairing is this times `sqrt(2/norm2)`.
    pub fn pairing(&self, x: &[S]) -> S {
        dot(&self.dir, x)
    }

    pub fn reflect(&self, x: &[S]) -> Vec<S> {
        let two = S::from_i64(2);
        let s = two.mul(&self.pairing(x)).div(&self.norm2);
        x.iter().zip(&self.dir).map(|(xi, di)| xi.sub(&s.mul(di))).collect()
    }

    pub fn reflection_matrix(&self) -> Matrix<S> {
        let n = self.dir.len();
        let two = S::from_i64(2);
        let mut data = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                let id = if i == j { S::one() } else { S::zero() };
                data.push(id.sub(&two.mul(&self.dir[i]).mul(&self.dir[j]).div(&self.norm2)));
            }
        }
        Matrix::from_rows(n, data)
    }

    /// Normalised root as floats (`|a|^2 = 2`).
    pub fn normalized_f64(&self) -> Vec<f64> {
        let s = (2.0 / self.norm2.to_f64()).sqrt();
        self.dir.iter().map(|d| d.to_f64() * s).collect()
    }

    /// Whether `self` and `o` describe the same normalised root.
    pub fn same_ray(&self, o: &Self) -> bool {
        let p = dot(&self.dir, &o.dir);
        if !(p > S::zero()) {
            return false;
        }
        p.mul(&p).approx_eq(&self.norm2.mul(&o.norm2), self.norm2.mul(&o.norm2).to_f64())
    }

    fn parallel(&self, o: &Self) -> bool {
        let p = dot(&self.dir, &o.dir);
        p.mul(&p).approx_eq(&self.norm2.mul(&o.norm2), self.norm2.mul(&o.norm2).to_f64())
    }

    fn negated(&self) -> Self {
        Self { dir: self.dir.iter().map(Scalar::neg).collect(), norm2: self.norm2.clone() }
    }

    pub fn to_f64(&self) -> Root<f64> {
        Root { dir: self.normalized_f64(), norm2: 2.0 }
    }
}

/// A positive root with its multiplicity and cached reflection.
#[derive(Clone, Debug)]
pub struct PositiveRoot<S> {
    pub root: Root<S>,
    pub k: S,
    pub reflection: Matrix<S>,
    /// Index of the G-orbit this root belongs to.
    pub orbit: usize,
}

/// Immutable root system context: roots, positive subsystem, multiplicities,
/// reflection group and `gamma = sum of k over positive roots`.
#[derive(Clone, Debug)]
pub struct RootSystem<S> {
    dim: usize,
    label: String,
    roots: Vec<Root<S>>,
    positive: Vec<PositiveRoot<S>>,
    group: Vec<Matrix<S>>,
    gamma: S,
    n_orbits: usize,
}

/// Generic vector defining the positive subsystem: `v_i = 1 - i*1e-3`.
fn generic_vector<S: Scalar>(n: usize) -> Vec<S> {
    (0..n).map(|i| S::from_rational(&ratio(1000 - i as i64, 1000))).collect()
}

fn unit<S: Scalar>(n: usize, i: usize) -> Vec<S> {
    let mut v = vec![S::zero(); n];
    v[i] = S::one();
    v
}

fn combo<S: Scalar>(n: usize, i: usize, j: usize, sign: i64) -> Vec<S> {
    let mut v = vec![S::zero(); n];
    v[i] = S::one();
    v[j] = S::from_i64(sign);
    v
}

/// Directions (one per +- pair, listed orbit by orbit) for a catalog family.
fn catalog_directions<S: Scalar>(family: Family, rank: usize) -> Result<(usize, Vec<Root<S>>)> {
    let bad_rank = |min: usize| CoreError::InvalidRootSystem(format!("{family}{rank}: rank must be >= {min}"));
    match family {
        Family::A => {
            if rank < 1 {
                return Err(bad_rank(1));
            }
            if rank == 1 {
                return Ok((1, vec![Root::new(vec![S::one()])]));
            }
            let n = rank + 1;
            let mut out = Vec::new();
            for i in 0..n {
                for j in i + 1..n {
                    out.push(Root::new(combo(n, i, j, -1)));
                }
            }
            Ok((n, out))
        }
        Family::B => {
            if rank < 2 {
                return Err(bad_rank(2));
            }
            let n = rank;
            let mut out = Vec::new();
            for i in 0..n {
                for j in i + 1..n {
                    out.push(Root::new(combo(n, i, j, -1)));
                    out.push(Root::new(combo(n, i, j, 1)));
                }
            }
            for i in 0..n {
                out.push(Root::new(unit(n, i)));
            }
            Ok((n, out))
        }
        Family::D => {
            if rank < 3 {
                return Err(bad_rank(3));
            }
            let n = rank;
            let mut out = Vec::new();
            for i in 0..n {
                for j in i + 1..n {
                    out.push(Root::new(combo(n, i, j, -1)));
                    out.push(Root::new(combo(n, i, j, 1)));
                }
            }
            Ok((n, out))
        }
        Family::I2(m) => {
            if rank != 2 {
                return Err(CoreError::InvalidRootSystem(format!("I2({m}) has rank 2, got {rank}")));
            }
            if m < 2 {
                return Err(CoreError::InvalidRootSystem(format!("I2({m}): m must be >= 2")));
            }
            // Rational directions exist only for m = 2 and m = 4.
            let rational: Option<Vec<(i64, i64)>> = match m {
                2 => Some(vec![(1, 0), (0, 1)]),
                4 => Some(vec![(1, 0), (1, 1), (0, 1), (-1, 1)]),
                _ => None,
            };
            if let Some(dirs) = rational {
                let mut out: Vec<Root<S>> = dirs.iter().map(|&(a, b)| Root::new(vec![S::from_i64(a), S::from_i64(b)])).collect();
                // even indices form one orbit, odd the other
                let (even, odd): (Vec<_>, Vec<_>) = out.drain(..).enumerate().partition(|(i, _)| i % 2 == 0);
                out = even.into_iter().chain(odd).map(|(_, r)| r).collect();
                return Ok((2, out));
            }
            if S::EXACT {
                return Err(CoreError::IrrationalScaling(format!("I2({m})")));
            }
            let mut even = Vec::new();
            let mut odd = Vec::new();
            for j in 0..m {
                let th = std::f64::consts::PI * j as f64 / m as f64;
                let r = Root::new(vec![S::from_f64_lossy(th.cos()), S::from_f64_lossy(th.sin())]);
                if m % 2 == 0 && j % 2 == 1 {
                    odd.push(r);
                } else {
                    even.push(r);
                }
            }
            even.extend(odd);
            Ok((2, even))
        }
    }
}

fn root_key<S: Scalar>(r: &Root<S>) -> Vec<ScalarKey> {
    // Normalise to a canonical representative of the ray when exact scaling is possible.
    if S::EXACT {
        let first = r.dir.iter().find(|c| !c.is_zero()).expect("nonzero root").abs();
        r.dir.iter().map(|c| c.div(&first).key()).collect()
    } else {
        r.normalized_f64().iter().map(|c| c.key()).collect()
    }
}

impl<S: Scalar> RootSystem<S> {
    /// Catalog system. `k` holds one value per orbit (or a single value for all).
    /// Orbits are ordered long roots first for `B_n`, and the orbit of the root at
    /// angle 0 first for `I2(m)` with even `m`.
    pub fn build_standard(family: Family, rank: usize, k: &[Rational]) -> Result<Self> {
        let (dim, dirs) = catalog_directions::<S>(family, rank)?;
        let label = format!("{family}{}", if matches!(family, Family::I2(_)) { String::new() } else { rank.to_string() });
        Self::from_directions(dim, label, dirs, KSpec::PerOrbit(k.to_vec()))
    }

    /// User-supplied roots. Each root must satisfy `<a,a> = 2`; the set is
    /// closed under negation automatically. `k` is uniform or one value per input root.
    pub fn from_explicit(roots: &[Vec<S>], k: &[Rational]) -> Result<Self> {
        let dim = roots.first().map(Vec::len).ok_or_else(|| CoreError::InvalidRootSystem("empty root list".into()))?;
        let two = S::from_i64(2);
        let mut dirs: Vec<Root<S>> = Vec::new();
        let mut ks: Vec<Rational> = Vec::new();
        for (idx, r) in roots.iter().enumerate() {
            if r.len() != dim {
                return Err(CoreError::DimensionMismatch { expected: dim, got: r.len() });
            }
            let root = Root::new(r.clone());
            let ok = if S::EXACT { root.norm2 == two } else { (root.norm2.to_f64() - 2.0).abs() <= 1e-12 };
            if !ok {
                return Err(CoreError::InvalidRootSystem(format!("root {idx} has <a,a> = {} (must be 2)", root.norm2)));
            }
            let kv = match k.len() {
                1 => k[0].clone(),
                n if n == roots.len() => k[idx].clone(),
                n => return Err(CoreError::InvalidMultiplicity(format!("expected 1 or {} values, got {n}", roots.len()))),
            };
            if let Some(j) = dirs.iter().position(|d| d.parallel(&root)) {
                if ks[j] != kv {
                    return Err(CoreError::InvalidMultiplicity(format!("k differs on root {idx} and its negative")));
                }
                continue;
            }
            dirs.push(root);
            ks.push(kv);
        }
        Self::from_directions(dim, "explicit".into(), dirs, KSpec::PerRoot(ks))
    }

    fn from_directions(dim: usize, label: String, dirs: Vec<Root<S>>, kspec: KSpec) -> Result<Self> {
        for r in &dirs {
            if r.norm2.is_zero() {
                return Err(CoreError::InvalidRootSystem("zero root".into()));
            }
        }
        // Orient each direction positively with respect to the generic vector.
        let v = generic_vector::<S>(dim);
        let mut pos: Vec<Root<S>> = Vec::with_capacity(dirs.len());
        for r in dirs {
            let p = r.pairing(&v);
            if p.is_zero() {
                return Err(CoreError::InvalidRootSystem("root orthogonal to the generic vector".into()));
            }
            pos.push(if p > S::zero() { r } else { r.negated() });
        }
        // R cap aR = {+-a}
        for i in 0..pos.len() {
            for j in i + 1..pos.len() {
                if pos[i].parallel(&pos[j]) {
                    return Err(CoreError::InvalidRootSystem(format!("roots {i} and {j} are parallel")));
                }
            }
        }
        let mut roots: Vec<Root<S>> = pos.clone();
        roots.extend(pos.iter().map(Root::negated));
        // sigma_a(R) = R
        let index: HashMap<Vec<ScalarKey>, usize> = roots.iter().enumerate().map(|(i, r)| (root_key(r), i)).collect();
        for a in &pos {
            for b in &roots {
                let img = Root { dir: a.reflect(&b.dir), norm2: b.norm2.clone() };
                if !index.contains_key(&root_key(&img)) && !roots.iter().any(|r| r.same_ray(&img)) {
                    return Err(CoreError::InvalidRootSystem("set is not stable under its reflections".into()));
                }
            }
        }
        let reflections: Vec<Matrix<S>> = pos.iter().map(Root::reflection_matrix).collect();
        let group = generate_group(&reflections, GROUP_CAP)?;

        // Orbits of positive roots under G.
        let find_pos = |r: &Root<S>| -> Option<usize> {
            let key = root_key(r);
            let neg_key = root_key(&r.negated());
            pos.iter().position(|p| {
                let pk = root_key(p);
                pk == key || pk == neg_key
            })
        };
        let mut orbit = vec![usize::MAX; pos.len()];
        let mut n_orbits = 0;
        for i in 0..pos.len() {
            if orbit[i] != usize::MAX {
                continue;
            }
            for g in &group {
                let img = Root { dir: g.apply(&pos[i].dir), norm2: pos[i].norm2.clone() };
                let j = find_pos(&img).ok_or_else(|| CoreError::InvalidRootSystem("group moves a root outside R".into()))?;
                orbit[j] = n_orbits;
            }
            n_orbits += 1;
        }

        let ks: Vec<Rational> = match kspec {
            KSpec::PerOrbit(k) => match k.len() {
                1 => vec![k[0].clone(); pos.len()],
                n if n == n_orbits => orbit.iter().map(|&o| k[o].clone()).collect(),
                n => {
                    return Err(CoreError::InvalidMultiplicity(format!("{label} has {n_orbits} orbit(s); got {n} multiplicities")))
                }
            },
            KSpec::PerRoot(k) => k,
        };
        for kv in &ks {
            if *kv < Rational::from_i64(0) {
                return Err(CoreError::InvalidMultiplicity(format!("negative multiplicity {kv}")));
            }
        }
        // k must be constant on orbits.
        for i in 0..pos.len() {
            for j in 0..pos.len() {
                if orbit[i] == orbit[j] && ks[i] != ks[j] {
                    return Err(CoreError::InvalidMultiplicity(format!("k is not G-invariant: roots {i} and {j} share an orbit")));
                }
            }
        }
        let gamma = ks.iter().fold(S::zero(), |acc, kv| acc.add(&S::from_rational(kv)));
        let positive = pos
            .into_iter()
            .zip(reflections)
            .zip(ks.iter().zip(&orbit))
            .map(|((root, reflection), (kv, &o))| PositiveRoot { root, k: S::from_rational(kv), reflection, orbit: o })
            .collect();
        Ok(Self { dim, label, roots, positive, group, gamma, n_orbits })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    /// Full root system `R` (positive roots first, then their negatives).
    pub fn roots(&self) -> &[Root<S>] {
        &self.roots
    }

    pub fn positive_roots(&self) -> &[PositiveRoot<S>] {
        &self.positive
    }

    pub fn group(&self) -> &[Matrix<S>] {
        &self.group
    }

    pub fn gamma(&self) -> &S {
        &self.gamma
    }

    pub fn n_orbits(&self) -> usize {
        self.n_orbits
    }

    pub fn reflect(&self, root: usize, x: &[S]) -> Vec<S> {
        self.positive[root].root.reflect(x)
    }

    /// Same system with every multiplicity set to zero.
    pub fn with_zero_multiplicities(&self) -> Self {
        let mut out = self.clone();
        for p in &mut out.positive {
            p.k = S::zero();
        }
        out.gamma = S::zero();
        out
    }

    /// Replace the multiplicities by one value per orbit.
    pub fn with_multiplicities(&self, k: &[Rational]) -> Result<Self> {
        if k.len() != 1 && k.len() != self.n_orbits {
            return Err(CoreError::InvalidMultiplicity(format!("expected 1 or {} values", self.n_orbits)));
        }
        let mut out = self.clone();
        let mut gamma = S::zero();
        for p in &mut out.positive {
            let kv = if k.len() == 1 { &k[0] } else { &k[p.orbit] };
            if *kv < Rational::from_i64(0) {
                return Err(CoreError::InvalidMultiplicity(format!("negative multiplicity {kv}")));
            }
            p.k = S::from_rational(kv);
            gamma = gamma.add(&p.k);
        }
        out.gamma = gamma;
        Ok(out)
    }

    /// Floating copy with normalised roots (`|a|^2 = 2` stored explicitly).
    pub fn to_f64(&self) -> RootSystem<f64> {
        RootSystem {
            dim: self.dim,
            label: self.label.clone(),
            roots: self.roots.iter().map(Root::to_f64).collect(),
            positive: self
                .positive
                .iter()
                .map(|p| PositiveRoot { root: p.root.to_f64(), k: p.k.to_f64(), reflection: p.reflection.to_f64(), orbit: p.orbit })
                .collect(),
            group: self.group.iter().map(Matrix::to_f64).collect(),
            gamma: self.gamma.to_f64(),
            n_orbits: self.n_orbits,
        }
    }

    /// Check every structural invariant; used by tests and by loaders.
    pub fn validate(&self) -> Result<()> {
        for g in &self.group {
            if !g.is_orthogonal() {
                return Err(CoreError::InvalidRootSystem("non-orthogonal group element".into()));
            }
            for r in &self.roots {
                let img = Root { dir: g.apply(&r.dir), norm2: r.norm2.clone() };
                if !self.roots.iter().any(|s| s.same_ray(&img)) {
                    return Err(CoreError::InvalidRootSystem("group element does not preserve R".into()));
                }
            }
            for (i, p) in self.positive.iter().enumerate() {
                let img = Root { dir: g.apply(&p.root.dir), norm2: p.root.norm2.clone() };
                let j = self
                    .positive
                    .iter()
                    .position(|q| q.root.same_ray(&img) || q.root.same_ray(&img.negated()))
                    .ok_or_else(|| CoreError::InvalidRootSystem("orbit leaves R".into()))?;
                if self.positive[j].k != p.k {
                    return Err(CoreError::InvalidMultiplicity(format!("k(a_{i}) != k(g a_{i})")));
                }
            }
        }
        for p in &self.positive {
            let a = p.root.normalized_f64();
            if (a.iter().map(|v| v * v).sum::<f64>() - 2.0).abs() > 1e-12 {
                return Err(CoreError::InvalidRootSystem("root normalisation".into()));
            }
        }
        Ok(())
    }
}

enum KSpec {
    PerOrbit(Vec<Rational>),
    PerRoot(Vec<Rational>),
}

/// Closure of `generators` under multiplication.
pub fn generate_group<S: Scalar>(generators: &[Matrix<S>], cap: usize) -> Result<Vec<Matrix<S>>> {
    let n = generators.first().map(Matrix::dim).unwrap_or(0);
    let id = Matrix::identity(n);
    let mut seen: HashMap<Vec<ScalarKey>, usize> = HashMap::new();
    seen.insert(id.key(), 0);
    let mut elems = vec![id];
    let mut frontier = 0;
    while frontier < elems.len() {
        let g = elems[frontier].clone();
        frontier += 1;
        for s in generators {
            let h = s.mul(&g);
            let key = h.key();
            if !seen.contains_key(&key) {
                if elems.len() >= cap {
                    return Err(CoreError::GroupTooLarge { cap });
                }
                seen.insert(key, elems.len());
                elems.push(h);
            }
        }
    }
    Ok(elems)
}

/// Multiplication table of a finite group of floating matrices.
#[derive(Clone, Debug)]
pub struct GroupTable {
    pub dim: usize,
    /// Row-major element matrices.
    pub elements: Vec<Vec<f64>>,
    pub identity: usize,
    /// `compose[a][b]` is the index of `a * b`.
    pub compose: Vec<Vec<usize>>,
    pub inverse: Vec<usize>,
    /// `right_reflect[g][b]` is the index of `g * sigma_b` for positive root `b`.
    pub right_reflect: Vec<Vec<usize>>,
}

impl GroupTable {
    pub fn new<S: Scalar>(rs: &RootSystem<S>) -> Self {
        let rf = rs.to_f64();
        let elements: Vec<Vec<f64>> = rf.group().iter().map(|m| m.data().to_vec()).collect();
        let key = |m: &[f64]| m.iter().map(|v| v.key()).collect::<Vec<_>>();
        let index: HashMap<Vec<ScalarKey>, usize> = elements.iter().enumerate().map(|(i, m)| (key(m), i)).collect();
        let dim = rf.dim();
        let find = |m: &Matrix<f64>| *index.get(&key(m.data())).expect("group closed under multiplication");
        let mats: Vec<Matrix<f64>> = rf.group().to_vec();
        let compose: Vec<Vec<usize>> = mats.iter().map(|a| mats.iter().map(|b| find(&a.mul(b))).collect()).collect();
        let identity = find(&Matrix::identity(dim));
        let inverse = (0..mats.len()).map(|a| (0..mats.len()).find(|&b| compose[a][b] == identity).expect("inverse")).collect();
        let right_reflect = mats.iter().map(|g| rf.positive_roots().iter().map(|p| find(&g.mul(&p.reflection))).collect()).collect();
        Self { dim, elements, identity, compose, inverse, right_reflect }
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    /// `out = g x`.
    pub fn apply(&self, g: usize, x: &[f64], out: &mut [f64]) {
        let m = &self.elements[g];
        let n = self.dim;
        for i in 0..n {
            let mut s = 0.0;
            for j in 0..n {
                s += m[i * n + j] * x[j];
            }
            out[i] = s;
        }
    }

    /// `out = g^T x`.
    pub fn apply_transpose(&self, g: usize, x: &[f64], out: &mut [f64]) {
        let m = &self.elements[g];
        let n = self.dim;
        for i in 0..n {
            let mut s = 0.0;
            for j in 0..n {
                s += m[j * n + i] * x[j];
            }
            out[i] = s;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> Rational {
        ratio(n, d)
    }

    #[test]
    fn a1_basic() {
        let rs = RootSystem::<Rational>::build_standard(Family::A, 1, &[q(1, 4)]).unwrap();
        assert_eq!(rs.dim(), 1);
        assert_eq!(rs.positive_roots().len(), 1);
        assert_eq!(rs.group().len(), 2);
        assert_eq!(rs.reflect(0, &[q(3, 1)]), vec![q(-3, 1)]);
        let a = rs.positive_roots()[0].root.normalized_f64();
        assert!((a[0] - 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn a2_positive_roots_and_group() {
        let rs = RootSystem::<Rational>::build_standard(Family::A, 2, &[q(1, 3)]).unwrap();
        let dirs: Vec<Vec<Rational>> = rs.positive_roots().iter().map(|p| p.root.dir.clone()).collect();
        let e = |v: [i64; 3]| v.iter().map(|&x| q(x, 1)).collect::<Vec<_>>();
        assert_eq!(dirs, vec![e([1, -1, 0]), e([1, 0, -1]), e([0, 1, -1])]);
        assert_eq!(rs.group().len(), 6);
        assert_eq!(*rs.gamma(), q(1, 1));
        assert_eq!(rs.reflect(0, &e([1, 2, 5])), e([2, 1, 5]));
        rs.validate().unwrap();
    }

    #[test]
    fn b2_orbits() {
        let rs = RootSystem::<Rational>::build_standard(Family::B, 2, &[q(1, 10), q(2, 10)]).unwrap();
        assert_eq!(rs.positive_roots().len(), 4);
        assert_eq!(rs.group().len(), 8);
        assert_eq!(*rs.gamma(), q(6, 10));
        assert_eq!(rs.n_orbits(), 2);
        rs.validate().unwrap();
    }

    #[test]
    fn dihedral_needs_floats() {
        assert!(matches!(
            RootSystem::<Rational>::build_standard(Family::I2(3), 2, &[q(1, 4)]),
            Err(CoreError::IrrationalScaling(_))
        ));
        let rs = RootSystem::<f64>::build_standard(Family::I2(3), 2, &[q(1, 4)]).unwrap();
        assert_eq!(rs.group().len(), 6);
        let rs = RootSystem::<f64>::build_standard(Family::I2(5), 2, &[q(1, 4)]).unwrap();
        assert_eq!(rs.group().len(), 10);
        rs.validate().unwrap();
    }

    #[test]
    fn rejects_bad_input() {
        assert!(RootSystem::<Rational>::build_standard(Family::B, 1, &[q(1, 4)]).is_err());
        assert!(RootSystem::<Rational>::build_standard(Family::A, 2, &[q(-1, 4)]).is_err());
        assert!(RootSystem::<Rational>::build_standard(Family::B, 3, &[q(1, 4), q(1, 5), q(1, 6)]).is_err());
        // not stable: two roots at 60 degrees without the third
        let bad = vec![vec![2f64.sqrt(), 0.0], vec![2f64.sqrt() / 2.0, (1.5f64).sqrt()]];
        assert!(RootSystem::<f64>::from_explicit(&bad, &[q(1, 4)]).is_err());
        // wrong normalisation
        assert!(RootSystem::<f64>::from_explicit(&[vec![1.0, 0.0]], &[q(1, 4)]).is_err());
    }

    #[test]
    fn explicit_roots_are_completed_with_negatives() {
        let s = 2f64.sqrt();
        let rs = RootSystem::<f64>::from_explicit(&[vec![s, 0.0], vec![0.0, -s]], &[q(1, 4)]).unwrap();
        assert_eq!(rs.roots().len(), 4);
        assert_eq!(rs.group().len(), 4);
    }

    #[test]
    fn group_table_is_consistent() {
        let rs = RootSystem::<Rational>::build_standard(Family::B, 2, &[q(1, 10), q(1, 5)]).unwrap();
        let t = GroupTable::new(&rs);
        assert_eq!(t.len(), 8);
        for a in 0..t.len() {
            assert_eq!(t.compose[a][t.inverse[a]], t.identity);
            for b in 0..rs.positive_roots().len() {
                let back = t.right_reflect[t.right_reflect[a][b]][b];
                assert_eq!(back, a);
            }
        }
    }
}
