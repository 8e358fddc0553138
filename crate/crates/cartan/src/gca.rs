//! Free graded-commutative algebras on finitely many graded generators,
//! with Koszul-sign multiplication, graded derivations, and algebra
//! morphisms given by generator images.
//!
//! Odd-degree generators square to zero; even-degree generators are
//! polynomial.  Monomials are kept in declaration order, accumulating a sign
//! from odd-odd transpositions, so equality of elements is a map comparison.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use crate::error::CartanError;
use crate::scalar::Scalar;

/// Ordered list of named graded generators.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GeneratorSet {
    gens: Vec<(String, i64)>,
}

impl GeneratorSet {
    pub fn new(gens: Vec<(String, i64)>) -> Arc<Self> {
        let mut seen = std::collections::HashSet::new();
        for (name, _) in &gens {
            assert!(seen.insert(name.clone()), "duplicate generator name {name}");
        }
        Arc::new(GeneratorSet { gens })
    }

    pub fn len(&self) -> usize {
        self.gens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gens.is_empty()
    }

    pub fn name(&self, i: usize) -> &str {
        &self.gens[i].0
    }

    pub fn degree(&self, i: usize) -> i64 {
        self.gens[i].1
    }

    pub fn is_odd(&self, i: usize) -> bool {
        self.gens[i].1.rem_euclid(2) == 1
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.gens.iter().position(|(n, _)| n == name)
    }

    /// Concatenation used for tensor products of free algebras; the right
    /// factor's generators are appended and its indices shift by
    /// `self.len()`.
    pub fn concat(&self, other: &GeneratorSet) -> Arc<GeneratorSet> {
        let mut gens = self.gens.clone();
        gens.extend(other.gens.iter().cloned());
        GeneratorSet::new(gens)
    }
}

/// Monomial in canonical form: factors sorted by generator index, exponents
/// positive, odd generators with exponent at most 1.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct Monomial {
    factors: Vec<(usize, u32)>,
}

impl Monomial {
    pub fn one() -> Self {
        Monomial { factors: Vec::new() }
    }

    pub fn generator(i: usize) -> Self {
        Monomial {
            factors: vec![(i, 1)],
        }
    }

    pub fn from_factors(mut factors: Vec<(usize, u32)>, gens: &GeneratorSet) -> Option<Self> {
        factors.retain(|&(_, e)| e > 0);
        factors.sort_by_key(|&(i, _)| i);
        let mut merged: Vec<(usize, u32)> = Vec::new();
        for (i, e) in factors {
            if let Some(last) = merged.last_mut() {
                if last.0 == i {
                    last.1 += e;
                    continue;
                }
            }
            merged.push((i, e));
        }
        for &(i, e) in &merged {
            if gens.is_odd(i) && e > 1 {
                return None;
            }
        }
        Some(Monomial { factors: merged })
    }

    pub fn is_one(&self) -> bool {
        self.factors.is_empty()
    }

    pub fn factors(&self) -> &[(usize, u32)] {
        &self.factors
    }

    pub fn exponent_of(&self, i: usize) -> u32 {
        self.factors
            .iter()
            .find(|&&(j, _)| j == i)
            .map(|&(_, e)| e)
            .unwrap_or(0)
    }

    pub fn degree(&self, gens: &GeneratorSet) -> i64 {
        self.factors
            .iter()
            .map(|&(i, e)| gens.degree(i) * e as i64)
            .sum()
    }

    /// Factor list with multiplicity, ascending.
    pub fn flat_factors(&self) -> Vec<usize> {
        let mut out = Vec::new();
        for &(i, e) in &self.factors {
            for _ in 0..e {
                out.push(i);
            }
        }
        out
    }

    /// Koszul product of two canonical monomials.  Returns the canonical
    /// product and its sign, or `None` when an odd generator squares.
    pub fn mul(&self, other: &Monomial, gens: &GeneratorSet) -> Option<(Monomial, bool)> {
        // Sign: each odd factor of `other` crosses the odd factors of `self`
        // with strictly larger generator index.
        let mut neg = false;
        for &(j, _) in &other.factors {
            if !gens.is_odd(j) {
                continue;
            }
            let crossings = self
                .factors
                .iter()
                .filter(|&&(i, _)| i > j && gens.is_odd(i))
                .count();
            if crossings % 2 == 1 {
                neg = !neg;
            }
        }
        let mut merged = self.factors.clone();
        merged.extend(other.factors.iter().cloned());
        let m = Monomial::from_factors(merged, gens)?;
        Some((m, neg))
    }

    pub fn display(&self, gens: &GeneratorSet) -> String {
        if self.is_one() {
            return "1".to_string();
        }
        self.factors
            .iter()
            .map(|&(i, e)| {
                if e == 1 {
                    gens.name(i).to_string()
                } else {
                    format!("{}^{}", gens.name(i), e)
                }
            })
            .collect::<Vec<_>>()
            .join("*")
    }
}

/// Finite linear combination of monomials with [`Scalar`] coefficients.
#[derive(Clone, Debug)]
pub struct Element {
    gens: Arc<GeneratorSet>,
    terms: BTreeMap<Monomial, Scalar>,
}

impl PartialEq for Element {
    fn eq(&self, other: &Self) -> bool {
        self.gens == other.gens && self.terms == other.terms
    }
}
impl Eq for Element {}

impl Element {
    pub fn zero(gens: Arc<GeneratorSet>) -> Self {
        Element {
            gens,
            terms: BTreeMap::new(),
        }
    }

    pub fn one(gens: Arc<GeneratorSet>) -> Self {
        Self::scalar(gens, Scalar::one())
    }

    pub fn scalar(gens: Arc<GeneratorSet>, c: Scalar) -> Self {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(Monomial::one(), c);
        }
        Element { gens, terms }
    }

    pub fn generator(gens: Arc<GeneratorSet>, i: usize) -> Self {
        let mut terms = BTreeMap::new();
        terms.insert(Monomial::generator(i), Scalar::one());
        Element { gens, terms }
    }

    pub fn monomial(gens: Arc<GeneratorSet>, m: Monomial, c: Scalar) -> Self {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(m, c);
        }
        Element { gens, terms }
    }

    pub fn generators(&self) -> &Arc<GeneratorSet> {
        &self.gens
    }

    pub fn terms(&self) -> &BTreeMap<Monomial, Scalar> {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn check_same_gens(&self, other: &Element) -> Result<(), CartanError> {
        if self.gens != other.gens {
            return Err(CartanError::GeneratorMismatch(
                "elements live in different free algebras".into(),
            ));
        }
        Ok(())
    }

    pub fn add(&self, other: &Element) -> Element {
        self.check_same_gens(other).unwrap();
        let mut terms = self.terms.clone();
        for (m, c) in &other.terms {
            let entry = match terms.remove(m) {
                Some(prev) => prev.add(c),
                None => c.clone(),
            };
            if !entry.is_zero() {
                terms.insert(m.clone(), entry);
            }
        }
        Element {
            gens: self.gens.clone(),
            terms,
        }
    }

    pub fn neg(&self) -> Element {
        self.scale(&Scalar::from_int(-1))
    }

    pub fn sub(&self, other: &Element) -> Element {
        self.add(&other.neg())
    }

    pub fn scale(&self, c: &Scalar) -> Element {
        if c.is_zero() {
            return Element::zero(self.gens.clone());
        }
        Element {
            gens: self.gens.clone(),
            terms: self
                .terms
                .iter()
                .map(|(m, v)| (m.clone(), v.mul(c)))
                .collect(),
        }
    }

    /// Graded-commutative product.
    pub fn wedge(&self, other: &Element) -> Element {
        self.check_same_gens(other).unwrap();
        let mut out = Element::zero(self.gens.clone());
        for (ma, ca) in &self.terms {
            for (mb, cb) in &other.terms {
                if let Some((m, neg)) = ma.mul(mb, &self.gens) {
                    let mut c = ca.mul(cb);
                    if neg {
                        c = c.neg();
                    }
                    out.add_term(m, c);
                }
            }
        }
        out
    }

    fn add_term(&mut self, m: Monomial, c: Scalar) {
        if c.is_zero() {
            return;
        }
        let entry = match self.terms.remove(&m) {
            Some(prev) => prev.add(&c),
            None => c,
        };
        if !entry.is_zero() {
            self.terms.insert(m, entry);
        }
    }

    pub fn pow(&self, k: u32) -> Element {
        let mut out = Element::one(self.gens.clone());
        for _ in 0..k {
            out = out.wedge(self);
        }
        out
    }

    /// Component of homogeneous degree `k`.
    pub fn degree_component(&self, k: i64) -> Element {
        Element {
            gens: self.gens.clone(),
            terms: self
                .terms
                .iter()
                .filter(|(m, _)| m.degree(&self.gens) == k)
                .map(|(m, c)| (m.clone(), c.clone()))
                .collect(),
        }
    }

    /// Degrees present in the element.
    pub fn degrees(&self) -> Vec<i64> {
        let mut ds: Vec<i64> = self
            .terms
            .keys()
            .map(|m| m.degree(&self.gens))
            .collect();
        ds.sort();
        ds.dedup();
        ds
    }

    /// `Some(k)` when every monomial has degree `k` (zero counts as any
    /// degree and returns `None`).
    pub fn homogeneous_degree(&self) -> Option<i64> {
        let ds = self.degrees();
        if ds.len() == 1 {
            Some(ds[0])
        } else {
            None
        }
    }

    /// Coefficient of a monomial.
    pub fn coefficient(&self, m: &Monomial) -> Scalar {
        self.terms.get(m).cloned().unwrap_or_else(Scalar::zero)
    }

    /// Push the element through a reindexing of generators into a larger
    /// generator set (indices mapped by `map`).  The map must be
    /// degree-preserving and order-preserving on each monomial's support.
    pub fn reindex(&self, target: Arc<GeneratorSet>, map: &[usize]) -> Element {
        let mut out = Element::zero(target.clone());
        for (m, c) in &self.terms {
            let factors: Vec<(usize, u32)> =
                m.factors().iter().map(|&(i, e)| (map[i], e)).collect();
            let mono = Monomial::from_factors(factors, &target)
                .expect("reindexing produced an odd square");
            out.add_term(mono, c.clone());
        }
        out
    }

    pub fn display(&self) -> String {
        if self.is_zero() {
            return "0".to_string();
        }
        self.terms
            .iter()
            .map(|(m, c)| format!("({})*{}", c, m.display(&self.gens)))
            .collect::<Vec<_>>()
            .join(" + ")
    }
}

impl fmt::Display for Element {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.display())
    }
}

/// Graded derivation of fixed degree, determined by its generator images and
/// extended by the graded Leibniz rule.
#[derive(Clone, Debug)]
pub struct Derivation {
    gens: Arc<GeneratorSet>,
    pub degree: i64,
    images: Vec<Element>,
}

impl Derivation {
    pub fn new(gens: Arc<GeneratorSet>, degree: i64, images: Vec<Element>) -> Self {
        assert_eq!(images.len(), gens.len(), "one image per generator");
        for (i, img) in images.iter().enumerate() {
            assert!(img.gens == gens, "derivation image in wrong algebra");
            if let Some(k) = img.homogeneous_degree() {
                assert_eq!(
                    k,
                    gens.degree(i) + degree,
                    "image of {} has degree {}, expected {}",
                    gens.name(i),
                    k,
                    gens.degree(i) + degree
                );
            }
        }
        Derivation {
            gens,
            degree,
            images,
        }
    }

    pub fn zero(gens: Arc<GeneratorSet>, degree: i64) -> Self {
        let images = (0..gens.len()).map(|_| Element::zero(gens.clone())).collect();
        Derivation::new(gens, degree, images)
    }

    pub fn generators(&self) -> &Arc<GeneratorSet> {
        &self.gens
    }

    pub fn image(&self, i: usize) -> &Element {
        &self.images[i]
    }

    fn is_odd(&self) -> bool {
        self.degree.rem_euclid(2) == 1
    }

    /// Apply to a monomial: `D(x1...xn) = sum_k (-1)^(|D|*(deg prefix))
    /// x1..x_{k-1} D(x_k) x_{k+1}..xn`.
    fn apply_monomial(&self, m: &Monomial) -> Element {
        let mut out = Element::zero(self.gens.clone());
        let flat = m.flat_factors();
        let mut prefix_deg = 0i64;
        for k in 0..flat.len() {
            let img = &self.images[flat[k]];
            if img.is_zero() {
                prefix_deg += self.gens.degree(flat[k]);
                continue;
            }
            let prefix = Monomial::from_factors(
                flat[..k].iter().map(|&i| (i, 1)).collect(),
                &self.gens,
            )
            .expect("prefix of a canonical monomial is canonical");
            let suffix = Monomial::from_factors(
                flat[k + 1..].iter().map(|&i| (i, 1)).collect(),
                &self.gens,
            )
            .expect("suffix of a canonical monomial is canonical");
            let base_neg = self.is_odd() && prefix_deg.rem_euclid(2) == 1;
            for (im, ic) in img.terms() {
                let Some((pm, s1)) = prefix.mul(im, &self.gens) else {
                    continue;
                };
                let Some((full, s2)) = pm.mul(&suffix, &self.gens) else {
                    continue;
                };
                let neg = base_neg ^ s1 ^ s2;
                let coeff = if neg { ic.neg() } else { ic.clone() };
                out.add_term(full, coeff);
            }
            prefix_deg += self.gens.degree(flat[k]);
        }
        out
    }

    pub fn apply(&self, e: &Element) -> Element {
        let mut out = Element::zero(self.gens.clone());
        for (m, c) in e.terms() {
            out = out.add(&self.apply_monomial(m).scale(c));
        }
        out
    }

    /// Graded commutator `[D1, D2] = D1 D2 - (-1)^(k1 k2) D2 D1`, returned
    /// as the derivation it is, via its generator images.
    pub fn commutator(&self, other: &Derivation) -> Derivation {
        assert!(self.gens == other.gens);
        let sign_neg = (self.degree * other.degree).rem_euclid(2) == 1;
        let images = (0..self.gens.len())
            .map(|i| {
                let g = Element::generator(self.gens.clone(), i);
                let a = self.apply(&other.apply(&g));
                let b = other.apply(&self.apply(&g));
                if sign_neg {
                    a.add(&b)
                } else {
                    a.sub(&b)
                }
            })
            .collect();
        Derivation::new(self.gens.clone(), self.degree + other.degree, images)
    }

    pub fn add(&self, other: &Derivation) -> Derivation {
        assert!(self.gens == other.gens && self.degree == other.degree);
        let images = (0..self.gens.len())
            .map(|i| self.images[i].add(&other.images[i]))
            .collect();
        Derivation::new(self.gens.clone(), self.degree, images)
    }

    pub fn sub(&self, other: &Derivation) -> Derivation {
        assert!(self.gens == other.gens && self.degree == other.degree);
        let images = (0..self.gens.len())
            .map(|i| self.images[i].sub(&other.images[i]))
            .collect();
        Derivation::new(self.gens.clone(), self.degree, images)
    }

    pub fn scale(&self, c: &Scalar) -> Derivation {
        let images = self.images.iter().map(|img| img.scale(c)).collect();
        Derivation::new(self.gens.clone(), self.degree, images)
    }

    pub fn is_zero(&self) -> bool {
        self.images.iter().all(|img| img.is_zero())
    }
}

/// Algebra morphism determined by generator images (images need not be
/// homogeneous; the graded line machinery produces mixed-degree images).
#[derive(Clone, Debug)]
pub struct AlgebraMorphism {
    source: Arc<GeneratorSet>,
    target: Arc<GeneratorSet>,
    images: Vec<Element>,
}

impl AlgebraMorphism {
    pub fn new(source: Arc<GeneratorSet>, target: Arc<GeneratorSet>, images: Vec<Element>) -> Self {
        assert_eq!(images.len(), source.len());
        for img in &images {
            assert!(*img.generators() == target);
        }
        AlgebraMorphism {
            source,
            target,
            images,
        }
    }

    pub fn source(&self) -> &Arc<GeneratorSet> {
        &self.source
    }

    pub fn target(&self) -> &Arc<GeneratorSet> {
        &self.target
    }

    pub fn image(&self, i: usize) -> &Element {
        &self.images[i]
    }

    pub fn apply(&self, e: &Element) -> Element {
        assert!(*e.generators() == self.source, "morphism domain mismatch");
        let mut out = Element::zero(self.target.clone());
        for (m, c) in e.terms() {
            let mut acc = Element::scalar(self.target.clone(), c.clone());
            for &(i, e) in m.factors() {
                for _ in 0..e {
                    acc = acc.wedge(&self.images[i]);
                }
            }
            out = out.add(&acc);
        }
        out
    }

    pub fn compose(&self, inner: &AlgebraMorphism) -> AlgebraMorphism {
        assert!(inner.target == self.source);
        let images = (0..inner.source.len())
            .map(|i| self.apply(&inner.images[i]))
            .collect();
        AlgebraMorphism::new(inner.source.clone(), self.target.clone(), images)
    }
}

/// Complete, deterministically ordered monomial basis of the degree-`d`
/// component of the free algebra.  All generator degrees must be positive.
pub fn homogeneous_basis(gens: &Arc<GeneratorSet>, degree: i64) -> Vec<Monomial> {
    for i in 0..gens.len() {
        assert!(
            gens.degree(i) > 0,
            "homogeneous_basis needs positive generator degrees"
        );
    }
    let mut out = Vec::new();
    if degree < 0 {
        return out;
    }
    let mut current: Vec<(usize, u32)> = Vec::new();
    enumerate(gens, 0, degree, &mut current, &mut out);
    out
}

fn enumerate(
    gens: &Arc<GeneratorSet>,
    from: usize,
    remaining: i64,
    current: &mut Vec<(usize, u32)>,
    out: &mut Vec<Monomial>,
) {
    if remaining == 0 {
        out.push(
            Monomial::from_factors(current.clone(), gens)
                .expect("enumeration respects odd exponents"),
        );
        return;
    }
    if from >= gens.len() {
        return;
    }
    let d = gens.degree(from);
    let max_e = if gens.is_odd(from) {
        1
    } else {
        (remaining / d) as u32
    };
    for e in 0..=max_e.min((remaining / d) as u32) {
        if e > 0 {
            current.push((from, e));
        }
        enumerate(gens, from + 1, remaining - d * e as i64, current, out);
        if e > 0 {
            current.pop();
        }
    }
}

/// Coefficients of the Hilbert series of the free graded-commutative
/// algebra, `prod_odd (1 + q^d) * prod_even 1/(1 - q^d)`, up to `max_degree`.
pub fn hilbert_series(gens: &GeneratorSet, max_degree: usize) -> Vec<i64> {
    let mut coeffs = vec![0i64; max_degree + 1];
    coeffs[0] = 1;
    for i in 0..gens.len() {
        let d = gens.degree(i) as usize;
        let mut next = vec![0i64; max_degree + 1];
        if gens.is_odd(i) {
            for k in 0..=max_degree {
                next[k] += coeffs[k];
                if k >= d {
                    next[k] += coeffs[k - d];
                }
            }
        } else {
            // Geometric factor: next[k] = coeffs[k] + next[k - d].
            for k in 0..=max_degree {
                next[k] = coeffs[k] + if k >= d { next[k - d] } else { 0 };
            }
        }
        coeffs = next;
    }
    coeffs
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_odds_one_even() -> Arc<GeneratorSet> {
        GeneratorSet::new(vec![
            ("x".into(), 1),
            ("y".into(), 1),
            ("v".into(), 2),
        ])
    }

    #[test]
    fn odd_generators_anticommute() {
        let gens = two_odds_one_even();
        let x = Element::generator(gens.clone(), 0);
        let y = Element::generator(gens.clone(), 1);
        assert_eq!(x.wedge(&y), y.wedge(&x).neg());
        assert!(x.wedge(&x).is_zero());
    }

    #[test]
    fn even_generator_is_central() {
        let gens = two_odds_one_even();
        let x = Element::generator(gens.clone(), 0);
        let v = Element::generator(gens.clone(), 2);
        assert_eq!(x.wedge(&v), v.wedge(&x));
    }

    #[test]
    fn associativity_across_sign_cases() {
        // All triples of generators with degrees in {1, 2}.
        let gens = GeneratorSet::new(vec![
            ("a".into(), 1),
            ("b".into(), 1),
            ("c".into(), 1),
            ("u".into(), 2),
            ("v".into(), 2),
        ]);
        let els: Vec<Element> = (0..gens.len())
            .map(|i| Element::generator(gens.clone(), i))
            .collect();
        for p in &els {
            for q in &els {
                for r in &els {
                    let lhs = p.wedge(q).wedge(r);
                    let rhs = p.wedge(&q.wedge(r));
                    assert_eq!(lhs, rhs);
                }
            }
        }
    }

    #[test]
    fn zero_derivation_kills_everything() {
        let gens = two_odds_one_even();
        let d = Derivation::zero(gens.clone(), 1);
        let x = Element::generator(gens.clone(), 0);
        let v = Element::generator(gens.clone(), 2);
        assert!(d.apply(&x.wedge(&v)).is_zero());
    }

    #[test]
    fn leibniz_on_even_square() {
        // D(v) = v*w needs another even generator; check D(v^2) = 2 v D(v).
        let gens = GeneratorSet::new(vec![("v".into(), 2), ("w".into(), 3)]);
        let v = Element::generator(gens.clone(), 0);
        let w = Element::generator(gens.clone(), 1);
        let dv = v.wedge(&w);
        let d = Derivation::new(gens.clone(), 3, vec![dv.clone(), Element::zero(gens.clone())]);
        let lhs = d.apply(&v.pow(2));
        let rhs = v.wedge(&dv).scale(&Scalar::from_int(2));
        assert_eq!(lhs, rhs);
    }

    #[test]
    fn graded_leibniz_identity_randomized() {
        // d(ab) = d(a) b + (-1)^|a| a d(b) for a degree-1 derivation on a
        // mix of odd and even generators.
        let gens = two_odds_one_even();
        let x = Element::generator(gens.clone(), 0);
        let y = Element::generator(gens.clone(), 1);
        let v = Element::generator(gens.clone(), 2);
        // d x = v, d y = 0, d v = 0 (a Koszul-style differential).
        let d = Derivation::new(
            gens.clone(),
            1,
            vec![v.clone(), Element::zero(gens.clone()), Element::zero(gens.clone())],
        );
        let pairs = vec![
            (x.clone(), y.clone()),
            (x.clone(), v.clone()),
            (x.wedge(&y), v.clone()),
            (y.clone(), x.wedge(&v)),
        ];
        for (a, b) in pairs {
            let lhs = d.apply(&a.wedge(&b));
            let deg_a = a.homogeneous_degree().unwrap();
            let sign = if deg_a.rem_euclid(2) == 1 {
                Scalar::from_int(-1)
            } else {
                Scalar::one()
            };
            let rhs = d.apply(&a).wedge(&b).add(&a.wedge(&d.apply(&b)).scale(&sign));
            assert_eq!(lhs, rhs);
        }
    }

    #[test]
    fn basis_enumeration_small_cases() {
        let gens = GeneratorSet::new(vec![("u".into(), 1), ("v".into(), 2)]);
        assert_eq!(homogeneous_basis(&gens, 0), vec![Monomial::one()]);
        let b3 = homogeneous_basis(&gens, 3);
        assert_eq!(b3.len(), 1);
        assert_eq!(b3[0].display(&gens), "u*v");
    }

    #[test]
    fn basis_sizes_match_hilbert_series() {
        let gens = GeneratorSet::new(vec![
            ("t1".into(), 1),
            ("t2".into(), 1),
            ("t3".into(), 1),
            ("m1".into(), 2),
            ("m2".into(), 2),
            ("m3".into(), 2),
        ]);
        let hs = hilbert_series(&gens, 9);
        for k in 0..=9 {
            assert_eq!(
                homogeneous_basis(&gens, k as i64).len() as i64,
                hs[k],
                "degree {k}"
            );
        }
        // Brute-force partition counts for the Weil algebra of so(3):
        // degree 4 has 15 monomials and degree 5 has 21.
        assert_eq!(homogeneous_basis(&gens, 4).len(), 15);
        assert_eq!(homogeneous_basis(&gens, 5).len(), 21);
    }

    #[test]
    fn commutator_of_square_zero_derivation() {
        let gens = two_odds_one_even();
        let v = Element::generator(gens.clone(), 2);
        // d x = v, d y = v, d v = 0; d^2 = 0 on generators.
        let d = Derivation::new(
            gens.clone(),
            1,
            vec![v.clone(), v.clone(), Element::zero(gens.clone())],
        );
        let dd = d.commutator(&d);
        assert!(dd.is_zero());
    }
}
