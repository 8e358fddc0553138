//! Exterior calculus on model spaces `T^n x R^r x I^s` with an exact
//! coefficient class closed under products, derivatives, the map catalog,
//! and fibre integration: finite sums of atoms
//!
//! ```text
//! cos/sin(2 pi m.x) * y^p * exp(-sum_a c_a y_a^2 / 2) * prod_i t_i^j trig((pi/2) l t_i)
//! ```
//!
//! with exact [`Scalar`] coefficients.  Derivatives introduce omega = 2 pi
//! factors, Gaussian moments introduce omega^(1/2), and interval
//! integration introduces omega^(-1), all of which stay inside the scalar
//! field.  A numeric backend evaluates forms pointwise and integrates with
//! adaptive quadrature for the few operations that leave the exact class.

use num::rational::BigRational;
use num::{One, Signed, Zero};
use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use crate::error::CartanError;
use crate::scalar::{odd_double_factorial, rat_to_f64, Scalar};

/// A product of circles, a Euclidean fibre block, and interval factors.
/// Global coordinate order: torus, fibre, interval.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ModelSpace {
    pub torus_dim: usize,
    pub fiber_dim: usize,
    pub interval_dim: usize,
}

impl ModelSpace {
    pub fn new(torus_dim: usize, fiber_dim: usize, interval_dim: usize) -> Arc<Self> {
        Arc::new(ModelSpace {
            torus_dim,
            fiber_dim,
            interval_dim,
        })
    }

    pub fn dim(&self) -> usize {
        self.torus_dim + self.fiber_dim + self.interval_dim
    }

    pub fn is_torus(&self, coord: usize) -> bool {
        coord < self.torus_dim
    }

    pub fn is_fiber(&self, coord: usize) -> bool {
        coord >= self.torus_dim && coord < self.torus_dim + self.fiber_dim
    }

    pub fn is_interval(&self, coord: usize) -> bool {
        coord >= self.torus_dim + self.fiber_dim && coord < self.dim()
    }

    pub fn coord_name(&self, coord: usize) -> String {
        if self.is_torus(coord) {
            format!("x{}", coord + 1)
        } else if self.is_fiber(coord) {
            format!("y{}", coord - self.torus_dim + 1)
        } else {
            format!("t{}", coord - self.torus_dim - self.fiber_dim + 1)
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Trig {
    Cos,
    Sin,
}

/// Real Fourier monomial `cos(2 pi m.x)` or `sin(2 pi m.x)`; the zero mode
/// is always `Cos` (the constant 1).
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct Wave {
    pub trig: Trig,
    pub mode: Vec<i64>,
}

impl Wave {
    pub fn constant(n: usize) -> Self {
        Wave {
            trig: Trig::Cos,
            mode: vec![0; n],
        }
    }

    /// Canonical form: first nonzero mode component positive.  Returns the
    /// normalized wave with a sign flag, or `None` for the zero function
    /// `sin(0)`.
    pub fn normalize(trig: Trig, mode: Vec<i64>) -> Option<(Wave, bool)> {
        match mode.iter().find(|&&m| m != 0) {
            None => match trig {
                Trig::Cos => Some((
                    Wave {
                        trig: Trig::Cos,
                        mode,
                    },
                    false,
                )),
                Trig::Sin => None,
            },
            Some(&first) => {
                if first > 0 {
                    Some((Wave { trig, mode }, false))
                } else {
                    let flipped: Vec<i64> = mode.iter().map(|m| -m).collect();
                    let neg = matches!(trig, Trig::Sin);
                    Some((
                        Wave {
                            trig,
                            mode: flipped,
                        },
                        neg,
                    ))
                }
            }
        }
    }

    /// Product-to-sum: returns up to two (wave, coefficient) pairs.
    fn mul(&self, other: &Wave) -> Vec<(Wave, Scalar)> {
        let half = Scalar::ratio(1, 2);
        let diff: Vec<i64> = self
            .mode
            .iter()
            .zip(&other.mode)
            .map(|(a, b)| a - b)
            .collect();
        let sum: Vec<i64> = self
            .mode
            .iter()
            .zip(&other.mode)
            .map(|(a, b)| a + b)
            .collect();
        let raw: Vec<(Trig, Vec<i64>, bool)> = match (self.trig, other.trig) {
            (Trig::Cos, Trig::Cos) => vec![(Trig::Cos, diff, false), (Trig::Cos, sum, false)],
            (Trig::Sin, Trig::Sin) => vec![(Trig::Cos, diff, false), (Trig::Cos, sum, true)],
            (Trig::Sin, Trig::Cos) => vec![(Trig::Sin, sum, false), (Trig::Sin, diff, false)],
            (Trig::Cos, Trig::Sin) => vec![(Trig::Sin, sum, false), (Trig::Sin, diff, true)],
        };
        let mut out = Vec::new();
        for (trig, mode, neg) in raw {
            if let Some((w, flip)) = Wave::normalize(trig, mode) {
                let mut c = half.clone();
                if neg ^ flip {
                    c = c.neg();
                }
                out.push((w, c));
            }
        }
        out
    }

    fn eval(&self, x: &[f64]) -> f64 {
        let angle: f64 = std::f64::consts::TAU
            * self
                .mode
                .iter()
                .zip(x)
                .map(|(m, xi)| *m as f64 * xi)
                .sum::<f64>();
        match self.trig {
            Trig::Cos => angle.cos(),
            Trig::Sin => angle.sin(),
        }
    }
}

/// Per-interval-coordinate factor `t^pow * trig((pi/2) l t)`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct IntervalFactor {
    pub pow: u32,
    pub trig: Option<(Trig, u32)>,
}

impl IntervalFactor {
    pub fn one() -> Self {
        IntervalFactor { pow: 0, trig: None }
    }

    fn is_one(&self) -> bool {
        self.pow == 0 && self.trig.is_none()
    }

    /// Product of two factors on the same coordinate: up to two terms.
    fn mul(&self, other: &IntervalFactor) -> Vec<(IntervalFactor, Scalar)> {
        let pow = self.pow + other.pow;
        match (&self.trig, &other.trig) {
            (None, None) => vec![(IntervalFactor { pow, trig: None }, Scalar::one())],
            (Some(t), None) | (None, Some(t)) => vec![(
                IntervalFactor {
                    pow,
                    trig: Some(*t),
                },
                Scalar::one(),
            )],
            (Some((t1, l1)), Some((t2, l2))) => {
                let half = Scalar::ratio(1, 2);
                let d = *l1 as i64 - *l2 as i64;
                let s = (*l1 + *l2) as i64;
                let raw: Vec<(Trig, i64, bool)> = match (t1, t2) {
                    (Trig::Cos, Trig::Cos) => vec![(Trig::Cos, d, false), (Trig::Cos, s, false)],
                    (Trig::Sin, Trig::Sin) => vec![(Trig::Cos, d, false), (Trig::Cos, s, true)],
                    (Trig::Sin, Trig::Cos) => vec![(Trig::Sin, s, false), (Trig::Sin, d, false)],
                    (Trig::Cos, Trig::Sin) => vec![(Trig::Sin, s, false), (Trig::Sin, d, true)],
                };
                let mut out = Vec::new();
                for (trig, l, neg) in raw {
                    let (l, flip) = if l < 0 {
                        (-l, matches!(trig, Trig::Sin))
                    } else {
                        (l, false)
                    };
                    if l == 0 {
                        match trig {
                            Trig::Sin => continue,
                            Trig::Cos => {
                                let mut c = half.clone();
                                if neg {
                                    c = c.neg();
                                }
                                out.push((IntervalFactor { pow, trig: None }, c));
                                continue;
                            }
                        }
                    }
                    let mut c = half.clone();
                    if neg ^ flip {
                        c = c.neg();
                    }
                    out.push((
                        IntervalFactor {
                            pow,
                            trig: Some((trig, l as u32)),
                        },
                        c,
                    ));
                }
                out
            }
        }
    }

    fn eval(&self, t: f64) -> f64 {
        let mut v = t.powi(self.pow as i32);
        if let Some((trig, l)) = &self.trig {
            let angle = std::f64::consts::FRAC_PI_2 * *l as f64 * t;
            v *= match trig {
                Trig::Cos => angle.cos(),
                Trig::Sin => angle.sin(),
            };
        }
        v
    }

    /// Value at an endpoint `t = 0` or `t = 1`, exactly.
    fn eval_exact_01(&self, at_one: bool) -> Scalar {
        if !at_one && self.pow > 0 {
            return Scalar::zero();
        }
        match &self.trig {
            None => Scalar::one(),
            Some((trig, l)) => {
                if !at_one {
                    return match trig {
                        Trig::Cos => Scalar::one(),
                        Trig::Sin => Scalar::zero(),
                    };
                }
                // cos/sin of (pi/2) l.
                let v = match (trig, l % 4) {
                    (Trig::Cos, 0) => 1,
                    (Trig::Cos, 1) => 0,
                    (Trig::Cos, 2) => -1,
                    (Trig::Cos, 3) => 0,
                    (Trig::Sin, 0) => 0,
                    (Trig::Sin, 1) => 1,
                    (Trig::Sin, 2) => 0,
                    (Trig::Sin, 3) => -1,
                    _ => unreachable!(),
                };
                Scalar::from_int(v)
            }
        }
    }

    /// `int_0^1 t^pow trig((pi/2) l t) dt`, exactly.  Uses
    /// `pi/2 = omega/4`.
    fn integrate_exact(&self) -> Scalar {
        match &self.trig {
            None => Scalar::ratio(1, self.pow as i64 + 1),
            Some((trig, l)) => {
                let a = Scalar::omega_pow(1)
                    .mul(&Scalar::ratio(*l as i64, 4));
                // Values at the endpoint t = 1.
                let cos1 = IntervalFactor {
                    pow: 0,
                    trig: Some((Trig::Cos, *l)),
                }
                .eval_exact_01(true);
                let sin1 = IntervalFactor {
                    pow: 0,
                    trig: Some((Trig::Sin, *l)),
                }
                .eval_exact_01(true);
                // I_c(j) = int t^j cos(at), I_s(j) = int t^j sin(at) on [0,1]:
                // I_c(j) = sin(a)/a - (j/a) I_s(j-1),
                // I_s(j) = (j==0 term) (1 - cos a)/a ... general:
                // I_s(j) = -cos(a)/a + (j/a) I_c(j-1).
                let a_inv = a.inv().expect("l > 0");
                let mut ic = sin1.mul(&a_inv);
                let mut is = Scalar::one().sub(&cos1).mul(&a_inv);
                for j in 1..=self.pow {
                    let jf = Scalar::from_int(j as i64);
                    let new_ic = sin1.mul(&a_inv).sub(&jf.mul(&a_inv).mul(&is));
                    let new_is = cos1.neg().mul(&a_inv).add(&jf.mul(&a_inv).mul(&ic));
                    ic = new_ic;
                    is = new_is;
                }
                match trig {
                    Trig::Cos => ic,
                    Trig::Sin => is,
                }
            }
        }
    }
}

/// One coefficient atom.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct Atom {
    pub wave: Wave,
    pub fiber_pow: Vec<u32>,
    /// Per-fibre-coordinate Gaussian rate `c` in `exp(-c y^2 / 2)`;
    /// zero means no decay factor.
    pub gauss: Vec<BigRational>,
    pub interval: Vec<IntervalFactor>,
}

impl Atom {
    pub fn one(space: &ModelSpace) -> Self {
        Atom {
            wave: Wave::constant(space.torus_dim),
            fiber_pow: vec![0; space.fiber_dim],
            gauss: vec![BigRational::zero(); space.fiber_dim],
            interval: vec![IntervalFactor::one(); space.interval_dim],
        }
    }

    /// Multiply two atoms; Gaussian rates add, trig parts expand by
    /// product-to-sum.
    fn mul(&self, other: &Atom) -> Vec<(Atom, Scalar)> {
        let fiber_pow: Vec<u32> = self
            .fiber_pow
            .iter()
            .zip(&other.fiber_pow)
            .map(|(a, b)| a + b)
            .collect();
        let gauss: Vec<BigRational> = self
            .gauss
            .iter()
            .zip(&other.gauss)
            .map(|(a, b)| a + b)
            .collect();
        let mut partial: Vec<(Vec<IntervalFactor>, Scalar)> = vec![(Vec::new(), Scalar::one())];
        for (f1, f2) in self.interval.iter().zip(&other.interval) {
            let terms = f1.mul(f2);
            let mut next = Vec::new();
            for (prefix, c) in &partial {
                for (f, fc) in &terms {
                    let mut p = prefix.clone();
                    p.push(f.clone());
                    next.push((p, c.mul(fc)));
                }
            }
            partial = next;
        }
        let mut out = Vec::new();
        for (w, wc) in self.wave.mul(&other.wave) {
            for (ints, ic) in &partial {
                out.push((
                    Atom {
                        wave: w.clone(),
                        fiber_pow: fiber_pow.clone(),
                        gauss: gauss.clone(),
                        interval: ints.clone(),
                    },
                    wc.mul(ic),
                ));
            }
        }
        out
    }

    pub fn eval(&self, space: &ModelSpace, point: &[f64]) -> f64 {
        assert_eq!(point.len(), space.dim());
        let (x, rest) = point.split_at(space.torus_dim);
        let (y, t) = rest.split_at(space.fiber_dim);
        let mut v = self.wave.eval(x);
        for (a, (p, c)) in self.fiber_pow.iter().zip(self.gauss.iter()).enumerate() {
            let ya = y[a];
            v *= ya.powi(*p as i32);
            let cf = rat_to_f64(c);
            if cf != 0.0 {
                v *= (-cf * ya * ya / 2.0).exp();
            }
        }
        for (f, ti) in self.interval.iter().zip(t) {
            v *= f.eval(*ti);
        }
        v
    }

    pub fn display(&self, space: &ModelSpace) -> String {
        let mut parts: Vec<String> = Vec::new();
        if self.wave.mode.iter().any(|&m| m != 0) {
            let angle = self
                .wave
                .mode
                .iter()
                .enumerate()
                .filter(|(_, m)| **m != 0)
                .map(|(i, m)| format!("{}{}", if *m == 1 { String::new() } else { format!("{m}") }, space.coord_name(i)))
                .collect::<Vec<_>>()
                .join("+");
            parts.push(format!(
                "{}(2pi({}))",
                match self.wave.trig {
                    Trig::Cos => "cos",
                    Trig::Sin => "sin",
                },
                angle
            ));
        }
        for (a, p) in self.fiber_pow.iter().enumerate() {
            if *p > 0 {
                parts.push(format!("{}^{}", space.coord_name(space.torus_dim + a), p));
            }
        }
        for (a, c) in self.gauss.iter().enumerate() {
            if !c.is_zero() {
                parts.push(format!(
                    "exp(-{}*{}^2/2)",
                    c,
                    space.coord_name(space.torus_dim + a)
                ));
            }
        }
        for (i, f) in self.interval.iter().enumerate() {
            if !f.is_one() {
                let name = space.coord_name(space.torus_dim + space.fiber_dim + i);
                if f.pow > 0 {
                    parts.push(format!("{name}^{}", f.pow));
                }
                if let Some((trig, l)) = &f.trig {
                    parts.push(format!(
                        "{}((pi/2){}{})",
                        match trig {
                            Trig::Cos => "cos",
                            Trig::Sin => "sin",
                        },
                        l,
                        name
                    ));
                }
            }
        }
        if parts.is_empty() {
            "1".into()
        } else {
            parts.join("*")
        }
    }
}

/// Finite sum of atoms with exact scalar coefficients.
#[derive(Clone, Debug, PartialEq)]
pub struct CoefficientFunction {
    pub space: Arc<ModelSpace>,
    pub terms: BTreeMap<Atom, Scalar>,
}

impl CoefficientFunction {
    pub fn zero(space: Arc<ModelSpace>) -> Self {
        CoefficientFunction {
            space,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(space: Arc<ModelSpace>, c: Scalar) -> Self {
        let mut f = Self::zero(space.clone());
        f.add_term(Atom::one(&space), c);
        f
    }

    pub fn one(space: Arc<ModelSpace>) -> Self {
        Self::constant(space.clone(), Scalar::one())
    }

    pub fn from_atom(space: Arc<ModelSpace>, atom: Atom, c: Scalar) -> Self {
        let mut f = Self::zero(space);
        f.add_term(atom, c);
        f
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn add_term(&mut self, atom: Atom, c: Scalar) {
        if c.is_zero() {
            return;
        }
        let entry = match self.terms.remove(&atom) {
            Some(prev) => prev.add(&c),
            None => c,
        };
        if !entry.is_zero() {
            self.terms.insert(atom, entry);
        }
    }

    pub fn add(&self, other: &CoefficientFunction) -> CoefficientFunction {
        assert_eq!(self.space, other.space);
        let mut out = self.clone();
        for (a, c) in &other.terms {
            out.add_term(a.clone(), c.clone());
        }
        out
    }

    pub fn neg(&self) -> CoefficientFunction {
        self.scale(&Scalar::from_int(-1))
    }

    pub fn sub(&self, other: &CoefficientFunction) -> CoefficientFunction {
        self.add(&other.neg())
    }

    pub fn scale(&self, c: &Scalar) -> CoefficientFunction {
        if c.is_zero() {
            return Self::zero(self.space.clone());
        }
        CoefficientFunction {
            space: self.space.clone(),
            terms: self
                .terms
                .iter()
                .map(|(a, v)| (a.clone(), v.mul(c)))
                .collect(),
        }
    }

    pub fn mul(&self, other: &CoefficientFunction) -> CoefficientFunction {
        assert_eq!(self.space, other.space);
        let mut out = Self::zero(self.space.clone());
        for (a1, c1) in &self.terms {
            for (a2, c2) in &other.terms {
                for (atom, c) in a1.mul(a2) {
                    out.add_term(atom, c.mul(&c1.mul(c2)));
                }
            }
        }
        out
    }

    /// Partial derivative with respect to a global coordinate.
    pub fn derivative(&self, coord: usize) -> CoefficientFunction {
        let space = self.space.clone();
        let mut out = Self::zero(space.clone());
        for (atom, c) in &self.terms {
            if space.is_torus(coord) {
                let m = atom.wave.mode[coord];
                if m == 0 {
                    continue;
                }
                // d/dx cos(2 pi m.x) = -2 pi m_i sin; d/dx sin = 2 pi m_i cos.
                let (trig, neg) = match atom.wave.trig {
                    Trig::Cos => (Trig::Sin, true),
                    Trig::Sin => (Trig::Cos, false),
                };
                if let Some((w, flip)) = Wave::normalize(trig, atom.wave.mode.clone()) {
                    let mut coeff = c.mul(&Scalar::omega_pow(1)).scale_int(m);
                    if neg ^ flip {
                        coeff = coeff.neg();
                    }
                    let mut a = atom.clone();
                    a.wave = w;
                    out.add_term(a, coeff);
                }
            } else if space.is_fiber(coord) {
                let a_idx = coord - space.torus_dim;
                let p = atom.fiber_pow[a_idx];
                if p > 0 {
                    let mut a = atom.clone();
                    a.fiber_pow[a_idx] = p - 1;
                    out.add_term(a, c.scale_int(p as i64));
                }
                let rate = &atom.gauss[a_idx];
                if !rate.is_zero() {
                    let mut a = atom.clone();
                    a.fiber_pow[a_idx] = p + 1;
                    out.add_term(a, c.mul(&Scalar::from_rational(rate.clone()).neg()));
                }
            } else {
                let i_idx = coord - space.torus_dim - space.fiber_dim;
                let f = &atom.interval[i_idx];
                if f.pow > 0 {
                    let mut a = atom.clone();
                    a.interval[i_idx] = IntervalFactor {
                        pow: f.pow - 1,
                        trig: f.trig,
                    };
                    out.add_term(a, c.scale_int(f.pow as i64));
                }
                if let Some((trig, l)) = &f.trig {
                    // (pi/2) l = (omega/4) l.
                    let rate = Scalar::omega_pow(1).mul(&Scalar::ratio(*l as i64, 4));
                    let (new_trig, neg) = match trig {
                        Trig::Cos => (Trig::Sin, true),
                        Trig::Sin => (Trig::Cos, false),
                    };
                    let mut a = atom.clone();
                    a.interval[i_idx] = IntervalFactor {
                        pow: f.pow,
                        trig: Some((new_trig, *l)),
                    };
                    let mut coeff = c.mul(&rate);
                    if neg {
                        coeff = coeff.neg();
                    }
                    out.add_term(a, coeff);
                }
            }
        }
        out
    }

    pub fn eval(&self, point: &[f64]) -> f64 {
        self.terms
            .iter()
            .map(|(a, c)| c.to_f64() * a.eval(&self.space, point))
            .sum()
    }

    pub fn display(&self) -> String {
        if self.is_zero() {
            return "0".into();
        }
        self.terms
            .iter()
            .map(|(a, c)| format!("({})*{}", c, a.display(&self.space)))
            .collect::<Vec<_>>()
            .join(" + ")
    }
}

impl fmt::Display for CoefficientFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.display())
    }
}

/// Sorted list of coordinate indices: the exterior monomial `dz_I`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct ExtMono(pub Vec<usize>);

impl ExtMono {
    pub fn empty() -> Self {
        ExtMono(Vec::new())
    }

    pub fn degree(&self) -> usize {
        self.0.len()
    }

    pub fn contains(&self, coord: usize) -> bool {
        self.0.binary_search(&coord).is_ok()
    }

    /// Wedge two sorted index sets; `None` on a repeated index, otherwise
    /// the merged set with the inversion-count sign.
    pub fn merge(&self, other: &ExtMono) -> Option<(ExtMono, bool)> {
        let mut out = Vec::with_capacity(self.0.len() + other.0.len());
        let mut neg = false;
        let mut i = 0;
        let mut j = 0;
        while i < self.0.len() || j < other.0.len() {
            if j >= other.0.len() || (i < self.0.len() && self.0[i] < other.0[j]) {
                out.push(self.0[i]);
                i += 1;
            } else if i >= self.0.len() || other.0[j] < self.0[i] {
                // other.0[j] crosses the remaining (len - i) factors of self.
                if (self.0.len() - i) % 2 == 1 {
                    neg = !neg;
                }
                out.push(other.0[j]);
                j += 1;
            } else {
                return None;
            }
        }
        Some((ExtMono(out), neg))
    }

    /// Insert one index; `None` if present.  Sign counts the crossings from
    /// the left.
    pub fn insert_front(&self, coord: usize) -> Option<(ExtMono, bool)> {
        ExtMono(vec![coord]).merge(self).map(|(m, n)| (m, n))
    }

    /// Remove one index, returning the sign `(-1)^position`.
    pub fn remove(&self, coord: usize) -> Option<(ExtMono, bool)> {
        let pos = self.0.binary_search(&coord).ok()?;
        let mut v = self.0.clone();
        v.remove(pos);
        Some((ExtMono(v), pos % 2 == 1))
    }

    pub fn display(&self, space: &ModelSpace) -> String {
        if self.0.is_empty() {
            return "1".into();
        }
        self.0
            .iter()
            .map(|&i| format!("d{}", space.coord_name(i)))
            .collect::<Vec<_>>()
            .join("^")
    }
}

/// Differential form: exterior monomials with coefficient functions.
#[derive(Clone, Debug, PartialEq)]
pub struct AnalyticForm {
    pub space: Arc<ModelSpace>,
    pub terms: BTreeMap<ExtMono, CoefficientFunction>,
}

impl AnalyticForm {
    pub fn zero(space: Arc<ModelSpace>) -> Self {
        AnalyticForm {
            space,
            terms: BTreeMap::new(),
        }
    }

    pub fn from_function(f: CoefficientFunction) -> Self {
        let mut form = Self::zero(f.space.clone());
        form.add_component(ExtMono::empty(), f);
        form
    }

    pub fn one(space: Arc<ModelSpace>) -> Self {
        Self::from_function(CoefficientFunction::one(space))
    }

    pub fn monomial(space: Arc<ModelSpace>, mono: ExtMono, f: CoefficientFunction) -> Self {
        let mut form = Self::zero(space);
        form.add_component(mono, f);
        form
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn add_component(&mut self, mono: ExtMono, f: CoefficientFunction) {
        if f.is_zero() {
            return;
        }
        let entry = match self.terms.remove(&mono) {
            Some(prev) => prev.add(&f),
            None => f,
        };
        if !entry.is_zero() {
            self.terms.insert(mono, entry);
        }
    }

    pub fn component(&self, mono: &ExtMono) -> CoefficientFunction {
        self.terms
            .get(mono)
            .cloned()
            .unwrap_or_else(|| CoefficientFunction::zero(self.space.clone()))
    }

    pub fn add(&self, other: &AnalyticForm) -> AnalyticForm {
        assert_eq!(self.space, other.space);
        let mut out = self.clone();
        for (m, f) in &other.terms {
            out.add_component(m.clone(), f.clone());
        }
        out
    }

    pub fn neg(&self) -> AnalyticForm {
        self.scale(&Scalar::from_int(-1))
    }

    pub fn sub(&self, other: &AnalyticForm) -> AnalyticForm {
        self.add(&other.neg())
    }

    pub fn scale(&self, c: &Scalar) -> AnalyticForm {
        let mut out = Self::zero(self.space.clone());
        for (m, f) in &self.terms {
            out.add_component(m.clone(), f.scale(c));
        }
        out
    }

    pub fn scale_fn(&self, g: &CoefficientFunction) -> AnalyticForm {
        let mut out = Self::zero(self.space.clone());
        for (m, f) in &self.terms {
            out.add_component(m.clone(), f.mul(g));
        }
        out
    }

    /// Graded-commutative wedge product.
    pub fn wedge(&self, other: &AnalyticForm) -> Result<AnalyticForm, CartanError> {
        if self.space != other.space {
            return Err(CartanError::SpaceMismatch(
                "wedge of forms on different model spaces".into(),
            ));
        }
        let mut out = Self::zero(self.space.clone());
        for (m1, f1) in &self.terms {
            for (m2, f2) in &other.terms {
                if let Some((m, neg)) = m1.merge(m2) {
                    let mut f = f1.mul(f2);
                    if neg {
                        f = f.neg();
                    }
                    out.add_component(m, f);
                }
            }
        }
        Ok(out)
    }

    /// Exterior derivative.
    pub fn d(&self) -> AnalyticForm {
        let mut out = Self::zero(self.space.clone());
        for (mono, f) in &self.terms {
            for coord in 0..self.space.dim() {
                if mono.contains(coord) {
                    continue;
                }
                let df = f.derivative(coord);
                if df.is_zero() {
                    continue;
                }
                let (m, neg) = mono.insert_front(coord).expect("coord not in monomial");
                out.add_component(m, if neg { df.neg() } else { df });
            }
        }
        out
    }

    /// Contraction with a vector field given by per-coordinate components.
    pub fn iota(&self, v: &VectorField) -> AnalyticForm {
        assert_eq!(self.space, v.space);
        let mut out = Self::zero(self.space.clone());
        for (mono, f) in &self.terms {
            for (coord, comp) in v.components.iter().enumerate() {
                if comp.is_zero() {
                    continue;
                }
                if let Some((m, neg)) = mono.remove(coord) {
                    let mut g = f.mul(comp);
                    if neg {
                        g = g.neg();
                    }
                    out.add_component(m, g);
                }
            }
        }
        out
    }

    /// Lie derivative via the Cartan formula `L(v) = iota(v) d + d iota(v)`.
    pub fn lie(&self, v: &VectorField) -> AnalyticForm {
        self.d().iota(v).add(&self.iota(v).d())
    }

    /// Top fibre degree together with the rest of the monomial, when the
    /// monomial contains every fibre differential.
    pub fn eval(&self, point: &[f64]) -> BTreeMap<ExtMono, f64> {
        self.terms
            .iter()
            .map(|(m, f)| (m.clone(), f.eval(point)))
            .collect()
    }

    /// Largest absolute coefficient value at a point.
    pub fn sup_at(&self, point: &[f64]) -> f64 {
        self.terms
            .values()
            .map(|f| f.eval(point).abs())
            .fold(0.0, f64::max)
    }

    pub fn display(&self) -> String {
        if self.is_zero() {
            return "0".into();
        }
        self.terms
            .iter()
            .map(|(m, f)| format!("[{}] {}", m.display(&self.space), f.display()))
            .collect::<Vec<_>>()
            .join("  +  ")
    }
}

impl fmt::Display for AnalyticForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.display())
    }
}

/// Vector field with coefficient-function components.
#[derive(Clone, Debug)]
pub struct VectorField {
    pub space: Arc<ModelSpace>,
    pub components: Vec<CoefficientFunction>,
}

impl VectorField {
    pub fn zero(space: Arc<ModelSpace>) -> Self {
        let components = (0..space.dim())
            .map(|_| CoefficientFunction::zero(space.clone()))
            .collect();
        VectorField { space, components }
    }

    pub fn coordinate(space: Arc<ModelSpace>, coord: usize) -> Self {
        let mut v = Self::zero(space.clone());
        v.components[coord] = CoefficientFunction::one(space);
        v
    }

    pub fn with_component(mut self, coord: usize, f: CoefficientFunction) -> Self {
        self.components[coord] = f;
        self
    }
}

/// Exact fibre integration over the whole `R^r` block; see
/// [`fibre_integrate_block`].
pub fn fibre_integrate(
    form: &AnalyticForm,
    base: &Arc<ModelSpace>,
) -> Result<AnalyticForm, CartanError> {
    fibre_integrate_block(form, 0, form.space.fiber_dim, base)
}

/// Exact fibre integration over a contiguous block of fibre coordinates
/// (`block_start..block_start+block_len` in fibre numbering), with Gaussian
/// decay: picks the monomials containing every `dy` of the block (moved to
/// the front, which costs the sign `(-1)^(len * #preceding differentials)`),
/// and integrates each coordinate with exact Gaussian moments
/// `int y^(2n) e^(-c y^2/2) dy = (2n-1)!! c^(-n-1/2) omega^(1/2)`.
///
/// Errors if an atom carrying the block's top form has no Gaussian decay or
/// a rate whose square root leaves `Q`.
pub fn fibre_integrate_block(
    form: &AnalyticForm,
    block_start: usize,
    block_len: usize,
    base: &Arc<ModelSpace>,
) -> Result<AnalyticForm, CartanError> {
    let space = &form.space;
    if base.torus_dim != space.torus_dim
        || base.fiber_dim + block_len != space.fiber_dim
        || base.interval_dim != space.interval_dim
    {
        return Err(CartanError::SpaceMismatch(
            "fibre integration base must drop exactly the integrated block".into(),
        ));
    }
    let lo = space.torus_dim + block_start;
    let hi = lo + block_len;
    let mut out = AnalyticForm::zero(base.clone());
    for (mono, f) in &form.terms {
        if !(lo..hi).all(|i| mono.contains(i)) {
            continue;
        }
        let preceding = mono.0.iter().filter(|&&i| i < lo).count();
        let base_mono = ExtMono(
            mono.0
                .iter()
                .filter(|&&i| !(lo..hi).contains(&i))
                .map(|&i| if i >= hi { i - block_len } else { i })
                .collect(),
        );
        let sign_neg = (block_len * preceding) % 2 == 1;
        for (atom, c) in &f.terms {
            let mut coeff = c.clone();
            for a in block_start..block_start + block_len {
                let p = atom.fiber_pow[a];
                let rate = &atom.gauss[a];
                if rate.is_zero() || rate.is_negative() {
                    return Err(CartanError::NonIntegrable(format!(
                        "atom {} lacks Gaussian decay in {}",
                        atom.display(space),
                        space.coord_name(space.torus_dim + a)
                    )));
                }
                if p % 2 == 1 {
                    coeff = Scalar::zero();
                    break;
                }
                let n = p / 2;
                // c^(-n - 1/2): needs sqrt(rate) rational.
                let sqrt_rate = rational_sqrt(rate).ok_or_else(|| {
                    CartanError::OutsideExactClass(format!(
                        "Gaussian rate {rate} has no rational square root"
                    ))
                })?;
                let rate_s = Scalar::from_rational(rate.clone());
                let inv_pow = rate_s.pow(n).mul(&Scalar::from_rational(sqrt_rate)).inv()?;
                coeff = coeff
                    .mul(&odd_double_factorial(n))
                    .mul(&inv_pow)
                    .mul(&Scalar::omega_half_pow(1));
            }
            if coeff.is_zero() {
                continue;
            }
            if sign_neg {
                coeff = coeff.neg();
            }
            let mut fiber_pow = atom.fiber_pow.clone();
            let mut gauss = atom.gauss.clone();
            fiber_pow.drain(block_start..block_start + block_len);
            gauss.drain(block_start..block_start + block_len);
            let base_atom = Atom {
                wave: atom.wave.clone(),
                fiber_pow,
                gauss,
                interval: atom.interval.clone(),
            };
            let mut cf = CoefficientFunction::zero(base.clone());
            cf.add_term(base_atom, coeff);
            out.add_component(base_mono.clone(), cf);
        }
    }
    Ok(out)
}

fn rational_sqrt(q: &BigRational) -> Option<BigRational> {
    let num = q.numer();
    let den = q.denom();
    let sn = num.sqrt();
    let sd = den.sqrt();
    if &(&sn * &sn) == num && &(&sd * &sd) == den {
        Some(BigRational::new(sn, sd))
    } else {
        None
    }
}

/// Exact integration over one interval coordinate (the cylinder fibre):
/// `pi_*` for the projection dropping that coordinate.  The coordinate's
/// differential is moved to the front (Koszul sign), then
/// `int_0^1 t^j trig dt` is applied to the coefficient.
pub fn interval_integrate(
    form: &AnalyticForm,
    coord: usize,
    base: &Arc<ModelSpace>,
) -> Result<AnalyticForm, CartanError> {
    let space = &form.space;
    if !space.is_interval(coord) {
        return Err(CartanError::SpaceMismatch(
            "interval integration needs an interval coordinate".into(),
        ));
    }
    if base.torus_dim != space.torus_dim
        || base.fiber_dim != space.fiber_dim
        || base.interval_dim + 1 != space.interval_dim
    {
        return Err(CartanError::SpaceMismatch(
            "base must drop exactly one interval factor".into(),
        ));
    }
    let i_idx = coord - space.torus_dim - space.fiber_dim;
    let mut out = AnalyticForm::zero(base.clone());
    for (mono, f) in &form.terms {
        let Some((rest, neg)) = mono.remove(coord) else {
            continue;
        };
        let base_mono = ExtMono(
            rest.0
                .iter()
                .map(|&i| if i > coord { i - 1 } else { i })
                .collect(),
        );
        for (atom, c) in &f.terms {
            let integral = atom.interval[i_idx].integrate_exact();
            if integral.is_zero() {
                continue;
            }
            let mut coeff = c.mul(&integral);
            if neg {
                coeff = coeff.neg();
            }
            let mut interval = atom.interval.clone();
            interval.remove(i_idx);
            let base_atom = Atom {
                wave: atom.wave.clone(),
                fiber_pow: atom.fiber_pow.clone(),
                gauss: atom.gauss.clone(),
                interval,
            };
            let mut cf = CoefficientFunction::zero(base.clone());
            cf.add_term(base_atom, coeff);
            out.add_component(base_mono.clone(), cf);
        }
    }
    Ok(out)
}

/// Restriction to the slice `t_coord = 0` or `1` of an interval coordinate,
/// exactly.  Monomials containing the coordinate's differential die.
pub fn interval_slice(
    form: &AnalyticForm,
    coord: usize,
    at_one: bool,
    base: &Arc<ModelSpace>,
) -> Result<AnalyticForm, CartanError> {
    let space = &form.space;
    if !space.is_interval(coord) {
        return Err(CartanError::SpaceMismatch(
            "slice needs an interval coordinate".into(),
        ));
    }
    let i_idx = coord - space.torus_dim - space.fiber_dim;
    let mut out = AnalyticForm::zero(base.clone());
    for (mono, f) in &form.terms {
        if mono.contains(coord) {
            continue;
        }
        let base_mono = ExtMono(
            mono.0
                .iter()
                .map(|&i| if i > coord { i - 1 } else { i })
                .collect(),
        );
        for (atom, c) in &f.terms {
            let v = atom.interval[i_idx].eval_exact_01(at_one);
            if v.is_zero() {
                continue;
            }
            let mut interval = atom.interval.clone();
            interval.remove(i_idx);
            let base_atom = Atom {
                wave: atom.wave.clone(),
                fiber_pow: atom.fiber_pow.clone(),
                gauss: atom.gauss.clone(),
                interval,
            };
            let mut cf = CoefficientFunction::zero(base.clone());
            cf.add_term(base_atom, c.mul(&v));
            out.add_component(base_mono.clone(), cf);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn space_1_1_0() -> Arc<ModelSpace> {
        ModelSpace::new(1, 1, 0)
    }

    fn gauss_atom(space: &ModelSpace, pow: u32) -> Atom {
        let mut a = Atom::one(space);
        a.fiber_pow[0] = pow;
        a.gauss[0] = BigRational::one();
        a
    }

    #[test]
    fn d_squared_vanishes() {
        // f = cos(2 pi x) * e^{-y^2/2} * y^3.
        let space = space_1_1_0();
        let mut atom = gauss_atom(&space, 3);
        atom.wave = Wave {
            trig: Trig::Cos,
            mode: vec![1],
        };
        let f = CoefficientFunction::from_atom(space.clone(), atom, Scalar::one());
        let form = AnalyticForm::from_function(f);
        let ddf = form.d().d();
        assert!(ddf.is_zero(), "{}", ddf.display());
    }

    #[test]
    fn contraction_of_top_form() {
        let space = ModelSpace::new(2, 0, 0);
        let top = AnalyticForm::monomial(
            space.clone(),
            ExtMono(vec![0, 1]),
            CoefficientFunction::one(space.clone()),
        );
        let v = VectorField::coordinate(space.clone(), 0);
        let got = top.iota(&v);
        let expect = AnalyticForm::monomial(
            space.clone(),
            ExtMono(vec![1]),
            CoefficientFunction::one(space.clone()),
        );
        assert_eq!(got, expect);
    }

    #[test]
    fn cartan_formula_matches_direct_derivative() {
        // v = sin^2(pi x) d/dx + d/dy; on functions L(v) f = v(f).
        // sin^2(pi x) = (1 - cos(2 pi x))/2 is in the class.
        let space = space_1_1_0();
        let mut cosx = Atom::one(&space);
        cosx.wave = Wave {
            trig: Trig::Cos,
            mode: vec![1],
        };
        let sin2 = CoefficientFunction::constant(space.clone(), Scalar::ratio(1, 2)).sub(
            &CoefficientFunction::from_atom(space.clone(), cosx.clone(), Scalar::ratio(1, 2)),
        );
        let v = VectorField::zero(space.clone())
            .with_component(0, sin2.clone())
            .with_component(1, CoefficientFunction::one(space.clone()));
        // Test forms: a function and a 1-form.
        let mut ga = gauss_atom(&space, 2);
        ga.wave = Wave {
            trig: Trig::Sin,
            mode: vec![2],
        };
        let f = CoefficientFunction::from_atom(space.clone(), ga, Scalar::one());
        let f_form = AnalyticForm::from_function(f.clone());
        let lie_f = f_form.lie(&v);
        // Direct: v(f) = sin2 * df/dx + df/dy.
        let direct = sin2.mul(&f.derivative(0)).add(&f.derivative(1));
        assert_eq!(lie_f, AnalyticForm::from_function(direct));
        // On a 1-form, check L(v) = iota(v) d + d iota(v) is consistent with
        // d L = L d.
        let omega = AnalyticForm::monomial(space.clone(), ExtMono(vec![0]), f.clone());
        assert_eq!(omega.lie(&v).d(), omega.d().lie(&v));
    }

    #[test]
    fn gaussian_moment_normalization() {
        // int e^{-y^2/2} dy = omega^(1/2).
        let space = ModelSpace::new(0, 1, 0);
        let base = ModelSpace::new(0, 0, 0);
        let form = AnalyticForm::monomial(
            space.clone(),
            ExtMono(vec![0]),
            CoefficientFunction::from_atom(space.clone(), gauss_atom(&space, 0), Scalar::one()),
        );
        let got = fibre_integrate(&form, &base).unwrap();
        let expect = AnalyticForm::from_function(CoefficientFunction::constant(
            base.clone(),
            Scalar::omega_half_pow(1),
        ));
        assert_eq!(got, expect);
        // int y^2 e^{-y^2/2} dy = omega^(1/2) as well ((2n-1)!! = 1).
        let form2 = AnalyticForm::monomial(
            space.clone(),
            ExtMono(vec![0]),
            CoefficientFunction::from_atom(space.clone(), gauss_atom(&space, 2), Scalar::one()),
        );
        assert_eq!(fibre_integrate(&form2, &base).unwrap(), expect);
        // Odd moments vanish.
        let form3 = AnalyticForm::monomial(
            space.clone(),
            ExtMono(vec![0]),
            CoefficientFunction::from_atom(space.clone(), gauss_atom(&space, 1), Scalar::one()),
        );
        assert!(fibre_integrate(&form3, &base).unwrap().is_zero());
    }

    #[test]
    fn fibre_integration_needs_decay() {
        let space = ModelSpace::new(0, 1, 0);
        let base = ModelSpace::new(0, 0, 0);
        let mut atom = Atom::one(&space);
        atom.fiber_pow[0] = 2;
        let form = AnalyticForm::monomial(
            space.clone(),
            ExtMono(vec![0]),
            CoefficientFunction::from_atom(space.clone(), atom, Scalar::one()),
        );
        assert!(matches!(
            fibre_integrate(&form, &base),
            Err(CartanError::NonIntegrable(_))
        ));
    }

    #[test]
    fn interval_integral_of_dt() {
        // int_0^1 dt = 1 and int_0^1 t dt = 1/2.
        let space = ModelSpace::new(0, 0, 1);
        let base = ModelSpace::new(0, 0, 0);
        let one_dt = AnalyticForm::monomial(
            space.clone(),
            ExtMono(vec![0]),
            CoefficientFunction::one(space.clone()),
        );
        let got = interval_integrate(&one_dt, 0, &base).unwrap();
        assert_eq!(
            got,
            AnalyticForm::from_function(CoefficientFunction::one(base.clone()))
        );
        let mut t_atom = Atom::one(&space);
        t_atom.interval[0].pow = 1;
        let t_dt = AnalyticForm::monomial(
            space.clone(),
            ExtMono(vec![0]),
            CoefficientFunction::from_atom(space.clone(), t_atom, Scalar::one()),
        );
        let got = interval_integrate(&t_dt, 0, &base).unwrap();
        assert_eq!(
            got,
            AnalyticForm::from_function(CoefficientFunction::constant(
                base.clone(),
                Scalar::ratio(1, 2)
            ))
        );
    }

    #[test]
    fn interval_trig_integrals_match_calculus() {
        // int_0^1 cos((pi/2) t) dt = 2/pi = 4/omega;
        // int_0^1 sin((pi/2) t) dt = 2/pi;
        // int_0^1 t sin((pi/2) t) dt = 4/pi^2 = 16/omega^2.
        let f = IntervalFactor {
            pow: 0,
            trig: Some((Trig::Cos, 1)),
        };
        assert_eq!(
            f.integrate_exact(),
            Scalar::omega_pow(-1).scale_int(4)
        );
        let f = IntervalFactor {
            pow: 0,
            trig: Some((Trig::Sin, 1)),
        };
        assert_eq!(f.integrate_exact(), Scalar::omega_pow(-1).scale_int(4));
        let f = IntervalFactor {
            pow: 1,
            trig: Some((Trig::Sin, 1)),
        };
        assert_eq!(f.integrate_exact(), Scalar::omega_pow(-2).scale_int(16));
        // Numeric agreement.
        let exact = f.integrate_exact().to_f64();
        let mut num = 0.0;
        let n = 20000;
        for i in 0..n {
            let t = (i as f64 + 0.5) / n as f64;
            num += f.eval(t) / n as f64;
        }
        assert!((exact - num).abs() < 1e-8);
    }

    #[test]
    fn cylinder_formula_on_samples() {
        // i_1^* - i_0^* = d pi_* + pi_* d on [0,1] x T^1.
        let space = ModelSpace::new(1, 0, 1);
        let base = ModelSpace::new(1, 0, 0);
        let mut samples = Vec::new();
        // f(t, x) dt with f = t^2 cos((pi/2) t) sin(2 pi x).
        let mut a = Atom::one(&space);
        a.interval[0] = IntervalFactor {
            pow: 2,
            trig: Some((Trig::Cos, 1)),
        };
        a.wave = Wave {
            trig: Trig::Sin,
            mode: vec![1],
        };
        samples.push(AnalyticForm::monomial(
            space.clone(),
            ExtMono(vec![1]),
            CoefficientFunction::from_atom(space.clone(), a.clone(), Scalar::one()),
        ));
        // g(t, x) dx.
        samples.push(AnalyticForm::monomial(
            space.clone(),
            ExtMono(vec![0]),
            CoefficientFunction::from_atom(space.clone(), a.clone(), Scalar::ratio(3, 2)),
        ));
        // A function.
        samples.push(AnalyticForm::from_function(CoefficientFunction::from_atom(
            space.clone(),
            a,
            Scalar::one(),
        )));
        for beta in samples {
            let lhs = interval_slice(&beta, 1, true, &base)
                .unwrap()
                .sub(&interval_slice(&beta, 1, false, &base).unwrap());
            let rhs = interval_integrate(&beta.d(), 1, &base)
                .unwrap()
                .add(&interval_integrate(&beta, 1, &base).unwrap().d());
            assert_eq!(lhs, rhs, "cylinder formula on {}", beta.display());
        }
    }

    #[test]
    fn projection_formula_exact() {
        // pi_*(beta ^ pi^* alpha) = pi_* beta ^ alpha on T^1 x R^1.
        let space = space_1_1_0();
        let base = ModelSpace::new(1, 0, 0);
        let mut wave_atom = Atom::one(&space);
        wave_atom.wave = Wave {
            trig: Trig::Cos,
            mode: vec![2],
        };
        let alpha_up = AnalyticForm::monomial(
            space.clone(),
            ExtMono(vec![0]),
            CoefficientFunction::from_atom(space.clone(), wave_atom.clone(), Scalar::one()),
        );
        let mut base_atom = Atom::one(&base);
        base_atom.wave = Wave {
            trig: Trig::Cos,
            mode: vec![2],
        };
        let alpha = AnalyticForm::monomial(
            base.clone(),
            ExtMono(vec![0]),
            CoefficientFunction::from_atom(base.clone(), base_atom, Scalar::one()),
        );
        let beta = AnalyticForm::monomial(
            space.clone(),
            ExtMono(vec![1]),
            CoefficientFunction::from_atom(space.clone(), gauss_atom(&space, 2), Scalar::ratio(5, 3)),
        );
        let lhs = fibre_integrate(&beta.wedge(&alpha_up).unwrap(), &base).unwrap();
        let rhs = fibre_integrate(&beta, &base).unwrap().wedge(&alpha).unwrap();
        assert_eq!(lhs, rhs);
    }

    #[test]
    fn stokes_commutation_on_gaussian_forms() {
        // [pi_*, d] = 0 for the boundaryless fibre R: d pi_* = (-1)^r pi_* d
        // with r = 1 reads pi_*(d beta) = -d(pi_* beta) ... the graded
        // commutator pi_* d - (-1)^r d pi_* must vanish.
        let space = space_1_1_0();
        let base = ModelSpace::new(1, 0, 0);
        let mut atom = gauss_atom(&space, 1);
        atom.wave = Wave {
            trig: Trig::Sin,
            mode: vec![1],
        };
        // beta = f dy + g dx with Gaussian coefficients.
        let beta = AnalyticForm::monomial(
            space.clone(),
            ExtMono(vec![1]),
            CoefficientFunction::from_atom(space.clone(), atom.clone(), Scalar::one()),
        )
        .add(&AnalyticForm::monomial(
            space.clone(),
            ExtMono(vec![0]),
            CoefficientFunction::from_atom(space.clone(), gauss_atom(&space, 2), Scalar::one()),
        ));
        let lhs = fibre_integrate(&beta.d(), &base).unwrap();
        let rhs = fibre_integrate(&beta, &base).unwrap().d().neg();
        assert_eq!(lhs, rhs);
    }
}
