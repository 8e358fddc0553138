//! Exact scalar arithmetic over `Q(sqrt(d))` extended by the transcendental
//! symbol `omega`, which stands for `2*pi`.
//!
//! A [`Scalar`] is a rational function in `omega^(1/2)` with coefficients in
//! `Q(sqrt(d))`.  Keeping `omega` symbolic makes rank and kernel computations
//! exact: a linear combination of distinct `omega`-powers vanishes only when
//! every coefficient does, because `2*pi` is transcendental.  Numeric values
//! are recovered at the very end by substituting floats for the symbols.

use num::bigint::BigInt;
use num::rational::BigRational;
use num::{One, Zero};
use std::collections::BTreeMap;
use std::fmt;

use crate::error::CartanError;

/// Element of the base field `Q(sqrt(d))`: `a + b*sqrt(d)`.
///
/// `d` is a square-free positive integer.  Pure rationals are stored with
/// `d = 0` and `b = 0`, so every value has a unique representation and
/// structural equality is field equality.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Quad {
    pub a: BigRational,
    pub b: BigRational,
    pub d: i64,
}

impl Quad {
    pub fn from_rational(a: BigRational) -> Self {
        Quad {
            a,
            b: BigRational::zero(),
            d: 0,
        }
    }

    pub fn from_int(n: i64) -> Self {
        Self::from_rational(BigRational::from_integer(BigInt::from(n)))
    }

    pub fn ratio(num: i64, den: i64) -> Self {
        assert!(den != 0, "zero denominator");
        Self::from_rational(BigRational::new(BigInt::from(num), BigInt::from(den)))
    }

    /// `sqrt(d)` as a field element.
    pub fn sqrt(d: i64) -> Self {
        assert!(d > 1, "sqrt requires a square-free integer > 1");
        Quad {
            a: BigRational::zero(),
            b: BigRational::one(),
            d,
        }
    }

    pub fn zero() -> Self {
        Self::from_int(0)
    }

    pub fn one() -> Self {
        Self::from_int(1)
    }

    pub fn is_zero(&self) -> bool {
        self.a.is_zero() && self.b.is_zero()
    }

    fn normalize(mut self) -> Self {
        if self.b.is_zero() {
            self.d = 0;
        }
        self
    }

    /// The common `d` of two operands.  Mixing distinct extensions is a
    /// programming error in this artifact; every computation fixes one `d`.
    fn join_d(&self, other: &Quad) -> i64 {
        match (self.d, other.d) {
            (0, d) | (d, 0) => d,
            (d1, d2) => {
                assert_eq!(d1, d2, "incompatible quadratic extensions: {} vs {}", d1, d2);
                d1
            }
        }
    }

    pub fn add(&self, other: &Quad) -> Quad {
        let d = self.join_d(other);
        Quad {
            a: &self.a + &other.a,
            b: &self.b + &other.b,
            d,
        }
        .normalize()
    }

    pub fn neg(&self) -> Quad {
        Quad {
            a: -self.a.clone(),
            b: -self.b.clone(),
            d: self.d,
        }
    }

    pub fn sub(&self, other: &Quad) -> Quad {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &Quad) -> Quad {
        let d = self.join_d(other);
        let dd = BigRational::from_integer(BigInt::from(d));
        Quad {
            a: &self.a * &other.a + &(&self.b * &other.b) * &dd,
            b: &self.a * &other.b + &self.b * &other.a,
            d,
        }
        .normalize()
    }

    pub fn inv(&self) -> Quad {
        assert!(!self.is_zero(), "division by zero in Q(sqrt d)");
        let dd = BigRational::from_integer(BigInt::from(self.d));
        let norm = &self.a * &self.a - &(&self.b * &self.b) * &dd;
        assert!(!norm.is_zero(), "norm of a nonzero element vanished; d is a square?");
        Quad {
            a: &self.a / &norm,
            b: -(&self.b / &norm),
            d: self.d,
        }
        .normalize()
    }

    pub fn numeric(&self, sqrt_d: Option<f64>) -> Result<f64, CartanError> {
        let a = rat_to_f64(&self.a);
        if self.b.is_zero() {
            return Ok(a);
        }
        let s = sqrt_d.ok_or_else(|| {
            CartanError::MissingSubstitution(format!("sqrt({})", self.d))
        })?;
        Ok(a + rat_to_f64(&self.b) * s)
    }
}

pub fn rat_to_f64(q: &BigRational) -> f64 {
    // Good to a ulp for the magnitudes used here.
    let num = q.numer();
    let den = q.denom();
    let fnum: f64 = num.to_string().parse().unwrap();
    let fden: f64 = den.to_string().parse().unwrap();
    fnum / fden
}

impl fmt::Display for Quad {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.b.is_zero() {
            write!(f, "{}", self.a)
        } else if self.a.is_zero() {
            write!(f, "{}*sqrt({})", self.b, self.d)
        } else {
            write!(f, "({} + {}*sqrt({}))", self.a, self.b, self.d)
        }
    }
}

/// Laurent polynomial in `t = omega^(1/2)`, exponent -> coefficient.
type Poly = BTreeMap<i64, Quad>;

fn poly_zero() -> Poly {
    BTreeMap::new()
}

fn poly_const(c: Quad) -> Poly {
    let mut p = poly_zero();
    if !c.is_zero() {
        p.insert(0, c);
    }
    p
}

fn poly_add(a: &Poly, b: &Poly) -> Poly {
    let mut out = a.clone();
    for (e, c) in b {
        let entry = match out.remove(e) {
            Some(prev) => prev.add(c),
            None => c.clone(),
        };
        if !entry.is_zero() {
            out.insert(*e, entry);
        }
    }
    out
}

fn poly_mul(a: &Poly, b: &Poly) -> Poly {
    let mut out = poly_zero();
    for (ea, ca) in a {
        for (eb, cb) in b {
            let e = ea + eb;
            let c = ca.mul(cb);
            let entry = match out.remove(&e) {
                Some(prev) => prev.add(&c),
                None => c,
            };
            if !entry.is_zero() {
                out.insert(e, entry);
            }
        }
    }
    out
}

fn poly_neg(a: &Poly) -> Poly {
    a.iter().map(|(e, c)| (*e, c.neg())).collect()
}

fn poly_scale(a: &Poly, c: &Quad) -> Poly {
    if c.is_zero() {
        return poly_zero();
    }
    a.iter().map(|(e, q)| (*e, q.mul(c))).collect()
}

fn poly_min_exp(a: &Poly) -> i64 {
    *a.keys().next().expect("empty polynomial")
}

fn poly_max_exp(a: &Poly) -> i64 {
    *a.keys().next_back().expect("empty polynomial")
}

fn poly_shift(a: &Poly, k: i64) -> Poly {
    a.iter().map(|(e, c)| (e + k, c.clone())).collect()
}

/// Euclidean division in `Q(sqrt d)[t]` for ordinary (min exponent >= 0)
/// polynomials.  Returns (quotient, remainder).
fn poly_divmod(a: &Poly, b: &Poly) -> (Poly, Poly) {
    assert!(!b.is_empty(), "polynomial division by zero");
    let mut rem = a.clone();
    let mut quo = poly_zero();
    let deg_b = poly_max_exp(b);
    let lead_b_inv = b[&deg_b].inv();
    while !rem.is_empty() && poly_max_exp(&rem) >= deg_b {
        let deg_r = poly_max_exp(&rem);
        let coeff = rem[&deg_r].mul(&lead_b_inv);
        let shift = deg_r - deg_b;
        let mut term = poly_zero();
        term.insert(shift, coeff);
        rem = poly_add(&rem, &poly_neg(&poly_mul(&term, b)));
        quo = poly_add(&quo, &term);
    }
    (quo, rem)
}

fn poly_gcd(a: &Poly, b: &Poly) -> Poly {
    let mut x = a.clone();
    let mut y = b.clone();
    while !y.is_empty() {
        let (_, r) = poly_divmod(&x, &y);
        x = y;
        y = r;
    }
    if x.is_empty() {
        return x;
    }
    // Monic normalization so the gcd is canonical.
    let lead = x[&poly_max_exp(&x)].clone();
    poly_scale(&x, &lead.inv())
}

/// Exact scalar: rational function `num/den` in `t = omega^(1/2)` over
/// `Q(sqrt d)`.
///
/// Canonical form: `den = None` means denominator 1 (the common, purely
/// polynomial case); otherwise `den` is an ordinary monic polynomial of
/// positive degree with nonzero constant term and `gcd(num, den) = 1`
/// (after shifting `num` to start at exponent zero).  With that
/// normalization two scalars are equal iff their representations are equal.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Scalar {
    num: Poly,
    den: Option<Poly>,
}

impl Scalar {
    fn make(num: Poly, den: Poly) -> Self {
        assert!(!den.is_empty(), "scalar with zero denominator");
        if den.len() == 1 {
            // A monomial denominator divides in exactly.
            let (e, c) = den.iter().next().unwrap();
            let cinv = c.inv();
            return Scalar {
                num: poly_shift(&poly_scale(&num, &cinv), -e),
                den: None,
            };
        }
        Scalar {
            num,
            den: Some(den),
        }
        .normalize()
    }

    fn normalize(mut self) -> Self {
        if self.num.is_empty() {
            return Scalar::zero();
        }
        let Some(mut den) = self.den.take() else {
            return self;
        };
        // Push any pure t-power of den into num.
        let dmin = poly_min_exp(&den);
        if dmin != 0 {
            den = poly_shift(&den, -dmin);
            self.num = poly_shift(&self.num, -dmin);
        }
        let nmin = poly_min_exp(&self.num);
        let num0 = poly_shift(&self.num, -nmin);
        let g = poly_gcd(&num0, &den);
        let (num1, den1) = if !g.is_empty() && poly_max_exp(&g) > 0 {
            let (nq, nr) = poly_divmod(&num0, &g);
            let (dq, dr) = poly_divmod(&den, &g);
            debug_assert!(nr.is_empty() && dr.is_empty());
            (nq, dq)
        } else {
            (num0, den)
        };
        let lead = den1[&poly_max_exp(&den1)].clone();
        let linv = lead.inv();
        let num = poly_shift(&poly_scale(&num1, &linv), nmin);
        if poly_max_exp(&den1) == 0 {
            Scalar { num, den: None }
        } else {
            Scalar {
                num,
                den: Some(poly_scale(&den1, &linv)),
            }
        }
    }

    pub fn zero() -> Self {
        Scalar {
            num: poly_zero(),
            den: None,
        }
    }

    pub fn one() -> Self {
        Self::from_quad(Quad::one())
    }

    pub fn from_quad(q: Quad) -> Self {
        Scalar {
            num: poly_const(q),
            den: None,
        }
    }

    pub fn from_int(n: i64) -> Self {
        Self::from_quad(Quad::from_int(n))
    }

    pub fn ratio(num: i64, den: i64) -> Self {
        Self::from_quad(Quad::ratio(num, den))
    }

    pub fn from_rational(q: BigRational) -> Self {
        Self::from_quad(Quad::from_rational(q))
    }

    /// `sqrt(d)`.
    pub fn sqrt(d: i64) -> Self {
        Self::from_quad(Quad::sqrt(d))
    }

    /// `omega^(k/2)`; `omega_half_pow(2) = omega`.
    pub fn omega_half_pow(k: i64) -> Self {
        let mut num = poly_zero();
        num.insert(k, Quad::one());
        Scalar { num, den: None }
    }

    /// `omega^k`.
    pub fn omega_pow(k: i64) -> Self {
        Self::omega_half_pow(2 * k)
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_empty()
    }

    pub fn is_one(&self) -> bool {
        self == &Scalar::one()
    }

    /// True when the value is a Laurent polynomial in `omega^(1/2)` (no
    /// nontrivial denominator).
    pub fn is_polynomial(&self) -> bool {
        self.den.is_none()
    }

    /// Term map of a polynomial scalar: half-exponent of omega -> coefficient.
    pub fn terms(&self) -> Option<&BTreeMap<i64, Quad>> {
        if self.is_polynomial() {
            Some(&self.num)
        } else {
            None
        }
    }

    fn den_poly(&self) -> Poly {
        self.den.clone().unwrap_or_else(|| poly_const(Quad::one()))
    }

    pub fn add(&self, other: &Scalar) -> Scalar {
        match (&self.den, &other.den) {
            (None, None) => Scalar {
                num: poly_add(&self.num, &other.num),
                den: None,
            },
            _ => {
                let sd = self.den_poly();
                let od = other.den_poly();
                let num = poly_add(&poly_mul(&self.num, &od), &poly_mul(&other.num, &sd));
                Scalar::make(num, poly_mul(&sd, &od))
            }
        }
    }

    pub fn neg(&self) -> Scalar {
        Scalar {
            num: poly_neg(&self.num),
            den: self.den.clone(),
        }
    }

    pub fn sub(&self, other: &Scalar) -> Scalar {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &Scalar) -> Scalar {
        match (&self.den, &other.den) {
            (None, None) => Scalar {
                num: poly_mul(&self.num, &other.num),
                den: None,
            },
            _ => {
                let num = poly_mul(&self.num, &other.num);
                let den = poly_mul(&self.den_poly(), &other.den_poly());
                Scalar::make(num, den)
            }
        }
    }

    pub fn inv(&self) -> Result<Scalar, CartanError> {
        if self.is_zero() {
            return Err(CartanError::DivisionByZero);
        }
        Ok(Scalar::make(self.den_poly(), self.num.clone()))
    }

    pub fn div(&self, other: &Scalar) -> Result<Scalar, CartanError> {
        Ok(self.mul(&other.inv()?))
    }

    pub fn scale_int(&self, n: i64) -> Scalar {
        self.mul(&Scalar::from_int(n))
    }

    pub fn pow(&self, k: u32) -> Scalar {
        let mut out = Scalar::one();
        for _ in 0..k {
            out = out.mul(self);
        }
        out
    }

    /// Substitute floats for omega and sqrt(d).  Every symbol that actually
    /// occurs must have a substitution.
    pub fn numeric_value(&self, subs: &NumericSubs) -> Result<f64, CartanError> {
        let n = eval_poly(&self.num, subs)?;
        match &self.den {
            None => Ok(n),
            Some(d) => Ok(n / eval_poly(d, subs)?),
        }
    }

    /// Numeric value with the standard substitutions `omega = 2*pi`,
    /// `sqrt(d) = d.sqrt()`.
    pub fn to_f64(&self) -> f64 {
        self.numeric_value(&NumericSubs::standard()).unwrap()
    }
}

fn eval_poly(p: &Poly, subs: &NumericSubs) -> Result<f64, CartanError> {
    let mut acc = 0.0;
    for (e, c) in p {
        let base = if *e == 0 {
            1.0
        } else {
            let omega = subs
                .omega
                .ok_or_else(|| CartanError::MissingSubstitution("omega".into()))?;
            omega.powf(*e as f64 / 2.0)
        };
        let sqrt_d = if c.d == 0 {
            None
        } else {
            match subs.sqrt_d(c.d) {
                Some(v) => Some(v),
                None => {
                    return Err(CartanError::MissingSubstitution(format!("sqrt({})", c.d)))
                }
            }
        };
        acc += c.numeric(sqrt_d)? * base;
    }
    Ok(acc)
}

/// Float substitutions for the symbolic constants.
#[derive(Clone, Debug, Default)]
pub struct NumericSubs {
    pub omega: Option<f64>,
    pub sqrt_d: BTreeMap<i64, f64>,
}

impl NumericSubs {
    /// omega = 2*pi and sqrt(d) = the positive square root.
    pub fn standard() -> Self {
        let mut sqrt_d = BTreeMap::new();
        for d in 2..50 {
            sqrt_d.insert(d, (d as f64).sqrt());
        }
        NumericSubs {
            omega: Some(std::f64::consts::TAU),
            sqrt_d,
        }
    }

    pub fn empty() -> Self {
        NumericSubs::default()
    }

    fn sqrt_d(&self, d: i64) -> Option<f64> {
        self.sqrt_d.get(&d).copied()
    }
}

impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let fmt_poly = |p: &Poly, f: &mut fmt::Formatter<'_>| -> fmt::Result {
            let mut first = true;
            for (e, c) in p.iter().rev() {
                if !first {
                    write!(f, " + ")?;
                }
                first = false;
                match *e {
                    0 => write!(f, "{}", c)?,
                    2 => write!(f, "{}*w", c)?,
                    e if e % 2 == 0 => write!(f, "{}*w^{}", c, e / 2)?,
                    e => write!(f, "{}*w^({}/2)", c, e)?,
                }
            }
            Ok(())
        };
        match &self.den {
            None => fmt_poly(&self.num, f),
            Some(den) => {
                write!(f, "(")?;
                fmt_poly(&self.num, f)?;
                write!(f, ")/(")?;
                fmt_poly(den, f)?;
                write!(f, ")")
            }
        }
    }
}

/// Double factorial `(2n-1)!! = 1*3*5*...*(2n-1)` as a scalar; `n = 0` gives 1.
pub fn odd_double_factorial(n: u32) -> Scalar {
    let mut acc = BigInt::one();
    let mut k = 1i64;
    for _ in 0..n {
        acc *= BigInt::from(2 * k - 1);
        k += 1;
    }
    Scalar::from_rational(BigRational::from_integer(acc))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn omega_half_squares_to_omega() {
        let h = Scalar::omega_half_pow(1);
        assert_eq!(h.mul(&h), Scalar::omega_pow(1));
    }

    #[test]
    fn addition_cancels() {
        let one = Scalar::one();
        let w = Scalar::omega_pow(1);
        let s = one.add(&w).add(&Scalar::from_int(-1));
        assert_eq!(s, w);
    }

    #[test]
    fn inverse_powers_cancel() {
        // omega^{-1} * 2 omega = 2, the hand-arithmetic oracle.
        let lhs = Scalar::omega_pow(-1).mul(&Scalar::omega_pow(1).scale_int(2));
        assert_eq!(lhs, Scalar::from_int(2));
    }

    #[test]
    fn division_by_zero_errors() {
        assert!(Scalar::one().div(&Scalar::zero()).is_err());
    }

    #[test]
    fn rational_function_arithmetic_reduces() {
        // (1 + w)/(1) * 1/(1 + w) = 1
        let w = Scalar::omega_pow(1);
        let a = Scalar::one().add(&w);
        let prod = a.mul(&a.inv().unwrap());
        assert_eq!(prod, Scalar::one());
        // 1/(1+w) + w/(1+w) = 1
        let s = Scalar::one()
            .div(&a)
            .unwrap()
            .add(&w.div(&a).unwrap());
        assert_eq!(s, Scalar::one());
    }

    #[test]
    fn quadratic_extension_arithmetic() {
        let r2 = Scalar::sqrt(2);
        assert_eq!(r2.mul(&r2), Scalar::from_int(2));
        let x = Scalar::one().add(&r2); // 1 + sqrt2
        let y = x.inv().unwrap(); // sqrt2 - 1
        assert_eq!(x.mul(&y), Scalar::one());
        assert_eq!(y, r2.add(&Scalar::from_int(-1)));
    }

    #[test]
    fn numeric_value_basics() {
        let subs = NumericSubs::standard();
        let half = Scalar::omega_half_pow(1);
        let v = half.numeric_value(&subs).unwrap();
        assert!((v - (std::f64::consts::TAU).sqrt()).abs() < 1e-12);
        assert!((v - 2.5066282746310002).abs() < 1e-10);
        assert_eq!(Scalar::zero().numeric_value(&subs).unwrap(), 0.0);
        assert!((Scalar::ratio(3, 2).numeric_value(&subs).unwrap() - 1.5).abs() == 0.0);
    }

    #[test]
    fn numeric_value_missing_substitution() {
        let w = Scalar::omega_pow(1);
        assert!(w.numeric_value(&NumericSubs::empty()).is_err());
        let r2 = Scalar::sqrt(2);
        let mut subs = NumericSubs::empty();
        subs.omega = Some(1.0);
        assert!(r2.numeric_value(&subs).is_err());
    }

    #[test]
    fn double_factorial_values() {
        assert_eq!(odd_double_factorial(0), Scalar::from_int(1));
        assert_eq!(odd_double_factorial(1), Scalar::from_int(1));
        assert_eq!(odd_double_factorial(2), Scalar::from_int(3));
        assert_eq!(odd_double_factorial(3), Scalar::from_int(15));
    }
}
