//! Numeric backend: pointwise evaluation plus adaptive quadrature for the
//! few compositions that leave the exact coefficient class (symbolic-time
//! scalings).  Deterministic node placement makes results reproducible.

use crate::error::CartanError;
use crate::forms::{AnalyticForm, ExtMono};
use num::rational::BigRational;
use num::Zero;

/// Adaptive Simpson quadrature with an absolute tolerance.
pub fn adaptive_simpson<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    tol: f64,
) -> Result<f64, CartanError> {
    fn simpson<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> f64 {
        (b - a) / 6.0 * (f(a) + 4.0 * f(0.5 * (a + b)) + f(b))
    }
    fn rec<F: Fn(f64) -> f64>(
        f: &F,
        a: f64,
        b: f64,
        whole: f64,
        tol: f64,
        depth: u32,
    ) -> Result<f64, CartanError> {
        let m = 0.5 * (a + b);
        let left = simpson(f, a, m);
        let right = simpson(f, m, b);
        let err = left + right - whole;
        if err.abs() < 15.0 * tol {
            return Ok(left + right + err / 15.0);
        }
        if depth == 0 {
            return Err(CartanError::QuadratureFailure {
                requested: tol,
                achieved: err.abs() / 15.0,
            });
        }
        Ok(rec(f, a, m, left, tol / 2.0, depth - 1)?
            + rec(f, m, b, right, tol / 2.0, depth - 1)?)
    }
    let whole = simpson(f, a, b);
    rec(f, a, b, whole, tol, 40)
}

/// Integral of a function of several variables over a box, by iterated
/// adaptive Simpson.  The tolerance is split evenly across the levels.
pub fn integrate_box<F: Fn(&[f64]) -> f64>(
    f: &F,
    ranges: &[(f64, f64)],
    tol: f64,
) -> Result<f64, CartanError> {
    fn go<F: Fn(&[f64]) -> f64>(
        f: &F,
        ranges: &[(f64, f64)],
        point: &mut Vec<f64>,
        tol: f64,
    ) -> Result<f64, CartanError> {
        let level = point.len();
        if level == ranges.len() {
            return Ok(f(point));
        }
        let (a, b) = ranges[level];
        // The closure recursion needs interior mutability for the point
        // stack; rebuild the prefix instead.
        let prefix = point.clone();
        let inner = |t: f64| -> f64 {
            let mut p = prefix.clone();
            p.push(t);
            go(f, ranges, &mut p, tol).unwrap_or(f64::NAN)
        };
        adaptive_simpson(&inner, a, b, tol)
    }
    let mut point = Vec::new();
    let v = go(f, ranges, &mut point, tol / (ranges.len().max(1) as f64))?;
    if v.is_nan() {
        return Err(CartanError::QuadratureFailure {
            requested: tol,
            achieved: f64::NAN,
        });
    }
    Ok(v)
}

/// Numeric integral of the top-degree component of a form over the whole
/// model space: torus factors over `[0,1]`, fibre factors over a window
/// wide enough for the Gaussian decay, interval factors over `[0,1]`.
pub fn numeric_integral(form: &AnalyticForm, tol: f64) -> Result<f64, CartanError> {
    let space = form.space.clone();
    let dim = space.dim();
    let top = ExtMono((0..dim).collect());
    let coeff = form.component(&top);
    if coeff.is_zero() {
        return Ok(0.0);
    }
    // The fibre window comes from the slowest Gaussian rate present.
    let mut min_rate: Option<BigRational> = None;
    for atom in coeff.terms.keys() {
        for c in &atom.gauss {
            if c.is_zero() {
                return Err(CartanError::NonIntegrable(
                    "numeric integral over R needs Gaussian decay".into(),
                ));
            }
            if min_rate.as_ref().map_or(true, |m| c < m) {
                min_rate = Some(c.clone());
            }
        }
    }
    let window = match min_rate {
        None => 0.0,
        Some(c) => {
            let cf = crate::scalar::rat_to_f64(&c);
            // exp(-c L^2 / 2) ~ 1e-18 at L = sqrt(84 / c).
            (84.0_f64 / cf).sqrt()
        }
    };
    let mut ranges = Vec::new();
    for i in 0..dim {
        if space.is_torus(i) {
            ranges.push((0.0, 1.0));
        } else if space.is_fiber(i) {
            ranges.push((-window, window));
        } else {
            ranges.push((0.0, 1.0));
        }
    }
    integrate_box(&|p: &[f64]| coeff.eval(p), &ranges, tol)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::forms::{Atom, CoefficientFunction, ModelSpace};
    use crate::scalar::Scalar;
    use num::One;

    #[test]
    fn simpson_integrates_smooth_functions() {
        let v = adaptive_simpson(&|x: f64| x * x, 0.0, 1.0, 1e-12).unwrap();
        assert!((v - 1.0 / 3.0).abs() < 1e-10);
        let v = adaptive_simpson(&|x: f64| (std::f64::consts::PI * x).sin(), 0.0, 1.0, 1e-12)
            .unwrap();
        assert!((v - 2.0 / std::f64::consts::PI).abs() < 1e-10);
    }

    #[test]
    fn gaussian_integral_matches_exact_value() {
        // int_R e^{-y^2/2} dy = sqrt(2 pi), matching the exact backend.
        let space = ModelSpace::new(0, 1, 0);
        let mut atom = Atom::one(&space);
        atom.gauss[0] = BigRational::one();
        let form = AnalyticForm::monomial(
            space.clone(),
            ExtMono(vec![0]),
            CoefficientFunction::from_atom(space.clone(), atom, Scalar::one()),
        );
        let v = numeric_integral(&form, 1e-10).unwrap();
        assert!((v - std::f64::consts::TAU.sqrt()).abs() < 1e-8, "{v}");
        // The zero form integrates to zero.
        let z = AnalyticForm::zero(space);
        assert_eq!(numeric_integral(&z, 1e-10).unwrap(), 0.0);
    }

    #[test]
    fn exact_and_numeric_agree_on_mixed_integrals() {
        // int over T^1 x R of cos^2(2 pi x) y^2 e^{-y^2/2} dx dy
        // = (1/2) * omega^(1/2).
        let space = ModelSpace::new(1, 1, 0);
        let mut atom = Atom::one(&space);
        atom.gauss[0] = BigRational::one();
        atom.fiber_pow[0] = 2;
        let f = CoefficientFunction::from_atom(space.clone(), atom, Scalar::one());
        let sq = f.mul(&{
            let mut a = Atom::one(&space);
            a.wave = crate::forms::Wave {
                trig: crate::forms::Trig::Cos,
                mode: vec![1],
            };
            let c = CoefficientFunction::from_atom(space.clone(), a, Scalar::one());
            c.mul(&c)
        });
        let form = AnalyticForm::monomial(space.clone(), ExtMono(vec![0, 1]), sq);
        let v = numeric_integral(&form, 1e-9).unwrap();
        let exact = Scalar::omega_half_pow(1).mul(&Scalar::ratio(1, 2)).to_f64();
        assert!((v - exact).abs() < 1e-7, "{v} vs {exact}");
    }
}
