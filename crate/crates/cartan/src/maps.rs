//! The catalog of model maps whose pullbacks preserve the exact coefficient
//! class: bundle projections and zero sections, the direct-sum projections,
//! the swap, reflection and quarter-turn automorphisms of `E + E`, the
//! rotation family, fixed rational scalings, cylinder projections and
//! slices, and torus translation families.
//!
//! Scaling over a symbolic parameter leaves the class; those paths go
//! through the numeric backend instead.

use num::rational::BigRational;
use num::Zero;
use std::sync::Arc;

use crate::error::CartanError;
use crate::forms::{
    interval_slice, AnalyticForm, Atom, CoefficientFunction, ExtMono, IntervalFactor, ModelSpace,
    Trig, Wave,
};
use crate::scalar::{rat_to_f64, Scalar};

#[derive(Clone, Debug)]
pub enum MapKind {
    /// `p1 : E + E -> E`, first block.
    Proj1,
    /// `p2 : E + E -> E`, second block.
    Proj2,
    /// `phi(a, b) = (b, a)` on `E + E`.
    Swap,
    /// `sigma(a, b) = (a, -b)` on `E + E`.
    Reflect,
    /// `rho_1(a, b) = (-b, a)` on `E + E`.
    QuarterTurn,
    /// `rho : [0,1] x (E + E) -> E + E`, the rotation by `(pi/2) t`; the
    /// parameter is the last interval coordinate of the source.
    RotationFamily,
    /// `h_q(v) = q v` on the fibre block, `q` a fixed rational.
    ScaleFixed(BigRational),
    /// `zeta : M -> E`, the zero section.
    ZeroSection,
    /// `pi : E -> M`, the bundle projection.
    BundleProjection,
    /// `[0,1] x B -> B`; the parameter is the last interval coordinate.
    CylinderProjection,
    /// `i_t : B -> [0,1] x B` at `t = 0` (false) or `t = 1` (true).
    SliceInclusion(bool),
    /// `(t, x) -> x + t v` on the torus block; the parameter is the last
    /// interval coordinate of the source.  Exact when every mode satisfies
    /// `4 m.v` integral.
    TorusTranslation(Vec<BigRational>),
}

/// A catalog map with its source and target model spaces.
#[derive(Clone, Debug)]
pub struct ModelMap {
    pub kind: MapKind,
    pub source: Arc<ModelSpace>,
    pub target: Arc<ModelSpace>,
}

impl ModelMap {
    pub fn proj1(target: &Arc<ModelSpace>) -> Self {
        let source = ModelSpace::new(
            target.torus_dim,
            2 * target.fiber_dim,
            target.interval_dim,
        );
        ModelMap {
            kind: MapKind::Proj1,
            source,
            target: target.clone(),
        }
    }

    pub fn proj2(target: &Arc<ModelSpace>) -> Self {
        let source = ModelSpace::new(
            target.torus_dim,
            2 * target.fiber_dim,
            target.interval_dim,
        );
        ModelMap {
            kind: MapKind::Proj2,
            source,
            target: target.clone(),
        }
    }

    pub fn swap(double: &Arc<ModelSpace>) -> Self {
        assert_eq!(double.fiber_dim % 2, 0);
        ModelMap {
            kind: MapKind::Swap,
            source: double.clone(),
            target: double.clone(),
        }
    }

    pub fn reflect(double: &Arc<ModelSpace>) -> Self {
        assert_eq!(double.fiber_dim % 2, 0);
        ModelMap {
            kind: MapKind::Reflect,
            source: double.clone(),
            target: double.clone(),
        }
    }

    pub fn quarter_turn(double: &Arc<ModelSpace>) -> Self {
        assert_eq!(double.fiber_dim % 2, 0);
        ModelMap {
            kind: MapKind::QuarterTurn,
            source: double.clone(),
            target: double.clone(),
        }
    }

    pub fn rotation_family(double: &Arc<ModelSpace>) -> Self {
        assert_eq!(double.fiber_dim % 2, 0);
        let source = ModelSpace::new(
            double.torus_dim,
            double.fiber_dim,
            double.interval_dim + 1,
        );
        ModelMap {
            kind: MapKind::RotationFamily,
            source,
            target: double.clone(),
        }
    }

    pub fn scale_fixed(space: &Arc<ModelSpace>, q: BigRational) -> Self {
        ModelMap {
            kind: MapKind::ScaleFixed(q),
            source: space.clone(),
            target: space.clone(),
        }
    }

    pub fn zero_section(total: &Arc<ModelSpace>) -> Self {
        let source = ModelSpace::new(total.torus_dim, 0, total.interval_dim);
        ModelMap {
            kind: MapKind::ZeroSection,
            source,
            target: total.clone(),
        }
    }

    pub fn bundle_projection(total: &Arc<ModelSpace>) -> Self {
        let target = ModelSpace::new(total.torus_dim, 0, total.interval_dim);
        ModelMap {
            kind: MapKind::BundleProjection,
            source: total.clone(),
            target,
        }
    }

    pub fn cylinder_projection(base: &Arc<ModelSpace>) -> Self {
        let source = ModelSpace::new(base.torus_dim, base.fiber_dim, base.interval_dim + 1);
        ModelMap {
            kind: MapKind::CylinderProjection,
            source,
            target: base.clone(),
        }
    }

    pub fn slice_inclusion(base: &Arc<ModelSpace>, at_one: bool) -> Self {
        let target = ModelSpace::new(base.torus_dim, base.fiber_dim, base.interval_dim + 1);
        ModelMap {
            kind: MapKind::SliceInclusion(at_one),
            source: base.clone(),
            target,
        }
    }

    pub fn torus_translation(base: &Arc<ModelSpace>, v: Vec<BigRational>) -> Self {
        assert_eq!(v.len(), base.torus_dim);
        let source = ModelSpace::new(base.torus_dim, base.fiber_dim, base.interval_dim + 1);
        ModelMap {
            kind: MapKind::TorusTranslation(v),
            source,
            target: base.clone(),
        }
    }

    /// Exact symbolic pullback.
    pub fn pullback(&self, form: &AnalyticForm) -> Result<AnalyticForm, CartanError> {
        if form.space != self.target {
            return Err(CartanError::SpaceMismatch(
                "pullback input must live on the map's target".into(),
            ));
        }
        match &self.kind {
            MapKind::Proj1 => Ok(self.block_inject(form, 0)),
            MapKind::Proj2 => Ok(self.block_inject(form, self.target.fiber_dim)),
            MapKind::Swap => Ok(self.block_permute(form, true, false)),
            MapKind::Reflect => Ok(self.block_permute(form, false, true)),
            MapKind::QuarterTurn => Ok(self.block_quarter_turn(form)),
            MapKind::RotationFamily => self.rotation_pullback(form),
            MapKind::ScaleFixed(q) => Ok(self.scale_pullback(form, q)),
            MapKind::ZeroSection => Ok(self.zero_section_pullback(form)),
            MapKind::BundleProjection => Ok(self.bundle_injection(form)),
            MapKind::CylinderProjection => Ok(self.cylinder_injection(form)),
            MapKind::SliceInclusion(at_one) => {
                let last = self.target.dim() - 1;
                interval_slice(form, last, *at_one, &self.source)
            }
            MapKind::TorusTranslation(v) => self.translation_pullback(form, v),
        }
    }

    /// Numeric evaluation of the underlying map.
    pub fn eval_point(&self, p: &[f64]) -> Vec<f64> {
        assert_eq!(p.len(), self.source.dim());
        let n = self.source.torus_dim;
        match &self.kind {
            MapKind::Proj1 => {
                let r = self.target.fiber_dim;
                let mut q: Vec<f64> = p[..n + r].to_vec();
                q.extend_from_slice(&p[n + 2 * r..]);
                q
            }
            MapKind::Proj2 => {
                let r = self.target.fiber_dim;
                let mut q: Vec<f64> = p[..n].to_vec();
                q.extend_from_slice(&p[n + r..n + 2 * r]);
                q.extend_from_slice(&p[n + 2 * r..]);
                q
            }
            MapKind::Swap => {
                let r = self.target.fiber_dim / 2;
                let mut q: Vec<f64> = p[..n].to_vec();
                q.extend_from_slice(&p[n + r..n + 2 * r]);
                q.extend_from_slice(&p[n..n + r]);
                q.extend_from_slice(&p[n + 2 * r..]);
                q
            }
            MapKind::Reflect => {
                let r = self.target.fiber_dim / 2;
                let mut q = p.to_vec();
                for i in 0..r {
                    q[n + r + i] = -q[n + r + i];
                }
                q
            }
            MapKind::QuarterTurn => {
                let r = self.target.fiber_dim / 2;
                let mut q = p.to_vec();
                for i in 0..r {
                    q[n + i] = -p[n + r + i];
                    q[n + r + i] = p[n + i];
                }
                q
            }
            MapKind::RotationFamily => {
                let r = self.target.fiber_dim / 2;
                let t = p[self.source.dim() - 1];
                let (sin, cos) = (std::f64::consts::FRAC_PI_2 * t).sin_cos();
                let mut q: Vec<f64> = p[..self.source.dim() - 1].to_vec();
                for i in 0..r {
                    let a = p[n + i];
                    let b = p[n + r + i];
                    q[n + i] = cos * a - sin * b;
                    q[n + r + i] = sin * a + cos * b;
                }
                q
            }
            MapKind::ScaleFixed(c) => {
                let cf = rat_to_f64(c);
                let mut q = p.to_vec();
                for i in 0..self.source.fiber_dim {
                    q[n + i] *= cf;
                }
                q
            }
            MapKind::ZeroSection => {
                let mut q: Vec<f64> = p[..n].to_vec();
                q.extend(std::iter::repeat(0.0).take(self.target.fiber_dim));
                q.extend_from_slice(&p[n..]);
                q
            }
            MapKind::BundleProjection => {
                let mut q: Vec<f64> = p[..n].to_vec();
                q.extend_from_slice(&p[n + self.source.fiber_dim..]);
                q
            }
            MapKind::CylinderProjection => p[..p.len() - 1].to_vec(),
            MapKind::SliceInclusion(at_one) => {
                let mut q = p.to_vec();
                q.push(if *at_one { 1.0 } else { 0.0 });
                q
            }
            MapKind::TorusTranslation(v) => {
                let t = p[p.len() - 1];
                let mut q: Vec<f64> = p[..p.len() - 1].to_vec();
                for i in 0..n {
                    q[i] += t * rat_to_f64(&v[i]);
                }
                q
            }
        }
    }

    /// Inject the single fibre block of the target into the double block of
    /// the source at `offset`.
    fn block_inject(&self, form: &AnalyticForm, offset: usize) -> AnalyticForm {
        let r = self.target.fiber_dim;
        let r2 = self.source.fiber_dim;
        let mut out = AnalyticForm::zero(self.source.clone());
        for (mono, f) in &form.terms {
            let new_mono = ExtMono(
                mono.0
                    .iter()
                    .map(|&i| {
                        if self.target.is_fiber(i) {
                            i + offset
                        } else if self.target.is_interval(i) {
                            i + (r2 - r)
                        } else {
                            i
                        }
                    })
                    .collect(),
            );
            let mut cf = CoefficientFunction::zero(self.source.clone());
            for (atom, c) in &f.terms {
                let mut fiber_pow = vec![0u32; r2];
                let mut gauss = vec![BigRational::zero(); r2];
                for a in 0..r {
                    fiber_pow[a + offset] = atom.fiber_pow[a];
                    gauss[a + offset] = atom.gauss[a].clone();
                }
                cf.add_term(
                    Atom {
                        wave: atom.wave.clone(),
                        fiber_pow,
                        gauss,
                        interval: atom.interval.clone(),
                    },
                    c.clone(),
                );
            }
            out.add_component(new_mono, cf);
        }
        out
    }

    /// Swap and/or negate the second block.
    fn block_permute(&self, form: &AnalyticForm, swap: bool, negate_second: bool) -> AnalyticForm {
        let n = self.target.torus_dim;
        let r = self.target.fiber_dim / 2;
        let mut out = AnalyticForm::zero(self.source.clone());
        for (mono, f) in &form.terms {
            let mut indices: Vec<usize> = Vec::with_capacity(mono.0.len());
            let mut neg = false;
            for &i in &mono.0 {
                if self.target.is_fiber(i) {
                    let a = i - n;
                    if a < r {
                        indices.push(if swap { i + r } else { i });
                    } else {
                        if negate_second {
                            neg = !neg;
                        }
                        indices.push(if swap { i - r } else { i });
                    }
                } else {
                    indices.push(i);
                }
            }
            neg ^= sort_sign(&mut indices);
            let mut cf = CoefficientFunction::zero(self.source.clone());
            for (atom, c) in &f.terms {
                let mut fiber_pow = atom.fiber_pow.clone();
                let mut gauss = atom.gauss.clone();
                let mut coeff = c.clone();
                if negate_second {
                    let odd: u32 = (0..r).map(|a| fiber_pow[a + r] % 2).sum();
                    if odd % 2 == 1 {
                        coeff = coeff.neg();
                    }
                }
                if swap {
                    for a in 0..r {
                        fiber_pow.swap(a, a + r);
                        gauss.swap(a, a + r);
                    }
                }
                if neg {
                    coeff = coeff.neg();
                }
                cf.add_term(
                    Atom {
                        wave: atom.wave.clone(),
                        fiber_pow,
                        gauss,
                        interval: atom.interval.clone(),
                    },
                    coeff,
                );
            }
            out.add_component(ExtMono(indices.clone()), cf);
        }
        out
    }

    /// Quarter turn `(a, b) -> (-b, a)`: pullback sends first-block data to
    /// the second block with a sign, second-block data to the first block.
    fn block_quarter_turn(&self, form: &AnalyticForm) -> AnalyticForm {
        let n = self.target.torus_dim;
        let r = self.target.fiber_dim / 2;
        let mut out = AnalyticForm::zero(self.source.clone());
        for (mono, f) in &form.terms {
            let mut indices: Vec<usize> = Vec::with_capacity(mono.0.len());
            let mut neg = false;
            for &i in &mono.0 {
                if self.target.is_fiber(i) {
                    let a = i - n;
                    if a < r {
                        // da -> -db.
                        indices.push(i + r);
                        neg = !neg;
                    } else {
                        indices.push(i - r);
                    }
                } else {
                    indices.push(i);
                }
            }
            neg ^= sort_sign(&mut indices);
            let mut cf = CoefficientFunction::zero(self.source.clone());
            for (atom, c) in &f.terms {
                let mut fiber_pow = atom.fiber_pow.clone();
                let mut gauss = atom.gauss.clone();
                let mut coeff = c.clone();
                // a^p -> (-b)^p, b^q -> a^q.
                let odd: u32 = (0..r).map(|a| fiber_pow[a] % 2).sum();
                if odd % 2 == 1 {
                    coeff = coeff.neg();
                }
                for a in 0..r {
                    fiber_pow.swap(a, a + r);
                    gauss.swap(a, a + r);
                }
                if neg {
                    coeff = coeff.neg();
                }
                cf.add_term(
                    Atom {
                        wave: atom.wave.clone(),
                        fiber_pow,
                        gauss,
                        interval: atom.interval.clone(),
                    },
                    coeff,
                );
            }
            out.add_component(ExtMono(indices.clone()), cf);
        }
        out
    }

    /// Rotation family: the substitutions
    /// `a_i -> cos a_i - sin b_i`, `b_i -> sin a_i + cos b_i` with
    /// `cos/sin((pi/2) t)` in the new last interval coordinate, on both the
    /// coefficients and the differentials.  Gaussian rates must agree on
    /// each mixed pair.
    fn rotation_pullback(&self, form: &AnalyticForm) -> Result<AnalyticForm, CartanError> {
        let n = self.target.torus_dim;
        let r = self.target.fiber_dim / 2;
        let src = &self.source;
        let t_idx = src.interval_dim - 1;
        let dt_index = src.dim() - 1;
        let fiber_trig = |fiber: usize, trig: Trig| {
            let mut a = Atom::one(src);
            a.fiber_pow[fiber] = 1;
            a.interval[t_idx] = IntervalFactor {
                pow: 0,
                trig: Some((trig, 1)),
            };
            a
        };
        // rho*(a_i), rho*(b_i) as coefficient functions.
        let pull_a = |i: usize| {
            let mut f = CoefficientFunction::zero(src.clone());
            f.add_term(fiber_trig(i, Trig::Cos), Scalar::one());
            f.add_term(fiber_trig(i + r, Trig::Sin), Scalar::from_int(-1));
            f
        };
        let pull_b = |i: usize| {
            let mut f = CoefficientFunction::zero(src.clone());
            f.add_term(fiber_trig(i, Trig::Sin), Scalar::one());
            f.add_term(fiber_trig(i + r, Trig::Cos), Scalar::one());
            f
        };
        // rho*(da_i), rho*(db_i) as 1-forms; pi/2 = omega/4.
        let quarter_omega = Scalar::omega_pow(1).mul(&Scalar::ratio(1, 4));
        let trig_fn = |trig: Trig| {
            let mut a = Atom::one(src);
            a.interval[t_idx] = IntervalFactor {
                pow: 0,
                trig: Some((trig, 1)),
            };
            CoefficientFunction::from_atom(src.clone(), a, Scalar::one())
        };
        let pull_da = |i: usize| -> AnalyticForm {
            let mut out = AnalyticForm::zero(src.clone());
            out.add_component(ExtMono(vec![n + i]), trig_fn(Trig::Cos));
            out.add_component(ExtMono(vec![n + r + i]), trig_fn(Trig::Sin).neg());
            out.add_component(
                ExtMono(vec![dt_index]),
                pull_b(i).scale(&quarter_omega.neg()),
            );
            out
        };
        let pull_db = |i: usize| -> AnalyticForm {
            let mut out = AnalyticForm::zero(src.clone());
            out.add_component(ExtMono(vec![n + i]), trig_fn(Trig::Sin));
            out.add_component(ExtMono(vec![n + r + i]), trig_fn(Trig::Cos));
            out.add_component(ExtMono(vec![dt_index]), pull_a(i).scale(&quarter_omega));
            out
        };
        let mut out = AnalyticForm::zero(src.clone());
        for (mono, f) in &form.terms {
            let mut pulled_coeff = CoefficientFunction::zero(src.clone());
            for (atom, c) in &f.terms {
                for i in 0..r {
                    if atom.gauss[i] != atom.gauss[i + r] {
                        return Err(CartanError::OutsideExactClass(format!(
                            "rotation pullback requires matching Gaussian rates on pair {}",
                            i + 1
                        )));
                    }
                }
                // Base atom: wave, Gaussian (rotation invariant), intervals
                // extended by the new parameter coordinate.
                let mut interval = atom.interval.clone();
                interval.push(IntervalFactor::one());
                let base = Atom {
                    wave: atom.wave.clone(),
                    fiber_pow: vec![0; 2 * r],
                    gauss: atom.gauss.clone(),
                    interval,
                };
                let mut acc = CoefficientFunction::from_atom(src.clone(), base, c.clone());
                for i in 0..r {
                    for _ in 0..atom.fiber_pow[i] {
                        acc = acc.mul(&pull_a(i));
                    }
                    for _ in 0..atom.fiber_pow[i + r] {
                        acc = acc.mul(&pull_b(i));
                    }
                }
                pulled_coeff = pulled_coeff.add(&acc);
            }
            let mut pulled_mono = AnalyticForm::one(src.clone());
            for &idx in &mono.0 {
                let factor = if self.target.is_fiber(idx) {
                    let a = idx - n;
                    if a < r {
                        pull_da(a)
                    } else {
                        pull_db(a - r)
                    }
                } else {
                    AnalyticForm::monomial(
                        src.clone(),
                        ExtMono(vec![idx]),
                        CoefficientFunction::one(src.clone()),
                    )
                };
                pulled_mono = pulled_mono.wedge(&factor)?;
            }
            out = out.add(&pulled_mono.scale_fn(&pulled_coeff));
        }
        Ok(out)
    }

    fn scale_pullback(&self, form: &AnalyticForm, q: &BigRational) -> AnalyticForm {
        let space = &self.source;
        let qs = Scalar::from_rational(q.clone());
        let q2 = q * q;
        let mut out = AnalyticForm::zero(space.clone());
        for (mono, f) in &form.terms {
            let fiber_count = mono.0.iter().filter(|&&i| space.is_fiber(i)).count() as u32;
            if q.is_zero() && fiber_count > 0 {
                continue;
            }
            let mut cf = CoefficientFunction::zero(space.clone());
            for (atom, c) in &f.terms {
                let total_pow: u32 = atom.fiber_pow.iter().sum();
                if q.is_zero() && total_pow > 0 {
                    continue;
                }
                let coeff = if q.is_zero() {
                    c.clone()
                } else {
                    c.mul(&qs.pow(total_pow + fiber_count))
                };
                let gauss = atom.gauss.iter().map(|c0| c0 * &q2).collect();
                cf.add_term(
                    Atom {
                        wave: atom.wave.clone(),
                        fiber_pow: atom.fiber_pow.clone(),
                        gauss,
                        interval: atom.interval.clone(),
                    },
                    coeff,
                );
            }
            out.add_component(mono.clone(), cf);
        }
        out
    }

    fn zero_section_pullback(&self, form: &AnalyticForm) -> AnalyticForm {
        let tgt = &self.target;
        let r = tgt.fiber_dim;
        let mut out = AnalyticForm::zero(self.source.clone());
        for (mono, f) in &form.terms {
            if mono.0.iter().any(|&i| tgt.is_fiber(i)) {
                continue;
            }
            let new_mono = ExtMono(
                mono.0
                    .iter()
                    .map(|&i| if tgt.is_interval(i) { i - r } else { i })
                    .collect(),
            );
            let mut cf = CoefficientFunction::zero(self.source.clone());
            for (atom, c) in &f.terms {
                if atom.fiber_pow.iter().any(|&p| p > 0) {
                    continue;
                }
                cf.add_term(
                    Atom {
                        wave: atom.wave.clone(),
                        fiber_pow: vec![],
                        gauss: vec![],
                        interval: atom.interval.clone(),
                    },
                    c.clone(),
                );
            }
            out.add_component(new_mono, cf);
        }
        out
    }

    fn bundle_injection(&self, form: &AnalyticForm) -> AnalyticForm {
        let src = &self.source;
        let r = src.fiber_dim;
        let mut out = AnalyticForm::zero(src.clone());
        for (mono, f) in &form.terms {
            let new_mono = ExtMono(
                mono.0
                    .iter()
                    .map(|&i| if self.target.is_interval(i) { i + r } else { i })
                    .collect(),
            );
            let mut cf = CoefficientFunction::zero(src.clone());
            for (atom, c) in &f.terms {
                cf.add_term(
                    Atom {
                        wave: atom.wave.clone(),
                        fiber_pow: vec![0; r],
                        gauss: vec![BigRational::zero(); r],
                        interval: atom.interval.clone(),
                    },
                    c.clone(),
                );
            }
            out.add_component(new_mono, cf);
        }
        out
    }

    fn cylinder_injection(&self, form: &AnalyticForm) -> AnalyticForm {
        let src = &self.source;
        let mut out = AnalyticForm::zero(src.clone());
        for (mono, f) in &form.terms {
            let mut cf = CoefficientFunction::zero(src.clone());
            for (atom, c) in &f.terms {
                let mut interval = atom.interval.clone();
                interval.push(IntervalFactor::one());
                cf.add_term(
                    Atom {
                        wave: atom.wave.clone(),
                        fiber_pow: atom.fiber_pow.clone(),
                        gauss: atom.gauss.clone(),
                        interval,
                    },
                    c.clone(),
                );
            }
            out.add_component(mono.clone(), cf);
        }
        out
    }

    fn translation_pullback(
        &self,
        form: &AnalyticForm,
        v: &[BigRational],
    ) -> Result<AnalyticForm, CartanError> {
        let src = &self.source;
        let t_idx = src.interval_dim - 1;
        let dt_index = src.dim() - 1;
        let mut out = AnalyticForm::zero(src.clone());
        for (mono, f) in &form.terms {
            // cos(2 pi (m.x + (m.v) t)) expands when 4 m.v is an integer:
            // the harmonic is l = 4 m.v in units of (pi/2) t.
            let mut pulled_coeff = CoefficientFunction::zero(src.clone());
            for (atom, c) in &f.terms {
                let mv: BigRational = atom
                    .wave
                    .mode
                    .iter()
                    .zip(v)
                    .map(|(m, vi)| BigRational::from_integer((*m).into()) * vi)
                    .sum();
                let four_mv = &mv * BigRational::from_integer(4.into());
                if !four_mv.is_integer() {
                    return Err(CartanError::OutsideExactClass(format!(
                        "translation pullback needs 4 m.v integral; got {mv}"
                    )));
                }
                let l: i64 = four_mv.to_integer().try_into().map_err(|_| {
                    CartanError::InvalidInput("translation harmonic overflow".into())
                })?;
                let mut interval = atom.interval.clone();
                interval.push(IntervalFactor::one());
                let with_trig = |trig: Option<(Trig, u32)>, wave: Wave| {
                    let mut a = Atom {
                        wave,
                        fiber_pow: atom.fiber_pow.clone(),
                        gauss: atom.gauss.clone(),
                        interval: interval.clone(),
                    };
                    a.interval[t_idx] = IntervalFactor { pow: 0, trig };
                    a
                };
                if l == 0 {
                    pulled_coeff.add_term(with_trig(None, atom.wave.clone()), c.clone());
                    continue;
                }
                let labs = l.unsigned_abs() as u32;
                // cos(A + th) = cos A cos th - sin A sin th;
                // sin(A + th) = sin A cos th + cos A sin th;
                // th = (pi/2) l t, and sin flips sign for negative l.
                let sin_sign = if l < 0 {
                    Scalar::from_int(-1)
                } else {
                    Scalar::one()
                };
                let other = Wave {
                    trig: match atom.wave.trig {
                        Trig::Cos => Trig::Sin,
                        Trig::Sin => Trig::Cos,
                    },
                    mode: atom.wave.mode.clone(),
                };
                pulled_coeff.add_term(
                    with_trig(Some((Trig::Cos, labs)), atom.wave.clone()),
                    c.clone(),
                );
                let sin_term = with_trig(Some((Trig::Sin, labs)), other);
                match atom.wave.trig {
                    Trig::Cos => pulled_coeff.add_term(sin_term, c.mul(&sin_sign).neg()),
                    Trig::Sin => pulled_coeff.add_term(sin_term, c.mul(&sin_sign)),
                }
            }
            // Differentials: dx_i -> dx_i + v_i dt.
            let mut pulled_mono = AnalyticForm::one(src.clone());
            for &idx in &mono.0 {
                let mut factor = AnalyticForm::monomial(
                    src.clone(),
                    ExtMono(vec![idx]),
                    CoefficientFunction::one(src.clone()),
                );
                if self.target.is_torus(idx) && !v[idx].is_zero() {
                    factor.add_component(
                        ExtMono(vec![dt_index]),
                        CoefficientFunction::constant(
                            src.clone(),
                            Scalar::from_rational(v[idx].clone()),
                        ),
                    );
                }
                pulled_mono = pulled_mono.wedge(&factor)?;
            }
            out = out.add(&pulled_mono.scale_fn(&pulled_coeff));
        }
        Ok(out)
    }
}

/// Sort indices, returning the permutation parity (true = odd).
fn sort_sign(v: &mut Vec<usize>) -> bool {
    let mut neg = false;
    for i in 1..v.len() {
        let mut j = i;
        while j > 0 && v[j - 1] > v[j] {
            v.swap(j - 1, j);
            neg = !neg;
            j -= 1;
        }
    }
    neg
}

#[cfg(test)]
mod tests {
    use super::*;
    use num::One;

    fn e_space() -> Arc<ModelSpace> {
        // E = T^1 x R^1.
        ModelSpace::new(1, 1, 0)
    }

    fn gaussian_dy(space: &Arc<ModelSpace>) -> AnalyticForm {
        let mut atom = Atom::one(space);
        atom.gauss[0] = BigRational::one();
        AnalyticForm::monomial(
            space.clone(),
            ExtMono(vec![space.torus_dim]),
            CoefficientFunction::from_atom(space.clone(), atom, Scalar::one()),
        )
    }

    #[test]
    fn reflect_flips_dy() {
        let double = ModelSpace::new(0, 2, 0);
        let sigma = ModelMap::reflect(&double);
        let db = AnalyticForm::monomial(
            double.clone(),
            ExtMono(vec![1]),
            CoefficientFunction::one(double.clone()),
        );
        assert_eq!(sigma.pullback(&db).unwrap(), db.neg());
        let da = AnalyticForm::monomial(
            double.clone(),
            ExtMono(vec![0]),
            CoefficientFunction::one(double.clone()),
        );
        assert_eq!(sigma.pullback(&da).unwrap(), da);
    }

    #[test]
    fn quarter_turn_is_rotation_at_one() {
        let double = ModelSpace::new(0, 2, 0);
        let rho = ModelMap::rotation_family(&double);
        let rho1 = ModelMap::quarter_turn(&double);
        let cyl = rho.source.clone();
        let mut atom = Atom::one(&double);
        atom.gauss = vec![BigRational::one(), BigRational::one()];
        atom.fiber_pow = vec![1, 2];
        let sample = AnalyticForm::monomial(
            double.clone(),
            ExtMono(vec![0]),
            CoefficientFunction::from_atom(double.clone(), atom, Scalar::one()),
        )
        .add(&AnalyticForm::monomial(
            double.clone(),
            ExtMono(vec![0, 1]),
            CoefficientFunction::one(double.clone()),
        ));
        let family = rho.pullback(&sample).unwrap();
        let at_one = interval_slice(&family, cyl.dim() - 1, true, &double).unwrap();
        assert_eq!(at_one, rho1.pullback(&sample).unwrap());
        let at_zero = interval_slice(&family, cyl.dim() - 1, false, &double).unwrap();
        assert_eq!(at_zero, sample);
    }

    #[test]
    fn swap_is_quarter_turn_after_reflection() {
        // phi = rho_1 o sigma, so phi* = sigma* o rho_1*.
        let double = ModelSpace::new(1, 2, 0);
        let phi = ModelMap::swap(&double);
        let rho1 = ModelMap::quarter_turn(&double);
        let sigma = ModelMap::reflect(&double);
        let mut atom = Atom::one(&double);
        atom.gauss = vec![BigRational::one(), BigRational::one()];
        atom.fiber_pow = vec![2, 1];
        atom.wave = Wave {
            trig: Trig::Sin,
            mode: vec![1],
        };
        let sample = AnalyticForm::monomial(
            double.clone(),
            ExtMono(vec![0, 1, 2]),
            CoefficientFunction::from_atom(double.clone(), atom, Scalar::one()),
        );
        let lhs = phi.pullback(&sample).unwrap();
        let rhs = sigma.pullback(&rho1.pullback(&sample).unwrap()).unwrap();
        assert_eq!(lhs, rhs);
    }

    #[test]
    fn scaling_pullback_chain_rule() {
        // (h_q)*(e^{-y^2/2} dy) = q e^{-q^2 y^2/2} dy.
        let space = e_space();
        let q = BigRational::new(3.into(), 2.into());
        let h = ModelMap::scale_fixed(&space, q.clone());
        let form = gaussian_dy(&space);
        let got = h.pullback(&form).unwrap();
        let mut atom = Atom::one(&space);
        atom.gauss[0] = &q * &q;
        let expect = AnalyticForm::monomial(
            space.clone(),
            ExtMono(vec![1]),
            CoefficientFunction::from_atom(space.clone(), atom, Scalar::ratio(3, 2)),
        );
        assert_eq!(got, expect);
        // h_0 kills fibre-supported data.
        let h0 = ModelMap::scale_fixed(&space, BigRational::zero());
        assert!(h0.pullback(&form).unwrap().is_zero());
    }

    #[test]
    fn zero_section_and_projection() {
        let total = e_space();
        let zeta = ModelMap::zero_section(&total);
        let pi = ModelMap::bundle_projection(&total);
        let base = pi.target.clone();
        let mut batom = Atom::one(&base);
        batom.wave = Wave {
            trig: Trig::Cos,
            mode: vec![3],
        };
        let alpha = AnalyticForm::monomial(
            base.clone(),
            ExtMono(vec![0]),
            CoefficientFunction::from_atom(base.clone(), batom, Scalar::one()),
        );
        let round = zeta.pullback(&pi.pullback(&alpha).unwrap()).unwrap();
        assert_eq!(round, alpha);
        assert!(zeta.pullback(&gaussian_dy(&total)).unwrap().is_zero());
    }

    #[test]
    fn rotation_commutes_with_d() {
        let double = ModelSpace::new(1, 2, 0);
        let rho = ModelMap::rotation_family(&double);
        let mut atom = Atom::one(&double);
        atom.gauss = vec![BigRational::one(), BigRational::one()];
        atom.fiber_pow = vec![1, 0];
        atom.wave = Wave {
            trig: Trig::Cos,
            mode: vec![1],
        };
        let sample = AnalyticForm::monomial(
            double.clone(),
            ExtMono(vec![1]),
            CoefficientFunction::from_atom(double.clone(), atom, Scalar::one()),
        );
        let lhs = rho.pullback(&sample.d()).unwrap();
        let rhs = rho.pullback(&sample).unwrap().d();
        assert_eq!(lhs, rhs);
    }

    #[test]
    fn rotation_requires_matching_rates() {
        let double = ModelSpace::new(0, 2, 0);
        let rho = ModelMap::rotation_family(&double);
        let mut atom = Atom::one(&double);
        atom.gauss = vec![BigRational::one(), BigRational::zero()];
        let bad = AnalyticForm::from_function(CoefficientFunction::from_atom(
            double.clone(),
            atom,
            Scalar::one(),
        ));
        assert!(matches!(
            rho.pullback(&bad),
            Err(CartanError::OutsideExactClass(_))
        ));
    }

    #[test]
    fn translation_pullback_numeric_agreement() {
        let base = ModelSpace::new(2, 0, 0);
        let v = vec![
            BigRational::new(1.into(), 4.into()),
            BigRational::new(1.into(), 2.into()),
        ];
        let h = ModelMap::torus_translation(&base, v);
        let mut atom = Atom::one(&base);
        atom.wave = Wave {
            trig: Trig::Sin,
            mode: vec![1, -1],
        };
        let sample = AnalyticForm::monomial(
            base.clone(),
            ExtMono(vec![0]),
            CoefficientFunction::from_atom(base.clone(), atom, Scalar::one()),
        );
        let pulled = h.pullback(&sample).unwrap();
        // dh sends the coordinate direction e_0 to itself, so the dx1
        // component obeys (h* omega)_0(p) = omega_0(h(p)).
        for p in [[0.15f64, 0.4, 0.3], [0.8, 0.05, 0.77]] {
            let target_p = h.eval_point(&p);
            let lhs = pulled
                .eval(&p)
                .get(&ExtMono(vec![0]))
                .cloned()
                .unwrap_or(0.0);
            let rhs = sample
                .eval(&target_p)
                .get(&ExtMono(vec![0]))
                .cloned()
                .unwrap_or(0.0);
            assert!((lhs - rhs).abs() < 1e-12, "{lhs} vs {rhs}");
        }
    }

    #[test]
    fn functoriality_on_composites() {
        // (p1 o swap)* = swap* o p1* = p2*.
        let target = e_space();
        let p1 = ModelMap::proj1(&target);
        let p2 = ModelMap::proj2(&target);
        let double = p1.source.clone();
        let phi = ModelMap::swap(&double);
        let sample = gaussian_dy(&target);
        let lhs = phi.pullback(&p1.pullback(&sample).unwrap()).unwrap();
        let rhs = p2.pullback(&sample).unwrap();
        assert_eq!(lhs, rhs);
    }
}
