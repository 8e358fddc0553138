//! Weil-algebra-valued differential forms: the tensor product of a symbolic
//! carrier (a Weil algebra, possibly times extra connection generators)
//! with the analytic forms of a model space, carrying the tensor g-module
//! structure
//!
//! ```text
//! d(w (x) b)       = d_W w (x) b        + (-1)^|w| w (x) d b
//! iota(xi)(w (x) b) = iota_W(xi) w (x) b + (-1)^|w| w (x) iota(X_xi) b
//! L(xi)(w (x) b)   = L_W(xi) w (x) b    + w (x) L(X_xi) b
//! ```
//!
//! where `X_xi` is the action vector field of the basis vector `xi` on the
//! model space.  Mathai-Quillen representatives, Thom maps, and the
//! equivariant Thom machinery all live here.

use std::collections::BTreeMap;
use std::sync::Arc;

use crate::error::CartanError;
use crate::forms::{AnalyticForm, CoefficientFunction, ExtMono, ModelSpace, VectorField};
use crate::gca::{Element, Monomial};
use crate::gdgm::SymCarrier;
use crate::lie::LieAlgebra;
use crate::maps::ModelMap;
use crate::scalar::Scalar;

/// The ambient structure of a mixed form: the Lie algebra, the symbolic
/// factor with its operators, the model space, and one action vector field
/// per Lie algebra basis vector.
#[derive(Clone, Debug)]
pub struct MixedCarrier {
    pub lie: Arc<LieAlgebra>,
    pub weil: SymCarrier,
    pub space: Arc<ModelSpace>,
    pub actions: Vec<VectorField>,
}

impl MixedCarrier {
    pub fn new(
        lie: Arc<LieAlgebra>,
        weil: SymCarrier,
        space: Arc<ModelSpace>,
        actions: Vec<VectorField>,
    ) -> Arc<Self> {
        assert_eq!(lie.dim(), weil.lie_dim());
        assert_eq!(lie.dim(), actions.len());
        Arc::new(MixedCarrier {
            lie,
            weil,
            space,
            actions,
        })
    }
}

/// Finite sum of `weil monomial (x) exterior monomial` terms with
/// coefficient functions.
#[derive(Clone, Debug)]
pub struct MixedForm {
    pub carrier: Arc<MixedCarrier>,
    pub terms: BTreeMap<(Monomial, ExtMono), CoefficientFunction>,
}

impl PartialEq for MixedForm {
    fn eq(&self, other: &Self) -> bool {
        self.terms == other.terms
    }
}

impl MixedForm {
    pub fn zero(carrier: Arc<MixedCarrier>) -> Self {
        MixedForm {
            carrier,
            terms: BTreeMap::new(),
        }
    }

    pub fn one(carrier: Arc<MixedCarrier>) -> Self {
        let mut m = Self::zero(carrier.clone());
        m.add_term(
            Monomial::one(),
            ExtMono::empty(),
            CoefficientFunction::one(carrier.space.clone()),
        );
        m
    }

    pub fn from_weil(carrier: Arc<MixedCarrier>, e: &Element) -> Self {
        assert!(e.generators() == &carrier.weil.gens);
        let mut out = Self::zero(carrier.clone());
        for (m, c) in e.terms() {
            out.add_term(
                m.clone(),
                ExtMono::empty(),
                CoefficientFunction::constant(carrier.space.clone(), c.clone()),
            );
        }
        out
    }

    pub fn from_form(carrier: &Arc<MixedCarrier>, f: &AnalyticForm) -> Self {
        assert_eq!(f.space, carrier.space);
        let mut out = Self::zero(carrier.clone());
        for (mono, cf) in &f.terms {
            out.add_term(Monomial::one(), mono.clone(), cf.clone());
        }
        out
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn add_term(&mut self, w: Monomial, m: ExtMono, f: CoefficientFunction) {
        if f.is_zero() {
            return;
        }
        let key = (w, m);
        let entry = match self.terms.remove(&key) {
            Some(prev) => prev.add(&f),
            None => f,
        };
        if !entry.is_zero() {
            self.terms.insert(key, entry);
        }
    }

    pub fn add(&self, other: &MixedForm) -> MixedForm {
        let mut out = self.clone();
        for ((w, m), f) in &other.terms {
            out.add_term(w.clone(), m.clone(), f.clone());
        }
        out
    }

    pub fn neg(&self) -> MixedForm {
        self.scale(&Scalar::from_int(-1))
    }

    pub fn sub(&self, other: &MixedForm) -> MixedForm {
        self.add(&other.neg())
    }

    pub fn scale(&self, c: &Scalar) -> MixedForm {
        let mut out = Self::zero(self.carrier.clone());
        for ((w, m), f) in &self.terms {
            out.add_term(w.clone(), m.clone(), f.scale(c));
        }
        out
    }

    /// Product: `(w1 (x) b1)(w2 (x) b2) = (-1)^(|b1| |w2|) w1 w2 (x) b1 b2`.
    pub fn wedge(&self, other: &MixedForm) -> MixedForm {
        let gens = &self.carrier.weil.gens;
        let mut out = Self::zero(self.carrier.clone());
        for ((w1, m1), f1) in &self.terms {
            for ((w2, m2), f2) in &other.terms {
                let Some((w, wneg)) = w1.mul(w2, gens) else {
                    continue;
                };
                let Some((m, mneg)) = m1.merge(m2) else {
                    continue;
                };
                let cross = (m1.degree() as i64 * w2.degree(gens)).rem_euclid(2) == 1;
                let mut f = f1.mul(f2);
                if wneg ^ mneg ^ cross {
                    f = f.neg();
                }
                out.add_term(w, m, f);
            }
        }
        out
    }

    /// Total degree components present.
    pub fn degrees(&self) -> Vec<i64> {
        let gens = &self.carrier.weil.gens;
        let mut ds: Vec<i64> = self
            .terms
            .keys()
            .map(|(w, m)| w.degree(gens) + m.degree() as i64)
            .collect();
        ds.sort();
        ds.dedup();
        ds
    }

    /// The tensor differential.
    pub fn d(&self) -> MixedForm {
        let carrier = &self.carrier;
        let gens = &carrier.weil.gens;
        let mut out = Self::zero(carrier.clone());
        for ((w, m), f) in &self.terms {
            // d_W on the symbolic factor.
            let dw = carrier.weil.d.apply(&Element::monomial(
                gens.clone(),
                w.clone(),
                Scalar::one(),
            ));
            for (wm, wc) in dw.terms() {
                out.add_term(wm.clone(), m.clone(), f.scale(wc));
            }
            // d on the analytic factor with the Koszul sign.
            let sign = w.degree(gens).rem_euclid(2) == 1;
            let db = AnalyticForm::monomial(carrier.space.clone(), m.clone(), f.clone()).d();
            for (bm, bf) in &db.terms {
                out.add_term(
                    w.clone(),
                    bm.clone(),
                    if sign { bf.neg() } else { bf.clone() },
                );
            }
        }
        out
    }

    /// Tensor contraction with the `xi`-th basis vector.
    pub fn iota(&self, xi: usize) -> MixedForm {
        let carrier = &self.carrier;
        let gens = &carrier.weil.gens;
        let mut out = Self::zero(carrier.clone());
        for ((w, m), f) in &self.terms {
            let iw = carrier.weil.iota[xi].apply(&Element::monomial(
                gens.clone(),
                w.clone(),
                Scalar::one(),
            ));
            for (wm, wc) in iw.terms() {
                out.add_term(wm.clone(), m.clone(), f.scale(wc));
            }
            let sign = w.degree(gens).rem_euclid(2) == 1;
            let ib = AnalyticForm::monomial(carrier.space.clone(), m.clone(), f.clone())
                .iota(&carrier.actions[xi]);
            for (bm, bf) in &ib.terms {
                out.add_term(
                    w.clone(),
                    bm.clone(),
                    if sign { bf.neg() } else { bf.clone() },
                );
            }
        }
        out
    }

    /// Tensor Lie derivative.
    pub fn lie_op(&self, xi: usize) -> MixedForm {
        let carrier = &self.carrier;
        let gens = &carrier.weil.gens;
        let mut out = Self::zero(carrier.clone());
        for ((w, m), f) in &self.terms {
            let lw = carrier.weil.lie_ops[xi].apply(&Element::monomial(
                gens.clone(),
                w.clone(),
                Scalar::one(),
            ));
            for (wm, wc) in lw.terms() {
                out.add_term(wm.clone(), m.clone(), f.scale(wc));
            }
            let lb = AnalyticForm::monomial(carrier.space.clone(), m.clone(), f.clone())
                .lie(&carrier.actions[xi]);
            for (bm, bf) in &lb.terms {
                out.add_term(w.clone(), bm.clone(), bf.clone());
            }
        }
        out
    }

    /// Fibre integration over the `R^r` block:
    /// `pi_*(w (x) b) = (-1)^(r |w|) w (x) pi_* b`, landing on the carrier
    /// over the base space.
    pub fn fibre_integrate(&self, base: &Arc<MixedCarrier>) -> Result<MixedForm, CartanError> {
        let r = self.carrier.space.fiber_dim;
        let gens = &self.carrier.weil.gens;
        let mut out = MixedForm::zero(base.clone());
        for ((w, m), f) in &self.terms {
            let form = AnalyticForm::monomial(self.carrier.space.clone(), m.clone(), f.clone());
            let integrated = crate::forms::fibre_integrate(&form, &base.space)?;
            let sign = (r as i64 * w.degree(gens)).rem_euclid(2) == 1;
            for (bm, bf) in &integrated.terms {
                out.add_term(
                    w.clone(),
                    bm.clone(),
                    if sign { bf.neg() } else { bf.clone() },
                );
            }
        }
        Ok(out)
    }

    /// Contraction with a plain vector field acting on the analytic factor
    /// only (used for foliation fields, which do not touch the symbolic
    /// part): `(-1)^|w| w (x) iota_v b`.
    pub fn iota_field(&self, v: &VectorField) -> MixedForm {
        let gens = &self.carrier.weil.gens;
        let mut out = Self::zero(self.carrier.clone());
        for ((w, m), f) in &self.terms {
            let sign = w.degree(gens).rem_euclid(2) == 1;
            let ib = AnalyticForm::monomial(self.carrier.space.clone(), m.clone(), f.clone())
                .iota(v);
            for (bm, bf) in &ib.terms {
                out.add_term(
                    w.clone(),
                    bm.clone(),
                    if sign { bf.neg() } else { bf.clone() },
                );
            }
        }
        out
    }

    /// Lie derivative along a plain vector field on the analytic factor.
    pub fn lie_field(&self, v: &VectorField) -> MixedForm {
        let mut out = Self::zero(self.carrier.clone());
        for ((w, m), f) in &self.terms {
            let lb =
                AnalyticForm::monomial(self.carrier.space.clone(), m.clone(), f.clone()).lie(v);
            for (bm, bf) in &lb.terms {
                out.add_term(w.clone(), bm.clone(), bf.clone());
            }
        }
        out
    }

    /// Fibre integration over a contiguous sub-block of fibre coordinates,
    /// with the Koszul sign `(-1)^(len |w|)` on the symbolic factor.
    pub fn fibre_integrate_block(
        &self,
        block_start: usize,
        block_len: usize,
        base: &Arc<MixedCarrier>,
    ) -> Result<MixedForm, CartanError> {
        let gens = &self.carrier.weil.gens;
        let mut out = MixedForm::zero(base.clone());
        for ((w, m), f) in &self.terms {
            let form = AnalyticForm::monomial(self.carrier.space.clone(), m.clone(), f.clone());
            let integrated =
                crate::forms::fibre_integrate_block(&form, block_start, block_len, &base.space)?;
            let sign = (block_len as i64 * w.degree(gens)).rem_euclid(2) == 1;
            for (bm, bf) in &integrated.terms {
                out.add_term(
                    w.clone(),
                    bm.clone(),
                    if sign { bf.neg() } else { bf.clone() },
                );
            }
        }
        Ok(out)
    }

    /// Integration over one interval coordinate (a cylinder fibre), with
    /// the Koszul sign `(-1)^|w|`.
    pub fn interval_integrate(
        &self,
        coord: usize,
        base: &Arc<MixedCarrier>,
    ) -> Result<MixedForm, CartanError> {
        let gens = &self.carrier.weil.gens;
        let mut out = MixedForm::zero(base.clone());
        for ((w, m), f) in &self.terms {
            let form = AnalyticForm::monomial(self.carrier.space.clone(), m.clone(), f.clone());
            let integrated = crate::forms::interval_integrate(&form, coord, &base.space)?;
            let sign = w.degree(gens).rem_euclid(2) == 1;
            for (bm, bf) in &integrated.terms {
                out.add_term(
                    w.clone(),
                    bm.clone(),
                    if sign { bf.neg() } else { bf.clone() },
                );
            }
        }
        Ok(out)
    }

    /// Apply a catalog map pullback to every analytic component, landing on
    /// the given carrier (whose space must be the map's source).  The
    /// symbolic factor is untouched, so this is only meaningful for maps
    /// commuting with the action (which all catalog maps used on mixed
    /// forms do).
    pub fn pullback(
        &self,
        map: &ModelMap,
        target_carrier: &Arc<MixedCarrier>,
    ) -> Result<MixedForm, CartanError> {
        let mut out = MixedForm::zero(target_carrier.clone());
        for ((w, m), f) in &self.terms {
            let form = AnalyticForm::monomial(self.carrier.space.clone(), m.clone(), f.clone());
            let pulled = map.pullback(&form)?;
            for (bm, bf) in &pulled.terms {
                out.add_term(w.clone(), bm.clone(), bf.clone());
            }
        }
        Ok(out)
    }

    /// Substitute the first `k_len` symbolic generators multiplicatively by
    /// mixed forms on a target carrier; the remaining generators map by
    /// `rest_map` into the target's symbolic factor, and the analytic part
    /// transplants unchanged (the spaces must agree).
    pub fn substitute_prefix(
        &self,
        k_len: usize,
        images: &[MixedForm],
        rest_map: &[usize],
        target: &Arc<MixedCarrier>,
    ) -> MixedForm {
        assert_eq!(self.carrier.space, target.space);
        let mut out = MixedForm::zero(target.clone());
        for ((w, m), f) in &self.terms {
            // Split the canonical monomial; prefix indices are below k_len,
            // so no sign arises.
            let mut acc = MixedForm::one(target.clone());
            let mut rest_factors: Vec<(usize, u32)> = Vec::new();
            for &(i, e) in w.factors() {
                if i < k_len {
                    for _ in 0..e {
                        acc = acc.wedge(&images[i]);
                    }
                } else {
                    rest_factors.push((rest_map[i - k_len], e));
                }
            }
            let rest = Monomial::from_factors(rest_factors, &target.weil.gens)
                .expect("rest of substitution is canonical");
            let tail = {
                let mut t = MixedForm::zero(target.clone());
                t.add_term(rest, m.clone(), f.clone());
                t
            };
            out = out.add(&acc.wedge(&tail));
        }
        out
    }

    /// Keep only terms whose symbolic monomial is 1 and return them as an
    /// analytic form; errors if other symbolic terms are present.
    pub fn into_analytic(&self) -> Result<AnalyticForm, CartanError> {
        let mut out = AnalyticForm::zero(self.carrier.space.clone());
        for ((w, m), f) in &self.terms {
            if !w.is_one() {
                return Err(CartanError::InvalidInput(format!(
                    "form has a nonscalar symbolic part {}",
                    w.display(&self.carrier.weil.gens)
                )));
            }
            out.add_component(m.clone(), f.clone());
        }
        Ok(out)
    }

    pub fn display(&self) -> String {
        if self.is_zero() {
            return "0".into();
        }
        self.terms
            .iter()
            .map(|((w, m), f)| {
                format!(
                    "{} (x) [{}] ({})",
                    w.display(&self.carrier.weil.gens),
                    m.display(&self.carrier.space),
                    f.display()
                )
            })
            .collect::<Vec<_>>()
            .join("  +  ")
    }
}

/// The rotation action fields of `so(r)` in the matrix basis
/// `e_ab = E_ab - E_ba` on the fibre block at `offset`:
/// `X_ab = -(y_b d/d y_a - y_a d/d y_b)`, the sign making `xi -> X_xi` a
/// Lie algebra homomorphism.
pub fn rotation_actions(space: &Arc<ModelSpace>, r: usize, offset: usize) -> Vec<VectorField> {
    let n = space.torus_dim;
    let mut out = Vec::new();
    for (a, b) in crate::lie::so_pairs(r) {
        let mut v = VectorField::zero(space.clone());
        // -(y_b d_a - y_a d_b).
        let mut yb = crate::forms::Atom::one(space);
        yb.fiber_pow[offset + b] = 1;
        let mut ya = crate::forms::Atom::one(space);
        ya.fiber_pow[offset + a] = 1;
        v.components[n + offset + a] = CoefficientFunction::from_atom(
            space.clone(),
            yb,
            Scalar::from_int(-1),
        );
        v.components[n + offset + b] =
            CoefficientFunction::from_atom(space.clone(), ya, Scalar::one());
        out.push(v);
    }
    out
}

/// Evaluate the six commutation relations on a sample of mixed forms;
/// returns human-readable violations.
pub fn mixed_axiom_violations(sample: &[MixedForm]) -> Vec<String> {
    let mut out = Vec::new();
    for (idx, m) in sample.iter().enumerate() {
        let carrier = &m.carrier;
        let n = carrier.lie.dim();
        if !m.d().d().is_zero() {
            out.push(format!("d^2 != 0 on sample {idx}"));
        }
        for i in 0..n {
            // [iota_i, d] = L_i.
            let lhs = m.d().iota(i).add(&m.iota(i).d());
            if lhs != m.lie_op(i) {
                out.push(format!("[iota_{i},d] != L_{i} on sample {idx}"));
            }
            // [L_i, d] = 0.
            if m.d().lie_op(i) != m.lie_op(i).d() {
                out.push(format!("[L_{i},d] != 0 on sample {idx}"));
            }
            for j in 0..n {
                // [iota_i, iota_j] = 0.
                if !m.iota(j).iota(i).add(&m.iota(i).iota(j)).is_zero() {
                    out.push(format!("[iota_{i},iota_{j}] != 0 on sample {idx}"));
                }
                // [L_i, iota_j] = iota([e_i, e_j]) and
                // [L_i, L_j] = L([e_i, e_j]).
                let mut u = vec![Scalar::zero(); n];
                let mut v = vec![Scalar::zero(); n];
                u[i] = Scalar::one();
                v[j] = Scalar::one();
                let br = carrier.lie.bracket(&u, &v);
                let mut rhs_iota = MixedForm::zero(carrier.clone());
                let mut rhs_lie = MixedForm::zero(carrier.clone());
                for (k, c) in br.iter().enumerate() {
                    if !c.is_zero() {
                        rhs_iota = rhs_iota.add(&m.iota(k).scale(c));
                        rhs_lie = rhs_lie.add(&m.lie_op(k).scale(c));
                    }
                }
                if m.iota(j).lie_op(i).sub(&m.lie_op(i).iota(j)).neg() != rhs_iota.neg() {
                    out.push(format!("[L_{i},iota_{j}] mismatch on sample {idx}"));
                }
                if m.lie_op(j).lie_op(i).sub(&m.lie_op(i).lie_op(j)).neg() != rhs_lie.neg() {
                    out.push(format!("[L_{i},L_{j}] mismatch on sample {idx}"));
                }
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::weil::weil_carrier;
    use num::rational::BigRational;
    use num::One;

    fn so2_carrier() -> Arc<MixedCarrier> {
        let lie = crate::lie::so_matrix(2).unwrap();
        let weil = weil_carrier(&lie);
        let space = ModelSpace::new(0, 2, 0);
        let actions = rotation_actions(&space, 2, 0);
        MixedCarrier::new(lie, weil, space, actions)
    }

    fn gaussian(carrier: &Arc<MixedCarrier>) -> MixedForm {
        let space = carrier.space.clone();
        let mut atom = crate::forms::Atom::one(&space);
        for g in atom.gauss.iter_mut() {
            *g = BigRational::one();
        }
        MixedForm::from_form(
            &carrier,
            &AnalyticForm::from_function(CoefficientFunction::from_atom(
                space.clone(),
                atom,
                Scalar::one(),
            )),
        )
        .clone()
    }

    #[test]
    fn axioms_hold_on_mixed_samples() {
        let carrier = so2_carrier();
        let th = MixedForm::from_weil(
            carrier.clone(),
            &Element::generator(carrier.weil.gens.clone(), 0),
        );
        let dy1 = MixedForm::from_form(
            &carrier,
            &AnalyticForm::monomial(
                carrier.space.clone(),
                ExtMono(vec![0]),
                CoefficientFunction::one(carrier.space.clone()),
            ),
        );
        let g = gaussian(&carrier);
        let samples = vec![
            th.clone(),
            dy1.clone(),
            g.clone(),
            th.wedge(&dy1).wedge(&g),
            dy1.wedge(&g),
        ];
        let violations = mixed_axiom_violations(&samples);
        assert!(violations.is_empty(), "{violations:?}");
    }

    #[test]
    fn rotation_action_is_homomorphism() {
        // so(2) is abelian; use so(3)-block inside so(3) actions on R^3 to
        // see brackets: [X_12, X_13] must equal X_[e12,e13].
        let lie = crate::lie::so_matrix(3).unwrap();
        let weil = weil_carrier(&lie);
        let space = ModelSpace::new(0, 3, 0);
        let actions = rotation_actions(&space, 3, 0);
        let carrier = MixedCarrier::new(lie, weil, space.clone(), actions);
        let mut atom = crate::forms::Atom::one(&space);
        atom.fiber_pow = vec![1, 2, 0];
        let sample = MixedForm::from_form(
            &carrier,
            &AnalyticForm::monomial(
                space.clone(),
                ExtMono(vec![0, 2]),
                CoefficientFunction::from_atom(space.clone(), atom, Scalar::one()),
            ),
        );
        let violations = mixed_axiom_violations(&[sample]);
        assert!(violations.is_empty(), "{violations:?}");
    }

    #[test]
    fn mixed_projection_formula() {
        // pi_*(beta ^ pi^* alpha) = pi_* beta ^ alpha with a Weil-valued beta.
        let carrier = so2_carrier();
        let lie = carrier.lie.clone();
        let base_space = ModelSpace::new(0, 0, 0);
        let base_carrier = MixedCarrier::new(
            lie.clone(),
            carrier.weil.clone(),
            base_space.clone(),
            vec![VectorField::zero(base_space.clone())],
        );
        // beta = th (x) g dy1 dy2 + g dy1.
        let g = gaussian(&carrier);
        let th = MixedForm::from_weil(
            carrier.clone(),
            &Element::generator(carrier.weil.gens.clone(), 0),
        );
        let dy = |i: usize| {
            MixedForm::from_form(
                &carrier,
                &AnalyticForm::monomial(
                    carrier.space.clone(),
                    ExtMono(vec![i]),
                    CoefficientFunction::one(carrier.space.clone()),
                ),
            )
        };
        let beta = th
            .wedge(&g)
            .wedge(&dy(0))
            .wedge(&dy(1))
            .add(&g.wedge(&dy(0)));
        // alpha = dt (a Weil 2-generator stands in for a base form since the
        // base is a point: use the symbolic part as the base form).
        let alpha = MixedForm::from_weil(
            base_carrier.clone(),
            &Element::generator(carrier.weil.gens.clone(), 1),
        );
        let alpha_up = MixedForm::from_weil(
            carrier.clone(),
            &Element::generator(carrier.weil.gens.clone(), 1),
        );
        let lhs = beta
            .wedge(&alpha_up)
            .fibre_integrate(&base_carrier)
            .unwrap();
        let rhs = beta.fibre_integrate(&base_carrier).unwrap().wedge(&alpha);
        assert_eq!(lhs, rhs);
    }
}
