//! Mathai-Quillen universal Thom forms and the Thom machinery: the Thom
//! map, the rotation homotopy operator, transgression and the mapping cone,
//! and Euler forms.
//!
//! The Berezin construction is normalized a posteriori: the defining
//! contracts (equivariant closure, unit fibre integral, origin pullback)
//! are certified symbolically at construction time, and no Thom form exists
//! in the system without them.

use num::rational::BigRational;
use num::{One, Zero};
use std::sync::Arc;

use crate::error::CartanError;
use crate::forms::{AnalyticForm, Atom, CoefficientFunction, ExtMono, ModelSpace, VectorField};
use crate::gca::{Element, GeneratorSet, Monomial};
use crate::gdgm::SymCarrier;
use crate::lie::{pfaffian, so_matrix, so_pairs};
use crate::matrix::{ComplexSlice, ScalarMatrix};
use crate::maps::ModelMap;
use crate::mixed::{rotation_actions, MixedCarrier, MixedForm};
use crate::numeric::adaptive_simpson;
use crate::scalar::Scalar;
use crate::weil::WeilAlgebra;

/// A certified Thom form: rank, the `W(so(r)) (x) Omega(R^r)` carrier it
/// lives on, and the corresponding base carrier over the point.
pub struct ThomForm {
    pub rank: usize,
    pub weil: WeilAlgebra,
    pub carrier: Arc<MixedCarrier>,
    pub base: Arc<MixedCarrier>,
    pub form: MixedForm,
}

/// The universal Mathai-Quillen representative on `R^r`:
///
/// ```text
/// tau_0 = (-1)^(r(r-1)/2) (2 pi)^(-r/2) e^(-|y|^2/2)
///         Ber[ exp( sum_a grad(y_a) chi_a - sum_{a<b} mu_ab chi_a chi_b ) ]
/// ```
///
/// with `grad(y_a) = dy_a + sum_b th_ab y_b` the covariant differential.
/// The three contracts (closure under the tensor differential, basicity,
/// fibre integral 1, origin pullback `(-2pi)^(-r/2) mu(Pf)` for even rank
/// and 0 for odd) are verified exactly; construction fails loudly if any of
/// them does not hold.
pub fn mq_thom_form(r: usize) -> Result<ThomForm, CartanError> {
    if r == 0 {
        return Err(CartanError::InvalidInput("rank must be positive".into()));
    }
    let lie = so_matrix(r)?;
    let wa = WeilAlgebra::new(lie.clone());
    let space = ModelSpace::new(0, r, 0);
    let actions = rotation_actions(&space, r, 0);
    let carrier = MixedCarrier::new(lie.clone(), wa.carrier.clone(), space.clone(), actions);
    let base_space = ModelSpace::new(0, 0, 0);
    let base = MixedCarrier::new(
        lie.clone(),
        wa.carrier.clone(),
        base_space.clone(),
        (0..lie.dim())
            .map(|_| VectorField::zero(base_space.clone()))
            .collect(),
    );

    // Extended symbolic factor: the Weil generators followed by the odd
    // Berezin variables chi_1..chi_r.
    let mut names: Vec<(String, i64)> = Vec::new();
    for i in 0..wa.gens().len() {
        names.push((wa.gens().name(i).to_string(), wa.gens().degree(i)));
    }
    for a in 0..r {
        names.push((format!("chi{}", a + 1), 1));
    }
    let ext_gens = GeneratorSet::new(names);
    let wa_map: Vec<usize> = (0..wa.gens().len()).collect();
    let zero_der = |deg: i64| {
        crate::gca::Derivation::zero(ext_gens.clone(), deg)
    };
    let ext_sym = SymCarrier::new(
        ext_gens.clone(),
        zero_der(1),
        (0..lie.dim()).map(|_| zero_der(-1)).collect(),
        (0..lie.dim()).map(|_| zero_der(0)).collect(),
    );
    let ext_carrier = MixedCarrier::new(
        lie.clone(),
        ext_sym,
        space.clone(),
        rotation_actions(&space, r, 0),
    );
    let pairs = so_pairs(r);
    // th_ab with antisymmetric indexing.
    let theta_elem = |a: usize, b: usize| -> Option<(usize, bool)> {
        if a == b {
            None
        } else if a < b {
            Some((pairs.iter().position(|&p| p == (a, b)).unwrap(), false))
        } else {
            Some((pairs.iter().position(|&p| p == (b, a)).unwrap(), true))
        }
    };
    let chi = |a: usize| {
        MixedForm::from_weil(
            ext_carrier.clone(),
            &Element::generator(ext_gens.clone(), wa.gens().len() + a),
        )
    };
    // grad(y_a) = dy_a + sum_b th_ab y_b.
    let nabla = |a: usize| -> MixedForm {
        let mut out = MixedForm::from_form(
            &ext_carrier,
            &AnalyticForm::monomial(
                space.clone(),
                ExtMono(vec![a]),
                CoefficientFunction::one(space.clone()),
            ),
        );
        for b in 0..r {
            if let Some((idx, flip)) = theta_elem(a, b) {
                let mut y_b = Atom::one(&space);
                y_b.fiber_pow[b] = 1;
                let mut term = MixedForm::zero(ext_carrier.clone());
                term.add_term(
                    Monomial::generator(idx),
                    ExtMono::empty(),
                    CoefficientFunction::from_atom(
                        space.clone(),
                        y_b,
                        if flip {
                            Scalar::from_int(-1)
                        } else {
                            Scalar::one()
                        },
                    ),
                );
                out = out.add(&term);
            }
        }
        out
    };
    // Nilpotent exponent N = sum_a grad(y_a) chi_a - sum_{a<b} mu_ab chi_a chi_b.
    let mut exponent = MixedForm::zero(ext_carrier.clone());
    for a in 0..r {
        exponent = exponent.add(&nabla(a).wedge(&chi(a)));
    }
    for (idx, &(a, b)) in pairs.iter().enumerate() {
        let mu = wa.mu(idx).reindex(ext_gens.clone(), &wa_map);
        let term = MixedForm::from_weil(ext_carrier.clone(), &mu)
            .wedge(&chi(a))
            .wedge(&chi(b));
        exponent = exponent.add(&term.neg());
        let _ = (a, b);
    }
    // exp(N): N is even and nilpotent; terms beyond degree r in chi vanish.
    let mut exp = MixedForm::one(ext_carrier.clone());
    let mut power = MixedForm::one(ext_carrier.clone());
    let mut factorial = BigRational::one();
    for k in 1..=r {
        power = power.wedge(&exponent);
        factorial *= BigRational::from_integer(k.into());
        let inv = Scalar::from_rational(factorial.clone()).inv()?;
        exp = exp.add(&power.scale(&inv));
        if power.is_zero() {
            break;
        }
    }
    // Berezin integral: keep terms whose chi-part is full, strip it, and
    // apply the orientation signs.
    let chi_indices: Vec<usize> = (0..r).map(|a| wa.gens().len() + a).collect();
    let mut berezin = MixedForm::zero(carrier.clone());
    for ((w, m), f) in &exp.terms {
        let full = chi_indices.iter().all(|&i| w.exponent_of(i) == 1);
        if !full {
            continue;
        }
        let stripped = Monomial::from_factors(
            w.factors()
                .iter()
                .filter(|&&(i, _)| i < wa.gens().len())
                .cloned()
                .collect(),
            wa.gens(),
        )
        .expect("stripped monomial is canonical");
        let mut sign_neg = (r * m.degree()) % 2 == 1;
        if (r * (r - 1) / 2) % 2 == 1 {
            sign_neg = !sign_neg;
        }
        let coeff = if sign_neg {
            f.neg()
        } else {
            f.clone()
        };
        berezin.add_term(stripped, m.clone(), coeff);
    }
    // Gaussian factor and normalization.
    let mut gauss_atom = Atom::one(&space);
    for g in gauss_atom.gauss.iter_mut() {
        *g = BigRational::one();
    }
    let gaussian = MixedForm::from_form(
        &carrier,
        &AnalyticForm::from_function(CoefficientFunction::from_atom(
            space.clone(),
            gauss_atom,
            Scalar::one(),
        )),
    );
    let tau = gaussian
        .wedge(&berezin)
        .scale(&Scalar::omega_half_pow(-(r as i64)));

    // Contract certification.
    let d_tau = tau.d();
    if !d_tau.is_zero() {
        return Err(CartanError::ContractFailure(format!(
            "Mathai-Quillen form is not closed; residual {}",
            d_tau.display()
        )));
    }
    for xi in 0..lie.dim() {
        let h = tau.iota(xi);
        if !h.is_zero() {
            return Err(CartanError::ContractFailure(format!(
                "Mathai-Quillen form is not horizontal for basis vector {xi}: {}",
                h.display()
            )));
        }
        let l = tau.lie_op(xi);
        if !l.is_zero() {
            return Err(CartanError::ContractFailure(format!(
                "Mathai-Quillen form is not invariant for basis vector {xi}: {}",
                l.display()
            )));
        }
    }
    let integral = tau.fibre_integrate(&base)?;
    if integral != MixedForm::one(base.clone()) {
        return Err(CartanError::ContractFailure(format!(
            "fibre integral is {} instead of 1",
            integral.display()
        )));
    }
    let origin = origin_pullback(&tau, &base)?;
    let expected = euler_form_symbolic(&wa, r)?;
    let expected_mixed = MixedForm::from_weil(base.clone(), &expected);
    if origin != expected_mixed {
        return Err(CartanError::ContractFailure(format!(
            "origin pullback is {} instead of {}",
            origin.display(),
            expected_mixed.display()
        )));
    }
    Ok(ThomForm {
        rank: r,
        weil: wa,
        carrier,
        base,
        form: tau,
    })
}

/// Pull a mixed form back along the zero section.
pub fn origin_pullback(
    tau: &MixedForm,
    base: &Arc<MixedCarrier>,
) -> Result<MixedForm, CartanError> {
    let zeta = ModelMap::zero_section(&tau.carrier.space);
    tau.pullback(&zeta, base)
}

/// The universal Euler element: `0` for odd rank and
/// `(-2 pi)^(-r/2) mu(Pf)` for even rank, as an element of `W(so(r))`.
pub fn euler_form_symbolic(wa: &WeilAlgebra, r: usize) -> Result<Element, CartanError> {
    if r % 2 == 1 {
        return Ok(Element::zero(wa.gens().clone()));
    }
    let pf = pfaffian(r)?;
    let lift = wa.mu_morphism(pf.generators());
    let mut scale = Scalar::omega_pow(-(r as i64 / 2));
    if (r / 2) % 2 == 1 {
        scale = scale.neg();
    }
    Ok(lift.apply(&pf).scale(&scale))
}

/// Thom map `zeta_*(alpha) = tau ^ pi^* alpha` for a trivial model bundle:
/// `alpha` lives on the base carrier, the result on the total carrier.
pub fn thom_map(
    tau: &MixedForm,
    alpha: &MixedForm,
    total: &Arc<MixedCarrier>,
) -> Result<MixedForm, CartanError> {
    let pi = ModelMap::bundle_projection(&total.space);
    if pi.target != alpha.carrier.space {
        return Err(CartanError::SpaceMismatch(
            "Thom map input must live on the bundle base".into(),
        ));
    }
    let lifted = alpha.pullback(&pi, total)?;
    Ok(tau.wedge(&lifted))
}

/// Extend an action vector field on `E` to the diagonal action on
/// `E + E`: fibre components are duplicated into both blocks (with the
/// coefficients reading the matching block), base components are shared.
pub fn extend_action_to_double(v: &VectorField, double: &Arc<ModelSpace>) -> VectorField {
    let e_space = v.space.clone();
    let n = e_space.torus_dim;
    let r = e_space.fiber_dim;
    let p1 = ModelMap::proj1(&e_space);
    let p2 = ModelMap::proj2(&e_space);
    let lift = |f: &CoefficientFunction, first: bool| -> CoefficientFunction {
        let form = AnalyticForm::from_function(f.clone());
        let pulled = if first {
            p1.pullback(&form).unwrap()
        } else {
            p2.pullback(&form).unwrap()
        };
        pulled.component(&ExtMono::empty())
    };
    let mut out = VectorField::zero(double.clone());
    for i in 0..e_space.dim() {
        let f = &v.components[i];
        if f.is_zero() {
            continue;
        }
        if e_space.is_fiber(i) {
            let a = i - n;
            out.components[n + a] = lift(f, true);
            out.components[n + r + a] = lift(f, false);
        } else if e_space.is_torus(i) {
            out.components[i] = lift(f, true);
        } else {
            out.components[i + r] = lift(f, true);
        }
    }
    out
}

/// Carriers for the rotation-homotopy computation on a model bundle: the
/// double bundle `E + E` and its cylinder, with diagonally extended
/// actions.
pub struct DoubleData {
    pub double: Arc<MixedCarrier>,
    pub cylinder: Arc<MixedCarrier>,
}

pub fn double_data(e_carrier: &Arc<MixedCarrier>) -> DoubleData {
    let e_space = &e_carrier.space;
    let double_space = ModelSpace::new(
        e_space.torus_dim,
        2 * e_space.fiber_dim,
        e_space.interval_dim,
    );
    let cyl_space = ModelSpace::new(
        double_space.torus_dim,
        double_space.fiber_dim,
        double_space.interval_dim + 1,
    );
    let double_actions: Vec<VectorField> = e_carrier
        .actions
        .iter()
        .map(|v| extend_action_to_double(v, &double_space))
        .collect();
    let cyl_actions: Vec<VectorField> = double_actions
        .iter()
        .map(|v| {
            let mut w = VectorField::zero(cyl_space.clone());
            for (i, f) in v.components.iter().enumerate() {
                if f.is_zero() {
                    continue;
                }
                let form = AnalyticForm::from_function(f.clone());
                let cylmap = ModelMap::cylinder_projection(&double_space);
                w.components[i] = cylmap
                    .pullback(&form)
                    .unwrap()
                    .component(&ExtMono::empty());
            }
            w
        })
        .collect();
    let double = MixedCarrier::new(
        e_carrier.lie.clone(),
        e_carrier.weil.clone(),
        double_space,
        double_actions,
    );
    let cylinder = MixedCarrier::new(
        e_carrier.lie.clone(),
        e_carrier.weil.clone(),
        cyl_space,
        cyl_actions,
    );
    DoubleData { double, cylinder }
}

/// The homotopy operator
/// `kappa = (-1)^r p_1_* o p_* o rho^* o l(p_2^* tau) o p_1^*`:
/// pull back along the first projection, multiply by the Thom form pulled
/// through the second, pull through the rotation family, integrate the
/// parameter, and integrate the second fibre block.  Exact throughout.
pub fn kappa_operator(
    tau: &MixedForm,
    beta: &MixedForm,
    e_carrier: &Arc<MixedCarrier>,
    dd: &DoubleData,
) -> Result<MixedForm, CartanError> {
    let e_space = &e_carrier.space;
    let r = e_space.fiber_dim;
    let p1 = ModelMap::proj1(e_space);
    let p2 = ModelMap::proj2(e_space);
    let rho = ModelMap::rotation_family(&dd.double.space);
    let b1 = beta.pullback(&p1, &dd.double)?;
    let t2 = tau.pullback(&p2, &dd.double)?;
    let prod = t2.wedge(&b1);
    let rotated = prod.pullback(&rho, &dd.cylinder)?;
    let t_coord = dd.cylinder.space.dim() - 1;
    let integrated = rotated.interval_integrate(t_coord, &dd.double)?;
    let mut out = integrated.fibre_integrate_block(r, r, e_carrier)?;
    if r % 2 == 1 {
        out = out.neg();
    }
    Ok(out)
}

/// `zeta_* pi_*` on the total carrier, for the homotopy-identity checks.
pub fn thom_projector(
    tau: &MixedForm,
    beta: &MixedForm,
    e_carrier: &Arc<MixedCarrier>,
    base: &Arc<MixedCarrier>,
) -> Result<MixedForm, CartanError> {
    let down = beta.fibre_integrate(base)?;
    thom_map(tau, &down, e_carrier)
}

/// Algebraic mapping cone of a morphism of complex slices:
/// `C(phi)^i = C^i + D^(i-1)` with `d(x, y) = (dx, phi(x) - dy)`.
pub fn mapping_cone(
    source: &ComplexSlice,
    target: &ComplexSlice,
    phi: &[ScalarMatrix],
) -> Result<ComplexSlice, CartanError> {
    if source.min_degree != target.min_degree
        || source.basis_labels.len() != target.basis_labels.len()
    {
        return Err(CartanError::DimensionMismatch(
            "cone needs aligned windows".into(),
        ));
    }
    let len = source.basis_labels.len();
    if phi.len() != len {
        return Err(CartanError::DimensionMismatch(
            "cone needs one phi block per degree".into(),
        ));
    }
    let min = source.min_degree;
    let mut labels: Vec<Vec<String>> = Vec::new();
    for i in 0..=len {
        let mut l: Vec<String> = Vec::new();
        if i < len {
            for s in &source.basis_labels[i] {
                l.push(format!("src:{s}"));
            }
        }
        if i > 0 {
            for t in &target.basis_labels[i - 1] {
                l.push(format!("tgt:{t}"));
            }
        }
        labels.push(l);
    }
    let dim_src = |i: usize| {
        if i < len {
            source.basis_labels[i].len()
        } else {
            0
        }
    };
    let dim_tgt_shift = |i: usize| {
        if i > 0 && i - 1 < len {
            target.basis_labels[i - 1].len()
        } else {
            0
        }
    };
    let mut diffs = Vec::new();
    for i in 0..len {
        let rows = dim_src(i + 1) + dim_tgt_shift(i + 1);
        let cols = dim_src(i) + dim_tgt_shift(i);
        let mut d = ScalarMatrix::zero(rows, cols);
        // d(x, y) = (dx, phi(x) - dy).
        if i + 1 < len {
            for ((a, b), v) in source.differentials[i].iter() {
                d.set(*a, *b, v.clone());
            }
        }
        for ((a, b), v) in phi[i].iter() {
            d.set(dim_src(i + 1) + *a, *b, v.clone());
        }
        if i > 0 {
            for ((a, b), v) in target.differentials[i - 1].iter() {
                d.set(dim_src(i + 1) + *a, dim_src(i) + *b, v.neg());
            }
        }
        diffs.push(d);
    }
    ComplexSlice::new(min, labels, diffs)
}

/// Multilinear evaluation `form(point)(v_1, .., v_k)` used by the numeric
/// transgression backend.
pub fn eval_multilinear(form: &AnalyticForm, point: &[f64], vectors: &[Vec<f64>]) -> f64 {
    let k = vectors.len();
    let mut total = 0.0;
    for (mono, f) in &form.terms {
        if mono.degree() != k {
            continue;
        }
        let coeff = f.eval(point);
        if coeff == 0.0 {
            continue;
        }
        // det of the k x k matrix of the vectors' components in the
        // monomial's coordinates.
        let mut mat: Vec<Vec<f64>> = vectors
            .iter()
            .map(|v| mono.0.iter().map(|&c| v[c]).collect())
            .collect();
        total += coeff * small_det(&mut mat);
    }
    total
}

fn small_det(m: &mut Vec<Vec<f64>>) -> f64 {
    let n = m.len();
    let mut det = 1.0;
    for c in 0..n {
        let pivot = (c..n).max_by(|&a, &b| m[a][c].abs().partial_cmp(&m[b][c].abs()).unwrap());
        let Some(p) = pivot else { return 0.0 };
        if m[p][c].abs() < 1e-300 {
            return 0.0;
        }
        if p != c {
            m.swap(p, c);
            det = -det;
        }
        det *= m[c][c];
        for rr in c + 1..n {
            let f = m[rr][c] / m[c][c];
            for cc in c..n {
                m[rr][cc] -= f * m[c][cc];
            }
        }
    }
    det
}

/// The transgression `phi` over `t in [1, inf)` with `h(t, v) = t v`,
/// evaluated numerically: the component of `phi(beta)` along the coordinate
/// directions `dirs` at `point` (a point of the punctured bundle).
///
/// The `[1, inf)` fibre is oriented so that the Stokes boundary term is
/// `+ i_1^*`, which makes the transgression formula read
/// `beta| = d phi(beta) + phi(d beta)`; with the same fibre-integration
/// convention as the cylinder formula this is `phi = -p_* h^*`.
pub fn transgression_component(
    beta: &AnalyticForm,
    point: &[f64],
    dirs: &[usize],
    tol: f64,
) -> Result<f64, CartanError> {
    let space = beta.space.clone();
    let n = space.torus_dim;
    // Decay horizon: the slowest Gaussian rate present and the fibre norm
    // bound how far the integrand reaches.
    let mut min_rate = f64::INFINITY;
    for f in beta.terms.values() {
        for atom in f.terms.keys() {
            for c in &atom.gauss {
                if c.is_zero() {
                    return Err(CartanError::NonIntegrable(
                        "transgression needs Gaussian decay".into(),
                    ));
                }
                min_rate = min_rate.min(crate::scalar::rat_to_f64(c));
            }
        }
    }
    let norm2: f64 = (0..space.fiber_dim)
        .map(|a| point[n + a] * point[n + a])
        .sum();
    if norm2 < 1e-12 {
        return Err(CartanError::InvalidInput(
            "transgression point must avoid the zero section".into(),
        ));
    }
    let horizon = (200.0 / (min_rate * norm2)).sqrt().max(2.0);
    let integrand = |t: f64| -> f64 {
        // (h^* beta)(t, v)(d/dt, dirs) = beta(t v)(dh d/dt, dh dirs):
        // dh(d/dt) has the fibre values v, dh scales fibre directions by t.
        let mut q = point.to_vec();
        for a in 0..space.fiber_dim {
            q[n + a] *= t;
        }
        let mut vt = vec![0.0; space.dim()];
        for a in 0..space.fiber_dim {
            vt[n + a] = point[n + a];
        }
        let mut vectors = vec![vt];
        for &dcoord in dirs {
            let mut e = vec![0.0; space.dim()];
            e[dcoord] = if space.is_fiber(dcoord) { t } else { 1.0 };
            vectors.push(e);
        }
        eval_multilinear(beta, &q, &vectors)
    };
    Ok(-adaptive_simpson(&integrand, 1.0, horizon, tol)?)
}

/// Pointwise residual of the transgression formula
/// `beta|_(E^x) = d phi(beta) + phi(d beta)` at one point: the supremum over
/// all component directions of degree `deg(beta) - 1 + 1`.  The exterior
/// derivative of the numeric transgression is taken by central differences.
pub fn transgression_residual(
    beta: &AnalyticForm,
    point: &[f64],
    tol: f64,
) -> Result<f64, CartanError> {
    let space = beta.space.clone();
    let dim = space.dim();
    let degs: Vec<usize> = beta.terms.keys().map(|m| m.degree()).collect();
    let Some(&k) = degs.first() else {
        return Ok(0.0);
    };
    let h = 1e-4;
    let dbeta = beta.d();
    let mut worst: f64 = 0.0;
    // Enumerate the index sets of size k.
    for mono in index_subsets(dim, k) {
        let direct = {
            let vectors: Vec<Vec<f64>> = mono
                .iter()
                .map(|&c| {
                    let mut e = vec![0.0; dim];
                    e[c] = 1.0;
                    e
                })
                .collect();
            eval_multilinear(beta, point, &vectors)
        };
        // (d phi(beta))_I = sum_{i in I} (-1)^pos d/d z_i phi(beta)_{I minus i}.
        let mut dphi = 0.0;
        for (pos, &i) in mono.iter().enumerate() {
            let rest: Vec<usize> = mono
                .iter()
                .cloned()
                .filter(|&c| c != i)
                .collect();
            let mut plus = point.to_vec();
            plus[i] += h;
            let mut minus = point.to_vec();
            minus[i] -= h;
            let fp = transgression_component(beta, &plus, &rest, tol)?;
            let fm = transgression_component(beta, &minus, &rest, tol)?;
            let deriv = (fp - fm) / (2.0 * h);
            dphi += if pos % 2 == 0 { deriv } else { -deriv };
        }
        let phid = transgression_component(&dbeta, point, &mono, tol)?;
        let residual = (direct - dphi - phid).abs();
        worst = worst.max(residual);
    }
    Ok(worst)
}

fn index_subsets(dim: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut current = Vec::new();
    fn rec(dim: usize, k: usize, from: usize, current: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if current.len() == k {
            out.push(current.clone());
            return;
        }
        for i in from..dim {
            current.push(i);
            rec(dim, k, i + 1, current, out);
            current.pop();
        }
    }
    rec(dim, k, 0, &mut current, &mut out);
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mq_contracts_certify_for_rank_one_and_two() {
        let t1 = mq_thom_form(1).unwrap();
        // tau_0 = (2 pi)^(-1/2) e^{-y^2/2} dy for rank 1.
        let space = t1.carrier.space.clone();
        let mut atom = Atom::one(&space);
        atom.gauss[0] = BigRational::one();
        let mut expect = MixedForm::zero(t1.carrier.clone());
        expect.add_term(
            Monomial::one(),
            ExtMono(vec![0]),
            CoefficientFunction::from_atom(space, atom, Scalar::omega_half_pow(-1)),
        );
        assert_eq!(t1.form, expect);
        // Rank 2 certifies all contracts at construction.
        let t2 = mq_thom_form(2).unwrap();
        assert_eq!(t2.rank, 2);
        // Origin pullback is (-2pi)^(-1) mu(Pf) = omega^(-1) mu.
        let origin = origin_pullback(&t2.form, &t2.base).unwrap();
        let mu = t2.weil.mu(0);
        let expected = MixedForm::from_weil(t2.base.clone(), &mu.scale(&Scalar::omega_pow(-1)));
        assert_eq!(origin, expected);
    }

    #[test]
    fn thom_map_section_of_fibre_integration() {
        // pi_* zeta_* = id on base forms, exactly via the projection formula.
        let t = mq_thom_form(2).unwrap();
        let alpha = MixedForm::from_weil(
            t.base.clone(),
            &Element::generator(t.weil.gens().clone(), 0),
        );
        let up = thom_map(&t.form, &alpha, &t.carrier).unwrap();
        let down = up.fibre_integrate(&t.base).unwrap();
        assert_eq!(down, alpha);
        // Module property: zeta_*(alpha ^ beta) = zeta_*(alpha) ^ pi^* beta.
        let beta = MixedForm::from_weil(
            t.base.clone(),
            &Element::generator(t.weil.gens().clone(), 1),
        );
        let lhs = thom_map(&t.form, &alpha.wedge(&beta), &t.carrier).unwrap();
        let pi = ModelMap::bundle_projection(&t.carrier.space);
        let rhs = thom_map(&t.form, &alpha, &t.carrier)
            .unwrap()
            .wedge(&beta.pullback(&pi, &t.carrier).unwrap());
        assert_eq!(lhs, rhs);
    }

    #[test]
    fn kappa_homotopy_identity_rank_one() {
        // zeta_* pi_* - id = d kappa + kappa d, exactly, on Gaussian samples
        // over the point base.
        let t = mq_thom_form(1).unwrap();
        let dd = double_data(&t.carrier);
        let space = t.carrier.space.clone();
        let mut samples = Vec::new();
        {
            let mut atom = Atom::one(&space);
            atom.gauss[0] = BigRational::one();
            samples.push(MixedForm::from_form(
                &t.carrier,
                &AnalyticForm::monomial(
                    space.clone(),
                    ExtMono(vec![0]),
                    CoefficientFunction::from_atom(space.clone(), atom.clone(), Scalar::one()),
                ),
            ));
            let mut odd = atom.clone();
            odd.fiber_pow[0] = 1;
            samples.push(MixedForm::from_form(
                &t.carrier,
                &AnalyticForm::from_function(CoefficientFunction::from_atom(
                    space.clone(),
                    odd,
                    Scalar::one(),
                )),
            ));
        }
        for beta in samples {
            let lhs = thom_projector(&t.form, &beta, &t.carrier, &t.base)
                .unwrap()
                .sub(&beta);
            let rhs = kappa_operator(&t.form, &beta.d(), &t.carrier, &dd)
                .unwrap()
                .add(&kappa_operator(&t.form, &beta, &t.carrier, &dd).unwrap().d());
            assert_eq!(lhs, rhs, "homotopy identity fails");
        }
    }

    #[test]
    fn mapping_cone_differential_squares_to_zero() {
        // Cone of the identity on a tiny complex is acyclic.
        let labels = vec![vec!["a".into()], vec!["b".into()], vec![]];
        let d0 = ScalarMatrix::from_entries(1, 1, vec![(0, 0, Scalar::one())]);
        let d1 = ScalarMatrix::zero(0, 1);
        let c = ComplexSlice::new(0, labels.clone(), vec![d0.clone(), d1.clone()]).unwrap();
        let phi = vec![
            ScalarMatrix::identity(1),
            ScalarMatrix::identity(1),
            ScalarMatrix::zero(0, 0),
        ];
        let cone = mapping_cone(&c, &c, &phi).unwrap();
        let dims = cone.cohomology_dims().unwrap();
        for (k, d) in dims {
            assert_eq!(d, 0, "cone cohomology at {k}");
        }
    }

    #[test]
    fn transgression_gives_primitive_of_closed_forms() {
        // beta = tau_0 for r = 1 (closed): residual of
        // beta| = d phi(beta) at a few points off the origin.
        let t = mq_thom_form(1).unwrap();
        let beta = t.form.into_analytic().unwrap();
        for p in [[0.7f64], [-1.1], [1.8]] {
            let res = transgression_residual(&beta, &p, 1e-12).unwrap();
            assert!(res < 1e-6, "residual {res} at {p:?}");
        }
    }

    #[test]
    fn all_thom_forms_cohomologous_rank_one() {
        // tau' = tau + d gamma is again a Thom form; the difference
        // integrates to zero and is exact with an in-class primitive.
        let t = mq_thom_form(1).unwrap();
        let space = t.carrier.space.clone();
        let mut atom = Atom::one(&space);
        atom.gauss[0] = BigRational::one();
        atom.fiber_pow[0] = 1;
        let gamma = MixedForm::from_form(
            &t.carrier,
            &AnalyticForm::from_function(CoefficientFunction::from_atom(
                space.clone(),
                atom,
                Scalar::ratio(2, 7),
            )),
        );
        let tau2 = t.form.add(&gamma.d());
        assert!(tau2.d().is_zero());
        assert_eq!(
            tau2.fibre_integrate(&t.base).unwrap(),
            MixedForm::one(t.base.clone())
        );
        let diff = tau2.sub(&t.form);
        assert!(diff.fibre_integrate(&t.base).unwrap().is_zero());
        assert_eq!(diff, gamma.d());
    }
}
