//! g-differential graded modules: operator triples `(d, iota, L)` on a
//! carrier, the commutation-relation axiom suite, invariant/horizontal/basic
//! subspaces, basic cohomology, Weil complexes, and morphism/homotopy
//! verification.
//!
//! Carriers come in three kinds: free graded-commutative algebras with the
//! operators given as derivations, precomputed degree windows with operator
//! matrices, and tensor products of a symbolic factor with a window.  All
//! subspace and cohomology computations happen degree by degree inside an
//! explicit window, and every result is certified only up to that window.

use std::collections::BTreeMap;
use std::sync::{Arc, Mutex};

use crate::error::CartanError;
use crate::gca::{homogeneous_basis, Derivation, Element, GeneratorSet, Monomial};
use crate::lie::LieAlgebra;
use crate::matrix::{ComplexSlice, ScalarMatrix};
use crate::scalar::Scalar;

/// One of the structure operators of a g-dgm.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OpKind {
    /// Differential, degree +1.
    D,
    /// Contraction with the i-th Lie algebra basis vector, degree -1.
    Iota(usize),
    /// Lie derivative along the i-th basis vector, degree 0.
    L(usize),
}

impl OpKind {
    pub fn degree(&self) -> i64 {
        match self {
            OpKind::D => 1,
            OpKind::Iota(_) => -1,
            OpKind::L(_) => 0,
        }
    }

    fn is_odd(&self) -> bool {
        self.degree().rem_euclid(2) == 1
    }

    fn cache_key(&self) -> (u8, usize) {
        match self {
            OpKind::D => (0, 0),
            OpKind::Iota(i) => (1, *i),
            OpKind::L(i) => (2, *i),
        }
    }
}

type MatCache = Arc<Mutex<BTreeMap<(u8, usize, i64), ScalarMatrix>>>;
type BasisCache = Arc<Mutex<BTreeMap<i64, Arc<Vec<Monomial>>>>>;

/// Symbolic carrier: a free graded-commutative algebra whose structure
/// operators are graded derivations.
#[derive(Clone, Debug)]
pub struct SymCarrier {
    pub gens: Arc<GeneratorSet>,
    pub d: Derivation,
    pub iota: Vec<Derivation>,
    pub lie_ops: Vec<Derivation>,
    // Per-degree bases and operator matrices are memoized; clones share the
    // cache, which is sound because carriers are immutable.
    basis_cache: BasisCache,
    mat_cache: MatCache,
}

impl SymCarrier {
    pub fn new(
        gens: Arc<GeneratorSet>,
        d: Derivation,
        iota: Vec<Derivation>,
        lie_ops: Vec<Derivation>,
    ) -> Self {
        assert_eq!(iota.len(), lie_ops.len());
        SymCarrier {
            gens,
            d,
            iota,
            lie_ops,
            basis_cache: Arc::new(Mutex::new(BTreeMap::new())),
            mat_cache: Arc::new(Mutex::new(BTreeMap::new())),
        }
    }

    pub fn lie_dim(&self) -> usize {
        self.iota.len()
    }

    pub fn derivation(&self, op: OpKind) -> &Derivation {
        match op {
            OpKind::D => &self.d,
            OpKind::Iota(i) => &self.iota[i],
            OpKind::L(i) => &self.lie_ops[i],
        }
    }

    pub fn apply(&self, op: OpKind, e: &Element) -> Element {
        self.derivation(op).apply(e)
    }

    pub fn basis(&self, degree: i64) -> Arc<Vec<Monomial>> {
        if degree < 0 {
            return Arc::new(Vec::new());
        }
        let mut cache = self.basis_cache.lock().unwrap();
        cache
            .entry(degree)
            .or_insert_with(|| Arc::new(homogeneous_basis(&self.gens, degree)))
            .clone()
    }

    pub fn dim(&self, degree: i64) -> usize {
        self.basis(degree).len()
    }

    /// Matrix of a structure operator on the degree-`k` component.
    pub fn op_matrix(&self, op: OpKind, k: i64) -> ScalarMatrix {
        let (tag, idx) = op.cache_key();
        if let Some(m) = self.mat_cache.lock().unwrap().get(&(tag, idx, k)) {
            return m.clone();
        }
        let src = self.basis(k);
        let tgt = self.basis(k + op.degree());
        let index: BTreeMap<&Monomial, usize> =
            tgt.iter().enumerate().map(|(i, m)| (m, i)).collect();
        let mut mat = ScalarMatrix::zero(tgt.len(), src.len());
        for (col, m) in src.iter().enumerate() {
            let img =
                self.apply(op, &Element::monomial(self.gens.clone(), m.clone(), Scalar::one()));
            for (mono, c) in img.terms() {
                let row = *index
                    .get(mono)
                    .expect("derivation image escaped the expected degree");
                mat.set(row, col, c.clone());
            }
        }
        self.mat_cache
            .lock()
            .unwrap()
            .insert((tag, idx, k), mat.clone());
        mat
    }

    /// Coordinates of the degree-`k` component of an element.
    pub fn coords(&self, e: &Element, k: i64) -> Vec<Scalar> {
        let basis = self.basis(k);
        basis.iter().map(|m| e.coefficient(m)).collect()
    }

    pub fn element_from_coords(&self, k: i64, coords: &[Scalar]) -> Element {
        let basis = self.basis(k);
        assert_eq!(basis.len(), coords.len());
        let mut out = Element::zero(self.gens.clone());
        for (m, c) in basis.iter().zip(coords) {
            if !c.is_zero() {
                out = out.add(&Element::monomial(self.gens.clone(), m.clone(), c.clone()));
            }
        }
        out
    }

    /// Tensor product of two symbolic carriers over the same Lie algebra:
    /// the free algebra on the disjoint union of generators, operators
    /// extended as derivations (zero on the other side).  Name collisions in
    /// the right factor get primes.  Returns the carrier together with the
    /// index maps of both factors.
    pub fn tensor(&self, other: &SymCarrier) -> (SymCarrier, Vec<usize>, Vec<usize>) {
        assert_eq!(self.lie_dim(), other.lie_dim());
        let mut names: Vec<(String, i64)> = Vec::new();
        for i in 0..self.gens.len() {
            names.push((self.gens.name(i).to_string(), self.gens.degree(i)));
        }
        let taken: std::collections::HashSet<String> =
            names.iter().map(|(n, _)| n.clone()).collect();
        let mut right_names: Vec<(String, i64)> = Vec::new();
        for i in 0..other.gens.len() {
            let mut n = other.gens.name(i).to_string();
            while taken.contains(&n) || right_names.iter().any(|(m, _)| *m == n) {
                n.push('\'');
            }
            right_names.push((n, other.gens.degree(i)));
        }
        names.extend(right_names);
        let gens = GeneratorSet::new(names);
        let left_map: Vec<usize> = (0..self.gens.len()).collect();
        let right_map: Vec<usize> = (0..other.gens.len())
            .map(|i| self.gens.len() + i)
            .collect();
        let lift = |dl: &Derivation, dr: &Derivation, degree: i64| -> Derivation {
            let mut images = Vec::new();
            for i in 0..self.gens.len() {
                images.push(dl.image(i).reindex(gens.clone(), &left_map));
            }
            for i in 0..other.gens.len() {
                images.push(dr.image(i).reindex(gens.clone(), &right_map));
            }
            Derivation::new(gens.clone(), degree, images)
        };
        let d = lift(&self.d, &other.d, 1);
        let iota = (0..self.lie_dim())
            .map(|x| lift(&self.iota[x], &other.iota[x], -1))
            .collect();
        let lie_ops = (0..self.lie_dim())
            .map(|x| lift(&self.lie_ops[x], &other.lie_ops[x], 0))
            .collect();
        (SymCarrier::new(gens, d, iota, lie_ops), left_map, right_map)
    }
}

/// Explicit degree window with operator matrices.  The module is taken to
/// vanish below `min_degree`; `truncated_top` records whether `max_degree`
/// is a truncation (as for Fourier or polynomial cutoffs) rather than a true
/// upper bound.
#[derive(Clone, Debug)]
pub struct SliceModule {
    pub min_degree: i64,
    pub labels: Vec<Vec<String>>,
    /// `d[i]`: degree `min+i` -> `min+i+1`; length `labels.len() - 1`.
    pub d: Vec<ScalarMatrix>,
    /// `iota[xi][i]`: degree `min+i` -> `min+i-1`; the map at `i = 0` must
    /// have zero rows (the module vanishes below the window).
    pub iota: Vec<Vec<ScalarMatrix>>,
    /// `lie_ops[xi][i]`: degree `min+i` -> `min+i`.
    pub lie_ops: Vec<Vec<ScalarMatrix>>,
    pub truncated_top: bool,
}

impl SliceModule {
    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn max_degree(&self) -> i64 {
        self.min_degree + self.labels.len() as i64 - 1
    }

    pub fn lie_dim(&self) -> usize {
        self.iota.len()
    }

    pub fn dim(&self, k: i64) -> usize {
        let i = k - self.min_degree;
        if i < 0 || i as usize >= self.labels.len() {
            0
        } else {
            self.labels[i as usize].len()
        }
    }

    pub fn op_matrix(&self, op: OpKind, k: i64) -> Option<ScalarMatrix> {
        let i = k - self.min_degree;
        if i < 0 || i as usize >= self.labels.len() {
            return Some(ScalarMatrix::zero(self.dim(k + op.degree()), 0));
        }
        let i = i as usize;
        match op {
            OpKind::D => {
                if i < self.d.len() {
                    Some(self.d[i].clone())
                } else if self.truncated_top {
                    None
                } else {
                    Some(ScalarMatrix::zero(self.dim(k + 1), self.dim(k)))
                }
            }
            OpKind::Iota(x) => Some(self.iota[x][i].clone()),
            OpKind::L(x) => Some(self.lie_ops[x][i].clone()),
        }
    }

    fn validate(&self) -> Result<(), CartanError> {
        let len = self.labels.len();
        if self.d.len() + 1 != len {
            return Err(CartanError::DimensionMismatch("slice d length".into()));
        }
        for ops in self.iota.iter().chain(self.lie_ops.iter()) {
            if ops.len() != len {
                return Err(CartanError::DimensionMismatch(
                    "slice operator length".into(),
                ));
            }
        }
        for i in 0..len {
            let k = self.min_degree + i as i64;
            if i < self.d.len()
                && (self.d[i].cols != self.dim(k) || self.d[i].rows != self.dim(k + 1))
            {
                return Err(CartanError::DimensionMismatch(format!("d at degree {k}")));
            }
            for (x, ops) in self.iota.iter().enumerate() {
                if ops[i].cols != self.dim(k) || ops[i].rows != self.dim(k - 1) {
                    return Err(CartanError::DimensionMismatch(format!(
                        "iota_{x} at degree {k}"
                    )));
                }
            }
            for (x, ops) in self.lie_ops.iter().enumerate() {
                if ops[i].cols != self.dim(k) || ops[i].rows != self.dim(k) {
                    return Err(CartanError::DimensionMismatch(format!(
                        "L_{x} at degree {k}"
                    )));
                }
            }
        }
        Ok(())
    }
}

/// The carrier of a [`GStructure`].
#[derive(Clone, Debug)]
pub enum Carrier {
    Sym(SymCarrier),
    Slice(SliceModule),
    /// Symbolic left factor tensored with a window (used for Weil complexes
    /// of truncated basic complexes).  Odd operators act on the right factor
    /// with the Koszul sign of the left degree.
    Tensor(SymCarrier, SliceModule),
}

/// A g-module structure: differential, contractions, and Lie derivatives on
/// a carrier, for a fixed Lie algebra.
#[derive(Clone, Debug)]
pub struct GStructure {
    pub lie: Arc<LieAlgebra>,
    pub carrier: Carrier,
    cache: MatCache,
}

/// Which subspace to extract.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SubspaceKind {
    Invariant,
    Horizontal,
    Basic,
}

/// A violated commutation relation, with a witness basis element.
#[derive(Clone, Debug)]
pub struct AxiomViolation {
    pub relation: String,
    pub degree: i64,
    pub witness: String,
}

impl GStructure {
    pub fn new_sym(lie: Arc<LieAlgebra>, carrier: SymCarrier) -> Self {
        assert_eq!(lie.dim(), carrier.lie_dim());
        GStructure {
            lie,
            carrier: Carrier::Sym(carrier),
            cache: Arc::new(Mutex::new(BTreeMap::new())),
        }
    }

    pub fn new_slice(lie: Arc<LieAlgebra>, slice: SliceModule) -> Result<Self, CartanError> {
        slice.validate()?;
        if lie.dim() != slice.lie_dim() {
            return Err(CartanError::DimensionMismatch(
                "slice has the wrong number of operators".into(),
            ));
        }
        Ok(GStructure {
            lie,
            carrier: Carrier::Slice(slice),
            cache: Arc::new(Mutex::new(BTreeMap::new())),
        })
    }

    pub fn new_tensor(lie: Arc<LieAlgebra>, left: SymCarrier, right: SliceModule) -> Self {
        assert_eq!(lie.dim(), left.lie_dim());
        assert_eq!(lie.dim(), right.lie_dim());
        GStructure {
            lie,
            carrier: Carrier::Tensor(left, right),
            cache: Arc::new(Mutex::new(BTreeMap::new())),
        }
    }

    pub fn sym(&self) -> Option<&SymCarrier> {
        match &self.carrier {
            Carrier::Sym(s) => Some(s),
            _ => None,
        }
    }

    pub fn dim(&self, k: i64) -> usize {
        match &self.carrier {
            Carrier::Sym(s) => s.dim(k),
            Carrier::Slice(m) => m.dim(k),
            Carrier::Tensor(s, m) => {
                let mut total = 0;
                for q in m.min_degree..=m.max_degree() {
                    let p = k - q;
                    if p >= 0 {
                        total += s.dim(p) * m.dim(q);
                    }
                }
                total
            }
        }
    }

    pub fn labels(&self, k: i64) -> Vec<String> {
        match &self.carrier {
            Carrier::Sym(s) => s.basis(k).iter().map(|m| m.display(&s.gens)).collect(),
            Carrier::Slice(m) => {
                let i = k - m.min_degree;
                if i < 0 || i as usize >= m.labels.len() {
                    vec![]
                } else {
                    m.labels[i as usize].clone()
                }
            }
            Carrier::Tensor(s, m) => {
                let mut out = Vec::new();
                for (p, q) in self.tensor_degree_pairs(k) {
                    let left = s.basis(p);
                    let right = &m.labels[(q - m.min_degree) as usize];
                    for lm in left.iter() {
                        for rl in right {
                            out.push(format!("({})*({})", lm.display(&s.gens), rl));
                        }
                    }
                }
                out
            }
        }
    }

    /// Ordered list of (left degree, right degree) pairs contributing to the
    /// degree-`k` component of a tensor carrier.
    fn tensor_degree_pairs(&self, k: i64) -> Vec<(i64, i64)> {
        let Carrier::Tensor(s, m) = &self.carrier else {
            panic!("tensor_degree_pairs on non-tensor carrier")
        };
        let mut out = Vec::new();
        let mut p = 0i64;
        while p <= k - m.min_degree {
            let q = k - p;
            if q >= m.min_degree && q <= m.max_degree() && s.dim(p) > 0 && m.dim(q) > 0 {
                out.push((p, q));
            }
            p += 1;
        }
        out
    }

    /// Largest degree at which the carrier data is complete (symbolic
    /// carriers have no bound).
    pub fn max_complete_degree(&self) -> Option<i64> {
        match &self.carrier {
            Carrier::Sym(_) => None,
            Carrier::Slice(m) => Some(m.max_degree()),
            Carrier::Tensor(_, m) => Some(m.max_degree()),
        }
    }

    /// Matrix of a structure operator at degree `k`, or `None` when the
    /// window truncation makes it unavailable.
    pub fn op_matrix(&self, op: OpKind, k: i64) -> Option<ScalarMatrix> {
        match &self.carrier {
            Carrier::Sym(s) => {
                if k < 0 {
                    Some(ScalarMatrix::zero(s.dim(k + op.degree()), 0))
                } else {
                    Some(s.op_matrix(op, k))
                }
            }
            Carrier::Slice(m) => m.op_matrix(op, k),
            Carrier::Tensor(s, m) => {
                let (tag, idx) = op.cache_key();
                if let Some(mat) = self.cache.lock().unwrap().get(&(tag, idx, k)) {
                    return Some(mat.clone());
                }
                let mat = self.tensor_op_matrix(s, m, op, k)?;
                self.cache
                    .lock()
                    .unwrap()
                    .insert((tag, idx, k), mat.clone());
                Some(mat)
            }
        }
    }

    fn tensor_op_matrix(
        &self,
        s: &SymCarrier,
        m: &SliceModule,
        op: OpKind,
        k: i64,
    ) -> Option<ScalarMatrix> {
        let src_pairs = self.tensor_degree_pairs(k);
        let tgt_k = k + op.degree();
        let tgt_pairs = self.tensor_degree_pairs(tgt_k);
        let mut tgt_offset: BTreeMap<(i64, i64), usize> = BTreeMap::new();
        let mut acc = 0usize;
        for &(p, q) in &tgt_pairs {
            tgt_offset.insert((p, q), acc);
            acc += s.dim(p) * m.dim(q);
        }
        let rows = acc;
        let cols: usize = src_pairs.iter().map(|&(p, q)| s.dim(p) * m.dim(q)).sum();
        let mut mat = ScalarMatrix::zero(rows, cols);
        let mut col_base = 0usize;
        for &(p, q) in &src_pairs {
            let left_dim = s.dim(p);
            let right_dim = m.dim(q);
            // Left action: op on the symbolic factor, identity on the right.
            let lmat = s.op_matrix(op, p);
            let lp_t = p + op.degree();
            if lp_t >= 0 {
                if let Some(&base) = tgt_offset.get(&(lp_t, q)) {
                    for ((ri, ci), v) in lmat.iter() {
                        for j in 0..right_dim {
                            mat.add_to(base + ri * right_dim + j, col_base + ci * right_dim + j, v);
                        }
                    }
                }
            }
            // Right action with the Koszul sign (-1)^p for odd operators.
            let rmat = m.op_matrix(op, q)?;
            let rq_t = q + op.degree();
            if let Some(&base) = tgt_offset.get(&(p, rq_t)) {
                let sign_neg = op.is_odd() && p.rem_euclid(2) == 1;
                let tgt_right_dim = m.dim(rq_t);
                for ((ri, ci), v) in rmat.iter() {
                    let v = if sign_neg { v.neg() } else { v.clone() };
                    for li in 0..left_dim {
                        mat.add_to(
                            base + li * tgt_right_dim + ri,
                            col_base + li * right_dim + ci,
                            &v,
                        );
                    }
                }
            }
            col_base += left_dim * right_dim;
        }
        Some(mat)
    }

    /// Evaluate all six commutation relations on the degree window, as
    /// matrix identities on the per-degree bases (a spanning set).  The
    /// relations use the graded commutator `[A, B] = AB - (-1)^(|A||B|) BA`.
    pub fn check_axioms(&self, min_degree: i64, max_degree: i64) -> Vec<AxiomViolation> {
        let n = self.lie.dim();
        let mut violations = Vec::new();
        {
            let mut check = |rel: String, a: OpKind, b: OpKind, rhs: Vec<(Scalar, OpKind)>| {
                for k in min_degree..=max_degree {
                    let Some(mut diff) = self.commutator_matrix(a, b, k) else {
                        continue;
                    };
                    for (c, op) in &rhs {
                        let Some(mat) = self.op_matrix(*op, k) else {
                            continue;
                        };
                        diff = diff.sub(&mat.scale(c));
                    }
                    if !diff.is_zero() {
                        let labels = self.labels(k);
                        let col = diff.iter().next().map(|((_, j), _)| *j).unwrap_or(0);
                        violations.push(AxiomViolation {
                            relation: rel.clone(),
                            degree: k,
                            witness: labels.get(col).cloned().unwrap_or_default(),
                        });
                    }
                }
            };
            for i in 0..n {
                for j in i..n {
                    check(
                        format!("[iota_{},iota_{}]=0", i + 1, j + 1),
                        OpKind::Iota(i),
                        OpKind::Iota(j),
                        vec![],
                    );
                }
            }
            for i in 0..n {
                for j in i + 1..n {
                    check(
                        format!("[L_{},L_{}]=L([.,.])", i + 1, j + 1),
                        OpKind::L(i),
                        OpKind::L(j),
                        self.bracket_ops(i, j, false),
                    );
                }
            }
            check("[d,d]=0".into(), OpKind::D, OpKind::D, vec![]);
            for i in 0..n {
                check(format!("[L_{},d]=0", i + 1), OpKind::L(i), OpKind::D, vec![]);
            }
            for i in 0..n {
                check(
                    format!("[iota_{},d]=L_{}", i + 1, i + 1),
                    OpKind::Iota(i),
                    OpKind::D,
                    vec![(Scalar::one(), OpKind::L(i))],
                );
            }
            for i in 0..n {
                for j in 0..n {
                    check(
                        format!("[L_{},iota_{}]=iota([.,.])", i + 1, j + 1),
                        OpKind::L(i),
                        OpKind::Iota(j),
                        self.bracket_ops(i, j, true),
                    );
                }
            }
        }
        violations
    }

    fn bracket_ops(&self, i: usize, j: usize, iota: bool) -> Vec<(Scalar, OpKind)> {
        let n = self.lie.dim();
        let mut u = vec![Scalar::zero(); n];
        let mut v = vec![Scalar::zero(); n];
        u[i] = Scalar::one();
        v[j] = Scalar::one();
        self.lie
            .bracket(&u, &v)
            .into_iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .map(|(k, c)| {
                (
                    c,
                    if iota {
                        OpKind::Iota(k)
                    } else {
                        OpKind::L(k)
                    },
                )
            })
            .collect()
    }

    /// Graded commutator `[a, b]` as a matrix at degree `k`; `None` when the
    /// window truncation prevents forming a composite.
    pub fn commutator_matrix(&self, a: OpKind, b: OpKind, k: i64) -> Option<ScalarMatrix> {
        let b_first = self.op_matrix(b, k)?;
        let a_after = self.op_matrix(a, k + b.degree())?;
        let ab = a_after.matmul(&b_first);
        let a_first = self.op_matrix(a, k)?;
        let b_after = self.op_matrix(b, k + a.degree())?;
        let ba = b_after.matmul(&a_first);
        let sign_neg = a.is_odd() && b.is_odd();
        Some(if sign_neg { ab.add(&ba) } else { ab.sub(&ba) })
    }

    /// Exact basis of the requested subspace at one degree, as coordinate
    /// vectors in the carrier basis.
    pub fn subspace(&self, kind: SubspaceKind, k: i64) -> Vec<Vec<Scalar>> {
        let dim = self.dim(k);
        let mut stacked = ScalarMatrix::zero(0, dim);
        let want_inv = matches!(kind, SubspaceKind::Invariant | SubspaceKind::Basic);
        let want_hor = matches!(kind, SubspaceKind::Horizontal | SubspaceKind::Basic);
        for x in 0..self.lie.dim() {
            if want_inv {
                let m = self
                    .op_matrix(OpKind::L(x), k)
                    .expect("L stays inside the window");
                stacked = stacked.vstack(&m);
            }
            if want_hor {
                let m = self
                    .op_matrix(OpKind::Iota(x), k)
                    .expect("iota stays inside the window");
                stacked = stacked.vstack(&m);
            }
        }
        stacked.kernel_basis()
    }

    pub fn subspace_dim(&self, kind: SubspaceKind, k: i64) -> usize {
        self.subspace(kind, k).len()
    }

    /// Materialize the basic subcomplex on a window as an exact
    /// [`ComplexSlice`].  Fails if the differential does not preserve the
    /// basic subspace (which would indicate a truncation leak).
    pub fn basic_slice(
        &self,
        min_degree: i64,
        max_degree: i64,
    ) -> Result<ComplexSlice, CartanError> {
        let mut bases: Vec<ScalarMatrix> = Vec::new();
        let mut labels: Vec<Vec<String>> = Vec::new();
        for k in min_degree..=max_degree {
            let vecs = self.subspace(SubspaceKind::Basic, k);
            let dim = self.dim(k);
            let mut mat = ScalarMatrix::zero(dim, vecs.len());
            for (j, v) in vecs.iter().enumerate() {
                for (i, c) in v.iter().enumerate() {
                    if !c.is_zero() {
                        mat.set(i, j, c.clone());
                    }
                }
            }
            labels.push((0..vecs.len()).map(|j| format!("bas{k}_{j}")).collect());
            bases.push(mat);
        }
        let mut diffs = Vec::new();
        for (idx, k) in (min_degree..max_degree).enumerate() {
            let d = self
                .op_matrix(OpKind::D, k)
                .ok_or(CartanError::DegreeOutsideWindow(k))?;
            let image = d.matmul(&bases[idx]);
            let expressed = bases[idx + 1].solve_matrix(&image).ok_or_else(|| {
                CartanError::InvalidInput(format!(
                    "differential leaves the basic subspace at degree {k}"
                ))
            })?;
            diffs.push(expressed);
        }
        ComplexSlice::new(min_degree, labels, diffs)
    }

    /// Exact basic cohomology dimensions.  The window is extended one degree
    /// below the requested minimum so the reported degrees are interior.
    pub fn basic_cohomology(
        &self,
        min_degree: i64,
        max_degree: i64,
    ) -> Result<BTreeMap<i64, usize>, CartanError> {
        let lo = min_degree - 1;
        let slice = self.basic_slice(lo, max_degree)?;
        slice.cohomology_dims()
    }

    /// The Weil complex `W(g) (x) M` with operators extended across the
    /// tensor factor.  Its basic cohomology is the equivariant cohomology of
    /// the carrier.
    pub fn weil_complex(&self) -> GStructure {
        let w = crate::weil::weil_carrier(&self.lie);
        match &self.carrier {
            Carrier::Sym(s) => {
                let (tensor, _, _) = w.tensor(s);
                GStructure::new_sym(self.lie.clone(), tensor)
            }
            Carrier::Slice(m) => GStructure::new_tensor(self.lie.clone(), w, m.clone()),
            Carrier::Tensor(_, _) => panic!("weil_complex of a tensor carrier is not supported"),
        }
    }

    /// Materialize any carrier as a [`SliceModule`] on a window.
    pub fn to_slice(&self, min_degree: i64, max_degree: i64) -> Result<SliceModule, CartanError> {
        let len = (max_degree - min_degree + 1) as usize;
        let mut labels = Vec::with_capacity(len);
        for k in min_degree..=max_degree {
            labels.push(self.labels(k));
        }
        let mut d = Vec::new();
        for k in min_degree..max_degree {
            d.push(
                self.op_matrix(OpKind::D, k)
                    .ok_or(CartanError::DegreeOutsideWindow(k))?,
            );
        }
        let mut iota = Vec::new();
        let mut lie_ops = Vec::new();
        for x in 0..self.lie.dim() {
            let mut iv = Vec::new();
            let mut lv = Vec::new();
            for k in min_degree..=max_degree {
                let im = if k == min_degree {
                    // The window asserts nothing below it.
                    ScalarMatrix::zero(0, self.dim(k))
                } else {
                    self.op_matrix(OpKind::Iota(x), k)
                        .ok_or(CartanError::DegreeOutsideWindow(k))?
                };
                iv.push(im);
                lv.push(
                    self.op_matrix(OpKind::L(x), k)
                        .ok_or(CartanError::DegreeOutsideWindow(k))?,
                );
            }
            iota.push(iv);
            lie_ops.push(lv);
        }
        let truncated_top = self.dim(max_degree + 1) > 0;
        Ok(SliceModule {
            min_degree,
            labels,
            d,
            iota,
            lie_ops,
            truncated_top,
        })
    }

    /// For `h = k x g` presented as a product, restrict to the k-basic
    /// subcomplex, which carries a g-structure.  Returns the slice structure
    /// over `g` on the given window.
    pub fn restrict_basics(
        &self,
        g_alg: &Arc<LieAlgebra>,
        min_degree: i64,
        max_degree: i64,
    ) -> Result<GStructure, CartanError> {
        let (k_dim, g_dim) = self.lie.product_dims.ok_or_else(|| {
            CartanError::InvalidInput("restrict_basics needs a product Lie algebra".into())
        })?;
        if g_alg.dim() != g_dim {
            return Err(CartanError::DimensionMismatch(
                "g factor dimension mismatch".into(),
            ));
        }
        let k_basic = |k: i64| -> Vec<Vec<Scalar>> {
            let dim = self.dim(k);
            let mut stacked = ScalarMatrix::zero(0, dim);
            for x in 0..k_dim {
                stacked = stacked.vstack(&self.op_matrix(OpKind::L(x), k).unwrap());
                stacked = stacked.vstack(&self.op_matrix(OpKind::Iota(x), k).unwrap());
            }
            stacked.kernel_basis()
        };
        let mut bases = Vec::new();
        let mut labels = Vec::new();
        for k in min_degree..=max_degree {
            let vecs = k_basic(k);
            let mut mat = ScalarMatrix::zero(self.dim(k), vecs.len());
            for (j, v) in vecs.iter().enumerate() {
                for (i, c) in v.iter().enumerate() {
                    if !c.is_zero() {
                        mat.set(i, j, c.clone());
                    }
                }
            }
            labels.push((0..vecs.len()).map(|j| format!("kbas{k}_{j}")).collect());
            bases.push(mat);
        }
        let express =
            |idx: usize, img: &ScalarMatrix, what: &str| -> Result<ScalarMatrix, CartanError> {
                bases[idx].solve_matrix(img).ok_or_else(|| {
                    CartanError::InvalidInput(format!(
                        "{what} does not preserve the k-basic subspace"
                    ))
                })
            };
        let len = (max_degree - min_degree + 1) as usize;
        let mut d = Vec::new();
        for i in 0..len - 1 {
            let k = min_degree + i as i64;
            let full = self
                .op_matrix(OpKind::D, k)
                .ok_or(CartanError::DegreeOutsideWindow(k))?;
            d.push(express(i + 1, &full.matmul(&bases[i]), "d")?);
        }
        let mut iota = Vec::new();
        let mut lie_ops = Vec::new();
        for x in 0..g_dim {
            let mut iv = Vec::new();
            let mut lv = Vec::new();
            for i in 0..len {
                let k = min_degree + i as i64;
                let fi = self.op_matrix(OpKind::Iota(k_dim + x), k).unwrap();
                let fl = self.op_matrix(OpKind::L(k_dim + x), k).unwrap();
                if i == 0 {
                    iv.push(ScalarMatrix::zero(0, bases[i].cols));
                } else {
                    iv.push(express(i - 1, &fi.matmul(&bases[i]), "iota")?);
                }
                lv.push(express(i, &fl.matmul(&bases[i]), "L")?);
            }
            iota.push(iv);
            lie_ops.push(lv);
        }
        let slice = SliceModule {
            min_degree,
            labels,
            d,
            iota,
            lie_ops,
            truncated_top: true,
        };
        GStructure::new_slice(g_alg.clone(), slice)
    }
}

/// Morphism of g-dgm between symbolic carriers, applied as a linear map.
pub struct GMorphism {
    pub name: String,
    pub map: Box<dyn Fn(&Element) -> Element + Send + Sync>,
}

impl GMorphism {
    pub fn new<F>(name: &str, f: F) -> Self
    where
        F: Fn(&Element) -> Element + Send + Sync + 'static,
    {
        GMorphism {
            name: name.to_string(),
            map: Box::new(f),
        }
    }

    pub fn apply(&self, e: &Element) -> Element {
        (self.map)(e)
    }
}

/// Degree -1 linear map between symbolic carriers, with the claimed
/// equivariance level.
pub struct GHomotopy {
    pub name: String,
    pub map: Box<dyn Fn(&Element) -> Element + Send + Sync>,
    /// When false, only the cochain identity `[d, F] = f1 - f0` is claimed
    /// (the Koszul contraction is an example); when true the homotopy must
    /// also commute with every contraction and Lie derivative.
    pub g_equivariant: bool,
}

impl GHomotopy {
    pub fn new<F>(name: &str, g_equivariant: bool, f: F) -> Self
    where
        F: Fn(&Element) -> Element + Send + Sync + 'static,
    {
        GHomotopy {
            name: name.to_string(),
            map: Box::new(f),
            g_equivariant,
        }
    }

    pub fn apply(&self, e: &Element) -> Element {
        (self.map)(e)
    }
}

/// A failed homotopy identity with its witness.
#[derive(Clone, Debug)]
pub struct HomotopyViolation {
    pub identity: String,
    pub witness: String,
}

/// Check `[d, F] = f1 - f0` and, for g-equivariant homotopies,
/// `[iota(xi), F] = [L(xi), F] = 0`, on the given spanning sample.
pub fn verify_homotopy(
    src: &SymCarrier,
    tgt: &SymCarrier,
    homotopy: &GHomotopy,
    f0: &GMorphism,
    f1: &GMorphism,
    sample: &[Element],
) -> Vec<HomotopyViolation> {
    let mut out = Vec::new();
    for e in sample {
        // [d, F] = d F + F d (both odd).
        let lhs = tgt
            .d
            .apply(&homotopy.apply(e))
            .add(&homotopy.apply(&src.d.apply(e)));
        let rhs = f1.apply(e).sub(&f0.apply(e));
        if lhs != rhs {
            out.push(HomotopyViolation {
                identity: format!("[d,{}] = {} - {}", homotopy.name, f1.name, f0.name),
                witness: e.display(),
            });
        }
        if homotopy.g_equivariant {
            for x in 0..src.lie_dim() {
                let anti = tgt.iota[x]
                    .apply(&homotopy.apply(e))
                    .add(&homotopy.apply(&src.iota[x].apply(e)));
                if !anti.is_zero() {
                    out.push(HomotopyViolation {
                        identity: format!("[iota_{},{}] = 0", x + 1, homotopy.name),
                        witness: e.display(),
                    });
                }
                let comm = tgt.lie_ops[x]
                    .apply(&homotopy.apply(e))
                    .sub(&homotopy.apply(&src.lie_ops[x].apply(e)));
                if !comm.is_zero() {
                    out.push(HomotopyViolation {
                        identity: format!("[L_{},{}] = 0", x + 1, homotopy.name),
                        witness: e.display(),
                    });
                }
            }
        }
    }
    out
}

/// Spanning sample of all basis monomials of a symbolic carrier on a degree
/// window, as elements.
pub fn monomial_sample(carrier: &SymCarrier, min_degree: i64, max_degree: i64) -> Vec<Element> {
    let mut out = Vec::new();
    for k in min_degree.max(0)..=max_degree {
        for m in carrier.basis(k).iter() {
            out.push(Element::monomial(carrier.gens.clone(), m.clone(), Scalar::one()));
        }
    }
    out
}
