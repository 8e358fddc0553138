//! Sparse exact matrices over [`Scalar`] and the linear algebra every
//! cohomology computation reduces to: fraction-free elimination, kernel
//! bases, ranks, and cochain-complex windows.

use std::collections::BTreeMap;

use crate::error::CartanError;
use crate::scalar::Scalar;

/// Sparse matrix over the scalar field.  No zero entries are stored.
#[derive(Clone, Debug, PartialEq)]
pub struct ScalarMatrix {
    pub rows: usize,
    pub cols: usize,
    entries: BTreeMap<(usize, usize), Scalar>,
}

impl ScalarMatrix {
    pub fn zero(rows: usize, cols: usize) -> Self {
        ScalarMatrix {
            rows,
            cols,
            entries: BTreeMap::new(),
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zero(n, n);
        for i in 0..n {
            m.set(i, i, Scalar::one());
        }
        m
    }

    pub fn from_entries<I>(rows: usize, cols: usize, it: I) -> Self
    where
        I: IntoIterator<Item = (usize, usize, Scalar)>,
    {
        let mut m = Self::zero(rows, cols);
        for (i, j, v) in it {
            m.add_to(i, j, &v);
        }
        m
    }

    pub fn set(&mut self, i: usize, j: usize, v: Scalar) {
        assert!(i < self.rows && j < self.cols, "index out of range");
        if v.is_zero() {
            self.entries.remove(&(i, j));
        } else {
            self.entries.insert((i, j), v);
        }
    }

    pub fn get(&self, i: usize, j: usize) -> Scalar {
        self.entries.get(&(i, j)).cloned().unwrap_or_else(Scalar::zero)
    }

    pub fn add_to(&mut self, i: usize, j: usize, v: &Scalar) {
        if v.is_zero() {
            return;
        }
        let cur = self.get(i, j).add(v);
        self.set(i, j, cur);
    }

    pub fn iter(&self) -> impl Iterator<Item = (&(usize, usize), &Scalar)> {
        self.entries.iter()
    }

    pub fn is_zero(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn transpose(&self) -> ScalarMatrix {
        let mut m = ScalarMatrix::zero(self.cols, self.rows);
        for ((i, j), v) in &self.entries {
            m.set(*j, *i, v.clone());
        }
        m
    }

    pub fn matmul(&self, other: &ScalarMatrix) -> ScalarMatrix {
        assert_eq!(
            self.cols, other.rows,
            "matmul shapes: {}x{} * {}x{}",
            self.rows, self.cols, other.rows, other.cols
        );
        let mut out = ScalarMatrix::zero(self.rows, other.cols);
        // Group the right factor by row for the sparse product.
        let mut right_rows: BTreeMap<usize, Vec<(usize, &Scalar)>> = BTreeMap::new();
        for ((i, j), v) in &other.entries {
            right_rows.entry(*i).or_default().push((*j, v));
        }
        for ((i, k), a) in &self.entries {
            if let Some(row) = right_rows.get(k) {
                for (j, b) in row {
                    out.add_to(*i, *j, &a.mul(b));
                }
            }
        }
        out
    }

    pub fn add(&self, other: &ScalarMatrix) -> ScalarMatrix {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let mut out = self.clone();
        for ((i, j), v) in &other.entries {
            out.add_to(*i, *j, v);
        }
        out
    }

    pub fn scale(&self, c: &Scalar) -> ScalarMatrix {
        let mut out = ScalarMatrix::zero(self.rows, self.cols);
        for ((i, j), v) in &self.entries {
            out.set(*i, *j, v.mul(c));
        }
        out
    }

    pub fn neg(&self) -> ScalarMatrix {
        self.scale(&Scalar::from_int(-1))
    }

    pub fn sub(&self, other: &ScalarMatrix) -> ScalarMatrix {
        self.add(&other.neg())
    }

    /// Stack `self` on top of `other` (same column count).
    pub fn vstack(&self, other: &ScalarMatrix) -> ScalarMatrix {
        assert_eq!(self.cols, other.cols, "vstack column mismatch");
        let mut out = ScalarMatrix::zero(self.rows + other.rows, self.cols);
        for ((i, j), v) in &self.entries {
            out.set(*i, *j, v.clone());
        }
        for ((i, j), v) in &other.entries {
            out.set(self.rows + *i, *j, v.clone());
        }
        out
    }

    pub fn apply(&self, v: &[Scalar]) -> Vec<Scalar> {
        assert_eq!(v.len(), self.cols, "apply length mismatch");
        let mut out = vec![Scalar::zero(); self.rows];
        for ((i, j), a) in &self.entries {
            if !v[*j].is_zero() {
                out[*i] = out[*i].add(&a.mul(&v[*j]));
            }
        }
        out
    }

    /// Row echelon data: pivot positions plus the eliminated rows, kept
    /// sparse.
    ///
    /// The pivot rule is deterministic ("first nonzero in column order"), so
    /// reduced bases are reproducible run to run.  Rows touched by an
    /// elimination step follow the Bareiss update
    /// `row <- (pivot * row - row[col] * pivot_row) / prev`, which keeps
    /// entry growth polynomial; rows with a zero in the pivot column are
    /// left untouched, which is harmless over the rational-function field.
    fn echelon(&self) -> Echelon {
        let mut rows: Vec<BTreeMap<usize, Scalar>> = vec![BTreeMap::new(); self.rows];
        for ((i, j), v) in &self.entries {
            rows[*i].insert(*j, v.clone());
        }
        let mut pivots: Vec<(usize, usize)> = Vec::new();
        let mut prev: Option<Scalar> = None;
        let mut rank = 0usize;
        for col in 0..self.cols {
            let pivot_row = (rank..self.rows).find(|&r| rows[r].contains_key(&col));
            let Some(pr) = pivot_row else { continue };
            rows.swap(rank, pr);
            let pivot = rows[rank][&col].clone();
            let pivot_entries: Vec<(usize, Scalar)> = rows[rank]
                .iter()
                .map(|(c, v)| (*c, v.clone()))
                .collect();
            for r in rank + 1..self.rows {
                let Some(factor) = rows[r].get(&col).cloned() else {
                    continue;
                };
                let mut updated: BTreeMap<usize, Scalar> = BTreeMap::new();
                // pivot * row_r - factor * pivot_row, divided by the
                // previous pivot when one exists.
                for (c, v) in rows[r].iter() {
                    if *c == col {
                        continue;
                    }
                    updated.insert(*c, pivot.mul(v));
                }
                for (c, v) in &pivot_entries {
                    if *c == col {
                        continue;
                    }
                    let sub = factor.mul(v);
                    match updated.remove(c) {
                        Some(prev_v) => {
                            let nv = prev_v.sub(&sub);
                            if !nv.is_zero() {
                                updated.insert(*c, nv);
                            }
                        }
                        None => {
                            updated.insert(*c, sub.neg());
                        }
                    }
                }
                if let Some(p) = &prev {
                    if !p.is_one() {
                        for v in updated.values_mut() {
                            *v = v.div(p).unwrap();
                        }
                    }
                }
                rows[r] = updated;
            }
            prev = Some(pivot);
            pivots.push((rank, col));
            rank += 1;
        }
        Echelon { rows, pivots }
    }

    pub fn rank(&self) -> usize {
        self.echelon().pivots.len()
    }

    /// Exact basis of the right kernel.  Each basis vector has entry 1 at its
    /// free column and solved values at the pivot columns, so the basis is
    /// deterministic.
    pub fn kernel_basis(&self) -> Vec<Vec<Scalar>> {
        let ech = self.echelon();
        let pivot_cols: std::collections::BTreeSet<usize> =
            ech.pivots.iter().map(|&(_, c)| c).collect();
        let mut basis = Vec::new();
        for free in 0..self.cols {
            if pivot_cols.contains(&free) {
                continue;
            }
            let mut v = vec![Scalar::zero(); self.cols];
            v[free] = Scalar::one();
            // Back-substitute the pivot rows bottom-up.
            for &(row, col) in ech.pivots.iter().rev() {
                let mut acc = Scalar::zero();
                for (c, entry) in ech.rows[row].range(col + 1..) {
                    if !v[*c].is_zero() {
                        acc = acc.add(&entry.mul(&v[*c]));
                    }
                }
                if !acc.is_zero() {
                    v[col] = acc.neg().div(&ech.rows[row][&col]).unwrap();
                }
            }
            basis.push(v);
        }
        basis
    }

    /// Solve `self * x = b` exactly; `None` when inconsistent.  When the
    /// solution is not unique the free variables are set to zero.
    pub fn solve(&self, b: &[Scalar]) -> Option<Vec<Scalar>> {
        assert_eq!(b.len(), self.rows, "solve rhs length mismatch");
        // Eliminate the augmented matrix with the same deterministic rule.
        let mut aug = ScalarMatrix::zero(self.rows, self.cols + 1);
        for ((i, j), v) in &self.entries {
            aug.set(*i, *j, v.clone());
        }
        for (i, v) in b.iter().enumerate() {
            aug.set(i, self.cols, v.clone());
        }
        let ech = aug.echelon();
        // Inconsistent iff a pivot lands in the rhs column.
        if ech.pivots.iter().any(|&(_, c)| c == self.cols) {
            return None;
        }
        let mut x = vec![Scalar::zero(); self.cols];
        for &(row, col) in ech.pivots.iter().rev() {
            let mut acc = ech.rows[row]
                .get(&self.cols)
                .cloned()
                .unwrap_or_else(Scalar::zero);
            for (c, entry) in ech.rows[row].range(col + 1..) {
                if *c < self.cols && !x[*c].is_zero() {
                    acc = acc.sub(&entry.mul(&x[*c]));
                }
            }
            x[col] = acc.div(&ech.rows[row][&col]).unwrap();
        }
        Some(x)
    }

    /// Express each column of `m` in the column span of `self`; `None` if
    /// some column falls outside the span.
    pub fn solve_matrix(&self, m: &ScalarMatrix) -> Option<ScalarMatrix> {
        assert_eq!(self.rows, m.rows);
        let mut out = ScalarMatrix::zero(self.cols, m.cols);
        for j in 0..m.cols {
            let col: Vec<Scalar> = (0..m.rows).map(|i| m.get(i, j)).collect();
            let x = self.solve(&col)?;
            for (i, v) in x.into_iter().enumerate() {
                out.set(i, j, v);
            }
        }
        Some(out)
    }
}

struct Echelon {
    rows: Vec<BTreeMap<usize, Scalar>>,
    pivots: Vec<(usize, usize)>,
}

/// Finite window of a cochain complex: per-degree ordered bases and the
/// exact differentials `d_k : C^k -> C^{k+1}`.
///
/// The window covers degrees `min_degree ..= min_degree + dims.len() - 1`;
/// `differentials[k]` maps the `k`-th listed degree to the next one.  The
/// composite `d_{k+1} d_k` is checked to vanish at construction.
#[derive(Clone, Debug)]
pub struct ComplexSlice {
    pub min_degree: i64,
    pub basis_labels: Vec<Vec<String>>,
    pub differentials: Vec<ScalarMatrix>,
}

impl ComplexSlice {
    pub fn new(
        min_degree: i64,
        basis_labels: Vec<Vec<String>>,
        differentials: Vec<ScalarMatrix>,
    ) -> Result<Self, CartanError> {
        if differentials.len() + 1 != basis_labels.len() {
            return Err(CartanError::DimensionMismatch(format!(
                "{} degrees need {} differentials, got {}",
                basis_labels.len(),
                basis_labels.len() - 1,
                differentials.len()
            )));
        }
        for (k, d) in differentials.iter().enumerate() {
            if d.cols != basis_labels[k].len() || d.rows != basis_labels[k + 1].len() {
                return Err(CartanError::DimensionMismatch(format!(
                    "d at window index {} is {}x{}, bases are {} -> {}",
                    k,
                    d.rows,
                    d.cols,
                    basis_labels[k].len(),
                    basis_labels[k + 1].len()
                )));
            }
        }
        for k in 0..differentials.len().saturating_sub(1) {
            let dd = differentials[k + 1].matmul(&differentials[k]);
            if !dd.is_zero() {
                return Err(CartanError::InvalidInput(format!(
                    "d o d != 0 between window indices {} and {}",
                    k,
                    k + 2
                )));
            }
        }
        Ok(ComplexSlice {
            min_degree,
            basis_labels,
            differentials,
        })
    }

    pub fn max_degree(&self) -> i64 {
        self.min_degree + self.basis_labels.len() as i64 - 1
    }

    pub fn dim(&self, degree: i64) -> usize {
        let idx = degree - self.min_degree;
        if idx < 0 || idx as usize >= self.basis_labels.len() {
            0
        } else {
            self.basis_labels[idx as usize].len()
        }
    }

    fn diff_from(&self, degree: i64) -> Option<&ScalarMatrix> {
        let idx = degree - self.min_degree;
        if idx < 0 || idx as usize >= self.differentials.len() {
            None
        } else {
            Some(&self.differentials[idx as usize])
        }
    }

    /// Interior degrees: both `d_{k-1}` and `d_k` lie inside the window.
    pub fn interior(&self) -> std::ops::RangeInclusive<i64> {
        self.min_degree + 1..=self.max_degree() - 1
    }

    /// Exact cohomology dimension at an interior degree.
    pub fn cohomology_dim(&self, degree: i64) -> Result<usize, CartanError> {
        if !self.interior().contains(&degree) {
            return Err(CartanError::DegreeOutsideWindow(degree));
        }
        let d_out = self.diff_from(degree).unwrap();
        let d_in = self.diff_from(degree - 1).unwrap();
        let ker = d_out.cols - d_out.rank();
        let im = d_in.rank();
        Ok(ker - im)
    }

    /// Cohomology dimensions on the whole interior window.
    pub fn cohomology_dims(&self) -> Result<BTreeMap<i64, usize>, CartanError> {
        let mut out = BTreeMap::new();
        for k in self.interior() {
            out.insert(k, self.cohomology_dim(k)?);
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s(n: i64) -> Scalar {
        Scalar::from_int(n)
    }

    #[test]
    fn kernel_of_zero_and_identity() {
        let z = ScalarMatrix::zero(1, 1);
        let basis = z.kernel_basis();
        assert_eq!(basis, vec![vec![Scalar::one()]]);
        let id = ScalarMatrix::identity(3);
        assert!(id.kernel_basis().is_empty());
    }

    #[test]
    fn kernel_hand_elimination_oracle() {
        // [[1, w], [2, 2w]] has kernel spanned by [-w, 1].
        let w = Scalar::omega_pow(1);
        let m = ScalarMatrix::from_entries(
            2,
            2,
            vec![
                (0, 0, s(1)),
                (0, 1, w.clone()),
                (1, 0, s(2)),
                (1, 1, w.scale_int(2)),
            ],
        );
        let basis = m.kernel_basis();
        assert_eq!(basis.len(), 1);
        assert_eq!(basis[0], vec![w.neg(), s(1)]);
    }

    #[test]
    fn rank_nullity_holds() {
        let w = Scalar::omega_pow(1);
        let m = ScalarMatrix::from_entries(
            3,
            4,
            vec![
                (0, 0, s(1)),
                (0, 2, w.clone()),
                (1, 1, s(2)),
                (1, 3, s(5)),
                (2, 0, s(3)),
                (2, 2, w.scale_int(3)),
            ],
        );
        assert_eq!(m.rank() + m.kernel_basis().len(), m.cols);
        for v in m.kernel_basis() {
            for entry in m.apply(&v) {
                assert!(entry.is_zero());
            }
        }
    }

    #[test]
    fn solve_roundtrip() {
        let m = ScalarMatrix::from_entries(
            2,
            2,
            vec![(0, 0, s(2)), (0, 1, s(1)), (1, 1, s(3))],
        );
        let b = vec![s(5), s(9)];
        let x = m.solve(&b).unwrap();
        assert_eq!(m.apply(&x), b);
        // Inconsistent system.
        let singular =
            ScalarMatrix::from_entries(2, 1, vec![(0, 0, s(1)), (1, 0, s(2))]);
        assert!(singular.solve(&[s(1), s(3)]).is_none());
    }

    #[test]
    fn slice_rejects_nonzero_dd() {
        let d0 = ScalarMatrix::from_entries(1, 1, vec![(0, 0, s(1))]);
        let d1 = ScalarMatrix::from_entries(1, 1, vec![(0, 0, s(1))]);
        let err = ComplexSlice::new(
            0,
            vec![vec!["a".into()], vec!["b".into()], vec!["c".into()]],
            vec![d0, d1],
        );
        assert!(err.is_err());
    }

    #[test]
    fn cohomology_of_small_complexes() {
        // Zero differentials, dims (1, 1, 1): interior H^1 = 1.
        let slice = ComplexSlice::new(
            0,
            vec![vec!["a".into()], vec!["b".into()], vec!["c".into()]],
            vec![ScalarMatrix::zero(1, 1), ScalarMatrix::zero(1, 1)],
        )
        .unwrap();
        assert_eq!(slice.cohomology_dim(1).unwrap(), 1);
        assert!(slice.cohomology_dim(0).is_err());

        // d : C^0 -> C^1 the identity, zero afterwards: interior H^1 = 0.
        let slice = ComplexSlice::new(
            0,
            vec![vec!["x".into()], vec!["dx".into()], vec![]],
            vec![ScalarMatrix::identity(1), ScalarMatrix::zero(0, 1)],
        )
        .unwrap();
        assert_eq!(slice.cohomology_dim(1).unwrap(), 0);
    }
}
