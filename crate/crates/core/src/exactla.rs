//! Dense exact linear algebra over prime fields GF(p).
//!
//! Every continuous linear map between finite-dimensional discrete spaces
//! in this crate is a [`Matrix`]. Arithmetic is exact and all choices
//! (pivots, free variables, complements) are made lexicographically, so two
//! runs on the same input always produce identical output.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LinAlgError {
    #[error("modulus {0} is not a prime")]
    NotPrime(u32),
    #[error("field mismatch: GF({left}) vs GF({right})")]
    FieldMismatch { left: u32, right: u32 },
    #[error("shape mismatch in {op}: {left:?} vs {right:?}")]
    ShapeMismatch {
        op: &'static str,
        left: (usize, usize),
        right: (usize, usize),
    },
    #[error("entries length {len} does not match {rows}x{cols}")]
    BadEntries { rows: usize, cols: usize, len: usize },
    #[error("columns are linearly dependent")]
    DependentColumns,
    #[error("map is not surjective (rank {rank} < {rows} rows)")]
    NotSurjective { rank: usize, rows: usize },
    #[error("matrix is not invertible")]
    NotInvertible,
}

pub type Result<T> = std::result::Result<T, LinAlgError>;

/// The prime field GF(p).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Field {
    p: u32,
}

impl Field {
    pub fn new(p: u32) -> Result<Self> {
        if !is_prime(p) {
            return Err(LinAlgError::NotPrime(p));
        }
        Ok(Self { p })
    }

    pub fn p(self) -> u32 {
        self.p
    }

    /// Reduces an arbitrary integer to its residue in `[0, p)`.
    pub fn reduce(self, x: i64) -> u32 {
        x.rem_euclid(self.p as i64) as u32
    }

    #[inline]
    pub fn add(self, a: u32, b: u32) -> u32 {
        ((a as u64 + b as u64) % self.p as u64) as u32
    }

    #[inline]
    pub fn sub(self, a: u32, b: u32) -> u32 {
        ((a as u64 + self.p as u64 - b as u64) % self.p as u64) as u32
    }

    #[inline]
    pub fn mul(self, a: u32, b: u32) -> u32 {
        ((a as u64 * b as u64) % self.p as u64) as u32
    }

    #[inline]
    pub fn neg(self, a: u32) -> u32 {
        if a == 0 {
            0
        } else {
            self.p - a
        }
    }

    /// Multiplicative inverse; `a` must be nonzero.
    pub fn inv(self, a: u32) -> u32 {
        assert!(!a.is_multiple_of(self.p), "inverse of zero in GF({})", self.p);
        let (mut t, mut new_t) = (0i64, 1i64);
        let (mut r, mut new_r) = (self.p as i64, a as i64);
        while new_r != 0 {
            let q = r / new_r;
            (t, new_t) = (new_t, t - q * new_t);
            (r, new_r) = (new_r, r - q * new_r);
        }
        self.reduce(t)
    }
}

fn is_prime(p: u32) -> bool {
    if p < 2 {
        return false;
    }
    let mut d = 2u64;
    while d * d <= p as u64 {
        if (p as u64).is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

/// Dense row-major matrix with entries in GF(p).
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Matrix {
    field: Field,
    rows: usize,
    cols: usize,
    data: Vec<u32>,
}

impl fmt::Debug for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Matrix[GF({}) {}x{}] ", self.field.p, self.rows, self.cols)?;
        let rows: Vec<&[u32]> = (0..self.rows).map(|i| self.row(i)).collect();
        write!(f, "{rows:?}")
    }
}

/// Serializes as `{"rows","cols","entries"}` with row-major entries; the
/// field is carried by the enclosing document.
impl Serialize for Matrix {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut st = s.serialize_struct("Matrix", 3)?;
        st.serialize_field("rows", &self.rows)?;
        st.serialize_field("cols", &self.cols)?;
        st.serialize_field("entries", &self.data)?;
        st.end()
    }
}

/// Result of Gauss-Jordan elimination.
#[derive(Debug, Clone)]
pub struct Rref {
    pub matrix: Matrix,
    pub pivots: Vec<usize>,
}

impl Matrix {
    pub fn zeros(field: Field, rows: usize, cols: usize) -> Self {
        Self {
            field,
            rows,
            cols,
            data: vec![0; rows * cols],
        }
    }

    pub fn identity(field: Field, n: usize) -> Self {
        let mut m = Self::zeros(field, n, n);
        for i in 0..n {
            m.data[i * n + i] = 1;
        }
        m
    }

    /// Builds a matrix from row-major integers, reducing each mod p.
    pub fn from_entries(field: Field, rows: usize, cols: usize, entries: &[i64]) -> Result<Self> {
        if entries.len() != rows * cols {
            return Err(LinAlgError::BadEntries {
                rows,
                cols,
                len: entries.len(),
            });
        }
        Ok(Self {
            field,
            rows,
            cols,
            data: entries.iter().map(|&x| field.reduce(x)).collect(),
        })
    }

    /// Builds a matrix from nested rows. Panics on ragged input.
    pub fn from_rows<R: AsRef<[i64]>>(field: Field, rows: &[R]) -> Self {
        let cols = rows.first().map_or(0, |r| r.as_ref().len());
        let mut data = Vec::with_capacity(rows.len() * cols);
        for r in rows {
            assert_eq!(r.as_ref().len(), cols, "ragged rows");
            data.extend(r.as_ref().iter().map(|&x| field.reduce(x)));
        }
        Self {
            field,
            rows: rows.len(),
            cols,
            data,
        }
    }

    /// A single column vector.
    pub fn column_vector(field: Field, entries: &[i64]) -> Self {
        Self {
            field,
            rows: entries.len(),
            cols: 1,
            data: entries.iter().map(|&x| field.reduce(x)).collect(),
        }
    }

    /// Standard basis vector `e_i` (0-based) of `k^n` as a column.
    pub fn unit(field: Field, n: usize, i: usize) -> Self {
        let mut m = Self::zeros(field, n, 1);
        m.data[i] = 1;
        m
    }

    pub fn field(&self) -> Field {
        self.field
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn entries(&self) -> &[u32] {
        &self.data
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> u32 {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: u32) {
        self.data[i * self.cols + j] = v % self.field.p;
    }

    pub fn row(&self, i: usize) -> &[u32] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|&x| x == 0)
    }

    pub fn is_identity(&self) -> bool {
        self.rows == self.cols && *self == Self::identity(self.field, self.rows)
    }

    fn check_field(&self, other: &Self) -> Result<()> {
        if self.field != other.field {
            return Err(LinAlgError::FieldMismatch {
                left: self.field.p,
                right: other.field.p,
            });
        }
        Ok(())
    }

    pub fn mul(&self, rhs: &Self) -> Result<Self> {
        self.check_field(rhs)?;
        if self.cols != rhs.rows {
            return Err(LinAlgError::ShapeMismatch {
                op: "mul",
                left: self.shape(),
                right: rhs.shape(),
            });
        }
        let p = self.field.p as u64;
        let mut out = Self::zeros(self.field, self.rows, rhs.cols);
        let mut acc = vec![0u64; rhs.cols];
        for i in 0..self.rows {
            acc.iter_mut().for_each(|a| *a = 0);
            for k in 0..self.cols {
                let a = self.data[i * self.cols + k] as u64;
                if a == 0 {
                    continue;
                }
                let rrow = rhs.row(k);
                for (slot, &b) in acc.iter_mut().zip(rrow) {
                    *slot = (*slot + a * b as u64) % p;
                }
            }
            for (j, &v) in acc.iter().enumerate() {
                out.data[i * rhs.cols + j] = v as u32;
            }
        }
        Ok(out)
    }

    fn zip_with(&self, rhs: &Self, op: &'static str, f: impl Fn(u32, u32) -> u32) -> Result<Self> {
        self.check_field(rhs)?;
        if self.shape() != rhs.shape() {
            return Err(LinAlgError::ShapeMismatch {
                op,
                left: self.shape(),
                right: rhs.shape(),
            });
        }
        Ok(Self {
            field: self.field,
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(&a, &b)| f(a, b)).collect(),
        })
    }

    pub fn add(&self, rhs: &Self) -> Result<Self> {
        let fld = self.field;
        self.zip_with(rhs, "add", |a, b| fld.add(a, b))
    }

    pub fn sub(&self, rhs: &Self) -> Result<Self> {
        let fld = self.field;
        self.zip_with(rhs, "sub", |a, b| fld.sub(a, b))
    }

    pub fn neg(&self) -> Self {
        let fld = self.field;
        Self {
            data: self.data.iter().map(|&a| fld.neg(a)).collect(),
            ..self.clone()
        }
    }

    pub fn scale(&self, c: u32) -> Self {
        let fld = self.field;
        Self {
            data: self.data.iter().map(|&a| fld.mul(a, c)).collect(),
            ..self.clone()
        }
    }

    pub fn transpose(&self) -> Self {
        let mut out = Self::zeros(self.field, self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out.data[j * self.rows + i] = self.data[i * self.cols + j];
            }
        }
        out
    }

    /// Horizontal concatenation `[self | rhs]`.
    pub fn hstack(&self, rhs: &Self) -> Result<Self> {
        self.check_field(rhs)?;
        if self.rows != rhs.rows {
            return Err(LinAlgError::ShapeMismatch {
                op: "hstack",
                left: self.shape(),
                right: rhs.shape(),
            });
        }
        let cols = self.cols + rhs.cols;
        let mut out = Self::zeros(self.field, self.rows, cols);
        for i in 0..self.rows {
            out.data[i * cols..i * cols + self.cols].copy_from_slice(self.row(i));
            out.data[i * cols + self.cols..(i + 1) * cols].copy_from_slice(rhs.row(i));
        }
        Ok(out)
    }

    /// Vertical concatenation.
    pub fn vstack(&self, rhs: &Self) -> Result<Self> {
        self.check_field(rhs)?;
        if self.cols != rhs.cols {
            return Err(LinAlgError::ShapeMismatch {
                op: "vstack",
                left: self.shape(),
                right: rhs.shape(),
            });
        }
        let mut data = self.data.clone();
        data.extend_from_slice(&rhs.data);
        Ok(Self {
            field: self.field,
            rows: self.rows + rhs.rows,
            cols: self.cols,
            data,
        })
    }

    /// Block diagonal `[[self, 0], [0, rhs]]`.
    pub fn block_diag(&self, rhs: &Self) -> Result<Self> {
        self.check_field(rhs)?;
        let mut out = Self::zeros(self.field, self.rows + rhs.rows, self.cols + rhs.cols);
        out.write_block(0, 0, self);
        out.write_block(self.rows, self.cols, rhs);
        Ok(out)
    }

    pub(crate) fn write_block(&mut self, r0: usize, c0: usize, block: &Self) {
        for i in 0..block.rows {
            for j in 0..block.cols {
                self.data[(r0 + i) * self.cols + c0 + j] = block.get(i, j);
            }
        }
    }

    /// Rows `r0..r1`, columns `c0..c1`.
    pub fn submatrix(&self, r0: usize, r1: usize, c0: usize, c1: usize) -> Self {
        let mut out = Self::zeros(self.field, r1 - r0, c1 - c0);
        for i in r0..r1 {
            for j in c0..c1 {
                out.data[(i - r0) * (c1 - c0) + (j - c0)] = self.get(i, j);
            }
        }
        out
    }

    pub fn select_columns(&self, idx: &[usize]) -> Self {
        let mut out = Self::zeros(self.field, self.rows, idx.len());
        for i in 0..self.rows {
            for (k, &j) in idx.iter().enumerate() {
                out.data[i * idx.len() + k] = self.get(i, j);
            }
        }
        out
    }

    pub fn column(&self, j: usize) -> Self {
        self.select_columns(&[j])
    }

    /// Reduced row echelon form; pivots chosen as the first nonzero entry
    /// at or below the current row.
    pub fn rref(&self) -> Rref {
        let fld = self.field;
        let mut m = self.clone();
        let mut pivots = Vec::new();
        let mut row = 0;
        for col in 0..m.cols {
            if row == m.rows {
                break;
            }
            let Some(pr) = (row..m.rows).find(|&r| m.get(r, col) != 0) else {
                continue;
            };
            if pr != row {
                for j in 0..m.cols {
                    m.data.swap(pr * m.cols + j, row * m.cols + j);
                }
            }
            let inv = fld.inv(m.get(row, col));
            for j in col..m.cols {
                let v = fld.mul(m.get(row, j), inv);
                m.data[row * m.cols + j] = v;
            }
            for r in 0..m.rows {
                if r == row {
                    continue;
                }
                let factor = m.get(r, col);
                if factor == 0 {
                    continue;
                }
                for j in col..m.cols {
                    let v = fld.sub(m.get(r, j), fld.mul(factor, m.get(row, j)));
                    m.data[r * m.cols + j] = v;
                }
            }
            pivots.push(col);
            row += 1;
        }
        Rref { matrix: m, pivots }
    }

    pub fn rank(&self) -> usize {
        self.rref().pivots.len()
    }

    pub fn is_invertible(&self) -> bool {
        self.rows == self.cols && self.rank() == self.rows
    }

    pub fn inverse(&self) -> Result<Self> {
        if self.rows != self.cols {
            return Err(LinAlgError::NotInvertible);
        }
        let n = self.rows;
        let aug = self.hstack(&Self::identity(self.field, n))?;
        let r = aug.rref();
        if r.pivots.len() < n || r.pivots.iter().take(n).enumerate().any(|(i, &p)| p != i) {
            return Err(LinAlgError::NotInvertible);
        }
        Ok(r.matrix.submatrix(0, n, n, 2 * n))
    }

    /// Kronecker product with basis order `e_i ⊗ e_j`, left factor major.
    pub fn kron(&self, rhs: &Self) -> Result<Self> {
        self.check_field(rhs)?;
        let fld = self.field;
        let (rows, cols) = (self.rows * rhs.rows, self.cols * rhs.cols);
        let mut out = Self::zeros(fld, rows, cols);
        for i1 in 0..self.rows {
            for j1 in 0..self.cols {
                let a = self.get(i1, j1);
                if a == 0 {
                    continue;
                }
                for i2 in 0..rhs.rows {
                    for j2 in 0..rhs.cols {
                        let r = i1 * rhs.rows + i2;
                        let c = j1 * rhs.cols + j2;
                        out.data[r * cols + c] = fld.mul(a, rhs.get(i2, j2));
                    }
                }
            }
        }
        Ok(out)
    }
}

/// Solves `M X = B`, returning the solution with every free variable set
/// to zero, or `None` when the system is inconsistent.
pub fn solve_linear(m: &Matrix, b: &Matrix) -> Result<Option<Matrix>> {
    if m.rows != b.rows {
        return Err(LinAlgError::ShapeMismatch {
            op: "solve_linear",
            left: m.shape(),
            right: b.shape(),
        });
    }
    let aug = m.hstack(b)?;
    let Rref { matrix: r, pivots } = aug.rref();
    if pivots.iter().any(|&p| p >= m.cols) {
        return Ok(None);
    }
    let mut x = Matrix::zeros(m.field, m.cols, b.cols);
    for (row, &pc) in pivots.iter().enumerate() {
        for j in 0..b.cols {
            x.data[pc * b.cols + j] = r.get(row, m.cols + j);
        }
    }
    Ok(Some(x))
}

/// Which subspace [`subspace_basis`] should produce.
#[derive(Debug, Clone, Copy)]
pub enum SubspaceMode<'a> {
    Kernel,
    Image,
    /// Complement of the column span of the given matrix inside `k^rows`.
    Complement(&'a Matrix),
}

/// Basis of a subspace, returned as the columns of a matrix.
///
/// * `Kernel`: one vector per free column of `rref(m)`, with that free
///   variable set to 1 and the others to 0.
/// * `Image`: the pivot columns of `m`.
/// * `Complement(s)`: greedy completion of the (independent) columns of `s`
///   by `e_1, e_2, ...` in index order, skipping vectors already in the span.
///   The argument `m` is ignored in this mode.
pub fn subspace_basis(m: &Matrix, mode: SubspaceMode<'_>) -> Result<Matrix> {
    match mode {
        SubspaceMode::Kernel => Ok(kernel(m)),
        SubspaceMode::Image => Ok(image(m)),
        SubspaceMode::Complement(s) => complement(s),
    }
}

pub fn kernel(m: &Matrix) -> Matrix {
    let Rref { matrix: r, pivots } = m.rref();
    let fld = m.field;
    let free: Vec<usize> = (0..m.cols).filter(|c| !pivots.contains(c)).collect();
    let mut k = Matrix::zeros(fld, m.cols, free.len());
    for (idx, &fc) in free.iter().enumerate() {
        k.data[fc * free.len() + idx] = 1;
        for (row, &pc) in pivots.iter().enumerate() {
            k.data[pc * free.len() + idx] = fld.neg(r.get(row, fc));
        }
    }
    k
}

pub fn image(m: &Matrix) -> Matrix {
    let pivots = m.rref().pivots;
    m.select_columns(&pivots)
}

/// Greedy complement of the independent columns of `s` in `k^{s.rows()}`.
pub fn complement(s: &Matrix) -> Result<Matrix> {
    if s.rank() != s.cols {
        return Err(LinAlgError::DependentColumns);
    }
    let n = s.rows;
    let mut span = s.clone();
    let mut rank = s.cols;
    let mut chosen = Vec::new();
    for i in 0..n {
        if rank == n {
            break;
        }
        let cand = span.hstack(&Matrix::unit(s.field, n, i))?;
        let r = cand.rank();
        if r > rank {
            span = cand;
            rank = r;
            chosen.push(i);
        }
    }
    let mut out = Matrix::zeros(s.field, n, chosen.len());
    for (k, &i) in chosen.iter().enumerate() {
        out.data[i * chosen.len() + k] = 1;
    }
    Ok(out)
}

/// Factors `alpha: S -> Y` through a surjection `f: X -> Y`, returning the
/// canonical `theta` with `f theta = alpha`.
pub fn factor_through(f: &Matrix, alpha: &Matrix) -> Result<Matrix> {
    let rank = f.rank();
    if rank < f.rows {
        return Err(LinAlgError::NotSurjective { rank, rows: f.rows });
    }
    Ok(solve_linear(f, alpha)?.expect("surjective systems are consistent"))
}

pub fn kron(a: &Matrix, b: &Matrix) -> Result<Matrix> {
    a.kron(b)
}

/// Column span of `a` intersected with column span of `b` (both in the same
/// ambient space); returns a basis as columns.
pub fn intersect(a: &Matrix, b: &Matrix) -> Result<Matrix> {
    // x in span(a) ∩ span(b) iff a u = b v, i.e. [a | -b](u, v) = 0.
    let joined = a.hstack(&b.neg())?;
    let k = kernel(&joined);
    let u = k.submatrix(0, a.cols, 0, k.cols);
    let vecs = a.mul(&u)?;
    Ok(image(&vecs))
}

/// Whether every column of `sub` lies in the column span of `sup`.
pub fn span_contains(sup: &Matrix, sub: &Matrix) -> Result<bool> {
    if sub.cols == 0 {
        return Ok(true);
    }
    let joined = sup.hstack(sub)?;
    Ok(joined.rank() == sup.rank())
}

/// Whether two column spans coincide.
pub fn same_span(a: &Matrix, b: &Matrix) -> Result<bool> {
    Ok(span_contains(a, b)? && span_contains(b, a)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gf(p: u32) -> Field {
        Field::new(p).unwrap()
    }

    #[test]
    fn field_rejects_composites() {
        assert_eq!(Field::new(4), Err(LinAlgError::NotPrime(4)));
        assert_eq!(Field::new(1), Err(LinAlgError::NotPrime(1)));
        assert!(Field::new(101).is_ok());
    }

    #[test]
    fn inverses() {
        for p in [2, 3, 5, 7, 101] {
            let f = gf(p);
            for a in 1..p {
                assert_eq!(f.mul(a, f.inv(a)), 1);
            }
        }
    }

    #[test]
    fn solve_examples() {
        let f2 = gf(2);
        let m = Matrix::from_rows(f2, &[[1, 1]]);
        let b = Matrix::from_rows(f2, &[[1]]);
        let x = solve_linear(&m, &b).unwrap().unwrap();
        assert_eq!(x, Matrix::from_rows(f2, &[[1], [0]]));

        let m = Matrix::identity(f2, 2);
        let b = Matrix::from_rows(f2, &[[1], [0]]);
        assert_eq!(solve_linear(&m, &b).unwrap().unwrap(), b);

        let m = Matrix::from_rows(f2, &[[1, 1], [1, 1]]);
        let b = Matrix::from_rows(f2, &[[1], [0]]);
        assert_eq!(solve_linear(&m, &b).unwrap(), None);
    }

    #[test]
    fn solve_errors() {
        let m = Matrix::identity(gf(2), 2);
        let b = Matrix::zeros(gf(2), 3, 1);
        assert!(matches!(solve_linear(&m, &b), Err(LinAlgError::ShapeMismatch { .. })));
        let b = Matrix::zeros(gf(3), 2, 1);
        assert!(matches!(solve_linear(&m, &b), Err(LinAlgError::FieldMismatch { .. })));
    }

    #[test]
    fn subspace_examples() {
        let f2 = gf(2);
        let k = subspace_basis(&Matrix::from_rows(f2, &[[1, 1]]), SubspaceMode::Kernel).unwrap();
        assert_eq!(k, Matrix::from_rows(f2, &[[1], [1]]));

        // Greedy rule: e1 is tested first and is outside span{(1,1,0),(0,0,1)}.
        let s = Matrix::from_rows(f2, &[[1, 0], [1, 0], [0, 1]]);
        let c = subspace_basis(&s, SubspaceMode::Complement(&s)).unwrap();
        assert_eq!(c, Matrix::from_rows(f2, &[[1], [0], [0]]));

        let f5 = gf(5);
        let im = subspace_basis(&Matrix::from_rows(f5, &[[2, 4], [1, 2]]), SubspaceMode::Image).unwrap();
        assert_eq!(im, Matrix::from_rows(f5, &[[2], [1]]));
    }

    #[test]
    fn complement_rejects_dependent_columns() {
        let f2 = gf(2);
        let s = Matrix::from_rows(f2, &[[1, 1], [0, 0]]);
        assert_eq!(complement(&s), Err(LinAlgError::DependentColumns));
    }

    #[test]
    fn factor_examples() {
        let f2 = gf(2);
        let theta = factor_through(&Matrix::from_rows(f2, &[[1, 1]]), &Matrix::from_rows(f2, &[[1]])).unwrap();
        assert_eq!(theta, Matrix::from_rows(f2, &[[1], [0]]));

        let alpha = Matrix::from_rows(f2, &[[1, 0, 1], [0, 1, 1]]);
        assert_eq!(factor_through(&Matrix::identity(f2, 2), &alpha).unwrap(), alpha);

        let f3 = gf(3);
        let f = Matrix::from_rows(f3, &[[1, 0, 2]]);
        let theta = factor_through(&f, &Matrix::from_rows(f3, &[[2]])).unwrap();
        assert_eq!(theta, Matrix::from_rows(f3, &[[2], [0], [0]]));
        assert_eq!(f.mul(&theta).unwrap(), Matrix::from_rows(f3, &[[2]]));

        let not_onto = Matrix::from_rows(f2, &[[1, 1], [1, 1]]);
        assert!(matches!(
            factor_through(&not_onto, &Matrix::zeros(f2, 2, 1)),
            Err(LinAlgError::NotSurjective { .. })
        ));
    }

    #[test]
    fn kron_examples() {
        let f2 = gf(2);
        let k = kron(&Matrix::from_rows(f2, &[[1, 1]]), &Matrix::identity(f2, 2)).unwrap();
        assert_eq!(k, Matrix::from_rows(f2, &[[1, 0, 1, 0], [0, 1, 0, 1]]));
        let one = Matrix::from_rows(f2, &[[1]]);
        assert_eq!(kron(&one, &one).unwrap(), one);
        let f3 = gf(3);
        let two = Matrix::from_rows(f3, &[[2]]);
        assert_eq!(kron(&two, &two).unwrap(), Matrix::from_rows(f3, &[[1]]));
    }

    #[test]
    fn inverse_roundtrip() {
        let f5 = gf(5);
        let a = Matrix::from_rows(f5, &[[1, 2], [3, 4]]);
        let inv = a.inverse().unwrap();
        assert!(a.mul(&inv).unwrap().is_identity());
        let sing = Matrix::from_rows(f5, &[[1, 2], [2, 4]]);
        assert_eq!(sing.inverse(), Err(LinAlgError::NotInvertible));
        assert!(Matrix::identity(f5, 0).inverse().unwrap().is_identity());
    }

    #[test]
    fn intersection_of_planes() {
        let f2 = gf(2);
        let a = Matrix::from_rows(f2, &[[1, 0], [0, 1], [0, 0]]);
        let b = Matrix::from_rows(f2, &[[0, 0], [1, 0], [0, 1]]);
        let i = intersect(&a, &b).unwrap();
        assert_eq!(i.cols(), 1);
        assert!(same_span(&i, &Matrix::from_rows(f2, &[[0], [1], [0]])).unwrap());
    }
}
