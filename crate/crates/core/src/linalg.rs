//! Dense matrices and canonical row spaces over GF(2^e).
//!
//! Vectors are rows throughout. A [`Subspace`] is stored as its reduced row
//! echelon basis with zero rows dropped, so two subspaces are equal exactly
//! when their bases are entry-for-entry identical.

use std::cmp::Ordering;
use std::fmt;
use std::hash::{Hash, Hasher};

use crate::error::{Error, Result};
use crate::field::{Fe, FieldSpec};

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Mat {
    rows: usize,
    cols: usize,
    data: Vec<Fe>,
}

impl Mat {
    pub fn new(rows: usize, cols: usize, data: Vec<Fe>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch {
                expected: rows * cols,
                found: data.len(),
            });
        }
        Ok(Self { rows, cols, data })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![Fe::ZERO; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, Fe::ONE);
        }
        m
    }

    /// Builds a matrix from row vectors, each of length `cols`.
    pub fn from_rows<R: AsRef<[Fe]>>(cols: usize, rows: &[R]) -> Result<Self> {
        let mut data = Vec::with_capacity(rows.len() * cols);
        for r in rows {
            let r = r.as_ref();
            if r.len() != cols {
                return Err(Error::DimensionMismatch {
                    expected: cols,
                    found: r.len(),
                });
            }
            data.extend_from_slice(r);
        }
        Ok(Self {
            rows: rows.len(),
            cols,
            data,
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn data(&self) -> &[Fe] {
        &self.data
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> Fe {
        self.data[r * self.cols + c]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: Fe) {
        self.data[r * self.cols + c] = v;
    }

    #[inline]
    pub fn row(&self, r: usize) -> &[Fe] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn row_iter(&self) -> impl Iterator<Item = &[Fe]> {
        // chunks_exact(0) panics, so special-case zero-width matrices.
        let width = self.cols.max(1);
        self.data.chunks_exact(width).take(if self.cols == 0 { 0 } else { self.rows })
    }

    pub fn transpose(&self) -> Mat {
        let mut t = Mat::zeros(self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                t.set(c, r, self.get(r, c));
            }
        }
        t
    }

    pub fn mul(&self, f: &FieldSpec, rhs: &Mat) -> Result<Mat> {
        if self.cols != rhs.rows {
            return Err(Error::DimensionMismatch {
                expected: self.cols,
                found: rhs.rows,
            });
        }
        let mut out = Mat::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..rhs.cols {
                    let v = f.add(out.get(i, j), f.mul(a, rhs.get(k, j)));
                    out.set(i, j, v);
                }
            }
        }
        Ok(out)
    }

    /// Vertical concatenation.
    pub fn stack(&self, below: &Mat) -> Result<Mat> {
        if self.cols != below.cols {
            return Err(Error::DimensionMismatch {
                expected: self.cols,
                found: below.cols,
            });
        }
        let mut data = self.data.clone();
        data.extend_from_slice(&below.data);
        Ok(Mat {
            rows: self.rows + below.rows,
            cols: self.cols,
            data,
        })
    }

    pub fn is_symmetric(&self) -> bool {
        self.rows == self.cols
            && (0..self.rows).all(|i| (0..i).all(|j| self.get(i, j) == self.get(j, i)))
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for c in 0..self.cols {
            self.data.swap(a * self.cols + c, b * self.cols + c);
        }
    }

    /// row[dst] += factor * row[src]
    fn axpy_row(&mut self, f: &FieldSpec, dst: usize, src: usize, factor: Fe) {
        for c in 0..self.cols {
            let s = self.data[src * self.cols + c];
            if !s.is_zero() {
                let d = &mut self.data[dst * self.cols + c];
                *d = f.add(*d, f.mul(factor, s));
            }
        }
    }

    fn scale_row(&mut self, f: &FieldSpec, r: usize, factor: Fe) {
        for c in 0..self.cols {
            let d = &mut self.data[r * self.cols + c];
            *d = f.mul(*d, factor);
        }
    }
}

impl fmt::Display for Mat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for r in self.row_iter() {
            let cells: Vec<String> = r.iter().map(|x| x.to_string()).collect();
            writeln!(f, "[{}]", cells.join(" "))?;
        }
        Ok(())
    }
}

/// Reduced row echelon form and rank. Zero rows end up at the bottom.
pub fn rref(f: &FieldSpec, m: &Mat) -> (Mat, usize) {
    let mut a = m.clone();
    let rank = rref_in_place(f, &mut a);
    (a, rank)
}

fn rref_in_place(f: &FieldSpec, a: &mut Mat) -> usize {
    let mut rank = 0;
    for col in 0..a.cols {
        if rank == a.rows {
            break;
        }
        let Some(p) = (rank..a.rows).find(|&r| !a.get(r, col).is_zero()) else {
            continue;
        };
        a.swap_rows(p, rank);
        let lead = a.get(rank, col);
        if lead != Fe::ONE {
            let inv = f.inv(lead).expect("pivot is nonzero");
            a.scale_row(f, rank, inv);
        }
        for r in 0..a.rows {
            if r != rank {
                let factor = a.get(r, col);
                if !factor.is_zero() {
                    // characteristic 2: subtracting is adding
                    a.axpy_row(f, r, rank, factor);
                }
            }
        }
        rank += 1;
    }
    rank
}

pub fn rank(f: &FieldSpec, m: &Mat) -> usize {
    rref(f, m).1
}

/// Basis (as rows) of the right kernel `{x : M x^T = 0}`, in canonical form.
pub fn null_space(f: &FieldSpec, m: &Mat) -> Mat {
    let (r, rank) = rref(f, m);
    let pivots = pivot_columns(&r, rank);
    let mut basis = Vec::new();
    for free in (0..m.cols).filter(|c| !pivots.contains(c)) {
        let mut v = vec![Fe::ZERO; m.cols];
        v[free] = Fe::ONE;
        for (i, &p) in pivots.iter().enumerate() {
            // x_p = -R[i][free] = R[i][free] in characteristic 2
            v[p] = r.get(i, free);
        }
        basis.push(v);
    }
    let k = Mat::from_rows(m.cols, &basis).expect("rows have ambient width");
    rref_nonzero(f, &k)
}

fn pivot_columns(r: &Mat, rank: usize) -> Vec<usize> {
    (0..rank)
        .map(|i| {
            (0..r.cols)
                .find(|&c| !r.get(i, c).is_zero())
                .expect("nonzero row above rank")
        })
        .collect()
}

fn rref_nonzero(f: &FieldSpec, m: &Mat) -> Mat {
    let (mut r, rank) = rref(f, m);
    r.rows = rank;
    r.data.truncate(rank * r.cols);
    r
}

/// Standard basis vector `e_i` (0-indexed) of length `n`.
pub fn unit(n: usize, i: usize) -> Vec<Fe> {
    let mut v = vec![Fe::ZERO; n];
    v[i] = Fe::ONE;
    v
}

/// A subspace of F_q^n held as its canonical (RREF, no zero rows) basis.
#[derive(Clone, Debug)]
pub struct Subspace {
    ambient: usize,
    basis: Mat,
    pivots: Vec<usize>,
}

impl PartialEq for Subspace {
    fn eq(&self, other: &Self) -> bool {
        self.ambient == other.ambient && self.basis.data == other.basis.data
    }
}

impl Eq for Subspace {}

impl Hash for Subspace {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.ambient.hash(state);
        self.basis.data.hash(state);
    }
}

impl Ord for Subspace {
    /// Lexicographic on the flattened canonical basis.
    fn cmp(&self, other: &Self) -> Ordering {
        self.ambient
            .cmp(&other.ambient)
            .then_with(|| self.basis.data.cmp(&other.basis.data))
    }
}

impl PartialOrd for Subspace {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Subspace {
    pub fn zero(ambient: usize) -> Self {
        Self {
            ambient,
            basis: Mat::zeros(0, ambient),
            pivots: Vec::new(),
        }
    }

    pub fn full(ambient: usize) -> Self {
        Self {
            ambient,
            basis: Mat::identity(ambient),
            pivots: (0..ambient).collect(),
        }
    }

    /// Row space of `rows`.
    pub fn span(f: &FieldSpec, ambient: usize, rows: &Mat) -> Result<Self> {
        if rows.cols != ambient {
            return Err(Error::DimensionMismatch {
                expected: ambient,
                found: rows.cols,
            });
        }
        Ok(Self::from_rref(rref_nonzero(f, rows)))
    }

    pub fn from_vectors<R: AsRef<[Fe]>>(f: &FieldSpec, ambient: usize, rows: &[R]) -> Result<Self> {
        Self::span(f, ambient, &Mat::from_rows(ambient, rows)?)
    }

    fn from_rref(basis: Mat) -> Self {
        let pivots = pivot_columns(&basis, basis.rows);
        Self {
            ambient: basis.cols,
            basis,
            pivots,
        }
    }

    pub fn ambient(&self) -> usize {
        self.ambient
    }

    pub fn dim(&self) -> usize {
        self.basis.rows
    }

    pub fn basis(&self) -> &Mat {
        &self.basis
    }

    pub fn pivots(&self) -> &[usize] {
        &self.pivots
    }

    fn check_ambient(&self, n: usize) -> Result<()> {
        if self.ambient != n {
            return Err(Error::DimensionMismatch {
                expected: self.ambient,
                found: n,
            });
        }
        Ok(())
    }

    pub fn contains(&self, f: &FieldSpec, v: &[Fe]) -> Result<bool> {
        self.check_ambient(v.len())?;
        Ok(self.contains_vector(f, v))
    }

    /// Membership without the length check; `v.len()` must equal the ambient dimension.
    pub(crate) fn contains_vector(&self, f: &FieldSpec, v: &[Fe]) -> bool {
        let mut w = v.to_vec();
        for (i, &p) in self.pivots.iter().enumerate() {
            let c = w[p];
            if c.is_zero() {
                continue;
            }
            for (x, &b) in w.iter_mut().zip(self.basis.row(i)).skip(p) {
                if !b.is_zero() {
                    *x = f.add(*x, f.mul(c, b));
                }
            }
        }
        w.iter().all(|x| x.is_zero())
    }

    pub fn sum(&self, f: &FieldSpec, other: &Subspace) -> Result<Subspace> {
        self.check_ambient(other.ambient)?;
        Subspace::span(f, self.ambient, &self.basis.stack(&other.basis)?)
    }

    /// Exact intersection via the left kernel of the stacked bases: every
    /// `(x, y)` with `x·A + y·B = 0` contributes the common vector `x·A`.
    pub fn intersect(&self, f: &FieldSpec, other: &Subspace) -> Result<Subspace> {
        self.check_ambient(other.ambient)?;
        let stacked = self.basis.stack(&other.basis)?;
        let kernel = null_space(f, &stacked.transpose());
        let a = self.dim();
        let mut vectors = Vec::with_capacity(kernel.rows);
        for k in kernel.row_iter() {
            let mut v = vec![Fe::ZERO; self.ambient];
            for (i, &coef) in k[..a].iter().enumerate() {
                if coef.is_zero() {
                    continue;
                }
                for (x, &b) in v.iter_mut().zip(self.basis.row(i)) {
                    *x = f.add(*x, f.mul(coef, b));
                }
            }
            vectors.push(v);
        }
        Subspace::from_vectors(f, self.ambient, &vectors)
    }

    pub fn is_subset_of(&self, f: &FieldSpec, other: &Subspace) -> Result<bool> {
        self.check_ambient(other.ambient)?;
        Ok(self.within(f, other))
    }

    /// `self ⊆ other`, ambient dimensions assumed equal.
    pub(crate) fn within(&self, f: &FieldSpec, other: &Subspace) -> bool {
        self.dim() <= other.dim() && self.basis.row_iter().all(|r| other.contains_vector(f, r))
    }

    /// Canonical basis rows as integer bit encodings.
    pub fn to_bits(&self) -> Vec<Vec<u32>> {
        self.basis
            .row_iter()
            .map(|r| r.iter().map(|x| x.bits()).collect())
            .collect()
    }
}

impl fmt::Display for Subspace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let rows: Vec<String> = self
            .basis
            .row_iter()
            .map(|r| r.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(""))
            .collect();
        write!(f, "<{}>", rows.join(", "))
    }
}
