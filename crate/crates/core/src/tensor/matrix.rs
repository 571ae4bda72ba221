use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use nalgebra::DMatrix;

use super::TensorError;

/// Symmetric `n×n` matrix stored as its upper triangle, row-major.
///
/// Entry `(i, j)` with `i > j` reads the mirrored `(j, i)` slot, so the
/// matrix is symmetric by construction.
#[derive(Clone, PartialEq)]
pub struct SymMatrix {
    n: usize,
    data: Vec<f64>,
}

/// Number of independent entries of a symmetric `n×n` matrix.
pub const fn upper_len(n: usize) -> usize {
    n * (n + 1) / 2
}

/// Position of `(i, j)` in the row-major upper-triangular order
/// `(0,0), (0,1), …, (0,n-1), (1,1), …`.
pub fn upper_index(n: usize, i: usize, j: usize) -> usize {
    let (i, j) = if i <= j { (i, j) } else { (j, i) };
    debug_assert!(j < n);
    i * n - i * (i + 1) / 2 + j
}

/// Inverse of [`upper_index`].
pub fn upper_pairs(n: usize) -> impl Iterator<Item = (usize, usize)> {
    (0..n).flat_map(move |i| (i..n).map(move |j| (i, j)))
}

impl SymMatrix {
    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            data: vec![0.0; upper_len(n)],
        }
    }

    pub fn identity(n: usize) -> Self {
        Self::diag(&vec![1.0; n])
    }

    pub fn diag(d: &[f64]) -> Self {
        let mut m = Self::zeros(d.len());
        for (i, &v) in d.iter().enumerate() {
            m.set(i, i, v);
        }
        m
    }

    /// Builds from the upper triangle in [`upper_index`] order.
    pub fn from_upper(n: usize, data: Vec<f64>) -> Result<Self, TensorError> {
        if data.len() != upper_len(n) {
            return Err(TensorError::Length {
                expected: upper_len(n),
                found: data.len(),
            });
        }
        Ok(Self { n, data })
    }

    /// Builds from full rows; only the upper triangle is read.
    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Self {
        let n = rows.len();
        Self::from_fn(n, |i, j| rows[i].as_ref()[j])
    }

    /// `f` is called for `i <= j` only.
    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let data = upper_pairs(n).map(|(i, j)| f(i, j)).collect();
        Self { n, data }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[upper_index(self.n, i, j)]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        let k = upper_index(self.n, i, j);
        self.data[k] = v;
    }

    /// Upper-triangular entries in [`upper_index`] order.
    pub fn upper(&self) -> &[f64] {
        &self.data
    }

    pub fn upper_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn to_dmatrix(&self) -> DMatrix<f64> {
        DMatrix::from_fn(self.n, self.n, |i, j| self.get(i, j))
    }

    /// Largest absolute entry.
    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| f64::max(m, v.abs()))
    }

    pub fn frobenius_norm(&self) -> f64 {
        let mut s = 0.0;
        for (i, j) in upper_pairs(self.n) {
            let v = self.get(i, j);
            s += if i == j { v * v } else { 2.0 * v * v };
        }
        libm::sqrt(s)
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }
}

impl fmt::Debug for SymMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut list = f.debug_list();
        for i in 0..self.n {
            let row: Vec<f64> = (0..self.n).map(|j| self.get(i, j)).collect();
            list.entry(&row);
        }
        list.finish()
    }
}

fn binomial(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1, |acc, i| acc * (n - i) / (i + 1))
}

/// All `k`-subsets of `0..n` in lexicographic order.
pub fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    if k > n {
        return Vec::new();
    }
    let mut out = Vec::with_capacity(binomial(n, k));
    let mut cur: Vec<usize> = (0..k).collect();
    loop {
        out.push(cur.clone());
        let Some(i) = (0..k).rev().find(|&i| cur[i] < n - k + i) else {
            return out;
        };
        cur[i] += 1;
        for j in i + 1..k {
            cur[j] = cur[j - 1] + 1;
        }
    }
}

fn submatrix_det(a: &SymMatrix, rows: &[usize], cols: &[usize]) -> f64 {
    match rows.len() {
        0 => 1.0,
        1 => a.get(rows[0], cols[0]),
        2 => {
            a.get(rows[0], cols[0]) * a.get(rows[1], cols[1])
                - a.get(rows[0], cols[1]) * a.get(rows[1], cols[0])
        }
        k => DMatrix::from_fn(k, k, |i, j| a.get(rows[i], cols[j])).determinant(),
    }
}

/// `k`-th compound matrix: entry `(I, J)` is `det A[I, J]`, with rows and
/// columns indexed by the `k`-subsets of `0..n` in lexicographic order.
///
/// For `k = n - 1` the subset `I` is the complement of a single index `i`;
/// with `r(i) = n - 1 - i` the position of that subset, the adjugate is
/// recovered as `adj(A)[i][j] = (-1)^(i+j) · compound(A, n-1)[r(i)][r(j)]`.
pub fn compound(a: &SymMatrix, k: usize) -> Result<DMatrix<f64>, TensorError> {
    let n = a.dim();
    if k > n {
        return Err(TensorError::CompoundOrder { k, n });
    }
    let sets = subsets(n, k);
    let m = sets.len();
    let mut out = DMatrix::zeros(m, m);
    for (r, rows) in sets.iter().enumerate() {
        for (c, cols) in sets.iter().enumerate() {
            out[(r, c)] = submatrix_det(a, rows, cols);
        }
    }
    Ok(out)
}

/// Determinant by cofactor expansion along the first row.
fn laplace_det(m: &[Vec<f64>]) -> f64 {
    match m.len() {
        0 => 1.0,
        1 => m[0][0],
        2 => m[0][0] * m[1][1] - m[0][1] * m[1][0],
        k => {
            let mut det = 0.0;
            for c in 0..k {
                if m[0][c] == 0.0 {
                    continue;
                }
                let minor: Vec<Vec<f64>> = m[1..]
                    .iter()
                    .map(|row| {
                        row.iter()
                            .enumerate()
                            .filter(|&(j, _)| j != c)
                            .map(|(_, &v)| v)
                            .collect()
                    })
                    .collect();
                let sign = if c % 2 == 0 { 1.0 } else { -1.0 };
                det += sign * m[0][c] * laplace_det(&minor);
            }
            det
        }
    }
}

/// Classical adjugate (transposed cofactor matrix), so that
/// `A · adj(A) = det(A) · I`.
pub fn adjugate(a: &SymMatrix) -> SymMatrix {
    let n = a.dim();
    if n == 1 {
        return SymMatrix::identity(1);
    }
    SymMatrix::from_fn(n, |i, j| {
        // cofactor C_ji: delete row j and column i
        let minor: Vec<Vec<f64>> = (0..n)
            .filter(|&r| r != j)
            .map(|r| (0..n).filter(|&c| c != i).map(|c| a.get(r, c)).collect())
            .collect();
        let sign = if (i + j) % 2 == 0 { 1.0 } else { -1.0 };
        sign * laplace_det(&minor)
    })
}

/// One minor `det A[rows, cols]` of a symmetric matrix.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Minor {
    pub rows: Vec<usize>,
    pub cols: Vec<usize>,
}

impl Minor {
    pub fn order(&self) -> usize {
        self.rows.len()
    }

    pub fn eval(&self, a: &SymMatrix) -> f64 {
        submatrix_det(a, &self.rows, &self.cols)
    }
}

/// All minors of a symmetric `n×n` matrix up to the `det A[I,J] = det A[J,I]`
/// symmetry, grouped by order `k = 0..=n`. Within an order, pairs `(I, J)`
/// with `I <= J` follow the lexicographic subset order, row-major.
#[derive(Clone, Debug)]
pub struct MinorBasis {
    n: usize,
    minors: Vec<Minor>,
}

pub const MAX_DIM: usize = 4;

impl MinorBasis {
    pub fn new(n: usize) -> Result<Self, TensorError> {
        if !(2..=MAX_DIM).contains(&n) {
            return Err(TensorError::UnsupportedDim(n));
        }
        let mut minors = Vec::new();
        for k in 0..=n {
            let sets = subsets(n, k);
            for a in 0..sets.len() {
                for b in a..sets.len() {
                    minors.push(Minor {
                        rows: sets[a].clone(),
                        cols: sets[b].clone(),
                    });
                }
            }
        }
        Ok(Self { n, minors })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.minors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.minors.is_empty()
    }

    pub fn minors(&self) -> &[Minor] {
        &self.minors
    }

    pub fn eval(&self, a: &SymMatrix) -> Vec<f64> {
        self.minors.iter().map(|m| m.eval(a)).collect()
    }
}

/// Shorthand for [`MinorBasis::new`].
pub fn minor_basis(n: usize) -> Result<MinorBasis, TensorError> {
    MinorBasis::new(n)
}

/// Projective coordinates `[A^(0) : A^(1) : … : A^(n)]`: the upper triangles of
/// the compound matrices concatenated in [`MinorBasis`] order. The leading
/// coordinate is `1`.
pub fn pluecker_embed(a: &SymMatrix) -> Result<Vec<f64>, TensorError> {
    Ok(MinorBasis::new(a.dim())?.eval(a))
}

/// `z0·z3 − (z11·z22 − z12²)` for `z = (z0, z11, z12, z22, z3)`; vanishes
/// exactly on the image of the `n = 2` embedding (the Lie quadric).
pub fn lie_quadric_residual(z: &[f64]) -> Result<f64, TensorError> {
    match *z {
        [z0, z11, z12, z22, z3] => Ok(z0 * z3 - (z11 * z22 - z12 * z12)),
        _ => Err(TensorError::Length {
            expected: 5,
            found: z.len(),
        }),
    }
}

/// `A + t·v vᵀ`.
pub fn rank_one_deform(a: &SymMatrix, v: &[f64], t: f64) -> Result<SymMatrix, TensorError> {
    if v.len() != a.dim() {
        return Err(TensorError::DimMismatch(a.dim(), v.len()));
    }
    if v.iter().all(|&c| c == 0.0) {
        return Err(TensorError::ZeroVector);
    }
    let mut out = a.clone();
    for (i, j) in upper_pairs(a.dim()) {
        let k = upper_index(a.dim(), i, j);
        out.upper_mut()[k] += t * v[i] * v[j];
    }
    Ok(out)
}
