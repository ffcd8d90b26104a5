//! Dense real matrices and a symmetric eigensolver.
//!
//! The solver is the classic two-stage scheme: Householder reduction to
//! symmetric tridiagonal form followed by the QL algorithm with implicit
//! Wilkinson-style shifts (the EISPACK `tred2`/`tql2` pair). Matrices in this
//! crate stay at desk scale (a few thousand rows at most), so a dense
//! O(n³) solver is all that is needed.
//!
//! Internally the Householder stage works on the transpose of the usual
//! column layout so that every inner loop walks contiguous memory; on exit
//! each *row* of [`SymmetricEigen::vectors`] is one eigenvector.

use crate::error::{Error, Result};

/// Dense row-major matrix of `f64`.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    /// Builds a matrix from row slices. Panics on ragged input.
    pub fn from_rows(rows: &[&[f64]]) -> Self {
        let n_rows = rows.len();
        let n_cols = rows.first().map_or(0, |r| r.len());
        let mut data = Vec::with_capacity(n_rows * n_cols);
        for r in rows {
            assert_eq!(r.len(), n_cols, "ragged rows");
            data.extend_from_slice(r);
        }
        Self {
            rows: n_rows,
            cols: n_cols,
            data,
        }
    }

    pub fn from_diagonal(diag: &[f64]) -> Self {
        let mut m = Self::zeros(diag.len(), diag.len());
        for (i, &d) in diag.iter().enumerate() {
            m[(i, i)] = d;
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn transpose(&self) -> Matrix {
        let mut t = Matrix::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t[(j, i)] = self[(i, j)];
            }
        }
        t
    }

    /// `self · x`.
    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.cols);
        (0..self.rows).map(|i| dot(self.row(i), x)).collect()
    }

    /// Largest absolute row sum. Bounds the spectral norm from above.
    pub fn norm_inf(&self) -> f64 {
        (0..self.rows)
            .map(|i| self.row(i).iter().map(|v| v.abs()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    /// Largest `|a_ij - a_ji|` divided by the largest `|a_ij|`.
    pub fn asymmetry(&self) -> f64 {
        assert!(self.is_square());
        let scale = self.data.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
        if scale == 0.0 {
            return 0.0;
        }
        let mut worst = 0.0_f64;
        for i in 0..self.rows {
            for j in 0..i {
                worst = worst.max((self[(i, j)] - self[(j, i)]).abs());
            }
        }
        worst / scale
    }
}

impl std::ops::Index<(usize, usize)> for Matrix {
    type Output = f64;

    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for Matrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.cols + j]
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Eigenvalues in ascending order with the matching orthonormal eigenvectors.
#[derive(Debug, Clone)]
pub struct SymmetricEigen {
    pub values: Vec<f64>,
    /// Row `n` holds the eigenvector of `values[n]`.
    pub vectors: Matrix,
}

impl SymmetricEigen {
    pub fn dimension(&self) -> usize {
        self.values.len()
    }

    pub fn vector(&self, n: usize) -> &[f64] {
        self.vectors.row(n)
    }

    /// Largest residual `‖A v − E v‖` over all eigenpairs.
    pub fn max_residual(&self, a: &Matrix) -> f64 {
        (0..self.dimension())
            .map(|n| {
                let v = self.vector(n);
                let av = a.mul_vec(v);
                av.iter()
                    .zip(v)
                    .map(|(x, y)| (x - self.values[n] * y).powi(2))
                    .sum::<f64>()
                    .sqrt()
            })
            .fold(0.0, f64::max)
    }

    /// Largest deviation of `VᵀV` from the identity.
    pub fn orthonormality_error(&self) -> f64 {
        let n = self.dimension();
        let mut worst = 0.0_f64;
        for i in 0..n {
            for j in 0..=i {
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((dot(self.vector(i), self.vector(j)) - target).abs());
            }
        }
        worst
    }

    /// Largest `|E_n|`, the spectral norm of the decomposed matrix.
    pub fn spectral_norm(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

/// Full eigendecomposition of a real symmetric matrix. Only the lower
/// triangle of `a` is read.
pub fn symmetric_eigen(a: &Matrix) -> Result<SymmetricEigen> {
    let (values, vectors) = decompose(a, true)?;
    Ok(SymmetricEigen {
        values,
        vectors: vectors.expect("vectors requested"),
    })
}

/// Eigenvalues only, ascending. Cheaper than [`symmetric_eigen`] by
/// skipping the accumulation of transformations.
pub fn symmetric_eigenvalues(a: &Matrix) -> Result<Vec<f64>> {
    decompose(a, false).map(|(values, _)| values)
}

fn decompose(a: &Matrix, want_vectors: bool) -> Result<(Vec<f64>, Option<Matrix>)> {
    if !a.is_square() {
        return Err(Error::InvalidParameter(format!(
            "eigendecomposition needs a square matrix, got {}x{}",
            a.rows(),
            a.cols()
        )));
    }
    if a.as_slice().iter().any(|v| !v.is_finite()) {
        return Err(Error::ConvergenceFailure("matrix has non-finite entries".into()));
    }
    let n = a.rows();
    if n == 0 {
        return Ok((Vec::new(), want_vectors.then(|| Matrix::zeros(0, 0))));
    }

    // w[j * n + k] holds element (k, j) of the working matrix, so the
    // column sweeps of the Householder stage read contiguous rows of `w`.
    let mut w = a.transpose().data;
    let mut d = vec![0.0; n];
    let mut e = vec![0.0; n];
    tridiagonalize(n, &mut w, &mut d, &mut e, want_vectors);
    ql_implicit(n, &mut d, &mut e, want_vectors.then_some(w.as_mut_slice()))?;

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| d[i].total_cmp(&d[j]));
    let values = order.iter().map(|&i| d[i]).collect();
    let vectors = want_vectors.then(|| {
        let mut v = Matrix::zeros(n, n);
        for (dst, &src) in order.iter().enumerate() {
            v.data[dst * n..(dst + 1) * n].copy_from_slice(&w[src * n..(src + 1) * n]);
        }
        v
    });
    Ok((values, vectors))
}

/// Householder reduction to tridiagonal form. On exit `d` is the diagonal,
/// `e[1..]` the subdiagonal, and (if requested) row `j` of `w` is column `j`
/// of the accumulated orthogonal transformation.
fn tridiagonalize(n: usize, w: &mut [f64], d: &mut [f64], e: &mut [f64], accumulate: bool) {
    // (row, col) of the working matrix in the transposed storage
    let at = |r: usize, c: usize| c * n + r;

    for j in 0..n {
        d[j] = w[at(n - 1, j)];
    }

    for i in (1..n).rev() {
        let mut scale = 0.0;
        let mut h = 0.0;
        for dk in &d[..i] {
            scale += dk.abs();
        }
        if scale == 0.0 {
            e[i] = d[i - 1];
            for j in 0..i {
                d[j] = w[at(i - 1, j)];
                w[at(i, j)] = 0.0;
                w[at(j, i)] = 0.0;
            }
        } else {
            for dk in &mut d[..i] {
                *dk /= scale;
                h += *dk * *dk;
            }
            let f = d[i - 1];
            let mut g = h.sqrt();
            if f > 0.0 {
                g = -g;
            }
            e[i] = scale * g;
            h -= f * g;
            d[i - 1] = f - g;
            e[..i].fill(0.0);

            for j in 0..i {
                let f = d[j];
                w[at(j, i)] = f;
                let mut g = e[j] + w[at(j, j)] * f;
                let col = &w[j * n..j * n + i];
                for k in j + 1..i {
                    g += col[k] * d[k];
                    e[k] += col[k] * f;
                }
                e[j] = g;
            }
            let mut f = 0.0;
            for j in 0..i {
                e[j] /= h;
                f += e[j] * d[j];
            }
            let hh = f / (h + h);
            for j in 0..i {
                e[j] -= hh * d[j];
            }
            for j in 0..i {
                let f = d[j];
                let g = e[j];
                let col = &mut w[j * n..j * n + i];
                for k in j..i {
                    col[k] -= f * e[k] + g * d[k];
                }
                d[j] = w[at(i - 1, j)];
                w[at(i, j)] = 0.0;
            }
        }
        d[i] = h;
    }

    if accumulate {
        for i in 0..n - 1 {
            w[at(n - 1, i)] = w[at(i, i)];
            w[at(i, i)] = 1.0;
            let h = d[i + 1];
            if h != 0.0 {
                for k in 0..=i {
                    d[k] = w[at(k, i + 1)] / h;
                }
                for j in 0..=i {
                    let (head, tail) = w.split_at_mut((i + 1) * n);
                    let col_next = &tail[..=i];
                    let col_j = &mut head[j * n..j * n + i + 1];
                    let g = dot(col_next, col_j);
                    for k in 0..=i {
                        col_j[k] -= g * d[k];
                    }
                }
            }
            for k in 0..=i {
                w[at(k, i + 1)] = 0.0;
            }
        }
        for j in 0..n {
            d[j] = w[at(n - 1, j)];
            w[at(n - 1, j)] = 0.0;
        }
        w[at(n - 1, n - 1)] = 1.0;
    } else {
        for j in 0..n {
            d[j] = w[at(j, j)];
        }
    }
    e[0] = 0.0;
}

/// Implicit QL iteration on the tridiagonal matrix (`d`, `e`). Rotations
/// are applied to the rows of `z` when present.
fn ql_implicit(n: usize, d: &mut [f64], e: &mut [f64], mut z: Option<&mut [f64]>) -> Result<()> {
    const MAX_SWEEPS: usize = 60;

    for i in 1..n {
        e[i - 1] = e[i];
    }
    e[n - 1] = 0.0;

    let mut f = 0.0;
    let mut tst1 = 0.0_f64;
    let eps = f64::EPSILON;
    for l in 0..n {
        tst1 = tst1.max(d[l].abs() + e[l].abs());
        let mut m = l;
        while m < n {
            if e[m].abs() <= eps * tst1 {
                break;
            }
            m += 1;
        }

        if m > l {
            let mut sweeps = 0;
            loop {
                sweeps += 1;
                if sweeps > MAX_SWEEPS {
                    return Err(Error::ConvergenceFailure(format!(
                        "QL iteration did not converge for eigenvalue {l} after {MAX_SWEEPS} sweeps"
                    )));
                }

                let g = d[l];
                let mut p = (d[l + 1] - g) / (2.0 * e[l]);
                let mut r = p.hypot(1.0);
                if p < 0.0 {
                    r = -r;
                }
                d[l] = e[l] / (p + r);
                d[l + 1] = e[l] * (p + r);
                let dl1 = d[l + 1];
                let h = g - d[l];
                for di in &mut d[l + 2..n] {
                    *di -= h;
                }
                f += h;

                p = d[m];
                let mut c = 1.0;
                let mut c2 = c;
                let mut c3 = c;
                let el1 = e[l + 1];
                let mut s = 0.0;
                let mut s2 = 0.0;
                for i in (l..m).rev() {
                    c3 = c2;
                    c2 = c;
                    s2 = s;
                    let g = c * e[i];
                    let h = c * p;
                    r = p.hypot(e[i]);
                    e[i + 1] = s * r;
                    s = e[i] / r;
                    c = p / r;
                    p = c * d[i] - s * g;
                    d[i + 1] = h + s * (c * g + s * d[i]);

                    if let Some(z) = z.as_deref_mut() {
                        let (lo, hi) = z.split_at_mut((i + 1) * n);
                        let row_i = &mut lo[i * n..];
                        let row_next = &mut hi[..n];
                        for (a, b) in row_i.iter_mut().zip(row_next.iter_mut()) {
                            let h = *b;
                            *b = s * *a + c * h;
                            *a = c * *a - s * h;
                        }
                    }
                }
                p = -s * s2 * c3 * el1 * e[l] / dl1;
                e[l] = s * p;
                d[l] = c * p;

                if e[l].abs() <= eps * tst1 {
                    break;
                }
            }
        }
        d[l] += f;
        e[l] = 0.0;
    }
    Ok(())
}
