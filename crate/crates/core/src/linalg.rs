//! Small dense helpers on top of `nalgebra` plus a banded LU factorization
//! used by the time integrator.

use nalgebra::{Cholesky, DMatrix, DVector, SymmetricEigen};

/// Frobenius-norm asymmetry `‖A − Aᵀ‖`.
pub fn asymmetry(a: &DMatrix<f64>) -> f64 {
    (a - a.transpose()).norm()
}

/// Frobenius norm of the symmetric part `‖A + Aᵀ‖`.
pub fn skew_defect(a: &DMatrix<f64>) -> f64 {
    (a + a.transpose()).norm()
}

pub fn symmetrize(a: &DMatrix<f64>) -> DMatrix<f64> {
    (a + a.transpose()) * 0.5
}

/// Eigenvalues of a symmetric matrix in ascending order.
pub fn sym_eigenvalues(a: &DMatrix<f64>) -> Vec<f64> {
    let mut ev: Vec<f64> = SymmetricEigen::new(symmetrize(a)).eigenvalues.iter().copied().collect();
    ev.sort_by(|x, y| x.total_cmp(y));
    ev
}

/// Eigen-decomposition of a symmetric matrix with eigenpairs sorted ascending.
pub fn sym_eigen_sorted(a: &DMatrix<f64>) -> (Vec<f64>, DMatrix<f64>) {
    let eig = SymmetricEigen::new(symmetrize(a));
    let n = a.nrows();
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let values = idx.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut vectors = DMatrix::zeros(n, n);
    for (k, &i) in idx.iter().enumerate() {
        vectors.set_column(k, &eig.eigenvectors.column(i));
    }
    (values, vectors)
}

/// Largest eigenvalue `λ` of the symmetric-definite pencil `A v = λ B v`.
///
/// `B` must be symmetric positive definite; `None` otherwise.
pub fn max_generalized_eigenvalue(a: &DMatrix<f64>, b: &DMatrix<f64>) -> Option<f64> {
    let chol = Cholesky::new(symmetrize(b))?;
    let l = chol.l();
    // C = L⁻¹ A L⁻ᵀ
    let linv_a = l.solve_lower_triangular(&symmetrize(a))?;
    let c = l.solve_lower_triangular(&linv_a.transpose())?;
    sym_eigenvalues(&c).last().copied()
}

/// Orthonormal basis of the kernel of a full-row-rank `m × k` matrix (`m ≤ k`),
/// returned as a `k × (k − m)` matrix together with the smallest retained
/// singular value (the numerical rank margin).
pub fn kernel_basis(w: &DMatrix<f64>) -> (DMatrix<f64>, f64) {
    let (m, k) = w.shape();
    let mut padded = DMatrix::zeros(k, k);
    padded.view_mut((0, 0), (m, k)).copy_from(w);
    let svd = padded.svd(false, true);
    let vt = svd.v_t.expect("requested v_t");
    let mut idx: Vec<usize> = (0..k).collect();
    idx.sort_by(|&i, &j| svd.singular_values[j].total_cmp(&svd.singular_values[i]));
    let sigma_min = if m == 0 { f64::INFINITY } else { svd.singular_values[idx[m - 1]] };
    let mut basis = DMatrix::zeros(k, k - m);
    for (col, &i) in idx[m..].iter().enumerate() {
        basis.set_column(col, &vt.row(i).transpose());
    }
    (basis, sigma_min)
}

/// Numerical rank with relative tolerance `rtol` on the singular values.
pub fn rank(w: &DMatrix<f64>, rtol: f64) -> usize {
    let sv = w.singular_values();
    let top = sv.iter().copied().fold(0.0, f64::max);
    if top == 0.0 {
        return 0;
    }
    sv.iter().filter(|&&s| s > rtol * top).count()
}

/// Block-diagonal assembly of square blocks.
pub fn block_diag(blocks: &[DMatrix<f64>]) -> DMatrix<f64> {
    let n: usize = blocks.iter().map(|b| b.nrows()).sum();
    let mut out = DMatrix::zeros(n, n);
    let mut off = 0;
    for b in blocks {
        out.view_mut((off, off), b.shape()).copy_from(b);
        off += b.nrows();
    }
    out
}

/// Row-wise sparse matrix, enough for stencil operators and mat-vecs.
#[derive(Debug, Clone)]
pub struct SparseRows {
    ncols: usize,
    rows: Vec<Vec<(usize, f64)>>,
}

impl SparseRows {
    pub fn from_triplets(nrows: usize, ncols: usize, triplets: impl IntoIterator<Item = (usize, usize, f64)>) -> Self {
        let mut rows: Vec<Vec<(usize, f64)>> = vec![Vec::new(); nrows];
        for (i, j, v) in triplets {
            rows[i].push((j, v));
        }
        for row in &mut rows {
            row.sort_by_key(|e| e.0);
            let mut merged: Vec<(usize, f64)> = Vec::with_capacity(row.len());
            for &(j, v) in row.iter() {
                match merged.last_mut() {
                    Some(last) if last.0 == j => last.1 += v,
                    _ => merged.push((j, v)),
                }
            }
            merged.retain(|e| e.1 != 0.0);
            *row = merged;
        }
        Self { ncols, rows }
    }

    pub fn nrows(&self) -> usize {
        self.rows.len()
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn row(&self, i: usize) -> &[(usize, f64)] {
        &self.rows[i]
    }

    pub fn triplets(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        self.rows.iter().enumerate().flat_map(|(i, r)| r.iter().map(move |&(j, v)| (i, j, v)))
    }

    pub fn mul_vec(&self, x: &DVector<f64>) -> DVector<f64> {
        DVector::from_iterator(
            self.rows.len(),
            self.rows.iter().map(|r| r.iter().map(|&(j, v)| v * x[j]).sum::<f64>()),
        )
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut out = DMatrix::zeros(self.rows.len(), self.ncols);
        for (i, j, v) in self.triplets() {
            out[(i, j)] += v;
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SingularPivot {
    pub column: usize,
}

/// LU factorization with partial pivoting of a square banded matrix.
///
/// Storage follows the LAPACK `gbtrf` layout: column `j` keeps rows
/// `j − ku − kl ..= j + kl`, the extra `kl` super-diagonals absorbing the
/// fill produced by row interchanges.
#[derive(Debug, Clone)]
pub struct BandedLu {
    n: usize,
    kl: usize,
    ku: usize,
    ld: usize,
    ab: Vec<f64>,
    ipiv: Vec<usize>,
    // per column: number of nonzero multipliers below the diagonal, and the
    // first row holding a nonzero of U above it
    l_len: Vec<usize>,
    u_first: Vec<usize>,
}

impl BandedLu {
    /// Factorizes the matrix given by `triplets` (duplicates are summed),
    /// after applying the symmetric permutation `perm` (`perm[old] = new`).
    pub fn factor(
        n: usize,
        triplets: impl IntoIterator<Item = (usize, usize, f64)>,
        perm: &[usize],
    ) -> Result<Self, SingularPivot> {
        let entries: Vec<(usize, usize, f64)> =
            triplets.into_iter().map(|(i, j, v)| (perm[i], perm[j], v)).collect();
        let mut kl = 0;
        let mut ku = 0;
        for &(i, j, _) in &entries {
            if i > j {
                kl = kl.max(i - j);
            } else {
                ku = ku.max(j - i);
            }
        }
        let ld = 2 * kl + ku + 1;
        let mut lu = Self {
            n,
            kl,
            ku,
            ld,
            ab: vec![0.0; ld * n],
            ipiv: vec![0; n],
            l_len: vec![0; n],
            u_first: (0..n).collect(),
        };
        for (i, j, v) in entries {
            *lu.at_mut(i, j) += v;
        }
        lu.decompose()?;
        lu.trim_profile();
        Ok(lu)
    }

    #[inline]
    fn idx(&self, i: usize, j: usize) -> usize {
        j * self.ld + (self.kl + self.ku + i - j)
    }

    #[inline]
    fn at_mut(&mut self, i: usize, j: usize) -> &mut f64 {
        let k = self.idx(i, j);
        &mut self.ab[k]
    }

    #[inline]
    fn at(&self, i: usize, j: usize) -> f64 {
        self.ab[self.idx(i, j)]
    }

    fn decompose(&mut self) -> Result<(), SingularPivot> {
        let n = self.n;
        let (kl, ku) = (self.kl, self.ku);
        for j in 0..n {
            let last_row = (j + kl).min(n - 1);
            let mut p = j;
            let mut best = self.at(j, j).abs();
            for i in j + 1..=last_row {
                let v = self.at(i, j).abs();
                if v > best {
                    best = v;
                    p = i;
                }
            }
            if best == 0.0 {
                return Err(SingularPivot { column: j });
            }
            self.ipiv[j] = p;
            let last_col = (j + ku + kl).min(n - 1);
            if p != j {
                for c in j..=last_col {
                    let a = self.idx(j, c);
                    let b = self.idx(p, c);
                    self.ab.swap(a, b);
                }
            }
            let pivot = self.at(j, j);
            for i in j + 1..=last_row {
                let l = self.at(i, j) / pivot;
                *self.at_mut(i, j) = l;
                if l != 0.0 {
                    for c in j + 1..=last_col {
                        let u = self.at(j, c);
                        *self.at_mut(i, c) -= l * u;
                    }
                }
            }
        }
        Ok(())
    }

    fn trim_profile(&mut self) {
        let n = self.n;
        for j in 0..n {
            let last_row = (j + self.kl).min(n - 1);
            self.l_len[j] = (j + 1..=last_row).rev().find(|&i| self.at(i, j) != 0.0).map_or(0, |i| i - j);
            let first_row = j.saturating_sub(self.ku + self.kl);
            self.u_first[j] = (first_row..j).find(|&i| self.at(i, j) != 0.0).unwrap_or(j);
        }
    }

    /// Solves `A y = b` in place, `b` given in the permuted ordering.
    pub fn solve_in_place(&self, b: &mut [f64]) {
        let n = self.n;
        assert_eq!(b.len(), n, "right-hand side length");
        for j in 0..n {
            let p = self.ipiv[j];
            if p != j {
                b.swap(j, p);
            }
            let len = self.l_len[j];
            let bj = b[j];
            if len > 0 && bj != 0.0 {
                let start = self.idx(j + 1, j);
                let col = &self.ab[start..start + len];
                for (bi, l) in b[j + 1..j + 1 + len].iter_mut().zip(col) {
                    *bi -= l * bj;
                }
            }
        }
        for j in (0..n).rev() {
            b[j] /= self.at(j, j);
            let bj = b[j];
            let first = self.u_first[j];
            if first < j && bj != 0.0 {
                let start = self.idx(first, j);
                let col = &self.ab[start..start + (j - first)];
                for (bi, u) in b[first..j].iter_mut().zip(col) {
                    *bi -= u * bj;
                }
            }
        }
    }

    /// Mean number of stored multipliers and upper-triangle entries per column.
    pub fn mean_profile(&self) -> (f64, f64) {
        let n = self.n as f64;
        let l: usize = self.l_len.iter().sum();
        let u: usize = self.u_first.iter().enumerate().map(|(j, &f)| j - f).sum();
        (l as f64 / n, u as f64 / n)
    }

    pub fn bandwidths(&self) -> (usize, usize) {
        (self.kl, self.ku)
    }

    pub fn dim(&self) -> usize {
        self.n
    }
}
