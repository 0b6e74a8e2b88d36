//! Small dense and banded linear algebra used by the time steppers and the
//! observability estimator: a block-tridiagonal LU with 2x2 blocks, a cyclic
//! Jacobi eigensolver for symmetric matrices, Cholesky and a pivoted LU.
//!
//! Everything here is desk scale (dimensions in the hundreds), so plain
//! Vec-of-rows storage is sufficient.

use crate::error::{Error, Result};

/// Row-major dense square matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix {
    pub n: usize,
    pub data: Vec<f64>,
}

impl DenseMatrix {
    pub fn zeros(n: usize) -> Self {
        DenseMatrix {
            n,
            data: vec![0.0; n * n],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.n);
        let mut y = vec![0.0; self.n];
        for i in 0..self.n {
            let row = &self.data[i * self.n..(i + 1) * self.n];
            y[i] = row.iter().zip(x).map(|(a, b)| a * b).sum();
        }
        y
    }
}

impl std::ops::Index<(usize, usize)> for DenseMatrix {
    type Output = f64;
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.n + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for DenseMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.n + j]
    }
}

/// Eigendecomposition of a symmetric matrix by cyclic Jacobi rotations.
///
/// Returns eigenvalues in ascending order and the matching eigenvectors as
/// columns of an orthogonal matrix.
pub fn symmetric_eigen(a: &DenseMatrix) -> (Vec<f64>, DenseMatrix) {
    let n = a.n;
    let mut m = a.clone();
    let mut v = DenseMatrix::identity(n);
    if n <= 1 {
        return (m.data.clone(), v);
    }

    let off = |m: &DenseMatrix| -> f64 {
        let mut s = 0.0;
        for i in 0..n {
            for j in (i + 1)..n {
                s += m[(i, j)] * m[(i, j)];
            }
        }
        s
    };
    let scale: f64 = m
        .data
        .iter()
        .map(|x| x * x)
        .sum::<f64>()
        .max(f64::MIN_POSITIVE);

    for _sweep in 0..100 {
        if off(&m) <= 1e-30 * scale {
            break;
        }
        for p in 0..n - 1 {
            for q in (p + 1)..n {
                let apq = m[(p, q)];
                if apq.abs() <= 1e-300 {
                    continue;
                }
                let (app, aqq) = (m[(p, p)], m[(q, q)]);
                let tau = (aqq - app) / (2.0 * apq);
                let t = if tau >= 0.0 {
                    1.0 / (tau + (1.0 + tau * tau).sqrt())
                } else {
                    -1.0 / (-tau + (1.0 + tau * tau).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                for k in 0..n {
                    let (mkp, mkq) = (m[(k, p)], m[(k, q)]);
                    m[(k, p)] = c * mkp - s * mkq;
                    m[(k, q)] = s * mkp + c * mkq;
                }
                for k in 0..n {
                    let (mpk, mqk) = (m[(p, k)], m[(q, k)]);
                    m[(p, k)] = c * mpk - s * mqk;
                    m[(q, k)] = s * mpk + c * mqk;
                }
                for k in 0..n {
                    let (vkp, vkq) = (v[(k, p)], v[(k, q)]);
                    v[(k, p)] = c * vkp - s * vkq;
                    v[(k, q)] = s * vkp + c * vkq;
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| m[(i, i)].partial_cmp(&m[(j, j)]).unwrap());
    let eigenvalues: Vec<f64> = order.iter().map(|&i| m[(i, i)]).collect();
    let mut vectors = DenseMatrix::zeros(n);
    for (new_col, &old_col) in order.iter().enumerate() {
        for k in 0..n {
            vectors[(k, new_col)] = v[(k, old_col)];
        }
    }
    (eigenvalues, vectors)
}

/// Cholesky factor L of a symmetric positive definite matrix, A = L L^T.
///
/// Fails with [`Error::SingularSystem`] when a pivot drops below
/// `tol` times the largest diagonal entry, which is how the observability
/// estimator detects a rank-deficient observation Gramian.
pub fn cholesky(a: &DenseMatrix, tol: f64) -> Result<DenseMatrix> {
    let n = a.n;
    let floor = tol
        * (0..n)
            .map(|i| a[(i, i)].abs())
            .fold(0.0, f64::max)
            .max(f64::MIN_POSITIVE);
    let mut l = DenseMatrix::zeros(n);
    for i in 0..n {
        for j in 0..=i {
            let mut sum = a[(i, j)];
            for k in 0..j {
                sum -= l[(i, k)] * l[(j, k)];
            }
            if i == j {
                if sum <= floor {
                    return Err(Error::SingularSystem(format!(
                        "cholesky pivot {sum:.3e} at row {i} below floor {floor:.3e}"
                    )));
                }
                l[(i, j)] = sum.sqrt();
            } else {
                l[(i, j)] = sum / l[(j, j)];
            }
        }
    }
    Ok(l)
}

/// Solve L y = b for lower-triangular L.
pub fn forward_substitute(l: &DenseMatrix, b: &[f64]) -> Vec<f64> {
    let n = l.n;
    let mut y = b.to_vec();
    for i in 0..n {
        for k in 0..i {
            y[i] -= l[(i, k)] * y[k];
        }
        y[i] /= l[(i, i)];
    }
    y
}

/// Solve L^T x = y for lower-triangular L.
pub fn back_substitute_transposed(l: &DenseMatrix, y: &[f64]) -> Vec<f64> {
    let n = l.n;
    let mut x = y.to_vec();
    for i in (0..n).rev() {
        for k in (i + 1)..n {
            x[i] -= l[(k, i)] * x[k];
        }
        x[i] /= l[(i, i)];
    }
    x
}

/// Solve A x = b by LU with partial pivoting. A is consumed as a copy.
pub fn lu_solve(a: &DenseMatrix, b: &[f64]) -> Result<Vec<f64>> {
    let n = a.n;
    assert_eq!(b.len(), n);
    let mut m = a.clone();
    let mut x = b.to_vec();
    let mut perm: Vec<usize> = (0..n).collect();
    for col in 0..n {
        let (pivot_row, pivot) = (col..n)
            .map(|r| (r, m[(r, col)].abs()))
            .max_by(|a, b| a.1.partial_cmp(&b.1).unwrap())
            .unwrap();
        if pivot < 1e-300 {
            return Err(Error::SingularSystem(format!(
                "lu pivot {pivot:.3e} in column {col}"
            )));
        }
        if pivot_row != col {
            for j in 0..n {
                let tmp = m[(col, j)];
                m[(col, j)] = m[(pivot_row, j)];
                m[(pivot_row, j)] = tmp;
            }
            perm.swap(col, pivot_row);
            x.swap(col, pivot_row);
        }
        for r in (col + 1)..n {
            let factor = m[(r, col)] / m[(col, col)];
            m[(r, col)] = factor;
            for j in (col + 1)..n {
                m[(r, j)] -= factor * m[(col, j)];
            }
            x[r] -= factor * x[col];
        }
    }
    for i in (0..n).rev() {
        for j in (i + 1)..n {
            x[i] -= m[(i, j)] * x[j];
        }
        x[i] /= m[(i, i)];
    }
    let _ = perm;
    Ok(x)
}

/// 2x2 block with row-major entries.
pub type Block = [f64; 4];

fn block_mul(a: &Block, b: &Block) -> Block {
    [
        a[0] * b[0] + a[1] * b[2],
        a[0] * b[1] + a[1] * b[3],
        a[2] * b[0] + a[3] * b[2],
        a[2] * b[1] + a[3] * b[3],
    ]
}

fn block_inv(a: &Block) -> Result<Block> {
    let det = a[0] * a[3] - a[1] * a[2];
    if det.abs() < 1e-300 {
        return Err(Error::SingularSystem(format!(
            "2x2 block with determinant {det:.3e}"
        )));
    }
    Ok([a[3] / det, -a[1] / det, -a[2] / det, a[0] / det])
}

fn block_apply(a: &Block, x: [f64; 2]) -> [f64; 2] {
    [a[0] * x[0] + a[1] * x[1], a[2] * x[0] + a[3] * x[1]]
}

/// LU factorization of a block-tridiagonal matrix with 2x2 blocks, the
/// Thomas recursion. Coefficients are diagonally dominant for the implicit
/// Euler systems assembled here, so no pivoting is needed.
#[derive(Debug, Clone)]
pub struct BlockTridiagLu {
    /// Inverses of the pivot blocks.
    pivots_inv: Vec<Block>,
    /// Pre-multiplied upper couplings D_i^{-1} U_i.
    uppers: Vec<Block>,
    /// Original lower couplings.
    lowers: Vec<Block>,
}

impl BlockTridiagLu {
    /// Factor the matrix with diagonal blocks `diag`, sub-diagonal blocks
    /// `lower` (len m-1) and super-diagonal blocks `upper` (len m-1).
    pub fn factor(diag: &[Block], lower: &[Block], upper: &[Block]) -> Result<Self> {
        let m = diag.len();
        assert_eq!(lower.len(), m - 1);
        assert_eq!(upper.len(), m - 1);
        let mut pivots_inv = Vec::with_capacity(m);
        let mut uppers = Vec::with_capacity(m - 1);
        let mut pivot = diag[0];
        for i in 0..m {
            let inv = block_inv(&pivot)?;
            pivots_inv.push(inv);
            if i + 1 < m {
                let du = block_mul(&inv, &upper[i]);
                uppers.push(du);
                let correction = block_mul(&lower[i], &du);
                pivot = [
                    diag[i + 1][0] - correction[0],
                    diag[i + 1][1] - correction[1],
                    diag[i + 1][2] - correction[2],
                    diag[i + 1][3] - correction[3],
                ];
            }
        }
        Ok(BlockTridiagLu {
            pivots_inv,
            uppers,
            lowers: lower.to_vec(),
        })
    }

    /// Number of 2x2 blocks along the diagonal.
    pub fn n_blocks(&self) -> usize {
        self.pivots_inv.len()
    }

    /// Solve in place; `rhs` holds m interleaved pairs (u_i, v_i).
    pub fn solve(&self, rhs: &mut [f64]) {
        let m = self.n_blocks();
        assert_eq!(rhs.len(), 2 * m);
        // Forward sweep: y_i = D_i^{-1} (b_i - L_{i-1} y_{i-1}).
        let mut prev = [0.0, 0.0];
        for i in 0..m {
            let mut b = [rhs[2 * i], rhs[2 * i + 1]];
            if i > 0 {
                let lw = block_apply(&self.lowers[i - 1], prev);
                b[0] -= lw[0];
                b[1] -= lw[1];
            }
            let y = block_apply(&self.pivots_inv[i], b);
            rhs[2 * i] = y[0];
            rhs[2 * i + 1] = y[1];
            prev = y;
        }
        // Back substitution: x_i = y_i - (D_i^{-1} U_i) x_{i+1}.
        for i in (0..m - 1).rev() {
            let next = [rhs[2 * (i + 1)], rhs[2 * (i + 1) + 1]];
            let corr = block_apply(&self.uppers[i], next);
            rhs[2 * i] -= corr[0];
            rhs[2 * i + 1] -= corr[1];
        }
    }
}
