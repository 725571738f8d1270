//! Full eigendecomposition of dense real symmetric matrices.
//!
//! Householder reduction to tridiagonal form followed by the implicitly
//! shifted QL algorithm with Wilkinson-type shifts (the EISPACK
//! `tred2`/`tql2` pair). The orthogonal transforms are accumulated, so the
//! eigenvectors always come out with the eigenvalues.
//!
//! Internally the transform is kept transposed (row `k` is eigenvector
//! `k`) so that every inner loop runs over contiguous memory.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::linalg::Matrix;
use crate::math;
use crate::model::Hamiltonian;
use crate::{Error, Result};

/// QL sweeps allowed per eigenvalue before giving up.
pub const MAX_SWEEPS: usize = 50;

#[derive(Debug, Clone, PartialEq)]
pub struct EigenDecomposition {
    eigenvalues: Vec<f64>,
    // row k holds the eigenvector of eigenvalue k
    vectors: Matrix,
}

impl EigenDecomposition {
    /// Ascending eigenvalues.
    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    /// Unit eigenvector belonging to `eigenvalues()[k]`.
    pub fn eigenvector(&self, k: usize) -> &[f64] {
        self.vectors.row(k)
    }

    /// Eigenvector matrix with column `k` belonging to eigenvalue `k`.
    pub fn eigenvector_matrix(&self) -> Matrix {
        self.vectors.transpose()
    }

    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }
}

pub fn eigh_symmetric(h: &Hamiltonian) -> Result<EigenDecomposition> {
    eigh(h.entries())
}

/// Eigendecomposition of an exactly symmetric matrix with finite entries.
pub fn eigh(a: &Matrix) -> Result<EigenDecomposition> {
    if !a.is_square() || a.rows() == 0 {
        return Err(Error::InvalidDimension(format!(
            "eigensolver needs a non-empty square matrix, got {}x{}",
            a.rows(),
            a.cols()
        )));
    }
    if let Some(pos) = a.as_slice().iter().position(|x| !x.is_finite()) {
        let n = a.cols();
        return Err(Error::InvalidInput(format!(
            "non-finite matrix entry at ({}, {})",
            pos / n,
            pos % n
        )));
    }
    if !a.is_symmetric() {
        return Err(Error::InvalidInput("matrix is not symmetric".into()));
    }

    let n = a.rows();
    let mut u = a.as_slice().to_vec();
    let mut d = vec![0.0; n];
    let mut e = vec![0.0; n];
    tridiagonalize(n, &mut u, &mut d, &mut e);
    ql_implicit(n, &mut u, &mut d, &mut e)?;

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| d[i].total_cmp(&d[j]).then(i.cmp(&j)));
    let eigenvalues = order.iter().map(|&i| d[i]).collect();
    let mut sorted = Vec::with_capacity(n * n);
    for &i in &order {
        sorted.extend_from_slice(&u[i * n..(i + 1) * n]);
    }
    Ok(EigenDecomposition {
        eigenvalues,
        vectors: Matrix::from_row_major(n, n, sorted).expect("n*n entries"),
    })
}

/// Householder tridiagonalization (`tred2`) on the transposed transform.
///
/// On exit `d` is the diagonal, `e[1..]` the subdiagonal and `u` the
/// transposed accumulated orthogonal matrix.
fn tridiagonalize(n: usize, u: &mut [f64], d: &mut [f64], e: &mut [f64]) {
    for j in 0..n {
        d[j] = u[j * n + n - 1];
    }

    for i in (1..n).rev() {
        let mut scale = 0.0;
        let mut h = 0.0;
        for dk in &d[..i] {
            scale += math::abs(*dk);
        }
        if scale == 0.0 {
            e[i] = d[i - 1];
            for j in 0..i {
                d[j] = u[j * n + i - 1];
                u[j * n + i] = 0.0;
                u[i * n + j] = 0.0;
            }
        } else {
            for dk in &mut d[..i] {
                *dk /= scale;
                h += *dk * *dk;
            }
            let mut f = d[i - 1];
            let mut g = math::sqrt(h);
            if f > 0.0 {
                g = -g;
            }
            e[i] = scale * g;
            h -= f * g;
            d[i - 1] = f - g;
            for ej in &mut e[..i] {
                *ej = 0.0;
            }

            for j in 0..i {
                f = d[j];
                u[i * n + j] = f;
                g = e[j] + u[j * n + j] * f;
                let row = &u[j * n..j * n + i];
                for k in j + 1..i {
                    g += row[k] * d[k];
                    e[k] += row[k] * f;
                }
                e[j] = g;
            }
            f = 0.0;
            for j in 0..i {
                e[j] /= h;
                f += e[j] * d[j];
            }
            let hh = f / (h + h);
            for j in 0..i {
                e[j] -= hh * d[j];
            }
            for j in 0..i {
                f = d[j];
                g = e[j];
                let row = &mut u[j * n..j * n + i];
                for k in j..i {
                    row[k] -= f * e[k] + g * d[k];
                }
                d[j] = u[j * n + i - 1];
                u[j * n + i] = 0.0;
            }
        }
        d[i] = h;
    }

    for i in 0..n - 1 {
        u[i * n + n - 1] = u[i * n + i];
        u[i * n + i] = 1.0;
        let h = d[i + 1];
        if h != 0.0 {
            for k in 0..=i {
                d[k] = u[(i + 1) * n + k] / h;
            }
            for j in 0..=i {
                let (head, tail) = u.split_at_mut((i + 1) * n);
                let pivot = &tail[..=i];
                let row = &mut head[j * n..j * n + i + 1];
                let g: f64 = pivot.iter().zip(row.iter()).map(|(a, b)| a * b).sum();
                for (r, dk) in row.iter_mut().zip(&d[..=i]) {
                    *r -= g * dk;
                }
            }
        }
        for k in 0..=i {
            u[(i + 1) * n + k] = 0.0;
        }
    }
    for j in 0..n {
        d[j] = u[j * n + n - 1];
        u[j * n + n - 1] = 0.0;
    }
    u[(n - 1) * n + n - 1] = 1.0;
    e[0] = 0.0;
}

/// Implicit QL iterations (`tql2`) on the tridiagonal matrix `(d, e)`.
///
/// Deflation test: `|e_m| <= eps * tst1` with `tst1 = max_i(|d_i| + |e_i|)`
/// over the whole tridiagonal matrix. A running maximum (as in `tql2`)
/// starts at zero on the exactly degenerate flat band and lets the
/// iteration wander into subnormal entries, where the Givens rotations
/// stop being orthogonal.
fn ql_implicit(n: usize, u: &mut [f64], d: &mut [f64], e: &mut [f64]) -> Result<()> {
    for i in 1..n {
        e[i - 1] = e[i];
    }
    e[n - 1] = 0.0;

    let eps = f64::EPSILON;
    let mut f = 0.0;
    let tst1 = d
        .iter()
        .zip(e.iter())
        .fold(0.0f64, |m, (a, b)| m.max(math::abs(*a) + math::abs(*b)));
    for l in 0..n {
        let mut m = l;
        while m < n {
            if math::abs(e[m]) <= eps * tst1 {
                break;
            }
            m += 1;
        }
        // e[n-1] == 0 guarantees m < n
        if m > l {
            let mut sweeps = 0;
            loop {
                sweeps += 1;
                if sweeps > MAX_SWEEPS {
                    return Err(Error::Convergence {
                        index: l,
                        sweeps: MAX_SWEEPS,
                    });
                }
                let g = d[l];
                let mut p = (d[l + 1] - g) / (2.0 * e[l]);
                let mut r = math::hypot(p, 1.0);
                if p < 0.0 {
                    r = -r;
                }
                d[l] = e[l] / (p + r);
                d[l + 1] = e[l] * (p + r);
                let dl1 = d[l + 1];
                let mut h = g - d[l];
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
                    h = c * p;
                    r = math::hypot(p, e[i]);
                    e[i + 1] = s * r;
                    s = e[i] / r;
                    c = p / r;
                    p = c * d[i] - s * g;
                    d[i + 1] = h + s * (c * g + s * d[i]);

                    let (lo, hi) = u.split_at_mut((i + 1) * n);
                    let vi = &mut lo[i * n..(i + 1) * n];
                    let vi1 = &mut hi[..n];
                    for (a, b) in vi.iter_mut().zip(vi1.iter_mut()) {
                        let t = *b;
                        *b = s * *a + c * t;
                        *a = c * *a - s * t;
                    }
                }
                p = -s * s2 * c3 * el1 * e[l] / dl1;
                e[l] = s * p;
                d[l] = c * p;
                if math::abs(e[l]) <= eps * tst1 {
                    break;
                }
            }
        }
        d[l] += f;
        e[l] = 0.0;
    }
    Ok(())
}
