//! Dense linear algebra used by the sampler, the committee and the
//! representativeness features.
//!
//! The symmetric eigensolver is the classic Householder tridiagonalization
//! followed by implicit-shift QL. Internally the eigenvector accumulator is
//! kept transposed (one eigenvector per contiguous row) so every inner loop
//! walks memory sequentially.

use ndarray::{Array1, Array2, ArrayView2};

use crate::error::{Error, Result};

/// Numerical tolerances shared across modules.
pub mod tol {
    /// Eigenvalues below this (relative to the largest) count as zero.
    pub const EIG_ZERO: f64 = 1e-10;
    /// Eigenvalues of a PSD matrix more negative than this are an error.
    pub const EIG_NEGATIVE: f64 = 1e-8;
    /// Accepted asymmetry before symmetrizing.
    pub const SYMMETRY: f64 = 1e-10;
    /// Vectors shorter than this are dropped by Gram-Schmidt.
    pub const GRAM_SCHMIDT: f64 = 1e-12;
    /// Relative pivot size below which a PSD factorization is singular.
    pub const PIVOT: f64 = 1e-12;
}

/// Eigen-decomposition of a symmetric matrix.
#[derive(Debug, Clone)]
pub struct SymmetricEig {
    /// Eigenvalues in ascending order.
    pub values: Array1<f64>,
    /// Orthonormal eigenvectors, one per column, in the order of `values`.
    pub vectors: Array2<f64>,
}

impl SymmetricEig {
    pub fn reconstruct(&self) -> Array2<f64> {
        let scaled = &self.vectors * &self.values;
        scaled.dot(&self.vectors.t())
    }
}

fn check_finite(a: &ArrayView2<f64>, what: &'static str) -> Result<()> {
    if a.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite(what))
    }
}

fn check_square(a: &ArrayView2<f64>) -> Result<usize> {
    let (r, c) = a.dim();
    if r != c {
        return Err(Error::Dimension(format!("expected a square matrix, got {r}x{c}")));
    }
    Ok(r)
}

/// Symmetric eigen-decomposition. The input is symmetrized as (A + Aᵀ)/2.
pub fn sym_eig(a: &Array2<f64>) -> Result<SymmetricEig> {
    let view = a.view();
    let n = check_square(&view)?;
    check_finite(&view, "sym_eig input")?;
    if n == 0 {
        return Ok(SymmetricEig {
            values: Array1::zeros(0),
            vectors: Array2::zeros((0, 0)),
        });
    }

    let mut w = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            w[i * n + j] = 0.5 * (a[[i, j]] + a[[j, i]]);
        }
    }
    let mut d = vec![0.0; n];
    let mut e = vec![0.0; n];
    tred2(n, &mut w, &mut d, &mut e);
    tql2(n, &mut w, &mut d, &mut e)?;

    let values = Array1::from(d);
    let mut vectors = Array2::zeros((n, n));
    for j in 0..n {
        for k in 0..n {
            vectors[[k, j]] = w[j * n + k];
        }
    }
    Ok(SymmetricEig { values, vectors })
}

// Householder reduction to tridiagonal form. `w` holds the transpose of the
// accumulated orthogonal transform: on exit row j is the j-th basis vector.
fn tred2(n: usize, w: &mut [f64], d: &mut [f64], e: &mut [f64]) {
    // V[a][b] == w[b * n + a]
    for j in 0..n {
        d[j] = w[j * n + (n - 1)];
    }
    for i in (1..n).rev() {
        let mut scale = 0.0;
        let mut h = 0.0;
        for dk in d.iter().take(i) {
            scale += dk.abs();
        }
        if scale == 0.0 {
            e[i] = d[i - 1];
            for j in 0..i {
                d[j] = w[j * n + (i - 1)];
                w[j * n + i] = 0.0;
                w[i * n + j] = 0.0;
            }
        } else {
            for dk in d.iter_mut().take(i) {
                *dk /= scale;
                h += *dk * *dk;
            }
            let mut f = d[i - 1];
            let mut g = h.sqrt();
            if f > 0.0 {
                g = -g;
            }
            e[i] = scale * g;
            h -= f * g;
            d[i - 1] = f - g;
            for ej in e.iter_mut().take(i) {
                *ej = 0.0;
            }
            for j in 0..i {
                f = d[j];
                w[i * n + j] = f;
                let row = &w[j * n..j * n + i];
                g = e[j] + row[j] * f;
                for k in (j + 1)..i {
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
                let f = d[j];
                let g = e[j];
                let row = &mut w[j * n..j * n + i];
                for k in j..i {
                    row[k] -= f * e[k] + g * d[k];
                }
                d[j] = w[j * n + (i - 1)];
                w[j * n + i] = 0.0;
            }
        }
        d[i] = h;
    }

    for i in 0..n - 1 {
        w[i * n + (n - 1)] = w[i * n + i];
        w[i * n + i] = 1.0;
        let h = d[i + 1];
        if h != 0.0 {
            let (head, tail) = w.split_at_mut((i + 1) * n);
            let next = &tail[..=i];
            for k in 0..=i {
                d[k] = next[k] / h;
            }
            for j in 0..=i {
                let row = &mut head[j * n..j * n + i + 1];
                let g: f64 = next.iter().zip(row.iter()).map(|(a, b)| a * b).sum();
                for (r, dk) in row.iter_mut().zip(d.iter()) {
                    *r -= g * dk;
                }
            }
        }
        for k in 0..=i {
            w[(i + 1) * n + k] = 0.0;
        }
    }
    for j in 0..n {
        d[j] = w[j * n + (n - 1)];
        w[j * n + (n - 1)] = 0.0;
    }
    w[(n - 1) * n + (n - 1)] = 1.0;
    e[0] = 0.0;
}

// Implicit-shift QL on the tridiagonal (d, e); rotations applied to rows of `w`.
fn tql2(n: usize, w: &mut [f64], d: &mut [f64], e: &mut [f64]) -> Result<()> {
    for i in 1..n {
        e[i - 1] = e[i];
    }
    e[n - 1] = 0.0;

    let mut f = 0.0;
    let mut tst1: f64 = 0.0;
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
        if m == n {
            m = n - 1;
        }
        if m > l {
            let mut iter = 0;
            loop {
                iter += 1;
                if iter > 64 {
                    return Err(Error::Numerical("QL iteration did not converge".into()));
                }
                let mut g = d[l];
                let mut p = (d[l + 1] - g) / (2.0 * e[l]);
                let mut r = p.hypot(1.0);
                if p < 0.0 {
                    r = -r;
                }
                d[l] = e[l] / (p + r);
                d[l + 1] = e[l] * (p + r);
                let dl1 = d[l + 1];
                let mut h = g - d[l];
                for di in d.iter_mut().skip(l + 2) {
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
                    g = c * e[i];
                    h = c * p;
                    r = p.hypot(e[i]);
                    e[i + 1] = s * r;
                    s = e[i] / r;
                    c = p / r;
                    p = c * d[i] - s * g;
                    d[i + 1] = h + s * (c * g + s * d[i]);

                    let (lo, hi) = w.split_at_mut((i + 1) * n);
                    let row_i = &mut lo[i * n..];
                    let row_i1 = &mut hi[..n];
                    for (a, b) in row_i.iter_mut().zip(row_i1.iter_mut()) {
                        let hb = *b;
                        *b = s * *a + c * hb;
                        *a = c * *a - s * hb;
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

    for i in 0..n.saturating_sub(1) {
        let mut k = i;
        let mut p = d[i];
        for (j, &dj) in d.iter().enumerate().skip(i + 1) {
            if dj < p {
                k = j;
                p = dj;
            }
        }
        if k != i {
            d[k] = d[i];
            d[i] = p;
            let (lo, hi) = w.split_at_mut(k * n);
            lo[i * n..(i + 1) * n].swap_with_slice(&mut hi[..n]);
        }
    }
    Ok(())
}

/// Determinant of a positive semi-definite matrix via an LDLᵀ factorization.
/// Returns 0 once a pivot falls below the singularity tolerance.
pub fn det_psd(a: &Array2<f64>) -> Result<f64> {
    let view = a.view();
    let n = check_square(&view)?;
    check_finite(&view, "det_psd input")?;
    if n == 0 {
        return Ok(1.0);
    }
    let scale = (0..n).map(|i| a[[i, i]].abs()).fold(0.0, f64::max);
    if scale == 0.0 {
        return Ok(0.0);
    }
    let mut m = a.clone();
    let mut det = 1.0;
    for k in 0..n {
        let pivot = m[[k, k]];
        if pivot <= tol::PIVOT * scale {
            return Ok(0.0);
        }
        det *= pivot;
        for i in (k + 1)..n {
            let factor = m[[i, k]] / pivot;
            if factor == 0.0 {
                continue;
            }
            for j in (k + 1)..=i {
                m[[i, j]] -= factor * m[[j, k]];
            }
        }
    }
    Ok(det)
}

/// Dot product with four independent accumulators.
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len().min(b.len());
    let (a, b) = (&a[..n], &b[..n]);
    let mut acc = [0.0f64; 4];
    let mut ca = a.chunks_exact(4);
    let mut cb = b.chunks_exact(4);
    for (x, y) in (&mut ca).zip(&mut cb) {
        acc[0] += x[0] * y[0];
        acc[1] += x[1] * y[1];
        acc[2] += x[2] * y[2];
        acc[3] += x[3] * y[3];
    }
    let tail: f64 = ca.remainder().iter().zip(cb.remainder()).map(|(x, y)| x * y).sum();
    (acc[0] + acc[1]) + (acc[2] + acc[3]) + tail
}

/// Lower Cholesky factor of a symmetric positive definite matrix.
pub fn cholesky(a: &Array2<f64>) -> Result<Array2<f64>> {
    let view = a.view();
    let n = check_square(&view)?;
    let mut l = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..=i {
            let v = a[[i, j]] - dot(&l[i * n..i * n + j], &l[j * n..j * n + j]);
            if i == j {
                if !(v > 0.0) || !v.is_finite() {
                    return Err(Error::Numerical(format!(
                        "matrix is not positive definite (pivot {v:e} at {i})"
                    )));
                }
                l[i * n + i] = v.sqrt();
            } else {
                l[i * n + j] = v / l[j * n + j];
            }
        }
    }
    Ok(Array2::from_shape_vec((n, n), l).expect("shape matches"))
}

/// Solves (L Lᵀ) x = b for a lower Cholesky factor L.
pub fn cholesky_solve(l: &Array2<f64>, b: &Array1<f64>) -> Array1<f64> {
    let n = l.nrows();
    let mut y = b.to_vec();
    for i in 0..n {
        let mut s = y[i];
        for k in 0..i {
            s -= l[[i, k]] * y[k];
        }
        y[i] = s / l[[i, i]];
    }
    for i in (0..n).rev() {
        let mut s = y[i];
        for k in (i + 1)..n {
            s -= l[[k, i]] * y[k];
        }
        y[i] = s / l[[i, i]];
    }
    Array1::from(y)
}

/// Solves L y = b (forward substitution) for lower-triangular L.
pub fn solve_lower(l: &Array2<f64>, b: &Array1<f64>) -> Array1<f64> {
    let n = l.nrows();
    let mut y = b.to_vec();
    for i in 0..n {
        let mut s = y[i];
        for k in 0..i {
            s -= l[[i, k]] * y[k];
        }
        y[i] = s / l[[i, i]];
    }
    Array1::from(y)
}

/// Solves Lᵀ x = b (back substitution) for lower-triangular L.
pub fn solve_lower_transpose(l: &Array2<f64>, b: &Array1<f64>) -> Array1<f64> {
    let n = l.nrows();
    let mut x = b.to_vec();
    for i in (0..n).rev() {
        let mut s = x[i];
        for k in (i + 1)..n {
            s -= l[[k, i]] * x[k];
        }
        x[i] = s / l[[i, i]];
    }
    Array1::from(x)
}

/// Orthonormalizes `vectors` in place with modified Gram-Schmidt, dropping any
/// vector whose residual norm falls below the tolerance.
pub fn gram_schmidt(vectors: &mut Vec<Vec<f64>>) {
    let mut out: Vec<Vec<f64>> = Vec::with_capacity(vectors.len());
    for mut v in vectors.drain(..) {
        for q in &out {
            let proj: f64 = v.iter().zip(q).map(|(a, b)| a * b).sum();
            for (x, qx) in v.iter_mut().zip(q) {
                *x -= proj * qx;
            }
        }
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > tol::GRAM_SCHMIDT {
            v.iter_mut().for_each(|x| *x /= norm);
            out.push(v);
        }
    }
    *vectors = out;
}

/// Largest absolute entry.
pub fn max_abs(a: &Array2<f64>) -> f64 {
    a.iter().fold(0.0, |m, v| m.max(v.abs()))
}
