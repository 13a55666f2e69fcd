//! Binary Gaussian process classification with a logistic likelihood and the
//! Laplace approximation to the posterior.

use ndarray::{Array1, Array2};

use crate::error::Result;
use crate::linalg;

pub(super) struct LaplaceMode {
    /// ∇ log p(y | f̂) at the mode; the predictive latent mean is `k*ᵀ` times this.
    pub grad_log_lik: Array1<f64>,
    pub converged: bool,
}

fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

fn log_sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        -(-z).exp().ln_1p()
    } else {
        z - z.exp().ln_1p()
    }
}

/// Median of all pairwise Euclidean distances; 1 when every point coincides.
pub(super) fn median_distance(x: &Array2<f64>) -> f64 {
    let n = x.nrows();
    let mut d = Vec::with_capacity(n * n.saturating_sub(1) / 2);
    for i in 0..n {
        for j in 0..i {
            let diff = &x.row(i) - &x.row(j);
            d.push(diff.dot(&diff).sqrt());
        }
    }
    if d.is_empty() {
        return 1.0;
    }
    d.sort_by(f64::total_cmp);
    let mid = d.len() / 2;
    let m = if d.len() % 2 == 0 {
        0.5 * (d[mid - 1] + d[mid])
    } else {
        d[mid]
    };
    if m > 0.0 {
        m
    } else {
        1.0
    }
}

/// Newton iterations for the posterior mode, targets in {-1, +1}.
pub(super) fn laplace_mode(gram: &Array2<f64>, y: &[f64], max_iter: usize) -> Result<LaplaceMode> {
    let n = y.len();
    let targets: Array1<f64> = y.iter().map(|&v| if v > 0.0 { 1.0 } else { 0.0 }).collect();
    let psi = |a: &Array1<f64>, f: &Array1<f64>| -> f64 {
        -0.5 * a.dot(f) + f.iter().zip(y).map(|(fi, yi)| log_sigmoid(yi * fi)).sum::<f64>()
    };

    let mut a = Array1::<f64>::zeros(n);
    let mut f = Array1::<f64>::zeros(n);
    let mut obj = psi(&a, &f);
    let mut converged = false;
    for _ in 0..max_iter {
        let pi: Array1<f64> = f.mapv(sigmoid);
        let w: Array1<f64> = pi.mapv(|p| (p * (1.0 - p)).max(1e-300));
        let sw = w.mapv(f64::sqrt);
        let mut b_mat = Array2::<f64>::eye(n);
        for i in 0..n {
            for j in 0..n {
                b_mat[[i, j]] += sw[i] * gram[[i, j]] * sw[j];
            }
        }
        let l = linalg::cholesky(&b_mat)?;
        let b = &w * &f + &(&targets - &pi);
        let kb = gram.dot(&b);
        let inner = linalg::solve_lower_transpose(&l, &linalg::solve_lower(&l, &(&sw * &kb)));
        let a_new = &b - &(&sw * &inner);

        // Damped step keeps the objective non-decreasing.
        let mut step = 1.0;
        let mut next = None;
        for _ in 0..20 {
            let cand = &a + &((&a_new - &a) * step);
            let f_cand = gram.dot(&cand);
            let o = psi(&cand, &f_cand);
            if o >= obj - 1e-12 {
                next = Some((cand, f_cand, o));
                break;
            }
            step *= 0.5;
        }
        let Some((a_c, f_c, o)) = next else {
            converged = true;
            break;
        };
        let gain = o - obj;
        a = a_c;
        f = f_c;
        obj = o;
        if gain.abs() < 1e-6 * (1.0 + obj.abs()) {
            converged = true;
            break;
        }
    }
    let pi = f.mapv(sigmoid);
    Ok(LaplaceMode {
        grad_log_lik: &targets - &pi,
        converged,
    })
}
