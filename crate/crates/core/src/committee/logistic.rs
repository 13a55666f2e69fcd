//! L2-regularized logistic regression fitted by damped Newton iterations.

use ndarray::{Array1, Array2};

use super::ModelParams;
use crate::error::Result;
use crate::linalg;

fn log1p_exp(z: f64) -> f64 {
    if z > 0.0 {
        z + (-z).exp().ln_1p()
    } else {
        z.exp().ln_1p()
    }
}

fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// Returns `[bias, w_1..w_d]` for targets in {-1, +1} and whether the gradient
/// tolerance was reached.
pub(super) fn fit(x: &Array2<f64>, t: &[f64], params: &ModelParams) -> Result<(Array1<f64>, bool)> {
    let (n, d) = x.dim();
    let nf = n as f64;
    let lambda = params.logistic_l2;
    let mut w = Array1::<f64>::zeros(d + 1);

    let margins = |w: &Array1<f64>| -> Vec<f64> {
        (0..n)
            .map(|i| t[i] * (w[0] + x.row(i).dot(&w.slice(ndarray::s![1..]))))
            .collect()
    };
    let objective = |w: &Array1<f64>, m: &[f64]| -> f64 {
        let loss: f64 = m.iter().map(|&z| log1p_exp(-z)).sum::<f64>() / nf;
        let reg: f64 = w.iter().skip(1).map(|v| v * v).sum::<f64>();
        loss + 0.5 * lambda * reg
    };

    let mut m = margins(&w);
    let mut obj = objective(&w, &m);
    for _ in 0..params.logistic_max_iter {
        let mut grad = Array1::<f64>::zeros(d + 1);
        let mut hess = Array2::<f64>::zeros((d + 1, d + 1));
        for i in 0..n {
            let p = sigmoid(-m[i]);
            let coef = -t[i] * p / nf;
            let curv = p * (1.0 - p) / nf;
            grad[0] += coef;
            hess[[0, 0]] += curv;
            let row = x.row(i);
            for a in 0..d {
                grad[a + 1] += coef * row[a];
                hess[[0, a + 1]] += curv * row[a];
                for b in 0..=a {
                    hess[[a + 1, b + 1]] += curv * row[a] * row[b];
                }
            }
        }
        for a in 1..=d {
            grad[a] += lambda * w[a];
            hess[[a, a]] += lambda;
            hess[[a, 0]] = hess[[0, a]];
            for b in 1..a {
                hess[[b, a]] = hess[[a, b]];
            }
        }
        hess[[0, 0]] += 1e-10;

        let gnorm = grad.dot(&grad).sqrt();
        if gnorm < params.logistic_tol {
            return Ok((w, true));
        }

        let step = match linalg::cholesky(&hess) {
            Ok(l) => linalg::cholesky_solve(&l, &grad),
            Err(_) => grad.clone(),
        };
        let decrease = grad.dot(&step);
        let mut eta = 1.0;
        let mut accepted = false;
        for _ in 0..40 {
            let cand = &w - &(&step * eta);
            let cm = margins(&cand);
            let cobj = objective(&cand, &cm);
            if cobj <= obj - 1e-4 * eta * decrease {
                w = cand;
                m = cm;
                obj = cobj;
                accepted = true;
                break;
            }
            eta *= 0.5;
        }
        if !accepted {
            // No further progress at machine precision.
            return Ok((w, gnorm < 1e-4));
        }
    }
    Ok((w, false))
}
