//! Soft-margin SVM dual solved by sequential minimal optimization with
//! second-order working-set selection.

use ndarray::Array2;

const TAU: f64 = 1e-12;

pub(super) struct SmoSolution {
    pub alpha: Vec<f64>,
    pub rho: f64,
    pub converged: bool,
}

/// Solves `min ½ αᵀQα − Σα` s.t. `0 ≤ α ≤ c`, `yᵀα = 0`, with
/// `Q_ij = y_i y_j K_ij`. Decision function: `Σ α_i y_i K(x_i, x) − ρ`.
pub(super) fn smo(gram: &Array2<f64>, y: &[f64], c: f64, eps: f64, max_iter: usize) -> SmoSolution {
    let n = y.len();
    let mut alpha = vec![0.0; n];
    let mut grad = vec![-1.0; n];
    let diag: Vec<f64> = (0..n).map(|i| gram[[i, i]]).collect();
    let upper = |a: f64| a >= c;
    let lower = |a: f64| a <= 0.0;

    let mut converged = false;
    for _ in 0..max_iter {
        // i: maximal violating index from I_up.
        let mut gmax = f64::NEG_INFINITY;
        let mut gmax_idx = usize::MAX;
        for t in 0..n {
            if y[t] > 0.0 {
                if !upper(alpha[t]) && -grad[t] >= gmax {
                    gmax = -grad[t];
                    gmax_idx = t;
                }
            } else if !lower(alpha[t]) && grad[t] >= gmax {
                gmax = grad[t];
                gmax_idx = t;
            }
        }
        let i = gmax_idx;
        let mut gmax2 = f64::NEG_INFINITY;
        let mut gmin_idx = usize::MAX;
        let mut obj_diff_min = f64::INFINITY;
        if i != usize::MAX {
            let ki = gram.row(i);
            for j in 0..n {
                if y[j] > 0.0 {
                    if !lower(alpha[j]) {
                        let grad_diff = gmax + grad[j];
                        if grad[j] >= gmax2 {
                            gmax2 = grad[j];
                        }
                        if grad_diff > 0.0 {
                            // y_i Q_ij = y_j K_ij
                            let quad = diag[i] + diag[j] - 2.0 * y[i] * y[j] * ki[j] * y[i];
                            let quad = if quad > 0.0 { quad } else { TAU };
                            let obj_diff = -(grad_diff * grad_diff) / quad;
                            if obj_diff <= obj_diff_min {
                                gmin_idx = j;
                                obj_diff_min = obj_diff;
                            }
                        }
                    }
                } else if !upper(alpha[j]) {
                    let grad_diff = gmax - grad[j];
                    if -grad[j] >= gmax2 {
                        gmax2 = -grad[j];
                    }
                    if grad_diff > 0.0 {
                        let quad = diag[i] + diag[j] + 2.0 * y[i] * y[j] * ki[j] * y[i];
                        let quad = if quad > 0.0 { quad } else { TAU };
                        let obj_diff = -(grad_diff * grad_diff) / quad;
                        if obj_diff <= obj_diff_min {
                            gmin_idx = j;
                            obj_diff_min = obj_diff;
                        }
                    }
                }
            }
        }
        if i == usize::MAX || gmin_idx == usize::MAX || gmax + gmax2 < eps {
            converged = true;
            break;
        }
        let j = gmin_idx;

        let qij = y[i] * y[j] * gram[[i, j]];
        let (old_i, old_j) = (alpha[i], alpha[j]);
        if y[i] != y[j] {
            let quad = diag[i] + diag[j] + 2.0 * qij;
            let quad = if quad > 0.0 { quad } else { TAU };
            let delta = (-grad[i] - grad[j]) / quad;
            let diff = alpha[i] - alpha[j];
            alpha[i] += delta;
            alpha[j] += delta;
            if diff > 0.0 {
                if alpha[j] < 0.0 {
                    alpha[j] = 0.0;
                    alpha[i] = diff;
                }
            } else if alpha[i] < 0.0 {
                alpha[i] = 0.0;
                alpha[j] = -diff;
            }
            if diff > 0.0 {
                if alpha[i] > c {
                    alpha[i] = c;
                    alpha[j] = c - diff;
                }
            } else if alpha[j] > c {
                alpha[j] = c;
                alpha[i] = c + diff;
            }
        } else {
            let quad = diag[i] + diag[j] - 2.0 * qij;
            let quad = if quad > 0.0 { quad } else { TAU };
            let delta = (grad[i] - grad[j]) / quad;
            let sum = alpha[i] + alpha[j];
            alpha[i] -= delta;
            alpha[j] += delta;
            if sum > c {
                if alpha[i] > c {
                    alpha[i] = c;
                    alpha[j] = sum - c;
                }
            } else if alpha[j] < 0.0 {
                alpha[j] = 0.0;
                alpha[i] = sum;
            }
            if sum > c {
                if alpha[j] > c {
                    alpha[j] = c;
                    alpha[i] = sum - c;
                }
            } else if alpha[i] < 0.0 {
                alpha[i] = 0.0;
                alpha[j] = sum;
            }
        }

        let di = alpha[i] - old_i;
        let dj = alpha[j] - old_j;
        let (ki, kj) = (gram.row(i), gram.row(j));
        for k in 0..n {
            grad[k] += y[k] * (y[i] * ki[k] * di + y[j] * kj[k] * dj);
        }
    }

    let mut ub = f64::INFINITY;
    let mut lb = f64::NEG_INFINITY;
    let mut sum_free = 0.0;
    let mut nr_free = 0usize;
    for i in 0..n {
        let yg = y[i] * grad[i];
        if upper(alpha[i]) {
            if y[i] < 0.0 {
                ub = ub.min(yg);
            } else {
                lb = lb.max(yg);
            }
        } else if lower(alpha[i]) {
            if y[i] > 0.0 {
                ub = ub.min(yg);
            } else {
                lb = lb.max(yg);
            }
        } else {
            nr_free += 1;
            sum_free += yg;
        }
    }
    let rho = if nr_free > 0 {
        sum_free / nr_free as f64
    } else {
        (ub + lb) / 2.0
    };
    SmoSolution {
        alpha,
        rho,
        converged,
    }
}
