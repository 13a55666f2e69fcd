//! Linear discriminant analysis with a pooled within-class covariance.

use ndarray::{Array1, Array2};

use crate::error::{Error, Result};
use crate::linalg;

#[derive(Debug, Clone)]
pub(crate) struct LdaModel {
    /// Σ⁻¹ μ_k, one column per class.
    coef: Array2<f64>,
    /// -½ μ_kᵀ Σ⁻¹ μ_k + ln π_k per class.
    intercept: Array1<f64>,
}

pub(super) fn fit(x: &Array2<f64>, y: &[usize], k: usize, ridge_scale: f64) -> Result<LdaModel> {
    let (n, d) = x.dim();
    let mut counts = vec![0usize; k];
    let mut means = Array2::<f64>::zeros((k, d));
    for (i, &c) in y.iter().enumerate() {
        counts[c] += 1;
        means.row_mut(c).scaled_add(1.0, &x.row(i));
    }
    for c in 0..k {
        if counts[c] > 0 {
            means.row_mut(c).mapv_inplace(|v| v / counts[c] as f64);
        }
    }
    let present = counts.iter().filter(|&&c| c > 0).count();

    let mut cov = Array2::<f64>::zeros((d, d));
    for (i, &c) in y.iter().enumerate() {
        let diff = &x.row(i) - &means.row(c);
        for a in 0..d {
            for b in 0..=a {
                cov[[a, b]] += diff[a] * diff[b];
            }
        }
    }
    let dof = if n > present { (n - present) as f64 } else { n as f64 };
    for a in 0..d {
        for b in 0..=a {
            cov[[a, b]] /= dof;
            cov[[b, a]] = cov[[a, b]];
        }
    }

    let trace: f64 = (0..d).map(|a| cov[[a, a]]).sum();
    let mut ridge = ridge_scale * if trace > 0.0 { trace / d as f64 } else { 1.0 };
    let chol = loop {
        match linalg::cholesky(&cov) {
            Ok(l) => break l,
            Err(_) if ridge < 1e6 => {
                for a in 0..d {
                    cov[[a, a]] += ridge;
                }
                ridge *= 10.0;
            }
            Err(e) => return Err(Error::Numerical(format!("LDA covariance: {e}"))),
        }
    };

    let mut coef = Array2::zeros((d, k));
    let mut intercept = Array1::zeros(k);
    for c in 0..k {
        if counts[c] == 0 {
            continue;
        }
        let mu = means.row(c).to_owned();
        let s = linalg::cholesky_solve(&chol, &mu);
        intercept[c] = -0.5 * mu.dot(&s) + (counts[c] as f64 / n as f64).ln();
        coef.column_mut(c).assign(&s);
    }
    Ok(LdaModel { coef, intercept })
}

impl LdaModel {
    pub(super) fn scores(&self, x: &Array2<f64>) -> Array2<f64> {
        let mut s = x.dot(&self.coef);
        s += &self.intercept;
        s
    }
}
