//! The committee of classifiers whose votes feed the GLAD model, plus the
//! SVM-RBF evaluation classifier.
//!
//! LDA is natively multi-class. Every other kind is a binary learner: with
//! K = 2 a single model is trained with class 1 as the positive class and the
//! scores are `[-f(x), f(x)]`; with K > 2 one model per class is trained
//! one-vs-rest.

mod gpc;
mod kernel;
mod lda;
mod logistic;
mod svm;

use std::fmt;
use std::str::FromStr;

use ndarray::{Array1, Array2, ArrayView2};

use crate::error::{Error, Result};

pub use kernel::Kernel;

/// Score assigned to a class that never appeared in the training labels.
const ABSENT_CLASS_SCORE: f64 = -1e12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ModelKind {
    Logistic,
    Lda,
    SvmLinear,
    SvmRbf,
    SvmPoly,
    Gpc,
}

impl ModelKind {
    pub const ALL: [ModelKind; 6] = [
        ModelKind::Logistic,
        ModelKind::Lda,
        ModelKind::SvmLinear,
        ModelKind::SvmRbf,
        ModelKind::SvmPoly,
        ModelKind::Gpc,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ModelKind::Logistic => "logistic",
            ModelKind::Lda => "lda",
            ModelKind::SvmLinear => "svm_linear",
            ModelKind::SvmRbf => "svm_rbf",
            ModelKind::SvmPoly => "svm_poly",
            ModelKind::Gpc => "gpc",
        }
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ModelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ModelKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::Unknown {
                what: "classifier",
                name: s.to_string(),
            })
    }
}

/// Hyperparameters shared by all committee members.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelParams {
    pub logistic_l2: f64,
    pub logistic_max_iter: usize,
    pub logistic_tol: f64,
    pub lda_ridge: f64,
    pub svm_c: f64,
    pub svm_tol: f64,
    pub svm_max_iter: usize,
    /// RBF / polynomial gamma; `None` means 1/d.
    pub gamma: Option<f64>,
    pub poly_degree: i32,
    pub poly_coef0: f64,
    pub gpc_max_iter: usize,
}

impl Default for ModelParams {
    fn default() -> Self {
        ModelParams {
            logistic_l2: 1e-4,
            logistic_max_iter: 500,
            logistic_tol: 1e-6,
            lda_ridge: 1e-6,
            svm_c: 1.0,
            svm_tol: 1e-3,
            svm_max_iter: 200_000,
            gamma: None,
            poly_degree: 3,
            poly_coef0: 1.0,
            gpc_max_iter: 50,
        }
    }
}

impl ModelParams {
    fn gamma_for(&self, dim: usize) -> f64 {
        self.gamma.unwrap_or(1.0 / dim.max(1) as f64)
    }
}

#[derive(Debug, Clone)]
enum Inner {
    Lda(lda::LdaModel),
    /// Affine scores: `[1, x] · weights`, one column per binary model.
    Linear { weights: Array2<f64> },
    /// `K(x, support) · coef + bias`, one column per binary model.
    KernelMachine {
        kernel: Kernel,
        support: Array2<f64>,
        coef: Array2<f64>,
        bias: Array1<f64>,
    },
}

/// A fitted classifier.
#[derive(Debug, Clone)]
pub struct TrainedModel {
    pub kind: ModelKind,
    pub class_count: usize,
    pub dim: usize,
    /// False when an iterative solver stopped at its iteration cap.
    pub converged: bool,
    inner: Inner,
    /// Classes with no training example; their scores are pinned very low.
    absent: Vec<bool>,
}

/// Binary targets (+1 / -1) for the one-vs-rest problem of `class`.
fn ovr_targets(y: &[usize], class: usize) -> Vec<f64> {
    y.iter().map(|&c| if c == class { 1.0 } else { -1.0 }).collect()
}

/// Fits a classifier of the given kind on labels in `0..k`.
pub fn fit(kind: ModelKind, x: &Array2<f64>, y: &[usize], k: usize, params: &ModelParams) -> Result<TrainedModel> {
    if x.nrows() != y.len() {
        return Err(Error::Dimension(format!("{} rows but {} labels", x.nrows(), y.len())));
    }
    if k < 2 {
        return Err(Error::TooFewClasses { found: k });
    }
    if let Some(&bad) = y.iter().find(|&&c| c >= k) {
        return Err(Error::invalid(format!("label {bad} outside 0..{k}")));
    }
    let mut present = vec![false; k];
    for &c in y {
        present[c] = true;
    }
    let distinct = present.iter().filter(|&&p| p).count();
    if distinct < 2 {
        return Err(Error::TooFewClasses { found: distinct });
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("training features"));
    }
    let dim = x.ncols();
    let absent: Vec<bool> = present.iter().map(|p| !p).collect();

    // Binary problems: one (class 1 positive) for K = 2, else one per present class.
    let problems: Vec<Option<Vec<f64>>> = if k == 2 {
        vec![Some(ovr_targets(y, 1))]
    } else {
        (0..k)
            .map(|c| present[c].then(|| ovr_targets(y, c)))
            .collect()
    };

    let mut converged = true;
    let inner = match kind {
        ModelKind::Lda => Inner::Lda(lda::fit(x, y, k, params.lda_ridge)?),
        ModelKind::Logistic => {
            let mut weights = Array2::zeros((dim + 1, problems.len()));
            for (col, targets) in problems.iter().enumerate() {
                if let Some(t) = targets {
                    let (w, ok) = logistic::fit(x, t, params)?;
                    converged &= ok;
                    weights.column_mut(col).assign(&w);
                }
            }
            Inner::Linear { weights }
        }
        ModelKind::SvmLinear | ModelKind::SvmRbf | ModelKind::SvmPoly => {
            let gamma = params.gamma_for(dim);
            let kernel = match kind {
                ModelKind::SvmLinear => Kernel::Linear,
                ModelKind::SvmRbf => Kernel::Rbf { gamma },
                _ => Kernel::Poly {
                    gamma,
                    degree: params.poly_degree,
                    coef0: params.poly_coef0,
                },
            };
            let gram = kernel.gram(x);
            let mut coef = Array2::zeros((x.nrows(), problems.len()));
            let mut bias = Array1::zeros(problems.len());
            for (col, targets) in problems.iter().enumerate() {
                if let Some(t) = targets {
                    let sol = svm::smo(&gram, t, params.svm_c, params.svm_tol, params.svm_max_iter);
                    converged &= sol.converged;
                    for i in 0..t.len() {
                        coef[[i, col]] = sol.alpha[i] * t[i];
                    }
                    bias[col] = -sol.rho;
                }
            }
            if kind == ModelKind::SvmLinear {
                // Collapse to primal weights.
                let w = x.t().dot(&coef);
                let mut weights = Array2::zeros((dim + 1, problems.len()));
                weights.row_mut(0).assign(&bias);
                weights.slice_mut(ndarray::s![1.., ..]).assign(&w);
                Inner::Linear { weights }
            } else {
                Inner::KernelMachine {
                    kernel,
                    support: x.clone(),
                    coef,
                    bias,
                }
            }
        }
        ModelKind::Gpc => {
            let lengthscale = gpc::median_distance(x);
            let kernel = Kernel::Rbf {
                gamma: 1.0 / (2.0 * lengthscale * lengthscale),
            };
            let gram = kernel.gram(x);
            let mut coef = Array2::zeros((x.nrows(), problems.len()));
            for (col, targets) in problems.iter().enumerate() {
                if let Some(t) = targets {
                    let sol = gpc::laplace_mode(&gram, t, params.gpc_max_iter)?;
                    converged &= sol.converged;
                    coef.column_mut(col).assign(&sol.grad_log_lik);
                }
            }
            Inner::KernelMachine {
                kernel,
                support: x.clone(),
                coef,
                bias: Array1::zeros(problems.len()),
            }
        }
    };

    Ok(TrainedModel {
        kind,
        class_count: k,
        dim,
        converged,
        inner,
        absent,
    })
}

impl TrainedModel {
    /// Per-class decision scores, shape `m × K`. Larger means more likely.
    pub fn decision_scores(&self, x: &Array2<f64>) -> Result<Array2<f64>> {
        if x.ncols() != self.dim {
            return Err(Error::Dimension(format!(
                "model trained on {} features, got {}",
                self.dim,
                x.ncols()
            )));
        }
        let raw = match &self.inner {
            Inner::Lda(m) => return Ok(self.mask_absent(m.scores(x))),
            Inner::Linear { weights } => {
                let mut out = x.dot(&weights.slice(ndarray::s![1.., ..]));
                out += &weights.row(0);
                out
            }
            Inner::KernelMachine {
                kernel,
                support,
                coef,
                bias,
            } => {
                let mut out = kernel.cross(x, support).dot(coef);
                out += bias;
                out
            }
        };
        let scores = if self.class_count == 2 {
            let mut s = Array2::zeros((x.nrows(), 2));
            for (i, f) in raw.column(0).iter().enumerate() {
                s[[i, 0]] = -f;
                s[[i, 1]] = *f;
            }
            s
        } else {
            raw
        };
        Ok(self.mask_absent(scores))
    }

    fn mask_absent(&self, mut scores: Array2<f64>) -> Array2<f64> {
        for (c, &gone) in self.absent.iter().enumerate() {
            if gone {
                scores.column_mut(c).fill(ABSENT_CLASS_SCORE);
            }
        }
        scores
    }

    /// Argmax of the decision scores; ties go to the lower class index.
    pub fn predict(&self, x: &Array2<f64>) -> Result<Vec<usize>> {
        Ok(argmax_rows(&self.decision_scores(x)?.view()))
    }
}

pub(crate) fn argmax_rows(scores: &ArrayView2<f64>) -> Vec<usize> {
    scores
        .rows()
        .into_iter()
        .map(|row| {
            let mut best = 0;
            for (c, &v) in row.iter().enumerate().skip(1) {
                if v > row[best] {
                    best = c;
                }
            }
            best
        })
        .collect()
}

/// Committee predictions: one row per instance, one column per member.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VoteMatrix {
    pub votes: Array2<usize>,
}

impl VoteMatrix {
    pub fn instances(&self) -> usize {
        self.votes.nrows()
    }

    pub fn voters(&self) -> usize {
        self.votes.ncols()
    }
}

/// Collects every committee member's prediction on `x`.
pub fn vote_matrix(committee: &[TrainedModel], x: &Array2<f64>) -> Result<VoteMatrix> {
    let first = committee
        .first()
        .ok_or_else(|| Error::invalid("empty committee"))?;
    if x.nrows() == 0 {
        return Err(Error::invalid("no instances to vote on"));
    }
    let mut votes = Array2::zeros((x.nrows(), committee.len()));
    for (j, model) in committee.iter().enumerate() {
        if model.class_count != first.class_count || model.dim != first.dim {
            return Err(Error::Dimension(
                "committee members disagree on class count or feature dimension".into(),
            ));
        }
        for (i, c) in model.predict(x)?.into_iter().enumerate() {
            votes[[i, j]] = c;
        }
    }
    Ok(VoteMatrix { votes })
}

/// Fits every member of the committee on the same data.
pub fn fit_committee(
    members: &[ModelKind],
    x: &Array2<f64>,
    y: &[usize],
    k: usize,
    params: &ModelParams,
) -> Result<Vec<TrainedModel>> {
    members.iter().map(|&kind| fit(kind, x, y, k, params)).collect()
}
