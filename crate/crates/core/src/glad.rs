//! GLAD-style EM over committee votes.
//!
//! Each instance i has a difficulty parameter α_i ≥ 0 (larger is easier) and
//! each classifier j an ability β_j ≥ 0. A vote is correct with probability
//! σ(α_i β_j); otherwise it lands uniformly on one of the other K − 1 classes.
//! EM alternates a posterior over the unknown true class with gradient ascent
//! on the expected complete-data log-posterior, parameterized by log α and
//! log β so both stay nonnegative. A zero-mean Gaussian prior on log α and
//! log β keeps the estimate finite: without it the likelihood is unbounded
//! (two agreeing voters can absorb all the ability).

use std::collections::HashMap;

use ndarray::{Array1, Array2};

use crate::committee::VoteMatrix;
use crate::error::{Error, Result};

/// Upper bound applied to σ(α β) so that log(1 − c) stays finite.
pub const CONFIDENCE_CEILING: f64 = 1.0 - 1e-12;

const LOG_PARAM_BOUND: f64 = 20.0;
const MAX_STEP: f64 = 64.0;

#[derive(Debug, Clone, PartialEq)]
pub struct GladConfig {
    pub max_iter: usize,
    pub tol: f64,
    /// Gradient-ascent steps per M-step.
    pub m_step_iter: usize,
    /// Standard deviation of the Gaussian prior on log α and log β.
    /// `f64::INFINITY` gives plain maximum likelihood.
    pub prior_sd: f64,
}

impl Default for GladConfig {
    fn default() -> Self {
        GladConfig {
            max_iter: 100,
            tol: 1e-5,
            m_step_iter: 25,
            prior_sd: 1.0,
        }
    }
}

#[derive(Debug, Clone)]
pub struct GladFit {
    /// Per-instance easiness α_i.
    pub alpha: Array1<f64>,
    /// Per-classifier ability β_j.
    pub beta: Array1<f64>,
    /// c_ij = σ(α_i β_j), capped below 1.
    pub confidence: Array2<f64>,
    /// Posterior over the true class, N × K.
    pub posterior: Array2<f64>,
    /// Marginal log-likelihood of the votes plus the log-prior, after each
    /// EM iteration.
    pub log_posterior: Vec<f64>,
    /// Expected complete-data log-posterior after each M-step.
    pub q_values: Vec<f64>,
    /// The same Q at the start of each M-step, under the same E-step.
    pub q_starts: Vec<f64>,
    pub converged: bool,
}

/// Informativeness score per instance, in [0, 1].
#[derive(Debug, Clone, PartialEq)]
pub struct InfoScores {
    pub mu: Array1<f64>,
}

/// Largest α β that still maps below the confidence ceiling.
const X_CAP: f64 = 27.631_021_115_928_547;

/// (ln σ(x), ln(1 − σ(x))) for x ≥ 0, with x capped at `X_CAP`.
fn log_sigmoid_pair(x: f64) -> (f64, f64) {
    let x = x.min(X_CAP);
    let ln_s = -(-x).exp().ln_1p();
    (ln_s, ln_s - x)
}

fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// Probability that a classifier of ability `beta` labels an instance of
/// easiness `alpha` correctly.
pub fn correctness_prob(alpha: f64, beta: f64) -> Result<f64> {
    if !(alpha >= 0.0) || !(beta >= 0.0) {
        return Err(Error::invalid(format!(
            "alpha and beta must be nonnegative, got ({alpha}, {beta})"
        )));
    }
    Ok(sigmoid(alpha * beta))
}

/// EM state over distinct vote patterns. Instances with identical votes
/// receive identical updates from the same starting point, so each pattern
/// carries one α and a multiplicity.
struct Model {
    votes: Array2<usize>,
    mult: Vec<f64>,
    k: usize,
    ln_km1: f64,
    /// 1 / prior variance; zero without a prior.
    prior_prec: f64,
}

/// Sums `terms` in sorted order, so the result does not depend on the order
/// of the voters.
fn voter_sum(terms: &mut [f64]) -> f64 {
    terms.sort_unstable_by(f64::total_cmp);
    terms.iter().sum()
}

impl Model {
    fn dims(&self) -> (usize, usize) {
        self.votes.dim()
    }

    fn log_prior(&self, a: &[f64], b: &[f64]) -> f64 {
        if self.prior_prec == 0.0 {
            return 0.0;
        }
        let sa: f64 = a.iter().zip(&self.mult).map(|(x, m)| m * x * x).sum();
        let sb = voter_sum(&mut b.iter().map(|x| x * x).collect::<Vec<_>>());
        -0.5 * self.prior_prec * (sa + sb)
    }

    fn confidence(&self, a: &[f64], b: &[f64]) -> Array2<f64> {
        let (n, c) = self.dims();
        Array2::from_shape_fn((n, c), |(i, j)| sigmoid((a[i] + b[j]).exp().min(X_CAP)))
    }

    /// E-step: posterior over the true class and the marginal log-likelihood.
    fn posterior(&self, conf: &Array2<f64>) -> (Array2<f64>, f64) {
        let (n, c) = self.dims();
        let k = self.k;
        let mut post = Array2::zeros((n, k));
        let mut ll = 0.0;
        let mut logp = vec![0.0; k];
        let mut right = vec![0.0; c];
        let mut wrong = vec![0.0; c];
        let mut terms = vec![0.0; c];
        for i in 0..n {
            for j in 0..c {
                right[j] = conf[[i, j]].ln();
                wrong[j] = (1.0 - conf[[i, j]]).ln() - self.ln_km1;
            }
            for (z, lp) in logp.iter_mut().enumerate() {
                for j in 0..c {
                    terms[j] = if self.votes[[i, j]] == z { right[j] } else { wrong[j] };
                }
                *lp = voter_sum(&mut terms);
            }
            let max = logp.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let sum: f64 = logp.iter().map(|v| (v - max).exp()).sum();
            let log_norm = max + sum.ln();
            for z in 0..k {
                post[[i, z]] = (logp[z] - log_norm).exp();
            }
            ll += self.mult[i] * (log_norm - (k as f64).ln());
        }
        (post, ll)
    }

    /// Posterior probability that each vote is correct.
    fn vote_weights(&self, post: &Array2<f64>) -> Array2<f64> {
        let (n, c) = self.dims();
        Array2::from_shape_fn((n, c), |(i, j)| post[[i, self.votes[[i, j]]]])
    }

    fn q_value(&self, w: &Array2<f64>, a: &[f64], b: &[f64]) -> f64 {
        let (n, c) = self.dims();
        let eb: Vec<f64> = b.iter().map(|v| v.exp()).collect();
        let mut q = 0.0;
        let mut terms = vec![0.0; c];
        for i in 0..n {
            let ea = a[i].exp();
            for j in 0..c {
                let (ln_s, ln_not) = log_sigmoid_pair(ea * eb[j]);
                let wij = w[[i, j]];
                terms[j] = wij * ln_s + (1.0 - wij) * (ln_not - self.ln_km1);
            }
            q += self.mult[i] * (voter_sum(&mut terms) - (self.k as f64).ln());
        }
        q + self.log_prior(a, b)
    }

    fn gradient(&self, w: &Array2<f64>, a: &[f64], b: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let (n, c) = self.dims();
        let eb: Vec<f64> = b.iter().map(|v| v.exp()).collect();
        let mut ga = vec![0.0; n];
        let mut gb = vec![0.0; c];
        let mut terms = vec![0.0; c];
        for i in 0..n {
            let ea = a[i].exp();
            for j in 0..c {
                let x = ea * eb[j];
                let g = if x >= X_CAP { 0.0 } else { (w[[i, j]] - sigmoid(x)) * x };
                terms[j] = g;
                gb[j] += self.mult[i] * g;
            }
            ga[i] = voter_sum(&mut terms) - self.prior_prec * a[i];
        }
        for (g, x) in gb.iter_mut().zip(b) {
            *g -= self.prior_prec * x;
        }
        (ga, gb)
    }

    /// Gradient ascent with backtracking. Never lowers Q.
    fn m_step(&self, w: &Array2<f64>, a: &mut [f64], b: &mut [f64], steps: usize, eta: &mut f64) -> (f64, f64) {
        let start = self.q_value(w, a, b);
        let mut q = start;
        for _ in 0..steps {
            let (ga, gb) = self.gradient(w, a, b);
            let sq: f64 = ga.iter().zip(&self.mult).map(|(g, m)| m * g * g).sum::<f64>()
                + voter_sum(&mut gb.iter().map(|g| g * g).collect::<Vec<_>>());
            if sq < 1e-24 {
                break;
            }
            let mut progressed = false;
            let mut moved = false;
            for _ in 0..40 {
                let na: Vec<f64> = a
                    .iter()
                    .zip(&ga)
                    .map(|(x, g)| (x + *eta * g).clamp(-LOG_PARAM_BOUND, LOG_PARAM_BOUND))
                    .collect();
                let nb: Vec<f64> = b
                    .iter()
                    .zip(&gb)
                    .map(|(x, g)| (x + *eta * g).clamp(-LOG_PARAM_BOUND, LOG_PARAM_BOUND))
                    .collect();
                let nq = self.q_value(w, &na, &nb);
                if nq >= q + 1e-4 * *eta * sq {
                    a.copy_from_slice(&na);
                    b.copy_from_slice(&nb);
                    moved = true;
                    progressed = nq - q > 1e-12 * (1.0 + q.abs());
                    q = nq;
                    *eta = (*eta * 2.0).min(MAX_STEP);
                    break;
                }
                *eta *= 0.5;
            }
            if !moved {
                *eta = 1.0;
            }
            if !progressed {
                break;
            }
        }
        (start, q)
    }
}

/// Fits α and β to a vote matrix with labels in `0..k`.
pub fn em_fit(votes: &VoteMatrix, k: usize, config: &GladConfig) -> Result<GladFit> {
    let (n, c) = votes.votes.dim();
    if n < 1 {
        return Err(Error::invalid("vote matrix has no instances"));
    }
    if c < 2 {
        return Err(Error::invalid("GLAD needs at least two voters"));
    }
    if k < 2 {
        return Err(Error::TooFewClasses { found: k });
    }
    if let Some(&bad) = votes.votes.iter().find(|&&v| v >= k) {
        return Err(Error::invalid(format!("vote {bad} outside 0..{k}")));
    }
    if !(config.prior_sd > 0.0) {
        return Err(Error::invalid("prior_sd must be positive"));
    }

    let mut pattern_of = Vec::with_capacity(n);
    let mut index: HashMap<Vec<usize>, usize> = HashMap::new();
    let mut rows: Vec<usize> = Vec::new();
    let mut mult: Vec<f64> = Vec::new();
    for (i, row) in votes.votes.rows().into_iter().enumerate() {
        let id = *index.entry(row.to_vec()).or_insert_with(|| {
            rows.push(i);
            mult.push(0.0);
            rows.len() - 1
        });
        mult[id] += 1.0;
        pattern_of.push(id);
    }
    let unique = Array2::from_shape_fn((rows.len(), c), |(p, j)| votes.votes[[rows[p], j]]);
    let model = Model {
        votes: unique,
        mult,
        k,
        ln_km1: ((k - 1) as f64).ln(),
        prior_prec: 1.0 / (config.prior_sd * config.prior_sd),
    };
    let mut a = vec![0.0; rows.len()];
    let mut b = vec![0.0; c];
    let mut eta = 1.0;
    let mut log_posterior = Vec::new();
    let mut q_values = Vec::new();
    let mut q_starts = Vec::new();
    let mut converged = false;

    let mut conf = model.confidence(&a, &b);
    let (mut post, ll0) = model.posterior(&conf);
    let mut obj = ll0 + model.log_prior(&a, &b);
    log_posterior.push(obj);
    for _ in 0..config.max_iter {
        let w = model.vote_weights(&post);
        let (q0, q) = model.m_step(&w, &mut a, &mut b, config.m_step_iter, &mut eta);
        q_starts.push(q0);
        q_values.push(q);
        conf = model.confidence(&a, &b);
        let (p, ll) = model.posterior(&conf);
        post = p;
        let new_obj = ll + model.log_prior(&a, &b);
        log_posterior.push(new_obj);
        let gain = (new_obj - obj) / n as f64;
        obj = new_obj;
        if gain < config.tol {
            converged = true;
            break;
        }
    }

    let expand = |m: &Array2<f64>| Array2::from_shape_fn((n, m.ncols()), |(i, j)| m[[pattern_of[i], j]]);
    Ok(GladFit {
        alpha: pattern_of.iter().map(|&p| a[p].exp()).collect(),
        beta: b.iter().map(|v| v.exp()).collect(),
        confidence: expand(&conf),
        posterior: expand(&post),
        log_posterior,
        q_values,
        q_starts,
        converged,
    })
}

/// Confidence-weighted class probabilities: each vote puts c_ij on its own
/// class and spreads 1 − c_ij evenly over the remaining K − 1 classes.
pub fn class_probabilities(fit: &GladFit, votes: &VoteMatrix, k: usize) -> Result<Array2<f64>> {
    let (n, c) = votes.votes.dim();
    if fit.confidence.dim() != (n, c) {
        return Err(Error::Dimension(format!(
            "confidence is {:?}, votes are {:?}",
            fit.confidence.dim(),
            (n, c)
        )));
    }
    confidence_weighted(&fit.confidence, &votes.votes, k)
}

pub(crate) fn confidence_weighted(conf: &Array2<f64>, votes: &Array2<usize>, k: usize) -> Result<Array2<f64>> {
    let (n, c) = votes.dim();
    if k < 2 {
        return Err(Error::TooFewClasses { found: k });
    }
    if let Some(&v) = votes.iter().find(|&&v| v >= k) {
        return Err(Error::invalid(format!("vote {v} outside 0..{k}")));
    }
    let mut p = Array2::zeros((n, k));
    let km1 = (k - 1) as f64;
    let mut terms = vec![0.0; c];
    for i in 0..n {
        for z in 0..k {
            for j in 0..c {
                let cij = conf[[i, j]];
                terms[j] = if votes[[i, j]] == z { cij } else { (1.0 - cij) / km1 };
            }
            p[[i, z]] = voter_sum(&mut terms);
        }
    }
    p.mapv_inplace(|v| v / c as f64);
    Ok(p)
}

/// Base-K entropy of each row of `p`, with 0·log 0 = 0.
pub fn informativeness(p: &Array2<f64>, k: usize) -> Result<InfoScores> {
    if p.ncols() != k {
        return Err(Error::Dimension(format!("{} columns for {k} classes", p.ncols())));
    }
    if k < 2 {
        return Err(Error::TooFewClasses { found: k });
    }
    let ln_k = (k as f64).ln();
    let mut mu = Array1::zeros(p.nrows());
    for (i, row) in p.rows().into_iter().enumerate() {
        let sum: f64 = row.sum();
        if (sum - 1.0).abs() > 1e-6 || row.iter().any(|&v| v < -1e-12) {
            return Err(Error::invalid(format!("row {i} is not a probability vector (sum {sum})")));
        }
        let h: f64 = row
            .iter()
            .filter(|&&v| v > 0.0)
            .map(|&v| -v * v.ln() / ln_k)
            .sum();
        mu[i] = h.clamp(0.0, 1.0);
    }
    Ok(InfoScores { mu })
}

/// Full informativeness pipeline over a vote matrix.
pub fn info_scores(votes: &VoteMatrix, k: usize, config: &GladConfig) -> Result<(GladFit, InfoScores)> {
    let fit = em_fit(votes, k, config)?;
    let p = class_probabilities(&fit, votes, k)?;
    let info = informativeness(&p, k)?;
    Ok((fit, info))
}
