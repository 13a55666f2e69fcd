//! Similarity matrices over representativeness vectors.

use std::fmt;
use std::str::FromStr;

use ndarray::Array2;

use crate::error::{Error, Result};
use crate::representativeness::RepVectors;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum KernelKind {
    Laplacian,
    Gaussian,
    Sigmoid,
    Poly,
    Heat,
}

impl KernelKind {
    pub const ALL: [KernelKind; 5] = [
        KernelKind::Laplacian,
        KernelKind::Gaussian,
        KernelKind::Sigmoid,
        KernelKind::Poly,
        KernelKind::Heat,
    ];

    pub fn name(self) -> &'static str {
        match self {
            KernelKind::Laplacian => "laplacian",
            KernelKind::Gaussian => "gaussian",
            KernelKind::Sigmoid => "sigmoid",
            KernelKind::Poly => "poly",
            KernelKind::Heat => "heat",
        }
    }
}

impl fmt::Display for KernelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for KernelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        KernelKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::Unknown {
                what: "kernel",
                name: s.to_string(),
            })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelParams {
    pub kind: KernelKind,
    pub c0: f64,
    pub d0: i32,
}

impl Default for KernelParams {
    fn default() -> Self {
        KernelParams {
            kind: KernelKind::Laplacian,
            c0: 1.0,
            d0: 3,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SimilarityMatrix {
    pub s: Array2<f64>,
    pub kind: KernelKind,
    pub gamma: f64,
    /// Bandwidth for gaussian and heat; the mean pairwise distance of the rows.
    pub sigma: Option<f64>,
    pub c0: f64,
    pub d0: i32,
}

const SIGMA_FLOOR: f64 = 1e-12;

fn l1(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum()
}

fn sq_l2(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Mean Euclidean distance over unordered pairs of rows, floored away from 0.
pub fn mean_pairwise_distance(rows: &[Vec<f64>]) -> f64 {
    let n = rows.len();
    if n < 2 {
        return SIGMA_FLOOR;
    }
    let mut total = 0.0;
    for i in 0..n {
        for j in (i + 1)..n {
            total += sq_l2(&rows[i], &rows[j]).sqrt();
        }
    }
    (total / (n * (n - 1) / 2) as f64).max(SIGMA_FLOOR)
}

/// Builds the N × N similarity matrix with γ = 1/κ.
pub fn similarity_matrix(rep: &RepVectors, params: &KernelParams, kappa: usize) -> Result<SimilarityMatrix> {
    let n = rep.r.nrows();
    if n == 0 {
        return Err(Error::invalid("similarity matrix needs at least one row"));
    }
    if kappa == 0 {
        return Err(Error::invalid("kappa must be at least 1"));
    }
    if rep.r.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("representativeness vectors"));
    }
    let rows: Vec<Vec<f64>> = rep.r.rows().into_iter().map(|r| r.to_vec()).collect();
    let gamma = 1.0 / kappa as f64;
    let sigma = match params.kind {
        KernelKind::Gaussian | KernelKind::Heat => Some(mean_pairwise_distance(&rows)),
        _ => None,
    };
    let (c0, d0) = (params.c0, params.d0);
    let entry = |a: &[f64], b: &[f64]| -> f64 {
        match params.kind {
            KernelKind::Laplacian => (-gamma * l1(a, b)).exp(),
            KernelKind::Gaussian => {
                let s = sigma.unwrap_or(1.0);
                (-sq_l2(a, b) / (2.0 * s * s)).exp()
            }
            KernelKind::Heat => {
                let s = sigma.unwrap_or(1.0);
                (-sq_l2(a, b) / (s * s)).exp()
            }
            KernelKind::Sigmoid => (gamma * dot(a, b) + c0).tanh(),
            KernelKind::Poly => (gamma * dot(a, b) + c0).powi(d0),
        }
    };
    let mut s = Array2::zeros((n, n));
    for i in 0..n {
        for j in i..n {
            let v = entry(&rows[i], &rows[j]);
            s[[i, j]] = v;
            s[[j, i]] = v;
        }
    }
    Ok(SimilarityMatrix {
        s,
        kind: params.kind,
        gamma,
        sigma,
        c0,
        d0,
    })
}
