//! L-ensembles and exact sampling from fixed-size determinantal point
//! processes.
//!
//! Sampling is the two-phase spectral algorithm: choose k eigenvectors using
//! elementary symmetric polynomials of the spectrum, then draw one item per
//! eigenvector from the elementary DPP they span.

use log::warn;
use ndarray::{Array1, Array2};
use rand::seq::SliceRandom;
use rand::Rng;

use crate::error::{Error, Result};
use crate::kernels::SimilarityMatrix;
use crate::linalg::{self, tol};

/// A symmetric PSD kernel over the candidate items.
#[derive(Debug, Clone)]
pub struct LEnsemble {
    pub l: Array2<f64>,
}

/// Clamped spectrum of an L-ensemble.
#[derive(Debug, Clone)]
pub struct Spectrum {
    /// Nonnegative eigenvalues, ascending.
    pub values: Vec<f64>,
    /// Eigenvectors, one per column.
    pub vectors: Array2<f64>,
    /// Count of eigenvalues above the zero threshold.
    pub rank: usize,
}

impl LEnsemble {
    pub fn new(l: Array2<f64>) -> Result<Self> {
        let (r, c) = l.dim();
        if r != c {
            return Err(Error::Dimension(format!("L must be square, got {r}x{c}")));
        }
        if l.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("L-ensemble"));
        }
        let scale = linalg::max_abs(&l).max(1.0);
        for i in 0..r {
            for j in (i + 1)..r {
                if (l[[i, j]] - l[[j, i]]).abs() > tol::SYMMETRY * scale {
                    return Err(Error::Numerical(format!("L is not symmetric at ({i}, {j})")));
                }
            }
        }
        Ok(LEnsemble { l })
    }

    pub fn len(&self) -> usize {
        self.l.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.l.nrows() == 0
    }

    /// Eigen-decomposition with tiny negative eigenvalues clamped to zero.
    pub fn spectrum(&self) -> Result<Spectrum> {
        let eig = linalg::sym_eig(&self.l)?;
        let top = eig.values.iter().cloned().fold(0.0, f64::max).max(1.0);
        let mut values = Vec::with_capacity(eig.values.len());
        let mut rank = 0;
        for &v in eig.values.iter() {
            if v < -tol::EIG_NEGATIVE * top {
                return Err(Error::Numerical(format!("L has eigenvalue {v}; expected PSD")));
            }
            if v > tol::EIG_ZERO * top {
                rank += 1;
                values.push(v);
            } else {
                values.push(0.0);
            }
        }
        Ok(Spectrum {
            values,
            vectors: eig.vectors,
            rank,
        })
    }
}

/// L = diag(μ) · S · Sᵀ · diag(μ).
pub fn build_l(mu: &Array1<f64>, s: &SimilarityMatrix) -> Result<LEnsemble> {
    let n = mu.len();
    if s.s.dim() != (n, n) {
        return Err(Error::Dimension(format!(
            "quality vector has {n} entries, similarity is {:?}",
            s.s.dim()
        )));
    }
    if mu.iter().any(|&m| !(m >= 0.0) || !m.is_finite()) {
        return Err(Error::invalid("quality scores must be finite and nonnegative"));
    }
    let b = &s.s * &mu.view().insert_axis(ndarray::Axis(1));
    let mut l = b.dot(&b.t());
    for i in 0..n {
        for j in (i + 1)..n {
            let v = 0.5 * (l[[i, j]] + l[[j, i]]);
            l[[i, j]] = v;
            l[[j, i]] = v;
        }
    }
    LEnsemble::new(l)
}

/// Diagonal of diag(μ) S Sᵀ diag(μ) without forming the full matrix.
pub fn l_diagonal(mu: &Array1<f64>, s: &SimilarityMatrix) -> Result<Array1<f64>> {
    let n = mu.len();
    if s.s.dim() != (n, n) {
        return Err(Error::Dimension(format!(
            "quality vector has {n} entries, similarity is {:?}",
            s.s.dim()
        )));
    }
    Ok(Array1::from_shape_fn(n, |i| {
        let row = s.s.row(i);
        mu[i] * mu[i] * row.dot(&row)
    }))
}

/// Elementary symmetric polynomials e[ℓ][n] of the first n eigenvalues.
#[derive(Debug, Clone)]
pub struct EspTable {
    e: Array2<f64>,
    log_space: bool,
}

const ESP_OVERFLOW: f64 = 1e250;

fn log_add(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    let m = a.max(b);
    m + ((a - m).exp() + (b - m).exp()).ln()
}

impl EspTable {
    pub fn degree(&self) -> usize {
        self.e.nrows() - 1
    }

    pub fn items(&self) -> usize {
        self.e.ncols() - 1
    }

    pub fn is_log_space(&self) -> bool {
        self.log_space
    }

    /// e[ℓ][n]; may overflow to infinity when the table is kept in logs.
    pub fn value(&self, l: usize, n: usize) -> f64 {
        if self.log_space {
            self.e[[l, n]].exp()
        } else {
            self.e[[l, n]]
        }
    }

    pub fn ln_value(&self, l: usize, n: usize) -> f64 {
        if self.log_space {
            self.e[[l, n]]
        } else {
            self.e[[l, n]].ln()
        }
    }
}

/// Fills the ESP table by the forward recursion, switching to log space if
/// any entry grows past 1e250.
pub fn esp(lambdas: &[f64], k: usize) -> Result<EspTable> {
    let n = lambdas.len();
    if k > n {
        return Err(Error::invalid(format!("degree {k} exceeds {n} eigenvalues")));
    }
    if lambdas.iter().any(|&v| !(v >= 0.0) || !v.is_finite()) {
        return Err(Error::invalid("eigenvalues must be finite and nonnegative"));
    }
    let mut e = Array2::zeros((k + 1, n + 1));
    for m in 0..=n {
        e[[0, m]] = 1.0;
    }
    let mut overflow = false;
    'fill: for l in 1..=k {
        for m in 1..=n {
            let v = e[[l, m - 1]] + lambdas[m - 1] * e[[l - 1, m - 1]];
            if !(v <= ESP_OVERFLOW) {
                overflow = true;
                break 'fill;
            }
            e[[l, m]] = v;
        }
    }
    if !overflow {
        return Ok(EspTable { e, log_space: false });
    }

    let mut le = Array2::from_elem((k + 1, n + 1), f64::NEG_INFINITY);
    for m in 0..=n {
        le[[0, m]] = 0.0;
    }
    for l in 1..=k {
        for m in 1..=n {
            let lam = lambdas[m - 1];
            let add = if lam > 0.0 {
                lam.ln() + le[[l - 1, m - 1]]
            } else {
                f64::NEG_INFINITY
            };
            le[[l, m]] = log_add(le[[l, m - 1]], add);
        }
    }
    Ok(EspTable { e: le, log_space: true })
}

fn sample_weighted<R: Rng + ?Sized>(weights: &[f64], rng: &mut R) -> Option<usize> {
    let total: f64 = weights.iter().sum();
    if !(total > 0.0) {
        return None;
    }
    let mut u = rng.gen::<f64>() * total;
    let mut last = None;
    for (i, &w) in weights.iter().enumerate() {
        if w <= 0.0 {
            continue;
        }
        last = Some(i);
        if u < w {
            return Some(i);
        }
        u -= w;
    }
    last
}

/// Precomputed spectral state for repeated k-DPP draws from one L.
#[derive(Debug, Clone)]
pub struct KdppSampler {
    spectrum: Spectrum,
    table: EspTable,
    /// Eigenvalues rescaled so the largest is 1 (the sampler is scale free).
    scaled: Vec<f64>,
    k: usize,
    /// Items drawn from the spectrum; the rest are filled uniformly.
    k_spectral: usize,
}

impl KdppSampler {
    pub fn new(l: &LEnsemble, k: usize) -> Result<Self> {
        let n = l.len();
        if k == 0 {
            return Err(Error::invalid("k must be at least 1"));
        }
        if k > n {
            return Err(Error::invalid(format!("k = {k} exceeds {n} items")));
        }
        let spectrum = l.spectrum()?;
        let k_spectral = k.min(spectrum.rank);
        if k_spectral < k {
            warn!(
                "L has rank {} < k = {k}; {} item(s) will be filled uniformly",
                spectrum.rank,
                k - k_spectral
            );
        }
        let top = spectrum.values.iter().cloned().fold(0.0, f64::max);
        let scaled: Vec<f64> = if top > 0.0 {
            spectrum.values.iter().map(|v| v / top).collect()
        } else {
            spectrum.values.clone()
        };
        let table = esp(&scaled, k_spectral)?;
        Ok(KdppSampler {
            spectrum,
            table,
            scaled,
            k,
            k_spectral,
        })
    }

    pub fn spectrum(&self) -> &Spectrum {
        &self.spectrum
    }

    /// Draws one set of k distinct indices, in ascending order.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<usize> {
        let n = self.scaled.len();
        let mut chosen_vecs = Vec::with_capacity(self.k_spectral);
        let mut remaining = self.k_spectral;
        for m in (1..=n).rev() {
            if remaining == 0 {
                break;
            }
            let lam = self.scaled[m - 1];
            if lam <= 0.0 {
                continue;
            }
            let p = if remaining == m {
                1.0
            } else {
                let ln_p = lam.ln() + self.table.ln_value(remaining - 1, m - 1) - self.table.ln_value(remaining, m);
                ln_p.exp()
            };
            if rng.gen::<f64>() < p {
                chosen_vecs.push(m - 1);
                remaining -= 1;
            }
        }

        let vs: Vec<Vec<f64>> = chosen_vecs
            .iter()
            .map(|&c| self.spectrum.vectors.column(c).to_vec())
            .collect();
        let mut items = elementary_dpp(vs, rng);

        if items.len() < self.k {
            let mut rest: Vec<usize> = (0..n).filter(|i| !items.contains(i)).collect();
            rest.shuffle(rng);
            items.extend(rest.into_iter().take(self.k - items.len()));
        }
        items.sort_unstable();
        items
    }
}

/// Draws |V| items from the projection DPP spanned by orthonormal `vs`.
fn elementary_dpp<R: Rng + ?Sized>(mut vs: Vec<Vec<f64>>, rng: &mut R) -> Vec<usize> {
    let mut items = Vec::with_capacity(vs.len());
    let n = vs.first().map_or(0, |v| v.len());
    let mut weights = vec![0.0; n];
    while !vs.is_empty() {
        weights.iter_mut().for_each(|w| *w = 0.0);
        for v in &vs {
            for (w, x) in weights.iter_mut().zip(v) {
                *w += x * x;
            }
        }
        for &i in &items {
            weights[i] = 0.0;
        }
        let Some(i) = sample_weighted(&weights, rng) else {
            warn!("elementary DPP ran out of mass with {} vector(s) left", vs.len());
            break;
        };
        items.push(i);

        // Eliminate the vector with the largest component on item i, then
        // remove that component from all others.
        let pivot = (0..vs.len())
            .max_by(|&a, &b| vs[a][i].abs().total_cmp(&vs[b][i].abs()))
            .expect("nonempty");
        let pv = vs.swap_remove(pivot);
        for v in vs.iter_mut() {
            let f = v[i] / pv[i];
            for (x, p) in v.iter_mut().zip(&pv) {
                *x -= f * p;
            }
            v[i] = 0.0;
        }
        let before = vs.len();
        linalg::gram_schmidt(&mut vs);
        if vs.len() < before {
            warn!("Gram-Schmidt dropped {} dependent vector(s)", before - vs.len());
        }
    }
    items
}

/// Draws k distinct indices from the k-DPP defined by `l`.
///
/// For k = 1 the k-DPP is P(i) ∝ L_ii and no eigendecomposition is needed.
pub fn sample_kdpp<R: Rng + ?Sized>(l: &LEnsemble, k: usize, rng: &mut R) -> Result<Vec<usize>> {
    if k == 1 && !l.is_empty() {
        let diag: Vec<f64> = (0..l.len()).map(|i| l.l[[i, i]].max(0.0)).collect();
        return Ok(vec![sample_from_diagonal(&diag, rng)]);
    }
    Ok(KdppSampler::new(l, k)?.sample(rng))
}

/// One draw from a 1-DPP given the diagonal of L. Uniform if L is zero.
pub fn sample_from_diagonal<R: Rng + ?Sized>(diag: &[f64], rng: &mut R) -> usize {
    match sample_weighted(diag, rng) {
        Some(i) => i,
        None => {
            warn!("L has zero trace; drawing uniformly");
            rng.gen_range(0..diag.len())
        }
    }
}

/// Unnormalized probability det(L_T).
pub fn subset_weight(l: &LEnsemble, subset: &[usize]) -> Result<f64> {
    let n = l.len();
    if let Some(&bad) = subset.iter().find(|&&i| i >= n) {
        return Err(Error::invalid(format!("index {bad} outside {n} items")));
    }
    let sub = Array2::from_shape_fn((subset.len(), subset.len()), |(a, b)| l.l[[subset[a], subset[b]]]);
    linalg::det_psd(&sub)
}

/// P(T) = det(L_T) / e_k(λ) under the k-DPP.
pub fn exact_subset_prob(l: &LEnsemble, subset: &[usize], k: usize) -> Result<f64> {
    if subset.len() != k {
        return Err(Error::invalid(format!("subset has {} items, expected {k}", subset.len())));
    }
    let mut sorted = subset.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    if sorted.len() != k {
        return Ok(0.0);
    }
    let weight = subset_weight(l, &sorted)?;
    if weight == 0.0 {
        return Ok(0.0);
    }
    let spectrum = l.spectrum()?;
    let norm = esp(&spectrum.values, k)?.value(k, l.len());
    if !(norm > 0.0) {
        return Err(Error::Numerical(format!("e_{k} of the spectrum is zero")));
    }
    Ok(weight / norm)
}
