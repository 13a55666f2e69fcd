//! Greedy k-center over a precomputed distance matrix, and the cosine
//! feature map that turns center assignments into representativeness vectors.

use ndarray::{Array2, ArrayView1};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct CenterSet {
    /// New centers in selection order. Given centers are not repeated here.
    pub centers: Vec<usize>,
    /// Largest distance from any point to its nearest center, given or new.
    pub radius: f64,
}

/// Cosine of every unlabeled instance to every center, `n_unlabeled × κ`.
#[derive(Debug, Clone, PartialEq)]
pub struct RepVectors {
    pub r: Array2<f64>,
}

/// Euclidean distances between all rows of `x`.
pub fn pairwise_distances(x: &Array2<f64>) -> Array2<f64> {
    let n = x.nrows();
    let mut d = Array2::zeros((n, n));
    for i in 0..n {
        let xi = x.row(i);
        for j in (i + 1)..n {
            let s: f64 = xi
                .iter()
                .zip(x.row(j).iter())
                .map(|(a, b)| (a - b) * (a - b))
                .sum();
            let v = s.sqrt();
            d[[i, j]] = v;
            d[[j, i]] = v;
        }
    }
    d
}

/// Farthest-first traversal seeded with `given` as fixed centers.
///
/// Only `candidates` may become new centers. The radius is measured over
/// `given ∪ candidates`. Ties go to the lower point index.
pub fn kcenter_greedy(dist: &Array2<f64>, given: &[usize], candidates: &[usize], kappa: usize) -> Result<CenterSet> {
    let n = dist.nrows();
    if dist.ncols() != n {
        return Err(Error::Dimension(format!("distance matrix is {:?}", dist.dim())));
    }
    if candidates.is_empty() {
        return Err(Error::invalid("k-center needs at least one candidate"));
    }
    if kappa > candidates.len() {
        return Err(Error::invalid(format!(
            "kappa {kappa} exceeds {} candidates",
            candidates.len()
        )));
    }
    if let Some(&bad) = given.iter().chain(candidates).find(|&&i| i >= n) {
        return Err(Error::invalid(format!("index {bad} outside distance matrix of size {n}")));
    }

    let mut points: Vec<usize> = given.iter().chain(candidates).copied().collect();
    points.sort_unstable();
    points.dedup();

    // nearest[p] = distance from points[p] to the closest center so far.
    let mut nearest = vec![f64::INFINITY; points.len()];
    for &g in given {
        let row = dist.row(g);
        for (slot, &p) in nearest.iter_mut().zip(&points) {
            *slot = slot.min(row[p]);
        }
    }

    let mut cand_sorted = candidates.to_vec();
    cand_sorted.sort_unstable();
    cand_sorted.dedup();
    let cand_pos: Vec<usize> = cand_sorted
        .iter()
        .map(|c| points.binary_search(c).expect("candidate is in the point set"))
        .collect();
    let mut taken = vec![false; cand_sorted.len()];

    let mut centers = Vec::with_capacity(kappa);
    for _ in 0..kappa {
        let mut best: Option<(usize, f64)> = None;
        for (ci, &pos) in cand_pos.iter().enumerate() {
            if taken[ci] {
                continue;
            }
            let d = nearest[pos];
            if best.map_or(true, |(_, bd)| d > bd) {
                best = Some((ci, d));
            }
        }
        let (ci, _) = best.expect("kappa does not exceed the candidate count");
        taken[ci] = true;
        let c = cand_sorted[ci];
        centers.push(c);
        let row = dist.row(c);
        for (slot, &p) in nearest.iter_mut().zip(&points) {
            *slot = slot.min(row[p]);
        }
    }

    let radius = nearest.iter().cloned().fold(0.0, f64::max);
    Ok(CenterSet { centers, radius })
}

/// Radius achieved by an arbitrary center set, for checking and ablations.
pub fn coverage_radius(dist: &Array2<f64>, points: &[usize], centers: &[usize]) -> f64 {
    points
        .iter()
        .map(|&p| {
            centers
                .iter()
                .map(|&c| dist[[p, c]])
                .fold(f64::INFINITY, f64::min)
        })
        .fold(0.0, f64::max)
}

/// Number of new centers for a pool of `n_unlabeled` instances.
pub fn kappa_schedule(n_unlabeled: usize) -> usize {
    ((n_unlabeled as f64 / 2.0).sqrt().round() as usize).max(1)
}

fn guarded_norm(v: ArrayView1<f64>, first: &mut f64) -> f64 {
    let n2: f64 = v.iter().map(|a| a * a).sum();
    if n2 == 0.0 {
        *first = 1e-12;
        1e-12
    } else {
        n2.sqrt()
    }
}

/// Cosine similarity of every row of `x_points` to every row of `x_centers`.
pub fn rep_vectors(x_points: &Array2<f64>, x_centers: &Array2<f64>) -> Result<RepVectors> {
    let d = x_points.ncols();
    if x_centers.ncols() != d {
        return Err(Error::Dimension(format!(
            "points have {d} features, centers have {}",
            x_centers.ncols()
        )));
    }
    if d == 0 {
        return Err(Error::Dimension("zero-dimensional features".into()));
    }
    let prep = |x: &Array2<f64>| {
        let mut out = x.clone();
        for mut row in out.rows_mut() {
            let mut first = row[0];
            let norm = guarded_norm(row.view(), &mut first);
            row[0] = first;
            row.mapv_inplace(|v| v / norm);
        }
        out
    };
    let p = prep(x_points);
    let c = prep(x_centers);
    let mut r = p.dot(&c.t());
    r.mapv_inplace(|v| v.clamp(-1.0, 1.0));
    Ok(RepVectors { r })
}
