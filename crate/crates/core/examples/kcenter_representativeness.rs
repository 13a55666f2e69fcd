//! Greedy k-center on R15 seeded with a labeled set, then the cosine
//! representativeness vectors of the unlabeled points.
//!
//! cargo run --release --example kcenter_representativeness

use dppal::dataset::{gen_synthetic, init_pool, SyntheticKind};
use dppal::representativeness::{
    coverage_radius, kappa_schedule, kcenter_greedy, pairwise_distances, rep_vectors,
};

fn main() -> dppal::Result<()> {
    let ds = gen_synthetic(SyntheticKind::R15, 0)?;
    let all: Vec<usize> = (0..ds.len()).collect();
    let pool = init_pool(&all, &ds.labels, 20, 1)?;
    let dist = pairwise_distances(&ds.features);

    let seeded = coverage_radius(&dist, &all, &pool.labeled);
    println!("radius with the {} labeled points alone: {seeded:.3}", pool.labeled.len());

    let kappa = kappa_schedule(pool.unlabeled.len());
    for k in [1, kappa / 2, kappa] {
        let cs = kcenter_greedy(&dist, &pool.labeled, &pool.unlabeled, k)?;
        println!("kappa {k:>2}: radius {:.3}", cs.radius);
    }

    let cs = kcenter_greedy(&dist, &pool.labeled, &pool.unlabeled, kappa)?;
    let rep = rep_vectors(&ds.rows(&pool.unlabeled), &ds.rows(&cs.centers))?;
    println!("rep vectors: {} x {}", rep.r.nrows(), rep.r.ncols());

    // Rows from the same cluster should point the same way in rep space.
    let unit: Vec<Vec<f64>> = rep
        .r
        .rows()
        .into_iter()
        .map(|r| {
            let n = r.dot(&r).sqrt().max(1e-12);
            r.iter().map(|v| v / n).collect()
        })
        .collect();
    let (mut same, mut diff) = ((0.0, 0usize), (0.0, 0usize));
    for i in 0..unit.len() {
        for j in (i + 1)..unit.len() {
            let c: f64 = unit[i].iter().zip(&unit[j]).map(|(a, b)| a * b).sum();
            let slot = if ds.labels[pool.unlabeled[i]] == ds.labels[pool.unlabeled[j]] {
                &mut same
            } else {
                &mut diff
            };
            slot.0 += c;
            slot.1 += 1;
        }
    }
    println!(
        "mean cosine between rep vectors: same class {:.3}, different class {:.3}",
        same.0 / same.1 as f64,
        diff.0 / diff.1 as f64
    );
    Ok(())
}
