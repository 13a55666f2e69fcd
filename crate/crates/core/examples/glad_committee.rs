//! Fits the six-model committee on a small labeled set, lets it vote on the
//! pool and estimates each member's ability and each instance's difficulty.
//!
//! cargo run --release --example glad_committee

use dppal::committee::{fit_committee, vote_matrix, ModelKind, ModelParams};
use dppal::dataset::{gen_synthetic, init_pool, split, standardize_with_train, SyntheticKind};
use dppal::glad::{info_scores, GladConfig};

fn main() -> dppal::Result<()> {
    let raw = gen_synthetic(SyntheticKind::Ex8aLike, 0)?;
    let (train, _test) = split(&raw, 0.6, 3)?;
    let ds = standardize_with_train(&raw, &train);
    let pool = init_pool(&train, &ds.labels, 40, 3)?;

    let members = ModelKind::ALL;
    let committee = fit_committee(
        &members,
        &ds.rows(&pool.labeled),
        &pool.labeled_labels(),
        ds.class_count,
        &ModelParams::default(),
    )?;
    let votes = vote_matrix(&committee, &ds.rows(&pool.unlabeled))?;
    let (fit, info) = info_scores(&votes, ds.class_count, &GladConfig::default())?;

    println!(
        "EM: {} iterations, converged {}",
        fit.log_posterior.len(),
        fit.converged
    );
    println!("{:>12} {:>10} {:>8}", "member", "beta", "pool acc");
    for (j, m) in members.iter().enumerate() {
        let agree = pool
            .unlabeled
            .iter()
            .enumerate()
            .filter(|&(i, &row)| votes.votes[[i, j]] == ds.labels[row])
            .count();
        println!(
            "{:>12} {:>10.3} {:>8.3}",
            m.name(),
            fit.beta[j],
            agree as f64 / pool.unlabeled.len() as f64
        );
    }

    let mut order: Vec<usize> = (0..info.mu.len()).collect();
    order.sort_by(|&a, &b| info.mu[b].total_cmp(&info.mu[a]));
    println!("most informative pool rows:");
    for &i in order.iter().take(5) {
        let row = pool.unlabeled[i];
        println!("  row {row:>4}  mu {:.3}  votes {:?}", info.mu[i], votes.votes.row(i).to_vec());
    }
    Ok(())
}
