//! One active-learning trial per strategy on a synthetic dataset, printing the
//! accuracy curve and its AUBC.
//!
//! cargo run --release --example active_learning_loop -- gcloud_balance 300 5

use std::time::Instant;

use dppal::alcore::{run_al, AlConfig, StrategyKind};
use dppal::dataset::{gen_synthetic, SyntheticKind};
use dppal::eval::aubc;

fn main() -> dppal::Result<()> {
    let mut args = std::env::args().skip(1);
    let kind: SyntheticKind = args.next().as_deref().unwrap_or("gcloud_balance").parse()?;
    let budget: usize = args.next().and_then(|s| s.parse().ok()).unwrap_or(100);
    let batch: usize = args.next().and_then(|s| s.parse().ok()).unwrap_or(5);

    let ds = gen_synthetic(kind, 0)?;
    let cfg = AlConfig::default();
    println!("{}: {} rows, {} classes, budget {budget}, batch {batch}", ds.name, ds.len(), ds.class_count);
    for strategy in StrategyKind::ALL {
        let t = Instant::now();
        let rec = run_al(&ds, strategy, budget, batch, 0, &cfg)?;
        let last = rec.curves.acc.last_value().unwrap_or(f64::NAN);
        println!(
            "{:>10}  AUBC(acc) {:.4}  final acc {:.4}  ({:.1}s)",
            strategy.name(),
            aubc(&rec.curves.acc)?,
            last,
            t.elapsed().as_secs_f64()
        );
    }
    Ok(())
}
