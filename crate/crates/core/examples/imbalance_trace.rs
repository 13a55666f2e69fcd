//! Positive/negative ratio of the acquired labels round by round on the
//! imbalanced Gaussian clouds.
//!
//! cargo run --release --example imbalance_trace

use dppal::alcore::{pn_ratio_trace, run_al, AlConfig, StrategyKind};
use dppal::dataset::{gen_synthetic, SyntheticKind};

fn main() -> dppal::Result<()> {
    let ds = gen_synthetic(SyntheticKind::GcloudUnbalance, 0)?;
    let counts = ds.class_counts();
    println!("class counts {counts:?}, imbalance ratio {:.2}", ds.imbalance_ratio());

    let cfg = AlConfig::default();
    for strategy in [StrategyKind::KdppMulti, StrategyKind::Uniform] {
        let rec = run_al(&ds, strategy, 60, 2, 0, &cfg)?;
        let trace = pn_ratio_trace(&rec, &ds)?;
        let shown: Vec<String> = trace
            .iter()
            .step_by(5)
            .map(|r| if r.is_finite() { format!("{r:.2}") } else { "inf".into() })
            .collect();
        println!("{:>10}: {}", strategy.name(), shown.join(" "));
    }
    Ok(())
}
