//! Repeated trials of two strategies, their AUBC, a paired t-test and the
//! average-rank table.
//!
//! cargo run --release --example budget_curves_and_ttest

use dppal::alcore::{run_al, AlConfig, StrategyKind};
use dppal::committee::ModelKind;
use dppal::dataset::{gen_synthetic, SyntheticKind};
use dppal::eval::{aubc, mean_sd, paired_ttest, rank_table, PBand, SummaryTable};

fn main() -> dppal::Result<()> {
    let ds = gen_synthetic(SyntheticKind::Ex8bLike, 0)?;
    let cfg = AlConfig {
        committee: vec![ModelKind::Logistic, ModelKind::Lda, ModelKind::SvmRbf, ModelKind::SvmPoly],
        ..AlConfig::default()
    };
    let strategies = [StrategyKind::KdppMulti, StrategyKind::Uniform, StrategyKind::Kcenter];
    let trials = 5;

    let mut table = SummaryTable::default();
    let mut per_strategy = Vec::new();
    for batch in [1, 5] {
        for &s in &strategies {
            let mut scores = Vec::new();
            for seed in 0..trials {
                let rec = run_al(&ds, s, 60, batch, seed, &cfg)?;
                scores.push(aubc(&rec.curves.acc)?);
            }
            let (m, sd) = mean_sd(&scores);
            println!("S={batch:<2} {:>10}  AUBC(acc) {m:.4} ({sd:.4})", s.name());
            table.push(&ds.name, s.name(), batch, &scores);
            if batch == 5 {
                per_strategy.push(scores);
            }
        }
    }

    let p = paired_ttest(&per_strategy[0], &per_strategy[1])?;
    println!("kdpp_multi vs uniform at S=5: p = {p:.4} ({})", PBand::of(p).name());
    for (name, rank) in rank_table(&table)? {
        println!("average rank {name:>10}: {rank:.2}");
    }
    Ok(())
}
