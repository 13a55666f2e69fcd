//! A small experiment grid through the same runner the binary uses, followed
//! by the plot-data step.
//!
//! cargo run --release --example benchmark_grid -- [out_dir]

use dppal::cli::{plot_data, run, RunConfig};

fn main() -> dppal::Result<()> {
    let out = std::env::args()
        .nth(1)
        .map(Into::into)
        .unwrap_or_else(|| std::env::temp_dir().join("dppal_grid"));
    let mut cfg = RunConfig::parse(
        "datasets = ex8b_like, gcloud_balance
         strategies = kdpp_multi, uniform, margin, kcenter
         batch_sizes = 5
         trials = 3
         budget = 40
         committee.members = logistic, lda, svm_rbf, svm_poly",
    )?;
    cfg.out_dir = out;
    println!("config hash {}", cfg.hash());

    let result = run(&cfg)?;
    for f in &result.files {
        println!("wrote {}", f.display());
    }
    for f in plot_data(cfg.out_dir.join("curves.csv"), &cfg.out_dir)? {
        println!("wrote {}", f.display());
    }
    let ranks = std::fs::read_to_string(cfg.out_dir.join("ranks.csv")).unwrap_or_default();
    print!("{ranks}");
    Ok(())
}
