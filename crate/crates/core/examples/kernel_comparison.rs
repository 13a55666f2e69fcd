//! kdpp_multi with each of the five similarity kernels on one dataset.
//!
//! cargo run --release --example kernel_comparison -- ex8b_like 60 5 3

use dppal::alcore::{run_al, AlConfig, StrategyKind};
use dppal::dataset::{gen_synthetic, SyntheticKind};
use dppal::eval::{aubc, mean_sd};
use dppal::kernels::{KernelKind, KernelParams};

fn main() -> dppal::Result<()> {
    let mut args = std::env::args().skip(1);
    let kind: SyntheticKind = args.next().as_deref().unwrap_or("ex8b_like").parse()?;
    let budget: usize = args.next().and_then(|s| s.parse().ok()).unwrap_or(60);
    let batch: usize = args.next().and_then(|s| s.parse().ok()).unwrap_or(5);
    let trials: u64 = args.next().and_then(|s| s.parse().ok()).unwrap_or(3);

    let ds = gen_synthetic(kind, 0)?;
    println!("{}: budget {budget}, batch {batch}, {trials} trials", ds.name);
    for kernel in KernelKind::ALL {
        let cfg = AlConfig {
            kernel: KernelParams {
                kind: kernel,
                ..KernelParams::default()
            },
            ..AlConfig::default()
        };
        let scores = (0..trials)
            .map(|seed| aubc(&run_al(&ds, StrategyKind::KdppMulti, budget, batch, seed, &cfg)?.curves.acc))
            .collect::<dppal::Result<Vec<f64>>>()?;
        let (m, sd) = mean_sd(&scores);
        println!("{:>10}  AUBC(acc) {m:.4} ({sd:.4})", kernel.name());
    }
    Ok(())
}
