//! Round trip through CSV: write a synthetic dataset, load it back by label
//! column name and run a short uniform-sampling trial on it.
//!
//! cargo run --release --example csv_dataset -- [path.csv] [label column]

use dppal::alcore::{run_al, AlConfig, StrategyKind};
use dppal::cli::gen_csv;
use dppal::dataset::{load_csv, LabelColumn, SyntheticKind};
use dppal::eval::aubc;

fn main() -> dppal::Result<()> {
    let mut args = std::env::args().skip(1);
    let (path, label) = match args.next() {
        Some(p) => (p.into(), args.next().unwrap_or_else(|| "label".into())),
        None => {
            let p = std::env::temp_dir().join("dppal_ex8b_like.csv");
            gen_csv(SyntheticKind::Ex8bLike, 0, &p)?;
            (p, "label".to_string())
        }
    };
    let ds = load_csv(&path, &label.parse::<LabelColumn>().expect("infallible"), true)?;
    println!(
        "{}: {} rows, {} features, class counts {:?}",
        path.display(),
        ds.len(),
        ds.dim(),
        ds.class_counts()
    );
    let rec = run_al(&ds, StrategyKind::Uniform, 40, 4, 0, &AlConfig::default())?;
    println!("uniform AUBC(acc) {:.4}, final acc {:.4}", aubc(&rec.curves.acc)?, rec.curves.acc.last_value().unwrap_or(f64::NAN));
    Ok(())
}
