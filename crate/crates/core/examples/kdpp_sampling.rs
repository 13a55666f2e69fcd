//! Draws fixed-size subsets from a small L-ensemble and compares the empirical
//! frequencies with the exact k-DPP probabilities.
//!
//! cargo run --release --example kdpp_sampling

use std::collections::HashMap;

use dppal::kdpp::{esp, exact_subset_prob, sample_kdpp, LEnsemble};
use ndarray::Array2;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> dppal::Result<()> {
    // Six points on a line; 0, 1 and 2 sit close together.
    let xs: [f64; 6] = [0.0, 0.2, 0.4, 3.0, 5.0, 7.5];
    let quality = [1.0, 1.0, 1.0, 0.6, 0.8, 0.5];
    let l = Array2::from_shape_fn((6, 6), |(i, j)| {
        quality[i] * quality[j] * (-(xs[i] - xs[j]).abs() / 2.0).exp()
    });
    let ens = LEnsemble::new(l)?;
    let k = 2;

    let spec = ens.spectrum()?;
    let e = esp(&spec.values.to_vec(), k)?;
    println!("eigenvalues {:.4?}", spec.values.to_vec());
    println!("e_{k}(lambda) = {:.6}", e.value(k, e.items()));

    let draws = 50_000;
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut counts: HashMap<Vec<usize>, usize> = HashMap::new();
    for _ in 0..draws {
        *counts.entry(sample_kdpp(&ens, k, &mut rng)?).or_default() += 1;
    }

    let mut rows: Vec<(Vec<usize>, f64, f64)> = Vec::new();
    for a in 0..6 {
        for b in (a + 1)..6 {
            let s = vec![a, b];
            let emp = *counts.get(&s).unwrap_or(&0) as f64 / draws as f64;
            rows.push((s.clone(), exact_subset_prob(&ens, &s, k)?, emp));
        }
    }
    rows.sort_by(|x, y| y.1.total_cmp(&x.1));
    let mut tv = 0.0;
    println!("{:>8} {:>8} {:>8}", "subset", "exact", "sampled");
    for (s, p, q) in &rows {
        tv += (p - q).abs() / 2.0;
        println!("{:>8} {p:>8.4} {q:>8.4}", format!("{s:?}"));
    }
    println!("total variation {tv:.4} over {draws} draws");
    Ok(())
}
