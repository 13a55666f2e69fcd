use dppal::eval::{
    aubc_points, metrics, paired_ttest, rank_auc, rank_table, student_t_two_sided, PBand, SummaryTable,
};
use dppal::kdpp::{exact_subset_prob, LEnsemble};
use dppal::linalg::{det_psd, sym_eig};
use ndarray::{array, Array2};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Two-sided Student-t tail by Simpson integration of the density.
fn t_tail_oracle(t: f64, df: f64) -> f64 {
    let ln_c = ln_gamma((df + 1.0) / 2.0) - ln_gamma(df / 2.0) - 0.5 * (df * std::f64::consts::PI).ln();
    let pdf = |x: f64| (ln_c - (df + 1.0) / 2.0 * (1.0 + x * x / df).ln()).exp();
    let a = t.abs();
    let steps = 20_000;
    let h = a / steps as f64;
    let mut s = pdf(0.0) + pdf(a);
    for i in 1..steps {
        s += pdf(i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    let central = s * h / 3.0;
    1.0 - 2.0 * central
}

/// ln Γ by summing ln over the integer/half-integer recursion down to Γ(1) or Γ(1/2).
fn ln_gamma(x: f64) -> f64 {
    let mut x = x;
    let mut acc = 0.0;
    while x > 1.0 {
        x -= 1.0;
        acc += x.ln();
    }
    if (x - 0.5).abs() < 1e-12 {
        acc + 0.5 * std::f64::consts::PI.ln()
    } else {
        acc
    }
}

fn trapezoid(points: &[(f64, f64)]) -> f64 {
    let mut area = 0.0;
    for w in points.windows(2) {
        area += (w[1].0 - w[0].0) * (w[0].1 + w[1].1) / 2.0;
    }
    area / (points.last().unwrap().0 - points[0].0)
}

fn curve_strategy() -> impl Strategy<Value = Vec<(f64, f64)>> {
    prop::collection::vec((0.1f64..5.0, 0.0f64..1.0), 2..20).prop_map(|steps| {
        let mut x = 0.0;
        steps
            .into_iter()
            .map(|(dx, y)| {
                x += dx;
                (x, y)
            })
            .collect()
    })
}

proptest! {
    #[test]
    fn aubc_matches_trapezoid_and_is_bounded(points in curve_strategy()) {
        let a = aubc_points(points.iter().copied()).unwrap();
        prop_assert!((a - trapezoid(&points)).abs() < 1e-12);
        let lo = points.iter().map(|p| p.1).fold(f64::INFINITY, f64::min);
        let hi = points.iter().map(|p| p.1).fold(f64::NEG_INFINITY, f64::max);
        prop_assert!(a >= lo - 1e-12 && a <= hi + 1e-12);
    }

    #[test]
    fn aubc_ignores_affine_budget_rescaling(points in curve_strategy(), scale in 0.1f64..10.0, shift in -50.0f64..50.0) {
        let a = aubc_points(points.iter().copied()).unwrap();
        let b = aubc_points(points.iter().map(|&(x, y)| (scale * x + shift, y))).unwrap();
        prop_assert!((a - b).abs() < 1e-9);
    }

    #[test]
    fn dominating_curve_has_larger_aubc(points in curve_strategy(), lift in prop::collection::vec(0.0f64..0.5, 20)) {
        let upper: Vec<(f64, f64)> = points.iter().zip(&lift).map(|(&(x, y), d)| (x, y + d)).collect();
        prop_assert!(aubc_points(upper).unwrap() >= aubc_points(points).unwrap() - 1e-12);
    }

    #[test]
    fn ttest_is_sign_symmetric(a in prop::collection::vec(0.0f64..1.0, 3..12), noise in prop::collection::vec(-0.2f64..0.2, 12)) {
        let b: Vec<f64> = a.iter().zip(&noise).map(|(x, e)| x + e).collect();
        let p1 = paired_ttest(&a, &b).unwrap();
        let p2 = paired_ttest(&b, &a).unwrap();
        prop_assert!((p1 - p2).abs() < 1e-14);
        prop_assert!((0.0..=1.0).contains(&p1));
    }

    #[test]
    fn t_tail_matches_numeric_integration(t in 0.0f64..6.0, df in 1usize..30) {
        let got = student_t_two_sided(t, df as f64);
        let want = t_tail_oracle(t, df as f64);
        prop_assert!((got - want).abs() < 1e-8, "t={} df={} got {} want {}", t, df, got, want);
    }
}

#[test]
fn ttest_conventions() {
    let a: Vec<f64> = (0..10).map(|i| 0.8 + 0.01 * i as f64).collect();
    assert_eq!(paired_ttest(&a, &a).unwrap(), 1.0);
    let shifted: Vec<f64> = a.iter().map(|x| x + 1.0).collect();
    assert!(paired_ttest(&shifted, &a).unwrap() < 1e-9);
    let alt: Vec<f64> = a.iter().enumerate().map(|(i, x)| if i % 2 == 0 { x + 1.0 } else { x - 1.0 }).collect();
    assert!((paired_ttest(&alt, &a).unwrap() - 1.0).abs() < 1e-12);
    assert_eq!(PBand::of(0.005), PBand::Strong);
    assert_eq!(PBand::of(0.03), PBand::Weak);
    assert_eq!(PBand::of(0.05), PBand::None);
}

#[test]
fn ranks_and_ties() {
    let mut t = SummaryTable::default();
    t.push("d1", "A", 1, &[0.9]);
    t.push("d1", "B", 1, &[0.8]);
    t.push("d2", "A", 1, &[0.7]);
    t.push("d2", "B", 1, &[0.6]);
    assert_eq!(rank_table(&t).unwrap(), vec![("A".to_string(), 1.0), ("B".to_string(), 2.0)]);
    t.push("d3", "A", 1, &[0.5]);
    t.push("d3", "B", 1, &[0.5]);
    let r = rank_table(&t).unwrap();
    assert!((r[0].1 - (1.0 + 1.0 + 1.5) / 3.0).abs() < 1e-12);
    t.push("d4", "A", 1, &[0.5]);
    assert!(rank_table(&t).is_err());
}

#[test]
fn hand_counted_metrics() {
    let scores = array![[0.2, 0.8], [0.6, 0.4], [0.9, 0.1], [0.7, 0.3]];
    let m = metrics(&[1, 1, 0, 0], &[1, 0, 0, 0], &scores, 2).unwrap();
    assert!((m.acc - 0.75).abs() < 1e-12);
    assert!((m.f1 - 2.0 / 3.0).abs() < 1e-12);
}

#[test]
fn rank_auc_matches_pair_counting() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..50 {
        let n = rng.gen_range(4..40);
        // First two rows positive, next two negative, the rest random.
        let pos: Vec<bool> = (0..n).map(|i| i < 2 || (i >= 4 && rng.gen_bool(0.5))).collect();
        let scores: Vec<f64> = (0..n).map(|_| (rng.gen_range(0..8) as f64) / 8.0).collect();
        let (mut num, mut den) = (0.0, 0.0);
        for i in 0..n {
            for j in 0..n {
                if pos[i] && !pos[j] {
                    den += 1.0;
                    num += if scores[i] > scores[j] {
                        1.0
                    } else if scores[i] == scores[j] {
                        0.5
                    } else {
                        0.0
                    };
                }
            }
        }
        let got = rank_auc(&pos, &scores).unwrap();
        assert!((got - num / den).abs() < 1e-12);
    }
    assert_eq!(rank_auc(&[true, true], &[0.1, 0.2]), None);
}

fn random_psd(rng: &mut ChaCha8Rng, n: usize, rank: usize) -> Array2<f64> {
    let b = Array2::from_shape_fn((n, rank), |_| rng.gen_range(-1.0..1.0));
    let l = b.dot(&b.t());
    Array2::from_shape_fn((n, n), |(i, j)| 0.5 * (l[[i, j]] + l[[j, i]]))
}

#[test]
fn eigen_reconstruction_and_orthogonality() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let a = Array2::from_shape_fn((50, 50), |_| rng.gen_range(-1.0..1.0));
    let a = &a + &a.t();
    let eig = sym_eig(&a).unwrap();
    let max_a = a.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let rec = eig.reconstruct();
    assert!(rec.iter().zip(a.iter()).all(|(x, y)| (x - y).abs() <= 1e-8 * max_a));
    let qtq = eig.vectors.t().dot(&eig.vectors);
    for i in 0..50 {
        for j in 0..50 {
            let want = if i == j { 1.0 } else { 0.0 };
            assert!((qtq[[i, j]] - want).abs() <= 1e-10);
        }
    }
    assert!(eig.values.windows(2).into_iter().all(|w| w[0] <= w[1]));
}

#[test]
fn determinant_is_product_of_eigenvalues() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for n in [2, 5, 12, 30, 50] {
        let l = random_psd(&mut rng, n, n) + Array2::<f64>::eye(n) * 0.1;
        let d = det_psd(&l).unwrap();
        let prod: f64 = sym_eig(&l).unwrap().values.iter().product();
        assert!(((d - prod) / prod).abs() < 1e-8, "n={n}: {d} vs {prod}");
    }
    let v = array![[1.0], [2.0], [3.0]];
    assert!(det_psd(&v.dot(&v.t())).unwrap().abs() < 1e-10);
    assert!((det_psd(&array![[2.0, 1.0], [1.0, 3.0]]).unwrap() - 5.0).abs() < 1e-12);
}

#[test]
fn subset_probabilities_sum_to_one() {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    for (n, rank, k) in [(6, 6, 2), (7, 4, 3), (8, 8, 4)] {
        let ens = LEnsemble::new(random_psd(&mut rng, n, rank)).unwrap();
        let mut total = 0.0;
        for mask in 0u32..(1 << n) {
            if mask.count_ones() as usize == k {
                let s: Vec<usize> = (0..n).filter(|i| mask & (1 << i) != 0).collect();
                total += exact_subset_prob(&ens, &s, k).unwrap();
            }
        }
        assert!((total - 1.0).abs() < 1e-10);
    }
}
