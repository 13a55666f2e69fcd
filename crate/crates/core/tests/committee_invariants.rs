use dppal::committee::{fit, fit_committee, vote_matrix, ModelKind, ModelParams};
use dppal::dataset::{gen_synthetic, split, standardize_with_train, SyntheticKind};
use dppal::eval::accuracy;
use dppal::glad::{class_probabilities, em_fit, info_scores, GladConfig};
use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

fn separable(seed: u64) -> (Array2<f64>, Vec<usize>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let noise = Normal::new(0.0, 0.2).unwrap();
    let n = 60;
    let x = Array2::from_shape_fn((n, 2), |(i, j)| {
        let c = if i < n / 2 { -1.0 } else { 1.0 };
        c * if j == 0 { 2.0 } else { 0.0 } + noise.sample(&mut rng)
    });
    let y = (0..n).map(|i| usize::from(i >= n / 2)).collect();
    (x, y)
}

#[test]
fn every_member_fits_a_well_margined_fixture() {
    // Class centers at x = -2 and x = 2 with sd 0.2: a 10 sd margin.
    let (x, y) = separable(1);
    for kind in ModelKind::ALL {
        let m = fit(kind, &x, &y, 2, &ModelParams::default()).unwrap();
        assert_eq!(accuracy(&y, &m.predict(&x).unwrap()), 1.0, "{kind}");
    }
}

#[test]
fn nonlinear_members_win_on_ex8a_like() {
    let raw = gen_synthetic(SyntheticKind::Ex8aLike, 0).unwrap();
    let (train, test) = split(&raw, 0.6, 0).unwrap();
    let ds = standardize_with_train(&raw, &train);
    let score = |kind| {
        let m = fit(kind, &ds.rows(&train), &ds.labels_at(&train), 2, &ModelParams::default()).unwrap();
        accuracy(&ds.labels_at(&test), &m.predict(&ds.rows(&test)).unwrap())
    };
    assert!(score(ModelKind::SvmRbf) > 0.9);
    assert!(score(ModelKind::SvmPoly) > 0.9);
    assert!(score(ModelKind::SvmLinear) < 0.7);
}

#[test]
fn votes_reduce_to_member_predictions() {
    let ds = gen_synthetic(SyntheticKind::R15, 0).unwrap();
    let idx: Vec<usize> = (0..ds.len()).step_by(3).collect();
    let (x, y) = (ds.rows(&idx), ds.labels_at(&idx));
    let members = fit_committee(&[ModelKind::Lda], &x, &y, 15, &ModelParams::default()).unwrap();
    let v = vote_matrix(&members, &ds.features).unwrap();
    assert_eq!(v.votes.column(0).to_vec(), members[0].predict(&ds.features).unwrap());
}

#[test]
fn unanimous_committee_is_certain() {
    let votes = Array2::from_shape_fn((30, 5), |(i, _)| i % 2);
    let vm = dppal::committee::VoteMatrix { votes };
    let fit = em_fit(&vm, 2, &GladConfig::default()).unwrap();
    for i in 0..30 {
        assert!(fit.posterior[[i, i % 2]] >= 0.99);
    }
    let b0 = fit.beta[0];
    assert!(fit.beta.iter().all(|&b| (b - b0).abs() <= 1e-9 * b0));
}

#[test]
fn permuting_voters_permutes_beta() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let votes = Array2::from_shape_fn((80, 5), |(i, j)| if rng.gen_bool(0.6 + 0.07 * j as f64) { i % 3 } else { rng.gen_range(0..3) });
    let perm = [3, 0, 4, 1, 2];
    let shuffled = Array2::from_shape_fn((80, 5), |(i, j)| votes[[i, perm[j]]]);
    let cfg = GladConfig::default();
    let a = dppal::committee::VoteMatrix { votes };
    let b = dppal::committee::VoteMatrix { votes: shuffled };
    let (fa, ia) = info_scores(&a, 3, &cfg).unwrap();
    let (fb, ib) = info_scores(&b, 3, &cfg).unwrap();
    // Sums over voters are order-free, so the fit permutes exactly.
    for j in 0..5 {
        assert_eq!(fa.beta[perm[j]], fb.beta[j]);
    }
    assert_eq!(ia.mu, ib.mu);
    let p = class_probabilities(&fa, &a, 3).unwrap();
    for row in p.rows() {
        assert!((row.sum() - 1.0).abs() < 1e-9);
    }
}
