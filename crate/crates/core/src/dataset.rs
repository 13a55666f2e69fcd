//! Datasets, splits, and the labeled/unlabeled pool.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use ndarray::{Array2, Axis};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};

const MAX_REDRAWS: usize = 10_000;

/// Feature matrix with integer class labels in `0..class_count`.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub name: String,
    pub features: Array2<f64>,
    pub labels: Vec<usize>,
    pub class_count: usize,
}

impl Dataset {
    /// Builds a dataset, inferring the class count from the labels. Every class
    /// in `0..K` must occur and K must be at least 2.
    pub fn new(name: impl Into<String>, features: Array2<f64>, labels: Vec<usize>) -> Result<Self> {
        if features.nrows() != labels.len() {
            return Err(Error::Dimension(format!(
                "{} feature rows but {} labels",
                features.nrows(),
                labels.len()
            )));
        }
        let class_count = labels.iter().max().map_or(0, |m| m + 1);
        let present: BTreeSet<usize> = labels.iter().copied().collect();
        if present.len() < 2 {
            return Err(Error::TooFewClasses {
                found: present.len(),
            });
        }
        if present.len() != class_count {
            let missing = (0..class_count).find(|c| !present.contains(c)).unwrap_or(0);
            return Err(Error::invalid(format!("class {missing} has no samples")));
        }
        Ok(Dataset {
            name: name.into(),
            features,
            labels,
            class_count,
        })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.features.ncols()
    }

    pub fn class_counts(&self) -> Vec<usize> {
        let mut counts = vec![0; self.class_count];
        for &y in &self.labels {
            counts[y] += 1;
        }
        counts
    }

    /// Majority-to-minority class size ratio.
    pub fn imbalance_ratio(&self) -> f64 {
        let counts = self.class_counts();
        let max = *counts.iter().max().unwrap_or(&0) as f64;
        let min = *counts.iter().min().unwrap_or(&0) as f64;
        max / min
    }

    /// Rows of the feature matrix at `indices`.
    pub fn rows(&self, indices: &[usize]) -> Array2<f64> {
        self.features.select(Axis(0), indices)
    }

    pub fn labels_at(&self, indices: &[usize]) -> Vec<usize> {
        indices.iter().map(|&i| self.labels[i]).collect()
    }
}

/// Selects the label column of a CSV file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LabelColumn {
    Name(String),
    Index(usize),
}

impl FromStr for LabelColumn {
    type Err = std::convert::Infallible;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        Ok(match s.parse::<usize>() {
            Ok(i) => LabelColumn::Index(i),
            Err(_) => LabelColumn::Name(s.to_string()),
        })
    }
}

impl fmt::Display for LabelColumn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LabelColumn::Name(n) => write!(f, "{n}"),
            LabelColumn::Index(i) => write!(f, "{i}"),
        }
    }
}

/// Reads a comma-separated file. Labels are re-encoded to `0..K` in order of
/// first appearance; every other column must be numeric.
pub fn load_csv(path: impl AsRef<Path>, label_column: &LabelColumn, has_header: bool) -> Result<Dataset> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(has_header)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(file);

    let label_idx = match label_column {
        LabelColumn::Index(i) => *i,
        LabelColumn::Name(name) => {
            if !has_header {
                return Err(Error::MissingLabelColumn(format!("{name} (file has no header)")));
            }
            reader
                .headers()?
                .iter()
                .position(|h| h == name)
                .ok_or_else(|| Error::MissingLabelColumn(name.clone()))?
        }
    };

    let mut codes: HashMap<String, usize> = HashMap::new();
    let mut labels = Vec::new();
    let mut values = Vec::new();
    let mut width = None;
    let first_line = if has_header { 2 } else { 1 };
    for (row, record) in reader.records().enumerate() {
        let record = record?;
        if label_idx >= record.len() {
            return Err(Error::MissingLabelColumn(label_column.to_string()));
        }
        let w = *width.get_or_insert(record.len());
        if record.len() != w {
            return Err(Error::Dimension(format!(
                "line {} has {} fields, expected {w}",
                row + first_line,
                record.len()
            )));
        }
        for (col, cell) in record.iter().enumerate() {
            if col == label_idx {
                let next = codes.len();
                labels.push(*codes.entry(cell.to_string()).or_insert(next));
                continue;
            }
            match cell.parse::<f64>() {
                Ok(v) if v.is_finite() => values.push(v),
                _ => {
                    return Err(Error::BadCell {
                        row: row + first_line,
                        column: col,
                        value: cell.to_string(),
                    })
                }
            }
        }
    }
    if codes.len() < 2 {
        return Err(Error::TooFewClasses { found: codes.len() });
    }
    let d = width.unwrap_or(1) - 1;
    let features = Array2::from_shape_vec((labels.len(), d), values)
        .map_err(|e| Error::Dimension(e.to_string()))?;
    let name = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "csv".to_string());
    Dataset::new(name, features, labels)
}

/// Per-column z-score transform. Constant columns map to zero.
#[derive(Debug, Clone, PartialEq)]
pub struct Standardizer {
    pub means: Vec<f64>,
    pub scales: Vec<f64>,
}

impl Standardizer {
    pub fn fit(x: &Array2<f64>) -> Self {
        let n = x.nrows().max(1) as f64;
        let mut means = Vec::with_capacity(x.ncols());
        let mut scales = Vec::with_capacity(x.ncols());
        for col in x.columns() {
            let mean = col.sum() / n;
            let var = col.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
            means.push(mean);
            scales.push(var.sqrt());
        }
        Standardizer { means, scales }
    }

    pub fn transform(&self, x: &Array2<f64>) -> Array2<f64> {
        let mut out = x.clone();
        for (j, mut col) in out.columns_mut().into_iter().enumerate() {
            let (m, s) = (self.means[j], self.scales[j]);
            // Treat round-off-level spread as a constant column.
            if s <= 1e-12 * m.abs().max(1.0) {
                col.fill(0.0);
            } else {
                col.mapv_inplace(|v| (v - m) / s);
            }
        }
        out
    }
}

/// Standardizes every feature column of the whole dataset.
pub fn standardize(ds: &Dataset) -> Dataset {
    let st = Standardizer::fit(&ds.features);
    Dataset {
        features: st.transform(&ds.features),
        ..ds.clone()
    }
}

/// Fits the standardizer on `train` rows only and applies it to all rows.
pub fn standardize_with_train(ds: &Dataset, train: &[usize]) -> Dataset {
    let st = Standardizer::fit(&ds.rows(train));
    Dataset {
        features: st.transform(&ds.features),
        ..ds.clone()
    }
}

/// Random train/test split. Both sides are re-drawn until each contains every
/// class. Returned index lists are sorted.
pub fn split(ds: &Dataset, train_fraction: f64, seed: u64) -> Result<(Vec<usize>, Vec<usize>)> {
    if !(train_fraction > 0.0 && train_fraction < 1.0) {
        return Err(Error::invalid(format!(
            "train fraction must lie in (0, 1), got {train_fraction}"
        )));
    }
    let counts = ds.class_counts();
    if let Some(class) = counts.iter().position(|&c| c < 2) {
        return Err(Error::ClassTooSmall { class });
    }
    let n = ds.len();
    let n_train = ((n as f64) * train_fraction).round() as usize;
    let k = ds.class_count;
    if n_train < k || n - n_train < k {
        return Err(Error::invalid(format!(
            "{n_train} train / {} test samples cannot cover {k} classes",
            n - n_train
        )));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut perm: Vec<usize> = (0..n).collect();
    for _ in 0..MAX_REDRAWS {
        perm.shuffle(&mut rng);
        let (train, test) = perm.split_at(n_train);
        if covers_all(ds, train) && covers_all(ds, test) {
            let mut train = train.to_vec();
            let mut test = test.to_vec();
            train.sort_unstable();
            test.sort_unstable();
            return Ok((train, test));
        }
    }
    Err(Error::Numerical(
        "could not draw a split covering every class".into(),
    ))
}

fn covers_all(ds: &Dataset, idx: &[usize]) -> bool {
    let mut seen = vec![false; ds.class_count];
    for &i in idx {
        seen[ds.labels[i]] = true;
    }
    seen.into_iter().all(|s| s)
}

/// Disjoint labeled/unlabeled index sets over the training split, plus the
/// labels acquired so far (keyed by dataset row).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PoolState {
    pub labeled: Vec<usize>,
    pub unlabeled: Vec<usize>,
    pub acquired: BTreeMap<usize, usize>,
}

impl PoolState {
    pub fn labeled_len(&self) -> usize {
        self.labeled.len()
    }

    pub fn unlabeled_len(&self) -> usize {
        self.unlabeled.len()
    }

    /// Labels of the labeled set, in `labeled` order.
    pub fn labeled_labels(&self) -> Vec<usize> {
        self.labeled.iter().map(|i| self.acquired[i]).collect()
    }

    /// Moves `index` from the unlabeled to the labeled set.
    pub fn acquire(&mut self, index: usize, label: usize) -> Result<()> {
        let pos = self
            .unlabeled
            .iter()
            .position(|&u| u == index)
            .ok_or(Error::AlreadyQueried(index))?;
        self.unlabeled.remove(pos);
        self.labeled.push(index);
        self.acquired.insert(index, label);
        Ok(())
    }
}

/// Draws the initial labeled pool uniformly from `train`, re-drawing until it
/// holds at least two distinct classes whenever that is possible.
pub fn init_pool(train: &[usize], labels: &[usize], init_size: usize, seed: u64) -> Result<PoolState> {
    if init_size > train.len() {
        return Err(Error::invalid(format!(
            "initial pool of {init_size} exceeds {} training points",
            train.len()
        )));
    }
    let distinct: BTreeSet<usize> = train.iter().map(|&i| labels[i]).collect();
    let need_two = init_size >= 2 && distinct.len() >= 2;

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut perm = train.to_vec();
    for _ in 0..MAX_REDRAWS {
        perm.shuffle(&mut rng);
        let chosen = &perm[..init_size];
        let classes: BTreeSet<usize> = chosen.iter().map(|&i| labels[i]).collect();
        if !need_two || classes.len() >= 2 {
            let labeled = chosen.to_vec();
            let mut unlabeled = perm[init_size..].to_vec();
            unlabeled.sort_unstable();
            let acquired = labeled.iter().map(|&i| (i, labels[i])).collect();
            return Ok(PoolState {
                labeled,
                unlabeled,
                acquired,
            });
        }
    }
    Err(Error::Numerical(
        "could not draw an initial pool with two classes".into(),
    ))
}

/// Synthetic benchmark generators.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SyntheticKind {
    R15,
    Ex8aLike,
    Ex8bLike,
    GcloudBalance,
    GcloudUnbalance,
}

impl SyntheticKind {
    pub const ALL: [SyntheticKind; 5] = [
        SyntheticKind::R15,
        SyntheticKind::Ex8aLike,
        SyntheticKind::Ex8bLike,
        SyntheticKind::GcloudBalance,
        SyntheticKind::GcloudUnbalance,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SyntheticKind::R15 => "r15",
            SyntheticKind::Ex8aLike => "ex8a_like",
            SyntheticKind::Ex8bLike => "ex8b_like",
            SyntheticKind::GcloudBalance => "gcloud_balance",
            SyntheticKind::GcloudUnbalance => "gcloud_unbalance",
        }
    }
}

impl fmt::Display for SyntheticKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SyntheticKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        SyntheticKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::Unknown {
                what: "synthetic dataset",
                name: s.to_string(),
            })
    }
}

/// Separation (in units of the shared standard deviation) between the two
/// Gaussian clouds.
const GCLOUD_BALANCE_GAP: f64 = 2.6;
const GCLOUD_UNBALANCE_GAP: f64 = 3.2;

/// R15 layout: the inner ring crowds the central cluster, the outer ring is
/// well separated.
const R15_INNER_RADIUS: f64 = 1.6;
const R15_OUTER_RADIUS: f64 = 6.0;
const R15_SD: f64 = 0.3;

/// Generates one of the synthetic benchmark datasets.
pub fn gen_synthetic(kind: SyntheticKind, seed: u64) -> Result<Dataset> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed_da7a);
    let std_normal = Normal::new(0.0, 1.0).expect("valid normal");
    let mut points: Vec<[f64; 2]> = Vec::new();
    let mut labels = Vec::new();

    let mut gaussian = |rng: &mut ChaCha8Rng, center: [f64; 2], sd: f64, count: usize, label: usize| {
        for _ in 0..count {
            points.push([
                center[0] + sd * std_normal.sample(rng),
                center[1] + sd * std_normal.sample(rng),
            ]);
            labels.push(label);
        }
    };

    match kind {
        SyntheticKind::R15 => {
            // One central cluster, an inner ring of 7 and an outer ring of 7.
            let mut centers = vec![[0.0, 0.0]];
            for (radius, phase) in [(R15_INNER_RADIUS, 0.0), (R15_OUTER_RADIUS, std::f64::consts::PI / 7.0)] {
                for j in 0..7 {
                    let t = phase + 2.0 * std::f64::consts::PI * j as f64 / 7.0;
                    centers.push([radius * t.cos(), radius * t.sin()]);
                }
            }
            for (label, c) in centers.into_iter().enumerate() {
                gaussian(&mut rng, c, R15_SD, 40, label);
            }
        }
        SyntheticKind::Ex8aLike => {
            // A blob wrapped by a 270 degree crescent: not linearly separable,
            // and no single half-plane dominates.
            let arc = 0.75 * std::f64::consts::PI;
            gaussian(&mut rng, [0.0, 0.0], 0.5, 432, 0);
            for _ in 0..431 {
                let r = rng.gen_range(1.4..2.1) + 0.12 * std_normal.sample(&mut rng);
                let t = rng.gen_range(-arc..arc);
                points.push([r * t.cos(), r * t.sin()]);
                labels.push(1);
            }
        }
        SyntheticKind::Ex8bLike => {
            gaussian(&mut rng, [-1.25, -1.25], 1.0, 103, 0);
            gaussian(&mut rng, [1.25, 1.25], 1.0, 103, 1);
        }
        SyntheticKind::GcloudBalance => {
            let h = GCLOUD_BALANCE_GAP / 2.0;
            gaussian(&mut rng, [-h, 0.0], 1.0, 500, 0);
            gaussian(&mut rng, [h, 0.0], 1.0, 500, 1);
        }
        SyntheticKind::GcloudUnbalance => {
            // Positive (label 1) is the majority: 643 / 357 ≈ 1.8.
            let h = GCLOUD_UNBALANCE_GAP / 2.0;
            gaussian(&mut rng, [-h, 0.0], 1.0, 357, 0);
            gaussian(&mut rng, [h, 0.0], 1.0, 643, 1);
        }
    }

    let n = points.len();
    let flat: Vec<f64> = points.into_iter().flatten().collect();
    let features = Array2::from_shape_vec((n, 2), flat).expect("two columns");
    Dataset::new(kind.name(), features, labels)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use ndarray::array;
    use std::io::Write;

    fn write_tmp(contents: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(contents.as_bytes()).unwrap();
        f
    }

    #[test]
    fn csv_first_appearance_encoding() {
        let f = write_tmp("a,b,diagnosis\n1.0,2.0,B\n3.0,4.0,M\n5.0,6.0,B\n");
        let ds = load_csv(f.path(), &LabelColumn::Name("diagnosis".into()), true).unwrap();
        assert_eq!(ds.class_count, 2);
        assert_eq!(ds.labels, vec![0, 1, 0]);
        assert_eq!(ds.features, array![[1.0, 2.0], [3.0, 4.0], [5.0, 6.0]]);
    }

    #[test]
    fn csv_label_by_index_without_header() {
        let f = write_tmp("x,1.5,2\ny,0.5,1\nx,2.5,0\n");
        let ds = load_csv(f.path(), &LabelColumn::Index(0), false).unwrap();
        assert_eq!(ds.labels, vec![0, 1, 0]);
        assert_eq!(ds.dim(), 2);
        assert_eq!(ds.features[[2, 0]], 2.5);
    }

    #[test]
    fn csv_single_class_is_error() {
        let f = write_tmp("1,2,A\n3,4,A\n");
        let err = load_csv(f.path(), &LabelColumn::Index(2), false).unwrap_err();
        assert!(matches!(err, Error::TooFewClasses { found: 1 }));
    }

    #[test]
    fn csv_bad_cell_reports_position() {
        let f = write_tmp("f0,f1,y\n1,2,A\n3,oops,B\n");
        let err = load_csv(f.path(), &LabelColumn::Name("y".into()), true).unwrap_err();
        match err {
            Error::BadCell { row, column, value } => {
                assert_eq!((row, column, value.as_str()), (3, 1, "oops"));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn csv_missing_file() {
        let err = load_csv("/nonexistent/file.csv", &LabelColumn::Index(0), false).unwrap_err();
        assert!(matches!(err, Error::Io { .. }));
    }

    #[test]
    fn standardize_column_and_constant() {
        let ds = Dataset::new("t", array![[1.0, 5.0], [2.0, 5.0], [3.0, 5.0]], vec![0, 1, 0]).unwrap();
        let s = standardize(&ds);
        let col = s.features.column(0);
        assert_abs_diff_eq!(col.sum() / 3.0, 0.0, epsilon = 1e-15);
        let sd = (col.iter().map(|v| v * v).sum::<f64>() / 3.0).sqrt();
        assert_abs_diff_eq!(sd, 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(col[0], -(1.5f64).sqrt(), epsilon = 1e-15);
        assert!(s.features.column(1).iter().all(|&v| v == 0.0));
    }

    #[test]
    fn standardize_idempotent() {
        let ds = gen_synthetic(SyntheticKind::Ex8bLike, 3).unwrap();
        let once = standardize(&ds);
        let twice = standardize(&once);
        let diff = (&once.features - &twice.features).iter().fold(0.0f64, |m, v| m.max(v.abs()));
        assert!(diff <= 1e-12);
        assert!(twice.features.iter().all(|v| v.is_finite()));
    }

    #[test]
    fn split_sizes_and_determinism() {
        let feats = Array2::from_shape_fn((100, 2), |(i, j)| (i * 2 + j) as f64);
        let labels = (0..100).map(|i| i % 2).collect();
        let ds = Dataset::new("t", feats, labels).unwrap();
        let (tr, te) = split(&ds, 0.6, 42).unwrap();
        assert_eq!((tr.len(), te.len()), (60, 40));
        let all: BTreeSet<usize> = tr.iter().chain(&te).copied().collect();
        assert_eq!(all.len(), 100);
        assert_eq!(split(&ds, 0.6, 42).unwrap(), (tr.clone(), te));
        assert_ne!(split(&ds, 0.6, 43).unwrap().0, tr);
    }

    #[test]
    fn split_singleton_class_is_error() {
        let ds = Dataset::new("t", Array2::zeros((5, 1)), vec![0, 1, 2, 3, 4]).unwrap();
        assert!(matches!(split(&ds, 0.6, 0), Err(Error::ClassTooSmall { class: 0 })));
    }

    #[test]
    fn split_rejects_bad_fraction() {
        let ds = gen_synthetic(SyntheticKind::Ex8bLike, 0).unwrap();
        assert!(split(&ds, 1.0, 0).is_err());
        assert!(split(&ds, 0.0, 0).is_err());
    }

    #[test]
    fn init_pool_sizes() {
        let train: Vec<usize> = (0..360).collect();
        let labels: Vec<usize> = (0..360).map(|i| i % 3).collect();
        let pool = init_pool(&train, &labels, 20, 7).unwrap();
        assert_eq!((pool.labeled_len(), pool.unlabeled_len()), (20, 340));
        assert_eq!(pool, init_pool(&train, &labels, 20, 7).unwrap());
        let full = init_pool(&train, &labels, 360, 7).unwrap();
        assert!(full.unlabeled.is_empty());
        assert!(init_pool(&train, &labels, 361, 7).is_err());
    }

    #[test]
    fn init_pool_redraws_for_two_classes() {
        // 1 positive among 40: most draws of size 2 are single-class.
        let train: Vec<usize> = (0..40).collect();
        let labels: Vec<usize> = (0..40).map(|i| usize::from(i == 17)).collect();
        for seed in 0..20 {
            let pool = init_pool(&train, &labels, 2, seed).unwrap();
            assert!(pool.labeled.contains(&17));
        }
    }

    #[test]
    fn pool_acquire_moves_index() {
        let train: Vec<usize> = (0..10).collect();
        let labels: Vec<usize> = (0..10).map(|i| i % 2).collect();
        let mut pool = init_pool(&train, &labels, 4, 1).unwrap();
        let u = pool.unlabeled[0];
        pool.acquire(u, labels[u]).unwrap();
        assert_eq!((pool.labeled_len(), pool.unlabeled_len()), (5, 5));
        assert!(matches!(pool.acquire(u, 0), Err(Error::AlreadyQueried(_))));
    }

    #[test]
    fn synthetic_shapes() {
        let expect = [
            (SyntheticKind::R15, 600, 15),
            (SyntheticKind::Ex8aLike, 863, 2),
            (SyntheticKind::Ex8bLike, 206, 2),
            (SyntheticKind::GcloudBalance, 1000, 2),
            (SyntheticKind::GcloudUnbalance, 1000, 2),
        ];
        for (kind, n, k) in expect {
            let ds = gen_synthetic(kind, 1).unwrap();
            assert_eq!((ds.len(), ds.dim(), ds.class_count), (n, 2, k), "{kind}");
        }
        let r15 = gen_synthetic(SyntheticKind::R15, 1).unwrap();
        assert!(r15.class_counts().iter().all(|&c| c == 40));
        let bal = gen_synthetic(SyntheticKind::GcloudBalance, 1).unwrap();
        assert_abs_diff_eq!(bal.imbalance_ratio(), 1.0);
        let unb = gen_synthetic(SyntheticKind::GcloudUnbalance, 1).unwrap();
        assert_eq!(unb.class_counts(), vec![357, 643]);
        assert!((unb.imbalance_ratio() - 1.8).abs() < 0.01);
    }

    #[test]
    fn synthetic_kind_parsing() {
        assert_eq!("r15".parse::<SyntheticKind>().unwrap(), SyntheticKind::R15);
        assert!("moons".parse::<SyntheticKind>().is_err());
    }
}
