//! The active-learning loop, its baselines and the simulated oracle.

use std::collections::HashSet;
use std::fmt;
use std::str::FromStr;

use ndarray::{Array1, Array2};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::committee::{self, ModelKind, ModelParams, TrainedModel};
use crate::dataset::{self, Dataset, PoolState};
use crate::error::{Error, Result};
use crate::eval::{self, BudgetCurve, Metrics};
use crate::glad::{self, GladConfig, GladFit, InfoScores};
use crate::kdpp;
use crate::kernels::{self, KernelParams};
use crate::representativeness as rep;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum StrategyKind {
    /// Committee informativeness, k-center representativeness and DPP diversity.
    KdppMulti,
    Uniform,
    /// Smallest gap between the evaluator's two best class scores.
    Margin,
    /// Greedy k-center with the labeled set as fixed centers.
    Kcenter,
}

impl StrategyKind {
    pub const ALL: [StrategyKind; 4] = [
        StrategyKind::KdppMulti,
        StrategyKind::Uniform,
        StrategyKind::Margin,
        StrategyKind::Kcenter,
    ];

    pub fn name(self) -> &'static str {
        match self {
            StrategyKind::KdppMulti => "kdpp_multi",
            StrategyKind::Uniform => "uniform",
            StrategyKind::Margin => "margin",
            StrategyKind::Kcenter => "kcenter",
        }
    }
}

impl fmt::Display for StrategyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for StrategyKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        StrategyKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::Unknown {
                what: "strategy",
                name: s.to_string(),
            })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AlConfig {
    pub committee: Vec<ModelKind>,
    pub committee_params: ModelParams,
    pub evaluator: ModelKind,
    pub evaluator_params: ModelParams,
    pub glad: GladConfig,
    pub kernel: KernelParams,
    /// Fixed number of k-center centers; `None` follows the pool-size schedule.
    pub kappa: Option<usize>,
    pub init_size: usize,
    pub train_fraction: f64,
}

impl Default for AlConfig {
    fn default() -> Self {
        AlConfig {
            committee: ModelKind::ALL.to_vec(),
            committee_params: ModelParams::default(),
            evaluator: ModelKind::SvmRbf,
            evaluator_params: ModelParams::default(),
            glad: GladConfig::default(),
            kernel: KernelParams::default(),
            kappa: None,
            init_size: 20,
            train_fraction: 0.6,
        }
    }
}

/// Ground-truth lookup that refuses to answer the same index twice.
#[derive(Debug, Clone)]
pub struct Oracle<'a> {
    labels: &'a [usize],
    asked: HashSet<usize>,
}

impl<'a> Oracle<'a> {
    pub fn new(labels: &'a [usize]) -> Self {
        Oracle {
            labels,
            asked: HashSet::new(),
        }
    }

    pub fn query(&mut self, index: usize) -> Result<usize> {
        let label = *self
            .labels
            .get(index)
            .ok_or_else(|| Error::invalid(format!("index {index} outside the dataset")))?;
        if !self.asked.insert(index) {
            return Err(Error::AlreadyQueried(index));
        }
        Ok(label)
    }

    pub fn queries(&self) -> usize {
        self.asked.len()
    }
}

/// What was chosen in one round and how it scored.
#[derive(Debug, Clone, PartialEq)]
pub struct SelectionRecord {
    pub round: usize,
    /// Dataset row indices, in the order returned by the strategy.
    pub chosen: Vec<usize>,
    /// Share of the pool's total informativeness held by the batch.
    pub informativeness: Option<f64>,
    /// Share of the pool's total representativeness held by the batch.
    pub representativeness: Option<f64>,
    /// Mean pairwise Euclidean distance within the batch.
    pub diversity: Option<f64>,
    /// Committee abilities fitted this round, in committee order.
    pub beta: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Curves {
    pub acc: BudgetCurve,
    pub auc: BudgetCurve,
    pub f1: BudgetCurve,
}

impl Curves {
    fn push(&mut self, budget: usize, m: Metrics) -> Result<()> {
        self.acc.push(budget, m.acc)?;
        self.auc.push(budget, m.auc)?;
        self.f1.push(budget, m.f1)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunRecord {
    pub dataset: String,
    pub strategy: StrategyKind,
    pub batch_size: usize,
    pub seed: u64,
    pub curves: Curves,
    pub selections: Vec<SelectionRecord>,
    pub queries: usize,
}

/// Informativeness, representativeness and similarity for the current pool.
#[derive(Debug, Clone)]
pub struct PoolScores {
    pub fit: GladFit,
    pub info: InfoScores,
    pub centers: rep::CenterSet,
    pub similarity: kernels::SimilarityMatrix,
}

const POOL_SEED_SALT: u64 = 0x9e37_79b9_7f4a_7c15;
const STRATEGY_SEED_SALT: u64 = 0xd1b5_4a32_d192_ed03;

/// One seeded trial, advanced a batch at a time.
pub struct Trial<'a> {
    cfg: &'a AlConfig,
    strategy: StrategyKind,
    /// Features standardized on the training split.
    ds: Dataset,
    train: Vec<usize>,
    test: Vec<usize>,
    /// Maps a dataset row to its position in `train`.
    train_pos: Vec<usize>,
    dist: Array2<f64>,
    pool: PoolState,
    oracle: Oracle<'a>,
    rng: ChaCha8Rng,
    evaluator: Option<TrainedModel>,
    round: usize,
}

impl<'a> Trial<'a> {
    pub fn new(ds: &'a Dataset, strategy: StrategyKind, seed: u64, cfg: &'a AlConfig) -> Result<Self> {
        let (train, test) = dataset::split(ds, cfg.train_fraction, seed)?;
        let pool = dataset::init_pool(&train, &ds.labels, cfg.init_size, seed ^ POOL_SEED_SALT)?;
        let mut oracle = Oracle::new(&ds.labels);
        for &i in &pool.labeled {
            oracle.query(i)?;
        }
        let std_ds = dataset::standardize_with_train(ds, &train);
        let mut train_pos = vec![usize::MAX; ds.len()];
        for (p, &i) in train.iter().enumerate() {
            train_pos[i] = p;
        }
        let dist = rep::pairwise_distances(&std_ds.rows(&train));
        Ok(Trial {
            cfg,
            strategy,
            ds: std_ds,
            train,
            test,
            train_pos,
            dist,
            pool,
            oracle,
            rng: ChaCha8Rng::seed_from_u64(seed ^ STRATEGY_SEED_SALT),
            evaluator: None,
            round: 0,
        })
    }

    pub fn pool(&self) -> &PoolState {
        &self.pool
    }

    /// The dataset with features standardized on this trial's training split.
    pub fn standardized(&self) -> &Dataset {
        &self.ds
    }

    pub fn test_indices(&self) -> &[usize] {
        &self.test
    }

    pub fn queries(&self) -> usize {
        self.oracle.queries()
    }

    /// Trains the evaluator on the labeled set and scores the test split.
    pub fn evaluate(&mut self) -> Result<Metrics> {
        let x = self.ds.rows(&self.pool.labeled);
        let y = self.pool.labeled_labels();
        let model = committee::fit(self.cfg.evaluator, &x, &y, self.ds.class_count, &self.cfg.evaluator_params)?;
        let xt = self.ds.rows(&self.test);
        let scores = model.decision_scores(&xt)?;
        let pred = committee::argmax_rows(&scores.view());
        let m = eval::metrics(&self.ds.labels_at(&self.test), &pred, &scores, self.ds.class_count)?;
        self.evaluator = Some(model);
        Ok(m)
    }

    /// Committee votes, GLAD and representativeness over the unlabeled pool.
    pub fn pool_scores(&self) -> Result<PoolScores> {
        let k = self.ds.class_count;
        let xl = self.ds.rows(&self.pool.labeled);
        let members = committee::fit_committee(
            &self.cfg.committee,
            &xl,
            &self.pool.labeled_labels(),
            k,
            &self.cfg.committee_params,
        )?;
        let xu = self.ds.rows(&self.pool.unlabeled);
        let votes = committee::vote_matrix(&members, &xu)?;
        let (fit, info) = glad::info_scores(&votes, k, &self.cfg.glad)?;

        let n_u = self.pool.unlabeled.len();
        let kappa = self
            .cfg
            .kappa
            .unwrap_or_else(|| rep::kappa_schedule(n_u))
            .clamp(1, n_u);
        let given: Vec<usize> = self.pool.labeled.iter().map(|&i| self.train_pos[i]).collect();
        let cands: Vec<usize> = self.pool.unlabeled.iter().map(|&i| self.train_pos[i]).collect();
        let centers = rep::kcenter_greedy(&self.dist, &given, &cands, kappa)?;
        let center_rows: Vec<usize> = centers
            .centers
            .iter()
            .map(|&p| self.train[p])
            .collect();
        let r = rep::rep_vectors(&xu, &self.ds.rows(&center_rows))?;
        let similarity = kernels::similarity_matrix(&r, &self.cfg.kernel, kappa)?;
        Ok(PoolScores {
            fit,
            info,
            centers,
            similarity,
        })
    }

    fn diversity(&self, chosen: &[usize]) -> Option<f64> {
        if chosen.len() < 2 {
            return None;
        }
        let mut total = 0.0;
        let mut pairs = 0usize;
        for (a, &i) in chosen.iter().enumerate() {
            for &j in &chosen[a + 1..] {
                total += self.dist[[self.train_pos[i], self.train_pos[j]]];
                pairs += 1;
            }
        }
        Some(total / pairs as f64)
    }

    /// Picks `k` unlabeled rows with the trial's strategy (no labels queried).
    fn select(&mut self, k: usize) -> Result<SelectionRecord> {
        let unl = &self.pool.unlabeled;
        let mut record = SelectionRecord {
            round: self.round + 1,
            chosen: Vec::new(),
            informativeness: None,
            representativeness: None,
            diversity: None,
            beta: None,
        };
        match self.strategy {
            StrategyKind::Uniform => {
                record.chosen = unl.choose_multiple(&mut self.rng, k).copied().collect();
            }
            StrategyKind::Margin => {
                let model = match &self.evaluator {
                    Some(m) => m,
                    None => {
                        self.evaluate()?;
                        self.evaluator.as_ref().expect("evaluator fitted")
                    }
                };
                let unl = &self.pool.unlabeled;
                let scores = model.decision_scores(&self.ds.rows(unl))?;
                let gaps: Vec<f64> = scores
                    .rows()
                    .into_iter()
                    .map(|row| {
                        let (mut a, mut b) = (f64::NEG_INFINITY, f64::NEG_INFINITY);
                        for &v in row {
                            if v > a {
                                b = a;
                                a = v;
                            } else if v > b {
                                b = v;
                            }
                        }
                        a - b
                    })
                    .collect();
                let mut order: Vec<usize> = (0..unl.len()).collect();
                order.sort_by(|&x, &y| gaps[x].total_cmp(&gaps[y]).then(x.cmp(&y)));
                record.chosen = order[..k].iter().map(|&p| unl[p]).collect();
            }
            StrategyKind::Kcenter => {
                let given: Vec<usize> = self.pool.labeled.iter().map(|&i| self.train_pos[i]).collect();
                let cands: Vec<usize> = unl.iter().map(|&i| self.train_pos[i]).collect();
                let cs = rep::kcenter_greedy(&self.dist, &given, &cands, k)?;
                record.chosen = cs
                    .centers
                    .iter()
                    .map(|&p| self.train[p])
                    .collect();
            }
            StrategyKind::KdppMulti => {
                let scores = self.pool_scores()?;
                let mu = &scores.info.mu;
                let picked = if k == 1 {
                    let diag = kdpp::l_diagonal(mu, &scores.similarity)?;
                    vec![kdpp::sample_from_diagonal(diag.as_slice().expect("contiguous"), &mut self.rng)]
                } else {
                    let l = kdpp::build_l(mu, &scores.similarity)?;
                    kdpp::sample_kdpp(&l, k, &mut self.rng)?
                };
                let rep_score: Array1<f64> = scores.similarity.s.mean_axis(ndarray::Axis(1)).expect("nonempty pool");
                let share = |v: &Array1<f64>| {
                    let total = v.sum();
                    if total > 0.0 {
                        picked.iter().map(|&p| v[p]).sum::<f64>() / total
                    } else {
                        0.0
                    }
                };
                record.informativeness = Some(share(mu));
                record.representativeness = Some(share(&rep_score));
                record.beta = Some(scores.fit.beta.to_vec());
                let unl = &self.pool.unlabeled;
                record.chosen = picked.iter().map(|&p| unl[p]).collect();
            }
        }
        record.diversity = self.diversity(&record.chosen);
        Ok(record)
    }

    /// Selects and labels one batch of up to `k` rows.
    pub fn step(&mut self, k: usize) -> Result<SelectionRecord> {
        if k == 0 {
            return Err(Error::invalid("batch size must be at least 1"));
        }
        if k > self.pool.unlabeled.len() {
            return Err(Error::invalid(format!(
                "batch of {k} exceeds {} unlabeled rows",
                self.pool.unlabeled.len()
            )));
        }
        let record = self.select(k)?;
        for &i in &record.chosen {
            let label = self.oracle.query(i)?;
            self.pool.acquire(i, label)?;
        }
        self.round += 1;
        self.evaluator = None;
        Ok(record)
    }
}

/// Budget that labels the whole training pool.
pub fn exhaust_budget(ds: &Dataset, cfg: &AlConfig) -> usize {
    let n_train = ((ds.len() as f64) * cfg.train_fraction).round() as usize;
    n_train.saturating_sub(cfg.init_size)
}

/// Runs one trial: `budget` labels in batches of `batch`, evaluating after
/// every batch. The last batch is smaller when `batch` does not divide the
/// budget.
pub fn run_al(
    ds: &Dataset,
    strategy: StrategyKind,
    budget: usize,
    batch: usize,
    seed: u64,
    cfg: &AlConfig,
) -> Result<RunRecord> {
    if batch == 0 {
        return Err(Error::invalid("batch size must be at least 1"));
    }
    let mut trial = Trial::new(ds, strategy, seed, cfg)?;
    if budget > trial.pool.unlabeled.len() {
        return Err(Error::invalid(format!(
            "budget {budget} exceeds the {} unlabeled training rows",
            trial.pool.unlabeled.len()
        )));
    }
    let mut curves = Curves::default();
    curves.push(trial.pool.labeled.len(), trial.evaluate()?)?;
    let mut selections = Vec::new();
    let mut spent = 0;
    while spent < budget {
        let k = batch.min(budget - spent);
        let sel = trial.step(k)?;
        spent += sel.chosen.len();
        selections.push(sel);
        curves.push(trial.pool.labeled.len(), trial.evaluate()?)?;
    }
    Ok(RunRecord {
        dataset: ds.name.clone(),
        strategy,
        batch_size: batch,
        seed,
        curves,
        selections,
        queries: trial.queries() - cfg.init_size,
    })
}

/// Returned for rounds before the first negative label is acquired.
pub const PN_SENTINEL: f64 = f64::INFINITY;

/// Cumulative positive/negative ratio of acquired labels after each round,
/// with class 1 as positive.
pub fn pn_ratio_trace(record: &RunRecord, ds: &Dataset) -> Result<Vec<f64>> {
    if ds.class_count != 2 {
        return Err(Error::invalid(format!(
            "PN ratio needs a binary dataset, {} has {} classes",
            ds.name, ds.class_count
        )));
    }
    let (mut pos, mut neg) = (0usize, 0usize);
    let mut out = Vec::with_capacity(record.selections.len());
    for sel in &record.selections {
        for &i in &sel.chosen {
            if ds.labels[i] == 1 {
                pos += 1;
            } else {
                neg += 1;
            }
        }
        out.push(if neg == 0 { PN_SENTINEL } else { pos as f64 / neg as f64 });
    }
    Ok(out)
}
