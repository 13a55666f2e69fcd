//! Configuration-driven experiment runner behind the `dppal` binary.
//!
//! A run config is a flat `key = value` file with dotted sections:
//!
//! ```text
//! datasets = gcloud_balance, r15
//! strategies = kdpp_multi, uniform
//! batch_sizes = 1, 5
//! trials = 10
//! budget = 300
//! kernel.kind = laplacian
//! glad.max_iter = 100
//! out_dir = results
//! ```
//!
//! Blank lines and lines starting with `#` are ignored. Every key can be
//! overridden after parsing through [`RunConfig::set`].

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use sha2::{Digest, Sha256};

use crate::alcore::{self, AlConfig, RunRecord, StrategyKind};
use crate::committee::ModelKind;
use crate::dataset::{self, Dataset, LabelColumn, SyntheticKind};
use crate::error::{Error, Result};
use crate::eval::{self, PBand, SummaryTable};
use crate::kernels::KernelKind;

/// Environment variable that overrides the worker count.
pub const WORKERS_ENV: &str = "DPPAL_WORKERS";

pub const METRICS: [&str; 3] = ["acc", "auc", "f1"];

#[derive(Debug, Clone, PartialEq)]
pub enum DatasetSource {
    Synthetic(SyntheticKind),
    Csv(PathBuf),
}

impl DatasetSource {
    fn parse(s: &str) -> Self {
        match s.parse::<SyntheticKind>() {
            Ok(k) => DatasetSource::Synthetic(k),
            Err(_) => DatasetSource::Csv(PathBuf::from(s)),
        }
    }

    fn label(&self) -> String {
        match self {
            DatasetSource::Synthetic(k) => k.name().to_string(),
            DatasetSource::Csv(p) => p.display().to_string(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Budget {
    Fixed(usize),
    /// Label the whole training pool.
    Exhaust,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub datasets: Vec<DatasetSource>,
    pub strategies: Vec<StrategyKind>,
    pub batch_sizes: Vec<usize>,
    pub trials: usize,
    pub base_seed: u64,
    pub budget: Budget,
    /// Seed passed to the synthetic generators.
    pub data_seed: u64,
    pub csv_label: LabelColumn,
    pub csv_header: bool,
    pub al: AlConfig,
    pub out_dir: PathBuf,
    /// `None` uses the available parallelism.
    pub workers: Option<usize>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            datasets: vec![DatasetSource::Synthetic(SyntheticKind::GcloudBalance)],
            strategies: StrategyKind::ALL.to_vec(),
            batch_sizes: vec![1],
            trials: 10,
            base_seed: 0,
            budget: Budget::Exhaust,
            data_seed: 0,
            csv_label: LabelColumn::Name("label".into()),
            csv_header: true,
            al: AlConfig::default(),
            out_dir: PathBuf::from("results"),
            workers: None,
        }
    }
}

fn list(value: &str) -> Vec<&str> {
    value.split(',').map(str::trim).filter(|s| !s.is_empty()).collect()
}

fn num<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .parse()
        .map_err(|_| Error::Config(format!("{key}: cannot parse {value:?}")))
}

fn flag(key: &str, value: &str) -> Result<bool> {
    match value {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        _ => Err(Error::Config(format!("{key}: expected true or false, got {value:?}"))),
    }
}

fn opt_num<T: std::str::FromStr>(key: &str, value: &str) -> Result<Option<T>> {
    if value == "auto" {
        Ok(None)
    } else {
        num(key, value).map(Some)
    }
}

fn render_opt<T: ToString>(v: &Option<T>) -> String {
    v.as_ref().map_or_else(|| "auto".to_string(), T::to_string)
}

fn join<T: ToString>(items: &[T]) -> String {
    items.iter().map(T::to_string).collect::<Vec<_>>().join(",")
}

impl RunConfig {
    /// Parses a config file's text on top of the defaults.
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = RunConfig::default();
        for (n, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected key = value", n + 1)))?;
            cfg.set(key.trim(), value.trim())?;
        }
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        RunConfig::parse(&text)
    }

    /// Sets one dotted key.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        match key {
            "datasets" => self.datasets = list(value).into_iter().map(DatasetSource::parse).collect(),
            "strategies" => {
                self.strategies = list(value)
                    .into_iter()
                    .map(str::parse)
                    .collect::<Result<Vec<StrategyKind>>>()?
            }
            "batch_sizes" => {
                self.batch_sizes = list(value)
                    .into_iter()
                    .map(|v| num(key, v))
                    .collect::<Result<Vec<usize>>>()?
            }
            "trials" => self.trials = num(key, value)?,
            "base_seed" => self.base_seed = num(key, value)?,
            "budget" => {
                self.budget = if value == "exhaust" {
                    Budget::Exhaust
                } else {
                    Budget::Fixed(num(key, value)?)
                }
            }
            "data_seed" => self.data_seed = num(key, value)?,
            "csv.label_column" => self.csv_label = value.parse().expect("infallible"),
            "csv.header" => self.csv_header = flag(key, value)?,
            "out_dir" => self.out_dir = PathBuf::from(value),
            "workers" => self.workers = opt_num(key, value)?,
            "al.init_size" => self.al.init_size = num(key, value)?,
            "al.train_fraction" => self.al.train_fraction = num(key, value)?,
            "kernel.kind" => self.al.kernel.kind = value.parse::<KernelKind>()?,
            "kernel.c0" => self.al.kernel.c0 = num(key, value)?,
            "kernel.d0" => self.al.kernel.d0 = num(key, value)?,
            "kernel.kappa" => self.al.kappa = opt_num(key, value)?,
            "glad.max_iter" => self.al.glad.max_iter = num(key, value)?,
            "glad.tol" => self.al.glad.tol = num(key, value)?,
            "glad.m_step_iter" => self.al.glad.m_step_iter = num(key, value)?,
            "glad.prior_sd" => self.al.glad.prior_sd = num(key, value)?,
            "committee.members" => {
                self.al.committee = list(value)
                    .into_iter()
                    .map(str::parse)
                    .collect::<Result<Vec<ModelKind>>>()?
            }
            "committee.logistic_l2" => self.al.committee_params.logistic_l2 = num(key, value)?,
            "committee.logistic_max_iter" => self.al.committee_params.logistic_max_iter = num(key, value)?,
            "committee.logistic_tol" => self.al.committee_params.logistic_tol = num(key, value)?,
            "committee.lda_ridge" => self.al.committee_params.lda_ridge = num(key, value)?,
            "committee.svm_c" => self.al.committee_params.svm_c = num(key, value)?,
            "committee.svm_tol" => self.al.committee_params.svm_tol = num(key, value)?,
            "committee.svm_max_iter" => self.al.committee_params.svm_max_iter = num(key, value)?,
            "committee.gamma" => self.al.committee_params.gamma = opt_num(key, value)?,
            "committee.poly_degree" => self.al.committee_params.poly_degree = num(key, value)?,
            "committee.poly_coef0" => self.al.committee_params.poly_coef0 = num(key, value)?,
            "committee.gpc_max_iter" => self.al.committee_params.gpc_max_iter = num(key, value)?,
            "evaluator.kind" => self.al.evaluator = value.parse()?,
            "evaluator.svm_c" => self.al.evaluator_params.svm_c = num(key, value)?,
            "evaluator.gamma" => self.al.evaluator_params.gamma = opt_num(key, value)?,
            _ => return Err(Error::Config(format!("unknown key {key:?}"))),
        }
        Ok(())
    }

    /// Every key with its resolved value, sorted by key. Parsing this text
    /// reproduces the config.
    pub fn canonical(&self) -> String {
        let cp = &self.al.committee_params;
        let ep = &self.al.evaluator_params;
        let budget = match self.budget {
            Budget::Fixed(b) => b.to_string(),
            Budget::Exhaust => "exhaust".into(),
        };
        let datasets: Vec<String> = self.datasets.iter().map(DatasetSource::label).collect();
        let pairs: BTreeMap<&str, String> = [
            ("datasets", datasets.join(",")),
            ("strategies", join(&self.strategies)),
            ("batch_sizes", join(&self.batch_sizes)),
            ("trials", self.trials.to_string()),
            ("base_seed", self.base_seed.to_string()),
            ("budget", budget),
            ("data_seed", self.data_seed.to_string()),
            ("csv.label_column", self.csv_label.to_string()),
            ("csv.header", self.csv_header.to_string()),
            ("al.init_size", self.al.init_size.to_string()),
            ("al.train_fraction", self.al.train_fraction.to_string()),
            ("kernel.kind", self.al.kernel.kind.to_string()),
            ("kernel.c0", self.al.kernel.c0.to_string()),
            ("kernel.d0", self.al.kernel.d0.to_string()),
            ("kernel.kappa", render_opt(&self.al.kappa)),
            ("glad.max_iter", self.al.glad.max_iter.to_string()),
            ("glad.tol", self.al.glad.tol.to_string()),
            ("glad.m_step_iter", self.al.glad.m_step_iter.to_string()),
            ("glad.prior_sd", self.al.glad.prior_sd.to_string()),
            ("committee.members", join(&self.al.committee)),
            ("committee.logistic_l2", cp.logistic_l2.to_string()),
            ("committee.logistic_max_iter", cp.logistic_max_iter.to_string()),
            ("committee.logistic_tol", cp.logistic_tol.to_string()),
            ("committee.lda_ridge", cp.lda_ridge.to_string()),
            ("committee.svm_c", cp.svm_c.to_string()),
            ("committee.svm_tol", cp.svm_tol.to_string()),
            ("committee.svm_max_iter", cp.svm_max_iter.to_string()),
            ("committee.gamma", render_opt(&cp.gamma)),
            ("committee.poly_degree", cp.poly_degree.to_string()),
            ("committee.poly_coef0", cp.poly_coef0.to_string()),
            ("committee.gpc_max_iter", cp.gpc_max_iter.to_string()),
            ("evaluator.kind", self.al.evaluator.to_string()),
            ("evaluator.svm_c", ep.svm_c.to_string()),
            ("evaluator.gamma", render_opt(&ep.gamma)),
        ]
        .into_iter()
        .collect();
        pairs.iter().fold(String::new(), |mut s, (k, v)| {
            let _ = writeln!(s, "{k} = {v}");
            s
        })
    }

    /// Short digest of the experiment-defining keys. Output location and
    /// worker count do not change results and are left out.
    pub fn hash(&self) -> String {
        let digest = Sha256::digest(self.canonical().as_bytes());
        digest[..8].iter().fold(String::new(), |mut s, b| {
            let _ = write!(s, "{b:02x}");
            s
        })
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::Config(m.to_string()));
        if self.trials == 0 {
            return bad("trials must be at least 1");
        }
        if self.batch_sizes.is_empty() || self.batch_sizes.contains(&0) {
            return bad("batch_sizes must be a nonempty list of positive integers");
        }
        if self.datasets.is_empty() {
            return bad("datasets is empty");
        }
        if self.strategies.is_empty() {
            return bad("strategies is empty");
        }
        if self.al.committee.is_empty() {
            return bad("committee.members is empty");
        }
        if !(self.al.train_fraction > 0.0 && self.al.train_fraction < 1.0) {
            return bad("al.train_fraction must lie in (0, 1)");
        }
        if !(self.al.glad.prior_sd > 0.0) {
            return bad("glad.prior_sd must be positive (inf disables the prior)");
        }
        if self.workers == Some(0) {
            return bad("workers must be at least 1");
        }
        Ok(())
    }

    fn comment_line(&self) -> String {
        format!("# config_hash={} base_seed={}\n", self.hash(), self.base_seed)
    }
}

/// Worker count from the environment, if set and valid.
pub fn workers_from_env() -> Result<Option<usize>> {
    match std::env::var(WORKERS_ENV) {
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => Err(Error::Config(format!("{WORKERS_ENV} must be a positive integer, got {v:?}"))),
        },
        Err(_) => Ok(None),
    }
}

/// Loads every configured dataset; fails on the first unresolvable one.
pub fn resolve_datasets(cfg: &RunConfig) -> Result<Vec<Dataset>> {
    cfg.datasets
        .iter()
        .map(|src| match src {
            DatasetSource::Synthetic(k) => dataset::gen_synthetic(*k, cfg.data_seed),
            DatasetSource::Csv(p) => dataset::load_csv(p, &cfg.csv_label, cfg.csv_header),
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct Cell {
    dataset: usize,
    strategy: StrategyKind,
    batch: usize,
    trial: usize,
}

/// Everything a run produced, in deterministic cell order.
#[derive(Debug, Clone)]
pub struct RunOutput {
    pub records: Vec<RunRecord>,
    pub files: Vec<PathBuf>,
}

/// Runs the whole grid and writes curves, summary, ranks, t-test and
/// selection tables into `cfg.out_dir`.
pub fn run(cfg: &RunConfig) -> Result<RunOutput> {
    cfg.validate()?;
    let datasets = resolve_datasets(cfg)?;
    fs::create_dir_all(&cfg.out_dir).map_err(|e| Error::io(&cfg.out_dir, e))?;

    let budgets: Vec<usize> = datasets
        .iter()
        .map(|ds| match cfg.budget {
            Budget::Fixed(b) => b,
            Budget::Exhaust => alcore::exhaust_budget(ds, &cfg.al),
        })
        .collect();

    let mut cells = Vec::new();
    for d in 0..datasets.len() {
        for &strategy in &cfg.strategies {
            for &batch in &cfg.batch_sizes {
                for trial in 0..cfg.trials {
                    cells.push(Cell {
                        dataset: d,
                        strategy,
                        batch,
                        trial,
                    });
                }
            }
        }
    }

    let workers = cfg
        .workers
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::Config(format!("cannot start worker pool: {e}")))?;
    log::info!("running {} cells on {workers} worker(s)", cells.len());

    let records: Vec<RunRecord> = pool.install(|| {
        cells
            .par_iter()
            .map(|c| {
                let ds = &datasets[c.dataset];
                let seed = cfg.base_seed + c.trial as u64;
                let rec = alcore::run_al(ds, c.strategy, budgets[c.dataset], c.batch, seed, &cfg.al)?;
                log::debug!("{} {} S={} trial {} done", ds.name, c.strategy, c.batch, c.trial);
                Ok(rec)
            })
            .collect::<Result<Vec<_>>>()
    })?;

    let tables = [
        ("curves.csv", curves_csv(cfg, &records)),
        ("summary.csv", summary_csv(cfg, &records)?),
        ("ranks.csv", ranks_csv(cfg, &records)?),
        ("ttest.csv", ttest_csv(cfg, &records)?),
        ("selections.csv", selections_csv(cfg, &records)),
    ];
    let mut files = Vec::new();
    for (name, body) in tables {
        files.push(write_atomic(&cfg.out_dir.join(name), &body)?);
    }
    Ok(RunOutput { records, files })
}

fn write_atomic(path: &Path, body: &str) -> Result<PathBuf> {
    let tmp = path.with_extension("tmp");
    fs::write(&tmp, body).map_err(|e| Error::io(&tmp, e))?;
    fs::rename(&tmp, path).map_err(|e| Error::io(path, e))?;
    Ok(path.to_path_buf())
}

fn trial_of(cfg: &RunConfig, rec: &RunRecord) -> u64 {
    rec.seed - cfg.base_seed
}

fn curve_of<'a>(rec: &'a RunRecord, metric: &str) -> &'a eval::BudgetCurve {
    match metric {
        "acc" => &rec.curves.acc,
        "auc" => &rec.curves.auc,
        _ => &rec.curves.f1,
    }
}

/// Long format, one row per evaluation. `budget` counts queried labels.
fn curves_csv(cfg: &RunConfig, records: &[RunRecord]) -> String {
    let mut s = cfg.comment_line();
    s.push_str("dataset,strategy,S,trial,budget,acc,auc,f1\n");
    for rec in records {
        let base = rec.curves.acc.points()[0].0;
        let (acc, auc, f1) = (rec.curves.acc.points(), rec.curves.auc.points(), rec.curves.f1.points());
        for i in 0..acc.len() {
            let _ = writeln!(
                s,
                "{},{},{},{},{},{},{},{}",
                rec.dataset,
                rec.strategy,
                rec.batch_size,
                trial_of(cfg, rec),
                acc[i].0 - base,
                acc[i].1,
                auc[i].1,
                f1[i].1
            );
        }
    }
    s
}

/// AUBC values per (dataset, strategy, S) cell, keyed in first-seen order.
type Groups<'a> = Vec<((&'a str, StrategyKind, usize), Vec<&'a RunRecord>)>;

fn group(records: &[RunRecord]) -> Groups<'_> {
    let mut out: Groups<'_> = Vec::new();
    for rec in records {
        let key = (rec.dataset.as_str(), rec.strategy, rec.batch_size);
        match out.iter_mut().find(|(k, _)| *k == key) {
            Some((_, v)) => v.push(rec),
            None => out.push((key, vec![rec])),
        }
    }
    out
}

fn aubcs(recs: &[&RunRecord], metric: &str) -> Result<Vec<f64>> {
    recs.iter().map(|r| eval::aubc(curve_of(r, metric))).collect()
}

fn summary_table(records: &[RunRecord], metric: &str) -> Result<SummaryTable> {
    let mut t = SummaryTable::default();
    for ((d, st, s), recs) in group(records) {
        t.push(d, st.name(), s, &aubcs(&recs, metric)?);
    }
    Ok(t)
}

fn summary_csv(cfg: &RunConfig, records: &[RunRecord]) -> Result<String> {
    let tables: Vec<SummaryTable> = METRICS.iter().map(|m| summary_table(records, m)).collect::<Result<_>>()?;
    let ranks: Vec<Vec<f64>> = tables.iter().map(SummaryTable::row_ranks).collect::<Result<_>>()?;
    let mut s = cfg.comment_line();
    s.push_str("dataset,strategy,S,trials");
    for m in METRICS {
        let _ = write!(s, ",{m}_mean,{m}_sd,{m}_rank");
    }
    s.push('\n');
    for (i, c) in tables[0].cells.iter().enumerate() {
        let _ = write!(s, "{},{},{},{}", c.dataset, c.strategy, c.batch_size, c.trials);
        for (t, r) in tables.iter().zip(&ranks) {
            let _ = write!(s, ",{},{},{}", t.cells[i].mean, t.cells[i].sd, r[i]);
        }
        s.push('\n');
    }
    Ok(s)
}

fn ranks_csv(cfg: &RunConfig, records: &[RunRecord]) -> Result<String> {
    let per_metric: Vec<Vec<(String, f64)>> = METRICS
        .iter()
        .map(|m| eval::rank_table(&summary_table(records, m)?))
        .collect::<Result<_>>()?;
    let mut s = cfg.comment_line();
    s.push_str("strategy,acc,auc,f1\n");
    for (i, (name, _)) in per_metric[0].iter().enumerate() {
        let _ = writeln!(
            s,
            "{name},{},{},{}",
            per_metric[0][i].1, per_metric[1][i].1, per_metric[2][i].1
        );
    }
    Ok(s)
}

/// Paired t-tests over trials for every strategy pair within a
/// (dataset, S, metric) row. Trials are paired by seed.
fn ttest_csv(cfg: &RunConfig, records: &[RunRecord]) -> Result<String> {
    let groups = group(records);
    let mut s = cfg.comment_line();
    s.push_str("dataset,S,metric,strategy_a,strategy_b,mean_diff,p_value,band\n");
    let mut rows: Vec<(&str, usize)> = Vec::new();
    for ((d, _, b), _) in &groups {
        if !rows.contains(&(*d, *b)) {
            rows.push((*d, *b));
        }
    }
    for (d, b) in rows {
        let members: Vec<_> = groups.iter().filter(|((gd, _, gb), _)| *gd == d && *gb == b).collect();
        for metric in METRICS {
            for i in 0..members.len() {
                for j in (i + 1)..members.len() {
                    let (a, bb) = (&members[i], &members[j]);
                    let va = aubcs(&a.1, metric)?;
                    let vb = aubcs(&bb.1, metric)?;
                    let p = eval::paired_ttest(&va, &vb)?;
                    let diff = va.iter().zip(&vb).map(|(x, y)| x - y).sum::<f64>() / va.len() as f64;
                    let _ = writeln!(
                        s,
                        "{d},{b},{metric},{},{},{diff},{p},{}",
                        a.0 .1,
                        bb.0 .1,
                        PBand::of(p).name()
                    );
                }
            }
        }
    }
    Ok(s)
}

fn opt_cell(v: Option<f64>) -> String {
    v.map_or_else(String::new, |x| x.to_string())
}

fn selections_csv(cfg: &RunConfig, records: &[RunRecord]) -> String {
    let mut s = cfg.comment_line();
    s.push_str("dataset,strategy,S,trial,round,chosen,informativeness,representativeness,diversity,beta\n");
    for rec in records {
        for sel in &rec.selections {
            let chosen: Vec<String> = sel.chosen.iter().map(usize::to_string).collect();
            let beta = sel
                .beta
                .as_ref()
                .map(|b| b.iter().map(f64::to_string).collect::<Vec<_>>().join(" "))
                .unwrap_or_default();
            let _ = writeln!(
                s,
                "{},{},{},{},{},{},{},{},{},{}",
                rec.dataset,
                rec.strategy,
                rec.batch_size,
                trial_of(cfg, rec),
                sel.round,
                chosen.join(" "),
                opt_cell(sel.informativeness),
                opt_cell(sel.representativeness),
                opt_cell(sel.diversity),
                beta
            );
        }
    }
    s
}

/// Averages `curves.csv` over trials and writes one whitespace-delimited
/// file per (dataset, metric): `budget` then one column per strategy/S pair.
pub fn plot_data(curves_path: impl AsRef<Path>, out_dir: impl AsRef<Path>) -> Result<Vec<PathBuf>> {
    let curves_path = curves_path.as_ref();
    let out_dir = out_dir.as_ref();
    let mut reader = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .from_path(curves_path)?;
    let headers = reader.headers()?.clone();
    let want = ["dataset", "strategy", "S", "trial", "budget", "acc", "auc", "f1"];
    let col = |name: &str| -> Result<usize> {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::Config(format!("{}: missing column {name}", curves_path.display())))
    };
    let idx: Vec<usize> = want.iter().map(|w| col(w)).collect::<Result<_>>()?;

    // dataset -> series label -> budget -> per-metric (sum, count)
    type Acc = BTreeMap<usize, [(f64, usize); 3]>;
    let mut data: Vec<(String, Vec<(String, Acc)>)> = Vec::new();
    for (row, rec) in reader.records().enumerate() {
        let rec = rec?;
        let field = |i: usize| rec.get(idx[i]).unwrap_or("");
        let parse = |i: usize| -> Result<f64> {
            field(i).parse::<f64>().map_err(|_| Error::BadCell {
                row: row + 1,
                column: idx[i],
                value: field(i).to_string(),
            })
        };
        let budget = parse(4)? as usize;
        let series = format!("{}_S{}", field(1), field(2));
        let ds_slot = match data.iter().position(|(d, _)| d == field(0)) {
            Some(p) => p,
            None => {
                data.push((field(0).to_string(), Vec::new()));
                data.len() - 1
            }
        };
        let all_series = &mut data[ds_slot].1;
        let s_slot = match all_series.iter().position(|(s, _)| *s == series) {
            Some(p) => p,
            None => {
                all_series.push((series, Acc::new()));
                all_series.len() - 1
            }
        };
        let cell = all_series[s_slot].1.entry(budget).or_insert([(0.0, 0); 3]);
        for m in 0..3 {
            let v = parse(5 + m)?;
            cell[m].0 += v;
            cell[m].1 += 1;
        }
    }
    if data.is_empty() {
        return Err(Error::Config(format!("{}: no curve rows", curves_path.display())));
    }

    fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    let mut files = Vec::new();
    for (dataset, series) in &data {
        let mut budgets: Vec<usize> = series.iter().flat_map(|(_, a)| a.keys().copied()).collect();
        budgets.sort_unstable();
        budgets.dedup();
        for (m, metric) in METRICS.iter().enumerate() {
            let mut s = String::from("# budget");
            for (name, _) in series {
                let _ = write!(s, " {name}");
            }
            s.push('\n');
            for &b in &budgets {
                let _ = write!(s, "{b}");
                for (_, acc) in series {
                    match acc.get(&b) {
                        Some(c) => {
                            let _ = write!(s, " {}", c[m].0 / c[m].1 as f64);
                        }
                        None => s.push_str(" nan"),
                    }
                }
                s.push('\n');
            }
            let safe: String = dataset
                .chars()
                .map(|c| if c.is_ascii_alphanumeric() || c == '_' || c == '-' { c } else { '_' })
                .collect();
            files.push(write_atomic(&out_dir.join(format!("{safe}_{metric}.dat")), &s)?);
        }
    }
    Ok(files)
}

/// Writes a synthetic dataset as `x0,x1,...,label`.
pub fn gen_csv(kind: SyntheticKind, seed: u64, out: impl AsRef<Path>) -> Result<PathBuf> {
    let ds = dataset::gen_synthetic(kind, seed)?;
    let mut s = String::new();
    for j in 0..ds.dim() {
        let _ = write!(s, "x{j},");
    }
    s.push_str("label\n");
    for (row, label) in ds.features.rows().into_iter().zip(&ds.labels) {
        for v in row {
            let _ = write!(s, "{v},");
        }
        let _ = writeln!(s, "{label}");
    }
    write_atomic(out.as_ref(), &s)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_override() {
        let mut cfg = RunConfig::parse(
            "# comment\n\ndatasets = r15, gcloud_balance\nstrategies=uniform,margin\nbatch_sizes = 1,5\n\
             budget = 40\nkernel.kind = heat\nglad.tol = 1e-4\ncommittee.members = logistic, lda\n",
        )
        .unwrap();
        assert_eq!(cfg.datasets.len(), 2);
        assert_eq!(cfg.strategies, vec![StrategyKind::Uniform, StrategyKind::Margin]);
        assert_eq!(cfg.batch_sizes, vec![1, 5]);
        assert_eq!(cfg.budget, Budget::Fixed(40));
        assert_eq!(cfg.al.kernel.kind, KernelKind::Heat);
        assert_eq!(cfg.al.committee, vec![ModelKind::Logistic, ModelKind::Lda]);
        cfg.set("kernel.kind", "poly").unwrap();
        assert_eq!(cfg.al.kernel.kind, KernelKind::Poly);
    }

    #[test]
    fn canonical_round_trips() {
        let mut cfg = RunConfig::default();
        cfg.set("budget", "exhaust").unwrap();
        cfg.set("kernel.kappa", "7").unwrap();
        cfg.set("committee.gamma", "0.25").unwrap();
        let back = RunConfig::parse(&cfg.canonical()).unwrap();
        assert_eq!(back.canonical(), cfg.canonical());
        assert_eq!(back.hash(), cfg.hash());
    }

    #[test]
    fn hash_ignores_output_location() {
        let a = RunConfig::default();
        let mut b = a.clone();
        b.out_dir = PathBuf::from("elsewhere");
        b.workers = Some(3);
        assert_eq!(a.hash(), b.hash());
        b.base_seed = 1;
        assert_ne!(a.hash(), b.hash());
    }

    #[test]
    fn rejects_bad_keys_and_values() {
        let mut cfg = RunConfig::default();
        assert!(cfg.set("kernel.shape", "x").is_err());
        assert!(cfg.set("strategies", "uniform,bogus").is_err());
        assert!(cfg.set("trials", "ten").is_err());
        assert!(RunConfig::parse("trials 3").is_err());
        cfg.trials = 0;
        assert!(cfg.validate().is_err());
    }
}
