//! Classification metrics, budget curves, paired t-tests and rank tables.

use std::collections::BTreeMap;
use std::fmt;

use log::warn;
use ndarray::Array2;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Metrics {
    pub acc: f64,
    pub auc: f64,
    pub f1: f64,
}

pub fn accuracy(y_true: &[usize], y_pred: &[usize]) -> f64 {
    if y_true.is_empty() {
        return f64::NAN;
    }
    let hits = y_true.iter().zip(y_pred).filter(|(a, b)| a == b).count();
    hits as f64 / y_true.len() as f64
}

/// ROC area of `scores` for separating `positive` from the rest, with tied
/// scores counted as half. `None` if either side is empty.
pub fn rank_auc(positive: &[bool], scores: &[f64]) -> Option<f64> {
    let n = scores.len();
    let n_pos = positive.iter().filter(|&&p| p).count();
    let n_neg = n - n_pos;
    if n_pos == 0 || n_neg == 0 {
        return None;
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| scores[a].total_cmp(&scores[b]));
    let mut rank_sum = 0.0;
    let mut i = 0;
    while i < n {
        let mut j = i + 1;
        while j < n && scores[order[j]] == scores[order[i]] {
            j += 1;
        }
        // Ranks i+1..=j share their mean.
        let mean_rank = (i + 1 + j) as f64 / 2.0;
        rank_sum += mean_rank * order[i..j].iter().filter(|&&o| positive[o]).count() as f64;
        i = j;
    }
    let u = rank_sum - (n_pos * (n_pos + 1)) as f64 / 2.0;
    Some(u / (n_pos * n_neg) as f64)
}

fn f1_for(y_true: &[usize], y_pred: &[usize], class: usize) -> Option<f64> {
    let mut tp = 0usize;
    let mut fp = 0usize;
    let mut fn_ = 0usize;
    for (&t, &p) in y_true.iter().zip(y_pred) {
        match (t == class, p == class) {
            (true, true) => tp += 1,
            (false, true) => fp += 1,
            (true, false) => fn_ += 1,
            _ => {}
        }
    }
    if tp + fp + fn_ == 0 {
        None
    } else {
        Some(2.0 * tp as f64 / (2 * tp + fp + fn_) as f64)
    }
}

/// Accuracy, ROC area and F1. Binary tasks score class 1 as positive;
/// multi-class tasks macro-average one-vs-rest.
pub fn metrics(y_true: &[usize], y_pred: &[usize], scores: &Array2<f64>, k: usize) -> Result<Metrics> {
    let m = y_true.len();
    if y_pred.len() != m || scores.nrows() != m {
        return Err(Error::Dimension(format!(
            "{m} labels, {} predictions, {} score rows",
            y_pred.len(),
            scores.nrows()
        )));
    }
    if scores.ncols() != k {
        return Err(Error::Dimension(format!("{} score columns for {k} classes", scores.ncols())));
    }
    if k < 2 {
        return Err(Error::TooFewClasses { found: k });
    }
    if m == 0 {
        return Err(Error::invalid("no test instances"));
    }
    let acc = accuracy(y_true, y_pred);

    let (auc, f1) = if k == 2 {
        let pos: Vec<bool> = y_true.iter().map(|&y| y == 1).collect();
        let s: Vec<f64> = scores.column(1).to_vec();
        let auc = rank_auc(&pos, &s).unwrap_or_else(|| {
            warn!("test split holds a single class; auc undefined");
            f64::NAN
        });
        (auc, f1_for(y_true, y_pred, 1).unwrap_or(0.0))
    } else {
        let mut aucs = Vec::with_capacity(k);
        let mut f1s = Vec::with_capacity(k);
        for c in 0..k {
            let pos: Vec<bool> = y_true.iter().map(|&y| y == c).collect();
            let s: Vec<f64> = scores.column(c).to_vec();
            match rank_auc(&pos, &s) {
                Some(a) => aucs.push(a),
                None => warn!("class {c} absent from the test split; skipped in auc"),
            }
            if let Some(f) = f1_for(y_true, y_pred, c) {
                f1s.push(f);
            }
        }
        let mean = |v: &[f64]| {
            if v.is_empty() {
                f64::NAN
            } else {
                v.iter().sum::<f64>() / v.len() as f64
            }
        };
        (mean(&aucs), mean(&f1s))
    };
    Ok(Metrics { acc, auc, f1 })
}

/// Metric value as a function of the number of labels spent.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct BudgetCurve {
    points: Vec<(usize, f64)>,
}

impl BudgetCurve {
    pub fn new() -> Self {
        BudgetCurve::default()
    }

    pub fn from_points(points: Vec<(usize, f64)>) -> Result<Self> {
        let mut c = BudgetCurve::new();
        for (b, v) in points {
            c.push(b, v)?;
        }
        Ok(c)
    }

    pub fn push(&mut self, budget: usize, value: f64) -> Result<()> {
        if let Some(&(last, _)) = self.points.last() {
            if budget <= last {
                return Err(Error::invalid(format!(
                    "budget {budget} does not follow {last}"
                )));
            }
        }
        self.points.push((budget, value));
        Ok(())
    }

    pub fn points(&self) -> &[(usize, f64)] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn last_value(&self) -> Option<f64> {
        self.points.last().map(|p| p.1)
    }
}

/// Area under a budget curve by the trapezoid rule, normalized by the budget
/// range.
pub fn aubc(curve: &BudgetCurve) -> Result<f64> {
    aubc_points(curve.points.iter().map(|&(b, v)| (b as f64, v)))
}

/// Same as [`aubc`] for real-valued budgets.
pub fn aubc_points(points: impl IntoIterator<Item = (f64, f64)>) -> Result<f64> {
    let pts: Vec<(f64, f64)> = points.into_iter().collect();
    if pts.len() < 2 {
        return Err(Error::invalid("AUBC needs at least two points"));
    }
    let mut area = 0.0;
    for w in pts.windows(2) {
        let (x0, y0) = w[0];
        let (x1, y1) = w[1];
        if x1 <= x0 {
            return Err(Error::invalid("budgets must increase strictly"));
        }
        area += (x1 - x0) * (y0 + y1) / 2.0;
    }
    Ok(area / (pts[pts.len() - 1].0 - pts[0].0))
}

fn ln_gamma(x: f64) -> f64 {
    // Lanczos approximation, g = 7.
    const C: [f64; 9] = [
        0.999_999_999_999_809_9,
        676.520_368_121_885_1,
        -1_259.139_216_722_402_8,
        771.323_428_777_653_1,
        -176.615_029_162_140_6,
        12.507_343_278_686_905,
        -0.138_571_095_265_720_12,
        9.984_369_578_019_572e-6,
        1.505_632_735_149_311_6e-7,
    ];
    if x < 0.5 {
        let pi = std::f64::consts::PI;
        return (pi / (pi * x).sin()).ln() - ln_gamma(1.0 - x);
    }
    let x = x - 1.0;
    let mut a = C[0];
    let t = x + 7.5;
    for (i, &c) in C.iter().enumerate().skip(1) {
        a += c / (x + i as f64);
    }
    0.5 * (2.0 * std::f64::consts::PI).ln() + (x + 0.5) * t.ln() - t + a.ln()
}

fn beta_cf(a: f64, b: f64, x: f64) -> f64 {
    const TINY: f64 = 1e-300;
    let qab = a + b;
    let qap = a + 1.0;
    let qam = a - 1.0;
    let mut c = 1.0;
    let mut d = 1.0 - qab * x / qap;
    if d.abs() < TINY {
        d = TINY;
    }
    d = 1.0 / d;
    let mut h = d;
    for m in 1..=300 {
        let m = m as f64;
        let m2 = 2.0 * m;
        let aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        h *= d * c;
        let aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let del = d * c;
        h *= del;
        if (del - 1.0).abs() < 1e-15 {
            break;
        }
    }
    h
}

/// Regularized incomplete beta function I_x(a, b).
pub fn inc_beta(a: f64, b: f64, x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    if x >= 1.0 {
        return 1.0;
    }
    let ln_front = ln_gamma(a + b) - ln_gamma(a) - ln_gamma(b) + a * x.ln() + b * (1.0 - x).ln();
    let front = ln_front.exp();
    if x < (a + 1.0) / (a + b + 2.0) {
        front * beta_cf(a, b, x) / a
    } else {
        1.0 - front * beta_cf(b, a, 1.0 - x) / b
    }
}

/// Two-sided tail probability P(|T| ≥ |t|) for Student's t with `df` degrees
/// of freedom.
pub fn student_t_two_sided(t: f64, df: f64) -> f64 {
    if t.is_infinite() {
        return 0.0;
    }
    inc_beta(df / 2.0, 0.5, df / (df + t * t)).clamp(0.0, 1.0)
}

/// Two-sided paired t-test p-value.
///
/// All-zero differences give 1. Constant nonzero differences give 0.
pub fn paired_ttest(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::Dimension(format!("{} vs {} trials", a.len(), b.len())));
    }
    let n = a.len();
    if n < 2 {
        return Err(Error::invalid("paired t-test needs at least two trials"));
    }
    let d: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    if d.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("t-test input"));
    }
    let mean = d.iter().sum::<f64>() / n as f64;
    let var = d.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1) as f64;
    if var == 0.0 {
        return Ok(if mean == 0.0 { 1.0 } else { 0.0 });
    }
    let t = mean / (var / n as f64).sqrt();
    Ok(student_t_two_sided(t, (n - 1) as f64))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PBand {
    /// p < 0.01
    Strong,
    /// 0.01 ≤ p < 0.05
    Weak,
    /// p ≥ 0.05
    None,
}

impl PBand {
    pub fn of(p: f64) -> PBand {
        if p < 0.01 {
            PBand::Strong
        } else if p < 0.05 {
            PBand::Weak
        } else {
            PBand::None
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            PBand::Strong => "p<0.01",
            PBand::Weak => "p<0.05",
            PBand::None => "ns",
        }
    }
}

impl fmt::Display for PBand {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

pub fn mean_sd(values: &[f64]) -> (f64, f64) {
    let n = values.len();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    if n == 1 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1) as f64;
    (mean, var.sqrt())
}

/// Mean and standard deviation of a score over trials for one
/// (dataset, strategy, batch size) cell.
#[derive(Debug, Clone, PartialEq)]
pub struct CellSummary {
    pub dataset: String,
    pub strategy: String,
    pub batch_size: usize,
    pub mean: f64,
    pub sd: f64,
    pub trials: usize,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct SummaryTable {
    pub cells: Vec<CellSummary>,
}

impl SummaryTable {
    pub fn push(&mut self, dataset: &str, strategy: &str, batch_size: usize, values: &[f64]) {
        let (mean, sd) = mean_sd(values);
        self.cells.push(CellSummary {
            dataset: dataset.to_string(),
            strategy: strategy.to_string(),
            batch_size,
            mean,
            sd,
            trials: values.len(),
        });
    }

    /// Strategies in order of first appearance.
    pub fn strategies(&self) -> Vec<String> {
        let mut out: Vec<String> = Vec::new();
        for c in &self.cells {
            if !out.contains(&c.strategy) {
                out.push(c.strategy.clone());
            }
        }
        out
    }

    /// Rank of every cell within its (dataset, batch size) row; 1 is best.
    pub fn row_ranks(&self) -> Result<Vec<f64>> {
        let strategies = self.strategies();
        let mut rows: BTreeMap<(&str, usize), Vec<usize>> = BTreeMap::new();
        for (i, c) in self.cells.iter().enumerate() {
            rows.entry((c.dataset.as_str(), c.batch_size)).or_default().push(i);
        }
        let mut ranks = vec![f64::NAN; self.cells.len()];
        for ((dataset, s), members) in rows {
            if members.len() != strategies.len() {
                return Err(Error::invalid(format!(
                    "row ({dataset}, S={s}) has {} of {} strategies",
                    members.len(),
                    strategies.len()
                )));
            }
            let values: Vec<f64> = members.iter().map(|&i| self.cells[i].mean).collect();
            for (slot, r) in members.iter().zip(average_ranks_desc(&values)) {
                ranks[*slot] = r;
            }
        }
        Ok(ranks)
    }
}

/// Ranks with the largest value first and ties sharing their mean rank.
pub fn average_ranks_desc(values: &[f64]) -> Vec<f64> {
    let n = values.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| values[b].total_cmp(&values[a]));
    let mut ranks = vec![0.0; n];
    let mut i = 0;
    while i < n {
        let mut j = i + 1;
        while j < n && values[order[j]] == values[order[i]] {
            j += 1;
        }
        let r = (i + 1 + j) as f64 / 2.0;
        for &o in &order[i..j] {
            ranks[o] = r;
        }
        i = j;
    }
    ranks
}

/// Average rank per strategy across all (dataset, batch size) rows.
pub fn rank_table(table: &SummaryTable) -> Result<Vec<(String, f64)>> {
    let ranks = table.row_ranks()?;
    let mut out = Vec::new();
    for s in table.strategies() {
        let mine: Vec<f64> = table
            .cells
            .iter()
            .zip(&ranks)
            .filter(|(c, _)| c.strategy == s)
            .map(|(_, &r)| r)
            .collect();
        out.push((s, mine.iter().sum::<f64>() / mine.len() as f64));
    }
    Ok(out)
}
