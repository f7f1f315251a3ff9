//! Metrics and the four-setting group/individual experiment runner, plus
//! table- and plot-shaped outputs.
//!
//! The four settings cross the training and evaluation target source:
//! group aggregates (mean ratings for regression, majority labels for
//! classification) or a single annotator's ratings. Per-annotator runs are
//! independent; aggregation always iterates annotators in id order, so
//! reports are deterministic.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::dataset::{
    group_majority, group_mean, individual_labels, individual_ratings, ComplexityView, Dataset,
    Instance,
};
use crate::error::{Error, Result};
use crate::features::{build_feature_matrix, ResourceSet};
use crate::matrix::Matrix;
use crate::models::{
    lcp_to_cwi, logistic_fit, logistic_predict, ridge_fit, ridge_predict, LogisticModel,
    RidgeModel,
};
use crate::numeric::t_quantile;
use crate::util::{mean, sample_std};

/// Coefficient of determination, with the total sum of squares taken
/// around the mean of the evaluation gold itself. Out-of-sample scores can
/// therefore go negative.
pub fn r_squared(gold: &[f64], pred: &[f64]) -> Result<f64> {
    if gold.len() != pred.len() {
        return Err(Error::Dimension(format!(
            "{} gold vs {} predictions",
            gold.len(),
            pred.len()
        )));
    }
    if gold.len() < 2 {
        return Err(Error::Undefined("need at least 2 observations".into()));
    }
    let m = mean(gold);
    let ss_tot: f64 = gold.iter().map(|g| (g - m) * (g - m)).sum();
    if ss_tot == 0.0 {
        return Err(Error::Undefined("constant gold values".into()));
    }
    let ss_res: f64 = gold
        .iter()
        .zip(pred)
        .map(|(g, p)| (g - p) * (g - p))
        .sum();
    Ok(1.0 - ss_res / ss_tot)
}

fn class_f1(gold: &[bool], pred: &[bool], positive: bool) -> f64 {
    let mut tp = 0usize;
    let mut fp = 0usize;
    let mut fn_ = 0usize;
    for (g, p) in gold.iter().zip(pred) {
        match (*g == positive, *p == positive) {
            (true, true) => tp += 1,
            (false, true) => fp += 1,
            (true, false) => fn_ += 1,
            (false, false) => {}
        }
    }
    let denom = 2 * tp + fp + fn_;
    if denom == 0 {
        0.0
    } else {
        2.0 * tp as f64 / denom as f64
    }
}

/// Unweighted mean of the positive-class and negative-class F1 scores.
/// A class with an empty precision-plus-recall denominator scores 0.
pub fn macro_f1(gold: &[bool], pred: &[bool]) -> Result<f64> {
    if gold.len() != pred.len() {
        return Err(Error::Dimension(format!(
            "{} gold vs {} predictions",
            gold.len(),
            pred.len()
        )));
    }
    if gold.is_empty() {
        return Err(Error::Invalid("empty label lists".into()));
    }
    Ok(0.5 * (class_f1(gold, pred, true) + class_f1(gold, pred, false)))
}

/// What a model is trained and scored on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SourceKind {
    Group,
    Individual,
}

impl fmt::Display for SourceKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SourceKind::Group => f.write_str("group"),
            SourceKind::Individual => f.write_str("individual"),
        }
    }
}

impl FromStr for SourceKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "group" => Ok(SourceKind::Group),
            "individual" => Ok(SourceKind::Individual),
            other => Err(Error::Invalid(format!("unknown source kind {other:?}"))),
        }
    }
}

/// The evaluated task.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentTask {
    /// Regression on [0, 1] complexity, scored by R^2.
    Lcp,
    /// Binary classification, scored by macro-F1.
    Cwi,
    /// The regression model scored as a classifier via thresholding.
    LcpCwi,
}

impl fmt::Display for ExperimentTask {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExperimentTask::Lcp => f.write_str("lcp"),
            ExperimentTask::Cwi => f.write_str("cwi"),
            ExperimentTask::LcpCwi => f.write_str("lcp-cwi"),
        }
    }
}

impl FromStr for ExperimentTask {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "lcp" => Ok(ExperimentTask::Lcp),
            "cwi" => Ok(ExperimentTask::Cwi),
            "lcp-cwi" | "lcp_cwi" | "lcpcwi" => Ok(ExperimentTask::LcpCwi),
            other => Err(Error::Invalid(format!("unknown task {other:?}"))),
        }
    }
}

/// One experiment cell: a task, a train/test source pair, and the model
/// inputs.
#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub task: ExperimentTask,
    pub train_source: SourceKind,
    pub test_source: SourceKind,
    /// Resource names, in feature-column order.
    pub features: Vec<String>,
    /// Complexity threshold for binary labels.
    pub threshold: f64,
    pub ridge_l2: f64,
    pub logistic_l2: f64,
}

impl ExperimentConfig {
    pub fn new(
        task: ExperimentTask,
        train_source: SourceKind,
        test_source: SourceKind,
        features: Vec<String>,
    ) -> Self {
        ExperimentConfig {
            task,
            train_source,
            test_source,
            features,
            threshold: 0.375,
            ridge_l2: 1.0,
            logistic_l2: 1.0,
        }
    }
}

/// A per-annotator run that could not be scored, with the reason.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExcludedRun {
    pub annotator_id: String,
    pub reason: String,
}

/// Scores for one experiment cell. `std` and `per_annotator` are present
/// exactly when more than one run contributed.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentReport {
    pub task: ExperimentTask,
    pub train_source: SourceKind,
    pub test_source: SourceKind,
    pub metric_name: String,
    pub mean: f64,
    pub std: Option<f64>,
    pub per_annotator: Option<BTreeMap<String, f64>>,
    pub excluded: Vec<ExcludedRun>,
}

enum Fitted {
    Ridge(RidgeModel),
    Logistic(LogisticModel),
}

struct TaskRunner<'a> {
    config: &'a ExperimentConfig,
    trial: &'a Dataset,
    test: &'a Dataset,
    trial_x: Matrix,
    test_x: Matrix,
}

impl<'a> TaskRunner<'a> {
    fn fit_group(&self) -> Result<Fitted> {
        match self.config.task {
            ExperimentTask::Lcp | ExperimentTask::LcpCwi => {
                let y = group_mean(&self.trial.ratings).values;
                Ok(Fitted::Ridge(ridge_fit(
                    &self.trial_x,
                    &y,
                    self.config.ridge_l2,
                )?))
            }
            ExperimentTask::Cwi => {
                let labels = group_majority(&self.trial.ratings, self.config.threshold).labels;
                Ok(Fitted::Logistic(logistic_fit(
                    &self.trial_x,
                    &labels,
                    self.config.logistic_l2,
                )?))
            }
        }
    }

    fn fit_individual(&self, annotator: usize) -> Result<Fitted> {
        match self.config.task {
            ExperimentTask::Lcp | ExperimentTask::LcpCwi => {
                let (rows, y) = individual_ratings(&self.trial.ratings, annotator);
                let x = self.trial_x.select_rows(&rows);
                Ok(Fitted::Ridge(ridge_fit(&x, &y, self.config.ridge_l2)?))
            }
            ExperimentTask::Cwi => {
                let (rows, labels) = individual_labels(&self.trial.ratings, annotator, self.config.threshold);
                let x = self.trial_x.select_rows(&rows);
                Ok(Fitted::Logistic(logistic_fit(
                    &x,
                    &labels,
                    self.config.logistic_l2,
                )?))
            }
        }
    }

    /// Scores a fitted model on evaluation rows with the matching gold.
    fn score(&self, model: &Fitted, rows: Option<&[usize]>, annotator: Option<usize>) -> Result<f64> {
        let x = match rows {
            Some(rows) => self.test_x.select_rows(rows),
            None => self.test_x.clone(),
        };
        match (model, self.config.task) {
            (Fitted::Ridge(m), ExperimentTask::Lcp) => {
                let gold = match annotator {
                    None => group_mean(&self.test.ratings).values,
                    Some(a) => individual_ratings(&self.test.ratings, a).1,
                };
                r_squared(&gold, &ridge_predict(m, &x)?)
            }
            (Fitted::Ridge(m), ExperimentTask::LcpCwi) => {
                let gold = match annotator {
                    None => group_majority(&self.test.ratings, self.config.threshold).labels,
                    Some(a) => individual_labels(&self.test.ratings, a, self.config.threshold).1,
                };
                let pred = lcp_to_cwi(&ridge_predict(m, &x)?, self.config.threshold);
                macro_f1(&gold, &pred)
            }
            (Fitted::Logistic(m), ExperimentTask::Cwi) => {
                let gold = match annotator {
                    None => group_majority(&self.test.ratings, self.config.threshold).labels,
                    Some(a) => individual_labels(&self.test.ratings, a, self.config.threshold).1,
                };
                macro_f1(&gold, &logistic_predict(m, &x, 0.5)?)
            }
            _ => unreachable!("model kind always matches the task"),
        }
    }

    fn eval_rows_for(&self, annotator: usize) -> Vec<usize> {
        individual_ratings(&self.test.ratings, annotator).0
    }
}

/// Runs one experiment cell.
///
/// Group-trained models fit once; individual settings fit and/or score one
/// model per annotator and aggregate as mean and sample standard deviation
/// in annotator-id order. Per-annotator runs that cannot be fit or scored
/// (single-class training labels, too few rated instances, constant gold)
/// are excluded and reported.
pub fn run_experiment(
    config: &ExperimentConfig,
    trial: &Dataset,
    test: &Dataset,
    resources: &ResourceSet,
) -> Result<ExperimentReport> {
    if !(0.0..=1.0).contains(&config.threshold) {
        return Err(Error::Invalid(format!(
            "threshold {} outside [0, 1]",
            config.threshold
        )));
    }
    let specs = resources.resolve(&config.features)?;
    let trial_x = build_feature_matrix(&trial.instances, &specs)?;
    let test_x = build_feature_matrix(&test.instances, &specs)?;

    let individual = config.train_source == SourceKind::Individual
        || config.test_source == SourceKind::Individual;
    if individual {
        let mut a: Vec<&String> = trial.ratings.annotator_ids().iter().collect();
        let mut b: Vec<&String> = test.ratings.annotator_ids().iter().collect();
        a.sort();
        b.sort();
        if a != b {
            return Err(Error::Invalid(
                "trial and test annotator sets differ in an individual setting".into(),
            ));
        }
    }

    let runner = TaskRunner {
        config,
        trial,
        test,
        trial_x: trial_x.values,
        test_x: test_x.values,
    };

    let metric_name = match config.task {
        ExperimentTask::Lcp => "R2",
        ExperimentTask::Cwi | ExperimentTask::LcpCwi => "macro_F1",
    };

    // Annotators in id order, with their row index in each matrix.
    let annotators_of = |d: &Dataset| -> Vec<(String, usize)> {
        let mut v: Vec<(String, usize)> = d
            .ratings
            .annotator_ids()
            .iter()
            .enumerate()
            .map(|(i, id)| (id.clone(), i))
            .collect();
        v.sort();
        v
    };

    let mut per = BTreeMap::new();
    let mut excluded = Vec::new();

    match (config.train_source, config.test_source) {
        (SourceKind::Group, SourceKind::Group) => {
            let model = runner.fit_group()?;
            let score = runner.score(&model, None, None)?;
            return Ok(ExperimentReport {
                task: config.task,
                train_source: config.train_source,
                test_source: config.test_source,
                metric_name: metric_name.into(),
                mean: score,
                std: None,
                per_annotator: None,
                excluded,
            });
        }
        (SourceKind::Group, SourceKind::Individual) => {
            let model = runner.fit_group()?;
            for (id, a) in annotators_of(test) {
                let rows = runner.eval_rows_for(a);
                match runner.score(&model, Some(&rows), Some(a)) {
                    Ok(s) => {
                        per.insert(id, s);
                    }
                    Err(e) => excluded.push(ExcludedRun {
                        annotator_id: id,
                        reason: e.to_string(),
                    }),
                }
            }
        }
        (SourceKind::Individual, SourceKind::Group) => {
            for (id, a) in annotators_of(trial) {
                let run = runner
                    .fit_individual(a)
                    .and_then(|model| runner.score(&model, None, None));
                match run {
                    Ok(s) => {
                        per.insert(id, s);
                    }
                    Err(e) => excluded.push(ExcludedRun {
                        annotator_id: id,
                        reason: e.to_string(),
                    }),
                }
            }
        }
        (SourceKind::Individual, SourceKind::Individual) => {
            for (id, a_trial) in annotators_of(trial) {
                let a_test = test
                    .ratings
                    .annotator_ids()
                    .iter()
                    .position(|x| *x == id)
                    .expect("annotator sets validated equal");
                let run = runner.fit_individual(a_trial).and_then(|model| {
                    let rows = runner.eval_rows_for(a_test);
                    runner.score(&model, Some(&rows), Some(a_test))
                });
                match run {
                    Ok(s) => {
                        per.insert(id, s);
                    }
                    Err(e) => excluded.push(ExcludedRun {
                        annotator_id: id,
                        reason: e.to_string(),
                    }),
                }
            }
        }
    }

    if per.is_empty() {
        return Err(Error::Invalid(format!(
            "every per-annotator run failed; first: {}",
            excluded
                .first()
                .map(|e| format!("{}: {}", e.annotator_id, e.reason))
                .unwrap_or_default()
        )));
    }
    let scores: Vec<f64> = per.values().copied().collect();
    Ok(ExperimentReport {
        task: config.task,
        train_source: config.train_source,
        test_source: config.test_source,
        metric_name: metric_name.into(),
        mean: mean(&scores),
        std: sample_std(&scores),
        per_annotator: Some(per),
        excluded,
    })
}

/// Runs all four train/test settings of one task.
pub fn run_all_settings(
    config: &ExperimentConfig,
    trial: &Dataset,
    test: &Dataset,
    resources: &ResourceSet,
) -> Result<Vec<ExperimentReport>> {
    let mut reports = Vec::with_capacity(4);
    for train in [SourceKind::Group, SourceKind::Individual] {
        for test_source in [SourceKind::Group, SourceKind::Individual] {
            let cell = ExperimentConfig {
                train_source: train,
                test_source,
                ..config.clone()
            };
            reports.push(run_experiment(&cell, trial, test, resources)?);
        }
    }
    Ok(reports)
}

/// One cell of a 2x2 result table.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TableCell {
    pub mean: f64,
    pub std: Option<f64>,
}

impl TableCell {
    /// Paper-style rendering at two decimals: `0.41` or `-0.10(0.41)`.
    pub fn render(&self) -> String {
        match self.std {
            Some(s) => format!("{:.2}({:.2})", self.mean, s),
            None => format!("{:.2}", self.mean),
        }
    }
}

/// A task's 2x2 table: rows are the train source, columns the test source.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TaskTable {
    pub task: ExperimentTask,
    pub metric_name: String,
    /// `cells[train][test]` with index 0 = group, 1 = individual.
    pub cells: [[TableCell; 2]; 2],
}

impl TaskTable {
    pub fn to_tsv(&self) -> String {
        let mut out = format!("task: {} ({})\n", self.task, self.metric_name);
        out.push_str("train\\test\tgroup\tindividual\n");
        for (row, label) in self.cells.iter().zip(["group", "individual"]) {
            out.push_str(&format!(
                "{label}\t{}\t{}\n",
                row[0].render(),
                row[1].render()
            ));
        }
        out
    }
}

/// Assembles per-task 2x2 tables; every task present must have all four
/// settings.
pub fn report_tables(reports: &[ExperimentReport]) -> Result<Vec<TaskTable>> {
    let mut tables = Vec::new();
    for task in [ExperimentTask::Lcp, ExperimentTask::Cwi, ExperimentTask::LcpCwi] {
        let of_task: Vec<&ExperimentReport> = reports.iter().filter(|r| r.task == task).collect();
        if of_task.is_empty() {
            continue;
        }
        let mut cells = [[None; 2]; 2]; // train x test
        let mut metric_name = String::new();
        for r in of_task {
            let i = (r.train_source == SourceKind::Individual) as usize;
            let j = (r.test_source == SourceKind::Individual) as usize;
            cells[i][j] = Some(TableCell {
                mean: r.mean,
                std: r.std,
            });
            metric_name = r.metric_name.clone();
        }
        let mut filled = [[TableCell {
            mean: 0.0,
            std: None,
        }; 2]; 2];
        for (i, train) in [SourceKind::Group, SourceKind::Individual].iter().enumerate() {
            for (j, test) in [SourceKind::Group, SourceKind::Individual].iter().enumerate() {
                filled[i][j] = cells[i][j].ok_or_else(|| {
                    Error::Invalid(format!("task {task}: missing {train}-{test} cell"))
                })?;
            }
        }
        tables.push(TaskTable {
            task,
            metric_name,
            cells: filled,
        });
    }
    if tables.is_empty() {
        return Err(Error::Invalid("no reports to tabulate".into()));
    }
    Ok(tables)
}

/// One histogram bin of one view.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HistogramRow {
    pub view: String,
    pub bin_lo: f64,
    pub bin_hi: f64,
    pub count: usize,
}

/// Bin counts of complexity values over [0, 1]; the final bin is closed.
pub fn complexity_histogram(
    views: &[(String, &ComplexityView)],
    bins: usize,
) -> Result<Vec<HistogramRow>> {
    if bins < 1 {
        return Err(Error::Invalid("bins must be at least 1".into()));
    }
    if views.is_empty() {
        return Err(Error::Invalid("no views".into()));
    }
    let mut rows = Vec::new();
    for (name, view) in views {
        let mut counts = vec![0usize; bins];
        for v in &view.values {
            let idx = ((v * bins as f64) as usize).min(bins - 1);
            counts[idx] += 1;
        }
        for (j, count) in counts.into_iter().enumerate() {
            rows.push(HistogramRow {
                view: name.clone(),
                bin_lo: j as f64 / bins as f64,
                bin_hi: (j + 1) as f64 / bins as f64,
                count,
            });
        }
    }
    Ok(rows)
}

/// One scatter point: a word's log-frequency against one view's complexity.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScatterRow {
    pub view: String,
    pub instance_id: String,
    pub target: String,
    pub log_freq: f64,
    pub complexity: f64,
}

/// A point of the fitted line with its 95% confidence band.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FitBandPoint {
    pub x: f64,
    pub fitted: f64,
    pub lower: f64,
    pub upper: f64,
}

/// Simple linear fit of one view's complexity on log-frequency, with a
/// 95% confidence band for the mean response sampled at 100 abscissae.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GroupFit {
    pub view: String,
    pub slope: f64,
    pub intercept: f64,
    pub band: Vec<FitBandPoint>,
}

const BAND_POINTS: usize = 100;

/// Per-word scatter rows and per-view linear fits of complexity against
/// log-frequency. Views must align with the instance list.
pub fn frequency_scatter(
    instances: &[Instance],
    log_freqs: &[f64],
    views: &[(String, &ComplexityView)],
) -> Result<(Vec<ScatterRow>, Vec<GroupFit>)> {
    if log_freqs.len() != instances.len() {
        return Err(Error::Dimension(format!(
            "{} log-frequencies for {} instances",
            log_freqs.len(),
            instances.len()
        )));
    }
    let n = instances.len();
    if n < 3 {
        return Err(Error::Invalid(
            "need at least 3 instances for a confidence band".into(),
        ));
    }
    let mut scatter = Vec::new();
    let mut fits = Vec::new();
    for (name, view) in views {
        if view.len() != n
            || view
                .instance_ids
                .iter()
                .zip(instances)
                .any(|(id, inst)| *id != inst.id)
        {
            return Err(Error::Invalid(format!(
                "view {name:?} is not aligned with the instance list"
            )));
        }
        for (i, inst) in instances.iter().enumerate() {
            scatter.push(ScatterRow {
                view: name.clone(),
                instance_id: inst.id.clone(),
                target: inst.target.clone(),
                log_freq: log_freqs[i],
                complexity: view.values[i],
            });
        }

        let mx = mean(log_freqs);
        let my = mean(&view.values);
        let mut sxx = 0.0;
        let mut sxy = 0.0;
        for (x, y) in log_freqs.iter().zip(&view.values) {
            sxx += (x - mx) * (x - mx);
            sxy += (x - mx) * (y - my);
        }
        if sxx == 0.0 {
            return Err(Error::Undefined(
                "constant log-frequency, line fit undefined".into(),
            ));
        }
        let slope = sxy / sxx;
        let intercept = my - slope * mx;
        let ss_res: f64 = log_freqs
            .iter()
            .zip(&view.values)
            .map(|(x, y)| {
                let r = y - (intercept + slope * x);
                r * r
            })
            .sum();
        let sigma2 = ss_res / (n - 2) as f64;
        let t = t_quantile(0.975, (n - 2) as f64);
        let (lo, hi) = log_freqs
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), x| {
                (lo.min(*x), hi.max(*x))
            });
        let band = (0..BAND_POINTS)
            .map(|j| {
                let x = lo + (hi - lo) * j as f64 / (BAND_POINTS - 1) as f64;
                let fitted = intercept + slope * x;
                let se = (sigma2 * (1.0 / n as f64 + (x - mx) * (x - mx) / sxx)).sqrt();
                FitBandPoint {
                    x,
                    fitted,
                    lower: fitted - t * se,
                    upper: fitted + t * se,
                }
            })
            .collect();
        fits.push(GroupFit {
            view: name.clone(),
            slope,
            intercept,
            band,
        });
    }
    Ok((scatter, fits))
}

/// Histogram, scatter, and fit data in one bundle; scatter and fits are
/// produced when log-frequencies are supplied.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PlotData {
    pub histogram: Vec<HistogramRow>,
    pub scatter: Vec<ScatterRow>,
    pub fits: Vec<GroupFit>,
}

pub fn plot_data(
    instances: &[Instance],
    views: &[(String, &ComplexityView)],
    log_freqs: Option<&[f64]>,
    bins: usize,
) -> Result<PlotData> {
    let histogram = complexity_histogram(views, bins)?;
    let (scatter, fits) = match log_freqs {
        Some(freqs) => frequency_scatter(instances, freqs, views)?,
        None => (Vec::new(), Vec::new()),
    };
    Ok(PlotData {
        histogram,
        scatter,
        fits,
    })
}

/// One row of the per-word between-view difference table.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiffRow {
    pub instance_id: String,
    pub target: String,
    pub origin: String,
    pub log_freq: Option<f64>,
    pub base: f64,
    pub other: f64,
    pub difference: f64,
}

/// Per-word `other - base` differences, sorted ascending by difference
/// (ties keep instance order).
pub fn difference_table(
    instances: &[Instance],
    base: &ComplexityView,
    other: &ComplexityView,
    log_freqs: Option<&[f64]>,
) -> Result<Vec<DiffRow>> {
    for view in [base, other] {
        if view.len() != instances.len()
            || view
                .instance_ids
                .iter()
                .zip(instances)
                .any(|(id, inst)| *id != inst.id)
        {
            return Err(Error::Invalid(
                "view is not aligned with the instance list".into(),
            ));
        }
    }
    if let Some(freqs) = log_freqs {
        if freqs.len() != instances.len() {
            return Err(Error::Dimension(format!(
                "{} log-frequencies for {} instances",
                freqs.len(),
                instances.len()
            )));
        }
    }
    let mut rows: Vec<DiffRow> = instances
        .iter()
        .enumerate()
        .map(|(i, inst)| DiffRow {
            instance_id: inst.id.clone(),
            target: inst.target.clone(),
            origin: inst.origin.to_string(),
            log_freq: log_freqs.map(|f| f[i]),
            base: base.values[i],
            other: other.values[i],
            difference: other.values[i] - base.values[i],
        })
        .collect();
    rows.sort_by(|a, b| a.difference.total_cmp(&b.difference));
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn r_squared_perfect_and_baseline() {
        let gold = [0.1, 0.5, 0.9];
        assert_eq!(r_squared(&gold, &gold).unwrap(), 1.0);
        let at_mean = [0.5, 0.5, 0.5];
        assert_eq!(r_squared(&gold, &at_mean).unwrap(), 0.0);
    }

    #[test]
    fn r_squared_hand_fixture() {
        // gold [0,1], pred [0.25, 0.75]: SSres = 0.125, SStot = 0.5.
        assert_eq!(r_squared(&[0.0, 1.0], &[0.25, 0.75]).unwrap(), 0.75);
    }

    #[test]
    fn r_squared_rejects_constant_gold() {
        assert!(r_squared(&[0.5, 0.5], &[0.1, 0.9]).is_err());
        assert!(r_squared(&[0.5], &[0.1]).is_err());
    }

    #[test]
    fn macro_f1_hand_fixture() {
        let gold = [true, true, false, false];
        let pred = [true, false, false, false];
        let got = macro_f1(&gold, &pred).unwrap();
        assert_eq!(got, (2.0 / 3.0 + 4.0 / 5.0) / 2.0);
    }

    #[test]
    fn macro_f1_perfect_and_degenerate() {
        let gold = [true, false, true];
        assert_eq!(macro_f1(&gold, &gold).unwrap(), 1.0);
        // All-negative predictions on mixed gold: positive F1 is 0.
        let pred = [false, false, false];
        let got = macro_f1(&gold, &pred).unwrap();
        assert!(got < 1.0 && got > 0.0);
    }

    #[test]
    fn macro_f1_class_swap_symmetry() {
        let gold = [true, true, false, true, false];
        let pred = [true, false, false, true, true];
        let swapped_gold: Vec<bool> = gold.iter().map(|b| !b).collect();
        let swapped_pred: Vec<bool> = pred.iter().map(|b| !b).collect();
        assert_eq!(
            macro_f1(&gold, &pred).unwrap(),
            macro_f1(&swapped_gold, &swapped_pred).unwrap()
        );
    }

    #[test]
    fn histogram_counts_conserve() {
        let view = ComplexityView::new(
            (0..30).map(|i| format!("w{i}")).collect(),
            (0..30).map(|i| i as f64 / 29.0).collect(),
            crate::dataset::Provenance::GroupMean,
        )
        .unwrap();
        let rows = complexity_histogram(&[("trial".into(), &view)], 10).unwrap();
        assert_eq!(rows.len(), 10);
        assert_eq!(rows.iter().map(|r| r.count).sum::<usize>(), 30);
        // 1.0 lands in the final bin.
        assert_eq!(rows.last().unwrap().count, 3);
        assert!(complexity_histogram(&[("trial".into(), &view)], 0).is_err());
    }

    #[test]
    fn table_cell_rendering() {
        let cell = TableCell {
            mean: 0.41,
            std: None,
        };
        assert_eq!(cell.render(), "0.41");
        let cell = TableCell {
            mean: -0.0951,
            std: Some(0.4099),
        };
        assert_eq!(cell.render(), "-0.10(0.41)");
    }
}
