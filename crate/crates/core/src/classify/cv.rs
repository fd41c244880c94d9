//! Stratified k-fold cross-validation and classification metrics.

use rand::seq::SliceRandom;
use serde::Serialize;

use super::{balance, train, ClassifierKind, ClassifierModel, Dataset, DEFAULT_K_NEIGHBORS};
use crate::error::{Error, Result};
use crate::seed;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Confusion {
    pub tp: u64,
    pub fp: u64,
    pub fn_: u64,
    pub tn: u64,
}

impl Confusion {
    pub fn record(&mut self, predicted: bool, actual: bool) {
        match (predicted, actual) {
            (true, true) => self.tp += 1,
            (true, false) => self.fp += 1,
            (false, true) => self.fn_ += 1,
            (false, false) => self.tn += 1,
        }
    }

    pub fn total(&self) -> u64 {
        self.tp + self.fp + self.fn_ + self.tn
    }

    /// Ratios with an empty denominator are 0.
    pub fn metrics(&self) -> Metrics {
        let ratio = |a: u64, b: u64| if b == 0 { 0.0 } else { a as f64 / b as f64 };
        let precision = ratio(self.tp, self.tp + self.fp);
        let recall = ratio(self.tp, self.tp + self.fn_);
        let f1 = if precision + recall > 0.0 {
            2.0 * precision * recall / (precision + recall)
        } else {
            0.0
        };
        Metrics {
            accuracy: ratio(self.tp + self.tn, self.total()),
            precision,
            recall,
            f1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct Metrics {
    pub accuracy: f64,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

impl Metrics {
    fn map(self, f: impl Fn(f64) -> f64) -> Metrics {
        Metrics {
            accuracy: f(self.accuracy),
            precision: f(self.precision),
            recall: f(self.recall),
            f1: f(self.f1),
        }
    }

    fn zip(self, o: Metrics, f: impl Fn(f64, f64) -> f64) -> Metrics {
        Metrics {
            accuracy: f(self.accuracy, o.accuracy),
            precision: f(self.precision, o.precision),
            recall: f(self.recall, o.recall),
            f1: f(self.f1, o.f1),
        }
    }

    /// Component-wise mean; zeros for an empty slice.
    pub fn mean(all: &[Metrics]) -> Metrics {
        if all.is_empty() {
            return Metrics::default();
        }
        let n = all.len() as f64;
        all.iter()
            .fold(Metrics::default(), |a, &m| a.zip(m, |x, y| x + y))
            .map(|s| s / n)
    }

    /// Sample standard deviation over `sqrt(n)`.
    pub fn std_error(all: &[Metrics]) -> Metrics {
        if all.len() < 2 {
            return Metrics::default();
        }
        let n = all.len() as f64;
        let mean = Metrics::mean(all);
        all.iter()
            .fold(Metrics::default(), |a, &m| {
                a.zip(m.zip(mean, |x, y| (x - y) * (x - y)), |s, d| s + d)
            })
            .map(|s| (s / (n - 1.0)).sqrt() / n.sqrt())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvalReport {
    pub mean: Metrics,
    pub std_error: Metrics,
    pub folds: Vec<Metrics>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CvConfig {
    pub folds: usize,
    pub kind: ClassifierKind,
    pub smote_k: usize,
    pub seed: u64,
}

impl Default for CvConfig {
    fn default() -> Self {
        CvConfig {
            folds: 10,
            kind: ClassifierKind::LinearSvm,
            smote_k: DEFAULT_K_NEIGHBORS,
            seed: 0,
        }
    }
}

/// Fold index per row. Each class is shuffled separately and dealt round
/// robin, so every fold gets a near-equal share of both classes.
pub fn stratified_folds(y: &[bool], folds: usize, seed: u64) -> Vec<usize> {
    let mut rng = seed::rng(seed, &[0xf01d]);
    let mut fold_of = vec![0; y.len()];
    let mut next = 0;
    for class in [true, false] {
        let mut rows: Vec<usize> = (0..y.len()).filter(|&i| y[i] == class).collect();
        rows.shuffle(&mut rng);
        for i in rows {
            fold_of[i] = next % folds;
            next += 1;
        }
    }
    fold_of
}

/// Confusion counts of a model on a labelled set.
pub fn evaluate(model: &ClassifierModel, data: &Dataset) -> Result<Confusion> {
    let mut c = Confusion::default();
    for (x, &y) in data.x.iter().zip(&data.y) {
        c.record(model.predict(x)?, y);
    }
    Ok(c)
}

/// Stratified k-fold cross-validation. Training folds are SMOTE-balanced;
/// test folds are never resampled.
pub fn cross_validate(data: &Dataset, config: &CvConfig) -> Result<EvalReport> {
    let (spam, benign) = data.class_counts();
    if config.folds < 2 {
        return Err(Error::Config(
            "cross-validation needs at least 2 folds".into(),
        ));
    }
    if spam < config.folds || benign < config.folds {
        return Err(Error::InsufficientData {
            neighborhood: data.name.clone(),
            message: format!(
                "{spam} spam and {benign} benign rows, need at least {} of each",
                config.folds
            ),
        });
    }
    let fold_of = stratified_folds(&data.y, config.folds, config.seed);
    let folds = (0..config.folds)
        .map(|f| {
            let (test, train_rows): (Vec<usize>, Vec<usize>) =
                (0..data.len()).partition(|&i| fold_of[i] == f);
            let balanced = balance(
                &data.subset(&train_rows),
                config.smote_k,
                seed::derive(config.seed, &[1, f as u64]),
            )?;
            let model = train(
                &balanced.x,
                &balanced.y,
                config.kind,
                seed::derive(config.seed, &[2, f as u64]),
            )?;
            Ok(evaluate(&model, &data.subset(&test))?.metrics())
        })
        .collect::<Result<Vec<Metrics>>>()?;
    Ok(EvalReport {
        mean: Metrics::mean(&folds),
        std_error: Metrics::std_error(&folds),
        folds,
    })
}
