//! Binary spam classification over PoI feature vectors.

mod cv;
mod nb;
mod smote;
mod svm;

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

pub use cv::{
    cross_validate, evaluate, stratified_folds, Confusion, CvConfig, EvalReport, Metrics,
};
pub use nb::GaussianNb;
pub use smote::{balance, smote, DEFAULT_K_NEIGHBORS};
pub use svm::LinearSvm;

use crate::error::{Error, Result};

/// Manual group label.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum RawLabel {
    Spam,
    App,
    Quote,
    Normal,
    Unknown,
}

impl FromStr for RawLabel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "spam" => Ok(RawLabel::Spam),
            "app" => Ok(RawLabel::App),
            "quote" => Ok(RawLabel::Quote),
            "normal" => Ok(RawLabel::Normal),
            "unknown" => Ok(RawLabel::Unknown),
            other => Err(Error::invalid(format!("unknown label {other:?}"))),
        }
    }
}

impl fmt::Display for RawLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RawLabel::Spam => "spam",
            RawLabel::App => "app",
            RawLabel::Quote => "quote",
            RawLabel::Normal => "normal",
            RawLabel::Unknown => "unknown",
        })
    }
}

/// Mapping from raw labels to spam/benign.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Combination {
    /// spam vs. normal, quote, app
    One,
    /// spam vs. normal; app and quote dropped
    Two,
    /// spam, app vs. normal, quote
    #[default]
    Three,
}

impl Combination {
    pub fn from_index(i: u8) -> Result<Self> {
        match i {
            1 => Ok(Combination::One),
            2 => Ok(Combination::Two),
            3 => Ok(Combination::Three),
            _ => Err(Error::Config(format!(
                "combination must be 1, 2 or 3, got {i}"
            ))),
        }
    }

    pub fn index(self) -> u8 {
        match self {
            Combination::One => 1,
            Combination::Two => 2,
            Combination::Three => 3,
        }
    }
}

/// `Some(true)` for spam, `Some(false)` for benign, `None` when dropped.
pub fn apply_combination(label: RawLabel, combination: Combination) -> Option<bool> {
    use RawLabel::*;
    match (combination, label) {
        (_, Unknown) => None,
        (_, Spam) => Some(true),
        (_, Normal) => Some(false),
        (Combination::One, App | Quote) => Some(false),
        (Combination::Two, App | Quote) => None,
        (Combination::Three, App) => Some(true),
        (Combination::Three, Quote) => Some(false),
    }
}

/// Reads `group_id,raw_label` rows.
pub fn read_labels(text: &str) -> Result<BTreeMap<String, RawLabel>> {
    let mut out = BTreeMap::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() || (i == 0 && line.starts_with("group_id")) {
            continue;
        }
        let record = |message: String| Error::Record {
            line: i + 1,
            message,
        };
        let (g, l) = line
            .rsplit_once(',')
            .ok_or_else(|| record("expected `group_id,raw_label`".into()))?;
        let label = l.parse().map_err(|e: Error| record(e.to_string()))?;
        out.insert(g.to_string(), label);
    }
    Ok(out)
}

pub fn labels_to_csv(labels: &BTreeMap<String, RawLabel>) -> String {
    let mut out = String::from("group_id,raw_label\n");
    for (g, l) in labels {
        out.push_str(&format!("{g},{l}\n"));
    }
    out
}

/// Feature rows with binary targets (`true` = spam).
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Dataset {
    pub name: String,
    pub x: Vec<Vec<f64>>,
    pub y: Vec<bool>,
}

impl Dataset {
    pub fn new(name: impl Into<String>) -> Self {
        Dataset {
            name: name.into(),
            ..Default::default()
        }
    }

    pub fn push(&mut self, features: Vec<f64>, spam: bool) {
        self.x.push(features);
        self.y.push(spam);
    }

    pub fn len(&self) -> usize {
        self.y.len()
    }

    pub fn is_empty(&self) -> bool {
        self.y.is_empty()
    }

    /// `(spam, benign)` row counts.
    pub fn class_counts(&self) -> (usize, usize) {
        let spam = self.y.iter().filter(|&&s| s).count();
        (spam, self.y.len() - spam)
    }

    pub fn subset(&self, rows: &[usize]) -> Dataset {
        Dataset {
            name: self.name.clone(),
            x: rows.iter().map(|&i| self.x[i].clone()).collect(),
            y: rows.iter().map(|&i| self.y[i]).collect(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ClassifierKind {
    #[default]
    LinearSvm,
    GaussianNb,
}

impl FromStr for ClassifierKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "linear-svm" | "svm" => Ok(ClassifierKind::LinearSvm),
            "gaussian-nb" | "nb" => Ok(ClassifierKind::GaussianNb),
            _ => Err(Error::Config(format!("unknown classifier {s:?}"))),
        }
    }
}

impl fmt::Display for ClassifierKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ClassifierKind::LinearSvm => "linear-svm",
            ClassifierKind::GaussianNb => "gaussian-nb",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ClassifierModel {
    LinearSvm(LinearSvm),
    GaussianNb(GaussianNb),
}

impl ClassifierModel {
    pub fn dim(&self) -> usize {
        match self {
            ClassifierModel::LinearSvm(m) => m.weights.len(),
            ClassifierModel::GaussianNb(m) => m.dim(),
        }
    }

    /// `true` for spam.
    pub fn predict(&self, x: &[f64]) -> Result<bool> {
        if x.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                actual: x.len(),
            });
        }
        Ok(match self {
            ClassifierModel::LinearSvm(m) => m.decision(x) > 0.0,
            ClassifierModel::GaussianNb(m) => m.log_odds(x) > 0.0,
        })
    }
}

fn check_training_set(x: &[Vec<f64>], y: &[bool]) -> Result<usize> {
    if x.len() != y.len() {
        return Err(Error::invalid("feature and label counts differ"));
    }
    let spam = y.iter().filter(|&&s| s).count();
    if spam == 0 || spam == y.len() {
        return Err(Error::SingleClass);
    }
    let dim = x[0].len();
    if let Some(bad) = x.iter().find(|r| r.len() != dim) {
        return Err(Error::DimensionMismatch {
            expected: dim,
            actual: bad.len(),
        });
    }
    Ok(dim)
}

pub fn train(
    x: &[Vec<f64>],
    y: &[bool],
    kind: ClassifierKind,
    seed: u64,
) -> Result<ClassifierModel> {
    check_training_set(x, y)?;
    Ok(match kind {
        ClassifierKind::LinearSvm => ClassifierModel::LinearSvm(LinearSvm::fit(x, y, seed)),
        ClassifierKind::GaussianNb => ClassifierModel::GaussianNb(GaussianNb::fit(x, y)),
    })
}

/// Per-user message tallies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct AccountCounts {
    pub spam: u64,
    pub total: u64,
}

/// An account is spam when its spam share `s = spam / total` reaches `tau`.
/// Accounts with no messages are left out.
pub fn label_accounts(
    counts: &BTreeMap<String, AccountCounts>,
    tau: f64,
) -> Result<BTreeMap<String, bool>> {
    if !(0.0..=1.0).contains(&tau) {
        return Err(Error::Config(format!("tau must lie in [0, 1], got {tau}")));
    }
    Ok(counts
        .iter()
        .filter(|(_, c)| c.total > 0)
        .map(|(u, c)| (u.clone(), c.spam as f64 / c.total as f64 >= tau))
        .collect())
}
