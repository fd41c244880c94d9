//! Early-detection sweeps and poisoning/evasion experiments over PoI
//! observations.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use rand::seq::SliceRandom;
use rand::Rng as _;
use rayon::prelude::*;
use serde::Serialize;

use crate::classify::{balance, cross_validate, evaluate, train, CvConfig, Dataset, Metrics};
use crate::error::{Error, Result};
use crate::poi::{normalize, GroupObservation};
use crate::seed;
use crate::topics::CommunityTopicSummary;

/// Labelled observations of one neighborhood.
#[derive(Debug, Clone)]
pub struct LabeledTable {
    pub name: String,
    /// Every community of the neighborhood partition.
    pub communities: Vec<usize>,
    pub topics: CommunityTopicSummary,
    pub axis: Vec<usize>,
    pub observations: Vec<GroupObservation>,
    /// `true` for spam.
    pub labels: Vec<bool>,
}

impl LabeledTable {
    pub fn features(&self, obs: &GroupObservation) -> Vec<f64> {
        let mut v = normalize(&obs.topic_counts(&self.topics, &self.axis));
        v.push(obs.user_ratio());
        v
    }

    pub fn dataset_from(&self, observations: &[GroupObservation]) -> Dataset {
        let mut d = Dataset::new(self.name.clone());
        for (o, &y) in observations.iter().zip(&self.labels) {
            d.push(self.features(o), y);
        }
        d
    }

    pub fn dataset(&self) -> Dataset {
        self.dataset_from(&self.observations)
    }

    fn rows_with(&self, spam: bool) -> Vec<usize> {
        (0..self.labels.len())
            .filter(|&i| self.labels[i] == spam)
            .collect()
    }
}

/// Drops the counts of communities outside `observed`.
pub fn mask_spam_observation(
    obs: &GroupObservation,
    observed: &BTreeSet<usize>,
) -> GroupObservation {
    GroupObservation {
        group_id: obs.group_id.clone(),
        per_community: obs
            .per_community
            .iter()
            .filter(|(c, _)| observed.contains(c))
            .map(|(&c, &o)| (c, o))
            .collect(),
        unassigned: obs.unassigned,
    }
}

/// In compromised communities the spam group's message and author counts
/// are replaced by the mimicked benign group's; elsewhere they are kept.
pub fn poison_counts(
    spam: &GroupObservation,
    mimic: &GroupObservation,
    compromised: &BTreeSet<usize>,
) -> GroupObservation {
    let mut out = spam.clone();
    for c in compromised {
        match mimic.per_community.get(c) {
            Some(&o) => {
                out.per_community.insert(*c, o);
            }
            None => {
                out.per_community.remove(c);
            }
        }
    }
    out
}

fn fraction_tag(f: f64) -> u64 {
    (f * 1e6).round() as u64
}

fn sample_communities(
    communities: &[usize],
    fraction: f64,
    rng: &mut seed::Rng,
) -> BTreeSet<usize> {
    let k = (fraction * communities.len() as f64).round() as usize;
    communities
        .choose_multiple(rng, k.min(communities.len()))
        .copied()
        .collect()
}

fn check_fraction(f: f64) -> Result<()> {
    if (0.0..=1.0).contains(&f) {
        Ok(())
    } else {
        Err(Error::Config(format!(
            "fraction must lie in [0, 1], got {f}"
        )))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SweepPoint {
    pub fraction: f64,
    pub rep: usize,
    pub metrics: Metrics,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepCurve {
    pub seed: u64,
    pub repetitions: usize,
    pub points: Vec<SweepPoint>,
}

impl SweepCurve {
    /// Mean metrics per fraction, in fraction order.
    pub fn summary(&self) -> Vec<(f64, Metrics)> {
        let mut fractions: Vec<f64> = self.points.iter().map(|p| p.fraction).collect();
        fractions.dedup();
        fractions
            .into_iter()
            .map(|f| {
                let at: Vec<Metrics> = self
                    .points
                    .iter()
                    .filter(|p| p.fraction == f)
                    .map(|p| p.metrics)
                    .collect();
                (f, Metrics::mean(&at))
            })
            .collect()
    }

    /// `fraction,rep,precision,recall,f1,accuracy`, then one `mean` row per
    /// fraction.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("fraction,rep,precision,recall,f1,accuracy\n");
        let mut row = |f: f64, rep: &str, m: &Metrics| {
            let _ = writeln!(
                out,
                "{f},{rep},{},{},{},{}",
                m.precision, m.recall, m.f1, m.accuracy
            );
        };
        for p in &self.points {
            row(p.fraction, &p.rep.to_string(), &p.metrics);
        }
        for (f, m) in self.summary() {
            row(f, "mean", &m);
        }
        out
    }
}

/// Averages per-table metrics, unweighted.
fn over_tables<F>(tables: &[LabeledTable], per_table: F) -> Result<Metrics>
where
    F: Fn(usize, &LabeledTable) -> Result<Metrics> + Sync,
{
    if tables.is_empty() {
        return Err(Error::invalid("no labelled tables"));
    }
    let all = tables
        .par_iter()
        .enumerate()
        .map(|(i, t)| per_table(i, t))
        .collect::<Result<Vec<Metrics>>>()?;
    Ok(Metrics::mean(&all))
}

fn cv_for_rep(cv: &CvConfig, rep: usize) -> CvConfig {
    CvConfig {
        seed: seed::derive(cv.seed, &[seed::tag("cv"), rep as u64]),
        ..cv.clone()
    }
}

/// For each fraction and repetition, every spam row keeps only the counts of
/// a fresh random sample of `round(f * n)` communities; then
/// cross-validation runs per table. The CV split depends on the repetition
/// only, so a fraction of 1 reproduces the unmasked baseline.
pub fn run_early_detection(
    tables: &[LabeledTable],
    fractions: &[f64],
    reps: usize,
    cv: &CvConfig,
) -> Result<SweepCurve> {
    if fractions.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Config(
            "fractions must be strictly increasing".into(),
        ));
    }
    fractions.iter().try_for_each(|&f| check_fraction(f))?;
    let mut points = Vec::new();
    for &fraction in fractions {
        for rep in 0..reps {
            let cv_rep = cv_for_rep(cv, rep);
            let metrics = over_tables(tables, |ti, t| {
                let masked: Vec<GroupObservation> = t
                    .observations
                    .iter()
                    .zip(&t.labels)
                    .enumerate()
                    .map(|(ri, (o, &spam))| {
                        if !spam {
                            return o.clone();
                        }
                        let mut rng = seed::rng(
                            cv.seed,
                            &[
                                seed::tag("early"),
                                fraction_tag(fraction),
                                rep as u64,
                                ti as u64,
                                ri as u64,
                            ],
                        );
                        mask_spam_observation(
                            o,
                            &sample_communities(&t.communities, fraction, &mut rng),
                        )
                    })
                    .collect();
                Ok(cross_validate(&t.dataset_from(&masked), &cv_rep)?.mean)
            })?;
            points.push(SweepPoint {
                fraction,
                rep,
                metrics,
            });
        }
    }
    Ok(SweepCurve {
        seed: cv.seed,
        repetitions: reps,
        points,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum AttackKind {
    Poisoning,
    Evasion,
}

impl std::str::FromStr for AttackKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "poisoning" => Ok(AttackKind::Poisoning),
            "evasion" => Ok(AttackKind::Evasion),
            _ => Err(Error::Config(format!("unknown attack kind {s:?}"))),
        }
    }
}

/// Poisoned copies of every spam row: one compromised community set per
/// table and repetition, one uniformly drawn benign row to mimic per spam
/// row. Benign rows are returned unchanged.
fn poisoned_observations(
    t: &LabeledTable,
    ti: usize,
    fraction: f64,
    rep: usize,
    seed_base: u64,
    kind: u64,
) -> Result<Vec<GroupObservation>> {
    let benign = t.rows_with(false);
    if benign.is_empty() {
        return Err(Error::InsufficientData {
            neighborhood: t.name.clone(),
            message: "no benign rows to mimic".into(),
        });
    }
    let mut rng = seed::rng(
        seed_base,
        &[kind, fraction_tag(fraction), rep as u64, ti as u64],
    );
    let compromised = sample_communities(&t.communities, fraction, &mut rng);
    Ok(t.observations
        .iter()
        .zip(&t.labels)
        .map(|(o, &spam)| {
            if spam {
                let mimic = &t.observations[benign[rng.gen_range(0..benign.len())]];
                poison_counts(o, mimic, &compromised)
            } else {
                o.clone()
            }
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AttackResult {
    pub kind: AttackKind,
    pub fraction: f64,
    pub per_rep: Vec<Metrics>,
    pub mean: Metrics,
}

/// Every spam row is poisoned in both training and test data, then
/// cross-validated per table.
pub fn run_poisoning(
    tables: &[LabeledTable],
    fraction: f64,
    reps: usize,
    cv: &CvConfig,
) -> Result<AttackResult> {
    check_fraction(fraction)?;
    let per_rep = (0..reps)
        .map(|rep| {
            let cv_rep = cv_for_rep(cv, rep);
            over_tables(tables, |ti, t| {
                let poisoned =
                    poisoned_observations(t, ti, fraction, rep, cv.seed, seed::tag("poison"))?;
                Ok(cross_validate(&t.dataset_from(&poisoned), &cv_rep)?.mean)
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(AttackResult {
        kind: AttackKind::Poisoning,
        fraction,
        mean: Metrics::mean(&per_rep),
        per_rep,
    })
}

/// Benign rows held out for the evasion test set: as many as there are
/// spam rows, capped at half of the benign rows so training keeps some.
pub fn evasion_benign_count(n_spam: usize, n_benign: usize) -> usize {
    n_spam.min(n_benign / 2)
}

/// A model trained on the clean ground truth (minus the held-out benign
/// rows) is tested on all mimicking spam rows plus the held-out benign rows.
pub fn run_evasion(
    tables: &[LabeledTable],
    fraction: f64,
    reps: usize,
    cv: &CvConfig,
) -> Result<AttackResult> {
    check_fraction(fraction)?;
    let per_rep = (0..reps)
        .map(|rep| {
            over_tables(tables, |ti, t| {
                let poisoned =
                    poisoned_observations(t, ti, fraction, rep, cv.seed, seed::tag("evade"))?;
                let spam = t.rows_with(true);
                let mut benign = t.rows_with(false);
                let mut rng = seed::rng(
                    cv.seed,
                    &[
                        seed::tag("evade-split"),
                        fraction_tag(fraction),
                        rep as u64,
                        ti as u64,
                    ],
                );
                benign.shuffle(&mut rng);
                let x = evasion_benign_count(spam.len(), benign.len());
                let (held_out, kept) = benign.split_at(x);

                let clean = t.dataset();
                let train_rows: Vec<usize> = spam.iter().chain(kept).copied().collect();
                let train_set = balance(
                    &clean.subset(&train_rows),
                    cv.smote_k,
                    seed::derive(cv.seed, &[3, rep as u64, ti as u64]),
                )?;
                let model = train(
                    &train_set.x,
                    &train_set.y,
                    cv.kind,
                    seed::derive(cv.seed, &[4, rep as u64, ti as u64]),
                )?;

                let attacked = t.dataset_from(&poisoned);
                let test_rows: Vec<usize> = spam.iter().chain(held_out).copied().collect();
                Ok(evaluate(&model, &attacked.subset(&test_rows))?.metrics())
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(AttackResult {
        kind: AttackKind::Evasion,
        fraction,
        mean: Metrics::mean(&per_rep),
        per_rep,
    })
}

pub fn run_attack(
    kind: AttackKind,
    tables: &[LabeledTable],
    fraction: f64,
    reps: usize,
    cv: &CvConfig,
) -> Result<AttackResult> {
    match kind {
        AttackKind::Poisoning => run_poisoning(tables, fraction, reps, cv),
        AttackKind::Evasion => run_evasion(tables, fraction, reps, cv),
    }
}

/// Attack results as a curve over fractions.
pub fn attack_curve(results: &[AttackResult], seed: u64) -> SweepCurve {
    SweepCurve {
        seed,
        repetitions: results.first().map_or(0, |r| r.per_rep.len()),
        points: results
            .iter()
            .flat_map(|r| {
                r.per_rep
                    .iter()
                    .enumerate()
                    .map(|(rep, &metrics)| SweepPoint {
                        fraction: r.fraction,
                        rep,
                        metrics,
                    })
            })
            .collect(),
    }
}

/// `{0, 0.1, ..., 1.0}`.
pub fn default_fractions() -> Vec<f64> {
    (0..=10).map(|i| i as f64 / 10.0).collect()
}

/// Whether `values[j] <= values[i] + tolerance` for all `i < j`.
pub fn non_increasing_within(values: &[f64], tolerance: f64) -> bool {
    values
        .iter()
        .enumerate()
        .all(|(i, &a)| values[i + 1..].iter().all(|&b| b <= a + tolerance))
}

/// Whether `values[j] >= values[i] - tolerance` for all `i < j`.
pub fn non_decreasing_within(values: &[f64], tolerance: f64) -> bool {
    let neg: Vec<f64> = values.iter().map(|v| -v).collect();
    non_increasing_within(&neg, tolerance)
}
