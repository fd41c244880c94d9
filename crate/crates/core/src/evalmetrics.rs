//! Homogeneity, completeness and V-measure between community membership and
//! topic labels, and the two-sample Z-test against a null grouping.

use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;

use serde::Serialize;
use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{Error, Result};

/// `counts[c][t]`: documents of community `c` labelled with topic `t`.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Contingency {
    pub communities: Vec<usize>,
    pub topics: Vec<usize>,
    pub counts: Vec<Vec<u64>>,
}

impl Contingency {
    pub fn from_counts(counts: Vec<Vec<u64>>) -> Self {
        let rows = counts.len();
        let cols = counts.first().map_or(0, Vec::len);
        Contingency {
            communities: (0..rows).collect(),
            topics: (0..cols).collect(),
            counts,
        }
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().flatten().sum()
    }

    pub fn row_sums(&self) -> Vec<u64> {
        self.counts.iter().map(|r| r.iter().sum()).collect()
    }

    pub fn col_sums(&self) -> Vec<u64> {
        let mut s = vec![0; self.topics.len()];
        for row in &self.counts {
            for (a, &v) in s.iter_mut().zip(row) {
                *a += v;
            }
        }
        s
    }

    /// Topics become rows and communities columns.
    pub fn transpose(&self) -> Self {
        Contingency {
            communities: self.topics.clone(),
            topics: self.communities.clone(),
            counts: (0..self.topics.len())
                .map(|t| self.counts.iter().map(|r| r[t]).collect())
                .collect(),
        }
    }
}

/// Cross-tabulates two labelings of the same documents.
pub fn contingency(
    membership: &BTreeMap<String, usize>,
    labels: &BTreeMap<String, usize>,
) -> Result<Contingency> {
    if let Some(d) = membership.keys().find(|d| !labels.contains_key(*d)) {
        return Err(Error::invalid(format!("document {d} has no topic label")));
    }
    if let Some(d) = labels.keys().find(|d| !membership.contains_key(*d)) {
        return Err(Error::invalid(format!("document {d} has no community")));
    }
    let mut communities: Vec<usize> = membership.values().copied().collect();
    communities.sort_unstable();
    communities.dedup();
    let mut topics: Vec<usize> = labels.values().copied().collect();
    topics.sort_unstable();
    topics.dedup();
    let row: HashMap<usize, usize> = communities
        .iter()
        .enumerate()
        .map(|(i, &c)| (c, i))
        .collect();
    let col: HashMap<usize, usize> = topics.iter().enumerate().map(|(i, &t)| (t, i)).collect();
    let mut counts = vec![vec![0u64; topics.len()]; communities.len()];
    for (doc, c) in membership {
        counts[row[c]][col[&labels[doc]]] += 1;
    }
    Ok(Contingency {
        communities,
        topics,
        counts,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct Scores {
    pub homogeneity: f64,
    pub completeness: f64,
    pub v_measure: f64,
}

fn entropy(marginal: &[u64], n: f64) -> f64 {
    -marginal
        .iter()
        .filter(|&&v| v > 0)
        .map(|&v| {
            let p = v as f64 / n;
            p * p.ln()
        })
        .sum::<f64>()
}

/// `H(rows | cols)` in nats.
fn conditional_entropy(table: &Contingency, n: f64) -> f64 {
    let cols = table.col_sums();
    -table
        .counts
        .iter()
        .flat_map(|r| r.iter().enumerate())
        .filter(|(_, &v)| v > 0)
        .map(|(t, &v)| v as f64 / n * (v as f64 / cols[t] as f64).ln())
        .sum::<f64>()
}

/// Homogeneity: each topic confined to one community. Completeness: each
/// community's documents share one topic. Natural-log entropies.
pub fn homogeneity_completeness_v(table: &Contingency) -> Scores {
    let n = table.total() as f64;
    if n == 0.0 {
        return Scores {
            homogeneity: 1.0,
            completeness: 1.0,
            v_measure: 1.0,
        };
    }
    let h_c = entropy(&table.row_sums(), n);
    let h_t = entropy(&table.col_sums(), n);
    let homogeneity = if h_c == 0.0 {
        1.0
    } else {
        (1.0 - conditional_entropy(table, n) / h_c).clamp(0.0, 1.0)
    };
    let completeness = if h_t == 0.0 {
        1.0
    } else {
        (1.0 - conditional_entropy(&table.transpose(), n) / h_t).clamp(0.0, 1.0)
    };
    let v_measure = if homogeneity + completeness == 0.0 {
        0.0
    } else {
        2.0 * homogeneity * completeness / (homogeneity + completeness)
    };
    Scores {
        homogeneity,
        completeness,
        v_measure,
    }
}

/// Normalized mutual information with arithmetic-mean normalization, which
/// equals the V-measure of the two labelings.
pub fn nmi(a: &[usize], b: &[usize]) -> f64 {
    let rows = a.iter().copied().max().map_or(0, |m| m + 1);
    let cols = b.iter().copied().max().map_or(0, |m| m + 1);
    let mut counts = vec![vec![0u64; cols]; rows];
    for (&x, &y) in a.iter().zip(b) {
        counts[x][y] += 1;
    }
    homogeneity_completeness_v(&Contingency::from_counts(counts)).v_measure
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ZTest {
    Value {
        z: f64,
        p: f64,
    },
    /// Both samples have zero variance but different means.
    Degenerate {
        mean_difference: f64,
    },
}

impl ZTest {
    pub fn p_value(&self) -> Option<f64> {
        match self {
            ZTest::Value { p, .. } => Some(*p),
            ZTest::Degenerate { .. } => None,
        }
    }
}

fn mean_var(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0);
    (mean, var)
}

/// Two-sided Z-test on the difference of means with standard error
/// `sqrt(s1^2/n1 + s2^2/n2)`.
pub fn two_sample_z(a: &[f64], b: &[f64]) -> Result<ZTest> {
    if a.len() < 2 || b.len() < 2 {
        return Err(Error::invalid("each sample needs at least 2 values"));
    }
    let (ma, va) = mean_var(a);
    let (mb, vb) = mean_var(b);
    let se = (va / a.len() as f64 + vb / b.len() as f64).sqrt();
    let diff = ma - mb;
    if se == 0.0 {
        return Ok(if diff == 0.0 {
            ZTest::Value { z: 0.0, p: 1.0 }
        } else {
            ZTest::Degenerate {
                mean_difference: diff,
            }
        });
    }
    let z = diff / se;
    let normal = Normal::new(0.0, 1.0).expect("standard normal");
    Ok(ZTest::Value {
        z,
        p: (2.0 * normal.sf(z.abs())).min(1.0),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NeighborhoodScores {
    pub neighborhood_id: String,
    pub actual: Scores,
    pub null: Scores,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidationReport {
    pub neighborhoods: Vec<NeighborhoodScores>,
    pub mean_actual: Scores,
    pub mean_null: Scores,
    /// `None` with fewer than two neighborhoods.
    pub homogeneity_test: Option<ZTest>,
    pub completeness_test: Option<ZTest>,
}

fn mean_scores(all: &[Scores]) -> Scores {
    let n = all.len().max(1) as f64;
    Scores {
        homogeneity: all.iter().map(|s| s.homogeneity).sum::<f64>() / n,
        completeness: all.iter().map(|s| s.completeness).sum::<f64>() / n,
        v_measure: all.iter().map(|s| s.v_measure).sum::<f64>() / n,
    }
}

/// Compares per-neighborhood scores of the actual communities with those of
/// the null groupings; averages are unweighted over neighborhoods.
pub fn compare_to_null(neighborhoods: Vec<NeighborhoodScores>) -> Result<ValidationReport> {
    let actual: Vec<Scores> = neighborhoods.iter().map(|n| n.actual).collect();
    let null: Vec<Scores> = neighborhoods.iter().map(|n| n.null).collect();
    let h = |s: &[Scores]| s.iter().map(|x| x.homogeneity).collect::<Vec<_>>();
    let c = |s: &[Scores]| s.iter().map(|x| x.completeness).collect::<Vec<_>>();
    let test = |a: &[f64], b: &[f64]| {
        if neighborhoods.len() < 2 {
            Ok(None)
        } else {
            two_sample_z(a, b).map(Some)
        }
    };
    Ok(ValidationReport {
        homogeneity_test: test(&h(&actual), &h(&null))?,
        completeness_test: test(&c(&actual), &c(&null))?,
        mean_actual: mean_scores(&actual),
        mean_null: mean_scores(&null),
        neighborhoods,
    })
}

impl ValidationReport {
    /// `neighborhood_id,h_actual,c_actual,v_actual,h_null,c_null,v_null`.
    pub fn to_csv(&self) -> String {
        let mut out =
            String::from("neighborhood_id,h_actual,c_actual,v_actual,h_null,c_null,v_null\n");
        for n in &self.neighborhoods {
            let (a, b) = (n.actual, n.null);
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{}",
                n.neighborhood_id,
                a.homogeneity,
                a.completeness,
                a.v_measure,
                b.homogeneity,
                b.completeness,
                b.v_measure
            );
        }
        out
    }
}
