//! Parties-of-interest tables: for each message group, the distribution of
//! topics over the communities its messages reached.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::grouping::MessageGroup;
use crate::topics::CommunityTopicSummary;

/// Messages and distinct authors of one group inside one community.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct CommunityObservation {
    pub messages: u64,
    pub authors: u64,
}

/// Where a group's messages landed within one neighborhood.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct GroupObservation {
    pub group_id: String,
    pub per_community: BTreeMap<usize, CommunityObservation>,
    /// Messages whose author has no community here.
    pub unassigned: u64,
}

impl GroupObservation {
    pub fn messages(&self) -> u64 {
        self.per_community.values().map(|o| o.messages).sum()
    }

    /// Communities are disjoint, so per-community author counts add up.
    pub fn authors(&self) -> u64 {
        self.per_community.values().map(|o| o.authors).sum()
    }

    /// Distinct authors per message; 0 when nothing was counted.
    pub fn user_ratio(&self) -> f64 {
        match self.messages() {
            0 => 0.0,
            m => self.authors() as f64 / m as f64,
        }
    }

    /// Each message adds one to every topic of its community.
    pub fn topic_counts(&self, topics: &CommunityTopicSummary, axis: &[usize]) -> Vec<u64> {
        let position: HashMap<usize, usize> =
            axis.iter().enumerate().map(|(i, &t)| (t, i)).collect();
        let mut counts = vec![0u64; axis.len()];
        for (community, obs) in &self.per_community {
            if let Some(ct) = topics.communities.get(community) {
                for t in ct.topic_multiset.keys() {
                    if let Some(&j) = position.get(t) {
                        counts[j] += obs.messages;
                    }
                }
            }
        }
        counts
    }
}

/// Splits a group's messages by their author's community.
pub fn observe_group(
    group: &MessageGroup,
    author_of: &HashMap<String, String>,
    membership: &HashMap<String, usize>,
) -> GroupObservation {
    let mut per_community: BTreeMap<usize, CommunityObservation> = BTreeMap::new();
    let mut authors: BTreeMap<usize, BTreeSet<&str>> = BTreeMap::new();
    let mut unassigned = 0;
    for id in &group.message_ids {
        match author_of
            .get(id)
            .and_then(|a| membership.get(a).map(|&c| (a, c)))
        {
            Some((author, c)) => {
                per_community.entry(c).or_default().messages += 1;
                authors.entry(c).or_default().insert(author);
            }
            None => unassigned += 1,
        }
    }
    for (c, set) in authors {
        per_community
            .get_mut(&c)
            .expect("community observed")
            .authors = set.len() as u64;
    }
    GroupObservation {
        group_id: group.group_id.clone(),
        per_community,
        unassigned,
    }
}

/// Ascending union of every community's unique topics.
pub fn topic_axis(topics: &CommunityTopicSummary) -> Vec<usize> {
    let set: BTreeSet<usize> = topics
        .communities
        .values()
        .flat_map(|c| c.topic_multiset.keys().copied())
        .collect();
    set.into_iter().collect()
}

/// Per-topic message counts of a group, plus the number of messages skipped
/// because their author has no community.
pub fn poi_counts(
    group: &MessageGroup,
    topics: &CommunityTopicSummary,
    membership: &HashMap<String, usize>,
    author_of: &HashMap<String, String>,
    axis: &[usize],
) -> (Vec<u64>, u64) {
    let obs = observe_group(group, author_of, membership);
    (obs.topic_counts(topics, axis), obs.unassigned)
}

/// Counts divided by their sum; the zero vector stays zero.
pub fn normalize(counts: &[u64]) -> Vec<f64> {
    let total: u64 = counts.iter().sum();
    if total == 0 {
        return vec![0.0; counts.len()];
    }
    counts.iter().map(|&c| c as f64 / total as f64).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct PoIVector {
    pub group_id: String,
    pub counts: Vec<u64>,
    pub probs: Vec<f64>,
}

impl PoIVector {
    pub fn from_counts(group_id: impl Into<String>, counts: Vec<u64>) -> Self {
        PoIVector {
            group_id: group_id.into(),
            probs: normalize(&counts),
            counts,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FeatureVector {
    pub probs: Vec<f64>,
    pub user_ratio: f64,
}

impl FeatureVector {
    /// Topic probabilities followed by the user ratio.
    pub fn to_vec(&self) -> Vec<f64> {
        let mut v = self.probs.clone();
        v.push(self.user_ratio);
        v
    }
}

/// Features of a table row, with `user_ratio = |authors| / |messages|` of
/// the whole group.
pub fn feature_vector(row: &PoIVector, group: &MessageGroup) -> FeatureVector {
    FeatureVector {
        probs: row.probs.clone(),
        user_ratio: group.authors.len() as f64 / group.size().max(1) as f64,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProbRow {
    pub poi: PoIVector,
    /// Computed from the messages counted in this neighborhood.
    pub user_ratio: f64,
}

impl ProbRow {
    pub fn features(&self) -> FeatureVector {
        FeatureVector {
            probs: self.poi.probs.clone(),
            user_ratio: self.user_ratio,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProbTable {
    pub neighborhood_id: String,
    pub topic_axis: Vec<usize>,
    pub rows: Vec<ProbRow>,
}

/// Table row for an observation, or `None` when no message was counted.
pub fn table_row(
    obs: &GroupObservation,
    topics: &CommunityTopicSummary,
    axis: &[usize],
) -> Option<ProbRow> {
    if obs.messages() == 0 {
        return None;
    }
    Some(ProbRow {
        poi: PoIVector::from_counts(obs.group_id.clone(), obs.topic_counts(topics, axis)),
        user_ratio: obs.user_ratio(),
    })
}

/// One row per group with at least one message from a community member of
/// this neighborhood. Returns the table and the observations behind it.
pub fn build_prob_table(
    groups: &[MessageGroup],
    topics: &CommunityTopicSummary,
    membership: &HashMap<String, usize>,
    author_of: &HashMap<String, String>,
    neighborhood_id: &str,
) -> (ProbTable, Vec<GroupObservation>) {
    let axis = topic_axis(topics);
    let mut rows = Vec::new();
    let mut observations = Vec::new();
    for g in groups {
        let obs = observe_group(g, author_of, membership);
        if let Some(row) = table_row(&obs, topics, &axis) {
            rows.push(row);
            observations.push(obs);
        }
    }
    (
        ProbTable {
            neighborhood_id: neighborhood_id.to_string(),
            topic_axis: axis,
            rows,
        },
        observations,
    )
}

impl ProbTable {
    /// CSV with header `group_id,t<k>...,user_ratio`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("group_id");
        for t in &self.topic_axis {
            let _ = write!(out, ",t{t}");
        }
        out.push_str(",user_ratio\n");
        for row in &self.rows {
            out.push_str(&row.poi.group_id);
            for p in &row.poi.probs {
                let _ = write!(out, ",{p}");
            }
            let _ = writeln!(out, ",{}", row.user_ratio);
        }
        out
    }
}

/// Rows of a table CSV keyed by group id.
pub type TableRows = Vec<(String, FeatureVector)>;

/// Reads a table CSV back as `(topic_axis, rows)`.
pub fn read_table_csv(text: &str) -> Result<(Vec<usize>, TableRows)> {
    let mut lines = text
        .lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty());
    let (_, header) = lines
        .next()
        .ok_or_else(|| Error::invalid("table has no header"))?;
    let cols: Vec<&str> = header.split(',').collect();
    if cols.len() < 2 || cols[0] != "group_id" || cols[cols.len() - 1] != "user_ratio" {
        return Err(Error::Record {
            line: 1,
            message: "expected `group_id,t<k>...,user_ratio`".into(),
        });
    }
    let axis = cols[1..cols.len() - 1]
        .iter()
        .map(|c| c.strip_prefix('t').and_then(|k| k.parse().ok()))
        .collect::<Option<Vec<usize>>>()
        .ok_or(Error::Record {
            line: 1,
            message: "bad topic column".into(),
        })?;
    let mut rows = Vec::new();
    for (i, line) in lines {
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != cols.len() {
            return Err(Error::Record {
                line: i + 1,
                message: format!("expected {} fields, found {}", cols.len(), fields.len()),
            });
        }
        let nums = fields[1..]
            .iter()
            .map(|f| f.trim().parse::<f64>())
            .collect::<std::result::Result<Vec<f64>, _>>()
            .map_err(|e| Error::Record {
                line: i + 1,
                message: e.to_string(),
            })?;
        let (probs, ratio) = nums.split_at(nums.len() - 1);
        rows.push((
            fields[0].to_string(),
            FeatureVector {
                probs: probs.to_vec(),
                user_ratio: ratio[0],
            },
        ));
    }
    Ok((axis, rows))
}

/// CSV with header `group_id,community,messages,authors`.
pub fn observations_to_csv(observations: &[GroupObservation]) -> String {
    let mut out = String::from("group_id,community,messages,authors\n");
    for o in observations {
        for (c, co) in &o.per_community {
            let _ = writeln!(out, "{},{},{},{}", o.group_id, c, co.messages, co.authors);
        }
    }
    out
}
