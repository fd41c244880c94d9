//! LDA topic model fitted by collapsed Gibbs sampling, document labelling,
//! and per-community topic aggregation.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt::Write as _;

use rand::Rng as _;

use crate::error::{Error, Result};
use crate::ingest::Document;
use crate::seed;

/// Sampler settings.
#[derive(Debug, Clone, PartialEq)]
pub struct LdaConfig {
    pub topics: usize,
    pub iterations: usize,
    pub alpha: f64,
    pub beta: f64,
    pub seed: u64,
}

impl LdaConfig {
    /// `alpha = 50 / K`, `beta = 0.01`, 200 sweeps.
    pub fn new(topics: usize, seed: u64) -> Self {
        LdaConfig {
            topics,
            iterations: 200,
            alpha: 50.0 / topics.max(1) as f64,
            beta: 0.01,
            seed,
        }
    }
}

/// Fitted counts from the final Gibbs sample.
#[derive(Debug, Clone, PartialEq)]
pub struct TopicModel {
    pub config: LdaConfig,
    /// Index to word, sorted.
    pub vocabulary: Vec<String>,
    pub doc_ids: Vec<String>,
    /// Word-major `V x K` counts.
    topic_word: Vec<u32>,
    topic_totals: Vec<u32>,
    /// `N x K` counts.
    doc_topic: Vec<u32>,
}

impl TopicModel {
    pub fn topics(&self) -> usize {
        self.config.topics
    }

    pub fn topic_word_count(&self, topic: usize, word: usize) -> u32 {
        self.topic_word[word * self.config.topics + topic]
    }

    pub fn doc_topic_counts(&self, doc: usize) -> &[u32] {
        let k = self.config.topics;
        &self.doc_topic[doc * k..(doc + 1) * k]
    }

    pub fn topic_totals(&self) -> &[u32] {
        &self.topic_totals
    }

    /// Most frequent words of a topic, most frequent first.
    pub fn top_words(&self, topic: usize, n: usize) -> Vec<&str> {
        let mut words: Vec<(u32, usize)> = (0..self.vocabulary.len())
            .map(|w| (self.topic_word_count(topic, w), w))
            .filter(|&(c, _)| c > 0)
            .collect();
        words.sort_by(|a, b| b.0.cmp(&a.0).then(a.1.cmp(&b.1)));
        words
            .into_iter()
            .take(n)
            .map(|(_, w)| self.vocabulary[w].as_str())
            .collect()
    }

    /// Textual dump: a header with K, V, alpha, beta and seed, then the
    /// vocabulary, document ids and sparse `k,v,count` / `d,k,count` triples.
    pub fn to_dump(&self) -> String {
        let c = &self.config;
        let mut out = format!(
            "lda K={} V={} alpha={} beta={} seed={} iterations={}\n",
            c.topics,
            self.vocabulary.len(),
            c.alpha,
            c.beta,
            c.seed,
            c.iterations
        );
        out.push_str("[vocabulary]\n");
        for (v, w) in self.vocabulary.iter().enumerate() {
            let _ = writeln!(out, "{v},{w}");
        }
        out.push_str("[documents]\n");
        for (d, id) in self.doc_ids.iter().enumerate() {
            let _ = writeln!(out, "{d},{id}");
        }
        out.push_str("[topic_word]\n");
        for k in 0..c.topics {
            for v in 0..self.vocabulary.len() {
                let n = self.topic_word_count(k, v);
                if n > 0 {
                    let _ = writeln!(out, "{k},{v},{n}");
                }
            }
        }
        out.push_str("[doc_topic]\n");
        for d in 0..self.doc_ids.len() {
            for (k, &n) in self.doc_topic_counts(d).iter().enumerate() {
                if n > 0 {
                    let _ = writeln!(out, "{d},{k},{n}");
                }
            }
        }
        out
    }

    pub fn from_dump(text: &str) -> Result<Self> {
        let mut lines = text.lines().enumerate();
        let bad = |line: usize, message: &str| Error::Record {
            line: line + 1,
            message: message.to_string(),
        };
        let (_, header) = lines.next().ok_or_else(|| bad(0, "missing header"))?;
        let fields: HashMap<&str, &str> = header
            .split_whitespace()
            .skip(1)
            .filter_map(|kv| kv.split_once('='))
            .collect();
        let get = |key: &str| {
            fields
                .get(key)
                .copied()
                .ok_or_else(|| bad(0, &format!("header lacks {key}")))
        };
        let parse_err = |_| bad(0, "bad header value");
        let config = LdaConfig {
            topics: get("K")?.parse().map_err(parse_err)?,
            iterations: get("iterations")?.parse().map_err(parse_err)?,
            alpha: get("alpha")?.parse().map_err(|_| bad(0, "bad alpha"))?,
            beta: get("beta")?.parse().map_err(|_| bad(0, "bad beta"))?,
            seed: get("seed")?.parse().map_err(parse_err)?,
        };
        let v_count: usize = get("V")?.parse().map_err(parse_err)?;
        let k = config.topics;
        let mut section = "";
        let mut vocabulary = Vec::new();
        let mut doc_ids = Vec::new();
        let mut tw_triples = Vec::new();
        let mut dt_triples = Vec::new();
        for (i, line) in lines {
            if line.starts_with('[') {
                section = line;
                continue;
            }
            match section {
                "[vocabulary]" => vocabulary.push(
                    line.split_once(',')
                        .ok_or_else(|| bad(i, "bad vocabulary row"))?
                        .1
                        .to_string(),
                ),
                "[documents]" => doc_ids.push(
                    line.split_once(',')
                        .ok_or_else(|| bad(i, "bad document row"))?
                        .1
                        .to_string(),
                ),
                "[topic_word]" | "[doc_topic]" => {
                    let nums: Vec<usize> = line
                        .split(',')
                        .map(str::parse)
                        .collect::<std::result::Result<_, _>>()
                        .map_err(|_| bad(i, "bad count triple"))?;
                    if nums.len() != 3 {
                        return Err(bad(i, "bad count triple"));
                    }
                    if section == "[topic_word]" {
                        tw_triples.push((nums[0], nums[1], nums[2]));
                    } else {
                        dt_triples.push((nums[0], nums[1], nums[2]));
                    }
                }
                _ => return Err(bad(i, "row outside a section")),
            }
        }
        if vocabulary.len() != v_count {
            return Err(bad(0, "vocabulary size does not match header"));
        }
        let mut topic_word = vec![0u32; v_count * k];
        let mut topic_totals = vec![0u32; k];
        for (t, v, n) in tw_triples {
            if t >= k || v >= v_count {
                return Err(Error::invalid("topic-word index out of range"));
            }
            topic_word[v * k + t] = n as u32;
            topic_totals[t] += n as u32;
        }
        let mut doc_topic = vec![0u32; doc_ids.len() * k];
        for (d, t, n) in dt_triples {
            if t >= k || d >= doc_ids.len() {
                return Err(Error::invalid("doc-topic index out of range"));
            }
            doc_topic[d * k + t] = n as u32;
        }
        Ok(TopicModel {
            config,
            vocabulary,
            doc_ids,
            topic_word,
            topic_totals,
            doc_topic,
        })
    }
}

/// Collapsed Gibbs sampler state. [`fit_lda`] drives it for the configured
/// number of sweeps; tests step it one sweep at a time.
pub struct GibbsSampler {
    config: LdaConfig,
    vocabulary: Vec<String>,
    doc_ids: Vec<String>,
    /// Word index per token, per document.
    docs: Vec<Vec<u32>>,
    assignments: Vec<Vec<u16>>,
    topic_word: Vec<u32>,
    topic_totals: Vec<u32>,
    doc_topic: Vec<u32>,
    rng: seed::Rng,
    scratch: Vec<f64>,
    sweeps: usize,
}

impl GibbsSampler {
    pub fn new(corpus: &[Document], config: LdaConfig) -> Result<Self> {
        let k = config.topics;
        if k == 0 {
            return Err(Error::invalid("topic count must be at least 1"));
        }
        if k > u16::MAX as usize {
            return Err(Error::invalid("topic count too large"));
        }
        if !(config.alpha > 0.0 && config.beta > 0.0) {
            return Err(Error::invalid("alpha and beta must be positive"));
        }
        if corpus.is_empty() {
            return Err(Error::invalid("corpus is empty"));
        }
        let words: BTreeSet<String> = corpus
            .iter()
            .flat_map(|d| d.tokens.iter().map(|t| t.to_string()))
            .collect();
        if words.is_empty() {
            return Err(Error::EmptyVocabulary);
        }
        if let Some(d) = corpus.iter().find(|d| d.tokens.is_empty()) {
            return Err(Error::invalid(format!(
                "document {} has no tokens",
                d.doc_id
            )));
        }
        let vocabulary: Vec<String> = words.into_iter().collect();
        let index: HashMap<&str, u32> = vocabulary
            .iter()
            .enumerate()
            .map(|(i, w)| (w.as_str(), i as u32))
            .collect();
        let docs: Vec<Vec<u32>> = corpus
            .iter()
            .map(|d| {
                d.tokens
                    .iter()
                    .map(|t| index[t.to_string().as_str()])
                    .collect()
            })
            .collect();

        let v = vocabulary.len();
        let mut rng = seed::rng(config.seed, &[0x1da]);
        let mut topic_word = vec![0u32; v * k];
        let mut topic_totals = vec![0u32; k];
        let mut doc_topic = vec![0u32; docs.len() * k];
        let assignments: Vec<Vec<u16>> = docs
            .iter()
            .enumerate()
            .map(|(d, words)| {
                words
                    .iter()
                    .map(|&w| {
                        let t = rng.gen_range(0..k);
                        topic_word[w as usize * k + t] += 1;
                        topic_totals[t] += 1;
                        doc_topic[d * k + t] += 1;
                        t as u16
                    })
                    .collect()
            })
            .collect();
        Ok(GibbsSampler {
            doc_ids: corpus.iter().map(|d| d.doc_id.clone()).collect(),
            config,
            vocabulary,
            docs,
            assignments,
            topic_word,
            topic_totals,
            doc_topic,
            rng,
            scratch: vec![0.0; k],
            sweeps: 0,
        })
    }

    pub fn vocabulary_len(&self) -> usize {
        self.vocabulary.len()
    }

    pub fn sweeps(&self) -> usize {
        self.sweeps
    }

    pub fn doc_len(&self, d: usize) -> usize {
        self.docs[d].len()
    }

    pub fn doc_topic_counts(&self, d: usize) -> &[u32] {
        let k = self.config.topics;
        &self.doc_topic[d * k..(d + 1) * k]
    }

    pub fn topic_word_count(&self, topic: usize, word: usize) -> u32 {
        self.topic_word[word * self.config.topics + topic]
    }

    pub fn topic_totals(&self) -> &[u32] {
        &self.topic_totals
    }

    pub fn token_count(&self) -> usize {
        self.docs.iter().map(Vec::len).sum()
    }

    /// Normalized full conditional for token `pos` of document `d`, computed
    /// with that token's own assignment removed:
    /// `p(k) ∝ (n_dk + α)(n_kw + β) / (n_k + Vβ)`.
    pub fn conditional(&self, d: usize, pos: usize) -> Vec<f64> {
        let k = self.config.topics;
        let w = self.docs[d][pos] as usize;
        let own = self.assignments[d][pos] as usize;
        let vbeta = self.vocabulary.len() as f64 * self.config.beta;
        let mut p: Vec<f64> = (0..k)
            .map(|t| {
                let minus = u32::from(t == own) as f64;
                (self.doc_topic[d * k + t] as f64 - minus + self.config.alpha)
                    * (self.topic_word[w * k + t] as f64 - minus + self.config.beta)
                    / (self.topic_totals[t] as f64 - minus + vbeta)
            })
            .collect();
        let z: f64 = p.iter().sum();
        p.iter_mut().for_each(|x| *x /= z);
        p
    }

    /// One full pass resampling every token.
    pub fn sweep(&mut self) {
        let k = self.config.topics;
        let (alpha, beta) = (self.config.alpha, self.config.beta);
        let vbeta = self.vocabulary.len() as f64 * beta;
        let mut inv_total: Vec<f64> = self
            .topic_totals
            .iter()
            .map(|&n| 1.0 / (n as f64 + vbeta))
            .collect();
        for d in 0..self.docs.len() {
            let dt = &mut self.doc_topic[d * k..(d + 1) * k];
            for (pos, &w) in self.docs[d].iter().enumerate() {
                let w = w as usize;
                let old = self.assignments[d][pos] as usize;
                let tw = &mut self.topic_word[w * k..(w + 1) * k];
                dt[old] -= 1;
                tw[old] -= 1;
                self.topic_totals[old] -= 1;
                inv_total[old] = 1.0 / (self.topic_totals[old] as f64 + vbeta);

                let mut cumulative = 0.0;
                for t in 0..k {
                    cumulative += (dt[t] as f64 + alpha) * (tw[t] as f64 + beta) * inv_total[t];
                    self.scratch[t] = cumulative;
                }
                let u = self.rng.gen::<f64>() * cumulative;
                let new = self.scratch.partition_point(|&c| c <= u).min(k - 1);

                dt[new] += 1;
                tw[new] += 1;
                self.topic_totals[new] += 1;
                inv_total[new] = 1.0 / (self.topic_totals[new] as f64 + vbeta);
                self.assignments[d][pos] = new as u16;
            }
        }
        self.sweeps += 1;
    }

    pub fn into_model(self) -> TopicModel {
        TopicModel {
            config: self.config,
            vocabulary: self.vocabulary,
            doc_ids: self.doc_ids,
            topic_word: self.topic_word,
            topic_totals: self.topic_totals,
            doc_topic: self.doc_topic,
        }
    }
}

/// Runs the collapsed Gibbs sampler for `config.iterations` sweeps and keeps
/// the final sample's counts.
pub fn fit_lda(corpus: &[Document], config: LdaConfig) -> Result<TopicModel> {
    let mut sampler = GibbsSampler::new(corpus, config)?;
    for _ in 0..sampler.config.iterations {
        sampler.sweep();
    }
    Ok(sampler.into_model())
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct DocTopicLabel {
    pub doc_id: String,
    pub topic: usize,
}

/// Labels each document with `argmax_k (n_dk + alpha)`; ties go to the lower
/// topic index.
pub fn label_documents(model: &TopicModel) -> Vec<DocTopicLabel> {
    (0..model.doc_ids.len())
        .map(|d| DocTopicLabel {
            doc_id: model.doc_ids[d].clone(),
            topic: argmax_smoothed(model.doc_topic_counts(d), model.config.alpha),
        })
        .collect()
}

fn argmax_smoothed(counts: &[u32], alpha: f64) -> usize {
    let mut best = 0;
    for (k, &c) in counts.iter().enumerate().skip(1) {
        if c as f64 + alpha > counts[best] as f64 + alpha {
            best = k;
        }
    }
    best
}

pub fn labels_to_csv(labels: &[DocTopicLabel]) -> String {
    let mut out = String::from("doc_id,topic\n");
    for l in labels {
        let _ = writeln!(out, "{},{}", l.doc_id, l.topic);
    }
    out
}

pub fn labels_from_csv(text: &str) -> Result<Vec<DocTopicLabel>> {
    text.lines()
        .enumerate()
        .skip(1)
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, line)| {
            let (doc, topic) = line.rsplit_once(',').ok_or(Error::Record {
                line: i + 1,
                message: "expected `doc_id,topic`".into(),
            })?;
            Ok(DocTopicLabel {
                doc_id: doc.to_string(),
                topic: topic.trim().parse().map_err(|_| Error::Record {
                    line: i + 1,
                    message: format!("bad topic {topic:?}"),
                })?,
            })
        })
        .collect()
}

/// Topic labels of a community's documents.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct CommunityTopics {
    pub community_id: usize,
    /// Topic to number of member documents carrying it.
    pub topic_multiset: BTreeMap<usize, usize>,
}

impl CommunityTopics {
    pub fn unique_topics(&self) -> BTreeSet<usize> {
        self.topic_multiset.keys().copied().collect()
    }

    pub fn document_count(&self) -> usize {
        self.topic_multiset.values().sum()
    }
}

#[derive(Debug, Clone, Default)]
pub struct CommunityTopicSummary {
    pub communities: BTreeMap<usize, CommunityTopics>,
    /// Documents whose owner belongs to no community.
    pub unassigned: Vec<String>,
}

/// Groups document labels by the owner's community.
pub fn community_topics(
    labels: &[DocTopicLabel],
    membership: &HashMap<String, usize>,
    doc_owner: &HashMap<String, String>,
) -> CommunityTopicSummary {
    let mut out = CommunityTopicSummary::default();
    for label in labels {
        let community = doc_owner.get(&label.doc_id).and_then(|u| membership.get(u));
        match community {
            Some(&c) => {
                let entry = out.communities.entry(c).or_insert_with(|| CommunityTopics {
                    community_id: c,
                    ..Default::default()
                });
                *entry.topic_multiset.entry(label.topic).or_insert(0) += 1;
            }
            None => out.unassigned.push(label.doc_id.clone()),
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::{Token, TokenList};
    use proptest::prelude::*;
    use rand::seq::SliceRandom;

    fn doc(id: &str, words: &[&str]) -> Document {
        Document {
            doc_id: id.into(),
            user: id.split('#').next().unwrap().into(),
            tokens: words.iter().map(|w| Token::word(*w)).collect::<TokenList>(),
            source_message_ids: vec![],
        }
    }

    /// Documents drawn from two disjoint-vocabulary topics; returns the
    /// corpus and each document's planted topic.
    fn planted(seed: u64, n_docs: usize) -> (Vec<Document>, Vec<usize>) {
        let mut rng = seed::rng(seed, &[]);
        let vocab: [Vec<String>; 2] = [
            (0..30).map(|i| format!("alpha{i}")).collect(),
            (0..30).map(|i| format!("beta{i}")).collect(),
        ];
        let mut docs = Vec::new();
        let mut truth = Vec::new();
        for d in 0..n_docs {
            let t = d % 2;
            let words: Vec<&str> = (0..40)
                .map(|_| vocab[t].choose(&mut rng).unwrap().as_str())
                .collect();
            docs.push(doc(&format!("u{d}#0"), &words));
            truth.push(t);
        }
        (docs, truth)
    }

    fn purity(labels: &[DocTopicLabel], truth: &[usize], k: usize) -> f64 {
        // Best one-to-one mapping of planted to fitted topics, by brute force.
        let fitted: Vec<usize> = labels.iter().map(|l| l.topic).collect();
        let mut best = 0;
        for a in 0..k {
            for b in 0..k {
                if a == b {
                    continue;
                }
                let hits = fitted
                    .iter()
                    .zip(truth)
                    .filter(|(&f, &t)| (t == 0 && f == a) || (t == 1 && f == b))
                    .count();
                best = best.max(hits);
            }
        }
        best as f64 / truth.len() as f64
    }

    #[test]
    fn single_topic_takes_every_token() {
        let (docs, _) = planted(1, 6);
        let model = fit_lda(
            &docs,
            LdaConfig {
                iterations: 5,
                ..LdaConfig::new(1, 3)
            },
        )
        .unwrap();
        for (d, doc) in docs.iter().enumerate() {
            assert_eq!(model.doc_topic_counts(d), &[doc.tokens.len() as u32]);
        }
        assert!(label_documents(&model).iter().all(|l| l.topic == 0));
    }

    #[test]
    fn planted_topics_are_recovered() {
        for seed in 0..3 {
            let (docs, truth) = planted(seed, 40);
            let mut cfg = LdaConfig::new(2, seed);
            cfg.iterations = 100;
            let model = fit_lda(&docs, cfg).unwrap();
            let p = purity(&label_documents(&model), &truth, 2);
            assert!(p >= 0.9, "seed {seed}: purity {p}");
        }
    }

    #[test]
    fn fitting_is_deterministic() {
        let (docs, _) = planted(5, 20);
        let cfg = LdaConfig {
            iterations: 20,
            ..LdaConfig::new(3, 9)
        };
        assert_eq!(
            fit_lda(&docs, cfg.clone()).unwrap(),
            fit_lda(&docs, cfg).unwrap()
        );
    }

    #[test]
    fn empty_inputs_are_rejected() {
        assert!(matches!(
            GibbsSampler::new(&[doc("u#0", &[])], LdaConfig::new(2, 0)),
            Err(Error::EmptyVocabulary)
        ));
        assert!(GibbsSampler::new(&[], LdaConfig::new(2, 0)).is_err());
        assert!(GibbsSampler::new(&[doc("u#0", &["a"])], LdaConfig::new(0, 0)).is_err());
        assert!(
            GibbsSampler::new(&[doc("u#0", &["a"]), doc("v#0", &[])], LdaConfig::new(2, 0))
                .is_err()
        );
    }

    #[test]
    fn counts_are_conserved_every_sweep() {
        let (docs, _) = planted(2, 12);
        let mut s = GibbsSampler::new(&docs, LdaConfig::new(4, 1)).unwrap();
        let total = s.token_count();
        for _ in 0..10 {
            s.sweep();
            for d in 0..docs.len() {
                assert_eq!(
                    s.doc_topic_counts(d).iter().sum::<u32>() as usize,
                    s.doc_len(d)
                );
            }
            let tw: u32 = (0..4)
                .flat_map(|k| (0..s.vocabulary_len()).map(move |v| (k, v)))
                .map(|(k, v)| s.topic_word_count(k, v))
                .sum();
            assert_eq!(tw as usize, total);
            assert_eq!(s.topic_totals().iter().sum::<u32>() as usize, total);
            let p = s.conditional(3, 5);
            assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
            assert!(p.iter().all(|&x| x >= 0.0));
        }
    }

    fn model_with_counts(rows: &[&[u32]], alpha: f64) -> TopicModel {
        let k = rows[0].len();
        TopicModel {
            config: LdaConfig {
                alpha,
                ..LdaConfig::new(k, 0)
            },
            vocabulary: vec![],
            doc_ids: (0..rows.len()).map(|d| format!("d{d}")).collect(),
            topic_word: vec![],
            topic_totals: vec![0; k],
            doc_topic: rows.concat(),
        }
    }

    #[test]
    fn argmax_label_and_tie_rule() {
        let m = model_with_counts(&[&[90, 10], &[5, 5], &[1, 7]], 25.0);
        let topics: Vec<usize> = label_documents(&m).into_iter().map(|l| l.topic).collect();
        assert_eq!(topics, vec![0, 0, 1]);
    }

    #[test]
    fn community_topics_multiset() {
        let labels = vec![
            DocTopicLabel {
                doc_id: "a#0".into(),
                topic: 1,
            },
            DocTopicLabel {
                doc_id: "a#1".into(),
                topic: 1,
            },
            DocTopicLabel {
                doc_id: "b#0".into(),
                topic: 2,
            },
            DocTopicLabel {
                doc_id: "z#0".into(),
                topic: 3,
            },
        ];
        let membership: HashMap<String, usize> =
            [("a".to_string(), 0), ("b".to_string(), 0)].into();
        let owners: HashMap<String, String> = labels
            .iter()
            .map(|l| (l.doc_id.clone(), l.doc_id[..1].to_string()))
            .collect();
        let summary = community_topics(&labels, &membership, &owners);
        let c0 = &summary.communities[&0];
        assert_eq!(c0.topic_multiset, BTreeMap::from([(1, 2), (2, 1)]));
        assert_eq!(c0.unique_topics(), BTreeSet::from([1, 2]));
        assert_eq!(c0.document_count(), 3);
        assert_eq!(summary.unassigned, vec!["z#0".to_string()]);
        assert!(community_topics(&[], &membership, &owners)
            .communities
            .is_empty());
    }

    #[test]
    fn dump_round_trip() {
        let (docs, _) = planted(4, 6);
        let model = fit_lda(
            &docs,
            LdaConfig {
                iterations: 3,
                ..LdaConfig::new(3, 2)
            },
        )
        .unwrap();
        let back = TopicModel::from_dump(&model.to_dump()).unwrap();
        assert_eq!(back, model);
    }

    #[test]
    fn labels_csv_round_trip() {
        let labels = vec![DocTopicLabel {
            doc_id: "u,1#0".into(),
            topic: 4,
        }];
        assert_eq!(labels_from_csv(&labels_to_csv(&labels)).unwrap(), labels);
    }

    proptest! {
        #[test]
        fn labels_invariant_to_alpha_scale(rows in proptest::collection::vec(proptest::collection::vec(0u32..20, 4), 1..10), alpha in 0.01f64..10.0, scale in 0.1f64..100.0) {
            let refs: Vec<&[u32]> = rows.iter().map(Vec::as_slice).collect();
            let a = label_documents(&model_with_counts(&refs, alpha));
            let b = label_documents(&model_with_counts(&refs, alpha * scale));
            prop_assert_eq!(a, b);
        }
    }
}
