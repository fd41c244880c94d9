//! Seeded synthetic neighborhoods: planted-partition follow graphs,
//! topic-separated timelines, and benign or spam message campaigns.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::classify::{labels_to_csv, RawLabel};
use crate::error::{Error, Result};
use crate::graph::{Partition, SocialGraph};
use crate::ingest::{message_record, Message};
use crate::seed;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SynthConfig {
    pub n_neighborhoods: usize,
    pub n_communities: usize,
    pub community_size: usize,
    pub p_in: f64,
    pub p_out: f64,
    pub n_topics: usize,
    pub vocab_per_topic: usize,
    pub docs_per_user: usize,
    /// Messages per document.
    pub document_length: usize,
    pub n_benign_groups: usize,
    pub n_spam_groups: usize,
    pub group_size_range: (usize, usize),
    pub spam_vocab: usize,
    pub seed: u64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            n_neighborhoods: 1,
            n_communities: 8,
            community_size: 30,
            p_in: 0.25,
            p_out: 0.01,
            n_topics: 12,
            vocab_per_topic: 200,
            docs_per_user: 2,
            document_length: 20,
            n_benign_groups: 40,
            n_spam_groups: 40,
            group_size_range: (10, 60),
            spam_vocab: 300,
            seed: 0,
        }
    }
}

impl SynthConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::Config(m.to_string()));
        if !(0.0 <= self.p_out && self.p_out < self.p_in && self.p_in <= 1.0) {
            return bad("need 0 <= p_out < p_in <= 1");
        }
        let counts = [
            self.n_neighborhoods,
            self.n_communities,
            self.community_size,
            self.n_topics,
            self.vocab_per_topic,
            self.docs_per_user,
            self.document_length,
            self.spam_vocab,
        ];
        if counts.contains(&0) {
            return bad("all counts must be at least 1");
        }
        let (lo, hi) = self.group_size_range;
        if lo < 2 || lo > hi {
            return bad("group_size_range must satisfy 2 <= min <= max");
        }
        if self.n_benign_groups > 0
            && (self.n_topics <= self.n_communities || self.n_communities < 2)
        {
            return bad(
                "benign groups need at least 2 communities and a topic beyond the primary ones",
            );
        }
        if self.n_spam_groups > 0 && self.n_communities < 2 {
            return bad("spam groups need at least 2 communities");
        }
        Ok(())
    }

    fn user(&self, nbhd: usize, i: usize) -> String {
        format!("n{nbhd:02}-u{i:04}")
    }

    fn users_of(&self, nbhd: usize, community: usize) -> Vec<String> {
        let s = self.community_size;
        (community * s..(community + 1) * s)
            .map(|i| self.user(nbhd, i))
            .collect()
    }
}

pub fn neighborhood_id(index: usize) -> String {
    format!("n{index:02}")
}

fn topic_word(topic: usize, w: usize) -> String {
    format!("t{topic:02}w{w:03}")
}

fn spam_word(w: usize) -> String {
    format!("sp{w:03}")
}

/// Stochastic block model on `n_communities * community_size` users. Every
/// sampled pair is emitted in both directions.
pub fn generate_network(cfg: &SynthConfig, nbhd: usize) -> (SocialGraph, Partition) {
    let mut rng = seed::rng(cfg.seed, &[seed::tag("network"), nbhd as u64]);
    let n = cfg.n_communities * cfg.community_size;
    let users: Vec<String> = (0..n).map(|i| cfg.user(nbhd, i)).collect();
    let mut edges = Vec::new();
    for a in 0..n {
        for b in a + 1..n {
            let p = if a / cfg.community_size == b / cfg.community_size {
                cfg.p_in
            } else {
                cfg.p_out
            };
            if rng.gen::<f64>() < p {
                edges.push((users[a].clone(), users[b].clone()));
                edges.push((users[b].clone(), users[a].clone()));
            }
        }
    }
    let (graph, _) = SocialGraph::from_edges(true, users.iter().cloned(), edges);
    let partition = Partition::new((0..cfg.n_communities).map(|c| cfg.users_of(nbhd, c)));
    (graph, partition)
}

/// Planted topics per community: community `i` gets primary topic
/// `i mod n_topics`; each topic beyond the primaries is shared by a random
/// pair of communities.
pub fn plant_topics(cfg: &SynthConfig, nbhd: usize) -> Vec<Vec<usize>> {
    let mut rng = seed::rng(cfg.seed, &[seed::tag("topics"), nbhd as u64]);
    let mut topics: Vec<Vec<usize>> = (0..cfg.n_communities)
        .map(|c| vec![c % cfg.n_topics])
        .collect();
    if cfg.n_communities >= 2 {
        let mut order: Vec<usize> = (0..cfg.n_communities).collect();
        order.shuffle(&mut rng);
        for (q, t) in (cfg.n_communities..cfg.n_topics).enumerate() {
            let a = order[(2 * q) % order.len()];
            let b = order[(2 * q + 1) % order.len()];
            topics[a].push(t);
            topics[b].push(t);
        }
    }
    topics
}

/// Topics shared by more than one community, with their communities.
pub fn shared_topics(planted: &[Vec<usize>]) -> BTreeMap<usize, Vec<usize>> {
    let mut by_topic: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for (c, ts) in planted.iter().enumerate() {
        for &t in ts {
            by_topic.entry(t).or_default().push(c);
        }
    }
    by_topic.retain(|_, cs| cs.len() >= 2);
    by_topic
}

const FILLER: [&str; 6] = ["the", "and", "of", "to", "is", "in"];

fn background_text(cfg: &SynthConfig, topic: usize, rng: &mut seed::Rng) -> String {
    let n = rng.gen_range(5..=7);
    let mut words: Vec<String> = (0..n)
        .map(|_| topic_word(topic, rng.gen_range(0..cfg.vocab_per_topic)))
        .collect();
    if rng.gen_bool(0.3) {
        let at = rng.gen_range(0..=words.len());
        words.insert(at, FILLER[rng.gen_range(0..FILLER.len())].to_string());
    }
    words.join(" ")
}

/// Background timelines: `docs_per_user * document_length` messages per
/// user, each drawn from one of the community's planted topics (the
/// primary with weight 0.7).
pub fn generate_corpus(cfg: &SynthConfig, nbhd: usize, planted: &[Vec<usize>]) -> Vec<Message> {
    let mut rng = seed::rng(cfg.seed, &[seed::tag("corpus"), nbhd as u64]);
    let per_user = cfg.docs_per_user * cfg.document_length;
    let mut out = Vec::with_capacity(cfg.n_communities * cfg.community_size * per_user);
    for (c, topics) in planted.iter().enumerate() {
        for user in cfg.users_of(nbhd, c) {
            for j in 0..per_user {
                let topic = if topics.len() == 1 || rng.gen_bool(0.7) {
                    topics[0]
                } else {
                    topics[rng.gen_range(1..topics.len())]
                };
                out.push(Message {
                    id: format!("{user}-m{j:04}"),
                    author: user.clone(),
                    timestamp: (j as i64) * 1000 + rng.gen_range(0..1000),
                    text: background_text(cfg, topic, &mut rng),
                    is_repost: false,
                });
            }
        }
    }
    out
}

/// A generated campaign with its planted label.
#[derive(Debug, Clone, PartialEq)]
pub struct PlantedGroup {
    /// Smallest member message id.
    pub group_id: String,
    pub label: RawLabel,
    pub messages: Vec<Message>,
    pub communities: BTreeSet<usize>,
}

impl PlantedGroup {
    pub fn is_spam(&self) -> bool {
        matches!(self.label, RawLabel::Spam | RawLabel::App)
    }

    pub fn authors(&self) -> BTreeSet<&str> {
        self.messages.iter().map(|m| m.author.as_str()).collect()
    }

    pub fn user_ratio(&self) -> f64 {
        self.authors().len() as f64 / self.messages.len() as f64
    }
}

fn campaign_messages(
    cfg: &SynthConfig,
    nbhd: usize,
    index: usize,
    template: &[String],
    extra_vocab: &dyn Fn(&mut seed::Rng) -> String,
    posters: &[String],
    rng: &mut seed::Rng,
) -> Vec<Message> {
    let horizon = (cfg.docs_per_user * cfg.document_length) as i64 * 1000;
    posters
        .iter()
        .enumerate()
        .map(|(k, author)| {
            let mut words = template.to_vec();
            if rng.gen_bool(0.5) {
                words.push(extra_vocab(rng));
            }
            Message {
                id: format!("n{nbhd:02}-c{index:03}-m{k:03}"),
                author: author.clone(),
                timestamp: rng.gen_range(0..horizon.max(1)),
                text: words.join(" "),
                is_repost: rng.gen_bool(0.2),
            }
        })
        .collect()
}

/// Benign groups post topic text from many authors of the communities
/// sharing that topic. Spam groups post unrelated text from one author in
/// each of two to four random communities.
pub fn generate_campaigns(
    cfg: &SynthConfig,
    nbhd: usize,
    planted: &[Vec<usize>],
) -> Vec<PlantedGroup> {
    let mut rng = seed::rng(cfg.seed, &[seed::tag("campaigns"), nbhd as u64]);
    let shared: Vec<(usize, Vec<usize>)> = shared_topics(planted).into_iter().collect();
    let (lo, hi) = cfg.group_size_range;
    let mut out = Vec::new();
    for index in 0..cfg.n_benign_groups + cfg.n_spam_groups {
        let spam = index >= cfg.n_benign_groups;
        let size = rng.gen_range(lo..=hi);
        let tag = format!("tag{nbhd:02}x{index:03}");
        let (template, posters, communities, label, topic) = if spam {
            let m = rng.gen_range(2..=4usize.min(cfg.n_communities));
            let comms: Vec<usize> =
                rand::seq::index::sample(&mut rng, cfg.n_communities, m).into_vec();
            let authors: Vec<String> = comms
                .iter()
                .map(|&c| {
                    cfg.users_of(nbhd, c)
                        .choose(&mut rng)
                        .cloned()
                        .expect("community has users")
                })
                .collect();
            let mut posters: Vec<String> = authors.clone();
            while posters.len() < size {
                posters.push(authors.choose(&mut rng).cloned().expect("authors"));
            }
            let mut template: Vec<String> = (0..8)
                .map(|_| spam_word(rng.gen_range(0..cfg.spam_vocab)))
                .collect();
            template.insert(rng.gen_range(0..=template.len()), tag);
            let label = if rng.gen_bool(0.25) {
                RawLabel::App
            } else {
                RawLabel::Spam
            };
            (
                template,
                posters,
                comms.into_iter().collect::<BTreeSet<_>>(),
                label,
                None,
            )
        } else {
            let (topic, comms) = shared.choose(&mut rng).cloned().expect("shared topic");
            let pool: Vec<String> = comms.iter().flat_map(|&c| cfg.users_of(nbhd, c)).collect();
            let n_authors = rng
                .gen_range((size * 3).div_ceil(5)..=size)
                .min(pool.len())
                .max(comms.len());
            // One author from each sharing community, the rest from the pool.
            let mut authors: Vec<String> = comms
                .iter()
                .map(|&c| {
                    cfg.users_of(nbhd, c)
                        .choose(&mut rng)
                        .cloned()
                        .expect("community has users")
                })
                .collect();
            let mut rest: Vec<String> = pool.into_iter().filter(|u| !authors.contains(u)).collect();
            rest.shuffle(&mut rng);
            authors.extend(rest.into_iter().take(n_authors - authors.len()));
            let mut posters = authors.clone();
            while posters.len() < size {
                posters.push(authors.choose(&mut rng).cloned().expect("authors"));
            }
            let mut template: Vec<String> = (0..8)
                .map(|_| topic_word(topic, rng.gen_range(0..cfg.vocab_per_topic)))
                .collect();
            template.insert(rng.gen_range(0..=template.len()), tag);
            let label = if rng.gen_bool(0.25) {
                RawLabel::Quote
            } else {
                RawLabel::Normal
            };
            (
                template,
                posters,
                comms.into_iter().collect(),
                label,
                Some(topic),
            )
        };
        let extra = |r: &mut seed::Rng| match topic {
            Some(t) => topic_word(t, r.gen_range(0..cfg.vocab_per_topic)),
            None => spam_word(r.gen_range(0..cfg.spam_vocab)),
        };
        let messages = campaign_messages(cfg, nbhd, index, &template, &extra, &posters, &mut rng);
        out.push(PlantedGroup {
            group_id: messages
                .iter()
                .map(|m| m.id.clone())
                .min()
                .expect("non-empty group"),
            label,
            messages,
            communities,
        });
    }
    out
}

#[derive(Debug, Clone)]
pub struct SynthNeighborhood {
    pub id: String,
    pub graph: SocialGraph,
    pub planted: Partition,
    pub planted_topics: Vec<Vec<usize>>,
    pub groups: Vec<PlantedGroup>,
}

#[derive(Debug, Clone)]
pub struct SynthDataset {
    pub config: SynthConfig,
    pub neighborhoods: Vec<SynthNeighborhood>,
    /// Background and campaign messages of every neighborhood.
    pub messages: Vec<Message>,
}

impl SynthDataset {
    pub fn labels(&self) -> BTreeMap<String, RawLabel> {
        self.neighborhoods
            .iter()
            .flat_map(|n| n.groups.iter().map(|g| (g.group_id.clone(), g.label)))
            .collect()
    }
}

pub fn generate(cfg: &SynthConfig) -> Result<SynthDataset> {
    cfg.validate()?;
    let mut neighborhoods = Vec::new();
    let mut messages = Vec::new();
    for nbhd in 0..cfg.n_neighborhoods {
        let (graph, planted) = generate_network(cfg, nbhd);
        let planted_topics = plant_topics(cfg, nbhd);
        messages.extend(generate_corpus(cfg, nbhd, &planted_topics));
        let groups = generate_campaigns(cfg, nbhd, &planted_topics);
        messages.extend(groups.iter().flat_map(|g| g.messages.iter().cloned()));
        neighborhoods.push(SynthNeighborhood {
            id: neighborhood_id(nbhd),
            graph,
            planted,
            planted_topics,
            groups,
        });
    }
    Ok(SynthDataset {
        config: cfg.clone(),
        neighborhoods,
        messages,
    })
}

/// Writes `edges/<id>.tsv`, `timelines.jsonl` and `labels.csv` under `dir`.
pub fn write_dataset(data: &SynthDataset, dir: &Path) -> Result<()> {
    let edges_dir = dir.join("edges");
    fs::create_dir_all(&edges_dir).map_err(|e| Error::io(&edges_dir, e))?;
    for n in &data.neighborhoods {
        let mut text = String::new();
        for (a, b) in n.graph.edges() {
            text.push_str(a);
            text.push('\t');
            text.push_str(b);
            text.push('\n');
        }
        let path = edges_dir.join(format!("{}.tsv", n.id));
        fs::write(&path, text).map_err(|e| Error::io(&path, e))?;
    }
    let mut lines = String::new();
    for m in &data.messages {
        lines.push_str(&message_record(m));
        lines.push('\n');
    }
    let path = dir.join("timelines.jsonl");
    fs::write(&path, lines).map_err(|e| Error::io(&path, e))?;
    let path = dir.join("labels.csv");
    fs::write(&path, labels_to_csv(&data.labels())).map_err(|e| Error::io(&path, e))?;
    Ok(())
}
