//! End-to-end run over a data directory: graphs, communities, topics,
//! message groups, PoI tables and classification, one neighborhood at a
//! time, with every intermediate written to the output directory.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt::Write as _;
use std::fs;
use std::io::BufReader;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::classify::{
    apply_combination, balance, cross_validate, label_accounts, read_labels, train, AccountCounts,
    ClassifierKind, Combination, CvConfig, EvalReport, Metrics, RawLabel, DEFAULT_K_NEIGHBORS,
};
use crate::error::{Error, Result};
use crate::evalmetrics::{contingency, homogeneity_completeness_v, NeighborhoodScores};
use crate::graph::{
    build_graphs, detect_communities, k_core, null_partition, read_edge_list, Method, Partition,
};
use crate::grouping::{group_similar, groups_from_csv, groups_to_csv, GroupInput, MessageGroup};
use crate::ingest::{
    build_documents, parse_timelines, Document, StopWords, Timeline, TokenMode, Tokenizer,
    DEFAULT_PER_USER_CAP,
};
use crate::poi::{build_prob_table, observations_to_csv};
use crate::seed;
use crate::simulate::LabeledTable;
use crate::topics::{
    community_topics, fit_lda, label_documents, labels_from_csv, labels_to_csv,
    CommunityTopicSummary, DocTopicLabel, LdaConfig,
};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    /// Directory of `<neighborhood>.tsv` edge lists.
    pub edges: PathBuf,
    pub timelines: PathBuf,
    pub labels: PathBuf,
    pub output: PathBuf,
    pub stopwords: Option<PathBuf>,
    /// Neighborhood ids to process; empty means all.
    pub neighborhoods: Vec<String>,
    pub per_user_cap: usize,
    pub document_length: usize,
    pub k_core: usize,
    pub method: String,
    pub topics: usize,
    pub lda_iterations: usize,
    /// Defaults to `50 / topics`.
    pub alpha: Option<f64>,
    pub beta: f64,
    pub combination: u8,
    pub classifier: String,
    pub folds: usize,
    pub smote_k: usize,
    /// Minimum spam and benign rows for a neighborhood to be evaluated.
    pub min_class_rows: usize,
    pub tau: f64,
    pub seed: u64,
    /// Worker threads; 0 lets the runtime decide.
    pub workers: usize,
    /// Reuse partitions, document labels and groups from a previous run
    /// with the same configuration.
    pub resume: bool,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            edges: PathBuf::from("edges"),
            timelines: PathBuf::from("timelines.jsonl"),
            labels: PathBuf::from("labels.csv"),
            output: PathBuf::from("out"),
            stopwords: None,
            neighborhoods: Vec::new(),
            per_user_cap: DEFAULT_PER_USER_CAP,
            document_length: 20,
            k_core: 2,
            method: "map-equation".into(),
            topics: 20,
            lda_iterations: 200,
            alpha: None,
            beta: 0.01,
            combination: 3,
            classifier: "linear-svm".into(),
            folds: 10,
            smote_k: DEFAULT_K_NEIGHBORS,
            min_class_rows: 10,
            tau: 0.4,
            seed: 0,
            workers: 0,
            resume: false,
        }
    }
}

impl PipelineConfig {
    /// Edge, timeline and label paths under one data directory.
    pub fn for_data_dir(data: &Path, output: &Path) -> Self {
        let stopwords = data.join("stopwords.txt");
        PipelineConfig {
            edges: data.join("edges"),
            timelines: data.join("timelines.jsonl"),
            labels: data.join("labels.csv"),
            output: output.to_path_buf(),
            stopwords: stopwords.exists().then_some(stopwords),
            ..Default::default()
        }
    }

    pub fn method(&self) -> Result<Method> {
        self.method.parse()
    }

    pub fn classifier(&self) -> Result<ClassifierKind> {
        self.classifier.parse()
    }

    pub fn combination(&self) -> Result<Combination> {
        Combination::from_index(self.combination)
    }

    pub fn cv_config(&self) -> Result<CvConfig> {
        Ok(CvConfig {
            folds: self.folds,
            kind: self.classifier()?,
            smote_k: self.smote_k,
            seed: self.seed,
        })
    }

    pub fn lda_config(&self, seed: u64) -> LdaConfig {
        let mut c = LdaConfig::new(self.topics, seed);
        c.iterations = self.lda_iterations;
        if let Some(a) = self.alpha {
            c.alpha = a;
        }
        c.beta = self.beta;
        c
    }

    pub fn validate(&self) -> Result<()> {
        self.method()?;
        self.classifier()?;
        self.combination()?;
        let bad = |m: String| Err(Error::Config(m));
        if self.topics == 0 {
            return bad("topics must be at least 1".into());
        }
        if self.document_length == 0 {
            return bad("document_length must be at least 1".into());
        }
        if self.per_user_cap == 0 {
            return bad("per_user_cap must be at least 1".into());
        }
        if self.folds < 2 {
            return bad("folds must be at least 2".into());
        }
        if self.smote_k == 0 {
            return bad("smote_k must be at least 1".into());
        }
        if !(0.0..=1.0).contains(&self.tau) {
            return bad(format!("tau must lie in [0, 1], got {}", self.tau));
        }
        if self.beta <= 0.0 || self.alpha.is_some_and(|a| a <= 0.0) {
            return bad("alpha and beta must be positive".into());
        }
        for (name, path) in [
            ("edges", &self.edges),
            ("timelines", &self.timelines),
            ("labels", &self.labels),
        ] {
            if !path.exists() {
                return bad(format!("{name} input {} does not exist", path.display()));
            }
        }
        if let Some(p) = &self.stopwords {
            if !p.exists() {
                return bad(format!("stopwords file {} does not exist", p.display()));
            }
        }
        Ok(())
    }

    /// Digest of every setting except the paths, used to decide whether
    /// persisted intermediates may be reused.
    fn digest(&self) -> String {
        let mut c = self.clone();
        c.output = PathBuf::new();
        c.resume = false;
        c.workers = 0;
        sha256_hex(
            serde_json::to_string(&c)
                .expect("config serializes")
                .as_bytes(),
        )
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

fn read_to_string(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

fn write(path: &Path, text: &str) -> Result<()> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

/// Neighborhood ids, from the edge-list file stems, sorted.
pub fn list_neighborhoods(edges_dir: &Path) -> Result<Vec<String>> {
    let entries = fs::read_dir(edges_dir).map_err(|e| Error::io(edges_dir, e))?;
    let mut ids = Vec::new();
    for entry in entries {
        let path = entry.map_err(|e| Error::io(edges_dir, e))?.path();
        if path.extension().is_some_and(|e| e == "tsv") {
            if let Some(stem) = path.file_stem().and_then(|s| s.to_str()) {
                ids.push(stem.to_string());
            }
        }
    }
    ids.sort();
    Ok(ids)
}

#[derive(Debug, Clone, Serialize, PartialEq)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Evaluated,
    Skipped,
    Failed,
}

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct NeighborhoodReport {
    pub id: String,
    pub status: Status,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reason: Option<String>,
    pub vertices: usize,
    pub edges: usize,
    pub core_vertices: usize,
    pub communities: usize,
    pub documents: usize,
    pub unassigned_documents: usize,
    pub table_rows: usize,
    /// Group messages whose author has no community here.
    pub uncounted_messages: u64,
    /// Communities whose members produced no documents.
    pub communities_without_topics: usize,
    pub spam_rows: usize,
    pub benign_rows: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub evaluation: Option<EvalReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub spam_accounts: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub h1: Option<NeighborhoodScores>,
}

impl NeighborhoodReport {
    fn new(id: &str) -> Self {
        NeighborhoodReport {
            id: id.to_string(),
            status: Status::Failed,
            reason: None,
            vertices: 0,
            edges: 0,
            core_vertices: 0,
            communities: 0,
            documents: 0,
            unassigned_documents: 0,
            table_rows: 0,
            uncounted_messages: 0,
            communities_without_topics: 0,
            spam_rows: 0,
            benign_rows: 0,
            evaluation: None,
            spam_accounts: None,
            h1: None,
        }
    }
}

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct InputSummary {
    pub messages: usize,
    pub users: usize,
    pub malformed_records: usize,
    pub duplicate_records: usize,
    pub truncated_messages: usize,
    pub groups: usize,
    pub labels: usize,
}

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct RunReport {
    pub seed: u64,
    pub combination: u8,
    pub classifier: String,
    pub folds: usize,
    pub inputs: InputSummary,
    pub neighborhoods: Vec<NeighborhoodReport>,
    pub evaluated: usize,
    /// Unweighted mean over evaluated neighborhoods.
    pub average: Metrics,
}

/// In-memory results of a run, for experiments that build on it.
#[derive(Debug, Clone)]
pub struct PipelineRun {
    pub report: RunReport,
    /// Labelled observations of every evaluated neighborhood.
    pub tables: Vec<LabeledTable>,
    /// Actual and null scores of every neighborhood with documents.
    pub h1: Vec<NeighborhoodScores>,
}

struct Shared<'a> {
    cfg: &'a PipelineConfig,
    method: Method,
    combination: Combination,
    cv: CvConfig,
    timelines: &'a BTreeMap<String, Timeline>,
    groups: &'a [MessageGroup],
    author_of: &'a HashMap<String, String>,
    labels: &'a BTreeMap<String, RawLabel>,
    topic_tokenizer: Tokenizer,
    reuse: bool,
}

struct Outcome {
    report: NeighborhoodReport,
    table: Option<LabeledTable>,
}

fn community_topics_csv(summary: &CommunityTopicSummary) -> String {
    let mut out = String::from("community,topic,documents\n");
    for (c, ct) in &summary.communities {
        for (t, n) in &ct.topic_multiset {
            let _ = writeln!(out, "{c},{t},{n}");
        }
    }
    out
}

/// Homogeneity and friends for the actual communities and for a
/// size-preserving random regrouping of the same documents.
fn h1_scores(
    id: &str,
    assigned: &BTreeMap<String, usize>,
    labels: &BTreeMap<String, usize>,
    seed: u64,
) -> Result<NeighborhoodScores> {
    let actual = homogeneity_completeness_v(&contingency(assigned, labels)?);
    let mut sizes: BTreeMap<usize, usize> = BTreeMap::new();
    for c in assigned.values() {
        *sizes.entry(*c).or_insert(0) += 1;
    }
    let docs: Vec<&String> = assigned.keys().collect();
    let size_list: Vec<usize> = sizes.values().copied().collect();
    let null_groups = null_partition(&size_list, &docs, seed)?;
    let null_membership: BTreeMap<String, usize> = null_groups
        .iter()
        .enumerate()
        .flat_map(|(g, ds)| ds.iter().map(move |d| ((*d).clone(), g)))
        .collect();
    let null = homogeneity_completeness_v(&contingency(&null_membership, labels)?);
    Ok(NeighborhoodScores {
        neighborhood_id: id.to_string(),
        actual,
        null,
    })
}

fn process(sh: &Shared<'_>, id: &str) -> Outcome {
    let mut report = NeighborhoodReport::new(id);
    match process_inner(sh, id, &mut report) {
        Ok(table) => Outcome { report, table },
        Err(e) => {
            report.status = Status::Failed;
            report.reason = Some(e.to_string());
            Outcome {
                report,
                table: None,
            }
        }
    }
}

fn process_inner(
    sh: &Shared<'_>,
    id: &str,
    report: &mut NeighborhoodReport,
) -> Result<Option<LabeledTable>> {
    let cfg = sh.cfg;
    let dir = cfg.output.join("nbhd").join(id);
    let nseed = |stage: &str| seed::derive(cfg.seed, &[seed::tag(stage), seed::tag(id)]);

    let edge_path = cfg.edges.join(format!("{id}.tsv"));
    let file = fs::File::open(&edge_path).map_err(|e| Error::io(&edge_path, e))?;
    let graphs = build_graphs(read_edge_list(BufReader::new(file))?);
    report.vertices = graphs.directed.vertex_count();
    report.edges = graphs.directed.edge_count();
    let core = k_core(&graphs.directed, cfg.k_core);
    report.core_vertices = core.vertex_count();

    let partition_path = dir.join("partition.csv");
    let partition = if sh.reuse && partition_path.exists() {
        Partition::from_csv(&read_to_string(&partition_path)?)?
    } else {
        let p = detect_communities(&core, sh.method, nseed("detect"))?;
        write(&partition_path, &p.to_csv())?;
        p
    };
    report.communities = partition.len();
    let membership = partition.membership();

    // Documents of every neighborhood user, including those outside the core.
    let mut docs: Vec<Document> = Vec::new();
    for user in graphs.directed.vertices() {
        if let Some(t) = sh.timelines.get(user) {
            docs.extend(
                build_documents(t, cfg.document_length, &sh.topic_tokenizer)?
                    .into_iter()
                    .filter(|d| !d.tokens.is_empty()),
            );
        }
    }
    report.documents = docs.len();
    let labels_path = dir.join("doc_topics.csv");
    let doc_labels: Vec<DocTopicLabel> = if sh.reuse && labels_path.exists() {
        labels_from_csv(&read_to_string(&labels_path)?)?
    } else {
        let model = fit_lda(&docs, cfg.lda_config(nseed("lda")))?;
        let labels = label_documents(&model);
        write(&dir.join("model.txt"), &model.to_dump())?;
        write(&labels_path, &labels_to_csv(&labels))?;
        labels
    };
    let doc_owner: HashMap<String, String> = docs
        .iter()
        .map(|d| (d.doc_id.clone(), d.user.clone()))
        .collect();
    let summary = community_topics(&doc_labels, &membership, &doc_owner);
    report.unassigned_documents = summary.unassigned.len();
    report.communities_without_topics = partition.len() - summary.communities.len();
    write(
        &dir.join("community_topics.csv"),
        &community_topics_csv(&summary),
    )?;

    let assigned: BTreeMap<String, usize> = doc_labels
        .iter()
        .filter_map(|l| {
            doc_owner
                .get(&l.doc_id)
                .and_then(|u| membership.get(u))
                .map(|&c| (l.doc_id.clone(), c))
        })
        .collect();
    if !assigned.is_empty() {
        let topic_of: BTreeMap<String, usize> = doc_labels
            .iter()
            .filter(|l| assigned.contains_key(&l.doc_id))
            .map(|l| (l.doc_id.clone(), l.topic))
            .collect();
        report.h1 = Some(h1_scores(id, &assigned, &topic_of, nseed("null"))?);
    }

    let (table, observations) =
        build_prob_table(sh.groups, &summary, &membership, sh.author_of, id);
    write(&dir.join("prob_table.csv"), &table.to_csv())?;
    write(
        &dir.join("observations.csv"),
        &observations_to_csv(&observations),
    )?;
    report.table_rows = table.rows.len();
    let group_by_id: HashMap<&str, &MessageGroup> =
        sh.groups.iter().map(|g| (g.group_id.as_str(), g)).collect();
    report.uncounted_messages = sh
        .groups
        .iter()
        .map(|g| {
            g.message_ids
                .iter()
                .filter(|m| {
                    sh.author_of.get(*m).is_some_and(|a| {
                        graphs.directed.vertex_index(a).is_some() && !membership.contains_key(a)
                    })
                })
                .count() as u64
        })
        .sum();

    let mut labeled = LabeledTable {
        name: id.to_string(),
        communities: (0..partition.len()).collect(),
        topics: summary,
        axis: table.topic_axis.clone(),
        observations: Vec::new(),
        labels: Vec::new(),
    };
    for obs in &observations {
        if let Some(spam) = sh
            .labels
            .get(&obs.group_id)
            .and_then(|&l| apply_combination(l, sh.combination))
        {
            labeled.observations.push(obs.clone());
            labeled.labels.push(spam);
        }
    }
    let data = labeled.dataset();
    let (spam, benign) = data.class_counts();
    report.spam_rows = spam;
    report.benign_rows = benign;
    let needed = cfg.min_class_rows.max(cfg.folds);
    if spam < needed || benign < needed {
        report.status = Status::Skipped;
        report.reason = Some(format!("fewer than {needed} spam or benign rows"));
        return Ok(None);
    }
    let eval = cross_validate(
        &data,
        &CvConfig {
            seed: nseed("cv"),
            ..sh.cv.clone()
        },
    )?;
    report.evaluation = Some(eval);

    // Account labels from a model trained on every labelled row and applied
    // to every row of the table.
    let balanced = balance(&data, cfg.smote_k, nseed("final-smote"))?;
    let model = train(&balanced.x, &balanced.y, sh.cv.kind, nseed("final-train"))?;
    let mut counts: BTreeMap<String, AccountCounts> = BTreeMap::new();
    for user in graphs.directed.vertices() {
        let total = sh
            .timelines
            .get(user)
            .map_or(0, |t| t.messages.len() as u64);
        counts.insert(user.clone(), AccountCounts { spam: 0, total });
    }
    for (row, obs) in table.rows.iter().zip(&observations) {
        if model.predict(&row.features().to_vec())? {
            for m in &group_by_id[obs.group_id.as_str()].message_ids {
                if let Some(c) = sh.author_of.get(m).and_then(|a| counts.get_mut(a)) {
                    c.spam += 1;
                }
            }
        }
    }
    let accounts = label_accounts(&counts, cfg.tau)?;
    let mut csv = String::from("user_id,spam_messages,total_messages,spam\n");
    for (u, spam) in &accounts {
        let c = counts[u];
        let _ = writeln!(csv, "{u},{},{},{}", c.spam, c.total, u8::from(*spam));
    }
    write(&dir.join("accounts.csv"), &csv)?;
    report.spam_accounts = Some(accounts.values().filter(|&&s| s).count());
    report.status = Status::Evaluated;
    Ok(Some(labeled))
}

fn collect_files(dir: &Path, out: &mut Vec<PathBuf>) -> Result<()> {
    let mut entries: Vec<PathBuf> = fs::read_dir(dir)
        .map_err(|e| Error::io(dir, e))?
        .map(|e| e.map(|e| e.path()).map_err(|err| Error::io(dir, err)))
        .collect::<Result<_>>()?;
    entries.sort();
    for p in entries {
        if p.is_dir() {
            collect_files(&p, out)?;
        } else {
            out.push(p);
        }
    }
    Ok(())
}

fn digest_file(path: &Path) -> Result<String> {
    Ok(sha256_hex(&fs::read(path).map_err(|e| Error::io(path, e))?))
}

#[derive(Debug, Serialize, Deserialize)]
struct Manifest {
    version: String,
    seed: u64,
    config_digest: String,
    config: PipelineConfig,
    inputs: BTreeMap<String, String>,
    outputs: BTreeMap<String, String>,
}

fn previous_config_digest(output: &Path) -> Option<String> {
    let text = fs::read_to_string(output.join("manifest.json")).ok()?;
    let m: Manifest = serde_json::from_str(&text).ok()?;
    Some(m.config_digest)
}

/// Runs every stage for every selected neighborhood and writes the
/// intermediates, `report.json` and `manifest.json` under `cfg.output`.
/// A failing neighborhood is recorded in the report and does not stop the
/// others.
pub fn run_pipeline(cfg: &PipelineConfig) -> Result<PipelineRun> {
    cfg.validate()?;
    fs::create_dir_all(&cfg.output).map_err(|e| Error::io(&cfg.output, e))?;
    let reuse =
        cfg.resume && previous_config_digest(&cfg.output).as_deref() == Some(cfg.digest().as_str());

    let stopwords = match &cfg.stopwords {
        Some(p) => StopWords::from_lines(&read_to_string(p)?),
        None => StopWords::english(),
    };
    let file = fs::File::open(&cfg.timelines).map_err(|e| Error::io(&cfg.timelines, e))?;
    let parsed = parse_timelines(BufReader::new(file), cfg.per_user_cap)?;
    let labels = read_labels(&read_to_string(&cfg.labels)?)?;

    let mut author_of: HashMap<String, String> = HashMap::new();
    for t in parsed.timelines.values() {
        for m in &t.messages {
            if let Some(prev) = author_of.insert(m.id.clone(), m.author.clone()) {
                return Err(Error::invalid(format!(
                    "message id {} used by both {prev} and {}",
                    m.id, m.author
                )));
            }
        }
    }

    let groups_path = cfg.output.join("groups.csv");
    let groups = if reuse && groups_path.exists() {
        groups_from_csv(&read_to_string(&groups_path)?, &author_of)?
    } else {
        let grouping = Tokenizer::new(stopwords.clone(), TokenMode::Grouping);
        let tokenized: Vec<(&str, &str, crate::ingest::TokenList)> = parsed
            .timelines
            .values()
            .flat_map(|t| t.messages.iter())
            .map(|m| (m.id.as_str(), m.author.as_str(), grouping.tokenize(&m.text)))
            .collect();
        let inputs: Vec<GroupInput<'_>> = tokenized
            .iter()
            .map(|(id, author, tokens)| GroupInput {
                message_id: id,
                author,
                tokens,
            })
            .collect();
        let g = group_similar(&inputs)?;
        write(&groups_path, &groups_to_csv(&g))?;
        g
    };

    let mut ids = list_neighborhoods(&cfg.edges)?;
    if !cfg.neighborhoods.is_empty() {
        let wanted: BTreeSet<&String> = cfg.neighborhoods.iter().collect();
        if let Some(missing) = wanted.iter().find(|w| !ids.contains(w)) {
            return Err(Error::Config(format!(
                "no edge list for neighborhood {missing}"
            )));
        }
        ids.retain(|i| wanted.contains(i));
    }

    let shared = Shared {
        cfg,
        method: cfg.method()?,
        combination: cfg.combination()?,
        cv: cfg.cv_config()?,
        timelines: &parsed.timelines,
        groups: &groups,
        author_of: &author_of,
        labels: &labels,
        topic_tokenizer: Tokenizer::new(stopwords, TokenMode::Topic),
        reuse,
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.workers)
        .build()
        .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
    let outcomes: Vec<Outcome> =
        pool.install(|| ids.par_iter().map(|id| process(&shared, id)).collect());

    let evaluated: Vec<Metrics> = outcomes
        .iter()
        .filter_map(|o| o.report.evaluation.as_ref().map(|e| e.mean))
        .collect();
    let report = RunReport {
        seed: cfg.seed,
        combination: cfg.combination,
        classifier: cfg.classifier.clone(),
        folds: cfg.folds,
        inputs: InputSummary {
            messages: parsed.message_count(),
            users: parsed.timelines.len(),
            malformed_records: parsed.errors.len(),
            duplicate_records: parsed.duplicates,
            truncated_messages: parsed.truncated,
            groups: groups.len(),
            labels: labels.len(),
        },
        evaluated: evaluated.len(),
        average: Metrics::mean(&evaluated),
        neighborhoods: outcomes.iter().map(|o| o.report.clone()).collect(),
    };
    let mut report_json = serde_json::to_string_pretty(&report).expect("report serializes");
    report_json.push('\n');
    write(&cfg.output.join("report.json"), &report_json)?;

    let h1: Vec<NeighborhoodScores> = outcomes
        .iter()
        .filter_map(|o| o.report.h1.clone())
        .collect();
    let tables: Vec<LabeledTable> = outcomes.into_iter().filter_map(|o| o.table).collect();
    write_manifest(cfg, &ids)?;
    Ok(PipelineRun { report, tables, h1 })
}

fn write_manifest(cfg: &PipelineConfig, ids: &[String]) -> Result<()> {
    let mut inputs = BTreeMap::new();
    inputs.insert(
        cfg.timelines.display().to_string(),
        digest_file(&cfg.timelines)?,
    );
    inputs.insert(cfg.labels.display().to_string(), digest_file(&cfg.labels)?);
    if let Some(p) = &cfg.stopwords {
        inputs.insert(p.display().to_string(), digest_file(p)?);
    }
    for id in ids {
        let p = cfg.edges.join(format!("{id}.tsv"));
        inputs.insert(p.display().to_string(), digest_file(&p)?);
    }
    let mut files = Vec::new();
    collect_files(&cfg.output, &mut files)?;
    let mut outputs = BTreeMap::new();
    for f in files {
        let rel = f.strip_prefix(&cfg.output).unwrap_or(&f);
        if rel == Path::new("manifest.json") {
            continue;
        }
        outputs.insert(rel.display().to_string(), digest_file(&f)?);
    }
    let manifest = Manifest {
        version: env!("CARGO_PKG_VERSION").to_string(),
        seed: cfg.seed,
        config_digest: cfg.digest(),
        config: cfg.clone(),
        inputs,
        outputs,
    };
    let mut text = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    text.push('\n');
    write(&cfg.output.join("manifest.json"), &text)
}
