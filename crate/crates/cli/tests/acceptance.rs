//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero when any criterion fails.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::{Duration, Instant};

use poi_core::evalmetrics::{compare_to_null, homogeneity_completeness_v, Contingency};
use poi_core::graph::{
    detect_communities, map_equation_codelength, FlowNetwork, MapEquation, Method, Partition,
    SocialGraph, TeleportModel,
};
use poi_core::grouping::{group_similar, GroupInput, MessageGroup, WINDOW};
use poi_core::ingest::{Document, Token, TokenList};
use poi_core::pipeline::{run_pipeline, PipelineConfig, PipelineRun};
use poi_core::poi::build_prob_table;
use poi_core::seed;
use poi_core::simulate::{
    default_fractions, non_decreasing_within, non_increasing_within, run_early_detection,
    run_evasion, run_poisoning,
};
use poi_core::synth::{generate, write_dataset, SynthConfig};
use poi_core::topics::{community_topics, DocTopicLabel, GibbsSampler, LdaConfig};
use rand::Rng;

type Outcome = Result<String, String>;

fn check(cond: bool, detail: String) -> Outcome {
    if cond {
        Ok(detail)
    } else {
        Err(detail)
    }
}

// 1 ------------------------------------------------------------------------

fn worked_example() -> Outcome {
    let comm_topics = [(0, vec![1, 2]), (1, vec![1, 3]), (2, vec![1, 4, 5])];
    let mut labels = Vec::new();
    let mut owners = HashMap::new();
    let mut membership = HashMap::new();
    for (c, topics) in &comm_topics {
        let user = format!("owner{c}");
        membership.insert(user.clone(), *c);
        for (i, &t) in topics.iter().enumerate() {
            let doc = format!("{user}#{i}");
            owners.insert(doc.clone(), user.clone());
            labels.push(DocTopicLabel {
                doc_id: doc,
                topic: t,
            });
        }
    }
    for (u, c) in [("u1", 0), ("u2", 0), ("u3", 1)] {
        membership.insert(u.to_string(), c);
    }
    let summary = community_topics(&labels, &membership, &owners);
    let author_of: HashMap<String, String> = [("m1", "u1"), ("m2", "u2"), ("m3", "u3")]
        .into_iter()
        .map(|(m, u)| (m.to_string(), u.to_string()))
        .collect();
    let group = MessageGroup {
        group_id: "m1".into(),
        message_ids: author_of.keys().cloned().collect(),
        authors: author_of.values().cloned().collect(),
    };
    let (table, obs) = build_prob_table(&[group], &summary, &membership, &author_of, "example");
    let counts = obs[0].topic_counts(&summary, &table.topic_axis);
    let probs = &table.rows[0].poi.probs;
    let ok = table.topic_axis == [1, 2, 3, 4, 5]
        && counts == [3, 2, 1, 0, 0]
        && probs == &[3.0 / 6.0, 2.0 / 6.0, 1.0 / 6.0, 0.0, 0.0];
    check(ok, format!("counts {counts:?} probs {probs:?}"))
}

// 2 ------------------------------------------------------------------------

fn contains_window(hay: &[Token], needle: &[Token]) -> bool {
    !needle.is_empty()
        && hay.len() >= needle.len()
        && hay.windows(needle.len()).any(|w| w == needle)
}

fn linked(a: &[Token], b: &[Token]) -> bool {
    if a.is_empty() || b.is_empty() {
        return false;
    }
    if a.len() < WINDOW || b.len() < WINDOW {
        return (a.len() < WINDOW && contains_window(b, a))
            || (b.len() < WINDOW && contains_window(a, b));
    }
    a.windows(WINDOW).any(|w| contains_window(b, w))
}

/// Pairwise linking followed by transitive closure through repeated
/// label propagation.
fn brute_groups(ids: &[String], authors: &[String], tokens: &[TokenList]) -> Vec<MessageGroup> {
    let n = ids.len();
    let mut adj = vec![Vec::new(); n];
    for i in 0..n {
        for j in i + 1..n {
            if linked(tokens[i].as_slice(), tokens[j].as_slice()) {
                adj[i].push(j);
                adj[j].push(i);
            }
        }
    }
    let mut label: Vec<usize> = (0..n).collect();
    loop {
        let mut changed = false;
        for i in 0..n {
            for &j in &adj[i] {
                if label[j] < label[i] {
                    label[i] = label[j];
                    changed = true;
                }
            }
        }
        if !changed {
            break;
        }
    }
    let mut comps: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for (i, &l) in label.iter().enumerate() {
        comps.entry(l).or_default().push(i);
    }
    let mut out: Vec<MessageGroup> = comps
        .into_values()
        .filter(|m| m.len() >= 2)
        .map(|m| {
            let message_ids: BTreeSet<String> = m.iter().map(|&i| ids[i].clone()).collect();
            MessageGroup {
                group_id: message_ids.iter().next().unwrap().clone(),
                authors: m.iter().map(|&i| authors[i].clone()).collect(),
                message_ids,
            }
        })
        .collect();
    out.sort();
    out
}

fn grouping_oracle() -> Outcome {
    let (mut total_groups, mut largest) = (0, 0);
    for corpus in 0..50u64 {
        let mut rng = seed::rng(7, &[seed::tag("grouping"), corpus]);
        let n = rng.gen_range(1..=2000);
        let vocab = rng.gen_range(4..400);
        let ids: Vec<String> = (0..n)
            .map(|i| format!("m{:05}", (i * 7919) % 100_000))
            .collect();
        let authors: Vec<String> = (0..n)
            .map(|_| format!("u{}", rng.gen_range(0..60)))
            .collect();
        let word = |rng: &mut seed::Rng| match rng.gen_range(0..vocab) {
            0 => Token::url("http://x.example/a"),
            w => Token::word(format!("w{w}")),
        };
        let mut tokens: Vec<TokenList> = Vec::with_capacity(n);
        for i in 0..n {
            // Near-duplicates: an edited copy of an earlier message.
            let t: Vec<Token> = if i > 0 && rng.gen_bool(0.4) {
                let mut t = tokens[rng.gen_range(0..i)].0.clone();
                match rng.gen_range(0..3) {
                    0 if !t.is_empty() => {
                        let k = rng.gen_range(0..t.len());
                        t[k] = word(&mut rng);
                    }
                    1 if !t.is_empty() => {
                        let k = rng.gen_range(0..t.len());
                        t.truncate(k.max(1));
                    }
                    _ => t.push(word(&mut rng)),
                }
                t
            } else {
                let len = rng.gen_range(0..12);
                (0..len).map(|_| word(&mut rng)).collect()
            };
            tokens.push(TokenList(t));
        }
        let inputs: Vec<GroupInput<'_>> = (0..n)
            .map(|i| GroupInput {
                message_id: &ids[i],
                author: &authors[i],
                tokens: &tokens[i],
            })
            .collect();
        let got = group_similar(&inputs).map_err(|e| e.to_string())?;
        let want = brute_groups(&ids, &authors, &tokens);
        if got != want {
            return Err(format!(
                "corpus {corpus} (n={n}): {} groups vs oracle {}",
                got.len(),
                want.len()
            ));
        }
        total_groups += got.len();
        largest = largest.max(got.iter().map(MessageGroup::size).max().unwrap_or(0));
    }
    Ok(format!(
        "50 corpora identical, {total_groups} groups, largest {largest} messages"
    ))
}

// 3 ------------------------------------------------------------------------

/// Scores from the mutual information `I(C;T)` and marginal entropies.
fn brute_v(counts: &[Vec<u64>]) -> (f64, f64, f64) {
    let n: u64 = counts.iter().flatten().sum();
    if n == 0 {
        return (1.0, 1.0, 1.0);
    }
    let nf = n as f64;
    let rows: Vec<f64> = counts
        .iter()
        .map(|r| r.iter().sum::<u64>() as f64 / nf)
        .collect();
    let cols: Vec<f64> = (0..counts[0].len())
        .map(|j| counts.iter().map(|r| r[j]).sum::<u64>() as f64 / nf)
        .collect();
    let ent = |p: &[f64]| {
        -p.iter()
            .filter(|&&x| x > 0.0)
            .map(|&x| x * x.ln())
            .sum::<f64>()
    };
    let mut mi = 0.0;
    for (i, r) in counts.iter().enumerate() {
        for (j, &v) in r.iter().enumerate() {
            if v > 0 {
                let p = v as f64 / nf;
                mi += p * (p / (rows[i] * cols[j])).ln();
            }
        }
    }
    let (hc, ht) = (ent(&rows), ent(&cols));
    let h = if hc == 0.0 {
        1.0
    } else {
        (mi / hc).clamp(0.0, 1.0)
    };
    let c = if ht == 0.0 {
        1.0
    } else {
        (mi / ht).clamp(0.0, 1.0)
    };
    let v = if h + c == 0.0 {
        0.0
    } else {
        2.0 * h * c / (h + c)
    };
    (h, c, v)
}

fn v_measure() -> Outcome {
    let mut worst: f64 = 0.0;
    for t in 0..1000u64 {
        let mut rng = seed::rng(11, &[seed::tag("vmeasure"), t]);
        let r = rng.gen_range(1..7);
        let c = rng.gen_range(1..7);
        let mut counts: Vec<Vec<u64>> = (0..r)
            .map(|_| {
                (0..c)
                    .map(|_| {
                        if rng.gen_bool(0.4) {
                            0
                        } else {
                            rng.gen_range(0..30)
                        }
                    })
                    .collect()
            })
            .collect();
        if rng.gen_bool(0.2) {
            let row = rng.gen_range(0..r);
            counts[row].iter_mut().for_each(|v| *v = 0);
        }
        if rng.gen_bool(0.2) {
            let col = rng.gen_range(0..c);
            counts.iter_mut().for_each(|row| row[col] = 0);
        }
        let table = Contingency::from_counts(counts.clone());
        let s = homogeneity_completeness_v(&table);
        let (h, cc, v) = brute_v(&counts);
        worst = worst
            .max((s.homogeneity - h).abs())
            .max((s.completeness - cc).abs())
            .max((s.v_measure - v).abs());
        let swapped = homogeneity_completeness_v(&table.transpose());
        if swapped.homogeneity != s.completeness || swapped.completeness != s.homogeneity {
            return Err(format!("role swap broken on table {t}"));
        }
    }
    check(
        worst <= 1e-12,
        format!("max deviation {worst:.2e} over 1000 tables, role swap exact"),
    )
}

// 4 ------------------------------------------------------------------------

fn graph_of(directed: bool, n: usize, edges: &[(usize, usize)]) -> SocialGraph {
    let name = |i: usize| format!("v{i:03}");
    SocialGraph::from_edges(
        directed,
        (0..n).map(name),
        edges.iter().map(|&(a, b)| (name(a), name(b))),
    )
    .0
}

fn clique_pair(a: usize, b: usize) -> (SocialGraph, Partition) {
    let mut edges = Vec::new();
    for (lo, hi) in [(0, a), (a, a + b)] {
        for i in lo..hi {
            for j in i + 1..hi {
                edges.push((i, j));
            }
        }
    }
    edges.push((a - 1, a));
    let g = graph_of(false, a + b, &edges);
    let name = |i: usize| format!("v{i:03}");
    let p = Partition::new([
        (0..a).map(name).collect::<Vec<_>>(),
        (a..a + b).map(name).collect(),
    ]);
    (g, p)
}

fn map_equation() -> Outcome {
    let mut worst_entropy: f64 = 0.0;
    let mut moves = 0usize;
    for t in 0..20u64 {
        let mut rng = seed::rng(5, &[seed::tag("mapeq"), t]);
        let n = rng.gen_range(5..30);
        let edges: Vec<(usize, usize)> = (0..3 * n)
            .map(|_| (rng.gen_range(0..n), rng.gen_range(0..n)))
            .filter(|(a, b)| a != b)
            .collect();
        for directed in [false, true] {
            let g = graph_of(directed, n, &edges);
            let one =
                map_equation_codelength(&g, &Partition::single(&g)).map_err(|e| e.to_string())?;
            let net =
                FlowNetwork::from_graph(&g, TeleportModel::default()).map_err(|e| e.to_string())?;
            worst_entropy = worst_entropy.max((one - net.visit_entropy()).abs());
            let mut trace = Vec::new();
            MapEquation::default().trial(&net, t, Some(&mut trace));
            let mut last = net.codelength(&(0..n).collect::<Vec<_>>());
            for step in &trace {
                let l = net.codelength(step);
                if l >= last {
                    return Err(format!(
                        "graph {t} directed={directed}: accepted move {last} -> {l}"
                    ));
                }
                last = l;
                moves += 1;
            }
        }
    }
    if worst_entropy > 1e-9 {
        return Err(format!(
            "one-module codelength off visit entropy by {worst_entropy:.2e}"
        ));
    }
    for t in 0..20u64 {
        let a = 4 + (t as usize % 5);
        let b = 4 + (t as usize * 3 % 6);
        let (g, cliques) = clique_pair(a, b);
        let split = map_equation_codelength(&g, &cliques).map_err(|e| e.to_string())?;
        let one = map_equation_codelength(&g, &Partition::single(&g)).map_err(|e| e.to_string())?;
        if split >= one {
            return Err(format!(
                "graph {t}: clique codelength {split} not below one-module {one}"
            ));
        }
        let found = detect_communities(&g, Method::MapEquation, t).map_err(|e| e.to_string())?;
        let as_sets = |p: &Partition| p.communities().iter().cloned().collect::<BTreeSet<_>>();
        if as_sets(&found) != as_sets(&cliques) {
            return Err(format!(
                "graph {t}: detected {} modules, not the cliques",
                found.len()
            ));
        }
    }
    Ok(format!("entropy identity within {worst_entropy:.1e}, {moves} accepted moves all decreasing, 20/20 clique pairs recovered"))
}

// 5 ------------------------------------------------------------------------

fn planted_corpus(seed_value: u64) -> (Vec<Document>, Vec<usize>) {
    let mut rng = seed::rng(seed_value, &[seed::tag("planted")]);
    let mut docs = Vec::new();
    let mut truth = Vec::new();
    for d in 0..40 {
        let topic = d % 2;
        let tokens: TokenList = (0..30)
            .map(|_| Token::word(format!("t{topic}w{}", rng.gen_range(0..15))))
            .collect();
        docs.push(Document {
            doc_id: format!("d{d:02}"),
            user: format!("u{d:02}"),
            tokens,
            source_message_ids: vec![format!("m{d:02}")],
        });
        truth.push(topic);
    }
    (docs, truth)
}

fn lda() -> Outcome {
    let start = Instant::now();
    let mut purities = Vec::new();
    for s in 0..5u64 {
        let (docs, truth) = planted_corpus(s);
        let cfg = LdaConfig::new(2, s);
        let mut sampler = GibbsSampler::new(&docs, cfg).map_err(|e| e.to_string())?;
        let tokens = sampler.token_count() as u64;
        for sweep in 0..200 {
            sampler.sweep();
            let v = sampler.vocabulary_len();
            let totals = sampler.topic_totals().to_vec();
            let ok_docs = (0..docs.len()).all(|d| {
                sampler
                    .doc_topic_counts(d)
                    .iter()
                    .map(|&c| c as usize)
                    .sum::<usize>()
                    == sampler.doc_len(d)
            });
            let ok_topics = (0..2).all(|k| {
                (0..v)
                    .map(|w| sampler.topic_word_count(k, w) as u64)
                    .sum::<u64>()
                    == totals[k] as u64
            });
            let ok_total = totals.iter().map(|&c| c as u64).sum::<u64>() == tokens;
            if !(ok_docs && ok_topics && ok_total) {
                return Err(format!(
                    "seed {s}: count invariant broken after sweep {sweep}"
                ));
            }
        }
        let model = sampler.into_model();
        let label: Vec<usize> = (0..docs.len())
            .map(|d| {
                let c = model.doc_topic_counts(d);
                if c[1] > c[0] {
                    1
                } else {
                    0
                }
            })
            .collect();
        let same = label.iter().zip(&truth).filter(|(a, b)| a == b).count();
        purities.push(same.max(docs.len() - same) as f64 / docs.len() as f64);
    }
    let elapsed = start.elapsed();
    let min = purities.iter().copied().fold(1.0, f64::min);
    check(
        min >= 0.9 && elapsed < Duration::from_secs(10),
        format!("purity {purities:?} in {elapsed:.1?}"),
    )
}

// 6-9 ----------------------------------------------------------------------

fn pipeline_on(cfg: &SynthConfig, dir: &Path) -> Result<(PipelineConfig, PipelineRun), String> {
    let data = generate(cfg).map_err(|e| e.to_string())?;
    write_dataset(&data, dir).map_err(|e| e.to_string())?;
    let pcfg = PipelineConfig::for_data_dir(dir, &dir.join("out"));
    let run = run_pipeline(&pcfg).map_err(|e| e.to_string())?;
    Ok((pcfg, run))
}

fn h1(run: &PipelineRun, elapsed: Duration) -> Outcome {
    let report = compare_to_null(run.h1.clone()).map_err(|e| e.to_string())?;
    let p = report.homogeneity_test.and_then(|t| t.p_value());
    let ok = report.neighborhoods.len() >= 20
        && report.mean_actual.homogeneity > report.mean_null.homogeneity
        && p.is_some_and(|p| p < 0.01)
        && elapsed < Duration::from_secs(120);
    check(
        ok,
        format!(
            "{} neighborhoods, h {:.3} vs null {:.3}, test {:?}, {elapsed:.1?}",
            report.neighborhoods.len(),
            report.mean_actual.homogeneity,
            report.mean_null.homogeneity,
            report.homogeneity_test
        ),
    )
}

fn h2(root: &Path) -> Outcome {
    let start = Instant::now();
    let (mut p, mut r) = (Vec::new(), Vec::new());
    for s in 0..10u64 {
        let dir = root.join(format!("h2-{s}"));
        let (_, run) = pipeline_on(
            &SynthConfig {
                seed: s,
                ..Default::default()
            },
            &dir,
        )?;
        if run.report.evaluated == 0 {
            return Err(format!("seed {s}: no neighborhood evaluated"));
        }
        p.push(run.report.average.precision);
        r.push(run.report.average.recall);
    }
    let elapsed = start.elapsed();
    let (mp, mr) = (p.iter().sum::<f64>() / 10.0, r.iter().sum::<f64>() / 10.0);
    check(
        mp >= 0.85 && mr >= 0.85 && elapsed < Duration::from_secs(120),
        format!("precision {mp:.3} recall {mr:.3} over 10 seeds, {elapsed:.1?}"),
    )
}

fn early(pcfg: &PipelineConfig, run: &PipelineRun) -> Outcome {
    let start = Instant::now();
    let cv = pcfg.cv_config().map_err(|e| e.to_string())?;
    let fractions: Vec<f64> = default_fractions()[1..].to_vec();
    let curve = run_early_detection(&run.tables, &fractions, 3, &cv).map_err(|e| e.to_string())?;
    let summary = curve.summary();
    let series = |f: fn(&poi_core::classify::Metrics) -> f64| {
        summary.iter().map(|(_, m)| f(m)).collect::<Vec<_>>()
    };
    let (acc, prec, rec, f1) = (
        series(|m| m.accuracy),
        series(|m| m.precision),
        series(|m| m.recall),
        series(|m| m.f1),
    );
    let monotone = [&acc, &prec, &rec, &f1]
        .iter()
        .all(|s| non_decreasing_within(s, 0.05));
    let at02 = summary
        .iter()
        .find(|(f, _)| (f - 0.2).abs() < 1e-9)
        .map(|(_, m)| *m)
        .ok_or("fraction 0.2 missing")?;
    let elapsed = start.elapsed();
    check(
        monotone && at02.precision >= 0.8 && at02.recall >= 0.6 && elapsed < Duration::from_secs(300),
        format!(
            "at 0.2 precision {:.3} recall {:.3}; recall curve {:?}; monotone {monotone}; {elapsed:.1?}",
            at02.precision,
            at02.recall,
            rec.iter().map(|v| (v * 1000.0).round() / 1000.0).collect::<Vec<_>>()
        ),
    )
}

fn attacks(pcfg: &PipelineConfig, run: &PipelineRun) -> Outcome {
    let start = Instant::now();
    let cv = pcfg.cv_config().map_err(|e| e.to_string())?;
    let (mut poison, mut evade) = (Vec::new(), Vec::new());
    for f in default_fractions() {
        poison.push(
            run_poisoning(&run.tables, f, 3, &cv)
                .map_err(|e| e.to_string())?
                .mean
                .f1,
        );
        evade.push(
            run_evasion(&run.tables, f, 3, &cv)
                .map_err(|e| e.to_string())?
                .mean
                .f1,
        );
    }
    let round = |v: &[f64]| {
        v.iter()
            .map(|x| (x * 1000.0).round() / 1000.0)
            .collect::<Vec<_>>()
    };
    let elapsed = start.elapsed();
    let ok = poison[3] >= 0.7
        && evade[10] < poison[10]
        && non_increasing_within(&poison, 0.05)
        && non_increasing_within(&evade, 0.05)
        && elapsed < Duration::from_secs(600);
    check(
        ok,
        format!(
            "poisoning F1 {:?}; evasion F1 {:?}; {elapsed:.1?}",
            round(&poison),
            round(&evade)
        ),
    )
}

// 10-11 --------------------------------------------------------------------

fn poi_bin() -> PathBuf {
    PathBuf::from(env!("CARGO_BIN_EXE_poi"))
}

fn cli(args: &[&str]) -> Result<(), String> {
    let out = Command::new(poi_bin())
        .args(args)
        .output()
        .map_err(|e| e.to_string())?;
    if out.status.success() {
        Ok(())
    } else {
        Err(format!(
            "poi {}: {}",
            args.join(" "),
            String::from_utf8_lossy(&out.stderr).trim()
        ))
    }
}

fn tree(root: &Path) -> BTreeMap<PathBuf, Vec<u8>> {
    fn walk(root: &Path, dir: &Path, out: &mut BTreeMap<PathBuf, Vec<u8>>) {
        for e in std::fs::read_dir(dir).unwrap() {
            let p = e.unwrap().path();
            if p.is_dir() {
                walk(root, &p, out);
            } else {
                out.insert(
                    p.strip_prefix(root).unwrap().to_path_buf(),
                    std::fs::read(&p).unwrap(),
                );
            }
        }
    }
    let mut out = BTreeMap::new();
    walk(root, root, &mut out);
    out
}

fn determinism(root: &Path) -> Outcome {
    let mut trees = Vec::new();
    let base = root.join("det");
    for _ in 0..2 {
        let _ = std::fs::remove_dir_all(&base);
        let data = base.join("data");
        let out = base.join("out");
        let (d, o) = (data.to_str().unwrap(), out.to_str().unwrap());
        cli(&["synth", "--out", d, "--neighborhoods", "2", "--seed", "3"])?;
        cli(&["run", "--data", d, "--out", o, "--seed", "3"])?;
        cli(&[
            "validate-h1",
            "--data",
            d,
            "--out",
            o,
            "--seed",
            "3",
            "--resume",
        ])?;
        cli(&[
            "simulate-early",
            "--data",
            d,
            "--out",
            o,
            "--seed",
            "3",
            "--reps",
            "1",
            "--fractions",
            "0.2,0.6,1.0",
            "--resume",
        ])?;
        cli(&[
            "simulate-attack",
            "--data",
            d,
            "--out",
            o,
            "--seed",
            "3",
            "--reps",
            "1",
            "--kind",
            "poisoning",
            "--fraction",
            "0.3",
            "--resume",
        ])?;
        cli(&[
            "simulate-attack",
            "--data",
            d,
            "--out",
            o,
            "--seed",
            "3",
            "--reps",
            "1",
            "--kind",
            "evasion",
            "--fraction",
            "0.3",
            "--resume",
        ])?;
        trees.push(tree(&base));
    }
    let differing: Vec<_> = trees[0]
        .iter()
        .filter(|(k, v)| trees[1].get(*k) != Some(v))
        .map(|(k, _)| k.display().to_string())
        .collect();
    check(
        differing.is_empty() && trees[0].len() == trees[1].len(),
        format!(
            "{} files compared, differing: {differing:?}",
            trees[0].len()
        ),
    )
}

fn performance(root: &Path) -> Outcome {
    let data = root.join("perf/data");
    let out = root.join("perf/out");
    let (d, o) = (data.to_str().unwrap(), out.to_str().unwrap());
    cli(&[
        "synth",
        "--out",
        d,
        "--neighborhoods",
        "20",
        "--community-size",
        "32",
        "--docs-per-user",
        "1",
    ])?;
    let timelines =
        std::fs::read_to_string(data.join("timelines.jsonl")).map_err(|e| e.to_string())?;
    let messages = timelines.lines().count();
    let users: BTreeSet<&str> = timelines
        .lines()
        .filter_map(|l| {
            l.split("\"user\":\"")
                .nth(1)
                .and_then(|s| s.split('"').next())
        })
        .collect();
    let start = Instant::now();
    cli(&["run", "--data", d, "--out", o])?;
    let elapsed = start.elapsed();
    check(
        messages >= 100_000 && users.len() >= 5_000 && elapsed < Duration::from_secs(300),
        format!(
            "{messages} messages, {} users, full run {elapsed:.1?}",
            users.len()
        ),
    )
}

fn main() {
    let root = tempfile::tempdir().expect("temp dir");
    let mut results: Vec<(u8, &str, Outcome)> = vec![
        (1, "worked example", worked_example()),
        (2, "grouping oracle", grouping_oracle()),
        (3, "v-measure", v_measure()),
        (4, "map equation", map_equation()),
        (5, "lda", lda()),
    ];

    let start = Instant::now();
    let shared = pipeline_on(
        &SynthConfig {
            n_neighborhoods: 20,
            ..Default::default()
        },
        &root.path().join("shared"),
    );
    let elapsed = start.elapsed();
    match &shared {
        Ok((pcfg, run)) => {
            results.push((6, "h1 analog", h1(run, elapsed)));
            results.push((7, "h2 analog", h2(root.path())));
            results.push((8, "early detection", early(pcfg, run)));
            results.push((9, "attacks", attacks(pcfg, run)));
        }
        Err(e) => {
            for (n, name) in [(6, "h1 analog"), (8, "early detection"), (9, "attacks")] {
                results.push((n, name, Err(format!("pipeline failed: {e}"))));
            }
            results.push((7, "h2 analog", h2(root.path())));
        }
    }
    results.push((10, "determinism", determinism(root.path())));
    results.push((11, "performance", performance(root.path())));
    results.sort_by_key(|r| r.0);

    let mut failed = 0;
    for (n, name, outcome) in &results {
        match outcome {
            Ok(detail) => println!("criterion {n:>2} {name}: PASS ({detail})"),
            Err(detail) => {
                failed += 1;
                println!("criterion {n:>2} {name}: FAIL ({detail})");
            }
        }
    }
    println!(
        "acceptance: {} passed, {failed} failed",
        results.len() - failed
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
