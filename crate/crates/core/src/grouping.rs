//! Near-duplicate message clustering by shared four-grams.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::ingest::{Token, TokenList};

pub const WINDOW: usize = 4;

/// All consecutive four-token windows, or the whole list as one shorter
/// tuple when it has fewer than four tokens.
pub fn four_grams(tokens: &TokenList) -> BTreeSet<Vec<Token>> {
    let t = tokens.as_slice();
    if t.is_empty() {
        return BTreeSet::new();
    }
    if t.len() < WINDOW {
        return BTreeSet::from([t.to_vec()]);
    }
    t.windows(WINDOW).map(<[Token]>::to_vec).collect()
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct MessageGroup {
    /// Smallest member id.
    pub group_id: String,
    pub message_ids: BTreeSet<String>,
    pub authors: BTreeSet<String>,
}

impl MessageGroup {
    pub fn size(&self) -> usize {
        self.message_ids.len()
    }
}

/// A message as seen by the grouper.
#[derive(Debug, Clone)]
pub struct GroupInput<'a> {
    pub message_id: &'a str,
    pub author: &'a str,
    pub tokens: &'a TokenList,
}

struct UnionFind {
    parent: Vec<usize>,
    rank: Vec<u8>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind {
            parent: (0..n).collect(),
            rank: vec![0; n],
        }
    }

    fn find(&mut self, mut a: usize) -> usize {
        while self.parent[a] != a {
            self.parent[a] = self.parent[self.parent[a]];
            a = self.parent[a];
        }
        a
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return;
        }
        match self.rank[ra].cmp(&self.rank[rb]) {
            std::cmp::Ordering::Less => self.parent[ra] = rb,
            std::cmp::Ordering::Greater => self.parent[rb] = ra,
            std::cmp::Ordering::Equal => {
                self.parent[rb] = ra;
                self.rank[ra] += 1;
            }
        }
    }
}

/// Links messages sharing a four-gram (a short message links to messages
/// containing its exact tuple contiguously) and returns the connected
/// components of two or more messages, sorted by `group_id`.
pub fn group_similar(messages: &[GroupInput<'_>]) -> Result<Vec<MessageGroup>> {
    let mut seen = HashMap::with_capacity(messages.len());
    for (i, m) in messages.iter().enumerate() {
        if seen.insert(m.message_id, i).is_some() {
            return Err(Error::invalid(format!(
                "duplicate message id {}",
                m.message_id
            )));
        }
    }

    // First message seen with each window; later ones union into it.
    let mut window_owner: HashMap<&[Token], usize> = HashMap::new();
    let mut uf = UnionFind::new(messages.len());
    for (i, m) in messages.iter().enumerate() {
        for g in m.tokens.as_slice().windows(WINDOW) {
            match window_owner.get(g) {
                Some(&o) => uf.union(o, i),
                None => {
                    window_owner.insert(g, i);
                }
            }
        }
    }

    // Short messages: link to any message containing the tuple, including
    // other short messages with the identical tuple.
    let shorts: Vec<usize> = (0..messages.len())
        .filter(|&i| (1..WINDOW).contains(&messages[i].tokens.len()))
        .collect();
    if !shorts.is_empty() {
        let wanted: HashMap<&[Token], usize> = {
            let mut map = HashMap::new();
            for &i in &shorts {
                let t = messages[i].tokens.as_slice();
                match map.get(t) {
                    Some(&o) => uf.union(o, i),
                    None => {
                        map.insert(t, i);
                    }
                }
            }
            map
        };
        for (i, m) in messages.iter().enumerate() {
            let t = m.tokens.as_slice();
            if t.len() < 2 {
                continue;
            }
            for len in 1..WINDOW.min(t.len() + 1) {
                if len == t.len() {
                    // Whole-tuple matches between short messages were handled above.
                    continue;
                }
                for w in t.windows(len) {
                    if let Some(&o) = wanted.get(w) {
                        uf.union(o, i);
                    }
                }
            }
        }
    }

    let mut components: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for i in 0..messages.len() {
        let root = uf.find(i);
        components.entry(root).or_default().push(i);
    }
    let mut groups: Vec<MessageGroup> = components
        .into_values()
        .filter(|members| members.len() >= 2)
        .map(|members| {
            let message_ids: BTreeSet<String> = members
                .iter()
                .map(|&i| messages[i].message_id.to_string())
                .collect();
            MessageGroup {
                group_id: message_ids.iter().next().cloned().unwrap_or_default(),
                authors: members
                    .iter()
                    .map(|&i| messages[i].author.to_string())
                    .collect(),
                message_ids,
            }
        })
        .collect();
    groups.sort();
    Ok(groups)
}

/// CSV with header `group_id,message_id`, one row per member.
pub fn groups_to_csv(groups: &[MessageGroup]) -> String {
    let mut out = String::from("group_id,message_id\n");
    for g in groups {
        for m in &g.message_ids {
            let _ = writeln!(out, "{},{}", g.group_id, m);
        }
    }
    out
}

/// Reads `group_id,message_id` rows; authors are filled from `author_of`.
pub fn groups_from_csv(
    text: &str,
    author_of: &HashMap<String, String>,
) -> Result<Vec<MessageGroup>> {
    let mut by_id: BTreeMap<String, BTreeSet<String>> = BTreeMap::new();
    for (i, line) in text.lines().enumerate().skip(1) {
        if line.trim().is_empty() {
            continue;
        }
        let (g, m) = line.split_once(',').ok_or(Error::Record {
            line: i + 1,
            message: "expected `group_id,message_id`".into(),
        })?;
        by_id
            .entry(g.to_string())
            .or_default()
            .insert(m.to_string());
    }
    by_id
        .into_iter()
        .map(|(group_id, message_ids)| {
            let authors = message_ids
                .iter()
                .map(|m| {
                    author_of.get(m).cloned().ok_or_else(|| {
                        Error::invalid(format!("group {group_id} names unknown message {m}"))
                    })
                })
                .collect::<Result<_>>()?;
            Ok(MessageGroup {
                group_id,
                message_ids,
                authors,
            })
        })
        .collect()
}
