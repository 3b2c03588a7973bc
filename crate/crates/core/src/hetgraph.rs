//! Seeded-friend construction from the heterogeneous user/item graph.
//!
//! Meta-path guided random walks emit user sequences, a skip-gram model with
//! negative sampling embeds the users, and each user's top-k cosine
//! neighbours become their seeded friend set: the generator's input evidence.

use std::fs;
use std::io::Write;
use std::path::Path;
use std::str::FromStr;

use rand::Rng;
use rayon::prelude::*;

use crate::data::{Dataset, SocialGraph};
use crate::error::{Error, Result};
use crate::linalg::{dot, logistic, Mat};
use crate::rng::{stream, tag};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NodeKind {
    User,
    Item,
}

/// A node-type pattern such as U-U or U-I-U. Walks repeat the pattern
/// cyclically (the shared endpoint is not doubled). Patterns must start and
/// end at User and may not hold two Items in a row: there are no item-item
/// edges to follow.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MetaPath {
    kinds: Vec<NodeKind>,
}

impl MetaPath {
    pub fn new(kinds: Vec<NodeKind>) -> Result<Self> {
        if kinds.len() < 2 {
            return Err(Error::Config("meta-path needs at least two nodes".into()));
        }
        if kinds.first() != Some(&NodeKind::User) || kinds.last() != Some(&NodeKind::User) {
            return Err(Error::Config("meta-path must start and end at a user".into()));
        }
        if kinds.windows(2).any(|w| w == [NodeKind::Item, NodeKind::Item]) {
            return Err(Error::Config("meta-path cannot chain two items".into()));
        }
        Ok(MetaPath { kinds })
    }

    pub fn kinds(&self) -> &[NodeKind] {
        &self.kinds
    }

    /// The default pattern set: U-U, U-I-U, U-U-I-U.
    pub fn defaults() -> Vec<MetaPath> {
        ["U-U", "U-I-U", "U-U-I-U"]
            .iter()
            .map(|s| s.parse().unwrap())
            .collect()
    }
}

impl FromStr for MetaPath {
    type Err = Error;

    /// Accepts dashed or plain forms: "U-I-U" or "UIU", case-insensitive.
    fn from_str(s: &str) -> Result<Self> {
        let mut kinds = Vec::new();
        for c in s.chars() {
            match c.to_ascii_uppercase() {
                'U' => kinds.push(NodeKind::User),
                'I' => kinds.push(NodeKind::Item),
                '-' => {}
                other => {
                    return Err(Error::Config(format!(
                        "meta-path {s:?}: unexpected character {other:?}"
                    )))
                }
            }
        }
        MetaPath::new(kinds)
    }
}

impl std::fmt::Display for MetaPath {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let parts: Vec<&str> = self
            .kinds
            .iter()
            .map(|k| match k {
                NodeKind::User => "U",
                NodeKind::Item => "I",
            })
            .collect();
        write!(f, "{}", parts.join("-"))
    }
}

/// Walk corpus: sequences of dense user ids (item hops are traversed but not
/// emitted).
#[derive(Clone, Debug, PartialEq)]
pub struct WalkCorpus {
    pub walks: Vec<Vec<usize>>,
}

impl WalkCorpus {
    pub fn tokens(&self) -> usize {
        self.walks.iter().map(Vec::len).sum()
    }
}

/// Run `walks_per_node` truncated random walks per meta-path per user.
/// `walk_length` counts emitted users. A walk stops early when the current
/// node has no neighbour of the required next type; a user with no qualifying
/// edge at the first hop still contributes singleton walks `[u]`.
pub fn generate_walks(
    dataset: &Dataset,
    social: &SocialGraph,
    paths: &[MetaPath],
    walks_per_node: usize,
    walk_length: usize,
    master_seed: u64,
) -> WalkCorpus {
    assert!(walks_per_node >= 1, "walks_per_node must be >= 1");
    assert!(walk_length >= 2, "walk_length must be >= 2");
    assert!(!paths.is_empty(), "need at least one meta-path");
    let m = dataset.num_users();
    let users_by_item = dataset.feedback().transpose();
    let mut walks = Vec::with_capacity(paths.len() * m * walks_per_node);
    for (p_idx, path) in paths.iter().enumerate() {
        let kinds = path.kinds();
        for u in 0..m {
            for w in 0..walks_per_node {
                let mut rng = stream(
                    master_seed,
                    &[tag::WALKS, p_idx as u64, u as u64, w as u64],
                );
                let mut walk = vec![u];
                let mut node = u;
                let mut kind = NodeKind::User;
                // Cyclic position in the pattern; the endpoint doubles as the
                // next cycle's start, so advancing wraps to index 1.
                let mut pos = 0usize;
                while walk.len() < walk_length {
                    pos = if pos + 1 == kinds.len() { 1 } else { pos + 1 };
                    let next_kind = kinds[pos];
                    let neighbours: &[usize] = match (kind, next_kind) {
                        (NodeKind::User, NodeKind::User) => social.followees(node),
                        (NodeKind::User, NodeKind::Item) => dataset.feedback().items(node),
                        (NodeKind::Item, NodeKind::User) => &users_by_item[node],
                        (NodeKind::Item, NodeKind::Item) => unreachable!("rejected in MetaPath::new"),
                    };
                    if neighbours.is_empty() {
                        break;
                    }
                    node = neighbours[rng.gen_range(0..neighbours.len())];
                    kind = next_kind;
                    if kind == NodeKind::User {
                        walk.push(node);
                    }
                }
                walks.push(walk);
            }
        }
    }
    WalkCorpus { walks }
}

/// Dense user embeddings learned from the walk corpus.
#[derive(Clone, Debug, PartialEq)]
pub struct NodeEmbedding {
    vectors: Mat,
}

impl NodeEmbedding {
    pub fn num_users(&self) -> usize {
        self.vectors.rows()
    }

    pub fn dim(&self) -> usize {
        self.vectors.cols()
    }

    pub fn vector(&self, u: usize) -> &[f64] {
        self.vectors.row(u)
    }

    /// Cosine similarity; 0 when either vector has zero norm.
    pub fn cosine(&self, a: usize, b: usize) -> f64 {
        let (va, vb) = (self.vectors.row(a), self.vectors.row(b));
        let (na, nb) = (dot(va, va).sqrt(), dot(vb, vb).sqrt());
        if na == 0.0 || nb == 0.0 {
            return 0.0;
        }
        dot(va, vb) / (na * nb)
    }
}

/// Skip-gram with negative sampling over the walk corpus. Vocabulary size is
/// `max id + 1`; in the pipeline every user starts at least one walk, so that
/// equals the user count. Input vectors initialise uniform ±0.5/dim, output
/// vectors zero; negatives are drawn from the unigram distribution raised to
/// 0.75; the learning rate decays linearly to lr/10⁴ over all tokens.
pub fn train_skipgram(
    corpus: &WalkCorpus,
    dim: usize,
    window: usize,
    negatives: usize,
    epochs: usize,
    lr0: f64,
    master_seed: u64,
) -> Result<NodeEmbedding> {
    if corpus.walks.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    assert!(dim >= 1 && window >= 1, "dim and window must be >= 1");
    let m = corpus
        .walks
        .iter()
        .flat_map(|w| w.iter())
        .max()
        .map(|&x| x + 1)
        .unwrap_or(0);
    if m == 0 {
        return Err(Error::EmptyCorpus);
    }

    let mut init_rng = stream(master_seed, &[tag::SKIPGRAM_INIT]);
    let half = 0.5 / dim as f64;
    let mut syn0 = Mat::uniform(m, dim, -half, half, &mut init_rng);
    let mut syn1 = Mat::zeros(m, dim);

    // Unigram^0.75 cumulative table over users that actually occur.
    let mut counts = vec![0u64; m];
    for walk in &corpus.walks {
        for &u in walk {
            counts[u] += 1;
        }
    }
    let mut neg_users = Vec::new();
    let mut neg_cum = Vec::new();
    let mut acc = 0.0f64;
    for (u, &c) in counts.iter().enumerate() {
        if c > 0 {
            acc += (c as f64).powf(0.75);
            neg_users.push(u);
            neg_cum.push(acc);
        }
    }
    let total_weight = acc;
    let draw_negative = |rng: &mut rand_chacha::ChaCha8Rng| -> usize {
        let x = rng.gen::<f64>() * total_weight;
        let idx = neg_cum.partition_point(|&c| c <= x).min(neg_users.len() - 1);
        neg_users[idx]
    };

    let total_tokens = (corpus.tokens() * epochs.max(1)) as f64;
    let lr_floor = lr0 * 1e-4;
    let mut processed = 0usize;
    let mut grad = vec![0.0; dim];

    for epoch in 0..epochs {
        let mut rng = stream(master_seed, &[tag::SKIPGRAM_TRAIN, epoch as u64]);
        for walk in &corpus.walks {
            for (t, &center) in walk.iter().enumerate() {
                processed += 1;
                let lr = (lr0 * (1.0 - processed as f64 / total_tokens)).max(lr_floor);
                let lo = t.saturating_sub(window);
                let hi = (t + window).min(walk.len() - 1);
                for c in lo..=hi {
                    if c == t {
                        continue;
                    }
                    let target = walk[c];
                    grad.iter_mut().for_each(|g| *g = 0.0);
                    // Positive pair plus `negatives` sampled non-targets.
                    for s in 0..=negatives {
                        let (out, label) = if s == 0 {
                            (target, 1.0)
                        } else {
                            let n = draw_negative(&mut rng);
                            if n == target {
                                continue;
                            }
                            (n, 0.0)
                        };
                        let f = logistic(dot(syn0.row(center), syn1.row(out)));
                        let g = (label - f) * lr;
                        for d in 0..dim {
                            grad[d] += g * syn1.get(out, d);
                        }
                        for d in 0..dim {
                            let v = syn1.get(out, d) + g * syn0.get(center, d);
                            syn1.set(out, d, v);
                        }
                    }
                    for d in 0..dim {
                        let v = syn0.get(center, d) + grad[d];
                        syn0.set(center, d, v);
                    }
                }
            }
        }
    }
    Ok(NodeEmbedding { vectors: syn0 })
}

/// Each user's seeded friends, similarity-descending.
#[derive(Clone, Debug, PartialEq)]
pub struct SeededFriendSet {
    friends: Vec<Vec<usize>>,
    scores: Vec<Vec<f64>>,
}

impl SeededFriendSet {
    /// Rows must be similarity-descending and self-free; enforced here.
    pub fn new(friends: Vec<Vec<usize>>, scores: Vec<Vec<f64>>) -> Self {
        assert_eq!(friends.len(), scores.len());
        for (u, (f, s)) in friends.iter().zip(&scores).enumerate() {
            assert_eq!(f.len(), s.len());
            assert!(!f.contains(&u), "seed set for {u} contains itself");
            assert!(
                s.windows(2).all(|w| w[0] >= w[1]),
                "seed scores for {u} not descending"
            );
        }
        SeededFriendSet { friends, scores }
    }

    pub fn num_users(&self) -> usize {
        self.friends.len()
    }

    pub fn friends(&self, u: usize) -> &[usize] {
        &self.friends[u]
    }

    pub fn scores(&self, u: usize) -> &[f64] {
        &self.scores[u]
    }

    pub fn total_pairs(&self) -> usize {
        self.friends.iter().map(Vec::len).sum()
    }

    /// Dense 0/1 indicator over users, the generator's input profile.
    pub fn indicator(&self, u: usize) -> Vec<f64> {
        let mut v = vec![0.0; self.friends.len()];
        for &f in &self.friends[u] {
            v[f] = 1.0;
        }
        v
    }
}

/// Top-k cosine neighbours per user, keeping only similarities ≥ `min_sim`.
/// Ties break toward the lower user id. Zero-norm embeddings never qualify as
/// a neighbour (cosine undefined).
pub fn select_seeded_friends(emb: &NodeEmbedding, k: usize, min_sim: f64) -> SeededFriendSet {
    assert!(k >= 1, "k must be >= 1");
    assert!((-1.0..=1.0).contains(&min_sim), "min_sim must be in [-1, 1]");
    let m = emb.num_users();
    let norms: Vec<f64> = (0..m).map(|u| dot(emb.vector(u), emb.vector(u)).sqrt()).collect();
    let per_user: Vec<(Vec<usize>, Vec<f64>)> = (0..m)
        .into_par_iter()
        .map(|u| {
            if norms[u] == 0.0 {
                return (Vec::new(), Vec::new());
            }
            let mut cands: Vec<(f64, usize)> = Vec::new();
            for v in 0..m {
                if v == u || norms[v] == 0.0 {
                    continue;
                }
                let sim = dot(emb.vector(u), emb.vector(v)) / (norms[u] * norms[v]);
                if sim >= min_sim {
                    cands.push((sim, v));
                }
            }
            cands.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
            cands.truncate(k);
            let (scores, friends): (Vec<f64>, Vec<usize>) = cands.into_iter().unzip();
            (friends, scores)
        })
        .collect();
    let (friends, scores) = per_user.into_iter().unzip();
    SeededFriendSet::new(friends, scores)
}

/// TSV export: `user <TAB> friend <TAB> similarity`, raw ids, rows grouped by
/// user in similarity-descending order.
pub fn export_seeded_friends(path: &Path, set: &SeededFriendSet, dataset: &Dataset) -> Result<()> {
    let mut out = String::from("user\tfriend\tsimilarity\n");
    for u in 0..set.num_users() {
        for (idx, &f) in set.friends(u).iter().enumerate() {
            out.push_str(&format!(
                "{}\t{}\t{:.6}\n",
                dataset.user_id(u),
                dataset.user_id(f),
                set.scores(u)[idx]
            ));
        }
    }
    let mut f = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    f.write_all(out.as_bytes()).map_err(|e| Error::io(path, e))
}

#[derive(Clone, Copy, Debug, Default)]
pub struct SeedLoadReport {
    pub rows: usize,
    pub self_pairs: usize,
    pub unknown_users: usize,
    pub kept: usize,
}

/// Read a seeded-friend file back. Self-pairs and unknown ids are dropped and
/// counted; rows keep file order per user (assumed similarity-descending, as
/// written by `export_seeded_friends`), and per-user scores are re-sorted
/// descending if a hand-edited file violates that.
pub fn load_seeded_friends(
    path: &Path,
    dataset: &Dataset,
) -> Result<(SeededFriendSet, SeedLoadReport)> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut report = SeedLoadReport::default();
    let m = dataset.num_users();
    let mut rows: Vec<Vec<(f64, usize)>> = vec![Vec::new(); m];
    let mut saw_header = false;
    for (line_no, raw) in text.lines().enumerate() {
        let line = raw.trim_end_matches('\r');
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if !saw_header && line == "user\tfriend\tsimilarity" {
            saw_header = true;
            continue;
        }
        saw_header = true;
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() < 2 || fields.len() > 3 {
            return Err(Error::parse(path, line_no + 1, "expected 2 or 3 fields"));
        }
        report.rows += 1;
        let score: f64 = match fields.get(2) {
            Some(s) => s
                .trim()
                .parse()
                .map_err(|_| Error::parse(path, line_no + 1, format!("bad similarity {s:?}")))?,
            None => 1.0,
        };
        let (Some(u), Some(f)) = (
            dataset.dense_user(fields[0].trim()),
            dataset.dense_user(fields[1].trim()),
        ) else {
            report.unknown_users += 1;
            continue;
        };
        if u == f {
            report.self_pairs += 1;
            continue;
        }
        rows[u].push((score, f));
    }
    let mut friends = Vec::with_capacity(m);
    let mut scores = Vec::with_capacity(m);
    for mut row in rows {
        row.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
        report.kept += row.len();
        friends.push(row.iter().map(|&(_, f)| f).collect());
        scores.push(row.iter().map(|&(s, _)| s).collect());
    }
    Ok((SeededFriendSet::new(friends, scores), report))
}
