//! Dataset loading, indexing, and per-user fold splitting.
//!
//! Input files are TSV. Interactions: `user <TAB> item [<TAB> rating]`.
//! Social relations: `truster <TAB> trustee [<TAB> weight]` (weight ignored).
//! Blank lines and lines starting with `#` are skipped in both.

use std::collections::HashMap;
use std::fs;
use std::io::Write;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::Rng;

use crate::error::{Error, Result};
use crate::rng::{stream, tag};

#[derive(Clone, Debug, PartialEq)]
pub struct InteractionRecord {
    pub user: String,
    pub item: String,
    pub rating: f64,
    /// True when the file row had no rating column. Implicit records pass any
    /// threshold (their rating is taken as 1 with threshold 0).
    pub implicit: bool,
}

/// What the interaction loader saw and kept.
#[derive(Clone, Copy, Debug, Default)]
pub struct LoadReport {
    /// Data rows parsed (comments and blanks excluded), duplicates included.
    pub rows: usize,
    /// Duplicate (user, item) occurrences merged away (max rating kept).
    pub duplicates: usize,
    /// Distinct pairs dropped by the rating threshold.
    pub below_threshold: usize,
    /// Records returned.
    pub kept: usize,
}

/// Load interactions, merge duplicate (user, item) pairs keeping the maximum
/// rating, then drop pairs whose rating is below `threshold`. Pairs whose
/// occurrences were all implicit are kept regardless of the threshold.
pub fn load_interactions(path: &Path, threshold: f64) -> Result<(Vec<InteractionRecord>, LoadReport)> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut report = LoadReport::default();
    let mut records: Vec<InteractionRecord> = Vec::new();
    let mut index: HashMap<(String, String), usize> = HashMap::new();

    for (line_no, raw) in text.lines().enumerate() {
        let line = raw.trim_end_matches('\r');
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() < 2 || fields.len() > 3 {
            return Err(Error::parse(
                path,
                line_no + 1,
                format!("expected 2 or 3 tab-separated fields, got {}", fields.len()),
            ));
        }
        let user = fields[0].trim();
        let item = fields[1].trim();
        if user.is_empty() || item.is_empty() {
            return Err(Error::parse(path, line_no + 1, "empty user or item id"));
        }
        let (rating, implicit) = match fields.get(2) {
            Some(f) => {
                let r: f64 = f.trim().parse().map_err(|_| {
                    Error::parse(path, line_no + 1, format!("bad rating {:?}", f))
                })?;
                if !r.is_finite() {
                    return Err(Error::parse(path, line_no + 1, "non-finite rating"));
                }
                (r, false)
            }
            None => (1.0, true),
        };
        report.rows += 1;
        match index.get(&(user.to_string(), item.to_string())) {
            Some(&i) => {
                report.duplicates += 1;
                let rec = &mut records[i];
                rec.rating = rec.rating.max(rating);
                rec.implicit = rec.implicit && implicit;
            }
            None => {
                index.insert((user.to_string(), item.to_string()), records.len());
                records.push(InteractionRecord {
                    user: user.to_string(),
                    item: item.to_string(),
                    rating,
                    implicit,
                });
            }
        }
    }

    let before = records.len();
    records.retain(|r| r.implicit || r.rating >= threshold);
    report.below_threshold = before - records.len();
    report.kept = records.len();
    Ok((records, report))
}

/// Binary feedback support: per-user sorted item lists. This is the `R` view
/// that training ops consult; the trainer builds one from the fold's train
/// split so held-out interactions never leak into model updates.
#[derive(Clone, Debug, PartialEq)]
pub struct FeedbackMatrix {
    num_items: usize,
    items_by_user: Vec<Vec<usize>>,
    nnz: usize,
}

impl FeedbackMatrix {
    /// `items_by_user` rows may arrive unsorted; duplicates collapse.
    pub fn new(mut items_by_user: Vec<Vec<usize>>, num_items: usize) -> Self {
        let mut nnz = 0;
        for row in items_by_user.iter_mut() {
            row.sort_unstable();
            row.dedup();
            debug_assert!(row.last().map_or(true, |&i| i < num_items));
            nnz += row.len();
        }
        FeedbackMatrix {
            num_items,
            items_by_user,
            nnz,
        }
    }

    pub fn num_users(&self) -> usize {
        self.items_by_user.len()
    }

    pub fn num_items(&self) -> usize {
        self.num_items
    }

    pub fn nnz(&self) -> usize {
        self.nnz
    }

    #[inline]
    pub fn items(&self, user: usize) -> &[usize] {
        &self.items_by_user[user]
    }

    #[inline]
    pub fn contains(&self, user: usize, item: usize) -> bool {
        self.items_by_user[user].binary_search(&item).is_ok()
    }

    /// Item-major adjacency (users per item), each list ascending.
    pub fn transpose(&self) -> Vec<Vec<usize>> {
        let mut users_by_item = vec![Vec::new(); self.num_items];
        for (u, items) in self.items_by_user.iter().enumerate() {
            for &i in items {
                users_by_item[i].push(u);
            }
        }
        users_by_item
    }
}

/// Indexed dataset: dense user/item ids in first-appearance order plus the
/// full binary feedback support.
#[derive(Clone, Debug)]
pub struct Dataset {
    user_ids: Vec<String>,
    item_ids: Vec<String>,
    user_index: HashMap<String, usize>,
    item_index: HashMap<String, usize>,
    feedback: FeedbackMatrix,
}

impl Dataset {
    pub fn num_users(&self) -> usize {
        self.user_ids.len()
    }

    pub fn num_items(&self) -> usize {
        self.item_ids.len()
    }

    pub fn user_id(&self, u: usize) -> &str {
        &self.user_ids[u]
    }

    pub fn item_id(&self, i: usize) -> &str {
        &self.item_ids[i]
    }

    pub fn dense_user(&self, raw: &str) -> Option<usize> {
        self.user_index.get(raw).copied()
    }

    pub fn dense_item(&self, raw: &str) -> Option<usize> {
        self.item_index.get(raw).copied()
    }

    pub fn feedback(&self) -> &FeedbackMatrix {
        &self.feedback
    }
}

/// Index records into a dense dataset. Errors on an empty record list.
/// Dense ids follow first appearance in `records`.
pub fn build_dataset(records: &[InteractionRecord]) -> Result<Dataset> {
    if records.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let mut user_ids = Vec::new();
    let mut item_ids = Vec::new();
    let mut user_index = HashMap::new();
    let mut item_index = HashMap::new();
    let mut pairs = Vec::with_capacity(records.len());
    for rec in records {
        let u = *user_index.entry(rec.user.clone()).or_insert_with(|| {
            user_ids.push(rec.user.clone());
            user_ids.len() - 1
        });
        let i = *item_index.entry(rec.item.clone()).or_insert_with(|| {
            item_ids.push(rec.item.clone());
            item_ids.len() - 1
        });
        pairs.push((u, i));
    }
    let mut items_by_user = vec![Vec::new(); user_ids.len()];
    for (u, i) in pairs {
        items_by_user[u].push(i);
    }
    let n = item_ids.len();
    Ok(Dataset {
        user_ids,
        item_ids,
        user_index,
        item_index,
        feedback: FeedbackMatrix::new(items_by_user, n),
    })
}

/// Directed social graph over dense user ids.
#[derive(Clone, Debug, PartialEq)]
pub struct SocialGraph {
    out: Vec<Vec<usize>>,
    num_edges: usize,
}

#[derive(Clone, Copy, Debug, Default)]
pub struct SocialLoadReport {
    /// Data rows parsed from the file (the raw relation count).
    pub rows: usize,
    pub self_loops: usize,
    pub duplicates: usize,
    /// Edges with an endpoint absent from the dataset's user index.
    pub unknown_users: usize,
    pub kept: usize,
}

impl SocialGraph {
    /// Build from dense-id edges; self-loops and duplicates are dropped.
    pub fn from_edges(num_users: usize, edges: &[(usize, usize)]) -> Self {
        let mut out = vec![Vec::new(); num_users];
        for &(a, b) in edges {
            if a == b {
                continue;
            }
            assert!(a < num_users && b < num_users, "edge endpoint out of range");
            out[a].push(b);
        }
        let mut num_edges = 0;
        for row in out.iter_mut() {
            row.sort_unstable();
            row.dedup();
            num_edges += row.len();
        }
        SocialGraph { out, num_edges }
    }

    pub fn num_users(&self) -> usize {
        self.out.len()
    }

    pub fn num_edges(&self) -> usize {
        self.num_edges
    }

    #[inline]
    pub fn followees(&self, u: usize) -> &[usize] {
        &self.out[u]
    }

    pub fn contains(&self, a: usize, b: usize) -> bool {
        self.out[a].binary_search(&b).is_ok()
    }

    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.out
            .iter()
            .enumerate()
            .flat_map(|(a, row)| row.iter().map(move |&b| (a, b)))
    }
}

/// Load the trust file, mapping endpoints through the dataset's user index.
/// Unknown users, self-loops, and duplicate edges are dropped and counted.
pub fn load_social(path: &Path, dataset: &Dataset) -> Result<(SocialGraph, SocialLoadReport)> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut report = SocialLoadReport::default();
    let mut out = vec![Vec::new(); dataset.num_users()];
    for (line_no, raw) in text.lines().enumerate() {
        let line = raw.trim_end_matches('\r');
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() < 2 || fields.len() > 3 {
            return Err(Error::parse(
                path,
                line_no + 1,
                format!("expected 2 or 3 tab-separated fields, got {}", fields.len()),
            ));
        }
        report.rows += 1;
        let (a, b) = (fields[0].trim(), fields[1].trim());
        let (Some(da), Some(db)) = (dataset.dense_user(a), dataset.dense_user(b)) else {
            report.unknown_users += 1;
            continue;
        };
        if da == db {
            report.self_loops += 1;
            continue;
        }
        out[da].push(db);
    }
    let mut num_edges = 0;
    for row in out.iter_mut() {
        let before = row.len();
        row.sort_unstable();
        row.dedup();
        report.duplicates += before - row.len();
        num_edges += row.len();
    }
    report.kept = num_edges;
    Ok((SocialGraph { out, num_edges }, report))
}

/// Split each user's followees into (kept, held out): `frac` of them, rounded
/// down, go to the holdout. Deterministic in (graph, master_seed).
pub fn holdout_followees(
    graph: &SocialGraph,
    frac: f64,
    master_seed: u64,
) -> Result<(SocialGraph, SocialGraph)> {
    if !(0.0..1.0).contains(&frac) {
        return Err(Error::Config(format!(
            "holdout fraction must be in [0, 1), got {frac}"
        )));
    }
    let m = graph.num_users();
    let mut kept_edges = Vec::new();
    let mut held_edges = Vec::new();
    for u in 0..m {
        let mut fols = graph.followees(u).to_vec();
        let mut rng = stream(master_seed, &[tag::SOCIAL_HOLDOUT, u as u64]);
        fols.shuffle(&mut rng);
        let n_hold = (frac * fols.len() as f64).floor() as usize;
        for (idx, &v) in fols.iter().enumerate() {
            if idx < n_hold {
                held_edges.push((u, v));
            } else {
                kept_edges.push((u, v));
            }
        }
    }
    Ok((
        SocialGraph::from_edges(m, &kept_edges),
        SocialGraph::from_edges(m, &held_edges),
    ))
}

/// One cross-validation fold: disjoint per-user train/validation/test item
/// lists whose union is the user's full interaction set.
#[derive(Clone, Debug, PartialEq)]
pub struct FoldSplit {
    pub fold_id: usize,
    train: Vec<Vec<usize>>,
    validation: Vec<Vec<usize>>,
    test: Vec<Vec<usize>>,
}

impl FoldSplit {
    pub fn num_users(&self) -> usize {
        self.train.len()
    }

    pub fn train_items(&self, u: usize) -> &[usize] {
        &self.train[u]
    }

    pub fn validation_items(&self, u: usize) -> &[usize] {
        &self.validation[u]
    }

    pub fn test_items(&self, u: usize) -> &[usize] {
        &self.test[u]
    }

    /// Feedback view over the train split only.
    pub fn train_matrix(&self, num_items: usize) -> FeedbackMatrix {
        FeedbackMatrix::new(self.train.clone(), num_items)
    }

    pub fn counts(&self) -> (usize, usize, usize) {
        let s = |v: &Vec<Vec<usize>>| v.iter().map(Vec::len).sum();
        (s(&self.train), s(&self.validation), s(&self.test))
    }

    pub fn iter_train(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.train
            .iter()
            .enumerate()
            .flat_map(|(u, row)| row.iter().map(move |&i| (u, i)))
    }

    fn from_parts(
        fold_id: usize,
        mut train: Vec<Vec<usize>>,
        mut validation: Vec<Vec<usize>>,
        mut test: Vec<Vec<usize>>,
    ) -> Self {
        for rows in [&mut train, &mut validation, &mut test] {
            for row in rows.iter_mut() {
                row.sort_unstable();
            }
        }
        FoldSplit {
            fold_id,
            train,
            validation,
            test,
        }
    }
}

/// Per-user stratified k-fold split. Each user's items are shuffled once and
/// dealt round-robin (with a random per-user offset) onto the k folds; fold f
/// takes shard f as test. 10% of the remaining pool (rounded down, per user)
/// becomes validation. A user whose pool would be empty keeps one test item
/// back in train, so every user trains in every fold.
pub fn split_folds(dataset: &Dataset, k: usize, master_seed: u64) -> Result<Vec<FoldSplit>> {
    if !(2..=20).contains(&k) {
        return Err(Error::Config(format!("fold count must be in [2, 20], got {k}")));
    }
    let m = dataset.num_users();
    // One shuffle + offset per user, reused across folds so folds partition.
    let mut shuffled: Vec<Vec<usize>> = Vec::with_capacity(m);
    let mut offsets: Vec<usize> = Vec::with_capacity(m);
    for u in 0..m {
        let mut items = dataset.feedback().items(u).to_vec();
        let mut rng = stream(master_seed, &[tag::FOLD_SPLIT, u as u64]);
        items.shuffle(&mut rng);
        offsets.push(rng.gen_range(0..k));
        shuffled.push(items);
    }

    let mut folds = Vec::with_capacity(k);
    for f in 0..k {
        let mut train = vec![Vec::new(); m];
        let mut validation = vec![Vec::new(); m];
        let mut test = vec![Vec::new(); m];
        for u in 0..m {
            let mut pool = Vec::new();
            let mut held = Vec::new();
            for (t, &item) in shuffled[u].iter().enumerate() {
                if (t + offsets[u]) % k == f {
                    held.push(item);
                } else {
                    pool.push(item);
                }
            }
            if pool.is_empty() && !held.is_empty() {
                pool.push(held.remove(0));
            }
            let n_val = pool.len() / 10;
            validation[u] = pool.split_off(pool.len() - n_val);
            train[u] = pool;
            test[u] = held;
        }
        folds.push(FoldSplit::from_parts(f, train, validation, test));
    }
    Ok(folds)
}

/// Users whose fold-train feedback count is strictly below `max_feedback`.
/// Ascending order. `max_feedback` must be ≥ 1.
pub fn cold_start_users(fold: &FoldSplit, max_feedback: usize) -> Vec<usize> {
    debug_assert!(max_feedback >= 1);
    (0..fold.num_users())
        .filter(|&u| fold.train_items(u).len() < max_feedback)
        .collect()
}

const MANIFEST_HEADER: &str = "fold\tsplit\tuser\titem";

/// Write the fold assignment as TSV (`fold split user item`, raw ids) so a
/// split can be reused across runs and models.
pub fn export_fold_manifest(path: &Path, dataset: &Dataset, folds: &[FoldSplit]) -> Result<()> {
    let mut out = String::new();
    out.push_str(MANIFEST_HEADER);
    out.push('\n');
    for fold in folds {
        for (name, rows) in [
            ("train", &fold.train),
            ("validation", &fold.validation),
            ("test", &fold.test),
        ] {
            for (u, items) in rows.iter().enumerate() {
                for &i in items {
                    out.push_str(&format!(
                        "{}\t{}\t{}\t{}\n",
                        fold.fold_id,
                        name,
                        dataset.user_id(u),
                        dataset.item_id(i)
                    ));
                }
            }
        }
    }
    let mut f = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    f.write_all(out.as_bytes()).map_err(|e| Error::io(path, e))
}

/// Read a manifest back against the same dataset. Unknown ids, bad split
/// labels, and missing folds are parse errors.
pub fn load_fold_manifest(path: &Path, dataset: &Dataset) -> Result<Vec<FoldSplit>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    // fold -> (train, validation, test)
    let mut parts: Vec<[Vec<Vec<usize>>; 3]> = Vec::new();
    let mut saw_header = false;
    for (line_no, raw) in text.lines().enumerate() {
        let line = raw.trim_end_matches('\r');
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if !saw_header {
            if line != MANIFEST_HEADER {
                return Err(Error::parse(path, line_no + 1, "missing manifest header"));
            }
            saw_header = true;
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() != 4 {
            return Err(Error::parse(path, line_no + 1, "expected 4 fields"));
        }
        let fold: usize = fields[0]
            .parse()
            .map_err(|_| Error::parse(path, line_no + 1, format!("bad fold id {:?}", fields[0])))?;
        let split = match fields[1] {
            "train" => 0,
            "validation" => 1,
            "test" => 2,
            other => {
                return Err(Error::parse(path, line_no + 1, format!("bad split label {other:?}")))
            }
        };
        let u = dataset
            .dense_user(fields[2])
            .ok_or_else(|| Error::parse(path, line_no + 1, format!("unknown user {:?}", fields[2])))?;
        let i = dataset
            .dense_item(fields[3])
            .ok_or_else(|| Error::parse(path, line_no + 1, format!("unknown item {:?}", fields[3])))?;
        while parts.len() <= fold {
            parts.push([
                vec![Vec::new(); dataset.num_users()],
                vec![Vec::new(); dataset.num_users()],
                vec![Vec::new(); dataset.num_users()],
            ]);
        }
        parts[fold][split][u].push(i);
    }
    if !saw_header {
        return Err(Error::parse(path, 1, "empty manifest"));
    }
    Ok(parts
        .into_iter()
        .enumerate()
        .map(|(f, [tr, va, te])| FoldSplit::from_parts(f, tr, va, te))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn write_tmp(content: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(content.as_bytes()).unwrap();
        f
    }

    #[test]
    fn loader_dedups_to_max_and_applies_threshold() {
        let f = write_tmp("a\tx\t2\na\tx\t5\nb\ty\t3\n");
        let (recs, report) = load_interactions(f.path(), 4.0).unwrap();
        assert_eq!(recs.len(), 1);
        assert_eq!(recs[0].user, "a");
        assert_eq!(recs[0].item, "x");
        assert_eq!(recs[0].rating, 5.0);
        assert_eq!(report.rows, 3);
        assert_eq!(report.duplicates, 1);
        assert_eq!(report.below_threshold, 1);
        assert_eq!(report.kept, 1);
    }

    #[test]
    fn loader_keeps_implicit_rows_under_any_threshold() {
        let f = write_tmp("# listening events\na\tx\nb\ty\n\nb\tz\t0.5\n");
        let (recs, report) = load_interactions(f.path(), 100.0).unwrap();
        let pairs: Vec<_> = recs.iter().map(|r| (r.user.as_str(), r.item.as_str())).collect();
        assert_eq!(pairs, vec![("a", "x"), ("b", "y")]);
        assert!(recs.iter().all(|r| r.rating == 1.0 && r.implicit));
        assert_eq!(report.rows, 3);
        assert_eq!(report.below_threshold, 1);
    }

    #[test]
    fn loader_rejects_malformed_rows() {
        let f = write_tmp("a\tx\t1\t9\n");
        match load_interactions(f.path(), 0.0) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 1),
            other => panic!("expected parse error, got {other:?}"),
        }
        let f = write_tmp("a\tx\tnot-a-number\n");
        assert!(matches!(load_interactions(f.path(), 0.0), Err(Error::Parse { .. })));
        let f = write_tmp("a\n");
        assert!(matches!(load_interactions(f.path(), 0.0), Err(Error::Parse { .. })));
    }

    #[test]
    fn loader_missing_file_is_io_error() {
        let err = load_interactions(Path::new("/nonexistent/ratings.tsv"), 0.0).unwrap_err();
        assert!(matches!(err, Error::Io { .. }));
    }

    #[test]
    fn empty_record_list_is_an_error() {
        assert!(matches!(build_dataset(&[]), Err(Error::EmptyDataset)));
        let f = write_tmp("# only comments\n");
        let (recs, _) = load_interactions(f.path(), 0.0).unwrap();
        assert!(matches!(build_dataset(&recs), Err(Error::EmptyDataset)));
    }

    #[test]
    fn dataset_round_trips_records() {
        let f = write_tmp("u2\tia\t3\nu1\tib\t4\nu2\tib\t2\nu2\tia\t5\n");
        let (recs, _) = load_interactions(f.path(), 0.0).unwrap();
        let ds = build_dataset(&recs).unwrap();
        assert_eq!(ds.num_users(), 2);
        assert_eq!(ds.num_items(), 2);
        // Dense ids follow first appearance.
        assert_eq!(ds.user_id(0), "u2");
        assert_eq!(ds.item_id(0), "ia");
        // Reverse-mapping the feedback support reproduces the deduplicated pairs.
        let mut via_dataset: Vec<(String, String)> = Vec::new();
        for u in 0..ds.num_users() {
            for &i in ds.feedback().items(u) {
                via_dataset.push((ds.user_id(u).to_string(), ds.item_id(i).to_string()));
            }
        }
        via_dataset.sort();
        let mut direct: Vec<(String, String)> =
            recs.iter().map(|r| (r.user.clone(), r.item.clone())).collect();
        direct.sort();
        assert_eq!(via_dataset, direct);
    }

    #[test]
    fn social_loader_drops_and_reports() {
        let rf = write_tmp("a\tx\nb\tx\nc\tx\n");
        let (recs, _) = load_interactions(rf.path(), 0.0).unwrap();
        let ds = build_dataset(&recs).unwrap();
        let sf = write_tmp("a\tb\t0.9\na\tb\na\ta\na\tghost\nb\tc\n");
        let (graph, report) = load_social(sf.path(), &ds).unwrap();
        assert_eq!(report.rows, 5);
        assert_eq!(report.self_loops, 1);
        assert_eq!(report.duplicates, 1);
        assert_eq!(report.unknown_users, 1);
        assert_eq!(report.kept, 2);
        assert_eq!(graph.num_edges(), 2);
        assert!(graph.contains(ds.dense_user("a").unwrap(), ds.dense_user("b").unwrap()));
        assert!(graph.contains(ds.dense_user("b").unwrap(), ds.dense_user("c").unwrap()));
        // Directed: reverse edge absent.
        assert!(!graph.contains(ds.dense_user("b").unwrap(), ds.dense_user("a").unwrap()));
    }

    fn tiny_dataset(counts: &[usize]) -> Dataset {
        // counts[u] = number of items for user u; items disjoint per user.
        let mut recs = Vec::new();
        let mut item = 0usize;
        for (u, &c) in counts.iter().enumerate() {
            for _ in 0..c {
                recs.push(InteractionRecord {
                    user: format!("u{u}"),
                    item: format!("i{item}"),
                    rating: 1.0,
                    implicit: true,
                });
                item += 1;
            }
        }
        build_dataset(&recs).unwrap()
    }

    #[test]
    fn fold_count_out_of_range_rejected() {
        let ds = tiny_dataset(&[5, 5]);
        assert!(matches!(split_folds(&ds, 1, 7), Err(Error::Config(_))));
        assert!(matches!(split_folds(&ds, 21, 7), Err(Error::Config(_))));
        assert!(split_folds(&ds, 2, 7).is_ok());
        assert!(split_folds(&ds, 20, 7).is_ok());
    }

    #[test]
    fn single_interaction_user_always_trains() {
        let ds = tiny_dataset(&[1, 8]);
        for fold in split_folds(&ds, 5, 3).unwrap() {
            assert_eq!(fold.train_items(0).len(), 1);
            assert!(fold.validation_items(0).is_empty());
            assert!(fold.test_items(0).is_empty());
        }
    }

    #[test]
    fn splits_are_seed_deterministic() {
        let ds = tiny_dataset(&[12, 7, 25, 1, 3]);
        let a = split_folds(&ds, 5, 99).unwrap();
        let b = split_folds(&ds, 5, 99).unwrap();
        assert_eq!(a, b);
        let c = split_folds(&ds, 5, 100).unwrap();
        assert_ne!(a, c);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]
        #[test]
        fn folds_partition_each_user(
            counts in proptest::collection::vec(1usize..40, 1..20),
            k in 2usize..8,
            seed in 0u64..1000,
        ) {
            let ds = tiny_dataset(&counts);
            let folds = split_folds(&ds, k, seed).unwrap();
            prop_assert_eq!(folds.len(), k);
            for fold in &folds {
                for u in 0..ds.num_users() {
                    let mut all: Vec<usize> = fold.train_items(u).iter()
                        .chain(fold.validation_items(u))
                        .chain(fold.test_items(u))
                        .copied().collect();
                    all.sort_unstable();
                    prop_assert_eq!(all.as_slice(), ds.feedback().items(u));
                    // Disjoint: total length equals union length (items unique per user).
                    let total = fold.train_items(u).len()
                        + fold.validation_items(u).len()
                        + fold.test_items(u).len();
                    prop_assert_eq!(total, ds.feedback().items(u).len());
                    prop_assert!(!fold.train_items(u).is_empty());
                    // Validation is 10% of the post-test pool, rounded down.
                    let pool = total - fold.test_items(u).len();
                    prop_assert_eq!(fold.validation_items(u).len(), pool / 10);
                }
            }
            // Across folds, each user's test shards partition their items.
            for u in 0..ds.num_users() {
                let c = ds.feedback().items(u).len();
                let mut test_union: Vec<usize> = folds.iter()
                    .flat_map(|f| f.test_items(u).iter().copied())
                    .collect();
                test_union.sort_unstable();
                if c >= k {
                    // No fold needed the keep-one-back rescue; shards partition exactly.
                    prop_assert_eq!(test_union.as_slice(), ds.feedback().items(u));
                    let sizes: Vec<usize> = folds.iter().map(|f| f.test_items(u).len()).collect();
                    let min = sizes.iter().min().unwrap();
                    let max = sizes.iter().max().unwrap();
                    prop_assert!(max - min <= 1);
                }
            }
        }
    }

    #[test]
    fn manifest_round_trip() {
        let ds = tiny_dataset(&[12, 7, 25, 1, 3]);
        let folds = split_folds(&ds, 4, 11).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("folds.tsv");
        export_fold_manifest(&path, &ds, &folds).unwrap();
        let loaded = load_fold_manifest(&path, &ds).unwrap();
        assert_eq!(folds, loaded);
    }

    #[test]
    fn manifest_rejects_unknown_ids_and_labels() {
        let ds = tiny_dataset(&[3, 3]);
        let f = write_tmp("fold\tsplit\tuser\titem\n0\ttrain\tu0\tghost\n");
        assert!(matches!(load_fold_manifest(f.path(), &ds), Err(Error::Parse { .. })));
        let f = write_tmp("fold\tsplit\tuser\titem\n0\tholdout\tu0\ti0\n");
        assert!(matches!(load_fold_manifest(f.path(), &ds), Err(Error::Parse { .. })));
        let f = write_tmp("0\ttrain\tu0\ti0\n");
        assert!(matches!(load_fold_manifest(f.path(), &ds), Err(Error::Parse { .. })));
    }

    #[test]
    fn cold_start_is_strict_threshold() {
        let ds = tiny_dataset(&[12, 7, 25]);
        let folds = split_folds(&ds, 3, 5).unwrap();
        let fold = &folds[0];
        for &max_fb in &[1usize, 5, 8, 100] {
            let cold = cold_start_users(fold, max_fb);
            for u in 0..ds.num_users() {
                let is_cold = fold.train_items(u).len() < max_fb;
                assert_eq!(cold.contains(&u), is_cold);
            }
            let mut sorted = cold.clone();
            sorted.sort_unstable();
            assert_eq!(cold, sorted);
        }
    }

    #[test]
    fn holdout_splits_per_user_followees() {
        let _ds = tiny_dataset(&[2, 2, 2, 2, 2, 2]);
        let mut edges = Vec::new();
        for u in 0..6usize {
            for v in 0..6usize {
                if u != v {
                    edges.push((u, v));
                }
            }
        }
        let g = SocialGraph::from_edges(6, &edges);
        let (kept, held) = holdout_followees(&g, 0.2, 17).unwrap();
        for u in 0..6 {
            assert_eq!(held.followees(u).len(), 1); // floor(0.2 * 5)
            assert_eq!(kept.followees(u).len(), 4);
            let mut union: Vec<usize> =
                kept.followees(u).iter().chain(held.followees(u)).copied().collect();
            union.sort_unstable();
            assert_eq!(union.as_slice(), g.followees(u));
        }
        // Deterministic in the seed.
        let (kept2, held2) = holdout_followees(&g, 0.2, 17).unwrap();
        assert_eq!(kept, kept2);
        assert_eq!(held, held2);
        assert!(matches!(holdout_followees(&g, 1.0, 17), Err(Error::Config(_))));
    }

    #[test]
    fn feedback_transpose_inverts_membership() {
        let fm = FeedbackMatrix::new(vec![vec![2, 0], vec![1], vec![0, 1, 2]], 3);
        let t = fm.transpose();
        assert_eq!(t[0], vec![0, 2]);
        assert_eq!(t[1], vec![1, 2]);
        assert_eq!(t[2], vec![0, 2]);
        assert_eq!(fm.nnz(), 6);
        assert!(fm.contains(0, 2) && !fm.contains(1, 2));
    }
}
