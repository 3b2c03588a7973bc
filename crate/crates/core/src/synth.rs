//! Deterministic planted-structure fixtures.
//!
//! The fixture plants `groups` disjoint communities. Each community has one
//! mentor (its first user) who consumes every community item; the remaining
//! users consume a random in-group subset plus exactly one out-group noise
//! item. Seeded friend sets point every user at their mentor, so a working
//! generator should route item proposals through the mentor's full profile.
//! Tests and desk-scale calibration runs lean on this structure: group
//! membership is recoverable from co-consumption, and the mentor is the
//! highest-value friend by construction.

use std::path::Path;

use rand::seq::SliceRandom;
use rand::Rng;

use crate::data::{Dataset, InteractionRecord, SocialGraph};
use crate::error::{Error, Result};
use crate::hetgraph::SeededFriendSet;
use crate::rng::{stream, tag};

#[derive(Clone, Copy, Debug)]
pub struct PlantedConfig {
    pub groups: usize,
    pub users_per_group: usize,
    pub items_per_group: usize,
    /// In-group items each non-mentor consumes; mentors consume all of them.
    pub consumed_per_user: usize,
    pub seed: u64,
}

impl Default for PlantedConfig {
    fn default() -> Self {
        PlantedConfig {
            groups: 2,
            users_per_group: 10,
            items_per_group: 15,
            consumed_per_user: 12,
            seed: 7,
        }
    }
}

pub struct PlantedData {
    pub cfg: PlantedConfig,
    /// Implicit-feedback records in user-index order, so dense user ids from
    /// `build_dataset` equal the generation indices.
    pub records: Vec<InteractionRecord>,
    /// Raw-id (truster, trustee) pairs: mentor, two cyclic-next groupmates,
    /// one cross-group noise follow per user.
    pub social_pairs: Vec<(String, String)>,
}

pub fn raw_user(idx: usize) -> String {
    format!("u{idx}")
}

pub fn raw_item(idx: usize) -> String {
    format!("i{idx}")
}

pub fn planted_dataset(cfg: &PlantedConfig) -> PlantedData {
    assert!(cfg.groups >= 2, "need at least two groups");
    assert!(cfg.users_per_group >= 3, "need at least three users per group");
    assert!(
        (1..=cfg.items_per_group).contains(&cfg.consumed_per_user),
        "consumed_per_user must be in 1..=items_per_group"
    );
    let (g, p, n) = (cfg.groups, cfg.users_per_group, cfg.items_per_group);
    let mut rng = stream(cfg.seed, &[tag::SYNTH]);
    let mut records = Vec::new();
    let mut social_pairs = Vec::new();

    for group in 0..g {
        let user_base = group * p;
        let item_base = group * n;
        for r in 0..p {
            let idx = user_base + r;
            let mut items: Vec<usize> = if r == 0 {
                (item_base..item_base + n).collect()
            } else {
                let mut pool: Vec<usize> = (item_base..item_base + n).collect();
                pool.shuffle(&mut rng);
                pool.truncate(cfg.consumed_per_user);
                // One noise item from a uniformly chosen other group.
                let other = (group + 1 + rng.gen_range(0..g - 1)) % g;
                pool.push(other * n + rng.gen_range(0..n));
                pool
            };
            items.sort_unstable();
            for item in items {
                records.push(InteractionRecord {
                    user: raw_user(idx),
                    item: raw_item(item),
                    rating: 1.0,
                    implicit: true,
                });
            }

            let span = p - 1;
            let mut follows = vec![
                user_base,                           // mentor
                user_base + 1 + (r % span),          // cyclic next non-mentor
                user_base + 1 + ((r + 1) % span),    // and the one after
            ];
            let noise_group = (group + 1 + rng.gen_range(0..g - 1)) % g;
            follows.push(noise_group * p + rng.gen_range(0..p));
            follows.retain(|&f| f != idx);
            follows.dedup();
            for f in follows {
                social_pairs.push((raw_user(idx), raw_user(f)));
            }
        }
    }
    PlantedData {
        cfg: *cfg,
        records,
        social_pairs,
    }
}

impl PlantedData {
    pub fn num_users(&self) -> usize {
        self.cfg.groups * self.cfg.users_per_group
    }

    pub fn mentor_of(&self, user_idx: usize) -> usize {
        (user_idx / self.cfg.users_per_group) * self.cfg.users_per_group
    }

    pub fn is_mentor(&self, user_idx: usize) -> bool {
        user_idx % self.cfg.users_per_group == 0
    }

    /// Ground-truth seed sets: each user gets their mentor plus one cyclic
    /// same-group distractor; mentors get the two users after them. Scores
    /// mark the first entry as the strongest.
    pub fn seeds(&self, ds: &Dataset) -> SeededFriendSet {
        let p = self.cfg.users_per_group;
        let m = self.num_users();
        assert_eq!(ds.num_users(), m, "dataset does not match this fixture");
        let mut friends = Vec::with_capacity(m);
        let mut scores = Vec::with_capacity(m);
        for idx in 0..m {
            debug_assert_eq!(ds.dense_user(&raw_user(idx)), Some(idx));
            let base = self.mentor_of(idx);
            let r = idx - base;
            let pair = if r == 0 {
                [idx + 1, idx + 2]
            } else {
                [base, base + 1 + (r % (p - 1))]
            };
            debug_assert!(pair[0] != idx && pair[1] != idx && pair[0] != pair[1]);
            friends.push(pair.to_vec());
            scores.push(vec![1.0, 0.8]);
        }
        SeededFriendSet::new(friends, scores)
    }

    /// The planted trust graph over dense ids.
    pub fn social_graph(&self, ds: &Dataset) -> SocialGraph {
        let edges: Vec<(usize, usize)> = self
            .social_pairs
            .iter()
            .map(|(a, b)| {
                (
                    ds.dense_user(a).expect("fixture user missing"),
                    ds.dense_user(b).expect("fixture user missing"),
                )
            })
            .collect();
        SocialGraph::from_edges(ds.num_users(), &edges)
    }

    /// Write `ratings.tsv` (implicit, two columns) and `trust.tsv` into `dir`.
    pub fn write_files(&self, dir: &Path) -> Result<()> {
        let mut ratings = String::from("# user\titem\n");
        for rec in &self.records {
            ratings.push_str(&format!("{}\t{}\n", rec.user, rec.item));
        }
        let rpath = dir.join("ratings.tsv");
        std::fs::write(&rpath, ratings).map_err(|e| Error::io(&rpath, e))?;
        let mut trust = String::from("# truster\ttrustee\n");
        for (a, b) in &self.social_pairs {
            trust.push_str(&format!("{a}\t{b}\n"));
        }
        let tpath = dir.join("trust.tsv");
        std::fs::write(&tpath, trust).map_err(|e| Error::io(&tpath, e))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{build_dataset, load_interactions, load_social};

    #[test]
    fn shape_matches_config() {
        let cfg = PlantedConfig::default();
        let data = planted_dataset(&cfg);
        let expected = cfg.groups
            * (cfg.items_per_group + (cfg.users_per_group - 1) * (cfg.consumed_per_user + 1));
        assert_eq!(data.records.len(), expected);
        let ds = build_dataset(&data.records).unwrap();
        assert_eq!(ds.num_users(), 20);
        assert_eq!(ds.num_items(), 30);
        // Mentors consume their whole group's catalogue.
        for mentor in [0usize, 10] {
            assert_eq!(ds.feedback().items(mentor).len(), cfg.items_per_group);
        }
        // Everyone else: in-group subset plus one noise item.
        for u in 0..20 {
            if !data.is_mentor(u) {
                assert_eq!(ds.feedback().items(u).len(), cfg.consumed_per_user + 1);
            }
        }
    }

    #[test]
    fn non_mentors_consume_in_group_except_one_noise_item() {
        let cfg = PlantedConfig::default();
        let data = planted_dataset(&cfg);
        let per_user: std::collections::HashMap<&str, Vec<&str>> =
            data.records.iter().fold(Default::default(), |mut acc, r| {
                acc.entry(r.user.as_str()).or_default().push(r.item.as_str());
                acc
            });
        for idx in 0..data.num_users() {
            if data.is_mentor(idx) {
                continue;
            }
            let group = idx / cfg.users_per_group;
            let lo = group * cfg.items_per_group;
            let hi = lo + cfg.items_per_group;
            let out_of_group = per_user[raw_user(idx).as_str()]
                .iter()
                .filter(|item| {
                    let id: usize = item[1..].parse().unwrap();
                    !(lo..hi).contains(&id)
                })
                .count();
            assert_eq!(out_of_group, 1, "user {idx} should have exactly one noise item");
        }
    }

    #[test]
    fn deterministic_per_seed() {
        let cfg = PlantedConfig::default();
        let a = planted_dataset(&cfg);
        let b = planted_dataset(&cfg);
        assert_eq!(a.records, b.records);
        assert_eq!(a.social_pairs, b.social_pairs);
        let mut other = cfg;
        other.seed = 8;
        let c = planted_dataset(&other);
        assert_ne!(a.records, c.records);
    }

    #[test]
    fn seeds_point_at_the_mentor() {
        let data = planted_dataset(&PlantedConfig::default());
        let ds = build_dataset(&data.records).unwrap();
        let seeds = data.seeds(&ds);
        for u in 0..ds.num_users() {
            let friends = seeds.friends(u);
            assert_eq!(friends.len(), 2);
            assert!(!friends.contains(&u));
            if !data.is_mentor(u) {
                assert_eq!(friends[0], data.mentor_of(u));
            }
            assert_eq!(seeds.scores(u), &[1.0, 0.8]);
        }
    }

    #[test]
    fn files_round_trip_through_the_loaders() {
        let data = planted_dataset(&PlantedConfig::default());
        let dir = tempfile::tempdir().unwrap();
        data.write_files(dir.path()).unwrap();
        let (records, report) = load_interactions(&dir.path().join("ratings.tsv"), 0.0).unwrap();
        assert_eq!(report.duplicates, 0);
        assert_eq!(records.len(), data.records.len());
        let ds = build_dataset(&records).unwrap();
        let (graph, sreport) = load_social(&dir.path().join("trust.tsv"), &ds).unwrap();
        assert_eq!(sreport.unknown_users, 0);
        assert_eq!(sreport.self_loops, 0);
        assert_eq!(graph.num_edges(), data.social_pairs.len() - sreport.duplicates);
        // The planted graph from raw pairs matches the loaded one.
        let direct = data.social_graph(&ds);
        assert_eq!(graph, direct);
    }
}
