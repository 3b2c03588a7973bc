//! Minimax training loop, the pairwise baseline, and checkpointing.
//!
//! Default schedule interleaves per-instance: the generator proposes an item
//! for a user, the discriminator takes `d_steps_per_g_step` descent steps on
//! quads built from that proposal, then the generator takes one ascent step
//! against the freshly updated discriminator. `epoch_alternation` restores
//! the coarser schedule in which every proposal of an epoch is generated
//! under the epoch-start generator (implemented as a frozen clone rather
//! than materialising all per-user intermediates).

use std::path::Path;

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::data::{Dataset, FeedbackMatrix, FoldSplit};
use crate::discriminator::{bpr_step, discriminator_step, sample_quad, DiscriminatorParams};
use crate::error::{Error, Result};
use crate::eval::validation_ndcg;
use crate::generator::{
    generator_backward, pretrain_cdae, propose_item, GeneratorParams, SoftSelection,
};
use crate::hetgraph::SeededFriendSet;
use crate::linalg::Mat;
use crate::rng::{stream, tag};

#[derive(Clone, Debug)]
pub struct TrainConfig {
    pub latent_dim: usize,
    pub hidden_units: usize,
    pub tau: f64,
    pub lambda: f64,
    pub lr_d: f64,
    pub lr_g: f64,
    /// Multiplicative per-epoch decay applied to both learning rates.
    pub lr_decay: f64,
    pub batch_size: usize,
    pub pretrain_epochs: usize,
    pub pretrain_lr: f64,
    pub pretrain_negatives: usize,
    pub q_corrupt: f64,
    pub max_epochs: usize,
    pub d_steps_per_g_step: usize,
    pub patience: usize,
    /// Plain pairwise epochs for the discriminator before the minimax loop.
    pub warmup_epochs: usize,
    pub epoch_alternation: bool,
    /// Feed the discriminator a hardened (one-hot) z instead of the soft one.
    pub hard_z: bool,
    /// Ablation: replace the generator with a uniform friend/item sampler and
    /// skip all generator updates.
    pub random_friends: bool,
    /// Debug: hash each network before and after the opposing update and
    /// assert it did not move. Costly; meant for small fixtures.
    pub freeze_checks: bool,
    pub master_seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            latent_dim: 50,
            hidden_units: 200,
            tau: 0.2,
            lambda: 0.001,
            lr_d: 0.05,
            lr_g: 0.05,
            lr_decay: 0.9,
            batch_size: 512,
            pretrain_epochs: 30,
            pretrain_lr: 0.05,
            pretrain_negatives: 5,
            q_corrupt: 0.2,
            max_epochs: 200,
            d_steps_per_g_step: 1,
            patience: 10,
            warmup_epochs: 0,
            epoch_alternation: false,
            hard_z: false,
            random_friends: false,
            freeze_checks: false,
            master_seed: 42,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        let fail = |msg: &str| Err(Error::Config(msg.into()));
        if self.latent_dim < 1 {
            return fail("latent dimension must be >= 1");
        }
        if self.hidden_units < 1 {
            return fail("hidden units must be >= 1");
        }
        if self.tau <= 0.0 || !self.tau.is_finite() {
            return fail("temperature must be positive");
        }
        if self.lambda < 0.0 || !self.lambda.is_finite() {
            return fail("regularisation must be non-negative");
        }
        if self.lr_d <= 0.0 || self.lr_g <= 0.0 || self.pretrain_lr <= 0.0 {
            return fail("learning rates must be positive");
        }
        if !(0.0 < self.lr_decay && self.lr_decay <= 1.0) {
            return fail("learning-rate decay must be in (0, 1]");
        }
        if self.batch_size < 1 {
            return fail("batch size must be >= 1");
        }
        if !(0.0..=1.0).contains(&self.q_corrupt) {
            return fail("corruption probability must be in [0, 1]");
        }
        if self.d_steps_per_g_step < 1 {
            return fail("need at least one discriminator step per generator step");
        }
        if self.patience < 1 {
            return fail("patience must be >= 1");
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EpochRecord {
    pub epoch: usize,
    pub loss_d: f64,
    /// NaN for models that never update a generator (bpr, random).
    pub loss_g: f64,
    pub val_ndcg: f64,
}

/// Early-stopping bookkeeping: strict improvement of validation NDCG@10
/// resets the stale counter; training stops once it reaches the patience.
#[derive(Clone, Debug)]
pub struct TrainState {
    pub history: Vec<EpochRecord>,
    pub best_epoch: Option<usize>,
    pub best_val_ndcg: f64,
    stale: usize,
}

impl TrainState {
    pub fn new() -> Self {
        TrainState {
            history: Vec::new(),
            best_epoch: None,
            best_val_ndcg: f64::NEG_INFINITY,
            stale: 0,
        }
    }

    /// Returns true when the record strictly improves the best validation
    /// score seen so far.
    pub fn record(&mut self, rec: EpochRecord) -> bool {
        let improved = rec.val_ndcg > self.best_val_ndcg;
        if improved {
            self.best_val_ndcg = rec.val_ndcg;
            self.best_epoch = Some(rec.epoch);
            self.stale = 0;
        } else {
            self.stale += 1;
        }
        self.history.push(rec);
        improved
    }

    pub fn epochs_since_improvement(&self) -> usize {
        self.stale
    }

    pub fn epochs_run(&self) -> usize {
        self.history.len()
    }
}

impl Default for TrainState {
    fn default() -> Self {
        Self::new()
    }
}

/// FNV-1a over the parameter bytes; identical layout implies identical hash.
fn hash_f64s<'a>(parts: impl Iterator<Item = &'a [f64]>) -> u64 {
    let mut h = 0xcbf2_9ce4_8422_2325u64;
    for part in parts {
        for v in part {
            for b in v.to_le_bytes() {
                h ^= b as u64;
                h = h.wrapping_mul(0x1000_0000_01b3);
            }
        }
    }
    h
}

pub fn generator_hash(g: &GeneratorParams) -> u64 {
    hash_f64s(
        [
            g.w_in.data(),
            g.b_hidden.as_slice(),
            g.u_node.data(),
            g.w_out.data(),
            g.b_out.as_slice(),
            g.h_scores.data(),
        ]
        .into_iter(),
    )
}

pub fn discriminator_hash(d: &DiscriminatorParams) -> u64 {
    let m = d.num_users();
    let n = d.num_items();
    let rows = (0..m).map(|u| d.user_vector(u)).chain((0..n).map(|i| d.item_vector(i)));
    hash_f64s(rows)
}

/// Uniform one-hot friend (≠ u) and a uniform unconsumed item from that
/// friend's profile. The Random ablation's stand-in for the generator.
fn random_proposal(
    r: &FeedbackMatrix,
    u: usize,
    m: usize,
    rng: &mut ChaCha8Rng,
) -> Option<SoftSelection> {
    let friend = loop {
        let f = rng.gen_range(0..m);
        if f != u {
            break f;
        }
    };
    let cands: Vec<usize> = r
        .items(friend)
        .iter()
        .filter(|&&j| !r.contains(u, j))
        .copied()
        .collect();
    if cands.is_empty() {
        return None;
    }
    let pick = cands[rng.gen_range(0..cands.len())];
    Some(SoftSelection::one_hot(r.num_items(), pick))
}

fn check_finite(
    epoch: usize,
    loss_d: f64,
    loss_g: f64,
    gen: Option<&GeneratorParams>,
    disc: &DiscriminatorParams,
) -> Result<()> {
    let fault = |msg: &str| {
        Err(Error::NumericFault {
            epoch,
            msg: msg.into(),
        })
    };
    if !loss_d.is_finite() {
        return fault("discriminator loss is not finite");
    }
    if !loss_g.is_nan() && !loss_g.is_finite() {
        return fault("generator loss is not finite");
    }
    if !disc.all_finite() {
        return fault("discriminator parameters are not finite");
    }
    if let Some(g) = gen {
        if !g.all_finite() {
            return fault("generator parameters are not finite");
        }
    }
    Ok(())
}

fn bpr_epoch(
    disc: &mut DiscriminatorParams,
    pairs: &[(usize, usize)],
    r_train: &FeedbackMatrix,
    lr: f64,
    rng: &mut ChaCha8Rng,
) -> (f64, usize) {
    let n = r_train.num_items();
    let mut order: Vec<usize> = (0..pairs.len()).collect();
    order.shuffle(rng);
    let mut loss_sum = 0.0;
    let mut count = 0usize;
    for &pi in &order {
        let (u, i) = pairs[pi];
        if r_train.items(u).len() == n {
            continue;
        }
        let j = loop {
            let c = rng.gen_range(0..n);
            if !r_train.contains(u, c) {
                break c;
            }
        };
        loss_sum += bpr_step(disc, u, i, j, lr);
        count += 1;
    }
    (loss_sum, count)
}

/// Train generator and discriminator as a minimax game on the fold's train
/// split. Returns the parameters from the best validation epoch (or the
/// pretrained/initial parameters when `max_epochs` is 0) plus the epoch
/// history.
pub fn adversarial_train(
    dataset: &Dataset,
    fold: &FoldSplit,
    seeds: &SeededFriendSet,
    cfg: &TrainConfig,
) -> Result<(GeneratorParams, DiscriminatorParams, TrainState)> {
    cfg.validate()?;
    let m = dataset.num_users();
    let n = dataset.num_items();
    if m < 2 {
        return Err(Error::DegenerateDistribution);
    }
    if !cfg.random_friends && (0..m).all(|u| seeds.friends(u).is_empty()) {
        return Err(Error::Config("no user has any seeded friends".into()));
    }
    let seed = cfg.master_seed;
    let r_train = fold.train_matrix(n);

    let mut gen = GeneratorParams::init(
        m,
        n,
        cfg.hidden_units,
        cfg.tau,
        cfg.q_corrupt,
        &mut stream(seed, &[tag::GENERATOR_INIT]),
    );
    let mut disc = DiscriminatorParams::init(
        m,
        n,
        cfg.latent_dim,
        cfg.lambda,
        &mut stream(seed, &[tag::DISCRIMINATOR_INIT]),
    );
    if !cfg.random_friends {
        pretrain_cdae(
            &mut gen,
            seeds,
            cfg.pretrain_epochs,
            cfg.pretrain_lr,
            cfg.pretrain_negatives,
            seed,
        );
    }

    let pairs: Vec<(usize, usize)> = fold.iter_train().collect();
    for we in 0..cfg.warmup_epochs {
        let mut rng = stream(seed, &[tag::WARMUP, we as u64]);
        bpr_epoch(&mut disc, &pairs, &r_train, cfg.lr_d, &mut rng);
    }

    let mut state = TrainState::new();
    let mut best = (gen.clone(), disc.clone());

    for epoch in 0..cfg.max_epochs {
        let decay = cfg.lr_decay.powi(epoch as i32);
        let lr_d = cfg.lr_d * decay;
        let lr_g = cfg.lr_g * decay;
        // The literal alternation schedule: all proposals of this epoch come
        // from (and generator gradients are evaluated at) the epoch-start θ.
        let frozen_gen = if cfg.epoch_alternation { Some(gen.clone()) } else { None };

        let mut order: Vec<usize> = (0..m).collect();
        order.shuffle(&mut stream(seed, &[tag::EPOCH_ORDER, epoch as u64]));

        let mut loss_d_sum = 0.0;
        let mut d_count = 0usize;
        let mut loss_g_sum = 0.0;
        let mut g_count = 0usize;
        // Batches only group work; updates are per-instance SGD either way.
        for chunk in order.chunks(cfg.batch_size) {
            for &u in chunk {
                let mut rng = stream(seed, &[tag::INSTANCE, epoch as u64, u as u64]);
                if cfg.random_friends {
                    let Some(z) = random_proposal(&r_train, u, m, &mut rng) else {
                        continue;
                    };
                    for _ in 0..cfg.d_steps_per_g_step {
                        let Some(quad) = sample_quad(&r_train, u, z.clone(), &mut rng) else {
                            break;
                        };
                        loss_d_sum += discriminator_step(&mut disc, &quad, lr_d);
                        d_count += 1;
                    }
                    continue;
                }

                if seeds.friends(u).is_empty() {
                    continue;
                }
                let inst = {
                    let gp = frozen_gen.as_ref().unwrap_or(&gen);
                    let gen_hash = cfg.freeze_checks.then(|| generator_hash(&gen));
                    let proposal = propose_item(gp, &r_train, seeds, u, true, &mut rng)?;
                    if let Some(h) = gen_hash {
                        debug_assert_eq!(h, generator_hash(&gen), "proposal moved the generator");
                    }
                    match proposal {
                        Some(inst) => inst,
                        None => continue,
                    }
                };
                let mut last_pos = None;
                let gen_hash = cfg.freeze_checks.then(|| generator_hash(&gen));
                for _ in 0..cfg.d_steps_per_g_step {
                    let z = if cfg.hard_z {
                        inst.item_sample.hardened()
                    } else {
                        inst.item_sample.clone()
                    };
                    let Some(quad) = sample_quad(&r_train, u, z, &mut rng) else {
                        break;
                    };
                    loss_d_sum += discriminator_step(&mut disc, &quad, lr_d);
                    d_count += 1;
                    last_pos = Some(quad.pos_item);
                }
                if let Some(h) = gen_hash {
                    assert_eq!(h, generator_hash(&gen), "discriminator step moved the generator");
                }
                if let Some(i) = last_pos {
                    let disc_hash = cfg.freeze_checks.then(|| discriminator_hash(&disc));
                    let grads = {
                        let gp = frozen_gen.as_ref().unwrap_or(&gen);
                        generator_backward(gp, &disc, &r_train, i, &inst)
                    };
                    loss_g_sum += grads.loss;
                    g_count += 1;
                    gen.apply_ascent(&grads, lr_g);
                    if let Some(h) = disc_hash {
                        assert_eq!(
                            h,
                            discriminator_hash(&disc),
                            "generator step moved the discriminator"
                        );
                    }
                }
            }
        }

        let loss_d = if d_count > 0 { loss_d_sum / d_count as f64 } else { 0.0 };
        let loss_g = if cfg.random_friends {
            f64::NAN
        } else if g_count > 0 {
            loss_g_sum / g_count as f64
        } else {
            0.0
        };
        let gen_ref = (!cfg.random_friends).then_some(&gen);
        check_finite(epoch, loss_d, loss_g, gen_ref, &disc)?;

        let val = validation_ndcg(&disc, fold, 10);
        let improved = state.record(EpochRecord {
            epoch,
            loss_d,
            loss_g,
            val_ndcg: val,
        });
        if improved {
            best = (gen.clone(), disc.clone());
        }
        if state.epochs_since_improvement() >= cfg.patience {
            break;
        }
    }
    Ok((best.0, best.1, state))
}

/// Plain BPR-MF baseline with the same split, early stopping, and decay.
pub fn train_bpr_baseline(
    dataset: &Dataset,
    fold: &FoldSplit,
    cfg: &TrainConfig,
) -> Result<(DiscriminatorParams, TrainState)> {
    cfg.validate()?;
    let n = dataset.num_items();
    let r_train = fold.train_matrix(n);
    let seed = cfg.master_seed;
    let mut disc = DiscriminatorParams::init(
        dataset.num_users(),
        n,
        cfg.latent_dim,
        cfg.lambda,
        &mut stream(seed, &[tag::DISCRIMINATOR_INIT]),
    );
    let pairs: Vec<(usize, usize)> = fold.iter_train().collect();
    if pairs.is_empty() {
        return Err(Error::EmptyDataset);
    }

    let mut state = TrainState::new();
    let mut best = disc.clone();
    for epoch in 0..cfg.max_epochs {
        let lr = cfg.lr_d * cfg.lr_decay.powi(epoch as i32);
        let mut rng = stream(seed, &[tag::BPR_EPOCH, epoch as u64]);
        let (loss_sum, count) = bpr_epoch(&mut disc, &pairs, &r_train, lr, &mut rng);
        let loss_d = if count > 0 { loss_sum / count as f64 } else { 0.0 };
        check_finite(epoch, loss_d, f64::NAN, None, &disc)?;
        let val = validation_ndcg(&disc, fold, 10);
        let improved = state.record(EpochRecord {
            epoch,
            loss_d,
            loss_g: f64::NAN,
            val_ndcg: val,
        });
        if improved {
            best = disc.clone();
        }
        if state.epochs_since_improvement() >= cfg.patience {
            break;
        }
    }
    Ok((best, state))
}

/// A trained model plus the provenance needed to evaluate it later.
/// `generator` is absent for discriminator-only models (bpr, random).
#[derive(Clone, Debug, PartialEq)]
pub struct Checkpoint {
    pub generator: Option<GeneratorParams>,
    pub discriminator: DiscriminatorParams,
    pub master_seed: u64,
    /// Free-form key=value pairs written by the caller, round-tripped
    /// verbatim (order preserved).
    pub config_echo: Vec<(String, String)>,
}

const CKPT_MAGIC: &[u8; 4] = b"RSGN";
const CKPT_VERSION: u32 = 1;

struct Cursor<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn take(&mut self, len: usize, what: &str) -> Result<&'a [u8]> {
        if self.pos + len > self.buf.len() {
            return Err(Error::Format(format!("truncated while reading {what}")));
        }
        let s = &self.buf[self.pos..self.pos + len];
        self.pos += len;
        Ok(s)
    }

    fn u32(&mut self, what: &str) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4, what)?.try_into().unwrap()))
    }

    fn u64(&mut self, what: &str) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8, what)?.try_into().unwrap()))
    }

    fn f64(&mut self, what: &str) -> Result<f64> {
        Ok(f64::from_le_bytes(self.take(8, what)?.try_into().unwrap()))
    }

    fn f64s(&mut self, count: usize, what: &str) -> Result<Vec<f64>> {
        let raw = self.take(count * 8, what)?;
        Ok(raw
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
            .collect())
    }
}

fn push_f64s(out: &mut Vec<u8>, vals: &[f64]) {
    out.reserve(vals.len() * 8);
    for v in vals {
        out.extend_from_slice(&v.to_le_bytes());
    }
}

/// Binary layout (all little-endian): magic "RSGN", u32 version, u32 m/n/d/h,
/// u64 master_seed, f64 lambda; when h > 0: f64 tau, f64 q_corrupt, then
/// generator arrays W_in (m×h), b_hidden (h), U_node (m×h), W_out (h×m),
/// b_out (m), H (m×n); always P (m×d), Q (n×d); then u32 echo-line count and
/// length-prefixed `key=value` lines. h = 0 marks a discriminator-only
/// checkpoint with no generator arrays at all.
pub fn save_checkpoint(path: &Path, ckpt: &Checkpoint) -> Result<()> {
    let disc = &ckpt.discriminator;
    let m = disc.num_users();
    let n = disc.num_items();
    let d = disc.dim();
    let h = ckpt.generator.as_ref().map_or(0, |g| g.hidden_units());
    if let Some(g) = &ckpt.generator {
        assert_eq!(g.num_users(), m, "generator/discriminator user mismatch");
        assert_eq!(g.num_items(), n, "generator/discriminator item mismatch");
        assert!(h > 0, "generator checkpoints need at least one hidden unit");
    }
    let mut out = Vec::new();
    out.extend_from_slice(CKPT_MAGIC);
    out.extend_from_slice(&CKPT_VERSION.to_le_bytes());
    for dim in [m, n, d, h] {
        out.extend_from_slice(&(dim as u32).to_le_bytes());
    }
    out.extend_from_slice(&ckpt.master_seed.to_le_bytes());
    out.extend_from_slice(&disc.lambda.to_le_bytes());
    if let Some(g) = &ckpt.generator {
        out.extend_from_slice(&g.tau.to_le_bytes());
        out.extend_from_slice(&g.q_corrupt.to_le_bytes());
        push_f64s(&mut out, g.w_in.data());
        push_f64s(&mut out, &g.b_hidden);
        push_f64s(&mut out, g.u_node.data());
        push_f64s(&mut out, g.w_out.data());
        push_f64s(&mut out, &g.b_out);
        push_f64s(&mut out, g.h_scores.data());
    }
    push_f64s(&mut out, collect_rows(m, |u| disc.user_vector(u)).as_slice());
    push_f64s(&mut out, collect_rows(n, |i| disc.item_vector(i)).as_slice());
    out.extend_from_slice(&(ckpt.config_echo.len() as u32).to_le_bytes());
    for (k, v) in &ckpt.config_echo {
        let line = format!("{k}={v}");
        out.extend_from_slice(&(line.len() as u32).to_le_bytes());
        out.extend_from_slice(line.as_bytes());
    }
    std::fs::write(path, &out).map_err(|e| Error::io(path, e))
}

fn collect_rows<'a, F: Fn(usize) -> &'a [f64]>(count: usize, row: F) -> Vec<f64> {
    let mut v = Vec::new();
    for i in 0..count {
        v.extend_from_slice(row(i));
    }
    v
}

/// Read a checkpoint back. Unreadable or malformed files (bad magic, version,
/// truncation, trailing bytes, non-UTF-8 echo) are all `Error::Format`.
pub fn load_checkpoint(path: &Path) -> Result<Checkpoint> {
    let buf = std::fs::read(path)
        .map_err(|e| Error::Format(format!("{}: {e}", path.display())))?;
    let mut cur = Cursor { buf: &buf, pos: 0 };
    if cur.take(4, "magic")? != CKPT_MAGIC {
        return Err(Error::Format("bad magic, not a checkpoint file".into()));
    }
    let version = cur.u32("version")?;
    if version != CKPT_VERSION {
        return Err(Error::Format(format!("unsupported version {version}")));
    }
    let m = cur.u32("user count")? as usize;
    let n = cur.u32("item count")? as usize;
    let d = cur.u32("latent dimension")? as usize;
    let h = cur.u32("hidden units")? as usize;
    if m == 0 || n == 0 || d == 0 {
        return Err(Error::Format("zero-sized model dimensions".into()));
    }
    let master_seed = cur.u64("master seed")?;
    let lambda = cur.f64("lambda")?;

    let generator = if h > 0 {
        let tau = cur.f64("tau")?;
        let q_corrupt = cur.f64("q_corrupt")?;
        if tau <= 0.0 || !(0.0..=1.0).contains(&q_corrupt) {
            return Err(Error::Format("invalid generator hyperparameters".into()));
        }
        let w_in = Mat::from_vec(m, h, cur.f64s(m * h, "W_in")?);
        let b_hidden = cur.f64s(h, "b_hidden")?;
        let u_node = Mat::from_vec(m, h, cur.f64s(m * h, "U_node")?);
        let w_out = Mat::from_vec(h, m, cur.f64s(h * m, "W_out")?);
        let b_out = cur.f64s(m, "b_out")?;
        let h_scores = Mat::from_vec(m, n, cur.f64s(m * n, "H")?);
        Some(GeneratorParams {
            w_in,
            b_hidden,
            u_node,
            w_out,
            b_out,
            h_scores,
            tau,
            q_corrupt,
        })
    } else {
        None
    };

    if !lambda.is_finite() || lambda < 0.0 {
        return Err(Error::Format("invalid regularisation weight".into()));
    }
    let p = Mat::from_vec(m, d, cur.f64s(m * d, "P")?);
    let q = Mat::from_vec(n, d, cur.f64s(n * d, "Q")?);
    let disc = DiscriminatorParams::from_parts(p, q, lambda);

    let lines = cur.u32("echo line count")? as usize;
    let mut config_echo = Vec::with_capacity(lines);
    for idx in 0..lines {
        let len = cur.u32("echo line length")? as usize;
        let raw = cur.take(len, "echo line")?;
        let line = std::str::from_utf8(raw)
            .map_err(|_| Error::Format(format!("echo line {idx} is not UTF-8")))?;
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| Error::Format(format!("echo line {idx} missing '='")))?;
        config_echo.push((k.to_string(), v.to_string()));
    }
    if cur.pos != buf.len() {
        return Err(Error::Format(format!(
            "{} trailing bytes after checkpoint payload",
            buf.len() - cur.pos
        )));
    }
    Ok(Checkpoint {
        generator,
        discriminator: disc,
        master_seed,
        config_echo,
    })
}
