//! Matrix-factorisation ranker trained against generated social samples.
//!
//! The adversarial objective scores each training instance as a quad
//! (u, i, z, j): consumed item i should beat the generated soft item z, which
//! should beat the random negative j. Loss
//! −[log σ(x_ui − x_uz) + log σ(x_uz − x_uj)] plus L2 on the touched rows.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::data::FeedbackMatrix;
use crate::generator::{SoftSelection, SUPPORT_CUTOFF};
use crate::linalg::{axpy, dot, log_logistic, logistic, norm_sq, Mat};

#[derive(Clone, Debug, PartialEq)]
pub struct DiscriminatorParams {
    p: Mat, // m × d user factors
    q: Mat, // n × d item factors
    pub lambda: f64,
}

impl DiscriminatorParams {
    /// Factors uniform ±0.05, P drawn before Q (order frozen).
    pub fn init(
        num_users: usize,
        num_items: usize,
        dim: usize,
        lambda: f64,
        rng: &mut impl Rng,
    ) -> Self {
        assert!(dim >= 1, "latent dimension must be >= 1");
        assert!(lambda >= 0.0, "regularisation must be non-negative");
        DiscriminatorParams {
            p: Mat::uniform(num_users, dim, -0.05, 0.05, rng),
            q: Mat::uniform(num_items, dim, -0.05, 0.05, rng),
            lambda,
        }
    }

    pub fn num_users(&self) -> usize {
        self.p.rows()
    }

    pub fn num_items(&self) -> usize {
        self.q.rows()
    }

    pub fn dim(&self) -> usize {
        self.p.cols()
    }

    pub fn user_vector(&self, u: usize) -> &[f64] {
        self.p.row(u)
    }

    pub fn item_vector(&self, i: usize) -> &[f64] {
        self.q.row(i)
    }

    #[inline]
    pub fn score(&self, u: usize, i: usize) -> f64 {
        dot(self.p.row(u), self.q.row(i))
    }

    /// Expected score of a soft selection: Σ z_j x_uj over the support.
    pub fn soft_score(&self, u: usize, z: &SoftSelection) -> f64 {
        z.support(SUPPORT_CUTOFF)
            .map(|(j, w)| w * self.score(u, j))
            .sum()
    }

    pub fn all_finite(&self) -> bool {
        self.p.all_finite() && self.q.all_finite()
    }

    pub(crate) fn p_mut(&mut self) -> &mut Mat {
        &mut self.p
    }

    pub(crate) fn q_mut(&mut self) -> &mut Mat {
        &mut self.q
    }

    /// Assemble from explicit factor matrices. Checkpoint loading and
    /// oracle fixtures go through here; `init` is the training entry.
    pub fn from_parts(p: Mat, q: Mat, lambda: f64) -> Self {
        assert_eq!(p.cols(), q.cols(), "factor dimensions must agree");
        DiscriminatorParams { p, q, lambda }
    }
}

/// One adversarial training instance.
#[derive(Clone, Debug)]
pub struct TrainingQuad {
    pub user: usize,
    pub pos_item: usize,
    pub neg_item: usize,
    pub z: SoftSelection,
}

/// Pair the generated z with a uniformly drawn consumed item i and a
/// uniformly drawn never-consumed negative j. `None` when the user has no
/// train items or no negative exists.
pub fn sample_quad(
    r: &FeedbackMatrix,
    u: usize,
    z: SoftSelection,
    rng: &mut ChaCha8Rng,
) -> Option<TrainingQuad> {
    let items = r.items(u);
    if items.is_empty() || items.len() == r.num_items() {
        return None;
    }
    let pos_item = items[rng.gen_range(0..items.len())];
    let neg_item = loop {
        let c = rng.gen_range(0..r.num_items());
        if !r.contains(u, c) {
            break c;
        }
    };
    Some(TrainingQuad {
        user: u,
        pos_item,
        neg_item,
        z,
    })
}

fn quad_regulariser(params: &DiscriminatorParams, quad: &TrainingQuad) -> f64 {
    let mut reg = norm_sq(params.p.row(quad.user))
        + norm_sq(params.q.row(quad.pos_item))
        + norm_sq(params.q.row(quad.neg_item));
    for (k, w) in quad.z.support(SUPPORT_CUTOFF) {
        reg += w * norm_sq(params.q.row(k));
    }
    params.lambda * reg
}

pub fn discriminator_loss(params: &DiscriminatorParams, quad: &TrainingQuad) -> f64 {
    let x_ui = params.score(quad.user, quad.pos_item);
    let x_uz = params.soft_score(quad.user, &quad.z);
    let x_uj = params.score(quad.user, quad.neg_item);
    -(log_logistic(x_ui - x_uz) + log_logistic(x_uz - x_uj)) + quad_regulariser(params, quad)
}

fn acc<'a>(entries: &'a mut Vec<(usize, Vec<f64>)>, item: usize, d: usize) -> &'a mut Vec<f64> {
    if let Some(pos) = entries.iter().position(|(i, _)| *i == item) {
        return &mut entries[pos].1;
    }
    entries.push((item, vec![0.0; d]));
    &mut entries.last_mut().unwrap().1
}

/// One SGD descent step on the quad loss. Only the touched rows move:
/// P[u], Q[i], Q[j], and Q over the support of z (a support item equal to j
/// accumulates both contributions). Every gradient term reads pre-step
/// values. Returns the pre-step loss.
pub fn discriminator_step(
    params: &mut DiscriminatorParams,
    quad: &TrainingQuad,
    alpha: f64,
) -> f64 {
    let d = params.dim();
    let u = quad.user;
    let supp: Vec<(usize, f64)> = quad.z.support(SUPPORT_CUTOFF).collect();

    let p_u = params.p.row(u).to_vec();
    let x_ui = dot(&p_u, params.q.row(quad.pos_item));
    let x_uj = dot(&p_u, params.q.row(quad.neg_item));
    let mut x_uz = 0.0;
    for &(k, w) in &supp {
        x_uz += w * dot(&p_u, params.q.row(k));
    }
    let d1 = x_ui - x_uz;
    let d2 = x_uz - x_uj;
    let loss = -(log_logistic(d1) + log_logistic(d2)) + quad_regulariser(params, quad);

    let a_i = -logistic(-d1);
    let a_z = logistic(-d1) - logistic(-d2);
    let a_j = logistic(-d2);
    let lam2 = 2.0 * params.lambda;

    let mut gp = vec![0.0; d];
    axpy(&mut gp, a_i, params.q.row(quad.pos_item));
    axpy(&mut gp, a_j, params.q.row(quad.neg_item));
    for &(k, w) in &supp {
        axpy(&mut gp, a_z * w, params.q.row(k));
    }
    axpy(&mut gp, lam2, &p_u);

    let mut item_grads: Vec<(usize, Vec<f64>)> = Vec::new();
    let q_i_old = params.q.row(quad.pos_item).to_vec();
    let g = acc(&mut item_grads, quad.pos_item, d);
    axpy(g, a_i, &p_u);
    axpy(g, lam2, &q_i_old);

    let q_j_old = params.q.row(quad.neg_item).to_vec();
    let g = acc(&mut item_grads, quad.neg_item, d);
    axpy(g, a_j, &p_u);
    axpy(g, lam2, &q_j_old);

    for &(k, w) in &supp {
        let q_k_old = params.q.row(k).to_vec();
        let g = acc(&mut item_grads, k, d);
        axpy(g, a_z * w, &p_u);
        axpy(g, lam2 * w, &q_k_old);
    }

    axpy(params.p.row_mut(u), -alpha, &gp);
    for (item, g) in &item_grads {
        axpy(params.q.row_mut(*item), -alpha, g);
    }
    loss
}

/// Plain pairwise baseline loss −log σ(x_ui − x_uj) + touched-row L2.
pub fn bpr_loss(params: &DiscriminatorParams, u: usize, i: usize, j: usize) -> f64 {
    let delta = params.score(u, i) - params.score(u, j);
    -log_logistic(delta)
        + params.lambda
            * (norm_sq(params.p.row(u)) + norm_sq(params.q.row(i)) + norm_sq(params.q.row(j)))
}

/// One SGD descent step on the pairwise baseline. Returns the pre-step loss.
pub fn bpr_step(params: &mut DiscriminatorParams, u: usize, i: usize, j: usize, alpha: f64) -> f64 {
    let loss = bpr_loss(params, u, i, j);
    let p_u = params.p.row(u).to_vec();
    let q_i = params.q.row(i).to_vec();
    let q_j = params.q.row(j).to_vec();
    let e = -logistic(-(dot(&p_u, &q_i) - dot(&p_u, &q_j)));
    let lam2 = 2.0 * params.lambda;

    let gp_row = params.p.row_mut(u);
    for k in 0..gp_row.len() {
        gp_row[k] -= alpha * (e * (q_i[k] - q_j[k]) + lam2 * p_u[k]);
    }
    let qi_row = params.q.row_mut(i);
    for k in 0..qi_row.len() {
        qi_row[k] -= alpha * (e * p_u[k] + lam2 * q_i[k]);
    }
    let qj_row = params.q.row_mut(j);
    for k in 0..qj_row.len() {
        qj_row[k] -= alpha * (-e * p_u[k] + lam2 * q_j[k]);
    }
    loss
}

#[derive(Copy, Clone, PartialEq)]
struct Cand {
    score: f64,
    id: usize,
}

impl Eq for Cand {}

impl Ord for Cand {
    // Greater = better: higher score, then lower id.
    fn cmp(&self, other: &Self) -> Ordering {
        self.score
            .total_cmp(&other.score)
            .then_with(|| other.id.cmp(&self.id))
    }
}

impl PartialOrd for Cand {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Top-k items for user u by score, skipping the sorted `exclude` list.
/// Ties break toward the lower item id. Returns fewer than k when fewer
/// candidates exist.
pub fn rank_items(
    params: &DiscriminatorParams,
    u: usize,
    k: usize,
    exclude: &[usize],
) -> Vec<usize> {
    debug_assert!(exclude.windows(2).all(|w| w[0] <= w[1]));
    let mut heap: BinaryHeap<std::cmp::Reverse<Cand>> = BinaryHeap::with_capacity(k + 1);
    for i in 0..params.num_items() {
        if exclude.binary_search(&i).is_ok() {
            continue;
        }
        let cand = Cand {
            score: params.score(u, i),
            id: i,
        };
        if heap.len() < k {
            heap.push(std::cmp::Reverse(cand));
        } else if let Some(worst) = heap.peek() {
            if cand > worst.0 {
                heap.pop();
                heap.push(std::cmp::Reverse(cand));
            }
        }
    }
    let mut out: Vec<Cand> = heap.into_iter().map(|r| r.0).collect();
    out.sort_by(|a, b| b.cmp(a));
    out.into_iter().map(|c| c.id).collect()
}
