//! Friend/item generator: a denoising autoencoder over seeded friend
//! profiles, a softmax friend distribution, and two Gumbel-Softmax sampling
//! layers that keep the item proposal differentiable end to end.
//!
//! Sign convention: `generator_backward` returns the gradient of the
//! generator objective J = −log σ(x_ui − x_uz), which the generator *ascends*
//! (raising x_uz fools the ranker). `apply_ascent` adds `lr · grad`.

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::data::FeedbackMatrix;
use crate::discriminator::DiscriminatorParams;
use crate::error::{Error, Result};
use crate::hetgraph::SeededFriendSet;
use crate::linalg::{axpy, dot, log_logistic, logistic, Mat};
use crate::rng::{stream, tag};

/// Sentinel for masked logits. Anything at or below `MASK_THRESHOLD` is
/// treated as masked; after the max-shift its weight underflows to exact 0.
pub const MASK_LOGIT: f64 = -1e9;
pub const MASK_THRESHOLD: f64 = -1e8;

/// Entries of a soft selection below this carry no mass worth propagating.
pub const SUPPORT_CUTOFF: f64 = 1e-12;
/// Items need at least this much vᵀR mass to be sampling candidates.
pub const ITEM_MASS_CUTOFF: f64 = 1e-8;

#[derive(Clone, Debug, PartialEq)]
pub struct GeneratorParams {
    pub w_in: Mat,         // m × h, row f feeds friend f's indicator in
    pub b_hidden: Vec<f64>, // h
    pub u_node: Mat,       // m × h, per-user offset (the denoising AE's user node)
    pub w_out: Mat,        // h × m
    pub b_out: Vec<f64>,   // m
    pub h_scores: Mat,     // m × n, learned user-item affinity gate
    pub tau: f64,
    pub q_corrupt: f64,
}

impl GeneratorParams {
    /// Weights uniform ±0.05 (draw order w_in, u_node, w_out — frozen),
    /// biases zero, affinity gate all ones.
    pub fn init(
        num_users: usize,
        num_items: usize,
        hidden: usize,
        tau: f64,
        q_corrupt: f64,
        rng: &mut impl Rng,
    ) -> Self {
        assert!(tau > 0.0, "temperature must be positive");
        assert!((0.0..=1.0).contains(&q_corrupt), "corruption must be in [0, 1]");
        GeneratorParams {
            w_in: Mat::uniform(num_users, hidden, -0.05, 0.05, rng),
            b_hidden: vec![0.0; hidden],
            u_node: Mat::uniform(num_users, hidden, -0.05, 0.05, rng),
            w_out: Mat::uniform(hidden, num_users, -0.05, 0.05, rng),
            b_out: vec![0.0; num_users],
            h_scores: Mat::filled(num_users, num_items, 1.0),
            tau,
            q_corrupt,
        }
    }

    pub fn num_users(&self) -> usize {
        self.w_in.rows()
    }

    pub fn num_items(&self) -> usize {
        self.h_scores.cols()
    }

    pub fn hidden_units(&self) -> usize {
        self.w_in.cols()
    }

    pub fn all_finite(&self) -> bool {
        self.w_in.all_finite()
            && self.b_hidden.iter().all(|v| v.is_finite())
            && self.u_node.all_finite()
            && self.w_out.all_finite()
            && self.b_out.iter().all(|v| v.is_finite())
            && self.h_scores.all_finite()
    }
}

/// Zero each positive entry independently with probability `q`. Draw order is
/// the `friends` list order, so a fixed stream corrupts reproducibly.
pub fn corrupt_indicator(s: &mut [f64], friends: &[usize], q: f64, rng: &mut ChaCha8Rng) {
    for &f in friends {
        if rng.gen::<f64>() < q {
            s[f] = 0.0;
        }
    }
}

pub struct CdaeActivation {
    pub hidden: Vec<f64>, // h, logistic units
    pub scores: Vec<f64>, // m, reconstruction logits c
}

/// hidden = σ(W_inᵀ s̃ + U_node[u] + b_hidden); c = W_outᵀ hidden + b_out.
pub fn cdae_activation(params: &GeneratorParams, u: usize, s_tilde: &[f64]) -> CdaeActivation {
    let h = params.hidden_units();
    let m = params.num_users();
    debug_assert_eq!(s_tilde.len(), m);
    let mut act = params.b_hidden.clone();
    axpy(&mut act, 1.0, params.u_node.row(u));
    for (f, &s) in s_tilde.iter().enumerate() {
        if s != 0.0 {
            axpy(&mut act, s, params.w_in.row(f));
        }
    }
    let hidden: Vec<f64> = act.iter().map(|&a| logistic(a)).collect();
    let mut scores = params.b_out.clone();
    for k in 0..h {
        axpy(&mut scores, hidden[k], params.w_out.row(k));
    }
    CdaeActivation { hidden, scores }
}

/// Reconstruction logits only; use `cdae_activation` when the hidden layer is
/// needed for a backward pass.
pub fn cdae_forward(params: &GeneratorParams, u: usize, s_tilde: &[f64]) -> Vec<f64> {
    cdae_activation(params, u, s_tilde).scores
}

/// Softmax over reconstruction scores with the self entry masked out.
/// p sums to 1 and p[self] is exactly 0.
pub fn friend_distribution(scores: &[f64], exclude_self: usize) -> Result<Vec<f64>> {
    if scores.len() < 2 {
        return Err(Error::DegenerateDistribution);
    }
    let mut logits = scores.to_vec();
    logits[exclude_self] = MASK_LOGIT;
    let max = logits
        .iter()
        .filter(|&&l| l > MASK_THRESHOLD)
        .cloned()
        .fold(f64::NEG_INFINITY, f64::max);
    let mut sum = 0.0;
    for l in logits.iter_mut() {
        *l = if *l > MASK_THRESHOLD { (*l - max).exp() } else { 0.0 };
        sum += *l;
    }
    for l in logits.iter_mut() {
        *l /= sum;
    }
    Ok(logits)
}

/// Differentiable near-one-hot selection.
#[derive(Clone, Debug, PartialEq)]
pub struct SoftSelection {
    weights: Vec<f64>,
}

impl SoftSelection {
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    /// Index of the largest weight; ties go to the lower index.
    pub fn argmax(&self) -> usize {
        let mut best = 0;
        for (i, &w) in self.weights.iter().enumerate() {
            if w > self.weights[best] {
                best = i;
            }
        }
        best
    }

    /// Entries with weight above `cutoff`, ascending index.
    pub fn support(&self, cutoff: f64) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.weights
            .iter()
            .enumerate()
            .filter(move |&(_, &w)| w > cutoff)
            .map(|(i, &w)| (i, w))
    }

    /// One-hot at the argmax; the straight-through ablation's input.
    pub fn hardened(&self) -> SoftSelection {
        let mut weights = vec![0.0; self.weights.len()];
        weights[self.argmax()] = 1.0;
        SoftSelection { weights }
    }

    /// Degenerate selection with all mass on one index.
    pub fn one_hot(len: usize, index: usize) -> SoftSelection {
        assert!(index < len);
        let mut weights = vec![0.0; len];
        weights[index] = 1.0;
        SoftSelection { weights }
    }

    #[cfg(test)]
    pub(crate) fn from_weights(weights: Vec<f64>) -> Self {
        SoftSelection { weights }
    }
}

/// Standard Gumbel noise −ln(−ln μ) with μ clamped to [1e-12, 1−1e-12] so the
/// result is always finite.
#[inline]
pub fn gumbel_from_uniform(mu: f64) -> f64 {
    let c = mu.clamp(1e-12, 1.0 - 1e-12);
    -(-c.ln()).ln()
}

pub fn gumbel_noise(rng: &mut ChaCha8Rng, len: usize) -> Vec<f64> {
    (0..len).map(|_| gumbel_from_uniform(rng.gen())).collect()
}

/// softmax((logits + noise)/τ) over unmasked entries; masked entries get
/// exact weight 0. Errors when everything is masked.
pub fn gumbel_softmax(logits: &[f64], noise: &[f64], tau: f64) -> Result<SoftSelection> {
    assert_eq!(logits.len(), noise.len());
    assert!(tau > 0.0, "temperature must be positive");
    let mut max = f64::NEG_INFINITY;
    for (l, g) in logits.iter().zip(noise) {
        if *l > MASK_THRESHOLD {
            max = max.max((l + g) / tau);
        }
    }
    if max == f64::NEG_INFINITY {
        return Err(Error::EmptySupport);
    }
    let mut weights = vec![0.0; logits.len()];
    let mut sum = 0.0;
    for (k, (l, g)) in logits.iter().zip(noise).enumerate() {
        if *l > MASK_THRESHOLD {
            let w = ((l + g) / tau - max).exp();
            weights[k] = w;
            sum += w;
        }
    }
    for w in weights.iter_mut() {
        *w /= sum;
    }
    Ok(SoftSelection { weights })
}

/// Draw a soft friend selection from p via Gumbel-Softmax on log p. The self
/// entry stays masked.
pub fn sample_friend(
    params: &GeneratorParams,
    u: usize,
    probs: &[f64],
    rng: &mut ChaCha8Rng,
) -> Result<SoftSelection> {
    let mut logits: Vec<f64> = probs.iter().map(|&p| (p + 1e-12).ln()).collect();
    logits[u] = MASK_LOGIT;
    let noise = gumbel_noise(rng, logits.len());
    gumbel_softmax(&logits, &noise, params.tau)
}

/// t = vᵀR: per-item mass contributed by the soft friend selection.
pub fn item_mass(v: &SoftSelection, r: &FeedbackMatrix) -> Vec<f64> {
    let mut t = vec![0.0; r.num_items()];
    for (f, w) in v.support(SUPPORT_CUTOFF) {
        for &j in r.items(f) {
            t[j] += w;
        }
    }
    t
}

fn mask_item_logits(
    t: &[f64],
    r: &FeedbackMatrix,
    params: &GeneratorParams,
    u: usize,
) -> Option<Vec<f64>> {
    let h_row = params.h_scores.row(u);
    let consumed = r.items(u);
    let mut logits = vec![MASK_LOGIT; t.len()];
    let mut any = false;
    let mut ci = 0;
    for (j, &mass) in t.iter().enumerate() {
        while ci < consumed.len() && consumed[ci] < j {
            ci += 1;
        }
        let is_consumed = ci < consumed.len() && consumed[ci] == j;
        if !is_consumed && mass >= ITEM_MASS_CUTOFF {
            logits[j] = mass * h_row[j];
            any = true;
        }
    }
    if any {
        Some(logits)
    } else {
        None
    }
}

/// Raw item logits t_j · H[u, j] with items the user already consumed, and
/// items carrying no friend mass, masked out. `None` means the proposal has
/// no candidate item and the caller should skip this instance.
pub fn item_logits(
    v: &SoftSelection,
    r: &FeedbackMatrix,
    params: &GeneratorParams,
    u: usize,
) -> Option<Vec<f64>> {
    let t = item_mass(v, r);
    mask_item_logits(&t, r, params, u)
}

/// Draw a soft item selection. Noise is drawn lazily for unmasked entries
/// only, ascending item id, so the stream stays deterministic.
pub fn sample_item(logits: &[f64], rng: &mut ChaCha8Rng, tau: f64) -> Result<SoftSelection> {
    let mut noise = vec![0.0; logits.len()];
    for (j, &l) in logits.iter().enumerate() {
        if l > MASK_THRESHOLD {
            noise[j] = gumbel_from_uniform(rng.gen());
        }
    }
    gumbel_softmax(logits, &noise, tau)
}

/// Everything the forward pass produced for one training instance, retained
/// for the exact backward pass.
#[derive(Clone, Debug)]
pub struct GeneratorIntermediates {
    pub user: usize,
    pub s_tilde: Vec<f64>,       // corrupted seed profile (m)
    pub hidden: Vec<f64>,        // h
    pub friend_probs: Vec<f64>,  // p (m)
    pub friend_sample: SoftSelection, // v (m)
    pub item_mass: Vec<f64>,     // vᵀR (n)
    pub item_logits: Vec<f64>,   // masked (n)
    pub item_sample: SoftSelection, // z (n)
}

/// Full generator forward pass for one user: corrupt, encode, sample a
/// friend, sample an item. `Ok(None)` is the no-candidate skip signal.
pub fn propose_item(
    params: &GeneratorParams,
    r: &FeedbackMatrix,
    seeds: &SeededFriendSet,
    u: usize,
    corrupt: bool,
    rng: &mut ChaCha8Rng,
) -> Result<Option<GeneratorIntermediates>> {
    let mut s_tilde = seeds.indicator(u);
    if corrupt {
        corrupt_indicator(&mut s_tilde, seeds.friends(u), params.q_corrupt, rng);
    }
    let act = cdae_activation(params, u, &s_tilde);
    let friend_probs = friend_distribution(&act.scores, u)?;
    let friend_sample = sample_friend(params, u, &friend_probs, rng)?;
    let mass = item_mass(&friend_sample, r);
    let Some(logits) = mask_item_logits(&mass, r, params, u) else {
        return Ok(None);
    };
    let item_sample = sample_item(&logits, rng, params.tau)?;
    Ok(Some(GeneratorIntermediates {
        user: u,
        s_tilde,
        hidden: act.hidden,
        friend_probs,
        friend_sample,
        item_mass: mass,
        item_logits: logits,
        item_sample,
    }))
}

/// Gradient of J = −log σ(x_ui − x_uz) with respect to the generator
/// parameters, evaluated at one forward instance.
#[derive(Clone, Debug)]
pub struct GeneratorGradients {
    pub user: usize,
    pub loss: f64,
    /// dJ/da, the pre-activation gradient: also the gradient of b_hidden and
    /// of U_node[user]; W_in row f's gradient is `input_rows` scale × this.
    pub input_pre: Vec<f64>,            // h
    pub input_rows: Vec<(usize, f64)>,  // (row, s̃ value)
    pub w_out: Mat,                     // h × m
    pub b_out: Vec<f64>,                // m
    pub h_row: Vec<(usize, f64)>,       // sparse dJ/dH[user, ·]
}

/// Backpropagate the adversarial objective through item sampling, the
/// affinity gate, friend sampling, and the autoencoder. The discriminator is
/// read-only here; Gumbel noise is a constant of the instance
/// (reparameterization).
pub fn generator_backward(
    params: &GeneratorParams,
    disc: &DiscriminatorParams,
    r: &FeedbackMatrix,
    pos_item: usize,
    inst: &GeneratorIntermediates,
) -> GeneratorGradients {
    let u = inst.user;
    let m = params.num_users();
    let h = params.hidden_units();
    let tau = params.tau;
    let p_u = disc.user_vector(u);

    let x_ui = dot(p_u, disc.item_vector(pos_item));
    let supp_z: Vec<(usize, f64)> = inst.item_sample.support(SUPPORT_CUTOFF).collect();
    let mut x_uz = 0.0;
    let q_dots: Vec<f64> = supp_z
        .iter()
        .map(|&(j, w)| {
            let q = dot(p_u, disc.item_vector(j));
            x_uz += w * q;
            q
        })
        .collect();
    let delta = x_ui - x_uz;
    let loss = -log_logistic(delta);
    let dj_dxuz = 1.0 - logistic(delta);

    // Through the item Gumbel-Softmax: dJ/dl2_j = z_j (κ_j − κ̄)/τ on the
    // sample's support, κ_j = dJ/dx_uz · q_j, κ̄ = dJ/dx_uz · x_uz.
    let h_params = params.h_scores.row(u);
    let mut h_row = Vec::with_capacity(supp_z.len());
    let mut dt = Vec::with_capacity(supp_z.len()); // aligned with supp_z
    for (idx, &(j, zj)) in supp_z.iter().enumerate() {
        let dl2 = zj * dj_dxuz * (q_dots[idx] - x_uz) / tau;
        h_row.push((j, dl2 * inst.item_mass[j]));
        dt.push(dl2 * h_params[j]);
    }
    let supp_z_ids: Vec<usize> = supp_z.iter().map(|&(j, _)| j).collect();

    // dJ/dv_f = Σ_j dt_j R[f, j], then through the friend Gumbel-Softmax.
    let supp_v: Vec<(usize, f64)> = inst.friend_sample.support(SUPPORT_CUTOFF).collect();
    let mut rho = vec![0.0; supp_v.len()];
    for (fi, &(f, _)) in supp_v.iter().enumerate() {
        for &j in r.items(f) {
            if let Ok(k) = supp_z_ids.binary_search(&j) {
                rho[fi] += dt[k];
            }
        }
    }
    let rho_bar: f64 = supp_v.iter().zip(&rho).map(|(&(_, vf), &rf)| vf * rf).sum();

    // dJ/dl1_f = v_f (ρ_f − ρ̄)/τ; l1 = ln(p + 1e-12) gives dp = dl1/(p+1e-12).
    let p = &inst.friend_probs;
    let mut dp = Vec::with_capacity(supp_v.len());
    let mut eta_bar = 0.0;
    for (fi, &(f, vf)) in supp_v.iter().enumerate() {
        let dl1 = vf * (rho[fi] - rho_bar) / tau;
        let dpf = dl1 / (p[f] + 1e-12);
        eta_bar += p[f] * dpf;
        dp.push(dpf);
    }

    // Through the friend softmax: dc_j = p_j (η_j − η̄), dense over users
    // (the self entry has p = 0, so its gradient vanishes with it).
    let mut dc = vec![0.0; m];
    for (j, g) in dc.iter_mut().enumerate() {
        *g = -p[j] * eta_bar;
    }
    for (fi, &(f, _)) in supp_v.iter().enumerate() {
        dc[f] += p[f] * dp[fi];
    }

    // Output layer and encoder.
    let mut dhidden = vec![0.0; h];
    for (k, g) in dhidden.iter_mut().enumerate() {
        *g = dot(params.w_out.row(k), &dc);
    }
    let mut w_out_data = Vec::with_capacity(h * m);
    for k in 0..h {
        let hk = inst.hidden[k];
        for g in &dc {
            w_out_data.push(hk * g);
        }
    }
    let mut input_pre = dhidden;
    for (k, g) in input_pre.iter_mut().enumerate() {
        *g *= inst.hidden[k] * (1.0 - inst.hidden[k]);
    }
    let input_rows: Vec<(usize, f64)> = inst
        .s_tilde
        .iter()
        .enumerate()
        .filter(|&(_, &s)| s != 0.0)
        .map(|(f, &s)| (f, s))
        .collect();

    GeneratorGradients {
        user: u,
        loss,
        input_pre,
        input_rows,
        w_out: Mat::from_vec(h, m, w_out_data),
        b_out: dc,
        h_row,
    }
}

impl GeneratorParams {
    /// θ += lr · grad (gradient ascent on the adversarial objective).
    pub fn apply_ascent(&mut self, g: &GeneratorGradients, lr: f64) {
        for &(row, scale) in &g.input_rows {
            axpy(self.w_in.row_mut(row), lr * scale, &g.input_pre);
        }
        axpy(&mut self.b_hidden, lr, &g.input_pre);
        axpy(self.u_node.row_mut(g.user), lr, &g.input_pre);
        for k in 0..self.w_out.rows() {
            axpy(self.w_out.row_mut(k), lr, g.w_out.row(k));
        }
        axpy(&mut self.b_out, lr, &g.b_out);
        let h_row = self.h_scores.row_mut(g.user);
        for &(j, gh) in &g.h_row {
            h_row[j] += lr * gh;
        }
    }
}

/// Reconstruction pretraining: per user per epoch, one SGD step on the
/// binary cross-entropy of σ(c) against the seed profile, with
/// `negatives_per_positive × |S_u|` sampled non-friends as zero targets.
/// Inputs are corrupted exactly as in adversarial training.
pub fn pretrain_cdae(
    params: &mut GeneratorParams,
    seeds: &SeededFriendSet,
    epochs: usize,
    lr: f64,
    negatives_per_positive: usize,
    master_seed: u64,
) {
    use rand::seq::SliceRandom;
    let m = params.num_users();
    let h = params.hidden_units();
    for epoch in 0..epochs {
        let mut order: Vec<usize> = (0..m).collect();
        order.shuffle(&mut stream(master_seed, &[tag::PRETRAIN_ORDER, epoch as u64]));
        for u in order {
            let friends = seeds.friends(u);
            if friends.is_empty() {
                continue;
            }
            let mut rng = stream(master_seed, &[tag::PRETRAIN_USER, epoch as u64, u as u64]);
            let mut s = seeds.indicator(u);
            corrupt_indicator(&mut s, friends, params.q_corrupt, &mut rng);
            let act = cdae_activation(params, u, &s);

            let mut sorted_friends = friends.to_vec();
            sorted_friends.sort_unstable();
            let mut touched: Vec<(usize, f64)> =
                friends.iter().map(|&f| (f, 1.0)).collect();
            // Sampling with replacement; duplicates just reweight the step.
            if m > friends.len() + 1 {
                for _ in 0..negatives_per_positive * friends.len() {
                    loop {
                        let v = rng.gen_range(0..m);
                        if v != u && sorted_friends.binary_search(&v).is_err() {
                            touched.push((v, 0.0));
                            break;
                        }
                    }
                }
            }

            // All gradient terms read pre-update parameters.
            let deltas: Vec<f64> = touched
                .iter()
                .map(|&(j, target)| logistic(act.scores[j]) - target)
                .collect();
            let mut da = vec![0.0; h];
            for (idx, &(j, _)) in touched.iter().enumerate() {
                for (k, g) in da.iter_mut().enumerate() {
                    *g += deltas[idx] * params.w_out.get(k, j);
                }
            }
            for (idx, &(j, _)) in touched.iter().enumerate() {
                let step = lr * deltas[idx];
                for k in 0..h {
                    let v = params.w_out.get(k, j) - step * act.hidden[k];
                    params.w_out.set(k, j, v);
                }
                params.b_out[j] -= step;
            }
            for (k, g) in da.iter_mut().enumerate() {
                *g *= act.hidden[k] * (1.0 - act.hidden[k]);
            }
            axpy(params.u_node.row_mut(u), -lr, &da);
            axpy(&mut params.b_hidden, -lr, &da);
            for (f, &sv) in s.iter().enumerate() {
                if sv != 0.0 {
                    axpy(params.w_in.row_mut(f), -lr * sv, &da);
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hetgraph::SeededFriendSet;

    fn rng_for(seed: u64) -> ChaCha8Rng {
        stream(seed, &[tag::SYNTH])
    }

    #[test]
    fn gumbel_noise_known_point_and_clamping() {
        // μ = e^{-1} gives −ln(−ln μ) = 0.
        assert!(gumbel_from_uniform((-1.0f64).exp()).abs() < 1e-14);
        let lo = gumbel_from_uniform(0.0);
        let hi = gumbel_from_uniform(1.0);
        assert!(lo.is_finite() && hi.is_finite());
        assert!(lo < 0.0 && hi > 0.0);
        assert_eq!(lo, gumbel_from_uniform(1e-13)); // clamped to the same point
        assert!((lo - -((-(1e-12f64).ln()).ln())).abs() < 1e-12);
    }

    #[test]
    fn gumbel_softmax_zero_noise_is_tempered_softmax() {
        // With zero noise and τ = 0.2, weights follow p^5 renormalised.
        let logits = [0.9f64.ln(), 0.1f64.ln()];
        let sel = gumbel_softmax(&logits, &[0.0, 0.0], 0.2).unwrap();
        let expect0 = 0.9f64.powi(5) / (0.9f64.powi(5) + 0.1f64.powi(5));
        assert!((sel.weights()[0] - expect0).abs() < 1e-12);
        assert!((sel.weights().iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn gumbel_softmax_masks_are_exact_zero() {
        let logits = [1.0, MASK_LOGIT, 0.5, MASK_LOGIT];
        let noise = [0.3, 5.0, -0.2, 9.0]; // masked noise must not matter
        let sel = gumbel_softmax(&logits, &noise, 0.5).unwrap();
        assert_eq!(sel.weights()[1], 0.0);
        assert_eq!(sel.weights()[3], 0.0);
        assert!((sel.weights().iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert!(sel.weights()[0] > 0.0 && sel.weights()[2] > 0.0);
    }

    #[test]
    fn gumbel_softmax_all_masked_errors() {
        let logits = [MASK_LOGIT; 3];
        assert!(matches!(
            gumbel_softmax(&logits, &[0.0; 3], 0.2),
            Err(Error::EmptySupport)
        ));
    }

    #[test]
    fn lower_temperature_sharpens() {
        let logits = [1.0, 0.4, 0.2];
        let noise = [0.05, -0.1, 0.02];
        let soft = gumbel_softmax(&logits, &noise, 1.0).unwrap();
        let sharp = gumbel_softmax(&logits, &noise, 0.1).unwrap();
        assert_eq!(soft.argmax(), sharp.argmax());
        assert!(sharp.weights()[sharp.argmax()] > soft.weights()[soft.argmax()]);
    }

    #[test]
    fn friend_distribution_masks_self_exactly() {
        let c = [0.0, 2f64.ln(), 4f64.ln()];
        let p = friend_distribution(&c, 0).unwrap();
        assert_eq!(p[0], 0.0);
        assert!((p[1] - 1.0 / 3.0).abs() < 1e-12);
        assert!((p[2] - 2.0 / 3.0).abs() < 1e-12);
        assert!(matches!(friend_distribution(&[1.0], 0), Err(Error::DegenerateDistribution)));
    }

    #[test]
    fn sample_friend_never_selects_self() {
        let mut rng = rng_for(3);
        let params = GeneratorParams::init(6, 4, 8, 0.2, 0.2, &mut rng);
        let p = vec![0.0, 0.25, 0.25, 0.25, 0.25, 0.0];
        for trial in 0..50 {
            let mut r = stream(trial, &[tag::INSTANCE]);
            let v = sample_friend(&params, 0, &p, &mut r).unwrap();
            assert_eq!(v.weights()[0], 0.0);
            assert!((v.weights().iter().sum::<f64>() - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn item_logits_masks_consumed_and_unreached() {
        let r = FeedbackMatrix::new(vec![vec![0, 1], vec![1, 2], vec![3]], 4);
        let mut params = GeneratorParams::init(3, 4, 4, 0.2, 0.0, &mut rng_for(1));
        params.h_scores.row_mut(0).copy_from_slice(&[10.0, 20.0, 30.0, 40.0]);
        let v = SoftSelection::from_weights(vec![0.0, 0.6, 0.4]);
        let logits = item_logits(&v, &r, &params, 0).unwrap();
        assert_eq!(logits[0], MASK_LOGIT); // no friend mass
        assert_eq!(logits[1], MASK_LOGIT); // consumed by user 0
        assert!((logits[2] - 0.6 * 30.0).abs() < 1e-12);
        assert!((logits[3] - 0.4 * 40.0).abs() < 1e-12);
    }

    #[test]
    fn item_logits_no_candidates_is_none() {
        // Friend mass lands only on items the user already consumed.
        let r = FeedbackMatrix::new(vec![vec![0, 1], vec![1]], 2);
        let params = GeneratorParams::init(2, 2, 4, 0.2, 0.0, &mut rng_for(2));
        let v = SoftSelection::from_weights(vec![0.0, 1.0]);
        assert!(item_logits(&v, &r, &params, 0).is_none());
    }

    #[test]
    fn corruption_rate_matches_q() {
        let friends: Vec<usize> = (1..11).collect();
        let mut friend_lists = vec![friends.clone()];
        let mut score_lists = vec![vec![1.0; 10]];
        friend_lists.resize(11, Vec::new());
        score_lists.resize(11, Vec::new());
        let set = SeededFriendSet::new(friend_lists, score_lists);
        let mut zeroed = 0usize;
        let trials = 2000;
        for t in 0..trials {
            let mut s = set.indicator(0);
            let mut rng = stream(t, &[tag::PRETRAIN_USER]);
            corrupt_indicator(&mut s, &friends, 0.3, &mut rng);
            zeroed += friends.iter().filter(|&&f| s[f] == 0.0).count();
        }
        let rate = zeroed as f64 / (trials * 10) as f64;
        assert!((rate - 0.3).abs() < 0.02, "corruption rate {rate}");
        // Degenerate rates are exact.
        let mut s = set.indicator(0);
        corrupt_indicator(&mut s, &friends, 0.0, &mut rng_for(1));
        assert!(friends.iter().all(|&f| s[f] == 1.0));
        corrupt_indicator(&mut s, &friends, 1.0, &mut rng_for(1));
        assert!(friends.iter().all(|&f| s[f] == 0.0));
    }

    #[test]
    fn pretrain_reconstructs_single_friend_profile() {
        // Two users; user 0's profile is exactly user 1. After pretraining,
        // the reconstruction confidence σ(c₁) for user 0 exceeds 0.9.
        let seeds = SeededFriendSet::new(vec![vec![1], vec![]], vec![vec![1.0], vec![]]);
        let mut params = GeneratorParams::init(2, 1, 8, 0.2, 0.0, &mut rng_for(4));
        pretrain_cdae(&mut params, &seeds, 200, 0.1, 5, 77);
        let scores = cdae_forward(&params, 0, &seeds.indicator(0));
        assert!(
            logistic(scores[1]) > 0.9,
            "confidence {} too low",
            logistic(scores[1])
        );
    }

    #[test]
    fn propose_item_is_stream_deterministic() {
        let r = FeedbackMatrix::new(vec![vec![0], vec![1, 2], vec![2, 3]], 4);
        let seeds = SeededFriendSet::new(
            vec![vec![1, 2], vec![0], vec![1]],
            vec![vec![0.9, 0.8], vec![0.7], vec![0.6]],
        );
        let params = GeneratorParams::init(3, 4, 8, 0.2, 0.2, &mut rng_for(5));
        let a = propose_item(&params, &r, &seeds, 0, true, &mut rng_for(9))
            .unwrap()
            .unwrap();
        let b = propose_item(&params, &r, &seeds, 0, true, &mut rng_for(9))
            .unwrap()
            .unwrap();
        assert_eq!(a.item_sample, b.item_sample);
        assert_eq!(a.friend_sample, b.friend_sample);
        assert_eq!(a.s_tilde, b.s_tilde);
        assert!((a.item_sample.weights().iter().sum::<f64>() - 1.0).abs() < 1e-9);
        // The sampled proposal never lands on user 0's own items.
        assert_eq!(a.item_sample.weights()[0], 0.0);
    }

    #[test]
    fn hardened_is_one_hot_at_argmax() {
        let s = SoftSelection::from_weights(vec![0.1, 0.6, 0.3]);
        let h = s.hardened();
        assert_eq!(h.weights(), &[0.0, 1.0, 0.0]);
        // Ties break toward the lower index.
        let s = SoftSelection::from_weights(vec![0.4, 0.4, 0.2]);
        assert_eq!(s.argmax(), 0);
    }
}
