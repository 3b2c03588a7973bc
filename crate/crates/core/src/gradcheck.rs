//! Finite-difference oracles for both networks' gradients.
//!
//! The generator check replays one full sampling pass under a cloned rng
//! stream, so corruption masks and Gumbel noise are bitwise identical across
//! perturbed evaluations; what remains is a smooth function of the
//! parameters (the reparameterization the backward pass assumes). Parameter
//! scales here are O(1) and the step is 1e-5, so no support or mask
//! membership flips between evaluations.

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::data::FeedbackMatrix;
use crate::discriminator::{
    discriminator_loss, discriminator_step, sample_quad, DiscriminatorParams, TrainingQuad,
};
use crate::generator::{
    generator_backward, gumbel_softmax, propose_item, GeneratorParams, SUPPORT_CUTOFF,
};
use crate::hetgraph::SeededFriendSet;
use crate::linalg::{axpy, dot, log_logistic, Mat};
use crate::rng::{stream, tag};

pub const FD_STEP: f64 = 1e-5;
pub const FD_TOL: f64 = 1e-4;

/// |a − n| relative to the larger magnitude, floored so near-zero pairs are
/// compared absolutely.
pub fn rel_err(analytic: f64, numeric: f64) -> f64 {
    (analytic - numeric).abs() / analytic.abs().max(numeric.abs()).max(1e-4)
}

#[derive(Clone, Copy, Debug)]
pub struct GradCheckReport {
    pub max_rel_err: f64,
    pub checked: usize,
}

struct Fixture {
    gen: GeneratorParams,
    disc: DiscriminatorParams,
    r: FeedbackMatrix,
    seeds: SeededFriendSet,
}

const M: usize = 5;
const N: usize = 6;
const H: usize = 8;
const D: usize = 4;

/// Random small instance. Weight scales are deliberately O(1) so Gumbel
/// support never sits near a cutoff.
fn fixture(seed: u64) -> Fixture {
    let rng = &mut stream(seed, &[tag::GRADCHECK]);
    let gen = GeneratorParams {
        w_in: Mat::uniform(M, H, -0.3, 0.3, rng),
        b_hidden: (0..H).map(|_| rng.gen_range(-0.1..0.1)).collect(),
        u_node: Mat::uniform(M, H, -0.3, 0.3, rng),
        w_out: Mat::uniform(H, M, -0.3, 0.3, rng),
        b_out: (0..M).map(|_| rng.gen_range(-0.1..0.1)).collect(),
        h_scores: Mat::uniform(M, N, 0.7, 1.3, rng),
        tau: 0.7,
        q_corrupt: 0.3,
    };
    let disc = DiscriminatorParams::from_parts(
        Mat::uniform(M, D, -0.5, 0.5, rng),
        Mat::uniform(N, D, -0.5, 0.5, rng),
        0.01,
    );
    let mut items_by_user = Vec::with_capacity(M);
    for _ in 0..M {
        let mut items = Vec::new();
        while items.len() < 3 {
            let i = rng.gen_range(0..N);
            if !items.contains(&i) {
                items.push(i);
            }
        }
        items_by_user.push(items);
    }
    let r = FeedbackMatrix::new(items_by_user, N);
    let friends = (0..M).map(|u| vec![(u + 1) % M, (u + 2) % M]).collect();
    let scores = vec![vec![1.0, 0.9]; M];
    Fixture {
        gen,
        disc,
        r,
        seeds: SeededFriendSet::new(friends, scores),
    }
}

/// Adversarial generator objective for a replayed sampling pass.
fn replayed_loss(
    gp: &GeneratorParams,
    fx: &Fixture,
    u: usize,
    pos_item: usize,
    template: &ChaCha8Rng,
) -> f64 {
    let inst = propose_item(gp, &fx.r, &fx.seeds, u, true, &mut template.clone())
        .expect("distribution cannot degenerate mid-check")
        .expect("mask membership must be stable under the FD step");
    let p_u = fx.disc.user_vector(u);
    let x_ui = dot(p_u, fx.disc.item_vector(pos_item));
    let x_uz = fx.disc.soft_score(u, &inst.item_sample);
    -log_logistic(x_ui - x_uz)
}

/// Flat coordinate index over every generator parameter array.
fn gen_coord(gp: &mut GeneratorParams, c: usize) -> &mut f64 {
    let sizes = [M * H, H, M * H, H * M, M, M * N];
    let mut rest = c;
    for (a, &len) in sizes.iter().enumerate() {
        if rest < len {
            return match a {
                0 => &mut gp.w_in.data_mut()[rest],
                1 => &mut gp.b_hidden[rest],
                2 => &mut gp.u_node.data_mut()[rest],
                3 => &mut gp.w_out.data_mut()[rest],
                4 => &mut gp.b_out[rest],
                _ => &mut gp.h_scores.data_mut()[rest],
            };
        }
        rest -= len;
    }
    unreachable!("coordinate out of range");
}

const GEN_COORDS: usize = M * H + H + M * H + H * M + M + M * N;

/// Compare `generator_backward` against central differences on one random
/// instance. Every parameter coordinate is checked, including rows the
/// analytic gradient claims are untouched.
pub fn check_generator(seed: u64) -> GradCheckReport {
    let fx = fixture(seed);
    let (u, template, inst) = (0..M)
        .find_map(|u| {
            let template = stream(seed, &[tag::GRADCHECK, 1 + u as u64]);
            propose_item(&fx.gen, &fx.r, &fx.seeds, u, true, &mut template.clone())
                .unwrap()
                .map(|inst| (u, template, inst))
        })
        .expect("some user must yield a proposal");
    let pos_item = fx.r.items(u)[0];
    let grads = generator_backward(&fx.gen, &fx.disc, &fx.r, pos_item, &inst);

    // Densify the sparse analytic gradient in the same coordinate order.
    let mut analytic = Vec::with_capacity(GEN_COORDS);
    let mut aw_in = Mat::zeros(M, H);
    for &(row, s) in &grads.input_rows {
        axpy(aw_in.row_mut(row), s, &grads.input_pre);
    }
    analytic.extend_from_slice(aw_in.data());
    analytic.extend_from_slice(&grads.input_pre);
    let mut au_node = Mat::zeros(M, H);
    au_node.row_mut(u).copy_from_slice(&grads.input_pre);
    analytic.extend_from_slice(au_node.data());
    analytic.extend_from_slice(grads.w_out.data());
    analytic.extend_from_slice(&grads.b_out);
    let mut ah = Mat::zeros(M, N);
    for &(j, gh) in &grads.h_row {
        ah.row_mut(u)[j] = gh;
    }
    analytic.extend_from_slice(ah.data());

    let mut gp = fx.gen.clone();
    let mut max_rel = 0.0f64;
    for c in 0..GEN_COORDS {
        let base = *gen_coord(&mut gp, c);
        *gen_coord(&mut gp, c) = base + FD_STEP;
        let lp = replayed_loss(&gp, &fx, u, pos_item, &template);
        *gen_coord(&mut gp, c) = base - FD_STEP;
        let lm = replayed_loss(&gp, &fx, u, pos_item, &template);
        *gen_coord(&mut gp, c) = base;
        let numeric = (lp - lm) / (2.0 * FD_STEP);
        max_rel = max_rel.max(rel_err(analytic[c], numeric));
    }
    GradCheckReport {
        max_rel_err: max_rel,
        checked: GEN_COORDS,
    }
}

fn disc_coord(dp: &mut DiscriminatorParams, c: usize) -> &mut f64 {
    if c < M * D {
        &mut dp.p_mut().data_mut()[c]
    } else {
        &mut dp.q_mut().data_mut()[c - M * D]
    }
}

const DISC_COORDS: usize = M * D + N * D;

/// Compare the update applied by `discriminator_step` at unit rate (which
/// equals the gradient it computed) against central differences of the quad
/// loss.
pub fn check_discriminator(seed: u64) -> GradCheckReport {
    let fx = fixture(seed);
    let u = (seed as usize) % M;
    let mut rng = stream(seed, &[tag::GRADCHECK, 0x100]);
    let logits: Vec<f64> = (0..N).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let z = gumbel_softmax(&logits, &vec![0.0; N], 0.7).unwrap();
    debug_assert!(z.support(SUPPORT_CUTOFF).count() == N, "soft z should cover all items");
    let quad: TrainingQuad = sample_quad(&fx.r, u, z, &mut rng).expect("fixture always has a negative");

    let mut original = fx.disc.clone();
    let mut stepped = fx.disc.clone();
    discriminator_step(&mut stepped, &quad, 1.0);
    let implied: Vec<f64> = (0..DISC_COORDS)
        .map(|c| *disc_coord(&mut original, c) - *disc_coord(&mut stepped, c))
        .collect();

    let mut dp = fx.disc.clone();
    let mut max_rel = 0.0f64;
    for c in 0..DISC_COORDS {
        let base = *disc_coord(&mut dp, c);
        *disc_coord(&mut dp, c) = base + FD_STEP;
        let lp = discriminator_loss(&dp, &quad);
        *disc_coord(&mut dp, c) = base - FD_STEP;
        let lm = discriminator_loss(&dp, &quad);
        *disc_coord(&mut dp, c) = base;
        let numeric = (lp - lm) / (2.0 * FD_STEP);
        max_rel = max_rel.max(rel_err(implied[c], numeric));
    }
    GradCheckReport {
        max_rel_err: max_rel,
        checked: DISC_COORDS,
    }
}
