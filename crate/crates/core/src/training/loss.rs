//! Loss functions over batch embeddings and their gradients.
//!
//! The main objective is a Euclidean triplet margin loss with in-batch
//! negatives: each anchor/positive pair is compared against every other
//! pair's positive, giving |B|-1 triplets per pair. An L2 penalty on the
//! anchor embeddings keeps the space compact. The alternative objective is a
//! temperature-scaled softmax over cosine similarities.
//!
//! Gradients use subgradient 0 at the hinge kink and at zero-distance
//! points, so every returned value is finite.

use crate::linalg::{dot, euclidean_distance, norm};
use crate::{Error, Result};

/// Hinge triplet loss `max(0, d_pos - d_neg + margin)`.
pub fn triplet_loss(d_pos: f64, d_neg: f64, margin: f64) -> f64 {
    (d_pos - d_neg + margin).max(0.0)
}

fn check_batch(anchors: &[Vec<f64>], positives: &[Vec<f64>]) -> Result<()> {
    if anchors.len() != positives.len() {
        return Err(Error::DimensionMismatch {
            expected: anchors.len(),
            got: positives.len(),
        });
    }
    if anchors.len() < 2 {
        return Err(Error::InvalidArgument(format!(
            "batch loss needs >= 2 pairs, got {}",
            anchors.len()
        )));
    }
    Ok(())
}

/// Mean over pairs of the mean over in-batch negatives of the Euclidean
/// triplet loss: `(1/|B|) sum_i (1/(|B|-1)) sum_{j!=i} L(a_i, p_i, p_j)`.
pub fn batch_loss(anchors: &[Vec<f64>], positives: &[Vec<f64>], margin: f64) -> Result<f64> {
    check_batch(anchors, positives)?;
    let b = anchors.len();
    let mut total = 0.0;
    for i in 0..b {
        let d_pos = euclidean_distance(&anchors[i], &positives[i]);
        let mut inner = 0.0;
        for j in 0..b {
            if j == i {
                continue;
            }
            let d_neg = euclidean_distance(&anchors[i], &positives[j]);
            inner += triplet_loss(d_pos, d_neg, margin);
        }
        total += inner / (b as f64 - 1.0);
    }
    Ok(total / b as f64)
}

/// Euclidean batch loss with gradients w.r.t. every anchor and positive.
/// Returns `(loss, active_triplet_fraction, grad_anchors, grad_positives)`.
pub fn batch_loss_backward(
    anchors: &[Vec<f64>],
    positives: &[Vec<f64>],
    margin: f64,
) -> Result<(f64, f64, Vec<Vec<f64>>, Vec<Vec<f64>>)> {
    check_batch(anchors, positives)?;
    let b = anchors.len();
    let dim = anchors[0].len();
    let weight = 1.0 / (b as f64 * (b as f64 - 1.0));

    let mut grad_anchors = vec![vec![0.0; dim]; b];
    let mut grad_positives = vec![vec![0.0; dim]; b];
    let mut total = 0.0;
    let mut active = 0usize;

    for i in 0..b {
        let d_pos = euclidean_distance(&anchors[i], &positives[i]);
        let mut inner = 0.0;
        for j in 0..b {
            if j == i {
                continue;
            }
            let d_neg = euclidean_distance(&anchors[i], &positives[j]);
            let arg = d_pos - d_neg + margin;
            if arg <= 0.0 {
                continue;
            }
            inner += arg;
            active += 1;
            if d_pos > 0.0 {
                for k in 0..dim {
                    let g = weight * (anchors[i][k] - positives[i][k]) / d_pos;
                    grad_anchors[i][k] += g;
                    grad_positives[i][k] -= g;
                }
            }
            if d_neg > 0.0 {
                for k in 0..dim {
                    let g = weight * (anchors[i][k] - positives[j][k]) / d_neg;
                    grad_anchors[i][k] -= g;
                    grad_positives[j][k] += g;
                }
            }
        }
        total += inner / (b as f64 - 1.0);
    }
    let fraction = active as f64 / (b as f64 * (b as f64 - 1.0));
    Ok((total / b as f64, fraction, grad_anchors, grad_positives))
}

/// `weight` times the mean squared Euclidean norm of the anchor embeddings.
pub fn l2_penalty(anchors: &[Vec<f64>], weight: f64) -> f64 {
    if anchors.is_empty() {
        return 0.0;
    }
    let mean_sq = anchors.iter().map(|a| dot(a, a)).sum::<f64>() / anchors.len() as f64;
    weight * mean_sq
}

/// Adds the L2 penalty gradient `2 * weight * a_i / |B|` onto `grad_anchors`.
pub fn l2_penalty_backward(anchors: &[Vec<f64>], weight: f64, grad_anchors: &mut [Vec<f64>]) {
    let scale = 2.0 * weight / anchors.len() as f64;
    for (grad, anchor) in grad_anchors.iter_mut().zip(anchors) {
        for (g, a) in grad.iter_mut().zip(anchor) {
            *g += scale * a;
        }
    }
}

/// Softmax contrastive loss over cosine similarities:
/// `-(1/|B|) sum_i log( exp(sim(a_i,p_i)/tau) / sum_j exp(sim(a_i,p_j)/tau) )`,
/// computed with max-subtraction for stability.
pub fn cosine_softmax_loss(
    anchors: &[Vec<f64>],
    positives: &[Vec<f64>],
    temperature: f64,
) -> Result<f64> {
    let (loss, _, _) = cosine_softmax_inner(anchors, positives, temperature, false)?;
    Ok(loss)
}

/// Cosine softmax loss with gradients w.r.t. anchors and positives.
pub fn cosine_softmax_backward(
    anchors: &[Vec<f64>],
    positives: &[Vec<f64>],
    temperature: f64,
) -> Result<(f64, Vec<Vec<f64>>, Vec<Vec<f64>>)> {
    let (loss, ga, gp) = cosine_softmax_inner(anchors, positives, temperature, true)?;
    Ok((loss, ga, gp))
}

fn cosine_softmax_inner(
    anchors: &[Vec<f64>],
    positives: &[Vec<f64>],
    temperature: f64,
    with_grads: bool,
) -> Result<(f64, Vec<Vec<f64>>, Vec<Vec<f64>>)> {
    check_batch(anchors, positives)?;
    if temperature <= 0.0 {
        return Err(Error::InvalidArgument(format!(
            "temperature must be > 0, got {temperature}"
        )));
    }
    let b = anchors.len();
    let dim = anchors[0].len();

    let anchor_norms: Vec<f64> = anchors.iter().map(|a| norm(a)).collect();
    let positive_norms: Vec<f64> = positives.iter().map(|p| norm(p)).collect();
    for (idx, n) in anchor_norms.iter().chain(positive_norms.iter()).enumerate() {
        if *n == 0.0 {
            return Err(Error::InvalidArgument(format!(
                "zero-norm embedding at batch slot {idx} in cosine softmax loss"
            )));
        }
    }

    // sims[i][j] = cos(a_i, p_j); logits divide by temperature.
    let mut sims = vec![vec![0.0; b]; b];
    for i in 0..b {
        for j in 0..b {
            sims[i][j] = dot(&anchors[i], &positives[j]) / (anchor_norms[i] * positive_norms[j]);
        }
    }

    let mut loss = 0.0;
    // softmax[i][j] over j, reused for the gradient.
    let mut probs = vec![vec![0.0; b]; b];
    for i in 0..b {
        let logits: Vec<f64> = sims[i].iter().map(|s| s / temperature).collect();
        let max = logits.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let mut denom = 0.0;
        for j in 0..b {
            let e = (logits[j] - max).exp();
            probs[i][j] = e;
            denom += e;
        }
        for j in 0..b {
            probs[i][j] /= denom;
        }
        loss += denom.ln() + max - logits[i];
    }
    loss /= b as f64;

    if !with_grads {
        return Ok((loss, Vec::new(), Vec::new()));
    }

    let mut grad_anchors = vec![vec![0.0; dim]; b];
    let mut grad_positives = vec![vec![0.0; dim]; b];
    let scale = 1.0 / (temperature * b as f64);
    for i in 0..b {
        for j in 0..b {
            let g = scale * (probs[i][j] - if i == j { 1.0 } else { 0.0 });
            if g == 0.0 {
                continue;
            }
            let na = anchor_norms[i];
            let np = positive_norms[j];
            let sim = sims[i][j];
            for k in 0..dim {
                grad_anchors[i][k] += g * (positives[j][k] / (na * np) - sim * anchors[i][k] / (na * na));
                grad_positives[j][k] +=
                    g * (anchors[i][k] / (na * np) - sim * positives[j][k] / (np * np));
            }
        }
    }
    Ok((loss, grad_anchors, grad_positives))
}
