//! Clipped-surrogate loss, its analytic gradient and the update loop.

use ndarray::{Array1, Array2, ArrayView2, Axis};
use rand::seq::SliceRandom;
use rand::Rng;

use super::adam::OptimizerState;
use super::policy::{entropy, PolicyParams};
use super::{MarlError, TrainConfig};

/// Loss weights and clip range.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LossCoefficients {
    pub clip_range: f64,
    pub value_coef: f64,
    pub entropy_coef: f64,
    pub normalize_advantages: bool,
}

impl From<&TrainConfig> for LossCoefficients {
    fn from(c: &TrainConfig) -> Self {
        Self {
            clip_range: c.clip_range,
            value_coef: c.value_coef,
            entropy_coef: c.entropy_coef,
            normalize_advantages: c.normalize_advantages,
        }
    }
}

/// Transitions pooled over environments, steps and agents.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct FlatBatch {
    pub observations: Array2<f64>,
    pub actions: Array2<f64>,
    pub log_probs: Vec<f64>,
    pub advantages: Vec<f64>,
    pub returns: Vec<f64>,
}

impl FlatBatch {
    pub fn len(&self) -> usize {
        self.log_probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.log_probs.is_empty()
    }

    pub fn select(&self, idx: &[usize]) -> FlatBatch {
        FlatBatch {
            observations: self.observations.select(Axis(0), idx),
            actions: self.actions.select(Axis(0), idx),
            log_probs: idx.iter().map(|&i| self.log_probs[i]).collect(),
            advantages: idx.iter().map(|&i| self.advantages[i]).collect(),
            returns: idx.iter().map(|&i| self.returns[i]).collect(),
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct LossStats {
    pub policy: f64,
    pub value: f64,
    pub entropy: f64,
    pub total: f64,
    pub approx_kl: f64,
    pub clip_fraction: f64,
}

/// Zero mean, unit (population) standard deviation.
pub fn normalize_advantages(adv: &[f64]) -> Vec<f64> {
    let n = adv.len() as f64;
    let mean = adv.iter().sum::<f64>() / n;
    let var = adv.iter().map(|a| (a - mean).powi(2)).sum::<f64>() / n;
    let std = var.sqrt();
    adv.iter().map(|a| (a - mean) / (std + 1e-8)).collect()
}

struct Forward {
    stats: LossStats,
    /// ∂L/∂log π per sample
    dlogp: Vec<f64>,
    /// ∂L/∂V per sample
    dvalue: Vec<f64>,
}

fn evaluate(
    params: &PolicyParams,
    mean: ArrayView2<f64>,
    values: &Array1<f64>,
    batch: &FlatBatch,
    k: &LossCoefficients,
) -> Forward {
    let b = batch.len();
    let bf = b as f64;
    let adv = if k.normalize_advantages && b > 1 {
        normalize_advantages(&batch.advantages)
    } else {
        batch.advantages.clone()
    };
    let log_std = params.log_std.as_slice().expect("standard layout");
    let mut policy = 0.0;
    let mut value = 0.0;
    let mut kl = 0.0;
    let mut clipped = 0usize;
    let mut dlogp = vec![0.0; b];
    let mut dvalue = vec![0.0; b];
    for i in 0..b {
        let mu = mean.row(i);
        let lp = super::policy::log_prob(
            batch.actions.row(i).as_slice().expect("standard layout"),
            mu.as_slice().expect("standard layout"),
            log_std,
        );
        let log_ratio = lp - batch.log_probs[i];
        let ratio = log_ratio.exp();
        let unclipped = ratio * adv[i];
        let bounded = ratio.clamp(1.0 - k.clip_range, 1.0 + k.clip_range) * adv[i];
        if unclipped <= bounded {
            policy -= unclipped;
            dlogp[i] = -unclipped / bf;
        } else {
            policy -= bounded;
        }
        if (ratio - 1.0).abs() > k.clip_range {
            clipped += 1;
        }
        kl += (ratio - 1.0) - log_ratio;
        let err = values[i] - batch.returns[i];
        value += err * err;
        dvalue[i] = k.value_coef * 2.0 * err / bf;
    }
    let policy = policy / bf;
    let value = value / bf;
    let h = entropy(log_std);
    let stats = LossStats {
        policy,
        value,
        entropy: h,
        total: policy + k.value_coef * value - k.entropy_coef * h,
        approx_kl: kl / bf,
        clip_fraction: clipped as f64 / bf,
    };
    Forward { stats, dlogp, dvalue }
}

/// Loss only, no gradient.
pub fn ppo_loss(params: &PolicyParams, batch: &FlatBatch, k: &LossCoefficients) -> LossStats {
    let mean = params.actor_forward(batch.observations.view());
    let values = params.critic_forward(batch.observations.view());
    evaluate(params, mean.view(), &values, batch, k).stats
}

/// Loss and `∂loss/∂θ` by reverse mode through both networks.
pub fn ppo_loss_and_grad(params: &PolicyParams, batch: &FlatBatch, k: &LossCoefficients) -> (LossStats, PolicyParams) {
    let actor_cache = params.actor.forward_cached(batch.observations.view());
    let critic_cache = params.critic.forward_cached(batch.observations.view());
    let mean = actor_cache.output();
    let values = critic_cache.output().column(0).to_owned();
    let fwd = evaluate(params, mean.view(), &values, batch, k);

    let mut grad = params.zeros_like();
    let inv_var = params.log_std.mapv(|ls| (-2.0 * ls).exp());
    let mut dmean = Array2::<f64>::zeros(mean.raw_dim());
    for i in 0..batch.len() {
        let g = fwd.dlogp[i];
        if g == 0.0 {
            continue;
        }
        for j in 0..mean.ncols() {
            let diff = batch.actions[[i, j]] - mean[[i, j]];
            // ∂log π/∂μ = (a - μ)/σ², ∂log π/∂log σ = (a - μ)²/σ² - 1
            dmean[[i, j]] = g * diff * inv_var[j];
            grad.log_std[j] += g * (diff * diff * inv_var[j] - 1.0);
        }
    }
    grad.log_std -= k.entropy_coef;
    params.actor.backward(&actor_cache, dmean, &mut grad.actor);
    let dvalue = Array2::from_shape_vec((batch.len(), 1), fwd.dvalue).expect("one value per sample");
    params.critic.backward(&critic_cache, dvalue, &mut grad.critic);
    (fwd.stats, grad)
}

/// Rescales `grad` so its global L2 norm is at most `max_norm`; returns the
/// norm before clipping.
pub fn clip_grad_norm(grad: &mut PolicyParams, max_norm: f64) -> f64 {
    let norm = grad.tensors().flatten().map(|g| g * g).sum::<f64>().sqrt();
    if norm > max_norm {
        let scale = max_norm / (norm + 1e-12);
        for t in grad.tensors_mut() {
            t.iter_mut().for_each(|g| *g *= scale);
        }
    }
    norm
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct UpdateStats {
    pub loss: LossStats,
    pub grad_norm: f64,
    pub minibatch_size: usize,
}

/// `epochs` passes over shuffled minibatches with clipped Adam steps.
/// Reported statistics are averages over every minibatch step.
pub fn ppo_update<R: Rng + ?Sized>(
    params: &mut PolicyParams,
    opt: &mut OptimizerState,
    batch: &FlatBatch,
    config: &TrainConfig,
    rng: &mut R,
) -> Result<UpdateStats, MarlError> {
    let n = batch.len();
    let mb = config.num_minibatches;
    if mb == 0 || n % mb != 0 {
        return Err(MarlError::Usage(format!("{mb} minibatches do not divide a batch of {n}")));
    }
    let size = n / mb;
    let k = LossCoefficients::from(config);
    let mut order: Vec<usize> = (0..n).collect();
    let mut sum = UpdateStats::default();
    let mut count = 0.0;
    for epoch in 0..config.epochs {
        order.shuffle(rng);
        for (m, idx) in order.chunks(size).enumerate() {
            let sub = batch.select(idx);
            let (stats, mut grad) = ppo_loss_and_grad(params, &sub, &k);
            if !stats.total.is_finite() {
                return Err(MarlError::TrainingFault(format!(
                    "non-finite loss at epoch {epoch}, minibatch {m}: policy {} value {} entropy {}",
                    stats.policy, stats.value, stats.entropy
                )));
            }
            let norm = clip_grad_norm(&mut grad, config.max_grad_norm);
            opt.apply(params, &grad, config.learning_rate);
            sum.loss.policy += stats.policy;
            sum.loss.value += stats.value;
            sum.loss.entropy += stats.entropy;
            sum.loss.total += stats.total;
            sum.loss.approx_kl += stats.approx_kl;
            sum.loss.clip_fraction += stats.clip_fraction;
            sum.grad_norm += norm;
            count += 1.0;
        }
    }
    if !params.is_finite() {
        return Err(MarlError::TrainingFault("parameters became non-finite after update".into()));
    }
    let avg = |v: f64| if count > 0.0 { v / count } else { 0.0 };
    Ok(UpdateStats {
        loss: LossStats {
            policy: avg(sum.loss.policy),
            value: avg(sum.loss.value),
            entropy: avg(sum.loss.entropy),
            total: avg(sum.loss.total),
            approx_kl: avg(sum.loss.approx_kl),
            clip_fraction: avg(sum.loss.clip_fraction),
        },
        grad_norm: avg(sum.grad_norm),
        minibatch_size: size,
    })
}
