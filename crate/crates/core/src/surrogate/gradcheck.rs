use rand::{Rng, SeedableRng};
use rand_xoshiro::Xoshiro256StarStar;
use serde::{Deserialize, Serialize};

use super::{encode_batch, Gradients, SurrogateModel, OUTPUT_WIDTH};
use crate::dataset::Sample;
use crate::pattern::Genome;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum LayerPick {
    All,
    Layer(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GradCheckConfig {
    pub epsilon: f64,
    pub coords: usize,
    pub seed: u64,
    pub layer: LayerPick,
}

impl Default for GradCheckConfig {
    fn default() -> Self {
        GradCheckConfig {
            epsilon: 1e-5,
            coords: 100,
            seed: 0,
            layer: LayerPick::All,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GradCheckReport {
    pub max_rel_error: f64,
    pub checked: usize,
    pub skipped: usize,
}

const RESIDUAL_FLOOR: f64 = 1e-7;
const REL_FLOOR: f64 = 1e-7;

/// Sign pattern of every hidden pre-activation and output residual.
fn kinks(model: &SurrogateModel, x: &[f64], y: &[f64], batch: usize) -> (Vec<bool>, Vec<f64>) {
    let pre = model.pre_activations(x, batch);
    let (out, hidden) = pre.split_last().expect("at least one layer");
    let residual: Vec<f64> = out.iter().zip(y).map(|(p, t)| p - t).collect();
    let mut signs: Vec<bool> = hidden.iter().flatten().map(|z| *z > 0.0).collect();
    signs.extend(residual.iter().map(|r| *r > 0.0));
    (signs, residual)
}

fn loss(model: &SurrogateModel, x: &[f64], y: &[f64], batch: usize) -> f64 {
    let out = model.forward_encoded(x, batch);
    out.iter().zip(y).map(|(p, t)| (p - t).abs()).sum::<f64>() / (batch * OUTPUT_WIDTH) as f64
}

fn param_mut(model: &mut SurrogateModel, layer: usize, idx: usize) -> &mut f64 {
    let l = &mut model.layers_mut()[layer];
    let nw = l.weights.len();
    if idx < nw {
        &mut l.weights[idx]
    } else {
        &mut l.bias[idx - nw]
    }
}

/// Compares backprop against central differences of the MAE loss.
pub fn grad_check(model: &SurrogateModel, samples: &[Sample], cfg: &GradCheckConfig) -> Result<GradCheckReport> {
    grad_check_with(model, samples, cfg, |m, x, y, b| m.loss_and_gradients(x, y, b).1)
}

/// As [`grad_check`] with the analytic gradient supplied by `analytic`.
pub fn grad_check_with<F>(
    model: &SurrogateModel,
    samples: &[Sample],
    cfg: &GradCheckConfig,
    analytic: F,
) -> Result<GradCheckReport>
where
    F: Fn(&SurrogateModel, &[f64], &[f64], usize) -> Gradients,
{
    if samples.is_empty() {
        return Err(Error::InvalidArgument("gradient check needs at least one sample".into()));
    }
    if !(cfg.epsilon > 0.0) {
        return Err(Error::InvalidArgument("epsilon must be positive".into()));
    }
    let n_layers = model.layers().len();
    if let LayerPick::Layer(i) = cfg.layer {
        if i >= n_layers {
            return Err(Error::InvalidArgument(format!("layer {i} out of range (model has {n_layers})")));
        }
    }
    let batch = samples.len();
    let genomes: Vec<Genome> = samples.iter().map(|s| s.genome).collect();
    let x = encode_batch(&genomes);
    let y: Vec<f64> = samples.iter().flat_map(|s| s.response.to_split()).collect();

    let grads = analytic(model, &x, &y, batch);
    let (_, residual) = kinks(model, &x, &y, batch);
    let mut rng = Xoshiro256StarStar::seed_from_u64(cfg.seed);
    let mut probe = model.clone();
    let mut report = GradCheckReport {
        max_rel_error: 0.0,
        checked: 0,
        skipped: 0,
    };

    for _ in 0..cfg.coords {
        let layer = match cfg.layer {
            LayerPick::All => rng.gen_range(0..n_layers),
            LayerPick::Layer(i) => i,
        };
        let l = &model.layers()[layer];
        let idx = rng.gen_range(0..l.weights.len() + l.bias.len());

        // Output-layer parameters only touch one output column.
        let near_zero = if layer + 1 == n_layers {
            let j = if idx < l.weights.len() { idx / l.n_in } else { idx - l.weights.len() };
            residual.iter().skip(j).step_by(OUTPUT_WIDTH).any(|r| r.abs() < RESIDUAL_FLOOR)
        } else {
            residual.iter().any(|r| r.abs() < RESIDUAL_FLOOR)
        };

        let orig = *param_mut(&mut probe, layer, idx);
        *param_mut(&mut probe, layer, idx) = orig + cfg.epsilon;
        let (sp, _) = kinks(&probe, &x, &y, batch);
        let lp = loss(&probe, &x, &y, batch);
        *param_mut(&mut probe, layer, idx) = orig - cfg.epsilon;
        let (sm, _) = kinks(&probe, &x, &y, batch);
        let lm = loss(&probe, &x, &y, batch);
        *param_mut(&mut probe, layer, idx) = orig;

        if near_zero || sp != sm {
            report.skipped += 1;
            continue;
        }
        let numeric = (lp - lm) / (2.0 * cfg.epsilon);
        let nw = grads.weights[layer].len();
        let a = if idx < nw { grads.weights[layer][idx] } else { grads.bias[layer][idx - nw] };
        let rel = (a - numeric).abs() / a.abs().max(numeric.abs()).max(REL_FLOOR);
        report.max_rel_error = report.max_rel_error.max(rel);
        report.checked += 1;
    }
    Ok(report)
}
