use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_xoshiro::Xoshiro256StarStar;
use serde::{Deserialize, Serialize};

use super::{encode_batch, SurrogateModel, OUTPUT_WIDTH};
use crate::dataset::Sample;
use crate::pattern::Genome;
use crate::{Error, Result};

/// Mini-batch Adam on MAE with a reduce-on-plateau learning rate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainConfig {
    pub batch: usize,
    pub lr0: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    /// Epochs without an improvement of `plateau_min_delta` that count as a plateau.
    pub plateau_patience: usize,
    pub plateau_min_delta: f64,
    pub lr_factor: f64,
    /// Learning-rate drops allowed; the plateau after the last drop ends training.
    pub max_plateau_drops: usize,
    pub max_epochs: usize,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            batch: 64,
            lr0: 1e-3,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
            plateau_patience: 10,
            plateau_min_delta: 1e-4,
            lr_factor: 0.1,
            max_plateau_drops: 2,
            max_epochs: 300,
            seed: 0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.batch == 0 || !(self.lr0 > 0.0) || self.max_epochs == 0 {
            return Err(Error::InvalidArgument(format!(
                "train config needs batch >= 1, lr0 > 0, max_epochs >= 1: {self:?}"
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpochRecord {
    pub epoch: usize,
    pub train_mae: f64,
    pub val_mae: f64,
    /// Learning rate used during this epoch (the initial rate for epoch 0).
    pub lr: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum StopReason {
    Plateau,
    MaxEpochs,
}

/// Epoch 0 is the untrained model; epochs `1..` follow each training pass.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainHistory {
    pub records: Vec<EpochRecord>,
    pub best_epoch: usize,
    pub best_val_mae: f64,
    pub stop: StopReason,
}

impl TrainHistory {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("epoch,train_mae,val_mae,lr\n");
        for r in &self.records {
            out.push_str(&format!("{},{},{},{}\n", r.epoch, r.train_mae, r.val_mae, r.lr));
        }
        out
    }

    pub fn final_lr(&self) -> f64 {
        self.records.last().map_or(0.0, |r| r.lr)
    }
}

struct Adam {
    m: Vec<Vec<f64>>,
    v: Vec<Vec<f64>>,
    t: i32,
}

impl Adam {
    fn new(model: &SurrogateModel) -> Self {
        let shapes: Vec<usize> = model
            .layers()
            .iter()
            .flat_map(|l| [l.weights.len(), l.bias.len()])
            .collect();
        Adam {
            m: shapes.iter().map(|n| vec![0.0; *n]).collect(),
            v: shapes.iter().map(|n| vec![0.0; *n]).collect(),
            t: 0,
        }
    }

    fn step(&mut self, model: &mut SurrogateModel, grads: &super::Gradients, lr: f64, cfg: &TrainConfig) {
        self.t += 1;
        let c1 = 1.0 - cfg.beta1.powi(self.t);
        let c2 = 1.0 - cfg.beta2.powi(self.t);
        for (li, layer) in model.layers_mut().iter_mut().enumerate() {
            let pairs = [
                (&mut layer.weights, &grads.weights[li], 2 * li),
                (&mut layer.bias, &grads.bias[li], 2 * li + 1),
            ];
            for (params, g, slot) in pairs {
                let m = &mut self.m[slot];
                let v = &mut self.v[slot];
                for i in 0..params.len() {
                    m[i] = cfg.beta1 * m[i] + (1.0 - cfg.beta1) * g[i];
                    v[i] = cfg.beta2 * v[i] + (1.0 - cfg.beta2) * g[i] * g[i];
                    let mh = m[i] / c1;
                    let vh = v[i] / c2;
                    params[i] -= lr * mh / (vh.sqrt() + cfg.eps);
                }
            }
        }
    }
}

fn targets(samples: &[Sample], idx: &[usize]) -> Vec<f64> {
    let mut y = Vec::with_capacity(idx.len() * OUTPUT_WIDTH);
    for &i in idx {
        y.extend(samples[i].response.to_split());
    }
    y
}

/// Trains `model` and returns the best-validation checkpoint with its history.
pub fn train(
    mut model: SurrogateModel,
    train_set: &[Sample],
    val_set: &[Sample],
    cfg: &TrainConfig,
) -> Result<(SurrogateModel, TrainHistory)> {
    cfg.validate()?;
    if train_set.is_empty() || val_set.is_empty() {
        return Err(Error::InvalidArgument("training and validation sets must be non-empty".into()));
    }
    let mut rng = Xoshiro256StarStar::seed_from_u64(cfg.seed);
    let mut adam = Adam::new(&model);
    let mut lr = cfg.lr0;

    let val0 = model.mae(val_set);
    let train0 = model.mae(train_set);
    if !val0.is_finite() || !train0.is_finite() {
        return Err(Error::Divergence { epoch: 0 });
    }
    let mut records = vec![EpochRecord {
        epoch: 0,
        train_mae: train0,
        val_mae: val0,
        lr,
    }];
    let mut best = (0usize, val0, model.clone());
    let mut plateau_ref = val0;
    let mut stale = 0usize;
    let mut drops = 0usize;
    let mut stop = StopReason::MaxEpochs;

    let mut order: Vec<usize> = (0..train_set.len()).collect();
    for epoch in 1..=cfg.max_epochs {
        order.shuffle(&mut rng);
        let mut loss_sum = 0.0;
        for idx in order.chunks(cfg.batch) {
            let genomes: Vec<Genome> = idx.iter().map(|&i| train_set[i].genome).collect();
            let x = encode_batch(&genomes);
            let y = targets(train_set, idx);
            let (loss, grads) = model.loss_and_gradients(&x, &y, idx.len());
            if !loss.is_finite() {
                return Err(Error::Divergence { epoch });
            }
            loss_sum += loss * idx.len() as f64;
            adam.step(&mut model, &grads, lr, cfg);
        }
        let train_mae = loss_sum / train_set.len() as f64;
        let val_mae = model.mae(val_set);
        if !val_mae.is_finite() || !model.is_finite() {
            return Err(Error::Divergence { epoch });
        }
        records.push(EpochRecord {
            epoch,
            train_mae,
            val_mae,
            lr,
        });
        if val_mae < best.1 {
            best = (epoch, val_mae, model.clone());
        }

        if val_mae < plateau_ref - cfg.plateau_min_delta {
            plateau_ref = val_mae;
            stale = 0;
        } else {
            stale += 1;
        }
        if stale >= cfg.plateau_patience {
            if drops >= cfg.max_plateau_drops {
                stop = StopReason::Plateau;
                break;
            }
            lr *= cfg.lr_factor;
            drops += 1;
            stale = 0;
        }
    }

    let (best_epoch, best_val, mut best_model) = best;
    best_model.meta.train_seed = Some(cfg.seed);
    best_model.meta.epochs = records.len() - 1;
    best_model.meta.best_epoch = best_epoch;
    best_model.meta.train_mae = Some(records[best_epoch].train_mae);
    best_model.meta.val_mae = Some(best_val);
    Ok((
        best_model,
        TrainHistory {
            records,
            best_epoch,
            best_val_mae: best_val,
            stop,
        },
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::generate;
    use crate::oracle::Oracle;
    use crate::surrogate::{init_model, SurrogateArch};

    #[test]
    fn memorises_single_sample() {
        let d = generate(2, 11, &Oracle::default(), None).unwrap();
        let model = init_model(&SurrogateArch::default(), 4).unwrap();
        let cfg = TrainConfig {
            max_epochs: 500,
            seed: 1,
            ..TrainConfig::default()
        };
        let (m, h) = train(model, &d.samples[..1], &d.samples[..1], &cfg).unwrap();
        assert!(h.best_val_mae < 1e-3, "best {}", h.best_val_mae);
        assert!(m.mae(&d.samples[..1]) < 1e-3);
    }

    #[test]
    fn deterministic_and_best_checkpoint() {
        let d = generate(44, 5, &Oracle::default(), None).unwrap();
        let (t, v) = crate::dataset::split(&d.samples).unwrap();
        let arch = SurrogateArch::new(vec![16]).unwrap();
        let cfg = TrainConfig {
            max_epochs: 15,
            batch: 8,
            seed: 3,
            ..TrainConfig::default()
        };
        let (a, ha) = train(init_model(&arch, 1).unwrap(), t, v, &cfg).unwrap();
        let (b, hb) = train(init_model(&arch, 1).unwrap(), t, v, &cfg).unwrap();
        assert_eq!(a, b);
        assert_eq!(ha, hb);
        let min = ha.records.iter().map(|r| r.val_mae).fold(f64::INFINITY, f64::min);
        assert_eq!(ha.best_val_mae, min);
        assert_eq!(a.mae(v), min);
        assert!(ha.records[ha.best_epoch].val_mae <= ha.records[0].val_mae);
        assert_eq!(ha.to_csv().lines().count(), ha.records.len() + 1);
    }

    #[test]
    fn plateau_schedule_reaches_1e_minus_5() {
        // A zero learning rate never improves, so plateaus fire on schedule.
        let d = generate(22, 5, &Oracle::default(), None).unwrap();
        let (t, v) = crate::dataset::split(&d.samples).unwrap();
        let model = init_model(&SurrogateArch::new(vec![4]).unwrap(), 1).unwrap();
        let cfg = TrainConfig {
            lr0: 1e-3,
            plateau_patience: 2,
            plateau_min_delta: 10.0,
            max_epochs: 100,
            ..TrainConfig::default()
        };
        let (_, h) = train(model, t, v, &cfg).unwrap();
        assert_eq!(h.stop, StopReason::Plateau);
        assert!((h.final_lr() - 1e-5).abs() < 1e-18);
        // 3 plateaus of 2 epochs each
        assert_eq!(h.records.len(), 7);
    }

    #[test]
    fn divergence_detected() {
        let d = generate(22, 5, &Oracle::default(), None).unwrap();
        let (t, v) = crate::dataset::split(&d.samples).unwrap();
        let mut model = init_model(&SurrogateArch::new(vec![4]).unwrap(), 1).unwrap();
        model.layers_mut()[1].bias[0] = f64::NAN;
        let err = train(model, t, v, &TrainConfig::default()).unwrap_err();
        assert!(matches!(err, Error::Divergence { epoch: 0 }));
    }

    #[test]
    fn rejects_bad_config() {
        let d = generate(22, 5, &Oracle::default(), None).unwrap();
        let model = init_model(&SurrogateArch::new(vec![4]).unwrap(), 1).unwrap();
        let cfg = TrainConfig {
            batch: 0,
            ..TrainConfig::default()
        };
        assert!(train(model.clone(), &d.samples, &d.samples, &cfg).is_err());
        assert!(train(model, &[], &d.samples, &TrainConfig::default()).is_err());
    }
}
