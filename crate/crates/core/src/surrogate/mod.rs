//! Fully connected ReLU network mapping a genome to its 122-value spectrum.
//!
//! Inputs are the 64 genome bits encoded as `±1`; outputs are the 61 real
//! parts followed by the 61 imaginary parts of `S22`. Everything is `f64` and
//! every reduction runs in a fixed order, so a given seed reproduces the same
//! weights bit for bit.

mod checkpoint;
mod gradcheck;
mod train;

use rand::{Rng, SeedableRng};
use rand_xoshiro::Xoshiro256StarStar;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::oracle::{ResponseModel, SpectralResponse, N_FREQ};
use crate::pattern::{Genome, GENOME_BITS};
use crate::{Error, Result};

pub use gradcheck::{grad_check, grad_check_with, GradCheckConfig, GradCheckReport, LayerPick};
pub use train::{train, EpochRecord, StopReason, TrainConfig, TrainHistory};

pub const INPUT_WIDTH: usize = GENOME_BITS;
pub const OUTPUT_WIDTH: usize = 2 * N_FREQ;

/// Hidden layer widths; input and output widths are fixed.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct SurrogateArch {
    pub hidden: Vec<usize>,
}

impl Default for SurrogateArch {
    fn default() -> Self {
        SurrogateArch {
            hidden: vec![256, 256, 256],
        }
    }
}

impl SurrogateArch {
    pub fn new(hidden: Vec<usize>) -> Result<Self> {
        let arch = SurrogateArch { hidden };
        arch.validate()?;
        Ok(arch)
    }

    pub fn validate(&self) -> Result<()> {
        if self.hidden.is_empty() {
            return Err(Error::InvalidArgument("network needs at least one hidden layer".into()));
        }
        if self.hidden.contains(&0) {
            return Err(Error::InvalidArgument("hidden layer widths must be positive".into()));
        }
        Ok(())
    }

    /// `(n_in, n_out)` of every layer, input to output.
    pub fn layer_shapes(&self) -> Vec<(usize, usize)> {
        let mut widths = vec![INPUT_WIDTH];
        widths.extend_from_slice(&self.hidden);
        widths.push(OUTPUT_WIDTH);
        widths.windows(2).map(|w| (w[0], w[1])).collect()
    }

    pub fn parameter_count(&self) -> usize {
        self.layer_shapes().iter().map(|(i, o)| i * o + o).sum()
    }
}

/// Weights `[n_out][n_in]` row-major plus bias.
#[derive(Debug, Clone, PartialEq)]
pub struct Dense {
    pub n_in: usize,
    pub n_out: usize,
    pub weights: Vec<f64>,
    pub bias: Vec<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct TrainingMeta {
    pub init_seed: u64,
    pub train_seed: Option<u64>,
    pub epochs: usize,
    pub best_epoch: usize,
    pub train_mae: Option<f64>,
    pub val_mae: Option<f64>,
    pub dataset_fingerprint: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SurrogateModel {
    arch: SurrogateArch,
    layers: Vec<Dense>,
    pub meta: TrainingMeta,
}

/// Per-layer gradients, same shapes as the model.
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients {
    pub weights: Vec<Vec<f64>>,
    pub bias: Vec<Vec<f64>>,
}

/// `C = beta*C + A*B` with explicit strides; `A` is `m×k`, `B` is `k×n`.
#[allow(clippy::too_many_arguments)]
fn gemm(
    m: usize,
    k: usize,
    n: usize,
    a: &[f64],
    (rsa, csa): (usize, usize),
    b: &[f64],
    (rsb, csb): (usize, usize),
    beta: f64,
    c: &mut [f64],
    (rsc, csc): (usize, usize),
) {
    if m == 0 || n == 0 {
        return;
    }
    let last = |rs: usize, cs: usize, r: usize, cc: usize| (r - 1) * rs + (cc - 1) * cs;
    assert!(k == 0 || a.len() > last(rsa, csa, m, k));
    assert!(k == 0 || b.len() > last(rsb, csb, k, n));
    assert!(c.len() > last(rsc, csc, m, n));
    // SAFETY: the asserts above keep every strided access inside the slices,
    // and `c` is uniquely borrowed.
    unsafe {
        matrixmultiply::dgemm(
            m,
            k,
            n,
            1.0,
            a.as_ptr(),
            rsa as isize,
            csa as isize,
            b.as_ptr(),
            rsb as isize,
            csb as isize,
            beta,
            c.as_mut_ptr(),
            rsc as isize,
            csc as isize,
        );
    }
}

pub(crate) fn encode_batch(genomes: &[Genome]) -> Vec<f64> {
    let mut x = vec![0.0; genomes.len() * INPUT_WIDTH];
    for (g, row) in genomes.iter().zip(x.chunks_mut(INPUT_WIDTH)) {
        g.signed_inputs(row);
    }
    x
}

/// He-style uniform initialisation with bound `sqrt(6 / fan_in)`, zero biases.
pub fn init_model(arch: &SurrogateArch, seed: u64) -> Result<SurrogateModel> {
    arch.validate()?;
    let mut rng = Xoshiro256StarStar::seed_from_u64(seed);
    let layers = arch
        .layer_shapes()
        .into_iter()
        .map(|(n_in, n_out)| {
            let bound = (6.0 / n_in as f64).sqrt();
            Dense {
                n_in,
                n_out,
                weights: (0..n_in * n_out).map(|_| rng.gen_range(-bound..bound)).collect(),
                bias: vec![0.0; n_out],
            }
        })
        .collect();
    Ok(SurrogateModel {
        arch: arch.clone(),
        layers,
        meta: TrainingMeta {
            init_seed: seed,
            ..TrainingMeta::default()
        },
    })
}

impl SurrogateModel {
    pub fn arch(&self) -> &SurrogateArch {
        &self.arch
    }

    pub fn layers(&self) -> &[Dense] {
        &self.layers
    }

    pub fn layers_mut(&mut self) -> &mut [Dense] {
        &mut self.layers
    }

    pub fn parameter_count(&self) -> usize {
        self.layers.iter().map(|l| l.weights.len() + l.bias.len()).sum()
    }

    pub fn is_finite(&self) -> bool {
        self.layers
            .iter()
            .all(|l| l.weights.iter().chain(&l.bias).all(|v| v.is_finite()))
    }

    /// Pre-activations of every layer for a row-major input batch.
    /// The last entry is the network output.
    pub(crate) fn pre_activations(&self, x: &[f64], batch: usize) -> Vec<Vec<f64>> {
        let mut pre = Vec::with_capacity(self.layers.len());
        let mut act: Vec<f64> = x.to_vec();
        for (li, layer) in self.layers.iter().enumerate() {
            let mut z = vec![0.0; batch * layer.n_out];
            for row in z.chunks_mut(layer.n_out) {
                row.copy_from_slice(&layer.bias);
            }
            gemm(
                batch,
                layer.n_in,
                layer.n_out,
                &act,
                (layer.n_in, 1),
                &layer.weights,
                (1, layer.n_in),
                1.0,
                &mut z,
                (layer.n_out, 1),
            );
            if li + 1 < self.layers.len() {
                act = z.iter().map(|v| v.max(0.0)).collect();
            }
            pre.push(z);
        }
        pre
    }

    /// Network output for a row-major batch of encoded inputs.
    pub fn forward_encoded(&self, x: &[f64], batch: usize) -> Vec<f64> {
        assert_eq!(x.len(), batch * INPUT_WIDTH);
        self.pre_activations(x, batch).pop().unwrap_or_default()
    }

    /// Batched prediction, `genomes.len() × 122` row-major. Rows are computed
    /// independently, so chunked parallel evaluation is exact.
    pub fn forward(&self, genomes: &[Genome]) -> Vec<f64> {
        const CHUNK: usize = 128;
        let parts: Vec<Vec<f64>> = genomes
            .par_chunks(CHUNK)
            .map(|chunk| self.forward_encoded(&encode_batch(chunk), chunk.len()))
            .collect();
        parts.concat()
    }

    /// Mean absolute error over all outputs and rows, plus the gradient of
    /// that loss with respect to every parameter.
    pub fn loss_and_gradients(&self, x: &[f64], y: &[f64], batch: usize) -> (f64, Gradients) {
        assert_eq!(y.len(), batch * OUTPUT_WIDTH);
        let pre = self.pre_activations(x, batch);
        let out = pre.last().expect("at least one layer");
        let scale = 1.0 / (batch * OUTPUT_WIDTH) as f64;
        let mut loss = 0.0;
        let mut delta: Vec<f64> = out
            .iter()
            .zip(y)
            .map(|(p, t)| {
                let r = p - t;
                loss += r.abs();
                if r > 0.0 {
                    scale
                } else if r < 0.0 {
                    -scale
                } else {
                    0.0
                }
            })
            .collect();
        loss *= scale;

        let n = self.layers.len();
        let mut gw = vec![Vec::new(); n];
        let mut gb = vec![Vec::new(); n];
        for li in (0..n).rev() {
            let layer = &self.layers[li];
            let input: Vec<f64> = if li == 0 {
                x.to_vec()
            } else {
                pre[li - 1].iter().map(|v| v.max(0.0)).collect()
            };
            let mut dw = vec![0.0; layer.n_out * layer.n_in];
            gemm(
                layer.n_out,
                batch,
                layer.n_in,
                &delta,
                (1, layer.n_out),
                &input,
                (layer.n_in, 1),
                0.0,
                &mut dw,
                (layer.n_in, 1),
            );
            let mut db = vec![0.0; layer.n_out];
            for row in delta.chunks(layer.n_out) {
                for (d, v) in db.iter_mut().zip(row) {
                    *d += v;
                }
            }
            if li > 0 {
                let mut dx = vec![0.0; batch * layer.n_in];
                gemm(
                    batch,
                    layer.n_out,
                    layer.n_in,
                    &delta,
                    (layer.n_out, 1),
                    &layer.weights,
                    (layer.n_in, 1),
                    0.0,
                    &mut dx,
                    (layer.n_in, 1),
                );
                for (d, z) in dx.iter_mut().zip(&pre[li - 1]) {
                    if *z <= 0.0 {
                        *d = 0.0;
                    }
                }
                delta = dx;
            }
            gw[li] = dw;
            gb[li] = db;
        }
        (loss, Gradients { weights: gw, bias: gb })
    }

    /// MAE of the model over a sample set, evaluated in fixed-size chunks.
    pub fn mae(&self, samples: &[crate::dataset::Sample]) -> f64 {
        if samples.is_empty() {
            return 0.0;
        }
        let genomes: Vec<Genome> = samples.iter().map(|s| s.genome).collect();
        let pred = self.forward(&genomes);
        let mut total = 0.0;
        for (row, s) in pred.chunks(OUTPUT_WIDTH).zip(samples) {
            let target = s.response.to_split();
            total += row.iter().zip(&target).map(|(p, t)| (p - t).abs()).sum::<f64>();
        }
        total / (samples.len() * OUTPUT_WIDTH) as f64
    }
}

impl ResponseModel for SurrogateModel {
    fn predict_batch(&self, genomes: &[Genome]) -> Result<Vec<SpectralResponse>> {
        self.forward(genomes)
            .chunks(OUTPUT_WIDTH)
            .map(SpectralResponse::from_split)
            .collect()
    }
}
