use rand::{Rng, RngCore, SeedableRng};
use rand_xoshiro::Xoshiro256StarStar;
use serde::{Deserialize, Serialize};

use super::target::{fitness, TargetSpec};
use crate::oracle::ResponseModel;
use crate::pattern::{Genome, GENOME_BITS};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GaConfig {
    pub population: usize,
    pub generations: usize,
    pub tournament: usize,
    /// Per-bit probability of taking the first parent's bit.
    pub crossover_p: f64,
    pub mutation_p: f64,
    pub elitism: usize,
    pub seed: u64,
}

impl Default for GaConfig {
    fn default() -> Self {
        GaConfig {
            population: 1000,
            generations: 300,
            tournament: 4,
            crossover_p: 0.5,
            mutation_p: 1.0 / 64.0,
            elitism: 2,
            seed: 0,
        }
    }
}

impl GaConfig {
    pub fn validate(&self) -> Result<()> {
        let prob = |p: f64| p > 0.0 && p <= 1.0;
        if self.population < 2
            || self.tournament == 0
            || self.elitism > self.population
            || !prob(self.crossover_p)
            || !prob(self.mutation_p)
        {
            return Err(Error::InvalidArgument(format!("invalid GA config: {self:?}")));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GenerationStats {
    pub generation: usize,
    pub best: f64,
    pub median: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaResult {
    pub best: Genome,
    pub best_fitness: f64,
    /// Generation 0 is the initial population.
    pub history: Vec<GenerationStats>,
}

impl GaResult {
    /// Median fitness of the initial population.
    pub fn baseline_median(&self) -> f64 {
        self.history[0].median
    }

    pub fn history_csv(&self) -> String {
        let mut out = String::from("generation,best_fitness,median_fitness\n");
        for h in &self.history {
            out.push_str(&format!("{},{},{}\n", h.generation, h.best, h.median));
        }
        out
    }
}

pub fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n == 0 {
        f64::NAN
    } else if n % 2 == 1 {
        v[n / 2]
    } else {
        (v[n / 2 - 1] + v[n / 2]) / 2.0
    }
}

fn evaluate(model: &dyn ResponseModel, pop: &[Genome], target: &TargetSpec) -> Result<Vec<f64>> {
    Ok(model
        .predict_batch(pop)?
        .iter()
        .map(|r| fitness(r, target))
        .collect())
}

fn stats(generation: usize, fit: &[f64]) -> GenerationStats {
    GenerationStats {
        generation,
        best: fit.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        median: median(fit),
    }
}

fn bit_mask(rng: &mut Xoshiro256StarStar, p: f64) -> u64 {
    if p == 0.5 {
        return rng.next_u64();
    }
    (0..GENOME_BITS).fold(0u64, |m, i| if rng.gen::<f64>() < p { m | (1 << i) } else { m })
}

fn tournament(rng: &mut Xoshiro256StarStar, fit: &[f64], k: usize) -> usize {
    let mut best = rng.gen_range(0..fit.len());
    for _ in 1..k {
        let c = rng.gen_range(0..fit.len());
        if fit[c] > fit[best] {
            best = c;
        }
    }
    best
}

/// Generational GA with tournament selection, uniform crossover, bit-flip
/// mutation and elitism. `seeds` replace the first members of the random
/// initial population.
pub fn ga_run(
    cfg: &GaConfig,
    model: &dyn ResponseModel,
    target: &TargetSpec,
    seeds: &[Genome],
) -> Result<GaResult> {
    cfg.validate()?;
    let mut rng = Xoshiro256StarStar::seed_from_u64(cfg.seed);
    let mut pop: Vec<Genome> = (0..cfg.population)
        .map(|_| Genome::from_bits(rng.next_u64()))
        .collect();
    for (slot, s) in pop.iter_mut().zip(seeds) {
        *slot = *s;
    }
    let mut fit = evaluate(model, &pop, target)?;
    let mut history = vec![stats(0, &fit)];

    for generation in 1..=cfg.generations {
        let mut order: Vec<usize> = (0..pop.len()).collect();
        order.sort_by(|a, b| fit[*b].total_cmp(&fit[*a]).then(a.cmp(b)));
        let mut next: Vec<Genome> = order[..cfg.elitism].iter().map(|&i| pop[i]).collect();
        while next.len() < cfg.population {
            let a = pop[tournament(&mut rng, &fit, cfg.tournament)].bits();
            let b = pop[tournament(&mut rng, &fit, cfg.tournament)].bits();
            let take_a = bit_mask(&mut rng, cfg.crossover_p);
            let child = (a & take_a) | (b & !take_a);
            next.push(Genome::from_bits(child ^ bit_mask(&mut rng, cfg.mutation_p)));
        }
        pop = next;
        fit = evaluate(model, &pop, target)?;
        history.push(stats(generation, &fit));
    }

    let best = (0..pop.len())
        .max_by(|a, b| fit[*a].total_cmp(&fit[*b]).then(b.cmp(a)))
        .expect("population is non-empty");
    Ok(GaResult {
        best: pop[best],
        best_fitness: fit[best],
        history,
    })
}
