//! Replicated fits of several schedules on synthetic designs.
//!
//! Each replicate draws `n + 1` points, fits every schedule on the first
//! `n` and predicts the last. Work is spread over the current rayon pool;
//! results land in pre-assigned slots, so reports do not depend on the
//! number of threads.

use betagos::generators::GeneratorKind;
use betagos::inference::{predictive_bias, run_chain, summarize, ChainOptions, ModelConfig};
use betagos::{BetaSchedule, Partition, Result, Seeder};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Prior hyperparameters other than the schedule.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Hyper {
    pub mu0: f64,
    pub sigma0: f64,
    pub a0: f64,
    pub b0: f64,
}

impl Default for Hyper {
    fn default() -> Self {
        Self { mu0: 0.0, sigma0: 10.0, a0: 2.004, b0: 0.0063 }
    }
}

impl Hyper {
    pub fn model(&self, schedule: BetaSchedule) -> Result<ModelConfig> {
        ModelConfig::new(self.mu0, self.sigma0, self.a0, self.b0, schedule)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkConfig {
    pub generators: Vec<GeneratorKind>,
    pub fitters: Vec<BetaSchedule>,
    pub replicates: usize,
    /// Points used for fitting.
    pub n: usize,
    pub hyper: Hyper,
    pub chain: ChainOptions,
    pub seed: u64,
}

impl BenchmarkConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(betagos::Error::InvalidInput(m.into()));
        if self.generators.is_empty() || self.fitters.is_empty() {
            return bad("need at least one generator and one fitter");
        }
        if self.replicates == 0 {
            return bad("replicates must be >= 1");
        }
        if self.n == 0 {
            return bad("n must be >= 1");
        }
        for f in &self.fitters {
            self.hyper.model(f.clone())?;
        }
        self.chain.validate()
    }

    pub fn data_seeder(&self, generator: usize, replicate: usize) -> Seeder {
        Seeder::new(self.seed).child(0).child(generator as u64).child(replicate as u64)
    }

    pub fn chain_seeder(&self, generator: usize, replicate: usize, fitter: usize) -> Seeder {
        Seeder::new(self.seed).child(1).child(generator as u64).child(replicate as u64).child(fitter as u64)
    }

    pub fn predict_seeder(&self, generator: usize, replicate: usize, fitter: usize) -> Seeder {
        Seeder::new(self.seed).child(2).child(generator as u64).child(replicate as u64).child(fitter as u64)
    }
}

/// Fitter name used in reports.
pub fn fitter_name(s: &BetaSchedule) -> String {
    match s {
        BetaSchedule::DpDeterministic { theta } => format!("dp({theta})"),
        _ => format!("betagos({s})"),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReplicateResult {
    pub replicate: usize,
    pub true_k: usize,
    pub k_estimate: usize,
    pub matched: f64,
    pub pairwise: f64,
    pub predictive_bias: f64,
    pub tau: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Stat {
    pub mean: f64,
    pub sd: f64,
}

impl Stat {
    pub fn of(values: impl IntoIterator<Item = f64>) -> Self {
        let v: Vec<f64> = values.into_iter().collect();
        let n = v.len() as f64;
        let mean = v.iter().sum::<f64>() / n;
        let sd = if v.len() > 1 { (v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt() } else { 0.0 };
        Self { mean, sd }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkCell {
    pub generator: String,
    pub fitter: String,
    pub replicates: usize,
    pub k: Stat,
    pub matched: Stat,
    pub pairwise: Stat,
    pub predictive_bias: Stat,
    pub tau: Stat,
    pub runs: Vec<ReplicateResult>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkReport {
    pub config: BenchmarkConfig,
    pub cells: Vec<BenchmarkCell>,
}

impl BenchmarkReport {
    pub fn cell(&self, generator: &str, fitter: &str) -> Option<&BenchmarkCell> {
        self.cells.iter().find(|c| c.generator == generator && c.fitter == fitter)
    }

    /// One row per cell, for plotting.
    pub fn rows(&self) -> Vec<CellRow> {
        self.cells
            .iter()
            .map(|c| CellRow {
                generator: c.generator.clone(),
                fitter: c.fitter.clone(),
                replicates: c.replicates,
                k_mean: c.k.mean,
                k_sd: c.k.sd,
                matched_mean: c.matched.mean,
                matched_sd: c.matched.sd,
                pairwise_mean: c.pairwise.mean,
                pairwise_sd: c.pairwise.sd,
                predictive_bias_mean: c.predictive_bias.mean,
                predictive_bias_sd: c.predictive_bias.sd,
                tau_mean: c.tau.mean,
                tau_sd: c.tau.sd,
            })
            .collect()
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CellRow {
    pub generator: String,
    pub fitter: String,
    pub replicates: usize,
    pub k_mean: f64,
    pub k_sd: f64,
    pub matched_mean: f64,
    pub matched_sd: f64,
    pub pairwise_mean: f64,
    pub pairwise_sd: f64,
    pub predictive_bias_mean: f64,
    pub predictive_bias_sd: f64,
    pub tau_mean: f64,
    pub tau_sd: f64,
}

fn fit_one(cfg: &BenchmarkConfig, g: usize, r: usize, f: usize) -> Result<ReplicateResult> {
    let series = cfg.generators[g].generate(cfg.n + 1, &mut cfg.data_seeder(g, r).rng())?;
    let y = &series.y[..cfg.n];
    let truth = Partition::from_assignment(&series.truth.assignment()[..cfg.n]);
    let model = cfg.hyper.model(cfg.fitters[f].clone())?;
    let trace = run_chain(y, &model, &cfg.chain, cfg.chain_seeder(g, r, f))?;
    let summary = summarize(&trace, Some(&truth))?;
    let pred = predictive_bias(&trace, &model, series.y[cfg.n], &mut cfg.predict_seeder(g, r, f).rng())?;
    let acc = summary.accuracy.expect("truth supplied");
    Ok(ReplicateResult {
        replicate: r,
        true_k: truth.num_blocks(),
        k_estimate: summary.num_blocks,
        matched: acc.matched,
        pairwise: acc.pairwise,
        predictive_bias: pred.bias,
        tau: summary.mean_tau,
    })
}

/// Run every (generator, replicate, fitter) fit on the current rayon pool.
pub fn run_benchmark(cfg: &BenchmarkConfig) -> Result<BenchmarkReport> {
    cfg.validate()?;
    let (ng, nr, nf) = (cfg.generators.len(), cfg.replicates, cfg.fitters.len());
    let results: Vec<ReplicateResult> = (0..ng * nr * nf)
        .into_par_iter()
        .map(|idx| {
            let g = idx / (nr * nf);
            let r = (idx / nf) % nr;
            let f = idx % nf;
            fit_one(cfg, g, r, f)
        })
        .collect::<Result<_>>()?;
    let mut cells = Vec::with_capacity(ng * nf);
    for g in 0..ng {
        for f in 0..nf {
            let runs: Vec<ReplicateResult> = (0..nr).map(|r| results[(g * nr + r) * nf + f]).collect();
            cells.push(BenchmarkCell {
                generator: cfg.generators[g].name().to_string(),
                fitter: fitter_name(&cfg.fitters[f]),
                replicates: nr,
                k: Stat::of(runs.iter().map(|x| x.k_estimate as f64)),
                matched: Stat::of(runs.iter().map(|x| x.matched)),
                pairwise: Stat::of(runs.iter().map(|x| x.pairwise)),
                predictive_bias: Stat::of(runs.iter().map(|x| x.predictive_bias)),
                tau: Stat::of(runs.iter().map(|x| x.tau)),
                runs,
            });
        }
    }
    Ok(BenchmarkReport { config: cfg.clone(), cells })
}
