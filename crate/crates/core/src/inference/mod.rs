//! Collapsed Gibbs sampling for the hierarchical Normal model with a
//! Beta-GOS prior on the observation means.
//!
//! ```text
//! y_i | mu_i ~ N(mu_i, tau2)       mu_1..mu_m ~ Beta-GOS(schedule, N(mu0, sigma0^2))
//! tau2 ~ InvGamma(a0, b0)
//! ```
//!
//! The state is the pairing labels, the latent weights, `tau2` and the block
//! means. Labels are updated with the block means integrated out.

mod estimate;
mod marginal;

pub use estimate::{
    accuracy, coclustering, point_partition, predict_next, predictive_bias, summarize, Accuracy,
    FitSummary, PredictiveStats,
};
pub use marginal::{log_marginal_block, BlockStats};

use rand::Rng;
use rand_distr::{Distribution, Gamma, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::rng::Seeder;
use crate::schedule::{sample_beta, BetaSchedule};
use crate::sequence::{partition_of, LatentWeights, NormalBase, PairingLabels, Partition};

/// Hyperparameters of the hierarchical model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelConfig {
    pub mu0: f64,
    /// Standard deviation of the base measure.
    pub sigma0: f64,
    /// Inverse-gamma shape for `tau2`.
    pub a0: f64,
    /// Inverse-gamma scale for `tau2`.
    pub b0: f64,
    pub schedule: BetaSchedule,
}

impl ModelConfig {
    pub fn new(mu0: f64, sigma0: f64, a0: f64, b0: f64, schedule: BetaSchedule) -> Result<Self> {
        let cfg = Self { mu0, sigma0, a0, b0, schedule };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !self.mu0.is_finite() {
            return domain("mu0 must be finite");
        }
        for (name, v) in [("sigma0", self.sigma0), ("a0", self.a0), ("b0", self.b0)] {
            if !(v > 0.0 && v.is_finite()) {
                return domain(format!("{name} must be positive, got {v}"));
            }
        }
        self.schedule.validate()
    }

    pub fn base(&self) -> NormalBase {
        NormalBase { mean: self.mu0, sd: self.sigma0 }
    }
}

/// How `tau2` is refreshed at the end of each sweep.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum Tau2Mode {
    /// Per-block inverse-gamma draws pooled into
    /// `sum_j (n_j - 1) tau2_j / (N - J)`.
    #[default]
    PooledEm,
    /// Exact conjugate draw from `InvGamma(a0 + N/2, b0 + SS/2)`.
    GlobalConjugate,
    /// Hold `tau2` at a known value.
    Fixed { tau2: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScanOrder {
    #[default]
    Systematic,
    Random,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitMode {
    /// Labels drawn from the prior predictive given weights from the schedule.
    #[default]
    PriorPredictive,
    /// Every observation starts in its own block.
    Singletons,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct SamplerOptions {
    pub tau2_mode: Tau2Mode,
    pub scan: ScanOrder,
    pub init: InitMode,
}

/// Current state of one chain.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GibbsState {
    pub labels: PairingLabels,
    /// `None` for the deterministic DP schedule.
    pub weights: Option<LatentWeights>,
    pub tau2: f64,
    /// Block means indexed by canonical block id of `partition`.
    pub means: Vec<f64>,
    pub partition: Partition,
}

impl GibbsState {
    pub fn new(labels: PairingLabels, weights: Option<LatentWeights>, tau2: f64) -> Result<Self> {
        if !(tau2 > 0.0 && tau2.is_finite()) {
            return domain("tau2 must be positive");
        }
        if let Some(w) = &weights {
            if w.len() != labels.len() {
                return Err(Error::Alignment("weights and labels differ in length".into()));
            }
        }
        let partition = partition_of(&labels);
        Ok(Self { labels, weights, tau2, means: Vec::new(), partition })
    }

    pub fn num_blocks(&self) -> usize {
        self.partition.num_blocks()
    }
}

/// `(ln W_t, ln(1 - W_t))` for every position, from the state or the
/// deterministic schedule.
fn log_weights(schedule: &BetaSchedule, weights: Option<&LatentWeights>, m: usize) -> Result<Vec<(f64, f64)>> {
    match weights {
        Some(w) => Ok(w.values().iter().map(|&v| (v.ln(), (-v).ln_1p())).collect()),
        None => (1..=m)
            .map(|i| {
                let v = schedule.weight_moment(i, 1)?;
                Ok((v.ln(), (-v).ln_1p()))
            })
            .collect(),
    }
}

fn log_sum_exp(v: &[f64]) -> f64 {
    let max = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return max;
    }
    max + v.iter().map(|x| (x - max).exp()).sum::<f64>().ln()
}

fn check_data(data: &[f64]) -> Result<()> {
    if data.is_empty() {
        return Err(Error::InvalidInput("no observations".into()));
    }
    if let Some(i) = data.iter().position(|y| !y.is_finite()) {
        return Err(Error::InvalidInput(format!("observation {} is not finite", i + 1)));
    }
    Ok(())
}

/// Scratch buffers reused across label updates.
#[derive(Default)]
struct Workspace {
    in_subtree: Vec<bool>,
    stats: Vec<BlockStats>,
    delta: Vec<Option<f64>>,
    logw: Vec<f64>,
    prefix: Vec<f64>,
    log_weights: Vec<(f64, f64)>,
}

impl Workspace {
    fn load_weights(&mut self, schedule: &BetaSchedule, weights: Option<&LatentWeights>, m: usize) -> Result<()> {
        self.log_weights = log_weights(schedule, weights, m)?;
        self.prefix.clear();
        self.prefix.push(0.0);
        for t in 0..m {
            let next = self.prefix[t] + self.log_weights[t].0;
            self.prefix.push(next);
        }
        Ok(())
    }

    /// Unnormalised log-probabilities of `C_i = j` for `j = 0..=i` in `self.logw`.
    ///
    /// Cutting the link `i -> C_i` detaches the subtree `T` of observations
    /// whose pairing chain runs through `i`. Pairing `i` to `j < i` merges `T`
    /// into the block holding `j`; `j = i` leaves `T` as its own block. Only
    /// that one merge changes the likelihood, so each block contributes
    /// `lm(T u B) - lm(B) - lm(T)`.
    fn label_log_weights(
        &mut self,
        i: usize,
        labels: &PairingLabels,
        partition: &Partition,
        data: &[f64],
        cfg: &ModelConfig,
        tau2: f64,
    ) {
        let m = data.len();
        let sigma0_sq = cfg.sigma0 * cfg.sigma0;
        self.in_subtree.clear();
        self.in_subtree.resize(m, false);
        self.in_subtree[i] = true;
        for k in i + 1..m {
            let c = labels.get(k);
            if c != k && self.in_subtree[c] {
                self.in_subtree[k] = true;
            }
        }
        self.stats.clear();
        self.stats.resize(partition.num_blocks(), BlockStats::default());
        let mut subtree = BlockStats::default();
        for (k, &y) in data.iter().enumerate() {
            if self.in_subtree[k] {
                subtree.push(y);
            } else {
                self.stats[partition.block_of(k)].push(y);
            }
        }
        let lm_subtree = subtree.log_marginal(cfg.mu0, sigma0_sq, tau2);
        self.delta.clear();
        self.delta.resize(partition.num_blocks(), None);

        self.logw.clear();
        let top = self.prefix[i];
        for j in 0..i {
            let b = partition.block_of(j);
            let d = match self.delta[b] {
                Some(d) => d,
                None => {
                    let s = self.stats[b];
                    let d = s.merged(&subtree).log_marginal(cfg.mu0, sigma0_sq, tau2)
                        - s.log_marginal(cfg.mu0, sigma0_sq, tau2)
                        - lm_subtree;
                    self.delta[b] = Some(d);
                    d
                }
            };
            self.logw.push(self.log_weights[j].1 + (top - self.prefix[j + 1]) + d);
        }
        self.logw.push(top);
    }
}

/// Full conditional of the pairing label of observation `i` (0-based):
/// probabilities of `C_i = j` for `j = 0..=i`.
pub fn label_full_conditional(
    i: usize,
    state: &GibbsState,
    data: &[f64],
    cfg: &ModelConfig,
) -> Result<Vec<f64>> {
    if i >= data.len() || data.len() != state.labels.len() {
        return Err(Error::Alignment(format!(
            "index {i} with {} observations and {} labels",
            data.len(),
            state.labels.len()
        )));
    }
    let mut ws = Workspace::default();
    ws.load_weights(&cfg.schedule, state.weights.as_ref(), data.len())?;
    ws.label_log_weights(i, &state.labels, &state.partition, data, cfg, state.tau2);
    let norm = log_sum_exp(&ws.logw);
    Ok(ws.logw.iter().map(|l| (l - norm).exp()).collect())
}

fn sample_log_categorical<R: Rng + ?Sized>(logw: &[f64], rng: &mut R) -> usize {
    let max = logw.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let total: f64 = logw.iter().map(|l| (l - max).exp()).sum();
    let mut u = rng.random::<f64>() * total;
    for (j, l) in logw.iter().enumerate() {
        u -= (l - max).exp();
        if u < 0.0 {
            return j;
        }
    }
    logw.iter().rposition(|l| l.is_finite()).unwrap_or(logw.len() - 1)
}

/// Beta full conditional of `W_i` (0-based observation index):
/// `A_i = alpha_i + #{j > i : C_j < i or C_j = j}`,
/// `B_i = beta_i + #{j > i : C_j = i}`.
pub fn weight_full_conditional(i: usize, labels: &PairingLabels, schedule: &BetaSchedule) -> Result<(f64, f64)> {
    if i >= labels.len() {
        return Err(Error::OutOfRange { index: i, len: labels.len() });
    }
    let (alpha, beta) = schedule.params(i + 1)?;
    let c = labels.as_slice();
    let a = (i + 1..c.len()).filter(|&j| c[j] < i || c[j] == j).count();
    let b = (i + 1..c.len()).filter(|&j| c[j] == i).count();
    Ok((alpha + a as f64, beta + b as f64))
}

/// Posterior Beta parameters for every weight in `O(m)`.
pub fn weight_posterior_params(labels: &PairingLabels, schedule: &BetaSchedule) -> Result<Vec<(f64, f64)>> {
    let c = labels.as_slice();
    let m = c.len();
    // jumps[i]: number of j > i with C_j < i, via a difference array over
    // the open interval (C_j, j).
    let mut diff = vec![0i64; m + 1];
    let mut pointed = vec![0usize; m];
    let mut openings_after = vec![0usize; m];
    for (j, &cj) in c.iter().enumerate() {
        if cj == j {
            if j > 0 {
                openings_after[j - 1] += 1;
            }
        } else {
            pointed[cj] += 1;
            diff[cj + 1] += 1;
            diff[j] -= 1;
        }
    }
    for i in (0..m.saturating_sub(1)).rev() {
        openings_after[i] += openings_after[i + 1];
    }
    let mut running = 0i64;
    (0..m)
        .map(|i| {
            running += diff[i];
            let (alpha, beta) = schedule.params(i + 1)?;
            Ok((alpha + (running as usize + openings_after[i]) as f64, beta + pointed[i] as f64))
        })
        .collect()
}

/// Normal posterior `(mean, variance)` of one block mean.
pub fn block_mean_posterior(stats: &BlockStats, cfg: &ModelConfig, tau2: f64) -> (f64, f64) {
    let prior_prec = 1.0 / (cfg.sigma0 * cfg.sigma0);
    let prec = prior_prec + stats.count as f64 / tau2;
    ((cfg.mu0 * prior_prec + stats.sum / tau2) / prec, 1.0 / prec)
}

/// Draw block means given the partition and `tau2`.
pub fn means_update<R: Rng + ?Sized>(
    partition: &Partition,
    data: &[f64],
    cfg: &ModelConfig,
    tau2: f64,
    rng: &mut R,
) -> Vec<f64> {
    let mut stats = vec![BlockStats::default(); partition.num_blocks()];
    for (k, &y) in data.iter().enumerate() {
        stats[partition.block_of(k)].push(y);
    }
    stats
        .iter()
        .map(|s| {
            let (mean, var) = block_mean_posterior(s, cfg, tau2);
            Normal::new(mean, var.sqrt()).expect("finite posterior").sample(rng)
        })
        .collect()
}

fn sample_inv_gamma<R: Rng + ?Sized>(shape: f64, scale: f64, rng: &mut R) -> f64 {
    let g = Gamma::new(shape, 1.0 / scale).expect("positive inverse-gamma parameters").sample(rng);
    (1.0 / g).clamp(f64::MIN_POSITIVE, f64::MAX)
}

/// Refresh `tau2` given block means.
pub fn tau2_update<R: Rng + ?Sized>(
    partition: &Partition,
    means: &[f64],
    data: &[f64],
    cfg: &ModelConfig,
    mode: Tau2Mode,
    rng: &mut R,
) -> f64 {
    let n = data.len();
    let j = partition.num_blocks();
    let mut sizes = vec![0usize; j];
    let mut ss = vec![0.0; j];
    for (k, &y) in data.iter().enumerate() {
        let b = partition.block_of(k);
        sizes[b] += 1;
        ss[b] += (y - means[b]) * (y - means[b]);
    }
    match mode {
        Tau2Mode::Fixed { tau2 } => tau2,
        Tau2Mode::PooledEm if n > j => {
            let pooled: f64 = (0..j)
                .map(|b| {
                    let draw = sample_inv_gamma(cfg.a0 + sizes[b] as f64 / 2.0, cfg.b0 + ss[b] / 2.0, rng);
                    (sizes[b] - 1) as f64 * draw
                })
                .sum();
            pooled / (n - j) as f64
        }
        // All singletons leave no within-block spread to pool.
        Tau2Mode::PooledEm | Tau2Mode::GlobalConjugate => {
            sample_inv_gamma(cfg.a0 + n as f64 / 2.0, cfg.b0 + ss.iter().sum::<f64>() / 2.0, rng)
        }
    }
}

/// Draw a starting state.
pub fn initial_state<R: Rng + ?Sized>(
    data: &[f64],
    cfg: &ModelConfig,
    opts: &SamplerOptions,
    rng: &mut R,
) -> Result<GibbsState> {
    check_data(data)?;
    cfg.validate()?;
    let m = data.len();
    let weights = if cfg.schedule.is_deterministic() {
        None
    } else {
        Some(crate::sequence::sample_weights(&cfg.schedule, m, rng)?)
    };
    let labels = match opts.init {
        InitMode::Singletons => PairingLabels::singletons(m),
        InitMode::PriorPredictive => {
            let lw = log_weights(&cfg.schedule, weights.as_ref(), m)?;
            let mut labels = Vec::with_capacity(m);
            let mut logp = Vec::with_capacity(m);
            for i in 0..m {
                logp.clear();
                let mut tail = 0.0;
                for j in (0..i).rev() {
                    logp.push(lw[j].1 + tail);
                    tail += lw[j].0;
                }
                logp.reverse();
                logp.push(tail);
                labels.push(sample_log_categorical(&logp, rng));
            }
            PairingLabels::new(labels)?
        }
    };
    let tau2 = match opts.tau2_mode {
        Tau2Mode::Fixed { tau2 } => tau2,
        _ => sample_inv_gamma(cfg.a0, cfg.b0, rng),
    };
    let mut state = GibbsState::new(labels, weights, tau2)?;
    state.means = means_update(&state.partition, data, cfg, state.tau2, rng);
    Ok(state)
}

/// One full sweep: labels, then weights, then block means, then `tau2`.
pub fn gibbs_sweep<R: Rng + ?Sized>(
    state: &mut GibbsState,
    data: &[f64],
    cfg: &ModelConfig,
    opts: &SamplerOptions,
    rng: &mut R,
) -> Result<()> {
    let mut ws = Workspace::default();
    sweep_with(&mut ws, state, data, cfg, opts, rng)
}

fn sweep_with<R: Rng + ?Sized>(
    ws: &mut Workspace,
    state: &mut GibbsState,
    data: &[f64],
    cfg: &ModelConfig,
    opts: &SamplerOptions,
    rng: &mut R,
) -> Result<()> {
    let m = data.len();
    if state.labels.len() != m {
        return Err(Error::Alignment("state and data differ in length".into()));
    }
    ws.load_weights(&cfg.schedule, state.weights.as_ref(), m)?;
    for step in 0..m {
        let i = match opts.scan {
            ScanOrder::Systematic => step,
            ScanOrder::Random => rng.random_range(0..m),
        };
        if i == 0 {
            continue;
        }
        ws.label_log_weights(i, &state.labels, &state.partition, data, cfg, state.tau2);
        let c = sample_log_categorical(&ws.logw, rng);
        if c != state.labels.get(i) {
            state.labels.set(i, c);
            state.partition = partition_of(&state.labels);
        }
    }
    if state.weights.is_some() {
        let params = weight_posterior_params(&state.labels, &cfg.schedule)?;
        let draws = params.iter().map(|&(a, b)| sample_beta(a, b, rng)).collect();
        state.weights = Some(LatentWeights::new(draws)?);
    }
    state.means = means_update(&state.partition, data, cfg, state.tau2, rng);
    state.tau2 = tau2_update(&state.partition, &state.means, data, cfg, opts.tau2_mode, rng);
    Ok(())
}

/// Total log marginal likelihood `sum_blocks lm(block)`.
pub fn log_marginal_partition(partition: &Partition, data: &[f64], cfg: &ModelConfig, tau2: f64) -> f64 {
    let mut stats = vec![BlockStats::default(); partition.num_blocks()];
    for (k, &y) in data.iter().enumerate() {
        stats[partition.block_of(k)].push(y);
    }
    let s2 = cfg.sigma0 * cfg.sigma0;
    stats.iter().map(|s| s.log_marginal(cfg.mu0, s2, tau2)).sum()
}

/// Chain length settings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChainOptions {
    pub iters: usize,
    pub burnin: usize,
    pub thin: usize,
    pub sampler: SamplerOptions,
}

impl ChainOptions {
    pub fn new(iters: usize, burnin: usize, thin: usize) -> Self {
        Self { iters, burnin, thin, sampler: SamplerOptions::default() }
    }

    pub fn draws(&self) -> usize {
        if self.thin == 0 || self.iters <= self.burnin {
            0
        } else {
            (self.iters - self.burnin) / self.thin
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.thin == 0 {
            return Err(Error::InvalidInput("thin must be >= 1".into()));
        }
        if self.iters <= self.burnin {
            return Err(Error::InvalidInput(format!(
                "iters ({}) must exceed burnin ({})",
                self.iters, self.burnin
            )));
        }
        if self.draws() == 0 {
            return Err(Error::InvalidInput("no post-burn-in draws would be kept".into()));
        }
        Ok(())
    }
}

/// One retained draw.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceRecord {
    pub iteration: usize,
    pub partition: Partition,
    pub tau2: f64,
    pub means: Vec<f64>,
    pub weights: Option<Vec<f64>>,
    pub log_marginal: f64,
}

impl TraceRecord {
    pub fn num_blocks(&self) -> usize {
        self.partition.num_blocks()
    }
}

/// Retained draws of one or more chains, in chain order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trace {
    pub records: Vec<TraceRecord>,
    pub burnin: usize,
    pub thin: usize,
    /// Random stream of each contributing chain.
    pub streams: Vec<Seeder>,
}

impl Trace {
    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// Concatenate chains in the given order.
    pub fn merge(traces: Vec<Trace>) -> Result<Trace> {
        let mut it = traces.into_iter();
        let mut first = it.next().ok_or_else(|| Error::InvalidInput("no traces to merge".into()))?;
        for t in it {
            first.records.extend(t.records);
            first.streams.extend(t.streams);
        }
        Ok(first)
    }
}

/// Run one chain from a prior draw and keep every `thin`-th post-burn-in state.
pub fn run_chain(data: &[f64], cfg: &ModelConfig, opts: &ChainOptions, seeder: Seeder) -> Result<Trace> {
    opts.validate()?;
    let mut rng = seeder.rng();
    let mut state = initial_state(data, cfg, &opts.sampler, &mut rng)?;
    let mut ws = Workspace::default();
    let mut records = Vec::with_capacity(opts.draws());
    for t in 1..=opts.iters {
        sweep_with(&mut ws, &mut state, data, cfg, &opts.sampler, &mut rng)?;
        if t > opts.burnin && (t - opts.burnin) % opts.thin == 0 {
            records.push(TraceRecord {
                iteration: t,
                partition: state.partition.clone(),
                tau2: state.tau2,
                means: state.means.clone(),
                weights: state.weights.as_ref().map(|w| w.values().to_vec()),
                log_marginal: log_marginal_partition(&state.partition, data, cfg, state.tau2),
            });
        }
    }
    Ok(Trace { records, burnin: opts.burnin, thin: opts.thin, streams: vec![seeder] })
}

/// Forward draw of `(state, data)` from the joint model with `m` observations.
pub fn simulate_joint<R: Rng + ?Sized>(cfg: &ModelConfig, m: usize, rng: &mut R) -> Result<(GibbsState, Vec<f64>)> {
    cfg.validate()?;
    let seq = crate::sequence::simulate_sequence(&cfg.schedule, &cfg.base(), m, rng)?;
    let tau2 = sample_inv_gamma(cfg.a0, cfg.b0, rng);
    let weights = (!cfg.schedule.is_deterministic()).then_some(seq.weights);
    let mut state = GibbsState::new(seq.labels, weights, tau2)?;
    state.means = state.partition.blocks().iter().map(|b| seq.tags[b[0]]).collect();
    let data = resample_data(&state, rng);
    Ok((state, data))
}

/// Draw fresh observations `y_i ~ N(mean of block(i), tau2)`.
pub fn resample_data<R: Rng + ?Sized>(state: &GibbsState, rng: &mut R) -> Vec<f64> {
    let sd = state.tau2.sqrt();
    state
        .partition
        .assignment()
        .iter()
        .map(|&b| state.means[b] + sd * rng.sample::<f64, _>(rand_distr::StandardNormal))
        .collect()
}

#[cfg(test)]
mod tests;
