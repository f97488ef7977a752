//! Synthetic labelled series for benchmarking: Gaussian mixtures, a
//! lag-truncated Polya urn, a two-regime hidden Markov chain, and the
//! Beta-GOS / DP sequences themselves.

use rand::distr::weighted::WeightedIndex;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::rng::Seeder;
use crate::schedule::BetaSchedule;
use crate::sequence::{simulate_sequence, NormalBase, Partition};

const PROB_TOL: f64 = 1e-12;

/// Observations with their generating partition.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabeledSeries {
    pub y: Vec<f64>,
    pub truth: Partition,
    /// Hidden state path for the HMM generator.
    pub states: Option<Vec<usize>>,
}

impl LabeledSeries {
    pub fn len(&self) -> usize {
        self.y.len()
    }

    pub fn is_empty(&self) -> bool {
        self.y.is_empty()
    }
}

fn check_probs(p: &[f64], what: &str) -> Result<()> {
    if p.is_empty() || p.iter().any(|&v| !(v >= 0.0 && v.is_finite())) {
        return domain(format!("{what} must be non-empty and non-negative"));
    }
    let total: f64 = p.iter().sum();
    if (total - 1.0).abs() > PROB_TOL {
        return domain(format!("{what} sums to {total}, not 1"));
    }
    Ok(())
}

fn check_tau(tau: f64) -> Result<()> {
    if !(tau >= 0.0 && tau.is_finite()) {
        return domain(format!("tau must be finite and >= 0, got {tau}"));
    }
    Ok(())
}

fn noise<R: Rng + ?Sized>(tau: f64, rng: &mut R) -> f64 {
    tau * rng.sample::<f64, _>(StandardNormal)
}

/// I.i.d. draws from a Normal mixture whose component means come from
/// `N(mu0, sigma0^2)`, drawn afresh on every call.
pub fn gen_mixture<R: Rng + ?Sized>(
    weights: &[f64],
    mu0: f64,
    sigma0: f64,
    tau: f64,
    n: usize,
    rng: &mut R,
) -> Result<LabeledSeries> {
    check_probs(weights, "mixture weights")?;
    check_tau(tau)?;
    if n == 0 {
        return domain("n must be at least 1");
    }
    let base = NormalBase::new(mu0, sigma0)?;
    let means: Vec<f64> = weights.iter().map(|_| base.sample(rng)).collect();
    let pick = WeightedIndex::new(weights).map_err(|e| Error::Domain(e.to_string()))?;
    let comp: Vec<usize> = (0..n).map(|_| pick.sample(rng)).collect();
    let y = comp.iter().map(|&c| means[c] + noise(tau, rng)).collect();
    Ok(LabeledSeries { y, truth: Partition::from_assignment(&comp), states: Some(comp) })
}

/// Lag-truncated Polya urn: observation `n` opens a new block with
/// probability `p_new`, or copies the observation `l` steps back with
/// probability `lag_probs[l-1]`. A block whose last member is more than
/// `lag_probs.len()` steps back can never be revisited.
///
/// While fewer than `lag_probs.len()` observations exist, the unavailable
/// lags are dropped and the remaining mass renormalised.
pub fn gen_truncated_urn<R: Rng + ?Sized>(
    p_new: f64,
    lag_probs: &[f64],
    base: &NormalBase,
    tau: f64,
    n: usize,
    rng: &mut R,
) -> Result<LabeledSeries> {
    let mut all = vec![p_new];
    all.extend_from_slice(lag_probs);
    check_probs(&all, "new-block and lag probabilities")?;
    check_tau(tau)?;
    if n == 0 {
        return domain("n must be at least 1");
    }
    let mut block = Vec::with_capacity(n);
    let mut tags: Vec<f64> = Vec::new();
    for i in 0..n {
        let avail = i.min(lag_probs.len());
        let choice = if all[..=avail].iter().all(|&p| p == 0.0) {
            0
        } else {
            WeightedIndex::new(&all[..=avail]).map_err(|e| Error::Domain(e.to_string()))?.sample(rng)
        };
        if choice == 0 {
            block.push(tags.len());
            tags.push(base.sample(rng));
        } else {
            block.push(block[i - choice]);
        }
    }
    let y = block.iter().map(|&b| tags[b] + noise(tau, rng)).collect();
    Ok(LabeledSeries { y, truth: Partition::from_assignment(&block), states: None })
}

/// Transition matrix with 0.91 on the diagonal and 0.03 elsewhere.
pub fn sticky_matrix() -> Vec<Vec<f64>> {
    (0..4).map(|i| (0..4).map(|j| if i == j { 0.91 } else { 0.03 }).collect()).collect()
}

/// Frequent-switching matrix pairing states {0,1} and {2,3}. It is
/// symmetric, so reading the listed vectors as rows or as columns gives
/// the same chain.
pub fn switching_matrix() -> Vec<Vec<f64>> {
    let hi = [0.4, 0.4, 0.1, 0.1];
    let lo = [0.1, 0.1, 0.4, 0.4];
    vec![hi.to_vec(), hi.to_vec(), lo.to_vec(), lo.to_vec()]
}

/// Default emission means for the four HMM states.
pub const HMM_STATE_MEANS: [f64; 4] = [-6.0, -2.0, 2.0, 6.0];

fn check_stochastic(t: &[Vec<f64>], k: usize, what: &str) -> Result<()> {
    if t.len() != k {
        return domain(format!("{what} has {} rows, expected {k}", t.len()));
    }
    for (i, row) in t.iter().enumerate() {
        if row.len() != k {
            return domain(format!("{what} row {i} has {} entries, expected {k}", row.len()));
        }
        check_probs(row, &format!("{what} row {i}"))?;
    }
    Ok(())
}

/// Hidden Markov chain that uses `t1` for transitions into positions
/// `1..switch_at` and `t2` afterwards (0-based). The initial state is uniform.
pub fn gen_hmm_two_regime<R: Rng + ?Sized>(
    t1: &[Vec<f64>],
    t2: &[Vec<f64>],
    switch_at: usize,
    state_means: &[f64],
    tau: f64,
    n: usize,
    rng: &mut R,
) -> Result<LabeledSeries> {
    let k = state_means.len();
    if k == 0 {
        return domain("at least one state is required");
    }
    check_stochastic(t1, k, "first transition matrix")?;
    check_stochastic(t2, k, "second transition matrix")?;
    check_tau(tau)?;
    if n == 0 {
        return domain("n must be at least 1");
    }
    let rows = |t: &[Vec<f64>]| -> Result<Vec<WeightedIndex<f64>>> {
        t.iter()
            .map(|r| WeightedIndex::new(r).map_err(|e| Error::Domain(e.to_string())))
            .collect()
    };
    let (r1, r2) = (rows(t1)?, rows(t2)?);
    let mut states = Vec::with_capacity(n);
    states.push(rng.random_range(0..k));
    for t in 1..n {
        let prev = states[t - 1];
        let next = if t < switch_at { r1[prev].sample(rng) } else { r2[prev].sample(rng) };
        states.push(next);
    }
    let y = states.iter().map(|&s| state_means[s] + noise(tau, rng)).collect();
    Ok(LabeledSeries { y, truth: Partition::from_assignment(&states), states: Some(states) })
}

/// Beta-GOS sequence with tags from `base`, observed with `N(0, tau^2)` noise.
pub fn gen_betagos<R: Rng + ?Sized>(
    schedule: &BetaSchedule,
    base: &NormalBase,
    tau: f64,
    n: usize,
    rng: &mut R,
) -> Result<LabeledSeries> {
    check_tau(tau)?;
    let seq = simulate_sequence(schedule, base, n, rng)?;
    let y = seq.tags.iter().map(|&m| m + noise(tau, rng)).collect();
    Ok(LabeledSeries { y, truth: seq.partition, states: None })
}

/// Design of one synthetic dataset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GeneratorKind {
    Mixture { weights: Vec<f64>, mu0: f64, sigma0: f64, tau: f64 },
    TruncatedUrn { p_new: f64, lag_probs: Vec<f64>, mu0: f64, sigma0: f64, tau: f64 },
    HmmTwoRegime {
        sticky: Vec<Vec<f64>>,
        switching: Vec<Vec<f64>>,
        switch_at: usize,
        state_means: Vec<f64>,
        tau: f64,
    },
    Betagos { schedule: BetaSchedule, mu0: f64, sigma0: f64, tau: f64 },
    Dp { theta: f64, mu0: f64, sigma0: f64, tau: f64 },
}

impl GeneratorKind {
    pub fn mixture_default() -> Self {
        Self::Mixture { weights: vec![0.2, 0.35, 0.15, 0.1, 0.2], mu0: 0.0, sigma0: 10.0, tau: 0.25 }
    }

    pub fn truncated_urn_default() -> Self {
        Self::TruncatedUrn { p_new: 0.2, lag_probs: vec![0.4, 0.2, 0.2], mu0: 0.0, sigma0: 10.0, tau: 0.25 }
    }

    pub fn hmm_default() -> Self {
        Self::HmmTwoRegime {
            sticky: sticky_matrix(),
            switching: switching_matrix(),
            switch_at: 50,
            state_means: HMM_STATE_MEANS.to_vec(),
            tau: 0.25,
        }
    }

    pub fn betagos_default() -> Self {
        Self::Betagos {
            schedule: BetaSchedule::theta_linear(1.0, 1.0).expect("valid"),
            mu0: 0.0,
            sigma0: 10.0,
            tau: 0.25,
        }
    }

    pub fn dp_default() -> Self {
        Self::Dp { theta: 1.0, mu0: 0.0, sigma0: 10.0, tau: 0.25 }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::Mixture { .. } => "mixture",
            Self::TruncatedUrn { .. } => "truncated_urn",
            Self::HmmTwoRegime { .. } => "hmm_two_regime",
            Self::Betagos { .. } => "betagos",
            Self::Dp { .. } => "dp",
        }
    }

    pub fn generate<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> Result<LabeledSeries> {
        match self {
            Self::Mixture { weights, mu0, sigma0, tau } => gen_mixture(weights, *mu0, *sigma0, *tau, n, rng),
            Self::TruncatedUrn { p_new, lag_probs, mu0, sigma0, tau } => {
                gen_truncated_urn(*p_new, lag_probs, &NormalBase::new(*mu0, *sigma0)?, *tau, n, rng)
            }
            Self::HmmTwoRegime { sticky, switching, switch_at, state_means, tau } => {
                gen_hmm_two_regime(sticky, switching, *switch_at, state_means, *tau, n, rng)
            }
            Self::Betagos { schedule, mu0, sigma0, tau } => {
                gen_betagos(schedule, &NormalBase::new(*mu0, *sigma0)?, *tau, n, rng)
            }
            Self::Dp { theta, mu0, sigma0, tau } => {
                gen_betagos(&BetaSchedule::dp(*theta)?, &NormalBase::new(*mu0, *sigma0)?, *tau, n, rng)
            }
        }
    }
}

/// A generator design plus length and seed; replicate `r` uses child stream `r`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeneratorSpec {
    #[serde(flatten)]
    pub kind: GeneratorKind,
    pub n: usize,
    pub seed: u64,
}

impl GeneratorSpec {
    pub fn new(kind: GeneratorKind, n: usize, seed: u64) -> Result<Self> {
        if n == 0 {
            return domain("n must be at least 1");
        }
        Ok(Self { kind, n, seed })
    }

    pub fn seeder(&self, replicate: u64) -> Seeder {
        Seeder::new(self.seed).child(replicate)
    }

    pub fn replicate(&self, replicate: u64) -> Result<LabeledSeries> {
        self.kind.generate(self.n, &mut self.seeder(replicate).rng())
    }
}
