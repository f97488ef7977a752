//! Latent weights, predictive weights, pairing labels and partitions, plus
//! forward simulation of Beta-GOS sequences through the predictive rule.
//!
//! Observation `i` (0-based) either opens a new block or copies the tag of an
//! earlier observation `j < i`. Given weights `W_0..W_{n-1}` the next
//! observation copies `j` with probability `(1 - W_j) * prod_{t > j} W_t` and
//! opens a new block with probability `prod_t W_t`.

use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::rng::Seeder;
use crate::schedule::BetaSchedule;

/// Tolerance on `sum(p) + r - 1` beyond which weights are renormalized.
pub const SIMPLEX_TOL: f64 = 1e-12;

/// Latent reinforcements `W_1..W_n`, each strictly inside `(0, 1)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct LatentWeights(Vec<f64>);

impl LatentWeights {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if let Some((i, w)) = values.iter().enumerate().find(|(_, w)| !(**w > 0.0 && **w < 1.0)) {
            return domain(format!("weight {} = {w} is outside (0, 1)", i + 1));
        }
        Ok(Self(values))
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }
}

/// Predictive weights after `n` observations: `p[j]` for copying observation
/// `j`, and `r` for opening a new block.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PredictiveWeights {
    pub p: Vec<f64>,
    pub r: f64,
}

impl PredictiveWeights {
    pub fn total(&self) -> f64 {
        self.p.iter().sum::<f64>() + self.r
    }
}

/// Draw `n` independent weights from the schedule.
pub fn sample_weights<R: Rng + ?Sized>(
    schedule: &BetaSchedule,
    n: usize,
    rng: &mut R,
) -> Result<LatentWeights> {
    schedule.validate()?;
    let values = (1..=n)
        .map(|i| schedule.sample_weight(i, rng))
        .collect::<Result<Vec<_>>>()?;
    LatentWeights::new(values)
}

/// Products are accumulated in log space so that long sequences do not
/// underflow before normalisation.
pub fn predictive_weights(w: &LatentWeights) -> PredictiveWeights {
    let w = w.values();
    let n = w.len();
    let mut p = vec![0.0; n];
    let mut tail = 0.0; // sum of ln W_t for t > j
    for j in (0..n).rev() {
        p[j] = ((-w[j]).ln_1p() + tail).exp();
        tail += w[j].ln();
    }
    let mut r = tail.exp();
    let total: f64 = p.iter().sum::<f64>() + r;
    if (total - 1.0).abs() > SIMPLEX_TOL {
        p.iter_mut().for_each(|x| *x /= total);
        r /= total;
    }
    PredictiveWeights { p, r }
}

/// Sample the pairing of the next observation. Returns `j < n` to copy
/// observation `j`, or `n` (= `pw.p.len()`) to open a new block.
pub fn sample_pairing<R: Rng + ?Sized>(pw: &PredictiveWeights, rng: &mut R) -> usize {
    let n = pw.p.len();
    let u: f64 = rng.random::<f64>() * pw.total();
    if u < pw.r {
        return n;
    }
    let mut acc = pw.r;
    for (j, &pj) in pw.p.iter().enumerate().rev() {
        acc += pj;
        if u < acc {
            return j;
        }
    }
    // Rounding left a sliver of mass past the last bucket.
    pw.p.iter().rposition(|&x| x > 0.0).unwrap_or(n)
}

/// Pairing labels `C_0..C_{n-1}` (0-based): `C_i = i` opens a new block,
/// otherwise `C_i < i` is the observation whose tag `i` copies.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct PairingLabels(Vec<usize>);

impl PairingLabels {
    pub fn new(labels: Vec<usize>) -> Result<Self> {
        if let Some((i, c)) = labels.iter().enumerate().find(|(i, c)| **c > *i) {
            return Err(Error::InvalidInput(format!(
                "pairing label C_{i} = {c} must not exceed its own index"
            )));
        }
        Ok(Self(labels))
    }

    /// Build from the 1-based convention `C_1 = 1`, `1 <= C_i <= i`.
    pub fn from_one_based(labels: &[usize]) -> Result<Self> {
        if labels.contains(&0) {
            return Err(Error::InvalidInput("1-based labels cannot contain 0".into()));
        }
        Self::new(labels.iter().map(|c| c - 1).collect())
    }

    pub fn to_one_based(&self) -> Vec<usize> {
        self.0.iter().map(|c| c + 1).collect()
    }

    /// All observations open their own block.
    pub fn singletons(n: usize) -> Self {
        Self((0..n).collect())
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn get(&self, i: usize) -> usize {
        self.0[i]
    }

    pub(crate) fn set(&mut self, i: usize, c: usize) {
        debug_assert!(c <= i);
        self.0[i] = c;
    }

    /// Number of self-paired observations, which equals the block count.
    pub fn num_openings(&self) -> usize {
        self.0.iter().enumerate().filter(|(i, c)| *i == **c).count()
    }
}

/// A set partition of `{0..n}` stored as a canonical block assignment:
/// blocks are numbered in order of their smallest member, so two equal
/// partitions always compare equal.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Partition {
    assignment: Vec<usize>,
    n_blocks: usize,
}

impl Partition {
    /// Canonicalise an arbitrary block labelling.
    pub fn from_assignment<T: Copy + Eq + std::hash::Hash>(labels: &[T]) -> Self {
        let mut map = std::collections::HashMap::new();
        let assignment = labels
            .iter()
            .map(|l| {
                let next = map.len();
                *map.entry(*l).or_insert(next)
            })
            .collect();
        Self { assignment, n_blocks: map.len() }
    }

    pub fn single_block(n: usize) -> Self {
        Self { assignment: vec![0; n], n_blocks: usize::from(n > 0) }
    }

    pub fn singletons(n: usize) -> Self {
        Self { assignment: (0..n).collect(), n_blocks: n }
    }

    pub fn len(&self) -> usize {
        self.assignment.len()
    }

    pub fn is_empty(&self) -> bool {
        self.assignment.is_empty()
    }

    pub fn num_blocks(&self) -> usize {
        self.n_blocks
    }

    pub fn assignment(&self) -> &[usize] {
        &self.assignment
    }

    pub fn block_of(&self, i: usize) -> usize {
        self.assignment[i]
    }

    pub fn blocks(&self) -> Vec<Vec<usize>> {
        let mut blocks = vec![Vec::new(); self.n_blocks];
        for (i, &b) in self.assignment.iter().enumerate() {
            blocks[b].push(i);
        }
        blocks
    }

    pub fn block_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.n_blocks];
        for &b in &self.assignment {
            sizes[b] += 1;
        }
        sizes
    }
}

/// Blocks are the connected components of the pairing graph. Since every
/// label points backwards, one forward pass resolves each chain.
pub fn partition_of(labels: &PairingLabels) -> Partition {
    let mut assignment = Vec::with_capacity(labels.len());
    let mut n_blocks = 0;
    for (i, &c) in labels.as_slice().iter().enumerate() {
        if c == i {
            assignment.push(n_blocks);
            n_blocks += 1;
        } else {
            let b = assignment[c];
            assignment.push(b);
        }
    }
    Partition { assignment, n_blocks }
}

/// Normal base measure `N(mean, sd^2)` for block tags.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormalBase {
    pub mean: f64,
    pub sd: f64,
}

impl NormalBase {
    pub fn new(mean: f64, sd: f64) -> Result<Self> {
        if !(sd.is_finite() && sd > 0.0) || !mean.is_finite() {
            return domain(format!("base measure needs finite mean and sd > 0, got N({mean}, {sd}^2)"));
        }
        Ok(Self { mean, sd })
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        Normal::new(self.mean, self.sd).expect("validated").sample(rng)
    }
}

/// One forward draw of a Beta-GOS sequence.
#[derive(Debug, Clone, PartialEq)]
pub struct SequenceSample {
    pub tags: Vec<f64>,
    pub labels: PairingLabels,
    pub weights: LatentWeights,
    pub partition: Partition,
}

/// Serialisable view of a [`SequenceSample`]; labels are written 1-based.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SequenceExport {
    pub tags: Vec<f64>,
    pub labels: Vec<usize>,
    pub weights: Vec<f64>,
    pub seed: u64,
    pub stream: u64,
}

impl SequenceSample {
    pub fn export(&self, seeder: &Seeder) -> SequenceExport {
        SequenceExport {
            tags: self.tags.clone(),
            labels: self.labels.to_one_based(),
            weights: self.weights.values().to_vec(),
            seed: seeder.master,
            stream: seeder.stream,
        }
    }

    /// `index,tag,label` rows (1-based index and label).
    pub fn csv_rows(&self) -> Vec<(usize, f64, usize)> {
        self.tags
            .iter()
            .zip(self.labels.as_slice())
            .enumerate()
            .map(|(i, (t, c))| (i + 1, *t, c + 1))
            .collect()
    }
}

/// Simulate `n` observations. Pairings are sampled by inverting the
/// cumulative weights with a binary search over prefix sums of `ln W`,
/// giving `O(n log n)` per sequence.
pub fn simulate_sequence<R: Rng + ?Sized>(
    schedule: &BetaSchedule,
    base: &NormalBase,
    n: usize,
    rng: &mut R,
) -> Result<SequenceSample> {
    schedule.validate()?;
    if n == 0 {
        return domain("sequence length must be at least 1");
    }
    let mut tags = Vec::with_capacity(n);
    let mut labels = Vec::with_capacity(n);
    let mut weights = Vec::with_capacity(n);
    // prefix[k] = sum_{t < k} ln W_t
    let mut prefix = Vec::with_capacity(n + 1);
    prefix.push(0.0_f64);
    for i in 0..n {
        if i == 0 {
            labels.push(0);
            tags.push(base.sample(rng));
        } else {
            let log_r = prefix[i];
            let v: f64 = 1.0 - rng.random::<f64>();
            let log_v = v.ln();
            if log_v < log_r {
                labels.push(i);
                tags.push(base.sample(rng));
            } else {
                // Walking back from i-1, the chain stops at the first j whose
                // cumulative product prod_{t >= j} W_t drops to or below v.
                let cut = log_r - log_v;
                let j = prefix[..i].partition_point(|&l| l >= cut) - 1;
                labels.push(j);
                tags.push(tags[j]);
            }
        }
        let w = schedule.sample_weight(i + 1, rng)?;
        weights.push(w);
        prefix.push(prefix[i] + w.ln());
    }
    let labels = PairingLabels::new(labels)?;
    let partition = partition_of(&labels);
    Ok(SequenceSample { tags, labels, weights: LatentWeights::new(weights)?, partition })
}

/// Record the block count `K_n` at each checkpoint `n` (ascending, >= 1).
///
/// Only the new-block events matter for `K_n`, and given the weights those
/// are independent Bernoulli(`r_j`) draws, so this runs in `O(n)`.
pub fn block_count_trajectory<R: Rng + ?Sized>(
    schedule: &BetaSchedule,
    checkpoints: &[usize],
    rng: &mut R,
) -> Result<Vec<usize>> {
    schedule.validate()?;
    if checkpoints.first().is_some_and(|&c| c == 0) || !checkpoints.windows(2).all(|w| w[0] <= w[1]) {
        return domain("checkpoints must be ascending and >= 1");
    }
    let mut out = Vec::with_capacity(checkpoints.len());
    let mut k = 1usize;
    let mut r = 1.0_f64;
    let mut n = 1usize;
    for &target in checkpoints {
        // Once r underflows no further block can open.
        while n < target && r > 0.0 {
            r *= schedule.sample_weight(n, rng)?;
            if rng.random::<f64>() < r {
                k += 1;
            }
            n += 1;
        }
        out.push(k);
    }
    Ok(out)
}

/// `K_n` for one simulated sequence of length `n`.
pub fn simulate_block_count<R: Rng + ?Sized>(
    schedule: &BetaSchedule,
    n: usize,
    rng: &mut R,
) -> Result<usize> {
    Ok(block_count_trajectory(schedule, &[n], rng)?[0])
}
