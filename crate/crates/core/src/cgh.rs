//! Copy-number aberration calling on array-CGH log2 ratios.
//!
//! Each chromosome of each sample is fitted on its own. At every retained
//! draw the block with the smallest absolute mean is the neutral reference;
//! blocks further than `epsilon` from it are gains or losses, and gains far
//! above the other gains are high-level amplifications. Clones are called
//! when a status holds in more than `call_freq` of the draws, runs of equal
//! calls form regions, and regions get q-values from their posterior null
//! probabilities.

use std::ops::Range;

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::inference::{run_chain, ChainOptions, ModelConfig, Trace, TraceRecord};
use crate::rng::Seeder;
use crate::schedule::BetaSchedule;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Loss,
    Neutral,
    Gain,
    HighAmp,
}

impl Status {
    pub fn is_aberrant(self) -> bool {
        self != Status::Neutral
    }

    /// Gains including high-level amplifications.
    pub fn is_gain(self) -> bool {
        matches!(self, Status::Gain | Status::HighAmp)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Status::Loss => "loss",
            Status::Neutral => "neutral",
            Status::Gain => "gain",
            Status::HighAmp => "high_amp",
        }
    }
}

impl std::fmt::Display for Status {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One probe on the array.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CloneRecord {
    pub clone_id: String,
    pub chromosome: String,
    pub kb_start: f64,
    pub kb_end: f64,
    pub log2_ratio: f64,
}

/// Clones of one sample, grouped by chromosome and sorted by position
/// within each chromosome.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CloneSeries {
    records: Vec<CloneRecord>,
    chromosomes: Vec<(String, Range<usize>)>,
}

impl CloneSeries {
    pub fn new(records: Vec<CloneRecord>) -> Result<Self> {
        if records.is_empty() {
            return Err(Error::InvalidInput("no clones".into()));
        }
        let mut chromosomes: Vec<(String, Range<usize>)> = Vec::new();
        for (i, r) in records.iter().enumerate() {
            if !r.log2_ratio.is_finite() || !r.kb_start.is_finite() || !r.kb_end.is_finite() {
                return Err(Error::InvalidInput(format!("clone {} has non-finite values", r.clone_id)));
            }
            match chromosomes.last_mut() {
                Some((name, range)) if *name == r.chromosome => {
                    if r.kb_start < records[i - 1].kb_start {
                        return Err(Error::InvalidInput(format!(
                            "clone {} is out of position order on chromosome {}",
                            r.clone_id, r.chromosome
                        )));
                    }
                    range.end = i + 1;
                }
                _ => {
                    if chromosomes.iter().any(|(name, _)| *name == r.chromosome) {
                        return Err(Error::InvalidInput(format!(
                            "chromosome {} appears in more than one run",
                            r.chromosome
                        )));
                    }
                    chromosomes.push((r.chromosome.clone(), i..i + 1));
                }
            }
        }
        Ok(Self { records, chromosomes })
    }

    pub fn records(&self) -> &[CloneRecord] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// Chromosome names with their index ranges, in input order.
    pub fn chromosomes(&self) -> &[(String, Range<usize>)] {
        &self.chromosomes
    }

    pub fn log_ratios(&self, range: Range<usize>) -> Vec<f64> {
        self.records[range].iter().map(|r| r.log2_ratio).collect()
    }

    pub fn negated(&self) -> Self {
        let mut out = self.clone();
        out.records.iter_mut().for_each(|r| r.log2_ratio = -r.log2_ratio);
        out
    }
}

/// How a region's posterior null probability is formed from the draws.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RegionNull {
    /// Fraction of draws in which every clone of the region is neutral.
    #[default]
    AllNeutral,
    /// Average over clones of the per-clone neutral fraction.
    CloneAverage,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CallConfig {
    pub epsilon: f64,
    pub call_freq: f64,
    pub amp_sd_mult: f64,
    pub fdr_level: f64,
    pub region_null: RegionNull,
}

impl Default for CallConfig {
    fn default() -> Self {
        Self { epsilon: 0.1, call_freq: 0.7, amp_sd_mult: 2.0, fdr_level: 0.05, region_null: RegionNull::AllNeutral }
    }
}

impl CallConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon > 0.0) {
            return domain(format!("epsilon must be positive, got {}", self.epsilon));
        }
        if !(self.call_freq > 0.0 && self.call_freq <= 1.0) {
            return domain(format!("call frequency must be in (0, 1], got {}", self.call_freq));
        }
        if self.amp_sd_mult.is_nan() {
            return domain("amplification multiplier is NaN");
        }
        if !(self.fdr_level > 0.0 && self.fdr_level < 1.0) {
            return domain(format!("FDR level must be in (0, 1), got {}", self.fdr_level));
        }
        Ok(())
    }

    /// Whether `epsilon` lies in the range where calls were found stable
    /// (0.05 to 0.15).
    pub fn epsilon_in_stable_band(&self) -> bool {
        (0.05..=0.15).contains(&self.epsilon)
    }
}

/// Hyperparameters used for CGH fits: `alpha_n = n`, `beta_n = 1`, base
/// `N(0, 10^2)` and an inverse gamma on `tau2` with mean `0.1^2`.
pub fn default_model() -> ModelConfig {
    ModelConfig::new(0.0, 10.0, 2.004, 0.01004, BetaSchedule::theta_linear(1.0, 1.0).expect("valid"))
        .expect("valid")
}

/// Status of each block given its mean.
pub fn classify_iteration(means: &[f64], epsilon: f64, amp_sd_mult: f64) -> Result<Vec<Status>> {
    if means.is_empty() {
        return domain("at least one block is required");
    }
    let neutral = means
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.abs().total_cmp(&b.1.abs()))
        .map(|(i, _)| i)
        .expect("non-empty");
    let reference = means[neutral];
    let mut out: Vec<Status> = means
        .iter()
        .enumerate()
        .map(|(j, &m)| {
            let d = m - reference;
            if j == neutral || d.abs() <= epsilon {
                Status::Neutral
            } else if d > 0.0 {
                Status::Gain
            } else {
                Status::Loss
            }
        })
        .collect();
    let gains: Vec<f64> = means.iter().zip(&out).filter(|(_, s)| **s == Status::Gain).map(|(m, _)| *m).collect();
    if gains.len() >= 2 {
        let k = gains.len() as f64;
        let mean = gains.iter().sum::<f64>() / k;
        let sd = (gains.iter().map(|g| (g - mean).powi(2)).sum::<f64>() / (k - 1.0)).sqrt();
        let cut = mean + amp_sd_mult * sd;
        for (s, &m) in out.iter_mut().zip(means) {
            if *s == Status::Gain && m > cut {
                *s = Status::HighAmp;
            }
        }
    }
    Ok(out)
}

/// Per-clone statuses of one draw.
pub fn clone_statuses(record: &TraceRecord, cfg: &CallConfig) -> Result<Vec<Status>> {
    if record.means.len() != record.partition.num_blocks() {
        return Err(Error::Alignment("draw lacks block means".into()));
    }
    let blocks = classify_iteration(&record.means, cfg.epsilon, cfg.amp_sd_mult)?;
    Ok(record.partition.assignment().iter().map(|&b| blocks[b]).collect())
}

/// Clone-level calls for one chromosome.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CloneCalls {
    pub status: Vec<Status>,
    /// Fraction of draws called gain or high_amp.
    pub gain_freq: Vec<f64>,
    pub high_amp_freq: Vec<f64>,
    pub loss_freq: Vec<f64>,
    /// Fraction of draws called neutral.
    pub neutral_freq: Vec<f64>,
    /// Draw-by-clone status matrix, kept for region null probabilities.
    #[serde(skip)]
    draws: Vec<Vec<Status>>,
}

impl CloneCalls {
    pub fn len(&self) -> usize {
        self.status.len()
    }

    pub fn is_empty(&self) -> bool {
        self.status.is_empty()
    }
}

pub fn call_clones(trace: &Trace, n_clones: usize, cfg: &CallConfig) -> Result<CloneCalls> {
    cfg.validate()?;
    if trace.is_empty() {
        return Err(Error::InvalidInput("empty trace".into()));
    }
    let draws = trace
        .records
        .iter()
        .map(|r| {
            if r.partition.len() != n_clones {
                return Err(Error::Alignment(format!(
                    "trace covers {} clones, series has {n_clones}",
                    r.partition.len()
                )));
            }
            clone_statuses(r, cfg)
        })
        .collect::<Result<Vec<_>>>()?;
    let t = draws.len() as f64;
    let freq = |pred: fn(Status) -> bool| -> Vec<f64> {
        (0..n_clones).map(|c| draws.iter().filter(|d| pred(d[c])).count() as f64 / t).collect()
    };
    let gain_freq = freq(Status::is_gain);
    let high_amp_freq = freq(|s| s == Status::HighAmp);
    let loss_freq = freq(|s| s == Status::Loss);
    let neutral_freq = freq(|s| s == Status::Neutral);
    let status = (0..n_clones)
        .map(|c| {
            if high_amp_freq[c] > cfg.call_freq {
                Status::HighAmp
            } else if gain_freq[c] > cfg.call_freq {
                Status::Gain
            } else if loss_freq[c] > cfg.call_freq {
                Status::Loss
            } else {
                Status::Neutral
            }
        })
        .collect();
    Ok(CloneCalls { status, gain_freq, high_amp_freq, loss_freq, neutral_freq, draws })
}

/// A maximal run of clones sharing one non-neutral call.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Region {
    pub chromosome: String,
    pub status: Status,
    /// Index range of the region's clones within the series.
    pub clones: Range<usize>,
    pub first_clone: String,
    pub last_clone: String,
    pub kb_start: f64,
    pub kb_end: f64,
    pub null_prob: f64,
    pub q_value: f64,
}

impl Region {
    pub fn is_significant(&self, fdr_level: f64) -> bool {
        self.q_value <= fdr_level
    }
}

/// Maximal runs of equal non-neutral statuses, as local index ranges.
pub fn runs(status: &[Status]) -> Vec<(Status, Range<usize>)> {
    let mut out = Vec::new();
    let mut i = 0;
    while i < status.len() {
        let s = status[i];
        let mut j = i + 1;
        while j < status.len() && status[j] == s {
            j += 1;
        }
        if s.is_aberrant() {
            out.push((s, i..j));
        }
        i = j;
    }
    out
}

/// Posterior null probability of the clones in `range`.
pub fn region_null_prob(calls: &CloneCalls, range: Range<usize>, mode: RegionNull) -> f64 {
    match mode {
        RegionNull::AllNeutral => {
            let hits = calls.draws.iter().filter(|d| d[range.clone()].iter().all(|&s| s == Status::Neutral)).count();
            hits as f64 / calls.draws.len() as f64
        }
        RegionNull::CloneAverage => {
            let len = range.len() as f64;
            calls.neutral_freq[range].iter().sum::<f64>() / len
        }
    }
}

/// q-values from null probabilities: with regions ranked by ascending
/// null probability, `q_(k)` is the mean of the `k` smallest. Returned in
/// input order.
pub fn q_values(null_probs: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..null_probs.len()).collect();
    order.sort_by(|&a, &b| null_probs[a].total_cmp(&null_probs[b]));
    let mut out = vec![0.0; null_probs.len()];
    let mut running = 0.0;
    for (rank, &i) in order.iter().enumerate() {
        running += null_probs[i];
        out[i] = running / (rank + 1) as f64;
    }
    out
}

/// Calls and traces for one chromosome.
#[derive(Debug, Clone, PartialEq)]
pub struct ChromosomeCalls {
    pub chromosome: String,
    pub range: Range<usize>,
    pub calls: CloneCalls,
}

/// Clone calls and regions for a whole sample.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CallResult {
    pub status: Vec<Status>,
    pub gain_freq: Vec<f64>,
    pub high_amp_freq: Vec<f64>,
    pub loss_freq: Vec<f64>,
    pub regions: Vec<Region>,
}

impl CallResult {
    pub fn significant_regions(&self, fdr_level: f64) -> impl Iterator<Item = &Region> {
        self.regions.iter().filter(move |r| r.is_significant(fdr_level))
    }
}

/// Form regions on every chromosome and assign q-values across the sample.
pub fn region_fdr(series: &CloneSeries, chromosomes: &[ChromosomeCalls], cfg: &CallConfig) -> Result<Vec<Region>> {
    let mut regions = Vec::new();
    for chr in chromosomes {
        if chr.calls.len() != chr.range.len() || chr.range.end > series.len() {
            return Err(Error::Alignment(format!("calls for chromosome {} do not match the series", chr.chromosome)));
        }
        for (status, local) in runs(&chr.calls.status) {
            let global = chr.range.start + local.start..chr.range.start + local.end;
            let recs = &series.records()[global.clone()];
            regions.push(Region {
                chromosome: chr.chromosome.clone(),
                status,
                first_clone: recs[0].clone_id.clone(),
                last_clone: recs[recs.len() - 1].clone_id.clone(),
                kb_start: recs[0].kb_start,
                kb_end: recs[recs.len() - 1].kb_end,
                null_prob: region_null_prob(&chr.calls, local, cfg.region_null),
                q_value: f64::NAN,
                clones: global,
            });
        }
    }
    let q = q_values(&regions.iter().map(|r| r.null_prob).collect::<Vec<_>>());
    for (r, q) in regions.iter_mut().zip(q) {
        r.q_value = q;
    }
    Ok(regions)
}

/// Fit every chromosome of `series` with its own chain. Chromosome `c`
/// uses child stream `c` of `seeder`.
pub fn fit_series(series: &CloneSeries, model: &ModelConfig, chain: &ChainOptions, seeder: Seeder) -> Result<Vec<Trace>> {
    series
        .chromosomes()
        .iter()
        .enumerate()
        .map(|(c, (_, range))| run_chain(&series.log_ratios(range.clone()), model, chain, seeder.child(c as u64)))
        .collect()
}

/// Clone calls and regions from one trace per chromosome.
pub fn call_series(series: &CloneSeries, traces: &[Trace], cfg: &CallConfig) -> Result<CallResult> {
    if traces.len() != series.chromosomes().len() {
        return Err(Error::Alignment(format!(
            "{} traces for {} chromosomes",
            traces.len(),
            series.chromosomes().len()
        )));
    }
    let mut per_chr = Vec::with_capacity(traces.len());
    for ((name, range), trace) in series.chromosomes().iter().zip(traces) {
        let calls = call_clones(trace, range.len(), cfg)?;
        per_chr.push(ChromosomeCalls { chromosome: name.clone(), range: range.clone(), calls });
    }
    let regions = region_fdr(series, &per_chr, cfg)?;
    let concat = |f: fn(&CloneCalls) -> &Vec<f64>| per_chr.iter().flat_map(|c| f(&c.calls).iter().copied()).collect();
    Ok(CallResult {
        status: per_chr.iter().flat_map(|c| c.calls.status.iter().copied()).collect(),
        gain_freq: concat(|c| &c.gain_freq),
        high_amp_freq: concat(|c| &c.high_amp_freq),
        loss_freq: concat(|c| &c.loss_freq),
        regions,
    })
}

/// Share of samples calling each clone.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrequencyRow {
    pub clone_id: String,
    pub chromosome: String,
    pub kb_start: f64,
    pub kb_end: f64,
    /// Gains including high-level amplifications.
    pub gain: f64,
    pub loss: f64,
    pub high_amp: f64,
}

/// Per-clone call frequencies across samples, in genome order of the first
/// sample.
pub fn aberration_frequency(samples: &[(&CloneSeries, &CallResult)]) -> Result<Vec<FrequencyRow>> {
    let (first, _) = samples.first().ok_or_else(|| Error::InvalidInput("no samples".into()))?;
    for (s, res) in samples {
        let same = s.len() == first.len()
            && s.records().iter().zip(first.records()).all(|(a, b)| a.clone_id == b.clone_id && a.chromosome == b.chromosome);
        if !same || res.status.len() != s.len() {
            return Err(Error::Alignment("samples do not share the same clones".into()));
        }
    }
    let k = samples.len() as f64;
    Ok(first
        .records()
        .iter()
        .enumerate()
        .map(|(c, r)| {
            let count = |pred: fn(Status) -> bool| samples.iter().filter(|(_, res)| pred(res.status[c])).count() as f64 / k;
            FrequencyRow {
                clone_id: r.clone_id.clone(),
                chromosome: r.chromosome.clone(),
                kb_start: r.kb_start,
                kb_end: r.kb_end,
                gain: count(Status::is_gain),
                loss: count(|s| s == Status::Loss),
                high_amp: count(|s| s == Status::HighAmp),
            }
        })
        .collect())
}

/// A shifted segment in a synthetic series.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Segment {
    pub start: usize,
    pub len: usize,
    pub shift: f64,
}

/// Synthetic single-sample series: `n_clones` clones spread over
/// `n_chromosomes` chromosomes, spaced 100 kb apart, log2 ratio
/// `shift + N(0, tau^2)`. Segment positions are global clone indices.
pub fn synthetic_series<R: Rng + ?Sized>(
    n_clones: usize,
    n_chromosomes: usize,
    segments: &[Segment],
    tau: f64,
    rng: &mut R,
) -> Result<CloneSeries> {
    if n_chromosomes == 0 || n_clones < n_chromosomes {
        return domain("need at least one clone per chromosome");
    }
    if segments.iter().any(|s| s.start + s.len > n_clones) {
        return domain("segment runs past the last clone");
    }
    let per = n_clones.div_ceil(n_chromosomes);
    let records = (0..n_clones)
        .map(|i| {
            let shift: f64 = segments.iter().filter(|s| (s.start..s.start + s.len).contains(&i)).map(|s| s.shift).sum();
            let pos = (i % per) as f64 * 100.0;
            CloneRecord {
                clone_id: format!("C{:05}", i + 1),
                chromosome: (i / per + 1).to_string(),
                kb_start: pos,
                kb_end: pos + 80.0,
                log2_ratio: shift + tau * rng.sample::<f64, _>(StandardNormal),
            }
        })
        .collect();
    CloneSeries::new(records)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sequence::Partition;

    fn record(assign: &[usize], means: &[f64]) -> TraceRecord {
        TraceRecord {
            iteration: 1,
            partition: Partition::from_assignment(assign),
            tau2: 0.01,
            means: means.to_vec(),
            weights: None,
            log_marginal: 0.0,
        }
    }

    fn trace(records: Vec<TraceRecord>) -> Trace {
        Trace { records, burnin: 0, thin: 1, streams: vec![Seeder::new(0)] }
    }

    fn series(n: usize) -> CloneSeries {
        CloneSeries::new(
            (0..n)
                .map(|i| CloneRecord {
                    clone_id: format!("c{i}"),
                    chromosome: "1".into(),
                    kb_start: i as f64,
                    kb_end: i as f64 + 0.5,
                    log2_ratio: 0.0,
                })
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn classify_examples() {
        use Status::*;
        assert_eq!(classify_iteration(&[0.4], 0.1, 2.0).unwrap(), vec![Neutral]);
        assert_eq!(classify_iteration(&[-0.02, 0.5], 0.1, 2.0).unwrap(), vec![Neutral, Gain]);
        assert_eq!(classify_iteration(&[0.0, -0.5, 0.05], 0.1, 2.0).unwrap(), vec![Neutral, Loss, Neutral]);
        let s = classify_iteration(&[0.0, 0.3, 0.31, 1.8], 0.1, 2.0).unwrap();
        assert_eq!(s, vec![Neutral, Gain, Gain, Gain]);

        let gains = [0.3, 0.31, 0.32, 3.0];
        let mean = gains.iter().sum::<f64>() / 4.0;
        let sd = (gains.iter().map(|g| (g - mean) * (g - mean)).sum::<f64>() / 3.0).sqrt();
        let expect = if 3.0 > mean + 2.0 * sd { HighAmp } else { Gain };
        let s = classify_iteration(&[0.0, 0.3, 0.31, 0.32, 3.0], 0.1, 2.0).unwrap();
        assert_eq!(s[4], expect);
        assert_eq!(classify_iteration(&[0.0, 0.5, 3.0], 0.1, 0.5).unwrap()[2], HighAmp);
        assert_eq!(classify_iteration(&[0.0, 3.0], 0.1, 0.0).unwrap()[1], Gain);
        assert!(classify_iteration(&[], 0.1, 2.0).is_err());
    }

    #[test]
    fn gain_statistics_example() {
        let g = [0.3, 0.31, 1.8];
        let mean: f64 = g.iter().sum::<f64>() / 3.0;
        let sd = (g.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / 2.0).sqrt();
        assert!((mean - 0.803).abs() < 1e-3 && (sd - 0.863).abs() < 1e-3);
    }

    #[test]
    fn mirrored_means_swap_gain_and_loss() {
        let means = [0.02, 0.4, -0.7, 0.9, -0.3, 0.05];
        let up = classify_iteration(&means, 0.1, f64::INFINITY).unwrap();
        let neg: Vec<f64> = means.iter().map(|m| -m).collect();
        let down = classify_iteration(&neg, 0.1, f64::INFINITY).unwrap();
        for (a, b) in up.iter().zip(&down) {
            let mirrored = match a {
                Status::Gain => Status::Loss,
                Status::Loss => Status::Gain,
                s => *s,
            };
            assert_eq!(mirrored, *b);
        }
    }

    #[test]
    fn epsilon_monotone() {
        let means = [0.01, 0.08, 0.15, -0.2, 0.6, -0.09];
        let mut last = usize::MAX;
        for eps in [0.01, 0.05, 0.1, 0.2, 0.5, 1.0] {
            let k = classify_iteration(&means, eps, 2.0).unwrap().iter().filter(|s| s.is_aberrant()).count();
            assert!(k <= last);
            last = k;
        }
    }

    #[test]
    fn constant_trace_gives_zero_one_frequencies() {
        let r = record(&[0, 0, 1, 1, 0], &[0.0, 0.7]);
        let t = trace(vec![r.clone(), r.clone(), r]);
        let calls = call_clones(&t, 5, &CallConfig::default()).unwrap();
        assert_eq!(calls.gain_freq, vec![0.0, 0.0, 1.0, 1.0, 0.0]);
        assert_eq!(calls.status[2], Status::Gain);
        assert!(call_clones(&t, 4, &CallConfig::default()).is_err());
        let cfg = CallConfig { epsilon: f64::INFINITY, ..Default::default() };
        let calls = call_clones(&t, 5, &cfg).unwrap();
        assert!(calls.status.iter().all(|&s| s == Status::Neutral));
    }

    #[test]
    fn high_amp_dominates_gain() {
        let a = record(&[0, 1, 2, 3], &[0.0, 0.3, 0.31, 3.0]);
        let t = trace(vec![a; 4]);
        let cfg = CallConfig { amp_sd_mult: 0.5, ..Default::default() };
        let calls = call_clones(&t, 4, &cfg).unwrap();
        assert_eq!(calls.status[3], Status::HighAmp);
        assert_eq!(calls.gain_freq[3], 1.0);
    }

    #[test]
    fn q_value_examples() {
        assert_eq!(q_values(&[0.21, 0.01]), vec![0.11, 0.01]);
        let q = q_values(&[0.3, 0.0, 0.9, 0.1, 0.5]);
        let mut sorted: Vec<(f64, f64)> = [0.3, 0.0, 0.9, 0.1, 0.5].iter().copied().zip(q).collect();
        sorted.sort_by(|a, b| a.0.total_cmp(&b.0));
        assert!(sorted.windows(2).all(|w| w[0].1 <= w[1].1));
        assert!(q_values(&[]).is_empty());
    }

    #[test]
    fn region_null_probabilities() {
        let s = series(6);
        let aberrant = record(&[0, 0, 1, 1, 0, 0], &[0.0, 0.8]);
        let flat = record(&[0, 0, 0, 0, 0, 0], &[0.0]);
        let cfg = CallConfig::default();
        let always = call_series(&s, &[trace(vec![aberrant.clone(); 5])], &cfg).unwrap();
        assert_eq!(always.regions.len(), 1);
        assert_eq!(always.regions[0].clones, 2..4);
        assert_eq!((always.regions[0].null_prob, always.regions[0].q_value), (0.0, 0.0));

        let mostly = trace(vec![aberrant.clone(), aberrant.clone(), aberrant.clone(), aberrant, flat]);
        let res = call_series(&s, &[mostly], &cfg).unwrap();
        assert!((res.regions[0].null_prob - 0.2).abs() < 1e-12);

        let calls = call_clones(&trace(vec![record(&[0, 0, 0, 0, 0, 0], &[0.0]); 3]), 6, &cfg).unwrap();
        assert_eq!(region_null_prob(&calls, 0..6, RegionNull::AllNeutral), 1.0);
        assert_eq!(region_null_prob(&calls, 0..6, RegionNull::CloneAverage), 1.0);
        assert!(runs(&calls.status).is_empty());
    }

    #[test]
    fn frequencies_across_samples() {
        let s = series(4);
        let one = CallResult {
            status: vec![Status::Gain, Status::Neutral, Status::Neutral, Status::Neutral],
            gain_freq: vec![],
            high_amp_freq: vec![],
            loss_freq: vec![],
            regions: vec![],
        };
        let two = CallResult { status: vec![Status::Neutral, Status::Neutral, Status::Loss, Status::HighAmp], ..one.clone() };
        let rows = aberration_frequency(&[(&s, &one), (&s, &two)]).unwrap();
        let gain: Vec<f64> = rows.iter().map(|r| r.gain).collect();
        assert_eq!(gain, vec![0.5, 0.0, 0.0, 0.5]);
        assert_eq!(rows[2].loss, 0.5);
        let single = aberration_frequency(&[(&s, &one)]).unwrap();
        assert!(single.iter().all(|r| r.gain == 0.0 || r.gain == 1.0));
        let other = series(3);
        assert!(aberration_frequency(&[(&s, &one), (&other, &two)]).is_err());
    }

    #[test]
    fn series_validation() {
        let mut recs = series(3).records().to_vec();
        recs.swap(0, 2);
        assert!(CloneSeries::new(recs).is_err());
        let mut recs = series(3).records().to_vec();
        recs[1].chromosome = "2".into();
        assert!(CloneSeries::new(recs).is_err());
        let mut r = Seeder::new(1).rng();
        let s = synthetic_series(10, 2, &[], 0.1, &mut r);
        assert_eq!(s.unwrap().chromosomes().len(), 2);
    }
}
