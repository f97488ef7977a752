use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{GibbsState, ModelConfig, Trace, TraceRecord};
use crate::error::{Error, Result};
use crate::sequence::Partition;

fn record_weight(cfg: &ModelConfig, weights: Option<&[f64]>, t: usize) -> Result<f64> {
    match weights {
        Some(w) => Ok(w[t]),
        None => cfg.schedule.weight_moment(t + 1, 1),
    }
}

fn predict_from<R: Rng + ?Sized>(
    partition: &Partition,
    means: &[f64],
    weights: Option<&[f64]>,
    tau2: f64,
    cfg: &ModelConfig,
    rng: &mut R,
) -> Result<f64> {
    let m = partition.len();
    // Walk back from the newest observation: pairing to j costs
    // (1 - W_j) * prod_{j < t < m+1} W_t and a new block costs prod_{t} W_t.
    let u: f64 = rng.random();
    let mut tail = 1.0;
    let mut acc = 0.0;
    let mut chosen = None;
    for j in (0..m).rev() {
        let w = record_weight(cfg, weights, j)?;
        acc += (1.0 - w) * tail;
        tail *= w;
        if u < acc {
            chosen = Some(j);
            break;
        }
    }
    let centre = match chosen {
        Some(j) => means[partition.block_of(j)],
        None => cfg.base().sample(rng),
    };
    Ok(centre + tau2.sqrt() * rng.sample::<f64, _>(rand_distr::StandardNormal))
}

/// Draw the next observation `y_{m+1}` given the current state.
pub fn predict_next<R: Rng + ?Sized>(state: &GibbsState, cfg: &ModelConfig, rng: &mut R) -> Result<f64> {
    if state.means.len() != state.partition.num_blocks() {
        return Err(Error::Alignment("block means missing from state".into()));
    }
    if state.weights.is_none() && !cfg.schedule.is_deterministic() {
        return Err(Error::InvalidInput("random schedule needs latent weights".into()));
    }
    predict_from(
        &state.partition,
        &state.means,
        state.weights.as_ref().map(|w| w.values()),
        state.tau2,
        cfg,
        rng,
    )
}

fn predict_record<R: Rng + ?Sized>(rec: &TraceRecord, cfg: &ModelConfig, rng: &mut R) -> Result<f64> {
    predict_from(&rec.partition, &rec.means, rec.weights.as_deref(), rec.tau2, cfg, rng)
}

/// Summary of one predictive draw per retained record against a held-out value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PredictiveStats {
    pub holdout: f64,
    /// `mean |holdout - y_pred|` over the trace.
    pub bias: f64,
    pub mean: f64,
    pub sd: f64,
}

pub fn predictive_bias<R: Rng + ?Sized>(
    trace: &Trace,
    cfg: &ModelConfig,
    holdout: f64,
    rng: &mut R,
) -> Result<PredictiveStats> {
    if trace.is_empty() {
        return Err(Error::InvalidInput("empty trace".into()));
    }
    let draws = trace
        .records
        .iter()
        .map(|r| predict_record(r, cfg, rng))
        .collect::<Result<Vec<_>>>()?;
    let n = draws.len() as f64;
    let mean = draws.iter().sum::<f64>() / n;
    let var = if draws.len() > 1 {
        draws.iter().map(|d| (d - mean).powi(2)).sum::<f64>() / (n - 1.0)
    } else {
        0.0
    };
    let bias = draws.iter().map(|d| (holdout - d).abs()).sum::<f64>() / n;
    Ok(PredictiveStats { holdout, bias, mean, sd: var.sqrt() })
}

/// Posterior co-clustering frequencies, row-major `n x n`.
pub fn coclustering(trace: &Trace) -> Result<Vec<f64>> {
    let first = trace.records.first().ok_or_else(|| Error::InvalidInput("empty trace".into()))?;
    let n = first.partition.len();
    let mut out = vec![0.0; n * n];
    for rec in &trace.records {
        if rec.partition.len() != n {
            return Err(Error::Alignment("records disagree on the number of observations".into()));
        }
        let a = rec.partition.assignment();
        for i in 0..n {
            let row = &mut out[i * n..(i + 1) * n];
            for (j, cell) in row.iter_mut().enumerate() {
                if a[i] == a[j] {
                    *cell += 1.0;
                }
            }
        }
    }
    let k = trace.len() as f64;
    out.iter_mut().for_each(|v| *v /= k);
    Ok(out)
}

/// Least-squares co-clustering estimate: the sampled partition closest to
/// the mean co-assignment matrix. Ties go to the earliest record.
pub fn point_partition(trace: &Trace) -> Result<Partition> {
    let pi = coclustering(trace)?;
    let n = trace.records[0].partition.len();
    let mut best: Option<(f64, usize)> = None;
    for (idx, rec) in trace.records.iter().enumerate() {
        let a = rec.partition.assignment();
        let mut loss = 0.0;
        for i in 0..n {
            for j in i + 1..n {
                let d = f64::from(u8::from(a[i] == a[j])) - pi[i * n + j];
                loss += d * d;
            }
        }
        if best.is_none_or(|(b, _)| loss < b) {
            best = Some((loss, idx));
        }
    }
    let (_, idx) = best.expect("non-empty trace");
    Ok(trace.records[idx].partition.clone())
}

/// Agreement between an estimated and a true partition.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Accuracy {
    /// Rand index.
    pub pairwise: f64,
    /// Fraction of points correctly labelled after greedy maximum-overlap matching.
    pub matched: f64,
}

pub fn accuracy(est: &Partition, truth: &Partition) -> Result<Accuracy> {
    let n = est.len();
    if n != truth.len() {
        return Err(Error::Alignment(format!("estimate has {n} points, truth has {}", truth.len())));
    }
    if n == 0 {
        return Err(Error::InvalidInput("empty partitions".into()));
    }
    let (a, b) = (est.assignment(), truth.assignment());
    let pairwise = if n == 1 {
        1.0
    } else {
        let mut agree = 0usize;
        for i in 0..n {
            for j in i + 1..n {
                if (a[i] == a[j]) == (b[i] == b[j]) {
                    agree += 1;
                }
            }
        }
        agree as f64 / (n * (n - 1) / 2) as f64
    };

    let (ke, kt) = (est.num_blocks(), truth.num_blocks());
    let mut table = vec![0usize; ke * kt];
    for i in 0..n {
        table[a[i] * kt + b[i]] += 1;
    }
    let mut cells: Vec<(usize, usize, usize)> = (0..ke)
        .flat_map(|r| (0..kt).map(move |c| (r, c)))
        .map(|(r, c)| (table[r * kt + c], r, c))
        .filter(|&(v, _, _)| v > 0)
        .collect();
    cells.sort_by(|x, y| y.0.cmp(&x.0).then(x.1.cmp(&y.1)).then(x.2.cmp(&y.2)));
    let mut used_r = vec![false; ke];
    let mut used_c = vec![false; kt];
    let mut hits = 0;
    for (v, r, c) in cells {
        if !used_r[r] && !used_c[c] {
            used_r[r] = true;
            used_c[c] = true;
            hits += v;
        }
    }
    Ok(Accuracy { pairwise, matched: hits as f64 / n as f64 })
}

/// Condensed view of a fitted trace.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitSummary {
    pub point_estimate: Partition,
    pub num_blocks: usize,
    /// Posterior mean of the block count over retained draws.
    pub mean_blocks: f64,
    /// Posterior mean of `tau` (not `tau2`).
    pub mean_tau: f64,
    pub draws: usize,
    pub predictive: Option<PredictiveStats>,
    pub accuracy: Option<Accuracy>,
}

pub fn summarize(trace: &Trace, truth: Option<&Partition>) -> Result<FitSummary> {
    let point = point_partition(trace)?;
    let n = trace.len() as f64;
    let accuracy = truth.map(|t| accuracy(&point, t)).transpose()?;
    Ok(FitSummary {
        num_blocks: point.num_blocks(),
        point_estimate: point,
        mean_blocks: trace.records.iter().map(|r| r.num_blocks() as f64).sum::<f64>() / n,
        mean_tau: trace.records.iter().map(|r| r.tau2.sqrt()).sum::<f64>() / n,
        draws: trace.len(),
        predictive: None,
        accuracy,
    })
}
