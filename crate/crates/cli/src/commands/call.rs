use betagos::cgh::{aberration_frequency, call_series, CallConfig, CallResult, CloneSeries, RegionNull};
use betagos::inference::{run_chain, ModelConfig, Trace};
use betagos::Seeder;
use rayon::prelude::*;
use serde::Serialize;

use super::{chain_options, Context};
use crate::args::{CallArgs, Format, RegionNullArg};
use crate::error::{CliError, CliResult};
use crate::io::{csv_bytes, read_clone_samples};

/// Inverse-gamma scale putting the prior mean of `tau2` near `0.1^2`.
pub const DEFAULT_B0: f64 = 0.01004;

#[derive(Serialize)]
struct CallRow<'a> {
    sample_id: &'a str,
    clone_id: &'a str,
    chromosome: &'a str,
    kb_start: f64,
    kb_end: f64,
    log2_ratio: f64,
    status: &'static str,
    gain_freq: f64,
    loss_freq: f64,
    high_amp_freq: f64,
}

#[derive(Serialize)]
struct RegionRow<'a> {
    sample_id: &'a str,
    chromosome: &'a str,
    status: &'static str,
    first_clone: &'a str,
    last_clone: &'a str,
    kb_start: f64,
    kb_end: f64,
    clones: usize,
    null_prob: f64,
    q_value: f64,
    significant: bool,
}

pub fn run(ctx: &mut Context, a: &CallArgs) -> CliResult<()> {
    let cfg = CallConfig {
        epsilon: a.epsilon,
        call_freq: a.call_freq,
        amp_sd_mult: a.amp_sd_mult,
        fdr_level: a.fdr,
        region_null: match a.region_null {
            RegionNullArg::AllNeutral => RegionNull::AllNeutral,
            RegionNullArg::CloneAverage => RegionNull::CloneAverage,
        },
    };
    cfg.validate().map_err(CliError::usage)?;
    if !cfg.epsilon_in_stable_band() {
        eprintln!("warning: epsilon {} lies outside 0.05..0.15; calls may be unstable", cfg.epsilon);
    }
    let c = &a.chain;
    let model = ModelConfig::new(c.mu0, c.sigma0, c.a0, c.b0.unwrap_or(DEFAULT_B0), a.schedule.clone())
        .map_err(CliError::usage)?;
    let opts = chain_options(c)?;
    let samples = read_clone_samples(&a.inputs)?;
    for p in &a.inputs {
        ctx.record_input(p)?;
    }

    let root = Seeder::new(ctx.seed);
    let jobs: Vec<(usize, usize)> = samples
        .iter()
        .enumerate()
        .flat_map(|(s, (_, series))| (0..series.chromosomes().len()).map(move |c| (s, c)))
        .collect();
    let traces: Vec<Trace> = jobs
        .par_iter()
        .map(|&(s, c)| {
            let series = &samples[s].1;
            let range = series.chromosomes()[c].1.clone();
            run_chain(&series.log_ratios(range), &model, &opts, root.child(s as u64).child(c as u64))
        })
        .collect::<betagos::Result<_>>()?;
    for &(s, c) in &jobs {
        ctx.stream(format!("{}/{}", samples[s].0, samples[s].1.chromosomes()[c].0), root.child(s as u64).child(c as u64));
    }

    let mut results: Vec<CallResult> = Vec::with_capacity(samples.len());
    let mut offset = 0;
    for (_, series) in &samples {
        let k = series.chromosomes().len();
        results.push(call_series(series, &traces[offset..offset + k], &cfg)?);
        offset += k;
    }

    let mut calls = Vec::new();
    let mut regions = Vec::new();
    for ((id, series), res) in samples.iter().zip(&results) {
        for (i, r) in series.records().iter().enumerate() {
            calls.push(CallRow {
                sample_id: id,
                clone_id: &r.clone_id,
                chromosome: &r.chromosome,
                kb_start: r.kb_start,
                kb_end: r.kb_end,
                log2_ratio: r.log2_ratio,
                status: res.status[i].as_str(),
                gain_freq: res.gain_freq[i],
                loss_freq: res.loss_freq[i],
                high_amp_freq: res.high_amp_freq[i],
            });
        }
        for g in &res.regions {
            regions.push(RegionRow {
                sample_id: id,
                chromosome: &g.chromosome,
                status: g.status.as_str(),
                first_clone: &g.first_clone,
                last_clone: &g.last_clone,
                kb_start: g.kb_start,
                kb_end: g.kb_end,
                clones: g.clones.len(),
                null_prob: g.null_prob,
                q_value: g.q_value,
                significant: g.is_significant(cfg.fdr_level),
            });
        }
    }
    let pairs: Vec<(&CloneSeries, &CallResult)> = samples.iter().map(|(_, s)| s).zip(&results).collect();
    let freq = aberration_frequency(&pairs).ok();
    if freq.is_none() {
        eprintln!("warning: samples do not share one clone set; skipping genome frequencies");
    }
    match ctx.format {
        Format::Csv => {
            ctx.out.write("calls.csv", &csv_bytes(&calls)?)?;
            ctx.out.write("regions.csv", &csv_bytes(&regions)?)?;
            if let Some(f) = &freq {
                ctx.out.write("frequency.csv", &csv_bytes(f)?)?;
            }
        }
        Format::Json => {
            ctx.out.write_json("calls.json", &calls)?;
            ctx.out.write_json("regions.json", &regions)?;
            if let Some(f) = &freq {
                ctx.out.write_json("frequency.json", f)?;
            }
        }
    }
    Ok(())
}
