use betagos::inference::{
    coclustering, predictive_bias, run_chain, summarize, FitSummary, ModelConfig, Trace,
};
use betagos::{Partition, Seeder};
use rayon::prelude::*;
use serde::Serialize;

use super::{chain_options, Context};
use crate::args::{FitArgs, Format};
use crate::error::{CliError, CliResult};
use crate::io::{csv_bytes, csv_table, read_observations};

pub const DEFAULT_B0: f64 = 0.0063;

#[derive(Serialize)]
struct ChainStat {
    chain: usize,
    stream: u64,
    draws: usize,
    mean_blocks: f64,
    mean_tau: f64,
}

#[derive(Serialize)]
struct FitReport<'a> {
    model: &'a ModelConfig,
    observations: usize,
    chains: Vec<ChainStat>,
    summary: FitSummary,
}

#[derive(Serialize)]
struct TraceRow {
    chain: usize,
    iteration: usize,
    k: usize,
    tau2: f64,
    log_marginal: f64,
}

#[derive(Serialize)]
struct PartitionRow {
    index: usize,
    block: usize,
}

fn read_truth(path: &std::path::Path, n: usize) -> CliResult<Partition> {
    let raw = read_observations(path, "truth")?;
    if raw.len() != n {
        return Err(CliError::Usage(format!("truth has {} labels for {n} observations", raw.len())));
    }
    if raw.iter().any(|v| v.fract() != 0.0) {
        return Err(CliError::Input { path: path.into(), line: None, msg: "labels must be integers".into() });
    }
    let labels: Vec<i64> = raw.iter().map(|&v| v as i64).collect();
    Ok(Partition::from_assignment(&labels))
}

pub fn run(ctx: &mut Context, a: &FitArgs) -> CliResult<()> {
    if a.chains == 0 {
        return Err(CliError::Usage("--chains must be >= 1".into()));
    }
    let c = &a.chain;
    let model = ModelConfig::new(c.mu0, c.sigma0, c.a0, c.b0.unwrap_or(DEFAULT_B0), a.schedule.clone())
        .map_err(CliError::usage)?;
    let opts = chain_options(c)?;
    let data = read_observations(&a.input, "y")?;
    ctx.record_input(&a.input)?;
    let truth = match &a.truth {
        Some(p) => {
            ctx.record_input(p)?;
            Some(read_truth(p, data.len())?)
        }
        None => None,
    };

    let root = Seeder::new(ctx.seed);
    let traces: Vec<Trace> = (0..a.chains)
        .into_par_iter()
        .map(|ch| run_chain(&data, &model, &opts, root.child(ch as u64)))
        .collect::<betagos::Result<_>>()?;
    let chains = traces
        .iter()
        .enumerate()
        .map(|(ch, t)| {
            let k = t.len() as f64;
            ctx.stream(format!("chain/{ch}"), root.child(ch as u64));
            ChainStat {
                chain: ch,
                stream: root.child(ch as u64).stream,
                draws: t.len(),
                mean_blocks: t.records.iter().map(|r| r.num_blocks() as f64).sum::<f64>() / k,
                mean_tau: t.records.iter().map(|r| r.tau2.sqrt()).sum::<f64>() / k,
            }
        })
        .collect();
    let trace_rows: Vec<TraceRow> = traces
        .iter()
        .enumerate()
        .flat_map(|(ch, t)| {
            t.records.iter().map(move |r| TraceRow {
                chain: ch,
                iteration: r.iteration,
                k: r.num_blocks(),
                tau2: r.tau2,
                log_marginal: r.log_marginal,
            })
        })
        .collect();
    let merged = Trace::merge(traces)?;

    let mut summary = summarize(&merged, truth.as_ref())?;
    if let Some(h) = a.holdout {
        let seeder = root.child(u64::MAX);
        ctx.stream("predict", seeder);
        summary.predictive = Some(predictive_bias(&merged, &model, h, &mut seeder.rng())?);
    }
    let co = coclustering(&merged)?;
    let n = data.len();
    let partition: Vec<PartitionRow> = summary
        .point_estimate
        .assignment()
        .iter()
        .enumerate()
        .map(|(i, &b)| PartitionRow { index: i + 1, block: b + 1 })
        .collect();

    ctx.out.write_json("summary.json", &FitReport { model: &model, observations: n, chains, summary })?;
    let matrix: Vec<Vec<f64>> = co.chunks(n).map(|r| r.to_vec()).collect();
    match ctx.format {
        Format::Csv => {
            let header: Vec<String> = (1..=n).map(|i| format!("y{i}")).collect();
            let rows: Vec<Vec<String>> = matrix.iter().map(|r| r.iter().map(|v| v.to_string()).collect()).collect();
            ctx.out.write("coclustering.csv", &csv_table(&header, &rows)?)?;
            ctx.out.write("trace.csv", &csv_bytes(&trace_rows)?)?;
            ctx.out.write("partition.csv", &csv_bytes(&partition)?)?;
        }
        Format::Json => {
            ctx.out.write_json("coclustering.json", &matrix)?;
            ctx.out.write_json("trace.json", &trace_rows)?;
            ctx.out.write_json("partition.json", &partition)?;
        }
    }
    Ok(())
}
