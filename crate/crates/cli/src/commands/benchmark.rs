use betagos::generators::GeneratorKind;

use super::{chain_options, Context};
use crate::args::{BenchmarkArgs, Kind};
use crate::benchmark::{run_benchmark, BenchmarkConfig, Hyper};
use crate::error::{CliError, CliResult};
use crate::io::csv_bytes;

use super::fit::DEFAULT_B0;

fn default_kind(kind: Kind, tau: f64) -> CliResult<GeneratorKind> {
    let mut g = match kind {
        Kind::Mixture => GeneratorKind::mixture_default(),
        Kind::TruncatedUrn => GeneratorKind::truncated_urn_default(),
        Kind::HmmTwoRegime => GeneratorKind::hmm_default(),
        Kind::Betagos => GeneratorKind::betagos_default(),
        Kind::Dp => GeneratorKind::dp_default(),
        Kind::Sequence => return Err(CliError::Usage("`sequence` cannot be benchmarked".into())),
    };
    match &mut g {
        GeneratorKind::Mixture { tau: t, .. }
        | GeneratorKind::TruncatedUrn { tau: t, .. }
        | GeneratorKind::HmmTwoRegime { tau: t, .. }
        | GeneratorKind::Betagos { tau: t, .. }
        | GeneratorKind::Dp { tau: t, .. } => *t = tau,
    }
    Ok(g)
}

pub fn config(seed: u64, a: &BenchmarkArgs) -> CliResult<BenchmarkConfig> {
    let c = &a.chain;
    let cfg = BenchmarkConfig {
        generators: a.generators.iter().map(|&k| default_kind(k, a.tau)).collect::<CliResult<_>>()?,
        fitters: a.fitters.clone(),
        replicates: a.replicates,
        n: a.n,
        hyper: Hyper { mu0: c.mu0, sigma0: c.sigma0, a0: c.a0, b0: c.b0.unwrap_or(DEFAULT_B0) },
        chain: chain_options(c)?,
        seed,
    };
    cfg.validate().map_err(CliError::usage)?;
    Ok(cfg)
}

pub fn run(ctx: &mut Context, a: &BenchmarkArgs) -> CliResult<()> {
    let cfg = config(ctx.seed, a)?;
    let report = run_benchmark(&cfg)?;
    for g in 0..cfg.generators.len() {
        for r in 0..cfg.replicates {
            ctx.stream(format!("data/{g}/{r}"), cfg.data_seeder(g, r));
            for f in 0..cfg.fitters.len() {
                ctx.stream(format!("chain/{g}/{r}/{f}"), cfg.chain_seeder(g, r, f));
            }
        }
    }
    ctx.out.write_json("benchmark.json", &report)?;
    ctx.out.write("benchmark.csv", &csv_bytes(report.rows())?)?;
    Ok(())
}

