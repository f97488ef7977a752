use betagos::generators::{sticky_matrix, switching_matrix, GeneratorKind, GeneratorSpec, LabeledSeries};
use betagos::{simulate_sequence, BetaSchedule, NormalBase, Seeder};
use rayon::prelude::*;
use serde::Serialize;

use super::Context;
use crate::args::{Format, Kind, SimulateArgs};
use crate::error::{CliError, CliResult};
use crate::io::csv_bytes;

pub(crate) fn generator_kind(kind: Kind, a: &SimulateArgs) -> CliResult<GeneratorKind> {
    let out = match kind {
        Kind::Mixture => GeneratorKind::Mixture { weights: a.weights.clone(), mu0: a.mu0, sigma0: a.sigma0, tau: a.tau },
        Kind::TruncatedUrn => GeneratorKind::TruncatedUrn {
            p_new: a.p_new,
            lag_probs: a.lag_probs.clone(),
            mu0: a.mu0,
            sigma0: a.sigma0,
            tau: a.tau,
        },
        Kind::HmmTwoRegime => GeneratorKind::HmmTwoRegime {
            sticky: sticky_matrix(),
            switching: switching_matrix(),
            switch_at: a.switch_at,
            state_means: a.state_means.clone(),
            tau: a.tau,
        },
        Kind::Betagos => GeneratorKind::Betagos { schedule: a.schedule.clone(), mu0: a.mu0, sigma0: a.sigma0, tau: a.tau },
        Kind::Dp => GeneratorKind::Dp { theta: a.theta, mu0: a.mu0, sigma0: a.sigma0, tau: a.tau },
        Kind::Sequence => return Err(CliError::Usage("`sequence` is not a labelled-series generator".into())),
    };
    // Surface parameter errors before any work is done.
    out.generate(1, &mut Seeder::new(0).rng()).map_err(CliError::usage)?;
    Ok(out)
}

#[derive(Serialize)]
struct Row {
    index: usize,
    y: f64,
    truth: usize,
    state: Option<usize>,
}

#[derive(Serialize)]
struct TruthEntry {
    replicate: usize,
    stream: u64,
    file: String,
    truth: Vec<usize>,
    states: Option<Vec<usize>>,
}

#[derive(Serialize)]
struct TruthFile<'a> {
    generator: &'a GeneratorSpec,
    replicates: Vec<TruthEntry>,
}

pub fn run(ctx: &mut Context, a: &SimulateArgs) -> CliResult<()> {
    if a.n == 0 || a.replicates == 0 {
        return Err(CliError::Usage("--n and --replicates must be >= 1".into()));
    }
    if a.kind == Kind::Sequence {
        return run_sequence(ctx, a);
    }
    let spec = GeneratorSpec::new(generator_kind(a.kind, a)?, a.n, ctx.seed).map_err(CliError::usage)?;
    let series: Vec<LabeledSeries> =
        (0..a.replicates).into_par_iter().map(|r| spec.replicate(r as u64)).collect::<betagos::Result<_>>()?;
    let mut entries = Vec::with_capacity(series.len());
    for (r, s) in series.iter().enumerate() {
        let seeder = spec.seeder(r as u64);
        ctx.stream(format!("replicate/{r}"), seeder);
        let file = format!("replicate_{r:04}.{}", ctx.ext());
        let truth: Vec<usize> = s.truth.assignment().iter().map(|b| b + 1).collect();
        let rows: Vec<Row> = s
            .y
            .iter()
            .enumerate()
            .map(|(i, &y)| Row { index: i + 1, y, truth: truth[i], state: s.states.as_ref().map(|st| st[i] + 1) })
            .collect();
        match ctx.format {
            Format::Csv => ctx.out.write(&file, &csv_bytes(&rows)?)?,
            Format::Json => ctx.out.write_json(&file, &rows)?,
        };
        entries.push(TruthEntry {
            replicate: r,
            stream: seeder.stream,
            file,
            truth,
            states: s.states.as_ref().map(|st| st.iter().map(|x| x + 1).collect()),
        });
    }
    ctx.out.write_json("truth.json", &TruthFile { generator: &spec, replicates: entries })?;
    Ok(())
}

#[derive(Serialize)]
struct SeqRow {
    index: usize,
    tag: f64,
    label: usize,
}

fn run_sequence(ctx: &mut Context, a: &SimulateArgs) -> CliResult<()> {
    let schedule: BetaSchedule = a.schedule.clone();
    let base = NormalBase::new(a.mu0, a.sigma0).map_err(CliError::usage)?;
    let root = Seeder::new(ctx.seed);
    let draws = (0..a.replicates)
        .into_par_iter()
        .map(|r| simulate_sequence(&schedule, &base, a.n, &mut root.child(r as u64).rng()))
        .collect::<betagos::Result<Vec<_>>>()
        .map_err(CliError::usage)?;
    for (r, d) in draws.iter().enumerate() {
        let seeder = root.child(r as u64);
        ctx.stream(format!("replicate/{r}"), seeder);
        match ctx.format {
            Format::Json => {
                ctx.out.write_json(&format!("sequence_{r:04}.json"), &d.export(&seeder))?;
            }
            Format::Csv => {
                let rows = d.csv_rows().into_iter().map(|(index, tag, label)| SeqRow { index, tag, label });
                ctx.out.write(&format!("sequence_{r:04}.csv"), &csv_bytes(rows)?)?;
            }
        }
    }
    Ok(())
}
