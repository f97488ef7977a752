use betagos::moments::{block_count_mgf, limit_summary, LimitSummary, MomentTable};
use betagos::BetaSchedule;
use rayon::prelude::*;
use serde::Serialize;

use super::Context;
use crate::args::{Format, MomentsArgs};
use crate::error::{CliError, CliResult};
use crate::io::csv_table;

/// Quantities for one `(schedule, n, m)`. `falling_moment`, `expected_k`
/// and `mgf` describe `K_{n+1}`.
#[derive(Debug, Serialize)]
struct MomentRow {
    schedule: String,
    n: usize,
    m: usize,
    phi: f64,
    falling_moment: f64,
    expected_k: f64,
    mgf: Vec<(f64, f64)>,
}

#[derive(Serialize)]
struct LimitEntry {
    schedule: String,
    limit: LimitSummary,
}

fn rows_for(s: &BetaSchedule, n: usize, max_m: usize, t: &[f64]) -> betagos::Result<Vec<MomentRow>> {
    let table = MomentTable::new(s, n, max_m)?;
    let mgf = t.iter().map(|&t| Ok((t, block_count_mgf(s, n, t)?))).collect::<betagos::Result<Vec<_>>>()?;
    let expected_k = 1.0 + table.phi.get(1).copied().unwrap_or(0.0);
    (0..=max_m)
        .map(|m| {
            Ok(MomentRow {
                schedule: s.to_string(),
                n,
                m,
                phi: table.phi[m],
                falling_moment: table.falling_moment(m)?,
                expected_k,
                mgf: mgf.clone(),
            })
        })
        .collect()
}

pub fn run(ctx: &mut Context, a: &MomentsArgs) -> CliResult<()> {
    if a.n.is_empty() || a.n.contains(&0) {
        return Err(CliError::Usage("--n needs positive values".into()));
    }
    if a.t.iter().any(|t| !t.is_finite()) {
        return Err(CliError::Usage("--t values must be finite".into()));
    }
    let jobs: Vec<(usize, usize)> =
        (0..a.schedules.len()).flat_map(|s| a.n.iter().map(move |&n| (s, n))).collect();
    let rows: Vec<MomentRow> = jobs
        .par_iter()
        .map(|&(s, n)| rows_for(&a.schedules[s], n, a.max_m, &a.t))
        .collect::<betagos::Result<Vec<_>>>()?
        .into_iter()
        .flatten()
        .collect();
    match ctx.format {
        Format::Csv => {
            let mut header: Vec<String> =
                ["schedule", "n", "m", "phi", "falling_moment", "expected_k"].iter().map(|s| s.to_string()).collect();
            header.extend(a.t.iter().map(|t| format!("mgf_t{t}")));
            let body: Vec<Vec<String>> = rows
                .iter()
                .map(|r| {
                    let mut v = vec![
                        r.schedule.clone(),
                        r.n.to_string(),
                        r.m.to_string(),
                        r.phi.to_string(),
                        r.falling_moment.to_string(),
                        r.expected_k.to_string(),
                    ];
                    v.extend(r.mgf.iter().map(|(_, m)| m.to_string()));
                    v
                })
                .collect();
            ctx.out.write("moments.csv", &csv_table(&header, &body)?)?;
        }
        Format::Json => {
            ctx.out.write_json("moments.json", &rows)?;
        }
    }
    if a.limits {
        let positive: Vec<f64> = a.t.iter().copied().filter(|&t| t > 0.0).collect();
        let limits: Vec<LimitEntry> = a
            .schedules
            .iter()
            .filter_map(|s| {
                limit_summary(s, a.max_m.max(1), &positive).ok().map(|limit| LimitEntry { schedule: s.to_string(), limit })
            })
            .collect();
        ctx.out.write_json("limits.json", &limits)?;
    }
    Ok(())
}
