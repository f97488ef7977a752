pub mod benchmark;
pub mod call;
pub mod fit;
pub mod moments;
pub mod simulate;

use std::path::Path;

use betagos::inference::{ChainOptions, InitMode, SamplerOptions, ScanOrder};

use crate::args::{ChainArgs, Format, InitArg, ScanArg};
use crate::error::{CliError, CliResult};
use crate::manifest::{digest_file, FileDigest, OutputSet, Substream};

/// State shared by a subcommand while it runs.
pub struct Context {
    pub seed: u64,
    pub format: Format,
    pub out: OutputSet,
    pub inputs: Vec<FileDigest>,
    pub substreams: Vec<Substream>,
}

impl Context {
    pub fn new(seed: u64, format: Format, out_dir: &Path) -> CliResult<Self> {
        Ok(Self { seed, format, out: OutputSet::new(out_dir)?, inputs: Vec::new(), substreams: Vec::new() })
    }

    pub fn record_input(&mut self, path: &Path) -> CliResult<()> {
        self.inputs.push(digest_file(path)?);
        Ok(())
    }

    pub fn stream(&mut self, label: impl Into<String>, seeder: betagos::Seeder) {
        self.substreams.push(Substream::new(label, seeder));
    }

    pub fn ext(&self) -> &'static str {
        match self.format {
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }
}

pub(crate) fn chain_options(a: &ChainArgs) -> CliResult<ChainOptions> {
    let mut opts = ChainOptions::new(a.iters, a.burnin, a.thin);
    opts.sampler = SamplerOptions {
        tau2_mode: a.tau2_mode.into(),
        scan: match a.scan {
            ScanArg::Systematic => ScanOrder::Systematic,
            ScanArg::Random => ScanOrder::Random,
        },
        init: match a.init {
            InitArg::Prior => InitMode::PriorPredictive,
            InitArg::Singletons => InitMode::Singletons,
        },
    };
    opts.validate().map_err(CliError::usage)?;
    Ok(opts)
}
