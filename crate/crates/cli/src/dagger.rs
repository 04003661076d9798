use std::path::PathBuf;

use clap::Args;
use krn_core::measure::KernelJson;

use crate::{CliError, CliResult};

#[derive(Debug, Clone, Args)]
pub struct DaggerArgs {
    /// Kernel JSON file (`labels_in`, `labels_out`, `mu`, `matrix`).
    pub input: PathBuf,
}

/// Bayesian inversion of JSON kernel text; the result uses the same schema.
pub fn dagger_json(text: &str) -> CliResult<String> {
    let kernel = KernelJson::parse(text)?.into_kernel()?;
    Ok(KernelJson::from_kernel(&kernel.dagger()).to_json_string())
}

pub fn run(args: &DaggerArgs) -> CliResult<String> {
    let text = std::fs::read_to_string(&args.input)
        .map_err(|e| CliError::Usage(format!("error: cannot read {}: {e}", args.input.display())))?;
    dagger_json(&text)
}
