use std::path::PathBuf;

use clap::Args;
use krn_core::convergence::{refinement_sweep, tensor_convergence_check, ConvergenceReport};
use krn_core::discretize::{Partition1D, RefinementChain};
use krn_core::models::{gaussian_kernel, Measure1D};
use krn_core::quadrature::QuadratureConfig;

use crate::{parse_pair, CliError, CliResult};

#[derive(Debug, Clone, Args)]
pub struct ConvergeArgs {
    /// Window half-width of the `window:m:n` schemes.
    #[arg(long, default_value_t = 7, value_parser = clap::value_parser!(u32).range(1..))]
    pub m: u32,
    /// Refinement levels `n1,n2,...`.
    #[arg(long, value_delimiter = ',', default_value = "1,2,4,8,16")]
    pub levels: Vec<u32>,
    /// Custom partition files (a JSON array of breakpoints), used instead of windows.
    #[arg(long = "partition")]
    pub partitions: Vec<PathBuf>,
    /// Test interval `a,b` of the indicator predicate; repeatable.
    #[arg(long = "interval", value_parser = parse_pair, allow_hyphen_values = true)]
    pub intervals: Vec<(f64, f64)>,
    /// Also check the product kernel on the rectangle `a,b` x `c,d`.
    #[arg(long, value_parser = parse_pair, num_args = 2, allow_hyphen_values = true)]
    pub rectangle: Option<Vec<(f64, f64)>>,
    #[arg(long, default_value = "normal:0:1")]
    pub prior: Measure1D,
    /// Variance of the kernel `x ↦ N(x, v)`.
    #[arg(long = "kernel-var", default_value_t = 1.0)]
    pub kernel_var: f64,
    #[arg(long = "quad-nodes", default_value_t = 16)]
    pub quad_nodes: usize,
    /// Fill the runtime column (makes the output non-reproducible).
    #[arg(long)]
    pub timing: bool,
}

fn chain(args: &ConvergeArgs) -> CliResult<RefinementChain> {
    if args.partitions.is_empty() {
        if args.levels.is_empty() || args.levels.contains(&0) {
            return Err(CliError::Usage("error: --levels must be positive integers".into()));
        }
        return Ok(RefinementChain::windows(args.m, &args.levels)?);
    }
    let partitions = args
        .partitions
        .iter()
        .map(|path| {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::Usage(format!("error: cannot read {}: {e}", path.display())))?;
            Partition1D::from_json(&text)
                .map_err(|e| CliError::Usage(format!("error: {}: {e}", path.display())))
        })
        .collect::<CliResult<Vec<_>>>()?;
    Ok(RefinementChain::new(partitions)?)
}

pub fn sweep(args: &ConvergeArgs) -> CliResult<ConvergenceReport> {
    let chain = chain(args)?;
    let kernel = gaussian_kernel(args.kernel_var)?;
    let q = QuadratureConfig::with_nodes(args.quad_nodes);
    let intervals = if args.intervals.is_empty() {
        vec![(0.0, 1.0)]
    } else {
        args.intervals.clone()
    };
    let mut report = refinement_sweep(&kernel, &args.prior, &chain, &intervals, &q)?;
    if let Some(rect) = &args.rectangle {
        let extra = tensor_convergence_check(&kernel, &kernel, &args.prior, &args.prior, &chain, (rect[0], rect[1]), &q)?;
        report.rows.extend(extra.rows);
    }
    Ok(report)
}

pub fn run(args: &ConvergeArgs) -> CliResult<String> {
    Ok(sweep(args)?.to_csv(args.timing))
}
