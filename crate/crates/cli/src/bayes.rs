use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Args, ValueEnum};
use krn_core::discretize::{conditional_moments, discretize_kernel, window_scheme, Partition1D};
use krn_core::models::{exact_gaussian_posterior, gaussian_kernel, posterior_tail_query, Measure1D};
use krn_core::quadrature::QuadratureConfig;
use serde::Serialize;

use crate::{CliError, CliResult};

/// Cells whose midpoint lies in this window enter the density comparison.
pub const DENSITY_WINDOW: (f64, f64) = (-2.0, 2.0);

#[derive(Debug, Clone, Args)]
pub struct BayesArgs {
    /// Half-width of the window of regular cells.
    #[arg(long, value_parser = clap::value_parser!(u32).range(1..))]
    pub m: u32,
    /// Cells per unit length inside the window.
    #[arg(long, value_parser = clap::value_parser!(u32).range(1..))]
    pub n: u32,
    /// Prior, `normal:<mean>:<variance>` or `uniform:<lo>:<hi>`.
    #[arg(long, default_value = "normal:0:1")]
    pub prior: Measure1D,
    /// Variance of the Gaussian likelihood `y ~ N(x, v)`.
    #[arg(long = "likelihood-var")]
    pub likelihood_var: f64,
    /// Observed value.
    #[arg(long, allow_negative_numbers = true)]
    pub obs: f64,
    /// Posterior query, `gt:<t>`; repeatable.
    #[arg(long = "query")]
    pub queries: Vec<Query>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Gauss–Legendre nodes per panel.
    #[arg(long = "quad-nodes", default_value_t = 16)]
    pub quad_nodes: usize,
    /// Also report the conjugate posterior and the deviations from it.
    #[arg(long)]
    pub exact: bool,
    /// Write a gnuplot script here, with its data file next to it.
    #[arg(long = "emit-plot")]
    pub emit_plot: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Query {
    GreaterThan(f64),
}

impl FromStr for Query {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let t = s
            .strip_prefix("gt:")
            .ok_or_else(|| format!("unknown query {s:?}; expected gt:<t>"))?;
        let t: f64 = t.parse().map_err(|_| format!("threshold {t:?} is not a number"))?;
        Ok(Query::GreaterThan(t))
    }
}

impl std::fmt::Display for Query {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Query::GreaterThan(t) => write!(f, "gt:{t}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CellRow {
    pub index: usize,
    /// `None` for an infinite edge.
    pub left: Option<f64>,
    pub right: Option<f64>,
    pub mass: f64,
    /// `mass / width`; `None` on the two unbounded cells.
    pub density: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QueryAnswer {
    pub query: String,
    pub probability: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Summary {
    pub mean: f64,
    pub variance: f64,
    pub queries: Vec<QueryAnswer>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExactQuery {
    pub query: String,
    pub probability: f64,
    pub deviation: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExactBlock {
    pub mean: f64,
    pub variance: f64,
    pub mean_deviation: f64,
    pub variance_deviation: f64,
    /// Largest `|mass/width − exact density at the midpoint|` over regular
    /// cells with midpoint in `density_window`.
    pub density_sup_deviation: f64,
    pub density_window: (f64, f64),
    pub queries: Vec<ExactQuery>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PosteriorReport {
    pub scheme: String,
    pub prior: String,
    pub likelihood: String,
    pub obs: f64,
    pub obs_cell: usize,
    pub cells: Vec<CellRow>,
    pub summary: Summary,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub exact: Option<ExactBlock>,
}

fn finite(x: f64) -> Option<f64> {
    x.is_finite().then_some(x)
}

/// Probability of `(t, ∞)` under the prior-shaped mixture of the cells.
fn greater_than(prior: &Measure1D, partition: &Partition1D, masses: &[f64], t: f64) -> f64 {
    masses
        .iter()
        .enumerate()
        .map(|(k, &w)| {
            let (a, b) = partition.cell_bounds(k);
            let inside = prior.interval_mass(a, b);
            let fraction = if t <= a {
                1.0
            } else if t >= b {
                0.0
            } else if inside > 0.0 {
                prior.interval_mass(t, b) / inside
            } else if partition.representative(k) > t {
                1.0
            } else {
                0.0
            };
            w * fraction
        })
        .sum::<f64>()
        .clamp(0.0, 1.0)
}

/// Discretize, invert, and read off the posterior row of the observation's cell.
pub fn posterior_report(args: &BayesArgs) -> CliResult<PosteriorReport> {
    if !(args.likelihood_var > 0.0 && args.likelihood_var.is_finite()) {
        return Err(CliError::Usage(format!(
            "error: --likelihood-var must be positive, got {}",
            args.likelihood_var
        )));
    }
    if !args.obs.is_finite() {
        return Err(CliError::Usage("error: --obs must be finite".into()));
    }
    let q = QuadratureConfig::with_nodes(args.quad_nodes);
    let partition = window_scheme(args.m, args.n)?;
    let likelihood = gaussian_kernel(args.likelihood_var)?;
    let forward = discretize_kernel(&likelihood, &args.prior, &partition, &partition, &q)?;
    let backward = forward.dagger();
    let obs_cell = partition.cell_of(args.obs);
    let masses = backward.row(obs_cell);

    let cells: Vec<CellRow> = masses
        .iter()
        .enumerate()
        .map(|(index, &mass)| {
            let (a, b) = partition.cell_bounds(index);
            let density = (a.is_finite() && b.is_finite()).then(|| mass / (b - a));
            CellRow {
                index,
                left: finite(a),
                right: finite(b),
                mass,
                density,
            }
        })
        .collect();

    let moments = conditional_moments(&args.prior, &partition, &q);
    let mean: f64 = masses.iter().zip(&moments).map(|(w, (m1, _))| w * m1).sum();
    let second: f64 = masses.iter().zip(&moments).map(|(w, (_, m2))| w * m2).sum();
    let queries = args
        .queries
        .iter()
        .map(|query| match *query {
            Query::GreaterThan(t) => QueryAnswer {
                query: query.to_string(),
                probability: greater_than(&args.prior, &partition, &masses, t),
            },
        })
        .collect();
    let summary = Summary {
        mean,
        variance: (second - mean * mean).max(0.0),
        queries,
    };

    let exact = if args.exact {
        Some(exact_block(args, &cells, &summary)?)
    } else {
        None
    };
    Ok(PosteriorReport {
        scheme: format!("window:{}:{}", args.m, args.n),
        prior: args.prior.to_string(),
        likelihood: likelihood.to_string(),
        obs: args.obs,
        obs_cell,
        cells,
        summary,
        exact,
    })
}

fn exact_block(args: &BayesArgs, cells: &[CellRow], summary: &Summary) -> CliResult<ExactBlock> {
    let Measure1D::Normal { mean, variance } = args.prior else {
        return Err(CliError::Usage("error: --exact needs a normal prior".into()));
    };
    let post = exact_gaussian_posterior(mean, variance, args.likelihood_var, args.obs)?;
    let density_sup_deviation = density_sup_deviation(cells, &post, DENSITY_WINDOW);
    let queries = summary
        .queries
        .iter()
        .map(|a| {
            let t: f64 = a.query["gt:".len()..].parse().expect("formatted by Query");
            let p = posterior_tail_query(&post, t);
            ExactQuery {
                query: a.query.clone(),
                probability: p,
                deviation: (a.probability - p).abs(),
            }
        })
        .collect();
    Ok(ExactBlock {
        mean: post.mean(),
        variance: post.variance(),
        mean_deviation: (summary.mean - post.mean()).abs(),
        variance_deviation: (summary.variance - post.variance()).abs(),
        density_sup_deviation,
        density_window: DENSITY_WINDOW,
        queries,
    })
}

/// `max |density − exact.pdf(midpoint)|` over bounded cells whose midpoint
/// lies in `window`.
pub fn density_sup_deviation(cells: &[CellRow], exact: &Measure1D, window: (f64, f64)) -> f64 {
    cells
        .iter()
        .filter_map(|c| {
            let mid = 0.5 * (c.left? + c.right?);
            let density = c.density?;
            (mid >= window.0 && mid <= window.1).then(|| (density - exact.pdf(mid)).abs())
        })
        .fold(0.0, f64::max)
}

fn edge(v: Option<f64>, infinity: &str) -> String {
    v.map_or_else(|| infinity.to_string(), |x| x.to_string())
}

pub fn to_csv(report: &PosteriorReport) -> String {
    let mut out = String::from("index,left,right,mass,density\n");
    for c in &report.cells {
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            c.index,
            edge(c.left, "-inf"),
            edge(c.right, "inf"),
            c.mass,
            c.density.map(|d| d.to_string()).unwrap_or_default()
        );
    }
    out.push_str("\nquantity,approximate,exact,deviation\n");
    let ex = report.exact.as_ref();
    let _ = writeln!(
        out,
        "mean,{},{},{}",
        report.summary.mean,
        ex.map(|e| e.mean.to_string()).unwrap_or_default(),
        ex.map(|e| e.mean_deviation.to_string()).unwrap_or_default()
    );
    let _ = writeln!(
        out,
        "variance,{},{},{}",
        report.summary.variance,
        ex.map(|e| e.variance.to_string()).unwrap_or_default(),
        ex.map(|e| e.variance_deviation.to_string()).unwrap_or_default()
    );
    for (i, a) in report.summary.queries.iter().enumerate() {
        let e = ex.map(|e| &e.queries[i]);
        let _ = writeln!(
            out,
            "{},{},{},{}",
            a.query,
            a.probability,
            e.map(|e| e.probability.to_string()).unwrap_or_default(),
            e.map(|e| e.deviation.to_string()).unwrap_or_default()
        );
    }
    if let Some(e) = ex {
        let _ = writeln!(out, "density_sup_deviation,,,{}", e.density_sup_deviation);
    }
    out
}

/// Writes `script` and a data file with the bounded cells beside it.
pub fn emit_plot(report: &PosteriorReport, script: &Path) -> std::io::Result<PathBuf> {
    let data = script.with_extension("dat");
    let mut rows = String::from("# left right density\n");
    for c in &report.cells {
        if let (Some(l), Some(r), Some(d)) = (c.left, c.right, c.density) {
            let _ = writeln!(rows, "{l} {r} {d}");
        }
    }
    std::fs::write(&data, rows)?;
    let data_name = data.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
    let mut gp = String::new();
    let _ = writeln!(gp, "# approximate posterior, {} prior {} obs {}", report.scheme, report.prior, report.obs);
    let _ = writeln!(gp, "set title '{} posterior given y = {}'", report.scheme, report.obs);
    let _ = writeln!(gp, "set xlabel 'x'\nset ylabel 'density'\nset xrange [-3:3]");
    let _ = writeln!(gp, "set style fill transparent solid 0.4");
    let mut plot = format!("plot '{data_name}' using (($1+$2)/2):3:($2-$1) with boxes title 'approximate'");
    if let Some(e) = &report.exact {
        let _ = writeln!(gp, "m = {}\nv = {}", e.mean, e.variance);
        let _ = writeln!(gp, "exact(x) = exp(-(x-m)**2/(2*v))/sqrt(2*pi*v)");
        plot.push_str(", exact(x) with lines lw 2 title 'exact'");
    }
    let _ = writeln!(gp, "{plot}\npause -1");
    std::fs::write(script, gp)?;
    Ok(data)
}

pub fn run(args: &BayesArgs) -> CliResult<String> {
    let report = posterior_report(args)?;
    if let Some(path) = &args.emit_plot {
        emit_plot(&report, path)
            .map_err(|e| CliError::Usage(format!("error: cannot write {}: {e}", path.display())))?;
    }
    Ok(match args.format {
        Format::Json => {
            let mut s = serde_json::to_string_pretty(&report).expect("report serializes");
            s.push('\n');
            s
        }
        Format::Csv => to_csv(&report),
    })
}
