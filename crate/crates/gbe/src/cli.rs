//! Command-line interface.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use gbe_core::cdf::{scaled_cutoff, CdfRequest, Method};
use gbe_core::painleve::{solve_hm_with, tw_cdf, HMSolution, HmOptions};
use gbe_core::{Beta, Cutoff, PrecisionContext, Real};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::ecdf::{ks_critical, tw_clamped, EmpiricalCdf, TabulatedCdf};
use crate::ensemble::{edge_scaled, sample_largest, EnsembleSpec};
use crate::error::{Error, Result};
use crate::table::{emit, format_f64, lines, Cell, Format, Grid, Table};
use crate::verify::run_all;

pub const BITS_ENV: &str = "GBE_BITS";

fn parse_beta(s: &str) -> std::result::Result<Beta, String> {
    let v: u32 = s.parse().map_err(|_| format!("`{s}` is not 1, 2 or 4"))?;
    Beta::try_from(v).map_err(|e| e.to_string())
}

fn parse_grid(s: &str) -> std::result::Result<Grid, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_size(s: &str) -> std::result::Result<usize, String> {
    match s.trim().parse::<usize>() {
        Ok(n) if n > 0 => Ok(n),
        _ => Err(format!("`{s}` is not a positive size")),
    }
}

fn parse_bits(s: &str) -> std::result::Result<usize, String> {
    let b: usize = s.parse().map_err(|_| format!("`{s}` is not a bit count"))?;
    if !(64..=1 << 20).contains(&b) {
        return Err("precision must be between 64 and 2^20 bits".into());
    }
    Ok(b)
}

#[derive(Parser, Debug)]
#[command(name = "gbe", version, about = "Largest-eigenvalue distributions of Gaussian random matrix ensembles")]
pub struct RunConfig {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Exact finite-N CDF F(y) of the largest eigenvalue.
    Cdf(CdfArgs),
    /// Tracy-Widom distributions F1, F2, F4.
    Tw(TwArgs),
    /// Largest eigenvalues of sampled matrices, one per line.
    Sample(SampleArgs),
    /// Run the invariant suites; nonzero exit on any failure.
    Verify(VerifyArgs),
    /// Finite-N CDF at edge-scaled cutoffs against the Tracy-Widom limit.
    Converge(ConvergeArgs),
}

#[derive(Args, Debug)]
pub struct Output {
    /// Output file (stdout when omitted).
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
}

#[derive(Args, Debug)]
pub struct Precision {
    /// Working precision in bits.
    #[arg(long, env = BITS_ENV, default_value_t = 256, value_parser = parse_bits)]
    pub bits: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum MethodArg {
    Direct,
    Expansion,
}

#[derive(Args, Debug)]
pub struct CdfArgs {
    #[arg(long, value_parser = parse_beta)]
    pub beta: Beta,
    #[arg(long)]
    pub n: usize,
    /// Single cutoff; `inf` is accepted.
    #[arg(long, allow_hyphen_values = true, conflicts_with = "y_grid", required_unless_present = "y_grid")]
    pub y: Option<String>,
    /// Cutoff grid start:stop:step.
    #[arg(long, allow_hyphen_values = true, value_parser = parse_grid)]
    pub y_grid: Option<Grid>,
    #[arg(long, value_enum, default_value_t = MethodArg::Direct)]
    pub method: MethodArg,
    /// Print F with this many significant digits from the high-precision value.
    #[arg(long)]
    pub digits: Option<usize>,
    #[command(flatten)]
    pub precision: Precision,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Args, Debug)]
pub struct TwArgs {
    #[arg(long, allow_hyphen_values = true, value_parser = parse_grid)]
    pub s_grid: Grid,
    /// Left end of the Painleve grid.
    #[arg(long, allow_hyphen_values = true, default_value_t = gbe_core::painleve::DEFAULT_X_MIN)]
    pub x_min: f64,
    /// Right end of the Painleve grid.
    #[arg(long, default_value_t = gbe_core::painleve::DEFAULT_X_MAX)]
    pub x_max: f64,
    #[command(flatten)]
    pub precision: Precision,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Compare {
    /// Exact finite-N CDF.
    Exact,
    /// Tracy-Widom limit after edge scaling.
    Tw,
}

#[derive(Args, Debug)]
pub struct SampleArgs {
    #[arg(long, value_parser = parse_beta)]
    pub beta: Beta,
    #[arg(long)]
    pub n: usize,
    #[arg(long)]
    pub count: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Write edge-scaled values s instead of eigenvalues.
    #[arg(long)]
    pub scaled: bool,
    /// Summary JSON (count, seed, statistics, KS results).
    #[arg(long)]
    pub summary: Option<PathBuf>,
    /// Reference CDF for the KS distance in the summary.
    #[arg(long, value_enum)]
    pub compare: Option<Compare>,
    #[command(flatten)]
    pub precision: Precision,
    /// Sample file (stdout when omitted).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct VerifyArgs {
    #[arg(long, env = BITS_ENV, default_value_t = 192, value_parser = parse_bits)]
    pub bits: usize,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Args, Debug)]
pub struct ConvergeArgs {
    #[arg(long, value_parser = parse_beta)]
    pub beta: Beta,
    /// Comma-separated sizes, e.g. 2,4,8,16.
    #[arg(long, value_delimiter = ',', required = true, value_parser = parse_size)]
    pub n_list: Vec<usize>,
    #[arg(long, allow_hyphen_values = true, conflicts_with = "s_grid", required_unless_present = "s_grid")]
    pub s: Option<f64>,
    #[arg(long, allow_hyphen_values = true, value_parser = parse_grid)]
    pub s_grid: Option<Grid>,
    #[command(flatten)]
    pub precision: Precision,
    #[command(flatten)]
    pub output: Output,
}

fn parse_cutoff(text: &str, bits: usize) -> Result<Cutoff> {
    match text.trim().to_ascii_lowercase().as_str() {
        "inf" | "+inf" | "infinity" | "+infinity" => Ok(Cutoff::PosInf),
        t => Real::parse(t, bits)
            .map(Cutoff::Finite)
            .ok_or_else(|| Error::Usage(format!("cannot read cutoff `{text}`"))),
    }
}

/// Decimal value of a grid point at full precision (so `0.1` means 1/10).
fn exact_point(x: f64, bits: usize) -> Real {
    Real::parse(&format_f64(x), bits).unwrap_or_else(|| Real::from_f64(x, bits))
}

pub fn cmd_cdf(args: &CdfArgs) -> Result<Table> {
    let bits = args.precision.bits;
    let ctx = PrecisionContext::new(bits)?;
    let points: Vec<(Cell, Cutoff)> = match (&args.y, &args.y_grid) {
        (Some(y), _) => {
            let c = parse_cutoff(y, bits)?;
            let label = if c.is_infinite() { Cell::Text("inf".into()) } else { Cell::Num(c.to_f64()) };
            vec![(label, c)]
        }
        (None, Some(g)) => g.points().into_iter().map(|y| (Cell::Num(y), Cutoff::Finite(exact_point(y, bits)))).collect(),
        (None, None) => return Err(Error::Usage("one of --y or --y-grid is required".into())),
    };
    let method = match args.method {
        MethodArg::Direct => Method::DirectPfaffian,
        MethodArg::Expansion => Method::Expansion,
    };
    CdfRequest { beta: args.beta, n: args.n, y: Cutoff::PosInf, method }.validate()?;
    let values: Vec<Result<Real>> = points
        .par_iter()
        .map(|(_, y)| CdfRequest { beta: args.beta, n: args.n, y: y.clone(), method }.evaluate(&ctx).map_err(Error::from))
        .collect();
    let mut table = Table::new(&["y", "F"]);
    for ((label, _), v) in points.into_iter().zip(values) {
        let v = v?;
        let f = match args.digits {
            Some(d) => Cell::Text(v.to_sci_string(d.max(1))),
            None => Cell::Num(v.to_f64()),
        };
        table.push(vec![label, f]);
    }
    Ok(table)
}

fn hm_solution(x_min: f64, x_max: f64, bits: usize) -> Result<HMSolution> {
    let ctx = PrecisionContext::new(bits)?;
    Ok(solve_hm_with(x_min, x_max, HmOptions::default(), &ctx)?)
}

pub fn cmd_tw(args: &TwArgs) -> Result<Table> {
    let sol = hm_solution(args.x_min, args.x_max, args.precision.bits)?;
    let mut table = Table::new(&["s", "F1", "F2", "F4"]);
    for s in args.s_grid.points() {
        let mut row = vec![Cell::Num(s)];
        for beta in [Beta::Orthogonal, Beta::Unitary, Beta::Symplectic] {
            row.push(Cell::Num(tw_cdf(beta, s, &sol)?));
        }
        table.push(row);
    }
    Ok(table)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KsReport {
    pub reference: Compare,
    pub distance: f64,
    /// Asymptotic 1% critical value 1.63/√count.
    pub critical_99: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SampleSummary {
    #[serde(flatten)]
    pub spec: EnsembleSpec,
    pub scaled: bool,
    pub mean: f64,
    pub std_dev: f64,
    pub min: f64,
    pub max: f64,
    pub ks: Option<KsReport>,
}

/// KS distance of largest-eigenvalue samples from a reference CDF.
pub fn ks_against(
    beta: Beta,
    n: usize,
    eigenvalues: &[f64],
    reference: Compare,
    ctx: &PrecisionContext,
) -> Result<f64> {
    match reference {
        Compare::Exact => {
            let ecdf = EmpiricalCdf::new(eigenvalues)?;
            let s = ecdf.samples();
            let step = 0.005;
            let table = TabulatedCdf::finite_n(beta, n, s[0] - step, s[s.len() - 1] + step, step, ctx)?;
            Ok(ecdf.ks_distance(|x| table.eval(x)))
        }
        Compare::Tw => {
            let scaled: Vec<f64> = eigenvalues.iter().map(|&l| edge_scaled(beta, n, l)).collect();
            let sol = hm_solution(gbe_core::painleve::DEFAULT_X_MIN, gbe_core::painleve::DEFAULT_X_MAX, ctx.bits())?;
            Ok(EmpiricalCdf::new(&scaled)?.ks_distance(|s| tw_clamped(beta, s, &sol)))
        }
    }
}

pub fn cmd_sample(args: &SampleArgs) -> Result<(Vec<f64>, SampleSummary)> {
    let spec = EnsembleSpec::new(args.beta, args.n, args.seed, args.count)?;
    let eig = sample_largest(&spec)?;
    let values: Vec<f64> =
        if args.scaled { eig.iter().map(|&l| edge_scaled(args.beta, args.n, l)).collect() } else { eig.clone() };
    let count = values.len() as f64;
    let mean = values.iter().sum::<f64>() / count;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (count - 1.0).max(1.0);
    let ks = match args.compare {
        None => None,
        Some(reference) => {
            let ctx = PrecisionContext::new(args.precision.bits)?;
            let distance = ks_against(args.beta, args.n, &eig, reference, &ctx)?;
            Some(KsReport { reference, distance, critical_99: ks_critical(values.len(), 1.63) })
        }
    };
    let summary = SampleSummary {
        spec,
        scaled: args.scaled,
        mean,
        std_dev: var.sqrt(),
        min: values.iter().copied().fold(f64::INFINITY, f64::min),
        max: values.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        ks,
    };
    Ok((values, summary))
}

pub fn cmd_verify(args: &VerifyArgs) -> Result<(Table, bool)> {
    let checks = run_all(args.bits)?;
    let mut table = Table::new(&["check", "status", "detail"]);
    let mut ok = true;
    for c in checks {
        ok &= c.passed;
        let status = if c.passed { "pass" } else { "FAIL" };
        table.push(vec![Cell::Text(c.name), Cell::Text(status.into()), Cell::Text(c.detail.replace(',', ";"))]);
    }
    Ok((table, ok))
}

pub fn cmd_converge(args: &ConvergeArgs) -> Result<Table> {
    let bits = args.precision.bits;
    let ctx = PrecisionContext::new(bits)?;
    for &n in &args.n_list {
        CdfRequest::new(args.beta, n, Cutoff::PosInf).validate()?;
    }
    let sol = hm_solution(gbe_core::painleve::DEFAULT_X_MIN, gbe_core::painleve::DEFAULT_X_MAX, bits)?;
    let ss = match (args.s, &args.s_grid) {
        (Some(s), _) => vec![s],
        (None, Some(g)) => g.points(),
        (None, None) => return Err(Error::Usage("one of --s or --s-grid is required".into())),
    };
    let jobs: Vec<(usize, f64)> = args.n_list.iter().flat_map(|&n| ss.iter().map(move |&s| (n, s))).collect();
    let rows: Vec<Result<Vec<Cell>>> = jobs
        .par_iter()
        .map(|&(n, s)| {
            let y = scaled_cutoff(args.beta, n, &exact_point(s, bits), &ctx);
            let f = CdfRequest::new(args.beta, n, Cutoff::Finite(y)).evaluate(&ctx)?.to_f64();
            let tw = tw_cdf(args.beta, s, &sol)?;
            Ok(vec![Cell::from(n), Cell::Num(s), Cell::Num(f), Cell::Num(tw), Cell::Num(f - tw)])
        })
        .collect();
    let mut table = Table::new(&["N", "s", "F_N", "TW", "difference"]);
    for r in rows {
        table.push(r?);
    }
    Ok(table)
}

/// Parses `argv`, runs the command and writes its output.
pub fn run(config: RunConfig) -> Result<()> {
    match &config.command {
        Command::Cdf(a) => emit(&cmd_cdf(a)?.render(a.output.format)?, a.output.out.as_deref()),
        Command::Tw(a) => emit(&cmd_tw(a)?.render(a.output.format)?, a.output.out.as_deref()),
        Command::Converge(a) => emit(&cmd_converge(a)?.render(a.output.format)?, a.output.out.as_deref()),
        Command::Sample(a) => {
            let (values, summary) = cmd_sample(a)?;
            emit(&lines(&values), a.out.as_deref())?;
            if let Some(path) = &a.summary {
                let mut text = serde_json::to_string_pretty(&summary)?;
                text.push('\n');
                emit(&text, Some(path))?;
            }
            Ok(())
        }
        Command::Verify(a) => {
            let (table, ok) = cmd_verify(a)?;
            emit(&table.render(a.output.format)?, a.output.out.as_deref())?;
            if ok {
                Ok(())
            } else {
                Err(Error::CheckFailed("one or more invariant suites failed".into()))
            }
        }
    }
}
