use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use interlab::analysis::{self, AnalysisConfig, CiMethod};
use interlab::io;
use interlab::report::{self, Format, Table};
use interlab::simulation::{self, Grid, Scenario, Selection};
use interlab::{BootMethod, Error, Flavor, Result, Scheme};

#[derive(Parser)]
#[command(name = "interlab", version, about = "Precision analysis for interlaboratory studies")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Variance components, bootstrap estimators and intervals for one dataset.
    Analyze(AnalyzeArgs),
    /// Monte Carlo bias, SE and coverage study.
    Simulate(SimulateArgs),
}

#[derive(Args)]
struct Common {
    /// Comma-separated schemes (boot-i, boot-j_s, boot-j_r, boot-ij_r, boot-ij_s) or `all`.
    #[arg(long, default_value = "all")]
    schemes: String,
    /// Comma-separated estimator flavors (mean, cor, ad) or `all`.
    #[arg(long, default_value = "all")]
    flavors: String,
    /// Comma-separated interval methods (chi2, moriguchi, satterthwaite, N, P, B, approx, boot) or `all`.
    #[arg(long = "ci-methods", default_value = "all")]
    ci_methods: String,
    /// Output format: csv, markdown or json.
    #[arg(long, default_value = "csv")]
    format: String,
    /// Write output here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct AnalyzeArgs {
    /// CSV file (long format `lab,replicate,value` unless --wide).
    #[arg(long)]
    input: PathBuf,
    /// Input is `lab,rep1,...,repN`.
    #[arg(long)]
    wide: bool,
    #[arg(long, default_value_t = 0.05)]
    alpha: f64,
    /// Bootstrap replicates per scheme.
    #[arg(long, default_value_t = 1000)]
    boot: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Multiplies every reported variance (e.g. 1e7).
    #[arg(long, default_value_t = 1.0)]
    scale: f64,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct SimulateArgs {
    /// Named grid: `full` (64 cells) or `quick`. Ignored with --input.
    #[arg(long, default_value = "quick")]
    grid: String,
    /// Scenario grid CSV (mu,sigma_r2,ratio,k,n,m_boot,r_mc,alpha,seed).
    #[arg(long)]
    input: Option<PathBuf>,
    /// Master seed for named grids.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Override M for every scenario.
    #[arg(long)]
    boot: Option<usize>,
    /// Override the Monte Carlo replication count.
    #[arg(long)]
    reps: Option<usize>,
    /// Override alpha for every scenario.
    #[arg(long)]
    alpha: Option<f64>,
    /// Keep only cells matching `k,n,ratio` (repeatable).
    #[arg(long)]
    cell: Vec<String>,
    #[command(flatten)]
    common: Common,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Analyze(a) => analyze(a),
        Command::Simulate(s) => simulate(s),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

type Selections = (Vec<Scheme>, Vec<Flavor>, Vec<CiMethod>, Format);

fn selections(c: &Common) -> Result<Selections> {
    Ok((
        analysis::parse_list(&c.schemes, &Scheme::ALL)?,
        analysis::parse_list(
            &c.flavors,
            &[Flavor::RawMean, Flavor::BiasCorrected, Flavor::Adjusted],
        )?,
        CiMethod::parse_list(&c.ci_methods)?,
        c.format.parse()?,
    ))
}

fn emit(tables: &[Table], format: Format, out: Option<&PathBuf>) -> Result<()> {
    let text = report::render(tables, format);
    match out {
        Some(path) => fs::write(path, text).map_err(|source| Error::Io {
            path: path.display().to_string(),
            source,
        }),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn analyze(args: AnalyzeArgs) -> Result<ExitCode> {
    let (schemes, flavors, ci_methods, format) = selections(&args.common)?;
    if !(args.scale.is_finite() && args.scale > 0.0) {
        return Err(Error::Config(format!("scale must be positive, got {}", args.scale)));
    }
    let dataset = if args.wide {
        io::ingest_wide(&args.input)?
    } else {
        io::ingest(&args.input)?
    };
    let config = AnalysisConfig {
        alpha: args.alpha,
        m_boot: args.boot,
        schemes,
        flavors: flavors.clone(),
        ci_methods: ci_methods.clone(),
        seed: args.seed,
    };
    let result = analysis::analyze(&dataset, &config)?;
    for w in &result.warnings {
        eprintln!("warning: {w}");
    }
    let tables = [
        report::point_estimate_table(&result, &flavors, args.scale),
        report::interval_table(&result, &ci_methods, args.scale),
    ];
    emit(&tables, format, args.common.out.as_ref())?;
    Ok(ExitCode::SUCCESS)
}

fn parse_cell(s: &str) -> Result<(usize, usize, f64)> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    let bad = || Error::Config(format!("--cell expects k,n,ratio, got `{s}`"));
    if parts.len() != 3 {
        return Err(bad());
    }
    Ok((
        parts[0].parse().map_err(|_| bad())?,
        parts[1].parse().map_err(|_| bad())?,
        parts[2].parse().map_err(|_| bad())?,
    ))
}

fn simulate(args: SimulateArgs) -> Result<ExitCode> {
    let (schemes, flavors, ci_methods, format) = selections(&args.common)?;
    let mut scenarios: Vec<Scenario> = match &args.input {
        Some(path) => io::read_scenarios_file(path)?,
        None => simulation::grid(args.grid.parse::<Grid>()?, args.seed),
    };
    let cells = args.cell.iter().map(|c| parse_cell(c)).collect::<Result<Vec<_>>>()?;
    if !cells.is_empty() {
        scenarios.retain(|s| cells.iter().any(|&(k, n, r)| s.k == k && s.n == n && s.ratio == r));
    }
    for s in &mut scenarios {
        if let Some(m) = args.boot {
            s.m_boot = m;
        }
        if let Some(r) = args.reps {
            s.r_mc = r;
        }
        if let Some(a) = args.alpha {
            s.alpha = a;
        }
    }
    if scenarios.is_empty() {
        return Err(Error::Config("no scenarios to run".into()));
    }
    let boot_methods: Vec<BootMethod> = ci_methods
        .iter()
        .filter_map(|m| match m {
            CiMethod::Boot(b) => Some(*b),
            _ => None,
        })
        .collect();
    let selection = Selection {
        anova: true,
        approx_intervals: ci_methods.iter().any(|m| !matches!(m, CiMethod::Boot(_))),
        schemes,
        flavors,
        boot_methods,
    };

    let mut tables = Vec::new();
    let mut failed = 0;
    for (scenario, result) in scenarios.iter().zip(simulation::run_study(&scenarios, &selection)) {
        match result {
            Ok(summary) => {
                let d = summary.diagnostics;
                if d.failed_intervals + d.flagged_intervals + d.clamped_se > 0 {
                    eprintln!(
                        "warning: {}: {} intervals not formed, {} flagged, {} clamped SE radicands",
                        scenario.label(),
                        d.failed_intervals,
                        d.flagged_intervals,
                        d.clamped_se
                    );
                }
                tables.extend(report::scenario_tables(&summary));
            }
            Err(e) => {
                failed += 1;
                eprintln!("error: scenario {} aborted: {e}", scenario.label());
            }
        }
    }
    emit(&tables, format, args.common.out.as_ref())?;
    Ok(if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(2)
    })
}
