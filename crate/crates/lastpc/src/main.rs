use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use lastpc::datagen::{self, SynthSpec};
use lastpc::error::{Error, Result};
use lastpc::gridded::{read_stack, write_stack};
use lastpc::numeric::MatrixKind;
use lastpc::pipeline::{self, GriddedOptions, TabularOptions};
use lastpc::report::{DiscoveryReport, PlotKind};
use lastpc::table::DataTable;

/// Discover near-constant linear combinations in data via the smallest
/// principal components.
#[derive(Parser)]
#[command(name = "lastpc", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a discovery pipeline and write a structured report.
    Discover {
        #[command(subcommand)]
        source: DiscoverCommand,
    },
    /// Generate a seeded synthetic gridded stack on disk.
    GenStack(GenStackArgs),
    /// Bivariate PCA-lines demonstration on a seeded sample.
    Demo(DemoArgs),
    /// Re-derive one plot-data CSV from an existing report.
    EmitPlotdata(EmitArgs),
}

#[derive(Subcommand)]
enum DiscoverCommand {
    /// Cases-by-variables table from a CSV file or a built-in dataset.
    Tabular(TabularArgs),
    /// Gridded space-time stack directory.
    Gridded(GriddedArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum KindArg {
    Cov,
    Corr,
}

#[derive(Args)]
struct TabularArgs {
    /// CSV file: header row of variable names, optional "#scale:" line
    /// of per-column unit multipliers, then numeric rows (an optional
    /// leading non-numeric column is taken as case labels).
    #[arg(long, conflicts_with = "builtin")]
    input: Option<PathBuf>,
    /// Built-in dataset name (currently: solar).
    #[arg(long)]
    builtin: Option<String>,
    /// Convert to SI via the scale line and take natural logs first.
    #[arg(long)]
    log_si: bool,
    /// Moment matrix kind.
    #[arg(long, value_enum, default_value = "cov")]
    kind: KindArg,
    /// Quantile of the nonzero spectrum forming the candidate pool.
    #[arg(long, default_value_t = 0.25)]
    pool: f64,
    /// Force the integerization pivot target instead of searching 1..=6.
    #[arg(long)]
    pivot_target: Option<u32>,
    /// Report output path (stdout when omitted).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct GriddedArgs {
    /// Stack directory (meta.json plus one CSV per field).
    stack: PathBuf,
    /// Difference-filter lag in time steps (no filtering when omitted).
    #[arg(long)]
    lag: Option<usize>,
    /// Inclusive latitude band "min,max" to keep.
    #[arg(long, value_parser = parse_pair_f64)]
    crop: Option<(f64, f64)>,
    /// Quantile of the nonzero spectrum forming the candidate pool.
    #[arg(long, default_value_t = 0.25)]
    pool: f64,
    /// Comma-separated fields whose loading SD defines the law score.
    #[arg(long, value_delimiter = ',')]
    law_fields: Option<Vec<String>>,
    /// Field pair "x,y" for the per-grid-point beta map.
    #[arg(long, value_parser = parse_pair_str)]
    pair: Option<(String, String)>,
    /// Theoretical beta to t-test the valid map points against.
    #[arg(long)]
    beta0: Option<f64>,
    /// Histogram bin count override (Freedman-Diaconis when omitted).
    #[arg(long)]
    bins: Option<usize>,
    /// Report output path (stdout when omitted).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct GenStackArgs {
    /// Output directory for the stack.
    out: PathBuf,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, default_value_t = 8)]
    nlat: usize,
    #[arg(long, default_value_t = 24)]
    nlon: usize,
    #[arg(long, default_value_t = 120)]
    ntime: usize,
    /// True thickness-to-temperature slope; the hypsometric value when
    /// omitted.
    #[arg(long)]
    beta: Option<f64>,
    /// Noise SD as a fraction of beta.
    #[arg(long, default_value_t = 0.05)]
    noise: f64,
    /// Moving-average smoothing radius in grid cells.
    #[arg(long, default_value_t = 1)]
    smooth: usize,
    /// Add a 12-periodic seasonal component to every field.
    #[arg(long)]
    seasonal: bool,
    /// Use the 144 x 17 full-scale grid (overrides --nlat/--nlon).
    #[arg(long)]
    large: bool,
}

#[derive(Args)]
struct DemoArgs {
    #[arg(long, default_value_t = 7)]
    seed: u64,
    /// Report output path (stdout when omitted).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct EmitArgs {
    /// Existing report file.
    report: PathBuf,
    /// Which dataset: scree, loading-sd, beta-hist, or pca-lines.
    #[arg(long)]
    which: String,
    /// Directory to write the CSV into.
    #[arg(long, default_value = ".")]
    out_dir: PathBuf,
}

fn parse_pair_f64(s: &str) -> std::result::Result<(f64, f64), String> {
    let parts: Vec<&str> = s.split(',').collect();
    if parts.len() != 2 {
        return Err(format!("expected \"min,max\", got {s:?}"));
    }
    let a = parts[0].trim().parse::<f64>().map_err(|e| e.to_string())?;
    let b = parts[1].trim().parse::<f64>().map_err(|e| e.to_string())?;
    Ok((a, b))
}

fn parse_pair_str(s: &str) -> std::result::Result<(String, String), String> {
    let parts: Vec<&str> = s.split(',').collect();
    if parts.len() != 2 || parts[0].trim().is_empty() || parts[1].trim().is_empty() {
        return Err(format!("expected \"x,y\", got {s:?}"));
    }
    Ok((parts[0].trim().to_string(), parts[1].trim().to_string()))
}

/// CSV table reader. Header row names the variables; an optional
/// "#scale:" comment row carries per-column unit multipliers; a leading
/// non-numeric column holds case labels.
fn read_csv_table(path: &PathBuf) -> Result<DataTable> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::input(format!("cannot read {}: {e}", path.display())))?;
    let mut names: Option<Vec<String>> = None;
    let mut scales: Option<Vec<f64>> = None;
    let mut labels: Vec<String> = vec![];
    let mut labeled: Option<bool> = None;
    let mut values: Vec<f64> = vec![];
    let mut n_rows = 0usize;
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix("#scale:") {
            let parsed: std::result::Result<Vec<f64>, _> =
                rest.split(',').map(|f| f.trim().parse::<f64>()).collect();
            scales = Some(parsed.map_err(|e| {
                Error::input(format!("{}:{}: bad scale entry: {e}", path.display(), lineno + 1))
            })?);
            continue;
        }
        if line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split(',').map(|f| f.trim()).collect();
        match &names {
            None => names = Some(fields.iter().map(|s| s.to_string()).collect()),
            Some(names) => {
                let has_label = *labeled
                    .get_or_insert_with(|| fields.first().is_some_and(|f| f.parse::<f64>().is_err()));
                let expected = names.len() + has_label as usize;
                if fields.len() != expected {
                    return Err(Error::input(format!(
                        "{}:{}: expected {} fields, got {}",
                        path.display(),
                        lineno + 1,
                        expected,
                        fields.len()
                    )));
                }
                let data = if has_label {
                    labels.push(fields[0].to_string());
                    &fields[1..]
                } else {
                    &fields[..]
                };
                for f in data {
                    values.push(f.parse::<f64>().map_err(|e| {
                        Error::input(format!(
                            "{}:{}: bad numeric field {f:?}: {e}",
                            path.display(),
                            lineno + 1
                        ))
                    })?);
                }
                n_rows += 1;
            }
        }
    }
    let names = names.ok_or_else(|| Error::input(format!("{}: empty table", path.display())))?;
    if n_rows == 0 {
        return Err(Error::input(format!("{}: no data rows", path.display())));
    }
    let scales = scales.unwrap_or_else(|| vec![1.0; names.len()]);
    if scales.len() != names.len() {
        return Err(Error::input(format!(
            "{}: scale line has {} entries for {} variables",
            path.display(),
            scales.len(),
            names.len()
        )));
    }
    let table = DataTable::new(names, scales, values, n_rows)?;
    Ok(if labels.is_empty() { table } else { table.with_case_labels(labels) })
}

fn write_report(report: &DiscoveryReport, out: &Option<PathBuf>) -> Result<()> {
    let text = report.to_text();
    match out {
        Some(path) => std::fs::write(path, text)?,
        None => print!("{text}"),
    }
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Discover { source } => match source {
            DiscoverCommand::Tabular(args) => {
                let (table, input_name) = match (&args.input, &args.builtin) {
                    (Some(path), None) => (read_csv_table(path)?, path.display().to_string()),
                    (None, Some(name)) if name == "solar" => {
                        (datagen::solar_dataset(), "builtin:solar".to_string())
                    }
                    (None, Some(name)) => {
                        return Err(Error::input(format!("unknown builtin dataset {name:?}")))
                    }
                    _ => return Err(Error::input("give exactly one of --input or --builtin")),
                };
                let opts = TabularOptions {
                    log_si: args.log_si,
                    kind: match args.kind {
                        KindArg::Cov => MatrixKind::Covariance,
                        KindArg::Corr => MatrixKind::Correlation,
                    },
                    pool_quantile: args.pool,
                    pivot_target: args.pivot_target,
                    max_target: 6,
                };
                let meta = pipeline::meta(
                    "discover tabular",
                    &input_name,
                    None,
                    &[
                        ("log_si", args.log_si.to_string()),
                        ("kind", format!("{:?}", opts.kind).to_lowercase()),
                        ("pool", args.pool.to_string()),
                    ],
                );
                let report = pipeline::discover_tabular(&table, &opts, meta)?;
                write_report(&report, &args.out)
            }
            DiscoverCommand::Gridded(args) => {
                let stack = read_stack(&args.stack)?;
                let opts = GriddedOptions {
                    lag: args.lag,
                    crop: args.crop,
                    pool_quantile: args.pool,
                    law_fields: args.law_fields.clone(),
                    pair: args.pair.clone(),
                    theoretical_beta: args.beta0,
                    histogram_bins: args.bins,
                };
                let meta = pipeline::meta(
                    "discover gridded",
                    &args.stack.display().to_string(),
                    None,
                    &[
                        ("lag", format!("{:?}", args.lag)),
                        ("crop", format!("{:?}", args.crop)),
                        ("pool", args.pool.to_string()),
                    ],
                );
                let report = pipeline::discover_gridded(&stack, &opts, meta)?;
                write_report(&report, &args.out)
            }
        },
        Command::GenStack(args) => {
            let mut spec = SynthSpec {
                nlat: args.nlat,
                nlon: args.nlon,
                n_time: args.ntime,
                noise_sd_fraction: args.noise,
                smoothing_radius: args.smooth,
                seed: args.seed,
                seasonal: args.seasonal,
                ..SynthSpec::default()
            };
            if let Some(beta) = args.beta {
                spec.beta_true = beta;
            }
            if args.large {
                spec = spec.large_grid();
            }
            let stack = datagen::synth_hypsometric(&spec)?;
            write_stack(&stack, &args.out)?;
            println!(
                "wrote {} ({} fields, {} x {} grid, {} steps)",
                args.out.display(),
                stack.fields.len(),
                stack.nlon,
                stack.nlat,
                stack.n_time
            );
            Ok(())
        }
        Command::Demo(args) => {
            let meta = pipeline::meta("demo", "builtin:bivariate", Some(args.seed), &[]);
            let report = pipeline::demo_bivariate(args.seed, meta)?;
            write_report(&report, &args.out)
        }
        Command::EmitPlotdata(args) => {
            let text = std::fs::read_to_string(&args.report)
                .map_err(|e| Error::input(format!("cannot read {}: {e}", args.report.display())))?;
            let report = DiscoveryReport::from_text(&text)?;
            let kind: PlotKind = args.which.parse()?;
            let path = lastpc::report::emit_plot_data(&report, kind, &args.out_dir)?;
            println!("wrote {}", path.display());
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(err.exit_code() as u8)
        }
    }
}
