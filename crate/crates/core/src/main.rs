//! `irflab` command line: estimate, simulate, montecarlo, theory.
//!
//! Exit codes: 0 success, 2 usage or input error, 3 numerical failure.

use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use irflab::estimator::{disagreement, EstimateConfig};
use irflab::mc::{config_hash, header_line, sweep, ExperimentConfig};
use irflab::theory::{bound_grid, coverage_grid, linspace, prob_outside_grid};
use irflab::{run_experiment, simulate, Dataset, DgpSpec, Error};

#[derive(Parser)]
#[command(name = "irflab", version = irflab::mc::VERSION, about = "LP and VAR impulse responses, bootstrap intervals, Monte Carlo")]
struct Cli {
    /// Print progress and diagnostics to stderr.
    #[arg(long, short, global = true)]
    verbose: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Estimate impulse responses on a CSV dataset.
    Estimate {
        /// Dataset CSV (header row; optional leading `date` column).
        #[arg(long)]
        data: PathBuf,
        /// Estimator batch JSON: `{"horizon": H, "estimators": [...]}`.
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Overrides bootstrap seeds.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Simulate a dataset from a DGP spec.
    Simulate {
        /// DGP JSON.
        #[arg(long)]
        config: PathBuf,
        /// Sample length.
        #[arg(long = "T", alias = "periods")]
        t: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Output directory; writes `data.csv`.
        #[arg(long)]
        out: PathBuf,
    },
    /// Run a Monte Carlo experiment, or a sweep over labelled experiments.
    Montecarlo {
        /// Experiment JSON.
        #[arg(long, required_unless_present = "group", conflicts_with = "group")]
        config: Option<PathBuf>,
        /// Sweep member as `label=path`; repeat for each group.
        #[arg(long)]
        group: Vec<String>,
        #[arg(long)]
        out: PathBuf,
        /// Overrides `base_seed`.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, env = "IRFLAB_WORKERS")]
        workers: Option<usize>,
    },
    /// Export closed-form curves as CSV.
    Theory(TheoryArgs),
}

#[derive(Args)]
struct TheoryArgs {
    /// Coverage of VAR intervals against the bias ratio.
    #[arg(long)]
    coverage: bool,
    /// Largest bias ratio of the coverage grid.
    #[arg(long, default_value_t = 4.0)]
    bias_max: f64,
    /// Number of bias-ratio intervals.
    #[arg(long, default_value_t = 80)]
    steps: usize,
    /// Worst-case relative bias bound.
    #[arg(long)]
    bias_bound: bool,
    /// Probability that the VAR estimate falls outside the LP interval.
    #[arg(long)]
    prob_outside: bool,
    #[arg(long, value_delimiter = ',', default_values_t = [0.68, 0.90, 0.95])]
    levels: Vec<f64>,
    #[arg(long = "sqrtTM", value_delimiter = ',', default_values_t = [1.0])]
    sqrt_tm: Vec<f64>,
    #[arg(long, value_delimiter = ',', default_values_t = [0.4])]
    se_ratio: Vec<f64>,
    /// Levels for `--prob-outside`.
    #[arg(long, value_delimiter = ',', default_values_t = [0.90])]
    level: Vec<f64>,
    /// Output directory; CSV goes to stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command, cli.verbose) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let (code, kind) = if e.is_input_error() { (2, "input") } else { (3, "numeric") };
            eprintln!("error[{kind}]: {}", e.to_string().replace('\n', " "));
            ExitCode::from(code)
        }
    }
}

fn read(path: &Path) -> irflab::Result<String> {
    fs::read_to_string(path).map_err(|e| Error::Input(format!("cannot read {}: {e}", path.display())))
}

fn create(dir: &Path, name: &str) -> irflab::Result<BufWriter<File>> {
    fs::create_dir_all(dir).map_err(|e| Error::Input(format!("cannot create {}: {e}", dir.display())))?;
    let path = dir.join(name);
    let file = File::create(&path).map_err(|e| Error::Input(format!("cannot write {}: {e}", path.display())))?;
    Ok(BufWriter::new(file))
}

fn run(command: Command, verbose: bool) -> irflab::Result<()> {
    match command {
        Command::Estimate { data, config, out, seed } => {
            let text = read(&config)?;
            let cfg = EstimateConfig::from_json(&text)?;
            let dataset = Dataset::from_csv_path(&data)?;
            let mut bytes = text.into_bytes();
            bytes.extend(seed.map_or(String::new(), |s| format!("seed={s}")).bytes());
            let header = header_line(&config_hash(&bytes));
            let results = cfg.run(&dataset, seed)?;
            for (name, irf) in &results {
                if verbose {
                    for note in &irf.notes {
                        eprintln!("{name}: {note}");
                    }
                }
                let mut w = create(&out, &format!("irf_{name}.csv"))?;
                irf.write_csv(&mut w, Some(&header))?;
                w.flush()?;
            }
            let rows = disagreement(&cfg.estimators, &results);
            if !rows.is_empty() {
                let mut w = create(&out, "disagreement.csv")?;
                writeln!(w, "# {header}")?;
                let mut csv = csv::Writer::from_writer(w);
                for row in &rows {
                    csv.serialize(row)?;
                }
                csv.flush()?;
            }
            Ok(())
        }
        Command::Simulate { config, t, seed, out } => {
            let text = read(&config)?;
            let spec: DgpSpec = serde_json::from_str(&text)?;
            let data = simulate(&spec, t, seed)?;
            let mut bytes = text.into_bytes();
            bytes.extend(format!("T={t} seed={seed}").bytes());
            let mut w = create(&out, "data.csv")?;
            data.write_csv(&mut w, Some(&header_line(&config_hash(&bytes))))?;
            w.flush()?;
            Ok(())
        }
        Command::Montecarlo { config, group, out, seed, workers } => {
            let load = |path: &Path| -> irflab::Result<ExperimentConfig> {
                let mut cfg: ExperimentConfig = serde_json::from_str(&read(path)?)?;
                if let Some(s) = seed {
                    cfg.base_seed = s;
                }
                if workers.is_some() {
                    cfg.workers = workers;
                }
                cfg.validate()?;
                Ok(cfg)
            };
            if let Some(path) = config {
                let cfg = load(&path)?;
                if verbose {
                    eprintln!("running {} replications of {} estimators", cfg.reps, cfg.estimators.len());
                }
                let report = run_experiment(&cfg)?;
                if verbose {
                    for f in &report.failures {
                        eprintln!("{}: {} failed replications", f.estimator, f.failures);
                    }
                }
                let mut w = create(&out, "report.csv")?;
                report.write_tidy_csv(&mut w)?;
                w.flush()?;
                let mut w = create(&out, "estimates.csv")?;
                report.write_estimates_csv(&mut w)?;
                w.flush()?;
                let mut w = create(&out, "summary.json")?;
                report.write_summary_json(&mut w)?;
                w.flush()?;
            } else {
                let groups = group
                    .iter()
                    .map(|g| {
                        let (label, path) = g
                            .split_once('=')
                            .ok_or_else(|| Error::Input(format!("--group expects label=path, got '{g}'")))?;
                        Ok((label.to_string(), load(Path::new(path))?))
                    })
                    .collect::<irflab::Result<Vec<_>>>()?;
                let report = sweep(&groups)?;
                let mut w = create(&out, "report.csv")?;
                report.write_tidy_csv(&mut w)?;
                w.flush()?;
                let mut w = create(&out, "summary.json")?;
                serde_json::to_writer_pretty(&mut w, &report)?;
                w.flush()?;
            }
            Ok(())
        }
        Command::Theory(args) => theory(args),
    }
}

fn theory(args: TheoryArgs) -> irflab::Result<()> {
    if !(args.coverage || args.bias_bound || args.prob_outside) {
        return Err(Error::Input("choose at least one of --coverage, --bias-bound, --prob-outside".into()));
    }
    let signature = format!(
        "coverage={} bias_max={} steps={} levels={:?} bias_bound={} prob_outside={} sqrtTM={:?} se_ratio={:?} level={:?}",
        args.coverage, args.bias_max, args.steps, args.levels, args.bias_bound, args.prob_outside, args.sqrt_tm, args.se_ratio, args.level
    );
    let header = header_line(&config_hash(signature.as_bytes()));
    let mut tables: Vec<(&str, Vec<u8>)> = Vec::new();
    if args.coverage {
        let rows = coverage_grid(&linspace(0.0, args.bias_max, args.steps), &args.levels)?;
        tables.push(("coverage.csv", to_csv(&header, &rows)?));
    }
    if args.bias_bound {
        tables.push(("bias_bound.csv", to_csv(&header, &bound_grid(&args.sqrt_tm, &args.se_ratio)?)?));
    }
    if args.prob_outside {
        let rows = prob_outside_grid(&args.sqrt_tm, &args.se_ratio, &args.level)?;
        tables.push(("prob_outside.csv", to_csv(&header, &rows)?));
    }
    match &args.out {
        Some(dir) => {
            for (name, bytes) in tables {
                let mut w = create(dir, name)?;
                w.write_all(&bytes)?;
                w.flush()?;
            }
        }
        None => {
            let mut stdout = io::stdout().lock();
            for (_, bytes) in tables {
                stdout.write_all(&bytes)?;
            }
        }
    }
    Ok(())
}

fn to_csv<T: serde::Serialize>(header: &str, rows: &[T]) -> irflab::Result<Vec<u8>> {
    let mut buf = format!("# {header}\n").into_bytes();
    {
        let mut csv = csv::Writer::from_writer(&mut buf);
        for row in rows {
            csv.serialize(row)?;
        }
        csv.flush()?;
    }
    Ok(buf)
}
