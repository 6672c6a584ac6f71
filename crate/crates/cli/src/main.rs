//! `radoboost` command-line tool.
//!
//! Exit codes: 0 success, 1 usage error, 2 data error, 3 numeric failure.

use std::fmt;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use radoboost::boost::{boost, BoostConfig, Selection, WeakLearnerMode};
use radoboost::error::ErrorCategory;
use radoboost::experiment::{run_experiment, write_results_csv, ExperimentConfig};
use radoboost::io::{ensure_writable, load_csv, read_model, read_rados, rado_meta_path, write_model, write_rados};
use radoboost::losses::{check_pair, GameKind};
use radoboost::privacy::{dp_protect, epsilon_a, DpParams};
use radoboost::rados::{generate, Generation};
use radoboost::regularizers::{parse_regularizer, RegularizerSpec};
use radoboost::Error;

#[derive(Debug, Parser)]
#[command(name = "radoboost", version, about = "Boosting from Rademacher observations")]
struct Cli {
    /// Overwrite existing output files.
    #[arg(long, global = true)]
    force: bool,

    /// Cap on worker threads; results do not depend on it.
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ModeArg {
    Plain,
    Classwise,
    Full,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum SelectArg {
    Last,
    Best,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum WlArg {
    First,
    Preference,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum PairArg {
    All,
    Log,
    Square,
    Relu,
    Unhinged,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate rados from a labeled CSV dataset.
    Gen {
        #[arg(long)]
        data: PathBuf,
        /// Number of rados (plain and classwise modes).
        #[arg(long)]
        n: Option<usize>,
        #[arg(long, value_enum, default_value = "plain")]
        mode: ModeArg,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value = "label")]
        label_column: String,
        #[arg(long)]
        positive_token: Option<String>,
    },
    /// Add Laplace noise to a rado file.
    Protect {
        #[arg(long)]
        rados: PathBuf,
        #[arg(long)]
        epsilon: f64,
        /// l1 diameter bound on edge vectors; defaults to the bound stored
        /// with the rados.
        #[arg(long = "r-e")]
        r_e: Option<f64>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Train a linear model on a rado file.
    Train {
        #[arg(long)]
        rados: PathBuf,
        /// lasso, ridge, linf, slope, or a combination like 0.5*lasso+2*ridge.
        #[arg(long, default_value = "ridge")]
        reg: String,
        #[arg(long, default_value_t = 0.0)]
        omega: f64,
        #[arg(long = "T", default_value_t = 1000)]
        t: usize,
        /// Ridge edge clamp.
        #[arg(long, default_value_t = radoboost::boost::DEFAULT_CLAMP_GAMMA)]
        gamma: f64,
        #[arg(long, value_enum, default_value = "last")]
        select: SelectArg,
        #[arg(long, value_enum, default_value = "preference")]
        wl: WlArg,
        /// Slope q.
        #[arg(long, default_value_t = 0.1)]
        q: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Report the 0/1 error of a model on a labeled CSV dataset.
    Eval {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        data: PathBuf,
        #[arg(long, default_value = "label")]
        label_column: String,
        #[arg(long)]
        positive_token: Option<String>,
    },
    /// Check the example/rado loss equivalences by enumeration.
    Verify {
        #[arg(long, value_enum, default_value = "all")]
        pair: PairArg,
        #[arg(long, default_value_t = 6)]
        m: usize,
        #[arg(long, default_value_t = 100)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Cross-validate a regularizer grid described by a TOML file.
    Experiment {
        #[arg(long)]
        config: PathBuf,
        /// Results CSV; defaults to `<config stem>.results.csv` beside the config.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print the example-equivalent privacy budget.
    DpBudget {
        #[arg(long)]
        epsilon: f64,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        m: usize,
    },
}

enum Failure {
    Usage(String),
    Lib(Error),
    Numeric(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Usage(s) | Failure::Numeric(s) => f.write_str(s),
            Failure::Lib(e) => write!(f, "{e}"),
        }
    }
}

impl Failure {
    fn exit_code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 1,
            Failure::Numeric(_) => 3,
            Failure::Lib(e) => match e.category() {
                ErrorCategory::Usage => 1,
                ErrorCategory::Data => 2,
                ErrorCategory::Numeric => 3,
            },
        }
    }
}

type CliResult = Result<(), Failure>;

fn writable(path: &Path, force: bool) -> CliResult {
    Ok(ensure_writable(path, force)?)
}

fn run(cli: Cli) -> CliResult {
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Failure::Usage(format!("--threads: {e}")))?;
    }
    let force = cli.force;
    match cli.command {
        Command::Gen {
            data,
            n,
            mode,
            seed,
            out,
            label_column,
            positive_token,
        } => {
            let mode = match mode {
                ModeArg::Plain => Generation::Plain,
                ModeArg::Classwise => Generation::Classwise,
                ModeArg::Full => Generation::Full,
            };
            let n = match (mode, n) {
                (Generation::Full, _) => n.unwrap_or(0),
                (_, Some(n)) => n,
                (_, None) => return Err(Failure::Usage("--n is required for plain and classwise rados".into())),
            };
            writable(&out, force)?;
            writable(&rado_meta_path(&out), force)?;
            let dataset = load_csv(&data, &label_column, positive_token.as_deref())?;
            let rados = generate(&dataset, mode, n, seed)?;
            write_rados(&out, &rados)?;
            println!("wrote {} rados in {} dimensions to {}", rados.n(), rados.d(), out.display());
        }
        Command::Protect {
            rados,
            epsilon,
            r_e,
            seed,
            out,
        } => {
            writable(&out, force)?;
            writable(&rado_meta_path(&out), force)?;
            let set = read_rados(&rados)?;
            let r_e = match r_e.or(set.provenance().edge_l1_bound) {
                Some(r) => r,
                None => return Err(Failure::Usage("--r-e is required: the rado file records no diameter bound".into())),
            };
            let protected = dp_protect(&set, &DpParams::new(epsilon, r_e, seed)?)?;
            write_rados(&out, &protected)?;
            println!(
                "wrote {} protected rados to {} (epsilon {epsilon}, r_e {r_e}, laplace scale {})",
                protected.n(),
                out.display(),
                protected.n() as f64 * r_e / epsilon
            );
        }
        Command::Train {
            rados,
            reg,
            omega,
            t,
            gamma,
            select,
            wl,
            q,
            seed,
            out,
        } => {
            writable(&out, force)?;
            let kind = parse_regularizer(&reg, q)?;
            let mut config = BoostConfig::new(t, RegularizerSpec::new(kind, omega)?);
            config.clamp_gamma = gamma;
            config.select = match select {
                SelectArg::Last => Selection::Last,
                SelectArg::Best => Selection::BestOnTraining,
            };
            config.wl_mode = match wl {
                WlArg::First => WeakLearnerMode::FirstAdmissible,
                WlArg::Preference => WeakLearnerMode::PreferenceOrder,
            };
            config.seed = seed;
            config.validate()?;
            let set = read_rados(&rados)?;
            let model = boost(&set, &config)?;
            write_model(&out, &model)?;
            println!(
                "trained {} iterations (kept iteration {}), support {:.2}%, ln loss {:.6e}; model in {}",
                model.iterations_run(),
                model.selected_iteration(),
                model.support_percent(),
                model.ln_z_product(),
                out.display()
            );
        }
        Command::Eval {
            model,
            data,
            label_column,
            positive_token,
        } => {
            let model = read_model(&model)?;
            let dataset = load_csv(&data, &label_column, positive_token.as_deref())?;
            if dataset.feature_names() != model.feature_names() {
                return Err(Error::InvalidDataset(format!(
                    "dataset features {:?} do not match model features {:?}",
                    dataset.feature_names(),
                    model.feature_names()
                ))
                .into());
            }
            let error = model.error_percent(&dataset)?;
            println!(
                "m {} error {:.4}% support {:.2}%",
                dataset.m(),
                error,
                model.support_percent()
            );
        }
        Command::Verify { pair, m, trials, seed } => {
            let kinds: Vec<GameKind> = match pair {
                PairArg::All => GameKind::ALL.to_vec(),
                PairArg::Log => vec![GameKind::LogExp],
                PairArg::Square => vec![GameKind::SquareMeanVar],
                PairArg::Relu => vec![GameKind::Relu],
                PairArg::Unhinged => vec![GameKind::Unhinged],
            };
            let mut all_passed = true;
            for kind in kinds {
                let c = check_pair(kind, m, trials, seed)?;
                all_passed &= c.passed;
                println!(
                    "{:<8} m {} trials {} gap mean {:.6e} stdev {:.1e} max residual {:.1e} {}",
                    kind.name(),
                    m,
                    trials,
                    c.gap.mean_gap,
                    c.gap.stdev_gap,
                    c.max_residual(),
                    if c.passed { "ok" } else { "FAIL" }
                );
            }
            if !all_passed {
                return Err(Failure::Numeric("equivalence checks failed".into()));
            }
        }
        Command::Experiment { config, out } => {
            let out = out.unwrap_or_else(|| {
                let stem = config.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
                config.with_file_name(format!("{stem}.results.csv"))
            });
            writable(&out, force)?;
            let cfg = ExperimentConfig::from_toml_file(&config)?;
            let report = run_experiment(&cfg)?;
            write_results_csv(&out, &report.rows)?;
            for r in &report.rows {
                println!(
                    "{} {} omega {} select {} error {:.2}±{:.2}% support {:.2}±{:.2}%",
                    r.domain,
                    r.regularizer,
                    r.omega,
                    r.select,
                    r.test_error_mean,
                    r.test_error_std,
                    r.support_mean,
                    r.support_std
                );
            }
            println!("results in {}", out.display());
        }
        Command::DpBudget { epsilon, n, m } => {
            println!("{:.5e}", epsilon_a(epsilon, n, m)?);
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn"))
        .format_timestamp(None)
        .init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {f}");
            ExitCode::from(f.exit_code())
        }
    }
}
