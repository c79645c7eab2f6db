use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use vecmkit::johansen::JohansenCase;
use vecmkit::simulate::{generate, DgpKind, DgpSpec};
use vecmkit::unitroot::DeterministicSpec;
use vecmkit::nalgebra::{DMatrix, DVector};

use vecmkit_cli::commands::{self, IrfSpec, ModelSpec};
use vecmkit_cli::report::StageStatus;
use vecmkit_cli::{emit_report, run_pipeline, CliError, PipelineConfig, Table};

#[derive(Parser)]
#[command(name = "vecmkit", version, about = "Cointegration and VECM study pipeline")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the full study from a config file
    Pipeline {
        #[arg(long)]
        config: PathBuf,
        /// Override the config's output directory
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// ADF and PP tests on levels and first differences
    Unitroot {
        #[command(flatten)]
        data: DataArgs,
        #[arg(long, default_value_t = 3)]
        max_lag: usize,
        #[arg(long, default_value = "trend")]
        det_level: DeterministicSpec,
        #[arg(long, default_value = "drift")]
        det_diff: DeterministicSpec,
        #[arg(long, default_value_t = 0.05)]
        significance: f64,
    },
    /// VAR lag order selection criteria
    Lagselect {
        #[command(flatten)]
        data: DataArgs,
        #[arg(long, default_value_t = 3)]
        max_lag: usize,
    },
    /// Johansen trace and max-eigenvalue tests
    Johansen {
        #[command(flatten)]
        data: DataArgs,
        /// Level VAR lag order (default: lag selection)
        #[arg(long)]
        lags: Option<usize>,
        #[arg(long, default_value_t = 3)]
        max_lag: usize,
        #[arg(long = "case", default_value = "restricted_constant")]
        case: JohansenCase,
        #[arg(long, default_value_t = 0.05)]
        significance: f64,
    },
    /// VECM coefficients, long-run vectors and weak-exogeneity tests
    Vecm {
        #[command(flatten)]
        data: DataArgs,
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long, default_value_t = 0.10)]
        weak_exog_level: f64,
    },
    /// Bivariate Granger causality in both directions
    Granger {
        #[command(flatten)]
        data: DataArgs,
        #[arg(long)]
        cause: String,
        #[arg(long)]
        effect: String,
        #[arg(long, default_value_t = 2)]
        lag: usize,
        /// Test on levels instead of first differences
        #[arg(long)]
        levels: bool,
        #[arg(long, default_value_t = 0.05)]
        significance: f64,
    },
    /// Portmanteau, Jarque-Bera and ARCH-LM tests on VECM residuals
    Diagnose {
        #[command(flatten)]
        data: DataArgs,
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long, default_value_t = 10)]
        portmanteau_lags: usize,
        #[arg(long, default_value_t = 5)]
        arch_lags: usize,
    },
    /// Orthogonalized impulse responses, optionally with bootstrap bands
    Irf {
        #[command(flatten)]
        data: DataArgs,
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long, default_value_t = 9)]
        horizon: usize,
        #[arg(long, value_delimiter = ',')]
        ordering: Option<Vec<String>>,
        /// 0 disables the bootstrap
        #[arg(long, default_value_t = 0)]
        replications: usize,
        #[arg(long, default_value_t = 20_240_601)]
        seed: u64,
        #[arg(long, default_value_t = 0.95)]
        band_level: f64,
    },
    /// Forecast-error variance decomposition
    Fevd {
        #[command(flatten)]
        data: DataArgs,
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long, default_value_t = 9)]
        horizon: usize,
        #[arg(long, value_delimiter = ',')]
        ordering: Option<Vec<String>>,
    },
    /// Write a simulated dataset as CSV
    Simulate(SimArgs),
}

#[derive(Args)]
struct DataArgs {
    /// Wide CSV, first column the year
    #[arg(long)]
    data: PathBuf,
    /// Columns to use: NAME or NAME:HEADER, comma separated
    #[arg(long, value_delimiter = ',')]
    columns: Vec<String>,
    /// Columns to replace by their natural log
    #[arg(long, value_delimiter = ',')]
    log: Vec<String>,
    #[arg(long, default_value = "csv")]
    format: String,
    /// Directory for one file per table (default: stdout)
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct ModelArgs {
    /// Cointegrating rank (default: trace test)
    #[arg(long)]
    rank: Option<usize>,
    /// Level VAR lag order (default: lag selection)
    #[arg(long)]
    lags: Option<usize>,
    /// Variables to keep, comma separated
    #[arg(long, value_delimiter = ',')]
    keep: Vec<String>,
    #[arg(long, default_value_t = 3)]
    max_lag: usize,
    #[arg(long = "case", default_value = "restricted_constant")]
    case: JohansenCase,
    #[arg(long, default_value_t = 0.05)]
    significance: f64,
}

impl ModelArgs {
    fn spec(&self) -> ModelSpec {
        ModelSpec {
            keep: self.keep.clone(),
            lags: self.lags,
            rank: self.rank,
            max_lag: self.max_lag,
            case: self.case,
            level: self.significance,
        }
    }
}

#[derive(Args)]
struct SimArgs {
    /// white_noise, random_walk, ar1, var, vecm or arch1
    #[arg(long)]
    kind: String,
    #[arg(long, default_value_t = 200)]
    t: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long)]
    burn_in: Option<usize>,
    /// Dimension for white_noise and random_walk
    #[arg(long, default_value_t = 1)]
    k: usize,
    #[arg(long, default_value_t = 1.0)]
    sd: f64,
    #[arg(long, default_value_t = 0.5)]
    phi: f64,
    /// Lag matrix for `var` / alpha for `vecm`, rows separated by ';'
    #[arg(long)]
    a: Option<String>,
    /// Cointegrating matrix for `vecm`, rows separated by ';'
    #[arg(long)]
    beta: Option<String>,
    #[arg(long, default_value_t = 1.0)]
    omega: f64,
    #[arg(long, default_value_t = 0.5)]
    arch: f64,
    #[arg(long, default_value_t = 2000)]
    start_year: i64,
    #[arg(long)]
    output: PathBuf,
}

fn parse_matrix(text: &str) -> Result<DMatrix<f64>, CliError> {
    let rows: Vec<Vec<f64>> = text
        .split(';')
        .map(|r| {
            r.split(',')
                .map(|v| v.trim().parse::<f64>())
                .collect::<Result<Vec<_>, _>>()
        })
        .collect::<Result<_, _>>()
        .map_err(|e| CliError::new("simulate", format!("matrix '{text}': {e}")))?;
    let ncol = rows.first().map_or(0, Vec::len);
    if ncol == 0 || rows.iter().any(|r| r.len() != ncol) {
        return Err(CliError::new("simulate", format!("matrix '{text}' is ragged or empty")));
    }
    Ok(DMatrix::from_fn(rows.len(), ncol, |i, j| rows[i][j]))
}

fn simulate(a: &SimArgs) -> Result<(), CliError> {
    let need = |o: &Option<String>, what: &str| {
        o.as_deref()
            .ok_or_else(|| CliError::new("simulate", format!("--{what} is required for kind {}", a.kind)))
            .and_then(parse_matrix)
    };
    let kind = match a.kind.as_str() {
        "white_noise" => DgpKind::WhiteNoise { cov: DMatrix::identity(a.k, a.k) * (a.sd * a.sd) },
        "random_walk" => DgpKind::RandomWalk { cov: DMatrix::identity(a.k, a.k) * (a.sd * a.sd) },
        "ar1" => DgpKind::Ar1 { intercept: 0.0, phi: a.phi, sd: a.sd },
        "arch1" => DgpKind::Arch1 { omega: a.omega, a: a.arch },
        "var" => {
            let lag = need(&a.a, "a")?;
            let k = lag.nrows();
            DgpKind::Var { intercept: DVector::zeros(k), lags: vec![lag], cov: DMatrix::identity(k, k) * (a.sd * a.sd) }
        }
        "vecm" => {
            let alpha = need(&a.a, "a")?;
            let beta = need(&a.beta, "beta")?;
            let k = alpha.nrows();
            DgpKind::Vecm {
                alpha,
                beta,
                gamma: vec![],
                intercept: DVector::zeros(k),
                cov: DMatrix::identity(k, k) * (a.sd * a.sd),
            }
        }
        other => return Err(CliError::new("simulate", format!("unknown kind '{other}'"))),
    };
    let mut spec = DgpSpec::new(kind, a.t, a.seed);
    spec.burn_in = a.burn_in;
    spec.start_year = a.start_year;
    let d = generate(&spec).map_err(CliError::at("simulate"))?;
    d.write_csv(&a.output).map_err(CliError::at("simulate"))
}

fn write_tables(tables: &[Table], format: &str, output: Option<&Path>) -> Result<(), CliError> {
    let io = |e: std::io::Error| CliError::new("output", e.to_string());
    let json = match format {
        "csv" => false,
        "json" => true,
        other => return Err(CliError::new("output", format!("unknown format '{other}' (csv, json)"))),
    };
    match output {
        Some(dir) => {
            std::fs::create_dir_all(dir).map_err(io)?;
            for t in tables {
                let (ext, body) = if json {
                    ("json", serde_json::to_string_pretty(t).map_err(|e| CliError::new("output", e.to_string()))?)
                } else {
                    ("csv", t.to_csv())
                };
                std::fs::write(dir.join(format!("{}.{ext}", t.name)), body).map_err(io)?;
            }
        }
        None if json => {
            println!("{}", serde_json::to_string_pretty(tables).map_err(|e| CliError::new("output", e.to_string()))?);
        }
        None => {
            for (idx, t) in tables.iter().enumerate() {
                if idx > 0 {
                    println!();
                }
                println!("# {}", t.name);
                print!("{}", t.to_csv());
            }
        }
    }
    Ok(())
}

fn run(cli: Cli) -> Result<(), CliError> {
    let load = |d: &DataArgs| commands::load_data(&d.data, &d.columns, &d.log);
    let (tables, data) = match &cli.command {
        Command::Pipeline { config, output } => {
            let mut cfg = PipelineConfig::from_file(config)?;
            if let Some(o) = output {
                cfg.output = o.clone();
            }
            let report = run_pipeline(&cfg);
            emit_report(&report, cfg.format, &cfg.output)?;
            for line in &report.decisions {
                println!("{line}");
            }
            let failed = report.stages.iter().find(|s| s.status == StageStatus::Failed);
            return match failed {
                Some(s) => Err(CliError::new(s.stage.clone(), s.detail.clone().unwrap_or_default())),
                None => Ok(()),
            };
        }
        Command::Simulate(a) => return simulate(a),
        Command::Unitroot { data, max_lag, det_level, det_diff, significance } => {
            (commands::unitroot(&load(data)?, *max_lag, *det_level, *det_diff, *significance)?, data)
        }
        Command::Lagselect { data, max_lag } => (commands::lagselect(&load(data)?, *max_lag)?, data),
        Command::Johansen { data, lags, max_lag, case, significance } => {
            (commands::johansen(&load(data)?, *lags, *max_lag, *case, *significance)?, data)
        }
        Command::Vecm { data, model, weak_exog_level } => {
            (commands::vecm(&load(data)?, &model.spec(), *weak_exog_level)?, data)
        }
        Command::Granger { data, cause, effect, lag, levels, significance } => {
            (commands::granger(&load(data)?, cause, effect, *lag, *levels, *significance)?, data)
        }
        Command::Diagnose { data, model, portmanteau_lags, arch_lags } => {
            (commands::diagnose_model(&load(data)?, &model.spec(), *portmanteau_lags, *arch_lags)?, data)
        }
        Command::Irf { data, model, horizon, ordering, replications, seed, band_level } => {
            let spec = IrfSpec {
                horizon: *horizon,
                ordering: ordering.clone(),
                replications: *replications,
                seed: *seed,
                band_level: *band_level,
            };
            (commands::irf_tables(&load(data)?, &model.spec(), &spec)?, data)
        }
        Command::Fevd { data, model, horizon, ordering } => {
            (commands::fevd_tables(&load(data)?, &model.spec(), *horizon, ordering.clone())?, data)
        }
    };
    write_tables(&tables, &data.format, data.output.as_deref())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
