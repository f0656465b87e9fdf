use std::io::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use irs_ec::channel::{KappaMode, LinkConfig, CONFIG_KEYS};
use irs_ec::eccore::{EcOptions, MisoCsiMethod, QosExponent, Scenario, SisoCsiMethod};
use irs_ec::rateopt::RateSolution;
use irs_ec::registry::{OptimizerRegistry, ScenarioRegistry};
use irs_ec_cli::output::{emit_csv, emit_plot, write_csv};
use irs_ec_cli::report::{run_validate, ValidateSpec, DEFAULT_SLOTS};
use irs_ec_cli::sweep::{run_sweep, SweepSpec, SweepVar};
use irs_ec_cli::{CliError, Result};
use serde_json::json;

/// Effective capacity of IRS-assisted downlinks.
#[derive(Parser)]
#[command(name = "irs-ec", version)]
struct Cli {
    /// Seed for every random stream.
    #[arg(long, global = true, env = "IRS_EC_SEED", default_value_t = 42)]
    seed: u64,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate the analytic EC at one point.
    Ec {
        #[command(flatten)]
        link: LinkArgs,
        #[arg(long)]
        alpha: f64,
        /// Transmission rate (bits/s) for no-CSI scenarios; optimized if omitted.
        #[arg(long)]
        rate: Option<f64>,
        /// Rate optimizer used when `--rate` is omitted.
        #[arg(long)]
        optimizer: Option<String>,
    },
    /// Find the EC-maximizing rate of a no-CSI scenario.
    OptimizeRate {
        #[command(flatten)]
        link: LinkArgs,
        #[arg(long)]
        alpha: f64,
        #[arg(long)]
        optimizer: Option<String>,
    },
    /// Sweep one variable and write a CSV table (and optionally an SVG plot).
    Sweep {
        #[command(flatten)]
        link: LinkArgs,
        /// p_t, N, N_t, alpha or rate.
        #[arg(long = "var")]
        var: String,
        /// Comma-separated, strictly increasing values.
        #[arg(long, value_delimiter = ',', required = true)]
        values: Vec<f64>,
        /// Comma-separated QoS exponents (not used for alpha sweeps).
        #[arg(long, value_delimiter = ',')]
        alphas: Vec<f64>,
        /// Monte Carlo slots per row; 0 skips the oracle columns.
        #[arg(long, default_value_t = 0)]
        mc_slots: usize,
        #[arg(long)]
        optimizer: Option<String>,
        /// CSV destination; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        plot: Option<PathBuf>,
    },
    /// Compare analytic values against the Monte Carlo oracle.
    Validate {
        #[command(flatten)]
        link: LinkArgs,
        /// Restrict to these scenarios (repeatable); all four by default.
        #[arg(long = "only")]
        only: Vec<String>,
        #[arg(long, default_value_t = DEFAULT_SLOTS)]
        slots: usize,
        /// Exit with status 1 when any check fails.
        #[arg(long)]
        strict: bool,
    },
    /// List scenarios, rate optimizers and configuration keys.
    List,
}

#[derive(Args)]
struct LinkArgs {
    /// siso_csi, siso_nocsi, miso_csi or miso_nocsi.
    #[arg(long, default_value = "miso_nocsi")]
    scenario: String,
    /// `name = value` file applied over the reference link.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Override one configuration key (repeatable), e.g. `--set n_elems=16`.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
    /// SISO perfect-CSI evaluator: exact, relaxed or printed.
    #[arg(long, default_value = "exact")]
    siso_csi: String,
    /// MISO perfect-CSI evaluator: gaussian or exact.
    #[arg(long, default_value = "gaussian")]
    miso_csi: String,
    /// MISO exponential rate: variance or paper.
    #[arg(long, default_value = "variance")]
    kappa: String,
}

impl LinkArgs {
    fn scenario(&self) -> Result<Scenario> {
        Ok(self.scenario.parse()?)
    }

    fn config(&self) -> Result<LinkConfig> {
        let scenario = self.scenario()?;
        let text = match &self.config {
            Some(path) => std::fs::read_to_string(path).map_err(|source| CliError::Io {
                path: path.clone(),
                source,
            })?,
            None => String::new(),
        };
        let mut cfg = LinkConfig::parse(&text)?;
        let mut n_tx_given = text.lines().any(|l| {
            l.split('#')
                .next()
                .unwrap_or("")
                .trim_start()
                .starts_with("n_tx")
        });
        for item in &self.set {
            let (k, v) = item
                .split_once('=')
                .ok_or_else(|| CliError::Usage(format!("--set expects KEY=VALUE, got `{item}`")))?;
            let k = k.trim();
            n_tx_given |= k == "n_tx";
            cfg.set(k, v.trim())?;
        }
        if scenario.is_siso() && !n_tx_given {
            cfg.n_tx = 1;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    fn options(&self) -> Result<EcOptions> {
        let kappa = match self.kappa.as_str() {
            "variance" => KappaMode::Variance,
            "paper" => KappaMode::Paper,
            other => return Err(CliError::Usage(format!("unknown kappa mode `{other}`"))),
        };
        Ok(EcOptions {
            siso_csi: self.siso_csi.parse::<SisoCsiMethod>()?,
            miso_csi: self.miso_csi.parse::<MisoCsiMethod>()?,
            kappa,
        })
    }
}

fn solution_json(sol: &RateSolution) -> serde_json::Value {
    json!({
        "r_star": sol.r_star,
        "ec_at_r_star": sol.ec_at_r_star,
        "iterations": sol.iterations,
        "method": sol.method.name(),
        "valid": sol.valid,
        "warnings": sol.warnings,
    })
}

fn optimize(link: &LinkArgs, alpha: QosExponent, optimizer: Option<&str>) -> Result<RateSolution> {
    let scenario = link.scenario()?;
    if !scenario.needs_rate() {
        return Err(CliError::Usage(format!(
            "{scenario} has no transmission rate to optimize"
        )));
    }
    let reg = OptimizerRegistry::builtin();
    let name = optimizer.unwrap_or(OptimizerRegistry::default_for(scenario));
    Ok(reg
        .get(name)?
        .optimize_link(&link.config()?, alpha, scenario, &link.options()?)?)
}

fn run(cli: Cli) -> Result<ExitCode> {
    let mut stdout = std::io::stdout().lock();
    let io_err = |source| CliError::Io {
        path: PathBuf::from("<stdout>"),
        source,
    };
    match cli.command {
        Command::Ec {
            link,
            alpha,
            rate,
            optimizer,
        } => {
            let scenario = link.scenario()?;
            let a = QosExponent::new(alpha)?;
            let (rate, solution) = match (scenario.needs_rate(), rate) {
                (false, Some(_)) => {
                    return Err(CliError::Usage(format!("{scenario} does not take --rate")));
                }
                (false, None) => (None, None),
                (true, Some(r)) => (Some(r), None),
                (true, None) => {
                    let sol = optimize(&link, a, optimizer.as_deref())?;
                    (Some(sol.r_star), Some(solution_json(&sol)))
                }
            };
            let reg = ScenarioRegistry::builtin();
            let res =
                reg.get(scenario.name())?
                    .evaluate(&link.config()?, a, rate, &link.options()?)?;
            let out = json!({
                "scenario": scenario.name(),
                "alpha": alpha,
                "rate": rate,
                "ec_bits_per_slot": res.ec_bits_per_slot,
                "diagnostics": res.diagnostics,
                "warnings": res.warnings,
                "rate_solution": solution,
            });
            writeln!(stdout, "{out}").map_err(io_err)?;
        }
        Command::OptimizeRate {
            link,
            alpha,
            optimizer,
        } => {
            let sol = optimize(&link, QosExponent::new(alpha)?, optimizer.as_deref())?;
            writeln!(stdout, "{}", solution_json(&sol)).map_err(io_err)?;
        }
        Command::Sweep {
            link,
            var,
            values,
            alphas,
            mc_slots,
            optimizer,
            out,
            plot,
        } => {
            let spec = SweepSpec {
                scenario: link.scenario()?,
                sweep_var: var.parse::<SweepVar>()?,
                values,
                fixed: link.config()?,
                alphas,
                seed: cli.seed,
                mc_slots,
                options: link.options()?,
                optimizer,
            };
            let table = run_sweep(&spec)?;
            match out {
                Some(path) => emit_csv(&table, &path)?,
                None => write_csv(&table, &mut stdout).map_err(|source| CliError::Csv {
                    path: PathBuf::from("<stdout>"),
                    source,
                })?,
            }
            if let Some(path) = plot {
                emit_plot(&table, &path)?;
            }
        }
        Command::Validate {
            link,
            only,
            slots,
            strict,
        } => {
            let scenarios = only
                .iter()
                .map(|s| s.parse::<Scenario>())
                .collect::<std::result::Result<Vec<_>, _>>()?;
            let mut base = link.config()?;
            if base.n_tx == 1 {
                base.n_tx = LinkConfig::default().n_tx;
            }
            let report = run_validate(&ValidateSpec {
                scenarios,
                base,
                slots,
                seed: cli.seed,
                options: link.options()?,
            })?;
            writeln!(stdout, "{report}").map_err(io_err)?;
            if strict && report.failures() > 0 {
                return Ok(ExitCode::FAILURE);
            }
        }
        Command::List => {
            let s = ScenarioRegistry::builtin();
            let o = OptimizerRegistry::builtin();
            writeln!(stdout, "scenarios: {}", s.names().join(", ")).map_err(io_err)?;
            writeln!(stdout, "rate optimizers: {}", o.names().join(", ")).map_err(io_err)?;
            let vars: Vec<&str> = SweepVar::ALL.iter().map(|v| v.name()).collect();
            writeln!(stdout, "sweep variables: {}", vars.join(", ")).map_err(io_err)?;
            writeln!(stdout, "config keys: {}", CONFIG_KEYS.join(", ")).map_err(io_err)?;
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            // --help and --version
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let msg = e.render().to_string();
            let first = msg
                .lines()
                .next()
                .unwrap_or_default()
                .trim_start_matches("error: ");
            eprintln!("{}", CliError::Usage(first.to_string()).to_json_line());
            return ExitCode::from(2);
        }
    };
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("{}", e.to_json_line());
            ExitCode::from(2)
        }
    }
}
