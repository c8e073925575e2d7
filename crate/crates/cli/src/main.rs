use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use jcj_core::channel::{sample_scenario_seeded, ScenarioConfig};
use jcj_core::checks;
use jcj_core::ci::run_ci;
use jcj_core::experiment::{
    emit_outputs, run_experiment, ConfigError, ExperimentConfig, Scheme, SweepAxis, SweepConfig,
};
use jcj_core::jcj::{lower_bound_power, run_jcj, EtaSweep, JcjError, JcjOptions};
use jcj_core::metrics::threshold_errors;
use jcj_core::oracle::{oracle_solve, OracleOptions};
use jcj_core::sdp::SolverOptions;
use jcj_core::units::mw_to_dbm;

const EXIT_CONFIG: u8 = 1;
const EXIT_RUNTIME: u8 = 2;
const EXIT_INFEASIBLE: u8 = 3;

/// Joint communication and jamming beamforming experiments.
///
/// Settings are resolved as built-in defaults, then the --config file, then
/// command-line flags.
#[derive(Parser)]
#[command(name = "jcj", version)]
struct Cli {
    /// Log progress (repeat for more detail).
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a Monte-Carlo experiment and write CSV, SVG and manifest files.
    Run(RunArgs),
    /// Solve one realization and print the beamformer with diagnostics.
    Solve(SolveArgs),
    /// Run the randomised structure checks.
    Check {
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
    /// Compare JCJ with the brute-force oracle on tiny instances.
    Oracle(OracleArgs),
}

#[derive(Args)]
struct Common {
    /// TOML experiment configuration.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Master seed.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    common: Common,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    realizations: Option<usize>,
    /// Comma-separated schemes: jcj, ci, sdr.
    #[arg(long)]
    scheme: Option<String>,
    /// Sweep as axis=v1,v2,... (axes: n_tx, n_ue, n_uav, r_th, gamma_th_db, eaves_power_dbm).
    #[arg(long)]
    sweep: Option<String>,
    /// Worker threads (0 = all cores).
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Args)]
struct SolveArgs {
    #[command(flatten)]
    common: Common,
    /// Realization index within the seed's streams.
    #[arg(long, default_value_t = 0)]
    index: u64,
}

#[derive(Args)]
struct OracleArgs {
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, default_value_t = 10)]
    instances: u64,
    #[arg(long, default_value_t = 64)]
    starts: usize,
}

fn load(common: &Common) -> Result<ExperimentConfig, ConfigError> {
    let mut cfg = match &common.config {
        Some(p) => ExperimentConfig::load(p)?,
        None => ExperimentConfig::default(),
    };
    if let Some(s) = common.seed {
        cfg.master_seed = s;
    }
    Ok(cfg)
}

fn bad_flag(key: &str, msg: String) -> ConfigError {
    ConfigError::Invalid {
        key: key.to_string(),
        msg,
    }
}

fn parse_sweep(s: &str) -> Result<SweepConfig, ConfigError> {
    let (axis, values) = s
        .split_once('=')
        .ok_or_else(|| bad_flag("--sweep", format!("expected axis=v1,v2,..., got {s}")))?;
    let axis = SweepAxis::parse(axis)
        .ok_or_else(|| bad_flag("--sweep", format!("unknown axis {axis}")))?;
    let values = values
        .split(',')
        .map(|v| {
            v.trim()
                .parse::<f64>()
                .map_err(|e| bad_flag("--sweep", format!("{v}: {e}")))
        })
        .collect::<Result<_, _>>()?;
    Ok(SweepConfig { axis, values })
}

fn run_config(args: &RunArgs) -> Result<ExperimentConfig, ConfigError> {
    let mut cfg = load(&args.common)?;
    if let Some(o) = &args.out {
        cfg.output_dir = o.clone();
    }
    if let Some(r) = args.realizations {
        cfg.realizations = r;
    }
    if let Some(t) = args.threads {
        cfg.threads = t;
    }
    if let Some(s) = &args.scheme {
        cfg.schemes = s
            .split(',')
            .map(|x| {
                Scheme::parse(x).ok_or_else(|| bad_flag("--scheme", format!("unknown scheme {x}")))
            })
            .collect::<Result<_, _>>()?;
    }
    if let Some(s) = &args.sweep {
        cfg.sweep = Some(parse_sweep(s)?);
    }
    cfg.validate()?;
    Ok(cfg)
}

fn cmd_run(args: &RunArgs) -> ExitCode {
    let cfg = match run_config(args) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("config error: {e}");
            return ExitCode::from(EXIT_CONFIG);
        }
    };
    let table = match run_experiment(&cfg) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("config error: {e}");
            return ExitCode::from(EXIT_CONFIG);
        }
    };
    match emit_outputs(&table, &cfg) {
        Ok(files) => {
            for f in files {
                println!("{}", f.display());
            }
        }
        Err(e) => {
            eprintln!("cannot write outputs to {}: {e}", cfg.output_dir.display());
            return ExitCode::from(EXIT_RUNTIME);
        }
    }
    if cfg.runs(Scheme::Jcj) && table.all_jcj_infeasible() {
        eprintln!("JCJ was infeasible on every realization");
        return ExitCode::from(EXIT_INFEASIBLE);
    }
    ExitCode::SUCCESS
}

fn cmd_solve(args: &SolveArgs) -> ExitCode {
    let cfg = match load(&args.common).and_then(|c| c.validate().map(|_| c)) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("config error: {e}");
            return ExitCode::from(EXIT_CONFIG);
        }
    };
    let sc = match sample_scenario_seeded(&cfg.scenario, cfg.master_seed, args.index) {
        Ok(s) => s,
        Err(e) => {
            eprintln!("cannot draw scenario: {e}");
            return ExitCode::from(EXIT_RUNTIME);
        }
    };
    for (n, t) in sc.ues.iter().enumerate() {
        println!("ue {n}: aod {:.2} deg, range {:.1} m", t.aod_deg, t.range_m);
    }
    for (m, t) in sc.uavs.iter().enumerate() {
        println!(
            "uav {m}: aod {:.2} deg, range {:.1} m",
            t.aod_deg, t.range_m
        );
    }
    let sweep = EtaSweep::new(cfg.phi.clone()).unwrap_or_default();
    let opts = JcjOptions {
        error_scale: cfg.error_scale,
        ..Default::default()
    };
    let bf = match run_jcj(&sc, &sweep, &opts) {
        Ok(b) => b,
        Err(e) => {
            eprintln!("jcj: {e}");
            return ExitCode::from(match e {
                JcjError::AllEtaInfeasible(_) => EXIT_INFEASIBLE,
                _ => EXIT_RUNTIME,
            });
        }
    };
    for o in &bf.per_eta {
        let err = o.error.map_or("-".to_string(), |e| format!("{e:.3e}"));
        let r1 = o
            .rank_one_ratio
            .map_or("-".to_string(), |r| format!("{r:.6}"));
        let p = o
            .power_mw
            .map_or("-".to_string(), |p| format!("{:.3}", mw_to_dbm(p)));
        println!(
            "eta {:<5} {:<18} iter {:>3} error {err:>10} rank-one {r1:>8} power {p:>7} dBm",
            o.eta,
            o.status.as_str(),
            o.iterations
        );
    }
    println!("chosen eta {:?}", bf.chosen_eta);
    println!(
        "jcj power {:.6e} mW ({:.3} dBm)",
        bf.power_mw,
        mw_to_dbm(bf.power_mw)
    );
    let e = threshold_errors(&sc, &bf.f);
    println!(
        "rate error {:.3e} bit/s/Hz, sinr error {:.3e} dB",
        e.rate_error, e.sinr_error_db
    );
    if let Ok(lb) = lower_bound_power(&sc, true, &SolverOptions::default()) {
        println!("relaxation bound {:.6e} mW ({:.3} dBm)", lb, mw_to_dbm(lb));
    }
    match run_ci(&sc) {
        Ok(ci) => println!(
            "ci power {:.6e} mW ({:.3} dBm)",
            ci.power_mw,
            mw_to_dbm(ci.power_mw)
        ),
        Err(e) => println!("ci: {e}"),
    }
    println!("beamformer (rows = antennas, columns = streams):");
    for i in 0..bf.f.rows() {
        let row: Vec<String> =
            bf.f.row(i)
                .iter()
                .map(|z| format!("{:+.4e}{:+.4e}i", z.re, z.im))
                .collect();
        println!("  {}", row.join("  "));
    }
    ExitCode::SUCCESS
}

fn cmd_check(seed: u64) -> ExitCode {
    let reports = checks::run_all(seed);
    for r in &reports {
        println!("{r}");
    }
    if reports.iter().all(|r| r.ok()) {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(EXIT_RUNTIME)
    }
}

fn cmd_oracle(args: &OracleArgs) -> ExitCode {
    let cfg = ScenarioConfig {
        n_tx: 4,
        n_ue: 1,
        n_uav: 1,
        ..Default::default()
    };
    let solver = SolverOptions::default();
    println!("index,sdr_mw,oracle_mw,jcj_mw,sandwich");
    for i in 0..args.instances {
        let sc = match sample_scenario_seeded(&cfg, args.seed, i) {
            Ok(s) => s,
            Err(e) => {
                eprintln!("cannot draw scenario: {e}");
                return ExitCode::from(EXIT_RUNTIME);
            }
        };
        let sdr = lower_bound_power(&sc, false, &solver).ok();
        let opts = OracleOptions {
            n_starts: args.starts,
            seed: args.seed.wrapping_add(i),
            ..Default::default()
        };
        let oracle = oracle_solve(&sc, &opts)
            .ok()
            .filter(|o| o.feasible_found)
            .map(|o| o.best_power_mw);
        let jcj = run_jcj(&sc, &EtaSweep::default(), &JcjOptions::default())
            .ok()
            .map(|b| b.power_mw);
        let verdict = match (sdr, oracle, jcj) {
            (Some(s), Some(o), Some(j)) => (s <= o + 1e-6 && o <= j + 1e-6).to_string(),
            _ => "n/a".to_string(),
        };
        let show = |v: Option<f64>| v.map_or(String::new(), |x| format!("{x:.9e}"));
        println!("{i},{},{},{},{verdict}", show(sdr), show(oracle), show(jcj));
    }
    ExitCode::SUCCESS
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => log::LevelFilter::Warn,
        1 => log::LevelFilter::Info,
        _ => log::LevelFilter::Debug,
    };
    env_logger::Builder::new().filter_level(level).init();
    match &cli.command {
        Command::Run(a) => cmd_run(a),
        Command::Solve(a) => cmd_solve(a),
        Command::Check { seed } => cmd_check(*seed),
        Command::Oracle(a) => cmd_oracle(a),
    }
}
