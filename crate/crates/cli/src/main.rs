//! `tcm`: simulate, sweep, verify and probe inequalities for the damped
//! tropical climate model.
//!
//! Exit codes: 0 success, 2 usage error, 3 invalid configuration or
//! parameters, 4 I/O or checkpoint error, 5 numerical failure (run aborted,
//! non-finite values), 6 a verification check failed.

use std::fs;
use std::ops::ControlFlow;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use tcm_core::diagnostics::monotonicity_report;
use tcm_core::diagnostics::MONOTONICITY_TOL;
use tcm_core::experiments::{amplitude_sweep, make_initial_data};
use tcm_core::inequality::{
    reports_to_csv, standard_suite, theory_exponents, FieldFamily, GNInstance,
};
use tcm_core::io::{
    fmt_float, load_config, read_checkpoint_full, read_columns, series_to_csv, split_columns,
    write_checkpoint_with_progress, write_series, RunConfig,
};
use tcm_core::model::run_with;
use tcm_core::verify::{verify_suite, VerifySettings};
use tcm_core::{Error, Grid};

#[derive(Parser)]
#[command(name = "tcm", version, about = "Damped tropical climate model toolkit")]
struct Cli {
    /// Worker threads for the data-parallel kernels and sweep rows.
    #[arg(long, global = true, env = "TCM_THREADS")]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one simulation; writes the diagnostics series and a final checkpoint.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        /// Continue from a checkpoint written by an earlier run.
        #[arg(long)]
        resume: Option<PathBuf>,
    },
    /// Run the small-data protocol for each amplitude and write one CSV row per run.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        /// Comma-separated target sizes, e.g. "1e-3,1e-2".
        #[arg(long)]
        c0: String,
        /// Output file (default: <output.dir>/sweep.csv).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Energy balance, damping identity, coupling cancellation and linear oracle checks.
    Verify {
        #[arg(long)]
        config: PathBuf,
    },
    /// Inequality ratios on random band-limited fields.
    Inequalities {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        samples: usize,
        #[arg(long)]
        seed: u64,
        /// Output file (default: <output.dir>/inequalities.csv).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Split a series CSV into one two-column file per quantity.
    Plotdata {
        #[arg(long)]
        series: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

/// Failure with its exit code.
struct Failure {
    code: u8,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match &e {
            Error::Config(_)
            | Error::InvalidParameter { .. }
            | Error::InvalidGrid(_)
            | Error::Exponents(_)
            | Error::ZeroField => 3,
            Error::Io(_) | Error::Checkpoint(_) => 4,
            _ => 5,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e).into()
    }
}

fn fail(code: u8, message: impl Into<String>) -> Failure {
    Failure {
        code,
        message: message.into(),
    }
}

type CmdResult = Result<(), Failure>;

fn ensure_parent(path: &Path) -> std::io::Result<()> {
    match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => fs::create_dir_all(d),
        _ => Ok(()),
    }
}

fn simulate(cfg: &RunConfig, resume: Option<&Path>) -> CmdResult {
    let grid = Grid::new(cfg.n, cfg.box_length)?;
    let (state, progress) = match resume {
        Some(path) => {
            let ck = read_checkpoint_full(path)?;
            let g = ck.state.grid();
            if g.n() != cfg.n || g.box_length() != cfg.box_length {
                return Err(fail(
                    3,
                    format!(
                        "checkpoint grid (n = {}, L = {}) differs from the configuration",
                        g.n(),
                        g.box_length()
                    ),
                ));
            }
            if ck.params != cfg.params {
                return Err(fail(
                    3,
                    "checkpoint model parameters differ from the configuration",
                ));
            }
            (ck.state, ck.progress)
        }
        None => (make_initial_data(&grid, &cfg.data)?.state, None),
    };
    let resumed = resume.is_some();
    let out = run_with(&state, &cfg.params, &cfg.run, progress, |r| {
        log::info!("t = {:.6}, |(u,v,theta)|_2 = {:.6e}", r.time, r.l2.triple);
        ControlFlow::Continue(())
    })?;

    let mode = cfg.run.diagnostics.bmo_mode;
    let series_path = cfg.output.series_path();
    let existing = resumed && series_path.exists();
    if existing {
        let mut text = fs::read_to_string(&series_path)?;
        let new = series_to_csv(&out.series, mode);
        split_columns(&text)?;
        text.extend(new.lines().skip(1).map(|l| format!("{l}\n")));
        fs::write(&series_path, text)?;
    } else {
        write_series(&out.series, mode, &series_path)?;
    }
    let ck_path = cfg.output.checkpoint_path();
    write_checkpoint_with_progress(&out.state, &cfg.params, &out.progress, &ck_path)?;

    let report = monotonicity_report(&out.series, MONOTONICITY_TOL);
    println!("samples              {}", out.series.len());
    println!("steps                {}", out.steps);
    println!("final time           {}", out.state.time);
    println!(
        "pi                   {}",
        fmt_float(out.progress.monitor.pi())
    );
    println!(
        "pi_tilde             {}",
        fmt_float(out.progress.monitor.pi_tilde())
    );
    println!(
        "monotonicity         {} violations",
        report.violation_count()
    );
    println!(
        "series               {}{}",
        series_path.display(),
        if existing { " (appended)" } else { "" }
    );
    println!("checkpoint           {}", ck_path.display());
    match out.abort {
        Some(e) => Err(fail(5, format!("run stopped early: {e}"))),
        None => Ok(()),
    }
}

fn parse_list(list: &str) -> Result<Vec<f64>, Failure> {
    let vals = list
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| {
            s.parse::<f64>()
                .ok()
                .filter(|x| x.is_finite() && *x >= 0.0)
                .ok_or_else(|| fail(2, format!("--c0: {s:?} is not a finite number >= 0")))
        })
        .collect::<Result<Vec<f64>, Failure>>()?;
    if vals.is_empty() {
        return Err(fail(2, "--c0: expected at least one value"));
    }
    Ok(vals)
}

fn sweep(cfg: &RunConfig, c0: &str, out: Option<PathBuf>) -> CmdResult {
    let c0s = parse_list(c0)?;
    let result = amplitude_sweep(&cfg.protocol(), &c0s);
    let csv = result.to_csv();
    let path = out.unwrap_or_else(|| cfg.output.dir.join("sweep.csv"));
    ensure_parent(&path)?;
    fs::write(&path, &csv)?;
    print!("{csv}");
    eprintln!("wrote {}", path.display());
    Ok(())
}

fn verify(cfg: &RunConfig) -> CmdResult {
    let settings = VerifySettings {
        seed: cfg.data.seed,
        ..VerifySettings::default()
    };
    let checks = verify_suite(&settings, cfg.n, cfg.box_length, &cfg.params, &cfg.data)?;
    println!(
        "{:<24} {:>12} {:>12}  {:<4}  detail",
        "check", "value", "tolerance", ""
    );
    for c in &checks {
        println!("{c}");
    }
    let failed = checks.iter().filter(|c| !c.passed).count();
    if failed > 0 {
        return Err(fail(
            6,
            format!("{failed} of {} checks failed", checks.len()),
        ));
    }
    println!("all {} checks passed", checks.len());
    Ok(())
}

fn inequalities(cfg: &RunConfig, samples: usize, seed: u64, out: Option<PathBuf>) -> CmdResult {
    let grid = Grid::new(cfg.n, cfg.box_length)?;
    let family = FieldFamily {
        band: cfg.data.band,
        slope: cfg.data.slope,
    };
    let alpha = cfg.params.alpha;
    let reports = standard_suite(&grid, alpha, family, samples, seed)?;
    let csv = reports_to_csv(&reports);
    let path = out.unwrap_or_else(|| cfg.output.dir.join("inequalities.csv"));
    ensure_parent(&path)?;
    fs::write(&path, &csv)?;
    print!("{csv}");
    for inst in [GNInstance::damping_lp(alpha), GNInstance::sup_norm()]
        .into_iter()
        .flatten()
    {
        eprintln!("kappa of {inst} = {}", inst.kappa);
    }
    match theory_exponents(alpha) {
        Ok(t) => eprintln!(
            "alpha = {}: kappa = {}, delta = {}",
            t.alpha, t.kappa, t.delta
        ),
        Err(e) => eprintln!("theory exponents unavailable: {e}"),
    }
    eprintln!("wrote {}", path.display());
    Ok(())
}

fn plotdata(series: &Path, out: &Path) -> CmdResult {
    let cols = read_columns(series)?;
    let t = cols
        .column("time")
        .ok_or_else(|| fail(4, format!("{}: no `time` column", series.display())))?;
    fs::create_dir_all(out)?;
    let mut written = 0;
    for name in cols.names.iter().filter(|n| *n != "time") {
        let y = cols.column(name).expect("name taken from the header");
        let mut text = format!("# time {name}\n");
        for (a, b) in t.iter().zip(&y) {
            text.push_str(&format!("{} {}\n", fmt_float(*a), fmt_float(*b)));
        }
        fs::write(out.join(format!("{name}.dat")), text)?;
        written += 1;
    }
    println!("wrote {written} files to {}", out.display());
    Ok(())
}

fn dispatch(cli: Cli) -> CmdResult {
    if let Some(t) = cli.threads {
        if t == 0 {
            return Err(fail(2, "--threads / TCM_THREADS must be at least 1"));
        }
        tcm_core::configure_threads(t).map_err(|e| fail(2, e))?;
    }
    log::debug!("{} worker threads", tcm_core::worker_count());
    match cli.command {
        Command::Simulate { config, resume } => simulate(&load_config(&config)?, resume.as_deref()),
        Command::Sweep { config, c0, out } => sweep(&load_config(&config)?, &c0, out),
        Command::Verify { config } => verify(&load_config(&config)?),
        Command::Inequalities {
            config,
            samples,
            seed,
            out,
        } => inequalities(&load_config(&config)?, samples, seed, out),
        Command::Plotdata { series, out } => plotdata(&series, &out),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
