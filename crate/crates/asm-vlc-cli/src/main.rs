//! Command-line front end for the ASM VLC simulator.
//!
//! Exit codes: 0 on success, 2 for configuration errors (bad files, bad
//! flags), 3 for infeasible spectral-efficiency constraints.

use clap::{Args, Parser, Subcommand};
use std::path::PathBuf;
use std::process::ExitCode;

use asm_vlc::montecarlo::{simulate_ser, SimConfig};
use asm_vlc::optimizer::{asm_search, cr_asm_search, SearchReport};
use asm_vlc::sweep::{run_sweep, write_csv, Scheme, SweepSim, SweepSpec};
use asm_vlc::{
    average_ser, build_channel_matrix, snr_db_to_sigma, ChannelMatrix, Error, ModOrderCombo,
    Scenario,
};

#[derive(Parser)]
#[command(name = "asm-vlc", version, about = "Adaptive spatial modulation VLC link analysis")]
struct Cli {
    /// Worker threads for parallel sections (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print the Lambertian channel matrix of a scenario.
    Channel {
        #[arg(long)]
        scenario: PathBuf,
        /// Also write the matrix as JSON to this path.
        #[arg(long)]
        json: Option<PathBuf>,
    },
    /// Closed-form SER breakdown for one combination at one operating point.
    Theory {
        #[arg(long)]
        scenario: PathBuf,
        /// Modulation orders, e.g. "8,2".
        #[arg(long)]
        combo: String,
        #[command(flatten)]
        noise: NoiseArgs,
    },
    /// Monte-Carlo SER estimate for one combination at one operating point.
    Simulate {
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long)]
        combo: String,
        #[command(flatten)]
        noise: NoiseArgs,
        #[arg(long, default_value_t = 1_000_000)]
        trials: u64,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long)]
        batch_size: Option<u64>,
        /// Stop after this many errors.
        #[arg(long)]
        early_stop: Option<u64>,
    },
    /// Search for the best modulation-order combination at fixed efficiency.
    Optimize {
        #[arg(long)]
        scenario: PathBuf,
        /// Spectral efficiency in bits/s/Hz.
        #[arg(short, long)]
        m: f64,
        /// "asm" (exhaustive) or "cr-asm" (variance-pruned).
        #[arg(long, default_value = "asm")]
        scheme: String,
        #[command(flatten)]
        noise: NoiseArgs,
        /// Write the full report as JSON to this path.
        #[arg(long)]
        json: Option<PathBuf>,
    },
    /// SER-versus-SNR sweep over one or more schemes, written as CSV.
    Sweep(SweepArgs),
    /// Shorthand for a sweep over asm, cr-asm, sms and ssk.
    Compare(CompareArgs),
}

#[derive(Args)]
struct NoiseArgs {
    /// Operating SNR in dB (sigma = P * 10^(-SNR/20)).
    #[arg(long, conflicts_with = "sigma")]
    snr_db: Option<f64>,
    /// Noise standard deviation, set directly.
    #[arg(long)]
    sigma: Option<f64>,
}

impl NoiseArgs {
    fn sigma(&self, peak: f64) -> Result<f64, Error> {
        match (self.snr_db, self.sigma) {
            (Some(snr), None) => Ok(snr_db_to_sigma(snr, peak)),
            (None, Some(sigma)) => Ok(sigma),
            _ => Err(Error::Config(
                "exactly one of --snr-db and --sigma is required".into(),
            )),
        }
    }
}

#[derive(Args)]
struct SweepArgs {
    #[arg(long)]
    scenario: PathBuf,
    #[arg(short, long)]
    m: f64,
    /// Comma-separated subset of asm,cr-asm,sms,ssk,fixed.
    #[arg(long, default_value = "asm")]
    schemes: String,
    #[arg(long)]
    snr_start: f64,
    #[arg(long)]
    snr_stop: f64,
    #[arg(long, default_value_t = 2.0)]
    snr_step: f64,
    /// Fixed combination for the "fixed" scheme, e.g. "8,2".
    #[arg(long)]
    combo: Option<String>,
    /// Monte-Carlo trials per row; 0 for theory-only.
    #[arg(long, default_value_t = 0)]
    trials: u64,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long)]
    batch_size: Option<u64>,
    #[arg(long)]
    early_stop: Option<u64>,
    /// Output CSV path (stdout if omitted).
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct CompareArgs {
    #[command(flatten)]
    sweep: SweepArgs,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    #[cfg(feature = "parallel")]
    if let Some(threads) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    }
    #[cfg(not(feature = "parallel"))]
    let _ = cli.threads;
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::InfeasibleConstraint(_) => ExitCode::from(3),
                _ => ExitCode::from(2),
            }
        }
    }
}

fn load(scenario: &PathBuf) -> Result<(Scenario, ChannelMatrix), Error> {
    let scenario = Scenario::load(scenario)?;
    let h = build_channel_matrix(&scenario)?;
    Ok((scenario, h))
}

fn matrix_json(h: &ChannelMatrix) -> serde_json::Value {
    serde_json::json!({
        "n_rx": h.n_rx(),
        "n_tx": h.n_tx(),
        "gains": (0..h.n_rx())
            .map(|i| (0..h.n_tx()).map(|j| h.gain(i, j)).collect::<Vec<_>>())
            .collect::<Vec<_>>(),
    })
}

fn print_matrix(h: &ChannelMatrix) {
    print!("{:>8}", "");
    for j in 0..h.n_tx() {
        print!("{:>14}", format!("LED {}", j + 1));
    }
    println!();
    for i in 0..h.n_rx() {
        print!("{:>8}", format!("PD {}", i + 1));
        for j in 0..h.n_tx() {
            print!("{:>14.4e}", h.gain(i, j));
        }
        println!();
    }
    for j in h.dark_leds() {
        eprintln!("warning: LED {} is invisible to every PD", j + 1);
    }
}

fn parse_combo(text: &str, n_tx: usize) -> Result<ModOrderCombo, Error> {
    let combo = ModOrderCombo::parse(text)?;
    if combo.n_tx() != n_tx {
        return Err(Error::Config(format!(
            "combo {combo} has {} entries but the scenario has {n_tx} LEDs",
            combo.n_tx()
        )));
    }
    Ok(combo)
}

fn print_report(report: &SearchReport, scheme: &str) {
    println!("scheme:               {scheme}");
    println!("operating sigma:      {:.6e}", report.operating_sigma);
    println!("candidates total:     {}", report.candidates_total);
    println!("candidates evaluated: {}", report.candidates_evaluated);
    let note = if report.best_combo.orders().iter().all(|m| *m == 1) {
        " (SSK-equivalent)"
    } else {
        ""
    };
    println!("best combo:           {}{note}", report.best_combo);
    println!("best SER:             {:.6e}", report.best_ser);
    println!("ranked candidates:");
    for c in &report.ranked {
        println!("  {:>12}  ser {:.6e}  ln-ser {:.4}", c.combo.to_string(), c.ser, c.log_ser);
    }
}

fn run(command: Command) -> Result<(), Error> {
    match command {
        Command::Channel { scenario, json } => {
            let (_, h) = load(&scenario)?;
            print_matrix(&h);
            let doc = serde_json::to_string_pretty(&matrix_json(&h)).expect("static schema");
            match json {
                Some(path) => std::fs::write(&path, doc)
                    .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?,
                None => println!("{doc}"),
            }
            Ok(())
        }
        Command::Theory { scenario, combo, noise } => {
            let (s, h) = load(&scenario)?;
            let combo = parse_combo(&combo, h.n_tx())?;
            let sigma = noise.sigma(s.peak_intensity)?;
            let b = average_ser(&h, &combo, s.peak_intensity, sigma)?;
            println!("combo: {combo}  sigma: {sigma:.6e}");
            for (j, led) in b.per_led.iter().enumerate() {
                println!(
                    "LED {}: P_a {:.6e}  P_s {:.6e}  P_e {:.6e}",
                    j + 1,
                    led.spatial,
                    led.signal,
                    led.total
                );
            }
            println!("average SER: {:.6e}", b.average);
            Ok(())
        }
        Command::Simulate {
            scenario,
            combo,
            noise,
            trials,
            seed,
            batch_size,
            early_stop,
        } => {
            let (s, h) = load(&scenario)?;
            let combo = parse_combo(&combo, h.n_tx())?;
            let sigma = noise.sigma(s.peak_intensity)?;
            let mut config = SimConfig::new(trials, seed, sigma);
            if let Some(b) = batch_size {
                config.batch_size = b;
            }
            config.early_stop_errors = early_stop;
            let sim = simulate_ser(&h, &combo, s.peak_intensity, &config)?;
            let theory = average_ser(&h, &combo, s.peak_intensity, sigma)?.average;
            println!("combo: {combo}  sigma: {sigma:.6e}  seed: {seed}");
            println!(
                "simulated SER: {:.6e}  ({} errors / {} trials, std err {:.3e})",
                sim.ser_estimate, sim.error_count, sim.trials_run, sim.std_error
            );
            println!("theoretical SER: {theory:.6e}");
            println!(
                "spatial error rate: {:.6e}  signal|spatial-ok: {:.6e}",
                sim.spatial_error_rate, sim.signal_error_rate_given_spatial_correct
            );
            Ok(())
        }
        Command::Optimize { scenario, m, scheme, noise, json } => {
            let (s, h) = load(&scenario)?;
            let sigma = noise.sigma(s.peak_intensity)?;
            let report = match scheme.as_str() {
                "asm" => asm_search(&h, h.n_tx(), m, s.peak_intensity, sigma)?,
                "cr-asm" => cr_asm_search(&h, h.n_tx(), m, s.peak_intensity, sigma)?,
                other => {
                    return Err(Error::Config(format!(
                        "scheme must be asm or cr-asm, got {other:?}"
                    )))
                }
            };
            print_report(&report, &scheme);
            if let Some(path) = json {
                let doc = serde_json::to_string_pretty(&report).expect("serializable report");
                std::fs::write(&path, doc)
                    .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
            }
            Ok(())
        }
        Command::Sweep(args) => run_sweep_command(args, None),
        Command::Compare(args) => run_sweep_command(
            args.sweep,
            Some(vec![Scheme::Asm, Scheme::CrAsm, Scheme::Sms, Scheme::Ssk]),
        ),
    }
}

fn run_sweep_command(args: SweepArgs, schemes: Option<Vec<Scheme>>) -> Result<(), Error> {
    let schemes = match schemes {
        Some(s) => s,
        None => args
            .schemes
            .split(',')
            .filter(|t| !t.trim().is_empty())
            .map(|t| Scheme::parse(t.trim()))
            .collect::<Result<Vec<_>, _>>()?,
    };
    let combo_override = match &args.combo {
        Some(text) => Some(ModOrderCombo::parse(text)?),
        None => None,
    };
    let spec = SweepSpec {
        scenario_path: args.scenario,
        snr_start_db: args.snr_start,
        snr_stop_db: args.snr_stop,
        snr_step_db: args.snr_step,
        schemes,
        spectral_efficiency: args.m,
        combo_override,
        sim: SweepSim {
            trials: args.trials,
            seed: args.seed,
            early_stop_errors: args.early_stop,
            batch_size: args.batch_size,
        },
    };
    let rows = run_sweep(&spec)?;
    match args.output {
        Some(path) => {
            let mut buf = Vec::new();
            write_csv(&rows, &mut buf).expect("vec write cannot fail");
            std::fs::write(&path, buf)
                .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        }
        None => {
            let mut out = std::io::stdout().lock();
            write_csv(&rows, &mut out).map_err(|e| Error::Config(e.to_string()))?;
        }
    }
    Ok(())
}
