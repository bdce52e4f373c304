use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use pcopo::config::{parse_override, RunConfig};
use pcopo::ensemble::{calibrate_shot_noise, run_campaign};
use pcopo::figures::{self, FigureDataset};
use pcopo::stats::Pooling;
use pcopo::Error;

#[derive(Parser)]
#[command(name = "pcopo", version, about = "Photonic-crystal OPO noise simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct Common {
    /// JSON configuration file
    #[arg(long)]
    config: Option<PathBuf>,
    /// Configuration overrides, e.g. --pump.E=0.9 --campaign.n_trajectories=20
    #[arg(trailing_var_arg = true, allow_hyphen_values = true, value_name = "OVERRIDES")]
    overrides: Vec<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Thresholds of the four presets
    Threshold(Common),
    /// Intensity against pump and against wavenumber
    Fig1(Common),
    /// Joint quadrature variance against angle below and above threshold
    Fig2(Common),
    /// EPR and inseparability maps above threshold
    Fig3(Common),
    /// Raw campaign of the configured preset and pump
    Simulate(Common),
    /// Shot-noise calibration from undriven trajectories
    Calibrate(Common),
}

fn load(common: &Common) -> pcopo::Result<(RunConfig, PathBuf)> {
    let overrides = common
        .overrides
        .iter()
        .map(|a| parse_override(a))
        .collect::<pcopo::Result<Vec<_>>>()?;
    let cfg = RunConfig::load(common.config.as_deref(), &overrides)?;
    cfg.checked()?;
    let dir = figures::run_directory(&cfg)?;
    std::fs::create_dir_all(&dir)?;
    std::fs::write(dir.join("config.json"), serde_json::to_string_pretty(&cfg)? + "\n")?;
    Ok((cfg, dir))
}

fn emit(dir: &Path, datasets: &[&FigureDataset]) -> pcopo::Result<()> {
    for ds in datasets {
        for path in ds.write(dir)? {
            println!("{}", path.display());
        }
    }
    Ok(())
}

fn write_json<T: serde::Serialize>(dir: &Path, name: &str, value: &T) -> pcopo::Result<()> {
    let path = dir.join(name);
    std::fs::write(&path, serde_json::to_string_pretty(value)? + "\n")?;
    println!("{}", path.display());
    Ok(())
}

fn run(cli: Cli) -> pcopo::Result<()> {
    match cli.command {
        Command::Threshold(c) => {
            let (cfg, dir) = load(&c)?;
            let ds = figures::cmd_threshold(&cfg)?;
            for row in &ds.rows {
                if let (figures::Cell::Text(p), Some(e)) = (&row[0], row[1].as_f64()) {
                    eprintln!("{p:>10}  E_th = {e:.6}");
                }
            }
            emit(&dir, &[&ds])
        }
        Command::Fig1(c) => {
            let (cfg, dir) = load(&c)?;
            let (a, b) = figures::cmd_fig1(&cfg)?;
            emit(&dir, &[&a, &b])
        }
        Command::Fig2(c) => {
            let (cfg, dir) = load(&c)?;
            emit(&dir, &[&figures::cmd_fig2(&cfg)?])
        }
        Command::Fig3(c) => {
            let (cfg, dir) = load(&c)?;
            emit(&dir, &[&figures::cmd_fig3(&cfg)?])
        }
        Command::Simulate(c) => {
            let (cfg, dir) = load(&c)?;
            let spec = cfg.campaign(cfg.preset, cfg.pump_level()?, false)?;
            let result = run_campaign(&spec)?;
            let pair = &result.pairs[0];
            let summary = serde_json::json!({
                "pump": result.pump,
                "threshold": result.threshold.map(|t| t.pump),
                "mode": pair.mode,
                "k": pair.k,
                "intensity": pair.intensity_estimate()?,
                "anomalous": pair.anomalous_estimate()?,
                "invalid": result.invalid_count(),
                "equal_time_covariance": pair.equal_time(Pooling::WithinTrajectory)?,
            });
            write_json(&dir, "manifest.json", &result.manifest)?;
            write_json(&dir, "summary.json", &summary)?;
            write_json(&dir, "campaign.json", &result)
        }
        Command::Calibrate(c) => {
            let (cfg, dir) = load(&c)?;
            let spec = cfg.campaign(cfg.preset, cfg.pump_level().unwrap_or(pcopo::ensemble::PumpLevel::Absolute(0.0)), false)?;
            let cal = calibrate_shot_noise(&spec)?;
            write_json(&dir, "calibration.json", &cal)?;
            if cal.passed() {
                Ok(())
            } else {
                Err(Error::InsufficientStatistics(format!(
                    "vacuum occupation deviates from 1 by {:.4}",
                    cal.max_deviation
                )))
            }
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
