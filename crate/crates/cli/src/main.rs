use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand};
use micromvp::netlink::transport::{DEFAULT_COMMAND_PORT, DEFAULT_TELEMETRY_PORT};
use micromvp::orchestrator::ScenarioKind;
use mvp_cli::serve::{ServeOptions, Server};
use mvp_cli::settings::{parse_workspace, Settings};

const DEFAULT_WS_PORT: u16 = 8080;

/// Simulated multi-vehicle testbed: scenarios, replay, planning and the live
/// console service. Settings may also come from a TOML file named by
/// MVP_CONFIG, using the flag names as keys; flags win.
#[derive(Parser)]
#[command(name = "mvp", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario in simulated time and record it.
    Run(RunArgs),
    /// Re-execute a recorded run and report the first divergence.
    Replay {
        #[arg(long)]
        log: Option<PathBuf>,
    },
    /// Serve telemetry, thrust frames and console commands.
    Serve(ServeArgs),
    /// Plan random start/goal pairs on a hex grid and print the records.
    PlanHex {
        /// Workspace size in meters, e.g. 1.5x0.9.
        #[arg(long)]
        workspace: Option<String>,
        #[arg(long)]
        robots: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
    },
}

#[derive(Args)]
struct ScenarioArgs {
    /// follow_drawn, sync_circle, minmax_hex or rvo_swap.
    #[arg(long)]
    scenario: Option<String>,
    #[arg(long)]
    vehicles: Option<usize>,
    /// Control loop rate [default: 30].
    #[arg(long)]
    hz: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    /// Thrust frame drop probability.
    #[arg(long)]
    drop: Option<f64>,
    /// Tracker position noise, meters.
    #[arg(long)]
    sigma_xy: Option<f64>,
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    scenario: ScenarioArgs,
    /// Pace ticks to the wall clock. Does not change the log.
    #[arg(long)]
    real_time: bool,
    /// Write the NDJSON run log here.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ServeArgs {
    #[command(flatten)]
    scenario: ScenarioArgs,
    #[arg(long)]
    telemetry_port: Option<u16>,
    #[arg(long)]
    command_port: Option<u16>,
    #[arg(long)]
    ws_port: Option<u16>,
    #[arg(long, default_value = "0.0.0.0")]
    host: String,
}

impl ScenarioArgs {
    fn settings(self) -> Settings {
        Settings {
            scenario: self.scenario,
            vehicles: self.vehicles,
            hz: self.hz,
            seed: self.seed,
            drop: self.drop,
            sigma_xy: self.sigma_xy,
            ..Default::default()
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    match execute(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn execute(cli: Cli) -> anyhow::Result<ExitCode> {
    let file = Settings::from_env()?;
    match cli.command {
        Command::Run(args) => {
            let flags = Settings {
                real_time: args.real_time.then_some(true),
                out: args.out,
                ..args.scenario.settings()
            };
            let s = file.overlay(flags);
            let cfg = s.scenario_config(ScenarioKind::SyncCircle)?;
            let log = mvp_cli::run(&cfg, s.real_time.unwrap_or(false))?;
            if let Some(path) = &s.out {
                mvp_cli::write_log(&log, path)?;
            }
            println!("{}", mvp_cli::summarize(&log));
            Ok(if log.complete() { ExitCode::SUCCESS } else { ExitCode::from(1) })
        }
        Command::Replay { log } => {
            let s = file.overlay(Settings {
                log,
                ..Default::default()
            });
            let path = s.log.context("--log is required")?;
            let report = mvp_cli::replay_file(&path)?;
            println!("{}", serde_json::to_string(&report)?);
            Ok(if report.is_clean() { ExitCode::SUCCESS } else { ExitCode::from(1) })
        }
        Command::Serve(args) => {
            let flags = Settings {
                telemetry_port: args.telemetry_port,
                command_port: args.command_port,
                ws_port: args.ws_port,
                ..args.scenario.settings()
            };
            let s = file.overlay(flags);
            let server = Server::start(ServeOptions {
                config: s.scenario_config(ScenarioKind::FollowDrawn)?,
                host: args.host,
                telemetry_port: s.telemetry_port.unwrap_or(DEFAULT_TELEMETRY_PORT),
                command_port: s.command_port.unwrap_or(DEFAULT_COMMAND_PORT),
                ws_port: s.ws_port.unwrap_or(DEFAULT_WS_PORT),
            })?;
            server.wait();
            Ok(ExitCode::SUCCESS)
        }
        Command::PlanHex { workspace, robots, seed } => {
            let s = file.overlay(Settings {
                workspace,
                robots,
                seed,
                ..Default::default()
            });
            let arena = parse_workspace(s.workspace.as_deref().unwrap_or("1.5x0.9"))?;
            let (records, found) = mvp_cli::plan_hex(arena, s.robots.unwrap_or(3), s.seed.unwrap_or(0))?;
            print!("{records}");
            Ok(if found { ExitCode::SUCCESS } else { ExitCode::from(1) })
        }
    }
}
