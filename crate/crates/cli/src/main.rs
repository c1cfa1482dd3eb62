use std::fs;
use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use freshlink_core::aoi::Duration;
use freshlink_core::follower::{UpdateQueue, DEFAULT_MAX_PAYLOAD};
use freshlink_core::leader::LeaderConfig;
use freshlink_core::scheduler::DEFAULT_WINDOW;
use freshlink_core::sim::QueueKind;
use freshlink_core::PolicyKind;

use freshlink_cli::config::{parse_followers, parse_sweep};
use freshlink_cli::metrics_csv::{parse_metrics_csv, write_metrics_csv};
use freshlink_cli::socket::{run_follower, run_leader, FollowerSettings, LeaderSettings};
use freshlink_cli::summary::summarize;
use freshlink_cli::{sweep, CliError};

#[derive(Debug, Parser)]
#[command(name = "freshlink", version, about = "Age-of-Information polling middleware")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Poll followers over UDP.
    Leader {
        #[arg(long, default_value = "0.0.0.0:7400")]
        bind: SocketAddr,
        /// File with one `id address` line per follower.
        #[arg(long)]
        followers: PathBuf,
        #[arg(long, default_value = "whittle")]
        policy: PolicyKind,
        #[arg(long, default_value_t = 300)]
        timeout_ms: u32,
        #[arg(long, default_value_t = DEFAULT_WINDOW)]
        window: usize,
        #[arg(long, default_value_t = 120)]
        sync_period_s: u32,
        /// Per-follower metrics CSV written on exit.
        #[arg(long)]
        metrics: Option<PathBuf>,
        #[arg(long, default_value_t = 60.0)]
        duration_s: f64,
    },
    /// Generate updates and answer polls over UDP.
    Follower {
        #[arg(long)]
        bind: SocketAddr,
        #[arg(long)]
        id: u16,
        #[arg(long, default_value = "lifo")]
        queue: QueueKind,
        #[arg(long, default_value_t = 30.0)]
        rate_fps: f64,
        /// FIFO capacity.
        #[arg(long, default_value_t = 20)]
        capacity: usize,
        #[arg(long, default_value_t = 6000)]
        payload_bytes: usize,
        #[arg(long, default_value_t = DEFAULT_MAX_PAYLOAD)]
        max_payload: usize,
        #[arg(long, default_value_t = 60.0)]
        duration_s: f64,
        #[arg(long, default_value_t = 0, allow_negative_numbers = true)]
        clock_offset_ms: i64,
    },
    /// Run simulations and write a metrics CSV.
    Sim {
        /// INI config; defaults are used when omitted.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
        /// `key=v1,v2,...`; repeat the flag to sweep several keys.
        #[arg(long)]
        sweep: Vec<String>,
        /// Runs per sweep point, on consecutive seeds.
        #[arg(long, default_value_t = 1)]
        repeat: u32,
    },
    /// Summarise a metrics CSV as tables (.txt) or a plot (.svg).
    Report {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
}

fn check_output(path: &Path) -> Result<(), CliError> {
    let parent = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    if parent.is_dir() {
        Ok(())
    } else {
        Err(CliError::Config(format!("{}: output directory does not exist", path.display())))
    }
}

fn seconds(flag: &str, s: f64) -> Result<Duration, CliError> {
    if s.is_finite() && s > 0.0 {
        Ok(Duration::from_secs_f64(s))
    } else {
        Err(CliError::Config(format!("{flag} must be positive, got {s}")))
    }
}

fn write(path: &Path, text: &str) -> Result<(), CliError> {
    fs::write(path, text).map_err(|e| CliError::Runtime(format!("{}: {e}", path.display())))
}

fn execute(command: Command) -> Result<(), CliError> {
    match command {
        Command::Leader { bind, followers, policy, timeout_ms, window, sync_period_s, metrics, duration_s } => {
            let followers = parse_followers(&read(&followers)?)
                .map_err(|e| CliError::Config(format!("{}: {e}", followers.display())))?;
            if let Some(path) = &metrics {
                check_output(path)?;
            }
            let settings = LeaderSettings {
                bind,
                followers,
                config: LeaderConfig {
                    policy,
                    timeout: Duration::from_millis(timeout_ms as i64),
                    window,
                    sync_period: Duration::from_secs(sync_period_s as i64),
                    ..LeaderConfig::default()
                },
                duration: seconds("--duration-s", duration_s)?,
            };
            let outcome = run_leader(&settings)?;
            if let Some(path) = &metrics {
                write_metrics_csv(std::slice::from_ref(&outcome.report), path)?;
            }
            let c = outcome.counters;
            println!(
                "polls={} responses={} timeouts={} late={} deliveries={} syncs={} sync_failures={}",
                c.polls, c.responses, c.timeouts, c.late_fragments, c.deliveries, c.syncs, c.sync_failures
            );
        }
        Command::Follower {
            bind,
            id,
            queue,
            rate_fps,
            capacity,
            payload_bytes,
            max_payload,
            duration_s,
            clock_offset_ms,
        } => {
            if capacity == 0 {
                return Err(CliError::Config("--capacity must be at least 1".into()));
            }
            if !(rate_fps.is_finite() && rate_fps > 0.0) {
                return Err(CliError::Config(format!("--rate-fps must be positive, got {rate_fps}")));
            }
            let interval = Duration::from_secs_f64(1.0 / rate_fps);
            let settings = FollowerSettings {
                bind,
                id,
                queue: match queue {
                    QueueKind::Lifo => UpdateQueue::lifo(),
                    QueueKind::Fifo => UpdateQueue::fifo(interval, capacity),
                },
                rate_fps,
                payload_bytes,
                max_payload,
                duration: seconds("--duration-s", duration_s)?,
                clock_offset: Duration::from_millis(clock_offset_ms),
            };
            let o = run_follower(&settings)?;
            println!(
                "id={id} polls={} targeted={} replies={} no_data={} acked={} released={} offered={} accepted={}",
                o.stats.polls_seen,
                o.stats.polls_targeted,
                o.replies,
                o.stats.no_data_sent,
                o.stats.fragments_acked,
                o.stats.updates_released,
                o.offered,
                o.accepted
            );
        }
        Command::Sim { config, out, sweep: sweeps, repeat } => {
            let text = match &config {
                Some(path) => read(path)?,
                None => String::new(),
            };
            check_output(&out)?;
            let sweeps = sweeps.iter().map(|s| parse_sweep(s)).collect::<Result<Vec<_>, _>>()?;
            let configs = sweep::expand(&text, &sweeps, repeat)?;
            log::info!("running {} simulations", configs.len());
            let reports = sweep::run_all(&configs)?;
            write_metrics_csv(&reports, &out)?;
        }
        Command::Report { input, out } => {
            let text = read(&input)?;
            check_output(&out)?;
            let rows = parse_metrics_csv(&text).map_err(|e| CliError::Config(format!("{}: {e}", input.display())))?;
            if rows.is_empty() {
                return Err(CliError::Config(format!("{}: no data rows", input.display())));
            }
            let summary = summarize(&rows);
            let rendered = if out.extension().is_some_and(|e| e == "svg") {
                summary.render_svg()
            } else {
                summary.render_tables()
            };
            write(&out, &rendered)?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("FRESHLINK_LOG", "warn")).init();
    let cli = Cli::parse();
    match execute(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let reason = e.to_string().replace('\n', " ");
            eprintln!("error: {reason}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
