use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use anyhow::Context;
use clap::{Parser, Subcommand};
use stackel::config::load_config;
use stackel::frontier_csv::write_frontier_csv;
use stackel::harness::{read_sessions, run_session, session_seed, solve_plan, write_session, Group, HarnessError};
use stackel::money::{dollars, rational_text};
use stackel::policy_file::{parse_cap, write_policy, SolvedPolicy};
use stackel::server::{AppState, ServerOptions};
use stackel::stats::{fisher_exact, group_persistence, write_persistence_csv, ContingencyTable};
use stackel::tree_json::{read_tree, TreeFileError};
use stackel_core::bridge::{BridgeConfig, HumanModel, SolvedBridge};
use stackel_core::{extract_punishment, solve_frontier, unroll_policy, validate_tree, Cap, Owner};

#[derive(Parser)]
#[command(
    name = "stackel",
    version,
    about = "Stackelberg punishment solver and bridge-game experiment tools"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve a game tree from a JSON file under a cap on the follower's value.
    Solve {
        #[arg(long)]
        tree: PathBuf,
        /// Cap in cents, or `inf` for the plain equilibrium.
        #[arg(long, allow_hyphen_values = true)]
        theta: String,
        /// Where to write the leader policy.
        #[arg(long)]
        out: PathBuf,
        /// Also write every node's frontier as CSV.
        #[arg(long)]
        frontier_csv: Option<PathBuf>,
    },
    /// The bridge game.
    Bridge {
        #[command(subcommand)]
        command: BridgeCommand,
    },
    /// Run scripted sessions and write their logs.
    Simulate {
        /// always-bully, always-fair, adaptive:N, best-response or scripted:ACTION,...
        #[arg(long)]
        human: String,
        #[arg(long)]
        group: Group,
        #[arg(long, default_value_t = 20)]
        episodes: u32,
        /// Base seed; STACKEL_SEED overrides it.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 1)]
        sessions: u32,
        #[arg(long)]
        config: Option<PathBuf>,
        /// Punishment cap in cents; defaults to the config's.
        #[arg(long)]
        theta: Option<i64>,
    },
    /// Summarize session logs.
    Stats {
        #[arg(long)]
        logs: PathBuf,
        /// Run the Fisher exact test on the once/more-than-once table.
        #[arg(long)]
        fisher: bool,
        #[arg(long)]
        persistence_csv: Option<PathBuf>,
    },
    /// Serve the live game over a websocket.
    Serve {
        #[arg(long, default_value_t = 8080)]
        port: u16,
        #[arg(long, default_value = "127.0.0.1")]
        host: String,
        #[arg(long)]
        theta: Option<i64>,
        #[arg(long)]
        config: Option<PathBuf>,
        /// Session logs directory.
        #[arg(long, default_value = "logs")]
        out: PathBuf,
        /// Web client bundle to serve at /.
        #[arg(long = "static")]
        static_dir: Option<PathBuf>,
        #[arg(long, default_value = "experimental")]
        group: Group,
        /// Wall-clock milliseconds per tick; defaults to the config's tick length.
        #[arg(long)]
        tick_ms: Option<u64>,
        /// Advance one tick per client input instead of on a timer.
        #[arg(long)]
        lockstep: bool,
        #[arg(long, default_value_t = 64)]
        capacity: usize,
        /// Base seed for sessions; STACKEL_SEED overrides it.
        #[arg(long)]
        seed: Option<u64>,
    },
}

#[derive(Subcommand)]
enum BridgeCommand {
    /// Solve the bridge tree and extract the punishing policy.
    Solve {
        #[arg(long, allow_hyphen_values = true)]
        theta: i64,
        #[arg(long)]
        config: Option<PathBuf>,
        /// Name the regime and the block length.
        #[arg(long)]
        regime: bool,
        /// Write the root frontier as CSV.
        #[arg(long)]
        frontier_csv: Option<PathBuf>,
    },
}

/// Failures with their exit codes.
enum Failure {
    Infeasible(String),
    Parse(String),
    Other(anyhow::Error),
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::Other(e)
    }
}

fn seed_override(seed: u64) -> Result<u64, Failure> {
    match std::env::var("STACKEL_SEED") {
        Ok(s) => s
            .trim()
            .parse()
            .map_err(|_| Failure::Parse(format!("STACKEL_SEED '{s}' is not an unsigned integer"))),
        Err(_) => Ok(seed),
    }
}

fn config_from(path: Option<&Path>) -> Result<BridgeConfig, Failure> {
    load_config(path).map_err(|e| Failure::Parse(e.to_string()))
}

fn solve_tree(tree: &Path, theta: &str, out: &Path, frontier_csv: Option<&Path>) -> Result<(), Failure> {
    let cap = parse_cap(theta).ok_or_else(|| Failure::Parse(format!("--theta '{theta}' is not cents or inf")))?;
    let tree = read_tree(tree).map_err(|e| match e {
        TreeFileError::Io { .. } => Failure::Other(e.into()),
        e => Failure::Parse(e.to_string()),
    })?;
    let report = validate_tree(&tree);
    if !report.is_valid() {
        return Err(Failure::Parse(format!("invalid tree: {}", report.errors.join("; "))));
    }
    let map = solve_frontier(&tree).context("solving")?;
    let target =
        extract_punishment(map.root_frontier(), cap.clone()).map_err(|e| Failure::Infeasible(e.to_string()))?;
    let policy = unroll_policy(&tree, &map, &target).context("building the policy")?;
    let solved = SolvedPolicy {
        cap,
        value: target.value.clone(),
        policy,
    };
    write_policy(&tree, &solved, out).with_context(|| format!("writing {}", out.display()))?;
    if let Some(path) = frontier_csv {
        let f = File::create(path).with_context(|| format!("creating {}", path.display()))?;
        write_frontier_csv(BufWriter::new(f), &tree, &map, None).context("writing frontier CSV")?;
    }
    println!(
        "leader {} (${}), follower {} (${}), {} leader nodes in policy",
        rational_text(&target.value.leader),
        dollars(&target.value.leader),
        rational_text(&target.value.follower),
        dollars(&target.value.follower),
        solved.policy.len()
    );
    Ok(())
}

fn bridge_solve(theta: i64, config: Option<&Path>, regime: bool, frontier_csv: Option<&Path>) -> Result<(), Failure> {
    let cfg = config_from(config)?;
    let start = Instant::now();
    let solved = SolvedBridge::solve(&cfg);
    let elapsed = start.elapsed();
    let tree = &solved.game.tree;
    println!(
        "tree: {} nodes, {} leaves; max segments per node {}; solved in {:.2} s",
        tree.len(),
        tree.nodes_owned_by(Owner::Leaf).len(),
        solved.map.max_segments(),
        elapsed.as_secs_f64()
    );
    let report = solved
        .classify(Cap::cents(theta))
        .map_err(|e| Failure::Infeasible(format!("theta {theta}: {e}")))?;
    let t = &report.capped_target;
    println!(
        "theta {theta} cents: leader {} (${}), human {} (${})",
        rational_text(&t.value.leader),
        dollars(&t.value.leader),
        rational_text(&t.value.follower),
        dollars(&t.value.follower)
    );
    if regime {
        let steps = |s: Option<u32>| match s {
            Some(n) => format!("{n} abstract steps ({} s)", n * cfg.seconds_per_step),
            None => "none".to_string(),
        };
        println!("regime: {}", report.label);
        println!("block length: {}", steps(report.block_steps));
        println!(
            "capped policy: {}, block length {}",
            report.capped_label,
            steps(report.capped_block_steps)
        );
    }
    if let Some(path) = frontier_csv {
        let f = File::create(path).with_context(|| format!("creating {}", path.display()))?;
        write_frontier_csv(BufWriter::new(f), tree, &solved.map, Some(&[tree.root()]))
            .context("writing frontier CSV")?;
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn simulate(
    human: &str,
    group: Group,
    episodes: u32,
    seed: u64,
    out: &Path,
    sessions: u32,
    config: Option<&Path>,
    theta: Option<i64>,
) -> Result<(), Failure> {
    let model: HumanModel = human
        .parse()
        .map_err(|e: stackel_core::bridge::ParseModelError| Failure::Parse(e.to_string()))?;
    let mut cfg = config_from(config)?;
    if let Some(t) = theta {
        cfg.theta = t;
        cfg.validate().map_err(|e| Failure::Parse(format!("--theta: {e}")))?;
    }
    let seed = seed_override(seed)?;
    let plan = match group {
        Group::Experimental => Some(solve_plan(&cfg).map_err(|e| match e {
            HarnessError::Infeasible(x) => Failure::Infeasible(x.to_string()),
            e => Failure::Other(e.into()),
        })?),
        Group::Control => None,
    };
    let tag: String = human
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() { c } else { '-' })
        .collect();
    for i in 0..sessions {
        let id = format!("{group}-{tag}-{seed}-{i:03}");
        let s = run_session(
            &id,
            model.clone(),
            group,
            episodes,
            &cfg,
            plan.clone(),
            session_seed(seed, i as u64),
        )
        .with_context(|| format!("session {id}"))?;
        write_session(out, &s).with_context(|| format!("writing session {id}"))?;
        println!(
            "{id}: {} bully events, earned {}",
            s.bully_events(),
            stackel::money::dollars_from_cents(s.total_cents())
        );
    }
    Ok(())
}

fn stats(logs: &Path, fisher: bool, persistence_csv: Option<&Path>) -> Result<(), Failure> {
    let sessions = read_sessions(logs).map_err(|e| Failure::Parse(e.to_string()))?;
    for g in [Group::Control, Group::Experimental] {
        let mine: Vec<_> = sessions.iter().filter(|s| s.group() == g).collect();
        let events: u32 = mine.iter().map(|s| s.bully_events()).sum();
        let bullied = mine.iter().filter(|s| s.bully_events() > 0).count();
        println!(
            "{g}: {} sessions, {bullied} bullied at least once, {events} bully events",
            mine.len()
        );
    }
    let table = ContingencyTable::from_sessions(&sessions);
    let [[a, b], [c, d]] = table.counts;
    println!("bullied once:      control {a}, experimental {b}");
    println!("bullied more:      control {c}, experimental {d}");
    if fisher {
        let p = fisher_exact(&table).map_err(|e| Failure::Other(anyhow::anyhow!("fisher: {e}")))?;
        println!("fisher exact (two-tailed) p = {p:.6}");
    }
    if let Some(path) = persistence_csv {
        let control = group_persistence(&sessions, Group::Control).ok();
        let experimental = group_persistence(&sessions, Group::Experimental).ok();
        if control.is_none() && experimental.is_none() {
            return Err(Failure::Other(anyhow::anyhow!("persistence: no session bullied")));
        }
        let f = File::create(path).with_context(|| format!("creating {}", path.display()))?;
        write_persistence_csv(BufWriter::new(f), control.as_ref(), experimental.as_ref())
            .context("writing persistence CSV")?;
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn serve(
    port: u16,
    host: &str,
    theta: Option<i64>,
    config: Option<&Path>,
    out: PathBuf,
    static_dir: Option<PathBuf>,
    group: Group,
    tick_ms: Option<u64>,
    lockstep: bool,
    capacity: usize,
    seed: Option<u64>,
) -> Result<(), Failure> {
    let mut cfg = config_from(config)?;
    if let Some(t) = theta {
        cfg.theta = t;
        cfg.validate().map_err(|e| Failure::Parse(format!("--theta: {e}")))?;
    }
    let seed = match (std::env::var("STACKEL_SEED").is_ok(), seed) {
        (true, s) => Some(seed_override(s.unwrap_or(0))?),
        (false, s) => s,
    };
    let mut opts = ServerOptions::new(cfg, out);
    opts.static_dir = static_dir;
    opts.group = group;
    opts.lockstep = lockstep;
    opts.capacity = capacity;
    opts.seed = seed;
    if let Some(ms) = tick_ms {
        opts.tick_interval = Duration::from_millis(ms);
    }
    let state = AppState::new(opts).map_err(|e| match e {
        HarnessError::Infeasible(x) => Failure::Infeasible(x.to_string()),
        e => Failure::Other(e.into()),
    })?;
    let rt = tokio::runtime::Runtime::new().context("starting the runtime")?;
    rt.block_on(async {
        let listener = tokio::net::TcpListener::bind((host, port))
            .await
            .with_context(|| format!("binding {host}:{port}"))?;
        tracing::info!("listening on {}", listener.local_addr()?);
        stackel::server::serve(listener, state).await.context("server")
    })?;
    Ok(())
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Solve {
            tree,
            theta,
            out,
            frontier_csv,
        } => solve_tree(&tree, &theta, &out, frontier_csv.as_deref()),
        Command::Bridge {
            command:
                BridgeCommand::Solve {
                    theta,
                    config,
                    regime,
                    frontier_csv,
                },
        } => bridge_solve(theta, config.as_deref(), regime, frontier_csv.as_deref()),
        Command::Simulate {
            human,
            group,
            episodes,
            seed,
            out,
            sessions,
            config,
            theta,
        } => simulate(&human, group, episodes, seed, &out, sessions, config.as_deref(), theta),
        Command::Stats {
            logs,
            fisher,
            persistence_csv,
        } => stats(&logs, fisher, persistence_csv.as_deref()),
        Command::Serve {
            port,
            host,
            theta,
            config,
            out,
            static_dir,
            group,
            tick_ms,
            lockstep,
            capacity,
            seed,
        } => serve(
            port,
            &host,
            theta,
            config.as_deref(),
            out,
            static_dir,
            group,
            tick_ms,
            lockstep,
            capacity,
            seed,
        ),
    }
}

fn main() -> ExitCode {
    tracing_subscriber::fmt()
        .with_env_filter(tracing_subscriber::EnvFilter::try_from_default_env().unwrap_or_else(|_| "info".into()))
        .with_writer(std::io::stderr)
        .init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(3);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Infeasible(m)) => {
            eprintln!("error: infeasible cap: {m}");
            ExitCode::from(2)
        }
        Err(Failure::Parse(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(3)
        }
        Err(Failure::Other(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
