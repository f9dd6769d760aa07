//! The live game over a websocket.
//!
//! Each connection owns one session and runs its tick loop. The client sends
//! `join` or `resume` first, then `input` messages; the server answers with
//! `welcome`, a `state` per tick, `episode_end` per episode and a final
//! `session_end`. Inputs are latched: the last one received before a tick
//! fires is the human's move for that tick, and no input means stay. In
//! lockstep mode the server instead steps once per input, which makes a
//! scripted client deterministic.
//!
//! Every finished episode is appended to `sessions/{id}/episodes.jsonl` and
//! synced before its `episode_end` goes out. A dropped connection loses the
//! episode in flight; `resume` continues from the next unplayed episode.

use std::collections::{HashMap, HashSet};
use std::path::PathBuf;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, Mutex};
use std::time::Duration;

use axum::extract::ws::{Message, WebSocket, WebSocketUpgrade};
use axum::extract::State;
use axum::http::{StatusCode, Uri};
use axum::response::{Html, IntoResponse, Response};
use axum::routing::get;
use axum::Router;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use stackel_core::bridge::{BridgeConfig, Episode, LiveAction, PunishmentPlan};
use stackel_core::Cents;
use tokio::net::TcpListener;
use tower_http::services::ServeDir;

use crate::episodes::append_episode;
use crate::harness::{
    read_session, session_dir, session_seed, solve_plan, write_session_info, Group, HarnessError, SessionDriver,
    SessionInfo, SESSION_EPISODES,
};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum ClientMessage {
    Join {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        config: Option<BridgeConfig>,
    },
    Input {
        episode: u32,
        tick: u32,
        action: LiveAction,
    },
    Resume {
        session_id: String,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ServerMessage {
    /// Sent once a session is attached. `episode` is the next one to play.
    Welcome {
        session_id: String,
        episode: u32,
        episodes: u32,
        approach_cells: u32,
        bridge_cells: u32,
        cumulative_cents: Cents,
    },
    State {
        episode: u32,
        tick: u32,
        sdc_cell: u32,
        human_cell: u32,
        horn: bool,
        elapsed_s: f64,
        cumulative_cents: Cents,
    },
    EpisodeEnd {
        payoff_cents: Cents,
        bullied: bool,
        next_mode_visible: bool,
    },
    SessionEnd {
        summary: SessionSummary,
    },
    Error {
        message: String,
    },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SessionSummary {
    pub session_id: String,
    pub payoffs_cents: Vec<Cents>,
    pub total_cents: Cents,
}

#[derive(Clone, Debug)]
pub struct ServerOptions {
    pub config: BridgeConfig,
    pub group: Group,
    pub episodes: u32,
    /// Session logs go under `out_dir/sessions`.
    pub out_dir: PathBuf,
    /// Web client bundle served at `/`.
    pub static_dir: Option<PathBuf>,
    /// Most sessions connected at once.
    pub capacity: usize,
    /// Wall-clock time between ticks; game time always advances by `tick_ms`.
    pub tick_interval: Duration,
    pub lockstep: bool,
    /// Base for session seeds and ids; fresh entropy when absent.
    pub seed: Option<u64>,
}

impl ServerOptions {
    pub fn new(config: BridgeConfig, out_dir: PathBuf) -> Self {
        ServerOptions {
            tick_interval: Duration::from_millis(config.tick_ms as u64),
            config,
            group: Group::Experimental,
            episodes: SESSION_EPISODES,
            out_dir,
            static_dir: None,
            capacity: 64,
            lockstep: false,
            seed: None,
        }
    }
}

pub struct AppState {
    opts: ServerOptions,
    plans: Mutex<HashMap<BridgeConfig, Arc<PunishmentPlan>>>,
    active: Mutex<HashSet<String>>,
    sessions_created: AtomicU64,
    ids: Mutex<ChaCha8Rng>,
}

impl AppState {
    /// Solves the punishing policy for the default config up front.
    pub fn new(opts: ServerOptions) -> Result<Arc<AppState>, HarnessError> {
        let plan = solve_plan(&opts.config)?;
        let ids = match opts.seed {
            Some(s) => ChaCha8Rng::seed_from_u64(s),
            None => ChaCha8Rng::from_entropy(),
        };
        Ok(Arc::new(AppState {
            plans: Mutex::new(HashMap::from([(opts.config, plan)])),
            active: Mutex::new(HashSet::new()),
            sessions_created: AtomicU64::new(0),
            ids: Mutex::new(ids),
            opts,
        }))
    }

    async fn plan_for(&self, cfg: &BridgeConfig) -> Result<Arc<PunishmentPlan>, String> {
        if let Some(p) = self.plans.lock().expect("plan cache").get(cfg) {
            return Ok(p.clone());
        }
        cfg.validate().map_err(|e| format!("invalid config: {e}"))?;
        let c = *cfg;
        let plan = tokio::task::spawn_blocking(move || solve_plan(&c))
            .await
            .map_err(|e| e.to_string())?
            .map_err(|e| e.to_string())?;
        self.plans.lock().expect("plan cache").insert(c, plan.clone());
        Ok(plan)
    }

    /// Claims a session for this connection, or says why not.
    fn claim(&self, id: &str) -> Result<ActiveGuard<'_>, String> {
        let mut active = self.active.lock().expect("active set");
        if active.contains(id) {
            return Err(format!("session {id} is already connected"));
        }
        if active.len() >= self.opts.capacity {
            return Err("server is at capacity".to_string());
        }
        active.insert(id.to_string());
        Ok(ActiveGuard {
            state: self,
            id: id.to_string(),
        })
    }

    async fn create(&self, config: Option<BridgeConfig>) -> Result<(SessionDriver, ActiveGuard<'_>), String> {
        let cfg = config.unwrap_or(self.opts.config);
        let plan = self.plan_for(&cfg).await?;
        let n = self.sessions_created.fetch_add(1, Ordering::SeqCst);
        let seed = match self.opts.seed {
            Some(base) => session_seed(base, n),
            None => rand::random(),
        };
        let id = loop {
            let id = format!("{:032x}", self.ids.lock().expect("id rng").gen::<u128>());
            if !session_dir(&self.opts.out_dir, &id).exists() {
                break id;
            }
        };
        let guard = self.claim(&id)?;
        let info = SessionInfo {
            session_id: id,
            group: self.opts.group,
            human: "live".to_string(),
            seed,
            episodes: self.opts.episodes,
            config: cfg,
        };
        write_session_info(&self.opts.out_dir, &info).map_err(|e| e.to_string())?;
        let driver = SessionDriver::new(&cfg, info.group, Some(plan), seed, info.episodes);
        Ok((driver, guard))
    }

    async fn resume(&self, id: &str) -> Result<(SessionDriver, ActiveGuard<'_>), String> {
        let dir = session_dir(&self.opts.out_dir, id);
        let valid = !id.is_empty() && id.chars().all(|c| c.is_ascii_alphanumeric() || c == '-' || c == '_');
        if !valid || !dir.join("session.json").is_file() {
            return Err(format!("unknown session {id}"));
        }
        let guard = self.claim(id)?;
        let rec = read_session(&dir).map_err(|e| e.to_string())?;
        let plan = self.plan_for(&rec.info.config).await?;
        let driver = SessionDriver::new(
            &rec.info.config,
            rec.info.group,
            Some(plan),
            rec.info.seed,
            rec.info.episodes,
        )
        .resume(rec.episodes);
        Ok((driver, guard))
    }
}

struct ActiveGuard<'a> {
    state: &'a AppState,
    id: String,
}

impl Drop for ActiveGuard<'_> {
    fn drop(&mut self) {
        self.state.active.lock().expect("active set").remove(&self.id);
    }
}

const PLACEHOLDER: &str = "<!doctype html>\n<title>stackel</title>\n<p>The web client is not installed. Start the server with <code>--static DIR</code> pointing at its bundle, or connect to <code>/ws</code> directly.</p>\n";

async fn healthz() -> &'static str {
    "ok"
}

async fn placeholder(uri: Uri) -> Response {
    if uri.path() == "/" || uri.path() == "/index.html" {
        Html(PLACEHOLDER).into_response()
    } else {
        StatusCode::NOT_FOUND.into_response()
    }
}

async fn ws_upgrade(ws: WebSocketUpgrade, State(state): State<Arc<AppState>>) -> Response {
    ws.on_upgrade(move |socket| async move {
        let mut conn = Connection { socket };
        if let Err(e) = conn.run(&state).await {
            tracing::debug!("connection ended: {e}");
        }
    })
}

pub fn router(state: Arc<AppState>) -> Router {
    let app = Router::new()
        .route("/healthz", get(healthz))
        .route("/ws", get(ws_upgrade));
    let app = match &state.opts.static_dir {
        Some(dir) => app.fallback_service(ServeDir::new(dir)),
        None => app.fallback(placeholder),
    };
    app.with_state(state)
}

pub async fn serve(listener: TcpListener, state: Arc<AppState>) -> std::io::Result<()> {
    axum::serve(listener, router(state)).await
}

/// Why a connection stopped early.
#[derive(Debug, thiserror::Error)]
enum ConnError {
    #[error("client went away")]
    Closed,
    #[error("socket: {0}")]
    Socket(#[from] axum::Error),
    #[error("{0}")]
    Session(String),
}

struct Connection {
    socket: WebSocket,
}

impl Connection {
    async fn send(&mut self, msg: &ServerMessage) -> Result<(), ConnError> {
        let text = serde_json::to_string(msg).expect("message serializes");
        self.socket.send(Message::Text(text.into())).await?;
        Ok(())
    }

    async fn fail(&mut self, message: String) -> ConnError {
        let _ = self
            .send(&ServerMessage::Error {
                message: message.clone(),
            })
            .await;
        ConnError::Session(message)
    }

    /// Next client message. Malformed text gets an error reply and is skipped.
    async fn recv(&mut self) -> Result<ClientMessage, ConnError> {
        loop {
            let text = match self.socket.recv().await {
                None | Some(Ok(Message::Close(_))) => return Err(ConnError::Closed),
                Some(Err(e)) => return Err(e.into()),
                Some(Ok(Message::Text(t))) => t.to_string(),
                Some(Ok(Message::Binary(b))) => String::from_utf8_lossy(&b).into_owned(),
                Some(Ok(_)) => continue,
            };
            match serde_json::from_str(&text) {
                Ok(m) => return Ok(m),
                Err(e) => {
                    self.send(&ServerMessage::Error {
                        message: format!("bad message: {e}"),
                    })
                    .await?
                }
            }
        }
    }

    async fn run(&mut self, state: &AppState) -> Result<(), ConnError> {
        let attached = match self.recv().await? {
            ClientMessage::Join { config } => state.create(config).await,
            ClientMessage::Resume { session_id } => state.resume(&session_id).await,
            ClientMessage::Input { .. } => Err("send join or resume first".to_string()),
        };
        let (mut driver, guard) = match attached {
            Ok(x) => x,
            Err(message) => return Err(self.fail(message).await),
        };
        let id = guard.id.clone();
        tracing::info!(session = %id, episode = driver.next_index(), "session attached");
        let cfg = *driver.config();
        self.send(&ServerMessage::Welcome {
            session_id: id.clone(),
            episode: driver.next_index(),
            episodes: driver.episodes(),
            approach_cells: cfg.approach_cells,
            bridge_cells: cfg.bridge_cells,
            cumulative_cents: driver.cumulative_cents(),
        })
        .await?;
        let log = session_dir(&state.opts.out_dir, &id).join("episodes.jsonl");
        loop {
            let ep = match driver.start_episode() {
                Ok(Some(ep)) => ep,
                Ok(None) => break,
                Err(e) => return Err(self.fail(e.to_string()).await),
            };
            let ep = self.play(state, ep, driver.cumulative_cents()).await?;
            let rec = driver.complete(ep);
            if let Err(e) = append_episode(rec, &log) {
                return Err(self.fail(format!("could not write the session log: {e}")).await);
            }
            let end = ServerMessage::EpisodeEnd {
                payoff_cents: rec.human_payoff_cents,
                bullied: rec.verdict.bullied,
                next_mode_visible: false,
            };
            self.send(&end).await?;
        }
        let summary = SessionSummary {
            session_id: id,
            payoffs_cents: driver.records().iter().map(|r| r.human_payoff_cents).collect(),
            total_cents: driver.cumulative_cents(),
        };
        self.send(&ServerMessage::SessionEnd { summary }).await?;
        drop(guard);
        Ok(())
    }

    fn state_message(ep: &Episode, cumulative_cents: Cents) -> ServerMessage {
        let s = ep.state();
        ServerMessage::State {
            episode: ep.index(),
            tick: s.tick,
            sdc_cell: s.sdc_cell,
            human_cell: s.human_cell,
            horn: s.horn,
            elapsed_s: s.elapsed_s(),
            cumulative_cents,
        }
    }

    /// Runs one episode's ticks to the end.
    async fn play(&mut self, state: &AppState, mut ep: Episode, cumulative: Cents) -> Result<Episode, ConnError> {
        self.send(&Self::state_message(&ep, cumulative)).await?;
        let mut interval = tokio::time::interval(state.opts.tick_interval);
        interval.set_missed_tick_behavior(tokio::time::MissedTickBehavior::Delay);
        interval.tick().await;
        let mut latched: Option<LiveAction> = None;
        while !ep.is_over() {
            if state.opts.lockstep {
                match self.recv().await? {
                    ClientMessage::Input { episode, tick, action }
                        if episode == ep.index() && tick == ep.state().tick =>
                    {
                        latched = Some(action)
                    }
                    ClientMessage::Input { .. } => continue,
                    _ => {
                        self.send(&ServerMessage::Error {
                            message: "session already attached".to_string(),
                        })
                        .await?;
                        continue;
                    }
                }
            } else {
                tokio::select! {
                    _ = interval.tick() => {}
                    msg = self.recv() => {
                        match msg? {
                            ClientMessage::Input { episode, action, .. } if episode == ep.index() => latched = Some(action),
                            ClientMessage::Input { .. } => {}
                            _ => self.send(&ServerMessage::Error { message: "session already attached".to_string() }).await?,
                        }
                        continue;
                    }
                }
            }
            let action = latched.take().unwrap_or(LiveAction::Stay);
            if let Err(e) = ep.step(action) {
                return Err(self.fail(e.to_string()).await);
            }
            self.send(&Self::state_message(&ep, cumulative)).await?;
        }
        Ok(ep)
    }
}
