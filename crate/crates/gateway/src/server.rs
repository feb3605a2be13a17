//! Live session over WebSocket.
//!
//! One driver task owns the world and ticks it against absolute deadlines.
//! Each tick's snapshot is serialized once and fanned out to every viewer
//! over a broadcast channel. Commands travel to the driver over an mpsc
//! channel and are applied between ticks; the reply comes back on a oneshot.
//! The first connection to send a valid command becomes the owner until it
//! disconnects; commands from anyone else are refused.

use std::sync::{Arc, Mutex};
use std::time::Duration;

use futures_util::{SinkExt, StreamExt};
use serde_json::{Map, Value};
use tokio::net::{TcpListener, TcpStream};
use tokio::sync::{broadcast, mpsc, oneshot, watch};
use tokio::time::Instant;
use tokio_tungstenite::tungstenite::Message;

use pocketvine::contact_controller::ControllerConfig;
use pocketvine::vine_sim::scenario::{merge_fields, Scenario};
use pocketvine::vine_sim::{TouchTarget, World};

use crate::protocol::{parse_command, AckRecord, Command, CommandKind, ErrorRecord, SessionInfo, INVALID, NOT_OWNER};
use crate::snapshot::SessionSnapshot;

/// Snapshots a viewer may fall behind by before it is told it lagged.
pub const BROADCAST_CAPACITY: usize = 256;

#[derive(Debug, Clone, Copy)]
pub struct ServeOptions {
    /// Simulated seconds per wall second.
    pub speed: f64,
}

impl Default for ServeOptions {
    fn default() -> Self {
        Self { speed: 1.0 }
    }
}

struct Request {
    command: Command,
    reply: oneshot::Sender<String>,
}

struct Driver {
    world: World,
    paused: bool,
    epoch: u64,
    snapshots: broadcast::Sender<Arc<str>>,
    session: watch::Sender<Arc<str>>,
}

impl Driver {
    fn publish_session(&self) {
        let line: Arc<str> = SessionInfo::new(self.world.scenario(), self.epoch).to_line().into();
        let _ = self.session.send(line.clone());
        let _ = self.snapshots.send(line);
    }

    fn tick(&mut self) {
        self.world.tick();
        let line: Arc<str> = SessionSnapshot::capture(&self.world).to_line().into();
        // no receivers is fine: the session keeps running unwatched
        let _ = self.snapshots.send(line);
    }

    fn apply(&mut self, command: Command) -> String {
        let Command { req, kind } = command;
        let name = kind.name();
        let result = match kind {
            CommandKind::Touch { target, force, duration } => {
                if let TouchTarget::Pocket(id) = &target {
                    if !self.world.pockets().iter().any(|p| &p.pocket_id == id) {
                        return ErrorRecord::new(req, INVALID, format!("no pocket {id:?}")).to_line();
                    }
                }
                self.world.apply_touch(target, force, duration);
                Ok(())
            }
            CommandKind::Pause => {
                self.paused = true;
                Ok(())
            }
            CommandKind::Resume => {
                self.paused = false;
                Ok(())
            }
            CommandKind::Reset => {
                self.world.reset();
                self.epoch += 1;
                self.publish_session();
                Ok(())
            }
            CommandKind::Config(fields) => self.configure(fields),
        };
        match result {
            Ok(()) => AckRecord { req, ack: name, tick: self.world.ticks() }.to_line(),
            Err(detail) => ErrorRecord::new(req, INVALID, detail).to_line(),
        }
    }

    fn configure(&mut self, fields: Map<String, Value>) -> Result<(), String> {
        let cfg: ControllerConfig = merge_fields(self.world.controller_config(), Value::Object(fields))?;
        self.world.set_controller_config(cfg)
    }

    async fn run(mut self, mut commands: mpsc::Receiver<Request>, period: Duration) {
        let mut next = Instant::now() + period;
        loop {
            tokio::select! {
                biased;
                req = commands.recv() => {
                    let Some(req) = req else { return };
                    let was_paused = self.paused;
                    let reply = self.apply(req.command);
                    let _ = req.reply.send(reply);
                    if was_paused && !self.paused {
                        next = Instant::now() + period;
                    }
                }
                _ = tokio::time::sleep_until(next), if !self.paused => {
                    self.tick();
                    next += period;
                    // after a stall, resume the cadence instead of bursting
                    let now = Instant::now();
                    if next + period < now {
                        next = now + period;
                    }
                }
            }
        }
    }
}

/// Handle to a running session.
#[derive(Clone)]
pub struct Session {
    commands: mpsc::Sender<Request>,
    snapshots: broadcast::Sender<Arc<str>>,
    session: watch::Receiver<Arc<str>>,
    owner: Arc<Mutex<Option<u64>>>,
}

impl Session {
    /// Starts the driver task on the current runtime.
    pub fn start(scenario: Scenario, opts: ServeOptions) -> anyhow::Result<Self> {
        anyhow::ensure!(opts.speed.is_finite() && opts.speed > 0.0, "speed must be positive, got {}", opts.speed);
        let world = World::new(scenario).map_err(anyhow::Error::msg)?;
        let period = Duration::from_secs_f64(world.config().dt / opts.speed);
        let (snap_tx, _) = broadcast::channel(BROADCAST_CAPACITY);
        let first: Arc<str> = SessionInfo::new(world.scenario(), 0).to_line().into();
        let (session_tx, session_rx) = watch::channel(first);
        let (cmd_tx, cmd_rx) = mpsc::channel(64);
        let driver = Driver { world, paused: false, epoch: 0, snapshots: snap_tx.clone(), session: session_tx };
        tokio::spawn(driver.run(cmd_rx, period));
        Ok(Self { commands: cmd_tx, snapshots: snap_tx, session: session_rx, owner: Arc::new(Mutex::new(None)) })
    }

    /// Handles one client message from connection `conn`, returning the reply.
    pub async fn submit(&self, conn: u64, text: &str) -> String {
        let command = match parse_command(text) {
            Ok(c) => c,
            Err(e) => return e.to_line(),
        };
        {
            let mut owner = self.owner.lock().expect("owner lock");
            match *owner {
                None => *owner = Some(conn),
                Some(o) if o != conn => {
                    return ErrorRecord::new(command.req, NOT_OWNER, "another client controls this session").to_line();
                }
                Some(_) => {}
            }
        }
        let (tx, rx) = oneshot::channel();
        if self.commands.send(Request { command, reply: tx }).await.is_err() {
            return ErrorRecord::new(Value::Null, INVALID, "session stopped").to_line();
        }
        rx.await.unwrap_or_else(|_| ErrorRecord::new(Value::Null, INVALID, "session stopped").to_line())
    }

    /// Releases ownership held by `conn`.
    pub fn disconnect(&self, conn: u64) {
        let mut owner = self.owner.lock().expect("owner lock");
        if *owner == Some(conn) {
            *owner = None;
        }
    }

    pub fn subscribe(&self) -> broadcast::Receiver<Arc<str>> {
        self.snapshots.subscribe()
    }

    /// The current session record.
    pub fn session_line(&self) -> Arc<str> {
        self.session.borrow().clone()
    }
}

async fn handle(session: Session, conn: u64, stream: TcpStream) -> anyhow::Result<()> {
    let ws = tokio_tungstenite::accept_async(stream).await?;
    let (mut tx, mut rx) = ws.split();
    let mut snapshots = session.subscribe();
    tx.send(Message::Text(session.session_line().to_string())).await?;
    loop {
        tokio::select! {
            incoming = rx.next() => match incoming {
                Some(Ok(Message::Text(text))) => {
                    let reply = session.submit(conn, &text).await;
                    tx.send(Message::Text(reply)).await?;
                }
                Some(Ok(Message::Binary(_))) => {
                    let reply = ErrorRecord::new(Value::Null, crate::protocol::MALFORMED, "expected a text message");
                    tx.send(Message::Text(reply.to_line())).await?;
                }
                Some(Ok(Message::Close(_))) | None => break,
                Some(Ok(_)) => {}
                Some(Err(e)) => return Err(e.into()),
            },
            snap = snapshots.recv() => match snap {
                Ok(line) => tx.send(Message::Text(line.to_string())).await?,
                Err(broadcast::error::RecvError::Lagged(n)) => {
                    tx.send(Message::Text(serde_json::json!({ "lagged": n }).to_string())).await?;
                }
                Err(broadcast::error::RecvError::Closed) => break,
            },
        }
    }
    Ok(())
}

/// Accepts viewers on `listener` until the task is dropped.
pub async fn serve(listener: TcpListener, scenario: Scenario, opts: ServeOptions) -> anyhow::Result<()> {
    let session = Session::start(scenario, opts)?;
    let mut next_conn = 0u64;
    loop {
        let (stream, peer) = listener.accept().await?;
        next_conn += 1;
        let conn = next_conn;
        let session = session.clone();
        log::info!("viewer {conn} connected from {peer}");
        tokio::spawn(async move {
            if let Err(e) = handle(session.clone(), conn, stream).await {
                log::warn!("viewer {conn}: {e}");
            }
            session.disconnect(conn);
            log::info!("viewer {conn} disconnected");
        });
    }
}
