//! HTTP and WebSocket front end.
//!
//! One task owns the [`Composer`] and processes client messages, scanner
//! ticks and finished synthesis jobs strictly in arrival order. Speech
//! synthesis runs on the blocking pool so a slow engine never delays ticks.

use std::future::Future;
use std::net::SocketAddr;
use std::time::Duration;

use axum::extract::ws::{Message, WebSocket, WebSocketUpgrade};
use axum::extract::State;
use axum::response::{IntoResponse, Response};
use axum::routing::get;
use axum::{Json, Router};
use futures::{SinkExt, StreamExt};
use tokio::sync::{broadcast, mpsc, oneshot};
use tower_http::services::ServeDir;

use super::composer::{Composer, Reply, SpeakJob};
use super::protocol::{ClientMessage, ComposerSnapshot, ServerMessage};
use super::ServiceError;
use crate::speech::{AudioBuffer, SpeechError};

enum Event {
    Client {
        raw: String,
        reply: oneshot::Sender<Vec<ServerMessage>>,
    },
    Hello(oneshot::Sender<Vec<ServerMessage>>),
    Snapshot(oneshot::Sender<ComposerSnapshot>),
    Tick(u64),
    SpeakDone {
        job: SpeakJob,
        result: Result<AudioBuffer, SpeechError>,
    },
}

/// Cheap handle for talking to the session loop.
#[derive(Clone)]
pub struct SessionHandle {
    events: mpsc::Sender<Event>,
    updates: broadcast::Sender<String>,
}

impl SessionHandle {
    /// Starts the session loop on the current runtime.
    pub fn spawn(composer: Composer) -> Self {
        let (events, rx) = mpsc::channel(256);
        let (updates, _) = broadcast::channel(256);
        tokio::spawn(session_loop(composer, rx, events.clone(), updates.clone()));
        Self { events, updates }
    }

    /// Sends a raw client message. State changes are broadcast to every
    /// subscriber; errors come back only to the caller.
    pub async fn request(&self, raw: String) -> Vec<ServerMessage> {
        let (reply, rx) = oneshot::channel();
        if self.events.send(Event::Client { raw, reply }).await.is_err() {
            return vec![ServerMessage::error("service is shutting down")];
        }
        rx.await
            .unwrap_or_else(|_| vec![ServerMessage::error("service is shutting down")])
    }

    pub async fn snapshot(&self) -> Option<ComposerSnapshot> {
        let (tx, rx) = oneshot::channel();
        self.events.send(Event::Snapshot(tx)).await.ok()?;
        rx.await.ok()
    }

    /// Full state and layout, for a newly connected client.
    pub async fn hello(&self) -> Vec<ServerMessage> {
        let (tx, rx) = oneshot::channel();
        if self.events.send(Event::Hello(tx)).await.is_err() {
            return Vec::new();
        }
        rx.await.unwrap_or_default()
    }

    pub async fn tick(&self, dt_ms: u64) {
        let _ = self.events.send(Event::Tick(dt_ms)).await;
    }

    pub fn subscribe(&self) -> broadcast::Receiver<String> {
        self.updates.subscribe()
    }
}

async fn session_loop(
    mut composer: Composer,
    mut rx: mpsc::Receiver<Event>,
    events: mpsc::Sender<Event>,
    updates: broadcast::Sender<String>,
) {
    let publish = |msgs: Vec<ServerMessage>| {
        for m in msgs {
            let _ = updates.send(m.to_json());
        }
    };
    while let Some(event) = rx.recv().await {
        match event {
            Event::Client { raw, reply } => {
                let msg = match ClientMessage::parse(&raw) {
                    Ok(m) => m,
                    Err(e) => {
                        let _ = reply.send(vec![ServerMessage::error(format!("bad message: {e}"))]);
                        continue;
                    }
                };
                let Reply { messages, job } = composer.handle(msg);
                let (errors, changes): (Vec<_>, Vec<_>) = messages.into_iter().partition(ServerMessage::is_error);
                publish(changes);
                let _ = reply.send(errors);
                if let Some(job) = job {
                    let events = events.clone();
                    tokio::task::spawn_blocking(move || {
                        let result = job.synthesize();
                        let _ = events.blocking_send(Event::SpeakDone { job, result });
                    });
                }
            }
            Event::Hello(tx) => {
                let _ = tx.send(vec![
                    ServerMessage::State(composer.snapshot()),
                    composer.layout_message(),
                ]);
            }
            Event::Snapshot(tx) => {
                let _ = tx.send(composer.snapshot());
            }
            Event::Tick(dt) => {
                if let Some(m) = composer.tick_scanner(dt) {
                    publish(vec![m]);
                }
            }
            Event::SpeakDone { job, result } => publish(composer.finish_speak(job, result)),
        }
    }
}

async fn ws_upgrade(ws: WebSocketUpgrade, State(session): State<SessionHandle>) -> Response {
    ws.on_upgrade(move |socket| client_connection(socket, session))
}

async fn client_connection(socket: WebSocket, session: SessionHandle) {
    let (mut sink, mut stream) = socket.split();
    let mut updates = session.subscribe();
    for m in session.hello().await {
        if sink.send(Message::Text(m.to_json().into())).await.is_err() {
            return;
        }
    }
    loop {
        tokio::select! {
            incoming = stream.next() => {
                let raw = match incoming {
                    Some(Ok(Message::Text(t))) => t.to_string(),
                    Some(Ok(Message::Binary(b))) => match String::from_utf8(b.to_vec()) {
                        Ok(s) => s,
                        Err(_) => {
                            let err = ServerMessage::error("bad message: not UTF-8 text");
                            if sink.send(Message::Text(err.to_json().into())).await.is_err() {
                                break;
                            }
                            continue;
                        }
                    },
                    Some(Ok(Message::Close(_))) | None | Some(Err(_)) => break,
                    Some(Ok(_)) => continue,
                };
                for m in session.request(raw).await {
                    if sink.send(Message::Text(m.to_json().into())).await.is_err() {
                        return;
                    }
                }
            }
            update = updates.recv() => {
                let json = match update {
                    Ok(json) => json,
                    Err(broadcast::error::RecvError::Lagged(_)) => match session.snapshot().await {
                        Some(s) => ServerMessage::State(s).to_json(),
                        None => break,
                    },
                    Err(broadcast::error::RecvError::Closed) => break,
                };
                if sink.send(Message::Text(json.into())).await.is_err() {
                    break;
                }
            }
        }
    }
}

async fn get_state(State(session): State<SessionHandle>) -> Response {
    match session.snapshot().await {
        Some(s) => Json(s).into_response(),
        None => (axum::http::StatusCode::SERVICE_UNAVAILABLE, "shutting down").into_response(),
    }
}

async fn no_ui() -> &'static str {
    "No UI bundle is installed. Connect a client to /ws or read /state.\n"
}

pub fn router(session: SessionHandle, ui_dir: Option<&std::path::Path>) -> Router {
    let app = Router::new()
        .route("/ws", get(ws_upgrade))
        .route("/state", get(get_state))
        .with_state(session);
    match ui_dir {
        Some(dir) => app.fallback_service(ServeDir::new(dir)),
        None => app.fallback(no_ui),
    }
}

/// A bound, not yet running server.
pub struct Server {
    listener: tokio::net::TcpListener,
    app: Router,
    session: SessionHandle,
    scan_period: Duration,
}

impl Server {
    /// Binds the UI port and starts the session loop. Must be called inside a
    /// Tokio runtime.
    pub async fn bind(
        addr: SocketAddr,
        composer: Composer,
        ui_dir: Option<&std::path::Path>,
    ) -> Result<Self, ServiceError> {
        let scan_period = Duration::from_millis(composer.scan_config().scan_period_ms());
        let session = SessionHandle::spawn(composer);
        let listener = tokio::net::TcpListener::bind(addr)
            .await
            .map_err(|e| ServiceError::Bind(addr, e))?;
        Ok(Self {
            listener,
            app: router(session.clone(), ui_dir),
            session,
            scan_period,
        })
    }

    pub fn local_addr(&self) -> std::io::Result<SocketAddr> {
        self.listener.local_addr()
    }

    pub fn session(&self) -> SessionHandle {
        self.session.clone()
    }

    /// Serves until `shutdown` resolves. The scanner is ticked once per scan
    /// period.
    pub async fn run(self, shutdown: impl Future<Output = ()> + Send + 'static) -> Result<(), ServiceError> {
        let ticker = {
            let session = self.session.clone();
            let period = self.scan_period;
            tokio::spawn(async move {
                let mut interval = tokio::time::interval(period);
                interval.set_missed_tick_behavior(tokio::time::MissedTickBehavior::Delay);
                interval.tick().await;
                loop {
                    interval.tick().await;
                    session.tick(period.as_millis() as u64).await;
                }
            })
        };
        let result = axum::serve(self.listener, self.app)
            .with_graceful_shutdown(shutdown)
            .await;
        ticker.abort();
        result.map_err(ServiceError::Io)
    }
}
