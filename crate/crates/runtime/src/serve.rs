use std::collections::HashMap;
use std::net::SocketAddr;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, Mutex};

use axum::extract::ws::{Message, WebSocket, WebSocketUpgrade};
use axum::extract::State;
use axum::response::{IntoResponse, Response};
use axum::routing::get;
use axum::Router;
use futures::{SinkExt, StreamExt};
use log::{debug, info};
use tokio::net::TcpListener;
use tokio::sync::{broadcast, mpsc, watch};

use crate::{ClientId, Command, CommandQueue, TelemetryFrame, TickOutput, SCRIPT_CLIENT};

type Frame = (u64, Arc<str>);

/// Fan-out point between the main loop and telemetry clients. The main
/// loop publishes each tick; clients get snapshots by broadcast and their
/// own replies by a private channel.
pub struct Hub {
    snapshots: broadcast::Sender<Frame>,
    latest: watch::Sender<Option<Frame>>,
    commands: Arc<CommandQueue>,
    clients: Mutex<HashMap<ClientId, mpsc::UnboundedSender<String>>>,
    next_client: AtomicU64,
}

impl Hub {
    pub fn new(commands: Arc<CommandQueue>) -> Arc<Self> {
        Arc::new(Hub {
            snapshots: broadcast::channel(64).0,
            latest: watch::channel(None).0,
            commands,
            clients: Mutex::new(HashMap::new()),
            next_client: AtomicU64::new(SCRIPT_CLIENT + 1),
        })
    }

    pub fn commands(&self) -> &Arc<CommandQueue> {
        &self.commands
    }

    pub fn client_count(&self) -> usize {
        self.clients.lock().expect("client table").len()
    }

    /// Called by the main loop once per tick.
    pub fn publish(&self, out: &TickOutput) {
        let text: Arc<str> = TelemetryFrame::Snapshot(Box::new(out.snapshot.clone())).to_json().into();
        let frame = (out.snapshot.tick, text);
        self.latest.send_replace(Some(frame.clone()));
        // no subscribers is fine
        let _ = self.snapshots.send(frame);
        let clients = self.clients.lock().expect("client table");
        for (client, reply) in &out.replies {
            if let Some(tx) = clients.get(client) {
                let _ = tx.send(reply.to_json());
            }
        }
    }

    pub fn router(self: &Arc<Self>) -> Router {
        Router::new().route("/ws", get(upgrade)).route("/snapshot", get(latest)).with_state(self.clone())
    }
}

async fn upgrade(ws: WebSocketUpgrade, State(hub): State<Arc<Hub>>) -> Response {
    ws.on_upgrade(move |socket| client(socket, hub))
}

async fn latest(State(hub): State<Arc<Hub>>) -> Response {
    let frame = hub.latest.borrow().clone();
    match frame {
        Some((_, text)) => ([("content-type", "application/json")], text.to_string()).into_response(),
        None => (axum::http::StatusCode::SERVICE_UNAVAILABLE, "no snapshot yet").into_response(),
    }
}

async fn client(socket: WebSocket, hub: Arc<Hub>) {
    let id = hub.next_client.fetch_add(1, Ordering::Relaxed);
    let (tx, mut replies) = mpsc::unbounded_channel();
    hub.clients.lock().expect("client table").insert(id, tx);
    let mut snaps = hub.snapshots.subscribe();
    let (mut sink, mut stream) = socket.split();
    debug!("telemetry client {id} connected");

    let mut last_tick = 0;
    let first = hub.latest.borrow().clone();
    if let Some((tick, text)) = first {
        last_tick = tick;
        if sink.send(Message::Text(text.to_string().into())).await.is_err() {
            hub.clients.lock().expect("client table").remove(&id);
            return;
        }
    }

    loop {
        let outgoing = tokio::select! {
            msg = stream.next() => match msg {
                Some(Ok(Message::Text(text))) => match Command::parse(text.as_str()) {
                    Ok(cmd) => {
                        hub.commands.push((id, cmd));
                        None
                    }
                    Err(message) => Some(TelemetryFrame::Error { message }.to_json()),
                },
                Some(Ok(Message::Binary(_))) => {
                    Some(TelemetryFrame::Error { message: "commands must be JSON text frames".into() }.to_json())
                }
                Some(Ok(Message::Close(_))) | Some(Err(_)) | None => break,
                Some(Ok(_)) => None,
            },
            snap = snaps.recv() => match snap {
                Ok((tick, text)) if tick > last_tick => {
                    last_tick = tick;
                    Some(text.to_string())
                }
                Ok(_) => None,
                Err(broadcast::error::RecvError::Lagged(n)) => {
                    debug!("telemetry client {id} skipped {n} snapshots");
                    None
                }
                Err(broadcast::error::RecvError::Closed) => break,
            },
            reply = replies.recv() => reply,
        };
        if let Some(text) = outgoing {
            if sink.send(Message::Text(text.into())).await.is_err() {
                break;
            }
        }
    }
    hub.clients.lock().expect("client table").remove(&id);
    debug!("telemetry client {id} disconnected");
}

/// Serves `/ws` (telemetry and commands) and `/snapshot` (latest snapshot
/// as plain JSON) until the listener fails.
pub async fn serve(listener: TcpListener, hub: Arc<Hub>) -> std::io::Result<()> {
    if let Ok(addr) = listener.local_addr() {
        info!("telemetry on ws://{addr}/ws");
    }
    axum::serve(listener, hub.router()).await
}

/// Binds `port` on all interfaces.
pub async fn bind(port: u16) -> std::io::Result<TcpListener> {
    TcpListener::bind(SocketAddr::from(([0, 0, 0, 0], port))).await
}
