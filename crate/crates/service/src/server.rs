use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use axum::body::Bytes;
use axum::extract::ws::{Message, WebSocket, WebSocketUpgrade};
use axum::extract::{Query, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use exabrick::commands::{render_channels, DatasetInfo};
use exabrick::{Renderer, Scene};
use serde::Serialize;
use serde_json::json;
use tokio::sync::watch;

use crate::protocol::{Frame, FrameHeader, ENCODING_RAW};
use crate::state::{UpdateError, ViewerState};

/// One channel's rendered pixels, RGBA8 rows from the top down.
#[derive(Clone, Debug, PartialEq)]
pub struct RenderedChannel {
    pub width: u32,
    pub height: u32,
    pub frame_time_ms: f64,
    pub rgba: Vec<u8>,
}

/// Turns a state snapshot into one image per channel.
pub trait FrameRenderer: Send + Sync + 'static {
    fn render(&self, state: &ViewerState) -> Result<Vec<RenderedChannel>, String>;
}

/// The real renderer over a loaded scene.
pub struct SceneRenderer {
    scene: Scene,
    renderer: Renderer,
}

impl SceneRenderer {
    pub fn new(scene: Scene) -> Self {
        Self {
            scene,
            renderer: Renderer::default(),
        }
    }

    pub fn scene(&self) -> &Scene {
        &self.scene
    }
}

impl FrameRenderer for SceneRenderer {
    fn render(&self, state: &ViewerState) -> Result<Vec<RenderedChannel>, String> {
        let outcome = render_channels(
            &self.scene,
            state.render_channels(),
            &state.tf,
            &state.settings,
            &self.renderer,
        )
        .map_err(|e| e.to_string())?;
        Ok(outcome
            .channels
            .into_iter()
            .zip(outcome.report.channels)
            .map(|(ch, stats)| RenderedChannel {
                width: ch.width,
                height: ch.height,
                frame_time_ms: stats.frame_time_ms,
                rgba: ch.framebuffer,
            })
            .collect())
    }
}

/// All channel frames of one generation.
#[derive(Clone, Debug, PartialEq)]
pub struct FrameSet {
    pub generation: u64,
    pub frames: Vec<Frame>,
}

struct Loaded {
    info: DatasetInfo,
    renderer: Arc<dyn FrameRenderer>,
}

struct Inner {
    loaded: OnceLock<Loaded>,
    /// Serializes merges so generations are assigned in publish order.
    merge: Mutex<()>,
    state: watch::Sender<Option<Arc<ViewerState>>>,
    frames: watch::Sender<Option<Arc<FrameSet>>>,
}

/// Shared service handle; cheap to clone.
#[derive(Clone)]
pub struct Service {
    inner: Arc<Inner>,
}

impl Default for Service {
    fn default() -> Self {
        Self::new()
    }
}

#[derive(Serialize)]
struct InfoBody<'a> {
    dataset: &'a DatasetInfo,
    state: &'a ViewerState,
}

impl Service {
    /// A service with no dataset yet; endpoints answer 503 until
    /// [`Service::load`].
    pub fn new() -> Self {
        Self {
            inner: Arc::new(Inner {
                loaded: OnceLock::new(),
                merge: Mutex::new(()),
                state: watch::channel(None).0,
                frames: watch::channel(None).0,
            }),
        }
    }

    /// Installs the dataset and initial state and starts the render worker.
    /// Must be called from within a tokio runtime. Returns `false` if a
    /// dataset was already loaded.
    pub fn load(&self, info: DatasetInfo, initial: ViewerState, renderer: Arc<dyn FrameRenderer>) -> bool {
        if self.inner.loaded.set(Loaded { info, renderer }).is_err() {
            return false;
        }
        self.inner.state.send_replace(Some(Arc::new(initial)));
        tokio::spawn(render_worker(self.inner.clone()));
        true
    }

    /// Loads a scene with the real renderer and the default initial view.
    pub fn load_scene(&self, scene: Scene, info: DatasetInfo) -> bool {
        let initial = ViewerState::initial(&scene);
        self.load(info, initial, Arc::new(SceneRenderer::new(scene)))
    }

    pub fn is_loaded(&self) -> bool {
        self.inner.loaded.get().is_some()
    }

    pub fn state(&self) -> Option<Arc<ViewerState>> {
        self.inner.state.borrow().clone()
    }

    /// Merges a JSON update and schedules a render. Returns the new state.
    pub fn update(&self, body: &[u8]) -> Result<Arc<ViewerState>, ServiceError> {
        let _guard = self.inner.merge.lock().unwrap_or_else(|e| e.into_inner());
        let current = self.state().ok_or(ServiceError::NotLoaded)?;
        let next = Arc::new(current.apply(body)?);
        self.inner.state.send_replace(Some(next.clone()));
        Ok(next)
    }

    /// Latest rendered frames, newest generation only.
    pub fn frames(&self) -> watch::Receiver<Option<Arc<FrameSet>>> {
        self.inner.frames.subscribe()
    }

    pub fn router(&self) -> Router {
        Router::new()
            .route("/info", get(get_info))
            .route("/state", post(post_state))
            .route("/stream", get(stream))
            .with_state(self.clone())
    }
}

#[derive(Debug, thiserror::Error)]
pub enum ServiceError {
    #[error("dataset not loaded yet")]
    NotLoaded,
    #[error(transparent)]
    Update(#[from] UpdateError),
}

impl IntoResponse for ServiceError {
    fn into_response(self) -> Response {
        let status = match &self {
            ServiceError::NotLoaded => StatusCode::SERVICE_UNAVAILABLE,
            ServiceError::Update(UpdateError::Malformed(_)) => StatusCode::BAD_REQUEST,
            ServiceError::Update(UpdateError::Invalid(_)) => StatusCode::UNPROCESSABLE_ENTITY,
        };
        (status, Json(json!({ "error": self.to_string() }))).into_response()
    }
}

/// Renders whenever the state generation moves past the last rendered one,
/// always from the newest snapshot.
async fn render_worker(inner: Arc<Inner>) {
    let Some(loaded) = inner.loaded.get() else { return };
    let renderer = loaded.renderer.clone();
    let mut rx = inner.state.subscribe();
    let mut last: Option<u64> = None;
    loop {
        let snapshot = rx.borrow_and_update().clone();
        if let Some(state) = snapshot.filter(|s| Some(s.generation) != last) {
            let r = renderer.clone();
            let s = state.clone();
            match tokio::task::spawn_blocking(move || r.render(&s)).await {
                Ok(Ok(channels)) => {
                    let frames = channels
                        .into_iter()
                        .enumerate()
                        .map(|(k, c)| Frame {
                            header: FrameHeader {
                                generation: state.generation,
                                channel: k as u32,
                                width: c.width,
                                height: c.height,
                                encoding: ENCODING_RAW,
                                frame_time_ms: c.frame_time_ms,
                            },
                            payload: c.rgba,
                        })
                        .collect();
                    inner.frames.send_replace(Some(Arc::new(FrameSet {
                        generation: state.generation,
                        frames,
                    })));
                }
                Ok(Err(e)) => eprintln!("render of generation {} failed: {e}", state.generation),
                Err(e) => eprintln!("render of generation {} panicked: {e}", state.generation),
            }
            last = Some(state.generation);
            continue;
        }
        if rx.changed().await.is_err() {
            return;
        }
    }
}

async fn get_info(State(service): State<Service>) -> Result<Response, ServiceError> {
    let loaded = service.inner.loaded.get().ok_or(ServiceError::NotLoaded)?;
    let state = service.state().ok_or(ServiceError::NotLoaded)?;
    Ok(Json(InfoBody {
        dataset: &loaded.info,
        state: &state,
    })
    .into_response())
}

async fn post_state(State(service): State<Service>, body: Bytes) -> Result<Response, ServiceError> {
    let next = service.update(&body)?;
    Ok(Json(json!({ "generation": next.generation })).into_response())
}

async fn stream(
    State(service): State<Service>,
    Query(params): Query<HashMap<String, String>>,
    ws: WebSocketUpgrade,
) -> Response {
    if let Some(enc) = params.get("encoding") {
        if enc != "raw" {
            return (
                StatusCode::BAD_REQUEST,
                Json(json!({ "error": format!("unsupported encoding `{enc}`") })),
            )
                .into_response();
        }
    }
    if !service.is_loaded() {
        return ServiceError::NotLoaded.into_response();
    }
    let frames = service.frames();
    ws.on_upgrade(move |socket| push_frames(socket, frames))
}

/// Sends each newer frame set once. A slow client only ever has the latest
/// set waiting; older ones are overwritten in the watch slot.
async fn push_frames(mut socket: WebSocket, mut frames: watch::Receiver<Option<Arc<FrameSet>>>) {
    let mut sent: Option<u64> = None;
    loop {
        let current = frames.borrow_and_update().clone();
        if let Some(set) = current.filter(|s| sent.is_none_or(|g| s.generation > g)) {
            for frame in &set.frames {
                if socket.send(Message::Binary(frame.encode().into())).await.is_err() {
                    return;
                }
            }
            sent = Some(set.generation);
            continue;
        }
        tokio::select! {
            changed = frames.changed() => {
                if changed.is_err() {
                    return;
                }
            }
            msg = socket.recv() => match msg {
                Some(Ok(Message::Close(_))) | None | Some(Err(_)) => return,
                Some(Ok(_)) => {}
            },
        }
    }
}
