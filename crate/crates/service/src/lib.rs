//! Frame-streaming front end for the renderer.
//!
//! The service owns one [`ViewerState`] (viewports, transfer function,
//! render settings) and a generation counter that advances on every accepted
//! update. A single worker renders the newest state whenever the generation
//! moves; frames reach websocket clients through a latest-wins slot.
//!
//! Endpoints:
//!
//! - `GET /info`: dataset statistics and the current state as JSON.
//! - `POST /state`: partial JSON update; answers `{"generation": g}`.
//! - `GET /stream`: websocket of binary frames, see [`protocol`].

pub mod protocol;
mod server;
pub mod state;

use std::path::Path;

use exabrick::commands::{CommandError, LoadedScene};

pub use protocol::{Frame, FrameHeader, ENCODING_RAW, HEADER_BYTES};
pub use server::{FrameRenderer, FrameSet, RenderedChannel, SceneRenderer, Service, ServiceError};
pub use state::{ChannelState, UpdateError, ViewerState};

/// Serves `service` on `listener` until the listener fails.
pub async fn serve(listener: tokio::net::TcpListener, service: Service) -> std::io::Result<()> {
    axum::serve(listener, service.router()).await
}

/// Loads the dataset named by `config` into `service` on a blocking thread.
pub async fn load_config(service: &Service, config: impl AsRef<Path>) -> Result<(), CommandError> {
    let config = config.as_ref().to_path_buf();
    let loaded = tokio::task::spawn_blocking(move || LoadedScene::load(config))
        .await
        .expect("loader thread")?;
    let info = loaded.info();
    service.load_scene(loaded.scene, info);
    Ok(())
}
