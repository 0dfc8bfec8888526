#![allow(dead_code)]

use std::sync::Arc;
use std::time::Duration;

use exabrick_service::{Frame, Service};
use futures::StreamExt;
use tokio::net::TcpStream;
use tokio_tungstenite::tungstenite::Message;
use tokio_tungstenite::{MaybeTlsStream, WebSocketStream};

pub type Socket = WebSocketStream<MaybeTlsStream<TcpStream>>;

/// Serves `service` on an ephemeral port; returns `host:port`.
pub async fn spawn(service: Service) -> String {
    let listener = tokio::net::TcpListener::bind("127.0.0.1:0").await.unwrap();
    let addr = listener.local_addr().unwrap().to_string();
    tokio::spawn(exabrick_service::serve(listener, service));
    addr
}

pub async fn connect(addr: &str) -> Socket {
    let (socket, _) = tokio_tungstenite::connect_async(format!("ws://{addr}/stream")).await.unwrap();
    socket
}

/// Next frame, or `None` if nothing arrives within `wait`.
pub async fn next_frame(socket: &mut Socket, wait: Duration) -> Option<Frame> {
    loop {
        match tokio::time::timeout(wait, socket.next()).await {
            Err(_) => return None,
            Ok(Some(Ok(Message::Binary(b)))) => return Some(Frame::decode(&b).unwrap()),
            Ok(Some(Ok(Message::Close(_)))) | Ok(None) => return None,
            Ok(Some(Ok(_))) => continue,
            Ok(Some(Err(e))) => panic!("websocket error: {e}"),
        }
    }
}

/// Reads frames until one carries generation `g`; returns every frame seen.
pub async fn frames_until(socket: &mut Socket, g: u64) -> Vec<Frame> {
    let mut seen = Vec::new();
    while seen.last().is_none_or(|f: &Frame| f.header.generation < g) {
        let f = next_frame(socket, Duration::from_secs(30)).await.expect("frame before timeout");
        seen.push(f);
    }
    seen
}

pub async fn post(client: &reqwest::Client, addr: &str, body: impl Into<reqwest::Body>) -> reqwest::Response {
    client
        .post(format!("http://{addr}/state"))
        .header("content-type", "application/json")
        .body(body)
        .send()
        .await
        .unwrap()
}

pub async fn info(client: &reqwest::Client, addr: &str) -> reqwest::Response {
    client.get(format!("http://{addr}/info")).send().await.unwrap()
}

pub fn arc<T>(t: T) -> Arc<T> {
    Arc::new(t)
}
