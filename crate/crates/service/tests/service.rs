mod common;

use std::sync::{Arc, Mutex};
use std::time::Duration;

use common::{connect, frames_until, info, next_frame, post, spawn};
use exabrick::commands::{self, DatasetInfo, ImageSize, RenderOptions};
use exabrick::io::{self, CameraSpec};
use exabrick::synth::{generate, SynthParams};
use exabrick::{AmrField, Cell, Scene};
use exabrick_service::{FrameRenderer, RenderedChannel, Service, ViewerState, HEADER_BYTES};
use serde_json::{json, Value};

fn single_cell() -> (Scene, DatasetInfo) {
    let scene = Scene::new(AmrField::new(vec![Cell::new([0, 0, 0], 0)], vec![0.5]).unwrap());
    let info = DatasetInfo::of(&scene, 20, None);
    (scene, info)
}

fn small_state(state: &ViewerState, width: u32, height: u32) -> Value {
    let mut ch = state.channels[0].clone();
    ch.width = width;
    ch.height = height;
    json!({ "channels": [ch] })
}

#[tokio::test]
async fn endpoints_answer_503_before_load() {
    let service = Service::new();
    let addr = spawn(service.clone()).await;
    let client = reqwest::Client::new();
    assert_eq!(info(&client, &addr).await.status(), 503);
    assert_eq!(post(&client, &addr, r#"{"settings": {"dt": 2}}"#).await.status(), 503);
    let err = tokio_tungstenite::connect_async(format!("ws://{addr}/stream")).await;
    assert!(err.is_err());

    let (scene, i) = single_cell();
    assert!(service.load_scene(scene.clone(), i.clone()));
    assert!(!service.load_scene(scene, i));
    assert_eq!(info(&client, &addr).await.status(), 200);
}

#[tokio::test]
async fn info_reports_dataset_and_state() {
    let service = Service::new();
    let (scene, i) = single_cell();
    service.load_scene(scene, i);
    let addr = spawn(service).await;
    let client = reqwest::Client::new();

    let (a, b) = tokio::join!(info(&client, &addr), info(&client, &addr));
    let a: Value = a.json().await.unwrap();
    let b: Value = b.json().await.unwrap();
    assert_eq!(a, b);
    assert_eq!(a["dataset"]["cells"], 1);
    assert_eq!(a["dataset"]["bricks"], 1);
    assert_eq!(a["dataset"]["abrs"], 1);
    assert_eq!(a["state"]["generation"], 0);
    let state: ViewerState = serde_json::from_value(a["state"].clone()).unwrap();
    assert_eq!(state.channels.len(), 1);
}

#[tokio::test]
async fn posts_merge_and_count_generations() {
    let service = Service::new();
    let (scene, i) = single_cell();
    service.load_scene(scene, i);
    let addr = spawn(service).await;
    let client = reqwest::Client::new();
    let before: Value = info(&client, &addr).await.json().await.unwrap();

    let r = post(&client, &addr, r#"{"settings": {"dt": 0.5}}"#).await;
    assert_eq!(r.status(), 200);
    assert_eq!(r.json::<Value>().await.unwrap()["generation"], 1);
    let after: Value = info(&client, &addr).await.json().await.unwrap();
    assert_eq!(after["state"]["settings"]["dt"], 0.5);
    assert_eq!(after["state"]["channels"], before["state"]["channels"]);

    for k in 0..5 {
        let body = json!({ "settings": { "dt": 1.0 + k as f64 } }).to_string();
        assert_eq!(post(&client, &addr, body).await.status(), 200);
    }
    let after: Value = info(&client, &addr).await.json().await.unwrap();
    assert_eq!(after["state"]["generation"], 6);
    assert_eq!(after["state"]["settings"]["dt"], 5.0);

    // rejected updates do not advance the generation
    let state: ViewerState = serde_json::from_value(after["state"].clone()).unwrap();
    let mut singular = state.channels[0].clone();
    singular.proj = [0.0; 16];
    let cases = [
        ("{not json".to_string(), 400),
        (r#"{"settings": {"dt": "big"}}"#.to_string(), 400),
        (r#"{"zoom": 2}"#.to_string(), 400),
        (json!({ "channels": [singular] }).to_string(), 422),
        (
            r#"{"tf": {"domain": [0, 1], "opacity_scale": 1, "entries": [[0,0,0,-0.5],[1,1,1,1]]}}"#.to_string(),
            422,
        ),
        (
            r#"{"tf": {"domain": [2, 2], "opacity_scale": 1, "entries": [[0,0,0,0],[1,1,1,1]]}}"#.to_string(),
            422,
        ),
        (r#"{"settings": {"dt": 500}}"#.to_string(), 422),
    ];
    for (body, status) in cases {
        let r = post(&client, &addr, body.clone()).await;
        assert_eq!(r.status(), status, "{body}");
        assert!(r.json::<Value>().await.unwrap()["error"].is_string());
    }
    let last: Value = info(&client, &addr).await.json().await.unwrap();
    assert_eq!(last["state"]["generation"], 6);
}

#[tokio::test]
async fn frames_follow_state_changes() {
    let service = Service::new();
    let (scene, i) = single_cell();
    service.load_scene(scene, i);
    let state = service.state().unwrap();
    let addr = spawn(service).await;
    let client = reqwest::Client::new();
    post(&client, &addr, small_state(&state, 40, 30).to_string()).await;

    let mut socket = connect(&addr).await;
    let frames = frames_until(&mut socket, 1).await;
    let f = frames.last().unwrap();
    assert_eq!((f.header.width, f.header.height, f.header.channel), (40, 30, 0));
    assert_eq!(f.payload.len(), 40 * 30 * 4);
    // nothing new without a mutation
    assert!(next_frame(&mut socket, Duration::from_millis(300)).await.is_none());

    post(&client, &addr, r#"{"settings": {"background": [1, 0, 0, 1]}}"#).await;
    let f = next_frame(&mut socket, Duration::from_secs(30)).await.unwrap();
    assert_eq!(f.header.generation, 2);
    assert_eq!(&f.payload[..4], &[255, 0, 0, 255]);

    // stereo: two channel frames per generation
    let mut right = state.channels[0].clone();
    right.width = 40;
    right.height = 30;
    let mut left = right.clone();
    left.view[3] += 0.1;
    post(&client, &addr, json!({ "channels": [left, right] }).to_string()).await;
    let a = next_frame(&mut socket, Duration::from_secs(30)).await.unwrap();
    let b = next_frame(&mut socket, Duration::from_secs(30)).await.unwrap();
    assert_eq!((a.header.generation, a.header.channel), (3, 0));
    assert_eq!((b.header.generation, b.header.channel), (3, 1));
}

#[tokio::test]
async fn unsupported_encoding_is_refused() {
    let service = Service::new();
    let (scene, i) = single_cell();
    service.load_scene(scene, i);
    let addr = spawn(service).await;
    assert!(tokio_tungstenite::connect_async(format!("ws://{addr}/stream?encoding=jpeg")).await.is_err());
    assert!(tokio_tungstenite::connect_async(format!("ws://{addr}/stream?encoding=raw")).await.is_ok());
}

/// Renders a 1x1 frame after a delay, recording each generation it saw.
struct SlowRenderer {
    seen: Mutex<Vec<u64>>,
    delay: Duration,
}

impl FrameRenderer for SlowRenderer {
    fn render(&self, state: &ViewerState) -> Result<Vec<RenderedChannel>, String> {
        self.seen.lock().unwrap().push(state.generation);
        std::thread::sleep(self.delay);
        Ok(vec![RenderedChannel {
            width: 1,
            height: 1,
            frame_time_ms: self.delay.as_secs_f64() * 1e3,
            rgba: vec![0, 0, 0, 255],
        }])
    }
}

#[tokio::test]
async fn bursts_render_only_the_newest_state() {
    let (scene, i) = single_cell();
    let renderer = Arc::new(SlowRenderer {
        seen: Mutex::new(Vec::new()),
        delay: Duration::from_millis(25),
    });
    let service = Service::new();
    service.load(i, ViewerState::initial(&scene), renderer.clone());
    let addr = spawn(service).await;
    let client = reqwest::Client::new();
    let mut socket = connect(&addr).await;

    for k in 0..100 {
        let body = json!({ "settings": { "dt": 0.5 + 0.01 * k as f64 } }).to_string();
        assert_eq!(post(&client, &addr, body).await.status(), 200);
    }
    let frames = frames_until(&mut socket, 100).await;
    let gens: Vec<u64> = frames.iter().map(|f| f.header.generation).collect();
    assert!(gens.windows(2).all(|w| w[0] < w[1]), "{gens:?}");
    assert_eq!(*gens.last().unwrap(), 100);
    assert!(next_frame(&mut socket, Duration::from_millis(200)).await.is_none());

    let seen = renderer.seen.lock().unwrap().clone();
    assert!(seen.windows(2).all(|w| w[0] < w[1]), "{seen:?}");
    assert_eq!(*seen.last().unwrap(), 100);
    assert!(seen.len() < 101, "intermediate states were skipped: {}", seen.len());
}

#[tokio::test]
async fn streamed_frame_matches_offline_render() {
    let dir = tempfile::TempDir::new().unwrap();
    let config = dir.path().join("s.cfg");
    commands::synth(
        &SynthParams {
            levels: 2,
            seed: 3,
            ..Default::default()
        },
        &config,
    )
    .unwrap();
    let scene = Scene::new(generate(&SynthParams {
        levels: 2,
        seed: 3,
        ..Default::default()
    }));
    let service = Service::new();
    exabrick_service::load_config(&service, &config).await.unwrap();
    let addr = spawn(service.clone()).await;
    let client = reqwest::Client::new();

    let state = service.state().unwrap();
    let mut update = small_state(&state, 48, 36);
    update["settings"] = json!({ "dt": 0.7, "iso": true, "iso_value": 0.4 });
    let r: Value = post(&client, &addr, update.to_string()).await.json().await.unwrap();
    let g = r["generation"].as_u64().unwrap();
    let mut socket = connect(&addr).await;
    let frame = frames_until(&mut socket, g).await.pop().unwrap();
    assert_eq!(frame.header.generation, g);

    let snapshot: ViewerState = serde_json::from_value(info(&client, &addr).await.json::<Value>().await.unwrap()["state"].clone()).unwrap();
    assert_eq!(snapshot.generation, g);
    let ch = &snapshot.channels[0];
    let camera = dir.path().join("camera.json");
    io::save_camera(
        &camera,
        &CameraSpec::Matrices {
            view: ch.view,
            proj: ch.proj,
        },
    )
    .unwrap();
    let tf = dir.path().join("tf.json");
    io::save_transfer_function(&tf, &snapshot.tf).unwrap();
    let opts = RenderOptions {
        size: ImageSize {
            width: ch.width,
            height: ch.height,
        },
        dt: snapshot.settings.dt,
        iso: Some(snapshot.settings.iso_value),
        ..Default::default()
    };
    let png = dir.path().join("offline.png");
    commands::render(&config, &camera, &tf, &opts, &png).unwrap();
    let offline = image::open(&png).unwrap().to_rgba8().into_raw();
    assert_eq!(frame.payload, offline);
    assert_eq!(frame.encode().len(), HEADER_BYTES + offline.len());
    assert_eq!(scene.field.len(), commands::info(&config).unwrap().cells);
}

#[tokio::test]
async fn zero_alpha_tf_streams_background_only() {
    let scene = Scene::new(AmrField::new(
        (0..8).map(|k| Cell::new([k & 1, (k >> 1) & 1, k >> 2], 0)).collect(),
        vec![0.5; 8],
    )
    .unwrap());
    let i = DatasetInfo::of(&scene, 0, None);
    let service = Service::new();
    service.load_scene(scene, i);
    let state = service.state().unwrap();
    let addr = spawn(service).await;
    let client = reqwest::Client::new();
    let mut update = small_state(&state, 32, 32);
    update["tf"] = json!({ "domain": [0, 1], "opacity_scale": 1, "entries": [[1, 1, 1, 1], [1, 1, 1, 1]] });
    post(&client, &addr, update.to_string()).await;
    let mut socket = connect(&addr).await;
    let lit = frames_until(&mut socket, 1).await.pop().unwrap();
    assert!(lit.payload.chunks(4).any(|p| p == [255, 255, 255, 255]));

    post(
        &client,
        &addr,
        r#"{"tf": {"domain": [0, 1], "opacity_scale": 1, "entries": [[1, 1, 1, 0], [1, 1, 1, 0]]}}"#,
    )
    .await;
    let dark = frames_until(&mut socket, 2).await.pop().unwrap();
    assert!(dark.payload.chunks(4).all(|p| p == [0, 0, 0, 255]));
}
