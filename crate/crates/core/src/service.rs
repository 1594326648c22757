//! HTTP front end for the tuner UI.
//!
//! - `POST /images` (multipart, one file field) stores an upload under the
//!   hex SHA-256 of its bytes and answers `{image_id, width, height}`.
//! - `POST /triangulate` takes `{image_id, config}` and answers with the
//!   final PNG (base64), the mesh, the stats and, when `config.dump_stages`
//!   is set, URLs of the stage images. Bodies are cached by
//!   `(image_id, config)`, so a repeated request returns identical bytes.
//!   Stage timings travel in the `Server-Timing` header, not the body.
//! - `GET /results/{result_id}/{stage}.png` serves a stage image.
//! - Everything else is the static UI bundle, when one is configured.
//!
//! Uploads and results share one LRU cache with a byte budget.

use std::net::SocketAddr;
use std::path::PathBuf;
use std::sync::{Arc, Mutex};

use axum::body::Bytes;
use axum::extract::{DefaultBodyLimit, Multipart, Path, State};
use axum::http::{header, HeaderMap, HeaderValue, StatusCode};
use axum::response::{Html, IntoResponse, Response};
use axum::routing::{get, post};
use axum::Router;
use base64::Engine;
use lru::LruCache;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::delaunay::Triangulation;
use crate::error::{Error, ErrorKind};
use crate::pipeline::{run_pipeline, PipelineConfig, RunStats};
use crate::raster::{decode_image, encode_image, RasterImage};

pub const DEFAULT_CACHE_MB: usize = 256;
pub const DEFAULT_MAX_UPLOAD_MB: usize = 32;

#[derive(Debug, Clone)]
pub struct ServiceConfig {
    pub cache_bytes: usize,
    pub max_upload_bytes: usize,
    /// Directory holding the built tuner UI, served at `/`.
    pub ui_dir: Option<PathBuf>,
}

impl Default for ServiceConfig {
    fn default() -> Self {
        ServiceConfig {
            cache_bytes: DEFAULT_CACHE_MB << 20,
            max_upload_bytes: DEFAULT_MAX_UPLOAD_MB << 20,
            ui_dir: None,
        }
    }
}

enum Entry {
    Image(Arc<RasterImage>),
    Result(Arc<StoredResult>),
}

impl Entry {
    fn cost(&self) -> usize {
        match self {
            Entry::Image(img) => img.pixels().len() * 3,
            Entry::Result(r) => r.body.len() + r.stages.iter().map(|(_, png)| png.len()).sum::<usize>(),
        }
    }
}

struct StoredResult {
    body: Bytes,
    stages: Vec<(&'static str, Vec<u8>)>,
}

/// LRU keyed by string with a total byte budget. The newest entry is kept
/// even when it alone exceeds the budget.
struct ByteLru {
    map: LruCache<String, Entry>,
    used: usize,
    budget: usize,
}

impl ByteLru {
    fn new(budget: usize) -> Self {
        ByteLru {
            map: LruCache::unbounded(),
            used: 0,
            budget,
        }
    }

    fn get(&mut self, key: &str) -> Option<&Entry> {
        self.map.get(key)
    }

    fn put(&mut self, key: String, entry: Entry) {
        self.used += entry.cost();
        if let Some(old) = self.map.put(key, entry) {
            self.used -= old.cost();
        }
        while self.used > self.budget && self.map.len() > 1 {
            if let Some((_, evicted)) = self.map.pop_lru() {
                self.used -= evicted.cost();
            }
        }
    }
}

#[derive(Clone)]
pub struct AppState {
    cache: Arc<Mutex<ByteLru>>,
    config: Arc<ServiceConfig>,
}

impl AppState {
    pub fn new(config: ServiceConfig) -> Self {
        AppState {
            cache: Arc::new(Mutex::new(ByteLru::new(config.cache_bytes))),
            config: Arc::new(config),
        }
    }

    fn image(&self, id: &str) -> Option<Arc<RasterImage>> {
        match self.cache.lock().unwrap().get(&format!("img:{id}")) {
            Some(Entry::Image(img)) => Some(img.clone()),
            _ => None,
        }
    }

    fn result(&self, id: &str) -> Option<Arc<StoredResult>> {
        match self.cache.lock().unwrap().get(&format!("res:{id}")) {
            Some(Entry::Result(r)) => Some(r.clone()),
            _ => None,
        }
    }
}

#[derive(Debug, Serialize, Deserialize, PartialEq, Eq)]
pub struct UploadResponse {
    pub image_id: String,
    pub width: u32,
    pub height: u32,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TriangulateRequest {
    pub image_id: String,
    #[serde(default)]
    pub config: PipelineConfig,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct TriangulateResponse {
    pub result_id: String,
    pub image_png_base64: String,
    pub mesh: Triangulation,
    pub stats: RunStats,
    pub stages: Option<Vec<StageLink>>,
}

#[derive(Debug, Serialize, Deserialize, PartialEq, Eq)]
pub struct StageLink {
    pub stage: String,
    pub url: String,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct ErrorBody {
    pub error: String,
    pub stage: Option<String>,
}

fn error_response(status: StatusCode, message: impl Into<String>, stage: Option<String>) -> Response {
    let body = ErrorBody {
        error: message.into(),
        stage,
    };
    (status, axum::Json(body)).into_response()
}

fn hex_sha256(parts: &[&[u8]]) -> String {
    let mut h = Sha256::new();
    for p in parts {
        h.update(p);
    }
    hex::encode(h.finalize())
}

pub fn router(state: AppState) -> Router {
    let limit = state.config.max_upload_bytes;
    let app = Router::new()
        .route("/images", post(upload))
        .route("/triangulate", post(triangulate))
        .route("/results/{result_id}/{file}", get(stage_image))
        .route("/health", get(|| async { "ok" }));
    let app = match &state.config.ui_dir {
        Some(dir) => app.fallback_service(tower_http::services::ServeDir::new(dir)),
        None => app.route("/", get(placeholder_index)),
    };
    app.layer(DefaultBodyLimit::max(limit)).with_state(state)
}

async fn placeholder_index() -> Html<&'static str> {
    Html(
        "<!doctype html><title>triangulate</title>\
         <p>No UI bundle configured. Start with <code>--ui-dir</code>, or use \
         <code>POST /images</code> and <code>POST /triangulate</code>.</p>",
    )
}

async fn upload(State(state): State<AppState>, mut multipart: Multipart) -> Response {
    let bytes = loop {
        match multipart.next_field().await {
            Ok(Some(field)) => {
                if field.file_name().is_none() && field.name() != Some("image") {
                    continue;
                }
                match field.bytes().await {
                    Ok(b) => break b,
                    Err(e) => return error_response(e.status(), e.body_text(), None),
                }
            }
            Ok(None) => {
                return error_response(StatusCode::BAD_REQUEST, "no image field in upload", None)
            }
            Err(e) => return error_response(e.status(), e.body_text(), None),
        }
    };
    if bytes.len() > state.config.max_upload_bytes {
        return error_response(StatusCode::PAYLOAD_TOO_LARGE, "upload exceeds size cap", None);
    }
    let image_id = hex_sha256(&[&bytes]);
    if let Some(img) = state.image(&image_id) {
        return axum::Json(UploadResponse {
            image_id,
            width: img.width(),
            height: img.height(),
        })
        .into_response();
    }
    let decoded = match tokio::task::spawn_blocking(move || decode_image(&bytes)).await {
        Ok(Ok(img)) => img,
        Ok(Err(e)) => return error_response(StatusCode::UNSUPPORTED_MEDIA_TYPE, e.to_string(), None),
        Err(e) => return error_response(StatusCode::INTERNAL_SERVER_ERROR, e.to_string(), None),
    };
    let response = UploadResponse {
        image_id: image_id.clone(),
        width: decoded.width(),
        height: decoded.height(),
    };
    state
        .cache
        .lock()
        .unwrap()
        .put(format!("img:{image_id}"), Entry::Image(Arc::new(decoded)));
    axum::Json(response).into_response()
}

const JSON: HeaderValue = HeaderValue::from_static("application/json");

async fn triangulate(State(state): State<AppState>, body: Bytes) -> Response {
    let req: TriangulateRequest = match serde_json::from_slice(&body) {
        Ok(r) => r,
        Err(e) => return error_response(StatusCode::UNPROCESSABLE_ENTITY, e.to_string(), None),
    };
    if let Err(e) = req.config.validate() {
        return error_response(StatusCode::UNPROCESSABLE_ENTITY, e.to_string(), None);
    }
    let config_json = serde_json::to_vec(&req.config).expect("config serializes");
    let result_id = hex_sha256(&[req.image_id.as_bytes(), b"\n", &config_json]);

    if let Some(hit) = state.result(&result_id) {
        let mut headers = HeaderMap::new();
        headers.insert(header::CONTENT_TYPE, JSON);
        headers.insert("x-cache", HeaderValue::from_static("hit"));
        return (headers, hit.body.clone()).into_response();
    }
    let Some(image) = state.image(&req.image_id) else {
        return error_response(StatusCode::NOT_FOUND, format!("unknown image_id {}", req.image_id), None);
    };

    let config = req.config.clone();
    let rid = result_id.clone();
    let run = tokio::task::spawn_blocking(move || build_result(&image, &config, &rid)).await;
    let (stored, stats) = match run {
        Ok(Ok(done)) => done,
        Ok(Err(e)) => {
            let status = match e.kind() {
                ErrorKind::Parameter => StatusCode::UNPROCESSABLE_ENTITY,
                _ => StatusCode::INTERNAL_SERVER_ERROR,
            };
            return error_response(status, e.to_string(), e.stage().map(|s| s.to_string()));
        }
        Err(e) => return error_response(StatusCode::INTERNAL_SERVER_ERROR, e.to_string(), None),
    };
    let body = stored.body.clone();
    state
        .cache
        .lock()
        .unwrap()
        .put(format!("res:{result_id}"), Entry::Result(Arc::new(stored)));

    let mut headers = HeaderMap::new();
    headers.insert(header::CONTENT_TYPE, JSON);
    headers.insert("x-cache", HeaderValue::from_static("miss"));
    let t = &stats.timings_ms;
    let timing = format!(
        "grayscale;dur={:.3}, sharpen;dur={:.3}, sobel;dur={:.3}, sample;dur={:.3}, triangulate;dur={:.3}, rasterize;dur={:.3}, total;dur={:.3}",
        t.grayscale, t.sharpen, t.sobel, t.sample, t.triangulate, t.rasterize, t.total
    );
    if let Ok(v) = HeaderValue::from_str(&timing) {
        headers.insert("server-timing", v);
    }
    (headers, body).into_response()
}

fn build_result(
    image: &RasterImage,
    config: &PipelineConfig,
    result_id: &str,
) -> Result<(StoredResult, RunStats), Error> {
    let out = run_pipeline(image, config)?;
    let final_png = encode_image(&out.image)?;
    let mut stages = Vec::new();
    if let Some(st) = &out.stages {
        if let Some(g) = &st.gray {
            stages.push(("gray", encode_image(&g.to_raster())?));
        }
        if let Some(s) = &st.sharp {
            stages.push(("sharp", encode_image(&s.to_raster())?));
        }
        stages.push(("sobel", encode_image(&st.sobel.to_raster())?));
        stages.push(("wire", encode_image(&st.wire)?));
        stages.push(("final", final_png.clone()));
    }
    let links = out.stages.as_ref().map(|_| {
        stages
            .iter()
            .map(|(name, _)| StageLink {
                stage: name.to_string(),
                url: format!("/results/{result_id}/{name}.png"),
            })
            .collect()
    });
    let response = TriangulateResponse {
        result_id: result_id.to_string(),
        image_png_base64: base64::engine::general_purpose::STANDARD.encode(&final_png),
        mesh: out.mesh,
        stats: out.stats.without_timings(),
        stages: links,
    };
    let body = Bytes::from(serde_json::to_vec(&response).expect("response serializes"));
    Ok((StoredResult { body, stages }, out.stats))
}

async fn stage_image(
    State(state): State<AppState>,
    Path((result_id, file)): Path<(String, String)>,
) -> Response {
    let Some(stage) = file.strip_suffix(".png") else {
        return error_response(StatusCode::NOT_FOUND, "stage images are .png", None);
    };
    let Some(result) = state.result(&result_id) else {
        return error_response(StatusCode::NOT_FOUND, format!("unknown result {result_id}"), None);
    };
    match result.stages.iter().find(|(name, _)| *name == stage) {
        Some((_, png)) => ([(header::CONTENT_TYPE, "image/png")], png.clone()).into_response(),
        None => error_response(StatusCode::NOT_FOUND, format!("no stage {stage} for this result"), None),
    }
}

pub async fn serve(addr: SocketAddr, config: ServiceConfig) -> std::io::Result<()> {
    let app = router(AppState::new(config));
    let listener = tokio::net::TcpListener::bind(addr).await?;
    log::info!("listening on http://{}", listener.local_addr()?);
    axum::serve(listener, app)
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await
}
