//! HTTP control API and WebSocket monitor.
//!
//! | method | path | body |
//! |---|---|---|
//! | GET | `/api/mapping` | current `MappingState` |
//! | PUT | `/api/mapping` | whole `MappingState`, validated then swapped in |
//! | GET | `/api/presets` | preset list |
//! | POST | `/api/presets` | `{"id": ..}` captures the live mapping; a full preset is stored as given |
//! | POST | `/api/presets/{id}/recall?ramp_ms=N` | starts the recall ramp |
//! | GET | `/api/metrics` | pipeline metrics summary |
//! | GET (ws) | `/api/monitor` | `DescriptorFrame` JSON at the monitor rate |

use std::net::SocketAddr;
use std::sync::Arc;
use std::time::Duration;

use axum::extract::ws::{Message, WebSocket, WebSocketUpgrade};
use axum::extract::{Path, Query, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::Deserialize;
use serde_json::json;

use super::control::ControlState;
use super::metrics::{MetricsSummary, PipelineMetrics};
use crate::error::Error;
use crate::mapping::{MappingState, Preset, RoutingMatrix, ScalerParams};
use crate::osc::SenderStats;

pub type OscStatsFn = Arc<dyn Fn() -> Vec<SenderStats> + Send + Sync>;

#[derive(Clone)]
pub struct ApiState {
    pub control: Arc<ControlState>,
    pub metrics: Arc<PipelineMetrics>,
    pub osc_stats: OscStatsFn,
    pub monitor_hz: f64,
}

struct ApiError(StatusCode, String);

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.0, Json(json!({ "error": self.1 }))).into_response()
    }
}

impl From<Error> for ApiError {
    fn from(e: Error) -> Self {
        let status = match e {
            Error::IncompatiblePreset(_) => StatusCode::CONFLICT,
            _ => StatusCode::UNPROCESSABLE_ENTITY,
        };
        ApiError(status, e.to_string())
    }
}

pub fn router(state: ApiState) -> Router {
    Router::new()
        .route("/api/mapping", get(get_mapping).put(put_mapping))
        .route("/api/presets", get(list_presets).post(save_preset))
        .route("/api/presets/:id/recall", post(recall_preset))
        .route("/api/metrics", get(get_metrics))
        .route("/api/monitor", get(monitor))
        .with_state(state)
}

async fn get_mapping(State(s): State<ApiState>) -> Json<MappingState> {
    Json((*s.control.snapshot()).clone())
}

async fn put_mapping(State(s): State<ApiState>, Json(m): Json<MappingState>) -> Result<Json<MappingState>, ApiError> {
    let stored = s.control.set_mapping(m)?;
    Ok(Json((*stored).clone()))
}

async fn list_presets(State(s): State<ApiState>) -> Json<Vec<Preset>> {
    Json(s.control.presets())
}

#[derive(Debug, Deserialize)]
struct NewPreset {
    id: String,
    matrix: Option<RoutingMatrix>,
    scalers: Option<Vec<ScalerParams>>,
    created_at: Option<u64>,
}

async fn save_preset(
    State(s): State<ApiState>,
    Json(p): Json<NewPreset>,
) -> Result<(StatusCode, Json<Preset>), ApiError> {
    if p.id.is_empty() {
        return Err(ApiError(
            StatusCode::UNPROCESSABLE_ENTITY,
            "preset id must not be empty".into(),
        ));
    }
    let preset = match (p.matrix, p.scalers) {
        (None, None) => s.control.capture_preset(&p.id)?,
        (Some(matrix), Some(scalers)) => {
            let preset = Preset {
                id: p.id,
                matrix,
                scalers,
                created_at: p.created_at.unwrap_or(0),
            };
            s.control.store_preset(preset.clone())?;
            preset
        }
        _ => {
            return Err(ApiError(
                StatusCode::UNPROCESSABLE_ENTITY,
                "give both matrix and scalers, or neither to capture the live mapping".into(),
            ))
        }
    };
    Ok((StatusCode::CREATED, Json(preset)))
}

#[derive(Debug, Deserialize)]
struct RecallParams {
    #[serde(default)]
    ramp_ms: f64,
}

async fn recall_preset(
    State(s): State<ApiState>,
    Path(id): Path<String>,
    Query(q): Query<RecallParams>,
) -> Result<Json<serde_json::Value>, ApiError> {
    if s.control.preset(&id).is_none() {
        return Err(ApiError(StatusCode::NOT_FOUND, format!("no preset named '{id}'")));
    }
    if !(q.ramp_ms >= 0.0) {
        return Err(ApiError(
            StatusCode::UNPROCESSABLE_ENTITY,
            "ramp_ms must be >= 0".into(),
        ));
    }
    s.control.recall(&id, q.ramp_ms)?;
    Ok(Json(json!({ "id": id, "ramp_ms": q.ramp_ms })))
}

async fn get_metrics(State(s): State<ApiState>) -> Json<MetricsSummary> {
    Json(s.metrics.summary((s.osc_stats)()))
}

async fn monitor(State(s): State<ApiState>, ws: WebSocketUpgrade) -> Response {
    ws.on_upgrade(move |socket| stream_monitor(socket, s))
}

async fn stream_monitor(mut socket: WebSocket, s: ApiState) {
    let period = Duration::from_secs_f64(1.0 / s.monitor_hz.max(0.1));
    let mut tick = tokio::time::interval(period);
    tick.set_missed_tick_behavior(tokio::time::MissedTickBehavior::Skip);
    let mut last_sent: Option<u64> = None;
    loop {
        tick.tick().await;
        let Some(frame) = s.control.latest() else { continue };
        if last_sent == Some(frame.frame_index) {
            continue;
        }
        let text = match serde_json::to_string(&*frame) {
            Ok(t) => t,
            Err(_) => continue,
        };
        if socket.send(Message::Text(text)).await.is_err() {
            return;
        }
        last_sent = Some(frame.frame_index);
    }
}

/// Bind and serve on the current tokio runtime. Returns the bound address
/// (useful with port 0) and the server task.
pub async fn serve(
    addr: SocketAddr,
    state: ApiState,
    shutdown: impl std::future::Future<Output = ()> + Send + 'static,
) -> std::io::Result<(SocketAddr, tokio::task::JoinHandle<()>)> {
    let listener = tokio::net::TcpListener::bind(addr).await?;
    let local = listener.local_addr()?;
    let app = router(state);
    let task = tokio::spawn(async move {
        if let Err(e) = axum::serve(listener, app).with_graceful_shutdown(shutdown).await {
            log::error!("control API stopped: {e}");
        }
    });
    Ok((local, task))
}
