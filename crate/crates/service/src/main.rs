use std::net::SocketAddr;
use std::path::PathBuf;
use std::time::{Duration, Instant};

use axum::http::HeaderValue;
use clap::Parser;
use tower_http::cors::{AllowOrigin, Any, CorsLayer};

use vlc_core::scale::ScaleConfig;
use vlc_service::{router, AppState, DEFAULT_TTL, SYNC_BUDGET_LIMIT};

#[derive(Parser, Debug)]
#[command(name = "vlc-service", version, about = "Interactive complexity analysis over HTTP")]
struct Opts {
    #[arg(long, default_value_t = 8080)]
    port: u16,
    /// Allowed CORS origin; any origin when absent.
    #[arg(long)]
    cors_origin: Option<String>,
    /// Default scale configuration for new sessions.
    #[arg(long, env = "VLC_CONFIG")]
    config: Option<PathBuf>,
    /// Idle seconds before a session is evicted.
    #[arg(long, default_value_t = DEFAULT_TTL.as_secs())]
    ttl_secs: u64,
    /// Largest evaluation budget answered synchronously.
    #[arg(long, default_value_t = SYNC_BUDGET_LIMIT)]
    sync_budget: usize,
}

fn load_config(path: Option<&PathBuf>) -> Result<ScaleConfig, String> {
    let Some(path) = path else { return Ok(ScaleConfig::default()) };
    let bytes = std::fs::read(path).map_err(|e| format!("{}: {e}", path.display()))?;
    let cfg: ScaleConfig = serde_json::from_slice(&bytes).map_err(|e| format!("{}: {e}", path.display()))?;
    cfg.validate().map_err(|e| e.to_string())?;
    Ok(cfg)
}

#[tokio::main]
async fn main() {
    tracing_subscriber::fmt::init();
    let opts = Opts::parse();
    let config = match load_config(opts.config.as_ref()) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            std::process::exit(2);
        }
    };
    let state = AppState::with_limits(config, Duration::from_secs(opts.ttl_secs), opts.sync_budget);
    let cors = match &opts.cors_origin {
        Some(o) => match HeaderValue::from_str(o) {
            Ok(v) => CorsLayer::new().allow_origin(AllowOrigin::exact(v)),
            Err(_) => {
                eprintln!("error: invalid --cors-origin `{o}`");
                std::process::exit(2);
            }
        },
        None => CorsLayer::new().allow_origin(Any),
    }
    .allow_methods(Any)
    .allow_headers(Any);

    let sweeper = state.clone();
    tokio::spawn(async move {
        let mut tick = tokio::time::interval(Duration::from_secs(60));
        loop {
            tick.tick().await;
            let gone = sweeper.evict_expired(Instant::now());
            if gone > 0 {
                tracing::info!(evicted = gone, "expired sessions dropped");
            }
        }
    });

    let app = router(state).layer(cors);
    let addr = SocketAddr::from(([0, 0, 0, 0], opts.port));
    let listener = match tokio::net::TcpListener::bind(addr).await {
        Ok(l) => l,
        Err(e) => {
            eprintln!("error: cannot bind {addr}: {e}");
            std::process::exit(2);
        }
    };
    tracing::info!(%addr, "listening");
    if let Err(e) = axum::serve(listener, app).await {
        eprintln!("error: {e}");
        std::process::exit(1);
    }
}
