//! Storage service. Configured through `AHEE_STORE_*` environment variables.

use std::process::ExitCode;
use std::sync::Arc;

use ahee_vault::store::{router, serve, Store, StoreConfig};
use tracing_subscriber::EnvFilter;

#[tokio::main]
async fn main() -> ExitCode {
    tracing_subscriber::fmt()
        .with_env_filter(EnvFilter::try_from_default_env().unwrap_or_else(|_| EnvFilter::new("info")))
        .init();

    let config = match StoreConfig::from_env() {
        Ok(c) => c,
        Err(e) => {
            eprintln!("ahee-store: {e}");
            return ExitCode::from(2);
        }
    };
    let listen = config.listen;
    let store = match Store::open(config) {
        Ok(s) => Arc::new(s),
        Err(e) => {
            eprintln!("ahee-store: cannot open data directory: {e}");
            return ExitCode::FAILURE;
        }
    };
    let listener = match tokio::net::TcpListener::bind(listen).await {
        Ok(l) => l,
        Err(e) => {
            eprintln!("ahee-store: cannot listen on {listen}: {e}");
            return ExitCode::FAILURE;
        }
    };
    tracing::info!(addr = %listener.local_addr().map(|a| a.to_string()).unwrap_or_default(), "listening");
    tokio::select! {
        r = serve(listener, router(store)) => {
            if let Err(e) = r {
                eprintln!("ahee-store: {e}");
                return ExitCode::FAILURE;
            }
        }
        _ = tokio::signal::ctrl_c() => tracing::info!("shutting down"),
    }
    ExitCode::SUCCESS
}
