#![allow(dead_code)]

use std::path::{Path, PathBuf};
use std::sync::{mpsc, Arc, Mutex};
use std::thread::JoinHandle;

use ahee_vault::store::{router, Store, StoreConfig};
use axum::body::{to_bytes, Body};
use axum::extract::{Request, State};
use axum::middleware::{self, Next};
use axum::response::Response;

pub const USER: &str = "alice";
pub const PASS: &str = "correct horse battery";

pub type Captured = Arc<Mutex<Vec<Vec<u8>>>>;

/// A store service on an ephemeral port, with every request and response
/// body recorded.
pub struct TestServer {
    pub base: String,
    pub store: Arc<Store>,
    pub captured: Captured,
    stop: Option<mpsc::Sender<()>>,
    thread: Option<JoinHandle<()>>,
}

async fn capture(State(log): State<Captured>, req: Request, next: Next) -> Response {
    let (parts, body) = req.into_parts();
    let bytes = to_bytes(body, usize::MAX).await.expect("request body");
    log.lock().unwrap().push(bytes.to_vec());
    let resp = next.run(Request::from_parts(parts, Body::from(bytes))).await;
    let (parts, body) = resp.into_parts();
    let bytes = to_bytes(body, usize::MAX).await.expect("response body");
    log.lock().unwrap().push(bytes.to_vec());
    Response::from_parts(parts, Body::from(bytes))
}

pub fn config(data_dir: &Path) -> StoreConfig {
    StoreConfig { data_dir: data_dir.to_owned(), pbkdf2_rounds: 1_000, ..StoreConfig::default() }
}

impl TestServer {
    pub fn start(data_dir: &Path) -> Self {
        let store = Arc::new(Store::open(config(data_dir)).expect("open store"));
        let captured: Captured = Arc::default();
        let app = router(store.clone()).layer(middleware::from_fn_with_state(captured.clone(), capture));

        let listener = std::net::TcpListener::bind("127.0.0.1:0").unwrap();
        listener.set_nonblocking(true).unwrap();
        let base = format!("http://{}", listener.local_addr().unwrap());
        let (stop, stopped) = mpsc::channel::<()>();
        let thread = std::thread::spawn(move || {
            let rt = tokio::runtime::Builder::new_multi_thread().enable_all().build().unwrap();
            rt.block_on(async move {
                let listener = tokio::net::TcpListener::from_std(listener).unwrap();
                let shutdown = async move {
                    let _ = tokio::task::spawn_blocking(move || stopped.recv()).await;
                };
                axum::serve(listener, app).with_graceful_shutdown(shutdown).await.unwrap();
            });
        });
        TestServer { base, store, captured, stop: Some(stop), thread: Some(thread) }
    }

    pub fn captured(&self) -> Vec<Vec<u8>> {
        self.captured.lock().unwrap().clone()
    }

    pub fn stop(mut self) {
        self.shutdown();
    }

    fn shutdown(&mut self) {
        if let Some(s) = self.stop.take() {
            let _ = s.send(());
        }
        if let Some(t) = self.thread.take() {
            let _ = t.join();
        }
    }
}

impl Drop for TestServer {
    fn drop(&mut self) {
        self.shutdown();
    }
}

/// Every regular file under `dir`, recursively.
pub fn files_under(dir: &Path) -> Vec<PathBuf> {
    let mut out = Vec::new();
    let mut stack = vec![dir.to_owned()];
    while let Some(d) = stack.pop() {
        for entry in std::fs::read_dir(&d).unwrap() {
            let path = entry.unwrap().path();
            if path.is_dir() {
                stack.push(path);
            } else {
                out.push(path);
            }
        }
    }
    out
}

pub fn contains(haystack: &[u8], needle: &[u8]) -> bool {
    needle.is_empty() || haystack.windows(needle.len()).any(|w| w == needle)
}
