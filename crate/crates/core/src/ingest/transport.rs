//! HTTP transport abstraction with a live adapter and a fixture adapter that
//! serves canned responses from disk.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::Duration;

use serde::Deserialize;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum TransportError {
    #[error("request to {url} failed: {message}")]
    Request { url: String, message: String },
    #[error("no fixture route for {0}")]
    NoRoute(String),
    #[error("fixture io error for {path}: {source}")]
    Fixture {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

/// `request(url, params) -> bytes`. Implementations must be usable from
/// several threads.
pub trait HttpTransport: Send + Sync {
    fn get(&self, url: &str, params: &[(&str, String)]) -> Result<Vec<u8>, TransportError>;
}

/// Live transport over `ureq`.
pub struct UreqTransport {
    agent: ureq::Agent,
}

impl UreqTransport {
    pub fn new(timeout: Duration) -> Self {
        let config = ureq::Agent::config_builder()
            .timeout_global(Some(timeout))
            .user_agent("hybridrag/0.1 (literature review)")
            .build();
        Self { agent: config.into() }
    }
}

impl Default for UreqTransport {
    fn default() -> Self {
        Self::new(Duration::from_secs(60))
    }
}

impl HttpTransport for UreqTransport {
    fn get(&self, url: &str, params: &[(&str, String)]) -> Result<Vec<u8>, TransportError> {
        let mut req = self.agent.get(url);
        for (k, v) in params {
            req = req.query(*k, v);
        }
        let err = |e: ureq::Error| TransportError::Request { url: url.to_string(), message: e.to_string() };
        let mut resp = req.call().map_err(err)?;
        resp.body_mut().with_config().limit(256 * 1024 * 1024).read_to_vec().map_err(err)
    }
}

#[derive(Deserialize)]
struct Manifest {
    routes: BTreeMap<String, String>,
}

/// Serves canned bytes keyed by URL; query parameters are ignored.
///
/// On disk a fixture directory holds `manifest.json` of the form
/// `{"routes": {"<url>": "<relative file>"}}`.
#[derive(Debug, Default, Clone)]
pub struct FixtureTransport {
    routes: BTreeMap<String, Route>,
}

#[derive(Debug, Clone)]
enum Route {
    Bytes(Vec<u8>),
    File(PathBuf),
    Fail(String),
}

impl FixtureTransport {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_dir(dir: impl AsRef<Path>) -> Result<Self, TransportError> {
        let dir = dir.as_ref();
        let manifest_path = dir.join("manifest.json");
        let raw = std::fs::read(&manifest_path)
            .map_err(|source| TransportError::Fixture { path: manifest_path.clone(), source })?;
        let manifest: Manifest = serde_json::from_slice(&raw).map_err(|e| TransportError::Fixture {
            path: manifest_path,
            source: std::io::Error::new(std::io::ErrorKind::InvalidData, e),
        })?;
        let routes = manifest.routes.into_iter().map(|(url, file)| (url, Route::File(dir.join(file)))).collect();
        Ok(Self { routes })
    }

    pub fn with_bytes(mut self, url: impl Into<String>, body: impl Into<Vec<u8>>) -> Self {
        self.routes.insert(url.into(), Route::Bytes(body.into()));
        self
    }

    /// Route that always fails, for exercising error paths.
    pub fn with_failure(mut self, url: impl Into<String>, message: impl Into<String>) -> Self {
        self.routes.insert(url.into(), Route::Fail(message.into()));
        self
    }
}

impl HttpTransport for FixtureTransport {
    fn get(&self, url: &str, _params: &[(&str, String)]) -> Result<Vec<u8>, TransportError> {
        match self.routes.get(url) {
            Some(Route::Bytes(b)) => Ok(b.clone()),
            Some(Route::File(path)) => {
                std::fs::read(path).map_err(|source| TransportError::Fixture { path: path.clone(), source })
            }
            Some(Route::Fail(message)) => {
                Err(TransportError::Request { url: url.to_string(), message: message.clone() })
            }
            None => Err(TransportError::NoRoute(url.to_string())),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixture_routes() {
        let t = FixtureTransport::new().with_bytes("http://a", "hello").with_failure("http://b", "503");
        assert_eq!(t.get("http://a", &[("q", "x".into())]).unwrap(), b"hello");
        assert!(matches!(t.get("http://b", &[]), Err(TransportError::Request { .. })));
        assert!(matches!(t.get("http://c", &[]), Err(TransportError::NoRoute(_))));
    }

    #[test]
    fn fixture_dir_manifest() {
        let dir = tempfile::tempdir().unwrap();
        std::fs::write(dir.path().join("a.txt"), "body").unwrap();
        std::fs::write(dir.path().join("manifest.json"), r#"{"routes": {"http://x/a": "a.txt"}}"#).unwrap();
        let t = FixtureTransport::from_dir(dir.path()).unwrap();
        assert_eq!(t.get("http://x/a", &[]).unwrap(), b"body");
    }
}
