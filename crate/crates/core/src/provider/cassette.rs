//! Record/replay of HTTP exchanges. Only the URL, body and response are
//! stored, so credentials carried in headers never reach disk.

use std::collections::{HashMap, VecDeque};
use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex};

use serde::{Deserialize, Serialize};

use super::http::{HttpRequest, HttpResponse, Transport, TransportError};
use super::ProviderError;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CassetteEntry {
    pub url: String,
    pub request_body: String,
    pub response: HttpResponse,
}

/// Forwards to a live transport and appends each successful exchange.
pub struct RecordingTransport {
    inner: Arc<dyn Transport>,
    path: PathBuf,
    file: Mutex<File>,
}

impl RecordingTransport {
    pub fn new(inner: Arc<dyn Transport>, path: &Path) -> Result<Self, ProviderError> {
        let file = OpenOptions::new()
            .create(true)
            .append(true)
            .open(path)
            .map_err(|e| ProviderError::Io {
                path: path.to_path_buf(),
                message: e.to_string(),
            })?;
        Ok(Self {
            inner,
            path: path.to_path_buf(),
            file: Mutex::new(file),
        })
    }
}

impl Transport for RecordingTransport {
    fn send(&self, request: &HttpRequest) -> Result<HttpResponse, TransportError> {
        let response = self.inner.send(request)?;
        let entry = CassetteEntry {
            url: request.url.clone(),
            request_body: request.body.clone(),
            response: response.clone(),
        };
        let mut line = serde_json::to_string(&entry).expect("entry serializes");
        line.push('\n');
        let mut file = self.file.lock().expect("cassette lock poisoned");
        file.write_all(line.as_bytes())
            .and_then(|_| file.flush())
            .map_err(|e| TransportError::Fatal(format!("{}: {e}", self.path.display())))?;
        Ok(response)
    }
}

/// Serves recorded responses keyed by `(url, body)`. Identical requests
/// are answered in recording order.
pub struct ReplayTransport {
    entries: Mutex<HashMap<(String, String), VecDeque<HttpResponse>>>,
}

impl ReplayTransport {
    pub fn from_entries(entries: Vec<CassetteEntry>) -> Self {
        let mut map: HashMap<(String, String), VecDeque<HttpResponse>> = HashMap::new();
        for e in entries {
            map.entry((e.url, e.request_body)).or_default().push_back(e.response);
        }
        Self {
            entries: Mutex::new(map),
        }
    }

    pub fn load(path: &Path) -> Result<Self, ProviderError> {
        let io = |e: std::io::Error| ProviderError::Io {
            path: path.to_path_buf(),
            message: e.to_string(),
        };
        let reader = BufReader::new(File::open(path).map_err(io)?);
        let mut entries = Vec::new();
        for (n, line) in reader.lines().enumerate() {
            let line = line.map_err(io)?;
            if line.trim().is_empty() {
                continue;
            }
            entries.push(
                serde_json::from_str(&line)
                    .map_err(|e| ProviderError::Cassette(format!("{} line {}: {e}", path.display(), n + 1)))?,
            );
        }
        Ok(Self::from_entries(entries))
    }
}

impl Transport for ReplayTransport {
    fn send(&self, request: &HttpRequest) -> Result<HttpResponse, TransportError> {
        let mut entries = self.entries.lock().expect("cassette lock poisoned");
        let queue = entries
            .get_mut(&(request.url.clone(), request.body.clone()))
            .ok_or_else(|| TransportError::Fatal(format!("no recorded exchange for request to {}", request.url)))?;
        // The last recorded response keeps answering once the queue drains.
        if queue.len() > 1 {
            Ok(queue.pop_front().expect("non-empty"))
        } else {
            queue
                .front()
                .cloned()
                .ok_or_else(|| TransportError::Fatal("empty cassette queue".into()))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::prompt::PromptSet;
    use crate::provider::{HttpChatModel, LanguageModel, ProviderConfig, RateLimiter};
    use std::time::Duration;

    struct Echo;

    impl Transport for Echo {
        fn send(&self, request: &HttpRequest) -> Result<HttpResponse, TransportError> {
            let body = serde_json::json!({
                "choices": [{"message": {"content": format!("len={}", request.body.len())}}],
                "usage": {"prompt_tokens": 5, "completion_tokens": 2}
            });
            Ok(HttpResponse {
                status: 200,
                body: body.to_string(),
            })
        }
    }

    #[test]
    fn replay_reproduces_recording_without_headers() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("session.jsonl");
        let cfg = ProviderConfig::new("http://example.invalid/v1/chat", "gpt-4");
        let limiter = Arc::new(RateLimiter::new(None));
        let set = PromptSet::builtin();
        let prompts = [set.repair_prompt("a", "b").unwrap(), set.repair_prompt("c", "d").unwrap()];

        let recorder = Arc::new(RecordingTransport::new(Arc::new(Echo), &path).unwrap());
        let live = HttpChatModel::new(cfg.clone(), recorder, limiter.clone()).unwrap();
        let recorded: Vec<_> = prompts.iter().map(|p| live.complete(p, &[]).unwrap()).collect();

        let replay = HttpChatModel::new(cfg, Arc::new(ReplayTransport::load(&path).unwrap()), limiter).unwrap();
        let replayed: Vec<_> = prompts.iter().map(|p| replay.complete(p, &[]).unwrap()).collect();
        assert_eq!(recorded, replayed);

        let miss = HttpRequest {
            url: "http://example.invalid/v1/chat".into(),
            headers: vec![],
            body: "{}".into(),
            timeout: Duration::from_secs(1),
        };
        let transport = ReplayTransport::load(&path).unwrap();
        assert!(matches!(transport.send(&miss), Err(TransportError::Fatal(_))));
        assert!(!std::fs::read_to_string(&path).unwrap().to_ascii_lowercase().contains("authorization"));
    }
}
