//! Shared helpers for integration tests: a minimal HTTP/1.1 client and a
//! service launcher on an ephemeral port.
#![allow(dead_code)]

use std::io::{Read, Write};
use std::net::{SocketAddr, TcpStream};

use ledgerlearn::service;
use ledgerlearn::simnet::SimState;

pub struct HttpResponse {
    pub status: u16,
    pub body: String,
}

impl HttpResponse {
    pub fn json(&self) -> serde_json::Value {
        serde_json::from_str(&self.body).unwrap_or(serde_json::Value::Null)
    }
}

pub fn http_request(
    addr: SocketAddr,
    method: &str,
    path: &str,
    headers: &[(&str, &str)],
    body: &[u8],
) -> HttpResponse {
    let mut stream = TcpStream::connect(addr).expect("connect");
    let mut request = format!("{method} {path} HTTP/1.1\r\nHost: localhost\r\nConnection: close\r\n");
    for (k, v) in headers {
        request.push_str(&format!("{k}: {v}\r\n"));
    }
    request.push_str(&format!("Content-Length: {}\r\n\r\n", body.len()));
    stream.write_all(request.as_bytes()).expect("write head");
    stream.write_all(body).expect("write body");
    let mut raw = Vec::new();
    stream.read_to_end(&mut raw).expect("read response");
    let text = String::from_utf8_lossy(&raw);
    let status: u16 = text
        .split_whitespace()
        .nth(1)
        .and_then(|s| s.parse().ok())
        .expect("status line");
    let body = text
        .split_once("\r\n\r\n")
        .map(|(_, b)| decode_body(b))
        .unwrap_or_default();
    HttpResponse { status, body }
}

/// Undoes chunked transfer encoding when present.
fn decode_body(raw: &str) -> String {
    // Heuristic: chunked bodies start with a hex length line.
    let mut rest = raw;
    let mut out = String::new();
    loop {
        let Some((len_line, tail)) = rest.split_once("\r\n") else {
            return raw.to_string();
        };
        let Ok(len) = usize::from_str_radix(len_line.trim(), 16) else {
            return raw.to_string();
        };
        if len == 0 {
            return out;
        }
        if tail.len() < len {
            return raw.to_string();
        }
        out.push_str(&tail[..len]);
        rest = tail[len..].trim_start_matches("\r\n");
    }
}

pub fn get(addr: SocketAddr, path: &str, token: Option<&str>) -> HttpResponse {
    let auth;
    let mut headers: Vec<(&str, &str)> = Vec::new();
    if let Some(token) = token {
        auth = format!("Bearer {token}");
        headers.push(("Authorization", &auth));
        return http_request(addr, "GET", path, &headers, b"");
    }
    http_request(addr, "GET", path, &headers, b"")
}

pub fn post_json(addr: SocketAddr, path: &str, token: Option<&str>, body: &str) -> HttpResponse {
    let auth;
    let mut headers: Vec<(&str, &str)> = vec![("Content-Type", "application/json")];
    if let Some(token) = token {
        auth = format!("Bearer {token}");
        headers.push(("Authorization", &auth));
    }
    http_request(addr, "POST", path, &headers, body.as_bytes())
}

pub const BOUNDARY: &str = "----ledgerlearn-test-boundary";

pub fn multipart_dataset(csv: &[u8]) -> Vec<u8> {
    let mut body = Vec::new();
    body.extend_from_slice(format!("--{BOUNDARY}\r\n").as_bytes());
    body.extend_from_slice(
        b"Content-Disposition: form-data; name=\"dataset\"; filename=\"batch.csv\"\r\n",
    );
    body.extend_from_slice(b"Content-Type: text/csv\r\n\r\n");
    body.extend_from_slice(csv);
    body.extend_from_slice(format!("\r\n--{BOUNDARY}--\r\n").as_bytes());
    body
}

pub fn post_dataset(addr: SocketAddr, token: Option<&str>, csv: &[u8]) -> HttpResponse {
    let content_type = format!("multipart/form-data; boundary={BOUNDARY}");
    let auth;
    let mut headers: Vec<(&str, &str)> = vec![("Content-Type", &content_type)];
    if let Some(token) = token {
        auth = format!("Bearer {token}");
        headers.push(("Authorization", &auth));
    }
    http_request(addr, "POST", "/contribute", &headers, &multipart_dataset(csv))
}

/// Serves the state on an ephemeral port from a background thread and
/// returns the bound address.
pub fn start_service(state: SimState) -> SocketAddr {
    let (tx, rx) = std::sync::mpsc::channel();
    std::thread::spawn(move || {
        let rt = tokio::runtime::Builder::new_multi_thread()
            .worker_threads(2)
            .enable_all()
            .build()
            .expect("runtime");
        rt.block_on(async move {
            let (addr, handle) = service::serve_on(state, "127.0.0.1:0".parse().unwrap())
                .await
                .expect("bind");
            tx.send(addr).expect("report addr");
            let _ = handle.await;
        });
    });
    rx.recv().expect("service address")
}
