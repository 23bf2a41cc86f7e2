//! Shared test helpers: an independent brute-force partition enumerator
//! and a scripted HTTP chat endpoint.
#![allow(dead_code)]

use std::collections::HashSet;
use std::io::{BufRead, BufReader, Read, Write};
use std::net::{TcpListener, TcpStream};
use std::path::PathBuf;
use std::sync::{Arc, Mutex};
use std::thread;

use agentmandering::DualGraph;

pub fn data(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/data").join(name)
}

struct UnionFind(Vec<usize>);

impl UnionFind {
    fn new(n: usize) -> Self {
        Self((0..n).collect())
    }

    fn find(&mut self, x: usize) -> usize {
        let mut r = x;
        while self.0[r] != r {
            r = self.0[r];
        }
        let mut x = x;
        while self.0[x] != r {
            let next = self.0[x];
            self.0[x] = r;
            x = next;
        }
        r
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.0[ra] = rb;
        }
    }
}

/// Unit-index adjacency pairs, resolved from edge ids without going
/// through the library's own neighbor lists.
pub fn edge_pairs(graph: &DualGraph) -> Vec<(usize, usize)> {
    let pos = |id: &str| graph.units().iter().position(|u| u.id == id).expect("edge endpoint");
    graph.edges().iter().map(|e| (pos(&e.a), pos(&e.b))).collect()
}

/// True when every label's units form one union-find component.
pub fn labels_contiguous(labels: &[u32], k: u32, pairs: &[(usize, usize)]) -> bool {
    let mut uf = UnionFind::new(labels.len());
    for &(a, b) in pairs {
        if labels[a] != 0 && labels[a] == labels[b] {
            uf.union(a, b);
        }
    }
    (1..=k).all(|l| {
        let mut roots = labels
            .iter()
            .enumerate()
            .filter(|(_, &x)| x == l)
            .map(|(u, _)| u)
            .collect::<Vec<_>>()
            .into_iter()
            .map(|u| uf.find(u));
        match roots.next() {
            None => false,
            Some(r) => roots.all(|x| x == r),
        }
    })
}

/// Every partition of all units into `k` contiguous districts with
/// `|pop − ideal| ≤ eps · ideal`, ideal = total / k. Labels are in
/// first-appearance order (unit 0 is in district 1, and so on), which is
/// the canonical form plans are hashed in.
pub fn enumerate_partitions(graph: &DualGraph, k: u32, eps: f64) -> HashSet<Vec<u32>> {
    let n = graph.len();
    let pops: Vec<u64> = graph.units().iter().map(|u| u.population).collect();
    let ideal = pops.iter().sum::<u64>() as f64 / k as f64;
    let pairs = edge_pairs(graph);
    let mut out = HashSet::new();
    let mut labels = vec![0u32; n];

    fn rec(
        i: usize,
        used: u32,
        k: u32,
        labels: &mut Vec<u32>,
        pops: &[u64],
        ideal: f64,
        eps: f64,
        pairs: &[(usize, usize)],
        out: &mut HashSet<Vec<u32>>,
    ) {
        let n = labels.len();
        if i == n {
            if used != k {
                return;
            }
            let mut sums = vec![0u64; k as usize];
            for (u, &l) in labels.iter().enumerate() {
                sums[(l - 1) as usize] += pops[u];
            }
            let balanced = sums.iter().all(|&s| (s as f64 - ideal).abs() <= eps * ideal + 1e-9);
            if balanced && labels_contiguous(labels, k, pairs) {
                out.insert(labels.clone());
            }
            return;
        }
        if (k - used) as usize > n - i {
            return;
        }
        for l in 1..=(used + 1).min(k) {
            labels[i] = l;
            rec(i + 1, used.max(l), k, labels, pops, ideal, eps, pairs, out);
        }
        labels[i] = 0;
    }

    rec(0, 0, k, &mut labels, &pops, ideal, eps, &pairs, &mut out);
    out
}

/// Minimal HTTP/1.1 server answering each POST with the next scripted
/// `(status, body)` pair; the last pair repeats once the script runs out.
pub struct MockChat {
    pub base_url: String,
    pub requests: Arc<Mutex<Vec<String>>>,
}

pub fn chat_body(content: &str) -> String {
    serde_json::json!({
        "id": "mock",
        "object": "chat.completion",
        "choices": [{"index": 0, "message": {"role": "assistant", "content": content}, "finish_reason": "stop"}]
    })
    .to_string()
}

impl MockChat {
    pub fn start(script: Vec<(u16, String)>) -> Self {
        assert!(!script.is_empty());
        let listener = TcpListener::bind("127.0.0.1:0").expect("bind mock endpoint");
        let base_url = format!("http://{}/v1", listener.local_addr().unwrap());
        let requests = Arc::new(Mutex::new(Vec::new()));
        let log = requests.clone();
        thread::spawn(move || {
            let mut i = 0;
            for stream in listener.incoming() {
                let Ok(stream) = stream else { break };
                let (status, body) = script[i.min(script.len() - 1)].clone();
                i += 1;
                if let Some(req) = serve(stream, status, &body) {
                    log.lock().unwrap().push(req);
                }
            }
        });
        Self { base_url, requests }
    }

    pub fn request_count(&self) -> usize {
        self.requests.lock().unwrap().len()
    }
}

fn serve(mut stream: TcpStream, status: u16, body: &str) -> Option<String> {
    let mut reader = BufReader::new(stream.try_clone().ok()?);
    let mut request_line = String::new();
    reader.read_line(&mut request_line).ok()?;
    let mut len = 0usize;
    loop {
        let mut line = String::new();
        reader.read_line(&mut line).ok()?;
        let line = line.trim_end();
        if line.is_empty() {
            break;
        }
        if let Some((k, v)) = line.split_once(':') {
            if k.eq_ignore_ascii_case("content-length") {
                len = v.trim().parse().unwrap_or(0);
            }
        }
    }
    let mut buf = vec![0u8; len];
    reader.read_exact(&mut buf).ok()?;
    let reason = if status < 400 { "OK" } else { "Error" };
    let resp = format!(
        "HTTP/1.1 {status} {reason}\r\nContent-Type: application/json\r\nContent-Length: {}\r\nConnection: close\r\n\r\n{body}",
        body.len()
    );
    stream.write_all(resp.as_bytes()).ok()?;
    stream.flush().ok()?;
    Some(format!("{}\n{}", request_line.trim_end(), String::from_utf8_lossy(&buf)))
}
