//! Shared fixtures for integration tests.
#![allow(dead_code)]

use std::io::{self, Read};

use chrono::{Days, NaiveDate};
use primitive_types::U256;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tokennet::ingest::{DailyGraph, NodeId};
use tokennet::{mix_seed, Address};

pub const TOKEN: &str = "0x5f98805a4e8be255a32880fdec7f6728c6568ba0";
pub const HEADER: &str = "token_address,from_address,to_address,value,block_timestamp\n";

pub fn day0() -> NaiveDate {
    NaiveDate::from_ymd_opt(2021, 4, 5).unwrap()
}

/// Deterministic synthetic transfer export, generated row by row.
///
/// Row `i` depends only on `(seed, i)`. A few addresses act as hubs so days
/// have a visible core; about 1% of rows touch the null address and 1% are
/// self-transfers.
#[derive(Debug, Clone, Copy)]
pub struct Synthetic {
    pub rows: u64,
    pub days: u64,
    pub population: u64,
    pub hubs: u64,
    pub seed: u64,
}

pub struct SyntheticRow {
    pub from: Address,
    pub to: Address,
    pub value: U256,
    pub day: NaiveDate,
    pub second: u32,
}

impl SyntheticRow {
    pub fn retained(&self) -> bool {
        !self.from.is_null() && !self.to.is_null() && self.from != self.to
    }
}

impl Synthetic {
    pub fn row(&self, i: u64) -> SyntheticRow {
        let mut rng = ChaCha8Rng::seed_from_u64(mix_seed(self.seed, i));
        let pick = |rng: &mut ChaCha8Rng| {
            if rng.random_bool(0.4) {
                rng.random_range(0..self.hubs)
            } else {
                rng.random_range(0..self.population)
            }
        };
        let a = pick(&mut rng);
        let mut b = pick(&mut rng);
        let kind: u32 = rng.random_range(0..100);
        let (from, to) = match kind {
            0 => (Address::NULL, Address::synthetic(b)),
            1 => (Address::synthetic(a), Address::synthetic(a)),
            _ => {
                if a == b {
                    b = (b + 1) % self.population;
                }
                (Address::synthetic(a), Address::synthetic(b))
            }
        };
        // up to ~1.8e28: beyond 64 bits, well inside 256
        let value = U256::from(rng.random::<u64>()) * U256::from(rng.random_range(1..1_000_000_000u64));
        SyntheticRow {
            from,
            to,
            value,
            day: day0() + Days::new(i % self.days),
            second: rng.random_range(0..86_400),
        }
    }

    pub fn csv_line(&self, i: u64) -> String {
        let r = self.row(i);
        format!(
            "{TOKEN},{},{},{},{} {:02}:{:02}:{:02} UTC\n",
            r.from,
            r.to,
            r.value,
            r.day,
            r.second / 3600,
            r.second / 60 % 60,
            r.second % 60
        )
    }

    /// Σ value over rows that survive filtering, computed independently of ingest.
    pub fn retained_total(&self) -> (u64, U256) {
        let mut rows = 0;
        let mut total = U256::zero();
        for i in 0..self.rows {
            let r = self.row(i);
            if r.retained() {
                rows += 1;
                total += r.value;
            }
        }
        (rows, total)
    }

    pub fn reader(self) -> SyntheticReader {
        SyntheticReader {
            export: self,
            next: 0,
            buf: HEADER.as_bytes().to_vec(),
            pos: 0,
        }
    }

    pub fn to_csv(self) -> String {
        let mut s = String::from(HEADER);
        for i in 0..self.rows {
            s.push_str(&self.csv_line(i));
        }
        s
    }
}

/// Streams a [`Synthetic`] export as CSV bytes.
pub struct SyntheticReader {
    export: Synthetic,
    next: u64,
    buf: Vec<u8>,
    pos: usize,
}

impl Read for SyntheticReader {
    fn read(&mut self, out: &mut [u8]) -> io::Result<usize> {
        while self.pos == self.buf.len() {
            if self.next == self.export.rows {
                return Ok(0);
            }
            self.buf.clear();
            self.pos = 0;
            let end = (self.next + 4096).min(self.export.rows);
            for i in self.next..end {
                self.buf.extend_from_slice(self.export.csv_line(i).as_bytes());
            }
            self.next = end;
        }
        let n = out.len().min(self.buf.len() - self.pos);
        out[..n].copy_from_slice(&self.buf[self.pos..self.pos + n]);
        self.pos += n;
        Ok(n)
    }
}

/// Random connected graph with `n` nodes and `m` edges, degree-skewed so a core exists.
pub fn skewed_graph(n: usize, m: usize, seed: u64) -> DailyGraph {
    assert!(m >= n - 1);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut seen = std::collections::HashSet::with_capacity(m);
    let mut pairs: Vec<(NodeId, NodeId)> = Vec::with_capacity(m);
    let mut add = |a: NodeId, b: NodeId, pairs: &mut Vec<(NodeId, NodeId)>| {
        if a != b && seen.insert((a.min(b), a.max(b))) {
            pairs.push((a, b));
        }
    };
    for v in 1..n as NodeId {
        let u = rng.random_range(0..v);
        add(u, v, &mut pairs);
    }
    while pairs.len() < m {
        // square of a uniform favors low ids
        let x: f64 = rng.random();
        let a = ((x * x) * n as f64) as NodeId;
        let b = rng.random_range(0..n as NodeId);
        add(a, b, &mut pairs);
    }
    DailyGraph::from_pairs(day0(), n, &pairs).unwrap()
}

/// Clique of `core` nodes; each of `periphery` nodes tied to two distinct core nodes.
pub fn planted_core(core: u32, periphery: u32, seed: u64) -> DailyGraph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut pairs = Vec::new();
    for a in 0..core {
        for b in a + 1..core {
            pairs.push((a, b));
        }
    }
    for p in 0..periphery {
        let a = rng.random_range(0..core);
        let mut b = rng.random_range(0..core - 1);
        if b >= a {
            b += 1;
        }
        pairs.push((core + p, a));
        pairs.push((core + p, b));
    }
    DailyGraph::from_pairs(day0(), (core + periphery) as usize, &pairs).unwrap()
}

/// Writes a small multi-day export for end-to-end runs.
pub fn write_fixture_corpus(dir: &std::path::Path) -> std::path::PathBuf {
    let export = Synthetic {
        rows: 6_000,
        days: 12,
        population: 600,
        hubs: 6,
        seed: 7,
    };
    let path = dir.join("fixture.csv");
    std::fs::write(&path, export.to_csv()).unwrap();
    path
}
