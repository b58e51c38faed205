//! Versioned CSV label store: `address,label,kind,source`.

use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::address::Address;

/// First line of every label file.
pub const LABELS_HEADER: &str = "# tokennet-labels v1";

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum AddressKind {
    /// Contract account (has code).
    #[serde(rename = "CA")]
    Contract,
    /// Externally owned account.
    #[serde(rename = "EOA")]
    ExternallyOwned,
    #[serde(rename = "unknown")]
    Unknown,
}

impl AddressKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            AddressKind::Contract => "CA",
            AddressKind::ExternallyOwned => "EOA",
            AddressKind::Unknown => "unknown",
        }
    }
}

impl fmt::Display for AddressKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for AddressKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "CA" | "ca" => Ok(AddressKind::Contract),
            "EOA" | "eoa" => Ok(AddressKind::ExternallyOwned),
            "unknown" => Ok(AddressKind::Unknown),
            other => Err(format!("unknown address kind {other:?}")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabelEntry {
    /// Display name; empty when only the kind is known.
    pub label: String,
    pub kind: AddressKind,
    /// Where the entry came from, e.g. `starter`, `user`, `rpc`.
    pub source: String,
}

#[derive(Debug, Error)]
pub enum LabelError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: missing or unsupported version line (expected {LABELS_HEADER:?})")]
    Version { path: PathBuf },
    #[error("{path}:{line}: {message}")]
    Row { path: PathBuf, line: u64, message: String },
}

#[derive(Debug, Deserialize)]
struct Row {
    address: String,
    #[serde(default)]
    label: String,
    kind: String,
    #[serde(default)]
    source: String,
}

/// Known address labels and kinds, keyed by canonical address.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct LabelStore {
    entries: BTreeMap<Address, LabelEntry>,
}

/// Well-known exchange wallets and token contracts.
const STARTER: &[(&str, &str, AddressKind)] = &[
    (
        "0x28c6c06298d514db089934071355e5743bf21d60",
        "Binance 14",
        AddressKind::ExternallyOwned,
    ),
    (
        "0xbe0eb53f46cd790cd13851d5eff43d12404d33e8",
        "Binance 7",
        AddressKind::ExternallyOwned,
    ),
    (
        "0xf977814e90da44bfa03b6295a0616a897441acec",
        "Binance 8",
        AddressKind::ExternallyOwned,
    ),
    (
        "0x71660c4005ba85c37ccec55d0c4493e66fe775d3",
        "Coinbase 1",
        AddressKind::ExternallyOwned,
    ),
    (
        "0x503828976d22510aad0201ac7ec88293211d23da",
        "Coinbase 2",
        AddressKind::ExternallyOwned,
    ),
    (
        "0x2910543af39aba0cd09dbb2d50200b3e800a63d2",
        "Kraken",
        AddressKind::ExternallyOwned,
    ),
    (
        "0x7fc66500c84a76ad7e9c93437bfc5ac33e2ddae9",
        "Aave: AAVE Token",
        AddressKind::Contract,
    ),
    (
        "0x4da27a545c0c5b758a6ba100e3a049001de870f5",
        "Aave: Staked Aave",
        AddressKind::Contract,
    ),
    (
        "0x6b175474e89094c44da98b954eedeac495271d0f",
        "MakerDAO: Dai Stablecoin",
        AddressKind::Contract,
    ),
    (
        "0xc00e94cb662c3520282e6f5717214004a7f26888",
        "Compound: COMP Token",
        AddressKind::Contract,
    ),
    (
        "0x5f98805a4e8be255a32880fdec7f6728c6568ba0",
        "Liquity: LUSD Token",
        AddressKind::Contract,
    ),
    (
        "0x6dea81c8171d0ba574754ef6f8b412f2ed88c54d",
        "Liquity: LQTY Token",
        AddressKind::Contract,
    ),
];

impl LabelStore {
    pub fn new() -> Self {
        Self::default()
    }

    /// The shipped starter set.
    pub fn starter() -> Self {
        let mut store = LabelStore::new();
        for &(addr, label, kind) in STARTER {
            store.insert(
                addr.parse().expect("starter addresses are valid"),
                LabelEntry {
                    label: label.to_string(),
                    kind,
                    source: "starter".to_string(),
                },
            );
        }
        store
    }

    pub fn get(&self, address: &Address) -> Option<&LabelEntry> {
        self.entries.get(address)
    }

    pub fn insert(&mut self, address: Address, entry: LabelEntry) -> Option<LabelEntry> {
        self.entries.insert(address, entry)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Address, &LabelEntry)> {
        self.entries.iter()
    }

    /// Entries of `other` override entries of `self`.
    pub fn merge(&mut self, other: LabelStore) {
        self.entries.extend(other.entries);
    }

    pub fn parse(text: &str, path: &Path) -> Result<Self, LabelError> {
        let mut lines = text.lines();
        if lines.next().map(str::trim) != Some(LABELS_HEADER) {
            return Err(LabelError::Version {
                path: path.to_path_buf(),
            });
        }
        let body = text.split_once('\n').map(|(_, rest)| rest).unwrap_or("");
        let mut reader = csv::ReaderBuilder::new()
            .trim(csv::Trim::All)
            .comment(Some(b'#'))
            .from_reader(body.as_bytes());
        let mut store = LabelStore::new();
        let headers = reader
            .headers()
            .map_err(|e| LabelError::Row {
                path: path.to_path_buf(),
                line: 2,
                message: e.to_string(),
            })?
            .clone();
        for record in reader.records() {
            let row_err = |line: u64, message: String| LabelError::Row {
                path: path.to_path_buf(),
                line: line + 1,
                message,
            };
            let record = record.map_err(|e| row_err(e.position().map(|p| p.line()).unwrap_or(0), e.to_string()))?;
            let line = record.position().map(|p| p.line()).unwrap_or(0);
            let row: Row = record
                .deserialize(Some(&headers))
                .map_err(|e| row_err(line, e.to_string()))?;
            let address: Address = row
                .address
                .parse()
                .map_err(|e: crate::address::AddressError| row_err(line, e.to_string()))?;
            let kind: AddressKind = row.kind.parse().map_err(|e| row_err(line, e))?;
            if kind == AddressKind::Unknown {
                return Err(row_err(line, "label entries must be CA or EOA".into()));
            }
            store.insert(
                address,
                LabelEntry {
                    label: row.label,
                    kind,
                    source: row.source,
                },
            );
        }
        Ok(store)
    }

    pub fn load(path: &Path) -> Result<Self, LabelError> {
        let text = fs::read_to_string(path).map_err(|e| LabelError::Io {
            path: path.to_path_buf(),
            source: e,
        })?;
        Self::parse(&text, path)
    }

    /// Serialized form, sorted by address.
    pub fn to_csv(&self) -> String {
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(Vec::new());
        w.write_record(["address", "label", "kind", "source"])
            .expect("in-memory write");
        for (addr, e) in &self.entries {
            w.write_record([addr.to_string().as_str(), &e.label, e.kind.as_str(), &e.source])
                .expect("in-memory write");
        }
        let body = String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 fields");
        format!("{LABELS_HEADER}\n{body}")
    }

    pub fn save(&self, path: &Path) -> Result<(), LabelError> {
        let io = |e| LabelError::Io {
            path: path.to_path_buf(),
            source: e,
        };
        let mut f = fs::File::create(path).map_err(io)?;
        f.write_all(self.to_csv().as_bytes()).map_err(io)
    }
}
