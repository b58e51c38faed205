//! Minimal JSON-RPC client for `eth_getCode` at the latest block.

use std::sync::Mutex;
use std::thread;
use std::time::{Duration, Instant};

use serde_json::{json, Value};
use thiserror::Error;

use crate::address::Address;

/// Environment variable holding the default endpoint URL.
pub const RPC_URL_ENV: &str = "TOKENNET_RPC_URL";

#[derive(Debug, Error)]
pub enum RpcError {
    #[error("transport: {0}")]
    Transport(String),
    #[error("rpc error {code}: {message}")]
    Remote { code: i64, message: String },
    #[error("malformed response: {0}")]
    Malformed(String),
}

/// Source of deployed code for an address.
pub trait CodeLookup: Sync {
    /// Code bytes at the latest block; empty for externally owned accounts.
    fn code_at(&self, address: &Address) -> Result<Vec<u8>, RpcError>;
}

#[derive(Debug, Clone)]
pub struct RpcOptions {
    /// Attempts after the first one.
    pub retries: u32,
    /// Delay before the first retry; doubles each time.
    pub backoff: Duration,
    /// Minimum spacing between requests from this client.
    pub min_interval: Duration,
    pub timeout: Duration,
}

impl Default for RpcOptions {
    fn default() -> Self {
        RpcOptions {
            retries: 3,
            backoff: Duration::from_millis(250),
            min_interval: Duration::from_millis(20),
            timeout: Duration::from_secs(15),
        }
    }
}

pub struct JsonRpcClient {
    url: String,
    agent: ureq::Agent,
    options: RpcOptions,
    last_request: Mutex<Option<Instant>>,
}

impl JsonRpcClient {
    pub fn new(url: impl Into<String>, options: RpcOptions) -> Self {
        let agent: ureq::Agent = ureq::Agent::config_builder()
            .timeout_global(Some(options.timeout))
            .build()
            .into();
        JsonRpcClient {
            url: url.into(),
            agent,
            options,
            last_request: Mutex::new(None),
        }
    }

    pub fn url(&self) -> &str {
        &self.url
    }

    fn throttle(&self) {
        let mut last = self.last_request.lock().unwrap_or_else(|e| e.into_inner());
        if let Some(t) = *last {
            let elapsed = t.elapsed();
            if elapsed < self.options.min_interval {
                thread::sleep(self.options.min_interval - elapsed);
            }
        }
        *last = Some(Instant::now());
    }

    fn call_once(&self, address: &Address) -> Result<Vec<u8>, RpcError> {
        self.throttle();
        let body = json!({
            "jsonrpc": "2.0",
            "id": 1,
            "method": "eth_getCode",
            "params": [address.to_string(), "latest"],
        });
        let response: Value = self
            .agent
            .post(&self.url)
            .send_json(&body)
            .map_err(|e| RpcError::Transport(e.to_string()))?
            .into_body()
            .read_json()
            .map_err(|e| RpcError::Malformed(e.to_string()))?;
        parse_code_response(&response)
    }
}

impl CodeLookup for JsonRpcClient {
    fn code_at(&self, address: &Address) -> Result<Vec<u8>, RpcError> {
        let mut delay = self.options.backoff;
        let mut attempt = 0;
        loop {
            match self.call_once(address) {
                Ok(code) => return Ok(code),
                Err(e) if attempt < self.options.retries => {
                    log::debug!("eth_getCode {address} failed ({e}), retrying");
                    thread::sleep(delay);
                    delay *= 2;
                    attempt += 1;
                }
                Err(e) => return Err(e),
            }
        }
    }
}

/// Extracts code bytes from a JSON-RPC response object.
pub fn parse_code_response(response: &Value) -> Result<Vec<u8>, RpcError> {
    if let Some(err) = response.get("error") {
        return Err(RpcError::Remote {
            code: err.get("code").and_then(Value::as_i64).unwrap_or(0),
            message: err.get("message").and_then(Value::as_str).unwrap_or("").to_string(),
        });
    }
    let hex = response
        .get("result")
        .and_then(Value::as_str)
        .ok_or_else(|| RpcError::Malformed(format!("no string result in {response}")))?;
    let digits = hex
        .strip_prefix("0x")
        .ok_or_else(|| RpcError::Malformed(format!("result {hex:?} lacks 0x prefix")))?;
    if digits.len() % 2 != 0 {
        return Err(RpcError::Malformed(format!("odd-length hex {hex:?}")));
    }
    (0..digits.len())
        .step_by(2)
        .map(|i| u8::from_str_radix(&digits[i..i + 2], 16).map_err(|_| RpcError::Malformed(format!("bad hex {hex:?}"))))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_code_and_empty_code() {
        let code = parse_code_response(&json!({"jsonrpc":"2.0","id":1,"result":"0x6080"})).unwrap();
        assert_eq!(code, vec![0x60, 0x80]);
        assert!(parse_code_response(&json!({"jsonrpc":"2.0","id":1,"result":"0x"}))
            .unwrap()
            .is_empty());
    }

    #[test]
    fn surfaces_remote_errors_and_garbage() {
        let err =
            parse_code_response(&json!({"jsonrpc":"2.0","id":1,"error":{"code":-32000,"message":"nope"}})).unwrap_err();
        assert!(matches!(err, RpcError::Remote { code: -32000, .. }));
        assert!(matches!(
            parse_code_response(&json!({"result":"6080"})),
            Err(RpcError::Malformed(_))
        ));
        assert!(matches!(
            parse_code_response(&json!({"result":"0x608"})),
            Err(RpcError::Malformed(_))
        ));
        assert!(matches!(
            parse_code_response(&json!({"id":1})),
            Err(RpcError::Malformed(_))
        ));
    }
}
