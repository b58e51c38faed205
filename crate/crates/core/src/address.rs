//! 20-byte account addresses in canonical lowercase hex form.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

/// An Ethereum-style 20-byte address.
///
/// Ordering is byte-wise, which coincides with the ordering of the canonical
/// lowercase hex strings.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Address([u8; 20]);

#[derive(Debug, Error, PartialEq, Eq)]
pub enum AddressError {
    #[error("address must start with 0x: {0:?}")]
    MissingPrefix(String),
    #[error("address must have 40 hex digits, got {got}: {input:?}")]
    BadLength { input: String, got: usize },
    #[error("invalid hex digit in address {0:?}")]
    BadHex(String),
}

impl Address {
    /// The null address `0x000…000`, counterparty of mints and burns.
    pub const NULL: Address = Address([0u8; 20]);

    pub const fn from_bytes(bytes: [u8; 20]) -> Self {
        Address(bytes)
    }

    pub fn as_bytes(&self) -> &[u8; 20] {
        &self.0
    }

    pub fn is_null(&self) -> bool {
        self.0 == [0u8; 20]
    }

    /// Synthetic address whose big-endian tail encodes `index`.
    ///
    /// Used by generators and bindings that work with bare node ids. Index 0
    /// maps to `0x…01` so the null address is never produced, and the
    /// ordering of synthetic addresses follows the ordering of indices.
    pub fn synthetic(index: u64) -> Self {
        let mut bytes = [0u8; 20];
        bytes[12..].copy_from_slice(&(index + 1).to_be_bytes());
        bytes[0] = 0x5e;
        Address(bytes)
    }
}

impl FromStr for Address {
    type Err = AddressError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let trimmed = s.trim();
        let hex = trimmed
            .strip_prefix("0x")
            .or_else(|| trimmed.strip_prefix("0X"))
            .ok_or_else(|| AddressError::MissingPrefix(s.to_string()))?;
        if hex.len() != 40 {
            return Err(AddressError::BadLength {
                input: s.to_string(),
                got: hex.len(),
            });
        }
        let mut out = [0u8; 20];
        let raw = hex.as_bytes();
        for (i, byte) in out.iter_mut().enumerate() {
            let hi = nibble(raw[2 * i]).ok_or_else(|| AddressError::BadHex(s.to_string()))?;
            let lo = nibble(raw[2 * i + 1]).ok_or_else(|| AddressError::BadHex(s.to_string()))?;
            *byte = (hi << 4) | lo;
        }
        Ok(Address(out))
    }
}

fn nibble(c: u8) -> Option<u8> {
    match c {
        b'0'..=b'9' => Some(c - b'0'),
        b'a'..=b'f' => Some(c - b'a' + 10),
        b'A'..=b'F' => Some(c - b'A' + 10),
        _ => None,
    }
}

impl fmt::Display for Address {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("0x")?;
        for b in &self.0 {
            write!(f, "{b:02x}")?;
        }
        Ok(())
    }
}

impl fmt::Debug for Address {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl Serialize for Address {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Address {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_mixed_case_to_lowercase() {
        let a: Address = "0xAbCdEf0000000000000000000000000000000001".parse().unwrap();
        assert_eq!(a.to_string(), "0xabcdef0000000000000000000000000000000001");
    }

    #[test]
    fn rejects_wrong_length_and_bad_hex() {
        assert!(matches!(
            "0x1234".parse::<Address>(),
            Err(AddressError::BadLength { got: 4, .. })
        ));
        assert!(matches!(
            "0xzz00000000000000000000000000000000000000".parse::<Address>(),
            Err(AddressError::BadHex(_))
        ));
        assert!(matches!(
            "abcdef0000000000000000000000000000000001".parse::<Address>(),
            Err(AddressError::MissingPrefix(_))
        ));
    }

    #[test]
    fn null_address() {
        let a: Address = "0x0000000000000000000000000000000000000000".parse().unwrap();
        assert!(a.is_null());
        assert_eq!(a, Address::NULL);
    }

    #[test]
    fn synthetic_addresses_follow_index_order() {
        assert!(Address::synthetic(1) < Address::synthetic(2));
        assert!(Address::synthetic(255) < Address::synthetic(256));
        assert!(!Address::synthetic(0).is_null());
    }
}
