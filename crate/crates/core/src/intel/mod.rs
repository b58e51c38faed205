//! Address intelligence: contract/EOA classification, core-day tallies and
//! outlier flagging.

mod labels;
mod rpc;

use std::collections::{BTreeMap, BTreeSet};

use chrono::NaiveDate;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::address::Address;

pub use labels::{AddressKind, LabelEntry, LabelError, LabelStore, LABELS_HEADER};
pub use rpc::{parse_code_response, CodeLookup, JsonRpcClient, RpcError, RpcOptions, RPC_URL_ENV};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum IntelError {
    #[error("the null address cannot be classified")]
    NullAddress,
    #[error("duplicate day {0} in core results")]
    DuplicateDay(NaiveDate),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Classification {
    pub kind: AddressKind,
    pub label: Option<String>,
}

impl Classification {
    fn from_entry(e: &LabelEntry) -> Self {
        Classification {
            kind: e.kind,
            label: (!e.label.is_empty()).then(|| e.label.clone()),
        }
    }

    fn unknown() -> Self {
        Classification {
            kind: AddressKind::Unknown,
            label: None,
        }
    }
}

fn kind_from_code(code: &[u8]) -> AddressKind {
    if code.is_empty() {
        AddressKind::ExternallyOwned
    } else {
        AddressKind::Contract
    }
}

fn rpc_entry(kind: AddressKind) -> LabelEntry {
    LabelEntry {
        label: String::new(),
        kind,
        source: "rpc".to_string(),
    }
}

/// Label store first, then the code lookup (cached back into the store),
/// else unknown.
pub fn classify_address(
    address: &Address,
    labels: &mut LabelStore,
    rpc: Option<&dyn CodeLookup>,
) -> Result<Classification, IntelError> {
    if address.is_null() {
        return Err(IntelError::NullAddress);
    }
    if let Some(e) = labels.get(address) {
        return Ok(Classification::from_entry(e));
    }
    let Some(rpc) = rpc else {
        return Ok(Classification::unknown());
    };
    match rpc.code_at(address) {
        Ok(code) => {
            let kind = kind_from_code(&code);
            labels.insert(*address, rpc_entry(kind));
            Ok(Classification { kind, label: None })
        }
        Err(e) => {
            log::warn!("code lookup for {address} failed: {e}; classifying as unknown");
            Ok(Classification::unknown())
        }
    }
}

/// Classifies many addresses, running lookups on up to `parallelism` threads.
///
/// Store writes happen on the calling thread after all lookups finish.
pub fn classify_many(
    addresses: &[Address],
    labels: &mut LabelStore,
    rpc: Option<&dyn CodeLookup>,
    parallelism: usize,
) -> Result<BTreeMap<Address, Classification>, IntelError> {
    let mut out = BTreeMap::new();
    let mut misses = Vec::new();
    for a in addresses {
        if a.is_null() {
            return Err(IntelError::NullAddress);
        }
        match labels.get(a) {
            Some(e) => {
                out.insert(*a, Classification::from_entry(e));
            }
            None => misses.push(*a),
        }
    }
    misses.sort();
    misses.dedup();
    let Some(rpc) = rpc else {
        for a in misses {
            out.insert(a, Classification::unknown());
        }
        return Ok(out);
    };
    let lookup = |a: &Address| (*a, rpc.code_at(a));
    let results: Vec<_> = match rayon::ThreadPoolBuilder::new().num_threads(parallelism.max(1)).build() {
        Ok(pool) => pool.install(|| misses.par_iter().map(lookup).collect()),
        Err(_) => misses.iter().map(lookup).collect(),
    };
    for (a, result) in results {
        let class = match result {
            Ok(code) => {
                let kind = kind_from_code(&code);
                labels.insert(a, rpc_entry(kind));
                Classification { kind, label: None }
            }
            Err(e) => {
                log::warn!("code lookup for {a} failed: {e}; classifying as unknown");
                Classification::unknown()
            }
        };
        out.insert(a, class);
    }
    Ok(out)
}

/// Days on which each address was in the core. Addresses never in the core are absent.
pub fn tally_core_days<'a, I>(results: I) -> Result<BTreeMap<Address, u32>, IntelError>
where
    I: IntoIterator<Item = (NaiveDate, &'a [Address])>,
{
    let mut seen = BTreeSet::new();
    let mut tally = BTreeMap::new();
    for (day, core) in results {
        if !seen.insert(day) {
            return Err(IntelError::DuplicateDay(day));
        }
        let unique: BTreeSet<&Address> = core.iter().collect();
        for a in unique {
            *tally.entry(*a).or_insert(0) += 1;
        }
    }
    Ok(tally)
}

/// Quantile by linear interpolation between closest ranks; `sorted` must be ascending.
pub fn quantile(sorted: &[f64], q: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * q;
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

/// Upper Tukey fence `Q3 + 1.5·IQR`, or `None` for fewer than 4 values.
pub fn upper_fence(values: &[u32]) -> Option<f64> {
    if values.len() < 4 {
        return None;
    }
    let mut sorted: Vec<f64> = values.iter().map(|&v| v as f64).collect();
    sorted.sort_by(f64::total_cmp);
    let q1 = quantile(&sorted, 0.25);
    let q3 = quantile(&sorted, 0.75);
    Some(q3 + 1.5 * (q3 - q1))
}

/// Addresses above the upper fence of their kind group.
///
/// Addresses missing from `kinds` form the `unknown` group.
pub fn flag_outliers(tallies: &BTreeMap<Address, u32>, kinds: &BTreeMap<Address, AddressKind>) -> BTreeSet<Address> {
    let mut groups: BTreeMap<AddressKind, Vec<(Address, u32)>> = BTreeMap::new();
    for (a, &days) in tallies {
        let kind = kinds.get(a).copied().unwrap_or(AddressKind::Unknown);
        groups.entry(kind).or_default().push((*a, days));
    }
    let mut flagged = BTreeSet::new();
    for members in groups.values() {
        let values: Vec<u32> = members.iter().map(|&(_, d)| d).collect();
        if let Some(fence) = upper_fence(&values) {
            flagged.extend(members.iter().filter(|&&(_, d)| d as f64 > fence).map(|&(a, _)| a));
        }
    }
    flagged
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AddressProfile {
    pub address: Address,
    pub kind: AddressKind,
    pub label: Option<String>,
    pub core_days: u32,
    pub outlier: bool,
}

/// One profile per tallied address, most core days first, ties by address.
pub fn build_profiles(
    tallies: &BTreeMap<Address, u32>,
    classes: &BTreeMap<Address, Classification>,
) -> Vec<AddressProfile> {
    let kinds: BTreeMap<Address, AddressKind> = classes.iter().map(|(a, c)| (*a, c.kind)).collect();
    let outliers = flag_outliers(tallies, &kinds);
    let mut profiles: Vec<AddressProfile> = tallies
        .iter()
        .map(|(a, &days)| {
            let class = classes.get(a).cloned().unwrap_or_else(Classification::unknown);
            AddressProfile {
                address: *a,
                kind: class.kind,
                label: class.label,
                core_days: days,
                outlier: outliers.contains(a),
            }
        })
        .collect();
    profiles.sort_by(|x, y| y.core_days.cmp(&x.core_days).then(x.address.cmp(&y.address)));
    profiles
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::sync::atomic::{AtomicUsize, Ordering};

    struct FakeChain {
        contracts: BTreeSet<Address>,
        calls: AtomicUsize,
        fail: bool,
    }

    impl CodeLookup for FakeChain {
        fn code_at(&self, address: &Address) -> Result<Vec<u8>, RpcError> {
            self.calls.fetch_add(1, Ordering::SeqCst);
            if self.fail {
                return Err(RpcError::Transport("connection refused".into()));
            }
            Ok(if self.contracts.contains(address) {
                vec![0x60, 0x80]
            } else {
                vec![]
            })
        }
    }

    fn a(i: u64) -> Address {
        Address::synthetic(i)
    }

    fn chain(contracts: &[u64], fail: bool) -> FakeChain {
        FakeChain {
            contracts: contracts.iter().map(|&i| a(i)).collect(),
            calls: AtomicUsize::new(0),
            fail,
        }
    }

    #[test]
    fn rpc_code_decides_kind_and_is_cached() {
        let rpc = chain(&[1], false);
        let mut store = LabelStore::new();
        let c = classify_address(&a(1), &mut store, Some(&rpc)).unwrap();
        assert_eq!(c.kind, AddressKind::Contract);
        let e = classify_address(&a(2), &mut store, Some(&rpc)).unwrap();
        assert_eq!(e.kind, AddressKind::ExternallyOwned);
        assert_eq!(store.get(&a(1)).unwrap().source, "rpc");
        // cached: no further calls, even offline
        let again = classify_address(&a(1), &mut store, None).unwrap();
        assert_eq!(again.kind, AddressKind::Contract);
        assert_eq!(rpc.calls.load(Ordering::SeqCst), 2);
    }

    #[test]
    fn label_store_wins_over_rpc() {
        let rpc = chain(&[3], false);
        let mut store = LabelStore::new();
        store.insert(
            a(3),
            LabelEntry {
                label: "Binance".into(),
                kind: AddressKind::ExternallyOwned,
                source: "user".into(),
            },
        );
        let c = classify_address(&a(3), &mut store, Some(&rpc)).unwrap();
        assert_eq!(c.kind, AddressKind::ExternallyOwned);
        assert_eq!(c.label.as_deref(), Some("Binance"));
        assert_eq!(rpc.calls.load(Ordering::SeqCst), 0);
    }

    #[test]
    fn failures_and_offline_give_unknown() {
        let rpc = chain(&[], true);
        let mut store = LabelStore::new();
        assert_eq!(
            classify_address(&a(4), &mut store, Some(&rpc)).unwrap().kind,
            AddressKind::Unknown
        );
        assert!(store.is_empty());
        assert_eq!(
            classify_address(&a(4), &mut store, None).unwrap().kind,
            AddressKind::Unknown
        );
        assert_eq!(
            classify_address(&Address::NULL, &mut store, None),
            Err(IntelError::NullAddress)
        );
    }

    #[test]
    fn classify_many_parallel_matches_serial() {
        let rpc = chain(&[1, 5, 9], false);
        let addrs: Vec<Address> = (0..12).map(a).collect();
        let mut s1 = LabelStore::new();
        let mut s2 = LabelStore::new();
        let par = classify_many(&addrs, &mut s1, Some(&rpc), 4).unwrap();
        let ser = classify_many(&addrs, &mut s2, Some(&rpc), 1).unwrap();
        assert_eq!(par, ser);
        assert_eq!(s1, s2);
        assert_eq!(par[&a(5)].kind, AddressKind::Contract);
        assert_eq!(par[&a(6)].kind, AddressKind::ExternallyOwned);
    }

    #[test]
    fn tallies() {
        let core = [a(1), a(2)];
        let only = [a(1)];
        let empty: [Address; 0] = [];
        let d = |i| NaiveDate::from_ymd_opt(2021, 4, i).unwrap();
        let t = tally_core_days([
            (d(1), &core[..]),
            (d(2), &only[..]),
            (d(3), &empty[..]),
            (d(4), &only[..]),
            (d(5), &empty[..]),
        ])
        .unwrap();
        assert_eq!(t[&a(1)], 3);
        assert_eq!(t[&a(2)], 1);
        let none = tally_core_days([(d(1), &empty[..]), (d(2), &empty[..])]).unwrap();
        assert!(none.is_empty());
        assert_eq!(
            tally_core_days([(d(1), &only[..]), (d(1), &only[..])]),
            Err(IntelError::DuplicateDay(d(1)))
        );
    }

    #[test]
    fn fences_and_outliers() {
        let eoa = |vals: &[u32]| -> (BTreeMap<Address, u32>, BTreeMap<Address, AddressKind>) {
            let t: BTreeMap<_, _> = vals.iter().enumerate().map(|(i, &v)| (a(i as u64), v)).collect();
            let k = t.keys().map(|&x| (x, AddressKind::ExternallyOwned)).collect();
            (t, k)
        };
        let (t, k) = eoa(&[1, 1, 1, 1, 100]);
        assert_eq!(upper_fence(&[1, 1, 1, 1, 100]), Some(1.0));
        assert_eq!(flag_outliers(&t, &k), [a(4)].into_iter().collect());
        let (t, k) = eoa(&[5, 5, 5, 5, 5]);
        assert!(flag_outliers(&t, &k).is_empty());
        // linear interpolation: Q1 = 1.75, Q3 = 3.25
        assert_eq!(upper_fence(&[1, 2, 3, 4]), Some(5.5));
        let (t, k) = eoa(&[1, 2, 3, 4]);
        assert!(flag_outliers(&t, &k).is_empty());
        assert_eq!(upper_fence(&[1, 2, 100]), None);
    }

    #[test]
    fn groups_are_separate() {
        let mut t = BTreeMap::new();
        let mut k = BTreeMap::new();
        for i in 0..5u64 {
            t.insert(a(i), if i == 4 { 100 } else { 1 });
            k.insert(a(i), AddressKind::ExternallyOwned);
        }
        for i in 5..9u64 {
            t.insert(a(i), 100);
            k.insert(a(i), AddressKind::Contract);
        }
        assert_eq!(flag_outliers(&t, &k), [a(4)].into_iter().collect());
    }

    #[test]
    fn profiles_sorted_by_core_days() {
        let t: BTreeMap<_, _> = [(a(1), 2), (a(2), 9), (a(3), 2)].into_iter().collect();
        let p = build_profiles(&t, &BTreeMap::new());
        let order: Vec<_> = p.iter().map(|x| x.address).collect();
        assert_eq!(order, vec![a(2), a(1), a(3)]);
        assert!(p.iter().all(|x| x.kind == AddressKind::Unknown));
    }
}
