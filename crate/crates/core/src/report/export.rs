use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{CorrelationMatrix, FeatureTable, ReportError};
use crate::intel::AddressProfile;
use crate::util::fmt_f64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ExportFormat {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy)]
pub enum Artifact<'a> {
    Features(&'a FeatureTable),
    Correlation(&'a CorrelationMatrix),
    Profiles(&'a [AddressProfile]),
}

pub const FEATURE_COLUMNS: [&str; 15] = [
    "day",
    "n_components",
    "largest_component_ratio",
    "modularity",
    "degree_centrality_std",
    "n_core",
    "avg_core_degree",
    "n_core_raw",
    "avg_core_degree_raw",
    "z_error",
    "core_p_value",
    "significant",
    "daily_value",
    "daily_addresses",
    "daily_transfers",
];

pub const PROFILE_COLUMNS: [&str; 5] = ["address", "kind", "label", "core_days", "outlier"];

fn csv_string<F>(header: &[&str], mut rows: F) -> String
where
    F: FnMut(&mut csv::Writer<Vec<u8>>) -> csv::Result<()>,
{
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    w.write_record(header).expect("in-memory write");
    rows(&mut w).expect("in-memory write");
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 fields")
}

fn features_csv(table: &FeatureTable) -> String {
    csv_string(&FEATURE_COLUMNS, |w| {
        for r in &table.rows {
            let f = &r.features;
            w.write_record([
                f.day.to_string(),
                f.n_components.to_string(),
                fmt_f64(f.largest_component_ratio),
                fmt_f64(f.modularity),
                fmt_f64(f.degree_centrality_std),
                f.n_core.to_string(),
                fmt_f64(f.avg_core_degree),
                r.n_core_raw.to_string(),
                fmt_f64(r.avg_core_degree_raw),
                r.z_error.to_string(),
                r.core_p_value.map(fmt_f64).unwrap_or_default(),
                r.significant.to_string(),
                r.daily_value.to_string(),
                r.daily_addresses.to_string(),
                r.daily_transfers.to_string(),
            ])?;
        }
        Ok(())
    })
}

fn correlation_csv(m: &CorrelationMatrix) -> String {
    let mut header = vec!["feature"];
    header.extend(m.labels.iter().map(String::as_str));
    csv_string(&header, |w| {
        for (i, label) in m.labels.iter().enumerate() {
            let mut rec = vec![label.clone()];
            rec.extend(m.values[i].iter().map(|v| v.map(fmt_f64).unwrap_or_default()));
            w.write_record(&rec)?;
        }
        Ok(())
    })
}

fn profiles_csv(profiles: &[AddressProfile]) -> String {
    csv_string(&PROFILE_COLUMNS, |w| {
        for p in profiles {
            w.write_record([
                p.address.to_string(),
                p.kind.as_str().to_string(),
                p.label.clone().unwrap_or_default(),
                p.core_days.to_string(),
                p.outlier.to_string(),
            ])?;
        }
        Ok(())
    })
}

fn json_string<T: Serialize + ?Sized>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("serializable artifact");
    s.push('\n');
    s
}

/// Serialized bytes of an artifact; identical inputs give identical bytes.
pub fn to_bytes(artifact: Artifact<'_>, format: ExportFormat) -> Vec<u8> {
    let text = match (format, artifact) {
        (ExportFormat::Csv, Artifact::Features(t)) => features_csv(t),
        (ExportFormat::Csv, Artifact::Correlation(m)) => correlation_csv(m),
        (ExportFormat::Csv, Artifact::Profiles(p)) => profiles_csv(p),
        (ExportFormat::Json, Artifact::Features(t)) => json_string(t),
        (ExportFormat::Json, Artifact::Correlation(m)) => json_string(m),
        (ExportFormat::Json, Artifact::Profiles(p)) => json_string(p),
    };
    text.into_bytes()
}

pub fn export(artifact: Artifact<'_>, format: ExportFormat, path: &Path) -> Result<(), ReportError> {
    fs::write(path, to_bytes(artifact, format)).map_err(|source| ReportError::Io {
        path: path.to_path_buf(),
        source,
    })
}

#[cfg(test)]
mod tests {
    use super::super::table::tests::{meta, row};
    use super::super::{assemble_timeseries, correlation_from_series, CorrelationMethod};
    use super::*;
    use crate::intel::AddressKind;
    use crate::Address;

    #[test]
    fn two_rows_give_header_plus_two_lines() {
        let t = assemble_timeseries(meta(), vec![row(0, [2.0, 0.5, 0.5, 0.0, 1.0, 4.0]), row(1, [1.0; 6])]).unwrap();
        let csv = String::from_utf8(to_bytes(Artifact::Features(&t), ExportFormat::Csv)).unwrap();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines.len(), 3);
        assert_eq!(lines[0], FEATURE_COLUMNS.join(","));
        assert_eq!(lines[1], "2021-04-01,2,0.5,0.5,0,1,4,1,4,0,0.01,true,10,3,2");
        assert!(!csv.contains('\r'));
        assert_eq!(to_bytes(Artifact::Features(&t), ExportFormat::Csv), csv.into_bytes());
    }

    #[test]
    fn empty_profiles_are_header_only() {
        let csv = String::from_utf8(to_bytes(Artifact::Profiles(&[]), ExportFormat::Csv)).unwrap();
        assert_eq!(csv, "address,kind,label,core_days,outlier\n");
        assert_eq!(to_bytes(Artifact::Profiles(&[]), ExportFormat::Json), b"[]\n");
    }

    #[test]
    fn profiles_quote_labels() {
        let p = [AddressProfile {
            address: Address::synthetic(0),
            kind: AddressKind::ExternallyOwned,
            label: Some("Exchange, hot wallet".into()),
            core_days: 7,
            outlier: true,
        }];
        let csv = String::from_utf8(to_bytes(Artifact::Profiles(&p), ExportFormat::Csv)).unwrap();
        assert!(csv.ends_with(",EOA,\"Exchange, hot wallet\",7,true\n"));
    }

    #[test]
    fn undefined_correlations_are_blank() {
        let cols = vec![
            ("a".to_string(), vec![1.0, 2.0, 3.0]),
            ("b".to_string(), vec![5.0, 5.0, 5.0]),
        ];
        let m = correlation_from_series(&cols, CorrelationMethod::Pearson);
        let csv = String::from_utf8(to_bytes(Artifact::Correlation(&m), ExportFormat::Csv)).unwrap();
        assert_eq!(csv, "feature,a,b\na,1,\nb,,\n");
        let json: CorrelationMatrix =
            serde_json::from_slice(&to_bytes(Artifact::Correlation(&m), ExportFormat::Json)).unwrap();
        assert_eq!(json, m);
    }

    #[test]
    fn json_round_trips_table() {
        let t = assemble_timeseries(meta(), vec![row(0, [2.0, 0.5, 0.5, 0.0, 1.0, 4.0])]).unwrap();
        let back: FeatureTable = serde_json::from_slice(&to_bytes(Artifact::Features(&t), ExportFormat::Json)).unwrap();
        assert_eq!(back, t);
    }

    #[test]
    fn io_error_names_path() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("missing").join("x.csv");
        let err = export(Artifact::Profiles(&[]), ExportFormat::Csv, &path).unwrap_err();
        assert!(err.to_string().contains("missing"));
    }
}
