use serde::{Deserialize, Serialize};

use super::{FeatureTable, ReportError};
use crate::features::FEATURE_NAMES;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CorrelationMethod {
    #[default]
    Pearson,
    Spearman,
}

/// Labels of the two auxiliary daily-total columns used by the extended matrix.
pub const AUX_NAMES: [&str; 2] = ["daily_value", "daily_addresses"];

/// Square, symmetric matrix; `None` marks entries involving a constant series.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationMatrix {
    pub labels: Vec<String>,
    pub values: Vec<Vec<Option<f64>>>,
}

impl CorrelationMatrix {
    pub fn get(&self, i: usize, j: usize) -> Option<f64> {
        self.values[i][j]
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }
}

fn constant(v: &[f64]) -> bool {
    v.iter().all(|&a| a == v[0])
}

/// Pearson correlation; `None` when either series has zero variance.
///
/// Results within rounding noise of ±1 are reported as exactly ±1.
pub fn pearson(x: &[f64], y: &[f64]) -> Option<f64> {
    let n = x.len().min(y.len());
    if n < 2 || constant(&x[..n]) || constant(&y[..n]) {
        return None;
    }
    let mx = x[..n].iter().sum::<f64>() / n as f64;
    let my = y[..n].iter().sum::<f64>() / n as f64;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for i in 0..n {
        let (dx, dy) = (x[i] - mx, y[i] - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return None;
    }
    let r = sxy / (sxx.sqrt() * syy.sqrt());
    Some(if (r.abs() - 1.0).abs() < 1e-14 {
        r.signum()
    } else {
        r.clamp(-1.0, 1.0)
    })
}

/// Ranks starting at 1, ties sharing their average rank.
pub fn ranks(x: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..x.len()).collect();
    idx.sort_by(|&a, &b| x[a].total_cmp(&x[b]));
    let mut out = vec![0.0; x.len()];
    let mut i = 0;
    while i < idx.len() {
        let mut j = i;
        while j + 1 < idx.len() && x[idx[j + 1]] == x[idx[i]] {
            j += 1;
        }
        let avg = (i + j) as f64 / 2.0 + 1.0;
        for &k in &idx[i..=j] {
            out[k] = avg;
        }
        i = j + 1;
    }
    out
}

/// Named columns from the table: the six features, optionally followed by the
/// two daily totals.
pub fn series(table: &FeatureTable, extended: bool) -> Vec<(String, Vec<f64>)> {
    let mut cols: Vec<(String, Vec<f64>)> = FEATURE_NAMES
        .iter()
        .enumerate()
        .map(|(i, name)| {
            (
                name.to_string(),
                table.rows.iter().map(|r| r.features.values()[i]).collect(),
            )
        })
        .collect();
    if extended {
        cols.push((
            AUX_NAMES[0].to_string(),
            table.rows.iter().map(|r| u256_to_f64(r.daily_value)).collect(),
        ));
        cols.push((
            AUX_NAMES[1].to_string(),
            table.rows.iter().map(|r| r.daily_addresses as f64).collect(),
        ));
    }
    cols
}

fn u256_to_f64(v: primitive_types::U256) -> f64 {
    v.0.iter()
        .rev()
        .fold(0.0, |acc, &limb| acc * 18446744073709551616.0 + limb as f64)
}

pub fn correlation_from_series(cols: &[(String, Vec<f64>)], method: CorrelationMethod) -> CorrelationMatrix {
    let data: Vec<Vec<f64>> = cols
        .iter()
        .map(|(_, v)| match method {
            CorrelationMethod::Pearson => v.clone(),
            CorrelationMethod::Spearman => ranks(v),
        })
        .collect();
    let k = cols.len();
    let mut values = vec![vec![None; k]; k];
    for i in 0..k {
        for j in i..k {
            let r = pearson(&data[i], &data[j]).map(|r| if i == j { 1.0 } else { r });
            values[i][j] = r;
            values[j][i] = r;
        }
    }
    CorrelationMatrix {
        labels: cols.iter().map(|(n, _)| n.clone()).collect(),
        values,
    }
}

/// Correlation of the six features (or eight with `extended`) across days.
pub fn correlation_matrix(
    table: &FeatureTable,
    method: CorrelationMethod,
    extended: bool,
) -> Result<CorrelationMatrix, ReportError> {
    if table.rows.len() < 2 {
        return Err(ReportError::TooFewRows(table.rows.len()));
    }
    Ok(correlation_from_series(&series(table, extended), method))
}

#[cfg(test)]
mod tests {
    use super::super::assemble_timeseries;
    use super::super::table::tests::{meta, row};
    use super::*;

    #[test]
    fn reference_pairs() {
        assert_eq!(pearson(&[1.0, 2.0, 3.0], &[2.0, 4.0, 6.0]), Some(1.0));
        assert_eq!(pearson(&[1.0, 2.0, 3.0], &[3.0, 2.0, 1.0]), Some(-1.0));
        assert_eq!(pearson(&[1.0, 2.0, 3.0], &[5.0, 5.0, 5.0]), None);
    }

    #[test]
    fn average_ranks() {
        assert_eq!(ranks(&[10.0, 30.0, 20.0, 20.0]), vec![1.0, 4.0, 2.5, 2.5]);
    }

    #[test]
    fn spearman_is_rank_based() {
        let cols = vec![
            ("a".to_string(), vec![1.0, 2.0, 3.0, 4.0]),
            ("b".to_string(), vec![1.0, 8.0, 27.0, 64.0]),
        ];
        let s = correlation_from_series(&cols, CorrelationMethod::Spearman);
        assert_eq!(s.get(0, 1), Some(1.0));
        let p = correlation_from_series(&cols, CorrelationMethod::Pearson);
        assert!(p.get(0, 1).unwrap() < 1.0);
    }

    #[test]
    fn matrix_from_table() {
        let t = assemble_timeseries(
            meta(),
            vec![
                row(0, [1.0, 0.5, 0.1, 0.2, 3.0, 4.0]),
                row(1, [2.0, 0.4, 0.3, 0.2, 5.0, 4.0]),
                row(2, [3.0, 0.2, 0.2, 0.2, 4.0, 4.0]),
            ],
        )
        .unwrap();
        let m = correlation_matrix(&t, CorrelationMethod::Pearson, false).unwrap();
        assert_eq!(m.len(), 6);
        // degree_centrality_std and avg_core_degree are constant
        for j in 0..6 {
            assert_eq!(m.get(3, j), None);
            assert_eq!(m.get(5, j), None);
        }
        assert_eq!(m.get(0, 0), Some(1.0));
        assert_eq!(m.get(0, 1), m.get(1, 0));
        let ext = correlation_matrix(&t, CorrelationMethod::Pearson, true).unwrap();
        assert_eq!(ext.len(), 8);
        assert_eq!(ext.labels[6], "daily_value");
    }

    #[test]
    fn needs_two_rows() {
        let t = assemble_timeseries(meta(), vec![row(0, [1.0; 6])]).unwrap();
        assert!(matches!(
            correlation_matrix(&t, CorrelationMethod::Pearson, false),
            Err(ReportError::TooFewRows(1))
        ));
    }

    #[test]
    fn u256_conversion() {
        let v = primitive_types::U256::from_dec_str("28230000000000000000000000000").unwrap();
        assert!((u256_to_f64(v) / 2.823e28 - 1.0).abs() < 1e-12);
    }
}
