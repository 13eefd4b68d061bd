//! Service filtering, feature selection, and min-max normalization.

use crate::data::Dataset;
use crate::error::PreprocessError;
use crate::mat::Mat;
use crate::par;

/// The default nine selected flow features, in training order.
pub const DEFAULT_FEATURES: [&str; 9] = [
    "sload",
    "dload",
    "dmeansz",
    "smeansz",
    "stcpb",
    "dtcpb",
    "sttl",
    "djit",
    "trans_depth",
];

/// The default service whitelist.
pub const DEFAULT_SERVICES: [&str; 3] = ["unknown", "ftp", "dns"];

/// Selected feature columns with per-row labels.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix {
    features: Mat,
    column_names: Vec<String>,
    labels: Vec<u8>,
}

impl FeatureMatrix {
    pub fn new(features: Mat, column_names: Vec<String>, labels: Vec<u8>) -> Self {
        assert_eq!(features.nrows(), labels.len(), "row/label count mismatch");
        assert_eq!(features.ncols(), column_names.len(), "column name count");
        FeatureMatrix {
            features,
            column_names,
            labels,
        }
    }

    pub fn features(&self) -> &Mat {
        &self.features
    }

    pub fn column_names(&self) -> &[String] {
        &self.column_names
    }

    pub fn labels(&self) -> &[u8] {
        &self.labels
    }

    pub fn n_rows(&self) -> usize {
        self.features.nrows()
    }

    pub fn n_cols(&self) -> usize {
        self.features.ncols()
    }

    pub fn row(&self, i: usize) -> &[f64] {
        self.features.row(i)
    }

    /// Copies the given rows into a new matrix, labels included.
    pub fn select_rows(&self, indices: &[usize]) -> FeatureMatrix {
        FeatureMatrix {
            features: self.features.select_rows(indices),
            column_names: self.column_names.clone(),
            labels: indices.iter().map(|&i| self.labels[i]).collect(),
        }
    }
}

/// Keeps exactly the rows whose service is in `allowed`, preserving order.
/// An empty result is reported as a warning, not a failure.
pub fn filter_services(dataset: &Dataset, allowed: &[&str]) -> Dataset {
    let keep: Vec<usize> = dataset
        .records()
        .iter()
        .enumerate()
        .filter(|(_, r)| allowed.contains(&r.service.as_str()))
        .map(|(i, _)| i)
        .collect();
    if keep.is_empty() {
        log::warn!(
            "service filter {:?} left no records (of {})",
            allowed,
            dataset.len()
        );
    }
    dataset.select(&keep)
}

/// Extracts the named features into a dense matrix, columns in given order.
pub fn select_features(
    dataset: &Dataset,
    names: &[&str],
) -> Result<FeatureMatrix, PreprocessError> {
    let schema = dataset.schema();
    let mut slots = Vec::with_capacity(names.len());
    for name in names {
        let slot = schema
            .feature_slot(name)
            .ok_or_else(|| PreprocessError::UnknownFeature {
                name: name.to_string(),
                known: schema.feature_names().collect::<Vec<_>>().join(", "),
            })?;
        slots.push(slot);
    }
    let mut data = Vec::with_capacity(dataset.len() * names.len());
    for record in dataset.records() {
        for &slot in &slots {
            data.push(record.values[slot]);
        }
    }
    Ok(FeatureMatrix::new(
        Mat::from_vec(dataset.len(), names.len(), data),
        names.iter().map(|s| s.to_string()).collect(),
        dataset.labels(),
    ))
}

/// Per-column min/max captured from training rows only.
#[derive(Debug, Clone, PartialEq)]
pub struct Normalizer {
    column_names: Vec<String>,
    min: Vec<f64>,
    max: Vec<f64>,
}

impl Normalizer {
    pub fn from_parts(column_names: Vec<String>, min: Vec<f64>, max: Vec<f64>) -> Self {
        assert_eq!(column_names.len(), min.len());
        assert_eq!(min.len(), max.len());
        Normalizer {
            column_names,
            min,
            max,
        }
    }

    pub fn column_names(&self) -> &[String] {
        &self.column_names
    }

    pub fn n_cols(&self) -> usize {
        self.min.len()
    }

    pub fn min(&self) -> &[f64] {
        &self.min
    }

    pub fn max(&self) -> &[f64] {
        &self.max
    }

    /// Maps one raw value to (x-min)/(max-min), clamped into [0,1].
    /// Constant columns map to 0.
    fn scale(&self, col: usize, value: f64) -> f64 {
        let (lo, hi) = (self.min[col], self.max[col]);
        if hi == lo {
            return 0.0;
        }
        ((value - lo) / (hi - lo)).clamp(0.0, 1.0)
    }

    /// Normalizes one row of raw values in fitted column order.
    pub fn normalize_row(&self, raw: &[f64]) -> Result<Vec<f64>, PreprocessError> {
        if raw.len() != self.n_cols() {
            return Err(PreprocessError::WidthMismatch {
                expected: self.n_cols(),
                found: raw.len(),
            });
        }
        Ok(raw
            .iter()
            .enumerate()
            .map(|(c, &v)| self.scale(c, v))
            .collect())
    }

    /// Normalizes a bare matrix whose columns are in fitted order.
    pub fn normalize_mat(&self, mat: &Mat) -> Result<Mat, PreprocessError> {
        if mat.ncols() != self.n_cols() {
            return Err(PreprocessError::WidthMismatch {
                expected: self.n_cols(),
                found: mat.ncols(),
            });
        }
        let cols = mat.ncols();
        let rows = par::map_indexed(mat.nrows(), |i| {
            let src = mat.row(i);
            (0..cols).map(|c| self.scale(c, src[c])).collect::<Vec<_>>()
        });
        Ok(Mat::from_rows(&rows))
    }
}

/// Captures exact column-wise extrema of the training matrix.
pub fn fit_normalizer(train: &FeatureMatrix) -> Result<Normalizer, PreprocessError> {
    if train.n_rows() == 0 {
        return Err(PreprocessError::EmptyMatrix);
    }
    let cols = train.n_cols();
    let mut min = vec![f64::INFINITY; cols];
    let mut max = vec![f64::NEG_INFINITY; cols];
    for row in train.features().rows() {
        for (c, &v) in row.iter().enumerate() {
            if v < min[c] {
                min[c] = v;
            }
            if v > max[c] {
                max[c] = v;
            }
        }
    }
    Ok(Normalizer::from_parts(
        train.column_names().to_vec(),
        min,
        max,
    ))
}

/// Applies a fitted normalizer to a matrix with matching column names.
pub fn apply_normalizer(
    norm: &Normalizer,
    matrix: &FeatureMatrix,
) -> Result<FeatureMatrix, PreprocessError> {
    if matrix.column_names() != norm.column_names() {
        return Err(PreprocessError::ColumnMismatch {
            fitted: norm.column_names().join(","),
            applied: matrix.column_names().join(","),
        });
    }
    let scaled = norm.normalize_mat(matrix.features())?;
    Ok(FeatureMatrix::new(
        scaled,
        matrix.column_names().to_vec(),
        matrix.labels().to_vec(),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{Dataset, FlowRecord, FlowSchema};
    use std::sync::Arc;

    fn dataset_with(values: &[(f64, f64, &str)]) -> Dataset {
        let schema = Arc::new(
            FlowSchema::parse_descriptor(
                "0 service token\n1 sttl numeric\n2 sload numeric\n3 label label\n",
            )
            .unwrap(),
        );
        let records = values
            .iter()
            .map(|&(sttl, sload, service)| FlowRecord {
                values: vec![sttl, sload],
                service: service.to_string(),
                label: 0,
                attack_family: None,
            })
            .collect();
        Dataset::from_records(schema, records, "t")
    }

    fn matrix(rows: &[Vec<f64>]) -> FeatureMatrix {
        let names: Vec<String> = (0..rows[0].len()).map(|i| format!("f{i}")).collect();
        FeatureMatrix::new(Mat::from_rows(rows), names, vec![0; rows.len()])
    }

    #[test]
    fn filter_all_is_identity_and_none_is_empty() {
        let ds = dataset_with(&[(1.0, 2.0, "dns"), (3.0, 4.0, "ftp"), (5.0, 6.0, "http")]);
        let all = filter_services(&ds, &["dns", "ftp", "http"]);
        assert_eq!(all.len(), 3);
        assert_eq!(all.records(), ds.records());
        let none = filter_services(&ds, &[]);
        assert!(none.is_empty());
        let some = filter_services(&ds, &["ftp"]);
        assert_eq!(some.len(), 1);
        assert_eq!(some.records()[0].values, vec![3.0, 4.0]);
    }

    #[test]
    fn select_single_feature() {
        let ds = dataset_with(&[(1.0, 2.0, "dns"), (3.0, 4.0, "dns"), (5.0, 6.0, "dns")]);
        let m = select_features(&ds, &["sttl"]).unwrap();
        assert_eq!((m.n_rows(), m.n_cols()), (3, 1));
        assert_eq!(m.features().data(), &[1.0, 3.0, 5.0]);
    }

    #[test]
    fn unknown_feature_is_named_in_the_error() {
        let ds = dataset_with(&[(1.0, 2.0, "dns")]);
        let err = select_features(&ds, &["sttll"]).unwrap_err();
        assert!(err.to_string().contains("sttll"), "got {err}");
    }

    #[test]
    fn normalizer_stores_exact_extrema() {
        let m = matrix(&[vec![0.0], vec![5.0], vec![10.0]]);
        let norm = fit_normalizer(&m).unwrap();
        assert_eq!(norm.min(), &[0.0]);
        assert_eq!(norm.max(), &[10.0]);
        let constant = matrix(&[vec![3.0], vec![3.0], vec![3.0]]);
        let norm = fit_normalizer(&constant).unwrap();
        assert_eq!((norm.min()[0], norm.max()[0]), (3.0, 3.0));
    }

    #[test]
    fn extrema_match_brute_force_scan() {
        // Oracle: plain linear scan over every cell.
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        let rows: Vec<Vec<f64>> = (0..20)
            .map(|_| (0..3).map(|_| rng.gen_range(-100.0..100.0)).collect())
            .collect();
        let m = matrix(&rows);
        let norm = fit_normalizer(&m).unwrap();
        for c in 0..3 {
            let mut lo = f64::INFINITY;
            let mut hi = f64::NEG_INFINITY;
            for r in &rows {
                lo = lo.min(r[c]);
                hi = hi.max(r[c]);
            }
            assert_eq!(norm.min()[c], lo);
            assert_eq!(norm.max()[c], hi);
        }
    }

    #[test]
    fn apply_maps_extremes_and_midpoint() {
        let m = matrix(&[vec![0.0], vec![5.0], vec![10.0]]);
        let norm = fit_normalizer(&m).unwrap();
        let out = apply_normalizer(&norm, &m).unwrap();
        assert_eq!(out.features().data(), &[0.0, 0.5, 1.0]);
        // Out-of-range test value clamps.
        assert_eq!(norm.normalize_row(&[12.0]).unwrap(), vec![1.0]);
        let norm = Normalizer::from_parts(vec!["f0".into()], vec![2.0], vec![6.0]);
        assert_eq!(norm.normalize_row(&[4.0]).unwrap(), vec![0.5]);
    }

    #[test]
    fn constant_columns_normalize_to_zero() {
        let m = matrix(&[vec![3.0, 1.0], vec![3.0, 2.0]]);
        let norm = fit_normalizer(&m).unwrap();
        let out = apply_normalizer(&norm, &m).unwrap();
        assert_eq!(out.features().row(0), &[0.0, 0.0]);
        assert_eq!(out.features().row(1), &[0.0, 1.0]);
    }

    #[test]
    fn column_mismatch_is_rejected() {
        let m = matrix(&[vec![0.0], vec![1.0]]);
        let norm = fit_normalizer(&m).unwrap();
        let other = FeatureMatrix::new(
            Mat::from_rows(&[vec![0.0]]),
            vec!["other".into()],
            vec![0],
        );
        assert!(matches!(
            apply_normalizer(&norm, &other).unwrap_err(),
            PreprocessError::ColumnMismatch { .. }
        ));
    }

    #[test]
    fn training_values_land_in_unit_interval_with_exact_endpoints() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let rows: Vec<Vec<f64>> = (0..50)
            .map(|_| (0..4).map(|_| rng.gen_range(-1e6..1e6)).collect())
            .collect();
        let m = matrix(&rows);
        let norm = fit_normalizer(&m).unwrap();
        let out = apply_normalizer(&norm, &m).unwrap();
        for c in 0..4 {
            let col: Vec<f64> = (0..out.n_rows()).map(|r| out.features().get(r, c)).collect();
            assert!(col.iter().all(|v| (0.0..=1.0).contains(v)));
            assert_eq!(col.iter().cloned().fold(f64::INFINITY, f64::min), 0.0);
            assert_eq!(col.iter().cloned().fold(f64::NEG_INFINITY, f64::max), 1.0);
        }
    }
}
