//! Flow-record ingestion: CSV parsing against a schema descriptor, typed
//! datasets, stratified splitting, and an NDJSON debug dump.

use std::collections::HashMap;
use std::io::{BufRead, BufReader, Read, Write};
use std::sync::{Arc, OnceLock};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::DataError;

/// Binary class for a flow: 0 = normal traffic.
pub const NORMAL: u8 = 0;
/// Binary class for a flow: 1 = attack traffic.
pub const ATTACK: u8 = 1;

/// How a CSV column is interpreted.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ColumnKind {
    /// Parsed as a 64-bit float into the record's feature map.
    Numeric,
    /// Kept as a string; only `service` and `attack_cat` are retained.
    Token,
    /// The binary class column; exactly one per schema.
    Label,
}

/// One column of the capture layout.
#[derive(Debug, Clone)]
pub struct ColumnSpec {
    pub name: String,
    pub kind: ColumnKind,
}

/// Capture file layout: column names and kinds by position.
#[derive(Debug, Clone)]
pub struct FlowSchema {
    columns: Vec<ColumnSpec>,
    /// (column index, name) of every numeric column, in column order.
    numeric: Vec<(usize, String)>,
    /// feature name -> slot in `FlowRecord::values`.
    numeric_slots: HashMap<String, usize>,
    label_col: usize,
    service_col: Option<usize>,
    attack_family_col: Option<usize>,
}

impl FlowSchema {
    pub fn new(columns: Vec<ColumnSpec>) -> Result<Self, DataError> {
        if columns.is_empty() {
            return Err(DataError::Schema("no columns declared".into()));
        }
        let mut label_cols = columns
            .iter()
            .enumerate()
            .filter(|(_, c)| c.kind == ColumnKind::Label);
        let label_col = label_cols
            .next()
            .ok_or_else(|| DataError::Schema("no label column declared".into()))?
            .0;
        if label_cols.next().is_some() {
            return Err(DataError::Schema("more than one label column".into()));
        }
        let numeric: Vec<(usize, String)> = columns
            .iter()
            .enumerate()
            .filter(|(_, c)| c.kind == ColumnKind::Numeric)
            .map(|(i, c)| (i, c.name.clone()))
            .collect();
        let numeric_slots = numeric
            .iter()
            .enumerate()
            .map(|(slot, (_, name))| (name.clone(), slot))
            .collect();
        let find_token = |name: &str| {
            columns
                .iter()
                .position(|c| c.kind == ColumnKind::Token && c.name == name)
        };
        let service_col = find_token("service");
        let attack_family_col = find_token("attack_cat");
        Ok(FlowSchema {
            columns,
            numeric,
            numeric_slots,
            label_col,
            service_col,
            attack_family_col,
        })
    }

    /// Parses a descriptor: one `<index> <name> <kind>` line per column,
    /// `#` comments and blank lines ignored. Indices must form 0..n.
    pub fn parse_descriptor(text: &str) -> Result<Self, DataError> {
        let mut entries: Vec<(usize, ColumnSpec)> = Vec::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let mut parts = line.split_whitespace();
            let (idx, name, kind) = match (parts.next(), parts.next(), parts.next()) {
                (Some(i), Some(n), Some(k)) => (i, n, k),
                _ => {
                    return Err(DataError::Schema(format!(
                        "descriptor line {}: expected `<index> <name> <kind>`, got {:?}",
                        lineno + 1,
                        line
                    )))
                }
            };
            let idx: usize = idx.parse().map_err(|_| {
                DataError::Schema(format!(
                    "descriptor line {}: bad column index {:?}",
                    lineno + 1,
                    idx
                ))
            })?;
            let kind = match kind {
                "numeric" => ColumnKind::Numeric,
                "token" => ColumnKind::Token,
                "label" => ColumnKind::Label,
                other => {
                    return Err(DataError::Schema(format!(
                        "descriptor line {}: unknown kind {:?}",
                        lineno + 1,
                        other
                    )))
                }
            };
            entries.push((
                idx,
                ColumnSpec {
                    name: name.to_string(),
                    kind,
                },
            ));
        }
        entries.sort_by_key(|(i, _)| *i);
        for (expected, (got, _)) in entries.iter().enumerate() {
            if *got != expected {
                return Err(DataError::Schema(format!(
                    "column indices must cover 0..{} exactly; missing or duplicate index {}",
                    entries.len(),
                    expected
                )));
            }
        }
        Self::new(entries.into_iter().map(|(_, c)| c).collect())
    }

    /// The bundled UNSW-NB15 49-column layout.
    pub fn unsw_nb15() -> &'static Arc<FlowSchema> {
        static SCHEMA: OnceLock<Arc<FlowSchema>> = OnceLock::new();
        SCHEMA.get_or_init(|| {
            Arc::new(
                FlowSchema::parse_descriptor(include_str!("../assets/unsw_nb15.schema"))
                    .expect("bundled schema is valid"),
            )
        })
    }

    pub fn column_count(&self) -> usize {
        self.columns.len()
    }

    /// Numeric feature names, in column order.
    pub fn feature_names(&self) -> impl Iterator<Item = &str> {
        self.numeric.iter().map(|(_, n)| n.as_str())
    }

    pub fn feature_count(&self) -> usize {
        self.numeric.len()
    }

    /// Slot of a numeric feature within `FlowRecord::values`.
    pub fn feature_slot(&self, name: &str) -> Option<usize> {
        self.numeric_slots.get(name).copied()
    }
}

/// One parsed flow: numeric features (schema order), service token, binary
/// label, and the attack family when labelled.
#[derive(Debug, Clone, PartialEq)]
pub struct FlowRecord {
    pub values: Vec<f64>,
    pub service: String,
    pub label: u8,
    pub attack_family: Option<String>,
}

/// An ordered set of flow records sharing one schema.
#[derive(Debug, Clone)]
pub struct Dataset {
    schema: Arc<FlowSchema>,
    records: Vec<FlowRecord>,
    pub source_id: String,
}

impl Dataset {
    pub fn from_records(
        schema: Arc<FlowSchema>,
        records: Vec<FlowRecord>,
        source_id: impl Into<String>,
    ) -> Self {
        Dataset {
            schema,
            records,
            source_id: source_id.into(),
        }
    }

    pub fn schema(&self) -> &Arc<FlowSchema> {
        &self.schema
    }

    pub fn records(&self) -> &[FlowRecord] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// Named feature of one record.
    pub fn feature(&self, row: usize, name: &str) -> Option<f64> {
        let slot = self.schema.feature_slot(name)?;
        self.records.get(row).map(|r| r.values[slot])
    }

    pub fn labels(&self) -> Vec<u8> {
        self.records.iter().map(|r| r.label).collect()
    }

    /// Copies the given rows (kept in the given order) into a new dataset.
    pub fn select(&self, indices: &[usize]) -> Dataset {
        Dataset {
            schema: Arc::clone(&self.schema),
            records: indices.iter().map(|&i| self.records[i].clone()).collect(),
            source_id: self.source_id.clone(),
        }
    }

    /// Concatenates parts that share a schema; record order follows the
    /// order of the parts.
    pub fn merge(parts: Vec<Dataset>) -> Result<Dataset, DataError> {
        let mut iter = parts.into_iter();
        let mut merged = iter.next().ok_or(DataError::EmptyInput)?;
        for part in iter {
            if part.schema.column_count() != merged.schema.column_count() {
                return Err(DataError::Schema(
                    "cannot merge datasets with different schemas".into(),
                ));
            }
            merged.records.extend(part.records);
            merged.source_id = format!("{}+{}", merged.source_id, part.source_id);
        }
        Ok(merged)
    }
}

/// Exact per-class record counts: (normal, attack).
pub fn class_counts(dataset: &Dataset) -> (usize, usize) {
    let attack = dataset
        .records
        .iter()
        .filter(|r| r.label == ATTACK)
        .count();
    (dataset.len() - attack, attack)
}

/// Parses a headerless capture stream against `schema`. The first defective
/// row aborts the parse with its line number; nothing is silently zeroed.
pub fn parse_flow_csv(
    input: impl Read,
    schema: &Arc<FlowSchema>,
    source_id: impl Into<String>,
) -> Result<Dataset, DataError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .from_reader(input);
    let expected = schema.column_count();
    let mut records = Vec::new();
    let mut raw = csv::StringRecord::new();
    while reader.read_record(&mut raw).map_err(io_like)? {
        let line = raw.position().map_or(records.len() as u64 + 1, |p| p.line());
        if raw.len() != expected {
            return Err(DataError::MalformedRow {
                line,
                expected,
                found: raw.len(),
            });
        }
        records.push(parse_record(&raw, schema, line)?);
    }
    if records.is_empty() {
        return Err(DataError::EmptyInput);
    }
    Ok(Dataset::from_records(
        Arc::clone(schema),
        records,
        source_id,
    ))
}

fn io_like(err: csv::Error) -> DataError {
    match err.into_kind() {
        csv::ErrorKind::Io(e) => DataError::Io(e),
        other => DataError::Schema(format!("csv: {:?}", other)),
    }
}

fn parse_record(
    raw: &csv::StringRecord,
    schema: &FlowSchema,
    line: u64,
) -> Result<FlowRecord, DataError> {
    let mut values = Vec::with_capacity(schema.numeric.len());
    for (col, name) in &schema.numeric {
        let cell = raw.get(*col).unwrap_or("").trim();
        if cell.is_empty() {
            return Err(DataError::BadNumber {
                line,
                column: name.clone(),
                value: String::new(),
            });
        }
        let value: f64 = cell.parse().map_err(|_| DataError::BadNumber {
            line,
            column: name.clone(),
            value: cell.to_string(),
        })?;
        if !value.is_finite() {
            return Err(DataError::NonFiniteNumber {
                line,
                column: name.clone(),
                value,
            });
        }
        values.push(value);
    }
    let label_cell = raw.get(schema.label_col).unwrap_or("").trim();
    let label = match label_cell {
        "" => return Err(DataError::MissingLabel { line }),
        "0" => NORMAL,
        "1" => ATTACK,
        other => {
            return Err(DataError::BadLabel {
                line,
                value: other.to_string(),
            })
        }
    };
    let service = match schema.service_col {
        Some(col) => canonical_service(raw.get(col).unwrap_or("").trim()),
        None => String::new(),
    };
    let attack_family = schema
        .attack_family_col
        .and_then(|col| raw.get(col))
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(str::to_string);
    Ok(FlowRecord {
        values,
        service,
        label,
        attack_family,
    })
}

/// The captures mark an undetermined service as "-".
fn canonical_service(raw: &str) -> String {
    if raw == "-" {
        "unknown".to_string()
    } else {
        raw.to_string()
    }
}

/// Splits `0..labels.len()` into (first, rest) index sets where `first`
/// holds a `fraction` share, stratified by label. Per-class allocations use
/// floor counts plus largest-remainder top-up, so each class lands within
/// one record of its exact share. Both outputs are sorted, preserving the
/// original record order inside each part.
pub(crate) fn stratified_indices(
    labels: &[u8],
    fraction: f64,
    seed: u64,
) -> Result<(Vec<usize>, Vec<usize>), DataError> {
    if !(fraction > 0.0 && fraction < 1.0) {
        return Err(DataError::BadFraction(fraction));
    }
    let mut by_class: [Vec<usize>; 2] = [Vec::new(), Vec::new()];
    for (i, &label) in labels.iter().enumerate() {
        by_class[label as usize].push(i);
    }
    for class in 0..2u8 {
        let count = by_class[class as usize].len();
        if count < 2 {
            return Err(DataError::CannotStratify { class, count });
        }
    }

    let total = labels.len();
    let target = (total as f64 * fraction).round() as usize;
    let mut alloc = [0usize; 2];
    let mut remainders = [0f64; 2];
    for c in 0..2 {
        let exact = by_class[c].len() as f64 * fraction;
        alloc[c] = exact.floor() as usize;
        remainders[c] = exact - exact.floor();
    }
    let mut leftover = target.saturating_sub(alloc[0] + alloc[1]);
    // Top up by largest remainder, one per class; ties go to class 0.
    let order = if remainders[1] > remainders[0] {
        [1, 0]
    } else {
        [0, 1]
    };
    for c in order {
        if leftover > 0 && alloc[c] < by_class[c].len() {
            alloc[c] += 1;
            leftover -= 1;
        }
    }
    // Any residue (caps hit) goes wherever capacity remains.
    for c in 0..2 {
        while leftover > 0 && alloc[c] < by_class[c].len() {
            alloc[c] += 1;
            leftover -= 1;
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut first = Vec::with_capacity(target);
    let mut rest = Vec::with_capacity(total - target);
    for c in 0..2 {
        let mut pool = by_class[c].clone();
        pool.shuffle(&mut rng);
        first.extend_from_slice(&pool[..alloc[c]]);
        rest.extend_from_slice(&pool[alloc[c]..]);
    }
    first.sort_unstable();
    rest.sort_unstable();
    Ok((first, rest))
}

/// Stratified train/test split: per-class proportions in each part match the
/// whole within one record per class; deterministic for a fixed seed.
pub fn stratified_split(
    dataset: &Dataset,
    train_fraction: f64,
    seed: u64,
) -> Result<(Dataset, Dataset), DataError> {
    let labels = dataset.labels();
    let (train_idx, test_idx) = stratified_indices(&labels, train_fraction, seed)?;
    Ok((dataset.select(&train_idx), dataset.select(&test_idx)))
}

/// Writes one JSON object per record: feature map, service, label, family.
pub fn write_ndjson(dataset: &Dataset, mut out: impl Write) -> Result<(), DataError> {
    for record in &dataset.records {
        let mut features = serde_json::Map::new();
        for (slot, (_, name)) in dataset.schema.numeric.iter().enumerate() {
            features.insert(name.clone(), serde_json::json!(record.values[slot]));
        }
        let obj = serde_json::json!({
            "features": features,
            "service": record.service,
            "label": record.label,
            "attack_family": record.attack_family,
        });
        serde_json::to_writer(&mut out, &obj).map_err(|e| DataError::Dump(e.to_string()))?;
        out.write_all(b"\n")?;
    }
    Ok(())
}

/// Reads an NDJSON dump back into a dataset under the given schema.
pub fn read_ndjson(
    input: impl Read,
    schema: &Arc<FlowSchema>,
    source_id: impl Into<String>,
) -> Result<Dataset, DataError> {
    let reader = BufReader::new(input);
    let mut records = Vec::new();
    for (lineno, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let obj: serde_json::Value = serde_json::from_str(&line)
            .map_err(|e| DataError::Dump(format!("line {}: {}", lineno + 1, e)))?;
        let features = obj
            .get("features")
            .and_then(|f| f.as_object())
            .ok_or_else(|| DataError::Dump(format!("line {}: no feature map", lineno + 1)))?;
        let mut values = Vec::with_capacity(schema.numeric.len());
        for (_, name) in &schema.numeric {
            let v = features.get(name).and_then(|v| v.as_f64()).ok_or_else(|| {
                DataError::Dump(format!("line {}: missing feature {:?}", lineno + 1, name))
            })?;
            values.push(v);
        }
        let label = obj.get("label").and_then(|v| v.as_u64()).unwrap_or(2);
        if label > 1 {
            return Err(DataError::Dump(format!("line {}: bad label", lineno + 1)));
        }
        records.push(FlowRecord {
            values,
            service: obj
                .get("service")
                .and_then(|v| v.as_str())
                .unwrap_or("")
                .to_string(),
            label: label as u8,
            attack_family: obj
                .get("attack_family")
                .and_then(|v| v.as_str())
                .map(str::to_string),
        });
    }
    if records.is_empty() {
        return Err(DataError::EmptyInput);
    }
    Ok(Dataset::from_records(
        Arc::clone(schema),
        records,
        source_id,
    ))
}
