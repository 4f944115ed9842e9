//! Sample, schema, and dataset abstractions shared by the whole pipeline.
//!
//! A [`Dataset`] is a finite, randomly accessible collection of [`Sample`]s
//! that all conform to one [`Schema`]. Fields are either variable-length
//! token sequences or fixed-shape integer values; the schema records which.
//! [`compute_lengths`] derives the per-sample length statistics that drive
//! bucketed sampling.

use std::collections::BTreeMap;
use std::fmt;

use thiserror::Error;

/// Field index whose length drives bucketing when the caller does not
/// choose one explicitly.
pub const DEFAULT_KEY_FIELD: usize = 0;

/// Errors from dataset construction and length derivation.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DataError {
    #[error("field index {field} out of range for schema with {arity} fields")]
    FieldOutOfRange { field: usize, arity: usize },
    #[error("field {field} is a fixed-shape field; lengths require a variable-length field")]
    NotVarSeq { field: usize },
    #[error("sample {index} does not match the dataset schema: {detail}")]
    SchemaMismatch { index: usize, detail: String },
    #[error("fixed value has {len} elements but shape {shape:?} requires {expected}")]
    ShapeDataMismatch {
        shape: Vec<usize>,
        len: usize,
        expected: usize,
    },
}

/// The kind of one sample field, fixed at dataset-schema time.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FieldKind {
    /// Variable-length sequence of token ids.
    VarSeq,
    /// Fixed-shape numeric value; `shape` is empty for scalars.
    Fixed { shape: Vec<usize> },
}

impl fmt::Display for FieldKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FieldKind::VarSeq => write!(f, "varseq"),
            FieldKind::Fixed { shape } => write!(f, "fixed{shape:?}"),
        }
    }
}

/// Per-field kinds for every sample in a dataset.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Schema {
    fields: Vec<FieldKind>,
}

impl Schema {
    pub fn new(fields: Vec<FieldKind>) -> Self {
        Self { fields }
    }

    pub fn arity(&self) -> usize {
        self.fields.len()
    }

    pub fn fields(&self) -> &[FieldKind] {
        &self.fields
    }

    pub fn field(&self, k: usize) -> Option<&FieldKind> {
        self.fields.get(k)
    }

    /// Checks that `sample` has this schema's arity and per-field kinds.
    pub fn check_sample(&self, index: usize, sample: &Sample) -> Result<(), DataError> {
        if sample.arity() != self.arity() {
            return Err(DataError::SchemaMismatch {
                index,
                detail: format!("expected {} fields, got {}", self.arity(), sample.arity()),
            });
        }
        for (k, (kind, value)) in self.fields.iter().zip(sample.fields()).enumerate() {
            let actual = value.kind();
            if &actual != kind {
                return Err(DataError::SchemaMismatch {
                    index,
                    detail: format!("field {k}: expected {kind}, got {actual}"),
                });
            }
        }
        Ok(())
    }
}

/// A fixed-shape integer value; `shape` is empty for scalars and the data
/// is stored row-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FixedValue {
    shape: Vec<usize>,
    data: Vec<i64>,
}

impl FixedValue {
    pub fn new(shape: Vec<usize>, data: Vec<i64>) -> Result<Self, DataError> {
        let expected: usize = shape.iter().product();
        if data.len() != expected {
            return Err(DataError::ShapeDataMismatch { shape, len: data.len(), expected });
        }
        Ok(Self { shape, data })
    }

    pub fn scalar(value: i64) -> Self {
        Self { shape: Vec::new(), data: vec![value] }
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn data(&self) -> &[i64] {
        &self.data
    }
}

/// One field of a sample: a variable-length token sequence or a fixed value.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FieldValue {
    VarSeq(Vec<u32>),
    Fixed(FixedValue),
}

impl FieldValue {
    pub fn kind(&self) -> FieldKind {
        match self {
            FieldValue::VarSeq(_) => FieldKind::VarSeq,
            FieldValue::Fixed(v) => FieldKind::Fixed { shape: v.shape().to_vec() },
        }
    }

    /// The token sequence, if this field is variable-length.
    pub fn as_varseq(&self) -> Option<&[u32]> {
        match self {
            FieldValue::VarSeq(s) => Some(s),
            FieldValue::Fixed(_) => None,
        }
    }

    pub fn as_fixed(&self) -> Option<&FixedValue> {
        match self {
            FieldValue::VarSeq(_) => None,
            FieldValue::Fixed(v) => Some(v),
        }
    }
}

/// One data record: an ordered tuple of field values.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Sample {
    fields: Vec<FieldValue>,
}

impl Sample {
    pub fn new(fields: Vec<FieldValue>) -> Self {
        Self { fields }
    }

    pub fn arity(&self) -> usize {
        self.fields.len()
    }

    pub fn fields(&self) -> &[FieldValue] {
        &self.fields
    }

    pub fn field(&self, k: usize) -> Option<&FieldValue> {
        self.fields.get(k)
    }
}

/// An immutable, index-addressable collection of samples sharing one schema.
///
/// Random access is total and repeatable: the same index always returns the
/// same sample. Datasets are safe to share across concurrent readers.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Dataset {
    schema: Schema,
    samples: Vec<Sample>,
}

impl Dataset {
    /// Builds a dataset, verifying every sample against the schema.
    pub fn new(schema: Schema, samples: Vec<Sample>) -> Result<Self, DataError> {
        for (i, sample) in samples.iter().enumerate() {
            schema.check_sample(i, sample)?;
        }
        Ok(Self { schema, samples })
    }

    pub fn schema(&self) -> &Schema {
        &self.schema
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn get(&self, index: usize) -> Option<&Sample> {
        self.samples.get(index)
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Sample> {
        self.samples.iter()
    }
}

/// Per-sample lengths of one designated variable-length field, with summary
/// statistics.
///
/// The histogram maps each observed length to its count; counts always sum
/// to the dataset length. `min`/`max` are 0 on an empty dataset.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LengthStats {
    lengths: Vec<usize>,
    min: usize,
    max: usize,
    histogram: BTreeMap<usize, usize>,
}

impl LengthStats {
    /// Builds stats directly from a length vector. Used by tests and by
    /// planners that already hold lengths.
    pub fn from_lengths(lengths: Vec<usize>) -> Self {
        let mut histogram = BTreeMap::new();
        for &len in &lengths {
            *histogram.entry(len).or_insert(0) += 1;
        }
        let min = lengths.iter().copied().min().unwrap_or(0);
        let max = lengths.iter().copied().max().unwrap_or(0);
        Self { lengths, min, max, histogram }
    }

    pub fn lengths(&self) -> &[usize] {
        &self.lengths
    }

    /// Number of samples covered.
    pub fn len(&self) -> usize {
        self.lengths.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lengths.is_empty()
    }

    pub fn min(&self) -> usize {
        self.min
    }

    pub fn max(&self) -> usize {
        self.max
    }

    /// Observed length -> count. Unit-width bins; counts sum to `len()`.
    pub fn histogram(&self) -> &BTreeMap<usize, usize> {
        &self.histogram
    }

    /// Sum of all lengths, in tokens.
    pub fn total_tokens(&self) -> u64 {
        self.lengths.iter().map(|&l| l as u64).sum()
    }
}

/// Derives per-sample lengths of `key_field` in index order.
///
/// `key_field` must refer to a variable-length field; pass
/// [`DEFAULT_KEY_FIELD`] to key on the first field.
pub fn compute_lengths(dataset: &Dataset, key_field: usize) -> Result<LengthStats, DataError> {
    match dataset.schema().field(key_field) {
        None => {
            return Err(DataError::FieldOutOfRange {
                field: key_field,
                arity: dataset.schema().arity(),
            })
        }
        Some(FieldKind::Fixed { .. }) => return Err(DataError::NotVarSeq { field: key_field }),
        Some(FieldKind::VarSeq) => {}
    }
    let lengths = dataset
        .iter()
        .map(|s| {
            s.field(key_field)
                .and_then(FieldValue::as_varseq)
                .map(<[u32]>::len)
                .expect("schema guarantees a varseq field")
        })
        .collect();
    Ok(LengthStats::from_lengths(lengths))
}
