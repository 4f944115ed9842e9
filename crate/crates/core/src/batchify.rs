//! Composable transforms that turn a list of samples into one dense batch.
//!
//! Variable-length fields are padded to the batch maximum and stacked into a
//! `(batch, padded_len)` block with the true lengths recorded alongside;
//! fixed-shape fields are stacked directly. A [`BatchifyFn`] composes one
//! transform per field, so a whole sample tuple collates in a single call.
//!
//! All transforms are pure: the same inputs produce a bit-identical
//! [`Batch`], from any number of concurrent callers.

use std::borrow::Borrow;

use thiserror::Error;

use crate::dataset::{FieldKind, FieldValue, FixedValue, Sample, Schema};

/// Errors from padding, stacking, and batch composition.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BatchifyError {
    #[error("cannot batchify an empty list of {what}")]
    EmptyInput { what: &'static str },
    #[error("round_to must be at least 1")]
    InvalidRounding,
    #[error("row {row}: shape {actual:?} does not match first row's shape {expected:?}")]
    ShapeMismatch {
        row: usize,
        expected: Vec<usize>,
        actual: Vec<usize>,
    },
    #[error("sample {sample} has {actual} fields but the batchify fn expects {expected}")]
    ArityMismatch {
        sample: usize,
        expected: usize,
        actual: usize,
    },
    #[error("field {field}: {transform} cannot be applied to a {actual} value")]
    KindMismatch {
        field: usize,
        transform: &'static str,
        actual: &'static str,
    },
    #[error("field {field}: Stack on variable-length rows requires equal lengths (row {row} has {actual}, expected {expected})")]
    UnequalStackLengths {
        field: usize,
        row: usize,
        expected: usize,
        actual: usize,
    },
}

/// How to pad a variable-length field.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct PadSpec {
    /// Value written into padded positions.
    pub pad_value: u32,
    /// If set, the padded length is rounded up to this multiple.
    pub round_to: Option<usize>,
}

impl PadSpec {
    pub fn with_pad_value(pad_value: u32) -> Self {
        Self { pad_value, round_to: None }
    }

    pub fn rounded_to(mut self, multiple: usize) -> Self {
        self.round_to = Some(multiple);
        self
    }
}

/// Dense `(rows, cols)` block of padded sequences plus the true row lengths.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PaddedBlock {
    rows: usize,
    cols: usize,
    values: Vec<u32>,
    valid_lengths: Vec<usize>,
}

impl PaddedBlock {
    pub fn rows(&self) -> usize {
        self.rows
    }

    /// Padded length shared by every row.
    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn values(&self) -> &[u32] {
        &self.values
    }

    pub fn valid_lengths(&self) -> &[usize] {
        &self.valid_lengths
    }

    pub fn row(&self, i: usize) -> &[u32] {
        &self.values[i * self.cols..(i + 1) * self.cols]
    }

    /// Reconstructs the original sequences by truncating each row to its
    /// valid length. Exact inverse of [`pad`].
    pub fn depad(&self) -> Vec<Vec<u32>> {
        self.valid_lengths
            .iter()
            .enumerate()
            .map(|(i, &len)| self.row(i)[..len].to_vec())
            .collect()
    }

    /// Number of positions holding pad values: `rows * cols - sum(valid)`.
    pub fn padded_positions(&self) -> u64 {
        let total = (self.rows * self.cols) as u64;
        let valid: u64 = self.valid_lengths.iter().map(|&l| l as u64).sum();
        total - valid
    }
}

/// Dense stack of fixed-shape values: `(rows, ...shape)` row-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StackedBlock {
    rows: usize,
    shape: Vec<usize>,
    values: Vec<i64>,
}

impl StackedBlock {
    pub fn rows(&self) -> usize {
        self.rows
    }

    /// Per-row shape; empty for scalars.
    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn values(&self) -> &[i64] {
        &self.values
    }

    pub fn row(&self, i: usize) -> &[i64] {
        let stride: usize = self.shape.iter().product();
        &self.values[i * stride..(i + 1) * stride]
    }
}

/// One field of a batch.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum BatchBlock {
    Padded(PaddedBlock),
    Stacked(StackedBlock),
}

impl BatchBlock {
    pub fn batch_len(&self) -> usize {
        match self {
            BatchBlock::Padded(b) => b.rows(),
            BatchBlock::Stacked(b) => b.rows(),
        }
    }

    pub fn as_padded(&self) -> Option<&PaddedBlock> {
        match self {
            BatchBlock::Padded(b) => Some(b),
            BatchBlock::Stacked(_) => None,
        }
    }

    pub fn as_stacked(&self) -> Option<&StackedBlock> {
        match self {
            BatchBlock::Padded(_) => None,
            BatchBlock::Stacked(b) => Some(b),
        }
    }
}

/// A collated mini-batch: one block per sample field, all sharing the same
/// batch dimension.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Batch {
    blocks: Vec<BatchBlock>,
}

impl Batch {
    pub fn blocks(&self) -> &[BatchBlock] {
        &self.blocks
    }

    pub fn block(&self, k: usize) -> Option<&BatchBlock> {
        self.blocks.get(k)
    }

    pub fn batch_size(&self) -> usize {
        self.blocks.first().map_or(0, BatchBlock::batch_len)
    }

    /// Positions holding pad values, summed over every padded block.
    pub fn padded_positions(&self) -> u64 {
        self.blocks
            .iter()
            .filter_map(BatchBlock::as_padded)
            .map(PaddedBlock::padded_positions)
            .sum()
    }

    /// Total slots (`rows * cols`) summed over every padded block.
    pub fn total_slots(&self) -> u64 {
        self.blocks
            .iter()
            .filter_map(BatchBlock::as_padded)
            .map(|b| (b.rows() * b.cols()) as u64)
            .sum()
    }
}

/// Per-field transform applied when collating.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FieldTransform {
    Pad(PadSpec),
    Stack,
}

/// Ordered tuple of per-field transforms; arity must equal the sample arity.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BatchifyFn {
    transforms: Vec<FieldTransform>,
}

impl BatchifyFn {
    pub fn new(transforms: Vec<FieldTransform>) -> Self {
        Self { transforms }
    }

    /// Default composition for a schema: pad every variable-length field,
    /// stack every fixed field.
    pub fn for_schema(schema: &Schema) -> Self {
        let transforms = schema
            .fields()
            .iter()
            .map(|kind| match kind {
                FieldKind::VarSeq => FieldTransform::Pad(PadSpec::default()),
                FieldKind::Fixed { .. } => FieldTransform::Stack,
            })
            .collect();
        Self { transforms }
    }

    pub fn arity(&self) -> usize {
        self.transforms.len()
    }

    pub fn transforms(&self) -> &[FieldTransform] {
        &self.transforms
    }

    /// Checks this composition against a dataset schema: arities must agree
    /// and Pad may only target variable-length fields.
    pub fn check_schema(&self, schema: &Schema) -> Result<(), BatchifyError> {
        if self.arity() != schema.arity() {
            return Err(BatchifyError::ArityMismatch {
                sample: 0,
                expected: self.arity(),
                actual: schema.arity(),
            });
        }
        for (k, (t, kind)) in self.transforms.iter().zip(schema.fields()).enumerate() {
            if matches!(t, FieldTransform::Pad(_)) && !matches!(kind, FieldKind::VarSeq) {
                return Err(BatchifyError::KindMismatch {
                    field: k,
                    transform: "Pad",
                    actual: "fixed",
                });
            }
        }
        Ok(())
    }
}

fn round_up(len: usize, multiple: usize) -> usize {
    len.div_ceil(multiple) * multiple
}

/// Pads sequences to a common length and stacks them into one dense block.
///
/// The padded length is the maximum input length (at least 1, so an
/// all-empty batch still yields a non-degenerate block), rounded up to
/// `round_to` when set. Rows keep their input order and `valid_lengths`
/// records each true length, so [`PaddedBlock::depad`] is an exact inverse.
pub fn pad<S: AsRef<[u32]>>(sequences: &[S], spec: &PadSpec) -> Result<PaddedBlock, BatchifyError> {
    if sequences.is_empty() {
        return Err(BatchifyError::EmptyInput { what: "sequences" });
    }
    let multiple = match spec.round_to {
        Some(0) => return Err(BatchifyError::InvalidRounding),
        Some(m) => m,
        None => 1,
    };
    let valid_lengths: Vec<usize> = sequences.iter().map(|s| s.as_ref().len()).collect();
    let max_len = valid_lengths.iter().copied().max().unwrap_or(0);
    let cols = round_up(max_len.max(1), multiple);

    let rows = sequences.len();
    let mut values = vec![spec.pad_value; rows * cols];
    for (i, seq) in sequences.iter().enumerate() {
        let seq = seq.as_ref();
        values[i * cols..i * cols + seq.len()].copy_from_slice(seq);
    }
    Ok(PaddedBlock { rows, cols, values, valid_lengths })
}

/// Stacks fixed-shape values into one `(rows, ...shape)` block.
///
/// Every value must share the first row's shape.
pub fn stack<V: Borrow<FixedValue>>(values: &[V]) -> Result<StackedBlock, BatchifyError> {
    if values.is_empty() {
        return Err(BatchifyError::EmptyInput { what: "values" });
    }
    let shape = values[0].borrow().shape().to_vec();
    let mut out = Vec::with_capacity(values.len() * values[0].borrow().data().len());
    for (row, v) in values.iter().enumerate() {
        let v = v.borrow();
        if v.shape() != shape.as_slice() {
            return Err(BatchifyError::ShapeMismatch {
                row,
                expected: shape,
                actual: v.shape().to_vec(),
            });
        }
        out.extend_from_slice(v.data());
    }
    Ok(StackedBlock { rows: values.len(), shape, values: out })
}

/// Collates samples into a batch, applying transform `k` to field column `k`.
///
/// Row `i` of every block corresponds to `samples[i]`. Stack accepts
/// variable-length fields only when all rows have equal length.
pub fn batchify<S: Borrow<Sample>>(
    f: &BatchifyFn,
    samples: &[S],
) -> Result<Batch, BatchifyError> {
    if samples.is_empty() {
        return Err(BatchifyError::EmptyInput { what: "samples" });
    }
    for (i, s) in samples.iter().enumerate() {
        let arity = s.borrow().arity();
        if arity != f.arity() {
            return Err(BatchifyError::ArityMismatch {
                sample: i,
                expected: f.arity(),
                actual: arity,
            });
        }
    }

    let mut blocks = Vec::with_capacity(f.arity());
    for (k, transform) in f.transforms().iter().enumerate() {
        let block = match transform {
            FieldTransform::Pad(spec) => {
                let mut column: Vec<&[u32]> = Vec::with_capacity(samples.len());
                for s in samples {
                    let field = s.borrow().field(k).expect("arity checked above");
                    match field.as_varseq() {
                        Some(seq) => column.push(seq),
                        None => {
                            return Err(BatchifyError::KindMismatch {
                                field: k,
                                transform: "Pad",
                                actual: "fixed",
                            })
                        }
                    }
                }
                BatchBlock::Padded(pad(&column, spec)?)
            }
            FieldTransform::Stack => {
                let first = samples[0].borrow().field(k).expect("arity checked above");
                match first {
                    FieldValue::Fixed(_) => {
                        let mut column: Vec<&FixedValue> = Vec::with_capacity(samples.len());
                        for (i, s) in samples.iter().enumerate() {
                            match s.borrow().field(k).expect("arity checked above") {
                                FieldValue::Fixed(v) => column.push(v),
                                FieldValue::VarSeq(_) => {
                                    return Err(BatchifyError::KindMismatch {
                                        field: k,
                                        transform: "Stack",
                                        actual: if i == 0 { "fixed" } else { "variable-length" },
                                    })
                                }
                            }
                        }
                        BatchBlock::Stacked(stack(&column)?)
                    }
                    FieldValue::VarSeq(first_seq) => {
                        // Equal-length sequences stack like fixed vectors.
                        let expected = first_seq.len();
                        let mut out = Vec::with_capacity(samples.len() * expected);
                        for (i, s) in samples.iter().enumerate() {
                            match s.borrow().field(k).expect("arity checked above") {
                                FieldValue::VarSeq(seq) if seq.len() == expected => {
                                    out.extend(seq.iter().map(|&t| i64::from(t)));
                                }
                                FieldValue::VarSeq(seq) => {
                                    return Err(BatchifyError::UnequalStackLengths {
                                        field: k,
                                        row: i,
                                        expected,
                                        actual: seq.len(),
                                    })
                                }
                                FieldValue::Fixed(_) => {
                                    return Err(BatchifyError::KindMismatch {
                                        field: k,
                                        transform: "Stack",
                                        actual: "fixed",
                                    })
                                }
                            }
                        }
                        BatchBlock::Stacked(StackedBlock {
                            rows: samples.len(),
                            shape: vec![expected],
                            values: out,
                        })
                    }
                }
            }
        };
        blocks.push(block);
    }
    Ok(Batch { blocks })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pad_basic() {
        let block = pad(&[vec![1u32, 2], vec![3, 4, 5]], &PadSpec::default()).unwrap();
        assert_eq!(block.values(), &[1, 2, 0, 3, 4, 5]);
        assert_eq!(block.valid_lengths(), &[2, 3]);
        assert_eq!((block.rows(), block.cols()), (2, 3));
    }

    #[test]
    fn pad_single_row_is_identity() {
        let block = pad(&[vec![7u32]], &PadSpec::default()).unwrap();
        assert_eq!(block.values(), &[7]);
        assert_eq!(block.valid_lengths(), &[1]);
    }

    #[test]
    fn pad_keeps_empty_rows() {
        let block = pad(&[vec![], vec![1u32]], &PadSpec::default()).unwrap();
        assert_eq!(block.values(), &[0, 1]);
        assert_eq!(block.valid_lengths(), &[0, 1]);
    }

    #[test]
    fn pad_all_empty_rows_yields_unit_width() {
        let block = pad(&[Vec::<u32>::new(), vec![]], &PadSpec::default()).unwrap();
        assert_eq!((block.rows(), block.cols()), (2, 1));
        assert_eq!(block.values(), &[0, 0]);
        assert_eq!(block.padded_positions(), 2);
    }

    #[test]
    fn pad_rounds_up_to_multiple() {
        let spec = PadSpec::default().rounded_to(8);
        let block = pad(&[vec![1u32, 2, 3]], &spec).unwrap();
        assert_eq!(block.cols(), 8);
        assert_eq!(block.row(0), &[1, 2, 3, 0, 0, 0, 0, 0]);

        let all_empty = pad(&[Vec::<u32>::new()], &spec).unwrap();
        assert_eq!(all_empty.cols(), 8);
    }

    #[test]
    fn pad_rejects_empty_input_and_zero_rounding() {
        assert_eq!(
            pad(&Vec::<Vec<u32>>::new(), &PadSpec::default()),
            Err(BatchifyError::EmptyInput { what: "sequences" })
        );
        assert_eq!(
            pad(&[vec![1u32]], &PadSpec::default().rounded_to(0)),
            Err(BatchifyError::InvalidRounding)
        );
    }

    #[test]
    fn pad_uses_custom_pad_value() {
        let block = pad(&[vec![1u32], vec![2, 3]], &PadSpec::with_pad_value(9)).unwrap();
        assert_eq!(block.values(), &[1, 9, 2, 3]);
    }

    #[test]
    fn stack_scalars() {
        let vals = [FixedValue::scalar(3), FixedValue::scalar(1), FixedValue::scalar(2)];
        let block = stack(&vals).unwrap();
        assert_eq!(block.values(), &[3, 1, 2]);
        assert_eq!(block.shape(), &[] as &[usize]);
        assert_eq!(block.rows(), 3);
    }

    #[test]
    fn stack_vectors() {
        let vals = [
            FixedValue::new(vec![2], vec![1, 2]).unwrap(),
            FixedValue::new(vec![2], vec![3, 4]).unwrap(),
        ];
        let block = stack(&vals).unwrap();
        assert_eq!((block.rows(), block.shape()), (2, &[2usize][..]));
        assert_eq!(block.row(1), &[3, 4]);
    }

    #[test]
    fn stack_rejects_shape_mismatch() {
        let vals = [
            FixedValue::new(vec![2], vec![1, 2]).unwrap(),
            FixedValue::new(vec![1], vec![3]).unwrap(),
        ];
        assert!(matches!(stack(&vals), Err(BatchifyError::ShapeMismatch { row: 1, .. })));
    }

    fn pair_sample(tokens: &[u32], label: i64) -> Sample {
        Sample::new(vec![
            FieldValue::VarSeq(tokens.to_vec()),
            FieldValue::Fixed(FixedValue::scalar(label)),
        ])
    }

    #[test]
    fn batchify_pad_stack_pair() {
        let f = BatchifyFn::new(vec![
            FieldTransform::Pad(PadSpec::default()),
            FieldTransform::Stack,
        ]);
        let samples = [pair_sample(&[1, 2], 0), pair_sample(&[3, 4, 5], 1)];
        let batch = batchify(&f, &samples).unwrap();
        assert_eq!(batch.batch_size(), 2);

        let padded = batch.block(0).unwrap().as_padded().unwrap();
        assert_eq!(padded.values(), &[1, 2, 0, 3, 4, 5]);
        assert_eq!(padded.valid_lengths(), &[2, 3]);

        let stacked = batch.block(1).unwrap().as_stacked().unwrap();
        assert_eq!(stacked.values(), &[0, 1]);
    }

    #[test]
    fn batchify_single_pad_field() {
        let f = BatchifyFn::new(vec![FieldTransform::Pad(PadSpec::default())]);
        let samples = [Sample::new(vec![FieldValue::VarSeq(vec![9])])];
        let batch = batchify(&f, &samples).unwrap();
        let padded = batch.block(0).unwrap().as_padded().unwrap();
        assert_eq!(padded.values(), &[9]);
    }

    #[test]
    fn batchify_arity_mismatch() {
        let f = BatchifyFn::new(vec![
            FieldTransform::Pad(PadSpec::default()),
            FieldTransform::Stack,
        ]);
        let samples = [Sample::new(vec![FieldValue::VarSeq(vec![1])])];
        assert!(matches!(
            batchify(&f, &samples),
            Err(BatchifyError::ArityMismatch { sample: 0, expected: 2, actual: 1 })
        ));
    }

    #[test]
    fn batchify_pad_on_fixed_field_is_kind_mismatch() {
        let f = BatchifyFn::new(vec![FieldTransform::Pad(PadSpec::default())]);
        let samples = [Sample::new(vec![FieldValue::Fixed(FixedValue::scalar(1))])];
        assert!(matches!(
            batchify(&f, &samples),
            Err(BatchifyError::KindMismatch { field: 0, transform: "Pad", .. })
        ));
    }

    #[test]
    fn batchify_stacks_equal_length_varseq() {
        let f = BatchifyFn::new(vec![FieldTransform::Stack]);
        let samples = [
            Sample::new(vec![FieldValue::VarSeq(vec![1, 2])]),
            Sample::new(vec![FieldValue::VarSeq(vec![3, 4])]),
        ];
        let batch = batchify(&f, &samples).unwrap();
        let stacked = batch.block(0).unwrap().as_stacked().unwrap();
        assert_eq!(stacked.shape(), &[2]);
        assert_eq!(stacked.values(), &[1, 2, 3, 4]);

        let uneven = [
            Sample::new(vec![FieldValue::VarSeq(vec![1, 2])]),
            Sample::new(vec![FieldValue::VarSeq(vec![3])]),
        ];
        assert!(matches!(
            batchify(&f, &uneven),
            Err(BatchifyError::UnequalStackLengths { row: 1, .. })
        ));
    }

    #[test]
    fn batchify_is_pure() {
        let f = BatchifyFn::new(vec![
            FieldTransform::Pad(PadSpec::default()),
            FieldTransform::Stack,
        ]);
        let samples = [pair_sample(&[1, 2, 3], 4), pair_sample(&[], 5)];
        assert_eq!(batchify(&f, &samples).unwrap(), batchify(&f, &samples).unwrap());
    }

    #[test]
    fn padded_position_count_matches_formula() {
        let seqs = [vec![1u32, 2], vec![3], vec![4, 5, 6, 7]];
        let block = pad(&seqs, &PadSpec::default()).unwrap();
        let valid: u64 = seqs.iter().map(|s| s.len() as u64).sum();
        let expected = (block.rows() * block.cols()) as u64 - valid;
        assert_eq!(block.padded_positions(), expected);
        assert_eq!(block.padded_positions(), 5); // 3*4 - 7
    }
}
