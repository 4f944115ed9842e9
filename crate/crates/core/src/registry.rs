//! Dataset registry and ingestion: manifest-backed named datasets with
//! checksum verification, jsonl/plaintext parsers, and seeded synthetic
//! corpora.
//!
//! A registry is a TOML manifest of `[[dataset]]` entries. `get` resolves
//! a (name, split) pair to a file relative to the manifest, verifies its
//! SHA-256 digest, and parses it per the declared format, so a dataset is
//! one call away and silent corruption is impossible.
//!
//! Plaintext tokens are mapped to ids with the 64-bit FNV-1a hash reduced
//! modulo the declared vocabulary size; the rule is fixed so ingestion is
//! reproducible across platforms.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::dataset::{Dataset, FieldKind, FieldValue, FixedValue, Sample, Schema};

/// Errors from manifest loading, integrity checks, and ingestion.
#[derive(Debug, Error)]
pub enum RegistryError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("invalid manifest {path}: {detail}")]
    Manifest { path: PathBuf, detail: String },
    #[error("dataset {name}:{split} is not registered (known: {})", format_known(known))]
    NotFound {
        name: String,
        split: String,
        known: Vec<String>,
    },
    #[error("integrity check failed for {name}: expected sha256 {expected}, got {actual}")]
    Integrity {
        name: String,
        expected: String,
        actual: String,
    },
    #[error("{path}:{line}: {detail}")]
    Format {
        path: PathBuf,
        line: usize,
        detail: String,
    },
    #[error("dataset {name} does not match its declared schema: {detail}")]
    Schema { name: String, detail: String },
    #[error("invalid synthetic spec: {0}")]
    InvalidSpec(String),
    #[error("cannot export schema: {0}")]
    UnsupportedSchema(String),
}

fn format_known(known: &[String]) -> String {
    if known.is_empty() {
        "none".to_string()
    } else {
        known.join(", ")
    }
}

/// Lowercase hex SHA-256 of a byte string.
pub fn sha256_hex(bytes: &[u8]) -> String {
    let digest = Sha256::digest(bytes);
    let mut out = String::with_capacity(64);
    for b in digest {
        write!(out, "{b:02x}").expect("writing to a String cannot fail");
    }
    out
}

/// 64-bit FNV-1a hash; the fixed token-to-id rule for plaintext corpora.
fn fnv1a_64(bytes: &[u8]) -> u64 {
    let mut hash = 0xcbf2_9ce4_8422_2325u64;
    for &b in bytes {
        hash ^= u64::from(b);
        hash = hash.wrapping_mul(0x100_0000_01b3);
    }
    hash
}

/// On-disk layout of one registered dataset.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FileFormat {
    /// One JSON object per line: `{"tokens": [int,...], "label": int?}`.
    Jsonl,
    /// One whitespace-tokenized line per sample; tokens hashed to ids.
    Plaintext,
    /// A TOML [`SyntheticSpec`]; the corpus is generated, not stored.
    SyntheticSpec,
}

/// One registry record: where a dataset lives and what it must contain.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetEntry {
    pub name: String,
    pub split: String,
    /// File path, relative to the manifest's directory.
    pub path: PathBuf,
    /// Expected SHA-256 of the file, 64 lowercase hex chars.
    pub sha256: String,
    pub format: FileFormat,
    /// Per-field kinds; "varseq" or "fixed" (scalar).
    pub schema: Vec<String>,
    /// Vocabulary size for plaintext token hashing.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub vocab_size: Option<u32>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ManifestFile {
    #[serde(default)]
    dataset: Vec<DatasetEntry>,
}

/// A loaded manifest: named datasets resolvable by (name, split).
#[derive(Debug, Clone)]
pub struct Registry {
    root: PathBuf,
    entries: BTreeMap<(String, String), DatasetEntry>,
}

impl Registry {
    /// Parses a TOML manifest of `[[dataset]]` entries.
    ///
    /// Validates that (name, split) pairs are unique, digests are 64
    /// lowercase hex chars, schema kinds are known, and plaintext entries
    /// declare a positive vocab_size.
    pub fn load(manifest_path: impl AsRef<Path>) -> Result<Registry, RegistryError> {
        let manifest_path = manifest_path.as_ref();
        let text = fs::read_to_string(manifest_path).map_err(|source| RegistryError::Io {
            path: manifest_path.to_path_buf(),
            source,
        })?;
        let manifest: ManifestFile =
            toml::from_str(&text).map_err(|e| RegistryError::Manifest {
                path: manifest_path.to_path_buf(),
                detail: e.to_string(),
            })?;

        let bad = |detail: String| RegistryError::Manifest {
            path: manifest_path.to_path_buf(),
            detail,
        };

        let mut entries = BTreeMap::new();
        for entry in manifest.dataset {
            let id = format!("{}:{}", entry.name, entry.split);
            if entry.sha256.len() != 64
                || !entry.sha256.bytes().all(|b| b.is_ascii_digit() || (b'a'..=b'f').contains(&b))
            {
                return Err(bad(format!("{id}: sha256 must be 64 lowercase hex chars")));
            }
            for kind in &entry.schema {
                if kind != "varseq" && kind != "fixed" {
                    return Err(bad(format!(
                        "{id}: unknown schema kind {kind:?} (expected \"varseq\" or \"fixed\")"
                    )));
                }
            }
            match entry.format {
                FileFormat::Plaintext => {
                    if entry.vocab_size.is_none_or(|v| v == 0) {
                        return Err(bad(format!("{id}: plaintext requires vocab_size >= 1")));
                    }
                }
                FileFormat::Jsonl | FileFormat::SyntheticSpec => {
                    if entry.vocab_size.is_some() {
                        return Err(bad(format!("{id}: vocab_size only applies to plaintext")));
                    }
                }
            }
            let key = (entry.name.clone(), entry.split.clone());
            if entries.insert(key, entry).is_some() {
                return Err(bad(format!("duplicate dataset {id}")));
            }
        }

        let root = manifest_path
            .parent()
            .map_or_else(|| PathBuf::from("."), Path::to_path_buf);
        Ok(Registry { root, entries })
    }

    /// Registered (name, split) identifiers, sorted.
    pub fn known(&self) -> Vec<String> {
        self.entries
            .keys()
            .map(|(name, split)| format!("{name}:{split}"))
            .collect()
    }

    pub fn entry(&self, name: &str, split: &str) -> Option<&DatasetEntry> {
        self.entries.get(&(name.to_string(), split.to_string()))
    }

    /// Loads a registered dataset: reads its file, verifies the SHA-256
    /// digest, parses per format, and checks the declared schema.
    pub fn get(&self, name: &str, split: &str) -> Result<Dataset, RegistryError> {
        let entry = self
            .entry(name, split)
            .ok_or_else(|| RegistryError::NotFound {
                name: name.to_string(),
                split: split.to_string(),
                known: self.known(),
            })?;

        let path = self.root.join(&entry.path);
        let bytes = fs::read(&path).map_err(|source| RegistryError::Io {
            path: path.clone(),
            source,
        })?;

        let actual = sha256_hex(&bytes);
        if actual != entry.sha256 {
            return Err(RegistryError::Integrity {
                name: format!("{name}:{split}"),
                expected: entry.sha256.clone(),
                actual,
            });
        }

        let dataset = match entry.format {
            FileFormat::Jsonl => parse_jsonl(&bytes, &path)?,
            FileFormat::Plaintext => {
                let vocab = entry.vocab_size.expect("validated at load");
                parse_plaintext(&bytes, &path, vocab)?
            }
            FileFormat::SyntheticSpec => {
                let text = std::str::from_utf8(&bytes).map_err(|e| RegistryError::Format {
                    path: path.clone(),
                    line: 1,
                    detail: format!("spec is not valid UTF-8: {e}"),
                })?;
                let spec: SyntheticSpec =
                    toml::from_str(text).map_err(|e| RegistryError::Format {
                        path: path.clone(),
                        line: 1,
                        detail: e.to_string(),
                    })?;
                generate_synthetic(&spec)?
            }
        };

        let actual_schema: Vec<&str> = dataset
            .schema()
            .fields()
            .iter()
            .map(|k| match k {
                FieldKind::VarSeq => "varseq",
                FieldKind::Fixed { .. } => "fixed",
            })
            .collect();
        if actual_schema != entry.schema.iter().map(String::as_str).collect::<Vec<_>>() {
            return Err(RegistryError::Schema {
                name: format!("{name}:{split}"),
                detail: format!("declared {:?}, parsed {:?}", entry.schema, actual_schema),
            });
        }
        Ok(dataset)
    }
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct JsonlRecord {
    tokens: Vec<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    label: Option<i64>,
}

fn parse_jsonl(bytes: &[u8], path: &Path) -> Result<Dataset, RegistryError> {
    let text = std::str::from_utf8(bytes).map_err(|e| RegistryError::Format {
        path: path.to_path_buf(),
        line: 1,
        detail: format!("not valid UTF-8: {e}"),
    })?;

    let mut labeled: Option<bool> = None;
    let mut samples = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let lineno = i + 1;
        let record: JsonlRecord =
            serde_json::from_str(line).map_err(|e| RegistryError::Format {
                path: path.to_path_buf(),
                line: lineno,
                detail: e.to_string(),
            })?;
        let has_label = record.label.is_some();
        match labeled {
            None => labeled = Some(has_label),
            Some(expected) if expected != has_label => {
                return Err(RegistryError::Format {
                    path: path.to_path_buf(),
                    line: lineno,
                    detail: format!(
                        "label is {} here but {} on line 1; labels must be uniform",
                        if has_label { "present" } else { "absent" },
                        if expected { "present" } else { "absent" },
                    ),
                });
            }
            Some(_) => {}
        }
        let mut fields = vec![FieldValue::VarSeq(record.tokens)];
        if let Some(label) = record.label {
            fields.push(FieldValue::Fixed(FixedValue::scalar(label)));
        }
        samples.push(Sample::new(fields));
    }

    let schema = if labeled == Some(true) {
        Schema::new(vec![FieldKind::VarSeq, FieldKind::Fixed { shape: vec![] }])
    } else {
        Schema::new(vec![FieldKind::VarSeq])
    };
    Dataset::new(schema, samples).map_err(|e| RegistryError::Format {
        path: path.to_path_buf(),
        line: 1,
        detail: e.to_string(),
    })
}

fn parse_plaintext(bytes: &[u8], path: &Path, vocab_size: u32) -> Result<Dataset, RegistryError> {
    if vocab_size == 0 {
        return Err(RegistryError::InvalidSpec("vocab_size must be at least 1".into()));
    }
    let text = std::str::from_utf8(bytes).map_err(|e| RegistryError::Format {
        path: path.to_path_buf(),
        line: 1,
        detail: format!("not valid UTF-8: {e}"),
    })?;
    let samples = text
        .lines()
        .map(|line| {
            let tokens = line
                .split_whitespace()
                .map(|tok| (fnv1a_64(tok.as_bytes()) % u64::from(vocab_size)) as u32)
                .collect();
            Sample::new(vec![FieldValue::VarSeq(tokens)])
        })
        .collect();
    Dataset::new(Schema::new(vec![FieldKind::VarSeq]), samples).map_err(|e| {
        RegistryError::Format {
            path: path.to_path_buf(),
            line: 1,
            detail: e.to_string(),
        }
    })
}

/// Parses a jsonl corpus: one `{"tokens": [...], "label": int?}` object
/// per line. Label presence must be uniform; the first line decides.
pub fn ingest_jsonl(path: impl AsRef<Path>) -> Result<Dataset, RegistryError> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|source| RegistryError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_jsonl(&bytes, path)
}

/// Parses a plaintext corpus: one whitespace-tokenized line per sample,
/// each token mapped to `fnv1a_64(token) mod vocab_size`.
pub fn ingest_plaintext(
    path: impl AsRef<Path>,
    vocab_size: u32,
) -> Result<Dataset, RegistryError> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|source| RegistryError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_plaintext(&bytes, path, vocab_size)
}

/// Writes a dataset in the jsonl record grammar; the exact inverse of
/// [`ingest_jsonl`] for the schemas it supports.
pub fn export_jsonl(dataset: &Dataset) -> Result<String, RegistryError> {
    let fields = dataset.schema().fields();
    let labeled = match fields {
        [FieldKind::VarSeq] => false,
        [FieldKind::VarSeq, FieldKind::Fixed { shape }] if shape.is_empty() => true,
        other => {
            return Err(RegistryError::UnsupportedSchema(format!(
                "jsonl export supports (varseq) or (varseq, scalar), got {other:?}"
            )))
        }
    };

    let mut out = String::new();
    for sample in dataset.iter() {
        let tokens = sample
            .field(0)
            .and_then(FieldValue::as_varseq)
            .expect("schema validated")
            .to_vec();
        let label = if labeled {
            let fixed = sample
                .field(1)
                .and_then(FieldValue::as_fixed)
                .expect("schema validated");
            Some(fixed.data()[0])
        } else {
            None
        };
        let record = JsonlRecord { tokens, label };
        out.push_str(&serde_json::to_string(&record).expect("record serialization is infallible"));
        out.push('\n');
    }
    Ok(out)
}

/// Length distribution for synthetic corpora.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "distribution", rename_all = "kebab-case")]
pub enum LengthDistribution {
    /// Lengths uniform on the inclusive range `[lo, hi]`.
    Uniform { lo: usize, hi: usize },
    /// Geometric-like: length k has probability `(1-p)^(k-1) * p`,
    /// truncated at `cap`.
    Geometric { p: f64, cap: usize },
}

/// Recipe for a deterministic synthetic corpus.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SyntheticSpec {
    pub count: usize,
    pub vocab_size: u32,
    pub seed: u64,
    pub length: LengthDistribution,
}

impl SyntheticSpec {
    pub fn validate(&self) -> Result<(), RegistryError> {
        if self.vocab_size < 1 {
            return Err(RegistryError::InvalidSpec("vocab_size must be at least 1".into()));
        }
        match self.length {
            LengthDistribution::Uniform { lo, hi } => {
                if hi < lo {
                    return Err(RegistryError::InvalidSpec(format!(
                        "uniform length range requires lo <= hi, got [{lo}, {hi}]"
                    )));
                }
            }
            LengthDistribution::Geometric { p, cap } => {
                if !(p > 0.0 && p <= 1.0) {
                    return Err(RegistryError::InvalidSpec(format!(
                        "geometric p must lie in (0, 1], got {p}"
                    )));
                }
                if cap < 1 {
                    return Err(RegistryError::InvalidSpec(
                        "geometric cap must be at least 1".into(),
                    ));
                }
            }
        }
        Ok(())
    }
}

/// Generates a single-field corpus of random token sequences,
/// bit-reproducible under `spec.seed`.
///
/// Lengths are drawn from `ChaCha8Rng` stream 0 and token ids from
/// stream 1, so the length sequence for a given (distribution, count,
/// seed) is independent of vocab_size.
pub fn generate_synthetic(spec: &SyntheticSpec) -> Result<Dataset, RegistryError> {
    spec.validate()?;
    let mut len_rng = ChaCha8Rng::seed_from_u64(spec.seed);
    len_rng.set_stream(0);
    let mut tok_rng = ChaCha8Rng::seed_from_u64(spec.seed);
    tok_rng.set_stream(1);

    let mut samples = Vec::with_capacity(spec.count);
    for _ in 0..spec.count {
        let len = match spec.length {
            LengthDistribution::Uniform { lo, hi } => len_rng.random_range(lo..=hi),
            LengthDistribution::Geometric { p, cap } => {
                let mut len = 1;
                while len < cap && len_rng.random::<f64>() >= p {
                    len += 1;
                }
                len
            }
        };
        let tokens = (0..len)
            .map(|_| tok_rng.random_range(0..spec.vocab_size))
            .collect();
        samples.push(Sample::new(vec![FieldValue::VarSeq(tokens)]));
    }
    Dataset::new(Schema::new(vec![FieldKind::VarSeq]), samples)
        .map_err(|e| RegistryError::InvalidSpec(e.to_string()))
}
