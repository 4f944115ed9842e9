//! Model metadata catalog: accuracy/throughput/memory records, Pareto
//! frontier queries over (metric, throughput), and scatter-plot export.
//!
//! Records carry measured quality metrics plus optional performance
//! numbers. A record's `source` says whose implementation produced its
//! numbers: this toolkit's, or an external reference implementation named
//! by the citation tag. The crate ships a seed catalog with published
//! accuracy comparisons across both.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Marker area per byte of device memory in the scatter export; areas are
/// linear in memory so a 2x memory difference is exactly a 2x area ratio.
pub const MARKER_AREA_PER_BYTE: f64 = 1.0e-7;

/// Marker area for records with no memory figure.
pub const DEFAULT_MARKER_AREA: f64 = 10.0;

/// Errors from catalog loading and queries.
#[derive(Debug, Error)]
pub enum ZooError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("invalid catalog {origin}: {detail}")]
    Parse { origin: String, detail: String },
    #[error("invalid catalog record {index} ({model}): {detail}")]
    Validation {
        index: usize,
        model: String,
        detail: String,
    },
    #[error("record {model} ({origin}) is missing the {missing} objective")]
    IncompleteRecord {
        model: String,
        origin: String,
        missing: String,
    },
}

/// Whose implementation a record's numbers come from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Source {
    ThisToolkit,
    External,
}

impl Source {
    pub fn name(&self) -> &'static str {
        match self {
            Source::ThisToolkit => "this-toolkit",
            Source::External => "external",
        }
    }
}

/// One catalog row: a model's quality metrics and optional performance
/// metadata on one task/dataset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelRecord {
    pub task: String,
    pub dataset: String,
    pub model: String,
    pub source: Source,
    /// Citation tag: names the external reference implementation, or
    /// flags fixture data (e.g. "throughput-memory-fixture").
    #[serde(default, skip_serializing_if = "String::is_empty")]
    pub citation: String,
    /// Metric name to value in percent, each in [0, 100].
    pub metrics: BTreeMap<String, f64>,
    /// Inference throughput in samples/sec, > 0 when present.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub throughput: Option<f64>,
    /// Device memory in bytes, > 0 when present.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub memory: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub latency_notes: Option<String>,
}

impl ModelRecord {
    pub fn metric(&self, name: &str) -> Option<f64> {
        self.metrics.get(name).copied()
    }

    fn validate(&self, index: usize) -> Result<(), ZooError> {
        let fail = |detail: String| ZooError::Validation {
            index,
            model: self.model.clone(),
            detail,
        };
        if self.metrics.is_empty() {
            return Err(fail("record has no metrics".into()));
        }
        for (name, &value) in &self.metrics {
            if !value.is_finite() || !(0.0..=100.0).contains(&value) {
                return Err(fail(format!(
                    "metric {name:?} = {value} must be a percent in [0, 100]"
                )));
            }
        }
        if let Some(t) = self.throughput {
            if !t.is_finite() || t <= 0.0 {
                return Err(fail(format!("throughput {t} must be finite and > 0")));
            }
        }
        if let Some(m) = self.memory {
            if !m.is_finite() || m <= 0.0 {
                return Err(fail(format!("memory {m} must be finite and > 0")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct CatalogFile {
    #[serde(default)]
    model: Vec<ModelRecord>,
}

fn parse_catalog(text: &str, origin: &str) -> Result<Vec<ModelRecord>, ZooError> {
    let file: CatalogFile = toml::from_str(text).map_err(|e| ZooError::Parse {
        origin: origin.to_string(),
        detail: e.to_string(),
    })?;
    for (index, record) in file.model.iter().enumerate() {
        record.validate(index)?;
    }
    Ok(file.model)
}

/// Loads and validates a TOML catalog of `[[model]]` records.
pub fn catalog_load(path: impl AsRef<Path>) -> Result<Vec<ModelRecord>, ZooError> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|source| ZooError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_catalog(&text, &path.display().to_string())
}

/// The catalog shipped with the crate.
pub fn seed_catalog() -> &'static [ModelRecord] {
    static CATALOG: OnceLock<Vec<ModelRecord>> = OnceLock::new();
    CATALOG.get_or_init(|| {
        parse_catalog(include_str!("data/seed_catalog.toml"), "embedded seed catalog")
            .expect("embedded seed catalog is valid")
    })
}

/// A frontier query: which records to consider and which metric to
/// maximize jointly with throughput.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParetoQuery {
    /// Restrict to records of one task; None considers all records.
    pub task: Option<String>,
    /// Metric to maximize; the second objective is always throughput.
    pub metric: String,
}

impl ParetoQuery {
    pub fn new(metric: impl Into<String>) -> Self {
        Self { task: None, metric: metric.into() }
    }

    pub fn with_task(mut self, task: impl Into<String>) -> Self {
        self.task = Some(task.into());
        self
    }
}

/// Records matching a query's task filter, in catalog order.
pub fn filter_task<'a>(records: &'a [ModelRecord], task: Option<&str>) -> Vec<&'a ModelRecord> {
    records
        .iter()
        .filter(|r| task.is_none_or(|t| r.task == t))
        .collect()
}

/// Returns the records not strictly dominated on (metric, throughput).
///
/// A record dominates another if it is >= on both objectives and > on at
/// least one; ties on both objectives are kept. The result is sorted by
/// metric descending, then throughput descending, then model name.
///
/// Every filtered record must carry both objectives; a missing metric or
/// throughput is an error rather than a silent exclusion.
pub fn pareto_frontier(
    records: &[ModelRecord],
    query: &ParetoQuery,
) -> Result<Vec<ModelRecord>, ZooError> {
    let mut candidates: Vec<(&ModelRecord, f64, f64)> = Vec::new();
    for record in filter_task(records, query.task.as_deref()) {
        let metric = record.metric(&query.metric).ok_or_else(|| ZooError::IncompleteRecord {
            model: record.model.clone(),
            origin: record.source.name().to_string(),
            missing: format!("metric {:?}", query.metric),
        })?;
        let throughput = record.throughput.ok_or_else(|| ZooError::IncompleteRecord {
            model: record.model.clone(),
            origin: record.source.name().to_string(),
            missing: "throughput".to_string(),
        })?;
        candidates.push((record, metric, throughput));
    }

    candidates.sort_by(|a, b| {
        b.1.total_cmp(&a.1)
            .then(b.2.total_cmp(&a.2))
            .then_with(|| a.0.model.cmp(&b.0.model))
    });

    // Sweep metric groups in descending order; a record survives iff its
    // throughput tops its own group and strictly exceeds every higher
    // group's best.
    let mut frontier = Vec::new();
    let mut best_above = f64::NEG_INFINITY;
    let mut i = 0;
    while i < candidates.len() {
        let mut j = i;
        while j < candidates.len() && candidates[j].1 == candidates[i].1 {
            j += 1;
        }
        let group_best = candidates[i..j]
            .iter()
            .map(|c| c.2)
            .fold(f64::NEG_INFINITY, f64::max);
        if group_best > best_above {
            frontier.extend(
                candidates[i..j]
                    .iter()
                    .filter(|c| c.2 == group_best)
                    .map(|c| c.0.clone()),
            );
        }
        best_above = best_above.max(group_best);
        i = j;
    }
    Ok(frontier)
}

/// One row of the scatter export.
#[derive(Debug, Clone, PartialEq)]
pub struct ScatterRow {
    pub model: String,
    pub accuracy: f64,
    pub throughput: f64,
    pub marker_area: f64,
}

/// Builds plot-ready scatter rows: one per filtered record that carries
/// both objectives, with marker area proportional to memory
/// ([`MARKER_AREA_PER_BYTE`]), or [`DEFAULT_MARKER_AREA`] when memory is
/// absent. Unlike [`pareto_frontier`], records missing an objective are
/// skipped, not errors: the export plots what is plottable.
pub fn scatter_rows(records: &[ModelRecord], query: &ParetoQuery) -> Vec<ScatterRow> {
    filter_task(records, query.task.as_deref())
        .into_iter()
        .filter_map(|r| {
            let accuracy = r.metric(&query.metric)?;
            let throughput = r.throughput?;
            let marker_area = r
                .memory
                .map_or(DEFAULT_MARKER_AREA, |m| m * MARKER_AREA_PER_BYTE);
            Some(ScatterRow { model: r.model.clone(), accuracy, throughput, marker_area })
        })
        .collect()
}

/// Renders scatter rows as CSV with a header, for any plotting tool.
pub fn export_scatter(records: &[ModelRecord], query: &ParetoQuery) -> String {
    let mut out = String::from("model,accuracy,throughput,marker_area\n");
    for row in scatter_rows(records, query) {
        let model = if row.model.contains(',') || row.model.contains('"') {
            format!("\"{}\"", row.model.replace('"', "\"\""))
        } else {
            row.model.clone()
        };
        writeln!(
            out,
            "{model},{},{},{}",
            row.accuracy, row.throughput, row.marker_area
        )
        .expect("writing to a String cannot fail");
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn record(model: &str, acc: f64, tput: Option<f64>, mem: Option<f64>) -> ModelRecord {
        ModelRecord {
            task: "Image Classification".into(),
            dataset: "ImageNet".into(),
            model: model.into(),
            source: Source::ThisToolkit,
            citation: String::new(),
            metrics: BTreeMap::from([("top-1 acc.".to_string(), acc)]),
            throughput: tput,
            memory: mem,
            latency_notes: None,
        }
    }

    fn frontier_models(records: &[ModelRecord], query: &ParetoQuery) -> Vec<String> {
        pareto_frontier(records, query)
            .unwrap()
            .into_iter()
            .map(|r| r.model)
            .collect()
    }

    #[test]
    fn seed_catalog_loads_with_expected_shape() {
        let catalog = seed_catalog();
        assert_eq!(catalog.len(), 25);
        let toolkit = catalog.iter().filter(|r| r.source == Source::ThisToolkit).count();
        let external = catalog.iter().filter(|r| r.source == Source::External).count();
        assert_eq!((toolkit, external), (13, 12));
    }

    #[test]
    fn seed_catalog_spot_values() {
        let catalog = seed_catalog();
        let find = |model: &str, dataset: &str, source: Source| {
            catalog
                .iter()
                .find(|r| r.model == model && r.dataset == dataset && r.source == source)
                .unwrap_or_else(|| panic!("{model} {dataset} {source:?} missing"))
        };

        assert_eq!(
            find("ResNet-50", "ImageNet", Source::ThisToolkit).metric("top-1 acc."),
            Some(79.2)
        );
        assert_eq!(
            find("ResNet-101", "ImageNet", Source::External).metric("top-1 acc."),
            Some(76.4)
        );
        let squad_base = find("BERT_BASE", "SQuAD 1.1", Source::ThisToolkit);
        assert_eq!(squad_base.metric("F1"), Some(88.5));
        assert_eq!(squad_base.metric("EM"), Some(81.0));
        let squad_large_ext = find("BERT_LARGE", "SQuAD 1.1", Source::External);
        assert_eq!(squad_large_ext.metric("F1"), Some(90.9));
        assert_eq!(squad_large_ext.metric("EM"), Some(84.1));
        let mrpc = find("BERT_BASE", "MRPC", Source::ThisToolkit);
        assert!(mrpc.latency_notes.as_deref().unwrap().contains("59.6%"));
    }

    #[test]
    fn seed_catalog_fixture_tags_cover_all_perf_numbers() {
        for r in seed_catalog() {
            if r.throughput.is_some() || r.memory.is_some() {
                assert_eq!(r.citation, "throughput-memory-fixture", "{}", r.model);
            }
        }
    }

    #[test]
    fn frontier_drops_dominated_record() {
        let records = vec![
            record("A", 79.2, Some(1000.0), None),
            record("B", 80.5, Some(800.0), None),
            record("C", 76.4, Some(700.0), None),
        ];
        let query = ParetoQuery::new("top-1 acc.");
        assert_eq!(frontier_models(&records, &query), vec!["B", "A"]);
    }

    #[test]
    fn frontier_of_single_record_is_itself() {
        let records = vec![record("only", 50.0, Some(10.0), None)];
        let query = ParetoQuery::new("top-1 acc.");
        assert_eq!(frontier_models(&records, &query), vec!["only"]);
    }

    #[test]
    fn frontier_keeps_exact_ties() {
        let records = vec![
            record("x", 70.0, Some(500.0), None),
            record("y", 70.0, Some(500.0), None),
        ];
        let query = ParetoQuery::new("top-1 acc.");
        assert_eq!(frontier_models(&records, &query), vec!["x", "y"]);
    }

    #[test]
    fn frontier_errors_on_missing_objective() {
        let records = vec![record("A", 79.2, None, None)];
        let query = ParetoQuery::new("top-1 acc.");
        match pareto_frontier(&records, &query) {
            Err(ZooError::IncompleteRecord { model, missing, .. }) => {
                assert_eq!(model, "A");
                assert_eq!(missing, "throughput");
            }
            other => panic!("expected incomplete-record error, got {other:?}"),
        }

        let records = vec![record("A", 79.2, Some(10.0), None)];
        let query = ParetoQuery::new("no-such-metric");
        assert!(matches!(
            pareto_frontier(&records, &query),
            Err(ZooError::IncompleteRecord { .. })
        ));
    }

    #[test]
    fn frontier_respects_task_filter() {
        let mut other = record("Z", 99.0, Some(9999.0), None);
        other.task = "Object Detection".into();
        let records = vec![record("A", 79.2, Some(1000.0), None), other];
        let query = ParetoQuery::new("top-1 acc.").with_task("Image Classification");
        assert_eq!(frontier_models(&records, &query), vec!["A"]);
    }

    /// Exhaustive pairwise dominance oracle.
    fn oracle_frontier(records: &[ModelRecord], metric: &str) -> Vec<String> {
        let objectives: Vec<(f64, f64)> = records
            .iter()
            .map(|r| (r.metric(metric).unwrap(), r.throughput.unwrap()))
            .collect();
        let mut kept: Vec<String> = Vec::new();
        for (i, (mi, ti)) in objectives.iter().enumerate() {
            let dominated = objectives.iter().enumerate().any(|(j, (mj, tj))| {
                j != i && mj >= mi && tj >= ti && (mj > mi || tj > ti)
            });
            if !dominated {
                kept.push(records[i].model.clone());
            }
        }
        kept.sort();
        kept
    }

    proptest! {
        #[test]
        fn frontier_matches_pairwise_oracle(
            objectives in prop::collection::vec((0u32..=1000, 1u32..=1000), 1..50),
        ) {
            let records: Vec<ModelRecord> = objectives
                .iter()
                .enumerate()
                .map(|(i, &(acc, tput))| {
                    record(&format!("m{i}"), f64::from(acc) / 10.0, Some(f64::from(tput)), None)
                })
                .collect();
            let query = ParetoQuery::new("top-1 acc.");
            let mut got = frontier_models(&records, &query);
            got.sort();
            prop_assert_eq!(got, oracle_frontier(&records, "top-1 acc."));
        }

        #[test]
        fn frontier_is_permutation_invariant(
            objectives in prop::collection::vec((0u32..=100, 1u32..=100), 1..20),
            seed in any::<u64>(),
        ) {
            use rand::seq::SliceRandom;
            use rand::SeedableRng;
            let records: Vec<ModelRecord> = objectives
                .iter()
                .enumerate()
                .map(|(i, &(acc, tput))| {
                    record(&format!("m{i}"), f64::from(acc), Some(f64::from(tput)), None)
                })
                .collect();
            let mut shuffled = records.clone();
            shuffled.shuffle(&mut rand_chacha::ChaCha8Rng::seed_from_u64(seed));

            let query = ParetoQuery::new("top-1 acc.");
            let mut a = frontier_models(&records, &query);
            let mut b = frontier_models(&shuffled, &query);
            a.sort();
            b.sort();
            prop_assert_eq!(a, b);
        }
    }

    #[test]
    fn frontier_output_is_sorted_by_metric_then_throughput() {
        let records = vec![
            record("low", 60.0, Some(3000.0), None),
            record("high", 90.0, Some(100.0), None),
            record("mid", 75.0, Some(1000.0), None),
        ];
        let query = ParetoQuery::new("top-1 acc.");
        assert_eq!(frontier_models(&records, &query), vec!["high", "mid", "low"]);
    }

    #[test]
    fn marker_area_is_linear_in_memory() {
        let records = vec![
            record("m1", 70.0, Some(100.0), Some(1.0e9)),
            record("m2", 71.0, Some(100.0), Some(2.0e9)),
        ];
        let rows = scatter_rows(&records, &ParetoQuery::new("top-1 acc."));
        assert_eq!(rows[1].marker_area / rows[0].marker_area, 2.0);
    }

    #[test]
    fn missing_memory_gets_default_marker_area() {
        let records = vec![record("m", 70.0, Some(100.0), None)];
        let rows = scatter_rows(&records, &ParetoQuery::new("top-1 acc."));
        assert_eq!(rows[0].marker_area, DEFAULT_MARKER_AREA);
    }

    #[test]
    fn scatter_skips_records_without_objectives() {
        let records = vec![
            record("plot-me", 70.0, Some(100.0), None),
            record("no-throughput", 80.0, None, None),
        ];
        let rows = scatter_rows(&records, &ParetoQuery::new("top-1 acc."));
        assert_eq!(rows.len(), 1);
        assert_eq!(rows[0].model, "plot-me");
    }

    #[test]
    fn seed_catalog_scatter_covers_toolkit_classification_rows() {
        let query = ParetoQuery::new("top-1 acc.").with_task("Image Classification");
        let rows = scatter_rows(seed_catalog(), &query);
        let models: Vec<&str> = rows.iter().map(|r| r.model.as_str()).collect();
        assert_eq!(models, vec!["ResNet-50", "ResNet-101", "MobileNet 1.0"]);

        let csv = export_scatter(seed_catalog(), &query);
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "model,accuracy,throughput,marker_area");
        assert_eq!(lines.len(), 1 + rows.len());
        assert_eq!(lines[1], "ResNet-50,79.2,1200,260");
    }

    #[test]
    fn catalog_rejects_out_of_range_metrics() {
        let text = "[[model]]\ntask = \"t\"\ndataset = \"d\"\nmodel = \"m\"\nsource = \"external\"\nmetrics = { \"acc.\" = 101.0 }\n";
        match parse_catalog(text, "test") {
            Err(ZooError::Validation { index, .. }) => assert_eq!(index, 0),
            other => panic!("expected validation error, got {other:?}"),
        }

        let text = "[[model]]\ntask = \"t\"\ndataset = \"d\"\nmodel = \"m\"\nsource = \"external\"\nmetrics = { \"acc.\" = 50.0 }\nthroughput = 0.0\n";
        assert!(matches!(parse_catalog(text, "test"), Err(ZooError::Validation { .. })));
    }

    #[test]
    fn catalog_load_reads_files_and_reports_parse_errors() {
        let dir = tempfile::tempdir().unwrap();
        let good = dir.path().join("good.toml");
        fs::write(&good, "[[model]]\ntask = \"t\"\ndataset = \"d\"\nmodel = \"m\"\nsource = \"external\"\nmetrics = { \"acc.\" = 50.0 }\n").unwrap();
        assert_eq!(catalog_load(&good).unwrap().len(), 1);

        let bad = dir.path().join("bad.toml");
        fs::write(&bad, "not toml [").unwrap();
        assert!(matches!(catalog_load(&bad), Err(ZooError::Parse { .. })));

        assert!(matches!(
            catalog_load(dir.path().join("missing.toml")),
            Err(ZooError::Io { .. })
        ));
    }
}
