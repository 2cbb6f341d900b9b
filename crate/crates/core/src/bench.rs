//! Evaluation harnesses: approximation error against the exact oracle,
//! 1-nearest-neighbour classification, and temporal drift series.

use std::cmp::Ordering;
use std::io::Write;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::descriptors::{
    compute_descriptor, descriptor_distance, relative_error, DescriptorKind, DescriptorSpec, Method,
};
use crate::error::{Error, Result};
use crate::graph_io::{Graph, SnapshotSeries};
use crate::lanczos::DENSE_CAP;
use crate::numeric::{compensated_sum, euclidean_distance, splitmix64};

pub const ERROR_HEADER: [&str; 5] = ["graph", "method", "kind", "rel_error", "seconds"];
pub const CLASSIFICATION_HEADER: [&str; 6] = ["dataset", "kind", "method", "mean_acc", "std", "repeats"];
pub const SNAPSHOT_HEADER: [&str; 4] = ["index", "distance", "added", "removed"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorRow {
    pub graph: String,
    pub method: Method,
    pub kind: DescriptorKind,
    /// `None` when the row was skipped.
    pub rel_error: Option<f64>,
    /// Descriptor computation time only.
    pub seconds: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub skipped: Option<String>,
}

impl ErrorRow {
    fn skipped(graph: &str, method: Method, kind: DescriptorKind, reason: String) -> Self {
        log::warn!("{graph}/{method}: skipped ({reason})");
        Self {
            graph: graph.to_string(),
            method,
            kind,
            rel_error: None,
            seconds: None,
            skipped: Some(reason),
        }
    }
}

/// Relative error of each method against the exact descriptor, per graph.
///
/// Graphs above the dense cap, graphs with a zero reference, and methods
/// that fail on a particular graph produce skipped rows.
pub fn error_benchmark(graphs: &[(String, Graph)], spec: &DescriptorSpec, methods: &[Method]) -> Result<Vec<ErrorRow>> {
    for &m in methods {
        if !m.supports(spec.kind) {
            return Err(Error::InvalidArgument(format!("method {m} does not apply to {}", spec.kind)));
        }
    }
    let mut rows = Vec::with_capacity(graphs.len() * methods.len());
    for (id, g) in graphs {
        if g.n() > DENSE_CAP {
            let reason = Error::DenseCapExceeded { n: g.n(), cap: DENSE_CAP }.to_string();
            rows.extend(methods.iter().map(|&m| ErrorRow::skipped(id, m, spec.kind, reason.clone())));
            continue;
        }
        let exact_spec = DescriptorSpec {
            method: Method::Exact,
            ..spec.clone()
        };
        let reference = match compute_descriptor(g, &exact_spec) {
            Ok(r) => r,
            Err(e) => {
                rows.extend(methods.iter().map(|&m| ErrorRow::skipped(id, m, spec.kind, e.to_string())));
                continue;
            }
        };
        for &method in methods {
            let method_spec = DescriptorSpec {
                method,
                ..spec.clone()
            };
            let start = Instant::now();
            let approx = compute_descriptor(g, &method_spec);
            let seconds = start.elapsed().as_secs_f64();
            let row = approx
                .and_then(|a| relative_error(&a, &reference))
                .map(|err| ErrorRow {
                    graph: id.clone(),
                    method,
                    kind: spec.kind,
                    rel_error: Some(err),
                    seconds: Some(seconds),
                    skipped: None,
                })
                .unwrap_or_else(|e| ErrorRow::skipped(id, method, spec.kind, e.to_string()));
            rows.push(row);
        }
    }
    Ok(rows)
}

fn opt_field(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

pub fn write_error_rows<W: Write>(out: W, rows: &[ErrorRow]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(ERROR_HEADER).map_err(csv_error)?;
    for r in rows {
        w.write_record([
            r.graph.clone(),
            r.method.to_string(),
            r.kind.to_string(),
            opt_field(r.rel_error),
            opt_field(r.seconds),
        ])
        .map_err(csv_error)?;
    }
    w.flush()?;
    Ok(())
}

fn csv_error(e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::Io(io),
        other => Error::InvalidArgument(format!("csv: {other:?}")),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassificationResult {
    pub mean_accuracy: f64,
    /// Sample standard deviation across repeats (0 for one repeat).
    pub std: f64,
    pub repeats: usize,
    pub train_frac: f64,
    pub accuracies: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KnnConfig {
    pub train_frac: f64,
    pub repeats: usize,
    pub seed: u64,
}

impl Default for KnnConfig {
    fn default() -> Self {
        Self {
            train_frac: 0.8,
            repeats: 1000,
            seed: 0,
        }
    }
}

fn hash_bytes(mut h: u64, bytes: impl IntoIterator<Item = u64>) -> u64 {
    for b in bytes {
        h = splitmix64(h ^ b);
    }
    h
}

/// Canonical order of `(features, label)` items: sorted by content, with
/// duplicates numbered by rank. Returns item indices in canonical order and
/// each item's content key.
fn canonical_order(features: &[Vec<f64>], labels: &[i64]) -> (Vec<usize>, Vec<u64>) {
    let cmp = |&a: &usize, &b: &usize| -> Ordering {
        let fa = features[a].iter().map(|x| x.to_bits());
        let fb = features[b].iter().map(|x| x.to_bits());
        fa.cmp(fb).then(labels[a].cmp(&labels[b]))
    };
    let mut order: Vec<usize> = (0..features.len()).collect();
    order.sort_by(cmp);
    let mut keys = vec![0u64; features.len()];
    let mut dup = 0u64;
    for (pos, &i) in order.iter().enumerate() {
        if pos > 0 && cmp(&order[pos - 1], &i) == Ordering::Equal {
            dup += 1;
        } else {
            dup = 0;
        }
        let content = hash_bytes(0, features[i].iter().map(|x| x.to_bits()));
        keys[i] = hash_bytes(content, [labels[i] as u64, dup]);
    }
    (order, keys)
}

/// Mean 1-nearest-neighbour accuracy over repeated uniform random splits.
///
/// Splits are drawn by ranking items on a seeded hash of their content, and
/// distance ties go to the training item earliest in content order, so the
/// result does not depend on the order in which items are supplied.
pub fn knn_accuracy(features: &[Vec<f64>], labels: &[i64], cfg: &KnnConfig) -> Result<ClassificationResult> {
    let n = features.len();
    if labels.len() != n {
        return Err(Error::Mismatch(format!("{n} feature vectors but {} labels", labels.len())));
    }
    if n == 0 || features.iter().any(|f| f.len() != features[0].len()) {
        return Err(Error::Mismatch("feature vectors must be nonempty and share one shape".into()));
    }
    let mut counts = std::collections::BTreeMap::new();
    for &l in labels {
        *counts.entry(l).or_insert(0usize) += 1;
    }
    if counts.len() < 2 {
        return Err(Error::DegenerateLabels("need at least two classes".into()));
    }
    if let Some((l, _)) = counts.iter().find(|(_, &c)| c < 2) {
        return Err(Error::DegenerateLabels(format!("class {l} has fewer than two members")));
    }
    if !(cfg.train_frac > 0.0 && cfg.train_frac < 1.0) || cfg.repeats == 0 {
        return Err(Error::InvalidArgument("train_frac must be in (0, 1) and repeats ≥ 1".into()));
    }
    let n_train = ((cfg.train_frac * n as f64).round() as usize).clamp(1, n - 1);

    let (order, keys) = canonical_order(features, labels);
    let mut rank = vec![0usize; n];
    for (pos, &i) in order.iter().enumerate() {
        rank[i] = pos;
    }

    let accuracies: Vec<f64> = (0..cfg.repeats)
        .into_par_iter()
        .map(|r| {
            let salt = hash_bytes(cfg.seed, [r as u64]);
            let mut shuffled: Vec<usize> = order.clone();
            shuffled.sort_by_key(|&i| (splitmix64(salt ^ keys[i]), rank[i]));
            let (train, test) = shuffled.split_at(n_train);
            let mut train = train.to_vec();
            train.sort_by_key(|&i| rank[i]);
            let correct = test
                .iter()
                .filter(|&&q| {
                    let mut best = (f64::INFINITY, usize::MAX);
                    for &t in &train {
                        let d = euclidean_distance(&features[q], &features[t]);
                        if d < best.0 {
                            best = (d, t);
                        }
                    }
                    labels[best.1] == labels[q]
                })
                .count();
            correct as f64 / test.len() as f64
        })
        .collect();

    let mean = compensated_sum(accuracies.iter().copied()) / cfg.repeats as f64;
    let std = if cfg.repeats > 1 {
        (compensated_sum(accuracies.iter().map(|a| (a - mean) * (a - mean))) / (cfg.repeats - 1) as f64).sqrt()
    } else {
        0.0
    };
    Ok(ClassificationResult {
        mean_accuracy: mean,
        std,
        repeats: cfg.repeats,
        train_frac: cfg.train_frac,
        accuracies,
    })
}

pub fn write_classification<W: Write>(
    out: W,
    dataset: &str,
    kind: DescriptorKind,
    method: Method,
    result: &ClassificationResult,
) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CLASSIFICATION_HEADER).map_err(csv_error)?;
    w.write_record([
        dataset.to_string(),
        kind.to_string(),
        method.to_string(),
        result.mean_accuracy.to_string(),
        result.std.to_string(),
        result.repeats.to_string(),
    ])
    .map_err(csv_error)?;
    w.flush()?;
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SnapshotRow {
    pub index: usize,
    pub timestamp: i64,
    pub distance: f64,
    /// Distance divided by the series maximum (0 when all distances are 0).
    pub normalized: f64,
    pub added: usize,
    pub removed: usize,
}

/// Distance of every snapshot's descriptor to that of snapshot 0.
pub fn snapshot_distance_series(series: &SnapshotSeries, spec: &DescriptorSpec) -> Result<Vec<SnapshotRow>> {
    if series.is_empty() {
        return Err(Error::InvalidArgument("snapshot series is empty".into()));
    }
    let base = compute_descriptor(&series.graphs[0], spec)?;
    let mut distances = vec![0.0];
    for g in &series.graphs[1..] {
        distances.push(descriptor_distance(&compute_descriptor(g, spec)?, &base)?);
    }
    let max = distances.iter().copied().fold(0.0, f64::max);
    Ok(distances
        .iter()
        .enumerate()
        .map(|(i, &d)| SnapshotRow {
            index: i,
            timestamp: series.timestamps[i],
            distance: d,
            normalized: if max > 0.0 { d / max } else { 0.0 },
            added: series.added[i],
            removed: series.removed[i],
        })
        .collect())
}

/// Writes raw distances, or normalized ones when `normalized` is set.
pub fn write_snapshot_rows<W: Write>(out: W, rows: &[SnapshotRow], normalized: bool) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(SNAPSHOT_HEADER).map_err(csv_error)?;
    for r in rows {
        let d = if normalized { r.normalized } else { r.distance };
        w.write_record([r.index.to_string(), d.to_string(), r.added.to_string(), r.removed.to_string()])
            .map_err(csv_error)?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::descriptors::TimeGrid;
    use crate::graph_io::load_snapshots;

    #[test]
    fn exact_rows_have_zero_error() {
        let graphs = vec![
            ("k3".to_string(), Graph::complete(3).unwrap()),
            ("p5".to_string(), Graph::path(5).unwrap()),
        ];
        for kind in [DescriptorKind::Netlsd, DescriptorKind::Vnge] {
            let rows = error_benchmark(&graphs, &DescriptorSpec::new(kind, Method::Exact), &[Method::Exact]).unwrap();
            assert_eq!(rows.len(), 2);
            assert!(rows.iter().all(|r| r.rel_error == Some(0.0)));
        }
    }

    #[test]
    fn taylor_row_on_triangle() {
        let graphs = vec![("k3".to_string(), Graph::complete(3).unwrap())];
        let mut spec = DescriptorSpec::new(DescriptorKind::Netlsd, Method::Exact);
        spec.grid = TimeGrid::from_values(vec![1.0]).unwrap();
        let rows = error_benchmark(&graphs, &spec, &[Method::Slaq, Method::Taylor]).unwrap();
        assert_eq!(rows[1].method, Method::Taylor);
        assert!((rows[1].rel_error.unwrap() - 0.5557).abs() < 1e-4);
        assert!(rows[0].rel_error.unwrap() >= 0.0);
    }

    #[test]
    fn stochastic_rows_are_reproducible() {
        let graphs = vec![("er".to_string(), crate::graph_io::erdos_renyi(60, 5.0, 3).unwrap())];
        let spec = DescriptorSpec::new(DescriptorKind::Vnge, Method::Exact);
        let a = error_benchmark(&graphs, &spec, &[Method::Slaq]).unwrap();
        let b = error_benchmark(&graphs, &spec, &[Method::Slaq]).unwrap();
        assert_eq!(a[0].rel_error.unwrap().to_bits(), b[0].rel_error.unwrap().to_bits());
    }

    #[test]
    fn failing_rows_are_skipped() {
        let graphs = vec![("empty".to_string(), Graph::empty(3).unwrap())];
        let spec = DescriptorSpec::new(DescriptorKind::Vnge, Method::Exact);
        let rows = error_benchmark(&graphs, &spec, &[Method::Exact, Method::Taylor]).unwrap();
        assert!(rows.iter().all(|r| r.skipped.is_some() && r.rel_error.is_none()));
        let mut out = Vec::new();
        write_error_rows(&mut out, &rows).unwrap();
        let text = String::from_utf8(out).unwrap();
        assert!(text.starts_with("graph,method,kind,rel_error,seconds\n"));
        assert!(text.contains("empty,exact,vnge,,\n"));
    }

    #[test]
    fn inapplicable_method_is_an_error() {
        let spec = DescriptorSpec::new(DescriptorKind::Netlsd, Method::Exact);
        assert!(error_benchmark(&[], &spec, &[Method::FingerHat]).is_err());
    }

    #[test]
    fn separable_classes_are_perfect() {
        let features: Vec<Vec<f64>> = (0..20).map(|i| vec![if i % 2 == 0 { 0.0 } else { 5.0 }]).collect();
        let labels: Vec<i64> = (0..20).map(|i| i % 2).collect();
        let cfg = KnnConfig {
            repeats: 50,
            ..Default::default()
        };
        let r = knn_accuracy(&features, &labels, &cfg).unwrap();
        assert_eq!(r.mean_accuracy, 1.0);
        assert_eq!(r.std, 0.0);
        assert_eq!(r.repeats, 50);
    }

    #[test]
    fn uninformative_features_give_chance_accuracy() {
        // Balanced classes, identical features: each test item is right with
        // probability 1/2 given the split.
        let n = 40;
        let features = vec![vec![1.0, 2.0]; n];
        let labels: Vec<i64> = (0..n as i64).map(|i| i % 2).collect();
        let cfg = KnnConfig {
            repeats: 1000,
            seed: 7,
            ..Default::default()
        };
        let r = knn_accuracy(&features, &labels, &cfg).unwrap();
        let n_test = 8.0;
        // Hypergeometric draw of the 8 test items from 20/20 minus the tie winner.
        let sd_mean = (0.25 / n_test * (n as f64 - n_test) / (n as f64 - 1.0)).sqrt() / (cfg.repeats as f64).sqrt();
        assert!((r.mean_accuracy - 0.5).abs() < 3.0 * sd_mean + 0.5 / n as f64, "{}", r.mean_accuracy);
    }

    #[test]
    fn knn_is_deterministic_and_seed_sensitive() {
        let features: Vec<Vec<f64>> = (0..30).map(|i| vec![(i * 7 % 11) as f64, (i % 3) as f64]).collect();
        let labels: Vec<i64> = (0..30).map(|i| (i % 3) as i64).collect();
        let cfg = KnnConfig {
            repeats: 40,
            ..Default::default()
        };
        let a = knn_accuracy(&features, &labels, &cfg).unwrap();
        let b = knn_accuracy(&features, &labels, &cfg).unwrap();
        assert_eq!(a, b);
        let c = knn_accuracy(&features, &labels, &KnnConfig { seed: 1, ..cfg }).unwrap();
        assert_ne!(a.accuracies, c.accuracies);
    }

    #[test]
    fn knn_rejects_degenerate_input() {
        let f = vec![vec![0.0]; 4];
        let cfg = KnnConfig::default();
        assert!(matches!(knn_accuracy(&f, &[1, 1, 1, 1], &cfg), Err(Error::DegenerateLabels(_))));
        assert!(matches!(knn_accuracy(&f, &[1, 1, 1, 2], &cfg), Err(Error::DegenerateLabels(_))));
        assert!(knn_accuracy(&f, &[1, 1, 2], &cfg).is_err());
        let ragged = vec![vec![0.0], vec![0.0, 1.0], vec![0.0], vec![1.0]];
        assert!(knn_accuracy(&ragged, &[1, 1, 2, 2], &cfg).is_err());
    }

    #[test]
    fn classification_csv() {
        let r = ClassificationResult {
            mean_accuracy: 0.75,
            std: 0.1,
            repeats: 3,
            train_frac: 0.8,
            accuracies: vec![],
        };
        let mut out = Vec::new();
        write_classification(&mut out, "dd", DescriptorKind::Vnge, Method::Exact, &r).unwrap();
        assert_eq!(
            String::from_utf8(out).unwrap(),
            "dataset,kind,method,mean_acc,std,repeats\ndd,vnge,exact,0.75,0.1,3\n"
        );
    }

    fn series(text: &str) -> SnapshotSeries {
        load_snapshots(text.as_bytes(), 1).unwrap()
    }

    #[test]
    fn constant_series_has_zero_distance() {
        let s = series("0 add 0 1\n0 add 1 2\n1 add 0 1\n2 del 3 4\n");
        let spec = DescriptorSpec::new(DescriptorKind::Netlsd, Method::Exact);
        let rows = snapshot_distance_series(&s, &spec).unwrap();
        assert_eq!(rows.len(), 3);
        assert!(rows.iter().all(|r| r.distance == 0.0 && r.normalized == 0.0));
    }

    #[test]
    fn entropy_series_example() {
        // K2 on 4 vertices, then two disjoint edges.
        let s = series("0 add 0 1\n0 add 2 3\n0 del 2 3\n1 add 2 3\n");
        assert_eq!(s.len(), 2);
        let spec = DescriptorSpec::new(DescriptorKind::Vnge, Method::Exact);
        let rows = snapshot_distance_series(&s, &spec).unwrap();
        assert_eq!(rows[0].distance, 0.0);
        assert!((rows[1].distance - 2f64.ln()).abs() < 1e-12);
        assert_eq!(rows[1].normalized, 1.0);
        let mut out = Vec::new();
        write_snapshot_rows(&mut out, &rows, false).unwrap();
        let text = String::from_utf8(out).unwrap();
        assert!(text.starts_with("index,distance,added,removed\n0,0,"));
    }

    #[test]
    fn single_snapshot_series() {
        let s = series("5 add 0 1\n");
        let spec = DescriptorSpec::new(DescriptorKind::Vnge, Method::Exact);
        let rows = snapshot_distance_series(&s, &spec).unwrap();
        assert_eq!(rows.len(), 1);
        assert_eq!(rows[0].distance, 0.0);
    }
}
