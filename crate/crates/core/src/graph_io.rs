//! Graph storage and ingestion.
//!
//! [`Graph`] is an immutable, symmetric, weighted adjacency structure in
//! compressed sparse row form. All constructors canonicalize their input the
//! same way: edges are symmetrized, self-loops are dropped, and duplicate
//! edges collapse to their maximum weight.

use std::collections::{BTreeSet, HashMap};
use std::fmt::Write as _;
use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

/// Undirected weighted graph in CSR form.
///
/// Every undirected edge `{i, j}` is stored twice, once in row `i` and once
/// in row `j`, so `row_offsets[n] == 2 * m`.
#[derive(Debug, Clone, PartialEq)]
pub struct Graph {
    n: usize,
    m: usize,
    row_offsets: Vec<usize>,
    col_indices: Vec<usize>,
    weights: Vec<f64>,
}

impl Graph {
    /// Builds a canonical graph on `n` vertices from an arbitrary edge list.
    ///
    /// Direction is ignored, self-loops are dropped and repeated edges keep
    /// the largest weight.
    pub fn from_edges<I>(n: usize, edges: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, usize, f64)>,
    {
        if n == 0 {
            return Err(Error::EmptyGraph);
        }
        let mut canon: Vec<(usize, usize, f64)> = Vec::new();
        for (u, v, w) in edges {
            if u >= n || v >= n {
                return Err(Error::InvalidArgument(format!(
                    "edge ({u}, {v}) out of range for {n} vertices"
                )));
            }
            if !(w.is_finite() && w > 0.0) {
                return Err(Error::InvalidArgument(format!(
                    "edge ({u}, {v}) has nonpositive or non-finite weight {w}"
                )));
            }
            if u == v {
                continue;
            }
            canon.push((u.min(v), u.max(v), w));
        }
        canon.sort_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)));
        canon.dedup_by(|later, kept| {
            if later.0 == kept.0 && later.1 == kept.1 {
                kept.2 = kept.2.max(later.2);
                true
            } else {
                false
            }
        });

        let m = canon.len();
        let mut counts = vec![0usize; n + 1];
        for &(u, v, _) in &canon {
            counts[u + 1] += 1;
            counts[v + 1] += 1;
        }
        for i in 0..n {
            counts[i + 1] += counts[i];
        }
        let row_offsets = counts;
        let mut cursor = row_offsets.clone();
        let mut col_indices = vec![0usize; 2 * m];
        let mut weights = vec![0f64; 2 * m];
        // Edges are sorted by (u, v) with u < v, so each row receives its
        // lower neighbors before its upper neighbors, both ascending.
        for &(u, v, w) in &canon {
            col_indices[cursor[u]] = v;
            weights[cursor[u]] = w;
            cursor[u] += 1;
            col_indices[cursor[v]] = u;
            weights[cursor[v]] = w;
            cursor[v] += 1;
        }
        Ok(Self {
            n,
            m,
            row_offsets,
            col_indices,
            weights,
        })
    }

    /// Unweighted graph from `(u, v)` pairs.
    pub fn from_pairs<I>(n: usize, pairs: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, usize)>,
    {
        Self::from_edges(n, pairs.into_iter().map(|(u, v)| (u, v, 1.0)))
    }

    pub fn empty(n: usize) -> Result<Self> {
        Self::from_edges(n, std::iter::empty())
    }

    pub fn complete(n: usize) -> Result<Self> {
        Self::from_pairs(n, (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))))
    }

    pub fn path(n: usize) -> Result<Self> {
        Self::from_pairs(n, (1..n).map(|i| (i - 1, i)))
    }

    /// Star with center 0 and `leaves` leaves.
    pub fn star(leaves: usize) -> Result<Self> {
        Self::from_pairs(leaves + 1, (1..=leaves).map(|i| (0, i)))
    }

    /// `c` disjoint copies of a single edge.
    pub fn disjoint_edges(c: usize) -> Result<Self> {
        Self::from_pairs(2 * c, (0..c).map(|i| (2 * i, 2 * i + 1)))
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn row_offsets(&self) -> &[usize] {
        &self.row_offsets
    }

    pub fn col_indices(&self) -> &[usize] {
        &self.col_indices
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn is_unweighted(&self) -> bool {
        self.weights.iter().all(|&w| w == 1.0)
    }

    /// Neighbors of `i` with edge weights, ascending by neighbor id.
    pub fn neighbors(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let range = self.row_offsets[i]..self.row_offsets[i + 1];
        self.col_indices[range.clone()]
            .iter()
            .copied()
            .zip(self.weights[range].iter().copied())
    }

    /// Each undirected edge once, as `(i, j, w)` with `i < j`.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.n).flat_map(move |i| {
            self.neighbors(i)
                .filter(move |&(j, _)| j > i)
                .map(move |(j, w)| (i, j, w))
        })
    }

    /// Applies a vertex relabeling: vertex `i` becomes `perm[i]`.
    pub fn relabel(&self, perm: &[usize]) -> Result<Self> {
        if perm.len() != self.n {
            return Err(Error::InvalidArgument("permutation length differs from n".into()));
        }
        let mut seen = vec![false; self.n];
        for &p in perm {
            if p >= self.n || std::mem::replace(&mut seen[p], true) {
                return Err(Error::InvalidArgument("not a permutation".into()));
            }
        }
        Self::from_edges(self.n, self.edges().map(|(i, j, w)| (perm[i], perm[j], w)))
    }

    /// Number of connected components; isolated vertices count individually.
    pub fn connected_components(&self) -> usize {
        let mut seen = vec![false; self.n];
        let mut stack = Vec::new();
        let mut count = 0;
        for s in 0..self.n {
            if seen[s] {
                continue;
            }
            count += 1;
            seen[s] = true;
            stack.push(s);
            while let Some(u) = stack.pop() {
                for (v, _) in self.neighbors(u) {
                    if !seen[v] {
                        seen[v] = true;
                        stack.push(v);
                    }
                }
            }
        }
        count
    }

    /// Serializes to the edge-list format, one edge per line with `i < j`.
    pub fn to_edge_list(&self, weighted: bool) -> String {
        let mut out = String::new();
        for (i, j, w) in self.edges() {
            if weighted {
                let _ = writeln!(out, "{i}\t{j}\t{w}");
            } else {
                let _ = writeln!(out, "{i}\t{j}");
            }
        }
        out
    }

    /// SHA-256 of the canonical CSR arrays, hex encoded.
    pub fn content_hash(&self) -> String {
        let mut h = Sha256::new();
        h.update((self.n as u64).to_le_bytes());
        for &o in &self.row_offsets {
            h.update((o as u64).to_le_bytes());
        }
        for &c in &self.col_indices {
            h.update((c as u64).to_le_bytes());
        }
        for &w in &self.weights {
            h.update(w.to_bits().to_le_bytes());
        }
        h.finalize().iter().fold(String::with_capacity(64), |mut s, b| {
            let _ = write!(s, "{b:02x}");
            s
        })
    }
}

/// Options for [`parse_edge_list`].
#[derive(Debug, Clone)]
pub struct EdgeListOptions {
    /// Field separator; `None` splits on any whitespace.
    pub separator: Option<char>,
    pub comment_prefix: String,
    /// Expect a third weight column.
    pub weighted: bool,
}

impl Default for EdgeListOptions {
    fn default() -> Self {
        Self {
            separator: None,
            comment_prefix: "#".to_string(),
            weighted: false,
        }
    }
}

fn split_fields<'a>(line: &'a str, sep: Option<char>) -> Vec<&'a str> {
    match sep {
        None => line.split_whitespace().collect(),
        Some(c) => line.split(c).map(str::trim).filter(|f| !f.is_empty()).collect(),
    }
}

fn parse_id(field: &str, line: usize) -> Result<u64> {
    field.parse::<u64>().map_err(|_| Error::Parse {
        line,
        msg: format!("vertex id {field:?} is not a nonnegative integer"),
    })
}

fn read_raw_edges<R: BufRead>(reader: R, opts: &EdgeListOptions) -> Result<Vec<(u64, u64, f64)>> {
    let expected = if opts.weighted { 3 } else { 2 };
    let mut edges = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let lineno = idx + 1;
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty()
            || (!opts.comment_prefix.is_empty() && trimmed.starts_with(&opts.comment_prefix))
        {
            continue;
        }
        let fields = split_fields(trimmed, opts.separator);
        if fields.len() != expected {
            return Err(Error::Parse {
                line: lineno,
                msg: format!("expected {expected} fields, found {}", fields.len()),
            });
        }
        let u = parse_id(fields[0], lineno)?;
        let v = parse_id(fields[1], lineno)?;
        let w = if opts.weighted {
            let w: f64 = fields[2].parse().map_err(|_| Error::Parse {
                line: lineno,
                msg: format!("weight {:?} is not a number", fields[2]),
            })?;
            if !(w.is_finite() && w > 0.0) {
                return Err(Error::Parse {
                    line: lineno,
                    msg: format!("weight {w} must be positive and finite"),
                });
            }
            w
        } else {
            1.0
        };
        edges.push((u, v, w));
    }
    Ok(edges)
}

fn to_index(id: u64) -> Result<usize> {
    usize::try_from(id).map_err(|_| Error::InvalidArgument(format!("vertex id {id} too large")))
}

/// Parses an edge list; the vertex count is `max id + 1`.
pub fn parse_edge_list<R: BufRead>(reader: R, opts: &EdgeListOptions) -> Result<Graph> {
    let raw = read_raw_edges(reader, opts)?;
    let max_id = raw.iter().map(|&(u, v, _)| u.max(v)).max().ok_or(Error::EmptyGraph)?;
    let n = to_index(max_id)?
        .checked_add(1)
        .ok_or_else(|| Error::InvalidArgument("vertex id overflow".into()))?;
    let edges = raw
        .into_iter()
        .map(|(u, v, w)| Ok((to_index(u)?, to_index(v)?, w)))
        .collect::<Result<Vec<_>>>()?;
    Graph::from_edges(n, edges)
}

/// Whitespace-separated, unweighted, `#` comments.
pub fn parse_edge_list_str(text: &str) -> Result<Graph> {
    parse_edge_list(text.as_bytes(), &EdgeListOptions::default())
}

pub fn read_edge_list_file(path: &Path, opts: &EdgeListOptions) -> Result<Graph> {
    let file = File::open(path)?;
    parse_edge_list(BufReader::new(file), opts)
}

/// Original vertex ids, indexed by dense vertex id.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IdMap {
    pub original: Vec<u64>,
}

/// Parses an edge list and relabels the vertices that occur in it to
/// `0..k` in ascending order of their original ids.
pub fn parse_edge_list_compact<R: BufRead>(
    reader: R,
    opts: &EdgeListOptions,
) -> Result<(Graph, IdMap)> {
    let raw = read_raw_edges(reader, opts)?;
    let ids: BTreeSet<u64> = raw.iter().flat_map(|&(u, v, _)| [u, v]).collect();
    if ids.is_empty() {
        return Err(Error::EmptyGraph);
    }
    let original: Vec<u64> = ids.into_iter().collect();
    let index: HashMap<u64, usize> = original.iter().enumerate().map(|(i, &id)| (id, i)).collect();
    let g = Graph::from_edges(
        original.len(),
        raw.into_iter().map(|(u, v, w)| (index[&u], index[&v], w)),
    )?;
    Ok((g, IdMap { original }))
}

/// G(n, p) random graph with `p = avg_degree / (n - 1)`.
///
/// Pairs are visited with geometric skips, so the cost is proportional to the
/// number of generated edges rather than to `n²`.
pub fn erdos_renyi(n: usize, avg_degree: f64, seed: u64) -> Result<Graph> {
    if n == 0 {
        return Err(Error::EmptyGraph);
    }
    let max_deg = (n - 1) as f64;
    if !(avg_degree >= 0.0 && avg_degree <= max_deg) {
        return Err(Error::InvalidArgument(format!(
            "avg_degree {avg_degree} outside [0, {max_deg}]"
        )));
    }
    if avg_degree == 0.0 {
        return Graph::empty(n);
    }
    let p = avg_degree / max_deg;
    if p >= 1.0 {
        return Graph::complete(n);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let log_q = (1.0 - p).ln();
    let mut edges = Vec::new();
    // Batagelj & Brandes skipping over the lower triangle (v > w).
    let mut v: usize = 1;
    let mut w: i64 = -1;
    while v < n {
        let r: f64 = rng.random();
        let skip = ((1.0 - r).ln() / log_q).floor();
        w += 1 + if skip.is_finite() { skip as i64 } else { i64::MAX / 4 };
        while w >= v as i64 && v < n {
            w -= v as i64;
            v += 1;
        }
        if v < n {
            edges.push((v, w as usize));
        }
    }
    Graph::from_pairs(n, edges)
}

/// Cumulative graph snapshots built from a timestamped edge-event stream.
#[derive(Debug, Clone)]
pub struct SnapshotSeries {
    pub graphs: Vec<Graph>,
    /// Inclusive upper timestamp of each bucket.
    pub timestamps: Vec<i64>,
    /// Cumulative count of edges actually inserted up to each snapshot.
    pub added: Vec<usize>,
    /// Cumulative count of edges actually removed up to each snapshot.
    pub removed: Vec<usize>,
    /// Deletions of edges that were not present.
    pub ignored_deletions: usize,
}

impl SnapshotSeries {
    pub fn len(&self) -> usize {
        self.graphs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.graphs.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum EventOp {
    Add,
    Del,
}

/// Loads `timestamp op src dst` events into one cumulative snapshot per
/// time bucket of width `granularity`.
///
/// Every bucket between the first and the last event gets a snapshot, even
/// when it holds no events. All snapshots share the vertex set
/// `0..=max id`. Edges are unweighted.
pub fn load_snapshots<R: BufRead>(reader: R, granularity: i64) -> Result<SnapshotSeries> {
    if granularity <= 0 {
        return Err(Error::InvalidArgument("granularity must be positive".into()));
    }
    let mut events: Vec<(i64, EventOp, u64, u64)> = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let lineno = idx + 1;
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = trimmed.split_whitespace().collect();
        if fields.len() != 4 {
            return Err(Error::Parse {
                line: lineno,
                msg: format!("expected 4 fields, found {}", fields.len()),
            });
        }
        let t: i64 = fields[0].parse().map_err(|_| Error::Parse {
            line: lineno,
            msg: format!("timestamp {:?} is not an integer", fields[0]),
        })?;
        let op = match fields[1] {
            "add" => EventOp::Add,
            "del" => EventOp::Del,
            other => {
                return Err(Error::Parse {
                    line: lineno,
                    msg: format!("unknown op {other:?}"),
                })
            }
        };
        if let Some(&(prev, ..)) = events.last() {
            if t < prev {
                return Err(Error::Parse {
                    line: lineno,
                    msg: format!("timestamp {t} precedes {prev}"),
                });
            }
        }
        let u = parse_id(fields[2], lineno)?;
        let v = parse_id(fields[3], lineno)?;
        events.push((t, op, u, v));
    }
    let max_id = events
        .iter()
        .map(|&(_, _, u, v)| u.max(v))
        .max()
        .ok_or(Error::EmptyGraph)?;
    let n = to_index(max_id)? + 1;

    let bucket_of = |t: i64| t.div_euclid(granularity);
    let first = bucket_of(events[0].0);
    let last = bucket_of(events[events.len() - 1].0);

    let mut edges: BTreeSet<(usize, usize)> = BTreeSet::new();
    let mut series = SnapshotSeries {
        graphs: Vec::new(),
        timestamps: Vec::new(),
        added: Vec::new(),
        removed: Vec::new(),
        ignored_deletions: 0,
    };
    let (mut added, mut removed) = (0usize, 0usize);
    let mut cursor = 0;
    for bucket in first..=last {
        while cursor < events.len() && bucket_of(events[cursor].0) == bucket {
            let (_, op, u, v) = events[cursor];
            cursor += 1;
            let (u, v) = (to_index(u)?, to_index(v)?);
            if u == v {
                continue;
            }
            let key = (u.min(v), u.max(v));
            match op {
                EventOp::Add => {
                    if edges.insert(key) {
                        added += 1;
                    }
                }
                EventOp::Del => {
                    if edges.remove(&key) {
                        removed += 1;
                    } else {
                        series.ignored_deletions += 1;
                    }
                }
            }
        }
        series.graphs.push(Graph::from_pairs(n, edges.iter().copied())?);
        series.timestamps.push((bucket + 1) * granularity - 1);
        series.added.push(added);
        series.removed.push(removed);
    }
    if series.ignored_deletions > 0 {
        log::warn!("ignored {} deletions of absent edges", series.ignored_deletions);
    }
    Ok(series)
}

/// Loads a graph-classification dataset in the TU Dortmund text layout
/// (`{name}_A.txt`, `{name}_graph_indicator.txt`, `{name}_graph_labels.txt`).
pub fn load_tu_dataset(dir: &Path, name: &str) -> Result<Vec<(Graph, i64)>> {
    let read_lines = |suffix: &str| -> Result<Vec<String>> {
        let path = dir.join(format!("{name}_{suffix}.txt"));
        let file = File::open(&path)?;
        BufReader::new(file)
            .lines()
            .map(|l| l.map_err(Error::from))
            .filter(|l| l.as_ref().map(|s| !s.trim().is_empty()).unwrap_or(true))
            .collect()
    };
    let parse_int = |s: &str, line: usize| -> Result<i64> {
        s.trim().parse::<i64>().map_err(|_| Error::Parse {
            line,
            msg: format!("{s:?} is not an integer"),
        })
    };

    let indicator = read_lines("graph_indicator")?
        .iter()
        .enumerate()
        .map(|(i, s)| parse_int(s, i + 1))
        .collect::<Result<Vec<_>>>()?;
    let labels = read_lines("graph_labels")?
        .iter()
        .enumerate()
        .map(|(i, s)| parse_int(s, i + 1))
        .collect::<Result<Vec<_>>>()?;
    let graphs = labels.len();

    // Node ids are 1-based and graphs occupy contiguous node ranges.
    let mut node_graph = Vec::with_capacity(indicator.len());
    let mut local = Vec::with_capacity(indicator.len());
    let mut sizes = vec![0usize; graphs];
    for (i, &gid) in indicator.iter().enumerate() {
        let g = usize::try_from(gid - 1)
            .ok()
            .filter(|&g| g < graphs)
            .ok_or_else(|| Error::Parse {
                line: i + 1,
                msg: format!("graph id {gid} out of range"),
            })?;
        node_graph.push(g);
        local.push(sizes[g]);
        sizes[g] += 1;
    }
    let mut edge_lists: Vec<Vec<(usize, usize)>> = vec![Vec::new(); graphs];
    for (i, line) in read_lines("A")?.iter().enumerate() {
        let mut parts = line.split(',');
        let (a, b) = match (parts.next(), parts.next()) {
            (Some(a), Some(b)) => (parse_int(a, i + 1)?, parse_int(b, i + 1)?),
            _ => {
                return Err(Error::Parse {
                    line: i + 1,
                    msg: "expected `i, j`".into(),
                })
            }
        };
        let (a, b) = (a - 1, b - 1);
        if a < 0 || b < 0 || a as usize >= node_graph.len() || b as usize >= node_graph.len() {
            return Err(Error::Parse {
                line: i + 1,
                msg: "node id out of range".into(),
            });
        }
        let (a, b) = (a as usize, b as usize);
        if node_graph[a] != node_graph[b] {
            return Err(Error::Parse {
                line: i + 1,
                msg: "edge crosses graphs".into(),
            });
        }
        edge_lists[node_graph[a]].push((local[a], local[b]));
    }
    edge_lists
        .into_iter()
        .zip(sizes)
        .zip(labels)
        .map(|((edges, n), label)| Ok((Graph::from_pairs(n.max(1), edges)?, label)))
        .collect()
}
