//! Plain-text file formats.
//!
//! * dense matrix: first line `n,d`, then n rows of d comma-separated floats
//! * labels: one 1-based integer per line
//! * edge list: whitespace-separated `u v` pairs, 1-based, undirected
//! * crowd labels: header `worker,item,label`, one row per observed answer,
//!   1-based ids and labels

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use lloyd_core::crowd::{ConfusionTensor, CrowdTable};
use lloyd_core::graph::AdjacencyMatrix;
use lloyd_core::{ClusterError, DataMatrix, LabelVector};
use ndarray::Array2;

#[derive(Debug, thiserror::Error)]
pub enum IoError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },
    #[error("{path}: {source}")]
    Model {
        path: PathBuf,
        source: ClusterError,
    },
}

pub type Result<T> = std::result::Result<T, IoError>;

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|source| IoError::Io {
        path: path.to_owned(),
        source,
    })
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|source| IoError::Io {
            path: dir.to_owned(),
            source,
        })?;
    }
    fs::write(path, text).map_err(|source| IoError::Io {
        path: path.to_owned(),
        source,
    })
}

fn parse_err(path: &Path, line: usize, message: impl Into<String>) -> IoError {
    IoError::Parse {
        path: path.to_owned(),
        line,
        message: message.into(),
    }
}

fn model_err(path: &Path) -> impl FnOnce(ClusterError) -> IoError + '_ {
    move |source| IoError::Model {
        path: path.to_owned(),
        source,
    }
}

/// Non-blank lines with their 1-based line numbers; `#` starts a comment.
fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").trim()))
        .filter(|(_, l)| !l.is_empty())
}

fn parse_usize(path: &Path, line: usize, field: &str) -> Result<usize> {
    field
        .trim()
        .parse()
        .map_err(|_| parse_err(path, line, format!("expected a non-negative integer, got {field:?}")))
}

pub fn format_dense(values: &Array2<f64>) -> String {
    let (n, d) = values.dim();
    let mut out = format!("{n},{d}\n");
    for row in values.rows() {
        let fields: Vec<String> = row.iter().map(|v| v.to_string()).collect();
        out.push_str(&fields.join(","));
        out.push('\n');
    }
    out
}

pub fn parse_dense(path: &Path, text: &str) -> Result<Array2<f64>> {
    let mut lines = content_lines(text);
    let (line, header) = lines.next().ok_or_else(|| parse_err(path, 1, "empty file"))?;
    let dims: Vec<&str> = header.split(',').collect();
    if dims.len() != 2 {
        return Err(parse_err(path, line, "header must be \"n,d\""));
    }
    let n = parse_usize(path, line, dims[0])?;
    let d = parse_usize(path, line, dims[1])?;
    let mut values = Vec::with_capacity(n * d);
    let mut rows = 0;
    for (line, text) in lines {
        let fields: Vec<&str> = text.split(',').collect();
        if fields.len() != d {
            return Err(parse_err(path, line, format!("expected {d} values, found {}", fields.len())));
        }
        for f in fields {
            let v: f64 = f
                .trim()
                .parse()
                .map_err(|_| parse_err(path, line, format!("not a number: {f:?}")))?;
            values.push(v);
        }
        rows += 1;
    }
    if rows != n {
        return Err(parse_err(path, 1, format!("header announces {n} rows, found {rows}")));
    }
    Ok(Array2::from_shape_vec((n, d), values).expect("row lengths checked"))
}

pub fn write_dense(path: &Path, values: &Array2<f64>) -> Result<()> {
    write_text(path, &format_dense(values))
}

pub fn read_dense(path: &Path) -> Result<DataMatrix> {
    let values = parse_dense(path, &read(path)?)?;
    DataMatrix::new(values).map_err(model_err(path))
}

pub fn format_labels(labels: &LabelVector) -> String {
    labels.as_slice().iter().fold(String::new(), |mut out, &l| {
        let _ = writeln!(out, "{}", l + 1);
        out
    })
}

/// Labels are 1-based on disk. `k` defaults to the largest label present.
pub fn parse_labels(path: &Path, text: &str, k: Option<usize>) -> Result<LabelVector> {
    let mut labels = Vec::new();
    for (line, field) in content_lines(text) {
        let l = parse_usize(path, line, field)?;
        if l == 0 || k.is_some_and(|k| l > k) {
            return Err(parse_err(path, line, format!("label {l} out of range")));
        }
        labels.push(l - 1);
    }
    let k = k.unwrap_or_else(|| labels.iter().max().map_or(1, |&m| m + 1));
    LabelVector::new(labels, k).map_err(model_err(path))
}

pub fn write_labels(path: &Path, labels: &LabelVector) -> Result<()> {
    write_text(path, &format_labels(labels))
}

pub fn read_labels(path: &Path, k: Option<usize>) -> Result<LabelVector> {
    parse_labels(path, &read(path)?, k)
}

pub fn format_edges(graph: &AdjacencyMatrix) -> String {
    graph.edges().fold(String::new(), |mut out, (u, v)| {
        let _ = writeln!(out, "{} {}", u + 1, v + 1);
        out
    })
}

/// `n` defaults to the largest node id mentioned.
pub fn parse_edges(path: &Path, text: &str, n: Option<usize>) -> Result<AdjacencyMatrix> {
    let mut edges = Vec::new();
    let mut seen = std::collections::HashSet::new();
    for (line, content) in content_lines(text) {
        let ids: Vec<&str> = content.split_whitespace().collect();
        if ids.len() != 2 {
            return Err(parse_err(path, line, "expected two node ids"));
        }
        let u = parse_usize(path, line, ids[0])?;
        let v = parse_usize(path, line, ids[1])?;
        if u == 0 || v == 0 {
            return Err(parse_err(path, line, "node ids are 1-based"));
        }
        if u == v {
            return Err(parse_err(path, line, format!("self-loop at node {u}")));
        }
        if !seen.insert((u.min(v), u.max(v))) {
            return Err(parse_err(path, line, format!("duplicate edge {u} {v}")));
        }
        edges.push((u - 1, v - 1));
    }
    let max_id = edges.iter().map(|&(u, v)| u.max(v) + 1).max().unwrap_or(0);
    let n = match n {
        Some(n) if n < max_id => {
            return Err(parse_err(path, 1, format!("node id {max_id} exceeds node count {n}")));
        }
        Some(n) => n,
        None => max_id,
    };
    AdjacencyMatrix::from_edges(n, &edges).map_err(model_err(path))
}

pub fn write_edges(path: &Path, graph: &AdjacencyMatrix) -> Result<()> {
    write_text(path, &format_edges(graph))
}

pub fn read_edges(path: &Path, n: Option<usize>) -> Result<AdjacencyMatrix> {
    parse_edges(path, &read(path)?, n)
}

pub fn format_crowd(table: &CrowdTable) -> String {
    let mut out = String::from("worker,item,label\n");
    for i in 0..table.workers() {
        for j in 0..table.items() {
            if let Some(h) = table.answer(i, j) {
                let _ = writeln!(out, "{},{},{}", i + 1, j + 1, h + 1);
            }
        }
    }
    out
}

/// Dimensions default to the largest worker id, item id and label present.
pub fn parse_crowd(
    path: &Path,
    text: &str,
    dims: (Option<usize>, Option<usize>, Option<usize>),
) -> Result<CrowdTable> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(text.as_bytes());
    let headers = reader.headers().map_err(|e| parse_err(path, 1, e.to_string()))?.clone();
    if headers.iter().collect::<Vec<_>>() != ["worker", "item", "label"] {
        return Err(parse_err(path, 1, "header must be \"worker,item,label\""));
    }
    let mut answers = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line() as usize);
            parse_err(path, line, e.to_string())
        })?;
        let line = record.position().map_or(0, |p| p.line() as usize);
        let w = parse_usize(path, line, &record[0])?;
        let j = parse_usize(path, line, &record[1])?;
        let h = parse_usize(path, line, &record[2])?;
        if w == 0 || j == 0 {
            return Err(parse_err(path, line, "worker and item ids are 1-based"));
        }
        if h == 0 {
            return Err(parse_err(
                path,
                line,
                "label 0 is not allowed; leave missing answers out of the file",
            ));
        }
        answers.push((line, w - 1, j - 1, h));
    }
    let fit = |given: Option<usize>, found: usize, what: &str| match given {
        Some(v) if v < found => Err(parse_err(path, 1, format!("{what} {found} exceeds declared {v}"))),
        Some(v) => Ok(v),
        None => Ok(found),
    };
    let m = fit(dims.0, answers.iter().map(|a| a.1 + 1).max().unwrap_or(0), "worker")?;
    let n = fit(dims.1, answers.iter().map(|a| a.2 + 1).max().unwrap_or(0), "item")?;
    let k = fit(dims.2, answers.iter().map(|a| a.3).max().unwrap_or(0), "label")?;
    if m == 0 || n == 0 || k == 0 {
        return Err(parse_err(path, 1, "no answers"));
    }
    let mut entries = vec![0u16; m * n];
    for (line, w, j, h) in answers {
        let slot = &mut entries[w * n + j];
        if *slot != 0 {
            return Err(parse_err(path, line, format!("worker {} answered item {} twice", w + 1, j + 1)));
        }
        *slot = u16::try_from(h).map_err(|_| parse_err(path, line, "label too large"))?;
    }
    CrowdTable::new(m, n, k, entries).map_err(model_err(path))
}

pub fn write_crowd(path: &Path, table: &CrowdTable) -> Result<()> {
    write_text(path, &format_crowd(table))
}

pub fn read_crowd(path: &Path) -> Result<CrowdTable> {
    parse_crowd(path, &read(path)?, (None, None, None))
}

/// One row per `(worker, truth, answer)`, all 1-based.
pub fn format_confusion(pi: &ConfusionTensor) -> String {
    let mut out = String::from("worker,truth,answer,probability\n");
    for i in 0..pi.workers() {
        for g in 0..pi.classes() {
            for (h, p) in pi.row(i, g).iter().enumerate() {
                let _ = writeln!(out, "{},{},{},{}", i + 1, g + 1, h + 1, p);
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p() -> &'static Path {
        Path::new("test")
    }

    #[test]
    fn path_graph_from_edge_list() {
        let g = parse_edges(p(), "1 2\n2 3\n", None).unwrap();
        assert_eq!(g.n(), 3);
        assert_eq!(g.degrees(), vec![1, 2, 1]);
    }

    #[test]
    fn edge_list_rejects_duplicates_and_loops() {
        assert!(matches!(parse_edges(p(), "1 2\n2 1\n", None), Err(IoError::Parse { line: 2, .. })));
        assert!(parse_edges(p(), "3 3\n", None).is_err());
        assert!(parse_edges(p(), "0 1\n", None).is_err());
    }

    #[test]
    fn explicit_missing_label_is_rejected() {
        let text = "worker,item,label\n1,1,2\n1,2,0\n";
        assert!(matches!(parse_crowd(p(), text, (None, None, None)), Err(IoError::Parse { line: 3, .. })));
    }

    #[test]
    fn crowd_round_trip() {
        let t = CrowdTable::new(2, 3, 3, vec![1, 0, 3, 2, 2, 0]).unwrap();
        let back = parse_crowd(p(), &format_crowd(&t), (None, None, None)).unwrap();
        assert_eq!(back, t);
    }

    #[test]
    fn dense_round_trip() {
        let a = ndarray::array![[0.1, -2.5e-8], [1.0 / 3.0, 4.0]];
        assert_eq!(parse_dense(p(), &format_dense(&a)).unwrap(), a);
    }

    #[test]
    fn dense_row_count_is_checked() {
        assert!(parse_dense(p(), "3,1\n1\n2\n").is_err());
        assert!(matches!(parse_dense(p(), "2,2\n1,2\n3\n"), Err(IoError::Parse { line: 3, .. })));
    }

    #[test]
    fn labels_are_one_based() {
        let z = parse_labels(p(), "1\n3\n2\n", None).unwrap();
        assert_eq!(z.as_slice(), &[0, 2, 1]);
        assert_eq!(z.k(), 3);
        assert_eq!(format_labels(&z), "1\n3\n2\n");
        assert!(parse_labels(p(), "0\n", None).is_err());
    }
}
