//! File formats.
//!
//! * data CSV: one sample per row, no header;
//! * matrix CSV: `p` rows of `p` values, no header;
//! * graph JSON: `{"p": 5, "cliques": [[1, 2], [2, 3, 4], [4, 5]]}` with
//!   1-based node labels, written in perfect elimination order;
//! * pattern CSV: `p x p` 0/1 adjacency matrix with ones on the diagonal;
//! * estimate sidecar JSON next to each written estimate.
//!
//! Numbers are written with the shortest representation that parses back to
//! the same `f64`.

use std::fs::File;
use std::io::{BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimators::{Adjustment, ConcentrationEstimate, Method, PsdStatus};
use crate::graph::DecomposableGraph;
use crate::linalg::SymMatrix;
use crate::projection::ProjectionReport;

/// Relative asymmetry accepted when reading a matrix file.
pub const MATRIX_SYMMETRY_TOL: f64 = 1e-9;

fn parse_rows<R: Read>(reader: R) -> Result<Vec<Vec<f64>>> {
    let mut r = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let mut rows = Vec::new();
    for (line, record) in r.records().enumerate() {
        let record = record?;
        let row = record
            .iter()
            .enumerate()
            .map(|(col, field)| {
                field
                    .parse::<f64>()
                    .map_err(|_| Error::Parse(format!("line {}, column {}: '{field}' is not a number", line + 1, col + 1)))
            })
            .collect::<Result<Vec<f64>>>()?;
        rows.push(row);
    }
    Ok(rows)
}

fn rows_to_matrix(rows: Vec<Vec<f64>>) -> Result<DMatrix<f64>> {
    let ncols = rows.first().map_or(0, Vec::len);
    if rows.is_empty() || ncols == 0 {
        return Err(Error::Parse("file holds no values".into()));
    }
    if let Some(bad) = rows.iter().position(|r| r.len() != ncols) {
        return Err(Error::Parse(format!("line {} has {} fields, expected {ncols}", bad + 1, rows[bad].len())));
    }
    Ok(DMatrix::from_fn(rows.len(), ncols, |i, j| rows[i][j]))
}

pub fn read_data_from<R: Read>(reader: R) -> Result<DMatrix<f64>> {
    rows_to_matrix(parse_rows(reader)?)
}

pub fn read_data_csv(path: impl AsRef<Path>) -> Result<DMatrix<f64>> {
    read_data_from(File::open(path)?)
}

pub fn write_dense_to<W: Write>(m: &DMatrix<f64>, writer: W) -> Result<()> {
    let mut w = BufWriter::new(writer);
    for i in 0..m.nrows() {
        let line: Vec<String> = (0..m.ncols()).map(|j| m[(i, j)].to_string()).collect();
        writeln!(w, "{}", line.join(","))?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_data_csv(data: &DMatrix<f64>, path: impl AsRef<Path>) -> Result<()> {
    write_dense_to(data, File::create(path)?)
}

pub fn read_matrix_from<R: Read>(reader: R) -> Result<SymMatrix> {
    let m = rows_to_matrix(parse_rows(reader)?)?;
    if m.nrows() != m.ncols() {
        return Err(Error::DimensionMismatch(format!("matrix file is {}x{}", m.nrows(), m.ncols())));
    }
    SymMatrix::try_from_dense(m, MATRIX_SYMMETRY_TOL)
}

pub fn read_matrix_csv(path: impl AsRef<Path>) -> Result<SymMatrix> {
    read_matrix_from(File::open(path)?)
}

pub fn write_matrix_csv(m: &SymMatrix, path: impl AsRef<Path>) -> Result<()> {
    write_dense_to(m.as_matrix(), File::create(path)?)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GraphFile {
    pub p: usize,
    /// 1-based node labels.
    pub cliques: Vec<Vec<usize>>,
}

impl GraphFile {
    pub fn from_graph(graph: &DecomposableGraph) -> Self {
        GraphFile {
            p: graph.p(),
            cliques: graph.cliques_one_based(),
        }
    }

    pub fn to_graph(&self) -> Result<DecomposableGraph> {
        DecomposableGraph::from_one_based(&self.cliques, self.p)
    }
}

pub fn read_graph_json(path: impl AsRef<Path>) -> Result<DecomposableGraph> {
    let file: GraphFile = serde_json::from_reader(File::open(path)?)?;
    file.to_graph()
}

pub fn write_graph_json(graph: &DecomposableGraph, path: impl AsRef<Path>) -> Result<()> {
    let w = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(w, &GraphFile::from_graph(graph))?;
    Ok(())
}

/// JSON accepted in place of a pattern CSV.
#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum PatternJson {
    Cliques(GraphFile),
    Wrapped { pattern: Vec<Vec<f64>> },
    Bare(Vec<Vec<f64>>),
}

fn adjacency(rows: Vec<Vec<f64>>) -> Vec<Vec<bool>> {
    rows.into_iter()
        .map(|r| r.into_iter().map(|v| v != 0.0).collect())
        .collect()
}

/// Reads a graph from a pattern file: a CSV adjacency matrix, or JSON holding
/// an adjacency matrix (bare or under `"pattern"`) or a clique list.
pub fn read_pattern(path: impl AsRef<Path>) -> Result<DecomposableGraph> {
    let path = path.as_ref();
    let is_json = path
        .extension()
        .is_some_and(|e| e.eq_ignore_ascii_case("json"));
    if !is_json {
        return DecomposableGraph::from_pattern(&adjacency(parse_rows(File::open(path)?)?));
    }
    match serde_json::from_reader(File::open(path)?)? {
        PatternJson::Cliques(file) => file.to_graph(),
        PatternJson::Wrapped { pattern } | PatternJson::Bare(pattern) => {
            DecomposableGraph::from_pattern(&adjacency(pattern))
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorInfo {
    pub code: String,
    pub message: String,
}

impl From<&Error> for ErrorInfo {
    fn from(e: &Error) -> Self {
        ErrorInfo {
            code: e.code().to_string(),
            message: e.to_string(),
        }
    }
}

/// Metadata written next to an estimate CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimateSidecar {
    pub method: String,
    pub n: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub d: Option<f64>,
    pub psd: PsdStatus,
    pub pattern_conforming: bool,
    pub adjustment: Adjustment,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub projection: Option<ProjectionReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<ErrorInfo>,
}

impl EstimateSidecar {
    pub fn new(est: &ConcentrationEstimate) -> Self {
        EstimateSidecar {
            method: est.method.tag().to_string(),
            n: est.n_used,
            d: match est.method {
                Method::SureD { d } => Some(d),
                _ => None,
            },
            psd: est.psd,
            pattern_conforming: est.pattern_conforming,
            adjustment: est.adjustment,
            projection: None,
            error: None,
        }
    }
}

/// `est.csv` -> `est.json`; a path already ending in `.json` gets
/// `.meta.json` instead.
pub fn sidecar_path(out: &Path) -> PathBuf {
    if out.extension().is_some_and(|e| e.eq_ignore_ascii_case("json")) {
        out.with_extension("meta.json")
    } else {
        out.with_extension("json")
    }
}

/// Writes the estimate CSV and its sidecar, returning the sidecar path.
pub fn write_estimate(out: &Path, est: &ConcentrationEstimate, sidecar: &EstimateSidecar) -> Result<PathBuf> {
    write_matrix_csv(&est.matrix, out)?;
    let side = sidecar_path(out);
    let w = BufWriter::new(File::create(&side)?);
    serde_json::to_writer_pretty(w, sidecar)?;
    Ok(side)
}

pub fn write_json<T: Serialize>(value: &T, path: impl AsRef<Path>) -> Result<()> {
    let w = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(w, value)?;
    Ok(())
}
