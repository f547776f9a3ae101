//! Weighted MaxCut instances in the Biq Mac text format.
//!
//! ```text
//! 3 2
//! 1 2 1
//! 2 3 -1
//! ```
//!
//! The header gives the vertex and edge counts; each following line is a
//! 1-based edge `i j w`. A partition `x ∈ {0,1}ⁿ` cuts the edges whose ends
//! differ, and the QUBO objective of `x` is minus the cut weight.

use std::collections::BTreeSet;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ising::{IsingError, IsingModel, QuboModel};

#[derive(Debug, Error)]
pub enum MaxCutError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("header declares {declared} edges, found {found}")]
    EdgeCount { declared: usize, found: usize },
    #[error("line {line}: self-loop on vertex {vertex}")]
    SelfLoop { line: usize, vertex: usize },
    #[error("line {line}: duplicate edge ({i}, {j})")]
    DuplicateEdge { line: usize, i: usize, j: usize },
    #[error("line {line}: vertex {vertex} out of range 1..={n}")]
    VertexOutOfRange { line: usize, vertex: usize, n: usize },
    #[error("partition has {got} entries, graph has {expected} vertices")]
    LengthMismatch { expected: usize, got: usize },
    #[error("edge weight {0} is not an integer")]
    NonIntegerWeight(f64),
    #[error("model has no nonzero coupling")]
    ZeroModel,
    #[error(transparent)]
    Ising(#[from] IsingError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type MaxCutResult<T> = Result<T, MaxCutError>;

/// Undirected weighted graph with 0-based edges `(i, j, w)`, `i < j`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Graph {
    pub n_vertices: usize,
    pub edges: Vec<(usize, usize, f64)>,
}

impl Graph {
    pub fn n_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn load(path: impl AsRef<Path>) -> MaxCutResult<Self> {
        parse_biqmac(&std::fs::read_to_string(path)?)
    }

    pub fn max_abs_weight(&self) -> f64 {
        self.edges.iter().map(|e| e.2.abs()).fold(0.0, f64::max)
    }
}

fn field<T: std::str::FromStr>(tok: Option<&str>, line: usize, what: &str) -> MaxCutResult<T> {
    let tok = tok.ok_or_else(|| MaxCutError::Parse { line, message: format!("missing {what}") })?;
    tok.parse().map_err(|_| MaxCutError::Parse { line, message: format!("bad {what} `{tok}`") })
}

/// Parse Biq Mac text. Blank lines and lines starting with `#` are skipped.
pub fn parse_biqmac(text: &str) -> MaxCutResult<Graph> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(k, l)| (k + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
    let (hline, header) = lines.next().ok_or(MaxCutError::Parse { line: 1, message: "empty input".into() })?;
    let mut tok = header.split_whitespace();
    let n: usize = field(tok.next(), hline, "vertex count")?;
    let declared: usize = field(tok.next(), hline, "edge count")?;
    if tok.next().is_some() {
        return Err(MaxCutError::Parse { line: hline, message: "trailing header fields".into() });
    }
    let mut seen = BTreeSet::new();
    let mut edges = Vec::with_capacity(declared);
    for (line, l) in lines {
        let mut tok = l.split_whitespace();
        let i: usize = field(tok.next(), line, "vertex")?;
        let j: usize = field(tok.next(), line, "vertex")?;
        let w: f64 = field(tok.next(), line, "weight")?;
        if tok.next().is_some() {
            return Err(MaxCutError::Parse { line, message: "trailing fields".into() });
        }
        if !w.is_finite() {
            return Err(MaxCutError::Parse { line, message: "non-finite weight".into() });
        }
        for v in [i, j] {
            if v == 0 || v > n {
                return Err(MaxCutError::VertexOutOfRange { line, vertex: v, n });
            }
        }
        if i == j {
            return Err(MaxCutError::SelfLoop { line, vertex: i });
        }
        let (a, b) = (i.min(j) - 1, i.max(j) - 1);
        if !seen.insert((a, b)) {
            return Err(MaxCutError::DuplicateEdge { line, i: a + 1, j: b + 1 });
        }
        edges.push((a, b, w));
    }
    if edges.len() != declared {
        return Err(MaxCutError::EdgeCount { declared, found: edges.len() });
    }
    Ok(Graph { n_vertices: n, edges })
}

/// Q_ij = Q_ji = w_ij and Q_ii = −Σ_j w_ij, so `xᵀQx = −cut(x)`.
pub fn to_qubo(g: &Graph) -> MaxCutResult<QuboModel> {
    let mut q = QuboModel::new(g.n_vertices);
    for &(i, j, w) in &g.edges {
        q.add(i, j, w)?;
        q.add(i, i, -w)?;
        q.add(j, j, -w)?;
    }
    Ok(q)
}

fn check_len(g: &Graph, x: &[u8]) -> MaxCutResult<()> {
    if x.len() != g.n_vertices {
        return Err(MaxCutError::LengthMismatch { expected: g.n_vertices, got: x.len() });
    }
    Ok(())
}

pub fn cut_value(g: &Graph, x: &[u8]) -> MaxCutResult<f64> {
    check_len(g, x)?;
    Ok(g.edges.iter().filter(|e| (x[e.0] != 0) != (x[e.1] != 0)).map(|e| e.2).sum())
}

/// Cut weight in exact integer arithmetic; all weights must be integers.
pub fn cut_value_int(g: &Graph, x: &[u8]) -> MaxCutResult<i64> {
    check_len(g, x)?;
    let mut total = 0i64;
    for &(i, j, w) in &g.edges {
        if w.fract() != 0.0 || w.abs() > 2f64.powi(53) {
            return Err(MaxCutError::NonIntegerWeight(w));
        }
        if (x[i] != 0) != (x[j] != 0) {
            total += w as i64;
        }
    }
    Ok(total)
}

/// Divide by the largest |coupling|; returns the factor to multiply back.
pub fn rescale(model: &IsingModel) -> MaxCutResult<(IsingModel, f64)> {
    let factor = model.max_abs_coupling();
    if factor == 0.0 {
        return Err(MaxCutError::ZeroModel);
    }
    if factor == 1.0 {
        return Ok((model.clone(), 1.0));
    }
    Ok((model.scaled(1.0 / factor), factor))
}

/// Published instance with its optimal energy and the run settings that
/// reached it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KnownInstance {
    pub name: &'static str,
    pub n_vertices: usize,
    pub n_edges: Option<usize>,
    /// Minimum of −cut.
    pub ground_energy: f64,
    pub m_steps: usize,
    pub hx: f64,
    pub eta: f64,
    pub bond_dim: usize,
    pub sweeps: usize,
}

const fn known(name: &'static str, n_vertices: usize, n_edges: Option<usize>, ground_energy: f64, m_steps: usize, hx: f64, eta: f64, bond_dim: usize) -> KnownInstance {
    KnownInstance { name, n_vertices, n_edges, ground_energy, m_steps, hx, eta, bond_dim, sweeps: 5 }
}

pub const KNOWN_INSTANCES: &[KnownInstance] = &[
    known("pm1s_80.0", 80, Some(316), -79.0, 5, 1.0, 0.0, 30),
    known("pm1s_80.1", 80, Some(316), -69.0, 5, 1.0, 0.0, 30),
    known("pm1s_80.3", 80, Some(316), -66.0, 5, 1.0, 0.0, 30),
    known("g05_60.0", 60, None, -536.0, 10, 1.0, 0.3, 30),
    known("bqp250-8", 251, Some(3265), -35726.0, 10, 1.0, 0.0, 30),
];

/// Look up a published instance by file stem.
pub fn known_instance(name: &str) -> Option<&'static KnownInstance> {
    KNOWN_INSTANCES.iter().find(|k| k.name == name)
}
