//! Finite kernel sections `k(x,y)` over a list of core vertices, with a
//! descriptor saying which kernel the entries are meant to be.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corridor::{relation_z, CorridorTable};
use crate::factorization::RadialFunction;
use crate::graph::{Graph, GraphError, VertexId};

#[derive(Debug, Error)]
pub enum KernelError {
    #[error("vertex {0} is not in the core")]
    OutsideCore(VertexId),
    #[error("matrix is {rows}x{cols}, expected a square matrix of size {expected}")]
    Shape { rows: usize, cols: usize, expected: usize },
    #[error("parse error on line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error(transparent)]
    Graph(#[from] GraphError),
}

/// Which kernel a matrix holds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum KernelDescriptor {
    /// `z^{d(x,y)}`.
    Power { z: Complex64 },
    /// `[d(x,y) ≤ n]`.
    Ball { n: u32 },
    /// `[d(x,y) = n]`.
    Sphere { n: u32 },
    /// `[(x,y) ∈ Z(k,l)]` for the given overlap window.
    Corridor { k: i64, l: i64, r1: u32 },
    /// `f(d(x,y))` with `f(m) = r^m [m ≤ cutoff]`.
    Radial { r: f64, cutoff: u32 },
    Custom { name: String },
}

impl KernelDescriptor {
    /// The entry a distance-based descriptor prescribes; `None` for the
    /// corridor and custom kinds.
    pub fn value_at_distance(&self, d: u32) -> Option<Complex64> {
        let one = Complex64::new(1.0, 0.0);
        let zero = Complex64::new(0.0, 0.0);
        match self {
            KernelDescriptor::Power { z } => Some(z.powu(d)),
            KernelDescriptor::Ball { n } => Some(if d <= *n { one } else { zero }),
            KernelDescriptor::Sphere { n } => Some(if d == *n { one } else { zero }),
            KernelDescriptor::Radial { r, cutoff } => Some(Complex64::new(
                RadialFunction { r: *r, cutoff: *cutoff }.value(d),
                0.0,
            )),
            KernelDescriptor::Corridor { .. } | KernelDescriptor::Custom { .. } => None,
        }
    }
}

/// A square kernel section; rows and columns share the vertex list `index`.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelMatrix {
    pub descriptor: KernelDescriptor,
    pub index: Vec<VertexId>,
    pub data: DMatrix<Complex64>,
}

/// The JSON side of an exported kernel.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KernelRecord {
    pub descriptor: KernelDescriptor,
    pub dim: usize,
    pub index: Vec<VertexId>,
    pub labels: Vec<String>,
}

/// Core vertices ordered by distance to the base point, then id, truncated
/// to `max_dim`.
pub fn core_section(graph: &Graph, max_dim: usize) -> Vec<VertexId> {
    let d = graph
        .distances_from(graph.base_point())
        .expect("base point is a vertex");
    let mut core = graph.core().to_vec();
    core.sort_by_key(|&v| (d[v as usize], v));
    core.truncate(max_dim);
    core
}

fn check_section(graph: &Graph, section: &[VertexId]) -> Result<(), KernelError> {
    match section.iter().find(|&&v| !graph.in_core(v)) {
        Some(&v) => Err(KernelError::OutsideCore(v)),
        None => Ok(()),
    }
}

impl KernelMatrix {
    /// Fills a distance-based kernel on `section`.
    pub fn from_descriptor(
        graph: &Graph,
        section: &[VertexId],
        descriptor: KernelDescriptor,
    ) -> Result<Self, KernelError> {
        check_section(graph, section)?;
        if descriptor.value_at_distance(0).is_none() {
            return Err(KernelError::Parse {
                line: 0,
                msg: "descriptor is not a function of distance".into(),
            });
        }
        let n = section.len();
        let mut data = DMatrix::zeros(n, n);
        for (i, &x) in section.iter().enumerate() {
            let row = graph.distances_from(x)?;
            for (j, &y) in section.iter().enumerate() {
                data[(i, j)] = descriptor.value_at_distance(row[y as usize]).unwrap();
            }
        }
        Ok(KernelMatrix { descriptor, index: section.to_vec(), data })
    }

    pub fn power(graph: &Graph, section: &[VertexId], z: Complex64) -> Result<Self, KernelError> {
        Self::from_descriptor(graph, section, KernelDescriptor::Power { z })
    }

    pub fn ball(graph: &Graph, section: &[VertexId], n: u32) -> Result<Self, KernelError> {
        Self::from_descriptor(graph, section, KernelDescriptor::Ball { n })
    }

    pub fn sphere(graph: &Graph, section: &[VertexId], n: u32) -> Result<Self, KernelError> {
        Self::from_descriptor(graph, section, KernelDescriptor::Sphere { n })
    }

    pub fn radial(graph: &Graph, section: &[VertexId], f: RadialFunction) -> Result<Self, KernelError> {
        Self::from_descriptor(graph, section, KernelDescriptor::Radial { r: f.r, cutoff: f.cutoff })
    }

    /// `χ_{Z(k,l)}` on `section`, read off the corridor table.
    pub fn corridor(
        table: &CorridorTable,
        section: &[VertexId],
        k: i64,
        l: i64,
        r1: u32,
    ) -> Result<Self, KernelError> {
        let slots = section
            .iter()
            .map(|&v| table.slot(v).map_err(|_| KernelError::OutsideCore(v)))
            .collect::<Result<Vec<_>, _>>()?;
        let rel = relation_z(table, k, l, r1);
        let n = section.len();
        let data = DMatrix::from_fn(n, n, |i, j| {
            Complex64::new(if rel.get(slots[i], slots[j]) { 1.0 } else { 0.0 }, 0.0)
        });
        Ok(KernelMatrix {
            descriptor: KernelDescriptor::Corridor { k, l, r1 },
            index: section.to_vec(),
            data,
        })
    }

    /// A matrix without graph data, indexed by `0..n`.
    pub fn custom(name: &str, data: DMatrix<Complex64>) -> Result<Self, KernelError> {
        if data.nrows() != data.ncols() {
            return Err(KernelError::Shape {
                rows: data.nrows(),
                cols: data.ncols(),
                expected: data.nrows(),
            });
        }
        Ok(KernelMatrix {
            descriptor: KernelDescriptor::Custom { name: name.to_string() },
            index: (0..data.nrows() as VertexId).collect(),
            data,
        })
    }

    pub fn from_real(name: &str, rows: &[&[f64]]) -> Result<Self, KernelError> {
        let n = rows.len();
        if let Some(r) = rows.iter().find(|r| r.len() != n) {
            return Err(KernelError::Shape { rows: n, cols: r.len(), expected: n });
        }
        Self::custom(name, DMatrix::from_fn(n, n, |i, j| Complex64::new(rows[i][j], 0.0)))
    }

    pub fn dim(&self) -> usize {
        self.data.nrows()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    pub fn is_real(&self) -> bool {
        self.data.iter().all(|c| c.im == 0.0)
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        let n = self.dim();
        (0..n).all(|i| (0..=i).all(|j| (self.data[(i, j)] - self.data[(j, i)].conj()).norm() <= tol))
    }

    /// The principal sub-section on the given positions.
    pub fn restrict(&self, positions: &[usize]) -> KernelMatrix {
        let n = positions.len();
        KernelMatrix {
            descriptor: self.descriptor.clone(),
            index: positions.iter().map(|&p| self.index[p]).collect(),
            data: DMatrix::from_fn(n, n, |i, j| self.data[(positions[i], positions[j])]),
        }
    }

    /// First entry disagreeing with a distance-based descriptor, if any.
    pub fn spot_check(&self, graph: &Graph, tol: f64) -> Result<Option<(VertexId, VertexId)>, KernelError> {
        if self.descriptor.value_at_distance(0).is_none() {
            return Ok(None);
        }
        for (i, &x) in self.index.iter().enumerate() {
            let row = graph.distances_from(x)?;
            for (j, &y) in self.index.iter().enumerate() {
                let want = self.descriptor.value_at_distance(row[y as usize]).unwrap();
                if (self.data[(i, j)] - want).norm() > tol {
                    return Ok(Some((x, y)));
                }
            }
        }
        Ok(None)
    }

    pub fn record(&self, graph: Option<&Graph>) -> KernelRecord {
        KernelRecord {
            descriptor: self.descriptor.clone(),
            dim: self.dim(),
            index: self.index.clone(),
            labels: self
                .index
                .iter()
                .map(|&v| graph.map_or_else(|| v.to_string(), |g| g.label(v)))
                .collect(),
        }
    }

    pub fn to_text(&self) -> String {
        matrix_to_text(&self.data)
    }
}

/// One line per row, entries `re,im` separated by single spaces.
pub fn matrix_to_text(m: &DMatrix<Complex64>) -> String {
    let mut out = String::new();
    for i in 0..m.nrows() {
        let row: Vec<String> = (0..m.ncols())
            .map(|j| format!("{:?},{:?}", m[(i, j)].re, m[(i, j)].im))
            .collect();
        out.push_str(&row.join(" "));
        out.push('\n');
    }
    out
}

pub fn matrix_from_text(text: &str) -> Result<DMatrix<Complex64>, KernelError> {
    let mut rows: Vec<Vec<Complex64>> = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let parse = |tok: &str| -> Result<Complex64, KernelError> {
            let err = |msg: &str| KernelError::Parse { line: lineno + 1, msg: format!("{msg}: {tok:?}") };
            let (re, im) = tok.split_once(',').ok_or_else(|| err("expected re,im"))?;
            Ok(Complex64::new(
                re.parse().map_err(|_| err("bad real part"))?,
                im.parse().map_err(|_| err("bad imaginary part"))?,
            ))
        };
        rows.push(line.split_whitespace().map(parse).collect::<Result<_, _>>()?);
    }
    let n = rows.len();
    let cols = rows.first().map_or(0, Vec::len);
    if let Some((i, r)) = rows.iter().enumerate().find(|(_, r)| r.len() != cols) {
        return Err(KernelError::Parse {
            line: i + 1,
            msg: format!("row has {} entries, expected {cols}", r.len()),
        });
    }
    Ok(DMatrix::from_fn(n, cols, |i, j| rows[i][j]))
}
