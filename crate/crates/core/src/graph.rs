//! Quantum-graph data model: vertices with lead counts, finite edges with
//! lengths, oriented bonds, and membership in the bounded graph classes.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;

use crate::error::{Error, Result};
use crate::scalar::Real;

pub type VertexId = i64;
pub type EdgeId = i64;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Vertex {
    pub id: VertexId,
    /// Number of semi-infinite leads attached to the vertex.
    pub leads: u32,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Edge<T> {
    pub id: EdgeId,
    pub endpoints: (VertexId, VertexId),
    pub length: T,
}

/// Oriented copy of an internal edge.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bond<T> {
    /// Position in the canonical bond order.
    pub id: usize,
    pub origin: VertexId,
    pub terminus: VertexId,
    pub origin_index: usize,
    pub terminus_index: usize,
    pub length: T,
    /// Canonical index of the reversed bond.
    pub reverse: usize,
    pub edge: EdgeId,
}

/// A finite open quantum graph `(V, E, L, n)`.
///
/// Vertices and edges are stored sorted by id, which fixes the canonical bond
/// order: edge `k` (in id order) yields bond `2k` oriented from its first
/// endpoint to its second, and bond `2k + 1` in the opposite direction.
/// Self-loops yield two distinct bonds and add 2 to the degree of their vertex.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantumGraph<T> {
    vertices: Vec<Vertex>,
    edges: Vec<Edge<T>>,
    endpoint_index: Vec<(usize, usize)>,
    degree: Vec<usize>,
    index_of: HashMap<VertexId, usize>,
    meta: BTreeMap<String, String>,
}

impl<T: Real> QuantumGraph<T> {
    pub fn new(mut vertices: Vec<Vertex>, mut edges: Vec<Edge<T>>) -> Result<Self> {
        vertices.sort_by_key(|v| v.id);
        edges.sort_by_key(|e| e.id);
        let mut index_of = HashMap::with_capacity(vertices.len());
        for (i, v) in vertices.iter().enumerate() {
            if index_of.insert(v.id, i).is_some() {
                return Err(Error::Structural(format!("duplicate vertex id {}", v.id)));
            }
        }
        let mut seen = HashSet::with_capacity(edges.len());
        let mut endpoint_index = Vec::with_capacity(edges.len());
        let mut degree = vec![0usize; vertices.len()];
        for e in &edges {
            if !seen.insert(e.id) {
                return Err(Error::Structural(format!("duplicate edge id {}", e.id)));
            }
            if !(e.length.is_finite() && e.length > T::zero()) {
                return Err(Error::Structural(format!(
                    "edge {} has non-positive length {}",
                    e.id, e.length
                )));
            }
            let lookup = |v: VertexId| {
                index_of.get(&v).copied().ok_or_else(|| {
                    Error::Structural(format!("edge {} references unknown vertex {}", e.id, v))
                })
            };
            let a = lookup(e.endpoints.0)?;
            let b = lookup(e.endpoints.1)?;
            degree[a] += 1;
            degree[b] += 1;
            endpoint_index.push((a, b));
        }
        Ok(Self {
            vertices,
            edges,
            endpoint_index,
            degree,
            index_of,
            meta: BTreeMap::new(),
        })
    }

    pub fn vertices(&self) -> &[Vertex] {
        &self.vertices
    }

    pub fn edges(&self) -> &[Edge<T>] {
        &self.edges
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn bond_count(&self) -> usize {
        2 * self.edges.len()
    }

    pub fn index_of(&self, id: VertexId) -> Option<usize> {
        self.index_of.get(&id).copied()
    }

    /// Internal degree `d(v)` of the vertex at position `index`.
    pub fn degree(&self, index: usize) -> usize {
        self.degree[index]
    }

    pub fn leads(&self, index: usize) -> u32 {
        self.vertices[index].leads
    }

    /// Endpoint positions of the edge at position `k`.
    pub fn endpoint_index(&self, k: usize) -> (usize, usize) {
        self.endpoint_index[k]
    }

    /// Sum of the edge lengths (each edge once, not each bond).
    pub fn total_length(&self) -> T {
        self.edges.iter().map(|e| e.length).sum()
    }

    pub fn min_length(&self) -> Option<T> {
        self.edges.iter().map(|e| e.length).reduce(T::min)
    }

    pub fn max_length(&self) -> Option<T> {
        self.edges.iter().map(|e| e.length).reduce(T::max)
    }

    /// All `2|E|` bonds in canonical order.
    pub fn bonds(&self) -> Vec<Bond<T>> {
        let mut out = Vec::with_capacity(self.bond_count());
        for (k, e) in self.edges.iter().enumerate() {
            let (a, b) = self.endpoint_index[k];
            out.push(Bond {
                id: 2 * k,
                origin: e.endpoints.0,
                terminus: e.endpoints.1,
                origin_index: a,
                terminus_index: b,
                length: e.length,
                reverse: 2 * k + 1,
                edge: e.id,
            });
            out.push(Bond {
                id: 2 * k + 1,
                origin: e.endpoints.1,
                terminus: e.endpoints.0,
                origin_index: b,
                terminus_index: a,
                length: e.length,
                reverse: 2 * k,
                edge: e.id,
            });
        }
        out
    }

    /// Free-form provenance data; never read by the numerics.
    pub fn meta(&self) -> &BTreeMap<String, String> {
        &self.meta
    }

    pub fn set_meta(&mut self, key: impl Into<String>, value: impl Into<String>) {
        self.meta.insert(key.into(), value.into());
    }

    pub fn with_meta(mut self, key: impl Into<String>, value: impl Into<String>) -> Self {
        self.set_meta(key, value);
        self
    }

    /// Same combinatorics with every length multiplied by `factor`.
    pub fn scaled(&self, factor: T) -> Result<Self> {
        let edges = self
            .edges
            .iter()
            .map(|e| Edge {
                length: e.length * factor,
                ..*e
            })
            .collect();
        let mut g = Self::new(self.vertices.clone(), edges)?;
        g.meta = self.meta.clone();
        Ok(g)
    }

    /// Disjoint union; ids of `other` are shifted past the ids of `self`.
    pub fn disjoint_union(&self, other: &Self) -> Result<Self> {
        let vshift = self.vertices.iter().map(|v| v.id).max().map_or(0, |m| m + 1)
            - other.vertices.iter().map(|v| v.id).min().unwrap_or(0);
        let eshift = self.edges.iter().map(|e| e.id).max().map_or(0, |m| m + 1)
            - other.edges.iter().map(|e| e.id).min().unwrap_or(0);
        let mut vertices = self.vertices.clone();
        vertices.extend(other.vertices.iter().map(|v| Vertex {
            id: v.id + vshift,
            leads: v.leads,
        }));
        let mut edges = self.edges.clone();
        edges.extend(other.edges.iter().map(|e| Edge {
            id: e.id + eshift,
            endpoints: (e.endpoints.0 + vshift, e.endpoints.1 + vshift),
            length: e.length,
        }));
        Self::new(vertices, edges)
    }

    /// `true` when every vertex has `n(v) != d(v)`.
    pub fn is_unbalanced(&self) -> bool {
        (0..self.vertex_count()).all(|i| self.leads(i) as usize != self.degree(i))
    }
}

/// Bounds `(D, n0, Lmin, Lmax)` defining a class of quantum graphs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GraphClassParams<T> {
    /// Maximal internal degree `D`.
    pub max_degree: usize,
    /// Maximal number of leads per vertex `n0`.
    pub max_leads: u32,
    pub l_min: T,
    pub l_max: T,
}

impl<T: Real> GraphClassParams<T> {
    pub fn new(max_degree: usize, max_leads: u32, l_min: T, l_max: T) -> Result<Self> {
        if max_degree < 1 {
            return Err(Error::Parameter("D must be at least 1".into()));
        }
        if !(l_min > T::zero() && l_min.is_finite() && l_max.is_finite()) {
            return Err(Error::Parameter("Lmin must be positive and finite".into()));
        }
        if l_min > l_max {
            return Err(Error::Parameter(format!("Lmin {l_min} exceeds Lmax {l_max}")));
        }
        Ok(Self {
            max_degree,
            max_leads,
            l_min,
            l_max,
        })
    }

    /// Smallest class containing `graph`. Fails for graphs without edges.
    pub fn tightest(graph: &QuantumGraph<T>) -> Result<Self> {
        let (Some(lo), Some(hi)) = (graph.min_length(), graph.max_length()) else {
            return Err(Error::Parameter("graph has no edges".into()));
        };
        let d = (0..graph.vertex_count())
            .map(|i| graph.degree(i))
            .max()
            .unwrap_or(1)
            .max(1);
        let n = graph.vertices().iter().map(|v| v.leads).max().unwrap_or(0);
        Self::new(d, n, lo, hi)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Subject {
    Vertex(VertexId),
    Edge(EdgeId),
}

#[derive(Debug, Clone, PartialEq)]
pub enum ViolationKind {
    DegreeExceeded { degree: usize, max: usize },
    LeadsExceeded { leads: u32, max: u32 },
    LengthOutOfRange { length: f64, min: f64, max: f64 },
    /// `n(v) = d(v)`.
    Balanced { degree: usize },
    /// `d(v) = 0` and `n(v) = 0`: the vertex carries no wave data.
    Isolated,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Violation {
    pub subject: Subject,
    pub kind: ViolationKind,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.subject {
            Subject::Vertex(v) => write!(f, "vertex {v}: ")?,
            Subject::Edge(e) => write!(f, "edge {e}: ")?,
        }
        match &self.kind {
            ViolationKind::DegreeExceeded { degree, max } => {
                write!(f, "internal degree {degree} exceeds D = {max}")
            }
            ViolationKind::LeadsExceeded { leads, max } => {
                write!(f, "{leads} leads exceed n0 = {max}")
            }
            ViolationKind::LengthOutOfRange { length, min, max } => {
                write!(f, "length {length} outside [{min}, {max}]")
            }
            ViolationKind::Balanced { degree } => {
                write!(f, "balanced vertex (n(v) = d(v) = {degree})")
            }
            ViolationKind::Isolated => write!(f, "isolated vertex without leads"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ValidationReport {
    pub in_class: bool,
    pub unbalanced: bool,
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    /// In class and, when it was required, unbalanced.
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Checks `graph` against the class `params`; balance violations are listed
/// only when `require_unbalanced` is set (the `unbalanced` flag is always filled).
pub fn validate<T: Real>(
    graph: &QuantumGraph<T>,
    params: &GraphClassParams<T>,
    require_unbalanced: bool,
) -> ValidationReport {
    let mut violations = Vec::new();
    let mut balance = Vec::new();
    for (i, v) in graph.vertices().iter().enumerate() {
        let d = graph.degree(i);
        let subject = Subject::Vertex(v.id);
        if d > params.max_degree {
            violations.push(Violation {
                subject,
                kind: ViolationKind::DegreeExceeded {
                    degree: d,
                    max: params.max_degree,
                },
            });
        }
        if v.leads > params.max_leads {
            violations.push(Violation {
                subject,
                kind: ViolationKind::LeadsExceeded {
                    leads: v.leads,
                    max: params.max_leads,
                },
            });
        }
        if d == 0 && v.leads == 0 {
            violations.push(Violation {
                subject,
                kind: ViolationKind::Isolated,
            });
        }
        if v.leads as usize == d {
            balance.push(Violation {
                subject,
                kind: ViolationKind::Balanced { degree: d },
            });
        }
    }
    for e in graph.edges() {
        if e.length < params.l_min || e.length > params.l_max {
            violations.push(Violation {
                subject: Subject::Edge(e.id),
                kind: ViolationKind::LengthOutOfRange {
                    length: e.length.as_f64(),
                    min: params.l_min.as_f64(),
                    max: params.l_max.as_f64(),
                },
            });
        }
    }
    let in_class = violations.is_empty();
    let unbalanced = balance.is_empty();
    if require_unbalanced {
        violations.extend(balance);
    }
    ValidationReport {
        in_class,
        unbalanced,
        violations,
    }
}

/// Total length `L_Q`.
pub fn total_length<T: Real>(graph: &QuantumGraph<T>) -> T {
    graph.total_length()
}

pub fn bonds<T: Real>(graph: &QuantumGraph<T>) -> Vec<Bond<T>> {
    graph.bonds()
}
