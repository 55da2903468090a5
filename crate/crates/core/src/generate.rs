//! Deterministic graph families used by the experiments.

use std::collections::HashSet;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::graph::{Edge, GraphClassParams, QuantumGraph, Vertex};
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Family {
    /// One edge between two vertices (`size` must be 1).
    IntervalWithLeads,
    /// Cycle on `size` vertices; `size = 1` is a self-loop, `size = 2` a
    /// pair of parallel edges.
    CycleWithLeads,
    /// Simple `degree`-regular graph on `size` vertices (configuration model
    /// with rejection).
    RandomRegularWithLeads { degree: usize },
    /// Path on `size` vertices.
    PathWithLeads,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LeadPattern {
    Constant(u32),
    /// `ends` leads on the endpoints of a path or interval, `interior`
    /// elsewhere. Cycles and regular graphs only use `interior`.
    EndsInterior { ends: u32, interior: u32 },
    /// One entry per vertex, in vertex id order.
    Explicit(Vec<u32>),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LengthRule<T> {
    Constant(T),
    /// Independent uniform draws in `[lo, hi]`.
    Uniform { lo: T, hi: T },
}

#[derive(Debug, Clone, PartialEq)]
pub struct FamilySpec<T> {
    pub family: Family,
    pub size: usize,
    pub leads: LeadPattern,
    pub lengths: LengthRule<T>,
    pub seed: u64,
}

impl<T: Real> FamilySpec<T> {
    pub fn new(family: Family, size: usize, leads: LeadPattern, lengths: LengthRule<T>) -> Self {
        Self {
            family,
            size,
            leads,
            lengths,
            seed: 0,
        }
    }

    pub fn seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    /// Class the generated graphs are advertised to belong to.
    pub fn class_params(&self) -> Result<GraphClassParams<T>> {
        let d = match self.family {
            Family::IntervalWithLeads => 1,
            Family::CycleWithLeads => 2,
            Family::PathWithLeads => {
                if self.size <= 2 {
                    1
                } else {
                    2
                }
            }
            Family::RandomRegularWithLeads { degree } => degree.max(1),
        };
        let n0 = match &self.leads {
            LeadPattern::Constant(n) => *n,
            LeadPattern::EndsInterior { ends, interior } => match self.family {
                Family::IntervalWithLeads | Family::PathWithLeads => {
                    if self.size <= 2 {
                        *ends
                    } else {
                        (*ends).max(*interior)
                    }
                }
                _ => *interior,
            },
            LeadPattern::Explicit(v) => v.iter().copied().max().unwrap_or(0),
        };
        let (lo, hi) = match self.lengths {
            LengthRule::Constant(l) => (l, l),
            LengthRule::Uniform { lo, hi } => (lo, hi),
        };
        GraphClassParams::new(d, n0, lo, hi)
    }
}

fn leads_for(pattern: &LeadPattern, index: usize, count: usize, has_ends: bool) -> Result<u32> {
    Ok(match pattern {
        LeadPattern::Constant(n) => *n,
        LeadPattern::EndsInterior { ends, interior } => {
            if has_ends && (index == 0 || index + 1 == count) {
                *ends
            } else {
                *interior
            }
        }
        LeadPattern::Explicit(v) => *v.get(index).ok_or_else(|| {
            Error::Parameter(format!("explicit lead pattern has {} entries, need {count}", v.len()))
        })?,
    })
}

fn regular_pairs(size: usize, degree: usize, rng: &mut ChaCha8Rng) -> Result<Vec<(usize, usize)>> {
    if degree == 0 || degree >= size {
        return Err(Error::Parameter(format!(
            "no simple {degree}-regular graph on {size} vertices"
        )));
    }
    if !(degree * size).is_multiple_of(2) {
        return Err(Error::Parameter(format!(
            "degree * size = {} is odd",
            degree * size
        )));
    }
    let mut stubs: Vec<usize> = (0..size).flat_map(|v| std::iter::repeat_n(v, degree)).collect();
    'attempt: for _ in 0..100_000 {
        stubs.shuffle(rng);
        let mut seen = HashSet::with_capacity(stubs.len() / 2);
        let mut pairs = Vec::with_capacity(stubs.len() / 2);
        for p in stubs.chunks_exact(2) {
            let (a, b) = (p[0].min(p[1]), p[0].max(p[1]));
            if a == b || !seen.insert((a, b)) {
                continue 'attempt;
            }
            pairs.push((a, b));
        }
        pairs.sort_unstable();
        return Ok(pairs);
    }
    Err(Error::Parameter(format!(
        "failed to draw a simple {degree}-regular graph on {size} vertices"
    )))
}

/// Builds the graph described by `spec`. Identical specs (including the seed)
/// always produce identical graphs.
pub fn generate<T: Real>(spec: &FamilySpec<T>) -> Result<QuantumGraph<T>> {
    if spec.size == 0 {
        return Err(Error::Parameter("size must be at least 1".into()));
    }
    if let LengthRule::Uniform { lo, hi } = spec.lengths {
        if !(lo > T::zero() && lo <= hi) {
            return Err(Error::Parameter(format!("invalid length range [{lo}, {hi}]")));
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let n = spec.size;
    let (vertex_count, pairs, has_ends): (usize, Vec<(usize, usize)>, bool) = match spec.family {
        Family::IntervalWithLeads => {
            if n != 1 {
                return Err(Error::Parameter("interval family requires size 1".into()));
            }
            (2, vec![(0, 1)], true)
        }
        Family::PathWithLeads => (n, (0..n.saturating_sub(1)).map(|i| (i, i + 1)).collect(), true),
        Family::CycleWithLeads => (n, (0..n).map(|i| (i, (i + 1) % n)).collect(), false),
        Family::RandomRegularWithLeads { degree } => (n, regular_pairs(n, degree, &mut rng)?, false),
    };
    let vertices = (0..vertex_count)
        .map(|i| {
            Ok(Vertex {
                id: i as i64,
                leads: leads_for(&spec.leads, i, vertex_count, has_ends)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let edges = pairs
        .iter()
        .enumerate()
        .map(|(k, &(a, b))| {
            let length = match spec.lengths {
                LengthRule::Constant(l) => l,
                LengthRule::Uniform { lo, hi } => {
                    let u: f64 = rng.random();
                    (lo + (hi - lo) * T::lit(u)).min(hi)
                }
            };
            Edge {
                id: k as i64,
                endpoints: (a as i64, b as i64),
                length,
            }
        })
        .collect();
    let graph = QuantumGraph::new(vertices, edges)?
        .with_meta("family", format!("{:?}", spec.family))
        .with_meta("size", spec.size.to_string())
        .with_meta("leads", format!("{:?}", spec.leads))
        .with_meta("lengths", format!("{:?}", spec.lengths))
        .with_meta("seed", spec.seed.to_string());
    Ok(graph)
}
