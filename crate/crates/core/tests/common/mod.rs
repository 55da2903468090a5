#![allow(dead_code)]

use num_complex::Complex;
use proptest::prelude::*;
use qgres::generate::{generate, Family, FamilySpec, LeadPattern, LengthRule};
use qgres::graph::{Edge, QuantumGraph, Vertex};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub type G = QuantumGraph<f64>;
pub type C = Complex<f64>;

pub fn interval() -> G {
    QuantumGraph::new(
        vec![Vertex { id: 0, leads: 0 }, Vertex { id: 1, leads: 2 }],
        vec![Edge { id: 0, endpoints: (0, 1), length: 1.0 }],
    )
    .unwrap()
}

pub fn neumann_interval() -> G {
    QuantumGraph::new(
        vec![Vertex { id: 0, leads: 0 }, Vertex { id: 1, leads: 0 }],
        vec![Edge { id: 0, endpoints: (0, 1), length: 1.0 }],
    )
    .unwrap()
}

pub fn family(family: Family, size: usize, leads: LeadPattern, lengths: LengthRule<f64>, seed: u64) -> G {
    generate(&FamilySpec::new(family, size, leads, lengths).seed(seed)).unwrap()
}

pub fn cycle(n: usize) -> G {
    family(Family::CycleWithLeads, n, LeadPattern::Constant(1), LengthRule::Constant(1.0), 0)
}

/// Connected graph: a random spanning tree plus extra edges (loops and
/// parallel edges allowed), lengths in `[lo, hi]`. With `unbalanced`, a vertex
/// with `n(v) = d(v)` gets one more lead.
pub fn random_graph(seed: u64, max_vertices: usize, extra: usize, lo: f64, hi: f64, unbalanced: bool) -> G {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.random_range(1..=max_vertices);
    let mut pairs: Vec<(usize, usize)> = (1..n).map(|v| (rng.random_range(0..v), v)).collect();
    let extra = rng.random_range(if n == 1 { 1 } else { 0 }..=extra);
    for _ in 0..extra {
        pairs.push((rng.random_range(0..n), rng.random_range(0..n)));
    }
    let mut degree = vec![0usize; n];
    for &(a, b) in &pairs {
        degree[a] += 1;
        degree[b] += 1;
    }
    let vertices = (0..n)
        .map(|i| {
            let mut leads = rng.random_range(0..=3u32);
            if unbalanced && leads as usize == degree[i] {
                leads += 1;
            }
            Vertex { id: i as i64 * 3 + 1, leads }
        })
        .collect();
    let edges = pairs
        .iter()
        .enumerate()
        .map(|(k, &(a, b))| Edge {
            id: k as i64,
            endpoints: (a as i64 * 3 + 1, b as i64 * 3 + 1),
            length: lo + (hi - lo) * rng.random::<f64>(),
        })
        .collect();
    QuantumGraph::new(vertices, edges).unwrap()
}

pub fn arb_graph(unbalanced: bool) -> impl Strategy<Value = G> {
    any::<u64>().prop_map(move |s| random_graph(s, 5, 3, 0.5, 2.0, unbalanced))
}

/// Relative difference.
pub fn rel(a: C, b: C) -> f64 {
    (a - b).norm() / a.norm().max(b.norm()).max(1e-300)
}

/// A fixed set of unbalanced graphs: intervals, paths, cycles and random
/// regular graphs with leads.
pub fn test_graphs() -> Vec<(String, G)> {
    let mut out = vec![("interval".to_string(), interval())];
    let u = LengthRule::Uniform { lo: 1.0, hi: 2.0 };
    out.push((
        "path5".into(),
        family(Family::PathWithLeads, 5, LeadPattern::EndsInterior { ends: 0, interior: 1 }, u, 1),
    ));
    out.push((
        "path4_ends2".into(),
        family(Family::PathWithLeads, 4, LeadPattern::EndsInterior { ends: 2, interior: 1 }, LengthRule::Constant(1.0), 0),
    ));
    out.push(("cycle3".into(), cycle(3)));
    out.push(("cycle5_uniform".into(), family(Family::CycleWithLeads, 5, LeadPattern::Constant(1), u, 2)));
    out.push(("cycle4_leads3".into(), family(Family::CycleWithLeads, 4, LeadPattern::Constant(3), u, 3)));
    out.push((
        "regular3_n6".into(),
        family(Family::RandomRegularWithLeads { degree: 3 }, 6, LeadPattern::Constant(1), u, 4),
    ));
    out.push((
        "regular3_n8".into(),
        family(Family::RandomRegularWithLeads { degree: 3 }, 8, LeadPattern::Constant(2), u, 5),
    ));
    out.push((
        "regular4_n6".into(),
        family(Family::RandomRegularWithLeads { degree: 4 }, 6, LeadPattern::Constant(1), u, 6),
    ));
    out.push(("random_a".into(), random_graph(11, 5, 3, 1.0, 2.0, true)));
    out.push(("random_b".into(), random_graph(12, 5, 3, 1.0, 2.0, true)));
    out
}
