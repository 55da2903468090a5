//! Rooted graphs, local distance, bond-diagonal resolvent entries and the
//! spectral pairing `<mu_Q, g> = (1 / L_Q) sum_z g(z)`.

use std::collections::{BTreeMap, HashMap, VecDeque};
use std::fmt::Write as _;

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::generate::{generate, FamilySpec};
use crate::graph::{Edge, QuantumGraph, Vertex, VertexId};
use crate::scalar::{imag_unit, Real};
use crate::secular::Secular;
use crate::trace::{boundary_integral, truncation_bound, GaussianTest, LineIntegrals};

/// A graph with a distinguished root bond (index in canonical bond order).
#[derive(Debug, Clone, PartialEq)]
pub struct RootedGraph<T> {
    pub graph: QuantumGraph<T>,
    pub root: usize,
}

impl<T: Real> RootedGraph<T> {
    pub fn new(graph: QuantumGraph<T>, root: usize) -> Result<Self> {
        if root >= graph.bond_count() {
            return Err(Error::Domain(format!(
                "root bond {root} out of range ({} bonds)",
                graph.bond_count()
            )));
        }
        Ok(Self { graph, root })
    }

    /// Origin of the root bond.
    pub fn center(&self) -> VertexId {
        self.graph.bonds()[self.root].origin
    }
}

/// Ball around the origin of a root bond. The root bond is absent when its
/// terminus lies outside the ball (radius 0 without a loop at the center).
#[derive(Debug, Clone, PartialEq)]
pub struct RootedBall<T> {
    pub graph: QuantumGraph<T>,
    pub center: VertexId,
    pub root: Option<usize>,
}

fn vertex_distances<T: Real>(graph: &QuantumGraph<T>, from: usize, radius: usize) -> Vec<Option<usize>> {
    let n = graph.vertex_count();
    let mut adj = vec![Vec::new(); n];
    for k in 0..graph.edge_count() {
        let (a, b) = graph.endpoint_index(k);
        adj[a].push(b);
        adj[b].push(a);
    }
    let mut dist = vec![None; n];
    dist[from] = Some(0);
    let mut queue = VecDeque::from([from]);
    while let Some(v) = queue.pop_front() {
        let d = dist[v].unwrap();
        if d == radius {
            continue;
        }
        for &w in &adj[v] {
            if dist[w].is_none() {
                dist[w] = Some(d + 1);
                queue.push_back(w);
            }
        }
    }
    dist
}

/// Induced subgraph on the vertices within combinatorial distance `radius`
/// of the root's origin, keeping ids, lengths and lead counts.
pub fn rooted_ball<T: Real>(rg: &RootedGraph<T>, radius: usize) -> RootedBall<T> {
    let g = &rg.graph;
    let bond = g.bonds()[rg.root];
    let dist = vertex_distances(g, bond.origin_index, radius);
    let vertices: Vec<Vertex> = g
        .vertices()
        .iter()
        .zip(&dist)
        .filter(|(_, d)| d.is_some())
        .map(|(v, _)| *v)
        .collect();
    let edges: Vec<Edge<T>> = g
        .edges()
        .iter()
        .enumerate()
        .filter(|(k, _)| {
            let (a, b) = g.endpoint_index(*k);
            dist[a].is_some() && dist[b].is_some()
        })
        .map(|(_, e)| *e)
        .collect();
    let root = edges
        .iter()
        .position(|e| e.id == bond.edge)
        .map(|k| 2 * k + (rg.root & 1));
    let ball = QuantumGraph::new(vertices, edges).expect("induced subgraph of a valid graph");
    RootedBall { graph: ball, center: bond.origin, root }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LocalDistance<T> {
    pub value: T,
    /// The isomorphism search hit its budget; `value` is then an upper bound
    /// only in the sense that smaller grid values were not certified.
    pub approximate: bool,
}

/// Compact adjacency view of a ball for the isomorphism search.
struct BallView<T> {
    leads: Vec<u32>,
    /// `lengths[(i, j)]` with `i <= j`: lengths of edges between the two vertices, sorted.
    multi: BTreeMap<(usize, usize), Vec<T>>,
    neighbors: Vec<Vec<usize>>,
    center: usize,
    /// Other endpoint and length of the root edge.
    root: Option<(usize, T)>,
}

impl<T: Real> BallView<T> {
    fn new(ball: &RootedBall<T>) -> Self {
        let g = &ball.graph;
        let n = g.vertex_count();
        let mut multi: BTreeMap<(usize, usize), Vec<T>> = BTreeMap::new();
        let mut neighbors = vec![Vec::new(); n];
        for k in 0..g.edge_count() {
            let (a, b) = g.endpoint_index(k);
            let key = (a.min(b), a.max(b));
            multi.entry(key).or_default().push(g.edges()[k].length);
            if a != b {
                neighbors[a].push(b);
                neighbors[b].push(a);
            }
        }
        for v in multi.values_mut() {
            v.sort_by(|x, y| x.partial_cmp(y).unwrap());
        }
        for nb in &mut neighbors {
            nb.sort_unstable();
            nb.dedup();
        }
        let center = g.index_of(ball.center).expect("center in ball");
        let root = ball.root.map(|b| {
            let bond = g.bonds()[b];
            (bond.terminus_index, bond.length)
        });
        Self {
            leads: g.vertices().iter().map(|v| v.leads).collect(),
            multi,
            neighbors,
            center,
            root,
        }
    }

    fn between(&self, a: usize, b: usize) -> &[T] {
        self.multi.get(&(a.min(b), a.max(b))).map_or(&[], |v| v.as_slice())
    }
}

fn lengths_match<T: Real>(a: &[T], b: &[T], eps: T) -> bool {
    a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (*x - *y).abs() < eps)
}

/// Multiset match of parallel edges where one edge is pinned to another.
fn pinned_match<T: Real>(a: &[T], b: &[T], pa: T, pb: T, eps: T) -> bool {
    if a.len() != b.len() || (pa - pb).abs() >= eps {
        return false;
    }
    let drop = |v: &[T], x: T| {
        let mut out = v.to_vec();
        if let Some(i) = out.iter().position(|y| *y == x) {
            out.remove(i);
        }
        out
    };
    lengths_match(&drop(a, pa), &drop(b, pb), eps)
}

struct Matcher<'a, T> {
    a: &'a BallView<T>,
    b: &'a BallView<T>,
    eps: T,
    order: Vec<usize>,
    map: Vec<Option<usize>>,
    used: Vec<bool>,
    steps: usize,
    budget: usize,
}

impl<T: Real> Matcher<'_, T> {
    fn edges_ok(&self, v: usize, w: usize) -> bool {
        let (fv, fw) = (self.map[v].unwrap(), self.map[w].unwrap());
        let la = self.a.between(v, w);
        let lb = self.b.between(fv, fw);
        let pinned = match (self.a.root, self.b.root) {
            (Some((ta, l1)), Some((tb, l2))) => {
                let ca = self.a.center;
                let cb = self.b.center;
                let on_root = (v.min(w), v.max(w)) == (ca.min(ta), ca.max(ta));
                let on_root_b = (fv.min(fw), fv.max(fw)) == (cb.min(tb), cb.max(tb));
                if on_root != on_root_b {
                    return false;
                }
                on_root.then_some((l1, l2))
            }
            _ => None,
        };
        match pinned {
            Some((l1, l2)) => pinned_match(la, lb, l1, l2, self.eps),
            None => lengths_match(la, lb, self.eps),
        }
    }

    fn assign(&mut self, v: usize, w: usize) -> bool {
        if self.a.leads[v] != self.b.leads[w] || self.a.neighbors[v].len() != self.b.neighbors[w].len() {
            return false;
        }
        self.map[v] = Some(w);
        self.used[w] = true;
        let ok = (0..self.map.len()).all(|u| self.map[u].is_none() || self.edges_ok(v, u));
        if !ok {
            self.map[v] = None;
            self.used[w] = false;
        }
        ok
    }

    fn unassign(&mut self, v: usize) {
        if let Some(w) = self.map[v].take() {
            self.used[w] = false;
        }
    }

    /// `Some(found)`, or `None` when the budget ran out.
    fn search(&mut self, k: usize) -> Option<bool> {
        if k == self.order.len() {
            return Some(true);
        }
        self.steps += 1;
        if self.steps > self.budget {
            return None;
        }
        let v = self.order[k];
        if self.map[v].is_some() {
            return self.search(k + 1);
        }
        // candidates: unused neighbours of the image of an already mapped neighbour
        let anchor = self.a.neighbors[v].iter().copied().find(|&u| self.map[u].is_some());
        let candidates: Vec<usize> = match anchor {
            Some(u) => self.b.neighbors[self.map[u].unwrap()]
                .iter()
                .copied()
                .filter(|&w| !self.used[w])
                .collect(),
            None => (0..self.b.leads.len()).filter(|&w| !self.used[w]).collect(),
        };
        for w in candidates {
            if self.assign(v, w) {
                match self.search(k + 1) {
                    Some(true) => return Some(true),
                    None => return None,
                    Some(false) => {}
                }
                self.unassign(v);
            }
        }
        Some(false)
    }
}

/// Root-preserving isomorphism of two balls with exact lead counts and
/// lengths within `eps`. `None` when the search budget is exhausted.
fn balls_isomorphic<T: Real>(a: &RootedBall<T>, b: &RootedBall<T>, eps: T, budget: usize) -> Option<bool> {
    let (va, vb) = (BallView::new(a), BallView::new(b));
    if va.leads.len() != vb.leads.len() || a.graph.edge_count() != b.graph.edge_count() {
        return Some(false);
    }
    let mut la = va.leads.clone();
    let mut lb = vb.leads.clone();
    la.sort_unstable();
    lb.sort_unstable();
    if la != lb || va.root.is_some() != vb.root.is_some() {
        return Some(false);
    }
    // breadth-first order from the centre
    let n = va.leads.len();
    let mut order = Vec::with_capacity(n);
    let mut seen = vec![false; n];
    let mut queue = VecDeque::from([va.center]);
    seen[va.center] = true;
    while let Some(v) = queue.pop_front() {
        order.push(v);
        for &w in &va.neighbors[v] {
            if !seen[w] {
                seen[w] = true;
                queue.push_back(w);
            }
        }
    }
    let mut m = Matcher {
        a: &va,
        b: &vb,
        eps,
        order,
        map: vec![None; n],
        used: vec![false; n],
        steps: 0,
        budget,
    };
    if !m.assign(va.center, vb.center) {
        return Some(false);
    }
    if let (Some((ta, _)), Some((tb, _))) = (va.root, vb.root) {
        if ta != va.center && (tb == vb.center || !m.assign(ta, tb)) {
            return Some(false);
        }
        if ta == va.center && tb != vb.center {
            return Some(false);
        }
    }
    m.search(0)
}

/// Smallest `eps` of the decreasing grid such that the balls of radius
/// `floor(1/eps)` are isomorphic; `1` when none is.
pub fn rooted_distance<T: Real>(rg1: &RootedGraph<T>, rg2: &RootedGraph<T>, eps_grid: &[T]) -> Result<LocalDistance<T>> {
    if eps_grid.is_empty() || eps_grid.iter().any(|e| !(*e > T::zero())) || eps_grid.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::Parameter("eps grid must be positive and strictly decreasing".into()));
    }
    let mut best = T::one();
    for &eps in eps_grid {
        let radius = (T::one() / eps).floor().to_usize().unwrap_or(usize::MAX);
        let b1 = rooted_ball(rg1, radius);
        let b2 = rooted_ball(rg2, radius);
        match balls_isomorphic(&b1, &b2, eps, 1_000_000) {
            Some(true) => best = eps,
            Some(false) => break,
            None => return Ok(LocalDistance { value: best, approximate: true }),
        }
    }
    Ok(LocalDistance { value: best, approximate: false })
}

/// `<e_b0, U'(z) (Id - U(z))^{-1} e_b0>`.
pub fn f_entry<T: Real>(graph: &QuantumGraph<T>, b0: usize, z: Complex<T>) -> Result<Complex<T>> {
    Secular::new(graph).f_entry(b0, z)
}

/// Uniform distribution over the bonds of a graph.
#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalMeasure<T> {
    pub graph: QuantumGraph<T>,
}

impl<T: Real> EmpiricalMeasure<T> {
    pub fn new(graph: QuantumGraph<T>) -> Self {
        Self { graph }
    }

    pub fn weight(&self) -> T {
        T::one() / T::from_usize_lossy(self.graph.bond_count())
    }

    /// `E_nu[F_z] = (1/|B|) sum_b F_z(b)`.
    pub fn mean_entry(&self, z: Complex<T>) -> Result<Complex<T>> {
        let entries = Secular::new(&self.graph).f_entries(z)?;
        let s = entries.into_iter().fold(Complex::new(T::zero(), T::zero()), |a, b| a + b);
        Ok(s * self.weight())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpectralMeasureSample<T> {
    pub graph_id: String,
    pub g: GaussianTest<T>,
    /// `<mu_Q, g>`.
    pub value: Complex<T>,
    /// `int g E_nu[F]` along the lower and upper lines.
    pub lower_mean: Complex<T>,
    pub upper_mean: Complex<T>,
    /// `|B| / L_Q`, the inverse mean bond length.
    pub prefactor: T,
    pub lines: LineIntegrals<T>,
}

/// `<mu_Q, g> = (|B| / L_Q) (1 / 2 pi i) (int_{y2} g E_nu[F] - int_{y1} g E_nu[F])`.
pub fn spectral_pairing<T: Real>(
    graph: &QuantumGraph<T>,
    g: &GaussianTest<T>,
    y1: T,
    y2: T,
    tol: T,
) -> Result<SpectralMeasureSample<T>> {
    if !graph.is_unbalanced() || graph.edge_count() == 0 {
        return Err(Error::Rejected("spectral pairing needs an unbalanced graph with edges".into()));
    }
    let lq = graph.total_length();
    let target = tol * lq / T::lit(4.0);
    let mut t = T::one();
    while truncation_bound(graph, g, y1, y2, t)? > target {
        t = t + t;
        if t > T::lit(1e6) {
            return Err(Error::Truncation { bound: f64::INFINITY, tol: target.as_f64() });
        }
    }
    let lines = boundary_integral(graph, g, y1, y2, t, target)?;
    let b = T::from_usize_lossy(graph.bond_count());
    let two_pi_i = imag_unit::<T>() * (T::PI() + T::PI());
    Ok(SpectralMeasureSample {
        graph_id: graph.meta().get("family").cloned().unwrap_or_default(),
        g: *g,
        value: lines.value / (two_pi_i * lq),
        lower_mean: -lines.bottom / b,
        upper_mean: -lines.top / b,
        prefactor: b / lq,
        lines,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceRow<T> {
    pub size: usize,
    pub pairing: Option<Complex<T>>,
    /// `|<mu_N, g> - <mu_prev, g>|` against the previous successful size.
    pub abs_diff_prev: Option<T>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceTable<T> {
    pub rows: Vec<ConvergenceRow<T>>,
    /// Last three differences strictly decrease and the final one is below
    /// the threshold.
    pub converged: bool,
}

impl<T: Real> ConvergenceTable<T> {
    pub fn to_csv(&self) -> String {
        use crate::io::fmt17;
        let mut out = String::from("size,re_pairing,im_pairing,abs_diff_prev\n");
        for r in &self.rows {
            let (re, im) = r.pairing.map_or((String::new(), String::new()), |p| (fmt17(p.re), fmt17(p.im)));
            let d = r.abs_diff_prev.map(fmt17).unwrap_or_default();
            let _ = writeln!(out, "{},{re},{im},{d}", r.size);
        }
        out
    }

    pub fn differences(&self) -> Vec<T> {
        self.rows.iter().filter_map(|r| r.abs_diff_prev).collect()
    }

    pub fn last_pairing(&self) -> Option<Complex<T>> {
        self.rows.iter().rev().find_map(|r| r.pairing)
    }
}

/// Pairings `<mu_N, g>` for each size of a family. Failures at one size are
/// recorded and the experiment moves on.
pub fn convergence_experiment<T: Real>(
    family: &FamilySpec<T>,
    sizes: &[usize],
    g: &GaussianTest<T>,
    y1: T,
    y2: T,
    tol: T,
    threshold: T,
) -> ConvergenceTable<T> {
    let mut rows = Vec::with_capacity(sizes.len());
    let mut prev: Option<Complex<T>> = None;
    for &size in sizes {
        let spec = FamilySpec { size, ..family.clone() };
        let result = generate(&spec).and_then(|graph| spectral_pairing(&graph, g, y1, y2, tol));
        match result {
            Ok(s) => {
                rows.push(ConvergenceRow {
                    size,
                    pairing: Some(s.value),
                    abs_diff_prev: prev.map(|p| (s.value - p).norm()),
                    error: None,
                });
                prev = Some(s.value);
            }
            Err(e) => rows.push(ConvergenceRow { size, pairing: None, abs_diff_prev: None, error: Some(e.to_string()) }),
        }
    }
    let diffs: Vec<T> = rows.iter().filter_map(|r| r.abs_diff_prev).collect();
    let converged = diffs.len() >= 3 && {
        let tail = &diffs[diffs.len() - 3..];
        tail[0] > tail[1] && tail[1] > tail[2] && tail[2] < threshold
    };
    ConvergenceTable { rows, converged }
}

/// `x,y,re,im` samples of `(|B| / L_Q) E_nu[F_{x + i y}]`.
pub fn lambda_samples_csv<T: Real>(graph: &QuantumGraph<T>, points: &[(T, T)]) -> Result<String> {
    use crate::io::fmt17;
    let m = EmpiricalMeasure::new(graph.clone());
    let pre = T::from_usize_lossy(graph.bond_count()) / graph.total_length();
    let mut out = String::from("x,y,re,im\n");
    for &(x, y) in points {
        let v = m.mean_entry(Complex::new(x, y))? * pre;
        let _ = writeln!(out, "{},{},{},{}", fmt17(x), fmt17(y), fmt17(v.re), fmt17(v.im));
    }
    Ok(out)
}

/// Bond index of the first bond leaving vertex `v`.
pub fn bond_from<T: Real>(graph: &QuantumGraph<T>, v: VertexId) -> Option<usize> {
    graph.bonds().iter().find(|b| b.origin == v).map(|b| b.id)
}

#[doc(hidden)]
pub fn degree_histogram<T: Real>(graph: &QuantumGraph<T>) -> HashMap<usize, usize> {
    let mut h = HashMap::new();
    for v in 0..graph.vertex_count() {
        *h.entry(graph.degree(v)).or_insert(0) += 1;
    }
    h
}
