mod common;

use common::*;
use nalgebra::DMatrix;
use proptest::prelude::*;
use qgres::bounds::strip_depth;
use qgres::graph::{GraphClassParams, QuantumGraph, Vertex};
use qgres::linalg::{CMatrix, Lu};
use qgres::secular::{log_derivative_series_bound, Secular};

type NC = nalgebra::Complex<f64>;

fn to_nalgebra(m: &CMatrix<f64>) -> DMatrix<NC> {
    let n = m.dim();
    DMatrix::from_fn(n, n, |r, c| {
        let v = m[(r, c)];
        NC::new(v.re, v.im)
    })
}

fn closed(g: &G) -> G {
    let vs = g.vertices().iter().map(|v| Vertex { id: v.id, leads: 0 }).collect();
    QuantumGraph::new(vs, g.edges().to_vec()).unwrap()
}

fn depth(g: &G) -> f64 {
    strip_depth(&GraphClassParams::tightest(g).unwrap())
}

/// A point outside the resonance strip: above the real axis or below depth Y.
fn off_strip(g: &G, x: f64, t: f64, above: bool) -> C {
    if above {
        C::new(x, 0.2 + 1.5 * t)
    } else {
        C::new(x, depth(g) - 0.2 - 1.5 * t)
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn determinant_matches_independent_lu(g in arb_graph(false), x in -20.0..20.0f64, y in -2.0..2.0f64) {
        let sec = Secular::new(&g);
        let z = C::new(x, y);
        let u = to_nalgebra(&sec.u_matrix(z));
        let n = sec.dim();
        let det = (DMatrix::<NC>::identity(n, n) - u).determinant();
        let ev = sec.evaluate(z);
        let ours = ev.phase * ev.log_abs_f.exp();
        let oracle = C::new(det.re, det.im);
        prop_assert!((ours - oracle).norm() <= 1e-10 * oracle.norm().max(1.0), "{ours} vs {oracle}");
    }

    #[test]
    fn reflection_symmetry(g in arb_graph(false), x in -20.0..20.0f64, y in -2.0..2.0f64) {
        let sec = Secular::new(&g);
        let a = sec.evaluate(C::new(x, y));
        let b = sec.evaluate(C::new(-x, y));
        prop_assume!(!a.singular);
        prop_assert!((a.log_abs_f - b.log_abs_f).abs() <= 1e-12 * a.log_abs_f.abs().max(1.0));
        prop_assert!((a.phase.conj() - b.phase).norm() <= 1e-10 * a.log_abs_f.exp().recip().max(1.0));
        prop_assert!(rel(a.fprime_over_f.conj(), -b.fprime_over_f) <= 1e-10);
    }

    #[test]
    fn closed_graphs_are_unitary(g in arb_graph(false), x in -30.0..30.0f64) {
        let g = closed(&g);
        let sec = Secular::new(&g);
        let u = sec.u_matrix(C::new(x, 0.0));
        let n = u.dim();
        let err = u.adjoint().mul(&u).sub(&CMatrix::identity(n)).max_abs();
        prop_assert!(err <= 1e-12, "{err}");
    }

    #[test]
    fn log_derivative_matches_finite_differences(
        g in arb_graph(true), x in -10.0..10.0f64, t in 0.0..1.0f64, above in any::<bool>()
    ) {
        let sec = Secular::new(&g);
        let z = off_strip(&g, x, t, above);
        let h = 1e-5;
        let log_ratio = |a: C, b: C| {
            let (ea, eb) = (sec.evaluate(a), sec.evaluate(b));
            C::new(ea.log_abs_f - eb.log_abs_f, (ea.phase / eb.phase).arg())
        };
        let exact = sec.evaluate(z).fprime_over_f;
        let along_x = log_ratio(z + h, z - h) / (2.0 * h);
        let along_y = log_ratio(z + C::new(0.0, h), z - C::new(0.0, h)) / C::new(0.0, 2.0 * h);
        let scale = exact.norm().max(1.0);
        prop_assert!((exact - along_x).norm() <= 1e-6 * scale, "{exact} vs {along_x}");
        prop_assert!((exact - along_y).norm() <= 1e-6 * scale, "{exact} vs {along_y}");
    }

    #[test]
    fn inverse_norm_bound(g in arb_graph(true), x in -10.0..10.0f64, y in -4.0..-0.01f64) {
        let p = GraphClassParams::tightest(&g).unwrap();
        let sec = Secular::new(&g);
        let u = sec.u_matrix(C::new(x, y));
        let lu = Lu::factor(&u);
        let n = u.dim();
        let mut inv = CMatrix::zeros(n);
        for c in 0..n {
            for (r, v) in lu.inverse_column(c).into_iter().enumerate() {
                inv[(r, c)] = v;
            }
        }
        let norm = to_nalgebra(&inv).singular_values().max();
        let bound = (p.max_degree + p.max_leads as usize) as f64 * (y * p.l_min).exp();
        prop_assert!(norm <= bound * (1.0 + 1e-10), "{norm} > {bound}");
    }

    #[test]
    fn series_agree_with_direct_solve(g in arb_graph(true), x in -10.0..10.0f64, t in 0.0..1.0f64) {
        let sec = Secular::new(&g);
        let top = C::new(x, 0.5 + 0.01 + 2.0 * t);
        prop_assert!(rel(sec.evaluate(top).fprime_over_f, sec.log_derivative_neumann(top).unwrap()) <= 1e-9);
        let bottom = C::new(x, depth(&g) - 0.5 - 2.0 * t);
        let direct = sec.evaluate(bottom).fprime_over_f;
        prop_assert!(rel(direct, sec.log_derivative_inverse_series(bottom).unwrap()) <= 1e-9);
    }

    #[test]
    fn series_bound_dominates(g in arb_graph(true), x in -10.0..10.0f64, t in 0.0..1.0f64, above in any::<bool>()) {
        let p = GraphClassParams::tightest(&g).unwrap();
        let sec = Secular::new(&g);
        let z = off_strip(&g, x, t, above);
        let v = sec.evaluate(z).fprime_over_f;
        let shifted = if above { v } else { v - C::new(0.0, 2.0 * g.total_length()) };
        let bound = log_derivative_series_bound(&g, z, &p).unwrap();
        prop_assert!(shifted.norm() <= bound * (1.0 + 1e-9), "{} > {bound}", shifted.norm());
    }

    #[test]
    fn entries_sum_to_log_derivative(g in arb_graph(true), x in -10.0..10.0f64, y in -3.0..2.0f64) {
        let sec = Secular::new(&g);
        let z = C::new(x, y);
        let ev = sec.evaluate(z);
        prop_assume!(!ev.singular && ev.condition_hint < 1e8);
        let sum: C = sec.f_entries(z).unwrap().into_iter().sum();
        prop_assert!((sum + ev.fprime_over_f).norm() <= 1e-10 * ev.fprime_over_f.norm().max(1.0));
    }
}

#[test]
fn top_of_plane_is_close_to_one() {
    for (_, g) in test_graphs() {
        let sec = Secular::new(&g);
        let lmin = g.min_length().unwrap();
        for x in [-3.0, 0.0, 7.5] {
            let ev = sec.evaluate(C::new(x, 10.0));
            let f = ev.phase * ev.log_abs_f.exp();
            let b = g.bond_count() as f64;
            assert!((f - 1.0).norm() <= b * (-10.0 * lmin).exp() * 1.01);
        }
    }
}

#[test]
fn interval_bound_below_strip() {
    let g = interval();
    let p = GraphClassParams::tightest(&g).unwrap();
    let y = strip_depth(&p) - 1.0;
    let z = C::new(0.3, y);
    let bound = log_derivative_series_bound(&g, z, &p).unwrap();
    let q = (y - strip_depth(&p)).exp();
    assert!((bound - 2.0 * q / (1.0 - q)).abs() < 1e-15);
    let v = Secular::new(&g).evaluate(z).fprime_over_f - C::new(0.0, 2.0);
    assert!(v.norm() < bound);
}
