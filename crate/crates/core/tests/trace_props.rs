mod common;

use std::f64::consts::{FRAC_PI_2, PI};

use common::*;
use proptest::prelude::*;
use qgres::bounds::strip_depth;
use qgres::finder::{FinderOptions, Rectangle};
use qgres::graph::GraphClassParams;
use qgres::trace::{
    boundary_integral, boundary_integral_sum, resonance_sum, trace_check, truncation_bound, weyl_fit, GaussianTest,
};

fn depth(g: &G) -> f64 {
    strip_depth(&GraphClassParams::tightest(g).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn line_integrals_are_additive(
        g in arb_graph(true), a in 0.5..3.0f64, b in 0.5..3.0f64, x1 in -2.0..2.0f64, x2 in -2.0..2.0f64
    ) {
        let y = depth(&g);
        let (y1, y2) = (y - 0.4, 0.4);
        let g1 = GaussianTest::new(a, x1, y / 2.0).unwrap();
        let g2 = GaussianTest::new(b, x2, y / 3.0).unwrap();
        let tol = 1e-8;
        let mut t = 1.0;
        while truncation_bound(&g, &g1, y1, y2, t).unwrap() + truncation_bound(&g, &g2, y1, y2, t).unwrap() > tol / 4.0 {
            t *= 1.5;
        }
        let one = boundary_integral(&g, &g1, y1, y2, t, tol).unwrap();
        let two = boundary_integral(&g, &g2, y1, y2, t, tol).unwrap();
        let both = boundary_integral_sum(&g, &g1, &g2, y1, y2, t, tol).unwrap();
        let diff = (both.value - one.value - two.value).norm();
        prop_assert!(diff <= 1e-7 * both.value.norm().max(1.0), "{diff}");
    }
}

#[test]
fn interval_resonance_sum_matches_analytic_zeros() {
    let g = interval();
    let gt = GaussianTest::new(0.7, 0.0, -0.3).unwrap();
    // k = 0..5 on both sides
    let rect = Rectangle::new(-6.0 * PI, 6.0 * PI, -1.2, 0.1).unwrap();
    let s = resonance_sum(&g, &gt, &rect, &FinderOptions::default()).unwrap();
    let d = 3f64.ln() / 2.0;
    let direct: C = (-6..6)
        .map(|k: i32| gt.eval(C::new((2 * k + 1) as f64 * FRAC_PI_2, -d)))
        .sum::<C>()
        * C::new(0.0, 2.0 * PI);
    assert_eq!(s.count, 12);
    assert!((s.value - direct).norm() < 1e-12);
}

#[test]
fn doubling_the_window_stays_within_tail_bound() {
    let g = cycle(3);
    let gt = GaussianTest::new(0.5, 1.0, depth(&g) / 2.0).unwrap();
    let y = depth(&g);
    let opts = FinderOptions::default();
    let narrow = resonance_sum(&g, &gt, &Rectangle::new(-3.0, 5.0, y - 0.1, 0.1).unwrap(), &opts).unwrap();
    let wide = resonance_sum(&g, &gt, &Rectangle::new(-7.0, 9.0, y - 0.1, 0.1).unwrap(), &opts).unwrap();
    assert!(wide.tail_bound < narrow.tail_bound);
    assert!((wide.value - narrow.value).norm() <= narrow.tail_bound);
}

#[test]
fn cycle_trace_check() {
    let g = cycle(3);
    let y = depth(&g);
    let gt = GaussianTest::new(0.5, 3.0, y / 2.0).unwrap();
    let r = trace_check(&g, &gt, y - 0.5, 0.5, 1e-6, &FinderOptions::default()).unwrap();
    assert!(r.pass, "{r:?}");
}

#[test]
fn weyl_neumann_interval_and_scaling() {
    let rs: Vec<f64> = (10..=100).map(|r| r as f64).collect();
    let neumann = weyl_fit(&neumann_interval(), &rs, &Default::default()).unwrap();
    assert!((neumann.slope / (2.0 / PI) - 1.0).abs() < 0.02);
    let base = weyl_fit(&interval(), &rs, &Default::default()).unwrap();
    let scaled = weyl_fit(&interval().scaled(2.0).unwrap(), &rs, &Default::default()).unwrap();
    assert!((scaled.slope / base.slope - 2.0).abs() < 0.04);
}
