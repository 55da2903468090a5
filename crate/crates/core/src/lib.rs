//! Scattering resonances of open quantum graphs with Kirchhoff conditions.
//!
//! Resonances are the zeros of the secular determinant
//! `f(z) = det(Id - S D(z))`, where `S` is the bond scattering matrix and
//! `D(z) = diag(e^{i z L_b})`. The crate locates them by the argument
//! principle, evaluates the Gaussian trace identity relating them to line
//! integrals of `f'/f`, computes the explicit counting constants of the
//! class `(D, n0, Lmin, Lmax)`, and runs local-convergence experiments.
//!
//! All numerical code is generic over [`Real`]; the aliases below fix `f64`.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bounds;
pub mod bs;
pub mod error;
pub mod finder;
pub mod generate;
pub mod graph;
pub mod io;
pub mod linalg;
pub mod quadrature;
pub mod scalar;
pub mod secular;
pub mod trace;

pub use error::{Error, ParseErrorKind, Result};
pub use scalar::Real;

pub type Complex64 = num_complex::Complex<f64>;
pub type Graph = graph::QuantumGraph<f64>;
pub type ClassParams = graph::GraphClassParams<f64>;
pub type Rectangle = finder::Rectangle<f64>;
pub type ResonanceSet = finder::ResonanceSet<f64>;
pub type FinderOptions = finder::FinderOptions<f64>;
pub type SecularEvaluation = secular::SecularEvaluation<f64>;
pub type Certificate = bounds::LowerBoundCertificate<f64>;
