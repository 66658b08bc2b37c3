//! Density invariants, singular weights and empirical sampling/interpolation
//! diagnostics for smooth algebraic hypersurfaces and point sequences in
//! weighted Bargmann-Fock spaces.
//!
//! The library computes, by at least two independent numerical routes each:
//! ball averages of the current of integration of `W = T^{-1}(0)` and the
//! directional density they induce, the singular weight `s_r` (Newton-potential
//! and `log|T|` routes), truncated Fock-space frame bounds and minimum-norm
//! extensions, 1-D Jensen ratios, and the explicit product-sequence criteria
//! in two complex variables.
//!
//! Core numerics are generic over the real scalar through [`Scalar`]; the
//! `*64` aliases at the crate root fix `f64` for ordinary use. Everything is
//! deterministic given a master seed.

pub mod algebra;
pub mod mc;
pub mod weights;
pub mod hypersurface;
pub mod density;
pub mod singularity;
pub mod focknum;
pub mod sequences;
pub mod scene;
pub mod cli;

use num_traits::FromPrimitive;
use std::fmt::Display;
use std::iter::Sum;

/// Real scalar the core numerics are generic over. Blanket-implemented for
/// `f32` and `f64` via `nalgebra::RealField`.
pub trait Scalar:
    nalgebra::RealField + Copy + FromPrimitive + Sum + Send + Sync + Display + 'static
{
}

impl<T> Scalar for T where
    T: nalgebra::RealField + Copy + FromPrimitive + Sum + Send + Sync + Display + 'static
{
}

/// Converts an `f64` constant into the working scalar.
#[inline]
pub fn sfrom<S: Scalar>(x: f64) -> S {
    S::from_f64(x).expect("finite f64 constant")
}

pub type ComplexVector64 = algebra::ComplexVector<f64>;
pub type HermitianForm64 = algebra::HermitianForm<f64>;
pub type MultiPoly64 = algebra::MultiPoly<f64>;
pub type UniPoly64 = algebra::UniPoly<f64>;
pub type Weight64 = weights::Weight<f64>;
pub type Hypersurface64 = hypersurface::Hypersurface<f64>;
pub type FockBasis64 = focknum::FockBasis<f64>;
pub type Sequence1D64 = sequences::Sequence1D<f64>;
pub type ProductSequence64 = sequences::ProductSequence<f64>;
