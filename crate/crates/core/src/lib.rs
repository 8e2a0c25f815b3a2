//! Symmetry-resolved exact diagonalization and Bethe-ansatz tools for the
//! spin-1/2 Heisenberg ferromagnet on rings and open chains.
//!
//! Energies are carried in the `2H` convention throughout, where the
//! nearest-neighbour term is `2h = 1 - SWAP` and the ferromagnetic ground
//! state sits at zero. Tables in the `H` convention are produced only at the
//! reporting boundary ([`spectra::EnergyTable`]).
//!
//! The numerical core is generic over the real scalar (`f32`/`f64`, see
//! [`scalar::Real`]); exact work on Temperley–Lieb diagram spaces uses
//! [`Rational`]. Concrete `f64` aliases are provided below.

pub mod basis;
pub mod bethe;
pub mod eigensolve;
pub mod error;
pub mod linalg;
pub mod operators;
pub mod scalar;
pub mod spectra;
pub mod tldiagrams;

pub use basis::{Geometry, Sector, SectorBasis, SpinConfiguration, TranslationOrbit};
pub use error::{Error, Result};
pub use scalar::{Real, Scalar};

/// Exact rational scalar used by the diagram algebra.
pub type Rational = num_rational::BigRational;

pub type SparseOperator64 = operators::SparseOperator<f64>;
pub type SpectrumReport64 = eigensolve::SpectrumReport<f64>;
pub type LabeledLevel64 = eigensolve::LabeledLevel<f64>;
pub type EnergyTable64 = spectra::EnergyTable<f64>;
pub type BetheState64 = bethe::BetheState<f64>;
pub type CurvePoint64 = bethe::CurvePoint<f64>;
pub type EllipticPair64 = bethe::EllipticPair<f64>;
pub type RationalMatrix = linalg::ExactMatrix<Rational>;
