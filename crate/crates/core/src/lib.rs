//! Lattices, totally real number fields, Hecke neighbors and compact diagonal
//! orbits on the space of unimodular lattices.

pub mod constructions;
pub mod error;
pub mod exact;
pub mod experiments;
pub mod hecke;
pub mod lattice;
pub mod linalg;
pub mod measure;
pub mod numfield;
pub mod orbits;
pub mod scalar;

pub use error::{Error, Result};
pub use exact::{CertifiedRoot, QMat, QPoly, ZMat};
pub use hecke::{HeckeType, NeighborSet};
pub use lattice::{DiagonalVector, LatticePoint, Scale};
pub use linalg::Mat;
pub use measure::EmpiricalMeasure;
pub use numfield::{build_field, FieldElement, FieldOptions, NumberField, UnitLogLattice};
pub use orbits::{BoxedMap, CompactOrbit, EmpiricalCdf, SimplexPolytope};
pub use scalar::Real;

pub type Integer = num_bigint::BigInt;
pub type Rational = num_rational::BigRational;

pub type Lattice = LatticePoint<f64>;
pub type Lattice32 = LatticePoint<f32>;
pub type Diagonal = DiagonalVector<f64>;
pub type RealMat = Mat<f64>;
pub type UnitLattice = UnitLogLattice<f64>;
pub type Orbit = CompactOrbit<f64>;
pub type Patch = BoxedMap<f64>;
