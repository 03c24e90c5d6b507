//! Exact arithmetic over ℤ/pⁿ: finite rings, ideals, quotients and linear algebra.

pub mod abgroup;
pub mod algebra;
pub mod linalg;
pub mod poly;
pub mod ring;
pub mod zmod;

pub use abgroup::{mat_mul, quotient, solve_linear, AbGroup, LinearSolution, Quotient, Subgroup};
pub use algebra::{AlgElt, AlgebraData, AlgebraQuotient, FiniteAlgebra};
pub use linalg::Mat;
pub use poly::{PolyRing, TruncPoly};
pub use ring::{
    extend_scalars, ring_homs, is_local, quotient_ring, validate_ring, ExtensionKind, FiniteRing, Ideal, RingData, RingElt, RingHom,
    RingQuotient,
};
pub use zmod::PrimePow;
