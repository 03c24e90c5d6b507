//! Finite groups, finite A[G]-modules, characters and submodule lattices.

pub mod group;
pub mod module;

pub use group::{FiniteGroup, GroupData};
pub use module::{block_matrix, AModule, Character, GModule, HomSpace, ModuleData, ModuleMap, ModuleQuotient};

use std::sync::Arc;

use crate::error::Result;
use crate::exactalg::{FiniteAlgebra, FiniteRing};

/// A[G] with a·g at additive index g·k + i.
pub fn group_algebra(ring: Arc<FiniteRing>, group: &FiniteGroup) -> Result<FiniteAlgebra> {
    let one = ring.one();
    let mut unit = vec![ring.zero(); group.order()];
    unit[0] = one.clone();
    FiniteAlgebra::free(ring, group.order(), |s, t| vec![(group.mul(s, t), one.clone())], &unit)
}

/// Coordinates of the basis element 1·g of A[G].
pub fn group_element(ring: &FiniteRing, group: &FiniteGroup, g: usize) -> Vec<u64> {
    let k = ring.rank();
    let mut x = vec![0; group.order() * k];
    x[g * k..(g + 1) * k].copy_from_slice(&ring.one());
    x
}
