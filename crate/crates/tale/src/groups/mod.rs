//! Finite rotation groups, their quaternion presentations, and lifts through
//! the spin double cover.

pub mod lift;
pub mod quaternion;
pub mod rotation;

pub use lift::{enumerate_spin_lifts, weyl_fixed_subspaces, CircleStructure, SpinElement, SpinLift};
pub use quaternion::{pair_rotation_matrix, so4_to_pair, so4_to_pair_dyn, UnitQuaternion};
pub use rotation::{BinaryPolyhedral, FiniteRotationGroup};
