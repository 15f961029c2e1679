//! Clifford algebra, spin connections, and twistor spinor transport.

pub mod clifford;
pub mod connection;
pub mod frame;
pub mod eh_spinors;
pub mod twistor;

pub use clifford::{spinor_dim, CliffordRep, CMat, CVec};
pub use connection::{
    coordinate_circle, extend_to_puncture, schouten_endomorphism, spinor_holonomy,
    state_holonomy, transport_spinor, transport_state, ExtensionReport, TransportResult,
    TwistorConnection,
};
pub use eh_spinors::{CompactifiedEh, EhParallelSpinors};
pub use frame::{FrameData, FrameField};
pub use twistor::{
    conformally_transported_field, dirac_at, dirac_derivative_residual, flat_twistor_field,
    twistor_residual, twistor_zero_locus, zero_growth_exponent, FieldZero, SpinorField,
    SpinorValue, TwistorState,
};
