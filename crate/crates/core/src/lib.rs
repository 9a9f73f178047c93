//! Number-structure scaling on lattices: a scalar exponent field assigns
//! each lattice site its own copy of the complex numbers, related to its
//! neighbors by exponential scale factors. This crate provides the lattice
//! and field types, the scaled arithmetic that makes each copy a field in
//! its own right, parallel transport between copies, scaled Hilbert-space
//! views, and the quantum-mechanical consequences (scaled expectation
//! values, the covariant momentum, and the weighted energy equation).

pub mod error;
pub mod hilbert;
pub mod lattice;
pub mod quantum;
pub mod scaled;
pub mod transport;

pub use error::{Error, Result};
pub use hilbert::{
    compare_states, componentwise_consistency_residual, inner_product, scaled_inner_product,
    scaled_transport_state, transport_state, Basis, CompareMode, LocalState, ScaledHilbertView,
    ScalingConvention,
};
pub use lattice::{
    gradient_at, link_factor, path_product, scale_factor, shift_theta, Boundary, Lattice,
    LinkExponentField, ScaleFactor, SiteId, ThetaField, SITE_CAP, THETA_CAP,
};
pub use quantum::{
    canonical_momentum_apply, energy_equation_check, equation_invariance_check,
    expectation_external, expectation_internal, expectation_unscaled, externally_scaled_state,
    momentum_eigenstate, pack_external, region_l_analysis, scaled_identity_deviation,
    scaled_identity_operator, transfer_internal, CovariantMomentum, EnergyEquationReport,
    ExpectationReport, MomentumForm, Observable, ObservableKind, RegionReport, WavePacket,
    EQUATION_TOL, NORM_TOL, SUPPORT_EPSILON,
};
pub use scaled::{
    check_field_axioms, correspond_to_base, eval_polynomial, lift_polynomial, lift_term,
    same_value_view, scaled_add, scaled_div, scaled_mul, scaled_sub, AxiomReport, AxiomResult,
    LiftedTerm, OpTable, RationalTerm, RepValue, ScaledStructure,
};
pub use transport::{
    combine, factorize, parallel_transport, scaled_transport, BinaryOp, LocalNumber, RetagFactor,
    TransportMap,
};
