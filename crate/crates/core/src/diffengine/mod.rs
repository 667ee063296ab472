//! Exact differentiation: second-order input jets pushed forward through a
//! model, and exact parameter gradients of losses built from those jets.

pub mod dual;
pub mod gradient;
pub mod jet;
pub mod params;

pub use dual::{Dual, DualJet, JetAdjoint, MAX_SEEDS};
pub use gradient::{
    evaluate_objective, finite_difference_check, loss_gradient, JetModel, JetObjective, LossValue,
};
pub use jet::{hess_index, hess_pair, Dim, Jet2};
pub use params::{ParamKind, ParamSlot, ParameterBlock};
