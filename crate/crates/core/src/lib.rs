//! Shift and support bribery for approval-based Bucklin and Fallback
//! elections.

pub mod cli;
pub mod cost;
pub mod election;
pub mod flow;
pub mod instances;
pub mod registry;
pub mod shift;
pub mod solution;
pub mod support;

pub use cost::{Cost, ShiftCostProfile, SupportCostProfile};
pub use election::{
    apply_push, apply_shift, is_single_peaked, winners, Axis, Election, PushAction, RuleId,
    ShiftAction, Voter, WinnerReport,
};
pub use solution::{Action, BriberySolution};
