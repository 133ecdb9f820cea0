//! Verified solver outputs.

use crate::cost::Cost;
use crate::election::{
    apply_push, apply_shift, winners, Election, ElectionError, PushAction, RuleId, ShiftAction,
    WinnerReport,
};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Action {
    Shift(ShiftAction),
    Push(PushAction),
}

impl Action {
    pub fn as_shift(&self) -> Option<&ShiftAction> {
        match self {
            Action::Shift(s) => Some(s),
            Action::Push(_) => None,
        }
    }

    pub fn as_push(&self) -> Option<&PushAction> {
        match self {
            Action::Push(p) => Some(p),
            Action::Shift(_) => None,
        }
    }

    pub fn apply(&self, e: &Election) -> Result<Election, ElectionError> {
        match self {
            Action::Shift(s) => apply_shift(e, s),
            Action::Push(p) => apply_push(e, p),
        }
    }

    /// Entries rendered as plain integers.
    pub fn entries(&self) -> Vec<i64> {
        match self {
            Action::Shift(s) => s.shifts.iter().map(|&x| x as i64).collect(),
            Action::Push(p) => p.deltas.clone(),
        }
    }
}

/// Seed and trial index that produced a randomized result.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct TrialTag {
    pub seed: u64,
    pub trial: u64,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BriberySolution {
    pub action: Action,
    pub cost: Cost,
    /// Winners of the election after applying `action`.
    pub certificate: WinnerReport,
    pub trial: Option<TrialTag>,
}

impl BriberySolution {
    pub fn new(e: &Election, rule: RuleId, action: Action, cost: Cost) -> Result<Self, ElectionError> {
        let after = action.apply(e)?;
        let certificate = winners(&after, rule)?;
        Ok(BriberySolution {
            action,
            cost,
            certificate,
            trial: None,
        })
    }

    /// The "no finite bribery" answer, certified by the unchanged election.
    pub fn infeasible(e: &Election, rule: RuleId, push: bool) -> Result<Self, ElectionError> {
        let action = if push {
            Action::Push(PushAction::zero(e.n()))
        } else {
            Action::Shift(ShiftAction::zero(e.n()))
        };
        let certificate = winners(e, rule)?;
        Ok(BriberySolution {
            action,
            cost: Cost::Infinite,
            certificate,
            trial: None,
        })
    }

    pub fn is_finite(&self) -> bool {
        self.cost.is_finite()
    }
}
