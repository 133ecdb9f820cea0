//! Support bribery: changing how many top candidates each voter approves.

mod approx;
mod destructive;
mod eval;
mod exact;
mod negative;
mod positive;

use std::sync::Arc;

use thiserror::Error;

use crate::cost::{Cost, CostProfileError, SupportCostProfile};
use crate::election::{apply_push, designated_wins, Election, ElectionError, PushAction, RuleId};
use crate::registry::Registry;
use crate::solution::{Action, BriberySolution, TrialTag};

pub use approx::{approx_spav_single_peaked, ApproxOptions, BaseShadow};
pub use destructive::{brute_force_destructive, solve_destructive_support};
pub use exact::solve_support_exact;
pub use negative::{solve_support_negative_fpt, RoundTargets};
pub use positive::{default_trials, solve_support_positive_fpt, PositiveOptions};

pub(crate) use eval::Evaluator;

/// Upper bound on the number of actions any exhaustive search will visit.
pub const ENUMERATION_LIMIT: u128 = 10_000_000;

/// Largest option product the pruned exhaustive search will attempt.
pub const SEARCH_SPACE_LIMIT: u128 = 1_000_000_000_000;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SupportError {
    #[error(transparent)]
    Election(#[from] ElectionError),
    #[error(transparent)]
    Costs(#[from] CostProfileError),
    #[error("solver `{solver}` does not handle rule {rule}")]
    RuleNotSupported { solver: &'static str, rule: RuleId },
    #[error("exhaustive search space has {0} actions, over the limit")]
    GuardExceeded(u128),
    #[error("pruned search visited more than {0} complete actions")]
    SearchLimit(u128),
    #[error("cost profile mixes increases and decreases; the FPT solvers need one-sided costs")]
    MixedSign,
    #[error("cost profile is not {0}")]
    WrongCostClass(&'static str),
    #[error("election is not single-peaked")]
    NotSinglePeaked,
    #[error("epsilon must be positive")]
    BadEpsilon,
    #[error("approximation needs every nonzero change to cost at least 1")]
    ZeroCostChange,
    #[error("voter {voter}: change {delta} leaves the range 0..=m")]
    DeltaOutOfDomain { voter: usize, delta: i64 },
    #[error("no successful bribery exists")]
    NoSuccessfulBribery,
    #[error("integer program failed: {0}")]
    Solver(String),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SupportInstance {
    pub election: Election,
    pub costs: SupportCostProfile,
    pub rule: RuleId,
    pub budget: Option<Cost>,
}

impl SupportInstance {
    pub fn new(
        election: Election,
        costs: SupportCostProfile,
        rule: RuleId,
        budget: Option<Cost>,
    ) -> Result<Self, SupportError> {
        election.validate()?;
        costs.validate(election.n(), election.m())?;
        let approvals: Vec<usize> = election.voters.iter().map(|v| v.approval_count).collect();
        if approvals != costs.offsets {
            return Err(CostProfileError::VoterCount {
                expected: election.n(),
                got: costs.offsets.len(),
            }
            .into());
        }
        Ok(SupportInstance {
            election,
            costs,
            rule,
            budget,
        })
    }

    pub(crate) fn wins(&self, deltas: &[i64]) -> bool {
        apply_push(&self.election, &PushAction { deltas: deltas.to_vec() })
            .map(|e| designated_wins(&e, self.rule))
            .unwrap_or(false)
    }

    pub(crate) fn cost_of(&self, deltas: &[i64]) -> Cost {
        deltas
            .iter()
            .enumerate()
            .map(|(i, &d)| self.costs.price(i, d))
            .sum()
    }

    pub(crate) fn solution(&self, deltas: Vec<i64>) -> Result<BriberySolution, SupportError> {
        let cost = self.cost_of(&deltas);
        Ok(BriberySolution::new(
            &self.election,
            self.rule,
            Action::Push(PushAction { deltas }),
            cost,
        )?)
    }

    pub(crate) fn infeasible(&self) -> Result<BriberySolution, SupportError> {
        Ok(BriberySolution::infeasible(&self.election, self.rule, true)?)
    }

    pub(crate) fn tagged(
        &self,
        deltas: Vec<i64>,
        tag: Option<TrialTag>,
    ) -> Result<BriberySolution, SupportError> {
        let mut s = self.solution(deltas)?;
        s.trial = tag;
        Ok(s)
    }

    pub(crate) fn require_rule(&self, solver: &'static str, rules: &[RuleId]) -> Result<(), SupportError> {
        if rules.contains(&self.rule) {
            Ok(())
        } else {
            Err(SupportError::RuleNotSupported {
                solver,
                rule: self.rule,
            })
        }
    }
}

pub(crate) const FPT_RULES: [RuleId; 3] = [RuleId::SPAV, RuleId::FallbackClassic, RuleId::FallbackSimplified];

pub fn support_cost(costs: &SupportCostProfile, action: &PushAction) -> Result<Cost, SupportError> {
    let n = costs.offsets.len();
    if action.deltas.len() != n {
        return Err(ElectionError::LengthMismatch {
            expected: n,
            got: action.deltas.len(),
        }
        .into());
    }
    let mut total = Cost::ZERO;
    for (i, &d) in action.deltas.iter().enumerate() {
        let idx = costs.offsets[i] as i64 + d;
        if idx < 0 || idx >= costs.rows[i].len() as i64 {
            return Err(SupportError::DeltaOutOfDomain { voter: i, delta: d });
        }
        total = total + costs.price(i, d);
    }
    Ok(total)
}

/// Exhaustive search for a cheapest successful push action.
pub fn brute_force_support(inst: &SupportInstance) -> Result<BriberySolution, SupportError> {
    let ev = Evaluator::new(inst);
    ev.check_guard()?;
    match ev.cheapest()? {
        Some((_, choice)) => inst.solution(ev.deltas(&choice)),
        None => inst.infeasible(),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ParamStats {
    /// Most voters bribed by a minimal optimal bribery.
    pub alpha: u64,
    /// Largest total change of a minimal optimal bribery.
    pub beta: u64,
    /// Smallest total change of a minimal optimal bribery.
    pub beta_prime: u64,
}

/// Parameters over all minimal optimal briberies, by full enumeration.
pub fn compute_parameters(inst: &SupportInstance) -> Result<ParamStats, SupportError> {
    let ev = Evaluator::new(inst);
    ev.check_guard()?;
    let (opt, _) = ev.cheapest()?.ok_or(SupportError::NoSuccessfulBribery)?;
    let mut stats: Option<ParamStats> = None;
    for choice in ev.all_successful_with_cost(opt)? {
        if !ev.is_minimal(&choice) {
            continue;
        }
        let d = ev.deltas(&choice);
        let bribed = d.iter().filter(|&&x| x != 0).count() as u64;
        let total: u64 = d.iter().map(|x| x.unsigned_abs()).sum();
        stats = Some(match stats {
            None => ParamStats {
                alpha: bribed,
                beta: total,
                beta_prime: total,
            },
            Some(s) => ParamStats {
                alpha: s.alpha.max(bribed),
                beta: s.beta.max(total),
                beta_prime: s.beta_prime.min(total),
            },
        });
    }
    Ok(stats.expect("a cheapest successful action is minimal or dominates a minimal one"))
}

/// True iff `action` succeeds and no distinct action between it and zero does.
pub fn is_minimal_push(inst: &SupportInstance, action: &PushAction) -> Result<bool, SupportError> {
    let n = inst.election.n();
    if action.deltas.len() != n {
        return Err(ElectionError::LengthMismatch {
            expected: n,
            got: action.deltas.len(),
        }
        .into());
    }
    if !inst.wins(&action.deltas) {
        return Ok(false);
    }
    let size = action
        .deltas
        .iter()
        .try_fold(1u128, |a, d| a.checked_mul(d.unsigned_abs() as u128 + 1))
        .unwrap_or(u128::MAX);
    if size > ENUMERATION_LIMIT {
        return Err(SupportError::GuardExceeded(size));
    }
    let mut minimal = true;
    toward_zero_box(&action.deltas, |s| {
        if minimal && s != action.deltas.as_slice() && inst.wins(s) {
            minimal = false;
        }
    });
    Ok(minimal)
}

/// Smallest-total successful action between `action` and zero.
pub fn minimalize_push(inst: &SupportInstance, action: &PushAction) -> Result<PushAction, SupportError> {
    if !is_minimal_push(inst, action)? {
        let mut best: Option<(u64, Vec<i64>)> = None;
        toward_zero_box(&action.deltas, |s| {
            let total: u64 = s.iter().map(|x| x.unsigned_abs()).sum();
            if best.as_ref().is_some_and(|(b, _)| *b <= total) {
                return;
            }
            if inst.wins(s) {
                best = Some((total, s.to_vec()));
            }
        });
        if let Some((_, deltas)) = best {
            return Ok(PushAction { deltas });
        }
    }
    Ok(action.clone())
}

fn toward_zero_box(t: &[i64], mut visit: impl FnMut(&[i64])) {
    let n = t.len();
    let mut s = vec![0i64; n];
    loop {
        visit(&s);
        let mut i = n;
        loop {
            if i == 0 {
                return;
            }
            i -= 1;
            if s[i] != t[i] {
                s[i] += t[i].signum();
                break;
            }
            s[i] = 0;
        }
    }
}

/// Sign class of a support cost profile.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CostSign {
    Positive,
    Negative,
}

pub fn cost_sign(costs: &SupportCostProfile) -> Result<CostSign, SupportError> {
    if costs.is_negative() {
        Ok(CostSign::Negative)
    } else if costs.is_positive() {
        Ok(CostSign::Positive)
    } else {
        Err(SupportError::MixedSign)
    }
}

/// Runs the one-sided FPT solver for every total change up to
/// `max_beta_prime` and keeps the cheapest result.
pub fn solve_support_fpt(
    inst: &SupportInstance,
    max_beta_prime: u64,
    opts: &PositiveOptions,
) -> Result<BriberySolution, SupportError> {
    inst.require_rule("fpt", &FPT_RULES)?;
    let sign = cost_sign(&inst.costs)?;
    let mut best: Option<BriberySolution> = None;
    for b in 0..=max_beta_prime {
        let s = match sign {
            CostSign::Negative => solve_support_negative_fpt(inst, b)?,
            CostSign::Positive => solve_support_positive_fpt(inst, b, opts)?,
        };
        if s.is_finite() && best.as_ref().is_none_or(|x| s.cost < x.cost) {
            let zero = s.cost == Cost::ZERO;
            best = Some(s);
            if zero {
                break;
            }
        }
    }
    match best {
        Some(s) => Ok(s),
        None => inst.infeasible(),
    }
}

pub trait SupportSolver: Send + Sync {
    fn name(&self) -> &'static str;
    fn solve(&self, inst: &SupportInstance, cfg: &SolveConfig) -> Result<BriberySolution, SupportError>;
}

/// Knobs shared by the registered support solvers.
#[derive(Clone, Debug)]
pub struct SolveConfig {
    pub beta_prime: u64,
    pub positive: PositiveOptions,
    pub approx: ApproxOptions,
}

impl Default for SolveConfig {
    fn default() -> Self {
        SolveConfig {
            beta_prime: 4,
            positive: PositiveOptions::default(),
            approx: ApproxOptions::default(),
        }
    }
}

type SupportFn = fn(&SupportInstance, &SolveConfig) -> Result<BriberySolution, SupportError>;

struct FnSupportSolver {
    name: &'static str,
    run: SupportFn,
}

impl SupportSolver for FnSupportSolver {
    fn name(&self) -> &'static str {
        self.name
    }

    fn solve(&self, inst: &SupportInstance, cfg: &SolveConfig) -> Result<BriberySolution, SupportError> {
        (self.run)(inst, cfg)
    }
}

/// All constructive support solvers, keyed by name.
pub fn support_registry() -> Registry<dyn SupportSolver> {
    let mut reg: Registry<dyn SupportSolver> = Registry::new();
    let entries: [(&'static str, SupportFn); 6] = [
        ("brute-force", |i, _| brute_force_support(i)),
        ("exact-ilp", |i, _| solve_support_exact(i, None)),
        ("fpt", |i, c| solve_support_fpt(i, c.beta_prime, &c.positive)),
        ("fpt-negative", |i, c| solve_support_negative_fpt(i, c.beta_prime)),
        ("fpt-positive", |i, c| solve_support_positive_fpt(i, c.beta_prime, &c.positive)),
        ("approx", |i, c| approx_spav_single_peaked(i, &c.approx)),
    ];
    for (name, run) in entries {
        reg.register(name, Arc::new(FnSupportSolver { name, run }));
    }
    reg
}
