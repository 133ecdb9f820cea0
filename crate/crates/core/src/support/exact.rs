//! Exact support bribery as a family of integer programs.
//!
//! Voters with the same ballot and price row are merged into one type; an
//! integer variable counts how many voters of a type move to each approval
//! count. One program is solved per guessed winning round.

use std::collections::BTreeMap;

use good_lp::{microlp, variable, Expression, ProblemVariables, ResolutionError, Solution, SolverModel, Variable};

use crate::cost::Cost;
use crate::election::RuleId;

use super::{SupportError, SupportInstance, FPT_RULES};

struct Type {
    voters: Vec<usize>,
    /// `(new approval count, price)` for every allowed option.
    options: Vec<(usize, u64)>,
    rank: Vec<usize>,
}

fn types(inst: &SupportInstance, cap: Option<u64>) -> Vec<Type> {
    let e = &inst.election;
    let mut groups: BTreeMap<(Vec<usize>, usize, Vec<Cost>), Vec<usize>> = BTreeMap::new();
    for (i, v) in e.voters.iter().enumerate() {
        let key = (v.preference.clone(), v.approval_count, inst.costs.rows[i].clone());
        groups.entry(key).or_default().push(i);
    }
    groups
        .into_values()
        .map(|voters| {
            let first = voters[0];
            let v = &e.voters[first];
            let options = (0..=e.m())
                .filter_map(|l| inst.costs.price_to(first, l).finite().map(|c| (l, c)))
                .filter(|&(_, c)| cap.is_none_or(|cap| c <= cap))
                .collect();
            let rank = (0..e.m()).map(|c| v.rank_of(c)).collect();
            Type { voters, options, rank }
        })
        .collect()
}

/// Cheapest successful bribery, solved exactly. With `cost_cap`, only
/// briberies costing at most the cap are considered.
pub fn solve_support_exact(inst: &SupportInstance, cost_cap: Option<u64>) -> Result<crate::BriberySolution, SupportError> {
    inst.require_rule("exact-ilp", &FPT_RULES)?;
    let e = &inst.election;
    let (m, n, p) = (e.m(), e.n(), e.p());
    let half = (n / 2) as f64;
    let maj = e.majority() as f64;
    let ts = types(inst, cost_cap);
    if ts.iter().any(|t| t.options.is_empty()) {
        return inst.infeasible();
    }
    let rounds: Vec<usize> = if inst.rule == RuleId::SPAV { vec![m + 1] } else { (1..=m + 1).collect() };
    let mut best: Option<(Cost, Vec<i64>)> = None;
    for round in rounds {
        let mut vars = ProblemVariables::new();
        let x: Vec<Vec<Variable>> = ts
            .iter()
            .map(|t| {
                t.options
                    .iter()
                    .map(|_| vars.add(variable().integer().min(0).max(t.voters.len() as f64)))
                    .collect()
            })
            .collect();
        let mut objective = Expression::with_capacity(0);
        for (t, xs) in ts.iter().zip(&x) {
            for (&(_, c), &v) in t.options.iter().zip(xs) {
                objective.add_mul(c as f64, v);
            }
        }
        // Points of candidate c within the top r positions.
        let score = |c: usize, r: usize| -> Expression {
            let mut s = Expression::with_capacity(0);
            for (t, xs) in ts.iter().zip(&x) {
                for (&(l, _), &v) in t.options.iter().zip(xs) {
                    if t.rank[c] <= r.min(l) {
                        s.add_mul(1.0, v);
                    }
                }
            }
            s
        };
        let mut model = vars.minimise(objective.clone()).using(microlp);
        for (t, xs) in ts.iter().zip(&x) {
            let mut total = Expression::with_capacity(xs.len());
            for &v in xs {
                total.add_mul(1.0, v);
            }
            model = model.with(total.eq(t.voters.len() as f64));
        }
        if let Some(cap) = cost_cap {
            model = model.with(objective.clone().leq(cap as f64));
        }
        let extra = round > m;
        if inst.rule == RuleId::SPAV || extra {
            for c in (0..m).filter(|&c| c != p) {
                model = model.with(score(c, m).leq(score(p, m)));
            }
            if inst.rule != RuleId::SPAV {
                for c in 0..m {
                    model = model.with(score(c, m).leq(half));
                }
            }
        } else {
            model = model.with(score(p, round).geq(maj));
            if round > 1 {
                for c in 0..m {
                    model = model.with(score(c, round - 1).leq(half));
                }
            }
            if inst.rule == RuleId::FallbackClassic {
                for c in (0..m).filter(|&c| c != p) {
                    model = model.with(score(c, round).leq(score(p, round)));
                }
            }
        }
        let sol = match model.solve() {
            Ok(s) => s,
            Err(ResolutionError::Infeasible) => continue,
            Err(err) => return Err(SupportError::Solver(err.to_string())),
        };
        let mut deltas = vec![0i64; n];
        for (t, xs) in ts.iter().zip(&x) {
            let mut members = t.voters.iter();
            for (&(l, _), &v) in t.options.iter().zip(xs) {
                let k = sol.value(v).round() as usize;
                for &i in members.by_ref().take(k) {
                    deltas[i] = l as i64 - e.voters[i].approval_count as i64;
                }
            }
        }
        let cost = inst.cost_of(&deltas);
        if inst.wins(&deltas) && best.as_ref().is_none_or(|(b, _)| cost < *b) {
            best = Some((cost, deltas));
        }
    }
    match best {
        Some((_, d)) => inst.solution(d),
        None => inst.infeasible(),
    }
}
