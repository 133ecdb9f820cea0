//! Destructive support bribery: keep the designated candidate from winning.

use crate::cost::{Cost, SupportCostProfile};
use crate::election::{apply_push, winners, Election, PushAction, RuleId};
use crate::solution::{Action, BriberySolution};

use super::{SupportError, ENUMERATION_LIMIT, FPT_RULES};

fn check(election: &Election, costs: &SupportCostProfile, rule: RuleId, solver: &'static str) -> Result<(), SupportError> {
    election.validate()?;
    costs.validate(election.n(), election.m())?;
    if !FPT_RULES.contains(&rule) {
        return Err(SupportError::RuleNotSupported { solver, rule });
    }
    Ok(())
}

fn finish(
    election: &Election,
    costs: &SupportCostProfile,
    rule: RuleId,
    deltas: Option<Vec<i64>>,
) -> Result<BriberySolution, SupportError> {
    match deltas {
        Some(deltas) => {
            let cost = deltas.iter().enumerate().map(|(i, &d)| costs.price(i, d)).sum();
            Ok(BriberySolution::new(election, rule, Action::Push(PushAction { deltas }), cost)?)
        }
        None => Ok(BriberySolution::infeasible(election, rule, true)?),
    }
}

/// Cheapest way to make the designated candidate lose, by full enumeration.
pub fn brute_force_destructive(
    election: &Election,
    costs: &SupportCostProfile,
    rule: RuleId,
) -> Result<BriberySolution, SupportError> {
    check(election, costs, rule, "brute-force-destructive")?;
    let (m, n, d) = (election.m(), election.n(), election.p());
    let opts: Vec<Vec<(i64, Cost)>> = (0..n)
        .map(|i| {
            let ell = election.voters[i].approval_count as i64;
            (0..=m as i64)
                .map(|l| (l - ell, costs.price(i, l - ell)))
                .filter(|(_, c)| c.is_finite())
                .collect()
        })
        .collect();
    let size = opts
        .iter()
        .try_fold(1u128, |a, o| a.checked_mul(o.len() as u128))
        .unwrap_or(u128::MAX);
    if size > ENUMERATION_LIMIT {
        return Err(SupportError::GuardExceeded(size));
    }
    let mut idx = vec![0usize; n];
    let mut best: Option<(Cost, Vec<i64>)> = None;
    loop {
        let deltas: Vec<i64> = idx.iter().enumerate().map(|(i, &o)| opts[i][o].0).collect();
        let cost: Cost = idx.iter().enumerate().map(|(i, &o)| opts[i][o].1).sum();
        if best.as_ref().is_none_or(|(b, _)| cost < *b) {
            let after = apply_push(election, &PushAction { deltas: deltas.clone() })?;
            if !winners(&after, rule)?.contains(d) {
                best = Some((cost, deltas));
            }
        }
        let mut i = n;
        loop {
            if i == 0 {
                return finish(election, costs, rule, best.map(|b| b.1));
            }
            i -= 1;
            if idx[i] + 1 < opts[i].len() {
                idx[i] += 1;
                break;
            }
            idx[i] = 0;
        }
    }
}

/// Table of cheapest briberies indexed by `(i, j, r)`: voters approving the
/// rival within the top `t`, approving d within the top `t`, approving d
/// within the top `t - 1`.
struct Table {
    side: usize,
    cost: Vec<Cost>,
    /// Per voter and state, the chosen delta and the predecessor state.
    back: Vec<Vec<Option<(i64, usize)>>>,
}

impl Table {
    fn index(&self, i: usize, j: usize, r: usize) -> usize {
        (i * self.side + j) * self.side + r
    }
}

fn table(election: &Election, costs: &SupportCostProfile, c: usize, t: usize) -> Table {
    let (m, n, d) = (election.m(), election.n(), election.p());
    let side = n + 1;
    let mut tb = Table {
        side,
        cost: vec![Cost::Infinite; side * side * side],
        back: Vec::with_capacity(n),
    };
    tb.cost[0] = Cost::ZERO;
    for (v, voter) in election.voters.iter().enumerate() {
        let ell = voter.approval_count as i64;
        // Cheapest delta for each of the eight effect patterns.
        let mut cheapest: [Option<(Cost, i64)>; 8] = [None; 8];
        for l in 0..=m {
            let delta = l as i64 - ell;
            let price = costs.price(v, delta);
            if !price.is_finite() {
                continue;
            }
            let rc = voter.rank_of(c);
            let rd = voter.rank_of(d);
            let key = (rc <= t.min(l)) as usize
                | ((rd <= t.min(l)) as usize) << 1
                | ((rd < t && rd <= l) as usize) << 2;
            if cheapest[key].is_none_or(|(p, _)| price < p) {
                cheapest[key] = Some((price, delta));
            }
        }
        let mut next = vec![Cost::Infinite; tb.cost.len()];
        let mut back = vec![None; tb.cost.len()];
        for i in 0..=v {
            for j in 0..=v {
                for r in 0..=j {
                    let from = tb.index(i, j, r);
                    let base = tb.cost[from];
                    if !base.is_finite() {
                        continue;
                    }
                    for (key, opt) in cheapest.iter().enumerate() {
                        let Some((price, delta)) = *opt else { continue };
                        let to = tb.index(i + (key & 1), j + (key >> 1 & 1), r + (key >> 2 & 1));
                        let total = base + price;
                        if total < next[to] {
                            next[to] = total;
                            back[to] = Some((delta, from));
                        }
                    }
                }
            }
        }
        tb.cost = next;
        tb.back.push(back);
    }
    tb
}

fn trace(tb: &Table, mut state: usize) -> Vec<i64> {
    let mut deltas = vec![0i64; tb.back.len()];
    for v in (0..tb.back.len()).rev() {
        let (delta, from) = tb.back[v][state].expect("finite state has a predecessor");
        deltas[v] = delta;
        state = from;
    }
    deltas
}

/// Cheapest way to make the designated candidate lose, by dynamic
/// programming over each rival and each round.
pub fn solve_destructive_support(
    election: &Election,
    costs: &SupportCostProfile,
    rule: RuleId,
) -> Result<BriberySolution, SupportError> {
    check(election, costs, rule, "destructive")?;
    let (m, n, d) = (election.m(), election.n(), election.p());
    let maj = election.majority();
    let mut best: Option<(Cost, Vec<i64>)> = None;
    let mut offer = |tb: &Table, state: usize| {
        let c = tb.cost[state];
        if c.is_finite() && best.as_ref().is_none_or(|(b, _)| c < *b) {
            best = Some((c, trace(tb, state)));
        }
    };
    for c in (0..m).filter(|&c| c != d) {
        for t in 1..=m {
            if t < m && rule == RuleId::SPAV {
                continue;
            }
            let tb = table(election, costs, c, t);
            for i in 0..=n {
                for j in 0..=n {
                    for r in 0..=j {
                        let s = tb.index(i, j, r);
                        let ok = match rule {
                            RuleId::SPAV => i > j,
                            RuleId::FallbackSimplified => {
                                (t == m && i > j && j < maj) || (i >= maj && j < maj)
                            }
                            _ => (t == m && i > j && j < maj) || (i >= maj && i > j && r < maj),
                        };
                        if ok {
                            offer(&tb, s);
                        }
                    }
                }
            }
        }
    }
    finish(election, costs, rule, best.map(|b| b.1))
}
