//! Bounded search for support bribery when approval counts may only drop.

use std::collections::BTreeMap;

use crate::cost::Cost;
use crate::election::{truncated_scores, RuleId};
use crate::flow::min_weight_bipartite_matching;
use crate::solution::BriberySolution;

use super::{SupportError, SupportInstance, FPT_RULES};

/// Loss requirements for one guessed winning round.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RoundTargets {
    /// Winning round; `m + 1` stands for the approval default.
    pub round: usize,
    /// Candidates that must lose points (p excluded).
    pub relevant: Vec<usize>,
    /// Points each relevant candidate must lose up to the previous round.
    pub delta_prev: Vec<u64>,
    /// Points each relevant candidate must lose up to the winning round.
    pub delta_round: Vec<u64>,
    /// Most points p may lose up to the winning round.
    pub delta_p: u64,
    /// Fewest points p must lose (only nonzero in the approval default).
    pub p_must_lose: u64,
}

/// Effect of one decrement on a candidate: 0 none, 1 only in the winning
/// round, 2 already in the previous round.
type Effects = Vec<u8>;

struct Class {
    t: u64,
    effects: Effects,
    p_loss: bool,
    /// `(voter, price)` pairs realising this effect with decrement `t`.
    members: Vec<(usize, Cost)>,
}

fn targets_for(inst: &SupportInstance, round: usize, x: u64) -> Option<RoundTargets> {
    let e = &inst.election;
    let (m, n, p) = (e.m(), e.n(), e.p());
    let half = (n / 2) as i64;
    let maj = e.majority() as i64;
    let extra = round == m + 1;
    let mut t = RoundTargets {
        round,
        relevant: Vec::new(),
        delta_prev: Vec::new(),
        delta_round: Vec::new(),
        delta_p: x,
        p_must_lose: 0,
    };
    let push = |t: &mut RoundTargets, c: usize, a: i64, b: i64| {
        let (a, b) = (a.max(0) as u64, b.max(a).max(0) as u64);
        if b > 0 {
            t.relevant.push(c);
            t.delta_prev.push(a);
            t.delta_round.push(b);
        }
    };
    let s = truncated_scores(e, m);
    if inst.rule == RuleId::SPAV {
        let fin = s[p] as i64 - x as i64;
        for c in (0..m).filter(|&c| c != p) {
            push(&mut t, c, 0, s[c] as i64 - fin);
        }
        return Some(t);
    }
    if extra {
        let lo = s[p] as i64 - half;
        if lo > x as i64 {
            return None;
        }
        t.p_must_lose = lo.max(0) as u64;
        let cap = half.min(s[p] as i64 - x as i64);
        for c in (0..m).filter(|&c| c != p) {
            push(&mut t, c, 0, s[c] as i64 - cap);
        }
        return Some(t);
    }
    let sr = truncated_scores(e, round);
    let sprev = truncated_scores(e, round - 1);
    let fin = sr[p] as i64 - x as i64;
    if fin < maj {
        return None;
    }
    for c in (0..m).filter(|&c| c != p) {
        let a = sprev[c] as i64 - half;
        let b = if inst.rule == RuleId::FallbackClassic { sr[c] as i64 - fin } else { a };
        push(&mut t, c, a, b);
    }
    Some(t)
}

fn classes_for(inst: &SupportInstance, tg: &RoundTargets, beta_prime: u64) -> Vec<Class> {
    let e = &inst.election;
    let (m, p) = (e.m(), e.p());
    let extra = tg.round > m || inst.rule == RuleId::SPAV;
    let mut map: BTreeMap<(u64, Effects, bool), Vec<(usize, Cost)>> = BTreeMap::new();
    for (v, voter) in e.voters.iter().enumerate() {
        let ell = voter.approval_count;
        for t in 1..=(ell as u64).min(beta_prime) {
            let price = inst.costs.price(v, -(t as i64));
            if !price.is_finite() {
                continue;
            }
            let lo = ell - t as usize;
            let effect = |c: usize| -> u8 {
                let q = voter.rank_of(c);
                if q <= lo || q > ell {
                    0
                } else if extra || q < tg.round {
                    2
                } else if q == tg.round {
                    1
                } else {
                    0
                }
            };
            let effects: Effects = tg.relevant.iter().map(|&c| effect(c)).collect();
            let p_loss = effect(p) > 0;
            let helps = effects.iter().any(|&x| x > 0) || (p_loss && tg.p_must_lose > 0);
            if helps {
                map.entry((t, effects, p_loss)).or_default().push((v, price));
            }
        }
    }
    map.into_iter()
        .map(|((t, effects, p_loss), mut members)| {
            members.sort_by_key(|&(v, c)| (c, v));
            Class {
                t,
                effects,
                p_loss,
                members,
            }
        })
        .collect()
}

struct Search<'a> {
    inst: &'a SupportInstance,
    classes: Vec<Class>,
    tg: &'a RoundTargets,
    beta_prime: u64,
    /// Chosen class indices, non-decreasing.
    picked: Vec<usize>,
    best: Option<(Cost, Vec<i64>)>,
}

impl Search<'_> {
    fn run(&mut self, start: usize, used: u64, p_loss: u64, need_prev: &mut [u64], need_round: &mut [u64]) {
        if self.best.as_ref().is_some_and(|(c, _)| *c == Cost::ZERO) {
            return;
        }
        let p_short = self.tg.p_must_lose.saturating_sub(p_loss);
        let open: u64 = need_round.iter().sum::<u64>() + p_short;
        if open == 0 {
            self.evaluate();
            return;
        }
        if open > self.beta_prime - used {
            return;
        }
        for ci in start..self.classes.len() {
            let cl = &self.classes[ci];
            let mult = self.picked.iter().filter(|&&x| x == ci).count();
            if used + cl.t > self.beta_prime || mult >= cl.members.len() {
                continue;
            }
            let new_p = p_loss + cl.p_loss as u64;
            if new_p > self.tg.delta_p {
                continue;
            }
            let helps = (cl.p_loss && p_short > 0)
                || cl.effects.iter().enumerate().any(|(i, &x)| {
                    (x == 2 && need_prev[i] > 0) || (x >= 1 && need_round[i] > 0)
                });
            if !helps {
                continue;
            }
            let saved: Vec<(u64, u64)> = need_prev.iter().copied().zip(need_round.iter().copied()).collect();
            for (i, &x) in cl.effects.iter().enumerate() {
                if x == 2 {
                    need_prev[i] = need_prev[i].saturating_sub(1);
                }
                if x >= 1 {
                    need_round[i] = need_round[i].saturating_sub(1);
                }
            }
            let t = cl.t;
            self.picked.push(ci);
            self.run(ci, used + t, new_p, need_prev, need_round);
            self.picked.pop();
            for (i, (a, b)) in saved.into_iter().enumerate() {
                need_prev[i] = a;
                need_round[i] = b;
            }
        }
    }

    /// Cheapest assignment of distinct voters to the picked classes.
    fn evaluate(&mut self) {
        let n = self.inst.election.n();
        if self.picked.is_empty() {
            self.consider(vec![0; n]);
            return;
        }
        let w: Vec<Vec<Cost>> = self
            .picked
            .iter()
            .map(|&ci| {
                let mut row = vec![Cost::Infinite; n];
                for &(v, c) in &self.classes[ci].members {
                    row[v] = c;
                }
                row
            })
            .collect();
        if let Ok(Some((pairs, _))) = min_weight_bipartite_matching(&w, w.len(), n) {
            let mut d = vec![0i64; n];
            for (slot, v) in pairs {
                d[v] = -(self.classes[self.picked[slot]].t as i64);
            }
            self.consider(d);
        }
    }

    fn consider(&mut self, d: Vec<i64>) {
        let c = self.inst.cost_of(&d);
        if self.best.as_ref().is_some_and(|(b, _)| *b <= c) {
            return;
        }
        if self.inst.wins(&d) {
            self.best = Some((c, d));
        }
    }
}

/// Cheapest successful bribery among those changing approval counts by at
/// most `beta_prime` in total; costs must forbid every increase.
pub fn solve_support_negative_fpt(inst: &SupportInstance, beta_prime: u64) -> Result<BriberySolution, SupportError> {
    inst.require_rule("fpt-negative", &FPT_RULES)?;
    if !inst.costs.is_negative() {
        return Err(SupportError::WrongCostClass("negative"));
    }
    let e = &inst.election;
    let (m, n) = (e.m(), e.n());
    if inst.wins(&vec![0; n]) {
        return inst.solution(vec![0; n]);
    }
    // How many distinct voters could ever take a point from each candidate.
    let mut reach = vec![0u64; m];
    for (v, voter) in e.voters.iter().enumerate() {
        let ell = voter.approval_count;
        let deepest = (1..=ell.min(beta_prime as usize))
            .rev()
            .find(|&t| inst.costs.price(v, -(t as i64)).is_finite())
            .unwrap_or(0);
        for &c in &voter.preference[ell - deepest..ell] {
            reach[c] += 1;
        }
    }
    let rounds: Vec<usize> = if inst.rule == RuleId::SPAV { vec![m + 1] } else { (1..=m + 1).collect() };
    let mut best: Option<(Cost, Vec<i64>)> = None;
    for round in rounds {
        let xs: Vec<u64> = if inst.rule == RuleId::FallbackSimplified && round <= m {
            let sr = truncated_scores(e, round)[e.p()] as i64;
            let slack = sr - e.majority() as i64;
            if slack < 0 {
                continue;
            }
            vec![(slack as u64).min(beta_prime)]
        } else {
            (0..=beta_prime).collect()
        };
        for x in xs {
            let Some(tg) = targets_for(inst, round, x) else { continue };
            let demand: u64 = tg.delta_round.iter().sum::<u64>() + tg.p_must_lose;
            if demand > beta_prime
                || tg.relevant.iter().zip(&tg.delta_round).any(|(&c, &d)| d > reach[c])
                || tg.p_must_lose > reach[e.p()]
            {
                continue;
            }
            let mut s = Search {
                inst,
                classes: classes_for(inst, &tg, beta_prime),
                tg: &tg,
                beta_prime,
                picked: Vec::new(),
                best: None,
            };
            let mut need_prev = tg.delta_prev.clone();
            let mut need_round = tg.delta_round.clone();
            s.run(0, 0, 0, &mut need_prev, &mut need_round);
            if let Some((c, d)) = s.best {
                if best.as_ref().is_none_or(|(b, _)| c < *b) {
                    best = Some((c, d));
                }
            }
            if best.as_ref().is_some_and(|(c, _)| *c == Cost::ZERO) {
                return inst.solution(best.unwrap().1);
            }
        }
    }
    match best {
        Some((_, d)) => inst.solution(d),
        None => inst.infeasible(),
    }
}
