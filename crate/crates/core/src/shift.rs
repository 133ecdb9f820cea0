//! Shift bribery: an exhaustive oracle and polynomial solvers for the four
//! Bucklin/Fallback rules.

use std::sync::Arc;

use thiserror::Error;

use crate::cost::{Cost, CostProfileError, ShiftCostProfile};
use crate::election::{
    apply_shift, designated_wins, top_scores, truncated_scores, winners, Election, ElectionError,
    RuleId, ShiftAction,
};
use crate::flow::{build_round_network, min_cost_circulation};
use crate::registry::Registry;
use crate::solution::{Action, BriberySolution};

/// Upper bound on the number of actions any exhaustive search will visit.
pub const ENUMERATION_LIMIT: u128 = 10_000_000;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ShiftError {
    #[error(transparent)]
    Election(#[from] ElectionError),
    #[error(transparent)]
    Costs(#[from] CostProfileError),
    #[error("solver `{solver}` does not handle rule {rule}")]
    RuleMismatch { solver: &'static str, rule: RuleId },
    #[error("exhaustive search would visit {0} actions (limit {ENUMERATION_LIMIT})")]
    GuardExceeded(u128),
    #[error("voter {voter}: shift {shift} exceeds the number of candidates")]
    ShiftOutOfRange { voter: usize, shift: usize },
    #[error("action does not make the designated candidate win")]
    NotSuccessful,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ShiftInstance {
    pub election: Election,
    pub costs: ShiftCostProfile,
    pub rule: RuleId,
}

impl ShiftInstance {
    pub fn new(election: Election, costs: ShiftCostProfile, rule: RuleId) -> Result<Self, ShiftError> {
        election.validate()?;
        costs.validate(election.n(), election.m())?;
        Ok(ShiftInstance {
            election,
            costs,
            rule,
        })
    }

    fn wins(&self, shifts: &[usize]) -> bool {
        apply_shift(&self.election, &ShiftAction { shifts: shifts.to_vec() })
            .map(|e| designated_wins(&e, self.rule))
            .unwrap_or(false)
    }

    fn cost_of(&self, shifts: &[usize]) -> Cost {
        shifts
            .iter()
            .enumerate()
            .map(|(i, &t)| self.costs.price(i, t))
            .sum()
    }

    fn solution(&self, shifts: Vec<usize>) -> Result<BriberySolution, ShiftError> {
        let cost = self.cost_of(&shifts);
        Ok(BriberySolution::new(
            &self.election,
            self.rule,
            Action::Shift(ShiftAction { shifts }),
            cost,
        )?)
    }

    fn infeasible(&self) -> Result<BriberySolution, ShiftError> {
        Ok(BriberySolution::infeasible(&self.election, self.rule, false)?)
    }

    /// Cheapest verified candidate; the first one wins ties.
    fn best_of(&self, candidates: Vec<Vec<usize>>) -> Result<BriberySolution, ShiftError> {
        let mut best: Option<(Cost, Vec<usize>)> = None;
        for t in candidates {
            let c = self.cost_of(&t);
            if !c.is_finite() || best.as_ref().is_some_and(|(b, _)| *b <= c) {
                continue;
            }
            if self.wins(&t) {
                best = Some((c, t));
            }
        }
        match best {
            Some((_, t)) => self.solution(t),
            None => self.infeasible(),
        }
    }
}

pub fn shift_cost(costs: &ShiftCostProfile, action: &ShiftAction) -> Result<Cost, ShiftError> {
    if action.shifts.len() != costs.rows.len() {
        return Err(ElectionError::LengthMismatch {
            expected: costs.rows.len(),
            got: action.shifts.len(),
        }
        .into());
    }
    let mut total = Cost::ZERO;
    for (i, &t) in action.shifts.iter().enumerate() {
        if t >= costs.rows[i].len() {
            return Err(ShiftError::ShiftOutOfRange { voter: i, shift: t });
        }
        total = total + costs.price(i, t);
    }
    Ok(total)
}

fn ranks_of_p(e: &Election) -> Vec<usize> {
    e.voters.iter().map(|v| v.rank_of(e.designated)).collect()
}

/// Visits every vector in the box `0..=bound[i]` with voter 0 varying slowest.
fn for_each_in_box(bounds: &[usize], mut visit: impl FnMut(&[usize])) {
    let n = bounds.len();
    let mut t = vec![0usize; n];
    loop {
        visit(&t);
        let mut i = n;
        loop {
            if i == 0 {
                return;
            }
            i -= 1;
            if t[i] < bounds[i] {
                t[i] += 1;
                break;
            }
            t[i] = 0;
        }
    }
}

fn box_size(bounds: &[usize]) -> u128 {
    bounds
        .iter()
        .try_fold(1u128, |acc, &b| acc.checked_mul(b as u128 + 1))
        .unwrap_or(u128::MAX)
}

/// Exhaustive search over all shift vectors (any rule).
pub fn brute_force_shift(inst: &ShiftInstance) -> Result<BriberySolution, ShiftError> {
    let e = &inst.election;
    let ranks = ranks_of_p(e);
    // Largest useful shift for each voter among those of finite price.
    let bounds: Vec<usize> = ranks
        .iter()
        .enumerate()
        .map(|(i, &r)| (0..r).rev().find(|&t| inst.costs.price(i, t).is_finite()).unwrap_or(0))
        .collect();
    let size = box_size(&bounds);
    if size > ENUMERATION_LIMIT {
        return Err(ShiftError::GuardExceeded(size));
    }
    let mut best: Option<(Cost, Vec<usize>)> = None;
    for_each_in_box(&bounds, |t| {
        let c = inst.cost_of(t);
        if !c.is_finite() || best.as_ref().is_some_and(|(b, _)| *b <= c) {
            return;
        }
        if inst.wins(t) {
            best = Some((c, t.to_vec()));
        }
    });
    match best {
        Some((_, t)) => inst.solution(t),
        None => inst.infeasible(),
    }
}

/// True iff `action` wins and no distinct componentwise-smaller action does.
pub fn is_minimal_shift(inst: &ShiftInstance, action: &ShiftAction) -> Result<bool, ShiftError> {
    if action.shifts.len() != inst.election.n() {
        return Err(ElectionError::LengthMismatch {
            expected: inst.election.n(),
            got: action.shifts.len(),
        }
        .into());
    }
    if !inst.wins(&action.shifts) {
        return Err(ShiftError::NotSuccessful);
    }
    let size = box_size(&action.shifts);
    if size > ENUMERATION_LIMIT {
        return Err(ShiftError::GuardExceeded(size));
    }
    let mut minimal = true;
    for_each_in_box(&action.shifts, |s| {
        if minimal && s != action.shifts.as_slice() && inst.wins(s) {
            minimal = false;
        }
    });
    Ok(minimal)
}

/// Smallest-total winning action below `action`; it is minimal and costs no more.
pub fn minimalize_shift(inst: &ShiftInstance, action: &ShiftAction) -> Result<ShiftAction, ShiftError> {
    if !inst.wins(&action.shifts) {
        return Err(ShiftError::NotSuccessful);
    }
    let size = box_size(&action.shifts);
    if size > ENUMERATION_LIMIT {
        return Err(ShiftError::GuardExceeded(size));
    }
    let mut best: Option<(usize, Vec<usize>)> = None;
    for_each_in_box(&action.shifts, |s| {
        let total: usize = s.iter().sum();
        if best.as_ref().is_some_and(|(b, _)| *b <= total) {
            return;
        }
        if inst.wins(s) {
            best = Some((total, s.to_vec()));
        }
    });
    Ok(ShiftAction {
        shifts: best.expect("the action itself wins").1,
    })
}

fn check_rule(inst: &ShiftInstance, solver: &'static str, rule: RuleId) -> Result<(), ShiftError> {
    if inst.rule != rule {
        return Err(ShiftError::RuleMismatch {
            solver,
            rule: inst.rule,
        });
    }
    Ok(())
}

/// One purchasable move: `(price, voter, group, shift)`.
type Offer = (Cost, usize, usize, usize);

/// Buys `required[g]` cheapest offers from each group, then tops up with the
/// cheapest remaining offers until exactly `total` voters are bribed.
fn quota_greedy(n: usize, mut offers: Vec<Offer>, required: &[usize], total: usize) -> Option<Vec<usize>> {
    offers.retain(|o| o.0.is_finite());
    offers.sort_by_key(|o| (o.0, o.1));
    if required.iter().sum::<usize>() > total {
        return None;
    }
    let mut taken = vec![false; offers.len()];
    let mut got = vec![0usize; required.len()];
    for (idx, o) in offers.iter().enumerate() {
        if got[o.2] < required[o.2] {
            got[o.2] += 1;
            taken[idx] = true;
        }
    }
    if got.iter().zip(required).any(|(g, r)| g < r) {
        return None;
    }
    let mut count: usize = got.iter().sum();
    for (idx, _) in offers.iter().enumerate() {
        if count == total {
            break;
        }
        if !taken[idx] {
            taken[idx] = true;
            count += 1;
        }
    }
    if count < total {
        return None;
    }
    let mut t = vec![0; n];
    for (idx, o) in offers.iter().enumerate() {
        if taken[idx] {
            t[o.1] = o.3;
        }
    }
    Some(t)
}

/// Moves p to position `pos` in the `count` cheapest voters ranking it lower.
fn greedy_to_position(inst: &ShiftInstance, pos: usize, count: usize) -> Option<Vec<usize>> {
    let offers = ranks_of_p(&inst.election)
        .into_iter()
        .enumerate()
        .filter(|&(_, r)| r > pos)
        .map(|(j, r)| (inst.costs.price(j, r - pos), j, 0, r - pos))
        .collect();
    quota_greedy(inst.election.n(), offers, &[0], count)
}

/// Win via the approval default: nobody reaches a majority and p ties for
/// the most approvals. One candidate action per target score of p.
fn approval_stage(inst: &ShiftInstance) -> Vec<Vec<usize>> {
    let e = &inst.election;
    let (m, n, p) = (e.m(), e.n(), e.p());
    let half = n / 2;
    let s = truncated_scores(e, m);
    let offers: Vec<Offer> = e
        .voters
        .iter()
        .enumerate()
        .filter_map(|(j, v)| {
            let (rho, ell) = (v.rank_of(p), v.approval_count);
            (ell >= 1 && rho > ell).then(|| (inst.costs.price(j, rho - ell), j, v.preference[ell - 1], rho - ell))
        })
        .collect();
    let mut out = Vec::new();
    for t in s[p]..=half {
        let required: Vec<usize> = (0..m)
            .map(|c| if c == p { 0 } else { s[c].saturating_sub(t) })
            .collect();
        if let Some(a) = quota_greedy(n, offers.clone(), &required, t - s[p]) {
            out.push(a);
        }
    }
    out
}

#[derive(Clone, Copy)]
enum Step {
    Skip,
    Point,
    Demote(usize),
}

/// A voter that p can be moved past the round-`r` cutoff in.
struct Deep {
    voter: usize,
    point: Cost,
    point_shift: usize,
    demote: Cost,
    demote_shift: usize,
}

#[derive(Default)]
struct Group {
    /// Voters already scoring p in round r; only demotion is for sale.
    light: Vec<(Cost, usize, usize)>,
    deep: Vec<Deep>,
    demand: usize,
}

impl Group {
    /// `table[j][i][h]`: cheapest way to use the first `j` deep voters, bribing
    /// `i` of them, for `h` demotions (saturated at the demand).
    fn table(&self) -> Vec<Vec<Vec<(Cost, Step)>>> {
        let d = self.demand;
        let nb = self.deep.len();
        let mut tab = vec![vec![vec![(Cost::Infinite, Step::Skip); d + 1]; nb + 1]; nb + 1];
        let mut prefix = Cost::ZERO;
        for h in 0..=d {
            if h > 0 {
                prefix = match self.light.get(h - 1) {
                    Some(x) => prefix + x.0,
                    None => Cost::Infinite,
                };
            }
            tab[0][0][h] = (prefix, Step::Skip);
        }
        for j in 1..=nb {
            let v = &self.deep[j - 1];
            for i in 0..=j {
                for h in 0..=d {
                    let mut best = (tab[j - 1][i][h].0, Step::Skip);
                    if i > 0 {
                        let c = tab[j - 1][i - 1][h].0 + v.point;
                        if c < best.0 {
                            best = (c, Step::Point);
                        }
                        let froms: &[usize] = if h == d && d > 0 { &[d - 1, d] } else if h > 0 { &[h - 1] } else { &[] };
                        for &hp in froms {
                            let c = tab[j - 1][i - 1][hp].0 + v.demote;
                            if c < best.0 {
                                best = (c, Step::Demote(hp));
                            }
                        }
                    }
                    tab[j][i][h] = best;
                }
            }
        }
        tab
    }

    fn witness(&self, tab: &[Vec<Vec<(Cost, Step)>>], mut i: usize, t: &mut [usize]) {
        let mut h = self.demand;
        for j in (1..=self.deep.len()).rev() {
            let v = &self.deep[j - 1];
            match tab[j][i][h].1 {
                Step::Skip => {}
                Step::Point => {
                    t[v.voter] = v.point_shift;
                    i -= 1;
                }
                Step::Demote(hp) => {
                    t[v.voter] = v.demote_shift;
                    i -= 1;
                    h = hp;
                }
            }
        }
        for &(_, voter, shift) in self.light.iter().take(h) {
            t[voter] = shift;
        }
    }
}

/// Simplified-rule win in round `r`: p gets a majority in round `r` and
/// every rival is pushed to at most half the voters in round `r - 1`.
fn round_branch(inst: &ShiftInstance, r: usize, truncate: bool) -> Option<Vec<usize>> {
    let e = &inst.election;
    let (m, n, p) = (e.m(), e.n(), e.p());
    let half = n / 2;
    let score = |k: usize| if truncate { truncated_scores(e, k) } else { top_scores(e, k) };
    let s_r = score(r);
    let s_prev = score(r - 1);
    let need = e.majority().saturating_sub(s_r[p]);

    // Group m collects voters with no candidate to demote.
    let mut groups: Vec<Group> = (0..=m).map(|_| Group::default()).collect();
    for (c, g) in groups.iter_mut().enumerate().take(m) {
        if c != p {
            g.demand = s_prev[c].saturating_sub(half);
        }
    }
    for (j, v) in e.voters.iter().enumerate() {
        let ell = if truncate { v.approval_count } else { m };
        let (g, lo) = (r.min(ell), (r - 1).min(ell));
        let rho = v.rank_of(p);
        if g == 0 || rho <= lo {
            continue;
        }
        let key = if lo >= 1 { v.preference[lo - 1] } else { m };
        if rho <= g {
            let c = inst.costs.price(j, rho - lo);
            if key != m && c.is_finite() {
                groups[key].light.push((c, j, rho - lo));
            }
        } else {
            let point = inst.costs.price(j, rho - g);
            if !point.is_finite() {
                continue;
            }
            let demote = if key == m { Cost::Infinite } else { inst.costs.price(j, rho - lo) };
            groups[key].deep.push(Deep {
                voter: j,
                point,
                point_shift: rho - g,
                demote,
                demote_shift: rho - lo,
            });
        }
    }
    for g in &mut groups {
        g.light.sort_by_key(|x| (x.0, x.1));
        g.deep.sort_by_key(|x| (x.point, x.voter));
        if g.light.len() + g.deep.iter().filter(|d| d.demote.is_finite()).count() < g.demand {
            return None;
        }
    }

    let tables: Vec<_> = groups.iter().map(Group::table).collect();
    // best[g][pts]: cheapest over the first g groups with `pts` points (saturated).
    let mut best = vec![vec![(Cost::Infinite, 0usize, 0usize); need + 1]; groups.len() + 1];
    best[0][0].0 = Cost::ZERO;
    for (gi, g) in groups.iter().enumerate() {
        let nb = g.deep.len();
        for pts in 0..=need {
            let base = best[gi][pts].0;
            if !base.is_finite() {
                continue;
            }
            for i in 0..=nb {
                let c = base + tables[gi][nb][i][g.demand].0;
                let np = (pts + i).min(need);
                if c < best[gi + 1][np].0 {
                    best[gi + 1][np] = (c, pts, i);
                }
            }
        }
    }
    if !best[groups.len()][need].0.is_finite() {
        return None;
    }
    let mut t = vec![0; n];
    let mut pts = need;
    for gi in (0..groups.len()).rev() {
        let (_, prev, i) = best[gi + 1][pts];
        groups[gi].witness(&tables[gi], i, &mut t);
        pts = prev;
    }
    Some(t)
}

/// Classic-rule win in round `r` after bribing exactly `i` deep voters,
/// solved as a minimum-cost circulation.
fn circulation_branch(inst: &ShiftInstance, r: usize, i: usize, truncate: bool) -> Option<Vec<usize>> {
    let net = build_round_network(&inst.election, &inst.costs, r, i, truncate);
    let flow = min_cost_circulation(&net.network).ok()??;
    Some(net.shifts_from(&flow, inst.election.n()))
}

fn already_won(inst: &ShiftInstance) -> Option<Result<BriberySolution, ShiftError>> {
    designated_wins(&inst.election, inst.rule).then(|| inst.solution(vec![0; inst.election.n()]))
}

fn original_round(inst: &ShiftInstance) -> Result<usize, ShiftError> {
    Ok(winners(&inst.election, inst.rule)?
        .winning_round
        .expect("Bucklin always has a winning round"))
}

pub fn solve_shift_bucklin_simplified(inst: &ShiftInstance) -> Result<BriberySolution, ShiftError> {
    check_rule(inst, "bucklin-simplified", RuleId::BucklinSimplified)?;
    if let Some(done) = already_won(inst) {
        return done;
    }
    let e = &inst.election;
    let k = original_round(inst)?;
    let s_k = top_scores(e, k);
    let mut cands = Vec::new();
    cands.extend(greedy_to_position(inst, k, e.majority().saturating_sub(s_k[e.p()])));
    if k < e.m() {
        cands.extend(round_branch(inst, k + 1, false));
    }
    inst.best_of(cands)
}

pub fn solve_shift_fallback_simplified(inst: &ShiftInstance) -> Result<BriberySolution, ShiftError> {
    check_rule(inst, "fallback-simplified", RuleId::FallbackSimplified)?;
    if let Some(done) = already_won(inst) {
        return done;
    }
    let e = &inst.election;
    let max_ell = e.voters.iter().map(|v| v.approval_count).max().unwrap_or(0);
    let mut cands = approval_stage(inst);
    for r in 1..=max_ell {
        cands.extend(round_branch(inst, r, true));
    }
    inst.best_of(cands)
}

pub fn solve_shift_bucklin(inst: &ShiftInstance) -> Result<BriberySolution, ShiftError> {
    check_rule(inst, "bucklin", RuleId::BucklinClassic)?;
    if let Some(done) = already_won(inst) {
        return done;
    }
    let e = &inst.election;
    let (m, n, p, maj) = (e.m(), e.n(), e.p(), e.majority());
    let k = original_round(inst)?;
    let mut cands = Vec::new();
    if k >= 2 {
        let s = top_scores(e, k - 1);
        cands.extend(greedy_to_position(inst, k - 1, maj.saturating_sub(s[p])));
    }
    // Win in round k: p moves to position k, demoting whoever sat there.
    let s_k = top_scores(e, k);
    let offers: Vec<Offer> = e
        .voters
        .iter()
        .enumerate()
        .filter_map(|(j, v)| {
            let rho = v.rank_of(p);
            (rho > k).then(|| (inst.costs.price(j, rho - k), j, v.preference[k - 1], rho - k))
        })
        .collect();
    for i in maj.max(s_k[p])..=n {
        let required: Vec<usize> = (0..m)
            .map(|c| if c == p { 0 } else { s_k[c].saturating_sub(i) })
            .collect();
        cands.extend(quota_greedy(n, offers.clone(), &required, i - s_k[p]));
    }
    if k < m {
        let s_next = top_scores(e, k + 1);
        for i in maj.saturating_sub(s_next[p])..=n {
            cands.extend(circulation_branch(inst, k + 1, i, false));
        }
    }
    inst.best_of(cands)
}

pub fn solve_shift_fallback(inst: &ShiftInstance) -> Result<BriberySolution, ShiftError> {
    check_rule(inst, "fallback", RuleId::FallbackClassic)?;
    if let Some(done) = already_won(inst) {
        return done;
    }
    let e = &inst.election;
    let (n, p, maj) = (e.n(), e.p(), e.majority());
    let max_ell = e.voters.iter().map(|v| v.approval_count).max().unwrap_or(0);
    let mut cands = approval_stage(inst);
    for r in 1..=max_ell {
        let s_r = truncated_scores(e, r);
        for i in maj.saturating_sub(s_r[p])..=n {
            cands.extend(circulation_branch(inst, r, i, true));
        }
    }
    inst.best_of(cands)
}

pub trait ShiftSolver: Send + Sync {
    fn name(&self) -> &'static str;
    fn supports(&self, rule: RuleId) -> bool;
    fn solve(&self, inst: &ShiftInstance) -> Result<BriberySolution, ShiftError>;
}

struct FnShiftSolver {
    name: &'static str,
    rule: Option<RuleId>,
    run: fn(&ShiftInstance) -> Result<BriberySolution, ShiftError>,
}

impl ShiftSolver for FnShiftSolver {
    fn name(&self) -> &'static str {
        self.name
    }

    fn supports(&self, rule: RuleId) -> bool {
        self.rule.is_none_or(|r| r == rule)
    }

    fn solve(&self, inst: &ShiftInstance) -> Result<BriberySolution, ShiftError> {
        (self.run)(inst)
    }
}

/// All shift solvers, keyed by name.
pub fn shift_registry() -> Registry<dyn ShiftSolver> {
    let mut reg: Registry<dyn ShiftSolver> = Registry::new();
    let entries: [(&'static str, Option<RuleId>, fn(&ShiftInstance) -> Result<BriberySolution, ShiftError>); 5] = [
        ("brute-force", None, brute_force_shift),
        ("bucklin", Some(RuleId::BucklinClassic), solve_shift_bucklin),
        ("bucklin-simplified", Some(RuleId::BucklinSimplified), solve_shift_bucklin_simplified),
        ("fallback", Some(RuleId::FallbackClassic), solve_shift_fallback),
        ("fallback-simplified", Some(RuleId::FallbackSimplified), solve_shift_fallback_simplified),
    ];
    for (name, rule, run) in entries {
        reg.register(name, Arc::new(FnShiftSolver { name, rule, run }));
    }
    reg
}

/// Registry name of the polynomial solver for `rule`, or the oracle.
pub fn default_shift_solver(rule: RuleId) -> &'static str {
    match rule {
        RuleId::BucklinClassic => "bucklin",
        RuleId::BucklinSimplified => "bucklin-simplified",
        RuleId::FallbackClassic => "fallback",
        RuleId::FallbackSimplified => "fallback-simplified",
        RuleId::KApproval(_) | RuleId::SPAV => "brute-force",
    }
}
