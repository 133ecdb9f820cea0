//! Approximate support bribery for single-peaked approval elections with
//! per-unit prices of at least one.
//!
//! Bribed voters that start approving p are split into expensive ones,
//! which are guessed outright, and cheap ones, which are found by color
//! coding on the shape of the candidates they pull in. Decreases are then
//! chosen by dynamic programming among the uncolored voters.

use std::collections::HashMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::cost::Cost;
use crate::election::{is_single_peaked, truncated_scores, Election, RuleId};
use crate::solution::{BriberySolution, TrialTag};

use super::{SupportError, SupportInstance};

#[derive(Clone, Debug, PartialEq)]
pub struct ApproxOptions {
    pub epsilon: f64,
    /// Budget to approximate; falls back to the instance budget, then to
    /// trying every budget from 1 upward.
    pub budget: Option<Cost>,
    /// Largest total change to try; every value from 1 up to it is tried.
    pub beta_prime: Option<u64>,
    pub seed: u64,
    /// Random colorings per guess; `None` uses `ceil(3 * (k+1)^beta')`
    /// capped at 10^4, where `k` is the number of colors.
    pub trials: Option<u64>,
}

impl Default for ApproxOptions {
    fn default() -> Self {
        ApproxOptions {
            epsilon: 0.5,
            budget: None,
            beta_prime: None,
            seed: 0,
            trials: None,
        }
    }
}

/// The candidates a voter starts approving when extended down to p, split
/// into the axis interval touching p and the one on the far side.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct BaseShadow {
    /// Axis positions `(lo, hi)` of the interval that contains p.
    pub base: (usize, usize),
    /// Candidates of the other interval, sorted.
    pub shadow: Vec<usize>,
}

impl BaseShadow {
    /// Shape of extending voter `v` until it approves p; `None` if it
    /// already does.
    pub fn of(e: &Election, axis_pos: &[usize], v: usize) -> Option<Self> {
        let voter = &e.voters[v];
        let p = e.p();
        let ell = voter.approval_count;
        let rp = voter.rank_of(p);
        if rp <= ell {
            return None;
        }
        let approved: Vec<usize> = voter.preference[..ell].iter().map(|&c| axis_pos[c]).collect();
        let lo = approved.iter().copied().min();
        let pp = axis_pos[p];
        let mut base = (pp, pp);
        let mut shadow = Vec::new();
        for &c in &voter.preference[ell..rp] {
            let x = axis_pos[c];
            let same_side = match lo {
                None => true,
                Some(lo) => (x < lo) == (pp < lo),
            };
            if same_side {
                base = (base.0.min(x), base.1.max(x));
            } else {
                shadow.push(c);
            }
        }
        shadow.sort_unstable();
        Some(BaseShadow { base, shadow })
    }

    fn key(&self) -> ((usize, usize), usize) {
        (self.base, self.shadow.len())
    }
}

struct Buy {
    voter: usize,
    t: u64,
    price: u64,
    shape: BaseShadow,
}

struct Ctx<'a> {
    inst: &'a SupportInstance,
    axis_pos: Vec<usize>,
    buys: Vec<Option<Buy>>,
    scores: Vec<usize>,
    epsilon: f64,
    seed: u64,
    trials: Option<u64>,
}

type Found = (u64, Vec<i64>, Option<TrialTag>);

fn default_trials(k: usize, beta_prime: u64) -> u64 {
    let b = beta_prime.min(16) as u32;
    (k as u64 + 1).checked_pow(b).map_or(10_000, |x| x.saturating_mul(3).min(10_000))
}

fn subsets(items: &[usize], max: usize) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::new()];
    for &x in items {
        let mut more: Vec<Vec<usize>> = out
            .iter()
            .filter(|s| s.len() < max)
            .map(|s| {
                let mut s = s.clone();
                s.push(x);
                s
            })
            .collect();
        out.append(&mut more);
    }
    out
}

fn type_multisets(types: &[(((usize, usize), usize), u64)], k: usize, room: u64) -> Vec<Vec<usize>> {
    fn go(types: &[(((usize, usize), usize), u64)], start: usize, k: usize, room: u64, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..types.len() {
            if types[i].1 <= room {
                cur.push(i);
                go(types, i, k, room - types[i].1, cur, out);
                cur.pop();
            }
        }
    }
    let mut out = Vec::new();
    go(types, 0, k, room, &mut Vec::new(), &mut out);
    out
}

impl Ctx<'_> {
    fn keep(best: &mut Option<Found>, f: Found) {
        if best.as_ref().is_none_or(|b| f.0 < b.0) {
            *best = Some(f);
        }
    }

    fn run(&self, budget: u64, bp: u64) -> Option<Found> {
        let eps_b = self.epsilon * budget as f64;
        let usable: Vec<&Buy> = self.buys.iter().flatten().filter(|b| b.t <= bp).collect();
        let expensive: Vec<usize> = usable.iter().filter(|b| b.price as f64 >= eps_b).map(|b| b.voter).collect();
        let cap1 = ((1.0 / self.epsilon).floor() as usize).min(bp as usize);
        let mut best: Option<Found> = None;
        for v1 in subsets(&expensive, cap1) {
            let used: u64 = v1.iter().map(|&v| self.buys[v].as_ref().unwrap().t).sum();
            if used > bp {
                continue;
            }
            let room = bp - used;
            let mut types: Vec<(((usize, usize), usize), u64)> = usable
                .iter()
                .filter(|b| (b.price as f64) < eps_b && b.t <= room)
                .map(|b| (b.shape.key(), b.t))
                .collect();
            types.sort_unstable();
            types.dedup();
            for k in 0..=room as usize {
                for guess in type_multisets(&types, k, room) {
                    let keys: Vec<((usize, usize), usize)> = guess.iter().map(|&i| types[i].0).collect();
                    if let Some(f) = self.colorings(budget, bp, &v1, &keys, eps_b) {
                        Self::keep(&mut best, f);
                    }
                }
            }
        }
        best
    }

    fn colorings(&self, budget: u64, bp: u64, v1: &[usize], keys: &[((usize, usize), usize)], eps_b: f64) -> Option<Found> {
        let n = self.inst.election.n();
        let suitable: Vec<Vec<usize>> = (0..n)
            .map(|v| match &self.buys[v] {
                Some(b) if !v1.contains(&v) && (b.price as f64) < eps_b => {
                    (0..keys.len()).filter(|&i| keys[i] == b.shape.key()).collect()
                }
                _ => Vec::new(),
            })
            .collect();
        let count = suitable
            .iter()
            .try_fold(1u128, |a, s| a.checked_mul(s.len() as u128 + 1))
            .unwrap_or(u128::MAX);
        let trials = self.trials.unwrap_or_else(|| default_trials(keys.len(), bp));
        let mut best: Option<Found> = None;
        if count <= trials as u128 {
            let mut idx = vec![0usize; n];
            loop {
                let colors: Vec<Option<usize>> =
                    (0..n).map(|v| (idx[v] > 0).then(|| suitable[v][idx[v] - 1])).collect();
                if let Some((c, d)) = self.evaluate(budget, bp, v1, keys, &colors) {
                    Self::keep(&mut best, (c, d, None));
                }
                let mut i = n;
                loop {
                    if i == 0 {
                        return best;
                    }
                    i -= 1;
                    if idx[i] < suitable[i].len() {
                        idx[i] += 1;
                        break;
                    }
                    idx[i] = 0;
                }
            }
        }
        for trial in 0..trials {
            let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
            rng.set_stream(trial);
            let colors: Vec<Option<usize>> = suitable
                .iter()
                .map(|s| {
                    let x = rng.gen_range(0..=s.len());
                    (x > 0).then(|| s[x - 1])
                })
                .collect();
            if let Some((c, d)) = self.evaluate(budget, bp, v1, keys, &colors) {
                let tag = TrialTag { seed: self.seed, trial };
                Self::keep(&mut best, (c, d, Some(tag)));
            }
        }
        best
    }

    fn buy(&self, v: usize) -> &Buy {
        self.buys[v].as_ref().expect("only buyable voters are colored or guessed")
    }

    fn evaluate(
        &self,
        budget: u64,
        bp: u64,
        v1: &[usize],
        keys: &[((usize, usize), usize)],
        colors: &[Option<usize>],
    ) -> Option<(u64, Vec<i64>)> {
        let k = keys.len();
        let r = (bp * bp + 1) as usize;
        // Relevant voters per color: cheapest first, one per distinct shadow.
        let mut relevant: Vec<Vec<usize>> = vec![Vec::new(); k];
        let mut by_price: Vec<usize> = (0..colors.len()).filter(|&v| colors[v].is_some()).collect();
        by_price.sort_by_key(|&v| (self.buy(v).price, v));
        for v in by_price {
            let i = colors[v].unwrap();
            let shadow = &self.buy(v).shape.shadow;
            if relevant[i].len() < r && relevant[i].iter().all(|&u| &self.buy(u).shape.shadow != shadow) {
                relevant[i].push(v);
            }
        }
        let pool: Vec<usize> = (0..colors.len()).filter(|&v| colors[v].is_none() && !v1.contains(&v)).collect();
        let mut best: Option<(u64, Vec<i64>)> = None;
        // Per color: index into relevant[i], or len for a missing color.
        let mut pick = vec![0usize; k];
        loop {
            let allowed = (0..k).all(|i| pick[i] < relevant[i].len() || relevant[i].len() == r);
            if allowed {
                if let Some(found) = self.finish(budget, bp, v1, keys, &relevant, &pick, &pool) {
                    if best.as_ref().is_none_or(|b| found.0 < b.0) {
                        best = Some(found);
                    }
                }
            }
            let mut i = k;
            loop {
                if i == 0 {
                    return best;
                }
                i -= 1;
                if pick[i] < relevant[i].len() {
                    pick[i] += 1;
                    break;
                }
                pick[i] = 0;
            }
        }
    }

    fn finish(
        &self,
        budget: u64,
        bp: u64,
        v1: &[usize],
        keys: &[((usize, usize), usize)],
        relevant: &[Vec<usize>],
        pick: &[usize],
        pool: &[usize],
    ) -> Option<(u64, Vec<i64>)> {
        let e = &self.inst.election;
        let (m, n, p) = (e.m(), e.n(), e.p());
        let missing: Vec<usize> = (0..keys.len()).filter(|&i| pick[i] == relevant[i].len()).collect();
        let mut bought: Vec<usize> = v1.to_vec();
        bought.extend((0..keys.len()).filter(|&i| pick[i] < relevant[i].len()).map(|i| relevant[i][pick[i]]));
        // Greedy choice of voters with pairwise disjoint shadows.
        let mut third: Vec<usize> = Vec::new();
        let mut taken = vec![false; m];
        let mut order = missing.clone();
        if let Some(&last) = missing.last() {
            order.push(last);
        }
        for &i in &order {
            let v = *relevant[i]
                .iter()
                .find(|&&v| !third.contains(&v) && self.buy(v).shape.shadow.iter().all(|&c| !taken[c]))?;
            for &c in &self.buy(v).shape.shadow {
                taken[c] = true;
            }
            third.push(v);
        }
        let mut base = self.scores.clone();
        for &v in &bought {
            let voter = &e.voters[v];
            for &c in &voter.preference[voter.approval_count..voter.rank_of(p)] {
                base[c] += 1;
            }
        }
        let mut star = base.clone();
        for &i in &missing {
            let (lo, hi) = keys[i].0;
            for c in (0..m).filter(|&c| c != p && (lo..=hi).contains(&self.axis_pos[c])) {
                star[c] += 1;
            }
        }
        let gain = (bought.len() + third.len()) as i64;
        let extra = !missing.is_empty() as i64;
        let sp = self.scores[p] as i64;
        let mut best: Option<(u64, Vec<i64>)> = None;
        for s_star in (sp - bp as i64).max(0)..=sp + bp as i64 {
            let p_cap = sp + gain - s_star - extra;
            if p_cap < 0 {
                continue;
            }
            let demands: Vec<(usize, u64)> = (0..m)
                .filter(|&c| c != p && star[c] as i64 > s_star)
                .map(|c| (c, (star[c] as i64 - s_star) as u64))
                .collect();
            if demands.iter().map(|d| d.1).sum::<u64>() > bp {
                continue;
            }
            let Some(decreases) = self.decrease_dp(pool, &demands, p_cap as u64) else { continue };
            let mut deltas = vec![0i64; n];
            for &v in bought.iter().chain(&third) {
                deltas[v] = self.buy(v).t as i64;
            }
            for (v, d) in decreases {
                deltas[v] = -(d as i64);
            }
            let cost = self.inst.cost_of(&deltas).finite()?;
            if (cost as f64) <= (1.0 + self.epsilon) * budget as f64 + 1e-9
                && best.as_ref().is_none_or(|b| cost < b.0)
                && self.inst.wins(&deltas)
            {
                best = Some((cost, deltas));
            }
        }
        best
    }

    /// Cheapest decreases among `pool` taking at least the demanded points
    /// from each candidate while p loses at most `p_cap`.
    fn decrease_dp(&self, pool: &[usize], demands: &[(usize, u64)], p_cap: u64) -> Option<Vec<(usize, u64)>> {
        let e = &self.inst.election;
        let p = e.p();
        let start: Vec<u64> = demands.iter().map(|d| d.1).chain(std::iter::once(0)).collect();
        let mut table: HashMap<Vec<u64>, (u64, Vec<(usize, u64)>)> = HashMap::new();
        table.insert(start, (0, Vec::new()));
        for &v in pool {
            let voter = &e.voters[v];
            let ell = voter.approval_count;
            let mut next = table.clone();
            for (state, (cost, chosen)) in &table {
                for d in 1..=ell {
                    let Some(price) = self.inst.costs.price(v, -(d as i64)).finite() else { continue };
                    let removed = &voter.preference[ell - d..ell];
                    let mut s = state.clone();
                    for (j, &(c, _)) in demands.iter().enumerate() {
                        if removed.contains(&c) {
                            s[j] = s[j].saturating_sub(1);
                        }
                    }
                    let last = s.len() - 1;
                    s[last] += removed.contains(&p) as u64;
                    if s[last] > p_cap {
                        continue;
                    }
                    let total = cost + price;
                    if next.get(&s).is_none_or(|x| total < x.0) {
                        let mut ch = chosen.clone();
                        ch.push((v, d as u64));
                        next.insert(s, (total, ch));
                    }
                }
            }
            table = next;
        }
        table
            .into_iter()
            .filter(|(s, _)| s[..s.len() - 1].iter().all(|&x| x == 0))
            .min_by_key(|(s, (c, _))| (*c, s.clone()))
            .map(|(_, (_, ch))| ch)
    }
}

/// Bribery costing at most `(1 + epsilon)` times the budget, for SP-AV on
/// single-peaked elections. Returns an infinite-cost answer when no guess
/// succeeds.
pub fn approx_spav_single_peaked(inst: &SupportInstance, opts: &ApproxOptions) -> Result<BriberySolution, SupportError> {
    inst.require_rule("approx", &[RuleId::SPAV])?;
    if !(opts.epsilon > 0.0) {
        return Err(SupportError::BadEpsilon);
    }
    let e = &inst.election;
    let (m, n, p) = (e.m(), e.n(), e.p());
    let axis = is_single_peaked(e).ok_or(SupportError::NotSinglePeaked)?;
    for (row, &l) in inst.costs.rows.iter().zip(&inst.costs.offsets) {
        if row.iter().enumerate().any(|(j, &c)| j != l && c == Cost::ZERO) {
            return Err(SupportError::ZeroCostChange);
        }
    }
    if inst.wins(&vec![0; n]) {
        return inst.solution(vec![0; n]);
    }
    let mut axis_pos = vec![0; m];
    for (i, &c) in axis.order.iter().enumerate() {
        axis_pos[c] = i;
    }
    let buys = (0..n)
        .map(|v| {
            let shape = BaseShadow::of(e, &axis_pos, v)?;
            let t = (e.voters[v].rank_of(p) - e.voters[v].approval_count) as u64;
            let price = inst.costs.price(v, t as i64).finite()?;
            Some(Buy { voter: v, t, price, shape })
        })
        .collect();
    let ctx = Ctx {
        inst,
        axis_pos,
        buys,
        scores: truncated_scores(e, m),
        epsilon: opts.epsilon,
        seed: opts.seed,
        trials: opts.trials,
    };
    let budgets: Vec<u64> = match opts.budget.or(inst.budget) {
        Some(Cost::Finite(b)) => vec![b],
        _ => {
            let most: u64 = inst
                .costs
                .rows
                .iter()
                .map(|r| r.iter().filter_map(|c| c.finite()).max().unwrap_or(0))
                .sum();
            (1..=most).collect()
        }
    };
    let max_bp = opts.beta_prime.unwrap_or((n * m) as u64);
    for budget in budgets {
        for bp in 1..=max_bp {
            if let Some((_, deltas, tag)) = ctx.run(budget, bp) {
                return inst.tagged(deltas, tag);
            }
        }
    }
    inst.infeasible()
}
