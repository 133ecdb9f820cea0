//! Fast replay of push actions for exhaustive search.
//!
//! Options of a voter that approve the same set of outcome-relevant
//! candidates are merged into the one closest to no change, which is also
//! the cheapest of them. Candidates that can never reach a majority nor
//! catch up with p's lowest possible score are dropped. The search cuts a
//! branch once per-round score bounds over the undecided voters show that
//! p cannot win.

use crate::cost::Cost;
use crate::election::RuleId;

use std::cell::Cell;

use super::{SupportError, SupportInstance, ENUMERATION_LIMIT, SEARCH_SPACE_LIMIT};

pub(crate) struct VOpt {
    pub delta: i64,
    pub cost: Cost,
    /// `(relevant index, 1-based position)` of every relevant candidate approved.
    hits: Vec<(usize, usize)>,
}

pub(crate) struct Evaluator {
    rule: RuleId,
    m: usize,
    maj: usize,
    /// Relevant candidates; index 0 is p.
    rel: Vec<usize>,
    pub opts: Vec<Vec<VOpt>>,
    /// Whether approvals matter at all under the rule.
    approvals_matter: bool,
    zero_wins: bool,
    /// `lo[v][c][r]`, `hi[v][c][r]`: fewest and most points relevant
    /// candidate `c` can get within the top `r` positions from voters
    /// `v..n`. Empty when the search space is over the limit.
    lo: Vec<Vec<Vec<u32>>>,
    hi: Vec<Vec<Vec<u32>>>,
    visited: Cell<u128>,
}

struct Tally {
    cnt: Vec<Vec<u32>>,
    total: Vec<u32>,
}

impl Evaluator {
    pub fn new(inst: &SupportInstance) -> Self {
        let e = &inst.election;
        let (m, n, p) = (e.m(), e.n(), e.p());
        let rule = inst.rule;
        let approvals_matter = matches!(rule, RuleId::SPAV | RuleId::FallbackClassic | RuleId::FallbackSimplified);
        let zero_wins = inst.wins(&vec![0; n]);
        if !approvals_matter {
            return Evaluator {
                rule,
                m,
                maj: e.majority(),
                rel: vec![p],
                opts: (0..n)
                    .map(|_| {
                        vec![VOpt {
                            delta: 0,
                            cost: Cost::ZERO,
                            hits: Vec::new(),
                        }]
                    })
                    .collect(),
                approvals_matter,
                zero_wins,
                lo: Vec::new(),
                hi: Vec::new(),
                visited: Cell::new(0),
            };
        }
        let positive = inst.costs.is_positive();
        // Raw options per voter: new approval counts with finite price.
        let raw: Vec<Vec<usize>> = e
            .voters
            .iter()
            .enumerate()
            .map(|(i, v)| {
                let ell = v.approval_count;
                let rp = v.rank_of(p);
                (0..=m)
                    .filter(|&l| inst.costs.price_to(i, l).is_finite())
                    .filter(|&l| !positive || l == ell || (rp > ell && l == rp))
                    .collect()
            })
            .collect();
        let mut ub = vec![0usize; m];
        let mut lb_p = 0usize;
        for (v, ls) in e.voters.iter().zip(&raw) {
            let lmax = *ls.iter().max().unwrap();
            let lmin = *ls.iter().min().unwrap();
            for (pos, &c) in v.preference.iter().enumerate() {
                if pos < lmax {
                    ub[c] += 1;
                }
            }
            if v.rank_of(p) <= lmin {
                lb_p += 1;
            }
        }
        let maj = e.majority();
        let fallback = rule != RuleId::SPAV;
        let mut rel = vec![p];
        rel.extend((0..m).filter(|&c| c != p && (ub[c] >= lb_p || (fallback && ub[c] >= maj))));
        let mut rel_index = vec![usize::MAX; m];
        for (i, &c) in rel.iter().enumerate() {
            rel_index[c] = i;
        }
        let opts = e
            .voters
            .iter()
            .enumerate()
            .map(|(i, v)| {
                let ell = v.approval_count as i64;
                let mut list: Vec<VOpt> = Vec::new();
                let mut ls = raw[i].clone();
                ls.sort_by_key(|&l| ((l as i64 - ell).abs(), l));
                for l in ls {
                    let hits: Vec<(usize, usize)> = v.preference[..l]
                        .iter()
                        .enumerate()
                        .filter(|&(_, &c)| rel_index[c] != usize::MAX)
                        .map(|(pos, &c)| (rel_index[c], pos + 1))
                        .collect();
                    if list.iter().any(|o| o.hits == hits) {
                        continue;
                    }
                    let delta = l as i64 - ell;
                    list.push(VOpt {
                        delta,
                        cost: inst.costs.price(i, delta),
                        hits,
                    });
                }
                list
            })
            .collect();
        let mut ev = Evaluator {
            rule,
            m,
            maj,
            rel,
            opts,
            approvals_matter,
            zero_wins,
            lo: Vec::new(),
            hi: Vec::new(),
            visited: Cell::new(0),
        };
        if ev.size() <= SEARCH_SPACE_LIMIT {
            ev.build_bounds();
        }
        ev
    }

    fn build_bounds(&mut self) {
        let (n, k, m) = (self.opts.len(), self.rel.len(), self.m);
        let zero = vec![vec![0u32; m + 1]; k];
        let mut lo = vec![zero.clone(); n + 1];
        let mut hi = vec![zero; n + 1];
        for v in (0..n).rev() {
            for c in 0..k {
                // Position of c under each option, if approved.
                let pos: Vec<Option<usize>> = self.opts[v]
                    .iter()
                    .map(|o| o.hits.iter().find(|h| h.0 == c).map(|h| h.1))
                    .collect();
                for r in 0..=m {
                    let inside = pos.iter().map(|p| p.map_or(0, |p| (p <= r) as u32));
                    let (a, b) = inside.fold((1u32, 0u32), |(a, b), x| (a.min(x), b.max(x)));
                    lo[v][c][r] = lo[v + 1][c][r] + a;
                    hi[v][c][r] = hi[v + 1][c][r] + b;
                }
            }
        }
        self.lo = lo;
        self.hi = hi;
    }

    /// Whether some completion of the first `v` voters' choices (tallied in
    /// `t`) could still make p win. Never rules out a winning completion.
    fn may_win(&self, t: &Tally, v: usize) -> bool {
        if !self.approvals_matter || self.lo.is_empty() {
            return true;
        }
        let (k, m) = (self.rel.len(), self.m);
        let (lo, hi) = (&self.lo[v], &self.hi[v]);
        let mut cum = vec![vec![0u32; m + 1]; k];
        for c in 0..k {
            let mut acc = 0;
            for r in 0..=m {
                acc += t.cnt[c][r];
                cum[c][r] = acc;
            }
        }
        let low = |c: usize, r: usize| cum[c][r] + lo[c][r];
        let high = |c: usize, r: usize| cum[c][r] + hi[c][r];
        let p_top = high(0, m);
        let approval_phase = (1..k).all(|c| low(c, m) <= p_top);
        if self.rule == RuleId::SPAV {
            return approval_phase;
        }
        let maj = self.maj as u32;
        if approval_phase && (0..k).all(|c| low(c, m) < maj) {
            return true;
        }
        let classic = self.rule == RuleId::FallbackClassic;
        (1..=m).any(|r| {
            let hp = high(0, r);
            hp >= maj
                && (1..k).all(|c| low(c, r - 1) < maj)
                && (!classic || (1..k).all(|c| low(c, r) <= hp))
        })
    }

    pub fn size(&self) -> u128 {
        self.opts
            .iter()
            .try_fold(1u128, |a, o| a.checked_mul(o.len() as u128))
            .unwrap_or(u128::MAX)
    }

    pub fn check_guard(&self) -> Result<(), SupportError> {
        let s = self.size();
        if s > SEARCH_SPACE_LIMIT {
            return Err(SupportError::GuardExceeded(s));
        }
        Ok(())
    }

    pub fn deltas(&self, choice: &[usize]) -> Vec<i64> {
        choice.iter().enumerate().map(|(i, &o)| self.opts[i][o].delta).collect()
    }

    fn tally(&self) -> Tally {
        Tally {
            cnt: vec![vec![0; self.m + 2]; self.rel.len()],
            total: vec![0; self.rel.len()],
        }
    }

    fn add(&self, t: &mut Tally, v: usize, o: usize, sign: i32) {
        for &(c, pos) in &self.opts[v][o].hits {
            t.cnt[c][pos] = (t.cnt[c][pos] as i32 + sign) as u32;
            t.total[c] = (t.total[c] as i32 + sign) as u32;
        }
    }

    fn p_wins(&self, t: &Tally) -> bool {
        if !self.approvals_matter {
            return self.zero_wins;
        }
        let argmax_p = || t.total.iter().all(|&x| x <= t.total[0]);
        if self.rule == RuleId::SPAV {
            return argmax_p();
        }
        let maj = self.maj as u32;
        let mut round = usize::MAX;
        let mut reach = vec![usize::MAX; self.rel.len()];
        for c in 0..self.rel.len() {
            if t.total[c] < maj {
                continue;
            }
            let mut acc = 0;
            for (pos, &x) in t.cnt[c].iter().enumerate() {
                acc += x;
                if acc >= maj {
                    reach[c] = pos;
                    break;
                }
            }
            round = round.min(reach[c]);
        }
        if round == usize::MAX {
            return argmax_p();
        }
        if self.rule == RuleId::FallbackSimplified {
            return reach[0] == round;
        }
        let score = |c: usize| t.cnt[c][..=round].iter().sum::<u32>();
        let sp = score(0);
        sp >= maj && (1..self.rel.len()).all(|c| score(c) <= sp)
    }

    pub fn wins(&self, choice: &[usize]) -> bool {
        let mut t = self.tally();
        for (v, &o) in choice.iter().enumerate() {
            self.add(&mut t, v, o, 1);
        }
        self.p_wins(&t)
    }

    /// Depth-first enumeration; `visit` sees every full choice whose running
    /// cost passed `keep`.
    fn dfs(
        &self,
        v: usize,
        cost: Cost,
        t: &mut Tally,
        choice: &mut Vec<usize>,
        keep: &mut dyn FnMut(Cost) -> bool,
        visit: &mut dyn FnMut(&[usize], Cost, bool),
    ) {
        if self.visited.get() > ENUMERATION_LIMIT {
            return;
        }
        if v == self.opts.len() {
            self.visited.set(self.visited.get() + 1);
            let w = self.p_wins(t);
            visit(choice, cost, w);
            return;
        }
        for o in 0..self.opts[v].len() {
            let c = cost + self.opts[v][o].cost;
            if !keep(c) {
                continue;
            }
            self.add(t, v, o, 1);
            if self.may_win(t, v + 1) {
                choice.push(o);
                self.dfs(v + 1, c, t, choice, keep, visit);
                choice.pop();
            }
            self.add(t, v, o, -1);
        }
    }

    /// Cheapest successful choice; the first found wins ties.
    pub fn cheapest(&self) -> Result<Option<(Cost, Vec<usize>)>, SupportError> {
        let best: std::cell::RefCell<Option<(Cost, Vec<usize>)>> = Default::default();
        let mut t = self.tally();
        let mut keep = |c: Cost| c.is_finite() && best.borrow().as_ref().is_none_or(|(b, _)| c < *b);
        let mut visit = |ch: &[usize], c: Cost, w: bool| {
            let mut b = best.borrow_mut();
            if w && b.as_ref().is_none_or(|(x, _)| c < *x) {
                *b = Some((c, ch.to_vec()));
            }
        };
        self.visited.set(0);
        self.dfs(0, Cost::ZERO, &mut t, &mut Vec::new(), &mut keep, &mut visit);
        self.finished()?;
        Ok(best.into_inner())
    }

    fn finished(&self) -> Result<(), SupportError> {
        match self.visited.get() {
            x if x > ENUMERATION_LIMIT => Err(SupportError::SearchLimit(ENUMERATION_LIMIT)),
            _ => Ok(()),
        }
    }

    pub fn all_successful_with_cost(&self, target: Cost) -> Result<Vec<Vec<usize>>, SupportError> {
        let mut out = Vec::new();
        let mut t = self.tally();
        let mut keep = |c: Cost| c <= target;
        let mut visit = |ch: &[usize], c: Cost, w: bool| {
            if w && c == target {
                out.push(ch.to_vec());
            }
        };
        self.visited.set(0);
        self.dfs(0, Cost::ZERO, &mut t, &mut Vec::new(), &mut keep, &mut visit);
        self.finished()?;
        Ok(out)
    }

    /// No other option vector between `choice` and zero succeeds.
    pub fn is_minimal(&self, choice: &[usize]) -> bool {
        // Options strictly between zero and the chosen one, on its side.
        let lower: Vec<Vec<usize>> = choice
            .iter()
            .enumerate()
            .map(|(v, &o)| {
                let d = self.opts[v][o].delta;
                (0..self.opts[v].len())
                    .filter(|&x| {
                        let dx = self.opts[v][x].delta;
                        dx == 0 || (dx.signum() == d.signum() && dx.abs() <= d.abs())
                    })
                    .collect()
            })
            .collect();
        let n = choice.len();
        let mut idx = vec![0usize; n];
        let mut cur: Vec<usize> = lower.iter().map(|l| l[0]).collect();
        loop {
            if cur != choice && self.wins(&cur) {
                return false;
            }
            let mut i = n;
            loop {
                if i == 0 {
                    return true;
                }
                i -= 1;
                if idx[i] + 1 < lower[i].len() {
                    idx[i] += 1;
                    cur[i] = lower[i][idx[i]];
                    break;
                }
                idx[i] = 0;
                cur[i] = lower[i][0];
            }
        }
    }
}
