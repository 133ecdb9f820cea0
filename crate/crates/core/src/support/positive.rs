//! Color-coding search for support bribery when approval counts may only grow.
//!
//! Each unit of p's gain is a color. A rival that may gain only `cap` more
//! points is allowed `cap` colors, and a bribed voter must take a color that
//! every rival it pulls in is allowed. A matching between colors and voters
//! then picks the cheapest voters.

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::cost::Cost;
use crate::election::{truncated_scores, RuleId};
use crate::flow::min_weight_bipartite_matching;
use crate::solution::{BriberySolution, TrialTag};

use super::{SupportError, SupportInstance, FPT_RULES};

/// Colorings are enumerated outright when there are at most this many.
pub const EXHAUSTIVE_LIMIT: u128 = 100_000;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PositiveOptions {
    pub seed: u64,
    /// Random colorings per guess; `None` picks [`default_trials`].
    pub trials: Option<u64>,
    /// Enumerate all colorings when few enough exist.
    pub exhaustive: bool,
}

impl Default for PositiveOptions {
    fn default() -> Self {
        PositiveOptions {
            seed: 0,
            trials: None,
            exhaustive: true,
        }
    }
}

/// `ceil(3 * (beta_prime + 1)^beta_prime)`, capped at 10^4.
pub fn default_trials(beta_prime: u64) -> u64 {
    let b = beta_prime.min(16) as u32;
    (beta_prime + 1).checked_pow(b).map_or(10_000, |x| (3 * x).min(10_000))
}

/// A voter that could start approving p.
#[derive(Clone)]
struct Eligible {
    voter: usize,
    /// Required increase: rank of p minus the current approval count.
    t: u64,
    price: Cost,
    /// Rivals pulled in by the increase.
    rivals: Vec<usize>,
    /// Whether p's extra point lands before the winning round.
    early: bool,
}

/// One `(round, gain)` guess with its per-candidate caps.
struct Guess {
    voters: Vec<Eligible>,
    gain: usize,
    /// Colors each restricted rival may use; `None` for unrestricted.
    caps: Vec<Option<usize>>,
    p_cap: Option<usize>,
}

impl Guess {
    fn colorings(&self) -> u128 {
        let choose = |n: usize, k: usize| -> u128 {
            let mut r: u128 = 1;
            for i in 0..k {
                r = r * (n - i) as u128 / (i + 1) as u128;
            }
            r
        };
        self.caps
            .iter()
            .chain(std::iter::once(&self.p_cap))
            .flatten()
            .try_fold(1u128, |a, &k| a.checked_mul(choose(self.gain, k)))
            .unwrap_or(u128::MAX)
    }
}

fn guesses(inst: &SupportInstance, beta_prime: u64) -> Vec<Guess> {
    let e = &inst.election;
    let (m, n, p) = (e.m(), e.n(), e.p());
    let half = (n / 2) as i64;
    let maj = e.majority() as i64;
    let total = truncated_scores(e, m);
    let rounds: Vec<usize> = if inst.rule == RuleId::SPAV { vec![m + 1] } else { (1..=m + 1).collect() };
    let mut out = Vec::new();
    for round in rounds {
        let extra = round > m;
        let (sr, sprev) = if extra {
            (total.clone(), total.clone())
        } else {
            (truncated_scores(e, round), truncated_scores(e, round - 1))
        };
        let candidates: Vec<Eligible> = e
            .voters
            .iter()
            .enumerate()
            .filter_map(|(v, voter)| {
                let rp = voter.rank_of(p);
                let ell = voter.approval_count;
                if rp <= ell || (!extra && rp > round) {
                    return None;
                }
                let t = (rp - ell) as u64;
                let price = inst.costs.price(v, t as i64);
                if t > beta_prime || !price.is_finite() {
                    return None;
                }
                Some(Eligible {
                    voter: v,
                    t,
                    price,
                    rivals: voter.preference[ell..rp - 1].to_vec(),
                    early: !extra && rp < round,
                })
            })
            .collect();
        for gain in 1..=beta_prime.min(candidates.len() as u64).min(63) as usize {
            let g = gain as i64;
            let cap_of = |c: usize| -> i64 {
                match (inst.rule, extra) {
                    (RuleId::SPAV, _) => total[p] as i64 + g - total[c] as i64,
                    (_, true) => half.min(total[p] as i64 + g) - total[c] as i64,
                    (RuleId::FallbackClassic, false) => {
                        (half - sprev[c] as i64).min(sr[p] as i64 + g - sr[c] as i64)
                    }
                    _ => half - sprev[c] as i64,
                }
            };
            if extra && inst.rule != RuleId::SPAV && total[p] as i64 + g > half {
                continue;
            }
            if !extra && (sr[p] as i64 + g) < maj {
                continue;
            }
            let mut caps = vec![None; m];
            let mut bad = false;
            for c in (0..m).filter(|&c| c != p) {
                let k = cap_of(c);
                if k < 0 {
                    bad = true;
                } else if (k as usize) < gain {
                    caps[c] = Some(k as usize);
                }
            }
            let p_cap = if extra {
                None
            } else {
                let k = half - sprev[p] as i64;
                if k < 0 {
                    bad = true;
                }
                (k >= 0 && (k as usize) < gain).then_some(k.max(0) as usize)
            };
            if bad {
                continue;
            }
            // Drop caps on rivals no eligible voter pulls in.
            let mut touched = vec![false; m];
            let mut early = false;
            for el in &candidates {
                early |= el.early;
                for &c in &el.rivals {
                    touched[c] = true;
                }
            }
            for c in 0..m {
                if !touched[c] {
                    caps[c] = None;
                }
            }
            out.push(Guess {
                voters: candidates.clone(),
                gain,
                caps,
                p_cap: if early { p_cap } else { None },
            });
        }
    }
    out
}

/// All nondecreasing sequences from `values` of length `len` summing to `sum`.
fn multisets(values: &[u64], len: usize, sum: u64) -> Vec<Vec<u64>> {
    fn go(values: &[u64], start: usize, len: usize, sum: u64, cur: &mut Vec<u64>, out: &mut Vec<Vec<u64>>) {
        if cur.len() == len {
            if sum == 0 {
                out.push(cur.clone());
            }
            return;
        }
        for i in start..values.len() {
            let v = values[i];
            if v * (len - cur.len()) as u64 > sum {
                break;
            }
            cur.push(v);
            go(values, i, len, sum - v, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(values, 0, len, sum, &mut Vec::new(), &mut out);
    out
}

/// Color masks: one per rival (u64::MAX when unrestricted) and one for p.
struct Coloring {
    rivals: Vec<u64>,
    p: u64,
}

fn random_coloring(g: &Guess, rng: &mut ChaCha8Rng) -> Coloring {
    let mut pick = |cap: Option<usize>| -> u64 {
        match cap {
            None => u64::MAX,
            Some(k) => sample(rng, g.gain, k).iter().fold(0u64, |a, i| a | 1 << i),
        }
    };
    let rivals = g.caps.iter().map(|&c| pick(c)).collect();
    let p = pick(g.p_cap);
    Coloring { rivals, p }
}

/// Every coloring of the restricted candidates, in a fixed order.
fn all_colorings(g: &Guess) -> Vec<Coloring> {
    let subsets = |k: usize| -> Vec<u64> {
        let mut out = Vec::new();
        let mut idx: Vec<usize> = (0..k).collect();
        loop {
            out.push(idx.iter().fold(0u64, |a, &i| a | 1 << i));
            let Some(i) = (0..k).rev().find(|&i| idx[i] < g.gain - k + i) else { return out };
            idx[i] += 1;
            for j in i + 1..k {
                idx[j] = idx[j - 1] + 1;
            }
        }
    };
    let slots: Vec<Option<usize>> = g.caps.iter().copied().chain(std::iter::once(g.p_cap)).collect();
    let choices: Vec<Vec<u64>> = slots
        .iter()
        .map(|c| match c {
            None => vec![u64::MAX],
            Some(k) => subsets(*k),
        })
        .collect();
    let mut out = Vec::new();
    let mut idx = vec![0usize; choices.len()];
    loop {
        let masks: Vec<u64> = idx.iter().enumerate().map(|(i, &x)| choices[i][x]).collect();
        let (rivals, p) = masks.split_at(masks.len() - 1);
        out.push(Coloring {
            rivals: rivals.to_vec(),
            p: p[0],
        });
        let mut i = choices.len();
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            if idx[i] + 1 < choices[i].len() {
                idx[i] += 1;
                break;
            }
            idx[i] = 0;
        }
    }
}

/// Cheapest voter set that realises the gains `ts` under `col`.
fn matched(inst: &SupportInstance, g: &Guess, ts: &[u64], col: &Coloring) -> Option<Vec<i64>> {
    let n = inst.election.n();
    let masks: Vec<u64> = g
        .voters
        .iter()
        .map(|el| {
            let mut m = el.rivals.iter().fold(u64::MAX, |a, &c| a & col.rivals[c]);
            if el.early {
                m &= col.p;
            }
            m
        })
        .collect();
    let w: Vec<Vec<Cost>> = ts
        .iter()
        .enumerate()
        .map(|(x, &t)| {
            g.voters
                .iter()
                .zip(&masks)
                .map(|(el, &mask)| {
                    if el.t == t && mask >> x & 1 == 1 {
                        el.price
                    } else {
                        Cost::Infinite
                    }
                })
                .collect()
        })
        .collect();
    let (pairs, _) = min_weight_bipartite_matching(&w, ts.len(), g.voters.len()).ok()??;
    let mut d = vec![0i64; n];
    for (_, j) in pairs {
        d[g.voters[j].voter] = g.voters[j].t as i64;
    }
    Some(d)
}

/// Best bribery found whose increases sum to exactly `beta_prime`; costs
/// must forbid every decrease. Finite answers are always verified, but a
/// cheaper one may be missed when colorings are sampled.
pub fn solve_support_positive_fpt(
    inst: &SupportInstance,
    beta_prime: u64,
    opts: &PositiveOptions,
) -> Result<BriberySolution, SupportError> {
    inst.require_rule("fpt-positive", &FPT_RULES)?;
    if !inst.costs.is_positive() {
        return Err(SupportError::WrongCostClass("positive"));
    }
    let n = inst.election.n();
    if beta_prime == 0 {
        return if inst.wins(&vec![0; n]) { inst.solution(vec![0; n]) } else { inst.infeasible() };
    }
    let trials = opts.trials.unwrap_or_else(|| default_trials(beta_prime));
    let mut best: Option<(Cost, Vec<i64>, Option<TrialTag>)> = None;
    let mut offer = |d: Vec<i64>, tag: Option<TrialTag>| {
        let c = inst.cost_of(&d);
        if best.as_ref().is_some_and(|(b, _, _)| *b <= c) {
            return;
        }
        if inst.wins(&d) {
            best = Some((c, d, tag));
        }
    };
    let mut sampled: Vec<(Guess, Vec<Vec<u64>>)> = Vec::new();
    for g in guesses(inst, beta_prime) {
        let mut values: Vec<u64> = g.voters.iter().map(|el| el.t).collect();
        values.sort_unstable();
        values.dedup();
        let seqs = multisets(&values, g.gain, beta_prime);
        if seqs.is_empty() {
            continue;
        }
        let count = g.colorings();
        if count == 1 || (opts.exhaustive && count <= EXHAUSTIVE_LIMIT) {
            for col in all_colorings(&g) {
                for ts in &seqs {
                    if let Some(d) = matched(inst, &g, ts, &col) {
                        offer(d, None);
                    }
                }
            }
        } else {
            sampled.push((g, seqs));
        }
    }
    if !sampled.is_empty() {
        for trial in 0..trials {
            let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
            rng.set_stream(trial);
            for (g, seqs) in &sampled {
                let col = random_coloring(g, &mut rng);
                for ts in seqs {
                    if let Some(d) = matched(inst, g, ts, &col) {
                        offer(
                            d,
                            Some(TrialTag {
                                seed: opts.seed,
                                trial,
                            }),
                        );
                    }
                }
            }
        }
    }
    match best {
        Some((_, d, tag)) => inst.tagged(d, tag),
        None => inst.infeasible(),
    }
}
