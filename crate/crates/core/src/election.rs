//! Elections, voting rules and winner determination.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ElectionError {
    #[error("candidate index {0} out of range")]
    CandidateOutOfRange(usize),
    #[error("voter index {0} out of range")]
    VoterOutOfRange(usize),
    #[error("voter {0}: preference is not a permutation of the candidates")]
    NotPermutation(usize),
    #[error("voter {voter}: approval count {count} exceeds {m}")]
    ApprovalOutOfRange { voter: usize, count: usize, m: usize },
    #[error("action has length {got}, expected {expected}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("round {round} out of range 1..={m}")]
    RoundOutOfRange { round: usize, m: usize },
    #[error("election has no candidates")]
    NoCandidates,
    #[error("election has no voters")]
    NoVoters,
    #[error("unknown rule `{0}`")]
    UnknownRule(String),
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Voter {
    /// Candidate indices, most preferred first.
    pub preference: Vec<usize>,
    pub approval_count: usize,
}

impl Voter {
    pub fn new(preference: Vec<usize>, approval_count: usize) -> Self {
        Voter {
            preference,
            approval_count,
        }
    }

    /// 1-based position of `c`; panics if absent.
    pub fn rank_of(&self, c: usize) -> usize {
        self.preference
            .iter()
            .position(|&x| x == c)
            .expect("candidate missing from preference")
            + 1
    }

    pub fn approves(&self, c: usize) -> bool {
        self.rank_of(c) <= self.approval_count
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Election {
    pub candidates: Vec<String>,
    pub designated: usize,
    pub voters: Vec<Voter>,
}

impl Election {
    /// Builds an election with default names `c0, c1, ...`.
    pub fn new(m: usize, designated: usize, voters: Vec<Voter>) -> Result<Self, ElectionError> {
        let candidates = (0..m).map(|i| format!("c{i}")).collect();
        Self::with_names(candidates, designated, voters)
    }

    pub fn with_names(
        candidates: Vec<String>,
        designated: usize,
        voters: Vec<Voter>,
    ) -> Result<Self, ElectionError> {
        let e = Election {
            candidates,
            designated,
            voters,
        };
        e.validate()?;
        Ok(e)
    }

    pub fn validate(&self) -> Result<(), ElectionError> {
        let m = self.m();
        if m == 0 {
            return Err(ElectionError::NoCandidates);
        }
        if self.designated >= m {
            return Err(ElectionError::CandidateOutOfRange(self.designated));
        }
        for (i, v) in self.voters.iter().enumerate() {
            if !is_permutation(&v.preference, m) {
                return Err(ElectionError::NotPermutation(i));
            }
            if v.approval_count > m {
                return Err(ElectionError::ApprovalOutOfRange {
                    voter: i,
                    count: v.approval_count,
                    m,
                });
            }
        }
        Ok(())
    }

    pub fn m(&self) -> usize {
        self.candidates.len()
    }

    pub fn n(&self) -> usize {
        self.voters.len()
    }

    /// Strict majority threshold `floor(n/2) + 1`.
    pub fn majority(&self) -> usize {
        self.n() / 2 + 1
    }

    pub fn p(&self) -> usize {
        self.designated
    }
}

pub(crate) fn is_permutation(pref: &[usize], m: usize) -> bool {
    if pref.len() != m {
        return false;
    }
    let mut seen = vec![false; m];
    for &c in pref {
        if c >= m || seen[c] {
            return false;
        }
        seen[c] = true;
    }
    true
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum RuleId {
    KApproval(usize),
    BucklinClassic,
    BucklinSimplified,
    SPAV,
    FallbackClassic,
    FallbackSimplified,
}

impl RuleId {
    pub const ALL_BASE: [RuleId; 5] = [
        RuleId::BucklinClassic,
        RuleId::BucklinSimplified,
        RuleId::SPAV,
        RuleId::FallbackClassic,
        RuleId::FallbackSimplified,
    ];

    /// True for the rules where approval counts matter.
    pub fn uses_approvals(self) -> bool {
        matches!(
            self,
            RuleId::SPAV | RuleId::FallbackClassic | RuleId::FallbackSimplified
        )
    }
}

impl fmt::Display for RuleId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RuleId::KApproval(k) => write!(f, "approval-{k}"),
            RuleId::BucklinClassic => f.write_str("bucklin"),
            RuleId::BucklinSimplified => f.write_str("bucklin-simplified"),
            RuleId::SPAV => f.write_str("spav"),
            RuleId::FallbackClassic => f.write_str("fallback"),
            RuleId::FallbackSimplified => f.write_str("fallback-simplified"),
        }
    }
}

impl FromStr for RuleId {
    type Err = ElectionError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim().to_ascii_lowercase();
        Ok(match s.as_str() {
            "bucklin" | "bucklin-classic" => RuleId::BucklinClassic,
            "bucklin-simplified" | "simplified-bucklin" => RuleId::BucklinSimplified,
            "spav" | "sp-av" => RuleId::SPAV,
            "fallback" | "fallback-classic" => RuleId::FallbackClassic,
            "fallback-simplified" | "simplified-fallback" => RuleId::FallbackSimplified,
            other => {
                let k = other
                    .strip_prefix("approval-")
                    .and_then(|k| k.parse::<usize>().ok())
                    .filter(|&k| k >= 1);
                match k {
                    Some(k) => RuleId::KApproval(k),
                    None => return Err(ElectionError::UnknownRule(s.clone())),
                }
            }
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WinnerReport {
    /// Sorted candidate indices.
    pub winners: Vec<usize>,
    /// `None` for SP-AV and for the approval default of Fallback.
    pub winning_round: Option<usize>,
    pub scores: Vec<usize>,
}

impl WinnerReport {
    pub fn contains(&self, c: usize) -> bool {
        self.winners.binary_search(&c).is_ok()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Axis {
    pub order: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ShiftAction {
    pub shifts: Vec<usize>,
}

impl ShiftAction {
    pub fn zero(n: usize) -> Self {
        ShiftAction { shifts: vec![0; n] }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PushAction {
    pub deltas: Vec<i64>,
}

impl PushAction {
    pub fn zero(n: usize) -> Self {
        PushAction { deltas: vec![0; n] }
    }

    pub fn total_change(&self) -> u64 {
        self.deltas.iter().map(|d| d.unsigned_abs()).sum()
    }
}

pub fn rank(e: &Election, c: usize, v: usize) -> Result<usize, ElectionError> {
    if c >= e.m() {
        return Err(ElectionError::CandidateOutOfRange(c));
    }
    let voter = e.voters.get(v).ok_or(ElectionError::VoterOutOfRange(v))?;
    Ok(voter.rank_of(c))
}

pub fn k_approval_scores(e: &Election, k: usize) -> Result<Vec<usize>, ElectionError> {
    if k == 0 || k > e.m() {
        return Err(ElectionError::RoundOutOfRange { round: k, m: e.m() });
    }
    Ok(top_scores(e, k))
}

/// Points from the top `k` positions (`k` may be 0 or exceed m).
pub(crate) fn top_scores(e: &Election, k: usize) -> Vec<usize> {
    let mut s = vec![0; e.m()];
    for v in &e.voters {
        for &c in v.preference.iter().take(k) {
            s[c] += 1;
        }
    }
    s
}

/// Round-`r` scores on approval-truncated preferences.
pub fn truncated_scores(e: &Election, r: usize) -> Vec<usize> {
    let mut s = vec![0; e.m()];
    for v in &e.voters {
        for &c in v.preference.iter().take(r.min(v.approval_count)) {
            s[c] += 1;
        }
    }
    s
}

pub fn approval_scores(e: &Election) -> Vec<usize> {
    truncated_scores(e, e.m())
}

fn argmax(scores: &[usize]) -> Vec<usize> {
    let best = scores.iter().copied().max().unwrap_or(0);
    (0..scores.len()).filter(|&c| scores[c] == best).collect()
}

fn bucklin_like(
    e: &Election,
    simplified: bool,
    score_at: impl Fn(usize) -> Vec<usize>,
    last_round: usize,
) -> Option<WinnerReport> {
    let maj = e.majority();
    for r in 1..=last_round {
        let s = score_at(r);
        if s.iter().any(|&x| x >= maj) {
            let winners = if simplified {
                (0..s.len()).filter(|&c| s[c] >= maj).collect()
            } else {
                argmax(&s)
            };
            return Some(WinnerReport {
                winners,
                winning_round: Some(r),
                scores: s,
            });
        }
    }
    None
}

pub fn winners(e: &Election, rule: RuleId) -> Result<WinnerReport, ElectionError> {
    let m = e.m();
    if m == 0 {
        return Err(ElectionError::NoCandidates);
    }
    if e.n() == 0 {
        return Err(ElectionError::NoVoters);
    }
    Ok(match rule {
        RuleId::KApproval(k) => {
            let s = k_approval_scores(e, k)?;
            WinnerReport {
                winners: argmax(&s),
                winning_round: Some(k),
                scores: s,
            }
        }
        RuleId::BucklinClassic | RuleId::BucklinSimplified => bucklin_like(
            e,
            rule == RuleId::BucklinSimplified,
            |r| top_scores(e, r),
            m,
        )
        .expect("round m always yields a majority"),
        RuleId::SPAV => {
            let s = approval_scores(e);
            WinnerReport {
                winners: argmax(&s),
                winning_round: None,
                scores: s,
            }
        }
        RuleId::FallbackClassic | RuleId::FallbackSimplified => {
            let simplified = rule == RuleId::FallbackSimplified;
            match bucklin_like(e, simplified, |r| truncated_scores(e, r), m) {
                Some(rep) => rep,
                None => {
                    let s = approval_scores(e);
                    WinnerReport {
                        winners: argmax(&s),
                        winning_round: None,
                        scores: s,
                    }
                }
            }
        }
    })
}

/// Whether the designated candidate wins under `rule`.
pub fn designated_wins(e: &Election, rule: RuleId) -> bool {
    winners(e, rule)
        .map(|r| r.contains(e.designated))
        .unwrap_or(false)
}

/// Checks that every prefix of every vote is an interval of `axis`.
pub fn verify_axis(e: &Election, axis: &Axis) -> bool {
    let m = e.m();
    if !is_permutation(&axis.order, m) {
        return false;
    }
    let mut pos = vec![0usize; m];
    for (i, &c) in axis.order.iter().enumerate() {
        pos[c] = i;
    }
    e.voters.iter().all(|v| {
        let mut lo = usize::MAX;
        let mut hi = 0usize;
        v.preference.iter().enumerate().all(|(j, &c)| {
            lo = lo.min(pos[c]);
            hi = hi.max(pos[c]);
            hi - lo == j
        })
    })
}

/// Finds a societal axis by placing candidates from the outside in.
///
/// The candidate ranked last among the remaining ones by some voter must
/// sit at an end of the remaining interval; each placement is checked
/// against every triple in which the placed candidate lies in the middle.
pub fn is_single_peaked(e: &Election) -> Option<Axis> {
    let m = e.m();
    if m <= 2 {
        return Some(Axis {
            order: (0..m).collect(),
        });
    }
    let mut votes: Vec<&Vec<usize>> = e.voters.iter().map(|v| &v.preference).collect();
    votes.sort();
    votes.dedup();
    let pos: Vec<Vec<usize>> = votes
        .iter()
        .map(|p| {
            let mut ps = vec![0; m];
            for (i, &c) in p.iter().enumerate() {
                ps[c] = i;
            }
            ps
        })
        .collect();
    let mut st = AxisSearch {
        votes: &votes,
        pos: &pos,
        side: vec![0u8; m],
        left: Vec::new(),
        right: Vec::new(),
        remaining: m,
    };
    if st.search() {
        let mut order = st.left.clone();
        order.extend(st.right.iter().rev());
        Some(Axis { order })
    } else {
        None
    }
}

struct AxisSearch<'a> {
    votes: &'a [&'a Vec<usize>],
    pos: &'a [Vec<usize>],
    /// 0 = unplaced, 1 = left, 2 = right.
    side: Vec<u8>,
    left: Vec<usize>,
    right: Vec<usize>,
    remaining: usize,
}

impl AxisSearch<'_> {
    fn search(&mut self) -> bool {
        if self.remaining == 0 {
            return true;
        }
        let mut last: Vec<usize> = Vec::new();
        for v in self.votes {
            let w = *v.iter().rev().find(|&&c| self.side[c] == 0).unwrap();
            if !last.contains(&w) {
                last.push(w);
                if last.len() > 2 {
                    return false;
                }
            }
        }
        let x = *last.iter().min().unwrap();
        let first = self.left.is_empty() && self.right.is_empty();
        for s in [1u8, 2u8] {
            if first && s == 2 {
                break;
            }
            if self.placeable(x, s) {
                self.side[x] = s;
                if s == 1 {
                    self.left.push(x);
                } else {
                    self.right.push(x);
                }
                self.remaining -= 1;
                if self.search() {
                    return true;
                }
                self.remaining += 1;
                if s == 1 {
                    self.left.pop();
                } else {
                    self.right.pop();
                }
                self.side[x] = 0;
            }
        }
        false
    }

    /// No voter may rank `x` below both its best candidate outside on side
    /// `s` and its best candidate on the other side of `x`.
    fn placeable(&self, x: usize, s: u8) -> bool {
        let outer = if s == 1 { &self.left } else { &self.right };
        if outer.is_empty() {
            return true;
        }
        for (vi, v) in self.votes.iter().enumerate() {
            let px = self.pos[vi][x];
            let best_outer = outer.iter().map(|&c| self.pos[vi][c]).min().unwrap();
            if best_outer > px {
                continue;
            }
            let best_inner = v
                .iter()
                .position(|&c| c != x && self.side[c] != s)
                .unwrap_or(usize::MAX);
            if best_inner < px {
                return false;
            }
        }
        true
    }
}

pub fn apply_shift(e: &Election, action: &ShiftAction) -> Result<Election, ElectionError> {
    if action.shifts.len() != e.n() {
        return Err(ElectionError::LengthMismatch {
            expected: e.n(),
            got: action.shifts.len(),
        });
    }
    let p = e.designated;
    let mut out = e.clone();
    for (v, &t) in out.voters.iter_mut().zip(&action.shifts) {
        if t == 0 {
            continue;
        }
        let from = v.rank_of(p) - 1;
        let to = from.saturating_sub(t);
        v.preference.remove(from);
        v.preference.insert(to, p);
    }
    Ok(out)
}

pub fn apply_push(e: &Election, action: &PushAction) -> Result<Election, ElectionError> {
    if action.deltas.len() != e.n() {
        return Err(ElectionError::LengthMismatch {
            expected: e.n(),
            got: action.deltas.len(),
        });
    }
    let m = e.m() as i64;
    let mut out = e.clone();
    for (v, &t) in out.voters.iter_mut().zip(&action.deltas) {
        v.approval_count = (v.approval_count as i64 + t).clamp(0, m) as usize;
    }
    Ok(out)
}
