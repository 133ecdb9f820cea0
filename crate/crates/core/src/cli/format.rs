//! Line-oriented instance files.
//!
//! ```text
//! election 3 2
//! rule bucklin
//! designated 0
//! names: p a b          # optional
//! vote: 1 0 2 | 2
//! vote: 2 1 0 | 1
//! shiftcost: 0 1 2 3    # optional, one per voter
//! supportcost: 1 0 1 2  # optional, one per voter, from -ell to m-ell
//! budget: 4             # optional
//! ```

use std::fmt::Write as _;

use thiserror::Error;

use crate::cost::{Cost, CostProfileError, ShiftCostProfile, SupportCostProfile};
use crate::election::{Election, ElectionError, RuleId, Voter};
use crate::shift::ShiftInstance;
use crate::support::SupportInstance;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("line {line}: {msg}")]
pub struct FormatError {
    pub line: usize,
    pub msg: String,
}

fn fail<T>(line: usize, msg: impl Into<String>) -> Result<T, FormatError> {
    Err(FormatError { line, msg: msg.into() })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InstanceFile {
    pub election: Election,
    pub rule: RuleId,
    pub shift_costs: Option<ShiftCostProfile>,
    pub support_costs: Option<SupportCostProfile>,
    pub budget: Option<Cost>,
}

impl InstanceFile {
    /// Missing shift prices default to unit prices.
    pub fn shift_instance(&self, rule: RuleId) -> ShiftInstance {
        let e = &self.election;
        let costs = self.shift_costs.clone().unwrap_or_else(|| ShiftCostProfile::unit(e.n(), e.m()));
        ShiftInstance {
            election: e.clone(),
            costs,
            rule,
        }
    }

    /// Missing support prices default to unit prices.
    pub fn support_instance(&self, rule: RuleId) -> SupportInstance {
        let e = &self.election;
        let costs = self.support_costs.clone().unwrap_or_else(|| {
            let approvals: Vec<usize> = e.voters.iter().map(|v| v.approval_count).collect();
            SupportCostProfile::unit(&approvals, e.m())
        });
        SupportInstance {
            election: e.clone(),
            costs,
            rule,
            budget: self.budget,
        }
    }

    pub fn from_support(inst: &SupportInstance) -> Self {
        InstanceFile {
            election: inst.election.clone(),
            rule: inst.rule,
            shift_costs: None,
            support_costs: Some(inst.costs.clone()),
            budget: inst.budget,
        }
    }
}

fn default_names(m: usize) -> Vec<String> {
    (0..m).map(|i| format!("c{i}")).collect()
}

fn cost_row(line: usize, body: &str, len: usize) -> Result<Vec<Cost>, FormatError> {
    let row: Vec<Cost> = body
        .split_whitespace()
        .map(|s| s.parse::<Cost>().or_else(|e| fail(line, e.to_string())))
        .collect::<Result<_, _>>()?;
    if row.len() != len {
        return fail(line, format!("expected {len} costs, found {}", row.len()));
    }
    Ok(row)
}

fn profile_error(e: CostProfileError, lines: &[usize], fallback: usize) -> FormatError {
    let voter = match e {
        CostProfileError::RowLength { voter, .. } | CostProfileError::OutOfDomain { voter, .. } => Some(voter),
        CostProfileError::NonzeroOrigin(v) | CostProfileError::NotMonotone(v) => Some(v),
        CostProfileError::VoterCount { .. } => None,
    };
    FormatError {
        line: voter.and_then(|v| lines.get(v).copied()).unwrap_or(fallback),
        msg: e.to_string(),
    }
}

pub fn parse_instance(text: &str) -> Result<InstanceFile, FormatError> {
    let mut header: Option<(usize, usize)> = None;
    let mut rule: Option<RuleId> = None;
    let mut designated: Option<(usize, usize)> = None;
    let mut names: Option<Vec<String>> = None;
    let mut votes: Vec<(usize, Voter)> = Vec::new();
    let mut shift_rows: Vec<(usize, Vec<Cost>)> = Vec::new();
    let mut support_rows: Vec<(usize, Vec<Cost>)> = Vec::new();
    let mut budget: Option<Cost> = None;
    let mut last = 0;
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        last = line;
        let (key, body) = match content.split_once(char::is_whitespace) {
            Some((k, b)) => (k, b.trim()),
            None => (content, ""),
        };
        if header.is_none() && key != "election" {
            return fail(line, "file must start with `election m n`");
        }
        let (m, _) = header.unwrap_or((0, 0));
        match key {
            "election" => {
                if header.is_some() {
                    return fail(line, "duplicate `election` header");
                }
                let xs: Vec<&str> = body.split_whitespace().collect();
                let nums: Option<Vec<usize>> = xs.iter().map(|s| s.parse().ok()).collect();
                match nums.as_deref() {
                    Some(&[m, n]) if m >= 1 && n >= 1 => header = Some((m, n)),
                    _ => return fail(line, "header must be `election m n` with m, n >= 1"),
                }
            }
            "rule" => {
                if rule.is_some() {
                    return fail(line, "duplicate `rule`");
                }
                rule = Some(body.parse().or_else(|e: ElectionError| fail(line, e.to_string()))?);
            }
            "designated" => {
                let d: usize = body.parse().or_else(|_| fail(line, "designated must be a candidate index"))?;
                if d >= m {
                    return fail(line, format!("designated candidate {d} out of range 0..{m}"));
                }
                designated = Some((line, d));
            }
            "names:" => {
                let ns: Vec<String> = body.split_whitespace().map(str::to_string).collect();
                if ns.len() != m {
                    return fail(line, format!("expected {m} names, found {}", ns.len()));
                }
                names = Some(ns);
            }
            "vote:" => {
                let Some((pref, ell)) = body.split_once('|') else {
                    return fail(line, "vote must be `vote: c1 ... cm | ell`");
                };
                let pref: Vec<usize> = pref
                    .split_whitespace()
                    .map(|s| s.parse::<usize>().or_else(|_| fail(line, format!("`{s}` is not a candidate index"))))
                    .collect::<Result<_, _>>()?;
                let mut seen = vec![false; m];
                if pref.len() != m || pref.iter().any(|&c| c >= m || std::mem::replace(&mut seen[c], true)) {
                    return fail(line, format!("preference is not a permutation of 0..{m}"));
                }
                let ell: usize = ell.trim().parse().or_else(|_| fail(line, "approval count must be a number"))?;
                if ell > m {
                    return fail(line, format!("approval count {ell} exceeds {m}"));
                }
                votes.push((line, Voter::new(pref, ell)));
            }
            "shiftcost:" => {
                let row = cost_row(line, body, m + 1)?;
                if row[0] != Cost::ZERO {
                    return fail(line, "shift cost of no change must be 0");
                }
                shift_rows.push((line, row));
            }
            "supportcost:" => support_rows.push((line, cost_row(line, body, m + 1)?)),
            "budget:" => {
                if budget.is_some() {
                    return fail(line, "duplicate `budget:`");
                }
                budget = Some(body.parse().or_else(|e: crate::cost::CostParseError| fail(line, e.to_string()))?);
            }
            other => return fail(line, format!("unknown directive `{other}`")),
        }
    }
    let Some((m, n)) = header else { return fail(1, "missing `election m n` header") };
    let rule = match rule {
        Some(r) => r,
        None => return fail(last, "missing `rule`"),
    };
    let (_, designated) = designated.map_or_else(|| fail(last, "missing `designated`"), Ok)?;
    if votes.len() != n {
        return fail(last, format!("expected {n} votes, found {}", votes.len()));
    }
    let vote_lines: Vec<usize> = votes.iter().map(|(l, _)| *l).collect();
    let voters: Vec<Voter> = votes.into_iter().map(|(_, v)| v).collect();
    let approvals: Vec<usize> = voters.iter().map(|v| v.approval_count).collect();
    let election = Election::with_names(names.unwrap_or_else(|| default_names(m)), designated, voters)
        .map_err(|e| FormatError {
            line: vote_lines[0],
            msg: e.to_string(),
        })?;
    let shift_costs = match shift_rows.len() {
        0 => None,
        k if k == n => {
            let lines: Vec<usize> = shift_rows.iter().map(|(l, _)| *l).collect();
            let rows = shift_rows.into_iter().map(|(_, r)| r).collect();
            Some(ShiftCostProfile::new(rows, m).map_err(|e| profile_error(e, &lines, last))?)
        }
        k => return fail(shift_rows[k - 1].0, format!("expected {n} shiftcost lines, found {k}")),
    };
    let support_costs = match support_rows.len() {
        0 => None,
        k if k == n => {
            let lines: Vec<usize> = support_rows.iter().map(|(l, _)| *l).collect();
            let rows = support_rows.into_iter().map(|(_, r)| r).collect();
            Some(SupportCostProfile::new(rows, approvals, m).map_err(|e| profile_error(e, &lines, last))?)
        }
        k => return fail(support_rows[k - 1].0, format!("expected {n} supportcost lines, found {k}")),
    };
    Ok(InstanceFile {
        election,
        rule,
        shift_costs,
        support_costs,
        budget,
    })
}

fn push_row(out: &mut String, key: &str, row: &[Cost]) {
    out.push_str(key);
    for c in row {
        write!(out, " {c}").unwrap();
    }
    out.push('\n');
}

/// Canonical text: comments dropped, directives in a fixed order.
pub fn serialize_instance(f: &InstanceFile) -> String {
    let e = &f.election;
    let mut out = String::new();
    writeln!(out, "election {} {}", e.m(), e.n()).unwrap();
    writeln!(out, "rule {}", f.rule).unwrap();
    writeln!(out, "designated {}", e.designated).unwrap();
    if e.candidates != default_names(e.m()) {
        writeln!(out, "names: {}", e.candidates.join(" ")).unwrap();
    }
    for v in &e.voters {
        out.push_str("vote:");
        for c in &v.preference {
            write!(out, " {c}").unwrap();
        }
        writeln!(out, " | {}", v.approval_count).unwrap();
    }
    for row in f.shift_costs.iter().flat_map(|p| &p.rows) {
        push_row(&mut out, "shiftcost:", row);
    }
    for row in f.support_costs.iter().flat_map(|p| &p.rows) {
        push_row(&mut out, "supportcost:", row);
    }
    if let Some(b) = f.budget {
        writeln!(out, "budget: {b}").unwrap();
    }
    out
}
