//! Bribery prices: finite non-negative integers or infinity.

use std::cmp::Ordering;
use std::fmt;
use std::iter::Sum;
use std::ops::Add;
use std::str::FromStr;

use thiserror::Error;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Cost {
    Finite(u64),
    Infinite,
}

impl Cost {
    pub const ZERO: Cost = Cost::Finite(0);

    pub fn is_finite(self) -> bool {
        matches!(self, Cost::Finite(_))
    }

    pub fn finite(self) -> Option<u64> {
        match self {
            Cost::Finite(x) => Some(x),
            Cost::Infinite => None,
        }
    }

    /// `self - other` for `self >= other`; infinite if `self` is.
    pub fn saturating_sub(self, other: Cost) -> Cost {
        match (self, other) {
            (Cost::Finite(a), Cost::Finite(b)) => Cost::Finite(a.saturating_sub(b)),
            (Cost::Infinite, _) => Cost::Infinite,
            (Cost::Finite(_), Cost::Infinite) => Cost::ZERO,
        }
    }
}

impl Default for Cost {
    fn default() -> Self {
        Cost::ZERO
    }
}

impl Ord for Cost {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (Cost::Finite(a), Cost::Finite(b)) => a.cmp(b),
            (Cost::Finite(_), Cost::Infinite) => Ordering::Less,
            (Cost::Infinite, Cost::Finite(_)) => Ordering::Greater,
            (Cost::Infinite, Cost::Infinite) => Ordering::Equal,
        }
    }
}

impl PartialOrd for Cost {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Add for Cost {
    type Output = Cost;

    fn add(self, rhs: Cost) -> Cost {
        match (self, rhs) {
            (Cost::Finite(a), Cost::Finite(b)) => a.checked_add(b).map_or(Cost::Infinite, Cost::Finite),
            _ => Cost::Infinite,
        }
    }
}

impl Sum for Cost {
    fn sum<I: Iterator<Item = Cost>>(iter: I) -> Cost {
        iter.fold(Cost::ZERO, |a, b| a + b)
    }
}

impl From<u64> for Cost {
    fn from(x: u64) -> Self {
        Cost::Finite(x)
    }
}

impl fmt::Display for Cost {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Cost::Finite(x) => write!(f, "{x}"),
            Cost::Infinite => f.write_str("inf"),
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("invalid cost `{0}`")]
pub struct CostParseError(pub String);

impl FromStr for Cost {
    type Err = CostParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "inf" => Ok(Cost::Infinite),
            _ => s
                .parse::<u64>()
                .map(Cost::Finite)
                .map_err(|_| CostParseError(s.to_string())),
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CostProfileError {
    #[error("voter {voter}: cost row has length {got}, expected {expected}")]
    RowLength { voter: usize, expected: usize, got: usize },
    #[error("voter {0}: cost of no change must be 0")]
    NonzeroOrigin(usize),
    #[error("voter {0}: cost row is not monotone away from no change")]
    NotMonotone(usize),
    #[error("profile has {got} rows for {expected} voters")]
    VoterCount { expected: usize, got: usize },
    #[error("voter {voter}: change {delta} outside the allowed range")]
    OutOfDomain { voter: usize, delta: i64 },
}

/// Per-voter shift prices `pi_i(0..=m)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ShiftCostProfile {
    pub rows: Vec<Vec<Cost>>,
}

impl ShiftCostProfile {
    pub fn new(rows: Vec<Vec<Cost>>, m: usize) -> Result<Self, CostProfileError> {
        let p = ShiftCostProfile { rows };
        p.validate(p.rows.len(), m)?;
        Ok(p)
    }

    /// `pi(t) = t` for every voter.
    pub fn unit(n: usize, m: usize) -> Self {
        ShiftCostProfile {
            rows: vec![(0..=m as u64).map(Cost::Finite).collect(); n],
        }
    }

    pub fn validate(&self, n: usize, m: usize) -> Result<(), CostProfileError> {
        if self.rows.len() != n {
            return Err(CostProfileError::VoterCount {
                expected: n,
                got: self.rows.len(),
            });
        }
        for (i, r) in self.rows.iter().enumerate() {
            if r.len() != m + 1 {
                return Err(CostProfileError::RowLength {
                    voter: i,
                    expected: m + 1,
                    got: r.len(),
                });
            }
            if r[0] != Cost::ZERO {
                return Err(CostProfileError::NonzeroOrigin(i));
            }
            if r.windows(2).any(|w| w[0] > w[1]) {
                return Err(CostProfileError::NotMonotone(i));
            }
        }
        Ok(())
    }

    pub fn price(&self, voter: usize, t: usize) -> Cost {
        self.rows[voter].get(t).copied().unwrap_or(Cost::Infinite)
    }
}

/// Per-voter support prices over changes `-ell_i ..= m - ell_i`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SupportCostProfile {
    /// Row `i` holds `sigma_i(-ell_i), ..., sigma_i(m - ell_i)`.
    pub rows: Vec<Vec<Cost>>,
    /// The voters' original approval counts, fixing each row's offset.
    pub offsets: Vec<usize>,
}

impl SupportCostProfile {
    pub fn new(rows: Vec<Vec<Cost>>, offsets: Vec<usize>, m: usize) -> Result<Self, CostProfileError> {
        let p = SupportCostProfile { rows, offsets };
        p.validate(p.offsets.len(), m)?;
        Ok(p)
    }

    /// `sigma(k) = |k|`.
    pub fn unit(approvals: &[usize], m: usize) -> Self {
        Self::from_fn(approvals, m, |_, k| Cost::Finite(k.unsigned_abs()))
    }

    pub fn from_fn(approvals: &[usize], m: usize, f: impl Fn(usize, i64) -> Cost) -> Self {
        let rows = approvals
            .iter()
            .enumerate()
            .map(|(i, &l)| {
                (-(l as i64)..=(m as i64 - l as i64))
                    .map(|k| if k == 0 { Cost::ZERO } else { f(i, k) })
                    .collect()
            })
            .collect();
        SupportCostProfile {
            rows,
            offsets: approvals.to_vec(),
        }
    }

    pub fn validate(&self, n: usize, m: usize) -> Result<(), CostProfileError> {
        if self.rows.len() != n || self.offsets.len() != n {
            return Err(CostProfileError::VoterCount {
                expected: n,
                got: self.rows.len(),
            });
        }
        for (i, (r, &l)) in self.rows.iter().zip(&self.offsets).enumerate() {
            if l > m || r.len() != m + 1 {
                return Err(CostProfileError::RowLength {
                    voter: i,
                    expected: m + 1,
                    got: r.len(),
                });
            }
            if r[l] != Cost::ZERO {
                return Err(CostProfileError::NonzeroOrigin(i));
            }
            if r[l..].windows(2).any(|w| w[0] > w[1]) || r[..=l].windows(2).any(|w| w[0] < w[1]) {
                return Err(CostProfileError::NotMonotone(i));
            }
        }
        Ok(())
    }

    pub fn price(&self, voter: usize, delta: i64) -> Cost {
        let idx = self.offsets[voter] as i64 + delta;
        if idx < 0 {
            return Cost::Infinite;
        }
        self.rows[voter].get(idx as usize).copied().unwrap_or(Cost::Infinite)
    }

    /// Price of setting voter `i`'s approval count to `ell`.
    pub fn price_to(&self, voter: usize, ell: usize) -> Cost {
        self.rows[voter].get(ell).copied().unwrap_or(Cost::Infinite)
    }

    pub fn is_positive(&self) -> bool {
        self.rows
            .iter()
            .zip(&self.offsets)
            .all(|(r, &l)| r[..l].iter().all(|c| !c.is_finite()))
    }

    pub fn is_negative(&self) -> bool {
        self.rows
            .iter()
            .zip(&self.offsets)
            .all(|(r, &l)| r[l + 1..].iter().all(|c| !c.is_finite()))
    }

    pub fn is_unit(&self) -> bool {
        self.rows.iter().zip(&self.offsets).all(|(r, &l)| {
            r.iter()
                .enumerate()
                .all(|(j, &c)| c == Cost::Finite((j as i64 - l as i64).unsigned_abs()))
        })
    }
}
