//! Min-cost circulations with lower bounds, bipartite matching, and the
//! circulation model behind classic Bucklin shift bribery.

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use thiserror::Error;

use crate::cost::{Cost, ShiftCostProfile};
use crate::election::{top_scores, truncated_scores, Election};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FlowError {
    #[error("arc {arc} references node {node}, but the network has {nodes} nodes")]
    BadEndpoint { arc: usize, node: usize, nodes: usize },
    #[error("arc {0} has lower bound above its upper bound")]
    BadBounds(usize),
    #[error("weight matrix is empty")]
    EmptyMatrix,
    #[error("weight matrix is not {rows}x{cols}")]
    BadShape { rows: usize, cols: usize },
    #[error("round {k} is not usable for an election with {m} candidates")]
    BadRound { k: usize, m: usize },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Capacity {
    Finite(u64),
    Unbounded,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FlowArc {
    pub from: usize,
    pub to: usize,
    pub lower: u64,
    pub upper: Capacity,
    pub cost: u64,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct CirculationNetwork {
    pub node_count: usize,
    pub arcs: Vec<FlowArc>,
}

impl CirculationNetwork {
    pub fn new(node_count: usize) -> Self {
        CirculationNetwork {
            node_count,
            arcs: Vec::new(),
        }
    }

    pub fn add_arc(&mut self, from: usize, to: usize, lower: u64, upper: Capacity, cost: u64) -> usize {
        self.arcs.push(FlowArc {
            from,
            to,
            lower,
            upper,
            cost,
        });
        self.arcs.len() - 1
    }

    fn validate(&self) -> Result<(), FlowError> {
        for (i, a) in self.arcs.iter().enumerate() {
            for node in [a.from, a.to] {
                if node >= self.node_count {
                    return Err(FlowError::BadEndpoint {
                        arc: i,
                        node,
                        nodes: self.node_count,
                    });
                }
            }
            if let Capacity::Finite(u) = a.upper {
                if a.lower > u {
                    return Err(FlowError::BadBounds(i));
                }
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Flow {
    pub values: Vec<u64>,
    pub total_cost: u64,
}

impl Flow {
    /// Bounds on every arc and conservation at every node.
    pub fn is_feasible_for(&self, net: &CirculationNetwork) -> bool {
        if self.values.len() != net.arcs.len() {
            return false;
        }
        let mut balance = vec![0i128; net.node_count];
        let mut cost = 0u128;
        for (a, &f) in net.arcs.iter().zip(&self.values) {
            if f < a.lower {
                return false;
            }
            if let Capacity::Finite(u) = a.upper {
                if f > u {
                    return false;
                }
            }
            balance[a.from] -= f as i128;
            balance[a.to] += f as i128;
            cost += f as u128 * a.cost as u128;
        }
        balance.iter().all(|&b| b == 0) && cost == self.total_cost as u128
    }
}

struct Residual {
    to: Vec<usize>,
    cap: Vec<i64>,
    cost: Vec<i64>,
    adj: Vec<Vec<usize>>,
}

impl Residual {
    fn new(n: usize) -> Self {
        Residual {
            to: Vec::new(),
            cap: Vec::new(),
            cost: Vec::new(),
            adj: vec![Vec::new(); n],
        }
    }

    fn add(&mut self, u: usize, v: usize, cap: i64, cost: i64) -> usize {
        let id = self.to.len();
        self.to.extend([v, u]);
        self.cap.extend([cap, 0]);
        self.cost.extend([cost, -cost]);
        self.adj[u].push(id);
        self.adj[v].push(id + 1);
        id
    }

    /// Successive shortest paths with Dijkstra on reduced costs.
    fn min_cost_flow(&mut self, s: usize, t: usize, want: i64) -> (i64, i64) {
        let n = self.adj.len();
        let mut pot = vec![0i64; n];
        let mut flow = 0i64;
        let mut cost = 0i64;
        while flow < want {
            let mut dist = vec![i64::MAX; n];
            let mut prev = vec![usize::MAX; n];
            dist[s] = 0;
            let mut heap = BinaryHeap::new();
            heap.push(Reverse((0i64, s)));
            while let Some(Reverse((d, u))) = heap.pop() {
                if d > dist[u] {
                    continue;
                }
                for &e in &self.adj[u] {
                    if self.cap[e] <= 0 {
                        continue;
                    }
                    let v = self.to[e];
                    let nd = d + self.cost[e] + pot[u] - pot[v];
                    if nd < dist[v] {
                        dist[v] = nd;
                        prev[v] = e;
                        heap.push(Reverse((nd, v)));
                    }
                }
            }
            if dist[t] == i64::MAX {
                break;
            }
            for v in 0..n {
                if dist[v] != i64::MAX {
                    pot[v] += dist[v];
                }
            }
            let mut push = want - flow;
            let mut v = t;
            while v != s {
                let e = prev[v];
                push = push.min(self.cap[e]);
                v = self.to[e ^ 1];
            }
            let mut v = t;
            while v != s {
                let e = prev[v];
                self.cap[e] -= push;
                self.cap[e ^ 1] += push;
                cost += push * self.cost[e];
                v = self.to[e ^ 1];
            }
            flow += push;
        }
        (flow, cost)
    }
}

/// Minimum-cost feasible circulation, or `None` if the bounds cannot be met.
pub fn min_cost_circulation(net: &CirculationNetwork) -> Result<Option<Flow>, FlowError> {
    net.validate()?;
    let n = net.node_count;
    let total_lower: u64 = net.arcs.iter().map(|a| a.lower).sum();
    // An optimal circulation never needs more than the total forced flow on
    // any arc once zero-cost cycles are cancelled.
    let big = total_lower as i64 + 1;
    let mut res = Residual::new(n + 2);
    let (ss, tt) = (n, n + 1);
    let mut excess = vec![0i64; n];
    let mut ids = Vec::with_capacity(net.arcs.len());
    for a in &net.arcs {
        let cap = match a.upper {
            Capacity::Finite(u) => (u - a.lower) as i64,
            Capacity::Unbounded => big,
        };
        ids.push(res.add(a.from, a.to, cap, a.cost as i64));
        excess[a.to] += a.lower as i64;
        excess[a.from] -= a.lower as i64;
    }
    let mut want = 0i64;
    for (v, &x) in excess.iter().enumerate() {
        if x > 0 {
            res.add(ss, v, x, 0);
            want += x;
        } else if x < 0 {
            res.add(v, tt, -x, 0);
        }
    }
    let (got, _) = res.min_cost_flow(ss, tt, want);
    if got < want {
        return Ok(None);
    }
    let values: Vec<u64> = net
        .arcs
        .iter()
        .zip(&ids)
        .map(|(a, &id)| a.lower + res.cap[id ^ 1] as u64)
        .collect();
    let total_cost = net
        .arcs
        .iter()
        .zip(&values)
        .map(|(a, &f)| a.cost * f)
        .sum();
    Ok(Some(Flow { values, total_cost }))
}

/// Minimum-weight matching saturating the smaller side of a
/// `left_size x right_size` matrix; `Cost::Infinite` marks a missing edge.
pub fn min_weight_bipartite_matching(
    weights: &[Vec<Cost>],
    left_size: usize,
    right_size: usize,
) -> Result<Option<(Vec<(usize, usize)>, Cost)>, FlowError> {
    if left_size == 0 || right_size == 0 {
        return Err(FlowError::EmptyMatrix);
    }
    if weights.len() != left_size || weights.iter().any(|r| r.len() != right_size) {
        return Err(FlowError::BadShape {
            rows: left_size,
            cols: right_size,
        });
    }
    let transpose = left_size > right_size;
    let (rows, cols) = if transpose {
        (right_size, left_size)
    } else {
        (left_size, right_size)
    };
    let w = |i: usize, j: usize| -> Cost {
        if transpose {
            weights[j][i]
        } else {
            weights[i][j]
        }
    };
    let finite_sum: i128 = weights
        .iter()
        .flatten()
        .filter_map(|c| c.finite())
        .map(|x| x as i128)
        .sum();
    let big = finite_sum + 1;
    let a = |i: usize, j: usize| -> i128 { w(i, j).finite().map_or(big, |x| x as i128) };
    // Classic O(rows^2 * cols) potentials method, 1-based internally.
    let inf = i128::MAX / 4;
    let mut u = vec![0i128; rows + 1];
    let mut v = vec![0i128; cols + 1];
    let mut p = vec![0usize; cols + 1];
    let mut way = vec![0usize; cols + 1];
    for i in 1..=rows {
        p[0] = i;
        let mut j0 = 0usize;
        let mut minv = vec![inf; cols + 1];
        let mut used = vec![false; cols + 1];
        loop {
            used[j0] = true;
            let i0 = p[j0];
            let mut delta = inf;
            let mut j1 = 0usize;
            for j in 1..=cols {
                if !used[j] {
                    let cur = a(i0 - 1, j - 1) - u[i0] - v[j];
                    if cur < minv[j] {
                        minv[j] = cur;
                        way[j] = j0;
                    }
                    if minv[j] < delta {
                        delta = minv[j];
                        j1 = j;
                    }
                }
            }
            for j in 0..=cols {
                if used[j] {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if p[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    let mut pairs = Vec::with_capacity(rows);
    let mut total = Cost::ZERO;
    for j in 1..=cols {
        if p[j] != 0 {
            let (i, jj) = (p[j] - 1, j - 1);
            let c = w(i, jj);
            if !c.is_finite() {
                return Ok(None);
            }
            total = total + c;
            pairs.push(if transpose { (jj, i) } else { (i, jj) });
        }
    }
    pairs.sort_unstable();
    Ok(Some((pairs, total)))
}

/// How one voter is wired into a round network.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VoterArcs {
    pub voter: usize,
    /// Arc that brings the voter into the bribed set (`U -> W`, or `S -> W`
    /// when p already scores in the target round).
    pub entry: usize,
    pub entry_is_source: bool,
    /// Arc `W -> Z` that records a demotion in the round before the target.
    pub demote: Option<usize>,
    /// Shift when the voter is entered, and when it also demotes.
    pub shift_entry: usize,
    pub shift_demote: usize,
}

#[derive(Clone, Debug)]
pub struct BucklinNetwork {
    pub network: CirculationNetwork,
    pub voters: Vec<VoterArcs>,
    pub source: usize,
    pub sink: usize,
}

impl BucklinNetwork {
    /// Shift vector encoded by a flow on this network.
    pub fn shifts_from(&self, flow: &Flow, n: usize) -> Vec<usize> {
        let mut t = vec![0usize; n];
        for va in &self.voters {
            let demoted = va.demote.is_some_and(|d| flow.values[d] > 0);
            if demoted {
                t[va.voter] = va.shift_demote;
            } else if !va.entry_is_source && flow.values[va.entry] > 0 {
                t[va.voter] = va.shift_entry;
            }
        }
        t
    }
}

/// Network for "p wins in round `k + 1` after exactly `i` voters that rank
/// p below position `k + 1` are bribed", on untruncated preferences.
pub fn build_bucklin_network(
    e: &Election,
    costs: &ShiftCostProfile,
    k: usize,
    i: usize,
) -> Result<BucklinNetwork, FlowError> {
    if k == 0 || k >= e.m() {
        return Err(FlowError::BadRound { k, m: e.m() });
    }
    Ok(build_round_network(e, costs, k + 1, i, false))
}

/// Generalised construction for target round `r`; with `truncate` the
/// voters' approval counts cut off their rankings.
pub(crate) fn build_round_network(
    e: &Election,
    costs: &ShiftCostProfile,
    r: usize,
    i: usize,
    truncate: bool,
) -> BucklinNetwork {
    let m = e.m();
    let n = e.n();
    let p = e.designated;
    let half = (n / 2) as u64;
    let score = |round: usize| {
        if truncate {
            truncated_scores(e, round)
        } else {
            top_scores(e, round)
        }
    };
    let s_r = score(r);
    let s_prev = score(r - 1);

    let src = 0;
    let src2 = 1;
    let u_node = |c: usize| 2 + c;
    let w_node = |j: usize| 2 + m + j;
    let z_node = |c: usize| 2 + m + n + c;
    let sink = 2 + 2 * m + n;
    let mut net = CirculationNetwork::new(sink + 1);

    net.add_arc(src, src2, i as u64, Capacity::Finite(i as u64), 0);
    for c in (0..m).filter(|&c| c != p) {
        let lower = (s_r[c] as i64 - s_r[p] as i64 - i as i64).max(0) as u64;
        net.add_arc(src2, u_node(c), lower, Capacity::Unbounded, 0);
    }
    let mut voters = Vec::new();
    for (j, v) in e.voters.iter().enumerate() {
        let rho = v.rank_of(p);
        let ell = if truncate { v.approval_count } else { m };
        let pi = |t: usize| costs.price(j, t);
        if ell >= r {
            if rho < r {
                continue;
            }
            let (entry, entry_is_source) = if rho == r {
                (net.add_arc(src, w_node(j), 0, Capacity::Unbounded, 0), true)
            } else {
                let Cost::Finite(c) = pi(rho - r) else { continue };
                let h = v.preference[r - 1];
                (net.add_arc(u_node(h), w_node(j), 0, Capacity::Finite(1), c), false)
            };
            net.add_arc(w_node(j), sink, 0, Capacity::Unbounded, 0);
            let mut demote = None;
            if r >= 2 {
                if let (Cost::Finite(hi), Cost::Finite(lo)) = (pi(rho - r + 1), pi(rho - r)) {
                    let h = v.preference[r - 2];
                    demote = Some(net.add_arc(w_node(j), z_node(h), 0, Capacity::Finite(1), hi - lo));
                }
            }
            voters.push(VoterArcs {
                voter: j,
                entry,
                entry_is_source,
                demote,
                shift_entry: rho - r,
                shift_demote: rho - r + 1,
            });
        } else {
            if ell == 0 || rho <= ell {
                continue;
            }
            let Cost::Finite(c) = pi(rho - ell) else { continue };
            let h = v.preference[ell - 1];
            let entry = net.add_arc(u_node(h), w_node(j), 0, Capacity::Finite(1), c);
            net.add_arc(w_node(j), sink, 0, Capacity::Unbounded, 0);
            let demote = Some(net.add_arc(w_node(j), z_node(h), 0, Capacity::Finite(1), 0));
            voters.push(VoterArcs {
                voter: j,
                entry,
                entry_is_source: false,
                demote,
                shift_entry: rho - ell,
                shift_demote: rho - ell,
            });
        }
    }
    for c in (0..m).filter(|&c| c != p) {
        let lower = (s_prev[c] as u64).saturating_sub(half);
        net.add_arc(z_node(c), sink, lower, Capacity::Unbounded, 0);
    }
    net.add_arc(sink, src, 0, Capacity::Unbounded, 0);
    BucklinNetwork {
        network: net,
        voters,
        source: src,
        sink,
    }
}
