//! Instance generators: random and single-peaked elections, plus the
//! election encodings of dominating set and multicolored clique.

use std::fmt::Write as _;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::cost::{Cost, ShiftCostProfile, SupportCostProfile};
use crate::election::{Axis, Election, ElectionError, RuleId, Voter};
use crate::support::{SupportError, SupportInstance};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum InstanceError {
    #[error("need at least one candidate and one voter")]
    EmptySize,
    #[error("approval count {0} exceeds the number of candidates")]
    BadApproval(usize),
    #[error("graph line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("edge ({0}, {1}) is invalid")]
    BadEdge(usize, usize),
    #[error("partition is missing, overlapping, not covering, or not independent")]
    BadPartition,
    #[error("parameter k = {k} is out of range: {why}")]
    BadK { k: usize, why: &'static str },
    #[error(transparent)]
    Election(#[from] ElectionError),
    #[error(transparent)]
    Support(#[from] SupportError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ApprovalLaw {
    /// Each approval count drawn uniformly from `0..=m`.
    Uniform,
    Fixed(usize),
}

/// Uniformly random preference orders.
pub fn gen_random(m: usize, n: usize, seed: u64, law: ApprovalLaw) -> Result<Election, InstanceError> {
    if m == 0 || n == 0 {
        return Err(InstanceError::EmptySize);
    }
    if let ApprovalLaw::Fixed(l) = law {
        if l > m {
            return Err(InstanceError::BadApproval(l));
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let voters = (0..n)
        .map(|_| {
            let mut pref: Vec<usize> = (0..m).collect();
            pref.shuffle(&mut rng);
            let ell = match law {
                ApprovalLaw::Uniform => rng.gen_range(0..=m),
                ApprovalLaw::Fixed(l) => l,
            };
            Voter::new(pref, ell)
        })
        .collect();
    Ok(Election::new(m, 0, voters)?)
}

/// Votes grown outward from a random peak on a random axis.
pub fn gen_single_peaked(m: usize, n: usize, seed: u64) -> Result<(Election, Axis), InstanceError> {
    if m == 0 || n == 0 {
        return Err(InstanceError::EmptySize);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut order: Vec<usize> = (0..m).collect();
    order.shuffle(&mut rng);
    let voters = (0..n)
        .map(|_| {
            let peak = rng.gen_range(0..m);
            let (mut lo, mut hi) = (peak, peak);
            let mut pref = vec![order[peak]];
            while pref.len() < m {
                if lo > 0 && (hi + 1 == m || rng.gen_bool(0.5)) {
                    lo -= 1;
                    pref.push(order[lo]);
                } else {
                    hi += 1;
                    pref.push(order[hi]);
                }
            }
            Voter::new(pref, rng.gen_range(0..=m))
        })
        .collect();
    Ok((Election::new(m, 0, voters)?, Axis { order }))
}

/// Simple undirected graph on vertices `0..vertex_count`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GraphInstance {
    pub vertex_count: usize,
    pub edges: Vec<(usize, usize)>,
    pub partition: Option<Vec<Vec<usize>>>,
}

impl GraphInstance {
    pub fn new(
        vertex_count: usize,
        edges: Vec<(usize, usize)>,
        partition: Option<Vec<Vec<usize>>>,
    ) -> Result<Self, InstanceError> {
        let g = GraphInstance {
            vertex_count,
            edges,
            partition,
        };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<(), InstanceError> {
        for &(u, v) in &self.edges {
            if u == v || u >= self.vertex_count || v >= self.vertex_count {
                return Err(InstanceError::BadEdge(u, v));
            }
        }
        if let Some(parts) = &self.partition {
            let mut class = vec![usize::MAX; self.vertex_count];
            for (i, part) in parts.iter().enumerate() {
                for &v in part {
                    if v >= self.vertex_count || class[v] != usize::MAX {
                        return Err(InstanceError::BadPartition);
                    }
                    class[v] = i;
                }
            }
            if class.contains(&usize::MAX) || self.edges.iter().any(|&(u, v)| class[u] == class[v]) {
                return Err(InstanceError::BadPartition);
            }
        }
        Ok(())
    }

    pub fn adjacent(&self, u: usize, v: usize) -> bool {
        self.edges.iter().any(|&(a, b)| (a, b) == (u, v) || (a, b) == (v, u))
    }

    /// Closed neighborhood of `v`, sorted.
    pub fn closed_neighborhood(&self, v: usize) -> Vec<usize> {
        let mut out: Vec<usize> = (0..self.vertex_count).filter(|&u| u == v || self.adjacent(u, v)).collect();
        out.dedup();
        out
    }

    /// Edge-list text: `V E [K]`, then `u v` lines, then `class v1 v2 ...`
    /// lines; vertices are 1-based.
    pub fn parse(text: &str) -> Result<Self, InstanceError> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").trim()))
            .filter(|(_, l)| !l.is_empty());
        let err = |line: usize, msg: &str| InstanceError::Parse {
            line,
            msg: msg.to_string(),
        };
        let num = |line: usize, s: &str| s.parse::<usize>().map_err(|_| err(line, &format!("`{s}` is not a number")));
        let (hl, header) = lines.next().ok_or_else(|| err(1, "missing header `V E [K]`"))?;
        let head: Vec<usize> = header.split_whitespace().map(|s| num(hl, s)).collect::<Result<_, _>>()?;
        if !(2..=3).contains(&head.len()) {
            return Err(err(hl, "header must be `V E [K]`"));
        }
        let (vc, ec) = (head[0], head[1]);
        let mut edges = Vec::with_capacity(ec);
        for _ in 0..ec {
            let (ln, l) = lines.next().ok_or_else(|| err(hl, "fewer edge lines than announced"))?;
            let xs: Vec<usize> = l.split_whitespace().map(|s| num(ln, s)).collect::<Result<_, _>>()?;
            if xs.len() != 2 || xs[0] == 0 || xs[1] == 0 {
                return Err(err(ln, "edge must be two 1-based vertices"));
            }
            edges.push((xs[0] - 1, xs[1] - 1));
        }
        let partition = match head.get(2) {
            None => None,
            Some(&k) => {
                let mut parts = Vec::with_capacity(k);
                for _ in 0..k {
                    let (ln, l) = lines.next().ok_or_else(|| err(hl, "fewer partition lines than announced"))?;
                    let mut it = l.split_whitespace();
                    if it.next() != Some("class") {
                        return Err(err(ln, "partition line must start with `class`"));
                    }
                    let vs: Vec<usize> = it.map(|s| num(ln, s)).collect::<Result<_, _>>()?;
                    if vs.contains(&0) {
                        return Err(err(ln, "vertices are 1-based"));
                    }
                    parts.push(vs.into_iter().map(|v| v - 1).collect());
                }
                Some(parts)
            }
        };
        if let Some((ln, _)) = lines.next() {
            return Err(err(ln, "unexpected trailing line"));
        }
        GraphInstance::new(vc, edges, partition)
    }

    pub fn to_text(&self) -> String {
        let mut s = format!("{} {}", self.vertex_count, self.edges.len());
        if let Some(p) = &self.partition {
            write!(s, " {}", p.len()).unwrap();
        }
        s.push('\n');
        for &(u, v) in &self.edges {
            writeln!(s, "{} {}", u + 1, v + 1).unwrap();
        }
        for part in self.partition.iter().flatten() {
            s.push_str("class");
            for v in part {
                write!(s, " {}", v + 1).unwrap();
            }
            s.push('\n');
        }
        s
    }
}

/// Random graph where each edge appears with probability `density`.
pub fn gen_graph(vertex_count: usize, density: f64, seed: u64) -> GraphInstance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut edges = Vec::new();
    for u in 0..vertex_count {
        for v in u + 1..vertex_count {
            if rng.gen_bool(density) {
                edges.push((u, v));
            }
        }
    }
    GraphInstance {
        vertex_count,
        edges,
        partition: None,
    }
}

/// Random `k`-partite graph with consecutive classes of the given sizes.
pub fn gen_partitioned_graph(sizes: &[usize], density: f64, seed: u64) -> GraphInstance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut parts = Vec::new();
    let mut next = 0;
    for &s in sizes {
        parts.push((next..next + s).collect::<Vec<_>>());
        next += s;
    }
    let class = |v: usize| parts.iter().position(|p| p.contains(&v)).unwrap();
    let mut edges = Vec::new();
    for u in 0..next {
        for v in u + 1..next {
            if class(u) != class(v) && rng.gen_bool(density) {
                edges.push((u, v));
            }
        }
    }
    GraphInstance {
        vertex_count: next,
        edges,
        partition: Some(parts),
    }
}

fn subsets_of_size(n: usize, k: usize, mut visit: impl FnMut(&[usize]) -> bool) -> bool {
    if k > n {
        return false;
    }
    let mut idx: Vec<usize> = (0..k).collect();
    loop {
        if visit(&idx) {
            return true;
        }
        let Some(i) = (0..k).rev().find(|&i| idx[i] < n - k + i) else { return false };
        idx[i] += 1;
        for j in i + 1..k {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

/// Whether some set of at most `k` vertices dominates the graph.
pub fn has_dominating_set(g: &GraphInstance, k: usize) -> bool {
    let n = g.vertex_count;
    let nbhd: Vec<Vec<usize>> = (0..n).map(|v| g.closed_neighborhood(v)).collect();
    let k = k.min(n);
    subsets_of_size(n, k, |s| {
        let mut covered = vec![false; n];
        for &v in s {
            for &u in &nbhd[v] {
                covered[u] = true;
            }
        }
        covered.iter().all(|&c| c)
    })
}

/// Whether the graph has a clique with one vertex in each class.
pub fn has_multicolored_clique(g: &GraphInstance) -> bool {
    let Some(parts) = &g.partition else { return false };
    fn go(g: &GraphInstance, parts: &[Vec<usize>], chosen: &mut Vec<usize>) -> bool {
        let Some(part) = parts.get(chosen.len()) else { return true };
        for &v in part {
            if chosen.iter().all(|&u| g.adjacent(u, v)) {
                chosen.push(v);
                if go(g, parts, chosen) {
                    return true;
                }
                chosen.pop();
            }
        }
        false
    }
    go(g, parts, &mut Vec::new())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CostVariant {
    /// Only decreases, free for the bribable voters.
    Negative,
    /// Only increases, free for the bribable voters.
    Positive,
}

fn names(n: usize, dummies: usize, extra: &[&str]) -> Vec<String> {
    let mut out: Vec<String> = extra.iter().map(|s| s.to_string()).collect();
    out.extend((1..=n).map(|i| format!("v{i}")));
    out.extend((1..=dummies).map(|i| format!("d{i}")));
    out
}

/// Completes a ranked prefix with the remaining candidates in index order.
fn complete(prefix: Vec<usize>, m: usize) -> Vec<usize> {
    let mut seen = vec![false; m];
    for &c in &prefix {
        seen[c] = true;
    }
    let mut out = prefix;
    out.extend((0..m).filter(|&c| !seen[c]));
    out
}

/// Prices of zero for bribable voters in the allowed direction, infinite
/// otherwise.
fn zero_or_inf(approvals: &[usize], bribable: &[bool], m: usize, variant: CostVariant) -> SupportCostProfile {
    SupportCostProfile::from_fn(approvals, m, |i, k| {
        let allowed = match variant {
            CostVariant::Negative => k < 0,
            CostVariant::Positive => k > 0,
        };
        if bribable[i] && allowed {
            Cost::ZERO
        } else {
            Cost::Infinite
        }
    })
}

/// Election encoding of dominating set under (simplified) Fallback with
/// budget 0: a zero-cost successful bribery exists iff `graph` has a
/// dominating set of size at most `k`.
pub fn reduce_dominating_set(
    graph: &GraphInstance,
    k: usize,
    variant: CostVariant,
    rule: RuleId,
) -> Result<SupportInstance, InstanceError> {
    graph.validate()?;
    if !matches!(rule, RuleId::FallbackClassic | RuleId::FallbackSimplified) {
        return Err(SupportError::RuleNotSupported {
            solver: "dominating-set encoding",
            rule,
        }
        .into());
    }
    let n = graph.vertex_count;
    let (p, a, b) = (0usize, 1usize, 2usize);
    let vert = |i: usize| 3 + i;
    let all_vertices: Vec<usize> = (0..n).map(vert).collect();
    let mut voters: Vec<(Vec<usize>, usize)> = Vec::new();
    let mut bribable = Vec::new();
    match variant {
        CostVariant::Negative => {
            if k < 1 || k + 2 > n {
                return Err(InstanceError::BadK {
                    k,
                    why: "the negative encoding needs 1 <= k <= n - 2",
                });
            }
            let dummy_total = 6 * n * (n + 3);
            let first_dummy = 3 + n;
            let mut next = first_dummy;
            let mut fresh = |count: usize| -> Vec<usize> {
                let out: Vec<usize> = (next..next + count).collect();
                next += count;
                out
            };
            let mut push = |pref: Vec<usize>, bribe: bool, voters: &mut Vec<(Vec<usize>, usize)>| {
                debug_assert_eq!(pref.len(), n + 3);
                voters.push((pref, n + 3));
                bribable.push(bribe);
            };
            for i in 0..n {
                let nb: Vec<usize> = graph.closed_neighborhood(i).into_iter().map(vert).collect();
                let mut x = vec![a];
                x.extend(&nb);
                x.extend(fresh(n - nb.len()));
                x.extend([p, b]);
                push(x, true, &mut voters);
                let rest: Vec<usize> = all_vertices.iter().copied().filter(|c| !nb.contains(c)).collect();
                let mut xb = vec![a];
                xb.extend(&rest);
                xb.extend(fresh(nb.len()));
                xb.extend([p, b]);
                push(xb, false, &mut voters);
            }
            for _ in 0..2 * n + 1 {
                let mut v = all_vertices.clone();
                v.extend(fresh(2));
                v.push(b);
                push(v, false, &mut voters);
            }
            for _ in 0..n + k {
                let mut v = vec![a];
                v.extend(fresh(n));
                v.extend([p, b]);
                push(v, false, &mut voters);
            }
            let mut v = fresh(n + 1);
            v.extend([p, b]);
            push(v, false, &mut voters);
            for _ in 0..n - k - 2 {
                let mut v = fresh(n + 2);
                v.push(b);
                push(v, false, &mut voters);
            }
            let m = first_dummy + dummy_total;
            build_domset(voters, &bribable, m, n, dummy_total, variant, rule)
        }
        CostVariant::Positive => {
            if k < 2 || k > n {
                return Err(InstanceError::BadK {
                    k,
                    why: "the positive encoding needs 2 <= k <= n",
                });
            }
            for i in 0..n {
                let nb: Vec<usize> = graph.closed_neighborhood(i).into_iter().map(vert).collect();
                let mut x: Vec<usize> = all_vertices.iter().copied().filter(|c| !nb.contains(c)).collect();
                x.extend([b, p, a]);
                x.extend(&nb);
                voters.push((x, 0));
                bribable.push(true);
            }
            for _ in 0..k {
                voters.push((vec![a], 1));
                bribable.push(false);
            }
            voters.push((all_vertices.clone(), n));
            bribable.push(false);
            for _ in 0..n + 1 - k {
                let mut v = vec![a, b, p];
                v.extend(&all_vertices);
                voters.push((v, n + 3));
                bribable.push(false);
            }
            build_domset(voters, &bribable, n + 3, n, 0, variant, rule)
        }
    }
}

fn build_domset(
    voters: Vec<(Vec<usize>, usize)>,
    bribable: &[bool],
    m: usize,
    n: usize,
    dummies: usize,
    variant: CostVariant,
    rule: RuleId,
) -> Result<SupportInstance, InstanceError> {
    let voters: Vec<Voter> = voters.into_iter().map(|(pref, l)| Voter::new(complete(pref, m), l)).collect();
    let approvals: Vec<usize> = voters.iter().map(|v| v.approval_count).collect();
    let e = Election::with_names(names(n, dummies, &["p", "a", "b"]), 0, voters)?;
    let costs = zero_or_inf(&approvals, bribable, m, variant);
    Ok(SupportInstance::new(e, costs, rule, Some(Cost::ZERO))?)
}

/// Axis layout of the clique encoding.
struct Layout {
    /// Candidates from left to right.
    order: Vec<usize>,
    pos: Vec<usize>,
    names: Vec<String>,
}

impl Layout {
    fn add(&mut self, name: String) -> usize {
        let c = self.names.len();
        self.names.push(name);
        self.pos.push(self.order.len());
        self.order.push(c);
        c
    }

    fn at(&self, i: usize) -> usize {
        self.order[i]
    }

    /// Candidates on the axis from position `a` to `b` inclusive, in
    /// walking order.
    fn walk(&self, a: usize, b: usize) -> Vec<usize> {
        if a <= b {
            (a..=b).map(|i| self.order[i]).collect()
        } else {
            (b..=a).rev().map(|i| self.order[i]).collect()
        }
    }

    /// Completes a prefix that is an axis interval by walking outward,
    /// taking the side nearer to the peak first and breaking ties
    /// toward the left end.
    fn complete(&self, prefix: Vec<usize>) -> Vec<usize> {
        let m = self.order.len();
        let peak = self.pos[prefix[0]];
        let mut lo = prefix.iter().map(|&c| self.pos[c]).min().unwrap();
        let mut hi = prefix.iter().map(|&c| self.pos[c]).max().unwrap();
        debug_assert_eq!(hi - lo + 1, prefix.len());
        let mut out = prefix;
        while out.len() < m {
            let left = lo > 0 && (hi + 1 == m || peak - (lo - 1) <= (hi + 1) - peak);
            if left {
                lo -= 1;
                out.push(self.order[lo]);
            } else {
                hi += 1;
                out.push(self.order[hi]);
            }
        }
        out
    }
}

/// Single-peaked unit-cost SP-AV encoding of multicolored clique, together
/// with its budget `2k^3 - k`. The optimum equals the budget iff the graph
/// has a multicolored clique, and exceeds it by one otherwise.
pub fn reduce_multicolored_clique(graph: &GraphInstance, k: usize) -> Result<(SupportInstance, Cost), InstanceError> {
    graph.validate()?;
    let parts = graph.partition.as_ref().ok_or(InstanceError::BadPartition)?;
    if k < 2 || parts.len() != k || parts.iter().any(|p| p.is_empty()) {
        return Err(InstanceError::BadK {
            k,
            why: "need k >= 2 nonempty classes matching the partition",
        });
    }
    // With one vertex per class, an extra isolated vertex keeps a bribery of
    // cost B+1 available without creating a clique.
    let mut parts = parts.clone();
    let mut vertex_count = graph.vertex_count;
    if vertex_count == k {
        parts[k - 1].push(vertex_count);
        vertex_count += 1;
    }
    let budget = 2 * k * k * k - k;
    let ext = 2 * k * k + 5 - 5 * k;
    // Vertices ordered class by class, so the first lies in the first class
    // and the last in the last.
    let vorder: Vec<(usize, usize)> = parts
        .iter()
        .enumerate()
        .flat_map(|(i, p)| {
            let mut p = p.clone();
            p.sort_unstable();
            p.into_iter().map(move |v| (v, i))
        })
        .collect();
    let mut lay = Layout {
        order: Vec::new(),
        pos: Vec::new(),
        names: Vec::new(),
    };
    let mut dummy = 0usize;
    let mut new_dummy = |lay: &mut Layout| {
        dummy += 1;
        lay.add(format!("d{dummy}"))
    };
    let q = lay.add("q".into());
    for _ in 0..2 * budget {
        new_dummy(&mut lay);
    }
    // cand[a][j]: candidate c^j of the a-th vertex in `vorder`.
    let mut cand: Vec<Vec<Option<usize>>> = Vec::new();
    for (a, &(v, class)) in vorder.iter().enumerate() {
        let mut row = vec![None; k];
        let mut first = true;
        for (j, slot) in row.iter_mut().enumerate() {
            if j == class {
                continue;
            }
            if !(a == 0 && first) {
                new_dummy(&mut lay);
                new_dummy(&mut lay);
            }
            first = false;
            *slot = Some(lay.add(format!("c{}_{}", j + 1, v + 1)));
        }
        cand.push(row);
    }
    let first_cv = cand[0].iter().flatten().next().copied().unwrap();
    let last_cv = cand.last().unwrap().iter().flatten().last().copied().unwrap();
    for _ in 0..2 * budget {
        new_dummy(&mut lay);
    }
    let p = lay.add("p".into());
    let m = lay.order.len();
    let pp = lay.pos[p];
    let cv: Vec<usize> = cand.iter().flatten().flatten().copied().collect();

    let mut votes: Vec<(Vec<usize>, usize)> = Vec::new();
    for row in &cand {
        let first = row.iter().flatten().next().copied().unwrap();
        let last = row.iter().flatten().last().copied().unwrap();
        let approved = lay.walk(lay.pos[last] + 1, pp - (ext + 1));
        let ell = approved.len();
        let mut pref = approved;
        pref.extend(lay.walk(lay.pos[last], lay.pos[first]));
        pref.extend(lay.walk(pp - ext, pp));
        votes.push((pref, ell));
    }
    let index_of = |v: usize| vorder.iter().position(|&(u, _)| u == v).unwrap();
    let mut edges: Vec<(usize, usize)> = graph.edges.iter().map(|&(u, v)| (index_of(u).min(index_of(v)), index_of(u).max(index_of(v)))).collect();
    edges.sort_unstable();
    for (a, b) in edges {
        let (i, j) = (vorder[a].1, vorder[b].1);
        let cja = cand[a][j].unwrap();
        let cib = cand[b][i].unwrap();
        let mut pref = lay.walk(lay.pos[cja] + 1, lay.pos[cib] - 1);
        pref.extend([cja, cib, lay.at(lay.pos[cja] - 1), lay.at(lay.pos[cib] + 1)]);
        let ell = pref.len();
        votes.push((pref, ell));
    }
    let score = |votes: &[(Vec<usize>, usize)], c: usize| votes.iter().filter(|(v, l)| v[..*l].contains(&c)).count();
    let left_pair = |c: usize| lay.walk(lay.pos[c], lay.pos[first_cv] - budget);
    let right_pair = |c: usize| lay.walk(lay.pos[c], lay.pos[last_cv] + budget);
    let add_pair = |votes: &mut Vec<(Vec<usize>, usize)>, c: usize| {
        for pref in [left_pair(c), right_pair(c)] {
            let l = pref.len();
            votes.push((pref, l));
        }
    };
    loop {
        let scores: Vec<usize> = cv.iter().map(|&c| score(&votes, c)).collect();
        let max = *scores.iter().max().unwrap();
        match scores.iter().position(|&s| s < max) {
            Some(i) => add_pair(&mut votes, cv[i]),
            None => break,
        }
    }
    for _ in 0..vertex_count + graph.edges.len() + budget + 1 {
        for &c in &cv {
            add_pair(&mut votes, c);
        }
    }
    let l_score = score(&votes, cv[0]);
    for _ in 0..l_score - k {
        votes.push((vec![p], 1));
    }
    for _ in 0..l_score {
        let pref = lay.walk(lay.pos[q], lay.pos[q] + budget);
        let l = pref.len();
        votes.push((pref, l));
    }
    let mut tally = vec![0usize; m];
    for (pref, l) in &votes {
        for &c in &pref[..*l] {
            tally[c] += 1;
        }
    }
    for c in 0..m {
        let ok = if c == p {
            tally[c] == l_score - k
        } else if c == q || cv.contains(&c) {
            tally[c] == l_score
        } else if lay.pos[c] <= budget {
            // Dummies right after q share the votes of q.
            tally[c] == l_score
        } else {
            tally[c] < l_score
        };
        assert!(ok, "score setup broken at {}: {} vs L = {l_score}", lay.names[c], tally[c]);
    }
    let voters: Vec<Voter> = votes.into_iter().map(|(pref, l)| Voter::new(lay.complete(pref), l)).collect();
    let approvals: Vec<usize> = voters.iter().map(|v| v.approval_count).collect();
    debug_assert_eq!(voters.iter().map(|v| v.preference.len()).max(), Some(m));
    let e = Election::with_names(lay.names.clone(), p, voters)?;
    let costs = SupportCostProfile::unit(&approvals, m);
    let b = Cost::Finite(budget as u64);
    Ok((SupportInstance::new(e, costs, RuleId::SPAV, Some(b))?, b))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PriceSign {
    Mixed,
    /// Only increases are finite.
    Positive,
    /// Only decreases are finite.
    Negative,
}

/// Monotone random walk of prices: each step adds `0..=max_step`, and with
/// probability `inf_rate` the row becomes infinite from there on.
fn random_walk(rng: &mut ChaCha8Rng, len: usize, max_step: u64, inf_rate: f64) -> Vec<Cost> {
    let mut last = Cost::ZERO;
    (0..len)
        .map(|_| {
            last = if last == Cost::Infinite || rng.gen_bool(inf_rate) {
                Cost::Infinite
            } else {
                last + Cost::Finite(rng.gen_range(0..=max_step))
            };
            last
        })
        .collect()
}

/// Random shift prices with increments in `0..=max_step`.
pub fn random_shift_costs(n: usize, m: usize, seed: u64, max_step: u64, inf_rate: f64) -> ShiftCostProfile {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let rows = (0..n)
        .map(|_| {
            let mut row = vec![Cost::ZERO];
            row.extend(random_walk(&mut rng, m, max_step, inf_rate));
            row
        })
        .collect();
    ShiftCostProfile { rows }
}

/// Random support prices with increments in `0..=max_step`.
pub fn random_support_costs(
    approvals: &[usize],
    m: usize,
    seed: u64,
    sign: PriceSign,
    max_step: u64,
    inf_rate: f64,
) -> SupportCostProfile {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let rows = approvals
        .iter()
        .map(|&l| {
            let mut up = random_walk(&mut rng, m - l, max_step, inf_rate);
            let mut down = random_walk(&mut rng, l, max_step, inf_rate);
            if sign == PriceSign::Negative {
                up.fill(Cost::Infinite);
            }
            if sign == PriceSign::Positive {
                down.fill(Cost::Infinite);
            }
            down.reverse();
            down.push(Cost::ZERO);
            down.extend(up);
            down
        })
        .collect();
    SupportCostProfile {
        rows,
        offsets: approvals.to_vec(),
    }
}
