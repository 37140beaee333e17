//! Exact minimum-entropy `a:b` coloring by branch and bound.
//!
//! A coloring is searched as a multiset of color classes (independent sets)
//! in which every vertex lies in exactly `b` classes; color ids are the
//! creation order of the classes. Vertices are processed in decreasing mass.
//! When a vertex is visited all of its missing classes are added at once, in
//! non-increasing mask order, so every multiset is generated exactly once.
//!
//! Once a vertex holds all of its colors its color set is final, and the
//! entropy of those frozen blocks is kept incrementally. The remaining mass
//! `r` can only form blocks inside independent sets, each of mass at most
//! `c`, and entropy is smallest when the blocks are `(c, c, ..., r - kc)`.

use std::collections::HashMap;
use std::sync::atomic::{AtomicBool, AtomicU64, Ordering};

use serde::Serialize;

use super::{bfold_chromatic_number, vertex_masses, FoldColoring};
use crate::budget::Budget;
use crate::error::{Error, Result};
use crate::exec;
use crate::graphs::{enumerate_independent_sets, Graph};
use crate::probability::{surprisal_term, to_f64, Pmf};

const EPS: f64 = 1e-9;
const NODE_BATCH: u64 = 4096;
/// Largest palette for which replica orderings are enumerated.
const REPLICA_MAX_COLORS: usize = 8;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Objective {
    /// Entropy of the unordered color set of a vertex.
    #[default]
    ColorSet,
    /// Sum over `j` of the entropy of the `j`-th smallest color of a vertex.
    ReplicaOrdered,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EntropyColoring {
    pub coloring: FoldColoring,
    /// Objective value of `coloring`, in bits.
    pub entropy: f64,
    /// `false` when a budget stopped the search; `coloring` is then the best
    /// one found and `lower_bound` bounds the optimum from below.
    pub optimal: bool,
    pub lower_bound: f64,
    pub nodes: u64,
}

/// Minimum entropy of the color-set variable over all valid `a:b` colorings.
pub fn min_entropy_coloring(
    g: &Graph,
    vertex_pmf: &Pmf,
    b: usize,
    a: usize,
    budget: &Budget,
) -> Result<EntropyColoring> {
    min_entropy_coloring_with(g, vertex_pmf, b, a, Objective::ColorSet, budget)
}

pub fn min_entropy_coloring_with(
    g: &Graph,
    vertex_pmf: &Pmf,
    b: usize,
    a: usize,
    objective: Objective,
    budget: &Budget,
) -> Result<EntropyColoring> {
    if b == 0 {
        return Err(Error::InvalidArgument("b must be at least 1".into()));
    }
    let w: Vec<f64> = vertex_masses(g, vertex_pmf)?.iter().map(to_f64).collect();
    let n = g.vertex_count();
    let (chi_b, seed) = bfold_chromatic_number(g, b, budget)?;
    if a < chi_b {
        return Err(Error::Infeasible(format!(
            "no {a}:{b} coloring exists; the least palette is {chi_b}"
        )));
    }
    let seed = FoldColoring::from_assignment(b, a, seed.assignment)?;
    let seed_value = objective_value(objective, &seed, &w);

    let masks = g.adjacency_masks();
    let searchable = n <= budget.entropy_vertices
        && masks.is_some()
        && a.min(b * n) <= 64
        && (objective == Objective::ColorSet || a <= REPLICA_MAX_COLORS);
    let maximal: Vec<u128> = match (&masks, enumerate_independent_sets(g, true, budget)) {
        (Some(_), Ok(fam)) => fam
            .sets
            .iter()
            .map(|s| s.iter().fold(0u128, |m, &v| m | 1 << v))
            .collect(),
        _ => Vec::new(),
    };
    let all = if n == 128 { u128::MAX } else { (1u128 << n) - 1 };
    let root_bound = if maximal.is_empty() {
        0.0
    } else {
        tail_bound(&w, &maximal, all)
    };
    if !searchable {
        return Ok(EntropyColoring {
            coloring: seed,
            entropy: seed_value,
            optimal: false,
            lower_bound: root_bound,
            nodes: 0,
        });
    }
    let adj = masks.unwrap();

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&x, &y| w[y].total_cmp(&w[x]).then(x.cmp(&y)));
    let alpha = maximal.iter().map(|m| m.count_ones() as usize).max().unwrap_or(1);
    let problem = Problem {
        b,
        a: a.min(b * n),
        palette: a,
        non_adj: (0..n).map(|v| all & !adj[v] & !(1u128 << v)).collect(),
        w: &w,
        order,
        alpha,
        maximal,
        objective,
        node_cap: budget.entropy_nodes,
        incumbent: AtomicU64::new((seed_value + EPS).to_bits()),
        nodes: AtomicU64::new(0),
        aborted: AtomicBool::new(false),
    };

    let root = State::new(n, b);
    let v0 = problem.order[0];
    let smin = problem.min_class_size(&root);
    let first = problem.classes_for(root.pending, v0, smin, u128::MAX);
    let outcomes = exec::map_collect(&first, |&class| {
        let mut st = root.clone();
        st.apply(&problem, class);
        problem.choose(&mut st, v0, b - 1, class, 0);
        (st.best, st.local_nodes)
    });

    let mut nodes = 0u64;
    let mut best: Option<(f64, Vec<u128>, Vec<usize>)> = None;
    for (found, local) in outcomes {
        nodes += local;
        if let Some((value, classes, labels)) = found {
            if best.as_ref().is_none_or(|(bv, _, _)| value < bv - EPS) {
                best = Some((value, classes, labels));
            }
        }
    }
    let optimal = !problem.aborted.load(Ordering::Relaxed);
    let (coloring, entropy) = match best {
        Some((value, classes, labels)) if value <= seed_value + EPS => {
            (problem.to_coloring(&classes, &labels)?, value)
        }
        _ => (seed, seed_value),
    };
    Ok(EntropyColoring {
        lower_bound: if optimal { entropy } else { root_bound },
        coloring,
        entropy,
        optimal,
        nodes,
    })
}

fn objective_value(objective: Objective, c: &FoldColoring, w: &[f64]) -> f64 {
    match objective {
        Objective::ColorSet => {
            let mut blocks: HashMap<&[usize], f64> = HashMap::new();
            for (v, colors) in c.assignment.iter().enumerate() {
                *blocks.entry(colors.as_slice()).or_default() += w[v];
            }
            let mut masses: Vec<f64> = blocks.into_values().collect();
            masses.sort_by(f64::total_cmp);
            masses.into_iter().map(surprisal_term).sum()
        }
        Objective::ReplicaOrdered => {
            let mut total = 0.0;
            for j in 0..c.b {
                let mut dist = vec![0.0; c.a];
                for (v, colors) in c.assignment.iter().enumerate() {
                    dist[colors[j]] += w[v];
                }
                total += dist.into_iter().map(surprisal_term).sum::<f64>();
            }
            total
        }
    }
}

/// Least entropy of blocks of total mass `r` when no block exceeds `c`.
fn packed_entropy(r: f64, c: f64) -> f64 {
    if r <= EPS || c <= EPS {
        return 0.0;
    }
    let k = (r / c).floor();
    k * surprisal_term(c) + surprisal_term((r - k * c).max(0.0))
}

fn mass_of(w: &[f64], mut mask: u128) -> f64 {
    let mut total = 0.0;
    while mask != 0 {
        total += w[mask.trailing_zeros() as usize];
        mask &= mask - 1;
    }
    total
}

fn tail_bound(w: &[f64], maximal: &[u128], pending: u128) -> f64 {
    let r = mass_of(w, pending);
    let c = maximal
        .iter()
        .map(|&m| mass_of(w, m & pending))
        .fold(0.0, f64::max);
    packed_entropy(r, c.min(r))
}

struct Problem<'a> {
    b: usize,
    /// Classes the search may open.
    a: usize,
    /// Colors available to the returned coloring.
    palette: usize,
    non_adj: Vec<u128>,
    w: &'a [f64],
    order: Vec<usize>,
    alpha: usize,
    maximal: Vec<u128>,
    objective: Objective,
    node_cap: u64,
    incumbent: AtomicU64,
    nodes: AtomicU64,
    aborted: AtomicBool,
}

#[derive(Clone)]
struct State {
    demand: Vec<usize>,
    pending: u128,
    frozen_mask: u128,
    classes: Vec<u128>,
    membership: Vec<u64>,
    blocks: HashMap<u64, f64>,
    frozen: f64,
    remaining_demand: usize,
    local_nodes: u64,
    best: Option<(f64, Vec<u128>, Vec<usize>)>,
}

impl State {
    fn new(n: usize, b: usize) -> Self {
        let all = if n == 128 { u128::MAX } else { (1u128 << n) - 1 };
        Self {
            demand: vec![b; n],
            pending: all,
            frozen_mask: 0,
            classes: Vec::new(),
            membership: vec![0; n],
            blocks: HashMap::new(),
            frozen: 0.0,
            remaining_demand: b * n,
            local_nodes: 0,
            best: None,
        }
    }

    fn apply(&mut self, _p: &Problem, class: u128) {
        let id = self.classes.len();
        let mut m = class;
        while m != 0 {
            let u = m.trailing_zeros() as usize;
            m &= m - 1;
            self.demand[u] -= 1;
            if self.demand[u] == 0 {
                self.pending &= !(1u128 << u);
            }
            self.membership[u] |= 1u64 << id;
        }
        self.remaining_demand -= class.count_ones() as usize;
        self.classes.push(class);
    }

    fn undo(&mut self) {
        let class = self.classes.pop().expect("class to undo");
        let id = self.classes.len();
        let mut m = class;
        while m != 0 {
            let u = m.trailing_zeros() as usize;
            m &= m - 1;
            self.demand[u] += 1;
            self.pending |= 1u128 << u;
            self.membership[u] &= !(1u64 << id);
        }
        self.remaining_demand += class.count_ones() as usize;
    }
}

impl Problem<'_> {
    fn incumbent(&self) -> f64 {
        f64::from_bits(self.incumbent.load(Ordering::Relaxed))
    }

    fn offer(&self, value: f64) {
        let mut cur = self.incumbent.load(Ordering::Relaxed);
        while value < f64::from_bits(cur) {
            match self.incumbent.compare_exchange_weak(
                cur,
                value.to_bits(),
                Ordering::Relaxed,
                Ordering::Relaxed,
            ) {
                Ok(_) => break,
                Err(seen) => cur = seen,
            }
        }
    }

    fn min_class_size(&self, st: &State) -> usize {
        let left_after = self.a.saturating_sub(st.classes.len() + 1);
        st.remaining_demand.saturating_sub(left_after * self.alpha)
    }

    /// Independent classes containing `v`, drawn from `pending`, of size at
    /// least `smin` and mask at most `prev`, larger high-mass classes first.
    fn classes_for(&self, pending: u128, v: usize, smin: usize, prev: u128) -> Vec<u128> {
        let cands: Vec<usize> = self
            .order
            .iter()
            .copied()
            .filter(|&u| pending & self.non_adj[v] & (1u128 << u) != 0)
            .collect();
        let mut out = Vec::new();
        self.extend(&cands, 0, 1u128 << v, self.non_adj[v] & pending, 1, smin, prev, &mut out);
        out
    }

    #[allow(clippy::too_many_arguments)]
    fn extend(
        &self,
        cands: &[usize],
        i: usize,
        class: u128,
        allowed: u128,
        size: usize,
        smin: usize,
        prev: u128,
        out: &mut Vec<u128>,
    ) {
        let reachable = cands[i..].iter().filter(|&&u| allowed & (1u128 << u) != 0).count();
        if size + reachable < smin {
            return;
        }
        if i == cands.len() {
            if class <= prev {
                out.push(class);
            }
            return;
        }
        let u = cands[i];
        let bit = 1u128 << u;
        if allowed & bit != 0 {
            self.extend(cands, i + 1, class | bit, allowed & self.non_adj[u], size + 1, smin, prev, out);
        }
        self.extend(cands, i + 1, class, allowed & !bit, size, smin, prev, out);
    }

    fn step(&self, st: &mut State) {
        if self.aborted.load(Ordering::Relaxed) {
            return;
        }
        st.local_nodes += 1;
        if st.local_nodes.is_multiple_of(NODE_BATCH)
            && self.nodes.fetch_add(NODE_BATCH, Ordering::Relaxed) + NODE_BATCH > self.node_cap
        {
            self.aborted.store(true, Ordering::Relaxed);
            return;
        }
        if st.pending == 0 {
            self.leaf(st);
            return;
        }
        if st.frozen + tail_bound(self.w, &self.maximal, st.pending) > self.incumbent() + EPS {
            return;
        }
        if st.classes.len() + st.remaining_demand.div_ceil(self.alpha) > self.a {
            return;
        }
        let v = self
            .order
            .iter()
            .copied()
            .find(|&u| st.pending & (1u128 << u) != 0)
            .expect("pending vertex");
        let start = st.classes.len();
        self.choose(st, v, st.demand[v], u128::MAX, start);
    }

    /// Add `left` more classes containing `v`, then freeze and recurse.
    fn choose(&self, st: &mut State, v: usize, left: usize, prev: u128, step_start: usize) {
        if left == 0 {
            let saved = self.freeze(st, step_start);
            self.step(st);
            self.thaw(st, saved);
            return;
        }
        if st.classes.len() >= self.a {
            return;
        }
        let smin = self.min_class_size(st);
        for class in self.classes_for(st.pending, v, smin, prev) {
            if self.aborted.load(Ordering::Relaxed) {
                return;
            }
            st.apply(self, class);
            self.choose(st, v, left - 1, class, step_start);
            st.undo();
        }
    }

    fn freeze(&self, st: &mut State, step_start: usize) -> (f64, u128, Vec<(u64, Option<f64>)>) {
        let touched = st.classes[step_start..].iter().fold(0u128, |m, c| m | c);
        let mut newly = touched & !st.pending & !st.frozen_mask;
        let saved_frozen = st.frozen;
        let saved_mask = st.frozen_mask;
        let mut log = Vec::new();
        while newly != 0 {
            let u = newly.trailing_zeros() as usize;
            newly &= newly - 1;
            let key = st.membership[u];
            let old = st.blocks.get(&key).copied();
            let before = old.unwrap_or(0.0);
            let after = before + self.w[u];
            st.frozen += surprisal_term(after) - surprisal_term(before);
            st.blocks.insert(key, after);
            st.frozen_mask |= 1u128 << u;
            log.push((key, old));
        }
        (saved_frozen, saved_mask, log)
    }

    fn thaw(&self, st: &mut State, saved: (f64, u128, Vec<(u64, Option<f64>)>)) {
        let (frozen, mask, log) = saved;
        for (key, old) in log.into_iter().rev() {
            match old {
                Some(m) => st.blocks.insert(key, m),
                None => st.blocks.remove(&key),
            };
        }
        st.frozen = frozen;
        st.frozen_mask = mask;
    }

    fn leaf(&self, st: &mut State) {
        let (value, labels) = match self.objective {
            Objective::ColorSet => {
                let mut masses: Vec<f64> = st.blocks.values().copied().collect();
                masses.sort_by(f64::total_cmp);
                let exact: f64 = masses.into_iter().map(surprisal_term).sum();
                (exact, (0..st.classes.len()).collect())
            }
            Objective::ReplicaOrdered => self.best_ordering(&st.classes),
        };
        if st.best.as_ref().is_none_or(|(bv, _, _)| value < bv - EPS) {
            st.best = Some((value, st.classes.clone(), labels));
        }
        self.offer(value);
    }

    /// Class ordering minimizing the replica-ordered objective.
    fn best_ordering(&self, classes: &[u128]) -> (f64, Vec<usize>) {
        let k = classes.len();
        let mut perm: Vec<usize> = (0..k).collect();
        let mut best = (f64::INFINITY, perm.clone());
        loop {
            let value = self.replica_value(classes, &perm);
            if value < best.0 - EPS {
                best = (value, perm.clone());
            }
            if !next_permutation(&mut perm) {
                break;
            }
        }
        best
    }

    fn replica_value(&self, classes: &[u128], labels: &[usize]) -> f64 {
        let n = self.w.len();
        let mut dists = vec![vec![0.0; classes.len()]; self.b];
        for v in 0..n {
            let mut colors: Vec<usize> = classes
                .iter()
                .enumerate()
                .filter(|(_, &c)| c & (1u128 << v) != 0)
                .map(|(i, _)| labels[i])
                .collect();
            colors.sort_unstable();
            for (j, &c) in colors.iter().enumerate() {
                dists[j][c] += self.w[v];
            }
        }
        dists
            .into_iter()
            .map(|d| d.into_iter().map(surprisal_term).sum::<f64>())
            .sum()
    }

    fn to_coloring(&self, classes: &[u128], labels: &[usize]) -> Result<FoldColoring> {
        let n = self.w.len();
        let assignment = (0..n)
            .map(|v| {
                classes
                    .iter()
                    .enumerate()
                    .filter(|(_, &c)| c & (1u128 << v) != 0)
                    .map(|(i, _)| labels[i])
                    .collect()
            })
            .collect();
        FoldColoring::from_assignment(self.b, self.palette, assignment)
    }
}

fn next_permutation(p: &mut [usize]) -> bool {
    let Some(i) = (1..p.len()).rev().find(|&i| p[i - 1] < p[i]) else {
        return false;
    };
    let j = (i..p.len()).rev().find(|&j| p[j] > p[i - 1]).unwrap();
    p.swap(i - 1, j);
    p[i..].reverse();
    true
}
