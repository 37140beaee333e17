//! Undirected simple graphs on labelled vertices, AND-power graphs and
//! independent-set enumeration.

use std::collections::HashMap;
use std::fmt::Write as _;

use fixedbitset::FixedBitSet;
use serde::Serialize;

use crate::budget::Budget;
use crate::coloring::FoldColoring;
use crate::error::{Error, Result};
use crate::exec;

/// Separator used when joining tuple coordinates into a power-graph label.
pub const TUPLE_SEPARATOR: &str = ",";

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    labels: Vec<String>,
    index: HashMap<String, usize>,
    /// Sorted neighbour lists.
    adj: Vec<Vec<usize>>,
}

impl Graph {
    pub fn new(labels: Vec<String>) -> Result<Self> {
        let mut index = HashMap::with_capacity(labels.len());
        for (i, l) in labels.iter().enumerate() {
            if index.insert(l.clone(), i).is_some() {
                return Err(Error::InvalidGraph(format!("duplicate vertex `{l}`")));
            }
        }
        let adj = vec![Vec::new(); labels.len()];
        Ok(Self { labels, index, adj })
    }

    /// Build from labels and index pairs. Duplicate edges are merged.
    pub fn from_index_edges(labels: Vec<String>, edges: &[(usize, usize)]) -> Result<Self> {
        let mut g = Self::new(labels)?;
        for &(u, v) in edges {
            g.add_edge(u, v)?;
        }
        Ok(g)
    }

    pub fn from_label_edges<S: AsRef<str>>(labels: Vec<String>, edges: &[(S, S)]) -> Result<Self> {
        let mut g = Self::new(labels)?;
        for (a, b) in edges {
            let (u, v) = (g.vertex(a.as_ref())?, g.vertex(b.as_ref())?);
            g.add_edge(u, v)?;
        }
        Ok(g)
    }

    pub fn add_edge(&mut self, u: usize, v: usize) -> Result<()> {
        let n = self.labels.len();
        if u >= n || v >= n {
            return Err(Error::InvalidGraph(format!("edge ({u},{v}) out of range")));
        }
        if u == v {
            return Err(Error::InvalidGraph(format!("self-loop at `{}`", self.labels[u])));
        }
        if let Err(pos) = self.adj[u].binary_search(&v) {
            self.adj[u].insert(pos, v);
            let pos = self.adj[v].binary_search(&u).unwrap_err();
            self.adj[v].insert(pos, u);
        }
        Ok(())
    }

    pub fn complete(labels: Vec<String>) -> Result<Self> {
        let n = labels.len();
        let mut g = Self::new(labels)?;
        g.adj = (0..n).map(|u| (0..n).filter(|&v| v != u).collect()).collect();
        Ok(g)
    }

    pub fn vertex_count(&self) -> usize {
        self.labels.len()
    }

    pub fn edge_count(&self) -> usize {
        self.adj.iter().map(Vec::len).sum::<usize>() / 2
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn label(&self, v: usize) -> &str {
        &self.labels[v]
    }

    pub fn vertex(&self, label: &str) -> Result<usize> {
        self.index
            .get(label)
            .copied()
            .ok_or_else(|| Error::UnknownVertex(label.to_string()))
    }

    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.adj[v]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adj[v].len()
    }

    #[inline]
    pub fn adjacent(&self, u: usize, v: usize) -> bool {
        self.adj[u].binary_search(&v).is_ok()
    }

    /// Edges as `(u, v)` with `u < v`, in lexicographic order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.adj
            .iter()
            .enumerate()
            .flat_map(|(u, ns)| ns.iter().filter(move |&&v| v > u).map(move |&v| (u, v)))
    }

    /// One `u128` neighbour mask per vertex, for graphs of at most 128 vertices.
    pub fn adjacency_masks(&self) -> Option<Vec<u128>> {
        if self.vertex_count() > 128 {
            return None;
        }
        Some(
            self.adj
                .iter()
                .map(|ns| ns.iter().fold(0u128, |m, &v| m | (1u128 << v)))
                .collect(),
        )
    }

    /// True iff no edge joins two members of `set`.
    pub fn is_independent_indices(&self, set: &[usize]) -> bool {
        set.iter()
            .enumerate()
            .all(|(i, &u)| set[i + 1..].iter().all(|&v| u != v && !self.adjacent(u, v)))
    }

    pub fn to_doc(&self) -> GraphDoc {
        GraphDoc {
            vertices: self.labels.clone(),
            edges: self
                .edges()
                .map(|(u, v)| [self.labels[u].clone(), self.labels[v].clone()])
                .collect(),
        }
    }
}

/// Serializable vertex and edge lists.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct GraphDoc {
    pub vertices: Vec<String>,
    pub edges: Vec<[String; 2]>,
}

/// `is_independent` on vertex labels. The empty set is independent.
pub fn is_independent<S: AsRef<str>>(g: &Graph, set: &[S]) -> Result<bool> {
    let idx = set
        .iter()
        .map(|s| g.vertex(s.as_ref()))
        .collect::<Result<Vec<_>>>()?;
    Ok(g.is_independent_indices(&idx))
}

/// Decode a power-graph vertex index into base-graph coordinates.
pub fn tuple_of(index: usize, base: usize, n: usize) -> Vec<usize> {
    let mut out = vec![0; n];
    let mut rest = index;
    for slot in out.iter_mut().rev() {
        *slot = rest % base;
        rest /= base;
    }
    out
}

/// Inverse of [`tuple_of`].
pub fn index_of(tuple: &[usize], base: usize) -> usize {
    tuple.iter().fold(0, |acc, &c| acc * base + c)
}

/// `n`-th AND power: vertices are `n`-tuples in lexicographic order, and two
/// distinct tuples are adjacent iff some coordinate pair is an edge of `g`.
pub fn and_power(g: &Graph, n: usize, budget: &Budget) -> Result<Graph> {
    if n == 0 {
        return Err(Error::InvalidArgument("power must be at least 1".into()));
    }
    let k = g.vertex_count();
    let total = (k as u128).checked_pow(n as u32).unwrap_or(u128::MAX);
    if total > budget.power_vertices as u128 {
        return Err(Error::Budget {
            what: "power graph vertices",
            required: total,
            bound: budget.power_vertices as u128,
        });
    }
    let total = total as usize;
    if n == 1 {
        return Ok(g.clone());
    }
    let base_adj: Vec<Vec<bool>> = (0..k)
        .map(|u| (0..k).map(|v| g.adjacent(u, v)).collect())
        .collect();
    let tuples: Vec<Vec<usize>> = (0..total).map(|i| tuple_of(i, k, n)).collect();
    let labels = tuples
        .iter()
        .map(|t| {
            t.iter()
                .map(|&c| g.label(c))
                .collect::<Vec<_>>()
                .join(TUPLE_SEPARATOR)
        })
        .collect::<Vec<_>>();
    let adj = exec::map_range(total, |i| {
        let t = &tuples[i];
        (0..total)
            .filter(|&j| {
                j != i && t.iter().zip(&tuples[j]).any(|(&a, &b)| base_adj[a][b])
            })
            .collect::<Vec<_>>()
    });
    let mut out = Graph::new(labels)?;
    out.adj = adj;
    Ok(out)
}

/// Independent sets of a graph, in canonical order (size, then lexicographic
/// on sorted vertex indices), with the per-vertex membership index `I(G, x)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IndependentSetFamily {
    pub sets: Vec<Vec<usize>>,
    pub by_vertex: Vec<Vec<usize>>,
    pub maximal_only: bool,
}

impl IndependentSetFamily {
    fn from_sets(mut sets: Vec<Vec<usize>>, vertex_count: usize, maximal_only: bool) -> Self {
        for s in &mut sets {
            s.sort_unstable();
        }
        sets.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
        sets.dedup();
        let mut by_vertex = vec![Vec::new(); vertex_count];
        for (i, s) in sets.iter().enumerate() {
            for &v in s {
                by_vertex[v].push(i);
            }
        }
        Self {
            sets,
            by_vertex,
            maximal_only,
        }
    }

    pub fn len(&self) -> usize {
        self.sets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sets.is_empty()
    }

    pub fn containing(&self, v: usize) -> &[usize] {
        &self.by_vertex[v]
    }

    pub fn labelled(&self, g: &Graph) -> Vec<Vec<String>> {
        self.sets
            .iter()
            .map(|s| s.iter().map(|&v| g.label(v).to_string()).collect())
            .collect()
    }
}

pub fn enumerate_independent_sets(
    g: &Graph,
    maximal_only: bool,
    budget: &Budget,
) -> Result<IndependentSetFamily> {
    let n = g.vertex_count();
    let sets = if maximal_only {
        if n > budget.maximal_sets_vertices {
            return Err(Error::Budget {
                what: "vertices for maximal independent set enumeration",
                required: n as u128,
                bound: budget.maximal_sets_vertices as u128,
            });
        }
        maximal_independent_sets(g, budget.max_sets)?
    } else {
        if n > budget.all_sets_vertices.min(64) {
            return Err(Error::Budget {
                what: "vertices for full independent set enumeration",
                required: n as u128,
                bound: budget.all_sets_vertices.min(64) as u128,
            });
        }
        all_independent_sets(g, budget.max_sets)?
    };
    Ok(IndependentSetFamily::from_sets(sets, n, maximal_only))
}

fn all_independent_sets(g: &Graph, max_sets: usize) -> Result<Vec<Vec<usize>>> {
    let n = g.vertex_count();
    let nonadj: Vec<u64> = (0..n)
        .map(|u| {
            let adj = g.neighbors(u).iter().fold(0u64, |m, &v| m | (1 << v));
            !adj & !(1u64 << u)
        })
        .collect();

    fn extend(
        current: &mut Vec<usize>,
        candidates: u64,
        nonadj: &[u64],
        out: &mut Vec<Vec<usize>>,
        max_sets: usize,
    ) -> bool {
        let mut rest = candidates;
        while rest != 0 {
            let v = rest.trailing_zeros() as usize;
            rest &= rest - 1;
            current.push(v);
            out.push(current.clone());
            if out.len() > max_sets {
                return false;
            }
            // only vertices above v keep the enumeration duplicate-free
            let above = if v == 63 { 0 } else { !0u64 << (v + 1) };
            if !extend(current, candidates & nonadj[v] & above, nonadj, out, max_sets) {
                return false;
            }
            current.pop();
        }
        true
    }

    let all = if n == 64 { !0u64 } else { (1u64 << n) - 1 };
    let mut out = Vec::new();
    if !extend(&mut Vec::new(), all, &nonadj, &mut out, max_sets) {
        return Err(Error::Budget {
            what: "independent sets",
            required: out.len() as u128,
            bound: max_sets as u128,
        });
    }
    Ok(out)
}

/// Bron–Kerbosch with pivoting on the complement graph; outer loop fans out.
fn maximal_independent_sets(g: &Graph, max_sets: usize) -> Result<Vec<Vec<usize>>> {
    let n = g.vertex_count();
    let nonadj: Vec<FixedBitSet> = (0..n)
        .map(|u| {
            let mut s = FixedBitSet::with_capacity(n);
            s.insert_range(..);
            s.set(u, false);
            for &v in g.neighbors(u) {
                s.set(v, false);
            }
            s
        })
        .collect();

    fn expand(
        r: &mut Vec<usize>,
        p: FixedBitSet,
        mut x: FixedBitSet,
        nonadj: &[FixedBitSet],
        out: &mut Vec<Vec<usize>>,
        max_sets: usize,
    ) -> bool {
        if p.is_clear() {
            if x.is_clear() {
                out.push(r.clone());
                return out.len() <= max_sets;
            }
            return true;
        }
        let pivot = p
            .ones()
            .chain(x.ones())
            .max_by_key(|&u| (p.intersection(&nonadj[u]).count(), std::cmp::Reverse(u)))
            .expect("p is nonempty");
        let mut candidates = p.clone();
        candidates.difference_with(&nonadj[pivot]);
        let mut p = p;
        for v in candidates.ones() {
            r.push(v);
            let mut np = p.clone();
            np.intersect_with(&nonadj[v]);
            let mut nx = x.clone();
            nx.intersect_with(&nonadj[v]);
            if !expand(r, np, nx, nonadj, out, max_sets) {
                return false;
            }
            r.pop();
            p.set(v, false);
            x.insert(v);
        }
        true
    }

    let branches = exec::map_range(n, |v| {
        let mut p = FixedBitSet::with_capacity(n);
        let mut x = FixedBitSet::with_capacity(n);
        for u in nonadj[v].ones() {
            if u > v {
                p.insert(u);
            } else {
                x.insert(u);
            }
        }
        let mut out = Vec::new();
        let ok = expand(&mut vec![v], p, x, &nonadj, &mut out, max_sets);
        (ok, out)
    });
    let mut all = Vec::new();
    for (ok, sets) in branches {
        all.extend(sets);
        if !ok || all.len() > max_sets {
            return Err(Error::Budget {
                what: "maximal independent sets",
                required: all.len() as u128,
                bound: max_sets as u128,
            });
        }
    }
    Ok(all)
}

const PALETTE: [&str; 12] = [
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f",
    "#bcbd22", "#17becf", "#aec7e8", "#ffbb78",
];

fn color_name(id: usize) -> String {
    match PALETTE.get(id) {
        Some(c) => (*c).to_string(),
        None => {
            let hue = (id as f64 * 0.618_033_988_749_895).fract();
            format!("{hue:.3} 0.600 0.900")
        }
    }
}

fn dot_quote(s: &str) -> String {
    format!("\"{}\"", s.replace('\\', "\\\\").replace('"', "\\\""))
}

/// Graphviz text. Colored vertices are filled (or wedged, when they carry
/// several colors) and labelled with their color ids.
pub fn export_dot(g: &Graph, coloring: Option<&FoldColoring>) -> Result<String> {
    if let Some(c) = coloring {
        c.validate(g)?;
    }
    let mut out = String::from("graph G {\n  node [shape=circle];\n");
    for v in 0..g.vertex_count() {
        let label = g.label(v);
        match coloring {
            None => writeln!(out, "  {};", dot_quote(label)).unwrap(),
            Some(c) => {
                let colors = c.colors_of(v);
                let fill = colors.iter().map(|&k| color_name(k)).collect::<Vec<_>>().join(":");
                let ids = colors.iter().map(|k| k.to_string()).collect::<Vec<_>>().join(",");
                let style = if colors.len() > 1 { "wedged" } else { "filled" };
                writeln!(
                    out,
                    "  {} [label={}, style={style}, fillcolor={}];",
                    dot_quote(label),
                    dot_quote(&format!("{label}\\n{{{ids}}}")),
                    dot_quote(&fill)
                )
                .unwrap();
            }
        }
    }
    for (u, v) in g.edges() {
        writeln!(out, "  {} -- {};", dot_quote(g.label(u)), dot_quote(g.label(v))).unwrap();
    }
    out.push_str("}\n");
    Ok(out)
}

/// Labels `"0".."n-1"`.
pub fn numbered_labels(n: usize) -> Vec<String> {
    (0..n).map(|i| i.to_string()).collect()
}

/// Cycle on `n` vertices labelled `0..n`.
pub fn cycle(n: usize) -> Graph {
    let edges: Vec<(usize, usize)> = (0..n).map(|i| (i, (i + 1) % n)).collect();
    Graph::from_index_edges(numbered_labels(n), &edges).expect("valid cycle")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c5() -> Graph {
        cycle(5)
    }

    #[test]
    fn rejects_bad_edges() {
        let mut g = Graph::new(numbered_labels(3)).unwrap();
        assert!(g.add_edge(0, 0).is_err());
        assert!(g.add_edge(0, 3).is_err());
        assert!(Graph::new(vec!["a".into(), "a".into()]).is_err());
        g.add_edge(0, 1).unwrap();
        g.add_edge(1, 0).unwrap();
        assert_eq!(g.edge_count(), 1);
    }

    #[test]
    fn power_one_is_identity() {
        let g = c5();
        assert_eq!(and_power(&g, 1, &Budget::default()).unwrap(), g);
    }

    #[test]
    fn power_two_has_25_vertices_and_matches_double_loop() {
        let g = c5();
        let g2 = and_power(&g, 2, &Budget::default()).unwrap();
        assert_eq!(g2.vertex_count(), 25);
        assert_eq!(g2.label(7), "1,2");
        for i in 0..25 {
            for j in 0..25 {
                let (a, b) = (tuple_of(i, 5, 2), tuple_of(j, 5, 2));
                let expected = i != j && (g.adjacent(a[0], b[0]) || g.adjacent(a[1], b[1]));
                assert_eq!(g2.adjacent(i, j), expected, "{i} {j}");
            }
        }
    }

    #[test]
    fn power_of_edgeless_is_edgeless() {
        let g = Graph::new(numbered_labels(3)).unwrap();
        let g3 = and_power(&g, 3, &Budget::default()).unwrap();
        assert_eq!(g3.vertex_count(), 27);
        assert_eq!(g3.edge_count(), 0);
    }

    #[test]
    fn power_budget_is_enforced() {
        let budget = Budget {
            power_vertices: 100,
            ..Budget::default()
        };
        match and_power(&c5(), 3, &budget) {
            Err(Error::Budget { required, bound, .. }) => {
                assert_eq!(required, 125);
                assert_eq!(bound, 100);
            }
            other => panic!("expected budget error, got {other:?}"),
        }
    }

    #[test]
    fn c5_independent_sets() {
        let g = c5();
        let all = enumerate_independent_sets(&g, false, &Budget::default()).unwrap();
        assert_eq!(all.len(), 10);
        assert_eq!(all.sets.iter().filter(|s| s.len() == 1).count(), 5);
        assert_eq!(all.sets.iter().filter(|s| s.len() == 2).count(), 5);
        let max = enumerate_independent_sets(&g, true, &Budget::default()).unwrap();
        assert_eq!(max.sets, vec![vec![0, 2], vec![0, 3], vec![1, 3], vec![1, 4], vec![2, 4]]);
        for v in 0..5 {
            assert_eq!(all.containing(v).len(), 3);
            assert_eq!(max.containing(v).len(), 2);
        }
    }

    #[test]
    fn complete_graph_maximal_sets_are_singletons() {
        let k4 = Graph::complete(numbered_labels(4)).unwrap();
        let max = enumerate_independent_sets(&k4, true, &Budget::default()).unwrap();
        assert_eq!(max.sets, vec![vec![0], vec![1], vec![2], vec![3]]);
    }

    #[test]
    fn maximal_sets_match_brute_force() {
        // oracle: every subset checked for independence and maximality
        let g = Graph::from_index_edges(
            numbered_labels(7),
            &[(0, 1), (1, 2), (2, 3), (3, 0), (3, 4), (4, 5), (5, 6), (2, 5)],
        )
        .unwrap();
        let n = g.vertex_count();
        let mut expected = Vec::new();
        for mask in 1u32..(1 << n) {
            let s: Vec<usize> = (0..n).filter(|&v| mask & (1 << v) != 0).collect();
            if !g.is_independent_indices(&s) {
                continue;
            }
            let maximal = (0..n).filter(|v| mask & (1 << v) == 0).all(|v| {
                let mut t = s.clone();
                t.push(v);
                !g.is_independent_indices(&t)
            });
            if maximal {
                expected.push(s);
            }
        }
        expected.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
        let got = enumerate_independent_sets(&g, true, &Budget::default()).unwrap();
        assert_eq!(got.sets, expected);
    }

    #[test]
    fn enumeration_budget() {
        let g = Graph::new(numbered_labels(20)).unwrap();
        let budget = Budget {
            max_sets: 1000,
            ..Budget::default()
        };
        assert!(matches!(
            enumerate_independent_sets(&g, false, &budget),
            Err(Error::Budget { .. })
        ));
        let big = Graph::new(numbered_labels(65)).unwrap();
        assert!(enumerate_independent_sets(&big, false, &Budget::default()).is_err());
    }

    #[test]
    fn independence_by_label() {
        let g = Graph::from_label_edges(
            ["-2", "-1", "0", "1", "2"].iter().map(|s| s.to_string()).collect(),
            &[("-2", "-1"), ("-2", "0"), ("0", "1"), ("1", "2"), ("2", "-1")],
        )
        .unwrap();
        assert!(is_independent(&g, &["-2", "2"]).unwrap());
        assert!(!is_independent(&g, &["-2", "-1"]).unwrap());
        assert!(is_independent::<&str>(&g, &[]).unwrap());
        assert!(is_independent(&g, &["9"]).is_err());
    }

    #[test]
    fn dot_is_deterministic() {
        let g = c5();
        let a = export_dot(&g, None).unwrap();
        assert_eq!(a, export_dot(&g, None).unwrap());
        assert_eq!(a.matches(" -- ").count(), 5);
        assert_eq!(a.lines().filter(|l| l.trim_end().ends_with(';') && !l.contains("--") && !l.contains("node [")).count(), 5);
    }
}
