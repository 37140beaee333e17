//! Characteristic graphs of `(X1, X2, f)` and their block (power) versions.

use num_traits::Signed;

use crate::budget::Budget;
use crate::error::{Error, Result};
use crate::graphs::{self, Graph};
use crate::probability::{Rational, SourceModel};

/// First `x2` (alphabet order) under which `u` and `v` both have positive mass
/// and `f` differs, as an `x2` index.
pub fn confusable_index(m: &SourceModel, u: usize, v: usize) -> Option<usize> {
    if u == v {
        return None;
    }
    (0..m.x2_alphabet().len())
        .find(|&x2| m.positive(u, x2) && m.positive(v, x2) && m.f(u, x2) != m.f(v, x2))
}

/// Label-level [`confusable_index`]: the witnessing `x2` symbol, if any.
pub fn confusable(m: &SourceModel, u: &str, v: &str) -> Result<Option<String>> {
    let (a, b) = (m.x1_index(u)?, m.x1_index(v)?);
    Ok(confusable_index(m, a, b).map(|x2| m.x2_alphabet()[x2].clone()))
}

/// Vertices are the `x1` alphabet; `u ~ v` iff some `x2` confuses them.
pub fn build_characteristic_graph(m: &SourceModel) -> Graph {
    let k = m.x1_alphabet().len();
    let mut edges = Vec::new();
    for u in 0..k {
        for v in u + 1..k {
            if confusable_index(m, u, v).is_some() {
                edges.push((u, v));
            }
        }
    }
    Graph::from_index_edges(m.x1_alphabet().to_vec(), &edges).expect("alphabet is duplicate-free")
}

/// The i.i.d. `n`-block view of a source model: the AND-power characteristic
/// graph plus product-measure helpers indexed consistently with it.
#[derive(Debug, Clone)]
pub struct BlockSource<'a> {
    model: &'a SourceModel,
    n: usize,
    graph: Graph,
}

impl<'a> BlockSource<'a> {
    pub fn new(model: &'a SourceModel, n: usize, budget: &Budget) -> Result<Self> {
        let base = build_characteristic_graph(model);
        let graph = graphs::and_power(&base, n, budget)?;
        Ok(Self { model, n, graph })
    }

    pub fn model(&self) -> &'a SourceModel {
        self.model
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn graph(&self) -> &Graph {
        &self.graph
    }

    pub fn x1_size(&self) -> usize {
        self.model.x1_alphabet().len()
    }

    pub fn x2_size(&self) -> usize {
        self.model.x2_alphabet().len()
    }

    pub fn tuple(&self, vertex: usize) -> Vec<usize> {
        graphs::tuple_of(vertex, self.x1_size(), self.n)
    }

    /// Vertex of the block graph for a sequence of `x1` symbols.
    pub fn vertex_of_symbols<S: AsRef<str>>(&self, symbols: &[S]) -> Result<usize> {
        if symbols.len() != self.n {
            return Err(Error::InvalidArgument(format!(
                "expected {} source symbols, got {}",
                self.n,
                symbols.len()
            )));
        }
        let idx = symbols
            .iter()
            .map(|s| self.model.x1_index(s.as_ref()))
            .collect::<Result<Vec<_>>>()?;
        Ok(graphs::index_of(&idx, self.x1_size()))
    }

    pub fn side_of_symbols<S: AsRef<str>>(&self, symbols: &[S]) -> Result<Vec<usize>> {
        if symbols.len() != self.n {
            return Err(Error::InvalidArgument(format!(
                "expected {} side-information symbols, got {}",
                self.n,
                symbols.len()
            )));
        }
        symbols.iter().map(|s| self.model.x2_index(s.as_ref())).collect()
    }

    /// Product marginal `P(X1^n = v)` for every block vertex.
    pub fn vertex_probs(&self) -> Vec<Rational> {
        let marginal = self.model.marginal_x1();
        (0..self.graph.vertex_count())
            .map(|v| {
                self.tuple(v)
                    .iter()
                    .map(|&c| marginal.probs()[c].clone())
                    .product()
            })
            .collect()
    }

    /// `P(X2^n = s)` for an index sequence.
    pub fn side_prob(&self, side: &[usize]) -> Rational {
        let marginal = self.model.marginal_x2();
        side.iter().map(|&c| marginal.probs()[c].clone()).product()
    }

    /// `P(X1^n = v, X2^n = s)`.
    pub fn joint_prob(&self, vertex: usize, side: &[usize]) -> Rational {
        self.tuple(vertex)
            .iter()
            .zip(side)
            .map(|(&u, &x2)| self.model.prob(u, x2).clone())
            .product()
    }

    /// Every coordinate of `vertex` has positive joint mass with `side`.
    pub fn on_support(&self, vertex: usize, side: &[usize]) -> bool {
        self.tuple(vertex)
            .iter()
            .zip(side)
            .all(|(&u, &x2)| self.model.positive(u, x2))
    }

    /// All side sequences with positive probability, lexicographic.
    pub fn side_sequences(&self) -> Vec<Vec<usize>> {
        let marginal = self.model.marginal_x2();
        let live: Vec<usize> = (0..self.x2_size())
            .filter(|&c| marginal.probs()[c].is_positive())
            .collect();
        let count = live.len().pow(self.n as u32);
        (0..count)
            .map(|i| {
                graphs::tuple_of(i, live.len(), self.n)
                    .into_iter()
                    .map(|k| live[k])
                    .collect()
            })
            .collect()
    }

    /// Block vertices consistent with `side` (product of conditional supports).
    pub fn conditional_vertices(&self, side: &[usize]) -> Vec<usize> {
        (0..self.graph.vertex_count())
            .filter(|&v| self.on_support(v, side))
            .collect()
    }

    /// `P(X1^n = v | X2^n = s)` for `v` in [`Self::conditional_vertices`].
    pub fn conditional_probs(&self, side: &[usize]) -> Vec<(usize, Rational)> {
        let ps = self.side_prob(side);
        self.conditional_vertices(side)
            .into_iter()
            .map(|v| (v, self.joint_prob(v, side) / &ps))
            .collect()
    }

    pub fn outcome(&self, vertex: usize, side: &[usize]) -> Vec<String> {
        self.tuple(vertex)
            .iter()
            .zip(side)
            .map(|(&u, &x2)| self.model.f(u, x2).to_string())
            .collect()
    }
}
