//! Proper and b-fold colorings, chromatic and fractional chromatic numbers,
//! and minimum-entropy coloring.

mod search;

use num_bigint::BigInt;
use num_traits::{ToPrimitive, Zero};
use serde::Serialize;
use serde_json::{Map, Value};

use crate::budget::Budget;
use crate::error::{Error, Result};
use crate::exec;
use crate::graphs::{enumerate_independent_sets, Graph, IndependentSetFamily};
use crate::lp::{common_denominator, solve_ilp, solve_lp, CoveringProgram, LpSolution};
use crate::probability::{entropy_of_rationals, Pmf, Rational};
use crate::results::rational_string;

pub use search::{min_entropy_coloring, min_entropy_coloring_with, EntropyColoring, Objective};

/// An `a:b` coloring: every vertex holds `b` distinct colors out of `0..a`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FoldColoring {
    pub b: usize,
    pub a: usize,
    /// Sorted color ids per vertex.
    pub assignment: Vec<Vec<usize>>,
    /// Sorted vertices per color id.
    pub class_map: Vec<Vec<usize>>,
}

impl FoldColoring {
    pub fn from_assignment(b: usize, a: usize, mut assignment: Vec<Vec<usize>>) -> Result<Self> {
        let mut class_map = vec![Vec::new(); a];
        for (v, colors) in assignment.iter_mut().enumerate() {
            colors.sort_unstable();
            colors.dedup();
            if colors.len() != b {
                return Err(Error::InvalidColoring(format!(
                    "vertex {v} has {} distinct colors, expected {b}",
                    colors.len()
                )));
            }
            for &c in colors.iter() {
                if c >= a {
                    return Err(Error::InvalidColoring(format!("color {c} is not below a = {a}")));
                }
                class_map[c].push(v);
            }
        }
        Ok(Self {
            b,
            a,
            assignment,
            class_map,
        })
    }

    /// Each vertex takes the first `b` classes (by position) that contain it.
    pub fn from_classes(b: usize, classes: &[Vec<usize>], vertex_count: usize) -> Result<Self> {
        let mut assignment = vec![Vec::with_capacity(b); vertex_count];
        for (c, class) in classes.iter().enumerate() {
            for &v in class {
                if v >= vertex_count {
                    return Err(Error::InvalidColoring(format!("class {c} names vertex {v}")));
                }
                if assignment[v].len() < b {
                    assignment[v].push(c);
                }
            }
        }
        Self::from_assignment(b, classes.len(), assignment)
    }

    pub fn vertex_count(&self) -> usize {
        self.assignment.len()
    }

    pub fn colors_of(&self, v: usize) -> &[usize] {
        &self.assignment[v]
    }

    /// `"3"` for one color, `"0+3"` for several.
    pub fn set_label(&self, v: usize) -> String {
        set_label(&self.assignment[v])
    }

    /// Colors that some vertex uses.
    pub fn used_colors(&self) -> usize {
        self.class_map.iter().filter(|c| !c.is_empty()).count()
    }

    pub fn distinct_sets(&self) -> usize {
        let mut sets: Vec<&Vec<usize>> = self.assignment.iter().collect();
        sets.sort();
        sets.dedup();
        sets.len()
    }

    /// Checks set sizes, the color range, class consistency and that adjacent
    /// vertices get disjoint sets.
    pub fn validate(&self, g: &Graph) -> Result<()> {
        if self.assignment.len() != g.vertex_count() {
            return Err(Error::InvalidColoring(format!(
                "coloring covers {} vertices, graph has {}",
                self.assignment.len(),
                g.vertex_count()
            )));
        }
        if self.class_map.len() != self.a {
            return Err(Error::InvalidColoring("class map size differs from a".into()));
        }
        for (v, colors) in self.assignment.iter().enumerate() {
            if colors.len() != self.b || colors.windows(2).any(|w| w[0] >= w[1]) {
                return Err(Error::InvalidColoring(format!(
                    "vertex {} needs {} distinct sorted colors",
                    g.label(v),
                    self.b
                )));
            }
            for &c in colors {
                if c >= self.a || self.class_map[c].binary_search(&v).is_err() {
                    return Err(Error::InvalidColoring(format!(
                        "color {c} of vertex {} is out of range or missing from its class",
                        g.label(v)
                    )));
                }
            }
        }
        let listed: usize = self.class_map.iter().map(Vec::len).sum();
        if listed != self.b * self.assignment.len() {
            return Err(Error::InvalidColoring("class map lists extra vertices".into()));
        }
        for (u, v) in g.edges() {
            let (a, b) = (&self.assignment[u], &self.assignment[v]);
            if a.iter().any(|c| b.binary_search(c).is_ok()) {
                return Err(Error::InvalidColoring(format!(
                    "adjacent vertices {} and {} share a color",
                    g.label(u),
                    g.label(v)
                )));
            }
        }
        Ok(())
    }

    /// `{b, a, assignment: {vertex label: [colors]}}`.
    pub fn to_value(&self, g: &Graph) -> Value {
        let mut assignment = Map::new();
        for (v, colors) in self.assignment.iter().enumerate() {
            assignment.insert(g.label(v).to_string(), Value::from(colors.clone()));
        }
        let mut doc = Map::new();
        doc.insert("b".into(), Value::from(self.b));
        doc.insert("a".into(), Value::from(self.a));
        doc.insert("assignment".into(), Value::Object(assignment));
        Value::Object(doc)
    }
}

pub fn set_label(colors: &[usize]) -> String {
    colors.iter().map(usize::to_string).collect::<Vec<_>>().join("+")
}

/// Per-vertex masses of `pmf`, whose outcomes must be exactly the vertices of `g`.
pub fn vertex_masses(g: &Graph, pmf: &Pmf) -> Result<Vec<Rational>> {
    if pmf.len() != g.vertex_count() {
        return Err(Error::InvalidArgument(format!(
            "pmf has {} outcomes, graph has {} vertices",
            pmf.len(),
            g.vertex_count()
        )));
    }
    let mut masses = vec![Rational::zero(); g.vertex_count()];
    for (label, p) in pmf.outcomes().iter().zip(pmf.probs()) {
        masses[g.vertex(label)?] = p.clone();
    }
    Ok(masses)
}

/// Pmf over the vertices of `g` from masses in vertex order.
pub fn vertex_pmf(g: &Graph, masses: Vec<Rational>) -> Result<Pmf> {
    Pmf::new(g.labels().to_vec(), masses)
}

/// Distribution of the color set of a vertex drawn from `pmf`.
///
/// Outcomes are color-set labels (see [`set_label`]) sorted by color tuple;
/// sets of zero mass are omitted.
pub fn coloring_distribution(g: &Graph, c: &FoldColoring, pmf: &Pmf) -> Result<Pmf> {
    c.validate(g)?;
    let masses = vertex_masses(g, pmf)?;
    let mut grouped: std::collections::BTreeMap<&[usize], Rational> = Default::default();
    for (v, m) in masses.iter().enumerate() {
        if !m.is_zero() {
            *grouped.entry(c.colors_of(v)).or_insert_with(Rational::zero) += m;
        }
    }
    let (outcomes, probs) = grouped.into_iter().map(|(k, p)| (set_label(k), p)).unzip();
    Pmf::new(outcomes, probs)
}

/// `H(C)` of the color-set variable, in bits.
pub fn coloring_entropy(g: &Graph, c: &FoldColoring, pmf: &Pmf) -> Result<f64> {
    Ok(entropy_of_rationals(coloring_distribution(g, c, pmf)?.probs()))
}

/// `H(C | S)` for a joint law of (vertex, side) given as
/// `joint[side] = [(vertex, mass)]`.
pub fn conditional_coloring_entropy(c: &FoldColoring, joint: &[Vec<(usize, Rational)>]) -> f64 {
    let mut h_joint = 0.0;
    let mut side_masses = Vec::with_capacity(joint.len());
    for row in joint {
        let mut grouped: std::collections::BTreeMap<&[usize], Rational> = Default::default();
        let mut total = Rational::zero();
        for (v, m) in row {
            total += m;
            *grouped.entry(c.colors_of(*v)).or_insert_with(Rational::zero) += m;
        }
        h_joint += entropy_of_rationals(grouped.values());
        side_masses.push(total);
    }
    h_joint - entropy_of_rationals(&side_masses)
}

/// Least `a` with an `a:b` coloring, and a witness rebuilt from the integer
/// program's column multiset.
pub fn bfold_chromatic_number(g: &Graph, b: usize, budget: &Budget) -> Result<(usize, FoldColoring)> {
    let (program, _) = covering_program(g, b, budget)?;
    let sol = solve_ilp(&program, budget)?;
    fold_coloring_from_solution(g, b, &program, &sol)
}

fn fold_coloring_from_solution(
    g: &Graph,
    b: usize,
    program: &CoveringProgram,
    sol: &LpSolution,
) -> Result<(usize, FoldColoring)> {
    let counts = sol
        .integer_weights()
        .filter(|_| sol.is_optimal())
        .ok_or_else(|| Error::Infeasible("no integral covering".into()))?;
    let mut classes = Vec::new();
    for (col, &k) in program.columns.iter().zip(&counts) {
        for _ in 0..k {
            classes.push(col.clone());
        }
    }
    let coloring = FoldColoring::from_classes(b, &classes, g.vertex_count())?;
    Ok((classes.len(), coloring))
}

/// Covering program over the maximal independent sets of `g` at demand `b`.
pub fn covering_program(
    g: &Graph,
    b: usize,
    budget: &Budget,
) -> Result<(CoveringProgram, IndependentSetFamily)> {
    if b == 0 {
        return Err(Error::InvalidArgument("b must be at least 1".into()));
    }
    let family = enumerate_independent_sets(g, true, budget)?;
    Ok((CoveringProgram::from_family(g, &family, b as u64), family))
}

/// `χ(G)` through the integer program.
pub fn chromatic_number(g: &Graph, budget: &Budget) -> Result<usize> {
    Ok(bfold_chromatic_number(g, 1, budget)?.0)
}

/// `χ(G)` by DSATUR branch and bound, independent of the LP layer.
pub fn dsatur_chromatic_number(g: &Graph) -> usize {
    let n = g.vertex_count();
    if n == 0 {
        return 0;
    }
    struct Dsatur<'a> {
        g: &'a Graph,
        color: Vec<Option<usize>>,
        best: usize,
    }
    impl Dsatur<'_> {
        fn pick(&self) -> Option<usize> {
            let mut best: Option<(usize, usize, usize)> = None;
            for v in 0..self.g.vertex_count() {
                if self.color[v].is_some() {
                    continue;
                }
                let mut seen: Vec<usize> = self
                    .g
                    .neighbors(v)
                    .iter()
                    .filter_map(|&u| self.color[u])
                    .collect();
                seen.sort_unstable();
                seen.dedup();
                let key = (seen.len(), self.g.degree(v), usize::MAX - v);
                if best.is_none_or(|b| key > (b.0, b.1, b.2)) {
                    best = Some(key);
                }
            }
            best.map(|(_, _, r)| usize::MAX - r)
        }

        fn run(&mut self, used: usize) {
            if used >= self.best {
                return;
            }
            let Some(v) = self.pick() else {
                self.best = used;
                return;
            };
            for c in 0..=used {
                if c + 1 >= self.best && c == used {
                    break;
                }
                if self.g.neighbors(v).iter().any(|&u| self.color[u] == Some(c)) {
                    continue;
                }
                self.color[v] = Some(c);
                self.run(used.max(c + 1));
                self.color[v] = None;
            }
        }
    }
    let mut s = Dsatur {
        g,
        color: vec![None; n],
        best: n + 1,
    };
    s.run(0);
    s.best
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FractionalSolution {
    #[serde(serialize_with = "crate::results::ser_rational")]
    pub chi_f: Rational,
    /// Column sets (vertex indices) aligned with `weights`.
    #[serde(skip)]
    pub sets: Vec<Vec<usize>>,
    #[serde(skip)]
    pub weights: Vec<Rational>,
    /// Smallest `b` within the scan with `χ_b / b = χ_f`.
    pub b_star: Option<usize>,
    pub b_search_bound: usize,
    /// `(b, χ_b)` for `b = 1..=b_search_bound`.
    pub chi_b_table: Vec<(usize, usize)>,
    /// Least common denominator of the LP weights.
    #[serde(serialize_with = "ser_bigint")]
    pub witness_denominator: BigInt,
}

fn ser_bigint<S: serde::Serializer>(v: &BigInt, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&v.to_string())
}

impl FractionalSolution {
    /// Positive-weight sets as `(vertex labels, weight)`.
    pub fn support(&self, g: &Graph) -> Vec<(Vec<String>, String)> {
        self.sets
            .iter()
            .zip(&self.weights)
            .filter(|(_, w)| !w.is_zero())
            .map(|(s, w)| {
                (
                    s.iter().map(|&v| g.label(v).to_string()).collect(),
                    rational_string(w),
                )
            })
            .collect()
    }

    pub fn chi_b(&self, b: usize) -> Option<usize> {
        self.chi_b_table.iter().find(|(k, _)| *k == b).map(|(_, a)| *a)
    }
}

/// `χ_f(G)` from the covering LP plus the `χ_b` scan for `b = 1..=b_search_bound`.
pub fn fractional_chromatic_number(
    g: &Graph,
    b_search_bound: usize,
    budget: &Budget,
) -> Result<FractionalSolution> {
    let (program, family) = covering_program(g, 1, budget)?;
    let lp = solve_lp(&program);
    let chi_f = lp
        .optimum
        .clone()
        .ok_or_else(|| Error::Infeasible("covering LP has no solution".into()))?;
    let scans = exec::map_range(b_search_bound, |i| {
        let b = i + 1;
        solve_ilp(&program.scaled(b as u64), budget).and_then(|sol| {
            sol.optimum
                .as_ref()
                .and_then(|o| o.to_integer().to_usize())
                .map(|a| (b, a))
                .ok_or_else(|| Error::Infeasible(format!("no {b}-fold coloring")))
        })
    });
    let chi_b_table = scans.into_iter().collect::<Result<Vec<_>>>()?;
    let b_star = chi_b_table
        .iter()
        .find(|(b, a)| Rational::from_integer(BigInt::from(*a)) == &chi_f * BigInt::from(*b))
        .map(|(b, _)| *b);
    Ok(FractionalSolution {
        witness_denominator: common_denominator(&lp.weights),
        chi_f,
        sets: family.sets,
        weights: lp.weights,
        b_star,
        b_search_bound,
        chi_b_table,
    })
}
