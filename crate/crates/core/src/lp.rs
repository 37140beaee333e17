//! Exact covering linear programs over the rationals.
//!
//! The covering program `min Σ x_j  s.t.  Σ_{j ∋ r} x_j ≥ d_r,  x ≥ 0` is solved
//! through its packing dual `max Σ d_r y_r  s.t.  Σ_{r ∈ j} y_r ≤ 1,  y ≥ 0`,
//! whose origin is always feasible, so a single simplex phase suffices. The
//! primal weights are read off as the dual's shadow prices. Pivoting follows
//! Bland's rule, which makes the returned vertex reproducible.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::Serialize;

use crate::budget::Budget;
use crate::error::{Error, Result};
use crate::graphs::{Graph, IndependentSetFamily};
use crate::probability::Rational;
use crate::results::{ser_rational, ser_rationals};

/// `min 1ᵀx  s.t.  A x ≥ demand·1,  x ≥ 0` with 0/1 incidence `A`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoveringProgram {
    pub row_labels: Vec<String>,
    pub column_labels: Vec<String>,
    /// For each column, the sorted rows it covers.
    pub columns: Vec<Vec<usize>>,
    #[serde(serialize_with = "ser_rational")]
    pub demand: Rational,
}

impl CoveringProgram {
    pub fn new(
        row_labels: Vec<String>,
        column_labels: Vec<String>,
        mut columns: Vec<Vec<usize>>,
        demand: Rational,
    ) -> Result<Self> {
        if column_labels.len() != columns.len() {
            return Err(Error::InvalidArgument(format!(
                "{} column labels for {} columns",
                column_labels.len(),
                columns.len()
            )));
        }
        for col in &mut columns {
            col.sort_unstable();
            col.dedup();
            if col.last().is_some_and(|&r| r >= row_labels.len()) {
                return Err(Error::InvalidArgument("column covers an unknown row".into()));
            }
        }
        if demand.is_negative() {
            return Err(Error::InvalidArgument("demand must be nonnegative".into()));
        }
        Ok(Self {
            row_labels,
            column_labels,
            columns,
            demand,
        })
    }

    /// Rows are the graph's vertices, columns the family's independent sets.
    pub fn from_family(g: &Graph, family: &IndependentSetFamily, demand: u64) -> Self {
        let column_labels = family
            .sets
            .iter()
            .map(|s| {
                let names: Vec<&str> = s.iter().map(|&v| g.label(v)).collect();
                format!("{{{}}}", names.join(" "))
            })
            .collect();
        Self {
            row_labels: g.labels().to_vec(),
            column_labels,
            columns: family.sets.clone(),
            demand: Rational::from_integer(BigInt::from(demand)),
        }
    }

    pub fn row_count(&self) -> usize {
        self.row_labels.len()
    }

    pub fn column_count(&self) -> usize {
        self.columns.len()
    }

    /// Dense 0/1 incidence, rows × columns.
    pub fn incidence(&self) -> Vec<Vec<u8>> {
        let mut m = vec![vec![0u8; self.columns.len()]; self.row_labels.len()];
        for (j, col) in self.columns.iter().enumerate() {
            for &r in col {
                m[r][j] = 1;
            }
        }
        m
    }

    /// Rows no column covers.
    pub fn uncovered_rows(&self) -> Vec<usize> {
        let mut covered = vec![false; self.row_labels.len()];
        for col in &self.columns {
            for &r in col {
                covered[r] = true;
            }
        }
        (0..covered.len()).filter(|&r| !covered[r]).collect()
    }

    /// Exact check of `A x ≥ d`, `x ≥ 0`.
    pub fn is_feasible(&self, weights: &[Rational]) -> bool {
        if weights.len() != self.columns.len() || weights.iter().any(Signed::is_negative) {
            return false;
        }
        let mut cover = vec![Rational::zero(); self.row_labels.len()];
        for (col, w) in self.columns.iter().zip(weights) {
            for &r in col {
                cover[r] += w;
            }
        }
        cover.iter().all(|c| *c >= self.demand)
    }

    /// Same program with every demand multiplied by `k`.
    pub fn scaled(&self, k: u64) -> Self {
        Self {
            demand: &self.demand * Rational::from_integer(BigInt::from(k)),
            ..self.clone()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LpSolution {
    pub status: LpStatus,
    #[serde(serialize_with = "crate::results::ser_opt_rational")]
    pub optimum: Option<Rational>,
    #[serde(serialize_with = "ser_rationals")]
    pub weights: Vec<Rational>,
    /// Branch-and-bound nodes (1 for a plain LP solve).
    pub nodes: usize,
}

impl LpSolution {
    fn infeasible(columns: usize, nodes: usize) -> Self {
        Self {
            status: LpStatus::Infeasible,
            optimum: None,
            weights: vec![Rational::zero(); columns],
            nodes,
        }
    }

    pub fn is_optimal(&self) -> bool {
        self.status == LpStatus::Optimal
    }

    /// Integer weights, when every weight is integral.
    pub fn integer_weights(&self) -> Option<Vec<u64>> {
        self.weights
            .iter()
            .map(|w| if w.is_integer() { w.to_integer().to_u64() } else { None })
            .collect()
    }
}

enum SimplexOutcome {
    Optimal {
        value: Rational,
        /// Shadow price of each constraint row.
        duals: Vec<Rational>,
    },
    Unbounded,
}

/// `max cᵀy  s.t.  A y ≤ h,  y ≥ 0` with `h ≥ 0`, dense tableau, Bland's rule.
fn maximize(c: &[Rational], a: &[Vec<Rational>], h: &[Rational]) -> SimplexOutcome {
    let m = a.len();
    let n = c.len();
    let width = n + m;
    let mut rows: Vec<Vec<Rational>> = a
        .iter()
        .enumerate()
        .map(|(i, r)| {
            let mut row = Vec::with_capacity(width);
            row.extend(r.iter().cloned());
            row.extend((0..m).map(|k| if k == i { Rational::one() } else { Rational::zero() }));
            row
        })
        .collect();
    let mut rhs: Vec<Rational> = h.to_vec();
    let mut obj: Vec<Rational> = c.iter().cloned().chain((0..m).map(|_| Rational::zero())).collect();
    let mut value = Rational::zero();
    let mut basis: Vec<usize> = (n..width).collect();

    loop {
        let Some(enter) = (0..width).find(|&j| obj[j].is_positive()) else {
            let duals = (0..m).map(|i| -obj[n + i].clone()).collect();
            return SimplexOutcome::Optimal { value, duals };
        };
        let mut leave: Option<(usize, Rational)> = None;
        for i in 0..m {
            let coef = &rows[i][enter];
            if !coef.is_positive() {
                continue;
            }
            let ratio = &rhs[i] / coef;
            let better = match &leave {
                None => true,
                Some((li, lr)) => ratio < *lr || (ratio == *lr && basis[i] < basis[*li]),
            };
            if better {
                leave = Some((i, ratio));
            }
        }
        let Some((pr, _)) = leave else {
            return SimplexOutcome::Unbounded;
        };

        let pivot = rows[pr][enter].clone();
        if !pivot.is_one() {
            for v in rows[pr].iter_mut().filter(|v| !v.is_zero()) {
                *v /= &pivot;
            }
            rhs[pr] /= &pivot;
        }
        let pivot_row = rows[pr].clone();
        let nonzero: Vec<usize> = (0..width).filter(|&j| !pivot_row[j].is_zero()).collect();
        let pivot_rhs = rhs[pr].clone();
        for i in 0..m {
            if i == pr || rows[i][enter].is_zero() {
                continue;
            }
            let factor = rows[i][enter].clone();
            for &j in &nonzero {
                let delta = &factor * &pivot_row[j];
                rows[i][j] -= delta;
            }
            rhs[i] -= &factor * &pivot_rhs;
        }
        if !obj[enter].is_zero() {
            let factor = obj[enter].clone();
            for &j in &nonzero {
                let delta = &factor * &pivot_row[j];
                obj[j] -= delta;
            }
            value += &factor * &pivot_rhs;
        }
        basis[pr] = enter;
    }
}

/// Covering LP with per-row demands and per-column integer bounds.
struct Relaxation<'a> {
    columns: &'a [Vec<usize>],
    rows: usize,
    demand: &'a Rational,
    lower: &'a [u64],
    upper: &'a [Option<u64>],
}

impl Relaxation<'_> {
    /// Optimal weights and value, or `None` if infeasible.
    fn solve(&self) -> Option<(Rational, Vec<Rational>)> {
        let ncols = self.columns.len();
        let mut residual = vec![self.demand.clone(); self.rows];
        let mut fixed_total = Rational::zero();
        for (j, col) in self.columns.iter().enumerate() {
            if self.lower[j] > 0 {
                let l = Rational::from_integer(BigInt::from(self.lower[j]));
                for &r in col {
                    residual[r] -= &l;
                }
                fixed_total += l;
            }
        }
        let active_rows: Vec<usize> = (0..self.rows).filter(|&r| residual[r].is_positive()).collect();
        let mut weights: Vec<Rational> = self
            .lower
            .iter()
            .map(|&l| Rational::from_integer(BigInt::from(l)))
            .collect();
        if active_rows.is_empty() {
            return Some((fixed_total, weights));
        }
        let mut row_slot = vec![usize::MAX; self.rows];
        for (k, &r) in active_rows.iter().enumerate() {
            row_slot[r] = k;
        }
        let free: Vec<usize> = (0..ncols)
            .filter(|&j| self.upper[j].is_none_or(|u| u > self.lower[j]))
            .collect();
        let bounded: Vec<usize> = free.iter().copied().filter(|&j| self.upper[j].is_some()).collect();

        let nvars = active_rows.len() + bounded.len();
        let mut profit: Vec<Rational> = active_rows.iter().map(|&r| residual[r].clone()).collect();
        profit.extend(bounded.iter().map(|&j| {
            -Rational::from_integer(BigInt::from(self.upper[j].unwrap() - self.lower[j]))
        }));
        let a: Vec<Vec<Rational>> = free
            .iter()
            .map(|&j| {
                let mut row = vec![Rational::zero(); nvars];
                for &r in &self.columns[j] {
                    if row_slot[r] != usize::MAX {
                        row[row_slot[r]] = Rational::one();
                    }
                }
                if let Ok(k) = bounded.binary_search(&j) {
                    row[active_rows.len() + k] = -Rational::one();
                }
                row
            })
            .collect();
        let h = vec![Rational::one(); free.len()];
        match maximize(&profit, &a, &h) {
            SimplexOutcome::Unbounded => None,
            SimplexOutcome::Optimal { value, duals } => {
                for (k, &j) in free.iter().enumerate() {
                    weights[j] += &duals[k];
                }
                Some((fixed_total + value, weights))
            }
        }
    }
}

/// Exact LP optimum of a covering program.
pub fn solve_lp(p: &CoveringProgram) -> LpSolution {
    let n = p.columns.len();
    let lower = vec![0u64; n];
    let upper = vec![None; n];
    let relax = Relaxation {
        columns: &p.columns,
        rows: p.row_count(),
        demand: &p.demand,
        lower: &lower,
        upper: &upper,
    };
    match relax.solve() {
        Some((value, weights)) => LpSolution {
            status: LpStatus::Optimal,
            optimum: Some(value),
            weights,
            nodes: 1,
        },
        None => LpSolution::infeasible(n, 1),
    }
}

fn ceil_u64(r: &Rational) -> u64 {
    r.ceil().to_integer().to_u64().unwrap_or(u64::MAX)
}

/// Minimum integer covering by branch and bound over [`solve_lp`] bounds.
///
/// Branches on the column whose fractional part is closest to 1/2 (lowest
/// index on ties) and explores the rounded-up child first. Rounding any
/// relaxed solution up gives a feasible cover, which seeds the incumbent.
pub fn solve_ilp(p: &CoveringProgram, budget: &Budget) -> Result<LpSolution> {
    let n = p.columns.len();
    if n > budget.ilp_columns {
        return Err(Error::Budget {
            what: "integer program columns",
            required: n as u128,
            bound: budget.ilp_columns as u128,
        });
    }
    if !p.demand.is_integer() {
        return Err(Error::InvalidArgument("integer program needs an integral demand".into()));
    }
    let half = Rational::new(BigInt::one(), BigInt::from(2));
    let mut incumbent: Option<(u64, Vec<u64>)> = None;
    let mut stack: Vec<(Vec<u64>, Vec<Option<u64>>)> = vec![(vec![0; n], vec![None; n])];
    let mut nodes = 0usize;

    while let Some((lower, upper)) = stack.pop() {
        nodes += 1;
        if nodes > budget.ilp_nodes {
            return Err(Error::Budget {
                what: "integer program nodes",
                required: nodes as u128,
                bound: budget.ilp_nodes as u128,
            });
        }
        let relax = Relaxation {
            columns: &p.columns,
            rows: p.row_count(),
            demand: &p.demand,
            lower: &lower,
            upper: &upper,
        };
        let Some((value, weights)) = relax.solve() else {
            continue;
        };
        let bound = ceil_u64(&value);
        if incumbent.as_ref().is_some_and(|(best, _)| bound >= *best) {
            continue;
        }
        let rounded: Vec<u64> = weights.iter().map(ceil_u64).collect();
        let rounded_total: u64 = rounded.iter().sum();
        if incumbent.as_ref().is_none_or(|(best, _)| rounded_total < *best) {
            incumbent = Some((rounded_total, rounded));
        }
        let branch = weights
            .iter()
            .enumerate()
            .filter(|(_, w)| !w.is_integer())
            .min_by(|(i, a), (j, b)| {
                let da = (a.fract() - &half).abs();
                let db = (b.fract() - &half).abs();
                da.cmp(&db).then(i.cmp(j))
            })
            .map(|(j, w)| (j, w.floor().to_integer().to_u64().unwrap_or(0)));
        let Some((j, floor)) = branch else {
            // integral relaxation: the rounded solution above is this one
            continue;
        };
        if incumbent.as_ref().is_some_and(|(best, _)| bound >= *best) {
            continue;
        }
        let mut down_upper = upper.clone();
        down_upper[j] = Some(floor);
        let mut up_lower = lower.clone();
        up_lower[j] = floor + 1;
        // pushed last, popped first
        stack.push((lower, down_upper));
        stack.push((up_lower, upper));
    }

    Ok(match incumbent {
        Some((total, x)) => LpSolution {
            status: LpStatus::Optimal,
            optimum: Some(Rational::from_integer(BigInt::from(total))),
            weights: x
                .into_iter()
                .map(|v| Rational::from_integer(BigInt::from(v)))
                .collect(),
            nodes,
        },
        None => LpSolution::infeasible(n, nodes),
    })
}

/// `gcd`-free helper: least common multiple of the weight denominators.
pub fn common_denominator(weights: &[Rational]) -> BigInt {
    weights
        .iter()
        .fold(BigInt::one(), |acc, w| acc.lcm(w.denom()))
}
