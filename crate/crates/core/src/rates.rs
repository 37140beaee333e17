//! Chromatic and fractional chromatic entropy rates at finite block length,
//! integrality gaps and the conjectured gap bound.
//!
//! Rates are bits per source symbol per replica: the entropy of the color
//! set divided by `n·b`.

use serde::Serialize;
use serde_json::Value;

use crate::budget::Budget;
use crate::chargraph::{build_characteristic_graph, BlockSource};
use crate::coloring::{
    bfold_chromatic_number, conditional_coloring_entropy, fractional_chromatic_number,
    min_entropy_coloring, vertex_pmf, FoldColoring,
};
use crate::error::{Error, Result};
use crate::probability::{to_f64, Rational, SourceModel};

const EPS: f64 = 1e-9;

/// How many colors a min-entropy search may use.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Palette {
    /// Unrestricted for `b = 1` (true chromatic entropy), `χ_b` otherwise.
    #[default]
    Default,
    /// Exactly `χ_b` colors.
    Chromatic,
    Fixed(usize),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RateReport {
    pub n: usize,
    pub b: usize,
    pub a: usize,
    /// Least palette admitting an `a:b` coloring of the block graph.
    pub chi_b: usize,
    pub entropy_bits: f64,
    pub rate_bits_per_symbol: f64,
    pub conditional_rate: f64,
    pub distinct_sets: usize,
    pub optimal: bool,
    /// Lower end of the rate when the search was cut short.
    pub rate_lower_bound: f64,
    pub witness: Value,
    #[serde(skip)]
    pub coloring: FoldColoring,
}

/// Min-entropy `a:b` coloring of the `n`-block graph and its rate.
pub fn rate_at(
    block: &BlockSource,
    b: usize,
    palette: Palette,
    budget: &Budget,
) -> Result<RateReport> {
    let g = block.graph();
    let (chi_b, _) = bfold_chromatic_number(g, b, budget)?;
    let a = match palette {
        Palette::Default if b == 1 => g.vertex_count().max(1),
        Palette::Default | Palette::Chromatic => chi_b,
        Palette::Fixed(a) => a,
    };
    let pmf = vertex_pmf(g, block.vertex_probs())?;
    let found = min_entropy_coloring(g, &pmf, b, a, budget)?;
    let joint: Vec<Vec<(usize, Rational)>> = block
        .side_sequences()
        .iter()
        .map(|s| {
            block
                .conditional_vertices(s)
                .into_iter()
                .map(|v| (v, block.joint_prob(v, s)))
                .collect()
        })
        .collect();
    let scale = (block.n() * b) as f64;
    Ok(RateReport {
        n: block.n(),
        b,
        a,
        chi_b,
        entropy_bits: found.entropy,
        rate_bits_per_symbol: found.entropy / scale,
        conditional_rate: conditional_coloring_entropy(&found.coloring, &joint) / scale,
        distinct_sets: found.coloring.distinct_sets(),
        optimal: found.optimal,
        rate_lower_bound: found.lower_bound / scale,
        witness: found.coloring.to_value(g),
        coloring: found.coloring,
    })
}

/// Minimum-entropy proper coloring of `Gⁿ`, per source symbol.
pub fn chromatic_entropy_rate(m: &SourceModel, n: usize, budget: &Budget) -> Result<RateReport> {
    let block = BlockSource::new(m, n, budget)?;
    rate_at(&block, 1, Palette::Default, budget)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FoldRow {
    pub b: usize,
    pub report: Option<RateReport>,
    /// Why this `b` has no report (budget exhaustion).
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FractionalRateReport {
    pub n: usize,
    pub b_max: usize,
    pub rows: Vec<FoldRow>,
    /// `b` attaining the least rate (smallest on ties).
    pub best_b: usize,
    pub rate_bits_per_symbol: f64,
    pub rate_lower_bound: f64,
    /// Every row was searched to optimality.
    pub optimal: bool,
}

impl FractionalRateReport {
    pub fn best(&self) -> &RateReport {
        self.rows
            .iter()
            .find(|r| r.b == self.best_b)
            .and_then(|r| r.report.as_ref())
            .expect("best row has a report")
    }

    pub fn row(&self, b: usize) -> Option<&RateReport> {
        self.rows.iter().find(|r| r.b == b).and_then(|r| r.report.as_ref())
    }
}

/// Least rate over `b = 1..=b_max` of min-entropy `a:b` colorings of `Gⁿ`.
pub fn fractional_chromatic_entropy_rate(
    m: &SourceModel,
    n: usize,
    b_max: usize,
    budget: &Budget,
) -> Result<FractionalRateReport> {
    if b_max == 0 {
        return Err(Error::InvalidArgument("b_max must be at least 1".into()));
    }
    let block = BlockSource::new(m, n, budget)?;
    let mut rows = Vec::with_capacity(b_max);
    for b in 1..=b_max {
        match rate_at(&block, b, Palette::Default, budget) {
            Ok(r) => rows.push(FoldRow {
                b,
                report: Some(r),
                error: None,
            }),
            Err(e @ Error::Budget { .. }) => rows.push(FoldRow {
                b,
                report: None,
                error: Some(e.to_string()),
            }),
            Err(e) => return Err(e),
        }
    }
    let mut best: Option<&RateReport> = None;
    for r in rows.iter().filter_map(|r| r.report.as_ref()) {
        if best.is_none_or(|bst| r.rate_bits_per_symbol < bst.rate_bits_per_symbol - EPS) {
            best = Some(r);
        }
    }
    let best = best.ok_or(Error::Budget {
        what: "fold counts with a finished search",
        required: 1,
        bound: 0,
    })?;
    let complete = rows.iter().all(|r| r.report.as_ref().is_some_and(|x| x.optimal));
    let lower = rows
        .iter()
        .filter_map(|r| r.report.as_ref())
        .map(|r| r.rate_lower_bound)
        .fold(f64::INFINITY, f64::min);
    Ok(FractionalRateReport {
        n,
        b_max,
        best_b: best.b,
        rate_bits_per_symbol: best.rate_bits_per_symbol,
        rate_lower_bound: if rows.iter().any(|r| r.report.is_none()) { 0.0 } else { lower },
        optimal: complete,
        rows,
    })
}

/// `b·log χ_f / (log b^(1/n) + log χ_f)`, base 2.
pub fn conjecture_bound(n: usize, b_star: usize, chi_f: &Rational) -> Result<f64> {
    if n == 0 || b_star == 0 {
        return Err(Error::InvalidArgument("n and b* must be positive".into()));
    }
    let x = to_f64(chi_f);
    if x <= 1.0 {
        return Err(Error::InvalidArgument(format!(
            "bound needs a fractional chromatic number above 1, got {}",
            crate::results::rational_string(chi_f)
        )));
    }
    let lx = x.log2();
    let b = b_star as f64;
    Ok(b * lx / (b.log2() / n as f64 + lx))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GapReport {
    pub n: usize,
    pub b_max: usize,
    pub traditional_rate: f64,
    pub fractional_rate: f64,
    /// Point value when both rates are proven optima.
    pub ig: Option<f64>,
    /// `[lower, upper]`; collapses to `ig` when exact.
    pub ig_interval: [f64; 2],
    /// Fold count attaining the fractional rate.
    pub b_star_n: usize,
    #[serde(serialize_with = "crate::results::ser_rational")]
    pub chi_f: Rational,
    pub conjecture_lower_bound: Option<f64>,
    #[serde(skip)]
    pub traditional: RateReport,
    #[serde(skip)]
    pub fractional: FractionalRateReport,
}

/// Ratio of the traditional to the fractional rate at block length `n`.
pub fn integrality_gap(m: &SourceModel, n: usize, b_max: usize, budget: &Budget) -> Result<GapReport> {
    let fractional = fractional_chromatic_entropy_rate(m, n, b_max, budget)?;
    let traditional = match fractional.row(1) {
        Some(r) => r.clone(),
        None => chromatic_entropy_rate(m, n, budget)?,
    };
    let frac = fractional.rate_bits_per_symbol;
    if frac <= EPS {
        return Err(Error::UndefinedGap(format!(
            "fractional rate at n = {n} is zero"
        )));
    }
    let trad = traditional.rate_bits_per_symbol;
    let exact = traditional.optimal && fractional.optimal;
    let lo = traditional.rate_lower_bound / frac;
    let hi = if fractional.rate_lower_bound > EPS {
        trad / fractional.rate_lower_bound
    } else {
        f64::INFINITY
    };
    let base = build_characteristic_graph(m);
    let chi_f = fractional_chromatic_number(&base, 0, budget)?.chi_f;
    let conjecture_lower_bound = conjecture_bound(n, fractional.best_b, &chi_f).ok();
    Ok(GapReport {
        n,
        b_max,
        traditional_rate: trad,
        fractional_rate: frac,
        ig: exact.then_some(trad / frac),
        ig_interval: if exact { [trad / frac; 2] } else { [lo, hi] },
        b_star_n: fractional.best_b,
        chi_f,
        conjecture_lower_bound,
        traditional,
        fractional,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GapRow {
    pub n: usize,
    pub report: Option<GapReport>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MonotonicityReport {
    pub b_max: usize,
    pub rows: Vec<GapRow>,
    /// Consecutive `(n, n + 1)` pairs with a proven decrease of the gap.
    pub violations: Vec<(usize, usize)>,
}

/// `IG_1 .. IG_{n_max}`, flagging any proven decrease.
pub fn monotonicity_table(
    m: &SourceModel,
    n_max: usize,
    b_max: usize,
    budget: &Budget,
) -> Result<MonotonicityReport> {
    let mut rows = Vec::with_capacity(n_max);
    for n in 1..=n_max {
        match integrality_gap(m, n, b_max, budget) {
            Ok(r) => rows.push(GapRow {
                n,
                report: Some(r),
                error: None,
            }),
            Err(e @ (Error::Budget { .. } | Error::UndefinedGap(_))) => rows.push(GapRow {
                n,
                report: None,
                error: Some(e.to_string()),
            }),
            Err(e) => return Err(e),
        }
    }
    let violations = rows
        .windows(2)
        .filter_map(|w| {
            let (a, b) = (w[0].report.as_ref()?, w[1].report.as_ref()?);
            // a decrease is proven only when the intervals separate
            (b.ig_interval[1] < a.ig_interval[0] - EPS).then_some((a.n, b.n))
        })
        .collect();
    Ok(MonotonicityReport {
        b_max,
        rows,
        violations,
    })
}
