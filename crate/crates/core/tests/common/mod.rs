#![allow(dead_code)]

use fcolor::chargraph::{build_characteristic_graph, BlockSource};
use fcolor::codec::{build_codebook, replica_set_distribution, verify_zero_error};
use fcolor::coloring::{
    bfold_chromatic_number, fractional_chromatic_number, min_entropy_coloring, vertex_pmf,
    FoldColoring,
};
use fcolor::graphs::Graph;
use fcolor::probability::{shannon_entropy, to_f64, Rational, SourceModel};
use fcolor::rates::{chromatic_entropy_rate, fractional_chromatic_entropy_rate};
use fcolor::Budget;
use num_bigint::BigInt;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const EPS: f64 = 1e-9;

fn names(prefix: &str, k: usize) -> Vec<String> {
    (0..k).map(|i| format!("{prefix}{i}")).collect()
}

/// Model with alphabets of size ≤ `max_alpha`, integer-weighted pmf and a
/// random function table with up to four values.
pub fn random_model(seed: u64, max_alpha: usize) -> SourceModel {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let r = rng.gen_range(1..=max_alpha);
    let c = rng.gen_range(1..=max_alpha);
    let zero_rate = rng.gen_range(0..4);
    let mut weights: Vec<Vec<u32>> = (0..r)
        .map(|_| {
            (0..c)
                .map(|_| if rng.gen_range(0..10) < zero_rate { 0 } else { rng.gen_range(1..=6) })
                .collect()
        })
        .collect();
    if weights.iter().flatten().all(|&w| w == 0) {
        weights[0][0] = 1;
    }
    let total: u32 = weights.iter().flatten().sum();
    let pmf = weights
        .iter()
        .map(|row| row.iter().map(|&w| Rational::new(w.into(), total.into())).collect())
        .collect();
    let k = rng.gen_range(1..=4);
    let table = (0..r)
        .map(|_| (0..c).map(|_| rng.gen_range(0..k).to_string()).collect())
        .collect();
    SourceModel::new(names("a", r), names("s", c), pmf, table).expect("random model is valid")
}

/// Proper coloring built greedily along a random vertex order.
pub fn random_coloring(g: &Graph, seed: u64) -> FoldColoring {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = g.vertex_count();
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut rng);
    let mut color = vec![usize::MAX; n];
    for &v in &order {
        let taken: Vec<usize> = g.neighbors(v).iter().map(|&u| color[u]).collect();
        color[v] = (0..).find(|c| !taken.contains(c)).unwrap();
    }
    let a = color.iter().copied().max().map_or(1, |m| m + 1);
    FoldColoring::from_assignment(1, a, color.into_iter().map(|c| vec![c]).collect()).unwrap()
}

/// `k`-fold blow-up of a 1-fold coloring: color `c` becomes `k·c .. k·c + k`.
pub fn blow_up(c: &FoldColoring, k: usize) -> FoldColoring {
    let assignment = c
        .assignment
        .iter()
        .map(|cs| (0..k).map(|j| cs[0] * k + j).collect())
        .collect();
    FoldColoring::from_assignment(k, c.a * k, assignment).unwrap()
}

/// (a) fractional rate never exceeds the traditional rate at n = 1.
pub fn check_fractional_below_traditional(m: &SourceModel, budget: &Budget) -> Result<(), String> {
    let t = chromatic_entropy_rate(m, 1, budget).map_err(|e| e.to_string())?;
    let f = fractional_chromatic_entropy_rate(m, 1, 3, budget).map_err(|e| e.to_string())?;
    if f.rate_bits_per_symbol > t.rate_bits_per_symbol + EPS {
        return Err(format!(
            "fractional {} above traditional {}",
            f.rate_bits_per_symbol, t.rate_bits_per_symbol
        ));
    }
    Ok(())
}

/// (b) `χ_f ≤ χ_b / b` for `b = 1, 2, 3`, compared exactly.
pub fn check_chi_f_below_fold_ratios(g: &Graph, budget: &Budget) -> Result<(), String> {
    let chi_f = fractional_chromatic_number(g, 0, budget).map_err(|e| e.to_string())?.chi_f;
    for b in 1..=3usize {
        let (chi_b, witness) = bfold_chromatic_number(g, b, budget).map_err(|e| e.to_string())?;
        witness.validate(g).map_err(|e| e.to_string())?;
        if chi_f > Rational::new(BigInt::from(chi_b), BigInt::from(b)) {
            return Err(format!("chi_f {chi_f} above chi_{b}/{b} = {chi_b}/{b}"));
        }
    }
    Ok(())
}

/// (c) the LP optimum equals `min_{b ≤ 6} χ_b / b` whenever some `b ≤ 6`
/// attains it; an LP witness with denominator `d ≤ 6` forces attainment.
pub fn check_lp_matches_fold_scan(g: &Graph, budget: &Budget) -> Result<(), String> {
    let sol = fractional_chromatic_number(g, 0, budget).map_err(|e| e.to_string())?;
    let mut best: Option<Rational> = None;
    for b in 1..=6usize {
        let (chi_b, _) = bfold_chromatic_number(g, b, budget).map_err(|e| e.to_string())?;
        let r = Rational::new(BigInt::from(chi_b), BigInt::from(b));
        if best.as_ref().is_none_or(|x| r < *x) {
            best = Some(r);
        }
    }
    let best = best.unwrap();
    if best < sol.chi_f {
        return Err(format!("min chi_b/b = {best} below LP optimum {}", sol.chi_f));
    }
    if sol.witness_denominator <= BigInt::from(6) && best != sol.chi_f {
        return Err(format!(
            "LP witness has denominator {} but min chi_b/b = {best} != {}",
            sol.witness_denominator, sol.chi_f
        ));
    }
    Ok(())
}

fn colorings_under_test(block: &BlockSource, seed: u64, budget: &Budget) -> Result<Vec<FoldColoring>, String> {
    let g = block.graph();
    let pmf = vertex_pmf(g, block.vertex_probs()).map_err(|e| e.to_string())?;
    let random = random_coloring(g, seed);
    let mut out = vec![
        min_entropy_coloring(g, &pmf, 1, g.vertex_count(), budget).map_err(|e| e.to_string())?.coloring,
        bfold_chromatic_number(g, 2, budget).map_err(|e| e.to_string())?.1,
        blow_up(&random, 2),
        random,
    ];
    let (chi2, _) = bfold_chromatic_number(g, 2, budget).map_err(|e| e.to_string())?;
    out.push(min_entropy_coloring(g, &pmf, 2, chi2, budget).map_err(|e| e.to_string())?.coloring);
    Ok(out)
}

/// (d) exhaustive encode/decode is error-free for every coloring tried, and
/// (e) every codebook built along the way satisfies `H ≤ L < H + 1`.
pub fn check_codec(m: &SourceModel, seed: u64, budget: &Budget) -> (Result<(), String>, Result<(), String>) {
    let block = match BlockSource::new(m, 1, budget) {
        Ok(b) => b,
        Err(e) => return (Err(e.to_string()), Err(e.to_string())),
    };
    let colorings = match colorings_under_test(&block, seed, budget) {
        Ok(c) => c,
        Err(e) => return (Err(e.clone()), Err(e)),
    };
    let mut zero_error = Ok(());
    let mut lengths = Ok(());
    for c in &colorings {
        let law = match replica_set_distribution(&block, c, c.b, budget) {
            Ok(l) => l,
            Err(e) => return (Err(e.to_string()), Err(e.to_string())),
        };
        let book = build_codebook(&law).expect("codebook");
        let h = shannon_entropy(&law);
        let l = to_f64(&book.average_length);
        if lengths.is_ok() && !within_one_bit(law.len(), h, l) {
            lengths = Err(format!("H = {h}, L = {l} for {}:{} coloring", c.a, c.b));
        }
        match verify_zero_error(&block, c, &book, c.b, budget) {
            Ok(r) if r.passed() => {}
            Ok(r) => {
                if zero_error.is_ok() {
                    zero_error = Err(format!("{} mismatches, first {:?}", r.mismatches, r.counterexample));
                }
            }
            Err(e) => {
                if zero_error.is_ok() {
                    zero_error = Err(e.to_string());
                }
            }
        }
    }
    (zero_error, lengths)
}

/// `H ≤ L < H + 1`; a point mass still spends one bit per codeword.
pub fn within_one_bit(outcomes: usize, h: f64, l: f64) -> bool {
    if outcomes == 1 {
        h.abs() < EPS && (l - 1.0).abs() < EPS
    } else {
        h <= l + EPS && l < h + 1.0
    }
}

/// Outcome of all five checks on one model.
pub struct ModelChecks {
    pub fractional_below_traditional: Result<(), String>,
    pub chi_f_below_fold_ratios: Result<(), String>,
    pub lp_matches_fold_scan: Result<(), String>,
    pub zero_error: Result<(), String>,
    pub code_lengths: Result<(), String>,
}

pub fn check_model(seed: u64, budget: &Budget) -> (SourceModel, ModelChecks) {
    let m = random_model(seed, 6);
    let g = build_characteristic_graph(&m);
    let (zero_error, code_lengths) = check_codec(&m, seed ^ 0x9e37_79b9, budget);
    let checks = ModelChecks {
        fractional_below_traditional: check_fractional_below_traditional(&m, budget),
        chi_f_below_fold_ratios: check_chi_f_below_fold_ratios(&g, budget),
        lp_matches_fold_scan: check_lp_matches_fold_scan(&g, budget),
        zero_error,
        code_lengths,
    };
    (m, checks)
}
