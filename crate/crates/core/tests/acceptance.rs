//! One PASS/FAIL line per acceptance criterion; exits nonzero on any failure.

mod common;

use std::collections::BTreeSet;
use std::process::ExitCode;

use fcolor::chargraph::{build_characteristic_graph, BlockSource};
use fcolor::codec::{
    build_codebook, kraft_sum, replica_set_distribution, verify_zero_error, Decoder, Encoder,
};
use fcolor::coloring::{
    bfold_chromatic_number, chromatic_number, fractional_chromatic_number, min_entropy_coloring,
    vertex_pmf, FoldColoring,
};
use fcolor::probability::{example1_model, parse_rational, shannon_entropy, Pmf, Rational, SourceModel};
use fcolor::rates::{conjecture_bound, integrality_gap, rate_at, Palette};
use fcolor::Budget;
use num_traits::One;

const MODELS: u64 = 200;

fn q(s: &str) -> Rational {
    parse_rational(s).unwrap()
}

fn quoted(weights: &[(&str, usize)]) -> Pmf {
    let mut labels = Vec::new();
    let mut probs = Vec::new();
    for (p, k) in weights {
        for _ in 0..*k {
            labels.push(format!("c{}", labels.len() + 1));
            probs.push(q(p));
        }
    }
    Pmf::new(labels, probs).unwrap()
}

fn single_color_distribution() -> Pmf {
    quoted(&[("4/25", 5), ("2/25", 2), ("1/25", 1)])
}

fn bicolor_distribution() -> Pmf {
    quoted(&[("2/25", 6), ("1/25", 13)])
}

type Outcome = Result<String, String>;

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn criterion_1(m: &SourceModel) -> Outcome {
    let g = build_characteristic_graph(m);
    let got: BTreeSet<BTreeSet<String>> = g
        .edges()
        .map(|(u, v)| [g.label(u).to_string(), g.label(v).to_string()].into())
        .collect();
    let want: BTreeSet<BTreeSet<String>> = [("-2", "-1"), ("-2", "0"), ("0", "1"), ("1", "2"), ("2", "-1")]
        .iter()
        .map(|(a, b)| [a.to_string(), b.to_string()].into())
        .collect();
    check(got == want && g.vertex_count() == 5, format!("edges {got:?}"))
}

fn criterion_2(m: &SourceModel, budget: &Budget) -> Outcome {
    let g = build_characteristic_graph(m);
    let chi = chromatic_number(&g, budget).map_err(|e| e.to_string())?;
    let chi2 = bfold_chromatic_number(&g, 2, budget).map_err(|e| e.to_string())?.0;
    let f = fractional_chromatic_number(&g, 6, budget).map_err(|e| e.to_string())?;
    check(
        chi == 3 && chi2 == 5 && f.chi_f == q("5/2") && f.b_star == Some(2),
        format!("chi = {chi}, chi_2 = {chi2}, chi_f = {}, b* = {:?}", f.chi_f, f.b_star),
    )
}

fn criterion_3(square: &BlockSource, budget: &Budget) -> Outcome {
    let chi = chromatic_number(square.graph(), budget).map_err(|e| e.to_string())?;
    let chi2 = bfold_chromatic_number(square.graph(), 2, budget).map_err(|e| e.to_string())?.0;
    check(chi == 8 && chi2 == 13, format!("chi(G^2) = {chi}, chi_2(G^2) = {chi2}"))
}

fn criterion_4(m: &SourceModel, square: &BlockSource, budget: &Budget) -> Outcome {
    let base = fractional_chromatic_number(&build_characteristic_graph(m), 0, budget)
        .map_err(|e| e.to_string())?
        .chi_f;
    let sq = fractional_chromatic_number(square.graph(), 0, budget).map_err(|e| e.to_string())?.chi_f;
    check(
        sq == q("25/4") && sq == &base * &base,
        format!("chi_f(G^2) = {sq}, chi_f(G)^2 = {}", &base * &base),
    )
}

fn criterion_5(m: &SourceModel, budget: &Budget) -> Outcome {
    let block = BlockSource::new(m, 1, budget).map_err(|e| e.to_string())?;
    let one = rate_at(&block, 1, Palette::Default, budget).map_err(|e| e.to_string())?;
    let two = rate_at(&block, 2, Palette::Default, budget).map_err(|e| e.to_string())?;
    let gap = integrality_gap(m, 1, 2, budget).map_err(|e| e.to_string())?;
    let ig = gap.ig.unwrap_or(f64::NAN);
    check(
        (one.entropy_bits - 1.5219).abs() <= 5e-4
            && (two.rate_bits_per_symbol - 1.1610).abs() <= 5e-4
            && two.a == 5
            && (ig - 1.311).abs() <= 2e-3,
        format!(
            "H = {:.4}, 5:2 rate = {:.4}, IG_1 = {ig:.4}",
            one.entropy_bits, two.rate_bits_per_symbol
        ),
    )
}

fn criterion_6(square: &BlockSource, budget: &Budget) -> Outcome {
    let h = shannon_entropy(&single_color_distribution());
    let g = square.graph();
    let pmf = vertex_pmf(g, square.vertex_probs()).map_err(|e| e.to_string())?;
    let found = min_entropy_coloring(g, &pmf, 1, g.vertex_count(), budget).map_err(|e| e.to_string())?;
    let per_symbol = found.entropy / 2.0;
    check(
        (h - 2.8839).abs() <= 5e-4 && per_symbol <= 1.4420,
        format!(
            "quoted distribution H = {h:.4} ({:.4} per symbol); search optimum {:.4} per symbol{}",
            h / 2.0,
            per_symbol,
            if found.optimal { " (proven)" } else { " (budget)" }
        ),
    )
}

fn criterion_7() -> Outcome {
    let h = shannon_entropy(&bicolor_distribution());
    check(
        (h - 4.1639).abs() <= 5e-4 && (h / 4.0 - 1.0410).abs() <= 5e-4,
        format!("H = {h:.4}, per symbol-replica {:.4}", h / 4.0),
    )
}

fn criterion_8() -> Outcome {
    let one = build_codebook(&single_color_distribution()).map_err(|e| e.to_string())?;
    let two = build_codebook(&bicolor_distribution()).map_err(|e| e.to_string())?;
    let r1 = &one.average_length / Rational::from_integer(2.into());
    let r2 = &two.average_length / Rational::from_integer(4.into());
    check(
        one.average_length == q("74/25")
            && two.average_length == q("106/25")
            && kraft_sum(&one) == Rational::one()
            && kraft_sum(&two) == Rational::one()
            && r1 == q("37/25")
            && r2 == q("53/50"),
        format!(
            "L = {} and {}, Kraft {} and {}, rates {} and {}",
            one.average_length,
            two.average_length,
            kraft_sum(&one),
            kraft_sum(&two),
            r1,
            r2
        ),
    )
}

fn coloring_for(square: &BlockSource, b: usize, budget: &Budget) -> Result<FoldColoring, String> {
    rate_at(square, b, Palette::Default, budget)
        .map(|r| r.coloring)
        .map_err(|e| e.to_string())
}

fn walkthrough(square: &BlockSource, c: &FoldColoring, replicas: &[Vec<&str>], budget: &Budget) -> Result<Vec<String>, String> {
    let law = replica_set_distribution(square, c, c.b, budget).map_err(|e| e.to_string())?;
    let book = build_codebook(&law).map_err(|e| e.to_string())?;
    let enc = Encoder::new(square, c, &book).encode(replicas).map_err(|e| e.to_string())?;
    let mut out = Decoder::new(square, c, &book)
        .decode(&enc.codeword, &["-1", "1"])
        .map_err(|e| e.to_string())?
        .outcomes();
    out.sort();
    Ok(out)
}

fn criterion_9(square: &BlockSource, budget: &Budget) -> Outcome {
    let mut details = Vec::new();
    let mut ok = true;
    for b in [1, 2] {
        let c = coloring_for(square, b, budget)?;
        let law = replica_set_distribution(square, &c, b, budget).map_err(|e| e.to_string())?;
        let book = build_codebook(&law).map_err(|e| e.to_string())?;
        let r = verify_zero_error(square, &c, &book, b, budget).map_err(|e| e.to_string())?;
        ok &= r.passed();
        details.push(format!("b = {b}: {} cases, {} mismatches", r.cases, r.mismatches));
    }
    let one = walkthrough(square, &coloring_for(square, 1, budget)?, &[vec!["-2", "2"]], budget)?;
    let two = walkthrough(square, &coloring_for(square, 2, budget)?, &[vec!["-2", "2"], vec!["0", "1"]], budget)?;
    let mut want_two = vec!["-3", "-1", "3", "2"];
    want_two.sort();
    let mut want_one = vec!["-3", "3"];
    want_one.sort();
    ok &= one == want_one && two == want_two;
    details.push(format!("walkthrough {one:?} and {two:?}"));
    check(ok, details.join("; "))
}

fn criterion_10(m: &SourceModel, budget: &Budget) -> Outcome {
    let g1 = integrality_gap(m, 1, 2, budget).map_err(|e| e.to_string())?;
    let g2 = integrality_gap(m, 2, 2, budget).map_err(|e| e.to_string())?;
    match (g1.ig, g2.ig) {
        (Some(a), Some(b)) => check(b >= a - 1e-9, format!("IG_1 = {a:.4}, IG_2 = {b:.4}")),
        _ => Err(format!("optima not proven: {:?} {:?}", g1.ig_interval, g2.ig_interval)),
    }
}

fn criterion_11(budget: &Budget) -> Outcome {
    let mut failures = [0usize; 5];
    let mut first: Option<String> = None;
    for seed in 0..MODELS {
        let (_, c) = common::check_model(seed, budget);
        let parts = [
            &c.fractional_below_traditional,
            &c.chi_f_below_fold_ratios,
            &c.lp_matches_fold_scan,
            &c.zero_error,
            &c.code_lengths,
        ];
        for (i, p) in parts.iter().enumerate() {
            if let Err(e) = p {
                failures[i] += 1;
                first.get_or_insert_with(|| format!("seed {seed}, part {}: {e}", ['a', 'b', 'c', 'd', 'e'][i]));
            }
        }
    }
    check(
        failures.iter().all(|&f| f == 0),
        format!(
            "{MODELS} models, failures a..e = {failures:?}{}",
            first.map(|f| format!(", first {f}")).unwrap_or_default()
        ),
    )
}

fn criterion_12(m: &SourceModel, budget: &Budget) -> Outcome {
    let bound = conjecture_bound(1, 2, &q("5/2")).map_err(|e| e.to_string())?;
    let ig = integrality_gap(m, 1, 2, budget).map_err(|e| e.to_string())?;
    let reported = ig.conjecture_lower_bound.unwrap_or(f64::NAN);
    let ig1 = ig.ig.unwrap_or(f64::NAN);
    check(
        (bound - 1.1387).abs() <= 5e-4 && (reported - bound).abs() < 1e-12,
        format!(
            "bound = {bound:.4} reported with IG_1 = {ig1:.4} ({})",
            if ig1 >= bound { "holds here" } else { "does not hold here" }
        ),
    )
}

fn main() -> ExitCode {
    let budget = Budget::default();
    let m = example1_model();
    let square = BlockSource::new(&m, 2, &budget).expect("square block");
    let results: Vec<(u32, Outcome)> = vec![
        (1, criterion_1(&m)),
        (2, criterion_2(&m, &budget)),
        (3, criterion_3(&square, &budget)),
        (4, criterion_4(&m, &square, &budget)),
        (5, criterion_5(&m, &budget)),
        (6, criterion_6(&square, &budget)),
        (7, criterion_7()),
        (8, criterion_8()),
        (9, criterion_9(&square, &budget)),
        (10, criterion_10(&m, &budget)),
        (11, criterion_11(&budget)),
        (12, criterion_12(&m, &budget)),
    ];
    let mut failed = 0;
    for (k, r) in &results {
        match r {
            Ok(d) => println!("PASS criterion {k}: {d}"),
            Err(d) => {
                failed += 1;
                println!("FAIL criterion {k}: {d}");
            }
        }
    }
    println!("{} passed, {failed} failed", results.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
