use fcolor::chargraph::BlockSource;
use fcolor::codec::{
    build_codebook, replica_set_distribution, verify_zero_error, Decoder, Encoder,
};
use fcolor::coloring::{bfold_chromatic_number, FoldColoring};
use fcolor::probability::{example1_model, SourceModel};
use fcolor::rates::{rate_at, Palette};
use fcolor::{Budget, Error};

fn sorted(mut v: Vec<String>) -> Vec<String> {
    v.sort();
    v
}

fn strings(v: &[&str]) -> Vec<String> {
    v.iter().map(|s| s.to_string()).collect()
}

fn min_entropy(block: &BlockSource, b: usize) -> FoldColoring {
    rate_at(block, b, Palette::Default, &Budget::default()).unwrap().coloring
}

/// Outcomes recovered for `replicas` under `side`, through the full bit path.
fn run(m: &SourceModel, n: usize, b: usize, replicas: &[&[&str]], side: &[&str]) -> Vec<String> {
    let budget = Budget::default();
    let block = BlockSource::new(m, n, &budget).unwrap();
    let c = min_entropy(&block, b);
    let law = replica_set_distribution(&block, &c, b, &budget).unwrap();
    let book = build_codebook(&law).unwrap();
    let reps: Vec<Vec<&str>> = replicas.iter().map(|r| r.to_vec()).collect();
    let enc = Encoder::new(&block, &c, &book).encode(&reps).unwrap();
    assert_eq!(book.codeword(&enc.label), Some(enc.codeword.as_str()));
    Decoder::new(&block, &c, &book).decode(&enc.codeword, side).unwrap().outcomes()
}

#[test]
fn walkthrough_single_fold() {
    let out = run(&example1_model(), 2, 1, &[&["-2", "2"]], &["-1", "1"]);
    assert_eq!(sorted(out), sorted(strings(&["-3", "3"])));
}

#[test]
fn walkthrough_two_fold() {
    let out = run(&example1_model(), 2, 2, &[&["-2", "2"], &["0", "1"]], &["-1", "1"]);
    assert_eq!(sorted(out), sorted(strings(&["-3", "-1", "3", "2"])));
}

#[test]
fn exhaustive_zero_error_on_example1_squares() {
    let budget = Budget::default();
    let m = example1_model();
    let block = BlockSource::new(&m, 2, &budget).unwrap();
    for b in [1, 2] {
        for c in [min_entropy(&block, b), bfold_chromatic_number(block.graph(), b, &budget).unwrap().1] {
            let book = build_codebook(&replica_set_distribution(&block, &c, b, &budget).unwrap()).unwrap();
            let r = verify_zero_error(&block, &c, &book, b, &budget).unwrap();
            assert!(r.passed(), "b = {b}: {:?}", r.counterexample);
            assert_eq!(r.n, 2);
            assert!(r.cases > 0);
            assert_eq!(r.outcomes, r.cases * 2 * b as u64);
        }
    }
}

#[test]
fn concatenated_blocks_decode_in_order() {
    let budget = Budget::default();
    let m = example1_model();
    let block = BlockSource::new(&m, 1, &budget).unwrap();
    let c = min_entropy(&block, 1);
    let book = build_codebook(&replica_set_distribution(&block, &c, 1, &budget).unwrap()).unwrap();
    let enc = Encoder::new(&block, &c, &book);
    let first = enc.encode(&[vec!["-2"]]).unwrap();
    let second = enc.encode(&[vec!["2"]]).unwrap();
    let bits = format!("{}{}", first.codeword, second.codeword);
    let out = Decoder::new(&block, &c, &book).decode(&bits, &["-1", "1"]).unwrap().outcomes();
    assert_eq!(out, strings(&["-3", "3"]));
}

#[test]
fn decoder_rejects_bad_framing_and_symbols() {
    let budget = Budget::default();
    let m = example1_model();
    let block = BlockSource::new(&m, 2, &budget).unwrap();
    let c = min_entropy(&block, 1);
    let book = build_codebook(&replica_set_distribution(&block, &c, 1, &budget).unwrap()).unwrap();
    let dec = Decoder::new(&block, &c, &book);
    assert!(dec.decode("", &[] as &[&str]).unwrap().blocks.is_empty());
    let cw = &book.entries[0].codeword;
    assert!(matches!(dec.decode(&format!("{cw}1"), &["-1", "1"]), Err(Error::Framing(_))));
    assert!(dec.decode(cw, &["-1", "9"]).is_err());
    assert!(Encoder::new(&block, &c, &book).encode(&[vec!["-2", "7"]]).is_err());
}
