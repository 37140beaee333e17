//! Prefix codes over color sets, the block encoder, and zero-error decoding
//! from received bits plus side information.
//!
//! One codeword carries one color set: the colors chosen for `b` replica
//! sequences of length `n` that share a side-information sequence. The
//! decoder turns each color back into `n` function values.

use std::cmp::Reverse;
use std::collections::{BTreeMap, BinaryHeap, HashMap};

use num_bigint::BigInt;
use num_traits::{One, Zero};
use serde::Serialize;

use crate::budget::Budget;
use crate::chargraph::BlockSource;
use crate::coloring::{set_label, FoldColoring};
use crate::error::{Error, Result};
use crate::exec;
use crate::probability::{Pmf, Rational};
use crate::results::ser_rational;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CodeEntry {
    pub label: String,
    pub codeword: String,
    #[serde(serialize_with = "ser_rational")]
    pub probability: Rational,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Codebook {
    /// In the order of the source pmf.
    pub entries: Vec<CodeEntry>,
    #[serde(serialize_with = "ser_rational")]
    pub average_length: Rational,
}

impl Codebook {
    pub fn codeword(&self, label: &str) -> Option<&str> {
        self.entries
            .iter()
            .find(|e| e.label == label)
            .map(|e| e.codeword.as_str())
    }

    pub fn lengths(&self) -> Vec<usize> {
        self.entries.iter().map(|e| e.codeword.len()).collect()
    }

    pub fn is_prefix_free(&self) -> bool {
        let mut words: Vec<&str> = self.entries.iter().map(|e| e.codeword.as_str()).collect();
        words.sort_unstable();
        words.windows(2).all(|w| !w[1].starts_with(w[0]))
    }

    /// Split `bits` into labels by walking the code.
    pub fn parse<'a>(&'a self, bits: &str) -> Result<Vec<&'a str>> {
        let index: HashMap<&str, &str> = self
            .entries
            .iter()
            .map(|e| (e.codeword.as_str(), e.label.as_str()))
            .collect();
        let longest = self.entries.iter().map(|e| e.codeword.len()).max().unwrap_or(0);
        let mut out = Vec::new();
        let mut start = 0;
        for end in 1..=bits.len() {
            let word = &bits[start..end];
            if let Some(label) = index.get(word) {
                out.push(*label);
                start = end;
            } else if word.len() >= longest {
                return Err(Error::Framing(format!("no codeword matches bits at offset {start}")));
            }
        }
        if start != bits.len() {
            return Err(Error::Framing(format!(
                "{} dangling bits after the last codeword",
                bits.len() - start
            )));
        }
        Ok(out)
    }
}

/// Minimum expected length prefix code (greedy merge of the two least
/// probable nodes, earliest-created first on ties), canonicalized so that
/// codewords are handed out in order of length, then probability rank.
pub fn build_codebook(p: &Pmf) -> Result<Codebook> {
    let k = p.len();
    let mut depth = vec![0usize; k];
    if k > 1 {
        // members[node] lists the leaves under a node
        let mut members: Vec<Vec<usize>> = (0..k).map(|i| vec![i]).collect();
        let mut heap: BinaryHeap<Reverse<(Rational, usize)>> = p
            .probs()
            .iter()
            .enumerate()
            .map(|(i, q)| Reverse((q.clone(), i)))
            .collect();
        while heap.len() > 1 {
            let Reverse((pa, a)) = heap.pop().unwrap();
            let Reverse((pb, b)) = heap.pop().unwrap();
            let mut merged = std::mem::take(&mut members[a]);
            merged.extend(std::mem::take(&mut members[b]));
            for &leaf in &merged {
                depth[leaf] += 1;
            }
            members.push(merged);
            heap.push(Reverse((pa + pb, members.len() - 1)));
        }
    } else {
        depth[0] = 1;
    }

    let mut rank: Vec<usize> = (0..k).collect();
    rank.sort_by(|&x, &y| p.probs()[y].cmp(&p.probs()[x]).then(x.cmp(&y)));
    let mut canonical: Vec<usize> = rank.clone();
    canonical.sort_by_key(|&i| depth[i]);
    let mut words = vec![String::new(); k];
    let mut code: u128 = 0;
    let mut prev_len = 0usize;
    for (pos, &i) in canonical.iter().enumerate() {
        let len = depth[i];
        if pos > 0 {
            code += 1;
        }
        code <<= len - prev_len;
        prev_len = len;
        words[i] = format!("{code:0len$b}");
    }
    let average_length = p
        .probs()
        .iter()
        .zip(&depth)
        .map(|(q, &d)| q * Rational::from_integer(BigInt::from(d)))
        .sum();
    Ok(Codebook {
        entries: (0..k)
            .map(|i| CodeEntry {
                label: p.outcomes()[i].clone(),
                codeword: std::mem::take(&mut words[i]),
                probability: p.probs()[i].clone(),
            })
            .collect(),
        average_length,
    })
}

/// `Σ 2^{-len}`, exactly.
pub fn kraft_sum(c: &Codebook) -> Rational {
    c.entries
        .iter()
        .map(|e| Rational::new(BigInt::one(), BigInt::one() << e.codeword.len()))
        .sum()
}

/// `b` distinct colors, one per replica vertex: replica `j` takes the
/// `j`-th smallest color of its set, or its next unused color on collision.
pub fn select_colors(c: &FoldColoring, vertices: &[usize]) -> Vec<usize> {
    let mut chosen: Vec<usize> = Vec::with_capacity(vertices.len());
    for (j, &v) in vertices.iter().enumerate() {
        let set = c.colors_of(v);
        let pick = (0..set.len())
            .map(|k| set[(j + k) % set.len()])
            .find(|col| !chosen.contains(col))
            .expect("a vertex has b colors and fewer than b are taken");
        chosen.push(pick);
    }
    chosen
}

/// Law of the transmitted color set when the side sequence follows its
/// marginal and the `b` replicas are conditionally independent given it.
pub fn replica_set_distribution(
    block: &BlockSource,
    c: &FoldColoring,
    b: usize,
    budget: &Budget,
) -> Result<Pmf> {
    check_shape(block, c, b)?;
    let sides = block.side_sequences();
    let cases = count_cases(block, &sides, b);
    if cases > budget.verify_cases as u128 {
        return Err(Error::Budget {
            what: "replica combinations for the color-set law",
            required: cases,
            bound: budget.verify_cases as u128,
        });
    }
    let partial = exec::map_collect(&sides, |side| {
        let cond = block.conditional_probs(side);
        let ps = block.side_prob(side);
        let mut acc: BTreeMap<Vec<usize>, Rational> = BTreeMap::new();
        for_each_tuple(cond.len(), b, |idx| {
            let verts: Vec<usize> = idx.iter().map(|&i| cond[i].0).collect();
            let mut set = select_colors(c, &verts);
            set.sort_unstable();
            let mass = idx.iter().fold(ps.clone(), |m, &i| m * &cond[i].1);
            *acc.entry(set).or_insert_with(Rational::zero) += mass;
        });
        acc
    });
    let mut total: BTreeMap<Vec<usize>, Rational> = BTreeMap::new();
    for acc in partial {
        for (k, v) in acc {
            *total.entry(k).or_insert_with(Rational::zero) += v;
        }
    }
    total.retain(|_, v| !v.is_zero());
    let (outcomes, probs) = total.into_iter().map(|(k, v)| (set_label(&k), v)).unzip();
    Pmf::new(outcomes, probs)
}

fn check_shape(block: &BlockSource, c: &FoldColoring, b: usize) -> Result<()> {
    if b == 0 || c.b != b {
        return Err(Error::InvalidArgument(format!(
            "coloring is {}-fold, codec asked for b = {b}",
            c.b
        )));
    }
    c.validate(block.graph())
}

fn count_cases(block: &BlockSource, sides: &[Vec<usize>], b: usize) -> u128 {
    sides
        .iter()
        .map(|s| (block.conditional_vertices(s).len() as u128).saturating_pow(b as u32))
        .sum()
}

/// Calls `f` on every `b`-tuple over `0..k`, lexicographically.
fn for_each_tuple(k: usize, b: usize, mut f: impl FnMut(&[usize])) {
    if k == 0 {
        return;
    }
    let mut idx = vec![0usize; b];
    loop {
        f(&idx);
        let mut pos = b;
        loop {
            if pos == 0 {
                return;
            }
            pos -= 1;
            idx[pos] += 1;
            if idx[pos] < k {
                break;
            }
            idx[pos] = 0;
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Encoded {
    pub colors: Vec<usize>,
    pub label: String,
    pub codeword: String,
}

/// Maps `b` replica sequences to one codeword.
pub struct Encoder<'a> {
    block: &'a BlockSource<'a>,
    coloring: &'a FoldColoring,
    codebook: &'a Codebook,
}

impl<'a> Encoder<'a> {
    pub fn new(block: &'a BlockSource<'a>, coloring: &'a FoldColoring, codebook: &'a Codebook) -> Self {
        Self {
            block,
            coloring,
            codebook,
        }
    }

    pub fn encode<S: AsRef<str>>(&self, replicas: &[Vec<S>]) -> Result<Encoded> {
        if replicas.len() != self.coloring.b {
            return Err(Error::InvalidArgument(format!(
                "expected {} replica sequences, got {}",
                self.coloring.b,
                replicas.len()
            )));
        }
        let vertices = replicas
            .iter()
            .map(|r| self.block.vertex_of_symbols(r))
            .collect::<Result<Vec<_>>>()?;
        self.encode_vertices(&vertices)
    }

    pub fn encode_vertices(&self, vertices: &[usize]) -> Result<Encoded> {
        let mut colors = select_colors(self.coloring, vertices);
        colors.sort_unstable();
        let label = set_label(&colors);
        let codeword = self
            .codebook
            .codeword(&label)
            .ok_or_else(|| Error::UnknownColorSet(label.clone()))?
            .to_string();
        Ok(Encoded {
            colors,
            label,
            codeword,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DecodedColor {
    pub color: usize,
    /// `f` values, one per coordinate.
    pub outcomes: Vec<String>,
    /// The only class member consistent with the side sequence, if unique.
    pub resolved: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DecodedBlock {
    pub label: String,
    pub side: Vec<String>,
    pub colors: Vec<DecodedColor>,
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize)]
pub struct DecodeResult {
    pub blocks: Vec<DecodedBlock>,
}

impl DecodeResult {
    /// All recovered values, block by block, color by color.
    pub fn outcomes(&self) -> Vec<String> {
        self.blocks
            .iter()
            .flat_map(|b| b.colors.iter().flat_map(|c| c.outcomes.iter().cloned()))
            .collect()
    }
}

/// Recovers function values from bits and side information only.
pub struct Decoder<'a> {
    block: &'a BlockSource<'a>,
    coloring: &'a FoldColoring,
    codebook: &'a Codebook,
}

impl<'a> Decoder<'a> {
    pub fn new(block: &'a BlockSource<'a>, coloring: &'a FoldColoring, codebook: &'a Codebook) -> Self {
        Self {
            block,
            coloring,
            codebook,
        }
    }

    /// `side` holds `n` symbols per codeword.
    pub fn decode<S: AsRef<str>>(&self, bits: &str, side: &[S]) -> Result<DecodeResult> {
        if let Some(bad) = bits.chars().find(|ch| *ch != '0' && *ch != '1') {
            return Err(Error::InvalidBitstring(format!("unexpected character `{bad}`")));
        }
        let labels = self.codebook.parse(bits)?;
        let n = self.block.n();
        if side.len() != n * labels.len() {
            return Err(Error::Framing(format!(
                "{} codewords need {} side symbols, got {}",
                labels.len(),
                n * labels.len(),
                side.len()
            )));
        }
        let mut blocks = Vec::with_capacity(labels.len());
        for (k, label) in labels.into_iter().enumerate() {
            let chunk = &side[k * n..(k + 1) * n];
            let s = self.block.side_of_symbols(chunk)?;
            let colors = parse_set_label(label)?;
            let decoded = colors
                .iter()
                .map(|&c| self.decode_color(c, &s))
                .collect::<Result<Vec<_>>>()?;
            blocks.push(DecodedBlock {
                label: label.to_string(),
                side: chunk.iter().map(|x| x.as_ref().to_string()).collect(),
                colors: decoded,
            });
        }
        Ok(DecodeResult { blocks })
    }

    fn decode_color(&self, color: usize, side: &[usize]) -> Result<DecodedColor> {
        decode_color(self.block, self.coloring, color, side)
    }
}

fn decode_color(
    block: &BlockSource,
    coloring: &FoldColoring,
    color: usize,
    side: &[usize],
) -> Result<DecodedColor> {
    let class = coloring
        .class_map
        .get(color)
        .ok_or_else(|| Error::UnknownColorSet(color.to_string()))?;
    let model = block.model();
    let tuples: Vec<Vec<usize>> = class.iter().map(|&u| block.tuple(u)).collect();
    let mut outcomes = Vec::with_capacity(side.len());
    for (i, &x2) in side.iter().enumerate() {
        let mut value: Option<&str> = None;
        for t in &tuples {
            if !model.positive(t[i], x2) {
                continue;
            }
            let f = model.f(t[i], x2);
            match value {
                None => value = Some(f),
                Some(prev) if prev != f => {
                    return Err(Error::InvariantViolation {
                        color,
                        coordinate: i,
                        first: prev.to_string(),
                        second: f.to_string(),
                    })
                }
                Some(_) => {}
            }
        }
        let v = value.ok_or(Error::ModelInconsistency { color, coordinate: i })?;
        outcomes.push(v.to_string());
    }
    let mut consistent = class.iter().filter(|&&u| block.on_support(u, side));
    let resolved = match (consistent.next(), consistent.next()) {
        (Some(&u), None) => Some(block.graph().label(u).to_string()),
        _ => None,
    };
    Ok(DecodedColor {
        color,
        outcomes,
        resolved,
    })
}

fn parse_set_label(label: &str) -> Result<Vec<usize>> {
    label
        .split('+')
        .map(|t| t.parse().map_err(|_| Error::UnknownColorSet(label.to_string())))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifyReport {
    pub n: usize,
    pub b: usize,
    pub cases: u64,
    pub mismatches: u64,
    pub total_bits: u64,
    pub outcomes: u64,
    /// Unweighted bits per recovered outcome over all enumerated cases.
    pub empirical_bits_per_outcome: f64,
    /// Average codeword length over `n·b`.
    #[serde(serialize_with = "ser_rational")]
    pub model_bits_per_outcome: Rational,
    /// First failing case in enumeration order.
    pub counterexample: Option<String>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.mismatches == 0
    }
}

/// Encode and decode every support-consistent (side, replicas) case.
pub fn verify_zero_error(
    block: &BlockSource,
    coloring: &FoldColoring,
    codebook: &Codebook,
    b: usize,
    budget: &Budget,
) -> Result<VerifyReport> {
    check_shape(block, coloring, b)?;
    let sides = block.side_sequences();
    let cases = count_cases(block, &sides, b);
    if cases > budget.verify_cases as u128 {
        return Err(Error::Budget {
            what: "zero-error verification cases",
            required: cases,
            bound: budget.verify_cases as u128,
        });
    }
    let encoder = Encoder::new(block, coloring, codebook);
    let n = block.n();
    let per_side = exec::map_collect(&sides, |side| {
        let cond = block.conditional_vertices(side);
        let mut cases = 0u64;
        let mut bits = 0u64;
        let mut bad = 0u64;
        let mut first: Option<String> = None;
        for_each_tuple(cond.len(), b, |idx| {
            cases += 1;
            let verts: Vec<usize> = idx.iter().map(|&i| cond[i]).collect();
            let failure = check_case(block, coloring, &encoder, &verts, side, &mut bits);
            if let Some(why) = failure {
                bad += 1;
                if first.is_none() {
                    let names: Vec<&str> = verts.iter().map(|&v| block.graph().label(v)).collect();
                    let side_names: Vec<&str> = side
                        .iter()
                        .map(|&x| block.model().x2_alphabet()[x].as_str())
                        .collect();
                    first = Some(format!(
                        "replicas [{}] with side ({}): {why}",
                        names.join("; "),
                        side_names.join(",")
                    ));
                }
            }
        });
        (cases, bits, bad, first)
    });
    let mut report = VerifyReport {
        n,
        b,
        cases: 0,
        mismatches: 0,
        total_bits: 0,
        outcomes: 0,
        empirical_bits_per_outcome: 0.0,
        model_bits_per_outcome: &codebook.average_length
            / Rational::from_integer(BigInt::from(n * b)),
        counterexample: None,
    };
    for (cases, bits, bad, first) in per_side {
        report.cases += cases;
        report.total_bits += bits;
        report.mismatches += bad;
        if report.counterexample.is_none() {
            report.counterexample = first;
        }
    }
    report.outcomes = report.cases * (n * b) as u64;
    if report.outcomes > 0 {
        report.empirical_bits_per_outcome = report.total_bits as f64 / report.outcomes as f64;
    }
    Ok(report)
}

fn check_case(
    block: &BlockSource,
    coloring: &FoldColoring,
    encoder: &Encoder,
    verts: &[usize],
    side: &[usize],
    bits: &mut u64,
) -> Option<String> {
    let encoded = match encoder.encode_vertices(verts) {
        Ok(e) => e,
        Err(e) => return Some(e.to_string()),
    };
    *bits += encoded.codeword.len() as u64;
    let parsed = match encoder.codebook.parse(&encoded.codeword) {
        Ok(p) if p.len() == 1 && p[0] == encoded.label => p,
        _ => return Some("codeword does not parse back to its color set".into()),
    };
    let colors = match parse_set_label(parsed[0]) {
        Ok(c) => c,
        Err(e) => return Some(e.to_string()),
    };
    let mut decoded = HashMap::new();
    for &c in &colors {
        match decode_color(block, coloring, c, side) {
            Ok(d) => {
                decoded.insert(c, d.outcomes);
            }
            Err(e) => return Some(e.to_string()),
        }
    }
    let chosen = select_colors(coloring, verts);
    for (j, (&v, c)) in verts.iter().zip(&chosen).enumerate() {
        let truth = block.outcome(v, side);
        if decoded.get(c) != Some(&truth) {
            return Some(format!("replica {j} decoded {:?}, expected {truth:?}", decoded.get(c)));
        }
    }
    None
}

/// 8-byte big-endian bit count, then the bits most significant first,
/// zero-padded to a whole byte.
pub fn pack_bits(bits: &str) -> Result<Vec<u8>> {
    let mut out = (bits.len() as u64).to_be_bytes().to_vec();
    let mut byte = 0u8;
    for (i, ch) in bits.chars().enumerate() {
        let bit = match ch {
            '0' => 0,
            '1' => 1,
            other => return Err(Error::InvalidBitstring(format!("unexpected character `{other}`"))),
        };
        byte |= bit << (7 - i % 8);
        if i % 8 == 7 {
            out.push(byte);
            byte = 0;
        }
    }
    if !bits.len().is_multiple_of(8) {
        out.push(byte);
    }
    Ok(out)
}

pub fn unpack_bits(bytes: &[u8]) -> Result<String> {
    let header: [u8; 8] = bytes
        .get(..8)
        .and_then(|h| h.try_into().ok())
        .ok_or_else(|| Error::Framing("missing bit-length header".into()))?;
    let len = u64::from_be_bytes(header) as usize;
    let body = &bytes[8..];
    if body.len() != len.div_ceil(8) {
        return Err(Error::Framing(format!(
            "header announces {len} bits but {} payload bytes follow",
            body.len()
        )));
    }
    Ok((0..len)
        .map(|i| if body[i / 8] >> (7 - i % 8) & 1 == 1 { '1' } else { '0' })
        .collect())
}
