//! Finite probability models with exact rational masses, and Shannon entropy.

use std::collections::HashSet;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::Serialize;

use crate::error::{Error, Result};

pub type Rational = BigRational;

/// Parse `"3/10"`, `"0.1"`, `"-2"` or `"1e-1"` into an exact rational.
pub fn parse_rational(text: &str) -> Result<Rational> {
    let s = text.trim();
    let err = || Error::ParseRational(text.to_string());
    if s.is_empty() {
        return Err(err());
    }
    if let Some((num, den)) = s.split_once('/') {
        let n: BigInt = num.trim().parse().map_err(|_| err())?;
        let d: BigInt = den.trim().parse().map_err(|_| err())?;
        if d.is_zero() {
            return Err(err());
        }
        return Ok(Rational::new(n, d));
    }
    let (mantissa, exponent) = match s.find(['e', 'E']) {
        Some(pos) => (&s[..pos], s[pos + 1..].parse::<i32>().map_err(|_| err())?),
        None => (s, 0),
    };
    let (negative, digits) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int_part, frac_part) = digits.split_once('.').unwrap_or((digits, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(err());
    }
    if !int_part.chars().chain(frac_part.chars()).all(|c| c.is_ascii_digit()) {
        return Err(err());
    }
    let all: BigInt = format!("{int_part}{frac_part}").parse().map_err(|_| err())?;
    let scale = exponent - frac_part.len() as i32;
    let ten = BigInt::from(10u8);
    let mut value = Rational::from_integer(all);
    if scale >= 0 {
        value *= Rational::from_integer(num_traits::pow(ten, scale as usize));
    } else {
        value /= Rational::from_integer(num_traits::pow(ten, (-scale) as usize));
    }
    Ok(if negative { -value } else { value })
}

pub fn to_f64(r: &Rational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

/// `-p log2 p`, with `0 log 0 = 0`.
#[inline]
pub fn surprisal_term(p: f64) -> f64 {
    if p > 0.0 {
        -p * p.log2()
    } else {
        0.0
    }
}

/// Entropy in bits of a list of probabilities.
pub fn entropy_bits<I: IntoIterator<Item = f64>>(probs: I) -> f64 {
    probs.into_iter().map(surprisal_term).sum()
}

/// Entropy of an exact-rational probability vector.
pub fn entropy_of_rationals<'a, I: IntoIterator<Item = &'a Rational>>(probs: I) -> f64 {
    entropy_bits(probs.into_iter().map(to_f64))
}

fn check_distribution(probs: &[Rational], what: &str) -> Result<()> {
    if let Some(p) = probs.iter().find(|p| p.is_negative()) {
        return Err(Error::InvalidPmf(format!("{what}: negative mass {p}")));
    }
    let total: Rational = probs.iter().sum();
    if !total.is_one() {
        return Err(Error::InvalidPmf(format!("{what}: masses sum to {total}, not 1")));
    }
    Ok(())
}

fn check_unique(labels: &[String], what: &str) -> Result<()> {
    let mut seen = HashSet::with_capacity(labels.len());
    for l in labels {
        if !seen.insert(l.as_str()) {
            return Err(Error::InvalidModel(format!("duplicate symbol `{l}` in {what}")));
        }
    }
    Ok(())
}

/// A probability mass function over labelled outcomes.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Pmf {
    outcomes: Vec<String>,
    #[serde(serialize_with = "crate::results::ser_rationals")]
    probs: Vec<Rational>,
}

impl Pmf {
    pub fn new(outcomes: Vec<String>, probs: Vec<Rational>) -> Result<Self> {
        if outcomes.len() != probs.len() {
            return Err(Error::InvalidPmf(format!(
                "{} outcomes but {} masses",
                outcomes.len(),
                probs.len()
            )));
        }
        if outcomes.is_empty() {
            return Err(Error::InvalidPmf("no outcomes".into()));
        }
        check_unique(&outcomes, "pmf outcomes").map_err(|e| Error::InvalidPmf(e.to_string()))?;
        check_distribution(&probs, "pmf")?;
        Ok(Self { outcomes, probs })
    }

    pub fn uniform<S: Into<String>>(outcomes: impl IntoIterator<Item = S>) -> Result<Self> {
        let outcomes: Vec<String> = outcomes.into_iter().map(Into::into).collect();
        let k = outcomes.len().max(1);
        let p = Rational::new(BigInt::one(), BigInt::from(k));
        let probs = vec![p; outcomes.len()];
        Self::new(outcomes, probs)
    }

    /// Build from `(label, mass)` pairs given as strings, e.g. `("a", "1/4")`.
    pub fn from_pairs(pairs: &[(&str, &str)]) -> Result<Self> {
        let outcomes = pairs.iter().map(|(l, _)| l.to_string()).collect();
        let probs = pairs
            .iter()
            .map(|(_, p)| parse_rational(p))
            .collect::<Result<Vec<_>>>()?;
        Self::new(outcomes, probs)
    }

    pub fn outcomes(&self) -> &[String] {
        &self.outcomes
    }

    pub fn probs(&self) -> &[Rational] {
        &self.probs
    }

    pub fn len(&self) -> usize {
        self.outcomes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.outcomes.is_empty()
    }

    pub fn prob_of(&self, label: &str) -> Option<&Rational> {
        self.outcomes
            .iter()
            .position(|o| o == label)
            .map(|i| &self.probs[i])
    }

    pub fn probs_f64(&self) -> Vec<f64> {
        self.probs.iter().map(to_f64).collect()
    }

    pub fn support_size(&self) -> usize {
        self.probs.iter().filter(|p| p.is_positive()).count()
    }
}

/// Shannon entropy in bits.
pub fn shannon_entropy(p: &Pmf) -> f64 {
    entropy_of_rationals(p.probs())
}

/// A joint pmf over `rows × cols`, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct JointPmf {
    rows: Vec<String>,
    cols: Vec<String>,
    probs: Vec<Vec<Rational>>,
}

impl JointPmf {
    pub fn new(rows: Vec<String>, cols: Vec<String>, probs: Vec<Vec<Rational>>) -> Result<Self> {
        if probs.len() != rows.len() || probs.iter().any(|r| r.len() != cols.len()) {
            return Err(Error::InvalidPmf(format!(
                "joint pmf must be {}x{}",
                rows.len(),
                cols.len()
            )));
        }
        let flat: Vec<Rational> = probs.iter().flatten().cloned().collect();
        check_distribution(&flat, "joint pmf")?;
        Ok(Self { rows, cols, probs })
    }

    pub fn rows(&self) -> &[String] {
        &self.rows
    }

    pub fn cols(&self) -> &[String] {
        &self.cols
    }

    pub fn get(&self, r: usize, c: usize) -> &Rational {
        &self.probs[r][c]
    }

    pub fn matrix(&self) -> &[Vec<Rational>] {
        &self.probs
    }

    pub fn row_marginal(&self) -> Pmf {
        let probs = self.probs.iter().map(|r| r.iter().sum()).collect();
        Pmf {
            outcomes: self.rows.clone(),
            probs,
        }
    }

    pub fn col_marginal(&self) -> Pmf {
        let probs = (0..self.cols.len())
            .map(|c| self.probs.iter().map(|r| &r[c]).sum())
            .collect();
        Pmf {
            outcomes: self.cols.clone(),
            probs,
        }
    }

    pub fn joint_entropy(&self) -> f64 {
        entropy_of_rationals(self.probs.iter().flatten())
    }
}

/// `H(row | col) = H(row, col) - H(col)`.
pub fn conditional_entropy(joint: &JointPmf) -> f64 {
    joint.joint_entropy() - shannon_entropy(&joint.col_marginal())
}

/// Functions that can be evaluated on integer-valued symbols at load time.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Builtin {
    Sum,
    Product,
    /// `f(x1, x2) = x1`.
    Identity,
}

impl std::str::FromStr for Builtin {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "sum" => Ok(Self::Sum),
            "product" => Ok(Self::Product),
            "identity" => Ok(Self::Identity),
            other => Err(Error::InvalidModel(format!("unknown builtin function `{other}`"))),
        }
    }
}

impl Builtin {
    fn table(self, x1: &[String], x2: &[String]) -> Result<Vec<Vec<String>>> {
        if self == Self::Identity {
            return Ok(x1.iter().map(|a| vec![a.clone(); x2.len()]).collect());
        }
        let ints = |syms: &[String]| -> Result<Vec<i128>> {
            syms.iter()
                .map(|s| {
                    s.trim().parse::<i128>().map_err(|_| {
                        Error::InvalidModel(format!("builtin {self:?} needs integer symbols, got `{s}`"))
                    })
                })
                .collect()
        };
        let (a, b) = (ints(x1)?, ints(x2)?);
        Ok(a.iter()
            .map(|&u| {
                b.iter()
                    .map(|&v| match self {
                        Self::Sum => (u + v).to_string(),
                        Self::Product => (u * v).to_string(),
                        Self::Identity => unreachable!(),
                    })
                    .collect()
            })
            .collect())
    }
}

/// Two correlated finite sources and the function the decoder wants.
///
/// The function table is total over `x1 × x2`, including cells of probability
/// zero; graph and codec rules only ever consult it on the support.
#[derive(Debug, Clone, PartialEq)]
pub struct SourceModel {
    joint: JointPmf,
    function: Vec<Vec<String>>,
}

impl SourceModel {
    pub fn new(
        x1_alphabet: Vec<String>,
        x2_alphabet: Vec<String>,
        joint_pmf: Vec<Vec<Rational>>,
        function: Vec<Vec<String>>,
    ) -> Result<Self> {
        check_unique(&x1_alphabet, "x1_alphabet")?;
        check_unique(&x2_alphabet, "x2_alphabet")?;
        if x1_alphabet.is_empty() || x2_alphabet.is_empty() {
            return Err(Error::InvalidModel("alphabets must be nonempty".into()));
        }
        if function.len() != x1_alphabet.len()
            || function.iter().any(|r| r.len() != x2_alphabet.len())
        {
            return Err(Error::InvalidModel(format!(
                "function table must be {}x{}",
                x1_alphabet.len(),
                x2_alphabet.len()
            )));
        }
        let joint = JointPmf::new(x1_alphabet, x2_alphabet, joint_pmf)?;
        Ok(Self { joint, function })
    }

    pub fn with_builtin(
        x1_alphabet: Vec<String>,
        x2_alphabet: Vec<String>,
        joint_pmf: Vec<Vec<Rational>>,
        builtin: Builtin,
    ) -> Result<Self> {
        let table = builtin.table(&x1_alphabet, &x2_alphabet)?;
        Self::new(x1_alphabet, x2_alphabet, joint_pmf, table)
    }

    pub fn x1_alphabet(&self) -> &[String] {
        self.joint.rows()
    }

    pub fn x2_alphabet(&self) -> &[String] {
        self.joint.cols()
    }

    pub fn joint(&self) -> &JointPmf {
        &self.joint
    }

    pub fn function_table(&self) -> &[Vec<String>] {
        &self.function
    }

    pub fn x1_index(&self, symbol: &str) -> Result<usize> {
        self.x1_alphabet()
            .iter()
            .position(|s| s == symbol)
            .ok_or_else(|| Error::UnknownSymbol {
                symbol: symbol.to_string(),
                alphabet: "x1_alphabet",
            })
    }

    pub fn x2_index(&self, symbol: &str) -> Result<usize> {
        self.x2_alphabet()
            .iter()
            .position(|s| s == symbol)
            .ok_or_else(|| Error::UnknownSymbol {
                symbol: symbol.to_string(),
                alphabet: "x2_alphabet",
            })
    }

    #[inline]
    pub fn prob(&self, x1: usize, x2: usize) -> &Rational {
        self.joint.get(x1, x2)
    }

    #[inline]
    pub fn positive(&self, x1: usize, x2: usize) -> bool {
        self.joint.get(x1, x2).is_positive()
    }

    #[inline]
    pub fn f(&self, x1: usize, x2: usize) -> &str {
        &self.function[x1][x2]
    }

    pub fn marginal_x1(&self) -> Pmf {
        self.joint.row_marginal()
    }

    pub fn marginal_x2(&self) -> Pmf {
        self.joint.col_marginal()
    }

    /// Indices of `x1` with positive joint mass at `x2`.
    pub fn support_indices(&self, x2: usize) -> Vec<usize> {
        (0..self.x1_alphabet().len())
            .filter(|&u| self.positive(u, x2))
            .collect()
    }

    /// `{x1 : P(x1, x2) > 0}` in alphabet order.
    pub fn conditional_support(&self, x2: &str) -> Result<Vec<String>> {
        let j = self.x2_index(x2)?;
        Ok(self
            .support_indices(j)
            .into_iter()
            .map(|u| self.x1_alphabet()[u].clone())
            .collect())
    }

    /// `H(X1 | X2)` in bits.
    pub fn conditional_entropy_x1_given_x2(&self) -> f64 {
        conditional_entropy(&self.joint)
    }
}

/// Running example: uniform mass on ten cells and `f = x1 + x2` over `{-2,-1,0,1,2}`; used across tests.
pub fn example1_model() -> SourceModel {
    let alphabet: Vec<String> = ["-2", "-1", "0", "1", "2"].iter().map(|s| s.to_string()).collect();
    let t = Rational::new(BigInt::one(), BigInt::from(10));
    let z = Rational::zero();
    let rows = [
        [1, 1, 0, 0, 0],
        [1, 0, 0, 0, 1],
        [0, 1, 1, 0, 0],
        [0, 0, 1, 1, 0],
        [0, 0, 0, 1, 1],
    ];
    let joint = rows
        .iter()
        .map(|r| r.iter().map(|&c| if c == 1 { t.clone() } else { z.clone() }).collect())
        .collect();
    SourceModel::with_builtin(alphabet.clone(), alphabet, joint, Builtin::Sum)
        .expect("example model is valid")
}
