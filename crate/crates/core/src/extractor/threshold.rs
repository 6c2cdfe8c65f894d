//! The recursive partial extractor at the threshold, over an abstract
//! description oracle.
//!
//! At level `k` the input has length `floor((k - (k-1) beta) n)`. The top
//! component searches for a description of length in `[n + d, n + 2d]` and
//! outputs its `n`-bit prefix; the lower components are the level `k - 1`
//! extractor applied to a prefix of the input.

use std::collections::HashMap;

use num_bigint::BigInt;
use num_traits::{One, Zero};
use serde::Serialize;

use super::{BitString, ExtractorError};
use crate::exact::{floor, Rational};

/// Stand-in for a universal machine's description search.
///
/// Implementations must return a description whose length lies in
/// `[min_len, max_len]`, or `None`.
pub trait DescriptionOracle {
    fn query(&self, x: &BitString, min_len: usize, max_len: usize) -> Option<BitString>;
}

/// Never finds a description.
#[derive(Debug, Clone, Copy, Default)]
pub struct RefusingOracle;

impl DescriptionOracle for RefusingOracle {
    fn query(&self, _: &BitString, _: usize, _: usize) -> Option<BitString> {
        None
    }
}

/// Answers every query with the same description when its length fits.
#[derive(Debug, Clone)]
pub struct FixedOracle(pub BitString);

impl DescriptionOracle for FixedOracle {
    fn query(&self, _: &BitString, min_len: usize, max_len: usize) -> Option<BitString> {
        (min_len..=max_len).contains(&self.0.len()).then(|| self.0.clone())
    }
}

/// Shortest descriptions by string. A description of length `l` is
/// assumed to exist at every length `>= l` (padding with zeros), which is
/// the padding property of a universal machine taken as a contract.
#[derive(Debug, Clone, Default)]
pub struct TableOracle {
    table: HashMap<BitString, BitString>,
}

impl TableOracle {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, x: BitString, description: BitString) {
        self.table.insert(x, description);
    }
}

impl DescriptionOracle for TableOracle {
    fn query(&self, x: &BitString, min_len: usize, max_len: usize) -> Option<BitString> {
        let p = self.table.get(x)?;
        if p.len() > max_len {
            return None;
        }
        let mut bits = p.bits().to_vec();
        bits.resize(bits.len().max(min_len), false);
        Some(BitString::new(bits))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Evaluation {
    /// Stop at the highest component that is defined.
    #[default]
    FirstDefined,
    /// Evaluate every component.
    AllComponents,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LevelTrace {
    pub level: u32,
    pub input_len: usize,
    pub n: usize,
    /// Requested description length range, absent at level 1.
    pub query: Option<(usize, usize)>,
    pub found: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ThresholdOutput {
    /// `(i, Gamma_i(x))` for `i = 1..=k`.
    pub components: Vec<(u32, Option<BitString>)>,
    pub trace: Vec<LevelTrace>,
}

/// `floor((k - (k-1) beta) n)`, the input length at level `k`.
pub fn input_length(beta: &Rational, k: u32, n: usize) -> usize {
    let ratio = Rational::from_integer(k.into()) - Rational::from_integer((k - 1).into()) * beta;
    let len: BigInt = floor(&(ratio * Rational::from_integer(n.into())));
    len.try_into().expect("lengths fit in usize")
}

/// The `n` with `input_length(beta, k, n) == len`; unique because the
/// ratio is at least 1.
fn recover_n(beta: &Rational, k: u32, len: usize) -> Option<usize> {
    let (mut lo, mut hi) = (0usize, len);
    while lo < hi {
        let mid = lo + (hi - lo) / 2;
        if input_length(beta, k, mid) < len {
            lo = mid + 1;
        } else {
            hi = mid;
        }
    }
    (input_length(beta, k, lo) == len).then_some(lo)
}

pub fn threshold_extract(
    x: &BitString,
    oracle: &dyn DescriptionOracle,
    beta: &Rational,
    k: u32,
    d: usize,
    evaluation: Evaluation,
) -> Result<ThresholdOutput, ExtractorError> {
    if k == 0 {
        return Err(ExtractorError::Unsupported("k must be at least 1".into()));
    }
    if beta <= &Rational::zero() || beta > &Rational::one() {
        return Err(ExtractorError::Unsupported(format!("beta = {beta} must lie in (0, 1]")));
    }
    let n = recover_n(beta, k, x.len()).ok_or_else(|| ExtractorError::LengthMismatch {
        found: x.len(),
        k,
        expected: None,
    })?;

    let mut components: Vec<(u32, Option<BitString>)> = (1..=k).rev().map(|i| (i, None)).collect();
    let mut trace = Vec::with_capacity(k as usize);
    let mut current = x.clone();
    for level in (1..=k).rev() {
        let expected = input_length(beta, level, n);
        assert_eq!(current.len(), expected, "prefix-length chain at level {level}");
        let slot = (k - level) as usize;
        if level == 1 {
            trace.push(LevelTrace {
                level,
                input_len: current.len(),
                n,
                query: None,
                found: true,
            });
            components[slot].1 = Some(current);
            break;
        }
        let (lo, hi) = (n + d, n + 2 * d);
        let found = oracle.query(&current, lo, hi);
        if let Some(p) = &found {
            if !(lo..=hi).contains(&p.len()) {
                return Err(ExtractorError::OracleContract {
                    len: p.len(),
                    min: lo,
                    max: hi,
                });
            }
        }
        trace.push(LevelTrace {
            level,
            input_len: current.len(),
            n,
            query: Some((lo, hi)),
            found: found.is_some(),
        });
        let stop = found.is_some() && evaluation == Evaluation::FirstDefined;
        components[slot].1 = found.map(|p| p.prefix(n));
        if stop {
            break;
        }
        current = current.prefix(input_length(beta, level - 1, n));
    }
    components.reverse();
    Ok(ThresholdOutput { components, trace })
}
