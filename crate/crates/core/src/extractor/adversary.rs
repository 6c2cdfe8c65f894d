//! The halving adversary against a partial family.
//!
//! Starting from a set `D` of inputs, each round keeps the inputs whose
//! `i`-th output lands in the `2^phi` most popular values, so the
//! survivors have all their defined outputs in a small set `B`.

use std::collections::{BTreeMap, BTreeSet};

use num_bigint::BigUint;
use serde::Serialize;

use super::{BitString, ExtractorError, PartialExtractorFamily};

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LoopTrace {
    pub i: usize,
    pub a_prev: usize,
    pub needed: usize,
    pub in_domain: usize,
    pub stalled: bool,
    pub b_size: usize,
    pub a_size: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct AdversaryOutcome {
    pub e_n: Vec<BitString>,
    pub b: Vec<BitString>,
    pub j: usize,
    pub trace: Vec<LoopTrace>,
}

impl AdversaryOutcome {
    /// `|E| * 2^{(n + 1 - phi) k} >= |D|`.
    pub fn meets_size_bound(&self, d_len: usize, n: u32, phi: u32, k: usize) -> bool {
        let shift = (n + 1 - phi) as usize * k;
        (BigUint::from(self.e_n.len()) << shift) >= BigUint::from(d_len)
    }
}

/// `Gamma'_i(x)` is the `i`-th distinct value among `Gamma_1(x), Gamma_2(x), ...`,
/// so the domains shrink with `i` and each value set is unchanged.
pub fn symmetrize(fam: &PartialExtractorFamily) -> PartialExtractorFamily {
    let k = fam.k();
    let size = 1usize << fam.f_n();
    let mut tables = vec![vec![None; size]; k];
    for s in 0..size {
        let mut seen = Vec::with_capacity(k);
        for i in 0..k {
            if let Some(y) = fam.get(i, s) {
                if !seen.contains(&y) {
                    tables[seen.len()][s] = Some(y);
                    seen.push(y);
                }
            }
        }
    }
    let out = PartialExtractorFamily::new(fam.n(), fam.f_n(), tables).expect("same shape as the input");
    for i in 1..k {
        debug_assert!((0..size).all(|s| out.get(i, s).is_none() || out.get(i - 1, s).is_some()));
    }
    out
}

pub fn adversary_partial(
    d_n: &[BitString],
    fam: &PartialExtractorFamily,
    phi: u32,
) -> Result<AdversaryOutcome, ExtractorError> {
    let f_n = fam.f_n();
    if phi > fam.n() {
        return Err(ExtractorError::Unsupported(format!("phi = {phi} exceeds n = {}", fam.n())));
    }
    if let Some(bad) = d_n.iter().find(|x| x.len() != f_n as usize) {
        return Err(ExtractorError::Malformed(format!("input {bad} is not {f_n} bits")));
    }
    let g = symmetrize(fam);
    let k = g.k();
    let size = 1usize << f_n;
    let nested = (1..k).all(|i| (0..size).all(|s| g.get(i, s).is_none() || g.get(i - 1, s).is_some()));
    assert!(nested, "symmetrized domains are nested");

    let cap = 1usize.checked_shl(phi).unwrap_or(usize::MAX);
    let mut a: BTreeSet<usize> = d_n.iter().map(|x| x.to_index() as usize).collect();
    let mut b: BTreeSet<u32> = BTreeSet::new();
    let mut trace = Vec::with_capacity(k);
    let mut j = k;
    for i in 0..k {
        let needed = a.len().div_ceil(2);
        let hits: Vec<usize> = a.iter().copied().filter(|&s| g.get(i, s).is_some()).collect();
        if hits.len() < needed {
            trace.push(LoopTrace {
                i: i + 1,
                a_prev: a.len(),
                needed,
                in_domain: hits.len(),
                stalled: true,
                b_size: 0,
                a_size: a.len(),
            });
            j = i;
            break;
        }
        let phi_dom = &hits[..needed];
        let mut counts: BTreeMap<u32, usize> = BTreeMap::new();
        for &s in phi_dom {
            *counts.entry(g.get(i, s).expect("in domain")).or_insert(0) += 1;
        }
        let mut ranked: Vec<(u32, usize)> = counts.into_iter().collect();
        ranked.sort_by(|x, y| y.1.cmp(&x.1).then(x.0.cmp(&y.0)));
        ranked.truncate(cap);
        let b_i: BTreeSet<u32> = ranked.into_iter().map(|(y, _)| y).collect();
        let a_prev = a.len();
        a = phi_dom
            .iter()
            .copied()
            .filter(|&s| b_i.contains(&g.get(i, s).expect("in domain")))
            .collect();
        trace.push(LoopTrace {
            i: i + 1,
            a_prev,
            needed,
            in_domain: hits.len(),
            stalled: false,
            b_size: b_i.len(),
            a_size: a.len(),
        });
        b.extend(b_i);
    }
    if j < k {
        a.retain(|&s| g.get(j, s).is_none());
    }
    Ok(AdversaryOutcome {
        e_n: a.into_iter().map(|s| BitString::from_index(s as u64, f_n)).collect(),
        b: b.into_iter().map(|y| BitString::from_index(u64::from(y), fam.n())).collect(),
        j,
        trace,
    })
}
