//! Random spread hypergraphs and their certificates.

use num_bigint::BigInt;
use num_traits::{ToPrimitive, Zero};
use rand::seq::index;
use rand_distr::{Binomial, Distribution};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::attack::{self, AttackConfig, AttackError, DensifyMode};
use crate::exact::{ceil, ceil_pow2, exp_neg_upper, floor, floor_pow2, int, pow2, pow2_neg_upper, serde_fraction, Rational};
use crate::hypergraph::{binomial, subset_count, EdgeKind, GraphError, Hypergraph, Vertex, VertexSet, DEFAULT_SUBSET_BUDGET};
use crate::rates::alpha_from_beta;
use crate::seed;

/// Largest potential-edge space enumerated one subset at a time.
const ENUMERATION_LIMIT: u128 = 1 << 22;
/// Largest tuple space `2^{n k}` the tuple sampler will enumerate.
pub const TUPLE_LOG2_LIMIT: u64 = 24;
const MAX_SAMPLED_EDGES: u64 = 50_000_000;
pub const DEFAULT_SAMPLES_PER_STRATUM: u64 = 100_000;
const ATTEMPT_BATCH: u64 = 8;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SamplerError {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("{what} is too large to sample at desk scale")]
    ScaleExceeded { what: String },
    #[error("chernoff bound precondition violated: {0}")]
    Precondition(&'static str),
    #[error("no certified graph within {attempts} attempts")]
    AttemptsExhausted {
        attempts: u64,
        best: Box<(Hypergraph, SpreadCertificate)>,
    },
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Attack(#[from] AttackError),
}

/// Construction parameters with every derived quantity spelled out.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SpreadParams {
    pub n: u32,
    pub k: u32,
    #[serde(with = "serde_fraction")]
    pub beta: Rational,
    #[serde(with = "serde_fraction")]
    pub alpha: Rational,
    #[serde(rename = "D")]
    pub d: i64,
    pub d_slack: u32,
    /// `floor((k - (k-1) beta) n)`.
    pub f_n: u64,
    /// Edge probability is `2^{-probability_exponent}`, i.e. `2^{-ceil((k-1) beta n) + D}` clipped to 1.
    pub probability_exponent: u64,
    #[serde(with = "serde_fraction")]
    pub edge_probability: Rational,
    #[serde(with = "serde_fraction")]
    pub expected_edges: Rational,
    pub target_edges: u64,
    pub subset_cap: u64,
    pub edge_bound: u64,
    pub seed: u64,
}

#[derive(Debug, Clone)]
pub struct SpreadBuilder {
    n: u32,
    k: u32,
    beta: Rational,
    alpha: Option<Rational>,
    d: i64,
    d_slack: u32,
    target_edges: Option<u64>,
    edge_bound: Option<u64>,
    seed: u64,
}

fn saturate(v: &BigInt) -> u64 {
    if v.is_zero() || *v < BigInt::zero() {
        0
    } else {
        v.to_u64().unwrap_or(u64::MAX)
    }
}

impl SpreadBuilder {
    pub fn alpha(mut self, alpha: Rational) -> Self {
        self.alpha = Some(alpha);
        self
    }

    pub fn d(mut self, d: i64) -> Self {
        self.d = d;
        self
    }

    pub fn d_slack(mut self, d_slack: u32) -> Self {
        self.d_slack = d_slack;
        self
    }

    pub fn target_edges(mut self, t: u64) -> Self {
        self.target_edges = Some(t);
        self
    }

    pub fn edge_bound(mut self, b: u64) -> Self {
        self.edge_bound = Some(b);
        self
    }

    pub fn seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn build(self) -> Result<SpreadParams, SamplerError> {
        let SpreadBuilder { n, k, beta, .. } = self;
        let bad = |m: &str| Err(SamplerError::InvalidParams(m.to_string()));
        if k == 0 {
            return bad("k must be at least 1");
        }
        if n > 31 {
            return bad("n must be at most 31");
        }
        if (1u64 << n) < u64::from(k) {
            return bad("need 2^n >= k");
        }
        if beta < int(0) || beta > int(1) {
            return bad("beta must lie in [0, 1]");
        }
        let alpha = self.alpha.unwrap_or_else(|| alpha_from_beta(&beta, k));
        if alpha < int(0) || alpha > int(1) {
            return bad("alpha must lie in [0, 1]");
        }
        let (kr, nr) = (int(k), int(n));
        let f_n = saturate(&floor(&((&kr - (&kr - int(1)) * &beta) * &nr)));
        let raw = ceil(&((&kr - int(1)) * &beta * &nr)) - self.d;
        let probability_exponent = saturate(&raw);
        let edge_probability = pow2(-(probability_exponent as i64));
        let expected_edges = Rational::from_integer(binomial(1 << n, u64::from(k))) * &edge_probability;
        let target_edges = self
            .target_edges
            .unwrap_or_else(|| saturate(&floor(&(&expected_edges / int(2)))));
        let subset_cap = saturate(&floor_pow2(&(&beta * &nr)).into());
        let edge_bound = self.edge_bound.unwrap_or_else(|| {
            let base: BigInt = ceil_pow2(&(&alpha * int(f_n))).into();
            saturate(&(base << self.d_slack))
        });
        Ok(SpreadParams {
            n,
            k,
            beta,
            alpha,
            d: self.d,
            d_slack: self.d_slack,
            f_n,
            probability_exponent,
            edge_probability,
            expected_edges,
            target_edges,
            subset_cap,
            edge_bound,
            seed: self.seed,
        })
    }
}

impl SpreadParams {
    pub fn builder(n: u32, k: u32, beta: Rational) -> SpreadBuilder {
        SpreadBuilder {
            n,
            k,
            beta,
            alpha: None,
            d: 0,
            d_slack: 2,
            target_edges: None,
            edge_bound: None,
            seed: 0,
        }
    }

    pub fn n_vertices(&self) -> usize {
        1usize << self.n
    }

    pub fn with_seed(&self, seed: u64) -> SpreadParams {
        SpreadParams {
            seed,
            ..self.clone()
        }
    }
}

/// Advances a colex-ordered k-subset; false once exhausted.
fn next_colex(c: &mut [Vertex], n: usize) -> bool {
    let k = c.len();
    for i in 0..k {
        let limit = if i + 1 < k { c[i + 1] } else { n as Vertex };
        if c[i] + 1 < limit {
            c[i] += 1;
            for (j, slot) in c.iter_mut().enumerate().take(i) {
                *slot = j as Vertex;
            }
            return true;
        }
    }
    false
}

/// The k-subset of colex rank `rank` (combinatorial number system).
fn unrank_colex(mut rank: u128, k: usize, n: usize) -> Vec<Vertex> {
    let mut out = vec![0; k];
    let mut hi = n as u128;
    for i in (0..k).rev() {
        let choose = |c: u128| -> u128 { binomial(c as u64, i as u64 + 1).to_u128().unwrap_or(u128::MAX) };
        // largest c < hi with C(c, i+1) <= rank
        let (mut lo, mut up) = (i as u128, hi);
        while up - lo > 1 {
            let mid = lo + (up - lo) / 2;
            if choose(mid) <= rank {
                lo = mid;
            } else {
                up = mid;
            }
        }
        out[i] = lo as Vertex;
        rank -= choose(lo);
        hi = lo;
    }
    out
}

/// Each of the `C(2^n, k)` potential edges independently with probability
/// `2^{-probability_exponent}`.
pub fn sample_spread(params: &SpreadParams) -> Result<Hypergraph, SamplerError> {
    let nv = params.n_vertices();
    let k = params.k as usize;
    let e = u32::try_from(params.probability_exponent).unwrap_or(u32::MAX);
    let mut rng = seed::rng(params.seed);
    let space = binomial(nv as u64, k as u64).to_u128().unwrap_or(u128::MAX);
    let mut rows = Vec::new();
    if space <= ENUMERATION_LIMIT {
        let mut c: Vec<Vertex> = (0..k as Vertex).collect();
        loop {
            if seed::bernoulli_dyadic(&mut rng, e) {
                rows.push(c.clone());
            }
            if !next_colex(&mut c, nv) {
                break;
            }
        }
    } else {
        let space64 = u64::try_from(space).map_err(|_| SamplerError::ScaleExceeded {
            what: "potential edge space".into(),
        })?;
        let p = params.edge_probability.to_f64().expect("dyadic probability");
        let count = Binomial::new(space64, p)
            .map_err(|e| SamplerError::InvalidParams(e.to_string()))?
            .sample(&mut rng);
        if count > MAX_SAMPLED_EDGES {
            return Err(SamplerError::ScaleExceeded {
                what: format!("{count} sampled edges"),
            });
        }
        let space_usize = usize::try_from(space64).map_err(|_| SamplerError::ScaleExceeded {
            what: "potential edge space".into(),
        })?;
        for rank in index::sample(&mut rng, space_usize, count as usize) {
            rows.push(unrank_colex(rank as u128, k, nv));
        }
    }
    Ok(Hypergraph::new(nv, k, EdgeKind::DistinctSet, rows)?)
}

/// Ordered `2^h`-tuples over `2^n` vertices, each kept with probability
/// `min(1, 2^{f - n 2^h + 3})`.
pub fn sample_tuple_spread(n: u32, f_n: u64, h_n: u32, seed: u64) -> Result<Hypergraph, SamplerError> {
    if u64::from(n) > f_n {
        return Err(SamplerError::InvalidParams("need f_n >= n".into()));
    }
    if h_n >= 16 {
        return Err(SamplerError::ScaleExceeded {
            what: format!("tuple arity 2^{h_n}"),
        });
    }
    let k = 1u64 << h_n;
    let log_space = u64::from(n) * k;
    if log_space > TUPLE_LOG2_LIMIT {
        return Err(SamplerError::ScaleExceeded {
            what: format!("tuple space 2^{log_space}"),
        });
    }
    let exponent = tuple_probability_exponent(n, f_n, h_n);
    let e = u32::try_from(-exponent.min(0)).unwrap_or(u32::MAX);
    let nv = 1usize << n;
    let mut rng = seed::rng(seed);
    let mask = (nv - 1) as u64;
    let mut rows = Vec::new();
    for t in 0..1u64 << log_space {
        if seed::bernoulli_dyadic(&mut rng, e) {
            // most significant coordinate first, so ranks follow lexicographic order
            let row: Vec<Vertex> = (0..k)
                .rev()
                .map(|i| ((t >> (i * u64::from(n))) & mask) as Vertex)
                .collect();
            rows.push(row);
        }
    }
    Ok(Hypergraph::new(nv, k as usize, EdgeKind::OrderedTuple, rows)?)
}

/// `f - n 2^h + 3`; the tuple probability is `2^{min(0, this)}`.
pub fn tuple_probability_exponent(n: u32, f_n: u64, h_n: u32) -> i64 {
    f_n as i64 - i64::from(n) * (1i64 << h_n) + 3
}

/// Keeps the `m` lexicographically smallest edges.
pub fn trim_to(g: &Hypergraph, m: usize) -> Hypergraph {
    g.truncated(m)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Tail {
    Upper,
    Lower,
}

/// `2^{-delta mu}` (upper tail, `delta >= 6`) or `e^{-delta^2 mu / 2}`
/// (lower tail, `0 <= delta <= 1`), as rational upper bounds.
pub fn chernoff_budget(mu: &Rational, delta: &Rational, tail: Tail) -> Result<Rational, SamplerError> {
    if *mu < int(0) {
        return Err(SamplerError::Precondition("mu must be nonnegative"));
    }
    match tail {
        Tail::Upper => {
            if *delta < int(6) {
                return Err(SamplerError::Precondition("upper tail needs delta >= 6"));
            }
            Ok(pow2_neg_upper(&(delta * mu)))
        }
        Tail::Lower => {
            if *delta < int(0) || *delta > int(1) {
                return Err(SamplerError::Precondition("lower tail needs 0 <= delta <= 1"));
            }
            Ok(exp_neg_upper(&(delta * delta * mu / int(2))))
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum VerifyMode {
    Exhaustive {
        budget: u64,
    },
    Randomized {
        samples_per_stratum: u64,
        seed: u64,
    },
    AttackAssisted {
        samples_per_stratum: u64,
        seed: u64,
        #[serde(with = "serde_fraction")]
        beta: Rational,
        #[serde(rename = "D")]
        d: i64,
        attack: AttackConfig,
    },
}

impl VerifyMode {
    pub fn exhaustive() -> Self {
        VerifyMode::Exhaustive {
            budget: DEFAULT_SUBSET_BUDGET,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            VerifyMode::Exhaustive { .. } => "exhaustive",
            VerifyMode::Randomized { .. } => "randomized",
            VerifyMode::AttackAssisted { .. } => "attack_assisted",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChernoffReport {
    #[serde(with = "serde_fraction")]
    pub mu: Rational,
    #[serde(with = "serde_fraction")]
    pub delta: Rational,
    pub tail: Tail,
    /// Upper bound on the probability of falling short of `target_edges`.
    #[serde(with = "serde_fraction")]
    pub bound: Rational,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CertificateParams {
    pub n_vertices: usize,
    pub k: usize,
    pub edge_count: u64,
    pub subset_cap: u64,
    pub edge_bound: u64,
    pub verification: VerifyMode,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub construction: Option<SpreadParams>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SpreadCertificate {
    pub params: CertificateParams,
    pub mode: String,
    #[serde(rename = "max_U")]
    pub max_u: VertexSet,
    pub max_e: u64,
    pub subsets_checked: u128,
    pub attempts: u64,
    pub pass: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub chernoff: Option<ChernoffReport>,
}

impl SpreadCertificate {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("certificates serialize")
    }
}

#[derive(Clone)]
struct Observed {
    e: u64,
    set: VertexSet,
}

impl Observed {
    fn max(self, other: Observed) -> Observed {
        if other.e > self.e || (other.e == self.e && other.set < self.set) {
            other
        } else {
            self
        }
    }
}

fn randomized_scan(g: &Hypergraph, cap: usize, samples: u64, seed_base: u64) -> (Observed, u128) {
    let nv = g.n_vertices();
    let cap = cap.min(nv);
    let empty = Observed {
        e: 0,
        set: VertexSet::empty(),
    };
    let sampled = (1..=cap)
        .into_par_iter()
        .map(|u| {
            let mut rng = seed::rng(seed::split(seed_base, u as u64));
            let mut best = Observed {
                e: 0,
                set: VertexSet::empty(),
            };
            for _ in 0..samples {
                let set: VertexSet = index::sample(&mut rng, nv, u).into_iter().map(|v| v as Vertex).collect();
                let e = g.edge_count_within(&set).expect("sampled ids are valid");
                best = best.max(Observed { e, set });
            }
            best
        })
        .reduce(|| empty.clone(), Observed::max);
    let greedy = (g.k().min(cap).max(1)..=cap)
        .into_par_iter()
        .map(|u| {
            let d = attack::densify(g, u, DensifyMode::BestEffort).expect("u <= n");
            Observed { e: d.edges, set: d.set }
        })
        .reduce(|| empty.clone(), Observed::max);
    let greedy_runs = (g.k().min(cap).max(1)..=cap).count() as u128;
    (sampled.max(greedy), samples as u128 * cap as u128 + greedy_runs)
}

/// Looks for `|U| <= cap` with `e(U) >= bound`; passes when none is found.
pub fn verify_spread(g: &Hypergraph, cap: u64, bound: u64, mode: &VerifyMode) -> Result<SpreadCertificate, SamplerError> {
    let capu = usize::try_from(cap).unwrap_or(usize::MAX);
    let (observed, checked) = match mode {
        VerifyMode::Exhaustive { budget } => {
            let r = g.max_dense_subset_bruteforce(capu, *budget)?;
            (
                Observed {
                    e: r.edges,
                    set: r.set,
                },
                r.subsets_checked,
            )
        }
        VerifyMode::Randomized {
            samples_per_stratum,
            seed,
        } => randomized_scan(g, capu, *samples_per_stratum, *seed),
        VerifyMode::AttackAssisted {
            samples_per_stratum,
            seed,
            beta,
            d,
            attack: config,
        } => {
            let (mut best, mut checked) = randomized_scan(g, capu, *samples_per_stratum, *seed);
            let r = attack::find_dense_subset(g, beta, *d, config)?;
            let found = if r.set.len() <= capu {
                Observed { e: r.e_u, set: r.set }
            } else {
                let (sub, back) = g.induced(&r.set)?;
                let dense = attack::densify(&sub, capu, DensifyMode::BestEffort)?;
                Observed {
                    e: dense.edges,
                    set: dense.set.as_slice().iter().map(|&v| back[v as usize]).collect(),
                }
            };
            checked += 1;
            best = best.max(found);
            (best, checked)
        }
    };
    Ok(SpreadCertificate {
        params: CertificateParams {
            n_vertices: g.n_vertices(),
            k: g.k(),
            edge_count: g.edge_count() as u64,
            subset_cap: cap,
            edge_bound: bound,
            verification: mode.clone(),
            construction: None,
        },
        mode: mode.name().to_string(),
        pass: observed.e < bound,
        max_u: observed.set,
        max_e: observed.e,
        subsets_checked: checked,
        attempts: 0,
        chernoff: None,
    })
}

/// Lower-tail bound on falling short of `target_edges`, when it applies.
pub fn edge_count_chernoff(params: &SpreadParams) -> Option<ChernoffReport> {
    let mu = params.expected_edges.clone();
    let target = int(params.target_edges);
    if mu.is_zero() || target > mu {
        return None;
    }
    let delta = int(1) - target / &mu;
    let bound = chernoff_budget(&mu, &delta, Tail::Lower).ok()?;
    Some(ChernoffReport {
        mu,
        delta,
        tail: Tail::Lower,
        bound,
    })
}

/// Exhaustive verification when the subset count fits `budget`, randomized otherwise.
pub fn default_verify_mode(params: &SpreadParams, budget: u64, seed: u64) -> VerifyMode {
    let cap = usize::try_from(params.subset_cap).unwrap_or(usize::MAX);
    if subset_count(params.n_vertices(), cap) <= u128::from(budget) {
        VerifyMode::Exhaustive { budget }
    } else {
        VerifyMode::Randomized {
            samples_per_stratum: DEFAULT_SAMPLES_PER_STRATUM,
            seed,
        }
    }
}

pub fn construct_certified(params: &SpreadParams, max_attempts: u64) -> Result<(Hypergraph, SpreadCertificate), SamplerError> {
    construct_certified_with(params, max_attempts, DEFAULT_SUBSET_BUDGET)
}

/// Samples with seeds `seed, seed + 1, ...` until a graph has at least
/// `target_edges` edges and a passing certificate.
pub fn construct_certified_with(
    params: &SpreadParams,
    max_attempts: u64,
    budget: u64,
) -> Result<(Hypergraph, SpreadCertificate), SamplerError> {
    let attempt = |i: u64| -> Result<(bool, Hypergraph, SpreadCertificate), SamplerError> {
        let p = params.with_seed(params.seed.wrapping_add(i));
        let g = sample_spread(&p)?;
        let mode = default_verify_mode(&p, budget, seed::split(p.seed, 0));
        let mut cert = verify_spread(&g, p.subset_cap, p.edge_bound, &mode)?;
        cert.attempts = i + 1;
        cert.params.construction = Some(p.clone());
        cert.chernoff = edge_count_chernoff(&p);
        let ok = cert.pass && g.edge_count() as u64 >= p.target_edges;
        Ok((ok, g, cert))
    };
    let mut best: Option<(Hypergraph, SpreadCertificate)> = None;
    let rank = |g: &Hypergraph, c: &SpreadCertificate| (g.edge_count() as u64 >= params.target_edges, std::cmp::Reverse(c.max_e));
    let mut start = 0;
    while start < max_attempts {
        let end = (start + ATTEMPT_BATCH).min(max_attempts);
        let batch: Vec<_> = (start..end).into_par_iter().map(attempt).collect::<Result<_, _>>()?;
        for (ok, g, cert) in batch {
            if ok {
                return Ok((g, cert));
            }
            if best.as_ref().is_none_or(|(bg, bc)| rank(&g, &cert) > rank(bg, bc)) {
                best = Some((g, cert));
            }
        }
        start = end;
    }
    let best = match best {
        Some(b) => b,
        None => {
            let (_, g, cert) = attempt(0)?;
            (g, cert)
        }
    };
    Err(SamplerError::AttemptsExhausted {
        attempts: max_attempts,
        best: Box::new(best),
    })
}
