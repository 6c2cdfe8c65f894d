//! The budgeted description game.
//!
//! Kolmogorov complexity is replaced by counting. The adversary marks a
//! set `U` of at most `adversary_budget` vertices as having short
//! descriptions; the responder must then describe every input whose edge
//! lies inside `U`, and can afford at most `responder_budget` of them.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::attack::{densify, find_dense_subset, AttackConfig, AttackError, DensifyMode};
use crate::exact::Rational;
use crate::extractor::ExtractorFamily;
use crate::hypergraph::{GraphError, Hypergraph, VertexSet, DEFAULT_SUBSET_BUDGET};

/// Additive constant of the description model.
pub const C_MODEL: u64 = 0;
/// Witness lists longer than this are omitted.
pub const WITNESS_LIMIT: usize = 64;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GameError {
    #[error("explicit set has {size} vertices, over the adversary budget {budget}")]
    OverBudget { size: usize, budget: u64 },
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Attack(#[from] AttackError),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "strategy", rename_all = "snake_case")]
pub enum Strategy {
    /// Best `U` by exhaustive search, within a subset budget.
    Exhaustive { search_budget: u64 },
    /// The dense-subset attack, densified down to the budget when larger.
    GreedyAttack {
        #[serde(with = "crate::exact::serde_fraction")]
        beta: Rational,
        d: i64,
        config: AttackConfig,
    },
    Explicit { set: VertexSet },
}

impl Strategy {
    pub fn exhaustive() -> Self {
        Strategy::Exhaustive {
            search_budget: DEFAULT_SUBSET_BUDGET,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Strategy::Exhaustive { .. } => "exhaustive",
            Strategy::GreedyAttack { .. } => "greedy_attack",
            Strategy::Explicit { .. } => "explicit",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GameConfig {
    pub adversary_budget: u64,
    pub responder_budget: u64,
    #[serde(flatten)]
    pub strategy: Strategy,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct GameOutcome {
    #[serde(rename = "U")]
    pub set: VertexSet,
    pub forced_count: u64,
    pub responder_within_budget: bool,
    /// Edge indices inside `U`, when there are few of them.
    pub witness: Option<Vec<usize>>,
}

fn greedy_set(
    g: &Hypergraph,
    budget: usize,
    beta: &Rational,
    d: i64,
    config: &AttackConfig,
) -> Result<VertexSet, GameError> {
    let attack = find_dense_subset(g, beta, d, config)?;
    if attack.set.len() <= budget {
        return Ok(attack.set);
    }
    if budget == 0 {
        return Ok(VertexSet::empty());
    }
    let (sub, back) = g.induced(&attack.set)?;
    let dense = densify(&sub, budget, DensifyMode::BestEffort)?;
    Ok(dense.set.as_slice().iter().map(|&v| back[v as usize]).collect())
}

pub fn play(g: &Hypergraph, config: &GameConfig) -> Result<GameOutcome, GameError> {
    let budget = usize::try_from(config.adversary_budget)
        .unwrap_or(usize::MAX)
        .min(g.n_vertices());
    let set = match &config.strategy {
        Strategy::Exhaustive { search_budget } => g.max_dense_subset_bruteforce(budget, *search_budget)?.set,
        Strategy::GreedyAttack { beta, d, config } => greedy_set(g, budget, beta, *d, config)?,
        Strategy::Explicit { set } => {
            if set.len() as u64 > config.adversary_budget {
                return Err(GameError::OverBudget {
                    size: set.len(),
                    budget: config.adversary_budget,
                });
            }
            set.clone()
        }
    };
    let inside = g.edges_within(&set)?;
    let forced_count = inside.len() as u64;
    Ok(GameOutcome {
        set,
        forced_count,
        responder_within_budget: forced_count <= config.responder_budget,
        witness: (inside.len() <= WITNESS_LIMIT).then_some(inside),
    })
}

/// `2^{r+1} - 1`: strings of complexity at most `r` are at most this many.
pub fn counting_bound(r: u32) -> u128 {
    (1u128 << (r + 1)) - 1
}

/// Proxy complexity of a member of an enumerable set of at most `2^{sizes[n]}`
/// elements: `sizes[n] + 2 cond + C_MODEL`.
pub fn enumeration_budget(sizes: &[u64], n: usize, cond_complexity: u64) -> u64 {
    sizes[n] + 2 * cond_complexity + C_MODEL
}

/// Inputs all of whose outputs lie in `u`.
pub fn forced_inputs(fam: &ExtractorFamily, u: &VertexSet) -> Vec<usize> {
    (0..fam.inputs())
        .filter(|&s| (0..fam.k()).all(|i| u.contains(fam.get(i, s))))
        .collect()
}
