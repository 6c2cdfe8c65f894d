//! Closed-form rate bounds and the feasibility classifier for `(alpha, beta, k)`.
//!
//! Everything here is exact: rates are [`Rational`]s and the only non-rational
//! quantity, `sqrt(n)` in the partial-case window, is replaced by a rational
//! upper bound. Constant slack terms are explicit `slack` arguments.

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::exact::{self, int, Rational};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RateError {
    #[error("rate {name} = {value} is outside [0, 1]")]
    OutOfRange { name: &'static str, value: Rational },
    #[error("k must be at least 1")]
    ZeroK,
    #[error("division by zero: {0}")]
    DivisionByZero(&'static str),
    #[error("precondition violated: {0}")]
    Precondition(&'static str),
}

/// Total or partial transformation families.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Variant {
    Total,
    Partial,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Verdict {
    #[serde(rename = "IN")]
    In,
    #[serde(rename = "OUT")]
    Out,
}

impl Verdict {
    fn from_bool(b: bool) -> Self {
        if b {
            Verdict::In
        } else {
            Verdict::Out
        }
    }
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Verdict::In => "IN",
            Verdict::Out => "OUT",
        })
    }
}

/// A rate pair with its family size and variant.
///
/// `computable` stands in for the computability of `alpha` and `beta`; exact
/// rationals are always computable, so the flag exists to let callers ask
/// about the threshold case on both sides of the dichotomy.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RateParams {
    alpha: Rational,
    beta: Rational,
    k: u32,
    pub variant: Variant,
    pub computable: bool,
}

fn check_unit(name: &'static str, value: &Rational) -> Result<(), RateError> {
    if value.is_negative() || *value > Rational::one() {
        return Err(RateError::OutOfRange {
            name,
            value: value.clone(),
        });
    }
    Ok(())
}

impl RateParams {
    pub fn new(alpha: Rational, beta: Rational, k: u32, variant: Variant) -> Result<Self, RateError> {
        check_unit("alpha", &alpha)?;
        check_unit("beta", &beta)?;
        if k == 0 {
            return Err(RateError::ZeroK);
        }
        Ok(RateParams {
            alpha,
            beta,
            k,
            variant,
            computable: true,
        })
    }

    pub fn with_computable(mut self, computable: bool) -> Self {
        self.computable = computable;
        self
    }

    pub fn alpha(&self) -> &Rational {
        &self.alpha
    }

    pub fn beta(&self) -> &Rational {
        &self.beta
    }

    pub fn k(&self) -> u32 {
        self.k
    }
}

/// `k alpha / (1 + (k - 1) alpha)`, the largest extractable rate with `k` functions.
pub fn threshold_beta(alpha: &Rational, k: u32) -> Rational {
    assert!(k >= 1, "k must be at least 1");
    let k = int(k);
    let denom = Rational::one() + (&k - Rational::one()) * alpha;
    k * alpha / denom
}

/// `beta / (k - (k - 1) beta)`, the inverse of [`threshold_beta`] in `alpha`.
pub fn alpha_from_beta(beta: &Rational, k: u32) -> Rational {
    assert!(k >= 1, "k must be at least 1");
    let k = int(k);
    let denom = &k - (&k - Rational::one()) * beta;
    beta / denom
}

/// Membership of `(alpha, beta)` in the total or partial extractor class.
///
/// The partial class contains the total one, so the total corners
/// `alpha = beta = 0` and `alpha = beta = 1` are `IN` for both variants.
pub fn classify_ext(params: &RateParams) -> Verdict {
    let (alpha, beta, k) = (&params.alpha, &params.beta, params.k);
    if k == 1 {
        return Verdict::from_bool(beta <= alpha);
    }
    let threshold = threshold_beta(alpha, k);
    let corner = (alpha.is_zero() && beta.is_zero()) || (alpha.is_one() && beta.is_one());
    let total = corner || *beta < threshold;
    match params.variant {
        Variant::Total => Verdict::from_bool(total),
        Variant::Partial => Verdict::from_bool(total || (*beta == threshold && params.computable)),
    }
}

/// Slopes of the admissible window for the input length `f(n)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FWindow {
    /// `beta / alpha`.
    pub lower_coeff: Rational,
    /// `k (1 - beta) / (1 - alpha)` for total families, `k / (1 + (k - 1) alpha)` for partial ones.
    pub upper_coeff: Rational,
    /// Whether the upper bound carries an extra `sqrt(n)`.
    pub upper_sqrt_term: bool,
    pub slack_constant: u64,
}

impl FWindow {
    pub fn new(params: &RateParams, slack: u64) -> Result<Self, RateError> {
        let (alpha, beta) = (&params.alpha, &params.beta);
        if alpha.is_zero() {
            return Err(RateError::DivisionByZero("alpha = 0 in the lower bound beta/alpha"));
        }
        let k = int(params.k);
        let lower_coeff = beta / alpha;
        let (upper_coeff, upper_sqrt_term) = match params.variant {
            Variant::Total => {
                if alpha.is_one() {
                    return Err(RateError::DivisionByZero(
                        "alpha = 1 in the total upper bound (1-beta)/(1-alpha)",
                    ));
                }
                let one = Rational::one();
                (k * (&one - beta) / (&one - alpha), false)
            }
            Variant::Partial => {
                let denom = Rational::one() + (&k - Rational::one()) * alpha;
                (k / denom, true)
            }
        };
        Ok(FWindow {
            lower_coeff,
            upper_coeff,
            upper_sqrt_term,
            slack_constant: slack,
        })
    }

    /// Evaluates the window at `n`.
    pub fn at(&self, n: u64) -> (Rational, Rational) {
        let nn = int(n);
        let slack = int(self.slack_constant);
        let lower = &self.lower_coeff * &nn - &slack;
        let mut upper = &self.upper_coeff * &nn + &slack;
        if self.upper_sqrt_term {
            upper += exact::sqrt_upper(n);
        }
        (lower, upper)
    }
}

/// Lower and upper bounds on the input length `f(n)` of any witnessing family.
pub fn f_window(params: &RateParams, n: u64, slack: u64) -> Result<(Rational, Rational), RateError> {
    Ok(FWindow::new(params, slack)?.at(n))
}

/// Best rate reachable from rate `alpha` with `h` advice bits (`k = 2^h` functions).
pub fn advice_bound(alpha: &Rational, h: u32) -> Result<Rational, RateError> {
    if !alpha.is_positive() || *alpha > Rational::one() {
        return Err(RateError::Precondition("advice_bound needs 0 < alpha <= 1"));
    }
    if h >= 32 {
        return Err(RateError::Precondition("advice_bound supports h < 32"));
    }
    Ok(threshold_beta(alpha, 1u32 << h))
}

/// `n - (f_n - n) / 2^h_n`, the rate reached with `h_n` bits of advice.
pub fn psi(n: u64, f_n: u64, h_n: u32) -> Result<Rational, RateError> {
    if f_n < n {
        return Err(RateError::Precondition("psi needs f_n >= n"));
    }
    let loss = Rational::new(BigInt::from(f_n - n), BigInt::from(1u8) << h_n);
    Ok(int(n) - loss)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CurveRow {
    pub k: u32,
    pub alpha: Rational,
    pub beta: Rational,
}

/// Threshold curves sampled on a uniform `alpha` grid over `[0, 1]`.
pub fn emit_threshold_curves(k_values: &[u32], grid_points: u32) -> Result<Vec<CurveRow>, RateError> {
    if grid_points < 2 {
        return Err(RateError::Precondition("grid_points must be at least 2"));
    }
    if k_values.contains(&0) {
        return Err(RateError::ZeroK);
    }
    let steps = i64::from(grid_points - 1);
    let mut rows = Vec::with_capacity(k_values.len() * grid_points as usize);
    for &k in k_values {
        for i in 0..=steps {
            let alpha = exact::ratio(i, steps);
            let beta = threshold_beta(&alpha, k);
            rows.push(CurveRow { k, alpha, beta });
        }
    }
    Ok(rows)
}

/// CSV rendering with header `k,alpha,beta` and 12 significant digits.
pub fn curves_to_csv(rows: &[CurveRow]) -> String {
    let mut out = String::from("k,alpha,beta\n");
    for row in rows {
        out.push_str(&format!(
            "{},{},{}\n",
            row.k,
            exact::to_decimal(&row.alpha, 12),
            exact::to_decimal(&row.beta, 12)
        ));
    }
    out
}
