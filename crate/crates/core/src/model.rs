//! Exact-arithmetic instance and belief representation shared by all
//! other modules.
//!
//! All inputs are rationals; arithmetic on [`Rational`] is exact with
//! arbitrary-precision integers, so no rounding ever occurs in the core
//! computations. `num_rational::BigRational` keeps values in canonical
//! reduced form with a positive denominator, which is exactly the
//! invariant required here.

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use serde::Deserialize;
use std::fmt::Write as _;
use thiserror::Error;

/// Exact rational number: reduced `numerator / denominator`, denominator > 0.
pub type Rational = num_rational::BigRational;

/// Shorthand for an integer-valued rational.
pub fn rat(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

/// Shorthand for `n/d` as a rational. Panics on `d = 0`.
pub fn ratio(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ModelError {
    #[error("malformed rational {input:?}: {reason}")]
    MalformedRational { input: String, reason: String },
    #[error("prior does not sum to 1")]
    PriorSum,
    #[error("belief does not sum to 1")]
    BeliefSum,
    #[error("belief coordinate out of [0, 1]")]
    BeliefRange,
    #[error("{what} must be positive")]
    NonPositive { what: &'static str },
    #[error("travel time must be non-negative")]
    NegativeTravelTime,
    #[error("dimension mismatch: {what}")]
    DimensionMismatch { what: String },
    #[error("instance document is not valid JSON: {0}")]
    Json(String),
    #[error("empty {what}")]
    Empty { what: &'static str },
}

/// Parses `"p/q"`, `"p"`, or a decimal like `"0.15"` into an exact rational.
pub fn parse_rational(s: &str) -> Result<Rational, ModelError> {
    let err = |reason: &str| ModelError::MalformedRational {
        input: s.to_string(),
        reason: reason.to_string(),
    };
    let t = s.trim();
    if t.is_empty() {
        return Err(err("empty string"));
    }
    if let Some((num, den)) = t.split_once('/') {
        let n: BigInt = num.trim().parse().map_err(|_| err("bad numerator"))?;
        let d: BigInt = den.trim().parse().map_err(|_| err("bad denominator"))?;
        if d.is_zero() {
            return Err(err("zero denominator"));
        }
        return Ok(Rational::new(n, d));
    }
    if let Some((int, frac)) = t.split_once('.') {
        let int = if int.is_empty() || int == "-" {
            format!("{int}0")
        } else {
            int.to_string()
        };
        let i: BigInt = int.parse().map_err(|_| err("bad integer part"))?;
        if frac.is_empty() || !frac.bytes().all(|b| b.is_ascii_digit()) {
            return Err(err("bad fractional part"));
        }
        let f: BigInt = frac.parse().map_err(|_| err("bad fractional part"))?;
        let scale = BigInt::from(10u32).pow(frac.len() as u32);
        let whole = Rational::from_integer(i) * Rational::from_integer(scale.clone());
        let frac = if t.starts_with('-') {
            -Rational::from_integer(f)
        } else {
            Rational::from_integer(f)
        };
        return Ok((whole + frac) / Rational::from_integer(scale));
    }
    let n: BigInt = t.parse().map_err(|_| err("not an integer"))?;
    Ok(Rational::from_integer(n))
}

/// Formats a rational as `"p/q"` (or `"p"` for integers); round-trips
/// exactly through [`parse_rational`].
pub fn format_rational(r: &Rational) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Decimal rendering with a fixed number of significant digits
/// (half-away-from-zero). Used for diff-stable report output.
pub fn format_decimal(r: &Rational, significant: usize) -> String {
    assert!(significant > 0);
    if r.is_zero() {
        let mut s = String::from("0.");
        for _ in 0..significant.saturating_sub(1) {
            s.push('0');
        }
        return s;
    }
    let neg = r.is_negative();
    let a = r.abs();
    // exponent e: smallest such that a < 10^e, i.e. leading digit at 10^(e-1)
    let mut e: i64 = 0;
    let ten = rat(10);
    let mut probe = Rational::one();
    while a >= probe {
        probe *= &ten;
        e += 1;
    }
    while a < (&probe / &ten) {
        probe /= &ten;
        e -= 1;
    }
    // round a * 10^(significant - e) to an integer
    let shift = significant as i64 - e;
    let scaled = if shift >= 0 {
        a * Rational::from_integer(BigInt::from(10u32).pow(shift as u32))
    } else {
        a / Rational::from_integer(BigInt::from(10u32).pow((-shift) as u32))
    };
    let (mut digits, rem) = (
        scaled.numer() / scaled.denom(),
        scaled.numer() % scaled.denom(),
    );
    if &rem * BigInt::from(2) >= *scaled.denom() {
        digits += 1;
    }
    let mut ds = digits.to_string();
    if ds.len() > significant {
        // rounding carried into a new leading digit (e.g. 9.99 -> 10.0)
        e += 1;
        ds.truncate(significant);
    }
    let mut out = String::new();
    if neg {
        out.push('-');
    }
    if e <= 0 {
        out.push_str("0.");
        for _ in 0..(-e) {
            out.push('0');
        }
        out.push_str(&ds);
    } else if (e as usize) >= significant {
        out.push_str(&ds);
        for _ in 0..(e as usize - significant) {
            out.push('0');
        }
        out.push('.');
    } else {
        out.push_str(&ds[..e as usize]);
        out.push('.');
        out.push_str(&ds[e as usize..]);
    }
    out
}

/// A point of the probability simplex over scenarios: coordinates in
/// `[0, 1]` summing to exactly 1.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Belief(Vec<Rational>);

impl Belief {
    pub fn new(coords: Vec<Rational>) -> Result<Self, ModelError> {
        if coords.is_empty() {
            return Err(ModelError::Empty { what: "belief" });
        }
        if coords
            .iter()
            .any(|c| c.is_negative() || c > &Rational::one())
        {
            return Err(ModelError::BeliefRange);
        }
        let sum: Rational = coords.iter().sum();
        if !sum.is_one() {
            return Err(ModelError::BeliefSum);
        }
        Ok(Belief(coords))
    }

    /// The degenerate belief putting all mass on scenario `s`.
    pub fn unit(s: usize, d: usize) -> Self {
        let mut v = vec![Rational::zero(); d];
        v[s] = Rational::one();
        Belief(v)
    }

    pub fn d(&self) -> usize {
        self.0.len()
    }

    pub fn coords(&self) -> &[Rational] {
        &self.0
    }

    pub fn get(&self, s: usize) -> &Rational {
        &self.0[s]
    }
}

impl std::fmt::Display for Belief {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let mut s = String::new();
        for (i, c) in self.0.iter().enumerate() {
            if i > 0 {
                s.push(',');
            }
            let _ = write!(s, "{}", format_rational(c));
        }
        write!(f, "({s})")
    }
}

/// The queueing system: `m` parallel links with capacities and
/// scenario-dependent travel times, constant inflow, a time horizon and
/// a prior over the `d` scenarios.
#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    pub capacities: Vec<Rational>,
    /// `travel_times[i][s]`: travel time of link `i` in scenario `s`.
    pub travel_times: Vec<Vec<Rational>>,
    pub inflow: Rational,
    pub horizon: Rational,
    pub prior: Belief,
}

impl Instance {
    pub fn new(
        capacities: Vec<Rational>,
        travel_times: Vec<Vec<Rational>>,
        inflow: Rational,
        horizon: Rational,
        prior: Vec<Rational>,
    ) -> Result<Self, ModelError> {
        if capacities.is_empty() {
            return Err(ModelError::Empty { what: "capacities" });
        }
        if prior.is_empty() {
            return Err(ModelError::Empty { what: "prior" });
        }
        let m = capacities.len();
        let d = prior.len();
        if travel_times.len() != m {
            return Err(ModelError::DimensionMismatch {
                what: format!("{} travel-time rows for {} links", travel_times.len(), m),
            });
        }
        for (i, row) in travel_times.iter().enumerate() {
            if row.len() != d {
                return Err(ModelError::DimensionMismatch {
                    what: format!(
                        "travel-time row {} has {} entries for {} scenarios",
                        i,
                        row.len(),
                        d
                    ),
                });
            }
            if row.iter().any(|t| t.is_negative()) {
                return Err(ModelError::NegativeTravelTime);
            }
        }
        if capacities.iter().any(|c| !c.is_positive()) {
            return Err(ModelError::NonPositive { what: "capacity" });
        }
        if !inflow.is_positive() {
            return Err(ModelError::NonPositive { what: "inflow" });
        }
        if !horizon.is_positive() {
            return Err(ModelError::NonPositive { what: "horizon" });
        }
        let prior = Belief::new(prior).map_err(|e| match e {
            ModelError::BeliefSum => ModelError::PriorSum,
            other => other,
        })?;
        Ok(Instance {
            capacities,
            travel_times,
            inflow,
            horizon,
            prior,
        })
    }

    /// Number of links.
    pub fn m(&self) -> usize {
        self.capacities.len()
    }

    /// Number of scenarios.
    pub fn d(&self) -> usize {
        self.prior.d()
    }

    pub fn min_travel_time(&self) -> Rational {
        self.travel_times
            .iter()
            .flatten()
            .min()
            .expect("instance has at least one link and scenario")
            .clone()
    }

    pub fn max_travel_time(&self) -> Rational {
        self.travel_times
            .iter()
            .flatten()
            .max()
            .expect("instance has at least one link and scenario")
            .clone()
    }
}

#[derive(Deserialize)]
struct RawInstance {
    capacities: Vec<String>,
    travel_times: Vec<Vec<String>>,
    inflow: String,
    horizon: String,
    prior: Vec<String>,
}

/// Parses the instance document format: a JSON object with fields
/// `capacities`, `travel_times` (row = link, column = scenario),
/// `inflow`, `horizon`, `prior`, all entries rational strings.
pub fn parse_instance(text: &str) -> Result<Instance, ModelError> {
    let raw: RawInstance =
        serde_json::from_str(text).map_err(|e| ModelError::Json(e.to_string()))?;
    let capacities = raw
        .capacities
        .iter()
        .map(|s| parse_rational(s))
        .collect::<Result<Vec<_>, _>>()?;
    let travel_times = raw
        .travel_times
        .iter()
        .map(|row| {
            row.iter()
                .map(|s| parse_rational(s))
                .collect::<Result<Vec<_>, _>>()
        })
        .collect::<Result<Vec<_>, _>>()?;
    let inflow = parse_rational(&raw.inflow)?;
    let horizon = parse_rational(&raw.horizon)?;
    let prior = raw
        .prior
        .iter()
        .map(|s| parse_rational(s))
        .collect::<Result<Vec<_>, _>>()?;
    Instance::new(capacities, travel_times, inflow, horizon, prior)
}

/// Expected travel times `(μᵀτ_i)_{i∈[m]}` under belief `μ`, exact.
pub fn expected_travel_times(inst: &Instance, mu: &Belief) -> Result<Vec<Rational>, ModelError> {
    if mu.d() != inst.d() {
        return Err(ModelError::DimensionMismatch {
            what: format!(
                "belief has {} coordinates for {} scenarios",
                mu.d(),
                inst.d()
            ),
        });
    }
    Ok(inst
        .travel_times
        .iter()
        .map(|row| row.iter().zip(mu.coords()).map(|(t, m)| t * m).sum())
        .collect())
}
