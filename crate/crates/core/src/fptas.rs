//! Multiplicative approximation scheme for throughput signaling: build a
//! non-uniform net on the simplex, round beliefs onto a power grid to get
//! a piecewise convex under-estimator of the expected throughput, and
//! solve an exact linear program over the net's 0-cells. The returned
//! convex decomposition of the prior achieves `ALG ≥ (1 − ε*)·OPT`.

use crate::arrangement::{self, ArrangementError, Hyperplane, HyperplaneLabel};
use crate::model::{Belief, Instance, ModelError, Rational};
use crate::objectives::{expected_throughput, throughput_scenario};
use crate::simplex::{maximize, LpOutcome, StandardLp};
use num_traits::{One, Signed, Zero};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum FptasError {
    #[error("epsilon must lie strictly between 0 and 1")]
    InvalidEpsilon,
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Arrangement(#[from] ArrangementError),
    #[error("signal weights must sum to 1")]
    WeightSum,
    #[error("signal weights must be non-negative")]
    NegativeWeight,
    #[error("scheme does not decompose the prior")]
    PriorMismatch,
    #[error("scheme dimensions do not match the instance")]
    Dimensions,
}

/// A public signaling scheme as a convex decomposition of the prior:
/// weights `α_ξ` and induced beliefs `μ^ξ` with `Σ α_ξ μ^ξ = λ*`.
#[derive(Debug, Clone, PartialEq)]
pub struct SignalingScheme {
    signals: Vec<(Rational, Belief)>,
}

impl SignalingScheme {
    pub fn new(signals: Vec<(Rational, Belief)>, prior: &Belief) -> Result<Self, FptasError> {
        let scheme = SignalingScheme { signals };
        scheme.verify(prior)?;
        Ok(scheme)
    }

    /// The uninformative scheme issuing one signal.
    pub fn trivial(prior: &Belief) -> Self {
        SignalingScheme {
            signals: vec![(Rational::one(), prior.clone())],
        }
    }

    /// Full information revelation: signal the realized scenario.
    /// Scenarios with zero prior mass are never realized and are dropped.
    pub fn full_information(prior: &Belief) -> Self {
        let d = prior.d();
        let signals = (0..d)
            .filter(|&s| prior.get(s).is_positive())
            .map(|s| (prior.get(s).clone(), Belief::unit(s, d)))
            .collect();
        SignalingScheme { signals }
    }

    pub fn signals(&self) -> &[(Rational, Belief)] {
        &self.signals
    }

    /// `φ[s][ξ] = α_ξ · μ^ξ_s`, the joint scenario/signal probabilities.
    pub fn phi(&self) -> Vec<Vec<Rational>> {
        let d = self.signals.first().map_or(0, |(_, mu)| mu.d());
        (0..d)
            .map(|s| self.signals.iter().map(|(a, mu)| a * mu.get(s)).collect())
            .collect()
    }

    /// Checks the convex-decomposition invariants exactly: weights are
    /// non-negative, sum to one, and average to the prior (equivalently,
    /// the rows of φ sum to the prior coordinates).
    pub fn verify(&self, prior: &Belief) -> Result<(), FptasError> {
        if self.signals.iter().any(|(_, mu)| mu.d() != prior.d()) {
            return Err(FptasError::Dimensions);
        }
        if self.signals.iter().any(|(a, _)| a.is_negative()) {
            return Err(FptasError::NegativeWeight);
        }
        let total: Rational = self.signals.iter().map(|(a, _)| a.clone()).sum();
        if !total.is_one() {
            return Err(FptasError::WeightSum);
        }
        for s in 0..prior.d() {
            let mixed: Rational = self.signals.iter().map(|(a, mu)| a * mu.get(s)).sum();
            if &mixed != prior.get(s) {
                return Err(FptasError::PriorMismatch);
            }
        }
        Ok(())
    }

    /// Expected value of a per-belief objective under the scheme.
    pub fn expected_value<F>(&self, mut objective: F) -> Result<Rational, ModelError>
    where
        F: FnMut(&Belief) -> Result<Rational, ModelError>,
    {
        let mut acc = Rational::zero();
        for (a, mu) in &self.signals {
            if a.is_zero() {
                continue;
            }
            acc += a * objective(mu)?;
        }
        Ok(acc)
    }
}

/// Net parameters: grid exponent κ, the net points (0-cells of the
/// travel-time ties together with the power grid), and the rounded
/// under-estimator values at the net points.
#[derive(Debug, Clone)]
pub struct NetParameters {
    pub eps: Rational,
    pub delta: Rational,
    pub kappa: u64,
    pub points: Vec<Belief>,
    pub values: Vec<Rational>,
}

/// Positive optimal throughput is equivalent to the horizon exceeding
/// the smallest travel time.
pub fn opt_is_positive(inst: &Instance) -> bool {
    inst.horizon > inst.min_travel_time()
}

/// The certified lower bound on OPT used to size the grid: full
/// information sends everything along the globally fastest link in its
/// scenario, so `λ*_{s*}(T − τ_{i*,s*})·min{ν_{i*}, u}` with `(i*, s*)`
/// the smallest travel time is achievable. If the prior puts no mass on
/// `s*` this degenerates to zero while OPT may still be positive; the
/// same argument applied to the best prior-weighted link pair rescues a
/// positive bound in that case.
fn opt_lower_bound(inst: &Instance) -> Rational {
    let (mut bi, mut bs) = (0, 0);
    for i in 0..inst.m() {
        for s in 0..inst.d() {
            if inst.travel_times[i][s] < inst.travel_times[bi][bs] {
                (bi, bs) = (i, s);
            }
        }
    }
    let cap = |i: usize| inst.capacities[i].clone().min(inst.inflow.clone());
    let primary = inst.prior.get(bs) * (&inst.horizon - &inst.travel_times[bi][bs]) * cap(bi);
    if primary.is_positive() {
        return primary;
    }
    let mut best = Rational::zero();
    for i in 0..inst.m() {
        for s in 0..inst.d() {
            let slack = &inst.horizon - &inst.travel_times[i][s];
            if slack.is_positive() {
                let candidate = inst.prior.get(s) * slack * cap(i);
                if candidate > best {
                    best = candidate;
                }
            }
        }
    }
    best
}

/// Smallest κ ≥ 1 with `(1−ε)^κ · d·T·u ≤ δ·LB`, found by exact rational
/// iteration. Returns `None` when OPT = 0 (the trivial scheme is then
/// optimal and no grid is needed).
pub fn compute_kappa(inst: &Instance, eps: &Rational, delta: &Rational) -> Option<u64> {
    assert!(eps > &Rational::zero() && eps < &Rational::one());
    assert!(delta > &Rational::zero() && delta < &Rational::one());
    if !opt_is_positive(inst) {
        return None;
    }
    let bound = opt_lower_bound(inst);
    if !bound.is_positive() {
        return None;
    }
    let target = delta * bound;
    let base = Rational::one() - eps;
    let scale = Rational::from_integer(inst.d().into()) * &inst.horizon * &inst.inflow;
    let mut kappa = 1u64;
    let mut power = base.clone();
    while &power * &scale > target {
        kappa += 1;
        power *= &base;
    }
    Some(kappa)
}

/// The descending power grid `(1−ε)^0, …, (1−ε)^{κ−1}`.
fn grid_powers(eps: &Rational, kappa: u64) -> Vec<Rational> {
    let base = Rational::one() - eps;
    let mut powers = Vec::with_capacity(kappa as usize);
    let mut power = Rational::one();
    for _ in 0..kappa {
        powers.push(power.clone());
        power *= &base;
    }
    powers
}

fn h_round_grid(powers: &[Rational], x: &Rational) -> Rational {
    debug_assert!(!x.is_negative() && x <= &Rational::one());
    // first grid power ≤ x, if any
    let idx = powers.partition_point(|p| p > x);
    powers.get(idx).cloned().unwrap_or_else(Rational::zero)
}

/// Rounds `x ∈ [0, 1]` down to the power grid `{(1−ε)^{k−1} : k ∈ [κ]}`,
/// or to 0 below the grid floor.
pub fn h_round(x: &Rational, eps: &Rational, kappa: u64) -> Rational {
    assert!(!x.is_negative() && x <= &Rational::one());
    h_round_grid(&grid_powers(eps, kappa), x)
}

/// The under-estimator `F_{ε,κ}(μ) = Σ_s h_{ε,κ}(μ_s) · F_s(μ)`.
pub fn under_estimator(
    inst: &Instance,
    mu: &Belief,
    eps: &Rational,
    kappa: u64,
) -> Result<Rational, ModelError> {
    under_estimator_grid(inst, mu, &grid_powers(eps, kappa))
}

fn under_estimator_grid(
    inst: &Instance,
    mu: &Belief,
    powers: &[Rational],
) -> Result<Rational, ModelError> {
    let mut acc = Rational::zero();
    for s in 0..inst.d() {
        let h = h_round_grid(powers, mu.get(s));
        if !h.is_zero() {
            acc += h * throughput_scenario(inst, mu, s)?;
        }
    }
    Ok(acc)
}

/// The hyperplane list of the net arrangement: travel-time ties plus the
/// per-scenario power grid levels and zero levels.
pub fn net_hyperplanes(inst: &Instance, eps: &Rational, kappa: u64) -> Vec<Hyperplane> {
    let d = inst.d();
    let mut hps = arrangement::build_travel_time_ties(inst);
    let base = Rational::one() - eps;
    for s in 0..d {
        let mut unit = vec![Rational::zero(); d];
        unit[s] = Rational::one();
        hps.push(Hyperplane {
            normal: unit.clone(),
            offset: Rational::zero(),
            label: HyperplaneLabel::NetZero { s },
        });
        let mut level = Rational::one();
        for j in 1..=kappa {
            hps.push(Hyperplane {
                normal: unit.clone(),
                offset: level.clone(),
                label: HyperplaneLabel::NetGrid { s, level: j },
            });
            level *= &base;
        }
    }
    hps
}

/// The non-uniform net: all 0-cells of the net arrangement on Δ, with
/// the under-estimator evaluated at each point.
pub fn build_net(inst: &Instance, eps: &Rational, kappa: u64) -> Result<NetParameters, FptasError> {
    let hps = net_hyperplanes(inst, eps, kappa);
    let mut points = arrangement::enumerate_vertices(&hps, inst.d())?;
    points.sort();
    points.dedup();
    let points: Vec<Belief> = points
        .into_iter()
        .map(|coords| Belief::new(coords).expect("net points lie on the simplex"))
        .collect();
    let powers = grid_powers(eps, kappa);
    let values = points
        .iter()
        .map(|mu| under_estimator_grid(inst, mu, &powers))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(NetParameters {
        eps: eps.clone(),
        delta: Rational::zero(),
        kappa,
        points,
        values,
    })
}

#[derive(Debug, Clone)]
pub struct FptasResult {
    pub scheme: SignalingScheme,
    /// True expected throughput of the scheme (not the under-estimator
    /// objective, which only certifies the bound).
    pub alg: Rational,
    /// Set when OPT = 0 and the trivial scheme was returned directly.
    pub zero_optimum: bool,
    pub kappa: u64,
    pub net_size: usize,
}

/// Computes a signaling scheme with `ALG ≥ (1 − ε*)·OPT` by solving the
/// exact LP `max Σ α_j F_{ε,κ}(μ̃^j)` over the net points subject to
/// `Σ α_j μ̃^j = λ*`, with `ε = δ = ε*/2`.
pub fn solve_fptas(inst: &Instance, eps_star: &Rational) -> Result<FptasResult, FptasError> {
    if !(eps_star > &Rational::zero() && eps_star < &Rational::one()) {
        return Err(FptasError::InvalidEpsilon);
    }
    let half = eps_star / Rational::from_integer(2.into());
    let Some(kappa) = compute_kappa(inst, &half, &half) else {
        let scheme = SignalingScheme::trivial(&inst.prior);
        let alg = expected_throughput(inst, &inst.prior)?;
        return Ok(FptasResult {
            scheme,
            alg,
            zero_optimum: true,
            kappa: 0,
            net_size: 0,
        });
    };
    let mut net = build_net(inst, &half, kappa)?;
    net.delta = half.clone();

    let d = inst.d();
    let ell = net.points.len();
    // d prior rows plus the (implied) total-weight row
    let mut rows: Vec<Vec<Rational>> = Vec::with_capacity(d + 1);
    let mut rhs: Vec<Rational> = Vec::with_capacity(d + 1);
    for s in 0..d {
        rows.push(net.points.iter().map(|mu| mu.get(s).clone()).collect());
        rhs.push(inst.prior.get(s).clone());
    }
    rows.push(vec![Rational::one(); ell]);
    rhs.push(Rational::one());
    let lp = StandardLp {
        objective: net.values.clone(),
        rows,
        rhs,
    };
    let LpOutcome::Optimal { x, objective } = maximize(&lp) else {
        unreachable!("the prior is a convex combination of net points");
    };

    let mut signals = Vec::new();
    let mut alg = Rational::zero();
    for (alpha, mu) in x.iter().zip(&net.points) {
        if alpha.is_positive() {
            alg += alpha * expected_throughput(inst, mu)?;
            signals.push((alpha.clone(), mu.clone()));
        }
    }
    let scheme = SignalingScheme::new(signals, &inst.prior)?;
    debug_assert!(
        alg >= objective,
        "true value dominates the under-estimator objective"
    );
    Ok(FptasResult {
        scheme,
        alg,
        zero_optimum: false,
        kappa,
        net_size: ell,
    })
}
