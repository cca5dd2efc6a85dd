//! Throughput and makespan of the canonical equilibrium, per scenario
//! and in expectation, as functions of the belief.
//!
//! The scenario throughput is evaluated by the closed formula
//!
//! `F_s(μ) = uT + T·[ν̄_s(K) − u]⁻ + ω_{σ(K),s}·[ν̄_s(K) − u]⁺
//!           − Σ_{i≤K} ν_{σ(i)} ω_{σ(i),s}`
//!
//! where σ sorts links by first exit time in scenario `s` (ties by
//! original index), ν̄_s are prefix capacity sums along σ, and `K` is the
//! number of links contributing before the horizon or the capacity cap.
//! The scenario makespan is the largest realized exit time over the
//! links in the equilibrium support at the horizon.

use crate::equilibrium::{first_exit_times, solve_for_belief, EquilibriumProfile, ExtRational};
use crate::model::{Belief, Instance, ModelError, Rational};
use num_traits::Zero;

/// Per-scenario throughput data: exit order σ_s, prefix capacity sums,
/// the contributing-link count K, and the scenario value F_s.
#[derive(Debug, Clone)]
pub struct ScenarioThroughput {
    pub exit_order: Vec<usize>,
    /// `cumulative[p]` = capacity of the first `p` links along `exit_order`.
    pub cumulative: Vec<Rational>,
    /// Number of links contributing to the throughput.
    pub contributing: usize,
    pub value: Rational,
}

#[derive(Debug, Clone)]
pub struct ThroughputBreakdown {
    pub per_scenario: Vec<ScenarioThroughput>,
    pub expected: Rational,
}

#[derive(Debug, Clone)]
pub struct MakespanBreakdown {
    pub per_scenario: Vec<Rational>,
    pub expected: Rational,
}

/// Sorts link ids by (first exit time, original index); infinite exit
/// times come last.
fn exit_order(omega: &[ExtRational]) -> Vec<usize> {
    let mut sigma: Vec<usize> = (0..omega.len()).collect();
    sigma.sort_by(|&a, &b| omega[a].cmp(&omega[b]).then(a.cmp(&b)));
    sigma
}

/// The closed throughput formula for a fixed exit order.
pub(crate) fn throughput_for_order(
    inst: &Instance,
    omega: &[ExtRational],
    sigma: &[usize],
) -> ScenarioThroughput {
    let m = inst.m();
    let horizon = &inst.horizon;
    let u = &inst.inflow;
    let mut cumulative = Vec::with_capacity(m + 1);
    cumulative.push(Rational::zero());
    for &i in sigma {
        let last = cumulative.last().unwrap().clone();
        cumulative.push(last + &inst.capacities[i]);
    }
    let within_horizon = (1..=m)
        .take_while(|&p| omega[sigma[p - 1]].le_rational(horizon))
        .count();
    let capacity_cap = (1..=m).find(|&p| &cumulative[p] >= u).unwrap_or(m + 1);
    let contributing = within_horizon.min(capacity_cap);

    let nu_bar = &cumulative[contributing];
    let omega_last = if contributing == 0 {
        Rational::zero()
    } else {
        omega[sigma[contributing - 1]]
            .as_finite()
            .expect("contributing exit times are finite")
            .clone()
    };
    let surplus = nu_bar - u;
    let mut value = u * horizon;
    if surplus < Rational::zero() {
        value += horizon * &surplus;
    } else {
        value += &omega_last * &surplus;
    }
    for p in 1..=contributing {
        let i = sigma[p - 1];
        value -= &inst.capacities[i] * omega[i].as_finite().expect("finite exit time");
    }
    ScenarioThroughput {
        exit_order: sigma.to_vec(),
        cumulative,
        contributing,
        value,
    }
}

/// Total outflow rate at time `θ` in scenario `s`: `min{ν̄_s(i), u}` on
/// the interval between the i-th and (i+1)-th sorted first exit times.
pub fn outflow(
    inst: &Instance,
    mu: &Belief,
    s: usize,
    theta: &Rational,
) -> Result<Rational, ModelError> {
    let omega_all = first_exit_times(inst, mu)?;
    let omega: Vec<ExtRational> = omega_all.iter().map(|row| row[s].clone()).collect();
    let sigma = exit_order(&omega);
    let mut cum = Rational::zero();
    for &i in &sigma {
        if omega[i].le_rational(theta) {
            cum += &inst.capacities[i];
        } else {
            break;
        }
    }
    Ok(cum.min(inst.inflow.clone()))
}

/// Exact scenario throughput `F_s(μ)`.
pub fn throughput_scenario(inst: &Instance, mu: &Belief, s: usize) -> Result<Rational, ModelError> {
    Ok(throughput_scenario_detail(inst, mu, s)?.value)
}

pub fn throughput_scenario_detail(
    inst: &Instance,
    mu: &Belief,
    s: usize,
) -> Result<ScenarioThroughput, ModelError> {
    let omega_all = first_exit_times(inst, mu)?;
    let omega: Vec<ExtRational> = omega_all.iter().map(|row| row[s].clone()).collect();
    let sigma = exit_order(&omega);
    Ok(throughput_for_order(inst, &omega, &sigma))
}

/// Expected throughput `F(μ) = Σ_s μ_s F_s(μ)`.
pub fn expected_throughput(inst: &Instance, mu: &Belief) -> Result<Rational, ModelError> {
    Ok(throughput_breakdown(inst, mu)?.expected)
}

pub fn throughput_breakdown(
    inst: &Instance,
    mu: &Belief,
) -> Result<ThroughputBreakdown, ModelError> {
    let mut per_scenario = Vec::with_capacity(inst.d());
    let mut expected = Rational::zero();
    for s in 0..inst.d() {
        let detail = throughput_scenario_detail(inst, mu, s)?;
        expected += mu.get(s) * &detail.value;
        per_scenario.push(detail);
    }
    Ok(ThroughputBreakdown {
        per_scenario,
        expected,
    })
}

/// Scenario makespan: the largest realized exit time at the horizon over
/// the links in the equilibrium support at the horizon.
pub fn makespan_scenario(inst: &Instance, mu: &Belief, s: usize) -> Result<Rational, ModelError> {
    let profile = solve_for_belief(inst, mu)?;
    let realized: Vec<Rational> = inst.travel_times.iter().map(|row| row[s].clone()).collect();
    Ok(makespan_of_profile(&profile, &inst.horizon, &realized))
}

fn makespan_of_profile(
    profile: &EquilibriumProfile,
    horizon: &Rational,
    realized_tt: &[Rational],
) -> Rational {
    profile
        .support(horizon)
        .into_iter()
        .map(|i| profile.exit_time(i, horizon, realized_tt))
        .max()
        .expect("support at the horizon is never empty")
}

/// Expected makespan `M(μ) = Σ_s μ_s M_{T,s}(μ)`.
pub fn expected_makespan(inst: &Instance, mu: &Belief) -> Result<Rational, ModelError> {
    Ok(makespan_breakdown(inst, mu)?.expected)
}

pub fn makespan_breakdown(inst: &Instance, mu: &Belief) -> Result<MakespanBreakdown, ModelError> {
    let mut per_scenario = Vec::with_capacity(inst.d());
    let mut expected = Rational::zero();
    for s in 0..inst.d() {
        let m_s = makespan_scenario(inst, mu, s)?;
        expected += mu.get(s) * &m_s;
        per_scenario.push(m_s);
    }
    Ok(MakespanBreakdown {
        per_scenario,
        expected,
    })
}

/// Makespan of the equilibrium particles play when they perceive travel
/// times `τ′` while the true times are `τ`. Ties among equal perceived
/// times are broken by the true travel time, then by link index, so the
/// canonical flow uses the link with the smallest true time whenever
/// particles are indifferent.
pub fn makespan_with_perceived(
    capacities: &[Rational],
    true_tt: &[Rational],
    inflow: &Rational,
    horizon: &Rational,
    perceived_tt: &[Rational],
) -> Rational {
    assert_eq!(capacities.len(), true_tt.len());
    assert_eq!(capacities.len(), perceived_tt.len());
    let mut order: Vec<usize> = (0..capacities.len()).collect();
    order.sort_by(|&a, &b| {
        perceived_tt[a]
            .cmp(&perceived_tt[b])
            .then(true_tt[a].cmp(&true_tt[b]))
            .then(a.cmp(&b))
    });
    let profile = EquilibriumProfile::with_order(capacities, perceived_tt, inflow, order);
    makespan_of_profile(&profile, horizon, true_tt)
}
