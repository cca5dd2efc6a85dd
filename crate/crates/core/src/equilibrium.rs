//! Closed-form dynamic equilibrium for deterministic and belief-induced
//! travel times: entry times, piecewise-constant inflows, queue lengths
//! and exit times.
//!
//! Links are ordered non-decreasingly by effective travel time (ties by
//! original index). Entry times follow the recursion
//! `θ*_{p+1} = θ*_p + ν̄(p)/(u − ν̄(p)) · (τ_{p+1} − τ_p)` while the
//! cumulative capacity `ν̄(p)` stays below the inflow rate `u`, and are
//! infinite afterwards. Queue lengths are the closed forms obtained by
//! integrating the queue dynamics against these inflows.

use crate::model::{expected_travel_times, Belief, Instance, ModelError, Rational};
use num_traits::Zero;
use std::cmp::Ordering;

/// A rational extended with a positive infinity, used for entry times
/// and first exit times which Eq-style recursions genuinely drive to ∞.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ExtRational {
    Finite(Rational),
    Infinite,
}

impl ExtRational {
    pub fn is_finite(&self) -> bool {
        matches!(self, ExtRational::Finite(_))
    }

    pub fn as_finite(&self) -> Option<&Rational> {
        match self {
            ExtRational::Finite(r) => Some(r),
            ExtRational::Infinite => None,
        }
    }

    pub fn le_rational(&self, r: &Rational) -> bool {
        match self {
            ExtRational::Finite(v) => v <= r,
            ExtRational::Infinite => false,
        }
    }
}

impl PartialOrd for ExtRational {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for ExtRational {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (ExtRational::Finite(a), ExtRational::Finite(b)) => a.cmp(b),
            (ExtRational::Finite(_), ExtRational::Infinite) => Ordering::Less,
            (ExtRational::Infinite, ExtRational::Finite(_)) => Ordering::Greater,
            (ExtRational::Infinite, ExtRational::Infinite) => Ordering::Equal,
        }
    }
}

impl std::fmt::Display for ExtRational {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ExtRational::Finite(r) => write!(f, "{}", crate::model::format_rational(r)),
            ExtRational::Infinite => write!(f, "inf"),
        }
    }
}

/// One affine stretch of a queue-length function.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QueueSegment {
    pub start: Rational,
    pub slope: Rational,
    pub intercept: Rational,
}

/// Closed-form queue of one link: affine growth segments per entry
/// interval, then a constant plateau once the marginal link enters. The
/// queue is zero before the first segment.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QueueCoefficients {
    pub segments: Vec<QueueSegment>,
    /// `(start, value)`: constant queue from `start` on, when a marginal
    /// link exists.
    pub plateau: Option<(Rational, Rational)>,
}

/// The canonical dynamic equilibrium for a fixed vector of effective
/// travel times.
#[derive(Debug, Clone)]
pub struct EquilibriumProfile {
    /// Link ids ordered non-decreasingly by effective travel time,
    /// ties broken by the order in which they were passed in.
    pub order: Vec<usize>,
    /// Position of each link in `order`.
    pub position: Vec<usize>,
    /// Entry times θ*, indexed by position in `order`.
    pub breakpoints: Vec<ExtRational>,
    /// Number of order positions whose cumulative capacity stays
    /// strictly below the inflow rate. Positions `0..k` queue up,
    /// position `k` (if any) is the marginal link absorbing the rest.
    pub k: usize,
    /// Effective travel times, indexed by link id.
    pub effective_tt: Vec<Rational>,
    /// Capacities, indexed by link id.
    pub capacities: Vec<Rational>,
    /// Inflow rate u.
    pub inflow_rate: Rational,
    /// `cum[p]` = sum of the first `p` capacities along `order`.
    cum: Vec<Rational>,
}

impl EquilibriumProfile {
    /// Builds the equilibrium for a caller-supplied link order. The
    /// effective travel times must be non-decreasing along `order`.
    pub fn with_order(
        capacities: &[Rational],
        effective_tt: &[Rational],
        inflow: &Rational,
        order: Vec<usize>,
    ) -> Self {
        let m = capacities.len();
        assert_eq!(effective_tt.len(), m);
        assert_eq!(order.len(), m);
        assert!(capacities.iter().all(|c| c > &Rational::zero()));
        assert!(effective_tt.iter().all(|t| t >= &Rational::zero()));
        assert!(inflow > &Rational::zero());
        for w in order.windows(2) {
            assert!(
                effective_tt[w[0]] <= effective_tt[w[1]],
                "order not sorted by travel time"
            );
        }

        let mut position = vec![0usize; m];
        for (p, &i) in order.iter().enumerate() {
            position[i] = p;
        }
        let mut cum = Vec::with_capacity(m + 1);
        cum.push(Rational::zero());
        for &i in &order {
            let last = cum.last().unwrap().clone();
            cum.push(last + &capacities[i]);
        }
        let k = (0..=m).rev().find(|&p| cum[p] < *inflow).unwrap();

        let mut breakpoints = Vec::with_capacity(m);
        breakpoints.push(ExtRational::Finite(Rational::zero()));
        for p in 1..m {
            let prev = match &breakpoints[p - 1] {
                ExtRational::Finite(v) => v.clone(),
                ExtRational::Infinite => {
                    breakpoints.push(ExtRational::Infinite);
                    continue;
                }
            };
            if cum[p] < *inflow {
                let gap = &effective_tt[order[p]] - &effective_tt[order[p - 1]];
                let step = &cum[p] / (inflow - &cum[p]) * gap;
                breakpoints.push(ExtRational::Finite(prev + step));
            } else {
                breakpoints.push(ExtRational::Infinite);
            }
        }

        EquilibriumProfile {
            order,
            position,
            breakpoints,
            k,
            effective_tt: effective_tt.to_vec(),
            capacities: capacities.to_vec(),
            inflow_rate: inflow.clone(),
            cum,
        }
    }

    /// Number of links.
    pub fn m(&self) -> usize {
        self.order.len()
    }

    /// Entry time of link `i` (by link id).
    pub fn entry_time(&self, i: usize) -> &ExtRational {
        &self.breakpoints[self.position[i]]
    }

    /// Entry time of the marginal link θ*_{k+1}, if a marginal link exists.
    fn marginal_entry(&self) -> Option<&Rational> {
        if self.k < self.m() {
            match &self.breakpoints[self.k] {
                ExtRational::Finite(v) => Some(v),
                ExtRational::Infinite => unreachable!("marginal entry time is finite"),
            }
        } else {
            None
        }
    }

    /// Number of links with entry time ≤ θ.
    fn links_entered(&self, theta: &Rational) -> usize {
        self.breakpoints
            .iter()
            .take_while(|b| b.le_rational(theta))
            .count()
    }

    /// Equilibrium inflow rate into link `i` at time `θ ≥ 0`.
    pub fn inflow(&self, i: usize, theta: &Rational) -> Rational {
        assert!(theta >= &Rational::zero());
        let pos = self.position[i];
        match pos.cmp(&self.k) {
            Ordering::Greater => Rational::zero(),
            Ordering::Equal => {
                // marginal link: picks up the residual once it enters
                let entry = self.marginal_entry().expect("pos == k implies k < m");
                if theta >= entry {
                    &self.inflow_rate - &self.cum[self.k]
                } else {
                    Rational::zero()
                }
            }
            Ordering::Less => {
                match &self.breakpoints[pos] {
                    ExtRational::Finite(t) if theta >= t => {}
                    _ => return Rational::zero(),
                }
                if let Some(entry) = self.marginal_entry() {
                    if theta >= entry {
                        return self.capacities[i].clone();
                    }
                }
                let entered = self.links_entered(theta);
                &self.inflow_rate * &self.capacities[i] / &self.cum[entered]
            }
        }
    }

    /// Exact queue length `z_i(θ)` of link `i` at time `θ ≥ 0`.
    pub fn queue_length(&self, i: usize, theta: &Rational) -> Rational {
        assert!(theta >= &Rational::zero());
        let pos = self.position[i];
        if pos >= self.k {
            return Rational::zero();
        }
        let own_entry = match &self.breakpoints[pos] {
            ExtRational::Finite(t) => t,
            ExtRational::Infinite => unreachable!("pos < k implies finite entry"),
        };
        if theta < own_entry {
            return Rational::zero();
        }
        if let Some(entry) = self.marginal_entry() {
            if theta >= entry {
                // plateau: inflow equals capacity from θ*_{k+1} on
                let last = self.order[self.k];
                return &self.capacities[i] * (&self.effective_tt[last] - &self.effective_tt[i]);
            }
        }
        let entered = self.links_entered(theta);
        let last = self.order[entered - 1];
        let last_entry = self.breakpoints[entered - 1]
            .as_finite()
            .expect("entered breakpoints are finite");
        let rate = (&self.inflow_rate - &self.cum[entered]) / &self.cum[entered];
        &self.capacities[i]
            * (&self.effective_tt[last] - &self.effective_tt[i] + rate * (theta - last_entry))
    }

    /// Exit time of a particle entering link `i` at time `θ`, measured
    /// with the given realized travel times (which may differ from the
    /// effective ones the equilibrium was built from).
    pub fn exit_time(&self, i: usize, theta: &Rational, realized_tt: &[Rational]) -> Rational {
        theta + self.queue_length(i, theta) / &self.capacities[i] + &realized_tt[i]
    }

    /// The queue of link `i` as explicit affine segments: on each entry
    /// interval the queue is `slope·θ + intercept`, and from the marginal
    /// entry time on it sits at the plateau value.
    pub fn queue_coefficients(&self, i: usize) -> QueueCoefficients {
        let pos = self.position[i];
        let mut segments = Vec::new();
        let mut plateau = None;
        if pos < self.k {
            let end = if self.k < self.m() {
                Some(self.marginal_entry().expect("marginal link exists").clone())
            } else {
                None
            };
            // one affine segment per entry interval the link lives through
            for p in pos..self.k {
                let start = self.breakpoints[p]
                    .as_finite()
                    .expect("entered link")
                    .clone();
                if end.as_ref().is_some_and(|e| &start >= e) {
                    break;
                }
                let entered = p + 1;
                let rate = (&self.inflow_rate - &self.cum[entered]) / &self.cum[entered]
                    * &self.capacities[i];
                // z(start) from the closed form fixes the intercept
                let z_start = self.queue_length(i, &start);
                let intercept = z_start - &rate * &start;
                segments.push(QueueSegment {
                    start,
                    slope: rate,
                    intercept,
                });
            }
            if let Some(end) = end {
                let last = self.order[self.k];
                let value =
                    &self.capacities[i] * (&self.effective_tt[last] - &self.effective_tt[i]);
                plateau = Some((end, value));
            }
        }
        QueueCoefficients { segments, plateau }
    }

    /// Links with positive inflow at time θ.
    pub fn support(&self, theta: &Rational) -> Vec<usize> {
        (0..self.m())
            .filter(|&i| self.inflow(i, theta) > Rational::zero())
            .collect()
    }
}

/// The canonical equilibrium of a deterministic-travel-time system,
/// with ties among equal travel times broken by original link index.
pub fn solve_deterministic(
    capacities: &[Rational],
    travel_times: &[Rational],
    inflow: &Rational,
) -> EquilibriumProfile {
    let mut order: Vec<usize> = (0..capacities.len()).collect();
    order.sort_by(|&a, &b| travel_times[a].cmp(&travel_times[b]).then(a.cmp(&b)));
    EquilibriumProfile::with_order(capacities, travel_times, inflow, order)
}

/// The Bayesian dynamic equilibrium for belief `μ`: the deterministic
/// equilibrium of the expected travel times `μᵀτ_i`.
pub fn solve_for_belief(inst: &Instance, mu: &Belief) -> Result<EquilibriumProfile, ModelError> {
    let tt = expected_travel_times(inst, mu)?;
    Ok(solve_deterministic(&inst.capacities, &tt, &inst.inflow))
}

/// First exit times `ω_{i,s}(μ) = θ*_i(μ) + τ_{i,s}` for all links and
/// scenarios; infinite where the entry time is infinite.
pub fn first_exit_times(inst: &Instance, mu: &Belief) -> Result<Vec<Vec<ExtRational>>, ModelError> {
    let profile = solve_for_belief(inst, mu)?;
    Ok((0..inst.m())
        .map(|i| {
            (0..inst.d())
                .map(|s| match profile.entry_time(i) {
                    ExtRational::Finite(t) => ExtRational::Finite(t + &inst.travel_times[i][s]),
                    ExtRational::Infinite => ExtRational::Infinite,
                })
                .collect()
        })
        .collect())
}

/// Linear coefficients of the entry times as functions of the belief:
/// within a region where `order` is the travel-time order, `θ*_i(μ) =
/// q_iᵀμ`. Returns one coefficient vector per link id, `None` where the
/// entry time is identically infinite.
pub fn entry_time_coefficients(inst: &Instance, order: &[usize]) -> Vec<Option<Vec<Rational>>> {
    let m = inst.m();
    let d = inst.d();
    assert_eq!(order.len(), m);
    let mut coeffs: Vec<Option<Vec<Rational>>> = vec![None; m];
    coeffs[order[0]] = Some(vec![Rational::zero(); d]);
    let mut cum = inst.capacities[order[0]].clone();
    for p in 1..m {
        if cum >= inst.inflow {
            break;
        }
        let factor = &cum / (&inst.inflow - &cum);
        let prev = coeffs[order[p - 1]]
            .clone()
            .expect("previous entry is finite");
        let q: Vec<Rational> = (0..d)
            .map(|s| {
                &prev[s]
                    + &factor
                        * (&inst.travel_times[order[p]][s] - &inst.travel_times[order[p - 1]][s])
            })
            .collect();
        coeffs[order[p]] = Some(q);
        cum += &inst.capacities[order[p]];
    }
    coeffs
}
