//! Shared fixtures and independent oracles for the integration suites.
//!
//! The forward Euler integrator here checks the closed-form queue
//! lengths against the raw queue dynamics; it deliberately knows nothing
//! about the closed forms beyond the equilibrium inflows it integrates.

use num_traits::ToPrimitive;
use qsig::equilibrium::EquilibriumProfile;
use qsig::model::{format_rational, parse_instance, ratio, Instance, Rational};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub fn a1() -> Instance {
    parse_instance(include_str!("../data/a1.json")).expect("a1 fixture parses")
}

pub fn a2() -> Instance {
    parse_instance(include_str!("../data/a2.json")).expect("a2 fixture parses")
}

pub fn a3() -> Instance {
    parse_instance(include_str!("../data/a3.json")).expect("a3 fixture parses")
}

pub fn to_f64(r: &Rational) -> f64 {
    r.to_f64().expect("fits in f64")
}

/// Renders an instance back into the document format.
pub fn instance_to_json(inst: &Instance) -> String {
    let quote_list = |v: &[Rational]| -> String {
        v.iter()
            .map(|r| format!("{:?}", format_rational(r)))
            .collect::<Vec<_>>()
            .join(", ")
    };
    let rows: Vec<String> = inst
        .travel_times
        .iter()
        .map(|row| format!("[{}]", quote_list(row)))
        .collect();
    format!(
        "{{\"capacities\": [{}], \"travel_times\": [{}], \"inflow\": {:?}, \"horizon\": {:?}, \"prior\": [{}]}}",
        quote_list(&inst.capacities),
        rows.join(", "),
        format_rational(&inst.inflow),
        format_rational(&inst.horizon),
        quote_list(inst.prior.coords())
    )
}

/// Random desk-scale instance with the requested shape.
pub fn random_instance(rng: &mut ChaCha8Rng, m: usize, d: usize) -> Instance {
    let caps: Vec<Rational> = (0..m)
        .map(|_| ratio(rng.gen_range(1i64..5), rng.gen_range(1i64..4)))
        .collect();
    let tts: Vec<Vec<Rational>> = (0..m)
        .map(|_| {
            (0..d)
                .map(|_| ratio(rng.gen_range(0i64..8), rng.gen_range(1i64..3)))
                .collect()
        })
        .collect();
    let u = ratio(rng.gen_range(1i64..5), rng.gen_range(1i64..3));
    let horizon = ratio(rng.gen_range(1i64..16), rng.gen_range(1i64..3));
    let weights: Vec<i64> = (0..d).map(|_| rng.gen_range(1i64..10)).collect();
    let total: i64 = weights.iter().sum();
    let prior = weights.into_iter().map(|w| ratio(w, total)).collect();
    Instance::new(caps, tts, u, horizon, prior).expect("random instance is valid")
}

/// Forward Euler integration of the queue dynamics
/// `z' = f − ν` when `z > 0`, `z' = max(f − ν, 0)` when `z = 0`,
/// fed with the closed-form equilibrium inflows. Returns the queue
/// lengths of every link at time `t`.
pub fn euler_queues(profile: &EquilibriumProfile, t: f64, step: f64) -> Vec<f64> {
    let m = profile.m();
    let caps: Vec<f64> = profile.capacities.iter().map(to_f64).collect();
    // the inflows are piecewise constant between entry times; sample the
    // exact rates once per segment
    let mut switches: Vec<Rational> = profile
        .breakpoints
        .iter()
        .filter_map(|b| b.as_finite().cloned())
        .collect();
    switches.sort();
    switches.dedup();
    let mut segment_starts: Vec<f64> = Vec::new();
    let mut segment_rates: Vec<Vec<f64>> = Vec::new();
    for (idx, start) in switches.iter().enumerate() {
        let probe = match switches.get(idx + 1) {
            Some(next) => (start + next) / qsig::model::rat(2),
            None => start + qsig::model::rat(1),
        };
        segment_starts.push(to_f64(start));
        segment_rates.push((0..m).map(|i| to_f64(&profile.inflow(i, &probe))).collect());
    }
    let mut z = vec![0.0f64; m];
    let mut theta = 0.0f64;
    let mut seg = 0usize;
    while theta < t {
        let h = step.min(t - theta);
        let probe = theta + 0.5 * h;
        while seg + 1 < segment_starts.len() && segment_starts[seg + 1] <= probe {
            seg += 1;
        }
        let rates = &segment_rates[seg];
        for i in 0..m {
            let drift = rates[i] - caps[i];
            z[i] = if z[i] > 0.0 {
                (z[i] + h * drift).max(0.0)
            } else {
                z[i] + h * drift.max(0.0)
            };
        }
        theta += h;
    }
    z
}
