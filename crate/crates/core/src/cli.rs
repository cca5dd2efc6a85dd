//! Command implementations behind the `qsig` binary: instance
//! evaluation, belief sweeps (CSV/SVG), the two approximation schemes,
//! scheme verification, and the full-information makespan property
//! check. All reports are deterministic for fixed inputs; exact
//! rationals are printed alongside 12-significant-digit decimals.

use crate::dualptas::solve_additive_ptas;
use crate::fptas::{solve_fptas, SignalingScheme};
use crate::model::{
    format_decimal, format_rational, parse_instance, parse_rational, Belief, Instance, Rational,
};
use crate::objectives::{
    expected_makespan, makespan_breakdown, makespan_scenario, throughput_breakdown,
};
use crate::oracle::{extract_piecewise_1d, makespan_piecewise_1d, PiecewiseQuadratic1D};
use num_traits::{One, Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::fmt::Write as _;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Input(String),
    #[error("{0}")]
    Property(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Input(_) => 1,
            CliError::Property(_) => 2,
        }
    }

    fn input<E: std::fmt::Display>(e: E) -> CliError {
        CliError::Input(e.to_string())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Objective {
    Throughput,
    Makespan,
}

impl std::str::FromStr for Objective {
    type Err = CliError;
    fn from_str(s: &str) -> Result<Self, CliError> {
        match s {
            "throughput" => Ok(Objective::Throughput),
            "makespan" => Ok(Objective::Makespan),
            other => Err(CliError::Input(format!("unknown objective {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EmitFormat {
    Csv,
    Svg,
}

impl std::str::FromStr for EmitFormat {
    type Err = CliError;
    fn from_str(s: &str) -> Result<Self, CliError> {
        match s {
            "csv" => Ok(EmitFormat::Csv),
            "svg" => Ok(EmitFormat::Svg),
            other => Err(CliError::Input(format!("unknown emit format {other:?}"))),
        }
    }
}

pub fn load_instance(text: &str) -> Result<Instance, CliError> {
    parse_instance(text).map_err(CliError::input)
}

pub fn parse_belief(s: &str, d: usize) -> Result<Belief, CliError> {
    let coords = s
        .split(',')
        .map(|p| parse_rational(p.trim()).map_err(CliError::input))
        .collect::<Result<Vec<_>, _>>()?;
    if coords.len() != d {
        return Err(CliError::Input(format!(
            "belief has {} coordinates, instance has {} scenarios",
            coords.len(),
            d
        )));
    }
    Belief::new(coords).map_err(CliError::input)
}

/// Short content hash of the instance, used to tie outputs to inputs.
pub fn instance_hash(inst: &Instance) -> String {
    let mut canon = String::new();
    let _ = write!(canon, "nu=");
    for c in &inst.capacities {
        let _ = write!(canon, "{},", format_rational(c));
    }
    let _ = write!(canon, ";tau=");
    for row in &inst.travel_times {
        for t in row {
            let _ = write!(canon, "{},", format_rational(t));
        }
        let _ = write!(canon, "|");
    }
    let _ = write!(
        canon,
        ";u={};T={};prior=",
        format_rational(&inst.inflow),
        format_rational(&inst.horizon)
    );
    for p in inst.prior.coords() {
        let _ = write!(canon, "{},", format_rational(p));
    }
    let digest = Sha256::digest(canon.as_bytes());
    digest.iter().take(6).map(|b| format!("{b:02x}")).collect()
}

fn both(r: &Rational) -> String {
    format!("{} ({})", format_rational(r), format_decimal(r, 12))
}

/// Evaluates one objective at one belief, with the equilibrium summary.
pub fn cmd_evaluate(
    instance_text: &str,
    belief: &str,
    objective: Objective,
) -> Result<String, CliError> {
    let inst = load_instance(instance_text)?;
    let mu = parse_belief(belief, inst.d())?;
    let profile = crate::equilibrium::solve_for_belief(&inst, &mu).map_err(CliError::input)?;
    let mut out = String::new();
    let _ = writeln!(out, "instance {}", instance_hash(&inst));
    let _ = writeln!(out, "belief {mu}");
    let order: Vec<String> = profile.order.iter().map(|i| (i + 1).to_string()).collect();
    let entries: Vec<String> = profile.breakpoints.iter().map(|b| b.to_string()).collect();
    let _ = writeln!(out, "order {}", order.join(","));
    let _ = writeln!(out, "entry_times {}", entries.join(","));
    let _ = writeln!(out, "queueing_links {}", profile.k);
    match objective {
        Objective::Throughput => {
            let breakdown = throughput_breakdown(&inst, &mu).map_err(CliError::input)?;
            for (s, detail) in breakdown.per_scenario.iter().enumerate() {
                let _ = writeln!(out, "scenario {} throughput {}", s + 1, both(&detail.value));
            }
            let _ = writeln!(out, "expected_throughput {}", both(&breakdown.expected));
        }
        Objective::Makespan => {
            let breakdown = makespan_breakdown(&inst, &mu).map_err(CliError::input)?;
            for (s, value) in breakdown.per_scenario.iter().enumerate() {
                let _ = writeln!(out, "scenario {} makespan {}", s + 1, both(value));
            }
            let _ = writeln!(out, "expected_makespan {}", both(&breakdown.expected));
        }
    }
    Ok(out)
}

fn objective_curve(
    inst: &Instance,
    objective: Objective,
) -> Result<PiecewiseQuadratic1D, CliError> {
    match objective {
        Objective::Throughput => extract_piecewise_1d(inst).map_err(CliError::input),
        Objective::Makespan => makespan_piecewise_1d(inst).map_err(CliError::input),
    }
}

/// One sweep sample: the probability of the second scenario, the
/// objective value, the per-scenario values, and whether the point is a
/// structural breakpoint of the curve.
#[derive(Debug, Clone)]
pub struct SweepRow {
    pub x: Rational,
    pub value: Rational,
    pub per_scenario: Vec<Rational>,
    pub is_breakpoint: bool,
}

/// Deterministic sweep data over the belief segment, rows ordered by
/// the first belief coordinate.
#[derive(Debug, Clone)]
pub struct SweepOutput {
    pub instance_hash: String,
    pub objective: Objective,
    pub samples: usize,
    /// Interior breakpoints of the curve, as μ_2 values.
    pub breakpoints: Vec<Rational>,
    /// Breakpoints where the one-sided limits differ, as μ_2 values.
    pub discontinuities: Vec<Rational>,
    pub rows: Vec<SweepRow>,
}

impl SweepOutput {
    pub fn to_csv(&self) -> String {
        let obj_name = match self.objective {
            Objective::Throughput => "throughput",
            Objective::Makespan => "makespan",
        };
        let mut out = String::new();
        let _ = writeln!(
            out,
            "# instance {} objective {} samples {}",
            self.instance_hash, obj_name, self.samples
        );
        let fmt_list = |v: &[Rational]| v.iter().map(format_rational).collect::<Vec<_>>().join(",");
        let _ = writeln!(out, "# breakpoints mu_2: {}", fmt_list(&self.breakpoints));
        let _ = writeln!(out, "# discontinuities mu_2: {}", fmt_list(&self.discontinuities));
        let _ = writeln!(
            out,
            "mu_1,mu_2,value,value_decimal,scenario_1,scenario_2,breakpoint"
        );
        for row in &self.rows {
            let mu1 = Rational::one() - &row.x;
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{}",
                format_rational(&mu1),
                format_rational(&row.x),
                format_rational(&row.value),
                format_decimal(&row.value, 12),
                format_rational(&row.per_scenario[0]),
                format_rational(&row.per_scenario[1]),
                if row.is_breakpoint { 1 } else { 0 }
            );
        }
        out
    }

    /// A minimal polyline with breakpoint markers, as a figure aid.
    pub fn to_svg(&self) -> String {
        let to_f = |r: &Rational| -> f64 { num_traits::ToPrimitive::to_f64(r).unwrap_or(f64::NAN) };
        let (w, h, pad) = (640.0, 400.0, 40.0);
        let max_v = self
            .rows
            .iter()
            .map(|row| to_f(&row.value))
            .fold(f64::NEG_INFINITY, f64::max)
            .max(1e-9);
        let px = |x: f64| pad + x * (w - 2.0 * pad);
        let py = |v: f64| h - pad - (v / max_v) * (h - 2.0 * pad);
        let mut path = String::new();
        for row in &self.rows {
            let _ = write!(
                path,
                "{:.3},{:.3} ",
                px(1.0 - to_f(&row.x)),
                py(to_f(&row.value))
            );
        }
        let mut marks = String::new();
        for row in &self.rows {
            if row.is_breakpoint {
                let _ = write!(
                    marks,
                    r#"<circle cx="{:.3}" cy="{:.3}" r="3" fill="red"/>"#,
                    px(1.0 - to_f(&row.x)),
                    py(to_f(&row.value))
                );
            }
        }
        format!(
            concat!(
                r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}">"#,
                r#"<polyline fill="none" stroke="black" points="{path}"/>{marks}</svg>"#,
                "\n"
            ),
            w = w,
            h = h,
            path = path.trim_end(),
            marks = marks
        )
    }
}

/// Sweeps the objective over the belief segment (two scenarios only):
/// `n + 1` evenly spaced beliefs plus every structural breakpoint.
pub fn sweep_output(
    instance_text: &str,
    objective: Objective,
    samples: usize,
) -> Result<SweepOutput, CliError> {
    let inst = load_instance(instance_text)?;
    if inst.d() != 2 {
        return Err(CliError::Input(format!(
            "sweep requires exactly two scenarios, instance has {}",
            inst.d()
        )));
    }
    if samples == 0 {
        return Err(CliError::Input("samples must be at least 1".into()));
    }
    let curve = objective_curve(&inst, objective)?;
    let breakpoints = curve.interior_breakpoints();
    let discontinuities = curve.discontinuities();
    let mut xs: Vec<Rational> = (0..=samples)
        .map(|i| crate::model::ratio(i as i64, samples as i64))
        .collect();
    xs.extend(breakpoints.iter().cloned());
    xs.sort();
    xs.dedup();

    // rows ordered by the first belief coordinate μ_1 = 1 − x
    let mut rows = Vec::with_capacity(xs.len());
    for x in xs.iter().rev() {
        let mu = Belief::new(vec![Rational::one() - x, x.clone()]).expect("segment point");
        let (value, per_scenario) = match objective {
            Objective::Throughput => {
                let b = throughput_breakdown(&inst, &mu).map_err(CliError::input)?;
                (
                    b.expected,
                    b.per_scenario.into_iter().map(|d| d.value).collect(),
                )
            }
            Objective::Makespan => {
                let b = makespan_breakdown(&inst, &mu).map_err(CliError::input)?;
                (b.expected, b.per_scenario)
            }
        };
        rows.push(SweepRow {
            x: x.clone(),
            value,
            per_scenario,
            is_breakpoint: breakpoints.contains(x),
        });
    }
    Ok(SweepOutput {
        instance_hash: instance_hash(&inst),
        objective,
        samples,
        breakpoints,
        discontinuities,
        rows,
    })
}

pub fn cmd_sweep(
    instance_text: &str,
    objective: Objective,
    samples: usize,
    emit: EmitFormat,
) -> Result<String, CliError> {
    let sweep = sweep_output(instance_text, objective, samples)?;
    Ok(match emit {
        EmitFormat::Csv => sweep.to_csv(),
        EmitFormat::Svg => sweep.to_svg(),
    })
}

#[derive(Serialize, Deserialize)]
struct SchemeSignalDoc {
    alpha: String,
    belief: Vec<String>,
}

#[derive(Serialize, Deserialize)]
struct SchemeDoc {
    alg: String,
    alg_decimal: String,
    eps_star: String,
    signals: Vec<SchemeSignalDoc>,
    phi: Vec<Vec<String>>,
}

pub fn scheme_to_json(scheme: &SignalingScheme, alg: &Rational, eps_star: &Rational) -> String {
    let doc = SchemeDoc {
        alg: format_rational(alg),
        alg_decimal: format_decimal(alg, 12),
        eps_star: format_rational(eps_star),
        signals: scheme
            .signals()
            .iter()
            .map(|(a, mu)| SchemeSignalDoc {
                alpha: format_rational(a),
                belief: mu.coords().iter().map(format_rational).collect(),
            })
            .collect(),
        phi: scheme
            .phi()
            .iter()
            .map(|row| row.iter().map(format_rational).collect())
            .collect(),
    };
    serde_json::to_string_pretty(&doc).expect("scheme serializes") + "\n"
}

/// Runs the multiplicative scheme solver; returns the report and the
/// scheme document.
pub fn cmd_fptas(instance_text: &str, eps: &str) -> Result<(String, String), CliError> {
    let inst = load_instance(instance_text)?;
    let eps_star = parse_rational(eps).map_err(CliError::input)?;
    if !(eps_star.is_positive() && eps_star < Rational::one()) {
        return Err(CliError::Input(
            "eps must lie strictly between 0 and 1".into(),
        ));
    }
    let run = solve_fptas(&inst, &eps_star).map_err(CliError::input)?;
    let mut report = String::new();
    let _ = writeln!(report, "instance {}", instance_hash(&inst));
    let _ = writeln!(report, "eps_star {}", format_rational(&eps_star));
    if run.zero_optimum {
        let _ = writeln!(report, "optimal_throughput_is_zero true");
    }
    let _ = writeln!(report, "kappa {}", run.kappa);
    let _ = writeln!(report, "net_size {}", run.net_size);
    let _ = writeln!(report, "signals {}", run.scheme.signals().len());
    for (i, (a, mu)) in run.scheme.signals().iter().enumerate() {
        let _ = writeln!(
            report,
            "signal {} weight {} belief {}",
            i + 1,
            format_rational(a),
            mu
        );
    }
    let _ = writeln!(report, "alg {}", both(&run.alg));
    let doc = scheme_to_json(&run.scheme, &run.alg, &eps_star);
    Ok((report, doc))
}

/// Verifies a scheme document against its instance: exact convex
/// decomposition of the prior and a correct stated value.
pub fn cmd_verify_scheme(instance_text: &str, scheme_text: &str) -> Result<String, CliError> {
    let inst = load_instance(instance_text)?;
    let doc: SchemeDoc = serde_json::from_str(scheme_text)
        .map_err(|e| CliError::Input(format!("scheme document is not valid JSON: {e}")))?;
    let mut signals = Vec::new();
    for sig in &doc.signals {
        let alpha = parse_rational(&sig.alpha).map_err(CliError::input)?;
        let coords = sig
            .belief
            .iter()
            .map(|s| parse_rational(s).map_err(CliError::input))
            .collect::<Result<Vec<_>, _>>()?;
        let mu = Belief::new(coords).map_err(CliError::input)?;
        signals.push((alpha, mu));
    }
    let scheme = SignalingScheme::new(signals, &inst.prior)
        .map_err(|e| CliError::Property(format!("scheme invariant violated: {e}")))?;
    let alg = parse_rational(&doc.alg).map_err(CliError::input)?;
    let recomputed = scheme
        .expected_value(|mu| crate::objectives::expected_throughput(&inst, mu))
        .map_err(CliError::input)?;
    if recomputed != alg {
        return Err(CliError::Property(format!(
            "stated value {} differs from recomputed {}",
            format_rational(&alg),
            format_rational(&recomputed)
        )));
    }
    let phi = scheme.phi();
    for (s, row) in doc.phi.iter().enumerate() {
        for (j, entry) in row.iter().enumerate() {
            let value = parse_rational(entry).map_err(CliError::input)?;
            if value != phi[s][j] {
                return Err(CliError::Property(format!("phi[{s}][{j}] mismatch")));
            }
        }
    }
    Ok(format!(
        "scheme ok: {} signals, value {}\n",
        scheme.signals().len(),
        both(&alg)
    ))
}

/// Runs the additive dual scheme and reports the bracket value.
pub fn cmd_dual(instance_text: &str, eps: &str) -> Result<String, CliError> {
    let inst = load_instance(instance_text)?;
    let eps_star: f64 = eps
        .parse()
        .ok()
        .filter(|e: &f64| *e > 0.0)
        .ok_or_else(|| CliError::Input("eps must be a positive number".into()))?;
    let run = solve_additive_ptas(&inst, eps_star).map_err(CliError::input)?;
    let mut out = String::new();
    let _ = writeln!(out, "instance {}", instance_hash(&inst));
    let _ = writeln!(out, "eps_star {eps_star}");
    let _ = writeln!(out, "p {:.12}", run.p);
    let _ = writeln!(out, "best_dual_objective {:.12}", run.best_objective);
    let _ = writeln!(out, "iterations {}", run.iterations);
    let _ = writeln!(out, "budget_exhausted {}", run.budget_exhausted);
    let _ = writeln!(out, "volume_monitor_ok {}", run.volume_ok);
    Ok(out)
}

/// A random convex decomposition of the prior with a few signals,
/// exact by construction: the last belief absorbs the residual.
pub fn random_scheme(prior: &Belief, rng: &mut ChaCha8Rng) -> SignalingScheme {
    let d = prior.d();
    'attempt: for _ in 0..200 {
        let extra = rng.gen_range(1..=d.min(3));
        let mut signals: Vec<(Rational, Belief)> = Vec::new();
        let mut used = Rational::zero();
        let mut residual: Vec<Rational> = prior.coords().to_vec();
        for _ in 0..extra {
            let alpha = crate::model::ratio(rng.gen_range(1i64..=10), 40);
            let coords: Vec<i64> = (0..d).map(|_| rng.gen_range(0i64..=6)).collect();
            let total: i64 = coords.iter().sum();
            if total == 0 {
                continue 'attempt;
            }
            let mu: Vec<Rational> = coords
                .iter()
                .map(|&c| crate::model::ratio(c, total))
                .collect();
            for (r, m) in residual.iter_mut().zip(&mu) {
                *r -= &alpha * m;
            }
            used += &alpha;
            signals.push((alpha, Belief::new(mu).expect("normalized coordinates")));
        }
        let rest = Rational::one() - &used;
        if !rest.is_positive() {
            continue;
        }
        let last: Vec<Rational> = residual.iter().map(|r| r / &rest).collect();
        if last.iter().any(|c| c.is_negative() || c > &Rational::one()) {
            continue;
        }
        signals.push((rest, Belief::new(last).expect("residual sums to one")));
        if let Ok(scheme) = SignalingScheme::new(signals, prior) {
            return scheme;
        }
    }
    SignalingScheme::trivial(prior)
}

/// Samples random signaling schemes and checks that full information
/// attains an expected makespan no larger than any of them.
pub fn cmd_makespan_check(
    instance_text: &str,
    trials: usize,
    seed: u64,
) -> Result<String, CliError> {
    let inst = load_instance(instance_text)?;
    if trials == 0 {
        return Err(CliError::Input("trials must be at least 1".into()));
    }
    let full_info: Rational = (0..inst.d())
        .map(|s| {
            inst.prior.get(s)
                * makespan_scenario(&inst, &Belief::unit(s, inst.d()), s).expect("dimensions match")
        })
        .sum();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut minimum: Option<Rational> = None;
    for t in 0..trials {
        let scheme = random_scheme(&inst.prior, &mut rng);
        let value = scheme
            .expected_value(|mu| expected_makespan(&inst, mu))
            .map_err(CliError::input)?;
        if value < full_info {
            return Err(CliError::Property(format!(
                "trial {}: sampled scheme beats full information ({} < {})",
                t,
                format_rational(&value),
                format_rational(&full_info)
            )));
        }
        if minimum.as_ref().is_none_or(|m| &value < m) {
            minimum = Some(value);
        }
    }
    let minimum = minimum.expect("at least one trial");
    Ok(format!(
        "full_information {}\nmin_sampled {}\ntrials {}\ncounterexamples 0\n",
        both(&full_info),
        both(&minimum),
        trials
    ))
}
