//! Independent ground truth for two-scenario instances: the expected
//! throughput and makespan as exact piecewise quadratic functions of the
//! probability of the second scenario, the upper concave envelope of the
//! throughput (whose value at the prior is the optimal signaling value),
//! and a grid brute force usable up to three scenarios.
//!
//! Envelope support points can be irrational (tangency roots of
//! quadratics). They are computed as rational approximants with error
//! below 1e−40 via integer square roots, so all subsequent dominance
//! checks still run in exact rational arithmetic against a 1e−25 slack.

use crate::arrangement::{self, solve_square};
use crate::equilibrium::{entry_time_coefficients, solve_for_belief};
use crate::model::{Belief, Instance, ModelError, Rational};
use crate::objectives::{expected_makespan, expected_throughput};
use crate::simplex::{maximize, LpOutcome, StandardLp};
use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum OracleError {
    #[error("this oracle requires exactly two scenarios, got {0}")]
    NotTwoScenarios(usize),
    #[error("brute force supports at most three scenarios, got {0}")]
    TooManyScenarios(usize),
    #[error("grid resolution too large: {0} points")]
    ResolutionTooLarge(usize),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("piece fitting failed near x = {0}; a structural breakpoint was missed")]
    FitFailed(String),
}

/// One quadratic piece `a2·x² + a1·x + a0` on `[lo, hi]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QuadPiece {
    pub lo: Rational,
    pub hi: Rational,
    pub a2: Rational,
    pub a1: Rational,
    pub a0: Rational,
}

impl QuadPiece {
    pub fn eval(&self, x: &Rational) -> Rational {
        (&self.a2 * x + &self.a1) * x + &self.a0
    }

    pub fn derivative(&self, x: &Rational) -> Rational {
        Rational::from_integer(2.into()) * &self.a2 * x + &self.a1
    }

    fn same_polynomial(&self, other: &QuadPiece) -> bool {
        self.a2 == other.a2 && self.a1 == other.a1 && self.a0 == other.a0
    }
}

/// A piecewise quadratic function of the scalar belief coordinate
/// `x = μ_d ∈ [0, 1]` (the probability of the last scenario).
#[derive(Debug, Clone)]
pub struct PiecewiseQuadratic1D {
    pub pieces: Vec<QuadPiece>,
}

impl PiecewiseQuadratic1D {
    /// All piece boundaries including 0 and 1.
    pub fn breakpoints(&self) -> Vec<Rational> {
        let mut out: Vec<Rational> = self.pieces.iter().map(|p| p.lo.clone()).collect();
        out.push(self.pieces.last().expect("at least one piece").hi.clone());
        out
    }

    pub fn interior_breakpoints(&self) -> Vec<Rational> {
        self.pieces.iter().skip(1).map(|p| p.lo.clone()).collect()
    }

    /// Value at `x`; at a shared boundary the left piece is used.
    pub fn eval(&self, x: &Rational) -> Rational {
        let piece = self
            .pieces
            .iter()
            .find(|p| x <= &p.hi)
            .unwrap_or_else(|| self.pieces.last().expect("at least one piece"));
        piece.eval(x)
    }

    pub fn is_continuous(&self) -> bool {
        self.discontinuities().is_empty()
    }

    /// Interior breakpoints where left and right limits differ.
    pub fn discontinuities(&self) -> Vec<Rational> {
        self.pieces
            .windows(2)
            .filter(|w| w[0].eval(&w[0].hi) != w[1].eval(&w[1].lo))
            .map(|w| w[0].hi.clone())
            .collect()
    }
}

fn belief2(x: &Rational) -> Belief {
    Belief::new(vec![Rational::one() - x, x.clone()]).expect("scalar coordinate in [0, 1]")
}

/// Root of an affine-in-x hyperplane condition on the segment
/// parameterized by `μ = (1 − x, x)`.
fn hyperplane_root(h: &arrangement::Hyperplane) -> Option<Rational> {
    let slope = &h.normal[1] - &h.normal[0];
    if slope.is_zero() {
        return None;
    }
    Some((&h.offset - &h.normal[0]) / slope)
}

fn push_root_inside(candidates: &mut Vec<Rational>, x: Rational, lo: &Rational, hi: &Rational) {
    if &x > lo && &x < hi {
        candidates.push(x);
    }
}

/// Fits exact quadratics between consecutive candidate breakpoints and
/// merges equal neighbours. `f` must be quadratic between candidates;
/// this is verified at two extra sample points per interval.
fn fit_piecewise<F>(candidates: &[Rational], mut f: F) -> Result<PiecewiseQuadratic1D, OracleError>
where
    F: FnMut(&Rational) -> Result<Rational, ModelError>,
{
    let mut cuts = candidates.to_vec();
    cuts.push(Rational::zero());
    cuts.push(Rational::one());
    cuts.sort();
    cuts.dedup();
    cuts.retain(|x| x >= &Rational::zero() && x <= &Rational::one());
    let mut pieces: Vec<QuadPiece> = Vec::new();
    for w in cuts.windows(2) {
        let (lo, hi) = (&w[0], &w[1]);
        let span = hi - lo;
        let at = |num: i64, den: i64| -> Rational { lo + &span * crate::model::ratio(num, den) };
        let xs = [at(1, 4), at(1, 2), at(3, 4)];
        let ys = [f(&xs[0])?, f(&xs[1])?, f(&xs[2])?];
        let rows: Vec<Vec<Rational>> = xs
            .iter()
            .map(|x| vec![x * x, x.clone(), Rational::one()])
            .collect();
        let coeffs = solve_square(&rows, &ys).expect("distinct sample points");
        let piece = QuadPiece {
            lo: lo.clone(),
            hi: hi.clone(),
            a2: coeffs[0].clone(),
            a1: coeffs[1].clone(),
            a0: coeffs[2].clone(),
        };
        for check in [at(1, 8), at(7, 8)] {
            if piece.eval(&check) != f(&check)? {
                return Err(OracleError::FitFailed(crate::model::format_rational(
                    &check,
                )));
            }
        }
        match pieces.last_mut() {
            Some(prev) if prev.same_polynomial(&piece) => prev.hi = piece.hi,
            _ => pieces.push(piece),
        }
    }
    Ok(PiecewiseQuadratic1D { pieces })
}

/// Structural breakpoint candidates shared by throughput and makespan:
/// the travel-time tie points, refined per cell by the given generator.
fn celled_candidates<G>(inst: &Instance, mut per_cell: G) -> Result<Vec<Rational>, ModelError>
where
    G: FnMut(&Instance, &Rational, &Rational, &mut Vec<Rational>) -> Result<(), ModelError>,
{
    let mut candidates: Vec<Rational> = vec![Rational::zero(), Rational::one()];
    for h in arrangement::build_travel_time_ties(inst) {
        if let Some(x) = hyperplane_root(&h) {
            push_root_inside(&mut candidates, x, &Rational::zero(), &Rational::one());
        }
    }
    candidates.sort();
    candidates.dedup();
    let cells = candidates.clone();
    for w in cells.windows(2) {
        per_cell(inst, &w[0], &w[1], &mut candidates)?;
    }
    candidates.sort();
    candidates.dedup();
    Ok(candidates)
}

/// The expected throughput `F(μ) = (1−x)·F_blue + x·F_red` as an exact
/// piecewise quadratic function of `x = μ_2`, for two-scenario instances.
pub fn extract_piecewise_1d(inst: &Instance) -> Result<PiecewiseQuadratic1D, OracleError> {
    if inst.d() != 2 {
        return Err(OracleError::NotTwoScenarios(inst.d()));
    }
    let candidates = celled_candidates(inst, |inst, lo, hi, out| {
        let mid = (lo + hi) / Rational::from_integer(2.into());
        // exit ties and horizon crossings are affine within the cell
        for h in arrangement::build_exit_ties(inst, &belief2(&mid)) {
            if let Some(x) = hyperplane_root(&h) {
                push_root_inside(out, x, lo, hi);
            }
        }
        Ok(())
    })?;
    // the throughput is continuous except at capacity-degenerate ties,
    // where the marginal-link selection can jump; the fitted pieces are
    // exact on every open interval either way
    fit_piecewise(&candidates, |x| expected_throughput(inst, &belief2(x)))
}

/// The expected makespan as an exact piecewise quadratic of `x = μ_2`.
/// Unlike the throughput it may jump at breakpoints.
pub fn makespan_piecewise_1d(inst: &Instance) -> Result<PiecewiseQuadratic1D, OracleError> {
    if inst.d() != 2 {
        return Err(OracleError::NotTwoScenarios(inst.d()));
    }
    let candidates = celled_candidates(inst, |inst, lo, hi, out| {
        let mid = (lo + hi) / Rational::from_integer(2.into());
        let order = arrangement::travel_time_order(inst, &belief2(&mid));
        let coeffs = entry_time_coefficients(inst, &order);
        // entry times crossing the horizon change the support at T
        let mut stage: Vec<Rational> = vec![lo.clone(), hi.clone()];
        for q in coeffs.iter().flatten() {
            let slope = &q[1] - &q[0];
            if !slope.is_zero() {
                let x = (&inst.horizon - &q[0]) / slope;
                push_root_inside(&mut stage, x.clone(), lo, hi);
                push_root_inside(out, x, lo, hi);
            }
        }
        stage.sort();
        stage.dedup();
        // within fixed support, the realized-exit-time maximizer can
        // still switch; those switch points are affine roots
        for w in stage.windows(2) {
            let a = w[0].clone() + (&w[1] - &w[0]) / crate::model::rat(3);
            let b = w[0].clone() + (&w[1] - &w[0]) * crate::model::ratio(2, 3);
            let profile_a = solve_for_belief(inst, &belief2(&a))?;
            let support = profile_a.support(&inst.horizon);
            for s in 0..2 {
                let realized: Vec<Rational> =
                    inst.travel_times.iter().map(|r| r[s].clone()).collect();
                for (ii, &i) in support.iter().enumerate() {
                    for &j in support.iter().skip(ii + 1) {
                        let da = profile_a.exit_time(i, &inst.horizon, &realized)
                            - profile_a.exit_time(j, &inst.horizon, &realized);
                        let profile_b = solve_for_belief(inst, &belief2(&b))?;
                        let db = profile_b.exit_time(i, &inst.horizon, &realized)
                            - profile_b.exit_time(j, &inst.horizon, &realized);
                        // affine through (a, da), (b, db)
                        let slope = (&db - &da) / (&b - &a);
                        if !slope.is_zero() {
                            let x = &a - &da / &slope;
                            push_root_inside(out, x, &w[0], &w[1]);
                        }
                    }
                }
            }
        }
        Ok(())
    })?;
    fit_piecewise(&candidates, |x| expected_makespan(inst, &belief2(x)))
}

/// A support point of the concave envelope. `exact` marks rational
/// tangencies; approximate entries carry error below 1e−40.
#[derive(Debug, Clone)]
pub struct SupportPoint {
    pub x: Rational,
    pub exact: bool,
}

/// The envelope value at the query prior together with the supporting
/// line and its (at most two) touch points.
#[derive(Debug, Clone)]
pub struct EnvelopeSolution {
    pub value: Rational,
    pub slope: Rational,
    pub intercept: Rational,
    pub support: Vec<SupportPoint>,
}

impl EnvelopeSolution {
    pub fn value_f64(&self) -> f64 {
        self.value.to_f64().expect("envelope value fits in f64")
    }
}

/// `√r` as a rational approximant with error below `10^−digits`;
/// `exact` is set when `r` is a perfect square.
fn sqrt_approx(r: &Rational, digits: u32) -> (Rational, bool) {
    assert!(!r.is_negative());
    if r.is_zero() {
        return (Rational::zero(), true);
    }
    let scale = BigInt::from(10u32).pow(digits);
    // √(p/q) = √(pq)/q
    let target = r.numer() * r.denom() * &scale * &scale;
    let root = target.sqrt();
    let exact = &root * &root == target;
    (Rational::new(root, r.denom() * scale), exact)
}

struct CandidateLine {
    slope: Rational,
    intercept: Rational,
    touches: Vec<SupportPoint>,
}

impl CandidateLine {
    fn through_points(p: (&Rational, &Rational), q: (&Rational, &Rational)) -> Option<Self> {
        if p.0 == q.0 {
            return None;
        }
        let slope = (q.1 - p.1) / (q.0 - p.0);
        let intercept = p.1 - &slope * p.0;
        Some(CandidateLine {
            slope,
            intercept,
            touches: vec![
                SupportPoint {
                    x: p.0.clone(),
                    exact: true,
                },
                SupportPoint {
                    x: q.0.clone(),
                    exact: true,
                },
            ],
        })
    }

    fn tangent(piece: &QuadPiece, x: &SupportPoint) -> Self {
        let slope = piece.derivative(&x.x);
        let intercept = piece.eval(&x.x) - &slope * &x.x;
        CandidateLine {
            slope,
            intercept,
            touches: vec![x.clone()],
        }
    }
}

const SQRT_DIGITS: u32 = 45;

fn interval_tolerance() -> Rational {
    Rational::new(BigInt::one(), BigInt::from(10u32).pow(30))
}

fn dominance_tolerance() -> Rational {
    Rational::new(BigInt::one(), BigInt::from(10u32).pow(25))
}

/// Tangency points on a strictly concave piece for lines through `(px, py)`.
fn tangencies_from_point(piece: &QuadPiece, px: &Rational, py: &Rational) -> Vec<SupportPoint> {
    // line through (px, py) tangent at x: A x² − 2A·px·x + (py − B·px − C) = 0
    let a = piece.a2.clone();
    let b = Rational::from_integer((-2).into()) * &piece.a2 * px;
    let c = py - &piece.a1 * px - &piece.a0;
    quadratic_roots(&a, &b, &c)
        .into_iter()
        .filter(|r| in_piece(piece, &r.x))
        .collect()
}

/// Common tangency pair (x on `f`, z on `g`) for two strictly concave pieces.
fn common_tangencies(f: &QuadPiece, g: &QuadPiece) -> Vec<(SupportPoint, SupportPoint)> {
    // equal slope and equal tangent line intercept reduce to a quadratic
    // in the tangency point on f
    let (a1, b1, c1) = (&f.a2, &f.a1, &f.a0);
    let (a2, b2, c2) = (&g.a2, &g.a1, &g.a0);
    let a = a1 * a1 / a2 - a1;
    let b = a1 * (b1 - b2) / a2;
    let diff = b1 - b2;
    let c = c1 - c2 + &diff * &diff / (Rational::from_integer(4.into()) * a2);
    quadratic_roots(&a, &b, &c)
        .into_iter()
        .filter(|r| in_piece(f, &r.x))
        .filter_map(|r| {
            let z = (Rational::from_integer(2.into()) * a1 * &r.x + b1 - b2)
                / (Rational::from_integer(2.into()) * a2);
            if in_piece(g, &z) {
                let exact = r.exact;
                Some((r, SupportPoint { x: z, exact }))
            } else {
                None
            }
        })
        .collect()
}

fn in_piece(piece: &QuadPiece, x: &Rational) -> bool {
    let tol = interval_tolerance();
    x >= &(&piece.lo - &tol) && x <= &(&piece.hi + &tol)
}

fn quadratic_roots(a: &Rational, b: &Rational, c: &Rational) -> Vec<SupportPoint> {
    if a.is_zero() {
        if b.is_zero() {
            return Vec::new();
        }
        return vec![SupportPoint {
            x: -(c / b),
            exact: true,
        }];
    }
    let four = Rational::from_integer(4.into());
    let two = Rational::from_integer(2.into());
    let disc = b * b - four * a * c;
    if disc.is_negative() {
        return Vec::new();
    }
    let (root, exact) = sqrt_approx(&disc, SQRT_DIGITS);
    let denom = two * a;
    vec![
        SupportPoint {
            x: (-b + &root) / &denom,
            exact,
        },
        SupportPoint {
            x: (-b - &root) / &denom,
            exact,
        },
    ]
}

/// A line dominates the function when it stays above every piece, up to
/// the approximation slack for irrational tangencies.
fn dominates(pw: &PiecewiseQuadratic1D, slope: &Rational, intercept: &Rational) -> bool {
    let tol = dominance_tolerance();
    for piece in &pw.pieces {
        // gap(x) = (slope·x + intercept) − piece(x) must stay ≥ −tol
        let gap = |x: &Rational| slope * x + intercept - piece.eval(x);
        if gap(&piece.lo) < -tol.clone() || gap(&piece.hi) < -tol.clone() {
            return false;
        }
        if !piece.a2.is_zero() {
            let critical = (slope - &piece.a1) / (Rational::from_integer(2.into()) * &piece.a2);
            if critical > piece.lo && critical < piece.hi && gap(&critical) < -tol.clone() {
                return false;
            }
        }
    }
    true
}

/// Upper concave envelope of a continuous piecewise quadratic at the
/// query point: the smallest affine majorant value, with the touching
/// beliefs (at most two by Caratheodory in one dimension).
pub fn concave_envelope_1d(pw: &PiecewiseQuadratic1D, lambda: &Rational) -> EnvelopeSolution {
    assert!(lambda >= &Rational::zero() && lambda <= &Rational::one());
    let breaks = pw.breakpoints();
    let values: Vec<Rational> = breaks.iter().map(|x| pw.eval(x)).collect();
    let arcs: Vec<&QuadPiece> = pw.pieces.iter().filter(|p| p.a2.is_negative()).collect();

    let mut candidates: Vec<CandidateLine> = Vec::new();
    // tangent at the query point itself (covers the concave region case)
    let own_piece = pw
        .pieces
        .iter()
        .find(|p| lambda >= &p.lo && lambda <= &p.hi)
        .expect("query point within [0, 1]");
    candidates.push(CandidateLine::tangent(
        own_piece,
        &SupportPoint {
            x: lambda.clone(),
            exact: true,
        },
    ));
    // chords between breakpoint values
    for i in 0..breaks.len() {
        for j in (i + 1)..breaks.len() {
            if let Some(line) =
                CandidateLine::through_points((&breaks[i], &values[i]), (&breaks[j], &values[j]))
            {
                candidates.push(line);
            }
        }
    }
    // breakpoint-to-arc tangents
    for (bx, by) in breaks.iter().zip(&values) {
        for arc in &arcs {
            for t in tangencies_from_point(arc, bx, by) {
                let line = CandidateLine::tangent(arc, &t);
                let mut touches = vec![
                    SupportPoint {
                        x: bx.clone(),
                        exact: true,
                    },
                    t,
                ];
                touches.sort_by(|p, q| p.x.cmp(&q.x));
                candidates.push(CandidateLine { touches, ..line });
            }
        }
    }
    // arc-to-arc common tangents
    for i in 0..arcs.len() {
        for j in (i + 1)..arcs.len() {
            for (tf, tg) in common_tangencies(arcs[i], arcs[j]) {
                let line = CandidateLine::tangent(arcs[i], &tf);
                candidates.push(CandidateLine {
                    touches: vec![tf, tg],
                    ..line
                });
            }
        }
    }

    let mut best: Option<(Rational, CandidateLine)> = None;
    for cand in candidates {
        if !dominates(pw, &cand.slope, &cand.intercept) {
            continue;
        }
        let at_query = &cand.slope * lambda + &cand.intercept;
        let better = best.as_ref().is_none_or(|(v, _)| &at_query < v);
        if better {
            best = Some((at_query, cand));
        }
    }
    let (value, line) = best.expect("the tangent at the maximum always dominates");
    let mut support = line.touches;
    support.sort_by(|p, q| p.x.cmp(&q.x));
    support.dedup_by(|p, q| p.x == q.x);
    EnvelopeSolution {
        value,
        slope: line.slope,
        intercept: line.intercept,
        support,
    }
}

/// Discrete concave envelope at the prior over a uniform belief grid,
/// solved as an exact LP; converges to OPT from below as `n` grows.
pub fn brute_force_opt(inst: &Instance, n: usize) -> Result<f64, OracleError> {
    if inst.d() > 3 {
        return Err(OracleError::TooManyScenarios(inst.d()));
    }
    if n == 0 || n > 2000 {
        return Err(OracleError::ResolutionTooLarge(n));
    }
    let d = inst.d();
    if d == 1 {
        let v = expected_throughput(inst, &Belief::unit(0, 1))?;
        return Ok(v.to_f64().expect("finite"));
    }
    let mut grid: Vec<Belief> = Vec::new();
    if d == 2 {
        for i in 0..=n {
            grid.push(belief2(&crate::model::ratio(i as i64, n as i64)));
        }
    } else {
        if (n + 1) * (n + 2) / 2 > 50_000 {
            return Err(OracleError::ResolutionTooLarge(n));
        }
        for i in 0..=n {
            for j in 0..=(n - i) {
                let a = crate::model::ratio(i as i64, n as i64);
                let b = crate::model::ratio(j as i64, n as i64);
                let c = Rational::one() - &a - &b;
                grid.push(Belief::new(vec![a, b, c]).expect("grid point on simplex"));
            }
        }
    }
    let values = grid
        .iter()
        .map(|mu| expected_throughput(inst, mu))
        .collect::<Result<Vec<_>, _>>()?;
    let mut rows: Vec<Vec<Rational>> = Vec::new();
    let mut rhs: Vec<Rational> = Vec::new();
    for s in 0..d {
        rows.push(grid.iter().map(|mu| mu.get(s).clone()).collect());
        rhs.push(inst.prior.get(s).clone());
    }
    rows.push(vec![Rational::one(); grid.len()]);
    rhs.push(Rational::one());
    let lp = StandardLp {
        objective: values,
        rows,
        rhs,
    };
    match maximize(&lp) {
        LpOutcome::Optimal { objective, .. } => {
            Ok(objective.to_f64().expect("objective fits in f64"))
        }
        _ => unreachable!("grid contains the simplex corners"),
    }
}
