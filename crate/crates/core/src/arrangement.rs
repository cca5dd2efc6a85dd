//! Hyperplane arrangements on the belief simplex Δ and exact cell
//! enumeration.
//!
//! Hyperplanes live in belief space (`aᵀμ = b`). The simplex is
//! parameterized by dropping the last coordinate, so an arrangement over
//! `d` scenarios is enumerated in `R^{d−1}`. Cells of every dimension
//! are found recursively: faces of dimension below the ambient one are
//! faces of the arrangement restricted to some hyperplane (or simplex
//! facet) flat, and top-dimensional cells are seeded by stepping off the
//! representatives of the one-lower-dimensional faces. All computations
//! are exact; every cell carries its sign vector, vertex list and a
//! representative point with strictly correct nonzero signs.
//!
//! The exact path supports up to four scenarios. Larger `d` is rejected
//! explicitly rather than silently approximated.

use crate::equilibrium::entry_time_coefficients;
use crate::model::{expected_travel_times, Belief, Instance, Rational};
use num_bigint::BigUint;
use num_traits::{One, Signed, Zero};
use std::collections::BTreeMap;
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ArrangementError {
    #[error("cell enumeration supports at most 4 scenarios, got {0}")]
    UnsupportedDimension(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum CellSign {
    Neg,
    Zero,
    Pos,
}

fn sign_of(r: &Rational) -> CellSign {
    if r.is_zero() {
        CellSign::Zero
    } else if r.is_positive() {
        CellSign::Pos
    } else {
        CellSign::Neg
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum HyperplaneLabel {
    /// `H_{i,j}`: equal expected travel times on links `i` and `j`.
    TravelTimeTie { i: usize, j: usize },
    /// `H_{i,j,s}`: equal first exit times of links `i` and `j` in scenario `s`.
    ExitTie { i: usize, j: usize, s: usize },
    /// `H_{i,s,T}`: first exit time of link `i` hits the horizon in scenario `s`.
    Horizon { i: usize, s: usize },
    /// `L_{s,j}`: grid level `μ_s = (1−ε)^{j−1}` of the multiplicative net.
    NetGrid { s: usize, level: u64 },
    /// `L_{s,0}`: boundary level `μ_s = 0` of the net.
    NetZero { s: usize },
}

/// A hyperplane `{μ : normalᵀμ = offset}` in belief space.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Hyperplane {
    pub normal: Vec<Rational>,
    pub offset: Rational,
    pub label: HyperplaneLabel,
}

/// How a hyperplane meets the affine hull of the simplex.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HyperplaneClass {
    /// Cuts the hull in a proper affine subspace.
    Proper,
    /// Contains the whole hull (`0 = 0` after substitution).
    Full,
    /// Misses the hull entirely (`0 = c`, `c ≠ 0`), e.g. an exit-time tie
    /// involving a link that never enters.
    Empty,
}

impl Hyperplane {
    /// Marker for conditions that cannot hold anywhere on the simplex.
    pub fn unsatisfiable(d: usize, label: HyperplaneLabel) -> Self {
        Hyperplane {
            normal: vec![Rational::zero(); d],
            offset: Rational::one(),
            label,
        }
    }

    pub fn eval(&self, mu: &[Rational]) -> Rational {
        self.normal
            .iter()
            .zip(mu)
            .map(|(a, m)| a * m)
            .sum::<Rational>()
            - &self.offset
    }

    /// Coefficients after substituting `μ_d = 1 − Σ_{s<d} μ_s`.
    fn project(&self, d: usize) -> Form {
        let last = &self.normal[d - 1];
        Form {
            a: (0..d - 1).map(|s| &self.normal[s] - last).collect(),
            b: &self.offset - last,
        }
    }

    pub fn classify(&self, d: usize) -> HyperplaneClass {
        let form = self.project(d);
        if form.a.iter().all(|v| v.is_zero()) {
            if form.b.is_zero() {
                HyperplaneClass::Full
            } else {
                HyperplaneClass::Empty
            }
        } else {
            HyperplaneClass::Proper
        }
    }
}

/// A face of the subdivision of (part of) Δ by an arrangement.
#[derive(Debug, Clone)]
pub struct Cell {
    pub dim: usize,
    /// Sign of each input hyperplane on the cell, in input order.
    pub signs: Vec<CellSign>,
    /// Sign of each simplex facet `μ_s ≥ 0`.
    pub facet_signs: Vec<CellSign>,
    /// Signs of the restricting hyperplanes (empty when the arrangement
    /// is enumerated on the whole simplex).
    pub bound_signs: Vec<CellSign>,
    /// The 0-faces of the complex lying in the cell closure (belief space).
    pub vertices: Vec<Vec<Rational>>,
    /// A point of the relative interior (belief space).
    pub rep: Vec<Rational>,
}

impl Cell {
    /// Closed-cell membership: zero signs hold exactly, strict signs weakly.
    pub fn closure_contains(&self, hps: &[Hyperplane], mu: &[Rational]) -> bool {
        let hp_ok = hps
            .iter()
            .zip(&self.signs)
            .all(|(h, s)| compatible(sign_of(&h.eval(mu)), *s));
        let facet_ok = mu
            .iter()
            .zip(&self.facet_signs)
            .all(|(coord, s)| compatible(sign_of(coord), *s));
        hp_ok && facet_ok
    }

    /// Relative-interior membership: every sign matches exactly.
    pub fn interior_contains(&self, hps: &[Hyperplane], mu: &[Rational]) -> bool {
        let hp_ok = hps
            .iter()
            .zip(&self.signs)
            .all(|(h, s)| sign_of(&h.eval(mu)) == *s);
        let facet_ok = mu
            .iter()
            .zip(&self.facet_signs)
            .all(|(coord, s)| sign_of(coord) == *s);
        hp_ok && facet_ok
    }

    pub fn rep_belief(&self) -> Belief {
        Belief::new(self.rep.clone()).expect("cell representative lies on the simplex")
    }
}

fn compatible(actual: CellSign, cell: CellSign) -> bool {
    cell == actual || (cell != CellSign::Zero && actual == CellSign::Zero)
}

#[derive(Debug, Clone)]
pub struct Complex {
    pub hyperplanes: Vec<Hyperplane>,
    pub cells: Vec<Cell>,
    d: usize,
}

impl Complex {
    pub fn cells_of_dim(&self, k: usize) -> impl Iterator<Item = &Cell> {
        self.cells.iter().filter(move |c| c.dim == k)
    }

    /// Number of k-cells whose affine hull is pinned by hyperplanes alone
    /// (rather than by the simplex boundary). These are the cells Buck's
    /// bound applies to: restricting the arrangement to Δ additionally
    /// creates boundary faces that the bound does not count.
    pub fn pinned_cell_count(&self, k: usize) -> usize {
        let e = self.d - 1;
        self.cells
            .iter()
            .filter(|c| c.dim == k)
            .filter(|c| {
                let normals: Vec<Vec<Rational>> = self
                    .hyperplanes
                    .iter()
                    .zip(&c.signs)
                    .filter(|(_, s)| **s == CellSign::Zero)
                    .map(|(h, _)| h.project(self.d).a)
                    .collect();
                rank(&normals) == e - k
            })
            .count()
    }

    pub fn proper_hyperplane_count(&self) -> usize {
        self.hyperplanes
            .iter()
            .filter(|h| h.classify(self.d) == HyperplaneClass::Proper)
            .count()
    }
}

/// Buck's bound on the number of k-cells of an arrangement of `n`
/// hyperplanes in `R^e`: `C(n, e−k) · Σ_{i=0..k} C(n−e+k, i)`.
pub fn buck_bound(n: usize, e: usize, k: usize) -> BigUint {
    fn binom(n: usize, k: usize) -> BigUint {
        if k > n {
            return BigUint::zero();
        }
        let mut acc = BigUint::one();
        for i in 0..k {
            acc = acc * BigUint::from(n - i) / BigUint::from(i + 1);
        }
        acc
    }
    if e < k {
        return BigUint::zero();
    }
    let mut sum = BigUint::zero();
    let reduced = (n + k).saturating_sub(e);
    for i in 0..=k {
        sum += binom(reduced, i);
    }
    binom(n, e - k) * sum
}

/// All expected-travel-time tie hyperplanes `H_{i,j}`, `i < j`.
/// Degenerate rows (identical or parallel differences) stay in the list
/// marked by their classification; they do not subdivide anything.
pub fn build_travel_time_ties(inst: &Instance) -> Vec<Hyperplane> {
    let m = inst.m();
    let mut out = Vec::with_capacity(m * (m.saturating_sub(1)) / 2);
    for i in 0..m {
        for j in (i + 1)..m {
            let normal: Vec<Rational> = (0..inst.d())
                .map(|s| &inst.travel_times[i][s] - &inst.travel_times[j][s])
                .collect();
            out.push(Hyperplane {
                normal,
                offset: Rational::zero(),
                label: HyperplaneLabel::TravelTimeTie { i, j },
            });
        }
    }
    out
}

/// The cell-local exit-time arrangement: within a full-dimensional cell
/// of the travel-time-tie arrangement the link order is fixed, entry
/// times are linear in the belief, and the conditions `ω_{i,s} = ω_{j,s}`
/// and `ω_{i,s} = T` are affine. The cell is identified by any interior
/// belief. Pairs involving a link that never enters are marked
/// unsatisfiable.
pub fn build_exit_ties(inst: &Instance, cell_rep: &Belief) -> Vec<Hyperplane> {
    let order = travel_time_order(inst, cell_rep);
    let coeffs = entry_time_coefficients(inst, &order);
    let m = inst.m();
    let d = inst.d();
    let mut out = Vec::new();
    for s in 0..d {
        for i in 0..m {
            for j in (i + 1)..m {
                let label = HyperplaneLabel::ExitTie { i, j, s };
                match (&coeffs[i], &coeffs[j]) {
                    (Some(qi), Some(qj)) => {
                        let normal: Vec<Rational> = qi.iter().zip(qj).map(|(a, b)| a - b).collect();
                        let offset = &inst.travel_times[j][s] - &inst.travel_times[i][s];
                        out.push(Hyperplane {
                            normal,
                            offset,
                            label,
                        });
                    }
                    _ => out.push(Hyperplane::unsatisfiable(d, label)),
                }
            }
        }
        for i in 0..m {
            let label = HyperplaneLabel::Horizon { i, s };
            match &coeffs[i] {
                Some(qi) => out.push(Hyperplane {
                    normal: qi.clone(),
                    offset: &inst.horizon - &inst.travel_times[i][s],
                    label,
                }),
                None => out.push(Hyperplane::unsatisfiable(d, label)),
            }
        }
    }
    out
}

/// Link order by expected travel time under `μ`, ties by index.
pub fn travel_time_order(inst: &Instance, mu: &Belief) -> Vec<usize> {
    let tt = expected_travel_times(inst, mu).expect("dimensions match");
    let mut order: Vec<usize> = (0..inst.m()).collect();
    order.sort_by(|&a, &b| tt[a].cmp(&tt[b]).then(a.cmp(&b)));
    order
}

/// Enumerates all cells of the arrangement restricted to the simplex.
pub fn enumerate_on_simplex(hps: &[Hyperplane], d: usize) -> Result<Complex, ArrangementError> {
    enumerate_restricted(hps, d, &[])
}

/// Just the 0-cells of the arrangement on the simplex: every point where
/// `d−1` independent hyperplanes (or simplex facets) meet inside Δ. This
/// avoids the full face enumeration when only the points are needed,
/// e.g. for the multiplicative net.
pub fn enumerate_vertices(
    hps: &[Hyperplane],
    d: usize,
) -> Result<Vec<Vec<Rational>>, ArrangementError> {
    assert!(d >= 1);
    if d > 4 {
        return Err(ArrangementError::UnsupportedDimension(d));
    }
    let e = d - 1;
    if e == 0 {
        return Ok(vec![vec![Rational::one()]]);
    }
    let mut forms: Vec<Form> = hps
        .iter()
        .filter(|h| h.classify(d) == HyperplaneClass::Proper)
        .map(|h| h.project(d))
        .collect();
    for s in 0..d {
        let b = if s < e {
            Rational::zero()
        } else {
            -Rational::one()
        };
        forms.push(Form {
            a: facet_normal(s, e),
            b,
        });
    }
    dedupe_forms(&mut forms);
    let feasible = |x: &[Rational]| {
        x.iter().all(|v| !v.is_negative()) && x.iter().sum::<Rational>() <= Rational::one()
    };
    let mut out: std::collections::BTreeSet<Vec<Rational>> = Default::default();
    let n = forms.len();
    let mut pick = vec![0usize; e];
    fn subsets(
        n: usize,
        k: usize,
        start: usize,
        pick: &mut Vec<usize>,
        depth: usize,
        f: &mut impl FnMut(&[usize]),
    ) {
        if depth == k {
            f(pick);
            return;
        }
        for i in start..n {
            pick[depth] = i;
            subsets(n, k, i + 1, pick, depth + 1, f);
        }
    }
    let mut visit = |idx: &[usize]| {
        let mat: Vec<Vec<Rational>> = idx.iter().map(|&i| forms[i].a.clone()).collect();
        let rhs: Vec<Rational> = idx.iter().map(|&i| forms[i].b.clone()).collect();
        if let Some(x) = solve_square(&mat, &rhs) {
            if feasible(&x) {
                out.insert(x);
            }
        }
    };
    subsets(n, e, 0, &mut pick, 0, &mut visit);
    Ok(out.into_iter().map(|x| lift(&x)).collect())
}

/// All k-cells of the arrangement on the simplex.
pub fn enumerate_cells(
    hps: &[Hyperplane],
    d: usize,
    k: usize,
) -> Result<Vec<Cell>, ArrangementError> {
    Ok(enumerate_on_simplex(hps, d)?
        .cells_of_dim(k)
        .cloned()
        .collect())
}

/// Enumerates the cells of `hps` restricted to the closed region of Δ
/// where each `within` hyperplane keeps the given (nonzero) sign.
pub fn enumerate_restricted(
    hps: &[Hyperplane],
    d: usize,
    within: &[(Hyperplane, CellSign)],
) -> Result<Complex, ArrangementError> {
    assert!(d >= 1);
    if d > 4 {
        return Err(ArrangementError::UnsupportedDimension(d));
    }
    let e = d - 1;

    if e == 0 {
        // the simplex is the single point (1)
        let mu = vec![Rational::one()];
        let ok = within.iter().all(|(h, s)| sign_of(&h.eval(&mu)) == *s);
        let cells = if ok {
            vec![Cell {
                dim: 0,
                signs: hps.iter().map(|h| sign_of(&h.eval(&mu))).collect(),
                facet_signs: vec![CellSign::Pos],
                bound_signs: within.iter().map(|(h, _)| sign_of(&h.eval(&mu))).collect(),
                vertices: vec![mu.clone()],
                rep: mu,
            }]
        } else {
            Vec::new()
        };
        return Ok(Complex {
            hyperplanes: hps.to_vec(),
            cells,
            d,
        });
    }

    // feasible region: simplex facets plus the sign-constrained hyperplanes
    let mut bounds: Vec<Form> = Vec::new();
    for s in 0..e {
        let mut a = vec![Rational::zero(); e];
        a[s] = Rational::one();
        bounds.push(Form {
            a,
            b: Rational::zero(),
        }); // μ_s ≥ 0
    }
    bounds.push(Form {
        a: vec![-Rational::one(); e],
        b: -Rational::one(),
    }); // μ_d = 1 − Σ ≥ 0
    for (h, s) in within {
        let mut f = h.project(d);
        match s {
            CellSign::Pos => {}
            CellSign::Neg => f = f.negate(),
            CellSign::Zero => panic!("restriction signs must be strict"),
        }
        if f.a.iter().all(|v| v.is_zero()) {
            if f.b.is_positive() {
                // constraint violated everywhere
                return Ok(Complex {
                    hyperplanes: hps.to_vec(),
                    cells: Vec::new(),
                    d,
                });
            }
            continue;
        }
        bounds.push(f);
    }

    let mut dividers: Vec<Form> = Vec::new();
    for h in hps {
        if h.classify(d) == HyperplaneClass::Proper {
            dividers.push(h.project(d));
        }
    }
    dedupe_forms(&mut dividers);

    let reps = face_reps(e, &dividers, &bounds);

    // classify representatives into cells by exact sign vectors over the
    // hyperplanes, the simplex facets, and the restriction boundaries
    type SignKey = (Vec<CellSign>, Vec<CellSign>, Vec<CellSign>);
    let mut by_signs: BTreeMap<SignKey, Vec<Rational>> = BTreeMap::new();
    for rep_x in reps {
        let mu = lift(&rep_x);
        let hp_signs: Vec<CellSign> = hps.iter().map(|h| sign_of(&h.eval(&mu))).collect();
        let facet_signs: Vec<CellSign> = mu.iter().map(sign_of).collect();
        let bound_signs: Vec<CellSign> =
            within.iter().map(|(h, _)| sign_of(&h.eval(&mu))).collect();
        by_signs
            .entry((hp_signs, facet_signs, bound_signs))
            .or_insert(mu);
    }

    // vertices are the 0-dimensional faces
    let hp_normals: Vec<Vec<Rational>> = hps.iter().map(|h| h.project(d).a).collect();
    let bound_normals: Vec<Vec<Rational>> = within.iter().map(|(h, _)| h.project(d).a).collect();
    let mut cells: Vec<Cell> = Vec::new();
    for ((hp_signs, facet_signs, bound_signs), mu) in &by_signs {
        let mut zero_normals: Vec<Vec<Rational>> = Vec::new();
        for (n, s) in hp_normals.iter().zip(hp_signs) {
            if *s == CellSign::Zero {
                zero_normals.push(n.clone());
            }
        }
        for (s_idx, s) in facet_signs.iter().enumerate() {
            if *s == CellSign::Zero {
                zero_normals.push(facet_normal(s_idx, e));
            }
        }
        for (n, s) in bound_normals.iter().zip(bound_signs) {
            if *s == CellSign::Zero {
                zero_normals.push(n.clone());
            }
        }
        let dim = e - rank(&zero_normals);
        cells.push(Cell {
            dim,
            signs: hp_signs.clone(),
            facet_signs: facet_signs.clone(),
            bound_signs: bound_signs.clone(),
            vertices: Vec::new(),
            rep: mu.clone(),
        });
    }
    // vertex signs are computed once; compatibility is then sign algebra
    let vertex_points: Vec<Vec<Rational>> = cells
        .iter()
        .filter(|c| c.dim == 0)
        .map(|c| c.rep.clone())
        .collect();
    let vertex_signs: Vec<(Vec<CellSign>, Vec<CellSign>, Vec<CellSign>)> = vertex_points
        .iter()
        .map(|v| {
            (
                hps.iter().map(|h| sign_of(&h.eval(v))).collect(),
                v.iter().map(sign_of).collect(),
                within.iter().map(|(h, _)| sign_of(&h.eval(v))).collect(),
            )
        })
        .collect();
    for cell in &mut cells {
        cell.vertices = vertex_points
            .iter()
            .zip(&vertex_signs)
            .filter(|(_, (hs, fs, bs))| {
                hs.iter().zip(&cell.signs).all(|(a, c)| compatible(*a, *c))
                    && fs
                        .iter()
                        .zip(&cell.facet_signs)
                        .all(|(a, c)| compatible(*a, *c))
                    && bs
                        .iter()
                        .zip(&cell.bound_signs)
                        .all(|(a, c)| compatible(*a, *c))
            })
            .map(|(v, _)| v.clone())
            .collect();
    }
    Ok(Complex {
        hyperplanes: hps.to_vec(),
        cells,
        d,
    })
}

/// μ from simplex coordinates: append `1 − Σ x`.
fn lift(x: &[Rational]) -> Vec<Rational> {
    let mut mu = x.to_vec();
    let last = Rational::one() - x.iter().sum::<Rational>();
    mu.push(last);
    mu
}

fn facet_normal(s: usize, e: usize) -> Vec<Rational> {
    if s < e {
        let mut a = vec![Rational::zero(); e];
        a[s] = Rational::one();
        a
    } else {
        vec![-Rational::one(); e]
    }
}

/// An affine condition `aᵀx = b` (as a divider) or `aᵀx − b ≥ 0` (as a bound).
#[derive(Debug, Clone, PartialEq, Eq)]
struct Form {
    a: Vec<Rational>,
    b: Rational,
}

impl Form {
    fn eval(&self, x: &[Rational]) -> Rational {
        self.a.iter().zip(x).map(|(a, v)| a * v).sum::<Rational>() - &self.b
    }

    fn negate(&self) -> Form {
        Form {
            a: self.a.iter().map(|v| -v).collect(),
            b: -self.b.clone(),
        }
    }

    /// Scales so the first nonzero coefficient is one.
    fn canonical(&self) -> Form {
        let lead = self
            .a
            .iter()
            .find(|v| !v.is_zero())
            .cloned()
            .unwrap_or_else(Rational::one);
        Form {
            a: self.a.iter().map(|v| v / &lead).collect(),
            b: &self.b / &lead,
        }
    }
}

fn dedupe_forms(forms: &mut Vec<Form>) {
    let mut seen = Vec::new();
    forms.retain(|f| {
        let c = f.canonical();
        if seen.contains(&c) {
            false
        } else {
            seen.push(c);
            true
        }
    });
}

/// Representative points of every face of the subdivision of the
/// polytope `{bounds ≥ 0}` by the divider hyperplanes, in `R^e`.
fn face_reps(e: usize, dividers: &[Form], bounds: &[Form]) -> Vec<Vec<Rational>> {
    assert!(e >= 1);
    let feasible = |x: &[Rational]| bounds.iter().all(|g| !g.eval(x).is_negative());
    let mut reps: Vec<Vec<Rational>> = Vec::new();

    if e == 1 {
        let mut points: Vec<Rational> = Vec::new();
        for f in dividers.iter().chain(bounds.iter()) {
            if !f.a[0].is_zero() {
                points.push(&f.b / &f.a[0]);
            }
        }
        points.sort();
        points.dedup();
        points.retain(|p| feasible(std::slice::from_ref(p)));
        for w in points.windows(2) {
            let mid = (&w[0] + &w[1]) / Rational::from_integer(2.into());
            if feasible(std::slice::from_ref(&mid)) {
                reps.push(vec![mid]);
            }
        }
        reps.extend(points.into_iter().map(|p| vec![p]));
        return reps;
    }

    // faces of dimension < e live on some divider or bound flat
    let mut flats: Vec<Form> = dividers.to_vec();
    flats.extend(bounds.iter().cloned());
    dedupe_forms(&mut flats);
    for flat in &flats {
        let Some((x0, basis)) = parameterize(flat, e) else {
            continue;
        };
        let mut sub_dividers = Vec::new();
        let mut sub_bounds = Vec::new();
        let mut infeasible = false;
        for (idx, g) in dividers.iter().chain(bounds.iter()).enumerate() {
            let is_bound = idx >= dividers.len();
            let proj = project_form(g, &x0, &basis);
            if proj.a.iter().all(|v| v.is_zero()) {
                if is_bound && proj.b.is_positive() {
                    infeasible = true; // flat misses the polytope entirely
                    break;
                }
                continue;
            }
            if is_bound {
                sub_bounds.push(proj);
            } else {
                sub_dividers.push(proj);
            }
        }
        if infeasible {
            continue;
        }
        dedupe_forms(&mut sub_dividers);
        for y in face_reps(e - 1, &sub_dividers, &sub_bounds) {
            reps.push(apply_param(&x0, &basis, &y));
        }
    }

    // top-dimensional cells: step off each lower face representative
    // along the normals of the forms it lies on
    let all_forms: Vec<&Form> = dividers.iter().chain(bounds.iter()).collect();
    let lower = reps.clone();
    for r in &lower {
        for f in &all_forms {
            if !f.eval(r).is_zero() {
                continue;
            }
            let dir = &f.a;
            let mut t_min: Option<Rational> = None;
            for g in &all_forms {
                let val = g.eval(r);
                if val.is_zero() {
                    continue;
                }
                let slope: Rational = g.a.iter().zip(dir).map(|(a, v)| a * v).sum();
                if slope.is_zero() {
                    continue;
                }
                let t = (&val / &slope).abs();
                if t_min.as_ref().is_none_or(|m| &t < m) {
                    t_min = Some(t);
                }
            }
            let step = t_min.unwrap_or_else(Rational::one) / Rational::from_integer(2.into());
            for sgn in [Rational::one(), -Rational::one()] {
                let p: Vec<Rational> = r
                    .iter()
                    .zip(dir)
                    .map(|(x, a)| x + &sgn * &step * a)
                    .collect();
                if feasible(&p) {
                    reps.push(p);
                }
            }
        }
    }
    reps
}

/// A point on the flat and a basis of its direction space.
fn parameterize(flat: &Form, e: usize) -> Option<(Vec<Rational>, Vec<Vec<Rational>>)> {
    let pivot = flat.a.iter().position(|v| !v.is_zero())?;
    let mut x0 = vec![Rational::zero(); e];
    x0[pivot] = &flat.b / &flat.a[pivot];
    let mut basis = Vec::with_capacity(e - 1);
    for i in 0..e {
        if i == pivot {
            continue;
        }
        let mut v = vec![Rational::zero(); e];
        v[i] = Rational::one();
        v[pivot] = -&flat.a[i] / &flat.a[pivot];
        basis.push(v);
    }
    Some((x0, basis))
}

fn project_form(g: &Form, x0: &[Rational], basis: &[Vec<Rational>]) -> Form {
    let a: Vec<Rational> = basis
        .iter()
        .map(|v| g.a.iter().zip(v).map(|(gi, vi)| gi * vi).sum())
        .collect();
    Form { a, b: -g.eval(x0) }
}

fn apply_param(x0: &[Rational], basis: &[Vec<Rational>], y: &[Rational]) -> Vec<Rational> {
    let mut x = x0.to_vec();
    for (v, yi) in basis.iter().zip(y) {
        for (xi, vi) in x.iter_mut().zip(v) {
            *xi += yi * vi;
        }
    }
    x
}

/// Rank of a set of rational row vectors.
pub(crate) fn rank(rows: &[Vec<Rational>]) -> usize {
    let mut mat: Vec<Vec<Rational>> = rows.to_vec();
    let mut r = 0;
    let cols = mat.first().map_or(0, |row| row.len());
    for c in 0..cols {
        let Some(pivot) = (r..mat.len()).find(|&i| !mat[i][c].is_zero()) else {
            continue;
        };
        mat.swap(r, pivot);
        let lead = mat[r][c].clone();
        for i in 0..mat.len() {
            if i != r && !mat[i][c].is_zero() {
                let scale = &mat[i][c] / &lead;
                for j in 0..cols {
                    let delta = &scale * &mat[r][j];
                    mat[i][j] -= delta;
                }
            }
        }
        r += 1;
        if r == mat.len() {
            break;
        }
    }
    r
}

/// Solves a square rational system, returning the unique solution if the
/// matrix is invertible.
pub(crate) fn solve_square(mat: &[Vec<Rational>], rhs: &[Rational]) -> Option<Vec<Rational>> {
    let n = mat.len();
    if n == 0 {
        return Some(Vec::new());
    }
    let mut a: Vec<Vec<Rational>> = mat.to_vec();
    let mut b: Vec<Rational> = rhs.to_vec();
    for c in 0..n {
        let pivot = (c..n).find(|&i| !a[i][c].is_zero())?;
        a.swap(c, pivot);
        b.swap(c, pivot);
        let lead = a[c][c].clone();
        for j in 0..n {
            a[c][j] /= &lead;
        }
        b[c] /= &lead;
        for i in 0..n {
            if i != c && !a[i][c].is_zero() {
                let scale = a[i][c].clone();
                for j in 0..n {
                    let delta = &scale * &a[c][j];
                    a[i][j] -= delta;
                }
                let delta = &scale * &b[c];
                b[i] -= delta;
            }
        }
    }
    Some(b)
}
