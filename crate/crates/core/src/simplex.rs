//! Exact rational simplex for small dense linear programs in standard
//! form: maximize `cᵀx` subject to `Ax = b`, `x ≥ 0`.
//!
//! Two-phase tableau method, Dantzig pricing with Bland's anti-cycling
//! rule under degeneracy, so termination is guaranteed and every pivot
//! is exact. Redundant equality rows are detected at the end of phase
//! one and dropped. The problems solved here have a handful of rows and
//! at most a few hundred columns, so a dense tableau is the right tool.

use crate::model::Rational;
use num_traits::{One, Signed, Zero};

#[derive(Debug, Clone)]
pub struct StandardLp {
    /// Objective coefficients, one per variable (maximized).
    pub objective: Vec<Rational>,
    /// Equality rows of `A`.
    pub rows: Vec<Vec<Rational>>,
    /// Right-hand side `b`.
    pub rhs: Vec<Rational>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum LpOutcome {
    Optimal {
        x: Vec<Rational>,
        objective: Rational,
    },
    Infeasible,
    Unbounded,
}

struct Tableau {
    /// `rows[i]` holds the coefficients of all columns in basis row `i`.
    rows: Vec<Vec<Rational>>,
    rhs: Vec<Rational>,
    basis: Vec<usize>,
    columns: usize,
}

impl Tableau {
    fn pivot(&mut self, row: usize, col: usize) {
        let factor = self.rows[row][col].clone();
        debug_assert!(!factor.is_zero());
        for v in self.rows[row].iter_mut() {
            *v /= &factor;
        }
        self.rhs[row] /= &factor;
        for i in 0..self.rows.len() {
            if i == row || self.rows[i][col].is_zero() {
                continue;
            }
            let scale = self.rows[i][col].clone();
            for j in 0..self.columns {
                let delta = &scale * &self.rows[row][j];
                self.rows[i][j] -= delta;
            }
            let delta = &scale * &self.rhs[row];
            self.rhs[i] -= delta;
        }
        self.basis[row] = col;
    }

    /// Runs simplex for `max cᵀx` over the allowed columns: Dantzig's
    /// rule while progress is made, Bland's rule after a stretch of
    /// degenerate pivots so termination stays guaranteed. Returns false
    /// when the problem is unbounded.
    fn run(&mut self, cost: &[Rational], allowed: usize) -> bool {
        let stall_limit = self.rows.len() + allowed + 16;
        let mut stalled = 0usize;
        loop {
            let bland = stalled > stall_limit;
            let mut entering: Option<(usize, Rational)> = None;
            for j in 0..allowed {
                if self.basis.contains(&j) {
                    continue;
                }
                // reduced cost c_j − c_B B⁻¹ A_j
                let mut reduced = cost[j].clone();
                for (i, &b) in self.basis.iter().enumerate() {
                    if !cost[b].is_zero() {
                        reduced -= &cost[b] * &self.rows[i][j];
                    }
                }
                if reduced.is_positive() {
                    if bland {
                        entering = Some((j, reduced));
                        break;
                    }
                    if entering.as_ref().is_none_or(|(_, best)| reduced > *best) {
                        entering = Some((j, reduced));
                    }
                }
            }
            let Some((col, _)) = entering else {
                return true;
            };
            let mut leaving: Option<(usize, Rational)> = None;
            for i in 0..self.rows.len() {
                if self.rows[i][col].is_positive() {
                    let ratio = &self.rhs[i] / &self.rows[i][col];
                    let better = match &leaving {
                        None => true,
                        Some((best_i, best)) => {
                            ratio < *best || (ratio == *best && self.basis[i] < self.basis[*best_i])
                        }
                    };
                    if better {
                        leaving = Some((i, ratio));
                    }
                }
            }
            let Some((row, ratio)) = leaving else {
                return false;
            };
            if ratio.is_zero() {
                stalled += 1;
            } else {
                stalled = 0;
            }
            self.pivot(row, col);
        }
    }
}

/// Solves `max cᵀx` subject to `Ax = b`, `x ≥ 0`.
pub fn maximize(lp: &StandardLp) -> LpOutcome {
    let n = lp.objective.len();
    let m = lp.rows.len();
    assert_eq!(lp.rhs.len(), m);
    for row in &lp.rows {
        assert_eq!(row.len(), n);
    }
    if m == 0 {
        if lp.objective.iter().any(|c| c.is_positive()) {
            return LpOutcome::Unbounded;
        }
        return LpOutcome::Optimal {
            x: vec![Rational::zero(); n],
            objective: Rational::zero(),
        };
    }

    // phase one with one artificial per row, rhs made non-negative
    let mut rows = Vec::with_capacity(m);
    let mut rhs = Vec::with_capacity(m);
    for i in 0..m {
        let mut row = lp.rows[i].clone();
        let mut b = lp.rhs[i].clone();
        if b.is_negative() {
            for v in row.iter_mut() {
                *v = -v.clone();
            }
            b = -b;
        }
        row.extend((0..m).map(|j| {
            if j == i {
                Rational::one()
            } else {
                Rational::zero()
            }
        }));
        rows.push(row);
        rhs.push(b);
    }
    let mut tab = Tableau {
        rows,
        rhs,
        basis: (n..n + m).collect(),
        columns: n + m,
    };
    let mut phase1 = vec![Rational::zero(); n + m];
    for c in phase1.iter_mut().skip(n) {
        *c = -Rational::one();
    }
    let bounded = tab.run(&phase1, n + m);
    debug_assert!(bounded, "phase one is always bounded");
    let infeas: Rational = tab
        .basis
        .iter()
        .enumerate()
        .filter(|(_, &b)| b >= n)
        .map(|(i, _)| tab.rhs[i].clone())
        .sum();
    if !infeas.is_zero() {
        return LpOutcome::Infeasible;
    }

    // drive remaining artificials out of the basis; all-zero rows are redundant
    let mut drop_rows = Vec::new();
    for i in 0..tab.rows.len() {
        if tab.basis[i] < n {
            continue;
        }
        match (0..n).find(|&j| !tab.rows[i][j].is_zero()) {
            Some(j) => tab.pivot(i, j),
            None => drop_rows.push(i),
        }
    }
    for &i in drop_rows.iter().rev() {
        tab.rows.remove(i);
        tab.rhs.remove(i);
        tab.basis.remove(i);
    }

    let mut phase2 = lp.objective.clone();
    phase2.extend(vec![Rational::zero(); m]);
    if !tab.run(&phase2, n) {
        return LpOutcome::Unbounded;
    }

    let mut x = vec![Rational::zero(); n];
    for (i, &b) in tab.basis.iter().enumerate() {
        if b < n {
            x[b] = tab.rhs[i].clone();
        }
    }
    let objective = x.iter().zip(&lp.objective).map(|(v, c)| v * c).sum();
    LpOutcome::Optimal { x, objective }
}

/// Finds any `x ≥ 0` with `Ax = b`, if one exists.
pub fn feasible_point(rows: &[Vec<Rational>], rhs: &[Rational]) -> Option<Vec<Rational>> {
    let n = rows.first().map_or(0, |r| r.len());
    let lp = StandardLp {
        objective: vec![Rational::zero(); n],
        rows: rows.to_vec(),
        rhs: rhs.to_vec(),
    };
    match maximize(&lp) {
        LpOutcome::Optimal { x, .. } => Some(x),
        _ => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{rat, ratio};

    fn r(vals: &[(i64, i64)]) -> Vec<Rational> {
        vals.iter().map(|&(n, d)| ratio(n, d)).collect()
    }

    #[test]
    fn picks_better_vertex() {
        // max x + y s.t. x + 2y = 4
        let lp = StandardLp {
            objective: r(&[(1, 1), (1, 1)]),
            rows: vec![r(&[(1, 1), (2, 1)])],
            rhs: vec![rat(4)],
        };
        assert_eq!(
            maximize(&lp),
            LpOutcome::Optimal {
                x: vec![rat(4), rat(0)],
                objective: rat(4)
            }
        );
    }

    #[test]
    fn solves_with_slack_columns() {
        // max 3x + 2y s.t. x + y ≤ 4, x ≤ 3 (slacks appended)
        let lp = StandardLp {
            objective: r(&[(3, 1), (2, 1), (0, 1), (0, 1)]),
            rows: vec![
                r(&[(1, 1), (1, 1), (1, 1), (0, 1)]),
                r(&[(1, 1), (0, 1), (0, 1), (1, 1)]),
            ],
            rhs: vec![rat(4), rat(3)],
        };
        match maximize(&lp) {
            LpOutcome::Optimal { x, objective } => {
                assert_eq!(objective, rat(11));
                assert_eq!(x[0], rat(3));
                assert_eq!(x[1], rat(1));
            }
            other => panic!("unexpected outcome {other:?}"),
        }
    }

    #[test]
    fn detects_infeasible() {
        let lp = StandardLp {
            objective: r(&[(1, 1)]),
            rows: vec![r(&[(1, 1)]), r(&[(1, 1)])],
            rhs: vec![rat(1), rat(2)],
        };
        assert_eq!(maximize(&lp), LpOutcome::Infeasible);
    }

    #[test]
    fn detects_unbounded() {
        // max x − y s.t. x − y = 0 … then x free to grow? no: x = y keeps
        // objective 0; use max x s.t. x − y = 1 instead (x = y + 1 grows).
        let lp = StandardLp {
            objective: r(&[(1, 1), (0, 1)]),
            rows: vec![r(&[(1, 1), (-1, 1)])],
            rhs: vec![rat(1)],
        };
        assert_eq!(maximize(&lp), LpOutcome::Unbounded);
    }

    #[test]
    fn tolerates_redundant_rows() {
        // duplicated constraint row
        let lp = StandardLp {
            objective: r(&[(1, 1), (1, 1)]),
            rows: vec![r(&[(1, 1), (2, 1)]), r(&[(1, 1), (2, 1)])],
            rhs: vec![rat(4), rat(4)],
        };
        assert_eq!(
            maximize(&lp),
            LpOutcome::Optimal {
                x: vec![rat(4), rat(0)],
                objective: rat(4)
            }
        );
    }

    #[test]
    fn handles_negative_rhs() {
        // −x − y = −2 is x + y = 2
        let lp = StandardLp {
            objective: r(&[(1, 1), (0, 1)]),
            rows: vec![r(&[(-1, 1), (-1, 1)])],
            rhs: vec![rat(-2)],
        };
        assert_eq!(
            maximize(&lp),
            LpOutcome::Optimal {
                x: vec![rat(2), rat(0)],
                objective: rat(2)
            }
        );
    }

    #[test]
    fn feasibility_probe() {
        let rows = vec![r(&[(1, 1), (1, 1)])];
        let point = feasible_point(&rows, &[rat(1)]).unwrap();
        assert_eq!(&point[0] + &point[1], rat(1));
        assert!(feasible_point(&rows, &[rat(-1)]).is_none());
    }

    #[test]
    fn exact_fractional_solution() {
        // max y s.t. 3y = 1
        let lp = StandardLp {
            objective: r(&[(0, 1), (1, 1)]),
            rows: vec![r(&[(0, 1), (3, 1)])],
            rhs: vec![rat(1)],
        };
        assert_eq!(
            maximize(&lp),
            LpOutcome::Optimal {
                x: vec![rat(0), ratio(1, 3)],
                objective: ratio(1, 3)
            }
        );
    }
}
