//! Dense two-phase tableau simplex with Bland's anti-cycling rule.
//!
//! Problems are `min cᵀx` subject to row constraints `a_i x (≥ | = | ≤) b_i`
//! and per-variable bounds `l_j ≤ x_j ≤ u_j` (either side may be infinite).

use crate::error::{Error, Result};
use crate::numerics::DenseMatrix;

const PIVOT_EPS: f64 = 1e-9;
const COST_EPS: f64 = 1e-10;
const NOISE_EPS: f64 = 1e-7;
const MAX_PIVOTS: usize = 200_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RowSense {
    Ge,
    Eq,
    Le,
}

#[derive(Clone, Debug)]
pub struct LpProblem {
    pub objective: Vec<f64>,
    pub constraints: DenseMatrix,
    pub rhs: Vec<f64>,
    pub senses: Vec<RowSense>,
    pub bounds: Vec<(f64, f64)>,
}

impl LpProblem {
    /// `min cᵀx` s.t. rows, `x ≥ 0`.
    pub fn new(
        objective: Vec<f64>,
        constraints: DenseMatrix,
        rhs: Vec<f64>,
        senses: Vec<RowSense>,
    ) -> Result<Self> {
        let nv = objective.len();
        let lp = LpProblem {
            bounds: vec![(0.0, f64::INFINITY); nv],
            objective,
            constraints,
            rhs,
            senses,
        };
        lp.check()?;
        Ok(lp)
    }

    pub fn with_bounds(mut self, bounds: Vec<(f64, f64)>) -> Result<Self> {
        self.bounds = bounds;
        self.check()?;
        Ok(self)
    }

    /// Mark every variable free (`-∞ < x_j < ∞`).
    pub fn free(self) -> Result<Self> {
        let nv = self.objective.len();
        self.with_bounds(vec![(f64::NEG_INFINITY, f64::INFINITY); nv])
    }

    fn check(&self) -> Result<()> {
        let nv = self.objective.len();
        let m = self.rhs.len();
        if self.constraints.rows() != m {
            return Err(Error::Dimension {
                expected: m,
                actual: self.constraints.rows(),
            });
        }
        if m > 0 && self.constraints.cols() != nv {
            return Err(Error::Dimension {
                expected: nv,
                actual: self.constraints.cols(),
            });
        }
        if self.senses.len() != m {
            return Err(Error::Dimension {
                expected: m,
                actual: self.senses.len(),
            });
        }
        if self.bounds.len() != nv {
            return Err(Error::Dimension {
                expected: nv,
                actual: self.bounds.len(),
            });
        }
        if self.bounds.iter().any(|&(l, u)| l > u || l.is_nan() || u.is_nan()) {
            return Err(Error::Domain("variable bounds with lower > upper".into()));
        }
        if self.objective.iter().chain(&self.rhs).any(|x| !x.is_finite()) {
            return Err(Error::Domain("non-finite LP data".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug)]
pub struct LpSolution {
    pub x: Vec<f64>,
    pub value: f64,
    /// One multiplier per constraint row.
    pub duals: Vec<f64>,
    /// `c − Aᵀy`; nonzero only for variables sitting at a bound.
    pub reduced_costs: Vec<f64>,
}

impl LpSolution {
    /// `bᵀy + Σ_j r_j x_j`, which equals the primal value at an optimum.
    pub fn dual_value(&self, lp: &LpProblem) -> f64 {
        let by: f64 = lp.rhs.iter().zip(&self.duals).map(|(b, y)| b * y).sum();
        let rx: f64 = self
            .reduced_costs
            .iter()
            .zip(&self.x)
            .map(|(r, x)| r * x)
            .sum();
        by + rx
    }
}

/// How an original variable is expressed through nonnegative columns.
struct VarMap {
    offset: f64,
    cols: Vec<(usize, f64)>,
}

struct Tableau {
    rows: Vec<Vec<f64>>,
    rhs: Vec<f64>,
    basis: Vec<usize>,
    reduced: Vec<f64>,
    n_struct: usize,
    pivots: usize,
}

impl Tableau {
    fn pivot(&mut self, r: usize, col: usize) {
        let p = self.rows[r][col];
        self.rows[r].iter_mut().for_each(|x| *x /= p);
        self.rhs[r] /= p;
        let prow = self.rows[r].clone();
        let prhs = self.rhs[r];
        for i in 0..self.rows.len() {
            if i == r {
                continue;
            }
            let f = self.rows[i][col];
            if f != 0.0 {
                for (x, pv) in self.rows[i].iter_mut().zip(&prow) {
                    *x -= f * pv;
                }
                self.rows[i][col] = 0.0;
                self.rhs[i] -= f * prhs;
                if self.rhs[i].abs() < 1e-13 {
                    self.rhs[i] = 0.0;
                }
            }
        }
        let f = self.reduced[col];
        if f != 0.0 {
            for (x, pv) in self.reduced.iter_mut().zip(&prow) {
                *x -= f * pv;
            }
            self.reduced[col] = 0.0;
        }
        self.basis[r] = col;
        self.pivots += 1;
    }

    fn set_costs(&mut self, costs: &[f64]) {
        let ncols = costs.len();
        self.reduced = costs.to_vec();
        for (i, &b) in self.basis.iter().enumerate() {
            let cb = costs[b];
            if cb != 0.0 {
                for j in 0..ncols {
                    self.reduced[j] -= cb * self.rows[i][j];
                }
            }
        }
    }

    /// Bland's rule; columns `>= allowed` never enter. A column whose
    /// reduced cost is negative only at roundoff level and which has no
    /// pivot element is skipped rather than reported as a ray.
    fn run(&mut self, allowed: usize) -> Result<()> {
        let scale = self.reduced[..allowed]
            .iter()
            .fold(1.0f64, |m, x| m.max(x.abs()));
        let mut skipped = vec![false; allowed];
        loop {
            if self.pivots > MAX_PIVOTS {
                return Err(Error::Numeric("simplex pivot limit exceeded".into()));
            }
            let Some(col) =
                (0..allowed).find(|&j| !skipped[j] && self.reduced[j] < -COST_EPS * scale)
            else {
                return Ok(());
            };
            let mut leave: Option<(usize, f64)> = None;
            for i in 0..self.rows.len() {
                let a = self.rows[i][col];
                if a > PIVOT_EPS {
                    let ratio = self.rhs[i].max(0.0) / a;
                    leave = match leave {
                        None => Some((i, ratio)),
                        Some((r, best)) => {
                            if ratio < best - 1e-12
                                || (ratio <= best + 1e-12 && self.basis[i] < self.basis[r])
                            {
                                Some((i, ratio))
                            } else {
                                Some((r, best))
                            }
                        }
                    };
                }
            }
            match leave {
                None if self.reduced[col] > -NOISE_EPS * scale => skipped[col] = true,
                None => return Err(Error::Unbounded),
                Some((r, _)) => {
                    self.pivot(r, col);
                    skipped.iter_mut().for_each(|s| *s = false);
                }
            }
        }
    }
}

/// Solve the LP to an optimal basic solution with primal and dual values.
pub fn simplex_solve(lp: &LpProblem) -> Result<LpSolution> {
    lp.check()?;
    let nv = lp.objective.len();
    let m = lp.rhs.len();

    // Variable substitution into nonnegative columns.
    let mut maps = Vec::with_capacity(nv);
    let mut ncols = 0usize;
    let mut bound_rows: Vec<(usize, f64)> = Vec::new();
    for &(l, u) in &lp.bounds {
        let map = if l.is_finite() {
            let c = ncols;
            ncols += 1;
            if u.is_finite() {
                bound_rows.push((c, u - l));
            }
            VarMap {
                offset: l,
                cols: vec![(c, 1.0)],
            }
        } else if u.is_finite() {
            let c = ncols;
            ncols += 1;
            VarMap {
                offset: u,
                cols: vec![(c, -1.0)],
            }
        } else {
            let c = ncols;
            ncols += 2;
            VarMap {
                offset: 0.0,
                cols: vec![(c, 1.0), (c + 1, -1.0)],
            }
        };
        maps.push(map);
    }
    let n_vars_std = ncols;

    // Rows in standard-form coordinates before slacks.
    let total_rows = m + bound_rows.len();
    let mut rows: Vec<Vec<f64>> = Vec::with_capacity(total_rows);
    let mut rhs = Vec::with_capacity(total_rows);
    let mut senses = Vec::with_capacity(total_rows);
    for i in 0..m {
        let mut row = vec![0.0; n_vars_std];
        let mut b = lp.rhs[i];
        for (j, map) in maps.iter().enumerate() {
            let a = lp.constraints[(i, j)];
            if a == 0.0 {
                continue;
            }
            b -= a * map.offset;
            for &(c, s) in &map.cols {
                row[c] += a * s;
            }
        }
        rows.push(row);
        rhs.push(b);
        senses.push(lp.senses[i]);
    }
    for &(c, width) in &bound_rows {
        let mut row = vec![0.0; n_vars_std];
        row[c] = 1.0;
        rows.push(row);
        rhs.push(width);
        senses.push(RowSense::Le);
    }

    // Slack columns, then sign normalization so that rhs ≥ 0.
    let n_slack = senses.iter().filter(|s| **s != RowSense::Eq).count();
    let n_struct = n_vars_std + n_slack;
    let mut flip = vec![1.0; total_rows];
    let mut slack = n_vars_std;
    for i in 0..total_rows {
        rows[i].resize(n_struct + total_rows, 0.0);
        match senses[i] {
            RowSense::Ge => {
                rows[i][slack] = -1.0;
                slack += 1;
            }
            RowSense::Le => {
                rows[i][slack] = 1.0;
                slack += 1;
            }
            RowSense::Eq => {}
        }
        if rhs[i] < 0.0 {
            flip[i] = -1.0;
            rhs[i] = -rhs[i];
            rows[i].iter_mut().for_each(|x| *x = -*x);
        }
        rows[i][n_struct + i] = 1.0;
    }

    let width = n_struct + total_rows;
    let mut t = Tableau {
        rows,
        rhs,
        basis: (n_struct..width).collect(),
        reduced: Vec::new(),
        n_struct,
        pivots: 0,
    };

    // Phase 1: minimize the artificial sum.
    let mut phase1 = vec![0.0; width];
    phase1[n_struct..].iter_mut().for_each(|c| *c = 1.0);
    t.set_costs(&phase1);
    t.run(n_struct)?;
    let infeas: f64 = t
        .basis
        .iter()
        .zip(&t.rhs)
        .filter(|(b, _)| **b >= n_struct)
        .map(|(_, v)| *v)
        .sum();
    let scale = t.rhs.iter().fold(1.0f64, |m, x| m.max(x.abs()));
    if infeas > 1e-8 * scale {
        return Err(Error::Infeasible);
    }
    // Drive zero-level artificials out of the basis where possible.
    for r in 0..total_rows {
        if t.basis[r] >= n_struct {
            if let Some(col) = (0..t.n_struct).find(|&j| t.rows[r][j].abs() > PIVOT_EPS) {
                t.rhs[r] = 0.0;
                t.pivot(r, col);
            }
        }
    }

    // Phase 2.
    let mut costs = vec![0.0; width];
    for (j, map) in maps.iter().enumerate() {
        for &(c, s) in &map.cols {
            costs[c] += lp.objective[j] * s;
        }
    }
    t.set_costs(&costs);
    t.run(n_struct)?;

    let mut xs = vec![0.0; width];
    for (i, &b) in t.basis.iter().enumerate() {
        xs[b] = t.rhs[i].max(0.0);
    }
    let x: Vec<f64> = maps
        .iter()
        .map(|map| map.offset + map.cols.iter().map(|&(c, s)| s * xs[c]).sum::<f64>())
        .collect();
    let value: f64 = lp.objective.iter().zip(&x).map(|(c, x)| c * x).sum();

    // The artificial column of row i holds B⁻¹e_i, so its reduced cost is −y_i.
    let duals: Vec<f64> = (0..m)
        .map(|i| -t.reduced[n_struct + i] * flip[i])
        .collect();
    let aty = if m > 0 {
        lp.constraints.tr_matvec(&duals)?
    } else {
        vec![0.0; nv]
    };
    let reduced_costs = lp.objective.iter().zip(&aty).map(|(c, a)| c - a).collect();

    Ok(LpSolution {
        x,
        value,
        duals,
        reduced_costs,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn rows(r: &[&[f64]]) -> DenseMatrix {
        DenseMatrix::from_rows(&r.iter().map(|x| x.to_vec()).collect::<Vec<_>>()).unwrap()
    }

    /// Enumerate all basic solutions of `min cᵀx, Ax ≥ b, x ≥ 0` in two
    /// variables by intersecting every pair of constraint lines.
    fn brute_2d(c: [f64; 2], a: &[[f64; 2]], b: &[f64]) -> f64 {
        let mut lines: Vec<([f64; 2], f64)> = a.iter().copied().zip(b.iter().copied()).collect();
        lines.push(([1.0, 0.0], 0.0));
        lines.push(([0.0, 1.0], 0.0));
        let mut best = f64::INFINITY;
        for i in 0..lines.len() {
            for j in i + 1..lines.len() {
                let ([a1, b1], r1) = lines[i];
                let ([a2, b2], r2) = lines[j];
                let det = a1 * b2 - a2 * b1;
                if det.abs() < 1e-12 {
                    continue;
                }
                let x = (r1 * b2 - r2 * b1) / det;
                let y = (a1 * r2 - a2 * r1) / det;
                let feasible = lines.iter().all(|([p, q], r)| p * x + q * y >= r - 1e-9);
                if feasible {
                    best = best.min(c[0] * x + c[1] * y);
                }
            }
        }
        best
    }

    #[test]
    fn small_covering_lp() {
        // Oracle: vertices (2,0) → 2 and (0,1) → 1.
        assert_eq!(brute_2d([1.0, 1.0], &[[1.0, 2.0]], &[2.0]), 1.0);
        let lp = LpProblem::new(
            vec![1.0, 1.0],
            rows(&[&[1.0, 2.0]]),
            vec![2.0],
            vec![RowSense::Ge],
        )
        .unwrap();
        let sol = simplex_solve(&lp).unwrap();
        assert!((sol.value - 1.0).abs() < 1e-12);
        assert!((sol.x[0]).abs() < 1e-12 && (sol.x[1] - 1.0).abs() < 1e-12);
        assert!((sol.dual_value(&lp) - sol.value).abs() < 1e-8);
        assert!((sol.duals[0] - 0.5).abs() < 1e-12);
    }

    #[test]
    fn box_with_nonnegative_costs_sits_at_lower() {
        let lp = LpProblem::new(
            vec![1.0, 0.0, 3.0],
            DenseMatrix::zeros(0, 3),
            vec![],
            vec![],
        )
        .unwrap()
        .with_bounds(vec![(0.5, 2.0), (1.0, 1.5), (-1.0, 4.0)])
        .unwrap();
        let sol = simplex_solve(&lp).unwrap();
        assert!((sol.x[0] - 0.5).abs() < 1e-12);
        assert!((sol.x[2] + 1.0).abs() < 1e-12);
        assert!((sol.value - (0.5 - 3.0)).abs() < 1e-12);
        assert!((sol.dual_value(&lp) - sol.value).abs() < 1e-8);
    }

    #[test]
    fn infeasible_and_unbounded() {
        let lp = LpProblem::new(
            vec![1.0],
            rows(&[&[1.0], &[1.0]]),
            vec![1.0, 0.0],
            vec![RowSense::Ge, RowSense::Le],
        )
        .unwrap();
        assert_eq!(simplex_solve(&lp).unwrap_err(), Error::Infeasible);
        let lp = LpProblem::new(vec![-1.0], rows(&[&[1.0]]), vec![1.0], vec![RowSense::Ge])
            .unwrap();
        assert_eq!(simplex_solve(&lp).unwrap_err(), Error::Unbounded);
    }

    #[test]
    fn free_variables_and_equalities() {
        // min x + y s.t. x - y = 1, x + y ≥ -3, free → x + y = -3.
        let lp = LpProblem::new(
            vec![1.0, 1.0],
            rows(&[&[1.0, -1.0], &[1.0, 1.0]]),
            vec![1.0, -3.0],
            vec![RowSense::Eq, RowSense::Ge],
        )
        .unwrap()
        .free()
        .unwrap();
        let sol = simplex_solve(&lp).unwrap();
        assert!((sol.value + 3.0).abs() < 1e-12);
        assert!((sol.dual_value(&lp) - sol.value).abs() < 1e-8);
    }

    #[test]
    fn degenerate_redundant_rows() {
        // Same equality twice plus a degenerate vertex.
        let lp = LpProblem::new(
            vec![1.0, 2.0, 0.0],
            rows(&[&[1.0, 1.0, 1.0], &[1.0, 1.0, 1.0], &[1.0, 0.0, 0.0]]),
            vec![1.0, 1.0, 0.0],
            vec![RowSense::Eq, RowSense::Eq, RowSense::Ge],
        )
        .unwrap();
        let sol = simplex_solve(&lp).unwrap();
        assert!(sol.value.abs() < 1e-12);
        assert!((sol.dual_value(&lp) - sol.value).abs() < 1e-8);
    }

    #[test]
    fn random_lps_satisfy_strong_duality_and_match_vertex_enumeration() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for _ in 0..200 {
            let mrows = rng.random_range(1..5);
            let a: Vec<[f64; 2]> = (0..mrows)
                .map(|_| [rng.random_range(0.0..2.0), rng.random_range(0.0..2.0)])
                .collect();
            let b: Vec<f64> = (0..mrows).map(|_| rng.random_range(-1.0..3.0)).collect();
            let c = [rng.random_range(0.1..2.0), rng.random_range(0.1..2.0)];
            let lp = LpProblem::new(
                c.to_vec(),
                DenseMatrix::from_rows(&a.iter().map(|r| r.to_vec()).collect::<Vec<_>>())
                    .unwrap(),
                b.clone(),
                vec![RowSense::Ge; mrows],
            )
            .unwrap();
            let sol = simplex_solve(&lp).unwrap();
            let oracle = brute_2d(c, &a, &b);
            assert!((sol.value - oracle).abs() < 1e-9, "{} vs {}", sol.value, oracle);
            assert!((sol.dual_value(&lp) - sol.value).abs() < 1e-8);
            assert!(sol.duals.iter().all(|&y| y >= -1e-10));
        }
    }
}
