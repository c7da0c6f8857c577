//! Uncertainty and ambiguity sets over the weights, with exact inner
//! worst-case oracles.
//!
//! Solvers hand the oracles per-term coefficients `c_t` (objective
//! `Σ_t c_t w_t`); they are nonnegative except for relaxed DiCut terms.
//! Polyhedral and ellipsoidal sets live in a coordinate space chosen by
//! [`Coords`]:
//!
//! * `pairs` (Max-Cut default): the vectorized weight matrix restricted to
//!   the edge support. Edge `e = {i, j}` owns coordinates `2e` (`w_ij`) and
//!   `2e + 1` (`w_ji`); its effective weight is their mean and each
//!   coordinate carries coefficient `c_e / 2`, i.e. `¼(1 − y_i y_j)` for a
//!   cut. So `¼ (1 − y)ᵀ w` over coordinates equals `½ Σ_{i<j} w_ij (1 − y_i y_j)`.
//! * `terms`: one coordinate per edge, arc or clause.
//!
//! Wasserstein support points are per-term weight vectors.

use std::fmt;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::instance::{Instance, ProblemKind, WeightAssignment};
use crate::numerics::{
    dot, min_eigenvalue, simplex_solve, solve_spd, sqrt_psd, DenseMatrix, LpProblem, RowSense,
};
use crate::rng::unit_vector;

const FEAS_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Coords {
    Pairs,
    Terms,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Metric {
    /// `"l1"`: `d(s_i, s_j) = ‖s_i − s_j‖₁`.
    Named(String),
    Matrix(DenseMatrix),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum UncertaintySpec {
    Singleton {
        weights: WeightAssignment,
    },
    /// `{x : A x ≥ b}`.
    Polyhedral {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        coords: Option<Coords>,
        a: DenseMatrix,
        b: Vec<f64>,
    },
    /// `{x : (x − w0)ᵀ Q⁻¹ (x − w0) ≤ a}`.
    Ellipsoidal {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        coords: Option<Coords>,
        w0: Vec<f64>,
        q: DenseMatrix,
        a: f64,
    },
    /// Distributions on a finite support within transport distance `radius`
    /// of the empirical distribution.
    Wasserstein {
        support: Vec<WeightAssignment>,
        empirical: Vec<f64>,
        radius: f64,
        metric: Metric,
    },
}

/// Coordinate layout of a set relative to an instance.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Layout {
    pub coords: Coords,
    pub terms: usize,
}

impl Layout {
    pub fn dim(&self) -> usize {
        match self.coords {
            Coords::Pairs => 2 * self.terms,
            Coords::Terms => self.terms,
        }
    }

    /// Per-term coefficients → coordinate coefficients.
    pub fn coefficients(&self, c: &[f64]) -> Vec<f64> {
        match self.coords {
            Coords::Pairs => c.iter().flat_map(|&x| [x / 2.0, x / 2.0]).collect(),
            Coords::Terms => c.to_vec(),
        }
    }

    /// Coordinates → effective per-term weights.
    pub fn weights(&self, x: &[f64]) -> Vec<f64> {
        match self.coords {
            Coords::Pairs => x.chunks(2).map(|p| (p[0] + p[1]) / 2.0).collect(),
            Coords::Terms => x.to_vec(),
        }
    }

    /// Per-term weights → coordinates (symmetric duplication for pairs).
    pub fn coordinates(&self, w: &[f64]) -> Vec<f64> {
        match self.coords {
            Coords::Pairs => w.iter().flat_map(|&x| [x, x]).collect(),
            Coords::Terms => w.to_vec(),
        }
    }
}

/// Exact minimizer of the inner problem.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InnerSolution {
    /// Minimizer in the set's own coordinates (empty for singleton and
    /// Wasserstein sets).
    pub coords: Vec<f64>,
    /// Effective per-term weights (mean weights for Wasserstein sets).
    pub weights: WeightAssignment,
    /// Worst-case distribution over the support (Wasserstein only).
    pub distribution: Option<Vec<f64>>,
    pub value: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Violation {
    Dimension { what: &'static str, expected: usize, actual: usize },
    Empty,
    Unbounded,
    NegativeReachable { coord: usize, min: f64 },
    NotPositiveDefinite { min_eigenvalue: f64 },
    NonPositiveLevel(f64),
    PairsOnNonMaxcut,
    BadDistribution(String),
    BadMetric(String),
    NegativeRadius(f64),
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::Dimension { what, expected, actual } => {
                write!(f, "{what}: expected dimension {expected}, got {actual}")
            }
            Violation::Empty => write!(f, "set is empty"),
            Violation::Unbounded => write!(f, "set is unbounded"),
            Violation::NegativeReachable { coord, min } => {
                write!(f, "coordinate {coord} reaches negative value {min}")
            }
            Violation::NotPositiveDefinite { min_eigenvalue } => {
                write!(f, "shape matrix not positive definite (min eigenvalue {min_eigenvalue:e})")
            }
            Violation::NonPositiveLevel(a) => write!(f, "ellipsoid level a = {a} must be positive"),
            Violation::PairsOnNonMaxcut => {
                write!(f, "pair coordinates are only defined for maxcut instances")
            }
            Violation::BadDistribution(m) => write!(f, "empirical distribution: {m}"),
            Violation::BadMetric(m) => write!(f, "metric: {m}"),
            Violation::NegativeRadius(r) => write!(f, "radius {r} is negative"),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn into_result(self) -> Result<()> {
        if self.is_ok() {
            Ok(())
        } else {
            let msg: Vec<String> = self.violations.iter().map(|v| v.to_string()).collect();
            Err(Error::Domain(format!("invalid uncertainty set: {}", msg.join("; "))))
        }
    }
}

impl UncertaintySpec {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::parse("spec", e.to_string()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("spec serializes")
    }

    pub fn kind_name(&self) -> &'static str {
        match self {
            UncertaintySpec::Singleton { .. } => "singleton",
            UncertaintySpec::Polyhedral { .. } => "polyhedral",
            UncertaintySpec::Ellipsoidal { .. } => "ellipsoidal",
            UncertaintySpec::Wasserstein { .. } => "wasserstein",
        }
    }

    pub fn is_distributional(&self) -> bool {
        matches!(self, UncertaintySpec::Wasserstein { .. })
    }

    pub fn layout(&self, inst: &Instance) -> Layout {
        let requested = match self {
            UncertaintySpec::Polyhedral { coords, .. }
            | UncertaintySpec::Ellipsoidal { coords, .. } => *coords,
            _ => Some(Coords::Terms),
        };
        let coords = requested.unwrap_or(if inst.kind() == ProblemKind::MaxCut {
            Coords::Pairs
        } else {
            Coords::Terms
        });
        Layout {
            coords,
            terms: inst.num_terms(),
        }
    }

    /// Box `l ≤ x ≤ u` written as a polyhedron `[I; −I] x ≥ [l; −u]`.
    pub fn boxed(coords: Option<Coords>, lower: &[f64], upper: &[f64]) -> Result<Self> {
        if lower.len() != upper.len() {
            return Err(Error::Dimension {
                expected: lower.len(),
                actual: upper.len(),
            });
        }
        let d = lower.len();
        let mut a = DenseMatrix::zeros(2 * d, d);
        for i in 0..d {
            a[(i, i)] = 1.0;
            a[(d + i, i)] = -1.0;
        }
        let b = lower.iter().copied().chain(upper.iter().map(|u| -u)).collect();
        Ok(UncertaintySpec::Polyhedral { coords, a, b })
    }
}

fn l1_metric(support: &[WeightAssignment]) -> DenseMatrix {
    let k = support.len();
    let mut d = DenseMatrix::zeros(k, k);
    for i in 0..k {
        for j in 0..k {
            d[(i, j)] = support[i]
                .values()
                .iter()
                .zip(support[j].values())
                .map(|(a, b)| (a - b).abs())
                .sum();
        }
    }
    d
}

/// Resolve a metric specification to a full distance table.
pub fn metric_table(metric: &Metric, support: &[WeightAssignment]) -> Result<DenseMatrix> {
    match metric {
        Metric::Named(name) if name == "l1" => Ok(l1_metric(support)),
        Metric::Named(name) => Err(Error::parse("metric", format!("unknown metric `{name}`"))),
        Metric::Matrix(m) => Ok(m.clone()),
    }
}

/// Check that a set is well formed for `inst`.
pub fn validate_set(spec: &UncertaintySpec, inst: &Instance) -> ValidationReport {
    let mut v = Vec::new();
    let layout = spec.layout(inst);
    if layout.coords == Coords::Pairs && inst.kind() != ProblemKind::MaxCut {
        v.push(Violation::PairsOnNonMaxcut);
    }
    let dim = layout.dim();
    match spec {
        UncertaintySpec::Singleton { weights } => {
            if weights.len() != inst.num_terms() {
                v.push(Violation::Dimension {
                    what: "weights",
                    expected: inst.num_terms(),
                    actual: weights.len(),
                });
            }
        }
        UncertaintySpec::Polyhedral { a, b, .. } => {
            if a.cols() != dim || a.rows() != b.len() {
                v.push(Violation::Dimension {
                    what: "A",
                    expected: dim,
                    actual: a.cols(),
                });
                return ValidationReport { violations: v };
            }
            validate_polyhedron(a, b, &mut v);
        }
        UncertaintySpec::Ellipsoidal { w0, q, a, .. } => {
            if w0.len() != dim || q.rows() != dim || q.cols() != dim {
                v.push(Violation::Dimension {
                    what: "w0/Q",
                    expected: dim,
                    actual: w0.len(),
                });
                return ValidationReport { violations: v };
            }
            if *a <= 0.0 || !a.is_finite() {
                v.push(Violation::NonPositiveLevel(*a));
            }
            match min_eigenvalue(q) {
                Ok(l) if l > 0.0 => {}
                Ok(l) => v.push(Violation::NotPositiveDefinite { min_eigenvalue: l }),
                Err(_) => v.push(Violation::NotPositiveDefinite {
                    min_eigenvalue: f64::NAN,
                }),
            }
            for i in 0..dim {
                let min = w0[i] - (a.max(0.0) * q[(i, i)].max(0.0)).sqrt();
                if min < -FEAS_TOL {
                    v.push(Violation::NegativeReachable { coord: i, min });
                }
            }
        }
        UncertaintySpec::Wasserstein {
            support,
            empirical,
            radius,
            metric,
        } => {
            if support.is_empty() {
                v.push(Violation::BadDistribution("empty support".into()));
                return ValidationReport { violations: v };
            }
            for s in support {
                if s.len() != inst.num_terms() {
                    v.push(Violation::Dimension {
                        what: "support point",
                        expected: inst.num_terms(),
                        actual: s.len(),
                    });
                }
            }
            if empirical.len() != support.len() {
                v.push(Violation::Dimension {
                    what: "empirical",
                    expected: support.len(),
                    actual: empirical.len(),
                });
            } else if empirical.iter().any(|&p| p < 0.0 || !p.is_finite()) {
                v.push(Violation::BadDistribution("negative probability".into()));
            } else if (empirical.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
                v.push(Violation::BadDistribution("probabilities do not sum to 1".into()));
            }
            if *radius < 0.0 || !radius.is_finite() {
                v.push(Violation::NegativeRadius(*radius));
            }
            match metric_table(metric, support) {
                Err(e) => v.push(Violation::BadMetric(e.to_string())),
                Ok(d) => {
                    let k = support.len();
                    if d.rows() != k || d.cols() != k {
                        v.push(Violation::BadMetric(format!("expected {k}×{k} table")));
                    } else {
                        for i in 0..k {
                            if d[(i, i)] != 0.0 {
                                v.push(Violation::BadMetric(format!("d({i},{i}) ≠ 0")));
                            }
                            for j in 0..k {
                                if d[(i, j)] < 0.0 || (d[(i, j)] - d[(j, i)]).abs() > 1e-12 {
                                    v.push(Violation::BadMetric(format!(
                                        "d({i},{j}) negative or asymmetric"
                                    )));
                                }
                            }
                        }
                    }
                }
            }
        }
    }
    ValidationReport { violations: v }
}

fn polyhedron_lp(a: &DenseMatrix, b: &[f64], objective: Vec<f64>) -> Result<LpProblem> {
    LpProblem::new(
        objective,
        a.clone(),
        b.to_vec(),
        vec![RowSense::Ge; b.len()],
    )?
    .free()
}

fn validate_polyhedron(a: &DenseMatrix, b: &[f64], v: &mut Vec<Violation>) {
    let dim = a.cols();
    if polyhedron_lp(a, b, vec![0.0; dim])
        .and_then(|lp| simplex_solve(&lp))
        .is_err()
    {
        v.push(Violation::Empty);
        return;
    }
    let mut nonneg = true;
    for i in 0..dim {
        let mut e = vec![0.0; dim];
        e[i] = 1.0;
        match polyhedron_lp(a, b, e).and_then(|lp| simplex_solve(&lp)) {
            Ok(s) if s.value >= -FEAS_TOL => {}
            Ok(s) => {
                nonneg = false;
                v.push(Violation::NegativeReachable {
                    coord: i,
                    min: s.value,
                })
            }
            Err(_) => {
                nonneg = false;
                v.push(Violation::NegativeReachable {
                    coord: i,
                    min: f64::NEG_INFINITY,
                })
            }
        }
    }
    // With every coordinate nonnegative, boundedness reduces to bounding Σx.
    if nonneg {
        match polyhedron_lp(a, b, vec![-1.0; dim]).and_then(|lp| simplex_solve(&lp)) {
            Ok(_) => {}
            Err(_) => v.push(Violation::Unbounded),
        }
    } else if polyhedron_lp(a, b, vec![-1.0; dim])
        .and_then(|lp| simplex_solve(&lp))
        .is_err()
    {
        v.push(Violation::Unbounded);
    }
}

/// `min gᵀx` over `{A x ≥ b}`.
pub fn polyhedral_min(a: &DenseMatrix, b: &[f64], g: &[f64]) -> Result<(Vec<f64>, f64)> {
    let lp = polyhedron_lp(a, b, g.to_vec())?;
    let sol = simplex_solve(&lp)?;
    Ok((sol.x, sol.value))
}

/// Dual of the polyhedral inner problem: `max bᵀp` s.t. `Aᵀp = g`, `p ≥ 0`,
/// solved as its own LP.
pub fn polyhedral_dual(a: &DenseMatrix, b: &[f64], g: &[f64]) -> Result<(Vec<f64>, f64)> {
    if g.len() != a.cols() {
        return Err(Error::Dimension {
            expected: a.cols(),
            actual: g.len(),
        });
    }
    let lp = LpProblem::new(
        b.iter().map(|x| -x).collect(),
        a.transpose(),
        g.to_vec(),
        vec![RowSense::Eq; g.len()],
    )?;
    match simplex_solve(&lp) {
        Ok(sol) => Ok((sol.x, -sol.value)),
        Err(Error::Infeasible) => Err(Error::Unbounded),
        Err(Error::Unbounded) => Err(Error::Infeasible),
        Err(e) => Err(e),
    }
}

/// Closed-form minimizer of `gᵀx` over the ellipsoid
/// `(x − w0)ᵀ Q⁻¹ (x − w0) ≤ a`: `x* = w0 − √a · Qg / √(gᵀQg)`.
pub fn ellipsoid_min(w0: &[f64], q: &DenseMatrix, a: f64, g: &[f64]) -> Result<(Vec<f64>, f64)> {
    let qg = q.matvec(g)?;
    let quad = dot(g, &qg);
    if quad <= 0.0 {
        return Ok((w0.to_vec(), dot(g, w0)));
    }
    let scale = a.sqrt() / quad.sqrt();
    let x: Vec<f64> = w0.iter().zip(&qg).map(|(w, v)| w - scale * v).collect();
    Ok((x, dot(g, w0) - (a * quad).sqrt()))
}

/// `(x − w0)ᵀ Q⁻¹ (x − w0)`.
pub fn ellipsoid_level(w0: &[f64], q: &DenseMatrix, x: &[f64]) -> Result<f64> {
    let d: Vec<f64> = x.iter().zip(w0).map(|(a, b)| a - b).collect();
    let z = solve_spd(q, &d)?;
    Ok(dot(&d, &z))
}

/// Cheapest distribution within transport budget `radius` of `empirical`,
/// from the coupling LP over `K_ij` (`i`: new point, `j`: empirical point).
pub fn transport_min(
    costs: &[f64],
    empirical: &[f64],
    metric: &DenseMatrix,
    radius: f64,
) -> Result<Vec<f64>> {
    let k = costs.len();
    if radius == 0.0 || costs.iter().all(|&c| c == costs[0]) {
        return Ok(empirical.to_vec());
    }
    let nv = k * k;
    let mut a = DenseMatrix::zeros(k + 1, nv);
    let mut b = empirical.to_vec();
    let mut senses = vec![RowSense::Eq; k];
    for i in 0..k {
        for j in 0..k {
            a[(j, i * k + j)] = 1.0;
            a[(k, i * k + j)] = metric[(i, j)];
        }
    }
    b.push(radius);
    senses.push(RowSense::Le);
    let objective = (0..nv).map(|v| costs[v / k]).collect();
    let lp = LpProblem::new(objective, a, b, senses)?;
    let sol = simplex_solve(&lp).map_err(|e| match e {
        Error::Infeasible => Error::Numeric("transport LP infeasible: check the metric".into()),
        other => other,
    })?;
    Ok((0..k)
        .map(|i| (0..k).map(|j| sol.x[i * k + j]).sum::<f64>().max(0.0))
        .collect())
}

/// Optimal transport cost between two distributions on the same support.
pub fn transport_distance(p: &[f64], q: &[f64], metric: &DenseMatrix) -> Result<f64> {
    let k = p.len();
    let mut a = DenseMatrix::zeros(2 * k, k * k);
    for i in 0..k {
        for j in 0..k {
            a[(i, i * k + j)] = 1.0;
            a[(k + j, i * k + j)] = 1.0;
        }
    }
    let b: Vec<f64> = p.iter().chain(q).copied().collect();
    let objective = (0..k * k).map(|v| metric[(v / k, v % k)]).collect();
    let lp = LpProblem::new(objective, a, b, vec![RowSense::Eq; 2 * k])?;
    Ok(simplex_solve(&lp)?.value)
}

fn check_terms(inst: &Instance, c: &[f64]) -> Result<()> {
    if c.len() != inst.num_terms() {
        return Err(Error::Dimension {
            expected: inst.num_terms(),
            actual: c.len(),
        });
    }
    if let Some(pos) = c.iter().position(|&x| !x.is_finite()) {
        return Err(Error::Domain(format!("coefficient {pos} is not finite")));
    }
    Ok(())
}

/// Exact minimizer of `Σ_t c_t w_t` over the set (mean weights for
/// Wasserstein sets).
pub fn worst_case_weights(
    spec: &UncertaintySpec,
    inst: &Instance,
    c: &[f64],
) -> Result<InnerSolution> {
    check_terms(inst, c)?;
    let layout = spec.layout(inst);
    match spec {
        UncertaintySpec::Singleton { weights } => Ok(InnerSolution {
            coords: Vec::new(),
            weights: weights.clone(),
            distribution: None,
            value: dot(c, weights.values()),
        }),
        UncertaintySpec::Polyhedral { a, b, .. } => {
            let g = layout.coefficients(c);
            let (x, value) = polyhedral_min(a, b, &g)?;
            let x: Vec<f64> = x.into_iter().map(|v| if v.abs() < 1e-14 { 0.0 } else { v }).collect();
            let weights = WeightAssignment::new(layout.weights(&x).iter().map(|v| v.max(0.0)).collect())?;
            Ok(InnerSolution {
                coords: x,
                weights,
                distribution: None,
                value,
            })
        }
        UncertaintySpec::Ellipsoidal { w0, q, a, .. } => {
            let g = layout.coefficients(c);
            let (x, value) = ellipsoid_min(w0, q, *a, &g)?;
            let weights = WeightAssignment::new(layout.weights(&x).iter().map(|v| v.max(0.0)).collect())?;
            Ok(InnerSolution {
                coords: x,
                weights,
                distribution: None,
                value,
            })
        }
        UncertaintySpec::Wasserstein { .. } => worst_case_mean(spec, c),
    }
}

/// Worst-case distribution over a finite Wasserstein ball.
pub fn worst_case_mean(spec: &UncertaintySpec, c: &[f64]) -> Result<InnerSolution> {
    let UncertaintySpec::Wasserstein {
        support,
        empirical,
        radius,
        metric,
    } = spec
    else {
        return Err(Error::Domain("worst_case_mean needs a wasserstein set".into()));
    };
    let costs: Vec<f64> = support.iter().map(|s| dot(c, s.values())).collect();
    let d = metric_table(metric, support)?;
    let p = transport_min(&costs, empirical, &d, *radius)?;
    let terms = support[0].len();
    let mut mean = vec![0.0; terms];
    for (pi, s) in p.iter().zip(support) {
        for (m, v) in mean.iter_mut().zip(s.values()) {
            *m += pi * v;
        }
    }
    let value = p.iter().zip(&costs).map(|(a, b)| a * b).sum();
    Ok(InnerSolution {
        coords: Vec::new(),
        weights: WeightAssignment::new(mean)?,
        distribution: Some(p),
        value,
    })
}

/// Dual LP value of the polyhedral inner problem at per-term coefficients `c`.
pub fn dual_polyhedral_value(spec: &UncertaintySpec, inst: &Instance, c: &[f64]) -> Result<f64> {
    check_terms(inst, c)?;
    let UncertaintySpec::Polyhedral { a, b, .. } = spec else {
        return Err(Error::Domain("dual value needs a polyhedral set".into()));
    };
    let g = spec.layout(inst).coefficients(c);
    Ok(polyhedral_dual(a, b, &g)?.1)
}

/// Whether a candidate (coordinates or distribution) lies in the set.
pub fn contains(spec: &UncertaintySpec, sol: &InnerSolution, tol: f64) -> Result<bool> {
    Ok(match spec {
        UncertaintySpec::Singleton { weights } => weights
            .values()
            .iter()
            .zip(sol.weights.values())
            .all(|(a, b)| (a - b).abs() <= tol),
        UncertaintySpec::Polyhedral { a, b, .. } => {
            let ax = a.matvec(&sol.coords)?;
            ax.iter().zip(b).all(|(l, r)| *l >= r - tol)
        }
        UncertaintySpec::Ellipsoidal { w0, q, a, .. } => {
            ellipsoid_level(w0, q, &sol.coords)? <= a * (1.0 + tol) + tol
        }
        UncertaintySpec::Wasserstein {
            support,
            empirical,
            radius,
            metric,
        } => {
            let Some(p) = &sol.distribution else {
                return Ok(false);
            };
            let d = metric_table(metric, support)?;
            let mass: f64 = p.iter().sum();
            (mass - 1.0).abs() <= tol
                && p.iter().all(|&x| x >= -tol)
                && transport_distance(p, empirical, &d)? <= radius + tol
        }
    })
}

/// Random feasible point (or distribution) of the set.
pub fn sample_feasible<R: Rng + ?Sized>(
    spec: &UncertaintySpec,
    inst: &Instance,
    rng: &mut R,
) -> Result<InnerSolution> {
    let terms = inst.num_terms();
    let random_costs = |rng: &mut R| -> Vec<f64> { (0..terms).map(|_| rng.random::<f64>()).collect() };
    match spec {
        UncertaintySpec::Singleton { .. } => worst_case_weights(spec, inst, &vec![0.0; terms]),
        UncertaintySpec::Polyhedral { a, b, .. } => {
            let layout = spec.layout(inst);
            let dim = layout.dim();
            let mut mix = vec![0.0; dim];
            let lambdas: Vec<f64> = (0..3).map(|_| rng.random::<f64>() + 1e-3).collect();
            let total: f64 = lambdas.iter().sum();
            for lam in lambdas {
                let g: Vec<f64> = (0..dim).map(|_| rng.random_range(-1.0..1.0)).collect();
                let (x, _) = polyhedral_min(a, b, &g)?;
                for (m, v) in mix.iter_mut().zip(&x) {
                    *m += lam / total * v;
                }
            }
            let weights = WeightAssignment::new(layout.weights(&mix).iter().map(|v| v.max(0.0)).collect())?;
            Ok(InnerSolution {
                coords: mix,
                weights,
                distribution: None,
                value: 0.0,
            })
        }
        UncertaintySpec::Ellipsoidal { w0, q, a, .. } => {
            let layout = spec.layout(inst);
            let dim = layout.dim();
            let s = sqrt_psd(q)?;
            let dir = unit_vector(rng, dim);
            let r = rng.random::<f64>().powf(1.0 / dim as f64) * a.sqrt();
            let step = s.matvec(&dir)?;
            let x: Vec<f64> = w0.iter().zip(&step).map(|(w, d)| w + r * d).collect();
            let weights = WeightAssignment::new(layout.weights(&x).iter().map(|v| v.max(0.0)).collect())?;
            Ok(InnerSolution {
                coords: x,
                weights,
                distribution: None,
                value: 0.0,
            })
        }
        UncertaintySpec::Wasserstein {
            support, empirical, ..
        } => {
            let mut p = empirical.clone();
            let mut used = 1.0;
            for _ in 0..2 {
                let c = random_costs(rng);
                let worst = worst_case_mean(spec, &c)?;
                let lam = rng.random::<f64>();
                used += lam;
                for (pi, qi) in p.iter_mut().zip(worst.distribution.as_ref().expect("distribution")) {
                    *pi += lam * qi;
                }
            }
            p.iter_mut().for_each(|x| *x /= used);
            let mut mean = vec![0.0; terms];
            for (pi, s) in p.iter().zip(support) {
                for (m, v) in mean.iter_mut().zip(s.values()) {
                    *m += pi * v;
                }
            }
            Ok(InnerSolution {
                coords: Vec::new(),
                weights: WeightAssignment::new(mean)?,
                distribution: Some(p),
                value: 0.0,
            })
        }
    }
}
