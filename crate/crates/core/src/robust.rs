//! Max-min saddle solvers for the robust and distributionally robust
//! relaxations
//!
//! ```text
//! max_{Y ∈ elliptope} F(Y),   F(Y) = min_{w ∈ 𝒲} Σ_t w_t c_t(Y).
//! ```
//!
//! Every `c_t` is linear in `Y`, so `F` is concave and the game is
//! convex-concave. The default solver is a cutting-plane method on the
//! matrix side. Cuts are nominal optima `Y_k = argmax Σ w_t c_t(Y)` at
//! weights proposed by a master problem
//!
//! ```text
//! min_{w ∈ 𝒲} max_k Σ_t w_t c_t(Y_k)  =  max_{λ ∈ Δ} F(Σ_k λ_k Y_k).
//! ```
//!
//! The combination `Ȳ = Σ λ_k Y_k` is feasible and `F(Ȳ)` is evaluated by the
//! exact inner oracle, giving a lower bound. Every proposed `w̃` is feasible,
//! so its nominal value `φ(w̃)` is an upper bound. The solver stops when
//! the two bounds agree to `gap_tol`.
//!
//! The plain projected-supergradient method with averaging is kept as an
//! alternative.
//!
//! The Wasserstein game reduces to a robust game over achievable mean
//! weights, because the relaxed objective is linear in the weights.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::instance::{Instance, WeightAssignment};
use crate::numerics::{
    cholesky_gram, dot, simplex_solve, sqrt_psd, DenseMatrix, LpProblem, RowSense,
};
use crate::relaxation::Relaxation;
use crate::sdp::{default_rank, solve_with_starts, GramFactor, SdpConfig, SolveReport};
use crate::uncertainty::{
    ellipsoid_min, metric_table, polyhedral_dual, validate_set, worst_case_weights, InnerSolution,
    Layout, UncertaintySpec,
};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SaddleMethod {
    #[default]
    CuttingPlane,
    Supergradient,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverConfig {
    /// Relative tolerance on `upper − lower`.
    pub gap_tol: f64,
    pub max_iter: usize,
    /// Rank of nominal factors; `None` uses the default.
    pub rank: Option<usize>,
    pub restarts: usize,
    pub seed: u64,
    /// Step constant of the supergradient method (`step / √t`).
    pub step: f64,
    pub method: SaddleMethod,
    /// Tolerance of the inner nominal solves.
    pub sdp_tol: f64,
    pub sdp_max_iter: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            gap_tol: 1e-6,
            max_iter: 500,
            rank: None,
            restarts: 3,
            seed: 0,
            step: 0.5,
            method: SaddleMethod::CuttingPlane,
            sdp_tol: 1e-10,
            sdp_max_iter: 50_000,
        }
    }
}

impl SolverConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::parse("config", e.to_string()))
    }

    pub fn sdp(&self) -> SdpConfig {
        SdpConfig {
            rank: self.rank,
            tol: self.sdp_tol,
            max_iter: self.sdp_max_iter,
            restarts: self.restarts,
            seed: self.seed,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum Worst {
    Weights {
        weights: WeightAssignment,
    },
    Distribution {
        probabilities: Vec<f64>,
        mean: WeightAssignment,
    },
}

impl Worst {
    /// Worst-case weights, or the mean weights of the worst distribution.
    pub fn weights(&self) -> &WeightAssignment {
        match self {
            Worst::Weights { weights } => weights,
            Worst::Distribution { mean, .. } => mean,
        }
    }

    pub fn probabilities(&self) -> Option<&[f64]> {
        match self {
            Worst::Weights { .. } => None,
            Worst::Distribution { probabilities, .. } => Some(probabilities),
        }
    }

    pub fn from_inner(sol: InnerSolution) -> Self {
        match sol.distribution {
            Some(probabilities) => Worst::Distribution {
                probabilities,
                mean: sol.weights,
            },
            None => Worst::Weights {
                weights: sol.weights,
            },
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SaddleSolution {
    pub factor: GramFactor,
    pub worst: Worst,
    /// `F(factor)`: relaxed objective at `factor` against `worst`.
    pub value: f64,
    /// Best certified upper bound on the relaxation optimum.
    pub upper_bound: f64,
    /// `residual` holds the final gap `upper_bound − value`.
    pub report: SolveReport,
}

/// Robust relaxation over any uncertainty set. Wasserstein sets are solved
/// through the mean-weight reduction.
pub fn solve_robust(inst: &Instance, spec: &UncertaintySpec, cfg: &SolverConfig) -> Result<SaddleSolution> {
    validate_set(spec, inst).into_result()?;
    if let UncertaintySpec::Singleton { weights } = spec {
        return solve_nominal(inst, weights, cfg);
    }
    match cfg.method {
        SaddleMethod::CuttingPlane => cutting_plane(inst, spec, cfg),
        SaddleMethod::Supergradient => supergradient(inst, spec, cfg),
    }
}

/// Distributionally robust relaxation over a finite Wasserstein ball.
pub fn solve_dro(inst: &Instance, spec: &UncertaintySpec, cfg: &SolverConfig) -> Result<SaddleSolution> {
    if !spec.is_distributional() {
        return Err(Error::Domain("solve_dro needs a wasserstein set".into()));
    }
    solve_robust(inst, spec, cfg)
}

fn solve_nominal(inst: &Instance, w: &WeightAssignment, cfg: &SolverConfig) -> Result<SaddleSolution> {
    let relax = Relaxation::new(inst);
    let (factor, report) = solve_with_starts(&relax, w.values(), &cfg.sdp(), None)?;
    Ok(SaddleSolution {
        factor,
        worst: Worst::Weights { weights: w.clone() },
        value: report.value,
        upper_bound: report.value,
        report: SolveReport {
            residual: 0.0,
            ..report
        },
    })
}

/// Best-response inner value `F(U)`.
pub fn inner_value(inst: &Instance, spec: &UncertaintySpec, factor: &GramFactor) -> Result<InnerSolution> {
    let relax = Relaxation::new(inst);
    check_factor(&relax, factor)?;
    worst_case_weights(spec, inst, &relax.coefficients(factor))
}

fn check_factor(relax: &Relaxation<'_>, factor: &GramFactor) -> Result<()> {
    if factor.n() != relax.blocks() {
        return Err(Error::Dimension {
            expected: relax.blocks(),
            actual: factor.n(),
        });
    }
    Ok(())
}

/// Dual LP `max bᵀp, Aᵀp = g(U), p ≥ 0` at a fixed factor.
pub fn dual_reformulated_value(inst: &Instance, spec: &UncertaintySpec, factor: &GramFactor) -> Result<f64> {
    let UncertaintySpec::Polyhedral { a, b, .. } = spec else {
        return Err(Error::Domain("dual reformulation needs a polyhedral set".into()));
    };
    let relax = Relaxation::new(inst);
    check_factor(&relax, factor)?;
    let g = spec.layout(inst).coefficients(&relax.coefficients(factor));
    Ok(polyhedral_dual(a, b, &g)?.1)
}

/// `w0ᵀg − √a ‖Q^½ g‖` at a fixed factor, with `g` the coordinate
/// coefficients.
pub fn ellipsoid_reformulated_value(
    inst: &Instance,
    spec: &UncertaintySpec,
    factor: &GramFactor,
) -> Result<f64> {
    let UncertaintySpec::Ellipsoidal { w0, q, a, .. } = spec else {
        return Err(Error::Domain("ellipsoid reformulation needs an ellipsoidal set".into()));
    };
    let relax = Relaxation::new(inst);
    check_factor(&relax, factor)?;
    let g = spec.layout(inst).coefficients(&relax.coefficients(factor));
    let s = sqrt_psd(q)?;
    let sg = s.matvec(&g)?;
    Ok(dot(w0, &g) - a.sqrt() * dot(&sg, &sg).sqrt())
}

/// Factor of `Σ_k λ_k U_kᵀU_k`, compressed to at most `n` rows when possible.
fn combine(factors: &[GramFactor], lambda: &[f64]) -> GramFactor {
    let active: Vec<(usize, f64)> = lambda
        .iter()
        .copied()
        .enumerate()
        .filter(|&(_, l)| l > 1e-12)
        .collect();
    if active.len() == 1 {
        return factors[active[0].0].clone();
    }
    let n = factors[0].n();
    let total: usize = active.iter().map(|&(k, _)| factors[k].rank()).sum();
    let mut stacked = GramFactor::zeros(total, n);
    let mass: f64 = active.iter().map(|&(_, l)| l).sum();
    for i in 0..n {
        let col = stacked.column_mut(i);
        let mut row = 0;
        for &(k, l) in &active {
            let s = (l / mass).sqrt();
            for &x in factors[k].column(i) {
                col[row] = s * x;
                row += 1;
            }
        }
    }
    stacked.normalize_columns();
    if total <= n {
        return stacked;
    }
    match cholesky_gram(&stacked.gram(), 1e-13) {
        Ok(c) => c,
        Err(_) => stacked,
    }
}

struct Master {
    lambda: Vec<f64>,
    proposal: InnerSolution,
}

/// `min_{w ∈ 𝒲} max_k Σ_t w_t c_k,t` and the optimal cut multipliers.
fn solve_master(
    spec: &UncertaintySpec,
    inst: &Instance,
    layout: &Layout,
    cuts: &[Vec<f64>],
) -> Result<Master> {
    match spec {
        UncertaintySpec::Polyhedral { a, b, .. } => {
            let d = layout.dim();
            let k = cuts.len();
            let rows = a.rows() + k;
            let mut m = DenseMatrix::zeros(rows, d + 1);
            let mut rhs = b.clone();
            for i in 0..a.rows() {
                for j in 0..d {
                    m[(i, j)] = a[(i, j)];
                }
            }
            for (r, c) in cuts.iter().enumerate() {
                let g = layout.coefficients(c);
                let row = a.rows() + r;
                for j in 0..d {
                    m[(row, j)] = -g[j];
                }
                m[(row, d)] = 1.0;
                rhs.push(0.0);
            }
            let mut objective = vec![0.0; d + 1];
            objective[d] = 1.0;
            let lp = LpProblem::new(objective, m, rhs, vec![RowSense::Ge; rows])?.free()?;
            let sol = simplex_solve(&lp)?;
            let x = sol.x[..d].to_vec();
            let weights = WeightAssignment::new(layout.weights(&x).iter().map(|v| v.max(0.0)).collect())?;
            Ok(Master {
                lambda: normalize_multipliers(&sol.duals[a.rows()..]),
                proposal: InnerSolution {
                    coords: x,
                    weights,
                    distribution: None,
                    value: sol.value,
                },
            })
        }
        UncertaintySpec::Wasserstein {
            support,
            empirical,
            radius,
            metric,
        } => {
            let dist = metric_table(metric, support)?;
            let s = support.len();
            let nv = s * s + 1;
            let rows = s + 1 + cuts.len();
            let mut m = DenseMatrix::zeros(rows, nv);
            let mut rhs = empirical.clone();
            let mut senses = vec![RowSense::Eq; s];
            for i in 0..s {
                for j in 0..s {
                    m[(j, i * s + j)] = 1.0;
                    m[(s, i * s + j)] = dist[(i, j)];
                }
            }
            rhs.push(*radius);
            senses.push(RowSense::Le);
            for (r, c) in cuts.iter().enumerate() {
                let row = s + 1 + r;
                for i in 0..s {
                    let cost = dot(c, support[i].values());
                    for j in 0..s {
                        m[(row, i * s + j)] = -cost;
                    }
                }
                m[(row, s * s)] = 1.0;
                rhs.push(0.0);
                senses.push(RowSense::Ge);
            }
            let mut objective = vec![0.0; nv];
            objective[s * s] = 1.0;
            let mut bounds = vec![(0.0, f64::INFINITY); nv];
            bounds[s * s] = (f64::NEG_INFINITY, f64::INFINITY);
            let lp = LpProblem::new(objective, m, rhs, senses)?.with_bounds(bounds)?;
            let sol = simplex_solve(&lp)?;
            let p: Vec<f64> = (0..s)
                .map(|i| (0..s).map(|j| sol.x[i * s + j]).sum::<f64>().max(0.0))
                .collect();
            let mut mean = vec![0.0; inst.num_terms()];
            for (pi, sp) in p.iter().zip(support) {
                for (mv, v) in mean.iter_mut().zip(sp.values()) {
                    *mv += pi * v;
                }
            }
            Ok(Master {
                lambda: normalize_multipliers(&sol.duals[s + 1..]),
                proposal: InnerSolution {
                    coords: Vec::new(),
                    weights: WeightAssignment::new(mean)?,
                    distribution: Some(p),
                    value: sol.value,
                },
            })
        }
        UncertaintySpec::Ellipsoidal { w0, q, a, .. } => {
            let g: Vec<Vec<f64>> = cuts.iter().map(|c| layout.coefficients(c)).collect();
            let lambda = ellipsoid_multipliers(w0, q, *a, &g)?;
            let mut mix = vec![0.0; layout.dim()];
            for (l, gk) in lambda.iter().zip(&g) {
                for (m, v) in mix.iter_mut().zip(gk) {
                    *m += l * v;
                }
            }
            let (x, value) = ellipsoid_min(w0, q, *a, &mix)?;
            let weights = WeightAssignment::new(layout.weights(&x).iter().map(|v| v.max(0.0)).collect())?;
            Ok(Master {
                lambda,
                proposal: InnerSolution {
                    coords: x,
                    weights,
                    distribution: None,
                    value,
                },
            })
        }
        UncertaintySpec::Singleton { .. } => unreachable!("singleton sets are solved directly"),
    }
}

fn normalize_multipliers(duals: &[f64]) -> Vec<f64> {
    let clipped: Vec<f64> = duals.iter().map(|d| d.max(0.0)).collect();
    let total: f64 = clipped.iter().sum();
    if total <= 0.0 {
        let mut l = vec![0.0; duals.len()];
        *l.last_mut().expect("at least one cut") = 1.0;
        return l;
    }
    clipped.into_iter().map(|d| d / total).collect()
}

/// Maximize `h(λ) = vᵀλ − √a √(λᵀMλ)` over the simplex, where
/// `v_k = w0ᵀg_k` and `M = GᵀQG`, by accelerated projected gradient.
fn ellipsoid_multipliers(w0: &[f64], q: &DenseMatrix, a: f64, g: &[Vec<f64>]) -> Result<Vec<f64>> {
    let k = g.len();
    if k == 1 {
        return Ok(vec![1.0]);
    }
    let qg: Vec<Vec<f64>> = g.iter().map(|gk| q.matvec(gk)).collect::<Result<_>>()?;
    let v: Vec<f64> = g.iter().map(|gk| dot(w0, gk)).collect();
    let mut m = DenseMatrix::zeros(k, k);
    for i in 0..k {
        for j in i..k {
            let x = dot(&g[i], &qg[j]);
            m[(i, j)] = x;
            m[(j, i)] = x;
        }
    }
    let sa = a.sqrt();
    let h = |l: &[f64]| -> f64 {
        let ml = m.matvec(l).expect("square");
        dot(&v, l) - sa * dot(l, &ml).max(0.0).sqrt()
    };
    let grad = |l: &[f64]| -> Vec<f64> {
        let ml = m.matvec(l).expect("square");
        let quad = dot(l, &ml).max(1e-300).sqrt();
        v.iter().zip(&ml).map(|(vi, mi)| vi - sa * mi / quad).collect()
    };
    let mut x = vec![1.0 / k as f64; k];
    let mut y = x.clone();
    let mut best = x.clone();
    let mut best_h = h(&x);
    let mut t = 1.0f64;
    let mut step = 1.0 / (m.as_slice().iter().fold(0.0f64, |s, e| s.max(e.abs())) * k as f64 + 1e-12).sqrt();
    for _ in 0..4000 {
        let gy = grad(&y);
        let hy = h(&y);
        let mut next;
        loop {
            let moved: Vec<f64> = y.iter().zip(&gy).map(|(yi, gi)| yi + step * gi).collect();
            next = project_simplex(&moved);
            let diff: Vec<f64> = next.iter().zip(&y).map(|(a, b)| a - b).collect();
            let lin = hy + dot(&gy, &diff) - dot(&diff, &diff) / (2.0 * step);
            if h(&next) >= lin - 1e-15 || step < 1e-14 {
                break;
            }
            step *= 0.5;
        }
        let hn = h(&next);
        if hn > best_h {
            best_h = hn;
            best.clone_from(&next);
        }
        let t_next = (1.0 + (1.0 + 4.0 * t * t).sqrt()) / 2.0;
        let momentum = (t - 1.0) / t_next;
        let restart = hn < h(&x);
        y = if restart {
            next.clone()
        } else {
            next.iter().zip(&x).map(|(n, o)| n + momentum * (n - o)).collect()
        };
        let change: f64 = next.iter().zip(&x).map(|(a, b)| (a - b).abs()).sum();
        x = next;
        t = if restart { 1.0 } else { t_next };
        if change < 1e-13 {
            break;
        }
    }
    Ok(best)
}

/// Euclidean projection onto the probability simplex.
fn project_simplex(v: &[f64]) -> Vec<f64> {
    let mut u = v.to_vec();
    u.sort_by(|a, b| b.total_cmp(a));
    let mut acc = 0.0;
    let mut theta = 0.0;
    for (i, ui) in u.iter().enumerate() {
        acc += ui;
        let t = (acc - 1.0) / (i + 1) as f64;
        if ui - t > 0.0 {
            theta = t;
        }
    }
    v.iter().map(|x| (x - theta).max(0.0)).collect()
}

fn converged(upper: f64, lower: f64, tol: f64) -> bool {
    upper - lower <= tol * lower.abs().max(1.0)
}

fn cutting_plane(inst: &Instance, spec: &UncertaintySpec, cfg: &SolverConfig) -> Result<SaddleSolution> {
    let relax = Relaxation::new(inst);
    let layout = spec.layout(inst);
    let sdp = cfg.sdp();
    let warm_cfg = SdpConfig {
        restarts: 1,
        ..sdp.clone()
    };

    let start = worst_case_weights(spec, inst, &vec![1.0; inst.num_terms()])?;
    let (f0, r0) = solve_with_starts(&relax, start.weights.values(), &sdp, None)?;
    let mut upper = r0.value;
    let mut factors = vec![f0];
    let mut cuts = vec![relax.coefficients(&factors[0])];

    let mut best: Option<(GramFactor, InnerSolution)> = None;
    let mut iterations = 0;
    let mut done = false;
    while iterations < cfg.max_iter {
        iterations += 1;
        let master = solve_master(spec, inst, &layout, &cuts)?;
        let factor = combine(&factors, &master.lambda);
        let inner = worst_case_weights(spec, inst, &relax.coefficients(&factor))?;
        if best.as_ref().is_none_or(|(_, b)| inner.value > b.value) {
            best = Some((factor, inner));
        }
        let lower = best.as_ref().expect("set above").1.value;
        if converged(upper, lower, cfg.gap_tol) {
            done = true;
            break;
        }
        let warm = &best.as_ref().expect("set above").0;
        let warm = (warm.rank() == factors[0].rank()).then_some(warm);
        let sdp_k = SdpConfig {
            seed: cfg.seed.wrapping_add(iterations as u64),
            ..warm_cfg.clone()
        };
        let (fk, rk) = solve_with_starts(&relax, master.proposal.weights.values(), &sdp_k, warm)?;
        upper = upper.min(rk.value);
        cuts.push(relax.coefficients(&fk));
        factors.push(fk);
        if converged(upper, lower, cfg.gap_tol) {
            done = true;
            break;
        }
    }
    let (factor, inner) = best.expect("at least one iteration");
    let value = inner.value;
    Ok(SaddleSolution {
        factor,
        worst: Worst::from_inner(inner),
        value,
        upper_bound: upper,
        report: SolveReport {
            value,
            iterations,
            residual: (upper - value).max(0.0),
            converged: done,
        },
    })
}

fn supergradient(inst: &Instance, spec: &UncertaintySpec, cfg: &SolverConfig) -> Result<SaddleSolution> {
    let relax = Relaxation::new(inst);
    let sdp = cfg.sdp();
    let start = worst_case_weights(spec, inst, &vec![1.0; inst.num_terms()])?;
    let (mut u, r0) = solve_with_starts(&relax, start.weights.values(), &sdp, None)?;
    let mut upper = r0.value;
    let rank = cfg.rank.unwrap_or_else(|| default_rank(relax.blocks()));
    let mut g = vec![0.0; u.rank()];
    let mut avg = vec![0.0; inst.num_terms()];
    let mut avg_mass = 0.0;
    let mut best: Option<(GramFactor, InnerSolution)> = None;
    let mut iterations = 0;
    let mut done = false;
    while iterations < cfg.max_iter {
        iterations += 1;
        let inner = worst_case_weights(spec, inst, &relax.coefficients(&u))?;
        let w = inner.weights.values().to_vec();
        if best.as_ref().is_none_or(|(_, b)| inner.value > b.value) {
            best = Some((u.clone(), inner));
        }
        let eta = cfg.step / (iterations as f64).sqrt();
        for (a, x) in avg.iter_mut().zip(&w) {
            *a += eta * x;
        }
        avg_mass += eta;

        // Riemannian supergradient of Σ w_t c_t(U) at the best response.
        let mut dir = GramFactor::zeros(u.rank(), u.n());
        let mut norm = 0.0;
        for b in 0..relax.blocks() {
            relax.block_direction(&u, &w, b, &mut g);
            let radial = dot(&g, u.column(b));
            let col = dir.column_mut(b);
            for ((d, gi), ui) in col.iter_mut().zip(&g).zip(u.column(b)) {
                *d = gi - radial * ui;
                norm += *d * *d;
            }
        }
        let norm = norm.sqrt();
        if norm > 1e-14 {
            for b in 0..relax.blocks() {
                let step: Vec<f64> = dir.column(b).iter().map(|d| eta * d / norm).collect();
                for (c, s) in u.column_mut(b).iter_mut().zip(step) {
                    *c += s;
                }
            }
            u.normalize_columns();
        }

        if iterations % 25 == 0 || iterations == cfg.max_iter {
            let mean: Vec<f64> = avg.iter().map(|a| a / avg_mass).collect();
            let warm = &best.as_ref().expect("set above").0;
            let warm = (warm.rank() == rank).then_some(warm);
            let (_, r) = solve_with_starts(
                &relax,
                &mean,
                &SdpConfig {
                    restarts: 1,
                    ..sdp.clone()
                },
                warm,
            )?;
            upper = upper.min(r.value);
            let lower = best.as_ref().expect("set above").1.value;
            if converged(upper, lower, cfg.gap_tol) {
                done = true;
                break;
            }
        }
    }
    let (factor, inner) = best.expect("at least one iteration");
    let value = inner.value;
    Ok(SaddleSolution {
        factor,
        worst: Worst::from_inner(inner),
        value,
        upper_bound: upper,
        report: SolveReport {
            value,
            iterations,
            residual: (upper - value).max(0.0),
            converged: done,
        },
    })
}
