//! Randomized rounding schemes and the closed-form probabilities and ratios
//! that certify them.

use std::f64::consts::PI;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::instance::{Cut, Instance, ProblemKind, WeightAssignment};
use crate::numerics::{dot, min_eigenvalue, DenseMatrix};
use crate::relaxation::Relaxation;
use crate::rng::{stream, unit_vector, Domain};
use crate::sdp::GramFactor;

/// Ratio constant of the uniform hyperplane rounding.
pub const ALPHA: f64 = 0.878;
/// Ratio constant of the uniform DiCut rounding.
pub const BETA: f64 = 0.796;
/// Crossover above which the large-cut bound beats `ALPHA`.
pub const GAMMA: f64 = 0.84458;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    #[default]
    Uniform,
    DicutUniform,
    AllequalBiased,
    SignPsd,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RoundConfig {
    pub seed: u64,
    pub trials: usize,
    pub scheme: Scheme,
}

impl Default for RoundConfig {
    fn default() -> Self {
        RoundConfig {
            seed: 0,
            trials: 100,
            scheme: Scheme::Uniform,
        }
    }
}

impl RoundConfig {
    fn check(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::Domain("trials must be at least 1".into()));
        }
        Ok(())
    }
}

/// Signs `sgn(u_b · r)` of every column for draw `index` (ties → +1).
pub fn hyperplane_signs(u: &GramFactor, seed: u64, index: u64) -> Vec<i8> {
    let mut rng = stream(seed, Domain::Hyperplane, index);
    let r = unit_vector(&mut rng, u.rank());
    (0..u.n())
        .map(|b| if dot(u.column(b), &r) >= 0.0 { 1 } else { -1 })
        .collect()
}

/// One uniform hyperplane rounding of the columns (draw 0 of `cfg.seed`).
pub fn hyperplane_round(u: &GramFactor, cfg: &RoundConfig) -> Cut {
    Cut::new(hyperplane_signs(u, cfg.seed, 0)).expect("signs are ±1")
}

/// Rounded assignment of an instance for draw `index`: plain hyperplane
/// signs for Max-Cut, sides relative to `u_0` for DiCut.
pub fn round_instance(inst: &Instance, u: &GramFactor, seed: u64, index: u64) -> Cut {
    let relax = Relaxation::new(inst);
    relax.signs_to_cut(&hyperplane_signs(u, seed, index))
}

/// Best of `cfg.trials` roundings under weights `w`, with its value. Draws
/// are evaluated in parallel; ties keep the lowest draw index.
pub fn round_best(inst: &Instance, u: &GramFactor, w: &WeightAssignment, cfg: &RoundConfig) -> Result<(Cut, f64)> {
    cfg.check()?;
    let relax = Relaxation::new(inst);
    if u.n() != relax.blocks() {
        return Err(Error::Dimension {
            expected: relax.blocks(),
            actual: u.n(),
        });
    }
    let draws: Vec<(Cut, f64)> = (0..cfg.trials as u64)
        .into_par_iter()
        .map(|t| {
            let y = round_instance(inst, u, cfg.seed, t);
            let v = inst.value(&y, w).expect("dimensions checked");
            (y, v)
        })
        .collect();
    let mut best = 0;
    for (t, d) in draws.iter().enumerate() {
        if d.1 > draws[best].1 {
            best = t;
        }
    }
    Ok(draws.into_iter().nth(best).expect("trials ≥ 1"))
}

fn angle(a: &[f64], b: &[f64]) -> f64 {
    dot(a, b).clamp(-1.0, 1.0).acos()
}

/// `Σ_{ij} w_ij arccos(u_i·u_j)/π`: exact expected cut of uniform
/// hyperplane rounding. Signed weights are accepted.
pub fn expected_cut_exact(inst: &Instance, u: &GramFactor, w: &WeightAssignment) -> Result<f64> {
    check_kind(inst, ProblemKind::MaxCut, u, w, inst.n())?;
    Ok(inst
        .edges()
        .iter()
        .zip(w.values())
        .map(|(e, wt)| wt * angle(u.column(e.tail), u.column(e.head)) / PI)
        .sum())
}

/// Exact expected directed cut: arc `i → j` is cut with probability
/// `(θ_0j + θ_ij − θ_0i) / 2π`, block 0 being the reference vector.
pub fn expected_dicut_exact(inst: &Instance, u: &GramFactor, w: &WeightAssignment) -> Result<f64> {
    check_kind(inst, ProblemKind::DiCut, u, w, inst.n() + 1)?;
    Ok(inst
        .edges()
        .iter()
        .zip(w.values())
        .map(|(e, wt)| wt * dicut_pair_prob_exact(u.column(0), u.column(e.tail + 1), u.column(e.head + 1)))
        .sum())
}

/// Expected value of one uniform rounding for Max-Cut or DiCut.
pub fn expected_value_exact(inst: &Instance, u: &GramFactor, w: &WeightAssignment) -> Result<f64> {
    match inst.kind() {
        ProblemKind::MaxCut => expected_cut_exact(inst, u, w),
        ProblemKind::DiCut => expected_dicut_exact(inst, u, w),
        ProblemKind::AllEqual => Err(Error::Domain(
            "allequal has no closed-form hyperplane expectation; use expected_allequal_exact".into(),
        )),
    }
}

fn check_kind(inst: &Instance, kind: ProblemKind, u: &GramFactor, w: &WeightAssignment, blocks: usize) -> Result<()> {
    if inst.kind() != kind {
        return Err(Error::Domain(format!("expected a {kind} instance, got {}", inst.kind())));
    }
    if u.n() != blocks {
        return Err(Error::Dimension {
            expected: blocks,
            actual: u.n(),
        });
    }
    if w.len() != inst.num_terms() {
        return Err(Error::Dimension {
            expected: inst.num_terms(),
            actual: w.len(),
        });
    }
    Ok(())
}

/// `(arccos(t)/π) / ((1 − t)/2)`. The ratio grows without bound as `t → 1`,
/// so `t = 1` returns `+∞`.
pub fn alpha_ratio(t: f64) -> Result<f64> {
    if !(-1.0..=1.0).contains(&t) {
        return Err(Error::Domain(format!("alpha_ratio argument {t} outside [-1, 1]")));
    }
    if t == 1.0 {
        return Ok(f64::INFINITY);
    }
    Ok((t.acos() / PI) / ((1.0 - t) / 2.0))
}

fn check_unit(v: &[f64]) -> Result<()> {
    let n = dot(v, v).sqrt();
    if (n - 1.0).abs() > 1e-9 {
        return Err(Error::Domain(format!("vector has norm {n}, expected 1")));
    }
    Ok(())
}

/// Probability that one uniform hyperplane puts all three vectors on the
/// same side: `1 − (θ_ij + θ_ik + θ_jk) / 2π`.
pub fn dicut_triple_prob(ui: &[f64], uj: &[f64], uk: &[f64]) -> Result<f64> {
    check_unit(ui)?;
    check_unit(uj)?;
    check_unit(uk)?;
    Ok((1.0 - (angle(ui, uj) + angle(ui, uk) + angle(uj, uk)) / (2.0 * PI)).max(0.0))
}

/// `¼(1 + u_0·u_i − u_0·u_j − u_i·u_j)`: the relaxed DiCut coefficient.
pub fn dicut_coefficient(u0: &[f64], ui: &[f64], uj: &[f64]) -> f64 {
    (1.0 + dot(u0, ui) - dot(u0, uj) - dot(ui, uj)) / 4.0
}

/// `P(sgn u_i·r = sgn u_0·r ≠ sgn u_j·r)` under uniform `r`.
pub fn dicut_pair_prob_exact(u0: &[f64], ui: &[f64], uj: &[f64]) -> f64 {
    ((angle(u0, uj) + angle(ui, uj) - angle(u0, ui)) / (2.0 * PI)).max(0.0)
}

/// A rounding rule for DiCut seen through the probability that arc
/// `i → j` is cut, given the reference vector `u_0`.
pub trait PairProbability: Sync {
    /// Estimate and standard error for one pair, using random stream
    /// `index` of `seed`.
    fn estimate(&self, u0: &[f64], ui: &[f64], uj: &[f64], trials: usize, seed: u64, index: u64) -> (f64, f64);
}

/// Monte-Carlo estimate under the uniform hyperplane.
#[derive(Clone, Copy, Debug, Default)]
pub struct UniformHyperplane;

impl PairProbability for UniformHyperplane {
    fn estimate(&self, u0: &[f64], ui: &[f64], uj: &[f64], trials: usize, seed: u64, index: u64) -> (f64, f64) {
        let mut rng = stream(seed, Domain::RatioSearch, index);
        let mut hits = 0usize;
        for _ in 0..trials {
            let r = unit_vector(&mut rng, u0.len());
            let s0 = dot(u0, &r) >= 0.0;
            if (dot(ui, &r) >= 0.0) == s0 && (dot(uj, &r) >= 0.0) != s0 {
                hits += 1;
            }
        }
        let p = hits as f64 / trials as f64;
        (p, (p * (1.0 - p) / trials as f64).sqrt())
    }
}

/// Closed form of the uniform hyperplane (zero error).
#[derive(Clone, Copy, Debug, Default)]
pub struct UniformExact;

impl PairProbability for UniformExact {
    fn estimate(&self, u0: &[f64], ui: &[f64], uj: &[f64], _: usize, _: u64, _: u64) -> (f64, f64) {
        (dicut_pair_prob_exact(u0, ui, uj), 0.0)
    }
}

/// Whether `(u_0, u_i, u_j)` satisfies the four triangle inequalities
/// `±u_0·u_i ± u_0·u_j ± u_i·u_j ≥ −1` (even number of minus signs).
pub fn dicut_pair_feasible(u0: &[f64], ui: &[f64], uj: &[f64]) -> bool {
    let (a, b, c) = (dot(u0, ui), dot(u0, uj), dot(ui, uj));
    let tol = 1e-12;
    a + b + c >= -1.0 - tol
        && a - b - c >= -1.0 - tol
        && -a + b - c >= -1.0 - tol
        && -a - b + c >= -1.0 - tol
}

/// `points` pairs `(u_i, u_j)` in ℝ³ feasible with `u_0 = e_1`, by
/// rejection sampling.
pub fn dicut_feasible_grid(points: usize, seed: u64) -> Vec<(Vec<f64>, Vec<f64>)> {
    let u0 = [1.0, 0.0, 0.0];
    let mut rng = stream(seed, Domain::RatioSearch, u64::from(u32::MAX));
    let mut grid = Vec::with_capacity(points);
    while grid.len() < points {
        let ui = unit_vector(&mut rng, 3);
        let uj = unit_vector(&mut rng, 3);
        if dicut_pair_feasible(&u0, &ui, &uj) {
            grid.push((ui, uj));
        }
    }
    grid
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RatioSearch {
    pub min_ratio: f64,
    /// Standard error of the ratio at the minimizing pair.
    pub stderr: f64,
    pub argmin: usize,
    pub evaluated: usize,
    /// Pairs dropped because the relaxed coefficient vanishes.
    pub excluded: usize,
}

/// `min ℙ(u_i, u_j) / ¼(1 + u_0·u_i − u_0·u_j − u_i·u_j)` over the grid.
pub fn dicut_biased_ratio_search(
    u0: &[f64],
    grid: &[(Vec<f64>, Vec<f64>)],
    prob: &dyn PairProbability,
    cfg: &RoundConfig,
) -> Result<RatioSearch> {
    cfg.check()?;
    check_unit(u0)?;
    if grid.is_empty() {
        return Err(Error::Domain("empty ratio-search grid".into()));
    }
    for (ui, uj) in grid {
        check_unit(ui)?;
        check_unit(uj)?;
        if !dicut_pair_feasible(u0, ui, uj) {
            return Err(Error::Domain("grid pair violates the triangle inequalities".into()));
        }
    }
    let ratios: Vec<Option<(f64, f64)>> = grid
        .par_iter()
        .enumerate()
        .map(|(k, (ui, uj))| {
            let den = dicut_coefficient(u0, ui, uj);
            if den <= 1e-12 {
                return None;
            }
            let (p, se) = prob.estimate(u0, ui, uj, cfg.trials, cfg.seed, k as u64);
            Some((p / den, se / den))
        })
        .collect();
    let mut best: Option<(usize, f64, f64)> = None;
    for (k, r) in ratios.iter().enumerate() {
        if let Some((ratio, se)) = *r {
            if best.is_none_or(|(_, b, _)| ratio < b) {
                best = Some((k, ratio, se));
            }
        }
    }
    let excluded = ratios.iter().filter(|r| r.is_none()).count();
    let (argmin, min_ratio, stderr) =
        best.ok_or_else(|| Error::Domain("every grid pair has a zero denominator".into()))?;
    Ok(RatioSearch {
        min_ratio,
        stderr,
        argmin,
        evaluated: grid.len() - excluded,
        excluded,
    })
}

fn check_arity(k: usize) -> Result<()> {
    if k < 2 {
        return Err(Error::Domain(format!("arity {k} must be at least 2")));
    }
    Ok(())
}

/// `P(x_i = +1) = (1 + √(2/k) z_i) / 2`.
pub fn biased_probabilities(z: &[i8], k: usize) -> Result<Vec<f64>> {
    check_arity(k)?;
    let b = (2.0 / k as f64).sqrt();
    Ok(z.iter().map(|&zi| (1.0 + b * zi as f64) / 2.0).collect())
}

/// Independent biased assignment for draw `index`.
pub fn allequal_round_indexed(z: &[i8], k: usize, seed: u64, index: u64) -> Result<Cut> {
    let probs = biased_probabilities(z, k)?;
    let mut rng = stream(seed, Domain::Biased, index);
    Cut::new(
        probs
            .iter()
            .map(|&p| if rng.random::<f64>() < p { 1 } else { -1 })
            .collect(),
    )
}

/// One biased assignment (draw 0 of `cfg.seed`).
pub fn allequal_round(z: &[i8], k: usize, cfg: &RoundConfig) -> Result<Cut> {
    if z.iter().any(|&s| s != 1 && s != -1) {
        return Err(Error::Domain("sign vector entries must be ±1".into()));
    }
    allequal_round_indexed(z, k, cfg.seed, 0)
}

/// Exact expected satisfied weight of the biased assignment built from `z`.
pub fn expected_allequal_exact(inst: &Instance, z: &[i8], w: &WeightAssignment) -> Result<f64> {
    let k = inst
        .arity()
        .ok_or_else(|| Error::Domain("expected an allequal instance".into()))?;
    if z.len() != inst.n() {
        return Err(Error::Dimension {
            expected: inst.n(),
            actual: z.len(),
        });
    }
    let probs = biased_probabilities(z, k)?;
    let mut total = 0.0;
    for (clause, wt) in inst.clauses().iter().zip(w.values()) {
        // Literal signs per distinct variable; conflicting signs never agree.
        let mut seen: Vec<(usize, f64)> = Vec::new();
        let mut conflict = false;
        for l in &clause.literals {
            match seen.iter().find(|(v, _)| *v == l.var) {
                Some(&(_, s)) if s != l.sign() => conflict = true,
                Some(_) => {}
                None => seen.push((l.var, l.sign())),
            }
        }
        if conflict {
            continue;
        }
        let (mut all_true, mut all_false) = (1.0, 1.0);
        for &(v, s) in &seen {
            let p_true = if s > 0.0 { probs[v] } else { 1.0 - probs[v] };
            all_true *= p_true;
            all_false *= 1.0 - p_true;
        }
        total += wt * (all_true + all_false);
    }
    Ok(total)
}

/// `A = Σ_C w_C a_C a_Cᵀ` with `a_C = Σ_{l∈C} σ_l e_{v(l)}`.
pub fn allequal_matrix(inst: &Instance, w: &WeightAssignment) -> Result<DenseMatrix> {
    if inst.kind() != ProblemKind::AllEqual {
        return Err(Error::Domain("expected an allequal instance".into()));
    }
    let n = inst.n();
    let mut a = DenseMatrix::zeros(n, n);
    for (clause, wt) in inst.clauses().iter().zip(w.values()) {
        let mut v = vec![0.0; n];
        for l in &clause.literals {
            v[l.var] += l.sign();
        }
        for i in 0..n {
            if v[i] == 0.0 {
                continue;
            }
            for j in 0..n {
                a[(i, j)] += wt * v[i] * v[j];
            }
        }
    }
    Ok(a)
}

fn quadratic_signs(a: &DenseMatrix, z: &[i8]) -> f64 {
    let n = z.len();
    let mut s = 0.0;
    for i in 0..n {
        let row = a.row(i);
        let mut acc = 0.0;
        for j in 0..n {
            acc += row[j] * z[j] as f64;
        }
        s += z[i] as f64 * acc;
    }
    s
}

/// Hyperplane signs `z` with `zᵀAz ≥ (2/π)⟨A, UᵀU⟩`, keeping the best of
/// `cfg.trials` draws and drawing more batches until the bound holds.
pub fn sign_round_psd(a: &DenseMatrix, u: &GramFactor, cfg: &RoundConfig) -> Result<Vec<i8>> {
    cfg.check()?;
    let n = u.n();
    if a.rows() != n || a.cols() != n {
        return Err(Error::Dimension {
            expected: n,
            actual: a.rows(),
        });
    }
    let scale = a.as_slice().iter().fold(1.0f64, |m, x| m.max(x.abs()));
    if a.max_asymmetry() > 1e-9 * scale || min_eigenvalue(a)? < -1e-8 * scale {
        return Err(Error::NotPsd {
            pivot: 0,
            value: min_eigenvalue(a)?,
        });
    }
    let mut inner = 0.0;
    for i in 0..n {
        for j in 0..n {
            inner += a[(i, j)] * u.dot(i, j);
        }
    }
    let target = 2.0 / PI * inner;
    let slack = 1e-12 * scale * (n * n) as f64;
    let mut best: Option<(Vec<i8>, f64)> = None;
    for batch in 0..100u64 {
        let base = batch * cfg.trials as u64;
        let draws: Vec<(Vec<i8>, f64)> = (base..base + cfg.trials as u64)
            .into_par_iter()
            .map(|t| {
                let z = hyperplane_signs(u, cfg.seed, t);
                let v = quadratic_signs(a, &z);
                (z, v)
            })
            .collect();
        for d in draws {
            if best.as_ref().is_none_or(|b| d.1 > b.1) {
                best = Some(d);
            }
        }
        let (z, v) = best.as_ref().expect("trials ≥ 1");
        if *v >= target - slack {
            return Ok(z.clone());
        }
    }
    Err(Error::Numeric(format!(
        "sign rounding missed the (2/π) bound after {} draws; is A PSD?",
        100 * cfg.trials
    )))
}

/// Full AllEqual pipeline: sign rounding on `A(w)`, then the biased
/// assignment of draw `index`.
pub fn allequal_pipeline(inst: &Instance, u: &GramFactor, w: &WeightAssignment, cfg: &RoundConfig) -> Result<Vec<i8>> {
    let a = allequal_matrix(inst, w)?;
    sign_round_psd(&a, u, cfg)
}

impl Scheme {
    /// Default scheme of a problem kind.
    pub fn for_kind(kind: ProblemKind) -> Self {
        match kind {
            ProblemKind::MaxCut => Scheme::Uniform,
            ProblemKind::DiCut => Scheme::DicutUniform,
            ProblemKind::AllEqual => Scheme::AllequalBiased,
        }
    }

    fn accepts(self, kind: ProblemKind) -> bool {
        matches!(
            (self, kind),
            (Scheme::Uniform, ProblemKind::MaxCut)
                | (Scheme::DicutUniform, ProblemKind::DiCut)
                | (Scheme::AllequalBiased | Scheme::SignPsd, ProblemKind::AllEqual)
        )
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RoundOutcome {
    pub scheme: Scheme,
    pub best: Cut,
    /// Value of `best` under the rounding weights.
    pub best_value: f64,
    /// Exact expectation of a single draw under the rounding weights.
    pub expected: f64,
    /// Sign vector of the PSD rounding step (AllEqual only).
    pub signs: Option<Vec<i8>>,
}

/// Round a relaxed solution with `cfg.scheme` (which must suit the problem
/// kind) and keep the best of `cfg.trials` draws under weights `w`.
pub fn round_solution(inst: &Instance, u: &GramFactor, w: &WeightAssignment, cfg: &RoundConfig) -> Result<RoundOutcome> {
    cfg.check()?;
    if !cfg.scheme.accepts(inst.kind()) {
        return Err(Error::Domain(format!(
            "scheme {:?} does not apply to {} instances",
            cfg.scheme,
            inst.kind()
        )));
    }
    if inst.kind() != ProblemKind::AllEqual {
        let (best, best_value) = round_best(inst, u, w, cfg)?;
        return Ok(RoundOutcome {
            scheme: cfg.scheme,
            best,
            best_value,
            expected: expected_value_exact(inst, u, w)?,
            signs: None,
        });
    }
    let z = allequal_pipeline(inst, u, w, cfg)?;
    if cfg.scheme == Scheme::SignPsd {
        let best = Cut::new(z.clone())?;
        let v = inst.value(&best, w)?;
        return Ok(RoundOutcome {
            scheme: cfg.scheme,
            best,
            best_value: v,
            expected: v,
            signs: Some(z),
        });
    }
    let k = inst.arity().expect("allequal instances have an arity");
    let draws: Vec<(Cut, f64)> = (0..cfg.trials as u64)
        .into_par_iter()
        .map(|t| {
            let x = allequal_round_indexed(&z, k, cfg.seed, t)?;
            let v = inst.value(&x, w)?;
            Ok((x, v))
        })
        .collect::<Result<_>>()?;
    let mut best = 0;
    for (t, d) in draws.iter().enumerate() {
        if d.1 > draws[best].1 {
            best = t;
        }
    }
    let (best, best_value) = draws.into_iter().nth(best).expect("trials ≥ 1");
    Ok(RoundOutcome {
        scheme: cfg.scheme,
        best,
        best_value,
        expected: expected_allequal_exact(inst, &z, w)?,
        signs: Some(z),
    })
}

/// `h(Ã)/Ã` with `h(t) = arccos(1 − 2t)/π`.
pub fn large_cut_ratio(a_tilde: f64) -> Result<f64> {
    if !(a_tilde > 0.0 && a_tilde <= 1.0) {
        return Err(Error::Domain(format!("large_cut_ratio argument {a_tilde} outside (0, 1]")));
    }
    Ok((1.0 - 2.0 * a_tilde).clamp(-1.0, 1.0).acos() / PI / a_tilde)
}

/// Shifted bound for signed weights: `E − W₋ ≥ ALPHA · (Val − W₋)`, where
/// `w_minus ≤ 0` is the total negative weight.
pub fn negative_weight_bound(expected_cut: f64, w_minus: f64, val_rp: f64) -> bool {
    expected_cut - w_minus >= ALPHA * (val_rp - w_minus) - 1e-12 * val_rp.abs().max(1.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::{Clause, Literal};

    fn factor(cols: &[Vec<f64>]) -> GramFactor {
        GramFactor::from_columns(cols).unwrap()
    }

    #[test]
    fn hyperplane_examples() {
        let same = factor(&vec![vec![0.6, 0.8]; 4]);
        for seed in 0..20 {
            let y = hyperplane_round(&same, &RoundConfig { seed, ..Default::default() });
            assert!(y.signs().iter().all(|&s| s == y.signs()[0]));
        }
        let anti = factor(&[vec![1.0, 0.0], vec![-1.0, 0.0]]);
        for seed in 0..20 {
            let y = hyperplane_round(&anti, &RoundConfig { seed, ..Default::default() });
            assert_eq!(y.signs()[0], -y.signs()[1]);
        }
        let orth = factor(&[vec![1.0, 0.0], vec![0.0, 1.0]]);
        let trials = 100_000;
        let split = (0..trials)
            .filter(|&t| {
                let s = hyperplane_signs(&orth, 3, t);
                s[0] != s[1]
            })
            .count() as f64
            / trials as f64;
        let sigma = (0.25 / trials as f64).sqrt();
        assert!((split - 0.5).abs() < 3.0 * sigma, "{split}");
    }

    #[test]
    fn expected_cut_examples() {
        let k2 = Instance::maxcut(2, [(0, 1, 1.0)]).unwrap();
        let w = k2.nominal_weights();
        let anti = factor(&[vec![1.0, 0.0], vec![-1.0, 0.0]]);
        assert_eq!(expected_cut_exact(&k2, &anti, &w).unwrap(), 1.0);
        let orth = factor(&[vec![1.0, 0.0], vec![0.0, 1.0]]);
        assert!((expected_cut_exact(&k2, &orth, &w).unwrap() - 0.5).abs() < 1e-15);

        let c5 = Instance::maxcut(5, (0..5).map(|i| (i, (i + 1) % 5, 1.0))).unwrap();
        let cols: Vec<Vec<f64>> = (0..5)
            .map(|i| {
                let a = 4.0 * PI / 5.0 * i as f64;
                vec![a.cos(), a.sin()]
            })
            .collect();
        let e = expected_cut_exact(&c5, &factor(&cols), &c5.nominal_weights()).unwrap();
        assert!((e - 4.0).abs() < 1e-12);
    }

    #[test]
    fn alpha_examples() {
        assert!((alpha_ratio(-1.0).unwrap() - 1.0).abs() < 1e-15);
        assert!((alpha_ratio(0.0).unwrap() - 1.0).abs() < 1e-15);
        assert_eq!(alpha_ratio(1.0).unwrap(), f64::INFINITY);
        assert!(alpha_ratio(1.5).is_err());
        // Golden-section search for the minimizer.
        let (mut lo, mut hi) = (-1.0f64, 0.0f64);
        let g = (5f64.sqrt() - 1.0) / 2.0;
        for _ in 0..200 {
            let a = hi - g * (hi - lo);
            let b = lo + g * (hi - lo);
            if alpha_ratio(a).unwrap() < alpha_ratio(b).unwrap() {
                hi = b;
            } else {
                lo = a;
            }
        }
        let t = (lo + hi) / 2.0;
        let m = alpha_ratio(t).unwrap();
        assert!((t + 0.689).abs() < 1e-3, "{t}");
        assert!((0.87856..0.8786).contains(&m), "{m}");
    }

    #[test]
    fn triple_examples() {
        let e1 = [1.0, 0.0, 0.0];
        let e2 = [0.0, 1.0, 0.0];
        let e3 = [0.0, 0.0, 1.0];
        assert_eq!(dicut_triple_prob(&e1, &e1, &e1).unwrap(), 1.0);
        assert!((dicut_triple_prob(&e1, &e2, &e3).unwrap() - 0.25).abs() < 1e-15);
        assert!(dicut_triple_prob(&e1, &[-1.0, 0.0, 0.0], &e2).unwrap().abs() < 1e-15);
        assert!(dicut_triple_prob(&e1, &[2.0, 0.0, 0.0], &e2).is_err());
    }

    #[test]
    fn ratio_search_examples() {
        let u0 = vec![1.0, 0.0, 0.0];
        let cfg = RoundConfig {
            trials: 1000,
            ..Default::default()
        };
        let single = vec![(u0.clone(), vec![-1.0, 0.0, 0.0])];
        let r = dicut_biased_ratio_search(&u0, &single, &UniformHyperplane, &cfg).unwrap();
        assert_eq!(r.min_ratio, 1.0);
        assert_eq!(r.stderr, 0.0);

        let degenerate = vec![(u0.clone(), u0.clone()), (u0.clone(), vec![-1.0, 0.0, 0.0])];
        let r = dicut_biased_ratio_search(&u0, &degenerate, &UniformExact, &cfg).unwrap();
        assert_eq!(r.excluded, 1);
        assert_eq!(r.argmin, 1);
        assert!(dicut_biased_ratio_search(&u0, &[], &UniformExact, &cfg).is_err());

        let grid = dicut_feasible_grid(200, 1);
        let exact = dicut_biased_ratio_search(&u0, &grid, &UniformExact, &cfg).unwrap();
        assert!(exact.min_ratio >= BETA);
        let mc = dicut_biased_ratio_search(
            &u0,
            &grid,
            &UniformHyperplane,
            &RoundConfig {
                trials: 20_000,
                ..Default::default()
            },
        )
        .unwrap();
        assert!(mc.min_ratio >= BETA - 3.0 * mc.stderr - 0.02);
    }

    #[test]
    fn allequal_round_examples() {
        let cfg = RoundConfig::default();
        assert_eq!(allequal_round(&[1, -1], 2, &cfg).unwrap().signs(), &[1, -1]);
        for seed in 0..10 {
            let c = RoundConfig { seed, ..cfg.clone() };
            assert_eq!(allequal_round(&[1, -1, 1], 2, &c).unwrap().signs(), &[1, -1, 1]);
        }
        assert_eq!(biased_probabilities(&[1, -1], 8).unwrap(), vec![0.75, 0.25]);
        assert!(allequal_round(&[1], 1, &cfg).is_err());

        let trials = 100_000u64;
        let z = [1i8, -1, 1];
        let mut ones = [0usize; 3];
        for t in 0..trials {
            let x = allequal_round_indexed(&z, 4, 5, t).unwrap();
            for (c, &s) in ones.iter_mut().zip(x.signs()) {
                *c += usize::from(s == 1);
            }
        }
        let p = biased_probabilities(&z, 4).unwrap();
        for (c, pi) in ones.iter().zip(&p) {
            let f = *c as f64 / trials as f64;
            let sigma = (pi * (1.0 - pi) / trials as f64).sqrt();
            assert!((f - pi).abs() < 3.0 * sigma);
        }
    }

    #[test]
    fn expected_allequal_matches_enumeration() {
        let lit = |v: usize, neg: bool| Literal { var: v, negated: neg };
        let inst = Instance::allequal(
            4,
            vec![
                Clause {
                    literals: vec![lit(0, false), lit(1, true), lit(2, false)],
                    weight: 1.0,
                },
                Clause {
                    literals: vec![lit(3, false), lit(3, false), lit(1, false)],
                    weight: 2.0,
                },
                Clause {
                    literals: vec![lit(2, false), lit(2, true), lit(0, false)],
                    weight: 3.0,
                },
            ],
        )
        .unwrap();
        let z = [1i8, -1, -1, 1];
        let w = inst.nominal_weights();
        let p = biased_probabilities(&z, 3).unwrap();
        let mut enumerated = 0.0;
        for mask in 0..16u64 {
            let x = Cut::from_mask(mask, 4);
            let prob: f64 = x
                .signs()
                .iter()
                .zip(&p)
                .map(|(&s, &pi)| if s == 1 { pi } else { 1.0 - pi })
                .product();
            enumerated += prob * inst.value(&x, &w).unwrap();
        }
        assert!((expected_allequal_exact(&inst, &z, &w).unwrap() - enumerated).abs() < 1e-12);
    }

    #[test]
    fn sign_round_examples() {
        let mut rng = stream(0, Domain::Sampling, 0);
        let u = GramFactor::random(3, 5, &mut rng);
        let z = sign_round_psd(&DenseMatrix::identity(5), &u, &RoundConfig::default()).unwrap();
        assert_eq!(z.len(), 5);
        let same = factor(&vec![vec![0.0, 1.0]; 3]);
        let ones = DenseMatrix::from_rows(&[vec![1.0; 3], vec![1.0; 3], vec![1.0; 3]]).unwrap();
        let z = sign_round_psd(&ones, &same, &RoundConfig::default()).unwrap();
        assert!(z.iter().all(|&s| s == z[0]));
        let indefinite = DenseMatrix::from_rows(&[vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap();
        let u2 = factor(&[vec![1.0, 0.0], vec![0.0, 1.0]]);
        assert!(matches!(
            sign_round_psd(&indefinite, &u2, &RoundConfig::default()),
            Err(Error::NotPsd { .. })
        ));
    }

    #[test]
    fn large_cut_and_shifted_bound_examples() {
        assert!((large_cut_ratio(1.0).unwrap() - 1.0).abs() < 1e-15);
        assert!((large_cut_ratio(0.5).unwrap() - 1.0).abs() < 1e-15);
        let r = large_cut_ratio(GAMMA).unwrap();
        assert!((r - 0.8786).abs() < 1e-3 && (0.878..=0.880).contains(&r), "{r}");
        assert!(large_cut_ratio(0.0).is_err());
        assert!(negative_weight_bound(1.5, -1.0, 0.5));
        assert!(negative_weight_bound(0.0, 0.0, 0.0));
        assert!(!negative_weight_bound(0.0, 0.0, 1.0));
    }

    #[test]
    fn dicut_expectation_matches_enumerated_hyperplanes() {
        let d = Instance::dicut(3, [(0, 1, 1.0), (1, 2, 2.0), (2, 0, 0.5)]).unwrap();
        let mut rng = stream(5, Domain::Sampling, 0);
        let u = GramFactor::random(3, 4, &mut rng);
        let w = d.nominal_weights();
        let exact = expected_dicut_exact(&d, &u, &w).unwrap();
        let trials = 100_000u64;
        let vals: Vec<f64> = (0..trials)
            .map(|t| d.value(&round_instance(&d, &u, 1, t), &w).unwrap())
            .collect();
        let mean = vals.iter().sum::<f64>() / trials as f64;
        let var = vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (trials - 1) as f64;
        assert!((mean - exact).abs() < 3.0 * (var / trials as f64).sqrt());
    }

    #[test]
    fn round_solution_dispatches_by_kind() {
        let k2 = Instance::maxcut(2, [(0, 1, 1.0)]).unwrap();
        let u = factor(&[vec![1.0, 0.0], vec![-1.0, 0.0]]);
        let w = k2.nominal_weights();
        let out = round_solution(&k2, &u, &w, &RoundConfig::default()).unwrap();
        assert_eq!((out.best_value, out.expected), (1.0, 1.0));
        let bad = RoundConfig {
            scheme: Scheme::DicutUniform,
            ..RoundConfig::default()
        };
        assert!(round_solution(&k2, &u, &w, &bad).is_err());

        let lit = |var, negated| Literal { var, negated };
        let ae = Instance::allequal(
            2,
            vec![Clause {
                literals: vec![lit(0, false), lit(1, true)],
                weight: 1.0,
            }],
        )
        .unwrap();
        let cfg = RoundConfig {
            scheme: Scheme::AllequalBiased,
            ..RoundConfig::default()
        };
        let out = round_solution(&ae, &u, &ae.nominal_weights(), &cfg).unwrap();
        assert_eq!(out.best_value, 1.0);
        let z = out.signs.unwrap();
        assert_eq!(z[0], -z[1]);
        assert_eq!(out.expected, 1.0);
    }
}
