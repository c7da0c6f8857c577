//! Brute-force robust optima and Monte-Carlo estimators used to certify the
//! rounding guarantees on small instances.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::instance::{Cut, Instance, ProblemKind, WeightAssignment};
use crate::robust::{SaddleSolution, Worst};
use crate::rounding::{
    allequal_matrix, allequal_round_indexed, expected_allequal_exact, expected_value_exact,
    round_instance, sign_round_psd, RoundConfig, ALPHA, BETA,
};
use crate::rng::{stream, Domain};
use crate::sdp::GramFactor;
use crate::uncertainty::{sample_feasible, worst_case_weights, InnerSolution, UncertaintySpec};

/// Largest instance the enumeration accepts.
pub const MAX_BRUTE_FORCE_N: usize = 24;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OracleResult {
    pub best_cut: Cut,
    pub worst: Worst,
    pub value: f64,
    pub enumerated: u64,
}

/// Exact inner minimizer `Ŵ′` for a fixed assignment.
pub fn inner_at_cut(inst: &Instance, spec: &UncertaintySpec, y: &Cut) -> Result<InnerSolution> {
    worst_case_weights(spec, inst, &inst.term_indicators(y)?)
}

/// `max_y min_{W ∈ 𝒲} value(y, W)` by enumeration. Max-Cut and AllEqual
/// fix `y_1 = +1` (both objectives are invariant under global negation).
pub fn brute_force_robust(inst: &Instance, spec: &UncertaintySpec) -> Result<OracleResult> {
    let n = inst.n();
    if n > MAX_BRUTE_FORCE_N {
        return Err(Error::TooLarge {
            n,
            limit: MAX_BRUTE_FORCE_N,
        });
    }
    let free = match inst.kind() {
        ProblemKind::DiCut => n,
        _ => n - 1,
    };
    let count = 1u64 << free;
    let values: Vec<f64> = (0..count)
        .into_par_iter()
        .map(|mask| {
            let y = Cut::from_mask(mask, n);
            inner_at_cut(inst, spec, &y).map(|s| s.value)
        })
        .collect::<Result<_>>()?;
    let mut best = 0usize;
    for (m, v) in values.iter().enumerate() {
        if *v > values[best] + 1e-12 {
            best = m;
        }
    }
    let best_cut = Cut::from_mask(best as u64, n);
    let inner = inner_at_cut(inst, spec, &best_cut)?;
    Ok(OracleResult {
        best_cut,
        worst: Worst::from_inner(inner),
        value: values[best],
        enumerated: count,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct McEstimate {
    pub mean: f64,
    pub stderr: f64,
    pub trials: usize,
}

impl McEstimate {
    fn from_samples(values: &[f64]) -> Self {
        let t = values.len() as f64;
        let mean = values.iter().sum::<f64>() / t;
        let var = if values.len() > 1 {
            values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (t - 1.0)
        } else {
            0.0
        };
        McEstimate {
            mean,
            stderr: (var / t).sqrt(),
            trials: values.len(),
        }
    }
}

fn check_trials(trials: usize) -> Result<()> {
    if trials < 100 {
        return Err(Error::Domain(format!("need at least 100 trials, got {trials}")));
    }
    Ok(())
}

/// Mean and standard error of the rounded value over `trials` independent
/// hyperplane draws. Draws run in parallel; the reduction is sequential, so
/// the result does not depend on the thread count.
pub fn mc_expected_cut(
    inst: &Instance,
    u: &GramFactor,
    w: &WeightAssignment,
    trials: usize,
    seed: u64,
) -> Result<McEstimate> {
    check_trials(trials)?;
    if w.len() != inst.num_terms() {
        return Err(Error::Dimension {
            expected: inst.num_terms(),
            actual: w.len(),
        });
    }
    let values: Vec<f64> = (0..trials as u64)
        .into_par_iter()
        .map(|t| inst.value(&round_instance(inst, u, seed, t), w).expect("dimensions checked"))
        .collect();
    Ok(McEstimate::from_samples(&values))
}

/// Mean satisfied weight of independent biased assignments built from `z`.
pub fn mc_allequal(inst: &Instance, z: &[i8], w: &WeightAssignment, trials: usize, seed: u64) -> Result<McEstimate> {
    check_trials(trials)?;
    let k = inst
        .arity()
        .ok_or_else(|| Error::Domain("expected an allequal instance".into()))?;
    let values: Vec<f64> = (0..trials as u64)
        .into_par_iter()
        .map(|t| {
            let x = allequal_round_indexed(z, k, seed, t)?;
            inst.value(&x, w)
        })
        .collect::<Result<_>>()?;
    Ok(McEstimate::from_samples(&values))
}

/// Guaranteed ratio of the uniform (or biased, for AllEqual) rounding.
pub fn ratio_constant(inst: &Instance) -> f64 {
    match inst.kind() {
        ProblemKind::MaxCut => ALPHA,
        ProblemKind::DiCut => BETA,
        ProblemKind::AllEqual => {
            let k = inst.arity().unwrap_or(2) as f64;
            0.88 * k / 2f64.powf(k)
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CertifyConfig {
    /// Random feasible weights (or distributions) checked on the lower side.
    pub samples: usize,
    /// Rounded assignments checked on the upper side.
    pub cuts: usize,
    pub seed: u64,
    /// Absolute slack granted to every inequality.
    pub tol: f64,
}

impl Default for CertifyConfig {
    fn default() -> Self {
        CertifyConfig {
            samples: 20,
            cuts: 200,
            seed: 0,
            tol: 1e-6,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub label: String,
    pub lhs: f64,
    pub rhs: f64,
    pub pass: bool,
}

impl Check {
    /// `lhs ≥ rhs − tol`.
    pub fn ge(label: impl Into<String>, lhs: f64, rhs: f64, tol: f64) -> Self {
        Check {
            label: label.into(),
            lhs,
            rhs,
            pass: lhs >= rhs - tol,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SandwichReport {
    /// Brute-force robust optimum.
    pub oracle_value: f64,
    pub relaxed_value: f64,
    pub ratio: f64,
    pub checks: Vec<Check>,
    pub pass: bool,
}

impl SandwichReport {
    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.pass)
    }
}

/// `E − W₋ ≥ ratio · (Val − W₋)`, where `W₋ ≤ 0` is the negative weight of
/// `w`; without negative weights this is `E ≥ ratio · Val`.
fn lower_check(label: impl Into<String>, e: f64, w: &WeightAssignment, ratio: f64, val: f64, tol: f64) -> Check {
    let wm = w.negative_part();
    Check::ge(label, e - wm, ratio * (val - wm), tol)
}

fn expectation(inst: &Instance, u: &GramFactor, z: Option<&[i8]>, w: &WeightAssignment) -> Result<f64> {
    match z {
        Some(z) => expected_allequal_exact(inst, z, w),
        None => expected_value_exact(inst, u, w),
    }
}

/// Certify both halves of the approximation sandwich for a solved instance:
///
/// * relaxation: `solution.value ≥ Val` (outer relaxation);
/// * lower: `E[value(ŷ, W)] ≥ ratio · Val` at the solver's worst case and at
///   random feasible `W` (AllEqual: at the worst case only, since its sign
///   rounding is tuned to those weights). Negative weights shift both sides
///   by `W₋`;
/// * upper: `Val ≥ min_W value(ŷ, W)` for sampled rounded assignments `ŷ`,
///   and hence for their mean.
///
/// `Val` comes from [`brute_force_robust`].
pub fn certify_sandwich(
    inst: &Instance,
    spec: &UncertaintySpec,
    solution: &SaddleSolution,
    cfg: &CertifyConfig,
) -> Result<SandwichReport> {
    let oracle = brute_force_robust(inst, spec)?;
    certify_with_oracle(inst, spec, solution, oracle.value, cfg)
}

/// [`certify_sandwich`] against a precomputed oracle value.
pub fn certify_with_oracle(
    inst: &Instance,
    spec: &UncertaintySpec,
    solution: &SaddleSolution,
    val: f64,
    cfg: &CertifyConfig,
) -> Result<SandwichReport> {
    let ratio = ratio_constant(inst);
    let tol = cfg.tol * val.abs().max(1.0);
    let u = &solution.factor;
    let worst = solution.worst.weights();
    let mut checks = vec![Check::ge("relaxation ≥ oracle", solution.value, val, tol)];

    let z = if inst.kind() == ProblemKind::AllEqual {
        let a = allequal_matrix(inst, worst)?;
        Some(sign_round_psd(
            &a,
            u,
            &RoundConfig {
                seed: cfg.seed,
                ..RoundConfig::default()
            },
        )?)
    } else {
        None
    };
    let e_worst = expectation(inst, u, z.as_deref(), worst)?;
    checks.push(lower_check("E at solver worst case", e_worst, worst, ratio, val, tol));
    if z.is_none() {
        for s in 0..cfg.samples {
            let mut rng = stream(cfg.seed, Domain::Sampling, s as u64);
            let sample = sample_feasible(spec, inst, &mut rng)?;
            let e = expectation(inst, u, None, &sample.weights)?;
            checks.push(lower_check(format!("E at feasible sample {s}"), e, &sample.weights, ratio, val, tol));
        }
    }

    let mut seen: Vec<Cut> = Vec::new();
    let mut total = 0.0;
    for t in 0..cfg.cuts as u64 {
        let y = match &z {
            Some(z) => allequal_round_indexed(z, inst.arity().unwrap_or(2), cfg.seed, t)?,
            None => round_instance(inst, u, cfg.seed, t),
        };
        let v = inner_at_cut(inst, spec, &y)?.value;
        total += v;
        if !seen.contains(&y) {
            checks.push(Check::ge(format!("oracle ≥ inner min at rounded draw {t}"), val, v, tol));
            seen.push(y);
        }
    }
    if cfg.cuts > 0 {
        checks.push(Check::ge("oracle ≥ mean inner min", val, total / cfg.cuts as f64, tol));
    }
    let pass = checks.iter().all(|c| c.pass);
    Ok(SandwichReport {
        oracle_value: val,
        relaxed_value: solution.value,
        ratio,
        checks,
        pass,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::DenseMatrix;
    use crate::robust::{solve_robust, SolverConfig};
    use crate::sdp::{solve_elliptope_max, SdpConfig};
    use crate::uncertainty::{Coords, Metric};

    fn triangle() -> Instance {
        Instance::maxcut(3, [(0, 1, 1.0), (1, 2, 1.0), (0, 2, 1.0)]).unwrap()
    }

    fn scenario_hull() -> UncertaintySpec {
        let a = DenseMatrix::from_rows(&[
            vec![0.0, 1.0, 0.0],
            vec![0.0, -1.0, 0.0],
            vec![1.0, 0.0, 1.0],
            vec![-1.0, 0.0, -1.0],
            vec![1.0, 0.0, 0.0],
            vec![0.0, 0.0, 1.0],
        ])
        .unwrap();
        UncertaintySpec::Polyhedral {
            coords: Some(Coords::Terms),
            a,
            b: vec![1.0, -1.0, 1.0, -1.0, 0.0, 0.0],
        }
    }

    #[test]
    fn brute_force_examples() {
        let t = triangle();
        let single = UncertaintySpec::Singleton {
            weights: t.nominal_weights(),
        };
        let r = brute_force_robust(&t, &single).unwrap();
        assert_eq!(r.value, 2.0);
        assert_eq!(r.enumerated, 4);

        let r = brute_force_robust(&t, &scenario_hull()).unwrap();
        assert!((r.value - 1.0).abs() < 1e-12);

        let was = UncertaintySpec::Wasserstein {
            support: vec![
                WeightAssignment::new(vec![1.0, 1.0, 0.0]).unwrap(),
                WeightAssignment::new(vec![0.0, 1.0, 2.0]).unwrap(),
            ],
            empirical: vec![0.25, 0.75],
            radius: 0.0,
            metric: Metric::Named("l1".into()),
        };
        let mean = UncertaintySpec::Singleton {
            weights: WeightAssignment::new(vec![0.25, 1.0, 1.5]).unwrap(),
        };
        let a = brute_force_robust(&t, &was).unwrap();
        let b = brute_force_robust(&t, &mean).unwrap();
        assert!((a.value - b.value).abs() < 1e-12);

        let big = Instance::maxcut(25, [(0, 1, 1.0)]).unwrap();
        let spec = UncertaintySpec::Singleton {
            weights: big.nominal_weights(),
        };
        assert!(matches!(brute_force_robust(&big, &spec), Err(Error::TooLarge { .. })));

        let d = Instance::dicut(3, [(0, 1, 1.0), (1, 2, 1.0), (2, 0, 1.0)]).unwrap();
        let r = brute_force_robust(
            &d,
            &UncertaintySpec::Singleton {
                weights: d.nominal_weights(),
            },
        )
        .unwrap();
        assert_eq!(r.enumerated, 8);
        assert_eq!(r.value, 1.0);
    }

    #[test]
    fn mc_examples() {
        let k2 = Instance::maxcut(2, [(0, 1, 1.0)]).unwrap();
        let w = k2.nominal_weights();
        let anti = GramFactor::from_columns(&[vec![1.0, 0.0], vec![-1.0, 0.0]]).unwrap();
        let e = mc_expected_cut(&k2, &anti, &w, 1000, 0).unwrap();
        assert_eq!((e.mean, e.stderr), (1.0, 0.0));
        let orth = GramFactor::from_columns(&[vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap();
        let e = mc_expected_cut(&k2, &orth, &w, 100_000, 1).unwrap();
        assert!((e.mean - 0.5).abs() < 3.0 * e.stderr);
        assert!(mc_expected_cut(&k2, &orth, &w, 10, 1).is_err());

        let c5 = Instance::maxcut(5, (0..5).map(|i| (i, (i + 1) % 5, 1.0))).unwrap();
        let (u, _) = solve_elliptope_max(&c5, &c5.nominal_weights(), &SdpConfig::default()).unwrap();
        let e = mc_expected_cut(&c5, &u, &c5.nominal_weights(), 100_000, 2).unwrap();
        let exact = expected_value_exact(&c5, &u, &c5.nominal_weights()).unwrap();
        assert!((exact - 4.0).abs() < 1e-4);
        assert!((e.mean - exact).abs() < 3.0 * e.stderr + 1e-6, "{e:?} {exact}");
    }

    #[test]
    fn mc_is_thread_count_independent() {
        let c5 = Instance::maxcut(5, (0..5).map(|i| (i, (i + 1) % 5, 1.0))).unwrap();
        let (u, _) = solve_elliptope_max(&c5, &c5.nominal_weights(), &SdpConfig::default()).unwrap();
        let run = |threads| {
            rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap()
                .install(|| mc_expected_cut(&c5, &u, &c5.nominal_weights(), 5000, 9).unwrap())
        };
        assert_eq!(run(1), run(4));
    }

    #[test]
    fn sandwich_examples() {
        let t = triangle();
        let cfg = SolverConfig::default();
        for spec in [
            UncertaintySpec::Singleton {
                weights: t.nominal_weights(),
            },
            scenario_hull(),
        ] {
            let sol = solve_robust(&t, &spec, &cfg).unwrap();
            let rep = certify_sandwich(&t, &spec, &sol, &CertifyConfig::default()).unwrap();
            assert!(rep.pass, "{:?}", rep.failures().collect::<Vec<_>>());
        }
        let zero = Instance::maxcut(3, [(0, 1, 0.0), (1, 2, 0.0)]).unwrap();
        let spec = UncertaintySpec::Singleton {
            weights: zero.nominal_weights(),
        };
        let sol = solve_robust(&zero, &spec, &cfg).unwrap();
        let rep = certify_sandwich(&zero, &spec, &sol, &CertifyConfig::default()).unwrap();
        assert!(rep.pass);
        assert_eq!(rep.oracle_value, 0.0);
        assert!(rep.checks.iter().all(|c| c.lhs == 0.0 && c.rhs == 0.0));
    }

    #[test]
    fn signed_triangle_uses_shifted_bound() {
        let t = Instance::signed_maxcut(3, [(0, 1, 1.0), (1, 2, 1.0), (0, 2, -1.0)]).unwrap();
        let spec = UncertaintySpec::Singleton {
            weights: t.nominal_weights(),
        };
        let sol = solve_robust(&t, &spec, &SolverConfig::default()).unwrap();
        let rep = certify_sandwich(&t, &spec, &sol, &CertifyConfig::default()).unwrap();
        assert!((rep.oracle_value - 2.0).abs() < 1e-12);
        assert!(rep.pass, "{:?}", rep.failures().collect::<Vec<_>>());
    }
}
