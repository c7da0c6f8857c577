//! Acceptance gate: one PASS/FAIL line per criterion. Exits nonzero if any
//! criterion fails. Runtime budgets count toward the verdict.

use std::f64::consts::PI;
use std::fs;
use std::process::Command;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use robustcut::generate::{allequal, box_spec, ellipsoid_spec, gnp, signed_gnp, singleton_spec, wasserstein_spec};
use robustcut::generate::{budget_spec, cycle, digraph};
use robustcut::numerics::DenseMatrix;
use robustcut::oracle::{brute_force_robust, certify_sandwich, mc_allequal, ratio_constant};
use robustcut::relaxation::Relaxation;
use robustcut::robust::{dual_reformulated_value, ellipsoid_reformulated_value, inner_value, solve_dro, solve_robust};
use robustcut::rounding::{
    alpha_ratio, allequal_matrix, dicut_biased_ratio_search, dicut_feasible_grid, dicut_triple_prob,
    expected_allequal_exact, expected_cut_exact, hyperplane_signs, large_cut_ratio, negative_weight_bound,
    sign_round_psd, UniformExact, UniformHyperplane, BETA, GAMMA,
};
use robustcut::sdp::solve_elliptope_max;
use robustcut::uncertainty::{dual_polyhedral_value, ellipsoid_level};
use robustcut::{CertifyConfig, GramFactor, Instance, RoundConfig, SdpConfig, SolverConfig, UncertaintySpec};

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: impl Into<String>) -> Verdict {
    Verdict {
        pass,
        detail: detail.into(),
    }
}

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn unit<R: Rng>(rng: &mut R, dim: usize) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..dim).map(|_| rng.sample(StandardNormal)).collect();
        let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if n > 1e-8 {
            return v.iter().map(|x| x / n).collect();
        }
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn c1_alpha_grid() -> Verdict {
    let n = 1_000_000;
    let mut min = f64::INFINITY;
    for i in 0..n {
        let t = -1.0 + 2.0 * i as f64 / (n - 1) as f64;
        min = min.min(alpha_ratio(t).unwrap());
    }
    verdict((0.87856..=0.8786).contains(&min), format!("min ratio {min:.6} over {n} points"))
}

fn c2_probabilities() -> Verdict {
    let draws = 100_000u64;
    let mut r = rng(2);
    let mut worst: f64 = 0.0;
    let mut violations = 0;
    for case in 0..50u64 {
        let dim = r.random_range(2..=6);
        let (a, b) = (unit(&mut r, dim), unit(&mut r, dim));
        let u = GramFactor::from_columns(&[a.clone(), b.clone()]).unwrap();
        let hits = (0..draws)
            .filter(|&t| {
                let s = hyperplane_signs(&u, 1000 + case, t);
                s[0] != s[1]
            })
            .count();
        let p = dot(&a, &b).clamp(-1.0, 1.0).acos() / PI;
        let z = (hits as f64 / draws as f64 - p).abs() / (p * (1.0 - p) / draws as f64).sqrt();
        worst = worst.max(z);
        violations += usize::from(z > 3.0);

        let dim = r.random_range(2..=6);
        let (a, b, c) = (unit(&mut r, dim), unit(&mut r, dim), unit(&mut r, dim));
        let u = GramFactor::from_columns(&[a.clone(), b.clone(), c.clone()]).unwrap();
        let hits = (0..draws)
            .filter(|&t| {
                let s = hyperplane_signs(&u, 2000 + case, t);
                s[0] == s[1] && s[1] == s[2]
            })
            .count();
        let p = dicut_triple_prob(&a, &b, &c).unwrap();
        let z = (hits as f64 / draws as f64 - p).abs() / (p * (1.0 - p) / draws as f64).sqrt();
        worst = worst.max(z);
        violations += usize::from(z > 3.0);
    }
    verdict(
        violations == 0,
        format!("50 pairs + 50 triples at {draws} draws, max |z| {worst:.2}, {violations} beyond 3σ"),
    )
}

/// Weighted G(n, p) with `n ∈ [5, 10]`, for the sandwich sweeps.
fn random_instance(i: u64) -> Instance {
    let n = 5 + (i % 6) as usize;
    gnp(n, 0.6, 0.5, 2.0, 100 + i).unwrap()
}

fn sandwich_sweep(specs: impl Fn(&Instance, u64) -> Vec<UncertaintySpec>, dro: bool) -> Verdict {
    let solver = SolverConfig::default();
    let mut cases = 0;
    let mut violations = Vec::new();
    let mut min_margin = f64::INFINITY;
    for i in 0..50u64 {
        let inst = random_instance(i);
        for spec in specs(&inst, i) {
            cases += 1;
            let sol = if dro {
                solve_dro(&inst, &spec, &solver)
            } else {
                solve_robust(&inst, &spec, &solver)
            };
            let sol = match sol {
                Ok(s) if s.report.converged => s,
                Ok(_) => {
                    violations.push(format!("case {i} {}: no convergence", spec.kind_name()));
                    continue;
                }
                Err(e) => {
                    violations.push(format!("case {i} {}: {e}", spec.kind_name()));
                    continue;
                }
            };
            let cfg = CertifyConfig {
                samples: 20,
                cuts: 100,
                seed: i,
                ..CertifyConfig::default()
            };
            match certify_sandwich(&inst, &spec, &sol, &cfg) {
                Ok(rep) => {
                    for c in &rep.checks {
                        if c.label.starts_with('E') {
                            min_margin = min_margin.min(c.lhs / c.rhs.max(1e-12));
                        }
                    }
                    for c in rep.failures() {
                        violations.push(format!("case {i} {}: {}", spec.kind_name(), c.label));
                    }
                }
                Err(e) => violations.push(format!("case {i} {}: {e}", spec.kind_name())),
            }
        }
    }
    let mut detail = format!(
        "{cases} cases, {} violations, min E/(0.878 Val) {min_margin:.4}",
        violations.len()
    );
    if let Some(v) = violations.first() {
        detail.push_str(&format!(" (first: {v})"));
    }
    verdict(violations.is_empty(), detail)
}

fn c3_robust_sandwich() -> Verdict {
    sandwich_sweep(
        |inst, i| {
            vec![
                singleton_spec(inst),
                box_spec(inst, 0.3).unwrap(),
                ellipsoid_spec(inst, 0.4, i).unwrap(),
            ]
        },
        false,
    )
}

fn c4_dro_sandwich() -> Verdict {
    sandwich_sweep(
        |inst, i| {
            let points = 2 + (i % 4) as usize;
            let radius = [0.0, 0.2, 0.5, 1.5][(i % 4) as usize];
            vec![wasserstein_spec(inst, points, 0.4, radius, i).unwrap()]
        },
        true,
    )
}

fn c5_reformulations() -> Verdict {
    let mut r = rng(5);
    let mut worst_poly: f64 = 0.0;
    let mut worst_ell: f64 = 0.0;
    let mut worst_level: f64 = 0.0;
    let mut worst_box: f64 = 0.0;
    let mut sample_violations = 0;
    let mut degenerate = 0;
    for i in 0..100u64 {
        let inst = match i % 3 {
            0 => gnp(6, 0.7, 0.5, 2.0, i).unwrap(),
            1 => digraph(5, 0.8, 0.5, 2.0, i).unwrap(),
            _ => allequal(6, 3, 8, 0.5, 2.0, i).unwrap(),
        };
        let relax = Relaxation::new(&inst);
        let u = GramFactor::random(r.random_range(1..=4), relax.blocks(), &mut r);
        let c = relax.coefficients(&u);

        let budget = budget_spec(&inst, 0.5, 1.5).unwrap();
        let primal = inner_value(&inst, &budget, &u).unwrap().value;
        let dual = dual_polyhedral_value(&budget, &inst, &c).unwrap();
        let reform = dual_reformulated_value(&inst, &budget, &u).unwrap();
        worst_poly = worst_poly.max((primal - dual).abs()).max((primal - reform).abs());

        let boxed = box_spec(&inst, 0.3).unwrap();
        let g = boxed.layout(&inst).coefficients(&c);
        let centre = boxed.layout(&inst).coordinates(inst.nominal_weights().values());
        let corner: f64 = g
            .iter()
            .zip(&centre)
            .map(|(gi, wi)| gi * if *gi >= 0.0 { 0.7 * wi } else { 1.3 * wi })
            .sum();
        worst_box = worst_box.max((inner_value(&inst, &boxed, &u).unwrap().value - corner).abs());

        let ell = ellipsoid_spec(&inst, 0.5, i).unwrap();
        let UncertaintySpec::Ellipsoidal { w0, q, a, .. } = &ell else {
            unreachable!()
        };
        let closed = inner_value(&inst, &ell, &u).unwrap();
        let reformed = ellipsoid_reformulated_value(&inst, &ell, &u).unwrap();
        worst_ell = worst_ell.max((closed.value - reformed).abs());
        let g = ell.layout(&inst).coefficients(&c);
        if g.iter().all(|&x| x == 0.0) {
            degenerate += 1;
        } else {
            worst_level = worst_level.max((ellipsoid_level(w0, q, &closed.coords).unwrap() - a).abs());
        }
        let chol = cholesky_lower(q);
        for _ in 0..20 {
            let dir = unit(&mut r, w0.len());
            let x: Vec<f64> = (0..w0.len())
                .map(|k| w0[k] + a.sqrt() * (0..=k).map(|j| chol[(k, j)] * dir[j]).sum::<f64>())
                .collect();
            sample_violations += usize::from(dot(&g, &x) < closed.value - 1e-9);
        }
    }
    let pass = worst_poly <= 1e-8 && worst_box <= 1e-8 && worst_ell <= 1e-8 && worst_level <= 1e-8 && sample_violations == 0;
    verdict(
        pass,
        format!(
            "100 factors: primal/dual {worst_poly:.1e}, box corner {worst_box:.1e}, ellipsoid {worst_ell:.1e}, \
             boundary {worst_level:.1e} ({degenerate} factors with all-zero coefficients, where every point minimizes), \
             {sample_violations} boundary samples below the minimum"
        ),
    )
}

/// Plain Cholesky `Q = L Lᵀ` for boundary sampling `w0 + √a L d`, `‖d‖ = 1`.
fn cholesky_lower(q: &DenseMatrix) -> DenseMatrix {
    let n = q.rows();
    let mut l = DenseMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..=i {
            let s: f64 = (0..j).map(|k| l[(i, k)] * l[(j, k)]).sum();
            if i == j {
                l[(i, i)] = (q[(i, i)] - s).sqrt();
            } else {
                l[(i, j)] = (q[(i, j)] - s) / l[(j, j)];
            }
        }
    }
    l
}

fn c6_nominal() -> Verdict {
    let c5 = cycle(5).unwrap();
    let (_, r5) = solve_elliptope_max(&c5, &c5.nominal_weights(), &SdpConfig::default()).unwrap();
    let target = 2.5 * (1.0 + (PI / 5.0).cos());
    let k2 = Instance::maxcut(2, [(0, 1, 1.0)]).unwrap();
    let (_, r2) = solve_elliptope_max(&k2, &k2.nominal_weights(), &SdpConfig::default()).unwrap();
    verdict(
        (r5.value - target).abs() <= 1e-3 && (r5.value - 4.5225).abs() <= 1e-3 && (r2.value - 1.0).abs() <= 1e-6,
        format!("C5 {:.6} (analytic {target:.6}), K2 {:.9}", r5.value, r2.value),
    )
}

fn c7_dicut() -> Verdict {
    let mut r = rng(7);
    let mut violations = 0;
    let mut min_slack = f64::INFINITY;
    for _ in 0..1_000_000 {
        let (a, b, c) = (unit(&mut r, 3), unit(&mut r, 3), unit(&mut r, 3));
        let p = dicut_triple_prob(&a, &b, &c).unwrap();
        let rhs = BETA / 4.0 * (1.0 + dot(&a, &b) + dot(&a, &c) + dot(&b, &c));
        min_slack = min_slack.min(p - rhs);
        violations += usize::from(p < rhs - 1e-12);
    }
    let u0 = [1.0, 0.0, 0.0];
    let grid = dicut_feasible_grid(1000, 7);
    let cfg = RoundConfig {
        seed: 7,
        trials: 100_000,
        ..RoundConfig::default()
    };
    let mc = dicut_biased_ratio_search(&u0, &grid, &UniformHyperplane, &cfg).unwrap();
    let exact = dicut_biased_ratio_search(&u0, &grid, &UniformExact, &cfg).unwrap();
    verdict(
        violations == 0 && mc.min_ratio >= BETA - 3.0 * mc.stderr && exact.min_ratio >= BETA,
        format!(
            "1e6 triples, {violations} violations (min slack {min_slack:.2e}); grid of {} pairs: \
             MC min ratio {:.4} ± {:.4}, exact min ratio {:.4}",
            grid.len(),
            mc.min_ratio,
            mc.stderr,
            exact.min_ratio
        ),
    )
}

fn c8_allequal() -> Verdict {
    let mut r = rng(8);
    let mut psd_violations = 0;
    for case in 0..1000u64 {
        let n = r.random_range(3..=10);
        let m = r.random_range(1..=n);
        let b: Vec<Vec<f64>> = (0..m).map(|_| (0..n).map(|_| r.sample(StandardNormal)).collect()).collect();
        let mut a = DenseMatrix::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                a[(i, j)] = (0..m).map(|k| b[k][i] * b[k][j]).sum();
            }
        }
        let u = GramFactor::random(r.random_range(1..=n), n, &mut r);
        let cfg = RoundConfig {
            seed: case,
            ..RoundConfig::default()
        };
        match sign_round_psd(&a, &u, &cfg) {
            Ok(z) => {
                let mut lhs = 0.0;
                let mut inner = 0.0;
                for i in 0..n {
                    for j in 0..n {
                        lhs += a[(i, j)] * (z[i] * z[j]) as f64;
                        inner += a[(i, j)] * dot(u.column(i), u.column(j));
                    }
                }
                psd_violations += usize::from(lhs < 2.0 / PI * inner - 1e-9 * inner.abs().max(1.0));
            }
            Err(_) => psd_violations += 1,
        }
    }

    let solver = SolverConfig::default();
    let mut cases = 0;
    let mut pipeline_violations = Vec::new();
    let mut min_margin = f64::INFINITY;
    for k in 2..=4usize {
        for j in 0..12u64 {
            let n = 6 + (j % 5) as usize;
            let inst = allequal(n, k, 12, 0.5, 1.5, 80 + 31 * k as u64 + j).unwrap();
            let spec = match j % 3 {
                0 => singleton_spec(&inst),
                1 => box_spec(&inst, 0.3).unwrap(),
                _ => ellipsoid_spec(&inst, 0.4, j).unwrap(),
            };
            cases += 1;
            let label = format!("k={k} case {j} {}", spec.kind_name());
            let sol = match solve_robust(&inst, &spec, &solver) {
                Ok(s) if s.report.converged => s,
                other => {
                    pipeline_violations.push(format!("{label}: solver {:?}", other.err()));
                    continue;
                }
            };
            let w = sol.worst.weights();
            let z = sign_round_psd(
                &allequal_matrix(&inst, w).unwrap(),
                &sol.factor,
                &RoundConfig {
                    seed: j,
                    ..RoundConfig::default()
                },
            )
            .unwrap();
            let val = brute_force_robust(&inst, &spec).unwrap().value;
            let target = ratio_constant(&inst) * val;
            let mc = mc_allequal(&inst, &z, w, 100_000, j).unwrap();
            let exact = expected_allequal_exact(&inst, &z, w).unwrap();
            min_margin = min_margin.min(mc.mean / target);
            if mc.mean < target - 3.0 * mc.stderr || exact < target - 1e-9 {
                pipeline_violations.push(format!("{label}: mean {} < {target}", mc.mean));
            }
        }
    }
    let mut detail = format!(
        "1000 PSD cases, {psd_violations} violations; {cases} robust AllEqual cases, {} violations, \
         min mean/(0.88k/2^k Val) {min_margin:.3}",
        pipeline_violations.len()
    );
    if let Some(v) = pipeline_violations.first() {
        detail.push_str(&format!(" (first: {v})"));
    }
    verdict(psd_violations == 0 && pipeline_violations.is_empty(), detail)
}

fn c9_bounds() -> Verdict {
    let ratio = large_cut_ratio(GAMMA).unwrap();
    let mut failures = 0;
    let mut tested = 0;
    for i in 0..40u64 {
        let n = 4 + (i % 5) as usize;
        let inst = signed_gnp(n, 0.8, -1.0, 2.0, 900 + i).unwrap();
        let spec = singleton_spec(&inst);
        let w = inst.nominal_weights();
        let sol = solve_robust(&inst, &spec, &SolverConfig::default()).unwrap();
        let e = expected_cut_exact(&inst, &sol.factor, &w).unwrap();
        let val = brute_force_robust(&inst, &spec).unwrap().value;
        tested += 1;
        failures += usize::from(!negative_weight_bound(e, w.negative_part(), val));
    }
    verdict(
        (0.878..=0.880).contains(&ratio) && failures == 0,
        format!("h(γ)/γ = {ratio:.6}; shifted bound failed on {failures} of {tested} signed instances"),
    )
}

fn c10_determinism() -> Verdict {
    let dir = tempfile::tempdir().unwrap();
    let inst = gnp(8, 0.6, 0.5, 2.0, 10).unwrap();
    fs::write(dir.path().join("g.json"), inst.to_json()).unwrap();
    fs::write(dir.path().join("s.json"), budget_spec(&inst, 0.4, 2.0).unwrap().to_json()).unwrap();
    let run = |out: &str| {
        let status = Command::new(env!("CARGO_BIN_EXE_robustcut"))
            .args(["solve", "--instance", "g.json", "--spec", "s.json", "--seed", "11", "--out", out])
            .current_dir(dir.path())
            .status()
            .unwrap();
        (status.code(), fs::read(dir.path().join(out)).unwrap_or_default())
    };
    let (c1, a) = run("a.json");
    let (c2, b) = run("b.json");
    verdict(
        c1 == Some(0) && c2 == Some(0) && !a.is_empty() && a == b,
        format!("exit codes {c1:?}/{c2:?}, {} bytes, identical: {}", a.len(), a == b),
    )
}

fn main() {
    type Criterion = (u32, &'static str, Duration, fn() -> Verdict);
    let criteria: [Criterion; 10] = [
        (1, "alpha ratio grid", Duration::from_secs(1), c1_alpha_grid),
        (2, "hyperplane probabilities", Duration::from_secs(30), c2_probabilities),
        (3, "robust sandwich", Duration::from_secs(300), c3_robust_sandwich),
        (4, "distributionally robust sandwich", Duration::from_secs(300), c4_dro_sandwich),
        (5, "reformulation agreement", Duration::from_secs(30), c5_reformulations),
        (6, "nominal solver accuracy", Duration::from_secs(5), c6_nominal),
        (7, "dicut ratio", Duration::from_secs(120), c7_dicut),
        (8, "allequal rounding", Duration::from_secs(300), c8_allequal),
        (9, "large-cut and signed-weight bounds", Duration::from_secs(10), c9_bounds),
        (10, "report determinism", Duration::from_secs(600), c10_determinism),
    ];
    let mut all = true;
    for (id, name, budget, run) in criteria {
        let start = Instant::now();
        let v = run();
        let elapsed = start.elapsed();
        let pass = v.pass && elapsed <= budget;
        all &= pass;
        println!(
            "criterion {id:>2} {}: {name}: {} [{:.2}s of {}s]",
            if pass { "PASS" } else { "FAIL" },
            v.detail,
            elapsed.as_secs_f64(),
            budget.as_secs()
        );
    }
    if !all {
        std::process::exit(1);
    }
}
