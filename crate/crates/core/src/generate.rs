//! Seeded generators for random instances and uncertainty sets.

use rand::Rng;

use crate::error::{Error, Result};
use crate::instance::{Clause, Instance, Literal, WeightAssignment};
use crate::numerics::DenseMatrix;
use crate::rng::{stream, Domain};
use crate::uncertainty::{Metric, UncertaintySpec};

/// Erdős–Rényi graph with weights uniform in `[lo, hi]`. At least one edge is
/// always present.
pub fn gnp(n: usize, p: f64, lo: f64, hi: f64, seed: u64) -> Result<Instance> {
    check_range(n, p, lo, hi)?;
    let mut rng = stream(seed, Domain::Generator, 0);
    let mut edges = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            if rng.random::<f64>() < p {
                edges.push((i, j, rng.random_range(lo..=hi)));
            }
        }
    }
    if edges.is_empty() {
        edges.push((0, 1, rng.random_range(lo..=hi)));
    }
    Instance::maxcut(n, edges)
}

/// Unit-weight cycle `C_n`.
pub fn cycle(n: usize) -> Result<Instance> {
    if n < 3 {
        return Err(Error::Domain("a cycle needs at least 3 vertices".into()));
    }
    Instance::maxcut(n, (0..n).map(|i| (i, (i + 1) % n, 1.0)))
}

/// Random digraph: each ordered pair gets an arc with probability `p`, and
/// never both directions.
pub fn digraph(n: usize, p: f64, lo: f64, hi: f64, seed: u64) -> Result<Instance> {
    check_range(n, p, lo, hi)?;
    let mut rng = stream(seed, Domain::Generator, 1);
    let mut arcs = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            if rng.random::<f64>() < p {
                let w = rng.random_range(lo..=hi);
                if rng.random::<bool>() {
                    arcs.push((i, j, w));
                } else {
                    arcs.push((j, i, w));
                }
            }
        }
    }
    if arcs.is_empty() {
        arcs.push((0, 1, rng.random_range(lo..=hi)));
    }
    Instance::dicut(n, arcs)
}

/// `m` clauses of arity `k` over distinct variables with random polarities.
pub fn allequal(n: usize, k: usize, m: usize, lo: f64, hi: f64, seed: u64) -> Result<Instance> {
    if k < 2 || k > n {
        return Err(Error::Domain(format!("arity {k} must lie in [2, n = {n}]")));
    }
    check_range(n, 0.5, lo, hi)?;
    let mut rng = stream(seed, Domain::Generator, 2);
    let clauses = (0..m.max(1))
        .map(|_| {
            let mut vars: Vec<usize> = (0..n).collect();
            for i in 0..k {
                let j = rng.random_range(i..n);
                vars.swap(i, j);
            }
            Clause {
                literals: vars[..k]
                    .iter()
                    .map(|&var| Literal {
                        var,
                        negated: rng.random::<bool>(),
                    })
                    .collect(),
                weight: rng.random_range(lo..=hi),
            }
        })
        .collect();
    Instance::allequal(n, clauses)
}

/// Graph with signed weights uniform in `[lo, hi]`.
pub fn signed_gnp(n: usize, p: f64, lo: f64, hi: f64, seed: u64) -> Result<Instance> {
    if n < 2 || !(0.0..=1.0).contains(&p) || lo > hi {
        return Err(Error::Domain("bad generator parameters".into()));
    }
    let mut rng = stream(seed, Domain::Generator, 3);
    let mut edges = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            if rng.random::<f64>() < p {
                edges.push((i, j, rng.random_range(lo..=hi)));
            }
        }
    }
    if edges.is_empty() {
        edges.push((0, 1, rng.random_range(lo..=hi)));
    }
    Instance::signed_maxcut(n, edges)
}

fn check_range(n: usize, p: f64, lo: f64, hi: f64) -> Result<()> {
    if n < 2 {
        return Err(Error::Domain("need at least 2 vertices".into()));
    }
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::Domain(format!("probability {p} outside [0, 1]")));
    }
    if !(0.0 <= lo && lo <= hi && hi.is_finite()) {
        return Err(Error::Domain(format!("weight range [{lo}, {hi}] invalid")));
    }
    Ok(())
}

/// Nominal weights as a singleton set.
pub fn singleton_spec(inst: &Instance) -> UncertaintySpec {
    UncertaintySpec::Singleton {
        weights: inst.nominal_weights(),
    }
}

/// Box `[(1 − width) w̄, (1 + width) w̄]` in the default coordinates.
pub fn box_spec(inst: &Instance, width: f64) -> Result<UncertaintySpec> {
    if !(0.0..=1.0).contains(&width) {
        return Err(Error::Domain(format!("box width {width} outside [0, 1]")));
    }
    let probe = UncertaintySpec::Polyhedral {
        coords: None,
        a: DenseMatrix::zeros(0, 0),
        b: Vec::new(),
    };
    let layout = probe.layout(inst);
    let center = layout.coordinates(inst.nominal_weights().values());
    let lower: Vec<f64> = center.iter().map(|w| (1.0 - width) * w).collect();
    let upper: Vec<f64> = center.iter().map(|w| (1.0 + width) * w).collect();
    UncertaintySpec::boxed(None, &lower, &upper)
}

/// Budgeted deviations: each coordinate may drop to `(1 − width) w̄_i`, with
/// total relative drop `Σ_i (w̄_i − x_i) / w̄_i ≤ budget`.
pub fn budget_spec(inst: &Instance, width: f64, budget: f64) -> Result<UncertaintySpec> {
    if !(0.0..=1.0).contains(&width) || budget < 0.0 {
        return Err(Error::Domain("bad budget parameters".into()));
    }
    let probe = UncertaintySpec::Polyhedral {
        coords: None,
        a: DenseMatrix::zeros(0, 0),
        b: Vec::new(),
    };
    let center = probe.layout(inst).coordinates(inst.nominal_weights().values());
    if center.iter().any(|&w| w <= 0.0) {
        return Err(Error::Domain("budget generator needs positive nominal weights".into()));
    }
    let d = center.len();
    let mut a = DenseMatrix::zeros(2 * d + 1, d);
    let mut b = Vec::with_capacity(2 * d + 1);
    for i in 0..d {
        a[(i, i)] = 1.0;
        a[(d + i, i)] = -1.0;
        a[(2 * d, i)] = 1.0 / center[i];
    }
    b.extend(center.iter().map(|w| (1.0 - width) * w));
    b.extend(center.iter().map(|w| -w));
    b.push(d as f64 - budget);
    Ok(UncertaintySpec::Polyhedral { coords: None, a, b })
}

/// Ellipsoid centred at the nominal weights with a random correlation
/// structure, scaled so that coordinate `i` moves at most `frac · w̄_i`.
pub fn ellipsoid_spec(inst: &Instance, frac: f64, seed: u64) -> Result<UncertaintySpec> {
    if !(0.0 < frac && frac <= 1.0) {
        return Err(Error::Domain(format!("ellipsoid fraction {frac} outside (0, 1]")));
    }
    let probe = UncertaintySpec::Ellipsoidal {
        coords: None,
        w0: Vec::new(),
        q: DenseMatrix::zeros(0, 0),
        a: 1.0,
    };
    let layout = probe.layout(inst);
    let w0 = layout.coordinates(inst.nominal_weights().values());
    if w0.iter().any(|&w| w <= 0.0) {
        return Err(Error::Domain("ellipsoid generator needs positive nominal weights".into()));
    }
    let d = w0.len();
    let mut rng = stream(seed, Domain::Generator, 4);
    let m = DenseMatrix::from_row_major(d, d, (0..d * d).map(|_| rng.random_range(-1.0..1.0)).collect())?;
    let mut c = m.matmul(&m.transpose())?;
    for i in 0..d {
        c[(i, i)] += d as f64 * 0.5;
    }
    let diag: Vec<f64> = (0..d).map(|i| c[(i, i)]).collect();
    let mut q = DenseMatrix::zeros(d, d);
    for i in 0..d {
        for j in 0..d {
            let corr = c[(i, j)] / (diag[i] * diag[j]).sqrt();
            q[(i, j)] = corr * frac * w0[i] * frac * w0[j];
        }
    }
    Ok(UncertaintySpec::Ellipsoidal {
        coords: None,
        w0,
        q,
        a: 1.0,
    })
}

/// Wasserstein ball around `points` scenarios, each the nominal weights
/// scaled entrywise by factors in `[1 − spread, 1 + spread]`, with random
/// empirical probabilities and the ℓ1 metric.
pub fn wasserstein_spec(
    inst: &Instance,
    points: usize,
    spread: f64,
    radius: f64,
    seed: u64,
) -> Result<UncertaintySpec> {
    if points == 0 || !(0.0..=1.0).contains(&spread) || radius < 0.0 {
        return Err(Error::Domain("bad wasserstein generator parameters".into()));
    }
    let mut rng = stream(seed, Domain::Generator, 5);
    let w = inst.nominal_weights();
    let support = (0..points)
        .map(|_| {
            WeightAssignment::new(
                w.values()
                    .iter()
                    .map(|x| x * rng.random_range(1.0 - spread..=1.0 + spread))
                    .collect(),
            )
        })
        .collect::<Result<Vec<_>>>()?;
    let raw: Vec<f64> = (0..points).map(|_| rng.random_range(0.2..1.0)).collect();
    let total: f64 = raw.iter().sum();
    Ok(UncertaintySpec::Wasserstein {
        support,
        empirical: raw.iter().map(|x| x / total).collect(),
        radius,
        metric: Metric::Named("l1".into()),
    })
}
