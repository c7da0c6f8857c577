//! Elliptope SDP `max ¼⟨W, 1 − Y⟩, Y ⪰ 0, diag(Y) = 1` solved through a
//! low-rank factor `Y = UᵀU` by exact block-coordinate ascent.
//!
//! Each sweep replaces every column `u_b` by the unit maximizer `g/‖g‖` of
//! its affine part, so the objective never decreases. With rank
//! `⌈√(2n)⌉ + 1` second-order stationary points are generically global.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::instance::{Instance, ProblemKind, WeightAssignment};
use crate::numerics::DenseMatrix;
use crate::relaxation::Relaxation;
use crate::rng::{stream, unit_vector, Domain};

/// Unit-norm columns `u_b ∈ ℝ^rank`, stored column-major.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "FactorFile", into = "FactorFile")]
pub struct GramFactor {
    rank: usize,
    n: usize,
    data: Vec<f64>,
}

#[derive(Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct FactorFile {
    rank: usize,
    n: usize,
    data: Vec<f64>,
}

impl From<GramFactor> for FactorFile {
    fn from(u: GramFactor) -> Self {
        FactorFile {
            rank: u.rank,
            n: u.n,
            data: u.data,
        }
    }
}

impl TryFrom<FactorFile> for GramFactor {
    type Error = Error;

    fn try_from(f: FactorFile) -> Result<Self> {
        if f.rank == 0 || f.data.len() != f.rank * f.n {
            return Err(Error::parse(
                "factor",
                format!("data has {} entries, expected rank {} × n {}", f.data.len(), f.rank, f.n),
            ));
        }
        let columns: Vec<Vec<f64>> = f.data.chunks(f.rank).map(<[f64]>::to_vec).collect();
        GramFactor::from_columns(&columns)
    }
}

impl GramFactor {
    pub fn zeros(rank: usize, n: usize) -> Self {
        GramFactor {
            rank,
            n,
            data: vec![0.0; rank * n],
        }
    }

    pub fn random<R: Rng + ?Sized>(rank: usize, n: usize, rng: &mut R) -> Self {
        let mut u = Self::zeros(rank, n);
        for i in 0..n {
            let v = unit_vector(rng, rank);
            u.column_mut(i).copy_from_slice(&v);
        }
        u
    }

    /// Build from explicit columns; every column must have unit norm.
    pub fn from_columns(columns: &[Vec<f64>]) -> Result<Self> {
        let rank = columns.first().map_or(1, Vec::len);
        let mut u = Self::zeros(rank, columns.len());
        for (i, c) in columns.iter().enumerate() {
            if c.len() != rank {
                return Err(Error::Dimension {
                    expected: rank,
                    actual: c.len(),
                });
            }
            let norm = c.iter().map(|x| x * x).sum::<f64>().sqrt();
            if (norm - 1.0).abs() > 1e-10 {
                return Err(Error::Domain(format!("column {i} has norm {norm}")));
            }
            u.column_mut(i).copy_from_slice(c);
        }
        Ok(u)
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    /// Number of columns.
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn column(&self, i: usize) -> &[f64] {
        &self.data[i * self.rank..(i + 1) * self.rank]
    }

    #[inline]
    pub fn column_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.data[i * self.rank..(i + 1) * self.rank]
    }

    #[inline]
    pub fn dot(&self, i: usize, j: usize) -> f64 {
        crate::numerics::dot(self.column(i), self.column(j))
    }

    /// `Y = UᵀU`.
    pub fn gram(&self) -> DenseMatrix {
        let mut y = DenseMatrix::zeros(self.n, self.n);
        for i in 0..self.n {
            for j in i..self.n {
                let v = self.dot(i, j);
                y[(i, j)] = v;
                y[(j, i)] = v;
            }
        }
        y
    }

    /// Largest deviation of a column norm from one.
    pub fn max_norm_error(&self) -> f64 {
        (0..self.n)
            .map(|i| (self.dot(i, i).sqrt() - 1.0).abs())
            .fold(0.0, f64::max)
    }

    pub(crate) fn normalize_columns(&mut self) {
        for i in 0..self.n {
            let norm = self.dot(i, i).sqrt();
            if norm > 0.0 {
                self.column_mut(i).iter_mut().for_each(|x| *x /= norm);
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolveReport {
    pub value: f64,
    pub iterations: usize,
    /// Objective improvement of the last sweep (saddle solvers: final gap).
    pub residual: f64,
    pub converged: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SdpConfig {
    /// Factor rank; `None` picks `⌈√(2·blocks)⌉ + 1`.
    pub rank: Option<usize>,
    /// Stop once a sweep improves the objective by less than
    /// `tol · max(1, |value|)`.
    pub tol: f64,
    /// Maximum number of sweeps per restart.
    pub max_iter: usize,
    pub restarts: usize,
    pub seed: u64,
}

impl Default for SdpConfig {
    fn default() -> Self {
        SdpConfig {
            rank: None,
            tol: 1e-9,
            max_iter: 20_000,
            restarts: 3,
            seed: 0,
        }
    }
}

pub fn default_rank(blocks: usize) -> usize {
    ((2.0 * blocks as f64).sqrt().ceil() as usize + 1).min(blocks.max(1))
}

/// `½ Σ_{i<j} w_ij (1 − u_i·u_j)` for a Max-Cut instance.
pub fn sdp_objective(inst: &Instance, u: &GramFactor, w: &WeightAssignment) -> Result<f64> {
    if inst.kind() != ProblemKind::MaxCut {
        return Err(Error::Domain("sdp_objective expects a maxcut instance".into()));
    }
    relaxed_objective(inst, u, w)
}

/// Relaxed objective for any problem kind.
pub fn relaxed_objective(inst: &Instance, u: &GramFactor, w: &WeightAssignment) -> Result<f64> {
    let relax = Relaxation::new(inst);
    if u.n() != relax.blocks() {
        return Err(Error::Dimension {
            expected: relax.blocks(),
            actual: u.n(),
        });
    }
    if w.len() != inst.num_terms() {
        return Err(Error::Dimension {
            expected: inst.num_terms(),
            actual: w.len(),
        });
    }
    Ok(relax.objective(u, w.values()))
}

/// One full pass of exact block updates; returns the new objective value.
pub(crate) fn sweep(relax: &Relaxation<'_>, w: &[f64], u: &mut GramFactor, g: &mut [f64]) {
    for b in 0..relax.blocks() {
        relax.block_direction(u, w, b, g);
        let norm = g.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 1e-14 {
            let col = u.column_mut(b);
            for (c, gi) in col.iter_mut().zip(g.iter()) {
                *c = gi / norm;
            }
        }
    }
}

/// Block-coordinate ascent from a given starting factor.
pub fn ascend(
    relax: &Relaxation<'_>,
    w: &[f64],
    mut u: GramFactor,
    tol: f64,
    max_iter: usize,
) -> (GramFactor, SolveReport) {
    let mut g = vec![0.0; u.rank()];
    let mut value = relax.objective(&u, w);
    let mut iterations = 0;
    let mut residual = f64::INFINITY;
    let mut converged = false;
    while iterations < max_iter {
        sweep(relax, w, &mut u, &mut g);
        iterations += 1;
        let next = relax.objective(&u, w);
        residual = next - value;
        value = next;
        if residual.abs() < tol * value.abs().max(1.0) {
            converged = true;
            break;
        }
    }
    (
        u,
        SolveReport {
            value,
            iterations,
            residual,
            converged,
        },
    )
}

/// Solve the nominal relaxation for fixed weights `w`, keeping the best of
/// `cfg.restarts` random starts.
pub fn solve_elliptope_max(
    inst: &Instance,
    w: &WeightAssignment,
    cfg: &SdpConfig,
) -> Result<(GramFactor, SolveReport)> {
    if w.len() != inst.num_terms() {
        return Err(Error::Dimension {
            expected: inst.num_terms(),
            actual: w.len(),
        });
    }
    let relax = Relaxation::new(inst);
    solve_with_starts(&relax, w.values(), cfg, None)
}

pub(crate) fn solve_with_starts(
    relax: &Relaxation<'_>,
    w: &[f64],
    cfg: &SdpConfig,
    warm: Option<&GramFactor>,
) -> Result<(GramFactor, SolveReport)> {
    let blocks = relax.blocks();
    let rank = cfg.rank.unwrap_or_else(|| default_rank(blocks));
    if rank == 0 {
        return Err(Error::Domain("factor rank must be at least 1".into()));
    }
    let mut best: Option<(GramFactor, SolveReport)> = None;
    let mut starts: Vec<GramFactor> = warm.into_iter().cloned().collect();
    for k in 0..cfg.restarts.max(1) {
        let mut rng = stream(cfg.seed, Domain::SdpInit, k as u64);
        starts.push(GramFactor::random(rank, blocks, &mut rng));
    }
    for start in starts {
        let (u, report) = ascend(relax, w, start, cfg.tol, cfg.max_iter);
        if best.as_ref().is_none_or(|(_, b)| report.value > b.value) {
            best = Some((u, report));
        }
    }
    Ok(best.expect("at least one start"))
}
