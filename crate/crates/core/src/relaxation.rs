//! Vector relaxations shared by the nominal, robust and distributionally
//! robust pipelines.
//!
//! Every problem kind relaxes to `max Σ_t w_t · c_t(U)` over unit columns
//! `u_b`, where each coefficient `c_t(U) ≥ 0` is linear in the Gram matrix
//! `Y = UᵀU`:
//!
//! | kind     | blocks | `c_t(U)`                                   |
//! |----------|--------|--------------------------------------------|
//! | maxcut   | n      | `(1 − u_i·u_j) / 2`                        |
//! | dicut    | n + 1  | `(1 + u_0·u_i − u_0·u_j − u_i·u_j) / 4`    |
//! | allequal | n      | `‖Σ_{l∈C} σ_l u_{v(l)}‖² / k²`             |
//!
//! For DiCut block 0 is the reference vector `u_0` marking the source side.
//! Each coefficient is affine in any single block, which is what makes exact
//! block-coordinate ascent possible.

use crate::instance::{Cut, Instance, ProblemKind};
use crate::sdp::GramFactor;

#[derive(Clone, Debug)]
pub struct Relaxation<'a> {
    inst: &'a Instance,
    /// Terms touching each block.
    incidence: Vec<Vec<usize>>,
}

impl<'a> Relaxation<'a> {
    pub fn new(inst: &'a Instance) -> Self {
        let blocks = match inst.kind() {
            ProblemKind::DiCut => inst.n() + 1,
            _ => inst.n(),
        };
        let mut incidence = vec![Vec::new(); blocks];
        match inst.kind() {
            ProblemKind::MaxCut => {
                for (t, e) in inst.edges().iter().enumerate() {
                    incidence[e.tail].push(t);
                    incidence[e.head].push(t);
                }
            }
            ProblemKind::DiCut => {
                for (t, e) in inst.edges().iter().enumerate() {
                    incidence[0].push(t);
                    incidence[e.tail + 1].push(t);
                    incidence[e.head + 1].push(t);
                }
            }
            ProblemKind::AllEqual => {
                for (t, c) in inst.clauses().iter().enumerate() {
                    for l in &c.literals {
                        if incidence[l.var].last() != Some(&t) {
                            incidence[l.var].push(t);
                        }
                    }
                }
            }
        }
        Relaxation { inst, incidence }
    }

    pub fn instance(&self) -> &'a Instance {
        self.inst
    }

    pub fn blocks(&self) -> usize {
        self.incidence.len()
    }

    pub fn terms(&self) -> usize {
        self.inst.num_terms()
    }

    fn arity_sq(&self) -> f64 {
        let k = self.inst.arity().unwrap_or(1) as f64;
        k * k
    }

    fn term_coefficient(&self, u: &GramFactor, t: usize) -> f64 {
        match self.inst.kind() {
            ProblemKind::MaxCut => {
                let e = &self.inst.edges()[t];
                (1.0 - u.dot(e.tail, e.head)) / 2.0
            }
            ProblemKind::DiCut => {
                let e = &self.inst.edges()[t];
                let (i, j) = (e.tail + 1, e.head + 1);
                (1.0 + u.dot(0, i) - u.dot(0, j) - u.dot(i, j)) / 4.0
            }
            ProblemKind::AllEqual => {
                let c = &self.inst.clauses()[t];
                let mut acc = vec![0.0; u.rank()];
                for l in &c.literals {
                    let s = l.sign();
                    for (a, x) in acc.iter_mut().zip(u.column(l.var)) {
                        *a += s * x;
                    }
                }
                acc.iter().map(|x| x * x).sum::<f64>() / self.arity_sq()
            }
        }
    }

    /// `c_t(U)` for every term. Max-Cut and AllEqual coefficients are
    /// nonnegative and get clamped against roundoff; DiCut coefficients can
    /// be genuinely negative (down to −1/8) and are returned as is.
    pub fn coefficients(&self, u: &GramFactor) -> Vec<f64> {
        let clamp = self.inst.kind() != ProblemKind::DiCut;
        (0..self.terms())
            .map(|t| {
                let c = self.term_coefficient(u, t);
                if clamp {
                    c.max(0.0)
                } else {
                    c
                }
            })
            .collect()
    }

    pub fn objective(&self, u: &GramFactor, w: &[f64]) -> f64 {
        (0..self.terms())
            .map(|t| w[t] * self.term_coefficient(u, t))
            .sum()
    }

    /// Vector `g` with `objective(U) = g·u_b + (terms free of u_b)`.
    pub fn block_direction(&self, u: &GramFactor, w: &[f64], b: usize, g: &mut [f64]) {
        g.iter_mut().for_each(|x| *x = 0.0);
        let mut axpy = |alpha: f64, col: usize| {
            if alpha != 0.0 {
                for (gi, x) in g.iter_mut().zip(u.column(col)) {
                    *gi += alpha * x;
                }
            }
        };
        match self.inst.kind() {
            ProblemKind::MaxCut => {
                for &t in &self.incidence[b] {
                    let e = &self.inst.edges()[t];
                    let other = if e.tail == b { e.head } else { e.tail };
                    axpy(-0.5 * w[t], other);
                }
            }
            ProblemKind::DiCut => {
                for &t in &self.incidence[b] {
                    let e = &self.inst.edges()[t];
                    let (i, j) = (e.tail + 1, e.head + 1);
                    let q = 0.25 * w[t];
                    if b == 0 {
                        axpy(q, i);
                        axpy(-q, j);
                    } else if b == i {
                        axpy(q, 0);
                        axpy(-q, j);
                    } else {
                        axpy(-q, 0);
                        axpy(-q, i);
                    }
                }
            }
            ProblemKind::AllEqual => {
                let scale = 2.0 / self.arity_sq();
                for &t in &self.incidence[b] {
                    let c = &self.inst.clauses()[t];
                    let s_self: f64 = c
                        .literals
                        .iter()
                        .filter(|l| l.var == b)
                        .map(|l| l.sign())
                        .sum();
                    if s_self == 0.0 {
                        continue;
                    }
                    for l in c.literals.iter().filter(|l| l.var != b) {
                        axpy(scale * w[t] * s_self * l.sign(), l.var);
                    }
                }
            }
        }
    }

    /// Map hyperplane signs of the blocks to an assignment of the instance.
    /// For DiCut the side of `u_0` is the source side S.
    pub fn signs_to_cut(&self, signs: &[i8]) -> Cut {
        let y = match self.inst.kind() {
            ProblemKind::DiCut => signs[1..].iter().map(|&s| s * signs[0]).collect(),
            _ => signs.to_vec(),
        };
        Cut::new(y).expect("signs are ±1")
    }

    /// Rank-one embedding `u_i = y_i e_1` of an assignment.
    pub fn embed(&self, y: &Cut) -> GramFactor {
        let mut u = GramFactor::zeros(1, self.blocks());
        let offset = usize::from(self.inst.kind() == ProblemKind::DiCut);
        if offset == 1 {
            u.column_mut(0)[0] = 1.0;
        }
        for (i, &s) in y.signs().iter().enumerate() {
            u.column_mut(i + offset)[0] = s as f64;
        }
        u
    }
}
