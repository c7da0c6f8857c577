//! Problem instances, cuts, weight assignments and exact combinatorial objectives.
//!
//! Vertex and variable indices are 1-based in files and 0-based in memory.
//! Max-Cut edges are stored once per unordered pair with `tail < head`.

use std::collections::HashSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ProblemKind {
    MaxCut,
    DiCut,
    AllEqual,
}

impl fmt::Display for ProblemKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ProblemKind::MaxCut => "maxcut",
            ProblemKind::DiCut => "dicut",
            ProblemKind::AllEqual => "allequal",
        })
    }
}

/// An undirected edge (Max-Cut) or a directed arc `tail -> head` (DiCut).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Edge {
    pub tail: usize,
    pub head: usize,
    pub weight: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Literal {
    pub var: usize,
    pub negated: bool,
}

impl Literal {
    /// Sign the literal contributes: `-1` for `¬x`, `+1` for `x`.
    pub fn sign(&self) -> f64 {
        if self.negated {
            -1.0
        } else {
            1.0
        }
    }

    fn from_signed(lit: i64, n: usize, field: &str) -> Result<Self> {
        if lit == 0 {
            return Err(Error::parse(field, "literal 0 is not a variable"));
        }
        let var = lit.unsigned_abs() as usize;
        if var > n {
            return Err(Error::parse(
                field,
                format!("variable {var} out of range 1..={n}"),
            ));
        }
        Ok(Literal {
            var: var - 1,
            negated: lit < 0,
        })
    }

    fn to_signed(self) -> i64 {
        let v = self.var as i64 + 1;
        if self.negated {
            -v
        } else {
            v
        }
    }
}

/// An AllEqual clause `l_1 ≡ l_2 ≡ … ≡ l_k`.
#[derive(Clone, Debug, PartialEq)]
pub struct Clause {
    pub literals: Vec<Literal>,
    pub weight: f64,
}

/// A validated, immutable problem instance.
#[derive(Clone, Debug, PartialEq)]
pub struct Instance {
    n: usize,
    kind: ProblemKind,
    edges: Vec<Edge>,
    clauses: Vec<Clause>,
    signed: bool,
}

fn check_weight(w: f64, signed: bool, field: &str) -> Result<()> {
    if !w.is_finite() {
        return Err(Error::parse(field, "weight is not finite"));
    }
    if w < 0.0 && !signed {
        return Err(Error::Domain(format!(
            "{field}: negative weight {w} requires the signed flag"
        )));
    }
    Ok(())
}

impl Instance {
    /// Max-Cut instance from 0-based `(i, j, w)` triples.
    pub fn maxcut(n: usize, edges: impl IntoIterator<Item = (usize, usize, f64)>) -> Result<Self> {
        Self::graph(ProblemKind::MaxCut, n, edges, false)
    }

    /// Max-DiCut instance from 0-based arcs `(tail, head, w)`.
    pub fn dicut(n: usize, arcs: impl IntoIterator<Item = (usize, usize, f64)>) -> Result<Self> {
        Self::graph(ProblemKind::DiCut, n, arcs, false)
    }

    /// Max-Cut instance that admits negative weights.
    pub fn signed_maxcut(
        n: usize,
        edges: impl IntoIterator<Item = (usize, usize, f64)>,
    ) -> Result<Self> {
        Self::graph(ProblemKind::MaxCut, n, edges, true)
    }

    fn graph(
        kind: ProblemKind,
        n: usize,
        edges: impl IntoIterator<Item = (usize, usize, f64)>,
        signed: bool,
    ) -> Result<Self> {
        if n == 0 {
            return Err(Error::parse("n", "instance needs at least one vertex"));
        }
        let mut seen = HashSet::new();
        let mut out = Vec::new();
        for (idx, (i, j, w)) in edges.into_iter().enumerate() {
            let field = format!("edges[{idx}]");
            if i >= n || j >= n {
                return Err(Error::parse(
                    &field,
                    format!("endpoint out of range 1..={n}"),
                ));
            }
            if i == j {
                return Err(Error::parse(&field, format!("self-loop at vertex {}", i + 1)));
            }
            check_weight(w, signed, &field)?;
            let (tail, head) = match kind {
                ProblemKind::MaxCut => (i.min(j), i.max(j)),
                _ => (i, j),
            };
            if !seen.insert((tail, head)) {
                return Err(Error::parse(
                    &field,
                    format!("duplicate edge ({}, {})", i + 1, j + 1),
                ));
            }
            out.push(Edge {
                tail,
                head,
                weight: w,
            });
        }
        Ok(Instance {
            n,
            kind,
            edges: out,
            clauses: Vec::new(),
            signed,
        })
    }

    /// Max k-AllEqual instance; every clause must have the same arity `k ≥ 2`.
    pub fn allequal(n: usize, clauses: Vec<Clause>) -> Result<Self> {
        if n == 0 {
            return Err(Error::parse("n", "instance needs at least one variable"));
        }
        let arity = clauses.first().map(|c| c.literals.len());
        for (idx, c) in clauses.iter().enumerate() {
            let field = format!("clauses[{idx}]");
            if c.literals.len() < 2 {
                return Err(Error::parse(&field, "clause arity must be at least 2"));
            }
            if Some(c.literals.len()) != arity {
                return Err(Error::parse(&field, "clause arity differs from the first clause"));
            }
            if let Some(l) = c.literals.iter().find(|l| l.var >= n) {
                return Err(Error::parse(
                    &field,
                    format!("variable {} out of range 1..={n}", l.var + 1),
                ));
            }
            check_weight(c.weight, false, &field)?;
        }
        Ok(Instance {
            n,
            kind: ProblemKind::AllEqual,
            edges: Vec::new(),
            clauses,
            signed: false,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn kind(&self) -> ProblemKind {
        self.kind
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn clauses(&self) -> &[Clause] {
        &self.clauses
    }

    pub fn is_signed(&self) -> bool {
        self.signed
    }

    /// Clause arity `k` for AllEqual instances.
    pub fn arity(&self) -> Option<usize> {
        self.clauses.first().map(|c| c.literals.len())
    }

    /// Number of weighted terms (edges, arcs or clauses).
    pub fn num_terms(&self) -> usize {
        match self.kind {
            ProblemKind::AllEqual => self.clauses.len(),
            _ => self.edges.len(),
        }
    }

    pub fn nominal_weights(&self) -> WeightAssignment {
        let values = match self.kind {
            ProblemKind::AllEqual => self.clauses.iter().map(|c| c.weight).collect(),
            _ => self.edges.iter().map(|e| e.weight).collect(),
        };
        WeightAssignment {
            values,
            signed: self.signed,
        }
    }

    /// Per-term satisfaction indicator of a ±1 assignment, so that the
    /// combinatorial objective is `Σ_t w_t · indicator_t`.
    pub fn term_indicators(&self, y: &Cut) -> Result<Vec<f64>> {
        check_len(self.n, y.len())?;
        let s = y.signs();
        Ok(match self.kind {
            ProblemKind::MaxCut => self
                .edges
                .iter()
                .map(|e| if s[e.tail] != s[e.head] { 1.0 } else { 0.0 })
                .collect(),
            ProblemKind::DiCut => self
                .edges
                .iter()
                .map(|e| if s[e.tail] == 1 && s[e.head] == -1 { 1.0 } else { 0.0 })
                .collect(),
            ProblemKind::AllEqual => self
                .clauses
                .iter()
                .map(|c| {
                    let mut vals = c.literals.iter().map(|l| lit_value(l, s));
                    let first = vals.next();
                    if vals.all(|v| Some(v) == first) {
                        1.0
                    } else {
                        0.0
                    }
                })
                .collect(),
        })
    }

    /// Objective of `y` under `w` for whatever kind this instance is.
    pub fn value(&self, y: &Cut, w: &WeightAssignment) -> Result<f64> {
        check_len(self.num_terms(), w.len())?;
        let ind = self.term_indicators(y)?;
        Ok(ind.iter().zip(w.values()).map(|(a, b)| a * b).sum())
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: InstanceFile =
            serde_json::from_str(text).map_err(|e| Error::parse("instance", e.to_string()))?;
        file.into_instance()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&InstanceFile::from(self)).expect("instance serializes")
    }

    /// Plain edge list: one `i j [w]` per line (1-based, weight defaults to 1),
    /// `#`/`c` comment lines, optional DIMACS `p <tag> n m` header and `e`/`a`
    /// line prefixes. Without a header `n` is the largest index seen.
    pub fn from_edge_list(text: &str, kind: ProblemKind) -> Result<Self> {
        if kind == ProblemKind::AllEqual {
            return Err(Error::parse("kind", "edge lists describe maxcut or dicut only"));
        }
        let mut declared_n = None;
        let mut triples = Vec::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') || line.starts_with("c ") || line == "c" {
                continue;
            }
            let field = format!("line {}", lineno + 1);
            let mut tokens: Vec<&str> = line.split_whitespace().collect();
            if tokens[0] == "p" {
                let n = tokens
                    .get(2)
                    .and_then(|t| t.parse::<usize>().ok())
                    .ok_or_else(|| Error::parse(&field, "malformed `p` header"))?;
                declared_n = Some(n);
                continue;
            }
            if tokens[0] == "e" || tokens[0] == "a" {
                tokens.remove(0);
            }
            if tokens.len() < 2 || tokens.len() > 3 {
                return Err(Error::parse(&field, "expected `i j [w]`"));
            }
            let idx = |t: &str| -> Result<usize> {
                let v: usize = t
                    .parse()
                    .map_err(|_| Error::parse(&field, format!("bad vertex index `{t}`")))?;
                if v == 0 {
                    return Err(Error::parse(&field, "vertex indices are 1-based"));
                }
                Ok(v - 1)
            };
            let i = idx(tokens[0])?;
            let j = idx(tokens[1])?;
            let w = match tokens.get(2) {
                Some(t) => t
                    .parse::<f64>()
                    .map_err(|_| Error::parse(&field, format!("bad weight `{t}`")))?,
                None => 1.0,
            };
            triples.push((i, j, w));
        }
        let n = declared_n.unwrap_or_else(|| {
            triples
                .iter()
                .map(|&(i, j, _)| i.max(j) + 1)
                .max()
                .unwrap_or(0)
        });
        Self::graph(kind, n, triples, false)
    }

    /// Accepts JSON (leading `{`) or a Max-Cut edge list.
    pub fn parse(text: &str) -> Result<Self> {
        if text.trim_start().starts_with('{') {
            Self::from_json(text)
        } else {
            Self::from_edge_list(text, ProblemKind::MaxCut)
        }
    }
}

fn lit_value(l: &Literal, s: &[i8]) -> i8 {
    if l.negated {
        -s[l.var]
    } else {
        s[l.var]
    }
}

fn check_len(expected: usize, actual: usize) -> Result<()> {
    if expected != actual {
        return Err(Error::Dimension { expected, actual });
    }
    Ok(())
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct InstanceFile {
    kind: ProblemKind,
    n: usize,
    #[serde(default)]
    edges: Vec<(i64, i64, f64)>,
    #[serde(default)]
    clauses: Vec<ClauseFile>,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    signed: bool,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ClauseFile {
    literals: Vec<i64>,
    weight: f64,
}

impl InstanceFile {
    fn into_instance(self) -> Result<Instance> {
        let n = self.n;
        match self.kind {
            ProblemKind::AllEqual => {
                if !self.edges.is_empty() {
                    return Err(Error::parse("edges", "allequal instances take clauses"));
                }
                let clauses = self
                    .clauses
                    .into_iter()
                    .enumerate()
                    .map(|(idx, c)| {
                        let field = format!("clauses[{idx}].literals");
                        let literals = c
                            .literals
                            .iter()
                            .map(|&l| Literal::from_signed(l, n, &field))
                            .collect::<Result<Vec<_>>>()?;
                        Ok(Clause {
                            literals,
                            weight: c.weight,
                        })
                    })
                    .collect::<Result<Vec<_>>>()?;
                Instance::allequal(n, clauses)
            }
            kind => {
                if !self.clauses.is_empty() {
                    return Err(Error::parse("clauses", "graph instances take edges"));
                }
                let mut triples = Vec::with_capacity(self.edges.len());
                for (idx, (i, j, w)) in self.edges.into_iter().enumerate() {
                    if i < 1 || j < 1 || i as usize > n || j as usize > n {
                        return Err(Error::parse(
                            format!("edges[{idx}]"),
                            format!("endpoint out of range 1..={n}"),
                        ));
                    }
                    triples.push((i as usize - 1, j as usize - 1, w));
                }
                Instance::graph(kind, n, triples, self.signed)
            }
        }
    }
}

impl From<&Instance> for InstanceFile {
    fn from(inst: &Instance) -> Self {
        InstanceFile {
            kind: inst.kind,
            n: inst.n,
            edges: inst
                .edges
                .iter()
                .map(|e| (e.tail as i64 + 1, e.head as i64 + 1, e.weight))
                .collect(),
            clauses: inst
                .clauses
                .iter()
                .map(|c| ClauseFile {
                    literals: c.literals.iter().map(|l| l.to_signed()).collect(),
                    weight: c.weight,
                })
                .collect(),
            signed: inst.signed,
        }
    }
}

/// A ±1 assignment: `+1` means the vertex lies in S (or the variable is true).
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<i8>", into = "Vec<i8>")]
pub struct Cut(Vec<i8>);

impl Cut {
    pub fn new(signs: Vec<i8>) -> Result<Self> {
        if let Some(pos) = signs.iter().position(|&s| s != 1 && s != -1) {
            return Err(Error::Domain(format!(
                "cut entry {pos} is {} (must be ±1)",
                signs[pos]
            )));
        }
        Ok(Cut(signs))
    }

    pub fn all_positive(n: usize) -> Self {
        Cut(vec![1; n])
    }

    /// Bit `i` of `mask` set means entry `i` is `-1`.
    pub fn from_mask(mask: u64, n: usize) -> Self {
        Cut((0..n)
            .map(|i| if mask >> i & 1 == 1 { -1 } else { 1 })
            .collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn signs(&self) -> &[i8] {
        &self.0
    }

    pub fn negated(&self) -> Self {
        Cut(self.0.iter().map(|s| -s).collect())
    }
}

impl TryFrom<Vec<i8>> for Cut {
    type Error = Error;
    fn try_from(v: Vec<i8>) -> Result<Self> {
        Cut::new(v)
    }
}

impl From<Cut> for Vec<i8> {
    fn from(c: Cut) -> Self {
        c.0
    }
}

/// One weight per edge, arc or clause, in the instance's term order.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct WeightAssignment {
    values: Vec<f64>,
    #[serde(skip)]
    signed: bool,
}

impl WeightAssignment {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if let Some(pos) = values.iter().position(|w| !w.is_finite()) {
            return Err(Error::Domain(format!("weight {pos} is not finite")));
        }
        if let Some(pos) = values.iter().position(|&w| w < 0.0) {
            return Err(Error::Domain(format!(
                "weight {pos} is negative ({}); only signed assignments allow that",
                values[pos]
            )));
        }
        Ok(WeightAssignment {
            values,
            signed: false,
        })
    }

    /// Weights that may be negative (negative-weight bound path only).
    pub fn signed(values: Vec<f64>) -> Result<Self> {
        if let Some(pos) = values.iter().position(|w| !w.is_finite()) {
            return Err(Error::Domain(format!("weight {pos} is not finite")));
        }
        Ok(WeightAssignment {
            values,
            signed: true,
        })
    }

    pub fn zeros(len: usize) -> Self {
        WeightAssignment {
            values: vec![0.0; len],
            signed: false,
        }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn is_signed(&self) -> bool {
        self.signed
    }

    pub fn total(&self) -> f64 {
        self.values.iter().sum()
    }

    /// Sum of the negative entries (`W₋`).
    pub fn negative_part(&self) -> f64 {
        self.values.iter().filter(|&&w| w < 0.0).sum()
    }
}

impl TryFrom<Vec<f64>> for WeightAssignment {
    type Error = Error;
    fn try_from(v: Vec<f64>) -> Result<Self> {
        WeightAssignment::new(v)
    }
}

impl From<WeightAssignment> for Vec<f64> {
    fn from(w: WeightAssignment) -> Self {
        w.values
    }
}

fn require(inst: &Instance, kind: ProblemKind, y: &Cut, w: &WeightAssignment) -> Result<()> {
    if inst.kind() != kind {
        return Err(Error::Domain(format!(
            "expected a {kind} instance, got {}",
            inst.kind()
        )));
    }
    check_len(inst.n(), y.len())?;
    check_len(inst.num_terms(), w.len())
}

/// `½ Σ_{i<j} w_ij (1 − y_i y_j)`: total weight of edges crossing the cut.
pub fn cut_value(inst: &Instance, y: &Cut, w: &WeightAssignment) -> Result<f64> {
    require(inst, ProblemKind::MaxCut, y, w)?;
    inst.value(y, w)
}

/// Weight of arcs leaving S (`y_tail = +1`, `y_head = −1`).
pub fn dicut_value(inst: &Instance, y: &Cut, w: &WeightAssignment) -> Result<f64> {
    require(inst, ProblemKind::DiCut, y, w)?;
    inst.value(y, w)
}

/// Weight of clauses whose literals all take the same value.
pub fn allequal_value(inst: &Instance, x: &Cut, w: &WeightAssignment) -> Result<f64> {
    require(inst, ProblemKind::AllEqual, x, w)?;
    inst.value(x, w)
}
