//! Small semidefinite programs over real variables with Hermitian matrix blocks:
//!
//! ```text
//! minimise   cᵀx
//! subject to S_b = C_b + Σ_i x_i A_{b,i} ⪰ 0   for every block b
//!            E x = f
//! ```
//!
//! The dual is `max -Σ⟨C_b, Z_b⟩ + fᵀy` subject to `Z_b ⪰ 0` and
//! `c = Σ_b A_b*(Z_b) + Eᵀy`; the dual multipliers are returned with every solve.

mod ipm;
mod schur;
mod sdpa;

use std::collections::BTreeMap;

use serde::Serialize;

use crate::tensor::{CMat, C64};
use crate::{Error, Result};

pub use ipm::InteriorPoint;
pub use sdpa::to_sdpa;
pub(crate) use schur::pauli_traces;

/// Hermitian matrix stored as a list of nonzero entries (both triangles).
#[derive(Clone, Debug, PartialEq)]
pub struct SparseHermitian {
    side: usize,
    entries: Vec<(usize, usize, C64)>,
}

impl SparseHermitian {
    /// Merges duplicate positions and checks Hermiticity to `1e-12` relative.
    pub fn new(side: usize, entries: impl IntoIterator<Item = (usize, usize, C64)>) -> Result<Self> {
        let mut map: BTreeMap<(usize, usize), C64> = BTreeMap::new();
        for (i, j, v) in entries {
            if i >= side || j >= side {
                return Err(Error::Program(format!("entry ({i},{j}) outside a {side}x{side} block")));
            }
            *map.entry((i, j)).or_insert(C64::new(0.0, 0.0)) += v;
        }
        map.retain(|_, v| v.norm() != 0.0);
        let scale = map.values().fold(0.0f64, |m, v| m.max(v.norm()));
        for (&(i, j), v) in &map {
            let w = map.get(&(j, i)).copied().unwrap_or_default();
            if (v - w.conj()).norm() > 1e-12 * scale.max(1.0) {
                return Err(Error::NotHermitian { deviation: (v - w.conj()).norm() });
            }
        }
        Ok(SparseHermitian { side, entries: map.into_iter().map(|((i, j), v)| (i, j, v)).collect() })
    }

    pub fn from_dense(m: &CMat) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return Err(Error::DimensionMismatch { expected: m.nrows(), got: m.ncols() });
        }
        let n = m.nrows();
        Self::new(n, (0..n).flat_map(|i| (0..n).map(move |j| (i, j, m[(i, j)]))))
    }

    pub fn identity(side: usize) -> Self {
        SparseHermitian { side, entries: (0..side).map(|i| (i, i, C64::new(1.0, 0.0))).collect() }
    }

    pub fn side(&self) -> usize {
        self.side
    }

    pub fn entries(&self) -> &[(usize, usize, C64)] {
        &self.entries
    }

    pub fn to_dense(&self) -> CMat {
        let mut m = CMat::zeros(self.side, self.side);
        self.add_to(1.0, &mut m);
        m
    }

    /// `m += alpha · self`.
    pub fn add_to(&self, alpha: f64, m: &mut CMat) {
        for &(i, j, v) in &self.entries {
            m[(i, j)] += v * alpha;
        }
    }

    /// `Re tr(self · m)`.
    pub fn inner(&self, m: &CMat) -> f64 {
        self.entries.iter().map(|&(i, j, v)| (v * m[(j, i)]).re).sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.entries.iter().map(|(_, _, v)| v.norm_sqr()).sum::<f64>().sqrt()
    }

    fn merged(&self, other: &SparseHermitian) -> Result<SparseHermitian> {
        SparseHermitian::new(self.side, self.entries.iter().chain(other.entries.iter()).copied())
    }
}

/// One PSD constraint `C + Σ x_i A_i ⪰ 0`.
#[derive(Clone, Debug, PartialEq)]
pub struct PsdBlock {
    side: usize,
    constant: CMat,
    terms: BTreeMap<usize, SparseHermitian>,
}

impl PsdBlock {
    pub fn new(side: usize) -> Self {
        PsdBlock { side, constant: CMat::zeros(side, side), terms: BTreeMap::new() }
    }

    pub fn side(&self) -> usize {
        self.side
    }

    pub fn constant(&self) -> &CMat {
        &self.constant
    }

    pub fn terms(&self) -> &BTreeMap<usize, SparseHermitian> {
        &self.terms
    }

    pub fn set_constant(&mut self, c: CMat) -> Result<()> {
        if c.nrows() != self.side || c.ncols() != self.side {
            return Err(Error::DimensionMismatch { expected: self.side, got: c.nrows() });
        }
        let dev = crate::tensor::hermitian_deviation(&c);
        if dev > 1e-12 * c.iter().fold(1.0f64, |m, z| m.max(z.norm())) {
            return Err(Error::NotHermitian { deviation: dev });
        }
        self.constant = crate::tensor::hermitian_part(&c);
        Ok(())
    }

    /// Adds `a` to the coefficient of variable `var`.
    pub fn add_term(&mut self, var: usize, a: SparseHermitian) -> Result<()> {
        if a.side() != self.side {
            return Err(Error::DimensionMismatch { expected: self.side, got: a.side() });
        }
        let merged = match self.terms.get(&var) {
            Some(prev) => prev.merged(&a)?,
            None => a,
        };
        if merged.entries.is_empty() {
            self.terms.remove(&var);
        } else {
            self.terms.insert(var, merged);
        }
        Ok(())
    }

    /// `C + Σ x_i A_i`.
    pub fn evaluate(&self, x: &[f64]) -> CMat {
        let mut m = self.constant.clone();
        for (&i, a) in &self.terms {
            a.add_to(x[i], &mut m);
        }
        m
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Equality {
    pub row: Vec<f64>,
    pub rhs: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConicProgram {
    n_vars: usize,
    objective: Vec<f64>,
    equalities: Vec<Equality>,
    blocks: Vec<PsdBlock>,
}

impl ConicProgram {
    pub fn new(n_vars: usize) -> Self {
        ConicProgram { n_vars, objective: vec![0.0; n_vars], equalities: vec![], blocks: vec![] }
    }

    pub fn n_vars(&self) -> usize {
        self.n_vars
    }

    pub fn objective(&self) -> &[f64] {
        &self.objective
    }

    pub fn equalities(&self) -> &[Equality] {
        &self.equalities
    }

    pub fn blocks(&self) -> &[PsdBlock] {
        &self.blocks
    }

    pub fn set_objective(&mut self, c: Vec<f64>) -> Result<()> {
        if c.len() != self.n_vars {
            return Err(Error::DimensionMismatch { expected: self.n_vars, got: c.len() });
        }
        self.objective = c;
        Ok(())
    }

    pub fn add_equality(&mut self, row: Vec<f64>, rhs: f64) -> Result<()> {
        if row.len() != self.n_vars {
            return Err(Error::DimensionMismatch { expected: self.n_vars, got: row.len() });
        }
        self.equalities.push(Equality { row, rhs });
        Ok(())
    }

    pub fn add_block(&mut self, block: PsdBlock) -> Result<usize> {
        if let Some((&v, _)) = block.terms.iter().next_back() {
            if v >= self.n_vars {
                return Err(Error::Program(format!("block refers to variable {v} of {}", self.n_vars)));
            }
        }
        self.blocks.push(block);
        Ok(self.blocks.len() - 1)
    }

    /// Every variable must enter some block or equality.
    pub fn validate(&self) -> Result<()> {
        if self.blocks.is_empty() {
            return Err(Error::Program("program has no PSD block".into()));
        }
        let mut used = vec![false; self.n_vars];
        for b in &self.blocks {
            for &v in b.terms.keys() {
                used[v] = true;
            }
        }
        for e in &self.equalities {
            for (v, &a) in e.row.iter().enumerate() {
                if a != 0.0 {
                    used[v] = true;
                }
            }
        }
        if let Some(v) = used.iter().position(|u| !u) {
            return Err(Error::Program(format!("variable {v} appears in no constraint")));
        }
        if self.objective.iter().chain(self.equalities.iter().flat_map(|e| e.row.iter().chain([&e.rhs]))).any(|v| !v.is_finite()) {
            return Err(Error::Program("non-finite objective or equality data".into()));
        }
        Ok(())
    }

    /// The same program with each complex block `H` replaced by the real
    /// symmetric `[[Re H, -Im H], [Im H, Re H]]`.
    pub fn real_embedding(&self) -> ConicProgram {
        let embed = |n: usize, entries: &mut dyn Iterator<Item = (usize, usize, C64)>| {
            let mut out = Vec::new();
            for (i, j, v) in entries {
                for (di, dj, val) in [(0, 0, v.re), (0, n, -v.im), (n, 0, v.im), (n, n, v.re)] {
                    if val != 0.0 {
                        out.push((i + di, j + dj, C64::new(val, 0.0)));
                    }
                }
            }
            out
        };
        let blocks = self
            .blocks
            .iter()
            .map(|b| {
                let n = b.side;
                let mut dense = (0..n).flat_map(|i| (0..n).map(move |j| (i, j))).map(|(i, j)| (i, j, b.constant[(i, j)]));
                let constant = SparseHermitian::new(2 * n, embed(n, &mut dense)).expect("embedding is symmetric").to_dense();
                let terms = b
                    .terms
                    .iter()
                    .map(|(&v, a)| {
                        let mut it = a.entries.iter().copied();
                        (v, SparseHermitian::new(2 * n, embed(n, &mut it)).expect("embedding is symmetric"))
                    })
                    .collect();
                PsdBlock { side: 2 * n, constant, terms }
            })
            .collect();
        ConicProgram { n_vars: self.n_vars, objective: self.objective.clone(), equalities: self.equalities.clone(), blocks }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Status {
    Optimal,
    /// The constraints admit no point; the dual certificate is a Farkas ray.
    Infeasible,
    /// The objective is unbounded below.
    Unbounded,
    /// Stopped at the iteration limit or on numerical breakdown; the result is the best iterate.
    MaxIter,
}

#[derive(Clone, Debug, PartialEq)]
pub struct DualCertificate {
    pub blocks: Vec<CMat>,
    pub equalities: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SolveResult {
    pub status: Status,
    pub x: Vec<f64>,
    /// `cᵀx`.
    pub objective_value: f64,
    pub dual_objective: f64,
    pub dual: DualCertificate,
    /// `objective_value - dual_objective`.
    pub gap: f64,
    /// Relative primal infeasibility (block residuals and equalities).
    pub primal_residual: f64,
    /// Relative dual infeasibility.
    pub dual_residual: f64,
    /// Smallest eigenvalue of each `C_b + Σ x_i A_{b,i}`.
    pub block_min_eigenvalues: Vec<f64>,
    pub iterations: usize,
}

impl SolveResult {
    pub fn is_optimal(&self) -> bool {
        self.status == Status::Optimal
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SolverOptions {
    /// Bound on the relative gap and the relative primal and dual residuals.
    pub tol: f64,
    pub max_iter: usize,
    /// Fraction of the distance to the cone boundary taken per step.
    pub step_fraction: f64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions { tol: 1e-8, max_iter: 200, step_fraction: 0.95 }
    }
}

/// Anything that can solve a [`ConicProgram`].
pub trait ConicBackend: Send + Sync {
    fn name(&self) -> &str;
    fn solve(&self, program: &ConicProgram, options: &SolverOptions) -> Result<SolveResult>;
}

/// Solves with the built-in interior-point method.
pub fn solve(program: &ConicProgram, tol: f64, max_iter: usize) -> Result<SolveResult> {
    InteriorPoint.solve(program, &SolverOptions { tol, max_iter, ..SolverOptions::default() })
}
