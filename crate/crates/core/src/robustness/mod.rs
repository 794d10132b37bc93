//! Random and generalised robustness, witness construction and verification.
//!
//! Every program is written over real Pauli coefficients of the unknown
//! matrices, restricted to the strings kept by the relevant projectors, so the
//! subspace constraints are eliminated rather than imposed.

mod restriction;
mod witness;

use std::collections::BTreeMap;
use std::fmt;

use log::warn;
use serde_json::{json, Value};

use crate::conic::{ConicBackend, ConicProgram, InteriorPoint, PsdBlock, SolveResult, SolverOptions, SparseHermitian, Status};
use crate::spaces::{is_in_order_cone, CausalOrder, MembershipTolerance, ProcessMatrix, Scenario};
use crate::tensor::{CMat, Layout, Operator, OperatorJson, PauliExpansion, PauliString};
use crate::{Error, Result};

pub use restriction::Restriction;
pub use restriction::unitary_restriction_constraints;
pub use witness::{Certificate, Witness, WitnessCheck, WitnessReport};

/// Solver backend plus options shared by all robustness computations.
pub struct Engine {
    backend: Box<dyn ConicBackend>,
    options: SolverOptions,
}

impl Default for Engine {
    fn default() -> Self {
        Engine { backend: Box::new(InteriorPoint), options: SolverOptions::default() }
    }
}

impl fmt::Debug for Engine {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Engine").field("backend", &self.backend.name()).field("options", &self.options).finish()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Diagnostics {
    pub status: Status,
    pub iterations: usize,
    pub gap: f64,
    pub primal_residual: f64,
    pub dual_residual: f64,
    pub n_vars: usize,
    pub warnings: Vec<String>,
}

impl Diagnostics {
    fn from_result(r: &SolveResult, n_vars: usize, warnings: Vec<String>) -> Self {
        Diagnostics {
            status: r.status,
            iterations: r.iterations,
            gap: r.gap,
            primal_residual: r.primal_residual,
            dual_residual: r.dual_residual,
            n_vars,
            warnings,
        }
    }

    pub fn to_json(&self) -> Value {
        json!({
            "status": format!("{:?}", self.status),
            "iterations": self.iterations,
            "gap": self.gap,
            "primal_residual": self.primal_residual,
            "dual_residual": self.dual_residual,
            "n_vars": self.n_vars,
            "warnings": self.warnings,
        })
    }
}

#[derive(Clone, Debug)]
pub struct RobustnessReport {
    /// Raw optimum; negative for processes inside the separable cone.
    pub r_star: f64,
    /// `max(r*, 0)`.
    pub random_robustness: f64,
    /// `1/(1 + max(r*, 0))`.
    pub visibility_threshold: f64,
    pub witness: Witness,
    /// `tr[S·W]`.
    pub witness_value: f64,
    /// Components of `W + r*·N` in the two order cones.
    pub decomposition: [(CausalOrder, Operator); 2],
    pub diagnostics: Diagnostics,
}

impl RobustnessReport {
    pub fn to_json(&self) -> Value {
        json!({
            "r_star": self.r_star,
            "random_robustness": self.random_robustness,
            "visibility_threshold": self.visibility_threshold,
            "witness_value": self.witness_value,
            "witness": self.witness.to_json(),
            "decomposition": self.decomposition.iter().map(|(o, op)| json!({
                "order": o.to_string(),
                "operator": serde_json::to_value(OperatorJson::from_operator(op)).expect("operator JSON"),
            })).collect::<Vec<_>>(),
            "diagnostics": self.diagnostics.to_json(),
        })
    }
}

#[derive(Clone, Debug)]
pub struct GeneralizedReport {
    /// `min tr(Ω)/d_O`.
    pub value: f64,
    /// The admixed valid operator `Ω`.
    pub omega: Operator,
    /// `W + Ω` split over the two order cones.
    pub decomposition: [(CausalOrder, Operator); 2],
    pub diagnostics: Diagnostics,
}

impl GeneralizedReport {
    pub fn to_json(&self) -> Value {
        json!({
            "generalized_robustness": self.value,
            "omega": serde_json::to_value(OperatorJson::from_operator(&self.omega)).expect("operator JSON"),
            "diagnostics": self.diagnostics.to_json(),
        })
    }
}

/// Coefficients `c_σ` of `H = Σ c_σ σ`, indexed by string index.
pub(crate) fn coefficient_vector(op: &Operator) -> Result<Vec<f64>> {
    op.layout().require_qubits()?;
    let d = op.dim() as f64;
    Ok(crate::conic::pauli_traces(op.matrix()).into_iter().map(|t| t / d).collect())
}

pub(crate) fn expansion_from_vector(layout: &Layout, v: &[f64]) -> PauliExpansion {
    let n = layout.len();
    let mut e = PauliExpansion::new(layout.clone()).expect("qubit layout");
    for (i, &c) in v.iter().enumerate() {
        if c != 0.0 {
            e.add_term(PauliString::from_index(n, i), c).expect("matching length");
        }
    }
    e
}

pub(crate) fn operator_from_vector(layout: &Layout, v: &[f64]) -> Operator {
    expansion_from_vector(layout, v).to_operator()
}

pub(crate) fn string_matrix(n: usize, index: usize) -> SparseHermitian {
    let s = PauliString::from_index(n, index);
    SparseHermitian::new(1 << n, s.entries()).expect("Pauli strings are Hermitian")
}

/// `Σ c_σ σ` over the given (index, coefficient) pairs, as a sparse matrix.
pub(crate) fn combination_matrix(n: usize, terms: impl IntoIterator<Item = (usize, f64)>) -> Option<SparseHermitian> {
    let mut entries = Vec::new();
    for (idx, c) in terms {
        if c != 0.0 {
            entries.extend(PauliString::from_index(n, idx).entries().into_iter().map(|(i, j, v)| (i, j, v * c)));
        }
    }
    let m = SparseHermitian::new(1 << n, entries).expect("Pauli strings are Hermitian");
    (!m.entries().is_empty()).then_some(m)
}

pub(crate) fn dense_combination(n: usize, terms: impl IntoIterator<Item = (usize, f64)>) -> CMat {
    combination_matrix(n, terms).map(|m| m.to_dense()).unwrap_or_else(|| CMat::zeros(1 << n, 1 << n))
}

/// Solution of the restricted robustness program.
pub(crate) struct Restricted {
    pub r_star: f64,
    pub s: Operator,
    pub z: [Operator; 2],
    pub orders: (CausalOrder, CausalOrder),
    pub decomposition: [(CausalOrder, Operator); 2],
    pub diagnostics: Diagnostics,
}

/// Kept-string masks of the two order projectors and of `L_V`.
pub(crate) struct Supports {
    pub orders: (CausalOrder, CausalOrder),
    pub k1: Vec<bool>,
    pub k2: Vec<bool>,
    pub kv: Vec<bool>,
}

impl Supports {
    pub(crate) fn new(scenario: &Scenario) -> Result<Self> {
        scenario.layout().require_qubits()?;
        let n = scenario.layout().len();
        let orders = scenario.orders();
        let p1 = scenario.order_projector(orders.0)?;
        let p2 = scenario.order_projector(orders.1)?;
        let pv = scenario.valid_projector();
        let mut k1 = Vec::new();
        let mut k2 = Vec::new();
        let mut kv = Vec::new();
        for s in PauliString::all(n) {
            k1.push(p1.keeps(&s));
            k2.push(p2.keeps(&s));
            kv.push(pv.keeps(&s));
        }
        Ok(Supports { orders, k1, k2, kv })
    }
}

fn require_valid_subspace(name: &str, coefs: &[f64], kv: &[bool]) -> Result<()> {
    let outside = coefs.iter().zip(kv).filter(|(_, &k)| !k).map(|(c, _)| c.abs()).fold(0.0, f64::max);
    let scale = coefs.iter().map(|c| c.abs()).fold(0.0, f64::max).max(1e-300);
    if outside > 1e-9 * scale.max(1.0) {
        return Err(Error::Scenario(format!("{name} is not in the validity subspace (coefficient {outside:.3e} outside it)")));
    }
    Ok(())
}

fn same_scenario(a: &ProcessMatrix, b: &ProcessMatrix) -> Result<()> {
    if a.scenario() != b.scenario() {
        return Err(Error::Scenario(format!("{} process paired with {} noise", a.scenario(), b.scenario())));
    }
    Ok(())
}

fn is_white(noise: &ProcessMatrix) -> bool {
    let white = noise.scenario().white_noise();
    noise.op().try_sub(&white).map(|d| d.frobenius_norm() <= 1e-12).unwrap_or(false)
}

impl Engine {
    pub fn new(backend: Box<dyn ConicBackend>, options: SolverOptions) -> Self {
        Engine { backend, options }
    }

    pub fn with_options(options: SolverOptions) -> Self {
        Engine { backend: Box::new(InteriorPoint), options }
    }

    pub fn options(&self) -> &SolverOptions {
        &self.options
    }

    pub fn backend_name(&self) -> &str {
        self.backend.name()
    }

    /// Solves and accepts an iteration-limit result only when it is within
    /// `100·tol` of the stopping criteria.
    pub(crate) fn solve(&self, program: &ConicProgram, warnings: &mut Vec<String>) -> Result<SolveResult> {
        let r = self.backend.solve(program, &self.options)?;
        match r.status {
            Status::Optimal => Ok(r),
            Status::MaxIter => {
                let worst = r.primal_residual.max(r.dual_residual).max(r.gap.abs() / (1.0 + r.objective_value.abs()));
                if worst <= 100.0 * self.options.tol {
                    let msg = format!("solver stopped after {} iterations at accuracy {worst:.2e}", r.iterations);
                    warn!("{msg}");
                    warnings.push(msg);
                    Ok(r)
                } else {
                    Err(Error::Solver(format!("no convergence after {} iterations (accuracy {worst:.2e})", r.iterations)))
                }
            }
            s => Err(Error::Solver(format!("solver reported {s:?}"))),
        }
    }

    /// Minimal `r` such that `W + r·N` is causally separable; `noise = None` means white noise.
    pub fn random_robustness(&self, w: &ProcessMatrix, noise: Option<&ProcessMatrix>) -> Result<RobustnessReport> {
        let solved = self.restricted_robustness(w, noise, &Restriction::none())?;
        let certificate = Certificate::order_cones(solved.orders, &solved.s, solved.z[0].clone(), solved.z[1].clone())?;
        let witness = Witness::new(w.scenario().clone(), solved.s, Some(certificate))?;
        let witness_value = witness.op().hs_inner(w.op())?;
        let rr = solved.r_star.max(0.0);
        Ok(RobustnessReport {
            r_star: solved.r_star,
            random_robustness: rr,
            visibility_threshold: 1.0 / (1.0 + rr),
            witness,
            witness_value,
            decomposition: solved.decomposition,
            diagnostics: solved.diagnostics,
        })
    }

    /// Minimal `r` such that `W + r·N` is causally separable up to operators
    /// orthogonal to the restricted witness space.
    ///
    /// Strings allowed by the restriction tie the two components to `W + r·N`;
    /// all other strings are free. The dual multipliers give the witness.
    pub(crate) fn restricted_robustness(
        &self,
        w: &ProcessMatrix,
        noise: Option<&ProcessMatrix>,
        restriction: &Restriction,
    ) -> Result<Restricted> {
        let white;
        let noise = match noise {
            Some(n) => n,
            None => {
                white = ProcessMatrix::new(w.scenario().clone(), w.scenario().white_noise(), true)?;
                &white
            }
        };
        same_scenario(w, noise)?;
        let mut warnings = Vec::new();
        if !is_white(noise) && restriction.is_none() {
            let msg = "noise is not white: if it lies on the boundary of the separable cone the program is degenerate; \
                       prefer robustness at a fixed visibility"
                .to_string();
            warn!("{msg}");
            warnings.push(msg);
        }
        let scenario = w.scenario();
        let layout = scenario.layout();
        let n = layout.len();
        let d = layout.dim() as f64;
        let sup = Supports::new(scenario)?;
        let wv = coefficient_vector(w.op())?;
        let nv = coefficient_vector(noise.op())?;
        require_valid_subspace("process", &wv, &sup.kv)?;
        require_valid_subspace("noise", &nv, &sup.kv)?;
        let all = wv.len();

        let basis = restriction.basis(scenario, &sup.kv)?;
        let mut tied = vec![false; all];
        let mut groups = Vec::new();
        for v in basis {
            if v.len() == 1 {
                tied[v[0].0] = true;
            } else {
                groups.push(v);
            }
        }
        if !(0..all).any(|i| tied[i] && nv[i] != 0.0) && !groups.iter().any(|g| g.iter().any(|&(i, _)| nv[i] != 0.0)) {
            return Err(Error::Parameter(format!(
                "restriction `{}` leaves no witness with tr(S·N) = 1",
                restriction.name()
            )));
        }

        // each component coefficient is constant + r·(r coefficient) + Σ (var, coefficient)
        #[derive(Default, Clone)]
        struct Affine {
            constant: f64,
            r: f64,
            vars: Vec<(usize, f64)>,
        }
        let mut n_vars = 1;
        let mut fresh = || {
            n_vars += 1;
            n_vars - 1
        };
        let mut a = vec![Affine::default(); all];
        let mut b = vec![Affine::default(); all];
        for i in 0..all {
            let tie = Affine { constant: wv[i], r: nv[i], vars: vec![] };
            match (sup.k1[i], sup.k2[i], tied[i]) {
                (true, true, true) => {
                    let x = fresh();
                    a[i].vars.push((x, 1.0));
                    b[i] = Affine { vars: vec![(x, -1.0)], ..tie };
                }
                (true, true, false) => {
                    a[i].vars.push((fresh(), 1.0));
                    b[i].vars.push((fresh(), 1.0));
                }
                (true, false, true) => a[i] = tie,
                (false, true, true) => b[i] = tie,
                (true, false, false) => a[i].vars.push((fresh(), 1.0)),
                (false, true, false) => b[i].vars.push((fresh(), 1.0)),
                (false, false, _) => {}
            }
        }

        let mut program = ConicProgram::new(n_vars);
        let mut c = vec![0.0; n_vars];
        c[0] = 1.0;
        program.set_objective(c)?;
        for comp in [&a, &b] {
            let mut block = PsdBlock::new(1 << n);
            block.set_constant(dense_combination(n, (0..all).map(|i| (i, comp[i].constant))))?;
            let mut by_var: BTreeMap<usize, Vec<(usize, f64)>> = BTreeMap::new();
            for (i, aff) in comp.iter().enumerate() {
                if aff.r != 0.0 {
                    by_var.entry(0).or_default().push((i, aff.r));
                }
                for &(v, x) in &aff.vars {
                    by_var.entry(v).or_default().push((i, x));
                }
            }
            for (v, terms) in by_var {
                if let Some(m) = combination_matrix(n, terms) {
                    block.add_term(v, m)?;
                }
            }
            program.add_block(block)?;
        }
        // Σ v_σ (a_σ + b_σ - w_σ - r n_σ) = 0 for combined basis vectors
        for g in &groups {
            let mut row = vec![0.0; n_vars];
            let mut rhs = 0.0;
            for &(i, coef) in g {
                for aff in [&a[i], &b[i]] {
                    for &(v, x) in &aff.vars {
                        row[v] += coef * x;
                    }
                }
                row[0] -= coef * nv[i];
                rhs += coef * wv[i];
            }
            program.add_equality(row, rhs)?;
        }

        let result = self.solve(&program, &mut warnings)?;
        let r_star = result.x[0];
        let w1 = Operator::new(layout.clone(), program.blocks()[0].evaluate(&result.x))?;
        let w2 = Operator::new(layout.clone(), program.blocks()[1].evaluate(&result.x))?;

        // tr(σ S) agrees with tr(σ Z_k) on K_k; average and project on the restricted space
        let t1 = crate::conic::pauli_traces(&result.dual.blocks[0]);
        let t2 = crate::conic::pauli_traces(&result.dual.blocks[1]);
        let raw: Vec<f64> = (0..all)
            .map(|i| match (sup.k1[i], sup.k2[i]) {
                (true, true) => 0.5 * (t1[i] + t2[i]) / d,
                (true, false) => t1[i] / d,
                (false, true) => t2[i] / d,
                (false, false) => 0.0,
            })
            .collect();
        let mut sv = vec![0.0; all];
        for i in 0..all {
            if tied[i] {
                sv[i] = raw[i];
            }
        }
        for g in &groups {
            let proj: f64 = g.iter().map(|&(i, c)| c * raw[i]).sum();
            for &(i, c) in g {
                sv[i] += proj * c;
            }
        }
        let s = operator_from_vector(layout, &sv);
        let z = [
            Operator::new(layout.clone(), result.dual.blocks[0].clone())?,
            Operator::new(layout.clone(), result.dual.blocks[1].clone())?,
        ];
        Ok(Restricted {
            r_star,
            s,
            z,
            orders: sup.orders,
            decomposition: [(sup.orders.0, w1), (sup.orders.1, w2)],
            diagnostics: Diagnostics::from_result(&result, program.n_vars(), warnings),
        })
    }

    /// Random robustness (against white noise) of `v·target + (1-v)·noise`.
    pub fn robustness_at_visibility(&self, target: &ProcessMatrix, noise: &ProcessMatrix, v: f64) -> Result<RobustnessReport> {
        if !(0.0..=1.0).contains(&v) {
            return Err(Error::Parameter(format!("visibility {v} outside [0, 1]")));
        }
        same_scenario(target, noise)?;
        self.random_robustness(&target.mix(noise, v)?, None)
    }

    /// `min tr(Ω)/d_O` over valid `Ω ⪰ 0` such that `W + Ω` is causally separable.
    pub fn generalized_robustness(&self, w: &ProcessMatrix) -> Result<GeneralizedReport> {
        let scenario = w.scenario();
        let layout = scenario.layout();
        let n = layout.len();
        let d = layout.dim() as f64;
        let d_out = scenario.d_out() as f64;
        let sup = Supports::new(scenario)?;
        let wv = coefficient_vector(w.op())?;
        require_valid_subspace("process", &wv, &sup.kv)?;
        let all = wv.len();
        let s1: Vec<usize> = (0..all).filter(|&i| sup.k1[i]).collect();
        let s2: Vec<usize> = (0..all).filter(|&i| sup.k2[i]).collect();
        let nv = s1.len() + s2.len();
        let mut program = ConicProgram::new(nv);
        let mut c = vec![0.0; nv];
        // identity coefficients: tr(W1 + W2) = D (a_1 + b_1)
        let id1 = s1.iter().position(|&i| i == 0).expect("identity is kept");
        let id2 = s2.iter().position(|&i| i == 0).expect("identity is kept");
        c[id1] = d / d_out;
        c[s1.len() + id2] = d / d_out;
        program.set_objective(c)?;
        let mut b1 = PsdBlock::new(1 << n);
        let mut b2 = PsdBlock::new(1 << n);
        let mut b3 = PsdBlock::new(1 << n);
        b3.set_constant(-dense_combination(n, (0..all).map(|i| (i, wv[i]))))?;
        for (k, &i) in s1.iter().enumerate() {
            b1.add_term(k, string_matrix(n, i))?;
            b3.add_term(k, string_matrix(n, i))?;
        }
        for (k, &i) in s2.iter().enumerate() {
            b2.add_term(s1.len() + k, string_matrix(n, i))?;
            b3.add_term(s1.len() + k, string_matrix(n, i))?;
        }
        program.add_block(b1)?;
        program.add_block(b2)?;
        program.add_block(b3)?;
        let mut warnings = Vec::new();
        let result = self.solve(&program, &mut warnings)?;
        let value = result.objective_value - w.op().trace() / d_out;
        let w1 = Operator::new(layout.clone(), program.blocks()[0].evaluate(&result.x))?;
        let w2 = Operator::new(layout.clone(), program.blocks()[1].evaluate(&result.x))?;
        let omega = Operator::new(layout.clone(), program.blocks()[2].evaluate(&result.x))?;
        Ok(GeneralizedReport {
            value,
            omega,
            decomposition: [(sup.orders.0, w1), (sup.orders.1, w2)],
            diagnostics: Diagnostics::from_result(&result, nv, warnings),
        })
    }
}

/// Checks that both components lie in their order cones and reassemble `target`.
pub fn check_decomposition(
    scenario: &Scenario,
    decomposition: &[(CausalOrder, Operator); 2],
    target: &Operator,
    tol: &MembershipTolerance,
) -> Result<bool> {
    let mut ok = true;
    for (order, op) in decomposition {
        ok &= is_in_order_cone(op, scenario, *order, tol)?;
    }
    let sum = decomposition[0].1.try_add(&decomposition[1].1)?;
    ok &= sum.try_sub(target)?.frobenius_norm() <= tol.subspace;
    Ok(ok)
}

pub fn random_robustness(w: &ProcessMatrix, noise: Option<&ProcessMatrix>) -> Result<RobustnessReport> {
    Engine::default().random_robustness(w, noise)
}

pub fn generalized_robustness(w: &ProcessMatrix) -> Result<GeneralizedReport> {
    Engine::default().generalized_robustness(w)
}

pub fn robustness_at_visibility(target: &ProcessMatrix, noise: &ProcessMatrix, v: f64) -> Result<RobustnessReport> {
    Engine::default().robustness_at_visibility(target, noise, v)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn w_etas(e1: f64, e2: f64) -> ProcessMatrix {
        let layout = Layout::bipartite();
        let e = PauliExpansion::from_terms(layout, [("1111", 0.25), ("1ZZ1", 0.25 * e1), ("Z1XZ", 0.25 * e2)]).unwrap();
        ProcessMatrix::from_operator(e.to_operator()).unwrap()
    }

    #[test]
    fn nonseparable_etas() {
        let w = w_etas(0.7, -0.6);
        let engine = Engine::default();
        let rep = engine.random_robustness(&w, None).unwrap();
        assert!((rep.r_star - 0.3).abs() < 1e-6, "{}", rep.r_star);
        assert!((rep.witness_value + rep.r_star).abs() < 1e-6);
        let check = engine.verify_witness(&rep.witness, 1e-6).unwrap();
        assert!(check.valid, "{check:?}");
        let wit = engine.construct_witness(&w, None, &Restriction::none()).unwrap();
        assert!((wit.value + 0.3).abs() < 1e-6, "{}", wit.value);
        assert!((wit.normalization - 1.0).abs() < 1e-6);
        assert!(engine.verify_witness(&wit.witness, 1e-6).unwrap().valid);
        assert!(engine.verify_witness(&wit.witness.without_certificate(), 1e-6).unwrap().valid);
        let g = engine.generalized_robustness(&w).unwrap();
        assert!(g.value <= rep.r_star + 1e-6 && g.value > 0.0, "{}", g.value);
    }

    #[test]
    fn separable_etas_decompose() {
        let w = w_etas(0.3, 0.4);
        let rep = random_robustness(&w, None).unwrap();
        assert!(rep.r_star < 0.0);
        let target = w.op().combine(1.0, &w.scenario().white_noise(), rep.r_star).unwrap();
        assert!(check_decomposition(w.scenario(), &rep.decomposition, &target, &MembershipTolerance::loose(1e-6)).unwrap());
    }

    #[test]
    fn invalid_witness_rejected_by_search() {
        let w = w_etas(0.7, 0.7);
        let wit = Engine::default().construct_witness(&w, None, &Restriction::none()).unwrap();
        let bad = Witness::new(w.scenario().clone(), wit.witness.op().scale(-1.0), None).unwrap();
        assert!(!Engine::default().verify_witness(&bad, 1e-6).unwrap().valid);
    }
}
