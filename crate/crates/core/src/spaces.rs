//! Validity and causal-order subspaces, their projectors and cone membership.
//!
//! All projectors are linear combinations of trace-and-replace maps and act
//! diagonally on Pauli strings (each string is either kept or killed). On
//! all-qubit layouts they are applied through that keep/kill predicate; the
//! matrix formula is kept as an independent route.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::tensor::{Layout, Operator, Pauli, PauliExpansion, PauliString, Tolerance, TraceReplace};
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ScenarioKind {
    Bipartite,
    /// Alice, Bob and a Charlie with input `C_I` only.
    Tripartite,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Scenario {
    kind: ScenarioKind,
    layout: Layout,
}

const BIPARTITE_LABELS: [&str; 4] = ["A_I", "A_O", "B_I", "B_O"];
const TRIPARTITE_LABELS: [&str; 5] = ["A_I", "A_O", "B_I", "B_O", "C_I"];

impl Scenario {
    pub fn bipartite() -> Self {
        Scenario { kind: ScenarioKind::Bipartite, layout: Layout::bipartite() }
    }

    pub fn tripartite() -> Self {
        Scenario { kind: ScenarioKind::Tripartite, layout: Layout::tripartite() }
    }

    /// Recognises a layout with exactly `A_I A_O B_I B_O (C_I)` in that order.
    /// Dimensions other than 2 are allowed.
    pub fn from_layout(layout: &Layout) -> Result<Self> {
        let labels = layout.labels();
        let kind = if labels == BIPARTITE_LABELS {
            ScenarioKind::Bipartite
        } else if labels == TRIPARTITE_LABELS {
            ScenarioKind::Tripartite
        } else {
            return Err(Error::Scenario(format!("layout `{layout}` is neither A_I A_O B_I B_O nor A_I A_O B_I B_O C_I")));
        };
        Ok(Scenario { kind, layout: layout.clone() })
    }

    pub fn kind(&self) -> ScenarioKind {
        self.kind
    }

    pub fn layout(&self) -> &Layout {
        &self.layout
    }

    pub fn is_tripartite(&self) -> bool {
        self.kind == ScenarioKind::Tripartite
    }

    /// `d_I = d_{A_I} d_{B_I} (d_{C_I})`.
    pub fn d_in(&self) -> usize {
        let mut labels = vec!["A_I", "B_I"];
        if self.is_tripartite() {
            labels.push("C_I");
        }
        self.layout.dim_of(&labels).expect("scenario labels")
    }

    /// `d_O = d_{A_O} d_{B_O}`.
    pub fn d_out(&self) -> usize {
        self.layout.dim_of(&["A_O", "B_O"]).expect("scenario labels")
    }

    /// White noise `1/d_I`.
    pub fn white_noise(&self) -> Operator {
        Operator::identity(&self.layout).scale(1.0 / self.d_in() as f64)
    }

    /// Labels appended to every validity/order condition (`C_I` in the tripartite case).
    fn charlie(&self) -> Vec<&'static str> {
        if self.is_tripartite() {
            vec!["C_I"]
        } else {
            vec![]
        }
    }

    pub fn require_layout(&self, op: &Operator) -> Result<()> {
        if op.layout() != &self.layout {
            return Err(Error::LayoutMismatch(format!("expected {}, got {}", self.layout, op.layout())));
        }
        Ok(())
    }

    /// The linear validity conditions, each of which must annihilate `W`.
    pub fn validity_conditions(&self) -> Vec<(String, TraceReplace)> {
        let c = self.charlie();
        let with = |mut base: Vec<&'static str>| {
            base.extend(c.iter().copied());
            base
        };
        let suffix = if self.is_tripartite() { "C_I" } else { "" };
        vec![
            (
                format!("[1-B_O]A_IA_O{suffix}"),
                TraceReplace::one_minus(&["B_O"]).with(&with(vec!["A_I", "A_O"])),
            ),
            (
                format!("[1-A_O]B_IB_O{suffix}"),
                TraceReplace::one_minus(&["A_O"]).with(&with(vec!["B_I", "B_O"])),
            ),
            (
                format!("[1-A_O][1-B_O]{suffix}"),
                TraceReplace::one_minus(&["A_O"]).then(&TraceReplace::one_minus(&["B_O"])).with(&with(vec![])),
            ),
        ]
    }

    /// `L_V = 1 - Σ conditions`.
    pub fn valid_projector(&self) -> Projector {
        let mut expr = TraceReplace::identity();
        for (_, cond) in self.validity_conditions() {
            expr = expr.sub(&cond);
        }
        Projector { name: "L_V".into(), layout: self.layout.clone(), expr }
    }

    pub fn orders(&self) -> (CausalOrder, CausalOrder) {
        match self.kind {
            ScenarioKind::Bipartite => (CausalOrder::AB, CausalOrder::BA),
            ScenarioKind::Tripartite => (CausalOrder::ABC, CausalOrder::BAC),
        }
    }

    pub fn order_projector(&self, order: CausalOrder) -> Result<Projector> {
        if order.kind() != self.kind {
            return Err(Error::Scenario(format!("order {order} does not belong to a {:?} scenario", self.kind)));
        }
        let c = self.charlie();
        let with = |mut base: Vec<&'static str>| {
            base.extend(c.iter().copied());
            base
        };
        // A first: [1-B_O](C_I) and [1-A_O]B_IB_O(C_I) vanish; B first is the mirror.
        let (first_out, second_in, second_out) = match order {
            CausalOrder::AB | CausalOrder::ABC => ("A_O", "B_I", "B_O"),
            CausalOrder::BA | CausalOrder::BAC => ("B_O", "A_I", "A_O"),
        };
        let expr = TraceReplace::identity()
            .sub(&TraceReplace::one_minus(&[second_out]).with(&with(vec![])))
            .sub(&TraceReplace::one_minus(&[first_out]).with(&with(vec![second_in, second_out])));
        Ok(Projector { name: format!("L_{order}"), layout: self.layout.clone(), expr })
    }
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            ScenarioKind::Bipartite => f.write_str("bipartite"),
            ScenarioKind::Tripartite => f.write_str("tripartite"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CausalOrder {
    /// A ≺ B
    AB,
    /// B ≺ A
    BA,
    /// A ≺ B ≺ C
    ABC,
    /// B ≺ A ≺ C
    BAC,
}

impl CausalOrder {
    pub fn kind(self) -> ScenarioKind {
        match self {
            CausalOrder::AB | CausalOrder::BA => ScenarioKind::Bipartite,
            CausalOrder::ABC | CausalOrder::BAC => ScenarioKind::Tripartite,
        }
    }
}

impl fmt::Display for CausalOrder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            CausalOrder::AB => "A<B",
            CausalOrder::BA => "B<A",
            CausalOrder::ABC => "A<B<C",
            CausalOrder::BAC => "B<A<C",
        };
        f.write_str(s)
    }
}

/// Orthogonal projector onto a subspace defined by trace-and-replace conditions.
#[derive(Clone, Debug)]
pub struct Projector {
    name: String,
    layout: Layout,
    expr: TraceReplace,
}

impl Projector {
    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn expr(&self) -> &TraceReplace {
        &self.expr
    }

    /// Whether the projector keeps a Pauli string (eigenvalue 1) or kills it (0).
    pub fn keeps(&self, s: &PauliString) -> bool {
        let ev = self.expr.eigenvalue(&self.layout, s).expect("projector labels belong to its layout");
        debug_assert!(ev.abs() < 1e-12 || (ev - 1.0).abs() < 1e-12, "{} not a projector on {s}", self.name);
        ev > 0.5
    }

    /// Indices (base-4 string indices) of all kept strings.
    pub fn kept_indices(&self) -> Result<Vec<usize>> {
        self.layout.require_qubits()?;
        Ok(PauliString::all(self.layout.len()).filter(|s| self.keeps(s)).map(|s| s.index()).collect())
    }

    pub fn apply_pauli(&self, e: &PauliExpansion) -> Result<PauliExpansion> {
        if e.layout() != &self.layout {
            return Err(Error::LayoutMismatch(format!("expected {}, got {}", self.layout, e.layout())));
        }
        Ok(e.map_diagonal(|s| if self.keeps(s) { 1.0 } else { 0.0 }))
    }

    /// Keep/kill predicate on qubit layouts, matrix formula otherwise.
    pub fn apply(&self, op: &Operator) -> Result<Operator> {
        if op.layout() != &self.layout {
            return Err(Error::LayoutMismatch(format!("expected {}, got {}", self.layout, op.layout())));
        }
        if self.layout.is_all_qubit() {
            Ok(self.apply_pauli(&op.to_pauli()?)?.to_operator())
        } else {
            self.expr.apply(op)
        }
    }

    /// Matrix formula built from `trace_and_replace`.
    pub fn apply_matrix(&self, op: &Operator) -> Result<Operator> {
        self.expr.apply(op)
    }

    /// Frobenius norm of `H - P(H)`.
    pub fn residual(&self, op: &Operator) -> Result<f64> {
        Ok(op.try_sub(&self.apply(op)?)?.frobenius_norm())
    }
}

pub fn project_valid(op: &Operator, scenario: &Scenario) -> Result<Operator> {
    scenario.require_layout(op)?;
    scenario.valid_projector().apply(op)
}

pub fn project_order(op: &Operator, scenario: &Scenario, order: CausalOrder) -> Result<Operator> {
    scenario.require_layout(op)?;
    scenario.order_projector(order)?.apply(op)
}

/// Default thresholds for membership tests.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MembershipTolerance {
    /// Absolute bound on the Frobenius norm of subspace residuals.
    pub subspace: f64,
    pub psd: Tolerance,
    /// Absolute tolerance on `tr W = d_O` when normalisation is checked.
    pub trace: f64,
}

impl Default for MembershipTolerance {
    fn default() -> Self {
        MembershipTolerance { subspace: 1e-9, psd: Tolerance::default(), trace: 1e-9 }
    }
}

impl MembershipTolerance {
    pub fn loose(tol: f64) -> Self {
        MembershipTolerance { subspace: tol, psd: Tolerance::absolute(tol), trace: tol }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConditionResidual {
    pub condition: String,
    pub residual: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ValidityReport {
    pub scenario: ScenarioKind,
    pub conditions: Vec<ConditionResidual>,
    pub subspace_ok: bool,
    pub min_eigenvalue: f64,
    pub psd: bool,
    pub trace: f64,
    pub expected_trace: f64,
    /// Present only when normalisation was requested.
    pub normalized: Option<bool>,
    pub valid: bool,
}

/// Checks the linear validity conditions, positivity and (optionally) `tr W = d_O`.
pub fn is_valid_process(
    op: &Operator,
    scenario: &Scenario,
    tol: &MembershipTolerance,
    check_normalization: bool,
) -> Result<ValidityReport> {
    scenario.require_layout(op)?;
    let conditions: Vec<ConditionResidual> = scenario
        .validity_conditions()
        .into_iter()
        .map(|(name, cond)| {
            let residual = if op.layout().is_all_qubit() {
                cond.apply_pauli(&op.to_pauli()?)?.to_operator().frobenius_norm()
            } else {
                cond.apply(op)?.frobenius_norm()
            };
            Ok(ConditionResidual { condition: name, residual })
        })
        .collect::<Result<_>>()?;
    let subspace_ok = conditions.iter().all(|c| c.residual <= tol.subspace);
    let min_eigenvalue = op.min_eigenvalue();
    let psd = op.is_psd(&tol.psd);
    let trace = op.trace();
    let expected_trace = scenario.d_out() as f64;
    let normalized = check_normalization.then(|| (trace - expected_trace).abs() <= tol.trace);
    let valid = subspace_ok && psd && normalized.unwrap_or(true);
    Ok(ValidityReport {
        scenario: scenario.kind(),
        conditions,
        subspace_ok,
        min_eigenvalue,
        psd,
        trace,
        expected_trace,
        normalized,
        valid,
    })
}

/// Membership in the cone `P ∩ L_order` (nonnormalised processes compatible with `order`).
pub fn is_in_order_cone(op: &Operator, scenario: &Scenario, order: CausalOrder, tol: &MembershipTolerance) -> Result<bool> {
    scenario.require_layout(op)?;
    let proj = scenario.order_projector(order)?;
    Ok(proj.residual(op)? <= tol.subspace && op.is_psd(&tol.psd))
}

/// The map exchanging Alice and Bob in the tripartite scenario; Pauli terms
/// whose `C_I` factor is `Y` or `Z` change sign.
pub fn swap_parties_pauli(e: &PauliExpansion) -> Result<PauliExpansion> {
    if e.layout() != &Layout::tripartite() {
        return Err(Error::Scenario("party swap requires the A_I A_O B_I B_O C_I qubit layout".into()));
    }
    let mut out = PauliExpansion::new(e.layout().clone())?;
    for (s, &c) in e.terms() {
        let o = s.ops();
        let swapped = PauliString::new(vec![o[2], o[3], o[0], o[1], o[4]]);
        let sign = if matches!(o[4], Pauli::Y | Pauli::Z) { -1.0 } else { 1.0 };
        out.add_term(swapped, sign * c)?;
    }
    Ok(out)
}

pub fn swap_parties(op: &Operator) -> Result<Operator> {
    if op.layout() != &Layout::tripartite() {
        return Err(Error::Scenario("party swap requires the A_I A_O B_I B_O C_I qubit layout".into()));
    }
    Ok(swap_parties_pauli(&op.to_pauli()?)?.to_operator())
}

/// A process matrix together with its scenario.
#[derive(Clone, Debug, PartialEq)]
pub struct ProcessMatrix {
    scenario: Scenario,
    op: Operator,
    normalized: bool,
}

impl ProcessMatrix {
    /// Wraps an operator without enforcing validity; `normalized` records
    /// whether `tr W = d_O` is expected.
    pub fn new(scenario: Scenario, op: Operator, normalized: bool) -> Result<Self> {
        scenario.require_layout(&op)?;
        Ok(ProcessMatrix { scenario, op, normalized })
    }

    /// Infers the scenario from the operator layout; normalised by default.
    pub fn from_operator(op: Operator) -> Result<Self> {
        let scenario = Scenario::from_layout(op.layout())?;
        Ok(ProcessMatrix { scenario, op, normalized: true })
    }

    pub fn scenario(&self) -> &Scenario {
        &self.scenario
    }

    pub fn op(&self) -> &Operator {
        &self.op
    }

    pub fn into_op(self) -> Operator {
        self.op
    }

    pub fn normalized(&self) -> bool {
        self.normalized
    }

    pub fn validate(&self, tol: &MembershipTolerance) -> Result<ValidityReport> {
        is_valid_process(&self.op, &self.scenario, tol, self.normalized)
    }

    /// `v·self + (1-v)·other`.
    pub fn mix(&self, other: &ProcessMatrix, v: f64) -> Result<ProcessMatrix> {
        if self.scenario != other.scenario {
            return Err(Error::Scenario("cannot mix processes from different scenarios".into()));
        }
        Ok(ProcessMatrix {
            scenario: self.scenario.clone(),
            op: self.op.combine(v, &other.op, 1.0 - v)?,
            normalized: self.normalized && other.normalized,
        })
    }
}
