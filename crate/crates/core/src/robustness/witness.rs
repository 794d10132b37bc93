use serde_json::{json, Value};

use super::{
    coefficient_vector, combination_matrix, dense_combination, operator_from_vector, Diagnostics, Engine, Restriction,
    Supports,
};
use crate::conic::{ConicProgram, PsdBlock};
use crate::spaces::{CausalOrder, ProcessMatrix, Scenario};
use crate::tensor::{Operator, OperatorJson, Pauli, PauliString};
use crate::{Error, Result};

/// Proof that `S` is nonnegative on the separable cone.
#[derive(Clone, Debug, PartialEq)]
pub enum Certificate {
    /// `S = S^P + S^⊥` with `_{B_O}S^P ⪰ 0`, `_{A_O}S^P ⪰ 0` and `L_V(S^⊥) = 0`.
    Bipartite { s_p: Operator, s_perp: Operator },
    /// `S = S^P_k + S^⊥_k` with `S^P_k ⪰ 0` and `L_k(S^⊥_k) = 0` for both orders.
    OrderCones { parts: [(CausalOrder, Operator, Operator); 2] },
}

fn op_json(op: &Operator) -> Value {
    serde_json::to_value(OperatorJson::from_operator(op)).expect("operator JSON")
}

fn op_from_json(v: &Value) -> Result<Operator> {
    let j: OperatorJson = serde_json::from_value(v.clone())?;
    j.to_operator()
}

fn parse_order(s: &str) -> Result<CausalOrder> {
    match s.replace(' ', "").as_str() {
        "A<B" => Ok(CausalOrder::AB),
        "B<A" => Ok(CausalOrder::BA),
        "A<B<C" => Ok(CausalOrder::ABC),
        "B<A<C" => Ok(CausalOrder::BAC),
        other => Err(Error::Parse(format!("unknown causal order `{other}`"))),
    }
}

impl Certificate {
    /// Order-cone certificate with `S^⊥_k = S - P_k`.
    pub fn order_cones(orders: (CausalOrder, CausalOrder), s: &Operator, p1: Operator, p2: Operator) -> Result<Self> {
        let perp1 = s.try_sub(&p1)?;
        let perp2 = s.try_sub(&p2)?;
        Ok(Certificate::OrderCones { parts: [(orders.0, p1, perp1), (orders.1, p2, perp2)] })
    }

    /// Bipartite certificate with `S^⊥ = S - S^P`.
    pub fn bipartite(s: &Operator, s_p: Operator) -> Result<Self> {
        let s_perp = s.try_sub(&s_p)?;
        Ok(Certificate::Bipartite { s_p, s_perp })
    }

    pub fn to_json(&self) -> Value {
        match self {
            Certificate::Bipartite { s_p, s_perp } => json!({
                "kind": "bipartite",
                "psd": op_json(s_p),
                "perp": op_json(s_perp),
            }),
            Certificate::OrderCones { parts } => json!({
                "kind": "order-cones",
                "parts": parts.iter().map(|(o, p, q)| json!({
                    "order": o.to_string(),
                    "psd": op_json(p),
                    "perp": op_json(q),
                })).collect::<Vec<_>>(),
            }),
        }
    }

    pub fn from_json(v: &Value) -> Result<Self> {
        let kind = v.get("kind").and_then(Value::as_str).ok_or_else(|| Error::Parse("certificate without `kind`".into()))?;
        let field = |v: &Value, k: &str| -> Result<Operator> {
            op_from_json(v.get(k).ok_or_else(|| Error::Parse(format!("certificate without `{k}`")))?)
        };
        match kind {
            "bipartite" => Ok(Certificate::Bipartite { s_p: field(v, "psd")?, s_perp: field(v, "perp")? }),
            "order-cones" => {
                let parts = v
                    .get("parts")
                    .and_then(Value::as_array)
                    .filter(|p| p.len() == 2)
                    .ok_or_else(|| Error::Parse("order-cone certificate needs two parts".into()))?;
                let part = |p: &Value| -> Result<(CausalOrder, Operator, Operator)> {
                    let o = p.get("order").and_then(Value::as_str).ok_or_else(|| Error::Parse("part without `order`".into()))?;
                    Ok((parse_order(o)?, field(p, "psd")?, field(p, "perp")?))
                };
                Ok(Certificate::OrderCones { parts: [part(&parts[0])?, part(&parts[1])?] })
            }
            other => Err(Error::Parse(format!("unknown certificate kind `{other}`"))),
        }
    }

    /// Residuals `(check, value)`; each value is a violation that should be ≤ the tolerance.
    pub fn residuals(&self, scenario: &Scenario, s: &Operator) -> Result<Vec<(String, f64)>> {
        let mut out = Vec::new();
        match self {
            Certificate::Bipartite { s_p, s_perp } => {
                if scenario.is_tripartite() {
                    return Err(Error::Scenario("bipartite certificate for a tripartite witness".into()));
                }
                for label in ["B_O", "A_O"] {
                    let m = s_p.trace_and_replace(&[label])?;
                    out.push((format!("psd of _{label}S^P"), (-m.min_eigenvalue()).max(0.0)));
                }
                out.push(("L_V(S^perp)".into(), scenario.valid_projector().apply(s_perp)?.frobenius_norm()));
                out.push(("sum".into(), s.try_sub(s_p)?.try_sub(s_perp)?.frobenius_norm()));
            }
            Certificate::OrderCones { parts } => {
                for (order, p, q) in parts {
                    out.push((format!("psd of S^P[{order}]"), (-p.min_eigenvalue()).max(0.0)));
                    out.push((format!("L[{order}](S^perp)"), scenario.order_projector(*order)?.apply(q)?.frobenius_norm()));
                    out.push((format!("sum[{order}]"), s.try_sub(p)?.try_sub(q)?.frobenius_norm()));
                }
            }
        }
        Ok(out)
    }
}

/// A witness operator `S` with an optional certificate.
#[derive(Clone, Debug, PartialEq)]
pub struct Witness {
    scenario: Scenario,
    op: Operator,
    certificate: Option<Certificate>,
}

impl Witness {
    pub fn new(scenario: Scenario, op: Operator, certificate: Option<Certificate>) -> Result<Self> {
        scenario.require_layout(&op)?;
        Ok(Witness { scenario, op, certificate })
    }

    pub fn scenario(&self) -> &Scenario {
        &self.scenario
    }

    pub fn op(&self) -> &Operator {
        &self.op
    }

    pub fn certificate(&self) -> Option<&Certificate> {
        self.certificate.as_ref()
    }

    pub fn without_certificate(&self) -> Witness {
        Witness { scenario: self.scenario.clone(), op: self.op.clone(), certificate: None }
    }

    /// `tr[S·W]`.
    pub fn value(&self, w: &ProcessMatrix) -> Result<f64> {
        self.op.hs_inner(w.op())
    }

    pub fn to_json(&self) -> Value {
        let mut v = json!({
            "scenario": self.scenario.to_string(),
            "operator": op_json(&self.op),
        });
        if let Some(c) = &self.certificate {
            v["certificate"] = c.to_json();
        }
        v
    }

    /// Accepts either a witness object or a bare operator.
    pub fn from_json_str(text: &str) -> Result<Self> {
        let v: Value = serde_json::from_str(text)?;
        let (op, certificate) = match v.get("operator") {
            Some(o) => {
                let cert = v.get("certificate").map(Certificate::from_json).transpose()?;
                (op_from_json(o)?, cert)
            }
            None => (op_from_json(&v)?, None),
        };
        let scenario = Scenario::from_layout(op.layout())?;
        Witness::new(scenario, op, certificate)
    }
}

#[derive(Clone, Debug)]
pub struct WitnessReport {
    pub witness: Witness,
    /// `tr[S·W]`.
    pub value: f64,
    /// `tr[S·N]`, equal to 1 at the optimum.
    pub normalization: f64,
    /// Visibility `1/(1 - value)` below which the witness stops detecting, when `value < 0`.
    pub threshold: Option<f64>,
    pub restriction: String,
    pub diagnostics: Diagnostics,
}

impl WitnessReport {
    pub fn to_json(&self) -> Value {
        json!({
            "value": self.value,
            "normalization": self.normalization,
            "threshold": self.threshold,
            "restriction": self.restriction,
            "witness": self.witness.to_json(),
            "diagnostics": self.diagnostics.to_json(),
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct WitnessCheck {
    pub valid: bool,
    /// Largest certificate violation, or the negated minimum of `tr[S·W]` over unit-trace order-cone elements.
    pub worst_residual: f64,
    /// `certificate` or `search`.
    pub method: String,
    pub checks: Vec<(String, f64)>,
}

impl WitnessCheck {
    pub fn to_json(&self) -> Value {
        json!({
            "valid": self.valid,
            "worst_residual": self.worst_residual,
            "method": self.method,
            "checks": self.checks.iter().map(|(k, v)| json!({"check": k, "value": v})).collect::<Vec<_>>(),
        })
    }
}

impl Engine {
    /// Optimal witness with `tr[S·N] = 1` minimising `tr[S·W]` over the restricted space.
    pub fn construct_witness(
        &self,
        w: &ProcessMatrix,
        noise: Option<&ProcessMatrix>,
        restriction: &Restriction,
    ) -> Result<WitnessReport> {
        let white;
        let noise = match noise {
            Some(n) => n,
            None => {
                white = ProcessMatrix::new(w.scenario().clone(), w.scenario().white_noise(), true)?;
                &white
            }
        };
        let (witness, diagnostics) = if !w.scenario().is_tripartite() && restriction.is_none() {
            self.bipartite_witness(w, noise)?
        } else {
            let solved = self.restricted_robustness(w, Some(noise), restriction)?;
            let certificate = Certificate::order_cones(solved.orders, &solved.s, solved.z[0].clone(), solved.z[1].clone())?;
            (Witness::new(w.scenario().clone(), solved.s, Some(certificate))?, solved.diagnostics)
        };
        let value = witness.value(w)?;
        let normalization = witness.value(noise)?;
        Ok(WitnessReport {
            witness,
            value,
            normalization,
            threshold: (value < 0.0).then(|| 1.0 / (1.0 - value)),
            restriction: restriction.name().to_string(),
            diagnostics,
        })
    }

    /// `min tr[S·W]` over `S = L_V(S^P)` with `_{B_O}S^P ⪰ 0`, `_{A_O}S^P ⪰ 0`, `tr[S·N] = 1`.
    fn bipartite_witness(&self, w: &ProcessMatrix, noise: &ProcessMatrix) -> Result<(Witness, Diagnostics)> {
        let scenario = w.scenario();
        let layout = scenario.layout();
        let n = layout.len();
        let d = layout.dim() as f64;
        let sup = Supports::new(scenario)?;
        let wv = coefficient_vector(w.op())?;
        let nv = coefficient_vector(noise.op())?;
        let a_o = layout.index_of("A_O")?;
        let b_o = layout.index_of("B_O")?;
        let vars: Vec<usize> = PauliString::all(n)
            .filter(|s| s.get(a_o) == Pauli::I || s.get(b_o) == Pauli::I)
            .map(|s| s.index())
            .collect();
        let mut program = ConicProgram::new(vars.len());
        program.set_objective(vars.iter().map(|&i| if sup.kv[i] { d * wv[i] } else { 0.0 }).collect())?;
        program.add_equality(vars.iter().map(|&i| if sup.kv[i] { d * nv[i] } else { 0.0 }).collect(), 1.0)?;
        for traced in [b_o, a_o] {
            let mut block = PsdBlock::new(1 << n);
            for (k, &i) in vars.iter().enumerate() {
                if PauliString::from_index(n, i).get(traced) == Pauli::I {
                    block.add_term(k, combination_matrix(n, [(i, 1.0)]).expect("nonzero string"))?;
                }
            }
            program.add_block(block)?;
        }
        let mut warnings = Vec::new();
        let result = self.solve(&program, &mut warnings)?;
        let mut pv = vec![0.0; wv.len()];
        for (k, &i) in vars.iter().enumerate() {
            pv[i] = result.x[k];
        }
        let sv: Vec<f64> = pv.iter().enumerate().map(|(i, &p)| if sup.kv[i] { p } else { 0.0 }).collect();
        let s = operator_from_vector(layout, &sv);
        let s_p = operator_from_vector(layout, &pv);
        let certificate = Certificate::bipartite(&s, s_p)?;
        let witness = Witness::new(scenario.clone(), s, Some(certificate))?;
        Ok((witness, Diagnostics::from_result(&result, vars.len(), warnings)))
    }

    /// Checks the attached certificate, or searches for the most negative
    /// `tr[S·W]` over unit-trace elements of each order cone.
    pub fn verify_witness(&self, witness: &Witness, tol: f64) -> Result<WitnessCheck> {
        let scenario = witness.scenario();
        if let Some(cert) = witness.certificate() {
            let checks = cert.residuals(scenario, witness.op())?;
            let worst = checks.iter().map(|c| c.1).fold(0.0, f64::max);
            return Ok(WitnessCheck { valid: worst <= tol, worst_residual: worst, method: "certificate".into(), checks });
        }
        let layout = scenario.layout();
        let n = layout.len();
        let d = layout.dim() as f64;
        let sup = Supports::new(scenario)?;
        let sv = coefficient_vector(witness.op())?;
        let mut checks = Vec::new();
        for (order, keep) in [(sup.orders.0, &sup.k1), (sup.orders.1, &sup.k2)] {
            // Z = 1/D + Σ z_σ σ over kept non-identity strings
            let strings: Vec<usize> = (1..sv.len()).filter(|&i| keep[i]).collect();
            let mut program = ConicProgram::new(strings.len());
            program.set_objective(strings.iter().map(|&i| d * sv[i]).collect())?;
            let mut block = PsdBlock::new(1 << n);
            block.set_constant(dense_combination(n, [(0, 1.0 / d)]))?;
            for (k, &i) in strings.iter().enumerate() {
                block.add_term(k, combination_matrix(n, [(i, 1.0)]).expect("nonzero string"))?;
            }
            program.add_block(block)?;
            let result = self.solve(&program, &mut Vec::new())?;
            let min = result.objective_value + sv[0];
            checks.push((format!("min tr[S W] over {order}"), min));
        }
        let worst = checks.iter().map(|c| (-c.1).max(0.0)).fold(0.0, f64::max);
        Ok(WitnessCheck { valid: worst <= tol, worst_residual: worst, method: "search".into(), checks })
    }
}
