use crate::spaces::Scenario;
use crate::tensor::{Pauli, PauliString, TraceReplace};
use crate::{Error, Result};

/// Linear restrictions on the witness search space.
///
/// A Pauli string may appear in `S` only if every annihilator maps it to zero
/// (and, with `valid_subspace`, if `L_V` keeps it). A Charlie span further
/// restricts the `C_I` factor to the span of the given single-qubit operators.
#[derive(Clone, Debug, PartialEq)]
pub struct Restriction {
    name: String,
    annihilators: Vec<TraceReplace>,
    /// Coefficients over `(1, X, Y, Z)`.
    charlie_span: Option<Vec<[f64; 4]>>,
    valid_subspace: bool,
}

/// `_{X_I}S = _{X_O}S = _{X_I X_O}S` for `X = A, B`, as maps that must annihilate `S`.
pub fn unitary_restriction_constraints(_scenario: &Scenario) -> Vec<(String, TraceReplace)> {
    let mut out = Vec::new();
    for (i, o) in [("A_I", "A_O"), ("B_I", "B_O")] {
        out.push((format!("{i} - {i}{o}"), TraceReplace::over(&[i]).sub(&TraceReplace::over(&[i, o]))));
        out.push((format!("{o} - {i}{o}"), TraceReplace::over(&[o]).sub(&TraceReplace::over(&[i, o]))));
        out.push((format!("{i} - {o}"), TraceReplace::over(&[i]).sub(&TraceReplace::over(&[o]))));
    }
    out
}

impl Restriction {
    /// The unrestricted search space `S = L_V(S)`.
    pub fn none() -> Self {
        Restriction { name: "none".into(), annihilators: vec![], charlie_span: None, valid_subspace: true }
    }

    /// Alice and Bob restricted to unitaries; replaces `S = L_V(S)`.
    pub fn unitary_ab() -> Self {
        Restriction {
            name: "unitary".into(),
            annihilators: unitary_restriction_constraints(&Scenario::tripartite()).into_iter().map(|(_, m)| m).collect(),
            charlie_span: None,
            valid_subspace: false,
        }
    }

    /// Unitaries for Alice and Bob, Charlie's factor in span{1, X}.
    pub fn charlie_x() -> Self {
        let mut r = Self::unitary_ab().with_charlie_span(vec![[1.0, 0.0, 0.0, 0.0], [0.0, 1.0, 0.0, 0.0]]);
        r.name = "charlie-x".into();
        r
    }

    /// Charlie's factor restricted to the span of the given operators (over `1, X, Y, Z`).
    pub fn charlie_povm_basis(ops: Vec<[f64; 4]>) -> Self {
        Restriction::none().with_charlie_span(ops).named("charlie-basis")
    }

    pub fn custom(name: impl Into<String>, annihilators: Vec<TraceReplace>, valid_subspace: bool) -> Self {
        Restriction { name: name.into(), annihilators, charlie_span: None, valid_subspace }
    }

    pub fn with_charlie_span(mut self, ops: Vec<[f64; 4]>) -> Self {
        self.charlie_span = Some(ops);
        self
    }

    pub fn named(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn is_none(&self) -> bool {
        self.annihilators.is_empty() && self.charlie_span.is_none() && self.valid_subspace
    }

    pub fn annihilators(&self) -> &[TraceReplace] {
        &self.annihilators
    }

    /// Basis of the allowed space as sparse Pauli coefficient vectors (string index, coefficient).
    pub(crate) fn basis(&self, scenario: &Scenario, kv: &[bool]) -> Result<Vec<Vec<(usize, f64)>>> {
        let layout = scenario.layout();
        let n = layout.len();
        let mut allowed = vec![true; 1 << (2 * n)];
        for s in PauliString::all(n) {
            let i = s.index();
            if self.valid_subspace && !kv[i] {
                allowed[i] = false;
                continue;
            }
            for m in &self.annihilators {
                if m.eigenvalue(layout, &s)? != 0.0 {
                    allowed[i] = false;
                    break;
                }
            }
        }
        let Some(span) = &self.charlie_span else {
            return Ok((0..allowed.len()).filter(|&i| allowed[i]).map(|i| vec![(i, 1.0)]).collect());
        };
        if !layout.contains("C_I") {
            return Err(Error::Scenario("a Charlie restriction needs the tripartite scenario".into()));
        }
        let c = layout.index_of("C_I")?;
        let span = orthonormalize(span)?;
        let mut out = Vec::new();
        for s in PauliString::all(n).filter(|s| s.get(c) == Pauli::I) {
            for u in &span {
                let mut v = Vec::new();
                let mut ok = true;
                for (p, &coef) in Pauli::ALL.iter().zip(u) {
                    if coef == 0.0 {
                        continue;
                    }
                    let mut ops = s.ops().to_vec();
                    ops[c] = *p;
                    let idx = PauliString::new(ops).index();
                    ok &= allowed[idx];
                    v.push((idx, coef));
                }
                if ok && !v.is_empty() {
                    out.push(v);
                }
            }
        }
        Ok(out)
    }
}

fn orthonormalize(ops: &[[f64; 4]]) -> Result<Vec<[f64; 4]>> {
    let mut out: Vec<[f64; 4]> = Vec::new();
    for op in ops {
        let mut v = *op;
        for u in &out {
            let d: f64 = v.iter().zip(u).map(|(a, b)| a * b).sum();
            for k in 0..4 {
                v[k] -= d * u[k];
            }
        }
        let norm = v.iter().map(|a| a * a).sum::<f64>().sqrt();
        if norm > 1e-12 {
            let mut w = v.map(|a| a / norm);
            for a in w.iter_mut() {
                if a.abs() < 1e-15 {
                    *a = 0.0;
                }
            }
            out.push(w);
        }
    }
    if out.is_empty() {
        return Err(Error::Parameter("empty Charlie span".into()));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::robustness::Supports;

    #[test]
    fn unitary_basis_size() {
        let s = Scenario::tripartite();
        let sup = Supports::new(&s).unwrap();
        assert_eq!(Restriction::unitary_ab().basis(&s, &sup.kv).unwrap().len(), 400);
        assert_eq!(Restriction::charlie_x().basis(&s, &sup.kv).unwrap().len(), 200);
        assert_eq!(Restriction::none().basis(&s, &sup.kv).unwrap().len(), 856);
    }

    #[test]
    fn charlie_span_needs_tripartite() {
        let s = Scenario::bipartite();
        let sup = Supports::new(&s).unwrap();
        assert!(Restriction::charlie_x().basis(&s, &sup.kv).is_err());
    }
}
