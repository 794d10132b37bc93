use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use super::{Layout, Operator, Pauli, PauliExpansion, PauliString};
use crate::Result;

/// Linear combination of trace-and-replace maps `Σ α_i ·ₓᵢ(·)`.
///
/// Composition of two maps `ₓ∘ᵧ` is `ₓ∪ᵧ`, so bracket expressions such as
/// `[1 - B_O] A_I A_O` are products of terms. Every such map acts diagonally on
/// Pauli strings: `ₓσ = σ` when σ is the identity on all of `X`, else `0`.
#[derive(Clone, Debug, PartialEq)]
pub struct TraceReplace {
    terms: BTreeMap<BTreeSet<String>, f64>,
}

impl TraceReplace {
    /// The identity map (`ₓ` with `X = ∅`).
    pub fn identity() -> Self {
        Self::over(&[])
    }

    pub fn over(labels: &[&str]) -> Self {
        let set: BTreeSet<String> = labels.iter().map(|s| s.to_string()).collect();
        TraceReplace { terms: BTreeMap::from([(set, 1.0)]) }
    }

    /// `[1 - X]`.
    pub fn one_minus(labels: &[&str]) -> Self {
        Self::identity().sub(&Self::over(labels))
    }

    pub fn terms(&self) -> &BTreeMap<BTreeSet<String>, f64> {
        &self.terms
    }

    pub fn add(&self, other: &TraceReplace) -> TraceReplace {
        let mut terms = self.terms.clone();
        for (k, v) in &other.terms {
            *terms.entry(k.clone()).or_insert(0.0) += v;
        }
        terms.retain(|_, v| *v != 0.0);
        TraceReplace { terms }
    }

    pub fn sub(&self, other: &TraceReplace) -> TraceReplace {
        self.add(&other.scale(-1.0))
    }

    pub fn scale(&self, alpha: f64) -> TraceReplace {
        TraceReplace { terms: self.terms.iter().map(|(k, v)| (k.clone(), v * alpha)).collect() }
    }

    /// Composition `self ∘ other`.
    pub fn then(&self, other: &TraceReplace) -> TraceReplace {
        let mut terms: BTreeMap<BTreeSet<String>, f64> = BTreeMap::new();
        for (a, va) in &self.terms {
            for (b, vb) in &other.terms {
                let union: BTreeSet<String> = a.union(b).cloned().collect();
                *terms.entry(union).or_insert(0.0) += va * vb;
            }
        }
        terms.retain(|_, v| *v != 0.0);
        TraceReplace { terms }
    }

    /// Composition with the plain map `ₓ`, i.e. `self` followed by tracing `labels`.
    pub fn with(&self, labels: &[&str]) -> TraceReplace {
        self.then(&TraceReplace::over(labels))
    }

    fn check_labels(&self, layout: &Layout) -> Result<()> {
        for set in self.terms.keys() {
            for l in set {
                layout.index_of(l)?;
            }
        }
        Ok(())
    }

    /// Eigenvalue of the map on a Pauli string.
    pub fn eigenvalue(&self, layout: &Layout, string: &PauliString) -> Result<f64> {
        self.check_labels(layout)?;
        let mut acc = 0.0;
        for (set, v) in &self.terms {
            let mut keep = true;
            for l in set {
                if string.get(layout.index_of(l)?) != Pauli::I {
                    keep = false;
                    break;
                }
            }
            if keep {
                acc += v;
            }
        }
        Ok(acc)
    }

    /// Matrix route: weighted sum of `trace_and_replace` applications.
    pub fn apply(&self, op: &Operator) -> Result<Operator> {
        self.check_labels(op.layout())?;
        let mut out = Operator::zero(op.layout());
        for (set, v) in &self.terms {
            let labels: Vec<&str> = set.iter().map(|s| s.as_str()).collect();
            let mapped = if labels.is_empty() { op.clone() } else { op.trace_and_replace(&labels)? };
            out = out.combine(1.0, &mapped, *v)?;
        }
        Ok(out)
    }

    /// Pauli route: scales each coefficient by the map's eigenvalue.
    pub fn apply_pauli(&self, e: &PauliExpansion) -> Result<PauliExpansion> {
        self.check_labels(e.layout())?;
        let layout = e.layout().clone();
        Ok(e.map_diagonal(|s| self.eigenvalue(&layout, s).expect("labels checked")))
    }
}

impl fmt::Display for TraceReplace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .terms
            .iter()
            .map(|(set, v)| {
                let name = if set.is_empty() { "1".to_string() } else { set.iter().cloned().collect::<Vec<_>>().join("") };
                format!("{v:+}·{name}")
            })
            .collect();
        f.write_str(&parts.join(" "))
    }
}
