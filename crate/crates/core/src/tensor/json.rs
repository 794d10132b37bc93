//! JSON operator format:
//!
//! ```json
//! {"layout":[{"label":"A_I","dim":2,"party":"A"}, ...],
//!  "pauli":{"1ZZ1":0.25, ...},
//!  "dense":[[re,im], ...]}
//! ```
//!
//! `dense` is row-major; `pauli` wins when both are present.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::operator::{CMat, C64};
use super::{Layout, Operator, Party, PauliExpansion, PauliString, Subsystem};
use crate::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SubsystemJson {
    pub label: String,
    pub dim: usize,
    pub party: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OperatorJson {
    pub layout: Vec<SubsystemJson>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pauli: Option<BTreeMap<String, f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dense: Option<Vec<[f64; 2]>>,
}

pub fn layout_to_json(layout: &Layout) -> Vec<SubsystemJson> {
    layout
        .systems()
        .iter()
        .map(|s| SubsystemJson { label: s.label.clone(), dim: s.dim, party: s.party.to_string() })
        .collect()
}

pub fn layout_from_json(items: &[SubsystemJson]) -> Result<Layout> {
    let systems = items
        .iter()
        .map(|s| Ok(Subsystem::new(s.label.clone(), s.dim, Party::parse(&s.party)?)))
        .collect::<Result<Vec<_>>>()?;
    Layout::new(systems)
}

impl OperatorJson {
    pub fn from_expansion(e: &PauliExpansion) -> Self {
        OperatorJson {
            layout: layout_to_json(e.layout()),
            pauli: Some(e.terms().iter().map(|(k, v)| (k.to_string(), *v)).collect()),
            dense: None,
        }
    }

    /// Pauli form for all-qubit layouts, dense otherwise.
    pub fn from_operator(op: &Operator) -> Self {
        if op.layout().is_all_qubit() {
            if let Ok(e) = op.to_pauli() {
                // drop rounding residue from the transform
                let cut = 1e-14 * e.terms().values().map(|c| c.abs()).fold(0.0, f64::max);
                return Self::from_expansion(&e.pruned(cut));
            }
        }
        OperatorJson {
            layout: layout_to_json(op.layout()),
            pauli: None,
            dense: Some(op.matrix().transpose().iter().map(|z| [z.re, z.im]).collect()),
        }
    }

    pub fn layout(&self) -> Result<Layout> {
        layout_from_json(&self.layout)
    }

    /// The Pauli expansion when the file carries one.
    pub fn expansion(&self) -> Result<Option<PauliExpansion>> {
        let Some(terms) = &self.pauli else { return Ok(None) };
        let layout = self.layout()?;
        let mut e = PauliExpansion::new(layout)?;
        for (k, v) in terms {
            let s: PauliString = k.parse()?;
            e.add_term(s, *v)?;
        }
        Ok(Some(e))
    }

    pub fn to_operator(&self) -> Result<Operator> {
        if let Some(e) = self.expansion()? {
            return Ok(e.to_operator());
        }
        let layout = self.layout()?;
        let d = layout.dim();
        let dense = self.dense.as_ref().ok_or_else(|| Error::Parse("operator has neither `pauli` nor `dense`".into()))?;
        if dense.len() != d * d {
            return Err(Error::DimensionMismatch { expected: d * d, got: dense.len() });
        }
        let m = CMat::from_fn(d, d, |i, j| {
            let [re, im] = dense[i * d + j];
            C64::new(re, im)
        });
        Operator::new(layout, m)
    }

    pub fn parse(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn to_string_pretty(&self) -> String {
        serde_json::to_string_pretty(self).expect("operator JSON serialises")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pauli_takes_precedence() {
        let text = r#"{"layout":[{"label":"A_I","dim":2,"party":"A"}],
            "pauli":{"Z":1.0},
            "dense":[[1,0],[0,0],[0,0],[1,0]]}"#;
        let op = OperatorJson::parse(text).unwrap().to_operator().unwrap();
        assert!((op.min_eigenvalue() + 1.0).abs() < 1e-15);
    }

    #[test]
    fn dense_qutrit() {
        let text = r#"{"layout":[{"label":"A_I","dim":3,"party":"A"}],
            "dense":[[1,0],[0,0],[0,0],[0,0],[2,0],[0,1],[0,0],[0,-1],[2,0]]}"#;
        let op = OperatorJson::parse(text).unwrap().to_operator().unwrap();
        assert_eq!(op.dim(), 3);
        let back = OperatorJson::from_operator(&op);
        assert!(back.pauli.is_none());
        assert_eq!(back.to_operator().unwrap(), op);
    }

    #[test]
    fn expansion_text_round_trip() {
        let layout = Layout::bipartite();
        let e = PauliExpansion::from_terms(layout, [("1111", 0.25), ("1ZZ1", 0.1767766952966369)]).unwrap();
        let text = OperatorJson::from_expansion(&e).to_string_pretty();
        let again = OperatorJson::parse(&text).unwrap().expansion().unwrap().unwrap();
        assert_eq!(again, e);
        assert_eq!(OperatorJson::from_expansion(&again).to_string_pretty(), text);
    }
}
