use std::fmt;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Dense storage guard: no operator may exceed this side length.
pub const MAX_DIMENSION: usize = 4096;

/// Party owning a subsystem.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Party {
    A,
    B,
    C,
    /// The target system of the quantum switch, traced out before analysis.
    T,
}

impl Party {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "A" | "Alice" => Ok(Party::A),
            "B" | "Bob" => Ok(Party::B),
            "C" | "Charlie" => Ok(Party::C),
            "T" | "target" => Ok(Party::T),
            _ => Err(Error::Parse(format!("unknown party `{s}`"))),
        }
    }
}

impl fmt::Display for Party {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Party::A => "A",
            Party::B => "B",
            Party::C => "C",
            Party::T => "T",
        };
        f.write_str(s)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Subsystem {
    pub label: String,
    pub dim: usize,
    pub party: Party,
}

impl Subsystem {
    pub fn new(label: impl Into<String>, dim: usize, party: Party) -> Self {
        Subsystem { label: label.into(), dim, party }
    }

    pub fn qubit(label: impl Into<String>, party: Party) -> Self {
        Self::new(label, 2, party)
    }
}

/// Ordered list of labelled subsystems. Kronecker products follow this order,
/// with the first subsystem being the most significant index.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Layout {
    systems: Vec<Subsystem>,
}

impl Layout {
    pub fn new(systems: Vec<Subsystem>) -> Result<Self> {
        for (i, s) in systems.iter().enumerate() {
            if s.dim == 0 {
                return Err(Error::InvalidLayout(format!("subsystem `{}` has dimension 0", s.label)));
            }
            if systems[..i].iter().any(|o| o.label == s.label) {
                return Err(Error::DuplicateLabel(s.label.clone()));
            }
        }
        let layout = Layout { systems };
        let dim = layout.systems.iter().try_fold(1usize, |acc, s| acc.checked_mul(s.dim));
        match dim {
            Some(d) if d <= MAX_DIMENSION => Ok(layout),
            Some(d) => Err(Error::TooLarge(d)),
            None => Err(Error::TooLarge(usize::MAX)),
        }
    }

    /// All-qubit layout where the party is read from the first letter of each label.
    pub fn qubits(labels: &[&str]) -> Result<Self> {
        let systems = labels
            .iter()
            .map(|l| {
                let first = l.chars().next().map(|c| c.to_string()).unwrap_or_default();
                Ok(Subsystem::qubit(*l, Party::parse(&first)?))
            })
            .collect::<Result<Vec<_>>>()?;
        Layout::new(systems)
    }

    /// `A_I A_O B_I B_O`, all qubits.
    pub fn bipartite() -> Self {
        Layout::qubits(&["A_I", "A_O", "B_I", "B_O"]).expect("static layout")
    }

    /// `A_I A_O B_I B_O C_I`, all qubits.
    pub fn tripartite() -> Self {
        Layout::qubits(&["A_I", "A_O", "B_I", "B_O", "C_I"]).expect("static layout")
    }

    /// Tripartite layout with the switch's target output `T_I` appended.
    pub fn tripartite_with_target() -> Self {
        Layout::qubits(&["A_I", "A_O", "B_I", "B_O", "C_I", "T_I"]).expect("static layout")
    }

    pub fn systems(&self) -> &[Subsystem] {
        &self.systems
    }

    pub fn len(&self) -> usize {
        self.systems.len()
    }

    pub fn is_empty(&self) -> bool {
        self.systems.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.systems.iter().map(|s| s.dim).product()
    }

    pub fn dims(&self) -> Vec<usize> {
        self.systems.iter().map(|s| s.dim).collect()
    }

    pub fn labels(&self) -> Vec<&str> {
        self.systems.iter().map(|s| s.label.as_str()).collect()
    }

    pub fn index_of(&self, label: &str) -> Result<usize> {
        self.systems
            .iter()
            .position(|s| s.label == label)
            .ok_or_else(|| Error::UnknownLabel(label.to_string()))
    }

    pub fn contains(&self, label: &str) -> bool {
        self.systems.iter().any(|s| s.label == label)
    }

    pub fn is_all_qubit(&self) -> bool {
        self.systems.iter().all(|s| s.dim == 2)
    }

    pub(crate) fn require_qubits(&self) -> Result<()> {
        match self.systems.iter().find(|s| s.dim != 2) {
            Some(s) => Err(Error::NotQubit { label: s.label.clone(), dim: s.dim }),
            None => Ok(()),
        }
    }

    /// Product of the dimensions of the named subsystems.
    pub fn dim_of(&self, labels: &[&str]) -> Result<usize> {
        labels.iter().try_fold(1, |acc, l| Ok(acc * self.systems[self.index_of(l)?].dim))
    }

    /// Layout with the named subsystems removed, order preserved.
    pub fn without(&self, labels: &[&str]) -> Result<Layout> {
        for l in labels {
            self.index_of(l)?;
        }
        Ok(Layout {
            systems: self.systems.iter().filter(|s| !labels.contains(&s.label.as_str())).cloned().collect(),
        })
    }

    /// Concatenation `self ⊗ other`.
    pub fn concat(&self, other: &Layout) -> Result<Layout> {
        let mut systems = self.systems.clone();
        systems.extend(other.systems.iter().cloned());
        Layout::new(systems)
    }

    /// Per-subsystem digit decomposition of a flat index (most significant first).
    pub(crate) fn digits(&self, mut index: usize) -> Vec<usize> {
        let mut out = vec![0; self.systems.len()];
        for (k, s) in self.systems.iter().enumerate().rev() {
            out[k] = index % s.dim;
            index /= s.dim;
        }
        out
    }
}

impl fmt::Display for Layout {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.systems.iter().map(|s| format!("{}[{}]", s.label, s.dim)).collect();
        f.write_str(&parts.join(" "))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn duplicate_labels_rejected() {
        let err = Layout::qubits(&["A_I", "A_I"]).unwrap_err();
        assert!(matches!(err, Error::DuplicateLabel(_)));
    }

    #[test]
    fn dimension_guard() {
        let labels: Vec<String> = (0..13).map(|i| format!("A{i}")).collect();
        let refs: Vec<&str> = labels.iter().map(|s| s.as_str()).collect();
        assert!(matches!(Layout::qubits(&refs), Err(Error::TooLarge(8192))));
    }

    #[test]
    fn digits_are_most_significant_first() {
        let l = Layout::new(vec![Subsystem::new("A_I", 2, Party::A), Subsystem::new("B_I", 3, Party::B)]).unwrap();
        assert_eq!(l.digits(5), vec![1, 2]);
        assert_eq!(l.dim(), 6);
        assert_eq!(l.without(&["A_I"]).unwrap().dims(), vec![3]);
    }
}
