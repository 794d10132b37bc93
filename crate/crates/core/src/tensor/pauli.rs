use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use super::operator::{CMat, C64};
use super::{Layout, Operator};
use crate::{Error, Result};

/// Single-qubit Pauli operator.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    pub const ALL: [Pauli; 4] = [Pauli::I, Pauli::X, Pauli::Y, Pauli::Z];

    pub fn symbol(self) -> char {
        match self {
            Pauli::I => '1',
            Pauli::X => 'X',
            Pauli::Y => 'Y',
            Pauli::Z => 'Z',
        }
    }

    pub fn from_symbol(c: char) -> Result<Self> {
        match c {
            '1' | 'I' => Ok(Pauli::I),
            'X' => Ok(Pauli::X),
            'Y' => Ok(Pauli::Y),
            'Z' => Ok(Pauli::Z),
            _ => Err(Error::PauliSymbol(c)),
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Pauli {
        Pauli::ALL[i & 3]
    }

    /// Whether the operator flips the computational basis state.
    fn flips(self) -> bool {
        matches!(self, Pauli::X | Pauli::Y)
    }

    /// Entry `σ[row, col]` of the single nonzero in row `row_bit`.
    fn phase(self, row_bit: usize) -> C64 {
        match (self, row_bit) {
            (Pauli::I, _) | (Pauli::X, _) => C64::new(1.0, 0.0),
            (Pauli::Y, 0) => C64::new(0.0, -1.0),
            (Pauli::Y, _) => C64::new(0.0, 1.0),
            (Pauli::Z, 0) => C64::new(1.0, 0.0),
            (Pauli::Z, _) => C64::new(-1.0, 0.0),
        }
    }

    pub fn matrix(self) -> CMat {
        let mut m = CMat::zeros(2, 2);
        for row in 0..2 {
            let col = if self.flips() { row ^ 1 } else { row };
            m[(row, col)] = self.phase(row);
        }
        m
    }
}

/// Tensor product of Pauli operators, one per subsystem, in layout order.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PauliString(Vec<Pauli>);

impl PauliString {
    pub fn new(ops: Vec<Pauli>) -> Self {
        PauliString(ops)
    }

    pub fn identity(n: usize) -> Self {
        PauliString(vec![Pauli::I; n])
    }

    /// Base-4 index with the first subsystem most significant.
    pub fn index(&self) -> usize {
        self.0.iter().fold(0, |acc, p| acc * 4 + p.index())
    }

    pub fn from_index(n: usize, mut index: usize) -> Self {
        let mut ops = vec![Pauli::I; n];
        for k in (0..n).rev() {
            ops[k] = Pauli::from_index(index & 3);
            index >>= 2;
        }
        PauliString(ops)
    }

    /// Every string on `n` qubits, in index order.
    pub fn all(n: usize) -> impl Iterator<Item = PauliString> {
        (0..1usize << (2 * n)).map(move |i| PauliString::from_index(n, i))
    }

    pub fn ops(&self) -> &[Pauli] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn is_identity(&self) -> bool {
        self.0.iter().all(|&p| p == Pauli::I)
    }

    pub fn get(&self, k: usize) -> Pauli {
        self.0[k]
    }

    /// Nonzero entries `(row, col, value)`, exactly one per row.
    pub fn entries(&self) -> Vec<(usize, usize, C64)> {
        let n = self.0.len();
        let flip_mask = self.0.iter().fold(0usize, |acc, p| (acc << 1) | p.flips() as usize);
        (0..1usize << n)
            .map(|row| {
                let mut phase = C64::new(1.0, 0.0);
                for (k, p) in self.0.iter().enumerate() {
                    let bit = (row >> (n - 1 - k)) & 1;
                    phase *= p.phase(bit);
                }
                (row, row ^ flip_mask, phase)
            })
            .collect()
    }

    pub fn matrix(&self) -> CMat {
        let d = 1usize << self.0.len();
        let mut m = CMat::zeros(d, d);
        for (r, c, v) in self.entries() {
            m[(r, c)] = v;
        }
        m
    }

    /// `tr[σ·H]` using the one-entry-per-row structure of `σ`.
    pub fn trace_with(&self, h: &CMat) -> C64 {
        self.entries().into_iter().map(|(r, c, v)| v * h[(c, r)]).sum()
    }

    fn check_layout(&self, layout: &Layout) -> Result<()> {
        layout.require_qubits()?;
        if self.len() != layout.len() {
            return Err(Error::PauliLength { expected: layout.len(), got: self.len() });
        }
        Ok(())
    }

    pub fn to_operator(&self, layout: &Layout) -> Result<Operator> {
        self.check_layout(layout)?;
        Operator::new(layout.clone(), self.matrix())
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for p in &self.0 {
            write!(f, "{}", p.symbol())?;
        }
        Ok(())
    }
}

impl FromStr for PauliString {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        s.chars().filter(|c| !c.is_whitespace()).map(Pauli::from_symbol).collect::<Result<Vec<_>>>().map(PauliString)
    }
}

/// Kronecker product of the named single-qubit Paulis over an all-qubit layout.
pub fn pauli_string_matrix(layout: &Layout, string: &PauliString) -> Result<Operator> {
    string.to_operator(layout)
}

/// Real-coefficient expansion of a Hermitian operator in the Pauli basis.
#[derive(Clone, Debug, PartialEq)]
pub struct PauliExpansion {
    layout: Layout,
    terms: BTreeMap<PauliString, f64>,
}

impl PauliExpansion {
    pub fn new(layout: Layout) -> Result<Self> {
        layout.require_qubits()?;
        Ok(PauliExpansion { layout, terms: BTreeMap::new() })
    }

    pub fn from_terms<I, S>(layout: Layout, terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (S, f64)>,
        S: AsRef<str>,
    {
        let mut e = PauliExpansion::new(layout)?;
        for (s, c) in terms {
            let string: PauliString = s.as_ref().parse()?;
            e.add_term(string, c)?;
        }
        Ok(e)
    }

    pub fn layout(&self) -> &Layout {
        &self.layout
    }

    pub fn terms(&self) -> &BTreeMap<PauliString, f64> {
        &self.terms
    }

    pub fn coefficient(&self, s: &PauliString) -> f64 {
        self.terms.get(s).copied().unwrap_or(0.0)
    }

    /// Adds `c·σ`, dropping the entry if it cancels exactly.
    pub fn add_term(&mut self, string: PauliString, c: f64) -> Result<()> {
        string.check_layout(&self.layout)?;
        let key = string.clone();
        let entry = self.terms.entry(string).or_insert(0.0);
        *entry += c;
        if *entry == 0.0 {
            self.terms.remove(&key);
        }
        Ok(())
    }

    pub fn scale(&self, alpha: f64) -> PauliExpansion {
        PauliExpansion {
            layout: self.layout.clone(),
            terms: self.terms.iter().map(|(k, v)| (k.clone(), v * alpha)).filter(|(_, v)| *v != 0.0).collect(),
        }
    }

    /// `α·self + β·other`.
    pub fn combine(&self, alpha: f64, other: &PauliExpansion, beta: f64) -> Result<PauliExpansion> {
        if self.layout != other.layout {
            return Err(Error::LayoutMismatch(format!("{} vs {}", self.layout, other.layout)));
        }
        let mut out = self.scale(alpha);
        for (k, v) in &other.terms {
            out.add_term(k.clone(), beta * v)?;
        }
        Ok(out)
    }

    /// Applies a per-string scalar (for maps that are diagonal in the Pauli basis).
    /// Drops terms with `|c| <= cut`.
    pub fn pruned(&self, cut: f64) -> PauliExpansion {
        PauliExpansion {
            layout: self.layout.clone(),
            terms: self.terms.iter().filter(|(_, v)| v.abs() > cut).map(|(k, v)| (k.clone(), *v)).collect(),
        }
    }

    pub fn map_diagonal(&self, mut f: impl FnMut(&PauliString) -> f64) -> PauliExpansion {
        PauliExpansion {
            layout: self.layout.clone(),
            terms: self
                .terms
                .iter()
                .map(|(k, v)| (k.clone(), v * f(k)))
                .filter(|(_, v)| *v != 0.0)
                .collect(),
        }
    }

    pub fn to_operator(&self) -> Operator {
        let d = self.layout.dim();
        let mut m = CMat::zeros(d, d);
        for (s, &c) in &self.terms {
            for (r, col, v) in s.entries() {
                m[(r, col)] += v * c;
            }
        }
        Operator::from_hermitian(self.layout.clone(), m)
    }

    /// `tr[A·B]` computed from coefficients: `D · Σ a_σ b_σ`.
    pub fn hs_inner(&self, other: &PauliExpansion) -> Result<f64> {
        if self.layout != other.layout {
            return Err(Error::LayoutMismatch(format!("{} vs {}", self.layout, other.layout)));
        }
        let d = self.layout.dim() as f64;
        Ok(d * self.terms.iter().map(|(k, v)| v * other.coefficient(k)).sum::<f64>())
    }

    /// Largest absolute coefficient difference.
    pub fn max_abs_diff(&self, other: &PauliExpansion) -> f64 {
        let mut worst = 0.0f64;
        for (k, v) in &self.terms {
            worst = worst.max((v - other.coefficient(k)).abs());
        }
        for (k, v) in &other.terms {
            if !self.terms.contains_key(k) {
                worst = worst.max(v.abs());
            }
        }
        worst
    }
}

/// Coefficients `tr[σ·H]/D` for every Pauli string; exact zeros are dropped.
pub fn to_pauli(h: &Operator) -> Result<PauliExpansion> {
    let layout = h.layout().clone();
    layout.require_qubits()?;
    let n = layout.len();
    let d = layout.dim() as f64;
    let mut terms = BTreeMap::new();
    for (i, t) in crate::conic::pauli_traces(h.matrix()).into_iter().enumerate() {
        if t != 0.0 {
            terms.insert(PauliString::from_index(n, i), t / d);
        }
    }
    Ok(PauliExpansion { layout, terms })
}

pub fn from_pauli(e: &PauliExpansion) -> Operator {
    e.to_operator()
}

impl Operator {
    pub fn to_pauli(&self) -> Result<PauliExpansion> {
        to_pauli(self)
    }
}
