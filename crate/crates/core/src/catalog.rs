//! Concrete processes, witnesses and decompositions.
//!
//! Tabulated witness coefficients live in `data/*.toml` and are parsed at
//! first use.

use std::collections::BTreeMap;
use std::f64::consts::FRAC_1_SQRT_2;
use std::sync::OnceLock;

use serde::Deserialize;

use crate::robustness::{Certificate, Witness};
use crate::spaces::{swap_parties, CausalOrder, ProcessMatrix, Scenario};
use crate::tensor::{CMat, Layout, Operator, Pauli, PauliExpansion, PauliString, Subsystem, C64};
use crate::{Error, Party, Result};

fn c(re: f64) -> C64 {
    C64::new(re, 0.0)
}

fn sgn(x: f64) -> f64 {
    if x > 0.0 {
        1.0
    } else if x < 0.0 {
        -1.0
    } else {
        0.0
    }
}

/// `W_{η1,η2} = (1 + η1·1ZZ1 + η2·Z1XZ)/4`; validity is not enforced.
pub fn w_etas(eta1: f64, eta2: f64) -> ProcessMatrix {
    let e = PauliExpansion::from_terms(Layout::bipartite(), [("1111", 0.25), ("1ZZ1", 0.25 * eta1), ("Z1XZ", 0.25 * eta2)])
        .expect("static terms");
    ProcessMatrix::new(Scenario::bipartite(), e.to_operator(), true).expect("bipartite layout")
}

/// `S_{η1,η2} = (1 - sgn(η1)·1ZZ1 - sgn(η2)·Z1XZ)/4`, certified by `S^P = S`.
pub fn s_etas(eta1: f64, eta2: f64) -> Witness {
    let e = PauliExpansion::from_terms(Layout::bipartite(), [("1111", 0.25), ("1ZZ1", -0.25 * sgn(eta1)), ("Z1XZ", -0.25 * sgn(eta2))])
        .expect("static terms");
    let s = e.to_operator();
    let cert = Certificate::bipartite(&s, s.clone()).expect("same layout");
    Witness::new(Scenario::bipartite(), s, Some(cert)).expect("bipartite layout")
}

/// Convex decomposition `W_{η1,η2} = Σ_k weight_k W_k` with `W_k` compatible with one order.
#[derive(Clone, Debug)]
pub struct SepDecomposition {
    pub weights: [f64; 2],
    pub parts: [(CausalOrder, Operator); 2],
}

impl SepDecomposition {
    /// `Σ weight_k W_k`.
    pub fn reassemble(&self) -> Result<Operator> {
        self.parts[0].1.combine(self.weights[0], &self.parts[1].1, self.weights[1])
    }
}

pub fn sep_decomposition_etas(eta1: f64, eta2: f64) -> Result<SepDecomposition> {
    let sum = eta1.abs() + eta2.abs();
    if sum <= 0.0 {
        return Err(Error::Parameter("decomposition needs |η1| + |η2| > 0".into()));
    }
    let part = |s: &str, sign: f64| {
        PauliExpansion::from_terms(Layout::bipartite(), [("1111", 0.25), (s, 0.25 * sign * sum)]).expect("static terms").to_operator()
    };
    Ok(SepDecomposition {
        weights: [eta1.abs() / sum, eta2.abs() / sum],
        parts: [(CausalOrder::AB, part("1ZZ1", sgn(eta1))), (CausalOrder::BA, part("Z1XZ", sgn(eta2)))],
    })
}

/// Target state `cos(θ/2)|0⟩ + e^{iφ} sin(θ/2)|1⟩`.
pub fn qubit_state(theta: f64, phi: f64) -> [C64; 2] {
    [c((theta / 2.0).cos()), C64::from_polar((theta / 2.0).sin(), phi)]
}

fn require_normalized(psi: &[C64; 2]) -> Result<()> {
    let n = psi[0].norm_sqr() + psi[1].norm_sqr();
    if (n - 1.0).abs() > 1e-10 {
        return Err(Error::Parameter(format!("target state has norm² {n}")));
    }
    Ok(())
}

/// The quantum switch `tr_{T_I}|w⟩⟨w|`; `plus = false` puts the control in `(|0⟩ - |1⟩)/√2`.
pub fn switch(psi: [C64; 2], plus: bool) -> Result<ProcessMatrix> {
    require_normalized(&psi)?;
    let full = Layout::tripartite_with_target();
    let sign = if plus { 1.0 } else { -1.0 };
    // index bits: A_I A_O B_I B_O C_I T_I, most significant first
    let mut ket = vec![c(0.0); 64];
    for (idx, amp) in ket.iter_mut().enumerate() {
        let bit = |k: usize| (idx >> (5 - k)) & 1;
        let (ai, ao, bi, bo, ci, t) = (bit(0), bit(1), bit(2), bit(3), bit(4), bit(5));
        if ci == 0 && ao == bi && bo == t {
            *amp += psi[ai] * FRAC_1_SQRT_2;
        }
        if ci == 1 && bo == ai && ao == t {
            *amp += psi[bi] * (sign * FRAC_1_SQRT_2);
        }
    }
    let w = Operator::projector(&full, &ket)?.partial_trace(&["T_I"])?;
    ProcessMatrix::new(Scenario::tripartite(), w, true)
}

/// The switch with target `|0⟩` and control `(|0⟩ + |1⟩)/√2`.
pub fn switch_default() -> ProcessMatrix {
    switch([c(1.0), c(0.0)], true).expect("normalised state")
}

pub fn white(scenario: &Scenario) -> ProcessMatrix {
    ProcessMatrix::new(scenario.clone(), scenario.white_noise(), true).expect("scenario layout")
}

/// `_{C_I}W_switch`: the control depolarised.
pub fn depol(psi: [C64; 2]) -> Result<ProcessMatrix> {
    let w = switch(psi, true)?;
    ProcessMatrix::new(Scenario::tripartite(), w.op().trace_and_replace(&["C_I"])?, true)
}

/// The classical switch: the control dephased in the computational basis.
pub fn deph(psi: [C64; 2]) -> Result<ProcessMatrix> {
    let w = switch(psi, true)?;
    let e = w.op().to_pauli()?.map_diagonal(|s| if matches!(s.get(4), Pauli::X | Pauli::Y) { 0.0 } else { 1.0 });
    ProcessMatrix::new(Scenario::tripartite(), e.to_operator(), true)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Noise {
    White,
    Depol,
    Deph,
}

impl Noise {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "white" => Ok(Noise::White),
            "depol" => Ok(Noise::Depol),
            "deph" => Ok(Noise::Deph),
            other => Err(Error::Parameter(format!("unknown noise `{other}` (white, depol, deph)"))),
        }
    }
}

/// Noise model for the switch with target state `psi`.
pub fn noise(kind: Noise, psi: [C64; 2]) -> Result<ProcessMatrix> {
    match kind {
        Noise::White => Ok(white(&Scenario::tripartite())),
        Noise::Depol => depol(psi),
        Noise::Deph => deph(psi),
    }
}

#[derive(Deserialize)]
struct TermTable {
    #[serde(rename = "S")]
    s: Vec<Vec<String>>,
    #[serde(rename = "T")]
    t: Vec<Vec<String>>,
}

#[derive(Deserialize)]
struct Coefficients {
    s: Vec<f64>,
    t: Vec<f64>,
}

#[derive(Deserialize)]
struct WitnessTable {
    terms: TermTable,
    optimal: Coefficients,
}

static SWITCH_TABLE: OnceLock<WitnessTable> = OnceLock::new();
static UNITARY_TABLE: OnceLock<WitnessTable> = OnceLock::new();

fn switch_table() -> &'static WitnessTable {
    SWITCH_TABLE.get_or_init(|| toml::from_str(include_str!("../data/switch_witness.toml")).expect("bundled table parses"))
}

fn unitary_table() -> &'static WitnessTable {
    UNITARY_TABLE.get_or_init(|| toml::from_str(include_str!("../data/unitary_witness.toml")).expect("bundled table parses"))
}

fn signed_term(t: &str) -> Result<(f64, PauliString)> {
    let (sign, rest) = match t.split_at(1) {
        ("+", r) => (1.0, r),
        ("-", r) => (-1.0, r),
        _ => (1.0, t),
    };
    Ok((sign, rest.parse()?))
}

/// `(const·1 + Σ coef_i Σ_{terms of i} ±σ)/4`.
fn assemble(terms: &[Vec<String>], coefs: &[f64], constant: f64) -> Result<Operator> {
    if terms.len() != coefs.len() {
        return Err(Error::Parameter(format!("{} coefficients for {} terms", coefs.len(), terms.len())));
    }
    let mut e = PauliExpansion::new(Layout::tripartite())?;
    if constant != 0.0 {
        e.add_term(PauliString::identity(5), constant / 4.0)?;
    }
    for (group, &coef) in terms.iter().zip(coefs) {
        for t in group {
            let (sign, s) = signed_term(t)?;
            e.add_term(s, sign * coef / 4.0)?;
        }
    }
    Ok(e.to_operator())
}

/// Tripartite witness from tables, with the `A<B<C` certificate and its party-swapped image.
fn tabulated(table: &WitnessTable, s: &[f64], t: &[f64]) -> Result<Witness> {
    let op = assemble(&table.terms.s, s, 1.0)?;
    let perp = assemble(&table.terms.t, t, 0.0)?;
    let p = op.try_sub(&perp)?;
    let cert = Certificate::OrderCones {
        parts: [(CausalOrder::ABC, p.clone(), perp.clone()), (CausalOrder::BAC, swap_parties(&p)?, swap_parties(&perp)?)],
    };
    Witness::new(Scenario::tripartite(), op, Some(cert))
}

/// The tabulated optimal white-noise witness for the switch.
pub fn s_switch() -> Witness {
    let t = switch_table();
    tabulated(t, &t.optimal.s, &t.optimal.t).expect("bundled table assembles")
}

/// The tabulated witness measurable with unitaries for Alice and Bob.
pub fn s_tilde() -> Witness {
    let t = unitary_table();
    tabulated(t, &t.optimal.s, &t.optimal.t).expect("bundled table assembles")
}

/// Witness family `S(v)` detecting the depolarised and dephased switch at visibility `v`.
pub fn s_family(v: f64) -> Witness {
    let q = 1.0 - v * v / 4.0;
    let h = v * v / 4.0;
    let s = [1.0, 1.0, -q, -q, h, h, 0.0, h, -v / 2.0, 0.0, 0.0, 0.0];
    let t = [q, -q, q, -q, -2.0 * q, 1.0, 1.0, -2.0 * q, 1.0, 1.0, 0.0, 0.0, 0.0];
    tabulated(switch_table(), &s, &t).expect("bundled table assembles")
}

/// CJ matrix of a unitary channel together with the unitary.
#[derive(Clone, Debug, PartialEq)]
pub struct UnitaryCJ {
    pub unitary: CMat,
    pub cj: Operator,
}

/// `M_U = [(1 ⊗ U)|1⟩⟩⟨⟨1|(1 ⊗ U†)]ᵀ` on `{prefix}_I ⊗ {prefix}_O`.
pub fn cj_of_unitary(u: &CMat, prefix: &str) -> Result<UnitaryCJ> {
    let d = u.nrows();
    if u.ncols() != d || d == 0 {
        return Err(Error::Parameter("unitary must be square".into()));
    }
    let dev = (u.adjoint() * u - CMat::identity(d, d)).iter().map(|z| z.norm()).fold(0.0, f64::max);
    if dev > 1e-10 {
        return Err(Error::Parameter(format!("matrix is not unitary (deviation {dev:.2e})")));
    }
    let party = match prefix {
        "A" => Party::A,
        "B" => Party::B,
        "C" => Party::C,
        _ => Party::T,
    };
    let layout = Layout::new(vec![
        Subsystem::new(format!("{prefix}_I"), d, party),
        Subsystem::new(format!("{prefix}_O"), d, party),
    ])?;
    // (1 ⊗ U)|1⟩⟩ has component U[k, j] at |j⟩|k⟩
    let v = CMat::from_fn(d * d, 1, |idx, _| u[(idx % d, idx / d)]);
    let m = (&v * v.adjoint()).transpose();
    Ok(UnitaryCJ { unitary: u.clone(), cj: Operator::new(layout, m)? })
}

/// Single-qubit unitaries by name: products of `X`, `Y`, `Z`, `P` (phase) and `H`, read left to right.
pub fn named_unitary(name: &str) -> Result<CMat> {
    let h = FRAC_1_SQRT_2;
    let mut u = CMat::identity(2, 2);
    if name == "1" {
        return Ok(u);
    }
    for ch in name.chars() {
        let g = match ch {
            'X' | 'Y' | 'Z' => Pauli::from_symbol(ch)?.matrix(),
            'P' => CMat::from_row_slice(2, 2, &[c(1.0), c(0.0), c(0.0), C64::new(0.0, 1.0)]),
            'H' => CMat::from_row_slice(2, 2, &[c(h), c(h), c(h), c(-h)]),
            _ => return Err(Error::Parameter(format!("unknown gate `{ch}` in `{name}`"))),
        };
        u *= g;
    }
    Ok(u)
}

/// One term `coefficient · M_U` of a Pauli-pair decomposition.
#[derive(Clone, Debug, PartialEq)]
pub struct UnitaryTerm {
    pub coefficient: f64,
    pub name: &'static str,
    pub unitary: CMat,
}

/// `σ_I ⊗ σ_O = Σ coefficient · M_U` for the ten pairs that survive the unitary constraints.
pub fn pauli_pair_to_unitary_mix(input: Pauli, output: Pauli) -> Result<Vec<UnitaryTerm>> {
    use Pauli::*;
    let table: (&[f64; 4], [&'static str; 4]) = match (input, output) {
        (I, I) => (&[0.5, 0.5, 0.5, 0.5], ["1", "X", "Y", "Z"]),
        (X, X) => (&[0.5, 0.5, -0.5, -0.5], ["1", "X", "Y", "Z"]),
        (Y, Y) => (&[-0.5, 0.5, -0.5, 0.5], ["1", "X", "Y", "Z"]),
        (Z, Z) => (&[0.5, -0.5, -0.5, 0.5], ["1", "X", "Y", "Z"]),
        (X, Y) => (&[-0.5, -0.5, 0.5, 0.5], ["P", "PX", "PY", "PZ"]),
        (Y, X) => (&[-0.5, 0.5, -0.5, 0.5], ["P", "PX", "PY", "PZ"]),
        (X, Z) => (&[0.5, 0.5, -0.5, -0.5], ["H", "HX", "HY", "HZ"]),
        (Z, X) => (&[0.5, -0.5, -0.5, 0.5], ["H", "HX", "HY", "HZ"]),
        (Y, Z) => (&[-0.5, 0.5, -0.5, 0.5], ["HP", "HPX", "HPY", "HPZ"]),
        (Z, Y) => (&[-0.5, 0.5, 0.5, -0.5], ["PH", "PHX", "PHY", "PHZ"]),
        _ => return Err(Error::UnsupportedPair(format!("{}{}", input.symbol(), output.symbol()))),
    };
    table
        .0
        .iter()
        .zip(table.1)
        .map(|(&coefficient, name)| Ok(UnitaryTerm { coefficient, name, unitary: named_unitary(name)? }))
        .collect()
}

/// Process or witness held by a catalog entry.
#[derive(Clone, Debug)]
#[allow(clippy::large_enum_variant)]
pub enum CatalogObject {
    Process(ProcessMatrix),
    Witness(Witness),
}

impl CatalogObject {
    pub fn operator(&self) -> &Operator {
        match self {
            CatalogObject::Process(p) => p.op(),
            CatalogObject::Witness(w) => w.op(),
        }
    }
}

#[derive(Clone, Debug)]
pub struct CatalogEntry {
    pub name: String,
    pub params: BTreeMap<String, f64>,
    pub object: CatalogObject,
    pub provenance: &'static str,
}

/// Entry names with their parameters and defaults.
pub const NAMES: &[(&str, &str)] = &[
    ("w-etas", "eta1=0.7071 eta2=0.7071"),
    ("s-etas", "eta1=0.7071 eta2=0.7071"),
    ("switch", "theta=0 phi=0 (target state cos(θ/2)|0⟩ + e^{iφ} sin(θ/2)|1⟩)"),
    ("switch-minus", "theta=0 phi=0"),
    ("white", "parties=3"),
    ("depol", "theta=0 phi=0"),
    ("deph", "theta=0 phi=0"),
    ("s-switch", ""),
    ("s-family", "v=1"),
    ("s-tilde", ""),
];

/// Builds a named entry; unknown parameters are rejected.
pub fn lookup(name: &str, params: &BTreeMap<String, f64>) -> Result<CatalogEntry> {
    let allowed: &[&str] = match name {
        "w-etas" | "s-etas" => &["eta1", "eta2"],
        "switch" | "switch-minus" | "depol" | "deph" => &["theta", "phi"],
        "white" => &["parties"],
        "s-family" => &["v"],
        "s-switch" | "s-tilde" => &[],
        other => return Err(Error::UnknownEntry(other.to_string())),
    };
    if let Some(k) = params.keys().find(|k| !allowed.contains(&k.as_str())) {
        return Err(Error::Parameter(format!("`{name}` takes no parameter `{k}`")));
    }
    let get = |k: &str, default: f64| params.get(k).copied().unwrap_or(default);
    let psi = || qubit_state(get("theta", 0.0), get("phi", 0.0));
    let (object, provenance) = match name {
        "w-etas" => (CatalogObject::Process(w_etas(get("eta1", FRAC_1_SQRT_2), get("eta2", FRAC_1_SQRT_2))), "bipartite family W_{η1,η2}"),
        "s-etas" => (CatalogObject::Witness(s_etas(get("eta1", FRAC_1_SQRT_2), get("eta2", FRAC_1_SQRT_2))), "witnesses S_{η1,η2}"),
        "switch" => (CatalogObject::Process(switch(psi(), true)?), "quantum switch"),
        "switch-minus" => (CatalogObject::Process(switch(psi(), false)?), "quantum switch, control (|0⟩-|1⟩)/√2"),
        "white" => {
            let scenario = match get("parties", 3.0) as i64 {
                2 => Scenario::bipartite(),
                3 => Scenario::tripartite(),
                p => return Err(Error::Parameter(format!("parties must be 2 or 3, got {p}"))),
            };
            (CatalogObject::Process(white(&scenario)), "white noise 1/d_I")
        }
        "depol" => (CatalogObject::Process(depol(psi())?), "switch with depolarised control"),
        "deph" => (CatalogObject::Process(deph(psi())?), "classical switch (dephased control)"),
        "s-switch" => (CatalogObject::Witness(s_switch()), "optimal white-noise switch witness, 4-decimal table"),
        "s-family" => {
            let v = get("v", 1.0);
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::Parameter(format!("v = {v} outside [0, 1]")));
            }
            (CatalogObject::Witness(s_family(v)), "witness family S(v)")
        }
        "s-tilde" => (CatalogObject::Witness(s_tilde()), "unitary-restricted switch witness, 4-decimal table"),
        _ => unreachable!("checked above"),
    };
    Ok(CatalogEntry { name: name.to_string(), params: params.clone(), object, provenance })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spaces::MembershipTolerance;

    #[test]
    fn tables_parse() {
        assert_eq!(switch_table().terms.s.len(), 12);
        assert_eq!(switch_table().terms.t.len(), 13);
        assert_eq!(unitary_table().terms.s.len(), 19);
        assert_eq!(unitary_table().optimal.t.len(), 19);
    }

    #[test]
    fn switch_is_valid_and_symmetric() {
        let w = switch_default();
        assert!((w.op().trace() - 4.0).abs() < 1e-12);
        assert!(w.validate(&MembershipTolerance::default()).unwrap().valid);
        let f = swap_parties(w.op()).unwrap();
        assert!(f.try_sub(w.op()).unwrap().frobenius_norm() < 1e-12);
    }

    #[test]
    fn dephased_matches_explicit_form() {
        // ½(|0⟩⟨0|^{A_I} |1⟩⟩⟨⟨1|^{A_O B_I} 1^{B_O} |0⟩⟨0|^{C_I} + |0⟩⟨0|^{B_I} |1⟩⟩⟨⟨1|^{B_O A_I} 1^{A_O} |1⟩⟨1|^{C_I})
        let mut m = CMat::zeros(32, 32);
        for i in 0..32 {
            for j in 0..32 {
                let b = |x: usize, k: usize| (x >> (4 - k)) & 1;
                let (ai, ao, bi, bo, ci) = (b(i, 0), b(i, 1), b(i, 2), b(i, 3), b(i, 4));
                let (aj, aoj, bj, boj, cj) = (b(j, 0), b(j, 1), b(j, 2), b(j, 3), b(j, 4));
                if ci == 0 && cj == 0 && ai == 0 && aj == 0 && ao == bi && aoj == bj && bo == boj {
                    m[(i, j)] += c(0.5);
                }
                if ci == 1 && cj == 1 && bi == 0 && bj == 0 && bo == ai && boj == aj && ao == aoj {
                    m[(i, j)] += c(0.5);
                }
            }
        }
        let d = deph([c(1.0), c(0.0)]).unwrap();
        assert!((d.op().matrix() - m).iter().map(|z| z.norm()).fold(0.0, f64::max) < 1e-12);
    }

    #[test]
    fn pauli_pairs_reassemble() {
        use Pauli::*;
        for (a, b) in [(I, I), (X, X), (Y, Y), (Z, Z), (X, Y), (Y, X), (X, Z), (Z, X), (Y, Z), (Z, Y)] {
            let target = PauliString::new(vec![a, b]).matrix();
            let mut sum = CMat::zeros(4, 4);
            for t in pauli_pair_to_unitary_mix(a, b).unwrap() {
                sum += cj_of_unitary(&t.unitary, "X").unwrap().cj.matrix() * c(t.coefficient);
            }
            let err = (sum - target).iter().map(|z| z.norm()).fold(0.0, f64::max);
            assert!(err < 1e-12, "{}{}: {err}", a.symbol(), b.symbol());
        }
        assert!(pauli_pair_to_unitary_mix(X, I).is_err());
    }

    #[test]
    fn lookup_rejects_unknown() {
        assert!(matches!(lookup("nope", &BTreeMap::new()), Err(Error::UnknownEntry(_))));
        let mut p = BTreeMap::new();
        p.insert("eta3".to_string(), 1.0);
        assert!(lookup("w-etas", &p).is_err());
    }
}
