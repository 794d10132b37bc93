//! Instruments, the generalised Born rule and measurement of witnesses.
//!
//! A witness is measured by splitting it into settings: for each setting every
//! party applies one instrument, and the witness value is a weighted sum of the
//! outcome probabilities.

use std::collections::BTreeMap;

use rand::distributions::{Distribution, WeightedIndex};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::catalog::{cj_of_unitary, pauli_pair_to_unitary_mix};
use crate::robustness::Witness;
use crate::spaces::ProcessMatrix;
use crate::tensor::{Layout, Operator, Pauli, PauliString};
use crate::{Error, Party, Result};

/// Subsystems of a party: `X_I X_O` for Alice and Bob, `C_I` for Charlie.
pub fn party_layout(party: Party) -> Result<Layout> {
    match party {
        Party::A => Layout::qubits(&["A_I", "A_O"]),
        Party::B => Layout::qubits(&["B_I", "B_O"]),
        Party::C => Layout::qubits(&["C_I"]),
        Party::T => Err(Error::Instrument("the target system has no instrument".into())),
    }
}

fn pauli_op(layout: &Layout, ops: &[Pauli], scale: f64) -> Operator {
    PauliString::new(ops.to_vec()).to_operator(layout).expect("matching length").scale(scale)
}

/// `(1 + sign·p)/2` on one qubit, or `1` when `p` is the identity.
fn half_projector(p: Pauli, sign: f64) -> [(Pauli, f64); 2] {
    if p == Pauli::I {
        [(Pauli::I, 1.0), (Pauli::I, 0.0)]
    } else {
        [(Pauli::I, 0.5), (p, 0.5 * sign)]
    }
}

/// CJ matrices of a quantum instrument (or POVM elements for Charlie), indexed by outcome.
#[derive(Clone, Debug, PartialEq)]
pub struct Instrument {
    pub party: Party,
    pub setting: String,
    pub elements: Vec<Operator>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct InstrumentReport {
    pub min_eigenvalue: f64,
    /// Largest entry of `tr_{X_O} Σ M - 1^{X_I}` (or `Σ M - 1` for Charlie).
    pub normalization_residual: f64,
    pub valid: bool,
}

impl Instrument {
    pub fn new(party: Party, setting: impl Into<String>, elements: Vec<Operator>) -> Result<Self> {
        let layout = party_layout(party)?;
        if elements.is_empty() {
            return Err(Error::Instrument("instrument without outcomes".into()));
        }
        if let Some(e) = elements.iter().find(|e| e.layout() != &layout) {
            return Err(Error::Instrument(format!("element on {} for party {party} (expected {layout})", e.layout())));
        }
        Ok(Instrument { party, setting: setting.into(), elements })
    }

    pub fn layout(&self) -> Layout {
        party_layout(self.party).expect("checked at construction")
    }

    pub fn validate(&self, tol: f64) -> InstrumentReport {
        let min_eigenvalue = self.elements.iter().map(|e| e.min_eigenvalue()).fold(f64::INFINITY, f64::min);
        let mut sum = self.elements[0].clone();
        for e in &self.elements[1..] {
            sum = sum.try_add(e).expect("same layout");
        }
        let reduced = match self.party {
            Party::C => sum,
            p => sum.partial_trace(&[&format!("{p}_O")]).expect("party layout"),
        };
        let id = Operator::identity(reduced.layout());
        let normalization_residual =
            reduced.try_sub(&id).expect("same layout").matrix().iter().map(|z| z.norm()).fold(0.0, f64::max);
        InstrumentReport {
            min_eigenvalue,
            normalization_residual,
            valid: min_eigenvalue >= -tol && normalization_residual <= tol,
        }
    }

    /// Measure `input` (outcomes `±`, or one outcome if trivial), then prepare `(1 + τ·output)/2`
    /// (or `1/2` if `output` is trivial).
    pub fn measure_prepare(party: Party, input: Pauli, output: Pauli, tau: f64) -> Result<Self> {
        if party == Party::C {
            return Err(Error::Instrument("Charlie has no output".into()));
        }
        let layout = party_layout(party)?;
        let prep = if output == Pauli::I { [(Pauli::I, 0.5), (Pauli::I, 0.0)] } else { [(Pauli::I, 0.5), (output, 0.5 * tau)] };
        let signs: &[f64] = if input == Pauli::I { &[1.0] } else { &[1.0, -1.0] };
        let elements = signs
            .iter()
            .map(|&a| {
                let mut m = Operator::zero(&layout);
                for (pi, ci) in half_projector(input, a) {
                    for (po, co) in prep {
                        if ci * co != 0.0 {
                            m = m.try_add(&pauli_op(&layout, &[pi, po], ci * co)).expect("same layout");
                        }
                    }
                }
                m
            })
            .collect();
        let tau_label = if output == Pauli::I { String::new() } else { format!(",{}{}", if tau > 0.0 { "+" } else { "-" }, output.symbol()) };
        Instrument::new(party, format!("{}{}{tau_label}", input.symbol(), output.symbol()), elements)
    }

    /// Discard the input and prepare `(1 ± output)/2` at random, recording the sign.
    pub fn recorded_preparation(party: Party, output: Pauli) -> Result<Self> {
        let layout = party_layout(party)?;
        if output == Pauli::I || party == Party::C {
            return Err(Error::Instrument("recorded preparation needs a Pauli output on Alice or Bob".into()));
        }
        let elements = [1.0, -1.0]
            .iter()
            .map(|&s| pauli_op(&layout, &[Pauli::I, Pauli::I], 0.25).try_add(&pauli_op(&layout, &[Pauli::I, output], 0.25 * s)).unwrap())
            .collect();
        Instrument::new(party, format!("1{}", output.symbol()), elements)
    }

    /// Charlie's two-outcome measurement of `p` (single outcome `1` if trivial).
    pub fn charlie(p: Pauli) -> Self {
        let layout = party_layout(Party::C).expect("static");
        let elements = if p == Pauli::I {
            vec![Operator::identity(&layout)]
        } else {
            [1.0, -1.0].iter().map(|&s| pauli_op(&layout, &[Pauli::I], 0.5).try_add(&pauli_op(&layout, &[p], 0.5 * s)).unwrap()).collect()
        };
        Instrument::new(Party::C, p.symbol().to_string(), elements).expect("static layout")
    }

    /// The single-outcome instrument `{M_U}`.
    pub fn unitary(party: Party, name: &str, u: &nalgebra::DMatrix<crate::tensor::C64>) -> Result<Self> {
        let layout = party_layout(party)?;
        let cj = cj_of_unitary(u, &party.to_string())?.cj;
        let cj = Operator::new(layout, cj.into_matrix())?;
        Instrument::new(party, format!("U={name}"), vec![cj])
    }
}

/// `P = tr[(M_1 ⊗ … ⊗ M_n)·W]` with one CJ matrix per party in party order.
pub fn born_probability(maps: &[&Operator], w: &ProcessMatrix) -> Result<f64> {
    let Some((first, rest)) = maps.split_first() else {
        return Err(Error::Instrument("no maps given".into()));
    };
    let mut m = (*first).clone();
    for x in rest {
        m = m.kron(x)?;
    }
    let m = if m.layout() == w.op().layout() { m } else { m.permute_to(w.op().layout())? };
    m.hs_inner(w.op())
}

/// One choice of instruments with weights on outcome tuples.
#[derive(Clone, Debug, PartialEq)]
pub struct SettingTerm {
    pub instruments: Vec<Instrument>,
    /// (outcome index per party, weight)
    pub weights: Vec<(Vec<usize>, f64)>,
}

impl SettingTerm {
    fn outcome_tuples(&self) -> Vec<Vec<usize>> {
        let mut out = vec![vec![]];
        for ins in &self.instruments {
            out = out.into_iter().flat_map(|t| (0..ins.elements.len()).map(move |o| [t.clone(), vec![o]].concat())).collect();
        }
        out
    }

    fn product(&self, outcome: &[usize]) -> Result<Operator> {
        let mut m = self.instruments[0].elements[outcome[0]].clone();
        for (ins, &o) in self.instruments.iter().zip(outcome).skip(1) {
            m = m.kron(&ins.elements[o])?;
        }
        Ok(m)
    }

    /// Probabilities of all outcome tuples (in `outcome_tuples` order).
    pub fn probabilities(&self, w: &ProcessMatrix) -> Result<Probabilities> {
        self.outcome_tuples()
            .into_iter()
            .map(|t| {
                let p = self.product(&t)?.hs_inner(w.op())?;
                Ok((t, p))
            })
            .collect()
    }

    fn weight_of(&self, outcome: &[usize]) -> f64 {
        self.weights.iter().filter(|(o, _)| o == outcome).map(|(_, w)| w).sum()
    }
}

/// How Pauli factors are turned into instruments.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Compilation {
    /// Measure-and-prepare instruments in Pauli bases.
    Stock,
    /// Unitaries for Alice and Bob (only pairs allowed by the unitary constraints).
    Unitary,
}

/// `S = Σ_settings Σ_outcomes weight · ⊗ M`.
#[derive(Clone, Debug)]
pub struct WitnessDecomposition {
    pub target: Witness,
    pub terms: Vec<SettingTerm>,
}

fn parties_of(layout: &Layout) -> Result<Vec<Party>> {
    if layout == &Layout::bipartite() {
        Ok(vec![Party::A, Party::B])
    } else if layout == &Layout::tripartite() {
        Ok(vec![Party::A, Party::B, Party::C])
    } else {
        Err(Error::Instrument(format!("no instrument model for layout {layout}")))
    }
}

type OutcomeWeights = BTreeMap<Vec<usize>, f64>;
type Probabilities = Vec<(Vec<usize>, f64)>;

/// Per-party options for one Pauli factor: (instrument key, instrument, weight per outcome).
type Factor = Vec<(String, Instrument, Vec<f64>)>;

fn stock_factor(party: Party, ops: &[Pauli]) -> Result<Factor> {
    if party == Party::C {
        let ins = Instrument::charlie(ops[0]);
        let w = if ops[0] == Pauli::I { vec![1.0] } else { vec![1.0, -1.0] };
        return Ok(vec![(format!("C:{}", ops[0].symbol()), ins, w)]);
    }
    let (pi, po) = (ops[0], ops[1]);
    let c = if po == Pauli::I { 2.0 } else { 1.0 };
    let a: Vec<f64> = if pi == Pauli::I { vec![1.0] } else { vec![1.0, -1.0] };
    let taus: &[f64] = if po == Pauli::I { &[1.0] } else { &[1.0, -1.0] };
    taus.iter()
        .map(|&tau| {
            let ins = Instrument::measure_prepare(party, pi, po, tau)?;
            let t = if po == Pauli::I { 1.0 } else { tau };
            Ok((format!("{party}:{}", ins.setting), ins, a.iter().map(|x| c * t * x).collect()))
        })
        .collect()
}

fn unitary_factor(party: Party, ops: &[Pauli]) -> Result<Factor> {
    if party == Party::C {
        return stock_factor(party, ops);
    }
    pauli_pair_to_unitary_mix(ops[0], ops[1])?
        .into_iter()
        .map(|t| {
            let ins = Instrument::unitary(party, t.name, &t.unitary)?;
            Ok((format!("{party}:U{}", t.name), ins, vec![t.coefficient]))
        })
        .collect()
}

impl WitnessDecomposition {
    /// Splits each Pauli term of the witness over product instruments and merges equal settings.
    pub fn compile(witness: &Witness, how: Compilation) -> Result<Self> {
        let layout = witness.op().layout().clone();
        let parties = parties_of(&layout)?;
        let expansion = witness.op().to_pauli()?;
        let scale = expansion.terms().values().map(|c| c.abs()).fold(0.0, f64::max);
        let mut settings: BTreeMap<Vec<String>, (Vec<Instrument>, OutcomeWeights)> = BTreeMap::new();
        for (s, &coef) in expansion.terms() {
            if coef.abs() <= 1e-14 * scale {
                continue;
            }
            let ops = s.ops();
            let mut factors = Vec::new();
            let mut start = 0;
            for &p in &parties {
                let width = if p == Party::C { 1 } else { 2 };
                let f = match how {
                    Compilation::Stock => stock_factor(p, &ops[start..start + width])?,
                    Compilation::Unitary => unitary_factor(p, &ops[start..start + width])?,
                };
                factors.push(f);
                start += width;
            }
            // every combination of per-party options is one setting
            let mut combos: Vec<Vec<usize>> = vec![vec![]];
            for f in &factors {
                combos = combos.into_iter().flat_map(|c| (0..f.len()).map(move |k| [c.clone(), vec![k]].concat())).collect();
            }
            for combo in combos {
                let key: Vec<String> = combo.iter().zip(&factors).map(|(&k, f)| f[k].0.clone()).collect();
                let entry = settings
                    .entry(key)
                    .or_insert_with(|| (combo.iter().zip(&factors).map(|(&k, f)| f[k].1.clone()).collect(), BTreeMap::new()));
                let mut outcomes: Vec<(Vec<usize>, f64)> = vec![(vec![], coef)];
                for (&k, f) in combo.iter().zip(&factors) {
                    let w = &f[k].2;
                    outcomes = outcomes
                        .into_iter()
                        .flat_map(|(o, x)| w.iter().enumerate().map(move |(i, wi)| ([o.clone(), vec![i]].concat(), x * wi)))
                        .collect();
                }
                for (o, x) in outcomes {
                    *entry.1.entry(o).or_insert(0.0) += x;
                }
            }
        }
        let terms = settings
            .into_values()
            .map(|(instruments, weights)| SettingTerm { instruments, weights: weights.into_iter().filter(|(_, w)| *w != 0.0).collect() })
            .collect();
        Ok(WitnessDecomposition { target: witness.clone(), terms })
    }

    /// `Σ weight · ⊗ M`.
    pub fn reassemble(&self) -> Result<Operator> {
        let mut out = Operator::zero(self.target.op().layout());
        for t in &self.terms {
            for (o, w) in &t.weights {
                out = out.try_add(&t.product(o)?.scale(*w))?;
            }
        }
        Ok(out)
    }

    /// Largest entry of `reassemble() - S`.
    pub fn residual(&self) -> Result<f64> {
        Ok(self.reassemble()?.try_sub(self.target.op())?.matrix().iter().map(|z| z.norm()).fold(0.0, f64::max))
    }

    pub fn n_settings(&self) -> usize {
        self.terms.len()
    }
}

/// `Σ_settings Σ_outcomes weight · P(outcomes)`.
pub fn measure_witness(d: &WitnessDecomposition, w: &ProcessMatrix) -> Result<f64> {
    let mut total = 0.0;
    for t in &d.terms {
        for (o, p) in t.probabilities(w)? {
            total += t.weight_of(&o) * p;
        }
    }
    Ok(total)
}

/// Monte-Carlo estimate of a witness value.
#[derive(Clone, Debug, PartialEq)]
pub struct SampleReport {
    pub seed: u64,
    pub shots: u64,
    /// Per setting: counts per outcome tuple (in enumeration order).
    pub counts: Vec<Vec<u64>>,
    pub estimate: f64,
    pub stderr: f64,
    /// Exact value from the Born rule.
    pub exact: f64,
}

impl SampleReport {
    pub fn to_json(&self) -> Value {
        json!({
            "seed": self.seed,
            "shots": self.shots,
            "settings": self.counts.len(),
            "estimate": self.estimate,
            "stderr": self.stderr,
            "exact": self.exact,
            "counts": self.counts,
        })
    }
}

/// Splits `shots` evenly over the settings (remainder to the first ones) and samples
/// each setting with its own stream of a seeded generator.
pub fn sample_outcomes(d: &WitnessDecomposition, w: &ProcessMatrix, shots: u64, seed: u64) -> Result<SampleReport> {
    let n = d.terms.len() as u64;
    if n == 0 || shots < n {
        return Err(Error::Parameter(format!("{shots} shots for {n} settings")));
    }
    let per_setting: Vec<(Probabilities, Vec<f64>)> = d
        .terms
        .iter()
        .map(|t| {
            let probs = t.probabilities(w)?;
            let weights = probs.iter().map(|(o, _)| t.weight_of(o)).collect();
            Ok((probs, weights))
        })
        .collect::<Result<_>>()?;
    let exact: f64 = per_setting.iter().map(|(p, wt)| p.iter().zip(wt).map(|((_, p), w)| p * w).sum::<f64>()).sum();
    let results: Vec<Result<(Vec<u64>, f64, f64)>> = per_setting
        .par_iter()
        .enumerate()
        .map(|(k, (probs, weights))| {
            let m = shots / n + u64::from((k as u64) < shots % n);
            let p: Vec<f64> = probs.iter().map(|(_, p)| p.max(0.0)).collect();
            let dist = WeightedIndex::new(&p).map_err(|e| Error::Parameter(format!("setting {k}: {e}")))?;
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(k as u64);
            let mut counts = vec![0u64; p.len()];
            for _ in 0..m {
                counts[dist.sample(&mut rng)] += 1;
            }
            let mean: f64 = counts.iter().zip(weights).map(|(&c, w)| c as f64 * w).sum::<f64>() / m as f64;
            let second: f64 = counts.iter().zip(weights).map(|(&c, w)| c as f64 * w * w).sum::<f64>() / m as f64;
            Ok((counts, mean, (second - mean * mean).max(0.0) / m as f64))
        })
        .collect();
    let mut counts = Vec::new();
    let mut estimate = 0.0;
    let mut var = 0.0;
    for r in results {
        let (c, mean, v) = r?;
        counts.push(c);
        estimate += mean;
        var += v;
    }
    Ok(SampleReport { seed, shots, counts, estimate, stderr: var.sqrt(), exact })
}

/// The decomposition of `S_{η1,η2}` over `M_{±|1Z}`, `M_{±|Z1}` and `M_{±|X,τZ}`.
pub fn s_etas_decomposition(eta1: f64, eta2: f64) -> Result<WitnessDecomposition> {
    let target = crate::catalog::s_etas(eta1, eta2);
    let sg = |x: f64| if x > 0.0 { 1.0 } else if x < 0.0 { -1.0 } else { 0.0 };
    let trivial = |p| Instrument::measure_prepare(p, Pauli::I, Pauli::I, 1.0);
    let pm = [1.0, -1.0];
    let mut terms = vec![SettingTerm { instruments: vec![trivial(Party::A)?, trivial(Party::B)?], weights: vec![(vec![0, 0], 1.0)] }];
    let mut w1 = Vec::new();
    for (i, a) in pm.iter().enumerate() {
        for (j, b) in pm.iter().enumerate() {
            w1.push((vec![i, j], -sg(eta1) * a * b));
        }
    }
    terms.push(SettingTerm {
        instruments: vec![Instrument::recorded_preparation(Party::A, Pauli::Z)?, Instrument::measure_prepare(Party::B, Pauli::Z, Pauli::I, 1.0)?],
        weights: w1,
    });
    for tau in pm {
        let mut w = Vec::new();
        for (i, a) in pm.iter().enumerate() {
            for (j, b) in pm.iter().enumerate() {
                w.push((vec![i, j], -sg(eta2) * 0.5 * tau * a * b));
            }
        }
        terms.push(SettingTerm {
            instruments: vec![
                Instrument::measure_prepare(Party::A, Pauli::Z, Pauli::I, 1.0)?,
                Instrument::measure_prepare(Party::B, Pauli::X, Pauli::Z, tau)?,
            ],
            weights: w,
        });
    }
    Ok(WitnessDecomposition { target, terms })
}
