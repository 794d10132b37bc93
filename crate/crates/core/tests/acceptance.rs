//! Acceptance criteria, one line each. Run with `cargo test --test acceptance`.

use std::f64::consts::{FRAC_1_SQRT_2, PI};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use causep::born::{sample_outcomes, Compilation, Instrument, SettingTerm, WitnessDecomposition};
use causep::catalog::{self, cj_of_unitary, pauli_pair_to_unitary_mix, qubit_state, sep_decomposition_etas};
use causep::robustness::{check_decomposition, Engine, Restriction, RobustnessReport};
use causep::spaces::{MembershipTolerance, ProcessMatrix, Scenario};
use causep::tensor::{CMat, C64};
use causep::{Layout, Operator, Party, Pauli, PauliString, Result};

/// Longest single SDP allowed.
const SDP_LIMIT: Duration = Duration::from_secs(10);

type Criterion = fn() -> Result<Outcome>;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Result<Outcome> {
    Ok(Outcome { pass, detail })
}

/// Solve timer: remembers the slowest call.
#[derive(Default)]
struct Timer {
    slowest: Duration,
}

impl Timer {
    fn time<T>(&mut self, f: impl FnOnce() -> Result<T>) -> Result<T> {
        let t = Instant::now();
        let out = f();
        self.slowest = self.slowest.max(t.elapsed());
        out
    }

    fn ok(&self) -> bool {
        self.slowest < SDP_LIMIT
    }

    fn note(&self) -> String {
        format!("slowest SDP {:.2}s", self.slowest.as_secs_f64())
    }
}

fn robustness(timer: &mut Timer, w: &ProcessMatrix) -> Result<RobustnessReport> {
    timer.time(|| Engine::default().random_robustness(w, None))
}

fn switch_robustness() -> Result<Outcome> {
    let mut t = Timer::default();
    let r = robustness(&mut t, &catalog::switch_default())?;
    let pass = (r.r_star - 1.576).abs() <= 0.005 && (r.visibility_threshold - 0.3882).abs() <= 0.001 && t.ok();
    outcome(pass, format!("r* = {:.6} (1.576 ± 0.005), threshold {:.6} (0.3882 ± 0.001), {}", r.r_star, r.visibility_threshold, t.note()))
}

fn etas_family() -> Result<Outcome> {
    let mut t = Timer::default();
    let tol = MembershipTolerance::loose(1e-6);
    let signs = [(1.0, 1.0), (1.0, -1.0), (-1.0, 1.0), (-1.0, -1.0)];
    let mut worst_r: f64 = 0.0;
    let mut count_ns = 0;
    // nonseparable grid: 9 angles × 9 radii inside the disk, beyond the square
    for i in 0..9 {
        let theta = PI / 12.0 + (PI / 3.0) * i as f64 / 8.0;
        for j in 0..9 {
            let rho = 0.9 + 0.1 * j as f64 / 8.0;
            let (s1, s2) = signs[(i + j) % 4];
            let (e1, e2) = (s1 * rho * theta.cos(), s2 * rho * theta.sin());
            let r = robustness(&mut t, &catalog::w_etas(e1, e2))?;
            worst_r = worst_r.max((r.r_star - (e1.abs() + e2.abs() - 1.0)).abs());
            count_ns += 1;
        }
    }
    // separable grid: decomposition weights
    let mut worst_w: f64 = 0.0;
    let mut all_verified = true;
    let mut count_s = 0;
    for i in 0..9 {
        for j in 0..9 {
            let (e1, e2) = (-0.45 + 0.1125 * i as f64, -0.45 + 0.1125 * j as f64);
            if e1 == 0.0 && e2 == 0.0 {
                continue;
            }
            let w = catalog::w_etas(e1, e2);
            let r = robustness(&mut t, &w)?;
            worst_r = worst_r.max((r.r_star - (e1.abs() + e2.abs() - 1.0)).abs());
            let target = w.op().try_add(&w.scenario().white_noise().scale(r.r_star))?;
            all_verified &= check_decomposition(w.scenario(), &r.decomposition, &target, &tol)?;
            let expected = sep_decomposition_etas(e1, e2)?;
            for ((order, _), weight) in expected.parts.iter().zip(expected.weights) {
                let got = r.decomposition.iter().find(|(o, _)| o == order).expect("both orders present");
                worst_w = worst_w.max((got.1.trace() / target.trace() - weight).abs());
            }
            count_s += 1;
        }
    }
    let pass = worst_r <= 1e-5 && worst_w <= 1e-5 && all_verified && t.ok();
    outcome(
        pass,
        format!(
            "{count_ns} nonseparable + {count_s} separable points: max |r* - (|η1|+|η2|-1)| = {worst_r:.1e}, max weight error {worst_w:.1e}, decompositions verified: {all_verified}, {}",
            t.note()
        ),
    )
}

fn catalog_processes() -> Result<Vec<(&'static str, ProcessMatrix)>> {
    let psi = qubit_state(0.0, 0.0);
    Ok(vec![
        ("w-etas", catalog::w_etas(FRAC_1_SQRT_2, FRAC_1_SQRT_2)),
        ("w-etas(0.3,-0.4)", catalog::w_etas(0.3, -0.4)),
        ("white-bi", catalog::white(&Scenario::bipartite())),
        ("switch", catalog::switch_default()),
        ("switch-minus", catalog::switch(psi, false)?),
        ("white-tri", catalog::white(&Scenario::tripartite())),
        ("depol", catalog::depol(psi)?),
        ("deph", catalog::deph(psi)?),
    ])
}

fn primal_dual() -> Result<Outcome> {
    let mut t = Timer::default();
    let mut worst: f64 = 0.0;
    let mut names = Vec::new();
    for (name, w) in catalog_processes()? {
        let r = robustness(&mut t, &w)?;
        worst = worst.max((r.r_star + r.witness.value(&w)?).abs());
        names.push(name);
    }
    outcome(worst <= 1e-6 && t.ok(), format!("{} processes, max |r* + tr[S·W]| = {worst:.1e}, {}", names.len(), t.note()))
}

fn unitary_restricted() -> Result<Outcome> {
    let mut t = Timer::default();
    let w = catalog::switch_default();
    let psi = qubit_state(0.0, 0.0);
    let noises = [("white", None), ("depol", Some(catalog::depol(psi)?)), ("deph", Some(catalog::deph(psi)?))];
    let mut pass = true;
    let mut parts = Vec::new();
    for (name, n) in &noises {
        let rep = t.time(|| Engine::default().construct_witness(&w, n.as_ref(), &Restriction::unitary_ab()))?;
        let th = rep.threshold.unwrap_or(f64::NAN);
        if n.is_none() {
            pass &= (rep.value + 0.5058).abs() <= 0.005;
            parts.push(format!("value {:.5} (-0.5058 ± 0.005)", rep.value));
        }
        pass &= (th - 0.6641).abs() <= 0.002;
        parts.push(format!("{name} threshold {th:.5}"));
    }
    outcome(pass && t.ok(), format!("{} (0.6641 ± 0.002), {}", parts.join(", "), t.note()))
}

fn charlie_x() -> Result<Outcome> {
    let mut t = Timer::default();
    let rep = t.time(|| Engine::default().construct_witness(&catalog::switch_default(), None, &Restriction::charlie_x()))?;
    let th = rep.threshold.unwrap_or(f64::NAN);
    outcome((th - 0.7381).abs() <= 0.005 && t.ok(), format!("threshold {th:.5} (0.7381 ± 0.005), {}", t.note()))
}

fn s_family_identities() -> Result<Outcome> {
    let psi = qubit_state(0.0, 0.0);
    let (sw, dp, dh) = (catalog::switch_default(), catalog::depol(psi)?, catalog::deph(psi)?);
    let mut worst: f64 = 0.0;
    for v in [0.03, 0.2, 0.4, 0.6, 0.8, 1.0] {
        let s = catalog::s_family(v);
        worst = worst.max((s.value(&sw.mix(&dp, v)?)? + (3.0 - v) * v * v / 2.0).abs());
        worst = worst.max((s.value(&sw.mix(&dh, v)?)? + v * v).abs());
    }
    worst = worst.max((catalog::s_family(1.0).value(&sw)? + 1.0).abs());
    outcome(worst <= 1e-12, format!("max deviation {worst:.1e} over 6 visibilities"))
}

fn tabulated_witnesses() -> Result<Outcome> {
    let w = catalog::switch_default();
    let eng = Engine::default();
    let (s, st) = (catalog::s_switch(), catalog::s_tilde());
    let (vs, vt) = (s.value(&w)?, st.value(&w)?);
    let (cs, ct) = (eng.verify_witness(&s, 5e-3)?, eng.verify_witness(&st, 5e-3)?);
    let pass = (vs + 1.576).abs() <= 0.01 && (vt + 0.5058).abs() <= 0.01 && cs.valid && ct.valid;
    outcome(
        pass,
        format!(
            "tr[S_switch·W] = {vs:.4} (-1.576), tr[S̃·W] = {vt:.4} (-0.5058), certificates valid {} / {} (worst residual {:.1e} / {:.1e})",
            cs.valid, ct.valid, cs.worst_residual, ct.worst_residual
        ),
    )
}

fn random_hermitian(rng: &mut ChaCha8Rng, d: usize) -> CMat {
    let g = CMat::from_fn(d, d, |_, _| C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)));
    (&g + g.adjoint()).scale(0.5)
}

fn random_unitary(rng: &mut ChaCha8Rng, d: usize) -> CMat {
    let g = CMat::from_fn(d, d, |_, _| C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)));
    let qr = g.qr();
    let r = qr.r();
    let phases = DMatrix::from_fn(d, d, |i, j| if i == j { r[(i, i)] / r[(i, i)].norm() } else { C64::new(0.0, 0.0) });
    qr.q() * phases
}

fn max_entry(op: &Operator) -> f64 {
    op.matrix().iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Random two-outcome measure-and-prepare instrument or a single-outcome unitary.
fn random_instrument(rng: &mut ChaCha8Rng, party: Party) -> Result<Instrument> {
    let bloch = |rng: &mut ChaCha8Rng| {
        let v: [f64; 3] = [rng.sample(StandardNormal), rng.sample(StandardNormal), rng.sample(StandardNormal)];
        let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        v.map(|x| x / n)
    };
    let qubit = |n: [f64; 3], sign: f64, r: f64| {
        let mut m = Pauli::I.matrix();
        for (p, x) in [Pauli::X, Pauli::Y, Pauli::Z].iter().zip(n) {
            m += p.matrix().scale(sign * r * x);
        }
        m.scale(0.5)
    };
    if party == Party::C {
        let n = bloch(rng);
        let layout = Layout::qubits(&["C_I"])?;
        let el = [1.0, -1.0].iter().map(|&s| Operator::new(layout.clone(), qubit(n, s, 1.0))).collect::<Result<_>>()?;
        return Instrument::new(party, "povm", el);
    }
    let layout = causep::born::party_layout(party)?;
    if rng.gen_bool(0.3) {
        let u = random_unitary(rng, 2);
        return Instrument::unitary(party, "random", &u);
    }
    let n = bloch(rng);
    let el = [1.0, -1.0]
        .iter()
        .map(|&s| {
            let prep = qubit(bloch(rng), 1.0, rng.gen_range(0.0..1.0));
            Operator::new(layout.clone(), qubit(n, s, 1.0).kronecker(&prep))
        })
        .collect::<Result<_>>()?;
    Instrument::new(party, "measure-prepare", el)
}

fn random_valid_process(rng: &mut ChaCha8Rng, k: usize) -> Result<ProcessMatrix> {
    if k.is_multiple_of(2) {
        let (rho, th) = (rng.gen_range(0.0..1.0f64).sqrt(), rng.gen_range(0.0..2.0 * PI));
        return Ok(catalog::w_etas(rho * th.cos(), rho * th.sin()));
    }
    let psi = qubit_state(rng.gen_range(0.0..PI), rng.gen_range(0.0..2.0 * PI));
    let parts = [catalog::switch(psi, true)?, catalog::switch(psi, false)?, catalog::depol(psi)?, catalog::deph(psi)?, catalog::white(&Scenario::tripartite())];
    let mut w: Vec<f64> = (0..parts.len()).map(|_| rng.gen_range(0.0..1.0)).collect();
    let total: f64 = w.iter().sum();
    w.iter_mut().for_each(|x| *x /= total);
    let mut op = parts[0].op().scale(w[0]);
    for (p, x) in parts.iter().zip(&w).skip(1) {
        op = op.try_add(&p.op().scale(*x))?;
    }
    ProcessMatrix::from_operator(op)
}

fn property_suites() -> Result<Outcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(2016);
    let mut failures = Vec::new();

    // projectors
    let mut worst: f64 = 0.0;
    for scenario in [Scenario::bipartite(), Scenario::tripartite()] {
        let (o1, o2) = scenario.orders();
        let projs = [scenario.valid_projector(), scenario.order_projector(o1)?, scenario.order_projector(o2)?];
        let d = scenario.layout().dim();
        for _ in 0..500 {
            let x = Operator::new(scenario.layout().clone(), random_hermitian(&mut rng, d))?;
            let y = Operator::new(scenario.layout().clone(), random_hermitian(&mut rng, d))?;
            let scale = x.frobenius_norm() * y.frobenius_norm();
            for p in &projs {
                let px = p.apply(&x)?;
                worst = worst.max(p.apply(&px)?.try_sub(&px)?.frobenius_norm() / x.frobenius_norm());
                worst = worst.max((px.hs_inner(&y)? - x.hs_inner(&p.apply(&y)?)?).abs() / scale);
                worst = worst.max((-x.hs_inner(&px)? / x.frobenius_norm().powi(2)).max(0.0));
            }
        }
    }
    if worst > 1e-12 {
        failures.push(format!("projectors {worst:.1e}"));
    }
    let proj = worst;

    // unitary CJ marginals
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let cj = cj_of_unitary(&random_unitary(&mut rng, 2), "A")?.cj;
        let id = Operator::identity(&Layout::qubits(&["A_I"])?);
        worst = worst.max(max_entry(&cj.partial_trace(&["A_O"])?.try_sub(&id)?));
        let id = Operator::identity(&Layout::qubits(&["A_O"])?);
        worst = worst.max(max_entry(&cj.partial_trace(&["A_I"])?.try_sub(&id)?));
    }
    if worst > 1e-12 {
        failures.push(format!("CJ marginals {worst:.1e}"));
    }
    let cj = worst;

    // Pauli pairs
    use Pauli::*;
    let mut worst: f64 = 0.0;
    let layout = Layout::qubits(&["A_I", "A_O"])?;
    for (a, b) in [(I, I), (X, X), (Y, Y), (Z, Z), (X, Y), (Y, X), (X, Z), (Z, X), (Y, Z), (Z, Y)] {
        let mut sum = Operator::zero(&layout);
        for t in pauli_pair_to_unitary_mix(a, b)? {
            let m = cj_of_unitary(&t.unitary, "A")?.cj;
            sum = sum.try_add(&Operator::new(layout.clone(), m.into_matrix())?.scale(t.coefficient))?;
        }
        worst = worst.max(max_entry(&sum.try_sub(&PauliString::new(vec![a, b]).to_operator(&layout)?)?));
    }
    if worst > 1e-12 {
        failures.push(format!("Pauli pairs {worst:.1e}"));
    }
    let pairs = worst;

    // Born probabilities
    let mut worst: f64 = 0.0;
    for k in 0..100 {
        let w = random_valid_process(&mut rng, k)?;
        let parties: &[Party] = if w.scenario().is_tripartite() { &[Party::A, Party::B, Party::C] } else { &[Party::A, Party::B] };
        let instruments = parties.iter().map(|&p| random_instrument(&mut rng, p)).collect::<Result<Vec<_>>>()?;
        let probs = SettingTerm { instruments, weights: vec![] }.probabilities(&w)?;
        let total: f64 = probs.iter().map(|(_, p)| p).sum();
        worst = worst.max((total - 1.0).abs());
        for (_, p) in probs {
            worst = worst.max((-p).max(p - 1.0).max(0.0));
        }
    }
    if worst > 1e-10 {
        failures.push(format!("Born probabilities {worst:.1e}"));
    }
    let born = worst;

    // target-state independence
    let mut t = Timer::default();
    let states = [qubit_state(0.0, 0.0), qubit_state(PI, 0.0), qubit_state(PI / 2.0, 0.0)];
    let r: Vec<f64> = states.iter().map(|&psi| Ok(robustness(&mut t, &catalog::switch(psi, true)?)?.r_star)).collect::<Result<_>>()?;
    let spread = r.iter().cloned().fold(f64::MIN, f64::max) - r.iter().cloned().fold(f64::MAX, f64::min);
    if spread > 1e-5 || !t.ok() {
        failures.push(format!("state dependence {spread:.1e}"));
    }
    outcome(
        failures.is_empty(),
        format!(
            "projectors {proj:.1e} (1000 ops), CJ marginals {cj:.1e}, Pauli pairs {pairs:.1e}, Born {born:.1e}, switch r* spread over states {spread:.1e}{}",
            if failures.is_empty() { String::new() } else { format!("; failed: {}", failures.join(", ")) }
        ),
    )
}

fn visibility_families() -> Result<Outcome> {
    let mut t = Timer::default();
    let psi = qubit_state(0.0, 0.0);
    let sw = catalog::switch_default();
    let mut min_pos = f64::INFINITY;
    let mut zero: f64 = 0.0;
    for noise in [catalog::depol(psi)?, catalog::deph(psi)?] {
        for k in 0..=10 {
            let v = k as f64 / 10.0;
            let r = t.time(|| Engine::default().robustness_at_visibility(&sw, &noise, v))?.r_star;
            if k == 0 {
                zero = zero.max(r.abs());
            } else {
                min_pos = min_pos.min(r);
            }
        }
    }
    outcome(
        min_pos > 1e-4 && zero <= 1e-6 && t.ok(),
        format!("min r* over v = 0.1..1 is {min_pos:.3e} (> 1e-4), |r*| at v = 0 is {zero:.1e} (≤ 1e-6), {}", t.note()),
    )
}

fn monte_carlo() -> Result<Outcome> {
    let w = catalog::switch_default();
    let d = WitnessDecomposition::compile(&catalog::s_switch(), Compilation::Stock)?;
    let a = sample_outcomes(&d, &w, 1_000_000, 20160101)?;
    let b = sample_outcomes(&d, &w, 1_000_000, 20160101)?;
    let z = (a.estimate + 1.576).abs() / a.stderr;
    outcome(
        z <= 4.0 && a == b,
        format!("estimate {:.4} ± {:.4} ({z:.2} stderr from -1.576, {} settings), reproducible: {}", a.estimate, a.stderr, d.n_settings(), a == b),
    )
}

fn main() -> ExitCode {
    let criteria: [(&str, Criterion); 10] = [
        ("switch random robustness and threshold", switch_robustness),
        ("W_{η1,η2} robustness and decompositions", etas_family),
        ("primal-dual identity on the catalog", primal_dual),
        ("unitary-restricted witness", unitary_restricted),
        ("Charlie measuring X only", charlie_x),
        ("S(v) identities", s_family_identities),
        ("tabulated witnesses", tabulated_witnesses),
        ("property suites", property_suites),
        ("robustness along noisy switch families", visibility_families),
        ("Monte-Carlo witness estimate", monte_carlo),
    ];
    let start = Instant::now();
    let mut failed = 0;
    for (k, (name, run)) in criteria.iter().enumerate() {
        let t = Instant::now();
        let (pass, detail) = match run() {
            Ok(o) => (o.pass, o.detail),
            Err(e) => (false, format!("error: {e}")),
        };
        failed += usize::from(!pass);
        println!("criterion {:>2} {}: {name}: {detail} [{:.1}s]", k + 1, if pass { "PASS" } else { "FAIL" }, t.elapsed().as_secs_f64());
    }
    println!("{} of 10 criteria passed in {:.1}s", 10 - failed, start.elapsed().as_secs_f64());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
