//! Assembly of the Schur complement `M_ij = Σ_b Re tr(A_{b,i} V_b A_{b,j} V_b)`.
//!
//! Blocks whose side is a power of two go through the Pauli basis: with
//! `𝒱[α, β] = Re tr(α V β V)` on the strings `U` used by the block,
//! `M = Aᵀ 𝒱 A` where `A` holds Pauli coefficients. `V β V` costs one small
//! GEMM per string and all its Pauli coefficients come from one fast transform.
//! Other blocks use sparse-dense products directly.

use faer::linalg::matmul::matmul;
use faer::{Accum, Mat, Par};

use super::{PsdBlock, SparseHermitian};
use crate::tensor::{CMat, C64};

/// Strings per batched multiplication.
const CHUNK: usize = 128;

pub(crate) fn to_faer(m: &CMat) -> Mat<C64> {
    Mat::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)])
}

fn qubits_of(side: usize) -> Option<usize> {
    (side.is_power_of_two() && side >= 2).then(|| side.trailing_zeros() as usize)
}

/// Pauli index (I, X, Y, Z) → (flip bit, phase bit).
fn fz(p: usize) -> (usize, usize) {
    match p {
        0 => (0, 0),
        1 => (1, 0),
        2 => (1, 1),
        _ => (0, 1),
    }
}

/// Flip mask, phase mask and number of `Y` factors of a base-4 string index.
fn masks(q: usize, index: usize) -> (usize, usize, u32) {
    let (mut f, mut z, mut ny) = (0, 0, 0);
    for t in 0..q {
        let p = (index >> (2 * (q - 1 - t))) & 3;
        let (ft, zt) = fz(p);
        f |= ft << (q - 1 - t);
        z |= zt << (q - 1 - t);
        ny += (p == 2) as u32;
    }
    (f, z, ny)
}

fn i_pow(k: u32) -> C64 {
    match k % 4 {
        0 => C64::new(1.0, 0.0),
        1 => C64::new(0.0, 1.0),
        2 => C64::new(-1.0, 0.0),
        _ => C64::new(0.0, -1.0),
    }
}

/// Lookup from `(f, z)` to the base-4 string index.
fn string_table(q: usize) -> Vec<usize> {
    let n = 1usize << q;
    let mut table = vec![0; n * n];
    for idx in 0..n * n {
        let (f, z, _) = masks(q, idx);
        table[f * n + z] = idx;
    }
    table
}

/// `Re tr(σ m)` for every Pauli string σ, indexed by string index.
pub(crate) fn pauli_traces(m: &CMat) -> Vec<f64> {
    let n = m.nrows();
    let q = qubits_of(n).expect("power-of-two side");
    let table = string_table(q);
    let mut out = vec![0.0; n * n];
    let mut g = vec![C64::new(0.0, 0.0); n];
    for f in 0..n {
        for (l, gl) in g.iter_mut().enumerate() {
            *gl = m[(l, l ^ f)];
        }
        walsh_hadamard(&mut g);
        for (z, gz) in g.iter().enumerate() {
            let ny = (f & z).count_ones();
            out[table[f * n + z]] = (i_pow(ny) * gz).re;
        }
    }
    out
}

fn walsh_hadamard(v: &mut [C64]) {
    let n = v.len();
    let mut h = 1;
    while h < n {
        for start in (0..n).step_by(2 * h) {
            for k in start..start + h {
                let (a, b) = (v[k], v[k + h]);
                v[k] = a + b;
                v[k + h] = a - b;
            }
        }
        h *= 2;
    }
}

/// `(σ · m)` for the string with the given masks: rows of `m` permuted and phased.
fn left_multiply(q: usize, index: usize, m: &CMat, out: &mut Mat<C64>, col0: usize) {
    let n = m.nrows();
    let (f, z, ny) = masks(q, index);
    let phase = i_pow(ny);
    for k in 0..n {
        let l = k ^ f;
        let sign = if (z & l).count_ones() % 2 == 1 { -phase } else { phase };
        for j in 0..n {
            out[(k, col0 + j)] = sign * m[(l, j)];
        }
    }
}

/// Pauli-basis data of one block, fixed for the whole solve.
pub(crate) struct PauliBlock {
    q: usize,
    /// Strings used by any coefficient.
    strings: Vec<usize>,
    /// Per variable (in block order): (position in `strings`, coefficient) with `A_i = Σ a σ`.
    columns: Vec<(usize, Vec<(usize, f64)>)>,
}

impl PauliBlock {
    pub(crate) fn new(block: &PsdBlock) -> Option<Self> {
        let q = qubits_of(block.side())?;
        let n = block.side();
        let d = n as f64;
        let mut raw: Vec<(usize, Vec<(usize, f64)>)> = Vec::new();
        for (&var, a) in block.terms() {
            let traces = pauli_traces(&a.to_dense());
            let scale = a.frobenius_norm() / d.sqrt();
            let coefs: Vec<(usize, f64)> = traces
                .iter()
                .enumerate()
                .filter(|(_, t)| t.abs() / d > 1e-15 * scale.max(1e-300))
                .map(|(s, t)| (s, t / d))
                .collect();
            raw.push((var, coefs));
        }
        let mut strings: Vec<usize> = raw.iter().flat_map(|(_, c)| c.iter().map(|&(s, _)| s)).collect();
        strings.sort_unstable();
        strings.dedup();
        let mut pos = vec![usize::MAX; n * n];
        for (k, &s) in strings.iter().enumerate() {
            pos[s] = k;
        }
        let columns = raw.into_iter().map(|(v, c)| (v, c.into_iter().map(|(s, a)| (pos[s], a)).collect())).collect();
        Some(PauliBlock { q, strings, columns })
    }

    /// Adds this block's contribution to the Schur matrix `m` (indexed by variable).
    fn accumulate(&self, v: &CMat, schur: &mut Mat<f64>) {
        let n = v.nrows();
        let u = self.strings.len();
        // vmat[α][β] = Re tr(α V β V)
        let mut vmat = vec![0.0; u * u];
        let vf = to_faer(v);
        for chunk_start in (0..u).step_by(CHUNK) {
            let chunk = &self.strings[chunk_start..(chunk_start + CHUNK).min(u)];
            let mut rhs = Mat::<C64>::zeros(n, n * chunk.len());
            for (c, &s) in chunk.iter().enumerate() {
                left_multiply(self.q, s, v, &mut rhs, c * n);
            }
            let mut prod = Mat::<C64>::zeros(n, n * chunk.len());
            matmul(prod.as_mut(), Accum::Replace, vf.as_ref(), rhs.as_ref(), C64::new(1.0, 0.0), Par::Seq);
            for (c, _) in chunk.iter().enumerate() {
                let q_beta = CMat::from_fn(n, n, |i, j| prod[(i, c * n + j)]);
                let traces = pauli_traces(&q_beta);
                let beta = chunk_start + c;
                for (alpha, &s) in self.strings.iter().enumerate() {
                    vmat[alpha * u + beta] = traces[s];
                }
            }
        }
        // t[:, j] = 𝒱 A_j, then M_ij += A_iᵀ t[:, j]
        let cols: Vec<Vec<f64>> = self
            .columns
            .iter()
            .map(|(_, cj)| {
                let mut t = vec![0.0; u];
                for &(beta, b) in cj {
                    for alpha in 0..u {
                        t[alpha] += vmat[alpha * u + beta] * b;
                    }
                }
                t
            })
            .collect();
        for (i, (vi, ci)) in self.columns.iter().enumerate() {
            for (j, (vj, _)) in self.columns.iter().enumerate().skip(i) {
                let val: f64 = ci.iter().map(|&(alpha, a)| a * cols[j][alpha]).sum();
                schur[(*vi, *vj)] += val;
                if i != j {
                    schur[(*vj, *vi)] += val;
                }
            }
        }
    }
}

fn accumulate_generic(block: &PsdBlock, v: &CMat, schur: &mut Mat<f64>) {
    let n = v.nrows();
    let vf = to_faer(v);
    let terms: Vec<(usize, &SparseHermitian)> = block.terms().iter().map(|(&k, a)| (k, a)).collect();
    for (j, &(vj, aj)) in terms.iter().enumerate() {
        let mut av = Mat::<C64>::zeros(n, n);
        for &(k, l, a) in aj.entries() {
            for c in 0..n {
                av[(k, c)] += a * v[(l, c)];
            }
        }
        let mut p = Mat::<C64>::zeros(n, n);
        matmul(p.as_mut(), Accum::Replace, vf.as_ref(), av.as_ref(), C64::new(1.0, 0.0), Par::Seq);
        for &(vi, ai) in &terms[j..] {
            let val: f64 = ai.entries().iter().map(|&(k, l, a)| (a * p[(l, k)]).re).sum();
            schur[(vi, vj)] += val;
            if vi != vj {
                schur[(vj, vi)] += val;
            }
        }
    }
}

/// Per-block strategy selected once per solve.
pub(crate) enum Route {
    Pauli(PauliBlock),
    Generic,
}

impl Route {
    pub(crate) fn for_block(block: &PsdBlock) -> Route {
        match PauliBlock::new(block) {
            Some(p) => Route::Pauli(p),
            None => Route::Generic,
        }
    }

    pub(crate) fn accumulate(&self, block: &PsdBlock, v: &CMat, schur: &mut Mat<f64>) {
        match self {
            Route::Pauli(p) => p.accumulate(v, schur),
            Route::Generic => accumulate_generic(block, v, schur),
        }
    }
}
