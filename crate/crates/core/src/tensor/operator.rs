use std::ops::{Add, Mul, Neg, Sub};

use nalgebra::DMatrix;
use num_complex::Complex64;

use super::{Layout, Tolerance};
use crate::{Error, Result};

pub type C64 = Complex64;
pub type CMat = DMatrix<C64>;

/// Hermitian operator on the tensor product space described by a [`Layout`].
#[derive(Clone, Debug, PartialEq)]
pub struct Operator {
    layout: Layout,
    matrix: CMat,
}

/// Largest deviation `|m_ij - conj(m_ji)|`.
pub fn hermitian_deviation(m: &CMat) -> f64 {
    let n = m.nrows();
    let mut dev = 0.0f64;
    for i in 0..n {
        for j in i..n {
            dev = dev.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    dev
}

pub(crate) fn hermitian_part(m: &CMat) -> CMat {
    (m + m.adjoint()) * C64::new(0.5, 0.0)
}

impl Operator {
    /// Checks the side length and Hermiticity (`1e-12 · max|entry|`), then
    /// stores the exactly Hermitian part.
    pub fn new(layout: Layout, matrix: CMat) -> Result<Self> {
        let d = layout.dim();
        if matrix.nrows() != d || matrix.ncols() != d {
            return Err(Error::DimensionMismatch { expected: d, got: matrix.nrows() });
        }
        let scale = matrix.iter().map(|z| z.norm()).fold(0.0, f64::max);
        let deviation = hermitian_deviation(&matrix);
        if deviation > 1e-12 * scale.max(f64::MIN_POSITIVE) {
            return Err(Error::NotHermitian { deviation });
        }
        Ok(Operator { matrix: hermitian_part(&matrix), layout })
    }

    /// Caller guarantees Hermiticity up to rounding; the Hermitian part is stored.
    pub(crate) fn from_hermitian(layout: Layout, matrix: CMat) -> Self {
        debug_assert_eq!(matrix.nrows(), layout.dim());
        Operator { matrix: hermitian_part(&matrix), layout }
    }

    pub fn zero(layout: &Layout) -> Self {
        let d = layout.dim();
        Operator { layout: layout.clone(), matrix: CMat::zeros(d, d) }
    }

    pub fn identity(layout: &Layout) -> Self {
        let d = layout.dim();
        Operator { layout: layout.clone(), matrix: CMat::identity(d, d) }
    }

    /// Builds `Σ_i c_i |ψ_i⟩⟨ψ_i|`-style operators from a ket: returns `|ψ⟩⟨ψ|`.
    pub fn projector(layout: &Layout, ket: &[C64]) -> Result<Self> {
        let d = layout.dim();
        if ket.len() != d {
            return Err(Error::DimensionMismatch { expected: d, got: ket.len() });
        }
        let m = CMat::from_fn(d, d, |i, j| ket[i] * ket[j].conj());
        Ok(Operator::from_hermitian(layout.clone(), m))
    }

    pub fn layout(&self) -> &Layout {
        &self.layout
    }

    pub fn matrix(&self) -> &CMat {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMat {
        self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn trace(&self) -> f64 {
        self.matrix.trace().re
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.matrix.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Largest absolute eigenvalue.
    pub fn operator_norm(&self) -> f64 {
        self.eigenvalues().iter().fold(0.0, |acc, e| acc.max(e.abs()))
    }

    /// Eigenvalues in ascending order.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let mut ev: Vec<f64> = self.matrix.clone().symmetric_eigenvalues().iter().copied().collect();
        ev.sort_by(|a, b| a.total_cmp(b));
        ev
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues().first().copied().unwrap_or(0.0)
    }

    /// `min_eigenvalue ≥ -tol.threshold(‖H‖)`.
    pub fn is_psd(&self, tol: &Tolerance) -> bool {
        let ev = self.eigenvalues();
        let norm = ev.iter().fold(0.0f64, |acc, e| acc.max(e.abs()));
        ev.first().is_none_or(|&m| m >= -tol.threshold(norm))
    }

    /// Hilbert–Schmidt inner product `tr[A·B]`.
    pub fn hs_inner(&self, other: &Operator) -> Result<f64> {
        self.require_same_layout(other)?;
        Ok(hs_inner_matrices(&self.matrix, &other.matrix))
    }

    pub(crate) fn require_same_layout(&self, other: &Operator) -> Result<()> {
        if self.layout != other.layout {
            return Err(Error::LayoutMismatch(format!("{} vs {}", self.layout, other.layout)));
        }
        Ok(())
    }

    pub fn scale(&self, alpha: f64) -> Operator {
        Operator { layout: self.layout.clone(), matrix: &self.matrix * C64::new(alpha, 0.0) }
    }

    pub fn try_add(&self, other: &Operator) -> Result<Operator> {
        self.require_same_layout(other)?;
        Ok(Operator { layout: self.layout.clone(), matrix: &self.matrix + &other.matrix })
    }

    pub fn try_sub(&self, other: &Operator) -> Result<Operator> {
        self.require_same_layout(other)?;
        Ok(Operator { layout: self.layout.clone(), matrix: &self.matrix - &other.matrix })
    }

    /// `α·self + β·other`.
    pub fn combine(&self, alpha: f64, other: &Operator, beta: f64) -> Result<Operator> {
        self.require_same_layout(other)?;
        Ok(Operator {
            layout: self.layout.clone(),
            matrix: &self.matrix * C64::new(alpha, 0.0) + &other.matrix * C64::new(beta, 0.0),
        })
    }

    /// Kronecker product with layouts concatenated.
    pub fn kron(&self, other: &Operator) -> Result<Operator> {
        let layout = self.layout.concat(&other.layout)?;
        Ok(Operator { layout, matrix: self.matrix.kronecker(&other.matrix) })
    }

    /// Partial trace over the named subsystems.
    pub fn partial_trace(&self, over: &[&str]) -> Result<Operator> {
        let split = Split::new(&self.layout, over)?;
        let kept_layout = self.layout.without(over)?;
        let k = kept_layout.dim();
        let mut out = CMat::zeros(k, k);
        let d = self.dim();
        for i in 0..d {
            for j in 0..d {
                if split.traced[i] == split.traced[j] {
                    out[(split.kept[i], split.kept[j])] += self.matrix[(i, j)];
                }
            }
        }
        Ok(Operator::from_hermitian(kept_layout, out))
    }

    /// The map `H ↦ (1^X/d_X) ⊗ tr_X H`, re-embedded in the original ordering.
    pub fn trace_and_replace(&self, over: &[&str]) -> Result<Operator> {
        let reduced = self.partial_trace(over)?;
        let split = Split::new(&self.layout, over)?;
        let dx = self.layout.dim_of(over)? as f64;
        let d = self.dim();
        let mut out = CMat::zeros(d, d);
        for i in 0..d {
            for j in 0..d {
                if split.traced[i] == split.traced[j] {
                    out[(i, j)] = reduced.matrix[(split.kept[i], split.kept[j])] / dx;
                }
            }
        }
        Ok(Operator::from_hermitian(self.layout.clone(), out))
    }

    /// Reorders subsystems to follow `target`, which must hold the same subsystems.
    pub fn permute_to(&self, target: &Layout) -> Result<Operator> {
        if target.len() != self.layout.len() {
            return Err(Error::LayoutMismatch(format!("{} vs {}", self.layout, target)));
        }
        let perm: Vec<usize> = target
            .systems()
            .iter()
            .map(|s| self.layout.index_of(&s.label))
            .collect::<Result<_>>()?;
        for (t, &p) in target.systems().iter().zip(&perm) {
            if self.layout.systems()[p].dim != t.dim {
                return Err(Error::LayoutMismatch(format!("dimension of `{}` differs", t.label)));
            }
        }
        let d = self.dim();
        // map target flat index -> source flat index
        let src_index = |ti: usize| -> usize {
            let td = target.digits(ti);
            let mut sd = vec![0; td.len()];
            for (k, &p) in perm.iter().enumerate() {
                sd[p] = td[k];
            }
            sd.iter().zip(self.layout.systems()).fold(0, |acc, (&digit, s)| acc * s.dim + digit)
        };
        let map: Vec<usize> = (0..d).map(src_index).collect();
        let m = CMat::from_fn(d, d, |i, j| self.matrix[(map[i], map[j])]);
        Ok(Operator { layout: target.clone(), matrix: m })
    }
}

pub(crate) fn hs_inner_matrices(a: &CMat, b: &CMat) -> f64 {
    // tr(AB) = Σ_ij A_ij B_ji
    let n = a.nrows();
    let mut acc = 0.0;
    for i in 0..n {
        for j in 0..n {
            acc += (a[(i, j)] * b[(j, i)]).re;
        }
    }
    acc
}

/// Flat-index bookkeeping for splitting a layout into kept and traced factors.
struct Split {
    kept: Vec<usize>,
    traced: Vec<usize>,
}

impl Split {
    fn new(layout: &Layout, over: &[&str]) -> Result<Self> {
        let mut traced_mask = vec![false; layout.len()];
        for l in over {
            traced_mask[layout.index_of(l)?] = true;
        }
        let d = layout.dim();
        let mut kept = Vec::with_capacity(d);
        let mut traced = Vec::with_capacity(d);
        for i in 0..d {
            let digits = layout.digits(i);
            let (mut k, mut t) = (0, 0);
            for ((digit, s), &is_traced) in digits.iter().zip(layout.systems()).zip(&traced_mask) {
                if is_traced {
                    t = t * s.dim + digit;
                } else {
                    k = k * s.dim + digit;
                }
            }
            kept.push(k);
            traced.push(t);
        }
        Ok(Split { kept, traced })
    }
}

impl Add for &Operator {
    type Output = Operator;
    fn add(self, rhs: &Operator) -> Operator {
        self.try_add(rhs).expect("layout mismatch in operator addition")
    }
}

impl Sub for &Operator {
    type Output = Operator;
    fn sub(self, rhs: &Operator) -> Operator {
        self.try_sub(rhs).expect("layout mismatch in operator subtraction")
    }
}

impl Mul<f64> for &Operator {
    type Output = Operator;
    fn mul(self, rhs: f64) -> Operator {
        self.scale(rhs)
    }
}

impl Neg for &Operator {
    type Output = Operator;
    fn neg(self) -> Operator {
        self.scale(-1.0)
    }
}
