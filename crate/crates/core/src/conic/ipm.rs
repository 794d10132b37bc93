//! Infeasible-start primal-dual interior-point method with Nesterov-Todd
//! scaling and Mehrotra predictor-corrector steps.
//!
//! Per block, with `S = L_S L_S*`, `Z = L_Z L_Z*` and `L_Z* L_S = U Σ V*`, the
//! scaling `G⁻¹ = Σ^{-1/2} U* L_Z*` maps both `S` and `Z` to the diagonal `Σ`.
//! Search directions are computed in that scaled frame.

use faer::linalg::solvers::Solve;
use faer::{Mat, Side};
use log::debug;

use super::schur::Route;
use super::{ConicBackend, ConicProgram, DualCertificate, SolveResult, SolverOptions, Status};
use crate::tensor::{hermitian_part, hs_inner_matrices, CMat, C64};
use crate::{Error, Result};

/// The built-in solver.
#[derive(Clone, Copy, Debug, Default)]
pub struct InteriorPoint;

impl ConicBackend for InteriorPoint {
    fn name(&self) -> &str {
        "interior-point"
    }

    fn solve(&self, program: &ConicProgram, options: &SolverOptions) -> Result<SolveResult> {
        Solver::new(program, options)?.run()
    }
}

struct Scaling {
    /// `G⁻¹`
    ginv: CMat,
    /// `W⁻¹ = G⁻* G⁻¹`
    winv: CMat,
    d: Vec<f64>,
}

struct Direction {
    dx: Vec<f64>,
    dy: Vec<f64>,
    ds: Vec<CMat>,
    dz: Vec<CMat>,
    ds_scaled: Vec<CMat>,
    dz_scaled: Vec<CMat>,
}

struct Iterate {
    x: Vec<f64>,
    y: Vec<f64>,
    s: Vec<CMat>,
    z: Vec<CMat>,
}

#[derive(Clone, Copy, Debug)]
struct Measures {
    pobj: f64,
    dobj: f64,
    pinf: f64,
    dinf: f64,
    relgap: f64,
    mu: f64,
}

impl Measures {
    fn worst(&self) -> f64 {
        self.pinf.max(self.dinf).max(self.relgap)
    }
}

struct Solver<'a> {
    p: &'a ConicProgram,
    opt: SolverOptions,
    routes: Vec<Route>,
    n_total: f64,
    c_norm: f64,
    data_norm: f64,
}

fn adjoint(m: &CMat) -> CMat {
    m.adjoint()
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|a| a * a).sum::<f64>().sqrt()
}

/// Largest `α ≤ 1` keeping `diag(d) + α·dm ⪰ 0`, times `fraction`.
fn step_length(d: &[f64], dm: &CMat, fraction: f64) -> f64 {
    let n = d.len();
    let scaled = CMat::from_fn(n, n, |i, j| dm[(i, j)] / (d[i] * d[j]).sqrt());
    let lmin = hermitian_part(&scaled).symmetric_eigenvalues().iter().cloned().fold(f64::INFINITY, f64::min);
    if lmin >= 0.0 {
        1.0
    } else {
        (-fraction / lmin).min(1.0)
    }
}

impl<'a> Solver<'a> {
    fn new(p: &'a ConicProgram, opt: &SolverOptions) -> Result<Self> {
        p.validate()?;
        let routes = p.blocks().iter().map(Route::for_block).collect();
        let n_total = p.blocks().iter().map(|b| b.side() as f64).sum();
        let c_norm = norm(p.objective());
        let const_norm = p.blocks().iter().map(|b| b.constant().norm_squared()).sum::<f64>();
        let f_norm = p.equalities().iter().map(|e| e.rhs * e.rhs).sum::<f64>();
        Ok(Solver { p, opt: *opt, routes, n_total, c_norm, data_norm: (const_norm + f_norm).sqrt() })
    }

    fn initial(&self) -> Iterate {
        let p = self.p;
        let c = p.objective();
        let mut s = Vec::new();
        let mut z = Vec::new();
        for b in p.blocks() {
            let n = b.side() as f64;
            let mut xi = 10f64.max(n.sqrt());
            let mut eta = 10f64.max(n.sqrt()).max(b.constant().norm());
            for (&i, a) in b.terms() {
                let an = a.frobenius_norm();
                xi = xi.max(n * (1.0 + c[i].abs()) / (1.0 + an));
                eta = eta.max(an);
            }
            s.push(CMat::identity(b.side(), b.side()) * C64::new(eta, 0.0));
            z.push(CMat::identity(b.side(), b.side()) * C64::new(xi, 0.0));
        }
        Iterate { x: vec![0.0; p.n_vars()], y: vec![0.0; p.equalities().len()], s, z }
    }

    /// `Σ_b A_b*(H_b)`.
    fn adjoint_map(&self, h: &[CMat]) -> Vec<f64> {
        let mut out = vec![0.0; self.p.n_vars()];
        for (b, hb) in self.p.blocks().iter().zip(h) {
            for (&i, a) in b.terms() {
                out[i] += a.inner(hb);
            }
        }
        out
    }

    /// `A_b(x)` without the constant.
    fn linear_map(&self, b: usize, x: &[f64]) -> CMat {
        let block = &self.p.blocks()[b];
        let mut m = CMat::zeros(block.side(), block.side());
        for (&i, a) in block.terms() {
            a.add_to(x[i], &mut m);
        }
        m
    }

    fn residuals(&self, it: &Iterate) -> (Vec<CMat>, Vec<f64>, Vec<f64>) {
        let p = self.p;
        let rp: Vec<CMat> = (0..p.blocks().len())
            .map(|b| &it.s[b] - p.blocks()[b].constant() - self.linear_map(b, &it.x))
            .collect();
        let az = self.adjoint_map(&it.z);
        let mut rd: Vec<f64> = p.objective().iter().zip(&az).map(|(c, a)| c - a).collect();
        for (e, &y) in p.equalities().iter().zip(&it.y) {
            for (r, &a) in rd.iter_mut().zip(&e.row) {
                *r -= a * y;
            }
        }
        let re: Vec<f64> = p.equalities().iter().map(|e| e.rhs - dot(&e.row, &it.x)).collect();
        (rp, rd, re)
    }

    fn measures(&self, it: &Iterate, rp: &[CMat], rd: &[f64], re: &[f64]) -> Measures {
        let p = self.p;
        let pobj = dot(p.objective(), &it.x);
        let dobj = -p.blocks().iter().zip(&it.z).map(|(b, z)| hs_inner_matrices(b.constant(), z)).sum::<f64>()
            + p.equalities().iter().zip(&it.y).map(|(e, y)| e.rhs * y).sum::<f64>();
        let comp: f64 = it.s.iter().zip(&it.z).map(|(s, z)| hs_inner_matrices(s, z)).sum();
        let rp_norm = (rp.iter().map(|m| m.norm_squared()).sum::<f64>() + re.iter().map(|a| a * a).sum::<f64>()).sqrt();
        let denom = 1.0 + pobj.abs() + dobj.abs();
        Measures {
            pobj,
            dobj,
            pinf: rp_norm / (1.0 + self.data_norm),
            dinf: norm(rd) / (1.0 + self.c_norm),
            relgap: ((pobj - dobj).abs()).max(comp.abs()) / denom,
            mu: comp / self.n_total,
        }
    }

    fn scaling(s: &CMat, z: &CMat) -> Option<Scaling> {
        let ls = s.clone().cholesky()?.l();
        let lz = z.clone().cholesky()?.l();
        let svd = (adjoint(&lz) * &ls).svd(true, false);
        let u = svd.u?;
        let sig = svd.singular_values;
        if sig.iter().any(|&v| v.is_nan() || v <= 0.0 || v.is_infinite()) {
            return None;
        }
        let n = sig.len();
        let mut ginv = adjoint(&u) * adjoint(&lz);
        for i in 0..n {
            let f = C64::new(1.0 / sig[i].sqrt(), 0.0);
            for j in 0..n {
                ginv[(i, j)] *= f;
            }
        }
        let winv = hermitian_part(&(adjoint(&ginv) * &ginv));
        Some(Scaling { ginv, winv, d: sig.iter().cloned().collect() })
    }

    fn schur(&self, scalings: &[Scaling]) -> Mat<f64> {
        let m = self.p.n_vars();
        let mut schur = Mat::<f64>::zeros(m, m);
        for ((b, route), sc) in self.p.blocks().iter().zip(&self.routes).zip(scalings) {
            route.accumulate(b, &sc.winv, &mut schur);
        }
        schur
    }

    #[allow(clippy::too_many_arguments)]
    fn direction(
        &self,
        system: &LinearSystem,
        scalings: &[Scaling],
        r_scaled: &[CMat],
        rp: &[CMat],
        rd: &[f64],
        re: &[f64],
    ) -> Result<Direction> {
        let h: Vec<CMat> = scalings
            .iter()
            .zip(r_scaled)
            .zip(rp)
            .map(|((sc, r), rpb)| adjoint(&sc.ginv) * r * &sc.ginv + &sc.winv * rpb * &sc.winv)
            .collect();
        let mut rhs = self.adjoint_map(&h);
        for (a, d) in rhs.iter_mut().zip(rd) {
            *a -= d;
        }
        let (dx, dy) = system.solve(&rhs, re)?;
        let mut ds = Vec::new();
        let mut dz = Vec::new();
        let mut ds_scaled = Vec::new();
        let mut dz_scaled = Vec::new();
        for (b, sc) in scalings.iter().enumerate() {
            let dsb = hermitian_part(&(self.linear_map(b, &dx) - &rp[b]));
            let dsb_t = hermitian_part(&(&sc.ginv * &dsb * adjoint(&sc.ginv)));
            let dzb_t = hermitian_part(&(&r_scaled[b] - &dsb_t));
            let dzb = hermitian_part(&(adjoint(&sc.ginv) * &dzb_t * &sc.ginv));
            ds.push(dsb);
            dz.push(dzb);
            ds_scaled.push(dsb_t);
            dz_scaled.push(dzb_t);
        }
        Ok(Direction { dx, dy, ds, dz, ds_scaled, dz_scaled })
    }

    fn steps(&self, scalings: &[Scaling], dir: &Direction, fraction: f64) -> (f64, f64) {
        let mut ap: f64 = 1.0;
        let mut ad: f64 = 1.0;
        for (b, sc) in scalings.iter().enumerate() {
            ap = ap.min(step_length(&sc.d, &dir.ds_scaled[b], fraction));
            ad = ad.min(step_length(&sc.d, &dir.dz_scaled[b], fraction));
        }
        (ap, ad)
    }

    fn block_min_eigenvalues(&self, x: &[f64]) -> Vec<f64> {
        self.p
            .blocks()
            .iter()
            .map(|b| hermitian_part(&b.evaluate(x)).symmetric_eigenvalues().iter().cloned().fold(f64::INFINITY, f64::min))
            .collect()
    }

    fn finish(&self, it: Iterate, status: Status, m: Measures, iterations: usize) -> SolveResult {
        let block_min_eigenvalues = self.block_min_eigenvalues(&it.x);
        SolveResult {
            status,
            objective_value: m.pobj,
            dual_objective: m.dobj,
            gap: m.pobj - m.dobj,
            primal_residual: m.pinf,
            dual_residual: m.dinf,
            block_min_eigenvalues,
            iterations,
            x: it.x,
            dual: DualCertificate { blocks: it.z, equalities: it.y },
        }
    }

    fn run(&self) -> Result<SolveResult> {
        let tol = self.opt.tol;
        let mut it = self.initial();
        let scale0 = ray_scale(&it);
        let mut best: Option<(Iterate, Measures, usize)> = None;
        for iter in 0..self.opt.max_iter {
            let (rp, rd, re) = self.residuals(&it);
            let m = self.measures(&it, &rp, &rd, &re);
            debug!(
                "iter {iter:3} pobj {:+.9e} dobj {:+.9e} pinf {:.2e} dinf {:.2e} gap {:.2e}",
                m.pobj, m.dobj, m.pinf, m.dinf, m.relgap
            );
            if best.as_ref().is_none_or(|(_, b, _)| m.worst() <= b.worst()) {
                best = Some((it.clone_iterate(), m, iter));
            } else if best.as_ref().is_some_and(|(_, _, at)| iter - at >= STALL) {
                debug!("no progress since iteration {}", iter - STALL);
                break;
            }
            if m.pinf <= tol && m.dinf <= tol && m.relgap <= tol {
                let eigs = self.block_min_eigenvalues(&it.x);
                if eigs.iter().all(|&e| e >= -tol) {
                    return Ok(self.finish(it, Status::Optimal, m, iter));
                }
            }
            if let Some(status) = self.detect_infeasibility(&it, &rd, scale0) {
                return Ok(self.finish(it, status, m, iter));
            }
            let Some(scalings) = it.s.iter().zip(&it.z).map(|(s, z)| Solver::scaling(s, z)).collect::<Option<Vec<_>>>()
            else {
                debug!("scaling breakdown at iteration {iter}");
                break;
            };
            let system = match LinearSystem::new(self.schur(&scalings), self.p) {
                Ok(s) => s,
                Err(e) => {
                    debug!("Schur system breakdown at iteration {iter}: {e}");
                    break;
                }
            };
            // predictor
            let r_aff: Vec<CMat> = scalings.iter().map(|sc| CMat::from_diagonal(&diag_c(&sc.d, |d| -d))).collect();
            let aff = self.direction(&system, &scalings, &r_aff, &rp, &rd, &re)?;
            let (ap, ad) = self.steps(&scalings, &aff, 1.0);
            let mu_aff: f64 = it
                .s
                .iter()
                .zip(&it.z)
                .zip(aff.ds.iter().zip(&aff.dz))
                .map(|((s, z), (ds, dz))| hs_inner_matrices(&(s + ds * C64::new(ap, 0.0)), &(z + dz * C64::new(ad, 0.0))))
                .sum::<f64>()
                / self.n_total;
            let sigma = (mu_aff / m.mu).clamp(0.0, 1.0).powi(3);
            // corrector
            let r_cor: Vec<CMat> = scalings
                .iter()
                .enumerate()
                .map(|(b, sc)| {
                    let cross = &aff.dz_scaled[b] * &aff.ds_scaled[b] + &aff.ds_scaled[b] * &aff.dz_scaled[b];
                    let n = sc.d.len();
                    CMat::from_fn(n, n, |i, j| {
                        let diag = if i == j { 2.0 * sigma * m.mu - 2.0 * sc.d[i] * sc.d[i] } else { 0.0 };
                        (C64::new(diag, 0.0) - cross[(i, j)]) / (sc.d[i] + sc.d[j])
                    })
                })
                .collect();
            let dir = self.direction(&system, &scalings, &r_cor, &rp, &rd, &re)?;
            let (ap, ad) = self.steps(&scalings, &dir, self.opt.step_fraction);
            for (x, dx) in it.x.iter_mut().zip(&dir.dx) {
                *x += ap * dx;
            }
            for (y, dy) in it.y.iter_mut().zip(&dir.dy) {
                *y += ad * dy;
            }
            for b in 0..it.s.len() {
                it.s[b] = hermitian_part(&(&it.s[b] + &dir.ds[b] * C64::new(ap, 0.0)));
                it.z[b] = hermitian_part(&(&it.z[b] + &dir.dz[b] * C64::new(ad, 0.0)));
            }
        }
        let (it, m, iter) = best.expect("at least one iterate");
        Ok(self.finish(it, Status::MaxIter, m, iter))
    }

    fn detect_infeasibility(&self, it: &Iterate, rd: &[f64], scale0: f64) -> Option<Status> {
        let tol = self.opt.tol;
        let p = self.p;
        let scale = ray_scale(it);
        if scale <= 1e6 * scale0 {
            return None;
        }
        let zs = (it.z.iter().map(|z| z.norm_squared()).sum::<f64>() + norm(&it.y).powi(2)).sqrt();
        if zs > 1e6 * scale0 {
            // dual ray: A*(Z) + Eᵀy = c - r_d should vanish relative to |Z|
            let ray: Vec<f64> = p.objective().iter().zip(rd).map(|(c, r)| c - r).collect();
            let ray_obj = -p.blocks().iter().zip(&it.z).map(|(b, z)| hs_inner_matrices(b.constant(), z)).sum::<f64>()
                + p.equalities().iter().zip(&it.y).map(|(e, y)| e.rhs * y).sum::<f64>();
            if norm(&ray) / zs < 1e-6 && ray_obj / zs > tol {
                return Some(Status::Infeasible);
            }
        }
        let xs = (norm(&it.x).powi(2) + it.s.iter().map(|s| s.norm_squared()).sum::<f64>()).sqrt();
        if xs > 1e6 * scale0 && dot(p.objective(), &it.x) / xs < -tol {
            return Some(Status::Unbounded);
        }
        None
    }
}

fn ray_scale(it: &Iterate) -> f64 {
    let zs = it.z.iter().map(|z| z.norm_squared()).sum::<f64>() + norm(&it.y).powi(2);
    let xs = norm(&it.x).powi(2) + it.s.iter().map(|s| s.norm_squared()).sum::<f64>();
    zs.max(xs).sqrt().max(1.0)
}

impl Iterate {
    fn clone_iterate(&self) -> Iterate {
        Iterate { x: self.x.clone(), y: self.y.clone(), s: self.s.clone(), z: self.z.clone() }
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn diag_c(d: &[f64], f: impl Fn(f64) -> f64) -> nalgebra::DVector<C64> {
    nalgebra::DVector::from_iterator(d.len(), d.iter().map(|&v| C64::new(f(v), 0.0)))
}

/// `[M  -Eᵀ; E  0] [dx; dy] = [rhs; r_e]`, via Cholesky of `M` when possible.
enum Factor {
    Cholesky { llt: faer::linalg::solvers::Llt<f64>, minv_et: Mat<f64>, reduced: Option<faer::linalg::solvers::PartialPivLu<f64>> },
    Augmented(faer::linalg::solvers::PartialPivLu<f64>),
}

/// Factorisation of `[M -Eᵀ; E 0]` with iterative refinement against the stored matrices.
struct LinearSystem {
    schur: Mat<f64>,
    e: Mat<f64>,
    factor: Factor,
}

/// Iterations without improving the best iterate before giving up.
const STALL: usize = 6;

/// Refinement steps applied to every solve.
const REFINE: usize = 2;

impl LinearSystem {
    fn new(schur: Mat<f64>, p: &ConicProgram) -> Result<Self> {
        let m = p.n_vars();
        let k = p.equalities().len();
        let e = Mat::<f64>::from_fn(k, m, |r, c| p.equalities()[r].row[c]);
        if let Ok(llt) = schur.llt(Side::Lower) {
            let minv_et = llt.solve(e.transpose().to_owned());
            let reduced = (k > 0).then(|| (&e * &minv_et).partial_piv_lu());
            return Ok(LinearSystem { schur, e, factor: Factor::Cholesky { llt, minv_et, reduced } });
        }
        let mut aug = Mat::<f64>::zeros(m + k, m + k);
        for i in 0..m {
            for j in 0..m {
                aug[(i, j)] = schur[(i, j)];
            }
        }
        for r in 0..k {
            for c in 0..m {
                aug[(c, m + r)] = -e[(r, c)];
                aug[(m + r, c)] = e[(r, c)];
            }
        }
        let lu = aug.partial_piv_lu();
        let probe = lu.solve(Mat::<f64>::from_fn(m + k, 1, |_, _| 1.0));
        if probe.col(0).iter().any(|v| !v.is_finite()) {
            return Err(Error::Solver("singular Schur complement".into()));
        }
        Ok(LinearSystem { schur, e, factor: Factor::Augmented(lu) })
    }

    fn solve_once(&self, rhs: &Mat<f64>, re: &Mat<f64>) -> (Mat<f64>, Mat<f64>) {
        let m = rhs.nrows();
        match &self.factor {
            Factor::Cholesky { llt, minv_et, reduced } => {
                let dx0 = llt.solve(rhs.to_owned());
                match reduced {
                    None => (dx0, Mat::zeros(0, 1)),
                    Some(lu) => {
                        let r = re - &self.e * &dx0;
                        let dy = lu.solve(r);
                        let dx = &dx0 + minv_et * &dy;
                        (dx, dy)
                    }
                }
            }
            Factor::Augmented(lu) => {
                let k = re.nrows();
                let b = Mat::<f64>::from_fn(m + k, 1, |i, _| if i < m { rhs[(i, 0)] } else { re[(i - m, 0)] });
                let sol = lu.solve(b);
                (Mat::from_fn(m, 1, |i, _| sol[(i, 0)]), Mat::from_fn(k, 1, |i, _| sol[(m + i, 0)]))
            }
        }
    }

    fn solve(&self, rhs: &[f64], re: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
        let b = Mat::<f64>::from_fn(rhs.len(), 1, |i, _| rhs[i]);
        let c = Mat::<f64>::from_fn(re.len(), 1, |i, _| re[i]);
        let (mut dx, mut dy) = self.solve_once(&b, &c);
        for _ in 0..REFINE {
            let r1 = &b - &self.schur * &dx + self.e.transpose() * &dy;
            let r2 = &c - &self.e * &dx;
            let (cx, cy) = self.solve_once(&r1, &r2);
            dx += cx;
            dy += cy;
        }
        let out: (Vec<f64>, Vec<f64>) = (dx.col(0).iter().cloned().collect(), dy.col(0).iter().cloned().collect());
        if out.0.iter().chain(&out.1).any(|v| !v.is_finite()) {
            return Err(Error::Solver("non-finite search direction".into()));
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::super::{solve, PsdBlock, SparseHermitian};
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    /// minimise r subject to r·1 - Z ⪰ 0
    #[test]
    fn largest_eigenvalue() {
        let mut p = ConicProgram::new(1);
        p.set_objective(vec![1.0]).unwrap();
        let mut b = PsdBlock::new(2);
        b.set_constant(CMat::from_row_slice(2, 2, &[c(-1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)])).unwrap();
        b.add_term(0, SparseHermitian::identity(2)).unwrap();
        p.add_block(b).unwrap();
        let r = solve(&p, 1e-9, 100).unwrap();
        assert_eq!(r.status, Status::Optimal);
        assert!((r.objective_value - 1.0).abs() < 1e-7, "{}", r.objective_value);
        assert!(r.gap.abs() < 1e-7);
    }

    /// maximise the real part of the off-diagonal of a unit-trace 2x2 PSD matrix: value 1/2
    #[test]
    fn complex_block_with_equality() {
        // X = [[a, b + ic], [b - ic, 1 - a]], maximise b
        let mut p = ConicProgram::new(3);
        p.set_objective(vec![0.0, -1.0, 0.0]).unwrap();
        let mut blk = PsdBlock::new(2);
        blk.set_constant(CMat::from_row_slice(2, 2, &[c(0.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)])).unwrap();
        blk.add_term(0, SparseHermitian::new(2, [(0, 0, c(1.0, 0.0)), (1, 1, c(-1.0, 0.0))]).unwrap()).unwrap();
        blk.add_term(1, SparseHermitian::new(2, [(0, 1, c(1.0, 0.0)), (1, 0, c(1.0, 0.0))]).unwrap()).unwrap();
        blk.add_term(2, SparseHermitian::new(2, [(0, 1, c(0.0, 1.0)), (1, 0, c(0.0, -1.0))]).unwrap()).unwrap();
        p.add_block(blk).unwrap();
        p.add_equality(vec![0.0, 0.0, 1.0], 0.25).unwrap();
        let r = solve(&p, 1e-9, 100).unwrap();
        assert_eq!(r.status, Status::Optimal);
        // with c = 1/4: a(1-a) ≥ b² + 1/16, best b = √(1/4 - 1/16)
        let expected = -(0.25f64 - 0.0625).sqrt();
        assert!((r.objective_value - expected).abs() < 1e-7, "{}", r.objective_value);
        let e = solve(&p.real_embedding(), 1e-9, 100).unwrap();
        assert!((e.objective_value - r.objective_value).abs() < 1e-7);
    }

    #[test]
    fn infeasible_program_reported() {
        // x ⪰ 0 and -x - 1 ⪰ 0
        let mut p = ConicProgram::new(1);
        let mut a = PsdBlock::new(1);
        a.add_term(0, SparseHermitian::identity(1)).unwrap();
        p.add_block(a).unwrap();
        let mut b = PsdBlock::new(1);
        b.set_constant(CMat::from_element(1, 1, c(-1.0, 0.0))).unwrap();
        b.add_term(0, SparseHermitian::new(1, [(0, 0, c(-1.0, 0.0))]).unwrap()).unwrap();
        p.add_block(b).unwrap();
        let r = solve(&p, 1e-8, 200).unwrap();
        assert_eq!(r.status, Status::Infeasible);
    }

    #[test]
    fn unbounded_program_reported() {
        // minimise x subject to -x ⪰ 0
        let mut p = ConicProgram::new(1);
        p.set_objective(vec![1.0]).unwrap();
        let mut a = PsdBlock::new(1);
        a.add_term(0, SparseHermitian::new(1, [(0, 0, c(-1.0, 0.0))]).unwrap()).unwrap();
        p.add_block(a).unwrap();
        let r = solve(&p, 1e-8, 200).unwrap();
        assert_eq!(r.status, Status::Unbounded);
    }
}
