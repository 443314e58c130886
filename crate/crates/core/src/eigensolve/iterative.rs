use alloc::boxed::Box;
use alloc::vec;
use alloc::vec::Vec;
#[allow(unused_imports)]
use num_traits::Float;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{
    dense_eigs, finish, gershgorin_lower_bound, residual_norm, solve_shifted_matrices, within_tol, Method,
    Preconditioner, SpectrumOptions, SpectrumResult,
};
use crate::error::{Error, Result};
use crate::linalg::dense::symmetric_eigen;
use crate::linalg::tridiag::SymTridiagonal;
use crate::linalg::{weighted_dot, BandCholesky, CsrMatrix};

type Block = Vec<Vec<f64>>;

const MAX_REFACTORS: usize = 12;

/// Either a shifted banded Cholesky factor or the inverse diagonal.
struct Precond {
    sigma: f64,
    chol: Option<BandCholesky>,
    inv_diag: Vec<f64>,
    refactors: usize,
}

impl Precond {
    fn new(k: &CsrMatrix, mass: &[f64], kind: Preconditioner) -> Self {
        let inv_diag = k.diagonal().iter().map(|d| if *d > 0.0 { 1.0 / d } else { 1.0 }).collect();
        let mut p = Self { sigma: 0.0, chol: None, inv_diag, refactors: 0 };
        if kind == Preconditioner::ShiftedCholesky {
            p.chol = BandCholesky::factor_shifted(k, 0.0, mass);
            if p.chol.is_none() {
                let lb = gershgorin_lower_bound(k, mass);
                let sigma = lb - 1e-6 * lb.abs().max(1.0);
                p.chol = BandCholesky::factor_shifted(k, sigma, mass);
                p.sigma = sigma;
            }
        }
        p
    }

    fn apply(&self, r: &[f64]) -> Vec<f64> {
        match &self.chol {
            Some(c) => c.solve(r),
            None => r.iter().zip(&self.inv_diag).map(|(a, d)| a * d).collect(),
        }
    }

    /// Moves the shift toward `theta`, backing off while the factorization fails.
    fn retarget(&mut self, k: &CsrMatrix, mass: &[f64], theta: f64) -> bool {
        if self.chol.is_none() || self.refactors >= MAX_REFACTORS || !(theta > self.sigma) {
            return false;
        }
        let mut frac = 0.9;
        while frac > 0.2 {
            let sigma = self.sigma + frac * (theta - self.sigma);
            if let Some(c) = BandCholesky::factor_shifted(k, sigma, mass) {
                self.chol = Some(c);
                self.sigma = sigma;
                self.refactors += 1;
                return true;
            }
            frac *= 0.5;
        }
        self.refactors += 1;
        false
    }
}

fn apply_block(k: &CsrMatrix, x: &Block) -> Block {
    x.iter().map(|v| k.apply(v)).collect()
}

/// Removes from `y` its `M`-projection onto the orthonormal block `x`.
fn project_out(mass: &[f64], x: &Block, y: &mut Block) {
    for v in y.iter_mut() {
        for _ in 0..2 {
            for q in x {
                let p = weighted_dot(mass, q, v);
                for (a, b) in v.iter_mut().zip(q) {
                    *a -= p * b;
                }
            }
        }
    }
}

/// `M`-orthonormalizes a block by the SVQB method, dropping directions
/// whose Gram eigenvalue falls below `drop * max`.
fn svqb(mass: &[f64], y: &Block, drop: f64) -> Block {
    let s = y.len();
    if s == 0 {
        return Vec::new();
    }
    let mut g = vec![0.0; s * s];
    for i in 0..s {
        for j in 0..=i {
            let v = weighted_dot(mass, &y[i], &y[j]);
            g[i * s + j] = v;
            g[j * s + i] = v;
        }
    }
    let d: Vec<f64> = (0..s).map(|i| if g[i * s + i] > 0.0 { 1.0 / g[i * s + i].sqrt() } else { 0.0 }).collect();
    for i in 0..s {
        for j in 0..s {
            g[i * s + j] *= d[i] * d[j];
        }
    }
    let eig = symmetric_eigen(s, &g);
    let top = eig.values.iter().fold(0.0f64, |m, v| m.max(*v));
    let n = y[0].len();
    let mut out = Vec::new();
    for (mu, v) in eig.values.iter().zip(&eig.vectors) {
        if !(*mu > drop * top) {
            continue;
        }
        let mut col = vec![0.0; n];
        for (j, yj) in y.iter().enumerate() {
            let c = v[j] * d[j] / mu.sqrt();
            if c != 0.0 {
                for (a, b) in col.iter_mut().zip(yj) {
                    *a += c * b;
                }
            }
        }
        out.push(col);
    }
    out
}

fn combine(basis: &Block, coeffs: &[f64]) -> Vec<f64> {
    let n = basis[0].len();
    let mut out = vec![0.0; n];
    for (b, c) in basis.iter().zip(coeffs) {
        if *c != 0.0 {
            for (o, v) in out.iter_mut().zip(b) {
                *o += c * v;
            }
        }
    }
    out
}

/// Rayleigh-Ritz on an `M`-orthonormal basis with known `K`-images.
fn rayleigh_ritz(basis: &Block, kbasis: &Block) -> (Vec<f64>, Vec<Vec<f64>>) {
    let s = basis.len();
    let mut g = vec![0.0; s * s];
    for i in 0..s {
        for j in 0..=i {
            let a: f64 = basis[i].iter().zip(&kbasis[j]).map(|(x, y)| x * y).sum();
            let b: f64 = basis[j].iter().zip(&kbasis[i]).map(|(x, y)| x * y).sum();
            let v = 0.5 * (a + b);
            g[i * s + j] = v;
            g[j * s + i] = v;
        }
    }
    let eig = symmetric_eigen(s, &g);
    (eig.values, eig.vectors)
}

fn random_block(n: usize, cols: usize, seed: u64) -> Block {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..cols).map(|_| (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect()).collect()
}

fn default_cap(n: usize) -> usize {
    ((10.0 * (n as f64).sqrt()).ceil() as usize).max(100)
}

/// Locally optimal block preconditioned conjugate gradients with block
/// size `m + 2`; falls back to shift-invert Lanczos on stagnation.
pub fn lobpcg_eigs(k: &CsrMatrix, mass: &[f64], m: usize, options: &SpectrumOptions) -> Result<SpectrumResult> {
    let n = k.dim();
    let nb = (m + 2).min(n);
    if 3 * nb >= n {
        return Ok(dense_eigs(k, mass, m, false, options.tol));
    }
    let cap = options.max_iter.unwrap_or_else(|| default_cap(n));
    let tol = options.tol;
    let mut pre = Precond::new(k, mass, options.preconditioner);

    let mut x = svqb(mass, &random_block(n, nb, options.seed), 1e-14);
    let mut kx = apply_block(k, &x);
    let (theta0, c0) = rayleigh_ritz(&x, &kx);
    let cols: Vec<&Vec<f64>> = c0.iter().take(nb).collect();
    x = cols.iter().map(|c| combine(&x, c)).collect();
    kx = cols.iter().map(|c| combine(&kx, c)).collect();
    let mut theta: Vec<f64> = theta0[..nb].to_vec();
    let mut p: Block = Vec::new();
    let mut history: Vec<Vec<f64>> = Vec::new();
    let mut best = f64::INFINITY;
    let mut last_progress = 0;
    let mut last_refactor = 0;
    let mut residuals = vec![f64::INFINITY; nb];

    for iter in 0..cap {
        let mut r: Block = Vec::with_capacity(nb);
        for j in 0..nb {
            let mut rj = kx[j].clone();
            let mut mnorm = 0.0;
            for i in 0..n {
                let mx = mass[i] * x[j][i];
                rj[i] -= theta[j] * mx;
                mnorm += mx * mx;
            }
            residuals[j] = (rj.iter().map(|v| v * v).sum::<f64>() / mnorm).sqrt();
            r.push(rj);
        }
        history.push(theta[..m].to_vec());
        let worst = residuals[..m].iter().fold(0.0f64, |a, b| a.max(*b));
        if (0..m).all(|j| within_tol(residuals[j], theta[j], tol)) {
            let pairs = (0..m).map(|j| (theta[j], x[j].clone())).collect();
            return Ok(finish(k, mass, pairs, iter, Method::Lobpcg, tol, history));
        }
        if worst < 0.9 * best {
            best = worst;
            last_progress = iter;
        } else if iter - last_progress >= options.stagnation_window {
            let start = x[0].clone();
            return lanczos_from(k, mass, m, options, pre, start, iter, history);
        }
        if iter >= last_refactor + 5 && residuals[0] < 1e-3 * theta[0].abs().max(1.0) && pre.retarget(k, mass, theta[0])
        {
            last_refactor = iter;
            p.clear();
        }

        let active: Vec<usize> = (0..nb).filter(|&j| !within_tol(residuals[j], theta[j], tol)).collect();
        let mut y: Block = active.iter().map(|&j| pre.apply(&r[j])).collect();
        y.extend(active.iter().filter(|&&j| j < p.len()).map(|&j| p[j].clone()));
        project_out(mass, &x, &mut y);
        let y = svqb(mass, &y, 1e-12);
        if y.is_empty() {
            let start = x[0].clone();
            return lanczos_from(k, mass, m, options, pre, start, iter, history);
        }
        let ky = apply_block(k, &y);
        let mut basis = x.clone();
        basis.extend(y.iter().cloned());
        let mut kbasis = kx.clone();
        kbasis.extend(ky.iter().cloned());
        let (vals, vecs) = rayleigh_ritz(&basis, &kbasis);
        let mut new_x = Vec::with_capacity(nb);
        let mut new_kx = Vec::with_capacity(nb);
        let mut new_p = Vec::with_capacity(nb);
        for c in vecs.iter().take(nb) {
            new_x.push(combine(&basis, c));
            new_kx.push(combine(&kbasis, c));
            new_p.push(combine(&y, &c[nb..]));
        }
        x = new_x;
        kx = new_kx;
        p = new_p;
        theta = vals[..nb].to_vec();
        if iter % 20 == 19 {
            let xo = svqb(mass, &x, 1e-14);
            if xo.len() == nb {
                let kxo = apply_block(k, &xo);
                let (t2, c2) = rayleigh_ritz(&xo, &kxo);
                x = c2.iter().map(|c| combine(&xo, c)).collect();
                kx = c2.iter().map(|c| combine(&kxo, c)).collect();
                theta = t2;
                p.clear();
            }
        }
    }
    let pairs = (0..m).map(|j| (theta[j], x[j].clone())).collect();
    let res = finish(k, mass, pairs, cap, Method::Lobpcg, tol, history);
    Err(Error::NotConverged(Box::new(res)))
}

/// Shift-invert Lanczos in the `M` inner product with full
/// reorthogonalization.
pub fn lanczos_eigs(k: &CsrMatrix, mass: &[f64], m: usize, options: &SpectrumOptions) -> Result<SpectrumResult> {
    let n = k.dim();
    if 3 * (m + 2) >= n {
        return Ok(dense_eigs(k, mass, m, false, options.tol));
    }
    let pre = Precond::new(k, mass, options.preconditioner);
    let start = random_block(n, 1, options.seed).pop().expect("one column");
    lanczos_from(k, mass, m, options, pre, start, 0, Vec::new())
}

#[allow(clippy::too_many_arguments)]
fn lanczos_from(
    k: &CsrMatrix,
    mass: &[f64],
    m: usize,
    options: &SpectrumOptions,
    mut pre: Precond,
    start: Vec<f64>,
    iterations_before: usize,
    mut history: Vec<Vec<f64>>,
) -> Result<SpectrumResult> {
    let n = k.dim();
    let tol = options.tol;
    let fallback_sigma = {
        let lb = gershgorin_lower_bound(k, mass);
        lb - 1e-3 * lb.abs().max(1.0)
    };
    let inner_tol = (tol * 1e-3).max(1e-15);
    let kmax = n.min((4 * m + 40).max(80));
    let restarts = 30;
    let mut q0 = start;
    let mut total = iterations_before;
    let mut last: Option<SpectrumResult> = None;
    for _ in 0..restarts {
        let solve = |v: &[f64]| -> Result<Vec<f64>> {
            let rhs: Vec<f64> = v.iter().zip(mass).map(|(a, w)| a * w).collect();
            match &pre.chol {
                Some(c) => Ok(c.solve(&rhs)),
                None => solve_shifted_matrices(k, mass, fallback_sigma, &rhs, inner_tol),
            }
        };
        let nrm = weighted_dot(mass, &q0, &q0).sqrt();
        if !(nrm > 0.0) {
            return Err(Error::ZeroVector);
        }
        let mut q: Block = vec![q0.iter().map(|v| v / nrm).collect()];
        let mut alpha: Vec<f64> = Vec::new();
        let mut beta: Vec<f64> = Vec::new();
        for j in 0..kmax {
            let mut w = solve(&q[j])?;
            total += 1;
            let a = weighted_dot(mass, &q[j], &w);
            alpha.push(a);
            for _ in 0..2 {
                for qi in &q {
                    let p = weighted_dot(mass, qi, &w);
                    for (x, y) in w.iter_mut().zip(qi) {
                        *x -= p * y;
                    }
                }
            }
            let b = weighted_dot(mass, &w, &w).sqrt();
            if j + 1 == kmax || b <= 1e-14 * a.abs().max(1e-300) {
                break;
            }
            beta.push(b);
            q.push(w.iter().map(|v| v / b).collect());
        }
        let dim = alpha.len();
        let t = SymTridiagonal::new(alpha.clone(), beta[..dim - 1].to_vec());
        let want = m.min(dim);
        let mut pairs = Vec::with_capacity(want);
        for idx in 0..want {
            let nu = t.eigenvalue(dim - 1 - idx);
            let y = t.eigenvector(nu);
            let mut u = combine(&q, &y);
            let un = weighted_dot(mass, &u, &u).sqrt();
            for v in u.iter_mut() {
                *v /= un;
            }
            let lambda = k.quadratic_form(&u);
            pairs.push((lambda, u));
        }
        history.push(pairs.iter().map(|p| p.0).collect());
        let ok = want == m && pairs.iter().all(|(l, u)| within_tol(residual_norm(k, mass, *l, u), *l, tol));
        let res = finish(k, mass, pairs, total, Method::Lanczos, tol, history.clone());
        if ok {
            return Ok(res);
        }
        pre.retarget(k, mass, res.eigenvalues[0]);
        q0 = vec![0.0; n];
        for u in &res.eigenvectors {
            for (a, b) in q0.iter_mut().zip(u) {
                *a += b;
            }
        }
        last = Some(res);
    }
    let mut res = last.expect("at least one restart");
    res.converged = false;
    Err(Error::NotConverged(Box::new(res)))
}
