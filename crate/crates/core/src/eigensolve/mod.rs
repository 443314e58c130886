//! Smallest eigenpairs of `K u = lambda M u` with `K` sparse symmetric
//! positive semidefinite and `M` diagonal positive, plus shifted solves.

mod direct;
mod iterative;

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
#[allow(unused_imports)]
use num_traits::Float;

use crate::discretize::DiscreteForm;
use crate::error::{Error, Result};
use crate::linalg::{dot, CsrMatrix};

pub use direct::{banded_eigs, dense_eigs, tridiagonal_eigs};
pub use iterative::{lanczos_eigs, lobpcg_eigs};

/// Problems up to this size are solved by the banded direct method when
/// [`Method::Auto`] is selected.
pub const DIRECT_LIMIT: usize = 2500;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum Method {
    Auto,
    /// Householder tridiagonalization and implicit QL on the dense matrix.
    Dense,
    /// Cyclic Jacobi on the dense matrix.
    Jacobi,
    Tridiagonal,
    /// Sturm bisection on `K - x M` and inverse iteration.
    Banded,
    Lobpcg,
    /// Shift-invert Lanczos.
    Lanczos,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Method::Auto => "auto",
            Method::Dense => "dense",
            Method::Jacobi => "jacobi",
            Method::Tridiagonal => "tridiagonal",
            Method::Banded => "banded",
            Method::Lobpcg => "lobpcg",
            Method::Lanczos => "lanczos",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum Preconditioner {
    /// Banded Cholesky factor of `K - sigma M`, `sigma` moved toward the
    /// lowest Ritz value as the iteration proceeds.
    ShiftedCholesky,
    /// Inverse diagonal of `K`.
    Diagonal,
}

#[derive(Debug, Clone, Copy)]
pub struct SpectrumOptions {
    pub method: Method,
    /// Bound on `|K u - lambda M u| / (|M u| max(1, |lambda|))`.
    pub tol: f64,
    pub seed: u64,
    /// Defaults to `10 sqrt(n)` for the iterative methods.
    pub max_iter: Option<usize>,
    pub preconditioner: Preconditioner,
    /// Iterations without residual progress before falling back to Lanczos.
    pub stagnation_window: usize,
}

impl Default for SpectrumOptions {
    fn default() -> Self {
        Self {
            method: Method::Auto,
            tol: 1e-9,
            seed: 0,
            max_iter: None,
            preconditioner: Preconditioner::ShiftedCholesky,
            stagnation_window: 50,
        }
    }
}

impl SpectrumOptions {
    pub fn with_method(method: Method) -> Self {
        Self { method, ..Self::default() }
    }
}

/// Eigenpairs in ascending order with `M`-orthonormal vectors.
#[derive(Debug, Clone)]
pub struct SpectrumResult {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: Vec<Vec<f64>>,
    pub residuals: Vec<f64>,
    pub iterations: usize,
    pub solver: Method,
    pub converged: bool,
    /// Wanted Ritz values after each iteration of an iterative solver.
    pub ritz_history: Vec<Vec<f64>>,
}

impl SpectrumResult {
    pub fn lowest(&self) -> f64 {
        self.eigenvalues[0]
    }

    pub fn max_residual(&self) -> f64 {
        self.residuals.iter().fold(0.0, |m, r| m.max(*r))
    }
}

/// Residual test relative to the eigenvalue scale.
#[inline]
pub(crate) fn within_tol(residual: f64, lambda: f64, tol: f64) -> bool {
    residual <= tol * lambda.abs().max(1.0)
}

/// `|K u - lambda M u| / |M u|`.
pub fn residual_norm(k: &CsrMatrix, mass: &[f64], lambda: f64, u: &[f64]) -> f64 {
    let ku = k.apply(u);
    let mut num = 0.0;
    let mut den = 0.0;
    for i in 0..u.len() {
        let mu = mass[i] * u[i];
        let r = ku[i] - lambda * mu;
        num += r * r;
        den += mu * mu;
    }
    (num / den).sqrt()
}

/// Gershgorin lower bound for the spectrum of `M^{-1} K`.
pub fn gershgorin_lower_bound(k: &CsrMatrix, mass: &[f64]) -> f64 {
    (0..k.dim())
        .map(|i| {
            let mut centre = 0.0;
            let mut radius = 0.0;
            for (j, v) in k.row(i) {
                if j == i {
                    centre += v;
                } else {
                    radius += v.abs();
                }
            }
            (centre - radius) / mass[i]
        })
        .fold(f64::INFINITY, f64::min)
}

fn gershgorin_upper_bound(k: &CsrMatrix, mass: &[f64]) -> f64 {
    (0..k.dim()).map(|i| k.row(i).map(|(_, v)| v.abs()).sum::<f64>() / mass[i]).fold(f64::NEG_INFINITY, f64::max)
}

fn check_mass(mass: &[f64]) -> Result<()> {
    for (i, m) in mass.iter().enumerate() {
        if !(*m > 0.0) || !m.is_finite() {
            return Err(Error::NonPositiveMass { index: i, value: *m });
        }
    }
    Ok(())
}

/// Flips each vector so that its largest-magnitude entry is positive.
pub(crate) fn fix_sign(u: &mut [f64]) {
    let mut best = 0;
    for (i, v) in u.iter().enumerate() {
        if v.abs() > u[best].abs() + 1e-14 * u[best].abs() {
            best = i;
        }
    }
    if u.get(best).is_some_and(|v| *v < 0.0) {
        for v in u.iter_mut() {
            *v = -*v;
        }
    }
}

pub(crate) fn finish(
    k: &CsrMatrix,
    mass: &[f64],
    mut pairs: Vec<(f64, Vec<f64>)>,
    iterations: usize,
    solver: Method,
    tol: f64,
    ritz_history: Vec<Vec<f64>>,
) -> SpectrumResult {
    pairs.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap_or(core::cmp::Ordering::Equal));
    let mut eigenvalues = Vec::with_capacity(pairs.len());
    let mut eigenvectors = Vec::with_capacity(pairs.len());
    let mut residuals = Vec::with_capacity(pairs.len());
    for (lambda, mut u) in pairs {
        fix_sign(&mut u);
        residuals.push(residual_norm(k, mass, lambda, &u));
        eigenvalues.push(lambda);
        eigenvectors.push(u);
    }
    let converged = residuals.iter().zip(&eigenvalues).all(|(r, l)| within_tol(*r, *l, tol));
    SpectrumResult { eigenvalues, eigenvectors, residuals, iterations, solver, converged, ritz_history }
}

/// The `m` smallest eigenpairs of `(K, diag(mass))`.
pub fn smallest_eigs_matrices(
    k: &CsrMatrix,
    mass: &[f64],
    m: usize,
    options: &SpectrumOptions,
) -> Result<SpectrumResult> {
    let n = k.dim();
    if mass.len() != n {
        return Err(Error::DimensionMismatch { expected: n, got: mass.len() });
    }
    check_mass(mass)?;
    if m == 0 || m > n {
        return Err(Error::OutOfRange { what: "number of eigenpairs", value: m as f64, limit: n as f64 });
    }
    if !(options.tol > 0.0) {
        return Err(Error::NonPositive { name: "tol", value: options.tol });
    }
    let method = match options.method {
        Method::Auto => {
            if k.bandwidth() <= 1 {
                Method::Tridiagonal
            } else if n <= DIRECT_LIMIT {
                Method::Banded
            } else {
                Method::Lobpcg
            }
        }
        other => other,
    };
    match method {
        Method::Dense | Method::Jacobi => Ok(dense_eigs(k, mass, m, method == Method::Jacobi, options.tol)),
        Method::Tridiagonal => {
            if k.bandwidth() > 1 {
                return Err(Error::OutOfRange { what: "bandwidth", value: k.bandwidth() as f64, limit: 1.0 });
            }
            Ok(tridiagonal_eigs(k, mass, m, options.tol))
        }
        Method::Banded => Ok(banded_eigs(k, mass, m, options)),
        Method::Lobpcg => lobpcg_eigs(k, mass, m, options),
        Method::Lanczos => lanczos_eigs(k, mass, m, options),
        Method::Auto => unreachable!("resolved above"),
    }
}

/// The `m` smallest eigenpairs of a discrete form with default options.
pub fn smallest_eigs(form: &DiscreteForm, m: usize, tol: f64, seed: u64) -> Result<SpectrumResult> {
    let options = SpectrumOptions { tol, seed, ..SpectrumOptions::default() };
    smallest_eigs_matrices(&form.stiffness, &form.mass, m, &options)
}

pub fn smallest_eigs_with(form: &DiscreteForm, m: usize, options: &SpectrumOptions) -> Result<SpectrumResult> {
    smallest_eigs_matrices(&form.stiffness, &form.mass, m, options)
}

/// Smallest eigenvalue of `(K, M)` with default options.
pub fn lowest_eigenvalue(form: &DiscreteForm) -> Result<f64> {
    smallest_eigs(form, 1, 1e-9, 0).map(|r| r.eigenvalues[0])
}

/// `u^T K u / u^T M u`.
pub fn rayleigh_quotient(form: &DiscreteForm, u: &[f64]) -> Result<f64> {
    if u.len() != form.dim() {
        return Err(Error::DimensionMismatch { expected: form.dim(), got: u.len() });
    }
    let den: f64 = u.iter().zip(&form.mass).map(|(x, m)| m * x * x).sum();
    if den == 0.0 {
        return Err(Error::ZeroVector);
    }
    Ok(form.stiffness.quadratic_form(u) / den)
}

/// Solves `(K - z M) u = rhs` by conjugate gradients with Jacobi
/// preconditioning; `z` must lie below the spectrum.
pub fn solve_shifted(form: &DiscreteForm, z: f64, rhs: &[f64], tol: f64) -> Result<Vec<f64>> {
    solve_shifted_matrices(&form.stiffness, &form.mass, z, rhs, tol)
}

pub fn solve_shifted_matrices(k: &CsrMatrix, mass: &[f64], z: f64, rhs: &[f64], tol: f64) -> Result<Vec<f64>> {
    let n = k.dim();
    if rhs.len() != n || mass.len() != n {
        return Err(Error::DimensionMismatch { expected: n, got: rhs.len() });
    }
    check_mass(mass)?;
    let bnorm = dot(rhs, rhs).sqrt();
    if bnorm == 0.0 {
        return Ok(vec![0.0; n]);
    }
    let diag: Vec<f64> = k.diagonal().iter().zip(mass).map(|(d, m)| d - z * m).collect();
    if let Some(i) = diag.iter().position(|d| !(*d > 0.0)) {
        return Err(Error::IndefiniteShift { iteration: 0, curvature: diag[i] });
    }
    let apply = |x: &[f64]| -> Vec<f64> {
        let mut y = k.apply(x);
        for i in 0..n {
            y[i] -= z * mass[i] * x[i];
        }
        y
    };
    let max_iter = (10 * n).max(1000);
    let mut x = vec![0.0; n];
    let mut r = rhs.to_vec();
    let mut zv: Vec<f64> = r.iter().zip(&diag).map(|(a, d)| a / d).collect();
    let mut p = zv.clone();
    let mut rz = dot(&r, &zv);
    for it in 0..max_iter {
        let ap = apply(&p);
        let curv = dot(&p, &ap);
        if !(curv > 0.0) {
            return Err(Error::IndefiniteShift { iteration: it, curvature: curv / dot(&p, &p) });
        }
        let alpha = rz / curv;
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        if dot(&r, &r).sqrt() <= tol * bnorm {
            return Ok(x);
        }
        for i in 0..n {
            zv[i] = r[i] / diag[i];
        }
        let rz_new = dot(&r, &zv);
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..n {
            p[i] = zv[i] + beta * p[i];
        }
    }
    Err(Error::CgStalled { iterations: max_iter, relative_residual: dot(&r, &r).sqrt() / bnorm })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::discretize::{EndCondition, Layout, Mesh1D};
    use crate::linalg::TripletBuilder;
    use core::f64::consts::PI;

    fn laplacian_1d(n: usize) -> DiscreteForm {
        let mesh = Mesh1D::new(-1.0, 1.0, n).unwrap();
        let h = mesh.h();
        let mut b = TripletBuilder::new(n);
        for i in 0..n {
            b.add(i, i, 2.0 / h);
            if i + 1 < n {
                b.add(i, i + 1, -1.0 / h);
                b.add(i + 1, i, -1.0 / h);
            }
        }
        DiscreteForm {
            stiffness: b.build(),
            mass: vec![h; n],
            end: EndCondition::Dirichlet,
            layout: Layout::Line(mesh),
        }
    }

    #[test]
    fn one_dimensional_laplacian() {
        let form = laplacian_1d(999);
        let r = smallest_eigs(&form, 3, 1e-9, 1).unwrap();
        assert_eq!(r.solver, Method::Tridiagonal);
        assert!((r.eigenvalues[0] - PI * PI / 4.0).abs() < 1e-5);
        assert!(r.converged);
        for method in [Method::Banded, Method::Lobpcg, Method::Lanczos] {
            let o = SpectrumOptions { method, seed: 3, ..SpectrumOptions::default() };
            let q = smallest_eigs_with(&laplacian_1d(199), 3, &o).unwrap();
            let d = smallest_eigs_with(&laplacian_1d(199), 3, &SpectrumOptions::with_method(Method::Dense)).unwrap();
            for (x, y) in q.eigenvalues.iter().zip(&d.eigenvalues) {
                assert!((x - y).abs() < 1e-8 * y, "{method}: {x} vs {y}");
            }
        }
    }

    #[test]
    fn identity_problem() {
        let n = 40;
        let form = DiscreteForm {
            stiffness: CsrMatrix::identity(n),
            mass: vec![1.0; n],
            end: EndCondition::Dirichlet,
            layout: Layout::Line(Mesh1D::new(0.0, 1.0, n).unwrap()),
        };
        for method in [Method::Auto, Method::Dense, Method::Banded, Method::Lobpcg] {
            let r = smallest_eigs_with(&form, 4, &SpectrumOptions::with_method(method)).unwrap();
            assert!(r.eigenvalues.iter().all(|v| (v - 1.0).abs() < 1e-12));
            assert!(r.residuals.iter().all(|v| *v < 1e-12));
            for i in 0..4 {
                for j in 0..4 {
                    let d = dot(&r.eigenvectors[i], &r.eigenvectors[j]);
                    assert!((d - if i == j { 1.0 } else { 0.0 }).abs() < 1e-10, "{method}");
                }
            }
        }
    }

    #[test]
    fn rayleigh_and_shifted_solve() {
        let form = laplacian_1d(99);
        assert!(matches!(rayleigh_quotient(&form, &vec![0.0; 99]), Err(Error::ZeroVector)));
        let r = smallest_eigs(&form, 1, 1e-10, 0).unwrap();
        let v = &r.eigenvectors[0];
        assert!((rayleigh_quotient(&form, v).unwrap() - r.eigenvalues[0]).abs() < 1e-12);
        let z = -3.0;
        let rhs = form.apply_mass(v);
        let u = solve_shifted(&form, z, &rhs, 1e-12).unwrap();
        for (a, b) in u.iter().zip(v) {
            assert!((a - b / (r.eigenvalues[0] - z)).abs() < 1e-9);
        }
        assert_eq!(solve_shifted(&form, z, &vec![0.0; 99], 1e-12).unwrap(), vec![0.0; 99]);
        assert!(matches!(solve_shifted(&form, 5.0, &rhs, 1e-12), Err(Error::IndefiniteShift { .. })));
    }

    #[test]
    fn rejects_bad_mass() {
        let mut form = laplacian_1d(10);
        form.mass[3] = 0.0;
        assert!(matches!(smallest_eigs(&form, 1, 1e-9, 0), Err(Error::NonPositiveMass { index: 3, .. })));
    }
}
