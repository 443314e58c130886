use alloc::vec;
use alloc::vec::Vec;
#[allow(unused_imports)]
use num_traits::Float;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{finish, gershgorin_lower_bound, gershgorin_upper_bound, Method, SpectrumOptions, SpectrumResult};
use crate::linalg::dense::{jacobi_eigen, symmetric_eigen};
use crate::linalg::tridiag::SymTridiagonal;
use crate::linalg::{band_inertia, weighted_dot, BandLu, CsrMatrix};

/// Dense eigensolve of `M^{-1/2} K M^{-1/2}`; the brute-force reference.
pub fn dense_eigs(k: &CsrMatrix, mass: &[f64], m: usize, jacobi: bool, tol: f64) -> SpectrumResult {
    let n = k.dim();
    let scale: Vec<f64> = mass.iter().map(|v| 1.0 / v.sqrt()).collect();
    let mut a = vec![0.0; n * n];
    for (i, j, v) in k.triplets() {
        a[i * n + j] += v * scale[i] * scale[j];
    }
    let eig = if jacobi { jacobi_eigen(n, &a) } else { symmetric_eigen(n, &a) };
    let pairs = eig
        .values
        .into_iter()
        .zip(eig.vectors)
        .take(m)
        .map(|(l, y)| (l, y.iter().zip(&scale).map(|(a, b)| a * b).collect()))
        .collect();
    finish(k, mass, pairs, 0, if jacobi { Method::Jacobi } else { Method::Dense }, tol, Vec::new())
}

pub fn tridiagonal_eigs(k: &CsrMatrix, mass: &[f64], m: usize, tol: f64) -> SpectrumResult {
    let n = k.dim();
    let scale: Vec<f64> = mass.iter().map(|v| 1.0 / v.sqrt()).collect();
    let diag = (0..n).map(|i| k.get(i, i) * scale[i] * scale[i]).collect();
    let off = (0..n.saturating_sub(1)).map(|i| k.get(i, i + 1) * scale[i] * scale[i + 1]).collect();
    let t = SymTridiagonal::new(diag, off);
    let mut pairs: Vec<(f64, Vec<f64>)> = Vec::with_capacity(m);
    for idx in 0..m {
        let lambda = t.eigenvalue(idx);
        let cluster: Vec<Vec<f64>> = pairs
            .iter()
            .filter(|(mu, _)| (mu - lambda).abs() <= 1e-10 * lambda.abs().max(1.0))
            .map(|(_, u)| u.iter().zip(mass).map(|(a, w)| a * w.sqrt()).collect())
            .collect();
        let mut y = if cluster.is_empty() {
            t.eigenvector(lambda)
        } else {
            // numerically repeated eigenvalue: inverse iteration from a fresh
            // start, orthogonalized against the earlier members
            let mut rng = ChaCha8Rng::seed_from_u64(idx as u64);
            let mut y: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
            for _ in 0..3 {
                y = t.solve_shifted(lambda, &y);
                for prev in &cluster {
                    let p: f64 = y.iter().zip(prev).map(|(a, b)| a * b).sum();
                    for (a, b) in y.iter_mut().zip(prev) {
                        *a -= p * b;
                    }
                }
                let nrm = y.iter().map(|v| v * v).sum::<f64>().sqrt();
                y.iter_mut().for_each(|v| *v /= nrm);
            }
            y
        };
        if y.iter().any(|v| !v.is_finite()) {
            y = vec![0.0; n];
            y[idx] = 1.0;
        }
        let nrm = y.iter().map(|v| v * v).sum::<f64>().sqrt();
        let u = y.iter().zip(&scale).map(|(a, b)| a / nrm * b).collect();
        pairs.push((lambda, u));
    }
    finish(k, mass, pairs, 0, Method::Tridiagonal, tol, Vec::new())
}

/// Sturm-count bisection on the pencil `(K, M)` using banded `L D L^T`
/// inertia, then inverse iteration with a pivoted banded LU and a final
/// Rayleigh quotient.
pub fn banded_eigs(k: &CsrMatrix, mass: &[f64], m: usize, options: &SpectrumOptions) -> SpectrumResult {
    let n = k.dim();
    let lo0 = gershgorin_lower_bound(k, mass);
    let hi0 = gershgorin_upper_bound(k, mass);
    let span = (hi0 - lo0).abs().max(f64::MIN_POSITIVE);
    let (lo0, hi0) = (lo0 - 1e-9 * span, hi0 + 1e-9 * span);
    let mut estimates = Vec::with_capacity(m);
    let mut lo = lo0;
    for idx in 0..m {
        let mut a = lo;
        let mut b = hi0;
        while b - a > 1e-9 * a.abs().max(b.abs()).max(1e-300) {
            let mid = 0.5 * (a + b);
            if mid <= a || mid >= b {
                break;
            }
            if band_inertia(k, mid, mass) > idx {
                b = mid;
            } else {
                a = mid;
            }
        }
        estimates.push(0.5 * (a + b));
        lo = a;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(options.seed);
    let mut pairs: Vec<(f64, Vec<f64>)> = Vec::with_capacity(m);
    let mut solves = 0;
    for (idx, &est) in estimates.iter().enumerate() {
        let shift = est + 1e-12 * est.abs().max(1e-12) * (1.0 + idx as f64);
        let lu = BandLu::factor_shifted(k, shift, mass);
        let cluster: Vec<usize> =
            (0..idx).filter(|&j| (estimates[j] - est).abs() <= 1e-7 * est.abs().max(1.0)).collect();
        let mut u: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let mut lambda = est;
        for _ in 0..4 {
            let rhs: Vec<f64> = u.iter().zip(mass).map(|(a, w)| a * w).collect();
            u = lu.solve(&rhs);
            solves += 1;
            for &j in &cluster {
                let p = weighted_dot(mass, &u, &pairs[j].1);
                for (a, b) in u.iter_mut().zip(&pairs[j].1) {
                    *a -= p * b;
                }
            }
            let nrm = weighted_dot(mass, &u, &u).sqrt();
            for v in u.iter_mut() {
                *v /= nrm;
            }
            lambda = k.quadratic_form(&u);
        }
        pairs.push((lambda, u));
    }
    finish(k, mass, pairs, solves, Method::Banded, options.tol, Vec::new())
}
