//! Symmetric tridiagonal eigenvalues by Sturm-sequence bisection and
//! eigenvectors by inverse iteration.

use alloc::vec;
use alloc::vec::Vec;
#[allow(unused_imports)]
use num_traits::Float;

/// Symmetric tridiagonal matrix with diagonal `diag` and off-diagonal `off`
/// (`off.len() == diag.len() - 1`).
#[derive(Debug, Clone)]
pub struct SymTridiagonal {
    pub diag: Vec<f64>,
    pub off: Vec<f64>,
}

impl SymTridiagonal {
    pub fn new(diag: Vec<f64>, off: Vec<f64>) -> Self {
        assert_eq!(off.len() + 1, diag.len().max(1));
        Self { diag, off }
    }

    pub fn dim(&self) -> usize {
        self.diag.len()
    }

    /// Number of eigenvalues strictly below `x`.
    pub fn count_below(&self, x: f64) -> usize {
        let mut count = 0;
        let mut q = 1.0;
        for i in 0..self.dim() {
            let b2 = if i == 0 { 0.0 } else { self.off[i - 1] * self.off[i - 1] };
            q = self.diag[i] - x - if i == 0 { 0.0 } else { b2 / q };
            if q == 0.0 {
                q = -f64::MIN_POSITIVE.sqrt() * (1.0 + x.abs());
            }
            if q < 0.0 {
                count += 1;
            }
        }
        count
    }

    fn gershgorin(&self) -> (f64, f64) {
        let n = self.dim();
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for i in 0..n {
            let r = if i > 0 { self.off[i - 1].abs() } else { 0.0 } + if i + 1 < n { self.off[i].abs() } else { 0.0 };
            lo = lo.min(self.diag[i] - r);
            hi = hi.max(self.diag[i] + r);
        }
        (lo, hi)
    }

    /// The `k`-th smallest eigenvalue (0-based), bisected to machine precision.
    pub fn eigenvalue(&self, k: usize) -> f64 {
        let (mut lo, mut hi) = self.gershgorin();
        let span = (hi - lo).abs().max(1e-300);
        lo -= 1e-12 * span;
        hi += 1e-12 * span;
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if self.count_below(mid) > k {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        0.5 * (lo + hi)
    }

    /// Unit eigenvector for an (accurate) eigenvalue `lambda`.
    pub fn eigenvector(&self, lambda: f64) -> Vec<f64> {
        let n = self.dim();
        let scale = self.diag.iter().chain(&self.off).fold(0.0f64, |m, v| m.max(v.abs())).max(1e-300);
        let shift = lambda + 1e-13 * scale;
        let mut x = vec![1.0; n];
        for (i, xi) in x.iter_mut().enumerate() {
            *xi += 1e-3 * ((i * 37 % 17) as f64);
        }
        for _ in 0..3 {
            x = self.solve_shifted(shift, &x);
            let nrm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
            for v in &mut x {
                *v /= nrm;
            }
        }
        // fix sign so the largest component is positive
        let imax = x
            .iter()
            .enumerate()
            .fold((0, 0.0f64), |(bi, bv), (i, v)| if v.abs() > bv { (i, v.abs()) } else { (bi, bv) })
            .0;
        if x[imax] < 0.0 {
            for v in &mut x {
                *v = -*v;
            }
        }
        x
    }

    /// Solves `(T - sigma I) x = b` by Gaussian elimination with partial pivoting.
    pub fn solve_shifted(&self, sigma: f64, b: &[f64]) -> Vec<f64> {
        let n = self.dim();
        if n == 1 {
            let d = self.diag[0] - sigma;
            let d = if d == 0.0 { f64::EPSILON } else { d };
            return vec![b[0] / d];
        }
        // rows stored as (sub, diag, sup, sup2) after pivoting
        let mut dl = vec![0.0; n];
        let mut dd: Vec<f64> = self.diag.iter().map(|d| d - sigma).collect();
        let mut du = vec![0.0; n];
        let mut du2 = vec![0.0; n];
        dl[1..n].copy_from_slice(&self.off);
        du[..n - 1].copy_from_slice(&self.off);
        let mut x = b.to_vec();
        for i in 0..n - 1 {
            if dd[i].abs() >= dl[i + 1].abs() {
                let piv = if dd[i] == 0.0 { f64::EPSILON } else { dd[i] };
                dd[i] = piv;
                let f = dl[i + 1] / piv;
                dd[i + 1] -= f * du[i];
                if i + 1 < n - 1 {
                    du[i + 1] -= f * du2[i];
                }
                x[i + 1] -= f * x[i];
                dl[i + 1] = 0.0;
            } else {
                let f = dd[i] / dl[i + 1];
                dd[i] = dl[i + 1];
                let tmp = dd[i + 1];
                dd[i + 1] = du[i] - f * tmp;
                if i + 1 < n - 1 {
                    du2[i] = du[i + 1];
                    du[i + 1] = -f * du2[i];
                }
                du[i] = tmp;
                x.swap(i, i + 1);
                x[i + 1] -= f * x[i];
            }
        }
        if dd[n - 1] == 0.0 {
            dd[n - 1] = f64::EPSILON;
        }
        x[n - 1] /= dd[n - 1];
        x[n - 2] = (x[n - 2] - du[n - 2] * x[n - 1]) / dd[n - 2];
        for i in (0..n.saturating_sub(2)).rev() {
            x[i] = (x[i] - du[i] * x[i + 1] - du2[i] * x[i + 2]) / dd[i];
        }
        x
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use core::f64::consts::PI;

    #[test]
    fn bisection_matches_closed_form() {
        let n = 500;
        let t = SymTridiagonal::new(vec![2.0; n], vec![-1.0; n - 1]);
        for k in [0, 1, 7, n - 1] {
            let exact = 2.0 - 2.0 * ((k + 1) as f64 * PI / (n + 1) as f64).cos();
            assert!((t.eigenvalue(k) - exact).abs() < 1e-13);
        }
    }

    #[test]
    fn inverse_iteration_gives_sine_mode() {
        let n = 64;
        let t = SymTridiagonal::new(vec![2.0; n], vec![-1.0; n - 1]);
        let lam = t.eigenvalue(0);
        let v = t.eigenvector(lam);
        let norm: f64 = (0..n).map(|i| ((i + 1) as f64 * PI / (n + 1) as f64).sin().powi(2)).sum::<f64>().sqrt();
        for (i, vi) in v.iter().enumerate() {
            let exact = ((i + 1) as f64 * PI / (n + 1) as f64).sin() / norm;
            assert!((vi - exact).abs() < 1e-10);
        }
    }

    #[test]
    fn pivoting_solver_handles_zero_diagonal() {
        let t = SymTridiagonal::new(vec![0.0, 0.0, 0.0], vec![1.0, 1.0]);
        let x = t.solve_shifted(0.0, &[1.0, 2.0, 1.0]);
        // [[0,1,0],[1,0,1],[0,1,0]] x = b has solutions with x1 = 1, x0 + x2 = 2
        assert!((x[1] - 1.0).abs() < 1e-12);
    }
}
