use alloc::vec;
use alloc::vec::Vec;
#[allow(unused_imports)]
use num_traits::Float;

use super::CsrMatrix;

/// Cholesky factor `L` of a symmetric positive definite banded matrix,
/// stored row-wise as the `bw + 1` entries `L[i][i-bw..=i]`.
#[derive(Debug, Clone)]
pub struct BandCholesky {
    n: usize,
    bw: usize,
    l: Vec<f64>,
}

impl BandCholesky {
    /// Factors `A - shift * diag(mass)`. Returns `None` when the shifted
    /// matrix is not positive definite (a pivot is not positive).
    pub fn factor_shifted(a: &CsrMatrix, shift: f64, mass: &[f64]) -> Option<Self> {
        let n = a.dim();
        let bw = a.bandwidth();
        let w = bw + 1;
        let mut l = vec![0.0; n * w];
        // band storage: l[i*w + (j + bw - i)] holds entry (i, j) for i-bw <= j <= i
        for (i, j, v) in a.triplets() {
            if j <= i {
                l[i * w + (j + bw - i)] += v;
            }
        }
        for (i, m) in mass.iter().enumerate() {
            l[i * w + bw] -= shift * m;
        }
        for i in 0..n {
            let lo = i.saturating_sub(bw);
            for j in lo..=i {
                let klo = lo.max(j.saturating_sub(bw));
                let mut s = l[i * w + (j + bw - i)];
                for k in klo..j {
                    s -= l[i * w + (k + bw - i)] * l[j * w + (k + bw - j)];
                }
                if j == i {
                    if !(s > 0.0) || !s.is_finite() {
                        return None;
                    }
                    l[i * w + bw] = s.sqrt();
                } else {
                    l[i * w + (j + bw - i)] = s / l[j * w + bw];
                }
            }
        }
        Some(Self { n, bw, l })
    }

    pub fn factor(a: &CsrMatrix) -> Option<Self> {
        Self::factor_shifted(a, 0.0, &vec![0.0; a.dim()])
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn bandwidth(&self) -> usize {
        self.bw
    }

    /// Solves `L L^T x = b` in place.
    pub fn solve_in_place(&self, x: &mut [f64]) {
        let (n, bw, w) = (self.n, self.bw, self.bw + 1);
        for i in 0..n {
            let lo = i.saturating_sub(bw);
            let mut s = x[i];
            for k in lo..i {
                s -= self.l[i * w + (k + bw - i)] * x[k];
            }
            x[i] = s / self.l[i * w + bw];
        }
        for i in (0..n).rev() {
            x[i] /= self.l[i * w + bw];
            let xi = x[i];
            let lo = i.saturating_sub(bw);
            for k in lo..i {
                x[k] -= self.l[i * w + (k + bw - i)] * xi;
            }
        }
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let mut x = b.to_vec();
        self.solve_in_place(&mut x);
        x
    }
}

/// Number of negative pivots in the `L D L^T` factorization (no pivoting)
/// of `A - shift * diag(mass)`, i.e. the number of eigenvalues of the
/// pencil `(A, diag(mass))` below `shift`.
pub fn band_inertia(a: &CsrMatrix, shift: f64, mass: &[f64]) -> usize {
    let n = a.dim();
    let bw = a.bandwidth();
    let w = bw + 1;
    let mut l = vec![0.0; n * w];
    for (i, j, v) in a.triplets() {
        if j <= i {
            l[i * w + (j + bw - i)] += v;
        }
    }
    for (i, m) in mass.iter().enumerate() {
        l[i * w + bw] -= shift * m;
    }
    let scale = l.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(f64::MIN_POSITIVE);
    let tiny = f64::EPSILON * f64::EPSILON * scale;
    let mut d = vec![0.0; n];
    let mut negatives = 0;
    // row i holds L[i][k] (k < i) after processing; scratch t_k = L[i][k] d_k
    let mut t = vec![0.0; w];
    for i in 0..n {
        let lo = i.saturating_sub(bw);
        for j in lo..i {
            let klo = lo.max(j.saturating_sub(bw));
            let mut s = l[i * w + (j + bw - i)];
            for k in klo..j {
                s -= t[k + bw - i] * l[j * w + (k + bw - j)];
            }
            t[j + bw - i] = s;
            l[i * w + (j + bw - i)] = s / d[j];
        }
        let mut s = l[i * w + bw];
        for k in lo..i {
            s -= t[k + bw - i] * l[i * w + (k + bw - i)];
        }
        if s.abs() < tiny {
            s = -tiny;
        }
        d[i] = s;
        if s < 0.0 {
            negatives += 1;
        }
    }
    negatives
}

/// LU factorization with partial pivoting of a banded (not necessarily
/// definite) matrix `A - shift * diag(mass)`.
#[derive(Debug, Clone)]
pub struct BandLu {
    n: usize,
    bw: usize,
    /// Row `i` stores columns `i - bw ..= i + 2 bw`.
    u: Vec<f64>,
    mult: Vec<f64>,
    piv: Vec<usize>,
}

impl BandLu {
    pub fn factor_shifted(a: &CsrMatrix, shift: f64, mass: &[f64]) -> Self {
        let n = a.dim();
        let bw = a.bandwidth();
        let w = 3 * bw + 1;
        let at = |i: usize, j: usize| i * w + (j + bw - i);
        let mut u = vec![0.0; n * w];
        for (i, j, v) in a.triplets() {
            u[at(i, j)] += v;
        }
        for (i, m) in mass.iter().enumerate() {
            u[at(i, i)] -= shift * m;
        }
        let scale = u.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(f64::MIN_POSITIVE);
        let mut mult = vec![0.0; n * bw.max(1)];
        let mut piv = vec![0; n];
        for k in 0..n {
            let last = (k + bw).min(n - 1);
            let mut p = k;
            for r in k + 1..=last {
                if u[at(r, k)].abs() > u[at(p, k)].abs() {
                    p = r;
                }
            }
            piv[k] = p;
            let hi = (k + 2 * bw).min(n - 1);
            if p != k {
                for j in k..=hi {
                    u.swap(at(k, j), at(p, j));
                }
            }
            if u[at(k, k)] == 0.0 {
                u[at(k, k)] = f64::EPSILON * scale;
            }
            let pivot = u[at(k, k)];
            for r in k + 1..=last {
                let f = u[at(r, k)] / pivot;
                mult[k * bw.max(1) + (r - k - 1)] = f;
                u[at(r, k)] = 0.0;
                if f != 0.0 {
                    for j in k + 1..=hi {
                        let delta = f * u[at(k, j)];
                        u[at(r, j)] -= delta;
                    }
                }
            }
        }
        Self { n, bw, u, mult, piv }
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let (n, bw) = (self.n, self.bw);
        let w = 3 * bw + 1;
        let at = |i: usize, j: usize| i * w + (j + bw - i);
        let mut x = b.to_vec();
        for k in 0..n {
            x.swap(k, self.piv[k]);
            let last = (k + bw).min(n - 1);
            for r in k + 1..=last {
                x[r] -= self.mult[k * bw.max(1) + (r - k - 1)] * x[k];
            }
        }
        for i in (0..n).rev() {
            let hi = (i + 2 * bw).min(n - 1);
            let mut s = x[i];
            for j in i + 1..=hi {
                s -= self.u[at(i, j)] * x[j];
            }
            x[i] = s / self.u[at(i, i)];
        }
        x
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::TripletBuilder;

    fn laplacian(n: usize) -> CsrMatrix {
        let mut b = TripletBuilder::new(n);
        for i in 0..n {
            b.add(i, i, 2.0);
            if i + 1 < n {
                b.add(i, i + 1, -1.0);
                b.add(i + 1, i, -1.0);
            }
        }
        b.build()
    }

    #[test]
    fn solves_tridiagonal_system() {
        let a = laplacian(50);
        let f = BandCholesky::factor(&a).unwrap();
        let x_true: Vec<f64> = (0..50).map(|i| (i as f64 * 0.3).sin()).collect();
        let b = a.apply(&x_true);
        let x = f.solve(&b);
        for (u, v) in x.iter().zip(&x_true) {
            assert!((u - v).abs() < 1e-10);
        }
    }

    #[test]
    fn detects_indefinite_shift() {
        let a = laplacian(20);
        let mass = vec![1.0; 20];
        // lowest eigenvalue is 2 - 2 cos(pi/21) ~ 0.0223
        assert!(BandCholesky::factor_shifted(&a, 0.02, &mass).is_some());
        assert!(BandCholesky::factor_shifted(&a, 0.03, &mass).is_none());
    }

    #[test]
    fn wide_band_matches_dense_solution() {
        // 2D 5-point Laplacian, bandwidth = nx
        let (nx, ny) = (6, 7);
        let n = nx * ny;
        let mut b = TripletBuilder::new(n);
        for i in 0..ny {
            for j in 0..nx {
                let p = i * nx + j;
                b.add(p, p, 4.5);
                if j + 1 < nx {
                    b.add(p, p + 1, -1.0);
                    b.add(p + 1, p, -1.0);
                }
                if i + 1 < ny {
                    b.add(p, p + nx, -1.0);
                    b.add(p + nx, p, -1.0);
                }
            }
        }
        let a = b.build();
        let f = BandCholesky::factor(&a).unwrap();
        assert_eq!(f.bandwidth(), nx);
        let rhs: Vec<f64> = (0..n).map(|i| 1.0 + (i % 5) as f64).collect();
        let x = f.solve(&rhs);
        let r = a.apply(&x);
        for (u, v) in r.iter().zip(&rhs) {
            assert!((u - v).abs() < 1e-11);
        }
    }

    #[test]
    fn inertia_counts_eigenvalues_below_shift() {
        let a = laplacian(30);
        let mass = vec![1.0; 30];
        for x in [0.0, 0.5, 1.3, 2.0, 3.9, 5.0] {
            let exact = (1..=30).filter(|k| 2.0 - 2.0 * (*k as f64 * core::f64::consts::PI / 31.0).cos() < x).count();
            assert_eq!(band_inertia(&a, x, &mass), exact);
        }
    }

    #[test]
    fn pivoted_lu_solves_indefinite_system() {
        let (nx, ny) = (5, 6);
        let n = nx * ny;
        let mut b = TripletBuilder::new(n);
        for i in 0..ny {
            for j in 0..nx {
                let p = i * nx + j;
                b.add(p, p, 4.0);
                if j + 1 < nx {
                    b.add(p, p + 1, -1.0);
                    b.add(p + 1, p, -1.0);
                }
                if i + 1 < ny {
                    b.add(p, p + nx, -1.0);
                    b.add(p + nx, p, -1.0);
                }
            }
        }
        let a = b.build();
        let mass = vec![1.0; n];
        let lu = BandLu::factor_shifted(&a, 3.7, &mass);
        let rhs: Vec<f64> = (0..n).map(|i| ((i * 7) % 5) as f64 - 2.0).collect();
        let x = lu.solve(&rhs);
        let r = a.apply(&x);
        for i in 0..n {
            assert!((r[i] - 3.7 * x[i] - rhs[i]).abs() < 1e-9);
        }
    }
}
