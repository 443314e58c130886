//! Arc-length parameterized curves in `R^{n+1}`: analytic families,
//! curvature estimates, and synthesis from a prescribed curvature vector.

use alloc::string::ToString;
use alloc::vec;
use alloc::vec::Vec;
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};
use crate::frames::Frame;
use crate::grid::{interpolate, SGrid};
use crate::linalg::{dot, norm};

const TANGENT_TOL: f64 = 1e-9;

/// Sampled curve `Gamma(s_i)` with unit tangents `T(s_i)`.
#[derive(Debug, Clone)]
pub struct Curve {
    pub dim: usize,
    pub grid: SGrid,
    pub points: Vec<Vec<f64>>,
    pub tangents: Vec<Vec<f64>>,
}

impl Curve {
    pub fn new(dim: usize, grid: SGrid, points: Vec<Vec<f64>>, tangents: Vec<Vec<f64>>) -> Result<Self> {
        if dim < 2 {
            return Err(Error::DimensionTooSmall { what: "curve", dim, min: 2 });
        }
        if points.len() != grid.count || tangents.len() != grid.count {
            return Err(Error::DimensionMismatch { expected: grid.count, got: points.len().min(tangents.len()) });
        }
        for (i, (p, t)) in points.iter().zip(&tangents).enumerate() {
            if p.len() != dim || t.len() != dim {
                return Err(Error::DimensionMismatch { expected: dim, got: p.len().min(t.len()) });
            }
            let nt = norm(t);
            if (nt - 1.0).abs() > TANGENT_TOL || !nt.is_finite() {
                return Err(Error::DegenerateTangent { index: i, norm: nt });
            }
        }
        Ok(Self { dim, grid, points, tangents })
    }

    pub fn len(&self) -> usize {
        self.grid.count
    }

    pub fn is_empty(&self) -> bool {
        self.grid.count == 0
    }

    pub fn max_tangent_defect(&self) -> f64 {
        self.tangents.iter().map(|t| (norm(t) - 1.0).abs()).fold(0.0, f64::max)
    }
}

/// Curvature vector `k = (k_1, .., k_n)` sampled on a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct CurvatureVector {
    pub grid: SGrid,
    pub k: Vec<Vec<f64>>,
}

impl CurvatureVector {
    pub fn new(grid: SGrid, k: Vec<Vec<f64>>) -> Result<Self> {
        if k.len() != grid.count {
            return Err(Error::DimensionMismatch { expected: grid.count, got: k.len() });
        }
        let n = k.first().map_or(0, Vec::len);
        if n == 0 {
            return Err(Error::DimensionTooSmall { what: "curvature vector", dim: 1, min: 2 });
        }
        for row in &k {
            if row.len() != n {
                return Err(Error::DimensionMismatch { expected: n, got: row.len() });
            }
            if row.iter().any(|v| !v.is_finite()) {
                return Err(Error::OutOfRange { what: "curvature", value: f64::NAN, limit: f64::MAX });
            }
        }
        Ok(Self { grid, k })
    }

    pub fn from_fn<F: Fn(f64) -> Vec<f64>>(grid: SGrid, f: F) -> Result<Self> {
        Self::new(grid, grid.nodes().map(f).collect())
    }

    pub fn constant(grid: SGrid, k: &[f64]) -> Result<Self> {
        Self::new(grid, vec![k.to_vec(); grid.count])
    }

    /// Number of normal directions `n`.
    pub fn n(&self) -> usize {
        self.k[0].len()
    }

    /// Scalar curvature `|k|` at every node.
    pub fn kappa(&self) -> Vec<f64> {
        self.k.iter().map(|v| norm(v)).collect()
    }

    fn at(&self, s: f64) -> Vec<f64> {
        (0..self.n())
            .map(|j| {
                let (i, w) = self.grid.locate(s);
                self.k[i][j] * (1.0 - w) + self.k[i + 1][j] * w
            })
            .collect()
    }
}

/// Analytic test curves, all parameterized by arc length.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(tag = "family", rename_all = "snake_case", deny_unknown_fields))]
pub enum CurveFamily {
    Line,
    Circle {
        radius: f64,
    },
    /// `(r cos(s/c), r sin(s/c), h s/c)` with `c = sqrt(r^2 + h^2)`.
    Helix {
        radius: f64,
        pitch: f64,
    },
}

impl CurveFamily {
    /// Looks a family up by name, taking parameters from `params`.
    pub fn from_name(name: &str, params: &[(&str, f64)]) -> Result<Self> {
        let get = |key: &str| params.iter().find(|(k, _)| *k == key).map(|(_, v)| *v);
        match name {
            "line" => Ok(CurveFamily::Line),
            "circle" => Ok(CurveFamily::Circle { radius: get("radius").unwrap_or(1.0) }),
            "helix" => {
                Ok(CurveFamily::Helix { radius: get("radius").unwrap_or(1.0), pitch: get("pitch").unwrap_or(1.0) })
            }
            other => Err(Error::UnknownFamily(other.to_string())),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            CurveFamily::Line => "line",
            CurveFamily::Circle { .. } => "circle",
            CurveFamily::Helix { .. } => "helix",
        }
    }

    /// Curvature and torsion of the family (torsion is zero for planar ones).
    pub fn curvature_torsion(&self) -> (f64, f64) {
        match *self {
            CurveFamily::Line => (0.0, 0.0),
            CurveFamily::Circle { radius } => (1.0 / radius, 0.0),
            CurveFamily::Helix { radius, pitch } => {
                let c2 = radius * radius + pitch * pitch;
                (radius / c2, pitch / c2)
            }
        }
    }
}

pub fn make_analytic_curve(family: &CurveFamily, dim: usize, grid: SGrid) -> Result<Curve> {
    let min = match family {
        CurveFamily::Helix { .. } => 3,
        _ => 2,
    };
    if dim < min {
        return Err(Error::DimensionTooSmall { what: family.name(), dim, min });
    }
    match *family {
        CurveFamily::Circle { radius } if !(radius > 0.0) => {
            return Err(Error::NonPositive { name: "radius", value: radius })
        }
        CurveFamily::Helix { radius, .. } if !(radius > 0.0) => {
            return Err(Error::NonPositive { name: "radius", value: radius })
        }
        _ => {}
    }
    let mut points = Vec::with_capacity(grid.count);
    let mut tangents = Vec::with_capacity(grid.count);
    for s in grid.nodes() {
        let mut p = vec![0.0; dim];
        let mut t = vec![0.0; dim];
        match *family {
            CurveFamily::Line => {
                p[0] = s;
                t[0] = 1.0;
            }
            CurveFamily::Circle { radius: r } => {
                let (sn, cs) = (s / r).sin_cos();
                p[0] = r * cs;
                p[1] = r * sn;
                t[0] = -sn;
                t[1] = cs;
            }
            CurveFamily::Helix { radius: r, pitch: h } => {
                let c = (r * r + h * h).sqrt();
                let (sn, cs) = (s / c).sin_cos();
                p[0] = r * cs;
                p[1] = r * sn;
                p[2] = h * s / c;
                t[0] = -r / c * sn;
                t[1] = r / c * cs;
                t[2] = h / c;
            }
        }
        points.push(p);
        tangents.push(t);
    }
    Curve::new(dim, grid, points, tangents)
}

/// `kappa(s_i) = |T'(s_i)|` from second-order differences of the tangents.
pub fn curvature_of(curve: &Curve) -> Result<Vec<f64>> {
    let n = curve.len();
    if n < 3 {
        return Err(Error::TooFewNodes { needed: 3, got: n });
    }
    let ds = curve.grid.ds;
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let t = &curve.tangents;
        let d: Vec<f64> = (0..curve.dim)
            .map(|c| {
                if i == 0 {
                    (-3.0 * t[0][c] + 4.0 * t[1][c] - t[2][c]) / (2.0 * ds)
                } else if i == n - 1 {
                    (3.0 * t[n - 1][c] - 4.0 * t[n - 2][c] + t[n - 3][c]) / (2.0 * ds)
                } else {
                    (t[i + 1][c] - t[i - 1][c]) / (2.0 * ds)
                }
            })
            .collect();
        out.push(norm(&d));
    }
    Ok(out)
}

/// Largest deviation of `rows * rows^T` from the identity.
pub fn orthonormality_defect(rows: &[Vec<f64>]) -> f64 {
    let mut worst: f64 = 0.0;
    for (i, a) in rows.iter().enumerate() {
        for (j, b) in rows.iter().enumerate() {
            let want = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((dot(a, b) - want).abs());
        }
    }
    worst
}

/// Modified Gram-Schmidt on the rows, in order.
pub fn modified_gram_schmidt(rows: &mut [Vec<f64>]) {
    for i in 0..rows.len() {
        for j in 0..i {
            let (head, tail) = rows.split_at_mut(i);
            let p = dot(&tail[0], &head[j]);
            for (x, y) in tail[0].iter_mut().zip(&head[j]) {
                *x -= p * y;
            }
        }
        let nr = norm(&rows[i]);
        for x in rows[i].iter_mut() {
            *x /= nr;
        }
    }
}

/// Integrates `Gamma' = T`, `T' = sum_j k_j N_j`, `N_j' = -k_j T` with RK4
/// from the first node, re-orthonormalizing the frame after every step.
/// `initial_frame` holds the rows `(T, N_1, .., N_n)` at the first node.
pub fn synthesize_from_curvature(
    k: &CurvatureVector,
    initial_frame: &[Vec<f64>],
    origin: &[f64],
) -> Result<(Curve, Frame)> {
    let n = k.n();
    let d = n + 1;
    if initial_frame.len() != d || initial_frame.iter().any(|r| r.len() != d) {
        return Err(Error::DimensionMismatch { expected: d, got: initial_frame.len() });
    }
    if origin.len() != d {
        return Err(Error::DimensionMismatch { expected: d, got: origin.len() });
    }
    let dev = orthonormality_defect(initial_frame);
    if dev > 1e-12 {
        return Err(Error::NotOrthonormal { deviation: dev });
    }
    let grid = k.grid;
    let ds = grid.ds;
    // state: point followed by the frame rows
    let mut state: Vec<Vec<f64>> = core::iter::once(origin.to_vec()).chain(initial_frame.iter().cloned()).collect();
    let mut points = Vec::with_capacity(grid.count);
    let mut tangents = Vec::with_capacity(grid.count);
    let mut normals: Vec<Vec<Vec<f64>>> = vec![Vec::with_capacity(grid.count); n];
    let record = |state: &[Vec<f64>],
                  points: &mut Vec<Vec<f64>>,
                  tangents: &mut Vec<Vec<f64>>,
                  normals: &mut Vec<Vec<Vec<f64>>>| {
        points.push(state[0].clone());
        tangents.push(state[1].clone());
        for j in 0..n {
            normals[j].push(state[2 + j].clone());
        }
    };
    record(&state, &mut points, &mut tangents, &mut normals);
    let rhs = |y: &[Vec<f64>], kv: &[f64]| -> Vec<Vec<f64>> {
        let mut out = vec![vec![0.0; d]; d + 1];
        out[0].clone_from(&y[1]);
        for j in 0..n {
            for c in 0..d {
                out[1][c] += kv[j] * y[2 + j][c];
                out[2 + j][c] = -kv[j] * y[1][c];
            }
        }
        out
    };
    let combine = |y: &[Vec<f64>], dy: &[Vec<f64>], h: f64| -> Vec<Vec<f64>> {
        y.iter().zip(dy).map(|(a, b)| a.iter().zip(b).map(|(u, v)| u + h * v).collect()).collect()
    };
    for i in 0..grid.count - 1 {
        let s = grid.node(i);
        let k0 = &k.k[i];
        let kh = k.at(s + 0.5 * ds);
        let k1 = &k.k[i + 1];
        let r1 = rhs(&state, k0);
        let r2 = rhs(&combine(&state, &r1, 0.5 * ds), &kh);
        let r3 = rhs(&combine(&state, &r2, 0.5 * ds), &kh);
        let r4 = rhs(&combine(&state, &r3, ds), k1);
        for (row, ((a, b), (c, e))) in state.iter_mut().zip(r1.iter().zip(&r2).zip(r3.iter().zip(&r4))) {
            for (x, (((p, q), r), t)) in row.iter_mut().zip(a.iter().zip(b).zip(c).zip(e)) {
                *x += ds / 6.0 * (p + 2.0 * q + 2.0 * r + t);
            }
        }
        modified_gram_schmidt(&mut state[1..]);
        record(&state, &mut points, &mut tangents, &mut normals);
    }
    let curve = Curve::new(d, grid, points, tangents.clone())?;
    let frame = Frame { grid, dim: d, tangents, normals, k: k.clone() };
    Ok((curve, frame))
}

/// Piecewise-linear evaluation of a sampled scalar on the curve grid.
pub fn sample_at(curve: &Curve, values: &[f64], s: f64) -> f64 {
    interpolate(&curve.grid, values, s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use core::f64::consts::PI;

    fn identity(d: usize) -> Vec<Vec<f64>> {
        (0..d).map(|i| (0..d).map(|j| if i == j { 1.0 } else { 0.0 }).collect()).collect()
    }

    #[test]
    fn line_points_and_tangents() {
        let g = SGrid::spanning(0.0, 10.0, 11).unwrap();
        let c = make_analytic_curve(&CurveFamily::Line, 3, g).unwrap();
        assert_eq!(c.points[4], vec![4.0, 0.0, 0.0]);
        assert_eq!(c.tangents[7], vec![1.0, 0.0, 0.0]);
        assert!(curvature_of(&c).unwrap().iter().all(|&k| k == 0.0));
    }

    #[test]
    fn circle_and_helix_curvature() {
        let g = SGrid::spanning(0.0, 6.0, 601).unwrap();
        let c = make_analytic_curve(&CurveFamily::Circle { radius: 1.0 }, 2, g).unwrap();
        let ds2 = g.ds * g.ds;
        for k in curvature_of(&c).unwrap() {
            assert!((k - 1.0).abs() < ds2);
        }
        let h = make_analytic_curve(&CurveFamily::Helix { radius: 1.0, pitch: 1.0 }, 3, g).unwrap();
        for k in curvature_of(&h).unwrap() {
            assert!((k - 0.5).abs() < ds2);
        }
    }

    #[test]
    fn family_errors() {
        let g = SGrid::spanning(0.0, 1.0, 5).unwrap();
        assert!(matches!(
            make_analytic_curve(&CurveFamily::Helix { radius: 1.0, pitch: 1.0 }, 2, g),
            Err(Error::DimensionTooSmall { .. })
        ));
        assert!(matches!(
            make_analytic_curve(&CurveFamily::Circle { radius: -1.0 }, 2, g),
            Err(Error::NonPositive { .. })
        ));
        assert!(matches!(CurveFamily::from_name("spiral", &[]), Err(Error::UnknownFamily(_))));
        assert_eq!(
            CurveFamily::from_name("helix", &[("pitch", 2.0)]).unwrap(),
            CurveFamily::Helix { radius: 1.0, pitch: 2.0 }
        );
    }

    #[test]
    fn zero_curvature_gives_straight_line() {
        let g = SGrid::spanning(0.0, 5.0, 51).unwrap();
        let k = CurvatureVector::constant(g, &[0.0, 0.0]).unwrap();
        let (c, f) = synthesize_from_curvature(&k, &identity(3), &[1.0, 2.0, 3.0]).unwrap();
        let last = &c.points[50];
        assert!((last[0] - 6.0).abs() < 1e-12 && (last[1] - 2.0).abs() < 1e-12);
        assert_eq!(f.normals[1][50], vec![0.0, 0.0, 1.0]);
    }

    #[test]
    fn unit_curvature_closes_circle() {
        let g = SGrid::spanning(0.0, 2.0 * PI, 2001).unwrap();
        let k = CurvatureVector::constant(g, &[1.0]).unwrap();
        let (c, _) = synthesize_from_curvature(&k, &identity(2), &[0.0, 0.0]).unwrap();
        let gap = norm(&[c.points[2000][0] - c.points[0][0], c.points[2000][1] - c.points[0][1]]);
        assert!(gap <= 1e-6, "gap {gap}");
        let ds2 = g.ds * g.ds;
        for kappa in curvature_of(&c).unwrap() {
            assert!((kappa - 1.0).abs() <= 10.0 * ds2);
        }
    }

    #[test]
    fn rejects_non_orthonormal_frame() {
        let g = SGrid::spanning(0.0, 1.0, 5).unwrap();
        let k = CurvatureVector::constant(g, &[1.0]).unwrap();
        let bad = vec![vec![1.0, 0.0], vec![0.1, 1.0]];
        assert!(matches!(synthesize_from_curvature(&k, &bad, &[0.0, 0.0]), Err(Error::NotOrthonormal { .. })));
    }
}
