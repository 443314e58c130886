//! Relatively parallel adapted frames: local charts, auxiliary normals,
//! Gram-Schmidt, the rotation initial value problem and patching; plus
//! Frenet frames in 2D and 3D for comparison.

use alloc::vec;
use alloc::vec::Vec;
#[allow(unused_imports)]
use num_traits::Float;

use crate::curves::{modified_gram_schmidt, orthonormality_defect, CurvatureVector, Curve};
use crate::error::{Error, Result};
use crate::grid::{derivative_vec, lagrange_weights, SGrid};
use crate::linalg::{dot, norm};

type Mat = Vec<Vec<f64>>;

/// Orthonormal moving frame `(T, N_1, .., N_n)` with its curvature vector.
#[derive(Debug, Clone)]
pub struct Frame {
    pub grid: SGrid,
    pub dim: usize,
    pub tangents: Vec<Vec<f64>>,
    /// `normals[j][i]` is `N_{j+1}(s_i)`.
    pub normals: Vec<Vec<Vec<f64>>>,
    pub k: CurvatureVector,
}

impl Frame {
    /// Number of normals `n`.
    pub fn n(&self) -> usize {
        self.dim - 1
    }

    pub fn normal(&self, j: usize, i: usize) -> &[f64] {
        &self.normals[j][i]
    }

    /// Rows `(T, N_1, .., N_n)` at node `i`.
    pub fn rows_at(&self, i: usize) -> Mat {
        core::iter::once(self.tangents[i].clone()).chain(self.normals.iter().map(|nj| nj[i].clone())).collect()
    }

    pub fn orthonormality_defect(&self) -> f64 {
        (0..self.grid.count).map(|i| orthonormality_defect(&self.rows_at(i))).fold(0.0, f64::max)
    }

    /// `sum_j c_j N_j(s_i)`.
    pub fn normal_combination(&self, c: &[f64], i: usize) -> Vec<f64> {
        let mut out = vec![0.0; self.dim];
        for (j, cj) in c.iter().enumerate() {
            for (o, v) in out.iter_mut().zip(&self.normals[j][i]) {
                *o += cj * v;
            }
        }
        out
    }

    /// Largest normal-space component of `N_j'` over all nodes and `j`,
    /// measured relative to `1 + |k|`.
    pub fn parallel_defect(&self) -> f64 {
        let mut worst: f64 = 0.0;
        let kappa = self.k.kappa();
        for j in 0..self.n() {
            let d = derivative_vec(&self.normals[j], self.grid.ds);
            for (i, di) in d.iter().enumerate() {
                let proj: f64 = (0..self.n()).map(|l| dot(di, &self.normals[l][i]).powi(2)).sum::<f64>().sqrt();
                worst = worst.max(proj / (1.0 + kappa[i]));
            }
        }
        worst
    }
}

/// Local chart choice on `start..=end`: the auxiliary normals are built
/// against coordinate `chart` (0-based).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ChartSegment {
    pub start: usize,
    pub end: usize,
    pub chart: usize,
}

/// Consecutive segments sharing their boundary nodes and covering the grid.
#[derive(Debug, Clone, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ChartPlan {
    pub segments: Vec<ChartSegment>,
}

impl ChartPlan {
    pub fn segment_of(&self, i: usize) -> usize {
        self.segments.iter().position(|s| s.start <= i && i <= s.end).unwrap_or(self.segments.len() - 1)
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct RpafOptions {
    /// Caps the number of nodes per chart segment.
    pub max_segment_nodes: Option<usize>,
}

fn argmax_abs(v: &[f64]) -> usize {
    let mut best = 0;
    for (j, x) in v.iter().enumerate() {
        if x.abs() > v[best].abs() {
            best = j;
        }
    }
    best
}

/// Chart segments: each starts on the coordinate maximizing `|T_j|` and
/// ends before `T_j^2` drops below `1 / (2 (n + 1))`.
pub fn plan_charts(curve: &Curve, max_segment_nodes: Option<usize>) -> ChartPlan {
    let count = curve.len();
    let threshold = 1.0 / (2.0 * curve.dim as f64);
    let cap = max_segment_nodes.unwrap_or(usize::MAX).max(2);
    let mut segments = Vec::new();
    let mut start = 0;
    let mut chart = argmax_abs(&curve.tangents[0]);
    loop {
        let mut end = start;
        while end + 1 < count && end + 1 - start < cap && curve.tangents[end + 1][chart].powi(2) >= threshold {
            end += 1;
        }
        if end == start {
            // chart fails on the very next node: take one step with the best chart there
            end = start + 1;
        }
        segments.push(ChartSegment { start, end, chart });
        if end + 1 >= count {
            break;
        }
        start = end;
        let cand = argmax_abs(&curve.tangents[end + 1]);
        chart = if curve.tangents[end][cand].powi(2) >= threshold { cand } else { argmax_abs(&curve.tangents[end]) };
    }
    ChartPlan { segments }
}

/// Auxiliary normals against chart `c` followed by modified Gram-Schmidt.
fn local_normals(t: &[f64], c: usize) -> Mat {
    let d = t.len();
    let mut rows: Mat = Vec::with_capacity(d);
    rows.push(t.to_vec());
    for j in (0..d).filter(|&j| j != c) {
        let mut m = vec![0.0; d];
        m[j] = t[c];
        m[c] = -t[j];
        let nm = norm(&m);
        for x in &mut m {
            *x /= nm;
        }
        rows.push(m);
    }
    modified_gram_schmidt(&mut rows);
    rows.remove(0);
    rows
}

fn mat_mul(a: &Mat, b: &Mat) -> Mat {
    let (r, k, c) = (a.len(), b.len(), b[0].len());
    (0..r).map(|i| (0..c).map(|j| (0..k).map(|l| a[i][l] * b[l][j]).sum()).collect()).collect()
}

fn mat_axpy(a: &Mat, h: f64, b: &Mat) -> Mat {
    a.iter().zip(b).map(|(x, y)| x.iter().zip(y).map(|(u, v)| u + h * v).collect()).collect()
}

fn inverse(a: &Mat) -> Option<Mat> {
    let n = a.len();
    let mut m: Mat = a
        .iter()
        .map(|r| {
            let mut row = r.clone();
            row.resize(2 * n, 0.0);
            row
        })
        .collect();
    for (i, row) in m.iter_mut().enumerate() {
        row[n + i] = 1.0;
    }
    for col in 0..n {
        let piv = (col..n).max_by(|&x, &y| m[x][col].abs().partial_cmp(&m[y][col].abs()).unwrap())?;
        if m[piv][col].abs() < 1e-300 {
            return None;
        }
        m.swap(col, piv);
        let p = m[col][col];
        for v in m[col].iter_mut() {
            *v /= p;
        }
        for r in 0..n {
            if r != col {
                let f = m[r][col];
                if f != 0.0 {
                    for c in 0..2 * n {
                        let delta = f * m[col][c];
                        m[r][c] -= delta;
                    }
                }
            }
        }
    }
    Some(m.into_iter().map(|r| r[n..].to_vec()).collect())
}

/// One Newton step toward the nearest orthogonal matrix.
fn polar_step(r: &Mat) -> Mat {
    match inverse(r) {
        Some(inv) => {
            let n = r.len();
            (0..n).map(|i| (0..n).map(|j| 0.5 * (r[i][j] + inv[j][i])).collect()).collect()
        }
        None => r.clone(),
    }
}

/// Local frames `M` and their derivatives for one chart on a node range.
struct ChartData {
    lo: usize,
    hi: usize,
    m: Vec<Mat>,
    ds: f64,
}

impl ChartData {
    fn new(curve: &Curve, chart: usize, lo: usize, hi: usize) -> Self {
        let m = (lo..=hi).map(|i| local_normals(&curve.tangents[i], chart)).collect();
        Self { lo, hi, m, ds: curve.grid.ds }
    }

    fn m_at(&self, i: usize) -> &Mat {
        &self.m[i - self.lo]
    }

    /// Value and derivative of `M` at `x` (node units), by Lagrange
    /// interpolation over `k` consecutive nodes around `x`.
    fn eval(&self, x: f64, k: usize) -> (Mat, Mat) {
        let avail = self.hi - self.lo + 1;
        let k = k.min(avail);
        let centre = x.floor() as isize - (k as isize - 1) / 2;
        let p = centre.clamp(self.lo as isize, (self.hi + 1 - k) as isize) as usize;
        let (wv, wd) = lagrange_weights(k, x - p as f64);
        let rows = self.m[0].len();
        let d = self.m[0][0].len();
        let mut val = vec![vec![0.0; d]; rows];
        let mut der = vec![vec![0.0; d]; rows];
        for q in 0..k {
            let mq = self.m_at(p + q);
            for r in 0..rows {
                for c in 0..d {
                    val[r][c] += wv[q] * mq[r][c];
                    der[r][c] += wd[q] * mq[r][c] / self.ds;
                }
            }
        }
        (val, der)
    }

    /// Skew-symmetrized `a_jk = M_j' . M_k` at `x`.
    fn generator(&self, x: f64) -> Mat {
        let is_node = (x - x.round()).abs() < 1e-12;
        let (val, der) = self.eval(x, if is_node { 5 } else { 4 });
        let n = val.len();
        let a: Mat = (0..n).map(|j| (0..n).map(|k| dot(&der[j], &val[k])).collect()).collect();
        (0..n).map(|j| (0..n).map(|k| 0.5 * (a[j][k] - a[k][j])).collect()).collect()
    }
}

/// Integrates `R' = -R A` from node `from` to node `to` (either direction)
/// with RK4 and a polar correction each step; returns `N = R M` per node.
fn integrate_segment(data: &ChartData, r0: Mat, from: usize, to: usize, out: &mut [Option<Mat>]) {
    let mut r = r0;
    let step: isize = if to >= from { 1 } else { -1 };
    let h = step as f64 * data.ds;
    let mut i = from;
    out[i] = Some(mat_mul(&r, data.m_at(i)));
    while i != to {
        let x0 = i as f64;
        let xh = x0 + 0.5 * step as f64;
        let x1 = x0 + step as f64;
        let a0 = data.generator(x0);
        let ah = data.generator(xh);
        let a1 = data.generator(x1);
        let neg = |m: Mat| -> Mat { m.into_iter().map(|row| row.into_iter().map(|v| -v).collect()).collect() };
        let k1 = neg(mat_mul(&r, &a0));
        let k2 = neg(mat_mul(&mat_axpy(&r, 0.5 * h, &k1), &ah));
        let k3 = neg(mat_mul(&mat_axpy(&r, 0.5 * h, &k2), &ah));
        let k4 = neg(mat_mul(&mat_axpy(&r, h, &k3), &a1));
        for (row, (((a, b), c), d)) in r.iter_mut().zip(k1.iter().zip(&k2).zip(&k3).zip(&k4)) {
            for (v, (((p, q), s), t)) in row.iter_mut().zip(a.iter().zip(b).zip(c).zip(d)) {
                *v += h / 6.0 * (p + 2.0 * q + 2.0 * s + t);
            }
        }
        r = polar_step(&r);
        i = (i as isize + step) as usize;
        out[i] = Some(mat_mul(&r, data.m_at(i)));
    }
}

fn initial_rotation(normals: &Mat, m: &Mat) -> Mat {
    normals.iter().map(|nj| m.iter().map(|mk| dot(nj, mk)).collect()).collect()
}

pub fn build_rpaf(curve: &Curve, initial_normals: &[Vec<f64>], s_index0: usize) -> Result<Frame> {
    build_rpaf_with(curve, initial_normals, s_index0, &RpafOptions::default()).map(|(f, _)| f)
}

/// Relatively parallel adapted frame with `N_j(s_{index0})` prescribed.
pub fn build_rpaf_with(
    curve: &Curve,
    initial_normals: &[Vec<f64>],
    s_index0: usize,
    options: &RpafOptions,
) -> Result<(Frame, ChartPlan)> {
    let count = curve.len();
    let d = curve.dim;
    let n = d - 1;
    if count < 3 {
        return Err(Error::TooFewNodes { needed: 3, got: count });
    }
    if s_index0 >= count {
        return Err(Error::OutOfRange { what: "s_index0", value: s_index0 as f64, limit: (count - 1) as f64 });
    }
    for (i, t) in curve.tangents.iter().enumerate() {
        let nt = norm(t);
        if (nt - 1.0).abs() > 1e-8 {
            return Err(Error::DegenerateTangent { index: i, norm: nt });
        }
    }
    if initial_normals.len() != n || initial_normals.iter().any(|r| r.len() != d) {
        return Err(Error::DimensionMismatch { expected: n, got: initial_normals.len() });
    }
    let mut rows: Mat = vec![curve.tangents[s_index0].clone()];
    rows.extend(initial_normals.iter().cloned());
    let dev = orthonormality_defect(&rows);
    if dev > 1e-10 {
        return Err(Error::NotOrthonormal { deviation: dev });
    }

    let plan = plan_charts(curve, options.max_segment_nodes);
    let mut out: Vec<Option<Mat>> = vec![None; count];
    let seg0 = plan.segment_of(s_index0);
    let chart_data = |seg: &ChartSegment| {
        let lo = seg.start.saturating_sub(3);
        let hi = (seg.end + 3).min(count - 1);
        ChartData::new(curve, seg.chart, lo, hi)
    };
    let initial: Mat = initial_normals.to_vec();

    // forward from the prescribed node
    let mut start_normals = initial.clone();
    let mut from = s_index0;
    for seg in &plan.segments[seg0..] {
        let data = chart_data(seg);
        let r0 = initial_rotation(&start_normals, data.m_at(from));
        integrate_segment(&data, r0, from, seg.end, &mut out);
        start_normals = out[seg.end].clone().expect("segment end computed");
        from = seg.end;
    }
    // backward
    let mut start_normals = initial.clone();
    let mut from = s_index0;
    for seg in plan.segments[..=seg0].iter().rev() {
        let data = chart_data(seg);
        let r0 = initial_rotation(&start_normals, data.m_at(from));
        integrate_segment(&data, r0, from, seg.start, &mut out);
        start_normals = out[seg.start].clone().expect("segment start computed");
        from = seg.start;
    }
    out[s_index0] = Some(initial);

    let mut normals: Vec<Vec<Vec<f64>>> = vec![Vec::with_capacity(count); n];
    for node in out.into_iter() {
        let node = node.expect("every node visited");
        for (j, v) in node.into_iter().enumerate() {
            normals[j].push(v);
        }
    }
    let placeholder = CurvatureVector { grid: curve.grid, k: vec![vec![0.0; n]; count] };
    let mut frame = Frame { grid: curve.grid, dim: d, tangents: curve.tangents.clone(), normals, k: placeholder };
    frame.k = curvature_from_frame(&frame);
    Ok((frame, plan))
}

/// `k_j(s_i) = T'(s_i) . N_j(s_i)` with fourth-order differences of `T`.
pub fn curvature_from_frame(frame: &Frame) -> CurvatureVector {
    let dt = derivative_vec(&frame.tangents, frame.grid.ds);
    let k =
        (0..frame.grid.count).map(|i| (0..frame.n()).map(|j| dot(&dt[i], &frame.normals[j][i])).collect()).collect();
    CurvatureVector { grid: frame.grid, k }
}

/// Frenet data of a space curve.
#[derive(Debug, Clone)]
pub struct FrenetFrame {
    pub grid: SGrid,
    pub tangents: Vec<Vec<f64>>,
    pub m1: Vec<Vec<f64>>,
    pub m2: Vec<Vec<f64>>,
    pub kappa: Vec<f64>,
    pub tau: Vec<f64>,
}

fn cross(a: &[f64], b: &[f64]) -> Vec<f64> {
    vec![a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]
}

/// `M_1 = T'/|T'|`, `M_2 = T x M_1`, torsion `tau = M_1' . M_2`.
pub fn frenet_frame_3d(curve: &Curve, kappa_min: f64) -> Result<FrenetFrame> {
    if curve.dim != 3 {
        return Err(Error::DimensionMismatch { expected: 3, got: curve.dim });
    }
    let ds = curve.grid.ds;
    let dt = derivative_vec(&curve.tangents, ds);
    let mut m1 = Vec::with_capacity(curve.len());
    let mut kappa = Vec::with_capacity(curve.len());
    for (i, v) in dt.iter().enumerate() {
        let k = norm(v);
        if !(k > kappa_min) {
            return Err(Error::VanishingCurvature { index: i, kappa: k });
        }
        kappa.push(k);
        m1.push(v.iter().map(|x| x / k).collect::<Vec<f64>>());
    }
    let m2: Vec<Vec<f64>> = curve.tangents.iter().zip(&m1).map(|(t, m)| cross(t, m)).collect();
    let dm1 = derivative_vec(&m1, ds);
    let tau = dm1.iter().zip(&m2).map(|(a, b)| dot(a, b)).collect();
    Ok(FrenetFrame { grid: curve.grid, tangents: curve.tangents.clone(), m1, m2, kappa, tau })
}

/// Planar Frenet normal `(-T_2, T_1)` and signed curvature
/// `-Gamma_1'' Gamma_2' + Gamma_1' Gamma_2''`.
pub fn frenet_frame_2d(curve: &Curve) -> Result<(Vec<Vec<f64>>, Vec<f64>)> {
    if curve.dim != 2 {
        return Err(Error::DimensionMismatch { expected: 2, got: curve.dim });
    }
    let dt = derivative_vec(&curve.tangents, curve.grid.ds);
    let normals = curve.tangents.iter().map(|t| vec![-t[1], t[0]]).collect();
    let k = curve.tangents.iter().zip(&dt).map(|(t, d)| -d[0] * t[1] + t[0] * d[1]).collect();
    Ok((normals, k))
}

/// Continuous angle `atan2(M_1 . N_2, M_1 . N_1)` of a 3D frame relative
/// to the Frenet normal, unwrapped along the grid.
pub fn frenet_rotation_angle(frame: &Frame, frenet: &FrenetFrame) -> Vec<f64> {
    let mut out: Vec<f64> = Vec::with_capacity(frame.grid.count);
    for i in 0..frame.grid.count {
        let raw = dot(&frenet.m1[i], &frame.normals[1][i]).atan2(dot(&frenet.m1[i], &frame.normals[0][i]));
        let v = match out.last() {
            None => raw,
            Some(&prev) => {
                let two_pi = 2.0 * core::f64::consts::PI;
                raw + two_pi * ((prev - raw) / two_pi).round()
            }
        };
        out.push(v);
    }
    out
}

/// Normals completing `T(s_i)` to an orthonormal basis, by Gram-Schmidt
/// against the standard basis (deterministic fallback initial data).
pub fn standard_normals(t: &[f64]) -> Vec<Vec<f64>> {
    let d = t.len();
    let mut rows = vec![t.to_vec()];
    for e in 0..d {
        if rows.len() == d {
            break;
        }
        let mut v = vec![0.0; d];
        v[e] = 1.0;
        for r in &rows {
            let p = dot(&v, r);
            for (x, y) in v.iter_mut().zip(r) {
                *x -= p * y;
            }
        }
        let nv = norm(&v);
        if nv > 1e-6 {
            for x in &mut v {
                *x /= nv;
            }
            rows.push(v);
        }
    }
    modified_gram_schmidt(&mut rows);
    rows.remove(0);
    rows
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curves::{make_analytic_curve, CurveFamily};

    #[test]
    fn straight_line_frame_is_constant() {
        let g = SGrid::spanning(0.0, 10.0, 101).unwrap();
        let c = make_analytic_curve(&CurveFamily::Line, 3, g).unwrap();
        let n0 = vec![vec![0.0, 1.0, 0.0], vec![0.0, 0.0, 1.0]];
        let f = build_rpaf(&c, &n0, 0).unwrap();
        for i in 0..g.count {
            assert!((f.normals[0][i][1] - 1.0).abs() < 1e-12);
            assert!((f.normals[1][i][2] - 1.0).abs() < 1e-12);
            assert!(f.k.k[i].iter().all(|k| k.abs() < 1e-12));
        }
    }

    #[test]
    fn planar_circle_in_space() {
        let g = SGrid::spanning(0.0, 8.0, 801).unwrap();
        let c = make_analytic_curve(&CurveFamily::Circle { radius: 1.0 }, 3, g).unwrap();
        let n0 = vec![vec![-1.0, 0.0, 0.0], vec![0.0, 0.0, 1.0]];
        let f = build_rpaf(&c, &n0, 0).unwrap();
        for i in 0..g.count {
            assert!((f.normals[1][i][2] - 1.0).abs() < 1e-9);
            assert!((f.k.k[i][0] - 1.0).abs() < 1e-6);
            assert!(f.k.k[i][1].abs() < 1e-6);
        }
        assert!(f.orthonormality_defect() < 1e-8);
    }

    #[test]
    fn helix_rotates_at_torsion_rate() {
        let g = SGrid::spanning(0.0, 20.0, 4001).unwrap();
        let c = make_analytic_curve(&CurveFamily::Helix { radius: 1.0, pitch: 1.0 }, 3, g).unwrap();
        let fr = frenet_frame_3d(&c, 1e-8).unwrap();
        let n0 = vec![fr.m1[0].clone(), fr.m2[0].clone()];
        let (f, plan) = build_rpaf_with(&c, &n0, 0, &RpafOptions::default()).unwrap();
        assert!(!plan.segments.is_empty());
        let ang = frenet_rotation_angle(&f, &fr);
        for (i, s) in g.nodes().enumerate() {
            assert!((ang[i] - 0.5 * s).abs() < 1e-5, "s={s}: {}", ang[i]);
        }
        for i in 0..g.count {
            assert!((fr.tau[i] - 0.5).abs() < 1e-6);
            assert!((fr.kappa[i] - 0.5).abs() < 1e-6);
        }
    }

    #[test]
    fn chart_plan_covers_grid() {
        let g = SGrid::spanning(0.0, 30.0, 3001).unwrap();
        let c = make_analytic_curve(&CurveFamily::Circle { radius: 2.0 }, 3, g).unwrap();
        let plan = plan_charts(&c, None);
        assert!(plan.segments.len() > 1);
        assert_eq!(plan.segments[0].start, 0);
        assert_eq!(plan.segments.last().unwrap().end, g.count - 1);
        let thr = 1.0 / 6.0;
        for w in plan.segments.windows(2) {
            assert_eq!(w[0].end, w[1].start);
        }
        for seg in &plan.segments {
            for i in seg.start..=seg.end {
                assert!(c.tangents[i][seg.chart].powi(2) >= thr);
            }
        }
    }

    #[test]
    fn standard_normals_complete_basis() {
        let t = [0.6, 0.0, 0.8];
        let ns = standard_normals(&t);
        let mut rows = vec![t.to_vec()];
        rows.extend(ns);
        assert!(orthonormality_defect(&rows) < 1e-14);
    }

    #[test]
    fn straight_line_frenet_fails() {
        let g = SGrid::spanning(0.0, 1.0, 11).unwrap();
        let c = make_analytic_curve(&CurveFamily::Line, 3, g).unwrap();
        assert!(matches!(frenet_frame_3d(&c, 1e-8), Err(Error::VanishingCurvature { .. })));
    }
}
