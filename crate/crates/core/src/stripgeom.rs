//! Strip geometry: twisting vector, the Jacobian `f(s, t)` of the metric,
//! Gauss curvature, hypothesis checks and the embedding map.

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;
#[allow(unused_imports)]
use num_traits::Float;

use crate::curves::Curve;
use crate::error::{Assumption, Error, Result};
use crate::frames::Frame;
use crate::grid::{derivative, derivative_vec, interpolate, SGrid};
use crate::linalg::{dot, norm};
use crate::profile::{simpson, Profile};

/// Coefficients `Theta(s)` of the strip direction in a normal frame.
#[derive(Debug, Clone)]
pub struct TwistProfile {
    pub grid: SGrid,
    pub theta: Vec<Vec<f64>>,
    pub theta_prime: Vec<Vec<f64>>,
    pub theta_second: Vec<Vec<f64>>,
    /// Nodes whose samples needed a renormalization larger than `1e-6`.
    pub renormalized: Vec<usize>,
}

/// Analytic twisting vectors.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields))]
pub enum TwistSpec {
    /// Fixed unit coefficients (normalized on use).
    Constant { theta: Vec<f64> },
    /// `cos(omega s + phase) e_p + sin(omega s + phase) e_q` with `plane = [p, q]`.
    Rotating {
        omega: f64,
        plane: [usize; 2],
        #[cfg_attr(feature = "serde", serde(default))]
        phase: f64,
    },
    /// Rotation in `plane` with angle `phase + int_{s0}^{s} rate`.
    RateProfile {
        rate: Profile,
        plane: [usize; 2],
        #[cfg_attr(feature = "serde", serde(default))]
        phase: f64,
    },
}

impl TwistProfile {
    pub fn from_spec(spec: &TwistSpec, n: usize, grid: SGrid) -> Result<Self> {
        let count = grid.count;
        let planar = |plane: &[usize; 2]| -> Result<()> {
            if plane[0] >= n || plane[1] >= n || plane[0] == plane[1] {
                return Err(Error::OutOfRange {
                    what: "twist plane index",
                    value: plane[0].max(plane[1]) as f64,
                    limit: n as f64 - 1.0,
                });
            }
            Ok(())
        };
        match spec {
            TwistSpec::Constant { theta } => {
                if theta.len() != n {
                    return Err(Error::DimensionMismatch { expected: n, got: theta.len() });
                }
                let nt = norm(theta);
                if !(nt > 0.0) {
                    return Err(Error::ZeroVector);
                }
                let unit: Vec<f64> = theta.iter().map(|x| x / nt).collect();
                Ok(Self {
                    grid,
                    theta: vec![unit; count],
                    theta_prime: vec![vec![0.0; n]; count],
                    theta_second: vec![vec![0.0; n]; count],
                    renormalized: Vec::new(),
                })
            }
            TwistSpec::Rotating { omega, plane, phase } => {
                planar(plane)?;
                let angle: Vec<f64> = grid.nodes().map(|s| omega * s + phase).collect();
                Ok(Self::planar_rotation(grid, n, *plane, &angle, &vec![*omega; count], &vec![0.0; count]))
            }
            TwistSpec::RateProfile { rate, plane, phase } => {
                planar(plane)?;
                let mut angle = Vec::with_capacity(count);
                let mut acc = *phase;
                angle.push(acc);
                for i in 1..count {
                    acc += simpson(grid.node(i - 1), grid.node(i), 2, |s| rate.value(s));
                    angle.push(acc);
                }
                let d1 = rate.sample(grid.nodes());
                let d2: Vec<f64> = grid.nodes().map(|s| rate.derivative(s)).collect();
                Ok(Self::planar_rotation(grid, n, *plane, &angle, &d1, &d2))
            }
        }
    }

    fn planar_rotation(grid: SGrid, n: usize, plane: [usize; 2], angle: &[f64], d1: &[f64], d2: &[f64]) -> Self {
        let [p, q] = plane;
        let mut theta = vec![vec![0.0; n]; grid.count];
        let mut theta_prime = vec![vec![0.0; n]; grid.count];
        let mut theta_second = vec![vec![0.0; n]; grid.count];
        for i in 0..grid.count {
            let (sn, cs) = angle[i].sin_cos();
            theta[i][p] = cs;
            theta[i][q] = sn;
            theta_prime[i][p] = -d1[i] * sn;
            theta_prime[i][q] = d1[i] * cs;
            theta_second[i][p] = -d2[i] * sn - d1[i] * d1[i] * cs;
            theta_second[i][q] = d2[i] * cs - d1[i] * d1[i] * sn;
        }
        Self { grid, theta, theta_prime, theta_second, renormalized: Vec::new() }
    }

    /// Node samples of `Theta`; renormalized node-wise, derivatives by
    /// finite differences.
    pub fn from_samples(grid: SGrid, mut theta: Vec<Vec<f64>>) -> Result<Self> {
        if theta.len() != grid.count {
            return Err(Error::GridMismatch);
        }
        let mut renormalized = Vec::new();
        for (i, v) in theta.iter_mut().enumerate() {
            let nv = norm(v);
            if !(nv > 0.0) {
                return Err(Error::ZeroVector);
            }
            if (nv - 1.0).abs() > 1e-6 {
                renormalized.push(i);
            }
            for x in v.iter_mut() {
                *x /= nv;
            }
        }
        let theta_prime = derivative_vec(&theta, grid.ds);
        let theta_second = derivative_vec(&theta_prime, grid.ds);
        Ok(Self { grid, theta, theta_prime, theta_second, renormalized })
    }

    pub fn n(&self) -> usize {
        self.theta.first().map_or(0, Vec::len)
    }

    pub fn abs_theta_prime(&self) -> Vec<f64> {
        self.theta_prime.iter().map(|v| norm(v)).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum Provenance {
    FromFrameAndTwist,
    DirectProfiles,
}

/// The intrinsic data of a strip of half-width `a`: `k.Theta`, `|Theta'|`
/// and `|Theta''|` on a grid, with their `s`-derivatives.
#[derive(Debug, Clone)]
pub struct StripModel {
    pub a: f64,
    pub grid: SGrid,
    pub k_theta: Vec<f64>,
    pub theta_prime: Vec<f64>,
    pub theta_second: Vec<f64>,
    pub k_theta_d: Vec<f64>,
    pub theta_prime_d: Vec<f64>,
    pub provenance: Provenance,
}

/// `f = sqrt((1 - t kappa)^2 + t^2 beta^2)`.
#[inline]
pub fn metric_f(kappa: f64, beta: f64, t: f64) -> f64 {
    let u = 1.0 - t * kappa;
    let v = t * beta;
    (u * u + v * v).sqrt()
}

/// `d f / d t`.
#[inline]
pub fn metric_f_t(kappa: f64, beta: f64, t: f64) -> f64 {
    (-kappa * (1.0 - t * kappa) + t * beta * beta) / metric_f(kappa, beta, t)
}

/// `d^2 f / d t^2`.
#[inline]
pub fn metric_f_tt(kappa: f64, beta: f64, t: f64) -> f64 {
    let f = metric_f(kappa, beta, t);
    let ft = metric_f_t(kappa, beta, t);
    (kappa * kappa + beta * beta - ft * ft) / f
}

/// `-(f_t / f)^2 / 4 + f_tt / (2 f)`, the potential produced by the
/// unitary change `psi -> f^{1/2} psi`.
#[inline]
pub fn transverse_potential(kappa: f64, beta: f64, t: f64) -> f64 {
    let f = metric_f(kappa, beta, t);
    let ft = metric_f_t(kappa, beta, t);
    let ftt = metric_f_tt(kappa, beta, t);
    -0.25 * (ft / f) * (ft / f) + 0.5 * ftt / f
}

/// `-|Theta'|^2 / f^4`.
#[inline]
pub fn gauss_curvature_at(kappa: f64, beta: f64, t: f64) -> f64 {
    let f = metric_f(kappa, beta, t);
    -beta * beta / (f * f * f * f)
}

impl StripModel {
    /// Model from node samples, checking `a sup |k.Theta| < 1`.
    pub fn from_samples(
        a: f64,
        grid: SGrid,
        k_theta: Vec<f64>,
        theta_prime: Vec<f64>,
        theta_second: Vec<f64>,
        provenance: Provenance,
    ) -> Result<Self> {
        let model = Self::from_samples_unchecked(a, grid, k_theta, theta_prime, theta_second, provenance)?;
        model.check_bounded_curvature()?;
        Ok(model)
    }

    /// As [`StripModel::from_samples`] without the hypothesis check; used
    /// to produce assumption reports for invalid inputs.
    pub fn from_samples_unchecked(
        a: f64,
        grid: SGrid,
        k_theta: Vec<f64>,
        theta_prime: Vec<f64>,
        theta_second: Vec<f64>,
        provenance: Provenance,
    ) -> Result<Self> {
        if !(a > 0.0) || !a.is_finite() {
            return Err(Error::NonPositive { name: "a", value: a });
        }
        if k_theta.len() != grid.count || theta_prime.len() != grid.count || theta_second.len() != grid.count {
            return Err(Error::GridMismatch);
        }
        let k_theta_d = derivative(&k_theta, grid.ds);
        let theta_prime_d = derivative(&theta_prime, grid.ds);
        Ok(Self { a, grid, k_theta, theta_prime, theta_second, k_theta_d, theta_prime_d, provenance })
    }

    /// Model from analytic profiles of `k.Theta` and `|Theta'|`; the
    /// twist is taken as a planar rotation, so `|Theta''| = sqrt(beta'^2 + beta^4)`.
    pub fn from_profiles(a: f64, grid: SGrid, k_theta: &Profile, theta_prime: &Profile) -> Result<Self> {
        let mut model = Self::from_profiles_unchecked(a, grid, k_theta, theta_prime)?;
        model.check_bounded_curvature()?;
        model.provenance = Provenance::DirectProfiles;
        Ok(model)
    }

    pub fn from_profiles_unchecked(a: f64, grid: SGrid, k_theta: &Profile, theta_prime: &Profile) -> Result<Self> {
        if !(a > 0.0) || !a.is_finite() {
            return Err(Error::NonPositive { name: "a", value: a });
        }
        let kt = k_theta.sample(grid.nodes());
        let beta = theta_prime.sample(grid.nodes());
        let kt_d = grid.nodes().map(|s| k_theta.derivative(s)).collect();
        let beta_d: Vec<f64> = grid.nodes().map(|s| theta_prime.derivative(s)).collect();
        let second = beta.iter().zip(&beta_d).map(|(b, d)| (d * d + b.powi(4)).sqrt()).collect();
        Ok(Self {
            a,
            grid,
            k_theta: kt,
            theta_prime: beta,
            theta_second: second,
            k_theta_d: kt_d,
            theta_prime_d: beta_d,
            provenance: Provenance::DirectProfiles,
        })
    }

    fn check_bounded_curvature(&self) -> Result<()> {
        let (index, value) = self.max_abs_k_theta();
        if !(self.a * value < 1.0) {
            return Err(Error::AssumptionViolated {
                assumption: Assumption::BoundedGeodesicCurvature,
                index,
                value: self.a * value,
            });
        }
        Ok(())
    }

    /// Node and value of `max |k.Theta|`.
    pub fn max_abs_k_theta(&self) -> (usize, f64) {
        self.k_theta
            .iter()
            .enumerate()
            .fold((0, 0.0), |(bi, bv), (i, v)| if v.abs() > bv { (i, v.abs()) } else { (bi, bv) })
    }

    pub fn max_theta_prime(&self) -> f64 {
        self.theta_prime.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// `1 - a max |k.Theta|`.
    pub fn jacobian_lower_bound(&self) -> f64 {
        1.0 - self.a * self.max_abs_k_theta().1
    }

    pub fn is_untwisted(&self, tol: f64) -> bool {
        self.theta_prime.iter().all(|b| b.abs() <= tol)
    }

    pub fn is_unbent(&self, tol: f64) -> bool {
        self.k_theta.iter().all(|k| k.abs() <= tol)
    }

    fn check_t(&self, t: f64) -> Result<()> {
        if t.abs() > self.a * (1.0 + 1e-12) {
            return Err(Error::OutOfRange { what: "t", value: t, limit: self.a });
        }
        Ok(())
    }

    pub fn jacobian_f(&self, s_index: usize, t: f64) -> Result<f64> {
        self.check_t(t)?;
        Ok(self.f_node(s_index, t))
    }

    pub fn gauss_curvature(&self, s_index: usize, t: f64) -> Result<f64> {
        self.check_t(t)?;
        Ok(gauss_curvature_at(self.k_theta[s_index], self.theta_prime[s_index], t))
    }

    #[inline]
    pub fn f_node(&self, i: usize, t: f64) -> f64 {
        metric_f(self.k_theta[i], self.theta_prime[i], t)
    }

    pub fn k_theta_at(&self, s: f64) -> f64 {
        interpolate(&self.grid, &self.k_theta, s)
    }

    pub fn theta_prime_at(&self, s: f64) -> f64 {
        interpolate(&self.grid, &self.theta_prime, s)
    }

    /// `f(s, t)` with `k.Theta` and `|Theta'|` linearly interpolated in `s`.
    pub fn f_at(&self, s: f64, t: f64) -> f64 {
        metric_f(self.k_theta_at(s), self.theta_prime_at(s), t)
    }

    /// `-(k.Theta)^2 / 4 + |Theta'|^2 / 2` at each node.
    pub fn effective_potential(&self) -> Vec<f64> {
        self.k_theta.iter().zip(&self.theta_prime).map(|(k, b)| -0.25 * k * k + 0.5 * b * b).collect()
    }

    pub fn assumption_report(&self) -> AssumptionReport {
        assumption_report(self, &ReportOptions::default())
    }
}

/// `k.Theta = sum_j k_j Theta_j` and `|Theta'|` from a frame and twist.
pub fn make_strip(frame: &Frame, twist: &TwistProfile, a: f64) -> Result<StripModel> {
    let (kt, beta, second) = strip_samples(frame, twist)?;
    StripModel::from_samples(a, frame.grid, kt, beta, second, Provenance::FromFrameAndTwist)
}

pub fn make_strip_unchecked(frame: &Frame, twist: &TwistProfile, a: f64) -> Result<StripModel> {
    let (kt, beta, second) = strip_samples(frame, twist)?;
    StripModel::from_samples_unchecked(a, frame.grid, kt, beta, second, Provenance::FromFrameAndTwist)
}

type Samples = (Vec<f64>, Vec<f64>, Vec<f64>);

fn strip_samples(frame: &Frame, twist: &TwistProfile) -> Result<Samples> {
    if !frame.grid.matches(&twist.grid) {
        return Err(Error::GridMismatch);
    }
    if twist.n() != frame.n() {
        return Err(Error::DimensionMismatch { expected: frame.n(), got: twist.n() });
    }
    let kt = (0..frame.grid.count).map(|i| dot(&frame.k.k[i], &twist.theta[i])).collect();
    let beta = twist.abs_theta_prime();
    let second = twist.theta_second.iter().map(|v| norm(v)).collect();
    Ok((kt, beta, second))
}

#[derive(Debug, Clone, Copy)]
pub struct ReportOptions {
    /// Decay threshold over the outer window fraction.
    pub flat_threshold: f64,
    pub flat_fraction: f64,
    /// Finite bound used for the boundedness checks.
    pub thin_bound: f64,
}

impl Default for ReportOptions {
    fn default() -> Self {
        Self { flat_threshold: 1e-3, flat_fraction: 0.1, thin_bound: 1e6 }
    }
}

/// Pass/fail per hypothesis with the offending nodes.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct AssumptionReport {
    pub ass21_ok: bool,
    pub hardy_smallness_ok: bool,
    pub asymptotically_flat_ok: bool,
    pub thin_ass_ok: bool,
    pub witnesses: Vec<(Assumption, Vec<usize>)>,
    pub a_max_k_theta: f64,
    pub a_max_theta_prime: f64,
}

impl AssumptionReport {
    pub fn witnesses_for(&self, which: Assumption) -> &[usize] {
        self.witnesses.iter().find(|(w, _)| *w == which).map_or(&[], |(_, v)| v.as_slice())
    }
}

pub fn assumption_report(model: &StripModel, options: &ReportOptions) -> AssumptionReport {
    let a = model.a;
    let count = model.grid.count;
    let ass21: Vec<usize> = (0..count).filter(|&i| !(a * model.k_theta[i].abs() < 1.0)).collect();
    let hardy: Vec<usize> =
        (0..count).filter(|&i| !(a * model.theta_prime[i].abs() <= core::f64::consts::SQRT_2)).collect();
    let outer = ((options.flat_fraction * count as f64).ceil() as usize).clamp(1, count);
    let flat: Vec<usize> = (0..outer)
        .chain(count - outer..count)
        .filter(|&i| {
            !(model.k_theta[i].abs() < options.flat_threshold && model.theta_prime[i].abs() < options.flat_threshold)
        })
        .collect::<alloc::collections::BTreeSet<_>>()
        .into_iter()
        .collect();
    let bound = options.thin_bound;
    let thin: Vec<usize> = (0..count)
        .filter(|&i| {
            [model.k_theta[i], model.k_theta_d[i], model.theta_prime[i], model.theta_second[i]]
                .iter()
                .any(|v| !(v.abs() <= bound))
        })
        .collect();
    let mut witnesses = Vec::new();
    for (which, list) in [
        (Assumption::BoundedGeodesicCurvature, &ass21),
        (Assumption::HardySmallness, &hardy),
        (Assumption::AsymptoticallyFlat, &flat),
        (Assumption::ThinRegularity, &thin),
    ] {
        if !list.is_empty() {
            witnesses.push((which, list.clone()));
        }
    }
    AssumptionReport {
        ass21_ok: ass21.is_empty(),
        hardy_smallness_ok: hardy.is_empty(),
        asymptotically_flat_ok: flat.is_empty(),
        thin_ass_ok: thin.is_empty(),
        witnesses,
        a_max_k_theta: a * model.max_abs_k_theta().1,
        a_max_theta_prime: a * model.max_theta_prime(),
    }
}

/// Samples `L(s_i, t_m) = Gamma(s_i) + t_m N_Theta(s_i)` on a uniform
/// `t` lattice over `[-a, a]`; `points[i * t_count + m]`.
#[derive(Debug, Clone)]
pub struct SurfaceSamples {
    pub dim: usize,
    pub s: Vec<f64>,
    pub t: Vec<f64>,
    pub points: Vec<Vec<f64>>,
}

impl SurfaceSamples {
    pub fn point(&self, i: usize, m: usize) -> &[f64] {
        &self.points[i * self.t.len() + m]
    }

    /// Two triangles per lattice cell, vertex indices into `points`.
    pub fn triangles(&self) -> Vec<[usize; 3]> {
        let nt = self.t.len();
        let mut out = Vec::with_capacity(2 * (self.s.len() - 1) * (nt - 1));
        for i in 0..self.s.len() - 1 {
            for m in 0..nt - 1 {
                let v00 = i * nt + m;
                let v01 = v00 + 1;
                let v10 = v00 + nt;
                let v11 = v10 + 1;
                out.push([v00, v10, v11]);
                out.push([v00, v11, v01]);
            }
        }
        out
    }
}

pub fn embed(
    model: &StripModel,
    curve: &Curve,
    frame: &Frame,
    twist: &TwistProfile,
    t_samples: usize,
) -> Result<SurfaceSamples> {
    if t_samples < 2 {
        return Err(Error::TooFewNodes { needed: 2, got: t_samples });
    }
    if !model.grid.matches(&frame.grid) || !curve.grid.matches(&frame.grid) || !twist.grid.matches(&frame.grid) {
        return Err(Error::GridMismatch);
    }
    let t: Vec<f64> = (0..t_samples).map(|m| -model.a + 2.0 * model.a * m as f64 / (t_samples - 1) as f64).collect();
    let mut points = Vec::with_capacity(frame.grid.count * t_samples);
    for i in 0..frame.grid.count {
        let n_theta = frame.normal_combination(&twist.theta[i], i);
        for &tm in &t {
            points.push(curve.points[i].iter().zip(&n_theta).map(|(g, n)| g + tm * n).collect());
        }
    }
    Ok(SurfaceSamples { dim: curve.dim, s: frame.grid.nodes().collect(), t, points })
}

/// Lattice point pairs that are far apart in parameter space but closer
/// than `min_separation` in space.
#[derive(Debug, Clone, Default)]
pub struct InjectivityReport {
    pub flagged: Vec<(usize, usize, f64)>,
    pub checked_points: usize,
}

impl InjectivityReport {
    pub fn is_clean(&self) -> bool {
        self.flagged.is_empty()
    }
}

pub fn check_injectivity(surface: &SurfaceSamples, min_separation: f64) -> InjectivityReport {
    let nt = surface.t.len();
    let ds = if surface.s.len() > 1 { (surface.s[1] - surface.s[0]).abs() } else { 0.0 };
    let dt = if nt > 1 { (surface.t[1] - surface.t[0]).abs() } else { 0.0 };
    let param_gap = (4.0 * min_separation).max(3.0 * ds.max(dt));
    let cell = min_separation.max(1e-300);
    let key = |p: &[f64]| -> Vec<i64> { p.iter().map(|x| (x / cell).floor() as i64).collect() };
    let mut buckets: BTreeMap<Vec<i64>, Vec<usize>> = BTreeMap::new();
    for (idx, p) in surface.points.iter().enumerate() {
        buckets.entry(key(p)).or_default().push(idx);
    }
    let dim = surface.dim;
    let mut offsets: Vec<Vec<i64>> = vec![Vec::new()];
    for _ in 0..dim {
        offsets = offsets
            .into_iter()
            .flat_map(|o| {
                (-1..=1).map(move |d| {
                    let mut v = o.clone();
                    v.push(d);
                    v
                })
            })
            .collect();
    }
    let mut flagged = Vec::new();
    for (idx, p) in surface.points.iter().enumerate() {
        let (i, m) = (idx / nt, idx % nt);
        let base = key(p);
        for off in &offsets {
            let k: Vec<i64> = base.iter().zip(off).map(|(b, o)| b + o).collect();
            let Some(list) = buckets.get(&k) else { continue };
            for &other in list {
                if other <= idx {
                    continue;
                }
                let (j, r) = (other / nt, other % nt);
                let dpar = ((surface.s[i] - surface.s[j]).powi(2) + (surface.t[m] - surface.t[r]).powi(2)).sqrt();
                if dpar <= param_gap {
                    continue;
                }
                let q = &surface.points[other];
                let d: f64 = p.iter().zip(q).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt();
                if d < min_separation {
                    flagged.push((idx, other, d));
                }
            }
        }
    }
    InjectivityReport { flagged, checked_points: surface.points.len() }
}

/// Geodesic curvature of the centerline `t = 0` computed from the embedded
/// samples: `Gamma'' . nu` with `nu` the in-surface unit normal to the curve.
pub fn geodesic_curvature_from_surface(surface: &SurfaceSamples) -> Result<Vec<f64>> {
    let nt = surface.t.len();
    if nt < 3 || nt % 2 == 0 {
        return Err(Error::TooFewNodes { needed: 3, got: nt });
    }
    let ns = surface.s.len();
    if ns < 3 {
        return Err(Error::TooFewNodes { needed: 3, got: ns });
    }
    let mid = nt / 2;
    let ds = surface.s[1] - surface.s[0];
    let dt = surface.t[1] - surface.t[0];
    let mut out = vec![0.0; ns];
    for i in 1..ns - 1 {
        let prev = surface.point(i - 1, mid);
        let here = surface.point(i, mid);
        let next = surface.point(i + 1, mid);
        let tangent: Vec<f64> = next.iter().zip(prev).map(|(a, b)| (a - b) / (2.0 * ds)).collect();
        let acc: Vec<f64> = (0..surface.dim).map(|c| (next[c] - 2.0 * here[c] + prev[c]) / (ds * ds)).collect();
        let up = surface.point(i, mid + 1);
        let down = surface.point(i, mid - 1);
        let mut nu: Vec<f64> = up.iter().zip(down).map(|(a, b)| (a - b) / (2.0 * dt)).collect();
        let tn = norm(&tangent);
        let proj = dot(&nu, &tangent) / (tn * tn);
        for (x, y) in nu.iter_mut().zip(&tangent) {
            *x -= proj * y;
        }
        let nn = norm(&nu);
        out[i] = dot(&acc, &nu) / nn;
    }
    out[0] = out[1];
    out[ns - 1] = out[ns - 2];
    Ok(out)
}
