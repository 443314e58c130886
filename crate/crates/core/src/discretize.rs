//! Finite-difference quadratic forms on truncated strips.
//!
//! Unknowns live on interior lattice nodes. Stiffness matrices are sums of
//! squared edge differences, so they are exactly symmetric and positive
//! semidefinite; mass matrices are diagonal.

use alloc::vec::Vec;
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Assumption, Error, Result};
use crate::grid::SGrid;
use crate::linalg::{CsrMatrix, TripletBuilder};
use crate::profile::simpson_weights;
use crate::stripgeom::{metric_f, transverse_potential, StripModel};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum EndCondition {
    Dirichlet,
    Neumann,
}

/// Lattice on `(-S, S) x (-a, a)` with `ns x nt` interior nodes.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Mesh2D {
    pub s_half: f64,
    pub a: f64,
    pub ns: usize,
    pub nt: usize,
}

impl Mesh2D {
    pub fn new(s_half: f64, a: f64, ns: usize, nt: usize) -> Result<Self> {
        if !(s_half > 0.0) {
            return Err(Error::NonPositive { name: "S", value: s_half });
        }
        if !(a > 0.0) {
            return Err(Error::NonPositive { name: "a", value: a });
        }
        if ns < 4 || nt < 4 {
            return Err(Error::TooFewNodes { needed: 4, got: ns.min(nt) });
        }
        Ok(Self { s_half, a, ns, nt })
    }

    /// Mesh with `s`-step close to `hs_target`.
    pub fn with_steps(s_half: f64, a: f64, hs_target: f64, nt: usize) -> Result<Self> {
        let ns = ((2.0 * s_half / hs_target).round() as usize).saturating_sub(1).max(4);
        Self::new(s_half, a, ns, nt)
    }

    pub fn hs(&self) -> f64 {
        2.0 * self.s_half / (self.ns + 1) as f64
    }

    pub fn ht(&self) -> f64 {
        2.0 * self.a / (self.nt + 1) as f64
    }

    #[inline]
    pub fn s_node(&self, i: usize) -> f64 {
        -self.s_half + (i + 1) as f64 * self.hs()
    }

    #[inline]
    pub fn t_node(&self, m: usize) -> f64 {
        -self.a + (m + 1) as f64 * self.ht()
    }

    #[inline]
    pub fn index(&self, i: usize, m: usize) -> usize {
        i * self.nt + m
    }

    pub fn unknowns(&self) -> usize {
        self.ns * self.nt
    }

    /// Model grid with step `hs / 2` whose nodes contain every mesh node
    /// and every `s`-edge midpoint, including the ends `-S`, `S`.
    pub fn model_grid(&self) -> SGrid {
        SGrid { s0: -self.s_half, ds: 0.5 * self.hs(), count: 2 * (self.ns + 1) + 1 }
    }

    /// The mesh with both steps halved exactly.
    pub fn refined(&self) -> Self {
        Self { ns: 2 * self.ns + 1, nt: 2 * self.nt + 1, ..*self }
    }
}

/// Interior nodes `lo + (i + 1) h` of `(lo, hi)`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Mesh1D {
    pub lo: f64,
    pub hi: f64,
    pub n: usize,
}

impl Mesh1D {
    pub fn new(lo: f64, hi: f64, n: usize) -> Result<Self> {
        if !(hi > lo) {
            return Err(Error::NonPositive { name: "interval length", value: hi - lo });
        }
        if n < 2 {
            return Err(Error::TooFewNodes { needed: 2, got: n });
        }
        Ok(Self { lo, hi, n })
    }

    pub fn h(&self) -> f64 {
        (self.hi - self.lo) / (self.n + 1) as f64
    }

    #[inline]
    pub fn node(&self, i: usize) -> f64 {
        self.lo + (i + 1) as f64 * self.h()
    }

    pub fn nodes(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.n).map(move |i| self.node(i))
    }

    pub fn refined(&self) -> Self {
        Self { n: 2 * self.n + 1, ..*self }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Layout {
    Grid2D(Mesh2D),
    Line(Mesh1D),
}

/// `u^T K u` approximates the quadratic form, `u^T M u` the weighted norm.
#[derive(Debug, Clone)]
pub struct DiscreteForm {
    pub stiffness: CsrMatrix,
    pub mass: Vec<f64>,
    pub end: EndCondition,
    pub layout: Layout,
}

impl DiscreteForm {
    pub fn dim(&self) -> usize {
        self.mass.len()
    }

    pub fn mesh2d(&self) -> Option<&Mesh2D> {
        match &self.layout {
            Layout::Grid2D(m) => Some(m),
            Layout::Line(_) => None,
        }
    }

    /// `M u`.
    pub fn apply_mass(&self, u: &[f64]) -> Vec<f64> {
        u.iter().zip(&self.mass).map(|(x, m)| x * m).collect()
    }

    pub fn mass_norm(&self, u: &[f64]) -> f64 {
        u.iter().zip(&self.mass).map(|(x, m)| m * x * x).sum::<f64>().sqrt()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum TransverseFormulation {
    /// `int |psi'|^2 f` over `int |psi|^2 f`.
    Weighted,
    /// `int |phi'|^2 + V |phi|^2` over `int |phi|^2`, after `phi = f^{1/2} psi`.
    Potential,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EffectivePotentialKind {
    VEff,
    /// Transverse average of `V_a` against the first transverse mode.
    VA(f64),
}

fn check_window(model: &StripModel, s_half: f64) -> Result<()> {
    let slack = 1e-9 * (1.0 + s_half);
    if model.grid.s0 > -s_half + slack || model.grid.end() < s_half - slack {
        let got = (-model.grid.s0).min(model.grid.end());
        return Err(Error::WindowTooSmall { needed: s_half, got });
    }
    Ok(())
}

fn check_bounded(model: &StripModel) -> Result<()> {
    let (index, value) = model.max_abs_k_theta();
    if !(model.a * value < 1.0) {
        return Err(Error::AssumptionViolated {
            assumption: Assumption::BoundedGeodesicCurvature,
            index,
            value: model.a * value,
        });
    }
    Ok(())
}

/// Two-dimensional form `int |d_s psi|^2 / f + |d_t psi|^2 f` with mass
/// `int |psi|^2 f` on the mesh; the model must cover `[-S, S]`.
pub fn assemble_2d(model: &StripModel, mesh: &Mesh2D, end: EndCondition) -> Result<DiscreteForm> {
    check_window(model, mesh.s_half)?;
    check_bounded(model)?;
    if (model.a - mesh.a).abs() > 1e-12 * model.a {
        return Err(Error::OutOfRange { what: "mesh half-width", value: mesh.a, limit: model.a });
    }
    let (ns, nt) = (mesh.ns, mesh.nt);
    let (hs, ht) = (mesh.hs(), mesh.ht());
    let coef = |s: f64| (model.k_theta_at(s), model.theta_prime_at(s));
    let mut b = TripletBuilder::with_capacity(mesh.unknowns(), mesh.unknowns() * 5);
    let mut mass = Vec::with_capacity(mesh.unknowns());
    for i in 0..ns {
        let s = mesh.s_node(i);
        let (k, be) = coef(s);
        for m in 0..nt {
            mass.push(metric_f(k, be, mesh.t_node(m)) * hs * ht);
        }
        // t-edges, including the two Dirichlet boundary edges
        for m in 0..=nt {
            let tm = -mesh.a + (m as f64 + 0.5) * ht;
            let w = hs / ht * metric_f(k, be, tm);
            match (m, m == nt) {
                (0, _) => b.add(mesh.index(i, 0), mesh.index(i, 0), w),
                (_, true) => b.add(mesh.index(i, nt - 1), mesh.index(i, nt - 1), w),
                _ => b.add_edge(mesh.index(i, m - 1), mesh.index(i, m), w),
            }
        }
    }
    // s-edges between column i-1 and i, for i = 0..=ns
    for i in 0..=ns {
        let sm = -mesh.s_half + (i as f64 + 0.5) * hs;
        let (k, be) = coef(sm);
        for m in 0..nt {
            let w = ht / hs / metric_f(k, be, mesh.t_node(m));
            if i == 0 || i == ns {
                if end == EndCondition::Dirichlet {
                    let col = if i == 0 { 0 } else { ns - 1 };
                    b.add(mesh.index(col, m), mesh.index(col, m), w);
                }
            } else {
                b.add_edge(mesh.index(i - 1, m), mesh.index(i, m), w);
            }
        }
    }
    for (idx, v) in mass.iter().enumerate() {
        if !(*v > 0.0) {
            return Err(Error::NonPositiveMass { index: idx, value: *v });
        }
    }
    Ok(DiscreteForm { stiffness: b.build(), mass, end, layout: Layout::Grid2D(*mesh) })
}

/// Transverse problem on `(-a, a)` for fixed `k.Theta = kappa`,
/// `|Theta'| = beta`, Dirichlet at both ends.
pub fn transverse_form(
    kappa: f64,
    beta: f64,
    a: f64,
    nt: usize,
    formulation: TransverseFormulation,
) -> Result<DiscreteForm> {
    let mesh = Mesh1D::new(-a, a, nt)?;
    let h = mesh.h();
    let mut b = TripletBuilder::with_capacity(nt, 3 * nt);
    let mut mass = Vec::with_capacity(nt);
    match formulation {
        TransverseFormulation::Weighted => {
            for m in 0..=nt {
                let tm = -a + (m as f64 + 0.5) * h;
                let w = metric_f(kappa, beta, tm) / h;
                edge_or_boundary(&mut b, m, nt, w);
            }
            for t in mesh.nodes() {
                mass.push(metric_f(kappa, beta, t) * h);
            }
        }
        TransverseFormulation::Potential => {
            if kappa.abs() > 1e-12 {
                return Err(Error::BendingPresent { index: 0, k_theta: kappa });
            }
            for m in 0..=nt {
                edge_or_boundary(&mut b, m, nt, 1.0 / h);
            }
            for (m, t) in mesh.nodes().enumerate() {
                b.add(m, m, transverse_potential(0.0, beta, t) * h);
                mass.push(h);
            }
        }
    }
    Ok(DiscreteForm { stiffness: b.build(), mass, end: EndCondition::Dirichlet, layout: Layout::Line(mesh) })
}

fn edge_or_boundary(b: &mut TripletBuilder, m: usize, n: usize, w: f64) {
    if m == 0 {
        b.add(0, 0, w);
    } else if m == n {
        b.add(n - 1, n - 1, w);
    } else {
        b.add_edge(m - 1, m, w);
    }
}

/// [`transverse_form`] at node `s_index` of the model.
pub fn assemble_transverse_1d(
    model: &StripModel,
    s_index: usize,
    nt: usize,
    formulation: TransverseFormulation,
) -> Result<DiscreteForm> {
    if s_index >= model.grid.count {
        return Err(Error::OutOfRange { what: "s_index", value: s_index as f64, limit: (model.grid.count - 1) as f64 });
    }
    let kappa = model.k_theta[s_index];
    if formulation == TransverseFormulation::Potential && kappa.abs() > 1e-12 {
        return Err(Error::BendingPresent { index: s_index, k_theta: kappa });
    }
    transverse_form(kappa, model.theta_prime[s_index], model.a, nt, formulation)
}

/// `int_{-1}^{1} V_a(s, u) cos^2(pi u / 2) du` by Simpson's rule on 129 points.
pub fn averaged_va(kappa: f64, beta: f64, a: f64) -> f64 {
    const POINTS: usize = 129;
    let w = simpson_weights(-1.0, 1.0, POINTS);
    let h = 2.0 / (POINTS - 1) as f64;
    (0..POINTS)
        .map(|q| {
            let u = -1.0 + q as f64 * h;
            let chi = (core::f64::consts::FRAC_PI_2 * u).cos();
            w[q] * transverse_potential(kappa, beta, a * u) * chi * chi
        })
        .sum()
}

/// One-dimensional Schrodinger form `int |phi'|^2 + V |phi|^2` on `mesh_s`
/// with Dirichlet ends.
pub fn assemble_effective_1d(
    model: &StripModel,
    mesh_s: &Mesh1D,
    which: EffectivePotentialKind,
) -> Result<DiscreteForm> {
    let report = model.assumption_report();
    if !report.thin_ass_ok {
        let index = report.witnesses_for(Assumption::ThinRegularity).first().copied().unwrap_or(0);
        return Err(Error::AssumptionViolated { assumption: Assumption::ThinRegularity, index, value: f64::NAN });
    }
    check_window(model, mesh_s.lo.abs().max(mesh_s.hi.abs()))?;
    let potential: Vec<f64> = mesh_s
        .nodes()
        .map(|s| {
            let (k, b) = (model.k_theta_at(s), model.theta_prime_at(s));
            match which {
                EffectivePotentialKind::VEff => -0.25 * k * k + 0.5 * b * b,
                EffectivePotentialKind::VA(a) => averaged_va(k, b, a),
            }
        })
        .collect();
    Ok(schrodinger_1d(mesh_s, &potential))
}

/// `int |phi'|^2 + V |phi|^2` with `V` sampled at the mesh nodes.
pub fn schrodinger_1d(mesh: &Mesh1D, potential: &[f64]) -> DiscreteForm {
    let n = mesh.n;
    let h = mesh.h();
    let mut b = TripletBuilder::with_capacity(n, 3 * n);
    for m in 0..=n {
        edge_or_boundary(&mut b, m, n, 1.0 / h);
    }
    for (i, v) in potential.iter().enumerate() {
        b.add(i, i, v * h);
    }
    DiscreteForm {
        stiffness: b.build(),
        mass: alloc::vec![h; n],
        end: EndCondition::Dirichlet,
        layout: Layout::Line(*mesh),
    }
}

/// Thin-strip comparison form on `(-S, S) x (-1, 1)` in the scaled variable
/// `u = t / a`: `int |d_s phi|^2 + a^{-2} |d_u phi|^2 + V_eff |phi|^2`.
/// `mesh.a` must be 1; Dirichlet on all sides.
pub fn assemble_thin_reference(model: &StripModel, mesh: &Mesh2D, a_value: f64) -> Result<DiscreteForm> {
    if (mesh.a - 1.0).abs() > 1e-12 {
        return Err(Error::OutOfRange { what: "scaled half-width", value: mesh.a, limit: 1.0 });
    }
    if !(a_value > 0.0) {
        return Err(Error::NonPositive { name: "a", value: a_value });
    }
    check_window(model, mesh.s_half)?;
    let (ns, nu) = (mesh.ns, mesh.nt);
    let (hs, hu) = (mesh.hs(), mesh.ht());
    let ws = hu / hs;
    let wu = hs / (a_value * a_value * hu);
    let mut b = TripletBuilder::with_capacity(mesh.unknowns(), mesh.unknowns() * 5);
    for i in 0..ns {
        let s = mesh.s_node(i);
        let (k, be) = (model.k_theta_at(s), model.theta_prime_at(s));
        let v = -0.25 * k * k + 0.5 * be * be;
        for m in 0..nu {
            let idx = mesh.index(i, m);
            b.add(idx, idx, v * hs * hu);
            if i == 0 || i == ns - 1 {
                b.add(idx, idx, ws);
            }
            if i + 1 < ns {
                b.add_edge(idx, mesh.index(i + 1, m), ws);
            }
            if m == 0 || m == nu - 1 {
                b.add(idx, idx, wu);
            }
            if m + 1 < nu {
                b.add_edge(idx, mesh.index(i, m + 1), wu);
            }
        }
    }
    Ok(DiscreteForm {
        stiffness: b.build(),
        mass: alloc::vec![hs * hu; mesh.unknowns()],
        end: EndCondition::Dirichlet,
        layout: Layout::Grid2D(*mesh),
    })
}

/// Lowest eigenvalue of the discrete Dirichlet Laplacian on `(-a, a)` with
/// `nt` interior nodes: `(2 - 2 cos(pi h / 2a)) / h^2`.
pub fn discrete_e1(a: f64, nt: usize) -> f64 {
    let h = 2.0 * a / (nt + 1) as f64;
    let x = core::f64::consts::PI * h / (2.0 * a);
    (2.0 - 2.0 * x.cos()) / (h * h)
}

/// Normalized discrete first transverse mode on the interior nodes,
/// `sum chi_m^2 h = 1`.
pub fn discrete_chi1(a: f64, nt: usize) -> Vec<f64> {
    let h = 2.0 * a / (nt + 1) as f64;
    let raw: Vec<f64> =
        (0..nt).map(|m| (core::f64::consts::FRAC_PI_2 * (-a + (m + 1) as f64 * h + a) / a).sin()).collect();
    let nrm = (raw.iter().map(|x| x * x).sum::<f64>() * h).sqrt();
    raw.into_iter().map(|x| x / nrm).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::profile::Profile;

    fn straight(mesh: &Mesh2D) -> StripModel {
        StripModel::from_profiles(mesh.a, mesh.model_grid(), &Profile::Zero, &Profile::Zero).unwrap()
    }

    #[test]
    fn mesh_geometry() {
        let m = Mesh2D::new(10.0, 1.0, 199, 19).unwrap();
        assert!((m.hs() - 0.1).abs() < 1e-15);
        assert!((m.ht() - 0.1).abs() < 1e-15);
        assert!((m.s_node(0) + 9.9).abs() < 1e-12);
        let g = m.model_grid();
        assert!((g.end() - 10.0).abs() < 1e-12);
        assert!((g.node(2) - m.s_node(0)).abs() < 1e-12);
        let r = m.refined();
        assert!((r.hs() - 0.05).abs() < 1e-15);
    }

    #[test]
    fn straight_strip_forms_are_separable() {
        let mesh = Mesh2D::new(2.0, 1.0, 9, 7).unwrap();
        let model = straight(&mesh);
        let d = assemble_2d(&model, &mesh, EndCondition::Dirichlet).unwrap();
        assert!(d.stiffness.is_symmetric());
        let chi = discrete_chi1(1.0, 7);
        // chi1 (x) const is an eigenvector of the Neumann form with value E1h
        let nform = assemble_2d(&model, &mesh, EndCondition::Neumann).unwrap();
        let u: Vec<f64> = (0..9).flat_map(|_| chi.iter().copied()).collect();
        let ku = nform.stiffness.apply(&u);
        let e1h = discrete_e1(1.0, 7);
        for (k, (x, m)) in ku.iter().zip(u.iter().zip(&nform.mass)) {
            assert!((k - e1h * m * x).abs() < 1e-12);
        }
    }

    #[test]
    fn bent_mass_bounds() {
        let mesh = Mesh2D::new(3.0, 0.5, 11, 9).unwrap();
        let model =
            StripModel::from_profiles(0.5, mesh.model_grid(), &Profile::Constant { value: 1.0 }, &Profile::Zero)
                .unwrap();
        let d = assemble_2d(&model, &mesh, EndCondition::Dirichlet).unwrap();
        let cell = mesh.hs() * mesh.ht();
        assert!(d.mass.iter().all(|m| *m >= 0.5 * cell && *m <= 1.5 * cell));
        assert!(d.stiffness.is_symmetric());
    }

    #[test]
    fn potential_form_rejects_bending() {
        let r = transverse_form(0.2, 1.0, 1.0, 20, TransverseFormulation::Potential);
        assert!(matches!(r, Err(Error::BendingPresent { .. })));
    }

    #[test]
    fn averaged_va_reduces_to_veff_on_centerline_limit() {
        let (k, b) = (0.4, 0.7);
        let veff = -0.25 * k * k + 0.5 * b * b;
        assert!((averaged_va(k, b, 1e-6) - veff).abs() < 1e-5);
        assert!(averaged_va(0.0, 0.0, 0.5).abs() < 1e-15);
    }
}
