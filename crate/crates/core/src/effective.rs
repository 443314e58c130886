//! Transverse ground-state profile, effective potential, thin-strip
//! coefficient tables and the transverse projection defect.

use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::discretize::{discrete_chi1, discrete_e1, transverse_form, DiscreteForm, Layout, TransverseFormulation};
use crate::eigensolve::{lowest_eigenvalue, solve_shifted};
use crate::error::{Assumption, Error, Result};
use crate::exec::{try_map, Executor};
use crate::grid::SGrid;
use crate::stripgeom::{metric_f, transverse_potential, StripModel};

/// `lambda(s)`: lowest transverse eigenvalue at `s` minus `E_1`.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct LambdaProfile {
    pub grid: SGrid,
    pub lambda: Vec<f64>,
    pub mesh_nt: usize,
    pub extrapolated: bool,
}

/// `V_eff = -(k.Theta)^2 / 4 + |Theta'|^2 / 2` and its floor `z_0`.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct EffectivePotential {
    pub grid: SGrid,
    pub v_eff: Vec<f64>,
    pub z0: f64,
}

/// `(4 fine - coarse) / 3` for a second-order quantity on steps `h`, `h / 2`.
#[inline]
pub fn richardson(coarse: f64, fine: f64) -> f64 {
    (4.0 * fine - coarse) / 3.0
}

/// Transverse eigenvalue minus the discrete `E_1` of the same lattice, so
/// untwisted unbent nodes give exactly zero.
fn shifted_transverse(kappa: f64, beta: f64, a: f64, nt: usize, formulation: TransverseFormulation) -> Result<f64> {
    let form = transverse_form(kappa, beta, a, nt, formulation)?;
    Ok(lowest_eigenvalue(&form)? - discrete_e1(a, nt))
}

pub fn lambda_profile<E: Executor + ?Sized>(
    model: &StripModel,
    nt: usize,
    use_potential_form: bool,
    extrapolate: bool,
    exec: &E,
) -> Result<LambdaProfile> {
    let formulation = if use_potential_form {
        if let Some(i) = model.k_theta.iter().position(|k| k.abs() > 1e-12) {
            return Err(Error::BendingPresent { index: i, k_theta: model.k_theta[i] });
        }
        TransverseFormulation::Potential
    } else {
        TransverseFormulation::Weighted
    };
    let a = model.a;
    let lambda = try_map(exec, model.grid.count, |i| {
        let (k, b) = (model.k_theta[i], model.theta_prime[i]);
        let coarse = shifted_transverse(k, b, a, nt, formulation)?;
        if extrapolate {
            let fine = shifted_transverse(k, b, a, 2 * nt + 1, formulation)?;
            Ok(richardson(coarse, fine))
        } else {
            Ok(coarse)
        }
    })?;
    Ok(LambdaProfile { grid: model.grid, lambda, mesh_nt: nt, extrapolated: extrapolate })
}

/// `lambda` read as the potential of the lower bound `H - E_1 >= lambda`.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct HardyFloor {
    pub grid: SGrid,
    pub floor: Vec<f64>,
    pub min: f64,
    pub max: f64,
    /// Hull of the nodes where the floor exceeds the tolerance.
    pub support: Option<(f64, f64)>,
    /// False when `a |Theta'| > sqrt(2)` somewhere.
    pub positivity_claimed: bool,
    /// Nodes where `2 - t^2 |Theta'|^2` turns negative inside the strip.
    pub flagged: Vec<usize>,
}

pub fn local_hardy_floor(model: &StripModel, profile: &LambdaProfile) -> Result<HardyFloor> {
    if !model.grid.matches(&profile.grid) {
        return Err(Error::GridMismatch);
    }
    if let Some(i) = model.k_theta.iter().position(|k| k.abs() > 1e-12) {
        return Err(Error::BendingPresent { index: i, k_theta: model.k_theta[i] });
    }
    let flagged: Vec<usize> =
        (0..model.grid.count).filter(|&i| model.a * model.theta_prime[i].abs() > core::f64::consts::SQRT_2).collect();
    let floor = profile.lambda.clone();
    let min = floor.iter().cloned().fold(f64::INFINITY, f64::min);
    let max = floor.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let tol = 1e-10 * (1.0 + max.abs());
    let mut support: Option<(f64, f64)> = None;
    for (i, v) in floor.iter().enumerate() {
        if *v > tol {
            let s = model.grid.node(i);
            support = Some(support.map_or((s, s), |(lo, hi)| (lo.min(s), hi.max(s))));
        }
    }
    Ok(HardyFloor { grid: model.grid, floor, min, max, support, positivity_claimed: flagged.is_empty(), flagged })
}

pub fn effective_potential(model: &StripModel) -> EffectivePotential {
    let v_eff = model.effective_potential();
    let kmax = model.max_abs_k_theta().1;
    EffectivePotential { grid: model.grid, v_eff, z0: -0.25 * kmax * kmax }
}

/// `f_a`, `d_s f_a` and `V_a` on the lattice `grid x u`, row-major in `s`.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ThinTransform {
    pub a_value: f64,
    pub grid: SGrid,
    pub u: Vec<f64>,
    pub f_a: Vec<f64>,
    pub d1_f_a: Vec<f64>,
    pub v_a: Vec<f64>,
    pub v_eff: Vec<f64>,
    pub sup_f_minus_one: f64,
    pub sup_d1_f: f64,
    pub sup_va_minus_veff: f64,
}

impl ThinTransform {
    pub fn at(&self, i: usize, m: usize) -> usize {
        i * self.u.len() + m
    }
}

/// Tabulates the coefficients of the operator after the scaling
/// `t = a u` on `u_count` equispaced points of `[-1, 1]`.
pub fn thin_transform_data(model: &StripModel, a_value: f64, u_count: usize) -> Result<ThinTransform> {
    if !(a_value > 0.0) {
        return Err(Error::NonPositive { name: "a", value: a_value });
    }
    if u_count < 2 {
        return Err(Error::TooFewNodes { needed: 2, got: u_count });
    }
    let (index, kmax) = model.max_abs_k_theta();
    if !(a_value * kmax < 1.0) {
        return Err(Error::AssumptionViolated {
            assumption: Assumption::BoundedGeodesicCurvature,
            index,
            value: a_value * kmax,
        });
    }
    let report = model.assumption_report();
    if !report.thin_ass_ok {
        let index = report.witnesses_for(Assumption::ThinRegularity).first().copied().unwrap_or(0);
        return Err(Error::AssumptionViolated { assumption: Assumption::ThinRegularity, index, value: f64::NAN });
    }
    let u: Vec<f64> = (0..u_count).map(|m| -1.0 + 2.0 * m as f64 / (u_count - 1) as f64).collect();
    let n = model.grid.count * u_count;
    let (mut f_a, mut d1_f_a, mut v_a) = (Vec::with_capacity(n), Vec::with_capacity(n), Vec::with_capacity(n));
    let v_eff = model.effective_potential();
    let (mut sup_f, mut sup_d1, mut sup_v) = (0.0f64, 0.0f64, 0.0f64);
    for i in 0..model.grid.count {
        let (k, b) = (model.k_theta[i], model.theta_prime[i]);
        let (kd, bd) = (model.k_theta_d[i], model.theta_prime_d[i]);
        for &um in &u {
            let t = a_value * um;
            let f = metric_f(k, b, t);
            let d1 = ((1.0 - t * k) * (-t * kd) + t * t * b * bd) / f;
            let v = transverse_potential(k, b, t);
            sup_f = sup_f.max((f - 1.0).abs());
            sup_d1 = sup_d1.max(d1.abs());
            sup_v = sup_v.max((v - v_eff[i]).abs());
            f_a.push(f);
            d1_f_a.push(d1);
            v_a.push(v);
        }
    }
    Ok(ThinTransform {
        a_value,
        grid: model.grid,
        u,
        f_a,
        d1_f_a,
        v_a,
        v_eff,
        sup_f_minus_one: sup_f,
        sup_d1_f: sup_d1,
        sup_va_minus_veff: sup_v,
    })
}

/// Outcome of one resolvent solve on the complement of the first transverse mode.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct DefectReport {
    pub a_value: f64,
    pub z: f64,
    pub z0: f64,
    /// `|P_perp psi| / |P_perp F|`, zero when `P_perp F = 0`.
    pub ratio: f64,
    pub rhs_norm: f64,
    /// `1 / (E_2 - E_1) = 4 a^2 / (3 pi^2)`.
    pub gap_bound: f64,
    /// `a^2 / (3 pi^2)`.
    pub printed_bound: f64,
}

impl DefectReport {
    pub fn within_gap_bound(&self) -> bool {
        self.ratio <= self.gap_bound
    }
}

/// Applies `P`, the projection onto the discrete first transverse mode, to
/// a field on a `(s, u)` lattice with `nu` nodes per column.
pub fn project_transverse(field: &[f64], nu: usize, chi: &[f64], hu: f64) -> Vec<f64> {
    let mut out = alloc::vec![0.0; field.len()];
    for (col, dst) in field.chunks(nu).zip(out.chunks_mut(nu)) {
        let c: f64 = col.iter().zip(chi).map(|(x, y)| x * y).sum::<f64>() * hu;
        for (d, x) in dst.iter_mut().zip(chi) {
            *d = c * x;
        }
    }
    out
}

/// Solves `(H0 - E_1 - z) psi = P_perp F` on the comparison form built by
/// [`crate::discretize::assemble_thin_reference`] and measures `P_perp psi`.
pub fn projection_defect(
    form0: &DiscreteForm,
    a_value: f64,
    z: f64,
    z0: f64,
    rhs: &[f64],
    tol: f64,
) -> Result<DefectReport> {
    if !(z < z0) {
        return Err(Error::ShiftNotBelowFloor { z, floor: z0 });
    }
    let mesh = match form0.layout {
        Layout::Grid2D(m) if (m.a - 1.0).abs() <= 1e-12 => m,
        _ => return Err(Error::Hypothesis("projection defect needs the scaled 2D comparison form".into())),
    };
    if rhs.len() != form0.dim() {
        return Err(Error::DimensionMismatch { expected: form0.dim(), got: rhs.len() });
    }
    let nu = mesh.nt;
    let hu = mesh.ht();
    let chi = discrete_chi1(1.0, nu);
    let e1 = discrete_e1(1.0, nu) / (a_value * a_value);
    let pf = project_transverse(rhs, nu, &chi, hu);
    let perp: Vec<f64> = rhs.iter().zip(&pf).map(|(f, p)| f - p).collect();
    let rhs_norm = form0.mass_norm(&perp);
    let gap_bound = 4.0 * a_value * a_value / (3.0 * PI * PI);
    let printed_bound = a_value * a_value / (3.0 * PI * PI);
    if rhs_norm <= 1e-14 * form0.mass_norm(rhs).max(f64::MIN_POSITIVE) {
        return Ok(DefectReport { a_value, z, z0, ratio: 0.0, rhs_norm, gap_bound, printed_bound });
    }
    let load = form0.apply_mass(&perp);
    let psi = solve_shifted(form0, e1 + z, &load, tol)?;
    let ppsi = project_transverse(&psi, nu, &chi, hu);
    let psi_perp: Vec<f64> = psi.iter().zip(&ppsi).map(|(a, b)| a - b).collect();
    Ok(DefectReport {
        a_value,
        z,
        z0,
        ratio: form0.mass_norm(&psi_perp) / rhs_norm,
        rhs_norm,
        gap_bound,
        printed_bound,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::discretize::{assemble_thin_reference, Mesh2D};
    use crate::exec::Sequential;
    use crate::profile::Profile;

    fn model(a: f64, k: Profile, b: Profile) -> StripModel {
        let grid = SGrid::spanning(-6.0, 6.0, 121).unwrap();
        StripModel::from_profiles(a, grid, &k, &b).unwrap()
    }

    #[test]
    fn untwisted_lambda_vanishes() {
        let m = model(1.0, Profile::Zero, Profile::Zero);
        let p = lambda_profile(&m, 40, true, true, &Sequential).unwrap();
        assert!(p.lambda.iter().all(|v| v.abs() < 1e-10));
    }

    #[test]
    fn potential_form_rejects_bending() {
        let m = model(1.0, Profile::Constant { value: 0.1 }, Profile::Zero);
        assert!(matches!(lambda_profile(&m, 20, true, false, &Sequential), Err(Error::BendingPresent { .. })));
    }

    #[test]
    fn effective_potential_examples() {
        let p = effective_potential(&model(0.5, Profile::Constant { value: 1.0 }, Profile::Zero));
        assert!(p.v_eff.iter().all(|v| (*v + 0.25).abs() < 1e-15));
        assert_eq!(p.z0, -0.25);
        let p = effective_potential(&model(0.5, Profile::Zero, Profile::Constant { value: 1.0 }));
        assert!(p.v_eff.iter().all(|v| (*v - 0.5).abs() < 1e-15));
        assert_eq!(p.z0, 0.0);
    }

    #[test]
    fn straight_transform_is_trivial() {
        let t = thin_transform_data(&model(1.0, Profile::Zero, Profile::Zero), 0.1, 9).unwrap();
        assert!(t.sup_f_minus_one == 0.0 && t.sup_d1_f == 0.0 && t.sup_va_minus_veff == 0.0);
    }

    #[test]
    fn pure_bending_matches_closed_form() {
        let k0 = 0.8;
        let t = thin_transform_data(&model(1.0, Profile::Constant { value: k0 }, Profile::Zero), 0.2, 11).unwrap();
        for (m, u) in t.u.iter().enumerate() {
            let expect = -0.25 * k0 * k0 / (1.0 - 0.2 * u * k0).powi(2);
            assert!((t.v_a[t.at(3, m)] - expect).abs() < 1e-12);
        }
        assert!((t.v_a[t.at(3, 5)] + 0.25 * k0 * k0).abs() < 1e-14);
    }

    #[test]
    fn projection_of_first_mode_is_zero() {
        let m = model(0.1, Profile::bump(0.5, 0.0, 2.0), Profile::Zero);
        let mesh = Mesh2D::new(5.0, 1.0, 39, 15).unwrap();
        let form = assemble_thin_reference(&m, &mesh, 0.1).unwrap();
        let chi = discrete_chi1(1.0, 15);
        let rhs: Vec<f64> = (0..mesh.unknowns()).map(|idx| chi[idx % 15] * (1.0 + (idx / 15) as f64)).collect();
        let z0 = effective_potential(&m).z0;
        let r = projection_defect(&form, 0.1, z0 - 1.0, z0, &rhs, 1e-12).unwrap();
        assert_eq!(r.ratio, 0.0);
        assert!(projection_defect(&form, 0.1, z0, z0, &rhs, 1e-12).is_err());
    }
}
