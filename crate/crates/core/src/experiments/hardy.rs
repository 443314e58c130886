use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::SQRT_2;
#[allow(unused_imports)]
use num_traits::Float;

use super::{check_ladder, e1, form_on, rung_spectrum, MeshRung, ModelSpec, Table, Verdict};
use crate::discretize::{discrete_e1, EndCondition};
use crate::effective::{lambda_profile, LambdaProfile};
use crate::eigensolve::{smallest_eigs_matrices, Method, SpectrumOptions};
use crate::error::{Assumption, Error, Result};
use crate::exec::{try_map, Executor};
use crate::grid::SGrid;
use crate::linalg::TripletBuilder;

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(deny_unknown_fields))]
pub struct HardyConfig {
    pub model: ModelSpec,
    pub ladder: Vec<MeshRung>,
    #[cfg_attr(feature = "serde", serde(default = "super::default_tol"))]
    pub tol: f64,
    #[cfg_attr(feature = "serde", serde(default))]
    pub seed: u64,
    /// Transverse nodes for the `lambda` profile (extrapolated with `2 nt + 1`).
    #[cfg_attr(feature = "serde", serde(default = "default_lambda_nt"))]
    pub lambda_nt: usize,
    /// Interval `I` of the analytic bound; the hull of the twist support when absent.
    #[cfg_attr(feature = "serde", serde(default))]
    pub interval: Option<[f64; 2]>,
    /// Relative spread allowed between the last two rungs.
    #[cfg_attr(feature = "serde", serde(default = "default_stability"))]
    pub stability: f64,
    /// Tolerance of the check `lambda_1 >= E_1`.
    #[cfg_attr(feature = "serde", serde(default = "default_floor_tol"))]
    pub floor_tol: f64,
}

#[cfg(feature = "serde")]
fn default_lambda_nt() -> usize {
    100
}

#[cfg(feature = "serde")]
fn default_stability() -> f64 {
    0.2
}

#[cfg(feature = "serde")]
fn default_floor_tol() -> f64 {
    1e-3
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct HardyOutcome {
    pub verdict: Verdict,
    pub c_num: Vec<f64>,
    pub c_ana: f64,
    pub lambda0: f64,
    pub interval: [f64; 2],
    pub profile: LambdaProfile,
    pub lambda1: f64,
}

/// Lowest eigenvalue of `-d^2/ds^2 + V` on `grid` with Neumann ends,
/// on the vertex lattice with half cells at the ends.
pub fn neumann_ground_state(grid: &SGrid, potential: &[f64]) -> Result<f64> {
    let n = grid.count;
    if potential.len() != n {
        return Err(Error::GridMismatch);
    }
    let h = grid.ds;
    let mut b = TripletBuilder::with_capacity(n, 3 * n);
    let mut mass = vec![h; n];
    mass[0] = 0.5 * h;
    mass[n - 1] = 0.5 * h;
    for j in 0..n - 1 {
        b.add_edge(j, j + 1, 1.0 / h);
    }
    for j in 0..n {
        b.add(j, j, potential[j] * mass[j]);
    }
    let opts = SpectrumOptions::with_method(Method::Tridiagonal);
    Ok(smallest_eigs_matrices(&b.build(), &mass, 1, &opts)?.eigenvalues[0])
}

/// `inf_s (1 + s^2) / (1 + (s - s0)^2)`: the minimum over the two critical
/// points `s^2 - s0 s - 1 = 0` and the limit 1 at infinity.
pub(crate) fn weight_ratio_inf(s0: f64) -> f64 {
    let g = |s: f64| (1.0 + s * s) / (1.0 + (s - s0) * (s - s0));
    let r = (s0 * s0 + 4.0).sqrt();
    g(0.5 * (s0 - r)).min(g(0.5 * (s0 + r))).min(1.0)
}

fn support_hull(grid: &SGrid, values: &[f64]) -> Option<[f64; 2]> {
    let max = values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let idx: Vec<usize> = (0..values.len()).filter(|&i| values[i].abs() > 1e-12 * max && max > 0.0).collect();
    Some([grid.node(*idx.first()?), grid.node(*idx.last()?)])
}

/// Smallest `c` with `K - E_1 M >= c M_rho`, `rho = 1 / (1 + s^2)`, on every
/// rung, together with the constant produced by the interpolation argument.
pub fn hardy_certificate<E: Executor + ?Sized>(config: &HardyConfig, exec: &E) -> Result<HardyOutcome> {
    check_ladder(&config.ladder)?;
    let spec = &config.model;
    let a = spec.a;
    let last = config.ladder[config.ladder.len() - 1];
    let finest = spec.build(last.mesh(a)?.model_grid())?;
    if let Some(i) = finest.k_theta.iter().position(|k| k.abs() > 1e-12) {
        return Err(Error::BendingPresent { index: i, k_theta: finest.k_theta[i] });
    }
    if finest.is_untwisted(1e-12) {
        return Err(Error::Hypothesis("Hardy study needs a nonzero twist".into()));
    }
    if a * finest.max_theta_prime() > SQRT_2 {
        let i = (0..finest.grid.count).find(|&i| a * finest.theta_prime[i] > SQRT_2).unwrap_or(0);
        return Err(Error::AssumptionViolated {
            assumption: Assumption::HardySmallness,
            index: i,
            value: a * finest.theta_prime[i],
        });
    }

    let options = SpectrumOptions { tol: config.tol, seed: config.seed, ..SpectrumOptions::default() };
    let c_num = try_map(exec, config.ladder.len(), |r| -> Result<f64> {
        let mesh = config.ladder[r].mesh(a)?;
        let (_, form) = form_on(spec, &mesh, EndCondition::Dirichlet)?;
        let shifted = form.stiffness.add_diagonal(-discrete_e1(a, mesh.nt), &form.mass);
        let weighted: Vec<f64> = form
            .mass
            .iter()
            .enumerate()
            .map(|(idx, m)| {
                let s = mesh.s_node(idx / mesh.nt);
                m / (1.0 + s * s)
            })
            .collect();
        Ok(smallest_eigs_matrices(&shifted, &weighted, 1, &options)?.eigenvalues[0])
    })?;

    let profile = lambda_profile(&finest, config.lambda_nt, true, true, exec)?;
    let beta_max = finest.max_theta_prime();
    let negative = profile.lambda.iter().cloned().fold(f64::INFINITY, f64::min);
    let positive_on_bump = finest
        .theta_prime
        .iter()
        .zip(&profile.lambda)
        .filter(|(b, _)| b.abs() >= 1e-4 * beta_max)
        .all(|(_, l)| *l > 0.0);
    let zero_off_bump =
        finest.theta_prime.iter().zip(&profile.lambda).filter(|(b, _)| **b == 0.0).all(|(_, l)| l.abs() <= 1e-10);

    let interval = match config.interval {
        Some(i) => i,
        None => support_hull(&finest.grid, &finest.theta_prime)
            .ok_or_else(|| Error::Hypothesis("twist vanishes on the window".into()))?,
    };
    let len = interval[1] - interval[0];
    if !(len > 0.0) {
        return Err(Error::NonPositive { name: "|I|", value: len });
    }
    let igrid = SGrid::spanning(interval[0], interval[1], 401)?;
    let imodel = spec.build(igrid)?;
    let iprofile = lambda_profile(&imodel, config.lambda_nt, true, true, exec)?;
    let lambda0 = neumann_ground_state(&igrid, &iprofile.lambda)?;
    let beta_i = imodel.max_theta_prime();
    let cc = (1.0 + a * a * beta_i * beta_i).sqrt();
    let k_eta = 16.0 * (2.0 / len).powi(2) + 2.0;
    let s0 = 0.5 * (interval[0] + interval[1]);
    let c_ana = lambda0 / (cc * cc * (16.0 * lambda0 + cc * k_eta)) * weight_ratio_inf(s0);

    let plain = rung_spectrum(spec, &last.mesh(a)?, EndCondition::Dirichlet, 1, &options)?;
    let lambda1 = plain.extrapolated[0];

    let n = c_num.len();
    let (c_last, c_prev) = (c_num[n - 1], if n > 1 { c_num[n - 2] } else { c_num[n - 1] });
    let spread = (c_last - c_prev).abs() / c_last.abs().max(f64::MIN_POSITIVE);
    let checks = [
        negative >= -1e-8,
        positive_on_bump,
        zero_off_bump,
        c_last > 0.0,
        n > 1 && spread <= config.stability,
        c_last >= c_ana,
        lambda1 >= e1(a) - config.floor_tol,
    ];
    let passed = checks.iter().all(|c| *c);
    let margin = (c_last - c_ana).min(config.stability - spread).min(negative + 1e-8);

    let mut rungs = Table::new("c_num", &["S", "ns", "nt", "c_num"]);
    for (r, c) in config.ladder.iter().zip(&c_num) {
        rungs.push(vec![r.s_half, r.ns as f64, r.nt as f64, *c]);
    }
    let mut lam = Table::new("lambda", &["s", "lambda"]);
    for (i, l) in profile.lambda.iter().enumerate() {
        lam.push(vec![profile.grid.node(i), *l]);
    }
    let mut consts = Table::new("constants", &["lambda0", "C", "K_eta", "s0", "c_ana", "lambda1", "E1"]);
    consts.push(vec![lambda0, cc, k_eta, s0, c_ana, lambda1, e1(a)]);
    let summary = format!(
        "c_num = {c_last:.6e} (previous rung {c_prev:.6e}, spread {spread:.3}), c_ana = {c_ana:.6e}, \
         min lambda = {negative:.3e}, lambda > 0 on twist: {positive_on_bump}, lambda_1 - E_1 = {:.3e}",
        lambda1 - e1(a)
    );
    let verdict =
        Verdict { claim: "hardy_certificate".into(), passed, margin, summary, tables: vec![rungs, lam, consts] };
    Ok(HardyOutcome { verdict, c_num, c_ana, lambda0, interval, profile, lambda1 })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn weight_ratio_closed_form() {
        assert!((weight_ratio_inf(0.0) - 1.0).abs() < 1e-15);
        for s0 in [0.5, -1.0, 3.0] {
            let brute = (-4000..=4000)
                .map(|k| k as f64 * 0.01)
                .map(|s| (1.0 + s * s) / (1.0 + (s - s0) * (s - s0)))
                .fold(1.0, f64::min);
            assert!((weight_ratio_inf(s0) - brute).abs() < 1e-4);
        }
    }

    #[test]
    fn neumann_constant_potential() {
        let g = SGrid::spanning(0.0, 2.0, 101).unwrap();
        let l = neumann_ground_state(&g, &vec![0.3; 101]).unwrap();
        assert!((l - 0.3).abs() < 1e-12);
    }
}
