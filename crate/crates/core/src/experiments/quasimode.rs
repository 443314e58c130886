use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
#[allow(unused_imports)]
use num_traits::Float;

use super::{e1, form_on, MeshRung, ModelSpec, Table, Verdict};
use crate::discretize::{discrete_chi1, discrete_e1, DiscreteForm, EndCondition, Mesh2D};
use crate::eigensolve::solve_shifted;
use crate::error::{Error, Result};
use crate::exec::{try_map, Executor};
use crate::profile::{bump, bump_l2_norm_sq};

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(deny_unknown_fields))]
pub struct QuasimodeConfig {
    pub model: ModelSpec,
    pub rung: MeshRung,
    #[cfg_attr(feature = "serde", serde(default = "default_cg_tol"))]
    pub tol: f64,
}

#[cfg(feature = "serde")]
fn default_cg_tol() -> f64 {
    1e-10
}

/// `r_n = |(K - eta_h M) psi_n|_{(K + M)^{-1}} / |psi_n|_M` for
/// `psi_n = phi_n chi_1 e^{i lambda_h s}`, `phi_n(s) = n^{-1/2} phi(s/n - n)`.
/// `lambda_h` solves the discrete dispersion relation for `eta - E_1`.
pub fn quasimode_residual(form: &DiscreteForm, mesh: &Mesh2D, eta: f64, n: usize, tol: f64) -> Result<f64> {
    let a = mesh.a;
    let k2 = eta - e1(a);
    if k2 < -1e-12 * eta.abs() {
        return Err(Error::OutOfRange { what: "E_1 - eta", value: -k2, limit: 0.0 });
    }
    let nf = n as f64;
    let needed = nf * nf + nf;
    if needed >= mesh.s_half - mesh.hs() {
        return Err(Error::WindowTooSmall { needed: needed + mesh.hs(), got: mesh.s_half });
    }
    let hs = mesh.hs();
    let lam = ((1.0 - 0.5 * k2.max(0.0) * hs * hs).clamp(-1.0, 1.0)).acos() / hs;
    let eta_h = discrete_e1(a, mesh.nt) + k2.max(0.0);
    let chi = discrete_chi1(a, mesh.nt);
    let norm = 1.0 / bump_l2_norm_sq().sqrt();
    let dim = mesh.unknowns();
    let (mut re, mut im) = (vec![0.0; dim], vec![0.0; dim]);
    for i in 0..mesh.ns {
        let s = mesh.s_node(i);
        let phi = norm * bump(s / nf - nf) / nf.sqrt();
        if phi == 0.0 {
            continue;
        }
        let (sn, cs) = (lam * s).sin_cos();
        for m in 0..mesh.nt {
            let idx = mesh.index(i, m);
            re[idx] = phi * chi[m] * cs;
            im[idx] = phi * chi[m] * sn;
        }
    }
    let psi_norm_sq = form.mass_norm(&re).powi(2) + form.mass_norm(&im).powi(2);
    let mut dual = 0.0;
    for part in [&re, &im] {
        let mut g = form.stiffness.apply(part);
        for (gi, (p, w)) in g.iter_mut().zip(part.iter().zip(&form.mass)) {
            *gi -= eta_h * w * p;
        }
        let y = solve_shifted(form, -1.0, &g, tol)?;
        dual += g.iter().zip(&y).map(|(a, b)| a * b).sum::<f64>();
    }
    Ok((dual.max(0.0) / psi_norm_sq).sqrt())
}

/// Quasimode residuals along `n_ladder` for each energy in `etas`; passes
/// when every sequence is strictly decreasing.
pub fn quasimode_study<E: Executor + ?Sized>(
    config: &QuasimodeConfig,
    etas: &[f64],
    n_ladder: &[usize],
    exec: &E,
) -> Result<Verdict> {
    if n_ladder.is_empty() || etas.is_empty() {
        return Err(Error::Hypothesis("empty quasimode ladder".into()));
    }
    let mesh = config.rung.mesh(config.model.a)?;
    let (model, form) = form_on(&config.model, &mesh, EndCondition::Dirichlet)?;
    if !model.assumption_report().asymptotically_flat_ok {
        return Err(Error::Hypothesis("quasimode study needs an asymptotically flat strip".into()));
    }
    let jobs: Vec<(f64, usize)> = etas.iter().flat_map(|&e| n_ladder.iter().map(move |&n| (e, n))).collect();
    let r = try_map(exec, jobs.len(), |j| quasimode_residual(&form, &mesh, jobs[j].0, jobs[j].1, config.tol))?;
    let mut table = Table::new("residuals", &["eta", "n", "r_n", "n_times_r_n"]);
    let mut passed = true;
    let mut margin = f64::INFINITY;
    for (k, _) in etas.iter().enumerate() {
        let seq = &r[k * n_ladder.len()..(k + 1) * n_ladder.len()];
        for w in seq.windows(2) {
            passed &= w[1] < w[0];
            margin = margin.min((w[0] - w[1]) / w[0]);
        }
    }
    for ((eta, n), rn) in jobs.iter().zip(&r) {
        table.push(vec![*eta, *n as f64, *rn, *n as f64 * rn]);
    }
    if n_ladder.len() < 2 {
        margin = 0.0;
    }
    let summary = format!(
        "dual-norm surrogate |(K - eta M) psi_n|_(K+M)^-1 / |psi_n| strictly decreasing in n: {passed} \
         (smallest relative drop {margin:.3})"
    );
    Ok(Verdict { claim: "quasimode".into(), passed, margin, summary, tables: vec![table] })
}
