use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use super::{form_on, loglog_slope, ModelSpec, Table, Verdict};
use crate::discretize::{assemble_effective_1d, discrete_e1, EffectivePotentialKind, EndCondition, Mesh1D, Mesh2D};
use crate::effective::{richardson, thin_transform_data};
use crate::eigensolve::{smallest_eigs_with, SpectrumOptions};
use crate::error::{Assumption, Error, Result};
use crate::exec::{try_map, Executor};

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(deny_unknown_fields))]
pub struct ThinConfig {
    /// The half-width in `model` is replaced by each ladder value.
    pub model: ModelSpec,
    pub s_half: f64,
    pub ns: usize,
    /// Transverse nodes, the same in the scaled variable for every `a`.
    pub nt: usize,
    pub a_ladder: Vec<f64>,
    #[cfg_attr(feature = "serde", serde(default = "default_u_count"))]
    pub u_count: usize,
    #[cfg_attr(feature = "serde", serde(default = "default_slope_range"))]
    pub slope_range: [f64; 2],
    #[cfg_attr(feature = "serde", serde(default = "super::default_tol"))]
    pub tol: f64,
    #[cfg_attr(feature = "serde", serde(default))]
    pub seed: u64,
}

#[cfg(feature = "serde")]
fn default_u_count() -> usize {
    65
}

#[cfg(feature = "serde")]
fn default_slope_range() -> [f64; 2] {
    [0.8, 1.5]
}

struct Rung {
    lambda_minus_e1: f64,
    mu: f64,
    sup_va: f64,
}

/// `lambda_1(H) - E_1` on the strip and `mu_1` of `-d^2/ds^2 + V_eff` on
/// the same window, both extrapolated in the mesh size.
fn thin_rung(config: &ThinConfig, a: f64, options: &SpectrumOptions) -> Result<Rung> {
    let spec = config.model.with_a(a);
    let mesh = Mesh2D::new(config.s_half, a, config.ns, config.nt)?;
    let shifted = |mesh: &Mesh2D| -> Result<f64> {
        let (_, form) = form_on(&spec, mesh, EndCondition::Dirichlet)?;
        Ok(smallest_eigs_with(&form, 1, options)?.eigenvalues[0] - discrete_e1(a, mesh.nt))
    };
    let lambda_minus_e1 = richardson(shifted(&mesh)?, shifted(&mesh.refined())?);
    let model = spec.build(mesh.refined().model_grid())?;
    let line = Mesh1D::new(-config.s_half, config.s_half, config.ns)?;
    let eff = |line: &Mesh1D| -> Result<f64> {
        let form = assemble_effective_1d(&model, line, EffectivePotentialKind::VEff)?;
        Ok(smallest_eigs_with(&form, 1, options)?.eigenvalues[0])
    };
    let mu = richardson(eff(&line)?, eff(&line.refined())?);
    let sup_va = thin_transform_data(&model, a, config.u_count)?.sup_va_minus_veff;
    Ok(Rung { lambda_minus_e1, mu, sup_va })
}

/// `e(a) = |lambda_1(H) - E_1 - mu_1(H_eff)|` along `a_ladder`; passes when
/// the log-log slope lies in `slope_range` and `e` decreases with `a`.
pub fn thin_limit_sweep<E: Executor + ?Sized>(config: &ThinConfig, exec: &E) -> Result<Verdict> {
    if config.a_ladder.len() < 2 {
        return Err(Error::Hypothesis("thin sweep needs at least two half-widths".into()));
    }
    if config.a_ladder.windows(2).any(|w| !(w[1] < w[0])) {
        return Err(Error::Hypothesis("half-width ladder must be decreasing".into()));
    }
    for &a in &config.a_ladder {
        let mesh = Mesh2D::new(config.s_half, a, config.ns, config.nt)?;
        let report = config.model.with_a(a).build(mesh.model_grid())?.assumption_report();
        if !report.thin_ass_ok || !report.ass21_ok {
            let which = if report.ass21_ok { Assumption::ThinRegularity } else { Assumption::BoundedGeodesicCurvature };
            let index = report.witnesses_for(which).first().copied().unwrap_or(0);
            return Err(Error::AssumptionViolated { assumption: which, index, value: a });
        }
    }
    let options = SpectrumOptions { tol: config.tol, seed: config.seed, ..SpectrumOptions::default() };
    let rungs = try_map(exec, config.a_ladder.len(), |r| thin_rung(config, config.a_ladder[r], &options))?;
    let e: Vec<f64> = rungs.iter().map(|r| (r.lambda_minus_e1 - r.mu).abs()).collect();
    let sup: Vec<f64> = rungs.iter().map(|r| r.sup_va).collect();
    let slope = loglog_slope(&config.a_ladder, &e);
    let va_slope = loglog_slope(&config.a_ladder, &sup);
    let monotone = e.windows(2).all(|w| w[1] < w[0]);
    let [lo, hi] = config.slope_range;
    let passed = monotone && slope >= lo && slope <= hi;
    let margin = (slope - lo).min(hi - slope);
    let mut table = Table::new("thin", &["a", "lambda1_minus_e1", "mu1", "e", "sup_va_minus_veff"]);
    for ((a, r), ei) in config.a_ladder.iter().zip(&rungs).zip(&e) {
        table.push(vec![*a, r.lambda_minus_e1, r.mu, *ei, r.sup_va]);
    }
    let ratios: Vec<f64> = sup.windows(2).map(|w| w[0] / w[1]).collect();
    let summary = format!(
        "log-log slope of e(a) = {slope:.4} (accepted range [{lo}, {hi}]), e decreasing: {monotone}; \
         slope of sup|V_a - V_eff| = {va_slope:.4}, successive ratios {ratios:?}"
    );
    Ok(Verdict { claim: "thin_limit".into(), passed, margin, summary, tables: vec![table] })
}
