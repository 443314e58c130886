use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use super::{e1, rung_spectrum, MeshRung, ModelSpec, Table, Verdict};
use crate::discretize::EndCondition;
use crate::eigensolve::SpectrumOptions;
use crate::error::{Error, Result};
use crate::exec::{try_map, Executor};
use crate::profile::Profile;

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(deny_unknown_fields))]
pub struct StabilityConfig {
    pub a: f64,
    /// `|Theta'|`.
    pub twist: Profile,
    /// Shape of the bending; `k.Theta = eps * shape`.
    pub bend_shape: Profile,
    pub rung: MeshRung,
    pub eps_ladder: Vec<f64>,
    #[cfg_attr(feature = "serde", serde(default = "default_floor_tol"))]
    pub floor_tol: f64,
    /// Also run every `eps` with the twist removed.
    #[cfg_attr(feature = "serde", serde(default = "default_true"))]
    pub untwisted_comparison: bool,
    #[cfg_attr(feature = "serde", serde(default = "super::default_tol"))]
    pub tol: f64,
    #[cfg_attr(feature = "serde", serde(default))]
    pub seed: u64,
}

#[cfg(feature = "serde")]
fn default_floor_tol() -> f64 {
    1e-3
}

#[cfg(feature = "serde")]
fn default_true() -> bool {
    true
}

/// Lowest eigenvalue along a ladder of bending amplitudes. The threshold is
/// the first `eps` with `lambda_1 < E_1 - tol`; the study passes when it is
/// above the first rung and, if requested, the untwisted strip dips below
/// `E_1` somewhere on the ladder.
pub fn stability_study<E: Executor + ?Sized>(config: &StabilityConfig, exec: &E) -> Result<Verdict> {
    if config.eps_ladder.is_empty() {
        return Err(Error::Hypothesis("empty eps ladder".into()));
    }
    if config.eps_ladder.windows(2).any(|w| !(w[1] > w[0])) || config.eps_ladder[0] < 0.0 {
        return Err(Error::Hypothesis("eps ladder must be non-negative and increasing".into()));
    }
    if config.twist.is_zero() {
        return Err(Error::Hypothesis("stability study needs a twisted strip".into()));
    }
    let a = config.a;
    let e1 = e1(a);
    let mesh = config.rung.mesh(a)?;
    let options = SpectrumOptions { tol: config.tol, seed: config.seed, ..SpectrumOptions::default() };
    let spec_for = |eps: f64, twisted: bool| {
        let bend = Profile::Scaled { factor: eps, profile: alloc::boxed::Box::new(config.bend_shape.clone()) };
        let twist = if twisted { config.twist.clone() } else { Profile::Zero };
        ModelSpec::profiles(a, bend, twist)
    };
    let jobs: Vec<(f64, bool)> = config
        .eps_ladder
        .iter()
        .flat_map(|&e| {
            let mut v = vec![(e, true)];
            if config.untwisted_comparison {
                v.push((e, false));
            }
            v
        })
        .collect();
    let values = try_map(exec, jobs.len(), |j| {
        let (eps, twisted) = jobs[j];
        rung_spectrum(&spec_for(eps, twisted), &mesh, EndCondition::Dirichlet, 1, &options).map(|r| r.extrapolated[0])
    })?;
    let mut table = Table::new("lambda1", &["eps", "twisted", "lambda1", "lambda1_minus_e1"]);
    let mut twisted = Vec::new();
    let mut untwisted = Vec::new();
    for ((eps, tw), l) in jobs.iter().zip(&values) {
        table.push(vec![*eps, if *tw { 1.0 } else { 0.0 }, *l, l - e1]);
        if *tw {
            twisted.push((*eps, *l));
        } else {
            untwisted.push((*eps, *l));
        }
    }
    let threshold = twisted.iter().find(|(_, l)| *l < e1 - config.floor_tol).map(|(e, _)| *e);
    let threshold_positive = threshold.map_or(true, |t| t > config.eps_ladder[0]);
    let crossing = untwisted.iter().find(|(_, l)| *l < e1).map(|(e, _)| *e);
    let passed = threshold_positive && (!config.untwisted_comparison || crossing.is_some());
    let margin = twisted[0].1 - (e1 - config.floor_tol);
    let summary = format!(
        "twisted: lambda_1 - E_1 = {:.3e} at eps = {}, threshold {}; untwisted crossing below E_1 {}",
        twisted[0].1 - e1,
        twisted[0].0,
        threshold.map_or("not reached on the ladder".into(), |t| format!("at eps = {t}")),
        crossing.map_or("not found".into(), |c| format!("at eps = {c}")),
    );
    Ok(Verdict { claim: "stability".into(), passed, margin, summary, tables: vec![table] })
}
