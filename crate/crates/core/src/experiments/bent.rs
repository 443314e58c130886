use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::{FRAC_PI_2, PI};
#[allow(unused_imports)]
use num_traits::Float;

use super::{check_ladder, e1, rung_spectrum, MeshRung, ModelSpec, Table, Verdict};
use crate::discretize::EndCondition;
use crate::eigensolve::SpectrumOptions;
use crate::error::{Error, Result};
use crate::exec::{try_map, Executor};
use crate::profile::{plateau, plateau_d1, simpson, Profile};

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(deny_unknown_fields))]
pub struct BentConfig {
    pub model: ModelSpec,
    /// Windows of increasing size at a common resolution.
    pub ladder: Vec<MeshRung>,
    #[cfg_attr(feature = "serde", serde(default = "super::default_tol"))]
    pub tol: f64,
    #[cfg_attr(feature = "serde", serde(default))]
    pub seed: u64,
    /// Required margin in units of the straight-strip error.
    #[cfg_attr(feature = "serde", serde(default = "default_margin_factor"))]
    pub margin_factor: f64,
    /// Straight-strip error to compare against; when absent, the error of the
    /// extrapolated straight eigenvalue on the finest rung.
    #[cfg_attr(feature = "serde", serde(default))]
    pub reference_error: Option<f64>,
}

#[cfg(feature = "serde")]
fn default_margin_factor() -> f64 {
    3.0
}

fn check_bent_hypotheses(spec: &ModelSpec, rung: &MeshRung) -> Result<()> {
    let model = spec.build(rung.mesh(spec.a)?.model_grid())?;
    if !model.is_untwisted(1e-12) {
        return Err(Error::Hypothesis("bound-state study needs an untwisted strip".into()));
    }
    if model.is_unbent(1e-12) {
        return Err(Error::Hypothesis("bound-state study needs nonzero bending".into()));
    }
    let count = model.grid.count;
    let edge = (count / 10).max(1);
    if (0..edge).chain(count - edge..count).any(|i| model.k_theta[i].abs() > 1e-12) {
        return Err(Error::Hypothesis("bending must vanish near the window ends".into()));
    }
    Ok(())
}

/// Lowest Dirichlet eigenvalue on each window of the ladder, extrapolated
/// in the mesh size; passes when the largest window sits below `E_1` by
/// the required margin and the values do not increase with `S`.
pub fn bent_bound_state<E: Executor + ?Sized>(config: &BentConfig, exec: &E) -> Result<Verdict> {
    check_ladder(&config.ladder)?;
    for rung in &config.ladder {
        check_bent_hypotheses(&config.model, rung)?;
    }
    let a = config.model.a;
    let options = SpectrumOptions { tol: config.tol, seed: config.seed, ..SpectrumOptions::default() };
    let rungs = try_map(exec, config.ladder.len(), |r| {
        let mesh = config.ladder[r].mesh(a)?;
        rung_spectrum(&config.model, &mesh, EndCondition::Dirichlet, 1, &options)
    })?;
    let last = config.ladder[config.ladder.len() - 1];
    let reference_error = match config.reference_error {
        Some(e) => e,
        None => {
            let straight = ModelSpec::profiles(a, Profile::Zero, Profile::Zero);
            let lam = rung_spectrum(&straight, &last.mesh(a)?, EndCondition::Dirichlet, 1, &options)?.extrapolated[0];
            let exact = e1(a) + (PI / (2.0 * last.s_half)).powi(2);
            (lam - exact).abs()
        }
    };
    let mut table =
        Table::new("ladder", &["S", "ns", "nt", "lambda_coarse", "lambda_fine", "lambda_extrapolated", "gap_below_e1"]);
    for (rung, spec) in config.ladder.iter().zip(&rungs) {
        table.push(vec![
            rung.s_half,
            rung.ns as f64,
            rung.nt as f64,
            spec.coarse[0],
            spec.fine[0],
            spec.extrapolated[0],
            e1(a) - spec.extrapolated[0],
        ]);
    }
    let values: Vec<f64> = rungs.iter().map(|r| r.extrapolated[0]).collect();
    let monotone = values.windows(2).all(|w| w[1] <= w[0] + 1e-10);
    let gap = e1(a) - values[values.len() - 1];
    let required = config.margin_factor * reference_error;
    let margin = gap - required;
    let passed = margin > 0.0 && monotone;
    let summary = format!(
        "lambda_1 = {:.10} at S = {}, E_1 - lambda_1 = {:.3e}, required {:.3e} ({} x straight error {:.3e}); monotone in S: {}",
        values[values.len() - 1],
        last.s_half,
        gap,
        required,
        config.margin_factor,
        reference_error,
        monotone
    );
    Ok(Verdict { claim: "bent_bound_state".into(), passed, margin, summary, tables: vec![table] })
}

fn untwisted_profile(spec: &ModelSpec) -> Result<&Profile> {
    let (k, b) =
        spec.as_profiles().ok_or_else(|| Error::Hypothesis("trial oracle needs k.Theta given as a profile".into()))?;
    if !b.is_zero() {
        return Err(Error::Hypothesis("trial oracle needs an untwisted strip".into()));
    }
    Ok(k)
}

fn support_of(p: &Profile, what: &str) -> Result<Option<(f64, f64)>> {
    p.support().ok_or_else(|| Error::Hypothesis(format!("{what} must be compactly supported")))
}

/// `h[psi] - E_1 |psi|^2` for `psi = phi_n chi_1 + eps eta t chi_1` with
/// `phi_n(s) = phi_1(s / n)`, by Simpson quadrature. Outside the supports
/// of `k.Theta` and `eta` the transverse integral is done in closed form.
pub fn bent_trial_oracle(spec: &ModelSpec, window: f64, n: usize, eps: f64, eta: &Profile) -> Result<f64> {
    let kappa = untwisted_profile(spec)?;
    let a = spec.a;
    if n == 0 {
        return Err(Error::NonPositive { name: "n", value: 0.0 });
    }
    let eta_support = support_of(eta, "eta")?;
    if let Some((lo, hi)) = eta_support {
        if lo < -window || hi > window {
            return Err(Error::WindowTooSmall { needed: lo.abs().max(hi.abs()), got: window });
        }
    }
    let nf = n as f64;
    let hull = [support_of(kappa, "k.Theta")?, eta_support]
        .into_iter()
        .flatten()
        .fold(None::<(f64, f64)>, |acc, (lo, hi)| Some(acc.map_or((lo, hi), |(a, b)| (a.min(lo), b.max(hi)))));
    let e1 = e1(a);
    let phi = |s: f64| plateau(s / nf);
    let dphi = |s: f64| plateau_d1(s / nf) / nf;
    let outer = |lo: f64, hi: f64| -> f64 {
        if hi <= lo {
            0.0
        } else {
            simpson(lo, hi, 4000, |s| dphi(s) * dphi(s))
        }
    };
    let (lo, hi) = hull.unwrap_or((0.0, 0.0));
    let mut total = outer(-2.0 * nf, lo.min(2.0 * nf)) + outer(hi.max(-2.0 * nf), 2.0 * nf);
    if hi > lo {
        const T_POINTS: usize = 129;
        let norm = 1.0 / a.sqrt();
        let w = FRAC_PI_2 / a;
        let t_weights = crate::profile::simpson_weights(-a, a, T_POINTS);
        let ht = 2.0 * a / (T_POINTS - 1) as f64;
        let column = |s: f64| -> f64 {
            let (k, p, dp, e, de) = (kappa.value(s), phi(s), dphi(s), eta.value(s), eta.derivative(s));
            let mut acc = 0.0;
            for (q, wq) in t_weights.iter().enumerate() {
                let t = -a + q as f64 * ht;
                let chi = norm * (w * t).cos();
                let dchi = -norm * w * (w * t).sin();
                let f = 1.0 - t * k;
                let ds = dp * chi + eps * de * t * chi;
                let dt = p * dchi + eps * e * (chi + t * dchi);
                let psi = p * chi + eps * e * t * chi;
                acc += wq * (ds * ds / f + dt * dt * f - e1 * psi * psi * f);
            }
            acc
        };
        total += simpson(lo, hi, 800, column);
    }
    Ok(total)
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct TrialSearch {
    pub n: usize,
    pub eps: f64,
    pub value: f64,
    pub table: Table,
}

/// Grid search for the most negative trial value.
pub fn trial_grid_search(
    spec: &ModelSpec,
    window: f64,
    eta: &Profile,
    ns: &[usize],
    epss: &[f64],
) -> Result<TrialSearch> {
    let mut table = Table::new("trial_values", &["n", "eps", "h1"]);
    let mut best: Option<(usize, f64, f64)> = None;
    for &n in ns {
        for &eps in epss {
            let v = bent_trial_oracle(spec, window, n, eps, eta)?;
            table.push(vec![n as f64, eps, v]);
            if best.map_or(true, |(_, _, b)| v < b) {
                best = Some((n, eps, v));
            }
        }
    }
    let (n, eps, value) = best.ok_or_else(|| Error::Hypothesis("empty trial grid".into()))?;
    Ok(TrialSearch { n, eps, value, table })
}
