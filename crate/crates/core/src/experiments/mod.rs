//! End-to-end numerical studies. Each returns a [`Verdict`] carrying the
//! tables it was decided on.

mod bent;
mod hardy;
mod projection;
mod quasimode;
mod stability;
mod thin;

pub use bent::{bent_bound_state, bent_trial_oracle, trial_grid_search, BentConfig, TrialSearch};
pub use hardy::{hardy_certificate, neumann_ground_state, HardyConfig, HardyOutcome};
pub use projection::{low_mode_field, projection_study, ProjectionConfig};
pub use quasimode::{quasimode_residual, quasimode_study, QuasimodeConfig};
pub use stability::{stability_study, StabilityConfig};
pub use thin::{thin_limit_sweep, ThinConfig};

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
#[allow(unused_imports)]
use num_traits::Float;

use crate::curves::{make_analytic_curve, Curve, CurveFamily};
use crate::discretize::{assemble_2d, DiscreteForm, EndCondition, Mesh2D};
use crate::effective::richardson;
use crate::eigensolve::{smallest_eigs_with, Method, SpectrumOptions};
use crate::error::{Error, Result};
use crate::frames::{build_rpaf_with, standard_normals, ChartPlan, Frame};
use crate::grid::SGrid;
use crate::profile::Profile;
use crate::stripgeom::{make_strip, make_strip_unchecked, StripModel, TwistProfile, TwistSpec};

#[cfg(feature = "serde")]
fn default_tol() -> f64 {
    1e-9
}

/// How the strip is specified.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields))]
pub enum Geometry {
    /// `k.Theta` and `|Theta'|` given directly.
    Profiles { k_theta: Profile, theta_prime: Profile },
    /// Analytic curve, relatively parallel frame and twisting vector.
    Curve {
        curve: CurveFamily,
        dim: usize,
        twist: TwistSpec,
        /// Initial normals at the window center; standard completion when absent.
        #[cfg_attr(feature = "serde", serde(default))]
        initial_normals: Option<Vec<Vec<f64>>>,
    },
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(deny_unknown_fields))]
pub struct ModelSpec {
    pub a: f64,
    pub geometry: Geometry,
}

/// Curve, frame and twist behind a [`Geometry::Curve`] model.
#[derive(Debug, Clone)]
pub struct BuiltGeometry {
    pub curve: Curve,
    pub frame: Frame,
    pub plan: ChartPlan,
    pub twist: TwistProfile,
}

impl ModelSpec {
    pub fn profiles(a: f64, k_theta: Profile, theta_prime: Profile) -> Self {
        Self { a, geometry: Geometry::Profiles { k_theta, theta_prime } }
    }

    pub fn with_a(&self, a: f64) -> Self {
        Self { a, ..self.clone() }
    }

    pub fn build(&self, grid: SGrid) -> Result<StripModel> {
        self.build_inner(grid, true)
    }

    /// As [`ModelSpec::build`] but without rejecting `a sup |k.Theta| >= 1`.
    pub fn build_unchecked(&self, grid: SGrid) -> Result<StripModel> {
        self.build_inner(grid, false)
    }

    fn build_inner(&self, grid: SGrid, checked: bool) -> Result<StripModel> {
        match &self.geometry {
            Geometry::Profiles { k_theta, theta_prime } => {
                if checked {
                    StripModel::from_profiles(self.a, grid, k_theta, theta_prime)
                } else {
                    StripModel::from_profiles_unchecked(self.a, grid, k_theta, theta_prime)
                }
            }
            Geometry::Curve { .. } => {
                let g = self.build_geometry(grid)?;
                if checked {
                    make_strip(&g.frame, &g.twist, self.a)
                } else {
                    make_strip_unchecked(&g.frame, &g.twist, self.a)
                }
            }
        }
    }

    pub fn build_geometry(&self, grid: SGrid) -> Result<BuiltGeometry> {
        let Geometry::Curve { curve, dim, twist, initial_normals } = &self.geometry else {
            return Err(Error::Hypothesis("model is given by profiles, not by a curve".into()));
        };
        let curve = make_analytic_curve(curve, *dim, grid)?;
        let idx0 = grid.count / 2;
        let normals = match initial_normals {
            Some(n) => n.clone(),
            None => standard_normals(&curve.tangents[idx0]),
        };
        let (frame, plan) = build_rpaf_with(&curve, &normals, idx0, &Default::default())?;
        let twist = TwistProfile::from_spec(twist, dim - 1, grid)?;
        Ok(BuiltGeometry { curve, frame, plan, twist })
    }

    /// Analytic `(k.Theta, |Theta'|)` when the model is given by profiles.
    pub fn as_profiles(&self) -> Option<(&Profile, &Profile)> {
        match &self.geometry {
            Geometry::Profiles { k_theta, theta_prime } => Some((k_theta, theta_prime)),
            Geometry::Curve { .. } => None,
        }
    }
}

/// One rung of a mesh ladder: window `(-S, S)`, `ns x nt` interior nodes.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(deny_unknown_fields))]
pub struct MeshRung {
    pub s_half: f64,
    pub ns: usize,
    pub nt: usize,
}

impl MeshRung {
    pub fn mesh(&self, a: f64) -> Result<Mesh2D> {
        Mesh2D::new(self.s_half, a, self.ns, self.nt)
    }
}

/// Rejects empty ladders and ladders whose rungs do not grow.
pub fn check_ladder(ladder: &[MeshRung]) -> Result<()> {
    if ladder.is_empty() {
        return Err(Error::Hypothesis("empty mesh ladder".into()));
    }
    for w in ladder.windows(2) {
        let grows = w[1].s_half >= w[0].s_half && w[1].ns >= w[0].ns && w[1].nt >= w[0].nt;
        if !grows || w[1] == w[0] {
            return Err(Error::Hypothesis("mesh ladder must be strictly refining".into()));
        }
    }
    Ok(())
}

/// Named numeric table.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Table {
    pub name: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn new(name: &str, columns: &[&str]) -> Self {
        Self { name: name.into(), columns: columns.iter().map(|c| String::from(*c)).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<f64>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let j = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| r[j]).collect())
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Verdict {
    pub claim: String,
    pub passed: bool,
    /// Signed distance to the pass threshold; positive on a pass.
    pub margin: f64,
    pub summary: String,
    pub tables: Vec<Table>,
}

impl Verdict {
    pub fn table(&self, name: &str) -> Option<&Table> {
        self.tables.iter().find(|t| t.name == name)
    }
}

/// Lowest `m` eigenvalues on a mesh and on its refinement, and their
/// Richardson combination.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct RungSpectrum {
    pub mesh: Mesh2D,
    pub coarse: Vec<f64>,
    pub fine: Vec<f64>,
    pub extrapolated: Vec<f64>,
}

pub fn form_on(spec: &ModelSpec, mesh: &Mesh2D, end: EndCondition) -> Result<(StripModel, DiscreteForm)> {
    let model = spec.build(mesh.model_grid())?;
    let form = assemble_2d(&model, mesh, end)?;
    Ok((model, form))
}

pub fn rung_spectrum(
    spec: &ModelSpec,
    mesh: &Mesh2D,
    end: EndCondition,
    m: usize,
    options: &SpectrumOptions,
) -> Result<RungSpectrum> {
    let solve = |mesh: &Mesh2D| -> Result<Vec<f64>> {
        let (_, form) = form_on(spec, mesh, end)?;
        let r = smallest_eigs_with(&form, m, options)?;
        Ok(r.eigenvalues)
    };
    let coarse = solve(mesh)?;
    let fine = solve(&mesh.refined())?;
    let extrapolated = coarse.iter().zip(&fine).map(|(c, f)| richardson(*c, *f)).collect();
    Ok(RungSpectrum { mesh: *mesh, coarse, fine, extrapolated })
}

/// Least-squares slope of `log y` against `log x`.
pub fn loglog_slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len().min(y.len()) as f64;
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = lx.iter().map(|a| (a - mx) * (a - mx)).sum();
    sxy / sxx
}

/// Lowest eigenvalues from several solvers against the dense reference.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct CrossCheck {
    pub reference: Vec<f64>,
    pub others: Vec<(Method, Vec<f64>, f64)>,
}

impl CrossCheck {
    pub fn max_relative_deviation(&self) -> f64 {
        self.others.iter().fold(0.0, |m, (_, _, d)| m.max(*d))
    }
}

pub fn cross_check(form: &DiscreteForm, m: usize, methods: &[Method], seed: u64) -> Result<CrossCheck> {
    let opts = |method| SpectrumOptions { method, seed, tol: 1e-10, ..SpectrumOptions::default() };
    let reference = smallest_eigs_with(form, m, &opts(Method::Dense))?.eigenvalues;
    let mut others = vec![];
    for &method in methods {
        let vals = smallest_eigs_with(form, m, &opts(method))?.eigenvalues;
        let dev = vals.iter().zip(&reference).map(|(a, b)| (a - b).abs() / b.abs().max(1e-300)).fold(0.0, f64::max);
        others.push((method, vals, dev));
    }
    Ok(CrossCheck { reference, others })
}

pub(crate) fn e1(a: f64) -> f64 {
    let x = core::f64::consts::PI / (2.0 * a);
    x * x
}
