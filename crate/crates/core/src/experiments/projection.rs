use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;
#[allow(unused_imports)]
use num_traits::Float;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{ModelSpec, Table, Verdict};
use crate::discretize::{assemble_thin_reference, Mesh2D};
use crate::effective::{effective_potential, projection_defect, DefectReport};
use crate::error::{Error, Result};
use crate::exec::{try_map, Executor};

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(deny_unknown_fields))]
pub struct ProjectionConfig {
    /// Supplies `V_eff`; its half-width is ignored in favor of `a_value`.
    pub model: ModelSpec,
    pub a_value: f64,
    pub s_half: f64,
    pub ns: usize,
    pub nu: usize,
    #[cfg_attr(feature = "serde", serde(default = "default_samples"))]
    pub samples: usize,
    /// Right-hand sides mix `sin` modes up to this index in each variable.
    #[cfg_attr(feature = "serde", serde(default = "default_modes"))]
    pub modes: usize,
    /// `z = z_0 - z_offset`.
    #[cfg_attr(feature = "serde", serde(default = "default_offset"))]
    pub z_offset: f64,
    #[cfg_attr(feature = "serde", serde(default))]
    pub seed: u64,
    #[cfg_attr(feature = "serde", serde(default = "default_cg_tol"))]
    pub tol: f64,
}

#[cfg(feature = "serde")]
fn default_samples() -> usize {
    20
}

#[cfg(feature = "serde")]
fn default_modes() -> usize {
    4
}

#[cfg(feature = "serde")]
fn default_offset() -> f64 {
    1.0
}

#[cfg(feature = "serde")]
fn default_cg_tol() -> f64 {
    1e-12
}

/// `sum_{p, q <= modes} c_pq sin(p pi (s + S) / 2S) sin(q pi (u + 1) / 2)`
/// with coefficients uniform in `[-1, 1]`.
pub fn low_mode_field(mesh: &Mesh2D, modes: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let coeff: Vec<f64> = (0..modes * modes).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let mut out = vec![0.0; mesh.unknowns()];
    for i in 0..mesh.ns {
        let xs = (mesh.s_node(i) + mesh.s_half) / (2.0 * mesh.s_half);
        for m in 0..mesh.nt {
            let xu = (mesh.t_node(m) + mesh.a) / (2.0 * mesh.a);
            let mut v = 0.0;
            for p in 0..modes {
                for q in 0..modes {
                    v += coeff[p * modes + q] * ((p + 1) as f64 * PI * xs).sin() * ((q + 1) as f64 * PI * xu).sin();
                }
            }
            out[mesh.index(i, m)] = v;
        }
    }
    out
}

/// Projection defect for `samples` seeded right-hand sides; passes when
/// every ratio respects `1 / (E_2 - E_1)`.
pub fn projection_study<E: Executor + ?Sized>(config: &ProjectionConfig, exec: &E) -> Result<Verdict> {
    if config.samples == 0 || config.modes == 0 {
        return Err(Error::Hypothesis("projection study needs samples and modes".into()));
    }
    if !(config.z_offset > 0.0) {
        return Err(Error::NonPositive { name: "z_offset", value: config.z_offset });
    }
    let a = config.a_value;
    let mesh = Mesh2D::new(config.s_half, 1.0, config.ns, config.nu)?;
    let model = config.model.with_a(a).build(mesh.model_grid())?;
    let form = assemble_thin_reference(&model, &mesh, a)?;
    let z0 = effective_potential(&model).z0;
    let z = z0 - config.z_offset;
    let reports: Vec<DefectReport> = try_map(exec, config.samples, |k| {
        let rhs = low_mode_field(&mesh, config.modes, config.seed.wrapping_add(k as u64));
        projection_defect(&form, a, z, z0, &rhs, config.tol)
    })?;
    let gap = reports[0].gap_bound;
    let printed = reports[0].printed_bound;
    let worst = reports.iter().fold(0.0f64, |m, r| m.max(r.ratio));
    let above_printed = reports.iter().filter(|r| r.ratio > printed).count();
    let mut table = Table::new("defects", &["sample", "ratio", "gap_bound", "printed_bound"]);
    for (k, r) in reports.iter().enumerate() {
        table.push(vec![k as f64, r.ratio, r.gap_bound, r.printed_bound]);
    }
    let passed = worst <= gap;
    let summary = format!(
        "max |P_perp psi| / |P_perp F| = {worst:.6e} over {} samples at a = {a}, z = {z}; \
         gap bound 4a^2/(3 pi^2) = {gap:.6e}, printed bound a^2/(3 pi^2) = {printed:.6e} exceeded by {above_printed} samples",
        reports.len()
    );
    Ok(Verdict { claim: "projection_defect".into(), passed, margin: gap - worst, summary, tables: vec![table] })
}
