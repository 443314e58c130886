use std::f64::consts::PI;

use serde_json::json;
use strip_spectra_core::curves::make_analytic_curve;
use strip_spectra_core::discretize::{assemble_effective_1d, EffectivePotentialKind, Mesh1D};
use strip_spectra_core::effective::{effective_potential, lambda_profile, local_hardy_floor};
use strip_spectra_core::eigensolve::{smallest_eigs_with, SpectrumOptions};
use strip_spectra_core::experiments::{
    bent_bound_state, form_on, hardy_certificate, quasimode_study, rung_spectrum, stability_study, thin_limit_sweep,
    trial_grid_search, HardyConfig, StabilityConfig, Table, ThinConfig, Verdict,
};
use strip_spectra_core::frames::{build_rpaf_with, frenet_frame_3d, standard_normals, RpafOptions};
use strip_spectra_core::grid::SGrid;
use strip_spectra_core::stripgeom::{
    check_injectivity, embed, geodesic_curvature_from_surface, make_strip, StripModel,
};

use crate::config::*;
use crate::error::{AssumptionFailure, RunError, RunResult};
use crate::exec::Rayon;
use crate::io::{csr_to_matrix_market, diagonal_to_matrix_market, surface_to_obj, OutputDir};

fn e1(a: f64) -> f64 {
    (PI / (2.0 * a)).powi(2)
}

fn window_grid(w: &Window) -> RunResult<SGrid> {
    Ok(SGrid::spanning(-w.s_half, w.s_half, w.count)?)
}

fn write_verdict(out: &mut OutputDir, verdict: &Verdict) -> RunResult<()> {
    out.json("verdict.json", verdict)?;
    for t in &verdict.tables {
        out.table(&t.name, t, true)?;
    }
    let status = if verdict.passed { "PASS" } else { "FAIL" };
    out.text("summary.txt", &format!("{}: {status}\n{}\n", verdict.claim, verdict.summary))?;
    Ok(())
}

pub fn frame(cfg: &FrameConfig, out: &mut OutputDir) -> RunResult<String> {
    let grid = SGrid::spanning(cfg.s_range[0], cfg.s_range[1], cfg.count)?;
    let curve = make_analytic_curve(&cfg.curve, cfg.dim, grid)?;
    let idx0 = cfg.start_index.unwrap_or(cfg.count / 2);
    if idx0 >= cfg.count {
        return Err(RunError::config(format!("start_index {idx0} outside 0..{}", cfg.count)));
    }
    let normals = cfg.initial_normals.clone().unwrap_or_else(|| standard_normals(&curve.tangents[idx0]));
    let (frame, plan) = build_rpaf_with(&curve, &normals, idx0, &RpafOptions::default())?;
    let d = cfg.dim;
    let n = frame.n();
    let mut cols: Vec<String> = vec!["s".into()];
    cols.extend((0..d).map(|c| format!("x{c}")));
    cols.extend((0..d).map(|c| format!("t{c}")));
    for j in 0..n {
        cols.extend((0..d).map(|c| format!("n{}_{c}", j + 1)));
    }
    cols.extend((0..n).map(|j| format!("k{}", j + 1)));
    let frenet = if d == 3 { frenet_frame_3d(&curve, 1e-8).ok() } else { None };
    let angle = frenet.as_ref().map(|f| strip_spectra_core::frames::frenet_rotation_angle(&frame, f));
    if angle.is_some() {
        cols.push("frenet_angle".into());
        cols.push("torsion_primitive".into());
    }
    let (_, tau) = cfg.curve.curvature_torsion();
    let mut table = Table { name: "frame".into(), columns: cols, rows: Vec::new() };
    let mut max_dev: f64 = 0.0;
    for i in 0..grid.count {
        let s = grid.node(i);
        let mut row = vec![s];
        row.extend(&curve.points[i]);
        row.extend(&frame.tangents[i]);
        for j in 0..n {
            row.extend(frame.normal(j, i));
        }
        row.extend(&frame.k.k[i]);
        if let Some(angle) = &angle {
            let primitive = angle[idx0] + tau * (s - grid.node(idx0));
            max_dev = max_dev.max((angle[i] - primitive).abs());
            row.push(angle[i]);
            row.push(primitive);
        }
        table.rows.push(row);
    }
    out.table("frame", &table, true)?;
    let report = json!({
        "orthonormality_defect": frame.orthonormality_defect(),
        "parallel_defect": frame.parallel_defect(),
        "charts": plan.segments,
        "start_index": idx0,
        "max_angle_minus_torsion_primitive": angle.as_ref().map(|_| max_dev),
    });
    out.json("frame.json", &report)?;
    Ok(format!(
        "frame on {} nodes, orthonormality defect {:.3e}{}",
        grid.count,
        frame.orthonormality_defect(),
        angle.map_or(String::new(), |_| format!(", max |angle - torsion primitive| {max_dev:.3e}"))
    ))
}

pub fn surface(cfg: &SurfaceConfig, out: &mut OutputDir) -> RunResult<String> {
    let grid = window_grid(&cfg.window)?;
    let g = cfg.model.build_geometry(grid)?;
    let strip = make_strip(&g.frame, &g.twist, cfg.model.a)?;
    let samples = embed(&strip, &g.curve, &g.frame, &g.twist, cfg.t_samples)?;
    out.write("surface.obj", &surface_to_obj(&samples))?;
    let mut cols = vec!["s".to_string(), "t".to_string()];
    cols.extend((0..samples.dim).map(|c| format!("x{c}")));
    let mut points = Table { name: "surface".into(), columns: cols, rows: Vec::new() };
    for (i, s) in samples.s.iter().enumerate() {
        for (m, t) in samples.t.iter().enumerate() {
            let mut row = vec![*s, *t];
            row.extend(samples.point(i, m));
            points.rows.push(row);
        }
    }
    out.table("surface", &points, false)?;
    let kg = geodesic_curvature_from_surface(&samples)?;
    let mut curv = Table::new("geodesic_curvature", &["s", "k_theta", "from_surface"]);
    for (i, s) in samples.s.iter().enumerate() {
        curv.push(vec![*s, strip.k_theta[i], kg[i]]);
    }
    out.table("geodesic_curvature", &curv, true)?;
    let inj = check_injectivity(&samples, cfg.min_separation);
    out.json(
        "surface.json",
        &json!({
            "injective": inj.is_clean(),
            "checked_points": inj.checked_points,
            "flagged": inj.flagged,
            "assumptions": strip.assumption_report(),
        }),
    )?;
    Ok(format!("surface with {} points, {} flagged near-self-intersections", samples.points.len(), inj.flagged.len()))
}

pub fn spectrum(cfg: &SpectrumConfig, out: &mut OutputDir) -> RunResult<String> {
    let mesh = cfg.mesh.mesh(cfg.model.a)?;
    let options = SpectrumOptions {
        method: cfg.method,
        tol: cfg.tol,
        seed: cfg.seed,
        max_iter: cfg.max_iter,
        preconditioner: cfg.preconditioner,
        ..SpectrumOptions::default()
    };
    let m = cfg.eigenvalues;
    let mut table;
    let lowest;
    if cfg.extrapolate {
        let r = rung_spectrum(&cfg.model, &mesh, cfg.end, m, &options)?;
        table = Table::new("spectrum", &["index", "coarse", "fine", "extrapolated"]);
        for k in 0..m {
            table.push(vec![k as f64, r.coarse[k], r.fine[k], r.extrapolated[k]]);
        }
        lowest = r.extrapolated[0];
    } else {
        let (_, form) = form_on(&cfg.model, &mesh, cfg.end)?;
        let r = smallest_eigs_with(&form, m, &options)?;
        table = Table::new("spectrum", &["index", "lambda", "residual"]);
        for k in 0..m {
            table.push(vec![k as f64, r.eigenvalues[k], r.residuals[k]]);
        }
        lowest = r.eigenvalues[0];
    }
    out.table("spectrum", &table, true)?;
    let e1 = e1(cfg.model.a);
    out.json(
        "spectrum.json",
        &json!({ "mesh": mesh, "end": cfg.end, "lambda1": lowest, "e1": e1, "lambda1_minus_e1": lowest - e1, "table": table }),
    )?;
    if cfg.export_matrices {
        let (_, form) = form_on(&cfg.model, &mesh, cfg.end)?;
        out.write("stiffness.mtx", &csr_to_matrix_market(&form.stiffness))?;
        out.write("mass.mtx", &diagonal_to_matrix_market(&form.mass))?;
        out.json(
            "matrices.json",
            &json!({
                "stiffness": "stiffness.mtx",
                "mass": "mass.mtx",
                "mesh": mesh,
                "end": cfg.end,
                "ordering": "unknown i * nt + m at (s_i, t_m), s_i = -S + (i + 1) hs, t_m = -a + (m + 1) ht",
                "problem": "K u = lambda M u",
            }),
        )?;
    }
    Ok(format!("lambda_1 = {lowest:.10} (E_1 = {e1:.10})"))
}

pub fn lambda(cfg: &LambdaConfig, out: &mut OutputDir) -> RunResult<String> {
    let model = cfg.model.build(window_grid(&cfg.window)?)?;
    let profile = lambda_profile(&model, cfg.nt, cfg.potential_form, cfg.extrapolate, &Rayon)?;
    let mut table = Table::new("lambda", &["s", "k_theta", "theta_prime", "lambda"]);
    for (i, s) in model.grid.nodes().enumerate() {
        table.push(vec![s, model.k_theta[i], model.theta_prime[i], profile.lambda[i]]);
    }
    out.table("lambda", &table, true)?;
    let floor = if model.is_unbent(1e-12) { Some(local_hardy_floor(&model, &profile)?) } else { None };
    let min = profile.lambda.iter().cloned().fold(f64::INFINITY, f64::min);
    out.json(
        "lambda.json",
        &json!({
            "nt": cfg.nt,
            "extrapolated": cfg.extrapolate,
            "formulation": if cfg.potential_form { "potential" } else { "weighted" },
            "min": min,
            "hardy_floor": floor.as_ref().map(|f| json!({
                "min": f.min, "max": f.max, "support": f.support,
                "positivity_claimed": f.positivity_claimed, "flagged": f.flagged,
            })),
        }),
    )?;
    Ok(format!("min lambda(s) = {min:.6e} over {} nodes", model.grid.count))
}

pub fn effective(cfg: &EffectiveConfig, out: &mut OutputDir) -> RunResult<String> {
    let model = cfg.model.build(window_grid(&cfg.window)?)?;
    let eff = effective_potential(&model);
    let mut table = Table::new("v_eff", &["s", "v_eff"]);
    for (s, v) in model.grid.nodes().zip(&eff.v_eff) {
        table.push(vec![s, *v]);
    }
    out.table("v_eff", &table, true)?;
    let kind = match cfg.potential {
        PotentialChoice::VEff => EffectivePotentialKind::VEff,
        PotentialChoice::VA { a } => EffectivePotentialKind::VA(a),
    };
    let line = Mesh1D::new(-cfg.window.s_half, cfg.window.s_half, cfg.ns)?;
    let form = assemble_effective_1d(&model, &line, kind)?;
    let r = smallest_eigs_with(&form, cfg.eigenvalues.min(cfg.ns), &SpectrumOptions::default())?;
    let mut spec = Table::new("effective_spectrum", &["index", "mu"]);
    for (k, mu) in r.eigenvalues.iter().enumerate() {
        spec.push(vec![k as f64, *mu]);
    }
    out.table("effective_spectrum", &spec, false)?;
    out.json(
        "effective.json",
        &json!({
            "z0": eff.z0,
            "potential": cfg.potential,
            "surrogate": matches!(cfg.potential, PotentialChoice::VA { .. }),
            "eigenvalues": r.eigenvalues,
        }),
    )?;
    Ok(format!("mu_1 = {:.10}, z_0 = {:.6}", r.eigenvalues[0], eff.z0))
}

pub fn hardy(cfg: &HardyConfig, out: &mut OutputDir) -> RunResult<String> {
    let outcome = hardy_certificate(cfg, &Rayon)?;
    write_verdict(out, &outcome.verdict)?;
    out.json(
        "hardy.json",
        &json!({
            "c_num": outcome.c_num,
            "c_ana": outcome.c_ana,
            "lambda0": outcome.lambda0,
            "interval": outcome.interval,
            "lambda1": outcome.lambda1,
        }),
    )?;
    Ok(outcome.verdict.summary)
}

pub fn bent(cfg: &BentRunConfig, out: &mut OutputDir) -> RunResult<String> {
    let verdict = bent_bound_state(&cfg.study, &Rayon)?;
    write_verdict(out, &verdict)?;
    let mut summary = verdict.summary.clone();
    if let Some(t) = &cfg.trial {
        let search = trial_grid_search(&cfg.study.model, t.window, &t.eta, &t.n, &t.eps)?;
        out.table("trial_values", &search.table, true)?;
        out.json("trial.json", &json!({ "n": search.n, "eps": search.eps, "value": search.value }))?;
        summary.push_str(&format!("; trial minimum {:.3e} at n = {}, eps = {}", search.value, search.n, search.eps));
    }
    Ok(summary)
}

pub fn stability(cfg: &StabilityConfig, out: &mut OutputDir) -> RunResult<String> {
    let verdict = stability_study(cfg, &Rayon)?;
    write_verdict(out, &verdict)?;
    Ok(verdict.summary)
}

pub fn quasimode(cfg: &QuasimodeRunConfig, out: &mut OutputDir) -> RunResult<String> {
    let e1 = e1(cfg.study.model.a);
    let etas: Vec<f64> = cfg.eta_over_e1.iter().map(|x| x * e1).collect();
    let verdict = quasimode_study(&cfg.study, &etas, &cfg.n, &Rayon)?;
    write_verdict(out, &verdict)?;
    Ok(verdict.summary)
}

pub fn thin_sweep(cfg: &ThinConfig, out: &mut OutputDir) -> RunResult<String> {
    let verdict = thin_limit_sweep(cfg, &Rayon)?;
    write_verdict(out, &verdict)?;
    Ok(verdict.summary)
}

/// Writes the assumption report; fails with the bounded geodesic curvature
/// hypothesis when it is violated.
pub fn validate(cfg: &ValidateConfig, out: &mut OutputDir) -> RunResult<String> {
    let model: StripModel = cfg.model.build_unchecked(window_grid(&cfg.window)?)?;
    let report = model.assumption_report();
    let violated: Vec<&str> = report.witnesses.iter().map(|(a, _)| a.name()).collect();
    out.json("assumptions.json", &json!({ "report": report, "violated": violated }))?;
    if !report.ass21_ok {
        let index = report.witnesses.first().and_then(|(_, w)| w.first().copied());
        return Err(RunError::Assumption(AssumptionFailure {
            assumption: "assumption_2_1".into(),
            index,
            value: report.a_max_k_theta,
            message: format!("a sup|k.Theta| = {} is not below 1", report.a_max_k_theta),
        }));
    }
    Ok(if violated.is_empty() { "all hypotheses hold".into() } else { format!("violated: {}", violated.join(", ")) })
}
