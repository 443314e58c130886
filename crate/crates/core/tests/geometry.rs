//! Curves, frames and strip geometry against closed-form oracles.

use std::f64::consts::PI;

use approx::assert_abs_diff_eq;
use proptest::prelude::*;
use strip_spectra_core::curves::{
    curvature_of, make_analytic_curve, synthesize_from_curvature, CurvatureVector, Curve, CurveFamily,
};
use strip_spectra_core::frames::{
    build_rpaf, build_rpaf_with, curvature_from_frame, frenet_frame_2d, plan_charts, standard_normals, Frame,
    RpafOptions,
};
use strip_spectra_core::grid::SGrid;
use strip_spectra_core::profile::Profile;
use strip_spectra_core::stripgeom::{
    check_injectivity, embed, gauss_curvature_at, geodesic_curvature_from_surface, make_strip, make_strip_unchecked,
    metric_f, StripModel, TwistProfile, TwistSpec,
};

fn identity(d: usize) -> Vec<Vec<f64>> {
    (0..d).map(|i| (0..d).map(|j| if i == j { 1.0 } else { 0.0 }).collect()).collect()
}

fn helix(count: usize, end: f64) -> Curve {
    let grid = SGrid::spanning(0.0, end, count).unwrap();
    make_analytic_curve(&CurveFamily::Helix { radius: 1.0, pitch: 1.0 }, 3, grid).unwrap()
}

fn max_normal_gap(a: &Frame, b: &Frame) -> f64 {
    let mut gap: f64 = 0.0;
    for (na, nb) in a.normals.iter().zip(&b.normals) {
        for (x, y) in na.iter().zip(nb) {
            for (p, q) in x.iter().zip(y) {
                gap = gap.max((p - q).abs());
            }
        }
    }
    gap
}

#[test]
fn analytic_tangents_are_unit() {
    let grid = SGrid::spanning(-5.0, 5.0, 401).unwrap();
    for family in
        [CurveFamily::Line, CurveFamily::Circle { radius: 0.7 }, CurveFamily::Helix { radius: 2.0, pitch: 0.5 }]
    {
        for dim in [3, 4] {
            let curve = make_analytic_curve(&family, dim, grid).unwrap();
            assert!(curve.max_tangent_defect() <= 1e-9);
        }
    }
}

#[test]
fn unit_curvature_is_recovered_to_second_order() {
    let count = 1001;
    let grid = SGrid::spanning(0.0, 2.0 * PI, count).unwrap();
    let k = CurvatureVector::constant(grid, &[1.0]).unwrap();
    let (curve, _) = synthesize_from_curvature(&k, &identity(2), &[0.0, 0.0]).unwrap();
    assert!(curve.max_tangent_defect() <= 1e-9);
    let closure = curve.points[0].iter().zip(&curve.points[count - 1]).map(|(a, b)| (a - b).powi(2)).sum::<f64>();
    assert!(closure.sqrt() <= 1e-6);
    let kappa = curvature_of(&curve).unwrap();
    let err = kappa.iter().map(|v| (v - 1.0).abs()).fold(0.0, f64::max);
    assert!(err <= 10.0 * grid.ds * grid.ds, "curvature error {err:e}");
}

#[test]
fn constant_vector_curvature_draws_planar_circle() {
    let (phi, k0) = (0.6_f64, 2.0);
    let grid = SGrid::spanning(0.0, PI, 801).unwrap();
    let k = CurvatureVector::constant(grid, &[k0 * phi.cos(), k0 * phi.sin()]).unwrap();
    let (curve, _) = synthesize_from_curvature(&k, &identity(3), &[0.0; 3]).unwrap();
    // plane spanned by e_0 and cos(phi) e_1 + sin(phi) e_2, centre at radius 1/k0 along the latter
    let n = [0.0, phi.cos(), phi.sin()];
    let centre: Vec<f64> = n.iter().map(|x| x / k0).collect();
    let off_plane = [0.0, -phi.sin(), phi.cos()];
    for p in &curve.points {
        let r = p.iter().zip(&centre).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
        assert_abs_diff_eq!(r, 1.0 / k0, epsilon = 1e-9);
        let h: f64 = p.iter().zip(&off_plane).map(|(a, b)| a * b).sum();
        assert_abs_diff_eq!(h, 0.0, epsilon = 1e-12);
    }
}

#[test]
fn synthesized_frame_round_trips_curvature() {
    let grid = SGrid::spanning(0.0, 10.0, 40001).unwrap();
    let k = CurvatureVector::from_fn(grid, |s| vec![s.sin(), 0.3 + 0.1 * (2.0 * s).cos()]).unwrap();
    let (curve, synth) = synthesize_from_curvature(&k, &identity(3), &[0.0; 3]).unwrap();
    let direct = curvature_from_frame(&synth);
    let rebuilt = build_rpaf(&curve, &synth.rows_at(0)[1..], 0).unwrap();
    // end nodes use one-sided differences
    for i in 2..grid.count - 2 {
        for j in 0..2 {
            assert_abs_diff_eq!(direct.k[i][j], k.k[i][j], epsilon = 1e-8);
            assert_abs_diff_eq!(rebuilt.k.k[i][j], k.k[i][j], epsilon = 1e-6);
        }
    }
}

#[test]
fn chart_caps_do_not_change_the_frame() {
    let curve = helix(4001, 40.0);
    let n0 = standard_normals(&curve.tangents[2000]);
    let (free, plan_free) = build_rpaf_with(&curve, &n0, 2000, &RpafOptions::default()).unwrap();
    let capped_opts = RpafOptions { max_segment_nodes: Some(97) };
    let (capped, plan_capped) = build_rpaf_with(&curve, &n0, 2000, &capped_opts).unwrap();
    assert!(plan_capped.segments.len() > plan_free.segments.len());
    assert!(max_normal_gap(&free, &capped) <= 1e-8);
    assert_eq!(plan_charts(&curve, Some(97)).segments.len(), plan_capped.segments.len());
}

#[test]
fn rotated_initial_normals_rotate_the_curvature() {
    let curve = helix(2001, 20.0);
    let n0 = standard_normals(&curve.tangents[0]);
    let (c, s) = (0.7_f64.cos(), 0.7_f64.sin());
    let q = [[c, -s], [s, c]];
    let rotated: Vec<Vec<f64>> =
        (0..2).map(|j| (0..3).map(|x| q[j][0] * n0[0][x] + q[j][1] * n0[1][x]).collect()).collect();
    let f1 = build_rpaf(&curve, &n0, 0).unwrap();
    let f2 = build_rpaf(&curve, &rotated, 0).unwrap();
    for i in 0..curve.len() {
        let (k1, k2) = (&f1.k.k[i], &f2.k.k[i]);
        for j in 0..2 {
            assert_abs_diff_eq!(k2[j], q[j][0] * k1[0] + q[j][1] * k1[1], epsilon = 1e-8);
        }
        let n1 = k1.iter().map(|v| v * v).sum::<f64>().sqrt();
        let n2 = k2.iter().map(|v| v * v).sum::<f64>().sqrt();
        assert_abs_diff_eq!(n1, n2, epsilon = 1e-10);
    }
}

#[test]
fn planar_frame_is_frenet() {
    let grid = SGrid::spanning(-3.0, 3.0, 1201).unwrap();
    let curve = make_analytic_curve(&CurveFamily::Circle { radius: 2.0 }, 2, grid).unwrap();
    let (normals, signed) = frenet_frame_2d(&curve).unwrap();
    let frame = build_rpaf(&curve, &[normals[600].clone()], 600).unwrap();
    let h2 = grid.ds * grid.ds;
    for i in 0..grid.count {
        assert_abs_diff_eq!(frame.normals[0][i][0], normals[i][0], epsilon = 10.0 * h2);
        assert_abs_diff_eq!(frame.normals[0][i][1], normals[i][1], epsilon = 10.0 * h2);
        assert_abs_diff_eq!(frame.k.k[i][0], signed[i], epsilon = 10.0 * h2);
        assert_abs_diff_eq!(signed[i], 0.5, epsilon = 10.0 * h2);
    }
}

#[test]
fn circle_in_four_dimensions_has_unit_curvature() {
    let grid = SGrid::spanning(0.0, 6.0, 1201).unwrap();
    let curve = make_analytic_curve(&CurveFamily::Circle { radius: 1.0 }, 4, grid).unwrap();
    let frame = build_rpaf(&curve, &standard_normals(&curve.tangents[0]), 0).unwrap();
    assert!(frame.orthonormality_defect() <= 1e-8);
    for ki in &frame.k.k {
        let m = ki.iter().map(|v| v * v).sum::<f64>().sqrt();
        assert_abs_diff_eq!(m, 1.0, epsilon = 1e-6);
    }
}

#[test]
fn in_plane_circle_strip_has_linear_jacobian() {
    let grid = SGrid::spanning(-2.0, 2.0, 401).unwrap();
    let curve = make_analytic_curve(&CurveFamily::Circle { radius: 1.0 }, 3, grid).unwrap();
    let frame = build_rpaf(&curve, &standard_normals(&curve.tangents[200]), 200).unwrap();
    let k = &frame.k.k[200];
    let kn = (k[0] * k[0] + k[1] * k[1]).sqrt();

    let in_plane =
        TwistProfile::from_spec(&TwistSpec::Constant { theta: vec![k[0] / kn, k[1] / kn] }, 2, grid).unwrap();
    let model = make_strip(&frame, &in_plane, 0.5).unwrap();
    for i in 0..grid.count {
        for t in [-0.5, -0.2, 0.0, 0.3, 0.5] {
            assert_abs_diff_eq!(model.f_node(i, t), 1.0 - t, epsilon = 1e-6);
        }
    }
    let surface = embed(&model, &curve, &frame, &in_plane, 11).unwrap();
    assert!(surface.points.iter().all(|p| p[2].abs() <= 1e-12));
    assert!(check_injectivity(&surface, 1e-3).is_clean());

    let across = TwistProfile::from_spec(&TwistSpec::Constant { theta: vec![-k[1] / kn, k[0] / kn] }, 2, grid).unwrap();
    let model = make_strip(&frame, &across, 0.5).unwrap();
    assert!(model.k_theta.iter().all(|v| v.abs() <= 1e-6));
    assert!(model.theta_prime.iter().all(|v| v.abs() <= 1e-12));
}

#[test]
fn degenerate_annulus_is_flagged() {
    let grid = SGrid::spanning(0.0, 2.0, 201).unwrap();
    let curve = make_analytic_curve(&CurveFamily::Circle { radius: 1.0 }, 2, grid).unwrap();
    let (normals, _) = frenet_frame_2d(&curve).unwrap();
    let frame = build_rpaf(&curve, &[normals[0].clone()], 0).unwrap();
    let twist = TwistProfile::from_spec(&TwistSpec::Constant { theta: vec![1.0] }, 1, grid).unwrap();
    assert!(make_strip(&frame, &twist, 1.0).is_err());
    let model = make_strip_unchecked(&frame, &twist, 0.9999).unwrap();
    assert!(model.jacobian_lower_bound() < 1e-3);
    let surface = embed(&model, &curve, &frame, &twist, 21).unwrap();
    let report = check_injectivity(&surface, 1e-3);
    assert!(!report.is_clean());
    let nt = surface.t.len();
    let edge = |idx: usize| idx % nt == 0 || idx % nt == nt - 1;
    assert!(report.flagged.iter().all(|(p, q, _)| edge(*p) && edge(*q)));
}

#[test]
fn geodesic_curvature_matches_k_theta() {
    let curve = helix(1001, 10.0);
    let grid = curve.grid;
    let frame = build_rpaf(&curve, &standard_normals(&curve.tangents[500]), 500).unwrap();
    let twist = TwistProfile::from_spec(&TwistSpec::Constant { theta: vec![0.8, 0.6] }, 2, grid).unwrap();
    let model = make_strip(&frame, &twist, 0.3).unwrap();
    let surface = embed(&model, &curve, &frame, &twist, 21).unwrap();
    let kg = geodesic_curvature_from_surface(&surface).unwrap();
    let err = (1..grid.count - 1).map(|i| (kg[i] - model.k_theta[i]).abs()).fold(0.0, f64::max);
    assert!(err <= 5.0 * grid.ds, "geodesic curvature error {err:e}");
    assert!(check_injectivity(&surface, 1e-3).is_clean());
}

#[test]
fn gauss_curvature_vanishes_exactly_without_twist() {
    let grid = SGrid::spanning(-4.0, 4.0, 161).unwrap();
    let model =
        StripModel::from_profiles(0.5, grid, &Profile::bump(1.0, 0.0, 2.0), &Profile::bump(1.0, 1.0, 1.0)).unwrap();
    for i in 0..grid.count {
        for t in [-0.5, 0.0, 0.25, 0.5] {
            let k = model.gauss_curvature(i, t).unwrap();
            assert!(k <= 0.0);
            assert_eq!(k == 0.0, model.theta_prime[i] == 0.0);
        }
    }
    assert!(model.gauss_curvature(0, 0.6).is_err());
}

proptest! {
    #[test]
    fn rpaf_combinations_keep_their_length(c0 in -2.0..2.0f64, c1 in -2.0..2.0f64, r in 0.5..3.0f64, h in 0.1..2.0f64) {
        let grid = SGrid::spanning(0.0, 12.0, 601).unwrap();
        let curve = make_analytic_curve(&CurveFamily::Helix { radius: r, pitch: h }, 3, grid).unwrap();
        let frame = build_rpaf(&curve, &standard_normals(&curve.tangents[300]), 300).unwrap();
        let len = (c0 * c0 + c1 * c1).sqrt();
        for i in 0..grid.count {
            let v = frame.normal_combination(&[c0, c1], i);
            let m = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            prop_assert!((m - len).abs() <= 1e-7);
        }
    }

    #[test]
    fn metric_is_convex_and_bounded_below(kappa in -3.0..3.0f64, beta in -3.0..3.0f64, frac in 0.05..0.99f64) {
        let a = frac / kappa.abs().max(1e-3);
        let a = a.min(2.0);
        let floor = 1.0 - a * kappa.abs();
        let n = 200;
        let h = 2.0 * a / n as f64;
        let f: Vec<f64> = (0..=n).map(|m| metric_f(kappa, beta, -a + m as f64 * h)).collect();
        for w in f.windows(3) {
            prop_assert!(w[0] - 2.0 * w[1] + w[2] >= -1e-10);
        }
        prop_assert!(f.iter().all(|v| *v >= floor - 1e-12));
    }

    #[test]
    fn gauss_curvature_sign(kappa in -2.0..2.0f64, beta in -2.0..2.0f64, t in -0.4..0.4f64) {
        let k = gauss_curvature_at(kappa, beta, t);
        prop_assert!(k <= 0.0);
        prop_assert_eq!(k == 0.0, beta == 0.0);
    }
}
