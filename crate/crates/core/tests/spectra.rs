//! Discretized forms and the eigensolvers.

use std::f64::consts::PI;

use approx::assert_abs_diff_eq;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use strip_spectra_core::discretize::{
    assemble_2d, assemble_effective_1d, discrete_e1, transverse_form, DiscreteForm, EffectivePotentialKind,
    EndCondition, Mesh1D, Mesh2D, TransverseFormulation,
};
use strip_spectra_core::effective::{effective_potential, richardson};
use strip_spectra_core::eigensolve::{
    dense_eigs, rayleigh_quotient, smallest_eigs_with, solve_shifted, Method, Preconditioner, SpectrumOptions,
    SpectrumResult,
};
use strip_spectra_core::grid::SGrid;
use strip_spectra_core::profile::Profile;
use strip_spectra_core::stripgeom::StripModel;

fn model_on(mesh: &Mesh2D, k_theta: &Profile, theta_prime: &Profile) -> StripModel {
    StripModel::from_profiles(mesh.a, mesh.model_grid(), k_theta, theta_prime).unwrap()
}

fn form(mesh: &Mesh2D, k_theta: &Profile, theta_prime: &Profile, end: EndCondition) -> DiscreteForm {
    assemble_2d(&model_on(mesh, k_theta, theta_prime), mesh, end).unwrap()
}

fn lowest(form: &DiscreteForm) -> f64 {
    smallest_eigs_with(form, 1, &SpectrumOptions::default()).unwrap().eigenvalues[0]
}

fn bent_twisted(mesh: &Mesh2D, end: EndCondition) -> DiscreteForm {
    form(mesh, &Profile::bump(0.8, 0.0, 2.0), &Profile::bump(1.0, 0.5, 1.5), end)
}

/// Lowest eigenvalue of `-d^2 + V` with Dirichlet ends, extrapolated over `n` and `2 n + 1` nodes.
fn effective_lowest(model: &StripModel, s_half: f64, n: usize) -> f64 {
    let coarse = Mesh1D::new(-s_half, s_half, n).unwrap();
    let solve = |mesh: &Mesh1D| {
        let form = assemble_effective_1d(model, mesh, EffectivePotentialKind::VEff).unwrap();
        lowest(&form)
    };
    richardson(solve(&coarse), solve(&coarse.refined()))
}

fn random_vector(n: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect()
}

#[test]
fn straight_neumann_ends_give_the_transverse_threshold() {
    let mesh = Mesh2D::new(5.0, 1.0, 49, 19).unwrap();
    let f = form(&mesh, &Profile::Zero, &Profile::Zero, EndCondition::Neumann);
    let l = lowest(&f);
    assert_abs_diff_eq!(l, discrete_e1(1.0, 19), epsilon = 1e-10);
    let ht = mesh.ht();
    assert!((l - PI * PI / 4.0).abs() <= ht * ht);
}

#[test]
fn straight_dirichlet_converges_at_second_order() {
    let exact = PI * PI / 4.0 + (PI / 8.0).powi(2);
    let err: Vec<f64> = [(4.0, 39, 9), (4.0, 79, 19), (4.0, 159, 39)]
        .iter()
        .map(|&(s, ns, nt)| {
            lowest(&form(
                &Mesh2D::new(s, 1.0, ns, nt).unwrap(),
                &Profile::Zero,
                &Profile::Zero,
                EndCondition::Dirichlet,
            )) - exact
        })
        .collect();
    for w in err.windows(2) {
        assert!((3.5..=4.5).contains(&(w[0] / w[1])), "ratio {}", w[0] / w[1]);
    }
}

#[test]
fn neumann_ends_bracket_dirichlet_ends() {
    for mesh in [Mesh2D::new(4.0, 1.0, 39, 9).unwrap(), Mesh2D::new(6.0, 0.5, 59, 7).unwrap()] {
        let n = lowest(&bent_twisted(&mesh, EndCondition::Neumann));
        let d = lowest(&bent_twisted(&mesh, EndCondition::Dirichlet));
        assert!(n <= d, "neumann {n} above dirichlet {d}");
    }
}

#[test]
fn dirichlet_eigenvalue_decreases_with_the_window() {
    let small = Mesh2D::new(4.0, 1.0, 39, 9).unwrap();
    let large = Mesh2D::new(8.0, 1.0, 79, 9).unwrap();
    assert_abs_diff_eq!(small.hs(), large.hs(), epsilon = 1e-15);
    let ls = lowest(&bent_twisted(&small, EndCondition::Dirichlet));
    let ll = lowest(&bent_twisted(&large, EndCondition::Dirichlet));
    assert!(ll <= ls);
}

#[test]
fn mass_respects_the_jacobian_bound() {
    let mesh = Mesh2D::new(4.0, 0.5, 39, 9).unwrap();
    let model = model_on(&mesh, &Profile::bump(1.5, 0.0, 2.0), &Profile::bump(1.0, 0.5, 1.5));
    let f = assemble_2d(&model, &mesh, EndCondition::Dirichlet).unwrap();
    let cell = mesh.hs() * mesh.ht();
    assert!(f.mass.iter().all(|m| *m >= model.jacobian_lower_bound() * cell));
    for (i, j, v) in f.stiffness.triplets() {
        assert_eq!(v, f.stiffness.get(j, i));
    }
}

#[test]
fn constant_twist_box_matches_closed_form() {
    let grid = SGrid::spanning(-10.5, 10.5, 211).unwrap();
    let model = StripModel::from_profiles(0.2, grid, &Profile::Zero, &Profile::Constant { value: 1.0 }).unwrap();
    let l = effective_lowest(&model, 10.0, 399);
    assert_abs_diff_eq!(l, 0.5 + (PI / 20.0).powi(2), epsilon = 1e-7);
    assert_abs_diff_eq!(l, 0.524674, epsilon = 1e-6);
}

#[test]
fn constant_bending_box_matches_closed_form() {
    let grid = SGrid::spanning(-6.5, 6.5, 131).unwrap();
    let k0 = 1.5;
    let model = StripModel::from_profiles(0.2, grid, &Profile::Constant { value: k0 }, &Profile::Zero).unwrap();
    let pot = effective_potential(&model);
    assert!(pot.v_eff.iter().all(|v| *v == -0.25 * k0 * k0));
    let l = effective_lowest(&model, 6.0, 299);
    assert_abs_diff_eq!(l, -0.25 * k0 * k0 + (PI / 12.0).powi(2), epsilon = 1e-7);
}

#[test]
fn floor_for_peak_bending_two_is_minus_one() {
    let grid = SGrid::spanning(-4.0, 4.0, 801).unwrap();
    let model = StripModel::from_profiles(0.1, grid, &Profile::bump(2.0, 0.0, 1.0), &Profile::Zero).unwrap();
    let pot = effective_potential(&model);
    assert_eq!(pot.z0, -1.0);
    assert!(pot.v_eff.iter().all(|v| *v >= pot.z0));
}

#[test]
fn solvers_agree_with_the_dense_oracle() {
    let mesh = Mesh2D::new(4.0, 1.0, 59, 9).unwrap();
    for end in [EndCondition::Dirichlet, EndCondition::Neumann] {
        let f = bent_twisted(&mesh, end);
        let oracle = dense_eigs(&f.stiffness, &f.mass, 5, false, 1e-9);
        for method in [Method::Auto, Method::Banded, Method::Lobpcg, Method::Lanczos] {
            let r = smallest_eigs_with(&f, 5, &SpectrumOptions::with_method(method)).unwrap();
            for (a, b) in r.eigenvalues.iter().zip(&oracle.eigenvalues) {
                assert!((a - b).abs() <= 1e-8 * b.abs(), "{method}: {a} vs {b}");
            }
        }
    }
}

fn check_pairs(form: &DiscreteForm, r: &SpectrumResult, tol: f64) {
    assert!(r.eigenvalues.windows(2).all(|w| w[0] <= w[1]));
    for (i, u) in r.eigenvectors.iter().enumerate() {
        let rq = rayleigh_quotient(form, u).unwrap();
        assert!((rq - r.eigenvalues[i]).abs() <= 1e-12 * r.eigenvalues[i].abs().max(1.0));
        for (j, v) in r.eigenvectors.iter().enumerate() {
            let g: f64 = u.iter().zip(v).zip(&form.mass).map(|((x, y), m)| x * y * m).sum();
            assert_abs_diff_eq!(g, if i == j { 1.0 } else { 0.0 }, epsilon = 1e-8);
        }
        assert!(r.residuals[i] <= tol * r.eigenvalues[i].abs().max(1.0));
    }
}

#[test]
fn iterative_solvers_are_deterministic_and_monotone() {
    let mesh = Mesh2D::new(6.0, 1.0, 119, 11).unwrap();
    let f = bent_twisted(&mesh, EndCondition::Dirichlet);
    let runs = [
        (Method::Lobpcg, Preconditioner::ShiftedCholesky),
        (Method::Lobpcg, Preconditioner::Diagonal),
        (Method::Lanczos, Preconditioner::ShiftedCholesky),
    ];
    for (method, preconditioner) in runs {
        let opts =
            SpectrumOptions { seed: 11, preconditioner, max_iter: Some(5000), ..SpectrumOptions::with_method(method) };
        let a = smallest_eigs_with(&f, 4, &opts).unwrap();
        let b = smallest_eigs_with(&f, 4, &opts).unwrap();
        let bits = |r: &SpectrumResult| r.eigenvalues.iter().map(|v| v.to_bits()).collect::<Vec<_>>();
        assert_eq!(bits(&a), bits(&b));
        check_pairs(&f, &a, opts.tol);
        let first: Vec<f64> = a.ritz_history.iter().filter_map(|h| h.first().copied()).collect();
        assert!(!first.is_empty());
        if preconditioner == Preconditioner::Diagonal {
            assert!(first.len() > 10);
        }
        for w in first.windows(2) {
            assert!(w[1] <= w[0] + 1e-12 * w[0].abs(), "{method}: Ritz value rose from {} to {}", w[0], w[1]);
        }
    }
}

#[test]
fn shifted_solve_inverts_the_pencil() {
    let mesh = Mesh2D::new(4.0, 1.0, 39, 9).unwrap();
    let f = form(&mesh, &Profile::Zero, &Profile::Zero, EndCondition::Dirichlet);
    // M (chi_1 x bump)
    let rhs: Vec<f64> = (0..mesh.unknowns())
        .map(|idx| {
            let (i, m) = (idx / mesh.nt, idx % mesh.nt);
            let chi = (PI * (mesh.t_node(m) + 1.0) / 2.0).sin();
            f.mass[idx] * chi * Profile::bump(1.0, 0.0, 2.0).value(mesh.s_node(i))
        })
        .collect();
    let u = solve_shifted(&f, 0.0, &rhs, 1e-12).unwrap();
    let ku = f.stiffness.apply(&u);
    let res = ku.iter().zip(&rhs).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
    let bnorm = rhs.iter().map(|b| b * b).sum::<f64>().sqrt();
    assert!(res <= 1e-10 * bnorm);
    let direction: Vec<f64> = rhs.iter().zip(&f.mass).map(|(r, m)| r / m).collect();
    assert!(rayleigh_quotient(&f, &u).unwrap() <= rayleigh_quotient(&f, &direction).unwrap());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn rayleigh_quotients_stay_above_the_ground_state(seed in any::<u64>(), bend in -0.9..0.9f64, twist in 0.0..2.0f64) {
        let mesh = Mesh2D::new(3.0, 1.0, 29, 7).unwrap();
        let f = form(&mesh, &Profile::bump(bend, 0.0, 1.5), &Profile::bump(twist, 0.0, 1.5), EndCondition::Dirichlet);
        let l1 = lowest(&f);
        let u = random_vector(f.dim(), seed);
        prop_assert!(rayleigh_quotient(&f, &u).unwrap() >= l1 - 1e-10 * l1.abs());
    }

    #[test]
    fn bracketing_holds_for_bumps(bend in -0.9..0.9f64, twist in 0.0..2.0f64, centre in -1.0..1.0f64) {
        let mesh = Mesh2D::new(4.0, 1.0, 31, 7).unwrap();
        let (k, b) = (Profile::bump(bend, centre, 1.5), Profile::bump(twist, -centre, 1.5));
        let n = lowest(&form(&mesh, &k, &b, EndCondition::Neumann));
        let d = lowest(&form(&mesh, &k, &b, EndCondition::Dirichlet));
        prop_assert!(n <= d);
    }

    #[test]
    fn transverse_laplacian_respects_poincare(seed in any::<u64>(), nt in 4usize..60) {
        let f = transverse_form(0.0, 0.0, 1.0, nt, TransverseFormulation::Weighted).unwrap();
        let u = random_vector(nt, seed);
        let e1 = discrete_e1(1.0, nt);
        let ku = f.stiffness.quadratic_form(&u);
        let h = 2.0 / (nt + 1) as f64;
        let m0: f64 = u.iter().map(|x| x * x * h).sum();
        prop_assert!(ku >= e1 * m0 * (1.0 - 1e-12));
    }
}
