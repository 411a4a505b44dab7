use num_complex::Complex64;
use proptest::prelude::*;

use peer_adjoint::harness::{convergence_csv, parse_convergence_csv, ConvergenceTable};
use peer_adjoint::linalg::{
    characteristic_polynomial, eig_small, horner, inverse, solve_dense, spectral_radius, RMatrix,
};
use peer_adjoint::method::{q_equidistant_factored, q_polynomial, Nodes};
use peer_adjoint::order::{
    adjoint_residual, equidistant_kernel_matrix, flip, forward_residual, kernel_determinant,
    kernel_map, solve_pascal_sylvester, sylvester_general, synthesize_standard, theta_e_operators,
    triangular_kernel_dimension,
};
use peer_adjoint::stability::{project_onto_curve, root_locus, scan_points, ScanRegion, CURVE_TOL};

fn matrix(n: usize, lo: f64, hi: f64) -> impl Strategy<Value = RMatrix> {
    prop::collection::vec(lo..hi, n * n).prop_map(move |v| RMatrix::from_vec(n, n, v).unwrap())
}

fn sized_matrix() -> impl Strategy<Value = RMatrix> {
    (1usize..=4).prop_flat_map(|n| matrix(n, -1.0, 1.0))
}

/// Strictly diagonally dominant, so comfortably conditioned.
fn dominant_matrix(n: usize) -> impl Strategy<Value = RMatrix> {
    matrix(n, -1.0, 1.0).prop_map(move |m| {
        RMatrix::from_fn(n, n, |i, j| {
            if i == j {
                m[(i, j)] + (n as f64 + 1.0) * m[(i, j)].signum()
            } else {
                m[(i, j)]
            }
        })
    })
}

fn distinct_nodes() -> impl Strategy<Value = Vec<f64>> {
    (0.05f64..0.5, 0.05f64..0.5, -0.5f64..0.5).prop_map(|(g1, g2, s)| vec![s, s + g1, s + g1 + g2])
}

fn curve_point() -> impl Strategy<Value = (f64, f64)> {
    (0.15f64..1.2, 0.15f64..1.2).prop_filter_map("projection fails", |(x, y)| {
        let (d1, d3) = project_onto_curve(x, y)?;
        (d1 > 0.05 && d3 > 0.05 && d1 < 2.0 && d3 < 2.0).then_some((d1, d3))
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn solve_residual_is_tiny(a in (1usize..=4).prop_flat_map(dominant_matrix),
                              seed in prop::collection::vec(-10.0f64..10.0, 8)) {
        let n = a.rows();
        let rhs = RMatrix::from_fn(n, 2, |i, j| seed[2 * i + j]);
        let x = solve_dense(&a, &rhs).unwrap();
        let r = a.mul(&x).sub(&rhs).inf_norm();
        prop_assert!(r <= 1e-12 * (1.0 + rhs.inf_norm()), "{r}");
    }

    #[test]
    fn eigenvalues_annihilate_characteristic_polynomial(m in sized_matrix()) {
        let n = m.rows() as i32;
        let p = characteristic_polynomial(&m).unwrap();
        let bound = 1e-9 * (1.0 + m.inf_norm()).powi(n);
        let eig = eig_small(&m).unwrap();
        prop_assert_eq!(eig.len(), m.rows());
        for lam in eig {
            prop_assert!(horner(&p, lam).norm() <= bound);
        }
    }

    #[test]
    fn spectral_radius_is_homogeneous(m in matrix(3, -1.0, 1.0), alpha in -5.0f64..5.0) {
        let r = spectral_radius(&m).unwrap();
        let ra = spectral_radius(&m.scale(alpha)).unwrap();
        prop_assert!((ra - alpha.abs() * r).abs() <= 1e-10 * (1.0 + alpha.abs() * r));
    }

    #[test]
    fn equidistant_q_matches_factored_form(d in -2.0f64..2.0) {
        let q = q_polynomial(d, d);
        let f = q_equidistant_factored(d);
        prop_assert!((q - f).abs() <= 1e-12 * (1.0 + q.abs()), "{q} vs {f}");
    }

    #[test]
    fn condition_residuals_are_linear(a in matrix(3, -1.0, 1.0), b in matrix(3, -1.0, 1.0),
                                      k in prop::collection::vec(0.1f64..1.0, 3),
                                      c in distinct_nodes(), alpha in -4.0f64..4.0, q in 1usize..=4) {
        let sk: Vec<f64> = k.iter().map(|x| alpha * x).collect();
        let base = forward_residual(&a, &b, &k, &c, q);
        let scaled = forward_residual(&a.scale(alpha), &b.scale(alpha), &sk, &c, q);
        prop_assert!(scaled.sub(&base.scale(alpha)).max_abs() <= 1e-12 * (1.0 + base.scale(alpha).max_abs()));
        let base = adjoint_residual(&a, &k, &b, &c, q);
        let scaled = adjoint_residual(&a.scale(alpha), &sk, &b.scale(alpha), &c, q);
        prop_assert!(scaled.sub(&base.scale(alpha)).max_abs() <= 1e-12 * (1.0 + base.scale(alpha).max_abs()));
    }

    #[test]
    fn pascal_sylvester_is_solvable(m in (3usize..=4).prop_flat_map(|q| matrix(q, -2.0, 2.0))) {
        let (_, residual) = solve_pascal_sylvester(&m).unwrap();
        prop_assert!(residual <= 1e-10, "{residual}");
    }

    #[test]
    fn symmetric_nodes_flip_operators(g in 0.05f64..1.0, shift in -1.0f64..1.0) {
        // Πc = ζ1 − c for c = (s, s + g, s + 2g) and ζ = 2s + 2g.
        let nodes = Nodes::new(vec![shift, shift + g, shift + 2.0 * g]).unwrap();
        let (theta, e) = theta_e_operators(&nodes).unwrap();
        let pi = flip(3);
        let scale = 1.0 + theta.inf_norm() * inverse(&theta).unwrap().inf_norm();
        prop_assert!(pi.mul(&theta).mul(&pi).sub(&inverse(&theta).unwrap()).max_abs() <= 1e-10 * scale);
        prop_assert!(pi.mul(&e).mul(&pi).add(&e).max_abs() <= 1e-10 * (1.0 + e.inf_norm()));
    }

    #[test]
    fn triangular_kernel_exists_only_for_equidistant_nodes(d in 0.05f64..2.0, gap in 0.05f64..1.0) {
        let x = equidistant_kernel_matrix();
        prop_assert!(kernel_map(&x, d, d).unwrap().max_abs() <= 1e-10 * (1.0 + (2.0 * d).powi(4)));
        prop_assert_eq!(triangular_kernel_dimension(d, d, 1e-10).unwrap(), 1);
        prop_assert_eq!(triangular_kernel_dimension(d, d + gap, 1e-10).unwrap(), 0);
        let det = kernel_determinant(d, d + gap);
        prop_assert!((det - d * (d + gap) * (d - d - gap)).abs() <= 1e-12 * (1.0 + det.abs()));
    }

    #[test]
    fn csv_reparses_exactly(errors in prop::collection::vec(1e-12f64..1.0, 8)) {
        let grids = vec![10, 20];
        let variables: Vec<String> = ["y1", "y2", "p1", "p2"].iter().map(|s| s.to_string()).collect();
        let errs: Vec<Vec<f64>> = errors.chunks(2).map(|c| c.to_vec()).collect();
        let orders: Vec<Vec<Option<f64>>> = errs.iter().map(|e| vec![Some((e[0] / e[1]).log2())]).collect();
        let table = ConvergenceTable {
            method: "m".into(),
            problem: "p".into(),
            grids: grids.clone(),
            variables: variables.clone(),
            errors: errs.clone(),
            orders: orders.clone(),
            n_ref: 160,
            reference_agreement: vec![0.0; 4],
        };
        let text = convergence_csv(&table).unwrap();
        prop_assert_eq!(&text, &convergence_csv(&table).unwrap());
        let rows = parse_convergence_csv(&text).unwrap();
        prop_assert_eq!(rows.len(), 8);
        for row in rows {
            let v = variables.iter().position(|x| *x == row.var).unwrap();
            let j = grids.iter().position(|&n| n == row.n).unwrap();
            prop_assert_eq!(row.error.to_bits(), errs[v][j].to_bits());
            let want = if j == 0 { None } else { orders[v][j - 1] };
            prop_assert_eq!(row.order.map(f64::to_bits), want.map(f64::to_bits));
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn synthesized_methods_lie_on_the_curve((d1, d3) in curve_point()) {
        let rep = synthesize_standard(d1, d3).unwrap();
        let scale = 1.0 + (d1.abs() + d3.abs()).powi(4);
        prop_assert!(q_polynomial(d1, d3).abs() <= 1e-6 * scale);
        let c = rep.nodes.values();
        let set = &rep.set;
        let g = sylvester_general(set.a(), set.k(), c, 4, 3).inf_norm();
        prop_assert!(g <= 1e-8 * (1.0 + set.a().inf_norm()), "sylvester {g}");
    }

    #[test]
    fn off_curve_points_are_rejected(d1 in 0.1f64..1.5, d3 in 0.1f64..1.5) {
        prop_assume!(q_polynomial(d1, d3).abs() > 1e-2);
        prop_assert!(synthesize_standard(d1, d3).is_err());
    }

    #[test]
    fn locus_points_are_eigenvalues((d1, d3) in curve_point()) {
        let set = synthesize_standard(d1, d3).unwrap().set;
        prop_assume!(set.k().iter().all(|k| k.abs() > 1e-6));
        let kinv = RMatrix::from_diag(&set.k().iter().map(|k| 1.0 / k).collect::<Vec<_>>());
        let ka = kinv.mul(set.a()).to_complex();
        let kb = kinv.mul(set.b().unwrap()).to_complex();
        for s in root_locus(&set, 64).unwrap() {
            let m = ka.sub(&kb.scale(Complex64::from_polar(1.0, -s.theta)));
            let p = characteristic_polynomial(&m).unwrap();
            for z in &s.z {
                prop_assert!(horner(&p, *z).norm() <= 1e-8 * (1.0 + m.inf_norm()).powi(3));
            }
        }
    }

    #[test]
    fn scan_is_independent_of_seed_order(seeds in prop::collection::vec((0.0f64..1.0, 0.0f64..1.0), 12),
                                         rot in 0usize..12) {
        let region = ScanRegion::Rectangle { d1: (0.0, 1.0), d3: (0.0, 1.0) };
        let a = scan_points(region, &seeds, 200).unwrap();
        let mut permuted = seeds.clone();
        permuted.reverse();
        permuted.rotate_left(rot);
        let b = scan_points(region, &permuted, 200).unwrap();
        prop_assert_eq!(&a, &b);
        for r in &a {
            prop_assert!(r.q_residual <= CURVE_TOL);
        }
    }
}
