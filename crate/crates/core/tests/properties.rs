mod common;

use std::f64::consts::TAU;

use nhaas_core::scaling::{quality, rescale};
use nhaas_core::{
    build_hamiltonian, ipr, localization_length, log_grid, solve, solve_obc, Boundary, ModelParams, Quantity,
};
use num_complex::Complex64;
use proptest::prelude::*;

fn params(max_l: usize) -> impl Strategy<Value = ModelParams> {
    (2..=max_l, -2.0..2.0f64, 0.0..6.0f64, 0.0..2.0f64, 0.0..TAU, any::<bool>()).prop_map(|(l, g, w, eps, phi, pbc)| {
        ModelParams::new(l, g, w, eps)
            .with_phase(phi)
            .with_boundary(if pbc { Boundary::Periodic } else { Boundary::Open })
    })
}

fn vector(max_l: usize) -> impl Strategy<Value = Vec<Complex64>> {
    prop::collection::vec((-1.0..1.0f64, -1.0..1.0f64), 2..max_l)
        .prop_map(|v| v.into_iter().map(|(a, b)| Complex64::new(a, b)).collect::<Vec<_>>())
        .prop_filter("nonzero", |v| v.iter().any(|c| c.norm() > 1e-3))
}

fn normalized(v: &[Complex64]) -> Vec<Complex64> {
    let n = v.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
    v.iter().map(|c| c / n).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn hopping_product_is_j_squared(p in params(40), j in 0.2..3.0f64) {
        let p = ModelParams { hopping: j, ..p };
        let h = build_hamiltonian(&p).unwrap();
        for (u, l) in h.upper.iter().zip(&h.lower) {
            prop_assert!((u * l - j * j).abs() <= 1e-12 * j * j * (2.0 * p.g.abs()).exp());
        }
        if let Some((a, b)) = h.corner {
            prop_assert!((a * b - j * j).abs() <= 1e-12 * j * j * (2.0 * p.g.abs()).exp());
        }
    }

    #[test]
    fn small_chains_match_characteristic_polynomial(p in params(8)) {
        let h = build_hamiltonian(&p).unwrap();
        let r = solve(&p).unwrap();
        let oracle = common::oracle_eigenvalues(&h.to_dense(), p.size);
        prop_assert!(common::match_distance(&r.energies, &oracle) <= 1e-8 * h.norm_inf());
    }

    #[test]
    fn eigen_residuals(p in params(60)) {
        let h = build_hamiltonian(&p).unwrap();
        let r = solve(&p).unwrap();
        let scale = h.norm_inf();
        prop_assert!(common::residual(&h, r.energies[0], &r.ground_vec) <= 1e-8 * scale);
        if let Some(v) = &r.excited_vec {
            prop_assert!(common::residual(&h, r.excited_energy, v) <= 1e-8 * scale);
        }
    }

    #[test]
    fn open_spectrum_is_real_and_g_independent(p in params(120), g in -3.0..3.0f64) {
        let p = p.with_boundary(Boundary::Open);
        let a = solve_obc(&p).unwrap();
        let b = solve_obc(&ModelParams { g, ..p }).unwrap();
        let scale = build_hamiltonian(&p).unwrap().norm_inf();
        for (x, y) in a.energies.iter().zip(&b.energies) {
            prop_assert!(x.im.abs() <= 1e-8 * scale);
            prop_assert!((x - y).norm() <= 1e-8 * scale);
        }
    }

    #[test]
    fn ipr_is_scale_invariant(v in vector(50), re in 0.01..100.0f64, im in -100.0..100.0f64) {
        let c = Complex64::new(re, im);
        let w: Vec<Complex64> = v.iter().map(|x| x * c).collect();
        let (a, b) = (ipr(&v).unwrap(), ipr(&w).unwrap());
        prop_assert!((a - b).abs() <= 1e-12 * a);
        prop_assert!(a <= 1.0 + 1e-12 && a * v.len() as f64 >= 1.0 - 1e-12);
    }

    #[test]
    fn xi_is_reflection_invariant(v in vector(50)) {
        let v = normalized(&v);
        let mut r = v.clone();
        r.reverse();
        let (xa, ja) = localization_length(&v).unwrap();
        let (xb, jb) = localization_length(&r).unwrap();
        prop_assert!((xa - xb).abs() <= 1e-9 * (1.0 + xa));
        prop_assert!((ja + jb - (v.len() + 1) as f64).abs() <= 1e-9 * v.len() as f64);
    }

    #[test]
    fn quality_ignores_order_and_common_scale(
        nu in 0.3..1.5f64,
        power in -1.0..1.0f64,
        shift in 0.05..20.0f64,
        seed in any::<u64>(),
        rot in 0usize..4,
    ) {
        let grid = log_grid(1e-3, 1.0, 12);
        let curves = common::synthetic_xi_curves(0.5, &[50, 100, 200, 400], &grid, 0.02, seed);
        let base: Vec<_> = curves.iter().map(|c| rescale(c, Quantity::Xi, nu, power)).collect();
        let q0 = quality(&base);
        let mut moved = base.clone();
        moved.rotate_left(rot);
        moved.reverse();
        let q1 = quality(&moved);
        for c in moved.iter_mut() {
            c.y.iter_mut().for_each(|y| *y *= shift);
        }
        let q2 = quality(&moved);
        prop_assert!((q0 - q1).abs() <= 1e-9 * q0.max(1.0));
        prop_assert!((q0 - q2).abs() <= 1e-9 * q0.max(1.0));
    }
}
