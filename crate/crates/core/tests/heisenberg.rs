use std::collections::BTreeMap;

use catmap::heisenberg::*;
use catmap::par::Backend;
use catmap::{CatMap, FourierMode};
use ndarray::Array2;
use num_complex::Complex64;
use proptest::prelude::*;

fn maps() -> Vec<CatMap> {
    [
        (2, 3, 1, 2),
        (2, 1, 3, 2),
        (4, 3, 5, 4),
        (2, -3, -1, 2),
        (4, 5, 3, 4),
        (6, 5, 7, 6),
    ]
    .into_iter()
    .filter_map(|(a, b, c, d)| CatMap::new(a, b, c, d).ok())
    .collect()
}

fn max_diff(a: &Array2<Complex64>, b: &Array2<Complex64>) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

fn mode() -> impl Strategy<Value = FourierMode> {
    (-40i64..40, -40i64..40).prop_map(|(a, b)| FourierMode::new(a, b))
}

#[test]
fn four_dimensional_shift() {
    let w = Translation::new(4, FourierMode::new(0, 1));
    let m = w.matrix();
    for j in 0..4 {
        let target = (j + 3) % 4;
        assert!((m[(target, j)].norm() - 1.0).abs() < 1e-15);
        assert_eq!(m.column(j).iter().filter(|z| z.norm() > 0.0).count(), 1);
    }
}

#[test]
fn the_standard_map_passes_unitarity_and_egorov_at_small_n() {
    let map = CatMap::standard();
    for n in [5usize, 19, 71] {
        let p = build_propagator(&map, n).unwrap();
        assert!(p.unitarity_defect() <= UNITARITY_TOL);
        for m in FourierMode::square(5) {
            assert!(egorov_defect(&p, m) <= EGOROV_TOL, "N={n} m={m}");
        }
    }
}

#[test]
fn egorov_fails_for_the_wrong_orientation() {
    // W(A m) in place of W(Aᵀ m) must not conjugate correctly
    let map = CatMap::standard();
    let p = build_propagator(&map, 19).unwrap();
    let n = 19;
    let m = FourierMode::new(1, 0);
    let w = Translation::new(n, m).matrix();
    let conj = p.adjoint().dot(&w).dot(&p.matrix());
    let wrong = Translation::new(n, FourierMode::new(2, 1)).matrix();
    let right = Translation::new(n, map.transpose_apply(m)).matrix();
    assert!(max_diff(&conj, &right) < 1e-10);
    assert!(max_diff(&conj, &wrong) > 0.5);
}

#[test]
fn sequential_and_parallel_builds_match_bitwise() {
    for map in maps() {
        let seq = build_propagator_with(
            &map,
            33,
            &PropagatorOptions {
                backend: Backend::Sequential,
                ..Default::default()
            },
        )
        .unwrap();
        let par = build_propagator_with(
            &map,
            33,
            &PropagatorOptions {
                backend: Backend::Parallel,
                ..Default::default()
            },
        )
        .unwrap();
        assert_eq!(seq.matrix(), par.matrix());
        let x: Vec<Complex64> = (0..33).map(|i| Complex64::new(1.0 / (1.0 + i as f64), 0.5)).collect();
        assert_eq!(seq.apply(&x), par.apply(&x));
    }
}

#[test]
fn dispersive_bounds_at_n265() {
    let p = build_propagator(&CatMap::standard(), 265).unwrap();
    let js: Vec<usize> = (0..265).collect();
    let sweep = gauss_sweep(&p, 8, &[FourierMode::ZERO, FourierMode::new(1, 0)], &js);
    assert_eq!(sweep.checked, 8 * 2 * 265);
    assert!(
        sweep.violations.is_empty(),
        "{:?}",
        &sweep.violations[..sweep.violations.len().min(5)]
    );
}

#[test]
fn large_builds_use_the_sampled_check() {
    let opts = PropagatorOptions {
        check: Some(UnitarityCheck::Sampled(4)),
        ..Default::default()
    };
    let p = build_propagator_with(&CatMap::standard(), 120, &opts).unwrap();
    assert!(p.unitarity_defect() < 1e-12);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn random_maps_are_unitary_and_satisfy_egorov(idx in 0usize..6, n in 1usize..40, m in mode()) {
        let map = maps()[idx % maps().len()];
        let p = build_propagator(&map, n).unwrap();
        prop_assert!(p.unitarity_defect() < 1e-10);
        prop_assert!(egorov_defect(&p, m) < 1e-9);
    }

    #[test]
    fn translations_compose_up_to_phase(n in 1usize..50, m in mode(), mp in mode()) {
        let prod = Translation::new(n, m).matrix().dot(&Translation::new(n, mp).matrix());
        let sum = Translation::new(n, m + mp);
        let phase = prod[(sum.target(0), 0)] / sum.gamma(0);
        prop_assert!((phase.norm() - 1.0).abs() < 1e-12);
        prop_assert!(max_diff(&prod, &sum.matrix().mapv(|z| z * phase)) < 1e-10);
    }

    #[test]
    fn translations_are_unitary_and_periodic(n in 1usize..50, m in mode(), s1 in -3i64..3, s2 in -3i64..3) {
        let w = Translation::new(n, m).matrix();
        let gram = w.t().mapv(|z| z.conj()).dot(&w);
        prop_assert!(max_diff(&gram, &Array2::eye(n)) < 1e-12);
        let two_n = 2 * n as i64;
        let shifted = Translation::new(n, FourierMode::new(m.m1 + s1 * two_n, m.m2 + s2 * two_n)).matrix();
        prop_assert!(max_diff(&w, &shifted) < 1e-12);
        let adj = Translation::new(n, -m).matrix();
        prop_assert!(max_diff(&w.t().mapv(|z| z.conj()), &adj) < 1e-12);
    }

    #[test]
    fn trig_operator_is_linear(n in 2usize..30, m in mode(), re in -2.0..2.0f64, im in -2.0..2.0f64) {
        let c = Complex64::new(re, im);
        let op = quantize_trig(n, &BTreeMap::from([(m, c)]));
        let direct = Translation::new(n, m).matrix().mapv(|z| z * c);
        prop_assert!(max_diff(&op.matrix(), &direct) < 1e-12);
    }

    #[test]
    fn apply_matches_dense_product(n in 1usize..30, seed in 0u64..1000) {
        let p = build_propagator(&CatMap::standard(), n).unwrap();
        let x: Vec<Complex64> = (0..n).map(|i| Complex64::from_polar(1.0, (seed as f64 + i as f64).sin())).collect();
        let col = Array2::from_shape_vec((n, 1), x.clone()).unwrap();
        let dense = p.apply_block(&col);
        let y = p.apply(&x);
        prop_assert!(y.iter().zip(dense.iter()).all(|(a, b)| (a - b).norm() < 1e-12));
    }

    #[test]
    fn gauss_bound_random_entries(j in 0usize..71, l in 0usize..71, r in 1i64..7, m in mode()) {
        let p = build_propagator(&CatMap::standard(), 71).unwrap();
        let g = gauss_bound_report(&p, r, m, j, l).unwrap();
        prop_assert!(g.holds, "value {} bound {}", g.value, g.bound);
    }
}
