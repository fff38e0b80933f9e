use heatlab_core::gasket::GasketPlan;
use heatlab_core::graph::{cycle, grid, path};
use heatlab_core::spectral::{
    central_decade, counting_function, geometric_grid, laplacian_spectrum, multiplicity_histogram, product_spectrum,
    weyl_ratio,
};
use heatlab_core::{build_gasket, BoundaryCondition, GraphDescriptor, SpectrumResult};
use proptest::prelude::*;

#[test]
fn path_spectrum_is_simple() {
    let s = laplacian_spectrum(&path(40).unwrap(), BoundaryCondition::Neumann).unwrap();
    let h = multiplicity_histogram(&s, None).unwrap();
    assert_eq!(h.len(), 1);
    assert_eq!(h.get(&1), Some(&40));
}

#[test]
fn gasket_multiplicities_grow_with_level() {
    let max_mult: Vec<usize> = (3..=6)
        .map(|level| {
            let g = build_gasket(&GasketPlan::constant(2, level)).unwrap();
            let s = laplacian_spectrum(&g, BoundaryCondition::Neumann).unwrap();
            *multiplicity_histogram(&s, None).unwrap().keys().last().unwrap()
        })
        .collect();
    assert!(max_mult.windows(2).all(|w| w[1] > w[0]), "{max_mult:?}");
}

#[test]
fn path_weyl_ratio_flattens_with_size() {
    let ratios: Vec<f64> = [100, 400, 1600]
        .iter()
        .map(|&n| {
            let s = laplacian_spectrum(&path(n + 2).unwrap(), BoundaryCondition::Dirichlet).unwrap();
            let (lo, hi) = central_decade(&s).unwrap();
            weyl_ratio(&s, 0.5, &geometric_grid(lo, hi, 100)).unwrap().max_over_min()
        })
        .collect();
    assert!(ratios.windows(2).all(|w| w[1] < w[0]), "{ratios:?}");
    assert!(ratios[2] < 1.1, "{ratios:?}");
}

#[test]
fn weyl_ratio_rejects_bad_input() {
    let s = laplacian_spectrum(&path(5).unwrap(), BoundaryCondition::Neumann).unwrap();
    assert!(weyl_ratio(&s, 0.0, &[1.0]).is_err());
    assert!(weyl_ratio(&s, 0.5, &[100.0]).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn grid_spectrum_is_a_product_of_paths(w in 2usize..7, h in 2usize..7) {
        let direct = laplacian_spectrum(&grid(w, h).unwrap(), BoundaryCondition::Neumann).unwrap();
        let a = laplacian_spectrum(&path(w).unwrap(), BoundaryCondition::Neumann).unwrap();
        let b = laplacian_spectrum(&path(h).unwrap(), BoundaryCondition::Neumann).unwrap();
        let prod = product_spectrum(&a, &b, GraphDescriptor::new("product")).unwrap();
        prop_assert_eq!(prod.len(), w * h);
        for (x, y) in direct.eigenvalues.iter().zip(&prod.eigenvalues) {
            prop_assert!((x - y).abs() < 1e-10);
        }
    }

    #[test]
    fn counting_function_is_a_staircase(n in 3usize..30, xs in proptest::collection::vec(0.0f64..5.0, 1..20)) {
        let s = laplacian_spectrum(&cycle(n).unwrap(), BoundaryCondition::Neumann).unwrap();
        let mut xs = xs;
        xs.sort_by(f64::total_cmp);
        let counts: Vec<usize> = xs.iter().map(|&x| counting_function(&s, x)).collect();
        prop_assert!(counts.windows(2).all(|c| c[0] <= c[1]));
        prop_assert_eq!(counting_function(&s, s.max()), n);
        let h = multiplicity_histogram(&s, None).unwrap();
        prop_assert_eq!(h.iter().map(|(m, c)| m * c).sum::<usize>(), n);
    }

    #[test]
    fn spectrum_dump_round_trips(n in 3usize..25, dirichlet in any::<bool>()) {
        let bc = if dirichlet { BoundaryCondition::Dirichlet } else { BoundaryCondition::Neumann };
        let s = laplacian_spectrum(&path(n).unwrap(), bc).unwrap();
        let text = s.to_dump();
        prop_assert_eq!(SpectrumResult::from_dump(&text).unwrap(), s);
    }
}
