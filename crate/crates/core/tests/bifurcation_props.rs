use lamsa::bifurcation::{
    linspace, nominal_rhs, quiver_field, saddle_region_map, trace_path, ContinuationPath, ContinuationSettings,
    NominalFormula, PathTerminal,
};
use lamsa::equilibria::{fixed_points, moving_fixed_point};
use lamsa::{Error, Executor, ModelVariant, SystemParams};
use proptest::prelude::*;

fn variants() -> [SystemParams; 2] {
    [SystemParams::default(), SystemParams::default().with_variant(ModelVariant::ConstraintConsistent)]
}

fn reference_path(params: &SystemParams) -> ContinuationPath {
    let start = moving_fixed_point(params, -15.0).unwrap().p_star;
    trace_path(params, start, -15.0, 0.0, &ContinuationSettings::default()).unwrap()
}

#[test]
fn path_agrees_with_independent_solver() {
    for params in variants() {
        let path = reference_path(&params);
        assert_eq!(path.terminal, PathTerminal::ReachedZeroForce);
        assert!(path.samples.len() > 20);
        for s in &path.samples {
            let fp = moving_fixed_point(&params, s.f_l).unwrap();
            assert!((fp.p_star - s.p_star).abs() <= 1e-6, "{:?} F_L={}", params.variant, s.f_l);
        }
    }
}

#[test]
fn slope_matches_difference_quotient_along_path() {
    for params in variants() {
        let path = reference_path(&params);
        let interior: Vec<_> = path.samples.iter().filter(|s| s.f_l < -0.05).collect();
        let stride = (interior.len() / 20).max(1);
        let mut checked = 0;
        for s in interior.iter().step_by(stride).take(20) {
            let h = 1e-5 * s.f_l.abs().max(1e-2);
            let hi = moving_fixed_point(&params, s.f_l + h).unwrap().p_star;
            let lo = moving_fixed_point(&params, s.f_l - h).unwrap().p_star;
            let fd = (hi - lo) / (2.0 * h);
            let slope = nominal_rhs(&params, s.p_star, s.f_l, NominalFormula::ImplicitDiff).unwrap();
            assert!((slope - fd).abs() <= 1e-4 * fd.abs(), "{:?} F_L={}: {slope} vs {fd}", params.variant, s.f_l);
            checked += 1;
        }
        assert_eq!(checked, 20);
    }
}

#[test]
fn every_path_sample_is_a_saddle() {
    for params in variants() {
        assert!(reference_path(&params).samples.iter().all(|s| s.in_s));
    }
}

#[test]
fn sensitivity_is_smallest_near_zero_force() {
    for params in variants() {
        let path = reference_path(&params);
        let (argmin, _) =
            path.samples.iter().enumerate().min_by(|a, b| a.1.slope.abs().total_cmp(&b.1.slope.abs())).unwrap();
        assert!(path.samples[argmin].f_l > -0.5, "{:?}", params.variant);
    }
}

#[test]
fn no_interior_point_for_positive_force() {
    for params in variants() {
        for i in 1..=10 {
            let f_l = 1.5 * i as f64;
            assert!(fixed_points(&params, f_l).iter().all(|fp| fp.origin));
            assert!(moving_fixed_point(&params, f_l).is_none());
        }
        let err = trace_path(&params, 4.64383, -15.0, 0.5, &ContinuationSettings::default()).unwrap_err();
        assert!(matches!(err, Error::InvalidArgument(_)));
    }
}

#[test]
fn rasters_do_not_depend_on_executor() {
    let params = SystemParams::default();
    let p_grid = linspace(0.0, 5.0, 33);
    let f_grid = linspace(-15.0, 0.0, 17);
    let seq = saddle_region_map(&params, &p_grid, &f_grid, Executor::Sequential);
    let par = saddle_region_map(&params, &p_grid, &f_grid, Executor::Parallel);
    assert_eq!(format!("{seq:?}"), format!("{par:?}"));
    for formula in [NominalFormula::ImplicitDiff, NominalFormula::Printed] {
        let a = quiver_field(&params, &p_grid, &f_grid, formula, Executor::Sequential);
        let b = quiver_field(&params, &p_grid, &f_grid, formula, Executor::Parallel);
        assert_eq!(format!("{a:?}"), format!("{b:?}"));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn traced_endpoint_matches_solver(f_start in -15.0..-0.5f64, frac in 0.0..1.0f64) {
        let params = SystemParams::default();
        let f_end = f_start * frac;
        let start = moving_fixed_point(&params, f_start).unwrap().p_star;
        let path = trace_path(&params, start, f_start, f_end, &ContinuationSettings::default()).unwrap();
        let last = path.samples.last().unwrap();
        prop_assert_eq!(last.f_l, f_end);
        let expected = moving_fixed_point(&params, f_end).unwrap().p_star;
        prop_assert!((last.p_star - expected).abs() <= 1e-6);
    }
}
