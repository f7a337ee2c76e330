use lamsa::sim::{simulate, IntegratorConfig, Termination, Trajectory};
use lamsa::{Mode, ModelVariant, SystemParams, SystemState};
use proptest::prelude::*;

fn derived() -> SystemParams {
    SystemParams::default().with_variant(ModelVariant::ConstraintConsistent)
}

fn max_rel_drift(values: impl Iterator<Item = f64>) -> f64 {
    let values: Vec<f64> = values.collect();
    let e0 = values[0];
    values.iter().map(|e| (e - e0).abs()).fold(0.0, f64::max) / e0.abs().max(1.0)
}

#[test]
fn latched_segment_conserves_energy_and_constraint() {
    let params = derived();
    let f_l = -5.0;
    let traj =
        simulate(&params, SystemState::new(1.0, 0.0, 3.0, 0.0), f_l, 10.0, &IntegratorConfig::default()).unwrap();
    assert_eq!(traj.samples[0].mode, Mode::Latched);
    let latched: Vec<_> = traj.latched_samples().collect();
    assert!(latched.len() > 10);
    let r2 = params.latch_radius.powi(2);
    for s in &latched {
        assert!(params.holonomic_h(s.state.p, s.state.l).abs() <= 1e-8 * r2, "t={}", s.t);
    }
    let drift = max_rel_drift(latched.iter().map(|s| params.mechanical_energy(&s.state, f_l)));
    assert!(drift < 1e-6, "latched drift {drift}");
    // the switch keeps the state, and each unlatched part conserves its own energy
    let whole = max_rel_drift(traj.samples.iter().map(|s| params.mechanical_energy(&s.state, f_l)));
    assert!(whole < 1e-6, "whole-run drift {whole}");
}

fn unlatched_run(
    params: &SystemParams,
    x0: SystemState,
    f_l: f64,
    t_end: f64,
    config: &IntegratorConfig,
) -> Trajectory {
    let traj = simulate(params, x0, f_l, t_end, config).unwrap();
    assert!(traj.samples.iter().all(|s| s.mode == Mode::Unlatched));
    traj
}

#[test]
fn unlatched_flow_decouples_into_oscillator_and_free_latch() {
    for params in [SystemParams::default(), derived()] {
        let f_l = -2.0;
        let x0 = SystemState::new(7.0, -1.5, 2.0, 0.4);
        let traj = unlatched_run(&params, x0, f_l, 20.0, &IntegratorConfig::default());
        let omega = (params.stiffness / params.projectile_mass).sqrt();
        let p0 = params.natural_length;
        for s in &traj.samples {
            let t = s.t;
            let p = p0 + (x0.p - p0) * (omega * t).cos() + x0.p_dot / omega * (omega * t).sin();
            let l = x0.l + x0.l_dot * t + 0.5 * f_l / params.latch_mass * t * t;
            assert!((s.state.p - p).abs() <= 1e-6, "t={t}: {} vs {p}", s.state.p);
            assert!((s.state.l - l).abs() <= 1e-6 * l.abs().max(1.0), "t={t}");
        }
        assert!(max_rel_drift(traj.samples.iter().map(|s| params.projectile_energy(&s.state))) < 1e-6);
        assert!(max_rel_drift(traj.samples.iter().map(|s| params.latch_energy(&s.state, f_l))) < 1e-6);
    }
}

#[test]
fn halving_tolerances_changes_final_state_little() {
    let params = derived();
    let coarse = IntegratorConfig::default();
    let fine = coarse.scaled_tolerances(0.5);
    for (x0, f_l, t_end) in
        [(SystemState::new(1.0, 0.0, 3.0, 0.0), -5.0, 1.0), (SystemState::new(7.0, -1.5, 2.0, 0.4), -2.0, 5.0)]
    {
        let a = simulate(&params, x0, f_l, t_end, &coarse).unwrap();
        let b = simulate(&params, x0, f_l, t_end, &fine).unwrap();
        let (sa, sb) = (a.last().state.to_array(), b.last().state.to_array());
        let scale = sa.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
        let diff = sa.iter().zip(&sb).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
        assert!(diff < coarse.rel_tol * scale.max(1.0), "diff {diff}");
    }
}

#[test]
fn unlatched_flow_is_time_reversible() {
    let params = SystemParams::default();
    let config = IntegratorConfig::default();
    let f_l = 0.0;
    let x0 = SystemState::new(6.0, 0.5, 1.0, -0.3);
    // p stays below p0 over this horizon, so neither run stops early
    let t = 1.2;
    let forward = unlatched_run(&params, x0, f_l, t, &config).last().state;
    assert_eq!(unlatched_run(&params, x0, f_l, t, &config).termination, Termination::EndTime);
    let flipped = SystemState::new(forward.p, -forward.p_dot, forward.l, -forward.l_dot);
    let back = unlatched_run(&params, flipped, f_l, t, &config).last().state;
    let returned = SystemState::new(back.p, -back.p_dot, back.l, -back.l_dot);
    let err = returned.to_array().iter().zip(x0.to_array()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    let scale = x0.max_abs().max(1.0);
    assert!(err <= 10.0 * config.rel_tol * scale, "return error {err}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn modes_switch_at_most_once(p in 0.2..4.8f64, v in -1.0..1.0f64, f_l in -15.0..5.0f64, derived_variant in any::<bool>()) {
        let params = if derived_variant { derived() } else { SystemParams::default() };
        let l = params.latch_from_projectile(p).unwrap();
        let x0 = SystemState::new(p, v, l, (params.latch_radius - p) * v / l);
        let traj = simulate(&params, x0, f_l, 5.0, &IntegratorConfig::default()).unwrap();
        prop_assert!(traj.mode_transitions() <= 1);
        prop_assert!(traj.samples.windows(2).all(|w| !(w[0].mode == Mode::Unlatched && w[1].mode == Mode::Latched)));
        prop_assert!(traj.samples.windows(2).all(|w| w[1].t >= w[0].t));
        prop_assert_eq!(traj.events.len(), traj.mode_transitions());
        for s in traj.latched_samples() {
            prop_assert!(s.tau > 0.0);
            prop_assert!(s.state.p < params.latch_radius);
        }
    }
}
