use std::path::PathBuf;

use hydrolfc::harness::{run_comparison, run_scenario, ControllerKind, Scenario};
use hydrolfc::optim::Activation;
use hydrolfc::LfcError;

fn scenario_file(name: &str) -> String {
    let p = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../scenarios").join(name);
    std::fs::read_to_string(p).unwrap()
}

#[test]
fn shipped_scenarios_are_the_reference_load_steps() {
    let up = Scenario::from_toml(&scenario_file("load_step_up.toml")).unwrap();
    let drop = Scenario::from_toml(&scenario_file("load_drop.toml")).unwrap();
    assert_eq!(up, Scenario::default_load_step(50.0));
    assert_eq!(drop, Scenario::default_load_step(-50.0));
}

#[test]
fn unknown_surrogate_key_is_rejected() {
    let text = scenario_file("load_step_up.toml").replace("hidden = 40", "hidden = 40\nhiden = 3");
    assert!(matches!(Scenario::from_toml(&text), Err(LfcError::Config(_))));
}

#[test]
fn surrogate_activation_is_configurable() {
    let text = scenario_file("load_step_up.toml")
        + "\n[surrogate.activation]\nkind = \"sigmoid\"\n";
    let sc = Scenario::from_toml(&text).unwrap();
    assert_eq!(sc.kind(), ControllerKind::FuzzyPdGaDsnn);
    assert_eq!(sc.surrogate.unwrap().net.activation, Activation::Sigmoid);
}

#[test]
fn zero_event_run_stays_at_rest() {
    let mut sc = Scenario::default_load_step(50.0);
    sc.load_events.clear();
    for k in [ControllerKind::Pd, ControllerKind::PidAdaptive, ControllerKind::FuzzyPd] {
        let a = run_scenario(&sc.with_controller(k)).unwrap();
        assert!(a.trace.f_err.iter().all(|&e| e == 0.0), "{k}");
        assert_eq!(a.report.unwrap().values(), [0.0; 7], "{k}");
    }
}

#[test]
fn load_events_apply_exactly_at_their_sample() {
    let sc = Scenario::default_load_step(50.0).with_controller(ControllerKind::Pd);
    let a = run_scenario(&sc).unwrap();
    let k = 1000;
    assert_eq!(a.trace.t[k], 1.0);
    assert_eq!(a.trace.p_load[k] - a.trace.p_load[k - 1], 50.0);
    assert!(a.trace.p_load[..k].iter().all(|&p| p == 250.0));
    let r = a.report.unwrap();
    assert!(r.undershoot > 0.0 && r.overshoot >= 0.0);
}

#[test]
fn repeated_controller_gives_identical_columns() {
    let sc = Scenario::default_load_step(-50.0);
    let cmp = run_comparison(&sc, &[ControllerKind::FuzzyPd, ControllerKind::FuzzyPd]).unwrap();
    let table = cmp.table.unwrap();
    for row in &table.rows {
        assert_eq!(row.values[0], row.values[1]);
    }
}
