//! The swap schedule of transition rules 2 and 6 decides whether the
//! compiled orbit stays a path.

use srw_core::circuit::{Circuit, Gate, Layer};
use srw_core::compiler::{compile, CompileOptions, SwapSchedule};
use srw_core::spectral::MMode;
use srw_core::verifier::{orbit_check, CheckResult, Context};

fn orbit(schedule: SwapSchedule) -> Vec<CheckResult> {
    let circuit = Circuit::new(1, vec![Layer::new(vec![Gate::h(0)])]);
    let options = CompileOptions {
        m_mode: MMode::SignOnly,
        schedule,
    };
    let comp = compile(&circuit, &[false], options).unwrap();
    let ctx = Context::new(&comp.instance, &circuit, &[false]).unwrap();
    orbit_check(&ctx).unwrap()
}

fn passed(checks: &[CheckResult], name: &str) -> bool {
    checks.iter().find(|c| c.name == name).unwrap().passed()
}

#[test]
fn aligned_schedule_gives_a_path() {
    let checks = orbit(SwapSchedule::Aligned);
    assert!(checks.iter().all(CheckResult::passed));
}

#[test]
fn literal_schedule_loses_the_path() {
    let checks = orbit(SwapSchedule::Literal);
    // The control sequence itself is unaffected.
    assert!(passed(&checks, "unique_transition"));
    assert!(passed(&checks, "orbit_terminates"));
    // Without the swap the sim bit is left behind and amplitudes pile up.
    assert!(!passed(&checks, "orbit_orthonormal"));
    assert!(!passed(&checks, "path_matrix_elements"));
    assert!(!passed(&checks, "orbit_span_invariant"));
}
