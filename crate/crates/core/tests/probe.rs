use rlf_core::dynamics::{Template, VectorField};
use rlf_core::ideals::{chain_bound, IdealLimits};
use std::time::Instant;

#[test]
fn probe_two_param_step_budgets() {
    let field =
        VectorField::parse(&["x".into(), "y".into()], &["-x^3 + y", "-x - y^3"]).unwrap();
    let template = Template::parse(
        &["a".into(), "b".into()],
        &["x".into(), "y".into()],
        "x^2 + a*x*y + b*y^2",
    )
    .unwrap();
    for steps in [200usize, 500, 1_000, 2_000] {
        let limits = IdealLimits { max_steps: steps, ..IdealLimits::default() };
        let t = Instant::now();
        let out = chain_bound(&template, &field, &limits);
        eprintln!("max_steps={steps}: {:?} in {:?}", out.err(), t.elapsed());
    }
}
