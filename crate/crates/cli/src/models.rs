//! Built-in models.
//!
//! `st87` is the broadcast-protocol body with guards `x >= (t+1) - f` and
//! `x >= (n-t) - f` under the resilience condition `n >= 3t+1, t >= f`;
//! `st87-sketch` is the same automaton with the first location removed and
//! the guard constant left open as the indeterminate `a`; `fig7` is the
//! compilation of the running example formula.

use tasynth_core::reduction::compile_formula;
use tasynth_core::sketch::{AffineCoeff, SketchAutomaton, SketchGuard, SketchRule};
use tasynth_core::suites::FIG7_FORMULA;
use tasynth_core::ta::{ConstraintOp, Environment, GuardOp, LinearConstraint, LinearExpr};

pub const MODEL_NAMES: &[&str] = &["st87", "st87-sketch", "fig7"];

fn broadcast_env() -> Environment {
    Environment {
        params: vec!["n".into(), "t".into(), "f".into()],
        resilience: vec![
            LinearConstraint::new(
                LinearExpr::var("n"),
                ConstraintOp::Ge,
                LinearExpr::term("t", 3).add_const(1),
            ),
            LinearConstraint::new(LinearExpr::var("t"), ConstraintOp::Ge, LinearExpr::var("f")),
        ],
        size_fn: LinearExpr::var("n").add_term("f", -1),
    }
}

fn gamma1(constant: AffineCoeff) -> SketchGuard {
    SketchGuard::new("x", GuardOp::Ge)
        .with_const(constant)
        .with_param("t", AffineCoeff::constant(1))
        .with_param("f", AffineCoeff::constant(-1))
}

fn gamma2() -> SketchGuard {
    SketchGuard::new("x", GuardOp::Ge)
        .with_param("n", AffineCoeff::constant(1))
        .with_param("t", AffineCoeff::constant(-1))
        .with_param("f", AffineCoeff::constant(-1))
}

fn st87() -> SketchAutomaton {
    SketchAutomaton {
        env: broadcast_env(),
        locations: vec!["l0".into(), "l1".into(), "l2".into(), "l3".into()],
        initial: vec!["l0".into(), "l1".into()],
        shared: vec!["x".into()],
        rules: vec![
            SketchRule::new("r1", "l1", "l2").with_inc("x"),
            SketchRule::new("r2", "l0", "l2")
                .with_guard(gamma1(AffineCoeff::constant(1)))
                .with_inc("x"),
            SketchRule::new("r3", "l2", "l3").with_guard(gamma2()),
        ],
    }
}

fn st87_sketch() -> SketchAutomaton {
    SketchAutomaton {
        env: broadcast_env(),
        locations: vec!["l0".into(), "l2".into(), "l3".into()],
        initial: vec!["l0".into()],
        shared: vec!["x".into()],
        rules: vec![
            SketchRule::new("r2", "l0", "l2")
                .with_guard(gamma1(AffineCoeff::indet("a")))
                .with_inc("x"),
            SketchRule::new("r3", "l2", "l3").with_guard(gamma2()),
        ],
    }
}

/// Looks up a built-in model by name.
pub fn builtin_model(name: &str) -> Option<SketchAutomaton> {
    match name {
        "st87" => Some(st87()),
        "st87-sketch" => Some(st87_sketch()),
        "fig7" => Some(
            compile_formula(&tasynth_core::pad::parse_formula(FIG7_FORMULA).expect("parses"))
                .sketch,
        ),
        _ => None,
    }
}
