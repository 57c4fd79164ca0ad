//! Shared builders for unit tests.

use crate::sketch::{AffineCoeff, SketchAutomaton, SketchGuard, SketchRule};
use crate::ta::{ConstraintOp, Environment, GuardOp, LinearConstraint, LinearExpr, Valuation};

pub(crate) fn st87_env() -> Environment {
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

/// Sketch of the broadcast model: the guard constant is left open as `a`.
pub(crate) fn st87_sketch() -> SketchAutomaton {
    SketchAutomaton {
        env: st87_env(),
        locations: vec!["l0".into(), "l2".into(), "l3".into()],
        initial: vec!["l0".into()],
        shared: vec!["x".into()],
        rules: vec![
            SketchRule::new("r2", "l0", "l2")
                .with_guard(
                    SketchGuard::new("x", GuardOp::Ge)
                        .with_const(AffineCoeff::indet("a"))
                        .with_param("t", AffineCoeff::constant(1))
                        .with_param("f", AffineCoeff::constant(-1)),
                )
                .with_inc("x"),
            SketchRule::new("r3", "l2", "l3").with_guard(
                SketchGuard::new("x", GuardOp::Ge)
                    .with_param("n", AffineCoeff::constant(1))
                    .with_param("t", AffineCoeff::constant(-1))
                    .with_param("f", AffineCoeff::constant(-1)),
            ),
        ],
    }
}

pub(crate) fn p611() -> Valuation {
    [("n".into(), 6), ("t".into(), 1), ("f".into(), 1)].into()
}
