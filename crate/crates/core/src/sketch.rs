//! Sketch threshold automata: automata whose guard coefficient slots are
//! affine expressions over integer indeterminates.
//!
//! A sketch fixes the control flow of a protocol but leaves numeric slots
//! of the threshold guards open. Instantiating a sketch with an assignment
//! `μ` of the indeterminates yields a plain [`ThresholdAutomaton`].

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use thiserror::Error;

use crate::ta::{
    Diagnostic, Environment, Guard, GuardOp, LinearExpr, Rule, TaError, ThresholdAutomaton,
};

/// Errors raised while evaluating or instantiating sketches.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SketchError {
    #[error("indeterminate `{0}` has no assigned value")]
    UnassignedIndeterminate(String),

    #[error("rule `{rule}`: instantiated guard factor is {value}, must be positive")]
    NonPositiveFactor { rule: String, value: i64 },

    #[error(transparent)]
    Arith(#[from] TaError),
}

/// An affine combination `const + Σ coeff_i * s_i` of indeterminates.
///
/// Terms keep their insertion order, which determines the order in which
/// indeterminates are reported by [`collect_indeterminates`] and the
/// canonical textual form.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct AffineCoeff {
    pub const_term: i64,
    terms: Vec<(String, i64)>,
}

impl AffineCoeff {
    pub fn constant(c: i64) -> Self {
        AffineCoeff {
            const_term: c,
            terms: Vec::new(),
        }
    }

    pub fn indet(name: impl Into<String>) -> Self {
        AffineCoeff::constant(0).add_term(name, 1)
    }

    /// Adds `coeff * name`, merging with an existing term for `name`.
    /// Terms whose coefficient becomes zero are dropped.
    pub fn add_term(mut self, name: impl Into<String>, coeff: i64) -> Self {
        let name = name.into();
        if let Some(slot) = self.terms.iter_mut().find(|(n, _)| *n == name) {
            slot.1 += coeff;
        } else if coeff != 0 {
            self.terms.push((name, coeff));
        }
        self.terms.retain(|(_, c)| *c != 0);
        self
    }

    pub fn add_const(mut self, c: i64) -> Self {
        self.const_term += c;
        self
    }

    pub fn is_constant(&self) -> bool {
        self.terms.is_empty()
    }

    /// The terms over indeterminates, in insertion order.
    pub fn terms(&self) -> &[(String, i64)] {
        &self.terms
    }

    fn checked_scale(&self, k: i64) -> Result<AffineCoeff, TaError> {
        let mut out =
            AffineCoeff::constant(self.const_term.checked_mul(k).ok_or(TaError::Overflow)?);
        for (name, c) in &self.terms {
            out = out.add_term(name.clone(), c.checked_mul(k).ok_or(TaError::Overflow)?);
        }
        Ok(out)
    }

    /// Product of two affine coefficients. Fails if both sides carry
    /// indeterminate terms, since the result would no longer be affine.
    pub fn multiply(&self, other: &AffineCoeff) -> Option<Result<AffineCoeff, TaError>> {
        if !self.is_constant() && !other.is_constant() {
            return None;
        }
        let (affine, scalar) = if other.is_constant() {
            (self, other.const_term)
        } else {
            (other, self.const_term)
        };
        Some(affine.checked_scale(scalar))
    }

    pub fn checked_add(&self, other: &AffineCoeff) -> Result<AffineCoeff, TaError> {
        let mut out = self.clone();
        out.const_term = out
            .const_term
            .checked_add(other.const_term)
            .ok_or(TaError::Overflow)?;
        for (name, c) in &other.terms {
            out = out.add_term(name.clone(), *c);
        }
        Ok(out)
    }
}

impl fmt::Display for AffineCoeff {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (name, c) in &self.terms {
            write_signed_term(f, &mut first, *c, Some(name))?;
        }
        if self.const_term != 0 || first {
            write_signed_term(f, &mut first, self.const_term, None)?;
        }
        Ok(())
    }
}

pub(crate) fn write_signed_term(
    f: &mut fmt::Formatter<'_>,
    first: &mut bool,
    coeff: i64,
    name: Option<&str>,
) -> fmt::Result {
    if *first {
        *first = false;
        if coeff < 0 {
            write!(f, "-")?;
        }
    } else if coeff < 0 {
        write!(f, " - ")?;
    } else {
        write!(f, " + ")?;
    }
    let mag = coeff.unsigned_abs();
    match name {
        Some(name) if mag == 1 => write!(f, "{name}"),
        Some(name) => write!(f, "{mag}*{name}"),
        None => write!(f, "{mag}"),
    }
}

/// An assignment of integer values to indeterminates.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord)]
pub struct Assignment(pub BTreeMap<String, i64>);

impl Assignment {
    pub fn empty() -> Self {
        Assignment(BTreeMap::new())
    }

    pub fn of(pairs: &[(&str, i64)]) -> Self {
        Assignment(pairs.iter().map(|(n, v)| (n.to_string(), *v)).collect())
    }

    pub fn get(&self, name: &str) -> Option<i64> {
        self.0.get(name).copied()
    }
}

impl fmt::Display for Assignment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (name, value) in &self.0 {
            if !first {
                write!(f, " ")?;
            }
            first = false;
            write!(f, "{name}={value}")?;
        }
        Ok(())
    }
}

/// Evaluates an affine coefficient under an assignment.
pub fn eval_affine(coeff: &AffineCoeff, mu: &Assignment) -> Result<i64, SketchError> {
    let mut acc = coeff.const_term;
    for (name, c) in &coeff.terms {
        let v = mu
            .get(name)
            .ok_or_else(|| SketchError::UnassignedIndeterminate(name.clone()))?;
        let prod = c.checked_mul(v).ok_or(TaError::Overflow)?;
        acc = acc.checked_add(prod).ok_or(TaError::Overflow)?;
    }
    Ok(acc)
}

/// A guard whose factor, constant and parameter-coefficient slots are
/// affine expressions over indeterminates.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SketchGuard {
    pub var: String,
    pub factor: AffineCoeff,
    pub cmp: GuardOp,
    pub rhs_const: AffineCoeff,
    pub rhs_param_coeffs: BTreeMap<String, AffineCoeff>,
}

impl SketchGuard {
    pub fn new(var: impl Into<String>, cmp: GuardOp) -> Self {
        SketchGuard {
            var: var.into(),
            factor: AffineCoeff::constant(1),
            cmp,
            rhs_const: AffineCoeff::constant(0),
            rhs_param_coeffs: BTreeMap::new(),
        }
    }

    pub fn with_factor(mut self, factor: AffineCoeff) -> Self {
        self.factor = factor;
        self
    }

    pub fn with_const(mut self, c: AffineCoeff) -> Self {
        self.rhs_const = c;
        self
    }

    pub fn with_param(mut self, param: impl Into<String>, coeff: AffineCoeff) -> Self {
        self.rhs_param_coeffs.insert(param.into(), coeff);
        self
    }

    /// Embeds a plain guard as a sketch guard with constant slots.
    pub fn from_guard(guard: &Guard) -> Self {
        let mut out = SketchGuard::new(guard.var.clone(), guard.cmp)
            .with_factor(AffineCoeff::constant(guard.factor))
            .with_const(AffineCoeff::constant(guard.rhs.const_term));
        for (param, c) in &guard.rhs.coeffs {
            out = out.with_param(param.clone(), AffineCoeff::constant(*c));
        }
        out
    }

    fn visit_coeffs<'a>(&'a self, mut f: impl FnMut(&'a AffineCoeff)) {
        f(&self.factor);
        f(&self.rhs_const);
        for coeff in self.rhs_param_coeffs.values() {
            f(coeff);
        }
    }
}

/// A rule of a sketch automaton.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SketchRule {
    pub id: String,
    pub from: String,
    pub to: String,
    pub guards: Vec<SketchGuard>,
    pub update: BTreeMap<String, i64>,
}

impl SketchRule {
    pub fn new(id: impl Into<String>, from: impl Into<String>, to: impl Into<String>) -> Self {
        SketchRule {
            id: id.into(),
            from: from.into(),
            to: to.into(),
            guards: Vec::new(),
            update: BTreeMap::new(),
        }
    }

    pub fn with_guard(mut self, guard: SketchGuard) -> Self {
        self.guards.push(guard);
        self
    }

    /// Appends the `>=`/`<` pair encoding `var = rhs` for an affine rhs
    /// given by its constant slot and parameter-coefficient slots.
    pub fn with_eq_guard(
        mut self,
        var: &str,
        rhs_const: AffineCoeff,
        params: &[(String, AffineCoeff)],
    ) -> Self {
        let mut ge = SketchGuard::new(var, GuardOp::Ge).with_const(rhs_const.clone());
        let mut lt = SketchGuard::new(var, GuardOp::Lt).with_const(rhs_const.add_const(1));
        for (p, c) in params {
            ge = ge.with_param(p.clone(), c.clone());
            lt = lt.with_param(p.clone(), c.clone());
        }
        self.guards.push(ge);
        self.guards.push(lt);
        self
    }

    pub fn with_inc(mut self, var: impl Into<String>) -> Self {
        self.update.insert(var.into(), 1);
        self
    }
}

/// A sketch threshold automaton.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SketchAutomaton {
    pub env: Environment,
    pub locations: Vec<String>,
    pub initial: Vec<String>,
    pub shared: Vec<String>,
    pub rules: Vec<SketchRule>,
}

impl SketchAutomaton {
    /// Embeds a plain threshold automaton as a sketch with no
    /// indeterminates.
    pub fn from_threshold(ta: &ThresholdAutomaton) -> Self {
        SketchAutomaton {
            env: ta.env.clone(),
            locations: ta.locations.clone(),
            initial: ta.initial.clone(),
            shared: ta.shared.clone(),
            rules: ta
                .rules
                .iter()
                .map(|r| SketchRule {
                    id: r.id.clone(),
                    from: r.from.clone(),
                    to: r.to.clone(),
                    guards: r.guards.iter().map(SketchGuard::from_guard).collect(),
                    update: r.update.clone(),
                })
                .collect(),
        }
    }
}

/// Every indeterminate occurring in any coefficient slot, in first
/// occurrence order (rules in declaration order, guards left to right,
/// factor before rhs slots).
pub fn collect_indeterminates(sketch: &SketchAutomaton) -> Vec<String> {
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    for rule in &sketch.rules {
        for guard in &rule.guards {
            guard.visit_coeffs(|coeff| {
                for (name, _) in coeff.terms() {
                    if seen.insert(name.clone()) {
                        out.push(name.clone());
                    }
                }
            });
        }
    }
    out
}

/// Replaces every indeterminate by its value in `mu`, producing a plain
/// threshold automaton. Fails if an indeterminate is unassigned or if an
/// instantiated factor slot is not positive.
pub fn instantiate(
    sketch: &SketchAutomaton,
    mu: &Assignment,
) -> Result<ThresholdAutomaton, SketchError> {
    let mut rules = Vec::with_capacity(sketch.rules.len());
    for rule in &sketch.rules {
        let mut guards = Vec::with_capacity(rule.guards.len());
        for guard in &rule.guards {
            let factor = eval_affine(&guard.factor, mu)?;
            if factor <= 0 {
                return Err(SketchError::NonPositiveFactor {
                    rule: rule.id.clone(),
                    value: factor,
                });
            }
            let mut rhs = LinearExpr::constant(eval_affine(&guard.rhs_const, mu)?);
            for (param, coeff) in &guard.rhs_param_coeffs {
                rhs = rhs.add_term(param.clone(), eval_affine(coeff, mu)?);
            }
            guards.push(Guard::new(guard.var.clone(), factor, guard.cmp, rhs));
        }
        rules.push(Rule {
            id: rule.id.clone(),
            from: rule.from.clone(),
            to: rule.to.clone(),
            guards,
            update: rule.update.clone(),
        });
    }
    Ok(ThresholdAutomaton {
        env: sketch.env.clone(),
        locations: sketch.locations.clone(),
        initial: sketch.initial.clone(),
        shared: sketch.shared.clone(),
        rules,
    })
}

/// Structural validation of a sketch: the checks of [`crate::ta::validate`]
/// plus disjointness of indeterminate names from parameters and shared
/// variables. Factor slots that still contain indeterminates are checked at
/// instantiation time instead.
pub fn validate_sketch(sketch: &SketchAutomaton) -> Vec<Diagnostic> {
    // Validate the constant skeleton by instantiating every indeterminate
    // with 1, which keeps constant factor defects visible.
    let indets = collect_indeterminates(sketch);
    let mu = Assignment(indets.iter().map(|n| (n.clone(), 1)).collect());
    let mut out = match instantiate(sketch, &mu) {
        Ok(ta) => crate::ta::validate(&ta),
        Err(SketchError::NonPositiveFactor { rule, value }) => {
            vec![Diagnostic::NonPositiveFactor { rule, value }]
        }
        Err(_) => Vec::new(),
    };
    for name in &indets {
        if sketch.env.params.contains(name) || sketch.shared.contains(name) {
            out.push(Diagnostic::IndeterminateNameClash { name: name.clone() });
        }
    }
    out
}
