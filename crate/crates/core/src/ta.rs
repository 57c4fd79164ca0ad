//! Threshold automata over parametric environments and their exact step
//! semantics.
//!
//! A threshold automaton is a finite set of locations connected by rules.
//! Each rule carries a conjunction of threshold guards of the form
//! `b*x ⋈ a0 + a1*p1 + ... + ak*pk` with `⋈ ∈ {>=, <}`, comparing a shared
//! variable against a linear expression over the environment parameters.
//! Processes move asynchronously; shared variables only ever increase.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use thiserror::Error;

/// A total valuation of named integer variables.
pub type Valuation = BTreeMap<String, i64>;

/// Errors raised by the exact semantics.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TaError {
    #[error("unknown variable `{0}`")]
    UnknownVariable(String),

    #[error("integer overflow in exact arithmetic")]
    Overflow,

    #[error("rule `{0}` is not enabled")]
    RuleNotEnabled(String),

    #[error("unknown rule id `{0}`")]
    UnknownRule(String),

    #[error("run failed at step {index}: {source}")]
    RunStep {
        index: usize,
        #[source]
        source: Box<TaError>,
    },

    #[error("malformed configuration: {0}")]
    MalformedConfiguration(String),
}

fn checked_add(a: i64, b: i64) -> Result<i64, TaError> {
    a.checked_add(b).ok_or(TaError::Overflow)
}

fn checked_mul(a: i64, b: i64) -> Result<i64, TaError> {
    a.checked_mul(b).ok_or(TaError::Overflow)
}

/// A linear expression `const + Σ coeff_i * p_i` over named parameters.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LinearExpr {
    pub const_term: i64,
    pub coeffs: BTreeMap<String, i64>,
}

impl LinearExpr {
    pub fn constant(c: i64) -> Self {
        LinearExpr {
            const_term: c,
            coeffs: BTreeMap::new(),
        }
    }

    pub fn var(name: impl Into<String>) -> Self {
        Self::term(name, 1)
    }

    pub fn term(name: impl Into<String>, coeff: i64) -> Self {
        let mut coeffs = BTreeMap::new();
        coeffs.insert(name.into(), coeff);
        LinearExpr {
            const_term: 0,
            coeffs,
        }
    }

    /// Adds `coeff * name` to the expression, merging with an existing term.
    pub fn add_term(mut self, name: impl Into<String>, coeff: i64) -> Self {
        let name = name.into();
        let entry = self.coeffs.entry(name).or_insert(0);
        *entry += coeff;
        if *entry == 0 {
            self.coeffs.retain(|_, c| *c != 0);
        }
        self
    }

    pub fn add_const(mut self, c: i64) -> Self {
        self.const_term += c;
        self
    }

    /// Exact evaluation under a valuation of all referenced parameters.
    pub fn eval(&self, v: &Valuation) -> Result<i64, TaError> {
        let mut acc = self.const_term;
        for (name, coeff) in &self.coeffs {
            let val = v
                .get(name)
                .copied()
                .ok_or_else(|| TaError::UnknownVariable(name.clone()))?;
            acc = checked_add(acc, checked_mul(*coeff, val)?)?;
        }
        Ok(acc)
    }

    /// Parameter names referenced with a nonzero coefficient.
    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.coeffs
            .iter()
            .filter(|(_, c)| **c != 0)
            .map(|(n, _)| n.as_str())
    }
}

/// Comparison operator of a resilience constraint.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ConstraintOp {
    Ge,
    Lt,
    /// Equality; semantically the conjunction of `>=` and `< rhs+1`.
    Eq,
}

impl fmt::Display for ConstraintOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ConstraintOp::Ge => write!(f, ">="),
            ConstraintOp::Lt => write!(f, "<"),
            ConstraintOp::Eq => write!(f, "="),
        }
    }
}

/// A linear constraint `lhs ⋈ rhs` over the environment parameters.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LinearConstraint {
    pub lhs: LinearExpr,
    pub cmp: ConstraintOp,
    pub rhs: LinearExpr,
}

impl LinearConstraint {
    pub fn new(lhs: LinearExpr, cmp: ConstraintOp, rhs: LinearExpr) -> Self {
        LinearConstraint { lhs, cmp, rhs }
    }

    pub fn holds(&self, v: &Valuation) -> Result<bool, TaError> {
        let l = self.lhs.eval(v)?;
        let r = self.rhs.eval(v)?;
        Ok(match self.cmp {
            ConstraintOp::Ge => l >= r,
            ConstraintOp::Lt => l < r,
            ConstraintOp::Eq => l == r,
        })
    }
}

/// An environment: parameter variables, a resilience condition constraining
/// their admissible valuations, and the number function giving the count of
/// explicitly modeled processes.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Environment {
    /// Parameter variable names, in declaration order.
    pub params: Vec<String>,
    /// Conjunction of constraints; empty means trivially true.
    pub resilience: Vec<LinearConstraint>,
    /// The number function `N`.
    pub size_fn: LinearExpr,
}

impl Environment {
    /// True iff `p` satisfies every resilience constraint.
    pub fn admits(&self, p: &Valuation) -> Result<bool, TaError> {
        for c in &self.resilience {
            if !c.holds(p)? {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Evaluates the number function at `p`.
    pub fn size(&self, p: &Valuation) -> Result<i64, TaError> {
        self.size_fn.eval(p)
    }
}

/// Comparison operator of a threshold guard. Equalities are desugared into
/// a `>=`/`<` pair before reaching this type.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum GuardOp {
    Ge,
    Lt,
}

impl fmt::Display for GuardOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GuardOp::Ge => write!(f, ">="),
            GuardOp::Lt => write!(f, "<"),
        }
    }
}

/// A threshold guard `factor * var ⋈ rhs(p)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Guard {
    /// Shared variable compared by the guard.
    pub var: String,
    /// Multiplier on the shared variable; must be positive.
    pub factor: i64,
    pub cmp: GuardOp,
    /// Linear expression over the environment parameters.
    pub rhs: LinearExpr,
}

impl Guard {
    pub fn new(var: impl Into<String>, factor: i64, cmp: GuardOp, rhs: LinearExpr) -> Self {
        Guard {
            var: var.into(),
            factor,
            cmp,
            rhs,
        }
    }

    /// Guard `var >= rhs`.
    pub fn ge(var: impl Into<String>, rhs: LinearExpr) -> Self {
        Guard::new(var, 1, GuardOp::Ge, rhs)
    }

    /// Guard `var < rhs`.
    pub fn lt(var: impl Into<String>, rhs: LinearExpr) -> Self {
        Guard::new(var, 1, GuardOp::Lt, rhs)
    }
}

/// Evaluates a guard against shared and parameter valuations.
pub fn eval_guard(guard: &Guard, g: &Valuation, p: &Valuation) -> Result<bool, TaError> {
    let x = g
        .get(&guard.var)
        .copied()
        .ok_or_else(|| TaError::UnknownVariable(guard.var.clone()))?;
    let lhs = checked_mul(guard.factor, x)?;
    let rhs = guard.rhs.eval(p)?;
    Ok(match guard.cmp {
        GuardOp::Ge => lhs >= rhs,
        GuardOp::Lt => lhs < rhs,
    })
}

/// A transition rule: a guarded edge between two locations together with an
/// increment vector on the shared variables.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Rule {
    pub id: String,
    pub from: String,
    pub to: String,
    /// Conjunction of guards; empty means `true`.
    pub guards: Vec<Guard>,
    /// Update vector; values must be 0 or 1. Absent variables are 0.
    pub update: BTreeMap<String, i64>,
}

impl Rule {
    pub fn new(id: impl Into<String>, from: impl Into<String>, to: impl Into<String>) -> Self {
        Rule {
            id: id.into(),
            from: from.into(),
            to: to.into(),
            guards: Vec::new(),
            update: BTreeMap::new(),
        }
    }

    pub fn with_guard(mut self, guard: Guard) -> Self {
        self.guards.push(guard);
        self
    }

    pub fn with_inc(mut self, var: impl Into<String>) -> Self {
        self.update.insert(var.into(), 1);
        self
    }
}

/// A threshold automaton.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ThresholdAutomaton {
    pub env: Environment,
    /// Locations, in declaration order.
    pub locations: Vec<String>,
    /// Initial locations; must be a nonempty subset of `locations`.
    pub initial: Vec<String>,
    /// Shared variables, in declaration order.
    pub shared: Vec<String>,
    /// Rules, in declaration order.
    pub rules: Vec<Rule>,
}

impl ThresholdAutomaton {
    pub fn rule(&self, id: &str) -> Option<&Rule> {
        self.rules.iter().find(|r| r.id == id)
    }
}

/// A configuration: per-location process counts, shared-variable values and
/// a parameter valuation. All entries are natural numbers.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Configuration {
    pub kappa: Valuation,
    pub g: Valuation,
    pub p: Valuation,
}

impl Configuration {
    /// Builds a configuration with the given process counts (absent
    /// locations filled with 0), all shared variables 0 and parameters `p`.
    /// This is the shape of an initial configuration.
    pub fn initial(
        ta: &ThresholdAutomaton,
        kappa: &[(&str, i64)],
        p: Valuation,
    ) -> Result<Self, TaError> {
        let mut dense: Valuation = ta.locations.iter().map(|l| (l.clone(), 0)).collect();
        for (loc, count) in kappa {
            match dense.get_mut(*loc) {
                Some(slot) => *slot = *count,
                None => return Err(TaError::UnknownVariable((*loc).to_string())),
            }
        }
        let g = ta.shared.iter().map(|x| (x.clone(), 0)).collect();
        let c = Configuration { kappa: dense, g, p };
        check_configuration(ta, &c)?;
        Ok(c)
    }
}

/// Checks that `c` is well-formed for `ta`: entries are non-negative, the
/// keys match the declared names, the process counts sum to `N(p)` and `p`
/// satisfies the resilience condition.
pub fn check_configuration(ta: &ThresholdAutomaton, c: &Configuration) -> Result<(), TaError> {
    let malformed = |msg: String| Err(TaError::MalformedConfiguration(msg));

    if c.kappa.len() != ta.locations.len() || !ta.locations.iter().all(|l| c.kappa.contains_key(l))
    {
        return malformed("location counters do not match declared locations".into());
    }
    if c.g.len() != ta.shared.len() || !ta.shared.iter().all(|x| c.g.contains_key(x)) {
        return malformed("shared values do not match declared variables".into());
    }
    if c.p.len() != ta.env.params.len() || !ta.env.params.iter().all(|q| c.p.contains_key(q)) {
        return malformed("parameter valuation does not match declared parameters".into());
    }
    if let Some((name, v)) = c
        .kappa
        .iter()
        .chain(c.g.iter())
        .chain(c.p.iter())
        .find(|(_, v)| **v < 0)
    {
        return malformed(format!("negative entry {name}={v}"));
    }
    let mut total = 0i64;
    for v in c.kappa.values() {
        total = checked_add(total, *v)?;
    }
    let n = ta.env.size(&c.p)?;
    if total != n {
        return malformed(format!("process counts sum to {total}, expected N = {n}"));
    }
    if !ta.env.admits(&c.p)? {
        return malformed("parameter valuation violates the resilience condition".into());
    }
    Ok(())
}

/// True iff `c` enables `r`: the source location is occupied and every
/// guard holds.
pub fn rule_enabled(ta: &ThresholdAutomaton, c: &Configuration, r: &Rule) -> Result<bool, TaError> {
    let _ = ta;
    let occupied = c
        .kappa
        .get(&r.from)
        .copied()
        .ok_or_else(|| TaError::UnknownVariable(r.from.clone()))?
        > 0;
    if !occupied {
        return Ok(false);
    }
    for guard in &r.guards {
        if !eval_guard(guard, &c.g, &c.p)? {
            return Ok(false);
        }
    }
    Ok(true)
}

/// The rules enabled at `c`, in declaration order.
pub fn enabled_rules<'a>(
    ta: &'a ThresholdAutomaton,
    c: &Configuration,
) -> Result<Vec<&'a Rule>, TaError> {
    let mut out = Vec::new();
    for r in &ta.rules {
        if rule_enabled(ta, c, r)? {
            out.push(r);
        }
    }
    Ok(out)
}

/// Applies one step of `r` at `c`. Parameters are unchanged, the shared
/// valuation is incremented by the update vector, and one process moves
/// from the source to the target location (no counter change when they
/// coincide).
pub fn step(
    ta: &ThresholdAutomaton,
    c: &Configuration,
    r: &Rule,
) -> Result<Configuration, TaError> {
    if !rule_enabled(ta, c, r)? {
        return Err(TaError::RuleNotEnabled(r.id.clone()));
    }
    let mut next = c.clone();
    for (var, inc) in &r.update {
        let slot = next
            .g
            .get_mut(var)
            .ok_or_else(|| TaError::UnknownVariable(var.clone()))?;
        *slot = checked_add(*slot, *inc)?;
    }
    if r.from != r.to {
        *next
            .kappa
            .get_mut(&r.from)
            .expect("checked by rule_enabled") -= 1;
        let to = next
            .kappa
            .get_mut(&r.to)
            .ok_or_else(|| TaError::UnknownVariable(r.to.clone()))?;
        *to = checked_add(*to, 1)?;
    }
    Ok(next)
}

/// Applies a run given as a sequence of rule ids, left to right.
pub fn apply_run<S: AsRef<str>>(
    ta: &ThresholdAutomaton,
    c: &Configuration,
    run: &[S],
) -> Result<Configuration, TaError> {
    let mut current = c.clone();
    for (index, id) in run.iter().enumerate() {
        let wrap = |source: TaError| TaError::RunStep {
            index,
            source: Box::new(source),
        };
        let rule = ta
            .rule(id.as_ref())
            .ok_or_else(|| wrap(TaError::UnknownRule(id.as_ref().to_string())))?;
        current = step(ta, &current, rule).map_err(wrap)?;
    }
    Ok(current)
}

/// True iff the directed graph with an edge `r.from -> r.to` for every rule
/// has no directed cycle. A self-loop rule makes the automaton cyclic.
pub fn is_acyclic(ta: &ThresholdAutomaton) -> bool {
    let index: BTreeMap<&str, usize> = ta
        .locations
        .iter()
        .enumerate()
        .map(|(i, l)| (l.as_str(), i))
        .collect();
    let n = ta.locations.len();
    let mut indegree = vec![0usize; n];
    let mut succs: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); n];
    for r in &ta.rules {
        let (Some(&from), Some(&to)) = (index.get(r.from.as_str()), index.get(r.to.as_str()))
        else {
            // Dangling endpoints are a validation issue, not a cycle.
            continue;
        };
        if succs[from].insert(to) {
            indegree[to] += 1;
        }
    }
    // Kahn's algorithm; a self-loop keeps its own indegree positive.
    let mut queue: Vec<usize> = (0..n).filter(|&i| indegree[i] == 0).collect();
    let mut removed = 0;
    while let Some(v) = queue.pop() {
        removed += 1;
        for &w in &succs[v] {
            indegree[w] -= 1;
            if indegree[w] == 0 {
                queue.push(w);
            }
        }
    }
    removed == n
}

/// A structural defect reported by [`validate`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Diagnostic {
    EmptyInitialSet,
    DuplicateName {
        kind: &'static str,
        name: String,
    },
    UnknownLocation {
        context: String,
        name: String,
    },
    UnknownShared {
        context: String,
        name: String,
    },
    UnknownParameter {
        context: String,
        name: String,
    },
    UpdateNotBoolean {
        rule: String,
        var: String,
        value: i64,
    },
    NonPositiveFactor {
        rule: String,
        value: i64,
    },
    IndeterminateNameClash {
        name: String,
    },
    SizeNegative {
        p: Valuation,
        size: i64,
    },
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Diagnostic::EmptyInitialSet => write!(f, "initial location set is empty"),
            Diagnostic::DuplicateName { kind, name } => {
                write!(f, "duplicate {kind} name `{name}`")
            }
            Diagnostic::UnknownLocation { context, name } => {
                write!(f, "{context}: unknown location `{name}`")
            }
            Diagnostic::UnknownShared { context, name } => {
                write!(f, "{context}: unknown shared variable `{name}`")
            }
            Diagnostic::UnknownParameter { context, name } => {
                write!(f, "{context}: unknown parameter `{name}`")
            }
            Diagnostic::UpdateNotBoolean { rule, var, value } => {
                write!(
                    f,
                    "rule `{rule}`: update of `{var}` is {value}, expected 0 or 1"
                )
            }
            Diagnostic::NonPositiveFactor { rule, value } => {
                write!(f, "rule `{rule}`: guard factor {value} is not positive")
            }
            Diagnostic::IndeterminateNameClash { name } => {
                write!(
                    f,
                    "indeterminate `{name}` clashes with a parameter or shared variable"
                )
            }
            Diagnostic::SizeNegative { p, size } => {
                let vals: Vec<String> = p.iter().map(|(k, v)| format!("{k}={v}")).collect();
                write!(f, "size function is {size} < 0 at {}", vals.join(" "))
            }
        }
    }
}

fn duplicates<'a>(names: impl Iterator<Item = &'a str>) -> Vec<String> {
    let mut seen = BTreeSet::new();
    let mut dups = Vec::new();
    for n in names {
        if !seen.insert(n) {
            dups.push(n.to_string());
        }
    }
    dups
}

/// Reports every structural invariant violation; an empty list means the
/// automaton is well-formed.
pub fn validate(ta: &ThresholdAutomaton) -> Vec<Diagnostic> {
    let mut out = Vec::new();
    for name in duplicates(ta.env.params.iter().map(|s| s.as_str())) {
        out.push(Diagnostic::DuplicateName {
            kind: "parameter",
            name,
        });
    }
    for name in duplicates(ta.locations.iter().map(|s| s.as_str())) {
        out.push(Diagnostic::DuplicateName {
            kind: "location",
            name,
        });
    }
    for name in duplicates(ta.shared.iter().map(|s| s.as_str())) {
        out.push(Diagnostic::DuplicateName {
            kind: "shared variable",
            name,
        });
    }
    for name in duplicates(ta.rules.iter().map(|r| r.id.as_str())) {
        out.push(Diagnostic::DuplicateName { kind: "rule", name });
    }

    let locations: BTreeSet<&str> = ta.locations.iter().map(|s| s.as_str()).collect();
    let shared: BTreeSet<&str> = ta.shared.iter().map(|s| s.as_str()).collect();
    let params: BTreeSet<&str> = ta.env.params.iter().map(|s| s.as_str()).collect();

    if ta.initial.is_empty() {
        out.push(Diagnostic::EmptyInitialSet);
    }
    for l in &ta.initial {
        if !locations.contains(l.as_str()) {
            out.push(Diagnostic::UnknownLocation {
                context: "initial set".into(),
                name: l.clone(),
            });
        }
    }

    let check_expr = |context: String, expr: &LinearExpr, out: &mut Vec<Diagnostic>| {
        for name in expr.names() {
            if !params.contains(name) {
                out.push(Diagnostic::UnknownParameter {
                    context: context.clone(),
                    name: name.to_string(),
                });
            }
        }
    };
    for (i, c) in ta.env.resilience.iter().enumerate() {
        check_expr(format!("resilience constraint {i}"), &c.lhs, &mut out);
        check_expr(format!("resilience constraint {i}"), &c.rhs, &mut out);
    }
    check_expr("size function".into(), &ta.env.size_fn, &mut out);

    for r in &ta.rules {
        for (endpoint, name) in [("source", &r.from), ("target", &r.to)] {
            if !locations.contains(name.as_str()) {
                out.push(Diagnostic::UnknownLocation {
                    context: format!("rule `{}` {endpoint}", r.id),
                    name: name.clone(),
                });
            }
        }
        for guard in &r.guards {
            if !shared.contains(guard.var.as_str()) {
                out.push(Diagnostic::UnknownShared {
                    context: format!("rule `{}` guard", r.id),
                    name: guard.var.clone(),
                });
            }
            if guard.factor <= 0 {
                out.push(Diagnostic::NonPositiveFactor {
                    rule: r.id.clone(),
                    value: guard.factor,
                });
            }
            check_expr(format!("rule `{}` guard", r.id), &guard.rhs, &mut out);
        }
        for (var, value) in &r.update {
            if !shared.contains(var.as_str()) {
                out.push(Diagnostic::UnknownShared {
                    context: format!("rule `{}` update", r.id),
                    name: var.clone(),
                });
            }
            if *value != 0 && *value != 1 {
                out.push(Diagnostic::UpdateNotBoolean {
                    rule: r.id.clone(),
                    var: var.clone(),
                    value: *value,
                });
            }
        }
    }
    out
}
