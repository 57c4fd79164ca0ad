//! Line-oriented textual format for (sketch) threshold automata.
//!
//! ```text
//! # comments run to the end of the line
//! env param n t f
//! env resilience n >= 3*t + 1
//! env resilience t >= f
//! env size n - f
//! indet a
//! locations l0 l2 l3
//! initial l0
//! shared x
//! rule r2 l0 -> l2 when x >= a + t - f inc x
//! rule r3 l2 -> l3 when x >= n - t - f
//! ```
//!
//! A guard is `factor*var ⋈ rhs` with `⋈` one of `>=`, `<`, `=`; the
//! factor may be omitted when it is 1. Equality guards are desugared into
//! a `>=`/`<` pair while parsing, so printed documents only ever contain
//! `>=` and `<`. Printing is canonical: parsing a printed document yields
//! the same automaton, byte for byte, when printed again.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use thiserror::Error;

use tasynth_core::sketch::{
    collect_indeterminates, validate_sketch, AffineCoeff, SketchAutomaton, SketchGuard, SketchRule,
};
use tasynth_core::ta::{ConstraintOp, Environment, GuardOp, LinearConstraint, LinearExpr};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("line {line}: {message}")]
pub struct FormatError {
    /// 1-based source line; 0 for document-level issues.
    pub line: usize,
    pub message: String,
}

// ---------------------------------------------------------------------
// Printing

struct Terms {
    out: String,
}

impl Terms {
    fn new() -> Self {
        Terms { out: String::new() }
    }

    fn push(&mut self, negative: bool, body: &str) {
        if self.out.is_empty() {
            if negative {
                self.out.push('-');
            }
        } else if negative {
            self.out.push_str(" - ");
        } else {
            self.out.push_str(" + ");
        }
        self.out.push_str(body);
    }

    fn finish(self) -> String {
        if self.out.is_empty() {
            "0".into()
        } else {
            self.out
        }
    }
}

fn push_scaled(terms: &mut Terms, coeff: i64, name: &str) {
    if coeff == 0 {
        return;
    }
    let mag = coeff.unsigned_abs();
    let body = if mag == 1 {
        name.to_string()
    } else {
        format!("{mag}*{name}")
    };
    terms.push(coeff < 0, &body);
}

fn fmt_linexpr(expr: &LinearExpr, params: &[String]) -> String {
    let mut terms = Terms::new();
    for p in params {
        if let Some(&c) = expr.coeffs.get(p) {
            push_scaled(&mut terms, c, p);
        }
    }
    if expr.const_term != 0 {
        terms.push(expr.const_term < 0, &expr.const_term.abs().to_string());
    }
    terms.finish()
}

fn affine_is_zero(c: &AffineCoeff) -> bool {
    c.const_term == 0 && c.terms().is_empty()
}

/// A parameter's coefficient as a signed term body, e.g. `s1*d_A`,
/// `2*d_A`, `(s1 + 1)*d_A`.
fn push_param_term(terms: &mut Terms, coeff: &AffineCoeff, param: &str) {
    if affine_is_zero(coeff) {
        return;
    }
    match (coeff.const_term, coeff.terms()) {
        (k, []) => push_scaled(terms, k, param),
        (0, [(s, c)]) => {
            let mag = c.unsigned_abs();
            let body = if mag == 1 {
                format!("{s}*{param}")
            } else {
                format!("{mag}*{s}*{param}")
            };
            terms.push(*c < 0, &body);
        }
        _ => terms.push(false, &format!("({coeff})*{param}")),
    }
}

fn fmt_guard_rhs(guard: &SketchGuard, params: &[String]) -> String {
    let mut terms = Terms::new();
    for (s, c) in guard.rhs_const.terms() {
        push_scaled(&mut terms, *c, s);
    }
    for p in params {
        if let Some(coeff) = guard.rhs_param_coeffs.get(p) {
            push_param_term(&mut terms, coeff, p);
        }
    }
    if guard.rhs_const.const_term != 0 {
        terms.push(
            guard.rhs_const.const_term < 0,
            &guard.rhs_const.const_term.abs().to_string(),
        );
    }
    terms.finish()
}

fn fmt_guard_lhs(guard: &SketchGuard) -> String {
    let factor = &guard.factor;
    match (factor.const_term, factor.terms()) {
        (1, []) => guard.var.clone(),
        (k, []) => format!("{k}*{}", guard.var),
        (0, [(s, 1)]) => format!("{s}*{}", guard.var),
        _ => format!("({factor})*{}", guard.var),
    }
}

fn fmt_guard(guard: &SketchGuard, params: &[String]) -> String {
    format!(
        "{} {} {}",
        fmt_guard_lhs(guard),
        guard.cmp,
        fmt_guard_rhs(guard, params)
    )
}

/// Canonical textual form of a sketch automaton. An automaton without
/// indeterminates prints without an `indet` section. Assumes the sketch
/// names are well-formed (see [`validate_sketch`]).
pub fn print_sketch(sketch: &SketchAutomaton) -> String {
    let mut out = String::new();
    let params = &sketch.env.params;
    if !params.is_empty() {
        out.push_str(&format!("env param {}\n", params.join(" ")));
    }
    for c in &sketch.env.resilience {
        out.push_str(&format!(
            "env resilience {} {} {}\n",
            fmt_linexpr(&c.lhs, params),
            c.cmp,
            fmt_linexpr(&c.rhs, params)
        ));
    }
    out.push_str(&format!(
        "env size {}\n",
        fmt_linexpr(&sketch.env.size_fn, params)
    ));
    let indets = collect_indeterminates(sketch);
    if !indets.is_empty() {
        out.push_str(&format!("indet {}\n", indets.join(" ")));
    }
    out.push_str(&format!("locations {}\n", sketch.locations.join(" ")));
    out.push_str(&format!("initial {}\n", sketch.initial.join(" ")));
    if !sketch.shared.is_empty() {
        out.push_str(&format!("shared {}\n", sketch.shared.join(" ")));
    }
    for rule in &sketch.rules {
        let guards = if rule.guards.is_empty() {
            "true".to_string()
        } else {
            rule.guards
                .iter()
                .map(|g| fmt_guard(g, params))
                .collect::<Vec<_>>()
                .join(" and ")
        };
        out.push_str(&format!(
            "rule {} {} -> {} when {}",
            rule.id, rule.from, rule.to, guards
        ));
        let incs: Vec<&str> = sketch
            .shared
            .iter()
            .filter(|x| rule.update.get(*x).copied().unwrap_or(0) != 0)
            .map(|x| x.as_str())
            .collect();
        if !incs.is_empty() {
            out.push_str(&format!(" inc {}", incs.join(" ")));
        }
        out.push('\n');
    }
    out
}

// ---------------------------------------------------------------------
// Lexing

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Ident(String),
    Int(i64),
    Plus,
    Minus,
    Star,
    LParen,
    RParen,
    Ge,
    Lt,
    Eq,
    Arrow,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Ident(s) => write!(f, "{s}"),
            Tok::Int(v) => write!(f, "{v}"),
            Tok::Plus => write!(f, "+"),
            Tok::Minus => write!(f, "-"),
            Tok::Star => write!(f, "*"),
            Tok::LParen => write!(f, "("),
            Tok::RParen => write!(f, ")"),
            Tok::Ge => write!(f, ">="),
            Tok::Lt => write!(f, "<"),
            Tok::Eq => write!(f, "="),
            Tok::Arrow => write!(f, "->"),
        }
    }
}

fn lex(line: &str) -> Result<Vec<Tok>, String> {
    let bytes = line.as_bytes();
    let mut toks = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i] as char;
        match c {
            '#' => break,
            c if c.is_whitespace() => i += 1,
            c if c.is_ascii_alphabetic() || c == '_' => {
                let start = i;
                while i < bytes.len()
                    && ((bytes[i] as char).is_ascii_alphanumeric() || bytes[i] == b'_')
                {
                    i += 1;
                }
                toks.push(Tok::Ident(line[start..i].to_string()));
            }
            c if c.is_ascii_digit() => {
                let start = i;
                while i < bytes.len() && (bytes[i] as char).is_ascii_digit() {
                    i += 1;
                }
                let v = line[start..i]
                    .parse::<i64>()
                    .map_err(|_| format!("integer literal `{}` out of range", &line[start..i]))?;
                toks.push(Tok::Int(v));
            }
            '+' => {
                toks.push(Tok::Plus);
                i += 1;
            }
            '-' => {
                if bytes.get(i + 1) == Some(&b'>') {
                    toks.push(Tok::Arrow);
                    i += 2;
                } else {
                    toks.push(Tok::Minus);
                    i += 1;
                }
            }
            '*' => {
                toks.push(Tok::Star);
                i += 1;
            }
            '(' => {
                toks.push(Tok::LParen);
                i += 1;
            }
            ')' => {
                toks.push(Tok::RParen);
                i += 1;
            }
            '>' => {
                if bytes.get(i + 1) == Some(&b'=') {
                    toks.push(Tok::Ge);
                    i += 2;
                } else {
                    return Err("expected `>=`".into());
                }
            }
            '<' => {
                toks.push(Tok::Lt);
                i += 1;
            }
            '=' => {
                toks.push(Tok::Eq);
                i += 1;
            }
            other => return Err(format!("unexpected character `{other}`")),
        }
    }
    Ok(toks)
}

// ---------------------------------------------------------------------
// Expression values: affine in the indeterminates, linear in the
// parameters with affine-in-indeterminate coefficients.

#[derive(Debug, Clone, Default)]
struct Value {
    aff: AffineCoeff,
    par: BTreeMap<String, AffineCoeff>,
}

impl Value {
    fn constant(c: i64) -> Self {
        Value {
            aff: AffineCoeff::constant(c),
            ..Default::default()
        }
    }

    fn add(mut self, other: Value) -> Result<Value, String> {
        self.aff = self
            .aff
            .checked_add(&other.aff)
            .map_err(|e| e.to_string())?;
        for (p, c) in other.par {
            let slot = self.par.remove(&p).unwrap_or_default();
            let sum = slot.checked_add(&c).map_err(|e| e.to_string())?;
            if !affine_is_zero(&sum) {
                self.par.insert(p, sum);
            }
        }
        Ok(self)
    }

    fn negate(self) -> Result<Value, String> {
        self.scale(&AffineCoeff::constant(-1))
    }

    fn scale(mut self, k: &AffineCoeff) -> Result<Value, String> {
        let scale_coeff = |c: &AffineCoeff| -> Result<AffineCoeff, String> {
            c.multiply(k)
                .ok_or_else(|| "guard expression is not affine in the indeterminates".to_string())?
                .map_err(|e| e.to_string())
        };
        self.aff = scale_coeff(&self.aff)?;
        let mut par = BTreeMap::new();
        for (p, c) in &self.par {
            let scaled = scale_coeff(c)?;
            if !affine_is_zero(&scaled) {
                par.insert(p.clone(), scaled);
            }
        }
        self.par = par;
        Ok(self)
    }

    fn multiply(self, other: Value) -> Result<Value, String> {
        match (self.par.is_empty(), other.par.is_empty()) {
            (_, true) => self.scale(&other.aff),
            (true, _) => other.scale(&self.aff),
            (false, false) => Err("guard expression multiplies two parameter-bearing terms".into()),
        }
    }

    fn into_linear_expr(self) -> Result<LinearExpr, String> {
        if !self.aff.terms().is_empty() {
            return Err("indeterminates are not allowed in this expression".into());
        }
        let mut expr = LinearExpr::constant(self.aff.const_term);
        for (p, c) in self.par {
            if !c.terms().is_empty() {
                return Err("indeterminates are not allowed in this expression".into());
            }
            expr = expr.add_term(p, c.const_term);
        }
        Ok(expr)
    }
}

struct ExprParser<'a> {
    toks: &'a [Tok],
    pos: usize,
    params: &'a BTreeSet<String>,
    indets: &'a BTreeSet<String>,
}

impl<'a> ExprParser<'a> {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos)
    }

    fn bump(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.pos).cloned();
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    fn parse_expr(&mut self) -> Result<Value, String> {
        let mut negate = false;
        if matches!(self.peek(), Some(Tok::Minus)) {
            self.pos += 1;
            negate = true;
        }
        let mut acc = self.parse_term()?;
        if negate {
            acc = acc.negate()?;
        }
        loop {
            match self.peek() {
                Some(Tok::Plus) => {
                    self.pos += 1;
                    let term = self.parse_term()?;
                    acc = acc.add(term)?;
                }
                Some(Tok::Minus) => {
                    self.pos += 1;
                    let term = self.parse_term()?.negate()?;
                    acc = acc.add(term)?;
                }
                _ => return Ok(acc),
            }
        }
    }

    fn parse_term(&mut self) -> Result<Value, String> {
        let mut acc = self.parse_factor()?;
        while matches!(self.peek(), Some(Tok::Star)) {
            self.pos += 1;
            let factor = self.parse_factor()?;
            acc = acc.multiply(factor)?;
        }
        Ok(acc)
    }

    fn parse_factor(&mut self) -> Result<Value, String> {
        match self.bump() {
            Some(Tok::Int(v)) => Ok(Value::constant(v)),
            Some(Tok::Ident(name)) => {
                if self.params.contains(&name) {
                    Ok(Value {
                        aff: AffineCoeff::constant(0),
                        par: [(name, AffineCoeff::constant(1))].into(),
                    })
                } else if self.indets.contains(&name) {
                    Ok(Value {
                        aff: AffineCoeff::indet(name),
                        par: BTreeMap::new(),
                    })
                } else {
                    Err(format!(
                        "unknown name `{name}` (not a parameter or indeterminate)"
                    ))
                }
            }
            Some(Tok::LParen) => {
                let inner = self.parse_expr()?;
                match self.bump() {
                    Some(Tok::RParen) => Ok(inner),
                    _ => Err("expected `)`".into()),
                }
            }
            other => Err(match other {
                Some(t) => format!("unexpected token `{t}` in expression"),
                None => "unexpected end of expression".into(),
            }),
        }
    }

    fn expect_end(&self) -> Result<(), String> {
        match self.peek() {
            None => Ok(()),
            Some(t) => Err(format!("unexpected trailing `{t}`")),
        }
    }
}

fn parse_value(
    toks: &[Tok],
    params: &BTreeSet<String>,
    indets: &BTreeSet<String>,
) -> Result<Value, String> {
    let mut parser = ExprParser {
        toks,
        pos: 0,
        params,
        indets,
    };
    let value = parser.parse_expr()?;
    parser.expect_end()?;
    Ok(value)
}

// ---------------------------------------------------------------------
// Document parsing

fn idents(toks: &[Tok]) -> Result<Vec<String>, String> {
    toks.iter()
        .map(|t| match t {
            Tok::Ident(s) => Ok(s.clone()),
            other => Err(format!("expected a name, found `{other}`")),
        })
        .collect()
}

fn split_at_cmp(toks: &[Tok]) -> Option<(&[Tok], &Tok, &[Tok])> {
    let pos = toks
        .iter()
        .position(|t| matches!(t, Tok::Ge | Tok::Lt | Tok::Eq))?;
    Some((&toks[..pos], &toks[pos], &toks[pos + 1..]))
}

/// One or two sketch guards for `lhs ⋈ rhs`; `=` becomes a `>=`/`<` pair.
fn build_guards(
    lhs: &[Tok],
    cmp: &Tok,
    rhs: &[Tok],
    params: &BTreeSet<String>,
    indets: &BTreeSet<String>,
    shared: &BTreeSet<String>,
) -> Result<Vec<SketchGuard>, String> {
    let (factor, var) = match lhs {
        [Tok::Ident(var)] => (AffineCoeff::constant(1), var.clone()),
        [factor @ .., Tok::Star, Tok::Ident(var)] => {
            let value = parse_value(factor, params, indets)?;
            if !value.par.is_empty() {
                return Err("a guard factor cannot mention parameters".into());
            }
            (value.aff, var.clone())
        }
        _ => return Err("guard left side must be `var` or `factor*var`".into()),
    };
    if !shared.contains(&var) {
        return Err(format!("`{var}` is not a shared variable"));
    }
    let rhs_value = parse_value(rhs, params, indets)?;

    let make = |cmp: GuardOp, bump: i64| {
        let mut guard = SketchGuard::new(var.clone(), cmp)
            .with_factor(factor.clone())
            .with_const(rhs_value.aff.clone().add_const(bump));
        for (p, c) in &rhs_value.par {
            guard = guard.with_param(p.clone(), c.clone());
        }
        guard
    };
    Ok(match cmp {
        Tok::Ge => vec![make(GuardOp::Ge, 0)],
        Tok::Lt => vec![make(GuardOp::Lt, 0)],
        Tok::Eq => vec![make(GuardOp::Ge, 0), make(GuardOp::Lt, 1)],
        _ => unreachable!("split_at_cmp only returns comparison tokens"),
    })
}

/// Parses a document into a sketch automaton, rejecting both syntax
/// errors and validation diagnostics.
pub fn parse_ta(text: &str) -> Result<SketchAutomaton, Vec<FormatError>> {
    let (sketch, diagnostics) = parse_document(text)?;
    if diagnostics.is_empty() {
        Ok(sketch)
    } else {
        Err(diagnostics)
    }
}

/// Parses a document into a sketch automaton. All declarations are
/// gathered first, so sections may appear in any order; the declaration
/// order within each section is preserved. Unparseable documents are an
/// error; structural defects of a parseable document are returned as
/// diagnostics alongside the automaton.
pub fn parse_document(text: &str) -> Result<(SketchAutomaton, Vec<FormatError>), Vec<FormatError>> {
    let mut errors = Vec::new();
    let mut params: Vec<String> = Vec::new();
    let mut indet_names: Vec<String> = Vec::new();
    let mut locations: Vec<String> = Vec::new();
    let mut initial: Vec<String> = Vec::new();
    let mut shared: Vec<String> = Vec::new();
    // (line number, tokens) of lines needing declared names.
    let mut resilience_lines = Vec::new();
    let mut size_lines = Vec::new();
    let mut rule_lines = Vec::new();

    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let toks = match lex(raw) {
            Ok(toks) => toks,
            Err(message) => {
                errors.push(FormatError { line, message });
                continue;
            }
        };
        if toks.is_empty() {
            continue;
        }
        let mut fail = |message: String| errors.push(FormatError { line, message });
        match &toks[0] {
            Tok::Ident(head) if head == "env" => match toks.get(1) {
                Some(Tok::Ident(kind)) if kind == "param" => match idents(&toks[2..]) {
                    Ok(names) => params.extend(names),
                    Err(message) => fail(message),
                },
                Some(Tok::Ident(kind)) if kind == "resilience" => {
                    resilience_lines.push((line, toks[2..].to_vec()));
                }
                Some(Tok::Ident(kind)) if kind == "size" => {
                    size_lines.push((line, toks[2..].to_vec()));
                }
                _ => fail("expected `env param`, `env resilience` or `env size`".into()),
            },
            Tok::Ident(head) if head == "indet" => match idents(&toks[1..]) {
                Ok(names) => indet_names.extend(names),
                Err(message) => fail(message),
            },
            Tok::Ident(head) if head == "locations" => match idents(&toks[1..]) {
                Ok(names) => locations.extend(names),
                Err(message) => fail(message),
            },
            Tok::Ident(head) if head == "initial" => match idents(&toks[1..]) {
                Ok(names) => initial.extend(names),
                Err(message) => fail(message),
            },
            Tok::Ident(head) if head == "shared" => match idents(&toks[1..]) {
                Ok(names) => shared.extend(names),
                Err(message) => fail(message),
            },
            Tok::Ident(head) if head == "rule" => rule_lines.push((line, toks[1..].to_vec())),
            other => fail(format!("unknown section `{other}`")),
        }
    }

    let param_set: BTreeSet<String> = params.iter().cloned().collect();
    let indet_set: BTreeSet<String> = indet_names.iter().cloned().collect();
    let shared_set: BTreeSet<String> = shared.iter().cloned().collect();
    let no_indets = BTreeSet::new();

    let mut resilience = Vec::new();
    for (line, toks) in resilience_lines {
        let result = (|| -> Result<LinearConstraint, String> {
            let (lhs, cmp, rhs) =
                split_at_cmp(&toks).ok_or("expected a comparison in the constraint")?;
            let cmp = match cmp {
                Tok::Ge => ConstraintOp::Ge,
                Tok::Lt => ConstraintOp::Lt,
                Tok::Eq => ConstraintOp::Eq,
                _ => unreachable!(),
            };
            let lhs = parse_value(lhs, &param_set, &no_indets)?.into_linear_expr()?;
            let rhs = parse_value(rhs, &param_set, &no_indets)?.into_linear_expr()?;
            Ok(LinearConstraint::new(lhs, cmp, rhs))
        })();
        match result {
            Ok(c) => resilience.push(c),
            Err(message) => errors.push(FormatError { line, message }),
        }
    }

    let mut size_fn = LinearExpr::constant(0);
    if size_lines.is_empty() {
        errors.push(FormatError {
            line: 0,
            message: "missing `env size` declaration".into(),
        });
    }
    for (line, toks) in size_lines {
        match parse_value(&toks, &param_set, &no_indets).and_then(Value::into_linear_expr) {
            Ok(expr) => size_fn = expr,
            Err(message) => errors.push(FormatError { line, message }),
        }
    }

    let mut rules = Vec::new();
    for (line, toks) in rule_lines {
        let result = (|| -> Result<SketchRule, String> {
            let [Tok::Ident(id), Tok::Ident(from), Tok::Arrow, Tok::Ident(to), Tok::Ident(when), rest @ ..] =
                &toks[..]
            else {
                return Err("expected `rule <id> <from> -> <to> when ...`".into());
            };
            if when != "when" {
                return Err(format!("expected `when`, found `{when}`"));
            }
            let (guard_toks, inc_names) = match rest
                .iter()
                .position(|t| matches!(t, Tok::Ident(s) if s == "inc"))
            {
                Some(pos) => (&rest[..pos], idents(&rest[pos + 1..])?),
                None => (rest, Vec::new()),
            };
            let mut rule = SketchRule::new(id.clone(), from.clone(), to.clone());
            match guard_toks {
                [Tok::Ident(t)] if t == "true" => {}
                _ => {
                    // Split the conjunction on `and`.
                    let mut begin = 0;
                    let mut parts = Vec::new();
                    for (i, t) in guard_toks.iter().enumerate() {
                        if matches!(t, Tok::Ident(s) if s == "and") {
                            parts.push(&guard_toks[begin..i]);
                            begin = i + 1;
                        }
                    }
                    parts.push(&guard_toks[begin..]);
                    for part in parts {
                        let (lhs, cmp, rhs) =
                            split_at_cmp(part).ok_or("expected a comparison in the guard")?;
                        rule.guards.extend(build_guards(
                            lhs,
                            cmp,
                            rhs,
                            &param_set,
                            &indet_set,
                            &shared_set,
                        )?);
                    }
                }
            }
            for name in inc_names {
                if !shared_set.contains(&name) {
                    return Err(format!("`{name}` is not a shared variable"));
                }
                rule.update.insert(name, 1);
            }
            Ok(rule)
        })();
        match result {
            Ok(rule) => rules.push(rule),
            Err(message) => errors.push(FormatError { line, message }),
        }
    }

    let sketch = SketchAutomaton {
        env: Environment {
            params,
            resilience,
            size_fn,
        },
        locations,
        initial,
        shared,
        rules,
    };
    if !errors.is_empty() {
        return Err(errors);
    }
    let diagnostics = validate_sketch(&sketch)
        .into_iter()
        .map(|diagnostic| FormatError {
            line: 0,
            message: diagnostic.to_string(),
        })
        .collect();
    Ok((sketch, diagnostics))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models;
    use tasynth_core::sketch::{eval_affine, instantiate, Assignment};
    use tasynth_core::ta::eval_guard;

    #[test]
    fn models_round_trip_structurally() {
        for name in models::MODEL_NAMES {
            let sketch = models::builtin_model(name).unwrap();
            let printed = print_sketch(&sketch);
            let reparsed = parse_ta(&printed).unwrap_or_else(|e| panic!("{name}: {e:?}"));
            assert_eq!(reparsed, sketch, "{name}");
            assert_eq!(print_sketch(&reparsed), printed, "{name}");
        }
    }

    #[test]
    fn parses_the_broadcast_document() {
        let text = "\
# broadcast protocol body
env param n t f
env resilience n >= 3*t + 1
env resilience t >= f
env size n - f
locations l0 l1 l2 l3
initial l0 l1
shared x
rule r1 l1 -> l2 when true inc x
rule r2 l0 -> l2 when x >= t - f + 1 inc x
rule r3 l2 -> l3 when x >= n - t - f
";
        let sketch = parse_ta(text).unwrap();
        assert_eq!(sketch, models::builtin_model("st87").unwrap());
    }

    #[test]
    fn missing_initial_is_a_positioned_diagnostic() {
        let text = "env size 0\nlocations l0\nshared x\n";
        let errors = parse_ta(text).unwrap_err();
        assert!(errors
            .iter()
            .any(|e| e.message.contains("initial location set is empty")));
    }

    #[test]
    fn equality_guards_desugar_into_pairs() {
        let text = "\
env param t1 z
env size z
locations a b
initial a
shared v
rule r a -> b when v = t1 + 1
";
        let sketch = parse_ta(text).unwrap();
        let guards = &sketch.rules[0].guards;
        assert_eq!(guards.len(), 2);
        assert_eq!(guards[0].cmp, GuardOp::Ge);
        assert_eq!(guards[1].cmp, GuardOp::Lt);
        assert_eq!(guards[1].rhs_const, AffineCoeff::constant(2));

        // Semantics: the pair behaves like equality.
        let ta = instantiate(&sketch, &Assignment::empty()).unwrap();
        let p = [("t1".to_string(), 2i64), ("z".to_string(), 1)].into();
        for v in 0..=5i64 {
            let g = [("v".to_string(), v)].into();
            let both = ta.rules[0]
                .guards
                .iter()
                .all(|guard| eval_guard(guard, &g, &p).unwrap());
            assert_eq!(both, v == 3);
        }
    }

    #[test]
    fn indeterminate_factors_parse() {
        let text = "\
env param z
env size z
indet b a
locations a0 a1
initial a0
shared x
rule r a0 -> a1 when b*x >= a + 1
";
        let sketch = parse_ta(text).unwrap();
        let guard = &sketch.rules[0].guards[0];
        assert_eq!(guard.factor, AffineCoeff::indet("b"));
        assert_eq!(
            eval_affine(&guard.rhs_const, &Assignment::of(&[("a", 2), ("b", 1)])).unwrap(),
            3
        );
        // Round trip keeps the factor.
        let printed = print_sketch(&sketch);
        assert_eq!(parse_ta(&printed).unwrap(), sketch);
    }

    #[test]
    fn nonlinear_guards_are_rejected() {
        let text = "\
env param p q
env size p
locations a b
initial a
shared x
rule r a -> b when x >= p*q
";
        let errors = parse_ta(text).unwrap_err();
        assert!(errors[0]
            .message
            .contains("multiplies two parameter-bearing"));
    }

    #[test]
    fn lex_errors_carry_line_numbers() {
        let text = "env size 0\nlocations l0\ninitial l0\nrule r l0 -> l0 when x ? 1\n";
        let errors = parse_ta(text).unwrap_err();
        assert!(errors.iter().any(|e| e.line == 4));
    }
}
