//! Recursive-descent parser for the formula grammar.
//!
//! ```text
//! formula  := ["forall" xvar+] ["exists" yvar*] ":" disjunct ("or" disjunct)*
//! disjunct := "(" atom ("and" atom)* ")"
//! atom     := poly cmp poly | xvar "|" yvar
//! cmp      := "<" | "<=" | "=" | ">" | ">=" | "!="
//! poly     := term ("+" term)* ; term := nat | nat "*" var | var
//! ```
//!
//! `!=` is desugared by splitting the enclosing disjunct into a `<` copy
//! and a `>` copy; the stored formula uses only the five ordered
//! comparisons.

use std::collections::BTreeMap;

use super::{CompareAtom, CompareOp, Disjunct, LinearPoly, PadError, PadFormula};

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Ident(String),
    Int(i64),
    Colon,
    LParen,
    RParen,
    Pipe,
    Plus,
    Star,
    Lt,
    Le,
    Eq,
    Gt,
    Ge,
    Ne,
}

fn lex(text: &str) -> Result<Vec<(usize, Tok)>, PadError> {
    let bytes = text.as_bytes();
    let mut toks = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i] as char;
        let start = i;
        match c {
            c if c.is_whitespace() => {
                i += 1;
            }
            c if c.is_ascii_alphabetic() || c == '_' => {
                while i < bytes.len()
                    && ((bytes[i] as char).is_ascii_alphanumeric()
                        || bytes[i] == b'_'
                        || bytes[i] == b'\'')
                {
                    i += 1;
                }
                toks.push((start, Tok::Ident(text[start..i].to_string())));
            }
            c if c.is_ascii_digit() => {
                while i < bytes.len() && (bytes[i] as char).is_ascii_digit() {
                    i += 1;
                }
                let value = text[start..i]
                    .parse::<i64>()
                    .map_err(|_| PadError::Syntax {
                        pos: start,
                        msg: "integer literal out of range".into(),
                    })?;
                toks.push((start, Tok::Int(value)));
            }
            ':' => {
                toks.push((start, Tok::Colon));
                i += 1;
            }
            '(' => {
                toks.push((start, Tok::LParen));
                i += 1;
            }
            ')' => {
                toks.push((start, Tok::RParen));
                i += 1;
            }
            '|' => {
                toks.push((start, Tok::Pipe));
                i += 1;
            }
            '+' => {
                toks.push((start, Tok::Plus));
                i += 1;
            }
            '*' => {
                toks.push((start, Tok::Star));
                i += 1;
            }
            '<' => {
                if bytes.get(i + 1) == Some(&b'=') {
                    toks.push((start, Tok::Le));
                    i += 2;
                } else {
                    toks.push((start, Tok::Lt));
                    i += 1;
                }
            }
            '>' => {
                if bytes.get(i + 1) == Some(&b'=') {
                    toks.push((start, Tok::Ge));
                    i += 2;
                } else {
                    toks.push((start, Tok::Gt));
                    i += 1;
                }
            }
            '=' => {
                toks.push((start, Tok::Eq));
                i += 1;
            }
            '!' => {
                if bytes.get(i + 1) == Some(&b'=') {
                    toks.push((start, Tok::Ne));
                    i += 2;
                } else {
                    return Err(PadError::Syntax {
                        pos: start,
                        msg: "expected `!=`".into(),
                    });
                }
            }
            other => {
                return Err(PadError::Syntax {
                    pos: start,
                    msg: format!("unexpected character `{other}`"),
                });
            }
        }
    }
    Ok(toks)
}

#[derive(Debug, Clone, Copy)]
enum VarRef {
    Universal(usize),
    Existential(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum RawOp {
    Lt,
    Le,
    Eq,
    Gt,
    Ge,
    Ne,
}

struct RawDisjunct {
    div_atoms: Vec<(usize, usize)>,
    cmp_atoms: Vec<(LinearPoly, RawOp, LinearPoly)>,
}

struct Parser {
    toks: Vec<(usize, Tok)>,
    pos: usize,
    end: usize,
    vars: BTreeMap<String, VarRef>,
    n: usize,
    m: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(_, t)| t)
    }

    fn offset(&self) -> usize {
        self.toks.get(self.pos).map(|(o, _)| *o).unwrap_or(self.end)
    }

    fn bump(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.pos).map(|(_, t)| t.clone());
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    fn syntax(&self, msg: impl Into<String>) -> PadError {
        PadError::Syntax {
            pos: self.offset(),
            msg: msg.into(),
        }
    }

    fn fragment(&self, msg: impl Into<String>) -> PadError {
        PadError::FragmentViolation {
            pos: self.offset(),
            msg: msg.into(),
        }
    }

    fn eat_keyword(&mut self, kw: &str) -> bool {
        if matches!(self.peek(), Some(Tok::Ident(s)) if s == kw) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn declare(&mut self, universal: bool) -> Result<(), PadError> {
        while let Some(Tok::Ident(name)) = self.peek() {
            if name == "exists" || name == "or" || name == "and" {
                break;
            }
            let name = name.clone();
            if self.vars.contains_key(&name) {
                return Err(self.syntax(format!("variable `{name}` declared twice")));
            }
            let var = if universal {
                self.n += 1;
                VarRef::Universal(self.n)
            } else {
                self.m += 1;
                VarRef::Existential(self.m)
            };
            self.vars.insert(name, var);
            self.pos += 1;
        }
        Ok(())
    }

    fn lookup(&self, name: &str) -> Result<VarRef, PadError> {
        self.vars
            .get(name)
            .copied()
            .ok_or_else(|| self.syntax(format!("unknown variable `{name}`")))
    }

    fn parse_poly(&mut self) -> Result<LinearPoly, PadError> {
        let mut poly = LinearPoly::default();
        loop {
            let at = self.offset();
            match self.bump() {
                Some(Tok::Int(value)) => {
                    if matches!(self.peek(), Some(Tok::Star)) {
                        self.pos += 1;
                        let Some(Tok::Ident(name)) = self.bump() else {
                            return Err(self.syntax("expected a variable after `*`"));
                        };
                        match self.lookup(&name)? {
                            VarRef::Universal(i) => poly = poly.add_x(i, value),
                            VarRef::Existential(j) => poly = poly.add_y(j, value),
                        }
                    } else {
                        poly = poly.add_const(value);
                    }
                }
                Some(Tok::Ident(name)) => match self.lookup(&name)? {
                    VarRef::Universal(i) => poly = poly.add_x(i, 1),
                    VarRef::Existential(j) => poly = poly.add_y(j, 1),
                },
                _ => {
                    return Err(PadError::Syntax {
                        pos: at,
                        msg: "expected a polynomial term".into(),
                    })
                }
            }
            if matches!(self.peek(), Some(Tok::Plus)) {
                self.pos += 1;
            } else {
                return Ok(poly);
            }
        }
    }

    fn parse_atom(&mut self, out: &mut RawDisjunct) -> Result<(), PadError> {
        let lhs = self.parse_poly()?;
        match self.peek() {
            Some(Tok::Pipe) => {
                let Some(j) = lhs.as_bare_x() else {
                    return Err(self.fragment(
                        "the left side of `|` must be a single universally quantified variable",
                    ));
                };
                self.pos += 1;
                let rhs = self.parse_poly()?;
                let Some(k) = rhs.as_bare_y() else {
                    return Err(self.fragment(
                        "the right side of `|` must be a single existentially quantified variable",
                    ));
                };
                out.div_atoms.push((j, k));
                Ok(())
            }
            Some(tok) => {
                let op = match tok {
                    Tok::Lt => RawOp::Lt,
                    Tok::Le => RawOp::Le,
                    Tok::Eq => RawOp::Eq,
                    Tok::Gt => RawOp::Gt,
                    Tok::Ge => RawOp::Ge,
                    Tok::Ne => RawOp::Ne,
                    _ => return Err(self.syntax("expected a comparison operator or `|`")),
                };
                self.pos += 1;
                let rhs = self.parse_poly()?;
                out.cmp_atoms.push((lhs, op, rhs));
                Ok(())
            }
            None => Err(self.syntax("unexpected end of formula in atom")),
        }
    }

    fn parse_disjunct(&mut self) -> Result<RawDisjunct, PadError> {
        if !matches!(self.bump(), Some(Tok::LParen)) {
            return Err(self.syntax("expected `(` to open a disjunct"));
        }
        let mut out = RawDisjunct {
            div_atoms: Vec::new(),
            cmp_atoms: Vec::new(),
        };
        self.parse_atom(&mut out)?;
        while self.eat_keyword("and") {
            self.parse_atom(&mut out)?;
        }
        if !matches!(self.bump(), Some(Tok::RParen)) {
            return Err(self.syntax("expected `)` or `and`"));
        }
        Ok(out)
    }
}

/// Expands `!=` atoms: the first one splits the disjunct into a `<` copy
/// followed by a `>` copy, recursively.
fn expand_ne(raw: RawDisjunct) -> Vec<Disjunct> {
    if let Some(idx) = raw.cmp_atoms.iter().position(|(_, op, _)| *op == RawOp::Ne) {
        let mut lt = RawDisjunct {
            div_atoms: raw.div_atoms.clone(),
            cmp_atoms: raw.cmp_atoms.clone(),
        };
        lt.cmp_atoms[idx].1 = RawOp::Lt;
        let mut gt = raw;
        gt.cmp_atoms[idx].1 = RawOp::Gt;
        let mut out = expand_ne(lt);
        out.extend(expand_ne(gt));
        return out;
    }
    let cmp_atoms = raw
        .cmp_atoms
        .into_iter()
        .map(|(lhs, op, rhs)| {
            let cmp = match op {
                RawOp::Lt => CompareOp::Lt,
                RawOp::Le => CompareOp::Le,
                RawOp::Eq => CompareOp::Eq,
                RawOp::Gt => CompareOp::Gt,
                RawOp::Ge => CompareOp::Ge,
                RawOp::Ne => unreachable!("expanded above"),
            };
            CompareAtom::new(lhs, cmp, rhs)
        })
        .collect();
    vec![Disjunct {
        div_atoms: raw.div_atoms,
        cmp_atoms,
    }]
}

/// Parses a standalone linear polynomial whose variables follow the
/// positional naming `x<i>` / `y<j>`, e.g. `2*x1 + y2 + 1`.
pub fn parse_poly(text: &str) -> Result<LinearPoly, PadError> {
    let toks = lex(text)?;
    let mut poly = LinearPoly::default();
    let mut pos = 0;
    let classify = |name: &str, at: usize| -> Result<(bool, usize), PadError> {
        let (is_x, digits) = match name.as_bytes().first() {
            Some(b'x') => (true, &name[1..]),
            Some(b'y') => (false, &name[1..]),
            _ => {
                return Err(PadError::Syntax {
                    pos: at,
                    msg: format!("expected x<i> or y<j>, found `{name}`"),
                })
            }
        };
        let index = digits.parse::<usize>().map_err(|_| PadError::Syntax {
            pos: at,
            msg: format!("expected x<i> or y<j>, found `{name}`"),
        })?;
        if index == 0 {
            return Err(PadError::Syntax {
                pos: at,
                msg: "variable indices start at 1".into(),
            });
        }
        Ok((is_x, index))
    };
    loop {
        let at = toks.get(pos).map(|(o, _)| *o).unwrap_or(text.len());
        match toks.get(pos).map(|(_, t)| t.clone()) {
            Some(Tok::Int(value)) => {
                pos += 1;
                if matches!(toks.get(pos).map(|(_, t)| t), Some(Tok::Star)) {
                    pos += 1;
                    let Some((vat, Tok::Ident(name))) = toks.get(pos).cloned() else {
                        return Err(PadError::Syntax {
                            pos: at,
                            msg: "expected a variable after `*`".into(),
                        });
                    };
                    pos += 1;
                    let (is_x, index) = classify(&name, vat)?;
                    poly = if is_x {
                        poly.add_x(index, value)
                    } else {
                        poly.add_y(index, value)
                    };
                } else {
                    poly = poly.add_const(value);
                }
            }
            Some(Tok::Ident(name)) => {
                pos += 1;
                let (is_x, index) = classify(&name, at)?;
                poly = if is_x {
                    poly.add_x(index, 1)
                } else {
                    poly.add_y(index, 1)
                };
            }
            _ => {
                return Err(PadError::Syntax {
                    pos: at,
                    msg: "expected a polynomial term".into(),
                })
            }
        }
        match toks.get(pos).map(|(_, t)| t) {
            Some(Tok::Plus) => pos += 1,
            None => return Ok(poly),
            Some(_) => {
                return Err(PadError::Syntax {
                    pos: toks[pos].0,
                    msg: "expected `+` or end of polynomial".into(),
                })
            }
        }
    }
}

/// Parses a formula of the fragment from its textual form.
pub fn parse_formula(text: &str) -> Result<PadFormula, PadError> {
    let toks = lex(text)?;
    let mut parser = Parser {
        toks,
        pos: 0,
        end: text.len(),
        vars: BTreeMap::new(),
        n: 0,
        m: 0,
    };
    if parser.eat_keyword("forall") {
        parser.declare(true)?;
        if parser.n == 0 {
            return Err(parser.syntax("`forall` requires at least one variable"));
        }
    }
    if parser.eat_keyword("exists") {
        parser.declare(false)?;
    }
    if !matches!(parser.bump(), Some(Tok::Colon)) {
        return Err(parser.syntax("expected `:` before the matrix"));
    }
    let mut disjuncts = expand_ne(parser.parse_disjunct()?);
    while parser.eat_keyword("or") {
        disjuncts.extend(expand_ne(parser.parse_disjunct()?));
    }
    if parser.peek().is_some() {
        return Err(parser.syntax("unexpected trailing input"));
    }
    Ok(PadFormula {
        n: parser.n,
        m: parser.m,
        disjuncts,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reports_positions() {
        let err = parse_formula("forall x1 exists y1 : (x1 =)").unwrap_err();
        let PadError::Syntax { pos, .. } = err else {
            panic!("expected syntax error");
        };
        assert_eq!(pos, 27);
    }

    #[test]
    fn rejects_undeclared_variables() {
        let err = parse_formula("forall x1 : (x2 = 1)").unwrap_err();
        assert!(matches!(err, PadError::Syntax { .. }));
    }

    #[test]
    fn rejects_duplicate_declarations() {
        let err = parse_formula("forall x1 x1 : (x1 = 1)").unwrap_err();
        assert!(matches!(err, PadError::Syntax { .. }));
    }

    #[test]
    fn accepts_coefficients_and_constants() {
        let f = parse_formula("forall x1 exists y1 : (3*x1 + 2 >= 2*y1 + x1)").unwrap();
        let atom = &f.disjuncts[0].cmp_atoms[0];
        assert_eq!(atom.lhs, LinearPoly::default().add_x(1, 3).add_const(2));
        assert_eq!(atom.rhs, LinearPoly::default().add_y(1, 2).add_x(1, 1));
    }
}
