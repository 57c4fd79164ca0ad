//! A restricted fragment of Presburger arithmetic with divisibility.
//!
//! Formulas have a block of universally quantified variables `x1..xn`, a
//! block of existentially quantified variables `y1..ym`, and a matrix in
//! disjunctive normal form whose atoms are either divisibilities `xj | yk`
//! or comparisons between linear polynomials with natural-number
//! coefficients. All variables range over the natural numbers.
//!
//! Truth of such statements is undecidable; [`bounded_validity`] is an
//! explicitly bounded surrogate used as a desk-scale oracle.

mod parse;

use std::collections::BTreeMap;
use std::fmt;

use thiserror::Error;

pub use parse::{parse_formula, parse_poly};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PadError {
    #[error("syntax error at offset {pos}: {msg}")]
    Syntax { pos: usize, msg: String },

    #[error("fragment violation at offset {pos}: {msg}")]
    FragmentViolation { pos: usize, msg: String },

    #[error("unsupported input: {0}")]
    Unsupported(String),

    #[error("variable index out of range: {0}")]
    OutOfRange(String),
}

/// A linear polynomial `Σ a_i*x_i + Σ b_j*y_j + c` with coefficients and
/// constant in the natural numbers. Indices are 1-based.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct LinearPoly {
    pub const_term: i64,
    pub x_coeffs: BTreeMap<usize, i64>,
    pub y_coeffs: BTreeMap<usize, i64>,
}

impl LinearPoly {
    pub fn constant(c: i64) -> Self {
        assert!(c >= 0, "polynomial constants are natural numbers");
        LinearPoly {
            const_term: c,
            ..Default::default()
        }
    }

    pub fn x(index: usize) -> Self {
        LinearPoly::default().add_x(index, 1)
    }

    pub fn y(index: usize) -> Self {
        LinearPoly::default().add_y(index, 1)
    }

    pub fn add_x(mut self, index: usize, coeff: i64) -> Self {
        assert!(coeff >= 0, "polynomial coefficients are natural numbers");
        if coeff != 0 {
            *self.x_coeffs.entry(index).or_insert(0) += coeff;
        }
        self
    }

    pub fn add_y(mut self, index: usize, coeff: i64) -> Self {
        assert!(coeff >= 0, "polynomial coefficients are natural numbers");
        if coeff != 0 {
            *self.y_coeffs.entry(index).or_insert(0) += coeff;
        }
        self
    }

    pub fn add_const(mut self, c: i64) -> Self {
        assert!(c >= 0, "polynomial constants are natural numbers");
        self.const_term += c;
        self
    }

    /// The index of the single `x` variable if the polynomial is exactly
    /// that variable with coefficient 1.
    pub fn as_bare_x(&self) -> Option<usize> {
        if self.const_term == 0 && self.y_coeffs.is_empty() && self.x_coeffs.len() == 1 {
            let (&i, &c) = self.x_coeffs.iter().next().unwrap();
            if c == 1 {
                return Some(i);
            }
        }
        None
    }

    /// The index of the single `y` variable if the polynomial is exactly
    /// that variable with coefficient 1.
    pub fn as_bare_y(&self) -> Option<usize> {
        if self.const_term == 0 && self.x_coeffs.is_empty() && self.y_coeffs.len() == 1 {
            let (&j, &c) = self.y_coeffs.iter().next().unwrap();
            if c == 1 {
                return Some(j);
            }
        }
        None
    }

    /// Exact evaluation; panics on 64-bit overflow, which is unreachable at
    /// the desk scales this toolkit targets.
    pub fn eval(&self, xs: &[i64], ys: &[i64]) -> i64 {
        let overflow = "polynomial evaluation overflowed 64-bit arithmetic";
        let mut acc = self.const_term;
        for (&i, &c) in &self.x_coeffs {
            acc = acc
                .checked_add(c.checked_mul(xs[i - 1]).expect(overflow))
                .expect(overflow);
        }
        for (&j, &c) in &self.y_coeffs {
            acc = acc
                .checked_add(c.checked_mul(ys[j - 1]).expect(overflow))
                .expect(overflow);
        }
        acc
    }

    fn max_index(&self) -> (usize, usize) {
        let xi = self.x_coeffs.keys().max().copied().unwrap_or(0);
        let yj = self.y_coeffs.keys().max().copied().unwrap_or(0);
        (xi, yj)
    }
}

impl fmt::Display for LinearPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        let mut write_term = |f: &mut fmt::Formatter<'_>, coeff: i64, name: String| {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            if coeff == 1 {
                write!(f, "{name}")
            } else {
                write!(f, "{coeff}*{name}")
            }
        };
        for (&i, &c) in &self.x_coeffs {
            write_term(f, c, format!("x{i}"))?;
        }
        for (&j, &c) in &self.y_coeffs {
            write_term(f, c, format!("y{j}"))?;
        }
        if self.const_term != 0 || first {
            if !first {
                write!(f, " + ")?;
            }
            write!(f, "{}", self.const_term)?;
        }
        Ok(())
    }
}

/// Comparison operators of atomic formulas.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CompareOp {
    Lt,
    Le,
    Eq,
    Gt,
    Ge,
}

impl CompareOp {
    pub fn eval(self, lhs: i64, rhs: i64) -> bool {
        match self {
            CompareOp::Lt => lhs < rhs,
            CompareOp::Le => lhs <= rhs,
            CompareOp::Eq => lhs == rhs,
            CompareOp::Gt => lhs > rhs,
            CompareOp::Ge => lhs >= rhs,
        }
    }
}

impl fmt::Display for CompareOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            CompareOp::Lt => "<",
            CompareOp::Le => "<=",
            CompareOp::Eq => "=",
            CompareOp::Gt => ">",
            CompareOp::Ge => ">=",
        };
        write!(f, "{s}")
    }
}

/// A comparison between two linear polynomials.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CompareAtom {
    pub lhs: LinearPoly,
    pub cmp: CompareOp,
    pub rhs: LinearPoly,
}

impl CompareAtom {
    pub fn new(lhs: LinearPoly, cmp: CompareOp, rhs: LinearPoly) -> Self {
        CompareAtom { lhs, cmp, rhs }
    }

    pub fn eval(&self, xs: &[i64], ys: &[i64]) -> bool {
        self.cmp.eval(self.lhs.eval(xs, ys), self.rhs.eval(xs, ys))
    }
}

impl fmt::Display for CompareAtom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {} {}", self.lhs, self.cmp, self.rhs)
    }
}

/// An atomic formula of the fragment.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Atom {
    /// `x_j | y_k`: the universal variable divides the existential one.
    Divides {
        j: usize,
        k: usize,
    },
    Compare(CompareAtom),
}

impl Atom {
    pub fn eval(&self, xs: &[i64], ys: &[i64]) -> bool {
        match self {
            Atom::Divides { j, k } => divides(xs[j - 1], ys[k - 1]),
            Atom::Compare(cmp) => cmp.eval(xs, ys),
        }
    }
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Atom::Divides { j, k } => write!(f, "x{j} | y{k}"),
            Atom::Compare(cmp) => write!(f, "{cmp}"),
        }
    }
}

/// The usual divisibility relation on the naturals; `0 | y` holds exactly
/// when `y = 0`.
pub fn divides(x: i64, y: i64) -> bool {
    debug_assert!(x >= 0 && y >= 0);
    if x == 0 {
        y == 0
    } else {
        y % x == 0
    }
}

/// One conjunct of the matrix: divisibility atoms followed by comparisons.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Disjunct {
    pub div_atoms: Vec<(usize, usize)>,
    pub cmp_atoms: Vec<CompareAtom>,
}

impl Disjunct {
    /// The atoms of the conjunct, divisibilities first.
    pub fn atoms(&self) -> impl Iterator<Item = Atom> + '_ {
        self.div_atoms
            .iter()
            .map(|&(j, k)| Atom::Divides { j, k })
            .chain(self.cmp_atoms.iter().cloned().map(Atom::Compare))
    }

    pub fn eval(&self, xs: &[i64], ys: &[i64]) -> bool {
        self.atoms().all(|a| a.eval(xs, ys))
    }
}

/// A formula `∀x1..xn ∃y1..ym ⋁_i ⋀ atoms` of the fragment.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PadFormula {
    pub n: usize,
    pub m: usize,
    pub disjuncts: Vec<Disjunct>,
}

impl fmt::Display for PadFormula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.n > 0 {
            write!(f, "forall")?;
            for i in 1..=self.n {
                write!(f, " x{i}")?;
            }
            write!(f, " ")?;
        }
        if self.m > 0 {
            write!(f, "exists")?;
            for j in 1..=self.m {
                write!(f, " y{j}")?;
            }
            write!(f, " ")?;
        }
        write!(f, ":")?;
        for (i, d) in self.disjuncts.iter().enumerate() {
            if i > 0 {
                write!(f, " or")?;
            }
            write!(f, " (")?;
            let mut first = true;
            for atom in d.atoms() {
                if !first {
                    write!(f, " and ")?;
                }
                first = false;
                write!(f, "{atom}")?;
            }
            write!(f, ")")?;
        }
        Ok(())
    }
}

/// Truth of the quantifier-free matrix under natural-number valuations.
pub fn eval_matrix(formula: &PadFormula, xs: &[i64], ys: &[i64]) -> bool {
    assert_eq!(xs.len(), formula.n, "universal valuation arity mismatch");
    assert_eq!(ys.len(), formula.m, "existential valuation arity mismatch");
    assert!(
        xs.iter().chain(ys).all(|v| *v >= 0),
        "valuations range over the naturals"
    );
    formula.disjuncts.iter().any(|d| d.eval(xs, ys))
}

fn grid(dims: usize, bounds: &[i64]) -> Vec<Vec<i64>> {
    debug_assert_eq!(dims, bounds.len());
    let mut out = vec![Vec::new()];
    for &bound in bounds.iter().take(dims) {
        let mut next = Vec::new();
        for prefix in &out {
            for v in 0..=bound.max(0) {
                let mut row = prefix.clone();
                row.push(v);
                next.push(row);
            }
        }
        out = next;
    }
    out
}

/// Bounded surrogate for validity: checks `∀X ∈ [0,bx]^n ∃Y ∈ [0,by]^m`
/// over the matrix. This is neither sound nor complete for true validity
/// (which is undecidable); it is an oracle for desk-scale experiments.
pub fn bounded_validity(formula: &PadFormula, bx: i64, by: i64) -> bool {
    bounded_validity_boxed(formula, &vec![bx; formula.n], &vec![by; formula.m])
}

/// [`bounded_validity`] with a separate bound per variable.
pub fn bounded_validity_boxed(formula: &PadFormula, x_bounds: &[i64], y_bounds: &[i64]) -> bool {
    assert_eq!(x_bounds.len(), formula.n);
    assert_eq!(y_bounds.len(), formula.m);
    let ys = grid(formula.m, y_bounds);
    grid(formula.n, x_bounds)
        .iter()
        .all(|xs| ys.iter().any(|ys| eval_matrix(formula, xs, ys)))
}

/// Rewrites a general divisibility `f(x) | g(x,y)` into the fragment: one
/// fresh universal `z`, one fresh existential `z'`, and the matrix
/// `(z < f) ∨ (z > f) ∨ (z = f ∧ z' = g ∧ z | z')`. The rewrite preserves
/// validity of the quantified statement.
pub fn lift_general_divisibility(
    n: usize,
    m: usize,
    divisor: &LinearPoly,
    dividend: &LinearPoly,
) -> Result<PadFormula, PadError> {
    if !divisor.y_coeffs.is_empty() {
        return Err(PadError::Unsupported(
            "the divisor of a general divisibility must range over universal variables only".into(),
        ));
    }
    for (poly, name) in [(divisor, "divisor"), (dividend, "dividend")] {
        let (xi, yj) = poly.max_index();
        if xi > n || yj > m {
            return Err(PadError::OutOfRange(format!(
                "{name} references x{xi}/y{yj} outside forall^{n} exists^{m}"
            )));
        }
    }
    let z = LinearPoly::x(n + 1);
    let z_prime = LinearPoly::y(m + 1);
    let below = Disjunct {
        div_atoms: vec![],
        cmp_atoms: vec![CompareAtom::new(z.clone(), CompareOp::Lt, divisor.clone())],
    };
    let above = Disjunct {
        div_atoms: vec![],
        cmp_atoms: vec![CompareAtom::new(z.clone(), CompareOp::Gt, divisor.clone())],
    };
    let exact = Disjunct {
        div_atoms: vec![(n + 1, m + 1)],
        cmp_atoms: vec![
            CompareAtom::new(z, CompareOp::Eq, divisor.clone()),
            CompareAtom::new(z_prime, CompareOp::Eq, dividend.clone()),
        ],
    };
    Ok(PadFormula {
        n: n + 1,
        m: m + 1,
        disjuncts: vec![below, above, exact],
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn eq2() -> PadFormula {
        parse_formula("forall x1 x2 exists y1 y2 : (x1 | y1) or (x2 | y1 and x1 = 2*x2 + y2)")
            .unwrap()
    }

    #[test]
    fn parses_the_running_example() {
        let f = eq2();
        assert_eq!((f.n, f.m), (2, 2));
        assert_eq!(f.disjuncts.len(), 2);
        assert_eq!(f.disjuncts[0].div_atoms, vec![(1, 1)]);
        assert!(f.disjuncts[0].cmp_atoms.is_empty());
        assert_eq!(f.disjuncts[1].div_atoms, vec![(2, 1)]);
        assert_eq!(f.disjuncts[1].cmp_atoms.len(), 1);
        let cmp = &f.disjuncts[1].cmp_atoms[0];
        assert_eq!(cmp.cmp, CompareOp::Eq);
        assert_eq!(cmp.lhs, LinearPoly::x(1));
        assert_eq!(cmp.rhs, LinearPoly::default().add_x(2, 2).add_y(2, 1));
    }

    #[test]
    fn parses_trivial_and_rejects_inverted_divisibility() {
        let f = parse_formula("forall x1 exists y1 : (x1 = x1)").unwrap();
        assert_eq!(f.disjuncts.len(), 1);
        assert!(eval_matrix(&f, &[2], &[0]));

        let err = parse_formula("forall x1 exists y1 : (y1 | x1)").unwrap_err();
        assert!(matches!(err, PadError::FragmentViolation { .. }));
    }

    #[test]
    fn rejects_compound_divisor_text() {
        let err = parse_formula("forall x1 exists y1 : (x1 + 1 | y1)").unwrap_err();
        assert!(matches!(err, PadError::FragmentViolation { .. }));
    }

    #[test]
    fn not_equal_splits_disjuncts() {
        let f = parse_formula("forall x1 exists y1 : (x1 != y1)").unwrap();
        assert_eq!(f.disjuncts.len(), 2);
        assert_eq!(f.disjuncts[0].cmp_atoms[0].cmp, CompareOp::Lt);
        assert_eq!(f.disjuncts[1].cmp_atoms[0].cmp, CompareOp::Gt);
        assert!(eval_matrix(&f, &[3], &[2]));
        assert!(!eval_matrix(&f, &[3], &[3]));
    }

    #[test]
    fn matrix_evaluation_matches_hand_checks() {
        let f = eq2();
        // First disjunct: 2 | 2.
        assert!(eval_matrix(&f, &[2, 3], &[2, 0]));
        // Mirroring X into Y always satisfies the first disjunct.
        for a in 0..4 {
            for b in 0..4 {
                assert!(eval_matrix(&f, &[a, b], &[a, b]));
            }
        }
        assert!(!eval_matrix(&f, &[2, 2], &[1, 0]));
    }

    #[test]
    fn zero_divides_only_zero() {
        assert!(divides(0, 0));
        assert!(!divides(0, 3));
        assert!(divides(3, 0));
        assert!(divides(2, 6));
        assert!(!divides(4, 6));
    }

    #[test]
    fn bounded_validity_examples() {
        assert!(bounded_validity(&eq2(), 3, 3));

        let f = parse_formula("forall x1 exists y1 : (x1 = y1 + 1)").unwrap();
        assert!(!bounded_validity(&f, 2, 2));

        let ground = parse_formula("exists y1 : (y1 = y1)").unwrap();
        assert_eq!(ground.n, 0);
        assert!(bounded_validity(&ground, 3, 3));
    }

    #[test]
    fn bounded_validity_is_antitone_in_bx_and_monotone_in_by() {
        let corpus = [
            "forall x1 exists y1 : (x1 = y1 + 1)",
            "forall x1 exists y1 : (x1 | y1)",
            "forall x1 x2 exists y1 : (x1 + x2 <= y1)",
            "forall x1 exists y1 y2 : (x1 = y1 + y2)",
        ];
        for text in corpus {
            let f = parse_formula(text).unwrap();
            for bx in 0..3 {
                for by in 0..3 {
                    if bounded_validity(&f, bx + 1, by) {
                        assert!(bounded_validity(&f, bx, by), "{text} at ({bx},{by})");
                    }
                    if bounded_validity(&f, bx, by) {
                        assert!(bounded_validity(&f, bx, by + 1), "{text} at ({bx},{by})");
                    }
                }
            }
        }
    }

    #[test]
    fn display_round_trips() {
        for text in [
            "forall x1 x2 exists y1 y2 : (x1 | y1) or (x2 | y1 and x1 = 2*x2 + y2)",
            "forall x1 exists y1 : (x1 = y1 + 1)",
            "exists y1 : (y1 = y1)",
            "forall x1 : (x1 < 5)",
        ] {
            let f = parse_formula(text).unwrap();
            let printed = f.to_string();
            assert_eq!(parse_formula(&printed).unwrap(), f, "via {printed}");
        }
    }

    #[test]
    fn lift_produces_the_three_disjunct_shape() {
        // x1 + 1 divides y1.
        let f = LinearPoly::x(1).add_const(1);
        let g = LinearPoly::y(1);
        let lifted = lift_general_divisibility(1, 1, &f, &g).unwrap();
        assert_eq!((lifted.n, lifted.m), (2, 2));
        assert_eq!(lifted.disjuncts.len(), 3);
        assert_eq!(lifted.disjuncts[0].cmp_atoms[0].cmp, CompareOp::Lt);
        assert_eq!(lifted.disjuncts[1].cmp_atoms[0].cmp, CompareOp::Gt);
        assert_eq!(lifted.disjuncts[2].div_atoms, vec![(2, 2)]);
        assert_eq!(lifted.disjuncts[2].cmp_atoms.len(), 2);
    }

    // Brute-force check of a general divisibility, independent of the lift.
    fn direct_bounded(
        n: usize,
        m: usize,
        divisor: &LinearPoly,
        dividend: &LinearPoly,
        bx: i64,
        by: i64,
    ) -> bool {
        grid(n, &vec![bx; n]).iter().all(|xs| {
            grid(m, &vec![by; m])
                .iter()
                .any(|ys| divides(divisor.eval(xs, &[]), dividend.eval(xs, ys)))
        })
    }

    fn lifted_bounded(
        n: usize,
        m: usize,
        divisor: &LinearPoly,
        dividend: &LinearPoly,
        bx: i64,
        by: i64,
    ) -> bool {
        let lifted = lift_general_divisibility(n, m, divisor, dividend).unwrap();
        // The fresh variables must range far enough to reach the polynomial
        // values attained on the grid.
        let z_max = grid(n, &vec![bx; n])
            .iter()
            .map(|xs| divisor.eval(xs, &[]))
            .max()
            .unwrap_or(0);
        let zp_max = grid(n, &vec![bx; n])
            .iter()
            .flat_map(|xs| {
                grid(m, &vec![by; m])
                    .iter()
                    .map(|ys| dividend.eval(xs, ys))
                    .collect::<Vec<_>>()
            })
            .max()
            .unwrap_or(0);
        let mut x_bounds = vec![bx; n];
        x_bounds.push(z_max);
        let mut y_bounds = vec![by; m];
        y_bounds.push(zp_max);
        bounded_validity_boxed(&lifted, &x_bounds, &y_bounds)
    }

    #[test]
    fn lift_agrees_with_direct_evaluation() {
        let cases: Vec<(usize, usize, LinearPoly, LinearPoly)> = vec![
            (1, 1, LinearPoly::x(1).add_const(1), LinearPoly::y(1)),
            (1, 1, LinearPoly::x(1), LinearPoly::y(1)),
            (0, 1, LinearPoly::constant(0), LinearPoly::y(1)),
            (
                2,
                1,
                LinearPoly::x(1).add_x(2, 1),
                LinearPoly::y(1).add_const(2),
            ),
            (1, 2, LinearPoly::constant(2), LinearPoly::x(1).add_y(2, 3)),
        ];
        for (n, m, f, g) in cases {
            let direct = direct_bounded(n, m, &f, &g, 3, 3);
            let lifted = lifted_bounded(n, m, &f, &g, 3, 3);
            assert_eq!(direct, lifted, "({f}) | ({g})");
        }
    }

    #[test]
    fn lift_with_constant_zero_divisor() {
        // 0 | y1 forces y1 = 0, which is always choosable.
        let lifted =
            lift_general_divisibility(0, 1, &LinearPoly::constant(0), &LinearPoly::y(1)).unwrap();
        assert!(bounded_validity(&lifted, 3, 3));
    }

    #[test]
    fn lift_rejects_divisor_over_existentials() {
        let err =
            lift_general_divisibility(1, 1, &LinearPoly::y(1), &LinearPoly::y(1)).unwrap_err();
        assert!(matches!(err, PadError::Unsupported(_)));
    }

    #[test]
    fn disjunct_addition_is_monotone() {
        let f = eq2();
        let mut extended = f.clone();
        extended.disjuncts.push(Disjunct {
            div_atoms: vec![],
            cmp_atoms: vec![CompareAtom::new(
                LinearPoly::constant(0),
                CompareOp::Eq,
                LinearPoly::constant(1),
            )],
        });
        for xs in grid(2, &[3, 3]) {
            for ys in grid(2, &[3, 3]) {
                if eval_matrix(&f, &xs, &ys) {
                    assert!(eval_matrix(&extended, &xs, &ys));
                }
            }
        }
    }
}
