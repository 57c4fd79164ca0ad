//! Compiler from the divisibility fragment into sketch automata.
//!
//! Every atomic formula becomes a three-location gadget: processes at the
//! gadget entry either increment the gadget's shared variable or move
//! silently, and the exit rule checks the atom's arithmetic against the
//! accumulated counter value. Gadgets are chained per disjunct, and the
//! chains hang in a star between a global `start` and `end` location. The
//! environment carries one parameter `t_k` per existential variable, one
//! parameter `d` per divisibility atom, and a parameter `z` that is also
//! the number function, so a valuation picks the number of processes
//! directly. The compiled sketch has one indeterminate `s_i` per universal
//! variable.

use thiserror::Error;

use crate::pad::{Atom, CompareOp, LinearPoly, PadFormula};
use crate::sketch::{
    collect_indeterminates, AffineCoeff, Assignment, SketchAutomaton, SketchGuard, SketchRule,
};
use crate::ta::{Configuration, Environment, GuardOp, LinearExpr, Valuation};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ReductionError {
    #[error("generated name `{0}` collides with an existing one")]
    NameCollision(String),

    #[error("the sketch must have exactly one initial location")]
    MultipleInitialLocations,

    #[error("atom `{0}` is false under the given valuations")]
    AtomFalse(String),

    #[error("expected {expected} {what} values, got {got}")]
    BadArity {
        what: &'static str,
        expected: usize,
        got: usize,
    },

    #[error("valuations must be natural numbers: {0}")]
    NegativeValue(String),

    #[error("configuration is missing entry `{0}`")]
    MissingEntry(String),
}

/// Indeterminate name for the i-th universal variable (1-based).
pub fn s_name(i: usize) -> String {
    format!("s{i}")
}

/// Parameter name for the k-th existential variable (1-based).
pub fn t_name(k: usize) -> String {
    format!("t{k}")
}

/// Spreadsheet-style tag for the i-th atom (0-based): A, B, ..., Z, AA, ...
fn atom_tag(mut index: usize) -> String {
    let mut letters = Vec::new();
    loop {
        letters.push(b'A' + (index % 26) as u8);
        if index < 26 {
            break;
        }
        index = index / 26 - 1;
    }
    letters.reverse();
    String::from_utf8(letters).expect("ASCII letters")
}

/// Names and metadata of one compiled atom gadget.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AtomGadget {
    /// Index of the disjunct the atom belongs to.
    pub disjunct: usize,
    pub tag: String,
    pub atom: Atom,
    /// Entry location `start_<tag>`.
    pub start: String,
    /// Middle location `l_<tag>`.
    pub mid: String,
    /// Exit location `end_<tag>`.
    pub end: String,
    /// The gadget's shared counter `v_<tag>`.
    pub shared: String,
    /// Quotient parameter `d_<tag>`, present for divisibility atoms.
    pub d_param: Option<String>,
}

/// Result of compiling a formula (or a fragment of one).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReductionOutput {
    pub sketch: SketchAutomaton,
    /// The coverability target.
    pub target: String,
    pub universal_count: usize,
    pub existential_count: usize,
    /// Gadget metadata in atom order.
    pub atoms: Vec<AtomGadget>,
    /// Atom indices per disjunct.
    pub disjunct_atoms: Vec<Vec<usize>>,
}

impl ReductionOutput {
    /// The indeterminates of the sketch, in first-occurrence order.
    pub fn indeterminates(&self) -> Vec<String> {
        collect_indeterminates(&self.sketch)
    }

    /// Interprets a universal valuation as an assignment of `s1..sn`.
    pub fn assignment_from_x(&self, xs: &[i64]) -> Assignment {
        Assignment(
            xs.iter()
                .enumerate()
                .map(|(i, v)| (s_name(i + 1), *v))
                .collect(),
        )
    }
}

fn simple_guard(
    var: &str,
    cmp: GuardOp,
    rhs_const: AffineCoeff,
    params: &[(String, AffineCoeff)],
) -> SketchGuard {
    let mut guard = SketchGuard::new(var, cmp).with_const(rhs_const);
    for (p, c) in params {
        guard = guard.with_param(p.clone(), c.clone());
    }
    guard
}

/// Splits a polynomial over the formula variables into guard slots: the
/// universal part becomes indeterminate terms in the constant slot and the
/// existential part becomes fixed coefficients on the `t` parameters.
fn poly_slots(poly: &LinearPoly) -> (AffineCoeff, Vec<(String, AffineCoeff)>) {
    let mut const_slot = AffineCoeff::constant(poly.const_term);
    for (&i, &c) in &poly.x_coeffs {
        const_slot = const_slot.add_term(s_name(i), c);
    }
    let params = poly
        .y_coeffs
        .iter()
        .map(|(&k, &c)| (t_name(k), AffineCoeff::constant(c)))
        .collect();
    (const_slot, params)
}

struct Compiler {
    locations: Vec<String>,
    shared: Vec<String>,
    rules: Vec<SketchRule>,
    atoms: Vec<AtomGadget>,
    disjunct_atoms: Vec<Vec<usize>>,
}

impl Compiler {
    fn new() -> Self {
        Compiler {
            locations: Vec::new(),
            shared: Vec::new(),
            rules: Vec::new(),
            atoms: Vec::new(),
            disjunct_atoms: Vec::new(),
        }
    }

    /// Emits the three-location gadget for one atom and returns its index.
    fn emit_atom(&mut self, disjunct: usize, atom: &Atom) -> usize {
        let tag = atom_tag(self.atoms.len());
        let start = format!("start_{tag}");
        let mid = format!("l_{tag}");
        let end = format!("end_{tag}");
        let shared = format!("v_{tag}");

        self.locations
            .extend([start.clone(), mid.clone(), end.clone()]);
        self.shared.push(shared.clone());

        self.rules
            .push(SketchRule::new(format!("inc_{tag}"), &start, &mid).with_inc(&shared));
        self.rules
            .push(SketchRule::new(format!("skip_{tag}"), &start, &mid));

        let mut check = SketchRule::new(format!("check_{tag}"), &mid, &end);
        let d_param = match atom {
            Atom::Divides { j, k } => {
                let d = format!("d_{tag}");
                // v = s_j * d  and  v = t_k, each stored as a >=/< pair.
                check = check.with_eq_guard(
                    &shared,
                    AffineCoeff::constant(0),
                    &[(d.clone(), AffineCoeff::indet(s_name(*j)))],
                );
                check = check.with_eq_guard(
                    &shared,
                    AffineCoeff::constant(0),
                    &[(t_name(*k), AffineCoeff::constant(1))],
                );
                Some(d)
            }
            Atom::Compare(cmp) => {
                let (f_const, f_params) = poly_slots(&cmp.lhs);
                let (g_const, g_params) = poly_slots(&cmp.rhs);
                // v = f(s, t).
                check = check.with_eq_guard(&shared, f_const, &f_params);
                // v ⋈ g(s, t), with <=, =, > expressed through >=/<.
                match cmp.cmp {
                    CompareOp::Lt => {
                        check = check.with_guard(simple_guard(
                            &shared,
                            GuardOp::Lt,
                            g_const,
                            &g_params,
                        ));
                    }
                    CompareOp::Le => {
                        check = check.with_guard(simple_guard(
                            &shared,
                            GuardOp::Lt,
                            g_const.add_const(1),
                            &g_params,
                        ));
                    }
                    CompareOp::Eq => {
                        check = check.with_eq_guard(&shared, g_const, &g_params);
                    }
                    CompareOp::Gt => {
                        check = check.with_guard(simple_guard(
                            &shared,
                            GuardOp::Ge,
                            g_const.add_const(1),
                            &g_params,
                        ));
                    }
                    CompareOp::Ge => {
                        check = check.with_guard(simple_guard(
                            &shared,
                            GuardOp::Ge,
                            g_const,
                            &g_params,
                        ));
                    }
                }
                None
            }
        };
        self.rules.push(check);

        let index = self.atoms.len();
        self.atoms.push(AtomGadget {
            disjunct,
            tag,
            atom: atom.clone(),
            start,
            mid,
            end,
            shared,
            d_param,
        });
        index
    }

    /// Emits the gadget chain for a disjunct, linking consecutive gadgets
    /// with silent rules. Returns the atom indices.
    fn emit_disjunct(&mut self, disjunct: usize, atoms: &[Atom]) -> Vec<usize> {
        let mut indices: Vec<usize> = Vec::with_capacity(atoms.len());
        for atom in atoms {
            if let Some(&prev) = indices.last() {
                let prev_tag = self.atoms[prev].tag.clone();
                let this_tag = atom_tag(self.atoms.len());
                let prev_end = self.atoms[prev].end.clone();
                self.rules.push(SketchRule::new(
                    format!("link_{prev_tag}_{this_tag}"),
                    prev_end,
                    format!("start_{this_tag}"),
                ));
            }
            indices.push(self.emit_atom(disjunct, atom));
        }
        self.disjunct_atoms.push(indices.clone());
        indices
    }

    fn environment(&self, m: usize) -> Environment {
        let mut params: Vec<String> = (1..=m).map(t_name).collect();
        params.extend(self.atoms.iter().filter_map(|a| a.d_param.clone()));
        params.push("z".into());
        Environment {
            params,
            resilience: Vec::new(),
            size_fn: LinearExpr::var("z"),
        }
    }

    fn into_output(
        self,
        n: usize,
        m: usize,
        initial: Vec<String>,
        target: String,
    ) -> ReductionOutput {
        let env = self.environment(m);
        ReductionOutput {
            sketch: SketchAutomaton {
                env,
                locations: self.locations,
                initial,
                shared: self.shared,
                rules: self.rules,
            },
            target,
            universal_count: n,
            existential_count: m,
            atoms: self.atoms,
            disjunct_atoms: self.disjunct_atoms,
        }
    }
}

/// Compiles a single atom into its standalone gadget; the target is the
/// gadget's exit location.
pub fn compile_single_atom(atom: &Atom, n: usize, m: usize) -> ReductionOutput {
    let mut compiler = Compiler::new();
    let indices = compiler.emit_disjunct(0, std::slice::from_ref(atom));
    let gadget = &compiler.atoms[indices[0]];
    let (initial, target) = (vec![gadget.start.clone()], gadget.end.clone());
    compiler.into_output(n, m, initial, target)
}

/// Compiles a single disjunct into its gadget chain; the target is the exit
/// of the last gadget.
pub fn compile_single_disjunct(atoms: &[Atom], n: usize, m: usize) -> ReductionOutput {
    assert!(!atoms.is_empty(), "a disjunct has at least one atom");
    let mut compiler = Compiler::new();
    let indices = compiler.emit_disjunct(0, atoms);
    let initial = vec![compiler.atoms[indices[0]].start.clone()];
    let target = compiler.atoms[*indices.last().unwrap()].end.clone();
    compiler.into_output(n, m, initial, target)
}

/// Compiles a whole formula: disjunct chains in a star between fresh
/// `start` and `end` locations, with `start` initial and `end` the target.
pub fn compile_formula(formula: &PadFormula) -> ReductionOutput {
    let mut compiler = Compiler::new();
    compiler.locations.push("start".into());
    for (di, disjunct) in formula.disjuncts.iter().enumerate() {
        let atoms: Vec<Atom> = disjunct.atoms().collect();
        let first_tag = atom_tag(compiler.atoms.len());
        compiler.rules.push(SketchRule::new(
            format!("enter_{first_tag}"),
            "start",
            format!("start_{first_tag}"),
        ));
        let indices = compiler.emit_disjunct(di, &atoms);
        let last = &compiler.atoms[*indices.last().expect("nonempty disjunct")];
        let (last_tag, last_end) = (last.tag.clone(), last.end.clone());
        compiler
            .rules
            .push(SketchRule::new(format!("exit_{last_tag}"), last_end, "end"));
    }
    compiler.locations.push("end".into());
    compiler.into_output(formula.n, formula.m, vec!["start".into()], "end".into())
}

/// Reduces non-negative coefficient synthesis to the general problem: adds
/// a `begin` location ahead of the single initial location and, per
/// indeterminate `x`, an escape rule `begin -> target` guarded by
/// `check > x` on a fresh shared variable `check` that no rule increments.
/// The guard can only fire when `x` is assigned a negative value. The
/// target location is unchanged.
pub fn nonneg_to_general(
    sketch: &SketchAutomaton,
    target: &str,
) -> Result<SketchAutomaton, ReductionError> {
    if sketch.initial.len() != 1 {
        return Err(ReductionError::MultipleInitialLocations);
    }
    for (taken, name) in [
        (sketch.locations.contains(&"begin".to_string()), "begin"),
        (sketch.shared.contains(&"check".to_string()), "check"),
    ] {
        if taken {
            return Err(ReductionError::NameCollision(name.into()));
        }
    }
    let start = sketch.initial[0].clone();
    let mut out = sketch.clone();
    out.locations.insert(0, "begin".into());
    out.shared.push("check".into());
    out.initial = vec!["begin".into()];
    let mut new_rules = vec![SketchRule::new("begin_start", "begin", start)];
    for x in collect_indeterminates(sketch) {
        // check > x, stored as check >= x + 1.
        new_rules.push(
            SketchRule::new(format!("escape_{x}"), "begin", target).with_guard(
                SketchGuard::new("check", GuardOp::Ge)
                    .with_const(AffineCoeff::indet(&x).add_const(1)),
            ),
        );
    }
    new_rules.extend(out.rules);
    out.rules = new_rules;
    Ok(out)
}

/// Which witness recipe to build.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WitnessScope {
    /// The per-atom recipe: all processes at the gadget entry, `z` one more
    /// than the checked counter value, the atom's quotient parameter set to
    /// the divisibility quotient.
    Atom(usize),
    /// The whole-formula recipe used by the worked example: all processes
    /// at the initial location, `t` mirrored from the existential values,
    /// every quotient parameter 1, and `z = X(x1) + 1`.
    Formula,
}

fn check_naturals(what: &'static str, vals: &[i64]) -> Result<(), ReductionError> {
    if let Some(v) = vals.iter().find(|v| **v < 0) {
        return Err(ReductionError::NegativeValue(format!(
            "{what} contains {v}"
        )));
    }
    Ok(())
}

/// Builds the simple witness configuration for the given scope: a single
/// occupied location and all shared variables zero.
pub fn witness_config(
    out: &ReductionOutput,
    scope: WitnessScope,
    xs: &[i64],
    ys: &[i64],
) -> Result<Configuration, ReductionError> {
    if xs.len() != out.universal_count {
        return Err(ReductionError::BadArity {
            what: "universal",
            expected: out.universal_count,
            got: xs.len(),
        });
    }
    if ys.len() != out.existential_count {
        return Err(ReductionError::BadArity {
            what: "existential",
            expected: out.existential_count,
            got: ys.len(),
        });
    }
    check_naturals("universal valuation", xs)?;
    check_naturals("existential valuation", ys)?;

    let mut p = Valuation::new();
    for (k, y) in ys.iter().enumerate() {
        p.insert(t_name(k + 1), *y);
    }

    let (home, z) = match scope {
        WitnessScope::Atom(index) => {
            let gadget = &out.atoms[index];
            if !gadget.atom.eval(xs, ys) {
                return Err(ReductionError::AtomFalse(gadget.atom.to_string()));
            }
            let checked_value = match &gadget.atom {
                Atom::Divides { k, .. } => ys[*k - 1],
                Atom::Compare(cmp) => cmp.lhs.eval(xs, ys),
            };
            for g in &out.atoms {
                if let Some(d) = &g.d_param {
                    let value = if g.tag == gadget.tag {
                        let Atom::Divides { j, k } = &g.atom else {
                            unreachable!("d parameters belong to divisibility atoms");
                        };
                        quotient(xs[*j - 1], ys[*k - 1])
                    } else {
                        0
                    };
                    p.insert(d.clone(), value);
                }
            }
            (gadget.start.clone(), checked_value + 1)
        }
        WitnessScope::Formula => {
            if out.sketch.initial.len() != 1 {
                return Err(ReductionError::MultipleInitialLocations);
            }
            if xs.is_empty() {
                return Err(ReductionError::BadArity {
                    what: "universal",
                    expected: 1,
                    got: 0,
                });
            }
            for g in &out.atoms {
                if let Some(d) = &g.d_param {
                    p.insert(d.clone(), 1);
                }
            }
            (out.sketch.initial[0].clone(), xs[0] + 1)
        }
    };
    p.insert("z".into(), z);

    let kappa: Valuation = out
        .sketch
        .locations
        .iter()
        .map(|l| (l.clone(), if *l == home { z } else { 0 }))
        .collect();
    let g = out.sketch.shared.iter().map(|x| (x.clone(), 0)).collect();
    Ok(Configuration { kappa, g, p })
}

/// The divisibility quotient used by witness configurations; 0 when both
/// sides are 0.
pub fn quotient(x: i64, y: i64) -> i64 {
    if x == 0 {
        0
    } else {
        y / x
    }
}

fn entry(v: &Valuation, name: &str) -> Result<i64, ReductionError> {
    v.get(name)
        .copied()
        .ok_or_else(|| ReductionError::MissingEntry(name.to_string()))
}

/// The per-atom configuration order: equal on the gadget's counter, its
/// quotient parameter and all `t` parameters; component-wise at most on
/// the gadget's three location counters and on `z`.
pub fn cover_order_leq(
    out: &ReductionOutput,
    atom_index: usize,
    c: &Configuration,
    d: &Configuration,
) -> Result<bool, ReductionError> {
    let gadget = &out.atoms[atom_index];
    if entry(&c.g, &gadget.shared)? != entry(&d.g, &gadget.shared)? {
        return Ok(false);
    }
    if let Some(dp) = &gadget.d_param {
        if entry(&c.p, dp)? != entry(&d.p, dp)? {
            return Ok(false);
        }
    }
    for k in 1..=out.existential_count {
        let t = t_name(k);
        if entry(&c.p, &t)? != entry(&d.p, &t)? {
            return Ok(false);
        }
    }
    for loc in [&gadget.start, &gadget.mid, &gadget.end] {
        if entry(&c.kappa, loc)? > entry(&d.kappa, loc)? {
            return Ok(false);
        }
    }
    Ok(entry(&c.p, "z")? <= entry(&d.p, "z")?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cover::covers_from;
    use crate::pad::{parse_formula, CompareAtom};
    use crate::sketch::instantiate;
    use crate::ta::{is_acyclic, validate};

    fn eq2() -> PadFormula {
        parse_formula("forall x1 x2 exists y1 y2 : (x1 | y1) or (x2 | y1 and x1 = 2*x2 + y2)")
            .unwrap()
    }

    #[test]
    fn atom_tags_are_spreadsheet_style() {
        assert_eq!(atom_tag(0), "A");
        assert_eq!(atom_tag(25), "Z");
        assert_eq!(atom_tag(26), "AA");
        assert_eq!(atom_tag(27), "AB");
    }

    #[test]
    fn divisibility_gadget_guards() {
        let out = compile_single_atom(&Atom::Divides { j: 1, k: 1 }, 2, 2);
        assert_eq!(out.sketch.locations, vec!["start_A", "l_A", "end_A"]);
        assert_eq!(out.sketch.shared, vec!["v_A"]);
        assert_eq!(out.sketch.env.params, vec!["t1", "t2", "d_A", "z"]);

        let ids: Vec<_> = out.sketch.rules.iter().map(|r| r.id.as_str()).collect();
        assert_eq!(ids, vec!["inc_A", "skip_A", "check_A"]);

        // v_A = s1*d_A and v_A = t1, stored as four >=/< atoms.
        let check = &out.sketch.rules[2];
        assert_eq!(check.guards.len(), 4);
        assert_eq!(check.guards[0].cmp, GuardOp::Ge);
        assert_eq!(
            check.guards[0].rhs_param_coeffs["d_A"],
            AffineCoeff::indet("s1")
        );
        assert_eq!(check.guards[1].cmp, GuardOp::Lt);
        assert_eq!(check.guards[1].rhs_const, AffineCoeff::constant(1));
        assert_eq!(
            check.guards[2].rhs_param_coeffs["t1"],
            AffineCoeff::constant(1)
        );
        assert_eq!(check.guards[3].rhs_const, AffineCoeff::constant(1));
    }

    #[test]
    fn comparison_gadget_guards() {
        // x1 = 2*x2 + y2.
        let atom = Atom::Compare(CompareAtom::new(
            LinearPoly::x(1),
            CompareOp::Eq,
            LinearPoly::default().add_x(2, 2).add_y(2, 1),
        ));
        let out = compile_single_atom(&atom, 2, 2);
        let check = &out.sketch.rules[2];
        assert_eq!(check.guards.len(), 4);
        // v = s1.
        assert_eq!(check.guards[0].rhs_const, AffineCoeff::indet("s1"));
        assert_eq!(
            check.guards[1].rhs_const,
            AffineCoeff::indet("s1").add_const(1)
        );
        // v = 2*s2 + t2.
        let two_s2 = AffineCoeff::constant(0).add_term("s2", 2);
        assert_eq!(check.guards[2].rhs_const, two_s2.clone());
        assert_eq!(
            check.guards[2].rhs_param_coeffs["t2"],
            AffineCoeff::constant(1)
        );
        assert_eq!(check.guards[3].rhs_const, two_s2.add_const(1));
    }

    #[test]
    fn zero_compare_gadget_is_coverable_without_increments() {
        let atom = Atom::Compare(CompareAtom::new(
            LinearPoly::constant(0),
            CompareOp::Eq,
            LinearPoly::constant(0),
        ));
        let out = compile_single_atom(&atom, 1, 1);
        let ta = instantiate(&out.sketch, &out.assignment_from_x(&[0])).unwrap();
        let c0 = witness_config(&out, WitnessScope::Atom(0), &[0], &[0]).unwrap();
        assert_eq!(c0.p["z"], 1);
        let run = covers_from(&ta, &c0, &out.target, None, 10_000)
            .unwrap()
            .unwrap();
        assert_eq!(run, vec!["skip_A", "check_A"]);
    }

    #[test]
    fn formula_compilation_matches_the_worked_example() {
        let out = compile_formula(&eq2());
        assert_eq!(
            out.sketch.locations,
            vec![
                "start", "start_A", "l_A", "end_A", "start_B", "l_B", "end_B", "start_C", "l_C",
                "end_C", "end"
            ]
        );
        assert_eq!(out.sketch.env.params, vec!["t1", "t2", "d_A", "d_B", "z"]);
        assert_eq!(out.indeterminates(), vec!["s1", "s2"]);
        assert_eq!(out.sketch.initial, vec!["start"]);
        assert_eq!(out.target, "end");
        assert_eq!(out.disjunct_atoms, vec![vec![0], vec![1, 2]]);

        let ids: Vec<_> = out.sketch.rules.iter().map(|r| r.id.as_str()).collect();
        assert_eq!(
            ids,
            vec![
                "enter_A", "inc_A", "skip_A", "check_A", "exit_A", "enter_B", "inc_B", "skip_B",
                "check_B", "link_B_C", "inc_C", "skip_C", "check_C", "exit_C"
            ]
        );

        let ta = instantiate(&out.sketch, &out.assignment_from_x(&[1, 1])).unwrap();
        assert!(validate(&ta).is_empty());
        assert!(is_acyclic(&ta));
    }

    #[test]
    fn smallest_formula_has_five_locations() {
        let f = parse_formula("forall x1 exists y1 : (x1 | y1)").unwrap();
        let out = compile_formula(&f);
        assert_eq!(out.sketch.locations.len(), 5);
    }

    #[test]
    fn three_atom_disjunct_chains_with_two_links() {
        let f = parse_formula("forall x1 exists y1 : (x1 | y1 and x1 = y1 and x1 <= y1)").unwrap();
        let atoms: Vec<Atom> = f.disjuncts[0].atoms().collect();
        let out = compile_single_disjunct(&atoms, 1, 1);
        assert_eq!(out.sketch.locations.len(), 9);
        let links: Vec<_> = out
            .sketch
            .rules
            .iter()
            .filter(|r| r.id.starts_with("link_"))
            .map(|r| r.id.as_str())
            .collect();
        assert_eq!(links, vec!["link_A_B", "link_B_C"]);

        let single = compile_single_disjunct(&atoms[..1], 1, 1);
        assert!(single
            .sketch
            .rules
            .iter()
            .all(|r| !r.id.starts_with("link_")));
    }

    #[test]
    fn wrapup_adds_escape_rules_per_indeterminate() {
        let out = compile_formula(&eq2());
        let wrapped = nonneg_to_general(&out.sketch, &out.target).unwrap();
        assert_eq!(wrapped.initial, vec!["begin"]);
        assert!(wrapped.shared.contains(&"check".to_string()));
        let escapes: Vec<_> = wrapped
            .rules
            .iter()
            .filter(|r| r.id.starts_with("escape_"))
            .collect();
        assert_eq!(escapes.len(), 2);
        assert!(escapes.iter().all(|r| r.to == "end" && r.from == "begin"));
        // check is never incremented.
        assert!(wrapped
            .rules
            .iter()
            .all(|r| r.update.get("check").copied().unwrap_or(0) == 0));

        let ta = instantiate(&wrapped, &Assignment::of(&[("s1", 1), ("s2", 1)])).unwrap();
        assert!(is_acyclic(&ta));
    }

    #[test]
    fn wrapup_with_no_indeterminates_only_adds_the_entry_rule() {
        let f = parse_formula("exists y1 : (y1 = y1)").unwrap();
        let out = compile_formula(&f);
        let wrapped = nonneg_to_general(&out.sketch, &out.target).unwrap();
        assert_eq!(wrapped.rules.len(), out.sketch.rules.len() + 1);
        assert_eq!(wrapped.rules[0].id, "begin_start");
    }

    #[test]
    fn wrapup_requires_single_initial_location() {
        let out = compile_formula(&eq2());
        let mut sketch = out.sketch.clone();
        sketch.initial.push("end".into());
        assert_eq!(
            nonneg_to_general(&sketch, "end").unwrap_err(),
            ReductionError::MultipleInitialLocations
        );
    }

    #[test]
    fn negative_assignment_escapes_in_one_step() {
        let out = compile_formula(&eq2());
        let wrapped = nonneg_to_general(&out.sketch, &out.target).unwrap();
        let ta = instantiate(&wrapped, &Assignment::of(&[("s1", -1), ("s2", 0)])).unwrap();
        let mut p: Valuation = ta.env.params.iter().map(|q| (q.clone(), 0)).collect();
        p.insert("z".into(), 1);
        let c0 = Configuration::initial(&ta, &[("begin", 1)], p).unwrap();
        let run = covers_from(&ta, &c0, "end", Some(1), 1000)
            .unwrap()
            .unwrap();
        assert_eq!(run, vec!["escape_s1"]);
    }

    #[test]
    fn witness_config_for_divisibility() {
        let out = compile_single_atom(&Atom::Divides { j: 1, k: 1 }, 2, 2);
        let c = witness_config(&out, WitnessScope::Atom(0), &[2, 0], &[4, 0]).unwrap();
        assert_eq!(c.kappa["start_A"], 5);
        assert_eq!(c.p["z"], 5);
        assert_eq!(c.p["t1"], 4);
        assert_eq!(c.p["d_A"], 2);
        assert!(c.g.values().all(|v| *v == 0));

        let err = witness_config(&out, WitnessScope::Atom(0), &[2, 0], &[3, 0]).unwrap_err();
        assert!(matches!(err, ReductionError::AtomFalse(_)));
    }

    #[test]
    fn witness_config_for_comparison() {
        // x1 = 2*x2 + y2 with X=(4,1), Y=(0,2): lhs value 4, so z = 5.
        let atom = Atom::Compare(CompareAtom::new(
            LinearPoly::x(1),
            CompareOp::Eq,
            LinearPoly::default().add_x(2, 2).add_y(2, 1),
        ));
        let out = compile_single_atom(&atom, 2, 2);
        let c = witness_config(&out, WitnessScope::Atom(0), &[4, 1], &[0, 2]).unwrap();
        assert_eq!(c.kappa["start_A"], 5);
        assert_eq!(c.p["z"], 5);
    }

    #[test]
    fn witness_config_for_the_formula_scope() {
        let out = compile_formula(&eq2());
        let c = witness_config(&out, WitnessScope::Formula, &[2, 3], &[2, 3]).unwrap();
        assert_eq!(c.p["t1"], 2);
        assert_eq!(c.p["t2"], 3);
        assert_eq!(c.p["z"], 3);
        assert_eq!(c.p["d_A"], 1);
        assert_eq!(c.p["d_B"], 1);
        assert_eq!(c.kappa["start"], 3);
    }

    #[test]
    fn quotient_convention() {
        assert_eq!(quotient(0, 0), 0);
        assert_eq!(quotient(2, 4), 2);
        let out = compile_single_atom(&Atom::Divides { j: 1, k: 1 }, 1, 1);
        let c = witness_config(&out, WitnessScope::Atom(0), &[0], &[0]).unwrap();
        assert_eq!(c.p["d_A"], 0);
        assert_eq!(c.p["z"], 1);
    }

    #[test]
    fn cover_order_examples() {
        let out = compile_formula(&eq2());
        let c = witness_config(&out, WitnessScope::Formula, &[2, 3], &[2, 3]).unwrap();
        assert!(cover_order_leq(&out, 0, &c, &c).unwrap());

        let mut d = c.clone();
        *d.kappa.get_mut("start_A").unwrap() += 1;
        assert!(cover_order_leq(&out, 0, &c, &d).unwrap());
        assert!(!cover_order_leq(&out, 0, &d, &c).unwrap());

        let mut e = c.clone();
        e.p.insert("d_A".into(), 2);
        assert!(!cover_order_leq(&out, 0, &c, &e).unwrap());
    }
}
