//! Grid-equivalence suites: formula truth versus gadget coverability.
//!
//! Each suite checks one layer of the compiler on a bounded grid of
//! valuations, comparing the arithmetic truth of formulas (evaluated
//! directly) against coverability in the compiled gadgets (decided by the
//! explicit-state search). The two routes are independent: a defect in
//! either the compiler or the search shows up as a disagreement.
//!
//! The coverability side quantifies over simple start configurations with
//! bounded `z` and quotient parameters. The bounds are sufficient for the
//! positive direction because the witness configurations built in
//! [`crate::reduction`] fall inside them; for the negative direction any
//! cover found would already certify truth, so absence within the bounds
//! is the strongest desk-scale check available.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::cover::covers_from;
use crate::pad::{self, Atom};
use crate::reduction::{
    compile_formula, compile_single_atom, compile_single_disjunct, cover_order_leq,
    nonneg_to_general, quotient, witness_config, ReductionOutput, WitnessScope,
};
use crate::sketch::{instantiate, Assignment};
use crate::ta::{self, Configuration, ThresholdAutomaton, Valuation};

/// The running example formula; its compilation is the `fig7` built-in
/// model of the command-line tool.
pub const FIG7_FORMULA: &str =
    "forall x1 x2 exists y1 y2 : (x1 | y1) or (x2 | y1 and x1 = 2*x2 + y2)";

const SEARCH_CAP: usize = 200_000;

/// Result of one suite run.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SuiteOutcome {
    pub suite: &'static str,
    pub cases: usize,
    pub failures: Vec<String>,
}

impl SuiteOutcome {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

/// An atom together with the quantifier arities it was written under.
#[derive(Debug, Clone)]
pub struct CorpusAtom {
    pub atom: Atom,
    pub n: usize,
    pub m: usize,
    pub text: &'static str,
}

fn corpus_atom(text: &'static str) -> CorpusAtom {
    let f = pad::parse_formula(text).expect("corpus formula parses");
    let atom = f.disjuncts[0].atoms().next().expect("one atom");
    CorpusAtom {
        atom,
        n: f.n,
        m: f.m,
        text,
    }
}

/// The atom corpus: five divisibilities and six comparisons covering every
/// comparison operator.
pub fn atom_corpus() -> Vec<CorpusAtom> {
    [
        "forall x1 exists y1 : (x1 | y1)",
        "forall x1 x2 exists y1 y2 : (x2 | y1)",
        "forall x1 x2 exists y1 y2 : (x1 | y2)",
        "forall x1 x2 exists y1 y2 : (x2 | y2)",
        "forall x1 x2 x3 exists y1 y2 : (x3 | y1)",
        "forall x1 x2 exists y1 y2 : (x1 = 2*x2 + y2)",
        "forall x1 x2 exists y1 y2 : (x1 + y1 >= 2*x2 + 1)",
        "forall x1 x2 exists y1 y2 : (2*x1 < y1 + y2)",
        "forall x1 exists y1 : (x1 + 1 <= y1)",
        "forall x1 x2 exists y1 y2 : (x2 + y2 > x1)",
        "forall x1 exists y1 : (0 = 0)",
    ]
    .into_iter()
    .map(corpus_atom)
    .collect()
}

/// Two-atom disjuncts for the chain suite.
pub fn disjunct_corpus() -> Vec<(Vec<Atom>, usize, usize, &'static str)> {
    [
        "forall x1 x2 exists y1 y2 : (x1 | y1 and x2 | y2)",
        "forall x1 x2 exists y1 y2 : (x1 | y1 and x1 = 2*x2 + y2)",
        "forall x1 x2 exists y1 y2 : (x2 | y1 and x1 = 2*x2 + y2)",
        "forall x1 x2 exists y1 y2 : (x1 < y1 and x2 >= y2)",
        "forall x1 x2 exists y1 y2 : (x1 | y2 and x1 + x2 <= y1)",
        "forall x1 x2 exists y1 y2 : (x1 = x1 and x2 | y1)",
    ]
    .into_iter()
    .map(|text| {
        let f = pad::parse_formula(text).expect("corpus formula parses");
        let atoms: Vec<Atom> = f.disjuncts[0].atoms().collect();
        (atoms, f.n, f.m, text)
    })
    .collect()
}

pub fn fig7_output() -> ReductionOutput {
    compile_formula(&pad::parse_formula(FIG7_FORMULA).expect("running example parses"))
}

fn grid(dims: usize, bound: i64) -> Vec<Vec<i64>> {
    let mut out = vec![Vec::new()];
    for _ in 0..dims {
        let mut next = Vec::new();
        for prefix in &out {
            for v in 0..=bound {
                let mut row = prefix.clone();
                row.push(v);
                next.push(row);
            }
        }
        out = next;
    }
    out
}

/// A simple configuration: all `z` processes at `home`, shared variables 0.
fn simple_config(
    out: &ReductionOutput,
    home: &str,
    z: i64,
    t_vals: &[i64],
    d_vals: &[(String, i64)],
) -> Configuration {
    let mut p = Valuation::new();
    for (k, y) in t_vals.iter().enumerate() {
        p.insert(crate::reduction::t_name(k + 1), *y);
    }
    for g in &out.atoms {
        if let Some(d) = &g.d_param {
            p.insert(d.clone(), 0);
        }
    }
    for (d, v) in d_vals {
        p.insert(d.clone(), *v);
    }
    p.insert("z".into(), z);
    Configuration {
        kappa: out
            .sketch
            .locations
            .iter()
            .map(|l| (l.clone(), if l == home { z } else { 0 }))
            .collect(),
        g: out.sketch.shared.iter().map(|x| (x.clone(), 0)).collect(),
        p,
    }
}

/// The per-atom witness size: the value the gadget counter must reach.
fn atom_level(atom: &Atom, xs: &[i64], ys: &[i64]) -> i64 {
    match atom {
        Atom::Divides { k, .. } => ys[*k - 1],
        Atom::Compare(cmp) => cmp.lhs.eval(xs, ys),
    }
}

/// Bounded coverability over the family of simple configurations at the
/// chain entry with `t = Y`, `1 <= z <= z_max` and every quotient
/// parameter at most `d_max`.
fn chain_coverable(
    out: &ReductionOutput,
    ta: &ThresholdAutomaton,
    ys: &[i64],
    z_max: i64,
    d_max: i64,
) -> bool {
    let home = out.atoms[out.disjunct_atoms[0][0]].start.clone();
    let d_names: Vec<String> = out.atoms.iter().filter_map(|g| g.d_param.clone()).collect();
    let d_grid = grid(d_names.len(), d_max);
    for z in 1..=z_max.max(1) {
        for ds in &d_grid {
            let d_vals: Vec<(String, i64)> =
                d_names.iter().cloned().zip(ds.iter().copied()).collect();
            let c0 = simple_config(out, &home, z, ys, &d_vals);
            let found = covers_from(ta, &c0, &out.target, None, SEARCH_CAP)
                .expect("bounded gadget search stays within caps");
            if found.is_some() {
                return true;
            }
        }
    }
    false
}

/// Checks, over all `X, Y` grids with entries up to `max_val`, that an
/// atom's truth coincides with coverability of its gadget exit from a
/// simple configuration, and that the witness configuration covers
/// whenever the atom is true.
pub fn lemma1(max_val: i64) -> SuiteOutcome {
    let mut cases = 0;
    let mut failures = Vec::new();
    for entry in atom_corpus() {
        let out = compile_single_atom(&entry.atom, entry.n, entry.m);
        let d_max = max_val * max_val;
        for xs in grid(entry.n, max_val) {
            let ta = instantiate(&out.sketch, &out.assignment_from_x(&xs))
                .expect("gadget factors are constant");
            for ys in grid(entry.m, max_val) {
                cases += 1;
                let truth = entry.atom.eval(&xs, &ys);
                let z_max = atom_level(&entry.atom, &xs, &ys) + 1;
                let coverable = chain_coverable(&out, &ta, &ys, z_max, d_max);
                if truth != coverable {
                    failures.push(format!(
                        "{} at X={xs:?} Y={ys:?}: truth={truth} coverable={coverable}",
                        entry.text
                    ));
                    continue;
                }
                if truth {
                    let witness = witness_config(&out, WitnessScope::Atom(0), &xs, &ys)
                        .expect("atom is true");
                    let run = covers_from(&ta, &witness, &out.target, None, SEARCH_CAP)
                        .expect("witness search stays within caps");
                    if run.is_none() {
                        failures.push(format!(
                            "{} at X={xs:?} Y={ys:?}: witness configuration does not cover",
                            entry.text
                        ));
                    }
                }
            }
        }
    }
    SuiteOutcome {
        suite: "lemma1",
        cases,
        failures,
    }
}

/// Checks two-atom chains: conjunction truth versus coverability of the
/// second gadget's exit from the chain entry.
pub fn lemma2(max_val: i64) -> SuiteOutcome {
    let mut cases = 0;
    let mut failures = Vec::new();
    for (atoms, n, m, text) in disjunct_corpus() {
        let out = compile_single_disjunct(&atoms, n, m);
        let d_max = max_val * max_val;
        for xs in grid(n, max_val) {
            let ta = instantiate(&out.sketch, &out.assignment_from_x(&xs))
                .expect("gadget factors are constant");
            for ys in grid(m, max_val) {
                cases += 1;
                let truth = atoms.iter().all(|a| a.eval(&xs, &ys));
                let z_max = atoms
                    .iter()
                    .map(|a| atom_level(a, &xs, &ys) + 1)
                    .max()
                    .unwrap_or(1);
                let coverable = chain_coverable(&out, &ta, &ys, z_max, d_max);
                if truth != coverable {
                    failures.push(format!(
                        "{text} at X={xs:?} Y={ys:?}: truth={truth} coverable={coverable}"
                    ));
                    continue;
                }
                if truth {
                    // The proof-shaped start point: z at the maximum witness
                    // size, quotient parameters at the actual quotients.
                    let d_vals: Vec<(String, i64)> = out
                        .atoms
                        .iter()
                        .filter_map(|g| {
                            let d = g.d_param.clone()?;
                            let Atom::Divides { j, k } = &g.atom else {
                                return None;
                            };
                            Some((d, quotient(xs[*j - 1], ys[*k - 1])))
                        })
                        .collect();
                    let home = out.atoms[out.disjunct_atoms[0][0]].start.clone();
                    let c0 = simple_config(&out, &home, z_max, &ys, &d_vals);
                    let run = covers_from(&ta, &c0, &out.target, None, SEARCH_CAP)
                        .expect("witness search stays within caps");
                    if run.is_none() {
                        failures.push(format!(
                            "{text} at X={xs:?} Y={ys:?}: proof-shaped start does not cover"
                        ));
                    }
                }
            }
        }
    }
    SuiteOutcome {
        suite: "lemma2",
        cases,
        failures,
    }
}

/// Randomized check of the step-monotonicity property: if `C -> C'` fires
/// a gadget rule and `C` is below `D` in the per-atom order, the same rule
/// fires at `D` and the successors stay ordered.
pub fn monotonicity(trials: usize, seed: u64) -> SuiteOutcome {
    let out = fig7_output();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut cases = 0;
    let mut failures = Vec::new();

    'trials: while cases < trials {
        let xs = [rng.random_range(-3..=3), rng.random_range(-3..=3)];
        let ta = instantiate(&out.sketch, &out.assignment_from_x(&xs))
            .expect("gadget factors are constant");

        // Random configuration over the gadget locations.
        let mut kappa = Valuation::new();
        for l in &out.sketch.locations {
            kappa.insert(l.clone(), rng.random_range(0..=2));
        }
        let z: i64 = kappa.values().sum();
        let mut p = Valuation::new();
        for q in &out.sketch.env.params {
            p.insert(q.clone(), rng.random_range(0..=3));
        }
        p.insert("z".into(), z);
        let mut g = Valuation::new();
        for v in &out.sketch.shared {
            g.insert(v.clone(), rng.random_range(0..=3));
        }
        let c = Configuration { kappa, g, p };

        // Pick an enabled gadget rule (not a star or link rule).
        let mut enabled = Vec::new();
        for (atom_idx, gadget) in out.atoms.iter().enumerate() {
            for prefix in ["inc", "skip", "check"] {
                let id = format!("{prefix}_{}", gadget.tag);
                let rule = ta.rule(&id).expect("gadget rule exists");
                if ta::rule_enabled(&ta, &c, rule).expect("valuations are total") {
                    enabled.push((atom_idx, id));
                }
            }
        }
        if enabled.is_empty() {
            continue 'trials;
        }
        let (atom_idx, rule_id) = enabled[rng.random_range(0..enabled.len())].clone();
        let rule = ta.rule(&rule_id).unwrap().clone();
        let c_next = ta::step(&ta, &c, &rule).expect("rule is enabled");

        // Random D above C: more processes anywhere, other gadgets'
        // counters and quotients re-rolled, everything the order pins kept.
        let gadget = &out.atoms[atom_idx];
        let mut d = c.clone();
        for l in &out.sketch.locations {
            let extra = if [&gadget.start, &gadget.mid, &gadget.end].contains(&l) {
                rng.random_range(0..=2)
            } else {
                rng.random_range(0..=1)
            };
            *d.kappa.get_mut(l).unwrap() += extra;
        }
        d.p.insert("z".into(), d.kappa.values().sum());
        for other in &out.atoms {
            if other.tag == gadget.tag {
                continue;
            }
            d.g.insert(other.shared.clone(), rng.random_range(0..=3));
            if let Some(dp) = &other.d_param {
                d.p.insert(dp.clone(), rng.random_range(0..=3));
            }
        }

        cases += 1;
        if !cover_order_leq(&out, atom_idx, &c, &d).expect("entries present") {
            failures.push(format!("trial {cases}: generated D is not above C"));
            continue;
        }
        if !ta::rule_enabled(&ta, &d, &rule).expect("valuations are total") {
            failures.push(format!("trial {cases}: rule {rule_id} not enabled at D"));
            continue;
        }
        let d_next = ta::step(&ta, &d, &rule).expect("just checked");
        if !cover_order_leq(&out, atom_idx, &c_next, &d_next).expect("entries present") {
            failures.push(format!("trial {cases}: successors lost the order"));
        }
    }
    SuiteOutcome {
        suite: "monotonicity",
        cases,
        failures,
    }
}

/// For every assignment in `[0, max_mu]^2`, the worked example's witness
/// configuration covers `end`, matching the bounded truth of the formula.
pub fn third_phase(max_mu: i64) -> SuiteOutcome {
    let out = fig7_output();
    let formula = pad::parse_formula(FIG7_FORMULA).unwrap();
    let mut cases = 0;
    let mut failures = Vec::new();

    let bounded_truth = pad::bounded_validity(&formula, 3, 3);
    if !bounded_truth {
        failures.push("the running example is bounded-false, expected bounded-true".into());
    }
    for mu in grid(2, max_mu) {
        cases += 1;
        let ta = instantiate(&out.sketch, &out.assignment_from_x(&mu))
            .expect("gadget factors are constant");
        let witness =
            witness_config(&out, WitnessScope::Formula, &mu, &mu).expect("valuations in range");
        let run = covers_from(&ta, &witness, &out.target, None, SEARCH_CAP)
            .expect("witness search stays within caps");
        if run.is_none() {
            failures.push(format!(
                "mu={mu:?}: witness configuration does not cover end"
            ));
        }
    }
    SuiteOutcome {
        suite: "third-phase",
        cases,
        failures,
    }
}

/// The wrap-up gadget: every assignment with a negative component escapes
/// to the target in one step, and no rule increments the fresh counter.
pub fn wrapup(range: i64) -> SuiteOutcome {
    let out = fig7_output();
    let wrapped = nonneg_to_general(&out.sketch, &out.target).expect("single initial location");
    let mut cases = 0;
    let mut failures = Vec::new();

    if wrapped
        .rules
        .iter()
        .any(|r| r.update.get("check").copied().unwrap_or(0) != 0)
    {
        failures.push("a rule increments `check`".into());
    }

    for s1 in -range..=range {
        for s2 in -range..=range {
            if s1 >= 0 && s2 >= 0 {
                continue;
            }
            cases += 1;
            let ta = match instantiate(&wrapped, &Assignment::of(&[("s1", s1), ("s2", s2)])) {
                Ok(ta) => ta,
                Err(err) => {
                    failures.push(format!("mu=({s1},{s2}): {err}"));
                    continue;
                }
            };
            let mut p: Valuation = ta.env.params.iter().map(|q| (q.clone(), 0)).collect();
            p.insert("z".into(), 1);
            let c0 = Configuration::initial(&ta, &[("begin", 1)], p).expect("well-formed start");
            match covers_from(&ta, &c0, &out.target, Some(1), SEARCH_CAP) {
                Ok(Some(run)) if run.len() == 1 && run[0].starts_with("escape_") => {}
                Ok(Some(run)) => {
                    failures.push(format!("mu=({s1},{s2}): unexpected witness {run:?}"))
                }
                Ok(None) => failures.push(format!("mu=({s1},{s2}): no one-step escape")),
                Err(err) => failures.push(format!("mu=({s1},{s2}): {err}")),
            }
        }
    }
    SuiteOutcome {
        suite: "wrapup",
        cases,
        failures,
    }
}
