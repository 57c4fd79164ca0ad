//! Shared generators and brute-force oracles for the integration tests.
//!
//! The oracles here deliberately avoid the production search machinery:
//! coverability is decided by enumerating every rule interleaving without
//! a visited set, and acyclicity by a transitive-closure scan.

// Each test target uses its own subset of these helpers.
#![allow(dead_code)]

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use tasynth_core::ta::{
    enabled_rules, step, Configuration, Environment, Guard, GuardOp, LinearExpr, Rule,
    ThresholdAutomaton, Valuation,
};

/// A random acyclic automaton (rules only go from lower to higher location
/// index) with a well-formed start configuration of at most `max_n`
/// processes.
pub fn random_acyclic_automaton(
    rng: &mut ChaCha8Rng,
    max_rules: usize,
    max_n: i64,
) -> (ThresholdAutomaton, Configuration) {
    let nloc = rng.random_range(2..=4usize);
    let locations: Vec<String> = (0..nloc).map(|i| format!("l{i}")).collect();
    let nshared = rng.random_range(1..=2usize);
    let shared: Vec<String> = (0..nshared).map(|i| format!("x{i}")).collect();
    let nparams = rng.random_range(0..=2usize);
    let params: Vec<String> = ["a", "b"][..nparams]
        .iter()
        .map(|s| s.to_string())
        .collect();

    // N is the first parameter when present, otherwise a small constant.
    let size_fn = if nparams > 0 {
        LinearExpr::var("a")
    } else {
        LinearExpr::constant(rng.random_range(0..=max_n))
    };
    let env = Environment {
        params: params.clone(),
        resilience: vec![],
        size_fn,
    };

    let nrules = rng.random_range(0..=max_rules);
    let mut rules = Vec::new();
    for i in 0..nrules {
        let from = rng.random_range(0..nloc - 1);
        let to = rng.random_range(from + 1..nloc);
        let mut rule = Rule::new(
            format!("r{i}"),
            locations[from].clone(),
            locations[to].clone(),
        );
        for _ in 0..rng.random_range(0..=2usize) {
            let var = shared[rng.random_range(0..nshared)].clone();
            let factor = rng.random_range(1..=2);
            let cmp = if rng.random_bool(0.7) {
                GuardOp::Ge
            } else {
                GuardOp::Lt
            };
            let mut rhs = LinearExpr::constant(rng.random_range(-1..=3));
            if nparams > 0 && rng.random_bool(0.5) {
                let p = params[rng.random_range(0..nparams)].clone();
                rhs = rhs.add_term(p, rng.random_range(-2..=2));
            }
            rule = rule.with_guard(Guard::new(var, factor, cmp, rhs));
        }
        for x in &shared {
            if rng.random_bool(0.4) {
                rule = rule.with_inc(x.clone());
            }
        }
        rules.push(rule);
    }

    let initial_count = rng.random_range(1..=nloc.min(2));
    let initial: Vec<String> = locations[..initial_count].to_vec();
    let ta = ThresholdAutomaton {
        env,
        locations,
        initial: initial.clone(),
        shared,
        rules,
    };

    let mut p = Valuation::new();
    if nparams > 0 {
        p.insert("a".into(), rng.random_range(0..=max_n));
        if nparams > 1 {
            p.insert("b".into(), rng.random_range(0..=3));
        }
    }
    let n = ta.env.size(&p).unwrap();
    let home = initial[rng.random_range(0..initial.len())].clone();
    let c0 = Configuration::initial(&ta, &[(home.as_str(), n)], p).unwrap();
    (ta, c0)
}

/// Exhaustive interleaving enumeration, no visited set: covers iff some
/// run of length at most `depth_limit` reaches the target. Asserts that no
/// enabled continuation exists past the limit, which checks the acyclic
/// run-length bound.
pub fn oracle_covers(
    ta: &ThresholdAutomaton,
    c: &Configuration,
    target: &str,
    depth_limit: u64,
) -> bool {
    if c.kappa[target] > 0 {
        return true;
    }
    let enabled = enabled_rules(ta, c).unwrap();
    if depth_limit == 0 {
        assert!(
            enabled.is_empty(),
            "a run exceeded the acyclic length bound"
        );
        return false;
    }
    for rule in enabled {
        let next = step(ta, c, rule).unwrap();
        if oracle_covers(ta, &next, target, depth_limit - 1) {
            return true;
        }
    }
    false
}

/// All distinct (location counters, shared values) pairs reachable within
/// `depth_limit` steps, found by plain interleaving enumeration.
pub fn oracle_reachable(
    ta: &ThresholdAutomaton,
    c: &Configuration,
    depth_limit: u64,
) -> std::collections::BTreeSet<(Valuation, Valuation)> {
    let mut seen = std::collections::BTreeSet::new();
    fn walk(
        ta: &ThresholdAutomaton,
        c: &Configuration,
        depth_limit: u64,
        seen: &mut std::collections::BTreeSet<(Valuation, Valuation)>,
    ) {
        seen.insert((c.kappa.clone(), c.g.clone()));
        if depth_limit == 0 {
            return;
        }
        for rule in enabled_rules(ta, c).unwrap() {
            let next = step(ta, c, rule).unwrap();
            walk(ta, &next, depth_limit - 1, seen);
        }
    }
    walk(ta, c, depth_limit, &mut seen);
    seen
}
