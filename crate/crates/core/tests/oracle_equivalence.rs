//! Coverability search against brute-force interleaving enumeration.

mod common;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use common::{oracle_covers, oracle_reachable, random_acyclic_automaton};
use tasynth_core::cover::{acyclic_horizon, covers_from, reachable_configs};
use tasynth_core::pad::{parse_formula, Atom};
use tasynth_core::reduction::{compile_single_atom, WitnessScope};
use tasynth_core::sketch::instantiate;
use tasynth_core::ta::{self, is_acyclic, Configuration, Rule, ThresholdAutomaton, Valuation};

#[test]
fn search_agrees_with_interleaving_enumeration() {
    let mut rng = ChaCha8Rng::seed_from_u64(0xC0FFEE);
    for round in 0..100 {
        let (ta, c0) = random_acyclic_automaton(&mut rng, 3, 3);
        let target = ta.locations[rng.random_range(0..ta.locations.len())].clone();
        let n: i64 = c0.kappa.values().sum();
        let bound = acyclic_horizon(&ta, n);

        let found = covers_from(&ta, &c0, &target, None, 1_000_000)
            .unwrap()
            .is_some();
        // One slack step past the bound doubles as the run-length check.
        let expected = oracle_covers(&ta, &c0, &target, bound + 1);
        assert_eq!(
            found, expected,
            "round {round}: target {target}\n{ta:#?}\n{c0:#?}"
        );
    }
}

#[test]
fn witness_is_shortest_and_horizon_is_monotone() {
    let mut rng = ChaCha8Rng::seed_from_u64(0xBEEF);
    let mut checked = 0;
    while checked < 40 {
        let (ta, c0) = random_acyclic_automaton(&mut rng, 3, 3);
        let target = ta.locations[rng.random_range(0..ta.locations.len())].clone();
        let Some(run) = covers_from(&ta, &c0, &target, None, 1_000_000).unwrap() else {
            continue;
        };
        checked += 1;
        let h = run.len() as u64;
        if h > 0 {
            // Shortest: one step fewer finds nothing.
            assert!(covers_from(&ta, &c0, &target, Some(h - 1), 1_000_000)
                .unwrap()
                .is_none());
        }
        for extra in [0, 1, 5] {
            let again = covers_from(&ta, &c0, &target, Some(h + extra), 1_000_000).unwrap();
            assert_eq!(again.map(|r| r.len() as u64), Some(h));
        }
        // Witness replays and covers.
        let end = ta::apply_run(&ta, &c0, &run).unwrap();
        assert!(end.kappa[&target] > 0);
    }
}

#[test]
fn reachable_sets_match_enumeration() {
    let mut rng = ChaCha8Rng::seed_from_u64(0xFEED);
    for _ in 0..60 {
        let (ta, c0) = random_acyclic_automaton(&mut rng, 3, 2);
        for horizon in [0u64, 1, 2, 4] {
            let bfs = reachable_configs(&ta, &c0, horizon, 1_000_000).unwrap();
            let expected = oracle_reachable(&ta, &c0, horizon);
            let got: std::collections::BTreeSet<_> =
                bfs.iter().map(|c| (c.kappa.clone(), c.g.clone())).collect();
            assert_eq!(got.len(), bfs.len(), "search must not repeat states");
            assert_eq!(got, expected);
        }
    }
}

// Two processes at the entry of a blocked divisibility gadget: within two
// steps the processes split over the inc/skip branches. The expected count
// is frozen from the interleaving oracle.
#[test]
fn gadget_two_process_frontier() {
    let out = compile_single_atom(&Atom::Divides { j: 1, k: 1 }, 1, 1);
    let ta = instantiate(&out.sketch, &out.assignment_from_x(&[1])).unwrap();
    let p: Valuation = [("t1".into(), 5), ("d_A".into(), 5), ("z".into(), 2)].into();
    let c0 = Configuration::initial(&ta, &[("start_A", 2)], p).unwrap();

    let oracle = oracle_reachable(&ta, &c0, 2);
    let bfs = reachable_configs(&ta, &c0, 2, 10_000).unwrap();
    assert_eq!(bfs.len(), oracle.len());
    assert_eq!(bfs.len(), 6);
}

#[test]
fn acyclicity_agrees_with_transitive_closure() {
    fn oracle_acyclic(nloc: usize, edges: &[(usize, usize)]) -> bool {
        let mut reach = vec![vec![false; nloc]; nloc];
        for &(a, b) in edges {
            reach[a][b] = true;
        }
        for k in 0..nloc {
            for i in 0..nloc {
                for j in 0..nloc {
                    reach[i][j] = reach[i][j] || (reach[i][k] && reach[k][j]);
                }
            }
        }
        (0..nloc).all(|i| !reach[i][i])
    }

    let mut rng = ChaCha8Rng::seed_from_u64(0xACDC);
    for _ in 0..200 {
        let nloc = rng.random_range(1..=8usize);
        let nedges = rng.random_range(0..=10usize);
        let edges: Vec<(usize, usize)> = (0..nedges)
            .map(|_| (rng.random_range(0..nloc), rng.random_range(0..nloc)))
            .collect();
        let locations: Vec<String> = (0..nloc).map(|i| format!("l{i}")).collect();
        let ta = ThresholdAutomaton {
            env: tasynth_core::ta::Environment {
                params: vec![],
                resilience: vec![],
                size_fn: tasynth_core::ta::LinearExpr::constant(0),
            },
            locations: locations.clone(),
            initial: vec![locations[0].clone()],
            shared: vec![],
            rules: edges
                .iter()
                .enumerate()
                .map(|(i, (a, b))| {
                    Rule::new(
                        format!("r{i}"),
                        locations[*a].clone(),
                        locations[*b].clone(),
                    )
                })
                .collect(),
        };
        assert_eq!(is_acyclic(&ta), oracle_acyclic(nloc, &edges), "{edges:?}");
    }
}

// Compiled formulas are always valid, acyclic sketches.
#[test]
fn random_formulas_compile_to_acyclic_sketches() {
    let mut rng = ChaCha8Rng::seed_from_u64(0xF0F0);
    for _ in 0..50 {
        let n = rng.random_range(1..=2usize);
        let m = rng.random_range(1..=2usize);
        let mut disjuncts = Vec::new();
        for _ in 0..rng.random_range(1..=3usize) {
            let mut atoms = Vec::new();
            for _ in 0..rng.random_range(1..=3usize) {
                if rng.random_bool(0.5) {
                    atoms.push(format!(
                        "x{} | y{}",
                        rng.random_range(1..=n),
                        rng.random_range(1..=m)
                    ));
                } else {
                    let ops = ["<", "<=", "=", ">", ">="];
                    atoms.push(format!(
                        "{}*x{} + {} {} y{}",
                        rng.random_range(0..=2i64),
                        rng.random_range(1..=n),
                        rng.random_range(0..=2i64),
                        ops[rng.random_range(0..ops.len())],
                        rng.random_range(1..=m)
                    ));
                }
            }
            disjuncts.push(format!("({})", atoms.join(" and ")));
        }
        let xvars: Vec<String> = (1..=n).map(|i| format!("x{i}")).collect();
        let yvars: Vec<String> = (1..=m).map(|j| format!("y{j}")).collect();
        let text = format!(
            "forall {} exists {} : {}",
            xvars.join(" "),
            yvars.join(" "),
            disjuncts.join(" or ")
        );
        let formula = parse_formula(&text).unwrap();
        let out = tasynth_core::reduction::compile_formula(&formula);
        let mu = out.assignment_from_x(&vec![1; n]);
        let ta = instantiate(&out.sketch, &mu).unwrap();
        assert!(ta::validate(&ta).is_empty(), "{text}");
        assert!(is_acyclic(&ta), "{text}");
    }
}

// The per-atom witness configuration always covers when the atom is true;
// checked against the enumeration oracle rather than the search.
#[test]
fn atom_witnesses_cover_via_the_oracle() {
    let atoms = [
        ("forall x1 exists y1 : (x1 | y1)", 1usize, 1usize),
        ("forall x1 exists y1 : (x1 + 1 <= y1)", 1, 1),
    ];
    for (text, n, m) in atoms {
        let formula = parse_formula(text).unwrap();
        let atom = formula.disjuncts[0].atoms().next().unwrap();
        let out = compile_single_atom(&atom, n, m);
        for x in 0..=2i64 {
            let ta = instantiate(&out.sketch, &out.assignment_from_x(&[x])).unwrap();
            for y in 0..=2i64 {
                if !atom.eval(&[x], &[y]) {
                    continue;
                }
                let witness = tasynth_core::reduction::witness_config(
                    &out,
                    WitnessScope::Atom(0),
                    &[x],
                    &[y],
                )
                .unwrap();
                let n_procs: i64 = witness.kappa.values().sum();
                let bound = acyclic_horizon(&ta, n_procs);
                assert!(
                    oracle_covers(&ta, &witness, &out.target, bound),
                    "{text} x={x} y={y}"
                );
            }
        }
    }
}
