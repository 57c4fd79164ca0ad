//! Explicit-state coverability checking.
//!
//! The search is a breadth-first exploration of configurations with a
//! visited set keyed on the pair (location counters, shared values); the
//! parameter valuation is fixed per search. For acyclic automata every run
//! has at most `N * (|locations| - 1)` steps, so a search up to that
//! horizon is exhaustive and a negative answer is exact. For cyclic
//! automata shared counters can grow without bound, so an explicit horizon
//! is mandatory and negative verdicts are reported as bounded.

use std::collections::{BTreeMap, HashMap, VecDeque};

use thiserror::Error;

use crate::ta::{self, Configuration, Diagnostic, GuardOp, TaError, ThresholdAutomaton, Valuation};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CoverError {
    #[error("automaton is cyclic: an explicit search horizon is required")]
    HorizonRequired,

    #[error("state cap of {cap} configurations exceeded")]
    StateCapExceeded { cap: usize },

    #[error("unknown location `{0}`")]
    UnknownLocation(String),

    #[error(transparent)]
    Ta(#[from] TaError),
}

/// Bounds of a quantified coverability search.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SearchBounds {
    /// Every parameter ranges over `0..=param_bound`.
    pub param_bound: i64,
    /// Maximum run length per start point; `None` derives the exhaustive
    /// horizon for acyclic automata and is an error for cyclic ones.
    pub horizon: Option<u64>,
    /// Safety cap on configurations explored per start point.
    pub max_configs: usize,
}

impl SearchBounds {
    pub fn new(param_bound: i64) -> Self {
        SearchBounds {
            param_bound,
            horizon: None,
            max_configs: 1_000_000,
        }
    }

    pub fn with_horizon(mut self, horizon: u64) -> Self {
        self.horizon = Some(horizon);
        self
    }

    pub fn with_max_configs(mut self, cap: usize) -> Self {
        self.max_configs = cap;
        self
    }
}

/// A replayable proof that the target is coverable.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CoverWitness {
    pub p: Valuation,
    pub kappa0: Valuation,
    pub run: Vec<String>,
}

/// Outcome of a quantified coverability check.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CoverVerdict {
    Covered(CoverWitness),
    /// No start point within the bounds covers the target. `exact` is true
    /// only when the bounded search was provably exhaustive per valuation
    /// (acyclic automaton, sufficient horizon, no state cap hit); it never
    /// claims anything about valuations beyond `param_bound`.
    NotCoveredWithinBounds {
        bounds: SearchBounds,
        exact: bool,
    },
}

impl CoverVerdict {
    pub fn covered(&self) -> bool {
        matches!(self, CoverVerdict::Covered(_))
    }
}

/// Verdict plus search accounting, used for evidence reports.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CoverReport {
    pub verdict: CoverVerdict,
    pub valuations_checked: usize,
    pub start_points_checked: usize,
    pub diagnostics: Vec<Diagnostic>,
}

/// An initial configuration candidate: a parameter valuation together with
/// a distribution of the `N(p)` processes over the initial locations.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StartPoint {
    pub p: Valuation,
    pub kappa0: Valuation,
}

// ---------------------------------------------------------------------
// Compiled search machine: location/variable indices, guard right-hand
// sides pre-evaluated against the fixed parameter valuation.

struct GuardCheck {
    var: usize,
    factor: i64,
    ge: bool,
    rhs: i64,
}

struct MachineRule {
    from: usize,
    to: usize,
    guards: Vec<GuardCheck>,
    incs: Vec<usize>,
}

struct Machine {
    nloc: usize,
    rules: Vec<MachineRule>,
}

impl Machine {
    fn compile(ta: &ThresholdAutomaton, p: &Valuation) -> Result<Machine, TaError> {
        let loc_of: BTreeMap<&str, usize> = ta
            .locations
            .iter()
            .enumerate()
            .map(|(i, l)| (l.as_str(), i))
            .collect();
        let var_of: BTreeMap<&str, usize> = ta
            .shared
            .iter()
            .enumerate()
            .map(|(i, x)| (x.as_str(), i))
            .collect();
        let lookup_loc = |name: &str| {
            loc_of
                .get(name)
                .copied()
                .ok_or_else(|| TaError::UnknownVariable(name.to_string()))
        };
        let lookup_var = |name: &str| {
            var_of
                .get(name)
                .copied()
                .ok_or_else(|| TaError::UnknownVariable(name.to_string()))
        };
        let mut rules = Vec::with_capacity(ta.rules.len());
        for r in &ta.rules {
            let mut guards = Vec::with_capacity(r.guards.len());
            for g in &r.guards {
                guards.push(GuardCheck {
                    var: lookup_var(&g.var)?,
                    factor: g.factor,
                    ge: g.cmp == GuardOp::Ge,
                    rhs: g.rhs.eval(p)?,
                });
            }
            let mut incs = Vec::new();
            for (var, inc) in &r.update {
                if *inc != 0 {
                    incs.push(lookup_var(var)?);
                }
            }
            rules.push(MachineRule {
                from: lookup_loc(&r.from)?,
                to: lookup_loc(&r.to)?,
                guards,
                incs,
            });
        }
        Ok(Machine {
            nloc: ta.locations.len(),
            rules,
        })
    }

    /// State layout: `nloc` location counters followed by the shared values.
    fn enabled(&self, state: &[i64], rule: &MachineRule) -> Result<bool, TaError> {
        if state[rule.from] == 0 {
            return Ok(false);
        }
        for g in &rule.guards {
            let lhs = g
                .factor
                .checked_mul(state[self.nloc + g.var])
                .ok_or(TaError::Overflow)?;
            let holds = if g.ge { lhs >= g.rhs } else { lhs < g.rhs };
            if !holds {
                return Ok(false);
            }
        }
        Ok(true)
    }

    fn apply(&self, state: &[i64], rule: &MachineRule) -> Result<Vec<i64>, TaError> {
        let mut next = state.to_vec();
        for &var in &rule.incs {
            let slot = &mut next[self.nloc + var];
            *slot = slot.checked_add(1).ok_or(TaError::Overflow)?;
        }
        if rule.from != rule.to {
            next[rule.from] -= 1;
            next[rule.to] = next[rule.to].checked_add(1).ok_or(TaError::Overflow)?;
        }
        Ok(next)
    }
}

struct BfsNode {
    state: Vec<i64>,
    parent: u32,
    rule: u32,
    depth: u32,
}

const NO_PARENT: u32 = u32::MAX;

struct Bfs {
    nodes: Vec<BfsNode>,
    seen: HashMap<Vec<i64>, u32>,
    queue: VecDeque<u32>,
    cap: usize,
}

impl Bfs {
    fn new(start: Vec<i64>, cap: usize) -> Bfs {
        let mut bfs = Bfs {
            nodes: Vec::new(),
            seen: HashMap::new(),
            queue: VecDeque::new(),
            cap,
        };
        bfs.insert(start, NO_PARENT, 0, 0)
            .expect("cap is at least 1");
        bfs
    }

    /// Inserts a state if unseen; returns its node index.
    fn insert(
        &mut self,
        state: Vec<i64>,
        parent: u32,
        rule: u32,
        depth: u32,
    ) -> Result<Option<u32>, CoverError> {
        if self.seen.contains_key(&state) {
            return Ok(None);
        }
        if self.nodes.len() >= self.cap {
            return Err(CoverError::StateCapExceeded { cap: self.cap });
        }
        let idx = self.nodes.len() as u32;
        self.seen.insert(state.clone(), idx);
        self.nodes.push(BfsNode {
            state,
            parent,
            rule,
            depth,
        });
        self.queue.push_back(idx);
        Ok(Some(idx))
    }
}

fn bfs_search(
    machine: &Machine,
    start: Vec<i64>,
    target: Option<usize>,
    horizon: u64,
    max_configs: usize,
    mut collect: Option<&mut Vec<Vec<i64>>>,
) -> Result<Option<Vec<u32>>, CoverError> {
    let mut bfs = Bfs::new(start, max_configs.max(1));
    if let Some(sink) = collect.as_deref_mut() {
        sink.push(bfs.nodes[0].state.clone());
    }
    if let Some(t) = target {
        if bfs.nodes[0].state[t] > 0 {
            return Ok(Some(Vec::new()));
        }
    }
    while let Some(idx) = bfs.queue.pop_front() {
        let depth = bfs.nodes[idx as usize].depth;
        if u64::from(depth) >= horizon {
            continue;
        }
        for (ri, rule) in machine.rules.iter().enumerate() {
            let state = &bfs.nodes[idx as usize].state;
            if !machine.enabled(state, rule)? {
                continue;
            }
            let next = machine.apply(state, rule)?;
            if let Some(new_idx) = bfs.insert(next, idx, ri as u32, depth + 1)? {
                if let Some(sink) = collect.as_deref_mut() {
                    sink.push(bfs.nodes[new_idx as usize].state.clone());
                }
                if let Some(t) = target {
                    if bfs.nodes[new_idx as usize].state[t] > 0 {
                        let mut run = Vec::new();
                        let mut at = new_idx;
                        while bfs.nodes[at as usize].parent != NO_PARENT {
                            run.push(bfs.nodes[at as usize].rule);
                            at = bfs.nodes[at as usize].parent;
                        }
                        run.reverse();
                        return Ok(Some(run));
                    }
                }
            }
        }
    }
    Ok(None)
}

fn state_of(ta: &ThresholdAutomaton, c: &Configuration) -> Vec<i64> {
    ta.locations
        .iter()
        .map(|l| c.kappa[l])
        .chain(ta.shared.iter().map(|x| c.g[x]))
        .collect()
}

fn config_of(ta: &ThresholdAutomaton, state: &[i64], p: &Valuation) -> Configuration {
    let nloc = ta.locations.len();
    Configuration {
        kappa: ta
            .locations
            .iter()
            .enumerate()
            .map(|(i, l)| (l.clone(), state[i]))
            .collect(),
        g: ta
            .shared
            .iter()
            .enumerate()
            .map(|(i, x)| (x.clone(), state[nloc + i]))
            .collect(),
        p: p.clone(),
    }
}

fn total_processes(c: &Configuration) -> i64 {
    c.kappa.values().sum()
}

/// The exhaustive horizon for an acyclic automaton with `n` processes.
pub fn acyclic_horizon(ta: &ThresholdAutomaton, n: i64) -> u64 {
    (n.max(0) as u64) * (ta.locations.len().saturating_sub(1) as u64)
}

/// Searches for a shortest run from `c0` covering `target` within
/// `horizon` steps. `horizon = None` derives the exhaustive acyclic bound
/// and fails on cyclic automata.
pub fn covers_from(
    ta: &ThresholdAutomaton,
    c0: &Configuration,
    target: &str,
    horizon: Option<u64>,
    max_configs: usize,
) -> Result<Option<Vec<String>>, CoverError> {
    ta::check_configuration(ta, c0)?;
    let target_idx = ta
        .locations
        .iter()
        .position(|l| l == target)
        .ok_or_else(|| CoverError::UnknownLocation(target.to_string()))?;
    let horizon = match horizon {
        Some(h) => h,
        None if ta::is_acyclic(ta) => acyclic_horizon(ta, total_processes(c0)),
        None => return Err(CoverError::HorizonRequired),
    };
    let machine = Machine::compile(ta, &c0.p)?;
    let run = bfs_search(
        &machine,
        state_of(ta, c0),
        Some(target_idx),
        horizon,
        max_configs,
        None,
    )?;
    Ok(run.map(|indices| {
        indices
            .into_iter()
            .map(|i| ta.rules[i as usize].id.clone())
            .collect()
    }))
}

/// All configurations reachable from `c0` in at most `horizon` steps, in
/// discovery order. Used as a brute-force oracle surface.
pub fn reachable_configs(
    ta: &ThresholdAutomaton,
    c0: &Configuration,
    horizon: u64,
    max_configs: usize,
) -> Result<Vec<Configuration>, CoverError> {
    ta::check_configuration(ta, c0)?;
    let machine = Machine::compile(ta, &c0.p)?;
    let mut sink = Vec::new();
    bfs_search(
        &machine,
        state_of(ta, c0),
        None,
        horizon,
        max_configs,
        Some(&mut sink),
    )?;
    Ok(sink
        .into_iter()
        .map(|state| config_of(ta, &state, &c0.p))
        .collect())
}

fn lex_valuations(params: &[String], bound: i64) -> Vec<Valuation> {
    if bound < 0 {
        return Vec::new();
    }
    let k = params.len();
    let mut out = Vec::new();
    let mut current = vec![0i64; k];
    loop {
        out.push(
            params
                .iter()
                .cloned()
                .zip(current.iter().copied())
                .collect(),
        );
        // Odometer increment, last parameter fastest.
        let mut pos = k;
        while pos > 0 {
            pos -= 1;
            if current[pos] < bound {
                current[pos] += 1;
                current[pos + 1..].fill(0);
                break;
            }
            if pos == 0 {
                return out;
            }
        }
        if k == 0 {
            return out;
        }
    }
}

/// Compositions of `n` over `k` slots in ascending colexicographic order,
/// so the first composition puts everything in the first slot.
pub fn compositions(n: i64, k: usize) -> Vec<Vec<i64>> {
    if k == 0 {
        return if n == 0 { vec![Vec::new()] } else { Vec::new() };
    }
    let mut out = Vec::new();
    for last in 0..=n {
        for mut rest in compositions(n - last, k - 1) {
            rest.push(last);
            out.push(rest);
        }
    }
    out
}

/// Enumerates all initial configurations with parameters in
/// `0..=param_bound`: admissible valuations in lexicographic order, each
/// paired with every composition of `N(p)` processes over the initial
/// locations in colexicographic order. Valuations where `N(p) < 0` are
/// skipped with a diagnostic.
pub fn enumerate_start_points(
    ta: &ThresholdAutomaton,
    bounds: &SearchBounds,
) -> Result<(Vec<StartPoint>, Vec<Diagnostic>), CoverError> {
    let mut points = Vec::new();
    let mut diagnostics = Vec::new();
    for p in lex_valuations(&ta.env.params, bounds.param_bound) {
        if !ta.env.admits(&p)? {
            continue;
        }
        let n = ta.env.size(&p)?;
        if n < 0 {
            diagnostics.push(Diagnostic::SizeNegative { p, size: n });
            continue;
        }
        for comp in compositions(n, ta.initial.len()) {
            let mut kappa0: Valuation = ta.locations.iter().map(|l| (l.clone(), 0)).collect();
            for (loc, count) in ta.initial.iter().zip(comp) {
                kappa0.insert(loc.clone(), count);
            }
            points.push(StartPoint {
                p: p.clone(),
                kappa0,
            });
        }
    }
    Ok((points, diagnostics))
}

struct ValuationResult {
    witness: Option<(Valuation, Vec<String>)>,
    points: usize,
    exact: bool,
}

fn search_valuation(
    ta: &ThresholdAutomaton,
    target_idx: usize,
    p: &Valuation,
    n: i64,
    bounds: &SearchBounds,
    acyclic: bool,
) -> Result<ValuationResult, CoverError> {
    let machine = Machine::compile(ta, p)?;
    let needed = acyclic_horizon(ta, n);
    let horizon = bounds.horizon.unwrap_or(needed);
    let mut exact = acyclic && horizon >= needed;
    let mut points = 0;
    for comp in compositions(n, ta.initial.len()) {
        points += 1;
        let mut state = vec![0i64; ta.locations.len() + ta.shared.len()];
        for (loc, count) in ta.initial.iter().zip(&comp) {
            let idx = ta
                .locations
                .iter()
                .position(|l| l == loc)
                .expect("validated");
            state[idx] = *count;
        }
        let found = match bfs_search(
            &machine,
            state,
            Some(target_idx),
            horizon,
            bounds.max_configs,
            None,
        ) {
            Ok(found) => found,
            Err(CoverError::StateCapExceeded { .. }) => {
                exact = false;
                continue;
            }
            Err(e) => return Err(e),
        };
        if let Some(indices) = found {
            let run = indices
                .into_iter()
                .map(|i| ta.rules[i as usize].id.clone())
                .collect();
            let mut kappa0: Valuation = ta.locations.iter().map(|l| (l.clone(), 0)).collect();
            for (loc, count) in ta.initial.iter().zip(comp) {
                kappa0.insert(loc.clone(), count);
            }
            return Ok(ValuationResult {
                witness: Some((kappa0, run)),
                points,
                exact,
            });
        }
    }
    Ok(ValuationResult {
        witness: None,
        points,
        exact,
    })
}

/// Checks whether any initial configuration within the bounds covers
/// `target`. The first witness in enumeration order wins. `jobs > 1`
/// searches valuations in parallel batches; the result is identical to the
/// sequential search.
pub fn ta_covers_report(
    ta: &ThresholdAutomaton,
    target: &str,
    bounds: &SearchBounds,
    jobs: usize,
) -> Result<CoverReport, CoverError> {
    let target_idx = ta
        .locations
        .iter()
        .position(|l| l == target)
        .ok_or_else(|| CoverError::UnknownLocation(target.to_string()))?;
    let acyclic = ta::is_acyclic(ta);
    if !acyclic && bounds.horizon.is_none() {
        return Err(CoverError::HorizonRequired);
    }

    let mut admissible: Vec<(Valuation, i64)> = Vec::new();
    let mut diagnostics = Vec::new();
    for p in lex_valuations(&ta.env.params, bounds.param_bound) {
        if !ta.env.admits(&p)? {
            continue;
        }
        let n = ta.env.size(&p)?;
        if n < 0 {
            diagnostics.push(Diagnostic::SizeNegative { p, size: n });
            continue;
        }
        admissible.push((p, n));
    }

    let jobs = jobs.max(1);
    let mut valuations_checked = 0;
    let mut start_points_checked = 0;
    let mut exact = true;
    let mut batch_start = 0;
    while batch_start < admissible.len() {
        let batch = &admissible[batch_start..(batch_start + jobs).min(admissible.len())];
        let results: Vec<Result<ValuationResult, CoverError>> = if jobs == 1 {
            batch
                .iter()
                .map(|(p, n)| search_valuation(ta, target_idx, p, *n, bounds, acyclic))
                .collect()
        } else {
            std::thread::scope(|scope| {
                let handles: Vec<_> = batch
                    .iter()
                    .map(|(p, n)| {
                        scope
                            .spawn(move || search_valuation(ta, target_idx, p, *n, bounds, acyclic))
                    })
                    .collect();
                handles
                    .into_iter()
                    .map(|h| h.join().expect("worker panicked"))
                    .collect()
            })
        };
        for ((p, _), result) in batch.iter().zip(results) {
            let result = result?;
            valuations_checked += 1;
            start_points_checked += result.points;
            exact = exact && result.exact;
            if let Some((kappa0, run)) = result.witness {
                let witness = CoverWitness {
                    p: p.clone(),
                    kappa0,
                    run,
                };
                replay_witness(ta, target, &witness);
                return Ok(CoverReport {
                    verdict: CoverVerdict::Covered(witness),
                    valuations_checked,
                    start_points_checked,
                    diagnostics,
                });
            }
        }
        batch_start += batch.len();
    }
    Ok(CoverReport {
        verdict: CoverVerdict::NotCoveredWithinBounds {
            bounds: bounds.clone(),
            exact,
        },
        valuations_checked,
        start_points_checked,
        diagnostics,
    })
}

/// [`ta_covers_report`] without the accounting.
pub fn ta_covers(
    ta: &ThresholdAutomaton,
    target: &str,
    bounds: &SearchBounds,
) -> Result<CoverVerdict, CoverError> {
    Ok(ta_covers_report(ta, target, bounds, 1)?.verdict)
}

/// Every returned witness is replayed through the step semantics; a failure
/// here is a bug in the search, not in the input.
fn replay_witness(ta: &ThresholdAutomaton, target: &str, witness: &CoverWitness) {
    let c0 = Configuration {
        kappa: witness.kappa0.clone(),
        g: ta.shared.iter().map(|x| (x.clone(), 0)).collect(),
        p: witness.p.clone(),
    };
    let end = ta::apply_run(ta, &c0, &witness.run).expect("witness run must replay");
    assert!(
        end.kappa.get(target).copied().unwrap_or(0) > 0,
        "witness run does not cover the target"
    );
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::{p611, st87_sketch};
    use crate::sketch::{instantiate, Assignment};
    use crate::ta::{Environment, LinearExpr, Rule};

    fn st87_sketch_at(a: i64) -> ThresholdAutomaton {
        instantiate(&st87_sketch(), &Assignment::of(&[("a", a)])).unwrap()
    }

    #[test]
    fn finds_shortest_cover_run() {
        let ta = st87_sketch_at(0);
        let c0 = Configuration::initial(&ta, &[("l0", 5)], p611()).unwrap();
        let run = covers_from(&ta, &c0, "l3", None, 100_000).unwrap().unwrap();
        // gamma2 needs x >= (6-1)-1 = 4, so four increments then one move.
        assert_eq!(run.len(), 5);
        let end = ta::apply_run(&ta, &c0, &run).unwrap();
        assert!(end.kappa["l3"] > 0);
    }

    #[test]
    fn already_covered_yields_empty_run() {
        let ta = st87_sketch_at(0);
        let mut c0 = Configuration::initial(&ta, &[("l0", 5)], p611()).unwrap();
        c0.kappa.insert("l0".into(), 4);
        c0.kappa.insert("l3".into(), 1);
        let run = covers_from(&ta, &c0, "l3", Some(0), 100_000)
            .unwrap()
            .unwrap();
        assert!(run.is_empty());
    }

    #[test]
    fn exact_negative_at_exhaustive_horizon() {
        let ta = st87_sketch_at(1);
        let c0 = Configuration::initial(&ta, &[("l0", 5)], p611()).unwrap();
        // Exhaustive horizon: 5 processes, 3 locations.
        assert_eq!(acyclic_horizon(&ta, 5), 10);
        assert_eq!(covers_from(&ta, &c0, "l3", None, 100_000).unwrap(), None);
    }

    #[test]
    fn cyclic_requires_horizon() {
        let mut ta = st87_sketch_at(0);
        ta.rules.push(Rule::new("back", "l2", "l0"));
        let c0 = Configuration::initial(&ta, &[("l0", 5)], p611()).unwrap();
        assert_eq!(
            covers_from(&ta, &c0, "l3", None, 100_000).unwrap_err(),
            CoverError::HorizonRequired
        );
        assert!(covers_from(&ta, &c0, "l3", Some(8), 100_000)
            .unwrap()
            .is_some());
    }

    #[test]
    fn state_cap_is_reported() {
        let ta = st87_sketch_at(0);
        let c0 = Configuration::initial(&ta, &[("l0", 5)], p611()).unwrap();
        let err = covers_from(&ta, &c0, "l3", None, 3).unwrap_err();
        assert_eq!(err, CoverError::StateCapExceeded { cap: 3 });
    }

    #[test]
    fn start_point_enumeration_respects_resilience() {
        let ta = st87_sketch_at(1);
        let (points, diags) = enumerate_start_points(&ta, &SearchBounds::new(4)).unwrap();
        assert!(diags.is_empty());
        let has = |n: i64, t: i64, f: i64| {
            points
                .iter()
                .any(|pt| pt.p["n"] == n && pt.p["t"] == t && pt.p["f"] == f)
        };
        assert!(has(4, 1, 1));
        assert!(!has(3, 1, 1));
        // Single initial location: exactly one composition per valuation.
        let n411: Vec<_> = points
            .iter()
            .filter(|pt| pt.p["n"] == 4 && pt.p["t"] == 1 && pt.p["f"] == 1)
            .collect();
        assert_eq!(n411.len(), 1);
        assert_eq!(n411[0].kappa0["l0"], 3);
    }

    #[test]
    fn size_negative_valuations_are_skipped_with_diagnostic() {
        let mut ta = st87_sketch_at(1);
        ta.env.resilience.clear();
        // N = n - f goes negative for f > n.
        let (points, diags) = enumerate_start_points(&ta, &SearchBounds::new(1)).unwrap();
        assert!(diags
            .iter()
            .any(|d| matches!(d, Diagnostic::SizeNegative { size: -1, .. })));
        assert!(points.iter().all(|pt| pt.kappa0.values().sum::<i64>() >= 0));
    }

    #[test]
    fn zero_process_valuation_yields_single_empty_composition() {
        let comps = compositions(0, 2);
        assert_eq!(comps, vec![vec![0, 0]]);
        assert_eq!(compositions(2, 2), vec![vec![2, 0], vec![1, 1], vec![0, 2]]);
    }

    #[test]
    fn quantified_cover_finds_witness_for_weak_guard() {
        let ta = st87_sketch_at(0);
        let report = ta_covers_report(&ta, "l3", &SearchBounds::new(6), 1).unwrap();
        let CoverVerdict::Covered(witness) = &report.verdict else {
            panic!("expected a witness");
        };
        // First admissible valuation in lexicographic order already covers.
        assert_eq!(witness.p["n"], 1);
        assert_eq!(witness.run.len(), 2);
    }

    #[test]
    fn quantified_cover_exact_negative_for_strict_guard() {
        let ta = st87_sketch_at(1);
        let verdict = ta_covers(&ta, "l3", &SearchBounds::new(6)).unwrap();
        assert_eq!(
            verdict,
            CoverVerdict::NotCoveredWithinBounds {
                bounds: SearchBounds::new(6),
                exact: true
            }
        );
    }

    #[test]
    fn covered_when_target_is_initial() {
        let mut ta = st87_sketch_at(1);
        ta.initial = vec!["l0".into()];
        let verdict = ta_covers(&ta, "l0", &SearchBounds::new(6)).unwrap();
        let CoverVerdict::Covered(witness) = verdict else {
            panic!("expected a witness");
        };
        assert!(witness.run.is_empty());
    }

    #[test]
    fn quantified_cover_on_cyclic_automata_needs_a_horizon() {
        let mut ta = st87_sketch_at(0);
        ta.rules.push(Rule::new("back", "l2", "l0"));
        assert_eq!(
            ta_covers(&ta, "l3", &SearchBounds::new(4)).unwrap_err(),
            CoverError::HorizonRequired
        );
        // With a horizon the verdict exists but is never exact.
        let bounds = SearchBounds::new(4).with_horizon(1);
        let verdict = ta_covers(&ta, "l3", &bounds).unwrap();
        assert_eq!(
            verdict,
            CoverVerdict::NotCoveredWithinBounds {
                bounds,
                exact: false
            }
        );
    }

    #[test]
    fn parallel_result_equals_sequential() {
        for a in [0, 1] {
            let ta = st87_sketch_at(a);
            let seq = ta_covers_report(&ta, "l3", &SearchBounds::new(5), 1).unwrap();
            let par = ta_covers_report(&ta, "l3", &SearchBounds::new(5), 4).unwrap();
            assert_eq!(seq.verdict, par.verdict);
            assert_eq!(seq.valuations_checked, par.valuations_checked);
        }
    }

    #[test]
    fn reachable_configs_horizon_zero_is_start() {
        let ta = st87_sketch_at(0);
        let c0 = Configuration::initial(&ta, &[("l0", 5)], p611()).unwrap();
        assert_eq!(
            reachable_configs(&ta, &c0, 0, 1000).unwrap(),
            vec![c0.clone()]
        );
    }

    #[test]
    fn reachable_configs_stationary_with_no_processes() {
        let ta = ThresholdAutomaton {
            env: Environment {
                params: vec!["z".into()],
                resilience: vec![],
                size_fn: LinearExpr::var("z"),
            },
            locations: vec!["a".into(), "b".into()],
            initial: vec!["a".into()],
            shared: vec!["x".into()],
            rules: vec![Rule::new("r", "a", "b").with_inc("x")],
        };
        let p: Valuation = [("z".into(), 0)].into();
        let c0 = Configuration::initial(&ta, &[], p).unwrap();
        for horizon in [0, 3, 10] {
            assert_eq!(
                reachable_configs(&ta, &c0, horizon, 1000).unwrap(),
                vec![c0.clone()]
            );
        }
    }
}
