//! Semi-decision search for coefficient assignments under which a location
//! becomes uncoverable.
//!
//! The loop enumerates assignments fairly (by total magnitude, then
//! lexicographically), instantiates the sketch, and runs the bounded
//! coverability check. Covering witnesses are cached by their start point
//! and replayed first under later assignments; a cached run is only a
//! hint and refutes an assignment only if it re-validates step by step.
//!
//! No verdict of this loop certifies unbounded non-coverability: a
//! returned candidate always carries the bounds under which it survived.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::cover::{ta_covers_report, CoverError, CoverVerdict, CoverWitness, SearchBounds};
use crate::sketch::{
    collect_indeterminates, instantiate, Assignment, SketchAutomaton, SketchError,
};
use crate::ta::{self, Configuration, TaError, Valuation};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SynthError {
    #[error(transparent)]
    Sketch(#[from] SketchError),

    #[error(transparent)]
    Cover(#[from] CoverError),

    #[error(transparent)]
    Ta(#[from] TaError),
}

/// Range of values tried for each indeterminate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    /// Values in `0..=bound`.
    NonNegative,
    /// Values in `-bound..=bound`, ordered 0, 1, -1, 2, -2, ...
    Integer,
}

/// A synthesis problem: find an assignment under which the target is not
/// coverable.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SynthesisQuery {
    pub sketch: SketchAutomaton,
    pub target: String,
    pub mode: Mode,
    pub assignment_bound: i64,
    pub cover_bounds: SearchBounds,
}

/// The bounded certificate attached to a candidate: what was searched
/// without finding a cover.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NonCoverEvidence {
    pub bounds: SearchBounds,
    pub valuations_checked: usize,
    pub start_points_checked: usize,
    /// True when every per-valuation search was provably exhaustive.
    pub exact: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SynthesisVerdict {
    /// An assignment that survived the bounded check. Not a proof of
    /// unbounded non-coverability.
    Candidate {
        mu: Assignment,
        evidence: NonCoverEvidence,
    },
    /// Every enumerated assignment was refuted by a covering witness.
    Exhausted { bound: i64 },
}

/// Verdict plus the per-assignment bookkeeping of the loop.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SynthesisOutcome {
    pub verdict: SynthesisVerdict,
    /// Refuted assignments with their replayable covering witnesses, in
    /// enumeration order.
    pub refuted: Vec<(Assignment, CoverWitness)>,
    /// Assignments skipped because instantiation is not a threshold
    /// automaton (non-positive guard factor).
    pub skipped: Vec<(Assignment, SketchError)>,
    pub assignments_tried: usize,
    /// Refutations settled by replaying a cached witness run.
    pub cache_hits: usize,
}

fn value_key(v: i64) -> (u64, bool) {
    (v.unsigned_abs(), v < 0)
}

/// Fair enumeration of assignments: total magnitude first, then
/// lexicographic with each coordinate ordered 0, 1, -1, 2, -2, ...
pub fn enumerate_assignments(vars: &[String], bound: i64, mode: Mode) -> Vec<Assignment> {
    let values: Vec<i64> = match mode {
        Mode::NonNegative => (0..=bound).collect(),
        Mode::Integer => (-bound..=bound).collect(),
    };
    let mut tuples: Vec<Vec<i64>> = vec![Vec::new()];
    for _ in 0..vars.len() {
        let mut next = Vec::with_capacity(tuples.len() * values.len());
        for prefix in &tuples {
            for v in &values {
                let mut row = prefix.clone();
                row.push(*v);
                next.push(row);
            }
        }
        tuples = next;
    }
    tuples.sort_by_key(|row| {
        (
            row.iter().map(|v| v.unsigned_abs()).sum::<u64>(),
            row.iter().map(|v| value_key(*v)).collect::<Vec<_>>(),
        )
    });
    tuples
        .into_iter()
        .map(|row| Assignment(vars.iter().cloned().zip(row).collect()))
        .collect()
}

type CacheKey = (Valuation, Valuation);

fn replay_refutes(
    ta: &ta::ThresholdAutomaton,
    target: &str,
    key: &CacheKey,
    run: &[String],
) -> bool {
    let (p, kappa0) = key;
    let c0 = Configuration {
        kappa: kappa0.clone(),
        g: ta.shared.iter().map(|x| (x.clone(), 0)).collect(),
        p: p.clone(),
    };
    if ta::check_configuration(ta, &c0).is_err() {
        return false;
    }
    match ta::apply_run(ta, &c0, run) {
        Ok(end) => end.kappa.get(target).copied().unwrap_or(0) > 0,
        Err(_) => false,
    }
}

/// Runs the synthesis loop. Deterministic: the same query yields the same
/// outcome.
pub fn synthesize(query: &SynthesisQuery) -> Result<SynthesisOutcome, SynthError> {
    let vars = collect_indeterminates(&query.sketch);
    let assignments = enumerate_assignments(&vars, query.assignment_bound, query.mode);
    let mut cache: BTreeMap<CacheKey, Vec<String>> = BTreeMap::new();
    let mut refuted = Vec::new();
    let mut skipped = Vec::new();
    let mut cache_hits = 0;
    let mut tried = 0;

    for mu in assignments {
        tried += 1;
        let ta = match instantiate(&query.sketch, &mu) {
            Ok(ta) => ta,
            Err(err @ SketchError::NonPositiveFactor { .. }) => {
                skipped.push((mu, err));
                continue;
            }
            Err(err) => return Err(err.into()),
        };

        let mut cached_witness = None;
        for (key, run) in &cache {
            if replay_refutes(&ta, &query.target, key, run) {
                cached_witness = Some(CoverWitness {
                    p: key.0.clone(),
                    kappa0: key.1.clone(),
                    run: run.clone(),
                });
                break;
            }
        }
        if let Some(witness) = cached_witness {
            cache_hits += 1;
            refuted.push((mu, witness));
            continue;
        }

        let report = ta_covers_report(&ta, &query.target, &query.cover_bounds, 1)?;
        match report.verdict {
            CoverVerdict::Covered(witness) => {
                cache.insert(
                    (witness.p.clone(), witness.kappa0.clone()),
                    witness.run.clone(),
                );
                refuted.push((mu, witness));
            }
            CoverVerdict::NotCoveredWithinBounds { bounds, exact } => {
                return Ok(SynthesisOutcome {
                    verdict: SynthesisVerdict::Candidate {
                        mu,
                        evidence: NonCoverEvidence {
                            bounds,
                            valuations_checked: report.valuations_checked,
                            start_points_checked: report.start_points_checked,
                            exact,
                        },
                    },
                    refuted,
                    skipped,
                    assignments_tried: tried,
                    cache_hits,
                });
            }
        }
    }
    Ok(SynthesisOutcome {
        verdict: SynthesisVerdict::Exhausted {
            bound: query.assignment_bound,
        },
        refuted,
        skipped,
        assignments_tried: tried,
        cache_hits,
    })
}

/// Outcome of independently re-checking a candidate assignment.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CandidateCheck {
    pub mu: Assignment,
    /// True when no cover was found within the bounds.
    pub confirmed: bool,
    /// The covering witness when the candidate is rejected.
    pub witness: Option<CoverWitness>,
    pub evidence: NonCoverEvidence,
}

/// Re-instantiates the sketch and reruns the bounded coverability search
/// from scratch, reporting the bounds and exactness of the check.
pub fn verify_candidate(
    sketch: &SketchAutomaton,
    mu: &Assignment,
    target: &str,
    bounds: &SearchBounds,
) -> Result<CandidateCheck, SynthError> {
    let ta = instantiate(sketch, mu)?;
    let report = ta_covers_report(&ta, target, bounds, 1)?;
    let evidence = NonCoverEvidence {
        bounds: bounds.clone(),
        valuations_checked: report.valuations_checked,
        start_points_checked: report.start_points_checked,
        exact: match &report.verdict {
            CoverVerdict::NotCoveredWithinBounds { exact, .. } => *exact,
            CoverVerdict::Covered(_) => false,
        },
    };
    Ok(match report.verdict {
        CoverVerdict::Covered(witness) => CandidateCheck {
            mu: mu.clone(),
            confirmed: false,
            witness: Some(witness),
            evidence,
        },
        CoverVerdict::NotCoveredWithinBounds { .. } => CandidateCheck {
            mu: mu.clone(),
            confirmed: true,
            witness: None,
            evidence,
        },
    })
}
