//! Decision procedures for two-state reversible and two-letter
//! invertible-reversible machines, with checkable certificates.

use std::collections::hash_map::DefaultHasher;
use std::collections::HashMap;
use std::hash::{Hash, Hasher};

use serde::Serialize;
use thiserror::Error;

use crate::connectivity::{degree_report, power_components, ConnectionDegree, DEFAULT_MAX_POWER};
use crate::harness::canonical_form;
use crate::machine::{MealyMachine, StateWord};
use crate::mdreduce::{md_reduce, ReductionTrace, Side};
use crate::minimize::{nerode_partition, words_equivalent, EquivalenceVerdict};
use crate::power::{words_of_length, PowerBudget, PowerTable};
use crate::semigroup::{semigroup_order, SemigroupBudget, SemigroupOrder};
use crate::BudgetExceeded;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Evidence {
    /// The power `Aᵉ` is disconnected.
    DisconnectedPower { exponent: usize },
    /// md-reduction of the machine, or of its dual when `on_dual` is set.
    Reduction {
        on_dual: bool,
        trace: ReductionTrace,
    },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "verdict", rename_all = "kebab-case")]
pub enum Verdict {
    FiniteSemigroup {
        order: Option<usize>,
        evidence: Evidence,
    },
    FreeRank2 {
        evidence: Evidence,
    },
    FiniteGroup {
        evidence: Evidence,
    },
    InfiniteGroup {
        evidence: Evidence,
    },
    /// Every power up to `bound` is connected and no exact procedure applies.
    Unknown {
        bound: usize,
    },
}

impl Verdict {
    pub fn evidence(&self) -> Option<&Evidence> {
        match self {
            Verdict::FiniteSemigroup { evidence, .. }
            | Verdict::FreeRank2 { evidence }
            | Verdict::FiniteGroup { evidence }
            | Verdict::InfiniteGroup { evidence } => Some(evidence),
            Verdict::Unknown { .. } => None,
        }
    }

    /// Whether the verdict says the generated semigroup (or group) is finite.
    pub fn is_finite(&self) -> Option<bool> {
        match self {
            Verdict::FiniteSemigroup { .. } | Verdict::FiniteGroup { .. } => Some(true),
            Verdict::FreeRank2 { .. } | Verdict::InfiniteGroup { .. } => Some(false),
            Verdict::Unknown { .. } => None,
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            Verdict::FiniteSemigroup { .. } => "finite semigroup",
            Verdict::FreeRank2 { .. } => "free semigroup of rank 2",
            Verdict::FiniteGroup { .. } => "finite group",
            Verdict::InfiniteGroup { .. } => "infinite group",
            Verdict::Unknown { .. } => "unknown",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum DecideError {
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error(transparent)]
    Budget(#[from] BudgetExceeded),
}

fn require(cond: bool, what: impl FnOnce() -> String) -> Result<(), DecideError> {
    if cond {
        Ok(())
    } else {
        Err(DecideError::Precondition(what()))
    }
}

fn require_two_states(machine: &MealyMachine) -> Result<(), DecideError> {
    require(machine.n_states() == 2, || {
        format!("expected 2 states, got {}", machine.n_states())
    })
}

fn require_invertible_reversible(machine: &MealyMachine) -> Result<(), DecideError> {
    require(machine.is_invertible(), || {
        "machine is not invertible".into()
    })?;
    require(machine.is_reversible(), || {
        "machine is not reversible".into()
    })
}

fn finite_order(machine: &MealyMachine) -> Option<usize> {
    match semigroup_order(machine, &SemigroupBudget::default()) {
        SemigroupOrder::Finite(n) => Some(n),
        SemigroupOrder::AtLeast(_) => None,
    }
}

/// Finite-or-free dichotomy for two-state reversible machines: a
/// disconnected power means finite; otherwise an invertible machine is free
/// exactly when it is not md-trivial. Non-invertible machines with every
/// power up to `max_power` connected stay `Unknown`.
pub fn decide_two_state_reversible(
    machine: &MealyMachine,
    max_power: usize,
) -> Result<Verdict, DecideError> {
    require_two_states(machine)?;
    require(machine.is_reversible(), || {
        "machine is not reversible".into()
    })?;
    let report = degree_report(machine, max_power, &PowerBudget::default())?;
    if let ConnectionDegree::Finite(n) = report.degree {
        return Ok(Verdict::FiniteSemigroup {
            order: finite_order(machine),
            evidence: Evidence::DisconnectedPower { exponent: n + 1 },
        });
    }
    if !machine.is_invertible() {
        return Ok(Verdict::Unknown { bound: max_power });
    }
    let trace = md_reduce(machine);
    let evidence = Evidence::Reduction {
        on_dual: false,
        trace,
    };
    if is_trivial(&evidence) {
        Ok(Verdict::FiniteSemigroup {
            order: finite_order(machine),
            evidence,
        })
    } else {
        Ok(Verdict::FreeRank2 { evidence })
    }
}

fn is_trivial(evidence: &Evidence) -> bool {
    matches!(evidence, Evidence::Reduction { trace, .. } if trace.is_trivial())
}

/// A two-state invertible reversible machine generates a finite group iff
/// it is md-trivial.
pub fn decide_finite_group_2state(machine: &MealyMachine) -> Result<Verdict, DecideError> {
    require_two_states(machine)?;
    require_invertible_reversible(machine)?;
    let evidence = Evidence::Reduction {
        on_dual: false,
        trace: md_reduce(machine),
    };
    Ok(if is_trivial(&evidence) {
        Verdict::FiniteGroup { evidence }
    } else {
        Verdict::InfiniteGroup { evidence }
    })
}

/// A two-state invertible reversible machine generates a free semigroup of
/// rank 2 iff it is not md-trivial; otherwise the semigroup is finite.
pub fn decide_free_semigroup_2state(machine: &MealyMachine) -> Result<Verdict, DecideError> {
    require_two_states(machine)?;
    require_invertible_reversible(machine)?;
    let evidence = Evidence::Reduction {
        on_dual: false,
        trace: md_reduce(machine),
    };
    Ok(if is_trivial(&evidence) {
        Verdict::FiniteSemigroup {
            order: finite_order(machine),
            evidence,
        }
    } else {
        Verdict::FreeRank2 { evidence }
    })
}

/// A two-letter invertible reversible machine generates a finite group iff
/// its (two-state) dual is md-trivial.
pub fn decide_finite_group_2letter(machine: &MealyMachine) -> Result<Verdict, DecideError> {
    require(machine.n_letters() == 2, || {
        format!("expected 2 letters, got {}", machine.n_letters())
    })?;
    require_invertible_reversible(machine)?;
    let evidence = Evidence::Reduction {
        on_dual: true,
        trace: md_reduce(&machine.dual()),
    };
    Ok(if is_trivial(&evidence) {
        Verdict::FiniteGroup { evidence }
    } else {
        Verdict::InfiniteGroup { evidence }
    })
}

/// Dispatches on the machine's shape. Two-state reversible machines go
/// through the dichotomy, two-letter invertible reversible machines through
/// their dual; anything else is outside the decidable shapes.
pub fn decide(machine: &MealyMachine, max_power: usize) -> Result<Verdict, DecideError> {
    let ir = machine.is_invertible() && machine.is_reversible();
    if machine.n_states() == 2 && machine.is_reversible() {
        decide_two_state_reversible(machine, max_power)
    } else if machine.n_letters() == 2 && ir {
        decide_finite_group_2letter(machine)
    } else {
        Err(DecideError::Precondition(
            "semi-decision only: the machine is neither two-state reversible nor two-letter invertible-reversible"
                .into(),
        ))
    }
}

pub fn decide_default(machine: &MealyMachine) -> Result<Verdict, DecideError> {
    decide(machine, DEFAULT_MAX_POWER)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub enum RelationSearch {
    NoRelationUpTo(usize),
    Relation(StateWord, StateWord),
}

fn hash_of(v: impl Hash) -> u64 {
    let mut h = DefaultHasher::new();
    v.hash(&mut h);
    h.finish()
}

/// Hash of every word's action on `Σ^depth`, for all words of one power.
fn action_hashes(table: &PowerTable, depth: usize) -> Vec<u64> {
    let words = table.n_words();
    let l = table.n_letters();
    let rows: Vec<u64> = (0..words)
        .map(|w| hash_of((0..l).map(|i| table.step(w, i).1).collect::<Vec<_>>()))
        .collect();
    let mut cur = rows.clone();
    for _ in 1..depth {
        cur = (0..words)
            .map(|w| {
                let sections: Vec<u64> = (0..l).map(|i| cur[table.step(w, i).0 as usize]).collect();
                hash_of((rows[w], sections))
            })
            .collect();
    }
    cur
}

/// Searches all pairs of distinct state words of length at most `max_len`
/// for one acting identically. Candidates are bucketed by their action on
/// `Σ^depth` and confirmed exactly; the first relation `(u, v)` in
/// length-lexicographic order of `v`, then of `u`, is returned.
pub fn free_relation_search(
    machine: &MealyMachine,
    max_len: usize,
    depth: usize,
) -> Result<RelationSearch, BudgetExceeded> {
    let budget = PowerBudget::default();
    let mut buckets: HashMap<u64, Vec<StateWord>> = HashMap::new();
    for len in 1..=max_len {
        let table = PowerTable::build(machine, len, &budget)?;
        let sigs = action_hashes(&table, depth.max(1));
        for (w, &sig) in sigs.iter().enumerate() {
            let v = StateWord(table.unpack(w as u64));
            let bucket = buckets.entry(sig).or_default();
            for u in bucket.iter() {
                if let EquivalenceVerdict::Equivalent { .. } =
                    words_equivalent(machine, u, &v, &budget)?
                {
                    return Ok(RelationSearch::Relation(u.clone(), v));
                }
            }
            bucket.push(v);
        }
    }
    Ok(RelationSearch::NoRelationUpTo(max_len))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ClassSizeReport {
    pub exponent: usize,
    pub prime: usize,
    /// `(class size, number of classes)`, ascending by size.
    pub histogram: Vec<(usize, usize)>,
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum ClassSizeError {
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("class sizes of power {exponent} are {histogram:?}, not one power of {prime}")]
    Violation {
        exponent: usize,
        prime: usize,
        histogram: Vec<(usize, usize)>,
    },
    #[error(transparent)]
    Budget(#[from] BudgetExceeded),
}

fn is_prime(p: usize) -> bool {
    p >= 2 && (2..p).take_while(|d| d * d <= p).all(|d| p % d != 0)
}

fn is_power_of(mut v: usize, p: usize) -> bool {
    while v > 1 && v % p == 0 {
        v /= p;
    }
    v == 1
}

/// For a reversible machine with a prime number `p` of states and a
/// connected power `Aᵐ`, checks that the Nerode classes of `Aᵐ` share one
/// size and that it is a power of `p`.
pub fn verify_prime_class_sizes(
    machine: &MealyMachine,
    m: usize,
) -> Result<ClassSizeReport, ClassSizeError> {
    let p = machine.n_states();
    if !is_prime(p) {
        return Err(ClassSizeError::Precondition(format!(
            "{p} states is not a prime count"
        )));
    }
    if !machine.is_reversible() {
        return Err(ClassSizeError::Precondition(
            "machine is not reversible".into(),
        ));
    }
    let budget = PowerBudget::default();
    if !power_components(machine, m, &budget)?.connected {
        return Err(ClassSizeError::Precondition(format!(
            "power {m} is disconnected"
        )));
    }
    let power = machine.power(m, &budget)?;
    let partition = nerode_partition(&power);
    let mut sizes: HashMap<usize, usize> = HashMap::new();
    for class in partition.classes() {
        *sizes.entry(class.len()).or_default() += 1;
    }
    let mut histogram: Vec<(usize, usize)> = sizes.into_iter().collect();
    histogram.sort_unstable();
    if histogram.len() != 1 || !is_power_of(histogram[0].0, p) {
        return Err(ClassSizeError::Violation {
            exponent: m,
            prime: p,
            histogram,
        });
    }
    Ok(ClassSizeReport {
        exponent: m,
        prime: p,
        histogram,
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum CertificateError {
    #[error("unknown verdicts carry no certificate")]
    NoCertificate,
    #[error("power {0} is connected")]
    PowerConnected(usize),
    #[error("reduction step {step}: {reason}")]
    BadStep { step: usize, reason: String },
    #[error("reduction trace does not start at the machine under test")]
    WrongStart,
    #[error("reduction result {0}")]
    WrongResult(String),
    #[error("certificate too large to check naively")]
    TooLarge,
    #[error("evidence kind does not fit the verdict")]
    Mismatch,
}

const NAIVE_LIMIT: usize = 1 << 20;

/// State classes by equality of the action on all words of length `|A|`,
/// which separates any two inequivalent states.
fn naive_classes(m: &MealyMachine) -> Result<Vec<u32>, CertificateError> {
    let n = m.n_states();
    let len = n.max(1);
    let count = (m.n_letters() as u128)
        .checked_pow(len as u32)
        .unwrap_or(u128::MAX);
    if count.saturating_mul(n as u128) > NAIVE_LIMIT as u128 {
        return Err(CertificateError::TooLarge);
    }
    let words: Vec<_> = words_of_length(m.n_letters(), len).collect();
    let mut ids: HashMap<Vec<u32>, u32> = HashMap::new();
    Ok((0..n as u32)
        .map(|x| {
            let action: Vec<u32> = words.iter().flat_map(|u| m.rho_apply(&[x], u).0).collect();
            let next = ids.len() as u32;
            *ids.entry(action).or_insert(next)
        })
        .collect())
}

fn naive_quotient(m: &MealyMachine) -> Result<MealyMachine, CertificateError> {
    let class = naive_classes(m)?;
    let k = class.iter().max().map_or(0, |&c| c as usize + 1);
    let l = m.n_letters();
    let mut delta = vec![0; k * l];
    let mut rho = vec![0; k * l];
    for x in 0..m.n_states() as u32 {
        let c = class[x as usize] as usize;
        for i in 0..l as u32 {
            let (y, o) = m.step(x, i);
            delta[c * l + i as usize] = class[y as usize];
            rho[c * l + i as usize] = o;
        }
    }
    MealyMachine::from_tables(k, l, delta, rho)
        .map_err(|e| CertificateError::WrongResult(e.to_string()))
}

fn naive_side(m: &MealyMachine, side: Side) -> Result<MealyMachine, CertificateError> {
    match side {
        Side::Primal => naive_quotient(m),
        Side::Dual => Ok(naive_quotient(&m.dual())?.dual()),
    }
}

fn check_trace(
    start: &MealyMachine,
    trace: &ReductionTrace,
    expect_trivial: bool,
) -> Result<(), CertificateError> {
    if trace.initial != (start.n_states(), start.n_letters()) {
        return Err(CertificateError::WrongStart);
    }
    let mut current = start.clone();
    for (k, step) in trace.steps.iter().enumerate() {
        let expected = naive_side(&current, step.side)?;
        let size = (expected.n_states(), expected.n_letters());
        if size != step.after || size == (current.n_states(), current.n_letters()) {
            return Err(CertificateError::BadStep {
                step: k,
                reason: format!("expected size {size:?}, trace says {:?}", step.after),
            });
        }
        if canonical_form(&expected) != canonical_form(&step.machine) {
            return Err(CertificateError::BadStep {
                step: k,
                reason: "machine is not the quotient".into(),
            });
        }
        current = step.machine.clone();
    }
    if canonical_form(&current) != canonical_form(&trace.result) {
        return Err(CertificateError::WrongResult(
            "differs from the last step".into(),
        ));
    }
    let trivial = current.n_states() == 1 && current.n_letters() == 1;
    if trivial != expect_trivial {
        return Err(CertificateError::WrongResult(format!(
            "is {}trivial",
            if trivial { "" } else { "not " }
        )));
    }
    if !trivial {
        for side in [Side::Primal, Side::Dual] {
            let q = naive_side(&current, side)?;
            if (q.n_states(), q.n_letters()) != (current.n_states(), current.n_letters()) {
                return Err(CertificateError::WrongResult(format!(
                    "is not minimal on the {side:?} side"
                )));
            }
        }
    }
    Ok(())
}

fn check_disconnected(machine: &MealyMachine, exponent: usize) -> Result<(), CertificateError> {
    let n = machine.n_states();
    let count = (n as u128)
        .checked_pow(exponent as u32)
        .unwrap_or(u128::MAX);
    if count > NAIVE_LIMIT as u128 {
        return Err(CertificateError::TooLarge);
    }
    let words: Vec<StateWord> = words_of_length(n, exponent).collect();
    let index: HashMap<&StateWord, usize> = words.iter().enumerate().map(|(k, w)| (w, k)).collect();
    let mut adjacent = vec![Vec::new(); words.len()];
    for (k, w) in words.iter().enumerate() {
        for i in 0..machine.n_letters() as u32 {
            let v = index[&machine.delta_apply(&[i], w)];
            adjacent[k].push(v);
            adjacent[v].push(k);
        }
    }
    let mut seen = vec![false; words.len()];
    let mut stack = vec![0];
    seen[0] = true;
    while let Some(u) = stack.pop() {
        for &v in &adjacent[u] {
            if !seen[v] {
                seen[v] = true;
                stack.push(v);
            }
        }
    }
    if seen.iter().all(|&s| s) {
        return Err(CertificateError::PowerConnected(exponent));
    }
    Ok(())
}

/// Re-checks a verdict's certificate along a separate, naive code path:
/// components by direct search over words, Nerode classes by full action
/// tables.
pub fn check_certificate(
    machine: &MealyMachine,
    verdict: &Verdict,
) -> Result<(), CertificateError> {
    let evidence = verdict.evidence().ok_or(CertificateError::NoCertificate)?;
    let finite = verdict.is_finite().ok_or(CertificateError::NoCertificate)?;
    match evidence {
        Evidence::DisconnectedPower { exponent } => {
            if !finite {
                return Err(CertificateError::Mismatch);
            }
            check_disconnected(machine, *exponent)
        }
        Evidence::Reduction { on_dual, trace } => {
            let start = if *on_dual {
                machine.dual()
            } else {
                machine.clone()
            };
            check_trace(&start, trace, finite)
        }
    }
}
