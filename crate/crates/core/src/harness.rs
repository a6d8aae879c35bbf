//! Families of machines: canonical forms up to renaming, exhaustive and
//! random generation, and censuses over whole families.

use std::cmp::Ordering;
use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::fs::{self, File, OpenOptions};
use std::io::{self, BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::sync::Mutex;
use std::time::Instant;

use rand::seq::SliceRandom;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::connectivity::{components, connection_degree, ConnectionDegree, DEFAULT_MAX_POWER};
use crate::decide::{decide, DecideError, Evidence, Verdict};
use crate::machine::MealyMachine;
use crate::mdreduce::is_md_trivial;
use crate::minimize::is_minimal;
use crate::semigroup::{semigroup_order, SemigroupBudget, SemigroupOrder};
use crate::BudgetExceeded;

/// Largest state or letter count accepted by [`canonical_form`].
pub const MAX_CANONICAL_SIZE: usize = 7;

/// A renaming-invariant key: `[n, l]` followed by the canonical table,
/// entries `(δ, ρ)` in state-major order.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct CanonicalKey(pub Vec<u32>);

impl CanonicalKey {
    pub fn n_states(&self) -> usize {
        self.0[0] as usize
    }

    pub fn n_letters(&self) -> usize {
        self.0[1] as usize
    }

    /// The machine described by the key, with default names.
    pub fn machine(&self) -> MealyMachine {
        let (n, l) = (self.n_states(), self.n_letters());
        let body = &self.0[2..];
        let delta = body.iter().step_by(2).copied().collect();
        let rho = body.iter().skip(1).step_by(2).copied().collect();
        MealyMachine::from_tables(n, l, delta, rho).expect("canonical keys describe valid machines")
    }
}

fn digit(v: u32) -> String {
    char::from_digit(v, 36).map_or_else(|| format!("({v})"), |c| c.to_string())
}

impl fmt::Display for CanonicalKey {
    /// `NxL:` then each state's row as `δρ` digit pairs, rows separated by `.`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (n, l) = (self.n_states(), self.n_letters());
        write!(f, "{n}x{l}:")?;
        for x in 0..n {
            if x > 0 {
                f.write_str(".")?;
            }
            for i in 0..l {
                let k = 2 + 2 * (x * l + i);
                write!(f, "{}{}", digit(self.0[k]), digit(self.0[k + 1]))?;
            }
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, thiserror::Error)]
#[error("canonical form supports at most {max} states and letters, got {n_states} states and {n_letters} letters")]
pub struct TooLarge {
    pub n_states: usize,
    pub n_letters: usize,
    pub max: usize,
}

/// All permutations of `0..n` in lexicographic order.
pub fn permutations(n: usize) -> Vec<Vec<u32>> {
    let mut out = Vec::new();
    let mut p: Vec<u32> = (0..n as u32).collect();
    loop {
        out.push(p.clone());
        let Some(i) = (1..n).rev().find(|&i| p[i - 1] < p[i]) else {
            return out;
        };
        let j = (i..n)
            .rev()
            .find(|&j| p[j] > p[i - 1])
            .expect("successor exists");
        p.swap(i - 1, j);
        p[i..].reverse();
    }
}

/// Branch-and-bound search for the smallest table over numberings that
/// visit states breadth-first, with letters in a fixed order per branch.
/// Every renaming orbit produces the same candidate set, so the minimum is
/// an invariant; since it is itself a renamed table, equal minima mean
/// isomorphic machines.
struct Search<'a> {
    m: &'a MealyMachine,
    tau: Vec<u32>,
    tau_inv: Vec<u32>,
    num: Vec<u32>,
    order: Vec<u32>,
    cur: Vec<u32>,
    best: Option<Vec<u32>>,
}

impl Search<'_> {
    /// Compares the partial table with the same prefix of the best one.
    fn versus_best(&self) -> Ordering {
        match &self.best {
            Some(best) => self.cur.as_slice().cmp(&best[..self.cur.len()]),
            None => Ordering::Less,
        }
    }

    fn run(&mut self, p: usize) {
        let n = self.m.n_states();
        let l = self.m.n_letters();
        if p == n {
            if self.versus_best() == Ordering::Less {
                self.best = Some(self.cur.clone());
            }
            return;
        }
        if p == self.order.len() {
            // Start a new component at every unnumbered state.
            for r in 0..n as u32 {
                if self.num[r as usize] == u32::MAX {
                    self.num[r as usize] = p as u32;
                    self.order.push(r);
                    self.run(p);
                    self.order.pop();
                    self.num[r as usize] = u32::MAX;
                }
            }
            return;
        }
        let old = self.order[p];
        let assigned_before = self.order.len();
        for j in 0..l {
            let (succ, out) = self.m.step(old, self.tau[j]);
            if self.num[succ as usize] == u32::MAX {
                self.num[succ as usize] = self.order.len() as u32;
                self.order.push(succ);
            }
            self.cur.push(self.num[succ as usize]);
            self.cur.push(self.tau_inv[out as usize]);
        }
        if self.versus_best() != Ordering::Greater {
            self.run(p + 1);
        }
        self.cur.truncate(p * l * 2);
        while self.order.len() > assigned_before {
            let x = self.order.pop().expect("assigned state");
            self.num[x as usize] = u32::MAX;
        }
    }
}

fn canonical_over(m: &MealyMachine, letter_orders: &[Vec<u32>]) -> Vec<u32> {
    let n = m.n_states();
    let l = m.n_letters();
    let mut best: Option<Vec<u32>> = None;
    for tau in letter_orders {
        let mut tau_inv = vec![0; l];
        for (j, &i) in tau.iter().enumerate() {
            tau_inv[i as usize] = j as u32;
        }
        let mut s = Search {
            m,
            tau: tau.clone(),
            tau_inv,
            num: vec![u32::MAX; n],
            order: Vec::with_capacity(n),
            cur: Vec::with_capacity(2 * n * l),
            best: best.take(),
        };
        s.run(0);
        best = s.best;
    }
    let mut key = vec![n as u32, l as u32];
    key.extend(best.unwrap_or_default());
    key
}

fn check_size(m: &MealyMachine) -> Result<(), TooLarge> {
    if m.n_states() > MAX_CANONICAL_SIZE || m.n_letters() > MAX_CANONICAL_SIZE {
        return Err(TooLarge {
            n_states: m.n_states(),
            n_letters: m.n_letters(),
            max: MAX_CANONICAL_SIZE,
        });
    }
    Ok(())
}

/// Key equal for two machines iff one is obtained from the other by
/// renaming states and letters.
///
/// # Panics
/// On machines beyond [`MAX_CANONICAL_SIZE`]; see [`try_canonical_form`].
pub fn canonical_form(m: &MealyMachine) -> CanonicalKey {
    try_canonical_form(m).expect("machine too large for canonical form")
}

pub fn try_canonical_form(m: &MealyMachine) -> Result<CanonicalKey, TooLarge> {
    check_size(m)?;
    Ok(CanonicalKey(canonical_over(
        m,
        &permutations(m.n_letters()),
    )))
}

/// Key up to renaming of states only; letters keep their order.
pub fn state_canonical_form(m: &MealyMachine) -> Result<CanonicalKey, TooLarge> {
    check_size(m)?;
    Ok(CanonicalKey(canonical_over(
        m,
        &[(0..m.n_letters() as u32).collect()],
    )))
}

/// The machine's own table in key layout.
pub fn table_key(m: &MealyMachine) -> CanonicalKey {
    let mut key = vec![m.n_states() as u32, m.n_letters() as u32];
    for (d, r) in m.delta_table().iter().zip(m.rho_table()) {
        key.push(*d);
        key.push(*r);
    }
    CanonicalKey(key)
}

/// The canonical representative of the machine's isomorphism class.
pub fn canonical_machine(m: &MealyMachine) -> MealyMachine {
    canonical_form(m).machine()
}

pub fn is_isomorphic(a: &MealyMachine, b: &MealyMachine) -> bool {
    a.n_states() == b.n_states()
        && a.n_letters() == b.n_letters()
        && canonical_form(a) == canonical_form(b)
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Filters {
    pub invertible: bool,
    pub reversible: bool,
    pub bireversible: bool,
    pub connected: bool,
    pub minimal: bool,
}

impl Filters {
    pub fn invertible_reversible() -> Self {
        Filters {
            invertible: true,
            reversible: true,
            ..Filters::default()
        }
    }

    pub fn bireversible() -> Self {
        Filters {
            invertible: true,
            reversible: true,
            bireversible: true,
            ..Filters::default()
        }
    }

    /// Bireversibility implies the other two.
    pub fn normalized(self) -> Self {
        Filters {
            invertible: self.invertible || self.bireversible,
            reversible: self.reversible || self.bireversible,
            ..self
        }
    }

    pub fn accepts(&self, m: &MealyMachine) -> bool {
        (!self.invertible || m.is_invertible())
            && (!self.reversible || m.is_reversible())
            && (!self.bireversible || m.is_bireversible())
            && (!self.connected || components(m).connected)
            && (!self.minimal || is_minimal(m))
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Symmetry {
    #[default]
    Labeled,
    /// One machine per class under simultaneous state and letter renaming.
    UpToIso,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FamilySpec {
    pub n_states: usize,
    pub n_letters: usize,
    pub filters: Filters,
    pub symmetry: Symmetry,
}

/// Default cap on the number of candidate tables a family may scan.
pub const DEFAULT_MAX_UNIVERSE: usize = 1_000_000_000;

impl FamilySpec {
    pub fn new(n_states: usize, n_letters: usize, filters: Filters, symmetry: Symmetry) -> Self {
        FamilySpec {
            n_states,
            n_letters,
            filters: filters.normalized(),
            symmetry,
        }
    }
}

/// Random access to the candidate tables of a family. Reversible families
/// draw each `δ` column from the permutations of the states, invertible
/// families each `ρ` row from the permutations of the letters; otherwise
/// all functions are candidates.
#[derive(Clone, Debug)]
pub struct Family {
    spec: FamilySpec,
    columns: Vec<Vec<u32>>,
    rows: Vec<Vec<u32>>,
    n_column_choices: usize,
    n_row_choices: usize,
    size: usize,
}

fn all_functions(n: usize) -> Vec<Vec<u32>> {
    let total = (n as u64).pow(n as u32) as usize;
    (0..total)
        .map(|mut k| {
            let mut f = vec![0; n];
            for v in f.iter_mut().rev() {
                *v = (k % n) as u32;
                k /= n;
            }
            f
        })
        .collect()
}

fn checked_pow(base: usize, exp: usize) -> Option<u128> {
    (0..exp).try_fold(1u128, |acc, _| acc.checked_mul(base as u128))
}

impl Family {
    pub fn new(spec: FamilySpec, max_universe: usize) -> Result<Self, BudgetExceeded> {
        let spec = FamilySpec::new(spec.n_states, spec.n_letters, spec.filters, spec.symmetry);
        let (n, l) = (spec.n_states, spec.n_letters);
        assert!(
            n >= 1 && l >= 1,
            "families need at least one state and one letter"
        );
        let factorial = |k: usize| (1..=k as u128).product::<u128>();
        let col_count = if spec.filters.reversible {
            factorial(n)
        } else {
            checked_pow(n, n).unwrap_or(u128::MAX)
        };
        let row_count = if spec.filters.invertible {
            factorial(l)
        } else {
            checked_pow(l, l).unwrap_or(u128::MAX)
        };
        let size = checked_pow(col_count.min(usize::MAX as u128) as usize, l)
            .zip(checked_pow(row_count.min(usize::MAX as u128) as usize, n))
            .and_then(|(a, b)| a.checked_mul(b))
            .unwrap_or(u128::MAX);
        if size > max_universe as u128 {
            return Err(BudgetExceeded {
                required: size,
                budget: max_universe,
            });
        }
        let columns = if spec.filters.reversible {
            permutations(n)
        } else {
            all_functions(n)
        };
        let rows = if spec.filters.invertible {
            permutations(l)
        } else {
            all_functions(l)
        };
        Ok(Family {
            spec,
            n_column_choices: columns.len(),
            n_row_choices: rows.len(),
            columns,
            rows,
            size: size as usize,
        })
    }

    pub fn spec(&self) -> &FamilySpec {
        &self.spec
    }

    /// Number of candidate tables scanned, before filters.
    pub fn universe_size(&self) -> usize {
        self.size
    }

    /// Raw state-major tables of candidate `index`. The `δ` choice is the
    /// most significant digit, letter 0 first, then the `ρ` rows, state 0
    /// first.
    pub fn tables_at(&self, mut index: usize) -> (Vec<u32>, Vec<u32>) {
        let (n, l) = (self.spec.n_states, self.spec.n_letters);
        let mut row_digits = vec![0; n];
        for d in row_digits.iter_mut().rev() {
            *d = index % self.n_row_choices;
            index /= self.n_row_choices;
        }
        let mut col_digits = vec![0; l];
        for d in col_digits.iter_mut().rev() {
            *d = index % self.n_column_choices;
            index /= self.n_column_choices;
        }
        let mut delta = vec![0; n * l];
        let mut rho = vec![0; n * l];
        for x in 0..n {
            for i in 0..l {
                delta[x * l + i] = self.columns[col_digits[i]][x];
                rho[x * l + i] = self.rows[row_digits[x]][i];
            }
        }
        (delta, rho)
    }

    /// Candidate `index` if it passes the filters and, in up-to-iso mode, is
    /// its own canonical form.
    pub fn machine_at(&self, index: usize) -> Option<MealyMachine> {
        let (delta, rho) = self.tables_at(index);
        let (n, l) = (self.spec.n_states, self.spec.n_letters);
        if self.spec.filters.bireversible && !tables_bireversible(n, l, &delta, &rho) {
            return None;
        }
        let m = MealyMachine::from_tables(n, l, delta, rho).expect("family tables are valid");
        if !self.spec.filters.accepts(&m) {
            return None;
        }
        if self.spec.symmetry == Symmetry::UpToIso && canonical_form(&m) != table_key(&m) {
            return None;
        }
        Some(m)
    }

    pub fn iter(&self) -> impl Iterator<Item = MealyMachine> + '_ {
        (0..self.size).filter_map(|k| self.machine_at(k))
    }
}

/// Quick bireversibility check on invertible reversible raw tables: the
/// inverse's columns `x ↦ δ_{ρ_x⁻¹(j)}(x)` must be permutations.
fn tables_bireversible(n: usize, l: usize, delta: &[u32], rho: &[u32]) -> bool {
    let mut seen = vec![false; n];
    for j in 0..l as u32 {
        seen.iter_mut().for_each(|s| *s = false);
        for x in 0..n {
            let Some(i) = rho[x * l..(x + 1) * l].iter().position(|&o| o == j) else {
                return false;
            };
            let y = delta[x * l + i] as usize;
            if seen[y] {
                return false;
            }
            seen[y] = true;
        }
    }
    true
}

/// All machines of the family, in candidate order.
pub fn enumerate_family(spec: FamilySpec) -> Result<Vec<MealyMachine>, BudgetExceeded> {
    let family = Family::new(spec, DEFAULT_MAX_UNIVERSE)?;
    Ok(family.iter().collect())
}

/// A uniformly random table satisfying the invertible and reversible
/// filters by construction; bireversibility, connectedness and minimality
/// are reached by rejection.
pub fn random_machine<R: Rng + ?Sized>(
    rng: &mut R,
    n: usize,
    l: usize,
    filters: Filters,
) -> MealyMachine {
    let filters = filters.normalized();
    loop {
        let mut delta = vec![0; n * l];
        let mut rho = vec![0; n * l];
        for i in 0..l {
            let mut col: Vec<u32> = (0..n as u32).collect();
            if filters.reversible {
                col.shuffle(rng);
            } else {
                col.iter_mut().for_each(|v| *v = rng.gen_range(0..n as u32));
            }
            for x in 0..n {
                delta[x * l + i] = col[x];
            }
        }
        for x in 0..n {
            let mut row: Vec<u32> = (0..l as u32).collect();
            if filters.invertible {
                row.shuffle(rng);
            } else {
                row.iter_mut().for_each(|v| *v = rng.gen_range(0..l as u32));
            }
            rho[x * l..(x + 1) * l].copy_from_slice(&row);
        }
        let m = MealyMachine::from_tables(n, l, delta, rho).expect("random tables are valid");
        if filters.accepts(&m) {
            return m;
        }
    }
}

/// A uniformly random permutation of `0..n`.
pub fn random_permutation<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Vec<u32> {
    let mut p: Vec<u32> = (0..n as u32).collect();
    p.shuffle(rng);
    p
}

/// What to compute for each machine of a census.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Analysis {
    MdTriviality,
    Verdict,
    ConnectionDegree,
    SemigroupOrder,
}

#[derive(Clone, Debug)]
pub struct CensusOptions {
    /// Worker threads; `None` uses the global pool.
    pub jobs: Option<usize>,
    /// Completed rows, one JSON object per line; existing rows are reused.
    pub journal: Option<PathBuf>,
    pub max_universe: usize,
    pub max_power: usize,
    pub semigroup_budget: SemigroupBudget,
    /// Count to look for among the symmetry modes.
    pub target: Option<usize>,
}

impl Default for CensusOptions {
    fn default() -> Self {
        CensusOptions {
            jobs: None,
            journal: None,
            max_universe: DEFAULT_MAX_UNIVERSE,
            max_power: DEFAULT_MAX_POWER,
            semigroup_budget: SemigroupBudget::default(),
            target: None,
        }
    }
}

/// One analyzed machine. Analyses that were not requested stay empty.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CensusRow {
    /// Canonical key of the isomorphism class.
    pub key: String,
    /// The machine's own table, in key layout.
    pub table: String,
    pub connected: bool,
    pub minimal: bool,
    pub bireversible: bool,
    pub md_trivial: Option<bool>,
    pub verdict: Option<String>,
    pub certificate: Option<String>,
    pub degree: Option<String>,
    pub order: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModeCount {
    pub mode: String,
    pub count: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct CensusReport {
    pub spec: FamilySpec,
    pub analyses: Vec<Analysis>,
    /// Candidate tables scanned before filtering.
    pub universe: usize,
    pub counts: Vec<ModeCount>,
    pub target: Option<usize>,
    /// Modes whose count equals the target.
    pub target_modes: Vec<String>,
    /// Row count per verdict label (or md-triviality when no verdicts ran).
    pub tallies: BTreeMap<String, usize>,
    pub elapsed_ms: u128,
    #[serde(skip)]
    pub rows: Vec<CensusRow>,
}

impl CensusReport {
    pub fn count(&self, mode: &str) -> Option<usize> {
        self.counts.iter().find(|c| c.mode == mode).map(|c| c.count)
    }

    /// JSON summary: everything but the rows, plus their number.
    pub fn summary_json(&self) -> serde_json::Value {
        let mut v = serde_json::to_value(self).expect("report serializes");
        v["rows"] = serde_json::Value::from(self.rows.len());
        v
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<(), csv::Error> {
        let mut w = csv::Writer::from_writer(out);
        for row in &self.rows {
            w.serialize(row)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn write_files(&self, csv_path: &Path, json_path: &Path) -> Result<(), CensusError> {
        self.write_csv(File::create(csv_path)?)?;
        let json = serde_json::to_string_pretty(&self.summary_json()).expect("summary serializes");
        fs::write(json_path, json + "\n")?;
        Ok(())
    }
}

#[derive(Debug, thiserror::Error)]
pub enum CensusError {
    #[error(transparent)]
    Budget(#[from] BudgetExceeded),
    #[error(transparent)]
    TooLarge(#[from] TooLarge),
    #[error("journal: {0}")]
    Io(#[from] io::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("journal line {line}: {source}")]
    Journal {
        line: usize,
        source: serde_json::Error,
    },
    #[error("thread pool: {0}")]
    Pool(String),
}

pub const MODES: [&str; 6] = [
    "labeled",
    "up-to-iso",
    "up-to-iso-connected",
    "up-to-iso-minimal",
    "up-to-iso-connected-minimal",
    "up-to-state-renaming",
];

#[derive(Default)]
struct Scan {
    counts: [usize; 6],
    machines: Vec<(CanonicalKey, MealyMachine, bool, bool)>,
}

impl Scan {
    fn merge(mut self, other: Scan) -> Scan {
        for (a, b) in self.counts.iter_mut().zip(other.counts) {
            *a += b;
        }
        self.machines.extend(other.machines);
        self
    }
}

fn scan_one(family: &Family, index: usize, keep_labeled: bool, mut scan: Scan) -> Scan {
    let (delta, rho) = family.tables_at(index);
    let spec = family.spec();
    let (n, l) = (spec.n_states, spec.n_letters);
    if spec.filters.bireversible && !tables_bireversible(n, l, &delta, &rho) {
        return scan;
    }
    let m = MealyMachine::from_tables(n, l, delta, rho).expect("family tables are valid");
    if !spec.filters.accepts(&m) {
        return scan;
    }
    let key = canonical_form(&m);
    let own = table_key(&m);
    let connected = components(&m).connected;
    let minimal = is_minimal(&m);
    scan.counts[0] += 1;
    let canonical = key == own;
    if canonical {
        scan.counts[1] += 1;
        scan.counts[2] += connected as usize;
        scan.counts[3] += minimal as usize;
        scan.counts[4] += (connected && minimal) as usize;
    }
    let state_key = state_canonical_form(&m).expect("size checked by canonical_form");
    scan.counts[5] += (state_key == own) as usize;
    if keep_labeled || canonical {
        scan.machines.push((key, m, connected, minimal));
    }
    scan
}

fn summarize_verdict(v: &Verdict) -> (String, String) {
    let cert = match v.evidence() {
        Some(Evidence::DisconnectedPower { exponent }) => format!("disconnected power {exponent}"),
        Some(Evidence::Reduction { on_dual, trace }) => format!(
            "md-reduction{} in {} steps to {}x{}",
            if *on_dual { " of the dual" } else { "" },
            trace.steps.len(),
            trace.result.n_states(),
            trace.result.n_letters()
        ),
        None => match v {
            Verdict::Unknown { bound } => format!("all powers up to {bound} connected"),
            _ => String::new(),
        },
    };
    (v.label().to_string(), cert)
}

fn analyze(
    key: &CanonicalKey,
    m: &MealyMachine,
    connected: bool,
    minimal: bool,
    analyses: &[Analysis],
    options: &CensusOptions,
) -> CensusRow {
    let mut row = CensusRow {
        key: key.to_string(),
        table: table_key(m).to_string(),
        connected,
        minimal,
        bireversible: m.is_bireversible(),
        md_trivial: None,
        verdict: None,
        certificate: None,
        degree: None,
        order: None,
    };
    for analysis in analyses {
        match analysis {
            Analysis::MdTriviality => row.md_trivial = Some(is_md_trivial(m)),
            Analysis::Verdict => {
                let (verdict, cert) = match decide(m, options.max_power) {
                    Ok(v) => summarize_verdict(&v),
                    Err(DecideError::Precondition(_)) => ("not applicable".into(), String::new()),
                    Err(DecideError::Budget(b)) => ("budget exceeded".into(), b.to_string()),
                };
                row.verdict = Some(verdict);
                row.certificate = Some(cert);
            }
            Analysis::ConnectionDegree => {
                row.degree = Some(match connection_degree(m, options.max_power) {
                    Ok(ConnectionDegree::Finite(n)) => n.to_string(),
                    Ok(ConnectionDegree::AtLeast(n)) => format!(">={n}"),
                    Err(_) => "budget exceeded".into(),
                })
            }
            Analysis::SemigroupOrder => {
                row.order = Some(match semigroup_order(m, &options.semigroup_budget) {
                    SemigroupOrder::Finite(n) => n.to_string(),
                    SemigroupOrder::AtLeast(n) => format!(">={n}"),
                })
            }
        }
    }
    row
}

fn load_journal(path: &Path) -> Result<HashMap<String, CensusRow>, CensusError> {
    let mut rows = HashMap::new();
    let file = match File::open(path) {
        Ok(f) => f,
        Err(e) if e.kind() == io::ErrorKind::NotFound => return Ok(rows),
        Err(e) => return Err(e.into()),
    };
    for (k, line) in BufReader::new(file).lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let row: CensusRow =
            serde_json::from_str(&line).map_err(|source| CensusError::Journal {
                line: k + 1,
                source,
            })?;
        rows.insert(row.table.clone(), row);
    }
    Ok(rows)
}

/// Runs a census: scans the family, counts it under every symmetry mode,
/// analyzes the machines selected by the spec's symmetry, and returns rows
/// sorted by canonical key, then by table.
pub fn classify_family(
    spec: FamilySpec,
    analyses: &[Analysis],
    options: &CensusOptions,
) -> Result<CensusReport, CensusError> {
    let start = Instant::now();
    let pool = {
        let mut b = rayon::ThreadPoolBuilder::new();
        if let Some(j) = options.jobs {
            b = b.num_threads(j);
        }
        b.build().map_err(|e| CensusError::Pool(e.to_string()))?
    };
    let family = Family::new(spec, options.max_universe)?;
    let spec = *family.spec();
    if spec.n_states > MAX_CANONICAL_SIZE || spec.n_letters > MAX_CANONICAL_SIZE {
        return Err(TooLarge {
            n_states: spec.n_states,
            n_letters: spec.n_letters,
            max: MAX_CANONICAL_SIZE,
        }
        .into());
    }
    let keep_labeled = spec.symmetry == Symmetry::Labeled;
    let done = match &options.journal {
        Some(p) => load_journal(p)?,
        None => HashMap::new(),
    };
    let journal = match &options.journal {
        Some(p) => Some(Mutex::new(
            OpenOptions::new().create(true).append(true).open(p)?,
        )),
        None => None,
    };

    let (scan, rows) = pool.install(|| -> Result<_, CensusError> {
        let scan = (0..family.universe_size())
            .into_par_iter()
            .fold(Scan::default, |acc, k| {
                scan_one(&family, k, keep_labeled, acc)
            })
            .reduce(Scan::default, Scan::merge);
        let rows = scan
            .machines
            .par_iter()
            .map(
                |(key, m, connected, minimal)| -> Result<CensusRow, CensusError> {
                    if let Some(row) = done.get(&table_key(m).to_string()) {
                        return Ok(row.clone());
                    }
                    let row = analyze(key, m, *connected, *minimal, analyses, options);
                    if let Some(j) = &journal {
                        let line = serde_json::to_string(&row).expect("row serializes");
                        let mut f = j.lock().expect("journal lock");
                        writeln!(f, "{line}")?;
                    }
                    Ok(row)
                },
            )
            .collect::<Result<Vec<_>, _>>()?;
        Ok((scan.counts, rows))
    })?;

    let mut rows = rows;
    rows.sort_by(|a, b| (&a.key, &a.table).cmp(&(&b.key, &b.table)));
    let counts: Vec<ModeCount> = MODES
        .iter()
        .zip(scan)
        .map(|(mode, count)| ModeCount {
            mode: mode.to_string(),
            count,
        })
        .collect();
    let target_modes = options
        .target
        .map(|t| {
            counts
                .iter()
                .filter(|c| c.count == t)
                .map(|c| c.mode.clone())
                .collect()
        })
        .unwrap_or_default();
    let mut tallies = BTreeMap::new();
    for row in &rows {
        let label = match (&row.verdict, row.md_trivial) {
            (Some(v), _) => v.clone(),
            (None, Some(true)) => "md-trivial".into(),
            (None, Some(false)) => "not md-trivial".into(),
            (None, None) => "analyzed".into(),
        };
        *tallies.entry(label).or_insert(0) += 1;
    }
    Ok(CensusReport {
        spec,
        analyses: analyses.to_vec(),
        universe: family.universe_size(),
        counts,
        target: options.target,
        target_modes,
        tallies,
        elapsed_ms: start.elapsed().as_millis(),
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::zoo;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn permutations_in_order() {
        assert_eq!(permutations(3).len(), 6);
        assert_eq!(permutations(3)[1], vec![0, 2, 1]);
        assert_eq!(permutations(1), vec![vec![0]]);
    }

    #[test]
    fn canonical_form_ignores_renaming() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..200 {
            let n = rng.gen_range(1..=5);
            let l = rng.gen_range(1..=4);
            let m = random_machine(&mut rng, n, l, Filters::default());
            let r = m.rename(
                &random_permutation(&mut rng, n),
                &random_permutation(&mut rng, l),
            );
            assert_eq!(canonical_form(&m), canonical_form(&r));
            let c = canonical_machine(&m);
            assert_eq!(canonical_form(&c), table_key(&c));
        }
    }

    #[test]
    fn canonical_form_separates() {
        assert_ne!(
            canonical_form(&zoo::aleshin()),
            canonical_form(&zoo::baby_aleshin())
        );
        assert_eq!(canonical_form(&zoo::triv()).to_string(), "1x1:00");
        // Brute-force orbit check on a small family.
        let family =
            enumerate_family(FamilySpec::new(2, 2, Filters::default(), Symmetry::Labeled)).unwrap();
        assert_eq!(family.len(), 256);
        let mut classes = std::collections::HashMap::new();
        for m in &family {
            let mut orbit: Vec<CanonicalKey> = permutations(2)
                .iter()
                .flat_map(|p| permutations(2).into_iter().map(move |q| (p.clone(), q)))
                .map(|(p, q)| table_key(&m.rename(&p, &q)))
                .collect();
            orbit.sort();
            classes
                .entry(canonical_form(m))
                .or_insert_with(|| orbit.clone());
            assert_eq!(classes[&canonical_form(m)], orbit);
        }
    }

    #[test]
    fn family_sizes() {
        let ir = Filters::invertible_reversible();
        assert_eq!(
            enumerate_family(FamilySpec::new(2, 2, ir, Symmetry::Labeled))
                .unwrap()
                .len(),
            16
        );
        assert_eq!(
            enumerate_family(FamilySpec::new(2, 3, ir, Symmetry::Labeled))
                .unwrap()
                .len(),
            288
        );
        let one =
            enumerate_family(FamilySpec::new(1, 1, Filters::default(), Symmetry::Labeled)).unwrap();
        assert_eq!(one.len(), 1);
        assert!(one[0].same_tables(&zoo::triv()));
        assert!(Family::new(
            FamilySpec::new(6, 6, Filters::default(), Symmetry::Labeled),
            1000
        )
        .is_err());
    }

    #[test]
    fn bireversible_filter_matches_predicate() {
        let spec = FamilySpec::new(3, 2, Filters::invertible_reversible(), Symmetry::Labeled);
        let all = enumerate_family(spec).unwrap();
        let bi = enumerate_family(FamilySpec::new(
            3,
            2,
            Filters::bireversible(),
            Symmetry::Labeled,
        ))
        .unwrap();
        assert_eq!(bi.len(), all.iter().filter(|m| m.is_bireversible()).count());
    }

    #[test]
    fn up_to_iso_picks_one_per_class() {
        let spec = FamilySpec::new(2, 2, Filters::invertible_reversible(), Symmetry::Labeled);
        let mut keys: Vec<_> = enumerate_family(spec)
            .unwrap()
            .iter()
            .map(canonical_form)
            .collect();
        keys.sort();
        keys.dedup();
        let iso = enumerate_family(FamilySpec {
            symmetry: Symmetry::UpToIso,
            ..spec
        })
        .unwrap();
        assert_eq!(iso.len(), keys.len());
    }

    #[test]
    fn census_of_two_state_two_letter() {
        let spec = FamilySpec::new(2, 2, Filters::invertible_reversible(), Symmetry::Labeled);
        let all = [
            Analysis::MdTriviality,
            Analysis::Verdict,
            Analysis::SemigroupOrder,
        ];
        let report = classify_family(spec, &all, &CensusOptions::default()).unwrap();
        assert_eq!(report.count("labeled"), Some(16));
        assert_eq!(report.rows.len(), 16);
        assert!(report.rows.iter().all(|r| matches!(
            r.verdict.as_deref(),
            Some("finite semigroup") | Some("free semigroup of rank 2")
        )));
        let iso = classify_family(
            FamilySpec {
                symmetry: Symmetry::UpToIso,
                ..spec
            },
            &[Analysis::MdTriviality],
            &CensusOptions::default(),
        )
        .unwrap();
        assert_eq!(iso.rows.len(), iso.count("up-to-iso").unwrap());
    }

    #[test]
    fn census_is_deterministic_and_resumable() {
        let dir = tempfile::tempdir().unwrap();
        let journal = dir.path().join("journal.jsonl");
        let spec = FamilySpec::new(3, 2, Filters::bireversible(), Symmetry::UpToIso);
        let options = CensusOptions {
            journal: Some(journal.clone()),
            jobs: Some(2),
            ..CensusOptions::default()
        };
        let a = classify_family(spec, &[Analysis::MdTriviality], &options).unwrap();
        let lines = fs::read_to_string(&journal).unwrap().lines().count();
        assert_eq!(lines, a.rows.len());
        let b = classify_family(spec, &[Analysis::MdTriviality], &options).unwrap();
        assert_eq!(fs::read_to_string(&journal).unwrap().lines().count(), lines);
        assert_eq!(a.rows, b.rows);
        let (mut x, mut y) = (Vec::new(), Vec::new());
        a.write_csv(&mut x).unwrap();
        b.write_csv(&mut y).unwrap();
        assert_eq!(x, y);
        let mut sa = a.summary_json();
        let mut sb = b.summary_json();
        sa["elapsed_ms"] = 0.into();
        sb["elapsed_ms"] = 0.into();
        assert_eq!(sa, sb);
    }
}
