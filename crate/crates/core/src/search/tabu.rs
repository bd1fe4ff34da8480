use std::collections::{HashMap, VecDeque};
use std::path::Path;
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::Arc;
use std::time::Instant;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::journal::{read_journal, JournalRecord, JournalWriter};
use super::objective::{Evaluation, Objective};
use super::SearchError;
use crate::estimator::BackdoorSet;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SearchConfig {
    /// Neighborhood radius `R`.
    pub radius: usize,
    /// Stop once this much wall time has passed; checked between points.
    pub time_limit_seconds: Option<f64>,
    /// Stop after this many evaluated points, replayed ones included.
    pub max_evaluations: Option<u64>,
    /// Seeds neighborhood order and new centers.
    pub seed: u64,
    /// Failed jumps at one distance before the jump distance grows.
    pub k_escalate: u32,
    /// Start point; `1^n` when absent.
    pub initial_chi: Option<BackdoorSet>,
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig {
            radius: 1,
            time_limit_seconds: Some(60.0),
            max_evaluations: None,
            seed: 0,
            k_escalate: 4,
            initial_chi: None,
        }
    }
}

impl SearchConfig {
    pub fn validate(&self, n: usize) -> Result<(), SearchError> {
        let bad = |m: String| Err(SearchError::Config(m));
        if n == 0 {
            return bad("the search space needs at least one variable".into());
        }
        if self.radius == 0 || self.radius > n {
            return bad(format!("radius {} outside 1..={n}", self.radius));
        }
        if let Some(t) = self.time_limit_seconds {
            if !(t > 0.0) {
                return bad(format!("time limit must be positive, got {t}"));
            }
        }
        if self.max_evaluations == Some(0) {
            return bad("evaluation limit must be positive".into());
        }
        if self.k_escalate == 0 {
            return bad("k_escalate must be at least 1".into());
        }
        if let Some(c) = &self.initial_chi {
            if c.len() != n {
                return bad(format!("initial chi has length {}, expected {n}", c.len()));
            }
        }
        Ok(())
    }
}

/// All `χ' ≠ χ` with `d_H(χ, χ') <= radius`, in an order drawn from `rng`.
pub fn neighborhood(chi: &BackdoorSet, radius: usize, rng: &mut impl Rng) -> Vec<BackdoorSet> {
    let n = chi.len();
    let mut out = Vec::new();
    let mut idx = Vec::new();
    for d in 1..=radius.min(n) {
        combinations(n, d, &mut idx, &mut |flips| {
            let mut c = chi.chi().to_vec();
            for &i in flips {
                c[i] = !c[i];
            }
            out.push(BackdoorSet::new(c));
        });
    }
    out.shuffle(rng);
    out
}

fn combinations(n: usize, k: usize, prefix: &mut Vec<usize>, f: &mut impl FnMut(&[usize])) {
    if prefix.len() == k {
        f(prefix);
        return;
    }
    let start = prefix.last().map_or(0, |&i| i + 1);
    for i in start..=(n - (k - prefix.len())) {
        prefix.push(i);
        combinations(n, k, prefix, f);
        prefix.pop();
    }
}

fn binomial(n: usize, k: usize) -> u128 {
    (0..k as u128).fold(1u128, |acc, i| acc * (n as u128 - i) / (i + 1))
}

/// The search in progress. Feeding it the same values in the same order
/// always yields the same sequence of points.
#[derive(Debug, Clone)]
pub struct TabuState {
    n: usize,
    radius: usize,
    k_escalate: u32,
    rng: ChaCha8Rng,
    center: BackdoorSet,
    best: BackdoorSet,
    g_best: f64,
    /// Every evaluated point with its value.
    tabu: HashMap<BackdoorSet, f64>,
    /// Points still to evaluate in the current sweep.
    queue: VecDeque<BackdoorSet>,
    sweep: u64,
    improved: bool,
    failures: u32,
    exhausted: bool,
}

impl TabuState {
    pub fn new(n: usize, config: &SearchConfig) -> Result<Self, SearchError> {
        config.validate(n)?;
        let start = config.initial_chi.clone().unwrap_or_else(|| BackdoorSet::full(n));
        Ok(TabuState {
            n,
            radius: config.radius,
            k_escalate: config.k_escalate,
            rng: ChaCha8Rng::seed_from_u64(config.seed),
            center: start.clone(),
            best: start.clone(),
            g_best: f64::INFINITY,
            tabu: HashMap::new(),
            queue: VecDeque::from([start]),
            sweep: 0,
            // the first sweep is centered on the start point whatever its value
            improved: true,
            failures: 0,
            exhausted: false,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn center(&self) -> &BackdoorSet {
        &self.center
    }

    pub fn best(&self) -> &BackdoorSet {
        &self.best
    }

    pub fn g_best(&self) -> f64 {
        self.g_best
    }

    pub fn sweep(&self) -> u64 {
        self.sweep
    }

    pub fn evaluations(&self) -> usize {
        self.tabu.len()
    }

    pub fn is_tabu(&self, chi: &BackdoorSet) -> bool {
        self.tabu.contains_key(chi)
    }

    pub fn value(&self, chi: &BackdoorSet) -> Option<f64> {
        self.tabu.get(chi).copied()
    }

    /// Whether all `2^n` points have been evaluated.
    pub fn space_exhausted(&self) -> bool {
        self.n < 64 && self.tabu.len() as u128 >= 1u128 << self.n
    }

    /// The next point to evaluate, or `None` once the space is exhausted.
    pub fn next_point(&mut self) -> Option<BackdoorSet> {
        loop {
            if self.exhausted {
                return None;
            }
            while let Some(chi) = self.queue.front() {
                if self.tabu.contains_key(chi) {
                    self.queue.pop_front();
                } else {
                    return Some(chi.clone());
                }
            }
            self.start_sweep();
        }
    }

    fn start_sweep(&mut self) {
        if self.improved {
            self.center = self.best.clone();
            self.failures = 0;
        } else {
            match get_new_center(self) {
                Some(c) => {
                    self.center = c;
                    self.failures += 1;
                }
                None => {
                    self.exhausted = true;
                    return;
                }
            }
        }
        self.improved = false;
        self.sweep += 1;
        // the center itself goes first when a jump landed on a fresh point
        self.queue.push_back(self.center.clone());
        let nbhd = neighborhood(&self.center, self.radius, &mut self.rng);
        self.queue.extend(nbhd.into_iter().filter(|c| !self.tabu.contains_key(c)));
    }

    /// Enters `G(chi)` into the tabu list. Returns `false` if `chi` was
    /// already there (and changes nothing).
    pub fn commit(&mut self, chi: &BackdoorSet, g: f64) -> bool {
        if self.tabu.contains_key(chi) {
            return false;
        }
        self.tabu.insert(chi.clone(), g);
        if g < self.g_best {
            self.g_best = g;
            self.best = chi.clone();
            self.improved = true;
        }
        if self.queue.front() == Some(chi) {
            self.queue.pop_front();
        }
        true
    }

    /// Jump distance for the next new center.
    fn jump_distance(&self) -> usize {
        (2 + (self.failures / self.k_escalate) as usize).min(self.n)
    }
}

/// A fresh center: a seeded random point at the current jump distance from
/// `χ_best` that is not in the tabu list, or a uniform random unevaluated
/// point if that sphere is used up. `None` when every point is evaluated.
pub fn get_new_center(state: &mut TabuState) -> Option<BackdoorSet> {
    if state.space_exhausted() {
        return None;
    }
    let n = state.n;
    let d = state.jump_distance();
    let flip = |base: &BackdoorSet, idx: &[usize]| {
        let mut c = base.chi().to_vec();
        for &i in idx {
            c[i] = !c[i];
        }
        BackdoorSet::new(c)
    };
    let positions: Vec<usize> = (0..n).collect();
    for _ in 0..64 {
        let idx: Vec<usize> = positions.choose_multiple(&mut state.rng, d).copied().collect();
        let c = flip(&state.best, &idx);
        if !state.is_tabu(&c) {
            return Some(c);
        }
    }
    if binomial(n, d) <= 1 << 16 {
        let mut open = Vec::new();
        combinations(n, d, &mut Vec::new(), &mut |idx| {
            let c = flip(&state.best, idx);
            if !state.is_tabu(&c) {
                open.push(c);
            }
        });
        if let Some(c) = open.choose(&mut state.rng) {
            return Some(c.clone());
        }
    }
    for _ in 0..1024 {
        let c = BackdoorSet::new((0..n).map(|_| state.rng.gen()).collect());
        if !state.is_tabu(&c) {
            return Some(c);
        }
    }
    if n <= 24 {
        let open: Vec<BackdoorSet> = (0..1u64 << n)
            .map(|v| BackdoorSet::new((0..n).map(|i| v >> i & 1 == 1).collect()))
            .filter(|c| !state.is_tabu(c))
            .collect();
        return open.choose(&mut state.rng).cloned();
    }
    loop {
        let c = BackdoorSet::new((0..n).map(|_| state.rng.gen()).collect());
        if !state.is_tabu(&c) {
            return Some(c);
        }
    }
}

/// Rebuilds the search state from journal records by replaying them.
pub fn restore(records: &[JournalRecord], n: usize, config: &SearchConfig) -> Result<TabuState, SearchError> {
    if records.is_empty() {
        return Err(SearchError::EmptyJournal);
    }
    let mut state = TabuState::new(n, config)?;
    replay(&mut state, records, "")?;
    Ok(state)
}

fn replay(state: &mut TabuState, records: &[JournalRecord], fingerprint: &str) -> Result<(), SearchError> {
    for (i, r) in records.iter().enumerate() {
        let mismatch = |message: String| SearchError::JournalMismatch { line: i + 1, message };
        if !fingerprint.is_empty() && r.config_sha256 != fingerprint {
            return Err(mismatch(format!("config digest {} differs", r.config_sha256)));
        }
        let chi = BackdoorSet::from_hex(&r.chi, state.n).map_err(|e| mismatch(e.to_string()))?;
        match state.next_point() {
            Some(expected) if expected == chi => {}
            Some(expected) => {
                return Err(mismatch(format!("expected point {}, journal has {}", expected.to_hex(), r.chi)))
            }
            None => return Err(mismatch("search space already exhausted".into())),
        }
        state.commit(&chi, r.g_value);
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    TimeLimit,
    EvaluationLimit,
    Exhausted,
    Interrupted,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SearchOutcome {
    pub best: BackdoorSet,
    pub g_best: f64,
    pub termination: Termination,
    pub sweeps: u64,
    /// Every record, replayed ones included, in evaluation order.
    pub journal: Vec<JournalRecord>,
}

impl SearchOutcome {
    pub fn evaluations(&self) -> usize {
        self.journal.len()
    }
}

#[derive(Debug, Clone, Default)]
pub struct RunOptions<'a> {
    /// Journal file; records are appended as they are produced.
    pub journal: Option<&'a Path>,
    /// Continue the run recorded in `journal` instead of starting over.
    pub resume: bool,
    /// Keep the readable prefix of a damaged journal.
    pub salvage: bool,
    /// Configuration digest stamped into and checked against records.
    pub fingerprint: String,
    /// Set from elsewhere to stop cleanly between evaluations.
    pub stop: Option<Arc<AtomicBool>>,
}

/// Minimizes `objective` over `{0,1}^n`, starting from `1^n`.
pub fn tabu_minimize<O: Objective + ?Sized>(
    objective: &mut O,
    n: usize,
    config: &SearchConfig,
    options: RunOptions<'_>,
) -> Result<SearchOutcome, SearchError> {
    let started = Instant::now();
    let mut state = TabuState::new(n, config)?;
    let mut journal = Vec::new();
    let mut writer = None;
    if let Some(path) = options.journal {
        if options.resume && path.exists() {
            let contents = read_journal(path, options.salvage)?;
            replay(&mut state, &contents.records, &options.fingerprint)?;
            journal = contents.records;
            writer = Some(JournalWriter::append(path, contents.valid_bytes)?);
        } else {
            writer = Some(JournalWriter::create(path)?);
        }
    }

    let termination = loop {
        if options.stop.as_ref().is_some_and(|s| s.load(Ordering::SeqCst)) {
            break Termination::Interrupted;
        }
        if config.max_evaluations.is_some_and(|m| journal.len() as u64 >= m) {
            break Termination::EvaluationLimit;
        }
        if config.time_limit_seconds.is_some_and(|t| started.elapsed().as_secs_f64() >= t) {
            break Termination::TimeLimit;
        }
        let Some(chi) = state.next_point() else {
            break Termination::Exhausted;
        };
        let Evaluation { g_value, stats, timing } = objective.evaluate(&chi)?;
        let record = JournalRecord {
            index: journal.len() as u64,
            sweep: state.sweep(),
            center: state.center().to_hex(),
            chi: chi.to_hex(),
            n,
            s: chi.size(),
            g_value,
            stats,
            config_sha256: options.fingerprint.clone(),
            timing,
        };
        state.commit(&chi, g_value);
        if let Some(w) = writer.as_mut() {
            w.write(&record)?;
        }
        journal.push(record);
    };

    Ok(SearchOutcome {
        best: state.best().clone(),
        g_best: state.g_best(),
        termination,
        sweeps: state.sweep(),
        journal,
    })
}
