//! Conflict-driven clause learning solver.
//!
//! - two-watched-literal propagation with blocker literals
//! - first-UIP learning with local clause minimization
//! - VSIDS branching over an indexed heap, seeded tie-breaking
//! - phase saving, Luby restarts, LBD/activity-based learnt clause reduction
//! - assumptions taken as the first decisions, so the clause database is never
//!   polluted by them

use std::sync::Arc;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{check_model, SatOracle, SolveBudget, SolveCost, SolveResult, Verdict};
use crate::cnf::{CnfFormula, Lit};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolverConfig {
    /// Seeds the initial activity perturbation that breaks branching ties.
    pub seed: u64,
    pub var_decay: f64,
    pub clause_decay: f64,
    /// Conflicts per unit of the Luby restart sequence.
    pub restart_base: u64,
    pub phase_saving: bool,
    /// Polarity tried first for variables without a saved phase.
    pub initial_phase: bool,
    /// Learnt clauses kept before the first database reduction.
    pub reduce_base: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            seed: 0,
            var_decay: 0.95,
            clause_decay: 0.999,
            restart_base: 100,
            phase_saving: true,
            initial_phase: false,
            reduce_base: 2000,
        }
    }
}

const NO_REASON: u32 = u32::MAX;
const UNDEF: u8 = 2;

#[derive(Debug)]
struct Clause {
    lits: Vec<u32>,
    learnt: bool,
    deleted: bool,
    lbd: u32,
    activity: f64,
}

impl Clone for Clause {
    fn clone(&self) -> Self {
        Clause { lits: self.lits.clone(), ..*self }
    }

    fn clone_from(&mut self, source: &Self) {
        self.lits.clone_from(&source.lits);
        self.learnt = source.learnt;
        self.deleted = source.deleted;
        self.lbd = source.lbd;
        self.activity = source.activity;
    }
}

#[derive(Debug, Clone, Copy)]
struct Watch {
    cref: u32,
    blocker: u32,
}

/// Max-heap of variables keyed by activity, with position index.
#[derive(Debug, Default)]
struct VarHeap {
    heap: Vec<u32>,
    pos: Vec<u32>,
}

impl Clone for VarHeap {
    fn clone(&self) -> Self {
        VarHeap { heap: self.heap.clone(), pos: self.pos.clone() }
    }

    fn clone_from(&mut self, source: &Self) {
        self.heap.clone_from(&source.heap);
        self.pos.clone_from(&source.pos);
    }
}

impl VarHeap {
    const ABSENT: u32 = u32::MAX;

    fn with_vars(n: usize) -> Self {
        VarHeap { heap: Vec::with_capacity(n), pos: vec![Self::ABSENT; n] }
    }

    fn contains(&self, v: usize) -> bool {
        self.pos[v] != Self::ABSENT
    }

    fn less(act: &[f64], a: u32, b: u32) -> bool {
        // strict order; ties by lower index first
        act[a as usize] > act[b as usize] || (act[a as usize] == act[b as usize] && a < b)
    }

    fn sift_up(&mut self, mut i: usize, act: &[f64]) {
        let v = self.heap[i];
        while i > 0 {
            let parent = (i - 1) / 2;
            if !Self::less(act, v, self.heap[parent]) {
                break;
            }
            self.heap[i] = self.heap[parent];
            self.pos[self.heap[i] as usize] = i as u32;
            i = parent;
        }
        self.heap[i] = v;
        self.pos[v as usize] = i as u32;
    }

    fn sift_down(&mut self, mut i: usize, act: &[f64]) {
        let v = self.heap[i];
        let len = self.heap.len();
        loop {
            let left = 2 * i + 1;
            if left >= len {
                break;
            }
            let right = left + 1;
            let child = if right < len && Self::less(act, self.heap[right], self.heap[left]) {
                right
            } else {
                left
            };
            if !Self::less(act, self.heap[child], v) {
                break;
            }
            self.heap[i] = self.heap[child];
            self.pos[self.heap[i] as usize] = i as u32;
            i = child;
        }
        self.heap[i] = v;
        self.pos[v as usize] = i as u32;
    }

    fn insert(&mut self, v: usize, act: &[f64]) {
        if self.contains(v) {
            return;
        }
        self.heap.push(v as u32);
        let i = self.heap.len() - 1;
        self.pos[v] = i as u32;
        self.sift_up(i, act);
    }

    fn increased(&mut self, v: usize, act: &[f64]) {
        if self.contains(v) {
            self.sift_up(self.pos[v] as usize, act);
        }
    }

    fn pop(&mut self, act: &[f64]) -> Option<usize> {
        let top = *self.heap.first()?;
        let last = self.heap.pop().unwrap();
        self.pos[top as usize] = Self::ABSENT;
        if !self.heap.is_empty() {
            self.heap[0] = last;
            self.pos[last as usize] = 0;
            self.sift_down(0, act);
        }
        Some(top as usize)
    }
}

/// Luby restart sequence `1, 1, 2, 1, 1, 2, 4, ...` (0-based index).
fn luby(mut i: u64) -> u64 {
    let mut size = 1u64;
    let mut seq = 0u32;
    while size < i + 1 {
        seq += 1;
        size = 2 * size + 1;
    }
    while size - 1 != i {
        size = (size - 1) / 2;
        seq -= 1;
        i %= size;
    }
    1u64 << seq
}

enum SearchOutcome {
    Sat,
    Unsat,
    Restart,
    Budget,
}

/// A CDCL solver over one immutable formula. Cloning is cheap relative to
/// construction and yields an independent solver in the same state.
#[derive(Debug, Clone)]
pub struct Solver {
    config: SolverConfig,
    original: Arc<CnfFormula>,
    num_vars: usize,
    clauses: Vec<Clause>,
    learnts: Vec<u32>,
    watches: Vec<Vec<Watch>>,
    assigns: Vec<u8>,
    level: Vec<u32>,
    reason: Vec<u32>,
    trail: Vec<u32>,
    trail_lim: Vec<usize>,
    qhead: usize,
    activity: Vec<f64>,
    var_inc: f64,
    cla_inc: f64,
    heap: VarHeap,
    polarity: Vec<bool>,
    seen: Vec<bool>,
    max_learnts: f64,
    ok: bool,
    // per-call counters
    conflicts: u64,
    decisions: u64,
    propagations: u64,
    restarts: u64,
}

impl Solver {
    pub fn new(formula: &CnfFormula, config: SolverConfig) -> Self {
        Self::from_shared(Arc::new(formula.clone()), config)
    }

    pub fn from_shared(formula: Arc<CnfFormula>, config: SolverConfig) -> Self {
        let n = formula.num_vars() as usize;
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        let activity: Vec<f64> = (0..n).map(|_| rng.gen::<f64>() * 1e-5).collect();
        let mut solver = Solver {
            max_learnts: config.reduce_base.max(formula.clauses().len() / 3) as f64,
            polarity: vec![config.initial_phase; n],
            config,
            num_vars: n,
            clauses: Vec::with_capacity(formula.clauses().len()),
            learnts: Vec::new(),
            watches: vec![Vec::new(); 2 * n],
            assigns: vec![UNDEF; n],
            level: vec![0; n],
            reason: vec![NO_REASON; n],
            trail: Vec::with_capacity(n),
            trail_lim: Vec::new(),
            qhead: 0,
            activity,
            var_inc: 1.0,
            cla_inc: 1.0,
            heap: VarHeap::with_vars(n),
            seen: vec![false; n],
            ok: !formula.is_contradiction(),
            conflicts: 0,
            decisions: 0,
            propagations: 0,
            restarts: 0,
            original: formula,
        };
        for v in 0..n {
            solver.heap.insert(v, &solver.activity);
        }
        let original = Arc::clone(&solver.original);
        for clause in original.clauses() {
            if !solver.ok {
                break;
            }
            let mut lits: Vec<u32> = clause.iter().map(|l| l.code() as u32).collect();
            lits.sort_unstable();
            lits.dedup();
            solver.add_clause(lits);
        }
        if solver.ok && solver.propagate().is_some() {
            solver.ok = false;
        }
        solver
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    /// Puts `self` into the state of `other`, reusing allocations. The
    /// result behaves exactly like `other.clone()`.
    pub fn reset_from(&mut self, other: &Solver) {
        self.config.clone_from(&other.config);
        self.original = Arc::clone(&other.original);
        self.num_vars = other.num_vars;
        self.clauses.clone_from(&other.clauses);
        self.learnts.clone_from(&other.learnts);
        self.watches.clone_from(&other.watches);
        self.assigns.clone_from(&other.assigns);
        self.level.clone_from(&other.level);
        self.reason.clone_from(&other.reason);
        self.trail.clone_from(&other.trail);
        self.trail_lim.clone_from(&other.trail_lim);
        self.qhead = other.qhead;
        self.activity.clone_from(&other.activity);
        self.var_inc = other.var_inc;
        self.cla_inc = other.cla_inc;
        self.heap.clone_from(&other.heap);
        self.polarity.clone_from(&other.polarity);
        self.seen.clone_from(&other.seen);
        self.max_learnts = other.max_learnts;
        self.ok = other.ok;
        self.conflicts = other.conflicts;
        self.decisions = other.decisions;
        self.propagations = other.propagations;
        self.restarts = other.restarts;
    }

    pub fn formula(&self) -> &CnfFormula {
        &self.original
    }

    #[inline]
    fn value(&self, lit: u32) -> u8 {
        let a = self.assigns[(lit >> 1) as usize];
        if a == UNDEF {
            UNDEF
        } else {
            a ^ (lit & 1) as u8
        }
    }

    fn decision_level(&self) -> u32 {
        self.trail_lim.len() as u32
    }

    fn add_clause(&mut self, lits: Vec<u32>) {
        match lits.len() {
            0 => self.ok = false,
            1 => match self.value(lits[0]) {
                1 => {}
                0 => self.ok = false,
                _ => self.enqueue(lits[0], NO_REASON),
            },
            _ => {
                self.attach(lits, false, 0);
            }
        }
    }

    fn attach(&mut self, lits: Vec<u32>, learnt: bool, lbd: u32) -> u32 {
        let cref = self.clauses.len() as u32;
        self.watches[lits[0] as usize].push(Watch { cref, blocker: lits[1] });
        self.watches[lits[1] as usize].push(Watch { cref, blocker: lits[0] });
        self.clauses.push(Clause { lits, learnt, deleted: false, lbd, activity: 0.0 });
        if learnt {
            self.learnts.push(cref);
        }
        cref
    }

    #[inline]
    fn enqueue(&mut self, lit: u32, reason: u32) {
        let v = (lit >> 1) as usize;
        self.assigns[v] = ((lit & 1) ^ 1) as u8;
        self.level[v] = self.decision_level();
        self.reason[v] = reason;
        self.trail.push(lit);
    }

    /// Returns the conflicting clause, if any.
    fn propagate(&mut self) -> Option<u32> {
        let mut conflict = None;
        while self.qhead < self.trail.len() {
            let p = self.trail[self.qhead];
            self.qhead += 1;
            self.propagations += 1;
            let false_lit = p ^ 1;
            let mut ws = std::mem::take(&mut self.watches[false_lit as usize]);
            let mut i = 0;
            let mut j = 0;
            while i < ws.len() {
                let w = ws[i];
                i += 1;
                if self.value(w.blocker) == 1 {
                    ws[j] = w;
                    j += 1;
                    continue;
                }
                let cref = w.cref as usize;
                {
                    let lits = &mut self.clauses[cref].lits;
                    if lits[0] == false_lit {
                        lits.swap(0, 1);
                    }
                }
                let first = self.clauses[cref].lits[0];
                if first != w.blocker && self.value(first) == 1 {
                    ws[j] = Watch { cref: w.cref, blocker: first };
                    j += 1;
                    continue;
                }
                let len = self.clauses[cref].lits.len();
                let mut moved = false;
                for k in 2..len {
                    let l = self.clauses[cref].lits[k];
                    if self.value(l) != 0 {
                        self.clauses[cref].lits.swap(1, k);
                        self.watches[l as usize].push(Watch { cref: w.cref, blocker: first });
                        moved = true;
                        break;
                    }
                }
                if moved {
                    continue;
                }
                ws[j] = Watch { cref: w.cref, blocker: first };
                j += 1;
                if self.value(first) == 0 {
                    conflict = Some(w.cref);
                    while i < ws.len() {
                        ws[j] = ws[i];
                        i += 1;
                        j += 1;
                    }
                } else {
                    self.enqueue(first, w.cref);
                }
            }
            ws.truncate(j);
            self.watches[false_lit as usize] = ws;
            if conflict.is_some() {
                self.qhead = self.trail.len();
                break;
            }
        }
        conflict
    }

    fn bump_var(&mut self, v: usize) {
        self.activity[v] += self.var_inc;
        if self.activity[v] > 1e100 {
            for a in self.activity.iter_mut() {
                *a *= 1e-100;
            }
            self.var_inc *= 1e-100;
        }
        self.heap.increased(v, &self.activity);
    }

    fn bump_clause(&mut self, cref: usize) {
        let c = &mut self.clauses[cref];
        c.activity += self.cla_inc;
        if c.activity > 1e20 {
            for &l in &self.learnts {
                self.clauses[l as usize].activity *= 1e-20;
            }
            self.cla_inc *= 1e-20;
        }
    }

    /// First-UIP analysis. Returns the learnt clause (asserting literal first)
    /// and the backjump level.
    fn analyze(&mut self, mut confl: u32) -> (Vec<u32>, u32) {
        let mut learnt: Vec<u32> = vec![0];
        let mut path = 0usize;
        let mut p: Option<u32> = None;
        let mut index = self.trail.len();
        let dl = self.decision_level();

        loop {
            let cref = confl as usize;
            if self.clauses[cref].learnt {
                self.bump_clause(cref);
            }
            let start = if p.is_some() { 1 } else { 0 };
            for k in start..self.clauses[cref].lits.len() {
                let q = self.clauses[cref].lits[k];
                let v = (q >> 1) as usize;
                if !self.seen[v] && self.level[v] > 0 {
                    self.bump_var(v);
                    self.seen[v] = true;
                    if self.level[v] >= dl {
                        path += 1;
                    } else {
                        learnt.push(q);
                    }
                }
            }
            loop {
                index -= 1;
                if self.seen[(self.trail[index] >> 1) as usize] {
                    break;
                }
            }
            let lit = self.trail[index];
            let v = (lit >> 1) as usize;
            p = Some(lit);
            confl = self.reason[v];
            self.seen[v] = false;
            path -= 1;
            if path == 0 {
                break;
            }
        }
        learnt[0] = p.unwrap() ^ 1;

        // local minimization: drop literals implied by the rest of the clause
        let mut kept = vec![learnt[0]];
        for &q in &learnt[1..] {
            let v = (q >> 1) as usize;
            let r = self.reason[v];
            let redundant = r != NO_REASON
                && self.clauses[r as usize].lits[1..].iter().all(|&x| {
                    let u = (x >> 1) as usize;
                    self.seen[u] || self.level[u] == 0
                });
            if !redundant {
                kept.push(q);
            }
        }
        for &q in &learnt[1..] {
            self.seen[(q >> 1) as usize] = false;
        }
        let mut learnt = kept;

        let back = if learnt.len() == 1 {
            0
        } else {
            let mut max_i = 1;
            for k in 2..learnt.len() {
                if self.level[(learnt[k] >> 1) as usize] > self.level[(learnt[max_i] >> 1) as usize] {
                    max_i = k;
                }
            }
            learnt.swap(1, max_i);
            self.level[(learnt[1] >> 1) as usize]
        };
        (learnt, back)
    }

    fn lbd(&mut self, lits: &[u32]) -> u32 {
        let mut levels: Vec<u32> = lits.iter().map(|&l| self.level[(l >> 1) as usize]).collect();
        levels.sort_unstable();
        levels.dedup();
        levels.len() as u32
    }

    fn cancel_until(&mut self, level: u32) {
        if self.decision_level() <= level {
            return;
        }
        let lim = self.trail_lim[level as usize];
        for k in (lim..self.trail.len()).rev() {
            let lit = self.trail[k];
            let v = (lit >> 1) as usize;
            if self.config.phase_saving {
                self.polarity[v] = lit & 1 == 0;
            }
            self.assigns[v] = UNDEF;
            self.reason[v] = NO_REASON;
            self.heap.insert(v, &self.activity);
        }
        self.trail.truncate(lim);
        self.trail_lim.truncate(level as usize);
        self.qhead = lim;
    }

    fn locked(&self, cref: u32) -> bool {
        let l0 = self.clauses[cref as usize].lits[0];
        self.value(l0) == 1 && self.reason[(l0 >> 1) as usize] == cref
    }

    fn reduce_db(&mut self) {
        let mut order = self.learnts.clone();
        order.sort_by(|&a, &b| {
            let ca = &self.clauses[a as usize];
            let cb = &self.clauses[b as usize];
            cb.lbd
                .cmp(&ca.lbd)
                .then(ca.activity.total_cmp(&cb.activity))
                .then(a.cmp(&b))
        });
        // `order` runs from worst (high LBD) to best; drop the first half
        let limit = order.len() / 2;
        let mut removed = 0;
        for &cref in &order {
            if removed >= limit {
                break;
            }
            let c = &self.clauses[cref as usize];
            if c.lbd <= 2 || c.lits.len() <= 2 || self.locked(cref) {
                continue;
            }
            self.clauses[cref as usize].deleted = true;
            removed += 1;
        }
        self.learnts.retain(|&c| !self.clauses[c as usize].deleted);
        for w in self.watches.iter_mut() {
            w.clear();
        }
        for (cref, c) in self.clauses.iter().enumerate() {
            if c.deleted {
                continue;
            }
            self.watches[c.lits[0] as usize].push(Watch { cref: cref as u32, blocker: c.lits[1] });
            self.watches[c.lits[1] as usize].push(Watch { cref: cref as u32, blocker: c.lits[0] });
        }
    }

    fn pick_branch(&mut self) -> Option<u32> {
        while let Some(v) = self.heap.pop(&self.activity) {
            if self.assigns[v] == UNDEF {
                let lit = 2 * v as u32 + (!self.polarity[v]) as u32;
                return Some(lit);
            }
        }
        None
    }

    fn search(
        &mut self,
        conflict_quota: u64,
        assumptions: &[u32],
        budget: &SolveBudget,
        start: &Instant,
    ) -> SearchOutcome {
        let max_conflicts = budget.max_conflicts();
        let mut local_conflicts = 0u64;
        loop {
            if let Some(confl) = self.propagate() {
                self.conflicts += 1;
                local_conflicts += 1;
                if self.conflicts > max_conflicts {
                    return SearchOutcome::Budget;
                }
                if self.decision_level() == 0 {
                    return SearchOutcome::Unsat;
                }
                let (learnt, back) = self.analyze(confl);
                self.cancel_until(back);
                if learnt.len() == 1 {
                    self.enqueue(learnt[0], NO_REASON);
                } else {
                    let lbd = self.lbd(&learnt);
                    let asserting = learnt[0];
                    let cref = self.attach(learnt, true, lbd);
                    self.bump_clause(cref as usize);
                    self.enqueue(asserting, cref);
                }
                self.var_inc /= self.config.var_decay;
                self.cla_inc /= self.config.clause_decay;
                if budget.mode == super::BudgetMode::WallSeconds
                    && start.elapsed().as_secs_f64() > budget.limit
                {
                    return SearchOutcome::Budget;
                }
            } else {
                if local_conflicts >= conflict_quota {
                    return SearchOutcome::Restart;
                }
                if self.learnts.len() as f64 >= self.max_learnts + self.trail.len() as f64 {
                    self.reduce_db();
                    self.max_learnts *= 1.1;
                }
                let mut next = None;
                while (self.decision_level() as usize) < assumptions.len() {
                    let a = assumptions[self.decision_level() as usize];
                    match self.value(a) {
                        1 => self.trail_lim.push(self.trail.len()),
                        0 => return SearchOutcome::Unsat,
                        _ => {
                            next = Some(a);
                            break;
                        }
                    }
                }
                let lit = match next {
                    Some(a) => a,
                    None => match self.pick_branch() {
                        Some(l) => l,
                        None => return SearchOutcome::Sat,
                    },
                };
                self.decisions += 1;
                if budget.mode == super::BudgetMode::WallSeconds
                    && self.decisions % 256 == 0
                    && start.elapsed().as_secs_f64() > budget.limit
                {
                    return SearchOutcome::Budget;
                }
                self.trail_lim.push(self.trail.len());
                self.enqueue(lit, NO_REASON);
            }
        }
    }

    /// Decides the formula under `assumptions` within `budget`. The solver is
    /// left at decision level 0 and may be queried again; learnt clauses are
    /// kept across calls.
    pub fn solve(&mut self, assumptions: &[Lit], budget: &SolveBudget) -> SolveResult {
        let start = Instant::now();
        self.conflicts = 0;
        self.decisions = 0;
        self.propagations = 0;
        self.restarts = 0;
        let codes: Vec<u32> = assumptions.iter().map(|l| l.code() as u32).collect();

        let outcome = if !self.ok {
            SearchOutcome::Unsat
        } else {
            loop {
                let quota = luby(self.restarts) * self.config.restart_base;
                match self.search(quota, &codes, budget, &start) {
                    SearchOutcome::Restart => {
                        self.restarts += 1;
                        self.cancel_until(0);
                    }
                    other => break other,
                }
            }
        };

        let mut verdict = match outcome {
            SearchOutcome::Sat => Verdict::Sat,
            SearchOutcome::Unsat => Verdict::Unsat,
            SearchOutcome::Budget | SearchOutcome::Restart => Verdict::BudgetExceeded,
        };
        let model = if verdict == Verdict::Sat {
            let model: Vec<bool> = self.assigns.iter().map(|&a| a == 1).collect();
            assert!(
                check_model(&self.original, &model, assumptions),
                "solver produced a model that violates the formula"
            );
            Some(model)
        } else {
            None
        };
        if self.decision_level() > 0 {
            self.cancel_until(0);
        }
        let wall_seconds = start.elapsed().as_secs_f64();
        if budget.mode == super::BudgetMode::WallSeconds && wall_seconds > budget.limit {
            verdict = Verdict::BudgetExceeded;
        }
        SolveResult {
            model: if verdict == Verdict::Sat { model } else { None },
            verdict,
            cost: SolveCost {
                conflicts: self.conflicts,
                decisions: self.decisions,
                propagations: self.propagations,
                wall_seconds,
            },
        }
    }
}

impl SatOracle for Solver {
    fn solve_under(&mut self, assumptions: &[Lit], budget: &SolveBudget) -> SolveResult {
        self.solve(assumptions, budget)
    }
}
