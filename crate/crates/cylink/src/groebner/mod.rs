//! Buchberger's algorithm with budget control.
//!
//! The engine favors predictability over cleverness: normal selection
//! strategy (smallest lcm degree first), Gebauer-Moeller pair elimination,
//! full interreduction at the end, and deterministic tie-breaking everywhere
//! so a run is reproducible bit for bit. Budgets cut off runaway
//! computations with a structured error carrying partial statistics.

mod quotient;

pub use quotient::{
    graded_dimension, is_zero_dimensional, krull_dimension, standard_monomials,
    StandardMonomialSet,
};

use serde::{Deserialize, Serialize};
use std::cmp::Reverse;
use std::collections::{BinaryHeap, HashSet};
use std::time::{Duration, Instant};

use crate::algebra::{
    merge_sub_scaled, AlgebraError, CoefficientField, ExponentVector, MonomialOrder, Polynomial,
    PolynomialJson, Term, NVARS,
};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum GroebnerError {
    #[error("budget exhausted ({limit}) after {stats:?}")]
    BudgetExceeded {
        limit: &'static str,
        stats: GroebnerStats,
    },
    #[error("quotient ring is not finite dimensional")]
    NotZeroDimensional,
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
}

/// Caps on a single Buchberger run. The defaults correspond to a desk-scale
/// task allowance: ten minutes of wall time and a working set around the
/// hundred-million-term mark.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct Budget {
    pub max_reduction_steps: u64,
    pub max_pairs: u64,
    pub max_basis_terms: u64,
    pub wall_limit: Duration,
}

impl Default for Budget {
    fn default() -> Self {
        Budget {
            max_reduction_steps: u64::MAX,
            max_pairs: u64::MAX,
            max_basis_terms: 100_000_000,
            wall_limit: Duration::from_secs(600),
        }
    }
}

impl Budget {
    pub fn with_wall_limit(secs: u64) -> Self {
        Budget {
            wall_limit: Duration::from_secs(secs),
            ..Budget::default()
        }
    }

    /// Effectively unlimited; used by callers that manage time themselves.
    pub fn unlimited() -> Self {
        Budget {
            max_reduction_steps: u64::MAX,
            max_pairs: u64::MAX,
            max_basis_terms: u64::MAX,
            wall_limit: Duration::from_secs(u64::MAX / 4),
        }
    }
}

#[derive(Clone, Copy, Debug, Default, Serialize, Deserialize)]
pub struct GroebnerStats {
    pub pairs_generated: u64,
    pub pairs_eliminated: u64,
    pub pairs_reduced: u64,
    pub zero_reductions: u64,
    pub reduction_steps: u64,
    pub basis_len: usize,
    pub elapsed_ms: u64,
}

/// A set of generators over one field and one order.
#[derive(Clone, Debug)]
pub struct Ideal<F: CoefficientField> {
    generators: Vec<Polynomial<F>>,
    order: MonomialOrder,
}

impl<F: CoefficientField> Ideal<F> {
    /// Zero generators are dropped; remaining generators must share a field.
    /// They are re-sorted under `order` regardless of how they arrived.
    pub fn new(
        generators: Vec<Polynomial<F>>,
        order: MonomialOrder,
    ) -> Result<Self, GroebnerError> {
        let mut gens: Vec<Polynomial<F>> = Vec::with_capacity(generators.len());
        for g in generators {
            if g.is_zero() {
                continue;
            }
            if let Some(prev) = gens.first() {
                if prev.field().descriptor() != g.field().descriptor() {
                    return Err(AlgebraError::FieldMismatch {
                        left: prev.field().descriptor(),
                        right: g.field().descriptor(),
                    }
                    .into());
                }
            }
            gens.push(g.reordered(order));
        }
        Ok(Ideal {
            generators: gens,
            order,
        })
    }

    pub fn generators(&self) -> &[Polynomial<F>] {
        &self.generators
    }

    pub fn order(&self) -> MonomialOrder {
        self.order
    }
}

/// A reduced Groebner basis: monic elements, none reducible by the others,
/// sorted ascending by leading term. For a fixed ideal and order this form
/// is unique.
#[derive(Clone, Debug)]
pub struct GroebnerBasis<F: CoefficientField> {
    elements: Vec<Polynomial<F>>,
    leading: Vec<ExponentVector>,
    order: MonomialOrder,
    stats: GroebnerStats,
}

impl<F: CoefficientField> GroebnerBasis<F> {
    pub fn elements(&self) -> &[Polynomial<F>] {
        &self.elements
    }

    pub fn leading_terms(&self) -> &[ExponentVector] {
        &self.leading
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn order(&self) -> MonomialOrder {
        self.order
    }

    pub fn stats(&self) -> &GroebnerStats {
        &self.stats
    }

    /// Serialization with the weight system carried alongside, mirroring the
    /// single-polynomial JSON layout.
    pub fn to_json(&self, weights: [u32; NVARS]) -> Result<serde_json::Value, GroebnerError> {
        let mut elems = Vec::with_capacity(self.elements.len());
        for e in &self.elements {
            elems.push(PolynomialJson::encode(e, weights)?);
        }
        Ok(serde_json::json!({
            "order": self.order,
            "length": self.elements.len(),
            "elements": elems,
        }))
    }
}

struct Tracker {
    budget: Budget,
    start: Instant,
    steps: u64,
    pairs: u64,
    tick: u32,
}

impl Tracker {
    fn new(budget: Budget) -> Self {
        Tracker {
            budget,
            start: Instant::now(),
            steps: 0,
            pairs: 0,
            tick: 0,
        }
    }

    #[inline]
    fn step(&mut self) -> Result<(), &'static str> {
        self.steps += 1;
        if self.steps > self.budget.max_reduction_steps {
            return Err("reduction step cap");
        }
        self.tick = self.tick.wrapping_add(1);
        if self.tick & 0x3ff == 0 && self.start.elapsed() > self.budget.wall_limit {
            return Err("wall clock limit");
        }
        Ok(())
    }

    fn pair(&mut self) -> Result<(), &'static str> {
        self.pairs += 1;
        if self.pairs > self.budget.max_pairs {
            return Err("pair cap");
        }
        if self.start.elapsed() > self.budget.wall_limit {
            return Err("wall clock limit");
        }
        Ok(())
    }
}

/// Fully reduces `p` modulo the rows of `basis` marked live. Divisors are
/// tried in basis order, first match wins, which makes the result
/// deterministic for a fixed basis sequence.
fn reduce_full<F: CoefficientField>(
    p: Polynomial<F>,
    basis: &[Polynomial<F>],
    leading: &[ExponentVector],
    live: Option<&[bool]>,
    skip: Option<usize>,
    tracker: &mut Tracker,
) -> Result<Polynomial<F>, &'static str> {
    let field = p.field().clone();
    let order = p.order();
    let mut work: Vec<Term<F::Elem>> = p.terms().to_vec();
    let mut pos = 0usize;
    let mut tail: Vec<Term<F::Elem>> = Vec::new();

    'outer: while pos < work.len() {
        let lt = &work[pos];
        for (k, ltk) in leading.iter().enumerate() {
            if Some(k) == skip || live.map_or(false, |l| !l[k]) {
                continue;
            }
            if ltk.divides(&lt.mono) {
                let shift = ltk.quotient_into(&lt.mono).unwrap();
                let g = &basis[k];
                let c = field.div(&lt.coeff, &g.leading_term().unwrap().coeff);
                work = merge_sub_scaled(&field, order, &work[pos..], &c, &shift, g.terms());
                pos = 0;
                tracker.step()?;
                continue 'outer;
            }
        }
        tail.push(work[pos].clone());
        pos += 1;
    }
    Ok(Polynomial::from_sorted_terms(field, order, tail))
}

/// Remainder of `f` on division by `basis`, reducing every term. For a
/// reduced Groebner basis this is the canonical representative of `f` in the
/// quotient ring. Divisor choice is the first match in the given order, so
/// callers that need determinism across runs should pass the basis sorted
/// ascending by leading term (as `buchberger` returns it).
pub fn normal_form<F: CoefficientField>(
    f: &Polynomial<F>,
    basis: &[Polynomial<F>],
) -> Result<Polynomial<F>, GroebnerError> {
    for g in basis {
        if g.is_zero() {
            return Err(AlgebraError::ZeroPolynomial.into());
        }
        if g.field().descriptor() != f.field().descriptor() {
            return Err(AlgebraError::FieldMismatch {
                left: f.field().descriptor(),
                right: g.field().descriptor(),
            }
            .into());
        }
        if g.order() != f.order() {
            return Err(AlgebraError::OrderMismatch.into());
        }
    }
    let leading: Vec<ExponentVector> = basis
        .iter()
        .map(|g| g.leading_term().unwrap().mono)
        .collect();
    let mut tracker = Tracker::new(Budget::unlimited());
    reduce_full(f.clone(), basis, &leading, None, None, &mut tracker).map_err(|limit| {
        GroebnerError::BudgetExceeded {
            limit,
            stats: GroebnerStats::default(),
        }
    })
}

/// S-polynomial of two nonzero polynomials, cross-scaled so it stays
/// denominator free over the rationals.
fn s_polynomial<F: CoefficientField>(f: &Polynomial<F>, g: &Polynomial<F>) -> Polynomial<F> {
    let ltf = f.leading_term().unwrap();
    let ltg = g.leading_term().unwrap();
    let m = ltf.mono.lcm(&ltg.mono);
    let shift_f = ltf.mono.quotient_into(&m).unwrap();
    let shift_g = ltg.mono.quotient_into(&m).unwrap();
    let scaled = f.mul_mono(&shift_f).scale(&ltg.coeff);
    scaled.sub_mul_term(&ltf.coeff, &shift_g, g)
}

type PairKey = (u64, [u32; NVARS], u32, u32);

struct PairQueue {
    heap: BinaryHeap<Reverse<PairKey>>,
    pending: HashSet<(u32, u32)>,
}

impl PairQueue {
    fn new() -> Self {
        PairQueue {
            heap: BinaryHeap::new(),
            pending: HashSet::new(),
        }
    }

    fn push(&mut self, order: &MonomialOrder, lcm: ExponentVector, i: u32, j: u32) {
        self.heap
            .push(Reverse((order.degree(&lcm), lcm.0, i, j)));
        self.pending.insert((i, j));
    }

    /// Next pair still pending, in normal-strategy order.
    fn pop(&mut self) -> Option<(u32, u32)> {
        while let Some(Reverse((_, _, i, j))) = self.heap.pop() {
            if self.pending.remove(&(i, j)) {
                return Some((i, j));
            }
        }
        None
    }
}

struct Engine<F: CoefficientField> {
    basis: Vec<Polynomial<F>>,
    leading: Vec<ExponentVector>,
    live: Vec<bool>,
    total_terms: u64,
    queue: PairQueue,
    order: MonomialOrder,
    stats: GroebnerStats,
}

impl<F: CoefficientField> Engine<F> {
    /// Adds `h` to the working basis and refreshes the pair queue using the
    /// Gebauer-Moeller criteria: among the new pairs only minimal lcms
    /// survive, coprime leading terms are dropped outright, and old pairs
    /// whose lcm factors through the new leading term are discarded.
    fn add_element(&mut self, h: Polynomial<F>) {
        let t = h.leading_term().unwrap().mono;
        let hidx = self.basis.len() as u32;

        struct Candidate {
            idx: u32,
            lcm: ExponentVector,
            coprime: bool,
        }
        let cand: Vec<Candidate> = (0..self.basis.len())
            .map(|i| {
                let lt = self.leading[i];
                Candidate {
                    idx: i as u32,
                    lcm: lt.lcm(&t),
                    coprime: lt.coprime(&t),
                }
            })
            .collect();
        self.stats.pairs_generated += cand.len() as u64;

        // New-pair sieve: keep a candidate if its leading terms are coprime
        // (so it can shadow equal-lcm peers) or no other surviving candidate
        // has an lcm dividing this one.
        let mut keep: Vec<Candidate> = Vec::with_capacity(cand.len());
        let mut dropped = 0u64;
        for k in 0..cand.len() {
            let c = &cand[k];
            let ok = c.coprime || {
                let rest_divides = cand[k + 1..]
                    .iter()
                    .any(|o| o.lcm.divides(&c.lcm))
                    || keep.iter().any(|o| o.lcm.divides(&c.lcm));
                !rest_divides
            };
            if ok {
                keep.push(Candidate {
                    idx: c.idx,
                    lcm: c.lcm,
                    coprime: c.coprime,
                });
            } else {
                dropped += 1;
            }
        }

        // Old-pair sieve: drop (i, j) once t divides lcm(i, j) strictly
        // inside both of the lcms it forms with i and j.
        let before = self.queue.pending.len();
        self.queue.pending.retain(|&(i, j)| {
            let li = self.leading[i as usize];
            let lj = self.leading[j as usize];
            let lij = li.lcm(&lj);
            !t.divides(&lij) || li.lcm(&t) == lij || lj.lcm(&t) == lij
        });
        dropped += (before - self.queue.pending.len()) as u64;

        for c in keep {
            if c.coprime {
                dropped += 1;
            } else {
                self.queue.push(&self.order, c.lcm, c.idx, hidx);
            }
        }
        self.stats.pairs_eliminated += dropped;

        // Elements whose leading term factors through t are redundant as
        // reductors from here on.
        for i in 0..self.basis.len() {
            if self.live[i] && t.divides(&self.leading[i]) {
                self.live[i] = false;
            }
        }

        self.total_terms += h.num_terms() as u64;
        self.basis.push(h);
        self.leading.push(t);
        self.live.push(true);
        self.stats.basis_len = self.basis.len();
    }
}

/// Buchberger's algorithm. Returns the reduced Groebner basis of `ideal`
/// under its order, or a budget error with the statistics gathered so far.
pub fn buchberger<F: CoefficientField>(
    ideal: &Ideal<F>,
    budget: &Budget,
) -> Result<GroebnerBasis<F>, GroebnerError> {
    let order = ideal.order();
    let mut tracker = Tracker::new(*budget);
    let mut engine = Engine {
        basis: Vec::new(),
        leading: Vec::new(),
        live: Vec::new(),
        total_terms: 0,
        queue: PairQueue::new(),
        order,
        stats: GroebnerStats::default(),
    };

    let fail = |limit: &'static str, mut stats: GroebnerStats, tracker: &Tracker| {
        stats.reduction_steps = tracker.steps;
        stats.elapsed_ms = tracker.start.elapsed().as_millis() as u64;
        GroebnerError::BudgetExceeded { limit, stats }
    };

    let mut gens: Vec<Polynomial<F>> = ideal
        .generators()
        .iter()
        .map(|g| g.canonical_scaled())
        .collect();
    gens.sort_by(|a, b| {
        order.cmp(
            &a.leading_term().unwrap().mono,
            &b.leading_term().unwrap().mono,
        )
    });
    gens.dedup();

    for g in gens {
        // Seed elements go through the same reduction path as S-polynomials
        // so the working basis never holds a reducible leading term.
        let nf = reduce_full(
            g,
            &engine.basis,
            &engine.leading,
            Some(&engine.live),
            None,
            &mut tracker,
        )
        .map_err(|l| fail(l, engine.stats, &tracker))?;
        if !nf.is_zero() {
            engine.add_element(nf.canonical_scaled());
        }
    }

    while let Some((i, j)) = engine.queue.pop() {
        tracker
            .pair()
            .map_err(|l| fail(l, engine.stats, &tracker))?;
        engine.stats.pairs_reduced += 1;
        let s = s_polynomial(&engine.basis[i as usize], &engine.basis[j as usize]);
        let nf = reduce_full(
            s,
            &engine.basis,
            &engine.leading,
            Some(&engine.live),
            None,
            &mut tracker,
        )
        .map_err(|l| fail(l, engine.stats, &tracker))?;
        if nf.is_zero() {
            engine.stats.zero_reductions += 1;
            continue;
        }
        engine.add_element(nf.canonical_scaled());
        if engine.total_terms > budget.max_basis_terms {
            return Err(fail("basis term cap", engine.stats, &tracker));
        }
    }

    let reduced = interreduce(engine.basis, order, &mut tracker)
        .map_err(|l| fail(l, engine.stats, &tracker))?;

    let mut stats = engine.stats;
    stats.basis_len = reduced.len();
    stats.reduction_steps = tracker.steps;
    stats.elapsed_ms = tracker.start.elapsed().as_millis() as u64;
    let leading = reduced
        .iter()
        .map(|g| g.leading_term().unwrap().mono)
        .collect();
    Ok(GroebnerBasis {
        elements: reduced,
        leading,
        order,
        stats,
    })
}

/// Minimalizes and tail-reduces a basis into reduced form: monic elements,
/// sorted ascending by leading term, no term of any element divisible by
/// another element's leading term.
fn interreduce<F: CoefficientField>(
    basis: Vec<Polynomial<F>>,
    order: MonomialOrder,
    tracker: &mut Tracker,
) -> Result<Vec<Polynomial<F>>, &'static str> {
    let mut sorted = basis;
    sorted.sort_by(|a, b| {
        order.cmp(
            &a.leading_term().unwrap().mono,
            &b.leading_term().unwrap().mono,
        )
    });

    // A divisor sorts before its multiples, so one ascending sweep finds the
    // minimal generating set of the leading term ideal.
    let mut minimal: Vec<Polynomial<F>> = Vec::with_capacity(sorted.len());
    let mut min_lts: Vec<ExponentVector> = Vec::new();
    'next: for g in sorted {
        let lt = g.leading_term().unwrap().mono;
        for m in &min_lts {
            if m.divides(&lt) {
                continue 'next;
            }
        }
        min_lts.push(lt);
        minimal.push(g);
    }

    loop {
        let mut changed = false;
        for i in 0..minimal.len() {
            let nf = reduce_full(
                minimal[i].clone(),
                &minimal,
                &min_lts,
                None,
                Some(i),
                tracker,
            )?;
            debug_assert!(!nf.is_zero());
            if nf.num_terms() != minimal[i].num_terms() || nf != minimal[i] {
                minimal[i] = nf.canonical_scaled();
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }

    Ok(minimal.into_iter().map(|g| g.monic()).collect())
}

/// Checks the Buchberger criterion directly: every S-polynomial of the basis
/// reduces to zero. Quadratic in the basis length; meant for tests and
/// calibration, not production runs.
pub fn is_groebner_basis<F: CoefficientField>(gb: &GroebnerBasis<F>) -> bool {
    let elems = gb.elements();
    let mut tracker = Tracker::new(Budget::unlimited());
    for i in 0..elems.len() {
        for j in i + 1..elems.len() {
            let s = s_polynomial(&elems[i], &elems[j]);
            match reduce_full(s, elems, gb.leading_terms(), None, None, &mut tracker) {
                Ok(nf) if nf.is_zero() => {}
                _ => return false,
            }
        }
    }
    true
}
