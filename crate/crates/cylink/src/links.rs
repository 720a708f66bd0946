//! Weight systems, degree-d monomial bases, and smooth-member selection.
//!
//! A weight system assigns a positive integer weight to each of the five
//! ambient coordinates and fixes the hypersurface degree d as the sum of the
//! weights. That choice makes the product of all five coordinates a basis
//! monomial, so the degree-d basis is never empty, and it is exactly the
//! condition for the hypersurface to carry a trivial canonical class.
//!
//! Members are cut out by integer-coefficient polynomials supported on the
//! degree-d basis. A member is usable for link construction only when its
//! singular locus is the origin alone; that screen runs over small prime
//! fields, escalating through a fixed prime ladder to rule out bad reduction
//! before a candidate is rejected and resampled.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fmt;
use thiserror::Error;

use crate::algebra::{
    reduce_mod_p, AlgebraError, CoefficientField, ExponentVector, MonomialOrder, OrderKind,
    Polynomial, PrimeField, Rationals, NVARS,
};
use crate::groebner::{buchberger, krull_dimension, Budget, GroebnerError};

/// Primes used for the singularity screen, tried in order. The first is the
/// working characteristic; the rest exist to distinguish genuine positive
/// dimension from bad reduction at the first prime.
pub const SCREENING_PRIMES: [u64; 4] = [101, 251, 1993, 1997];

/// Default number of coefficient resamples before giving up on a system.
pub const DEFAULT_RETRY_CAP: u32 = 25;

#[derive(Debug, Error)]
pub enum LinksError {
    #[error("weight at slot {index} must be positive")]
    NonPositiveWeight { index: usize },
    #[error("expected {expected} coefficients for this basis, got {got}")]
    CoefficientCount { expected: usize, got: usize },
    #[error("coefficient at index {index} is zero")]
    ZeroCoefficient { index: usize },
    #[error("monomial {mono} has weighted degree {got}, not the member degree {expected}")]
    MonomialDegree {
        mono: ExponentVector,
        got: u64,
        expected: u64,
    },
    #[error("no monomials selected")]
    EmptySelection,
    #[error("a generator that is nonzero over the rationals vanishes mod {prime}")]
    DegenerateReduction { prime: u64 },
    #[error("every member is singular along the coordinate stratum {vars:?}")]
    SingularStratum { vars: Vec<usize> },
    #[error("no smooth member found after {attempts} candidates")]
    NoSmoothMember { attempts: u32 },
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
    #[error(transparent)]
    Groebner(#[from] GroebnerError),
}

/// Five positive coordinate weights together with the member degree, which is
/// their sum.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize, Debug)]
pub struct WeightSystem {
    w: [u32; NVARS],
    d: u64,
}

impl WeightSystem {
    pub fn new(w: [u32; NVARS]) -> Result<Self, LinksError> {
        for (index, &wi) in w.iter().enumerate() {
            if wi == 0 {
                return Err(LinksError::NonPositiveWeight { index });
            }
        }
        let d = w.iter().map(|&wi| u64::from(wi)).sum();
        Ok(WeightSystem { w, d })
    }

    pub fn weights(&self) -> [u32; NVARS] {
        self.w
    }

    pub fn degree(&self) -> u64 {
        self.d
    }

    /// The weights sorted ascending; two systems with the same sorted weights
    /// describe the same member family up to coordinate relabelling.
    pub fn sorted_weights(&self) -> [u32; NVARS] {
        let mut s = self.w;
        s.sort_unstable();
        s
    }

    /// Relabel coordinates: slot `i` of the result takes the weight from slot
    /// `perm[i]`, matching [`ExponentVector::permuted`].
    pub fn permuted(&self, perm: &[usize; NVARS]) -> Self {
        let mut w = [0u32; NVARS];
        for i in 0..NVARS {
            w[i] = self.w[perm[i]];
        }
        WeightSystem { w, d: self.d }
    }

    /// A monomial order suited to this system: degrevlex graded by the
    /// weights, so every member and all its partials are homogeneous.
    pub fn order(&self) -> MonomialOrder {
        MonomialOrder::weighted(OrderKind::DegRevLex, self.w)
    }

    /// Weighted degrees up to d reachable by monomials supported inside the
    /// masked variable set.
    fn reachable_degrees(&self, mask: u8) -> Vec<bool> {
        let len = usize::try_from(self.d).expect("degree fits in usize") + 1;
        let mut reach = vec![false; len];
        reach[0] = true;
        for i in 0..NVARS {
            if mask & (1 << i) == 0 {
                continue;
            }
            let w = self.w[i] as usize;
            for t in w..len {
                if reach[t - w] {
                    reach[t] = true;
                }
            }
        }
        reach
    }

    /// On the open stratum where exactly the masked variables are nonzero,
    /// the only terms with a nonvanishing gradient are degree-d monomials
    /// supported inside the mask and monomials of the form m*z_e with m
    /// inside and e outside. The in-mask kind cuts the stratum on its own;
    /// lacking it, the e-partials are all there is, so at least as many
    /// distinct e as the stratum has dimensions must appear.
    fn stratum_covered(&self, mask: u8) -> bool {
        let reach = self.reachable_degrees(mask);
        let d = self.d as usize;
        if reach[d] {
            return true;
        }
        let needed = mask.count_ones() as usize;
        let mut cross = 0;
        for e in 0..NVARS {
            let we = self.w[e] as usize;
            if mask & (1 << e) == 0 && we <= d && reach[d - we] {
                cross += 1;
            }
        }
        cross >= needed
    }

    /// The smallest variable set whose stratum lacks the monomials above,
    /// along which every member of the family is therefore singular. None
    /// means a generic member has an isolated critical point.
    pub fn first_uncovered_stratum(&self) -> Option<Vec<usize>> {
        for size in 1..NVARS as u32 {
            for mask in 1u8..(1 << NVARS) {
                if mask.count_ones() == size && !self.stratum_covered(mask) {
                    return Some((0..NVARS).filter(|i| mask & (1 << i) != 0).collect());
                }
            }
        }
        None
    }

    /// True when some member can have an isolated critical point at the
    /// origin. Failing systems are rejected by the sampler without any
    /// screening, since no coefficient choice escapes the uncovered stratum.
    pub fn smoothable(&self) -> bool {
        self.first_uncovered_stratum().is_none()
    }

    /// All exponent vectors of weighted degree d, in descending lexicographic
    /// order. The all-ones vector always appears since d is the weight sum.
    pub fn monomial_basis(&self) -> Vec<ExponentVector> {
        let mut out = Vec::new();
        let mut cur = [0u32; NVARS];
        self.walk_basis(0, self.d, &mut cur, &mut out);
        out
    }

    fn walk_basis(
        &self,
        slot: usize,
        remaining: u64,
        cur: &mut [u32; NVARS],
        out: &mut Vec<ExponentVector>,
    ) {
        let wi = u64::from(self.w[slot]);
        if slot == NVARS - 1 {
            if remaining % wi == 0 {
                cur[slot] = u32::try_from(remaining / wi).expect("exponent fits in u32");
                out.push(ExponentVector(*cur));
                cur[slot] = 0;
            }
            return;
        }
        let max = remaining / wi;
        for a in (0..=max).rev() {
            cur[slot] = u32::try_from(a).expect("exponent fits in u32");
            self.walk_basis(slot + 1, remaining - a * wi, cur, out);
        }
        cur[slot] = 0;
    }
}

impl fmt::Display for WeightSystem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "({},{},{},{},{})",
            self.w[0], self.w[1], self.w[2], self.w[3], self.w[4]
        )
    }
}

/// Build the member with the given coefficients against the full basis, in
/// basis order. Every coefficient must be nonzero so the support is exactly
/// the basis.
pub fn build_polynomial<F: CoefficientField>(
    ws: &WeightSystem,
    field: F,
    order: MonomialOrder,
    coefficients: &[i64],
) -> Result<Polynomial<F>, LinksError> {
    let basis = ws.monomial_basis();
    build_on_basis(&basis, field, order, coefficients)
}

fn build_on_basis<F: CoefficientField>(
    basis: &[ExponentVector],
    field: F,
    order: MonomialOrder,
    coefficients: &[i64],
) -> Result<Polynomial<F>, LinksError> {
    if coefficients.len() != basis.len() {
        return Err(LinksError::CoefficientCount {
            expected: basis.len(),
            got: coefficients.len(),
        });
    }
    if let Some(index) = coefficients.iter().position(|&c| c == 0) {
        return Err(LinksError::ZeroCoefficient { index });
    }
    let terms = coefficients
        .iter()
        .zip(basis)
        .map(|(&c, m)| (field.from_i64(c), *m))
        .collect();
    Ok(Polynomial::from_terms(field, order, terms))
}

/// Build a member supported on a subset of the basis, keyed by exponent
/// vector. Keys must have weighted degree d and values must be nonzero.
pub fn build_sparse_polynomial<F: CoefficientField>(
    ws: &WeightSystem,
    field: F,
    order: MonomialOrder,
    coefficients: &BTreeMap<ExponentVector, i64>,
) -> Result<Polynomial<F>, LinksError> {
    if coefficients.is_empty() {
        return Err(LinksError::EmptySelection);
    }
    let mut terms = Vec::with_capacity(coefficients.len());
    for (m, &c) in coefficients {
        let got = m.weighted_degree(&ws.weights());
        if got != ws.degree() {
            return Err(LinksError::MonomialDegree {
                mono: *m,
                got,
                expected: ws.degree(),
            });
        }
        if c == 0 {
            return Err(LinksError::ZeroCoefficient { index: 0 });
        }
        terms.push((field.from_i64(c), *m));
    }
    Ok(Polynomial::from_terms(field, order, terms))
}

/// Krull dimension of the quotient by the member together with all five
/// partials, over GF(p). Zero means the only singular point of the affine
/// cone is the origin. Partials that vanish identically over the rationals
/// are skipped; a generator that is nonzero over the rationals but vanishes
/// mod p makes the reduction unusable at this prime.
pub fn singular_locus_dimension(
    f: &Polynomial<Rationals>,
    ws: &WeightSystem,
    p: u64,
) -> Result<u32, LinksError> {
    singular_locus_dimension_with_budget(f, ws, p, &Budget::default())
}

pub fn singular_locus_dimension_with_budget(
    f: &Polynomial<Rationals>,
    ws: &WeightSystem,
    p: u64,
    budget: &Budget,
) -> Result<u32, LinksError> {
    if f.homogeneous_weighted_degree(&ws.weights()) != Some(ws.degree()) {
        return Err(LinksError::Algebra(AlgebraError::NotHomogeneous));
    }
    let field = PrimeField::new(p)?;
    let order = ws.order();
    let f = f.reordered(order);
    let mut generators = Vec::with_capacity(NVARS + 1);
    let f_p = reduce_mod_p(&f, field)?;
    if f_p.is_zero() {
        return Err(LinksError::DegenerateReduction { prime: p });
    }
    generators.push(f_p);
    for i in 0..NVARS {
        let df = f.partial_derivative(i);
        if df.is_zero() {
            continue;
        }
        let df_p = reduce_mod_p(&df, field)?;
        if df_p.is_zero() {
            return Err(LinksError::DegenerateReduction { prime: p });
        }
        generators.push(df_p);
    }
    let ideal = crate::groebner::Ideal::new(generators, order)?;
    let gb = buchberger(&ideal, budget)?;
    Ok(krull_dimension(&gb))
}

/// How a member candidate was screened and accepted.
#[derive(Clone, PartialEq, Eq, Serialize, Deserialize, Debug)]
pub struct ScreeningRecord {
    /// The prime at which the singular locus came out zero-dimensional.
    pub prime: u64,
    pub singular_dimension: u32,
    /// Primes tried on the accepted candidate before the accepting one.
    pub fallback_primes: Vec<u64>,
    /// Candidates discarded before this one.
    pub resamples: u32,
}

/// An accepted member: integer coefficients aligned with the monomial basis,
/// plus the record of the screen that accepted it.
#[derive(Clone, PartialEq, Eq, Serialize, Deserialize, Debug)]
pub struct CandidateHypersurface {
    pub ws: WeightSystem,
    pub basis: Vec<ExponentVector>,
    pub coefficients: Vec<i64>,
    pub screening: ScreeningRecord,
}

impl CandidateHypersurface {
    /// The member polynomial over any coefficient field.
    pub fn polynomial<F: CoefficientField>(&self, field: F, order: MonomialOrder) -> Polynomial<F> {
        let terms = self
            .coefficients
            .iter()
            .zip(&self.basis)
            .map(|(&c, m)| (field.from_i64(c), *m))
            .collect();
        Polynomial::from_terms(field, order, terms)
    }
}

/// Knobs for the screening protocol.
#[derive(Clone, Debug)]
pub struct SampleProtocol {
    /// Coefficients are drawn uniformly from this range on each resample.
    pub pool: std::ops::RangeInclusive<i64>,
    /// Candidates tried are at most `retry_cap + 1`.
    pub retry_cap: u32,
    /// Try the all-ones coefficient vector before drawing random ones.
    pub all_ones_first: bool,
    pub budget: Budget,
}

impl Default for SampleProtocol {
    fn default() -> Self {
        SampleProtocol {
            pool: 1..=5,
            retry_cap: DEFAULT_RETRY_CAP,
            all_ones_first: true,
            budget: Budget::default(),
        }
    }
}

/// Screen candidates until one has a zero-dimensional singular locus: the
/// all-ones member first, then uniform redraws from the pool, each candidate
/// walked through the full prime ladder. Identical seeds give identical
/// results.
pub fn sample_smooth_polynomial(
    ws: &WeightSystem,
    seed: u64,
) -> Result<CandidateHypersurface, LinksError> {
    sample_smooth_with_protocol(ws, seed, &SampleProtocol::default())
}

pub fn sample_smooth_with_protocol(
    ws: &WeightSystem,
    seed: u64,
    protocol: &SampleProtocol,
) -> Result<CandidateHypersurface, LinksError> {
    if let Some(vars) = ws.first_uncovered_stratum() {
        return Err(LinksError::SingularStratum { vars });
    }
    let basis = ws.monomial_basis();
    let order = ws.order();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut attempts = 0u32;
    for attempt in 0..=protocol.retry_cap {
        let coefficients: Vec<i64> = if attempt == 0 && protocol.all_ones_first {
            vec![1; basis.len()]
        } else {
            (0..basis.len())
                .map(|_| rng.gen_range(protocol.pool.clone()))
                .collect()
        };
        attempts += 1;
        let f = build_on_basis(&basis, Rationals, order, &coefficients)?;
        let mut fallback_primes = Vec::new();
        for &p in &SCREENING_PRIMES {
            match singular_locus_dimension_with_budget(&f, ws, p, &protocol.budget) {
                Ok(0) => {
                    return Ok(CandidateHypersurface {
                        ws: *ws,
                        basis,
                        coefficients,
                        screening: ScreeningRecord {
                            prime: p,
                            singular_dimension: 0,
                            fallback_primes,
                            resamples: attempt,
                        },
                    });
                }
                Ok(_) | Err(LinksError::DegenerateReduction { .. }) => {
                    fallback_primes.push(p);
                }
                Err(other) => return Err(other),
            }
        }
    }
    Err(LinksError::NoSmoothMember { attempts })
}
