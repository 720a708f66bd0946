//! Dimension data of the quotient ring behind a Groebner basis.
//!
//! Everything here is combinatorics on the leading term ideal: standard
//! monomials (those outside it) form a vector space basis of the quotient,
//! and the variety's dimension is read off from which variable subsets the
//! leading terms avoid.

use std::collections::BTreeMap;

use super::{GroebnerBasis, GroebnerError};
use crate::algebra::{CoefficientField, ExponentVector, NVARS};

/// The monomials outside the leading term ideal, with their weighted-degree
/// census. For a zero-dimensional ideal this is a finite basis of the
/// quotient ring.
#[derive(Clone, Debug)]
pub struct StandardMonomialSet {
    monomials: Vec<ExponentVector>,
    graded_counts: BTreeMap<u64, u64>,
    weights: [u32; NVARS],
}

impl StandardMonomialSet {
    pub fn monomials(&self) -> &[ExponentVector] {
        &self.monomials
    }

    /// Count per weighted degree, ascending.
    pub fn graded_counts(&self) -> &BTreeMap<u64, u64> {
        &self.graded_counts
    }

    pub fn total_count(&self) -> u64 {
        self.monomials.len() as u64
    }

    pub fn weights(&self) -> [u32; NVARS] {
        self.weights
    }

    pub fn graded_dimension(&self, ell: i64) -> u64 {
        if ell < 0 {
            return 0;
        }
        *self.graded_counts.get(&(ell as u64)).unwrap_or(&0)
    }
}

/// True when the quotient is finite dimensional: every variable must show up
/// as a pure power among the leading terms (a constant leading term means
/// the whole ring, which counts too).
pub fn is_zero_dimensional<F: CoefficientField>(gb: &GroebnerBasis<F>) -> bool {
    let lts = gb.leading_terms();
    if lts.iter().any(|m| m.is_constant()) {
        return true;
    }
    (0..NVARS).all(|i| {
        lts.iter()
            .any(|m| m.0[i] > 0 && m.support_mask() == 1 << i)
    })
}

/// Dimension of the variety cut out by the basis: the size of the largest
/// variable subset that no leading term is supported inside. A basis
/// containing a unit (empty variety) reports 0.
pub fn krull_dimension<F: CoefficientField>(gb: &GroebnerBasis<F>) -> u32 {
    let masks: Vec<u8> = gb.leading_terms().iter().map(|m| m.support_mask()).collect();
    let mut best = 0u32;
    for subset in 0u8..(1 << NVARS) {
        if masks.iter().any(|m| m & !subset == 0) {
            continue;
        }
        best = best.max(subset.count_ones());
    }
    best
}

/// Enumerates the standard monomials of a zero-dimensional leading term
/// ideal, recording counts by weighted degree under `weights`.
///
/// The walk assigns exponents variable by variable in ascending
/// lexicographic order. Raising an exponent never removes divisibility, so
/// each variable's loop stops at the first hit against the leading terms
/// supported in the prefix; the pure-power bounds make every loop finite.
pub fn standard_monomials<F: CoefficientField>(
    gb: &GroebnerBasis<F>,
    weights: [u32; NVARS],
) -> Result<StandardMonomialSet, GroebnerError> {
    if !is_zero_dimensional(gb) {
        return Err(GroebnerError::NotZeroDimensional);
    }

    let lts = gb.leading_terms();
    if lts.iter().any(|m| m.is_constant()) {
        // Unit ideal: the quotient is the zero ring.
        return Ok(StandardMonomialSet {
            monomials: Vec::new(),
            graded_counts: BTreeMap::new(),
            weights,
        });
    }

    let mut bound = [0u32; NVARS];
    for i in 0..NVARS {
        bound[i] = lts
            .iter()
            .filter(|m| m.support_mask() == 1 << i)
            .map(|m| m.0[i])
            .min()
            .expect("pure power exists in zero-dimensional ideal");
    }

    // Leading terms grouped by the last variable in their support; a term
    // first becomes relevant at the depth where its support is complete.
    let mut by_last_var: [Vec<ExponentVector>; NVARS] = Default::default();
    for m in lts {
        let last = (0..NVARS).rfind(|&i| m.0[i] > 0).unwrap();
        by_last_var[last].push(*m);
    }

    let mut monomials = Vec::new();
    let mut graded_counts: BTreeMap<u64, u64> = BTreeMap::new();
    let mut current = [0u32; NVARS];

    fn walk(
        depth: usize,
        current: &mut [u32; NVARS],
        bound: &[u32; NVARS],
        by_last_var: &[Vec<ExponentVector>; NVARS],
        weights: &[u32; NVARS],
        monomials: &mut Vec<ExponentVector>,
        graded_counts: &mut BTreeMap<u64, u64>,
    ) {
        if depth == NVARS {
            let m = ExponentVector(*current);
            *graded_counts.entry(m.weighted_degree(weights)).or_insert(0) += 1;
            monomials.push(m);
            return;
        }
        for e in 0..bound[depth] {
            current[depth] = e;
            let blocked = by_last_var[depth]
                .iter()
                .any(|m| (0..=depth).all(|i| m.0[i] <= current[i]));
            if blocked {
                break;
            }
            walk(
                depth + 1,
                current,
                bound,
                by_last_var,
                weights,
                monomials,
                graded_counts,
            );
        }
        current[depth] = 0;
    }

    walk(
        0,
        &mut current,
        &bound,
        &by_last_var,
        &weights,
        &mut monomials,
        &mut graded_counts,
    );

    Ok(StandardMonomialSet {
        monomials,
        graded_counts,
        weights,
    })
}

/// Dimension of the quotient's weighted-degree-`ell` slice. Negative `ell`
/// gives zero. Enumerates the full standard monomial set; callers needing
/// several degrees should compute [`standard_monomials`] once instead.
pub fn graded_dimension<F: CoefficientField>(
    gb: &GroebnerBasis<F>,
    weights: [u32; NVARS],
    ell: i64,
) -> Result<u64, GroebnerError> {
    Ok(standard_monomials(gb, weights)?.graded_dimension(ell))
}
