//! Topological invariants of a link: Milnor number, graded Milnor-algebra
//! dimensions, signature counts, and the mod-48 invariant, plus the sampling
//! campaign that checks their independence from coefficient choices.
//!
//! Everything here reads off one object: the quotient of the polynomial ring
//! by the Jacobian ideal of a member, graded by weighted degree. Its total
//! dimension is the Milnor number, two particular graded pieces are the Hodge
//! numbers, and classifying every graded piece by the fractional part of a
//! normalized degree yields the signature counts feeding the mod-48
//! invariant.
//!
//! The quotient is computed over a medium prime field first, which is much
//! faster than rational arithmetic. The result is certified by mass
//! conservation: graded dimensions over a prime field can only exceed the
//! rational ones, so matching the known total dimension pins them all. On a
//! mismatch the computation falls back to rational coefficients.

use num_bigint::BigInt;
use num_rational::{BigRational, Ratio};
use num_traits::{One, Signed, ToPrimitive};
use rand::seq::SliceRandom;
use rand::RngCore;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::time::Instant;
use thiserror::Error;

use crate::algebra::{
    AlgebraError, CoefficientField, FieldDescriptor, Polynomial, PrimeField, Rationals, NVARS,
};
use crate::groebner::{
    buchberger, standard_monomials, Budget, GroebnerBasis, GroebnerError, Ideal,
    StandardMonomialSet,
};
use crate::links::{
    sample_smooth_with_protocol, CandidateHypersurface, LinksError, SampleProtocol, WeightSystem,
};

/// Characteristic used for the fast path of invariant computation. Large
/// enough that it never divides a member degree, small enough for cheap
/// arithmetic.
pub const WORKING_PRIME: u64 = 32003;

#[derive(Debug, Error)]
pub enum InvariantsError {
    #[error("Milnor number of {ws} is not an integer; the system admits no isolated singularity")]
    NonIntegralMilnor { ws: WeightSystem },
    #[error("the singular point is not isolated")]
    NotIsolated,
    #[error("graded dimensions total {got}, expected the Milnor number {expected}")]
    MassMismatch { got: u64, expected: u64 },
    #[error("{requested} distinct permutations requested, only 120 exist")]
    TooManyPermutations { requested: usize },
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
    #[error(transparent)]
    Groebner(#[from] GroebnerError),
    #[error(transparent)]
    Links(#[from] LinksError),
}

/// The two Hodge numbers the quotient determines, with the third Betti
/// number they imply.
#[derive(Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Debug)]
pub struct HodgePair {
    pub h30: u64,
    pub h21: u64,
    pub b3: u64,
}

impl HodgePair {
    pub fn new(h30: u64, h21: u64) -> Self {
        HodgePair {
            h30,
            h21,
            b3: 2 * (h30 + h21),
        }
    }

    /// Every link computed so far has h30 = 1; a different value is worth
    /// flagging but is not an error.
    pub fn h30_anomalous(&self) -> bool {
        self.h30 != 1
    }
}

/// Counts of standard monomials by the residue class of their normalized
/// degree: integral values, and fractional values with even or odd floor.
#[derive(Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Debug)]
pub struct SignatureTriple {
    pub mu_plus: u64,
    pub mu_zero: u64,
    pub mu_minus: u64,
    pub mu: u64,
}

impl SignatureTriple {
    /// Classify graded dimension counts. A monomial of weighted degree ell
    /// has normalized degree 1 + ell/d: integral exactly when d divides ell,
    /// otherwise its floor decides the sign.
    pub fn from_graded_counts(sm: &StandardMonomialSet, d: u64) -> Self {
        let (mut mu_plus, mut mu_zero, mut mu_minus) = (0, 0, 0);
        for (&ell, &count) in sm.graded_counts() {
            if ell % d == 0 {
                mu_zero += count;
            } else if (1 + ell / d) % 2 == 0 {
                mu_plus += count;
            } else {
                mu_minus += count;
            }
        }
        SignatureTriple {
            mu_plus,
            mu_zero,
            mu_minus,
            mu: mu_plus + mu_zero + mu_minus,
        }
    }
}

/// The mod-48 invariant, with the integer it reduces kept for audit.
#[derive(Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Debug)]
pub struct CNInvariant {
    pub nu: u8,
    pub raw: i64,
}

impl CNInvariant {
    pub fn from_signature(sig: &SignatureTriple) -> Self {
        let raw = sig.mu as i64 - 3 * (sig.mu_plus as i64 - sig.mu_minus as i64) + 1;
        CNInvariant {
            nu: raw.rem_euclid(48) as u8,
            raw,
        }
    }
}

/// Wall time spent in the basis computation and in the enumeration that
/// followed it.
#[derive(Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Debug, Default)]
pub struct StageTimings {
    pub gb_ms: u64,
    pub invariant_ms: u64,
}

/// Everything computed for one accepted member.
#[derive(Clone, Serialize, Deserialize, Debug)]
pub struct LinkInvariants {
    pub ws: WeightSystem,
    pub hodge: HodgePair,
    pub signature: SignatureTriple,
    pub cn: CNInvariant,
    pub gb_length: usize,
    pub field: FieldDescriptor,
    pub elapsed: StageTimings,
}

/// The total quotient dimension, as the exact product of (d/w - 1) over the
/// weights. Integral for every system admitting an isolated singularity.
pub fn milnor_number(ws: &WeightSystem) -> Result<u64, InvariantsError> {
    let d = BigInt::from(ws.degree());
    let mut product = BigRational::one();
    for &w in &ws.weights() {
        let factor = BigRational::new(d.clone() - BigInt::from(w), BigInt::from(w));
        product *= factor;
    }
    if !product.denom().is_one() || product.is_negative() {
        return Err(InvariantsError::NonIntegralMilnor { ws: *ws });
    }
    Ok(product
        .to_integer()
        .to_u64()
        .expect("Milnor number fits in u64"))
}

/// Normalized degree of an exponent vector: the weighted degree of the
/// monomial times each variable once, divided by the member degree.
pub fn l_value(alpha: &crate::algebra::ExponentVector, ws: &WeightSystem) -> Ratio<u64> {
    let shifted: u64 = alpha
        .0
        .iter()
        .zip(&ws.weights())
        .map(|(&a, &w)| u64::from(a + 1) * u64::from(w))
        .sum();
    Ratio::new(shifted, ws.degree())
}

fn milnor_quotient<F: CoefficientField>(
    f: &Polynomial<F>,
    ws: &WeightSystem,
    budget: &Budget,
) -> Result<(GroebnerBasis<F>, StandardMonomialSet), InvariantsError> {
    if f.homogeneous_weighted_degree(&ws.weights()) != Some(ws.degree()) {
        return Err(InvariantsError::Algebra(AlgebraError::NotHomogeneous));
    }
    let mut generators = Vec::with_capacity(NVARS);
    for i in 0..NVARS {
        let df = f.partial_derivative(i);
        if !df.is_zero() {
            generators.push(df);
        }
    }
    let ideal = Ideal::new(generators, f.order())?;
    let gb = buchberger(&ideal, budget)?;
    match standard_monomials(&gb, ws.weights()) {
        Ok(sm) => Ok((gb, sm)),
        Err(GroebnerError::NotZeroDimensional) => Err(InvariantsError::NotIsolated),
        Err(e) => Err(InvariantsError::Groebner(e)),
    }
}

fn hodge_from_set(sm: &StandardMonomialSet, ws: &WeightSystem) -> HodgePair {
    let d = ws.degree();
    let sum_w: u64 = ws.weights().iter().map(|&w| u64::from(w)).sum();
    assert_eq!(4 * d - sum_w, 3 * d);
    assert_eq!(3 * d - sum_w, 2 * d);
    HodgePair::new(
        sm.graded_dimension((3 * d) as i64),
        sm.graded_dimension((2 * d) as i64),
    )
}

fn checked_quotient<F: CoefficientField>(
    f: &Polynomial<F>,
    ws: &WeightSystem,
    budget: &Budget,
) -> Result<(GroebnerBasis<F>, StandardMonomialSet), InvariantsError> {
    let mu = milnor_number(ws)?;
    let (gb, sm) = milnor_quotient(f, ws, budget)?;
    if sm.total_count() != mu {
        return Err(InvariantsError::MassMismatch {
            got: sm.total_count(),
            expected: mu,
        });
    }
    Ok((gb, sm))
}

/// Graded dimensions at three and two times the member degree. Runs its own
/// basis computation; use [`compute_link_invariants`] to share one run across
/// all invariants.
pub fn sasakian_hodge<F: CoefficientField>(
    f: &Polynomial<F>,
    ws: &WeightSystem,
) -> Result<HodgePair, InvariantsError> {
    let (_, sm) = checked_quotient(f, ws, &Budget::default())?;
    Ok(hodge_from_set(&sm, ws))
}

/// Signature counts of the quotient, classifying every standard monomial by
/// its normalized degree.
pub fn steenbrink_signature<F: CoefficientField>(
    f: &Polynomial<F>,
    ws: &WeightSystem,
) -> Result<SignatureTriple, InvariantsError> {
    let (_, sm) = checked_quotient(f, ws, &Budget::default())?;
    Ok(SignatureTriple::from_graded_counts(&sm, ws.degree()))
}

/// The mod-48 invariant of the member.
pub fn cn_invariant<F: CoefficientField>(
    f: &Polynomial<F>,
    ws: &WeightSystem,
) -> Result<CNInvariant, InvariantsError> {
    let sig = steenbrink_signature(f, ws)?;
    Ok(CNInvariant::from_signature(&sig))
}

/// Compute every invariant of an accepted member from a single basis run.
///
/// Tries the working prime field first and certifies the result by mass
/// conservation against the Milnor number; if the quotient fails to be
/// zero-dimensional or the totals disagree, the reduction was bad and the
/// computation is redone over the rationals. Budget exhaustion is never
/// retried: the rational path would only be slower.
pub fn compute_link_invariants(
    cand: &CandidateHypersurface,
    budget: &Budget,
) -> Result<LinkInvariants, InvariantsError> {
    let ws = cand.ws;
    let mu = milnor_number(&ws)?;
    let order = ws.order();
    let started = Instant::now();
    let fp = PrimeField::new(WORKING_PRIME).expect("working prime is valid");
    let fast = match milnor_quotient(&cand.polynomial(fp, order), &ws, budget) {
        Ok((gb, sm)) if sm.total_count() == mu => Some((gb.len(), sm, fp.descriptor())),
        Ok(_) | Err(InvariantsError::NotIsolated) => None,
        Err(e) => return Err(e),
    };
    let (gb_length, sm, field) = match fast {
        Some(hit) => hit,
        None => {
            let f = cand.polynomial(Rationals, order);
            let (gb, sm) = milnor_quotient(&f, &ws, budget)?;
            if sm.total_count() != mu {
                return Err(InvariantsError::MassMismatch {
                    got: sm.total_count(),
                    expected: mu,
                });
            }
            (gb.len(), sm, FieldDescriptor::Rationals)
        }
    };
    let gb_ms = started.elapsed().as_millis() as u64;
    let classify_start = Instant::now();
    let signature = SignatureTriple::from_graded_counts(&sm, ws.degree());
    let hodge = hodge_from_set(&sm, &ws);
    let cn = CNInvariant::from_signature(&signature);
    let invariant_ms = classify_start.elapsed().as_millis() as u64;
    Ok(LinkInvariants {
        ws,
        hodge,
        signature,
        cn,
        gb_length,
        field,
        elapsed: StageTimings { gb_ms, invariant_ms },
    })
}

/// One sampled member in the equivalence campaign.
#[derive(Clone, Serialize, Deserialize, Debug)]
pub struct CampaignCell {
    pub perm_index: usize,
    pub poly_index: usize,
    pub weights: [u32; NVARS],
    pub invariants: Option<CellInvariants>,
    pub resamples: u32,
    pub error: Option<String>,
}

#[derive(Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Debug)]
pub struct CellInvariants {
    pub h30: u64,
    pub h21: u64,
    pub nu: u8,
    pub gb_length: usize,
}

/// Aggregated outcome of the coefficient-independence campaign.
#[derive(Clone, Serialize, Deserialize, Debug)]
pub struct EquivalenceReport {
    pub ws: WeightSystem,
    pub permutations: Vec<[usize; NVARS]>,
    pub cells: Vec<CampaignCell>,
    /// All successfully computed members share one (h30, h21, nu) triple.
    pub invariants_agree: bool,
    pub distinct_triples: Vec<(u64, u64, u8)>,
    /// Basis length never changes between members of the same permutation.
    pub gb_constant_within_permutation: bool,
    /// Basis length took more than one value across permutations.
    pub gb_varies_across_permutations: bool,
    pub failures: usize,
}

/// Sample members across coordinate relabellings of one weight system and
/// check that the invariant triple never moves. The identity permutation is
/// always included; the rest are drawn without repetition from the seed.
/// Cells run in parallel and each failure is reported in place rather than
/// aborting the campaign.
pub fn weak_r_equivalence_campaign(
    ws: &WeightSystem,
    n_permutations: usize,
    n_polys_per_perm: usize,
    coeff_range: std::ops::RangeInclusive<i64>,
    rng_seed: u64,
    budget: &Budget,
) -> Result<EquivalenceReport, InvariantsError> {
    if n_permutations > 120 {
        return Err(InvariantsError::TooManyPermutations {
            requested: n_permutations,
        });
    }
    let mut permutations: Vec<[usize; NVARS]> = vec![[0, 1, 2, 3, 4]];
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    while permutations.len() < n_permutations {
        let mut perm = [0, 1, 2, 3, 4];
        perm.shuffle(&mut rng);
        if !permutations.contains(&perm) {
            permutations.push(perm);
        }
    }

    let jobs: Vec<(usize, usize)> = (0..permutations.len())
        .flat_map(|p| (0..n_polys_per_perm).map(move |k| (p, k)))
        .collect();
    let cells: Vec<CampaignCell> = jobs
        .into_par_iter()
        .map(|(perm_index, poly_index)| {
            let perm = permutations[perm_index];
            let pws = ws.permuted(&perm);
            let mut stream = ChaCha8Rng::seed_from_u64(rng_seed);
            stream.set_stream(1 + (perm_index * n_polys_per_perm + poly_index) as u64);
            let cell_seed = stream.next_u64();
            let protocol = SampleProtocol {
                pool: coeff_range.clone(),
                all_ones_first: false,
                budget: *budget,
                ..SampleProtocol::default()
            };
            let mut cell = CampaignCell {
                perm_index,
                poly_index,
                weights: pws.weights(),
                invariants: None,
                resamples: 0,
                error: None,
            };
            match sample_smooth_with_protocol(&pws, cell_seed, &protocol) {
                Ok(cand) => {
                    cell.resamples = cand.screening.resamples;
                    match compute_link_invariants(&cand, budget) {
                        Ok(inv) => {
                            cell.invariants = Some(CellInvariants {
                                h30: inv.hodge.h30,
                                h21: inv.hodge.h21,
                                nu: inv.cn.nu,
                                gb_length: inv.gb_length,
                            });
                        }
                        Err(e) => cell.error = Some(e.to_string()),
                    }
                }
                Err(e) => cell.error = Some(e.to_string()),
            }
            cell
        })
        .collect();

    let mut distinct_triples: Vec<(u64, u64, u8)> = Vec::new();
    for cell in cells.iter().filter_map(|c| c.invariants.as_ref()) {
        let triple = (cell.h30, cell.h21, cell.nu);
        if !distinct_triples.contains(&triple) {
            distinct_triples.push(triple);
        }
    }
    let mut gb_constant_within_permutation = true;
    let mut perm_lengths: Vec<Option<usize>> = vec![None; permutations.len()];
    for cell in &cells {
        if let Some(inv) = &cell.invariants {
            match perm_lengths[cell.perm_index] {
                None => perm_lengths[cell.perm_index] = Some(inv.gb_length),
                Some(l) if l != inv.gb_length => gb_constant_within_permutation = false,
                Some(_) => {}
            }
        }
    }
    let observed: Vec<usize> = perm_lengths.iter().flatten().copied().collect();
    let gb_varies_across_permutations = observed.windows(2).any(|w| w[0] != w[1]);
    let failures = cells.iter().filter(|c| c.error.is_some()).count();
    Ok(EquivalenceReport {
        ws: *ws,
        permutations,
        cells,
        invariants_agree: distinct_triples.len() <= 1,
        distinct_triples,
        gb_constant_within_permutation,
        gb_varies_across_permutations,
        failures,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::ExponentVector;
    use crate::links::{build_sparse_polynomial, sample_smooth_polynomial};
    use std::collections::BTreeMap;

    fn ws(w: [u32; NVARS]) -> WeightSystem {
        WeightSystem::new(w).unwrap()
    }

    /// Graded quotient dimensions predicted by the generating function
    /// prod (1 - t^(d - w)) / (1 - t^w): an oracle independent of any basis
    /// computation, valid for every accepted member.
    fn series_counts(sys: &WeightSystem) -> BTreeMap<u64, u64> {
        let d = sys.degree() as usize;
        let top = 4 * d;
        let mut coeffs = vec![0i64; top + 1];
        coeffs[0] = 1;
        for &w in &sys.weights() {
            let k = d - w as usize;
            for j in (0..=top).rev() {
                if j >= k {
                    coeffs[j] -= coeffs[j - k];
                }
            }
        }
        for &w in &sys.weights() {
            let w = w as usize;
            for j in w..=top {
                coeffs[j] += coeffs[j - w];
            }
        }
        let mut out = BTreeMap::new();
        for (ell, &c) in coeffs.iter().enumerate() {
            assert!(c >= 0, "series coefficient at {ell} is {c}");
            if c > 0 {
                assert!(ell <= 3 * d, "series extends past the socle degree");
                out.insert(ell as u64, c as u64);
            }
        }
        out
    }

    fn fermat_quintic() -> (WeightSystem, Polynomial<Rationals>) {
        let sys = ws([1, 1, 1, 1, 1]);
        let mut coeffs = BTreeMap::new();
        for i in 0..NVARS {
            let mut e = [0u32; NVARS];
            e[i] = 5;
            coeffs.insert(ExponentVector(e), 1);
        }
        let f = build_sparse_polynomial(&sys, Rationals, sys.order(), &coeffs).unwrap();
        (sys, f)
    }

    #[test]
    fn milnor_number_examples() {
        assert_eq!(milnor_number(&ws([1, 1, 1, 1, 1])).unwrap(), 1024);
        assert_eq!(milnor_number(&ws([22, 29, 49, 50, 75])).unwrap(), 1568);
        assert_eq!(milnor_number(&ws([1, 1, 12, 28, 42])).unwrap(), 82_668);
        assert!(matches!(
            milnor_number(&ws([1, 1, 1, 4, 4])),
            Err(InvariantsError::NonIntegralMilnor { .. })
        ));
    }

    #[test]
    fn normalized_degree_examples() {
        let quintic = ws([1, 1, 1, 1, 1]);
        assert_eq!(
            l_value(&ExponentVector([0; 5]), &quintic),
            Ratio::new(1, 1)
        );
        assert_eq!(
            l_value(&ExponentVector([3; 5]), &quintic),
            Ratio::new(4, 1)
        );
        let mixed = ws([22, 29, 49, 50, 75]);
        assert_eq!(
            l_value(&ExponentVector([1, 2, 0, 0, 1]), &mixed),
            Ratio::new(76, 45)
        );
    }

    #[test]
    fn constant_only_quotient_is_all_mu_zero() {
        let order = crate::algebra::MonomialOrder::degrevlex();
        let field = PrimeField::new(101).unwrap();
        let gens = (0..NVARS)
            .map(|i| Polynomial::variable(field, order, i))
            .collect();
        let gb = buchberger(&Ideal::new(gens, order).unwrap(), &Budget::default()).unwrap();
        let sm = standard_monomials(&gb, [1; 5]).unwrap();
        assert_eq!(sm.total_count(), 1);
        let sig = SignatureTriple::from_graded_counts(&sm, 5);
        assert_eq!((sig.mu_plus, sig.mu_zero, sig.mu_minus), (0, 1, 0));
    }

    #[test]
    fn fermat_quintic_full_invariant_set() {
        let (sys, f) = fermat_quintic();
        let hodge = sasakian_hodge(&f, &sys).unwrap();
        assert_eq!((hodge.h30, hodge.h21, hodge.b3), (1, 101, 204));
        let sig = steenbrink_signature(&f, &sys).unwrap();
        assert_eq!(
            (sig.mu_plus, sig.mu_zero, sig.mu_minus, sig.mu),
            (580, 204, 240, 1024)
        );
        let cn = cn_invariant(&f, &sys).unwrap();
        assert_eq!(cn.nu, 5);
        assert_eq!(cn.raw, 1024 - 3 * (580 - 240) + 1);
    }

    #[test]
    fn mixed_system_invariants_from_one_run() {
        let sys = ws([22, 29, 49, 50, 75]);
        let cand = sample_smooth_polynomial(&sys, 1).unwrap();
        let inv = compute_link_invariants(&cand, &Budget::default()).unwrap();
        assert_eq!((inv.hodge.h30, inv.hodge.h21), (1, 2));
        assert_eq!(inv.hodge.b3, 6);
        assert_eq!(inv.cn.nu, 27);
        assert_eq!(inv.signature.mu, 1568);
        assert_eq!((inv.signature.mu_plus as i64 - inv.signature.mu_minus as i64).rem_euclid(16), 2);
        assert!(!inv.hodge.h30_anomalous());
        assert!(inv.gb_length > 0);

        let expected = series_counts(&sys);
        let mut sig_oracle = SignatureTriple {
            mu_plus: 0,
            mu_zero: 0,
            mu_minus: 0,
            mu: 0,
        };
        for (&ell, &count) in &expected {
            if ell % 225 == 0 {
                sig_oracle.mu_zero += count;
            } else if (1 + ell / 225) % 2 == 0 {
                sig_oracle.mu_plus += count;
            } else {
                sig_oracle.mu_minus += count;
            }
        }
        sig_oracle.mu = sig_oracle.mu_plus + sig_oracle.mu_zero + sig_oracle.mu_minus;
        assert_eq!(inv.signature, sig_oracle);
        assert_eq!(expected.get(&675), Some(&1));
        assert_eq!(expected.get(&450), Some(&2));
    }

    #[test]
    fn nine_term_member_has_cn_thirty_five() {
        let sys = ws([31, 35, 36, 42, 108]);
        let mut coeffs = BTreeMap::new();
        for e in [
            [7, 1, 0, 0, 0],
            [2, 2, 1, 2, 0],
            [1, 1, 4, 1, 0],
            [1, 1, 1, 1, 1],
            [0, 6, 0, 1, 0],
            [0, 0, 7, 0, 0],
            [0, 0, 4, 0, 1],
            [0, 0, 1, 0, 2],
            [0, 0, 0, 6, 0],
        ] {
            coeffs.insert(ExponentVector(e), 1);
        }
        let field = PrimeField::new(WORKING_PRIME).unwrap();
        let f = build_sparse_polynomial(&sys, field, sys.order(), &coeffs).unwrap();
        let sig = steenbrink_signature(&f, &sys).unwrap();
        assert_eq!(sig.mu, 1768);
        let cn = CNInvariant::from_signature(&sig);
        assert_eq!(cn.nu, 35);
        let hodge = sasakian_hodge(&f, &sys).unwrap();
        assert_eq!(hodge.h30, 1);
    }

    /// Weight systems whose degree is divisible by every weight, so each has
    /// a member built from five pure powers plus the product of all five
    /// variables. Those members keep rational arithmetic cheap while still
    /// forcing nontrivial reductions.
    const CALIBRATION_SYSTEMS: [[u32; NVARS]; 24] = [
        [1, 1, 1, 1, 1],
        [2, 2, 2, 3, 3],
        [1, 1, 1, 1, 2],
        [2, 4, 4, 5, 5],
        [1, 1, 2, 2, 2],
        [3, 5, 6, 6, 10],
        [3, 3, 4, 6, 8],
        [1, 2, 3, 3, 3],
        [1, 2, 2, 3, 4],
        [1, 3, 3, 3, 5],
        [1, 1, 1, 3, 3],
        [1, 4, 5, 5, 5],
        [2, 3, 3, 8, 8],
        [1, 1, 3, 3, 4],
        [4, 6, 15, 15, 20],
        [3, 10, 12, 15, 20],
        [1, 1, 1, 1, 4],
        [1, 1, 2, 4, 4],
        [2, 4, 9, 9, 12],
        [2, 3, 5, 10, 10],
        [2, 2, 2, 3, 9],
        [2, 3, 3, 4, 12],
        [1, 2, 3, 6, 6],
        [1, 2, 2, 2, 7],
    ];

    fn power_sum_member<F: CoefficientField>(sys: &WeightSystem, field: F) -> Polynomial<F> {
        let d = sys.degree();
        let mut coeffs = BTreeMap::new();
        for (i, &wi) in sys.weights().iter().enumerate() {
            let mut e = [0u32; NVARS];
            e[i] = (d / u64::from(wi)) as u32;
            coeffs.insert(ExponentVector(e), 1);
        }
        coeffs.insert(ExponentVector([1; NVARS]), 1);
        build_sparse_polynomial(sys, field, sys.order(), &coeffs).unwrap()
    }

    #[test]
    fn prime_field_and_rational_quotients_agree_on_calibration_set() {
        let fp = PrimeField::new(WORKING_PRIME).unwrap();
        for w in CALIBRATION_SYSTEMS {
            let sys = ws(w);
            let mu = milnor_number(&sys).unwrap();
            let (_, sm_p) =
                milnor_quotient(&power_sum_member(&sys, fp), &sys, &Budget::default()).unwrap();
            let (_, sm_q) =
                milnor_quotient(&power_sum_member(&sys, Rationals), &sys, &Budget::default())
                    .unwrap();
            assert_eq!(sm_p.graded_counts(), sm_q.graded_counts(), "{sys}");
            assert_eq!(sm_p.total_count(), mu, "{sys}");
            assert_eq!(sm_q.graded_counts(), &series_counts(&sys), "{sys}");
        }
    }

    #[test]
    fn invariants_survive_simultaneous_relabelling() {
        let sys = ws([22, 29, 49, 50, 75]);
        let cand = sample_smooth_polynomial(&sys, 3).unwrap();
        let base = compute_link_invariants(&cand, &Budget::default()).unwrap();
        let perm = [4, 0, 2, 1, 3];
        let psys = sys.permuted(&perm);
        let pcand = CandidateHypersurface {
            ws: psys,
            basis: cand.basis.iter().map(|m| m.permuted(&perm)).collect(),
            coefficients: cand.coefficients.clone(),
            screening: cand.screening.clone(),
        };
        let moved = compute_link_invariants(&pcand, &Budget::default()).unwrap();
        assert_eq!(base.hodge, moved.hodge);
        assert_eq!(base.signature, moved.signature);
        assert_eq!(base.cn, moved.cn);
    }

    #[test]
    fn non_isolated_member_is_rejected() {
        let sys = ws([1, 1, 1, 1, 1]);
        let mut coeffs = BTreeMap::new();
        for k in 0..=5u32 {
            let binom = [1, 5, 10, 10, 5, 1][k as usize];
            coeffs.insert(ExponentVector([k, 5 - k, 0, 0, 0]), binom);
        }
        let f = build_sparse_polynomial(&sys, Rationals, sys.order(), &coeffs).unwrap();
        assert!(matches!(
            sasakian_hodge(&f, &sys),
            Err(InvariantsError::NotIsolated)
        ));
    }

    #[test]
    fn small_campaign_is_consistent() {
        let sys = ws([22, 29, 49, 50, 75]);
        let report =
            weak_r_equivalence_campaign(&sys, 3, 2, 1..=99, 7, &Budget::default()).unwrap();
        assert_eq!(report.permutations.len(), 3);
        assert_eq!(report.permutations[0], [0, 1, 2, 3, 4]);
        assert_eq!(report.cells.len(), 6);
        assert_eq!(report.failures, 0);
        assert!(report.invariants_agree);
        assert_eq!(report.distinct_triples, vec![(1, 2, 27)]);
        assert!(report.gb_constant_within_permutation);
    }

    #[test]
    fn campaign_permutation_cap() {
        let sys = ws([1, 1, 1, 1, 1]);
        assert!(matches!(
            weak_r_equivalence_campaign(&sys, 121, 1, 1..=5, 0, &Budget::default()),
            Err(InvariantsError::TooManyPermutations { requested: 121 })
        ));
    }
}
