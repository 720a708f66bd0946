//! Sparse multivariate polynomials over an exact coefficient field.
//!
//! Terms are kept strictly descending in the polynomial's monomial order, so
//! the leading term is `terms[0]` and arithmetic is order-preserving merges.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use std::cmp::Ordering;
use std::collections::HashMap;
use std::fmt;

use super::field::{CoefficientField, FieldDescriptor, PrimeField, Rationals};
use super::monomial::{ExponentVector, MonomialOrder, NVARS};
use super::AlgebraError;

#[derive(Clone, PartialEq, Debug)]
pub struct Term<E> {
    pub coeff: E,
    pub mono: ExponentVector,
}

#[derive(Clone, Debug)]
pub struct Polynomial<F: CoefficientField> {
    field: F,
    order: MonomialOrder,
    terms: Vec<Term<F::Elem>>,
}

impl<F: CoefficientField> Polynomial<F> {
    pub fn zero(field: F, order: MonomialOrder) -> Self {
        Polynomial {
            field,
            order,
            terms: Vec::new(),
        }
    }

    pub fn constant(field: F, order: MonomialOrder, c: F::Elem) -> Self {
        Self::from_terms(field, order, vec![(c, ExponentVector::ONE)])
    }

    pub fn variable(field: F, order: MonomialOrder, i: usize) -> Self {
        assert!(i < NVARS);
        let mut e = [0u32; NVARS];
        e[i] = 1;
        let one = field.one();
        Self::from_terms(field, order, vec![(one, ExponentVector(e))])
    }

    /// Builds a polynomial from arbitrary (coefficient, monomial) pairs:
    /// duplicates are combined, zeros dropped, terms sorted.
    pub fn from_terms(
        field: F,
        order: MonomialOrder,
        pairs: Vec<(F::Elem, ExponentVector)>,
    ) -> Self {
        let mut map: HashMap<ExponentVector, F::Elem> = HashMap::with_capacity(pairs.len());
        for (c, m) in pairs {
            match map.entry(m) {
                std::collections::hash_map::Entry::Occupied(mut e) => {
                    let sum = field.add(e.get(), &c);
                    *e.get_mut() = sum;
                }
                std::collections::hash_map::Entry::Vacant(e) => {
                    e.insert(c);
                }
            }
        }
        let mut terms: Vec<Term<F::Elem>> = map
            .into_iter()
            .filter(|(_, c)| !field.is_zero(c))
            .map(|(mono, coeff)| Term { coeff, mono })
            .collect();
        terms.sort_unstable_by(|a, b| order.cmp(&b.mono, &a.mono));
        Polynomial {
            field,
            order,
            terms,
        }
    }

    pub fn field(&self) -> &F {
        &self.field
    }

    pub fn order(&self) -> MonomialOrder {
        self.order
    }

    pub fn terms(&self) -> &[Term<F::Elem>] {
        &self.terms
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn leading_term(&self) -> Option<&Term<F::Elem>> {
        self.terms.first()
    }

    /// Same polynomial with terms re-sorted under a different order.
    pub fn reordered(&self, order: MonomialOrder) -> Self {
        let mut terms = self.terms.clone();
        terms.sort_unstable_by(|a, b| order.cmp(&b.mono, &a.mono));
        Polynomial {
            field: self.field.clone(),
            order,
            terms,
        }
    }

    fn check_compat(&self, other: &Self) -> Result<(), AlgebraError> {
        if self.field.descriptor() != other.field.descriptor() {
            return Err(AlgebraError::FieldMismatch {
                left: self.field.descriptor(),
                right: other.field.descriptor(),
            });
        }
        if self.order != other.order {
            return Err(AlgebraError::OrderMismatch);
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self, AlgebraError> {
        self.check_compat(other)?;
        Ok(self.merge(other, false))
    }

    pub fn sub(&self, other: &Self) -> Result<Self, AlgebraError> {
        self.check_compat(other)?;
        Ok(self.merge(other, true))
    }

    pub fn neg(&self) -> Self {
        let terms = self
            .terms
            .iter()
            .map(|t| Term {
                coeff: self.field.neg(&t.coeff),
                mono: t.mono,
            })
            .collect();
        Polynomial {
            field: self.field.clone(),
            order: self.order,
            terms,
        }
    }

    fn merge(&self, other: &Self, negate_other: bool) -> Self {
        let f = &self.field;
        let mut out = Vec::with_capacity(self.terms.len() + other.terms.len());
        let (mut i, mut j) = (0, 0);
        while i < self.terms.len() && j < other.terms.len() {
            let a = &self.terms[i];
            let b = &other.terms[j];
            match self.order.cmp(&a.mono, &b.mono) {
                Ordering::Greater => {
                    out.push(a.clone());
                    i += 1;
                }
                Ordering::Less => {
                    let coeff = if negate_other {
                        f.neg(&b.coeff)
                    } else {
                        b.coeff.clone()
                    };
                    out.push(Term {
                        coeff,
                        mono: b.mono,
                    });
                    j += 1;
                }
                Ordering::Equal => {
                    let coeff = if negate_other {
                        f.sub(&a.coeff, &b.coeff)
                    } else {
                        f.add(&a.coeff, &b.coeff)
                    };
                    if !f.is_zero(&coeff) {
                        out.push(Term {
                            coeff,
                            mono: a.mono,
                        });
                    }
                    i += 1;
                    j += 1;
                }
            }
        }
        out.extend_from_slice(&self.terms[i..]);
        for b in &other.terms[j..] {
            let coeff = if negate_other {
                f.neg(&b.coeff)
            } else {
                b.coeff.clone()
            };
            out.push(Term {
                coeff,
                mono: b.mono,
            });
        }
        Polynomial {
            field: f.clone(),
            order: self.order,
            terms: out,
        }
    }

    /// `self - c * x^shift * g`, the reduction step in polynomial division.
    pub(crate) fn sub_mul_term(&self, c: &F::Elem, shift: &ExponentVector, g: &Self) -> Self {
        let terms = merge_sub_scaled(&self.field, self.order, &self.terms, c, shift, &g.terms);
        Polynomial {
            field: self.field.clone(),
            order: self.order,
            terms,
        }
    }

    /// Multiplies by a single monomial. Order-preserving, so terms stay
    /// sorted.
    pub fn mul_mono(&self, m: &ExponentVector) -> Self {
        let terms = self
            .terms
            .iter()
            .map(|t| Term {
                coeff: t.coeff.clone(),
                mono: t.mono.mul(m),
            })
            .collect();
        Polynomial {
            field: self.field.clone(),
            order: self.order,
            terms,
        }
    }

    /// Wraps a term list already strictly descending under `order`.
    pub(crate) fn from_sorted_terms(
        field: F,
        order: MonomialOrder,
        terms: Vec<Term<F::Elem>>,
    ) -> Self {
        debug_assert!(terms
            .windows(2)
            .all(|w| order.cmp(&w[0].mono, &w[1].mono) == Ordering::Greater));
        debug_assert!(!terms.iter().any(|t| field.is_zero(&t.coeff)));
        Polynomial {
            field,
            order,
            terms,
        }
    }

    pub fn mul(&self, other: &Self) -> Result<Self, AlgebraError> {
        self.check_compat(other)?;
        let f = &self.field;
        let mut map: HashMap<ExponentVector, F::Elem> =
            HashMap::with_capacity(self.terms.len() * other.terms.len());
        for a in &self.terms {
            for b in &other.terms {
                let m = a.mono.mul(&b.mono);
                let prod = f.mul(&a.coeff, &b.coeff);
                match map.entry(m) {
                    std::collections::hash_map::Entry::Occupied(mut e) => {
                        let sum = f.add(e.get(), &prod);
                        *e.get_mut() = sum;
                    }
                    std::collections::hash_map::Entry::Vacant(e) => {
                        e.insert(prod);
                    }
                }
            }
        }
        let mut terms: Vec<Term<F::Elem>> = map
            .into_iter()
            .filter(|(_, c)| !f.is_zero(c))
            .map(|(mono, coeff)| Term { coeff, mono })
            .collect();
        terms.sort_unstable_by(|a, b| self.order.cmp(&b.mono, &a.mono));
        Ok(Polynomial {
            field: f.clone(),
            order: self.order,
            terms,
        })
    }

    pub fn scale(&self, c: &F::Elem) -> Self {
        let f = &self.field;
        if f.is_zero(c) {
            return Self::zero(f.clone(), self.order);
        }
        let terms = self
            .terms
            .iter()
            .map(|t| Term {
                coeff: f.mul(&t.coeff, c),
                mono: t.mono,
            })
            .collect();
        Polynomial {
            field: f.clone(),
            order: self.order,
            terms,
        }
    }

    /// Divides by the leading coefficient.
    pub fn monic(&self) -> Self {
        match self.leading_term() {
            None => self.clone(),
            Some(lt) => self.scale(&self.field.inv(&lt.coeff)),
        }
    }

    /// Rescales into the field's canonical intermediate form (monic over
    /// GF(p), primitive integer over the rationals).
    pub(crate) fn canonical_scaled(&self) -> Self {
        if self.is_zero() {
            return self.clone();
        }
        let coeffs: Vec<F::Elem> = self.terms.iter().map(|t| t.coeff.clone()).collect();
        self.scale(&self.field.canonical_scale(&coeffs))
    }

    /// d/dz_i. Over GF(p) the exponent enters as a residue, so a term whose
    /// exponent is a multiple of p drops out.
    pub fn partial_derivative(&self, i: usize) -> Self {
        assert!(i < NVARS);
        let f = &self.field;
        let mut terms = Vec::with_capacity(self.terms.len());
        for t in &self.terms {
            let e = t.mono.0[i];
            if e == 0 {
                continue;
            }
            let coeff = f.mul(&t.coeff, &f.from_i64(e as i64));
            if f.is_zero(&coeff) {
                continue;
            }
            let mut m = t.mono.0;
            m[i] -= 1;
            terms.push(Term {
                coeff,
                mono: ExponentVector(m),
            });
        }
        // Differentiation preserves the relative order of surviving terms.
        Polynomial {
            field: f.clone(),
            order: self.order,
            terms,
        }
    }

    /// Common weighted degree of all terms, if the polynomial is homogeneous
    /// for `w`. `None` when degrees are mixed.
    pub fn homogeneous_weighted_degree(&self, w: &[u32; NVARS]) -> Option<u64> {
        let first = self.terms.first()?.mono.weighted_degree(w);
        self.terms
            .iter()
            .all(|t| t.mono.weighted_degree(w) == first)
            .then_some(first)
    }

    /// Whether every term has the same weighted degree. The zero polynomial
    /// has no well-defined degree and is rejected.
    pub fn is_weighted_homogeneous(&self, w: &[u32; NVARS]) -> Result<bool, AlgebraError> {
        if self.is_zero() {
            return Err(AlgebraError::ZeroPolynomial);
        }
        Ok(self.homogeneous_weighted_degree(w).is_some())
    }
}

/// Reduce a rational-coefficient polynomial modulo a prime, keeping the
/// monomial order. Terms whose numerator vanishes mod p are dropped; a
/// denominator divisible by p is an error since the image is undefined.
pub fn reduce_mod_p(
    f: &Polynomial<Rationals>,
    field: PrimeField,
) -> Result<Polynomial<PrimeField>, AlgebraError> {
    let p = BigInt::from(field.p());
    let mut pairs = Vec::with_capacity(f.num_terms());
    for t in f.terms() {
        let den = t.coeff.denom().mod_floor(&p);
        if den.is_zero() {
            return Err(AlgebraError::DenominatorVanishes { prime: field.p() });
        }
        let num = t.coeff.numer().mod_floor(&p);
        let num = field.from_i64(num.to_i64().expect("residue fits"));
        let den = field.from_i64(den.to_i64().expect("residue fits"));
        pairs.push((field.div(&num, &den), t.mono));
    }
    Ok(Polynomial::from_terms(field, f.order(), pairs))
}

/// `a - c * x^shift * g` on raw sorted term slices. The workhorse of
/// polynomial division; both inputs must be strictly descending under
/// `order` and the output is too.
pub(crate) fn merge_sub_scaled<F: CoefficientField>(
    field: &F,
    order: MonomialOrder,
    a: &[Term<F::Elem>],
    c: &F::Elem,
    shift: &ExponentVector,
    g: &[Term<F::Elem>],
) -> Vec<Term<F::Elem>> {
    let mut out = Vec::with_capacity(a.len() + g.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < g.len() {
        let t = &a[i];
        let bm = g[j].mono.mul(shift);
        match order.cmp(&t.mono, &bm) {
            Ordering::Greater => {
                out.push(t.clone());
                i += 1;
            }
            Ordering::Less => {
                out.push(Term {
                    coeff: field.neg(&field.mul(c, &g[j].coeff)),
                    mono: bm,
                });
                j += 1;
            }
            Ordering::Equal => {
                let coeff = field.sub(&t.coeff, &field.mul(c, &g[j].coeff));
                if !field.is_zero(&coeff) {
                    out.push(Term {
                        coeff,
                        mono: t.mono,
                    });
                }
                i += 1;
                j += 1;
            }
        }
    }
    out.extend_from_slice(&a[i..]);
    for t in &g[j..] {
        out.push(Term {
            coeff: field.neg(&field.mul(c, &t.coeff)),
            mono: t.mono.mul(shift),
        });
    }
    out
}

impl<F: CoefficientField> PartialEq for Polynomial<F> {
    /// Equality as ring elements: same field and same term set, regardless of
    /// the orders the two sides happen to be sorted under.
    fn eq(&self, other: &Self) -> bool {
        if self.field.descriptor() != other.field.descriptor() {
            return false;
        }
        if self.terms.len() != other.terms.len() {
            return false;
        }
        if self.order == other.order {
            return self.terms == other.terms;
        }
        let key = |t: &Term<F::Elem>| t.mono.0;
        let mut a: Vec<&Term<F::Elem>> = self.terms.iter().collect();
        let mut b: Vec<&Term<F::Elem>> = other.terms.iter().collect();
        a.sort_unstable_by_key(|t| key(t));
        b.sort_unstable_by_key(|t| key(t));
        a.iter()
            .zip(&b)
            .all(|(x, y)| x.mono == y.mono && x.coeff == y.coeff)
    }
}

impl<F: CoefficientField> fmt::Display for Polynomial<F> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        for (i, t) in self.terms.iter().enumerate() {
            if i > 0 {
                write!(f, " + ")?;
            }
            let c = self.field.elem_to_string(&t.coeff);
            if t.mono.is_constant() {
                write!(f, "{c}")?;
            } else if c == "1" {
                write!(f, "{}", t.mono)?;
            } else {
                write!(f, "{c}*{}", t.mono)?;
            }
        }
        Ok(())
    }
}

/// Serialized polynomial: weights and degree carried alongside the terms so a
/// file is self-describing.
#[derive(Serialize, Deserialize, Clone, Debug)]
pub struct PolynomialJson {
    pub weights: [u32; NVARS],
    pub degree: u64,
    pub field: FieldDescriptor,
    pub terms: Vec<TermJson>,
}

#[derive(Serialize, Deserialize, Clone, Debug)]
pub struct TermJson {
    pub c: String,
    pub e: [u32; NVARS],
}

impl PolynomialJson {
    pub fn encode<F: CoefficientField>(
        poly: &Polynomial<F>,
        weights: [u32; NVARS],
    ) -> Result<Self, AlgebraError> {
        let degree = poly
            .homogeneous_weighted_degree(&weights)
            .ok_or(AlgebraError::NotHomogeneous)?;
        let field = poly.field().descriptor();
        let terms = poly
            .terms()
            .iter()
            .map(|t| TermJson {
                c: poly.field().elem_to_string(&t.coeff),
                e: t.mono.0,
            })
            .collect();
        Ok(PolynomialJson {
            weights,
            degree,
            field,
            terms,
        })
    }

    pub fn decode<F: CoefficientField>(
        &self,
        field: F,
        order: MonomialOrder,
    ) -> Result<Polynomial<F>, AlgebraError> {
        if field.descriptor() != self.field {
            return Err(AlgebraError::FieldMismatch {
                left: field.descriptor(),
                right: self.field,
            });
        }
        let mut pairs = Vec::with_capacity(self.terms.len());
        for t in &self.terms {
            let m = ExponentVector(t.e);
            if m.weighted_degree(&self.weights) != self.degree {
                return Err(AlgebraError::DegreeMismatch {
                    mono: m,
                    expected: self.degree,
                });
            }
            pairs.push((field.elem_from_str(&t.c)?, m));
        }
        Ok(Polynomial::from_terms(field, order, pairs))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::field::{PrimeField, Rationals};

    fn gf(p: u64) -> PrimeField {
        PrimeField::new(p).unwrap()
    }

    fn m(e: [u32; 5]) -> ExponentVector {
        ExponentVector(e)
    }

    fn poly_gf(p: u64, pairs: &[(i64, [u32; 5])]) -> Polynomial<PrimeField> {
        let f = gf(p);
        Polynomial::from_terms(
            f,
            MonomialOrder::degrevlex(),
            pairs.iter().map(|&(c, e)| (f.from_i64(c), m(e))).collect(),
        )
    }

    #[test]
    fn additive_inverse_cancels() {
        let a = poly_gf(101, &[(3, [2, 0, 0, 0, 0]), (5, [0, 1, 0, 0, 0])]);
        assert!(a.add(&a.neg()).unwrap().is_zero());
    }

    #[test]
    fn difference_of_squares() {
        let f = gf(32003);
        let ord = MonomialOrder::degrevlex();
        let z1 = Polynomial::variable(f, ord, 0);
        let z2 = Polynomial::variable(f, ord, 1);
        let prod = z1.add(&z2).unwrap().mul(&z1.sub(&z2).unwrap()).unwrap();
        let expect = poly_gf(32003, &[(1, [2, 0, 0, 0, 0]), (-1, [0, 2, 0, 0, 0])]);
        assert_eq!(prod, expect);
    }

    #[test]
    fn coefficients_wrap_mod_p() {
        let sum = poly_gf(101, &[(100, [1, 0, 0, 0, 0])])
            .add(&poly_gf(101, &[(1, [1, 0, 0, 0, 0])]))
            .unwrap();
        assert!(sum.is_zero());
    }

    #[test]
    fn mixed_fields_are_rejected() {
        let a = poly_gf(101, &[(1, [1, 0, 0, 0, 0])]);
        let b = poly_gf(32003, &[(1, [1, 0, 0, 0, 0])]);
        assert!(matches!(
            a.add(&b),
            Err(AlgebraError::FieldMismatch { .. })
        ));
        let c = poly_gf(101, &[(1, [1, 0, 0, 0, 0])]).reordered(MonomialOrder::lex());
        assert!(matches!(a.add(&c), Err(AlgebraError::OrderMismatch)));
    }

    #[test]
    fn derivative_of_fifth_power() {
        let f = poly_gf(32003, &[(1, [5, 0, 0, 0, 0])]);
        let d = f.partial_derivative(0);
        assert_eq!(d, poly_gf(32003, &[(5, [4, 0, 0, 0, 0])]));
        assert!(f.partial_derivative(1).is_zero());
    }

    #[test]
    fn derivative_exponent_killed_mod_p() {
        let f = poly_gf(101, &[(1, [101, 0, 0, 0, 0]), (1, [1, 1, 0, 0, 0])]);
        let d = f.partial_derivative(0);
        assert_eq!(d, poly_gf(101, &[(1, [0, 1, 0, 0, 0])]));
    }

    #[test]
    fn homogeneity_detection() {
        let w = [1, 1, 1, 1, 1];
        let fermat = poly_gf(
            32003,
            &[
                (1, [5, 0, 0, 0, 0]),
                (1, [0, 5, 0, 0, 0]),
                (1, [0, 0, 5, 0, 0]),
                (1, [0, 0, 0, 5, 0]),
                (1, [0, 0, 0, 0, 5]),
            ],
        );
        assert!(fermat.is_weighted_homogeneous(&w).unwrap());
        let mixed = poly_gf(32003, &[(1, [5, 0, 0, 0, 0]), (1, [1, 0, 0, 0, 0])]);
        assert!(!mixed.is_weighted_homogeneous(&w).unwrap());
        let zero = Polynomial::zero(gf(32003), MonomialOrder::degrevlex());
        assert!(matches!(
            zero.is_weighted_homogeneous(&w),
            Err(AlgebraError::ZeroPolynomial)
        ));
    }

    #[test]
    fn euler_relation_over_rationals() {
        // sum_i w_i z_i df/dz_i = d*f for weighted homogeneous f.
        let q = Rationals;
        let ord = MonomialOrder::degrevlex();
        let w = [22u32, 29, 49, 50, 75];
        let f = Polynomial::from_terms(
            q,
            ord,
            vec![
                (q.from_i64(3), m([8, 0, 1, 0, 0])),
                (q.from_i64(-7), m([1, 1, 1, 1, 1])),
                (q.from_i64(11), m([0, 0, 0, 0, 3])),
            ],
        );
        let mut lhs = Polynomial::zero(q, ord);
        for i in 0..NVARS {
            let zi = Polynomial::variable(q, ord, i);
            let term = zi
                .mul(&f.partial_derivative(i))
                .unwrap()
                .scale(&q.from_i64(w[i] as i64));
            lhs = lhs.add(&term).unwrap();
        }
        assert_eq!(lhs, f.scale(&q.from_i64(225)));
    }

    #[test]
    fn json_round_trip() {
        let w = [22, 29, 49, 50, 75];
        let f = poly_gf(32003, &[(3, [8, 0, 1, 0, 0]), (-1, [0, 0, 0, 0, 3])]);
        let js = PolynomialJson::encode(&f, w).unwrap();
        assert_eq!(js.degree, 225);
        let text = serde_json::to_string(&js).unwrap();
        assert!(text.contains("\"kind\":\"gf\""));
        let back: PolynomialJson = serde_json::from_str(&text).unwrap();
        let g = back
            .decode(gf(32003), MonomialOrder::degrevlex())
            .unwrap();
        assert_eq!(f, g);
    }

    #[test]
    fn json_rejects_degree_mismatch() {
        let js = PolynomialJson {
            weights: [1, 1, 1, 1, 1],
            degree: 5,
            field: FieldDescriptor::Gf { p: 32003 },
            terms: vec![TermJson {
                c: "1".into(),
                e: [1, 0, 0, 0, 0],
            }],
        };
        assert!(matches!(
            js.decode(gf(32003), MonomialOrder::degrevlex()),
            Err(AlgebraError::DegreeMismatch { .. })
        ));
    }
}
