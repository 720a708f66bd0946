//! Monomials in five variables and the orders that sort them.

use serde::{Deserialize, Serialize};
use std::cmp::Ordering;
use std::fmt;

/// Every polynomial here lives in C[z1..z5].
pub const NVARS: usize = 5;

/// A monomial, stored as its exponent vector. The derived ordering is plain
/// lexicographic on the array; order-sensitive comparisons go through
/// [`MonomialOrder`].
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ExponentVector(pub [u32; NVARS]);

impl ExponentVector {
    pub const ONE: ExponentVector = ExponentVector([0; NVARS]);

    pub fn is_constant(&self) -> bool {
        self.0 == [0; NVARS]
    }

    pub fn total_degree(&self) -> u64 {
        self.0.iter().map(|&e| e as u64).sum()
    }

    pub fn weighted_degree(&self, w: &[u32; NVARS]) -> u64 {
        self.0
            .iter()
            .zip(w)
            .map(|(&e, &wi)| e as u64 * wi as u64)
            .sum()
    }

    /// Product of monomials: exponentwise sum.
    pub fn mul(&self, other: &ExponentVector) -> ExponentVector {
        let mut out = [0u32; NVARS];
        for i in 0..NVARS {
            out[i] = self.0[i]
                .checked_add(other.0[i])
                .expect("monomial exponent overflow");
        }
        ExponentVector(out)
    }

    pub fn divides(&self, other: &ExponentVector) -> bool {
        self.0.iter().zip(&other.0).all(|(a, b)| a <= b)
    }

    /// `other / self` when `self` divides `other`.
    pub fn quotient_into(&self, other: &ExponentVector) -> Option<ExponentVector> {
        let mut out = [0u32; NVARS];
        for i in 0..NVARS {
            out[i] = other.0[i].checked_sub(self.0[i])?;
        }
        Some(ExponentVector(out))
    }

    pub fn lcm(&self, other: &ExponentVector) -> ExponentVector {
        let mut out = [0u32; NVARS];
        for i in 0..NVARS {
            out[i] = self.0[i].max(other.0[i]);
        }
        ExponentVector(out)
    }

    pub fn coprime(&self, other: &ExponentVector) -> bool {
        self.0.iter().zip(&other.0).all(|(a, b)| *a == 0 || *b == 0)
    }

    /// Indices of variables with nonzero exponent, as a 5-bit mask.
    pub fn support_mask(&self) -> u8 {
        let mut m = 0u8;
        for i in 0..NVARS {
            if self.0[i] > 0 {
                m |= 1 << i;
            }
        }
        m
    }

    /// Applies a permutation of the variables: entry `i` of the result is the
    /// exponent of variable `perm[i]` in `self`.
    pub fn permuted(&self, perm: &[usize; NVARS]) -> ExponentVector {
        let mut out = [0u32; NVARS];
        for i in 0..NVARS {
            out[i] = self.0[perm[i]];
        }
        ExponentVector(out)
    }
}

impl fmt::Display for ExponentVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_constant() {
            return write!(f, "1");
        }
        let mut first = true;
        for (i, &e) in self.0.iter().enumerate() {
            if e == 0 {
                continue;
            }
            if !first {
                write!(f, "*")?;
            }
            first = false;
            if e == 1 {
                write!(f, "z{}", i + 1)?;
            } else {
                write!(f, "z{}^{}", i + 1, e)?;
            }
        }
        Ok(())
    }
}

/// How the degree entering a graded order is measured.
#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Grading {
    Standard,
    Weighted([u32; NVARS]),
}

#[derive(Clone, Copy, PartialEq, Eq, Debug, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OrderKind {
    #[default]
    DegRevLex,
    DegLex,
    Lex,
}

/// A monomial order on C[z1..z5] with z1 > z2 > ... > z5.
///
/// The default is degree reverse lexicographic under the standard grading,
/// which keeps Jacobian-ideal bases small in practice. Weighted gradings are
/// available for callers that want the order aligned with a weight system.
#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub struct MonomialOrder {
    pub kind: OrderKind,
    pub grading: Grading,
}

impl Default for MonomialOrder {
    fn default() -> Self {
        MonomialOrder {
            kind: OrderKind::DegRevLex,
            grading: Grading::Standard,
        }
    }
}

impl MonomialOrder {
    pub fn degrevlex() -> Self {
        Self::default()
    }

    pub fn deglex() -> Self {
        MonomialOrder {
            kind: OrderKind::DegLex,
            grading: Grading::Standard,
        }
    }

    pub fn lex() -> Self {
        MonomialOrder {
            kind: OrderKind::Lex,
            grading: Grading::Standard,
        }
    }

    pub fn weighted(kind: OrderKind, w: [u32; NVARS]) -> Self {
        MonomialOrder {
            kind,
            grading: Grading::Weighted(w),
        }
    }

    pub fn degree(&self, m: &ExponentVector) -> u64 {
        match &self.grading {
            Grading::Standard => m.total_degree(),
            Grading::Weighted(w) => m.weighted_degree(w),
        }
    }

    pub fn cmp(&self, a: &ExponentVector, b: &ExponentVector) -> Ordering {
        match self.kind {
            OrderKind::Lex => lex_cmp(a, b),
            OrderKind::DegLex => self
                .degree(a)
                .cmp(&self.degree(b))
                .then_with(|| lex_cmp(a, b)),
            OrderKind::DegRevLex => self
                .degree(a)
                .cmp(&self.degree(b))
                .then_with(|| revlex_tiebreak(a, b)),
        }
    }

    pub fn max<'m>(&self, a: &'m ExponentVector, b: &'m ExponentVector) -> &'m ExponentVector {
        if self.cmp(a, b) == Ordering::Less {
            b
        } else {
            a
        }
    }

    /// Short name used in summary tables, e.g. `degrevlex` or `wdeglex`.
    pub fn name(&self) -> String {
        let base = match self.kind {
            OrderKind::DegRevLex => "degrevlex",
            OrderKind::DegLex => "deglex",
            OrderKind::Lex => "lex",
        };
        match self.grading {
            Grading::Standard => base.to_string(),
            Grading::Weighted(_) => format!("w{base}"),
        }
    }
}

fn lex_cmp(a: &ExponentVector, b: &ExponentVector) -> Ordering {
    for i in 0..NVARS {
        match a.0[i].cmp(&b.0[i]) {
            Ordering::Equal => continue,
            ord => return ord,
        }
    }
    Ordering::Equal
}

// Ties in degrevlex go to the monomial with the smaller exponent in the last
// variable where the two differ.
fn revlex_tiebreak(a: &ExponentVector, b: &ExponentVector) -> Ordering {
    for i in (0..NVARS).rev() {
        match a.0[i].cmp(&b.0[i]) {
            Ordering::Equal => continue,
            ord => return ord.reverse(),
        }
    }
    Ordering::Equal
}

impl fmt::Display for MonomialOrder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.name())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn m(e: [u32; 5]) -> ExponentVector {
        ExponentVector(e)
    }

    #[test]
    fn weighted_degree_examples() {
        let w = [22, 29, 49, 50, 75];
        assert_eq!(m([1, 1, 1, 1, 1]).weighted_degree(&w), 225);
        assert_eq!(m([8, 0, 1, 0, 0]).weighted_degree(&w), 225);
        assert_eq!(m([0, 0, 0, 0, 3]).weighted_degree(&w), 225);
        assert_eq!(m([2, 0, 0, 0, 0]).weighted_degree(&[1, 1, 1, 1, 1]), 2);
    }

    #[test]
    fn degrevlex_prefers_smaller_trailing_exponent() {
        let ord = MonomialOrder::degrevlex();
        // z1*z3 vs z2^2: equal degree, z2^2 wins.
        assert_eq!(
            ord.cmp(&m([1, 0, 1, 0, 0]), &m([0, 2, 0, 0, 0])),
            Ordering::Less
        );
        assert_eq!(
            ord.cmp(&m([4, 0, 0, 0, 0]), &m([3, 1, 0, 0, 0])),
            Ordering::Greater
        );
    }

    #[test]
    fn deglex_chain() {
        let ord = MonomialOrder::deglex();
        let chain = [
            m([2, 0, 0, 0, 0]),
            m([1, 1, 0, 0, 0]),
            m([0, 2, 0, 0, 0]),
            m([1, 0, 0, 0, 0]),
            m([0, 0, 0, 0, 0]),
        ];
        for pair in chain.windows(2) {
            assert_eq!(ord.cmp(&pair[0], &pair[1]), Ordering::Greater);
        }
    }

    #[test]
    fn lex_ignores_degree() {
        let ord = MonomialOrder::lex();
        assert_eq!(
            ord.cmp(&m([1, 0, 0, 0, 0]), &m([0, 100, 0, 0, 0])),
            Ordering::Greater
        );
    }

    #[test]
    fn weighted_grading_reorders() {
        let ord = MonomialOrder::weighted(OrderKind::DegRevLex, [1, 1, 1, 1, 10]);
        // z5 outweighs z1^9 under the weighted grading.
        assert_eq!(
            ord.cmp(&m([0, 0, 0, 0, 1]), &m([9, 0, 0, 0, 0])),
            Ordering::Greater
        );
    }

    #[test]
    fn display_forms() {
        assert_eq!(m([0, 0, 0, 0, 0]).to_string(), "1");
        assert_eq!(m([2, 0, 1, 0, 0]).to_string(), "z1^2*z3");
    }

    fn arb_mono() -> impl Strategy<Value = ExponentVector> {
        prop::array::uniform5(0u32..6).prop_map(ExponentVector)
    }

    fn arb_order() -> impl Strategy<Value = MonomialOrder> {
        let kind = prop_oneof![
            Just(OrderKind::DegRevLex),
            Just(OrderKind::DegLex),
            Just(OrderKind::Lex),
        ];
        let grading = prop_oneof![
            Just(Grading::Standard),
            prop::array::uniform5(1u32..9).prop_map(Grading::Weighted),
        ];
        (kind, grading).prop_map(|(kind, grading)| MonomialOrder { kind, grading })
    }

    proptest! {
        // A monomial order is total, respects multiplication, and has 1 as
        // its least element.
        #[test]
        fn order_axioms(ord in arb_order(), a in arb_mono(), b in arb_mono(), c in arb_mono()) {
            let ab = ord.cmp(&a, &b);
            prop_assert_eq!(ab, ord.cmp(&b, &a).reverse());
            prop_assert_eq!(ab == Ordering::Equal, a == b);
            prop_assert_eq!(ord.cmp(&a.mul(&c), &b.mul(&c)), ab);
            prop_assert_ne!(ord.cmp(&a.mul(&c).mul(&c), &a), Ordering::Less);
        }

        #[test]
        fn lcm_divisibility(a in arb_mono(), b in arb_mono()) {
            let l = a.lcm(&b);
            prop_assert!(a.divides(&l) && b.divides(&l));
            let q = a.quotient_into(&l).unwrap();
            prop_assert_eq!(a.mul(&q), l);
        }
    }
}
