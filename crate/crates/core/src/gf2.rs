//! Bit-level linear algebra over F₂.
//!
//! Vectors of F₂ⁿ are stored as `u32` masks with bit `i` standing for the
//! variable `x_{i+1}`. The same mask is used as a character index, as a subset
//! of variables, and as a linear form `x ↦ ⟨mask, x⟩`.
//!
//! [`Gf2Basis`] keeps its rows in fully reduced echelon form: the leading
//! (highest) bit of each row is zero in every other row. Reducing a vector
//! against such a basis therefore yields the unique element of its coset with
//! all pivot bits cleared, which is also the numerically smallest element of
//! that coset. That element is the canonical coset label.

use std::fmt;
use std::ops::{BitXor, BitXorAssign};

use serde::{Serialize, Serializer};

use crate::error::{Error, Result};

/// Largest supported ambient dimension.
pub const MAX_DIM: usize = 24;

/// Checks `n ≤ MAX_DIM`.
pub fn check_dim(n: usize) -> Result<()> {
    if n > MAX_DIM {
        Err(Error::DimensionTooLarge(n))
    } else {
        Ok(())
    }
}

/// Mask with the low `n` bits set.
#[inline]
pub fn full_mask(n: usize) -> u32 {
    if n >= 32 {
        u32::MAX
    } else {
        (1u32 << n) - 1
    }
}

/// Checks that `mask` lives in F₂ⁿ.
pub fn check_mask(mask: u64, n: usize) -> Result<u32> {
    if mask > full_mask(n) as u64 {
        Err(Error::MaskOutOfRange { mask, n })
    } else {
        Ok(mask as u32)
    }
}

/// `⟨a, x⟩` over F₂.
#[inline]
pub fn dot(a: u32, x: u32) -> bool {
    (a & x).count_ones() & 1 == 1
}

/// `χ_a(x) = (−1)^{⟨a, x⟩}`.
#[inline]
pub fn character(a: u32, x: u32) -> i8 {
    if dot(a, x) {
        -1
    } else {
        1
    }
}

#[inline]
fn leading_bit(v: u32) -> u32 {
    debug_assert!(v != 0);
    31 - v.leading_zeros()
}

/// An element of F₂ⁿ.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ParityVector {
    bits: u32,
    dim: u8,
}

impl ParityVector {
    pub fn new(bits: u32, n: usize) -> Result<Self> {
        check_dim(n)?;
        check_mask(bits as u64, n)?;
        Ok(Self { bits, dim: n as u8 })
    }

    pub fn zero(n: usize) -> Result<Self> {
        Self::new(0, n)
    }

    /// Unit vector for the variable `x_{i+1}`.
    pub fn unit(i: usize, n: usize) -> Result<Self> {
        if i >= n {
            return Err(Error::InvalidParameter(format!(
                "variable index {i} out of range for n = {n}"
            )));
        }
        Self::new(1 << i, n)
    }

    /// Parses a bit string written in variable order `x₁x₂…xₙ`, so `"10"` is
    /// mask `0b01` (the variable `x₁`).
    pub fn parse_bits(s: &str) -> Result<Self> {
        let n = s.len();
        check_dim(n)?;
        let mut bits = 0u32;
        for (i, c) in s.chars().enumerate() {
            match c {
                '0' => {}
                '1' => bits |= 1 << i,
                _ => return Err(Error::Parse(format!("invalid bit string {s:?}"))),
            }
        }
        Self::new(bits, n)
    }

    pub(crate) fn from_raw(bits: u32, n: usize) -> Self {
        debug_assert!(n <= MAX_DIM && bits <= full_mask(n));
        Self { bits, dim: n as u8 }
    }

    #[inline]
    pub fn bits(self) -> u32 {
        self.bits
    }

    #[inline]
    pub fn dim(self) -> usize {
        self.dim as usize
    }

    pub fn is_zero(self) -> bool {
        self.bits == 0
    }

    pub fn weight(self) -> u32 {
        self.bits.count_ones()
    }

    /// `⟨self, x⟩` for a point `x` given as a mask.
    pub fn dot(self, x: u32) -> bool {
        dot(self.bits, x)
    }

    /// Sum over F₂, checking dimensions.
    pub fn try_add(self, other: Self) -> Result<Self> {
        same_dim(self.dim(), other.dim())?;
        Ok(Self::from_raw(self.bits ^ other.bits, self.dim()))
    }
}

impl BitXor for ParityVector {
    type Output = ParityVector;

    /// Panics on mismatched dimensions; use [`ParityVector::try_add`] otherwise.
    fn bitxor(self, rhs: Self) -> Self {
        assert_eq!(self.dim, rhs.dim, "ParityVector dimension mismatch");
        Self::from_raw(self.bits ^ rhs.bits, self.dim())
    }
}

impl BitXorAssign for ParityVector {
    fn bitxor_assign(&mut self, rhs: Self) {
        *self = *self ^ rhs;
    }
}

impl fmt::Display for ParityVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.dim() {
            f.write_str(if self.bits >> i & 1 == 1 { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl fmt::Debug for ParityVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ParityVector({self})")
    }
}

impl Serialize for ParityVector {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_u32(self.bits)
    }
}

fn same_dim(expected: usize, found: usize) -> Result<()> {
    if expected != found {
        Err(Error::DimensionMismatch { expected, found })
    } else {
        Ok(())
    }
}

/// A fully reduced echelon basis of a subspace of F₂ⁿ.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Gf2Basis {
    dim: usize,
    /// Sorted by strictly increasing leading bit.
    rows: Vec<u32>,
}

impl Gf2Basis {
    pub fn empty(n: usize) -> Result<Self> {
        check_dim(n)?;
        Ok(Self {
            dim: n,
            rows: Vec::new(),
        })
    }

    pub(crate) fn empty_unchecked(n: usize) -> Self {
        Self {
            dim: n,
            rows: Vec::new(),
        }
    }

    /// Builds the basis from raw masks already known to lie in F₂ⁿ.
    pub(crate) fn from_masks(n: usize, masks: impl IntoIterator<Item = u32>) -> Self {
        let mut basis = Self::empty_unchecked(n);
        for m in masks {
            basis.insert_mask(m);
        }
        basis
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn rows(&self) -> Vec<ParityVector> {
        self.rows
            .iter()
            .map(|&r| ParityVector::from_raw(r, self.dim))
            .collect()
    }

    /// Bits occupied by the leading bits of the rows.
    pub fn pivot_mask(&self) -> u32 {
        self.rows.iter().fold(0, |acc, &r| acc | 1 << leading_bit(r))
    }

    /// Canonical label of the coset `v + span`.
    #[inline]
    pub(crate) fn reduce_mask(&self, mut v: u32) -> u32 {
        for &r in self.rows.iter().rev() {
            if v >> leading_bit(r) & 1 == 1 {
                v ^= r;
            }
        }
        v
    }

    /// Adds `v` to the spanning set. Returns `true` if the rank grew.
    pub(crate) fn insert_mask(&mut self, v: u32) -> bool {
        let v = self.reduce_mask(v);
        if v == 0 {
            return false;
        }
        let lead = leading_bit(v);
        for r in &mut self.rows {
            if *r >> lead & 1 == 1 {
                *r ^= v;
            }
        }
        let pos = self.rows.partition_point(|&r| leading_bit(r) < lead);
        self.rows.insert(pos, v);
        true
    }

    /// Adds `v` to the spanning set. Returns `true` if the rank grew.
    pub fn insert(&mut self, v: ParityVector) -> Result<bool> {
        same_dim(self.dim, v.dim())?;
        Ok(self.insert_mask(v.bits))
    }

    pub fn contains(&self, v: ParityVector) -> Result<bool> {
        same_dim(self.dim, v.dim())?;
        Ok(self.reduce_mask(v.bits) == 0)
    }

    pub fn label(&self, v: ParityVector) -> Result<ParityVector> {
        same_dim(self.dim, v.dim())?;
        Ok(ParityVector::from_raw(self.reduce_mask(v.bits), self.dim))
    }
}

/// Reduced echelon basis spanning the same subspace as `vectors` of a given
/// dimension `n` (empty input gives the zero subspace).
pub fn row_reduce_in(n: usize, vectors: &[ParityVector]) -> Result<Gf2Basis> {
    let mut basis = Gf2Basis::empty(n)?;
    for &v in vectors {
        basis.insert(v)?;
    }
    Ok(basis)
}

/// Reduced echelon basis of `span vectors`. The dimension is taken from the
/// first vector; an empty input yields the rank-0 basis of F₂⁰.
pub fn row_reduce(vectors: &[ParityVector]) -> Result<Gf2Basis> {
    let n = vectors.first().map_or(0, |v| v.dim());
    row_reduce_in(n, vectors)
}

/// `v ∈ span basis`.
pub fn in_span(v: ParityVector, basis: &Gf2Basis) -> Result<bool> {
    basis.contains(v)
}

/// Canonical (minimal) representative of `v + span basis`.
pub fn coset_label(v: ParityVector, basis: &Gf2Basis) -> Result<ParityVector> {
    basis.label(v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::collections::HashSet;

    fn pv(s: &str) -> ParityVector {
        ParityVector::parse_bits(s).unwrap()
    }

    /// Brute-force span: every subset-sum of the inputs.
    fn span_oracle(vs: &[u32]) -> HashSet<u32> {
        let mut out = HashSet::new();
        for sel in 0u32..(1 << vs.len()) {
            let mut acc = 0;
            for (i, &v) in vs.iter().enumerate() {
                if sel >> i & 1 == 1 {
                    acc ^= v;
                }
            }
            out.insert(acc);
        }
        out
    }

    #[test]
    fn empty_input_is_rank_zero() {
        let b = row_reduce(&[]).unwrap();
        assert_eq!(b.rank(), 0);
        let b = row_reduce_in(3, &[]).unwrap();
        assert_eq!(b.rank(), 0);
        assert!(in_span(pv("000"), &b).unwrap());
    }

    #[test]
    fn dependent_triple_has_rank_two() {
        let b = row_reduce(&[pv("110"), pv("011"), pv("101")]).unwrap();
        assert_eq!(b.rank(), 2);
    }

    #[test]
    fn single_vector() {
        let b = row_reduce(&[pv("100")]).unwrap();
        assert_eq!(b.rows(), vec![pv("100")]);
    }

    #[test]
    fn span_membership_examples() {
        let b = row_reduce(&[pv("110"), pv("011")]).unwrap();
        assert!(in_span(pv("000"), &b).unwrap());
        assert!(in_span(pv("101"), &b).unwrap());
        assert!(!in_span(pv("111"), &b).unwrap());
    }

    #[test]
    fn coset_label_examples() {
        let empty = row_reduce_in(3, &[]).unwrap();
        assert_eq!(coset_label(pv("110"), &empty).unwrap(), pv("110"));

        let b = row_reduce(&[pv("011")]).unwrap();
        assert_eq!(
            coset_label(pv("110"), &b).unwrap(),
            coset_label(pv("101"), &b).unwrap()
        );
        assert_eq!(coset_label(pv("000"), &b).unwrap(), pv("000"));
    }

    #[test]
    fn dimension_mismatch_is_reported() {
        let err = row_reduce(&[pv("10"), pv("100")]).unwrap_err();
        assert!(matches!(err, Error::DimensionMismatch { .. }));
        let b = row_reduce(&[pv("10")]).unwrap();
        assert!(in_span(pv("100"), &b).is_err());
        assert!(coset_label(pv("100"), &b).is_err());
    }

    #[test]
    fn masks_outside_dimension_are_rejected() {
        assert!(ParityVector::new(0b100, 2).is_err());
        assert!(ParityVector::new(0, 25).is_err());
        assert!(ParityVector::new(0xFF_FFFF, 24).is_ok());
    }

    #[test]
    fn display_uses_variable_order() {
        assert_eq!(ParityVector::new(0b001, 3).unwrap().to_string(), "100");
        assert_eq!(pv("0110").bits(), 0b0110);
        assert_eq!(pv("1101").bits(), 0b1011);
    }

    fn arb_masks(n: usize, max_len: usize) -> impl Strategy<Value = Vec<u32>> {
        prop::collection::vec(0u32..(1 << n), 0..=max_len)
    }

    proptest! {
        #[test]
        fn rank_matches_enumeration(n in 1usize..=10, seed in arb_masks(10, 8)) {
            let masks: Vec<u32> = seed.iter().map(|m| m & full_mask(n)).collect();
            let vs: Vec<_> = masks.iter().map(|&m| ParityVector::new(m, n).unwrap()).collect();
            let b = row_reduce_in(n, &vs).unwrap();
            let span = span_oracle(&masks);
            prop_assert_eq!(1usize << b.rank(), span.len());
            prop_assert!(b.rank() <= masks.len().min(n));
            // the basis spans exactly the same set
            let rows: Vec<u32> = b.rows().iter().map(|r| r.bits()).collect();
            prop_assert_eq!(span_oracle(&rows), span);
        }

        #[test]
        fn echelon_invariants_hold(n in 1usize..=12, seed in arb_masks(12, 10)) {
            let vs: Vec<_> = seed.iter().map(|&m| ParityVector::new(m & full_mask(n), n).unwrap()).collect();
            let b = row_reduce_in(n, &vs).unwrap();
            let rows: Vec<u32> = b.rows().iter().map(|r| r.bits()).collect();
            for w in rows.windows(2) {
                prop_assert!(leading_bit(w[0]) < leading_bit(w[1]));
            }
            for (i, &r) in rows.iter().enumerate() {
                prop_assert!(r != 0);
                for (j, &s) in rows.iter().enumerate() {
                    if i != j {
                        prop_assert_eq!(s >> leading_bit(r) & 1, 0);
                    }
                }
            }
            // idempotent
            let again = row_reduce_in(n, &b.rows()).unwrap();
            prop_assert_eq!(again, b);
        }

        #[test]
        fn labels_agree_iff_difference_in_span(n in 1usize..=10, seed in arb_masks(10, 6), v in 0u32..1024, w in 0u32..1024) {
            let m = full_mask(n);
            let vs: Vec<_> = seed.iter().map(|&x| ParityVector::new(x & m, n).unwrap()).collect();
            let b = row_reduce_in(n, &vs).unwrap();
            let v = ParityVector::new(v & m, n).unwrap();
            let w = ParityVector::new(w & m, n).unwrap();
            let same = coset_label(v, &b).unwrap() == coset_label(w, &b).unwrap();
            prop_assert_eq!(same, in_span(v ^ w, &b).unwrap());
        }

        #[test]
        fn label_is_coset_minimum(n in 1usize..=8, seed in arb_masks(8, 5), v in 0u32..256) {
            let m = full_mask(n);
            let masks: Vec<u32> = seed.iter().map(|x| x & m).collect();
            let b = Gf2Basis::from_masks(n, masks.iter().copied());
            let v = v & m;
            let min = span_oracle(&masks).into_iter().map(|s| s ^ v).min().unwrap();
            prop_assert_eq!(b.reduce_mask(v), min);
        }

        #[test]
        fn label_count_is_coset_count(n in 1usize..=10, seed in arb_masks(10, 6)) {
            let m = full_mask(n);
            let b = Gf2Basis::from_masks(n, seed.iter().map(|x| x & m));
            let labels: HashSet<u32> = (0..=m).map(|v| b.reduce_mask(v)).collect();
            prop_assert_eq!(labels.len(), 1usize << (n - b.rank()));
        }
    }
}
