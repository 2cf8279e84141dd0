//! Restriction of spectra to affine subspaces and bucket complexity.
//!
//! A system `{⟨γ_i, x⟩ = b_i}` is kept in fully reduced echelon form. Each
//! support element `α` splits as `α = λ + s` with `λ` its canonical coset
//! label and `s` in the span of the constraint directions. On the subspace
//! `H_b`, `χ_s` is the constant `(−1)^{Σ b_i}` over the rows used to build `s`,
//! so the restriction of `f` is `Σ_λ (Σ_{α ↦ λ} ±c_α) χ_λ`, still written in
//! the ambient `n`-dimensional index space.
//!
//! The restricted function depends only on non-pivot coordinates, so it is a
//! genuine Boolean function on F₂ⁿ whenever `f` is Boolean.

use std::collections::{BTreeMap, HashSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gf2::{self, Gf2Basis, ParityVector};
use crate::spectral::{FourierSpectrum, Support};

#[inline]
fn leading_bit(v: u32) -> u32 {
    31 - v.leading_zeros()
}

/// Consistent system of affine constraints `⟨γ_i, x⟩ = b_i` on F₂ⁿ.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AffineConstraintSystem {
    n: usize,
    constraints: Vec<(ParityVector, bool)>,
    /// Reduced rows `(mask, rhs)`, sorted by increasing leading bit.
    rows: Vec<(u32, bool)>,
}

#[derive(Serialize, Deserialize)]
struct ConstraintRecord {
    mask: u64,
    bit: u8,
}

impl AffineConstraintSystem {
    pub fn empty(n: usize) -> Result<Self> {
        gf2::check_dim(n)?;
        Ok(Self {
            n,
            constraints: Vec::new(),
            rows: Vec::new(),
        })
    }

    pub fn new(n: usize, constraints: &[(ParityVector, bool)]) -> Result<Self> {
        let mut sys = Self::empty(n)?;
        for &(g, b) in constraints {
            sys.push(g, b)?;
        }
        Ok(sys)
    }

    /// Parses a JSON list of `{mask, bit}` records.
    pub fn from_json(n: usize, s: &str) -> Result<Self> {
        let recs: Vec<ConstraintRecord> = serde_json::from_str(s)?;
        let mut out = Vec::with_capacity(recs.len());
        for r in recs {
            let mask = gf2::check_mask(r.mask, n)?;
            if r.bit > 1 {
                return Err(Error::Parse(format!("constraint bit must be 0 or 1, got {}", r.bit)));
            }
            out.push((ParityVector::new(mask, n)?, r.bit == 1));
        }
        Self::new(n, &out)
    }

    pub fn to_json(&self) -> String {
        let recs: Vec<ConstraintRecord> = self
            .constraints
            .iter()
            .map(|&(g, b)| ConstraintRecord {
                mask: g.bits() as u64,
                bit: b as u8,
            })
            .collect();
        serde_json::to_string(&recs).expect("constraints serialize")
    }

    /// Adds `⟨γ, x⟩ = b`. Returns the reduced row it contributed, or `None`
    /// if it was implied by the existing constraints.
    pub fn push(&mut self, gamma: ParityVector, bit: bool) -> Result<Option<(u32, bool)>> {
        if gamma.dim() != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                found: gamma.dim(),
            });
        }
        let (v, b) = self.reduce_row(gamma.bits(), bit);
        if v == 0 {
            if b {
                return Err(Error::InconsistentConstraints);
            }
            self.constraints.push((gamma, bit));
            return Ok(None);
        }
        let lead = leading_bit(v);
        for (r, rb) in &mut self.rows {
            if *r >> lead & 1 == 1 {
                *r ^= v;
                *rb ^= b;
            }
        }
        let pos = self.rows.partition_point(|&(r, _)| leading_bit(r) < lead);
        self.rows.insert(pos, (v, b));
        self.constraints.push((gamma, bit));
        Ok(Some((v, b)))
    }

    fn reduce_row(&self, mut v: u32, mut b: bool) -> (u32, bool) {
        for &(r, rb) in self.rows.iter().rev() {
            if v >> leading_bit(r) & 1 == 1 {
                v ^= r;
                b ^= rb;
            }
        }
        (v, b)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn constraints(&self) -> &[(ParityVector, bool)] {
        &self.constraints
    }

    pub fn codimension(&self) -> usize {
        self.rows.len()
    }

    /// Basis of the direction space `span{γ_i}`.
    pub fn basis(&self) -> Gf2Basis {
        Gf2Basis::from_masks(self.n, self.rows.iter().map(|&(r, _)| r))
    }

    /// Canonical label of `α` and the sign parity of `χ_{α+λ}` on `H_b`.
    pub(crate) fn label_with_parity(&self, alpha: u32) -> (u32, bool) {
        self.reduce_row(alpha, false)
    }

    pub fn contains_point(&self, x: u32) -> bool {
        self.rows.iter().all(|&(r, b)| gf2::dot(r, x) == b)
    }

    /// All points of `H_b` in increasing order.
    pub fn points(&self) -> impl Iterator<Item = u32> + '_ {
        (0..=gf2::full_mask(self.n)).filter(move |&x| self.contains_point(x))
    }

    /// Some point of `H_b`: pivot coordinates solved, the rest zero.
    pub fn base_point(&self) -> u32 {
        // rows are fully reduced, so each pivot bit is set in exactly one row
        self.rows
            .iter()
            .filter(|&&(_, b)| b)
            .fold(0, |x, &(r, _)| x | 1 << leading_bit(r))
    }
}

/// Spectrum of `f|_{H_b}` in the ambient space, with canonical coset labels as
/// characters. Coefficients that cancel inside a bucket are dropped.
pub fn restrict(s: &FourierSpectrum, sys: &AffineConstraintSystem) -> Result<FourierSpectrum> {
    if s.n() != sys.n() {
        return Err(Error::DimensionMismatch {
            expected: s.n(),
            found: sys.n(),
        });
    }
    let mut acc: BTreeMap<u32, i64> = BTreeMap::new();
    for (alpha, c) in s.iter() {
        let (label, parity) = sys.label_with_parity(alpha);
        *acc.entry(label).or_insert(0) += if parity { -c } else { c };
    }
    acc.retain(|_, c| *c != 0);
    Ok(FourierSpectrum::from_map_unchecked(s.n(), acc))
}

/// Restriction by one reduced row `(r, b)` whose leading bit is clear in every
/// character of `s`'s other pivot positions.
pub(crate) fn restrict_by_row(s: &FourierSpectrum, row: u32, bit: bool) -> FourierSpectrum {
    let lead = leading_bit(row);
    let mut acc: BTreeMap<u32, i64> = BTreeMap::new();
    for (alpha, c) in s.iter() {
        let (label, c) = if alpha >> lead & 1 == 1 {
            (alpha ^ row, if bit { -c } else { c })
        } else {
            (alpha, c)
        };
        *acc.entry(label).or_insert(0) += c;
    }
    acc.retain(|_, c| *c != 0);
    FourierSpectrum::from_map_unchecked(s.n(), acc)
}

/// Partition of a support into cosets of `span Γ`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct BucketReport {
    pub bucket_count: usize,
    /// Coset label → support elements in that coset.
    pub buckets: BTreeMap<u32, Vec<u32>>,
    /// Number of support elements sharing their bucket with another element.
    pub identified_count: usize,
}

fn basis_for(n: usize, gamma: &[ParityVector]) -> Result<Gf2Basis> {
    gf2::row_reduce_in(n, gamma)
}

/// Number of distinct coset labels over the support. Hot path for sampling.
pub(crate) fn bucket_count_masks(support: &[u32], basis: &Gf2Basis) -> usize {
    if basis.is_empty() {
        return support.len();
    }
    let labels: HashSet<u32> = support.iter().map(|&a| basis.reduce_mask(a)).collect();
    labels.len()
}

/// `𝔅(f, span Γ)` together with the buckets themselves.
pub fn bucket_complexity(support: &Support, gamma: &[ParityVector]) -> Result<BucketReport> {
    let basis = basis_for(support.n(), gamma)?;
    let mut buckets: BTreeMap<u32, Vec<u32>> = BTreeMap::new();
    for &a in support.masks() {
        buckets.entry(basis.reduce_mask(a)).or_default().push(a);
    }
    let identified_count = buckets.values().filter(|b| b.len() >= 2).map(Vec::len).sum();
    Ok(BucketReport {
        bucket_count: buckets.len(),
        buckets,
        identified_count,
    })
}

/// `β + δ ∈ span Γ`.
pub fn identified(beta: ParityVector, delta: ParityVector, gamma: &[ParityVector]) -> Result<bool> {
    let sum = beta.try_add(delta)?;
    let basis = basis_for(sum.dim(), gamma)?;
    basis.contains(sum)
}

/// Observed bucket count against the identification bound `k − h/2`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct IdentificationBound {
    pub k: usize,
    pub h: usize,
    /// `k − ⌈h/2⌉`.
    pub bound: usize,
    pub actual: usize,
    /// `actual ≤ k − h/2`.
    pub holds: bool,
}

pub fn identification_bound_check(
    support: &Support,
    gamma: &[ParityVector],
) -> Result<IdentificationBound> {
    let report = bucket_complexity(support, gamma)?;
    let k = support.len();
    let h = report.identified_count;
    let actual = report.bucket_count;
    Ok(IdentificationBound {
        k,
        h,
        bound: k - h.div_ceil(2),
        actual,
        holds: 2 * actual <= 2 * k - h,
    })
}
