//! Exact Fourier analysis of ±1-valued functions on F₂ⁿ.
//!
//! Coefficients are kept as scaled integers `c_α = f̂(α)·2ⁿ`. For a Boolean
//! function every `c_α` is an integer, so Parseval (`Σ c_α² = 4ⁿ`) and the
//! Titsworth condition (`Σ_{α+β=γ} c_α c_β = 0` for `γ ≠ 0`) become exact
//! integer identities.
//!
//! Index convention: bit `i` of a truth-table index is the variable `x_{i+1}`.

use std::collections::{BTreeMap, HashMap};

use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gf2::{self, ParityVector};

/// Largest accepted magnitude for a scaled coefficient read from outside.
pub const MAX_SCALED_COEFFICIENT: i64 = 1 << 31;

/// Dense truth table of a function `F₂ⁿ → {−1, +1}`.
#[derive(Clone, PartialEq, Eq, Debug, Serialize)]
pub struct TruthTable {
    n: usize,
    values: Vec<i8>,
}

impl TruthTable {
    pub fn new(n: usize, values: Vec<i8>) -> Result<Self> {
        gf2::check_dim(n)?;
        if values.len() != 1usize << n {
            return Err(Error::InvalidTruthTable(format!(
                "expected {} entries for n = {n}, found {}",
                1usize << n,
                values.len()
            )));
        }
        if let Some(pos) = values.iter().position(|&v| v != 1 && v != -1) {
            return Err(Error::InvalidTruthTable(format!(
                "entry {pos} is {}, expected ±1",
                values[pos]
            )));
        }
        Ok(Self { n, values })
    }

    /// Tabulates `f` over all `2ⁿ` inputs.
    pub fn from_fn(n: usize, mut f: impl FnMut(u32) -> i8) -> Result<Self> {
        gf2::check_dim(n)?;
        let values = (0..1u32 << n).map(&mut f).collect();
        Self::new(n, values)
    }

    pub fn constant(n: usize, value: i8) -> Result<Self> {
        Self::from_fn(n, |_| value)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn values(&self) -> &[i8] {
        &self.values
    }

    /// `f(x)`; `x` must be below `2ⁿ`.
    pub fn value(&self, x: u32) -> i8 {
        self.values[x as usize]
    }

    pub fn evaluate(&self, x: ParityVector) -> Result<i8> {
        if x.dim() != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                found: x.dim(),
            });
        }
        Ok(self.value(x.bits()))
    }

    pub fn negated(&self) -> Self {
        Self {
            n: self.n,
            values: self.values.iter().map(|v| -v).collect(),
        }
    }

    /// `x ↦ f(x + y)`.
    pub fn shifted(&self, y: u32) -> Self {
        Self {
            n: self.n,
            values: (0..self.values.len() as u32)
                .map(|x| self.values[(x ^ y) as usize])
                .collect(),
        }
    }

    pub fn from_json(s: &str) -> Result<Self> {
        #[derive(Deserialize)]
        struct Raw {
            n: usize,
            values: Vec<i8>,
        }
        let raw: Raw = serde_json::from_str(s)?;
        Self::new(raw.n, raw.values)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("truth table serializes")
    }
}

/// Sorted set of characters in F₂ⁿ.
#[derive(Clone, PartialEq, Eq, Debug, Serialize)]
pub struct Support {
    n: usize,
    masks: Vec<u32>,
}

impl Support {
    /// Sorts and deduplicates; every mask must lie in F₂ⁿ.
    pub fn new(n: usize, masks: impl IntoIterator<Item = u32>) -> Result<Self> {
        gf2::check_dim(n)?;
        let mut masks: Vec<u32> = masks.into_iter().collect();
        for &m in &masks {
            gf2::check_mask(m as u64, n)?;
        }
        masks.sort_unstable();
        masks.dedup();
        Ok(Self { n, masks })
    }

    pub fn from_vectors(n: usize, vs: &[ParityVector]) -> Result<Self> {
        for v in vs {
            if v.dim() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    found: v.dim(),
                });
            }
        }
        Self::new(n, vs.iter().map(|v| v.bits()))
    }

    pub(crate) fn from_sorted_unchecked(n: usize, masks: Vec<u32>) -> Self {
        debug_assert!(masks.windows(2).all(|w| w[0] < w[1]));
        Self { n, masks }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.masks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.masks.is_empty()
    }

    pub fn masks(&self) -> &[u32] {
        &self.masks
    }

    pub fn contains(&self, mask: u32) -> bool {
        self.masks.binary_search(&mask).is_ok()
    }

    pub fn vectors(&self) -> impl Iterator<Item = ParityVector> + '_ {
        self.masks
            .iter()
            .map(move |&m| ParityVector::from_raw(m, self.n))
    }
}

/// Sparse exact spectrum: only nonzero scaled coefficients are stored.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct FourierSpectrum {
    n: usize,
    coeffs: BTreeMap<u32, i64>,
}

#[derive(Serialize, Deserialize)]
struct CoeffRecord {
    mask: u64,
    num: i64,
}

#[derive(Serialize, Deserialize)]
struct SpectrumFile {
    n: usize,
    coeffs: Vec<CoeffRecord>,
}

impl FourierSpectrum {
    /// Builds a spectrum from `(mask, c_α)` pairs. Zero coefficients are
    /// rejected, as are repeated masks.
    pub fn new(n: usize, entries: impl IntoIterator<Item = (u32, i64)>) -> Result<Self> {
        gf2::check_dim(n)?;
        let mut coeffs = BTreeMap::new();
        for (mask, num) in entries {
            gf2::check_mask(mask as u64, n)?;
            if num == 0 {
                return Err(Error::InvalidParameter(format!(
                    "coefficient of {mask:#x} is zero; only nonzero entries are stored"
                )));
            }
            if num.abs() > MAX_SCALED_COEFFICIENT {
                return Err(Error::InvalidParameter(format!(
                    "coefficient {num} of {mask:#x} exceeds 2^31 in magnitude"
                )));
            }
            if coeffs.insert(mask, num).is_some() {
                return Err(Error::InvalidParameter(format!("repeated mask {mask:#x}")));
            }
        }
        Ok(Self { n, coeffs })
    }

    pub(crate) fn from_map_unchecked(n: usize, coeffs: BTreeMap<u32, i64>) -> Self {
        debug_assert!(coeffs.values().all(|&c| c != 0));
        Self { n, coeffs }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn sparsity(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Scaled coefficient `c_α = f̂(α)·2ⁿ` (zero off the support).
    pub fn coefficient(&self, mask: u32) -> i64 {
        self.coeffs.get(&mask).copied().unwrap_or(0)
    }

    /// `(mask, c_α)` in increasing mask order.
    pub fn iter(&self) -> impl Iterator<Item = (u32, i64)> + '_ {
        self.coeffs.iter().map(|(&m, &c)| (m, c))
    }

    pub fn support(&self) -> Support {
        Support::from_sorted_unchecked(self.n, self.coeffs.keys().copied().collect())
    }

    /// `2ⁿ·f(x) = Σ_α c_α χ_α(x)`.
    pub fn evaluate_scaled(&self, x: u32) -> i128 {
        self.iter()
            .map(|(m, c)| c as i128 * gf2::character(m, x) as i128)
            .sum()
    }

    /// `f(x)`, failing if the value is not ±1.
    pub fn evaluate(&self, x: u32) -> Result<i8> {
        let v = self.evaluate_scaled(x);
        let scale = 1i128 << self.n;
        if v == scale {
            Ok(1)
        } else if v == -scale {
            Ok(-1)
        } else {
            Err(Error::NotBooleanValued { x, value: v })
        }
    }

    /// Copy with every coefficient negated.
    pub fn negated(&self) -> Self {
        Self {
            n: self.n,
            coeffs: self.coeffs.iter().map(|(&m, &c)| (m, -c)).collect(),
        }
    }

    /// Positive and negative parts `(𝒮₊, 𝒮₋)`.
    pub fn sign_split(&self) -> (Vec<u32>, Vec<u32>) {
        let mut pos = Vec::new();
        let mut neg = Vec::new();
        for (m, c) in self.iter() {
            if c > 0 {
                pos.push(m)
            } else {
                neg.push(m)
            }
        }
        (pos, neg)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let raw: SpectrumFile = serde_json::from_str(s).map_err(|e| {
            if e.to_string().contains("floating point") {
                Error::Parse(format!(
                    "coefficient numerators must be integers (f̂ is an integral multiple of 1/2^n): {e}"
                ))
            } else {
                Error::Json(e)
            }
        })?;
        gf2::check_dim(raw.n)?;
        let mut entries = Vec::with_capacity(raw.coeffs.len());
        for rec in raw.coeffs {
            entries.push((gf2::check_mask(rec.mask, raw.n)?, rec.num));
        }
        Self::new(raw.n, entries)
    }

    pub fn to_json(&self) -> String {
        let file = SpectrumFile {
            n: self.n,
            coeffs: self
                .iter()
                .map(|(m, c)| CoeffRecord {
                    mask: m as u64,
                    num: c,
                })
                .collect(),
        };
        serde_json::to_string(&file).expect("spectrum serializes")
    }
}

/// In-place unnormalised Walsh–Hadamard butterfly:
/// `a[α] ← Σ_x a[x]·(−1)^{⟨α, x⟩}`.
pub(crate) fn fwht_in_place<T>(a: &mut [T])
where
    T: Copy + std::ops::Add<Output = T> + std::ops::Sub<Output = T>,
{
    let len = a.len();
    debug_assert!(len.is_power_of_two());
    let mut h = 1;
    while h < len {
        for block in a.chunks_mut(2 * h) {
            let (lo, hi) = block.split_at_mut(h);
            for (u, v) in lo.iter_mut().zip(hi.iter_mut()) {
                let (x, y) = (*u, *v);
                *u = x + y;
                *v = x - y;
            }
        }
        h *= 2;
    }
}

/// Exact Walsh–Hadamard transform.
pub fn wht(t: &TruthTable) -> FourierSpectrum {
    let mut a: Vec<i64> = t.values.iter().map(|&v| v as i64).collect();
    fwht_in_place(&mut a);
    let coeffs = a
        .into_iter()
        .enumerate()
        .filter(|&(_, c)| c != 0)
        .map(|(m, c)| (m as u32, c))
        .collect();
    FourierSpectrum::from_map_unchecked(t.n, coeffs)
}

/// Inverse transform; fails with [`Error::NotBooleanValued`] at the first
/// point whose value is not ±1.
pub fn inverse_wht(s: &FourierSpectrum) -> Result<TruthTable> {
    let n = s.n;
    let mut a = vec![0i64; 1usize << n];
    for (m, c) in s.iter() {
        a[m as usize] = c;
    }
    fwht_in_place(&mut a);
    let scale = 1i64 << n;
    let mut values = Vec::with_capacity(a.len());
    for (x, v) in a.into_iter().enumerate() {
        // a[x] = 2ⁿ·f(x)
        if v == scale {
            values.push(1);
        } else if v == -scale {
            values.push(-1);
        } else {
            return Err(Error::NotBooleanValued {
                x: x as u32,
                value: v as i128,
            });
        }
    }
    Ok(TruthTable { n, values })
}

pub fn support(s: &FourierSpectrum) -> Support {
    s.support()
}

pub fn sparsity(s: &FourierSpectrum) -> usize {
    s.sparsity()
}

/// `Σ c_α² = 4ⁿ`, exactly.
pub fn verify_parseval(s: &FourierSpectrum) -> bool {
    let total: i128 = s.iter().map(|(_, c)| (c as i128) * (c as i128)).sum();
    total == 1i128 << (2 * s.n)
}

/// A direction `γ ≠ 0` with `Σ_{α+β=γ} c_α c_β ≠ 0` (ordered pairs, scaled).
#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize)]
pub struct TitsworthViolation {
    pub direction: u32,
    pub scaled_sum: i128,
}

/// Ordered-pair correlation sums, bucketed over the sumset `𝒮 + 𝒮`.
fn titsworth_sums_pairwise(s: &FourierSpectrum) -> BTreeMap<u32, i128> {
    let entries: Vec<(u32, i64)> = s.iter().collect();
    let mut sums: HashMap<u32, i128> = HashMap::new();
    for (i, &(a, ca)) in entries.iter().enumerate() {
        for &(b, cb) in &entries[i + 1..] {
            *sums.entry(a ^ b).or_insert(0) += 2 * ca as i128 * cb as i128;
        }
    }
    sums.into_iter().filter(|&(_, v)| v != 0).collect()
}

/// Same sums via `WHT(v²)/2ⁿ` where `v = 2ⁿ·f` is evaluated densely.
fn titsworth_sums_dense(s: &FourierSpectrum) -> BTreeMap<u32, i128> {
    let n = s.n;
    let mut v = vec![0i128; 1usize << n];
    for (m, c) in s.iter() {
        v[m as usize] = c as i128;
    }
    fwht_in_place(&mut v);
    for x in v.iter_mut() {
        *x *= *x;
    }
    fwht_in_place(&mut v);
    v.into_iter()
        .enumerate()
        .skip(1)
        .filter(|&(_, w)| w != 0)
        .map(|(g, w)| (g as u32, w >> n))
        .collect()
}

/// Directions violating the Titsworth condition; empty for every Boolean
/// spectrum.
pub fn verify_titsworth(s: &FourierSpectrum) -> Vec<TitsworthViolation> {
    let k = s.sparsity() as u128;
    let pairs = k * k.saturating_sub(1) / 2;
    let dense_cost = (1u128 << s.n) * (s.n as u128 + 1) * 2;
    let sums = if s.n <= 20 && pairs > dense_cost {
        titsworth_sums_dense(s)
    } else {
        titsworth_sums_pairwise(s)
    };
    sums.into_iter()
        .filter(|&(g, _)| g != 0)
        .map(|(direction, scaled_sum)| TitsworthViolation {
            direction,
            scaled_sum,
        })
        .collect()
}

/// All nonzero `|c_α|` are equal.
pub fn is_plateaued(s: &FourierSpectrum) -> bool {
    let mut mags = s.iter().map(|(_, c)| c.unsigned_abs());
    match mags.next() {
        None => true,
        Some(first) => mags.all(|m| m == first),
    }
}

/// Every coefficient is an integral multiple of `1/2ⁿ`. Spectra are stored as
/// integer numerators over `2ⁿ`, so this holds for every value of the type;
/// non-integral input is rejected when a spectrum file is parsed.
pub fn granularity_check(s: &FourierSpectrum) -> bool {
    s.iter().all(|(m, c)| c != 0 && m <= gf2::full_mask(s.n))
}

/// Granularity of a rational coefficient: `q·2ⁿ ∈ ℤ`.
pub fn is_granular(n: usize, q: Ratio<i64>) -> bool {
    let scaled = q * Ratio::from_integer(1i64 << n);
    scaled.is_integer()
}

/// `‖f̂‖₁ = Σ|c_α| / 2ⁿ` as an exact reduced fraction.
pub fn spectral_l1(s: &FourierSpectrum) -> Ratio<i128> {
    let total: i128 = s.iter().map(|(_, c)| c.unsigned_abs() as i128).sum();
    Ratio::new(total, 1i128 << s.n)
}

/// `‖f̂‖₁² ≤ k`, checked without division.
pub fn l1_squared_within_sparsity(s: &FourierSpectrum) -> bool {
    let total: i128 = s.iter().map(|(_, c)| c.unsigned_abs() as i128).sum();
    total * total <= s.sparsity() as i128 * (1i128 << (2 * s.n))
}

/// Output of [`normalize_signs`]: `table(x) = sign · f(x + shift)`.
#[derive(Clone, Debug)]
pub struct SignNormalization {
    pub table: TruthTable,
    pub shift: u32,
    pub negated: bool,
}

/// Produces `g = ±f(x + y)` with the same support and `ĝ(α), ĝ(β) > 0`.
///
/// When the two signs disagree the shift `y` is the smallest point with
/// `χ_{α+β}(y) = −1`, i.e. the lowest set bit of `α + β`.
pub fn normalize_signs(
    t: &TruthTable,
    alpha: ParityVector,
    beta: ParityVector,
) -> Result<SignNormalization> {
    for v in [alpha, beta] {
        if v.dim() != t.n {
            return Err(Error::DimensionMismatch {
                expected: t.n,
                found: v.dim(),
            });
        }
    }
    if alpha == beta {
        return Err(Error::IdenticalCharacters);
    }
    let s = wht(t);
    let ca = s.coefficient(alpha.bits());
    let cb = s.coefficient(beta.bits());
    if ca == 0 {
        return Err(Error::AlphaNotInSupport(alpha.bits()));
    }
    if cb == 0 {
        return Err(Error::BetaNotInSupport(beta.bits()));
    }
    let (shifted, shift, ca) = if (ca > 0) == (cb > 0) {
        (t.clone(), 0, ca)
    } else {
        let diff = alpha.bits() ^ beta.bits();
        let y = diff & diff.wrapping_neg();
        (t.shifted(y), y, ca * gf2::character(alpha.bits(), y) as i64)
    };
    let negated = ca < 0;
    let table = if negated {
        shifted.negated()
    } else {
        shifted
    };
    Ok(SignNormalization {
        table,
        shift,
        negated,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn pv(s: &str) -> ParityVector {
        ParityVector::parse_bits(s).unwrap()
    }

    /// AND₂: −1 iff x = 11.
    fn and2() -> TruthTable {
        TruthTable::new(2, vec![1, 1, 1, -1]).unwrap()
    }

    /// Direct `Σ_x f(x) χ_α(x)`; independent of the butterfly.
    fn wht_oracle(t: &TruthTable) -> Vec<i64> {
        let size = 1u32 << t.n();
        (0..size)
            .map(|a| {
                (0..size)
                    .map(|x| t.value(x) as i64 * gf2::character(a, x) as i64)
                    .sum()
            })
            .collect()
    }

    fn random_table(n: usize, seed: u64) -> TruthTable {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        TruthTable::from_fn(n, |_| if rng.random_bool(0.5) { 1 } else { -1 }).unwrap()
    }

    #[test]
    fn constant_function_spectrum() {
        for n in 0..6 {
            let s = wht(&TruthTable::constant(n, 1).unwrap());
            assert_eq!(s.iter().collect::<Vec<_>>(), vec![(0, 1 << n)]);
        }
    }

    #[test]
    fn single_character_spectrum() {
        let t = TruthTable::from_fn(3, |x| gf2::character(0b011, x)).unwrap();
        let s = wht(&t);
        assert_eq!(s.iter().collect::<Vec<_>>(), vec![(0b011, 8)]);
    }

    #[test]
    fn and2_spectrum() {
        let s = wht(&and2());
        assert_eq!(s.iter().collect::<Vec<_>>(), vec![(0, 2), (1, 2), (2, 2), (3, -2)]);
        assert_eq!(s.sparsity(), 4);
        assert_eq!(wht_oracle(&and2()), vec![2, 2, 2, -2]);
    }

    #[test]
    fn inverse_examples() {
        let c = FourierSpectrum::new(3, [(0, 8)]).unwrap();
        assert_eq!(inverse_wht(&c).unwrap(), TruthTable::constant(3, 1).unwrap());
        assert_eq!(inverse_wht(&wht(&and2())).unwrap(), and2());
        let half = FourierSpectrum::new(2, [(0, 2)]).unwrap();
        assert!(matches!(
            inverse_wht(&half),
            Err(Error::NotBooleanValued { .. })
        ));
    }

    #[test]
    fn parseval_examples() {
        assert!(verify_parseval(&wht(&and2())));
        assert!(!verify_parseval(&FourierSpectrum::new(2, [(0, 2)]).unwrap()));
    }

    #[test]
    fn titsworth_examples() {
        assert!(verify_titsworth(&wht(&and2())).is_empty());
        // f = ½ + ½χ₁₀ on n = 2
        let s = FourierSpectrum::new(2, [(0b00, 2), (0b01, 2)]).unwrap();
        let v = verify_titsworth(&s);
        assert_eq!(v.len(), 1);
        assert_eq!(v[0].direction, 0b01);
        assert_eq!(v[0].scaled_sum, 8);
        let chi = FourierSpectrum::new(3, [(0b101, 8)]).unwrap();
        assert!(verify_titsworth(&chi).is_empty());
    }

    #[test]
    fn plateaued_examples() {
        assert!(is_plateaued(&wht(&and2())));
        let ip4 = TruthTable::from_fn(4, |x| {
            gf2::character(1, x & (x >> 2)) * gf2::character(2, x & (x >> 2))
        })
        .unwrap();
        let s = wht(&ip4);
        assert_eq!(s.sparsity(), 16);
        assert!(s.iter().all(|(_, c)| c.abs() == 4));
        assert!(is_plateaued(&s));
    }

    #[test]
    fn granularity_examples() {
        assert!(granularity_check(&wht(&and2())));
        let three_quarters = FourierSpectrum::new(2, [(0, 3)]).unwrap();
        assert!(granularity_check(&three_quarters));
        assert!(!verify_parseval(&three_quarters));
        let bad = r#"{"n": 2, "coeffs": [{"mask": 0, "num": 1.5}]}"#;
        assert!(FourierSpectrum::from_json(bad).is_err());
        assert!(is_granular(2, Ratio::new(3, 4)));
        assert!(!is_granular(2, Ratio::new(1, 8)));
    }

    #[test]
    fn spectrum_loader_validates() {
        assert!(FourierSpectrum::from_json(r#"{"n":2,"coeffs":[{"mask":4,"num":2}]}"#).is_err());
        assert!(FourierSpectrum::from_json(r#"{"n":2,"coeffs":[{"mask":1,"num":0}]}"#).is_err());
        assert!(FourierSpectrum::from_json(
            r#"{"n":2,"coeffs":[{"mask":1,"num":2},{"mask":1,"num":2}]}"#
        )
        .is_err());
        let s = wht(&and2());
        assert_eq!(FourierSpectrum::from_json(&s.to_json()).unwrap(), s);
    }

    #[test]
    fn truth_table_loader_validates() {
        assert!(TruthTable::from_json(r#"{"n":2,"values":[1,1,1]}"#).is_err());
        assert!(TruthTable::from_json(r#"{"n":1,"values":[1,0]}"#).is_err());
        let t = TruthTable::from_json(r#"{"n":2,"values":[1,1,1,-1]}"#).unwrap();
        assert_eq!(t, and2());
        assert_eq!(t.to_json(), r#"{"n":2,"values":[1,1,1,-1]}"#);
    }

    #[test]
    fn l1_examples() {
        assert_eq!(spectral_l1(&wht(&TruthTable::constant(4, 1).unwrap())), Ratio::from(1));
        let l1 = spectral_l1(&wht(&and2()));
        assert_eq!(l1, Ratio::from(2));
        assert_eq!(l1 * l1, Ratio::from(4));
        let chi = wht(&TruthTable::from_fn(3, |x| gf2::character(6, x)).unwrap());
        assert_eq!(spectral_l1(&chi), Ratio::from(1));
    }

    #[test]
    fn normalize_signs_examples() {
        // already normalized
        let out = normalize_signs(&and2(), pv("10"), pv("01")).unwrap();
        assert_eq!(out.table, and2());
        assert_eq!((out.shift, out.negated), (0, false));

        // −AND₂ only needs a global negation
        let out = normalize_signs(&and2().negated(), pv("10"), pv("01")).unwrap();
        assert_eq!(out.table, and2());
        assert!(out.negated);
        assert_eq!(out.shift, 0);

        // shifted AND₂ with f̂(10) > 0 and f̂(01) < 0
        let shifted = and2().shifted(0b10);
        let s = wht(&shifted);
        assert!(s.coefficient(0b01) > 0 && s.coefficient(0b10) < 0);
        let out = normalize_signs(&shifted, pv("10"), pv("01")).unwrap();
        let g = wht(&out.table);
        assert!(g.coefficient(0b01) > 0 && g.coefficient(0b10) > 0);
        assert_eq!(g.support(), s.support());
        assert_eq!(out.shift, 0b01);
    }

    #[test]
    fn normalize_signs_errors() {
        let chi = TruthTable::from_fn(2, |x| gf2::character(1, x)).unwrap();
        assert!(matches!(
            normalize_signs(&chi, pv("01"), pv("10")),
            Err(Error::AlphaNotInSupport(_))
        ));
        assert!(matches!(
            normalize_signs(&chi, pv("10"), pv("01")),
            Err(Error::BetaNotInSupport(_))
        ));
        assert!(matches!(
            normalize_signs(&and2(), pv("10"), pv("10")),
            Err(Error::IdenticalCharacters)
        ));
    }

    #[test]
    fn evaluation_routes_agree() {
        let t = and2();
        let s = wht(&t);
        assert_eq!(t.value(0b11), -1);
        assert_eq!(s.evaluate(0b11).unwrap(), -1);
        assert_eq!(wht(&TruthTable::constant(3, 1).unwrap()).evaluate(5).unwrap(), 1);
        let chi = TruthTable::from_fn(2, |x| gf2::character(1, x)).unwrap();
        assert_eq!(chi.evaluate(pv("10")).unwrap(), -1);
    }

    #[test]
    fn titsworth_routes_agree_on_non_boolean_spectra() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..50 {
            let n = rng.random_range(1..=6);
            let k = rng.random_range(1..=(1usize << n));
            let entries: BTreeMap<u32, i64> = (0..k)
                .map(|_| (rng.random_range(0..1u32 << n), rng.random_range(-9..=9i64)))
                .filter(|&(_, c)| c != 0)
                .collect();
            let s = FourierSpectrum::new(n, entries).unwrap();
            let mut a = titsworth_sums_pairwise(&s);
            a.remove(&0);
            assert_eq!(a, titsworth_sums_dense(&s));
        }
    }

    proptest! {
        #[test]
        fn butterfly_matches_direct_sum(n in 0usize..=7, seed in any::<u64>()) {
            let t = random_table(n, seed);
            let s = wht(&t);
            let oracle = wht_oracle(&t);
            for (a, &c) in oracle.iter().enumerate() {
                prop_assert_eq!(s.coefficient(a as u32), c);
            }
        }

        #[test]
        fn boolean_identities_hold(n in 0usize..=10, seed in any::<u64>()) {
            let t = random_table(n, seed);
            let s = wht(&t);
            prop_assert_eq!(inverse_wht(&s).unwrap(), t.clone());
            prop_assert!(verify_parseval(&s));
            prop_assert!(verify_titsworth(&s).is_empty());
            prop_assert!(l1_squared_within_sparsity(&s));
            for x in 0..(1u32 << n).min(64) {
                prop_assert_eq!(s.evaluate(x).unwrap(), t.value(x));
            }
        }

        #[test]
        fn plateaued_boolean_sparsity_is_power_of_four(n in 1usize..=6, seed in any::<u64>()) {
            let s = wht(&random_table(n, seed));
            if is_plateaued(&s) && s.sparsity() > 1 {
                let k = s.sparsity();
                prop_assert!(k.is_power_of_two() && k.trailing_zeros().is_multiple_of(2));
                let c = s.iter().next().unwrap().1.unsigned_abs() as u128;
                prop_assert_eq!(c * c * k as u128, 1u128 << (2 * n));
            }
        }

        #[test]
        fn normalize_signs_preserves_magnitudes(n in 2usize..=7, seed in any::<u64>(), pick in any::<(u16, u16)>()) {
            let t = random_table(n, seed);
            let s = wht(&t);
            prop_assume!(s.sparsity() >= 2);
            let masks = s.support().masks().to_vec();
            let a = masks[pick.0 as usize % masks.len()];
            let b = masks[pick.1 as usize % masks.len()];
            prop_assume!(a != b);
            let out = normalize_signs(&t, ParityVector::new(a, n).unwrap(), ParityVector::new(b, n).unwrap()).unwrap();
            let g = wht(&out.table);
            prop_assert!(g.coefficient(a) > 0 && g.coefficient(b) > 0);
            for (m, c) in s.iter() {
                prop_assert_eq!(g.coefficient(m).abs(), c.abs());
            }
            prop_assert_eq!(g.sparsity(), s.sparsity());
            // g(x) = ±f(x + y)
            let sign = if out.negated { -1 } else { 1 };
            for x in 0..(1u32 << n) {
                prop_assert_eq!(out.table.value(x), sign * t.value(x ^ out.shift));
            }
        }
    }
}
