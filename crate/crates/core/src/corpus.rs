//! Function families used as a test and experiment corpus.
//!
//! Variable layout for the addressing function on `k` characters: the
//! `½·log k` address bits sit at the low index positions, followed by the
//! `√k` target bits. Address value `x` (read little-endian) selects target
//! `y_{x+1}`, stored at position `½·log k + x`. The modified addressing function
//! puts its two selector variables `z₁`, `z₂` at positions 0 and 1 and shifts
//! the addressing input up by two.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gf2::{self, ParityVector};
use crate::spectral::TruthTable;

/// Largest dimension for which truth tables are generated.
pub const MAX_TABLE_DIM: usize = 20;

fn check_table_dim(n: usize) -> Result<()> {
    if n > MAX_TABLE_DIM {
        return Err(Error::InvalidParameter(format!(
            "n = {n} exceeds the truth-table limit of {MAX_TABLE_DIM}"
        )));
    }
    Ok(())
}

/// Address width `½·log k` and target count `√k` for a valid addressing sparsity.
pub fn addressing_shape(k: usize) -> Result<(usize, usize)> {
    if k < 4 || !k.is_power_of_two() || !k.trailing_zeros().is_multiple_of(2) {
        return Err(Error::InvalidParameter(format!(
            "addressing sparsity k = {k} must be an even power of two, at least 4"
        )));
    }
    let m = k.trailing_zeros() as usize / 2;
    Ok((m, 1 << m))
}

fn addressing_value(x: u32, m: usize) -> i8 {
    let addr = x & ((1u32 << m) - 1);
    if x >> (m as u32 + addr) & 1 == 1 {
        -1
    } else {
        1
    }
}

/// The addressing function with Fourier sparsity `k`.
pub fn gen_addressing(k: usize) -> Result<TruthTable> {
    let (m, targets) = addressing_shape(k)?;
    let n = m + targets;
    check_table_dim(n)?;
    TruthTable::from_fn(n, |x| addressing_value(x, m))
}

/// Selects `(−1)^{z₁}` where addressing is `+1` and `(−1)^{z₂}` elsewhere.
pub fn gen_modified_addressing(k: usize) -> Result<TruthTable> {
    let (m, targets) = addressing_shape(k)?;
    let n = m + targets + 2;
    check_table_dim(n)?;
    TruthTable::from_fn(n, |x| {
        let selector = if addressing_value(x >> 2, m) == 1 { x & 1 } else { x >> 1 & 1 };
        if selector == 1 {
            -1
        } else {
            1
        }
    })
}

/// `(−1)^{Σ x_i y_i}` on `2m` variables, with `y_i` at position `m + i − 1`.
pub fn gen_inner_product(m: usize) -> Result<TruthTable> {
    if m == 0 {
        return Err(Error::InvalidParameter("inner product needs m ≥ 1".into()));
    }
    let n = 2 * m;
    check_table_dim(n)?;
    let low = (1u32 << m) - 1;
    TruthTable::from_fn(n, |x| gf2::character(x & low, x >> m))
}

/// The character `χ_mask`.
pub fn gen_parity(mask: ParityVector) -> Result<TruthTable> {
    check_table_dim(mask.dim())?;
    TruthTable::from_fn(mask.dim(), |x| gf2::character(mask.bits(), x))
}

/// `−1` exactly when every variable in `mask` is set.
pub fn gen_conjunction(mask: ParityVector) -> Result<TruthTable> {
    check_table_dim(mask.dim())?;
    let m = mask.bits();
    TruthTable::from_fn(mask.dim(), |x| if x & m == m { -1 } else { 1 })
}

/// `x ↦ inner(⟨m₁, x⟩, …, ⟨m_r, x⟩)` for linearly independent `m_i` in F₂ⁿ.
pub fn gen_junta(inner: &TruthTable, masks: &[ParityVector], n: usize) -> Result<TruthTable> {
    check_table_dim(n)?;
    if masks.len() != inner.n() {
        return Err(Error::InvalidParameter(format!(
            "junta needs {} embedding masks, got {}",
            inner.n(),
            masks.len()
        )));
    }
    let basis = gf2::row_reduce_in(n, masks)?;
    if basis.rank() != masks.len() {
        return Err(Error::InvalidParameter(
            "junta embedding masks must be linearly independent".into(),
        ));
    }
    let bits: Vec<u32> = masks.iter().map(|m| m.bits()).collect();
    TruthTable::from_fn(n, |x| {
        let y = bits
            .iter()
            .enumerate()
            .fold(0u32, |y, (i, &m)| y | (gf2::dot(m, x) as u32) << i);
        inner.value(y)
    })
}

/// Uniformly random `±1` table.
pub fn gen_random(n: usize, seed: u64) -> Result<TruthTable> {
    check_table_dim(n)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    TruthTable::from_fn(n, |_| if rng.random_bool(0.5) { -1 } else { 1 })
}

/// A corpus entry: a family and its parameters.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case", deny_unknown_fields)]
pub enum FunctionSpec {
    Addressing { k: usize },
    ModifiedAddressing { k: usize },
    InnerProduct { m: usize },
    Parity { n: usize, mask: u32 },
    Conjunction { n: usize, mask: u32 },
    Junta { inner: Box<FunctionSpec>, masks: Vec<u32>, n: usize },
    Random { n: usize, seed: u64 },
}

impl FunctionSpec {
    /// Number of variables of the generated table, computed without generating it.
    pub fn n(&self) -> Result<usize> {
        Ok(match self {
            Self::Addressing { k } => {
                let (m, t) = addressing_shape(*k)?;
                m + t
            }
            Self::ModifiedAddressing { k } => {
                let (m, t) = addressing_shape(*k)?;
                m + t + 2
            }
            Self::InnerProduct { m } => 2 * m,
            Self::Parity { n, .. }
            | Self::Conjunction { n, .. }
            | Self::Junta { n, .. }
            | Self::Random { n, .. } => *n,
        })
    }

    pub fn generate(&self) -> Result<TruthTable> {
        match self {
            Self::Addressing { k } => gen_addressing(*k),
            Self::ModifiedAddressing { k } => gen_modified_addressing(*k),
            Self::InnerProduct { m } => gen_inner_product(*m),
            Self::Parity { n, mask } => gen_parity(ParityVector::new(*mask, *n)?),
            Self::Conjunction { n, mask } => gen_conjunction(ParityVector::new(*mask, *n)?),
            Self::Junta { inner, masks, n } => {
                let inner = inner.generate()?;
                let masks = masks
                    .iter()
                    .map(|&m| ParityVector::new(m, *n))
                    .collect::<Result<Vec<_>>>()?;
                gen_junta(&inner, &masks, *n)
            }
            Self::Random { n, seed } => gen_random(*n, *seed),
        }
    }

    /// Short human-readable name, e.g. `addressing(k=16)`.
    pub fn label(&self) -> String {
        self.to_string()
    }
}

impl fmt::Display for FunctionSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Addressing { k } => write!(f, "addressing:k={k}"),
            Self::ModifiedAddressing { k } => write!(f, "modified-addressing:k={k}"),
            Self::InnerProduct { m } => write!(f, "inner-product:m={m}"),
            Self::Parity { n, mask } => write!(f, "parity:n={n},mask={mask}"),
            Self::Conjunction { n, mask } => write!(f, "conjunction:n={n},mask={mask}"),
            Self::Junta { inner, masks, n } => {
                let ms: Vec<String> = masks.iter().map(u32::to_string).collect();
                write!(f, "junta:n={n},masks={}[{inner}]", ms.join("/"))
            }
            Self::Random { n, seed } => write!(f, "random:n={n},seed={seed}"),
        }
    }
}

impl FromStr for FunctionSpec {
    type Err = Error;

    /// Parses `family:key=value,...`. Masks may be given as `mask=<int>` or as
    /// an x₁…xₙ bit string `bits=<01...>`, which also fixes `n`.
    fn from_str(s: &str) -> Result<Self> {
        let (family, rest) = s.split_once(':').unwrap_or((s, ""));
        let mut params = std::collections::BTreeMap::new();
        for kv in rest.split(',').filter(|p| !p.is_empty()) {
            let (key, value) = kv
                .split_once('=')
                .ok_or_else(|| Error::Parse(format!("expected key=value, got `{kv}`")))?;
            params.insert(key.trim(), value.trim());
        }
        let num = |key: &str| -> Result<u64> {
            let v = params
                .get(key)
                .ok_or_else(|| Error::Parse(format!("`{family}` needs parameter `{key}`")))?;
            v.parse()
                .map_err(|_| Error::Parse(format!("parameter `{key}` is not an integer: `{v}`")))
        };
        let masked = || -> Result<(usize, u32)> {
            if let Some(bits) = params.get("bits") {
                let v = ParityVector::parse_bits(bits)?;
                return Ok((v.dim(), v.bits()));
            }
            let n = num("n")? as usize;
            let mask = gf2::check_mask(num("mask")?, n)?;
            Ok((n, mask))
        };
        let spec = match family.trim() {
            "addressing" => Self::Addressing { k: num("k")? as usize },
            "modified-addressing" => Self::ModifiedAddressing { k: num("k")? as usize },
            "inner-product" => Self::InnerProduct { m: num("m")? as usize },
            "parity" => {
                let (n, mask) = masked()?;
                Self::Parity { n, mask }
            }
            "conjunction" => {
                let (n, mask) = masked()?;
                Self::Conjunction { n, mask }
            }
            "random" => Self::Random {
                n: num("n")? as usize,
                seed: num("seed")?,
            },
            other => {
                return Err(Error::Parse(format!(
                    "unknown family `{other}` (expected addressing, modified-addressing, \
                     inner-product, parity, conjunction or random)"
                )))
            }
        };
        Ok(spec)
    }
}
