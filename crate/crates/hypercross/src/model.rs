//! Block functions: finite linear combinations of dyadic block kernels.
//!
//! The Fourier support of every member is known exactly (the union of the
//! blocks `Q*(s)` carrying nonzero coefficients), so frequency projections
//! `delta_s` are exact coefficient extractions rather than numerical
//! transforms.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernels::block_kernel;
use crate::lattice::DyadicIndex;
use crate::quad::difference_weights;

/// A function `f(x) = sum_s c_s * block_kernel(s, x)` with finitely many
/// nonzero coefficients. Immutable after construction.
#[derive(Clone, Debug, PartialEq)]
pub struct BlockFunction {
    d: usize,
    coeffs: BTreeMap<DyadicIndex, f64>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct BlockEntry {
    s: Vec<u32>,
    c: f64,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct BlockFunctionRaw {
    d: usize,
    blocks: Vec<BlockEntry>,
}

impl Serialize for BlockFunction {
    fn serialize<S: serde::Serializer>(&self, ser: S) -> std::result::Result<S::Ok, S::Error> {
        BlockFunctionRaw {
            d: self.d,
            blocks: self
                .coeffs
                .iter()
                .map(|(s, &c)| BlockEntry {
                    s: s.coords().to_vec(),
                    c,
                })
                .collect(),
        }
        .serialize(ser)
    }
}

impl<'de> Deserialize<'de> for BlockFunction {
    fn deserialize<D: serde::Deserializer<'de>>(de: D) -> std::result::Result<Self, D::Error> {
        let raw = BlockFunctionRaw::deserialize(de)?;
        BlockFunction::new(
            raw.d,
            raw.blocks.into_iter().map(|e| (DyadicIndex::new(e.s), e.c)),
        )
        .map_err(serde::de::Error::custom)
    }
}

impl BlockFunction {
    /// Build from `(index, coefficient)` pairs. Zero coefficients are
    /// dropped; duplicate indices are rejected.
    pub fn new(d: usize, pairs: impl IntoIterator<Item = (DyadicIndex, f64)>) -> Result<Self> {
        if d == 0 {
            return Err(Error::Domain("block function needs d >= 1".into()));
        }
        let mut coeffs = BTreeMap::new();
        for (s, c) in pairs {
            if s.dim() != d {
                return Err(Error::Domain(format!(
                    "block index {:?} has dimension {} != {d}",
                    s.coords(),
                    s.dim()
                )));
            }
            if !c.is_finite() {
                return Err(Error::Domain(format!("non-finite coefficient at {:?}", s.coords())));
            }
            if c == 0.0 {
                continue;
            }
            if coeffs.insert(s.clone(), c).is_some() {
                return Err(Error::Domain(format!("duplicate block index {:?}", s.coords())));
            }
        }
        Ok(BlockFunction { d, coeffs })
    }

    pub fn zero(d: usize) -> Self {
        BlockFunction {
            d,
            coeffs: BTreeMap::new(),
        }
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn coeffs(&self) -> &BTreeMap<DyadicIndex, f64> {
        &self.coeffs
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn coefficient(&self, s: &DyadicIndex) -> f64 {
        self.coeffs.get(s).copied().unwrap_or(0.0)
    }

    /// Largest dyadic level over all axes and blocks.
    pub fn level_max(&self) -> u32 {
        self.coeffs
            .keys()
            .flat_map(|s| s.coords().iter().copied())
            .max()
            .unwrap_or(0)
    }

    pub fn evaluate(&self, x: &[f64]) -> f64 {
        debug_assert_eq!(x.len(), self.d);
        self.coeffs
            .iter()
            .map(|(s, &c)| c * block_kernel(s, x))
            .sum()
    }

    /// Frequency projection onto `Q*(s)`: the single-block function with the
    /// coefficient at `s` (exact, because block supports are disjoint and
    /// aligned with the projection region).
    pub fn delta_s(&self, s: &DyadicIndex) -> BlockFunction {
        let mut coeffs = BTreeMap::new();
        if let Some(&c) = self.coeffs.get(s) {
            coeffs.insert(s.clone(), c);
        }
        BlockFunction { d: self.d, coeffs }
    }

    /// Keep exactly the blocks whose index satisfies the predicate.
    pub fn restrict(&self, mut keep: impl FnMut(&DyadicIndex) -> bool) -> BlockFunction {
        BlockFunction {
            d: self.d,
            coeffs: self
                .coeffs
                .iter()
                .filter(|(s, _)| keep(s))
                .map(|(s, &c)| (s.clone(), c))
                .collect(),
        }
    }

    pub fn scaled(&self, factor: f64) -> BlockFunction {
        BlockFunction {
            d: self.d,
            coeffs: self
                .coeffs
                .iter()
                .map(|(s, &c)| (s.clone(), c * factor))
                .collect(),
        }
    }

    pub fn add(&self, other: &BlockFunction) -> Result<BlockFunction> {
        if self.d != other.d {
            return Err(Error::Domain("dimension mismatch".into()));
        }
        let mut coeffs = self.coeffs.clone();
        for (s, &c) in &other.coeffs {
            let slot = coeffs.entry(s.clone()).or_insert(0.0);
            *slot += c;
            if *slot == 0.0 {
                coeffs.remove(s);
            }
        }
        Ok(BlockFunction { d: self.d, coeffs })
    }
}

/// Iterated mixed difference `Delta^l_h` over a subset of axes, as a
/// pointwise evaluator. Costs `(l+1)^{|e|}` kernel evaluations per point.
pub struct MixedDifference<'a> {
    f: &'a BlockFunction,
    /// `(weight, shift)` pairs of the expanded difference stencil.
    stencil: Vec<(f64, Vec<f64>)>,
}

impl<'a> MixedDifference<'a> {
    /// `axes` must be a nonempty, strictly increasing subset of `0..d`;
    /// `steps` holds one step per listed axis.
    pub fn new(f: &'a BlockFunction, l: u32, axes: &[usize], steps: &[f64]) -> Result<Self> {
        if axes.is_empty() {
            return Err(Error::Domain("difference needs a nonempty axis subset".into()));
        }
        if axes.len() != steps.len() {
            return Err(Error::Domain("one step per differenced axis".into()));
        }
        if axes.windows(2).any(|w| w[0] >= w[1]) || axes.iter().any(|&a| a >= f.d()) {
            return Err(Error::Domain(format!(
                "axes {axes:?} must be strictly increasing and within 0..{}",
                f.d()
            )));
        }
        if l == 0 {
            return Err(Error::Domain("difference order l must be >= 1".into()));
        }
        let w1 = difference_weights(l);
        let mut stencil: Vec<(f64, Vec<f64>)> = vec![(1.0, vec![0.0; f.d()])];
        for (&axis, &h) in axes.iter().zip(steps) {
            let mut next = Vec::with_capacity(stencil.len() * w1.len());
            for (weight, shift) in &stencil {
                for (n, &wn) in w1.iter().enumerate() {
                    let mut s = shift.clone();
                    s[axis] += n as f64 * h;
                    next.push((weight * wn, s));
                }
            }
            stencil = next;
        }
        Ok(MixedDifference { f, stencil })
    }

    pub fn evaluate(&self, x: &[f64]) -> f64 {
        let mut shifted = vec![0.0; x.len()];
        self.stencil
            .iter()
            .map(|(w, shift)| {
                for (t, (&xi, &si)) in shifted.iter_mut().zip(x.iter().zip(shift)) {
                    *t = xi + si;
                }
                w * self.f.evaluate(&shifted)
            })
            .sum()
    }

    pub fn stencil_len(&self) -> usize {
        self.stencil.len()
    }
}
