//! Quadrature engines for kernel norms.
//!
//! All 1-D integrals reduce to unit-scale kernel shapes via
//! `g_m(x) = scale * shape(scale x)`, so resolution requirements never grow
//! with the dyadic level. Composite midpoint rules are used throughout
//! (removable singularities never land on nodes); truncation is covered by
//! analytic envelope tails reported as certified brackets. Discretization is
//! controlled by the points-per-unit rule and validated against oracles in
//! tests, not certified.

use std::collections::HashMap;
use std::sync::{Mutex, OnceLock};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernels::{band_lower, band_upper, block_kernel_1d, level_scale_log2, shape, SQRT_2_OVER_PI};
use crate::lattice::DyadicIndex;

/// Peak of both kernel shapes, attained at the origin.
pub const SHAPE_MAX: f64 = SQRT_2_OVER_PI;

/// Envelope constant: `|shape(u)| <= env / |u|`.
fn shape_envelope(zero_level: bool) -> f64 {
    if zero_level {
        SQRT_2_OVER_PI
    } else {
        2.0 * SQRT_2_OVER_PI
    }
}

/// A value together with an absolute error bound from certified tails.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct Certified {
    pub value: f64,
    pub abs_err: f64,
}

impl Certified {
    pub fn exact(value: f64) -> Self {
        Certified {
            value,
            abs_err: 0.0,
        }
    }

    pub fn rel_err(&self) -> f64 {
        if self.value == 0.0 {
            if self.abs_err == 0.0 {
                0.0
            } else {
                f64::INFINITY
            }
        } else {
            self.abs_err / self.value.abs()
        }
    }

    pub fn mul(&self, other: &Certified) -> Certified {
        Certified {
            value: self.value * other.value,
            abs_err: self.value.abs() * other.abs_err
                + other.value.abs() * self.abs_err
                + self.abs_err * other.abs_err,
        }
    }

    pub fn scale(&self, c: f64) -> Certified {
        Certified {
            value: self.value * c,
            abs_err: self.abs_err * c.abs(),
        }
    }
}

/// Tensor-grid quadrature settings: truncation radius, per-axis sampling
/// density and the target relative tolerance of reported norms.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuadratureGrid {
    /// Truncation radius `T` per axis.
    #[serde(rename = "T", default = "default_trunc")]
    pub trunc_radius: f64,
    /// Samples per unit length per axis; `None` selects `8 * 2^{s_max}`.
    #[serde(rename = "ppu", default)]
    pub points_per_unit: Option<u32>,
    /// Target relative tolerance of reported norms.
    #[serde(rename = "rtol", default = "default_rel_tol")]
    pub rel_tol: f64,
}

fn default_trunc() -> f64 {
    64.0
}

fn default_rel_tol() -> f64 {
    1e-4
}

impl Default for QuadratureGrid {
    fn default() -> Self {
        QuadratureGrid {
            trunc_radius: default_trunc(),
            points_per_unit: None,
            rel_tol: default_rel_tol(),
        }
    }
}

impl QuadratureGrid {
    /// Per-axis sampling density for functions with levels up to `level_max`.
    /// An explicit density below `4 * 2^{level_max}` cannot resolve the
    /// fastest oscillation present.
    pub fn effective_ppu(&self, level_max: u32) -> Result<f64> {
        let needed = 4.0 * f64::exp2(level_max as f64);
        match self.points_per_unit {
            Some(ppu) => {
                if (ppu as f64) < needed {
                    Err(Error::Resolution(format!(
                        "points_per_unit = {ppu} cannot resolve level {level_max} \
                         (need >= {needed})"
                    )))
                } else {
                    Ok(ppu as f64)
                }
            }
            None => Ok(2.0 * needed),
        }
    }
}

/// Composite midpoint rule with a deterministic chunked-parallel reduction.
pub fn midpoint<F: Fn(f64) -> f64 + Sync>(a: f64, b: f64, n: u64, f: F) -> f64 {
    if n == 0 || b <= a {
        return 0.0;
    }
    let h = (b - a) / n as f64;
    const CHUNK: u64 = 1 << 16;
    let chunks = n.div_ceil(CHUNK);
    let partials: Vec<f64> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let lo = c * CHUNK;
            let hi = ((c + 1) * CHUNK).min(n);
            let mut acc = 0.0;
            for i in lo..hi {
                acc += f(a + (i as f64 + 0.5) * h);
            }
            acc
        })
        .collect();
    partials.iter().sum::<f64>() * h
}

fn points(a: f64, b: f64, ppu: f64) -> u64 {
    (((b - a) * ppu).ceil() as u64).max(1)
}

// Sampling densities in unit-scale coordinates.
const FINE_PPU: f64 = 64.0;
const FAR_PPU: f64 = 8.0;
const FINE_RADIUS: f64 = 4096.0;
const RADIUS_CAP: f64 = 2_147_483_648.0; // 2^31

struct Caches {
    shape_power: Mutex<HashMap<(bool, u64, u64), Certified>>,
    quartic: Mutex<HashMap<QuarticKey, Certified>>,
    diff_sq: Mutex<HashMap<DiffKey, Certified>>,
}

fn caches() -> &'static Caches {
    static CACHES: OnceLock<Caches> = OnceLock::new();
    CACHES.get_or_init(|| Caches {
        shape_power: Mutex::new(HashMap::new()),
        quartic: Mutex::new(HashMap::new()),
        diff_sq: Mutex::new(HashMap::new()),
    })
}

/// `int |shape(u)|^p du` over the real line with a certified truncation tail.
pub fn shape_power_integral(zero_level: bool, p: f64, rel_tol: f64) -> Certified {
    let key = (zero_level, p.to_bits(), rel_tol.to_bits());
    if let Some(hit) = caches().shape_power.lock().unwrap().get(&key) {
        return *hit;
    }
    let env = shape_envelope(zero_level);
    let tail_at = |u: f64| 2.0 * env.powf(p) * u.powf(1.0 - p) / (p - 1.0);
    let integrand = |u: f64| shape(zero_level, u).abs().powf(p);
    let bulk_fine = 2.0 * midpoint(0.0, FINE_RADIUS, points(0.0, FINE_RADIUS, FINE_PPU), integrand);
    let mut value = bulk_fine;
    let mut radius = FINE_RADIUS;
    let target = rel_tol * bulk_fine;
    if tail_at(radius) > target {
        let needed = (2.0 * env.powf(p) / ((p - 1.0) * target)).powf(1.0 / (p - 1.0));
        let far = needed.clamp(FINE_RADIUS, RADIUS_CAP);
        value += 2.0 * midpoint(FINE_RADIUS, far, points(FINE_RADIUS, far, FAR_PPU), integrand);
        radius = far;
    }
    let out = Certified {
        value,
        abs_err: tail_at(radius),
    };
    caches().shape_power.lock().unwrap().insert(key, out);
    out
}

/// `L_p(R)` norm of the 1-D block kernel at level `m`, via the exact scaling
/// `||g_m||_p = scale^{1 - 1/p} ||shape||_p`.
pub fn kernel_norm_1d(m: u32, p: f64, rel_tol: f64) -> Result<Certified> {
    if !(p > 1.0 && p.is_finite()) {
        return Err(Error::Domain(format!(
            "L_p tails require p > 1 (integrand decays like |x|^{{-p}}), got p = {p}"
        )));
    }
    let power = shape_power_integral(m == 0, p, rel_tol);
    let norm = power.value.powf(1.0 / p);
    // d(I^{1/p}) = I^{1/p - 1} / p dI
    let abs_err = if power.value > 0.0 {
        norm / power.value / p * power.abs_err
    } else {
        0.0
    };
    let scale_pow = f64::exp2(level_scale_log2(m) as f64 * (1.0 - 1.0 / p));
    Ok(Certified {
        value: norm * scale_pow,
        abs_err: abs_err * scale_pow,
    })
}

/// `L_p(R^d)` norm of the block kernel at `s` (product of the 1-D factors).
///
/// The reported value is the quadrature bulk; the certificate is the
/// truncation bracket. An explicit `points_per_unit` too coarse for the level
/// is a resolution error.
pub fn block_kernel_lp_norm(s: &DyadicIndex, p: f64, grid: &QuadratureGrid) -> Result<Certified> {
    let level_max = s.coords().iter().copied().max().unwrap_or(0);
    grid.effective_ppu(level_max)?;
    let mut out = Certified::exact(1.0);
    for &m in s.coords() {
        out = out.mul(&kernel_norm_1d(m, p, grid.rel_tol)?);
    }
    Ok(out)
}

/// Closed-form `L_2` norm `sqrt(measure(Q*(s)))`; test oracle and fast path.
pub fn parseval_l2_norm(s: &DyadicIndex) -> f64 {
    s.coords()
        .iter()
        .map(|&m| 2.0 * (band_upper(m) - band_lower(m)))
        .product::<f64>()
        .sqrt()
}

#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
struct QuarticKey {
    /// Scale offsets (log2) of the three slower factors, clamped.
    offsets: [i8; 3],
    /// Zero-level flags for all four factors, fastest first.
    zero: [bool; 4],
}

const OFFSET_CLAMP: i64 = -26;
const QUARTIC_RADIUS: f64 = 8192.0;
const QUARTIC_PPU: f64 = 32.0;

/// `int prod_i g_{m_i}(x) dx` for four levels; exactly zero when the
/// frequency bands cannot cancel (the largest band floor exceeds the sum of
/// the other ceilings).
pub fn quartic_integral(levels: [u32; 4]) -> Certified {
    let mut ms = levels;
    ms.sort_unstable_by(|a, b| b.cmp(a));
    if ms[0] >= 1 {
        let others: f64 = ms[1..].iter().map(|&m| band_upper(m)).sum();
        if band_lower(ms[0]) > others {
            return Certified::exact(0.0);
        }
    }
    let base = level_scale_log2(ms[0]);
    let mut offsets = [0i8; 3];
    let mut clamped = 0u32;
    for (i, &m) in ms[1..].iter().enumerate() {
        let mut e = level_scale_log2(m) - base;
        if e < OFFSET_CLAMP {
            e = OFFSET_CLAMP;
            clamped += 1;
        }
        offsets[i] = e as i8;
    }
    let zero = [ms[0] == 0, ms[1] == 0, ms[2] == 0, ms[3] == 0];
    let key = QuarticKey { offsets, zero };
    let cached = caches().quartic.lock().unwrap().get(&key).copied();
    let scaled = match cached {
        Some(hit) => hit,
        None => {
            let computed = quartic_profile(key);
            caches().quartic.lock().unwrap().insert(key, computed);
            computed
        }
    };
    // prefactor: prod scale_i / scale_max, exact powers of two
    let exp_sum: i64 = ms.iter().map(|&m| level_scale_log2(m)).sum::<i64>() - base;
    let prefactor = f64::exp2(exp_sum as f64);
    let mut out = scaled.scale(prefactor);
    out.abs_err += clamped as f64 * 5e-6 * prefactor;
    out
}

fn quartic_profile(key: QuarticKey) -> Certified {
    let scales = [
        1.0,
        f64::exp2(key.offsets[0] as f64),
        f64::exp2(key.offsets[1] as f64),
        f64::exp2(key.offsets[2] as f64),
    ];
    let integrand = |u: f64| {
        shape(key.zero[0], u)
            * shape(key.zero[1], scales[1] * u)
            * shape(key.zero[2], scales[2] * u)
            * shape(key.zero[3], scales[3] * u)
    };
    let n = points(0.0, QUARTIC_RADIUS, QUARTIC_PPU);
    let value = 2.0 * midpoint(0.0, QUARTIC_RADIUS, n, integrand);
    // Tail: the two fastest factors decay like 1/u; the others stay bounded.
    let env2 = shape_envelope(key.zero[0]) * shape_envelope(key.zero[1]) / scales[1];
    let abs_err = 2.0 * SHAPE_MAX * SHAPE_MAX * env2 / QUARTIC_RADIUS;
    Certified { value, abs_err }
}

#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
struct DiffKey {
    m: u32,
    h: u64,
    l: u32,
    trunc: u64,
    ppu: u64,
}

/// Binomial weights `(-1)^{l-n} C(l, n)` of the order-`l` difference.
pub fn difference_weights(l: u32) -> Vec<f64> {
    let mut c = vec![0f64; l as usize + 1];
    c[0] = 1.0;
    for i in 1..=l as usize {
        for j in (1..=i).rev() {
            c[j] += c[j - 1];
        }
    }
    c.iter()
        .enumerate()
        .map(|(n, &cn)| if (l as usize - n) % 2 == 0 { cn } else { -cn })
        .collect()
}

/// `int (Delta_h^l g_m)^2 dx` over `[-T, T]` plus a certified envelope tail.
/// Cross terms between distinct levels vanish (the difference multiplier
/// preserves the disjoint frequency supports), so squared difference norms
/// only ever need these diagonal integrals.
pub fn difference_sq_integral(m: u32, h: f64, l: u32, grid: &QuadratureGrid) -> Result<Certified> {
    let trunc = grid.trunc_radius;
    let lh = l as f64 * h.abs();
    if trunc <= 2.0 * lh + 1.0 {
        return Err(Error::Domain(format!(
            "truncation radius {trunc} too small for step {h} at order {l}"
        )));
    }
    let key = DiffKey {
        m,
        h: h.to_bits(),
        l,
        trunc: trunc.to_bits(),
        ppu: grid.points_per_unit.map(u64::from).unwrap_or(0),
    };
    if let Some(hit) = caches().diff_sq.lock().unwrap().get(&key) {
        return Ok(*hit);
    }
    let ppu = grid.effective_ppu(m)?.max(32.0);
    let w = difference_weights(l);
    let integrand = |x: f64| {
        let d: f64 = w
            .iter()
            .enumerate()
            .map(|(n, &wn)| wn * block_kernel_1d(m, x + n as f64 * h))
            .sum();
        d * d
    };
    let n = points(-trunc, trunc, ppu);
    let value = midpoint(-trunc, trunc, n, integrand);
    let env = 2.0_f64.powi(l as i32) * shape_envelope(m == 0);
    let abs_err = 2.0 * env * env / (trunc - lh);
    let out = Certified { value, abs_err };
    caches().diff_sq.lock().unwrap().insert(key, out);
    Ok(out)
}

/// `int g_m^2 dx`; the `h`-free analogue used for axes that are not
/// differenced.
pub fn kernel_sq_integral(m: u32) -> Certified {
    let power = shape_power_integral(m == 0, 2.0, 1e-4);
    power.scale(f64::exp2(level_scale_log2(m) as f64))
}

/// Numerical check material: `int g_m g_{m'} dx` for `m != m'` over a finite
/// window (true value 0 by disjoint frequency supports). No certificate; used
/// by tests to evidence the orthogonality that the norm assembly relies on.
pub fn cross_pair_window(m1: u32, m2: u32, radius: f64, ppu: f64) -> f64 {
    let n = points(-radius, radius, ppu);
    midpoint(-radius, radius, n, |x| {
        block_kernel_1d(m1, x) * block_kernel_1d(m2, x)
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn midpoint_quadratic() {
        let got = midpoint(0.0, 1.0, 1000, |x| x * x);
        assert!((got - 1.0 / 3.0).abs() < 1e-6);
    }

    #[test]
    fn l2_norms_match_parseval() {
        // ||g_0||_2 = sqrt(2), ||g_3||_2 = 2^{1.5}
        let grid = QuadratureGrid::default();
        let n0 = block_kernel_lp_norm(&DyadicIndex::new(vec![0]), 2.0, &grid).unwrap();
        assert!(
            (n0.value - 2f64.sqrt()).abs() < 1e-3 * 2f64.sqrt(),
            "{} vs sqrt(2), cert {}",
            n0.value,
            n0.abs_err
        );
        let n3 = block_kernel_lp_norm(&DyadicIndex::new(vec![3]), 2.0, &grid).unwrap();
        let expected = f64::exp2(1.5);
        assert!((n3.value - expected).abs() < 1e-3 * expected);
    }

    #[test]
    fn l2_norm_2d_product() {
        let grid = QuadratureGrid::default();
        let s = DyadicIndex::new(vec![1, 2]);
        let got = block_kernel_lp_norm(&s, 2.0, &grid).unwrap();
        let expected = parseval_l2_norm(&s); // sqrt(2 * 4) = sqrt 8
        assert!((got.value - expected).abs() < 2e-3 * expected);
    }

    #[test]
    fn explicit_coarse_ppu_is_resolution_error() {
        let grid = QuadratureGrid {
            points_per_unit: Some(8),
            ..QuadratureGrid::default()
        };
        assert!(block_kernel_lp_norm(&DyadicIndex::new(vec![6]), 2.0, &grid).is_err());
    }

    #[test]
    fn tail_requires_p_above_one() {
        assert!(kernel_norm_1d(2, 1.0, 1e-4).is_err());
    }

    #[test]
    fn quartic_vanishes_for_isolated_top_band() {
        // bands: [2^5, 2^6] vs 3 * [0..2]: 32 > 2 + 2 + 2
        let j = quartic_integral([6, 1, 1, 1]);
        assert_eq!(j.value, 0.0);
        assert_eq!(j.abs_err, 0.0);
    }

    #[test]
    fn quartic_diagonal_positive() {
        let j = quartic_integral([2, 2, 2, 2]);
        assert!(j.value > 0.0);
        assert!(j.abs_err < 0.05 * j.value, "{j:?}");
    }

    #[test]
    fn quartic_matches_direct_quadrature_low_level() {
        for levels in [[1u32, 1, 0, 0], [2, 2, 1, 1], [3, 2, 2, 3], [0, 0, 0, 0]] {
            let j = quartic_integral(levels);
            let direct = midpoint(-4096.0, 4096.0, 4096 * 64, |x| {
                levels
                    .iter()
                    .map(|&m| block_kernel_1d(m, x))
                    .product::<f64>()
            });
            let tol = 1e-3 * j.value.abs().max(0.2);
            assert!(
                (j.value - direct).abs() < tol,
                "levels {levels:?}: {} vs {direct}",
                j.value
            );
        }
    }

    #[test]
    fn cross_pairs_are_numerically_orthogonal() {
        for (m1, m2) in [(0u32, 1u32), (1, 2), (2, 4), (0, 3)] {
            let val = cross_pair_window(m1, m2, 16384.0, 64.0);
            let diag =
                (kernel_sq_integral(m1).value * kernel_sq_integral(m2).value).sqrt();
            assert!(
                val.abs() < 2e-3 * diag,
                "({m1},{m2}): cross {val}, diag scale {diag}"
            );
        }
    }

    #[test]
    fn difference_sq_matches_spectral_closed_form() {
        // || Delta_h g_m ||_2^2 = 2 int_band 4 sin^2(lambda h / 2) dlambda
        let grid = QuadratureGrid {
            trunc_radius: 4096.0,
            points_per_unit: None,
            rel_tol: 1e-4,
        };
        for (m, h) in [(2u32, 0.3), (3, 0.11), (0, 0.7), (1, 1.0)] {
            let got = difference_sq_integral(m, h, 1, &grid).unwrap();
            let (a, b) = (band_lower(m), band_upper(m));
            let expected = 2.0
                * (2.0 * (b - a) - (2.0 / h) * ((b * h).sin() - (a * h).sin()));
            assert!(
                (got.value - expected).abs() < 2e-3 * expected.abs().max(1.0),
                "m={m}, h={h}: {} vs {expected}",
                got.value
            );
        }
    }

    #[test]
    fn difference_weights_sum_to_zero() {
        for l in 1..=4u32 {
            let w = difference_weights(l);
            assert!(w.iter().sum::<f64>().abs() < 1e-12);
            assert_eq!(w.len(), l as usize + 1);
        }
    }
}
