//! Band-limited kernel basis: the 1-D kernels `D_k`, the dyadic block
//! kernels with their sine-difference closed form, and the frequency blocks
//! `Q*(s)` they occupy.
//!
//! The frequency convention: the transform of `D_k` is the indicator of
//! `k < |lambda| < k+1` (value 1/2 on the boundary), forced by the identity
//! `2 sin(x/2) cos((2k+1)x/2) = sin((k+1)x) - sin(kx)`. The union over
//! `rho_plus(s)` then covers `Q*(s)` exactly.

use crate::lattice::DyadicIndex;

/// `sqrt(2/pi)`.
pub const SQRT_2_OVER_PI: f64 = 0.7978845608028653558798921198687637;

/// `eta(0) = 0`, `eta(t) = 1` for `t > 0`.
pub fn eta(t: u32) -> u32 {
    (t > 0) as u32
}

/// 1-D kernel `D_k(x) = sqrt(2/pi) * 2 sin(x/2) cos((2k+1)x/2) / x`, with the
/// removable singularity at `x = 0` filled by its limit `sqrt(2/pi)`.
///
/// Equivalent stable form: `sqrt(2/pi) (sin((k+1)x) - sin(kx)) / x`.
pub fn dirichlet_kernel_1d(k: u32, x: f64) -> f64 {
    if x == 0.0 {
        return SQRT_2_OVER_PI;
    }
    let kf = k as f64;
    SQRT_2_OVER_PI * 2.0 * (0.5 * x).sin() * ((kf + 0.5) * x).cos() / x
}

/// Lower frequency edge of the 1-D band at level `m`:
/// `eta(m) 2^{m-1}`.
pub fn band_lower(m: u32) -> f64 {
    if m == 0 {
        0.0
    } else {
        f64::exp2(m as f64 - 1.0)
    }
}

/// Upper frequency edge `2^m`.
pub fn band_upper(m: u32) -> f64 {
    f64::exp2(m as f64)
}

/// 1-D block kernel at level `m`:
/// `sqrt(2/pi) (sin(2^m x) - sin(eta(m) 2^{m-1} x)) / x`,
/// the telescoped sum of `D_k` over `eta(m) 2^{m-1} <= k < 2^m`.
pub fn block_kernel_1d(m: u32, x: f64) -> f64 {
    let a = band_upper(m);
    let b = band_lower(m);
    if x == 0.0 {
        return SQRT_2_OVER_PI * (a - b);
    }
    // sin(ax) - sin(bx) = 2 sin((a-b)x/2) cos((a+b)x/2), no cancellation
    SQRT_2_OVER_PI * 2.0 * (0.5 * (a - b) * x).sin() * (0.5 * (a + b) * x).cos() / x
}

/// Scale factor of the level-`m` kernel: `g_m(x) = scale * shape(scale * x)`
/// where the shape is `gamma(u) = sqrt(2/pi)(sin 2u - sin u)/u` for `m >= 1`
/// and the sinc-type `gamma_0` for `m = 0`.
pub fn level_scale(m: u32) -> f64 {
    if m == 0 {
        1.0
    } else {
        f64::exp2(m as f64 - 1.0)
    }
}

/// Base-2 exponent of `level_scale`.
pub fn level_scale_log2(m: u32) -> i64 {
    if m == 0 {
        0
    } else {
        m as i64 - 1
    }
}

/// Unit-scale kernel shape; `zero_level` selects the `m = 0` shape.
pub fn shape(zero_level: bool, u: f64) -> f64 {
    if zero_level {
        if u == 0.0 {
            SQRT_2_OVER_PI
        } else {
            SQRT_2_OVER_PI * u.sin() / u
        }
    } else if u == 0.0 {
        SQRT_2_OVER_PI
    } else {
        // sin 2u - sin u = 2 sin(u/2) cos(3u/2)
        SQRT_2_OVER_PI * 2.0 * (0.5 * u).sin() * (1.5 * u).cos() / u
    }
}

/// `rho_plus(s)`: per axis `k_j = 0` if `s_j = 0`, else
/// `2^{s_j - 1} <= k_j < 2^{s_j}`; Cartesian product over axes.
pub fn rho_plus(s: &DyadicIndex) -> Vec<Vec<u32>> {
    let ranges: Vec<Vec<u32>> = s
        .coords()
        .iter()
        .map(|&sj| {
            if sj == 0 {
                vec![0]
            } else {
                ((1u32 << (sj - 1))..(1u32 << sj)).collect()
            }
        })
        .collect();
    let mut out: Vec<Vec<u32>> = vec![Vec::new()];
    for range in &ranges {
        let mut next = Vec::with_capacity(out.len() * range.len());
        for prefix in &out {
            for &k in range {
                let mut v = prefix.clone();
                v.push(k);
                next.push(v);
            }
        }
        out = next;
    }
    out
}

/// `|rho_plus(s)| = prod_j max(1, 2^{s_j - 1})`.
pub fn rho_plus_cardinality(s: &DyadicIndex) -> u64 {
    s.coords()
        .iter()
        .map(|&sj| if sj == 0 { 1u64 } else { 1u64 << (sj - 1) })
        .product()
}

/// Multidimensional block kernel `prod_j g_{s_j}(x_j)`; equals the sum of the
/// product kernels `D_k` over `rho_plus(s)`.
pub fn block_kernel(s: &DyadicIndex, x: &[f64]) -> f64 {
    debug_assert_eq!(s.dim(), x.len());
    s.coords()
        .iter()
        .zip(x)
        .map(|(&m, &xj)| block_kernel_1d(m, xj))
        .product()
}

/// Frequency block `Q*(s)`: per axis `eta(s_j) 2^{s_j-1} <= |lambda_j| < 2^{s_j}`.
#[derive(Clone, Debug, PartialEq)]
pub struct FrequencyBlock {
    pub s: DyadicIndex,
}

impl FrequencyBlock {
    pub fn new(s: DyadicIndex) -> Self {
        FrequencyBlock { s }
    }

    /// Per-axis `(lower, upper)` frequency edges.
    pub fn axis_bounds(&self) -> Vec<(f64, f64)> {
        self.s
            .coords()
            .iter()
            .map(|&m| (band_lower(m), band_upper(m)))
            .collect()
    }

    /// Lebesgue measure of the block (both signed half-axes per coordinate).
    pub fn measure(&self) -> f64 {
        self.s
            .coords()
            .iter()
            .map(|&m| 2.0 * (band_upper(m) - band_lower(m)))
            .product()
    }

    /// Whether a frequency point lies in the open block.
    pub fn contains(&self, lambda: &[f64]) -> bool {
        self.s.coords().iter().zip(lambda).all(|(&m, &lj)| {
            let a = lj.abs();
            band_lower(m) <= a && a < band_upper(m)
        })
    }
}
