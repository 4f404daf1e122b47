//! Hyperbolic-cross projector, approximation-error functionals, extremal
//! witness functions and the rate experiments.

use std::collections::BTreeSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernels::level_scale_log2;
use crate::lattice::{self, DyadicIndex, LevelSetFamily};
use crate::majorant::{MajorantSpec, SmoothnessParams, Theta};
use crate::model::BlockFunction;
use crate::norms::{decomposition_norm, lq_norm};
use crate::quad::{kernel_norm_1d, midpoint, Certified, QuadratureGrid};

/// `S_{Q(L)} f`: restriction of the coefficients to the index set.
pub fn partial_sum(f: &BlockFunction, index_set: &BTreeSet<DyadicIndex>) -> BlockFunction {
    f.restrict(|s| index_set.contains(s))
}

/// Blocks of `f` outside `kappa(N)` (the residual after the projector).
pub fn residual(
    f: &BlockFunction,
    omega: &MajorantSpec,
    params: &SmoothnessParams,
    n: u64,
) -> Result<BlockFunction> {
    let threshold = -lattice::log2_int(n);
    let mut out = Vec::new();
    for (s, &c) in f.coeffs() {
        if lattice::log2_weight(omega, params, s)? < threshold {
            out.push((s.clone(), c));
        }
    }
    BlockFunction::new(f.d(), out)
}

/// Projection error `E_cal = || f - S_{Q(N)} f ||_q` with its certificate.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct ApproxError {
    pub value: f64,
    pub cert_width: f64,
}

impl ApproxError {
    /// Bracket for the best approximation per the equivalence
    /// `E <= E_cal <= C E`, using a measured Littlewood-Paley constant.
    pub fn e_bracket(&self, c_lp: f64) -> (f64, f64) {
        (self.value / c_lp.max(1.0), self.value)
    }
}

pub fn approx_error(
    f: &BlockFunction,
    omega: &MajorantSpec,
    params: &SmoothnessParams,
    n: u64,
    q: f64,
    grid: &QuadratureGrid,
) -> Result<ApproxError> {
    let res = residual(f, omega, params, n)?;
    let norm = lq_norm(&res, q, grid)?;
    Ok(ApproxError {
        value: norm.value,
        cert_width: norm.abs_err,
    })
}

/// Upper bound `( sum_{s in kappa_perp(N)} (|c_s| ||B_s||_p)^q
/// 2^{||s||_1 (1/p - 1/q) q} )^{1/q}` on the residual norm.
pub fn lemma_v_upper(
    f: &BlockFunction,
    omega: &MajorantSpec,
    params: &SmoothnessParams,
    n: u64,
) -> Result<f64> {
    let res = residual(f, omega, params, n)?;
    let grid = QuadratureGrid::default();
    let q = params.q;
    let beta = params.beta();
    let mut total = 0.0;
    for (s, &c) in res.coeffs() {
        let norm_p = crate::quad::block_kernel_lp_norm(s, params.p, &grid)?;
        let term = c.abs() * norm_p.value * f64::exp2(beta * s.l1() as f64);
        total += term.powf(q);
    }
    Ok(total.powf(1.0 / q))
}

/// `int_{1/4}^{1/2} |shape|^q du` (level >= 1) and `int_{1/2}^{1} |shape_0|^q du`
/// (level 0): the unit-scale images of the cells `Delta(s)`.
fn cell_shape_integral(zero_level: bool, q: f64) -> f64 {
    let (a, b) = if zero_level { (0.5, 1.0) } else { (0.25, 0.5) };
    midpoint(a, b, 512, |u| {
        crate::kernels::shape(zero_level, u).abs().powf(q)
    })
}

/// Lower bound from the disjoint cells `Delta(s) = prod [2^{-s_j-1}, 2^{-s_j})`:
/// `( sum_{s in Theta(N)} int_{Delta(s)} |c_s B_s|^q dx )^{1/q}`.
///
/// The per-cell integral factorizes per axis and maps to a fixed unit-scale
/// integral, so no resolution issue arises at high levels.
pub fn cell_lower_bound(
    f: &BlockFunction,
    omega: &MajorantSpec,
    params: &SmoothnessParams,
    n: u64,
    q: f64,
) -> Result<f64> {
    let family = LevelSetFamily::build(omega, params, n)?;
    let mut total = 0.0;
    for (s, &c) in f.coeffs() {
        if !family.theta.contains(s) {
            continue;
        }
        let mut cell = c.abs().powf(q);
        for &m in s.coords() {
            let scale_exp = level_scale_log2(m) as f64;
            cell *= f64::exp2(scale_exp * (q - 1.0)) * cell_shape_integral(m == 0, q);
        }
        total += cell;
    }
    Ok(total.powf(1.0 / q))
}

fn coefficient_profile(
    omega: &MajorantSpec,
    params: &SmoothnessParams,
    s: &DyadicIndex,
) -> Result<f64> {
    let w = omega.omega_dyadic(s)?;
    Ok(w * f64::exp2(-(s.l1() as f64) * (1.0 - 1.0 / params.p)))
}

fn normalize_to_unit_class_norm(
    f: BlockFunction,
    omega: &MajorantSpec,
    params: &SmoothnessParams,
) -> Result<(BlockFunction, f64)> {
    let norm = decomposition_norm(&f, omega, params)?;
    if norm <= 0.0 {
        return Err(Error::Degenerate("witness has zero class norm".into()));
    }
    let factor = 1.0 / norm;
    Ok((f.scaled(factor), factor))
}

/// Deterministic representative of `Theta(N)`: the most balanced index
/// (smallest maximal coordinate, ties broken lexicographically).
pub fn pick_theta_witness(theta: &BTreeSet<DyadicIndex>) -> Option<DyadicIndex> {
    theta
        .iter()
        .min_by_key(|s| {
            (
                s.coords().iter().copied().max().unwrap_or(0),
                s.coords().to_vec(),
            )
        })
        .cloned()
}

/// Lower-bound witness for theta = inf: coefficients
/// `Omega(2^{-s}) 2^{-||s||_1 (1 - 1/p)}` on all of `Theta(N)`, rescaled to
/// unit class norm. Returns the function and the normalization factor.
pub fn make_f1(
    omega: &MajorantSpec,
    params: &SmoothnessParams,
    n: u64,
) -> Result<(BlockFunction, f64)> {
    let theta = lattice::enumerate_theta(omega, params, n)?;
    if theta.is_empty() {
        return Err(Error::Domain(format!("Theta({n}) is empty")));
    }
    let mut pairs = Vec::new();
    for s in &theta {
        pairs.push((s.clone(), coefficient_profile(omega, params, s)?));
    }
    normalize_to_unit_class_norm(BlockFunction::new(params.d, pairs)?, omega, params)
}

/// Single-block lower-bound witness at `s_tilde in Theta(N)`.
pub fn make_f2(
    omega: &MajorantSpec,
    params: &SmoothnessParams,
    n: u64,
    s_tilde: &DyadicIndex,
) -> Result<(BlockFunction, f64)> {
    let theta = lattice::enumerate_theta(omega, params, n)?;
    if !theta.contains(s_tilde) {
        return Err(Error::Domain(format!(
            "witness index {:?} is not in Theta({n})",
            s_tilde.coords()
        )));
    }
    let c = coefficient_profile(omega, params, s_tilde)?;
    normalize_to_unit_class_norm(
        BlockFunction::new(params.d, [(s_tilde.clone(), c)])?,
        omega,
        params,
    )
}

/// Lower-bound witness for q < theta < inf: the `f1` profile damped by
/// `|Theta(N)|^{-1/theta}`. Requires finite theta.
pub fn make_f3(
    omega: &MajorantSpec,
    params: &SmoothnessParams,
    n: u64,
) -> Result<(BlockFunction, f64)> {
    let th = params
        .theta
        .finite()
        .ok_or_else(|| Error::Domain("f3 requires finite theta".into()))?;
    let theta_set = lattice::enumerate_theta(omega, params, n)?;
    if theta_set.is_empty() {
        return Err(Error::Domain(format!("Theta({n}) is empty")));
    }
    let damp = (theta_set.len() as f64).powf(-1.0 / th);
    let mut pairs = Vec::new();
    for s in &theta_set {
        pairs.push((s.clone(), damp * coefficient_profile(omega, params, s)?));
    }
    normalize_to_unit_class_norm(BlockFunction::new(params.d, pairs)?, omega, params)
}

/// Seeded random unit-norm class member: coefficients
/// `u_s Omega(2^{-s}) 2^{-||s||_1 (1 - 1/p)}` with `u_s` uniform on [-1, 1]
/// over the simplex `||s||_1 <= depth`, rescaled to unit class norm.
pub fn random_class_member(
    omega: &MajorantSpec,
    params: &SmoothnessParams,
    depth: u32,
    rng: &mut ChaCha8Rng,
) -> Result<BlockFunction> {
    let d = params.d;
    let mut pairs = Vec::new();
    let mut s = vec![0u32; d];
    loop {
        if s.iter().sum::<u32>() <= depth {
            let idx = DyadicIndex::new(s.clone());
            let u: f64 = rng.gen_range(-1.0..=1.0);
            pairs.push((idx.clone(), u * coefficient_profile(omega, params, &idx)?));
        }
        let mut axis = 0;
        loop {
            if axis == d {
                let f = BlockFunction::new(d, pairs)?;
                return Ok(normalize_to_unit_class_norm(f, omega, params)?.0);
            }
            if s[axis] < depth {
                s[axis] += 1;
                for t in s.iter_mut().take(axis) {
                    *t = 0;
                }
                break;
            }
            axis += 1;
        }
    }
}

/// Witness family of a rate experiment.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Witness {
    F1,
    F2,
    F3,
    Random,
}

/// Inputs of one rate experiment.
#[derive(Clone, Debug)]
pub struct RateConfig {
    pub omega: MajorantSpec,
    pub params: SmoothnessParams,
    pub witness: Witness,
    /// Thresholds `N = 2^k` for the listed exponents.
    pub n_exponents: Vec<u32>,
    pub seed: u64,
    pub grid: QuadratureGrid,
    /// Members per row for the random witness family.
    pub members: usize,
}

/// One row of a rate table.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RateRow {
    pub n: u64,
    pub error: f64,
    pub cert_width: f64,
    /// `error * N / (log2 N)^{(d-1)(1/q - 1/theta)_+}`.
    pub norm_ratio: f64,
    pub lemma_v_upper: Option<f64>,
    /// Worst `error / lemma_v_upper` across members (random witness only).
    pub lemma_v_ratio: Option<f64>,
    /// Normalization factor applied to reach unit class norm.
    pub norm_factor: Option<f64>,
    pub failure: Option<String>,
}

/// Fit summary of a rate table.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RateSummary {
    pub ratio_max: f64,
    pub ratio_min: f64,
    /// Slope of `ln error` against `ln N` over rows with positive error.
    pub slope: f64,
    pub lemma_v_ratio_max: Option<f64>,
    pub failed_rows: usize,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RateTable {
    pub rows: Vec<RateRow>,
    pub summary: RateSummary,
}

/// `(d-1) (1/q - 1/theta)_+`, the logarithm exponent of the rate.
pub fn log_exponent(params: &SmoothnessParams) -> f64 {
    let inv_theta = match params.theta {
        Theta::Infinite => 0.0,
        Theta::Finite(t) => 1.0 / t,
    };
    (params.d as f64 - 1.0) * (1.0 / params.q - inv_theta).max(0.0)
}

fn row_seed(seed: u64, n: u64) -> u64 {
    seed ^ n.wrapping_mul(0x9E37_79B9_7F4A_7C15)
}

fn run_row(cfg: &RateConfig, exponent: u32) -> Result<RateRow> {
    let n = 1u64 << exponent;
    let params = &cfg.params;
    let q = params.q;
    let log_exp = log_exponent(params);
    let scale = n as f64 / lattice::log2_int(n).powf(log_exp);

    let (error, cert, lemma_v, lemma_ratio, factor) = match cfg.witness {
        Witness::F1 => {
            let (f, factor) = make_f1(&cfg.omega, params, n)?;
            let err = approx_error(&f, &cfg.omega, params, n, q, &cfg.grid)?;
            (err.value, err.cert_width, None, None, Some(factor))
        }
        Witness::F2 => {
            let theta = lattice::enumerate_theta(&cfg.omega, params, n)?;
            let s_tilde = pick_theta_witness(&theta)
                .ok_or_else(|| Error::Domain(format!("Theta({n}) is empty")))?;
            let (f, factor) = make_f2(&cfg.omega, params, n, &s_tilde)?;
            let err = approx_error(&f, &cfg.omega, params, n, q, &cfg.grid)?;
            (err.value, err.cert_width, None, None, Some(factor))
        }
        Witness::F3 => {
            let (f, factor) = make_f3(&cfg.omega, params, n)?;
            let err = approx_error(&f, &cfg.omega, params, n, q, &cfg.grid)?;
            (err.value, err.cert_width, None, None, Some(factor))
        }
        Witness::Random => {
            let kappa = lattice::enumerate_kappa(&cfg.omega, params, n)?;
            let radius = kappa.iter().map(|s| s.l1()).max().unwrap_or(0);
            let depth = radius + 3;
            let mut rng = ChaCha8Rng::seed_from_u64(row_seed(cfg.seed, n));
            let mut worst = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
            for _ in 0..cfg.members {
                let f = random_class_member(&cfg.omega, params, depth, &mut rng)?;
                let err = approx_error(&f, &cfg.omega, params, n, q, &cfg.grid)?;
                let lv = lemma_v_upper(&f, &cfg.omega, params, n)?;
                let ratio = if lv > 0.0 { err.value / lv } else { 0.0 };
                if err.value > worst.0 {
                    worst.0 = err.value;
                    worst.1 = err.cert_width;
                    worst.2 = lv;
                }
                worst.3 = worst.3.max(ratio);
            }
            (worst.0, worst.1, Some(worst.2), Some(worst.3), None)
        }
    };

    Ok(RateRow {
        n,
        error,
        cert_width: cert,
        norm_ratio: error * scale,
        lemma_v_upper: lemma_v,
        lemma_v_ratio: lemma_ratio,
        norm_factor: factor,
        failure: None,
    })
}

/// Run a witness family over the threshold sweep. Per-row failures mark the
/// row and continue; the sweep fails if more than half the rows fail.
pub fn rate_experiment(cfg: &RateConfig) -> Result<RateTable> {
    if cfg.n_exponents.is_empty() {
        return Err(Error::Config("empty N sweep".into()));
    }
    if cfg.witness == Witness::Random && cfg.members == 0 {
        return Err(Error::Config("random witness needs members >= 1".into()));
    }
    let rows: Vec<RateRow> = cfg
        .n_exponents
        .par_iter()
        .map(|&k| {
            run_row(cfg, k).unwrap_or_else(|e| RateRow {
                n: 1u64 << k,
                error: f64::NAN,
                cert_width: f64::NAN,
                norm_ratio: f64::NAN,
                lemma_v_upper: None,
                lemma_v_ratio: None,
                norm_factor: None,
                failure: Some(e.to_string()),
            })
        })
        .collect();
    let failed = rows.iter().filter(|r| r.failure.is_some()).count();
    if failed * 2 > rows.len() {
        return Err(Error::Degenerate(format!(
            "{failed} of {} rate rows failed",
            rows.len()
        )));
    }
    let ok: Vec<&RateRow> = rows.iter().filter(|r| r.failure.is_none()).collect();
    let ratio_max = ok.iter().map(|r| r.norm_ratio).fold(f64::NEG_INFINITY, f64::max);
    let ratio_min = ok.iter().map(|r| r.norm_ratio).fold(f64::INFINITY, f64::min);
    let fit: Vec<(f64, f64)> = ok
        .iter()
        .filter(|r| r.error > 0.0)
        .map(|r| ((r.n as f64).ln(), r.error.ln()))
        .collect();
    let slope = if fit.len() >= 2 {
        let xs: Vec<f64> = fit.iter().map(|p| p.0).collect();
        let ys: Vec<f64> = fit.iter().map(|p| p.1).collect();
        crate::lattice::least_squares(&xs, &ys).0
    } else {
        f64::NAN
    };
    let lemma_v_ratio_max = ok
        .iter()
        .filter_map(|r| r.lemma_v_ratio)
        .fold(None, |acc: Option<f64>, r| Some(acc.map_or(r, |a| a.max(r))));
    Ok(RateTable {
        summary: RateSummary {
            ratio_max,
            ratio_min,
            slope,
            lemma_v_ratio_max,
            failed_rows: failed,
        },
        rows,
    })
}

/// Certified single-block norm helper shared by witnesses in tests.
pub fn single_block_norm(s: &DyadicIndex, c: f64, q: f64) -> Result<Certified> {
    let mut out = Certified::exact(c.abs());
    for &m in s.coords() {
        out = out.mul(&kernel_norm_1d(m, q, 1e-4)?);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::majorant::Theta as Th;

    fn idx(s: &[u32]) -> DyadicIndex {
        DyadicIndex::new(s.to_vec())
    }

    fn setup_2d() -> (MajorantSpec, SmoothnessParams) {
        (
            MajorantSpec::power(2, 1, vec![0.6, 0.6]).unwrap(),
            SmoothnessParams::new(2.0, 4.0, Th::Infinite, 1, 0.6, 2).unwrap(),
        )
    }

    #[test]
    fn partial_sum_retains_and_drops() {
        let f = BlockFunction::new(1, [(idx(&[1]), 1.0), (idx(&[4]), 2.0)]).unwrap();
        let all: BTreeSet<_> = f.coeffs().keys().cloned().collect();
        assert_eq!(partial_sum(&f, &all), f);
        let none = BTreeSet::new();
        assert!(partial_sum(&f, &none).is_empty());
    }

    #[test]
    fn partial_sum_on_kappa_retains_exactly_kappa_blocks() {
        let (om, params) = setup_2d();
        let f = BlockFunction::new(
            2,
            [(idx(&[0, 0]), 1.0), (idx(&[3, 3]), 1.0), (idx(&[9, 9]), 1.0)],
        )
        .unwrap();
        let n = 16;
        let kappa = lattice::enumerate_kappa(&om, &params, n).unwrap();
        let kept = partial_sum(&f, &kappa);
        for s in kept.coeffs().keys() {
            assert!(kappa.contains(s));
        }
        let res = residual(&f, &om, &params, n).unwrap();
        for s in res.coeffs().keys() {
            assert!(!kappa.contains(s));
        }
        assert_eq!(kept.coeffs().len() + res.coeffs().len(), 3);
    }

    #[test]
    fn approx_error_zero_when_support_inside_kappa() {
        let (om, params) = setup_2d();
        let f = BlockFunction::new(2, [(idx(&[0, 0]), 1.0), (idx(&[1, 1]), -0.5)]).unwrap();
        let err = approx_error(&f, &om, &params, 1 << 8, 4.0, &QuadratureGrid::default()).unwrap();
        assert_eq!(err.value, 0.0);
    }

    #[test]
    fn f2_error_is_single_block_norm() {
        let (om, params) = setup_2d();
        let n = 1 << 6;
        let theta = lattice::enumerate_theta(&om, &params, n).unwrap();
        let s = pick_theta_witness(&theta).unwrap();
        let (f2, _) = make_f2(&om, &params, n, &s).unwrap();
        let grid = QuadratureGrid {
            rel_tol: 0.01,
            ..QuadratureGrid::default()
        };
        let err = approx_error(&f2, &om, &params, n, 4.0, &grid).unwrap();
        let c = f2.coefficient(&s);
        let direct = single_block_norm(&s, c, 4.0).unwrap();
        assert!(
            (err.value - direct.value).abs() <= 1e-9 * direct.value,
            "{} vs {}",
            err.value,
            direct.value
        );
    }

    #[test]
    fn witnesses_have_unit_class_norm() {
        let (om, params) = setup_2d();
        let n = 1 << 6;
        let (f1, _) = make_f1(&om, &params, n).unwrap();
        let norm = decomposition_norm(&f1, &om, &params).unwrap();
        assert!((norm - 1.0).abs() < 1e-3, "{norm}");

        let params_f3 = SmoothnessParams::new(2.0, 4.0, Th::Finite(4.0), 1, 0.6, 2).unwrap();
        let (f3, factor) = make_f3(&om, &params_f3, n).unwrap();
        let norm3 = decomposition_norm(&f3, &om, &params_f3).unwrap();
        assert!((norm3 - 1.0).abs() < 1e-3, "{norm3}");
        assert!(factor > 0.0);
    }

    #[test]
    fn f1_supported_exactly_on_theta() {
        let (om, params) = setup_2d();
        let n = 1 << 5;
        let theta = lattice::enumerate_theta(&om, &params, n).unwrap();
        let (f1, _) = make_f1(&om, &params, n).unwrap();
        let support: BTreeSet<_> = f1.coeffs().keys().cloned().collect();
        assert_eq!(support, theta);
    }

    #[test]
    fn f3_normalization_factor_in_declared_bracket() {
        let om = MajorantSpec::power(2, 1, vec![0.6, 0.6]).unwrap();
        let params = SmoothnessParams::new(2.0, 4.0, Th::Finite(4.0), 1, 0.6, 2).unwrap();
        let (_, factor) = make_f3(&om, &params, 1 << 6).unwrap();
        assert!(
            (0.125..=8.0).contains(&factor),
            "normalization factor {factor} outside [1/8, 8]"
        );
    }

    #[test]
    fn f3_requires_finite_theta() {
        let (om, params) = setup_2d(); // theta = inf
        assert!(make_f3(&om, &params, 1 << 6).is_err());
    }

    #[test]
    fn empty_theta_is_domain_error() {
        // table majorant too small to reach Theta at large N
        let om = MajorantSpec::table_from_fn(1, 1, 3, |s| f64::exp2(-0.5 * s[0] as f64)).unwrap();
        let params = SmoothnessParams::new(2.0, 4.0, Th::Infinite, 1, 0.4, 1).unwrap();
        assert!(make_f1(&om, &params, 1 << 8).is_err());
    }

    #[test]
    fn cell_lower_bound_zero_without_theta_blocks() {
        let (om, params) = setup_2d();
        let f = BlockFunction::new(2, [(idx(&[0, 0]), 1.0)]).unwrap();
        let got = cell_lower_bound(&f, &om, &params, 1 << 6, 4.0).unwrap();
        assert_eq!(got, 0.0);
    }

    #[test]
    fn cell_lower_bound_single_block_matches_direct_quadrature() {
        let om = MajorantSpec::power(1, 1, vec![0.6]).unwrap();
        let params = SmoothnessParams::new(2.0, 4.0, Th::Infinite, 1, 0.6, 1).unwrap();
        let n = 4u64;
        let theta = lattice::enumerate_theta(&om, &params, n).unwrap();
        let s = theta.iter().next().unwrap().clone();
        let f = BlockFunction::new(1, [(s.clone(), 2.0)]).unwrap();
        let got = cell_lower_bound(&f, &om, &params, n, 4.0).unwrap();
        // direct 1-D quadrature over the cell, independent resolution
        let m = s.coords()[0];
        let (a, b) = (f64::exp2(-(m as f64) - 1.0), f64::exp2(-(m as f64)));
        let direct = midpoint(a, b, 4096, |x| {
            (2.0 * crate::kernels::block_kernel_1d(m, x)).abs().powf(4.0)
        })
        .powf(0.25);
        assert!((got - direct).abs() < 1e-3 * direct, "{got} vs {direct}");
    }

    #[test]
    fn lemma_v_trivial_cases() {
        let (om, params) = setup_2d();
        let inside = BlockFunction::new(2, [(idx(&[0, 0]), 3.0)]).unwrap();
        assert_eq!(lemma_v_upper(&inside, &om, &params, 1 << 6).unwrap(), 0.0);

        let n = 1 << 5;
        let theta = lattice::enumerate_theta(&om, &params, n).unwrap();
        let s = pick_theta_witness(&theta).unwrap();
        let f = BlockFunction::new(2, [(s.clone(), 0.7)]).unwrap();
        let got = lemma_v_upper(&f, &om, &params, n).unwrap();
        let norm_p = single_block_norm(&s, 0.7, 2.0).unwrap().value;
        let expected = norm_p * f64::exp2(0.25 * s.l1() as f64);
        assert!((got - expected).abs() < 1e-6 * expected, "{got} vs {expected}");
    }

    #[test]
    fn e_bracket_sandwich() {
        let err = ApproxError {
            value: 2.0,
            cert_width: 0.0,
        };
        let (lo, hi) = err.e_bracket(1.5);
        assert!(lo <= hi);
        assert_eq!(hi, 2.0);
        assert!((lo - 2.0 / 1.5).abs() < 1e-15);
    }

    #[test]
    fn rate_experiment_f2_runs_and_is_deterministic() {
        let (om, _) = setup_2d();
        let params = SmoothnessParams::new(2.0, 4.0, Th::Finite(2.0), 1, 0.6, 2).unwrap();
        let cfg = RateConfig {
            omega: om,
            params,
            witness: Witness::F2,
            n_exponents: vec![4, 5, 6],
            seed: 7,
            grid: QuadratureGrid {
                rel_tol: 0.05,
                ..QuadratureGrid::default()
            },
            members: 0,
        };
        let t1 = rate_experiment(&cfg).unwrap();
        let t2 = rate_experiment(&cfg).unwrap();
        assert_eq!(t1.rows.len(), 3);
        for (a, b) in t1.rows.iter().zip(&t2.rows) {
            assert_eq!(a.error.to_bits(), b.error.to_bits());
            assert_eq!(a.norm_ratio.to_bits(), b.norm_ratio.to_bits());
        }
        assert!(t1.summary.ratio_min > 0.0);
    }

    #[test]
    fn random_member_is_seed_deterministic() {
        let (om, params) = setup_2d();
        let mut r1 = ChaCha8Rng::seed_from_u64(42);
        let mut r2 = ChaCha8Rng::seed_from_u64(42);
        let f1 = random_class_member(&om, &params, 6, &mut r1).unwrap();
        let f2 = random_class_member(&om, &params, 6, &mut r2).unwrap();
        assert_eq!(f1, f2);
        let norm = decomposition_norm(&f1, &om, &params).unwrap();
        assert!((norm - 1.0).abs() < 1e-3);
    }
}
