//! Level-set index families in `Z_+^d` generated by the weight
//! `Omega(2^{-s}) * 2^{||s||_1 (1/p - 1/q)}`.
//!
//! `kappa(N)` collects the indices with weight `>= 1/N`, `Theta(N)` the layer
//! `[1/(2^l N), 1/N)`. The complement `kappa_perp(N)` is infinite and is only
//! ever touched through its membership predicate plus shell-wise truncated
//! enumeration.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::majorant::{MajorantKind, MajorantSpec, SmoothnessParams};

/// Multi-index in `Z_+^d`, ordered lexicographically.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct DyadicIndex(Vec<u32>);

impl DyadicIndex {
    pub fn new(coords: Vec<u32>) -> Self {
        DyadicIndex(coords)
    }

    pub fn coords(&self) -> &[u32] {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    /// `||s||_1 = s_1 + ... + s_d`.
    pub fn l1(&self) -> u32 {
        self.0.iter().sum()
    }
}

impl From<Vec<u32>> for DyadicIndex {
    fn from(v: Vec<u32>) -> Self {
        DyadicIndex(v)
    }
}

/// Indices with weight this close to a threshold (in log2) are flagged as
/// borderline in reports.
pub const GUARD_BAND_LOG2: f64 = 1e-12;

/// Hard cap on per-axis enumeration bounds.
const MAX_AXIS_BOUND: u32 = 1 << 16;

/// Default relative tolerance for shell-truncated tail sums.
pub const DEFAULT_TAIL_REL_TOL: f64 = 1e-8;

/// Shell cap for tail sums.
const MAX_SHELLS: u32 = 64;

/// Exact `log2 N` for powers of two, floating otherwise.
pub fn log2_int(n: u64) -> f64 {
    if n.is_power_of_two() {
        n.trailing_zeros() as f64
    } else {
        (n as f64).log2()
    }
}

/// `log2` of the weight `Omega(2^{-s}) 2^{||s||_1 beta}`.
pub fn log2_weight(omega: &MajorantSpec, params: &SmoothnessParams, s: &DyadicIndex) -> Result<f64> {
    Ok(omega.log2_omega_dyadic(s)? + params.beta() * s.l1() as f64)
}

/// The weight itself.
pub fn weight(omega: &MajorantSpec, params: &SmoothnessParams, s: &DyadicIndex) -> Result<f64> {
    Ok(f64::exp2(log2_weight(omega, params, s)?))
}

fn check_dims(omega: &MajorantSpec, params: &SmoothnessParams) -> Result<()> {
    if omega.d() != params.d {
        return Err(Error::Config(format!(
            "majorant dimension {} != params dimension {}",
            omega.d(),
            params.d
        )));
    }
    if omega.l() != params.l {
        return Err(Error::Config(format!(
            "majorant order l = {} != params order l = {}",
            omega.l(),
            params.l
        )));
    }
    Ok(())
}

/// Per-axis enumeration caps for the box scan: the smallest axis index whose
/// single-axis weight falls below the threshold with the observed
/// almost-increase constant (plus one factor of 2) subtracted. Correctness is
/// certified against exhaustive scans in tests.
fn axis_caps(omega: &MajorantSpec, params: &SmoothnessParams, log2_n: f64) -> Result<Vec<u32>> {
    let d = params.d;
    if let MajorantKind::Table { box_bound, .. } = omega.kind() {
        return Ok(vec![*box_bound; d]);
    }
    let beta = params.beta();
    let axis_lw = |axis: usize, m: u32| -> Result<f64> {
        let mut coords = vec![0u32; d];
        coords[axis] = m;
        Ok(omega.log2_omega_dyadic(&DyadicIndex::new(coords))? + beta * m as f64)
    };
    // Other-axis suprema enter the per-axis threshold: a member's axis-j
    // factor can be as small as 1/N divided by the other axes' peaks.
    let mut sup = vec![0.0f64; d];
    for (axis, s) in sup.iter_mut().enumerate() {
        let mut best = f64::NEG_INFINITY;
        for m in 0..=MAX_AXIS_BOUND {
            let lw = axis_lw(axis, m)?;
            best = best.max(lw);
            if lw < best - 40.0 {
                break;
            }
            if m == MAX_AXIS_BOUND {
                return Err(Error::Config(
                    "axis weight does not decay; is alpha > beta satisfied?".into(),
                ));
            }
        }
        *s = best.max(0.0);
    }
    let sup_total: f64 = sup.iter().sum();

    let mut caps = Vec::with_capacity(d);
    for axis in 0..d {
        let threshold = -log2_n - (sup_total - sup[axis]);
        let mut run_min = f64::INFINITY;
        let mut rise = 0.0f64;
        let mut cap = None;
        for m in 0..=MAX_AXIS_BOUND {
            let lw = axis_lw(axis, m)?;
            let psi = lw + params.alpha * m as f64;
            run_min = run_min.min(psi);
            rise = rise.max(psi - run_min);
            if lw < threshold - rise - 1.0 {
                cap = Some(m);
                break;
            }
        }
        match cap {
            Some(m) => caps.push(m),
            None => {
                return Err(Error::Config(format!(
                    "axis {axis} enumeration bound exceeds cap {MAX_AXIS_BOUND}; \
                     weight decays too slowly"
                )))
            }
        }
    }
    Ok(caps)
}

fn scan_box(
    caps: &[u32],
    mut visit: impl FnMut(&DyadicIndex) -> Result<()>,
) -> Result<()> {
    let d = caps.len();
    let mut s = vec![0u32; d];
    loop {
        visit(&DyadicIndex::new(s.clone()))?;
        let mut axis = 0;
        loop {
            if axis == d {
                return Ok(());
            }
            if s[axis] < caps[axis] {
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

/// The families `kappa(N)` and `Theta(N)` for one threshold, with the
/// enumeration box and borderline indices recorded.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LevelSetFamily {
    pub n: u64,
    pub kappa: BTreeSet<DyadicIndex>,
    pub theta: BTreeSet<DyadicIndex>,
    /// Per-axis truncation bounds used by the box scan.
    pub s_max: Vec<u32>,
    /// Indices whose weight sits within the floating-point guard band of a
    /// threshold.
    pub guard_flagged: Vec<DyadicIndex>,
}

impl LevelSetFamily {
    /// Enumerate both families with one box scan.
    pub fn build(omega: &MajorantSpec, params: &SmoothnessParams, n: u64) -> Result<Self> {
        check_dims(omega, params)?;
        if n == 0 {
            return Err(Error::Domain("threshold N must be >= 1".into()));
        }
        let log2_n = log2_int(n);
        let log2_n_outer = log2_n + params.l as f64;
        let caps = axis_caps(omega, params, log2_n_outer)?;
        let mut kappa = BTreeSet::new();
        let mut theta = BTreeSet::new();
        let mut guard_flagged = Vec::new();
        scan_box(&caps, |s| {
            let lw = log2_weight(omega, params, s)?;
            if (lw + log2_n).abs() <= GUARD_BAND_LOG2 || (lw + log2_n_outer).abs() <= GUARD_BAND_LOG2
            {
                guard_flagged.push(s.clone());
            }
            if lw >= -log2_n {
                kappa.insert(s.clone());
            } else if lw >= -log2_n_outer {
                theta.insert(s.clone());
            }
            Ok(())
        })?;
        if let MajorantKind::Table { box_bound, .. } = omega.kind() {
            // A member on the table boundary means the box may truncate the set.
            let on_boundary = |set: &BTreeSet<DyadicIndex>| {
                set.iter()
                    .any(|s| s.coords().iter().any(|&c| c == *box_bound))
            };
            if on_boundary(&kappa) || on_boundary(&theta) {
                return Err(Error::Config(format!(
                    "table box [0,{box_bound}]^d too small for N = {n}: \
                     level sets reach the boundary"
                )));
            }
        }
        Ok(LevelSetFamily {
            n,
            kappa,
            theta,
            s_max: caps,
            guard_flagged,
        })
    }
}

/// Exactly the indices with weight `>= 1/N` (ties belong to `kappa`).
pub fn enumerate_kappa(
    omega: &MajorantSpec,
    params: &SmoothnessParams,
    n: u64,
) -> Result<BTreeSet<DyadicIndex>> {
    Ok(LevelSetFamily::build(omega, params, n)?.kappa)
}

/// Exactly the indices with weight in `[1/(2^l N), 1/N)`; equals
/// `kappa(2^l N) \ kappa(N)`.
pub fn enumerate_theta(
    omega: &MajorantSpec,
    params: &SmoothnessParams,
    n: u64,
) -> Result<BTreeSet<DyadicIndex>> {
    Ok(LevelSetFamily::build(omega, params, n)?.theta)
}

/// Membership predicate for the infinite complement `kappa_perp(N)`.
pub fn in_kappa_perp(
    omega: &MajorantSpec,
    params: &SmoothnessParams,
    n: u64,
    s: &DyadicIndex,
) -> Result<bool> {
    Ok(log2_weight(omega, params, s)? < -log2_int(n))
}

/// Least-squares fit diagnostics for the cardinality law
/// `|Theta(N)| ~ (log2 N)^{d-1}`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CardinalityFit {
    /// Slope of `log |Theta(N)|` against `log log2 N`.
    pub slope: f64,
    /// Root-mean-square residual of the fit.
    pub residual: f64,
    /// Extremes of `|Theta(N)| / (log2 N)^{d-1}` over the sweep.
    pub ratio_max: f64,
    pub ratio_min: f64,
    pub counts: Vec<(u64, usize)>,
}

/// Fit `log |Theta(N)|` against `log log2 N` over a sweep of thresholds.
pub fn cardinality_fit(
    omega: &MajorantSpec,
    params: &SmoothnessParams,
    n_list: &[u64],
) -> Result<CardinalityFit> {
    if n_list.len() < 4 {
        return Err(Error::Domain("need at least 4 thresholds".into()));
    }
    if n_list.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Domain("thresholds must be strictly increasing".into()));
    }
    if n_list[0] < 4 {
        return Err(Error::Domain("thresholds must be >= 4".into()));
    }
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    let mut ratio_max = f64::NEG_INFINITY;
    let mut ratio_min = f64::INFINITY;
    let mut counts = Vec::new();
    for &n in n_list {
        let theta = enumerate_theta(omega, params, n)?;
        if theta.is_empty() {
            return Err(Error::Degenerate(format!("Theta({n}) is empty")));
        }
        let count = theta.len();
        counts.push((n, count));
        let log2n = log2_int(n);
        let ratio = count as f64 / log2n.powi(params.d as i32 - 1);
        ratio_max = ratio_max.max(ratio);
        ratio_min = ratio_min.min(ratio);
        xs.push(log2n.ln());
        ys.push((count as f64).ln());
    }
    let (slope, intercept) = least_squares(&xs, &ys);
    let residual = (xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| {
            let r = y - (slope * x + intercept);
            r * r
        })
        .sum::<f64>()
        / xs.len() as f64)
        .sqrt();
    Ok(CardinalityFit {
        slope,
        residual,
        ratio_max,
        ratio_min,
        counts,
    })
}

pub(crate) fn least_squares(xs: &[f64], ys: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let sx: f64 = xs.iter().sum();
    let sy: f64 = ys.iter().sum();
    let sxx: f64 = xs.iter().map(|x| x * x).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| x * y).sum();
    let denom = n * sxx - sx * sx;
    let slope = (n * sxy - sx * sy) / denom;
    let intercept = (sy - slope * sx) / n;
    (slope, intercept)
}

/// Result of a shell-truncated tail sum.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TailSums {
    /// `sum_{kappa_perp(N)} weight^mu`, truncated once a shell contributes
    /// less than the relative tolerance.
    pub tail: f64,
    /// `sum_{Theta(N)} weight^mu` (the first shell).
    pub theta: f64,
    /// tail / theta.
    pub ratio: f64,
    pub shells_used: u32,
}

/// Sum `weight^mu` over `kappa_perp(N)` by enumerating the shells
/// `kappa(2^{lM} N) \ kappa(2^{l(M-1)} N)` for `M = 1, 2, ...` until the last
/// shell contributes less than `rel_tol` of the running total. Geometric decay
/// is guaranteed by `(S^alpha)` with `alpha > beta`.
pub fn tail_sum_with_tol(
    omega: &MajorantSpec,
    params: &SmoothnessParams,
    n: u64,
    mu: f64,
    rel_tol: f64,
) -> Result<TailSums> {
    check_dims(omega, params)?;
    if !(mu > 0.0 && mu.is_finite()) {
        return Err(Error::Domain(format!("mu must be in (0, inf), got {mu}")));
    }
    let log2_n = log2_int(n);
    let l = params.l as f64;
    let mut total = 0.0f64;
    let mut theta_sum = None;
    for shell in 1..=MAX_SHELLS {
        let upper = -log2_n - l * (shell - 1) as f64; // weights strictly below
        let lower = -log2_n - l * shell as f64; // weights at or above
        let caps = axis_caps(omega, params, log2_n + l * shell as f64)?;
        // Deterministic order: the box scan is lexicographic.
        let mut shell_total = 0.0f64;
        scan_box(&caps, |s| {
            let lw = log2_weight(omega, params, s)?;
            if lw < upper && lw >= lower {
                shell_total += f64::exp2(mu * lw);
            }
            Ok(())
        })?;
        total += shell_total;
        if theta_sum.is_none() {
            theta_sum = Some(shell_total);
        } else if shell_total < rel_tol * total {
            let theta = theta_sum.unwrap();
            return Ok(TailSums {
                tail: total,
                theta,
                ratio: total / theta,
                shells_used: shell,
            });
        }
    }
    Err(Error::Convergence(format!(
        "tail sum did not converge within {MAX_SHELLS} shells (N = {n}, mu = {mu})"
    )))
}

/// `tail_sum_with_tol` at the default tolerance `1e-8`.
pub fn tail_sum(
    omega: &MajorantSpec,
    params: &SmoothnessParams,
    n: u64,
    mu: f64,
) -> Result<TailSums> {
    tail_sum_with_tol(omega, params, n, mu, DEFAULT_TAIL_REL_TOL)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::majorant::Theta;

    fn power_params(p: f64, q: f64, alpha: f64, d: usize) -> SmoothnessParams {
        SmoothnessParams::new(p, q, Theta::Finite(2.0), 1, alpha, d).unwrap()
    }

    /// Exhaustive membership scan over a generous box; deliberately
    /// recomputes the weight from scratch.
    fn brute_force_kappa(
        omega: &MajorantSpec,
        params: &SmoothnessParams,
        n: u64,
        box_bound: u32,
    ) -> BTreeSet<DyadicIndex> {
        let d = params.d;
        let beta = params.beta();
        let mut out = BTreeSet::new();
        let mut s = vec![0u32; d];
        loop {
            let idx = DyadicIndex::new(s.clone());
            let w = omega.omega_dyadic(&idx).unwrap() * f64::exp2(beta * idx.l1() as f64);
            if w >= 1.0 / n as f64 {
                out.insert(idx);
            }
            let mut axis = 0;
            loop {
                if axis == d {
                    return out;
                }
                if s[axis] < box_bound {
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

    #[test]
    fn weight_examples() {
        let params = power_params(2.0, 4.0, 0.6, 1);
        let om = MajorantSpec::power(1, 1, vec![0.6]).unwrap();
        assert_eq!(
            weight(&om, &params, &DyadicIndex::new(vec![0])).unwrap(),
            1.0
        );
        // 2^{-1.2} * 2^{0.5} = 2^{-0.7}
        let got = weight(&om, &params, &DyadicIndex::new(vec![2])).unwrap();
        assert!((got - f64::exp2(-0.7)).abs() < 1e-15);

        let params2 = power_params(2.0, 4.0, 0.6, 2);
        let om2 = MajorantSpec::power(2, 1, vec![0.6, 0.6]).unwrap();
        let got2 = weight(&om2, &params2, &DyadicIndex::new(vec![1, 1])).unwrap();
        assert!((got2 - f64::exp2(-0.7)).abs() < 1e-15);
    }

    #[test]
    fn kappa_1d_hand_case() {
        // weight 2^{-0.35 s} >= 1/2 iff 0.35 s <= 1 iff s <= 2.857
        let params = power_params(2.0, 4.0, 0.6, 1);
        let om = MajorantSpec::power(1, 1, vec![0.6]).unwrap();
        let kappa = enumerate_kappa(&om, &params, 2).unwrap();
        let expected: BTreeSet<_> = [0u32, 1, 2]
            .iter()
            .map(|&s| DyadicIndex::new(vec![s]))
            .collect();
        assert_eq!(kappa, expected);
    }

    #[test]
    fn kappa_contains_origin_at_n1() {
        let params = power_params(2.0, 4.0, 0.6, 2);
        let om = MajorantSpec::power(2, 1, vec![0.6, 0.6]).unwrap();
        let kappa = enumerate_kappa(&om, &params, 1).unwrap();
        assert!(kappa.contains(&DyadicIndex::new(vec![0, 0])));
    }

    #[test]
    fn theta_1d_hand_case() {
        // 1 < 0.35 s <= 2 gives s in {3, 4, 5}
        let params = power_params(2.0, 4.0, 0.6, 1);
        let om = MajorantSpec::power(1, 1, vec![0.6]).unwrap();
        let theta = enumerate_theta(&om, &params, 2).unwrap();
        let expected: BTreeSet<_> = [3u32, 4, 5]
            .iter()
            .map(|&s| DyadicIndex::new(vec![s]))
            .collect();
        assert_eq!(theta, expected);
    }

    #[test]
    fn kappa_matches_brute_force_2d() {
        let params = power_params(2.0, 4.0, 0.6, 2);
        let om = MajorantSpec::power(2, 1, vec![0.6, 0.6]).unwrap();
        let kappa = enumerate_kappa(&om, &params, 16).unwrap();
        let oracle = brute_force_kappa(&om, &params, 16, 40);
        assert_eq!(kappa, oracle);
    }

    #[test]
    fn theta_disjoint_from_kappa_and_layered() {
        let params = power_params(2.0, 4.0, 0.6, 2);
        let om = MajorantSpec::power_log(2, 1, vec![0.6, 0.8], vec![1.0, 0.0]).unwrap();
        let fam = LevelSetFamily::build(&om, &params, 64).unwrap();
        assert!(fam.kappa.is_disjoint(&fam.theta));
        let outer = enumerate_kappa(&om, &params, 128).unwrap();
        let diff: BTreeSet<_> = outer.difference(&fam.kappa).cloned().collect();
        assert_eq!(fam.theta, diff);
    }

    #[test]
    fn downward_closed_for_power_law_above_beta() {
        let params = power_params(2.0, 4.0, 0.6, 2);
        let om = MajorantSpec::power(2, 1, vec![0.6, 0.6]).unwrap();
        let kappa = enumerate_kappa(&om, &params, 64).unwrap();
        for s in &kappa {
            for j in 0..2 {
                if s.coords()[j] > 0 {
                    let mut down = s.coords().to_vec();
                    down[j] -= 1;
                    assert!(kappa.contains(&DyadicIndex::new(down)));
                }
            }
        }
    }

    #[test]
    fn alpha_below_beta_is_a_config_error() {
        // SmoothnessParams::new already rejects alpha <= beta.
        assert!(SmoothnessParams::new(2.0, 4.0, Theta::Finite(2.0), 1, 0.1, 1).is_err());
    }

    #[test]
    fn cardinality_slope_flat_in_1d() {
        let params = power_params(2.0, 4.0, 0.6, 1);
        let om = MajorantSpec::power(1, 1, vec![0.6]).unwrap();
        let ns: Vec<u64> = (4..=12).map(|k| 1u64 << k).collect();
        let fit = cardinality_fit(&om, &params, &ns).unwrap();
        assert!(fit.slope.abs() < 0.2, "slope {}", fit.slope);
    }

    #[test]
    fn tail_sum_matches_geometric_series() {
        // d=1, weight 2^{-0.35 s}, mu = 2, N = 2: the tail over s >= 3 is
        // sum 2^{-0.7 s} = 2^{-2.1} / (1 - 2^{-0.7}).
        let params = power_params(2.0, 4.0, 0.6, 1);
        let om = MajorantSpec::power(1, 1, vec![0.6]).unwrap();
        let sums = tail_sum(&om, &params, 2, 2.0).unwrap();
        let expected = f64::exp2(-2.1) / (1.0 - f64::exp2(-0.7));
        assert!(
            (sums.tail - expected).abs() < 1e-7 * expected,
            "tail {} vs {}",
            sums.tail,
            expected
        );
        let theta_expected = f64::exp2(-2.1) + f64::exp2(-2.8) + f64::exp2(-3.5);
        assert!((sums.theta - theta_expected).abs() < 1e-12);
    }

    #[test]
    fn family_build_rejects_small_table() {
        let om = MajorantSpec::table_from_fn(1, 1, 4, |s| f64::exp2(-0.6 * s[0] as f64)).unwrap();
        let params = power_params(2.0, 4.0, 0.5, 1);
        // N so large that kappa would need indices beyond the table box
        assert!(LevelSetFamily::build(&om, &params, 1 << 10).is_err());
    }
}
