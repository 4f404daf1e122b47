//! Norms of block functions: `L_q` norms, mixed moduli of smoothness, and
//! the two class norms (definition form and decomposition form).
//!
//! Multi-block `L_q` norms for q in {2, 4} are assembled from 1-D integrals
//! through the product structure of the kernels; tuples whose frequency
//! bands cannot cancel contribute exactly zero. Direct tensor-grid
//! quadrature (`lq_norm_tensor`) is kept as the low-level route and serves
//! as the cross-check oracle in tests; at realistic levels its resolution
//! requirement is unaffordable, which is why the expansion routes exist.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::kernels::{block_kernel_1d, SQRT_2_OVER_PI};
use crate::lattice::DyadicIndex;
use crate::majorant::{MajorantKind, MajorantSpec, SmoothnessParams, Theta};
use crate::model::{BlockFunction, MixedDifference};
use crate::quad::{
    block_kernel_lp_norm, difference_sq_integral, kernel_norm_1d, kernel_sq_integral,
    quartic_integral, Certified, QuadratureGrid,
};

/// Grid budgets for the definition-form class norm.
#[derive(Clone, Copy, Debug)]
pub struct NormBudgets {
    /// log2 of the number of `t`-grid points per axis.
    pub t_depth: u32,
    /// log2 of the number of step-grid points per axis (`h = t m / 2^{h_depth}`).
    pub h_depth: u32,
    /// Upper end of the dyadic substitution variable `u` (t = 2^{1-u}).
    pub u_max: f64,
    /// Cap on the number of inner Gram evaluations before giving up.
    pub work_cap: u64,
}

impl Default for NormBudgets {
    fn default() -> Self {
        NormBudgets {
            t_depth: 6,
            h_depth: 3,
            u_max: 14.0,
            work_cap: 500_000_000,
        }
    }
}

/// `L_q(R^d)` norm of a block function with a certified truncation bracket.
///
/// Dispatch: single blocks use the scaled 1-D norms; q = 2 and q = 4 use the
/// product-structure expansion; other exponents fall back to tensor
/// quadrature and are only affordable at small levels.
pub fn lq_norm(f: &BlockFunction, q: f64, grid: &QuadratureGrid) -> Result<Certified> {
    if !(q > 1.0 && q.is_finite()) {
        return Err(Error::Domain(format!("require 1 < q < inf, got {q}")));
    }
    if f.is_empty() {
        return Ok(Certified::exact(0.0));
    }
    grid.effective_ppu(f.level_max())?;
    let out = if f.coeffs().len() == 1 {
        let (s, &c) = f.coeffs().iter().next().unwrap();
        block_kernel_lp_norm(s, q, grid)?.scale(c.abs())
    } else if q == 2.0 {
        l2_norm_expansion(f)
    } else if q == 4.0 {
        l4_norm_expansion(f)?
    } else {
        lq_norm_tensor(f, q, grid)?
    };
    if out.rel_err() > grid.rel_tol && out.value != 0.0 {
        return Err(Error::Accuracy {
            what: format!("L_{q} norm certificate exceeds the requested tolerance"),
            value: out.value,
            width: out.abs_err,
            requested: grid.rel_tol,
        });
    }
    Ok(out)
}

/// Squared-sum assembly for q = 2. Cross terms vanish because distinct
/// blocks occupy disjoint frequency bands; the diagonal integrals are
/// honest 1-D quadrature.
fn l2_norm_expansion(f: &BlockFunction) -> Certified {
    let mut total = Certified::exact(0.0);
    for (s, &c) in f.coeffs() {
        let mut term = Certified::exact(c * c);
        for &m in s.coords() {
            term = term.mul(&kernel_sq_integral(m));
        }
        total.value += term.value;
        total.abs_err += term.abs_err;
    }
    sqrt_certified(total)
}

fn sqrt_certified(sq: Certified) -> Certified {
    let value = sq.value.max(0.0).sqrt();
    let hi = (sq.value + sq.abs_err).max(0.0).sqrt();
    let lo = (sq.value - sq.abs_err).max(0.0).sqrt();
    Certified {
        value,
        abs_err: (hi - value).max(value - lo),
    }
}

fn root_certified(pow: Certified, q: f64) -> Certified {
    let value = pow.value.max(0.0).powf(1.0 / q);
    let hi = (pow.value + pow.abs_err).max(0.0).powf(1.0 / q);
    let lo = (pow.value - pow.abs_err).max(0.0).powf(1.0 / q);
    Certified {
        value,
        abs_err: (hi - value).max(value - lo),
    }
}

const L4_COMBO_CAP: u64 = 1_000_000_000;

/// Fourth-power assembly: `int f^4 = sum over block 4-tuples of the product
/// of per-axis quadruple kernel integrals`.
fn l4_norm_expansion(f: &BlockFunction) -> Result<Certified> {
    let d = f.d();
    let blocks: Vec<(&DyadicIndex, f64)> = f.coeffs().iter().map(|(s, &c)| (s, c)).collect();
    let b = blocks.len();
    let combos = (b as u64 + 3) * (b as u64 + 2) * (b as u64 + 1) * b as u64 / 24;
    if combos > L4_COMBO_CAP {
        return Err(Error::Budget {
            what: format!("L_4 expansion over {b} blocks needs {combos} tuples"),
            partial: 0.0,
        });
    }

    // Per-axis compressed level lists and dense quadruple-integral tables.
    let mut axis_levels: Vec<Vec<u32>> = vec![Vec::new(); d];
    for (s, _) in &blocks {
        for (j, &m) in s.coords().iter().enumerate() {
            axis_levels[j].push(m);
        }
    }
    for levels in &mut axis_levels {
        levels.sort_unstable();
        levels.dedup();
    }
    let tables: Vec<(usize, Vec<Certified>)> = axis_levels
        .iter()
        .map(|levels| {
            let n = levels.len();
            let mut combos_sorted = Vec::new();
            for a in 0..n {
                for bb in 0..=a {
                    for c in 0..=bb {
                        for e in 0..=c {
                            combos_sorted.push([a, bb, c, e]);
                        }
                    }
                }
            }
            let computed: Vec<Certified> = combos_sorted
                .par_iter()
                .map(|&[a, bb, c, e]| {
                    quartic_integral([levels[a], levels[bb], levels[c], levels[e]])
                })
                .collect();
            let mut table = vec![Certified::exact(0.0); n * n * n * n];
            for (&[a, bb, c, e], &val) in combos_sorted.iter().zip(&computed) {
                let mut perm = [a, bb, c, e];
                perm.sort_unstable();
                // write every distinct permutation
                let mut seen = Vec::with_capacity(24);
                permute4(perm, |p| {
                    let idx = ((p[0] * n + p[1]) * n + p[2]) * n + p[3];
                    if !seen.contains(&idx) {
                        seen.push(idx);
                        table[idx] = val;
                    }
                });
            }
            (n, table)
        })
        .collect();

    let level_index: Vec<Vec<usize>> = blocks
        .iter()
        .map(|(s, _)| {
            s.coords()
                .iter()
                .enumerate()
                .map(|(j, m)| axis_levels[j].binary_search(m).unwrap())
                .collect()
        })
        .collect();

    let mut total = 0.0f64;
    let mut err = 0.0f64;
    for i in 0..b {
        for j in i..b {
            for k in j..b {
                for m in k..b {
                    let mult = tuple_multiplicity(i, j, k, m) as f64;
                    let coeff =
                        blocks[i].1 * blocks[j].1 * blocks[k].1 * blocks[m].1 * mult;
                    let mut axis_prod = Certified::exact(1.0);
                    for (axis, (n, table)) in tables.iter().enumerate() {
                        let idx = ((level_index[i][axis] * n + level_index[j][axis]) * n
                            + level_index[k][axis])
                            * n
                            + level_index[m][axis];
                        let cell = table[idx];
                        if cell.value == 0.0 && cell.abs_err == 0.0 {
                            axis_prod = Certified::exact(0.0);
                            break;
                        }
                        axis_prod = axis_prod.mul(&cell);
                    }
                    if axis_prod.value != 0.0 || axis_prod.abs_err != 0.0 {
                        total += coeff * axis_prod.value;
                        err += coeff.abs() * axis_prod.abs_err;
                    }
                }
            }
        }
    }
    Ok(root_certified(Certified {
        value: total,
        abs_err: err,
    }, 4.0))
}

fn permute4(sorted: [usize; 4], mut emit: impl FnMut([usize; 4])) {
    let [a, b, c, d] = sorted;
    let items = [a, b, c, d];
    for i0 in 0..4 {
        for i1 in 0..4 {
            if i1 == i0 {
                continue;
            }
            for i2 in 0..4 {
                if i2 == i0 || i2 == i1 {
                    continue;
                }
                let i3 = 6 - i0 - i1 - i2;
                emit([items[i0], items[i1], items[i2], items[i3]]);
            }
        }
    }
}

fn tuple_multiplicity(i: usize, j: usize, k: usize, m: usize) -> u32 {
    // permutations of the multiset {i, j, k, m} with i <= j <= k <= m
    let mut runs = Vec::with_capacity(4);
    let v = [i, j, k, m];
    let mut run = 1;
    for t in 1..4 {
        if v[t] == v[t - 1] {
            run += 1;
        } else {
            runs.push(run);
            run = 1;
        }
    }
    runs.push(run);
    let fact = [1u32, 1, 2, 6, 24];
    24 / runs.iter().map(|&r| fact[r as usize]).product::<u32>()
}

const TENSOR_POINT_CAP: u64 = 1 << 28;

/// Direct tensor-grid midpoint quadrature of `|f|^q` over `[-T, T]^d`, plus
/// the triangle-inequality tail certificate. Affordable only while
/// `(2 T ppu)^d` stays within the point cap.
pub fn lq_norm_tensor(f: &BlockFunction, q: f64, grid: &QuadratureGrid) -> Result<Certified> {
    if f.is_empty() {
        return Ok(Certified::exact(0.0));
    }
    let d = f.d();
    if d > 3 {
        return Err(Error::Domain("tensor quadrature supports d <= 3".into()));
    }
    let bulk = tensor_power_integral(|x| f.evaluate(x), d, f.level_max(), q, grid)?;
    let tail = triangle_tail(f, q, grid)?;
    Ok(Certified {
        value: bulk.powf(1.0 / q),
        abs_err: tail,
    })
}

/// `int_{[-T,T]^d} |g(x)|^q dx` by midpoint tensor quadrature.
pub(crate) fn tensor_power_integral(
    g: impl Fn(&[f64]) -> f64 + Sync,
    d: usize,
    level_max: u32,
    q: f64,
    grid: &QuadratureGrid,
) -> Result<f64> {
    let ppu = grid.effective_ppu(level_max)?;
    let t = grid.trunc_radius;
    let n_axis = ((2.0 * t * ppu).ceil() as u64).max(2);
    let total: u64 = n_axis
        .checked_pow(d as u32)
        .ok_or_else(|| Error::Budget {
            what: "tensor grid overflows".into(),
            partial: 0.0,
        })?;
    if total > TENSOR_POINT_CAP {
        return Err(Error::Budget {
            what: format!(
                "tensor grid needs {total} points (axis {n_axis}^{d}); cap is {TENSOR_POINT_CAP}"
            ),
            partial: 0.0,
        });
    }
    let h = 2.0 * t / n_axis as f64;
    let node = |i: u64| -t + (i as f64 + 0.5) * h;
    let slabs: Vec<f64> = (0..n_axis)
        .into_par_iter()
        .map(|i0| {
            let x0 = node(i0);
            let mut acc = 0.0;
            match d {
                1 => acc += g(&[x0]).abs().powf(q),
                2 => {
                    let mut x = [x0, 0.0];
                    for i1 in 0..n_axis {
                        x[1] = node(i1);
                        acc += g(&x).abs().powf(q);
                    }
                }
                3 => {
                    let mut x = [x0, 0.0, 0.0];
                    for i1 in 0..n_axis {
                        x[1] = node(i1);
                        for i2 in 0..n_axis {
                            x[2] = node(i2);
                            acc += g(&x).abs().powf(q);
                        }
                    }
                }
                _ => unreachable!(),
            }
            acc
        })
        .collect();
    Ok(slabs.iter().sum::<f64>() * h.powi(d as i32))
}

/// Envelope constant of the 1-D kernel at level `m`: `|g_m(x)| <= env/|x|`.
fn kernel_envelope(m: u32) -> f64 {
    if m == 0 {
        SQRT_2_OVER_PI
    } else {
        2.0 * SQRT_2_OVER_PI
    }
}

/// `|| f 1_{outside [-T,T]^d} ||_q <= sum_s |c_s| tail_block(s)` with the
/// per-axis union bound `tail^q <= sum_j t_j^q prod_{i != j} n_i^q`.
fn triangle_tail(f: &BlockFunction, q: f64, grid: &QuadratureGrid) -> Result<f64> {
    let t = grid.trunc_radius;
    let mut tail = 0.0;
    for (s, &c) in f.coeffs() {
        let mut axis_norm = Vec::new();
        let mut axis_tail = Vec::new();
        for &m in s.coords() {
            let n = kernel_norm_1d(m, q, grid.rel_tol)?;
            axis_norm.push(n.value + n.abs_err);
            let env = kernel_envelope(m);
            axis_tail.push((2.0 * env.powf(q) * t.powf(1.0 - q) / (q - 1.0)).powf(1.0 / q));
        }
        let mut block_tail_q = 0.0;
        for j in 0..s.dim() {
            let mut term = axis_tail[j].powf(q);
            for (i, n) in axis_norm.iter().enumerate() {
                if i != j {
                    term *= n.powf(q);
                }
            }
            block_tail_q += term;
        }
        tail += c.abs() * block_tail_q.powf(1.0 / q);
    }
    Ok(tail)
}

/// `|| Delta^l_h f ||_2` from cached 1-D difference integrals; cross terms
/// vanish by disjoint frequency supports.
pub fn difference_l2_norm(
    f: &BlockFunction,
    l: u32,
    axes: &[usize],
    steps: &[f64],
    grid: &QuadratureGrid,
) -> Result<Certified> {
    let mut total = Certified::exact(0.0);
    for (s, &c) in f.coeffs() {
        let mut term = Certified::exact(c * c);
        for (j, &m) in s.coords().iter().enumerate() {
            let factor = match axes.iter().position(|&a| a == j) {
                Some(pos) => difference_sq_integral(m, steps[pos], l, grid)?,
                None => kernel_sq_integral(m),
            };
            term = term.mul(&factor);
        }
        total.value += term.value;
        total.abs_err += term.abs_err;
    }
    Ok(sqrt_certified(total))
}

/// Mixed modulus of smoothness `Omega_l(f, t)_q` as a grid supremum over
/// steps `h_j = t_j m / 2^{h_depth}`, `m = 1..2^{h_depth}` (a lower
/// approximation of the analytic supremum).
///
/// q = 2 runs through the expansion route at any level; other exponents fall
/// back to tensor quadrature of the difference and are only affordable at
/// small levels.
pub fn mixed_modulus(
    f: &BlockFunction,
    l: u32,
    t: &[f64],
    q: f64,
    axes: &[usize],
    grid: &QuadratureGrid,
    h_depth: u32,
) -> Result<f64> {
    if axes.is_empty() || axes.len() != t.len() {
        return Err(Error::Domain("modulus needs one t per differenced axis".into()));
    }
    if t.iter().any(|&tj| !(tj > 0.0 && tj <= 2.0)) {
        return Err(Error::Domain(format!("t must lie in (0, 2]^e, got {t:?}")));
    }
    if f.is_empty() {
        return Ok(0.0);
    }
    let n_h = 1u64 << h_depth;
    let mut best = 0.0f64;
    let mut combo = vec![1u64; axes.len()];
    loop {
        let steps: Vec<f64> = combo
            .iter()
            .zip(t)
            .map(|(&m, &tj)| tj * m as f64 / n_h as f64)
            .collect();
        let norm = if q == 2.0 {
            difference_l2_norm(f, l, axes, &steps, grid)?.value
        } else {
            let diff = MixedDifference::new(f, l, axes, &steps)?;
            tensor_power_integral(|x| diff.evaluate(x), f.d(), f.level_max(), q, grid)?
                .powf(1.0 / q)
        };
        best = best.max(norm);
        // odometer over step multipliers
        let mut axis = 0;
        loop {
            if axis == combo.len() {
                return Ok(best);
            }
            if combo[axis] < n_h {
                combo[axis] += 1;
                for c in combo.iter_mut().take(axis) {
                    *c = 1;
                }
                break;
            }
            axis += 1;
        }
    }
}

/// Decomposition-form class norm:
/// `( sum_s (Omega(2^{-s})^{-1} ||delta_s f||_p)^theta )^{1/theta}`, supremum
/// form for theta = inf. Exact up to block-norm quadrature.
pub fn decomposition_norm(
    f: &BlockFunction,
    omega: &MajorantSpec,
    params: &SmoothnessParams,
) -> Result<f64> {
    let grid = QuadratureGrid::default();
    let mut terms = Vec::new();
    for (s, &c) in f.coeffs() {
        let norm = block_kernel_lp_norm(s, params.p, &grid)?;
        let w = omega.omega_dyadic(s)?;
        terms.push(c.abs() * norm.value / w);
    }
    Ok(match params.theta {
        Theta::Infinite => terms.into_iter().fold(0.0, f64::max),
        Theta::Finite(th) => terms
            .into_iter()
            .map(|r| r.powf(th))
            .sum::<f64>()
            .powf(1.0 / th),
    })
}

/// Definition-form class norm
/// `||f||_p + sum_{e != 0} ( int (Omega_l(f, t^e)_p / Omega(t-bar^e))^theta
/// prod dt_j/t_j )^{1/theta}`, integrals in the dyadic substitution
/// `t = 2^{1-u}` on a midpoint grid of `2^{t_depth}` points per axis
/// (integer `u` for table majorants). A grid approximation by construction;
/// only used in bounded-ratio checks.
pub fn definition_norm(
    f: &BlockFunction,
    omega: &MajorantSpec,
    params: &SmoothnessParams,
    budgets: &NormBudgets,
    grid: &QuadratureGrid,
) -> Result<f64> {
    if params.d > 2 {
        return Err(Error::Domain(
            "definition norm is exponential in d; supported for d <= 2".into(),
        ));
    }
    if params.p != 2.0 {
        return Err(Error::Domain(
            "definition norm runs through the L_2 expansion route; p = 2 required".into(),
        ));
    }
    if f.is_empty() {
        return Ok(0.0);
    }
    let d = params.d;
    let l = params.l;

    // u-grid of the substitution t = 2^{1-u}
    let (u_values, u_weight): (Vec<f64>, f64) = match omega.kind() {
        MajorantKind::Table { box_bound, .. } => {
            let max_u = (*box_bound + 1).min(budgets.u_max.floor() as u32);
            ((1..=max_u).map(|u| u as f64).collect(), 1.0)
        }
        MajorantKind::PowerLog { .. } => {
            let n_t = 1u64 << budgets.t_depth;
            let du = budgets.u_max / n_t as f64;
            (
                (0..n_t).map(|k| (k as f64 + 0.5) * du).collect(),
                du,
            )
        }
    };
    let n_h = 1u64 << budgets.h_depth;

    let mut total = lq_norm(f, params.p, grid)?.value;
    let mut partial_ok = total;

    for mask in 1u32..(1 << d) {
        let axes: Vec<usize> = (0..d).filter(|j| mask & (1 << j) != 0).collect();
        let e = axes.len();
        let work = (u_values.len() as u64 * n_h).pow(e as u32) * f.coeffs().len() as u64;
        if work > budgets.work_cap {
            return Err(Error::Budget {
                what: format!("definition norm subset {axes:?} needs {work} evaluations"),
                partial: partial_ok,
            });
        }

        let term = subset_term(
            f, omega, params, &axes, &u_values, u_weight, n_h, l, grid,
        )?;
        total += term;
        partial_ok = total;
    }
    Ok(total)
}

/// One subset contribution to the definition norm.
#[allow(clippy::too_many_arguments)]
fn subset_term(
    f: &BlockFunction,
    omega: &MajorantSpec,
    params: &SmoothnessParams,
    axes: &[usize],
    u_values: &[f64],
    u_weight: f64,
    n_h: u64,
    l: u32,
    grid: &QuadratureGrid,
) -> Result<f64> {
    let d = params.d;
    let e = axes.len();
    let blocks: Vec<(&DyadicIndex, f64)> = f.coeffs().iter().map(|(s, &c)| (s, c)).collect();

    // Prefetch per-axis factors. Axes outside the subset contribute the
    // plain squared kernel norms.
    let mut undiff: Vec<Vec<f64>> = vec![Vec::new(); blocks.len()];
    for (bi, (s, _)) in blocks.iter().enumerate() {
        for (j, &m) in s.coords().iter().enumerate() {
            if !axes.contains(&j) {
                undiff[bi].push(kernel_sq_integral(m).value);
            }
        }
    }
    // For subset axes: D[axis_pos][u_idx][h_idx][block] = difference integral.
    // Deduplicate (level, step) pairs, warm the cache in parallel, then fill.
    let mut uniq: std::collections::BTreeSet<(u32, u64)> = std::collections::BTreeSet::new();
    for (pos, _) in axes.iter().enumerate() {
        for &u in u_values {
            let t = f64::exp2(1.0 - u);
            for hm in 1..=n_h {
                let h = t * hm as f64 / n_h as f64;
                for (s, _) in &blocks {
                    uniq.insert((s.coords()[axes[pos]], h.to_bits()));
                }
            }
        }
    }
    let uniq: Vec<(u32, u64)> = uniq.into_iter().collect();
    uniq.par_iter()
        .map(|&(m, hb)| difference_sq_integral(m, f64::from_bits(hb), l, grid).map(|_| ()))
        .collect::<Result<Vec<()>>>()?;
    let nu = u_values.len();
    let nh = n_h as usize;
    let nb = blocks.len();
    let mut dtab = vec![0.0f64; e * nu * nh * nb];
    for (pos, _) in axes.iter().enumerate() {
        for (ui, &u) in u_values.iter().enumerate() {
            let t = f64::exp2(1.0 - u);
            for hm in 1..=n_h {
                let h = t * hm as f64 / n_h as f64;
                for (bi, (s, _)) in blocks.iter().enumerate() {
                    let d_val =
                        difference_sq_integral(s.coords()[axes[pos]], h, l, grid)?.value;
                    dtab[((pos * nu + ui) * nh + hm as usize - 1) * nb + bi] = d_val;
                }
            }
        }
    }

    // Sweep t-combinations, taking the grid supremum over h inside.
    let mut acc = 0.0f64; // theta-integral accumulator
    let mut sup = 0.0f64; // theta = inf accumulator
    let mut t_combo = vec![0usize; e];
    loop {
        // modulus at this t: max over h multipliers
        let mut best_sq = 0.0f64;
        let mut h_combo = vec![0usize; e];
        let mut h_done = false;
        while !h_done {
            let mut sum = 0.0;
            for bi in 0..nb {
                let mut term = blocks[bi].1 * blocks[bi].1;
                for u in &undiff[bi] {
                    term *= u;
                }
                for (pos, &ti) in t_combo.iter().enumerate() {
                    term *= dtab[((pos * nu + ti) * nh + h_combo[pos]) * nb + bi];
                }
                sum += term;
            }
            best_sq = best_sq.max(sum);
            let mut axis = 0;
            loop {
                if axis == e {
                    h_done = true;
                    break;
                }
                if h_combo[axis] + 1 < nh {
                    h_combo[axis] += 1;
                    for c in h_combo.iter_mut().take(axis) {
                        *c = 0;
                    }
                    break;
                }
                axis += 1;
            }
        }
        let modulus = best_sq.max(0.0).sqrt();

        // Omega(t-bar^e): subset coordinates at t, the rest at 1.
        let mut tbar = vec![1.0f64; d];
        for (pos, &axis) in axes.iter().enumerate() {
            tbar[axis] = f64::exp2(1.0 - u_values[t_combo[pos]]);
        }
        let om = omega.evaluate(&tbar)?;
        let ratio = if om > 0.0 { modulus / om } else { 0.0 };
        match params.theta {
            Theta::Infinite => sup = sup.max(ratio),
            Theta::Finite(th) => {
                acc += ratio.powf(th) * (std::f64::consts::LN_2 * u_weight).powi(e as i32)
            }
        }

        let mut axis = 0;
        loop {
            if axis == e {
                return Ok(match params.theta {
                    Theta::Infinite => sup,
                    Theta::Finite(th) => acc.powf(1.0 / th),
                });
            }
            if t_combo[axis] + 1 < nu {
                t_combo[axis] += 1;
                for c in t_combo.iter_mut().take(axis) {
                    *c = 0;
                }
                break;
            }
            axis += 1;
        }
    }
}

/// Littlewood-Paley square function norm
/// `S(f)_p = || ( sum_s |delta_s f|^2 )^{1/2} ||_p` for p in {2, 4}.
pub fn square_function_norm(f: &BlockFunction, p: f64) -> Result<Certified> {
    if f.is_empty() {
        return Ok(Certified::exact(0.0));
    }
    if p == 2.0 {
        return Ok(l2_norm_expansion(f));
    }
    if p != 4.0 {
        return Err(Error::Domain(
            "square function norm implemented for p in {2, 4}".into(),
        ));
    }
    // S^4 = int (sum_s c_s^2 B_s^2)^2 = pair sums of quadruple integrals
    let blocks: Vec<(&DyadicIndex, f64)> = f.coeffs().iter().map(|(s, &c)| (s, c)).collect();
    let mut total = 0.0;
    let mut err = 0.0;
    for (si, &(s1, c1)) in blocks.iter().enumerate() {
        for &(s2, c2) in blocks.iter().skip(si) {
            let mult = if std::ptr::eq(s1, s2) { 1.0 } else { 2.0 };
            let mut term = Certified::exact(1.0);
            for (&m1, &m2) in s1.coords().iter().zip(s2.coords()) {
                term = term.mul(&quartic_integral([m1, m1, m2, m2]));
            }
            total += mult * c1 * c1 * c2 * c2 * term.value;
            err += mult * c1 * c1 * c2 * c2 * term.abs_err;
        }
    }
    Ok(root_certified(
        Certified {
            value: total,
            abs_err: err,
        },
        4.0,
    ))
}

/// `S(f)_p / ||f||_p`; exactly 1 for single blocks.
pub fn littlewood_paley_ratio(f: &BlockFunction, p: f64, grid: &QuadratureGrid) -> Result<f64> {
    let norm = lq_norm(f, p, grid)?;
    if norm.value == 0.0 {
        return Err(Error::Degenerate("Littlewood-Paley ratio of the zero function".into()));
    }
    let sq = square_function_norm(f, p)?;
    Ok(sq.value / norm.value)
}

/// Frequency-side closed form of `||Delta^l_h g_m||_2^2` for order 1
/// differences (test oracle for the modulus route).
pub fn difference_sq_spectral_order1(m: u32, h: f64) -> f64 {
    let a = crate::kernels::band_lower(m);
    let b = crate::kernels::band_upper(m);
    2.0 * (2.0 * (b - a) - (2.0 / h) * ((b * h).sin() - (a * h).sin()))
}

/// Sanity evaluator used by tests: the block kernel really is the product of
/// its 1-D factors.
pub fn block_eval_1d(m: u32, x: f64) -> f64 {
    block_kernel_1d(m, x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quad::parseval_l2_norm;

    fn idx(s: &[u32]) -> DyadicIndex {
        DyadicIndex::new(s.to_vec())
    }

    fn loose_grid() -> QuadratureGrid {
        QuadratureGrid {
            trunc_radius: 32.0,
            points_per_unit: None,
            rel_tol: 0.2,
        }
    }

    #[test]
    fn lq_norm_zero_function() {
        let f = BlockFunction::zero(2);
        assert_eq!(lq_norm(&f, 2.0, &QuadratureGrid::default()).unwrap().value, 0.0);
    }

    #[test]
    fn lq_norm_single_block_is_scaled_kernel_norm() {
        let f = BlockFunction::new(1, [(idx(&[3]), -2.5)]).unwrap();
        let grid = QuadratureGrid::default();
        let got = lq_norm(&f, 2.0, &grid).unwrap();
        let expected = 2.5 * parseval_l2_norm(&idx(&[3]));
        assert!((got.value - expected).abs() < 2e-3 * expected);
    }

    #[test]
    fn l2_expansion_matches_parseval_closed_form() {
        // || f ||_2 = sqrt( sum c_s^2 2^{||s||_1} ) for strictly positive levels
        let f = BlockFunction::new(
            2,
            [
                (idx(&[1, 2]), 0.5),
                (idx(&[2, 1]), -1.0),
                (idx(&[3, 3]), 0.25),
            ],
        )
        .unwrap();
        let expected = (0.25 * f64::exp2(3.0) + 1.0 * f64::exp2(3.0)
            + 0.0625 * f64::exp2(6.0))
        .sqrt();
        let got = lq_norm(&f, 2.0, &QuadratureGrid::default()).unwrap();
        assert!(
            (got.value - expected).abs() < 1e-3 * expected,
            "{} vs {expected}",
            got.value
        );
    }

    #[test]
    fn l2_expansion_matches_tensor_quadrature() {
        let f = BlockFunction::new(2, [(idx(&[1, 0]), 1.0), (idx(&[0, 2]), 0.5)]).unwrap();
        let grid = loose_grid();
        let fast = l2_norm_expansion(&f);
        let slow = lq_norm_tensor(&f, 2.0, &grid).unwrap();
        assert!(
            (fast.value - slow.value).abs() <= slow.abs_err + fast.abs_err + 1e-3,
            "fast {} vs tensor {} (certs {} / {})",
            fast.value,
            slow.value,
            fast.abs_err,
            slow.abs_err
        );
    }

    #[test]
    fn l4_expansion_matches_tensor_quadrature_1d() {
        let f = BlockFunction::new(1, [(idx(&[1]), 1.0), (idx(&[3]), -0.5)]).unwrap();
        let fast = l4_norm_expansion(&f).unwrap();
        let grid = QuadratureGrid {
            trunc_radius: 256.0,
            points_per_unit: None,
            rel_tol: 0.2,
        };
        let slow = lq_norm_tensor(&f, 4.0, &grid).unwrap();
        assert!(
            (fast.value - slow.value).abs() < 2e-3 * fast.value.max(0.1),
            "fast {} vs tensor {}",
            fast.value,
            slow.value
        );
    }

    #[test]
    fn l4_expansion_matches_tensor_quadrature_2d() {
        let f = BlockFunction::new(2, [(idx(&[1, 1]), 1.0), (idx(&[2, 0]), 0.7)]).unwrap();
        let fast = l4_norm_expansion(&f).unwrap();
        let grid = QuadratureGrid {
            trunc_radius: 48.0,
            points_per_unit: None,
            rel_tol: 0.5,
        };
        let slow = lq_norm_tensor(&f, 4.0, &grid).unwrap();
        assert!(
            (fast.value - slow.value).abs() < 5e-3 * fast.value,
            "fast {} vs tensor {}",
            fast.value,
            slow.value
        );
    }

    #[test]
    fn doubling_truncation_stays_within_certificate() {
        let f = BlockFunction::new(1, [(idx(&[1]), 1.0), (idx(&[2]), 0.5)]).unwrap();
        let g1 = QuadratureGrid {
            trunc_radius: 64.0,
            points_per_unit: None,
            rel_tol: 1.0,
        };
        let g2 = QuadratureGrid {
            trunc_radius: 128.0,
            points_per_unit: None,
            rel_tol: 1.0,
        };
        let a = lq_norm_tensor(&f, 4.0, &g1).unwrap();
        let b = lq_norm_tensor(&f, 4.0, &g2).unwrap();
        assert!((a.value - b.value).abs() <= a.abs_err + b.abs_err);
    }

    #[test]
    fn modulus_monotone_endpoints() {
        let f = BlockFunction::new(1, [(idx(&[2]), 1.0)]).unwrap();
        let grid = QuadratureGrid {
            trunc_radius: 512.0,
            points_per_unit: None,
            rel_tol: 0.1,
        };
        let tiny = mixed_modulus(&f, 1, &[f64::exp2(-20.0)], 2.0, &[0], &grid, 3).unwrap();
        let big = mixed_modulus(&f, 1, &[1.0], 2.0, &[0], &grid, 3).unwrap();
        assert!(tiny < big, "{tiny} vs {big}");
        assert!(tiny < 1e-3);
    }

    #[test]
    fn modulus_bounded_by_triangle_inequality() {
        let f = BlockFunction::new(1, [(idx(&[1]), 0.7), (idx(&[3]), -0.2)]).unwrap();
        let grid = QuadratureGrid {
            trunc_radius: 512.0,
            points_per_unit: None,
            rel_tol: 0.1,
        };
        let modulus = mixed_modulus(&f, 1, &[2.0], 2.0, &[0], &grid, 3).unwrap();
        let bound = f64::exp2(1.0) * lq_norm(&f, 2.0, &QuadratureGrid::default()).unwrap().value;
        assert!(modulus <= bound * (1.0 + 1e-6), "{modulus} vs {bound}");
    }

    #[test]
    fn modulus_matches_spectral_closed_form() {
        // single block, l = 1, q = 2: the grid sup equals the max over the
        // same h grid of the frequency-side values
        let f = BlockFunction::new(1, [(idx(&[2]), 1.0)]).unwrap();
        let grid = QuadratureGrid {
            trunc_radius: 4096.0,
            points_per_unit: None,
            rel_tol: 0.1,
        };
        let h_depth = 3;
        let got = mixed_modulus(&f, 1, &[1.0], 2.0, &[0], &grid, h_depth).unwrap();
        let n_h = 1 << h_depth;
        let expected = (1..=n_h)
            .map(|m| difference_sq_spectral_order1(2, m as f64 / n_h as f64).sqrt())
            .fold(0.0f64, f64::max);
        assert!(
            (got - expected).abs() < 1e-3 * expected,
            "{got} vs {expected}"
        );
    }

    #[test]
    fn decomposition_norm_single_block() {
        use crate::majorant::MajorantSpec;
        let om = MajorantSpec::power(1, 1, vec![0.6]).unwrap();
        let params = SmoothnessParams::new(2.0, 4.0, Theta::Finite(2.0), 1, 0.6, 1).unwrap();
        let f = BlockFunction::new(1, [(idx(&[2]), 0.5)]).unwrap();
        let got = decomposition_norm(&f, &om, &params).unwrap();
        let expected = 0.5 * parseval_l2_norm(&idx(&[2])) / f64::exp2(-1.2);
        assert!((got - expected).abs() < 2e-3 * expected);
    }

    #[test]
    fn decomposition_norm_sup_form_of_equal_ratios() {
        use crate::majorant::MajorantSpec;
        let om = MajorantSpec::power(1, 1, vec![0.5]).unwrap();
        let params = SmoothnessParams::new(2.0, 4.0, Theta::Infinite, 1, 0.5, 1).unwrap();
        // choose coefficients so both blocks have the same normalized ratio
        let r1 = parseval_l2_norm(&idx(&[1])) / f64::exp2(-0.5);
        let r2 = parseval_l2_norm(&idx(&[3])) / f64::exp2(-1.5);
        let f = BlockFunction::new(1, [(idx(&[1]), 1.0 / r1), (idx(&[3]), 1.0 / r2)]).unwrap();
        let got = decomposition_norm(&f, &om, &params).unwrap();
        assert!((got - 1.0).abs() < 2e-3, "{got}");
    }

    #[test]
    fn norm_homogeneity() {
        use crate::majorant::MajorantSpec;
        let om = MajorantSpec::power(1, 1, vec![0.6]).unwrap();
        let params = SmoothnessParams::new(2.0, 4.0, Theta::Finite(2.0), 1, 0.6, 1).unwrap();
        let f = BlockFunction::new(1, [(idx(&[1]), 0.3), (idx(&[2]), -0.8)]).unwrap();
        let one = decomposition_norm(&f, &om, &params).unwrap();
        let two = decomposition_norm(&f.scaled(2.0), &om, &params).unwrap();
        assert!((two - 2.0 * one).abs() < 1e-12 * one);

        let budgets = NormBudgets {
            t_depth: 4,
            h_depth: 2,
            ..NormBudgets::default()
        };
        let grid = QuadratureGrid {
            trunc_radius: 256.0,
            points_per_unit: None,
            rel_tol: 0.2,
        };
        let d1 = definition_norm(&f, &om, &params, &budgets, &grid).unwrap();
        let d2 = definition_norm(&f.scaled(2.0), &om, &params, &budgets, &grid).unwrap();
        assert!(d1 > 0.0);
        assert!((d2 - 2.0 * d1).abs() < 1e-9 * d1, "{d2} vs 2*{d1}");
    }

    #[test]
    fn definition_norm_zero_function() {
        use crate::majorant::MajorantSpec;
        let om = MajorantSpec::power(1, 1, vec![0.6]).unwrap();
        let params = SmoothnessParams::new(2.0, 4.0, Theta::Finite(2.0), 1, 0.6, 1).unwrap();
        let got = definition_norm(
            &BlockFunction::zero(1),
            &om,
            &params,
            &NormBudgets::default(),
            &QuadratureGrid::default(),
        )
        .unwrap();
        assert_eq!(got, 0.0);
    }

    #[test]
    fn square_function_ratio_is_one_for_single_block() {
        let f = BlockFunction::new(2, [(idx(&[1, 2]), 0.8)]).unwrap();
        let grid = QuadratureGrid::default();
        for p in [2.0, 4.0] {
            let ratio = littlewood_paley_ratio(&f, p, &grid).unwrap();
            assert!((ratio - 1.0).abs() < 1e-9, "p={p}: {ratio}");
        }
    }

    #[test]
    fn square_function_p2_matches_parseval() {
        let f = BlockFunction::new(1, [(idx(&[1]), 1.0), (idx(&[4]), -0.3)]).unwrap();
        let s2 = square_function_norm(&f, 2.0).unwrap();
        let expected = (1.0 * f64::exp2(1.0) + 0.09 * f64::exp2(4.0)).sqrt();
        assert!((s2.value - expected).abs() < 1e-3 * expected);
    }
}
