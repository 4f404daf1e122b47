//! Majorants of mixed-modulus type and the structural conditions imposed on
//! them.
//!
//! A majorant is either a product power-log family
//! `prod_j t_j^{r_j} / {log2(1/t_j)}_+^{b_j}` or an explicit table of values
//! at dyadic points `2^{-s}`. All downstream machinery (index sets, class
//! norms) consumes only dyadic evaluations, so a table on a full box is a
//! complete description.
//!
//! Condition checks run on finite dyadic grids; a pass means "consistent
//! with" the condition, never a proof.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::DyadicIndex;

/// `{log2 tau}_+ = max(1, log2 tau)`.
pub fn log2_plus(tau: f64) -> f64 {
    tau.log2().max(1.0)
}

/// Summation index of the class: finite theta or the Nikolskii case.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Theta {
    Finite(f64),
    Infinite,
}

impl Theta {
    pub fn is_infinite(self) -> bool {
        matches!(self, Theta::Infinite)
    }

    /// Finite value, if any.
    pub fn finite(self) -> Option<f64> {
        match self {
            Theta::Finite(v) => Some(v),
            Theta::Infinite => None,
        }
    }
}

impl Serialize for Theta {
    fn serialize<S: serde::Serializer>(&self, ser: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Theta::Finite(v) => ser.serialize_f64(*v),
            Theta::Infinite => ser.serialize_str("inf"),
        }
    }
}

impl<'de> Deserialize<'de> for Theta {
    fn deserialize<D: serde::Deserializer<'de>>(de: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Str(String),
        }
        match Raw::deserialize(de)? {
            Raw::Num(v) => Ok(Theta::Finite(v)),
            Raw::Str(s) if s == "inf" => Ok(Theta::Infinite),
            Raw::Str(s) => Err(serde::de::Error::custom(format!(
                "theta must be a number or \"inf\", got {s:?}"
            ))),
        }
    }
}

/// The tuple (p, q, theta, l, alpha, d) governing class and metric.
///
/// `beta = 1/p - 1/q`. The degenerate p = q (beta = 0) is accepted so that
/// experiments can measure errors in the class's own metric.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SmoothnessParams {
    pub p: f64,
    pub q: f64,
    pub theta: Theta,
    pub l: u32,
    pub alpha: f64,
    pub d: usize,
}

impl SmoothnessParams {
    pub fn new(p: f64, q: f64, theta: Theta, l: u32, alpha: f64, d: usize) -> Result<Self> {
        let params = SmoothnessParams {
            p,
            q,
            theta,
            l,
            alpha,
            d,
        };
        params.validate()?;
        Ok(params)
    }

    pub fn validate(&self) -> Result<()> {
        if self.d == 0 {
            return Err(Error::Config("dimension d must be >= 1".into()));
        }
        if self.l == 0 {
            return Err(Error::Config("modulus order l must be >= 1".into()));
        }
        if !(self.p > 1.0 && self.p.is_finite()) {
            return Err(Error::Config(format!("require 1 < p < inf, got p = {}", self.p)));
        }
        if !(self.q >= self.p && self.q.is_finite()) {
            return Err(Error::Config(format!(
                "require p <= q < inf, got p = {}, q = {}",
                self.p, self.q
            )));
        }
        if let Theta::Finite(t) = self.theta {
            if !(t >= 1.0 && t.is_finite()) {
                return Err(Error::Config(format!("require 1 <= theta <= inf, got {t}")));
            }
        }
        let beta = self.beta();
        if !(self.alpha > beta && self.alpha > 0.0) {
            return Err(Error::Config(format!(
                "require alpha > beta = 1/p - 1/q (alpha = {}, beta = {beta})",
                self.alpha
            )));
        }
        if beta >= 1.0 {
            return Err(Error::Config(format!("require beta = 1/p - 1/q < 1, got {beta}")));
        }
        Ok(())
    }

    /// beta = 1/p - 1/q.
    pub fn beta(&self) -> f64 {
        1.0 / self.p - 1.0 / self.q
    }
}

/// One entry of a table majorant: value at the dyadic point `2^{-s}`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TableEntry {
    pub s: Vec<u32>,
    pub v: f64,
}

#[derive(Clone, Debug)]
pub enum MajorantKind {
    /// `prod_j t_j^{r_j} / {log2(1/t_j)}_+^{b_j}`.
    PowerLog { r: Vec<f64>, b: Vec<f64> },
    /// Explicit dyadic values on the full box `[0, box_bound]^d`.
    Table {
        values: BTreeMap<DyadicIndex, f64>,
        box_bound: u32,
    },
}

/// A majorant of mixed-modulus type of order `l` in dimension `d`.
#[derive(Clone, Debug)]
pub struct MajorantSpec {
    d: usize,
    l: u32,
    kind: MajorantKind,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct MajorantRaw {
    d: usize,
    l: u32,
    kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    r: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    b: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    values: Option<Vec<TableEntry>>,
}

impl Serialize for MajorantSpec {
    fn serialize<S: serde::Serializer>(&self, ser: S) -> std::result::Result<S::Ok, S::Error> {
        let raw = match &self.kind {
            MajorantKind::PowerLog { r, b } => MajorantRaw {
                d: self.d,
                l: self.l,
                kind: "power_log".into(),
                r: Some(r.clone()),
                b: Some(b.clone()),
                values: None,
            },
            MajorantKind::Table { values, .. } => MajorantRaw {
                d: self.d,
                l: self.l,
                kind: "table".into(),
                r: None,
                b: None,
                values: Some(
                    values
                        .iter()
                        .map(|(s, v)| TableEntry {
                            s: s.coords().to_vec(),
                            v: *v,
                        })
                        .collect(),
                ),
            },
        };
        raw.serialize(ser)
    }
}

impl<'de> Deserialize<'de> for MajorantSpec {
    fn deserialize<D: serde::Deserializer<'de>>(de: D) -> std::result::Result<Self, D::Error> {
        let raw = MajorantRaw::deserialize(de)?;
        let spec = match raw.kind.as_str() {
            "power_log" => {
                let r = raw
                    .r
                    .ok_or_else(|| serde::de::Error::custom("power_log majorant needs field r"))?;
                let b = raw
                    .b
                    .ok_or_else(|| serde::de::Error::custom("power_log majorant needs field b"))?;
                MajorantSpec::power_log(raw.d, raw.l, r, b)
            }
            "table" => {
                let values = raw
                    .values
                    .ok_or_else(|| serde::de::Error::custom("table majorant needs field values"))?;
                MajorantSpec::table(raw.d, raw.l, values)
            }
            other => Err(Error::Config(format!("unknown majorant kind {other:?}"))),
        };
        spec.map_err(serde::de::Error::custom)
    }
}

impl MajorantSpec {
    /// Product power-log majorant. Requires `0 < r_j < l` per axis.
    pub fn power_log(d: usize, l: u32, r: Vec<f64>, b: Vec<f64>) -> Result<Self> {
        if d == 0 || l == 0 {
            return Err(Error::Config("majorant needs d >= 1 and l >= 1".into()));
        }
        if r.len() != d || b.len() != d {
            return Err(Error::Config(format!(
                "power_log majorant in dimension {d} needs {d} exponents r and b"
            )));
        }
        for (j, &rj) in r.iter().enumerate() {
            if !(rj > 0.0 && rj < l as f64) {
                return Err(Error::Config(format!(
                    "power_log exponent r[{j}] = {rj} violates 0 < r_j < l = {l}"
                )));
            }
        }
        if b.iter().any(|bj| !bj.is_finite()) {
            return Err(Error::Config("log exponents b must be finite".into()));
        }
        Ok(MajorantSpec {
            d,
            l,
            kind: MajorantKind::PowerLog { r, b },
        })
    }

    /// Pure power law (all `b_j = 0`).
    pub fn power(d: usize, l: u32, r: Vec<f64>) -> Result<Self> {
        let b = vec![0.0; d];
        MajorantSpec::power_log(d, l, r, b)
    }

    /// Table majorant; the entries must cover a full box `[0, K]^d` and be
    /// strictly positive.
    pub fn table(d: usize, l: u32, entries: Vec<TableEntry>) -> Result<Self> {
        if d == 0 || l == 0 {
            return Err(Error::Config("majorant needs d >= 1 and l >= 1".into()));
        }
        if entries.is_empty() {
            return Err(Error::Config("table majorant needs at least one entry".into()));
        }
        let mut values = BTreeMap::new();
        let mut box_bound = 0u32;
        for e in &entries {
            if e.s.len() != d {
                return Err(Error::Config(format!(
                    "table index {:?} has wrong dimension (expected {d})",
                    e.s
                )));
            }
            if !(e.v > 0.0 && e.v.is_finite()) {
                return Err(Error::Config(format!(
                    "table value at {:?} must be positive and finite, got {}",
                    e.s, e.v
                )));
            }
            box_bound = box_bound.max(e.s.iter().copied().max().unwrap_or(0));
            if values.insert(DyadicIndex::new(e.s.clone()), e.v).is_some() {
                return Err(Error::Config(format!("duplicate table index {:?}", e.s)));
            }
        }
        let expected = ((box_bound as u64) + 1).pow(d as u32);
        if values.len() as u64 != expected {
            return Err(Error::Config(format!(
                "table majorant must cover the full box [0,{box_bound}]^{d}: \
                 expected {expected} entries, got {}",
                values.len()
            )));
        }
        Ok(MajorantSpec {
            d,
            l,
            kind: MajorantKind::Table { values, box_bound },
        })
    }

    /// Build a table majorant from a closure on dyadic indices.
    pub fn table_from_fn(
        d: usize,
        l: u32,
        box_bound: u32,
        f: impl Fn(&[u32]) -> f64,
    ) -> Result<Self> {
        let mut entries = Vec::new();
        let mut s = vec![0u32; d];
        loop {
            entries.push(TableEntry {
                s: s.clone(),
                v: f(&s),
            });
            // odometer over the box
            let mut axis = 0;
            loop {
                if axis == d {
                    return MajorantSpec::table(d, l, entries);
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

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn l(&self) -> u32 {
        self.l
    }

    pub fn kind(&self) -> &MajorantKind {
        &self.kind
    }

    /// Largest dyadic grid depth on which this majorant can be evaluated
    /// (unbounded for the power-log family).
    pub fn max_depth(&self) -> Option<u32> {
        match &self.kind {
            MajorantKind::PowerLog { .. } => None,
            MajorantKind::Table { box_bound, .. } => Some(*box_bound),
        }
    }

    /// Evaluate at a point of `[0, 2]^d`. Returns 0 whenever a coordinate
    /// vanishes. Table majorants accept only dyadic points `2^{-s}`.
    pub fn evaluate(&self, t: &[f64]) -> Result<f64> {
        if t.len() != self.d {
            return Err(Error::Domain(format!(
                "point has dimension {}, majorant has dimension {}",
                t.len(),
                self.d
            )));
        }
        for &tj in t {
            if !(0.0..=2.0).contains(&tj) {
                return Err(Error::Domain(format!("coordinate {tj} outside [0, 2]")));
            }
        }
        if t.iter().any(|&tj| tj == 0.0) {
            return Ok(0.0);
        }
        match &self.kind {
            MajorantKind::PowerLog { r, b } => {
                let mut value = 1.0;
                for j in 0..self.d {
                    value *= t[j].powf(r[j]) / log2_plus(1.0 / t[j]).powf(b[j]);
                }
                Ok(value)
            }
            MajorantKind::Table { .. } => {
                let mut s = Vec::with_capacity(self.d);
                for &tj in t {
                    let k = -tj.log2();
                    let rounded = k.round();
                    if (k - rounded).abs() > 1e-12 || rounded < 0.0 {
                        return Err(Error::Domain(format!(
                            "table majorant evaluated at non-dyadic coordinate {tj}"
                        )));
                    }
                    s.push(rounded as u32);
                }
                self.omega_dyadic(&DyadicIndex::new(s))
            }
        }
    }

    /// `Omega(2^{-s})`.
    pub fn omega_dyadic(&self, s: &DyadicIndex) -> Result<f64> {
        Ok(f64::exp2(self.log2_omega_dyadic(s)?))
    }

    /// `log2 Omega(2^{-s})`; exact binary arithmetic when the exponents are
    /// dyadic rationals and all `b_j = 0`.
    pub fn log2_omega_dyadic(&self, s: &DyadicIndex) -> Result<f64> {
        if s.coords().len() != self.d {
            return Err(Error::Domain(format!(
                "index has dimension {}, majorant has dimension {}",
                s.coords().len(),
                self.d
            )));
        }
        match &self.kind {
            MajorantKind::PowerLog { r, b } => {
                let mut lw = 0.0;
                for j in 0..self.d {
                    let sj = s.coords()[j] as f64;
                    lw -= r[j] * sj;
                    if b[j] != 0.0 {
                        lw -= b[j] * (sj.max(1.0)).log2();
                    }
                }
                Ok(lw)
            }
            MajorantKind::Table { values, box_bound } => match values.get(s) {
                Some(v) => Ok(v.log2()),
                None => Err(Error::Domain(format!(
                    "index {:?} outside the table box [0,{box_bound}]^{}",
                    s.coords(),
                    self.d
                ))),
            },
        }
    }
}

/// Outcome of one grid check; the witness is the first failing pair.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ConditionCheck {
    pub passed: bool,
    /// `(s, s')` for which the inequality failed, if any.
    pub witness: Option<(Vec<u32>, Vec<u32>)>,
}

impl ConditionCheck {
    fn pass() -> Self {
        ConditionCheck {
            passed: true,
            witness: None,
        }
    }

    fn fail(a: &DyadicIndex, b: &DyadicIndex) -> Self {
        ConditionCheck {
            passed: false,
            witness: Some((a.coords().to_vec(), b.coords().to_vec())),
        }
    }
}

/// Grid report for the three mixed-modulus-type conditions.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PsiReport {
    pub grid_depth: u32,
    /// Positive on the grid, zero on coordinate hyperplanes.
    pub positivity: ConditionCheck,
    /// `Omega(2^{-s})` nonincreasing in each coordinate of `s`.
    pub monotone: ConditionCheck,
    /// Dilation bound `Omega(m t) <= (prod m_j)^l Omega(t)` for `m_j` in {1, 2, 4}.
    pub dilation: ConditionCheck,
}

impl PsiReport {
    pub fn all_passed(&self) -> bool {
        self.positivity.passed && self.monotone.passed && self.dilation.passed
    }
}

const LOG2_GUARD: f64 = 1e-12;

fn grid_indices(d: usize, depth: u32) -> Vec<DyadicIndex> {
    let mut out = Vec::new();
    let mut s = vec![0u32; d];
    loop {
        out.push(DyadicIndex::new(s.clone()));
        let mut axis = 0;
        loop {
            if axis == d {
                return out;
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

/// Verify the three structural conditions on the dyadic grid
/// `{2^{-s} : 0 <= s_j <= grid_depth}`. A failing majorant yields a failing
/// report, not an error.
pub fn check_psi_l(omega: &MajorantSpec, grid_depth: u32) -> Result<PsiReport> {
    let depth = match omega.max_depth() {
        Some(k) => grid_depth.min(k),
        None => grid_depth,
    };
    let d = omega.d();
    let l = omega.l() as f64;
    let grid = grid_indices(d, depth);

    let mut positivity = ConditionCheck::pass();
    let mut lw = BTreeMap::new();
    for s in &grid {
        let w = omega.log2_omega_dyadic(s)?;
        if !w.is_finite() {
            positivity = ConditionCheck::fail(s, s);
        }
        lw.insert(s.clone(), w);
    }
    // zero-coordinate points map to 0 by construction of evaluate()
    if positivity.passed && d >= 1 {
        let mut t = vec![1.0; d];
        t[0] = 0.0;
        if omega.evaluate(&t)? != 0.0 {
            positivity = ConditionCheck {
                passed: false,
                witness: None,
            };
        }
    }

    let mut monotone = ConditionCheck::pass();
    'mono: for s in &grid {
        for j in 0..d {
            if s.coords()[j] == depth {
                continue;
            }
            let mut up = s.coords().to_vec();
            up[j] += 1;
            let up = DyadicIndex::new(up);
            if lw[&up] > lw[s] + LOG2_GUARD {
                monotone = ConditionCheck::fail(s, &up);
                break 'mono;
            }
        }
    }

    // m_j in {1, 2, 4} means shifting s_j down by k_j in {0, 1, 2}.
    let mut dilation = ConditionCheck::pass();
    let shifts = grid_indices(d, 2);
    'dil: for s in &grid {
        for k in &shifts {
            if k.coords().iter().all(|&kj| kj == 0) {
                continue;
            }
            if s.coords().iter().zip(k.coords()).any(|(&sj, &kj)| sj < kj) {
                continue;
            }
            let shifted = DyadicIndex::new(
                s.coords()
                    .iter()
                    .zip(k.coords())
                    .map(|(&sj, &kj)| sj - kj)
                    .collect(),
            );
            let ksum: u32 = k.coords().iter().sum();
            if lw[&shifted] > lw[s] + l * ksum as f64 + LOG2_GUARD {
                dilation = ConditionCheck::fail(s, &shifted);
                break 'dil;
            }
        }
    }

    Ok(PsiReport {
        grid_depth: depth,
        positivity,
        monotone,
        dilation,
    })
}

/// Almost-increase check `(S^alpha)`: grid constants and stability.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SAlphaReport {
    pub alpha: f64,
    /// Smallest admissible constant on the half-depth grid.
    pub c1_half: f64,
    /// Smallest admissible constant on the full grid.
    pub c1_full: f64,
    /// Stable (constant did not keep growing with depth).
    pub passed: bool,
}

/// One row of the `(S_l)` gamma scan.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SLGammaRow {
    pub gamma: f64,
    pub c2_half: f64,
    pub c2_full: f64,
    pub stable: bool,
}

/// Almost-decrease check `(S_l)` over the declared gamma grid.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SLReport {
    pub gamma_grid: Vec<f64>,
    pub rows: Vec<SLGammaRow>,
    /// Best stable `(gamma, C2)`, if any gamma passed.
    pub best: Option<(f64, f64)>,
    pub passed: bool,
}

/// Bari-Stechkin grid report: per-axis worst case over frozen contexts.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BariReport {
    pub grid_depth: u32,
    pub s_alpha: SAlphaReport,
    pub s_l: SLReport,
}

impl BariReport {
    pub fn all_passed(&self) -> bool {
        self.s_alpha.passed && self.s_l.passed
    }
}

/// Constants may grow by at most this much (in log2) when the grid depth
/// doubles; larger growth is read as divergence.
const STABILITY_LOG2_TOL: f64 = 0.5;

/// Axis profiles of `log2 Omega` with the other coordinates frozen at grid
/// values. Profiles differing only by an additive constant are deduplicated,
/// which collapses product majorants to one context per axis.
fn axis_profiles(omega: &MajorantSpec, depth: u32) -> Result<Vec<Vec<f64>>> {
    let d = omega.d();
    let contexts = grid_indices(d.saturating_sub(1), depth);
    let mut profiles: Vec<Vec<f64>> = Vec::new();
    for axis in 0..d {
        for ctx in &contexts {
            let mut profile = Vec::with_capacity(depth as usize + 1);
            for s_axis in 0..=depth {
                let mut coords = Vec::with_capacity(d);
                let mut c = ctx.coords().iter();
                for j in 0..d {
                    if j == axis {
                        coords.push(s_axis);
                    } else {
                        coords.push(*c.next().expect("context has d-1 coords"));
                    }
                }
                profile.push(omega.log2_omega_dyadic(&DyadicIndex::new(coords))?);
            }
            let base = profile[0];
            for v in &mut profile {
                *v -= base;
            }
            if !profiles
                .iter()
                .any(|p| p.iter().zip(&profile).all(|(a, b)| (a - b).abs() < 1e-12))
            {
                profiles.push(profile);
            }
        }
        if d == 1 {
            break; // single empty context
        }
    }
    Ok(profiles)
}

/// Largest `psi(s1) - psi(s2)` over grid pairs `s1 >= s2` (log2 of the best
/// almost-increase constant for `psi = log2(phi(tau)/tau^alpha)`).
fn max_rise(profile: &[f64], weight_per_step: f64, upto: usize) -> f64 {
    let mut running_min = f64::INFINITY;
    let mut worst = 0.0f64;
    for (s, &lw) in profile.iter().enumerate().take(upto + 1) {
        let psi = lw + weight_per_step * s as f64;
        running_min = running_min.min(psi);
        worst = worst.max(psi - running_min);
    }
    worst
}

/// Smallest `psi(s1) - psi(s2)` over grid pairs `s1 >= s2` (log2 of the best
/// almost-decrease constant).
fn min_drop(profile: &[f64], weight_per_step: f64, upto: usize) -> f64 {
    let mut running_max = f64::NEG_INFINITY;
    let mut worst = 0.0f64;
    for (s, &lw) in profile.iter().enumerate().take(upto + 1) {
        let psi = lw + weight_per_step * s as f64;
        running_max = running_max.max(psi);
        worst = worst.min(psi - running_max);
    }
    worst
}

/// Scan the Bari-Stechkin conditions on the dyadic grid. Each axis is tested
/// with the remaining coordinates frozen at grid values; `(S_l)` scans gamma
/// over `{l/8, l/4, l/2, 3l/4}`.
pub fn check_bari_stechkin(
    omega: &MajorantSpec,
    alpha: f64,
    l: u32,
    grid_depth: u32,
) -> Result<BariReport> {
    if alpha <= 0.0 {
        return Err(Error::Config(format!("alpha must be positive, got {alpha}")));
    }
    let depth = match omega.max_depth() {
        Some(k) => grid_depth.min(k),
        None => grid_depth,
    };
    if depth < 2 {
        return Err(Error::Config(format!(
            "grid depth {depth} too small for a stability scan"
        )));
    }
    let half = (depth / 2).max(2) as usize;
    let profiles = axis_profiles(omega, depth)?;

    // (S^alpha): psi(s) = log2 phi(2^{-s}) + alpha s must not rise.
    let mut rise_half = 0.0f64;
    let mut rise_full = 0.0f64;
    for p in &profiles {
        rise_half = rise_half.max(max_rise(p, alpha, half));
        rise_full = rise_full.max(max_rise(p, alpha, depth as usize));
    }
    let s_alpha = SAlphaReport {
        alpha,
        c1_half: f64::exp2(rise_half),
        c1_full: f64::exp2(rise_full),
        passed: rise_full - rise_half <= STABILITY_LOG2_TOL,
    };

    let lf = l as f64;
    let gamma_grid = vec![lf / 8.0, lf / 4.0, lf / 2.0, 3.0 * lf / 4.0];
    let mut rows = Vec::new();
    let mut best: Option<(f64, f64)> = None;
    for &gamma in &gamma_grid {
        let mut drop_half = 0.0f64;
        let mut drop_full = 0.0f64;
        for p in &profiles {
            drop_half = drop_half.min(min_drop(p, lf - gamma, half));
            drop_full = drop_full.min(min_drop(p, lf - gamma, depth as usize));
        }
        let stable = drop_half - drop_full <= STABILITY_LOG2_TOL;
        let c2_full = f64::exp2(drop_full);
        rows.push(SLGammaRow {
            gamma,
            c2_half: f64::exp2(drop_half),
            c2_full,
            stable,
        });
        if stable && best.map_or(true, |(_, c)| c2_full > c) {
            best = Some((gamma, c2_full));
        }
    }
    let passed = best.is_some();
    Ok(BariReport {
        grid_depth: depth,
        s_alpha,
        s_l: SLReport {
            gamma_grid,
            rows,
            best,
            passed,
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn idx(s: &[u32]) -> DyadicIndex {
        DyadicIndex::new(s.to_vec())
    }

    #[test]
    fn evaluate_power_half_exponents() {
        let om = MajorantSpec::power(2, 1, vec![0.5, 0.5]).unwrap();
        assert_eq!(om.evaluate(&[0.25, 0.25]).unwrap(), 0.25);
    }

    #[test]
    fn evaluate_zero_coordinate_gives_zero() {
        let om = MajorantSpec::power_log(2, 1, vec![0.5, 0.7], vec![1.0, 0.0]).unwrap();
        assert_eq!(om.evaluate(&[0.0, 0.5]).unwrap(), 0.0);
    }

    #[test]
    fn evaluate_with_log_factor() {
        // {log2 4}_+ = 2, so 0.25^{0.5} / 2 = 0.25
        let om = MajorantSpec::power_log(1, 1, vec![0.5], vec![1.0]).unwrap();
        let got = om.evaluate(&[0.25]).unwrap();
        assert!((got - 0.25).abs() < 1e-15, "got {got}");
    }

    #[test]
    fn omega_dyadic_at_origin_is_one() {
        let om = MajorantSpec::power(3, 1, vec![0.5, 0.6, 0.8]).unwrap();
        assert_eq!(om.omega_dyadic(&idx(&[0, 0, 0])).unwrap(), 1.0);
    }

    #[test]
    fn omega_dyadic_pure_power_closed_form() {
        let om = MajorantSpec::power(2, 1, vec![0.6, 0.6]).unwrap();
        let got = om.omega_dyadic(&idx(&[1, 2])).unwrap();
        let expected = f64::exp2(-1.8);
        assert!((got - expected).abs() <= 1e-15 * expected, "{got} vs {expected}");
        // dyadic exponents stay bit-exact
        let om = MajorantSpec::power(2, 1, vec![0.5, 0.75]).unwrap();
        assert_eq!(
            om.omega_dyadic(&idx(&[1, 2])).unwrap(),
            f64::exp2(-(0.5 + 1.5))
        );
    }

    #[test]
    fn omega_dyadic_log_factor() {
        // {log2 2^3}_+ = 3
        let om = MajorantSpec::power_log(1, 1, vec![0.5], vec![1.0]).unwrap();
        let got = om.omega_dyadic(&idx(&[3])).unwrap();
        assert!((got - f64::exp2(-1.5) / 3.0).abs() < 1e-15);
    }

    #[test]
    fn table_round_trips_through_json() {
        let om = MajorantSpec::table_from_fn(2, 1, 3, |s| {
            f64::exp2(-0.5 * (s[0] + s[1]) as f64)
        })
        .unwrap();
        let json = serde_json::to_string(&om).unwrap();
        let back: MajorantSpec = serde_json::from_str(&json).unwrap();
        assert_eq!(
            back.omega_dyadic(&idx(&[1, 2])).unwrap(),
            om.omega_dyadic(&idx(&[1, 2])).unwrap()
        );
    }

    #[test]
    fn table_rejects_partial_box() {
        let entries = vec![
            TableEntry { s: vec![0], v: 1.0 },
            TableEntry { s: vec![2], v: 0.5 },
        ];
        assert!(MajorantSpec::table(1, 1, entries).is_err());
    }

    #[test]
    fn power_log_json_matches_declared_shape() {
        let om = MajorantSpec::power_log(2, 1, vec![0.6, 0.6], vec![0.0, 0.0]).unwrap();
        let json = serde_json::to_value(&om).unwrap();
        assert_eq!(json["kind"], "power_log");
        assert_eq!(json["d"], 2);
        assert_eq!(json["r"][0], 0.6);
    }

    #[test]
    fn psi_passes_for_monotone_power_law() {
        let om = MajorantSpec::power(1, 1, vec![0.5]).unwrap();
        let report = check_psi_l(&om, 8).unwrap();
        assert!(report.all_passed(), "{report:?}");
    }

    #[test]
    fn psi_dilation_fails_for_supercritical_decay() {
        // Omega(2^{-s}) = 2^{-(l+1)s} violates the order-l dilation bound at m=2.
        let l = 1u32;
        let om = MajorantSpec::table_from_fn(1, l, 6, |s| f64::exp2(-((l + 1) as f64) * s[0] as f64))
            .unwrap();
        let report = check_psi_l(&om, 6).unwrap();
        assert!(report.positivity.passed);
        assert!(report.monotone.passed);
        assert!(!report.dilation.passed);
    }

    #[test]
    fn psi_monotonicity_fails_for_increasing_table() {
        let om = MajorantSpec::table_from_fn(1, 1, 6, |s| 1.0 + s[0] as f64).unwrap();
        let report = check_psi_l(&om, 6).unwrap();
        assert!(!report.monotone.passed);
    }

    #[test]
    fn s_alpha_constant_one_for_power_law_below_r() {
        let om = MajorantSpec::power(1, 1, vec![0.5]).unwrap();
        let report = check_bari_stechkin(&om, 0.5, 1, 12).unwrap();
        assert!(report.s_alpha.passed);
        assert!((report.s_alpha.c1_full - 1.0).abs() < 1e-12);
    }

    #[test]
    fn s_l_fails_for_order_l_power() {
        // phi(tau) = tau^l: tau^gamma is strictly increasing for every gamma,
        // so no stable almost-decrease constant exists. Needs r_j = l which
        // the power_log constructor rejects; use a table.
        let om = MajorantSpec::table_from_fn(1, 1, 12, |s| f64::exp2(-(s[0] as f64))).unwrap();
        let report = check_bari_stechkin(&om, 0.5, 1, 12).unwrap();
        assert!(!report.s_l.passed, "{:?}", report.s_l);
        assert!(report.s_l.rows.iter().all(|row| !row.stable));
    }

    #[test]
    fn bari_passes_with_log_factor() {
        let om = MajorantSpec::power_log(1, 1, vec![0.5], vec![1.0]).unwrap();
        let report = check_bari_stechkin(&om, 0.4, 1, 12).unwrap();
        assert!(report.s_alpha.passed, "{:?}", report.s_alpha);
        assert!(report.s_alpha.c1_full.is_finite());
        assert!(report.s_alpha.c1_full >= 1.0);
        assert!(report.s_l.passed, "{:?}", report.s_l);
    }

    #[test]
    fn theta_serde() {
        assert_eq!(serde_json::to_string(&Theta::Infinite).unwrap(), "\"inf\"");
        assert_eq!(serde_json::to_string(&Theta::Finite(2.0)).unwrap(), "2.0");
        let t: Theta = serde_json::from_str("\"inf\"").unwrap();
        assert!(t.is_infinite());
        let t: Theta = serde_json::from_str("4").unwrap();
        assert_eq!(t.finite(), Some(4.0));
    }

    #[test]
    fn params_validation() {
        assert!(SmoothnessParams::new(2.0, 4.0, Theta::Finite(2.0), 1, 0.6, 2).is_ok());
        // p = q accepted (degenerate beta = 0)
        assert!(SmoothnessParams::new(2.0, 2.0, Theta::Finite(4.0), 1, 0.6, 2).is_ok());
        // p > q rejected
        assert!(SmoothnessParams::new(4.0, 2.0, Theta::Finite(2.0), 1, 0.6, 2).is_err());
        // alpha <= beta rejected
        assert!(SmoothnessParams::new(2.0, 4.0, Theta::Infinite, 1, 0.2, 2).is_err());
        assert!(SmoothnessParams::new(2.0, 4.0, Theta::Finite(0.5), 1, 0.6, 2).is_err());
    }

    #[test]
    fn beta_derivation() {
        let p = SmoothnessParams::new(2.0, 4.0, Theta::Infinite, 1, 0.6, 2).unwrap();
        assert_eq!(p.beta(), 0.25);
    }
}
