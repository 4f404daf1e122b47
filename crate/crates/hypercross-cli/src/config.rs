//! Config schemas. Unknown fields are rejected so that typos fail loudly
//! instead of silently running a different experiment.

use std::path::Path;

use serde::{Deserialize, Serialize};

use hypercross::majorant::MajorantKind;
use hypercross::{
    Error as HxError, MajorantSpec, QuadratureGrid, Result, SmoothnessParams, Theta, Witness,
};

pub fn load_json(path: &Path) -> Result<serde_json::Value> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| HxError::Config(format!("read {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| HxError::Config(format!("{}: {e}", path.display())))
}

/// Default Bari-Stechkin exponent for the power-log family: the smallest
/// per-axis power. Table majorants must supply alpha explicitly.
pub fn default_alpha(omega: &MajorantSpec) -> Result<f64> {
    match omega.kind() {
        MajorantKind::PowerLog { r, .. } => {
            Ok(r.iter().copied().fold(f64::INFINITY, f64::min))
        }
        MajorantKind::Table { .. } => Err(HxError::Config(
            "table majorants need an explicit alpha".into(),
        )),
    }
}

#[derive(Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct IndexsetConfig {
    pub omega: MajorantSpec,
    pub p: f64,
    pub q: f64,
    #[serde(default)]
    pub alpha: Option<f64>,
    #[serde(rename = "N")]
    pub n: u64,
}

impl IndexsetConfig {
    pub fn params(&self) -> Result<SmoothnessParams> {
        let alpha = match self.alpha {
            Some(a) => a,
            None => default_alpha(&self.omega)?,
        };
        SmoothnessParams::new(
            self.p,
            self.q,
            Theta::Finite(self.p.max(2.0)),
            self.omega.l(),
            alpha,
            self.omega.d(),
        )
    }
}

fn default_members() -> usize {
    20
}

#[derive(Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct RatesConfig {
    pub omega: MajorantSpec,
    pub p: f64,
    pub q: f64,
    pub theta: Theta,
    pub l: u32,
    pub d: usize,
    #[serde(default)]
    pub alpha: Option<f64>,
    pub witness: Witness,
    #[serde(rename = "N_exponents")]
    pub n_exponents: Vec<u32>,
    pub seed: u64,
    #[serde(default)]
    pub grid: QuadratureGrid,
    /// Members per row for the random witness family.
    #[serde(default = "default_members")]
    pub members: usize,
}

pub fn resolve_params(cfg: &RatesConfig) -> Result<SmoothnessParams> {
    if cfg.d != cfg.omega.d() {
        return Err(HxError::Config(format!(
            "config d = {} does not match majorant dimension {}",
            cfg.d,
            cfg.omega.d()
        )));
    }
    if cfg.l != cfg.omega.l() {
        return Err(HxError::Config(format!(
            "config l = {} does not match majorant order {}",
            cfg.l,
            cfg.omega.l()
        )));
    }
    let alpha = match cfg.alpha {
        Some(a) => a,
        None => default_alpha(&cfg.omega)?,
    };
    SmoothnessParams::new(cfg.p, cfg.q, cfg.theta, cfg.l, alpha, cfg.d)
}

/// Parameter resolution for the `norms` subcommand: the target metric plays
/// no role there, so q = p.
pub struct NormsParams;

impl NormsParams {
    pub fn resolve(omega: &MajorantSpec, p: f64, theta: &str) -> Result<SmoothnessParams> {
        let theta = if theta == "inf" {
            Theta::Infinite
        } else {
            Theta::Finite(theta.parse().map_err(|_| {
                HxError::Config(format!("theta must be a number or \"inf\", got {theta:?}"))
            })?)
        };
        SmoothnessParams::new(p, p, theta, omega.l(), default_alpha(omega)?, omega.d())
    }
}
