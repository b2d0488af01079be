//! Experiment manifests: one file describes one experiment kind, its
//! parameters, output paths, and an expectations block that turns the run
//! into a checkable assertion.

use std::path::PathBuf;

use serde::Deserialize;

use crate::error::{Error, Result};
use crate::refined_spaces::RefinedIndex;
use crate::slowly_varying::SlowlyVaryingFunction;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    Ellipticity,
    Index,
    IndexInvariance,
    Solve,
    Apriori,
    Embedding,
    Smoothness,
    Lift,
    Continuity,
    SlowVariation,
    NormIdentity,
}

impl ExperimentKind {
    pub fn name(&self) -> &'static str {
        match self {
            ExperimentKind::Ellipticity => "ellipticity",
            ExperimentKind::Index => "index",
            ExperimentKind::IndexInvariance => "index-invariance",
            ExperimentKind::Solve => "solve",
            ExperimentKind::Apriori => "apriori",
            ExperimentKind::Embedding => "embedding",
            ExperimentKind::Smoothness => "smoothness",
            ExperimentKind::Lift => "lift",
            ExperimentKind::Continuity => "continuity",
            ExperimentKind::SlowVariation => "slow-variation",
            ExperimentKind::NormIdentity => "norm-identity",
        }
    }
}

/// A smoothness index given as `s` and the phi exponent tuple.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IdxSpec {
    pub s: f64,
    #[serde(default)]
    pub phi: Vec<f64>,
}

impl IdxSpec {
    pub fn to_index(&self) -> Result<RefinedIndex> {
        RefinedIndex::new(self.s, SlowlyVaryingFunction::standard(self.phi.clone()))
    }
}

/// A slow-variation candidate: a class member (exponents) or a power
/// function (not a member, expected to fail).
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhiCandidate {
    #[serde(default)]
    pub phi: Option<Vec<f64>>,
    #[serde(default)]
    pub power: Option<f64>,
}

impl PhiCandidate {
    pub fn describe(&self) -> String {
        match (&self.phi, self.power) {
            (Some(exps), _) => format!("phi: {exps:?}"),
            (None, Some(alpha)) => format!("t^{alpha}"),
            _ => "invalid".into(),
        }
    }
}

/// Growth expectations on the embedding-ratio sequence for one phi.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RatioGrowthExpect {
    pub phi: Vec<f64>,
    /// Every per-octave relative increment with right endpoint at least this
    /// band must stay at or below `tail_max`.
    #[serde(default)]
    pub tail_min_k: Option<i64>,
    #[serde(default)]
    pub tail_max: Option<f64>,
    /// Every increment with right endpoint at most this band must reach
    /// `head_min`.
    #[serde(default)]
    pub head_max_k: Option<i64>,
    #[serde(default)]
    pub head_min: Option<f64>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Params {
    /// Power smoothness values.
    #[serde(default)]
    pub s: Option<Vec<f64>>,
    /// Phi exponent tuples (empty tuple = constant one).
    #[serde(default)]
    pub phi: Option<Vec<Vec<f64>>>,
    /// Explicit `(s, phi)` pairs; takes precedence over the `s` x `phi`
    /// product when present.
    #[serde(default)]
    pub idx: Option<Vec<IdxSpec>>,
    /// Band limits.
    #[serde(default)]
    pub k: Option<Vec<i64>>,
    #[serde(default)]
    pub rank_tol: Option<f64>,
    #[serde(default)]
    pub sigma: Option<f64>,
    #[serde(default)]
    pub rho: Option<u32>,
    #[serde(default)]
    pub tol: Option<f64>,
    #[serde(default)]
    pub t_max: Option<f64>,
    /// Stabilization threshold for a priori / invariance scans.
    #[serde(default)]
    pub k0: Option<i64>,
    /// Ellipticity threshold.
    #[serde(default)]
    pub delta: Option<f64>,
    #[serde(default)]
    pub omega_resolution: Option<usize>,
    /// Decay power of generated fields: `u_hat = <xi>^{-a} L1(<xi>)^{log_r}`.
    #[serde(default)]
    pub a: Option<f64>,
    #[serde(default)]
    pub log_r: Option<f64>,
    #[serde(default)]
    pub mean_zero: Option<bool>,
    /// 1-based component carrying the generated data (lift).
    #[serde(default)]
    pub component: Option<usize>,
    /// Raised-cosine cutoff band for localized fits.
    #[serde(default)]
    pub cutoff_band: Option<u32>,
    /// Right-hand side modes: `[component, xi_1(, xi_2), re, im]` rows.
    #[serde(default)]
    pub rhs: Option<Vec<Vec<f64>>>,
    #[serde(default)]
    pub candidates: Option<Vec<PhiCandidate>>,
    /// Number of random fields (norm-identity).
    #[serde(default)]
    pub fields: Option<usize>,
    /// Single band limit for generated fields.
    #[serde(default)]
    pub band: Option<i64>,
    #[serde(default)]
    pub slow_tol: Option<f64>,
    /// Slow-variation grid top as a power of two.
    #[serde(default)]
    pub grid_top_pow2: Option<u32>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    /// JSON report path, relative to the output directory.
    #[serde(default)]
    pub json: Option<PathBuf>,
    /// CSV data path, relative to the output directory.
    #[serde(default)]
    pub csv: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Expectations {
    #[serde(default)]
    pub elliptic: Option<bool>,
    #[serde(default)]
    pub index: Option<i64>,
    #[serde(default)]
    pub dim_n: Option<usize>,
    #[serde(default)]
    pub dim_n_plus: Option<usize>,
    #[serde(default)]
    pub min_sigma_gap: Option<f64>,
    #[serde(default)]
    pub consistent: Option<bool>,
    #[serde(default)]
    pub solvable: Option<bool>,
    #[serde(default)]
    pub max_residual: Option<f64>,
    /// Expected |defect| values, order-insensitive, to `defect_tol`.
    #[serde(default)]
    pub defect_norms: Option<Vec<f64>>,
    #[serde(default)]
    pub defect_tol: Option<f64>,
    /// Verdict string: apriori `bounded|growing|inconclusive`, embedding
    /// `converges|diverges`.
    #[serde(default)]
    pub verdict: Option<String>,
    /// Embedding: analytic and numeric verdicts agree for every phi.
    #[serde(default)]
    pub agree: Option<bool>,
    #[serde(default)]
    pub s_star: Option<f64>,
    #[serde(default)]
    pub s_star_tol: Option<f64>,
    #[serde(default)]
    pub r_star: Option<f64>,
    #[serde(default)]
    pub r_star_tol: Option<f64>,
    /// Lift: `|gap_k - m_k| <= gap_tol` for every component.
    #[serde(default)]
    pub gap_tol: Option<f64>,
    #[serde(default)]
    pub localized_tol: Option<f64>,
    #[serde(default)]
    pub certified: Option<bool>,
    #[serde(default)]
    pub membership_ok: Option<bool>,
    #[serde(default)]
    pub criterion_holds: Option<bool>,
    /// Slow-variation: expected pass flag per candidate.
    #[serde(default)]
    pub passes: Option<Vec<bool>>,
    #[serde(default)]
    pub max_rel_deviation: Option<f64>,
    /// `[K, value, tol]` rows checked against the a priori constants.
    #[serde(default)]
    pub cquad: Option<Vec<Vec<f64>>>,
    #[serde(default)]
    pub ratio_growth: Option<Vec<RatioGrowthExpect>>,
    /// Wall-clock budget for the whole run, in seconds.
    #[serde(default)]
    pub max_runtime_seconds: Option<f64>,
}

/// A complete experiment description.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentManifest {
    pub kind: ExperimentKind,
    /// Manifold dimension (1 or 2).
    pub n: usize,
    #[serde(default)]
    pub system: Option<PathBuf>,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub params: Params,
    #[serde(default)]
    pub output: OutputSpec,
    #[serde(default)]
    pub expect: Expectations,
}

impl ExperimentManifest {
    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Domain(format!("manifest: {e}")))
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Domain(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    /// The `(s, phi)` list: explicit pairs if given, otherwise the product
    /// of the `s` and `phi` lists, otherwise the single Sobolev index 0.
    pub fn idx_list(&self) -> Result<Vec<(f64, SlowlyVaryingFunction)>> {
        if let Some(pairs) = &self.params.idx {
            if pairs.is_empty() {
                return Err(Error::Domain("params.idx must not be empty".into()));
            }
            return pairs
                .iter()
                .map(|p| p.to_index().map(|i| (i.s, i.phi)))
                .collect();
        }
        let s_list = self.params.s.clone().unwrap_or_else(|| vec![0.0]);
        let phi_list = self.params.phi.clone().unwrap_or_else(|| vec![vec![]]);
        if s_list.is_empty() || phi_list.is_empty() {
            return Err(Error::Domain("parameter lists must not be empty".into()));
        }
        let mut out = Vec::with_capacity(s_list.len() * phi_list.len());
        for &s in &s_list {
            for exps in &phi_list {
                let idx = RefinedIndex::new(s, SlowlyVaryingFunction::standard(exps.clone()))?;
                out.push((idx.s, idx.phi));
            }
        }
        Ok(out)
    }

    pub fn k_list(&self) -> Result<Vec<i64>> {
        let ks = self.params.k.clone().unwrap_or_default();
        if ks.is_empty() {
            return Err(Error::Domain("params.k must be given and nonempty".into()));
        }
        if ks.iter().any(|&k| k < 0) {
            return Err(Error::Domain("band limits must be nonnegative".into()));
        }
        Ok(ks)
    }
}
