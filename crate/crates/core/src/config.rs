//! TOML run configuration. Every field has a default, and the resolved
//! configuration is echoed into the report so a report alone reproduces a run.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::approximant::{ApproximantConfig, TargetFunction};
use crate::error::{Error, Result};
use crate::gates::{GateMode, DEFAULT_DEGREE_BUDGET};
use crate::gauge::Gauge;
use crate::mollifier::NuBackend;
use crate::seppoly::{HomogeneousPoly, SepPolyQ, DEFAULT_SAFETY};
use crate::space_net::{Domain, Shape, DEFAULT_NET_CAP};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub epsilon: f64,
    pub domain: DomainConfig,
    pub q: QConfig,
    pub target: TargetConfig,
    pub backend: BackendConfig,
    pub gates: GatesConfig,
    pub net: NetConfig,
    pub gauge: GaugeConfig,
    pub eval: EvalConfig,
    pub output: OutputConfig,
    pub verify: VerifyCounts,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            epsilon: 0.2,
            domain: DomainConfig::default(),
            q: QConfig::default(),
            target: TargetConfig::default(),
            backend: BackendConfig::default(),
            gates: GatesConfig::default(),
            net: NetConfig::default(),
            gauge: GaugeConfig::default(),
            eval: EvalConfig::default(),
            output: OutputConfig::default(),
            verify: VerifyCounts::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DomainConfig {
    pub dim: usize,
    pub radius: f64,
    pub shape: Shape,
}

impl Default for DomainConfig {
    fn default() -> Self {
        Self { dim: 2, radius: 1.5, shape: Shape::Ball }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum QKind {
    EuclideanQuartic,
    QuarticSum,
    Components,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct QConfig {
    pub kind: QKind,
    pub safety: f64,
    pub components: Vec<HomogeneousPoly>,
}

impl Default for QConfig {
    fn default() -> Self {
        Self { kind: QKind::EuclideanQuartic, safety: DEFAULT_SAFETY, components: Vec::new() }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TargetName {
    Constant,
    Coordinate,
    ProductSine,
    Tabulated,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TargetConfig {
    pub kind: TargetName,
    /// Constant value.
    pub value: f64,
    /// Coordinate index, 0-based.
    pub index: usize,
    pub omega: f64,
    pub points: Vec<Vec<f64>>,
    pub values: Vec<f64>,
    /// Tabulated Lipschitz constant.
    pub lipschitz: f64,
}

impl Default for TargetConfig {
    fn default() -> Self {
        Self {
            kind: TargetName::ProductSine,
            value: 0.0,
            index: 0,
            omega: 2.0,
            points: Vec::new(),
            values: Vec::new(),
            lipschitz: 1.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BackendConfig {
    pub nu: NuBackend,
    pub mc_samples: usize,
    pub seed: u64,
}

impl Default for BackendConfig {
    fn default() -> Self {
        Self { nu: NuBackend::Layercake, mc_samples: 100_000, seed: 0 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GateModeName {
    Sigmoid,
    Polynomial,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GatesConfig {
    pub mode: GateModeName,
    pub degree_budget: usize,
}

impl Default for GatesConfig {
    fn default() -> Self {
        Self { mode: GateModeName::Sigmoid, degree_budget: DEFAULT_DEGREE_BUDGET }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct NetConfig {
    pub cap: usize,
}

impl Default for NetConfig {
    fn default() -> Self {
        Self { cap: DEFAULT_NET_CAP }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GaugeConfig {
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for GaugeConfig {
    fn default() -> Self {
        let g = Gauge::default();
        Self { tol: g.tol, max_iter: g.max_iter }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Sampler {
    Halton,
    Random,
    Grid,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EvalConfig {
    pub sampler: Sampler,
    pub points: usize,
    pub grid_per_axis: usize,
    pub lipschitz_pairs: usize,
    pub spot_checks: usize,
}

impl Default for EvalConfig {
    fn default() -> Self {
        Self { sampler: Sampler::Halton, points: 2000, grid_per_axis: 50, lipschitz_pairs: 200, spot_checks: 2000 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputConfig {
    pub dir: PathBuf,
    pub report: String,
    pub table: String,
    pub ledger: String,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self {
            dir: PathBuf::from("out"),
            report: "report.json".into(),
            table: "points.csv".into(),
            ledger: "ledger.json".into(),
        }
    }
}

/// Sample counts of the verification batteries.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct VerifyCounts {
    pub gauge_vectors: usize,
    pub gauge_max_len: usize,
    pub oracle_vectors: usize,
    pub poly_samples: usize,
    pub poly_pairs: usize,
    pub phi_points: usize,
    pub phi_pairs: usize,
    pub localization_points: usize,
    pub mc_evaluations: usize,
    pub mc_samples: usize,
    pub psi_points: usize,
    pub psi_pairs: usize,
    pub stability_points: usize,
    pub end_to_end_points: usize,
    pub lipschitz_pairs: usize,
    /// Smallness level for the localization checks.
    pub eta: f64,
}

impl Default for VerifyCounts {
    fn default() -> Self {
        Self {
            gauge_vectors: 100_000,
            gauge_max_len: 50,
            oracle_vectors: 100,
            poly_samples: 100_000,
            poly_pairs: 10_000,
            phi_points: 2000,
            phi_pairs: 10_000,
            localization_points: 200,
            mc_evaluations: 100,
            mc_samples: 100_000,
            psi_points: 10_000,
            psi_pairs: 1000,
            stability_points: 200,
            end_to_end_points: 2000,
            lipschitz_pairs: 200,
            eta: 0.01,
        }
    }
}

impl RunConfig {
    pub fn from_toml_str(s: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(s).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let s = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml_str(&s)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("run configuration serializes")
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if !(self.epsilon > 0.0) || !self.epsilon.is_finite() {
            return bad(format!("epsilon must be positive, got {}", self.epsilon));
        }
        if self.q.kind == QKind::Components && self.q.components.is_empty() {
            return bad("q.kind = \"components\" needs q.components".into());
        }
        if self.target.kind == TargetName::Tabulated
            && (self.target.points.is_empty() || self.target.points.len() != self.target.values.len())
        {
            return bad("tabulated target needs matching points and values".into());
        }
        if self.backend.nu == NuBackend::Mc && self.backend.mc_samples == 0 {
            return bad("backend.mc_samples must be positive for the Monte Carlo backend".into());
        }
        if self.eval.points == 0 && self.eval.sampler != Sampler::Grid {
            return bad("eval.points must be positive".into());
        }
        if self.eval.sampler == Sampler::Grid && self.eval.grid_per_axis == 0 {
            return bad("eval.grid_per_axis must be positive".into());
        }
        if !(self.gauge.tol > 0.0) || self.gauge.max_iter == 0 {
            return bad("gauge.tol and gauge.max_iter must be positive".into());
        }
        Ok(())
    }

    pub fn build_domain(&self) -> Result<Domain> {
        Domain::new(self.domain.dim, self.domain.radius, self.domain.shape)
    }

    pub fn build_q(&self) -> Result<SepPolyQ> {
        let d = self.domain.dim;
        let q = match self.q.kind {
            QKind::EuclideanQuartic => SepPolyQ::euclidean_quartic(d)?,
            QKind::QuarticSum => SepPolyQ::quartic_sum(d)?,
            QKind::Components => SepPolyQ::build_q(d, &self.q.components, self.q.safety)?,
        };
        q.derive_constants(self.domain.radius)
    }

    pub fn build_target(&self) -> Result<TargetFunction> {
        let t = &self.target;
        Ok(match t.kind {
            TargetName::Constant => TargetFunction::constant(t.value),
            TargetName::Coordinate => TargetFunction::coordinate(t.index),
            TargetName::ProductSine => TargetFunction::product_sine(t.omega),
            TargetName::Tabulated => TargetFunction::tabulated(t.points.clone(), t.values.clone(), t.lipschitz)?,
        })
    }

    pub fn approximant_config(&self) -> ApproximantConfig {
        ApproximantConfig {
            eps_user: self.epsilon,
            gate_mode: match self.gates.mode {
                GateModeName::Sigmoid => GateMode::Sigmoid,
                GateModeName::Polynomial => GateMode::Polynomial { degree_budget: self.gates.degree_budget },
            },
            backend: self.backend.nu,
            mc_samples: self.backend.mc_samples,
            seed: self.backend.seed,
            net_cap: self.net.cap,
            gauge: Gauge { tol: self.gauge.tol, max_iter: self.gauge.max_iter },
            spot_checks: self.eval.spot_checks,
        }
    }

    /// Evaluation points in a deterministic order.
    pub fn eval_points(&self, domain: &Domain) -> Result<Vec<Vec<f64>>> {
        Ok(match self.eval.sampler {
            Sampler::Halton => domain.halton_points(self.eval.points)?,
            Sampler::Random => domain.random_points(self.eval.points, self.backend.seed, 7),
            Sampler::Grid => domain.grid_points(self.eval.grid_per_axis),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_round_trip() {
        let cfg = RunConfig::default();
        let back = RunConfig::from_toml_str(&cfg.to_toml_string()).unwrap();
        assert_eq!(cfg, back);
    }

    #[test]
    fn partial_file_uses_defaults() {
        let cfg = RunConfig::from_toml_str(
            "epsilon = 0.5\n[domain]\ndim = 1\nradius = 2.0\nshape = \"box\"\n[target]\nkind = \"constant\"\nvalue = 5.0\n",
        )
        .unwrap();
        assert_eq!(cfg.domain.shape, Shape::Box);
        assert_eq!(cfg.eval.points, 2000);
        assert_eq!(cfg.build_target().unwrap().inf, 5.0);
    }

    #[test]
    fn components_parse() {
        let cfg = RunConfig::from_toml_str(
            r#"
[domain]
dim = 2
[q]
kind = "components"
[[q.components]]
terms = [{ exponents = [2, 0], coeff = 1.0 }, { exponents = [0, 2], coeff = 1.0 }]
"#,
        )
        .unwrap();
        let q = cfg.build_q().unwrap();
        assert!((q.eval(&[0.5, 0.0]) - 0.0625).abs() < 1e-15);
    }

    #[test]
    fn bad_configs_rejected() {
        assert!(matches!(RunConfig::from_toml_str("epsilon = -1.0"), Err(Error::Config(_))));
        assert!(matches!(RunConfig::from_toml_str("bogus = 1"), Err(Error::Config(_))));
        assert!(matches!(
            RunConfig::from_toml_str("[q]\nkind = \"components\""),
            Err(Error::Config(_))
        ));
    }
}
