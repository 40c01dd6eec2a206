//! TOML problem configuration.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use annulus_core::conditions::{ConstantId, ConstantValues, ConstantsRequest};
use annulus_core::expr::ParseError;
use annulus_core::kernel::KernelError;
use annulus_core::quadrature::DEFAULT_CUTOFFS;
use annulus_core::solver::{ProblemSpec, SolverError};
use annulus_core::weights::WeightError;
use annulus_core::{Expr, KernelParams, TransformSpec, WeightModel, WeightSpec};

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("malformed config: {0}")]
    Toml(#[from] toml::de::Error),
    #[error("{what}: cannot parse {src:?}: {error}")]
    Expr {
        what: String,
        src: String,
        error: ParseError,
    },
    #[error("kernel: {0}")]
    Kernel(#[from] KernelError),
    #[error("weights: {0}")]
    Weight(#[from] WeightError),
    #[error("system: {0}")]
    Solver(#[from] SolverError),
    #[error("{0}")]
    Invalid(String),
    #[error("unknown built-in example {0}; expected 1, 2, 3 or 4")]
    UnknownExample(u32),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KernelSection {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub delta: f64,
    pub r0: f64,
    #[serde(rename = "N")]
    pub dim: u32,
    #[serde(rename = "R1", default, skip_serializing_if = "Option::is_none")]
    pub r1: Option<f64>,
    #[serde(rename = "R2", default, skip_serializing_if = "Option::is_none")]
    pub r2: Option<f64>,
}

impl Default for KernelSection {
    fn default() -> Self {
        KernelSection {
            alpha: 1.0,
            beta: 1.0,
            gamma: 1.0,
            delta: 1.0,
            r0: 1.0,
            dim: 3,
            r1: None,
            r2: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WeightsSection {
    #[serde(default)]
    pub factors: Vec<String>,
    #[serde(default)]
    pub p: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lower_bounds: Option<Vec<f64>>,
    /// Weight `omega(t)` replacing the transformed construction.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub synthetic: Option<String>,
}

impl Default for WeightsSection {
    fn default() -> Self {
        WeightsSection {
            factors: Vec::new(),
            p: Vec::new(),
            lower_bounds: None,
            synthetic: Some("1".into()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemSection {
    pub n: usize,
    pub g: Vec<String>,
}

impl Default for SystemSection {
    fn default() -> Self {
        SystemSection {
            n: 1,
            g: vec!["1".into()],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct NumericsSection {
    pub grid_size: usize,
    pub cutoff: f64,
    pub tol: f64,
    pub max_iter: usize,
    pub p: f64,
    pub q: f64,
    pub cutoffs: Vec<f64>,
}

impl Default for NumericsSection {
    fn default() -> Self {
        NumericsSection {
            grid_size: 513,
            cutoff: 1e-3,
            tol: 1e-10,
            max_iter: 200,
            p: 2.0,
            q: 2.0,
            cutoffs: DEFAULT_CUTOFFS.to_vec(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WindowsSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub a1: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub a2: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub b1: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub b2: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c1: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c2: Option<f64>,
    #[serde(rename = "a'", alias = "a_prime", default, skip_serializing_if = "Option::is_none")]
    pub a_prime: Option<f64>,
    #[serde(rename = "b'", alias = "b_prime", default, skip_serializing_if = "Option::is_none")]
    pub b_prime: Option<f64>,
    #[serde(rename = "c'", alias = "c_prime", default, skip_serializing_if = "Option::is_none")]
    pub c_prime: Option<f64>,
    #[serde(rename = "K", default, skip_serializing_if = "Option::is_none")]
    pub k: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lipschitz_interval: Option<[f64; 2]>,
}

/// Constant values that replace computed ones in the window checks.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InjectSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub wp: Option<f64>,
    #[serde(rename = "Q1", default, skip_serializing_if = "Option::is_none")]
    pub q1: Option<f64>,
    #[serde(rename = "Q2", default, skip_serializing_if = "Option::is_none")]
    pub q2: Option<f64>,
    #[serde(rename = "N2", default, skip_serializing_if = "Option::is_none")]
    pub n2: Option<f64>,
    #[serde(rename = "M2", default, skip_serializing_if = "Option::is_none")]
    pub m2: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k1: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k2: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k3: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k4: Option<f64>,
    #[serde(rename = "O1", default, skip_serializing_if = "Option::is_none")]
    pub o1: Option<f64>,
    #[serde(rename = "O2", default, skip_serializing_if = "Option::is_none")]
    pub o2: Option<f64>,
    #[serde(rename = "O3", default, skip_serializing_if = "Option::is_none")]
    pub o3: Option<f64>,
    #[serde(rename = "O4", default, skip_serializing_if = "Option::is_none")]
    pub o4: Option<f64>,
}

impl InjectSection {
    pub fn entries(&self) -> Vec<(ConstantId, f64)> {
        use ConstantId::*;
        [
            (Q1, self.q1),
            (Q2, self.q2),
            (N2, self.n2),
            (M2, self.m2),
            (K1, self.k1),
            (K2, self.k2),
            (K3, self.k3),
            (K4, self.k4),
            (O1, self.o1),
            (O2, self.o2),
            (O3, self.o3),
            (O4, self.o4),
        ]
        .into_iter()
        .filter_map(|(id, v)| v.map(|v| (id, v)))
        .collect()
    }

    /// Overrides `base` with every injected entry.
    pub fn apply(&self, mut base: ConstantValues) -> ConstantValues {
        for (id, v) in self.entries() {
            base.set(id, Some(v));
        }
        if let Some(wp) = self.wp {
            base.wp = Some(wp);
        }
        base
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemConfig {
    #[serde(default)]
    pub kernel: KernelSection,
    #[serde(default)]
    pub weights: WeightsSection,
    #[serde(default)]
    pub system: SystemSection,
    #[serde(default)]
    pub numerics: NumericsSection,
    #[serde(default)]
    pub windows: WindowsSection,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub inject: Option<InjectSection>,
}

pub const DEFAULT_CONFIG: &str = include_str!("../configs/synthetic.toml");

pub const EXAMPLES: [&str; 4] = [
    include_str!("../configs/example1.toml"),
    include_str!("../configs/example2.toml"),
    include_str!("../configs/example3.toml"),
    include_str!("../configs/example4.toml"),
];

fn parse_expr(what: String, src: &str, var: &str) -> Result<Expr, ConfigError> {
    Expr::parse(src, var).map_err(|error| ConfigError::Expr {
        what,
        src: src.to_string(),
        error,
    })
}

impl ProblemConfig {
    pub fn from_toml(text: &str) -> Result<Self, ConfigError> {
        let cfg: ProblemConfig = toml::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &std::path::Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.display().to_string(),
            source,
        })?;
        ProblemConfig::from_toml(&text)
    }

    pub fn example(id: u32) -> Result<Self, ConfigError> {
        let text = id
            .checked_sub(1)
            .and_then(|i| EXAMPLES.get(i as usize))
            .ok_or(ConfigError::UnknownExample(id))?;
        ProblemConfig::from_toml(text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    fn validate(&self) -> Result<(), ConfigError> {
        if self.system.n != self.system.g.len() {
            return Err(ConfigError::Invalid(format!(
                "system.n = {} but {} nonlinearities given",
                self.system.n,
                self.system.g.len()
            )));
        }
        let n = &self.numerics;
        if !(n.tol > 0.0) {
            return Err(ConfigError::Invalid(format!("numerics.tol = {} must be positive", n.tol)));
        }
        if !(n.p >= 1.0 && n.q >= 1.0) {
            return Err(ConfigError::Invalid("numerics.p and numerics.q must be >= 1".into()));
        }
        if let Some([lo, hi]) = self.windows.lipschitz_interval {
            if !(lo < hi && lo.is_finite() && hi.is_finite()) {
                return Err(ConfigError::Invalid(format!(
                    "windows.lipschitz_interval [{lo}, {hi}] is empty"
                )));
            }
        }
        Ok(())
    }

    pub fn kernel(&self) -> Result<KernelParams, ConfigError> {
        let k = &self.kernel;
        Ok(KernelParams::new(k.alpha, k.beta, k.gamma, k.delta, k.r0, k.dim)?)
    }

    pub fn model(&self) -> Result<WeightModel, ConfigError> {
        let kernel = self.kernel()?;
        let w = &self.weights;
        if let Some(src) = &w.synthetic {
            if !w.factors.is_empty() || !w.p.is_empty() || w.lower_bounds.is_some() {
                return Err(ConfigError::Invalid(
                    "weights.synthetic excludes factors, p and lower_bounds".into(),
                ));
            }
            let omega = parse_expr("weights.synthetic".into(), src, "t")?;
            return Ok(WeightModel::synthetic(kernel, omega)?);
        }
        let factors = w
            .factors
            .iter()
            .enumerate()
            .map(|(i, s)| parse_expr(format!("weights.factors[{}]", i + 1), s, "t"))
            .collect::<Result<Vec<_>, _>>()?;
        let spec = WeightSpec::new(factors, w.p.clone(), w.lower_bounds.clone())?;
        let ts = TransformSpec::new(self.kernel.r0, self.kernel.dim, self.kernel.r1, self.kernel.r2)?;
        Ok(WeightModel::new(kernel, spec, ts)?)
    }

    pub fn nonlinearities(&self) -> Result<Vec<Expr>, ConfigError> {
        self.system
            .g
            .iter()
            .enumerate()
            .map(|(i, s)| parse_expr(format!("system.g[{}]", i + 1), s, "u"))
            .collect()
    }

    /// Hölder exponent `q` for the constants; synthetic weights carry no factors.
    pub fn constants_request(&self) -> ConstantsRequest {
        let q = if self.weights.synthetic.is_some() {
            1.0
        } else {
            self.numerics.q
        };
        ConstantsRequest {
            q,
            tol: self.numerics.tol,
            cutoffs: self.numerics.cutoffs.clone(),
        }
    }

    pub fn problem(&self) -> Result<ProblemSpec, ConfigError> {
        let n = &self.numerics;
        Ok(ProblemSpec::new(
            self.nonlinearities()?,
            self.model()?,
            n.grid_size,
            n.cutoff,
            n.p,
        )?)
    }

    pub fn transform(&self) -> Result<TransformSpec, ConfigError> {
        Ok(TransformSpec::new(
            self.kernel.r0,
            self.kernel.dim,
            self.kernel.r1,
            self.kernel.r2,
        )?)
    }
}
