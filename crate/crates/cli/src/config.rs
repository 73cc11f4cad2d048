//! Run configuration, parsed from TOML.

use serde::{Deserialize, Serialize};

use qnl_core::experiments::{ErrorWindow, Forcing, Polynomial, Problem};
use qnl_core::linalg::DEFAULT_SEED;
use qnl_core::{Arrangement, CouplingConfig, KernelFamily, Mesh, Scheme};

use crate::error::CliError;

fn is_default<T: Default + PartialEq>(v: &T) -> bool {
    *v == T::default()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum KernelName {
    Constant,
    #[value(name = "inverse_abs")]
    InverseAbs,
}

impl KernelName {
    pub fn family(self) -> KernelFamily {
        match self {
            KernelName::Constant => KernelFamily::Constant,
            KernelName::InverseAbs => KernelFamily::InverseAbs,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum SchemeName {
    #[default]
    Compatible,
    Direct,
}

impl SchemeName {
    pub fn scheme(self) -> Scheme {
        match self {
            SchemeName::Compatible => Scheme::Compatible,
            SchemeName::Direct => Scheme::Direct,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ForcingName {
    Quartic,
    Constant,
    Singular,
    Polynomial,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WindowName {
    ExcludeConstraintLayer,
    Interior,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ArrangementConfig {
    PureNonlocal,
    PureLocal,
    NonlocalLocal { interface: f64 },
    LocalNonlocalLocal { left: f64, right: f64 },
}

impl ArrangementConfig {
    pub fn arrangement(self) -> Arrangement<f64> {
        match self {
            ArrangementConfig::PureNonlocal => Arrangement::PureNonlocal,
            ArrangementConfig::PureLocal => Arrangement::PureLocal,
            ArrangementConfig::NonlocalLocal { interface } => Arrangement::NonlocalLocal { interface },
            ArrangementConfig::LocalNonlocalLocal { left, right } => Arrangement::LocalNonlocalLocal { left, right },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeshConfig {
    pub x_left: f64,
    pub x_right: f64,
    /// Half the number of subintervals; several values mean a refinement sweep.
    pub n: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KernelConfig {
    #[serde(rename = "type")]
    pub kind: KernelName,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ratio: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemConfig {
    pub forcing: ForcingName,
    /// Forcing coefficients (ascending powers) for `polynomial`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coefficients: Option<Vec<f64>>,
    /// Exact local solution (ascending powers), overriding the built-in one.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub exact: Option<Vec<f64>>,
    /// Singularity location; defaults to `h/2`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub center: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dir: Option<String>,
}

/// Subcommand-specific parameters.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StudyConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trials: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub deltas: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ratios: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kernels: Option<Vec<KernelName>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub arrangements: Option<Vec<ArrangementConfig>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub window: Option<WindowName>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub points: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub slope: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub offset: Option<f64>,
}

/// Tolerances used by `--check`.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CheckConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub err_u: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub err_grad: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rel_tol: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub min_final_order: Option<f64>,
    /// Fallback when the tabulated values are missed: every order in this range ...
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub order_range: Option<[f64; 2]>,
    /// ... and every refinement ratio within this relative distance of ½.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub halving_tol: Option<f64>,
    /// Number of final refinement orders checked against `order_range` in `compare-direct`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub last_orders: Option<usize>,
    /// `compare-direct`: the direct gradient error at `direct_levels[1]` must be at least
    /// `direct_floor` times its value at `direct_levels[0]`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub direct_floor: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub direct_levels: Option<[usize; 2]>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub scheme: SchemeName,
    pub seed: u64,
    pub mesh: MeshConfig,
    pub kernel: KernelConfig,
    pub arrangement: ArrangementConfig,
    pub problem: ProblemConfig,
    #[serde(default, skip_serializing_if = "is_default")]
    pub output: OutputConfig,
    #[serde(default, skip_serializing_if = "is_default")]
    pub study: StudyConfig,
    #[serde(default, skip_serializing_if = "is_default")]
    pub check: CheckConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            scheme: SchemeName::Compatible,
            seed: DEFAULT_SEED,
            mesh: MeshConfig { x_left: -1.0, x_right: 1.0, n: vec![100] },
            kernel: KernelConfig { kind: KernelName::Constant, delta: None, ratio: Some(3) },
            arrangement: ArrangementConfig::NonlocalLocal { interface: 0.0 },
            problem: ProblemConfig { forcing: ForcingName::Quartic, coefficients: None, exact: None, center: None },
            output: OutputConfig::default(),
            study: StudyConfig::default(),
            check: CheckConfig::default(),
        }
    }
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self, CliError> {
        let config: RunConfig = toml::from_str(text).map_err(|e| CliError::Config(format!("invalid config: {e}")))?;
        config.validate()?;
        Ok(config)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config is representable as TOML")
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let bad = |m: String| Err(CliError::Config(m));
        let m = &self.mesh;
        if !(m.x_left.is_finite() && m.x_right.is_finite() && m.x_left < m.x_right) {
            return bad(format!("mesh domain [{}, {}] is empty", m.x_left, m.x_right));
        }
        if m.n.is_empty() || m.n.contains(&0) {
            return bad("mesh.n must list positive values".into());
        }
        match (self.kernel.delta, self.kernel.ratio) {
            (Some(_), Some(_)) => return bad("kernel: give exactly one of delta and ratio, not both".into()),
            (None, None) => return bad("kernel: one of delta or ratio is required".into()),
            (Some(d), None) if !(d > 0.0 && d.is_finite()) => return bad(format!("kernel.delta must be positive, got {d}")),
            (None, Some(0)) => return bad("kernel.ratio must be at least 1".into()),
            _ => {}
        }
        if self.problem.forcing == ForcingName::Polynomial && self.problem.coefficients.is_none() {
            return bad("problem.coefficients is required for polynomial forcing".into());
        }
        if let Some(0) = self.study.points {
            return bad("study.points must be positive".into());
        }
        Ok(())
    }

    pub fn family(&self) -> KernelFamily {
        self.kernel.kind.family()
    }

    pub fn mesh(&self, n: usize) -> Result<Mesh<f64>, CliError> {
        Ok(Mesh::new(self.mesh.x_left, self.mesh.x_right, n)?)
    }

    /// `r = δ/h` at `N`; a `delta` must be an integer multiple of `h`.
    pub fn ratio_at(&self, n: usize) -> Result<usize, CliError> {
        if let Some(r) = self.kernel.ratio {
            return Ok(r);
        }
        let delta = self.kernel.delta.expect("validated");
        let h = self.mesh(n)?.h();
        let r = delta / h;
        let k = r.round();
        if k < 1.0 || (r - k).abs() > 1e-9 * r {
            return Err(CliError::Config(format!("kernel.delta = {delta} is not a positive multiple of h = {h} (N = {n})")));
        }
        Ok(k as usize)
    }

    /// Fixed ratio for refinement studies, which keep `δ/h` constant.
    pub fn fixed_ratio(&self) -> Result<usize, CliError> {
        match self.kernel.ratio {
            Some(r) => Ok(r),
            None => self.ratio_at(self.mesh.n[0]),
        }
    }

    pub fn coupling(&self, n: usize) -> Result<CouplingConfig<f64>, CliError> {
        self.coupling_with(n, self.family(), self.arrangement, self.ratio_at(n)?)
    }

    pub fn coupling_with(&self, n: usize, family: KernelFamily, arrangement: ArrangementConfig, ratio: usize) -> Result<CouplingConfig<f64>, CliError> {
        let c = CouplingConfig::with_family(self.mesh(n)?, arrangement.arrangement(), family, ratio)?;
        Ok(c.scheme(self.scheme.scheme()))
    }

    pub fn window(&self) -> ErrorWindow {
        match self.study.window {
            Some(WindowName::Interior) => ErrorWindow::Interior,
            _ => ErrorWindow::ExcludeConstraintLayer,
        }
    }

    /// Problem for a run at `N` (the singular centre defaults to `h/2`).
    pub fn problem(&self, n: usize) -> Result<Problem, CliError> {
        let p = &self.problem;
        let mut problem = match p.forcing {
            ForcingName::Quartic => Problem::quartic(),
            ForcingName::Constant => Problem::constant(),
            ForcingName::Singular => Problem::singular(p.center.unwrap_or(self.mesh(n)?.h() / 2.0)),
            ForcingName::Polynomial => Problem {
                forcing: Forcing::Polynomial { coefficients: p.coefficients.clone().expect("validated") },
                exact: None,
            },
        };
        if let Some(exact) = &p.exact {
            problem.exact = Some(Polynomial::new(exact.clone()));
        }
        Ok(problem)
    }

    /// Requires the symmetric domain `(−1, 1)` used by the built-in studies.
    pub fn require_symmetric_domain(&self, what: &str) -> Result<(), CliError> {
        if self.mesh.x_left != -1.0 || self.mesh.x_right != 1.0 {
            return Err(CliError::Config(format!(
                "{what} runs on the domain [-1, 1], got [{}, {}]",
                self.mesh.x_left, self.mesh.x_right
            )));
        }
        Ok(())
    }
}
