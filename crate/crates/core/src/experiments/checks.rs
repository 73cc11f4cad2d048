use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::assembly::{assemble, CouplingConfig, RegimeLabel};
use crate::error::Result;
use crate::linalg::{inverse_positivity_check, BandedLu, InversePositivityReport, DENSE_INVERSE_CAP};

use super::problem::Polynomial;

/// Relative tolerance of the patch test.
pub const PATCH_TOL: f64 = 1e-11;

/// Degree of the random nonnegative forcing polynomials.
pub const MAX_PRINCIPLE_DEGREE: usize = 4;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PatchResult {
    pub residual: f64,
    pub threshold: f64,
    pub pass: bool,
}

/// Largest full-stencil residual of `u = F·x + c` over the interior rows.
pub fn patch_test(config: &CouplingConfig<f64>, slope: f64, offset: f64) -> Result<PatchResult> {
    let a = assemble(config)?;
    let u = config.sample(|x| slope * x + offset);
    let residual = a.apply(&u)?.into_iter().fold(0.0, |m: f64, v| m.max(v.abs()));
    let threshold = PATCH_TOL * a.stencil_norm_inf() * u.max_abs();
    Ok(PatchResult { residual, threshold, pass: residual <= threshold })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TruncationReport {
    pub nonlocal: Option<f64>,
    pub transitional: Option<f64>,
    pub local: Option<f64>,
    /// `max |u″|` over the domain.
    pub c_star: f64,
}

/// `max |L u(x_i) − u″(x_i)|` per regime for the nodal values of `u`.
pub fn truncation_error(config: &CouplingConfig<f64>, u: &Polynomial) -> Result<TruncationReport> {
    let a = assemble(config)?;
    let sampled = config.sample(|x| u.eval(x));
    let au = a.apply(&sampled)?;
    let upp = u.derivative().derivative();
    let mesh = config.mesh();
    let mut report = TruncationReport {
        nonlocal: None,
        transitional: None,
        local: None,
        c_star: upp.max_abs_on(mesh.x_left(), mesh.x_right()),
    };
    for (row, regime) in a.regimes().iter().enumerate() {
        let x = mesh.node(a.node_of_row(row));
        let t = (-au[row] - upp.eval(x)).abs();
        let slot = match regime.label() {
            RegimeLabel::Nonlocal => &mut report.nonlocal,
            RegimeLabel::Transitional => &mut report.transitional,
            RegimeLabel::Local => &mut report.local,
        };
        *slot = Some(slot.map_or(t, |m: f64| m.max(t)));
    }
    Ok(report)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MaxPrincipleTrial {
    pub trial: usize,
    /// Coefficients in `t = (x − x_left)/(x_right − x_left)`.
    pub coefficients: Vec<f64>,
    pub min_u: f64,
    pub max_abs_u: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MaxPrincipleReport {
    pub seed: u64,
    pub trials: Vec<MaxPrincipleTrial>,
    pub inverse_positivity: Option<InversePositivityReport>,
}

impl MaxPrincipleReport {
    pub fn passed(&self) -> bool {
        self.trials.iter().all(|t| t.pass) && self.inverse_positivity.as_ref().is_none_or(|r| r.pass)
    }
}

/// Solves with random forcing `f ≥ 0` and checks `min u ≥ −1e−12·‖u‖∞`.
///
/// Trial `k` draws from stream `k` of a ChaCha8 generator seeded with `seed`,
/// so results do not depend on scheduling.
pub fn max_principle_check(config: &CouplingConfig<f64>, trials: usize, seed: u64) -> Result<MaxPrincipleReport> {
    let a = assemble(config)?;
    let lu = BandedLu::factor(&a)?;
    let mesh = *config.mesh();
    let width = mesh.x_right() - mesh.x_left();
    let trials = (0..trials)
        .into_par_iter()
        .map(|trial| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(trial as u64);
            let coefficients: Vec<f64> = (0..=MAX_PRINCIPLE_DEGREE).map(|_| rng.gen_range(0.0..1.0)).collect();
            let p = Polynomial::new(coefficients.clone());
            let rhs: Vec<f64> = (1..mesh.last()).map(|i| p.eval((mesh.node(i) - mesh.x_left()) / width)).collect();
            let u = lu.solve(&rhs)?;
            let min_u = u.iter().copied().fold(f64::INFINITY, f64::min);
            let max_abs_u = u.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            Ok(MaxPrincipleTrial { trial, coefficients, min_u, max_abs_u, pass: min_u >= -1e-12 * max_abs_u })
        })
        .collect::<Result<Vec<_>>>()?;
    let inverse_positivity = if a.dim() <= DENSE_INVERSE_CAP { Some(inverse_positivity_check(&a)?) } else { None };
    Ok(MaxPrincipleReport { seed, trials, inverse_positivity })
}
