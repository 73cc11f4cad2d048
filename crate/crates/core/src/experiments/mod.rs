//! Benchmark problems and the numerical studies built on them.

mod checks;
mod convergence;
mod problem;
mod studies;

pub use checks::{
    max_principle_check, patch_test, truncation_error, MaxPrincipleReport, MaxPrincipleTrial, PatchResult,
    TruncationReport, MAX_PRINCIPLE_DEGREE, PATCH_TOL,
};
pub use convergence::{
    compare_direct_vs_compatible, convergence_study, delta_linearity_study, ConvergenceReport, ConvergenceRow,
    ConvergenceSetup, DeltaLinearityRow, DirectComparison,
};
pub use problem::{
    forcing_vector, gradient, ratio_for, solution_errors, solve_problem, ErrorWindow, Forcing, Polynomial, Problem,
    SolutionErrors,
};
pub use studies::{
    boundary_layer_study, boundary_layer_sweep, singular_forcing_study, BoundaryLayerStudy, CurveSet, SingularStudy,
    LAYER_WINDOW, LNL_INTERFACES, SINGULAR_WINDOW,
};

use serde::Serialize;

/// Named scalar result; serialises as `{name, value}`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Metric {
    pub name: String,
    pub value: f64,
}

impl Metric {
    pub fn new(name: impl Into<String>, value: f64) -> Self {
        Metric { name: name.into(), value }
    }
}
