use rayon::prelude::*;
use serde::Serialize;

use crate::assembly::{Arrangement, CouplingConfig, Mesh, Scheme};
use crate::error::{Error, Result};
use crate::kernels::KernelFamily;

use super::problem::{solution_errors, solve_problem, ErrorWindow, Problem};

/// Refinement study on `(−1, 1)` at fixed `r = δ/h`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceSetup {
    pub problem: Problem,
    pub family: KernelFamily,
    pub ratio: usize,
    pub levels: Vec<usize>,
    #[serde(skip)]
    pub arrangement: Arrangement<f64>,
    pub scheme: Scheme,
    pub window: ErrorWindow,
}

impl ConvergenceSetup {
    /// Nonlocal on `x ≤ 0`, local on `x > 0`, compatible scheme.
    pub fn new(problem: Problem, family: KernelFamily, ratio: usize, levels: Vec<usize>) -> Self {
        ConvergenceSetup {
            problem,
            family,
            ratio,
            levels,
            arrangement: Arrangement::NonlocalLocal { interface: 0.0 },
            scheme: Scheme::Compatible,
            window: ErrorWindow::default(),
        }
    }

    pub fn arrangement(mut self, arrangement: Arrangement<f64>) -> Self {
        self.arrangement = arrangement;
        self
    }

    pub fn scheme(mut self, scheme: Scheme) -> Self {
        self.scheme = scheme;
        self
    }

    pub fn window(mut self, window: ErrorWindow) -> Self {
        self.window = window;
        self
    }

    pub fn config(&self, n: usize) -> Result<CouplingConfig<f64>> {
        Ok(CouplingConfig::with_family(Mesh::symmetric(n)?, self.arrangement, self.family, self.ratio)?.scheme(self.scheme))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConvergenceRow {
    pub n: usize,
    pub h: f64,
    pub delta: f64,
    pub err_u: f64,
    pub order_u: Option<f64>,
    pub err_grad: f64,
    pub order_grad: Option<f64>,
}

/// Rows sorted by decreasing `h`; orders are `log₂(err(2h)/err(h))`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceReport {
    pub rows: Vec<ConvergenceRow>,
}

impl ConvergenceReport {
    pub fn err_u(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.err_u).collect()
    }

    pub fn err_grad(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.err_grad).collect()
    }

    pub fn orders_u(&self) -> Vec<f64> {
        self.rows.iter().filter_map(|r| r.order_u).collect()
    }

    pub fn orders_grad(&self) -> Vec<f64> {
        self.rows.iter().filter_map(|r| r.order_grad).collect()
    }
}

fn order(coarse: f64, fine: f64, ratio: f64) -> f64 {
    (coarse / fine).ln() / ratio.ln()
}

pub fn convergence_study(setup: &ConvergenceSetup) -> Result<ConvergenceReport> {
    let exact = setup
        .problem
        .exact
        .as_ref()
        .ok_or_else(|| Error::config(format!("forcing '{}' has no exact local solution", setup.problem.forcing.name())))?;
    if setup.levels.is_empty() {
        return Err(Error::config("convergence study needs at least one level"));
    }
    let mut levels = setup.levels.clone();
    levels.sort_unstable();
    levels.dedup();
    let configs = levels.iter().map(|&n| setup.config(n)).collect::<Result<Vec<_>>>()?;
    let errors = configs
        .par_iter()
        .map(|c| solve_problem(c, &setup.problem).map(|u| solution_errors(c, &u, exact, setup.window)))
        .collect::<Result<Vec<_>>>()?;

    let mut rows: Vec<ConvergenceRow> = Vec::with_capacity(levels.len());
    for (c, e) in configs.iter().zip(errors) {
        let h = c.mesh().h();
        let (order_u, order_grad) = match rows.last() {
            Some(prev) => {
                let ratio = prev.h / h;
                (Some(order(prev.err_u, e.u, ratio)), Some(order(prev.err_grad, e.grad, ratio)))
            }
            None => (None, None),
        };
        rows.push(ConvergenceRow {
            n: c.mesh().n_half(),
            h,
            delta: c.delta(),
            err_u: e.u,
            order_u,
            err_grad: e.grad,
            order_grad,
        });
    }
    Ok(ConvergenceReport { rows })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DirectComparison {
    pub interface: f64,
    pub compatible: ConvergenceReport,
    pub direct: ConvergenceReport,
}

/// Runs the same refinement with both transitional discretisations.
pub fn compare_direct_vs_compatible(setup: &ConvergenceSetup, interface: f64) -> Result<DirectComparison> {
    let base = setup.clone().arrangement(Arrangement::NonlocalLocal { interface });
    let compatible = convergence_study(&base.clone().scheme(Scheme::Compatible))?;
    let direct = convergence_study(&base.scheme(Scheme::Direct))?;
    Ok(DirectComparison { interface, compatible, direct })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DeltaLinearityRow {
    pub ratio: usize,
    pub delta: f64,
    pub err_u: f64,
    pub err_grad: f64,
    /// `err(δ) / err(previous δ)`; the previous row has half this horizon.
    pub growth_u: Option<f64>,
}

/// Errors at a fixed mesh for several horizons `δ = r·h`.
pub fn delta_linearity_study(problem: &Problem, family: KernelFamily, ratios: &[usize], n: usize) -> Result<Vec<DeltaLinearityRow>> {
    let setups: Vec<ConvergenceSetup> = ratios.iter().map(|&r| ConvergenceSetup::new(problem.clone(), family, r, vec![n])).collect();
    let reports = setups.par_iter().map(convergence_study).collect::<Result<Vec<_>>>()?;
    let mut rows: Vec<DeltaLinearityRow> = Vec::with_capacity(ratios.len());
    for (&ratio, report) in ratios.iter().zip(reports) {
        let row = report.rows[0];
        let growth_u = rows.last().map(|p| row.err_u / p.err_u);
        rows.push(DeltaLinearityRow { ratio, delta: row.delta, err_u: row.err_u, err_grad: row.err_grad, growth_u });
    }
    Ok(rows)
}
