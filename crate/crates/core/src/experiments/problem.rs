use serde::Serialize;

use crate::assembly::{assemble, Arrangement, CouplingConfig, GridFunction};
use crate::error::{Error, Result};
use crate::linalg::{solve, BandedSystem};

/// Polynomial with coefficients in ascending powers of `x`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Polynomial {
    pub coefficients: Vec<f64>,
}

impl Polynomial {
    pub fn new(coefficients: Vec<f64>) -> Self {
        Polynomial { coefficients }
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.coefficients.iter().rev().fold(0.0, |acc, c| acc * x + c)
    }

    pub fn derivative(&self) -> Polynomial {
        let coefficients = self.coefficients.iter().enumerate().skip(1).map(|(k, c)| k as f64 * c).collect();
        Polynomial { coefficients }
    }

    pub fn scaled(&self, s: f64) -> Polynomial {
        Polynomial { coefficients: self.coefficients.iter().map(|c| c * s).collect() }
    }

    /// `max |p|` over `[a, b]`, sampled on 4097 points including both ends.
    pub fn max_abs_on(&self, a: f64, b: f64) -> f64 {
        const SAMPLES: usize = 4096;
        (0..=SAMPLES)
            .map(|k| self.eval(a + (b - a) * k as f64 / SAMPLES as f64).abs())
            .fold(0.0, f64::max)
    }
}

/// Right-hand side `f` of `−L u = f`.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Forcing {
    /// `f(x) = −12x² + 4`
    Quartic,
    /// `f ≡ 1`
    Constant,
    /// `f(x) = (1 − x²)(1 + x²) / |x − center|`
    Singular { center: f64 },
    Polynomial { coefficients: Vec<f64> },
}

impl Forcing {
    pub fn eval(&self, x: f64) -> f64 {
        match self {
            Forcing::Quartic => -12.0 * x * x + 4.0,
            Forcing::Constant => 1.0,
            Forcing::Singular { center } => (1.0 - x * x) * (1.0 + x * x) / (x - center).abs(),
            Forcing::Polynomial { coefficients } => Polynomial::new(coefficients.clone()).eval(x),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Forcing::Quartic => "quartic",
            Forcing::Constant => "constant",
            Forcing::Singular { .. } => "singular",
            Forcing::Polynomial { .. } => "polynomial",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Problem {
    pub forcing: Forcing,
    /// Solution of the local problem `−u″ = f`, `u(±1) = 0`, when known.
    pub exact: Option<Polynomial>,
}

impl Problem {
    /// `u₀ = (1 − x)²(1 + x)² = 1 − 2x² + x⁴`.
    pub fn quartic() -> Self {
        Problem { forcing: Forcing::Quartic, exact: Some(Polynomial::new(vec![1.0, 0.0, -2.0, 0.0, 1.0])) }
    }

    /// `u₀ = (1 − x²)/2`.
    pub fn constant() -> Self {
        Problem { forcing: Forcing::Constant, exact: Some(Polynomial::new(vec![0.5, 0.0, -0.5])) }
    }

    pub fn singular(center: f64) -> Self {
        Problem { forcing: Forcing::Singular { center }, exact: None }
    }

    pub fn polynomial(coefficients: Vec<f64>) -> Self {
        Problem { forcing: Forcing::Polynomial { coefficients }, exact: None }
    }

    /// Problem whose local solution is `exact`; the forcing is `−exact″`.
    pub fn manufactured(exact: Polynomial) -> Self {
        let f = exact.derivative().derivative().scaled(-1.0);
        Problem { forcing: Forcing::Polynomial { coefficients: f.coefficients }, exact: Some(exact) }
    }
}

/// Samples the forcing at the interior nodes.
pub fn forcing_vector(config: &CouplingConfig<f64>, forcing: &Forcing) -> Result<Vec<f64>> {
    let mesh = config.mesh();
    let h = mesh.h();
    (1..mesh.last())
        .map(|i| {
            let x = mesh.node(i);
            if let Forcing::Singular { center } = forcing {
                if (x - center).abs() <= 1e-9 * h {
                    return Err(Error::config(format!("singular forcing centre {center} falls on grid node {i}")));
                }
            }
            Ok(forcing.eval(x))
        })
        .collect()
}

/// Assembles (with the configured scheme) and solves `A u = f`.
/// Constraint and ghost values of the result are zero.
pub fn solve_problem(config: &CouplingConfig<f64>, problem: &Problem) -> Result<GridFunction<f64>> {
    let matrix = assemble(config)?;
    let rhs = forcing_vector(config, &problem.forcing)?;
    solve(&BandedSystem::new(&matrix, rhs)?)
}

/// Central differences at interior nodes, one-sided second-order differences
/// at the two endpoints. Defined on the in-domain nodes only.
pub fn gradient(u: &GridFunction<f64>) -> GridFunction<f64> {
    let mesh = *u.mesh();
    let h = mesh.h();
    let n = mesh.last();
    let mut g = GridFunction::zeros(mesh, 0, 0);
    for i in 1..n {
        g.set(i, (u.get(i + 1) - u.get(i - 1)) / (2.0 * h));
    }
    if n >= 2 {
        g.set(0, (-3.0 * u.get(0) + 4.0 * u.get(1) - u.get(2)) / (2.0 * h));
        g.set(n, (3.0 * u.get(n) - 4.0 * u.get(n - 1) + u.get(n - 2)) / (2.0 * h));
    } else {
        let d = (u.get(1) - u.get(0)) / h;
        g.set(0, d);
        g.set(1, d);
    }
    g
}

/// Nodes over which L∞ errors are measured.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ErrorWindow {
    /// Interior nodes, minus the first `r` nodes next to a volumetrically
    /// constrained boundary.
    #[default]
    ExcludeConstraintLayer,
    /// All interior nodes `1..2N−1`.
    Interior,
}

impl ErrorWindow {
    pub fn nodes(self, config: &CouplingConfig<f64>) -> std::ops::Range<isize> {
        let last = config.mesh().last();
        let r = config.ratio() as isize;
        if self == ErrorWindow::Interior {
            return 1..last;
        }
        match config.arrangement() {
            Arrangement::NonlocalLocal { .. } => (r + 1)..last,
            Arrangement::PureNonlocal => (r + 1)..(last - r),
            _ => 1..last,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SolutionErrors {
    pub u: f64,
    pub grad: f64,
}

/// L∞ errors of `u` and of its discrete gradient against `exact` and `exact′`.
pub fn solution_errors(config: &CouplingConfig<f64>, u: &GridFunction<f64>, exact: &Polynomial, window: ErrorWindow) -> SolutionErrors {
    let mesh = config.mesh();
    let du = exact.derivative();
    let g = gradient(u);
    let mut errors = SolutionErrors { u: 0.0, grad: 0.0 };
    for i in window.nodes(config) {
        let x = mesh.node(i);
        errors.u = errors.u.max((u.get(i) - exact.eval(x)).abs());
        errors.grad = errors.grad.max((g.get(i) - du.eval(x)).abs());
    }
    errors
}

/// `r = δ/h` on the symmetric mesh with `h = 1/N`; `δ` must be a multiple of `h`.
pub fn ratio_for(delta: f64, n: usize) -> Result<usize> {
    let r = delta * n as f64;
    let k = r.round();
    if k < 1.0 || (r - k).abs() > 1e-9 * r.max(1.0) {
        return Err(Error::config(format!("horizon {delta} is not a positive multiple of h = 1/{n}")));
    }
    Ok(k as usize)
}
