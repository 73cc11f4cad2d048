//! Grid, regime classification and assembly of the discrete QNL operator.
//!
//! The assembled matrix is `A = −L^qnl`, so the solved system reads `A u = f`.
//! Nonlocal rows use second-moment cell quadrature, local rows the central
//! second difference. Transitional rows split the one-sided nonlocal integral
//! into a centred diffusion part and a convection part; the convection
//! balances the weighted local convection exactly on linear fields.

mod energy;
mod mesh;
mod operator;

pub use energy::{bilinear, discrete_energy, energy_parts, full_nonlocal_form, EnergyParts};
pub use mesh::{Arrangement, Mesh, Regime, RegimeLabel, Side};
pub use operator::{GridFunction, OperatorMatrix};

pub(crate) use mesh::Layout;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::kernels::{Kernel, KernelFamily, MomentOrder};
use crate::scalar::Real;

/// Relative tolerance on `δ = r·h`.
const HORIZON_MATCH_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    /// Diffusion/convection split in the transitional band.
    #[default]
    Compatible,
    /// One-sided zeroth-moment quadrature of the transitional nonlocal term.
    Direct,
}

/// Which cells the transitional-row sums run over.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum TransitionalIndexing {
    /// Cells tile `(ℓh, δ)` exactly: `j = ℓ+1..=r`.
    #[default]
    ExactTiling,
    /// Sums start at `j = ℓ`, including the cell `((ℓ−1)h, ℓh)`.
    /// Breaks the patch test; kept for comparison only.
    Literal,
}

#[derive(Debug, Clone)]
pub struct CouplingConfig<T> {
    mesh: Mesh<T>,
    arrangement: Arrangement<T>,
    kernel: Kernel<T>,
    ratio: usize,
    scheme: Scheme,
    indexing: TransitionalIndexing,
    layout: Layout,
}

impl<T: Real> CouplingConfig<T> {
    /// Validates that `δ = r·h` and that all interfaces sit on grid nodes.
    pub fn new(mesh: Mesh<T>, arrangement: Arrangement<T>, kernel: Kernel<T>, ratio: usize) -> Result<Self> {
        if ratio == 0 {
            return Err(Error::config("horizon ratio r = δ/h must be at least 1"));
        }
        let expected = mesh.h() * T::from_count(ratio);
        if (kernel.delta() - expected).abs() > T::lit(HORIZON_MATCH_TOL) * expected {
            return Err(Error::config(format!(
                "kernel horizon {} does not equal r·h = {ratio}·{} = {expected}",
                kernel.delta(),
                mesh.h()
            )));
        }
        let layout = Layout::resolve(&mesh, &arrangement, ratio)?;
        Ok(CouplingConfig {
            mesh,
            arrangement,
            kernel,
            ratio,
            scheme: Scheme::Compatible,
            indexing: TransitionalIndexing::ExactTiling,
            layout,
        })
    }

    /// Builds the kernel of `family` with horizon `δ = r·h`.
    pub fn with_family(mesh: Mesh<T>, arrangement: Arrangement<T>, family: KernelFamily, ratio: usize) -> Result<Self> {
        let kernel = family.with_horizon(mesh.h() * T::from_count(ratio.max(1)))?;
        Self::new(mesh, arrangement, kernel, ratio)
    }

    pub fn scheme(mut self, scheme: Scheme) -> Self {
        self.scheme = scheme;
        self
    }

    pub fn indexing(mut self, indexing: TransitionalIndexing) -> Self {
        self.indexing = indexing;
        self
    }

    pub fn mesh(&self) -> &Mesh<T> {
        &self.mesh
    }

    pub fn arrangement(&self) -> &Arrangement<T> {
        &self.arrangement
    }

    pub fn kernel(&self) -> &Kernel<T> {
        &self.kernel
    }

    pub fn ratio(&self) -> usize {
        self.ratio
    }

    pub fn delta(&self) -> T {
        self.kernel.delta()
    }

    pub fn scheme_kind(&self) -> Scheme {
        self.scheme
    }

    pub fn indexing_kind(&self) -> TransitionalIndexing {
        self.indexing
    }

    pub(crate) fn layout(&self) -> Layout {
        self.layout
    }

    pub fn ghost_counts(&self) -> (usize, usize) {
        self.layout.ghost_counts(self.ratio, self.mesh.last())
    }

    /// Zero grid function laid out for this configuration.
    pub fn zeros(&self) -> GridFunction<T> {
        let (gl, gr) = self.ghost_counts();
        GridFunction::zeros(self.mesh, gl, gr)
    }

    /// Samples `f` on every node, ghosts included.
    pub fn sample(&self, f: impl Fn(T) -> T) -> GridFunction<T> {
        let (gl, gr) = self.ghost_counts();
        GridFunction::from_fn(self.mesh, gl, gr, f)
    }
}

/// Regime of every in-domain node `0..=2N`.
pub fn classify<T: Real>(config: &CouplingConfig<T>) -> Vec<Regime> {
    (0..=config.mesh.last()).map(|i| config.layout.regime(i, config.ratio)).collect()
}

/// Assembles `A = −L^qnl` with the scheme selected in `config`.
pub fn assemble<T: Real>(config: &CouplingConfig<T>) -> Result<OperatorMatrix<T>> {
    assemble_scheme(config, config.scheme)
}

/// Assembles the direct (unsplit) transitional discretisation.
pub fn assemble_direct<T: Real>(config: &CouplingConfig<T>) -> Result<OperatorMatrix<T>> {
    assemble_scheme(config, Scheme::Direct)
}

/// Cell moments `M_p((j−1)h, jh)` for `j = 1..=r`, index 0 unused.
struct CellMoments<T> {
    first: Vec<T>,
    second: Vec<T>,
}

impl<T: Real> CellMoments<T> {
    fn new(kernel: &Kernel<T>, h: T, r: usize) -> Result<Self> {
        let mut first = vec![T::zero(); r + 1];
        let mut second = vec![T::zero(); r + 1];
        for j in 1..=r {
            let a = h * T::from_count(j - 1);
            let b = h * T::from_count(j);
            first[j] = kernel.moment(MomentOrder::First, a, b)?;
            second[j] = kernel.moment(MomentOrder::Second, a, b)?;
        }
        Ok(CellMoments { first, second })
    }
}

/// Row of `L` as a dense offset table `-p..=p`.
struct RowBuilder<T> {
    p: isize,
    weights: Vec<T>,
}

impl<T: Real> RowBuilder<T> {
    fn new(p: usize) -> Self {
        RowBuilder { p: p as isize, weights: vec![T::zero(); 2 * p + 1] }
    }

    fn add(&mut self, offset: isize, w: T) {
        let k = (offset + self.p) as usize;
        self.weights[k] = self.weights[k] + w;
    }

    /// Sets the centre so the row annihilates constants, then negates into `A`.
    fn finish_into(mut self, out: &mut Vec<T>) {
        let centre = self.p as usize;
        self.weights[centre] = T::zero();
        let off_sum: T = self.weights.iter().copied().sum();
        self.weights[centre] = -off_sum;
        out.extend(self.weights.iter().map(|&w| -w));
    }
}

fn assemble_scheme<T: Real>(config: &CouplingConfig<T>, scheme: Scheme) -> Result<OperatorMatrix<T>> {
    let mesh = config.mesh;
    let h = mesh.h();
    let h2 = h * h;
    let r = config.ratio;
    let p = match config.layout {
        Layout::PureLocal => 1,
        _ => r.max(1),
    };
    let two = T::lit(2.0);
    let kernel = &config.kernel;
    let delta = kernel.delta();
    let cells = CellMoments::new(kernel, h, r)?;
    let (gl, gr) = config.ghost_counts();
    let lowest = -(gl as isize);
    let highest = mesh.last() + gr as isize;

    let n = mesh.intervals() - 1;
    let mut stencils = Vec::with_capacity(n * (2 * p + 1));
    let mut regimes = Vec::with_capacity(n);

    for node in 1..mesh.last() {
        let regime = config.layout.regime(node, r);
        let mut row = RowBuilder::new(p);
        let mut reach = 1isize;
        match regime {
            Regime::Nonlocal => {
                for j in 1..=r {
                    let jh = h * T::from_count(j);
                    let w = two * cells.second[j] / (jh * jh);
                    row.add(j as isize, w);
                    row.add(-(j as isize), w);
                }
                reach = r as isize;
            }
            Regime::Local => {
                row.add(1, T::one() / h2);
                row.add(-1, T::one() / h2);
            }
            Regime::Transitional { depth, nonlocal_side } => {
                let s = nonlocal_side.sign();
                let lh = h * T::from_count(depth);
                let start = match config.indexing {
                    TransitionalIndexing::ExactTiling => depth + 1,
                    TransitionalIndexing::Literal => depth.max(1),
                };
                match scheme {
                    Scheme::Compatible => {
                        for j in start..=r {
                            let jh = h * T::from_count(j);
                            let diffusion = cells.second[j] / (jh * jh);
                            let convection = T::from_isize(s).unwrap() * cells.first[j] / jh;
                            row.add(j as isize, diffusion - convection);
                            row.add(-(j as isize), diffusion + convection);
                            reach = reach.max(j as isize);
                        }
                    }
                    Scheme::Direct => {
                        for j in depth + 1..=r {
                            let a = h * T::from_count(j - 1);
                            let b = h * T::from_count(j);
                            let w = two * kernel.moment(MomentOrder::Zeroth, a, b)?;
                            row.add(-s * j as isize, w);
                            reach = reach.max(j as isize);
                        }
                    }
                }
                let tail = kernel.moment(MomentOrder::First, lh, delta)?;
                // weighted local convection, differenced away from the nonlocal region
                row.add(s, two * tail / h);
                let weight = two * kernel.moment(MomentOrder::Second, T::zero(), lh)? + two * lh * tail;
                row.add(1, weight / h2);
                row.add(-1, weight / h2);
            }
        }
        if node - reach < lowest || node + reach > highest {
            return Err(Error::config(format!(
                "{:?} node at x = {} has a stencil of reach {reach} that leaves the grid [{}, {}]",
                regime.label(),
                mesh.node(node),
                mesh.node(lowest),
                mesh.node(highest)
            )));
        }
        row.finish_into(&mut stencils);
        regimes.push(regime);
    }

    Ok(OperatorMatrix { mesh, ghost_left: gl, ghost_right: gr, bandwidth: p, stencils, regimes })
}
