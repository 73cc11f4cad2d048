use rayon::prelude::*;
use serde::Serialize;

use crate::assembly::{Arrangement, CouplingConfig, GridFunction, Mesh};
use crate::error::Result;
use crate::kernels::KernelFamily;

use super::problem::{ratio_for, solve_problem, Problem};
use super::Metric;

/// Window next to the left boundary in which the layer is measured.
pub const LAYER_WINDOW: (f64, f64) = (-1.0, -0.9);

/// Central window of the singular-forcing comparison.
pub const SINGULAR_WINDOW: (f64, f64) = (-0.4, 0.4);

/// Interfaces of the local–nonlocal–local arrangement.
pub const LNL_INTERFACES: (f64, f64) = (-0.5, 0.5);

/// Labeled solutions sampled on the in-domain nodes.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CurveSet {
    pub x: Vec<f64>,
    pub curves: Vec<(String, Vec<f64>)>,
}

impl CurveSet {
    fn new(mesh: &Mesh<f64>) -> Self {
        CurveSet { x: (0..=mesh.last()).map(|i| mesh.node(i)).collect(), curves: Vec::new() }
    }

    fn push(&mut self, label: &str, u: &GridFunction<f64>) {
        self.curves.push((label.to_string(), u.domain_values().to_vec()));
    }

    pub fn get(&self, label: &str) -> Option<&[f64]> {
        self.curves.iter().find(|(l, _)| l == label).map(|(_, v)| v.as_slice())
    }

    /// `max |a − b|` over nodes with `lo ≤ x ≤ hi`.
    pub fn max_diff(&self, a: &str, b: &str, (lo, hi): (f64, f64)) -> Option<f64> {
        let (ua, ub) = (self.get(a)?, self.get(b)?);
        let tol = 1e-12;
        Some(
            self.x
                .iter()
                .zip(ua.iter().zip(ub))
                .filter(|(x, _)| **x >= lo - tol && **x <= hi + tol)
                .fold(0.0, |m: f64, (_, (p, q))| m.max((p - q).abs())),
        )
    }
}

fn solve_all(configs: &[(&str, CouplingConfig<f64>)], problem: &Problem) -> Result<CurveSet> {
    let solutions = configs.par_iter().map(|(_, c)| solve_problem(c, problem)).collect::<Result<Vec<_>>>()?;
    let mut set = CurveSet::new(configs[0].1.mesh());
    for ((label, _), u) in configs.iter().zip(&solutions) {
        set.push(label, u);
    }
    Ok(set)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundaryLayerStudy {
    pub delta: f64,
    pub h: f64,
    pub ratio: usize,
    pub curves: CurveSet,
    /// `max |u_lnl − u_local|` over the layer window.
    pub m1: f64,
    /// `max |u_nonlocal_local − u_local|` over the layer window.
    pub m2: f64,
}

impl BoundaryLayerStudy {
    pub fn metrics(&self) -> Vec<Metric> {
        vec![
            Metric::new("delta", self.delta),
            Metric::new("h", self.h),
            Metric::new("m1", self.m1),
            Metric::new("m2", self.m2),
        ]
    }
}

/// `f ≡ 1` on `(−1, 1)` with `h = 1/N`, solved with the nonlocal region
/// touching the left boundary, with nonlocal in the middle, and fully local.
pub fn boundary_layer_study(family: KernelFamily, delta: f64, n: usize) -> Result<BoundaryLayerStudy> {
    let r = ratio_for(delta, n)?;
    let mesh = Mesh::symmetric(n)?;
    let (a, b) = LNL_INTERFACES;
    let configs = [
        ("nonlocal_local", CouplingConfig::with_family(mesh, Arrangement::NonlocalLocal { interface: 0.0 }, family, r)?),
        ("local_nonlocal_local", CouplingConfig::with_family(mesh, Arrangement::LocalNonlocalLocal { left: a, right: b }, family, r)?),
        ("local", CouplingConfig::with_family(mesh, Arrangement::PureLocal, family, r)?),
    ];
    let curves = solve_all(&configs, &Problem::constant())?;
    let m1 = curves.max_diff("local_nonlocal_local", "local", LAYER_WINDOW).unwrap_or(f64::NAN);
    let m2 = curves.max_diff("nonlocal_local", "local", LAYER_WINDOW).unwrap_or(f64::NAN);
    Ok(BoundaryLayerStudy { delta, h: mesh.h(), ratio: r, curves, m1, m2 })
}

/// Boundary-layer studies for several horizons at fixed `r = δ/h`.
pub fn boundary_layer_sweep(family: KernelFamily, deltas: &[f64], ratio: usize) -> Result<Vec<BoundaryLayerStudy>> {
    deltas
        .iter()
        .map(|&delta| {
            let n = (ratio as f64 / delta).round() as usize;
            boundary_layer_study(family, delta, n)
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SingularStudy {
    pub delta: f64,
    pub h: f64,
    pub center: f64,
    pub curves: CurveSet,
    /// `max |u_lnl − u_nonlocal|` over the central window.
    pub lnl_vs_nonlocal: f64,
    /// `max |u_local − u_nonlocal|` over the central window.
    pub local_vs_nonlocal: f64,
    /// `max |u(x; s₀) − u(−x; −s₀)|` over all nodes and arrangements.
    pub mirror_defect: f64,
}

impl SingularStudy {
    pub fn metrics(&self) -> Vec<Metric> {
        vec![
            Metric::new("delta", self.delta),
            Metric::new("h", self.h),
            Metric::new("center", self.center),
            Metric::new("lnl_vs_nonlocal", self.lnl_vs_nonlocal),
            Metric::new("local_vs_nonlocal", self.local_vs_nonlocal),
            Metric::new("mirror_defect", self.mirror_defect),
        ]
    }
}

/// Forcing `(1 − x²)(1 + x²)/|x − h/2|`: fully nonlocal with volumetric
/// constraints on both sides, local–nonlocal–local with the given interfaces,
/// and fully local.
pub fn singular_forcing_study(family: KernelFamily, delta: f64, n: usize, interfaces: (f64, f64)) -> Result<SingularStudy> {
    let r = ratio_for(delta, n)?;
    let mesh = Mesh::symmetric(n)?;
    let center = mesh.h() / 2.0;
    let configs = [
        ("nonlocal", CouplingConfig::with_family(mesh, Arrangement::PureNonlocal, family, r)?),
        (
            "local_nonlocal_local",
            CouplingConfig::with_family(mesh, Arrangement::LocalNonlocalLocal { left: interfaces.0, right: interfaces.1 }, family, r)?,
        ),
        ("local", CouplingConfig::with_family(mesh, Arrangement::PureLocal, family, r)?),
    ];
    let curves = solve_all(&configs, &Problem::singular(center))?;
    let lnl_vs_nonlocal = curves.max_diff("local_nonlocal_local", "nonlocal", SINGULAR_WINDOW).unwrap_or(f64::NAN);
    let local_vs_nonlocal = curves.max_diff("local", "nonlocal", SINGULAR_WINDOW).unwrap_or(f64::NAN);

    let mut mirror_defect: f64 = 0.0;
    if interfaces.0 == -interfaces.1 {
        let mirrored = solve_all(&configs, &Problem::singular(-center))?;
        for ((_, u), (_, v)) in curves.curves.iter().zip(&mirrored.curves) {
            for (p, q) in u.iter().zip(v.iter().rev()) {
                mirror_defect = mirror_defect.max((p - q).abs());
            }
        }
    } else {
        mirror_defect = f64::NAN;
    }
    Ok(SingularStudy { delta, h: mesh.h(), center, curves, lnl_vs_nonlocal, local_vs_nonlocal, mirror_defect })
}
