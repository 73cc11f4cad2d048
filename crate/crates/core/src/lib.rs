//! Quasinonlocal coupling of nonlocal and local diffusion in one dimension.
//!
//! The numerical core is generic over [`Real`] (`f32` or `f64`); the
//! `*64` / `*32` aliases below fix the scalar type.

pub mod assembly;
pub mod error;
pub mod experiments;
pub mod kernels;
pub mod linalg;
pub mod quadrature;
pub mod scalar;
pub mod weights;

pub use assembly::{
    assemble, assemble_direct, classify, Arrangement, CouplingConfig, GridFunction, Mesh, OperatorMatrix, Regime,
    RegimeLabel, Scheme, Side, TransitionalIndexing,
};
pub use error::{Error, Result};
pub use kernels::{Kernel, KernelFamily, MomentOrder};
pub use linalg::{solve, BandedLu, BandedSystem, Check};
pub use scalar::Real;
pub use weights::WeightEvaluator;

pub type Kernel64 = Kernel<f64>;
pub type Mesh64 = Mesh<f64>;
pub type Arrangement64 = Arrangement<f64>;
pub type CouplingConfig64 = CouplingConfig<f64>;
pub type OperatorMatrix64 = OperatorMatrix<f64>;
pub type GridFunction64 = GridFunction<f64>;
pub type WeightEvaluator64 = WeightEvaluator<f64>;

pub type Kernel32 = Kernel<f32>;
pub type Mesh32 = Mesh<f32>;
pub type CouplingConfig32 = CouplingConfig<f32>;
pub type OperatorMatrix32 = OperatorMatrix<f32>;
pub type GridFunction32 = GridFunction<f32>;
