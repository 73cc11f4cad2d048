//! Discrete QNL energy and bilinear form.
//!
//! The nonlocal part is a node-pair sum over offsets `k = 1..=r` with pair
//! weight `W_k = M₂((k−1)h, kh) / (k² h)`. This is the same cell quadrature as
//! the operator, so pure-nonlocal rows of `A` equal the gradient of the energy
//! divided by `h`. A pair enters when at least one node lies in the nonlocal
//! region. The local part is a midpoint rule with weight `ω` evaluated at the
//! distance from the cell midpoint to the nonlocal region.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::kernels::MomentOrder;
use crate::scalar::Real;
use crate::weights::WeightEvaluator;

use super::operator::GridFunction;
use super::CouplingConfig;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EnergyParts<T> {
    /// Pairs with at least one endpoint in the nonlocal region.
    pub nonlocal: T,
    /// Weighted gradient form over cells outside the nonlocal region.
    pub local: T,
}

impl<T: Real> EnergyParts<T> {
    pub fn total(&self) -> T {
        self.nonlocal + self.local
    }
}

fn pair_weights<T: Real>(config: &CouplingConfig<T>) -> Result<Vec<T>> {
    let h = config.mesh().h();
    let r = config.ratio();
    let kernel = config.kernel();
    let mut w = vec![T::zero(); r + 1];
    for (k, wk) in w.iter_mut().enumerate().skip(1) {
        let kk = T::from_count(k);
        let m2 = kernel.moment(MomentOrder::Second, h * (kk - T::one()), h * kk)?;
        *wk = m2 / (kk * kk * h);
    }
    Ok(w)
}

fn check_shape<T: Real>(config: &CouplingConfig<T>, u: &GridFunction<T>) -> Result<()> {
    let (gl, gr) = config.ghost_counts();
    let expected = config.mesh().intervals() + 1 + gl + gr;
    if u.values().len() != expected || u.ghosts() != (gl, gr) || u.mesh() != config.mesh() {
        return Err(Error::Shape { expected, actual: u.values().len() });
    }
    Ok(())
}

/// `b(u, v)` split into its nonlocal and local contributions.
pub fn energy_parts<T: Real>(config: &CouplingConfig<T>, u: &GridFunction<T>, v: &GridFunction<T>) -> Result<EnergyParts<T>> {
    check_shape(config, u)?;
    check_shape(config, v)?;
    let layout = config.layout();
    let r = config.ratio() as isize;
    let w = pair_weights(config)?;
    let two = T::lit(2.0);

    let mut nonlocal = T::zero();
    for i in u.indices() {
        for k in 1..=r {
            let j = i + k;
            if !u.contains(j) {
                break;
            }
            if layout.in_nonlocal_region(i) || layout.in_nonlocal_region(j) {
                let du = u.get(j) - u.get(i);
                let dv = v.get(j) - v.get(i);
                // ordered pairs (i, j) and (j, i)
                nonlocal = nonlocal + two * w[k as usize] * (du * dv);
            }
        }
    }

    let mesh = config.mesh();
    let h = mesh.h();
    let weights = WeightEvaluator::new(config.kernel().clone());
    let mut local = T::zero();
    for i in 0..mesh.last() {
        let mid = i as f64 + 0.5;
        let omega = match layout.distance_to_nonlocal(mid) {
            None => T::one(),
            Some(d) if d <= 0.0 => continue,
            Some(d) => weights.omega(T::lit(d) * h)?,
        };
        if layout.in_nonlocal_region(i) && layout.in_nonlocal_region(i + 1) {
            continue;
        }
        let du = u.get(i + 1) - u.get(i);
        let dv = v.get(i + 1) - v.get(i);
        local = local + omega * (du * dv) / h;
    }

    Ok(EnergyParts { nonlocal, local })
}

/// Symmetric bilinear form `b^qnl(u, v)`.
pub fn bilinear<T: Real>(config: &CouplingConfig<T>, u: &GridFunction<T>, v: &GridFunction<T>) -> Result<T> {
    energy_parts(config, u, v).map(|p| p.total())
}

/// `E(u) = ½ b(u, u)`.
pub fn discrete_energy<T: Real>(config: &CouplingConfig<T>, u: &GridFunction<T>) -> Result<T> {
    Ok(T::lit(0.5) * bilinear(config, u, u)?)
}

/// Fully nonlocal form `Σ W_k (u_j − u_i)²` over all ordered pairs within the
/// horizon, regardless of region. The QNL form dominates it.
pub fn full_nonlocal_form<T: Real>(config: &CouplingConfig<T>, u: &GridFunction<T>) -> Result<T> {
    check_shape(config, u)?;
    let w = pair_weights(config)?;
    let r = config.ratio() as isize;
    let two = T::lit(2.0);
    let mut total = T::zero();
    for i in u.indices() {
        for k in 1..=r {
            let j = i + k;
            if !u.contains(j) {
                break;
            }
            let du = u.get(j) - u.get(i);
            total = total + two * w[k as usize] * du * du;
        }
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::super::{assemble, Arrangement, Mesh, Regime};
    use super::*;
    use crate::kernels::KernelFamily;
    use proptest::prelude::*;

    fn cfg(n: usize, arrangement: Arrangement<f64>, family: KernelFamily, r: usize) -> CouplingConfig<f64> {
        CouplingConfig::with_family(Mesh::symmetric(n).unwrap(), arrangement, family, r).unwrap()
    }

    fn arrangements() -> Vec<Arrangement<f64>> {
        vec![
            Arrangement::PureNonlocal,
            Arrangement::PureLocal,
            Arrangement::NonlocalLocal { interface: 0.0 },
            Arrangement::LocalNonlocalLocal { left: -0.5, right: 0.5 },
        ]
    }

    #[test]
    fn constant_has_zero_energy() {
        for arr in arrangements() {
            let c = cfg(16, arr, KernelFamily::InverseAbs, 3);
            let u = c.sample(|_| 4.2);
            assert!(discrete_energy(&c, &u).unwrap().abs() < 1e-12);
        }
    }

    #[test]
    fn linear_field_on_pure_local() {
        let c = cfg(20, Arrangement::PureLocal, KernelFamily::Constant, 2);
        let f = 1.7;
        let u = c.sample(|x| f * x);
        let e = discrete_energy(&c, &u).unwrap();
        assert!((e - f * f * 2.0 / 2.0).abs() < 1e-12);
    }

    #[test]
    fn zero_and_shape_errors() {
        let c = cfg(8, Arrangement::NonlocalLocal { interface: 0.0 }, KernelFamily::Constant, 2);
        let u = c.sample(|x| x.sin());
        assert_eq!(bilinear(&c, &u, &c.zeros()).unwrap(), 0.0);
        let other = cfg(8, Arrangement::PureLocal, KernelFamily::Constant, 2).zeros();
        assert!(bilinear(&c, &u, &other).is_err());
    }

    #[test]
    fn pure_nonlocal_rows_are_energy_gradient() {
        // (A u)_i = (1/h) ∂E/∂u_i on rows whose stencil stays in the nonlocal region
        let c = cfg(8, Arrangement::NonlocalLocal { interface: 0.0 }, KernelFamily::Constant, 2);
        let a = assemble(&c).unwrap();
        let u = c.sample(|x| (3.0 * x).cos() + x * x);
        let au = a.apply(&u).unwrap();
        let h = c.mesh().h();
        for (row, regime) in a.regimes().iter().enumerate() {
            let node = a.node_of_row(row);
            if *regime != Regime::Nonlocal || node > c.mesh().locate(0.0).unwrap() - 2 {
                continue;
            }
            let mut e_i = c.zeros();
            e_i.set(node, 1.0);
            let grad = bilinear(&c, &u, &e_i).unwrap();
            assert!((grad / h - au[row]).abs() < 1e-10 * au[row].abs().max(1.0), "row {row}");
        }
    }

    proptest! {
        #[test]
        fn symmetric_and_polarized(coeffs in prop::collection::vec(-2.0f64..2.0, 8), arr in 0usize..4, kind in 0usize..2) {
            let family = if kind == 0 { KernelFamily::Constant } else { KernelFamily::InverseAbs };
            let c = cfg(12, arrangements()[arr], family, 3);
            let f = |cs: &[f64], x: f64| cs.iter().enumerate().map(|(k, a)| a * ((k + 1) as f64 * x).sin()).sum::<f64>();
            let u = c.sample(|x| f(&coeffs[..4], x));
            let v = c.sample(|x| f(&coeffs[4..], x));
            let buv = bilinear(&c, &u, &v).unwrap();
            let bvu = bilinear(&c, &v, &u).unwrap();
            prop_assert_eq!(buv, bvu);
            let e = discrete_energy(&c, &u).unwrap();
            prop_assert!((e - 0.5 * bilinear(&c, &u, &u).unwrap()).abs() <= 1e-12 * e.abs().max(1.0));
        }

        #[test]
        fn dominates_full_nonlocal_form(coeffs in prop::collection::vec(-2.0f64..2.0, 5), shift in -1.0f64..1.0, arr in 0usize..4, kind in 0usize..2, r in 1usize..6) {
            let family = if kind == 0 { KernelFamily::Constant } else { KernelFamily::InverseAbs };
            let c = cfg(24, arrangements()[arr], family, r);
            let u = c.sample(|x| coeffs.iter().enumerate().map(|(k, a)| a * (x + shift).powi(k as i32)).sum::<f64>());
            let qnl = bilinear(&c, &u, &u).unwrap();
            let full = full_nonlocal_form(&c, &u).unwrap();
            prop_assert!(qnl >= full - 1e-8 * full.abs().max(1e-300), "{} < {}", qnl, full);
        }
    }
}
