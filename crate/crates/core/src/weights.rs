//! Local-energy weight `ω_δ`, its derivative and the interfacial diffusion
//! coefficient `a(x)`, all computed from kernel moments.

use crate::error::{Error, Result};
use crate::kernels::{Kernel, MomentOrder};
use crate::scalar::Real;

#[derive(Debug, Clone)]
pub struct WeightEvaluator<T> {
    kernel: Kernel<T>,
}

impl<T: Real> WeightEvaluator<T> {
    pub fn new(kernel: Kernel<T>) -> Self {
        WeightEvaluator { kernel }
    }

    pub fn kernel(&self) -> &Kernel<T> {
        &self.kernel
    }

    fn check_nonnegative(x: T, what: &str) -> Result<()> {
        if x >= T::zero() {
            Ok(())
        } else {
            Err(Error::arg(format!("{what} requires x >= 0, got {x}")))
        }
    }

    /// `ω(x) = 2∫_0^x s²γ ds + 2x∫_x^δ sγ ds`, rising from 0 to 1 over `[0, δ]`.
    pub fn omega(&self, x: T) -> Result<T> {
        Self::check_nonnegative(x, "omega")?;
        let d = self.kernel.delta();
        let xc = x.min(d);
        let two = T::lit(2.0);
        let inner = self.kernel.moment(MomentOrder::Second, T::zero(), xc)?;
        let outer = self.kernel.moment(MomentOrder::First, xc, d)?;
        Ok(two * inner + two * x * outer)
    }

    /// `ω'(x) = 2∫_x^δ sγ ds`.
    pub fn omega_prime(&self, x: T) -> Result<T> {
        Self::check_nonnegative(x, "omega_prime")?;
        let d = self.kernel.delta();
        Ok(T::lit(2.0) * self.kernel.moment(MomentOrder::First, x.min(d), d)?)
    }

    /// Effective diffusion `a(x) = 1 − ∫_x^δ s²γ ds + 2x∫_x^δ sγ ds` on `[0, δ]`.
    pub fn effective_diffusion(&self, x: T) -> Result<T> {
        let d = self.kernel.delta();
        if !(x >= T::zero() && x <= d) {
            return Err(Error::arg(format!("effective diffusion is defined on [0, {d}], got {x}")));
        }
        let m2 = self.kernel.moment(MomentOrder::Second, x, d)?;
        let m1 = self.kernel.moment(MomentOrder::First, x, d)?;
        Ok(T::one() - m2 + T::lit(2.0) * x * m1)
    }
}

/// One row of a weight-function table.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeightSample<T> {
    pub x: T,
    pub omega: T,
    pub omega_prime: T,
    /// `None` beyond the horizon, where `a` is undefined.
    pub a: Option<T>,
}

/// Samples `ω`, `ω'` and `a` on `points + 1` equispaced nodes of `[0, x_max]`.
pub fn tabulate<T: Real>(w: &WeightEvaluator<T>, x_max: T, points: usize) -> Result<Vec<WeightSample<T>>> {
    if points == 0 || !(x_max > T::zero()) {
        return Err(Error::arg("weight table needs at least one interval and x_max > 0"));
    }
    let d = w.kernel().delta();
    (0..=points)
        .map(|k| {
            let x = x_max * T::from_count(k) / T::from_count(points);
            Ok(WeightSample {
                x,
                omega: w.omega(x)?,
                omega_prime: w.omega_prime(x)?,
                a: if x <= d { Some(w.effective_diffusion(x)?) } else { None },
            })
        })
        .collect()
}
