//! Radial nonlocal kernels with compact support and their partial moments.
//!
//! A kernel is normalised so that its full second moment over `(-δ, δ)` is 1.
//! Every scheme in the crate consumes kernels through [`Kernel::moment`], which
//! is closed-form for the built-in kernels and adaptive quadrature otherwise.

use std::fmt;
use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::quadrature;
use crate::scalar::Real;

/// Relative offset from the origin where validation sampling starts.
pub const SAMPLE_OFFSET: f64 = 1e-6;

/// Number of sample points used by [`Kernel::validate`].
pub const VALIDATION_SAMPLES: usize = 1000;

/// Absolute tolerance of a single custom-kernel moment integral (f64).
pub const CUSTOM_MOMENT_TOL: f64 = 1e-12;

/// Which power of `s` weights the kernel in a moment integral.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MomentOrder {
    Zeroth,
    First,
    Second,
}

impl MomentOrder {
    pub fn as_u8(self) -> u8 {
        match self {
            MomentOrder::Zeroth => 0,
            MomentOrder::First => 1,
            MomentOrder::Second => 2,
        }
    }
}

impl TryFrom<u8> for MomentOrder {
    type Error = Error;

    fn try_from(order: u8) -> Result<Self> {
        match order {
            0 => Ok(MomentOrder::Zeroth),
            1 => Ok(MomentOrder::First),
            2 => Ok(MomentOrder::Second),
            n => Err(Error::arg(format!("moment order must be 0, 1 or 2, got {n}"))),
        }
    }
}

/// Built-in kernel families, parameterised only by the horizon.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum KernelFamily {
    /// `3 / (2δ³)` on `(-δ, δ)`.
    Constant,
    /// `1 / (δ² |s|)` on `(-δ, δ)`.
    InverseAbs,
}

impl KernelFamily {
    pub fn with_horizon<T: Real>(self, delta: T) -> Result<Kernel<T>> {
        match self {
            KernelFamily::Constant => Kernel::constant(delta),
            KernelFamily::InverseAbs => Kernel::inverse_abs(delta),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            KernelFamily::Constant => "constant",
            KernelFamily::InverseAbs => "inverse_abs",
        }
    }
}

type Profile<T> = Arc<dyn Fn(T) -> T + Send + Sync>;

/// User supplied kernel profile `s ↦ γ_δ(s)` for `s ≥ 0`.
#[derive(Clone)]
pub struct CustomProfile<T> {
    name: String,
    profile: Profile<T>,
}

impl<T> fmt::Debug for CustomProfile<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CustomProfile").field("name", &self.name).finish_non_exhaustive()
    }
}

#[derive(Debug, Clone)]
pub enum KernelKind<T> {
    Constant,
    InverseAbs,
    Custom(CustomProfile<T>),
}

#[derive(Debug, Clone)]
pub struct Kernel<T> {
    kind: KernelKind<T>,
    delta: T,
}

fn check_horizon<T: Real>(delta: T) -> Result<()> {
    if delta > T::zero() && delta.is_finite() {
        Ok(())
    } else {
        Err(Error::arg(format!("horizon must be positive and finite, got {delta}")))
    }
}

impl<T: Real> Kernel<T> {
    pub fn constant(delta: T) -> Result<Self> {
        check_horizon(delta)?;
        Ok(Kernel { kind: KernelKind::Constant, delta })
    }

    pub fn inverse_abs(delta: T) -> Result<Self> {
        check_horizon(delta)?;
        Ok(Kernel { kind: KernelKind::InverseAbs, delta })
    }

    /// Wraps an arbitrary radial profile. The profile receives `|s|`; its
    /// moments are integrated numerically over `[0, δ]`.
    pub fn custom<F>(delta: T, name: impl Into<String>, profile: F) -> Result<Self>
    where
        F: Fn(T) -> T + Send + Sync + 'static,
    {
        check_horizon(delta)?;
        Ok(Kernel {
            kind: KernelKind::Custom(CustomProfile { name: name.into(), profile: Arc::new(profile) }),
            delta,
        })
    }

    pub fn kind(&self) -> &KernelKind<T> {
        &self.kind
    }

    pub fn delta(&self) -> T {
        self.delta
    }

    pub fn family(&self) -> Option<KernelFamily> {
        match self.kind {
            KernelKind::Constant => Some(KernelFamily::Constant),
            KernelKind::InverseAbs => Some(KernelFamily::InverseAbs),
            KernelKind::Custom(_) => None,
        }
    }

    pub fn name(&self) -> &str {
        match &self.kind {
            KernelKind::Constant => "constant",
            KernelKind::InverseAbs => "inverse_abs",
            KernelKind::Custom(p) => &p.name,
        }
    }

    /// Pointwise value `γ_δ(s)`.
    ///
    /// Built-in kernels vanish for `|s| > δ`. The inverse-abs kernel is not
    /// defined at the origin. Custom profiles are evaluated as given, so that
    /// [`Kernel::validate`] can observe support violations.
    pub fn eval(&self, s: T) -> Result<T> {
        let r = s.abs();
        match &self.kind {
            KernelKind::Constant => Ok(if r <= self.delta {
                T::lit(1.5) / self.delta.powi(3)
            } else {
                T::zero()
            }),
            KernelKind::InverseAbs => {
                if r == T::zero() {
                    Err(Error::OutOfDomain(0.0))
                } else if r <= self.delta {
                    Ok(T::one() / (self.delta * self.delta * r))
                } else {
                    Ok(T::zero())
                }
            }
            KernelKind::Custom(p) => Ok((p.profile)(r)),
        }
    }

    /// `∫_a^b s^p γ_δ(s) ds` with the interval clipped to `[0, δ]`.
    pub fn moment(&self, order: MomentOrder, a: T, b: T) -> Result<T> {
        if a < T::zero() || !a.is_finite() || !b.is_finite() {
            return Err(Error::arg(format!("moment interval must satisfy 0 <= a <= b, got [{a}, {b}]")));
        }
        if a > b {
            return Err(Error::arg(format!("moment interval reversed: a = {a} > b = {b}")));
        }
        if a == b {
            return Ok(T::zero());
        }
        let d = self.delta;
        let lo = a.min(d);
        let hi = b.min(d);
        if lo >= hi {
            return Ok(T::zero());
        }
        match &self.kind {
            KernelKind::Constant => {
                let d3 = d * d * d;
                Ok(match order {
                    MomentOrder::Zeroth => T::lit(1.5) * (hi - lo) / d3,
                    MomentOrder::First => T::lit(0.75) * (hi * hi - lo * lo) / d3,
                    MomentOrder::Second => (hi * hi * hi - lo * lo * lo) / (T::lit(2.0) * d3),
                })
            }
            KernelKind::InverseAbs => {
                let d2 = d * d;
                match order {
                    MomentOrder::Zeroth => {
                        if lo == T::zero() {
                            Err(Error::DivergentMoment { order: 0, a: a.to_f64_lossy(), b: b.to_f64_lossy() })
                        } else {
                            Ok((hi / lo).ln() / d2)
                        }
                    }
                    MomentOrder::First => Ok((hi - lo) / d2),
                    MomentOrder::Second => Ok((hi * hi - lo * lo) / (T::lit(2.0) * d2)),
                }
            }
            KernelKind::Custom(p) => {
                let tol = T::lit(CUSTOM_MOMENT_TOL).max(T::epsilon() * T::lit(1e3));
                let f = &p.profile;
                match order {
                    MomentOrder::Zeroth => quadrature::integrate(|s| f(s), lo, hi, tol),
                    MomentOrder::First => quadrature::integrate(|s| s * f(s), lo, hi, tol),
                    MomentOrder::Second => quadrature::integrate(|s| s * s * f(s), lo, hi, tol),
                }
            }
        }
    }

    /// Full second moment `∫_{-δ}^{δ} s² γ_δ(s) ds`; 1 for a normalised kernel.
    pub fn second_moment_total(&self) -> Result<T> {
        Ok(T::lit(2.0) * self.moment(MomentOrder::Second, T::zero(), self.delta)?)
    }

    /// Checks normalisation, sign, monotonicity and support on a fixed sample grid.
    pub fn validate(&self, tolerance: T) -> ValidationReport {
        let d = self.delta;
        let n = VALIDATION_SAMPLES;
        let start = d * T::lit(SAMPLE_OFFSET);
        let inside: Vec<T> = (0..n)
            .map(|k| start + (d - start) * T::from_count(k) / T::from_count(n - 1))
            .collect();
        let values: Vec<Option<T>> = inside.iter().map(|&s| self.eval(s).ok()).collect();

        let mut checks = Vec::with_capacity(4);

        let (moment, moment_ok) = match self.second_moment_total() {
            Ok(m) => (m.to_f64_lossy(), (m - T::one()).abs() <= tolerance),
            Err(_) => (f64::NAN, false),
        };
        checks.push(KernelCheck {
            check: "normalization",
            value: moment,
            threshold: tolerance.to_f64_lossy(),
            pass: moment_ok,
        });

        let min_value = values
            .iter()
            .map(|v| v.map_or(f64::NAN, |x| x.to_f64_lossy()))
            .fold(f64::INFINITY, f64::min);
        checks.push(KernelCheck {
            check: "nonnegative",
            value: min_value,
            threshold: 0.0,
            pass: values.iter().all(|v| matches!(v, Some(x) if *x >= T::zero())),
        });

        // largest increase between consecutive samples; 0 for a nonincreasing profile
        let mut max_rise = 0.0f64;
        let mut monotone = true;
        for w in values.windows(2) {
            match (w[0], w[1]) {
                (Some(p), Some(q)) => {
                    let rise = (q - p).to_f64_lossy();
                    if q > p {
                        monotone = false;
                        max_rise = max_rise.max(rise);
                    }
                }
                _ => monotone = false,
            }
        }
        checks.push(KernelCheck { check: "nonincreasing", value: max_rise, threshold: 0.0, pass: monotone });

        let outside_max = (1..=n)
            .map(|k| d * (T::one() + T::from_count(k) / T::from_count(n)))
            .map(|s| self.eval(s).map_or(f64::NAN, |v| v.abs().to_f64_lossy()))
            .fold(0.0f64, |acc, v| if v.is_nan() { f64::NAN } else { acc.max(v) });
        checks.push(KernelCheck {
            check: "compact_support",
            value: outside_max,
            threshold: 0.0,
            pass: outside_max == 0.0,
        });

        ValidationReport { kernel: self.name().to_string(), checks }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KernelCheck {
    pub check: &'static str,
    pub value: f64,
    pub threshold: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidationReport {
    pub kernel: String,
    pub checks: Vec<KernelCheck>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn get(&self, check: &str) -> Option<&KernelCheck> {
        self.checks.iter().find(|c| c.check == check)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    const M0: MomentOrder = MomentOrder::Zeroth;
    const M1: MomentOrder = MomentOrder::First;
    const M2: MomentOrder = MomentOrder::Second;

    #[test]
    fn closed_form_examples() {
        let d = 0.3;
        let c = Kernel::constant(d).unwrap();
        let i = Kernel::inverse_abs(d).unwrap();
        assert_relative_eq!(c.moment(M2, 0.0, d).unwrap(), 0.5, max_relative = 1e-15);
        assert_relative_eq!(i.moment(M1, 0.0, d).unwrap(), 1.0 / d, max_relative = 1e-15);

        let h = 0.1;
        let c2 = Kernel::constant(2.0 * h).unwrap();
        assert_relative_eq!(c2.moment(M2, h, 2.0 * h).unwrap(), 7.0 / 16.0, max_relative = 1e-14);
    }

    #[test]
    fn empty_interval_is_zero() {
        for k in [Kernel::constant(1.0).unwrap(), Kernel::inverse_abs(1.0).unwrap()] {
            for o in [M0, M1, M2] {
                assert_eq!(k.moment(o, 0.4, 0.4).unwrap(), 0.0);
            }
        }
        // even at the origin, where the inverse-abs zeroth moment would diverge
        assert_eq!(Kernel::inverse_abs(1.0).unwrap().moment(M0, 0.0, 0.0).unwrap(), 0.0);
    }

    #[test]
    fn moment_errors() {
        let i = Kernel::inverse_abs(1.0).unwrap();
        assert!(matches!(i.moment(M0, 0.0, 0.5), Err(Error::DivergentMoment { order: 0, .. })));
        assert!(matches!(i.moment(M1, 0.6, 0.5), Err(Error::InvalidArgument(_))));
        assert!(matches!(i.moment(M1, -0.1, 0.5), Err(Error::InvalidArgument(_))));
        assert!(MomentOrder::try_from(3).is_err());
        assert_eq!(MomentOrder::try_from(2).unwrap(), M2);
    }

    #[test]
    fn moments_clip_to_horizon() {
        let c = Kernel::constant(1.0).unwrap();
        assert_eq!(c.moment(M2, 1.5, 3.0).unwrap(), 0.0);
        assert_eq!(c.moment(M2, 0.5, 3.0).unwrap(), c.moment(M2, 0.5, 1.0).unwrap());
    }

    #[test]
    fn horizon_must_be_positive() {
        assert!(Kernel::constant(0.0).is_err());
        assert!(Kernel::<f64>::inverse_abs(-1.0).is_err());
        assert!(Kernel::constant(f64::NAN).is_err());
    }

    #[test]
    fn pointwise_values() {
        let i = Kernel::inverse_abs(0.5).unwrap();
        assert!(matches!(i.eval(0.0), Err(Error::OutOfDomain(_))));
        assert_relative_eq!(i.eval(-0.25).unwrap(), 16.0);
        assert_eq!(i.eval(0.6).unwrap(), 0.0);
        let c = Kernel::constant(0.5).unwrap();
        assert_relative_eq!(c.eval(0.0).unwrap(), 12.0);
    }

    #[test]
    fn normalization_of_builtins() {
        for d in [1e-3, 0.2, 1.0, 7.5] {
            assert_relative_eq!(Kernel::constant(d).unwrap().second_moment_total().unwrap(), 1.0, epsilon = 1e-12);
            assert_relative_eq!(Kernel::inverse_abs(d).unwrap().second_moment_total().unwrap(), 1.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn zero_custom_kernel_fails_validation() {
        let k = Kernel::custom(1.0, "zero", |_s: f64| 0.0).unwrap();
        assert_eq!(k.second_moment_total().unwrap(), 0.0);
        let report = k.validate(1e-8);
        assert!(!report.passed());
        assert!(!report.get("normalization").unwrap().pass);
    }

    #[test]
    fn doubled_constant_reports_moment_two() {
        let d = 0.4;
        let k = Kernel::custom(d, "double", move |s: f64| if s <= d { 3.0 / (d * d * d) } else { 0.0 }).unwrap();
        let report = k.validate(1e-8);
        let norm = report.get("normalization").unwrap();
        assert!(!norm.pass);
        assert_relative_eq!(norm.value, 2.0, epsilon = 1e-9);
        assert!(report.get("nonincreasing").unwrap().pass);
    }

    #[test]
    fn increasing_kernel_fails_monotonicity() {
        let k = Kernel::custom(1.0, "ramp", |s: f64| if s <= 1.0 { s } else { 0.0 }).unwrap();
        let report = k.validate(1e-8);
        assert!(!report.get("nonincreasing").unwrap().pass);
    }

    #[test]
    fn unbounded_support_fails() {
        let k = Kernel::custom(1.0, "tail", |s: f64| 1.5 * (-s).exp()).unwrap();
        let report = k.validate(1e-8);
        assert!(!report.get("compact_support").unwrap().pass);
    }

    #[test]
    fn builtins_validate() {
        assert!(Kernel::constant(0.3).unwrap().validate(1e-12).passed());
        assert!(Kernel::inverse_abs(0.3).unwrap().validate(1e-12).passed());
        assert!(Kernel::constant(0.3f32).unwrap().validate(1e-6).passed());
    }

    #[test]
    fn custom_matches_builtin() {
        let d = 0.25;
        let custom = Kernel::custom(d, "constant-again", move |s: f64| if s <= d { 1.5 / (d * d * d) } else { 0.0 })
            .unwrap();
        let builtin = Kernel::constant(d).unwrap();
        assert!((custom.second_moment_total().unwrap() - 1.0).abs() <= 1e-8);
        for (a, b) in [(0.0, 0.1), (0.05, 0.2), (0.1, 0.4)] {
            for o in [M0, M1, M2] {
                assert_relative_eq!(custom.moment(o, a, b).unwrap(), builtin.moment(o, a, b).unwrap(), max_relative = 1e-10);
            }
        }
    }

    fn quad(k: &Kernel<f64>, order: MomentOrder, a: f64, b: f64) -> f64 {
        let p = order.as_u8() as i32;
        let hi = b.min(k.delta());
        quadrature::integrate(|s| s.powi(p) * k.eval(s).unwrap(), a.min(hi), hi, 1e-14).unwrap()
    }

    proptest! {
        #[test]
        fn moments_are_additive(d in 0.01f64..5.0, t in prop::array::uniform3(0.0f64..1.2)) {
            let mut pts = t;
            pts.sort_by(|x, y| x.partial_cmp(y).unwrap());
            let [a, b, c] = pts.map(|x| x * d);
            for k in [Kernel::constant(d).unwrap(), Kernel::inverse_abs(d).unwrap()] {
                for o in [M1, M2] {
                    let whole = k.moment(o, a, c).unwrap();
                    let split = k.moment(o, a, b).unwrap() + k.moment(o, b, c).unwrap();
                    prop_assert!((whole - split).abs() <= 1e-12 * whole.abs().max(1e-300) + 1e-15);
                }
            }
        }

        #[test]
        fn closed_forms_match_quadrature(d in 0.05f64..3.0, t in prop::array::uniform2(0.01f64..1.0)) {
            let a = t[0].min(t[1]) * d;
            let b = t[0].max(t[1]) * d;
            for k in [Kernel::constant(d).unwrap(), Kernel::inverse_abs(d).unwrap()] {
                for o in [M0, M1, M2] {
                    let exact = k.moment(o, a, b).unwrap();
                    let numeric = quad(&k, o, a, b);
                    prop_assert!((exact - numeric).abs() <= 1e-10 * exact.abs() + 1e-14,
                        "{} order {:?}: {} vs {}", k.name(), o, exact, numeric);
                }
            }
        }

        #[test]
        fn half_second_moment_is_scale_free(d in 1e-4f64..1e3) {
            for k in [Kernel::constant(d).unwrap(), Kernel::inverse_abs(d).unwrap()] {
                prop_assert!((k.moment(M2, 0.0, d).unwrap() - 0.5).abs() < 1e-13);
            }
        }
    }
}
