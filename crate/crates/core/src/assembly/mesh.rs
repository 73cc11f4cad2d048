use serde::Serialize;

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Relative tolerance (in units of `h`) for a coordinate to count as a grid node.
const ON_GRID_TOL: f64 = 1e-9;

/// Uniform grid with `2N` subintervals on `[x_left, x_right]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mesh<T> {
    x_left: T,
    x_right: T,
    n_half: usize,
}

impl<T: Real> Mesh<T> {
    pub fn new(x_left: T, x_right: T, n_half: usize) -> Result<Self> {
        if n_half == 0 {
            return Err(Error::config("mesh needs N >= 1"));
        }
        if !(x_right > x_left) || !x_left.is_finite() || !x_right.is_finite() {
            return Err(Error::config(format!("invalid domain [{x_left}, {x_right}]")));
        }
        Ok(Mesh { x_left, x_right, n_half })
    }

    /// The default domain `(-1, 1)`, where `h = 1/N`.
    pub fn symmetric(n_half: usize) -> Result<Self> {
        Self::new(-T::one(), T::one(), n_half)
    }

    pub fn x_left(&self) -> T {
        self.x_left
    }

    pub fn x_right(&self) -> T {
        self.x_right
    }

    pub fn n_half(&self) -> usize {
        self.n_half
    }

    /// Number of subintervals, `2N`.
    pub fn intervals(&self) -> usize {
        2 * self.n_half
    }

    /// Index of the right boundary node.
    pub fn last(&self) -> isize {
        self.intervals() as isize
    }

    pub fn h(&self) -> T {
        (self.x_right - self.x_left) / T::from_count(self.intervals())
    }

    /// Coordinate of node `i`; negative and past-the-end indices are ghost nodes.
    pub fn node(&self, i: isize) -> T {
        let h = self.h();
        if i >= 0 {
            self.x_left + T::from_count(i as usize) * h
        } else {
            self.x_left - T::from_count(i.unsigned_abs()) * h
        }
    }

    /// Grid index of `x`, if `x` lies on a node (ghost nodes included).
    pub fn locate(&self, x: T) -> Option<isize> {
        let t = (x - self.x_left) / self.h();
        let k = t.round();
        if (t - k).abs() <= T::lit(ON_GRID_TOL) {
            k.to_isize()
        } else {
            None
        }
    }
}

/// Where the nonlocal, transitional and local regions sit on the domain.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Arrangement<T> {
    PureNonlocal,
    PureLocal,
    /// Nonlocal to the left of `interface`, local to the right.
    NonlocalLocal { interface: T },
    /// Nonlocal on `[left, right]`, local outside, classical Dirichlet at both ends.
    LocalNonlocalLocal { left: T, right: T },
}

impl<T: Real> Arrangement<T> {
    pub fn name(&self) -> &'static str {
        match self {
            Arrangement::PureNonlocal => "pure_nonlocal",
            Arrangement::PureLocal => "pure_local",
            Arrangement::NonlocalLocal { .. } => "nonlocal_local",
            Arrangement::LocalNonlocalLocal { .. } => "local_nonlocal_local",
        }
    }
}

/// Side of a transitional node on which the nonlocal region lies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    Left,
    Right,
}

impl Side {
    /// `+1` when the nonlocal region is to the left (local region grows rightwards).
    pub fn sign(self) -> isize {
        match self {
            Side::Left => 1,
            Side::Right => -1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Regime {
    Nonlocal,
    /// `depth` is the distance to the interface in cells, `1..=r`.
    Transitional { depth: usize, nonlocal_side: Side },
    Local,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RegimeLabel {
    Nonlocal,
    Transitional,
    Local,
}

impl RegimeLabel {
    pub fn as_str(self) -> &'static str {
        match self {
            RegimeLabel::Nonlocal => "nonlocal",
            RegimeLabel::Transitional => "transitional",
            RegimeLabel::Local => "local",
        }
    }
}

impl Regime {
    pub fn label(self) -> RegimeLabel {
        match self {
            Regime::Nonlocal => RegimeLabel::Nonlocal,
            Regime::Transitional { .. } => RegimeLabel::Transitional,
            Regime::Local => RegimeLabel::Local,
        }
    }
}

/// Interfaces of an arrangement resolved to grid indices.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Layout {
    PureNonlocal,
    PureLocal,
    NonlocalLocal { interface: isize },
    LocalNonlocalLocal { left: isize, right: isize },
}

impl Layout {
    pub(crate) fn resolve<T: Real>(mesh: &Mesh<T>, arrangement: &Arrangement<T>, ratio: usize) -> Result<Self> {
        let on_grid = |name: &str, x: T| {
            mesh.locate(x)
                .filter(|&i| (0..=mesh.last()).contains(&i))
                .ok_or_else(|| Error::config(format!("interface {name} = {x} is not a grid node of [{}, {}] with h = {}", mesh.x_left(), mesh.x_right(), mesh.h())))
        };
        let r = ratio as isize;
        match *arrangement {
            Arrangement::PureNonlocal => Ok(Layout::PureNonlocal),
            Arrangement::PureLocal => Ok(Layout::PureLocal),
            Arrangement::NonlocalLocal { interface } => {
                let s = on_grid("x*", interface)?;
                Ok(Layout::NonlocalLocal { interface: s })
            }
            Arrangement::LocalNonlocalLocal { left, right } => {
                let a = on_grid("x_a", left)?;
                let b = on_grid("x_b", right)?;
                if a >= b {
                    return Err(Error::config(format!("interfaces must satisfy x_a < x_b, got {left} and {right}")));
                }
                if a - r < 0 {
                    return Err(Error::config(format!("interface x_a = {left} is closer than the horizon to the left boundary")));
                }
                if b + r > mesh.last() {
                    return Err(Error::config(format!("interface x_b = {right} is closer than the horizon to the right boundary")));
                }
                Ok(Layout::LocalNonlocalLocal { left: a, right: b })
            }
        }
    }

    pub(crate) fn regime(&self, i: isize, ratio: usize) -> Regime {
        let r = ratio as isize;
        match *self {
            Layout::PureNonlocal => Regime::Nonlocal,
            Layout::PureLocal => Regime::Local,
            Layout::NonlocalLocal { interface: s } => {
                if i <= s {
                    Regime::Nonlocal
                } else if i <= s + r {
                    Regime::Transitional { depth: (i - s) as usize, nonlocal_side: Side::Left }
                } else {
                    Regime::Local
                }
            }
            Layout::LocalNonlocalLocal { left: a, right: b } => {
                if i < a - r {
                    Regime::Local
                } else if i < a {
                    Regime::Transitional { depth: (a - i) as usize, nonlocal_side: Side::Right }
                } else if i <= b {
                    Regime::Nonlocal
                } else if i <= b + r {
                    Regime::Transitional { depth: (i - b) as usize, nonlocal_side: Side::Left }
                } else {
                    Regime::Local
                }
            }
        }
    }

    /// Ghost nodes beyond each boundary. Volumetric constraints need `r`;
    /// next to a Dirichlet end, transitional stencils of the local–nonlocal–local
    /// arrangement reach `2r − 1` cells past the interface and get zero-valued
    /// ghosts when that passes the boundary.
    pub(crate) fn ghost_counts(&self, ratio: usize, last: isize) -> (usize, usize) {
        let r = ratio as isize;
        match *self {
            Layout::PureNonlocal => (ratio, ratio),
            Layout::NonlocalLocal { .. } => (ratio, 0),
            Layout::PureLocal => (0, 0),
            Layout::LocalNonlocalLocal { left, right } => {
                let reach = (2 * r - 1).max(1);
                ((reach - left).max(0) as usize, (right + reach - last).max(0) as usize)
            }
        }
    }

    /// Whether node `i` belongs to the nonlocal region (ghost nodes included).
    pub(crate) fn in_nonlocal_region(&self, i: isize) -> bool {
        match *self {
            Layout::PureNonlocal => true,
            Layout::PureLocal => false,
            Layout::NonlocalLocal { interface } => i <= interface,
            Layout::LocalNonlocalLocal { left, right } => (left..=right).contains(&i),
        }
    }

    /// Distance, in cells, from `x` (in index units) to the nonlocal region,
    /// or `None` when there is no nonlocal region.
    pub(crate) fn distance_to_nonlocal(&self, t: f64) -> Option<f64> {
        match *self {
            Layout::PureNonlocal => Some(0.0),
            Layout::PureLocal => None,
            Layout::NonlocalLocal { interface } => Some((t - interface as f64).max(0.0)),
            Layout::LocalNonlocalLocal { left, right } => {
                Some(if t < left as f64 { left as f64 - t } else { (t - right as f64).max(0.0) })
            }
        }
    }
}
