use crate::error::{Error, Result};
use crate::scalar::Real;

use super::mesh::{Mesh, Regime};

/// Nodal values on the grid, ghost nodes included.
///
/// Index `i` runs over `-ghost_left ..= 2N + ghost_right`.
#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction<T> {
    mesh: Mesh<T>,
    ghost_left: usize,
    ghost_right: usize,
    values: Vec<T>,
}

impl<T: Real> GridFunction<T> {
    pub fn zeros(mesh: Mesh<T>, ghost_left: usize, ghost_right: usize) -> Self {
        let len = mesh.intervals() + 1 + ghost_left + ghost_right;
        GridFunction { mesh, ghost_left, ghost_right, values: vec![T::zero(); len] }
    }

    pub fn from_fn(mesh: Mesh<T>, ghost_left: usize, ghost_right: usize, f: impl Fn(T) -> T) -> Self {
        let mut g = Self::zeros(mesh, ghost_left, ghost_right);
        for i in g.indices() {
            let x = mesh.node(i);
            g.set(i, f(x));
        }
        g
    }

    pub fn from_values(mesh: Mesh<T>, ghost_left: usize, ghost_right: usize, values: Vec<T>) -> Result<Self> {
        let expected = mesh.intervals() + 1 + ghost_left + ghost_right;
        if values.len() != expected {
            return Err(Error::Shape { expected, actual: values.len() });
        }
        Ok(GridFunction { mesh, ghost_left, ghost_right, values })
    }

    pub fn mesh(&self) -> &Mesh<T> {
        &self.mesh
    }

    pub fn ghosts(&self) -> (usize, usize) {
        (self.ghost_left, self.ghost_right)
    }

    pub fn first(&self) -> isize {
        -(self.ghost_left as isize)
    }

    pub fn last(&self) -> isize {
        self.mesh.last() + self.ghost_right as isize
    }

    pub fn indices(&self) -> std::ops::RangeInclusive<isize> {
        self.first()..=self.last()
    }

    pub fn contains(&self, i: isize) -> bool {
        self.indices().contains(&i)
    }

    /// Value at node `i`; panics outside the stored range.
    pub fn get(&self, i: isize) -> T {
        self.values[(i - self.first()) as usize]
    }

    pub fn set(&mut self, i: isize, v: T) {
        let k = (i - self.first()) as usize;
        self.values[k] = v;
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    /// Values on the in-domain nodes `0..=2N`.
    pub fn domain_values(&self) -> &[T] {
        &self.values[self.ghost_left..=self.ghost_left + self.mesh.intervals()]
    }

    /// Coordinates paired with values over the in-domain nodes.
    pub fn domain_points(&self) -> impl Iterator<Item = (T, T)> + '_ {
        (0..=self.mesh.last()).map(move |i| (self.mesh.node(i), self.get(i)))
    }

    pub fn max_abs(&self) -> T {
        self.values.iter().fold(T::zero(), |m, v| m.max(v.abs()))
    }
}

/// Assembled `A = −L^qnl` on the interior unknowns, stored as full stencils.
///
/// Row `k` belongs to node `k + 1`. Each row keeps `2p + 1` stencil weights
/// for node offsets `-p..=p`, including columns that fall on eliminated
/// boundary or ghost nodes; [`OperatorMatrix::get`] and
/// [`OperatorMatrix::matvec`] only see the unknown columns.
#[derive(Debug, Clone, PartialEq)]
pub struct OperatorMatrix<T> {
    pub(crate) mesh: Mesh<T>,
    pub(crate) ghost_left: usize,
    pub(crate) ghost_right: usize,
    pub(crate) bandwidth: usize,
    pub(crate) stencils: Vec<T>,
    pub(crate) regimes: Vec<Regime>,
}

impl<T: Real> OperatorMatrix<T> {
    /// Number of unknowns, `2N − 1`.
    pub fn dim(&self) -> usize {
        self.regimes.len()
    }

    /// Half-bandwidth `p`.
    pub fn bandwidth(&self) -> usize {
        self.bandwidth
    }

    pub fn mesh(&self) -> &Mesh<T> {
        &self.mesh
    }

    pub fn ghosts(&self) -> (usize, usize) {
        (self.ghost_left, self.ghost_right)
    }

    pub fn regimes(&self) -> &[Regime] {
        &self.regimes
    }

    pub fn node_of_row(&self, row: usize) -> isize {
        row as isize + 1
    }

    fn width(&self) -> usize {
        2 * self.bandwidth + 1
    }

    /// Full stencil of `row`, offsets `-p..=p`.
    pub fn stencil(&self, row: usize) -> &[T] {
        let w = self.width();
        &self.stencils[row * w..(row + 1) * w]
    }

    /// Entry `A[row, col]` of the reduced matrix.
    pub fn get(&self, row: usize, col: usize) -> T {
        let p = self.bandwidth as isize;
        let off = col as isize - row as isize;
        if off.abs() > p {
            T::zero()
        } else {
            self.stencil(row)[(off + p) as usize]
        }
    }

    /// `(offset, weight)` pairs of the stencil that land on unknown columns.
    pub fn row_entries(&self, row: usize) -> impl Iterator<Item = (usize, T)> + '_ {
        let p = self.bandwidth as isize;
        let n = self.dim() as isize;
        self.stencil(row).iter().enumerate().filter_map(move |(k, &w)| {
            let col = row as isize + k as isize - p;
            (col >= 0 && col < n).then_some((col as usize, w))
        })
    }

    /// Reduced product `A·v` over the unknowns.
    pub fn matvec(&self, v: &[T]) -> Result<Vec<T>> {
        if v.len() != self.dim() {
            return Err(Error::Shape { expected: self.dim(), actual: v.len() });
        }
        Ok((0..self.dim())
            .map(|row| self.row_entries(row).map(|(col, w)| w * v[col]).sum())
            .collect())
    }

    /// Full-stencil product: row `k` of the result is `(A u)` at node `k + 1`,
    /// with boundary and ghost values read from `u`.
    pub fn apply(&self, u: &GridFunction<T>) -> Result<Vec<T>> {
        self.check_layout(u)?;
        let p = self.bandwidth as isize;
        Ok((0..self.dim())
            .map(|row| {
                let node = self.node_of_row(row);
                self.stencil(row)
                    .iter()
                    .enumerate()
                    .filter(|(_, w)| **w != T::zero())
                    .map(|(k, &w)| w * u.get(node + k as isize - p))
                    .sum()
            })
            .collect())
    }

    /// Contribution of the prescribed (eliminated) nodes of `g` to each row.
    /// The right-hand side of the reduced system is `f − boundary_terms(g)`.
    pub fn boundary_terms(&self, g: &GridFunction<T>) -> Result<Vec<T>> {
        self.check_layout(g)?;
        let p = self.bandwidth as isize;
        let n = self.dim() as isize;
        Ok((0..self.dim())
            .map(|row| {
                let node = self.node_of_row(row);
                self.stencil(row)
                    .iter()
                    .enumerate()
                    .filter_map(|(k, &w)| {
                        let target = node + k as isize - p;
                        let col = target - 1;
                        (w != T::zero() && !(0..n).contains(&col)).then(|| w * g.get(target))
                    })
                    .sum()
            })
            .collect())
    }

    fn check_layout(&self, u: &GridFunction<T>) -> Result<()> {
        let expected = self.mesh.intervals() + 1 + self.ghost_left + self.ghost_right;
        if u.values().len() != expected || u.ghosts() != (self.ghost_left, self.ghost_right) {
            return Err(Error::Shape { expected, actual: u.values().len() });
        }
        Ok(())
    }

    /// `‖A‖∞` of the reduced matrix.
    pub fn norm_inf(&self) -> T {
        (0..self.dim())
            .map(|row| self.row_entries(row).fold(T::zero(), |s, (_, w)| s + w.abs()))
            .fold(T::zero(), T::max)
    }

    /// `‖·‖∞` over the full stencils, eliminated columns included.
    pub fn stencil_norm_inf(&self) -> T {
        (0..self.dim())
            .map(|row| self.stencil(row).iter().fold(T::zero(), |s, w| s + w.abs()))
            .fold(T::zero(), T::max)
    }

    /// Dense row-major copy of the reduced matrix.
    pub fn to_dense(&self) -> Vec<Vec<T>> {
        let n = self.dim();
        (0..n)
            .map(|row| {
                let mut dense = vec![T::zero(); n];
                for (col, w) in self.row_entries(row) {
                    dense[col] = w;
                }
                dense
            })
            .collect()
    }

    pub fn zero_like(&self) -> Self {
        OperatorMatrix { stencils: vec![T::zero(); self.stencils.len()], ..self.clone() }
    }
}
