//! Structured tensor-product grids, sampled fields and finite-difference stencils.

use crate::error::{Error, Result};
use crate::linalg::{Mat3, Vec3, ZERO3, ZERO33};
use serde::{Deserialize, Serialize};

/// One coordinate axis of the parameter rectangle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Axis {
    pub lo: f64,
    pub hi: f64,
    /// Number of intervals.
    pub n: usize,
    /// Periodic axes store `n` nodes; the node at `hi` is identified with `lo`.
    pub periodic: bool,
}

impl Axis {
    pub fn new(lo: f64, hi: f64, n: usize, periodic: bool) -> Self {
        Axis { lo, hi, n, periodic }
    }

    pub fn nodes(&self) -> usize {
        if self.periodic {
            self.n
        } else {
            self.n + 1
        }
    }

    pub fn h(&self) -> f64 {
        (self.hi - self.lo) / self.n as f64
    }

    pub fn coord(&self, i: usize) -> f64 {
        self.lo + i as f64 * self.h()
    }

    pub fn is_end(&self, i: usize) -> bool {
        !self.periodic && (i == 0 || i == self.n)
    }
}

/// Interior finite-difference order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
pub enum StencilOrder {
    #[default]
    #[serde(rename = "2")]
    Second,
    #[serde(rename = "4")]
    Fourth,
}

impl StencilOrder {
    pub fn as_f64(self) -> f64 {
        match self {
            StencilOrder::Second => 2.0,
            StencilOrder::Fourth => 4.0,
        }
    }
}

/// Per-node weights of a 1-D derivative along one axis, already divided by `h^k`.
#[derive(Debug, Clone)]
pub struct Stencil1D {
    pub rows: Vec<Vec<(usize, f64)>>,
}

const D1_2_INT: [f64; 3] = [-0.5, 0.0, 0.5];
const D1_2_END: [f64; 3] = [-1.5, 2.0, -0.5];
const D2_2_INT: [f64; 3] = [1.0, -2.0, 1.0];
const D2_2_END: [f64; 4] = [2.0, -5.0, 4.0, -1.0];
const D1_4_INT: [f64; 5] = [1.0 / 12.0, -8.0 / 12.0, 0.0, 8.0 / 12.0, -1.0 / 12.0];
const D1_4_END0: [f64; 5] = [-25.0 / 12.0, 4.0, -3.0, 4.0 / 3.0, -0.25];
const D1_4_END1: [f64; 5] = [-0.25, -10.0 / 12.0, 1.5, -0.5, 1.0 / 12.0];
const D2_4_INT: [f64; 5] = [-1.0 / 12.0, 16.0 / 12.0, -2.5, 16.0 / 12.0, -1.0 / 12.0];
const D2_4_END0: [f64; 6] = [
    45.0 / 12.0,
    -154.0 / 12.0,
    214.0 / 12.0,
    -156.0 / 12.0,
    61.0 / 12.0,
    -10.0 / 12.0,
];
const D2_4_END1: [f64; 6] = [
    10.0 / 12.0,
    -15.0 / 12.0,
    -4.0 / 12.0,
    14.0 / 12.0,
    -6.0 / 12.0,
    1.0 / 12.0,
];

impl Stencil1D {
    /// Derivative of order `deriv` (1 or 2) along `axis`.
    pub fn new(axis: &Axis, deriv: usize, order: StencilOrder) -> Result<Self> {
        let m = axis.nodes();
        let min_nodes = match order {
            StencilOrder::Second => 4,
            StencilOrder::Fourth => 6,
        };
        if m < min_nodes {
            return Err(Error::InvalidDomain(format!(
                "axis with {m} nodes is too short for the requested stencil"
            )));
        }
        let h = axis.h();
        let hk = if deriv == 1 { h } else { h * h };
        let sign_end = if deriv == 1 { -1.0 } else { 1.0 };
        let (interior, ends): (&[f64], Vec<&[f64]>) = match (deriv, order) {
            (1, StencilOrder::Second) => (&D1_2_INT, vec![&D1_2_END]),
            (2, StencilOrder::Second) => (&D2_2_INT, vec![&D2_2_END]),
            (1, StencilOrder::Fourth) => (&D1_4_INT, vec![&D1_4_END0, &D1_4_END1]),
            (2, StencilOrder::Fourth) => (&D2_4_INT, vec![&D2_4_END0, &D2_4_END1]),
            _ => return Err(Error::InvalidDomain(format!("unsupported derivative {deriv}"))),
        };
        let half = (interior.len() / 2) as isize;
        let mut rows = Vec::with_capacity(m);
        for i in 0..m {
            let mut row = Vec::new();
            if axis.periodic {
                for (k, w) in interior.iter().enumerate() {
                    if *w != 0.0 {
                        let idx = (i as isize + k as isize - half).rem_euclid(m as isize) as usize;
                        row.push((idx, w / hk));
                    }
                }
            } else if i < ends.len() {
                for (k, w) in ends[i].iter().enumerate() {
                    row.push((k, w / hk));
                }
            } else if i >= m - ends.len() {
                let e = m - 1 - i;
                for (k, w) in ends[e].iter().enumerate() {
                    row.push((m - 1 - k, sign_end * w / hk));
                }
            } else {
                for (k, w) in interior.iter().enumerate() {
                    if *w != 0.0 {
                        row.push(((i as isize + k as isize - half) as usize, w / hk));
                    }
                }
            }
            rows.push(row);
        }
        Ok(Stencil1D { rows })
    }
}

/// Values that can be combined linearly by stencils and quadrature.
pub trait FieldValue: Copy + Send + Sync + std::fmt::Debug {
    const RANK: Rank;
    fn zero() -> Self;
    fn add_scaled(&mut self, s: f64, other: &Self);
    fn max_abs(&self) -> f64;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Rank {
    Scalar,
    Vector,
    Tensor,
}

impl FieldValue for f64 {
    const RANK: Rank = Rank::Scalar;
    fn zero() -> Self {
        0.0
    }
    fn add_scaled(&mut self, s: f64, other: &Self) {
        *self += s * other;
    }
    fn max_abs(&self) -> f64 {
        self.abs()
    }
}

impl FieldValue for Vec3 {
    const RANK: Rank = Rank::Vector;
    fn zero() -> Self {
        ZERO3
    }
    fn add_scaled(&mut self, s: f64, o: &Self) {
        for k in 0..3 {
            self[k] += s * o[k];
        }
    }
    fn max_abs(&self) -> f64 {
        self.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }
}

impl FieldValue for Mat3 {
    const RANK: Rank = Rank::Tensor;
    fn zero() -> Self {
        ZERO33
    }
    fn add_scaled(&mut self, s: f64, o: &Self) {
        for i in 0..3 {
            for j in 0..3 {
                self[i][j] += s * o[i][j];
            }
        }
    }
    fn max_abs(&self) -> f64 {
        crate::linalg::mat_max_abs(self)
    }
}

/// Tensor-product grid over a parameter rectangle. Node `(i, j)` is stored at `i * n2 + j`.
#[derive(Debug, Clone)]
pub struct Grid {
    pub axes: [Axis; 2],
    pub order: StencilOrder,
    d1: [Stencil1D; 2],
    d2: [Stencil1D; 2],
}

impl Grid {
    pub fn new(a1: Axis, a2: Axis, order: StencilOrder) -> Result<Self> {
        let d1 = [Stencil1D::new(&a1, 1, order)?, Stencil1D::new(&a2, 1, order)?];
        let d2 = [Stencil1D::new(&a1, 2, order)?, Stencil1D::new(&a2, 2, order)?];
        Ok(Grid {
            axes: [a1, a2],
            order,
            d1,
            d2,
        })
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.axes[0].nodes(), self.axes[1].nodes())
    }

    pub fn len(&self) -> usize {
        let (a, b) = self.shape();
        a * b
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    #[inline]
    pub fn idx(&self, i: usize, j: usize) -> usize {
        i * self.axes[1].nodes() + j
    }

    #[inline]
    pub fn ij(&self, k: usize) -> (usize, usize) {
        let n2 = self.axes[1].nodes();
        (k / n2, k % n2)
    }

    pub fn coords(&self, i: usize, j: usize) -> [f64; 2] {
        [self.axes[0].coord(i), self.axes[1].coord(j)]
    }

    /// Largest grid spacing.
    pub fn h(&self) -> f64 {
        self.axes[0].h().max(self.axes[1].h())
    }

    pub fn is_boundary(&self, i: usize, j: usize) -> bool {
        self.axes[0].is_end(i) || self.axes[1].is_end(j)
    }

    pub fn stencil(&self, axis: usize, deriv: usize) -> &Stencil1D {
        if deriv == 1 {
            &self.d1[axis]
        } else {
            &self.d2[axis]
        }
    }

    /// Derivative of order `deriv` along `axis` of sampled values.
    pub fn diff<T: FieldValue>(&self, values: &[T], axis: usize, deriv: usize) -> Vec<T> {
        let (n1, n2) = self.shape();
        let st = self.stencil(axis, deriv);
        let mut out = vec![T::zero(); n1 * n2];
        for i in 0..n1 {
            for j in 0..n2 {
                let mut acc = T::zero();
                if axis == 0 {
                    for &(ii, w) in &st.rows[i] {
                        acc.add_scaled(w, &values[ii * n2 + j]);
                    }
                } else {
                    for &(jj, w) in &st.rows[j] {
                        acc.add_scaled(w, &values[i * n2 + jj]);
                    }
                }
                out[i * n2 + j] = acc;
            }
        }
        out
    }

    /// First derivatives along both axes.
    pub fn gradient<T: FieldValue>(&self, values: &[T]) -> [Vec<T>; 2] {
        [self.diff(values, 0, 1), self.diff(values, 1, 1)]
    }

    pub fn sample<T, F>(&self, f: F) -> Vec<T>
    where
        F: Fn(usize, usize, [f64; 2]) -> T,
    {
        let (n1, n2) = self.shape();
        let mut out = Vec::with_capacity(n1 * n2);
        for i in 0..n1 {
            for j in 0..n2 {
                out.push(f(i, j, self.coords(i, j)));
            }
        }
        out
    }
}

/// A field sampled on every grid node at one time.
#[derive(Debug, Clone, PartialEq)]
pub struct Field<T> {
    pub values: Vec<T>,
    pub shape: (usize, usize),
    pub units: String,
}

pub type ScalarField = Field<f64>;
pub type VectorField = Field<Vec3>;
pub type TensorField = Field<Mat3>;

impl<T: FieldValue> Field<T> {
    pub fn new(grid: &Grid, values: Vec<T>, units: &str) -> Self {
        assert_eq!(values.len(), grid.len(), "field length must match the grid");
        Field {
            values,
            shape: grid.shape(),
            units: units.to_string(),
        }
    }

    pub fn zeros(grid: &Grid, units: &str) -> Self {
        Self::new(grid, vec![T::zero(); grid.len()], units)
    }

    pub fn from_fn<F>(grid: &Grid, units: &str, f: F) -> Self
    where
        F: Fn(usize) -> T,
    {
        Self::new(grid, (0..grid.len()).map(f).collect(), units)
    }

    pub fn rank(&self) -> Rank {
        T::RANK
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn check_grid(&self, grid: &Grid) -> Result<()> {
        if self.shape != grid.shape() {
            return Err(Error::ShapeMismatch(format!(
                "field {:?} vs grid {:?}",
                self.shape,
                grid.shape()
            )));
        }
        Ok(())
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0_f64, |m, v| m.max(v.max_abs()))
    }

    pub fn map<U: FieldValue, F: Fn(&T) -> U>(&self, units: &str, f: F) -> Field<U> {
        Field {
            values: self.values.iter().map(f).collect(),
            shape: self.shape,
            units: units.to_string(),
        }
    }
}

impl<T> std::ops::Index<usize> for Field<T> {
    type Output = T;
    fn index(&self, k: usize) -> &T {
        &self.values[k]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn poly_err(order: StencilOrder, deriv: usize, degree: i32) -> f64 {
        let ax = Axis::new(0.3, 1.1, 12, false);
        let g = Grid::new(ax, Axis::new(0.0, 1.0, 8, false), order).unwrap();
        let vals: Vec<f64> = g.sample(|_, _, x| x[0].powi(degree));
        let d = g.diff(&vals, 0, deriv);
        let mut err = 0.0_f64;
        for i in 0..g.shape().0 {
            let x = ax.coord(i);
            let exact = if deriv == 1 {
                degree as f64 * x.powi(degree - 1)
            } else {
                (degree * (degree - 1)) as f64 * x.powi(degree - 2)
            };
            err = err.max((d[g.idx(i, 3)] - exact).abs());
        }
        err
    }

    #[test]
    fn second_order_stencils_exact_on_quadratics() {
        for deg in 0..=2 {
            assert!(poly_err(StencilOrder::Second, 1, deg) < 1e-12);
            assert!(poly_err(StencilOrder::Second, 2, deg) < 1e-10);
        }
        assert!(poly_err(StencilOrder::Second, 1, 3) > 1e-6);
    }

    #[test]
    fn fourth_order_stencils_exact_on_quartics() {
        for deg in 0..=4 {
            assert!(poly_err(StencilOrder::Fourth, 1, deg) < 1e-11, "d1 deg {deg}");
            assert!(poly_err(StencilOrder::Fourth, 2, deg) < 1e-9, "d2 deg {deg}");
        }
    }

    #[test]
    fn periodic_derivative_of_sine() {
        let n = 64;
        let ax = Axis::new(0.0, std::f64::consts::TAU, n, true);
        let g = Grid::new(Axis::new(0.0, 1.0, 4, false), ax, StencilOrder::Second).unwrap();
        let vals: Vec<f64> = g.sample(|_, _, x| x[1].sin());
        let d = g.diff(&vals, 1, 1);
        let h = ax.h();
        for j in 0..n {
            let exact = ax.coord(j).cos();
            assert!((d[g.idx(2, j)] - exact).abs() < h * h);
        }
    }
}
