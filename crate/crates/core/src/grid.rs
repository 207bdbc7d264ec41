//! Cell-centered discretization of the box `[-L, L]^n` and ball-restricted
//! midpoint quadrature.
//!
//! Lattice points sit at `(k + 1/2) h - L` on every axis, so the origin is
//! never a sample point and weights singular at `0` stay finite. Points are
//! stored as `[T; 3]` with unused axes set to zero; the flat index is
//! lexicographic with axis 0 most significant.

use crate::error::{Error, Result};
use crate::scalar::Real;

pub type Point<T> = [T; 3];

pub fn distance_sq<T: Real>(a: &Point<T>, b: &Point<T>) -> T {
    let d0 = a[0] - b[0];
    let d1 = a[1] - b[1];
    let d2 = a[2] - b[2];
    d0 * d0 + d1 * d1 + d2 * d2
}

pub fn norm<T: Real>(a: &Point<T>) -> T {
    (a[0] * a[0] + a[1] * a[1] + a[2] * a[2]).sqrt()
}

/// Pads up to three coordinates into a [`Point`].
pub fn point_from<T: Real>(coords: &[T]) -> Result<Point<T>> {
    if coords.is_empty() || coords.len() > 3 {
        return Err(Error::InvalidParameter(format!(
            "point needs 1 to 3 coordinates, got {}",
            coords.len()
        )));
    }
    let mut p = [T::zero(); 3];
    p[..coords.len()].copy_from_slice(coords);
    Ok(p)
}

/// Strict membership `d² < r²`, with distances within a few ulps of the
/// radius counted as ties (and excluded) so that ladder radii computed in
/// floating point do not pick up lattice points lying exactly on the sphere.
pub fn strictly_inside<T: Real>(d2: T, r2: T) -> bool {
    d2 < r2 * (T::one() - T::of(1024.0) * T::epsilon())
}

pub(crate) fn point_to_vec<T: Real>(p: &Point<T>, dim: usize) -> Vec<f64> {
    p[..dim].iter().map(|v| v.as_f64()).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct Grid<T> {
    dim: usize,
    half_width: T,
    cells: usize,
    spacing: T,
}

impl<T: Real> Grid<T> {
    pub fn new(dim: usize, half_width: T, cells_per_axis: usize) -> Result<Self> {
        if !(1..=3).contains(&dim) {
            return Err(Error::Dimension(dim));
        }
        if !(half_width > T::zero()) || !half_width.is_finite() {
            return Err(Error::HalfWidth);
        }
        if cells_per_axis < 2 {
            return Err(Error::Cells(cells_per_axis));
        }
        let spacing = T::of(2.0) * half_width / T::of_usize(cells_per_axis);
        Ok(Self {
            dim,
            half_width,
            cells: cells_per_axis,
            spacing,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn half_width(&self) -> T {
        self.half_width
    }

    pub fn cells_per_axis(&self) -> usize {
        self.cells
    }

    pub fn spacing(&self) -> T {
        self.spacing
    }

    pub fn cell_volume(&self) -> T {
        self.spacing.powi(self.dim as i32)
    }

    /// Number of lattice points, `cells^n`.
    pub fn len(&self) -> usize {
        self.cells.pow(self.dim as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Diameter of the box, `2 L sqrt(n)`.
    pub fn diameter(&self) -> T {
        T::of(2.0) * self.half_width * T::of_usize(self.dim).sqrt()
    }

    /// Per-axis extents with inactive axes set to 1.
    pub fn shape(&self) -> [usize; 3] {
        let mut s = [1; 3];
        for axis in s.iter_mut().take(self.dim) {
            *axis = self.cells;
        }
        s
    }

    pub fn axis_coord(&self, k: usize) -> T {
        (T::of_usize(k) + T::of(0.5)) * self.spacing - self.half_width
    }

    pub fn multi_index(&self, idx: usize) -> [usize; 3] {
        let s = self.shape();
        [idx / (s[1] * s[2]), (idx / s[2]) % s[1], idx % s[2]]
    }

    pub fn flat_index(&self, mi: [usize; 3]) -> usize {
        let s = self.shape();
        (mi[0] * s[1] + mi[1]) * s[2] + mi[2]
    }

    pub fn point(&self, idx: usize) -> Point<T> {
        let mi = self.multi_index(idx);
        let mut p = [T::zero(); 3];
        for (axis, coord) in p.iter_mut().enumerate().take(self.dim) {
            *coord = self.axis_coord(mi[axis]);
        }
        p
    }

    pub fn points(&self) -> impl Iterator<Item = Point<T>> + '_ {
        (0..self.len()).map(move |i| self.point(i))
    }

    /// Lattice point closest to `x` (ties go to the lower index).
    pub fn nearest_index(&self, x: &Point<T>) -> usize {
        let mut mi = [0usize; 3];
        for (axis, slot) in mi.iter_mut().enumerate().take(self.dim) {
            let k = ((x[axis] + self.half_width) / self.spacing - T::of(0.5)).round();
            let k = k.max(T::zero()).min(T::of_usize(self.cells - 1));
            *slot = k.to_usize().unwrap_or(0);
        }
        self.flat_index(mi)
    }

    /// Same box at half the resolution, when the cell count is even.
    pub fn coarsened(&self) -> Option<Self> {
        if self.cells.is_multiple_of(2) && self.cells >= 4 {
            Self::new(self.dim, self.half_width, self.cells / 2).ok()
        } else {
            None
        }
    }

    pub fn refined(&self) -> Self {
        Self::new(self.dim, self.half_width, self.cells * 2).expect("refining a valid grid")
    }

    fn axis_range(&self, c: T, r: T) -> Option<(usize, usize)> {
        let half = T::of(0.5);
        let lo = ((c - r + self.half_width) / self.spacing - half).ceil();
        let hi = ((c + r + self.half_width) / self.spacing - half).floor();
        let top = T::of_usize(self.cells - 1);
        let lo = lo.max(T::zero());
        let hi = hi.min(top);
        if lo > hi {
            return None;
        }
        Some((lo.to_usize()?, hi.to_usize()?))
    }

    /// Flat indices of lattice points strictly inside `ball`, in lattice order.
    pub fn ball_indices(&self, ball: &Ball<T>) -> Vec<usize> {
        let mut out = Vec::new();
        let mut ranges = [(0usize, 0usize); 3];
        for (axis, range) in ranges.iter_mut().enumerate().take(self.dim) {
            match self.axis_range(ball.center[axis], ball.radius) {
                Some(r) => *range = r,
                None => return out,
            }
        }
        let r2 = ball.radius * ball.radius;
        for i0 in ranges[0].0..=ranges[0].1 {
            for i1 in ranges[1].0..=ranges[1].1 {
                for i2 in ranges[2].0..=ranges[2].1 {
                    let idx = self.flat_index([i0, i1, i2]);
                    if strictly_inside(distance_sq(&self.point(idx), &ball.center), r2) {
                        out.push(idx);
                    }
                }
            }
        }
        out
    }

    /// Midpoint sum of `g(index)` over the ball, in lattice order.
    pub fn ball_sum<F>(&self, ball: &Ball<T>, mut g: F) -> BallSum<T>
    where
        F: FnMut(usize) -> T,
    {
        let idx = self.ball_indices(ball);
        let mut acc = T::zero();
        for &i in &idx {
            acc += g(i);
        }
        BallSum {
            value: acc * self.cell_volume(),
            cells: idx.len(),
        }
    }

    /// Fallible variant of [`Grid::ball_sum`].
    pub fn try_ball_sum<F>(&self, ball: &Ball<T>, mut g: F) -> Result<BallSum<T>>
    where
        F: FnMut(usize) -> Result<T>,
    {
        let idx = self.ball_indices(ball);
        let mut acc = T::zero();
        for &i in &idx {
            acc += g(i)?;
        }
        Ok(BallSum {
            value: acc * self.cell_volume(),
            cells: idx.len(),
        })
    }

    /// Truncated measure `|B ∩ box|` as seen by the lattice.
    pub fn ball_measure(&self, ball: &Ball<T>) -> T {
        T::of_usize(self.ball_indices(ball).len()) * self.cell_volume()
    }
}

/// Open ball `B(x, r)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Ball<T> {
    pub center: Point<T>,
    pub radius: T,
}

impl<T: Real> Ball<T> {
    pub fn new(center: &[T], radius: T) -> Result<Self> {
        let center = point_from(center)?;
        Self::at(center, radius)
    }

    pub fn at(center: Point<T>, radius: T) -> Result<Self> {
        if !(radius > T::zero()) || !radius.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "ball radius must be positive, got {radius}"
            )));
        }
        Ok(Self { center, radius })
    }
}

/// Result of a ball quadrature; `cells == 0` marks a ball disjoint from the box.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BallSum<T> {
    pub value: T,
    pub cells: usize,
}

impl<T> BallSum<T> {
    pub fn is_empty(&self) -> bool {
        self.cells == 0
    }
}

/// Scalar field sampled at the lattice points of a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledFunction<T> {
    grid: Grid<T>,
    values: Vec<T>,
}

impl<T: Real> SampledFunction<T> {
    /// Samples `expr` at every lattice point.
    pub fn sample<F>(grid: &Grid<T>, mut expr: F) -> Result<Self>
    where
        F: FnMut(&Point<T>) -> T,
    {
        let mut values = Vec::with_capacity(grid.len());
        for idx in 0..grid.len() {
            let p = grid.point(idx);
            let v = expr(&p);
            if !v.is_finite() {
                return Err(Error::NonFinite {
                    point: point_to_vec(&p, grid.dim()),
                });
            }
            values.push(v);
        }
        Ok(Self {
            grid: grid.clone(),
            values,
        })
    }

    pub fn from_values(grid: &Grid<T>, values: Vec<T>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::Length {
                expected: grid.len(),
                got: values.len(),
            });
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                point: point_to_vec(&grid.point(i), grid.dim()),
            });
        }
        Ok(Self {
            grid: grid.clone(),
            values,
        })
    }

    pub fn constant(grid: &Grid<T>, c: T) -> Self {
        Self {
            grid: grid.clone(),
            values: vec![c; grid.len()],
        }
    }

    pub fn grid(&self) -> &Grid<T> {
        &self.grid
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn value(&self, idx: usize) -> T {
        self.values[idx]
    }

    pub fn map<F: Fn(T) -> T>(&self, f: F) -> Result<Self> {
        Self::from_values(&self.grid, self.values.iter().map(|&v| f(v)).collect())
    }

    pub fn abs(&self) -> Self {
        Self {
            grid: self.grid.clone(),
            values: self.values.iter().map(|v| v.abs()).collect(),
        }
    }

    pub fn scaled(&self, c: T) -> Self {
        Self {
            grid: self.grid.clone(),
            values: self.values.iter().map(|&v| v * c).collect(),
        }
    }

    pub fn zip_with<F: Fn(T, T) -> T>(&self, other: &Self, f: F) -> Result<Self> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch);
        }
        Self::from_values(
            &self.grid,
            self.values.iter().zip(&other.values).map(|(&a, &b)| f(a, b)).collect(),
        )
    }

    pub fn ball_quadrature(&self, ball: &Ball<T>) -> BallSum<T> {
        self.grid.ball_sum(ball, |i| self.values[i])
    }

    /// Largest distance from the origin of a point where the field is nonzero.
    pub fn support_radius(&self) -> Option<T> {
        self.values
            .iter()
            .enumerate()
            .filter(|(_, v)| **v != T::zero())
            .map(|(i, _)| norm(&self.grid.point(i)))
            .fold(None, |acc, r| Some(acc.map_or(r, |a: T| a.max(r))))
    }

    pub fn is_nonnegative(&self) -> bool {
        self.values.iter().all(|v| *v >= T::zero())
    }
}
