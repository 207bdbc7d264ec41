use crate::error::{Error, Result};
use crate::grid::{point_from, Ball, Grid, Point};
use crate::scalar::Real;

/// Finite center set `Π` crossed with a geometric radius ladder
/// `r_min * ratio^k`, `k = 0..=rungs`.
///
/// Centers are kept in lexicographic order so scans that break ties by
/// "first seen" pick the lexicographically smallest center, then the
/// smallest radius.
#[derive(Debug, Clone, PartialEq)]
pub struct BallFamily<T> {
    dim: usize,
    centers: Vec<Point<T>>,
    r_min: T,
    ratio: T,
    rungs: usize,
}

impl<T: Real> BallFamily<T> {
    pub fn new(dim: usize, centers: Vec<Point<T>>, r_min: T, ratio: T, rungs: usize) -> Result<Self> {
        if !(1..=3).contains(&dim) {
            return Err(Error::Dimension(dim));
        }
        if centers.is_empty() {
            return Err(Error::InvalidParameter("center set is empty".into()));
        }
        if !(r_min > T::zero()) || !r_min.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "smallest radius must be positive, got {r_min}"
            )));
        }
        if !(ratio > T::one() && ratio <= T::of(2.0)) {
            return Err(Error::InvalidParameter(format!(
                "ladder ratio must lie in (1, 2], got {ratio}"
            )));
        }
        let mut centers = centers;
        centers.sort_by(|a, b| {
            a.iter()
                .zip(b.iter())
                .map(|(x, y)| x.partial_cmp(y).unwrap_or(std::cmp::Ordering::Equal))
                .find(|o| o.is_ne())
                .unwrap_or(std::cmp::Ordering::Equal)
        });
        centers.dedup();
        Ok(Self {
            dim,
            centers,
            r_min,
            ratio,
            rungs,
        })
    }

    /// Ladder `r_min * ratio^k` up to the first rung reaching `r_max`.
    pub fn spanning(dim: usize, centers: Vec<Point<T>>, r_min: T, ratio: T, r_max: T) -> Result<Self> {
        if !(r_max >= r_min) {
            return Err(Error::InvalidParameter(format!(
                "largest radius {r_max} below smallest {r_min}"
            )));
        }
        let rungs = ((r_max / r_min).ln() / ratio.ln() - T::of(1e-9)).ceil().max(T::zero());
        Self::new(dim, centers, r_min, ratio, rungs.to_usize().unwrap_or(0))
    }

    /// Default scan family for a grid: the origin plus a sublattice of
    /// spacing `L/4` over the inner half of the box, radii from `2h` to `L`
    /// in steps of `sqrt 2`.
    pub fn default_for(grid: &Grid<T>) -> Self {
        let l = grid.half_width();
        let step = l / T::of(4.0);
        let per_axis: Vec<T> = (-2i32..=2).map(|k| T::of(k as f64) * step).collect();
        let mut centers = Vec::new();
        let dim = grid.dim();
        let count = per_axis.len().pow(dim as u32);
        for flat in 0..count {
            let mut p = [T::zero(); 3];
            let mut rest = flat;
            for axis in (0..dim).rev() {
                p[axis] = per_axis[rest % per_axis.len()];
                rest /= per_axis.len();
            }
            centers.push(p);
        }
        Self::spanning(dim, centers, T::of(2.0) * grid.spacing(), T::SQRT_2(), l)
            .expect("default family parameters are valid")
    }

    pub fn with_centers(dim: usize, centers: &[&[T]], r_min: T, ratio: T, rungs: usize) -> Result<Self> {
        let pts = centers.iter().map(|c| point_from(c)).collect::<Result<Vec<_>>>()?;
        Self::new(dim, pts, r_min, ratio, rungs)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn centers(&self) -> &[Point<T>] {
        &self.centers
    }

    pub fn ratio(&self) -> T {
        self.ratio
    }

    pub fn r_min(&self) -> T {
        self.r_min
    }

    pub fn rungs(&self) -> usize {
        self.rungs
    }

    pub fn radii(&self) -> Vec<T> {
        (0..=self.rungs)
            .map(|k| self.r_min * self.ratio.powi(k as i32))
            .collect()
    }

    pub fn r_max(&self) -> T {
        self.r_min * self.ratio.powi(self.rungs as i32)
    }

    pub fn len(&self) -> usize {
        self.centers.len() * (self.rungs + 1)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// All balls, centers outer and radii inner.
    pub fn balls(&self) -> Vec<(usize, Ball<T>)> {
        let radii = self.radii();
        let mut out = Vec::with_capacity(self.len());
        for (ci, c) in self.centers.iter().enumerate() {
            for &r in &radii {
                out.push((ci, Ball { center: *c, radius: r }));
            }
        }
        out
    }

    /// Superset with twice as many rungs, extending the ladder toward
    /// `r -> 0` by the same number of steps.
    pub fn doubled(&self) -> Self {
        self.extended_down(self.rungs + 1)
    }

    /// Adds `k` rungs below `r_min`.
    pub fn extended_down(&self, k: usize) -> Self {
        Self {
            dim: self.dim,
            centers: self.centers.clone(),
            r_min: self.r_min / self.ratio.powi(k as i32),
            ratio: self.ratio,
            rungs: self.rungs + k,
        }
    }

    /// Radii multiplied by `s`; centers unchanged.
    pub fn rescaled(&self, s: T) -> Result<Self> {
        Self::new(self.dim, self.centers.clone(), self.r_min * s, self.ratio, self.rungs)
    }

    /// Drops rungs below `floor` (the discretization floor `2h` for grid scans).
    pub fn with_floor(&self, floor: T) -> Result<Self> {
        let radii = self.radii();
        let first = radii
            .iter()
            .position(|&r| r >= floor * (T::one() - T::of(1e-12)))
            .ok_or_else(|| Error::Coverage(format!("every radius lies below the discretization floor {floor}")))?;
        Ok(Self {
            dim: self.dim,
            centers: self.centers.clone(),
            r_min: radii[first],
            ratio: self.ratio,
            rungs: self.rungs - first,
        })
    }
}
