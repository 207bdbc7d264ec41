//! Fractional integral `I_α`, fractional maximal `M_α` and their
//! commutators with a multiplier `b`, evaluated on lattice points.
//!
//! Both operators are translation invariant on the lattice, so the kernel
//! (and, for `M_α`, the ladder rung of each offset) is tabulated once per
//! absolute index offset.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::grid::{strictly_inside, Grid, SampledFunction};
use crate::scalar::{sphere_area, Real};

#[derive(Debug, Clone, PartialEq)]
pub struct OperatorParams<T> {
    pub alpha: T,
    /// Lattice indices to evaluate; `None` means every point.
    pub eval_points: Option<Vec<usize>>,
    /// Strictly increasing radii for the maximal-function supremum.
    pub radius_ladder: Vec<T>,
}

impl<T: Real> OperatorParams<T> {
    /// Default ladder: `2h · sqrt(2)^k` up to the first rung covering the box
    /// diameter.
    pub fn new(alpha: T, grid: &Grid<T>) -> Self {
        Self {
            alpha,
            eval_points: None,
            radius_ladder: geometric_ladder(T::of(2.0) * grid.spacing(), T::SQRT_2(), grid.diameter()),
        }
    }

    pub fn with_eval_points(mut self, points: Vec<usize>) -> Self {
        self.eval_points = Some(points);
        self
    }

    pub fn with_ladder(mut self, ladder: Vec<T>) -> Result<Self> {
        if ladder.is_empty() {
            return Err(Error::InvalidParameter("radius ladder is empty".into()));
        }
        if ladder.windows(2).any(|w| !(w[1] > w[0])) || !(ladder[0] > T::zero()) {
            return Err(Error::InvalidParameter(
                "radius ladder must be positive and strictly increasing".into(),
            ));
        }
        self.radius_ladder = ladder;
        Ok(self)
    }

    /// Factor by which the ladder maximum can undershoot the continuous
    /// supremum: `(max r_{k+1}/r_k)^{n-α}`.
    pub fn ladder_defect(&self, dim: usize) -> T {
        let worst = self
            .radius_ladder
            .windows(2)
            .map(|w| w[1] / w[0])
            .fold(T::one(), T::max);
        worst.powf(T::of_usize(dim) - self.alpha)
    }

    fn indices(&self, grid: &Grid<T>) -> Vec<usize> {
        match &self.eval_points {
            Some(p) => p.clone(),
            None => (0..grid.len()).collect(),
        }
    }
}

pub fn geometric_ladder<T: Real>(r_min: T, ratio: T, cover: T) -> Vec<T> {
    let mut out = vec![r_min];
    let mut k = 1;
    while *out.last().unwrap() < cover {
        out.push(r_min * ratio.powi(k));
        k += 1;
    }
    out
}

/// Operator output at a subset of lattice points.
#[derive(Debug, Clone, PartialEq)]
pub struct PointValues<T> {
    pub grid: Grid<T>,
    pub indices: Vec<usize>,
    pub values: Vec<T>,
}

impl<T: Real> PointValues<T> {
    pub fn get(&self, idx: usize) -> Option<T> {
        self.indices.iter().position(|&i| i == idx).map(|k| self.values[k])
    }

    pub fn is_full(&self) -> bool {
        self.indices.len() == self.grid.len() && self.indices.iter().enumerate().all(|(k, &i)| k == i)
    }

    pub fn into_field(self) -> Result<SampledFunction<T>> {
        if !self.is_full() {
            return Err(Error::PartialField);
        }
        SampledFunction::from_values(&self.grid, self.values)
    }
}

/// `∫_{cell} |u|^{α-n} du` for the cell centred at the origin: exact in
/// one dimension, otherwise the geometric mean of the inscribed and
/// circumscribed ball integrals `ω_n ρ^α / α`.
pub fn self_cell_integral<T: Real>(grid: &Grid<T>, alpha: T) -> T {
    let h = grid.spacing();
    let omega = sphere_area::<T>(grid.dim());
    let inner = h * T::of(0.5);
    let outer = inner * T::of_usize(grid.dim()).sqrt();
    omega / alpha * (inner * outer).powf(alpha * T::of(0.5))
}

fn offset_index(shape: [usize; 3], a: [usize; 3]) -> usize {
    (a[0] * shape[1] + a[1]) * shape[2] + a[2]
}

/// Kernel weights `h^n |k h|^{α-n}` by absolute index offset `k`, with the
/// analytic self-cell at offset zero.
fn kernel_table<T: Real>(grid: &Grid<T>, alpha: T) -> Vec<T> {
    let shape = grid.shape();
    let h = grid.spacing();
    let vol = grid.cell_volume();
    let expo = (alpha - T::of_usize(grid.dim())) * T::of(0.5);
    let mut table = vec![T::zero(); shape[0] * shape[1] * shape[2]];
    for a0 in 0..shape[0] {
        for a1 in 0..shape[1] {
            for a2 in 0..shape[2] {
                let m = (a0 * a0 + a1 * a1 + a2 * a2) as f64;
                table[offset_index(shape, [a0, a1, a2])] = if m == 0.0 {
                    self_cell_integral(grid, alpha)
                } else {
                    vol * (h * h * T::of(m)).powf(expo)
                };
            }
        }
    }
    table
}

/// Correlates `values` with a table indexed by absolute offset, visiting
/// source points in lattice order.
fn offset_sum<T: Real, F: FnMut(usize, T)>(grid: &Grid<T>, target: usize, values: &[T], mut visit: F) {
    let shape = grid.shape();
    let i = grid.multi_index(target);
    let mut j = 0;
    for j0 in 0..shape[0] {
        let a0 = i[0].abs_diff(j0);
        for j1 in 0..shape[1] {
            let a1 = i[1].abs_diff(j1);
            let base = (a0 * shape[1] + a1) * shape[2];
            for j2 in 0..shape[2] {
                let a2 = i[2].abs_diff(j2);
                visit(base + a2, values[j]);
                j += 1;
            }
        }
    }
}

fn check_integral_alpha<T: Real>(alpha: T, dim: usize) -> Result<()> {
    if alpha > T::zero() && alpha < T::of_usize(dim) {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!(
            "fractional integral needs 0 < alpha < {dim}, got {alpha}"
        )))
    }
}

/// `I_α f(x) = Σ_{y≠x} f(y) |x-y|^{α-n} h^n + f(x) ∫_cell |u|^{α-n} du`.
pub fn fractional_integral<T: Real>(f: &SampledFunction<T>, params: &OperatorParams<T>) -> Result<PointValues<T>> {
    let grid = f.grid();
    check_integral_alpha(params.alpha, grid.dim())?;
    let table = kernel_table(grid, params.alpha);
    let indices = params.indices(grid);
    let values: Vec<T> = indices
        .par_iter()
        .map(|&x| {
            let mut acc = T::zero();
            offset_sum(grid, x, f.values(), |k, v| acc += v * table[k]);
            acc
        })
        .collect();
    Ok(PointValues {
        grid: grid.clone(),
        indices,
        values,
    })
}

/// `M_α f(x) = max_k r_k^{α-n} ∫_{B(x, r_k)} |f|` over the radius ladder.
pub fn fractional_maximal<T: Real>(f: &SampledFunction<T>, params: &OperatorParams<T>) -> Result<PointValues<T>> {
    let grid = f.grid();
    let n = T::of_usize(grid.dim());
    if !(params.alpha >= T::zero() && params.alpha < n) {
        return Err(Error::InvalidParameter(format!(
            "fractional maximal operator needs 0 <= alpha < {}, got {}",
            grid.dim(),
            params.alpha
        )));
    }
    let ladder = &params.radius_ladder;
    if ladder.is_empty() {
        return Err(Error::InvalidParameter("radius ladder is empty".into()));
    }
    let shape = grid.shape();
    let h = grid.spacing();
    let outside = ladder.len();
    let r2: Vec<T> = ladder.iter().map(|&r| r * r).collect();
    // smallest rung whose open ball contains the offset
    let mut rung = vec![outside; shape[0] * shape[1] * shape[2]];
    for a0 in 0..shape[0] {
        for a1 in 0..shape[1] {
            for a2 in 0..shape[2] {
                let m = (a0 * a0 + a1 * a1 + a2 * a2) as f64;
                let d2 = h * h * T::of(m);
                rung[offset_index(shape, [a0, a1, a2])] = r2.partition_point(|&rr| !strictly_inside(d2, rr));
            }
        }
    }
    let scale: Vec<T> = ladder.iter().map(|&r| r.powf(params.alpha - n)).collect();
    let vol = grid.cell_volume();
    let abs: Vec<T> = f.values().iter().map(|v| v.abs()).collect();
    let indices = params.indices(grid);
    let values: Vec<T> = indices
        .par_iter()
        .map(|&x| {
            let mut bins = vec![T::zero(); outside + 1];
            offset_sum(grid, x, &abs, |k, v| bins[rung[k]] += v);
            let mut running = T::zero();
            let mut best = T::zero();
            for (k, s) in scale.iter().enumerate() {
                running += bins[k];
                best = best.max(*s * running * vol);
            }
            best
        })
        .collect();
    Ok(PointValues {
        grid: grid.clone(),
        indices,
        values,
    })
}

fn commutator<T, Op>(
    b: &SampledFunction<T>,
    f: &SampledFunction<T>,
    params: &OperatorParams<T>,
    op: Op,
) -> Result<PointValues<T>>
where
    T: Real,
    Op: Fn(&SampledFunction<T>, &OperatorParams<T>) -> Result<PointValues<T>>,
{
    if b.grid() != f.grid() {
        return Err(Error::GridMismatch);
    }
    let plain = op(f, params)?;
    let bf = b.zip_with(f, |x, y| x * y)?;
    let twisted = op(&bf, params)?;
    let values = plain
        .indices
        .iter()
        .zip(plain.values.iter().zip(&twisted.values))
        .map(|(&i, (&p, &t))| b.value(i) * p - t)
        .collect();
    Ok(PointValues {
        grid: plain.grid,
        indices: plain.indices,
        values,
    })
}

/// `I_{α,b} f = b I_α f - I_α(b f)`.
pub fn commutator_integral<T: Real>(
    b: &SampledFunction<T>,
    f: &SampledFunction<T>,
    params: &OperatorParams<T>,
) -> Result<PointValues<T>> {
    commutator(b, f, params, fractional_integral)
}

/// `M_{α,b} f = b M_α f - M_α(b f)`.
pub fn commutator_maximal<T: Real>(
    b: &SampledFunction<T>,
    f: &SampledFunction<T>,
    params: &OperatorParams<T>,
) -> Result<PointValues<T>> {
    commutator(b, f, params, fractional_maximal)
}

/// Message when `f` is nonzero outside the inner half of the box, where
/// truncating the domain of `I_α` starts to matter.
pub fn truncation_warning<T: Real>(f: &SampledFunction<T>) -> Option<String> {
    let grid = f.grid();
    let limit = grid.half_width() * T::of(0.5);
    let outside = f
        .values()
        .iter()
        .enumerate()
        .find(|(i, v)| **v != T::zero() && grid.point(*i)[..grid.dim()].iter().any(|c| c.abs() > limit));
    outside.map(|(i, _)| {
        format!(
            "function is nonzero at {:?}, outside the inner half of the box; I_alpha sees a truncated domain",
            &grid.point(i)[..grid.dim()]
        )
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn indicator(grid: &Grid<f64>, s: f64) -> SampledFunction<f64> {
        SampledFunction::sample(grid, |p| if p[0].abs() <= s { 1.0 } else { 0.0 }).unwrap()
    }

    #[test]
    fn self_cell_exact_in_one_dimension() {
        let g = Grid::<f64>::new(1, 4.0, 256).unwrap();
        let h = g.spacing();
        // ∫_{-h/2}^{h/2} |u|^{-1/2} du = 2 (h/2)^{1/2} / (1/2)
        assert_relative_eq!(
            self_cell_integral(&g, 0.5),
            4.0 * (h / 2.0).sqrt(),
            max_relative = 1e-14
        );
    }

    #[test]
    fn self_cell_bracketed_in_two_dimensions() {
        let g = Grid::<f64>::new(2, 1.0, 64).unwrap();
        let h = g.spacing();
        let alpha: f64 = 0.7;
        let inner = 2.0 * std::f64::consts::PI / alpha * (h / 2.0).powf(alpha);
        let outer = 2.0 * std::f64::consts::PI / alpha * (h / 2f64.sqrt()).powf(alpha);
        let v = self_cell_integral(&g, alpha);
        assert!(inner < v && v < outer);
    }

    #[test]
    fn zero_input_gives_zero_output() {
        let g = Grid::<f64>::new(1, 4.0, 128).unwrap();
        let z = SampledFunction::constant(&g, 0.0);
        let p = OperatorParams::new(0.5, &g);
        assert!(fractional_integral(&z, &p).unwrap().values.iter().all(|&v| v == 0.0));
        assert!(fractional_maximal(&z, &p).unwrap().values.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn riesz_potential_of_indicator_at_origin() {
        let g = Grid::<f64>::new(1, 4.0, 1024).unwrap();
        let f = indicator(&g, 1.0);
        let x0 = g.nearest_index(&[0.0; 3]);
        let x2 = g.nearest_index(&[2.0, 0.0, 0.0]);
        let p = OperatorParams::new(0.5, &g).with_eval_points(vec![x0, x2]);
        let out = fractional_integral(&f, &p).unwrap();
        assert_relative_eq!(out.values[0], 4.0, max_relative = 0.01);
        assert_relative_eq!(out.values[1], 2.0 * (3f64.sqrt() - 1.0), max_relative = 0.01);
    }

    #[test]
    fn rejects_alpha_out_of_range() {
        let g = Grid::<f64>::new(1, 1.0, 8).unwrap();
        let f = SampledFunction::constant(&g, 1.0);
        assert!(fractional_integral(&f, &OperatorParams::new(0.0, &g)).is_err());
        assert!(fractional_integral(&f, &OperatorParams::new(1.0, &g)).is_err());
        assert!(fractional_maximal(&f, &OperatorParams::new(0.0, &g)).is_ok());
        assert!(fractional_maximal(&f, &OperatorParams::new(-0.1, &g)).is_err());
    }

    #[test]
    fn empty_ladder_rejected() {
        let g = Grid::<f64>::new(1, 1.0, 8).unwrap();
        assert!(OperatorParams::new(0.5, &g).with_ladder(vec![]).is_err());
        assert!(OperatorParams::new(0.5, &g).with_ladder(vec![1.0, 0.5]).is_err());
    }

    #[test]
    fn maximal_of_indicator_at_origin() {
        let g = Grid::<f64>::new(1, 4.0, 512).unwrap();
        let f = indicator(&g, 1.0);
        let x0 = g.nearest_index(&[0.0; 3]);
        let out = fractional_maximal(&f, &OperatorParams::new(0.5, &g).with_eval_points(vec![x0])).unwrap();
        assert_relative_eq!(out.values[0], 2.0, max_relative = 0.05);
    }

    #[test]
    fn hardy_littlewood_of_constant_is_unit_ball_volume() {
        // the r^{-n} normalisation gives |B(x,r)|/r^n = 2 in one dimension
        let g = Grid::<f64>::new(1, 4.0, 512).unwrap();
        let f = SampledFunction::constant(&g, 3.0);
        let out = fractional_maximal(&f, &OperatorParams::new(0.0, &g)).unwrap();
        for (&i, &v) in out.indices.iter().zip(&out.values) {
            if g.point(i)[0].abs() < 3.0 {
                assert_relative_eq!(v, 6.0, max_relative = 0.02);
            }
        }
    }

    #[test]
    fn commutator_with_constant_vanishes() {
        let g = Grid::<f64>::new(1, 4.0, 256).unwrap();
        let f = indicator(&g, 1.0);
        let b = SampledFunction::constant(&g, 7.0);
        let p = OperatorParams::new(0.5, &g);
        for v in commutator_integral(&b, &f, &p).unwrap().values {
            assert!(v.abs() < 1e-10);
        }
        for v in commutator_maximal(&b, &f, &p).unwrap().values {
            assert!(v.abs() < 1e-10);
        }
    }

    #[test]
    fn partial_output_is_not_a_field() {
        let g = Grid::<f64>::new(1, 1.0, 8).unwrap();
        let f = SampledFunction::constant(&g, 1.0);
        let out = fractional_integral(&f, &OperatorParams::new(0.5, &g).with_eval_points(vec![1, 2])).unwrap();
        assert_eq!(out.into_field().unwrap_err(), Error::PartialField);
    }

    #[test]
    fn ladder_defect_for_sqrt_two() {
        let g = Grid::<f64>::new(1, 4.0, 64).unwrap();
        let p = OperatorParams::new(0.5, &g);
        assert_relative_eq!(p.ladder_defect(1), 2f64.powf(0.25), max_relative = 1e-12);
        assert!(*p.radius_ladder.last().unwrap() >= g.diameter());
    }

    #[test]
    fn truncation_warning_fires_outside_inner_half() {
        let g = Grid::<f64>::new(1, 4.0, 64).unwrap();
        assert!(truncation_warning(&indicator(&g, 1.0)).is_none());
        assert!(truncation_warning(&indicator(&g, 3.0)).is_some());
    }
}
