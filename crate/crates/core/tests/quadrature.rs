use approx::assert_relative_eq;
use morrey_core::{Ball, Grid, Grid64, SampledFunction};
use proptest::prelude::*;

fn unit_disk_area(cells: usize) -> f64 {
    let g = Grid64::new(2, 2.0, cells).unwrap();
    SampledFunction::constant(&g, 1.0)
        .ball_quadrature(&Ball::new(&[0.0, 0.0], 1.0).unwrap())
        .value
}

#[test]
fn disk_area_within_tolerance() {
    // h = 2^-7 on [-2, 2]^2
    let area = unit_disk_area(512);
    assert!((area - std::f64::consts::PI).abs() < 0.05, "area {area}");
}

#[test]
fn disk_area_agrees_with_refinement_extrapolation() {
    // the lattice count error is O(h^{3/2}) on average but erratic; average
    // three consecutive refinements and compare with the finest value
    let areas: Vec<f64> = [256, 512, 1024].iter().map(|&c| unit_disk_area(c)).collect();
    let spread = areas.iter().cloned().fold(f64::MIN, f64::max) - areas.iter().cloned().fold(f64::MAX, f64::min);
    assert!(spread < 0.02, "areas {areas:?}");
    let mean = areas.iter().sum::<f64>() / 3.0;
    assert!((areas[1] - mean).abs() < 0.02);
}

/// Radius that is not a multiple of any spacing used, so the interval
/// length is not an exact cell count.
const R: f64 = 0.97;

/// Mean absolute error over a spread of centers: the lattice-count error of
/// a single interval is a sawtooth in the endpoint position, its average is
/// proportional to `h`.
fn mean_unit_ball_error(cells: usize, g: &dyn Fn(f64) -> f64, exact: &dyn Fn(f64) -> f64) -> f64 {
    let grid = Grid64::new(1, 4.0, cells).unwrap();
    let f = SampledFunction::sample(&grid, |p| g(p[0])).unwrap();
    let centers: Vec<f64> = (0..37).map(|k| -0.5 + k as f64 / 36.0 * 0.987).collect();
    centers
        .iter()
        .map(|&c| (f.ball_quadrature(&Ball::new(&[c], R).unwrap()).value - exact(c)).abs())
        .sum::<f64>()
        / centers.len() as f64
}

#[test]
fn error_halves_with_spacing() {
    // ∫_{c-R}^{c+R} |y| dy = ((R+c)^2 + (R-c)^2)/2 for |c| < R
    type Pair<'a> = (&'a dyn Fn(f64) -> f64, &'a dyn Fn(f64) -> f64);
    let cases: [Pair; 2] = [
        (&|_| 1.0, &|_| 2.0 * R),
        (&|y: f64| y.abs(), &|c: f64| ((R + c).powi(2) + (R - c).powi(2)) / 2.0),
    ];
    for (g, exact) in cases {
        let mut prev: Option<f64> = None;
        for cells in [128usize, 256, 512, 1024] {
            let e = mean_unit_ball_error(cells, g, exact);
            let h = 8.0 / cells as f64;
            assert!(e <= 2.0 * h, "error {e} at h {h}");
            if let Some(p) = prev {
                let ratio = p / e;
                assert!(ratio > 2.0 / 3.0 && ratio < 6.0, "ratio {ratio}");
            }
            prev = Some(e);
        }
    }
}

#[test]
fn absolute_value_integral_in_one_dimension() {
    let g = Grid64::new(1, 4.0, 2048).unwrap();
    let f = SampledFunction::sample(&g, |p| p[0].abs()).unwrap();
    let v = f.ball_quadrature(&Ball::new(&[0.0], 1.0).unwrap()).value;
    assert_relative_eq!(v, 1.0, epsilon = 2.0 * g.spacing());
}

#[test]
fn single_precision_grid_agrees() {
    let g = Grid::<f32>::new(1, 4.0, 1024).unwrap();
    let f = SampledFunction::constant(&g, 1.0f32);
    let v = f.ball_quadrature(&Ball::new(&[0.0f32], 1.0).unwrap()).value;
    assert!((v - 2.0).abs() < 2.0 * g.spacing());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn quadrature_is_linear(a in -5.0f64..5.0, c in -1.5f64..1.5, r in 0.05f64..3.0, k in 1.0f64..4.0) {
        let g = Grid64::new(1, 4.0, 256).unwrap();
        let f1 = SampledFunction::sample(&g, |p| (k * p[0]).sin()).unwrap();
        let f2 = SampledFunction::sample(&g, |p| p[0] * p[0] - 1.0).unwrap();
        let combo = f1.zip_with(&f2, |x, y| a * x + y).unwrap();
        let b = Ball::new(&[c], r).unwrap();
        let lhs = combo.ball_quadrature(&b).value;
        let rhs = a * f1.ball_quadrature(&b).value + f2.ball_quadrature(&b).value;
        let scale = 1.0 + a.abs() * f1.abs().ball_quadrature(&b).value + f2.abs().ball_quadrature(&b).value;
        prop_assert!((lhs - rhs).abs() <= 1e-12 * scale);
    }

    #[test]
    fn quadrature_is_monotone_in_radius(cx in -1.0f64..1.0, cy in -1.0f64..1.0, r1 in 0.01f64..2.0, dr in 0.0f64..1.0) {
        let g = Grid64::new(2, 2.0, 64).unwrap();
        let f = SampledFunction::sample(&g, |p| 1.0 + p[0] * p[0] + (p[1]).cos()).unwrap();
        let small = f.ball_quadrature(&Ball::new(&[cx, cy], r1).unwrap()).value;
        let large = f.ball_quadrature(&Ball::new(&[cx, cy], r1 + dr).unwrap()).value;
        prop_assert!(small <= large);
    }
}
