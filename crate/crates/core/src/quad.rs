//! One-dimensional quadrature used off the lattice: Gauss–Legendre panels
//! for radial ball integrals and a log-spaced trapezoid rule with an
//! analytic power-law tail for integrals over `[a, ∞)`.

use std::sync::OnceLock;

use crate::error::Result;
use crate::scalar::Real;

const GL_ORDER: usize = 16;

fn legendre_nodes(n: usize) -> Vec<(f64, f64)> {
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let mut p0 = 1.0;
            let mut p1 = x;
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        out.push((x, 2.0 / ((1.0 - x * x) * dp * dp)));
    }
    out
}

fn gl_table() -> &'static [(f64, f64)] {
    static TABLE: OnceLock<Vec<(f64, f64)>> = OnceLock::new();
    TABLE.get_or_init(|| legendre_nodes(GL_ORDER))
}

/// 16-point Gauss–Legendre rule on `[a, b]`.
pub fn gauss_legendre<T: Real, F: Fn(T) -> T>(f: &F, a: T, b: T) -> T {
    let half = (b - a) * T::of(0.5);
    let mid = (b + a) * T::of(0.5);
    let mut acc = T::zero();
    for &(x, w) in gl_table() {
        acc += T::of(w) * f(mid + half * T::of(x));
    }
    acc * half
}

/// Composite rule on `[a, b]` with panel edges at powers of two, so that
/// integrands varying on geometric scales (including integrable power
/// singularities at `0`) are resolved. When `a = 0` the first panel is
/// `[0, floor]`, with `floor` raised to `b 2^-48` if smaller.
pub fn geometric_panels<T: Real, F: Fn(T) -> T>(f: &F, a: T, b: T, floor: T) -> T {
    if !(b > a) {
        return T::zero();
    }
    let two = T::of(2.0);
    let mut edges = vec![a];
    let top = b.log2().floor();
    let bottom = if a > T::zero() {
        a.log2().floor() + T::one()
    } else {
        (top - T::of(48.0)).max(floor.log2().floor())
    };
    let mut k = bottom;
    while k <= top {
        let e = two.powf(k);
        if e > a && e < b {
            edges.push(e);
        }
        k += T::one();
    }
    edges.push(b);
    let mut acc = T::zero();
    for w in edges.windows(2) {
        // long panels far from the origin are split further
        let pieces = ((w[1] - w[0]) / w[0].max(T::of(1e-300)))
            .min(T::of(8.0))
            .max(T::one())
            .ceil()
            .to_usize()
            .unwrap_or(1);
        let step = (w[1] - w[0]) / T::of_usize(pieces);
        for i in 0..pieces {
            let lo = w[0] + step * T::of_usize(i);
            acc += gauss_legendre(f, lo, lo + step);
        }
    }
    acc
}

/// Integrates `g` on `[a, b]` after the substitution
/// `x = (a+b)/2 - (b-a)/2 cos θ`, which removes square-root behaviour at
/// both endpoints.
pub fn cosine_substitution<T: Real, F: Fn(T) -> T>(g: &F, a: T, b: T) -> T {
    if !(b > a) {
        return T::zero();
    }
    let mid = (a + b) * T::of(0.5);
    let half = (b - a) * T::of(0.5);
    let h = |theta: T| g(mid - half * theta.cos()) * half * theta.sin();
    let panels = 4;
    let width = T::PI() / T::of_usize(panels);
    (0..panels)
        .map(|i| {
            let lo = width * T::of_usize(i);
            gauss_legendre(&h, lo, lo + width)
        })
        .fold(T::zero(), |acc, v| acc + v)
}

/// Multiplicative factor applied inside `∫ ... dt/t`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LogFactor<T> {
    None,
    /// `e + ln(t/r)`
    EPlusLog {
        r: T,
    },
    /// `ln(e + t/r)`
    LogEPlus {
        r: T,
    },
}

impl<T: Real> LogFactor<T> {
    pub fn at(&self, t: T) -> T {
        match *self {
            LogFactor::None => T::one(),
            LogFactor::EPlusLog { r } => T::E() + (t / r).ln(),
            LogFactor::LogEPlus { r } => (T::E() + t / r).ln(),
        }
    }

    fn has_log(&self) -> bool {
        !matches!(self, LogFactor::None)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TailIntegral<T> {
    /// `None` when the fitted tail exponent is non-negative.
    pub value: Option<T>,
    pub tail_exponent: T,
    /// Last node of the numeric part; the tail covers `[upper, ∞)`.
    pub upper: T,
    pub tail_share: T,
}

/// Tail exponents at or above this are treated as divergent.
pub const DIVERGENCE_TOL: f64 = 1e-9;

/// Samples of `g` at `t_j = start · 10^{j/n}` over whole decades covering
/// `[start, upper]`, reusable for integrals from any lower limit in range.
#[derive(Debug, Clone, PartialEq)]
pub struct LogSamples<T> {
    nodes: Vec<(T, T)>,
    per_decade: usize,
}

impl<T: Real> LogSamples<T> {
    pub fn new<G: Fn(T) -> Result<T>>(g: G, start: T, upper: T, nodes_per_decade: usize) -> Result<Self> {
        let ten = T::of(10.0);
        let decades = (upper / start).log10().ceil().max(T::one()).to_usize().unwrap_or(1);
        let n = nodes_per_decade.max(2);
        let total = decades * n;
        let mut nodes = Vec::with_capacity(total + 1);
        for j in 0..=total {
            let t = start * ten.powf(T::of_usize(j) / T::of_usize(n));
            nodes.push((t, g(t)?));
        }
        Ok(Self { nodes, per_decade: n })
    }

    pub fn start(&self) -> T {
        self.nodes[0].0
    }

    pub fn end(&self) -> T {
        self.nodes[self.nodes.len() - 1].0
    }

    /// Exponent `s` of `g ~ t^s` fitted over the last decade.
    pub fn tail_exponent(&self) -> T {
        let last = self.nodes.len() - 1;
        let (_, g_end) = self.nodes[last];
        let (_, g_prev) = self.nodes[last - self.per_decade];
        if g_end == T::zero() {
            T::neg_infinity()
        } else {
            (g_end / g_prev).ln() / T::of(10.0).ln()
        }
    }

    /// `∫_a^∞ g(t) factor(t) dt/t` for `start ≤ a < end`, given `g_a = g(a)`:
    /// trapezoid rule in `ln t` up to the last node, then the analytic tail
    /// of `g_end (t/t_end)^s (ℓ + κ ln(t/t_end))` with `s` from
    /// [`LogSamples::tail_exponent`].
    pub fn integral_from(&self, a: T, g_a: T, factor: LogFactor<T>) -> TailIntegral<T> {
        let du = T::of(10.0).ln() / T::of_usize(self.per_decade);
        let j = self.nodes.partition_point(|&(t, _)| t < a).min(self.nodes.len() - 1);
        let half = T::of(0.5);
        let mut body = T::zero();
        let (tj, gj) = self.nodes[j];
        if tj > a {
            body += half * (tj / a).ln() * (g_a * factor.at(a) + gj * factor.at(tj));
        }
        for w in self.nodes[j..].windows(2) {
            body += half * du * (w[0].1 * factor.at(w[0].0) + w[1].1 * factor.at(w[1].0));
        }
        let (upper, g_end) = self.nodes[self.nodes.len() - 1];
        let s = self.tail_exponent();
        if g_end == T::zero() {
            return TailIntegral {
                value: Some(body),
                tail_exponent: s,
                upper,
                tail_share: T::zero(),
            };
        }
        if !(s < -T::of(DIVERGENCE_TOL)) {
            return TailIntegral {
                value: None,
                tail_exponent: s,
                upper,
                tail_share: T::one(),
            };
        }
        let ell = factor.at(upper);
        let kappa = if factor.has_log() { T::one() } else { T::zero() };
        let tail = g_end * (ell / (-s) + kappa / (s * s));
        let total = body + tail;
        TailIntegral {
            value: Some(total),
            tail_exponent: s,
            upper,
            tail_share: tail / total,
        }
    }
}

/// `∫_a^∞ g(t) factor(t) dt/t` by the trapezoid rule in `ln t` on
/// `[a, upper]` with `nodes_per_decade` nodes per decade, followed by the
/// analytic tail of `g(upper) (t/upper)^s (ℓ + κ ln(t/upper))`, where `s`
/// is fitted from the last decade of `g`.
pub fn log_tail_integral<T, G>(
    g: G,
    a: T,
    upper: T,
    nodes_per_decade: usize,
    factor: LogFactor<T>,
) -> Result<TailIntegral<T>>
where
    T: Real,
    G: Fn(T) -> Result<T>,
{
    let samples = LogSamples::new(g, a, upper, nodes_per_decade)?;
    let g_a = samples.nodes[0].1;
    Ok(samples.integral_from(a, g_a, factor))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn legendre_rule_is_exact_for_polynomials() {
        let v = gauss_legendre(&|x: f64| x.powi(30) + 3.0 * x, -1.0, 1.0);
        assert_relative_eq!(v, 2.0 / 31.0, max_relative = 1e-13);
        let w: f64 = gl_table().iter().map(|p| p.1).sum();
        assert_relative_eq!(w, 2.0, max_relative = 1e-14);
    }

    #[test]
    fn geometric_panels_resolve_endpoint_singularity() {
        let v = geometric_panels(&|x: f64| x.powf(-0.5), 0.0, 4.0, 0.0);
        assert_relative_eq!(v, 4.0, max_relative = 1e-6);
        let w = geometric_panels(&|x: f64| 1.0 / (1.0 + x * x), 0.0, 1000.0, 1.0 / 16.0);
        assert_relative_eq!(w, 1000f64.atan(), max_relative = 1e-10);
    }

    #[test]
    fn cosine_substitution_handles_sqrt_endpoints() {
        // ∫_0^1 sqrt(x(1-x)) dx = π/8
        let v = cosine_substitution(&|x: f64| (x * (1.0 - x)).max(0.0).sqrt(), 0.0, 1.0);
        assert_relative_eq!(v, std::f64::consts::PI / 8.0, max_relative = 1e-10);
    }

    #[test]
    fn power_tail_is_exact_for_pure_powers() {
        // ∫_1^∞ t^{-1/2} dt/t = 2
        let r = log_tail_integral(|t: f64| Ok(t.powf(-0.5)), 1.0, 100.0, 64, LogFactor::None).unwrap();
        assert_relative_eq!(r.value.unwrap(), 2.0, max_relative = 1e-4);
        assert_relative_eq!(r.tail_exponent, -0.5, max_relative = 1e-10);
    }

    #[test]
    fn log_tail_matches_closed_form() {
        // ∫_δ^∞ (e + ln(t/r)) t^a dt/t = δ^a [(e + ln(δ/r))/(-a) + 1/a^2]
        let (a, delta, r): (f64, f64, f64) = (-0.35, 1.0, 0.05);
        let exact = delta.powf(a) * ((std::f64::consts::E + (delta / r).ln()) / (-a) + 1.0 / (a * a));
        let res = log_tail_integral(|t: f64| Ok(t.powf(a)), delta, 1e3, 64, LogFactor::EPlusLog { r }).unwrap();
        assert_relative_eq!(res.value.unwrap(), exact, max_relative = 1e-4);
    }

    #[test]
    fn samples_reused_from_interior_lower_limit() {
        // ∫_a^∞ t^{-0.4} dt/t = a^{-0.4}/0.4 for a between nodes
        let g = |t: f64| Ok(t.powf(-0.4));
        let s = LogSamples::new(g, 1e-3, 1e3, 64).unwrap();
        for a in [1e-3, 0.0123, 0.5, 7.0] {
            let v = s.integral_from(a, a.powf(-0.4), LogFactor::None).value.unwrap();
            assert_relative_eq!(v, a.powf(-0.4) / 0.4, max_relative = 1e-4);
        }
    }

    #[test]
    fn flat_integrand_diverges() {
        let r = log_tail_integral(|_t: f64| Ok(1.0), 1.0, 1e3, 64, LogFactor::None).unwrap();
        assert!(r.value.is_none());
        let r = log_tail_integral(|t: f64| Ok(t.powf(0.2)), 1.0, 1e3, 64, LogFactor::None).unwrap();
        assert!(r.value.is_none());
    }
}
