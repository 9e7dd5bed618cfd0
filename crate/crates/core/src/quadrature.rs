//! Gauss–Legendre rules used as independent oracles for the closed forms.

use std::f64::consts::PI;
use std::sync::OnceLock;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::halfline::{hinner, HalfLineFunction, Side};

/// Nodes per panel of the composite rules.
pub const PANEL_NODES: usize = 16;
const MAX_DEPTH: usize = 30;
const ROUNDOFF_FACTOR: f64 = 50.0;

/// Gauss–Legendre nodes and weights on `[-1, 1]`.
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussLegendre {
    /// Newton iteration on `P_n` from Chebyshev initial guesses.
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "Gauss-Legendre rule needs at least one node");
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let nf = n as f64;
        for i in 0..n.div_ceil(2) {
            let mut x = (PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre(n, x);
            dp = if d != 0.0 { d } else { dp };
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        GaussLegendre { nodes, weights }
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn integrate<F: FnMut(f64) -> Complex64>(&self, lo: f64, hi: f64, mut f: F) -> Complex64 {
        let half = 0.5 * (hi - lo);
        let mid = 0.5 * (hi + lo);
        let mut acc = Complex64::new(0.0, 0.0);
        for (x, w) in self.nodes.iter().zip(&self.weights) {
            acc += f(mid + half * x) * *w;
        }
        acc * half
    }

    /// `(∫ f, ∫ |f|)` on `[lo, hi]`.
    pub fn integrate_with_magnitude<F: FnMut(f64) -> Complex64>(
        &self,
        lo: f64,
        hi: f64,
        mut f: F,
    ) -> (Complex64, f64) {
        let half = 0.5 * (hi - lo);
        let mid = 0.5 * (hi + lo);
        let mut acc = Complex64::new(0.0, 0.0);
        let mut mag = 0.0;
        for (x, w) in self.nodes.iter().zip(&self.weights) {
            let v = f(mid + half * x);
            acc += v * *w;
            mag += v.norm() * *w;
        }
        (acc * half, mag * half.abs())
    }
}

/// `(P_n(x), P_n'(x))` by the three-term recurrence.
fn legendre(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

pub(crate) fn panel_rule() -> &'static GaussLegendre {
    static RULE: OnceLock<GaussLegendre> = OnceLock::new();
    RULE.get_or_init(|| GaussLegendre::new(PANEL_NODES))
}

/// Breakpoints `0 = x_0 < ... < x_P = length` with geometrically growing
/// panels, first width `length / P²`.
pub fn graded_breakpoints(length: f64, panels: usize) -> Vec<f64> {
    let panels = panels.max(1);
    if panels == 1 {
        return vec![0.0, length];
    }
    let p = panels as f64;
    let target = p * p;
    let geometric_sum = |q: f64| {
        if (q - 1.0).abs() < 1e-14 {
            p
        } else {
            (q.powf(p) - 1.0) / (q - 1.0)
        }
    };
    let mut lo = 1.0;
    let mut hi = target.powf(1.0 / (p - 1.0)).max(1.0 + 1e-9);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if geometric_sum(mid) < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let ratio = 0.5 * (lo + hi);
    let first = length / geometric_sum(ratio);
    let mut points = Vec::with_capacity(panels + 1);
    let mut x = 0.0;
    let mut width = first;
    points.push(0.0);
    for _ in 0..panels - 1 {
        x += width;
        points.push(x);
        width *= ratio;
    }
    points.push(length);
    points
}

/// Composite rule over `[0, length]` with about `points` nodes on graded
/// panels, clustered near 0.
pub fn graded_integral<F: FnMut(f64) -> Complex64>(
    length: f64,
    points: usize,
    mut f: F,
) -> Complex64 {
    let rule = panel_rule();
    let breaks = graded_breakpoints(length, (points / PANEL_NODES).max(1));
    breaks
        .windows(2)
        .map(|w| rule.integrate(w[0], w[1], &mut f))
        .sum()
}

/// Size of the rounding noise in samples of `exp(phase(x))`: an argument of
/// modulus `p` carries absolute error about `eps * p`, so samples are only
/// reliable to `eps * (1 + base + rate * |x|)` relative.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct PhaseNoise {
    pub base: f64,
    pub rate: f64,
}

impl PhaseNoise {
    fn floor(&self, lo: f64, hi: f64) -> f64 {
        ROUNDOFF_FACTOR * f64::EPSILON * (1.0 + self.base + self.rate * lo.abs().max(hi.abs()))
    }
}

/// Adaptive bisection on 16-point panels: a panel is accepted when its
/// estimate agrees with the sum over its two halves to `abs_tol`, or to the
/// sampling noise relative to `∫ |f|` over the panel.
pub fn adaptive_integral<F: FnMut(f64) -> Complex64>(
    lo: f64,
    hi: f64,
    abs_tol: f64,
    noise: PhaseNoise,
    f: &mut F,
) -> Complex64 {
    fn recurse<F: FnMut(f64) -> Complex64>(
        lo: f64,
        hi: f64,
        whole: Complex64,
        tol: f64,
        noise: PhaseNoise,
        depth: usize,
        f: &mut F,
    ) -> Complex64 {
        let rule = panel_rule();
        let mid = 0.5 * (lo + hi);
        let (left, left_mag) = rule.integrate_with_magnitude(lo, mid, &mut *f);
        let (right, right_mag) = rule.integrate_with_magnitude(mid, hi, &mut *f);
        let split = left + right;
        let floor = noise.floor(lo, hi) * (left_mag + right_mag);
        if (split - whole).norm() <= tol.max(floor) || depth == 0 {
            return split;
        }
        recurse(lo, mid, left, 0.5 * tol, noise, depth - 1, f)
            + recurse(mid, hi, right, 0.5 * tol, noise, depth - 1, f)
    }
    if hi == lo {
        return Complex64::new(0.0, 0.0);
    }
    let whole = panel_rule().integrate(lo, hi, &mut *f);
    recurse(lo, hi, whole, abs_tol, noise, MAX_DEPTH, f)
}

/// Composite Gauss–Legendre estimate of `(f, g)` over the truncated window
/// `[anchor - T, anchor]` (left) or `[anchor, anchor + T]` (right).
pub fn quadrature_inner(
    f: &HalfLineFunction,
    g: &HalfLineFunction,
    truncation: f64,
    points: usize,
) -> Result<Complex64> {
    if f.side() != g.side() {
        return Err(Error::SideMismatch);
    }
    if f.anchor() != g.anchor() {
        return Err(Error::AnchorMismatch {
            expected: f.anchor(),
            found: g.anchor(),
        });
    }
    if f.dim() != g.dim() {
        return Err(Error::DimensionMismatch {
            expected: f.dim(),
            found: g.dim(),
        });
    }
    if truncation.is_nan() || truncation <= 0.0 || points < PANEL_NODES {
        return Err(Error::InvalidArgument(format!(
            "quadrature needs T > 0 and N >= {PANEL_NODES} (got T = {truncation}, N = {points})"
        )));
    }
    let direction = match f.side() {
        Side::Left => -1.0,
        Side::Right => 1.0,
    };
    Ok(graded_integral(truncation, points, |s| {
        let offset = direction * s;
        hinner(&f.value_unchecked(offset), &g.value_unchecked(offset))
    }))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rule_integrates_polynomials_exactly() {
        let rule = GaussLegendre::new(PANEL_NODES);
        let total: f64 = rule.weights().iter().sum();
        assert!((total - 2.0).abs() < 1e-14);
        // degree 31 is the exactness limit
        let v = rule.integrate(0.0, 1.0, |x| Complex64::new(x.powi(31), 0.0));
        assert!((v.re - 1.0 / 32.0).abs() < 1e-15);
    }

    #[test]
    fn graded_breakpoints_cover_interval() {
        let b = graded_breakpoints(400.0, 125);
        assert_eq!(b.len(), 126);
        assert!((b[125] - 400.0).abs() < 1e-12);
        assert!((b[1] - 400.0 / 125.0f64.powi(2)).abs() < 1e-9);
        assert!(b.windows(2).all(|w| w[1] > w[0]));
        assert_eq!(graded_breakpoints(3.0, 1), vec![0.0, 3.0]);
    }

    #[test]
    fn adaptive_resolves_oscillation() {
        let mut f = |x: f64| (Complex64::new(-1.0, 300.0) * x).exp();
        let v = adaptive_integral(0.0, 40.0, 1e-13, PhaseNoise::default(), &mut f);
        let exact = -Complex64::new(1.0, 0.0) / Complex64::new(-1.0, 300.0);
        assert!((v - exact).norm() < 1e-11);
    }

    #[test]
    fn noisy_phase_terminates_quickly() {
        let rate = Complex64::new(-1.3, 0.2 - 483.6);
        let mut evals = 0usize;
        let mut f = |x: f64| {
            evals += 1;
            (rate * x).exp()
        };
        let noise = PhaseNoise {
            base: 0.0,
            rate: rate.norm(),
        };
        let v: Complex64 = graded_breakpoints(4000.0, 125)
            .windows(2)
            .map(|w| adaptive_integral(w[0], w[1], 1e-15, noise, &mut f))
            .sum();
        assert!((v + 1.0 / rate).norm() < 1e-9 * (1.0 / rate).norm());
        assert!(evals < 1_000_000, "{evals} evaluations");
    }

    #[test]
    fn rejects_bad_arguments() {
        let f = HalfLineFunction::zero(Side::Left, 0.0, 1);
        assert!(quadrature_inner(&f, &f, 0.0, 100).is_err());
        assert!(quadrature_inner(&f, &f, 1.0, 8).is_err());
    }
}
